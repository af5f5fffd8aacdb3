//! Check runners behind the `jacring` binary. Every runner returns a list of
//! [`CheckReport`]s in grid order; grid points run in parallel.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use jacring::certify::{certify_transversality, Transversality};
use jacring::duality::{duality_grid, DualityTask, EtaTask};
use jacring::koszul::{exactness_condition, koszul_grid, KoszulTask, MultiplicationKernelTask, SubspaceSpec};
use jacring::logforms::residue_matrix_check;
use jacring::modular::{DimsTask, Evaluated};
use jacring::oracles::{hodge_check_from_dims, punctured_curve_log_hodge, HodgeTask, OracleSource};
use jacring::{instance_digest, BiDegree, Instance, Result, Verdict, Workbench, WorkbenchOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub instance_digest: String,
    pub check_name: String,
    pub parameters: Value,
    pub observed: Value,
    pub expected: Value,
    pub verdict: Verdict,
    pub timing_ms: f64,
    pub seed: u64,
    pub primes_used: Vec<u64>,
}

/// Settings shared by all checks.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub seed: u64,
    pub primes: usize,
    pub budget: usize,
    pub degree_cap: Option<usize>,
    pub codim: usize,
    pub sweep: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            primes: 2,
            budget: jacring::linalg::default_budget(),
            degree_cap: None,
            codim: 0,
            sweep: false,
        }
    }
}

/// An instance loaded for checking, with its rings over the chosen primes.
pub struct Session {
    instance: Instance,
    digest: String,
    workbench: Workbench,
    opts: RunOptions,
}

/// What a check produced before it is wrapped into a report.
struct Outcome {
    observed: Value,
    expected: Value,
    verdict: Verdict,
    primes_used: Vec<u64>,
}

impl Outcome {
    fn from_evaluated<T>(ev: &Evaluated<T>, observed: Value, expected: Value, verdict: Verdict) -> Self {
        Self {
            observed,
            expected,
            verdict,
            primes_used: ev.primes_used.clone(),
        }
    }
}

impl Session {
    pub fn new(instance: Instance, opts: RunOptions) -> Result<Self> {
        let workbench = Workbench::new(
            &instance,
            &WorkbenchOptions {
                primes: opts.primes,
                seed: opts.seed,
                budget: opts.budget,
            },
        )?;
        Ok(Self {
            digest: instance_digest(&instance),
            instance,
            workbench,
            opts,
        })
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }

    fn report(&self, name: &str, parameters: Value, run: impl FnOnce() -> Result<Outcome>) -> CheckReport {
        let start = Instant::now();
        let outcome = run().unwrap_or_else(|e| Outcome {
            observed: json!({ "error": e.to_string() }),
            expected: Value::Null,
            verdict: Verdict::Unknown,
            primes_used: self.workbench.primes(),
        });
        CheckReport {
            instance_digest: self.digest.clone(),
            check_name: name.to_string(),
            parameters,
            observed: outcome.observed,
            expected: outcome.expected,
            verdict: outcome.verdict,
            timing_ms: (start.elapsed().as_secs_f64() * 1e4).round() / 10.0,
            seed: self.opts.seed,
            primes_used: outcome.primes_used,
        }
    }

    fn subspace(&self, codim: usize) -> SubspaceSpec {
        match codim {
            0 => SubspaceSpec::Full,
            codim => SubspaceSpec::RandomCodim {
                codim,
                seed: self.opts.seed,
            },
        }
    }

    /// `dim A_q(l)` and `dim B_q(l)`, at one point or over a sweep of
    /// `0 <= q <= n - r` and `-1 <= l <= 2(d-n-1)+e`.
    pub fn dims(&self, q: Option<i64>, l: Option<i64>) -> Vec<CheckReport> {
        let inst = &self.instance;
        let points: Vec<(i64, i64)> = if self.opts.sweep {
            let top = inst.top_bidegree().l.max(0);
            (0..=inst.m().max(0)).flat_map(|q| (-1..=top).map(move |l| (q, l))).collect()
        } else {
            vec![(q.unwrap_or(0), l.unwrap_or(0))]
        };
        let grading = inst.grading();
        points
            .par_iter()
            .map(|&(q, l)| {
                self.report("dims", json!({ "q": q, "l": l }), || {
                    let bd = BiDegree::new(q, l);
                    let ev = self.workbench.evaluate(&DimsTask(vec![bd]))?;
                    let observed = json!({ "dim_a": grading.dim_piece(bd), "dim_b": ev.value[0] });
                    Ok(Outcome::from_evaluated(&ev, observed, Value::Null, Verdict::Observed))
                })
            })
            .collect()
    }

    /// The pieces `B_q(d+e-n-1+l)` against the Hodge number oracles, plus the
    /// total dimension for punctured curves.
    pub fn hodge(&self, l: i64) -> Vec<CheckReport> {
        let inst = &self.instance;
        let ev = match self.workbench.evaluate(&HodgeTask { l }) {
            Ok(ev) => ev,
            Err(e) => {
                return vec![self.report("hodge", json!({ "l": l }), || Err(e))];
            }
        };
        let predictions = match hodge_check_from_dims(inst, l, &ev.value) {
            Ok(p) => p,
            Err(e) => return vec![self.report("hodge", json!({ "l": l }), || Err(e))],
        };
        let mut out: Vec<CheckReport> = predictions
            .iter()
            .map(|p| {
                self.report("hodge", json!({ "q": p.q, "l": l }), || {
                    Ok(Outcome::from_evaluated(
                        &ev,
                        json!({ "dim_b": p.predicted_dim, "bidegree": p.bidegree }),
                        json!({ "dim": p.oracle_dim, "source": p.source }),
                        p.verdict,
                    ))
                })
            })
            .collect();
        if predictions.first().is_some_and(|p| p.source == OracleSource::PuncturedCurve) {
            let pc = punctured_curve_log_hodge(inst.d()[0], &inst.e());
            let total: usize = ev.value.iter().sum();
            out.push(self.report("hodge-total", json!({ "l": l }), || {
                Ok(Outcome::from_evaluated(
                    &ev,
                    json!({ "sum_dim_b": total }),
                    json!({ "dim": pc.total(), "genus": pc.genus, "points": pc.points }),
                    Verdict::from_check(total == pc.total()),
                ))
            }));
        }
        out
    }

    /// Pairing ranks over the default `(p, l)` grid with `--sweep`, else at
    /// `l = 0`; followed by the kernel of `eta`.
    pub fn duality(&self) -> Vec<CheckReport> {
        self.duality_over(self.opts.sweep)
    }

    fn duality_over(&self, sweep: bool) -> Vec<CheckReport> {
        let inst = &self.instance;
        let grid: Vec<(i64, i64)> = if sweep {
            duality_grid(inst)
        } else {
            (0..=inst.m().max(0)).map(|p| (p, 0)).collect()
        };
        let mut out: Vec<CheckReport> = grid
            .par_iter()
            .map(|&(p, l)| {
                self.report("duality", json!({ "p": p, "l": l }), || {
                    let ev = self.workbench.evaluate(&DualityTask { p, l })?;
                    let r = &ev.value;
                    Ok(Outcome::from_evaluated(
                        &ev,
                        json!({ "left_dim": r.left_dim, "right_dim": r.right_dim, "rank": r.rank }),
                        json!({ "condition": r.condition }),
                        r.verdict,
                    ))
                })
            })
            .collect();
        if inst.m() >= 1 {
            out.push(self.report("eta", json!({}), || {
                let ev = self.workbench.evaluate(&EtaTask)?;
                let r = &ev.value;
                Ok(Outcome::from_evaluated(
                    &ev,
                    json!({ "source_dim": r.source_dim, "target_dim": r.target_dim, "rank": r.rank, "kernel_dim": r.kernel_dim }),
                    json!({ "kernel_dim": r.expected_kernel, "surjective": true }),
                    r.verdict,
                ))
            }));
        }
        out
    }

    /// Middle Koszul homology over the grid (only the points covered by an
    /// exactness condition unless `--sweep`), then multiplication kernels.
    pub fn koszul(&self) -> Vec<CheckReport> {
        self.koszul_over(self.opts.sweep, self.opts.codim)
    }

    fn koszul_over(&self, sweep: bool, codim: usize) -> Vec<CheckReport> {
        let inst = &self.instance;
        let c = codim as i64;
        let grid: Vec<(i64, i64, i64)> = koszul_grid(inst)
            .into_iter()
            .filter(|&(p, q, l)| sweep || exactness_condition(inst, p, q, l, c).holds())
            .collect();
        let v = self.subspace(codim);
        let mut out: Vec<CheckReport> = grid
            .par_iter()
            .map(|&(p, q, l)| {
                self.report("koszul", json!({ "p": p, "q": q, "l": l, "codim": c }), || {
                    let ev = self.workbench.evaluate(&KoszulTask { v, p, q, l })?;
                    let r = &ev.value;
                    Ok(Outcome::from_evaluated(
                        &ev,
                        json!({ "dims": r.dims, "rank_first": r.rank_first, "rank_second": r.rank_second, "middle_homology": r.middle_homology }),
                        json!({ "condition": r.condition }),
                        r.verdict,
                    ))
                })
            })
            .collect();
        let kernels: Vec<i64> = (0..=inst.m()).collect();
        out.extend(kernels.par_iter().map(|&q| {
            self.report("multiplication-kernel", json!({ "q": q, "codim": c }), || {
                let ev = self.workbench.evaluate(&MultiplicationKernelTask { v, q })?;
                let r = &ev.value;
                Ok(Outcome::from_evaluated(
                    &ev,
                    json!({ "source_dim": r.source_dim, "kernel_dim": r.kernel_dim }),
                    json!({ "kernel_dim": r.expected }),
                    r.verdict,
                ))
            })
        }).collect::<Vec<_>>());
        out
    }

    /// Residue matrix of the normalized dlog forms.
    pub fn residue(&self) -> Vec<CheckReport> {
        vec![self.report("residue", json!({}), || {
            let r = residue_matrix_check(&self.instance)?;
            Ok(Outcome {
                observed: json!({ "size": r.size, "identity": r.identity, "raw_scale_ok": r.raw_scale_ok }),
                expected: json!({ "identity": true }),
                verdict: r.verdict,
                primes_used: Vec::new(),
            })
        })]
    }

    /// Transversality certificate.
    pub fn certify(&self) -> Vec<CheckReport> {
        vec![self.report("certify", json!({ "degree_cap": self.opts.degree_cap }), || {
            let r = certify_transversality(&self.instance, self.opts.degree_cap, self.opts.budget)?;
            let verdict = match r.verdict {
                Transversality::Certified => Verdict::Pass,
                Transversality::FailedWitness => Verdict::Fail,
                Transversality::Unknown => Verdict::Unknown,
            };
            Ok(Outcome {
                observed: serde_json::to_value(&r).expect("serializable"),
                expected: json!({ "verdict": Transversality::Certified }),
                verdict,
                primes_used: vec![r.prime],
            })
        })]
    }

    /// Certificate, Hodge comparison, duality and Koszul sweeps for every
    /// codimension up to `codim`, and residues.
    pub fn suite(&self) -> Vec<CheckReport> {
        let mut out = self.certify();
        let geometric = self.instance.require_geometric().is_ok();
        if geometric {
            out.extend(self.hodge(0));
        }
        out.extend(self.duality_over(true));
        for codim in 0..=self.opts.codim {
            out.extend(self.koszul_over(true, codim));
        }
        if geometric {
            out.extend(self.residue());
        }
        out
    }
}

/// Counts of each verdict.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    #[serde(rename = "PASS")]
    pub pass: usize,
    #[serde(rename = "FAIL")]
    pub fail: usize,
    #[serde(rename = "OBSERVED")]
    pub observed: usize,
    #[serde(rename = "UNKNOWN")]
    pub unknown: usize,
}

impl Summary {
    pub fn add(&mut self, v: Verdict) {
        match v {
            Verdict::Pass => self.pass += 1,
            Verdict::Fail => self.fail += 1,
            Verdict::Observed => self.observed += 1,
            Verdict::Unknown => self.unknown += 1,
        }
    }

    pub fn of(reports: &[CheckReport]) -> Self {
        let mut s = Self::default();
        for r in reports {
            s.add(r.verdict);
        }
        s
    }

    pub fn total(&self) -> usize {
        self.pass + self.fail + self.observed + self.unknown
    }
}

/// One JSON object per line.
pub fn write_ndjson<W: Write>(mut w: W, reports: &[CheckReport]) -> std::io::Result<()> {
    for r in reports {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    instance_digest: &'a str,
    check_name: &'a str,
    pass: usize,
    fail: usize,
    observed: usize,
    unknown: usize,
}

/// Verdict counts per instance and check, as CSV.
pub fn write_csv_summary<W: Write>(w: W, reports: &[CheckReport]) -> std::result::Result<(), csv::Error> {
    let mut groups: BTreeMap<(&str, &str), Summary> = BTreeMap::new();
    for r in reports {
        groups
            .entry((r.instance_digest.as_str(), r.check_name.as_str()))
            .or_default()
            .add(r.verdict);
    }
    let mut out = csv::Writer::from_writer(w);
    for ((digest, name), s) in groups {
        out.serialize(SummaryRow {
            instance_digest: digest,
            check_name: name,
            pass: s.pass,
            fail: s.fail,
            observed: s.observed,
            unknown: s.unknown,
        })?;
    }
    out.flush()?;
    Ok(())
}

/// Reports with timing removed, for reproducibility comparisons.
pub fn without_timing(reports: &[CheckReport]) -> Vec<CheckReport> {
    reports
        .iter()
        .map(|r| CheckReport {
            timing_ms: 0.0,
            ..r.clone()
        })
        .collect()
}
