//! Acceptance run: one PASS/FAIL line per criterion. Built with
//! `harness = false` so the lines are always printed.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use jacring::certify::{generate_certified, sweep_pool, CertifiedInstance};
use jacring::duality::{duality_grid, DualityCondition, DualityTask};
use jacring::koszul::{koszul_complex, koszul_grid, multiplication_kernel, KoszulTask, Subspace, SubspaceSpec};
use jacring::linalg::{default_budget, rank_fraction_free, rank_multimodular, ModularOptions};
use jacring::logforms::residue_matrix_check_for;
use jacring::modular::DimsTask;
use jacring::oracles::{
    classical_jacobian_dim, griffiths_hypersurface, hodge_check_from_dims, punctured_curve_log_hodge, HodgeTask,
    OracleSource, ORACLE_PRIME,
};
use jacring::{
    reference, BiDegree, FieldSpec, Instance, JacobianRing, PrimeField, RationalField, Result, Verdict, Workbench,
    WorkbenchOptions,
};

const SEED: u64 = 20_240_601;
const POOL_SIZE: usize = 20;

struct Line {
    ok: bool,
    detail: String,
    limit: Option<Duration>,
}

fn line(ok: bool, detail: impl Into<String>) -> Line {
    Line {
        ok,
        detail: detail.into(),
        limit: None,
    }
}

fn within(mut l: Line, secs: u64) -> Line {
    l.limit = Some(Duration::from_secs(secs));
    l
}

fn workbench(inst: &Instance) -> Result<Workbench> {
    Workbench::new(inst, &WorkbenchOptions { seed: SEED, ..Default::default() })
}

fn fermat_quartic() -> Result<Line> {
    let inst = reference::fermat_quartic();
    let wb = workbench(&inst)?;
    let bds: Vec<BiDegree> = (0..=2).map(|q| BiDegree::new(q, 0)).collect();
    let dims = wb.evaluate(&DimsTask(bds))?.value;
    let oracle: Vec<usize> = (0..=2)
        .map(|q| classical_jacobian_dim(&inst.f()[0], 4 * (q + 1) - 4, ORACLE_PRIME))
        .collect::<Result<_>>()?;
    let trace_ok = wb.primary().trace().is_ok();
    let mut ok = dims == vec![1, 19, 1] && dims == oracle && trace_ok;
    for p in 0..=2 {
        let r = wb.evaluate(&DualityTask { p, l: 0 })?.value;
        ok &= r.condition == DualityCondition::IsoNoBoundary && r.verdict == Verdict::Pass;
    }
    Ok(within(
        line(ok, format!("dims {dims:?}, oracle {oracle:?}, trace defined {trace_ok}, pairings (0..=2, 0) iso")),
        10,
    ))
}

fn fermat_quintic() -> Result<Line> {
    let inst = reference::fermat_quintic();
    let wb = workbench(&inst)?;
    let dims = wb.evaluate(&DimsTask(vec![BiDegree::new(1, 0), BiDegree::new(2, 0)]))?.value;
    let oracle = vec![griffiths_hypersurface(4, 5, 1), griffiths_hypersurface(4, 5, 2)];
    Ok(within(line(dims == vec![101, 101] && dims == oracle, format!("dims {dims:?}, oracle {oracle:?}")), 60))
}

fn elliptic_plus_line() -> Result<Line> {
    let inst = reference::elliptic_plus_line();
    let wb = workbench(&inst)?;
    let dims = wb.evaluate(&HodgeTask { l: 0 })?.value;
    let checks = hodge_check_from_dims(&inst, 0, &dims)?;
    let oracle_ok = checks.iter().all(|c| c.verdict == Verdict::Pass && c.source == OracleSource::PuncturedCurve);
    let top = wb.evaluate(&DimsTask(vec![BiDegree::new(1, 1)]))?.value[0];
    let h = wb.evaluate(&DualityTask { p: 0, l: 0 })?.value;
    let ok = dims == vec![3, 1] && oracle_ok && top == 1 && h.rank == 1 && h.verdict == Verdict::Pass;
    Ok(within(
        line(ok, format!("B_0(1), B_1(1) = {dims:?}, top piece dim {top}, h_0(0) rank {}", h.rank)),
        5,
    ))
}

fn punctured_curves() -> Result<Line> {
    let e_lists: [&[u32]; 6] = [&[1], &[2], &[3], &[1, 1], &[1, 2], &[1, 1, 1]];
    let mut count = 0;
    let mut bad = Vec::new();
    for d in 3..=5u32 {
        for (k, e) in e_lists.iter().enumerate() {
            let c = generate_certified(2, &[d], e, FieldSpec::Rationals, SEED + 10 * d as u64 + k as u64, 10, default_budget())?;
            let wb = workbench(&c.instance)?;
            let dims = wb.evaluate(&HodgeTask { l: 0 })?.value;
            let per_q = hodge_check_from_dims(&c.instance, 0, &dims)?.iter().all(|p| p.verdict == Verdict::Pass);
            let pc = punctured_curve_log_hodge(d, e);
            let total = dims.iter().sum::<usize>();
            if !per_q || total != 2 * pc.genus + pc.points - 1 {
                bad.push(format!("d={d} e={e:?}: {dims:?}"));
            }
            count += 1;
        }
    }
    Ok(within(line(bad.is_empty(), format!("{count} certified curves; mismatches {bad:?}")), 300))
}

fn duality_sweep(pool: &[CertifiedInstance]) -> Result<Line> {
    let (mut iso, mut inj, mut observed, mut fails) = (0, 0, 0, Vec::new());
    for c in pool {
        let wb = workbench(&c.instance)?;
        for (p, l) in duality_grid(&c.instance) {
            let r = wb.evaluate(&DualityTask { p, l })?.value;
            match r.condition {
                DualityCondition::InjectiveOnly => inj += 1,
                cond if cond.is_iso() => iso += 1,
                _ => observed += 1,
            }
            if r.verdict == Verdict::Fail {
                fails.push(format!("{:?} at ({p}, {l})", c.instance.e()));
            }
        }
    }
    Ok(line(
        fails.is_empty() && iso > 0 && inj > 0,
        format!("{} instances: {iso} iso points, {inj} injective points, {observed} observed; fails {fails:?}", pool.len()),
    ))
}

fn koszul_sweep(pool: &[CertifiedInstance], complexes: &mut usize) -> Result<Line> {
    let (mut checked, mut observed, mut fails) = (0, 0, Vec::new());
    for (i, c) in pool.iter().enumerate() {
        let wb = workbench(&c.instance)?;
        for codim in 0..=2usize {
            let v = match codim {
                0 => SubspaceSpec::Full,
                codim => SubspaceSpec::RandomCodim { codim, seed: SEED + i as u64 },
            };
            for (p, q, l) in koszul_grid(&c.instance) {
                let ev = wb.evaluate(&KoszulTask { v, p, q, l })?;
                *complexes += ev.primes_used.len();
                match ev.value.verdict {
                    Verdict::Pass => checked += 1,
                    Verdict::Observed => observed += 1,
                    _ => fails.push(format!("instance {i} codim {codim} at ({p}, {q}, {l})")),
                }
            }
        }
    }
    Ok(line(
        fails.is_empty() && checked > 0,
        format!("{checked} exact points, {observed} observed; fails {fails:?}"),
    ))
}

fn kernel_counts() -> Result<Line> {
    let mut seen = Vec::new();
    let mut ok = true;
    for (e, expected) in [(&[1u32, 1, 1][..], 2usize), (&[1][..], 0)] {
        for seed in 1..=3 {
            let c = generate_certified(2, &[3], e, FieldSpec::Rationals, SEED + seed, 10, default_budget())?;
            let ring = JacobianRing::new(&c.instance, RationalField)?;
            let v = Subspace::full(&RationalField, ring.dim_b(BiDegree::new(1, 0))?);
            let r = multiplication_kernel(&ring, &v, 0)?;
            ok &= r.kernel_dim == expected && r.expected == Some(expected) && r.verdict == Verdict::Pass;
            seen.push(r.kernel_dim);
        }
    }
    Ok(line(ok, format!("kernels over Q for s = 3, 3, 3, 1, 1, 1: {seen:?}")))
}

fn residues() -> Result<Line> {
    let mut count = 0;
    let mut ok = true;
    for m in 1..=3usize {
        for s in m + 1..=6 {
            let ones = vec![1u32; s];
            let mixed: Vec<u32> = (0..s as u32).map(|j| j % 3 + 1).collect();
            for e in [ones, mixed] {
                let r = residue_matrix_check_for(&e, m)?;
                ok &= r.identity && r.verdict == Verdict::Pass;
                count += 1;
            }
        }
    }
    Ok(within(line(ok, format!("{count} residue matrices equal to the identity")), 1))
}

fn infrastructure(pool: &[CertifiedInstance], complexes_so_far: usize) -> Result<Line> {
    let shapes: [(usize, &[u32], &[u32]); 5] = [(2, &[3], &[1]), (2, &[2], &[1, 1]), (3, &[3], &[]), (3, &[2, 2], &[1]), (2, &[4], &[2])];
    let mut euler = 0;
    for k in 0..100u64 {
        let (n, d, e) = shapes[k as usize % shapes.len()];
        let field = if k % 2 == 0 { FieldSpec::Rationals } else { FieldSpec::PrimeField(10_007) };
        let inst = Instance::random(n, d, e, field, SEED + k)?;
        let ok = match field {
            FieldSpec::Rationals => JacobianRing::new(&inst, PrimeField::new(1_000_003)?)?.euler_identity_check()?,
            FieldSpec::PrimeField(p) => JacobianRing::new(&inst, PrimeField::new(p)?)?.euler_identity_check()?,
        };
        euler += ok as usize;
    }

    let mut agree = 0;
    let mut matrices = 0;
    'outer: for k in 0..20u64 {
        let (n, d, e) = shapes[k as usize % shapes.len()];
        let inst = Instance::random(n, d, e, FieldSpec::Rationals, SEED + 500 + k)?;
        let ring = JacobianRing::new(&inst, RationalField)?;
        for q in 0..=1 {
            for l in 0..=2 {
                let m = ring.ideal_piece_map(BiDegree::new(q, l))?;
                if m.rows() * m.cols() > 40_000 || m.cols() == 0 {
                    continue;
                }
                let modular = rank_multimodular(&m, &ModularOptions { seed: SEED + k, ..Default::default() })?;
                let exact = rank_fraction_free(&m, default_budget())?;
                agree += (modular.rank == exact) as usize;
                matrices += 1;
                if matrices == 50 {
                    break 'outer;
                }
            }
        }
    }

    let mut complexes = complexes_so_far;
    let el = reference::elliptic_plus_three_lines();
    let ring = JacobianRing::new(&el, RationalField)?;
    let v = Subspace::full(&RationalField, ring.dim_b(BiDegree::new(1, 0))?);
    for (p, q, l) in koszul_grid(&el) {
        koszul_complex(&ring, &v, p, q, l)?;
        complexes += 1;
    }

    let (mut pieces, mut formula) = (0, 0);
    for c in pool {
        let ring = JacobianRing::new(&c.instance, PrimeField::new(1_000_003)?)?;
        let top = c.instance.top_bidegree();
        for q in 0..=top.q + 1 {
            for l in -1..=top.l + 1 {
                let bd = BiDegree::new(q, l);
                let piece = ring.quotient_piece(bd)?;
                formula += (ring.grading().dim_piece(bd) - piece.ideal_rank() == piece.dim()) as usize;
                pieces += 1;
            }
        }
    }
    let ok = euler == 100 && agree == 50 && matrices == 50 && formula == pieces;
    Ok(line(
        ok,
        format!(
            "Euler {euler}/100, modular = exact {agree}/{matrices}, d∘d = 0 on {complexes} complexes, dim A - rank = dim B on {formula}/{pieces} pieces"
        ),
    ))
}

fn report(id: usize, name: &str, start: Instant, out: Result<Line>) -> bool {
    let elapsed = start.elapsed();
    let (ok, detail) = match out {
        Ok(l) => {
            let in_time = l.limit.is_none_or(|lim| elapsed < lim);
            let mut detail = l.detail;
            if !in_time {
                detail.push_str(&format!("; over the {:?} limit", l.limit.unwrap()));
            }
            (l.ok && in_time, detail)
        }
        Err(e) => (false, format!("error: {e}")),
    };
    println!(
        "criterion {id} {name}: {} ({:.2} s) {detail}",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    ok
}

fn main() -> ExitCode {
    // `cargo test` passes filter arguments; only `--list` needs an answer.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let mut all = true;
    let t = Instant::now();
    all &= report(1, "fermat quartic", t, fermat_quartic());
    let t = Instant::now();
    all &= report(2, "fermat quintic", t, fermat_quintic());
    let t = Instant::now();
    all &= report(3, "elliptic curve plus line", t, elliptic_plus_line());
    let t = Instant::now();
    all &= report(4, "punctured curve sweep", t, punctured_curves());

    let t = Instant::now();
    let pool = sweep_pool(POOL_SIZE, SEED, default_budget());
    println!("pool of {POOL_SIZE} certified instances drawn in {:.2} s", t.elapsed().as_secs_f64());
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            println!("criterion 5, 6 and 9: FAIL (pool generation: {e})");
            return ExitCode::FAILURE;
        }
    };
    let t = Instant::now();
    all &= report(5, "duality sweep", t, duality_sweep(&pool));
    let t = Instant::now();
    let mut complexes = 0;
    all &= report(6, "koszul sweep", t, koszul_sweep(&pool, &mut complexes));
    let t = Instant::now();
    all &= report(7, "multiplication kernels", t, kernel_counts());
    let t = Instant::now();
    all &= report(8, "residue matrices", t, residues());
    let t = Instant::now();
    all &= report(9, "infrastructure", t, infrastructure(&pool, complexes));
    println!("acceptance: {}", if all { "PASS" } else { "FAIL" });
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
