//! Running ring computations for a rational instance modulo several primes.
//!
//! A rational instance is read over two random primes from
//! [`MODULAR_PRIME_RANGE`] (or more, see [`WorkbenchOptions::primes`]). When
//! all primes agree the common answer is returned. Otherwise four more primes
//! are consulted and the most frequent answer is accepted if at least two
//! primes produced it and no other answer is as frequent; failing that, the
//! computation is repeated over the rationals.
//!
//! Prime-field instances are evaluated once, over their own field.

use std::fmt::Debug;
use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{random_prime, Field, FieldSpec, PrimeField, RationalField, MODULAR_PRIME_RANGE};
use crate::instance::Instance;
use crate::jacring::JacobianRing;
use crate::linalg::default_budget;

/// A computation that can run over any field.
pub trait RingTask: Sync {
    type Output: Clone + PartialEq + Debug + Send;

    fn run<F: Field>(&self, ring: &JacobianRing<F>) -> Result<Self::Output>;
}

#[derive(Debug, Clone)]
pub struct WorkbenchOptions {
    /// Primes in the first round; at least two.
    pub primes: usize,
    pub seed: u64,
    pub budget: usize,
}

impl Default for WorkbenchOptions {
    fn default() -> Self {
        Self {
            primes: 2,
            seed: 0x6a61_6372,
            budget: default_budget(),
        }
    }
}

/// A value together with how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluated<T> {
    pub value: T,
    /// Primes whose rings were consulted; empty for a purely rational run.
    pub primes_used: Vec<u64>,
    /// Whether the value comes from the exact rational computation.
    pub exact: bool,
}

const ESCALATION_PRIMES: usize = 4;

pub struct Workbench {
    instance: Instance,
    first: Vec<JacobianRing<PrimeField>>,
    extra: Vec<JacobianRing<PrimeField>>,
    budget: usize,
    exact: OnceLock<JacobianRing<RationalField>>,
}

impl Workbench {
    pub fn new(instance: &Instance, opts: &WorkbenchOptions) -> Result<Self> {
        let budget = opts.budget;
        let (first, extra) = match instance.field() {
            FieldSpec::PrimeField(p) => (
                vec![JacobianRing::new(instance, PrimeField::new(p)?)?.with_budget(budget)],
                Vec::new(),
            ),
            FieldSpec::Rationals => {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                let mut used = Vec::new();
                let first = draw_rings(instance, &mut rng, opts.primes.max(2), &mut used, budget)?;
                let extra = draw_rings(instance, &mut rng, ESCALATION_PRIMES, &mut used, budget)?;
                (first, extra)
            }
        };
        Ok(Self {
            instance: instance.clone(),
            first,
            extra,
            budget,
            exact: OnceLock::new(),
        })
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    /// The ring over the first prime, for quick single-field queries.
    pub fn primary(&self) -> &JacobianRing<PrimeField> {
        &self.first[0]
    }

    /// Primes of the first round.
    pub fn primes(&self) -> Vec<u64> {
        self.first.iter().map(|r| r.field().modulus()).collect()
    }

    pub fn exact_ring(&self) -> Result<&JacobianRing<RationalField>> {
        if self.instance.field() != FieldSpec::Rationals {
            return Err(Error::InvalidField(
                "exact rational ring of a prime-field instance".into(),
            ));
        }
        Ok(self.exact.get_or_init(|| {
            JacobianRing::new(&self.instance, RationalField)
                .expect("a rational instance is readable over the rationals")
                .with_budget(self.budget)
        }))
    }

    pub fn evaluate<T: RingTask>(&self, task: &T) -> Result<Evaluated<T::Output>> {
        let mut outcomes: Vec<(u64, Result<T::Output>)> = run_all(&self.first, task);
        let primes_of = |o: &[(u64, Result<T::Output>)]| o.iter().map(|(p, _)| *p).collect::<Vec<_>>();
        if outcomes.iter().all(|(_, r)| *r == outcomes[0].1) {
            let primes_used = primes_of(&outcomes);
            return outcomes.swap_remove(0).1.map(|value| Evaluated {
                value,
                primes_used,
                exact: false,
            });
        }
        outcomes.extend(run_all(&self.extra, task));
        let primes_used = primes_of(&outcomes);
        if let Some(winner) = clear_majority(&outcomes) {
            return winner.map(|value| Evaluated {
                value,
                primes_used,
                exact: false,
            });
        }
        let value = task.run(self.exact_ring()?)?;
        Ok(Evaluated {
            value,
            primes_used,
            exact: true,
        })
    }
}

fn draw_rings(
    instance: &Instance,
    rng: &mut ChaCha8Rng,
    count: usize,
    used: &mut Vec<u64>,
    budget: usize,
) -> Result<Vec<JacobianRing<PrimeField>>> {
    let mut rings = Vec::with_capacity(count);
    while rings.len() < count {
        let p = random_prime(rng, MODULAR_PRIME_RANGE.0, MODULAR_PRIME_RANGE.1);
        if used.contains(&p) {
            continue;
        }
        used.push(p);
        match JacobianRing::new(instance, PrimeField::new(p)?) {
            Ok(ring) => rings.push(ring.with_budget(budget)),
            Err(Error::BadReduction(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(rings)
}

fn run_all<T: RingTask>(rings: &[JacobianRing<PrimeField>], task: &T) -> Vec<(u64, Result<T::Output>)> {
    rings
        .par_iter()
        .map(|r| (r.field().modulus(), task.run(r)))
        .collect()
}

/// The most frequent outcome if it occurs at least twice and strictly more
/// often than any other.
fn clear_majority<T: Clone + PartialEq>(outcomes: &[(u64, Result<T>)]) -> Option<Result<T>> {
    let mut counts: Vec<(&Result<T>, usize)> = Vec::new();
    for (_, r) in outcomes {
        match counts.iter_mut().find(|(v, _)| *v == r) {
            Some((_, c)) => *c += 1,
            None => counts.push((r, 1)),
        }
    }
    counts.sort_by(|a, b| b.1.cmp(&a.1));
    let (best, n) = counts[0];
    let unique = counts.get(1).map_or(true, |(_, m)| *m < n);
    (n >= 2 && unique).then(|| best.clone())
}

/// `dim B_q(l)` at a list of bidegrees.
pub struct DimsTask(pub Vec<crate::bigraded::BiDegree>);

impl RingTask for DimsTask {
    type Output = Vec<usize>;

    fn run<F: Field>(&self, ring: &JacobianRing<F>) -> Result<Vec<usize>> {
        self.0.iter().map(|&bd| ring.dim_b(bd)).collect()
    }
}
