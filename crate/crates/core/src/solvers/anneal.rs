//! Seeded simulated annealing over arbitrary-degree binary polynomials.
//!
//! Each sweep proposes a single-bit flip for every variable in index order.
//! The flip delta is the sum of the coefficients of the terms containing the
//! variable whose other variables are all set, so it is exact in integer
//! arithmetic. Metropolis acceptance draws `u` and accepts an uphill move
//! `delta > 0` iff `delta < -ln(u) / beta`; the float threshold is rounded to
//! an integer bound before the comparison, so energies never pass through
//! floating point.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::energy::{dispatch_width, Energy};
use super::Sample;
use crate::error::{Error, Result};
use crate::poly::{Assignment, BinaryPolynomial};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub sweeps: u64,
    pub restarts: u64,
    /// `None` means `1 / max |coeff|`.
    pub beta_min: Option<f64>,
    pub beta_max: f64,
    pub seed: u64,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule {
            sweeps: 10_000,
            restarts: 64,
            beta_min: None,
            beta_max: 5.0,
            seed: 0,
        }
    }
}

impl AnnealSchedule {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Concrete `(beta_min, beta_max)` for a polynomial.
    pub fn betas(&self, poly: &BinaryPolynomial) -> Result<(f64, f64)> {
        if self.sweeps == 0 || self.restarts == 0 {
            return Err(Error::InvalidSchedule("sweeps and restarts must be at least 1".into()));
        }
        let beta_min = match self.beta_min {
            Some(b) => b,
            None => {
                let m = poly.max_abs_coeff();
                if m.is_zero() {
                    self.beta_max / 10.0
                } else {
                    1.0 / m.to_f64().unwrap_or(f64::MAX)
                }
            }
        };
        let ok = beta_min.is_finite() && self.beta_max.is_finite() && beta_min > 0.0 && beta_min < self.beta_max;
        if !ok {
            return Err(Error::InvalidSchedule(format!(
                "need 0 < beta_min < beta_max, got {beta_min} and {}",
                self.beta_max
            )));
        }
        Ok((beta_min, self.beta_max))
    }
}

/// How a term's other variables are stored: one bit mask when the model has
/// at most 64 variables, an index list otherwise.
trait Cover: Send + Sync + Sized {
    /// Sum of `coeffs[t]` over terms whose other variables are all set.
    fn field_sum<T: Energy>(masks: &[Self], coeffs: &[T], words: &[u64]) -> T;
}

impl Cover for u64 {
    #[inline(always)]
    fn field_sum<T: Energy>(masks: &[u64], coeffs: &[T], words: &[u64]) -> T {
        T::masked_sum(masks, coeffs, words[0])
    }
}

impl Cover for Box<[u32]> {
    #[inline]
    fn field_sum<T: Energy>(masks: &[Self], coeffs: &[T], words: &[u64]) -> T {
        let mut d = T::zero();
        for (m, c) in masks.iter().zip(coeffs) {
            if m.iter().all(|&v| words[(v >> 6) as usize] >> (v & 63) & 1 == 1) {
                d.add_assign(c);
            }
        }
        d
    }
}

struct Compiled<T, M> {
    nvars: usize,
    /// Per variable: the other variables of each term containing it, and the
    /// term coefficients, stored side by side.
    masks: Vec<Vec<M>>,
    coeffs: Vec<Vec<T>>,
}

impl<T: Energy, M: Cover> Compiled<T, M> {
    fn new(poly: &BinaryPolynomial, nvars: usize, others: impl Fn(&[u32]) -> M) -> Self {
        let mut masks: Vec<Vec<M>> = (0..nvars).map(|_| Vec::new()).collect();
        let mut coeffs: Vec<Vec<T>> = (0..nvars).map(|_| Vec::new()).collect();
        for (vars, c) in poly.terms() {
            let ids: Vec<u32> = vars.iter().map(|v| v.0).collect();
            for (pos, &k) in ids.iter().enumerate() {
                let rest: Vec<u32> = ids
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != pos)
                    .map(|(_, v)| *v)
                    .collect();
                masks[k as usize].push(others(&rest));
                coeffs[k as usize].push(T::from_big(c));
            }
        }
        Compiled { nvars, masks, coeffs }
    }

    #[inline]
    fn field(&self, k: usize, words: &[u64]) -> T {
        M::field_sum(&self.masks[k], &self.coeffs[k], words)
    }
}

#[inline(always)]
fn get(words: &[u64], k: usize) -> bool {
    words[k >> 6] >> (k & 63) & 1 == 1
}

#[inline(always)]
fn flip(words: &mut [u64], k: usize) {
    words[k >> 6] ^= 1 << (k & 63);
}

fn restart_rng(seed: u64, restart: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart);
    rng
}

fn run_restart<T: Energy, M: Cover>(
    model: &Compiled<T, M>,
    poly: &BinaryPolynomial,
    schedule: &AnnealSchedule,
    betas: (f64, f64),
    restart: u64,
) -> (T, Vec<u64>) {
    let n = model.nvars;
    let mut rng = restart_rng(schedule.seed, restart);
    let mut words = vec![0u64; n.div_ceil(64)];
    for k in 0..n {
        if rng.gen::<bool>() {
            flip(&mut words, k);
        }
    }
    let mut e = T::from_big(
        &poly
            .evaluate(&words_to_assignment(&words, n))
            .expect("state covers all variables"),
    );
    let mut best = e.clone();
    let mut best_words = words.clone();
    let (b0, b1) = betas;
    let ratio = b1 / b0;
    let last = (schedule.sweeps - 1).max(1) as f64;
    for sweep in 0..schedule.sweeps {
        let beta = if schedule.sweeps == 1 {
            b1
        } else {
            b0 * ratio.powf(sweep as f64 / last)
        };
        for k in 0..n {
            let mut d = model.field(k, &words);
            if get(&words, k) {
                d = d.negated();
            }
            let accept = if d.is_positive() {
                let u: f64 = rng.gen();
                d.below(-(1.0 - u).ln() / beta)
            } else {
                true
            };
            if accept {
                flip(&mut words, k);
                e.add_assign(&d);
                if e < best {
                    best = e.clone();
                    best_words.copy_from_slice(&words);
                }
            }
        }
    }
    (best, best_words)
}

fn words_to_assignment(words: &[u64], n: usize) -> Assignment {
    Assignment::from_bits((0..n).map(|k| get(words, k)))
}

fn anneal_kernel<T: Energy>(
    poly: &BinaryPolynomial,
    nvars: usize,
    schedule: &AnnealSchedule,
    betas: (f64, f64),
    workers: usize,
) -> Vec<(BigInt, Vec<u64>)> {
    if nvars <= 64 {
        let c = Compiled::<T, u64>::new(poly, nvars, |vs| vs.iter().fold(0u64, |m, v| m | 1 << v));
        run_all(&c, poly, schedule, betas, workers)
    } else {
        let c = Compiled::<T, Box<[u32]>>::new(poly, nvars, |vs| vs.to_vec().into_boxed_slice());
        run_all(&c, poly, schedule, betas, workers)
    }
}

fn run_all<T: Energy, M: Cover>(
    model: &Compiled<T, M>,
    poly: &BinaryPolynomial,
    schedule: &AnnealSchedule,
    betas: (f64, f64),
    workers: usize,
) -> Vec<(BigInt, Vec<u64>)> {
    let restarts = schedule.restarts;
    let workers = workers.clamp(1, restarts as usize);
    let mut results: Vec<Option<(BigInt, Vec<u64>)>> = vec![None; restarts as usize];
    if workers == 1 {
        for r in 0..restarts {
            let (e, w) = run_restart(model, poly, schedule, betas, r);
            results[r as usize] = Some((e.to_big(), w));
        }
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|wid| {
                    scope.spawn(move || {
                        (wid as u64..restarts)
                            .step_by(workers)
                            .map(|r| {
                                let (e, w) = run_restart(model, poly, schedule, betas, r);
                                (r, e.to_big(), w)
                            })
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (r, e, w) in h.join().expect("anneal worker panicked") {
                    results[r as usize] = Some((e, w));
                }
            }
        });
    }
    results.into_iter().map(|r| r.expect("every restart ran")).collect()
}

/// Best state of every restart, merged by assignment and sorted by energy
/// then assignment value.
pub fn sample_sa(poly: &BinaryPolynomial, schedule: &AnnealSchedule) -> Result<Vec<Sample>> {
    sample_sa_vars(poly, poly.num_vars(), schedule, 1)
}

/// As [`sample_sa`] over `num_vars` variables with restarts spread over
/// `workers` threads. The output does not depend on `workers`.
pub fn sample_sa_vars(
    poly: &BinaryPolynomial,
    num_vars: usize,
    schedule: &AnnealSchedule,
    workers: usize,
) -> Result<Vec<Sample>> {
    let nvars = num_vars.max(poly.num_vars());
    if nvars == 0 {
        return Err(Error::EmptyPolynomial);
    }
    let betas = schedule.betas(poly)?;
    let raw = dispatch_width!(poly, anneal_kernel(poly, nvars, schedule, betas, workers));
    let mut merged: BTreeMap<Vec<u64>, (BigInt, u64)> = BTreeMap::new();
    for (e, w) in raw {
        merged.entry(w).or_insert((e, 0)).1 += 1;
    }
    let mut samples: Vec<Sample> = merged
        .into_iter()
        .map(|(w, (e, count))| {
            let a = words_to_assignment(&w, nvars);
            debug_assert_eq!(poly.evaluate(&a).unwrap(), e);
            Sample::new(a, e, poly.offset(), count)
        })
        .collect();
    samples.sort_by(|a, b| {
        a.energy_full
            .cmp(&b.energy_full)
            .then_with(|| a.assignment.cmp_as_integer(&b.assignment))
    });
    Ok(samples)
}
