//! Block search over factor ranges.
//!
//! Block `(i, j)` restricts `p` to `i*stride + [0, 2^n)` and `q` to
//! `j*stride + [0, 2^n)`, so each block is a small model with `2n`
//! variables. A block holds a factorization exactly when its minimum reaches
//! the closed-form target.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_range_hubo, FactorLayout, FactorModel};
use crate::poly::pow2;
use crate::solvers::{enumerate_lowest, sample_sa_vars, AnnealSchedule, Sample, DEFAULT_VAR_LIMIT};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockCoord {
    #[serde(with = "crate::io::decimal")]
    pub i: BigInt,
    #[serde(with = "crate::io::decimal")]
    pub j: BigInt,
    #[serde(with = "crate::io::decimal")]
    pub stride: BigInt,
}

impl BlockCoord {
    pub fn new(i: impl Into<BigInt>, j: impl Into<BigInt>, stride: impl Into<BigInt>) -> Self {
        BlockCoord {
            i: i.into(),
            j: j.into(),
            stride: stride.into(),
        }
    }

    pub fn s_i(&self) -> BigInt {
        &self.i * &self.stride
    }

    pub fn s_j(&self) -> BigInt {
        &self.j * &self.stride
    }

    pub fn layout(&self, bits: u32, fix_lsb: bool) -> FactorLayout {
        FactorLayout {
            n: bits,
            fix_lsb,
            s_i: self.s_i(),
            s_j: self.s_j(),
        }
    }
}

/// Blocks `(i, j)` with `i <= j`, `S_i*S_j <= N` and
/// `(S_i + 2^n - 1)(S_j + 2^n - 1) >= N`, yielded lazily in increasing
/// order of `N - S_i*S_j` (ties by `i`, then `j`). Blocks with `S_i = 0`
/// are bounded by `q <= N/2`.
#[derive(Clone, Debug)]
pub struct BlockPlan {
    big_n: BigInt,
    stride: BigInt,
    span: BigInt,
    heap: BinaryHeap<Reverse<(BigInt, BigInt, BigInt)>>,
    j_lo: Vec<BigInt>,
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_ceil(b)
}

impl BlockPlan {
    pub fn new(big_n: &BigInt, bits: u32, stride: &BigInt) -> Self {
        let span = pow2(bits) - 1;
        let mut heap = BinaryHeap::new();
        let mut j_lo = Vec::new();
        if big_n.is_positive() && stride.is_positive() {
            let i_max = big_n.sqrt() / stride;
            let mut i = BigInt::zero();
            while i <= i_max {
                let s_i = &i * stride;
                let j_hi = if s_i.is_zero() {
                    big_n / (stride * 2)
                } else {
                    big_n / (&s_i * stride)
                };
                let need: BigInt = ceil_div(big_n, &(&s_i + &span)) - &span;
                let lo = if need.is_positive() {
                    ceil_div(&need, stride)
                } else {
                    BigInt::zero()
                };
                let lo = lo.max(i.clone());
                if lo <= j_hi {
                    let key = big_n - &s_i * (&j_hi * stride);
                    heap.push(Reverse((key, i.clone(), j_hi)));
                }
                j_lo.push(lo);
                i += 1;
            }
        }
        BlockPlan {
            big_n: big_n.clone(),
            stride: stride.clone(),
            span,
            heap,
            j_lo,
        }
    }

    /// Whether a block can contain a pair with product `N`, per the plan's
    /// overlap bound.
    pub fn admits(&self, coord: &BlockCoord) -> bool {
        let (si, sj) = (coord.s_i(), coord.s_j());
        &si * &sj <= self.big_n && (&si + &self.span) * (&sj + &self.span) >= self.big_n
    }
}

impl Iterator for BlockPlan {
    type Item = BlockCoord;

    fn next(&mut self) -> Option<BlockCoord> {
        let Reverse((_, i, j)) = self.heap.pop()?;
        let idx: usize = i.clone().try_into().expect("row index fits in memory");
        let next_j = &j - 1;
        if next_j >= self.j_lo[idx] {
            let key = &self.big_n - &i * &self.stride * (&next_j * &self.stride);
            self.heap.push(Reverse((key, i.clone(), next_j)));
        }
        Some(BlockCoord::new(i, j, self.stride.clone()))
    }
}

/// The default plan with stride `2^bits`.
pub fn default_block_plan(big_n: &BigInt, bits: u32, stride: Option<&BigInt>) -> BlockPlan {
    let stride = stride.cloned().unwrap_or_else(|| pow2(bits));
    BlockPlan::new(big_n, bits, &stride)
}

#[derive(Clone, Debug, PartialEq)]
pub enum BlockSolver {
    Exact,
    Anneal(AnnealSchedule),
}

/// Outcome of minimizing one block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockResult {
    pub coord: BlockCoord,
    /// Lowest paper-convention energy found.
    pub min_paper: BigInt,
    pub expected_gme: BigInt,
    /// `min_paper - expected_gme`; zero exactly on a hit.
    pub excess: BigInt,
    /// Normalized non-trivial factor pair, when the block holds one.
    pub factors: Option<(BigInt, BigInt)>,
    pub minimizers: u64,
    pub best: Sample,
}

impl BlockResult {
    pub fn is_hit(&self) -> bool {
        self.factors.is_some()
    }
}

/// Number of lowest assignments kept from an exact block solve; enough to
/// see both orderings of a pair plus trivial `1 * N` encodings.
const KEEP_PER_BLOCK: usize = 8;

/// Distinct normalized `(p, q)` pairs among the minimum-energy samples,
/// non-trivial ones first.
pub fn factor_pairs(model: &FactorModel, samples: &[Sample]) -> Result<Vec<(BigInt, BigInt)>> {
    let Some(first) = samples.first() else {
        return Ok(Vec::new());
    };
    let mut pairs: Vec<(BigInt, BigInt)> = Vec::new();
    for s in samples.iter().filter(|s| s.energy_full == first.energy_full) {
        let (p, q) = model.decode(&s.assignment)?;
        let pair = normalize_pair(p, q);
        if !pairs.contains(&pair) {
            pairs.push(pair);
        }
    }
    pairs.sort_by_key(|(p, _)| p.abs() <= BigInt::one());
    Ok(pairs)
}

/// `(min, max)` of the absolute values, so `pq` and `qp` compare equal.
pub fn normalize_pair(p: BigInt, q: BigInt) -> (BigInt, BigInt) {
    let (p, q) = (p.abs(), q.abs());
    if p <= q {
        (p, q)
    } else {
        (q, p)
    }
}

pub fn is_nontrivial_factorization(big_n: &BigInt, p: &BigInt, q: &BigInt) -> bool {
    p > &BigInt::one() && q > &BigInt::one() && &(p * q) == big_n
}

pub fn solve_block(
    big_n: &BigInt,
    bits: u32,
    fix_lsb: bool,
    coord: &BlockCoord,
    solver: &BlockSolver,
) -> Result<BlockResult> {
    let model = build_range_hubo(big_n, &coord.layout(bits, fix_lsb))?;
    let samples = match solver {
        BlockSolver::Exact => enumerate_lowest(&model.poly, model.num_vars, DEFAULT_VAR_LIMIT, KEEP_PER_BLOCK)?,
        BlockSolver::Anneal(s) => sample_sa_vars(&model.poly, model.num_vars, s, 1)?,
    };
    let best = samples[0].clone();
    let expected = model.expected_gme();
    let excess = &best.energy_paper - &expected;
    let factors = if excess.is_zero() {
        factor_pairs(&model, &samples)?
            .into_iter()
            .find(|(p, q)| is_nontrivial_factorization(big_n, p, q))
    } else {
        None
    };
    let minimizers = samples
        .iter()
        .filter(|s| s.energy_full == best.energy_full)
        .map(|s| s.occurrences)
        .sum();
    Ok(BlockResult {
        coord: coord.clone(),
        min_paper: best.energy_paper.clone(),
        expected_gme: expected,
        excess,
        factors,
        minimizers,
        best,
    })
}

/// A block result tagged with its position in the plan.
type Indexed = Option<(u64, BlockResult)>;

/// Result of scanning a plan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockScan {
    /// First hit in plan order.
    pub hit: Option<BlockResult>,
    /// Lowest-excess block when nothing hit (earliest on ties).
    pub best: Option<BlockResult>,
    /// Blocks up to and including the hit, or the whole plan.
    pub searched: u64,
}

/// Applies `solve` to plan blocks on `workers` threads. Blocks are handed
/// out in plan order and the earliest hit wins, so the outcome matches a
/// sequential scan; once a hit is known no later block is started.
pub fn parallel_block_map<I, F>(plan: I, workers: usize, max_blocks: Option<u64>, solve: F) -> Result<BlockScan>
where
    I: Iterator<Item = BlockCoord> + Send,
    F: Fn(&BlockCoord) -> Result<BlockResult> + Sync,
{
    let workers = workers.max(1);
    let limit = max_blocks.unwrap_or(u64::MAX);
    let source = Mutex::new((plan, 0u64));
    let first_hit = AtomicU64::new(u64::MAX);
    let failure: Mutex<Option<(u64, Error)>> = Mutex::new(None);

    let worker = || {
        let mut hit: Option<(u64, BlockResult)> = None;
        let mut best: Option<(u64, BlockResult)> = None;
        loop {
            let (idx, coord) = {
                let mut guard = source.lock().expect("plan lock");
                let idx = guard.1;
                if idx >= limit || idx > first_hit.load(Ordering::Acquire) {
                    break;
                }
                let Some(coord) = guard.0.next() else { break };
                guard.1 += 1;
                (idx, coord)
            };
            match solve(&coord) {
                Ok(r) => {
                    if r.is_hit() {
                        first_hit.fetch_min(idx, Ordering::AcqRel);
                        if hit.as_ref().is_none_or(|(h, _)| idx < *h) {
                            hit = Some((idx, r));
                        }
                        break;
                    }
                    let better = best.as_ref().is_none_or(|(b, br)| (&r.excess, idx) < (&br.excess, *b));
                    if better {
                        best = Some((idx, r));
                    }
                }
                Err(e) => {
                    let mut f = failure.lock().expect("failure lock");
                    if f.as_ref().is_none_or(|(i, _)| idx < *i) {
                        *f = Some((idx, e));
                    }
                    first_hit.fetch_min(idx, Ordering::AcqRel);
                    break;
                }
            }
        }
        (hit, best)
    };

    let outcomes: Vec<(Indexed, Indexed)> = if workers == 1 {
        vec![worker()]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers).map(|_| scope.spawn(worker)).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("block worker panicked"))
                .collect()
        })
    };
    let total = source.into_inner().expect("plan lock").1;

    let hit = outcomes.iter().filter_map(|(h, _)| h.clone()).min_by_key(|(i, _)| *i);
    if let Some((idx, e)) = failure.into_inner().expect("failure lock") {
        if hit.as_ref().is_none_or(|(h, _)| idx < *h) {
            return Err(e);
        }
    }
    if let Some((idx, r)) = hit {
        return Ok(BlockScan {
            hit: Some(r),
            best: None,
            searched: idx + 1,
        });
    }
    let best = outcomes
        .into_iter()
        .filter_map(|(_, b)| b)
        .min_by(|(ia, a), (ib, b)| (&a.excess, ia).cmp(&(&b.excess, ib)))
        .map(|(_, r)| r);
    Ok(BlockScan {
        hit: None,
        best,
        searched: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn small_plan_is_single_block() {
        let plan: Vec<_> = default_block_plan(&big(15), 4, None).collect();
        assert_eq!(plan, vec![BlockCoord::new(0, 0, 16)]);
    }

    #[test]
    fn plan_is_ordered_and_satisfies_bounds() {
        for (n_val, bits, stride) in [(1003i64, 3u32, 8i64), (8051, 4, 16), (9991, 3, 10), (221, 2, 4)] {
            let n = big(n_val);
            let stride = big(stride);
            let plan = BlockPlan::new(&n, bits, &stride);
            let check = plan.clone();
            let blocks: Vec<_> = plan.collect();
            let keys: Vec<BigInt> = blocks.iter().map(|b| &n - b.s_i() * b.s_j()).collect();
            assert!(keys.windows(2).all(|w| w[0] <= w[1]));
            for b in &blocks {
                assert!(b.i <= b.j);
                assert!(check.admits(b), "{b:?}");
            }
            // brute force: every admissible block with S_j <= N/2 is in the plan
            let half = &n / 2;
            let mut expected = 0;
            let mut i = big(0);
            while &i * &stride * (&i * &stride) <= n {
                let mut j = i.clone();
                while &j * &stride <= half {
                    let c = BlockCoord::new(i.clone(), j.clone(), stride.clone());
                    if check.admits(&c) && (!i.is_zero() || true) {
                        expected += 1;
                        assert!(blocks.contains(&c), "missing {c:?} for N={n_val}");
                    }
                    j += 1;
                }
                i += 1;
            }
            assert_eq!(blocks.len(), expected);
        }
    }

    #[test]
    fn solve_block_reports_hit_and_excess() {
        let n = big(10_111 * 10_133);
        let hit = solve_block(&n, 6, false, &BlockCoord::new(157, 158, 64), &BlockSolver::Exact).unwrap();
        assert_eq!(hit.factors, Some((big(10_111), big(10_133))));
        assert!(hit.excess.is_zero());
        let miss = solve_block(&n, 6, false, &BlockCoord::new(157, 157, 64), &BlockSolver::Exact).unwrap();
        assert!(miss.factors.is_none());
        assert!(miss.excess.is_positive());
        assert!(miss.best.energy_full.is_positive());
    }

    #[test]
    fn parallel_map_matches_sequential() {
        let n = big(211 * 241);
        let solver = BlockSolver::Exact;
        let run = |w| {
            parallel_block_map(default_block_plan(&n, 3, None), w, None, |c| {
                solve_block(&n, 3, false, c, &solver)
            })
            .unwrap()
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a, b);
        assert_eq!(a.hit.unwrap().factors, Some((big(211), big(241))));
    }

    #[test]
    fn not_found_reports_best_block() {
        let n = big(211 * 241);
        let scan = parallel_block_map(default_block_plan(&n, 3, None).take(2), 1, None, |c| {
            solve_block(&n, 3, false, c, &BlockSolver::Exact)
        })
        .unwrap();
        assert!(scan.hit.is_none());
        assert_eq!(scan.searched, 2);
        assert!(scan.best.unwrap().excess.is_positive());
    }
}
