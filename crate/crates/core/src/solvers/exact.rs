//! Exhaustive enumeration.
//!
//! Variables are split into a low block, walked in Gray-code order with
//! incremental single-flip deltas, and a high block, over which the
//! polynomial is conditioned once per high assignment. For factorization
//! models the low block is the `p` half, so the conditioned polynomial is at
//! most quadratic and each inner step touches only a handful of terms.

use std::collections::{BTreeMap, BinaryHeap};

use num_bigint::BigInt;

use super::energy::{dispatch_width, Energy};
use super::Sample;
use crate::error::{Error, Result};
use crate::poly::{Assignment, BinaryPolynomial, VarId};
use crate::quadratize::components;

pub const DEFAULT_VAR_LIMIT: usize = 26;

/// Hard ceiling imposed by the 64-bit assignment encoding.
const MAX_VARS: usize = 63;

struct Split<T> {
    low_bits: u32,
    high_bits: u32,
    term_high: Vec<u64>,
    term_slot: Vec<u32>,
    term_coeff: Vec<T>,
    slots: usize,
    /// Per low variable: the slots containing it and, for each, the other
    /// low variables of that slot.
    adj_slots: Vec<Vec<u32>>,
    adj_masks: Vec<Vec<u64>>,
}

impl<T: Energy> Split<T> {
    fn new(poly: &BinaryPolynomial, nvars: usize) -> Self {
        let high_bits = if nvars >= 10 { nvars / 2 } else { 0 } as u32;
        let low_bits = nvars as u32 - high_bits;
        let mut slot_of: BTreeMap<u64, u32> = BTreeMap::new();
        slot_of.insert(0, 0);
        let mut slot_masks = vec![0u64];
        let (mut term_high, mut term_slot, mut term_coeff) = (vec![], vec![], vec![]);
        for (vars, c) in poly.terms() {
            let (mut lo, mut hi) = (0u64, 0u64);
            for v in vars {
                let i = v.0;
                if i < low_bits {
                    lo |= 1 << i;
                } else {
                    hi |= 1 << (i - low_bits);
                }
            }
            let slot = *slot_of.entry(lo).or_insert_with(|| {
                slot_masks.push(lo);
                (slot_masks.len() - 1) as u32
            });
            term_high.push(hi);
            term_slot.push(slot);
            term_coeff.push(T::from_big(c));
        }
        let mut adj_slots = vec![Vec::new(); low_bits as usize];
        let mut adj_masks = vec![Vec::new(); low_bits as usize];
        for (s, &mask) in slot_masks.iter().enumerate() {
            for k in 0..low_bits as usize {
                if mask & (1 << k) != 0 {
                    adj_slots[k].push(s as u32);
                    adj_masks[k].push(mask & !(1 << k));
                }
            }
        }
        Split {
            low_bits,
            high_bits,
            term_high,
            term_slot,
            term_coeff,
            slots: slot_masks.len(),
            adj_slots,
            adj_masks,
        }
    }

    /// Calls `visit(assignment, energy)` for all `2^nvars` assignments.
    fn scan(&self, offset: &T, mut visit: impl FnMut(u64, &T)) {
        let mut coeff = vec![T::zero(); self.slots];
        // coeff gathered per low variable, in adj order
        let mut local: Vec<Vec<T>> = self.adj_slots.iter().map(|s| vec![T::zero(); s.len()]).collect();
        let low_count: u64 = 1 << self.low_bits;
        for h in 0..(1u64 << self.high_bits) {
            for c in coeff.iter_mut() {
                *c = T::zero();
            }
            coeff[0] = offset.clone();
            for t in 0..self.term_high.len() {
                let hm = self.term_high[t];
                if h & hm == hm {
                    coeff[self.term_slot[t] as usize].add_assign(&self.term_coeff[t]);
                }
            }
            for (dst, slots) in local.iter_mut().zip(&self.adj_slots) {
                for (d, &s) in dst.iter_mut().zip(slots) {
                    *d = coeff[s as usize].clone();
                }
            }
            let base = h << self.low_bits;
            let mut low = 0u64;
            let mut e = coeff[0].clone();
            visit(base, &e);
            for i in 1..low_count {
                let k = i.trailing_zeros() as usize;
                let bit = 1u64 << k;
                let delta = T::masked_sum(&self.adj_masks[k], &local[k], low);
                if low & bit == 0 {
                    e.add_assign(&delta);
                } else {
                    e.sub_assign(&delta);
                }
                low ^= bit;
                visit(base | low, &e);
            }
        }
    }
}

fn check_size(poly: &BinaryPolynomial, nvars: usize, limit: usize) -> Result<usize> {
    let nvars = nvars.max(poly.num_vars());
    if nvars > limit || nvars > MAX_VARS {
        return Err(Error::TooManyVariables {
            vars: nvars,
            limit: limit.min(MAX_VARS),
        });
    }
    Ok(nvars)
}

fn all_kernel<T: Energy>(poly: &BinaryPolynomial, nvars: usize) -> Vec<(BigInt, u64)> {
    let split = Split::<T>::new(poly, nvars);
    let mut out: Vec<(T, u64)> = Vec::with_capacity(1 << nvars);
    split.scan(&T::from_big(poly.offset()), |a, e| out.push((e.clone(), a)));
    out.sort_unstable();
    out.into_iter().map(|(e, a)| (e.to_big(), a)).collect()
}

fn lowest_kernel<T: Energy>(poly: &BinaryPolynomial, nvars: usize, keep: usize) -> Vec<(BigInt, u64)> {
    let split = Split::<T>::new(poly, nvars);
    let mut heap: BinaryHeap<(T, u64)> = BinaryHeap::with_capacity(keep + 1);
    split.scan(&T::from_big(poly.offset()), |a, e| {
        if heap.len() < keep {
            heap.push((e.clone(), a));
        } else if let Some(top) = heap.peek() {
            if *e < top.0 || (*e == top.0 && a < top.1) {
                heap.pop();
                heap.push((e.clone(), a));
            }
        }
    });
    let mut v: Vec<(T, u64)> = heap.into_vec();
    v.sort_unstable();
    v.into_iter().map(|(e, a)| (e.to_big(), a)).collect()
}

fn histogram_kernel<T: Energy>(poly: &BinaryPolynomial, nvars: usize) -> BTreeMap<BigInt, u64> {
    let split = Split::<T>::new(poly, nvars);
    let mut counts: BTreeMap<T, u64> = BTreeMap::new();
    split.scan(&T::from_big(poly.offset()), |_, e| {
        if let Some(c) = counts.get_mut(e) {
            *c += 1;
        } else {
            counts.insert(e.clone(), 1);
        }
    });
    counts.into_iter().map(|(e, c)| (e.to_big(), c)).collect()
}

fn to_samples(poly: &BinaryPolynomial, nvars: usize, raw: Vec<(BigInt, u64)>) -> Vec<Sample> {
    raw.into_iter()
        .map(|(e, a)| Sample::new(Assignment::from_u64(a, nvars), e, poly.offset(), 1))
        .collect()
}

/// Every assignment of the polynomial's variables, sorted by energy and then
/// by assignment value.
pub fn enumerate_exact(poly: &BinaryPolynomial, var_limit: usize) -> Result<Vec<Sample>> {
    enumerate_exact_vars(poly, poly.num_vars(), var_limit)
}

/// As [`enumerate_exact`] over `num_vars` variables, some of which may not
/// appear in the polynomial.
pub fn enumerate_exact_vars(poly: &BinaryPolynomial, num_vars: usize, var_limit: usize) -> Result<Vec<Sample>> {
    let nvars = check_size(poly, num_vars, var_limit)?;
    let raw = dispatch_width!(poly, all_kernel(poly, nvars));
    Ok(to_samples(poly, nvars, raw))
}

/// The `keep` lowest assignments in the same order as [`enumerate_exact`],
/// without materializing the whole space.
pub fn enumerate_lowest(
    poly: &BinaryPolynomial,
    num_vars: usize,
    var_limit: usize,
    keep: usize,
) -> Result<Vec<Sample>> {
    let nvars = check_size(poly, num_vars, var_limit)?;
    if keep == 0 {
        return Ok(Vec::new());
    }
    let raw = dispatch_width!(poly, lowest_kernel(poly, nvars, keep));
    Ok(to_samples(poly, nvars, raw))
}

/// Counts of every paper-convention energy over the whole assignment space.
pub fn exact_histogram(poly: &BinaryPolynomial, num_vars: usize, var_limit: usize) -> Result<BTreeMap<BigInt, u64>> {
    let nvars = check_size(poly, num_vars, var_limit)?;
    let full = dispatch_width!(poly, histogram_kernel(poly, nvars));
    Ok(full.into_iter().map(|(e, c)| (e - poly.offset(), c)).collect())
}

/// Exact minimum and a minimizer, solving each connected component of the
/// variable interaction graph independently. Components larger than
/// `component_limit` are rejected.
pub fn exact_minimum(poly: &BinaryPolynomial, component_limit: usize) -> Result<(BigInt, Assignment)> {
    let mut total = poly.offset().clone();
    let mut best = Assignment::zeros(poly.num_vars());
    for comp in components(poly) {
        let index: BTreeMap<VarId, u32> = comp.iter().enumerate().map(|(i, v)| (*v, i as u32)).collect();
        let mut local = BinaryPolynomial::new();
        for (vars, c) in poly.terms() {
            if index.contains_key(&vars[0]) {
                local.add_term(vars.iter().map(|v| VarId(index[v])), c.clone());
            }
        }
        let nvars = check_size(&local, comp.len(), component_limit)?;
        let low = dispatch_width!(&local, lowest_kernel(&local, nvars, 1));
        let (e, a) = &low[0];
        total += e;
        for (i, v) in comp.iter().enumerate() {
            if (a >> i) & 1 == 1 {
                best.set(*v, true);
            }
        }
    }
    Ok((total, best))
}
