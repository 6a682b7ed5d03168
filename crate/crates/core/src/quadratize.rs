//! Cubic and quartic reduction gadgets.
//!
//! For binary `x, y, z` and a fresh ancilla `w`:
//!
//! ```text
//! c*x*y*z = min_w c*w*(x + y + z - 2)                                  c < 0
//! c*x*y*z = min_w c*{w*(x + y + z - 1) + (xy + yz + zx) - (x + y + z) + 1}   c > 0
//! ```
//!
//! A positive quartic `c*a1*a2*b1*b2` applies the positive cubic rule to
//! `a2*b1*b2` (ancilla `x1`), multiplies the result by `a1`, and reduces the
//! six cubic terms that appear with the same rule (ancillas `x2..x7`).
//!
//! The `+1` constants of positive gadgets are not emitted as terms. They are
//! recorded per gadget as `constant_shift`, and the reduced model carries
//! their sum in its offset so that its full-convention minimum is still 0.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::FactorModel;
use crate::poly::{Assignment, BinaryPolynomial, VarId};
use crate::solvers::exact_minimum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GadgetKind {
    CubicNeg,
    CubicPos,
    QuarticPos,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetRecord {
    pub kind: GadgetKind,
    pub source_vars: Vec<VarId>,
    #[serde(with = "crate::io::decimal")]
    pub coeff: BigInt,
    pub ancillas: Vec<VarId>,
    /// Constant left out of the emitted terms.
    #[serde(with = "crate::io::decimal")]
    pub constant_shift: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionLedger {
    pub records: Vec<GadgetRecord>,
    pub first_ancilla: VarId,
    #[serde(with = "crate::io::decimal")]
    pub total_shift: BigInt,
    #[serde(with = "crate::io::decimal")]
    pub reduced_gme: BigInt,
}

impl ReductionLedger {
    pub fn ancilla_count(&self) -> usize {
        self.records.iter().map(|r| r.ancillas.len()).sum()
    }

    pub fn ancillas_of(&self, kind: GadgetKind) -> usize {
        self.records
            .iter()
            .filter(|r| r.kind == kind)
            .map(|r| r.ancillas.len())
            .sum()
    }

    pub fn count(&self, kind: GadgetKind) -> usize {
        self.records.iter().filter(|r| r.kind == kind).count()
    }
}

fn x(v: VarId) -> BinaryPolynomial {
    BinaryPolynomial::monomial([v], 1)
}

/// Replaces `coeff * x*y*z` by a quadratic form over `x, y, z` and the
/// ancilla `next_ancilla`. The returned polynomial has no constant term.
pub fn reduce_cubic(vars: &[VarId], coeff: &BigInt, next_ancilla: VarId) -> Result<(BinaryPolynomial, GadgetRecord)> {
    if vars.len() != 3 {
        return Err(Error::WrongArity {
            expected: 3,
            got: vars.len(),
        });
    }
    if coeff.is_zero() {
        return Err(Error::ZeroCoefficient);
    }
    let w = next_ancilla;
    let [a, b, c] = [vars[0], vars[1], vars[2]];
    let mut out = BinaryPolynomial::new();
    let (kind, shift) = if coeff.is_negative() {
        // c*w*(a + b + c - 2)
        for v in [a, b, c] {
            out.add_term([w, v], coeff.clone());
        }
        out.add_term([w], coeff * -2);
        (GadgetKind::CubicNeg, BigInt::zero())
    } else {
        // c*{w*(a + b + c - 1) + ab + bc + ca - a - b - c} (+c recorded)
        for v in [a, b, c] {
            out.add_term([w, v], coeff.clone());
            out.add_term([v], -coeff);
        }
        out.add_term([w], -coeff);
        for (u, v) in [(a, b), (b, c), (a, c)] {
            out.add_term([u, v], coeff.clone());
        }
        (GadgetKind::CubicPos, coeff.clone())
    };
    let record = GadgetRecord {
        kind,
        source_vars: vars.to_vec(),
        coeff: coeff.clone(),
        ancillas: vec![w],
        constant_shift: shift,
    };
    Ok((out, record))
}

/// Replaces `coeff * a1*a2*b1*b2` (`coeff > 0`) by a quadratic form using
/// seven ancillas starting at `next_ancilla`.
pub fn reduce_quartic(vars: &[VarId], coeff: &BigInt, next_ancilla: VarId) -> Result<(BinaryPolynomial, GadgetRecord)> {
    if vars.len() != 4 {
        return Err(Error::WrongArity {
            expected: 4,
            got: vars.len(),
        });
    }
    if !coeff.is_positive() {
        return Err(Error::NonPositiveCoefficient(coeff.clone()));
    }
    let a1 = vars[0];
    let x1 = next_ancilla;

    // a2*b1*b2 -> x1*(a2 + b1 + b2 - 1) + a2b1 + a2b2 + b1b2 - a2 - b1 - b2 + 1
    let (inner, _) = reduce_cubic(&vars[1..], &BigInt::one(), x1)?;
    let inner = &inner + &BinaryPolynomial::constant(1);
    let expanded = (&x(a1) * &inner).scale(coeff);

    let mut out = BinaryPolynomial::new();
    let mut ancillas = vec![x1];
    let mut shift = BigInt::zero();
    let mut next = x1.0 + 1;
    for (tv, tc) in expanded.terms() {
        if tv.len() == 3 {
            let (q, rec) = reduce_cubic(tv, tc, VarId(next))?;
            next += 1;
            out += &q;
            ancillas.extend(rec.ancillas);
            shift += rec.constant_shift;
        } else {
            out.add_term(tv.iter().copied(), tc.clone());
        }
    }
    debug_assert!(expanded.offset().is_zero());
    debug_assert_eq!(ancillas.len(), 7);
    let record = GadgetRecord {
        kind: GadgetKind::QuarticPos,
        source_vars: vars.to_vec(),
        coeff: coeff.clone(),
        ancillas,
        constant_shift: shift,
    };
    Ok((out, record))
}

/// Quadratizes every cubic and quartic term of a model, allocating ancillas
/// sequentially in canonical term order after the model's variables.
pub fn quadratize_model(model: &FactorModel) -> Result<(FactorModel, ReductionLedger)> {
    let degree = model.poly.degree();
    if degree > 4 {
        return Err(Error::UnsupportedDegree(degree));
    }
    let first = VarId(model.num_vars as u32);
    if degree <= 2 {
        let ledger = ReductionLedger {
            records: Vec::new(),
            first_ancilla: first,
            total_shift: BigInt::zero(),
            reduced_gme: model.paper_gme.clone(),
        };
        return Ok((model.clone(), ledger));
    }

    let mut poly = BinaryPolynomial::constant(model.poly.offset().clone());
    let mut records = Vec::new();
    let mut next = first.0;
    let mut total_shift = BigInt::zero();
    for (vars, coeff) in model.poly.terms() {
        let (q, rec) = match vars.len() {
            0..=2 => {
                poly.add_term(vars.iter().copied(), coeff.clone());
                continue;
            }
            3 => reduce_cubic(vars, coeff, VarId(next))?,
            _ => {
                if coeff.is_negative() {
                    return Err(Error::NegativeQuarticCoefficient {
                        vars: vars.iter().map(|v| v.0).collect(),
                        coeff: coeff.clone(),
                    });
                }
                reduce_quartic(vars, coeff, VarId(next))?
            }
        };
        next += rec.ancillas.len() as u32;
        total_shift += &rec.constant_shift;
        poly += &q;
        records.push(rec);
    }
    poly.set_offset(model.poly.offset() + &total_shift);

    let reduced_gme = &model.paper_gme - &total_shift;
    let reduced = FactorModel {
        big_n: model.big_n.clone(),
        layout: model.layout.clone(),
        poly,
        paper_gme: reduced_gme.clone(),
        num_vars: next as usize,
        gadget_shift: &model.gadget_shift + &total_shift,
    };
    let ledger = ReductionLedger {
        records,
        first_ancilla: first,
        total_shift,
        reduced_gme,
    };
    Ok((reduced, ledger))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyMode {
    Exhaustive,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub assignment: Assignment,
    #[serde(with = "crate::io::decimal")]
    pub original_energy: BigInt,
    #[serde(with = "crate::io::decimal")]
    pub reduced_minimum: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub mode: VerifyMode,
    /// Original-variable assignments checked.
    pub checked: u64,
    #[serde(with = "crate::io::decimal")]
    pub original_minimum: BigInt,
    #[serde(with = "crate::io::decimal")]
    pub reduced_minimum: BigInt,
    pub counterexample: Option<Counterexample>,
}

/// Number of random original-variable assignments checked in sampled mode.
pub const VERIFY_SAMPLES: u64 = 4096;

/// Checks `min_ancillas reduced(x, .) == original(x)` in full convention.
///
/// Original-variable assignments are enumerated when there are at most
/// `exhaustive_limit` of them and sampled otherwise. The minimum over
/// ancillas is always exact: the restricted polynomial is split into
/// connected components, each of which is enumerated.
pub fn verify_reduction(
    original: &FactorModel,
    reduced: &FactorModel,
    ledger: &ReductionLedger,
    exhaustive_limit: usize,
) -> Result<VerifyReport> {
    let m = ledger.first_ancilla.index();
    let exhaustive = m <= exhaustive_limit && m < 64;
    let mut rng = ChaCha8Rng::seed_from_u64(0x005e_ed0f_ca11);
    let total: u64 = if exhaustive { 1u64 << m } else { VERIFY_SAMPLES };

    let mut report = VerifyReport {
        passed: true,
        mode: if exhaustive {
            VerifyMode::Exhaustive
        } else {
            VerifyMode::Sampled
        },
        checked: 0,
        original_minimum: BigInt::zero(),
        reduced_minimum: BigInt::zero(),
        counterexample: None,
    };
    let mut orig_min: Option<BigInt> = None;
    let mut red_min: Option<BigInt> = None;
    for idx in 0..total {
        let a = if exhaustive {
            Assignment::from_u64(idx, m)
        } else {
            Assignment::from_bits((0..m).map(|_| rng.gen::<bool>()))
        };
        let orig = original.poly.evaluate(&a)?;
        let fixed: BTreeMap<VarId, bool> = (0..m).map(|i| (VarId(i as u32), a.bits()[i])).collect();
        let restricted = reduced.poly.restrict(&fixed);
        let (best, _) = exact_minimum(&restricted, exhaustive_limit.max(24))?;
        report.checked += 1;
        if orig_min.as_ref().is_none_or(|v| orig < *v) {
            orig_min = Some(orig.clone());
        }
        if red_min.as_ref().is_none_or(|v| best < *v) {
            red_min = Some(best.clone());
        }
        if best != orig && report.counterexample.is_none() {
            report.passed = false;
            report.counterexample = Some(Counterexample {
                assignment: a,
                original_energy: orig,
                reduced_minimum: best,
            });
        }
    }
    report.original_minimum = orig_min.unwrap_or_default();
    report.reduced_minimum = red_min.unwrap_or_default();
    Ok(report)
}

/// Variables of `poly` grouped into connected components of the
/// co-occurrence graph.
pub(crate) fn components(poly: &BinaryPolynomial) -> Vec<Vec<VarId>> {
    let vars: Vec<VarId> = poly.variables().into_iter().collect();
    let index: BTreeMap<VarId, usize> = vars.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let mut parent: Vec<usize> = (0..vars.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for (tv, _) in poly.terms() {
        let first = index[&tv[0]];
        for v in &tv[1..] {
            let (a, b) = (find(&mut parent, first), find(&mut parent, index[v]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, BTreeSet<VarId>> = BTreeMap::new();
    for (i, v) in vars.iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().insert(*v);
    }
    groups.into_values().map(|g| g.into_iter().collect()).collect()
}
