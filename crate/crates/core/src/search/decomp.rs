//! Bitwise decomposition: fix factor bits from the most significant level
//! down, solving a tiny model per level.
//!
//! Level one chooses `P = 2^(n-1) x0`, `Q = 2^(n-1) x1`. Every later level
//! adds a signed step `P += 2^l (x0 - x1)`, `Q += 2^l (x2 - x3)`. Each level
//! keeps only assignments at the global minimum of `(PQ - N)^2`; distinct
//! tied `(P, Q)` are carried forward as branches up to a budget.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::product_cost;
use crate::poly::{linear_form, pow2, VarId};
use crate::solvers::enumerate_exact_vars;

use super::blocks::{is_nontrivial_factorization, normalize_pair};

pub const DEFAULT_BRANCH_BUDGET: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompStage {
    /// Bit level `l` fixed by this stage.
    pub level: u32,
    pub signed: bool,
    #[serde(with = "crate::io::decimal")]
    pub p_step: BigInt,
    #[serde(with = "crate::io::decimal")]
    pub q_step: BigInt,
    #[serde(with = "crate::io::decimal")]
    pub p_acc: BigInt,
    #[serde(with = "crate::io::decimal")]
    pub q_acc: BigInt,
    /// `(P Q - N)^2` after this stage.
    #[serde(with = "crate::io::decimal")]
    pub energy: BigInt,
    /// Distinct `(P, Q)` tied at this stage's minimum.
    pub ties: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompResult {
    /// Stages of the chosen branch, most significant first.
    pub stages: Vec<DecompStage>,
    /// Normalized factors when the final `P Q = N` non-trivially.
    pub factors: Option<(BigInt, BigInt)>,
    /// Every stage had a single minimizing `(P, Q)`.
    pub unique_minima: bool,
}

#[derive(Clone, Debug)]
struct Branch {
    p: BigInt,
    q: BigInt,
    stages: Vec<DecompStage>,
}

/// Stage polynomial and the decoder for its minimizers.
fn stage(big_n: &BigInt, b: &Branch, level: u32, signed: bool) -> Result<Vec<(BigInt, BigInt, BigInt)>> {
    let s = pow2(level);
    let v = |i| (VarId(i), s.clone());
    let neg = |i| (VarId(i), -s.clone());
    let (p, q) = if signed {
        (
            linear_form(b.p.clone(), [v(0), neg(1)]),
            linear_form(b.q.clone(), [v(2), neg(3)]),
        )
    } else {
        (linear_form(0, [v(0)]), linear_form(0, [v(1)]))
    };
    let nvars = if signed { 4 } else { 2 };
    let poly = product_cost(&p, &q, big_n);
    let samples = enumerate_exact_vars(&poly, nvars, nvars)?;
    let min = samples[0].energy_full.clone();
    let mut out = Vec::new();
    for smp in samples.iter().take_while(|s| s.energy_full == min) {
        let pv = p.evaluate(&smp.assignment)?;
        let qv = q.evaluate(&smp.assignment)?;
        out.push((min.clone(), pv, qv));
    }
    Ok(out)
}

/// Runs all `bits` stages. Ties are explored breadth-first; among final
/// branches the smallest `(P, Q)` that factors `N` wins, else the smallest.
pub fn decompose_solve(big_n: &BigInt, bits: u32, branch_budget: usize) -> Result<DecompResult> {
    if bits == 0 {
        return Err(Error::InvalidLayout("decomposition needs at least one bit".into()));
    }
    let mut frontier = vec![Branch {
        p: BigInt::zero(),
        q: BigInt::zero(),
        stages: Vec::new(),
    }];
    let mut unique = true;
    for t in 0..bits {
        let level = bits - 1 - t;
        let signed = t > 0;
        let mut children: Vec<(BigInt, Branch, BigInt, BigInt)> = Vec::new();
        for b in &frontier {
            for (e, p, q) in stage(big_n, b, level, signed)? {
                let dp = &p - &b.p;
                let dq = &q - &b.q;
                let child = Branch {
                    p,
                    q,
                    stages: b.stages.clone(),
                };
                children.push((e, child, dp, dq));
            }
        }
        let min = children
            .iter()
            .map(|c| c.0.clone())
            .min()
            .expect("stage has minimizers");
        let mut kept: Vec<(Branch, BigInt, BigInt)> = Vec::new();
        for (e, child, dp, dq) in children {
            if e == min && !kept.iter().any(|(k, _, _)| k.p == child.p && k.q == child.q) {
                kept.push((child, dp, dq));
            }
        }
        kept.sort_by(|a, b| (&a.0.p, &a.0.q).cmp(&(&b.0.p, &b.0.q)));
        let ties = kept.len();
        if ties > branch_budget {
            return Err(Error::StageMinimumAmbiguous {
                level,
                ties,
                budget: branch_budget,
            });
        }
        unique &= ties == 1;
        frontier = kept
            .into_iter()
            .map(|(mut b, dp, dq)| {
                b.stages.push(DecompStage {
                    level,
                    signed,
                    p_step: dp,
                    q_step: dq,
                    p_acc: b.p.clone(),
                    q_acc: b.q.clone(),
                    energy: min.clone(),
                    ties,
                });
                b
            })
            .collect();
    }
    let factors_of = |b: &Branch| {
        let (p, q) = normalize_pair(b.p.clone(), b.q.clone());
        (&b.p * &b.q == *big_n && is_nontrivial_factorization(big_n, &p, &q)).then_some((p, q))
    };
    let chosen = frontier
        .iter()
        .find(|b| factors_of(b).is_some())
        .unwrap_or(&frontier[0])
        .clone();
    let factors = factors_of(&chosen);
    Ok(DecompResult {
        stages: chosen.stages,
        factors,
        unique_minima: unique,
    })
}
