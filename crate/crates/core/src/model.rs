//! Factorization models: `(p*q - N)^2` with `p` and `q` written in binary.
//!
//! `p` occupies variables `0..m` and `q` variables `m..2m`, where `m` is the
//! number of free bits per factor. With `fix_lsb` the least significant bit
//! of both factors is pinned to 1 and does not get a variable. A block
//! offset `s_i`/`s_j` is added to `p`/`q` for range-restricted models.
//!
//! The polynomial is obtained by multiplying out linear forms, so the plain,
//! range and odd-factor variants share one construction path.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{linear_form, pow2, Assignment, BinaryPolynomial, VarId};

/// How the two factors are laid out over binary variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FactorLayout {
    /// Bits per factor, including a fixed least significant bit.
    pub n: u32,
    pub fix_lsb: bool,
    #[serde(with = "crate::io::decimal")]
    pub s_i: BigInt,
    #[serde(with = "crate::io::decimal")]
    pub s_j: BigInt,
}

impl FactorLayout {
    pub fn plain(n: u32) -> Self {
        FactorLayout {
            n,
            fix_lsb: false,
            s_i: BigInt::zero(),
            s_j: BigInt::zero(),
        }
    }

    pub fn odd(n: u32) -> Self {
        FactorLayout {
            fix_lsb: true,
            ..Self::plain(n)
        }
    }

    pub fn with_offsets(mut self, s_i: impl Into<BigInt>, s_j: impl Into<BigInt>) -> Self {
        self.s_i = s_i.into();
        self.s_j = s_j.into();
        self
    }

    pub fn is_range(&self) -> bool {
        !(self.s_i.is_zero() && self.s_j.is_zero())
    }

    /// Bits per factor that are actual variables.
    pub fn free_bits(&self) -> u32 {
        self.n - u32::from(self.fix_lsb)
    }

    /// Number of model variables (ancillas excluded).
    pub fn num_vars(&self) -> usize {
        2 * self.free_bits() as usize
    }

    pub fn p_var(&self, k: u32) -> VarId {
        VarId(k)
    }

    pub fn q_var(&self, k: u32) -> VarId {
        VarId(self.free_bits() + k)
    }

    /// Place value of free bit `k`.
    fn weight_exp(&self, k: u32) -> u32 {
        k + u32::from(self.fix_lsb)
    }

    fn base(&self) -> BigInt {
        if self.fix_lsb {
            BigInt::one()
        } else {
            BigInt::zero()
        }
    }

    /// Value of `p` when all its free bits are zero.
    pub fn p_floor(&self) -> BigInt {
        &self.s_i + self.base()
    }

    pub fn q_floor(&self) -> BigInt {
        &self.s_j + self.base()
    }

    /// Largest representable offset above the block start, `2^n - 1`.
    pub fn span(&self) -> BigInt {
        pow2(self.n) - 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidLayout("need at least one bit per factor".into()));
        }
        if self.fix_lsb && self.n < 2 {
            return Err(Error::InvalidLayout(
                "a fixed least significant bit needs at least two bits per factor".into(),
            ));
        }
        if self.s_i.is_negative() || self.s_j.is_negative() {
            return Err(Error::InvalidLayout("block offsets must be non-negative".into()));
        }
        Ok(())
    }

    /// `p` as a degree-1 polynomial over its variables.
    pub fn p_form(&self) -> BinaryPolynomial {
        linear_form(
            self.p_floor(),
            (0..self.free_bits()).map(|k| (self.p_var(k), pow2(self.weight_exp(k)))),
        )
    }

    pub fn q_form(&self) -> BinaryPolynomial {
        linear_form(
            self.q_floor(),
            (0..self.free_bits()).map(|k| (self.q_var(k), pow2(self.weight_exp(k)))),
        )
    }

    /// Reads `(p, q)` from the first [`num_vars`](Self::num_vars) bits.
    pub fn decode(&self, a: &Assignment) -> Result<(BigInt, BigInt)> {
        if a.len() < self.num_vars() {
            return Err(Error::AssignmentTooShort {
                len: a.len(),
                var: self.num_vars() as u32 - 1,
            });
        }
        let mut p = self.p_floor();
        let mut q = self.q_floor();
        for k in 0..self.free_bits() {
            if a.get(self.p_var(k)) {
                p += pow2(self.weight_exp(k));
            }
            if a.get(self.q_var(k)) {
                q += pow2(self.weight_exp(k));
            }
        }
        Ok((p, q))
    }

    /// Inverse of [`decode`](Self::decode); `None` when the pair does not fit.
    pub fn encode(&self, p: &BigInt, q: &BigInt) -> Option<Assignment> {
        let mut a = Assignment::zeros(self.num_vars());
        for (value, floor, var) in [(p, self.p_floor(), 0u32), (q, self.q_floor(), self.free_bits())] {
            let rest = value - floor;
            if rest.is_negative() || rest > self.span() {
                return None;
            }
            if self.fix_lsb && rest.bit(0) {
                return None;
            }
            for k in 0..self.free_bits() {
                if rest.bit(u64::from(self.weight_exp(k))) {
                    a.set(VarId(var + k), true);
                }
            }
        }
        Some(a)
    }
}

/// A factorization polynomial plus what is needed to interpret it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorModel {
    pub big_n: BigInt,
    pub layout: FactorLayout,
    pub poly: BinaryPolynomial,
    /// Expected minimum in paper convention (constant term dropped).
    pub paper_gme: BigInt,
    /// Total variables, ancillas included.
    pub num_vars: usize,
    /// Sum of constants removed by quadratization gadgets; zero for HUBOs.
    pub gadget_shift: BigInt,
}

/// `(p * q - N)^2` for arbitrary polynomial `p`, `q`.
pub fn product_cost(p: &BinaryPolynomial, q: &BinaryPolynomial, big_n: &BigInt) -> BinaryPolynomial {
    let residual = &(p * q) - &BinaryPolynomial::constant(big_n.clone());
    residual.square()
}

fn check_number(big_n: &BigInt, layout: &FactorLayout) -> Result<()> {
    layout.validate()?;
    if *big_n < BigInt::from(4) {
        return Err(Error::NumberTooSmall(big_n.clone()));
    }
    if layout.fix_lsb && !big_n.bit(0) {
        return Err(Error::NotOddCapable(big_n.clone()));
    }
    Ok(())
}

fn build(big_n: &BigInt, layout: &FactorLayout) -> FactorModel {
    let poly = product_cost(&layout.p_form(), &layout.q_form(), big_n);
    let gme = closed_form_gme(big_n, layout);
    debug_assert_eq!(gme, -poly.offset());
    FactorModel {
        big_n: big_n.clone(),
        layout: layout.clone(),
        paper_gme: gme,
        num_vars: layout.num_vars(),
        poly,
        gadget_shift: BigInt::zero(),
    }
}

/// The plain HUBO with no block offsets.
pub fn build_plain_hubo(big_n: &BigInt, layout: &FactorLayout) -> Result<FactorModel> {
    if layout.is_range() {
        return Err(Error::InvalidLayout("plain model expects zero block offsets".into()));
    }
    check_number(big_n, layout)?;
    Ok(build(big_n, layout))
}

/// HUBO restricted to the block `p in s_i + [0, 2^n)`, `q in s_j + [0, 2^n)`.
pub fn build_range_hubo(big_n: &BigInt, layout: &FactorLayout) -> Result<FactorModel> {
    check_number(big_n, layout)?;
    Ok(build(big_n, layout))
}

/// Closed-form paper-convention target `-(p0*q0 - N)^2` where `p0`, `q0` are
/// the block floors; `-N^2` for the plain layout and
/// `-N^2 - s_i^2 s_j^2 + 2 N s_i s_j` for a range block.
pub fn closed_form_gme(big_n: &BigInt, layout: &FactorLayout) -> BigInt {
    let d = layout.p_floor() * layout.q_floor() - big_n;
    -(&d * &d)
}

/// Smallest symmetric width that can hold a balanced factor pair:
/// the bit length of `floor(sqrt(N))`.
pub fn default_bits(big_n: &BigInt) -> u32 {
    if big_n.is_negative() {
        return 1;
    }
    (big_n.sqrt().bits() as u32).max(1)
}

impl FactorModel {
    pub fn decode(&self, a: &Assignment) -> Result<(BigInt, BigInt)> {
        self.layout.decode(a)
    }

    /// Closed-form target in paper convention, including any gadget shift.
    pub fn expected_gme(&self) -> BigInt {
        closed_form_gme(&self.big_n, &self.layout) - &self.gadget_shift
    }

    /// `(full, paper)` energies of an assignment.
    pub fn energies(&self, a: &Assignment) -> Result<(BigInt, BigInt)> {
        let full = self.poly.evaluate(a)?;
        let paper = &full - self.poly.offset();
        Ok((full, paper))
    }

    pub fn ancilla_count(&self) -> usize {
        self.num_vars - self.layout.num_vars()
    }

    pub fn is_quadratic(&self) -> bool {
        self.poly.degree() <= 2
    }
}
