//! Multilinear polynomials over binary variables with exact integer
//! coefficients.
//!
//! Every polynomial is kept in canonical form: each monomial is a strictly
//! increasing list of variables (so `x * x = x` has already been applied),
//! appears at most once, and never carries a zero coefficient. The constant
//! term lives in a separate `offset` so the two energy conventions used
//! throughout the crate can be read straight off the polynomial:
//!
//! * full energy: `evaluate(x)`, including the offset;
//! * paper energy: `evaluate(x) - offset`, the non-constant part only.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense, zero-based index of a binary variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VarId(pub u32);

impl VarId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<u32> for VarId {
    fn from(v: u32) -> Self {
        VarId(v)
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A single monomial together with its coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub vars: Vec<VarId>,
    pub coeff: BigInt,
}

impl Term {
    pub fn new(vars: impl IntoIterator<Item = VarId>, coeff: impl Into<BigInt>) -> Self {
        Term {
            vars: canonical_vars(vars),
            coeff: coeff.into(),
        }
    }

    pub fn degree(&self) -> usize {
        self.vars.len()
    }
}

/// Sorts and deduplicates a variable list; duplicates collapse because
/// `x^k = x` for binary `x`.
pub fn canonical_vars(vars: impl IntoIterator<Item = VarId>) -> Vec<VarId> {
    let mut v: Vec<VarId> = vars.into_iter().collect();
    v.sort_unstable();
    v.dedup();
    v
}

fn merge_vars(a: &[VarId], b: &[VarId]) -> Vec<VarId> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Multilinear pseudo-Boolean polynomial with arbitrary-precision
/// coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BinaryPolynomial {
    terms: BTreeMap<Vec<VarId>, BigInt>,
    offset: BigInt,
}

impl BinaryPolynomial {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        BinaryPolynomial {
            terms: BTreeMap::new(),
            offset: c.into(),
        }
    }

    /// The polynomial `coeff * x_var`.
    pub fn monomial(vars: impl IntoIterator<Item = VarId>, coeff: impl Into<BigInt>) -> Self {
        let mut p = Self::new();
        p.add_term(vars, coeff);
        p
    }

    /// Builds a canonical polynomial from arbitrary (possibly repeated,
    /// unsorted) monomials.
    pub fn from_terms<I, V>(terms: I, offset: impl Into<BigInt>) -> Self
    where
        I: IntoIterator<Item = (V, BigInt)>,
        V: IntoIterator<Item = VarId>,
    {
        let mut p = Self::constant(offset);
        for (vars, c) in terms {
            p.add_term(vars, c);
        }
        p
    }

    /// Accumulates `coeff * prod(vars)`. Duplicated variables collapse, an
    /// empty variable list adds to the offset, and cancelled terms are
    /// removed.
    pub fn add_term(&mut self, vars: impl IntoIterator<Item = VarId>, coeff: impl Into<BigInt>) {
        let vars = canonical_vars(vars);
        self.add_canonical(vars, coeff.into());
    }

    /// Builder form of [`add_term`](Self::add_term).
    pub fn with_term(mut self, vars: impl IntoIterator<Item = VarId>, coeff: impl Into<BigInt>) -> Self {
        self.add_term(vars, coeff);
        self
    }

    fn add_canonical(&mut self, vars: Vec<VarId>, coeff: BigInt) {
        if coeff.is_zero() {
            return;
        }
        if vars.is_empty() {
            self.offset += coeff;
            return;
        }
        match self.terms.entry(vars) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn add_canonical_ref(&mut self, vars: &[VarId], coeff: &BigInt) {
        if coeff.is_zero() {
            return;
        }
        if vars.is_empty() {
            self.offset += coeff;
            return;
        }
        if let Some(c) = self.terms.get_mut(vars) {
            *c += coeff;
            if c.is_zero() {
                self.terms.remove(vars);
            }
        } else {
            self.terms.insert(vars.to_vec(), coeff.clone());
        }
    }

    pub fn offset(&self) -> &BigInt {
        &self.offset
    }

    pub fn set_offset(&mut self, offset: impl Into<BigInt>) {
        self.offset = offset.into();
    }

    /// Non-constant terms in canonical (lexicographic) order.
    pub fn terms(&self) -> impl ExactSizeIterator<Item = (&[VarId], &BigInt)> + '_ {
        self.terms.iter().map(|(v, c)| (v.as_slice(), c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.offset.is_zero()
    }

    pub fn coefficient(&self, vars: &[VarId]) -> Option<&BigInt> {
        self.terms.get(vars)
    }

    /// Coefficient of an arbitrary (non-canonical) monomial, zero if absent.
    pub fn coeff_of(&self, vars: impl IntoIterator<Item = VarId>) -> BigInt {
        let v = canonical_vars(vars);
        if v.is_empty() {
            return self.offset.clone();
        }
        self.terms.get(&v).cloned().unwrap_or_default()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    pub fn variables(&self) -> BTreeSet<VarId> {
        self.terms.keys().flatten().copied().collect()
    }

    /// One past the largest referenced variable index; the minimum length an
    /// assignment needs to evaluate this polynomial.
    pub fn num_vars(&self) -> usize {
        self.terms
            .keys()
            .filter_map(|v| v.last())
            .map(|v| v.index() + 1)
            .max()
            .unwrap_or(0)
    }

    /// Number of monomials of each degree, indexed by degree.
    pub fn degree_histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.degree() + 1];
        for v in self.terms.keys() {
            h[v.len()] += 1;
        }
        h
    }

    pub fn max_abs_coeff(&self) -> BigInt {
        self.terms.values().map(|c| c.abs()).max().unwrap_or_else(BigInt::zero)
    }

    /// `|offset| + sum |coeff|`, an upper bound on `|evaluate(x)|` for every
    /// assignment.
    pub fn abs_bound(&self) -> BigInt {
        self.terms.values().fold(self.offset.abs(), |acc, c| acc + c.abs())
    }

    /// Exact energy of an assignment, offset included.
    pub fn evaluate(&self, a: &Assignment) -> Result<BigInt> {
        let need = self.num_vars();
        if a.len() < need {
            return Err(Error::AssignmentTooShort {
                len: a.len(),
                var: (need - 1) as u32,
            });
        }
        let mut e = self.offset.clone();
        for (vars, c) in &self.terms {
            if vars.iter().all(|v| a.get(*v)) {
                e += c;
            }
        }
        Ok(e)
    }

    /// Energy with the constant term dropped.
    pub fn evaluate_paper(&self, a: &Assignment) -> Result<BigInt> {
        Ok(self.evaluate(a)? - &self.offset)
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        if k.is_zero() {
            return Self::new();
        }
        BinaryPolynomial {
            terms: self.terms.iter().map(|(v, c)| (v.clone(), c * k)).collect(),
            offset: &self.offset * k,
        }
    }

    pub fn square(&self) -> Self {
        self * self
    }

    /// Substitutes fixed values for some variables. The result no longer
    /// references any variable in `fixed`.
    pub fn restrict(&self, fixed: &BTreeMap<VarId, bool>) -> Self {
        let mut out = Self::constant(self.offset.clone());
        'terms: for (vars, c) in &self.terms {
            let mut rest = Vec::with_capacity(vars.len());
            for v in vars {
                match fixed.get(v) {
                    Some(true) => {}
                    Some(false) => continue 'terms,
                    None => rest.push(*v),
                }
            }
            out.add_canonical(rest, c.clone());
        }
        out
    }

    /// Renames every variable through `map`. Colliding images merge.
    pub fn relabel(&self, mut map: impl FnMut(VarId) -> VarId) -> Self {
        let mut out = Self::constant(self.offset.clone());
        for (vars, c) in &self.terms {
            out.add_term(vars.iter().map(|v| map(*v)), c.clone());
        }
        out
    }
}

impl AddAssign<&BinaryPolynomial> for BinaryPolynomial {
    fn add_assign(&mut self, rhs: &BinaryPolynomial) {
        self.offset += &rhs.offset;
        for (v, c) in &rhs.terms {
            self.add_canonical_ref(v, c);
        }
    }
}

impl Add for &BinaryPolynomial {
    type Output = BinaryPolynomial;
    fn add(self, rhs: &BinaryPolynomial) -> BinaryPolynomial {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Neg for &BinaryPolynomial {
    type Output = BinaryPolynomial;
    fn neg(self) -> BinaryPolynomial {
        BinaryPolynomial {
            terms: self.terms.iter().map(|(v, c)| (v.clone(), -c)).collect(),
            offset: -&self.offset,
        }
    }
}

impl Sub for &BinaryPolynomial {
    type Output = BinaryPolynomial;
    fn sub(self, rhs: &BinaryPolynomial) -> BinaryPolynomial {
        let mut out = self.clone();
        out += &(-rhs);
        out
    }
}

impl Mul for &BinaryPolynomial {
    type Output = BinaryPolynomial;
    fn mul(self, rhs: &BinaryPolynomial) -> BinaryPolynomial {
        let mut out = BinaryPolynomial::constant(&self.offset * &rhs.offset);
        if !self.offset.is_zero() {
            for (v, c) in &rhs.terms {
                out.add_canonical_ref(v, &(c * &self.offset));
            }
        }
        if !rhs.offset.is_zero() {
            for (v, c) in &self.terms {
                out.add_canonical_ref(v, &(c * &rhs.offset));
            }
        }
        for (va, ca) in &self.terms {
            for (vb, cb) in &rhs.terms {
                out.add_canonical(merge_vars(va, vb), ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for BinaryPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (vars, c) in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for v in vars {
                write!(f, "*{v}")?;
            }
        }
        if first || !self.offset.is_zero() {
            if !first {
                f.write_str(" + ")?;
            }
            write!(f, "{}", self.offset)?;
        }
        Ok(())
    }
}

/// A binary assignment, one bit per variable index.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn zeros(len: usize) -> Self {
        Assignment(vec![false; len])
    }

    pub fn from_bits(bits: impl IntoIterator<Item = bool>) -> Self {
        Assignment(bits.into_iter().collect())
    }

    /// Bit `i` of `value` becomes variable `i`.
    pub fn from_u64(value: u64, len: usize) -> Self {
        Assignment((0..len).map(|i| i < 64 && (value >> i) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Out-of-range variables read as 0.
    #[inline]
    pub fn get(&self, v: VarId) -> bool {
        self.0.get(v.index()).copied().unwrap_or(false)
    }

    pub fn set(&mut self, v: VarId, bit: bool) {
        if v.index() >= self.0.len() {
            self.0.resize(v.index() + 1, false);
        }
        self.0[v.index()] = bit;
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn to_u64(&self) -> Option<u64> {
        if self.0.iter().skip(64).any(|b| *b) {
            return None;
        }
        Some(
            self.0
                .iter()
                .take(64)
                .enumerate()
                .fold(0, |acc, (i, b)| acc | ((*b as u64) << i)),
        )
    }

    /// Orders assignments as unsigned integers with variable 0 as the least
    /// significant bit.
    pub fn cmp_as_integer(&self, other: &Self) -> std::cmp::Ordering {
        let len = self.len().max(other.len());
        for i in (0..len).rev() {
            let a = self.0.get(i).copied().unwrap_or(false);
            let b = other.0.get(i).copied().unwrap_or(false);
            if a != b {
                return a.cmp(&b);
            }
        }
        std::cmp::Ordering::Equal
    }

    pub fn truncated(&self, len: usize) -> Self {
        Assignment(self.0.iter().copied().take(len).collect())
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Ising spin value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Spin {
    Down,
    Up,
}

impl Spin {
    pub fn value(self) -> i8 {
        match self {
            Spin::Down => -1,
            Spin::Up => 1,
        }
    }

    pub fn from_value(v: i8) -> Option<Self> {
        match v {
            -1 => Some(Spin::Down),
            1 => Some(Spin::Up),
            _ => None,
        }
    }
}

/// `q = (s + 1) / 2` elementwise.
pub fn spins_to_assignment(spins: &[Spin]) -> Assignment {
    Assignment(spins.iter().map(|s| *s == Spin::Up).collect())
}

/// `s = 2q - 1` elementwise.
pub fn assignment_to_spins(a: &Assignment) -> Vec<Spin> {
    a.0.iter().map(|b| if *b { Spin::Up } else { Spin::Down }).collect()
}

/// Degree-1 polynomial `constant + sum weight_i * x_i`.
pub fn linear_form(
    constant: impl Into<BigInt>,
    weighted: impl IntoIterator<Item = (VarId, BigInt)>,
) -> BinaryPolynomial {
    let mut p = BinaryPolynomial::constant(constant);
    for (v, w) in weighted {
        p.add_term([v], w);
    }
    p
}

pub(crate) fn pow2(k: u32) -> BigInt {
    BigInt::one() << k
}
