//! Exponent sequences and dense integer polynomials, specialised to pure
//! power products `(1 - z^{s_1}) ... (1 - z^{s_n})`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Canonical (non-decreasing) multiset of positive exponents.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawSequence", into = "RawSequence")]
pub struct ExponentSequence {
    exponents: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct RawSequence {
    s: Vec<i64>,
}

impl TryFrom<RawSequence> for ExponentSequence {
    type Error = Error;

    fn try_from(raw: RawSequence) -> Result<Self> {
        Self::from_signed(raw.s)
    }
}

impl From<ExponentSequence> for RawSequence {
    fn from(seq: ExponentSequence) -> Self {
        RawSequence {
            s: seq.exponents.iter().map(|&e| e as i64).collect(),
        }
    }
}

impl ExponentSequence {
    /// Builds a canonical sequence, sorting the input. Zero exponents are rejected.
    pub fn new(mut exponents: Vec<u64>) -> Result<Self> {
        if exponents.contains(&0) {
            return Err(Error::NonPositiveExponent(0));
        }
        exponents.sort_unstable();
        Ok(Self { exponents })
    }

    pub fn from_signed(values: Vec<i64>) -> Result<Self> {
        let exponents = values
            .into_iter()
            .map(|v| {
                if v >= 1 {
                    Ok(v as u64)
                } else {
                    Err(Error::NonPositiveExponent(v))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(exponents)
    }

    pub fn empty() -> Self {
        Self { exponents: Vec::new() }
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    /// Degree of the expanded product, `sum s_j`.
    pub fn degree(&self) -> u64 {
        self.exponents.iter().sum()
    }

    pub fn gcd(&self) -> u64 {
        self.exponents.iter().fold(0, |g, &e| g.gcd(&e))
    }

    pub fn is_primitive(&self) -> bool {
        self.gcd() <= 1
    }

    /// Divides out the common factor; `P(z^c)` and `P(z)` share their sup-norm.
    pub fn primitive(&self) -> Self {
        let g = self.gcd().max(1);
        Self {
            exponents: self.exponents.iter().map(|e| e / g).collect(),
        }
    }

    pub fn scaled(&self, c: u64) -> Self {
        assert!(c >= 1, "scale factor must be positive");
        Self {
            exponents: self.exponents.iter().map(|e| e * c).collect(),
        }
    }
}

/// Number of non-decreasing sequences of length `n` over `1..=s_max`,
/// `C(s_max + n - 1, n)`. Saturates at `u128::MAX`.
pub fn count_canonical(n: usize, s_max: u64) -> u128 {
    if s_max == 0 {
        return u128::from(n == 0);
    }
    let mut acc: u128 = 1;
    for i in 1..=n as u128 {
        // acc = C(s_max - 1 + i, i), exact at every step
        acc = match acc.checked_mul(s_max as u128 - 1 + i) {
            Some(v) => v / i,
            None => return u128::MAX,
        };
    }
    acc
}

/// Lexicographic enumeration of non-decreasing sequences over `1..=s_max`.
#[derive(Debug, Clone)]
pub struct CanonicalSequences {
    current: Option<Vec<u64>>,
    s_max: u64,
}

impl CanonicalSequences {
    pub fn new(n: usize, s_max: u64) -> Self {
        let current = (n == 0 || s_max >= 1).then(|| vec![1; n]);
        Self { current, s_max }
    }
}

impl Iterator for CanonicalSequences {
    type Item = ExponentSequence;

    fn next(&mut self) -> Option<ExponentSequence> {
        let cur = self.current.take()?;
        let out = ExponentSequence {
            exponents: cur.clone(),
        };
        let mut next = cur;
        if let Some(i) = next.iter().rposition(|&e| e < self.s_max) {
            let v = next[i] + 1;
            for e in &mut next[i..] {
                *e = v;
            }
            self.current = Some(next);
        }
        Some(out)
    }
}

impl FromStr for ExponentSequence {
    type Err = Error;

    /// Parses a comma separated list such as `1,2,4`.
    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim();
        if trimmed.is_empty() {
            return Ok(Self::empty());
        }
        let values = trimmed
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                tok.parse::<i64>().map_err(|_| {
                    Error::InvalidArgument(format!("exponent '{tok}' is not an integer"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_signed(values)
    }
}

impl fmt::Display for ExponentSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.exponents.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Dense polynomial with exact integer coefficients, `coeffs[k]` multiplying `z^k`.
///
/// The leading coefficient is nonzero except for the zero polynomial, which is
/// stored as the single coefficient `0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "RawPolynomial", into = "RawPolynomial")]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

#[derive(Serialize, Deserialize)]
struct RawPolynomial {
    #[serde(with = "crate::serde_big::vec")]
    coeffs: Vec<BigInt>,
}

impl From<RawPolynomial> for IntPolynomial {
    fn from(raw: RawPolynomial) -> Self {
        IntPolynomial::new(raw.coeffs)
    }
}

impl From<IntPolynomial> for RawPolynomial {
    fn from(p: IntPolynomial) -> Self {
        RawPolynomial { coeffs: p.coeffs }
    }
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(BigInt::zero());
        }
        Self { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![BigInt::zero()] }
    }

    pub fn one() -> Self {
        Self { coeffs: vec![BigInt::one()] }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigInt> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn eval_at_one(&self) -> BigInt {
        self.coeffs.iter().sum()
    }

    pub fn nonzero_count(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }

    /// Coefficients as `i64`, if they all fit.
    pub fn to_i64s(&self) -> Option<Vec<i64>> {
        use num_traits::ToPrimitive;
        self.coeffs.iter().map(ToPrimitive::to_i64).collect()
    }

    /// `P(z^c)`: coefficient `k` moves to index `c k`.
    pub fn substitute_power(&self, c: usize) -> Self {
        assert!(c >= 1, "substitution power must be positive");
        if self.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigInt::zero(); (self.coeffs.len() - 1) * c + 1];
        for (k, a) in self.coeffs.iter().enumerate() {
            out[k * c] = a.clone();
        }
        Self::new(out)
    }

    /// Multiplies by `1 - z^s` in place: `c'[k] = c[k] - c[k - s]`.
    pub fn mul_one_minus_pow(&self, s: u64) -> Self {
        let mut out = self.clone();
        out.apply_one_minus_pow(s);
        out
    }

    fn apply_one_minus_pow(&mut self, s: u64) {
        assert!(s >= 1, "exponent must be positive");
        if self.is_zero() {
            return;
        }
        let s = s as usize;
        let old_len = self.coeffs.len();
        self.coeffs.resize(old_len + s, BigInt::zero());
        for k in (s..self.coeffs.len()).rev() {
            let (lo, hi) = self.coeffs.split_at_mut(k);
            hi[0] -= &lo[k - s];
        }
    }

    /// Expands `prod_j (1 - z^{s_j})` exactly. The empty product is `1`.
    pub fn expand_product(seq: &ExponentSequence) -> Self {
        let mut p = Self::one();
        p.coeffs.reserve(seq.degree() as usize);
        for &s in seq.exponents() {
            p.apply_one_minus_pow(s);
        }
        p
    }

    /// Synthetic division by `1 - z`. Returns the quotient and `true` when the
    /// division is exact, otherwise `self` unchanged and `false`.
    pub fn divide_by_one_minus_z(&self) -> (Self, bool) {
        if self.is_zero() {
            return (Self::zero(), true);
        }
        if !self.eval_at_one().is_zero() {
            return (self.clone(), false);
        }
        // p = (1 - z) q  =>  q[k] = sum_{i<=k} p[i]
        let n = self.coeffs.len();
        let mut q = Vec::with_capacity(n - 1);
        let mut acc = BigInt::zero();
        for c in &self.coeffs[..n - 1] {
            acc += c;
            q.push(acc.clone());
        }
        (Self::new(q), true)
    }

    /// Largest `n` with `(1 - z)^n | p`, by repeated exact division.
    pub fn multiplicity_at_one(&self) -> Result<usize> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let mut n = 0;
        let mut cur = self.clone();
        loop {
            let (q, exact) = cur.divide_by_one_minus_z();
            if !exact {
                return Ok(n);
            }
            n += 1;
            cur = q;
        }
    }

    /// Recovers the exponent sequence when `self` is exactly a pure power
    /// product, `None` otherwise.
    ///
    /// The lowest positive power with a nonzero coefficient of a pure product
    /// is its smallest exponent, carrying a negative coefficient, so peeling
    /// off `1 - z^s` greedily is complete.
    pub fn decompose_pure_product(&self) -> Option<ExponentSequence> {
        if self.coeffs[0] != BigInt::one() {
            return None;
        }
        let mut cur = self.coeffs.clone();
        let mut exponents = Vec::new();
        while let Some(s) = cur.iter().skip(1).position(|c| !c.is_zero()).map(|i| i + 1) {
            if !cur[s].is_negative() {
                return None;
            }
            // cur = (1 - z^s) q  =>  q[k] = cur[k] + q[k - s]
            let deg = cur.len() - 1;
            if deg < s {
                return None;
            }
            let qlen = deg - s + 1;
            let mut q: Vec<BigInt> = Vec::with_capacity(qlen);
            for k in 0..cur.len() {
                let carry = if k >= s && k - s < q.len() {
                    q[k - s].clone()
                } else {
                    BigInt::zero()
                };
                let v = &cur[k] + carry;
                if k < qlen {
                    q.push(v);
                } else if !v.is_zero() {
                    return None;
                }
            }
            exponents.push(s as u64);
            cur = IntPolynomial::new(q).coeffs;
        }
        (cur.len() == 1 && cur[0].is_one())
            .then(|| ExponentSequence::new(exponents).expect("exponents are positive"))
    }

    /// `sum_k |a_k|`, exact.
    pub fn l1(&self) -> BigInt {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            match (k, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "z")?,
                (1, false) => write!(f, "{mag}z")?,
                (_, true) => write!(f, "z^{k}")?,
                (_, false) => write!(f, "{mag}z^{k}")?,
            }
        }
        Ok(())
    }
}
