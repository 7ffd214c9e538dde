//! Power sums, elementary symmetric functions and the Newton recursion that
//! links them, plus reconstruction of an integer multiset from its first `m`
//! power sums.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite multiset of integers, stored as value to multiplicity.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawMultiset", into = "RawMultiset")]
pub struct IntMultiset {
    entries: BTreeMap<i64, u64>,
}

#[derive(Serialize, Deserialize)]
struct RawMultiset {
    elements: Vec<(i64, u64)>,
}

impl TryFrom<RawMultiset> for IntMultiset {
    type Error = Error;

    fn try_from(raw: RawMultiset) -> Result<Self> {
        let mut out = IntMultiset::new();
        for (v, mult) in raw.elements {
            if mult == 0 {
                return Err(Error::InvalidArgument(format!(
                    "multiplicity of {v} must be positive"
                )));
            }
            out.insert_many(v, mult);
        }
        Ok(out)
    }
}

impl From<IntMultiset> for RawMultiset {
    fn from(m: IntMultiset) -> Self {
        RawMultiset {
            elements: m.entries.into_iter().collect(),
        }
    }
}

impl IntMultiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert_many(&mut self, value: i64, multiplicity: u64) {
        if multiplicity > 0 {
            *self.entries.entry(value).or_insert(0) += multiplicity;
        }
    }

    pub fn insert(&mut self, value: i64) {
        self.insert_many(value, 1);
    }

    /// Total size counted with multiplicity.
    pub fn len(&self) -> u64 {
        self.entries.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn multiplicity(&self, value: i64) -> u64 {
        self.entries.get(&value).copied().unwrap_or(0)
    }

    /// `(value, multiplicity)` pairs in increasing value order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.entries.iter().map(|(&v, &m)| (v, m))
    }

    /// Elements repeated by multiplicity, ascending.
    pub fn to_sorted_vec(&self) -> Vec<i64> {
        self.iter()
            .flat_map(|(v, m)| std::iter::repeat_n(v, m as usize))
            .collect()
    }

    /// `sum x^r` with `0^0 = 1`.
    pub fn power_sum(&self, r: u32) -> BigInt {
        self.iter()
            .map(|(v, m)| BigInt::from(v).pow(r) * m)
            .sum()
    }
}

impl FromIterator<i64> for IntMultiset {
    fn from_iter<I: IntoIterator<Item = i64>>(iter: I) -> Self {
        let mut out = IntMultiset::new();
        for v in iter {
            out.insert(v);
        }
        out
    }
}

/// `(p_1, ..., p_m)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerSums {
    #[serde(with = "crate::serde_big::vec")]
    pub values: Vec<BigInt>,
}

/// `(e_1, ..., e_m)`, with `e_0 = 1` implicit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementarySymmetric {
    #[serde(with = "crate::serde_big::vec")]
    pub values: Vec<BigInt>,
}

impl PowerSums {
    pub fn new(values: Vec<BigInt>) -> Self {
        Self { values }
    }

    pub fn from_i64s(values: &[i64]) -> Self {
        Self::new(values.iter().map(|&v| BigInt::from(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn power_sums(x: &IntMultiset, r_max: u32) -> Result<PowerSums> {
    if r_max < 1 {
        return Err(Error::InvalidArgument("r_max must be at least 1".into()));
    }
    Ok(PowerSums::new((1..=r_max).map(|r| x.power_sum(r)).collect()))
}

/// Newton's identities, `r e_r = sum_{i=1}^{r} (-1)^{i-1} e_{r-i} p_i`.
///
/// A non-integral `e_r` means no integer multiset has these power sums.
pub fn elementary_from_power(ps: &PowerSums) -> Result<ElementarySymmetric> {
    if ps.is_empty() {
        return Err(Error::InvalidArgument("need at least one power sum".into()));
    }
    let mut e: Vec<BigInt> = Vec::with_capacity(ps.len() + 1);
    e.push(BigInt::one());
    for r in 1..=ps.len() {
        let mut acc = BigInt::zero();
        for i in 1..=r {
            let term = &e[r - i] * &ps.values[i - 1];
            if i % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        let (q, rem) = acc.div_rem(&BigInt::from(r));
        if !rem.is_zero() {
            return Err(Error::NotRealizable(format!(
                "e_{r} = {acc}/{r} is not an integer"
            )));
        }
        e.push(q);
    }
    e.remove(0);
    Ok(ElementarySymmetric { values: e })
}

/// Elementary symmetric functions computed directly from the elements.
pub fn elementary_direct(x: &IntMultiset) -> ElementarySymmetric {
    // coefficients of prod (1 + x t)
    let mut e = vec![BigInt::one()];
    for v in x.to_sorted_vec() {
        let v = BigInt::from(v);
        e.push(BigInt::zero());
        for j in (1..e.len()).rev() {
            let add = &e[j - 1] * &v;
            e[j] += add;
        }
    }
    e.remove(0);
    ElementarySymmetric { values: e }
}

/// Trailing coefficients at or above `2^63` are refused rather than factored.
const FACTOR_CAP: u64 = 1 << 63;

/// Synthetic division of a monic polynomial (ascending coefficients) by `t - root`.
fn divide_root(coeffs: &[BigInt], root: &BigInt) -> Option<Vec<BigInt>> {
    let n = coeffs.len() - 1;
    let mut q = vec![BigInt::zero(); n];
    let mut carry = BigInt::zero();
    for k in (1..=n).rev() {
        carry = &coeffs[k] + carry * root;
        q[k - 1] = carry.clone();
    }
    let remainder = &coeffs[0] + carry * root;
    remainder.is_zero().then_some(q)
}

fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while (d as u128) * (d as u128) <= n as u128 {
        if n.is_multiple_of(d) {
            small.push(d);
            if d != n / d {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Rebuilds the integer multiset whose first `m` power sums are `ps`.
///
/// Forms `P(t) = t^m - e_1 t^{m-1} + ... + (-1)^m e_m`, strips roots at zero,
/// then tries every divisor `d` of the trailing coefficient as `+d` and `-d`
/// with repeated synthetic division.
pub fn reconstruct_multiset(ps: &PowerSums) -> Result<IntMultiset> {
    let e = elementary_from_power(ps)?;
    let m = e.values.len();
    // ascending: coeff of t^{m-j} is (-1)^j e_j
    let mut coeffs = vec![BigInt::zero(); m + 1];
    coeffs[m] = BigInt::one();
    for (j, ej) in e.values.iter().enumerate() {
        let j = j + 1;
        coeffs[m - j] = if j % 2 == 0 { ej.clone() } else { -ej };
    }

    let mut out = IntMultiset::new();
    let zeros = coeffs.iter().take_while(|c| c.is_zero()).count();
    out.insert_many(0, zeros as u64);
    coeffs.drain(..zeros);

    if coeffs.len() > 1 {
        let trailing = coeffs[0].abs();
        let trailing = trailing
            .to_u64()
            .filter(|&t| t < FACTOR_CAP)
            .ok_or_else(|| Error::TooLargeToFactor(coeffs[0].to_string()))?;
        'outer: for d in divisors(trailing) {
            for root in [d as i64, -(d as i64)] {
                let r = BigInt::from(root);
                while let Some(q) = divide_root(&coeffs, &r) {
                    coeffs = q;
                    out.insert(root);
                    if coeffs.len() == 1 {
                        break 'outer;
                    }
                }
            }
        }
    }
    if coeffs.len() > 1 {
        return Err(Error::NotRealizable(format!(
            "{} roots are not integers",
            coeffs.len() - 1
        )));
    }
    Ok(out)
}

/// Compares `p_1 .. p_m` of two multisets of equal size `m`.
pub fn equal_by_power_sums(x: &IntMultiset, y: &IntMultiset) -> Result<bool> {
    let m = x.len();
    if m != y.len() {
        return Err(Error::SizeMismatch(m, y.len()));
    }
    Ok((1..=m as u32).all(|r| x.power_sum(r) == y.power_sum(r)))
}
