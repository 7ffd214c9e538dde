//! Power and factorial moments of coefficient vectors, the vanishing-order
//! criterion for `(1 - z)^n | p`, and the objects derived from it: the
//! positive/negative split of the coefficients, PTE witnesses for products
//! with `+-1` coefficients, and the `l1`/`l2` lower bounds.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::newton::IntMultiset;
use crate::norms::coeff_norms;
use crate::polyring::IntPolynomial;

/// `sum_k a_k k^r` for `r = 0..=r_max`, with `0^0 = 1`.
pub fn power_moments(p: &IntPolynomial, r_max: usize) -> Vec<BigInt> {
    let mut moments = vec![BigInt::zero(); r_max + 1];
    for (k, a) in p.coeffs().iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let k = BigInt::from(k);
        let mut term = a.clone();
        for m in moments.iter_mut() {
            *m += &term;
            term *= &k;
        }
    }
    moments
}

/// `sum_k a_k (k)_r` for `r = 0..=r_max`; entry `r` is `p^{(r)}(1)`.
pub fn factorial_moments(p: &IntPolynomial, r_max: usize) -> Vec<BigInt> {
    let mut moments = vec![BigInt::zero(); r_max + 1];
    for (k, a) in p.coeffs().iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let mut term = a.clone();
        for (r, m) in moments.iter_mut().enumerate() {
            if k < r {
                break;
            }
            *m += &term;
            term *= k - r;
        }
    }
    moments
}

/// Number of leading power moments that vanish. Equals the multiplicity of
/// the root `z = 1`.
pub fn vanishing_order_by_moments(p: &IntPolynomial) -> Result<usize> {
    let degree = p.degree().ok_or(Error::ZeroPolynomial)?;
    // (1 - z)^n | p forces n <= deg p, so moment `degree` can never vanish too
    let moments = power_moments(p, degree);
    Ok(moments.iter().take_while(|m| m.is_zero()).count())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedSplit {
    /// Index `k` with multiplicity `a_k` for every `a_k > 0`.
    pub positive: IntMultiset,
    /// Index `k` with multiplicity `|a_k|` for every `a_k < 0`.
    pub negative: IntMultiset,
}

impl SignedSplit {
    /// `|X| + |Y|`, the `l1` norm of the coefficients.
    pub fn total(&self) -> u64 {
        self.positive.len() + self.negative.len()
    }

    /// Whether the two sides agree on power sums `0..order`.
    pub fn power_sums_agree(&self, order: u32) -> bool {
        (0..order).all(|r| self.positive.power_sum(r) == self.negative.power_sum(r))
    }
}

pub fn signed_split(p: &IntPolynomial) -> Result<SignedSplit> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let mut split = SignedSplit {
        positive: IntMultiset::new(),
        negative: IntMultiset::new(),
    };
    for (k, a) in p.coeffs().iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let mult = a
            .abs()
            .to_u64()
            .ok_or_else(|| Error::MultiplicityOverflow(a.to_string()))?;
        let side = if a.is_positive() {
            &mut split.positive
        } else {
            &mut split.negative
        };
        side.insert_many(k as i64, mult);
    }
    Ok(split)
}

/// Lower bounds `sum |a_k| >= 2n` and `sum |a_k|^2 >= 2n` where `n` is the
/// multiplicity of the root at one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct L2BoundReport {
    #[serde(with = "crate::serde_big::display")]
    pub n: usize,
    #[serde(with = "crate::serde_big")]
    pub l1: BigInt,
    #[serde(with = "crate::serde_big")]
    pub l2_squared: BigInt,
    pub l1_ok: bool,
    pub l2_ok: bool,
    /// `n = 0`: the bounds are vacuous.
    pub degenerate: bool,
}

impl L2BoundReport {
    pub fn passed(&self) -> bool {
        self.l1_ok && self.l2_ok
    }
}

pub fn verify_l2_bound(p: &IntPolynomial) -> Result<L2BoundReport> {
    let n = p.multiplicity_at_one()?;
    let norms = coeff_norms(p);
    let two_n = BigInt::from(2 * n);
    Ok(L2BoundReport {
        n,
        l1_ok: norms.l1 >= two_n,
        l2_ok: norms.l2_squared >= two_n,
        l1: norms.l1,
        l2_squared: norms.l2_squared,
        degenerate: n == 0,
    })
}

/// Exponents of the `+1` and `-1` coefficients of a polynomial whose nonzero
/// coefficients are all `+-1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PteWitness {
    #[serde(with = "crate::serde_big::display_vec")]
    pub a_list: Vec<u64>,
    #[serde(with = "crate::serde_big::display_vec")]
    pub b_list: Vec<u64>,
    /// Power sums agree for `k = 0..agreement_order`.
    #[serde(with = "crate::serde_big::display")]
    pub agreement_order: usize,
}

impl PteWitness {
    /// Common size `r` of the two lists.
    pub fn size(&self) -> usize {
        self.a_list.len()
    }
}

pub fn pte_witness(p: &IntPolynomial) -> Result<PteWitness> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let mut a_list = Vec::new();
    let mut b_list = Vec::new();
    for (k, c) in p.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        if c.is_one() {
            a_list.push(k as u64);
        } else if *c == -BigInt::one() {
            b_list.push(k as u64);
        } else {
            return Err(Error::NotPlusMinusOne {
                index: k,
                coeff: c.to_string(),
            });
        }
    }
    let order = vanishing_order_by_moments(p)?;
    let sums = |xs: &[u64], r: u32| -> BigInt { xs.iter().map(|&x| BigInt::from(x).pow(r)).sum() };
    let agree = (0..order as u32).all(|r| sums(&a_list, r) == sums(&b_list, r));
    if !agree || (order > 0 && a_list.len() < order) {
        return Err(Error::InvalidArgument(format!(
            "PTE verification failed for order {order}"
        )));
    }
    Ok(PteWitness {
        a_list,
        b_list,
        agreement_order: order,
    })
}
