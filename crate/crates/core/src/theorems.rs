//! End-to-end checks on pure power products: the exact bound
//! `sum |a_k|^2 >= 2n`, the certified sup-norm against `2 sqrt(n)` and
//! `sqrt(2 sum |a_k|^2)`, and batch runs over families of exponent sequences.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::verify_l2_bound;
use crate::norms::{mean_square_on_grid, sup_norm_enclosure, SupNormEnclosure};
use crate::polyring::{CanonicalSequences, ExponentSequence, IntPolynomial};

/// Tolerance for floating comparisons against the bounds.
pub const FLOAT_TOL: f64 = 1e-9;

fn at_least(value: f64, bound: f64) -> bool {
    value >= bound - FLOAT_TOL * bound.abs().max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub s: ExponentSequence,
    pub n: usize,
    #[serde(with = "crate::serde_big")]
    pub l1: BigInt,
    #[serde(with = "crate::serde_big")]
    pub l2_squared: BigInt,
    pub nonzero_count: usize,
    pub enclosure: SupNormEnclosure,
    pub bound_2sqrt_n: f64,
    pub bound_sqrt_2_l2: f64,
    /// `upper >= 2 sqrt n`, `upper >= sqrt(2 l2^2)` and `l2^2 >= 2n`.
    pub consistent: bool,
    /// `l1 >= 2n`.
    pub l1_ok: bool,
    /// `lower >= 2 sqrt n - pi L / M`.
    pub lower_ok: bool,
    /// `lower - 2 sqrt n`.
    pub slack: f64,
}

impl BoundReport {
    /// Every check, including the width-adjusted lower bound.
    pub fn passed(&self) -> bool {
        self.consistent && self.l1_ok && self.lower_ok
    }

    pub fn failure_reasons(&self) -> Vec<String> {
        let e = &self.enclosure;
        let two_n = BigInt::from(2 * self.n);
        let mut out = Vec::new();
        if self.l2_squared < two_n {
            out.push(format!("l2^2 = {} < 2n = {}", self.l2_squared, two_n));
        }
        if self.l1 < two_n {
            out.push(format!("l1 = {} < 2n = {}", self.l1, two_n));
        }
        if !at_least(e.upper, self.bound_2sqrt_n) {
            out.push(format!("upper {} < 2 sqrt n = {}", e.upper, self.bound_2sqrt_n));
        }
        if !at_least(e.upper, self.bound_sqrt_2_l2) {
            out.push(format!("upper {} < sqrt(2 l2^2) = {}", e.upper, self.bound_sqrt_2_l2));
        }
        if !self.lower_ok {
            out.push(format!(
                "lower {} < 2 sqrt n - pi L / M = {}",
                e.lower,
                self.bound_2sqrt_n - PI * e.lipschitz_bound / e.grid_size as f64
            ));
        }
        out
    }
}

fn big_f64(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// Expands `s`, checks the exact coefficient bounds and compares a sup-norm
/// enclosure on an `m`-point grid against `2 sqrt n` and `sqrt(2 l2^2)`.
pub fn verify_main_bound(s: &ExponentSequence, m: usize) -> Result<BoundReport> {
    if s.is_empty() {
        return Err(Error::DegenerateProduct);
    }
    let p = IntPolynomial::expand_product(s);
    let l2 = verify_l2_bound(&p)?;
    let enclosure = sup_norm_enclosure(&p, m)?;
    let n = l2.n;
    let bound_2sqrt_n = 2.0 * (n as f64).sqrt();
    let bound_sqrt_2_l2 = (2.0 * big_f64(&l2.l2_squared)).sqrt();
    let width_floor = bound_2sqrt_n - PI * enclosure.lipschitz_bound / enclosure.grid_size as f64;
    let consistent = at_least(enclosure.upper, bound_2sqrt_n)
        && at_least(enclosure.upper, bound_sqrt_2_l2)
        && l2.l2_ok;
    // sqrt(2 l2^2) >= sqrt(4n) = 2 sqrt n whenever l2^2 >= 2n
    debug_assert!(!l2.l2_ok || at_least(bound_sqrt_2_l2, bound_2sqrt_n));
    Ok(BoundReport {
        s: s.clone(),
        n,
        nonzero_count: p.nonzero_count(),
        enclosure,
        bound_2sqrt_n,
        bound_sqrt_2_l2,
        consistent,
        l1_ok: l2.l1_ok,
        lower_ok: at_least(enclosure.lower, width_floor),
        slack: enclosure.lower - bound_2sqrt_n,
        l1: l2.l1,
        l2_squared: l2.l2_squared,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrReport {
    /// Mean of `|p|^2` over the grid.
    pub rms_sq: f64,
    #[serde(with = "crate::serde_big")]
    pub l2_squared: BigInt,
    pub enclosure: SupNormEnclosure,
    /// `upper^2 >= 2 l2^2`.
    pub upper_ok: bool,
    /// `lower^2 - 2 l2^2`.
    pub lower_slack: f64,
    /// The input decomposed as a pure power product, so every zero lies on
    /// the unit circle.
    pub hypothesis_guaranteed: bool,
    pub exponents: Option<ExponentSequence>,
}

impl OrReport {
    /// A violation only counts when the hypothesis holds.
    pub fn passed(&self) -> bool {
        self.upper_ok || !self.hypothesis_guaranteed
    }
}

/// Compares the certified sup-norm with `sqrt(2 sum |a_k|^2)`.
///
/// Inputs that are not pure power products still get a report, with
/// `hypothesis_guaranteed = false`.
pub fn verify_or_inequality(p: &IntPolynomial, m: usize) -> Result<OrReport> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let exponents = p.decompose_pure_product();
    let enclosure = sup_norm_enclosure(p, m)?;
    let l2_squared = crate::norms::coeff_norms(p).l2_squared;
    let target = 2.0 * big_f64(&l2_squared);
    Ok(OrReport {
        rms_sq: mean_square_on_grid(p, m)?,
        upper_ok: at_least(enclosure.upper * enclosure.upper, target),
        lower_slack: enclosure.lower * enclosure.lower - target,
        hypothesis_guaranteed: exponents.is_some(),
        exponents,
        enclosure,
        l2_squared,
    })
}

/// Families of exponent sequences for batch runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    /// Every canonical sequence with `1 <= n <= n_max` and `s_j <= s_max`.
    Exhaustive { n_max: usize, s_max: u64 },
    /// `count` sequences with `s_j` uniform in `1..=s_max`, canonicalised.
    Random {
        count: usize,
        n: usize,
        s_max: u64,
        seed: u64,
    },
}

impl Family {
    pub fn members(&self) -> Vec<ExponentSequence> {
        match *self {
            Family::Exhaustive { n_max, s_max } => (1..=n_max)
                .flat_map(|n| CanonicalSequences::new(n, s_max))
                .collect(),
            Family::Random {
                count,
                n,
                s_max,
                seed,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..count)
                    .map(|_| {
                        let draw = (0..n).map(|_| rng.gen_range(1..=s_max.max(1))).collect();
                        ExponentSequence::new(draw).expect("draws are positive")
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchFailure {
    pub s: ExponentSequence,
    pub reasons: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub count: usize,
    /// Distinct gcd-reduced sequences among the members.
    pub distinct_primitive: usize,
    pub failures: Vec<BatchFailure>,
}

#[derive(Debug, Clone)]
pub struct BatchOutcome {
    pub summary: BatchSummary,
    /// In member order.
    pub reports: Vec<BoundReport>,
}

impl BatchOutcome {
    /// One JSON report per line.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for r in &self.reports {
            out.push_str(&serde_json::to_string(r)?);
            out.push('\n');
        }
        Ok(out)
    }
}

/// Runs [`verify_main_bound`] on every member in parallel. Reports keep
/// member order, so output does not depend on the worker count.
pub fn batch_verify(family: &Family, m: usize) -> Result<BatchOutcome> {
    let members = family.members();
    let results: Vec<Result<BoundReport>> =
        members.par_iter().map(|s| verify_main_bound(s, m)).collect();
    let distinct_primitive = members
        .iter()
        .map(ExponentSequence::primitive)
        .collect::<BTreeSet<_>>()
        .len();
    let mut failures = Vec::new();
    let mut reports = Vec::with_capacity(results.len());
    for (s, res) in members.iter().zip(results) {
        match res {
            Ok(r) => {
                if !r.passed() {
                    failures.push(BatchFailure {
                        s: s.clone(),
                        reasons: r.failure_reasons(),
                    });
                }
                reports.push(r);
            }
            Err(Error::InvalidGrid(g)) => return Err(Error::InvalidGrid(g)),
            Err(e) => failures.push(BatchFailure {
                s: s.clone(),
                reasons: vec![e.to_string()],
            }),
        }
    }
    Ok(BatchOutcome {
        summary: BatchSummary {
            count: members.len(),
            distinct_primitive,
            failures,
        },
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(v: &[u64]) -> ExponentSequence {
        ExponentSequence::new(v.to_vec()).unwrap()
    }

    const SUP_ONE_TWO: f64 = 3.0792014356780038;

    #[test]
    fn closed_form_constant() {
        assert!((16.0 / (3.0 * 3f64.sqrt()) - SUP_ONE_TWO).abs() < 1e-15);
    }

    #[test]
    fn main_bound_examples() {
        let r = verify_main_bound(&seq(&[1]), 4096).unwrap();
        assert_eq!((r.n, r.l2_squared.clone()), (1, 2.into()));
        assert!(r.enclosure.contains(2.0) && r.passed());
        assert!((r.bound_2sqrt_n - 2.0).abs() < 1e-15);

        let r = verify_main_bound(&seq(&[1, 2]), 1 << 14).unwrap();
        assert_eq!((r.n, r.l2_squared.clone()), (2, 4.into()));
        assert!(r.enclosure.contains(SUP_ONE_TWO) && r.passed());
        assert!(r.slack > 0.0);

        let r = verify_main_bound(&seq(&[1, 1]), 1 << 14).unwrap();
        assert_eq!(r.l2_squared, 6.into());
        assert!(r.enclosure.contains(4.0) && r.passed());

        assert!(matches!(
            verify_main_bound(&ExponentSequence::empty(), 64),
            Err(Error::DegenerateProduct)
        ));
    }

    #[test]
    fn or_examples() {
        let p = IntPolynomial::expand_product(&seq(&[1]));
        let r = verify_or_inequality(&p, 4096).unwrap();
        assert!(r.upper_ok && r.hypothesis_guaranteed);
        assert!((r.rms_sq - 2.0).abs() < 1e-12);

        let p = IntPolynomial::expand_product(&seq(&[1, 2]));
        let r = verify_or_inequality(&p, 1 << 14).unwrap();
        assert!(r.upper_ok && r.lower_slack > 0.0);
        assert!((SUP_ONE_TWO * SUP_ONE_TWO - 256.0 / 27.0).abs() < 1e-12);

        let p = IntPolynomial::expand_product(&seq(&[1, 1]));
        let r = verify_or_inequality(&p, 1 << 14).unwrap();
        assert!(r.upper_ok && r.enclosure.contains(4.0));
    }

    #[test]
    fn or_flags_non_products() {
        // 3 + z: sup 4, 2 l2^2 = 20 > 16; its zero at -3 is off the circle
        let r = verify_or_inequality(&IntPolynomial::from_i64s(&[3, 1]), 4096).unwrap();
        assert!(!r.hypothesis_guaranteed && !r.upper_ok && r.passed());
    }

    #[test]
    fn small_batches() {
        let out = batch_verify(&Family::Exhaustive { n_max: 1, s_max: 5 }, 4096).unwrap();
        assert_eq!(out.summary.count, 5);
        assert_eq!(out.summary.distinct_primitive, 1);
        assert!(out.summary.failures.is_empty());
        for r in &out.reports {
            assert!(r.enclosure.contains(2.0));
        }

        let fam = Family::Random { count: 20, n: 4, s_max: 9, seed: 3 };
        assert_eq!(fam.members(), fam.members());
        let out = batch_verify(&fam, 1024).unwrap();
        assert_eq!(out.reports.len(), 20);
        assert!(out.summary.failures.is_empty());
    }

    #[test]
    fn report_json_round_trip() {
        let r = verify_main_bound(&seq(&[1, 3]), 256).unwrap();
        let js = serde_json::to_string(&r).unwrap();
        assert!(js.contains(r#""l2_squared":"4""#));
        let back: BoundReport = serde_json::from_str(&js).unwrap();
        assert_eq!(back, r);
    }
}
