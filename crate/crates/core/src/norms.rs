//! Exact coefficient norms and certified enclosures of the maximum modulus
//! `max_{|z|=1} |p(z)|`.
//!
//! A grid of `M` equally spaced angles is evaluated with an FFT. Writing
//! `g(t) = p(e^{it})`, the derivative obeys `|g'(t)| <= L = sum k |a_k|`, and
//! every angle is within `pi / M` of a grid point, so
//! `grid max <= sup|g| <= grid max + pi L / M`. Both ends are widened by a
//! floating evaluation error bound proportional to `sum |a_k|`.
//!
//! [`refine_enclosure`] tightens an enclosure by Lipschitz branch and bound:
//! cells whose upper bound falls below the best value seen are discarded,
//! survivors are bisected. Cell bounds use the second order estimate
//! `|g(c)| + |g'(c)| w + L2 w^2 / 2` with `L2 = sum k^2 |a_k|`.

use std::f64::consts::{PI, TAU};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polyring::IntPolynomial;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoefficientNorms {
    #[serde(with = "crate::serde_big")]
    pub l1: BigInt,
    #[serde(with = "crate::serde_big")]
    pub l2_squared: BigInt,
    #[serde(with = "crate::serde_big")]
    pub linf: BigInt,
    pub nonzero_count: usize,
}

pub fn coeff_norms(p: &IntPolynomial) -> CoefficientNorms {
    let mut norms = CoefficientNorms {
        l1: BigInt::zero(),
        l2_squared: BigInt::zero(),
        linf: BigInt::zero(),
        nonzero_count: 0,
    };
    for c in p.coeffs().iter().filter(|c| !c.is_zero()) {
        let a = c.abs();
        norms.l2_squared += &a * &a;
        if a > norms.linf {
            norms.linf = a.clone();
        }
        norms.l1 += a;
        norms.nonzero_count += 1;
    }
    norms
}

/// Certified interval for the maximum modulus on the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupNormEnclosure {
    pub lower: f64,
    pub upper: f64,
    /// Angle in `[0, 2 pi)` where `lower` was attained.
    pub argmax_angle: f64,
    /// Grid resolution; after refinement the effective resolution of the finest cells.
    pub grid_size: u64,
    #[serde(rename = "lipschitz")]
    pub lipschitz_bound: f64,
}

impl SupNormEnclosure {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }

    pub fn overlaps(&self, other: &Self) -> bool {
        self.lower <= other.upper && other.lower <= self.upper
    }
}

/// `max(2^12, 4 (N + 1))`.
pub fn default_grid(p: &IntPolynomial) -> usize {
    let n = p.degree().unwrap_or(0);
    (1usize << 12).max(4 * (n + 1))
}

fn round_up(x: f64) -> f64 {
    x * (1.0 + 4.0 * f64::EPSILON)
}

fn big_to_f64(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// `L = sum k |a_k|`, bounding `|d/dt p(e^{it})|`, rounded upward.
pub fn lipschitz_bound(p: &IntPolynomial) -> f64 {
    let exact: BigInt = p
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| c.abs() * k)
        .sum();
    round_up(big_to_f64(&exact))
}

/// `L2 = sum k^2 |a_k|`, bounding the second derivative, rounded upward.
pub fn curvature_bound(p: &IntPolynomial) -> f64 {
    let exact: BigInt = p
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| c.abs() * k * k)
        .sum();
    round_up(big_to_f64(&exact))
}

/// Evaluation error allowance for FFT grid values: `l1 * eps * (5 log2 M + 10)`.
///
/// Covers rounding of the coefficients to `f64` (relevant once some `|a_k|`
/// exceeds `2^53`) and the accumulated FFT rounding.
pub fn grid_eval_error(p: &IntPolynomial, m: usize) -> f64 {
    let l1 = round_up(big_to_f64(&p.l1()));
    let log_m = (m.max(2) as f64).log2().ceil();
    l1 * f64::EPSILON * (5.0 * log_m + 10.0)
}

/// Error allowance for direct Horner evaluation: `l1 * eps * (4 (N + 1) + 10)`.
pub fn direct_eval_error(p: &IntPolynomial) -> f64 {
    let l1 = round_up(big_to_f64(&p.l1()));
    let n = p.degree().unwrap_or(0) as f64;
    l1 * f64::EPSILON * (4.0 * (n + 1.0) + 10.0)
}

/// Values `sum_k w_k e^{2 pi i k m / M}` for `m = 0..M`, folding indices mod `M`
/// exactly before converting to floating point.
fn grid_transform(weights: impl Iterator<Item = BigInt>, m: usize) -> Vec<Complex64> {
    let mut folded = vec![BigInt::zero(); m];
    for (k, w) in weights.enumerate() {
        if !w.is_zero() {
            folded[k % m] += w;
        }
    }
    let mut buf: Vec<Complex64> = folded
        .iter()
        .map(|c| Complex64::new(big_to_f64(c), 0.0))
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    // inverse transform uses e^{+2 pi i k m / M}, matching p(e^{it})
    planner.plan_fft_inverse(m).process(&mut buf);
    buf
}

/// `p(e^{2 pi i m / M})` for every grid index.
pub fn grid_values(p: &IntPolynomial, m: usize) -> Result<Vec<Complex64>> {
    if m < 1 {
        return Err(Error::InvalidGrid(m));
    }
    Ok(grid_transform(p.coeffs().iter().cloned(), m))
}

/// `(1/M) sum_m |p(e^{2 pi i m / M})|^2`; equals `sum |a_k|^2` once `M > deg p`.
pub fn mean_square_on_grid(p: &IntPolynomial, m: usize) -> Result<f64> {
    let values = grid_values(p, m)?;
    Ok(values.iter().map(|v| v.norm_sqr()).sum::<f64>() / m as f64)
}

/// Evaluates `g(t) = p(e^{it})` and `g'(t) = sum i k a_k e^{ikt}` by Horner.
pub fn eval_with_derivative(coeffs: &[f64], t: f64) -> (Complex64, Complex64) {
    let z = Complex64::from_polar(1.0, t);
    let mut value = Complex64::zero();
    let mut deriv = Complex64::zero();
    for &a in coeffs.iter().rev() {
        deriv = deriv * z + value;
        value = value * z + a;
    }
    // d/dt p(e^{it}) = i z p'(z)
    (value, Complex64::i() * z * deriv)
}

fn argmax_smallest_angle(values: &[f64], angles: impl Fn(usize) -> f64) -> (usize, f64) {
    let mut best = 0;
    let mut best_angle = angles(0);
    for i in 1..values.len() {
        let a = angles(i);
        if values[i] > values[best] || (values[i] == values[best] && a < best_angle) {
            best = i;
            best_angle = a;
        }
    }
    (best, best_angle)
}

/// Grid maximum plus the Lipschitz certificate, both widened by
/// [`grid_eval_error`].
pub fn sup_norm_enclosure(p: &IntPolynomial, m: usize) -> Result<SupNormEnclosure> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let values = grid_values(p, m)?;
    let moduli: Vec<f64> = values.iter().map(|v| v.norm()).collect();
    let (_, angle) = argmax_smallest_angle(&moduli, |i| TAU * i as f64 / m as f64);
    let grid_max = moduli.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let eps = grid_eval_error(p, m);
    let lipschitz = lipschitz_bound(p);
    Ok(SupNormEnclosure {
        lower: (grid_max - eps).max(0.0),
        upper: round_up(grid_max + PI * lipschitz / m as f64 + eps),
        argmax_angle: angle,
        grid_size: m as u64,
        lipschitz_bound: lipschitz,
    })
}

const REFINE_MAX_ROUNDS: usize = 60;
const REFINE_MAX_CELLS: usize = 1 << 22;

struct Cell {
    center: f64,
    modulus: f64,
    slope: f64,
}

/// Bisects surviving grid cells until `upper - lower <= target_width`.
///
/// The result is never wider than `e`, and its `lower` never moves down. When
/// the round or cell cap is reached first, [`Error::RefineCapExhausted`]
/// carries the tightest enclosure found.
pub fn refine_enclosure(
    p: &IntPolynomial,
    e: &SupNormEnclosure,
    target_width: f64,
) -> Result<SupNormEnclosure> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let mut out = *e;
    if out.width() <= target_width {
        return Ok(out);
    }
    let m = usize::try_from(e.grid_size)
        .ok()
        .filter(|&m| m >= 1)
        .ok_or(Error::InvalidGrid(0))?;

    let values = grid_values(p, m)?;
    let derivs = grid_transform(
        p.coeffs().iter().enumerate().map(|(k, c)| c * k),
        m,
    );
    let mut cells: Vec<Cell> = values
        .iter()
        .zip(&derivs)
        .enumerate()
        .map(|(i, (v, d))| Cell {
            center: TAU * i as f64 / m as f64,
            modulus: v.norm(),
            slope: d.norm(),
        })
        .collect();

    let coeffs_f64: Vec<f64> = p.coeffs().iter().map(big_to_f64).collect();
    let lipschitz = e.lipschitz_bound;
    let curvature = curvature_bound(p);
    let eps = grid_eval_error(p, m).max(direct_eval_error(p));
    let slope_eps = eps * p.degree().unwrap_or(0) as f64;
    let mut half_width = PI / m as f64;
    let mut resolution = e.grid_size;

    for round in 0..=REFINE_MAX_ROUNDS {
        let bounds: Vec<f64> = cells
            .iter()
            .map(|c| {
                let first = c.modulus + lipschitz * half_width;
                let second = c.modulus
                    + (c.slope + slope_eps) * half_width
                    + 0.5 * curvature * half_width * half_width;
                round_up(first.min(second) + eps)
            })
            .collect();

        let moduli: Vec<f64> = cells.iter().map(|c| c.modulus).collect();
        let (best, angle) = argmax_smallest_angle(&moduli, |i| cells[i].center.rem_euclid(TAU));
        let candidate_lower = (moduli[best] - eps).max(0.0);
        if candidate_lower > out.lower {
            out.lower = candidate_lower;
            out.argmax_angle = angle;
        }
        let cell_upper = bounds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if cell_upper < out.upper {
            out.upper = cell_upper.max(out.lower);
        }
        out.grid_size = out.grid_size.max(resolution);
        if out.width() <= target_width {
            return Ok(out);
        }

        let survivors: Vec<f64> = cells
            .iter()
            .zip(&bounds)
            .filter(|(_, &b)| b >= out.lower)
            .map(|(c, _)| c.center)
            .collect();
        if round == REFINE_MAX_ROUNDS || survivors.len() * 2 > REFINE_MAX_CELLS {
            return Err(Error::RefineCapExhausted {
                iterations: round,
                width: out.width(),
                best: Box::new(out),
            });
        }

        half_width *= 0.5;
        resolution = resolution.saturating_mul(2);
        cells = survivors
            .par_iter()
            .flat_map_iter(|&c| [c - half_width, c + half_width])
            .map(|center| {
                let (v, d) = eval_with_derivative(&coeffs_f64, center);
                Cell {
                    center,
                    modulus: v.norm(),
                    slope: d.norm(),
                }
            })
            .collect();
    }
    unreachable!("refinement loop returns on its last round")
}

/// Enclosure at `m`, refined to `target_width`. Cap exhaustion yields the
/// tightest enclosure reached.
pub fn tight_enclosure(p: &IntPolynomial, m: usize, target_width: f64) -> Result<SupNormEnclosure> {
    let coarse = sup_norm_enclosure(p, m)?;
    match refine_enclosure(p, &coarse, target_width) {
        Ok(e) => Ok(e),
        Err(Error::RefineCapExhausted { best, .. }) => Ok(*best),
        Err(err) => Err(err),
    }
}
