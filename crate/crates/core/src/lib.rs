//! Exact arithmetic and certified numerics for pure power products
//! `P(z) = (1 - z^{s_1}) ... (1 - z^{s_n})`.
//!
//! The crate expands products over arbitrary-precision integers, computes
//! exact coefficient norms and moments, encloses the maximum modulus on the
//! unit circle in a certified interval, reconstructs integer multisets from
//! their power sums, and searches exponent sequences for small sup-norms.
//!
//! Module map:
//!
//! * [`polyring`]: exponent sequences, integer polynomials, product expansion
//!   and exact division by `1 - z`.
//! * [`norms`]: coefficient norms, discrete Parseval, sup-norm enclosures.
//! * [`newton`]: power sums, elementary symmetric functions, multiset
//!   reconstruction.
//! * [`moments`]: power and factorial moments, signed splits, PTE witnesses,
//!   the `l2` coefficient bound.
//! * [`theorems`]: end-to-end checks of the lower bounds on products.
//! * [`search`]: exhaustive and heuristic minimisation of the sup-norm.
//! * [`cli`]: the `esprod` command-line front end.

pub mod cli;
pub mod error;
pub mod moments;
pub mod newton;
pub mod norms;
pub mod polyring;
pub mod search;
pub mod serde_big;
pub mod theorems;

pub use error::{Error, Result};
pub use polyring::{ExponentSequence, IntPolynomial};
