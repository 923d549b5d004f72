//! Truncated evaluation of convergent infinite products `prod_{g>=0} t(g)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stopping rule for infinite products.
///
/// A product stops at the first index `n` with `|t(n) - 1| < tol`; that
/// factor is still multiplied in. `max_terms` caps the work.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductTruncation {
    pub tol: f64,
    pub max_terms: usize,
}

impl ProductTruncation {
    pub fn new(tol: f64, max_terms: usize) -> Result<Self> {
        let t = ProductTruncation { tol, max_terms };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::param(
                "tol",
                format!("must be > 0, got {}", self.tol),
            ));
        }
        if self.max_terms == 0 {
            return Err(Error::param("max_terms", "must be at least 1"));
        }
        Ok(())
    }
}

impl Default for ProductTruncation {
    fn default() -> Self {
        ProductTruncation {
            tol: 1e-14,
            max_terms: 10_000,
        }
    }
}

/// Value of a truncated product with its bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedProduct<T> {
    pub value: T,
    /// Number of factors multiplied in.
    pub terms_used: usize,
    /// False when `max_terms` was hit before the tolerance.
    pub converged: bool,
}

/// Scalar types a product can be formed over.
pub trait Factor: Copy + std::ops::MulAssign {
    fn one() -> Self;
    fn distance_to_one(&self) -> f64;
}

impl Factor for f64 {
    fn one() -> Self {
        1.0
    }
    fn distance_to_one(&self) -> f64 {
        (self - 1.0).abs()
    }
}

impl Factor for Complex64 {
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn distance_to_one(&self) -> f64 {
        (self - Complex64::new(1.0, 0.0)).norm()
    }
}

/// Multiplies `term(0), term(1), ...` up to and including the first factor
/// within `trunc.tol` of one.
pub fn truncated_product<T, F>(mut term: F, trunc: &ProductTruncation) -> TruncatedProduct<T>
where
    T: Factor,
    F: FnMut(usize) -> T,
{
    let mut value = T::one();
    for g in 0..trunc.max_terms {
        let t = term(g);
        value *= t;
        if t.distance_to_one() < trunc.tol {
            return TruncatedProduct {
                value,
                terms_used: g + 1,
                converged: true,
            };
        }
    }
    TruncatedProduct {
        value,
        terms_used: trunc.max_terms,
        converged: false,
    }
}
