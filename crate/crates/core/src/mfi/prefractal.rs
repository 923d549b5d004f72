//! Pre-fractal point sets.
//!
//! Generation `n` consists of the `L^n` points
//! `lambda = lambda_star + (1 - kappa) sum_i s_i kappa^(i-1)`, one per
//! signature `s = (s_1, ..., s_n)` of shifted levels, weighted by
//! `Theta = prod_i psi(s_i)`. Enumeration is lexicographic in the branch
//! indices with `s_1` most significant.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::FractalSpec;
use crate::error::{Error, Result};

/// Default cap on materialized point sets (`2^24`).
pub const DEFAULT_CAP: u64 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedPoint {
    pub lambda: f64,
    pub theta: Complex64,
}

/// One generation of the pre-fractal. Cheap to hold; points are produced on demand.
#[derive(Debug, Clone, Copy)]
pub struct WeightedPointSet<'a> {
    spec: &'a FractalSpec,
    generation: usize,
}

pub fn prefractal(spec: &FractalSpec, generation: usize) -> WeightedPointSet<'_> {
    WeightedPointSet { spec, generation }
}

impl<'a> WeightedPointSet<'a> {
    pub fn generation(&self) -> usize {
        self.generation
    }

    /// `L^n`, saturating at `u128::MAX`.
    pub fn len(&self) -> u128 {
        (self.spec.branches() as u128)
            .checked_pow(self.generation as u32)
            .unwrap_or(u128::MAX)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> PrefractalIter<'a> {
        PrefractalIter::new(self.spec, self.generation)
    }

    /// Collects the points, refusing sets larger than `cap`.
    pub fn materialize(&self, cap: u64) -> Result<Vec<WeightedPoint>> {
        let count = self.len();
        if count > u128::from(cap) {
            return Err(Error::CapExceeded { count, cap });
        }
        Ok(self.iter().collect())
    }

    /// `L^{-n} sum_s Theta_s`, which is one for a normalized spec.
    pub fn normalization(&self) -> Complex64 {
        let inv = (self.spec.branches() as f64).powi(-(self.generation as i32));
        self.iter().map(|p| p.theta).sum::<Complex64>() * inv
    }
}

/// Odometer over signatures carrying prefix sums of position and weight.
pub struct PrefractalIter<'a> {
    spec: &'a FractalSpec,
    digits: Vec<usize>,
    /// `lambda[i]`, `theta[i]`: position and weight after the first `i` digits.
    lambda: Vec<f64>,
    theta: Vec<Complex64>,
    scale: Vec<f64>,
    done: bool,
}

impl<'a> PrefractalIter<'a> {
    fn new(spec: &'a FractalSpec, n: usize) -> Self {
        let kappa = spec.kappa();
        let scale = (0..n)
            .map(|i| (1.0 - kappa) * kappa.powi(i as i32))
            .collect();
        let mut it = PrefractalIter {
            spec,
            digits: vec![0; n],
            lambda: vec![spec.lambda_star(); n + 1],
            theta: vec![Complex64::new(1.0, 0.0); n + 1],
            scale,
            done: false,
        };
        it.refresh_from(0);
        it
    }

    fn refresh_from(&mut self, pos: usize) {
        let shifted = self.spec.shifted_levels();
        let weights = self.spec.weights();
        for i in pos..self.digits.len() {
            let d = self.digits[i];
            self.lambda[i + 1] = self.lambda[i] + self.scale[i] * shifted[d];
            self.theta[i + 1] = self.theta[i] * weights[d];
        }
    }
}

impl Iterator for PrefractalIter<'_> {
    type Item = WeightedPoint;

    fn next(&mut self) -> Option<WeightedPoint> {
        if self.done {
            return None;
        }
        let n = self.digits.len();
        let out = WeightedPoint {
            lambda: self.lambda[n],
            theta: self.theta[n],
        };
        // advance the odometer
        let l = self.spec.branches();
        let mut pos = n;
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            self.digits[pos] += 1;
            if self.digits[pos] < l {
                self.refresh_from(pos);
                break;
            }
            self.digits[pos] = 0;
        }
        Some(out)
    }
}
