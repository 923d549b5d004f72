//! Points of the signal space.
//!
//! A [`State`] is a short real vector stored inline so that orbits can be
//! iterated without allocating. Two-dimensional states double as complex
//! amplitudes (`x[0] + i x[1]`), which is how the Ikeda map reads them.

use std::fmt;
use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported signal-space dimension.
pub const MAX_DIM: usize = 4;

#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct State {
    dim: usize,
    v: [f64; MAX_DIM],
}

impl State {
    pub fn new(components: &[f64]) -> Result<Self> {
        if components.is_empty() || components.len() > MAX_DIM {
            return Err(Error::param(
                "state",
                format!(
                    "dimension must be in 1..={MAX_DIM}, got {}",
                    components.len()
                ),
            ));
        }
        let mut v = [0.0; MAX_DIM];
        v[..components.len()].copy_from_slice(components);
        Ok(State {
            dim: components.len(),
            v,
        })
    }

    /// # Panics
    /// If `dim` is zero or larger than [`MAX_DIM`].
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "state dimension {dim}");
        State {
            dim,
            v: [0.0; MAX_DIM],
        }
    }

    pub fn scalar(x: f64) -> Self {
        let mut s = State::zeros(1);
        s.v[0] = x;
        s
    }

    pub fn from_complex(z: Complex64) -> Self {
        let mut s = State::zeros(2);
        s.v[0] = z.re;
        s.v[1] = z.im;
        s
    }

    /// Reads a two-dimensional state as `re + i im`.
    pub fn to_complex(&self) -> Complex64 {
        debug_assert_eq!(self.dim, 2);
        Complex64::new(self.v[0], self.v[1])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.v[..self.dim]
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.v[..self.dim]
    }

    /// Euclidean inner product. Components past the shorter dimension are ignored.
    #[inline]
    pub fn dot(&self, other: &State) -> f64 {
        let n = self.dim.min(other.dim);
        let mut acc = 0.0;
        for k in 0..n {
            acc += self.v[k] * other.v[k];
        }
        acc
    }

    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|x| x.is_finite())
    }
}

impl Index<usize> for State {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        &self.as_slice()[k]
    }
}

impl Add for State {
    type Output = State;
    #[inline]
    fn add(mut self, rhs: State) -> State {
        self += rhs;
        self
    }
}

impl AddAssign for State {
    #[inline]
    fn add_assign(&mut self, rhs: State) {
        debug_assert_eq!(self.dim, rhs.dim);
        for k in 0..MAX_DIM {
            self.v[k] += rhs.v[k];
        }
    }
}

impl Sub for State {
    type Output = State;
    #[inline]
    fn sub(mut self, rhs: State) -> State {
        debug_assert_eq!(self.dim, rhs.dim);
        for k in 0..MAX_DIM {
            self.v[k] -= rhs.v[k];
        }
        self
    }
}

impl Mul<f64> for State {
    type Output = State;
    #[inline]
    fn mul(mut self, rhs: f64) -> State {
        for k in 0..MAX_DIM {
            self.v[k] *= rhs;
        }
        self
    }
}

impl Neg for State {
    type Output = State;
    fn neg(self) -> State {
        self * -1.0
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}

impl TryFrom<Vec<f64>> for State {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        State::new(&v)
    }
}

impl From<State> for Vec<f64> {
    fn from(s: State) -> Vec<f64> {
        s.as_slice().to_vec()
    }
}
