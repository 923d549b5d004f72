//! Stationary laws of the solved linear models.
//!
//! For `X' = xi + A + kappa X` the characteristic function satisfies the
//! dilatation equation `Psi(U) = factor(U) Psi(kappa U)` with `Psi(0) = 1`,
//! so `Psi = prod_g factor(kappa^g U)`. Three noise models are solved:
//! none ([`LinearDet`]), Gaussian ([`LinearGauss`]), and Gaussian plus
//! Kubo-Andersen ([`GaussKa`]), whose product has no closed form and is
//! truncated numerically.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{check_kappa, KuboAndersen};
use crate::numkit::{truncated_product, Grid, GridFunction, ProductTruncation, TruncatedProduct};
use crate::state::State;

/// Boundary magnitude above which a density inversion is flagged.
pub const DECAY_THRESHOLD: f64 = 1e-8;

/// Characteristic function sampled on a frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharFnResult {
    pub grid: Grid,
    pub values: Vec<Complex64>,
    /// Product factors used per point; zero for closed forms.
    pub terms_used: Vec<usize>,
    /// Points where the product hit `max_terms`.
    pub unconverged: usize,
    /// The law has no density (delta or singular fractal measure).
    pub singular: bool,
}

impl CharFnResult {
    pub fn to_grid_function(&self) -> GridFunction<Complex64> {
        GridFunction {
            grid: self.grid,
            values: self.values.clone(),
        }
    }

    pub fn max_terms_used(&self) -> usize {
        self.terms_used.iter().copied().max().unwrap_or(0)
    }
}

/// A stationary law given through its dilatation equation.
pub trait StationaryLaw: Sync {
    fn kappa(&self) -> f64;
    fn dim(&self) -> usize;
    /// `Psi(U)` with truncation bookkeeping.
    fn charfn_at(&self, u: &State) -> TruncatedProduct<Complex64>;
    /// Multiplier in `Psi(U) = factor(U) Psi(kappa U)`.
    fn factor(&self, u: &State) -> Complex64;
    fn is_singular(&self) -> bool;

    /// Evaluates `Psi` on every grid point (in parallel, assembled in order).
    fn charfn(&self, grid: &Grid) -> Result<CharFnResult> {
        grid.validate()?;
        if grid.dim() != self.dim() {
            return Err(Error::Contract(format!(
                "frequency grid is {}-dimensional but the law lives in dimension {}",
                grid.dim(),
                self.dim()
            )));
        }
        let evals: Vec<_> = (0..grid.len())
            .into_par_iter()
            .map(|i| self.charfn_at(&grid.point(i)))
            .collect();
        Ok(CharFnResult {
            grid: *grid,
            values: evals.iter().map(|e| e.value).collect(),
            terms_used: evals.iter().map(|e| e.terms_used).collect(),
            unconverged: evals.iter().filter(|e| !e.converged).count(),
            singular: self.is_singular(),
        })
    }

    /// `max |Psi(U) - factor(U) Psi(kappa U)|` over the grid, with
    /// `Psi(kappa U)` evaluated afresh rather than interpolated.
    fn functional_equation_residual(&self, grid: &Grid) -> f64 {
        let kappa = self.kappa();
        (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let u = grid.point(i);
                let lhs = self.charfn_at(&u).value;
                let rhs = self.factor(&u) * self.charfn_at(&(u * kappa)).value;
                (lhs - rhs).norm()
            })
            .reduce(|| 0.0, f64::max)
    }
}

#[inline]
fn phase(angle: f64) -> Complex64 {
    let (s, c) = angle.sin_cos();
    Complex64::new(c, s)
}

fn closed_form(value: Complex64) -> TruncatedProduct<Complex64> {
    TruncatedProduct {
        value,
        terms_used: 0,
        converged: true,
    }
}

/// Noise-free `F(X) = A + kappa X`: the law is a point mass at `A/(1 - kappa)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearDet {
    a: State,
    kappa: f64,
}

impl LinearDet {
    pub fn new(a: State, kappa: f64) -> Result<Self> {
        check_kappa(kappa)?;
        Ok(LinearDet { a, kappa })
    }

    pub fn fixed_point(&self) -> State {
        self.a * (1.0 / (1.0 - self.kappa))
    }
}

impl StationaryLaw for LinearDet {
    fn kappa(&self) -> f64 {
        self.kappa
    }
    fn dim(&self) -> usize {
        self.a.dim()
    }
    fn charfn_at(&self, u: &State) -> TruncatedProduct<Complex64> {
        closed_form(phase(-self.a.dot(u) / (1.0 - self.kappa)))
    }
    fn factor(&self, u: &State) -> Complex64 {
        phase(-self.a.dot(u))
    }
    fn is_singular(&self) -> bool {
        true
    }
}

/// `F(X) = A + kappa X` with Gaussian noise of width `R`: the law is the
/// Gaussian of width `R/(1 - kappa^2)` centred at `A/(1 - kappa)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearGauss {
    a: State,
    kappa: f64,
    r: f64,
}

impl LinearGauss {
    pub fn new(a: State, kappa: f64, r: f64) -> Result<Self> {
        check_kappa(kappa)?;
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::param("r", format!("must be > 0, got {r}")));
        }
        Ok(LinearGauss { a, kappa, r })
    }

    pub fn mean(&self) -> State {
        self.a * (1.0 / (1.0 - self.kappa))
    }

    /// Width parameter `R/(1 - kappa^2)` of `(pi W)^{-d/2} exp(-|X - mean|^2 / W)`.
    pub fn width(&self) -> f64 {
        self.r / (1.0 - self.kappa * self.kappa)
    }

    pub fn component_variance(&self) -> f64 {
        0.5 * self.width()
    }

    pub fn density_at(&self, x: &State) -> f64 {
        let w = self.width();
        let d = (*x - self.mean()).norm_sq();
        (PI * w).powf(-0.5 * self.a.dim() as f64) * (-d / w).exp()
    }
}

impl StationaryLaw for LinearGauss {
    fn kappa(&self) -> f64 {
        self.kappa
    }
    fn dim(&self) -> usize {
        self.a.dim()
    }
    fn charfn_at(&self, u: &State) -> TruncatedProduct<Complex64> {
        let k = self.kappa;
        let mag = (-0.25 * self.r * u.norm_sq() / (1.0 - k * k)).exp();
        closed_form(phase(-self.a.dot(u) / (1.0 - k)) * mag)
    }
    fn factor(&self, u: &State) -> Complex64 {
        phase(-self.a.dot(u)) * (-0.25 * self.r * u.norm_sq()).exp()
    }
    fn is_singular(&self) -> bool {
        false
    }
}

/// `F(X) = kappa X` with Gaussian (width `R >= 0`) plus Kubo-Andersen noise.
///
/// `Psi(U) = exp(-R|U|^2 / (4(1 - kappa^2))) prod_g sum_k p_k exp(-i kappa^g <X_k, U>)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussKa {
    kappa: f64,
    r: f64,
    ka: KuboAndersen,
    trunc: ProductTruncation,
}

impl GaussKa {
    pub fn new(kappa: f64, r: f64, ka: KuboAndersen, trunc: ProductTruncation) -> Result<Self> {
        check_kappa(kappa)?;
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::param("r", format!("must be >= 0, got {r}")));
        }
        trunc.validate()?;
        Ok(GaussKa {
            kappa,
            r,
            ka,
            trunc,
        })
    }

    pub fn kubo_andersen(&self) -> &KuboAndersen {
        &self.ka
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// The Kubo-Andersen product alone.
    pub fn fractal_factor(&self, u: &State) -> TruncatedProduct<Complex64> {
        let kappa = self.kappa;
        truncated_product(
            |g| self.ka.charfn(&(*u * kappa.powi(g as i32))),
            &self.trunc,
        )
    }
}

impl StationaryLaw for GaussKa {
    fn kappa(&self) -> f64 {
        self.kappa
    }
    fn dim(&self) -> usize {
        self.ka.dim()
    }
    fn charfn_at(&self, u: &State) -> TruncatedProduct<Complex64> {
        let k = self.kappa;
        let gauss = (-0.25 * self.r * u.norm_sq() / (1.0 - k * k)).exp();
        let mut p = self.fractal_factor(u);
        p.value *= gauss;
        p
    }
    fn factor(&self, u: &State) -> Complex64 {
        self.ka.charfn(u) * (-0.25 * self.r * u.norm_sq()).exp()
    }
    fn is_singular(&self) -> bool {
        self.r == 0.0
    }
}

pub fn charfn_linear_det(a: State, kappa: f64, grid: &Grid) -> Result<CharFnResult> {
    LinearDet::new(a, kappa)?.charfn(grid)
}

pub fn charfn_linear_gauss(a: State, kappa: f64, r: f64, grid: &Grid) -> Result<CharFnResult> {
    LinearGauss::new(a, kappa, r)?.charfn(grid)
}

pub fn charfn_gauss_ka(
    kappa: f64,
    r: f64,
    ka: KuboAndersen,
    grid: &Grid,
    trunc: ProductTruncation,
) -> Result<CharFnResult> {
    GaussKa::new(kappa, r, ka, trunc)?.charfn(grid)
}

/// Density recovered from a sampled characteristic function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub density: GridFunction<f64>,
    /// Largest `|Psi|` on the boundary of the frequency grid.
    pub boundary_max: f64,
    /// Set when `boundary_max` exceeds [`DECAY_THRESHOLD`]; the estimate
    /// then carries truncation ringing.
    pub decay_warning: bool,
}

/// Inverse Fourier transform `(2 pi)^{-d} sum_j w_j Psi(U_j) exp(i <x, U_j>)`
/// with trapezoid weights `w_j`, evaluated at every `xgrid` point.
pub fn density_from_charfn(cf: &CharFnResult, xgrid: &Grid) -> Result<DensityEstimate> {
    if cf.singular {
        return Err(Error::SingularLaw);
    }
    if !cf.grid.is_symmetric() {
        return Err(Error::Grid(
            "density inversion needs a frequency grid symmetric about zero".into(),
        ));
    }
    if cf.grid.dim() != xgrid.dim() {
        return Err(Error::Contract(format!(
            "frequency grid is {}-dimensional, space grid {}-dimensional",
            cf.grid.dim(),
            xgrid.dim()
        )));
    }
    xgrid.validate()?;
    let boundary_max = cf
        .grid
        .boundary_indices()
        .into_iter()
        .map(|i| cf.values[i].norm())
        .fold(0.0, f64::max);
    let norm = (2.0 * PI).powi(cf.grid.dim() as i32);
    let weighted: Vec<(State, Complex64)> = (0..cf.grid.len())
        .map(|j| (cf.grid.point(j), cf.values[j] * cf.grid.trapezoid_weight(j)))
        .collect();
    let values: Vec<f64> = (0..xgrid.len())
        .into_par_iter()
        .map(|i| {
            let x = xgrid.point(i);
            let s: f64 = weighted
                .iter()
                .map(|(u, w)| {
                    let (sn, cs) = x.dot(u).sin_cos();
                    w.re * cs - w.im * sn
                })
                .sum();
            s / norm
        })
        .collect();
    Ok(DensityEstimate {
        density: GridFunction::new(*xgrid, values)?,
        boundary_max,
        decay_warning: boundary_max > DECAY_THRESHOLD,
    })
}

/// One of the three solved models, for callers choosing at run time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SolvedModel {
    Det(LinearDet),
    Gauss(LinearGauss),
    GaussKa(GaussKa),
}

impl SolvedModel {
    fn inner(&self) -> &dyn StationaryLaw {
        match self {
            SolvedModel::Det(m) => m,
            SolvedModel::Gauss(m) => m,
            SolvedModel::GaussKa(m) => m,
        }
    }
}

impl StationaryLaw for SolvedModel {
    fn kappa(&self) -> f64 {
        self.inner().kappa()
    }
    fn dim(&self) -> usize {
        self.inner().dim()
    }
    fn charfn_at(&self, u: &State) -> TruncatedProduct<Complex64> {
        self.inner().charfn_at(u)
    }
    fn factor(&self, u: &State) -> Complex64 {
        self.inner().factor(u)
    }
    fn is_singular(&self) -> bool {
        self.inner().is_singular()
    }
}
