//! The noisy Ikeda map `X' = xi + 1 + kappa X exp(i(lambda |X|^2 + theta0))`
//! in the random phase approximation.
//!
//! For large `lambda` the phases decorrelate and `X - 1` becomes
//! `sum_{k>=1} kappa^k e^{i Phi_k}` with independent uniform phases. Its
//! law is radially symmetric with characteristic function `Xi(kappa q)`,
//! `Xi(beta) = prod_{k>=0} J0(beta kappa^k)`, which solves
//! `Xi(beta) = J0(beta) Xi(kappa beta)`. Densities come from Hankel
//! inversion; Gaussian noise multiplies the transform by
//! `exp(-W q^2 / 4)`, `W = R / (1 - kappa^2)`.

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::check_kappa;
use crate::numkit::quad::integrate;
use crate::numkit::{
    j0, j1, truncated_product, y0, Grid, Grid1D, Grid2D, GridFunction, ProductTruncation,
    QuadOptions, QuadValue, TruncatedProduct,
};
use num_complex::Complex64;

/// `Xi(beta) = prod_{k>=0} J0(beta kappa^k)`.
pub fn xi(kappa: f64, beta: f64, trunc: &ProductTruncation) -> Result<TruncatedProduct<f64>> {
    check_kappa(kappa)?;
    if !beta.is_finite() {
        return Err(Error::param("beta", format!("must be finite, got {beta}")));
    }
    trunc.validate()?;
    Ok(xi_unchecked(kappa, beta, trunc))
}

fn xi_unchecked(kappa: f64, beta: f64, trunc: &ProductTruncation) -> TruncatedProduct<f64> {
    let mut x = beta;
    truncated_product(
        |_| {
            let t = j0(x);
            x *= kappa;
            t
        },
        trunc,
    )
}

/// `Xi` cached on a grid of `beta` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiFunction {
    pub kappa: f64,
    pub trunc: ProductTruncation,
    pub beta: Grid1D,
    pub values: Vec<f64>,
    /// Grid points where the product hit `max_terms`.
    pub unconverged: usize,
}

impl XiFunction {
    pub fn new(kappa: f64, beta: Grid1D, trunc: ProductTruncation) -> Result<Self> {
        check_kappa(kappa)?;
        beta.validate()?;
        trunc.validate()?;
        let evals: Vec<_> = (0..beta.count)
            .into_par_iter()
            .map(|i| xi_unchecked(kappa, beta.point(i), &trunc))
            .collect();
        Ok(XiFunction {
            kappa,
            trunc,
            beta,
            values: evals.iter().map(|e| e.value).collect(),
            unconverged: evals.iter().filter(|e| !e.converged).count(),
        })
    }

    /// `max |Xi(beta) - J0(beta) Xi(kappa beta)|` over the cached points,
    /// with `Xi(kappa beta)` evaluated afresh.
    pub fn recursion_residual(&self) -> f64 {
        self.beta
            .points()
            .zip(&self.values)
            .map(|(b, v)| {
                (v - j0(b) * xi_unchecked(self.kappa, self.kappa * b, &self.trunc).value).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Controls for the semi-infinite Hankel integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HankelOptions {
    /// Absolute accuracy of the integral and the stopping threshold for the
    /// last doubling increment.
    pub quad_tol: f64,
    /// First upper limit; doubled until the increment drops below `quad_tol`.
    pub initial_limit: f64,
    /// Give up beyond this upper limit.
    pub max_limit: f64,
}

impl Default for HankelOptions {
    fn default() -> Self {
        HankelOptions {
            quad_tol: 1e-8,
            initial_limit: 64.0,
            max_limit: 1_048_576.0,
        }
    }
}

impl HankelOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.quad_tol > 0.0) {
            return Err(Error::param(
                "quad_tol",
                format!("must be > 0, got {}", self.quad_tol),
            ));
        }
        if !(self.initial_limit > 0.0 && self.max_limit >= self.initial_limit) {
            return Err(Error::param(
                "initial_limit",
                "need 0 < initial_limit <= max_limit",
            ));
        }
        Ok(())
    }
}

/// Integrates `g` over `[a, b]` in chunks short enough to hold at most
/// half an oscillation of frequency `freq`.
fn chunked<T: QuadValue>(g: &impl Fn(f64) -> T, a: f64, b: f64, freq: f64, tol: f64) -> Result<T> {
    let width = PI / freq.max(1.0);
    let chunks = ((b - a) / width).ceil().max(1.0) as usize;
    let h = (b - a) / chunks as f64;
    let opts = QuadOptions::default();
    let mut total = T::zero();
    for i in 0..chunks {
        let lo = a + h * i as f64;
        let hi = if i + 1 == chunks { b } else { lo + h };
        total = total + integrate(g, lo, hi, tol / chunks as f64, opts)?;
    }
    Ok(total)
}

/// `int_0^inf g`, doubling the upper limit until the increment over
/// `[B, 2B]` is below `quad_tol`. `freq` bounds the oscillation frequency of `g`.
fn semi_infinite<T: QuadValue>(
    g: impl Fn(f64) -> T,
    freq: f64,
    opts: &HankelOptions,
) -> Result<(T, f64)> {
    let tol = 0.25 * opts.quad_tol;
    let mut b = opts.initial_limit;
    let mut total = chunked(&g, 0.0, b, freq, tol)?;
    loop {
        if 2.0 * b > opts.max_limit {
            let increment = chunked(&g, b, 2.0 * b, freq, tol).map_or(f64::NAN, |v| v.magnitude());
            return Err(Error::HankelCutoff {
                limit: opts.max_limit,
                increment,
            });
        }
        let inc = chunked(&g, b, 2.0 * b, freq, tol)?;
        total = total + inc;
        b *= 2.0;
        if inc.magnitude() < opts.quad_tol {
            return Ok((total, b));
        }
    }
}

/// A radial density on `r = |X - 1|` with its two-dimensional CDF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialDensity {
    pub kappa: f64,
    pub r: Grid1D,
    /// Clipped at zero; see `min_unclipped`.
    pub density: Vec<f64>,
    /// `P(|X - 1| <= r)` from its own Hankel integral, not from the density.
    pub cdf: Vec<f64>,
    /// `int density 2 pi r dr` by trapezoid on the grid.
    pub mass: f64,
    /// Most negative raw value (quadrature ringing), or the smallest value if none is negative.
    pub min_unclipped: f64,
    /// Largest upper integration limit used.
    pub limit_used: f64,
}

impl RadialDensity {
    /// Peak of the clipped density.
    pub fn peak(&self) -> f64 {
        self.density.iter().copied().fold(0.0, f64::max)
    }

    /// CDF at an arbitrary radius by linear interpolation on the grid.
    pub fn cdf_at(&self, r: f64) -> f64 {
        interpolate(&self.r, &self.cdf, r).clamp(0.0, 1.0)
    }
}

/// Linear interpolation on a uniform grid, constant beyond the ends.
fn interpolate(grid: &Grid1D, values: &[f64], x: f64) -> f64 {
    if x <= grid.lo {
        return values[0];
    }
    if x >= grid.hi {
        return values[values.len() - 1];
    }
    let t = (x - grid.lo) / grid.step();
    let i = (t.floor() as usize).min(grid.count - 2);
    let w = t - i as f64;
    values[i] * (1.0 - w) + values[i + 1] * w
}

/// Density and CDF of `|Z|` for a radial law whose transform is `phi(q)`:
/// `p(r) = (2 pi)^{-1} int q J0(q r) phi(q) dq` and
/// `F(r) = r int J1(q r) phi(q) dq`.
fn radial_law(
    phi: impl Fn(f64) -> f64 + Sync,
    base_freq: f64,
    r: &Grid1D,
    opts: &HankelOptions,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let rows: Vec<(f64, f64, f64)> = (0..r.count)
        .into_par_iter()
        .map(|i| {
            let ri = r.point(i);
            // density in the real part, CDF in the imaginary part: one pass over phi
            let g = |q: f64| {
                let v = phi(q);
                Complex64::new(q * j0(q * ri) * v / (2.0 * PI), ri * j1(q * ri) * v)
            };
            let (v, limit) = semi_infinite(g, base_freq + ri, opts)?;
            Ok((v.re, v.im, limit))
        })
        .collect::<Result<_>>()?;
    let density = rows.iter().map(|t| t.0).collect();
    let cdf = rows.iter().map(|t| t.1).collect();
    let limit = rows.iter().map(|t| t.2).fold(0.0, f64::max);
    Ok((density, cdf, limit))
}

fn finish(kappa: f64, r: Grid1D, raw: Vec<f64>, cdf: Vec<f64>, limit_used: f64) -> RadialDensity {
    let min_unclipped = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let density: Vec<f64> = raw.iter().map(|v| v.max(0.0)).collect();
    let h = r.step();
    let n = density.len();
    let mass = (0..n)
        .map(|i| {
            let w = if i == 0 || i == n - 1 { 0.5 * h } else { h };
            w * 2.0 * PI * r.point(i) * density[i]
        })
        .sum();
    RadialDensity {
        kappa,
        r,
        density,
        cdf,
        mass,
        min_unclipped,
        limit_used,
    }
}

fn check_radii(r: &Grid1D) -> Result<()> {
    r.validate()?;
    if r.lo < 0.0 || r.count < 2 {
        return Err(Error::Grid(
            "radial grid needs r >= 0 and at least two points".into(),
        ));
    }
    Ok(())
}

/// `P_ch(r) = (2 pi kappa^2)^{-1} int beta Xi(beta) J0(beta r / kappa) dbeta`,
/// the noise-free density of `|X - 1|`, with its CDF
/// `(r / kappa) int Xi(beta) J1(beta r / kappa) dbeta`.
pub fn p_ch(
    kappa: f64,
    r: &Grid1D,
    trunc: &ProductTruncation,
    opts: &HankelOptions,
) -> Result<RadialDensity> {
    check_kappa(kappa)?;
    check_radii(r)?;
    trunc.validate()?;
    opts.validate()?;
    // integrate in q = beta / kappa, where the transform is Xi(kappa q)
    let phi = |q: f64| xi_unchecked(kappa, kappa * q, trunc).value;
    let q_opts = HankelOptions {
        initial_limit: opts.initial_limit / kappa,
        max_limit: opts.max_limit / kappa,
        ..*opts
    };
    let (raw, cdf, limit) = radial_law(phi, kappa, r, &q_opts)?;
    Ok(finish(kappa, *r, raw, cdf, limit * kappa))
}

/// `W = R / (1 - kappa^2)`: the stationary Gaussian width parameter.
fn noise_width(kappa: f64, r: f64) -> f64 {
    r / (1.0 - kappa * kappa)
}

/// Radial profile of the noisy stationary density around `X = 1`:
/// `p(d) = (2 pi)^{-1} int q J0(q d) Xi(kappa q) e^{-W q^2 / 4} dq`, which is
/// `P_ch` convolved with the stationary Gaussian.
pub fn p_st_radial(
    kappa: f64,
    noise_r: f64,
    d: &Grid1D,
    trunc: &ProductTruncation,
    opts: &HankelOptions,
) -> Result<RadialDensity> {
    check_kappa(kappa)?;
    if !(noise_r > 0.0 && noise_r.is_finite()) {
        return Err(Error::param(
            "r",
            format!("noise intensity must be > 0, got {noise_r}"),
        ));
    }
    check_radii(d)?;
    trunc.validate()?;
    opts.validate()?;
    let w = noise_width(kappa, noise_r);
    let phi = |q: f64| {
        let g = (-0.25 * w * q * q).exp();
        if g == 0.0 {
            0.0
        } else {
            g * xi_unchecked(kappa, kappa * q, trunc).value
        }
    };
    let (raw, cdf, limit) = radial_law(phi, kappa, d, opts)?;
    Ok(finish(kappa, *d, raw, cdf, limit))
}

/// Noisy stationary density on a planar grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarDensity {
    /// Clipped at zero.
    pub density: GridFunction<f64>,
    /// Trapezoid mass over the grid.
    pub mass: f64,
    pub min_unclipped: f64,
}

/// `P_st` on `grid` (coordinates `(Re X, Im X)`): the radial profile from
/// [`p_st_radial`] centred at `X = 1`, sampled finely in the radius and
/// interpolated onto the grid.
///
/// The grid must resolve the Gaussian: steps above a third of its
/// per-component standard deviation are refused.
pub fn p_st_ikeda(
    kappa: f64,
    noise_r: f64,
    grid: &Grid2D,
    trunc: &ProductTruncation,
    opts: &HankelOptions,
) -> Result<PlanarDensity> {
    check_kappa(kappa)?;
    if !(noise_r > 0.0 && noise_r.is_finite()) {
        return Err(Error::param(
            "r",
            format!("noise intensity must be > 0, got {noise_r}"),
        ));
    }
    grid.x.validate()?;
    grid.y.validate()?;
    let std = (0.5 * noise_width(kappa, noise_r)).sqrt();
    let step = grid.x.step().max(grid.y.step());
    if step > std / 3.0 {
        return Err(Error::Grid(format!(
            "grid step {step} exceeds a third of the noise standard deviation {std}"
        )));
    }
    let corners = [
        (grid.x.lo, grid.y.lo),
        (grid.x.lo, grid.y.hi),
        (grid.x.hi, grid.y.lo),
        (grid.x.hi, grid.y.hi),
    ];
    let reach = corners
        .iter()
        .map(|(x, y)| (x - 1.0).hypot(*y))
        .fold(0.0, f64::max);
    // radial spacing an eighth of the grid step keeps interpolation error far below the step error
    let h = grid.x.step().min(grid.y.step()) / 8.0;
    let count = (reach / h).ceil() as usize + 2;
    let radial = Grid1D::new(0.0, h * (count - 1) as f64, count)?;
    let profile = p_st_radial(kappa, noise_r, &radial, trunc, opts)?;
    // interpolate the unclipped profile so min_unclipped reflects the grid
    let raw_profile = |d: f64| interpolate(&radial, &profile.density, d);
    let raw: Vec<f64> = (0..grid.len())
        .map(|i| {
            let (x, y) = grid.point(i);
            raw_profile((x - 1.0).hypot(y))
        })
        .collect();
    let min_unclipped = profile
        .min_unclipped
        .min(raw.iter().copied().fold(f64::INFINITY, f64::min));
    let values: Vec<f64> = raw.into_iter().map(|v| v.max(0.0)).collect();
    let density = GridFunction::new(Grid::D2(*grid), values)?;
    let mass = density.integral();
    Ok(PlanarDensity {
        density,
        mass,
        min_unclipped,
    })
}

/// Below this the modulus split is refused: `Y0` diverges at the origin.
pub const ENVELOPE_X_MIN: f64 = 0.5;

/// Splits `J0(x) ~ chi(x) * [sqrt 2 cos(x - pi/4)]` into a monotone
/// envelope `chi = M0 / sqrt 2`, `M0 = sqrt(J0^2 + Y0^2)`, and an
/// oscillatory factor. Returns `(chi, sqrt 2 cos(x - pi/4))`.
pub fn j0_envelope_split(x: f64) -> Result<(f64, f64)> {
    if !(x >= ENVELOPE_X_MIN) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "envelope split needs x >= {ENVELOPE_X_MIN}, got {x}"
        )));
    }
    let modulus = j0(x).hypot(y0(x)?);
    Ok((modulus / SQRT_2, SQRT_2 * (x - FRAC_PI_4).cos()))
}
