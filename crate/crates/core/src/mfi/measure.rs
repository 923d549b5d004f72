//! The multifractal measure through its characteristic function
//! `M(w) = int e^{-i w x} dmu(x)`, which solves the dilatation equation
//! `M(w) = N(w) M(kappa w)`.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{prefractal, FractalSpec, DEFAULT_CAP};
use crate::error::{Error, Result};
use crate::numkit::{
    truncated_product, Grid, Grid1D, GridFunction, ProductTruncation, TruncatedProduct,
};
use crate::state::State;
use crate::stationary::{CharFnResult, StationaryLaw};

#[inline]
fn phase(angle: f64) -> Complex64 {
    let (s, c) = angle.sin_cos();
    Complex64::new(c, s)
}

/// `L^{-1} sum_k psi_k exp(-i w (1 - kappa) Lambdabar_k)`: one factor of the product.
fn bracket(spec: &FractalSpec, w: f64) -> Complex64 {
    let c = w * (1.0 - spec.kappa());
    spec.shifted_levels()
        .iter()
        .zip(spec.weights())
        .map(|(s, psi)| psi * phase(-c * s))
        .sum::<Complex64>()
        / spec.branches() as f64
}

/// `M(w) = e^{-i w lambda_star} prod_g [L^{-1} sum_k psi_k e^{-i w (1-kappa) kappa^g Lambdabar_k}]`.
pub fn measure_charfn_at(
    spec: &FractalSpec,
    w: f64,
    trunc: &ProductTruncation,
) -> TruncatedProduct<Complex64> {
    let kappa = spec.kappa();
    let mut p = truncated_product(|g| bracket(spec, w * kappa.powi(g as i32)), trunc);
    p.value *= phase(-w * spec.lambda_star());
    p
}

/// `N(w) = L^{-1} sum_k psi_k exp(-i w (1 - kappa)(lambda_star + Lambdabar_k))`.
pub fn dilatation_factor(spec: &FractalSpec, w: f64) -> Complex64 {
    bracket(spec, w) * phase(-w * (1.0 - spec.kappa()) * spec.lambda_star())
}

/// The multifractal measure seen as a one-dimensional law with a
/// dilatation equation, so the generic grid evaluation and residual
/// checks apply.
#[derive(Debug, Clone)]
pub struct SingularMeasure {
    spec: FractalSpec,
    trunc: ProductTruncation,
}

impl SingularMeasure {
    pub fn new(spec: FractalSpec, trunc: ProductTruncation) -> Result<Self> {
        trunc.validate()?;
        Ok(SingularMeasure { spec, trunc })
    }

    pub fn spec(&self) -> &FractalSpec {
        &self.spec
    }
}

impl StationaryLaw for SingularMeasure {
    fn kappa(&self) -> f64 {
        self.spec.kappa()
    }
    fn dim(&self) -> usize {
        1
    }
    fn charfn_at(&self, u: &State) -> TruncatedProduct<Complex64> {
        measure_charfn_at(&self.spec, u[0], &self.trunc)
    }
    fn factor(&self, u: &State) -> Complex64 {
        dilatation_factor(&self.spec, u[0])
    }
    /// The support has dimension below one when `L kappa < 1`, so the measure
    /// has no density; larger contractions are not classified and are
    /// reported as singular too.
    fn is_singular(&self) -> bool {
        true
    }
}

/// `M` on a frequency grid.
pub fn measure_charfn(
    spec: &FractalSpec,
    grid: &Grid1D,
    trunc: &ProductTruncation,
) -> Result<CharFnResult> {
    SingularMeasure::new(spec.clone(), *trunc)?.charfn(&Grid::D1(*grid))
}

/// `int f dmu` for a trigonometric polynomial `f(x) = sum_j c_j e^{i w_j x}`
/// given as `(w_j, c_j)` pairs: `sum_j c_j M(-w_j)`.
pub fn fourier_pairing(
    spec: &FractalSpec,
    terms: &[(f64, Complex64)],
    trunc: &ProductTruncation,
) -> Result<Complex64> {
    trunc.validate()?;
    let mut total = Complex64::new(0.0, 0.0);
    for &(w, c) in terms {
        let m = measure_charfn_at(spec, -w, trunc);
        if !m.converged {
            return Err(Error::Domain(format!(
                "product did not converge at frequency {w}"
            )));
        }
        total += c * m.value;
    }
    Ok(total)
}

/// Step of the finite-difference stencils used by [`moment_via_charfn`].
const MOMENT_STEP: f64 = 0.01;

/// `int x^m dmu = i^m M^(m)(0)` for `m` in `1..=2`, by five-point central
/// differences of the product.
///
/// The product is truncated at a fixed number of factors for all stencil
/// points so the differences see one smooth function.
pub fn moment_via_charfn(spec: &FractalSpec, m: u32) -> Result<Complex64> {
    let h = MOMENT_STEP;
    // factors beyond this are 1 to rounding at |w| <= 2h
    let kappa = spec.kappa();
    let terms = ((1e-18f64).ln() / kappa.ln()).ceil().max(1.0) as usize + 1;
    let eval = |w: f64| {
        let p: Complex64 = (0..terms)
            .map(|g| bracket(spec, w * kappa.powi(g as i32)))
            .product();
        p * phase(-w * spec.lambda_star())
    };
    let f = [eval(-2.0 * h), eval(-h), eval(0.0), eval(h), eval(2.0 * h)];
    let i = Complex64::new(0.0, 1.0);
    match m {
        1 => Ok(i * (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]) / (12.0 * h)),
        2 => Ok(-(-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * h * h)),
        _ => Err(Error::param(
            "m",
            format!("moments of order 1 and 2 only, got {m}"),
        )),
    }
}

/// Gaussian widths beyond which a mollified delta is treated as zero.
const MOLLIFIER_REACH: f64 = 10.0;

/// `sum_s L^{-n} Theta_s phi_w(x - lambda_s)` on `xgrid`: generation `n`
/// of the measure with every delta replaced by a normalized Gaussian of
/// standard deviation `width`.
pub fn singular_measure_approx(
    spec: &FractalSpec,
    n: usize,
    xgrid: &Grid1D,
    width: f64,
) -> Result<GridFunction<Complex64>> {
    xgrid.validate()?;
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::param("width", format!("must be > 0, got {width}")));
    }
    let pts = prefractal(spec, n).materialize(DEFAULT_CAP)?;
    let scale = (spec.branches() as f64).powi(-(n as i32));
    let norm = scale / (width * (2.0 * std::f64::consts::PI).sqrt());
    // each grid point sums its nearby deltas, so rows are independent
    let values = (0..xgrid.count)
        .into_par_iter()
        .map(|i| {
            let x = xgrid.point(i);
            let lo = pts.partition_point(|p| p.lambda < x - MOLLIFIER_REACH * width);
            let hi = pts.partition_point(|p| p.lambda <= x + MOLLIFIER_REACH * width);
            pts[lo..hi]
                .iter()
                .map(|p| {
                    let z = (x - p.lambda) / width;
                    p.theta * (norm * (-0.5 * z * z).exp())
                })
                .sum()
        })
        .collect();
    GridFunction::new(Grid::D1(*xgrid), values)
}
