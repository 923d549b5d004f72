//! Cell-average routes: segment averages in one dimension and rectangle
//! averages in two, both for the binary symmetric layout.

use num_complex::Complex64;

use super::eval::{converge, Tree};
use super::{FractalSpec, MfiOptions, MfiResult};
use crate::error::{Error, Result};
use crate::models::check_kappa;
use crate::numkit::{quad_complex, QuadOptions};

/// Relative accuracy requested from every cell average on top of the absolute one.
const CELL_REL_TOL: f64 = 1e-13;

fn cell_opts() -> QuadOptions {
    QuadOptions {
        rel_tol: CELL_REL_TOL,
        ..QuadOptions::default()
    }
}

fn require_binary(spec: &FractalSpec) -> Result<()> {
    if !spec.is_binary_symmetric() {
        return Err(Error::Domain(format!(
            "cell averages need L = 2 and lambda_star = 1/2, got L = {} and lambda_star = {}",
            spec.branches(),
            spec.lambda_star()
        )));
    }
    Ok(())
}

/// Absolute accuracy for one cell average at generation `n`.
fn cell_tol(tol: f64, n: usize) -> f64 {
    tol * 0.5f64.powi(n as i32)
}

/// Average of `f` over `[c - h/2, c + h/2]` to absolute accuracy `tol`.
fn segment_average<F>(f: F, c: f64, h: f64, tol: f64) -> Result<Complex64>
where
    F: FnMut(f64) -> Complex64,
{
    let (a, b) = (c - 0.5 * h, c + 0.5 * h);
    // divide by the rounded length so constants average exactly
    let len = b - a;
    let integral = quad_complex(f, a, b, tol * len, cell_opts())?;
    Ok(integral / len)
}

/// `sigma_n^# = 2^{-n} sum_s Theta_s (kappa^{-n} int_{l_s} f)` over the `2^n`
/// segments of length `kappa^n` left by `n` Cantor steps.
pub fn box_sigma_n<F>(spec: &FractalSpec, f: &F, n: usize, tol: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    require_binary(spec)?;
    let kappa = spec.kappa();
    if kappa >= 0.5 {
        return Err(Error::Domain(format!(
            "segments overlap for kappa = {kappa} >= 1/2; use the two-dimensional route \
             (mfi_2d_eval) instead"
        )));
    }
    let h = kappa.powi(n as i32);
    let ctol = cell_tol(tol, n);
    Tree::new(spec, n, kappa, kappa).sum(&|p: [f64; 2]| segment_average(f, p[0], h, ctol))
}

/// Multifractal integral through segment averages (`kappa < 1/2` only).
pub fn mfi_box_eval<F>(spec: &FractalSpec, f: F, opts: &MfiOptions) -> Result<MfiResult>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    opts.validate()?;
    converge(spec, opts, None, |n| box_sigma_n(spec, &f, n, opts.tol))
}

fn check_2d_kappas(kx: f64, ky: f64) -> Result<()> {
    check_kappa(kx)?;
    check_kappa(ky)?;
    if kx > 0.5 && ky > 0.5 {
        return Err(Error::Domain(format!(
            "rectangles overlap when both contractions exceed 1/2 (got {kx}, {ky})"
        )));
    }
    Ok(())
}

/// Rectangle-average partial sum with independent contractions per axis.
/// The contraction stored in `spec` is not used.
pub fn sigma_2d_n<F>(
    spec: &FractalSpec,
    kx: f64,
    ky: f64,
    f: &F,
    n: usize,
    tol: f64,
) -> Result<Complex64>
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    require_binary(spec)?;
    check_2d_kappas(kx, ky)?;
    let (hx, hy) = (kx.powi(n as i32), ky.powi(n as i32));
    let ctol = cell_tol(tol, n);
    Tree::new(spec, n, kx, ky).sum(&|p: [f64; 2]| {
        // outer average over x of inner averages over y
        let mut failure = None;
        let outer = segment_average(
            |x| match segment_average(|y| f(x, y), p[1], hy, ctol) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    Complex64::new(f64::NAN, f64::NAN)
                }
            },
            p[0],
            hx,
            ctol,
        );
        match failure {
            Some(e) => Err(e),
            None => outer,
        }
    })
}

/// Two-dimensional multifractal integral over the rectangle construction.
pub fn mfi_2d_eval<F>(
    spec: &FractalSpec,
    kx: f64,
    ky: f64,
    f: F,
    opts: &MfiOptions,
) -> Result<MfiResult>
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    opts.validate()?;
    check_2d_kappas(kx, ky)?;
    converge(spec, opts, None, |n| {
        sigma_2d_n(spec, kx, ky, &f, n, opts.tol)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mfi::mfi_eval;

    fn opts(tol: f64) -> MfiOptions {
        MfiOptions {
            tol,
            n_max: 20,
            derivative_bound: None,
        }
    }

    #[test]
    fn box_first_generation_by_hand() {
        let spec = FractalSpec::cantor(1.0 / 3.0).unwrap();
        let s = box_sigma_n(&spec, &|x: f64| Complex64::new(x, 0.0), 1, 1e-12).unwrap();
        // (1/6 + 5/6) / 2
        assert!((s - 0.5).norm() < 1e-15);
        let s = box_sigma_n(&spec, &|x: f64| Complex64::new(x * x, 0.0), 1, 1e-12).unwrap();
        // averages of x^2 over [0,1/3] and [2/3,1]: 1/27 and 19/27
        assert!((s.re - 10.0 / 27.0).abs() < 1e-15);
    }

    #[test]
    fn box_constant_is_one() {
        let spec = FractalSpec::cantor(0.2).unwrap();
        for n in 0..8 {
            let s = box_sigma_n(&spec, &|_| Complex64::new(1.0, 0.0), n, 1e-10).unwrap();
            // Kronrod weights sum to 2 only up to rounding
            assert!((s - 1.0).norm() < 1e-14, "{s}");
        }
    }

    #[test]
    fn box_route_agrees_with_point_route() {
        let spec = FractalSpec::cantor(1.0 / 3.0).unwrap();
        let f = |x: f64| Complex64::new(x * x, 0.0);
        let a = mfi_box_eval(&spec, f, &opts(1e-9)).unwrap();
        let b = mfi_eval(&spec, f, &opts(1e-9)).unwrap();
        assert!(a.converged);
        assert!((a.value - 0.375).norm() < 1e-6);
        assert!((a.value - b.value).norm() < 1e-8);
        let g = |x: f64| Complex64::from_polar(1.0, 4.0 * x);
        let a = mfi_box_eval(&spec, g, &opts(1e-10)).unwrap();
        let b = mfi_eval(&spec, g, &opts(1e-10)).unwrap();
        assert!((a.value - b.value).norm() < 1e-9);
    }

    #[test]
    fn box_refuses_overlapping_segments() {
        let spec = FractalSpec::cantor(0.5).unwrap();
        let err = mfi_box_eval(&spec, |x: f64| Complex64::new(x, 0.0), &opts(1e-6)).unwrap_err();
        assert!(err.to_string().contains("mfi_2d_eval"));
        let spec = FractalSpec::equal_weights(0.2, 0.5, vec![0.0, 0.5, 1.0]).unwrap();
        assert!(box_sigma_n(&spec, &|_| Complex64::new(1.0, 0.0), 1, 1e-6).is_err());
    }

    #[test]
    fn diagonal_of_the_square() {
        let spec = FractalSpec::cantor(0.5).unwrap();
        let r = mfi_2d_eval(
            &spec,
            0.5,
            0.5,
            |x: f64, _| Complex64::new(x, 0.0),
            &opts(1e-10),
        )
        .unwrap();
        assert!((r.value - 0.5).norm() < 1e-12);
        let r = mfi_2d_eval(
            &spec,
            0.5,
            0.5,
            |_, _| Complex64::new(1.0, 0.0),
            &opts(1e-10),
        )
        .unwrap();
        assert!((r.value - 1.0).norm() < 1e-14);
        // kappa = 1/2 gives Lebesgue measure on the diagonal: int_0^1 x y dx = 1/3
        let r = mfi_2d_eval(
            &spec,
            0.5,
            0.5,
            |x: f64, y: f64| Complex64::new(x * y, 0.0),
            &opts(1e-9),
        )
        .unwrap();
        assert!((r.value - 1.0 / 3.0).norm() < 1e-8);
    }

    #[test]
    fn overlapping_x_cells_reduce_to_one_dimension() {
        let spec = FractalSpec::cantor(0.7).unwrap();
        let f1 = |x: f64| Complex64::new(x * x, 0.0);
        let a = mfi_2d_eval(&spec, 0.7, 0.5, |x: f64, _| f1(x), &opts(5e-7)).unwrap();
        let b = mfi_eval(&spec, f1, &opts(5e-7)).unwrap();
        assert!(a.converged && b.converged);
        assert!(
            (a.value - b.value).norm() < 1e-6,
            "{} vs {}",
            a.value,
            b.value
        );
    }

    #[test]
    fn both_contractions_large_is_refused() {
        let spec = FractalSpec::cantor(0.7).unwrap();
        assert!(mfi_2d_eval(
            &spec,
            0.6,
            0.7,
            |_, _| Complex64::new(1.0, 0.0),
            &opts(1e-6)
        )
        .is_err());
    }
}
