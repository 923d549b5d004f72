//! Multifractal integrals over Cantor-type sets.
//!
//! A [`FractalSpec`] fixes a branching construction; generation `n` has
//! `L^n` points `lambda_s` with weights `Theta_s`, and the integral of `f`
//! is the limit of `sigma_n = L^{-n} sum_s Theta_s f(lambda_s)`. Besides
//! the point sums ([`mfi_eval`]) the limit can be reached through cell
//! averages on segments ([`mfi_box_eval`]) or rectangles
//! ([`mfi_2d_eval`]), or through the measure's characteristic function
//! ([`measure_charfn`]).

mod cells;
mod dims;
mod eval;
mod measure;
mod prefractal;
mod spec;

pub use cells::{box_sigma_n, mfi_2d_eval, mfi_box_eval, sigma_2d_n};
pub use dims::{box_counting_dimension, dimensions, log_spaced_scales, Dimensions};
pub use eval::{mfi_eval, sigma_n, theorem2_bound, MfiOptions, MfiResult};
pub use measure::{
    dilatation_factor, fourier_pairing, measure_charfn, measure_charfn_at, moment_via_charfn,
    singular_measure_approx, SingularMeasure,
};
pub use prefractal::{prefractal, PrefractalIter, WeightedPoint, WeightedPointSet, DEFAULT_CAP};
pub use spec::{weight_bound, FractalSpec, WeightBound, NORMALIZATION_TOL};
