//! Stationary distributions of noisy dissipative maps.
//!
//! Linear maps with Gaussian and Kubo-Andersen noise have stationary
//! characteristic functions given by infinite products
//! ([`stationary`]); their fractal parts are multifractal integrals over
//! Cantor-type sets ([`mfi`]). The noisy Ikeda map is handled in the
//! random phase approximation through a Bessel-function product
//! ([`ikeda`]). Every analytic object can be checked against seeded Monte
//! Carlo runs of the underlying maps ([`simulate`]).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod ikeda;
pub mod io;
pub mod mfi;
pub mod models;
pub mod numkit;
pub mod simulate;
pub mod state;
pub mod stationary;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use numkit::{Grid, Grid1D, Grid2D, GridFunction, ProductTruncation, RngSeed};
pub use state::State;
