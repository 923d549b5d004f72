//! Foundation numerics: Bessel functions, truncated products, quadrature,
//! seeded randomness and sample grids.

pub mod bessel;
pub mod grid;
pub mod product;
pub mod quad;
pub mod rng;

pub use bessel::{bessel_j0, j0, j1, y0};
pub use grid::{Grid, Grid1D, Grid2D, GridFunction};
pub use product::{truncated_product, Factor, ProductTruncation, TruncatedProduct};
pub use quad::{quad_adaptive, quad_adaptive_with, quad_complex, QuadOptions, QuadValue};
pub use rng::{gaussian_sample, RngSeed, SimRng};
