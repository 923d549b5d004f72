//! Run configuration: one optional table per command, read from TOML (or
//! JSON with `--json`).

use std::path::Path;

use dilatox::ikeda::HankelOptions;
use dilatox::mfi::MfiOptions;
use dilatox::models::KuboAndersen;
use dilatox::simulate::{Binning, EnsembleSpec};
use dilatox::{Complex64, Grid, Grid1D, Grid2D, ProductTruncation, State};
use serde::{Deserialize, Serialize};

use crate::failure::Failure;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub stationary: Option<StationaryConfig>,
    pub mfi: Option<MfiConfig>,
    pub ikeda: Option<IkedaConfig>,
    pub simulate: Option<SimulateConfig>,
    pub compare: Option<CompareConfig>,
}

impl RunConfig {
    pub fn load(path: &Path, json: bool) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
        if json {
            serde_json::from_str(&text)
                .map_err(|e| Failure::config(format!("{}: {e}", path.display())))
        } else {
            toml::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
        }
    }
}

fn default_trunc() -> ProductTruncation {
    ProductTruncation::default()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StationaryModel {
    /// No noise: a point mass at `A / (1 - kappa)`.
    Det {
        a: State,
        kappa: f64,
    },
    Gauss {
        a: State,
        kappa: f64,
        r: f64,
    },
    /// Gaussian plus Kubo-Andersen noise on the map `X' = xi + kappa X`.
    GaussKa {
        kappa: f64,
        r: f64,
        ka: KuboAndersen,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationaryConfig {
    pub model: StationaryModel,
    /// Frequencies for the characteristic function.
    pub u_grid: Grid,
    /// Where to invert for a density; omitted means no density output.
    #[serde(default)]
    pub x_grid: Option<Grid>,
    #[serde(default = "default_trunc")]
    pub trunc: ProductTruncation,
}

/// Built-in integrands `f(x)` (two-dimensional routes ignore `y`).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Integrand {
    Constant {
        c: f64,
    },
    /// `x^k`
    Power {
        k: u32,
    },
    /// `cos(omega x)`
    Cos {
        omega: f64,
    },
    /// `sin(omega x)`
    Sin {
        omega: f64,
    },
    /// `exp(i omega x)`
    Exp {
        omega: f64,
    },
}

impl Integrand {
    pub fn eval(&self, x: f64) -> Complex64 {
        match *self {
            Integrand::Constant { c } => Complex64::new(c, 0.0),
            Integrand::Power { k } => Complex64::new(x.powi(k as i32), 0.0),
            Integrand::Cos { omega } => Complex64::new((omega * x).cos(), 0.0),
            Integrand::Sin { omega } => Complex64::new((omega * x).sin(), 0.0),
            Integrand::Exp { omega } => Complex64::from_polar(1.0, omega * x),
        }
    }

    /// `(frequency, coefficient)` terms when `f` is a trigonometric polynomial.
    pub fn fourier_terms(&self) -> Option<Vec<(f64, Complex64)>> {
        let half = Complex64::new(0.5, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match *self {
            Integrand::Constant { c } => Some(vec![(0.0, Complex64::new(c, 0.0))]),
            Integrand::Power { k: 0 } => Some(vec![(0.0, Complex64::new(1.0, 0.0))]),
            Integrand::Power { .. } => None,
            Integrand::Cos { omega } => Some(vec![(omega, half), (-omega, half)]),
            Integrand::Sin { omega } => Some(vec![(omega, -0.5 * i), (-omega, 0.5 * i)]),
            Integrand::Exp { omega } => Some(vec![(omega, Complex64::new(1.0, 0.0))]),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Route {
    /// Point sums over pre-fractals.
    #[default]
    Point,
    /// Segment averages (`kappa < 1/2`).
    Box,
    /// Rectangle averages with per-axis contractions.
    Plane { kappa_x: f64, kappa_y: f64 },
    /// Pairing with the measure's characteristic function.
    Fourier,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FractalConfig {
    pub kappa: f64,
    pub lambda_star: f64,
    pub levels: Vec<f64>,
    /// `[re, im]` pairs.
    pub weights: Vec<Complex64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MfiConfig {
    pub fractal: FractalConfig,
    pub integrand: Integrand,
    #[serde(default)]
    pub route: Route,
    #[serde(default)]
    pub options: MfiOptions,
    /// Write the pre-fractal of this generation.
    #[serde(default)]
    pub prefractal_generation: Option<usize>,
    /// Write the measure's characteristic function on this grid.
    #[serde(default)]
    pub charfn_grid: Option<Grid1D>,
    #[serde(default = "default_trunc")]
    pub trunc: ProductTruncation,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IkedaConfig {
    pub kappa: f64,
    /// Radii `|X - 1|` for the noise-free density.
    pub r_grid: Grid1D,
    #[serde(default)]
    pub hankel: HankelOptions,
    #[serde(default = "default_trunc")]
    pub trunc: ProductTruncation,
    /// Gaussian noise intensity `R`; with `plane_grid` yields the noisy density.
    #[serde(default)]
    pub noise_r: Option<f64>,
    #[serde(default)]
    pub plane_grid: Option<Grid2D>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub ensemble: EnsembleSpec,
    /// Write thinned samples in the binary format.
    #[serde(default)]
    pub write_samples: bool,
    /// Histogram of every component.
    #[serde(default)]
    pub histogram: Option<Binning>,
    /// Empirical characteristic function on this grid.
    #[serde(default)]
    pub charfn_grid: Option<Grid>,
    /// Sorted distances `|X - center|`, written as an empirical CDF.
    #[serde(default)]
    pub radial_center: Option<State>,
}

/// Pass thresholds for `compare`; metrics without a threshold are reported only.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    #[serde(default)]
    pub max_charfn_sup: Option<f64>,
    #[serde(default)]
    pub max_ks: Option<f64>,
    #[serde(default)]
    pub max_l1: Option<f64>,
}
