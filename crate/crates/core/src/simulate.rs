//! Seeded Monte Carlo ensembles and the statistics used to check analytic
//! laws against them.
//!
//! Chain `c` draws from stream `c` of the master seed ([`RngSeed::stream`]),
//! and chains are concatenated in index order, so an ensemble is a pure
//! function of its spec regardless of how many threads run it.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ikeda::RadialDensity;
use crate::models::{iterate, MapSpec, NoiseSpec};
use crate::numkit::{Grid, Grid2D, GridFunction, RngSeed};
use crate::state::State;

pub const DEFAULT_BURN_IN: usize = 1000;

/// Empirical characteristic functions need at least this many samples.
pub const MIN_CHARFN_SAMPLES: usize = 1000;

fn default_burn_in() -> usize {
    DEFAULT_BURN_IN
}

fn default_thin() -> usize {
    1
}

/// Iterations per chain: `steps` in total, of which the first `burn_in`
/// are discarded; every `thin`-th of the rest is kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub map: MapSpec,
    pub noise: NoiseSpec,
    pub chains: usize,
    pub steps: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    pub seed: RngSeed,
    #[serde(default = "default_thin")]
    pub thin: usize,
    /// Start of every chain; the origin if absent.
    #[serde(default)]
    pub x0: Option<State>,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        self.map.validate()?;
        self.noise.validate()?;
        if self.chains == 0 {
            return Err(Error::param("chains", "need at least one chain"));
        }
        if self.burn_in >= self.steps {
            return Err(Error::param(
                "burn_in",
                format!("must be below steps ({} >= {})", self.burn_in, self.steps),
            ));
        }
        if self.thin == 0 {
            return Err(Error::param("thin", "must be at least 1"));
        }
        if let Some(x0) = &self.x0 {
            if x0.dim() != self.map.dim() {
                return Err(Error::param(
                    "x0",
                    format!(
                        "dimension {} but the map acts on dimension {}",
                        x0.dim(),
                        self.map.dim()
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Samples kept per chain.
    pub fn samples_per_chain(&self) -> usize {
        (self.steps - self.burn_in).div_ceil(self.thin)
    }
}

/// Pooled samples of an ensemble with their moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSummary {
    pub count: usize,
    pub dim: usize,
    pub chains: usize,
    pub mean: Vec<f64>,
    /// Per component, with the `N - 1` denominator.
    pub variance: Vec<f64>,
    /// Chain-major; left out of serialized summaries.
    #[serde(skip)]
    pub samples: Vec<State>,
}

impl EmpiricalSummary {
    pub fn from_samples(samples: Vec<State>, chains: usize) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| Error::Contract("no samples".into()))?;
        let dim = first.dim();
        if samples.iter().any(|s| s.dim() != dim) {
            return Err(Error::Contract("samples of mixed dimension".into()));
        }
        let n = samples.len() as f64;
        let mut mean = vec![0.0; dim];
        for s in &samples {
            for (m, v) in mean.iter_mut().zip(s.as_slice()) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut variance = vec![0.0; dim];
        for s in &samples {
            for ((acc, v), m) in variance.iter_mut().zip(s.as_slice()).zip(&mean) {
                *acc += (v - m) * (v - m);
            }
        }
        let denom = (n - 1.0).max(1.0);
        variance.iter_mut().for_each(|v| *v /= denom);
        Ok(EmpiricalSummary {
            count: samples.len(),
            dim,
            chains,
            mean,
            variance,
            samples,
        })
    }

    /// Sorted distances `|X - center|`.
    pub fn radial_cdf(&self, center: &State) -> Result<EmpiricalCdf> {
        if center.dim() != self.dim {
            return Err(Error::Contract(format!(
                "center has dimension {} but samples have {}",
                center.dim(),
                self.dim
            )));
        }
        EmpiricalCdf::new(self.samples.iter().map(|s| (*s - *center).norm()).collect())
    }

    /// One component as an empirical CDF.
    pub fn component_cdf(&self, k: usize) -> Result<EmpiricalCdf> {
        if k >= self.dim {
            return Err(Error::Contract(format!(
                "component {k} of a {}-dimensional sample",
                self.dim
            )));
        }
        EmpiricalCdf::new(self.samples.iter().map(|s| s[k]).collect())
    }
}

/// Runs every chain (in parallel) and pools the kept samples in chain order.
pub fn run_ensemble(spec: &EnsembleSpec) -> Result<EmpiricalSummary> {
    spec.validate()?;
    let dim = spec.map.dim();
    let x0 = spec.x0.unwrap_or_else(|| State::zeros(dim));
    let runs: Vec<Result<Vec<State>>> = (0..spec.chains)
        .into_par_iter()
        .map(|c| {
            let mut rng = spec.seed.stream(c as u64);
            let orbit = iterate(&spec.map, &spec.noise, x0, spec.steps, &mut rng)?.with_chain(c);
            let mut kept = Vec::with_capacity(spec.samples_per_chain());
            for (i, x) in orbit.enumerate() {
                let x = x?;
                if i > spec.burn_in && (i - spec.burn_in - 1).is_multiple_of(spec.thin) {
                    kept.push(x);
                }
            }
            Ok(kept)
        })
        .collect();
    let mut samples = Vec::with_capacity(spec.chains * spec.samples_per_chain());
    for run in runs {
        samples.extend(run?);
    }
    EmpiricalSummary::from_samples(samples, spec.chains)
}

/// `(1/N) sum_j exp(-i <X_j, U>)` on every grid point.
pub fn empirical_charfn(samples: &[State], grid: &Grid) -> Result<GridFunction<Complex64>> {
    grid.validate()?;
    if samples.len() < MIN_CHARFN_SAMPLES {
        return Err(Error::Contract(format!(
            "empirical characteristic function needs at least {MIN_CHARFN_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|s| s.dim() != grid.dim()) {
        return Err(Error::Contract(
            "sample and frequency dimensions differ".into(),
        ));
    }
    let n = samples.len() as f64;
    let values = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let u = grid.point(i);
            let (mut c, mut s) = (0.0, 0.0);
            for x in samples {
                let (si, co) = x.dot(&u).sin_cos();
                c += co;
                s -= si;
            }
            Complex64::new(c / n, s / n)
        })
        .collect();
    GridFunction::new(*grid, values)
}

/// Sorted samples of a scalar statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| v.is_nan()) {
            return Err(Error::Contract(
                "empirical CDF needs non-empty, NaN-free samples".into(),
            ));
        }
        values.sort_by(f64::total_cmp);
        Ok(EmpiricalCdf { sorted: values })
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Fraction of samples `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|v| *v <= x) as f64 / self.sorted.len() as f64
    }

    /// `sup_x |F_emp(x) - cdf(x)|`, checked on both sides of every jump.
    pub fn ks_distance(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        let n = self.sorted.len() as f64;
        let mut d: f64 = 0.0;
        let mut i = 0;
        while i < self.sorted.len() {
            let x = self.sorted[i];
            // skip ties so the jump is taken in one step
            let mut j = i;
            while j < self.sorted.len() && self.sorted[j] == x {
                j += 1;
            }
            let f = cdf(x);
            d = d
                .max((f - i as f64 / n).abs())
                .max((f - j as f64 / n).abs());
            i = j;
        }
        d
    }

    /// Two-sample Kolmogorov-Smirnov statistic.
    pub fn ks_two_sample(&self, other: &EmpiricalCdf) -> f64 {
        let (a, b) = (&self.sorted, &other.sorted);
        let (na, nb) = (a.len() as f64, b.len() as f64);
        let (mut i, mut j) = (0, 0);
        let mut d: f64 = 0.0;
        while i < a.len() && j < b.len() {
            let x = a[i].min(b[j]);
            while i < a.len() && a[i] <= x {
                i += 1;
            }
            while j < b.len() && b[j] <= x {
                j += 1;
            }
            d = d.max((i as f64 / na - j as f64 / nb).abs());
        }
        d
    }
}

/// Two-sample KS critical value at 99% for sizes `n` and `m`.
pub fn ks_critical_99(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    1.628 * ((n + m) / (n * m)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Binning {
    /// Bin width `2 IQR / N^(1/3)`.
    FreedmanDiaconis,
    Fixed {
        bins: usize,
    },
}

/// Normalized histogram: `sum density * width = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub width: f64,
    pub density: Vec<f64>,
}

impl Histogram {
    pub fn new(values: &[f64], binning: Binning) -> Result<Self> {
        let cdf = EmpiricalCdf::new(values.to_vec())?;
        let s = cdf.sorted();
        let (lo, hi) = (s[0], s[s.len() - 1]);
        let bins = match binning {
            Binning::Fixed { bins } if bins > 0 => bins,
            Binning::Fixed { .. } => return Err(Error::param("bins", "need at least one bin")),
            Binning::FreedmanDiaconis => {
                let q = |p: f64| s[((s.len() - 1) as f64 * p).round() as usize];
                let width = 2.0 * (q(0.75) - q(0.25)) / (s.len() as f64).cbrt();
                if width > 0.0 && hi > lo {
                    (((hi - lo) / width).ceil() as usize).clamp(1, 1 << 20)
                } else {
                    1
                }
            }
        };
        let width = if hi > lo {
            (hi - lo) / bins as f64
        } else {
            1.0
        };
        let mut counts = vec![0usize; bins];
        for v in s {
            let k = (((v - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        let scale = 1.0 / (s.len() as f64 * width);
        Ok(Histogram {
            lo,
            width,
            density: counts.iter().map(|c| *c as f64 * scale).collect(),
        })
    }

    pub fn mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.width
    }
}

/// Density histogram of the first two components on `grid`, one bin
/// centred on each node. Samples outside every bin still count in the
/// normalization, so the mass is the fraction captured.
pub fn histogram_2d(samples: &[State], grid: &Grid2D) -> Result<GridFunction<f64>> {
    if samples.is_empty() || samples.iter().any(|s| s.dim() != 2) {
        return Err(Error::Contract(
            "planar histogram needs two-dimensional samples".into(),
        ));
    }
    let (hx, hy) = (grid.x.step(), grid.y.step());
    let (nx, ny) = (grid.x.count, grid.y.count);
    let mut counts = vec![0usize; nx * ny];
    for s in samples {
        let ix = ((s[0] - grid.x.lo) / hx + 0.5).floor();
        let iy = ((s[1] - grid.y.lo) / hy + 0.5).floor();
        if ix >= 0.0 && iy >= 0.0 && (ix as usize) < nx && (iy as usize) < ny {
            counts[ix as usize * ny + iy as usize] += 1;
        }
    }
    let scale = 1.0 / (samples.len() as f64 * hx * hy);
    GridFunction::new(
        Grid::D2(*grid),
        counts.iter().map(|c| *c as f64 * scale).collect(),
    )
}

/// `max |a - b|` over matching grids.
pub fn charfn_sup_distance(
    a: &GridFunction<Complex64>,
    b: &GridFunction<Complex64>,
) -> Result<f64> {
    same_grid(&a.grid, &b.grid)?;
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max))
}

/// `sum |a - b| * cell volume` over matching grids.
pub fn l1_distance(a: &GridFunction<f64>, b: &GridFunction<f64>) -> Result<f64> {
    same_grid(&a.grid, &b.grid)?;
    let vol = a.grid.cell_volume();
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
        * vol)
}

fn same_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a != b {
        return Err(Error::Domain(
            "compared functions live on different grids".into(),
        ));
    }
    Ok(())
}

/// An analytic prediction to check an ensemble against.
#[derive(Debug, Clone, PartialEq)]
pub enum Prediction {
    /// Characteristic function on a frequency grid.
    CharFn(GridFunction<Complex64>),
    /// Law of `|X - center|`.
    Radial { law: RadialDensity, center: State },
    /// Density of two-dimensional samples on a grid.
    Planar(GridFunction<f64>),
}

/// Comparison metrics; each is set when the prediction supports it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub charfn_sup: Option<f64>,
    pub ks: Option<f64>,
    pub l1: Option<f64>,
}

pub fn compare(prediction: &Prediction, empirical: &EmpiricalSummary) -> Result<Metrics> {
    let mut m = Metrics::default();
    match prediction {
        Prediction::CharFn(cf) => {
            let ecf = empirical_charfn(&empirical.samples, &cf.grid)?;
            m.charfn_sup = Some(charfn_sup_distance(cf, &ecf)?);
        }
        Prediction::Radial { law, center } => {
            let cdf = empirical.radial_cdf(center)?;
            m.ks = Some(cdf.ks_distance(|r| law.cdf_at(r)));
        }
        Prediction::Planar(p) => {
            let Grid::D2(g) = p.grid else {
                return Err(Error::Domain(
                    "planar prediction needs a two-dimensional grid".into(),
                ));
            };
            let h = histogram_2d(&empirical.samples, &g)?;
            m.l1 = Some(l1_distance(p, &h)?);
        }
    }
    Ok(m)
}
