use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::check_kappa;

/// Tolerance on `|sum psi - L|` for a checked spec.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Everything that defines one multifractal integral: `L` branches with
/// levels `0 = Lambda_0 < ... < Lambda_{L-1} = 1`, anchor `lambda_star`,
/// contraction `kappa` and one complex weight `psi_k` per branch.
///
/// Checked specs satisfy `sum_k psi_k = L`. Unchecked specs may violate
/// it; the defect `|sum psi - L|` travels with every result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FractalSpecRaw", into = "FractalSpecRaw")]
pub struct FractalSpec {
    kappa: f64,
    lambda_star: f64,
    levels: Vec<f64>,
    weights: Vec<Complex64>,
    shifted: Vec<f64>,
    defect: f64,
    unchecked: bool,
}

#[derive(Serialize, Deserialize)]
struct FractalSpecRaw {
    kappa: f64,
    lambda_star: f64,
    levels: Vec<f64>,
    /// `[re, im]` pairs
    weights: Vec<Complex64>,
    #[serde(default)]
    unchecked: bool,
}

impl FractalSpec {
    /// Builds a spec and enforces the weight normalization.
    pub fn new(
        kappa: f64,
        lambda_star: f64,
        levels: Vec<f64>,
        weights: Vec<Complex64>,
    ) -> Result<Self> {
        let spec = Self::build(kappa, lambda_star, levels, weights, false)?;
        if spec.defect > NORMALIZATION_TOL {
            let sum: Complex64 = spec.weights.iter().sum();
            return Err(Error::param(
                "weights",
                format!(
                    "weights must sum to L = {} within {NORMALIZATION_TOL:e}, got {sum} \
                     (use unchecked mode to evaluate anyway)",
                    spec.branches()
                ),
            ));
        }
        Ok(spec)
    }

    /// Like [`FractalSpec::new`] but records a normalization defect instead
    /// of refusing it.
    pub fn new_unchecked(
        kappa: f64,
        lambda_star: f64,
        levels: Vec<f64>,
        weights: Vec<Complex64>,
    ) -> Result<Self> {
        Self::build(kappa, lambda_star, levels, weights, true)
    }

    fn build(
        kappa: f64,
        lambda_star: f64,
        levels: Vec<f64>,
        weights: Vec<Complex64>,
        unchecked: bool,
    ) -> Result<Self> {
        check_kappa(kappa)?;
        if !(lambda_star > 0.0 && lambda_star < 1.0) {
            return Err(Error::param(
                "lambda_star",
                format!("must lie in (0, 1), got {lambda_star}"),
            ));
        }
        let l = levels.len();
        if l < 2 {
            return Err(Error::param("levels", "need at least two branches"));
        }
        if levels[0] != 0.0 || levels[l - 1] != 1.0 {
            return Err(Error::param(
                "levels",
                "first level must be 0 and last level 1",
            ));
        }
        if levels.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::param("levels", "levels must be strictly increasing"));
        }
        if weights.len() != l {
            return Err(Error::param(
                "weights",
                format!("{} weights for {l} branches", weights.len()),
            ));
        }
        if weights
            .iter()
            .any(|w| !w.re.is_finite() || !w.im.is_finite())
        {
            return Err(Error::param("weights", "weights must be finite"));
        }
        let sum: Complex64 = weights.iter().sum();
        let defect = (sum - l as f64).norm();
        let shifted = levels.iter().map(|lv| lv - lambda_star).collect();
        Ok(FractalSpec {
            kappa,
            lambda_star,
            levels,
            weights,
            shifted,
            defect,
            unchecked,
        })
    }

    /// Binary Cantor construction: `L = 2`, `lambda_star = 1/2`, levels
    /// `{0, 1}`, equal weights.
    pub fn cantor(kappa: f64) -> Result<Self> {
        Self::new(
            kappa,
            0.5,
            vec![0.0, 1.0],
            vec![Complex64::new(1.0, 0.0); 2],
        )
    }

    /// Equal weights `psi_k = 1` on arbitrary levels.
    pub fn equal_weights(kappa: f64, lambda_star: f64, levels: Vec<f64>) -> Result<Self> {
        let w = vec![Complex64::new(1.0, 0.0); levels.len()];
        Self::new(kappa, lambda_star, levels, w)
    }

    /// The phase weights `psi(s) = sqrt(2) exp(-i pi s / 4)` produced by the
    /// Bessel-envelope representation of the Ikeda model (`L = 2`,
    /// `lambda_star = 1/2`). They sum to `2 sqrt(2) cos(pi/8) != 2`, so the
    /// spec is necessarily unchecked.
    pub fn ikeda_phase_weights(kappa: f64) -> Result<Self> {
        let w = |s: f64| {
            Complex64::from_polar(std::f64::consts::SQRT_2, -0.25 * std::f64::consts::PI * s)
        };
        Self::new_unchecked(kappa, 0.5, vec![0.0, 1.0], vec![w(-0.5), w(0.5)])
    }

    /// Same construction with another contraction.
    pub fn with_kappa(&self, kappa: f64) -> Result<Self> {
        Self::build(
            kappa,
            self.lambda_star,
            self.levels.clone(),
            self.weights.clone(),
            self.unchecked,
        )
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn lambda_star(&self) -> f64 {
        self.lambda_star
    }

    /// Number of branches `L`.
    pub fn branches(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Shifted levels `Lambda_k - lambda_star`.
    pub fn shifted_levels(&self) -> &[f64] {
        &self.shifted
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    /// `|sum_k psi_k - L|`.
    pub fn normalization_defect(&self) -> f64 {
        self.defect
    }

    pub fn is_unchecked(&self) -> bool {
        self.unchecked
    }

    /// Whether every weight is real and strictly positive, the regime in
    /// which the weights are branch probabilities times `L`.
    pub fn has_positive_weights(&self) -> bool {
        self.weights.iter().all(|w| w.im == 0.0 && w.re > 0.0)
    }

    /// `L = 2`, `lambda_star = 1/2`, levels `{0, 1}`: the layout the
    /// segment and rectangle constructions are defined for.
    pub fn is_binary_symmetric(&self) -> bool {
        self.branches() == 2 && self.lambda_star == 0.5
    }
}

impl TryFrom<FractalSpecRaw> for FractalSpec {
    type Error = Error;
    fn try_from(raw: FractalSpecRaw) -> Result<Self> {
        if raw.unchecked {
            Self::new_unchecked(raw.kappa, raw.lambda_star, raw.levels, raw.weights)
        } else {
            Self::new(raw.kappa, raw.lambda_star, raw.levels, raw.weights)
        }
    }
}

impl From<FractalSpec> for FractalSpecRaw {
    fn from(s: FractalSpec) -> Self {
        FractalSpecRaw {
            kappa: s.kappa,
            lambda_star: s.lambda_star,
            levels: s.levels,
            weights: s.weights,
            unchecked: s.unchecked,
        }
    }
}

/// `(G1, G)` with `G1 = L^{-1} sum_k |psi_k|` and `G = max(G1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightBound {
    pub g1: f64,
    pub g: f64,
}

/// `G1` is the supremum of `|L^{-1} sum_k psi_k beta_k|` over `|beta_k| < 1`.
pub fn weight_bound(spec: &FractalSpec) -> WeightBound {
    let g1 = spec.weights.iter().map(|w| w.norm()).sum::<f64>() / spec.branches() as f64;
    WeightBound { g1, g: g1.max(1.0) }
}
