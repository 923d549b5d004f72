//! Dynamical maps `F`, noise processes `xi`, and the stochastic iteration
//! `X_{N+1} = xi_N + F(X_N)`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::rng::gaussian_unchecked;
use crate::state::State;

/// Orbits whose norm exceeds this are treated as diverged.
pub const DIVERGENCE_GUARD: f64 = 1e12;

/// Deterministic part `F` of the map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapSpec {
    /// `F(X) = A + kappa X`.
    Linear { a: State, kappa: f64 },
    /// `F(X) = 1 + kappa X exp(i (lambda |X|^2 + theta0))` on complex amplitudes.
    Ikeda {
        kappa: f64,
        lambda: f64,
        #[serde(default)]
        theta0: f64,
    },
}

impl MapSpec {
    pub fn validate(&self) -> Result<()> {
        check_kappa(self.kappa())?;
        match self {
            MapSpec::Linear { a, .. } => {
                if !a.is_finite() {
                    return Err(Error::param("a", "must be finite"));
                }
            }
            MapSpec::Ikeda { lambda, theta0, .. } => {
                if !lambda.is_finite() || !theta0.is_finite() {
                    return Err(Error::param("lambda", "lambda and theta0 must be finite"));
                }
            }
        }
        Ok(())
    }

    pub fn kappa(&self) -> f64 {
        match *self {
            MapSpec::Linear { kappa, .. } | MapSpec::Ikeda { kappa, .. } => kappa,
        }
    }

    /// Dimension of the signal space the map acts on.
    pub fn dim(&self) -> usize {
        match self {
            MapSpec::Linear { a, .. } => a.dim(),
            MapSpec::Ikeda { .. } => 2,
        }
    }

    #[inline]
    pub fn apply(&self, x: &State) -> State {
        match *self {
            MapSpec::Linear { a, kappa } => a + *x * kappa,
            MapSpec::Ikeda {
                kappa,
                lambda,
                theta0,
            } => {
                let z = x.to_complex();
                let phase = lambda * z.norm_sqr() + theta0;
                let rot = Complex64::new(phase.cos(), phase.sin());
                State::from_complex(Complex64::new(1.0, 0.0) + z * rot * kappa)
            }
        }
    }
}

/// `F(x)` for a validated map.
pub fn apply_map(spec: &MapSpec, x: &State) -> State {
    spec.apply(x)
}

pub(crate) fn check_kappa(kappa: f64) -> Result<()> {
    if kappa > 0.0 && kappa < 1.0 {
        Ok(())
    } else {
        Err(Error::param(
            "kappa",
            format!("dissipative contraction needs 0 < kappa < 1, got {kappa}"),
        ))
    }
}

/// Discrete noise taking value `points[k]` with probability `probs[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KuboAndersenRaw", into = "KuboAndersenRaw")]
pub struct KuboAndersen {
    points: Vec<State>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct KuboAndersenRaw {
    points: Vec<State>,
    probs: Vec<f64>,
}

impl KuboAndersen {
    pub fn new(points: Vec<State>, probs: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::param("points", "need at least one point"));
        }
        if points.len() != probs.len() {
            return Err(Error::param(
                "probs",
                format!("{} probabilities for {} points", probs.len(), points.len()),
            ));
        }
        let dim = points[0].dim();
        if points.iter().any(|p| p.dim() != dim || !p.is_finite()) {
            return Err(Error::param(
                "points",
                "points must be finite and share one dimension",
            ));
        }
        if probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::param("probs", "probabilities must be nonnegative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::param(
                "probs",
                format!("probabilities must sum to 1 within 1e-12, got {total}"),
            ));
        }
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(KuboAndersen {
            points,
            probs,
            cumulative,
        })
    }

    pub fn points(&self) -> &[State] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    #[inline]
    pub fn sample<G: Rng + ?Sized>(&self, rng: &mut G) -> State {
        let u: f64 = rng.random::<f64>() * self.cumulative[self.cumulative.len() - 1];
        let k = self
            .cumulative
            .partition_point(|&c| c <= u)
            .min(self.points.len() - 1);
        self.points[k]
    }

    /// Characteristic function `sum_k p_k exp(-i <X_k, U>)`.
    #[inline]
    pub fn charfn(&self, u: &State) -> Complex64 {
        self.points
            .iter()
            .zip(&self.probs)
            .map(|(x, &p)| {
                let (s, c) = x.dot(u).sin_cos();
                Complex64::new(p * c, -p * s)
            })
            .sum()
    }
}

impl TryFrom<KuboAndersenRaw> for KuboAndersen {
    type Error = Error;
    fn try_from(raw: KuboAndersenRaw) -> Result<Self> {
        KuboAndersen::new(raw.points, raw.probs)
    }
}

impl From<KuboAndersen> for KuboAndersenRaw {
    fn from(ka: KuboAndersen) -> Self {
        KuboAndersenRaw {
            points: ka.points,
            probs: ka.probs,
        }
    }
}

/// Stochastic term `xi_N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    None,
    /// Isotropic Gaussian with density `(pi R)^{-d/2} exp(-|X|^2 / R)`.
    Gaussian {
        r: f64,
    },
    KuboAndersen(KuboAndersen),
    /// Ornstein-Uhlenbeck process read every `t_del`; stationary law is the
    /// Gaussian of width `r`.
    OrnsteinUhlenbeck {
        r: f64,
        tau_cor: f64,
        t_del: f64,
    },
    /// Sum of an independent Gaussian and Kubo-Andersen draw.
    Mixed {
        r: f64,
        #[serde(flatten)]
        ka: KuboAndersen,
    },
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be > 0, got {v}")))
            }
        };
        match self {
            NoiseSpec::None | NoiseSpec::KuboAndersen(_) => Ok(()),
            NoiseSpec::Gaussian { r } | NoiseSpec::Mixed { r, .. } => positive("r", *r),
            NoiseSpec::OrnsteinUhlenbeck { r, tau_cor, t_del } => {
                positive("r", *r)?;
                positive("tau_cor", *tau_cor)?;
                positive("t_del", *t_del)
            }
        }
    }

    /// Dimension forced by the noise itself, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            NoiseSpec::KuboAndersen(ka) | NoiseSpec::Mixed { ka, .. } => Some(ka.dim()),
            _ => None,
        }
    }

    /// Whether successive draws depend on the previous one.
    pub fn is_correlated(&self) -> bool {
        matches!(self, NoiseSpec::OrnsteinUhlenbeck { .. })
    }
}

/// Draws one noise value of dimension `dim`.
///
/// For Ornstein-Uhlenbeck noise `prev` is the previous value; `None`
/// starts the process from its stationary law. The transition over one
/// delay is exact: `xi' = rho xi + sqrt(1 - rho^2) g`, `rho = exp(-t_del/tau_cor)`.
pub fn sample_noise<G: Rng + ?Sized>(
    spec: &NoiseSpec,
    dim: usize,
    rng: &mut G,
    prev: Option<&State>,
) -> Result<State> {
    if let Some(d) = spec.dim() {
        if d != dim {
            return Err(Error::Contract(format!(
                "noise has dimension {d} but {dim} was requested"
            )));
        }
    }
    if let Some(p) = prev {
        if p.dim() != dim {
            return Err(Error::Contract(format!(
                "previous noise value has dimension {} but {dim} was requested",
                p.dim()
            )));
        }
    }
    Ok(draw(spec, dim, rng, prev))
}

#[inline]
fn draw<G: Rng + ?Sized>(spec: &NoiseSpec, dim: usize, rng: &mut G, prev: Option<&State>) -> State {
    match spec {
        NoiseSpec::None => State::zeros(dim),
        NoiseSpec::Gaussian { r } => gaussian_unchecked(rng, (0.5 * r).sqrt(), dim),
        NoiseSpec::KuboAndersen(ka) => ka.sample(rng),
        NoiseSpec::Mixed { r, ka } => {
            let g = gaussian_unchecked(rng, (0.5 * r).sqrt(), dim);
            g + ka.sample(rng)
        }
        NoiseSpec::OrnsteinUhlenbeck { r, tau_cor, t_del } => {
            let std = (0.5 * r).sqrt();
            match prev {
                None => gaussian_unchecked(rng, std, dim),
                Some(p) => {
                    let rho = (-t_del / tau_cor).exp();
                    let kick = gaussian_unchecked(rng, std * (1.0 - rho * rho).sqrt(), dim);
                    *p * rho + kick
                }
            }
        }
    }
}

/// Lazily generated orbit `X_0, X_1, ..., X_n`.
///
/// Yields `Err(Divergence)` once and then stops if the state becomes
/// non-finite or leaves the [`DIVERGENCE_GUARD`] ball.
pub struct Orbit<'a, G: Rng + ?Sized> {
    map: &'a MapSpec,
    noise: &'a NoiseSpec,
    rng: &'a mut G,
    x: State,
    prev_noise: Option<State>,
    step: usize,
    n: usize,
    chain: usize,
    done: bool,
}

impl<'a, G: Rng + ?Sized> Orbit<'a, G> {
    /// Tags divergence errors with a chain index.
    pub fn with_chain(mut self, chain: usize) -> Self {
        self.chain = chain;
        self
    }
}

impl<G: Rng + ?Sized> Iterator for Orbit<'_, G> {
    type Item = Result<State>;

    fn next(&mut self) -> Option<Result<State>> {
        if self.done {
            return None;
        }
        if self.step > 0 {
            let xi = draw(self.noise, self.x.dim(), self.rng, self.prev_noise.as_ref());
            if self.noise.is_correlated() {
                self.prev_noise = Some(xi);
            }
            self.x = xi + self.map.apply(&self.x);
        }
        let norm = self.x.norm();
        if !(norm <= DIVERGENCE_GUARD) {
            self.done = true;
            return Some(Err(Error::Divergence {
                chain: self.chain,
                step: self.step,
                norm,
            }));
        }
        let out = self.x;
        if self.step == self.n {
            self.done = true;
        }
        self.step += 1;
        Some(Ok(out))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = if self.done { 0 } else { self.n + 1 - self.step };
        (0, Some(left))
    }
}

/// Starts an orbit of `n` steps from `x0`.
pub fn iterate<'a, G: Rng + ?Sized>(
    map: &'a MapSpec,
    noise: &'a NoiseSpec,
    x0: State,
    n: usize,
    rng: &'a mut G,
) -> Result<Orbit<'a, G>> {
    map.validate()?;
    noise.validate()?;
    if x0.dim() != map.dim() {
        return Err(Error::Contract(format!(
            "initial state has dimension {} but the map acts on dimension {}",
            x0.dim(),
            map.dim()
        )));
    }
    if let Some(d) = noise.dim() {
        if d != map.dim() {
            return Err(Error::Contract(format!(
                "noise dimension {d} does not match map dimension {}",
                map.dim()
            )));
        }
    }
    Ok(Orbit {
        map,
        noise,
        rng,
        x: x0,
        prev_noise: None,
        step: 0,
        n,
        chain: 0,
        done: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::RngSeed;

    fn linear(a: f64, kappa: f64) -> MapSpec {
        MapSpec::Linear {
            a: State::scalar(a),
            kappa,
        }
    }

    #[test]
    fn linear_map_from_origin() {
        assert_eq!(apply_map(&linear(1.0, 0.5), &State::scalar(0.0))[0], 1.0);
    }

    #[test]
    fn ikeda_origin_maps_to_one() {
        let m = MapSpec::Ikeda {
            kappa: 0.5,
            lambda: 123.0,
            theta0: 0.0,
        };
        let y = apply_map(&m, &State::from_complex(Complex64::new(0.0, 0.0)));
        assert_eq!(y.to_complex(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn ikeda_unit_input() {
        let m = MapSpec::Ikeda {
            kappa: 0.5,
            lambda: 1.0,
            theta0: 0.0,
        };
        let y = apply_map(&m, &State::from_complex(Complex64::new(1.0, 0.0))).to_complex();
        let expect = Complex64::new(1.0, 0.0) + Complex64::new(0.0, 1.0).exp() * 0.5;
        assert!((y - expect).norm() < 1e-15);
        assert!((y.re - 1.270_151_152_934_07).abs() < 1e-12);
        assert!((y.im - 0.420_735_492_403_948_3).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_dissipative_kappa() {
        assert!(linear(1.0, 1.5).validate().is_err());
        assert!(linear(1.0, 0.0).validate().is_err());
        assert!(linear(1.0, 1.0).validate().is_err());
    }

    #[test]
    fn noise_free_linear_orbit() {
        let map = linear(1.0, 0.5);
        let mut rng = RngSeed(1).rng();
        let orbit: Vec<_> = iterate(&map, &NoiseSpec::None, State::scalar(0.0), 20, &mut rng)
            .unwrap()
            .collect::<Result<_>>()
            .unwrap();
        assert_eq!(orbit.len(), 21);
        // X_N = A (1 - kappa^N) / (1 - kappa)
        let expect = 2.0 * (1.0 - 0.5f64.powi(20));
        assert!((orbit[20][0] - expect).abs() < 1e-15);
    }

    #[test]
    fn zero_steps_returns_start() {
        let map = MapSpec::Ikeda {
            kappa: 0.4,
            lambda: 3.0,
            theta0: 0.1,
        };
        let x0 = State::from_complex(Complex64::new(0.3, 0.2));
        let mut rng = RngSeed(1).rng();
        let orbit: Vec<_> = iterate(&map, &NoiseSpec::None, x0, 0, &mut rng)
            .unwrap()
            .collect::<Result<_>>()
            .unwrap();
        assert_eq!(orbit, vec![x0]);
    }

    #[test]
    fn ikeda_three_steps_by_hand() {
        let (kappa, lambda) = (0.5, 6.0);
        let mut z = Complex64::new(1.0, 0.0);
        for _ in 0..3 {
            z = 1.0 + kappa * z * Complex64::new(0.0, lambda * z.norm_sqr()).exp();
        }
        let map = MapSpec::Ikeda {
            kappa,
            lambda,
            theta0: 0.0,
        };
        let mut rng = RngSeed(1).rng();
        let last = iterate(&map, &NoiseSpec::None, State::scalar(0.0), 0, &mut rng);
        assert!(last.is_err(), "dimension mismatch must be refused");
        let x0 = State::from_complex(Complex64::new(1.0, 0.0));
        let last = iterate(&map, &NoiseSpec::None, x0, 3, &mut rng)
            .unwrap()
            .last()
            .unwrap()
            .unwrap();
        assert!((last.to_complex() - z).norm() < 1e-14);
        // 40-digit reference of the same three steps
        assert!((z.re - 0.714_559_699_126_284_2).abs() < 1e-12);
        assert!((z.im + 0.783_131_976_524_637_5).abs() < 1e-12);
    }

    #[test]
    fn divergence_is_reported_with_step() {
        // kappa < 1 cannot diverge, so push the start past the guard instead.
        let map = linear(0.0, 0.5);
        let mut rng = RngSeed(1).rng();
        let mut orbit = iterate(&map, &NoiseSpec::None, State::scalar(1e13), 5, &mut rng).unwrap();
        match orbit.next() {
            Some(Err(Error::Divergence { step: 0, .. })) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(orbit.next().is_none());
    }

    #[test]
    fn degenerate_kubo_andersen_is_constant() {
        let ka = KuboAndersen::new(vec![State::scalar(0.0)], vec![1.0]).unwrap();
        let noise = NoiseSpec::KuboAndersen(ka);
        let mut rng = RngSeed(3).rng();
        for _ in 0..1000 {
            assert_eq!(sample_noise(&noise, 1, &mut rng, None).unwrap()[0], 0.0);
        }
    }

    #[test]
    fn kubo_andersen_frequencies() {
        let ka = KuboAndersen::new(vec![State::scalar(0.0), State::scalar(1.0)], vec![0.5, 0.5])
            .unwrap();
        let noise = NoiseSpec::KuboAndersen(ka);
        let mut rng = RngSeed(5).rng();
        let n = 1_000_000;
        let ones = (0..n)
            .filter(|_| sample_noise(&noise, 1, &mut rng, None).unwrap()[0] == 1.0)
            .count();
        let freq = ones as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.002, "frequency {freq}");
    }

    #[test]
    fn kubo_andersen_chi_square() {
        let probs = vec![0.1, 0.2, 0.3, 0.4];
        let points = (0..4).map(|k| State::scalar(k as f64)).collect();
        let ka = KuboAndersen::new(points, probs.clone()).unwrap();
        let mut rng = RngSeed(9).rng();
        let n = 1_000_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[ka.sample(&mut rng)[0] as usize] += 1;
        }
        let chi2: f64 = counts
            .iter()
            .zip(&probs)
            .map(|(&c, &p)| {
                let e = p * n as f64;
                (c as f64 - e).powi(2) / e
            })
            .sum();
        // 99% quantile of chi-square with 3 degrees of freedom
        assert!(chi2 < 11.345, "chi2 {chi2}");
    }

    #[test]
    fn kubo_andersen_validation() {
        let p = vec![State::scalar(0.0), State::scalar(1.0)];
        assert!(KuboAndersen::new(p.clone(), vec![0.5, 0.6]).is_err());
        assert!(KuboAndersen::new(p.clone(), vec![1.0]).is_err());
        assert!(KuboAndersen::new(p, vec![1.5, -0.5]).is_err());
        assert!(KuboAndersen::new(vec![], vec![]).is_err());
    }

    #[test]
    fn ou_lag_one_autocorrelation() {
        let noise = NoiseSpec::OrnsteinUhlenbeck {
            r: 0.2,
            tau_cor: 1.0,
            t_del: 1.0,
        };
        let mut rng = RngSeed(21).rng();
        let n = 1_000_000;
        let mut prev = sample_noise(&noise, 1, &mut rng, None).unwrap();
        let (mut sxy, mut sxx, mut sx) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let next = sample_noise(&noise, 1, &mut rng, Some(&prev)).unwrap();
            sxy += prev[0] * next[0];
            sxx += prev[0] * prev[0];
            sx += prev[0];
            prev = next;
        }
        let nf = n as f64;
        let mean = sx / nf;
        let var = sxx / nf - mean * mean;
        let rho = (sxy / nf - mean * mean) / var;
        assert!((rho - (-1f64).exp()).abs() < 0.01, "rho {rho}");
        assert!((var - 0.1).abs() < 0.005, "stationary variance {var}");
    }

    #[test]
    fn ou_rejects_dimension_mismatch() {
        let noise = NoiseSpec::OrnsteinUhlenbeck {
            r: 0.2,
            tau_cor: 1.0,
            t_del: 1.0,
        };
        let mut rng = RngSeed(1).rng();
        let prev = State::zeros(2);
        assert!(sample_noise(&noise, 1, &mut rng, Some(&prev)).is_err());
    }

    #[test]
    fn noise_serde_shape() {
        let text = r#"{"kind":"mixed","r":0.1,"points":[[0.0],[1.0]],"probs":[0.25,0.75]}"#;
        let n: NoiseSpec = serde_json::from_str(text).unwrap();
        assert!(matches!(n, NoiseSpec::Mixed { r, .. } if r == 0.1));
        let bad = r#"{"kind":"kubo_andersen","points":[[0.0]],"probs":[0.5]}"#;
        assert!(serde_json::from_str::<NoiseSpec>(bad).is_err());
    }
}
