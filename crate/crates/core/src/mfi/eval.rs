use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{weight_bound, FractalSpec};
use crate::error::{Error, Result};

/// Subtrees with at least this many leaves are split across threads.
const PAR_LEAVES: f64 = 4096.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MfiOptions {
    /// Stop once `|sigma_n - sigma_{n-1}|` (and the tail bound, if any) is below this.
    pub tol: f64,
    pub n_max: usize,
    /// Uniform bound `M` on `|f^(l)|` for all `l`; enables the tail bound.
    #[serde(default)]
    pub derivative_bound: Option<f64>,
}

impl Default for MfiOptions {
    fn default() -> Self {
        MfiOptions {
            tol: 1e-10,
            n_max: 20,
            derivative_bound: None,
        }
    }
}

impl MfiOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::param(
                "tol",
                format!("must be > 0, got {}", self.tol),
            ));
        }
        if self.n_max == 0 || self.n_max > 64 {
            return Err(Error::param(
                "n_max",
                format!("must lie in 1..=64, got {}", self.n_max),
            ));
        }
        if let Some(m) = self.derivative_bound {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::param(
                    "derivative_bound",
                    format!("must be > 0, got {m}"),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfiResult {
    pub value: Complex64,
    /// Generation of `value`.
    pub n_final: usize,
    /// `|sigma_{n_final} - sigma_{n_final - 1}|`.
    pub cauchy_gap: f64,
    /// `2 M e^G (e^{G kappa^n} - 1)` at `n_final`, when `M` was supplied.
    pub bound_theorem2: Option<f64>,
    pub converged: bool,
    /// `sigma_0, ..., sigma_{n_final}`.
    pub trace: Vec<Complex64>,
    /// `|sum psi - L|`; nonzero only for unchecked specs.
    pub normalization_defect: f64,
}

/// `2 M e^G (e^{G kappa^n} - 1)`: the tail bound on `|sigma_{n+k} - sigma_n|`
/// for weights with `G = max(G1, 1)` and `|f^(l)| <= M`. Decreases to zero in `n`.
pub fn theorem2_bound(m: f64, g: f64, kappa: f64, n: usize) -> f64 {
    2.0 * m * g.exp() * (g * kappa.powi(n as i32)).exp_m1()
}

/// Weighted sum over the leaves of the branching tree, reduced bottom-up as
/// `node = sum_k (psi_k / L) child_k`. The reduction order is fixed by the
/// tree, so the result does not depend on how subtrees are scheduled.
///
/// Positions are tracked on two axes with their own contractions; the
/// one-dimensional routes simply ignore the second coordinate.
pub(crate) struct Tree<'a> {
    spec: &'a FractalSpec,
    scaled_weights: Vec<Complex64>,
    steps: Vec<[f64; 2]>,
    n: usize,
}

impl<'a> Tree<'a> {
    pub(crate) fn new(spec: &'a FractalSpec, n: usize, kx: f64, ky: f64) -> Self {
        let inv_l = 1.0 / spec.branches() as f64;
        Tree {
            spec,
            scaled_weights: spec.weights().iter().map(|w| w * inv_l).collect(),
            steps: (0..n)
                .map(|i| {
                    [
                        (1.0 - kx) * kx.powi(i as i32),
                        (1.0 - ky) * ky.powi(i as i32),
                    ]
                })
                .collect(),
            n,
        }
    }

    pub(crate) fn sum<F>(&self, leaf: &F) -> Result<Complex64>
    where
        F: Fn([f64; 2]) -> Result<Complex64> + Sync,
    {
        let ls = self.spec.lambda_star();
        self.node(0, [ls, ls], leaf)
    }

    fn child(&self, depth: usize, pos: [f64; 2], k: usize) -> [f64; 2] {
        let s = self.spec.shifted_levels()[k];
        let h = self.steps[depth];
        [pos[0] + h[0] * s, pos[1] + h[1] * s]
    }

    fn node<F>(&self, depth: usize, pos: [f64; 2], leaf: &F) -> Result<Complex64>
    where
        F: Fn([f64; 2]) -> Result<Complex64> + Sync,
    {
        if depth == self.n {
            return leaf(pos);
        }
        let l = self.spec.branches();
        let leaves = (l as f64).powi((self.n - depth) as i32);
        let children: Vec<Complex64> = if leaves >= PAR_LEAVES {
            (0..l)
                .into_par_iter()
                .map(|k| self.node(depth + 1, self.child(depth, pos, k), leaf))
                .collect::<Result<_>>()?
        } else {
            let mut out = Vec::with_capacity(l);
            for k in 0..l {
                out.push(self.node(depth + 1, self.child(depth, pos, k), leaf)?);
            }
            out
        };
        Ok(children
            .iter()
            .zip(&self.scaled_weights)
            .fold(Complex64::new(0.0, 0.0), |acc, (c, w)| acc + w * c))
    }
}

/// `sigma_n = L^{-n} sum_s Theta_s f(lambda_s)`, in `O(L^n)` time and `O(n)` memory.
pub fn sigma_n<F>(spec: &FractalSpec, f: F, n: usize) -> Complex64
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let k = spec.kappa();
    Tree::new(spec, n, k, k)
        .sum(&|p: [f64; 2]| Ok(f(p[0])))
        .expect("point evaluation is infallible")
}

/// Runs `sigma(n)` for `n = 0, 1, ...` until the Cauchy gap (and the tail
/// bound, when `bound_kappa` and `M` are given) drops below `tol`.
pub(crate) fn converge<S>(
    spec: &FractalSpec,
    opts: &MfiOptions,
    bound_kappa: Option<f64>,
    mut sigma: S,
) -> Result<MfiResult>
where
    S: FnMut(usize) -> Result<Complex64>,
{
    opts.validate()?;
    let g = weight_bound(spec).g;
    let bound_at = |n: usize| match (opts.derivative_bound, bound_kappa) {
        (Some(m), Some(k)) => Some(theorem2_bound(m, g, k, n)),
        _ => None,
    };
    let mut trace = vec![sigma(0)?];
    let mut gap = f64::INFINITY;
    let mut converged = false;
    for n in 1..=opts.n_max {
        let s = sigma(n)?;
        gap = (s - trace[n - 1]).norm();
        trace.push(s);
        if gap < opts.tol && bound_at(n).is_none_or(|b| b < opts.tol) {
            converged = true;
            break;
        }
    }
    let n_final = trace.len() - 1;
    Ok(MfiResult {
        value: trace[n_final],
        n_final,
        cauchy_gap: gap,
        bound_theorem2: bound_at(n_final),
        converged,
        trace,
        normalization_defect: spec.normalization_defect(),
    })
}

/// Multifractal integral of `f` by point sums over successive pre-fractals.
///
/// Hitting `n_max` is not an error; the result is returned with
/// `converged == false`.
pub fn mfi_eval<F>(spec: &FractalSpec, f: F, opts: &MfiOptions) -> Result<MfiResult>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    converge(spec, opts, Some(spec.kappa()), |n| Ok(sigma_n(spec, &f, n)))
}
