use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::check_kappa;

/// Similarity dimensions of the axis projections and the dimension of the
/// two-dimensional cluster set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dimensions {
    /// `-1 / log2 kappa_x`, only when `kappa_x <= 1/2`.
    pub d_x: Option<f64>,
    pub d_y: Option<f64>,
    /// `2 / (1 - log2 kappa_x)`, the cluster set built with `kappa_y = 1/2`.
    pub d: f64,
}

pub fn dimensions(kx: f64, ky: f64) -> Result<Dimensions> {
    check_kappa(kx)?;
    check_kappa(ky)?;
    let axis = |k: f64| (k <= 0.5).then(|| -1.0 / k.log2());
    Ok(Dimensions {
        d_x: axis(kx),
        d_y: axis(ky),
        d: 2.0 / (1.0 - kx.log2()),
    })
}

/// `count` box sizes spaced evenly in `log` between `largest` and `smallest`.
pub fn log_spaced_scales(largest: f64, smallest: f64, count: usize) -> Result<Vec<f64>> {
    if !(largest > smallest && smallest > 0.0) || count < 2 {
        return Err(Error::param(
            "scales",
            format!("need largest > smallest > 0 and at least two scales, got {largest}, {smallest}, {count}"),
        ));
    }
    let (a, b) = (largest.ln(), smallest.ln());
    Ok((0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect())
}

/// Least-squares slope of `ln N(eps)` against `ln(1/eps)`, where `N(eps)`
/// counts the boxes `[j eps, (j+1) eps)` holding at least one point.
///
/// Scales should sit between the point spacing and the set's diameter;
/// boxes smaller than the spacing only see isolated points.
pub fn box_counting_dimension(points: &[f64], scales: &[f64]) -> Result<f64> {
    if points.is_empty() || points.iter().any(|p| !p.is_finite()) {
        return Err(Error::param("points", "need finite points"));
    }
    if scales.len() < 2 || scales.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::param("scales", "need at least two positive scales"));
    }
    let xy: Vec<(f64, f64)> = scales
        .iter()
        .map(|&eps| {
            let boxes: HashSet<i64> = points.iter().map(|p| (p / eps).floor() as i64).collect();
            ((1.0 / eps).ln(), (boxes.len() as f64).ln())
        })
        .collect();
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::param("scales", "scales must not all be equal"));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mfi::{prefractal, FractalSpec, DEFAULT_CAP};

    #[test]
    fn formula_values() {
        let d = dimensions(0.5, 0.5).unwrap();
        assert_eq!(d.d, 1.0);
        assert_eq!(d.d_x, Some(1.0));
        let d = dimensions(1.0 / 3.0, 0.25).unwrap();
        assert!((d.d_x.unwrap() - 1.0 / 3f64.log2()).abs() < 1e-15);
        assert!((d.d_x.unwrap() - 0.630_929_753_571_457_4).abs() < 1e-15);
        assert_eq!(d.d_y, Some(0.5));
        let d = dimensions(0.7, 0.5).unwrap();
        assert_eq!(d.d_x, None);
        assert!(d.d > 1.0 && d.d < 2.0);
        assert!(dimensions(0.0, 0.5).is_err());
    }

    #[test]
    fn box_counting_on_a_segment() {
        let pts: Vec<f64> = (0..100_000).map(|i| i as f64 / 100_000.0).collect();
        let scales = log_spaced_scales(0.1, 1e-3, 20).unwrap();
        let d = box_counting_dimension(&pts, &scales).unwrap();
        assert!((d - 1.0).abs() < 0.01, "{d}");
    }

    #[test]
    fn box_counting_on_the_middle_thirds_set() {
        let spec = FractalSpec::cantor(1.0 / 3.0).unwrap();
        let pts: Vec<f64> = prefractal(&spec, 10)
            .materialize(DEFAULT_CAP)
            .unwrap()
            .iter()
            .map(|p| p.lambda)
            .collect();
        let d = box_counting_dimension(&pts, &log_spaced_scales(1e-1, 1e-4, 25).unwrap()).unwrap();
        let exact = dimensions(1.0 / 3.0, 0.5).unwrap().d_x.unwrap();
        assert!((d / exact - 1.0).abs() < 0.05, "{d}");
    }

    #[test]
    fn bad_scales() {
        assert!(log_spaced_scales(1e-4, 1e-1, 10).is_err());
        assert!(box_counting_dimension(&[0.5], &[0.1]).is_err());
    }
}
