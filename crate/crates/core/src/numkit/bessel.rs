//! Bessel functions of the first kind (orders 0 and 1) and `Y0`.
//!
//! Three regimes:
//! * `|x| <= 5`: ascending power series (largest term below 10, so the
//!   cancellation loss stays near one ulp of the result);
//! * `5 < |x| <= 25`: Miller backward recurrence normalised by
//!   `J0 + 2 sum J_2k = 1`, which also feeds the Neumann series for `Y0`;
//! * `|x| > 25`: Hankel asymptotic expansion summed to its smallest term
//!   (truncation error below `exp(-2|x|)`).

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_2_PI, PI};

use crate::error::{Error, Result};

const SERIES_LIMIT: f64 = 5.0;
const ASYMPTOTIC_LIMIT: f64 = 25.0;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `J0(x)` with a domain check.
pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!(
            "J0 needs a finite argument, got {x}"
        )));
    }
    Ok(j0(x))
}

/// Bessel function of the first kind, order zero. Even in `x`; NaN in, NaN out.
pub fn j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_LIMIT {
        j0_series(ax)
    } else if ax <= ASYMPTOTIC_LIMIT {
        miller(ax).j0
    } else {
        hankel_asymptotic(ax, 0).0
    }
}

/// Bessel function of the first kind, order one. Odd in `x`.
pub fn j1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= SERIES_LIMIT {
        j1_series(ax)
    } else if ax <= ASYMPTOTIC_LIMIT {
        miller(ax).j1
    } else {
        hankel_asymptotic(ax, 1).0
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// Bessel function of the second kind, order zero, for `x > 0`.
pub fn y0(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("Y0 needs a finite x > 0, got {x}")));
    }
    Ok(if x <= SERIES_LIMIT {
        y0_series(x)
    } else if x <= ASYMPTOTIC_LIMIT {
        miller(x).y0
    } else {
        hankel_asymptotic(x, 0).1
    })
}

fn j0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        term *= -q / (kf * kf);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn j1_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 0.5 * x;
    let mut sum = term;
    for k in 1..60 {
        let kf = k as f64;
        term *= -q / (kf * (kf + 1.0));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn y0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut tail = 0.0;
    for k in 1..60 {
        let kf = k as f64;
        term *= -q / (kf * kf);
        harmonic += 1.0 / kf;
        let t = -term * harmonic;
        tail += t;
        if t.abs() < 1e-18 * tail.abs().max(1e-300) {
            break;
        }
    }
    FRAC_2_PI * (((0.5 * x).ln() + EULER_GAMMA) * j0_series(x) + tail)
}

struct MillerValues {
    j0: f64,
    j1: f64,
    y0: f64,
}

fn miller(x: f64) -> MillerValues {
    // Start well above x so that the seeded tail is negligible by order 0.
    let mut m = (x + 20.0 + 6.0 * x.sqrt()) as usize;
    m += m % 2;
    let two_over_x = 2.0 / x;
    let mut jp = 0.0; // J_{k+1}
    let mut jk = 1e-30; // J_k
    let mut norm = 0.0; // J_0 + 2 sum J_2k
    let mut neumann = 0.0; // sum_{k>=1} (-1)^k J_2k / k
    let mut j1 = 0.0;
    let mut k = m;
    while k > 0 {
        if k.is_multiple_of(2) {
            norm += 2.0 * jk;
            let half = (k / 2) as f64;
            let sign = if (k / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
            neumann += sign * jk / half;
        }
        let jm = (k as f64) * two_over_x * jk - jp;
        jp = jk;
        jk = jm;
        k -= 1;
        if k == 1 {
            j1 = jk;
        }
        if jk.abs() > 1e250 {
            jk *= 1e-250;
            jp *= 1e-250;
            norm *= 1e-250;
            neumann *= 1e-250;
            j1 *= 1e-250;
        }
    }
    norm += jk;
    let j0 = jk / norm;
    let y0 = FRAC_2_PI * (((0.5 * x).ln() + EULER_GAMMA) * j0 - 2.0 * neumann / norm);
    MillerValues {
        j0,
        j1: j1 / norm,
        y0,
    }
}

/// Returns `(J_nu(x), Y_nu(x))` for `nu` in {0, 1} from the Hankel expansion.
fn hankel_asymptotic(x: f64, nu: u32) -> (f64, f64) {
    let mu = 4.0 * f64::from(nu * nu);
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0; // a_k / x^k
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        a *= (mu - odd * odd) / (8.0 * kf * x);
        if a.abs() >= last || a.abs() < 1e-18 {
            if a.abs() < last {
                // include the final, already negligible term
                accumulate(k, a, &mut p, &mut q);
            }
            break;
        }
        last = a.abs();
        accumulate(k, a, &mut p, &mut q);
    }
    let (s, c) = x.sin_cos();
    // omega = x - nu pi/2 - pi/4
    let (cos_w, sin_w) = match nu {
        0 => ((c + s) * FRAC_1_SQRT_2, (s - c) * FRAC_1_SQRT_2),
        _ => ((s - c) * FRAC_1_SQRT_2, (-s - c) * FRAC_1_SQRT_2),
    };
    let amp = (2.0 / (PI * x)).sqrt();
    (amp * (p * cos_w - q * sin_w), amp * (p * sin_w + q * cos_w))
}

#[inline]
fn accumulate(k: usize, a: f64, p: &mut f64, q: &mut f64) {
    // P takes the even terms with sign (-1)^(k/2), Q the odd ones with (-1)^((k-1)/2).
    if k.is_multiple_of(2) {
        *p += if (k / 2).is_multiple_of(2) { a } else { -a };
    } else {
        *q += if ((k - 1) / 2).is_multiple_of(2) {
            a
        } else {
            -a
        };
    }
}
