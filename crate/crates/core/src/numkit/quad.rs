//! Globally adaptive Gauss-Kronrod (7/15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::iter::Sum;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Limits for [`quad_adaptive_with`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub max_subdivisions: usize,
    /// Accept once the error estimate is below `rel_tol * |integral|`, even
    /// if the absolute tolerance has not been met.
    pub rel_tol: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            max_subdivisions: 2000,
            rel_tol: 0.0,
        }
    }
}

/// Values a panel can integrate: reals and complex numbers.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Sum
{
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Integrates `f` over `[a, b]` to an estimated absolute error below `tol`.
///
/// On failure the error carries the best available estimate.
pub fn quad_adaptive<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    quad_adaptive_with(f, a, b, tol, QuadOptions::default())
}

pub fn quad_adaptive_with<F: FnMut(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    opts: QuadOptions,
) -> Result<f64> {
    integrate(f, a, b, tol, opts)
}

/// Complex-valued version of [`quad_adaptive_with`]; the error estimate is
/// taken in modulus and a failure reports the modulus of the estimate.
pub fn quad_complex<F: FnMut(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    opts: QuadOptions,
) -> Result<Complex64> {
    integrate(f, a, b, tol, opts)
}

pub(crate) fn integrate<T: QuadValue, F: FnMut(f64) -> T>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    opts: QuadOptions,
) -> Result<T> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!(
            "quadrature needs finite a < b, got [{a}, {b}]"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!(
            "quadrature tolerance must be > 0, got {tol}"
        )));
    }
    let first = Segment::new(&mut f, a, b);
    if first.err <= tol.max(opts.rel_tol * first.value.magnitude()) {
        return Ok(first.value);
    }
    let mut total_err = first.err;
    let mut running = first.value;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut subdivisions = 0;
    let fail = |heap: &BinaryHeap<Segment<T>>, error: f64, subdivisions: usize| {
        let estimate: T = heap.iter().map(|s| s.value).sum();
        Error::Quadrature {
            estimate: estimate.magnitude(),
            error,
            tol,
            subdivisions,
        }
    };
    while total_err > tol.max(opts.rel_tol * running.magnitude()) {
        if subdivisions >= opts.max_subdivisions {
            return Err(fail(&heap, total_err, subdivisions));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval exhausted at machine resolution; nothing more to gain.
            heap.push(worst);
            return Err(fail(&heap, total_err, subdivisions));
        }
        let left = Segment::new(&mut f, worst.a, mid);
        let right = Segment::new(&mut f, mid, worst.b);
        total_err += left.err + right.err - worst.err;
        running = running + left.value + right.value - worst.value;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
        if subdivisions % 64 == 0 {
            // resync to keep cancellation from drifting the running sums
            total_err = heap.iter().map(|s| s.err).sum();
            running = heap.iter().map(|s| s.value).sum();
        }
    }
    Ok(heap.iter().map(|s| s.value).sum())
}

#[derive(Debug, Clone, Copy)]
struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

impl<T: QuadValue> Segment<T> {
    fn new<F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> Segment<T> {
        let (value, err) = gk15(f, a, b);
        Segment { a, b, value, err }
    }
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// One Kronrod panel with the QUADPACK error heuristic.
fn gk15<T: QuadValue, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = WGK[7] * fc.magnitude();
    let mut fv1 = [T::zero(); 7];
    let mut fv2 = [T::zero(); 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod = kronrod + (f1 + f2) * WGK[j];
        abs_sum += WGK[j] * (f1.magnitude() + f2.magnitude());
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut asc = WGK[7] * (fc - mean).magnitude();
    for j in 0..7 {
        asc += WGK[j] * ((fv1[j] - mean).magnitude() + (fv2[j] - mean).magnitude());
    }
    let result = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).magnitude();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (result, err)
}
