//! Adaptive Gauss-Kronrod quadrature, including integrals over the whole
//! real line via the map `u = center + scale * tan(x)`.

use std::collections::BinaryHeap;
use std::f64::consts::FRAC_PI_2;

// 15-point Kronrod nodes on [-1, 1] (non-negative half) and weights.
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
// 7-point Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Largest number of subintervals kept by [`integrate`].
pub const MAX_SUBDIVISIONS: usize = 4000;

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Sum of the local Gauss/Kronrod discrepancies.
    pub error_estimate: f64,
    pub evaluations: usize,
}

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, (kronrod - gauss).abs() * half)
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error).is_eq()
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// `int_a^b f` to absolute tolerance `tol` (best effort).
///
/// Globally adaptive: the subinterval with the largest error estimate is
/// bisected until the summed estimate meets `tol`, the interval can no longer
/// be split, or [`MAX_SUBDIVISIONS`] is reached.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Integral {
    let (value, error) = gk15(&mut f, a, b);
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value, error });
    let mut total_error = error;
    while total_error > tol && heap.len() < MAX_SUBDIVISIONS {
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            heap.push(worst);
            break;
        }
        let (lv, le) = gk15(&mut f, worst.a, mid);
        let (rv, re) = gk15(&mut f, mid, worst.b);
        evaluations += 30;
        total_error += le + re - worst.error;
        heap.push(Piece { a: worst.a, b: mid, value: lv, error: le });
        heap.push(Piece { a: mid, b: worst.b, value: rv, error: re });
    }
    // Re-sum to avoid drift from the incremental update.
    let mut pieces = heap.into_vec();
    pieces.sort_by(|x, y| x.a.total_cmp(&y.a));
    Integral {
        value: pieces.iter().map(|p| p.value).sum(),
        error_estimate: pieces.iter().map(|p| p.error).sum(),
        evaluations,
    }
}

/// `int_{-inf}^{inf} f` through `u = center + scale tan(x)`. `scale` should be
/// of the order of the narrowest feature of `f`. `breaks` are extra points
/// (in `u`) where the interval is split, e.g. other resonance centres.
pub fn integrate_real_line(
    f: impl Fn(f64) -> f64,
    center: f64,
    scale: f64,
    breaks: &[f64],
    tol: f64,
) -> Integral {
    let to_x = |u: f64| ((u - center) / scale).atan();
    let mut nodes: Vec<f64> = breaks.iter().map(|&u| to_x(u)).collect();
    nodes.push(-FRAC_PI_2);
    nodes.push(0.0);
    nodes.push(FRAC_PI_2);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    let mapped = |x: f64| {
        let c = x.cos();
        if c <= 0.0 {
            return 0.0;
        }
        f(center + scale * x.tan()) * scale / (c * c)
    };
    let pieces = (nodes.len() - 1) as f64;
    let mut total = Integral {
        value: 0.0,
        error_estimate: 0.0,
        evaluations: 0,
    };
    for w in nodes.windows(2) {
        let part = integrate(mapped, w[0], w[1], tol / pieces);
        total.value += part.value;
        total.error_estimate += part.error_estimate;
        total.evaluations += part.evaluations;
    }
    total
}
