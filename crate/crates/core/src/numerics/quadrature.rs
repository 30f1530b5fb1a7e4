use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::distributions::std_normal_pdf;

// 10-point Gauss-Legendre on [-1, 1], positive half.
const GL10_NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL10_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_4,
    0.219_086_362_515_982_0,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

// Kronrod 15-point extension of 7-point Gauss, positive half (centre last).
const K15_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const K15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5 and the centre.
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Half-width of the truncated standard normal support. The mass outside
/// is below 2e-23.
const NORMAL_SUPPORT: f64 = 10.0;
const BASE_PANELS: usize = 20;
const MAX_DOUBLINGS: u32 = 9;

/// E[f(Y)] for standard normal Y on a composite 10-point Gauss-Legendre
/// rule with `panels` equal panels over [-10, 10].
pub fn normal_expectation_fixed<F: Fn(f64) -> f64>(f: F, panels: usize) -> f64 {
    let h = 2.0 * NORMAL_SUPPORT / panels as f64;
    let half = 0.5 * h;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = -NORMAL_SUPPORT + (p as f64 + 0.5) * h;
        let mut s = 0.0;
        for (x, w) in GL10_NODES.iter().zip(GL10_WEIGHTS.iter()) {
            let y1 = mid - half * x;
            let y2 = mid + half * x;
            s += w * (std_normal_pdf(y1) * f(y1) + std_normal_pdf(y2) * f(y2));
        }
        total += half * s;
    }
    total
}

/// E[f(Y)] for standard normal Y. Starts with 200 nodes and doubles until
/// two successive rules agree to within `abs_tol`.
pub fn normal_expectation<F: Fn(f64) -> f64>(f: F, abs_tol: f64) -> f64 {
    let mut panels = BASE_PANELS;
    let mut prev = normal_expectation_fixed(&f, panels);
    for _ in 0..MAX_DOUBLINGS {
        panels *= 2;
        let next = normal_expectation_fixed(&f, panels);
        if (next - prev).abs() < abs_tol {
            return next;
        }
        prev = next;
    }
    prev
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<const N: usize = 1> {
    pub value: [f64; N],
    pub error: [f64; N],
}

fn kronrod15<const N: usize, F: Fn(f64) -> [f64; N]>(f: &F, a: f64, b: f64) -> Integral<N> {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc.map(|v| K15_WEIGHTS[7] * v);
    let mut gauss = fc.map(|v| G7_WEIGHTS[3] * v);
    for i in 0..7 {
        let dx = half * K15_NODES[i];
        let (lo, hi) = (f(centre - dx), f(centre + dx));
        for c in 0..N {
            let pair = lo[c] + hi[c];
            kronrod[c] += K15_WEIGHTS[i] * pair;
            if i % 2 == 1 {
                gauss[c] += G7_WEIGHTS[i / 2] * pair;
            }
        }
    }
    let mut error = [0.0; N];
    for c in 0..N {
        error[c] = ((kronrod[c] - gauss[c]) * half).abs();
    }
    Integral {
        value: kronrod.map(|v| v * half),
        error,
    }
}

struct Piece<const N: usize> {
    a: f64,
    b: f64,
    est: Integral<N>,
    priority: f64,
}

impl<const N: usize> PartialEq for Piece<N> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<const N: usize> Eq for Piece<N> {}
impl<const N: usize> PartialOrd for Piece<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Piece<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Globally adaptive Gauss-Kronrod (7/15) integration of a scalar function
/// over the partition given by the sorted `breakpoints`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    breakpoints: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_pieces: usize,
) -> Integral {
    integrate_adaptive_vec(|x| [f(x)], breakpoints, abs_tol, rel_tol, max_pieces)
}

/// Vector-valued version of [`integrate_adaptive`]: all components share
/// the nodes. The piece with the largest scaled error is bisected until every
/// component satisfies `error <= max(abs_tol, rel_tol * |value|)` or
/// `max_pieces` is reached.
pub fn integrate_adaptive_vec<const N: usize, F: Fn(f64) -> [f64; N]>(
    f: F,
    breakpoints: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_pieces: usize,
) -> Integral<N> {
    let initial: Vec<(f64, f64, Integral<N>)> = breakpoints
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| (w[0], w[1], kronrod15(&f, w[0], w[1])))
        .collect();
    // Fixed per-component scales so the priority of a piece never changes.
    let mut scale = [0.0; N];
    for (_, _, est) in &initial {
        for c in 0..N {
            scale[c] += est.value[c].abs();
        }
    }
    let scale = scale.map(|s| if s > 0.0 { s } else { 1.0 });
    let priority = |est: &Integral<N>| (0..N).map(|c| est.error[c] / scale[c]).sum::<f64>();

    let mut heap: BinaryHeap<Piece<N>> = initial
        .into_iter()
        .map(|(a, b, est)| Piece {
            a,
            b,
            priority: priority(&est),
            est,
        })
        .collect();
    loop {
        let total = totals(&heap);
        let done = (0..N).all(|c| total.error[c] <= abs_tol.max(rel_tol * total.value[c].abs()));
        if heap.is_empty() || done || heap.len() >= max_pieces {
            return total;
        }
        let worst = heap.pop().expect("non-empty partition");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b || worst.priority == 0.0 {
            heap.push(worst);
            return totals(&heap);
        }
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let est = kronrod15(&f, a, b);
            heap.push(Piece {
                a,
                b,
                priority: priority(&est),
                est,
            });
        }
    }
}

// Sums in left-to-right order so the result does not depend on heap layout.
fn totals<const N: usize>(heap: &BinaryHeap<Piece<N>>) -> Integral<N> {
    let mut pieces: Vec<&Piece<N>> = heap.iter().collect();
    pieces.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut out = Integral {
        value: [0.0; N],
        error: [0.0; N],
    };
    for p in pieces {
        for c in 0..N {
            out.value[c] += p.est.value[c];
            out.error[c] += p.est.error[c];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_moments() {
        assert!((normal_expectation(|_| 1.0, 1e-12) - 1.0).abs() < 1e-14);
        assert!(normal_expectation(|y| y, 1e-12).abs() < 1e-14);
        assert!((normal_expectation(|y| y * y, 1e-12) - 1.0).abs() < 1e-12);
        assert!((normal_expectation(|y| y.powi(4), 1e-12) - 3.0).abs() < 1e-11);
    }

    #[test]
    fn normal_moment_generating_function() {
        // E[exp(tY)] = exp(t^2 / 2)
        let v = normal_expectation(|y| (0.7 * y).exp(), 1e-13);
        assert!((v - (0.245f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn kronrod_polynomials_and_endpoint_singularity() {
        let i = integrate_adaptive(|x| x.powi(5), &[0.0, 2.0], 0.0, 1e-14, 100);
        assert!((i.value[0] - 64.0 / 6.0).abs() < 1e-12);
        // int_0^1 x^{-1/2} dx = 2
        let bps: Vec<f64> = std::iter::once(0.0)
            .chain((0..40).map(|j| 0.5f64.powi(40 - j)))
            .chain([1.0])
            .collect();
        let i = integrate_adaptive(|x| x.powf(-0.5), &bps, 0.0, 1e-12, 4000);
        assert!((i.value[0] - 2.0).abs() < 1e-6, "{:?}", i.value);
    }

    #[test]
    fn narrow_peak_found_with_geometric_breakpoints() {
        // x (1-x)^1999 peaks near 5e-4; exact integral is B(2, 2000).
        let f = |x: f64| x * (1.0 - x).powi(1999);
        let exact = 1.0 / (2000.0 * 2001.0);
        let mut bps: Vec<f64> = (1..=30).rev().map(|j| 0.5f64.powi(j)).collect();
        bps.insert(0, 0.0);
        bps.push(1.0);
        let i = integrate_adaptive(f, &bps, 0.0, 1e-12, 1000);
        assert!(((i.value[0] - exact) / exact).abs() < 1e-10);
    }

    #[test]
    fn vector_integrand_shares_nodes() {
        let i = integrate_adaptive_vec(|x: f64| [x.exp(), x * x.exp()], &[0.0, 0.5, 1.0], 0.0, 1e-13, 100);
        let e = std::f64::consts::E;
        assert!((i.value[0] - (e - 1.0)).abs() < 1e-13);
        assert!((i.value[1] - 1.0).abs() < 1e-13);
    }
}
