//! Quadrature rules: fixed Gauss-Legendre panels, adaptive Gauss-Kronrod,
//! and a cumulative antiderivative table used to build gauge phases.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::collections::BinaryHeap;
use std::sync::{Arc, OnceLock};

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

const PANEL_ORDER: usize = 10;

fn panel_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_ORDER))
}

/// Ten-point Gauss-Legendre integral of `f` over `[a, b]` (either orientation).
pub fn gauss_panel<F: Fn(f64) -> Complex64 + ?Sized>(f: &F, a: f64, b: f64) -> Complex64 {
    if a == b {
        return Complex64::new(0.0, 0.0);
    }
    let (nodes, weights) = panel_rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let mut sum = Complex64::new(0.0, 0.0);
    for (x, w) in nodes.iter().zip(weights) {
        sum += f(mid + half * x) * *w;
    }
    sum * half
}

// Kronrod 15-point extension of the 7-point Gauss rule (QUADPACK qk15 constants).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Returns (Kronrod estimate, |Kronrod - Gauss|).
pub fn gauss_kronrod_15<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(mid - dx) + f(mid + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Result of an adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

#[derive(PartialEq)]
struct Panel {
    error: f64,
    a: f64,
    b: f64,
    value: f64,
}

impl Eq for Panel {}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

const MAX_PANELS: usize = 4000;

/// Globally adaptive Gauss-Kronrod integration of a real integrand over `[a, b]`.
/// `f` must be smooth on the open interval; split at discontinuities before calling.
pub fn integrate_adaptive<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64, tol: f64) -> Result<Quadrature> {
    if a == b {
        return Ok(Quadrature { value: 0.0, error: 0.0 });
    }
    let (value, error) = gauss_kronrod_15(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { error, a, b, value });
    let (mut total, mut total_err) = (value, error);
    loop {
        let floor = 50.0 * f64::EPSILON * total.abs();
        if total_err <= tol.max(floor) {
            break;
        }
        if heap.len() >= MAX_PANELS {
            return Err(Error::NonConvergence {
                what: "adaptive quadrature",
                detail: format!("estimated error {total_err:e} above tolerance {tol:e}"),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let m = 0.5 * (worst.a + worst.b);
        let (v1, e1) = gauss_kronrod_15(f, worst.a, m);
        let (v2, e2) = gauss_kronrod_15(f, m, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel { error: e1, a: worst.a, b: m, value: v1 });
        heap.push(Panel { error: e2, a: m, b: worst.b, value: v2 });
    }
    // Re-sum to shed the drift of incremental updates.
    let value = heap.iter().map(|p| p.value).sum();
    let error = heap.iter().map(|p| p.error).sum();
    Ok(Quadrature { value, error })
}

/// Integrates over `[a, b]` split at `breaks`, distributing `tol` by length.
pub fn integrate_piecewise<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: f64,
) -> Result<Quadrature> {
    let points = split_points(a, b, breaks);
    let width = (b - a).abs();
    let mut out = Quadrature { value: 0.0, error: 0.0 };
    for w in points.windows(2) {
        let share = if width > 0.0 { tol * (w[1] - w[0]).abs() / width } else { tol };
        let q = integrate_adaptive(f, w[0], w[1], share)?;
        out.value += q.value;
        out.error += q.error;
    }
    Ok(out)
}

/// `[a, ..., b]` with the breakpoints strictly between `a` and `b` inserted in travel order.
pub fn split_points(a: f64, b: f64, breaks: &[f64]) -> Vec<f64> {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > lo && x < hi).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    if a > b {
        inner.reverse();
    }
    let mut pts = Vec::with_capacity(inner.len() + 2);
    pts.push(a);
    pts.extend(inner);
    pts.push(b);
    pts
}

pub type ComplexFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Tabulated antiderivative `F(x) = int_{origin}^{x} f` with exact (panel-rule) evaluation
/// between table nodes. The integrand must be smooth inside every cell; cell boundaries
/// always include the supplied knots.
#[derive(Clone)]
pub struct CumulativeIntegral {
    integrand: ComplexFn,
    nodes: Vec<f64>,
    values: Vec<Complex64>,
    max_cell: f64,
}

impl std::fmt::Debug for CumulativeIntegral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CumulativeIntegral")
            .field("x_min", &self.nodes[0])
            .field("x_max", &self.nodes[self.nodes.len() - 1])
            .field("cells", &(self.nodes.len() - 1))
            .finish()
    }
}

impl CumulativeIntegral {
    pub fn new(integrand: ComplexFn, x_min: f64, x_max: f64, knots: &[f64], max_cell: f64) -> Self {
        let fixed = split_points(x_min, x_max, knots);
        let mut nodes = vec![x_min];
        for w in fixed.windows(2) {
            let n = ((w[1] - w[0]) / max_cell).ceil().max(1.0) as usize;
            for j in 1..=n {
                nodes.push(if j == n { w[1] } else { w[0] + (w[1] - w[0]) * j as f64 / n as f64 });
            }
        }
        let mut values = Vec::with_capacity(nodes.len());
        let mut acc = Complex64::new(0.0, 0.0);
        values.push(acc);
        for w in nodes.windows(2) {
            acc += gauss_panel(&*integrand, w[0], w[1]);
            values.push(acc);
        }
        Self { integrand, nodes, values, max_cell }
    }

    pub fn origin(&self) -> f64 {
        self.nodes[0]
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let f = &*self.integrand;
        let first = self.nodes[0];
        let last = *self.nodes.last().expect("non-empty");
        if x < first {
            return -self.walk(first, x);
        }
        if x > last {
            return self.values[self.values.len() - 1] + self.walk(last, x);
        }
        let i = match self.nodes.binary_search_by(|n| n.total_cmp(&x)) {
            Ok(i) => return self.values[i],
            Err(i) => i - 1,
        };
        self.values[i] + gauss_panel(&f, self.nodes[i], x)
    }

    /// Integral over the interval spanned by `from` and `to`, in cells no wider than `max_cell`.
    fn walk(&self, from: f64, to: f64) -> Complex64 {
        let f = &*self.integrand;
        let (lo, hi) = if from < to { (from, to) } else { (to, from) };
        let n = ((hi - lo) / self.max_cell).ceil().max(1.0) as usize;
        let h = (hi - lo) / n as f64;
        (0..n).map(|j| gauss_panel(&f, lo + j as f64 * h, lo + (j + 1) as f64 * h)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(10);
        for deg in 0..20 {
            let num: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((num - exact).abs() < 1e-14, "degree {deg}: {num} vs {exact}");
        }
    }

    #[test]
    fn kronrod_exact_to_degree_23_and_gauss_to_13() {
        for deg in 0..=23 {
            let f = |x: f64| x.powi(deg) + 1.0;
            let (k, _) = gauss_kronrod_15(&f, 0.0, 1.0);
            let exact = 1.0 / (deg as f64 + 1.0) + 1.0;
            assert!((k - exact).abs() < 1e-14, "kronrod degree {deg}");
            if deg <= 13 {
                let (_, err) = gauss_kronrod_15(&f, 0.0, 1.0);
                assert!(err < 1e-14, "gauss degree {deg}: {err}");
            }
        }
    }

    #[test]
    fn adaptive_gaussian_integral() {
        let f = |x: f64| (-0.5 * x * x).exp();
        let q = integrate_adaptive(&f, -12.0, 12.0, 1e-12).unwrap();
        assert!((q.value - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-11);
    }

    #[test]
    fn piecewise_handles_jumps() {
        let f = |x: f64| if x.abs() <= 0.5 { 3.0 } else { 0.0 };
        let q = integrate_piecewise(&f, -2.0, 2.0, &[-0.5, 0.5], 1e-12).unwrap();
        assert!((q.value - 3.0).abs() < 1e-14);
    }

    #[test]
    fn split_points_orders_by_direction() {
        assert_eq!(split_points(0.0, 3.0, &[2.0, 1.0, 5.0]), vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(split_points(3.0, 0.0, &[2.0, 1.0, 1.0]), vec![3.0, 2.0, 1.0, 0.0]);
    }

    #[test]
    fn cumulative_integral_of_cosine_is_sine() {
        let f: ComplexFn = Arc::new(|x: f64| Complex64::new(x.cos(), 0.0));
        let c = CumulativeIntegral::new(f, -3.0, 4.0, &[0.3], 0.05);
        for &x in &[-3.0f64, -2.71, 0.0, 0.3, 1.234, 4.0, 5.5, -4.2] {
            let exact = x.sin() - (-3.0f64).sin();
            assert!((c.eval(x).re - exact).abs() < 1e-13, "x = {x}");
        }
    }
}
