//! Quadrature building blocks: Gauss–Legendre nodes and composite Simpson
//! weights. The Gauss–Legendre nodes are computed once in f64 by Newton
//! iteration on the Legendre recurrence and cached.

use std::sync::OnceLock;

use crate::num::Real;

/// Fixed order of the Gauss–Legendre rule used for smooth integrands.
pub const GL_ORDER: usize = 64;

/// Nodes and weights of the order-`n` Gauss–Legendre rule on (−1, 1).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x.abs();
        nodes[n - 1 - i] = x.abs();
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        let (_, d) = legendre_with_derivative(n, 0.0);
        nodes[n / 2] = 0.0;
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

/// Legendre polynomial `P_n(x)` and its derivative by the three-term
/// recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn gl64_table() -> &'static (Vec<f64>, Vec<f64>) {
    static TABLE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    TABLE.get_or_init(|| gauss_legendre(GL_ORDER))
}

/// ∫_a^b f by the 64-point Gauss–Legendre rule.
pub fn integrate_gl64<T: Real>(a: T, b: T, mut f: impl FnMut(T) -> T) -> T {
    let (nodes, weights) = gl64_table();
    let half = T::of(0.5) * (b - a);
    let mid = T::of(0.5) * (a + b);
    let mut acc = T::zero();
    for (&x, &w) in nodes.iter().zip(weights) {
        acc += T::of(w) * f(mid + half * T::of(x));
    }
    acc * half
}

/// ∫_a^b f by 64-point Gauss–Legendre on `panels` equal panels.
pub fn integrate_gl64_panels<T: Real>(a: T, b: T, panels: usize, mut f: impl FnMut(T) -> T) -> T {
    let h = (b - a) / T::of_usize(panels.max(1));
    let mut acc = T::zero();
    for k in 0..panels.max(1) {
        let lo = a + h * T::of_usize(k);
        acc += integrate_gl64(lo, lo + h, &mut f);
    }
    acc
}

/// Per-sample weights of the composite Simpson rule over `len` equidistant
/// samples (to be scaled by the spacing). Even interval counts use plain
/// composite Simpson; odd counts close with a 3/8 rule on the last three
/// intervals; a single interval falls back to trapezoid.
pub fn simpson_weights<T: Real>(len: usize) -> Vec<T> {
    assert!(len >= 2, "simpson weights need at least 2 samples");
    let n = len - 1;
    let mut w = vec![T::zero(); len];
    if n == 1 {
        w[0] = T::of(0.5);
        w[1] = T::of(0.5);
        return w;
    }
    let simpson_end = if n.is_multiple_of(2) { n } else { n - 3 };
    let third = T::one() / T::of(3.0);
    if simpson_end >= 2 {
        w[0] += third;
        w[simpson_end] += third;
        for (i, wi) in w.iter_mut().enumerate().take(simpson_end).skip(1) {
            *wi += if i % 2 == 1 {
                T::of(4.0) * third
            } else {
                T::of(2.0) * third
            };
        }
    }
    if n % 2 == 1 {
        // 3/8 rule over the last three intervals
        let c = T::of(3.0 / 8.0);
        w[n - 3] += c;
        w[n - 2] += T::of(3.0) * c;
        w[n - 1] += T::of(3.0) * c;
        w[n] += c;
    }
    w
}

/// Composite Simpson integral of samples at spacing `h`.
pub fn simpson<T: Real>(values: &[T], h: T) -> T {
    let w = simpson_weights::<T>(values.len());
    let mut acc = T::zero();
    for (v, wi) in values.iter().zip(&w) {
        acc += *v * *wi;
    }
    acc * h
}
