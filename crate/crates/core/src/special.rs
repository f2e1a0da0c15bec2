//! Test-function apparatus: the radial eigenfunction φ₁ of the Laplacian
//! with eigenvalue 1, the decaying test function ψ = e^{−t}φ₁, the damping
//! multiplier m(t), weighted radial integrals, and the integral probe behind
//! the empirical constant C₁.
//!
//! φ₁ is the spherical average of a plane exponential,
//!
//! ```text
//! φ₁(x) = ∫_{S^{n−1}} e^{x·ω} dS_ω          (n ≥ 2),
//! φ₁(x) = e^x + e^{−x}                      (n = 1),
//! ```
//!
//! reduced for radial arguments to
//! `|S^{n−2}| ∫₀^π e^{r cos θ} sin^{n−2}θ dθ`. It satisfies Δφ₁ = φ₁ and
//! grows like `(2π)^{(n−1)/2} r^{−(n−1)/2} e^r`; beyond a switch radius all
//! evaluation is done in the log domain through that asymptotic expansion so
//! that large arguments never overflow.

use crate::error::{Error, Result};
use crate::field::RadialField;
use crate::num::Real;
use crate::params::ModelParams;
use crate::quad::{integrate_gl64, simpson_weights};

/// Radius beyond which φ₁ switches from direct quadrature to the asymptotic
/// expansion. Validated by an overlap test: both representations agree to
/// 1e−10 relative at the switch point for n up to 10.
pub const PHI1_ASYMPTOTIC_SWITCH: f64 = 60.0;

/// Surface measure of the unit sphere `S^{d−1}` in `R^d` (`|S⁰| = 2`).
pub fn unit_sphere_area<T: Real>(d: u32) -> T {
    assert!(d >= 1, "sphere dimension");
    let two_pi = T::of(2.0) * T::PI();
    let mut area = if d % 2 == 1 { T::of(2.0) } else { two_pi };
    let mut k = if d % 2 == 1 { 1 } else { 2 };
    while k + 2 <= d {
        area = area * two_pi / T::of_u32(k);
        k += 2;
    }
    area
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume<T: Real>(d: u32) -> T {
    unit_sphere_area::<T>(d) / T::of_u32(d)
}

/// φ₁ for n ≥ 2 by Gauss–Legendre quadrature in θ on panels refined toward
/// the θ = 0 peak (the integrand concentrates on a scale ~ r^{−1/2}).
fn phi1_quadrature<T: Real>(n: u32, r: T) -> T {
    let pi = T::PI();
    let mut edges = vec![T::zero()];
    let mut w = T::of(2.0) / (T::one() + r).sqrt();
    if w >= pi {
        edges.push(pi);
    } else {
        loop {
            edges.push(w);
            w *= T::of(2.0);
            if w >= pi {
                edges.push(pi);
                break;
            }
        }
    }
    let exponent = n as i32 - 2;
    let mut acc = T::zero();
    for pair in edges.windows(2) {
        acc += integrate_gl64(pair[0], pair[1], |theta: T| {
            let s = theta.sin();
            let weight = if exponent == 0 {
                T::one()
            } else {
                s.powi(exponent)
            };
            (r * theta.cos()).exp() * weight
        });
    }
    unit_sphere_area::<T>(n - 1) * acc
}

/// Modified-Bessel-type asymptotic series: φ₁(r) ≈
/// `(2π)^{(n−1)/2} r^{−(n−1)/2} e^r · S(r)` with
/// `S(r) = Σ_k a_k`, `a_0 = 1`, `a_k = a_{k−1} ((2k−1)² − μ)/(8kr)`,
/// `μ = (n−2)²`. Returns `ln S`.
fn log_asymptotic_correction<T: Real>(n: u32, r: T) -> T {
    let mu = T::of(((n as f64) - 2.0) * ((n as f64) - 2.0));
    let mut term = T::one();
    let mut sum = T::one();
    let mut prev = T::infinity();
    for k in 1..=14u32 {
        let odd = T::of(2.0 * k as f64 - 1.0);
        term = term * (odd * odd - mu) / (T::of(8.0 * k as f64) * r);
        let mag = term.abs();
        if mag > prev {
            break; // asymptotic tail started diverging; stop at the optimum
        }
        sum += term;
        prev = mag;
        if mag < T::of(1e-18) * sum.abs() {
            break;
        }
    }
    sum.ln()
}

/// ln φ₁ through the large-r expansion (valid above the switch radius).
fn log_phi1_asymptotic<T: Real>(n: u32, r: T) -> T {
    let half = T::of(0.5) * (T::of_u32(n) - T::one());
    r + half * ((T::of(2.0) * T::PI()).ln() - r.ln()) + log_asymptotic_correction(n, r)
}

/// ln φ₁(n, r); safe for arbitrarily large `r`.
pub fn log_phi1<T: Real>(n: u32, r: T) -> T {
    assert!(n >= 1, "dimension");
    let r = r.abs();
    if r <= T::of(PHI1_ASYMPTOTIC_SWITCH) {
        if n == 1 {
            // ln(2 cosh r)
            (T::of(2.0) * r.cosh()).ln()
        } else {
            phi1_quadrature(n, r).ln()
        }
    } else {
        log_phi1_asymptotic(n, r)
    }
}

/// φ₁(n, r). Overflows to +∞ only where the value genuinely exceeds the
/// floating-point range; use [`log_phi1`] there.
pub fn phi1<T: Real>(n: u32, r: T) -> T {
    assert!(n >= 1, "dimension");
    let r = r.abs();
    if r <= T::of(PHI1_ASYMPTOTIC_SWITCH) {
        if n == 1 {
            T::of(2.0) * r.cosh()
        } else {
            phi1_quadrature(n, r)
        }
    } else {
        log_phi1(n, r).exp()
    }
}

/// Test function ψ(x, t) = e^{−t} φ₁(x).
pub fn psi<T: Real>(n: u32, r: T, t: T) -> T {
    if r.abs() <= T::of(PHI1_ASYMPTOTIC_SWITCH) {
        (-t).exp() * phi1(n, r)
    } else {
        log_psi(n, r, t).exp()
    }
}

/// ln ψ(x, t) = ln φ₁ − t.
pub fn log_psi<T: Real>(n: u32, r: T, t: T) -> T {
    log_phi1(n, r) - t
}

/// Damping multiplier `m(t) = exp(μ (1+t)^{1−β} / (1−β))`.
///
/// For β > 1 it is nondecreasing with `0 < m(0) ≤ m(t) ≤ 1`, which is what
/// turns the damped functional identities into monotone ones. μ = 0 gives
/// m ≡ 1 (no damping). β = 1 is rejected: the formula is singular there and
/// that regime is out of scope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Multiplier<T> {
    pub mu: T,
    pub beta: T,
}

impl<T: Real> Multiplier<T> {
    pub fn new(mu: T, beta: T) -> Result<Self> {
        if !(mu >= T::zero()) || !mu.is_finite() {
            return Err(Error::Config(format!(
                "mu: must be finite and >= 0, got {mu}"
            )));
        }
        if mu > T::zero() && beta == T::one() {
            return Err(Error::Config(
                "beta: the multiplier exp(mu (1+t)^{1-beta}/(1-beta)) is singular at beta = 1"
                    .into(),
            ));
        }
        Ok(Self { mu, beta })
    }

    pub fn from_params(params: &ModelParams<T>) -> Result<Self> {
        Self::new(params.mu, params.beta)
    }

    /// m(t) for t ≥ 0.
    pub fn eval(&self, t: T) -> T {
        if self.mu == T::zero() {
            return T::one();
        }
        let one = T::one();
        (self.mu * (one + t).powf(one - self.beta) / (one - self.beta)).exp()
    }

    /// m(0).
    pub fn m0(&self) -> T {
        self.eval(T::zero())
    }
}

/// Weight applied inside [`radial_integral_against`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    One,
    Phi1,
}

/// `∫_{R^n} f(|x|) w(|x|) dx = |S^{n−1}| ∫₀^∞ f w r^{n−1} dr` by composite
/// Simpson on the field's own grid. The caller is responsible for `f` being
/// compactly supported inside the grid; [`RadialField::boundary_is_quiet`]
/// reports whether the support touches the boundary.
pub fn radial_integral_against<T: Real>(weight: Weight, f: &RadialField<T>) -> T {
    let n = f.n();
    let dr = f.dr();
    let w = simpson_weights::<T>(f.len());
    let mut acc = T::zero();
    for (i, (v, wi)) in f.values().iter().zip(&w).enumerate() {
        if *v == T::zero() {
            continue;
        }
        let r = dr * T::of_usize(i);
        let geom = if n == 1 {
            T::one()
        } else {
            r.powi(n as i32 - 1)
        };
        let wf = match weight {
            Weight::One => T::one(),
            Weight::Phi1 => phi1(n, r),
        };
        acc += *v * *wi * wf * geom;
    }
    unit_sphere_area::<T>(n) * acc * dr
}

/// One probed time of [`yz_probe`].
#[derive(Debug, Clone, Copy)]
pub struct YzRow<T> {
    pub t: T,
    /// `I(t) = ∫_{|x| ≤ t+R} ψ^{p/(p−1)} dx`.
    pub integral: T,
    /// `I(t) / (1+t)^{(n−1)(1 − p/(2(p−1)))}`.
    pub ratio: T,
}

/// Result of probing the weighted-ψ integral bound: the table of
/// `(t, I(t), ratio(t))` and the empirical constant `C₁ = max ratio`.
#[derive(Debug, Clone)]
pub struct YzProbe<T> {
    pub rows: Vec<YzRow<T>>,
    /// Exponent `(n−1)(1 − p/(2(p−1)))` of the decay envelope.
    pub decay_exponent: T,
    /// Empirical bound constant: the maximum of `ratio` over the grid.
    pub c1: T,
}

/// Evaluates `I(t) = ∫_{|x| ≤ t+R} ψ(x,t)^{p/(p−1)} dx` over `t_grid` by
/// log-domain radial quadrature at resolution `dr`, together with the ratio
/// against `(1+t)^{(n−1){1 − p/(2(p−1))}}`. Every integral is validated by
/// grid halving: a relative change above 1% is a resolution error.
pub fn yz_probe<T: Real>(
    n: u32,
    p: T,
    support_radius: T,
    t_grid: &[T],
    dr: T,
) -> Result<YzProbe<T>> {
    if !(p > T::one()) {
        return Err(Error::Config(format!("p: probe needs p > 1, got {p}")));
    }
    if !(support_radius >= T::one()) {
        return Err(Error::Config(format!(
            "R: probe needs R >= 1, got {support_radius}"
        )));
    }
    if t_grid.is_empty() {
        return Err(Error::Config(
            "t_grid: probe needs at least one time".into(),
        ));
    }
    if t_grid.iter().any(|t| !t.is_finite() || *t < T::zero()) {
        return Err(Error::Config(
            "t_grid: times must be finite and >= 0".into(),
        ));
    }
    if !(dr > T::zero()) {
        return Err(Error::Config(format!("dr: must be > 0, got {dr}")));
    }

    let pp = p / (p - T::one());
    let t_max = t_grid.iter().fold(T::zero(), |m, t| m.max(*t));
    let r_top = t_max + support_radius;
    let h = T::of(0.5) * dr;
    let table_len = (r_top / h).ceil().as_f64() as usize + 2;
    let log_tab: Vec<T> = (0..table_len)
        .map(|j| log_phi1(n, h * T::of_usize(j)))
        .collect();
    let area = unit_sphere_area::<T>(n);
    let geom = |r: T| {
        if n == 1 {
            T::one()
        } else {
            r.powi(n as i32 - 1)
        }
    };
    let decay_exponent = (T::of_u32(n) - T::one()) * (T::one() - p / (T::of(2.0) * (p - T::one())));

    // Integral of exp(pp (ln φ₁ − t)) r^{n−1} over [0, t+R] from table samples
    // with stride `stride`, closed by a trapezoid over the partial last cell.
    let integral_at = |t: T, stride: usize| -> T {
        let r_end = t + support_radius;
        let step = h * T::of_usize(stride);
        let m = (r_end / step).as_f64().floor() as usize;
        let samples: Vec<T> = (0..=m)
            .map(|k| {
                let r = step * T::of_usize(k);
                (pp * (log_tab[k * stride] - t)).exp() * geom(r)
            })
            .collect();
        let w = simpson_weights::<T>(samples.len());
        let mut acc = T::zero();
        for (s, wi) in samples.iter().zip(&w) {
            acc += *s * *wi;
        }
        let mut integral = acc * step;
        // partial cell [m·step, r_end]
        let r_m = step * T::of_usize(m);
        if r_end > r_m {
            let g_a = (pp * (log_tab[m * stride] - t)).exp() * geom(r_m);
            let g_b = (pp * (log_phi1(n, r_end) - t)).exp() * geom(r_end);
            integral += T::of(0.5) * (g_a + g_b) * (r_end - r_m);
        }
        area * integral
    };

    let mut rows = Vec::with_capacity(t_grid.len());
    let mut c1 = T::zero();
    for &t in t_grid {
        let fine = integral_at(t, 1);
        let coarse = integral_at(t, 2);
        let scale = fine.abs().max(T::of(1e-300));
        if (fine - coarse).abs() > T::of(0.01) * scale {
            return Err(Error::Numerical(format!(
                "integral probe unresolved at t = {t}: changed by more than 1% under grid halving \
                 ({coarse} vs {fine}); decrease dr"
            )));
        }
        let ratio = fine / (T::one() + t).powf(decay_exponent);
        if !ratio.is_finite() {
            return Err(Error::Numerical(format!(
                "integral probe produced non-finite ratio at t = {t}"
            )));
        }
        c1 = c1.max(ratio);
        rows.push(YzRow {
            t,
            integral: fine,
            ratio,
        });
    }
    Ok(YzProbe {
        rows,
        decay_exponent,
        c1,
    })
}
