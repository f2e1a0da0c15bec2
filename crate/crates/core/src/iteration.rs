//! The iteration argument, run as explicit arithmetic.
//!
//! Starting from a first lower bound on `F₀(t) = ∫u dx` the argument feeds
//! `F₀(t) ≥ C₄ m(0) ∫₀ᵗ∫₀ˢ (1+r)^{−n(q−1)} F₀^q(r) dr ds` into itself,
//! producing bounds `F₀(t) ≥ A_j (1+t)^{−a_j} t^{b_j}` with
//!
//! ```text
//! a_{j+1} = q a_j + n(q−1),    b_{j+1} = q b_j + 2,
//! A_{j+1} = C₄ m(0) A_j^q / (q b_j + 2)²,
//! ```
//!
//! on the *combined* branch seeded by the derivative nonlinearity
//! (`A₁ = C₃ ε^p`, `a₁ = (n−1)p/2`, `b₁ = n+1`) and on the *improved*
//! branch seeded by linear growth (`Ã₁ = C₁₀ ε^q`, `ã₁ = n(q−1)`,
//! `b̃₁ = q+2`). The amplitudes collapse to
//! `A_j ≥ exp(q^{j−1}(log A₁ − S_q(∞)))` with a convergent series `S_q`,
//! which turns the family of bounds into the envelope
//! `F₀(t) ≥ (1+t)^n t^{−2/(q−1)} exp(q^{j−1} J(t))`: wherever the rate
//! `J(t)` is positive the envelope diverges in `j`, and `J(t) ≥ 1` is
//! guaranteed from an explicit time `C₇ ε^{−k₁}` (resp. `C₁₃ ε^{−k₂}`) on —
//! the exported blow-up time bound.
//!
//! The engine iterates the equality branch of the amplitude recursion (the
//! worst case consistent with the derivation), so for the supplied constants
//! every emitted envelope is a certified lower bound. All amplitude
//! arithmetic is done in the log domain; `q^{j−1}` saturates at 1e300,
//! beyond which a divergent envelope is reported as +∞.

use crate::error::{Error, Result};
use crate::exponents::{lifespan_exponent_combined, lifespan_exponent_improved};
use crate::num::Real;
use crate::params::ModelParams;
use crate::special::unit_ball_volume;

/// Which seed the iteration starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Seeded by the derivative-nonlinearity bound; exponent `k₁`.
    Combined,
    /// Seeded by linear growth of `F₀`; exponent `k₂`.
    Improved,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Branch::Combined => write!(f, "combined"),
            Branch::Improved => write!(f, "improved"),
        }
    }
}

/// Integrals of the (unit-amplitude) initial data against the weights used
/// by the argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataIntegrals<T> {
    /// `∫ f φ₁ dx`.
    pub int_f_phi1: T,
    /// `∫ g φ₁ dx`; must be positive (g does not vanish identically).
    pub int_g_phi1: T,
    /// `∫ g dx`.
    pub int_g: T,
}

/// Hölder constant `C₄ = (v_n R^n)^{−(q−1)}` of the iteration frame, where
/// `v_n` is the unit-ball volume: from
/// `F₀(t) ≤ (∫|u|^q dx)^{1/q} · vol(B_{t+R})^{(q−1)/q}` and
/// `t + R ≤ R(1+t)` for `R ≥ 1`.
pub fn holder_constant<T: Real>(n: u32, q: T, support_radius: T) -> T {
    let vn = unit_ball_volume::<T>(n);
    (vn * support_radius.powi(n as i32)).powf(-(q - T::one()))
}

/// The explicit constants C₁…C₁₃ of the two iteration branches.
///
/// `c7`/`c13` are absent when the corresponding lifespan-exponent
/// denominator is not positive (the branch's bound does not apply).
#[derive(Debug, Clone, PartialEq)]
pub struct IterationConstants<T> {
    /// m(0).
    pub m0: T,
    /// Data integrals the constants were built from (unit amplitude).
    pub data: DataIntegrals<T>,
    /// Empirical bound constant of the ψ-integral probe.
    pub c1: T,
    /// `C₂ = C₁^{1−p} (m₀/2 · ∫gφ₁)^p`.
    pub c2: T,
    /// `C₃ = m₀ C₂ / (n(n+1))`: combined-seed amplitude `A₁ = C₃ ε^p`.
    pub c3: T,
    /// Hölder constant of the iteration frame.
    pub c4: T,
    /// `C₅ = C₄ m₀ / (n+1+2/(q−1))²`: combined amplitude-series constant.
    pub c5: T,
    /// `C₆ = ((n−1)p/2 + n) log 2 + S_q(∞)`.
    pub c6: T,
    /// Combined bound constant: `T ≤ max(1, C₇ ε^{−k₁})`.
    pub c7: Option<T>,
    /// `C₈ = m₀ ∫g dx`: linear growth slope `F₀ ≥ C₈ ε t`.
    pub c8: T,
    /// `C₉ = C₄ m₀ C₈^q`.
    pub c9: T,
    /// `C₁₀ = C₉ / ((q+1)(q+2))`: improved-seed amplitude `Ã₁ = C₁₀ ε^q`.
    pub c10: T,
    /// `C₁₁ = C₄ m₀ / (q+2+2/(q−1))²`: improved amplitude-series constant.
    pub c11: T,
    /// `C₁₂ = S̃_q(∞) + nq log 2`.
    pub c12: T,
    /// Improved bound constant: `T ≤ max(1, C₁₃ ε^{−k₂})`.
    pub c13: Option<T>,
    /// `S_q(∞)` with its rigorous tail bound.
    pub s_inf_combined: (T, T),
    /// `S̃_q(∞)` with its rigorous tail bound.
    pub s_inf_improved: (T, T),
}

/// Partial sum of `S_q(j) = Σ_{k=1}^{j−1} (2k log q − log c) / q^k`.
fn s_partial<T: Real>(q: T, c: T, j: u32) -> T {
    let log_q = q.ln();
    let log_c = c.ln();
    let mut sum = T::zero();
    let mut qk = q;
    for k in 1..j {
        sum += (T::of(2.0) * T::of_u32(k) * log_q - log_c) / qk;
        qk *= q;
    }
    sum
}

/// Limit of `S_q(j)` as j → ∞: partial sum plus a rigorous geometric tail
/// bound, extended until the tail is below `1e−12 (1 + |value|)`.
fn s_series<T: Real>(q: T, c: T) -> (T, T) {
    let log_q = q.ln();
    let log_c_abs = c.ln().abs();
    let x = q.recip();
    let one_minus_x = T::one() - x;
    // tail over k >= kk: 2 log q Σ k x^k + |log c| Σ x^k, both closed forms
    let tail_from = |kk: u32, x_pow_kk: T| -> T {
        let kf = T::of_u32(kk);
        let sum_k = x_pow_kk * (kf * one_minus_x + x) / (one_minus_x * one_minus_x);
        let sum_1 = x_pow_kk / one_minus_x;
        T::of(2.0) * log_q * sum_k + log_c_abs * sum_1
    };
    let log_c = c.ln();
    let mut sum = T::zero();
    let mut x_pow = x; // x^k
    let mut k = 1u32;
    loop {
        sum += (T::of(2.0) * T::of_u32(k) * log_q - log_c) * x_pow;
        let tail = tail_from(k + 1, x_pow * x);
        if tail < T::of(1e-12) * (T::one() + sum.abs()) || k >= 5_000_000 {
            return (sum, tail);
        }
        x_pow *= x;
        k += 1;
    }
}

impl<T: Real> IterationConstants<T> {
    /// Builds the constant chain from the model parameters, the data
    /// integrals of the unit-amplitude profiles, the probe constant `c1`
    /// and the Hölder constant `c4`.
    pub fn build(params: &ModelParams<T>, data: &DataIntegrals<T>, c1: T, c4: T) -> Result<Self> {
        let (nf, p, q) = (params.nf(), params.p, params.q);
        let one = T::one();
        let two = T::of(2.0);
        if !(c1 > T::zero()) || !c1.is_finite() {
            return Err(Error::Config(format!(
                "C1: must be finite and > 0, got {c1}"
            )));
        }
        if !(c4 > T::zero()) || !c4.is_finite() {
            return Err(Error::Config(format!(
                "C4: must be finite and > 0, got {c4}"
            )));
        }
        if !(data.int_g_phi1 > T::zero()) {
            return Err(Error::Condition(format!(
                "int g phi1 > 0: g must not vanish identically, got {}",
                data.int_g_phi1
            )));
        }
        if !(data.int_g > T::zero()) {
            return Err(Error::Condition(format!(
                "int g > 0: g must not vanish identically, got {}",
                data.int_g
            )));
        }
        let m0 = crate::special::Multiplier::from_params(params)?.m0();

        let c2 = c1.powf(one - p) * (m0 / two * data.int_g_phi1).powf(p);
        let c3 = m0 * c2 / (nf * (nf + one));
        let c5 = c4 * m0 / (nf + one + two / (q - one)).powi(2);
        let c8 = m0 * data.int_g;
        let c9 = c4 * m0 * c8.powf(q);
        let c10 = c9 / ((q + one) * (q + two));
        let c11 = c4 * m0 / (q + two + two / (q - one)).powi(2);

        let s_inf_combined = s_series(q, c5);
        let s_inf_improved = s_series(q, c11);

        let c6 = ((nf - one) * p / two + nf) * two.ln() + s_inf_combined.0;
        let combined_denom = two * q + two - (nf - one) * p * (q - one);
        let c7 = (combined_denom > T::zero()).then(|| {
            let expo = two * (q - one) / combined_denom;
            (c3.recip() * (one + c6).exp()).powf(expo)
        });

        let c12 = s_inf_improved.0 + nf * q * two.ln();
        let improved_denom = q + two + two / (q - one) - nf * q;
        let c13 = (improved_denom > T::zero())
            .then(|| ((c12 + one).exp() / c10).powf(improved_denom.recip()));

        let built = Self {
            m0,
            data: *data,
            c1,
            c2,
            c3,
            c4,
            c5,
            c6,
            c7,
            c8,
            c9,
            c10,
            c11,
            c12,
            c13,
            s_inf_combined,
            s_inf_improved,
        };
        built.validate(params)?;
        Ok(built)
    }

    /// Checks the defining equalities of the constant chain (to 1e−12
    /// relative) and positivity of every constant.
    pub fn validate(&self, params: &ModelParams<T>) -> Result<()> {
        let (nf, p, q) = (params.nf(), params.p, params.q);
        let one = T::one();
        let two = T::of(2.0);
        let close = |name: &str, a: T, b: T| -> Result<()> {
            if (a - b).abs() > T::of(1e-12) * (a.abs() + b.abs() + T::of(1e-300)) {
                return Err(Error::Numerical(format!(
                    "constant chain broken: {name}: {a} vs {b}"
                )));
            }
            Ok(())
        };
        close(
            "C2 = C1^{1-p} (m0/2 int_g_phi1)^p",
            self.c2,
            self.c1.powf(one - p) * (self.m0 / two * self.data.int_g_phi1).powf(p),
        )?;
        close(
            "C3 = m0 C2/(n(n+1))",
            self.c3,
            self.m0 * self.c2 / (nf * (nf + one)),
        )?;
        close(
            "C5 = C4 m0/(n+1+2/(q-1))^2",
            self.c5,
            self.c4 * self.m0 / (nf + one + two / (q - one)).powi(2),
        )?;
        close("C8 = m0 int_g", self.c8, self.m0 * self.data.int_g)?;
        close(
            "C9 = C4 m0 C8^q",
            self.c9,
            self.c4 * self.m0 * self.c8.powf(q),
        )?;
        close(
            "C10 = C9/((q+1)(q+2))",
            self.c10,
            self.c9 / ((q + one) * (q + two)),
        )?;
        close(
            "C11 = C4 m0/(q+2+2/(q-1))^2",
            self.c11,
            self.c4 * self.m0 / (q + two + two / (q - one)).powi(2),
        )?;
        let positives = [
            ("m0", self.m0),
            ("C1", self.c1),
            ("C2", self.c2),
            ("C3", self.c3),
            ("C4", self.c4),
            ("C5", self.c5),
            ("C8", self.c8),
            ("C9", self.c9),
            ("C10", self.c10),
            ("C11", self.c11),
        ];
        for (name, v) in positives {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::Numerical(format!(
                    "constant {name} not positive/finite: {v}"
                )));
            }
        }
        for (name, v) in [("C7", self.c7), ("C13", self.c13)] {
            if let Some(v) = v {
                if !(v > T::zero()) || !v.is_finite() {
                    return Err(Error::Numerical(format!(
                        "constant {name} not positive/finite: {v}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn series_constant(&self, branch: Branch) -> T {
        match branch {
            Branch::Combined => self.c5,
            Branch::Improved => self.c11,
        }
    }

    fn s_inf(&self, branch: Branch) -> T {
        match branch {
            Branch::Combined => self.s_inf_combined.0,
            Branch::Improved => self.s_inf_improved.0,
        }
    }
}

/// Seed `(log A₁, a₁, b₁)` of a branch at amplitude `eps`.
fn seed<T: Real>(
    branch: Branch,
    params: &ModelParams<T>,
    constants: &IterationConstants<T>,
    eps: T,
) -> (T, T, T) {
    let (nf, p, q) = (params.nf(), params.p, params.q);
    let one = T::one();
    let two = T::of(2.0);
    match branch {
        Branch::Combined => (
            constants.c3.ln() + p * eps.ln(),
            (nf - one) * p / two,
            nf + one,
        ),
        Branch::Improved => (constants.c10.ln() + q * eps.ln(), nf * (q - one), q + two),
    }
}

/// The iteration state at index `j`: exponents from the closed forms, the
/// log-domain amplitude from the recursion, and the partial series sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationState<T> {
    pub branch: Branch,
    pub j: u32,
    /// Exponent `a_j` of `(1+t)^{−a_j}`.
    pub a: T,
    /// Exponent `b_j` of `t^{b_j}`.
    pub b: T,
    /// `log A_j` from the equality branch of the amplitude recursion.
    pub log_amp: T,
    /// Partial sum `S_q(j)` of the branch's amplitude series.
    pub s_partial: T,
}

/// Closed-form exponents `(a_j, b_j)` of a branch.
pub fn closed_form_exponents<T: Real>(branch: Branch, params: &ModelParams<T>, j: u32) -> (T, T) {
    let (nf, p, q) = (params.nf(), params.p, params.q);
    let one = T::one();
    let two = T::of(2.0);
    let qj1 = q.powi(j as i32 - 1);
    match branch {
        Branch::Combined => (
            qj1 * ((nf - one) * p / two + nf) - nf,
            qj1 * (nf + one + two / (q - one)) - two / (q - one),
        ),
        Branch::Improved => (
            nf * q.powi(j as i32) - nf,
            qj1 * (q + two + two / (q - one)) - two / (q - one),
        ),
    }
}

/// State of the iteration at index `j ≥ 1` for data amplitude `eps`.
pub fn sequence<T: Real>(
    branch: Branch,
    params: &ModelParams<T>,
    constants: &IterationConstants<T>,
    eps: T,
    j: u32,
) -> Result<IterationState<T>> {
    if j < 1 {
        return Err(Error::Config("j: iteration index starts at 1".into()));
    }
    if !(eps > T::zero()) {
        return Err(Error::Config(format!(
            "eps: sequence needs eps > 0, got {eps}"
        )));
    }
    let q = params.q;
    let (mut log_amp, _, mut b) = seed(branch, params, constants, eps);
    let step_const = (constants.c4 * constants.m0).ln();
    for _ in 1..j {
        log_amp = q * log_amp + step_const - T::of(2.0) * (q * b + T::of(2.0)).ln();
        b = q * b + T::of(2.0);
    }
    let (a, b_closed) = closed_form_exponents(branch, params, j);
    Ok(IterationState {
        branch,
        j,
        a,
        b: b_closed,
        log_amp,
        s_partial: s_partial(q, constants.series_constant(branch), j),
    })
}

/// `S_q(∞)` of a branch: (value, rigorous tail bound).
pub fn s_limit<T: Real>(branch: Branch, q: T, constants: &IterationConstants<T>) -> (T, T) {
    s_series(q, constants.series_constant(branch))
}

/// The divergence rate `J(t)` (resp. `J̃(t)`): the envelope below is
/// `(1+t)^n t^{−2/(q−1)} exp(q^{j−1} J(t))`, so positivity of the rate is
/// what forces blow-up.
pub fn envelope_rate<T: Real>(
    branch: Branch,
    params: &ModelParams<T>,
    constants: &IterationConstants<T>,
    eps: T,
    t: T,
) -> T {
    let (nf, p, q) = (params.nf(), params.p, params.q);
    let one = T::one();
    let two = T::of(2.0);
    let (log_a1, _, _) = seed(branch, params, constants, eps);
    match branch {
        Branch::Combined => {
            -((nf - one) * p / two + nf) * (one + t).ln()
                + (nf + one + two / (q - one)) * t.ln()
                + log_a1
                - constants.s_inf(Branch::Combined)
        }
        Branch::Improved => {
            -nf * q * (one + t).ln() + (q + two + two / (q - one)) * t.ln() + log_a1
                - constants.s_inf(Branch::Improved)
        }
    }
}

/// Lower envelope of `F₀(t)` at iteration index `j`: evaluated in the log
/// domain with saturation (`q^{j−1}` capped at 1e300; a divergent envelope
/// reports +∞, a collapsing one 0).
pub fn envelope<T: Real>(
    branch: Branch,
    params: &ModelParams<T>,
    constants: &IterationConstants<T>,
    eps: T,
    j: u32,
    t: T,
) -> T {
    assert!(j >= 1, "iteration index starts at 1");
    assert!(t > T::zero(), "envelope needs t > 0");
    let (nf, q) = (params.nf(), params.q);
    let one = T::one();
    let two = T::of(2.0);
    let rate = envelope_rate(branch, params, constants, eps, t);
    let log_weight = T::of_u32(j - 1) * q.ln();
    let cap = T::of(1e300).ln();
    let algebraic = nf * (one + t).ln() - two / (q - one) * t.ln();
    let gain = if rate == T::zero() {
        T::zero() // envelope independent of j where the rate vanishes
    } else if log_weight > cap {
        return if rate > T::zero() {
            T::infinity()
        } else {
            T::zero()
        };
    } else {
        log_weight.exp() * rate
    };
    let log_env = algebraic + gain;
    if log_env > T::of(709.0) {
        T::infinity()
    } else {
        log_env.exp()
    }
}

/// Explicit blow-up time bound `max(1, C ε^{−k})` of a branch. The `max(1,·)`
/// floor reflects that the rate estimate behind the bound holds for t ≥ 1.
/// At the returned time the branch's divergence rate is ≥ 1 (asserted).
///
/// The bound is reported for every `eps`: the underlying theory only claims
/// it for sufficiently small amplitudes, and no smallness threshold is
/// checked here (none is constructively available).
pub fn bound_time<T: Real>(
    branch: Branch,
    params: &ModelParams<T>,
    constants: &IterationConstants<T>,
    eps: T,
) -> Result<T> {
    if !(eps > T::zero()) {
        return Err(Error::Config(format!(
            "eps: bound needs eps > 0, got {eps}"
        )));
    }
    let (c, k) = match branch {
        Branch::Combined => (
            constants.c7.ok_or_else(|| {
                Error::Condition(
                    "combined bound constant C7 undefined: 2q+2-(n-1)p(q-1) <= 0".into(),
                )
            })?,
            lifespan_exponent_combined(params)?,
        ),
        Branch::Improved => (
            constants.c13.ok_or_else(|| {
                Error::Condition(
                    "improved bound constant C13 undefined: q+2+2/(q-1)-nq <= 0".into(),
                )
            })?,
            lifespan_exponent_improved(params)?,
        ),
    };
    let t = (c * eps.powf(-k)).max(T::one());
    if t.is_finite() {
        let rate = envelope_rate(branch, params, constants, eps, t);
        assert!(
            rate >= T::one() - T::of(1e-9),
            "divergence rate {rate} < 1 at the returned bound t = {t} ({branch})"
        );
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::{check_combined, check_improved};

    fn baseline() -> (ModelParams<f64>, IterationConstants<f64>) {
        let params = ModelParams::new(1, 1.0, 2.0, 3.0, 2.0, 1.0, 0.1).unwrap();
        let data = DataIntegrals {
            int_f_phi1: 1.0,
            int_g_phi1: 1.0,
            int_g: 1.0,
        };
        let c4 = holder_constant(1, 2.0, 1.0);
        let constants = IterationConstants::build(&params, &data, 1.0, c4).unwrap();
        (params, constants)
    }

    #[test]
    fn constant_chain_hand_values() {
        let (_, k) = baseline();
        let m0 = (-1.0f64).exp();
        // C2 = C1^{1-p} (m0/2 · 1)^p = (e^{-1}/2)^3
        let c2 = (m0 / 2.0).powi(3);
        assert!((k.c2 - c2).abs() < 1e-15 * c2);
        // C3 = m0 C2 / (n(n+1)) = C2 e^{-1}/2
        let c3 = c2 * m0 / 2.0;
        assert!((k.c3 - c3).abs() < 1e-15 * c3);
        // C8 = m0 · 1
        assert!((k.c8 - m0).abs() < 1e-15);
    }

    #[test]
    fn vanishing_data_rejected() {
        let params = ModelParams::new(1, 1.0, 2.0, 3.0, 2.0, 1.0, 0.1).unwrap();
        let data = DataIntegrals {
            int_f_phi1: 1.0,
            int_g_phi1: 0.0,
            int_g: 1.0,
        };
        assert!(IterationConstants::build(&params, &data, 1.0, 0.5).is_err());
    }

    #[test]
    fn holder_constant_discrete_check() {
        // ∫|u|^q dx >= C4 (1+t)^{-n(q-1)} F0^q for fields supported in B_{t+R}
        use crate::field::RadialField;
        use crate::special::{radial_integral_against, Weight};
        let (n, q, r_support, t) = (2u32, 1.8f64, 1.0f64, 0.7f64);
        let c4 = holder_constant(n, q, r_support);
        let edge = t + r_support;
        for shape in 0..3 {
            let dr = edge / 800.0;
            let u = RadialField::from_fn(n, dr, 801, |r: f64| {
                if r >= edge {
                    return 0.0;
                }
                match shape {
                    0 => (edge - r).powi(2),
                    1 => 1.0 + (3.0 * r).sin().powi(2),
                    _ => (-3.0 * r * r).exp(),
                }
            })
            .unwrap();
            let f0 = radial_integral_against(Weight::One, &u);
            let uq = RadialField::from_fn(n, dr, 801, |r: f64| {
                if r >= edge {
                    return 0.0;
                }
                let v: f64 = match shape {
                    0 => (edge - r).powi(2),
                    1 => 1.0 + (3.0 * r).sin().powi(2),
                    _ => (-3.0 * r * r).exp(),
                };
                v.powf(q)
            })
            .unwrap();
            let int_uq = radial_integral_against(Weight::One, &uq);
            let bound = c4 * (1.0 + t).powf(-(n as f64) * (q - 1.0)) * f0.powf(q);
            assert!(
                int_uq >= bound * (1.0 - 1e-9),
                "shape {shape}: {int_uq} < {bound}"
            );
        }
    }

    #[test]
    fn seeds_match_first_step() {
        let (params, k) = baseline();
        let s = sequence(Branch::Combined, &params, &k, 0.1, 1).unwrap();
        assert_eq!(s.a, 0.0); // (n-1)p/2 with n = 1
        assert_eq!(s.b, 2.0); // n+1
        assert!((s.log_amp - (k.c3.ln() + 3.0 * 0.1f64.ln())).abs() < 1e-12);
        assert_eq!(s.s_partial, 0.0);

        let params2 = ModelParams::new(2, 1.0, 2.0, 5.0, 2.0, 1.0, 0.1).unwrap();
        let data = DataIntegrals {
            int_f_phi1: 1.0,
            int_g_phi1: 1.0,
            int_g: 1.0,
        };
        let k2 =
            IterationConstants::build(&params2, &data, 1.0, holder_constant(2, 2.0, 1.0)).unwrap();
        let s2 = sequence(Branch::Improved, &params2, &k2, 0.1, 2).unwrap();
        assert_eq!(s2.a, 6.0); // n q^j − n = 2·4−2
        assert_eq!(s2.b, 10.0); // recursion 4 → 2·4+2
    }

    #[test]
    fn closed_form_matches_recursion_sampled() {
        let cases = [
            (1u32, 3.0, 2.0),
            (2, 2.0, 2.0),
            (3, 2.0, 1.5),
            (2, 5.0, 1.8),
            (4, 1.5, 1.25),
        ];
        for (n, p, q) in cases {
            let params = ModelParams::new(n, 1.0, 2.0, p, q, 1.0, 0.1).unwrap();
            for branch in [Branch::Combined, Branch::Improved] {
                let (nf, two) = (n as f64, 2.0f64);
                let (mut a, mut b) = match branch {
                    Branch::Combined => ((nf - 1.0) * p / two, nf + 1.0),
                    Branch::Improved => (nf * (q - 1.0), q + two),
                };
                for j in 1..=40u32 {
                    let (ca, cb) = closed_form_exponents(branch, &params, j);
                    let scale_a = a.abs().max(1.0);
                    let scale_b = b.abs().max(1.0);
                    assert!(
                        (ca - a).abs() < 1e-9 * scale_a,
                        "{branch} n={n} p={p} q={q} j={j}: a {ca} vs {a}"
                    );
                    assert!(
                        (cb - b).abs() < 1e-9 * scale_b,
                        "{branch} n={n} p={p} q={q} j={j}: b {cb} vs {b}"
                    );
                    a = q * a + nf * (q - 1.0);
                    b = q * b + 2.0;
                }
            }
        }
        // hand-checked chain: q=2, n=3, p=2: b = 4 → 10 → 22
        let params = ModelParams::new(3, 1.0, 2.0, 2.0, 2.0, 1.0, 0.1).unwrap();
        let (_, b3) = closed_form_exponents(Branch::Combined, &params, 3);
        assert_eq!(b3, 22.0);
    }

    #[test]
    fn series_limit_geometric_oracles() {
        // q = 2, c = 1: Σ 2k log2 / 2^k = 2 log2 · Σ k/2^k = 4 log 2
        let (v, tail) = s_series(2.0f64, 1.0);
        assert!((v - 4.0 * 2f64.ln()).abs() < 1e-11, "{v}");
        assert!(tail < 1e-11);
        // c = e subtracts Σ 1/2^k = 1
        let (v, _) = s_series(2.0f64, 1.0f64.exp());
        assert!((v - (4.0 * 2f64.ln() - 1.0)).abs() < 1e-11, "{v}");
        // q large: every term goes to 0
        let (v, _) = s_series(1e8f64, 1.0);
        assert!(v.abs() < 1e-5);
    }

    #[test]
    fn series_tail_bound_is_honest() {
        for (q, c) in [(2.0f64, 0.3), (1.3, 5.0), (3.5, 0.01)] {
            let (v, tail) = s_series(q, c);
            // doubling the term count changes the value by less than the tail
            let j_star = 200u32;
            let once = s_partial(q, c, j_star);
            let twice = s_partial(q, c, 2 * j_star);
            assert!((twice - once).abs() <= tail.max(1e-14), "q={q} c={c}");
            assert!((twice - v).abs() <= tail.max(1e-13) + 1e-12 * v.abs());
        }
    }

    #[test]
    fn envelope_regroups_to_first_bound_at_j1() {
        let (params, k) = baseline();
        let eps = 0.1;
        for t in [0.5, 1.0, 2.0, 7.3] {
            let env = envelope(Branch::Combined, &params, &k, eps, 1, t);
            let (log_a1, a1, b1) = seed(Branch::Combined, &params, &k, eps);
            let regrouped = (log_a1 - k.s_inf_combined.0).exp() * (1.0 + t).powf(-a1) * t.powf(b1);
            assert!(
                ((env - regrouped) / regrouped).abs() < 1e-10,
                "t={t}: {env} vs {regrouped}"
            );
        }
    }

    #[test]
    fn envelope_monotone_in_j_where_rate_positive() {
        let (params, k) = baseline();
        let eps = 0.1;
        let t_bound = bound_time(Branch::Combined, &params, &k, eps).unwrap();
        let t = 2.0 * t_bound;
        assert!(envelope_rate(Branch::Combined, &params, &k, eps, t) > 1.0);
        let mut prev = envelope(Branch::Combined, &params, &k, eps, 1, t);
        for j in 2..=60 {
            let e = envelope(Branch::Combined, &params, &k, eps, j, t);
            assert!(e >= prev, "j={j}: {e} < {prev}");
            prev = e;
        }
        assert!(prev > 1e10);
    }

    #[test]
    fn envelope_collapses_where_rate_negative() {
        let (params, k) = baseline();
        let eps = 0.1;
        // early times have negative rate for small amplitude
        let t = 0.05;
        assert!(envelope_rate(Branch::Combined, &params, &k, eps, t) < 0.0);
        let e = envelope(Branch::Combined, &params, &k, eps, 80, t);
        assert_eq!(e, 0.0);
    }

    #[test]
    fn bound_time_power_law_and_monotonicity() {
        let (params, k) = baseline();
        let k1 = lifespan_exponent_combined(&params).unwrap();
        let b1 = bound_time(Branch::Combined, &params, &k, 0.1).unwrap();
        let b2 = bound_time(Branch::Combined, &params, &k, 0.05).unwrap();
        if b1 > 1.0 {
            assert!((b2 / b1 - 2f64.powf(k1)).abs() < 1e-9);
        }
        let mut prev = f64::INFINITY;
        for eps in [0.01, 0.02, 0.05, 0.1, 0.5, 1.0] {
            let b = bound_time(Branch::Combined, &params, &k, eps).unwrap();
            assert!(b <= prev);
            prev = b;
        }
    }

    #[test]
    fn improved_bound_smaller_for_small_eps() {
        let params = ModelParams::new(2, 1.0, 2.0, 5.0, 1.8, 1.0, 0.1).unwrap();
        assert!(check_combined(&params).satisfied());
        assert!(check_improved(&params).satisfied());
        let data = DataIntegrals {
            int_f_phi1: 1.0,
            int_g_phi1: 1.0,
            int_g: 1.0,
        };
        let k =
            IterationConstants::build(&params, &data, 1.0, holder_constant(2, 1.8, 1.0)).unwrap();
        for eps in [0.1, 0.05, 0.01] {
            let comb = bound_time(Branch::Combined, &params, &k, eps).unwrap();
            let impr = bound_time(Branch::Improved, &params, &k, eps).unwrap();
            assert!(impr < comb, "eps={eps}: {impr} vs {comb}");
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            /// Closed forms reproduce the recursion on both branches.
            #[test]
            fn closed_forms_match_recursion(
                n in 1u32..=4,
                p in 1.01f64..8.0,
                q in 1.05f64..6.0,
            ) {
                let params = ModelParams::new(n, 1.0, 2.0, p, q, 1.0, 0.1).unwrap();
                for branch in [Branch::Combined, Branch::Improved] {
                    let nf = n as f64;
                    let (mut a, mut b) = match branch {
                        Branch::Combined => ((nf - 1.0) * p / 2.0, nf + 1.0),
                        Branch::Improved => (nf * (q - 1.0), q + 2.0),
                    };
                    for j in 1..=30u32 {
                        let (ca, cb) = closed_form_exponents(branch, &params, j);
                        prop_assert!((ca - a).abs() <= 1e-9 * a.abs().max(1.0));
                        prop_assert!((cb - b).abs() <= 1e-9 * b.abs().max(1.0));
                        a = q * a + nf * (q - 1.0);
                        b = q * b + 2.0;
                    }
                }
            }

            /// The combined bound never increases as the amplitude grows.
            #[test]
            fn bound_time_nonincreasing_in_eps(
                lo in 1e-4f64..0.1,
                factor in 1.01f64..50.0,
            ) {
                let (params, k) = baseline();
                let hi = lo * factor;
                let b_lo = bound_time(Branch::Combined, &params, &k, lo).unwrap();
                let b_hi = bound_time(Branch::Combined, &params, &k, hi).unwrap();
                prop_assert!(b_hi <= b_lo * (1.0 + 1e-12));
            }

            /// The series tail bound is a true bound on partial-sum motion.
            #[test]
            fn series_tail_dominates_extension(q in 1.1f64..5.0, c in 0.01f64..10.0) {
                let (value, tail) = s_series(q, c);
                let twice = s_partial(q, c, 2000);
                prop_assert!((twice - value).abs() <= tail + 1e-12 * (1.0 + value.abs()));
            }
        }
    }

    #[test]
    fn combined_rate_coefficient_positive_wherever_admissible() {
        // 1 + 2/(q−1) − (n−1)p/2 > 0 whenever the combined check passes
        let mut draws = 0;
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        while draws < 2000 {
            let n = 1 + (next() * 4.0) as u32;
            let p = 1.0 + 7.0 * next();
            let q = 1.0 + 6.0 * next();
            let params = match ModelParams::new(n, 1.0, 2.0, p, q, 1.0, 0.1) {
                Ok(p) => p,
                Err(_) => continue,
            };
            if !check_combined(&params).satisfied() {
                continue;
            }
            draws += 1;
            let alpha = 1.0 + 2.0 / (q - 1.0) - (n as f64 - 1.0) * p / 2.0;
            assert!(alpha > 0.0, "n={n} p={p} q={q}: {alpha}");
        }
    }
}
