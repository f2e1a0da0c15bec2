//! Radially symmetric finite-difference solver for
//! `u_tt − Δu + μ(1+t)^{−β} u_t = |u_t|^p + |u|^q` with compactly supported
//! data, tracking the functionals of the blow-up argument and measuring a
//! numerical lifespan.
//!
//! Discretization: first-order system `(u, v = u_t)` on the uniform grid
//! `r_i = i·dr` with the second-order radial Laplacian
//!
//! ```text
//! L[u]_i = (u_{i+1} − 2u_i + u_{i−1})/dr² + ((n−1)/r_i)(u_{i+1} − u_{i−1})/(2dr),
//! L[u]_0 = 2n (u_1 − u_0)/dr²                       (even symmetry at r = 0),
//! ```
//!
//! advanced by the classical four-stage fourth-order Runge–Kutta scheme with
//! `dt = cfl·dr`. The outer boundary is `u = v = 0`, valid while the support
//! stays inside the grid (finite propagation speed). The integrator only
//! touches the active window around the numerical support, so large grids
//! cost only what the support actually uses.

use crate::error::{Error, Result};
use crate::field::RadialField;
use crate::num::Real;
use crate::params::ModelParams;
use crate::special::{log_phi1, unit_sphere_area, Multiplier};

/// Trailing samples below this magnitude are flushed to exact zero so the
/// active window tracks the physical support instead of the integrator's
/// spectral tail.
const SUPPORT_FLUSH: f64 = 1e-290;

/// Cells kept beyond the light cone `r = t + R`. The update window is
/// clamped there: the scheme's raw domain of dependence grows four cells
/// per step while the solution propagates at speed one, and what would be
/// written beyond the cone is the stencil's superluminal noise tail, not
/// solution. Clamping keeps the support inside `t + R + 2dr` exactly.
const CONE_MARGIN_CELLS: usize = 2;

/// Named initial-data families (unit amplitude, support inside `r < R`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataProfile {
    /// `exp(1 − 1/(1 − (r/R)²))` for r < R, else 0; peak value 1 at r = 0.
    Bump,
    /// Mollified indicator of `r < R/2`: 1 up to `0.3 R`, smooth cutoff to 0
    /// at `R/2`.
    Plateau,
}

impl DataProfile {
    /// Unit-amplitude profile value at radius `r`.
    pub fn value<T: Real>(self, r: T, support_radius: T) -> T {
        match self {
            DataProfile::Bump => {
                let s = r / support_radius;
                let x = T::one() - s * s;
                if x <= T::of(1.0 / 746.0) {
                    T::zero()
                } else {
                    (T::one() - x.recip()).exp()
                }
            }
            DataProfile::Plateau => {
                let s = r / (T::of(0.5) * support_radius);
                if s <= T::of(0.6) {
                    T::one()
                } else if s >= T::one() {
                    T::zero()
                } else {
                    let a = (T::one() - s) / T::of(0.4);
                    let b = (s - T::of(0.6)) / T::of(0.4);
                    let wa = (-a.recip()).exp();
                    let wb = (-b.recip()).exp();
                    wa / (wa + wb)
                }
            }
        }
    }
}

impl std::str::FromStr for DataProfile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bump" => Ok(DataProfile::Bump),
            "plateau" => Ok(DataProfile::Plateau),
            other => Err(Error::Config(format!(
                "profile: expected 'bump' or 'plateau', got '{other}'"
            ))),
        }
    }
}

impl std::fmt::Display for DataProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DataProfile::Bump => write!(f, "bump"),
            DataProfile::Plateau => write!(f, "plateau"),
        }
    }
}

/// Initial data `(f, g) = (ε·profile, ε·profile)` sampled on a grid of
/// `len` points; `zero_f`/`zero_g` blank out one of the two (validation
/// runs). Both fields are nonnegative and supported in `[0, R)`; errors if
/// the profile would touch the grid boundary.
#[allow(clippy::too_many_arguments)]
pub fn make_initial_data<T: Real>(
    profile: DataProfile,
    eps: T,
    support_radius: T,
    n: u32,
    dr: T,
    len: usize,
    zero_f: bool,
    zero_g: bool,
) -> Result<(RadialField<T>, RadialField<T>)> {
    let extent = dr * T::of_usize(len - 1);
    if support_radius + T::of(2.0) * dr > extent {
        return Err(Error::Config(format!(
            "r_max: initial data of support radius {support_radius} touches the grid boundary \
             (extent {extent})"
        )));
    }
    let profile_field =
        RadialField::from_fn(n, dr, len, |r| eps * profile.value(r, support_radius))?;
    let zeros = RadialField::zeros(n, dr, len)?;
    let f = if zero_f {
        zeros.clone()
    } else {
        profile_field.clone()
    };
    let g = if zero_g { zeros } else { profile_field };
    Ok((f, g))
}

/// Full configuration of one solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    pub params: ModelParams<T>,
    /// Grid spacing.
    pub dr: T,
    /// Courant factor: `dt = cfl·dr`, `cfl ∈ (0, 0.5]`.
    pub cfl: T,
    /// Domain extent; must be at least `t_end + R + 2dr`.
    pub r_max: T,
    /// Time horizon.
    pub t_end: T,
    pub profile: DataProfile,
    /// Blow-up amplitude threshold M; `None` selects
    /// `1e6·max(initial amplitude, 1)`.
    pub blowup_threshold: Option<T>,
    /// Zero the `u(·,0)` profile (g keeps the amplitude).
    pub zero_f: bool,
    /// Zero the `u_t(·,0)` profile (validation runs; theorem data needs g).
    pub zero_g: bool,
    /// Drop the nonlinear terms (validation runs of the linear equation).
    pub disable_nonlinearity: bool,
    /// Trace stride in steps; `None` targets ~1600 samples.
    pub sample_every: Option<usize>,
    /// After a blow-up, re-run with the threshold doubled and report whether
    /// the lifespan moved by less than 2% (superexponential growth makes it
    /// threshold-insensitive). Doubles the cost of blow-up runs.
    pub certify_threshold: bool,
}

impl<T: Real> SolverConfig<T> {
    /// Baseline configuration for a parameter set: `dr = 0.01`, `cfl = 0.4`,
    /// bump data, horizon `t_end` with the matching minimal domain.
    pub fn baseline(params: ModelParams<T>, t_end: T) -> Self {
        let dr = T::of(0.01);
        SolverConfig {
            params,
            dr,
            cfl: T::of(0.4),
            r_max: t_end + params.support_radius + T::of(16.0) * dr,
            t_end,
            profile: DataProfile::Bump,
            blowup_threshold: None,
            zero_f: false,
            zero_g: false,
            disable_nonlinearity: false,
            sample_every: None,
            certify_threshold: false,
        }
    }

    pub fn dt(&self) -> T {
        self.cfl * self.dr
    }

    /// Resolved blow-up threshold.
    pub fn threshold(&self) -> T {
        self.blowup_threshold
            .unwrap_or_else(|| T::of(1e6) * self.params.eps.max(T::one()))
    }

    fn validate(&self) -> Result<()> {
        if !(self.dr > T::zero()) || !self.dr.is_finite() {
            return Err(Error::Config(format!(
                "dr: must be finite and > 0, got {}",
                self.dr
            )));
        }
        if !(self.cfl > T::zero()) || self.cfl > T::of(0.5) {
            return Err(Error::Config(format!(
                "cfl: must lie in (0, 0.5], got {}",
                self.cfl
            )));
        }
        if !(self.t_end > T::zero()) || !self.t_end.is_finite() {
            return Err(Error::Config(format!(
                "t_end: must be finite and > 0, got {}",
                self.t_end
            )));
        }
        let needed = self.t_end + self.params.support_radius + T::of(2.0) * self.dr;
        if self.r_max < needed {
            return Err(Error::Config(format!(
                "r_max: {} is below t_end + R + 2dr = {needed} (support condition)",
                self.r_max
            )));
        }
        if !(self.threshold() > T::zero()) {
            return Err(Error::Config("blowup_threshold: must be > 0".into()));
        }
        Ok(())
    }
}

/// Snapshot of the evolving state.
#[derive(Debug, Clone)]
pub struct SolverState<T> {
    pub t: T,
    pub u: RadialField<T>,
    pub v: RadialField<T>,
    pub step_index: u64,
}

/// One sampled row of the functional trace.
#[derive(Debug, Clone, Copy)]
pub struct TraceRow<T> {
    pub t: T,
    /// `F₀ = ∫ u dx`.
    pub f0: T,
    /// `F₁ = ∫ u ψ dx`.
    pub f1: T,
    /// `F₂ = ∫ u_t ψ dx`.
    pub f2: T,
    /// `G = m F₂ − G(0) − ½∫₀ᵗ m ∫|u_t|^p ψ dx ds`.
    pub g: T,
    pub max_abs_u: T,
    pub max_abs_ut: T,
    /// `|{m F₀'}' − m ∫(|u_t|^p + |u|^q) dx|` by centered differencing of
    /// the recorded F₀ (0 at the trace endpoints).
    pub weak_residual: T,
    /// `∫(|u_t|^p + |u|^q) dx` at this sample.
    pub nl_integral: T,
}

/// Time series of the tracked functionals and diagnostics.
#[derive(Debug, Clone)]
pub struct SolverTrace<T> {
    pub rows: Vec<TraceRow<T>>,
    /// Spacing between samples.
    pub sample_dt: T,
}

/// Measured lifespan of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lifespan<T> {
    /// Amplitude crossed the threshold (or became non-finite) at this time.
    BlowUp(T),
    /// Ran to the horizon without crossing the threshold.
    Survived,
}

impl<T: Copy> Lifespan<T> {
    pub fn time(&self) -> Option<T> {
        match self {
            Lifespan::BlowUp(t) => Some(*t),
            Lifespan::Survived => None,
        }
    }
}

/// Everything a completed run reports.
#[derive(Debug, Clone)]
pub struct RunOutcome<T> {
    pub trace: SolverTrace<T>,
    pub lifespan: Lifespan<T>,
    pub final_state: SolverState<T>,
    /// m(0).
    pub m0: T,
    /// `∫ f φ₁ dx` of the actual (ε-scaled) data.
    pub int_f_phi1: T,
    /// `∫ g φ₁ dx` of the actual data.
    pub int_g_phi1: T,
    /// `∫ g dx` of the actual data.
    pub int_g: T,
    /// `G(0) = (m₀/2)∫ g φ₁ dx`.
    pub g0: T,
    /// Finite-speed check failures (samples where `u` exceeded
    /// `1e−10·max|u|` outside `r ≤ t + R + 2dr`).
    pub support_violations: usize,
    pub steps_taken: u64,
    /// Result of the threshold-doubling certification, when requested:
    /// true iff T_num moved by less than 2% under a doubled threshold.
    pub threshold_certified: Option<bool>,
}

/// Outcome of a single time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepStatus<T> {
    Continue,
    /// Blow-up detected; the refined crossing time.
    BlowUp(T),
}

/// The integrator. Construct with [`Solver::new`], then either drive it
/// manually with [`Solver::step`] or use [`run`].
pub struct Solver<T> {
    cfg: SolverConfig<T>,
    mult: Multiplier<T>,
    dt: T,
    threshold: T,
    len_cap: usize,
    t_steps: u64,
    stride: usize,

    step_index: u64,
    u: Vec<T>,
    v: Vec<T>,
    active: usize,

    su: Vec<T>,
    sv: Vec<T>,
    au: Vec<T>,
    av: Vec<T>,
    ku: Vec<T>,
    kv: Vec<T>,
    pu: Vec<T>,
    pv: Vec<T>,
    psi_scratch: Vec<T>,

    log_phi1_tab: Vec<T>,
    /// Composite-Simpson quadrature weights `A(n) s_i r_i^{n−1} dr`.
    quad_w: Vec<T>,
    /// First-derivative coefficient `(n−1)/(2 i dr²)`.
    drift: Vec<T>,

    /// Running `∫₀ᵗ m(s) ∫|u_t|^p ψ dx ds` (per-step trapezoid).
    g_integral: T,
    prev_g_integrand: T,

    m0: T,
    g0: T,
    int_f_phi1: T,
    int_g_phi1: T,
    int_g: T,
}

impl<T: Real> Solver<T> {
    pub fn new(cfg: &SolverConfig<T>) -> Result<Self> {
        cfg.validate()?;
        let params = cfg.params;
        let mult = Multiplier::from_params(&params)?;
        let dt = cfg.dt();
        let len_cap = (cfg.r_max / cfg.dr).as_f64().floor() as usize + 1;
        let t_steps = (cfg.t_end / dt).as_f64().ceil() as u64;
        let stride = cfg
            .sample_every
            .unwrap_or_else(|| ((t_steps as usize) / 1600).max(1));

        let support_cells = (params.support_radius / cfg.dr).as_f64().ceil() as usize + 2;
        let len0 = (support_cells + 64).min(len_cap);
        let (f, g) = make_initial_data(
            cfg.profile,
            params.eps,
            params.support_radius,
            params.n,
            cfg.dr,
            len0.max(support_cells + 3),
            cfg.zero_f,
            cfg.zero_g,
        )?;

        let mut solver = Solver {
            cfg: cfg.clone(),
            mult,
            dt,
            threshold: cfg.threshold(),
            len_cap,
            t_steps,
            stride,
            step_index: 0,
            u: f.values().to_vec(),
            v: g.values().to_vec(),
            active: 0,
            su: Vec::new(),
            sv: Vec::new(),
            au: Vec::new(),
            av: Vec::new(),
            ku: Vec::new(),
            kv: Vec::new(),
            pu: Vec::new(),
            pv: Vec::new(),
            psi_scratch: Vec::new(),
            log_phi1_tab: Vec::new(),
            quad_w: Vec::new(),
            drift: Vec::new(),
            g_integral: T::zero(),
            prev_g_integrand: T::zero(),
            m0: mult.m0(),
            g0: T::zero(),
            int_f_phi1: T::zero(),
            int_g_phi1: T::zero(),
            int_g: T::zero(),
        };
        let len = solver.u.len();
        solver.build_tables(len);
        solver.su = vec![T::zero(); len];
        solver.sv = vec![T::zero(); len];
        solver.au = vec![T::zero(); len];
        solver.av = vec![T::zero(); len];
        solver.ku = vec![T::zero(); len];
        solver.kv = vec![T::zero(); len];
        solver.pu = vec![T::zero(); len];
        solver.pv = vec![T::zero(); len];
        solver.psi_scratch = vec![T::zero(); len];
        solver.rescan_support(len - 1);

        // data integrals (the initial support is far from the switch radius,
        // so exp(log φ₁) is exact enough here)
        let mut int_f_phi1 = T::zero();
        let mut int_g_phi1 = T::zero();
        let mut int_g = T::zero();
        for i in 0..=solver.active {
            let w = solver.quad_w[i];
            let p1 = solver.log_phi1_tab[i].exp();
            int_f_phi1 += w * solver.u[i] * p1;
            int_g_phi1 += w * solver.v[i] * p1;
            int_g += w * solver.v[i];
        }
        solver.int_f_phi1 = int_f_phi1;
        solver.int_g_phi1 = int_g_phi1;
        solver.int_g = int_g;
        solver.g0 = solver.m0 / T::of(2.0) * int_g_phi1;
        solver.prev_g_integrand = solver.g_integrand();
        Ok(solver)
    }

    fn build_tables(&mut self, len: usize) {
        let n = self.cfg.params.n;
        let dr = self.cfg.dr;
        let area = unit_sphere_area::<T>(n);
        let third = T::one() / T::of(3.0);
        let from = self.quad_w.len();
        for i in from..len {
            let r = dr * T::of_usize(i);
            self.log_phi1_tab.push(log_phi1(n, r));
            let simpson = if i == 0 {
                third
            } else if i % 2 == 1 {
                T::of(4.0) * third
            } else {
                T::of(2.0) * third
            };
            let geom = if n == 1 {
                T::one()
            } else {
                r.powi(n as i32 - 1)
            };
            self.quad_w.push(area * simpson * geom * dr);
            self.drift.push(if i == 0 {
                T::zero()
            } else {
                (T::of_u32(n) - T::one()) / (T::of(2.0) * dr * dr * T::of_usize(i))
            });
        }
    }

    fn grow(&mut self, len: usize) -> Result<()> {
        if len > self.len_cap {
            return Err(Error::Config(format!(
                "r_max: numerical support reached the domain boundary at step {}; enlarge r_max",
                self.step_index
            )));
        }
        let len = (len + 4096).min(self.len_cap);
        self.build_tables(len);
        for buf in [
            &mut self.u,
            &mut self.v,
            &mut self.su,
            &mut self.sv,
            &mut self.au,
            &mut self.av,
            &mut self.ku,
            &mut self.kv,
            &mut self.pu,
            &mut self.pv,
            &mut self.psi_scratch,
        ] {
            buf.resize(len, T::zero());
        }
        Ok(())
    }

    /// Current time `step_index · dt` (recomputed, not accumulated).
    pub fn t(&self) -> T {
        self.dt * T::of(self.step_index as f64)
    }

    pub fn state(&self) -> SolverState<T> {
        let len = (self.active + 3).min(self.u.len()).max(3);
        SolverState {
            t: self.t(),
            u: RadialField::new_unchecked(self.cfg.params.n, self.cfg.dr, self.u[..len].to_vec()),
            v: RadialField::new_unchecked(self.cfg.params.n, self.cfg.dr, self.v[..len].to_vec()),
            step_index: self.step_index,
        }
    }

    /// Right-hand side on `[0, hi]`: `ku = v`, `kv = L[u] − damp·v + N(u,v)`.
    /// Reads `u[hi+1]`, which the caller guarantees to be in bounds.
    #[allow(clippy::too_many_arguments)]
    fn rhs(
        cfg: &SolverConfig<T>,
        drift: &[T],
        t: T,
        u: &[T],
        v: &[T],
        ku: &mut [T],
        kv: &mut [T],
        hi: usize,
    ) {
        let params = &cfg.params;
        let dr = cfg.dr;
        let inv_dr2 = (dr * dr).recip();
        let damp = if params.mu == T::zero() {
            T::zero()
        } else {
            params.mu * (T::one() + t).powf(-params.beta)
        };
        let nonlinear = !cfg.disable_nonlinearity;
        let (p, q) = (params.p, params.q);
        let two = T::of(2.0);
        let nf = params.nf();

        ku[..=hi].copy_from_slice(&v[..=hi]);
        // symmetry point r = 0 (even extension)
        let lap0 = two * nf * (u[1] - u[0]) * inv_dr2;
        kv[0] = lap0 - damp * v[0]
            + if nonlinear {
                v[0].abs().powf(p) + u[0].abs().powf(q)
            } else {
                T::zero()
            };
        for i in 1..=hi {
            let lap =
                (u[i + 1] - two * u[i] + u[i - 1]) * inv_dr2 + drift[i] * (u[i + 1] - u[i - 1]);
            let nl = if nonlinear {
                v[i].abs().powf(p) + u[i].abs().powf(q)
            } else {
                T::zero()
            };
            kv[i] = lap - damp * v[i] + nl;
        }
    }

    /// One RK4 step of size `h` over the window `[0, hi]` (capacity for
    /// `hi + 1` is the caller's responsibility).
    fn rk4(&mut self, hi: usize, h: T) {
        let t = self.t();
        let h2 = h * T::of(0.5);
        let h6 = h / T::of(6.0);
        let h3 = h / T::of(3.0);

        // stage 1
        Self::rhs(
            &self.cfg,
            &self.drift,
            t,
            &self.u,
            &self.v,
            &mut self.ku,
            &mut self.kv,
            hi,
        );
        for i in 0..=hi {
            self.au[i] = self.u[i] + h6 * self.ku[i];
            self.av[i] = self.v[i] + h6 * self.kv[i];
            self.su[i] = self.u[i] + h2 * self.ku[i];
            self.sv[i] = self.v[i] + h2 * self.kv[i];
        }
        // stage 2
        Self::rhs(
            &self.cfg,
            &self.drift,
            t + h2,
            &self.su,
            &self.sv,
            &mut self.ku,
            &mut self.kv,
            hi,
        );
        for i in 0..=hi {
            self.au[i] += h3 * self.ku[i];
            self.av[i] += h3 * self.kv[i];
            self.su[i] = self.u[i] + h2 * self.ku[i];
            self.sv[i] = self.v[i] + h2 * self.kv[i];
        }
        // stage 3
        Self::rhs(
            &self.cfg,
            &self.drift,
            t + h2,
            &self.su,
            &self.sv,
            &mut self.ku,
            &mut self.kv,
            hi,
        );
        for i in 0..=hi {
            self.au[i] += h3 * self.ku[i];
            self.av[i] += h3 * self.kv[i];
            self.su[i] = self.u[i] + h * self.ku[i];
            self.sv[i] = self.v[i] + h * self.kv[i];
        }
        // stage 4
        Self::rhs(
            &self.cfg,
            &self.drift,
            t + h,
            &self.su,
            &self.sv,
            &mut self.ku,
            &mut self.kv,
            hi,
        );
        for i in 0..=hi {
            self.u[i] = self.au[i] + h6 * self.ku[i];
            self.v[i] = self.av[i] + h6 * self.kv[i];
        }
    }

    /// Trailing flush and support scan; returns `(max|u|, max|v|)` over the
    /// window and updates `active`.
    fn rescan_support(&mut self, hi: usize) -> (T, T) {
        let flush = T::of(SUPPORT_FLUSH);
        let mut last = 0usize;
        let mut max_u = T::zero();
        let mut max_v = T::zero();
        let hi = hi.min(self.u.len() - 1);
        for i in 0..=hi {
            let au = self.u[i].abs();
            let av = self.v[i].abs();
            if au > flush || av > flush {
                last = i;
                max_u = max_u.max(au);
                max_v = max_v.max(av);
            } else {
                self.u[i] = T::zero();
                self.v[i] = T::zero();
            }
        }
        self.active = last;
        (max_u, max_v)
    }

    /// `m(t) ∫ |u_t|^p ψ dx` at the current state (0 with the nonlinearity
    /// disabled).
    fn g_integrand(&self) -> T {
        if self.cfg.disable_nonlinearity {
            return T::zero();
        }
        let t = self.t();
        let p = self.cfg.params.p;
        let mut acc = T::zero();
        for i in 0..=self.active {
            if self.v[i] != T::zero() {
                let psi = (self.log_phi1_tab[i] - t).exp();
                acc += self.quad_w[i] * self.v[i].abs().powf(p) * psi;
            }
        }
        self.mult.eval(t) * acc
    }

    /// Advance one step of size `dt`; detects blow-up (threshold crossing is
    /// refined by one dt-bisection, non-finite values flag the current time).
    pub fn step(&mut self) -> Result<StepStatus<T>> {
        let t_prev = self.t();
        // causal update window: the light cone at the end of this step
        let front_idx = ((t_prev + self.dt + self.cfg.params.support_radius) / self.cfg.dr)
            .as_f64()
            .floor() as usize;
        if front_idx + 3 > self.len_cap {
            return Err(Error::Config(format!(
                "r_max: the light cone reached the domain boundary at step {}; enlarge r_max",
                self.step_index
            )));
        }
        let hi = (self.active + 5)
            .min(front_idx + CONE_MARGIN_CELLS)
            .min(self.len_cap - 2);
        if hi + 2 > self.u.len() {
            self.grow(hi + 2)?;
        }
        self.pu[..=hi + 1].copy_from_slice(&self.u[..=hi + 1]);
        self.pv[..=hi + 1].copy_from_slice(&self.v[..=hi + 1]);

        self.rk4(hi, self.dt);
        self.step_index += 1;
        let (max_u, max_v) = self.rescan_support(hi);

        if !max_u.is_finite() || !max_v.is_finite() {
            return Ok(StepStatus::BlowUp(self.t()));
        }
        if max_u.max(max_v) > self.threshold {
            // one bisection of the step: restore and try half a step
            self.u[..=hi + 1].copy_from_slice(&self.pu[..=hi + 1]);
            self.v[..=hi + 1].copy_from_slice(&self.pv[..=hi + 1]);
            self.step_index -= 1;
            self.rk4(hi, self.dt * T::of(0.5));
            self.step_index += 1; // time bookkeeping below uses t_prev directly
            let (mu2, mv2) = self.rescan_support(hi);
            let quarter = self.dt * T::of(0.25);
            let t_blow = if !mu2.is_finite() || !mv2.is_finite() || mu2.max(mv2) > self.threshold {
                t_prev + quarter
            } else {
                t_prev + T::of(3.0) * quarter
            };
            return Ok(StepStatus::BlowUp(t_blow));
        }

        // accumulate the G-functional time integral
        if !self.cfg.disable_nonlinearity {
            let integrand = self.g_integrand();
            self.g_integral += self.dt * T::of(0.5) * (self.prev_g_integrand + integrand);
            self.prev_g_integrand = integrand;
        }
        Ok(StepStatus::Continue)
    }

    /// Functional row at the current state.
    fn record_row(&mut self) -> TraceRow<T> {
        let t = self.t();
        let (p, q) = (self.cfg.params.p, self.cfg.params.q);
        let nonlinear = !self.cfg.disable_nonlinearity;
        let mut f0 = T::zero();
        let mut f1 = T::zero();
        let mut f2 = T::zero();
        let mut nl = T::zero();
        let mut max_u = T::zero();
        let mut max_v = T::zero();
        for i in 0..=self.active {
            let (ui, vi) = (self.u[i], self.v[i]);
            let w = self.quad_w[i];
            let psi = (self.log_phi1_tab[i] - t).exp();
            f0 += w * ui;
            f1 += w * ui * psi;
            f2 += w * vi * psi;
            if nonlinear {
                nl += w * (vi.abs().powf(p) + ui.abs().powf(q));
            }
            max_u = max_u.max(ui.abs());
            max_v = max_v.max(vi.abs());
        }
        let g = self.mult.eval(t) * f2 - self.g0 - T::of(0.5) * self.g_integral;
        TraceRow {
            t,
            f0,
            f1,
            f2,
            g,
            max_abs_u: max_u,
            max_abs_ut: max_v,
            weak_residual: T::zero(),
            nl_integral: nl,
        }
    }

    /// Finite-speed containment: no sample beyond `t + R + 2dr` may exceed
    /// `1e−10` of the field maximum.
    fn support_contained(&self) -> bool {
        let t = self.t();
        let dr = self.cfg.dr;
        let edge = t + self.cfg.params.support_radius + T::of(2.0) * dr;
        let edge_idx = (edge / dr).as_f64().ceil() as usize;
        if self.active <= edge_idx {
            return true;
        }
        let mut max_all = T::zero();
        for i in 0..=self.active {
            max_all = max_all.max(self.u[i].abs()).max(self.v[i].abs());
        }
        let cap = T::of(1e-10) * max_all;
        self.u[edge_idx + 1..=self.active]
            .iter()
            .chain(&self.v[edge_idx + 1..=self.active])
            .all(|x| x.abs() <= cap)
    }
}

/// Integrates `config` until the horizon or blow-up and assembles the trace.
pub fn run<T: Real>(config: &SolverConfig<T>) -> Result<RunOutcome<T>> {
    let mut solver = Solver::new(config)?;
    let stride = solver.stride;
    let total = solver.t_steps;
    let mut rows: Vec<TraceRow<T>> = Vec::new();
    let mut support_violations = 0usize;
    let mut lifespan = Lifespan::Survived;

    loop {
        let k = solver.step_index;
        if k % stride as u64 == 0 || k == total {
            rows.push(solver.record_row());
            if !solver.support_contained() {
                support_violations += 1;
            }
        }
        if k >= total {
            break;
        }
        match solver.step()? {
            StepStatus::Continue => {}
            StepStatus::BlowUp(t) => {
                lifespan = Lifespan::BlowUp(t);
                break;
            }
        }
    }

    // weak-form residual of {m F₀'}' = m ∫(|u_t|^p + |u|^q) dx by compact
    // centered differencing of the recorded F₀
    let sample_dt = solver.dt * T::of_usize(stride);
    for k in 1..rows.len().saturating_sub(1) {
        let (tm, t0, tp) = (rows[k - 1].t, rows[k].t, rows[k + 1].t);
        let dm = t0 - tm;
        let dp = tp - t0;
        if ((dp - dm).abs() > T::of(1e-9) * sample_dt) || dm <= T::zero() {
            continue; // non-uniform tail sample; leave residual at 0
        }
        let m_p = solver.mult.eval(t0 + dp * T::of(0.5));
        let m_m = solver.mult.eval(t0 - dm * T::of(0.5));
        let lhs =
            (m_p * (rows[k + 1].f0 - rows[k].f0) - m_m * (rows[k].f0 - rows[k - 1].f0)) / (dm * dm);
        let rhs = solver.mult.eval(t0) * rows[k].nl_integral;
        rows[k].weak_residual = (lhs - rhs).abs();
    }

    let threshold_certified = match (config.certify_threshold, lifespan) {
        (true, Lifespan::BlowUp(t1)) => {
            let mut doubled = config.clone();
            doubled.blowup_threshold = Some(T::of(2.0) * config.threshold());
            doubled.certify_threshold = false;
            let redo = run(&doubled)?;
            Some(match redo.lifespan {
                Lifespan::BlowUp(t2) => (t2 - t1).abs() <= T::of(0.02) * t1,
                Lifespan::Survived => false,
            })
        }
        _ => None,
    };

    Ok(RunOutcome {
        trace: SolverTrace { rows, sample_dt },
        lifespan,
        final_state: solver.state(),
        m0: solver.m0,
        int_f_phi1: solver.int_f_phi1,
        int_g_phi1: solver.int_g_phi1,
        int_g: solver.int_g,
        g0: solver.g0,
        support_violations,
        steps_taken: solver.step_index,
        threshold_certified,
    })
}

/// One failed functional bound.
#[derive(Debug, Clone)]
pub struct DiagnosticViolation<T> {
    pub t: T,
    pub check: String,
    pub value: T,
    pub bound: T,
}

/// Outcome of checking the functional lower bounds along a trace.
#[derive(Debug, Clone)]
pub struct DiagnosticsReport<T> {
    pub violations: Vec<DiagnosticViolation<T>>,
    pub samples_checked: usize,
    /// Bounds were checked for `t ≤ t_cutoff` (90% of the numerical lifespan
    /// for blow-up runs).
    pub t_cutoff: T,
}

impl<T> DiagnosticsReport<T> {
    pub fn clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks, at every sampled time up to 90% of the lifespan:
/// `F₁ ≥ (m₀/2)∫fφ₁dx`, `F₂ ≥ (m₀/2)∫gφ₁dx`, `G ≥ e^{−2t} G(0)` and
/// monotonicity of `F₀`, each with tolerance 1e−3 of the bound's magnitude.
pub fn diagnostics<T: Real>(outcome: &RunOutcome<T>) -> DiagnosticsReport<T> {
    let tol = T::of(1e-3);
    let floor = T::of(1e-300);
    let t_cutoff = match outcome.lifespan {
        Lifespan::BlowUp(t) => T::of(0.9) * t,
        Lifespan::Survived => T::infinity(),
    };
    let bound_f1 = outcome.m0 / T::of(2.0) * outcome.int_f_phi1;
    let bound_f2 = outcome.m0 / T::of(2.0) * outcome.int_g_phi1;
    let mut violations = Vec::new();
    let mut samples = 0usize;
    let rows: Vec<_> = outcome
        .trace
        .rows
        .iter()
        .filter(|r| r.t <= t_cutoff)
        .collect();
    for row in &rows {
        samples += 1;
        if row.f1 < bound_f1 - tol * (bound_f1.abs() + floor) {
            violations.push(DiagnosticViolation {
                t: row.t,
                check: "F1 >= (m0/2) int f phi1".into(),
                value: row.f1,
                bound: bound_f1,
            });
        }
        if row.f2 < bound_f2 - tol * (bound_f2.abs() + floor) {
            violations.push(DiagnosticViolation {
                t: row.t,
                check: "F2 >= (m0/2) int g phi1".into(),
                value: row.f2,
                bound: bound_f2,
            });
        }
        let g_bound = (-T::of(2.0) * row.t).exp() * outcome.g0;
        if row.g < g_bound - tol * (g_bound.abs() + floor) {
            violations.push(DiagnosticViolation {
                t: row.t,
                check: "G >= e^{-2t} G(0)".into(),
                value: row.g,
                bound: g_bound,
            });
        }
    }
    // F₀ nondecreasing once the first couple of samples have passed
    let transient = T::of(2.0) * outcome.trace.sample_dt;
    for pair in rows.windows(2) {
        if pair[0].t < transient {
            continue;
        }
        let scale = pair[0].f0.abs().max(pair[1].f0.abs()).max(floor);
        if pair[1].f0 < pair[0].f0 - tol * scale {
            violations.push(DiagnosticViolation {
                t: pair[1].t,
                check: "F0 nondecreasing".into(),
                value: pair[1].f0,
                bound: pair[0].f0,
            });
        }
    }
    DiagnosticsReport {
        violations,
        samples_checked: samples,
        t_cutoff,
    }
}

/// `∫ weak_residual dt` over `t ≤ frac · lifespan` (or the whole trace for
/// survived runs); the refinement studies compare this across resolutions.
pub fn integrated_weak_residual<T: Real>(outcome: &RunOutcome<T>, frac: T) -> T {
    let cutoff = match outcome.lifespan {
        Lifespan::BlowUp(t) => frac * t,
        Lifespan::Survived => T::infinity(),
    };
    outcome
        .trace
        .rows
        .iter()
        .filter(|r| r.t <= cutoff)
        .map(|r| r.weak_residual * outcome.trace.sample_dt)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_config(dr: f64) -> SolverConfig<f64> {
        let params = ModelParams::new(1, 0.0, 2.0, 3.0, 2.0, 1.0, 1.0).unwrap();
        SolverConfig {
            params,
            dr,
            cfl: 0.4,
            r_max: 5.0,
            t_end: 2.0,
            profile: DataProfile::Bump,
            blowup_threshold: None,
            zero_f: false,
            zero_g: true,
            disable_nonlinearity: true,
            sample_every: Some(1_000_000),
            certify_threshold: false,
        }
    }

    #[test]
    fn profiles_normalized_and_supported() {
        assert_eq!(DataProfile::Bump.value(0.0, 1.0), 1.0);
        assert_eq!(DataProfile::Bump.value(1.0, 1.0), 0.0);
        assert_eq!(DataProfile::Bump.value(1.5, 1.0), 0.0);
        assert_eq!(DataProfile::Plateau.value(0.0, 2.0), 1.0);
        assert_eq!(DataProfile::Plateau.value(0.59, 2.0), 1.0);
        assert_eq!(DataProfile::Plateau.value(1.0, 2.0), 0.0);
        for k in 0..50 {
            let r = k as f64 * 0.02;
            let b = DataProfile::Bump.value(r, 1.0);
            assert!((0.0..=1.0).contains(&b));
        }
    }

    #[test]
    fn bump_data_integral_matches_quadrature_oracle() {
        // ∫_R g dx = 2 ∫₀¹ exp(1 − 1/(1−r²)) dr for the unit bump on the line
        let oracle: f64 = 2.0
            * crate::quad::integrate_gl64_panels(0.0, 1.0 - 1e-12, 64, |r: f64| {
                DataProfile::Bump.value(r, 1.0)
            });
        let dr = 1.0 / 2048.0;
        let g =
            RadialField::from_fn(1, dr, 2057, |r: f64| DataProfile::Bump.value(r, 1.0)).unwrap();
        let got = crate::special::radial_integral_against(crate::special::Weight::One, &g);
        assert!((got - oracle).abs() < 1e-8, "{got} vs {oracle}");
        // the solver's internal data integral agrees
        let params = ModelParams::new(1, 1.0, 2.0, 3.0, 2.0, 1.0, 1.0).unwrap();
        let cfg = SolverConfig {
            dr,
            ..SolverConfig::baseline(params, 1.0)
        };
        let out = run(&cfg).unwrap();
        assert!(
            (out.int_g - oracle).abs() < 1e-6,
            "{} vs {oracle}",
            out.int_g
        );
    }

    #[test]
    fn initial_data_rejects_tight_grid() {
        let r = make_initial_data::<f64>(DataProfile::Bump, 1.0, 1.0, 1, 0.1, 8, false, false);
        assert!(r.is_err());
    }

    #[test]
    fn zero_data_stays_zero() {
        let params = ModelParams::new(1, 1.0, 2.0, 3.0, 2.0, 1.0, 0.0).unwrap();
        let cfg = SolverConfig {
            t_end: 1.0,
            r_max: 2.5,
            dr: 0.05,
            ..SolverConfig::baseline(params, 1.0)
        };
        let out = run(&cfg).unwrap();
        assert_eq!(out.lifespan, Lifespan::Survived);
        assert_eq!(out.final_state.u.max_abs(), 0.0);
        assert_eq!(out.final_state.v.max_abs(), 0.0);
        for row in &out.trace.rows {
            assert_eq!(row.f0, 0.0);
        }
    }

    /// d'Alembert oracle for n = 1, g = 0: u = (f̃(r−t) + f̃(r+t))/2 with the
    /// even extension f̃.
    fn traveling_exact(r: f64, t: f64) -> f64 {
        let f = |x: f64| DataProfile::Bump.value(x.abs(), 1.0);
        0.5 * (f(r - t) + f(r + t))
    }

    fn traveling_error(dr: f64) -> f64 {
        // pure traveling bump: u(0) = f, u_t(0) = 0
        let cfg = linear_config(dr);
        let out = run(&cfg).unwrap();
        assert_eq!(out.lifespan, Lifespan::Survived);
        let state = &out.final_state;
        let mut err = 0f64;
        for (i, &ui) in state.u.values().iter().enumerate() {
            let r = state.u.r(i);
            err = err.max((ui - traveling_exact(r, state.t)).abs());
        }
        err
    }

    #[test]
    fn linear_wave_second_order_convergence() {
        let e1 = traveling_error(1.0 / 200.0);
        let e2 = traveling_error(1.0 / 400.0);
        assert!(
            e1 / e2 >= 3.5,
            "error ratio {} (e1={e1:e}, e2={e2:e})",
            e1 / e2
        );
    }

    #[test]
    fn flat_patch_follows_damping_ode() {
        // plateau data flat near r = 0: the PDE there reduces to
        // u'' + mu (1+t)^{-beta} u' = 0 until edge effects arrive
        let params = ModelParams::new(1, 1.0, 2.0, 3.0, 2.0, 18.0, 1.0).unwrap();
        let cfg = SolverConfig {
            params,
            dr: 0.02,
            cfl: 0.4,
            r_max: 22.0,
            t_end: 2.0,
            profile: DataProfile::Plateau,
            blowup_threshold: None,
            zero_f: false,
            zero_g: false,
            disable_nonlinearity: true,
            sample_every: Some(1_000_000),
            certify_threshold: false,
        };
        let out = run(&cfg).unwrap();
        let mult = Multiplier::new(1.0, 2.0).unwrap();
        let m0 = mult.m0();
        let integral: f64 =
            crate::quad::integrate_gl64_panels(0.0, 2.0, 8, |s: f64| m0 / mult.eval(s));
        let exact = 1.0 + integral;
        let got = out.final_state.u.values()[0];
        assert!(((got - exact) / exact).abs() < 1e-7, "{got} vs {exact}");
    }

    #[test]
    fn finite_propagation_support_contained() {
        let params = ModelParams::new(1, 1.0, 2.0, 3.0, 2.0, 1.0, 0.3).unwrap();
        let cfg = SolverConfig {
            dr: 0.02,
            ..SolverConfig::baseline(params, 3.0)
        };
        let out = run(&cfg).unwrap();
        assert_eq!(out.support_violations, 0);
        // with eps = 0.3 the baseline problem survives t = 3 comfortably
        assert_eq!(out.lifespan, Lifespan::Survived);
        let state = &out.final_state;
        let edge = state.t + 1.0 + 2.0 * cfg.dr;
        let cap = 1e-10 * state.u.max_abs();
        assert!(state.u.support_extent(cap) <= edge);
    }

    #[test]
    fn baseline_blowup_threshold_insensitive() {
        let params = ModelParams::new(1, 1.0, 2.0, 3.0, 2.0, 1.0, 0.5).unwrap();
        let cfg = SolverConfig {
            dr: 0.01,
            certify_threshold: true,
            ..SolverConfig::baseline(params, 15.0)
        };
        let out = run(&cfg).unwrap();
        assert!(matches!(out.lifespan, Lifespan::BlowUp(_)));
        assert_eq!(out.threshold_certified, Some(true));
    }

    #[test]
    fn baseline_lifespan_stable_under_refinement() {
        let params = ModelParams::new(1, 1.0, 2.0, 3.0, 2.0, 1.0, 0.5).unwrap();
        let lifespan_at = |dr: f64| {
            let cfg = SolverConfig {
                dr,
                ..SolverConfig::baseline(params, 15.0)
            };
            run(&cfg)
                .unwrap()
                .lifespan
                .time()
                .expect("baseline blows up")
        };
        let t1 = lifespan_at(0.02);
        let t2 = lifespan_at(0.01);
        assert!((t1 - t2).abs() <= 0.05 * t2, "lifespans {t1} vs {t2}");
    }

    #[test]
    fn baseline_functional_bounds_hold() {
        let params = ModelParams::new(1, 1.0, 2.0, 3.0, 2.0, 1.0, 0.5).unwrap();
        let cfg = SolverConfig {
            dr: 0.01,
            ..SolverConfig::baseline(params, 15.0)
        };
        let out = run(&cfg).unwrap();
        assert!(matches!(out.lifespan, Lifespan::BlowUp(_)));
        let report = diagnostics(&out);
        assert!(
            report.clean(),
            "violations: {:?}",
            report.violations.iter().take(5).collect::<Vec<_>>()
        );
        assert!(report.samples_checked > 50);
    }

    #[test]
    fn weak_residual_decreases_under_refinement() {
        let params = ModelParams::new(1, 1.0, 2.0, 3.0, 2.0, 1.0, 0.5).unwrap();
        let coarse = SolverConfig {
            dr: 0.02,
            sample_every: Some(40),
            ..SolverConfig::baseline(params, 15.0)
        };
        let fine = SolverConfig {
            dr: 0.01,
            sample_every: Some(80),
            ..SolverConfig::baseline(params, 15.0)
        };
        let rc = integrated_weak_residual(&run(&coarse).unwrap(), 0.9);
        let rf = integrated_weak_residual(&run(&fine).unwrap(), 0.9);
        assert!(
            rf < rc,
            "residual did not decrease: coarse {rc:e}, fine {rf:e}"
        );
    }
}
