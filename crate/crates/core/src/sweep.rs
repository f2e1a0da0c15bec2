//! ε-sweeps: drive the solver across a ladder of data amplitudes, fit the
//! measured lifespan scaling `T_num(ε) ~ ε^{−k}`, and compare row-wise
//! against the explicit bounds of the iteration argument.
//!
//! Per-ε horizons are set to three times the applicable blow-up time bound,
//! so an honest bound cannot be masked by an early cutoff. Runs are
//! independent; the concurrent and serial paths produce identical results
//! and rows are ordered by ε regardless of completion order.

use crate::error::{Error, Result};
use crate::exponents::{
    check_combined, check_improved, lifespan_exponent_combined, lifespan_exponent_improved,
};
use crate::field::RadialField;
use crate::iteration::{bound_time, holder_constant, Branch, DataIntegrals, IterationConstants};
use crate::num::Real;
use crate::solver::{run, Lifespan, SolverConfig};
use crate::special::{radial_integral_against, yz_probe, Weight};

/// Time range and resolution of the probe that calibrates the empirical C₁.
const PROBE_T_MAX: f64 = 50.0;
const PROBE_T_STEPS: usize = 26;
const PROBE_DR: f64 = 0.02;

/// Sweep description: a solver template (its `eps`, `t_end` and `r_max` are
/// recomputed per row) plus the amplitude ladder.
#[derive(Debug, Clone)]
pub struct SweepConfig<T> {
    pub template: SolverConfig<T>,
    /// Amplitudes, strictly decreasing; at least 4 spanning a factor ≥ 8.
    pub eps_list: Vec<T>,
    /// Run the rows on separate threads (identical results either way).
    pub parallel: bool,
}

/// One sweep row.
#[derive(Debug, Clone, Copy)]
pub struct SweepRow<T> {
    pub eps: T,
    /// Measured lifespan; `None` for a survived run.
    pub t_num: Option<T>,
    /// `max(1, C₇ ε^{−k₁})`, when the combined bound applies.
    pub bound_combined: Option<T>,
    /// `max(1, C₁₃ ε^{−k₂})`, when the improved bound applies.
    pub bound_improved: Option<T>,
}

/// Least-squares fit of `log T_num` on `log ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit<T> {
    pub slope: T,
    pub intercept: T,
    pub stderr: T,
}

/// Everything a sweep produces.
#[derive(Debug, Clone)]
pub struct SweepResult<T> {
    pub rows: Vec<SweepRow<T>>,
    /// Absent when fewer than 4 runs blew up.
    pub fit: Option<ScalingFit<T>>,
    /// Theory exponent of the combined bound, when applicable.
    pub k1: Option<T>,
    /// Theory exponent of the improved bound, when applicable.
    pub k2: Option<T>,
    /// Number of survived (flagged) runs.
    pub survived: usize,
    /// The constants used for the bounds.
    pub constants: IterationConstants<T>,
}

/// Data integrals of the unit-amplitude profile configured in `template`.
pub fn unit_data_integrals<T: Real>(template: &SolverConfig<T>) -> Result<DataIntegrals<T>> {
    let params = &template.params;
    let r = params.support_radius;
    let dr = r / T::of(2048.0);
    let len = 2048 + 9;
    let profile = template.profile;
    let g = RadialField::from_fn(params.n, dr, len, |x| profile.value(x, r))?;
    let int_g_phi1 = radial_integral_against(Weight::Phi1, &g);
    let int_g = radial_integral_against(Weight::One, &g);
    let int_f_phi1 = if template.zero_f {
        T::zero()
    } else {
        int_g_phi1
    };
    Ok(DataIntegrals {
        int_f_phi1,
        int_g_phi1,
        int_g,
    })
}

/// Builds the iteration constants for a template: data integrals from the
/// profile, C₁ from the integral probe over `t ∈ [0, 50]`, C₄ from the
/// Hölder bound.
pub fn build_constants<T: Real>(template: &SolverConfig<T>) -> Result<IterationConstants<T>> {
    let params = &template.params;
    let data = unit_data_integrals(template)?;
    let t_grid: Vec<T> = (0..=PROBE_T_STEPS)
        .map(|k| T::of(PROBE_T_MAX) * T::of_usize(k) / T::of_usize(PROBE_T_STEPS))
        .collect();
    let probe = yz_probe(
        params.n,
        params.p,
        params.support_radius,
        &t_grid,
        T::of(PROBE_DR),
    )?;
    let c4 = holder_constant(params.n, params.q, params.support_radius);
    IterationConstants::build(params, &data, probe.c1, c4)
}

fn validate_eps_list<T: Real>(eps_list: &[T]) -> Result<()> {
    if eps_list.len() < 4 {
        return Err(Error::Config(format!(
            "eps_list: the scaling fit needs at least 4 amplitudes, got {}",
            eps_list.len()
        )));
    }
    for e in eps_list {
        if !(*e > T::zero()) || !e.is_finite() {
            return Err(Error::Config(format!(
                "eps_list: amplitudes must be finite and > 0, got {e}"
            )));
        }
    }
    for pair in eps_list.windows(2) {
        if !(pair[1] < pair[0]) {
            return Err(Error::Config(
                "eps_list: amplitudes must be strictly decreasing".into(),
            ));
        }
    }
    let span = eps_list[0] / eps_list[eps_list.len() - 1];
    if span < T::of(8.0) {
        return Err(Error::Config(format!(
            "eps_list: amplitudes should span close to a decade (factor >= 8), got {span}"
        )));
    }
    Ok(())
}

/// Solver configuration for one row: horizon 3× the tightest applicable
/// bound, domain sized to match.
fn row_config<T: Real>(
    template: &SolverConfig<T>,
    constants: &IterationConstants<T>,
    eps: T,
) -> Result<SolverConfig<T>> {
    let params = template.params.with_eps(eps);
    let mut bounds = Vec::new();
    if check_combined(&params).satisfied() && constants.c7.is_some() {
        bounds.push(bound_time(Branch::Combined, &params, constants, eps)?);
    }
    if check_improved(&params).satisfied() && constants.c13.is_some() {
        bounds.push(bound_time(Branch::Improved, &params, constants, eps)?);
    }
    let tightest = bounds.iter().copied().fold(T::infinity(), T::min);
    if !tightest.is_finite() {
        return Err(Error::Condition(
            "sweep: no lifespan bound applies to these parameters (check the regime report)".into(),
        ));
    }
    let t_end = T::of(3.0) * tightest;
    let mut cfg = template.clone();
    cfg.params = params;
    cfg.t_end = t_end;
    cfg.r_max = t_end + params.support_radius + T::of(16.0) * template.dr;
    Ok(cfg)
}

/// Runs the sweep. Rows execute concurrently when `parallel` is set; the
/// aggregation is a deterministic reduce keyed by ε.
pub fn sweep<T: Real>(cfg: &SweepConfig<T>) -> Result<SweepResult<T>> {
    validate_eps_list(&cfg.eps_list)?;
    let constants = build_constants(&cfg.template)?;
    let params0 = &cfg.template.params;
    let k1 = check_combined(params0)
        .satisfied()
        .then(|| lifespan_exponent_combined(params0).expect("checked"));
    let k2 = check_improved(params0)
        .satisfied()
        .then(|| lifespan_exponent_improved(params0).expect("checked"));

    let configs: Vec<SolverConfig<T>> = cfg
        .eps_list
        .iter()
        .map(|&eps| row_config(&cfg.template, &constants, eps))
        .collect::<Result<_>>()?;

    let outcomes: Vec<Result<Lifespan<T>>> = if cfg.parallel {
        std::thread::scope(|scope| {
            let handles: Vec<_> = configs
                .iter()
                .map(|rc| scope.spawn(move || run(rc).map(|o| o.lifespan)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sweep worker panicked"))
                .collect()
        })
    } else {
        configs
            .iter()
            .map(|rc| run(rc).map(|o| o.lifespan))
            .collect()
    };

    let mut rows = Vec::with_capacity(cfg.eps_list.len());
    let mut survived = 0usize;
    for (rc, outcome) in configs.iter().zip(outcomes) {
        let eps = rc.params.eps;
        let lifespan = outcome?;
        let t_num = lifespan.time();
        if t_num.is_none() {
            survived += 1;
        }
        let bound_combined = (check_combined(&rc.params).satisfied() && constants.c7.is_some())
            .then(|| bound_time(Branch::Combined, &rc.params, &constants, eps).expect("checked"));
        let bound_improved = (check_improved(&rc.params).satisfied() && constants.c13.is_some())
            .then(|| bound_time(Branch::Improved, &rc.params, &constants, eps).expect("checked"));
        rows.push(SweepRow {
            eps,
            t_num,
            bound_combined,
            bound_improved,
        });
    }

    let points: Vec<(T, T)> = rows
        .iter()
        .filter_map(|r| r.t_num.map(|t| (r.eps, t)))
        .collect();
    let fit = if points.len() >= 4 {
        fit_log_log(&points).ok()
    } else {
        None
    };
    Ok(SweepResult {
        rows,
        fit,
        k1,
        k2,
        survived,
        constants,
    })
}

/// Ordinary least squares of `log T` on `log ε` over `(ε, T)` points.
pub fn fit_log_log<T: Real>(points: &[(T, T)]) -> Result<ScalingFit<T>> {
    if points.len() < 4 {
        return Err(Error::Config(format!(
            "fit: needs at least 4 finite lifespans, got {}",
            points.len()
        )));
    }
    let m = T::of_usize(points.len());
    let xs: Vec<T> = points.iter().map(|(e, _)| e.ln()).collect();
    let ys: Vec<T> = points.iter().map(|(_, t)| t.ln()).collect();
    let xbar = xs.iter().copied().sum::<T>() / m;
    let ybar = ys.iter().copied().sum::<T>() / m;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (*x - xbar) * (*x - xbar);
        sxy += (*x - xbar) * (*y - ybar);
    }
    if !(sxx > T::zero()) {
        return Err(Error::Numerical(
            "fit: degenerate design (all amplitudes equal)".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let mut ss_res = T::zero();
    for (x, y) in xs.iter().zip(&ys) {
        let r = *y - (intercept + slope * *x);
        ss_res += r * r;
    }
    let dof = m - T::of(2.0);
    let stderr = if dof > T::zero() {
        (ss_res / dof / sxx).sqrt()
    } else {
        T::zero()
    };
    Ok(ScalingFit {
        slope,
        intercept,
        stderr,
    })
}

/// Fitted slope and its standard error of a completed sweep.
pub fn fit_exponent<T: Real>(result: &SweepResult<T>) -> Result<ScalingFit<T>> {
    let points: Vec<(T, T)> = result
        .rows
        .iter()
        .filter_map(|r| r.t_num.map(|t| (r.eps, t)))
        .collect();
    fit_log_log(&points)
}

/// Row-wise verdict of the bound comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    /// `T_num ≤ T_bound` held for every applicable bound.
    WithinBound,
    /// `T_num` exceeded a bound (advisory: C₁/C₄ are empirical).
    ExceededBound,
    /// Bound saturated at the `max(1,·)` floor; comparison skipped.
    SkippedSaturated,
    /// Run survived; nothing to compare.
    Survived,
}

#[derive(Debug, Clone, Copy)]
pub struct RowVerdict<T> {
    pub eps: T,
    pub status: RowStatus,
    /// `T_bound − T_num` against the tightest applicable bound.
    pub margin: Option<T>,
}

/// Comparison of measured lifespans against the bounds.
#[derive(Debug, Clone)]
pub struct CompareReport<T> {
    pub rows: Vec<RowVerdict<T>>,
    /// Rows where a bound was exceeded (warn severity).
    pub warnings: usize,
    /// Whether the improved bound was the tighter one wherever both applied.
    pub improved_dominated: Option<bool>,
}

/// Checks `T_num(ε) ≤ T_bound(ε)` row-wise and reports margins. The
/// theorems bound the lifespan from above, so with honestly built constants
/// every measured lifespan must sit below its bound; violations are
/// reported at severity "warn" because C₁ and C₄ are empirical.
pub fn compare<T: Real>(result: &SweepResult<T>) -> CompareReport<T> {
    let mut rows = Vec::with_capacity(result.rows.len());
    let mut warnings = 0usize;
    let mut improved_dominated: Option<bool> = None;
    for row in &result.rows {
        let tightest = match (row.bound_combined, row.bound_improved) {
            (Some(a), Some(b)) => {
                let dom = b < a;
                improved_dominated = Some(improved_dominated.map_or(dom, |prev| prev && dom));
                Some(a.min(b))
            }
            (Some(a), None) => Some(a),
            (None, Some(b)) => Some(b),
            (None, None) => None,
        };
        let verdict = match (row.t_num, tightest) {
            (None, _) => RowVerdict {
                eps: row.eps,
                status: RowStatus::Survived,
                margin: None,
            },
            (Some(_), None) => RowVerdict {
                eps: row.eps,
                status: RowStatus::SkippedSaturated,
                margin: None,
            },
            (Some(t), Some(b)) => {
                if b <= T::one() {
                    RowVerdict {
                        eps: row.eps,
                        status: RowStatus::SkippedSaturated,
                        margin: None,
                    }
                } else if t <= b {
                    RowVerdict {
                        eps: row.eps,
                        status: RowStatus::WithinBound,
                        margin: Some(b - t),
                    }
                } else {
                    warnings += 1;
                    RowVerdict {
                        eps: row.eps,
                        status: RowStatus::ExceededBound,
                        margin: Some(b - t),
                    }
                }
            }
        };
        rows.push(verdict);
    }
    CompareReport {
        rows,
        warnings,
        improved_dominated,
    }
}
