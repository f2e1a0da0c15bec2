//! Command-line laboratory: every module of the library behind one
//! executable with a shared plain-text configuration.
//!
//! Exit codes: 0 success, 1 condition-check failure (a requested bound does
//! not apply), 2 configuration error, 3 numerical failure.

// NaN-rejecting guards, as in the library.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lifespan_lab::config::RunConfig;
use lifespan_lab::error::{Error, Result};
use lifespan_lab::exponents::{regime_report, ConditionReport};
use lifespan_lab::iteration::{bound_time, sequence, Branch};
use lifespan_lab::solver::{diagnostics, run, Lifespan};
use lifespan_lab::special::{log_phi1, phi1, yz_probe};
use lifespan_lab::sweep::{build_constants, compare, fit_log_log, sweep, RowStatus, SweepConfig};

#[derive(Parser)]
#[command(
    name = "lifespan-lab",
    version,
    about = "Blow-up and lifespan laboratory for damped wave equations with combined nonlinearities"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

/// Shared configuration: an optional config file plus per-key flag
/// overrides (flags win).
#[derive(Args, Debug, Default)]
struct Overrides {
    /// Configuration file of key=value lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Spatial dimension n.
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    /// Support radius R of the initial data.
    #[arg(long = "R")]
    r_support: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    /// Comma-separated amplitude ladder for sweeps.
    #[arg(long)]
    eps_list: Option<String>,
    #[arg(long)]
    dr: Option<f64>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Initial-data profile: bump | plateau.
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    blowup_threshold: Option<f64>,
    /// Where to write the CSV table (stdout when unset).
    #[arg(long)]
    output: Option<String>,
}

impl Overrides {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    Error::Config(format!("config: cannot read {}: {e}", path.display()))
                })?;
                RunConfig::from_file_text(&text)?
            }
            None => RunConfig::default(),
        };
        if let Some(v) = self.n {
            cfg.set("n", &v.to_string())?;
        }
        for (key, v) in [
            ("mu", self.mu),
            ("beta", self.beta),
            ("p", self.p),
            ("q", self.q),
            ("R", self.r_support),
            ("eps", self.eps),
            ("dr", self.dr),
            ("cfl", self.cfl),
            ("r_max", self.r_max),
            ("t_end", self.t_end),
            ("blowup_threshold", self.blowup_threshold),
        ] {
            if let Some(v) = v {
                cfg.set(key, &v.to_string())?;
            }
        }
        if let Some(v) = &self.eps_list {
            cfg.set("eps_list", v)?;
        }
        if let Some(v) = &self.profile {
            cfg.set("profile", v)?;
        }
        if let Some(v) = &self.output {
            cfg.set("output_path", v)?;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify the parameters: applicable bounds, regions, exponents.
    Exponents(Overrides),
    /// Emit (r, phi1, log phi1) over the radial grid.
    Phi1(Overrides),
    /// Probe the weighted-psi integral bound and report the empirical C1.
    Yzprobe(Overrides),
    /// Run the iteration argument: per-j table and the blow-up time bound.
    Iterate {
        #[command(flatten)]
        overrides: Overrides,
        /// Iteration branch: combined | improved.
        #[arg(long, default_value = "combined")]
        branch: String,
        /// Largest iteration index tabulated.
        #[arg(long, default_value_t = 40)]
        jmax: u32,
    },
    /// Integrate the equation and emit the functional trace.
    Simulate(Overrides),
    /// Run an amplitude sweep and fit the lifespan scaling.
    Sweep {
        #[command(flatten)]
        overrides: Overrides,
        /// Run rows sequentially instead of on worker threads.
        #[arg(long)]
        serial: bool,
    },
    /// Fit the scaling law of an existing sweep CSV.
    Fit {
        /// Sweep CSV to read (columns eps, T_num).
        #[arg(long)]
        input: PathBuf,
    },
}

/// Writes the CSV lines to `output_path`, or to stdout when unset.
fn emit_csv(cfg: &RunConfig, lines: &[String]) -> Result<()> {
    match &cfg.output_path {
        Some(path) => {
            let mut file = fs::File::create(path)
                .map_err(|e| Error::Config(format!("output_path: cannot create {path}: {e}")))?;
            for line in lines {
                writeln!(file, "{line}")
                    .map_err(|e| Error::Config(format!("output_path: write failed: {e}")))?;
            }
            file.flush()
                .map_err(|e| Error::Config(format!("output_path: flush failed: {e}")))?;
            Ok(())
        }
        None => {
            for line in lines {
                println!("{line}");
            }
            Ok(())
        }
    }
}

fn print_condition_report(report: &ConditionReport<f64>) {
    println!(
        "  {:<28} {}",
        report.name,
        if report.satisfied() {
            "applicable"
        } else {
            "not applicable"
        }
    );
    for check in &report.checks {
        println!(
            "    {:<32} [{:<12.6} {:>2} {:<12.6}] {}",
            check.inequality,
            check.lhs,
            check.relation_symbol(),
            check.rhs,
            if check.satisfied { "ok" } else { "FAILED" }
        );
    }
}

fn cmd_exponents(cfg: &RunConfig) -> Result<()> {
    let params = cfg.model_params()?;
    let report = regime_report(&params);
    println!(
        "regime report: n={} mu={} beta={} p={} q={} R={}",
        cfg.n, cfg.mu, cfg.beta, cfg.p, cfg.q, cfg.r_support
    );
    print_condition_report(&report.combined);
    print_condition_report(&report.improved);
    print_condition_report(&report.undamped_blowup);
    print_condition_report(&report.global_existence);
    match report.exponent_combined {
        Some(k1) => println!("  k1 = {k1}  (combined bound T <= C eps^-k1)"),
        None => println!("  k1 = (combined bound not applicable)"),
    }
    match report.exponent_improved {
        Some(k2) => println!("  k2 = {k2}  (improved bound T <= C eps^-k2)"),
        None => println!("  k2 = (improved bound not applicable)"),
    }
    println!("  improved bound better: {}", report.improved_bound_better);

    if cfg.output_path.is_some() {
        let mut lines = vec![
            "n,mu,beta,p,q,R,combined,improved,undamped_blowup,global_existence,k1,k2,improved_better"
                .to_string(),
        ];
        lines.push(format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            cfg.n,
            cfg.mu,
            cfg.beta,
            cfg.p,
            cfg.q,
            cfg.r_support,
            report.combined.satisfied(),
            report.improved.satisfied(),
            report.undamped_blowup.satisfied(),
            report.global_existence.satisfied(),
            report
                .exponent_combined
                .map(|v| v.to_string())
                .unwrap_or_default(),
            report
                .exponent_improved
                .map(|v| v.to_string())
                .unwrap_or_default(),
            report.improved_bound_better
        ));
        lines.extend(cfg.footer_lines());
        emit_csv(cfg, &lines)?;
    }
    Ok(())
}

fn cmd_phi1(cfg: &RunConfig) -> Result<()> {
    let params = cfg.model_params()?;
    let r_end = cfg.r_max.unwrap_or(20.0);
    if !(r_end > 0.0) || !(cfg.dr > 0.0) {
        return Err(Error::Config(
            "phi1 table needs r_max > 0 and dr > 0".into(),
        ));
    }
    let steps = (r_end / cfg.dr).round() as usize;
    let mut lines = vec!["r,phi1,log_phi1".to_string()];
    for i in 0..=steps {
        let r = i as f64 * cfg.dr;
        lines.push(format!(
            "{r},{},{}",
            phi1(params.n, r),
            log_phi1(params.n, r)
        ));
    }
    lines.extend(cfg.footer_lines());
    emit_csv(cfg, &lines)?;
    println!(
        "phi1 table: n={} r in [0, {r_end}] step {}",
        params.n, cfg.dr
    );
    Ok(())
}

fn cmd_yzprobe(cfg: &RunConfig) -> Result<()> {
    let params = cfg.model_params()?;
    let t_end = cfg.t_end.unwrap_or(50.0);
    let t_grid: Vec<f64> = (0..=100).map(|k| t_end * k as f64 / 100.0).collect();
    let probe = yz_probe(params.n, params.p, params.support_radius, &t_grid, cfg.dr)?;
    let mut lines = vec!["t,integral,ratio".to_string()];
    for row in &probe.rows {
        lines.push(format!("{},{},{}", row.t, row.integral, row.ratio));
    }
    lines.push(format!("# c1={}", probe.c1));
    lines.push(format!("# decay_exponent={}", probe.decay_exponent));
    lines.extend(cfg.footer_lines());
    emit_csv(cfg, &lines)?;
    println!(
        "integral probe: n={} p={} R={} -> empirical C1 = {} (decay exponent {})",
        params.n, params.p, params.support_radius, probe.c1, probe.decay_exponent
    );
    Ok(())
}

fn parse_branch(name: &str) -> Result<Branch> {
    match name {
        "combined" => Ok(Branch::Combined),
        "improved" => Ok(Branch::Improved),
        other => Err(Error::Config(format!(
            "branch: expected 'combined' or 'improved', got '{other}'"
        ))),
    }
}

fn cmd_iterate(cfg: &RunConfig, branch: &str, jmax: u32) -> Result<()> {
    let branch = parse_branch(branch)?;
    let params = cfg.model_params()?;
    let report = match branch {
        Branch::Combined => lifespan_lab::exponents::check_combined(&params),
        Branch::Improved => lifespan_lab::exponents::check_improved(&params),
    };
    report.require()?;
    let template = cfg.solver_config()?;
    let constants = build_constants(&template)?;
    let eps = cfg.eps;

    let mut lines = vec!["j,a_j,b_j,logA_j".to_string()];
    for j in 1..=jmax.max(1) {
        let state = sequence(branch, &params, &constants, eps, j)?;
        lines.push(format!("{j},{},{},{}", state.a, state.b, state.log_amp));
    }
    let (k, c) = match branch {
        Branch::Combined => (
            lifespan_lab::exponents::lifespan_exponent_combined(&params)?,
            constants.c7,
        ),
        Branch::Improved => (
            lifespan_lab::exponents::lifespan_exponent_improved(&params)?,
            constants.c13,
        ),
    };
    let c = c.ok_or_else(|| {
        Error::Condition(
            "bound constant undefined for this branch (exponent denominator <= 0)".into(),
        )
    })?;
    let t_bound = bound_time(branch, &params, &constants, eps)?;
    lines.push(format!("# branch={branch}"));
    lines.push(format!("# k={k}"));
    lines.push(format!("# C={c}"));
    lines.push(format!("# T_bound={t_bound}"));
    lines.extend(cfg.footer_lines());
    emit_csv(cfg, &lines)?;
    println!(
        "iteration bound ({branch}): T(eps={eps}) <= max(1, C eps^-k) = {t_bound}  [k={k}, C={c}]"
    );
    println!(
        "constants: m0={} C1={} C3={} C4={}",
        constants.m0, constants.c1, constants.c3, constants.c4
    );
    Ok(())
}

fn cmd_simulate(cfg: &RunConfig) -> Result<()> {
    let solver_cfg = cfg.solver_config()?;
    let outcome = run(&solver_cfg)?;
    let mut lines = vec!["t,F0,F1,F2,G,max_u,max_ut,weak_residual".to_string()];
    for row in &outcome.trace.rows {
        lines.push(format!(
            "{},{},{},{},{},{},{},{}",
            row.t, row.f0, row.f1, row.f2, row.g, row.max_abs_u, row.max_abs_ut, row.weak_residual
        ));
    }
    lines.extend(cfg.footer_lines());
    emit_csv(cfg, &lines)?;

    let report = diagnostics(&outcome);
    match outcome.lifespan {
        Lifespan::BlowUp(t) => println!("lifespan={t}"),
        Lifespan::Survived => println!("lifespan=survived"),
    }
    println!("t_end={}", solver_cfg.t_end);
    println!("steps={}", outcome.steps_taken);
    println!("m0={}", outcome.m0);
    println!("int_f_phi1={}", outcome.int_f_phi1);
    println!("int_g_phi1={}", outcome.int_g_phi1);
    println!("int_g={}", outcome.int_g);
    println!("support_violations={}", outcome.support_violations);
    println!("diagnostic_violations={}", report.violations.len());
    Ok(())
}

fn cmd_sweep(cfg: &RunConfig, serial: bool) -> Result<()> {
    let mut eps_list = cfg
        .eps_list
        .clone()
        .ok_or_else(|| Error::Config("eps_list: sweep needs an amplitude ladder".into()))?;
    eps_list.sort_by(|a, b| b.partial_cmp(a).expect("finite amplitudes"));
    let template = cfg.solver_config()?;
    let result = sweep(&SweepConfig {
        template,
        eps_list,
        parallel: !serial,
    })?;

    let mut lines = vec!["eps,T_num,T_bound_combined,T_bound_improved".to_string()];
    for row in &result.rows {
        lines.push(format!(
            "{},{},{},{}",
            row.eps,
            row.t_num.map(|v| v.to_string()).unwrap_or_default(),
            row.bound_combined
                .map(|v| v.to_string())
                .unwrap_or_default(),
            row.bound_improved
                .map(|v| v.to_string())
                .unwrap_or_default(),
        ));
    }
    lines.push(format!(
        "# slope={}",
        result.fit.map(|f| f.slope.to_string()).unwrap_or_default()
    ));
    lines.push(format!(
        "# stderr={}",
        result.fit.map(|f| f.stderr.to_string()).unwrap_or_default()
    ));
    lines.push(format!(
        "# k1={}",
        result.k1.map(|v| v.to_string()).unwrap_or_default()
    ));
    lines.push(format!(
        "# k2={}",
        result.k2.map(|v| v.to_string()).unwrap_or_default()
    ));
    lines.push(format!("# survived={}", result.survived));
    lines.extend(cfg.footer_lines());
    emit_csv(cfg, &lines)?;

    match result.fit {
        Some(fit) => println!("fit: slope={} stderr={}", fit.slope, fit.stderr),
        None => println!(
            "fit: absent (fewer than 4 finite lifespans; {} survived)",
            result.survived
        ),
    }
    println!(
        "theory: k1={} k2={}",
        result
            .k1
            .map(|v| v.to_string())
            .unwrap_or_else(|| "-".into()),
        result
            .k2
            .map(|v| v.to_string())
            .unwrap_or_else(|| "-".into())
    );
    let report = compare(&result);
    for verdict in &report.rows {
        let status = match verdict.status {
            RowStatus::WithinBound => "within bound",
            RowStatus::ExceededBound => "EXCEEDED BOUND (warn: C1/C4 empirical)",
            RowStatus::SkippedSaturated => "comparison skipped (bound at floor 1)",
            RowStatus::Survived => "survived (excluded from fit)",
        };
        println!("  eps={}: {status}", verdict.eps);
    }
    if let Some(dom) = report.improved_dominated {
        println!("improved bound dominated wherever both applied: {dom}");
    }
    Ok(())
}

fn cmd_fit(input: &PathBuf) -> Result<()> {
    let text = fs::read_to_string(input)
        .map_err(|e| Error::Config(format!("input: cannot read {}: {e}", input.display())))?;
    let mut points = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("eps") {
            continue;
        }
        let mut cols = line.split(',');
        let (Some(eps), Some(t)) = (cols.next(), cols.next()) else {
            continue;
        };
        if t.trim().is_empty() {
            continue; // survived row
        }
        let eps: f64 = eps
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("input: bad eps value '{eps}'")))?;
        let t: f64 = t
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("input: bad T_num value '{t}'")))?;
        points.push((eps, t));
    }
    let fit = fit_log_log(&points)?;
    println!("slope={}", fit.slope);
    println!("stderr={}", fit.stderr);
    println!("intercept={}", fit.intercept);
    println!("points={}", points.len());
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.cmd {
        Cmd::Exponents(ov) => cmd_exponents(&ov.resolve()?),
        Cmd::Phi1(ov) => cmd_phi1(&ov.resolve()?),
        Cmd::Yzprobe(ov) => cmd_yzprobe(&ov.resolve()?),
        Cmd::Iterate {
            overrides,
            branch,
            jmax,
        } => cmd_iterate(&overrides.resolve()?, branch, *jmax),
        Cmd::Simulate(ov) => cmd_simulate(&ov.resolve()?),
        Cmd::Sweep { overrides, serial } => cmd_sweep(&overrides.resolve()?, *serial),
        Cmd::Fit { input } => cmd_fit(input),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
