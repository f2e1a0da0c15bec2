//! End-to-end checks of the command-line tool: exit codes, CSV shapes,
//! config round-trips.

use std::process::Command;

use lifespan_lab::config::RunConfig;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lifespan-lab"))
}

fn tmpfile(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join("lifespan-lab-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn exponents_reports_and_exits_zero() {
    let output = bin()
        .args(["exponents", "--n", "3", "--p", "2", "--q", "2"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("combined-regime bound"));
    assert!(text.contains("k1 ="));
}

#[test]
fn iterate_rejects_inapplicable_parameters_with_exit_one() {
    let output = bin()
        .args(["iterate", "--n", "2", "--p", "5", "--q", "3.5"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let err = String::from_utf8(output.stderr).unwrap();
    assert!(err.contains("condition violated"), "stderr: {err}");
    assert!(
        err.contains("q <"),
        "stderr names the failing inequality: {err}"
    );
}

#[test]
fn sweep_rejects_short_ladder_with_exit_two() {
    let output = bin()
        .args(["sweep", "--eps-list", "0.4,0.2"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let err = String::from_utf8(output.stderr).unwrap();
    assert!(err.contains("eps_list"), "stderr: {err}");
}

#[test]
fn unknown_config_key_exits_two() {
    let path = tmpfile("bad.conf");
    std::fs::write(&path, "dt = 0.1\n").unwrap();
    let output = bin()
        .args(["simulate", "--config", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let err = String::from_utf8(output.stderr).unwrap();
    assert!(
        err.contains("unknown configuration key 'dt'"),
        "stderr: {err}"
    );
}

#[test]
fn simulate_emits_trace_and_key_value_block() {
    let csv = tmpfile("trace.csv");
    let output = bin()
        .args([
            "simulate",
            "--eps",
            "0.5",
            "--dr",
            "0.02",
            "--t-end",
            "6",
            "--output",
            csv.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("lifespan="), "stdout: {stdout}");
    assert!(stdout.contains("support_violations=0"));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,F0,F1,F2,G,max_u,max_ut,weak_residual"
    );
    let first = lines.next().unwrap();
    assert_eq!(first.split(',').count(), 8);
}

#[test]
fn sweep_footer_round_trips_to_identical_config() {
    let csv = tmpfile("sweep_roundtrip.csv");
    let output = bin()
        .args([
            "sweep",
            "--eps-list",
            "0.8,0.4,0.2,0.1",
            "--dr",
            "0.05",
            "--n",
            "1",
            "--output",
            csv.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "{:?}",
        String::from_utf8_lossy(&output.stderr)
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    let parsed = RunConfig::from_footer(&text).unwrap();
    let mut expected = RunConfig::default();
    expected.set("eps_list", "0.8,0.4,0.2,0.1").unwrap();
    expected.set("dr", "0.05").unwrap();
    expected.set("output_path", csv.to_str().unwrap()).unwrap();
    assert_eq!(parsed, expected);
    // footer of the echoed config re-parses to itself (fixed point)
    let again = RunConfig::from_footer(&parsed.footer_lines().join("\n")).unwrap();
    assert_eq!(again, parsed);
}

#[test]
fn fit_recovers_sweep_slope() {
    let csv = tmpfile("sweep_for_fit.csv");
    let output = bin()
        .args([
            "sweep",
            "--eps-list",
            "0.8,0.4,0.2,0.1",
            "--dr",
            "0.05",
            "--output",
            csv.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let footer = std::fs::read_to_string(&csv).unwrap();
    let slope_line = footer
        .lines()
        .find(|l| l.starts_with("# slope="))
        .expect("footer has slope");
    let slope_from_sweep: f64 = slope_line.trim_start_matches("# slope=").parse().unwrap();

    let output = bin()
        .args(["fit", "--input", csv.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    let slope_from_fit: f64 = stdout
        .lines()
        .find(|l| l.starts_with("slope="))
        .unwrap()
        .trim_start_matches("slope=")
        .parse()
        .unwrap();
    assert!(
        (slope_from_fit - slope_from_sweep).abs() < 1e-12,
        "{slope_from_fit} vs {slope_from_sweep}"
    );
}

#[test]
fn phi1_table_has_log_column_consistent() {
    let csv = tmpfile("phi1.csv");
    let output = bin()
        .args([
            "phi1",
            "--dr",
            "0.5",
            "--r-max",
            "10",
            "--output",
            csv.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "r,phi1,log_phi1");
    for line in lines.take_while(|l| !l.starts_with('#')) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols.len(), 3);
        assert!((cols[1].ln() - cols[2]).abs() < 1e-10 * cols[2].abs().max(1.0));
    }
}

#[test]
fn yzprobe_reports_empirical_constant() {
    let output = bin()
        .args([
            "yzprobe", "--n", "1", "--p", "2", "--t-end", "10", "--dr", "0.05",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("empirical C1"), "{stdout}");
    assert!(stdout.contains("# c1="), "{stdout}");
}

#[test]
fn iterate_emits_bound_and_table() {
    let csv = tmpfile("iterate.csv");
    let output = bin()
        .args([
            "iterate",
            "--n",
            "1",
            "--p",
            "3",
            "--q",
            "2",
            "--eps",
            "0.1",
            "--jmax",
            "10",
            "--output",
            csv.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "{:?}",
        String::from_utf8_lossy(&output.stderr)
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("j,a_j,b_j,logA_j"));
    assert_eq!(
        text.lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with('j'))
            .count(),
        10
    );
    assert!(text.contains("# T_bound="));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(
        stdout.contains("T(eps=0.1) <= max(1, C eps^-k)"),
        "{stdout}"
    );
}
