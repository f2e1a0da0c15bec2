//! Plain-text run configuration: `key=value` pairs shared by every
//! subcommand, with documented defaults, strict key checking, and a footer
//! echo format that re-parses to the identical configuration.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::solver::{DataProfile, SolverConfig};

/// Keys accepted in configuration files and footers.
pub const CONFIG_KEYS: &[&str] = &[
    "n",
    "mu",
    "beta",
    "p",
    "q",
    "R",
    "eps",
    "eps_list",
    "dr",
    "cfl",
    "r_max",
    "t_end",
    "profile",
    "blowup_threshold",
    "output_path",
];

/// Fully resolved run configuration (f64; the CLI precision).
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: u32,
    pub mu: f64,
    pub beta: f64,
    pub p: f64,
    pub q: f64,
    pub r_support: f64,
    pub eps: f64,
    pub eps_list: Option<Vec<f64>>,
    pub dr: f64,
    pub cfl: f64,
    pub r_max: Option<f64>,
    pub t_end: Option<f64>,
    pub profile: DataProfile,
    pub blowup_threshold: Option<f64>,
    pub output_path: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 1,
            mu: 1.0,
            beta: 2.0,
            p: 3.0,
            q: 2.0,
            r_support: 1.0,
            eps: 0.5,
            eps_list: None,
            dr: 0.01,
            cfl: 0.4,
            r_max: None,
            t_end: None,
            profile: DataProfile::Bump,
            blowup_threshold: None,
            output_path: None,
        }
    }
}

fn parse_num(key: &str, value: &str) -> Result<f64> {
    value
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("{key}: expected a number, got '{value}'")))
}

impl RunConfig {
    /// Applies one `key=value` assignment; unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "n" => {
                self.n = value.parse::<u32>().map_err(|_| {
                    Error::Config(format!("n: expected a positive integer, got '{value}'"))
                })?
            }
            "mu" => self.mu = parse_num(key, value)?,
            "beta" => self.beta = parse_num(key, value)?,
            "p" => self.p = parse_num(key, value)?,
            "q" => self.q = parse_num(key, value)?,
            "R" => self.r_support = parse_num(key, value)?,
            "eps" => self.eps = parse_num(key, value)?,
            "eps_list" => {
                if value.is_empty() {
                    self.eps_list = None;
                } else {
                    let list: Result<Vec<f64>> = value
                        .split(',')
                        .map(|tok| parse_num("eps_list", tok))
                        .collect();
                    self.eps_list = Some(list?);
                }
            }
            "dr" => self.dr = parse_num(key, value)?,
            "cfl" => self.cfl = parse_num(key, value)?,
            "r_max" => {
                self.r_max = if value.is_empty() {
                    None
                } else {
                    Some(parse_num(key, value)?)
                }
            }
            "t_end" => {
                self.t_end = if value.is_empty() {
                    None
                } else {
                    Some(parse_num(key, value)?)
                }
            }
            "profile" => self.profile = value.parse()?,
            "blowup_threshold" => {
                self.blowup_threshold = if value.is_empty() {
                    None
                } else {
                    Some(parse_num(key, value)?)
                }
            }
            "output_path" => {
                self.output_path = if value.is_empty() {
                    None
                } else {
                    Some(value.to_string())
                }
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown configuration key '{other}' (known keys: {})",
                    CONFIG_KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Parses a configuration file: one `key = value` per line, `#` comments.
    pub fn from_file_text(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "config line {}: expected key=value, got '{line}'",
                    lineno + 1
                ))
            })?;
            cfg.set(key.trim(), value)?;
        }
        Ok(cfg)
    }

    /// Echo as footer lines (`# config key=value`), one per key, in fixed
    /// order. Re-parsing the footer reproduces this configuration exactly.
    pub fn footer_lines(&self) -> Vec<String> {
        let mut map: BTreeMap<&str, String> = BTreeMap::new();
        map.insert("n", self.n.to_string());
        map.insert("mu", self.mu.to_string());
        map.insert("beta", self.beta.to_string());
        map.insert("p", self.p.to_string());
        map.insert("q", self.q.to_string());
        map.insert("R", self.r_support.to_string());
        map.insert("eps", self.eps.to_string());
        map.insert(
            "eps_list",
            self.eps_list
                .as_ref()
                .map(|l| {
                    l.iter()
                        .map(|e| e.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                })
                .unwrap_or_default(),
        );
        map.insert("dr", self.dr.to_string());
        map.insert("cfl", self.cfl.to_string());
        map.insert(
            "r_max",
            self.r_max.map(|v| v.to_string()).unwrap_or_default(),
        );
        map.insert(
            "t_end",
            self.t_end.map(|v| v.to_string()).unwrap_or_default(),
        );
        map.insert("profile", self.profile.to_string());
        map.insert(
            "blowup_threshold",
            self.blowup_threshold
                .map(|v| v.to_string())
                .unwrap_or_default(),
        );
        map.insert("output_path", self.output_path.clone().unwrap_or_default());
        CONFIG_KEYS
            .iter()
            .map(|k| format!("# config {k}={}", map[k]))
            .collect()
    }

    /// Parses `# config key=value` lines (ignoring everything else).
    pub fn from_footer(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for line in text.lines() {
            if let Some(rest) = line.trim().strip_prefix("# config ") {
                if let Some((key, value)) = rest.split_once('=') {
                    cfg.set(key.trim(), value)?;
                }
            }
        }
        Ok(cfg)
    }

    pub fn model_params(&self) -> Result<ModelParams<f64>> {
        ModelParams::new(
            self.n,
            self.mu,
            self.beta,
            self.p,
            self.q,
            self.r_support,
            self.eps,
        )
    }

    /// Resolved horizon (default 20).
    pub fn t_end_resolved(&self) -> f64 {
        self.t_end.unwrap_or(20.0)
    }

    /// Resolved domain extent (default `t_end + R + 16 dr`).
    pub fn r_max_resolved(&self) -> f64 {
        self.r_max
            .unwrap_or_else(|| self.t_end_resolved() + self.r_support + 16.0 * self.dr)
    }

    pub fn solver_config(&self) -> Result<SolverConfig<f64>> {
        Ok(SolverConfig {
            params: self.model_params()?,
            dr: self.dr,
            cfl: self.cfl,
            r_max: self.r_max_resolved(),
            t_end: self.t_end_resolved(),
            profile: self.profile,
            blowup_threshold: self.blowup_threshold,
            zero_f: false,
            zero_g: false,
            disable_nonlinearity: false,
            sample_every: None,
            certify_threshold: false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_parsing_and_defaults() {
        let cfg = RunConfig::from_file_text(
            "# comment\nn = 3\nmu=2.5\neps_list = 0.4, 0.2, 0.1, 0.05\nprofile = plateau\n",
        )
        .unwrap();
        assert_eq!(cfg.n, 3);
        assert_eq!(cfg.mu, 2.5);
        assert_eq!(cfg.eps_list.as_deref(), Some(&[0.4, 0.2, 0.1, 0.05][..]));
        assert_eq!(cfg.profile, DataProfile::Plateau);
        assert_eq!(cfg.beta, 2.0); // default
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_file_text("dt = 0.1\n").is_err());
        let mut cfg = RunConfig::default();
        assert!(cfg.set("nonsense", "1").is_err());
    }

    #[test]
    fn footer_round_trip_is_identity() {
        let mut cfg = RunConfig::default();
        cfg.set("n", "2").unwrap();
        cfg.set("p", "5").unwrap();
        cfg.set("q", "1.8").unwrap();
        cfg.set("eps_list", "0.4,0.2,0.1,0.05").unwrap();
        cfg.set("t_end", "12.5").unwrap();
        cfg.set("output_path", "rows.csv").unwrap();
        let footer = cfg.footer_lines().join("\n");
        let reparsed = RunConfig::from_footer(&footer).unwrap();
        assert_eq!(cfg, reparsed);
    }
}
