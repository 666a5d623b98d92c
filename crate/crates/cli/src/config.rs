//! Scenario configuration in INI form.
//!
//! ```ini
//! [params]
//! mu = 1.0
//! gamma = 1.4
//!
//! [numerics]
//! n_cells = 128
//!
//! [initial]
//! b0 = 1.0
//! rho = constant 1.0
//! u = linear 0 -0.3
//!
//! [schedule]
//! t_star = 0.5
//! t_end = 1.5
//! u_in = constant 0.2
//! u_out = table outflow.csv
//!
//! [outputs]
//! series = series.csv
//! snapshot_interval = 0.25
//! ```
//!
//! Profiles are written `name arg...`: `constant c`, `linear a b`,
//! `ramp s0 v0 s1 v1`, `sinusoid mean amplitude period [phase]` or
//! `table PATH`, where PATH is a two-column CSV (optional header) resolved
//! against the config file's directory.

use std::path::{Path, PathBuf};

use ini::Ini;
use pistonpipe::{BoundarySchedule, NumericsConfig, Params, Profile};
use thiserror::Error;

const SECTIONS: [&str; 5] = ["params", "numerics", "initial", "schedule", "outputs"];
const PARAMS_KEYS: [&str; 5] = ["mu", "gamma", "stiffness_k", "damping_l", "b_rest"];
const NUMERICS_KEYS: [&str; 10] = [
    "n_cells",
    "dt_initial",
    "dt_max",
    "dt_min",
    "cfl_advection",
    "picard_tol",
    "picard_max_iter",
    "theta_viscous",
    "b_min",
    "eta_floor",
];
const INITIAL_KEYS: [&str; 4] = ["b0", "b1", "rho", "u"];
const SCHEDULE_KEYS: [&str; 5] = ["t_star", "t_end", "u_in", "rho_in", "u_out"];
const OUTPUTS_KEYS: [&str; 4] = ["series", "summary", "snapshot_interval", "snapshot_prefix"];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("unknown section [{section}]; valid sections: {}", SECTIONS.join(", "))]
    UnknownSection { section: String },
    #[error("unknown key `{path}`; valid keys: {valid}")]
    UnknownKey { path: String, valid: String },
    #[error("`{path}` is given more than once")]
    Duplicate { path: String },
    #[error("`{path}`: {reason}")]
    Invalid { path: String, reason: String },
}

fn invalid(path: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        path: path.into(),
        reason: reason.into(),
    }
}

/// Initial data on `x in [0, b0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialConfig {
    pub b0: f64,
    pub b1: f64,
    pub rho: Profile,
    pub u: Profile,
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig {
            b0: 1.0,
            b1: 0.0,
            rho: Profile::constant(1.0),
            u: Profile::constant(0.0),
        }
    }
}

/// File names are relative to the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub series: String,
    pub summary: String,
    /// Simulated time between snapshots; `None` disables them.
    pub snapshot_interval: Option<f64>,
    pub snapshot_prefix: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            series: "series.csv".into(),
            summary: "summary.json".into(),
            snapshot_interval: None,
            snapshot_prefix: "snapshot".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub params: Params,
    pub numerics: NumericsConfig,
    pub initial: InitialConfig,
    pub schedule: BoundarySchedule,
    pub outputs: OutputConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            params: Params::default(),
            numerics: NumericsConfig::default(),
            initial: InitialConfig::default(),
            schedule: BoundarySchedule {
                t_star: 0.0,
                t_end: 1.0,
                u_in: Profile::constant(0.0),
                rho_in: Profile::constant(1.0),
                u_out: Profile::constant(0.0),
            },
            outputs: OutputConfig::default(),
        }
    }
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.into(),
        source,
    })?;
    parse_config(&text, path.parent().unwrap_or(Path::new(".")))
}

/// Parses and validates a configuration. Table paths resolve against `base_dir`.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<ScenarioConfig, ConfigError> {
    let ini = Ini::load_from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    let mut cfg = ScenarioConfig::default();
    for (section, props) in ini.iter() {
        let Some(section) = section else {
            if let Some((key, _)) = props.iter().next() {
                return Err(ConfigError::Invalid {
                    path: key.to_string(),
                    reason: "keys must appear inside a section".into(),
                });
            }
            continue;
        };
        let valid: &[&str] = match section {
            "params" => &PARAMS_KEYS,
            "numerics" => &NUMERICS_KEYS,
            "initial" => &INITIAL_KEYS,
            "schedule" => &SCHEDULE_KEYS,
            "outputs" => &OUTPUTS_KEYS,
            other => {
                return Err(ConfigError::UnknownSection {
                    section: other.to_string(),
                })
            }
        };
        let mut seen: Vec<&str> = Vec::new();
        for (key, value) in props.iter() {
            let path = format!("{section}.{key}");
            if !valid.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    path,
                    valid: valid.join(", "),
                });
            }
            if seen.contains(&key) {
                return Err(ConfigError::Duplicate { path });
            }
            seen.push(key);
            apply(&mut cfg, section, key, value.trim(), &path, base_dir)?;
        }
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn apply(
    cfg: &mut ScenarioConfig,
    section: &str,
    key: &str,
    value: &str,
    path: &str,
    base_dir: &Path,
) -> Result<(), ConfigError> {
    let num = || parse_f64(value, path);
    match (section, key) {
        ("params", "mu") => cfg.params.mu = num()?,
        ("params", "gamma") => cfg.params.gamma = num()?,
        ("params", "stiffness_k") => cfg.params.stiffness_k = num()?,
        ("params", "damping_l") => cfg.params.damping_l = num()?,
        ("params", "b_rest") => cfg.params.b_rest = num()?,
        ("numerics", "n_cells") => cfg.numerics.n_cells = parse_usize(value, path)?,
        ("numerics", "dt_initial") => cfg.numerics.dt_initial = num()?,
        ("numerics", "dt_max") => cfg.numerics.dt_max = num()?,
        ("numerics", "dt_min") => cfg.numerics.dt_min = num()?,
        ("numerics", "cfl_advection") => cfg.numerics.cfl_advection = num()?,
        ("numerics", "picard_tol") => cfg.numerics.picard_tol = num()?,
        ("numerics", "picard_max_iter") => cfg.numerics.picard_max_iter = parse_usize(value, path)?,
        ("numerics", "theta_viscous") => cfg.numerics.theta_viscous = num()?,
        ("numerics", "b_min") => cfg.numerics.b_min = num()?,
        ("numerics", "eta_floor") => cfg.numerics.eta_floor = num()?,
        ("initial", "b0") => cfg.initial.b0 = num()?,
        ("initial", "b1") => cfg.initial.b1 = num()?,
        ("initial", "rho") => cfg.initial.rho = parse_profile(value, path, base_dir)?,
        ("initial", "u") => cfg.initial.u = parse_profile(value, path, base_dir)?,
        ("schedule", "t_star") => cfg.schedule.t_star = num()?,
        ("schedule", "t_end") => cfg.schedule.t_end = num()?,
        ("schedule", "u_in") => cfg.schedule.u_in = parse_profile(value, path, base_dir)?,
        ("schedule", "rho_in") => cfg.schedule.rho_in = parse_profile(value, path, base_dir)?,
        ("schedule", "u_out") => cfg.schedule.u_out = parse_profile(value, path, base_dir)?,
        ("outputs", "series") => cfg.outputs.series = value.to_string(),
        ("outputs", "summary") => cfg.outputs.summary = value.to_string(),
        ("outputs", "snapshot_interval") => cfg.outputs.snapshot_interval = Some(num()?),
        ("outputs", "snapshot_prefix") => cfg.outputs.snapshot_prefix = value.to_string(),
        _ => unreachable!("key list and match arms agree"),
    }
    Ok(())
}

fn parse_f64(value: &str, path: &str) -> Result<f64, ConfigError> {
    let x: f64 = value
        .parse()
        .map_err(|_| invalid(path, format!("expected a number, got `{value}`")))?;
    if !x.is_finite() {
        return Err(invalid(
            path,
            format!("expected a finite number, got `{value}`"),
        ));
    }
    Ok(x)
}

fn parse_usize(value: &str, path: &str) -> Result<usize, ConfigError> {
    value.parse().map_err(|_| {
        invalid(
            path,
            format!("expected a non-negative integer, got `{value}`"),
        )
    })
}

/// Parses `name arg...`; commas between arguments are accepted.
pub fn parse_profile(value: &str, path: &str, base_dir: &Path) -> Result<Profile, ConfigError> {
    let mut parts = value
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty());
    let name = parts.next().ok_or_else(|| invalid(path, "empty profile"))?;
    let args: Vec<&str> = parts.collect();
    if name == "table" {
        let [file] = args[..] else {
            return Err(invalid(path, "`table` takes one CSV path"));
        };
        return read_table(&base_dir.join(file), path);
    }
    let nums = args
        .iter()
        .map(|a| parse_f64(a, path))
        .collect::<Result<Vec<f64>, _>>()?;
    let arity = |lo: usize, hi: usize| {
        if nums.len() < lo || nums.len() > hi {
            let want = if lo == hi {
                lo.to_string()
            } else {
                format!("{lo} or {hi}")
            };
            Err(invalid(
                path,
                format!("`{name}` takes {want} numbers, got {}", nums.len()),
            ))
        } else {
            Ok(())
        }
    };
    match name {
        "constant" => {
            arity(1, 1)?;
            Ok(Profile::constant(nums[0]))
        }
        "linear" => {
            arity(2, 2)?;
            Ok(Profile::Linear {
                intercept: nums[0],
                slope: nums[1],
            })
        }
        "ramp" => {
            arity(4, 4)?;
            if !(nums[2] > nums[0]) {
                return Err(invalid(path, "ramp needs s1 > s0"));
            }
            Ok(Profile::Ramp {
                s0: nums[0],
                v0: nums[1],
                s1: nums[2],
                v1: nums[3],
            })
        }
        "sinusoid" => {
            arity(3, 4)?;
            if !(nums[2] > 0.0) {
                return Err(invalid(path, "sinusoid period must be positive"));
            }
            Ok(Profile::Sinusoid {
                mean: nums[0],
                amplitude: nums[1],
                period: nums[2],
                phase: nums.get(3).copied().unwrap_or(0.0),
            })
        }
        other => Err(invalid(
            path,
            format!(
                "unknown preset `{other}`; valid presets: constant, linear, ramp, sinusoid, table"
            ),
        )),
    }
}

fn read_table(file: &Path, path: &str) -> Result<Profile, ConfigError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(file)
        .map_err(|e| invalid(path, format!("cannot read table {}: {e}", file.display())))?;
    let (mut s, mut values) = (Vec::new(), Vec::new());
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| invalid(path, format!("{}: {e}", file.display())))?;
        if record.len() != 2 {
            return Err(invalid(
                path,
                format!("{}: row {} needs two columns", file.display(), i + 1),
            ));
        }
        let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
        match parsed {
            (Ok(a), Ok(b)) => {
                s.push(a);
                values.push(b);
            }
            // a non-numeric first row is a header
            _ if i == 0 => {}
            _ => {
                return Err(invalid(
                    path,
                    format!("{}: row {} is not numeric", file.display(), i + 1),
                ))
            }
        }
    }
    Profile::tabulated(s, values).map_err(|e| invalid(path, format!("{}: {e}", file.display())))
}

/// Abscissae of a tabulated profile must lie in `[lo, hi]`.
fn check_table_domain(profile: &Profile, path: &str, lo: f64, hi: f64) -> Result<(), ConfigError> {
    if let Profile::Tabulated { s, .. } = profile {
        let (first, last) = (s[0], s[s.len() - 1]);
        if first < lo || last > hi {
            return Err(invalid(
                path,
                format!("table covers [{first}, {last}], outside its domain [{lo}, {hi}]"),
            ));
        }
    }
    Ok(())
}

fn validate(cfg: &ScenarioConfig) -> Result<(), ConfigError> {
    cfg.params.validate().map_err(|e| match e {
        pistonpipe::Error::InvalidParam { name, reason } => {
            invalid(format!("params.{name}"), reason)
        }
        other => invalid("params", other.to_string()),
    })?;
    cfg.numerics.validate().map_err(|e| match e {
        pistonpipe::Error::InvalidParam { name, reason } => {
            invalid(format!("numerics.{name}"), reason)
        }
        other => invalid("numerics", other.to_string()),
    })?;

    let init = &cfg.initial;
    if !(init.b0 > 0.0) {
        return Err(invalid(
            "initial.b0",
            format!(
                "the initial piston position must satisfy b0 > 0, got {}",
                init.b0
            ),
        ));
    }
    check_table_domain(&init.rho, "initial.rho", 0.0, init.b0)?;
    check_table_domain(&init.u, "initial.u", 0.0, init.b0)?;
    let (rho_lo, _) = init.rho.range_on(0.0, init.b0);
    if !(rho_lo > 0.0) {
        return Err(invalid(
            "initial.rho",
            format!("initial density must be positive on [0, b0], minimum is {rho_lo}"),
        ));
    }

    let s = &cfg.schedule;
    if !(s.t_end > 0.0) {
        return Err(invalid(
            "schedule.t_end",
            format!("need t_end > 0, got {}", s.t_end),
        ));
    }
    if !(s.t_star >= 0.0 && s.t_star <= s.t_end) {
        return Err(invalid(
            "schedule.t_star",
            format!("need 0 <= t_star <= t_end, got {}", s.t_star),
        ));
    }
    for (profile, path) in [
        (&s.u_in, "schedule.u_in"),
        (&s.rho_in, "schedule.rho_in"),
        (&s.u_out, "schedule.u_out"),
    ] {
        check_table_domain(profile, path, 0.0, s.t_end)?;
    }
    if s.t_star > 0.0 {
        let (u_lo, _) = s.u_in.range_on(0.0, s.t_star);
        if u_lo < 0.0 {
            return Err(invalid(
                "schedule.u_in",
                format!("inflow needs u_in >= 0 on [0, t_star), minimum is {u_lo}"),
            ));
        }
        let (r_lo, _) = s.rho_in.range_on(0.0, s.t_star);
        if !(r_lo > 0.0) {
            return Err(invalid(
                "schedule.rho_in",
                format!("inflow density must be positive, minimum is {r_lo}"),
            ));
        }
    }
    if s.t_star < s.t_end {
        let (_, hi) = s.u_out.range_on(s.t_star, s.t_end);
        if hi > 0.0 {
            return Err(invalid(
                "schedule.u_out",
                format!("outflow needs u_out <= 0 on [t_star, t_end], maximum is {hi}"),
            ));
        }
    }
    for warning in s
        .validate()
        .map_err(|e| invalid("schedule", e.to_string()))?
    {
        log::warn!("schedule: {warning}");
    }

    if let Some(dt) = cfg.outputs.snapshot_interval {
        if !(dt > 0.0) {
            return Err(invalid(
                "outputs.snapshot_interval",
                format!("must be positive, got {dt}"),
            ));
        }
    }
    for (name, path) in [
        (&cfg.outputs.series, "outputs.series"),
        (&cfg.outputs.summary, "outputs.summary"),
    ] {
        if name.is_empty() {
            return Err(invalid(path, "file name is empty"));
        }
    }
    Ok(())
}
