//! Flat sectioned key-value run configuration.
//!
//! The format is INI-style on purpose: diff-friendly provenance, trivially
//! parseable anywhere. Unknown keys are hard errors; command-line overrides
//! take precedence over the file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use robin_sep_core::experiments::ProfileSpec;
use robin_sep_core::model::TiltField;
use robin_sep_core::params::ReservoirParams;

#[derive(Debug)]
pub struct ConfigError {
    pub message: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => {
                write!(f, "config error at line {l}, column {c}: {}", self.message)
            }
            (Some(l), None) => write!(f, "config error at line {l}: {}", self.message),
            _ => write!(f, "config error: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(message: impl Into<String>) -> ConfigError {
    ConfigError {
        message: message.into(),
        line: None,
        column: None,
    }
}

fn err_at(line: usize, column: usize, message: impl Into<String>) -> ConfigError {
    ConfigError {
        message: message.into(),
        line: Some(line),
        column: Some(column),
    }
}

/// Recognized scenario names (the CLI subcommands).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Simulate,
    Hydro,
    Controlled,
    Spectral,
    Rate,
    HydroLimit,
    Entropy,
    RareEvent,
}

impl Scenario {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        Ok(match s {
            "simulate" => Self::Simulate,
            "hydro" => Self::Hydro,
            "controlled" => Self::Controlled,
            "spectral" => Self::Spectral,
            "rate" => Self::Rate,
            "hydro-limit" => Self::HydroLimit,
            "entropy" => Self::Entropy,
            "rare-event" => Self::RareEvent,
            other => return Err(err(format!("unknown scenario {other:?}"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::Hydro => "hydro",
            Self::Controlled => "controlled",
            Self::Spectral => "spectral",
            Self::Rate => "rate",
            Self::HydroLimit => "hydro-limit",
            Self::Entropy => "entropy",
            Self::RareEvent => "rare-event",
        }
    }
}

/// Fully validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: ReservoirParams,
    pub cells: usize,
    pub time_steps: usize,
    pub t_final: f64,
    pub field: TiltField,
    pub profile: ProfileSpec,
    pub seed: u64,
    pub replicas: usize,
    pub n_scale: usize,
    pub scales: Vec<usize>,
    pub epsilon: f64,
    pub ball_radius: f64,
    pub split: f64,
    pub out_dir: PathBuf,
    pub out_stride: usize,
    pub jobs: usize,
    pub spectral_modes: usize,
    pub variational_hats: usize,
    pub variational_modes: usize,
    /// Echo of every key/value pair for the manifest.
    pub echo: BTreeMap<String, String>,
}

const KNOWN_KEYS: &[(&str, &[&str])] = &[
    ("params", &["alpha", "beta", "cap_a", "cap_b"]),
    ("grid", &["cells", "time_steps", "t_final"]),
    (
        "field",
        &["kind", "slope", "amplitude", "mode", "ramp", "file"],
    ),
    (
        "run",
        &[
            "seed",
            "replicas",
            "n_scale",
            "scales",
            "epsilon",
            "ball_radius",
            "split",
            "out_dir",
            "out_stride",
            "jobs",
            "profile",
            "profile_value",
            "step_at",
            "step_left",
            "step_right",
            "spectral_modes",
            "variational_hats",
            "variational_modes",
        ],
    ),
];

fn known_key(section: &str, key: &str) -> bool {
    KNOWN_KEYS
        .iter()
        .any(|(s, keys)| *s == section && keys.contains(&key))
}

/// Raw `(section.key -> value)` map with source lines for error reporting.
#[derive(Debug, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, usize)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let Some(name) = rest.strip_suffix(']') else {
                    return Err(err_at(
                        lineno,
                        raw_line.len(),
                        "unterminated section header",
                    ));
                };
                section = name.trim().to_string();
                if !KNOWN_KEYS.iter().any(|(s, _)| *s == section) {
                    return Err(err_at(lineno, 1, format!("unknown section [{section}]")));
                }
                continue;
            }
            let Some(eq) = line.find('=') else {
                return Err(err_at(
                    lineno,
                    1,
                    format!("expected key = value, got {line:?}"),
                ));
            };
            let key = line[..eq].trim();
            let value = line[eq + 1..].trim();
            if section.is_empty() {
                return Err(err_at(
                    lineno,
                    1,
                    format!("key {key:?} appears before any section"),
                ));
            }
            if !known_key(&section, key) {
                let col = raw_line.find(key).map(|c| c + 1).unwrap_or(1);
                return Err(err_at(
                    lineno,
                    col,
                    format!("unknown key {key:?} in section [{section}]"),
                ));
            }
            entries.insert(format!("{section}.{key}"), (value.to_string(), lineno));
        }
        Ok(Self { entries })
    }

    /// Applies a `section.key=value` override (flags win over the file).
    pub fn set_override(&mut self, spec: &str) -> Result<(), ConfigError> {
        let Some(eq) = spec.find('=') else {
            return Err(err(format!(
                "override {spec:?} must look like section.key=value"
            )));
        };
        let path = &spec[..eq];
        let value = &spec[eq + 1..];
        let Some(dot) = path.find('.') else {
            return Err(err(format!("override key {path:?} must be section.key")));
        };
        let (section, key) = (&path[..dot], &path[dot + 1..]);
        if !known_key(section, key) {
            return Err(err(format!("unknown key {key:?} in section [{section}]")));
        }
        self.entries
            .insert(format!("{section}.{key}"), (value.to_string(), 0));
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    fn line_of(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|(_, l)| *l).filter(|l| *l > 0)
    }

    fn require(&self, key: &str) -> Result<&str, ConfigError> {
        self.get(key)
            .ok_or_else(|| err(format!("missing required key {key:?}")))
    }

    fn parse_num<T: std::str::FromStr>(&self, key: &str, value: &str) -> Result<T, ConfigError> {
        value.parse::<T>().map_err(|_| ConfigError {
            message: format!("key {key:?}: cannot parse {value:?}"),
            line: self.line_of(key),
            column: None,
        })
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(key) {
            Some(v) => self.parse_num(key, v),
            None => Ok(default),
        }
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.get(key) {
            Some(v) => self.parse_num(key, v),
            None => Ok(default),
        }
    }

    fn u64_or(&self, key: &str, default: u64) -> Result<u64, ConfigError> {
        match self.get(key) {
            Some(v) => self.parse_num(key, v),
            None => Ok(default),
        }
    }

    /// Validates everything and produces the typed configuration.
    pub fn build(&self, config_dir: &Path) -> Result<RunConfig, ConfigError> {
        let alpha: f64 = self.parse_num("params.alpha", self.require("params.alpha")?)?;
        let beta: f64 = self.parse_num("params.beta", self.require("params.beta")?)?;
        let cap_a: f64 = self.parse_num("params.cap_a", self.require("params.cap_a")?)?;
        let cap_b: f64 = self.parse_num("params.cap_b", self.require("params.cap_b")?)?;
        let params = ReservoirParams::new(alpha, beta, cap_a, cap_b)
            .map_err(|e| err(format!("invalid [params]: {e}")))?;

        let cells = self.usize_or("grid.cells", 512)?;
        if cells < 16 || cells % 2 != 0 || cells > 1 << 16 {
            return Err(ConfigError {
                message: format!("grid.cells must be even, in [16, 65536], got {cells}"),
                line: self.line_of("grid.cells"),
                column: None,
            });
        }
        let time_steps = self.usize_or("grid.time_steps", 2048)?;
        if !(8..=1 << 22).contains(&time_steps) {
            return Err(ConfigError {
                message: format!("grid.time_steps must be in [8, 4194304], got {time_steps}"),
                line: self.line_of("grid.time_steps"),
                column: None,
            });
        }
        let t_final = self.f64_or("grid.t_final", 0.2)?;
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(err(format!("grid.t_final must be positive, got {t_final}")));
        }

        let field = match self.get("field.kind").unwrap_or("zero") {
            "zero" => TiltField::zero(),
            "affine" => TiltField::affine(self.f64_or("field.slope", 1.0)?),
            "sine" => {
                let amplitude = self.f64_or("field.amplitude", 0.4)?;
                let mode = self.usize_or("field.mode", 1)? as u32;
                let ramp = self.f64_or("field.ramp", 0.1)?;
                if mode < 1 || ramp <= 0.0 {
                    return Err(err("field.mode must be >= 1 and field.ramp positive"));
                }
                TiltField::sine(amplitude, mode, ramp)
            }
            "tabulated" => {
                let file = self.require("field.file")?;
                let path = config_dir.join(file);
                if !path.exists() {
                    return Err(ConfigError {
                        message: format!("field.file {path:?} does not exist"),
                        line: self.line_of("field.file"),
                        column: None,
                    });
                }
                parse_tabulated_field(&path)?
            }
            other => {
                return Err(err(format!(
                    "field.kind must be zero|affine|sine|tabulated, got {other:?}"
                )))
            }
        };

        let profile = match self.get("run.profile").unwrap_or("stationary") {
            "stationary" => ProfileSpec::Stationary,
            "constant" => ProfileSpec::Constant {
                value: self.f64_or("run.profile_value", 0.5)?,
            },
            "step" => ProfileSpec::Step {
                threshold: self.f64_or("run.step_at", 0.5)?,
                left: self.f64_or("run.step_left", 1.0)?,
                right: self.f64_or("run.step_right", 0.0)?,
            },
            other => {
                return Err(err(format!(
                    "run.profile must be stationary|constant|step, got {other:?}"
                )))
            }
        };
        if let ProfileSpec::Constant { value } = profile {
            if !(0.0..=1.0).contains(&value) {
                return Err(err(format!(
                    "run.profile_value must lie in [0,1], got {value}"
                )));
            }
        }

        let scales = match self.get("run.scales") {
            Some(v) => {
                let mut out = Vec::new();
                for part in v.split(',') {
                    out.push(self.parse_num::<usize>("run.scales", part.trim())?);
                }
                if !out.windows(2).all(|w| w[1] > w[0]) || out.iter().any(|n| *n < 8) {
                    return Err(err(format!(
                        "run.scales must be increasing and >= 8, got {v:?}"
                    )));
                }
                out
            }
            None => vec![64, 128, 256],
        };
        let epsilon = self.f64_or("run.epsilon", 0.05)?;
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(err(format!(
                "run.epsilon must lie in (0, 0.5), got {epsilon}"
            )));
        }
        let split = self.f64_or("run.split", t_final / 2.0)?;
        if !(split > 0.0 && split < t_final) {
            return Err(err(format!(
                "run.split must lie in (0, t_final), got {split}"
            )));
        }

        let out_dir = PathBuf::from(self.get("run.out_dir").unwrap_or("out"));
        // the output location is not part of the run's identity
        let echo: BTreeMap<String, String> = self
            .entries
            .iter()
            .filter(|(k, _)| k.as_str() != "run.out_dir")
            .map(|(k, (v, _))| (k.clone(), v.clone()))
            .collect();
        Ok(RunConfig {
            params,
            cells,
            time_steps,
            t_final,
            field,
            profile,
            seed: self.u64_or("run.seed", 20260809)?,
            replicas: self.usize_or("run.replicas", 200)?,
            n_scale: self.usize_or("run.n_scale", 128)?,
            scales,
            epsilon,
            ball_radius: self.f64_or("run.ball_radius", 0.1)?,
            split,
            out_dir,
            out_stride: self.usize_or("run.out_stride", 64)?,
            jobs: self.usize_or("run.jobs", 0)?,
            spectral_modes: self.usize_or("run.spectral_modes", 128)?,
            variational_hats: self.usize_or("run.variational_hats", 33)?,
            variational_modes: self.usize_or("run.variational_modes", 12)?,
            echo,
        })
    }
}

/// Tabulated field file: `t_final,<v>` / `times,<n>` / `cells,<m>` header
/// rows, then `times` rows of `cells + 1` comma-separated values.
fn parse_tabulated_field(path: &Path) -> Result<TiltField, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| err(format!("cannot read field file {path:?}: {e}")))?;
    let mut lines = text.lines().enumerate();
    let mut header = |name: &str| -> Result<f64, ConfigError> {
        let Some((idx, line)) = lines.next() else {
            return Err(err(format!("field file truncated before {name:?}")));
        };
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != 2 || parts[0] != name {
            return Err(err_at(idx + 1, 1, format!("expected {name},<value>")));
        }
        parts[1].parse().map_err(|_| {
            err_at(
                idx + 1,
                1,
                format!("cannot parse {name} value {:?}", parts[1]),
            )
        })
    };
    let t_final = header("t_final")?;
    let times = header("times")? as usize;
    let cells = header("cells")? as usize;
    if times < 2 || cells < 1 {
        return Err(err("field table needs times >= 2 and cells >= 1"));
    }
    let mut values = Vec::with_capacity(times * (cells + 1));
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        for part in line.split(',') {
            let v: f64 = part
                .trim()
                .parse()
                .map_err(|_| err_at(idx + 1, 1, format!("cannot parse table value {part:?}")))?;
            values.push(v);
        }
    }
    if values.len() != times * (cells + 1) {
        return Err(err(format!(
            "field table has {} values, expected {} ({} rows of {})",
            values.len(),
            times * (cells + 1),
            times,
            cells + 1
        )));
    }
    Ok(TiltField::tabulated(t_final, times, cells, values))
}
