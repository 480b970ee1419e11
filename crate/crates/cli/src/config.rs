//! Flag and config-file settings, merged into one resolved run configuration.

use std::path::{Path, PathBuf};

use clap::Args;
use collapse_core::experiments::{ExperimentScript, KickDistribution};
use collapse_core::schemes::{Instrumentalist, SchemeKind};
use collapse_core::spin::{Axis, BlochVector, Sign};
use collapse_core::{Bloch64, Scheme64, Script64};
use serde::{Deserialize, Serialize};

use crate::CliError;

const DEFAULT_TRIALS: u64 = 1000;
const DEFAULT_RESERVOIR: usize = 2;
const DEFAULT_TOLERANCE: f64 = 1e-9;
const DEFAULT_GRID_POINTS: usize = 13;

/// Every key may come from the config file or a same-named flag; flags win.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Settings {
    /// TOML file with any of the keys below
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// standard | unitary | instrumental
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Reservoir spins per device (even, at most 8)
    #[arg(long)]
    pub reservoir: Option<usize>,
    /// Macrostate / definiteness tolerance in [0, 0.5)
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// none | cauchy | uniform
    #[arg(long)]
    pub distribution: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub location: Option<f64>,
    #[arg(long)]
    pub scale: Option<f64>,
    /// Existing directory for the report files
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Detectable outcomes of the instrumental scheme, e.g. "up" or "up,down"
    #[arg(long)]
    pub allowed: Option<String>,
    /// chain | single-z | path to a JSON or TOML script
    #[arg(long)]
    pub script: Option<String>,
    /// Initial system spin direction: x, -z or "a,b,c"
    #[arg(long, allow_hyphen_values = true)]
    pub input: Option<String>,
    /// Measurement axis for special-search and born-check
    #[arg(long, allow_hyphen_values = true)]
    pub axis: Option<String>,
    /// Kick grid size (special-search) or tilt sweep size (born-check)
    #[arg(long)]
    pub grid_points: Option<usize>,
}

impl Settings {
    /// Values from `flags`, falling back to the config file it names.
    pub fn merged(flags: Settings) -> Result<Settings, CliError> {
        let Some(path) = flags.config.clone() else {
            return Ok(flags);
        };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let file: Settings = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        macro_rules! pick {
            ($($f:ident),*) => { Settings { config: Some(path), $($f: flags.$f.or(file.$f)),* } };
        }
        Ok(pick!(
            scheme,
            seed,
            trials,
            reservoir,
            tolerance,
            distribution,
            location,
            scale,
            out,
            allowed,
            script,
            input,
            axis,
            grid_points
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Conservation,
    Anamnesis,
    SpecialSearch,
    BornCheck,
}

/// Fully resolved configuration, embedded verbatim in every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub scheme: Scheme64,
    pub seed: Option<u64>,
    pub trials: u64,
    pub reservoir: usize,
    pub tolerance: f64,
    pub distribution: Option<KickDistribution>,
    pub script: String,
    pub input: [f64; 3],
    pub axis: [f64; 3],
    pub grid_points: usize,
    pub out: PathBuf,
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

pub fn parse_direction(text: &str) -> Result<[f64; 3], CliError> {
    let t = text.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) if !rest.contains(',') => (true, rest),
        _ => (false, t),
    };
    let v = match body {
        "x" => [1.0, 0.0, 0.0],
        "y" => [0.0, 1.0, 0.0],
        "z" => [0.0, 0.0, 1.0],
        _ => {
            let parts: Vec<f64> = t
                .split(',')
                .map(|p| p.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| config_err(format!("direction `{text}` is not x|y|z or a,b,c")))?;
            let [a, b, c] = parts[..] else {
                return Err(config_err(format!(
                    "direction `{text}` needs three components"
                )));
            };
            return Ok(Axis::new([a, b, c]).map_err(config_err)?.components());
        }
    };
    Ok(if neg { v.map(|c| -c) } else { v })
}

fn parse_scheme(name: &str, allowed: Option<&str>, tolerance: f64) -> Result<Scheme64, CliError> {
    match name {
        "standard" => Ok(SchemeKind::StandardCollapse),
        "unitary" => Ok(SchemeKind::Unitary),
        "instrumental" => {
            let allowed = allowed
                .unwrap_or("up,down")
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| match s.trim() {
                    "up" => Ok(Sign::Up),
                    "down" => Ok(Sign::Down),
                    other => Err(config_err(format!(
                        "unknown outcome `{other}` in --allowed"
                    ))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(SchemeKind::Instrumentalist(
                Instrumentalist::new(allowed, tolerance).map_err(config_err)?,
            ))
        }
        other => Err(config_err(format!("unknown scheme `{other}`"))),
    }
}

fn parse_distribution(s: &Settings) -> Result<Option<KickDistribution>, CliError> {
    let location = s.location.unwrap_or(0.0);
    let d = match s.distribution.as_deref().unwrap_or("none") {
        "none" => return Ok(None),
        "cauchy" => KickDistribution::Cauchy {
            location,
            scale: s.scale.unwrap_or(0.1),
        },
        "uniform" => KickDistribution::Uniform {
            location,
            scale: s.scale.unwrap_or(0.0),
        },
        other => return Err(config_err(format!("unknown distribution `{other}`"))),
    };
    d.validate().map_err(config_err)?;
    Ok(Some(d))
}

impl RunConfig {
    pub fn resolve(command: Command, s: &Settings) -> Result<Self, CliError> {
        let tolerance = s.tolerance.unwrap_or(DEFAULT_TOLERANCE);
        if !(0.0..0.5).contains(&tolerance) {
            return Err(config_err(format!(
                "tolerance {tolerance} outside [0, 0.5)"
            )));
        }
        let trials = s.trials.unwrap_or(DEFAULT_TRIALS);
        if trials == 0 {
            return Err(config_err("trials must be at least 1"));
        }
        let reservoir = s.reservoir.unwrap_or(DEFAULT_RESERVOIR);
        if !reservoir.is_multiple_of(2) || reservoir > 8 {
            return Err(config_err(format!(
                "reservoir size {reservoir} must be even and at most 8"
            )));
        }
        let grid_points = s.grid_points.unwrap_or(DEFAULT_GRID_POINTS);
        if grid_points == 0 {
            return Err(config_err("grid-points must be at least 1"));
        }
        let scheme = parse_scheme(
            s.scheme.as_deref().unwrap_or("standard"),
            s.allowed.as_deref(),
            tolerance,
        )?;
        let distribution = parse_distribution(s)?;
        let default_script = if command == Command::Anamnesis {
            "single-z"
        } else {
            "chain"
        };
        let cfg = RunConfig {
            command,
            scheme,
            seed: s.seed,
            trials,
            reservoir,
            tolerance,
            distribution,
            script: s
                .script
                .clone()
                .unwrap_or_else(|| default_script.to_string()),
            input: parse_direction(s.input.as_deref().unwrap_or("x"))?,
            axis: parse_direction(s.axis.as_deref().unwrap_or("z"))?,
            grid_points,
            out: s.out.clone().unwrap_or_else(|| PathBuf::from(".")),
        };
        if cfg.seed.is_none() && cfg.is_stochastic() {
            return Err(config_err("this run samples outcomes and needs --seed"));
        }
        Ok(cfg)
    }

    fn is_stochastic(&self) -> bool {
        let collapse = !matches!(self.scheme, SchemeKind::Unitary);
        match self.command {
            Command::Conservation | Command::Anamnesis => collapse,
            Command::BornCheck => true,
            Command::SpecialSearch => self.distribution.is_some(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn initial_bloch(&self) -> Bloch64 {
        let [x, y, z] = self.input;
        BlochVector::new(0.5 * x, 0.5 * y, 0.5 * z)
    }

    pub fn axis(&self) -> Axis<f64> {
        Axis::new(self.axis).expect("validated direction")
    }

    /// The script named by `script`, with this run's input, seed, reservoir
    /// and tolerance applied. File scripts keep their own steps and input.
    pub fn build_script(&self) -> Result<Script64, CliError> {
        let base = match self.script.as_str() {
            "chain" => {
                let mut s = ExperimentScript::canonical_chain();
                s.initial_system = self.initial_bloch();
                s
            }
            "single-z" => ExperimentScript::single_z(self.initial_bloch()),
            path => load_script(Path::new(path))?,
        };
        let mut script = base.with_seed(self.seed());
        script.reservoir_size = self.reservoir;
        script.tolerance = self.tolerance;
        script.validate().map_err(config_err)?;
        Ok(script)
    }
}

fn load_script(path: &Path) -> Result<Script64, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let parsed = if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text).map_err(config_err)
    } else {
        serde_json::from_str(&text).map_err(config_err)
    };
    parsed.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}
