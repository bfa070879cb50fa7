//! JSON experiment configs, `--set` overrides and grid expansion.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use cloning_optics::acceptance::VerifyOptions;
use cloning_optics::DEFAULT_M_CAP;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;
const MAX_GRID_POINTS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Experiment {
    PartialSymmetrizer,
    Cloner,
    PartialSwap,
    AmplifierOracle,
    Formulas,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::PartialSymmetrizer => "partial_symmetrizer",
            Experiment::Cloner => "cloner",
            Experiment::PartialSwap => "partial_swap",
            Experiment::AmplifierOracle => "amplifier_oracle",
            Experiment::Formulas => "formulas",
        }
    }

    /// Parameters in sweep order: the first one varies slowest.
    pub fn parameters(self) -> &'static [Param] {
        match self {
            Experiment::PartialSymmetrizer => &[Param::Eta],
            Experiment::Cloner => &[Param::M, Param::Eta, Param::Q],
            Experiment::PartialSwap => &[Param::Repeat, Param::Phi],
            Experiment::AmplifierOracle => &[Param::M, Param::Truncation, Param::Lambda],
            Experiment::Formulas => &[Param::M],
        }
    }

    fn defaults(self) -> Vec<(Param, ParamSpec)> {
        use std::f64::consts::PI;
        match self {
            Experiment::PartialSymmetrizer => {
                vec![(Param::Eta, ParamSpec::List(vec![0.0, 0.3, 0.5, (2.0f64 / 3.0).sqrt(), 1.0]))]
            }
            Experiment::Cloner => vec![
                (Param::M, ParamSpec::Value(2.0)),
                (Param::Eta, ParamSpec::Grid(GridSpec { start: 0.0, stop: 1.0, step: 0.05 })),
            ],
            Experiment::PartialSwap => vec![
                (Param::Repeat, ParamSpec::Value(1.0)),
                (Param::Phi, ParamSpec::List(vec![0.0, PI / 4.0, PI / 2.0, PI])),
            ],
            Experiment::AmplifierOracle => vec![
                (Param::M, ParamSpec::Value(2.0)),
                (Param::Truncation, ParamSpec::Value(12.0)),
                (Param::Lambda, ParamSpec::List(vec![0.1, 0.3, 0.5])),
            ],
            Experiment::Formulas => {
                vec![(Param::M, ParamSpec::Grid(GridSpec { start: 1.0, stop: 10.0, step: 1.0 }))]
            }
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Param {
    M,
    Eta,
    Q,
    Phi,
    Lambda,
    Repeat,
    Truncation,
}

impl Param {
    pub const ALL: [Param; 7] =
        [Param::M, Param::Eta, Param::Q, Param::Phi, Param::Lambda, Param::Repeat, Param::Truncation];

    pub fn name(self) -> &'static str {
        match self {
            Param::M => "M",
            Param::Eta => "eta",
            Param::Q => "q",
            Param::Phi => "phi",
            Param::Lambda => "lambda",
            Param::Repeat => "repeat",
            Param::Truncation => "truncation",
        }
    }

    fn is_count(self) -> bool {
        matches!(self, Param::M | Param::Repeat | Param::Truncation)
    }
}

impl FromStr for Param {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Param::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<_> = Param::ALL.iter().map(|p| p.name()).collect();
            CliError::Config(format!("unknown parameter `{s}` (expected one of {})", names.join(", ")))
        })
    }
}

/// A number, a list of numbers, or an arithmetic progression.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ParamSpec {
    Value(f64),
    List(Vec<f64>),
    Grid(GridSpec),
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridSpec {
    /// `start, start + step, ...` up to `stop` inclusive; the last point snaps to `stop`.
    pub fn expand(&self) -> Result<Vec<f64>, String> {
        let GridSpec { start, stop, step } = *self;
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return Err("grid bounds must be finite".into());
        }
        if step <= 0.0 {
            return Err(format!("grid step must be positive, got {step}"));
        }
        if stop < start {
            return Err(format!("grid stop {stop} is below start {start}"));
        }
        let n = ((stop - start) / step + 1e-9).floor();
        if n + 1.0 > MAX_GRID_POINTS as f64 {
            return Err(format!("grid has more than {MAX_GRID_POINTS} points"));
        }
        Ok((0..=n as usize)
            .map(|i| {
                let x = start + i as f64 * step;
                if (x - stop).abs() <= 1e-9 * step {
                    stop
                } else {
                    x
                }
            })
            .collect())
    }
}

impl ParamSpec {
    pub fn expand(&self) -> Result<Vec<f64>, String> {
        let values = match self {
            ParamSpec::Value(v) => vec![*v],
            ParamSpec::List(v) => v.clone(),
            ParamSpec::Grid(g) => g.expand()?,
        };
        if values.is_empty() {
            return Err("empty value list".into());
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(format!("non-finite value {bad}"));
        }
        Ok(values)
    }
}

/// `start:stop:step` or any JSON value accepted in a config file.
impl FromStr for ParamSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() == 3 {
            let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad grid bound `{t}`: {e}"));
            return Ok(ParamSpec::Grid(GridSpec { start: num(parts[0])?, stop: num(parts[1])?, step: num(parts[2])? }));
        }
        serde_json::from_str(s).map_err(|e| format!("cannot parse `{s}`: {e}"))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub format: Option<Format>,
    pub path: Option<PathBuf>,
}

/// On-disk config, schema 1.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema: u32,
    pub experiment: Option<Experiment>,
    #[serde(default)]
    pub parameters: BTreeMap<String, ParamSpec>,
    #[serde(default)]
    pub output: OutputSpec,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    pub m_cap: Option<usize>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ConfigFile = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.schema != SCHEMA_VERSION {
            return Err(CliError::Config(format!("unsupported schema {} (expected {SCHEMA_VERSION})", cfg.schema)));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Values given on the command line; each one wins over the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub experiment: Option<Experiment>,
    pub set: Vec<String>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub tolerance: Option<f64>,
    pub m_cap: Option<usize>,
    pub seed: Option<u64>,
}

/// Fully resolved run: every parameter expanded to its value list.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub parameters: BTreeMap<Param, Vec<f64>>,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub tolerance: Option<f64>,
    pub m_cap: usize,
}

pub fn check_tolerance(t: Option<f64>) -> Result<Option<f64>, CliError> {
    match t {
        Some(t) if !(t.is_finite() && t > 0.0) => {
            Err(CliError::Config(format!("tolerance must be a positive number, got {t}")))
        }
        t => Ok(t),
    }
}

pub fn check_m_cap(cap: usize) -> Result<usize, CliError> {
    if cap < 2 {
        return Err(CliError::Config(format!("m_cap must be at least 2, got {cap}")));
    }
    Ok(cap)
}

fn parse_set(entry: &str) -> Result<(Param, ParamSpec), CliError> {
    let (key, value) =
        entry.split_once('=').ok_or_else(|| CliError::Usage(format!("--set expects key=value, got `{entry}`")))?;
    let param = key.trim().parse::<Param>()?;
    let spec = value.trim().parse::<ParamSpec>().map_err(|e| CliError::Config(format!("{}: {e}", param.name())))?;
    Ok((param, spec))
}

impl ExperimentConfig {
    /// Defaults, then the config file, then command-line flags.
    pub fn resolve(file: Option<ConfigFile>, flags: &Overrides) -> Result<Self, CliError> {
        let file = file.unwrap_or(ConfigFile {
            schema: SCHEMA_VERSION,
            experiment: None,
            parameters: BTreeMap::new(),
            output: OutputSpec::default(),
            seed: None,
            tolerance: None,
            m_cap: None,
        });
        let experiment = flags
            .experiment
            .or(file.experiment)
            .ok_or_else(|| CliError::Usage("no experiment given (use --experiment or a config file)".into()))?;

        let mut given: BTreeMap<Param, ParamSpec> = BTreeMap::new();
        for (key, spec) in &file.parameters {
            given.insert(key.parse()?, spec.clone());
        }
        for entry in &flags.set {
            let (p, spec) = parse_set(entry)?;
            given.insert(p, spec);
        }
        let allowed = experiment.parameters();
        if let Some(p) = given.keys().find(|p| !allowed.contains(p)) {
            let names: Vec<_> = allowed.iter().map(|p| p.name()).collect();
            return Err(CliError::Config(format!(
                "parameter `{}` does not apply to {experiment} (allowed: {})",
                p.name(),
                names.join(", ")
            )));
        }
        if given.contains_key(&Param::Eta) && given.contains_key(&Param::Q) {
            return Err(CliError::Config("give either eta or q, not both".into()));
        }

        let mut specs: BTreeMap<Param, ParamSpec> = experiment.defaults().into_iter().collect();
        if given.contains_key(&Param::Q) {
            specs.remove(&Param::Eta);
        }
        specs.extend(given);

        let mut parameters = BTreeMap::new();
        for (p, spec) in specs {
            let values = spec.expand().map_err(|e| CliError::Config(format!("{}: {e}", p.name())))?;
            if p.is_count() {
                if let Some(bad) = values.iter().find(|v| v.fract() != 0.0 || **v < 0.0) {
                    return Err(CliError::Config(format!("{} must be a non-negative integer, got {bad}", p.name())));
                }
            }
            parameters.insert(p, values);
        }

        Ok(ExperimentConfig {
            experiment,
            parameters,
            format: flags.format.or(file.output.format).unwrap_or_default(),
            output: flags.output.clone().or(file.output.path),
            seed: flags.seed.or(file.seed).unwrap_or(VerifyOptions::default().seed),
            tolerance: check_tolerance(flags.tolerance.or(file.tolerance))?,
            m_cap: check_m_cap(flags.m_cap.or(file.m_cap).unwrap_or(DEFAULT_M_CAP))?,
        })
    }

    /// Cartesian product of the parameter lists in the experiment's sweep order.
    pub fn grid(&self) -> Vec<BTreeMap<Param, f64>> {
        let mut points = vec![BTreeMap::new()];
        for p in self.experiment.parameters() {
            let Some(values) = self.parameters.get(p) else { continue };
            points = points
                .into_iter()
                .flat_map(|point| {
                    values.iter().map(move |&v| {
                        let mut next = point.clone();
                        next.insert(*p, v);
                        next
                    })
                })
                .collect();
        }
        points
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(json: &str, set: &[&str]) -> Result<ExperimentConfig, CliError> {
        let flags = Overrides { set: set.iter().map(|s| s.to_string()).collect(), ..Default::default() };
        ExperimentConfig::resolve(Some(ConfigFile::parse(json)?), &flags)
    }

    #[test]
    fn grid_includes_stop() {
        let g = GridSpec { start: 0.0, stop: 1.0, step: 0.05 }.expand().unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[20], 1.0);
        let g = GridSpec { start: 0.0, stop: 0.3, step: 0.1 }.expand().unwrap();
        assert_eq!(g, vec![0.0, 0.1, 0.2, 0.3]);
        let g = GridSpec { start: 0.0, stop: 0.25, step: 0.1 }.expand().unwrap();
        assert_eq!(g.len(), 3);
    }

    #[test]
    fn bad_grids() {
        assert!(GridSpec { start: 0.0, stop: 1.0, step: 0.0 }.expand().is_err());
        assert!(GridSpec { start: 1.0, stop: 0.0, step: 0.1 }.expand().is_err());
        assert!(GridSpec { start: 0.0, stop: 1e9, step: 1e-3 }.expand().is_err());
        assert!(ParamSpec::List(vec![]).expand().is_err());
    }

    #[test]
    fn set_syntax() {
        assert_eq!(
            "0:1:0.5".parse::<ParamSpec>().unwrap(),
            ParamSpec::Grid(GridSpec { start: 0.0, stop: 1.0, step: 0.5 })
        );
        assert_eq!("[1, 2]".parse::<ParamSpec>().unwrap(), ParamSpec::List(vec![1.0, 2.0]));
        assert_eq!("0.25".parse::<ParamSpec>().unwrap(), ParamSpec::Value(0.25));
        assert!("abc".parse::<ParamSpec>().is_err());
    }

    #[test]
    fn precedence() {
        let json = r#"{"schema": 1, "experiment": "cloner", "parameters": {"eta": [0.1, 0.2]}, "seed": 5}"#;
        let cfg = resolve(json, &[]).unwrap();
        assert_eq!(cfg.parameters[&Param::Eta], vec![0.1, 0.2]);
        assert_eq!(cfg.parameters[&Param::M], vec![2.0]);
        assert_eq!(cfg.seed, 5);
        let cfg = resolve(json, &["eta=0.7", "M=3"]).unwrap();
        assert_eq!(cfg.parameters[&Param::Eta], vec![0.7]);
        assert_eq!(cfg.parameters[&Param::M], vec![3.0]);
        let cfg = resolve(json, &[]).unwrap();
        assert_eq!(cfg.grid().len(), 2);
    }

    #[test]
    fn q_replaces_default_eta() {
        let cfg = resolve(r#"{"schema": 1, "experiment": "cloner", "parameters": {"q": 0.2}}"#, &[]).unwrap();
        assert!(!cfg.parameters.contains_key(&Param::Eta));
        assert!(resolve(r#"{"schema": 1, "experiment": "cloner", "parameters": {"q": 0.2}}"#, &["eta=0.1"]).is_err());
    }

    #[test]
    fn rejects_unknown_and_misplaced_keys() {
        assert!(ConfigFile::parse(r#"{"schema": 1, "experiment": "cloner", "colour": 1}"#).is_err());
        assert!(ConfigFile::parse(r#"{"schema": 2, "experiment": "cloner"}"#).is_err());
        assert!(resolve(r#"{"schema": 1, "experiment": "cloner", "parameters": {"etta": 1}}"#, &[]).is_err());
        assert!(resolve(r#"{"schema": 1, "experiment": "formulas", "parameters": {"phi": 1}}"#, &[]).is_err());
        assert!(resolve(r#"{"schema": 1, "experiment": "cloner", "parameters": {"M": 2.5}}"#, &[]).is_err());
        assert!(
            ConfigFile::parse(r#"{"schema": 1, "parameters": {"eta": {"start": 0, "stop": 1, "stp": 1}}}"#).is_err()
        );
    }

    #[test]
    fn sweep_order_is_slowest_first() {
        let cfg = resolve(r#"{"schema": 1, "experiment": "partial_swap"}"#, &["repeat=[1, 2]", "phi=[0, 1]"]).unwrap();
        let reps: Vec<_> = cfg.grid().iter().map(|p| (p[&Param::Repeat], p[&Param::Phi])).collect();
        assert_eq!(reps, vec![(1.0, 0.0), (1.0, 1.0), (2.0, 0.0), (2.0, 1.0)]);
    }
}
