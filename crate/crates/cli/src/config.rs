//! Flat `key = value` run configuration.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use gacrf_core::crf::TrainConfig;
use gacrf_core::evaluation::Mode;
use gacrf_core::ga::GaConfig;
use gacrf_core::stemmer::DEFAULT_MIN_STEM;

use crate::CliError;

/// Everything a subcommand may need. Paths left as `None` fall back to
/// the bundled resources or to stdin/stdout where that makes sense.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub prefixes: Option<PathBuf>,
    pub suffixes: Option<PathBuf>,
    pub gazetteer_salutations: Option<PathBuf>,
    pub gazetteer_followups: Option<PathBuf>,
    pub template: Option<PathBuf>,
    pub catalogue: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub history: Option<PathBuf>,
    pub min_stem: usize,
    pub mode: Mode,
    pub ga: GaConfig,
    pub train: TrainConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            prefixes: None,
            suffixes: None,
            gazetteer_salutations: None,
            gazetteer_followups: None,
            template: None,
            catalogue: None,
            model: None,
            out: None,
            history: None,
            min_stem: DEFAULT_MIN_STEM,
            mode: Mode::Span,
            ga: GaConfig::default(),
            train: TrainConfig::default(),
        }
    }
}

/// Keys accepted in a configuration file.
pub const KEYS: &[&str] = &[
    "prefixes",
    "suffixes",
    "gazetteer_salutations",
    "gazetteer_followups",
    "template",
    "catalogue",
    "model",
    "out",
    "history",
    "min_stem",
    "mode",
    "seed",
    "population_size",
    "crossover_rate",
    "mutation_rate",
    "elitism_count",
    "max_generations",
    "stagnation_generations",
    "folds",
    "rho",
    "max_iterations",
    "gradient_tolerance",
];

pub fn load_run_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    parse_run_config(&text)
}

pub fn parse_run_config(text: &str) -> Result<RunConfig, CliError> {
    let mut config = RunConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(CliError::Config { line, key: content.to_string(), message: "expected `key = value`".into() });
        };
        config.set(key.trim(), value.trim(), line)?;
    }
    Ok(config)
}

impl RunConfig {
    fn set(&mut self, key: &str, value: &str, line: usize) -> Result<(), CliError> {
        fn num<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T, CliError> {
            value.parse().map_err(|_| CliError::Config {
                line,
                key: key.to_string(),
                message: format!("cannot parse {value:?}"),
            })
        }
        let path = || Some(PathBuf::from(value));
        match key {
            "prefixes" => self.prefixes = path(),
            "suffixes" => self.suffixes = path(),
            "gazetteer_salutations" => self.gazetteer_salutations = path(),
            "gazetteer_followups" => self.gazetteer_followups = path(),
            "template" => self.template = path(),
            "catalogue" => self.catalogue = path(),
            "model" => self.model = path(),
            "out" => self.out = path(),
            "history" => self.history = path(),
            "min_stem" => self.min_stem = num(key, value, line)?,
            "mode" => {
                self.mode = value.parse().map_err(|_| CliError::Config {
                    line,
                    key: key.to_string(),
                    message: format!("expected span or token, got {value:?}"),
                })?
            }
            "seed" => self.ga.seed = num(key, value, line)?,
            "population_size" => self.ga.population_size = num(key, value, line)?,
            "crossover_rate" => self.ga.crossover_rate = num(key, value, line)?,
            "mutation_rate" => self.ga.mutation_rate = Some(num(key, value, line)?),
            "elitism_count" => self.ga.elitism_count = num(key, value, line)?,
            "max_generations" => self.ga.max_generations = num(key, value, line)?,
            "stagnation_generations" => self.ga.stagnation_generations = num(key, value, line)?,
            "folds" => self.ga.folds = num(key, value, line)?,
            "rho" => self.train.rho = num(key, value, line)?,
            "max_iterations" => self.train.max_iterations = num(key, value, line)?,
            "gradient_tolerance" => self.train.gradient_tolerance = num(key, value, line)?,
            _ => {
                return Err(CliError::Config { line, key: key.to_string(), message: "unknown key".into() });
            }
        }
        Ok(())
    }
}
