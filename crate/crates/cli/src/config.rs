use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Deserialize;

/// Values read from `--config`. Every key is optional and shared by all
/// subcommands; unknown keys are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub scheme: Option<String>,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub m: Option<usize>,
    pub l: Option<usize>,
    pub q: Option<u64>,
    pub theta: Option<usize>,
    pub seed: Option<u64>,
    pub cap: Option<u128>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub b: Option<Vec<usize>>,
    pub s: Option<usize>,
    pub r: Option<String>,
    pub decimals: Option<usize>,
    pub distortion: Option<String>,
    pub export: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Scheme identifiers accepted by `--scheme`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SchemeId {
    Cgks,
    Residual,
    Sunjafar,
    Tian,
    Leaky,
    SpirDeterministic,
    SpirProbabilistic,
    Pruw,
    Sparse,
    FixtureLeakyTheta,
}

impl SchemeId {
    pub fn parse(s: &str) -> anyhow::Result<Self> {
        <Self as clap::ValueEnum>::from_str(s, true).map_err(|_| anyhow::anyhow!("unknown scheme {s:?}"))
    }

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::Cgks => "cgks",
            SchemeId::Residual => "residual",
            SchemeId::Sunjafar => "sunjafar",
            SchemeId::Tian => "tian",
            SchemeId::Leaky => "leaky",
            SchemeId::SpirDeterministic => "spir-deterministic",
            SchemeId::SpirProbabilistic => "spir-probabilistic",
            SchemeId::Pruw => "pruw",
            SchemeId::Sparse => "sparse",
            SchemeId::FixtureLeakyTheta => "fixture-leaky-theta",
        }
    }

    /// Default `(N, K)`; for PRUW `K` is the number of submodels.
    pub fn default_nk(self) -> (usize, usize) {
        match self {
            SchemeId::Cgks => (2, 3),
            SchemeId::Residual => (3, 2),
            SchemeId::Sunjafar => (2, 2),
            SchemeId::Tian => (3, 3),
            SchemeId::Leaky => (2, 2),
            SchemeId::SpirDeterministic => (2, 3),
            SchemeId::SpirProbabilistic => (2, 2),
            SchemeId::Pruw => (4, 3),
            SchemeId::Sparse => (4, 1),
            SchemeId::FixtureLeakyTheta => (2, 2),
        }
    }
}

/// Flag, then file, then default.
pub fn pick<T: Clone>(flag: &Option<T>, file: &Option<T>, default: T) -> T {
    flag.clone().or_else(|| file.clone()).unwrap_or(default)
}

/// Flag, then file.
pub fn pick_opt<T: Clone>(flag: &Option<T>, file: &Option<T>) -> Option<T> {
    flag.clone().or_else(|| file.clone())
}
