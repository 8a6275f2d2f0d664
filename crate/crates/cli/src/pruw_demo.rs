use std::path::PathBuf;

use clap::Args;
use num_traits::One;
use pirlab::pruw::{sparsified_positions, EvaluationFrame, PruwSystem};
use pirlab::randomness::{RandomSource, SeededSource};
use pirlab::{parse_decimal, parse_rate, rate_string, FieldElement, FieldSpec, Rate};
use serde::Serialize;

use crate::config::{pick, pick_opt, FileConfig};
use crate::output::{emit, json};
use crate::{CliResult, Failure};

#[derive(Args, Debug)]
pub struct PruwArgs {
    /// Number of databases (at least 4).
    #[arg(long)]
    n: Option<usize>,
    /// Number of submodels.
    #[arg(long)]
    m: Option<usize>,
    /// Submodel length.
    #[arg(long)]
    l: Option<usize>,
    /// Field size (prime, at least N + 1).
    #[arg(long)]
    q: Option<u64>,
    /// Submodel to read and update, 1-based.
    #[arg(long)]
    theta: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Fraction of positions skipped in both phases, as a decimal or a/b.
    #[arg(long)]
    distortion: Option<String>,
    /// Write every database's share table to this JSON file.
    #[arg(long)]
    export: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct PruwConfig {
    pub n: usize,
    pub m: usize,
    pub l: usize,
    pub q: u64,
    pub theta: usize,
    pub seed: u64,
    pub distortion: Rate,
    pub export: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

pub fn parse_fraction(s: &str) -> anyhow::Result<Rate> {
    let r = if s.contains('/') { parse_rate(s) } else { parse_decimal(s) };
    r.map_err(|e| anyhow::anyhow!("bad fraction {s:?}: {e}"))
}

impl PruwArgs {
    pub fn resolve(&self, file: &FileConfig) -> anyhow::Result<PruwConfig> {
        let d = pick_opt(&self.distortion, &file.distortion).unwrap_or_else(|| "0".into());
        Ok(PruwConfig {
            n: pick(&self.n, &file.n, 4),
            m: pick(&self.m, &file.m, 3),
            l: pick(&self.l, &file.l, 8),
            q: pick(&self.q, &file.q, 97),
            theta: pick(&self.theta, &file.theta, 1),
            seed: pick(&self.seed, &file.seed, 0),
            distortion: parse_fraction(&d)?,
            export: pick_opt(&self.export, &file.export),
            out: pick_opt(&self.out, &file.out),
        })
    }
}

#[derive(Serialize)]
struct PruwReport {
    scheme: &'static str,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "L")]
    l: usize,
    q: u64,
    theta: usize,
    seed: u64,
    distortion: String,
    positions: usize,
    reading_cost: String,
    writing_cost: String,
    /// `(1 - D) N`.
    predicted_cost: String,
    read_ok: bool,
    write_ok: bool,
    reread_ok: bool,
}

pub fn cmd_pruw_demo(cfg: &PruwConfig) -> CliResult {
    let spec = FieldSpec::new(cfg.q)?;
    let frame = EvaluationFrame::standard(spec, cfg.n)?;
    if cfg.m == 0 || cfg.l == 0 {
        return Err(anyhow::anyhow!("need M >= 1 and L >= 1").into());
    }
    if cfg.theta == 0 || cfg.theta > cfg.m {
        return Err(anyhow::anyhow!("theta = {} outside 1..={}", cfg.theta, cfg.m).into());
    }
    let mut data = SeededSource::new(cfg.seed, "pruw/models");
    let models: Vec<Vec<FieldElement>> = (0..cfg.m).map(|_| data.elements(spec, cfg.l)).collect();
    let mut src = SeededSource::new(cfg.seed, "pruw/protocol");
    let mut sys = PruwSystem::new(&models, frame, &mut src)?;

    let positions = sparsified_positions(cfg.l, &cfg.distortion, &mut SeededSource::new(cfg.seed, "pruw/positions"))?;
    let delta = SeededSource::new(cfg.seed, "pruw/delta").elements(spec, positions.len());
    let round = sys.round(cfg.theta, &positions, Some(&delta), &mut src)?;
    let want: Vec<FieldElement> = positions.iter().map(|&p| models[cfg.theta - 1][p]).collect();
    let read_ok = round.decoded == want;

    let mut shadow = models.clone();
    for (&p, &d) in positions.iter().zip(&delta) {
        shadow[cfg.theta - 1][p] += d;
    }
    let write_ok = sys.reconstruct()? == shadow;
    let all: Vec<usize> = (0..cfg.l).collect();
    let reread_ok = sys.round(cfg.theta, &all, None, &mut src)?.decoded == shadow[cfg.theta - 1];

    let predicted = (Rate::one() - &cfg.distortion) * Rate::from_integer(cfg.n.into());
    let report = PruwReport {
        scheme: "pruw",
        n: cfg.n,
        m: cfg.m,
        l: cfg.l,
        q: cfg.q,
        theta: cfg.theta,
        seed: cfg.seed,
        distortion: rate_string(&cfg.distortion),
        positions: positions.len(),
        reading_cost: rate_string(&round.reading_cost),
        writing_cost: rate_string(&round.writing_cost),
        predicted_cost: rate_string(&predicted),
        read_ok,
        write_ok,
        reread_ok,
    };
    if let Some(path) = &cfg.export {
        std::fs::write(path, json(&sys.export())?)?;
    }
    emit(cfg.out.as_deref(), &json(&report)?)?;
    if !(read_ok && write_ok && reread_ok) {
        return Err(Failure::Correctness("read-after-write differs from the plaintext shadow".into()));
    }
    Ok(())
}
