use std::path::PathBuf;

use clap::Args;
use num_traits::ToPrimitive;
use pirlab::sparsify::{is_ragged, leakage_entropy};
use pirlab::Rate;

use crate::config::{pick, pick_opt, FileConfig};
use crate::output::emit;
use crate::pruw_demo::parse_fraction;
use crate::{CliResult, Failure};

#[derive(Args, Debug)]
pub struct LeakageArgs {
    /// Model size.
    #[arg(long)]
    l: Option<usize>,
    /// Segment counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    b: Option<Vec<usize>>,
    /// Number of sparse updates.
    #[arg(long, conflicts_with = "r")]
    s: Option<usize>,
    /// Sparsification rate; `r L` must be an integer.
    #[arg(long)]
    r: Option<String>,
    /// Decimal places in the CSV.
    #[arg(long)]
    decimals: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct LeakageConfig {
    pub l: usize,
    pub b: Vec<usize>,
    pub s: usize,
    pub decimals: usize,
    pub out: Option<PathBuf>,
}

impl LeakageArgs {
    pub fn resolve(&self, file: &FileConfig) -> anyhow::Result<LeakageConfig> {
        let l = pick(&self.l, &file.l, 12);
        let b = pick_opt(&self.b, &file.b).unwrap_or_else(|| (1..=l).filter(|d| l.is_multiple_of(*d)).collect());
        let s = match (pick_opt(&self.s, &file.s), pick_opt(&self.r, &file.r)) {
            (Some(s), _) => s,
            (None, Some(r)) => {
                let count = parse_fraction(&r)? * Rate::from_integer(l.into());
                if !count.is_integer() {
                    anyhow::bail!("r L = {count} is not an integer");
                }
                count.to_integer().to_usize().ok_or_else(|| anyhow::anyhow!("r out of range"))?
            }
            (None, None) => 2,
        };
        Ok(LeakageConfig {
            l,
            b,
            s,
            decimals: pick(&self.decimals, &file.decimals, 3),
            out: pick_opt(&self.out, &file.out),
        })
    }
}

pub struct Row {
    pub b: usize,
    pub single: f64,
    pub two: f64,
    pub ragged: bool,
}

pub fn rows(cfg: &LeakageConfig) -> pirlab::Result<Vec<Row>> {
    cfg.b
        .iter()
        .map(|&b| {
            Ok(Row {
                b,
                single: leakage_entropy(cfg.l, b, cfg.s, false)?,
                two: leakage_entropy(cfg.l, b, cfg.s, true)?,
                ragged: is_ragged(cfg.l, b),
            })
        })
        .collect()
}

fn positive_zero(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

pub fn cmd_leakage(cfg: &LeakageConfig) -> CliResult {
    let rows = rows(cfg)?;
    if let Some(r) = rows.iter().find(|r| r.two > r.single + 1e-12) {
        return Err(Failure::Correctness(format!(
            "two-stage leakage {} exceeds single-stage {} at B = {}",
            r.two, r.single, r.b
        )));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["B", "single_stage_bits", "two_stage_bits", "ragged"])?;
    let p = cfg.decimals;
    for r in &rows {
        w.write_record([
            r.b.to_string(),
            format!("{:.p$}", positive_zero(r.single)),
            format!("{:.p$}", positive_zero(r.two)),
            r.ragged.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
    emit(cfg.out.as_deref(), &String::from_utf8(bytes).map_err(anyhow::Error::from)?)?;
    Ok(())
}
