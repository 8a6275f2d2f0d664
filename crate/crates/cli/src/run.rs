use std::path::PathBuf;

use clap::Args;
use pirlab::capacity::{c_pir, c_spir};
use pirlab::databank::{MessageStore, TranscriptRecord};
use pirlab::pir::{self, fixtures::PlantedLeak, Cgks, LeakySymmetric, PirScheme, Residual, SunJafar, Tian};
use pirlab::randomness::{SeededSource, DEFAULT_ENUMERATION_CAP};
use pirlab::spir::{self, spir_round, CommonRandomnessPool};
use pirlab::{rate_string, Error, FieldSpec, Rate};
use serde::Serialize;

use crate::config::{pick, pick_opt, FileConfig, Format, SchemeId};
use crate::output::{emit, json};
use crate::pruw_demo::{self, PruwConfig};
use crate::{CliResult, Failure};

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long)]
    scheme: Option<String>,
    /// Number of databases.
    #[arg(long)]
    n: Option<usize>,
    /// Number of messages (submodels for pruw).
    #[arg(long)]
    k: Option<usize>,
    /// Message length in symbols; defaults to one subpacket.
    #[arg(long)]
    l: Option<usize>,
    /// Field size (prime).
    #[arg(long)]
    q: Option<u64>,
    /// Desired message, 1-based.
    #[arg(long)]
    theta: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also compute the exact expected rate over all user randomness.
    #[arg(long)]
    expected: bool,
    /// Enumeration cap for --expected.
    #[arg(long)]
    cap: Option<u128>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub scheme: SchemeId,
    pub n: usize,
    pub k: usize,
    pub l: Option<usize>,
    pub q: u64,
    pub theta: usize,
    pub seed: u64,
    pub expected: bool,
    pub cap: u128,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl RunArgs {
    pub fn resolve(&self, file: &FileConfig) -> anyhow::Result<RunConfig> {
        let scheme = pick_opt(&self.scheme, &file.scheme).ok_or_else(|| anyhow::anyhow!("--scheme is required"))?;
        let scheme = SchemeId::parse(&scheme)?;
        let (n, k) = scheme.default_nk();
        let q_default = if scheme == SchemeId::Pruw { 97 } else { 3 };
        Ok(RunConfig {
            scheme,
            n: pick(&self.n, &file.n, n),
            k: pick(&self.k, &file.k, k),
            l: pick_opt(&self.l, &file.l),
            q: pick(&self.q, &file.q, q_default),
            theta: pick(&self.theta, &file.theta, 1),
            seed: pick(&self.seed, &file.seed, 0),
            expected: self.expected,
            cap: pick(&self.cap, &file.cap, DEFAULT_ENUMERATION_CAP),
            out: pick_opt(&self.out, &file.out),
            format: pick(&self.format, &file.format, Format::Json),
        })
    }
}

/// What the measured rate is checked against.
enum Target {
    /// Every round achieves this rate.
    Exact(&'static str, Rate),
    /// The rate averaged over the user's randomness equals this.
    Expected(&'static str, Rate),
    None,
}

#[derive(Serialize)]
struct RunReport {
    scheme: String,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "L")]
    l: usize,
    q: u64,
    theta: usize,
    seed: u64,
    rate: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    expected_rate: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    target: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    target_rate: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pool_symbols_per_symbol: Option<String>,
    decoded_ok: bool,
    rate_ok: bool,
    transcript: TranscriptRecord,
}

pub fn cmd_run(cfg: &RunConfig) -> CliResult {
    let spec = FieldSpec::new(cfg.q)?;
    let (n, k) = (cfg.n, cfg.k);
    match cfg.scheme {
        SchemeId::Cgks => {
            let s = Cgks::new(spec, n, k)?;
            run_pir(&s, cfg, Target::Exact("(N-1)/N", c_spir(n as u64)?), false)
        }
        SchemeId::Residual => {
            let s = Residual::new(spec, n, k)?;
            run_pir(&s, cfg, Target::Exact("(N-1)/N", c_spir(n as u64)?), false)
        }
        SchemeId::Sunjafar => {
            let s = SunJafar::new(spec, n, k)?;
            run_pir(&s, cfg, Target::Exact("c_pir", c_pir(n as u64, k as u64)?), false)
        }
        SchemeId::Tian => {
            let s = Tian::new(spec, n, k)?;
            run_pir(&s, cfg, Target::Expected("c_pir", c_pir(n as u64, k as u64)?), false)
        }
        SchemeId::Leaky => {
            let s = LeakySymmetric::new(spec, n, k)?;
            run_pir(&s, cfg, Target::Expected("c_pir", c_pir(n as u64, k as u64)?), false)
        }
        SchemeId::SpirDeterministic => {
            let s = spir::deterministic(spec, n, k)?;
            run_pir(&s, cfg, Target::Exact("c_spir", c_spir(n as u64)?), true)
        }
        SchemeId::SpirProbabilistic => {
            let s = spir::probabilistic(spec, n, k)?;
            run_pir(&s, cfg, Target::Exact("c_spir", c_spir(n as u64)?), true)
        }
        SchemeId::FixtureLeakyTheta => run_pir(&PlantedLeak::new(spec, k), cfg, Target::None, false),
        SchemeId::Pruw => pruw_demo::cmd_pruw_demo(&PruwConfig {
            n,
            m: k,
            l: cfg.l.unwrap_or(8),
            q: cfg.q,
            theta: cfg.theta,
            seed: cfg.seed,
            distortion: Rate::from_integer(0.into()),
            export: None,
            out: cfg.out.clone(),
        }),
        SchemeId::Sparse => Err(Failure::Config(anyhow::anyhow!(
            "sparse is audit-only; use `pruw-demo` or `leakage`"
        ))),
    }
}

fn expected_rate_of<S: PirScheme>(s: &S, theta: usize, l: usize, cap: u128) -> pirlab::Result<Rate> {
    match pir::expected_rate(s, theta, l, cap) {
        // relabeled schemes download the same amount
        Err(Error::SpaceTooLarge { .. }) if s.relabeling_reduction().is_some() => {
            pir::expected_rate(&s.relabeling_reduction().expect("checked"), theta, l, cap)
        }
        other => other,
    }
}

fn run_pir<S: PirScheme>(s: &S, cfg: &RunConfig, target: Target, symmetric: bool) -> CliResult {
    let sub = s.subpacket_len();
    let l = cfg.l.unwrap_or(sub);
    if l == 0 || !l.is_multiple_of(sub) {
        return Err(anyhow::anyhow!("L = {l} must be a positive multiple of the subpacket length {sub}").into());
    }
    s.check_theta(cfg.theta)?;
    let spec = s.spec();
    let store = MessageStore::random(spec, s.messages(), l, &mut SeededSource::new(cfg.seed, "run/store"))?;
    let mut user = SeededSource::new(cfg.seed, "run/user");
    let (round, pool_rate) = if symmetric {
        let mut pool = CommonRandomnessPool::random(spec, l / sub, &mut SeededSource::new(cfg.seed, "run/pool"));
        let out = spir_round(s, &store, cfg.theta, &mut pool, &mut user)?;
        (out.round, out.cost.pool_symbols_per_symbol)
    } else {
        (pir::run_round(s, &store, cfg.theta, &mut user)?, None)
    };
    let down = round.transcript.downloaded_symbols();
    let rate = Rate::new(l.into(), down.into());
    let decoded_ok = round.decoded_matches(&store);

    let need_expected = cfg.expected || matches!(target, Target::Expected(..));
    let expected = if need_expected {
        Some(expected_rate_of(s, cfg.theta, l, cfg.cap)?)
    } else {
        None
    };
    let (target_name, target_rate, rate_ok) = match &target {
        Target::Exact(name, t) => (Some(*name), Some(t.clone()), rate == *t),
        Target::Expected(name, t) => (Some(*name), Some(t.clone()), expected.as_ref() == Some(t)),
        Target::None => (None, None, true),
    };

    let report = RunReport {
        scheme: cfg.scheme.name().to_string(),
        n: s.databases(),
        k: s.messages(),
        l,
        q: spec.q(),
        theta: cfg.theta,
        seed: cfg.seed,
        rate: rate_string(&rate),
        expected_rate: expected.as_ref().map(rate_string),
        target: target_name,
        target_rate: target_rate.as_ref().map(rate_string),
        pool_symbols_per_symbol: pool_rate.as_ref().map(rate_string),
        decoded_ok,
        rate_ok,
        transcript: round.transcript.to_record(&rate),
    };
    let text = match cfg.format {
        Format::Json => json(&report)?,
        Format::Csv => csv_report(&report)?,
    };
    emit(cfg.out.as_deref(), &text)?;
    if !decoded_ok {
        return Err(Failure::Correctness("decoded message differs from the stored one".into()));
    }
    if !rate_ok {
        return Err(Failure::Correctness(format!(
            "rate {} does not match {}",
            report.expected_rate.as_deref().unwrap_or(&report.rate),
            report.target_rate.as_deref().unwrap_or("-")
        )));
    }
    Ok(())
}

fn csv_report(r: &RunReport) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["scheme", "N", "K", "L", "q", "theta", "db", "uploaded_symbols", "downloaded_symbols", "rate"])?;
    for db in &r.transcript.per_db {
        w.write_record([
            r.scheme.clone(),
            r.n.to_string(),
            r.k.to_string(),
            r.l.to_string(),
            r.q.to_string(),
            r.theta.to_string(),
            db.n.to_string(),
            db.uploaded_symbols.to_string(),
            db.downloaded_symbols.to_string(),
            r.rate.clone(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}
