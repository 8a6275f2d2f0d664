use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use num_traits::Zero;
use pirlab::audit::{
    enumerate_query_dist, otp_uniformity, pruw_query_tv, pruw_share_tv, pruw_share_uniformity,
    pruw_update_uniformity, sparse_index_tv, spir_db_privacy, total_variation, AuditReport, PoolExposure,
};
use pirlab::pir::{fixtures::PlantedLeak, Cgks, LeakySymmetric, PirScheme, Residual, SunJafar, Tian};
use pirlab::pruw::{query_for_point, EvaluationFrame};
use pirlab::randomness::DEFAULT_ENUMERATION_CAP;
use pirlab::spir;
use pirlab::{FieldSpec, Rate};

use crate::config::{pick, pick_opt, FileConfig, SchemeId};
use crate::output::{emit, json};
use crate::{CliResult, Failure};

#[derive(Args, Debug)]
pub struct AuditArgs {
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Messages, or submodels for pruw.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    q: Option<u64>,
    /// Model size for the sparse index audit.
    #[arg(long)]
    l: Option<usize>,
    /// Largest randomness space enumerated.
    #[arg(long)]
    cap: Option<u128>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct AuditConfig {
    pub scheme: SchemeId,
    pub n: usize,
    pub k: usize,
    pub q: u64,
    pub l: usize,
    pub cap: u128,
    pub out: Option<PathBuf>,
}

impl AuditArgs {
    pub fn resolve(&self, file: &FileConfig) -> anyhow::Result<AuditConfig> {
        let scheme = pick_opt(&self.scheme, &file.scheme).ok_or_else(|| anyhow::anyhow!("--scheme is required"))?;
        let scheme = SchemeId::parse(&scheme)?;
        let (n, k) = scheme.default_nk();
        let q = if scheme == SchemeId::Pruw { 5 } else { 3 };
        Ok(AuditConfig {
            scheme,
            n: pick(&self.n, &file.n, n),
            k: pick(&self.k, &file.k, k),
            q: pick(&self.q, &file.q, q),
            l: pick(&self.l, &file.l, 5),
            cap: pick(&self.cap, &file.cap, DEFAULT_ENUMERATION_CAP),
            out: pick_opt(&self.out, &file.out),
        })
    }
}

struct Reports {
    scheme: &'static str,
    base: BTreeMap<String, String>,
    list: Vec<AuditReport>,
}

impl Reports {
    fn push(&mut self, check: &str, extra: &[(&str, String)], tv: &Rate) {
        let mut params = self.base.clone();
        for (k, v) in extra {
            params.insert(k.to_string(), v.clone());
        }
        self.list.push(AuditReport::from_distance(self.scheme, check, params, tv));
    }
}

pub fn cmd_audit(cfg: &AuditConfig) -> CliResult {
    let spec = FieldSpec::new(cfg.q)?;
    let mut base = BTreeMap::new();
    base.insert("q".to_string(), cfg.q.to_string());
    if cfg.scheme != SchemeId::Sparse {
        base.insert("N".to_string(), cfg.n.to_string());
        let key = if cfg.scheme == SchemeId::Pruw { "M" } else { "K" };
        base.insert(key.to_string(), cfg.k.to_string());
    }
    let mut r = Reports {
        scheme: cfg.scheme.name(),
        base,
        list: Vec::new(),
    };
    let (n, k, cap) = (cfg.n, cfg.k, cfg.cap);
    match cfg.scheme {
        SchemeId::Cgks => user_privacy(&mut r, &Cgks::new(spec, n, k)?, cap)?,
        SchemeId::Residual => user_privacy(&mut r, &Residual::new(spec, n, k)?, cap)?,
        SchemeId::Sunjafar => user_privacy(&mut r, &SunJafar::new(spec, n, k)?, cap)?,
        SchemeId::Tian => user_privacy(&mut r, &Tian::new(spec, n, k)?, cap)?,
        SchemeId::Leaky => user_privacy(&mut r, &LeakySymmetric::new(spec, n, k)?, cap)?,
        SchemeId::FixtureLeakyTheta => user_privacy(&mut r, &PlantedLeak::new(spec, k), cap)?,
        SchemeId::SpirDeterministic => {
            let s = spir::deterministic(spec, n, k)?;
            user_privacy(&mut r, &s, cap)?;
            db_privacy(&mut r, &s, cap)?;
        }
        SchemeId::SpirProbabilistic => {
            let s = spir::probabilistic(spec, n, k)?;
            user_privacy(&mut r, &s, cap)?;
            db_privacy(&mut r, &s, cap)?;
        }
        SchemeId::Pruw => pruw_checks(&mut r, &EvaluationFrame::standard(spec, n)?, k, cap)?,
        SchemeId::Sparse => sparse_checks(&mut r, cfg.l, cap)?,
    }

    emit(cfg.out.as_deref(), &json(&r.list)?)?;
    for rep in &r.list {
        let params: Vec<String> = rep.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        eprintln!("{:<6} {} {} [{}] tv={}", rep.result, rep.scheme, rep.check, params.join(","), rep.tv);
    }
    let failed = r.list.iter().filter(|x| !x.passed()).count();
    if failed > 0 {
        return Err(Failure::Audit(format!("{failed} of {} checks failed", r.list.len())));
    }
    Ok(())
}

/// Largest TV distance over index pairs, per database.
fn user_privacy<S: PirScheme>(r: &mut Reports, s: &S, cap: u128) -> pirlab::Result<()> {
    for db in 1..=s.databases() {
        let dists = (1..=s.messages())
            .map(|t| enumerate_query_dist(s, t, db, cap))
            .collect::<pirlab::Result<Vec<_>>>()?;
        let mut worst = Rate::zero();
        for (i, a) in dists.iter().enumerate() {
            for b in &dists[i + 1..] {
                worst = worst.max(total_variation(&a.probs, &b.probs));
            }
        }
        let relabeled = dists.first().is_some_and(|d| d.relabeled);
        r.push("user-privacy", &[("n", db.to_string()), ("relabeled", relabeled.to_string())], &worst);
    }
    Ok(())
}

/// The `tv` field carries the largest posterior deviation from uniform.
fn db_privacy<S: PirScheme>(r: &mut Reports, s: &S, cap: u128) -> pirlab::Result<()> {
    for theta in 1..=s.messages() {
        let rep = spir_db_privacy(s, theta, PoolExposure::Hidden, cap)?;
        r.push("db-privacy", &[("theta", theta.to_string())], &rep.max_deviation);
    }
    Ok(())
}

fn pruw_checks(r: &mut Reports, frame: &EvaluationFrame, m: usize, cap: u128) -> pirlab::Result<()> {
    let spec = frame.spec();
    let (f, one) = (frame.f(), spec.one());
    for (db, &alpha) in frame.alphas().iter().enumerate() {
        let at = [("n", (db + 1).to_string())];
        r.push("share-otp", &at, &pruw_share_uniformity(frame, one, db, cap)?.distance_from_uniform());
        r.push("share-security", &at, &pruw_share_tv(frame, spec.zero(), one, db, cap)?);
        r.push("update-otp", &at, &pruw_update_uniformity(frame, one, db, cap)?.distance_from_uniform());
        let q = otp_uniformity(spec, m, cap, |src| query_for_point(f, alpha, 1, &src.elements(spec, m)))?;
        r.push("query-otp", &at, &q.distance_from_uniform());
        let mut worst = Rate::zero();
        for a in 1..=m {
            for b in a + 1..=m {
                worst = worst.max(pruw_query_tv(spec, f.value(), alpha.value(), m, a, b, cap)?);
            }
        }
        r.push("query-privacy", &at, &worst);
    }
    Ok(())
}

fn sparse_checks(r: &mut Reports, l: usize, cap: u128) -> pirlab::Result<()> {
    let s = l.min(2);
    let first: Vec<usize> = (0..s).collect();
    let mut worst = Rate::zero();
    let mut count = 0;
    for mask in 0u32..(1 << l) {
        if mask.count_ones() as usize != s {
            continue;
        }
        let set: Vec<usize> = (0..l).filter(|i| mask & (1 << i) != 0).collect();
        worst = worst.max(sparse_index_tv(l, &first, &set, cap)?);
        count += 1;
    }
    r.push(
        "index-privacy",
        &[("L", l.to_string()), ("s", s.to_string()), ("sets", count.to_string())],
        &worst,
    );
    Ok(())
}
