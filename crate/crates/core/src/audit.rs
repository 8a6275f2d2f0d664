//! Privacy audits by exhaustive enumeration.
//!
//! * User privacy: the exact distribution of the query seen by one database
//!   must not depend on the desired index. Distributions are keyed by
//!   [`Query::canonical_bytes`]; an uncontacted database is keyed by the
//!   empty string. Distance is total variation, as an exact rational.
//! * Database privacy: over uniformly random messages, the posterior of the
//!   undesired messages given everything the user saw must stay uniform.
//! * One-time pad: a masked value must be uniform over its noise.
//!
//! Randomness spaces larger than the cap are refused. Schemes whose queries
//! are symbol permutations of a fixed pattern can be audited on the pattern
//! instead (see [`PirScheme::relabeling_reduction`]); a sampled chi-square
//! comparison is available for exploration.
//!
//! PRUW checks cover one round. Joint views across several rounds are not
//! audited.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::databank::{MessageStore, Query};
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::pir::{run_round, PirScheme};
use crate::spir::{spir_round, spir_user_view, CommonRandomnessPool};
use crate::pruw::{pruw_init, query_for_point, write_updates, EvaluationFrame};
use crate::randomness::{enumerate_paths, PathSource, RandomSource, SeededSource};
use crate::{rate_string, Rate};

/// Exact distribution of the query received by database `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryDistribution {
    pub scheme: String,
    /// 1-based database index.
    pub n: usize,
    pub theta: usize,
    /// Whether symbol labels were replaced by their first-appearance order.
    pub relabeled: bool,
    pub probs: BTreeMap<Vec<u8>, Rate>,
}

impl QueryDistribution {
    pub fn total(&self) -> Rate {
        self.probs.values().cloned().sum()
    }
}

/// Total-variation distance `1/2 sum |p - q|` between two distributions.
pub fn total_variation<K: Ord>(a: &BTreeMap<K, Rate>, b: &BTreeMap<K, Rate>) -> Rate {
    let zero = Rate::zero();
    let keys: BTreeSet<&K> = a.keys().chain(b.keys()).collect();
    let sum: Rate = keys
        .into_iter()
        .map(|k| (a.get(k).unwrap_or(&zero) - b.get(k).unwrap_or(&zero)).abs())
        .sum();
    sum / Rate::from_integer(BigInt::from(2))
}

/// Renames symbol indices of a symbol-sum query by order of first
/// appearance, per message. Other queries are returned unchanged.
pub fn relabel_by_first_appearance(q: &Query) -> Result<Query> {
    let Query::SymbolSums { subpacket_len, requests } = q else {
        return Ok(q.clone());
    };
    let mut names: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut next: BTreeMap<usize, usize> = BTreeMap::new();
    let mut out = Vec::with_capacity(requests.len());
    for r in requests {
        let mut renamed = Vec::with_capacity(r.len());
        for &(m, s) in r {
            if names.contains_key(&(m, s)) {
                return Err(Error::Unsupported {
                    scheme: "audit",
                    reason: format!("symbol ({m}, {s}) appears twice in one query; relabeling is not exact"),
                });
            }
            let c = next.entry(m).or_default();
            names.insert((m, s), *c);
            renamed.push((m, *c));
            *c += 1;
        }
        out.push(renamed);
    }
    Ok(Query::SymbolSums {
        subpacket_len: *subpacket_len,
        requests: out,
    })
}

fn query_key(q: Option<&Query>, relabel: bool) -> Result<Vec<u8>> {
    match q {
        None => Ok(Vec::new()),
        Some(q) if relabel => Ok(relabel_by_first_appearance(q)?.canonical_bytes()),
        Some(q) => Ok(q.canonical_bytes()),
    }
}

fn query_dist_of<S: PirScheme>(scheme: &S, theta: usize, n: usize, cap: u128, relabel: bool) -> Result<QueryDistribution> {
    let probs = enumerate_paths(cap, |src: &mut PathSource| {
        let (queries, _) = scheme.queries(theta, src)?;
        query_key(queries.get(n - 1).and_then(Option::as_ref), relabel)
    })?;
    Ok(QueryDistribution {
        scheme: scheme.name().to_string(),
        n,
        theta,
        relabeled: relabel,
        probs,
    })
}

/// Exact distribution of the query database `n` (1-based) receives when
/// the user wants `W_theta`.
///
/// If the randomness space exceeds `cap` and the scheme offers a relabeling
/// reduction, the reduced scheme is enumerated with relabeled queries.
pub fn enumerate_query_dist<S: PirScheme>(scheme: &S, theta: usize, n: usize, cap: u128) -> Result<QueryDistribution> {
    scheme.check_theta(theta)?;
    if n == 0 || n > scheme.databases() {
        return Err(Error::InvalidParameters(format!(
            "database {n} outside 1..={}",
            scheme.databases()
        )));
    }
    match query_dist_of(scheme, theta, n, cap, false) {
        Err(Error::SpaceTooLarge { .. }) if scheme.relabeling_reduction().is_some() => {
            let reduced = scheme.relabeling_reduction().expect("checked");
            query_dist_of(&reduced, theta, n, cap, true)
        }
        other => other,
    }
}

/// TV distance between the views of database `n` for `theta` and `theta2`.
pub fn user_privacy_tv<S: PirScheme>(scheme: &S, theta: usize, theta2: usize, n: usize, cap: u128) -> Result<Rate> {
    let a = enumerate_query_dist(scheme, theta, n, cap)?;
    let b = enumerate_query_dist(scheme, theta2, n, cap)?;
    if a.relabeled != b.relabeled {
        return Err(Error::InvalidParameters("cannot compare raw and relabeled distributions".into()));
    }
    Ok(total_variation(&a.probs, &b.probs))
}

/// Largest TV distance over every database and every pair of indices.
pub fn max_user_privacy_tv<S: PirScheme>(scheme: &S, cap: u128) -> Result<Rate> {
    let mut worst = Rate::zero();
    for n in 1..=scheme.databases() {
        let dists = (1..=scheme.messages())
            .map(|t| enumerate_query_dist(scheme, t, n, cap))
            .collect::<Result<Vec<_>>>()?;
        for (i, a) in dists.iter().enumerate() {
            for b in &dists[i + 1..] {
                let tv = total_variation(&a.probs, &b.probs);
                if tv > worst {
                    worst = tv;
                }
            }
        }
    }
    Ok(worst)
}

/// Result of a database-privacy check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PosteriorReport {
    /// Distinct user views with positive probability.
    pub views: usize,
    /// Largest `|posterior - uniform|` over all views and undesired values.
    pub max_deviation: Rate,
}

impl PosteriorReport {
    pub fn uniform(&self) -> bool {
        self.max_deviation.is_zero()
    }
}

/// Posterior of the undesired messages given the user's view, over all
/// `q^(K L)` message stores with a uniform prior.
///
/// `round` runs one retrieval of `W_theta` from the given store, drawing
/// all of its randomness (user and server side) from `src`, and returns a
/// key for everything the user observed.
pub fn db_privacy_posterior<F>(spec: FieldSpec, k: usize, l: usize, theta: usize, cap: u128, round: F) -> Result<PosteriorReport>
where
    F: Fn(&MessageStore, &mut dyn RandomSource) -> Result<Vec<u8>> + Sync,
{
    if theta == 0 || theta > k {
        return Err(Error::InvalidParameters(format!("theta = {theta} outside 1..={k}")));
    }
    let q = spec.q() as u128;
    let symbols = (k * l) as u32;
    let stores = q.checked_pow(symbols).filter(|&s| s <= cap).ok_or(Error::SpaceTooLarge {
        size: q.saturating_pow(symbols),
        cap,
    })?;
    let others = q.pow(((k - 1) * l) as u32);

    // view -> undesired messages -> P(view | store) summed over W_theta
    type Table = BTreeMap<Vec<u8>, BTreeMap<Vec<u64>, Rate>>;
    let table: Table = (0..stores)
        .into_par_iter()
        .map(|index| -> Result<Table> {
            let mut digits = Vec::with_capacity(k * l);
            let mut rest = index;
            for _ in 0..k * l {
                digits.push((rest % q) as u64);
                rest /= q;
            }
            let values: Vec<Vec<u64>> = digits.chunks(l).map(<[u64]>::to_vec).collect();
            let store = MessageStore::from_values(spec, &values)?;
            let undesired: Vec<u64> = values
                .iter()
                .enumerate()
                .filter(|(m, _)| m + 1 != theta)
                .flat_map(|(_, v)| v.iter().copied())
                .collect();
            let dist = enumerate_paths(cap, |src: &mut PathSource| round(&store, src))?;
            let mut t = Table::new();
            for (view, p) in dist {
                t.entry(view).or_default().insert(undesired.clone(), p);
            }
            Ok(t)
        })
        .try_reduce(Table::new, |mut a, b| {
            for (view, m) in b {
                let slot = a.entry(view).or_default();
                for (w, p) in m {
                    *slot.entry(w).or_insert_with(Rate::zero) += p;
                }
            }
            Ok(a)
        })?;

    let uniform = Rate::new(BigInt::one(), BigInt::from(others));
    let mut worst = Rate::zero();
    for masses in table.values() {
        let total: Rate = masses.values().cloned().sum();
        let missing = others - masses.len() as u128;
        if missing > 0 && uniform > worst {
            worst = uniform.clone();
        }
        for p in masses.values() {
            let dev = (p / &total - &uniform).abs();
            if dev > worst {
                worst = dev;
            }
        }
    }
    Ok(PosteriorReport {
        views: table.len(),
        max_deviation: worst,
    })
}

/// What the user sees of the server-side randomness in a SPIR audit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PoolExposure {
    /// Answers are padded and the pad stays hidden.
    Hidden,
    /// Answers are padded and the pad is appended to the user's view.
    Revealed,
    /// Answers are not padded (plain PIR).
    Absent,
}

/// Database-privacy posterior of a SPIR retrieval of one subpacket, over
/// every store, every user key and every pad value.
pub fn spir_db_privacy<S: PirScheme>(scheme: &S, theta: usize, exposure: PoolExposure, cap: u128) -> Result<PosteriorReport> {
    let spec = scheme.spec();
    let l = scheme.subpacket_len();
    db_privacy_posterior(spec, scheme.messages(), l, theta, cap, |store, src| {
        if exposure == PoolExposure::Absent {
            let t = run_round(scheme, store, theta, src)?.transcript;
            return Ok(spir_user_view(&t).key());
        }
        let mut pool = CommonRandomnessPool::random(spec, 1, src);
        let pad = pool.handle()[0];
        let t = spir_round(scheme, store, theta, &mut pool, src)?.round.transcript;
        let mut key = spir_user_view(&t).key();
        if exposure == PoolExposure::Revealed {
            key.extend_from_slice(&pad.value().to_le_bytes());
        }
        Ok(key)
    })
}

/// Exact distribution of a masked value and whether it is uniform.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OtpVerdict {
    pub uniform: bool,
    /// Size of the value space, `q^width`.
    pub cells: u128,
    pub distribution: BTreeMap<Vec<u64>, Rate>,
}

impl OtpVerdict {
    /// Total-variation distance from the uniform distribution.
    pub fn distance_from_uniform(&self) -> Rate {
        let u = Rate::new(BigInt::one(), BigInt::from(self.cells));
        let seen: Rate = self.distribution.values().map(|p| (p - &u).abs()).sum();
        let unseen = Rate::from_integer(BigInt::from(self.cells - self.distribution.len() as u128)) * &u;
        (seen + unseen) / Rate::from_integer(BigInt::from(2))
    }
}

/// Enumerates the noise of `generator` and checks that its output, a
/// vector of `width` field elements, is uniform over `F_q^width`.
pub fn otp_uniformity<F>(spec: FieldSpec, width: usize, cap: u128, generator: F) -> Result<OtpVerdict>
where
    F: Fn(&mut dyn RandomSource) -> Result<Vec<FieldElement>> + Sync,
{
    let distribution = enumerate_paths(cap, |src: &mut PathSource| {
        Ok(generator(src)?.iter().map(FieldElement::value).collect::<Vec<u64>>())
    })?;
    let cells = (spec.q() as u128)
        .checked_pow(width as u32)
        .filter(|&c| c <= cap)
        .ok_or(Error::SpaceTooLarge {
            size: (spec.q() as u128).saturating_pow(width as u32),
            cap,
        })?;
    let p = Rate::new(BigInt::one(), BigInt::from(cells));
    let uniform = distribution.len() as u128 == cells && distribution.values().all(|v| *v == p);
    Ok(OtpVerdict {
        uniform,
        cells,
        distribution,
    })
}

/// Uniformity of database `n`'s share of a fixed symbol `w` over the
/// storage noise.
pub fn pruw_share_uniformity(frame: &EvaluationFrame, w: FieldElement, n: usize, cap: u128) -> Result<OtpVerdict> {
    otp_uniformity(frame.spec(), 1, cap, |src| {
        let dbs = pruw_init(&[vec![w]], frame, src)?;
        Ok(vec![dbs[n].shares()[0][0]])
    })
}

/// Uniformity of database `n`'s update value for a fixed `delta` over the
/// update noise.
pub fn pruw_update_uniformity(frame: &EvaluationFrame, delta: FieldElement, n: usize, cap: u128) -> Result<OtpVerdict> {
    otp_uniformity(frame.spec(), 1, cap, |src| {
        let u = write_updates(frame, &[(0, delta)], src);
        Ok(vec![u[n][0].1])
    })
}

/// Exact distribution of the read query seen by a database with point
/// `alpha`, over the shared noise vector.
pub fn pruw_query_dist(
    spec: FieldSpec,
    f: FieldElement,
    alpha: FieldElement,
    m: usize,
    theta: usize,
    cap: u128,
) -> Result<BTreeMap<Vec<u64>, Rate>> {
    enumerate_paths(cap, |src: &mut PathSource| {
        let zbar = src.elements(spec, m);
        Ok(query_for_point(f, alpha, theta, &zbar)?
            .iter()
            .map(FieldElement::value)
            .collect::<Vec<u64>>())
    })
}

/// TV distance between a database's read-query views for two submodel
/// indices. Only `f != alpha` is required, so the check runs in fields too
/// small to hold a full frame.
pub fn pruw_query_tv(spec: FieldSpec, f: u64, alpha: u64, m: usize, theta: usize, theta2: usize, cap: u128) -> Result<Rate> {
    let (f, alpha) = (spec.element(f), spec.element(alpha));
    if f == alpha {
        return Err(Error::InvalidParameters("alpha must differ from f".into()));
    }
    let a = pruw_query_dist(spec, f, alpha, m, theta, cap)?;
    let b = pruw_query_dist(spec, f, alpha, m, theta2, cap)?;
    Ok(total_variation(&a, &b))
}

/// TV distance between database `n`'s share distributions for two stored
/// values.
pub fn pruw_share_tv(frame: &EvaluationFrame, w0: FieldElement, w1: FieldElement, n: usize, cap: u128) -> Result<Rate> {
    let a = pruw_share_uniformity(frame, w0, n, cap)?.distribution;
    let b = pruw_share_uniformity(frame, w1, n, cap)?.distribution;
    Ok(total_variation(&a, &b))
}

/// TV distance between the permuted positions a database sees when the
/// client updates real set `a` versus real set `b`, over a uniformly random
/// single-segment permutation of `0..l`.
pub fn sparse_index_tv(l: usize, a: &[usize], b: &[usize], cap: u128) -> Result<Rate> {
    let view = |set: &[usize]| {
        enumerate_paths(cap, |src: &mut PathSource| {
            let perm = src.permutation(l);
            let mut seen: Vec<usize> = set
                .iter()
                .map(|&i| perm.iter().position(|&p| p == i).expect("position in range"))
                .collect();
            seen.sort_unstable();
            Ok(seen)
        })
    };
    if a.iter().chain(b).any(|&i| i >= l) {
        return Err(Error::InvalidParameters(format!("positions must lie in 0..{l}")));
    }
    Ok(total_variation(&view(a)?, &view(b)?))
}

/// Two-sample chi-square comparison of sampled query distributions.
#[derive(Clone, Debug, PartialEq)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Significance level; the samples are called consistent when
    /// `p_value >= threshold`.
    pub threshold: f64,
}

impl ChiSquareReport {
    pub fn consistent(&self) -> bool {
        self.p_value >= self.threshold
    }
}

/// Significance level used by [`sampled_user_privacy`].
pub const CHI_SQUARE_THRESHOLD: f64 = 0.01;

/// Draws `samples` queries for each of `theta` and `theta2` and compares
/// database `n`'s views with a chi-square homogeneity test. For spaces too
/// large to enumerate; not a proof of privacy.
pub fn sampled_user_privacy<S: PirScheme>(
    scheme: &S,
    theta: usize,
    theta2: usize,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<ChiSquareReport> {
    let sample = |t: usize| -> Result<BTreeMap<Vec<u8>, u64>> {
        let mut src = SeededSource::new(seed, &format!("audit/sampled/{t}"));
        let mut counts = BTreeMap::new();
        for _ in 0..samples {
            let (queries, _) = scheme.queries(t, &mut src)?;
            *counts
                .entry(query_key(queries.get(n - 1).and_then(Option::as_ref), false)?)
                .or_default() += 1;
        }
        Ok(counts)
    };
    let (a, b) = (sample(theta)?, sample(theta2)?);
    chi_square_homogeneity(&a, &b)
}

/// Chi-square homogeneity statistic for two count tables.
pub fn chi_square_homogeneity<K: Ord>(a: &BTreeMap<K, u64>, b: &BTreeMap<K, u64>) -> Result<ChiSquareReport> {
    let na: u64 = a.values().sum();
    let nb: u64 = b.values().sum();
    if na == 0 || nb == 0 {
        return Err(Error::InvalidParameters("both samples must be non-empty".into()));
    }
    let keys: BTreeSet<&K> = a.keys().chain(b.keys()).collect();
    let total = (na + nb) as f64;
    let mut stat = 0.0;
    for k in &keys {
        let ca = *a.get(k).unwrap_or(&0) as f64;
        let cb = *b.get(k).unwrap_or(&0) as f64;
        let col = ca + cb;
        let ea = col * na as f64 / total;
        let eb = col * nb as f64 / total;
        stat += (ca - ea).powi(2) / ea + (cb - eb).powi(2) / eb;
    }
    let dof = keys.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        let dist = ChiSquared::new(dof as f64).map_err(|e| Error::InvalidParameters(e.to_string()))?;
        1.0 - dist.cdf(stat)
    };
    Ok(ChiSquareReport {
        statistic: stat,
        dof,
        p_value,
        threshold: CHI_SQUARE_THRESHOLD,
    })
}

/// Machine-readable audit outcome.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub scheme: String,
    pub check: String,
    pub params: BTreeMap<String, String>,
    pub result: String,
    pub tv: String,
}

impl AuditReport {
    /// A check passes when its distance is exactly zero.
    pub fn from_distance(scheme: &str, check: &str, params: BTreeMap<String, String>, tv: &Rate) -> Self {
        Self {
            scheme: scheme.to_string(),
            check: check.to_string(),
            params,
            result: if tv.is_zero() { "pass" } else { "fail" }.to_string(),
            tv: rate_string(tv),
        }
    }

    pub fn passed(&self) -> bool {
        self.result == "pass"
    }
}
