//! Classical multi-server PIR schemes.
//!
//! Five schemes share the [`PirScheme`] interface:
//!
//! * [`Cgks`]: two databases, one random vector and its shift by `e_theta`;
//!   rate 1/2.
//! * [`Residual`]: `N` databases, `N - 1` desired symbols per subpacket
//!   against one shared side-information answer; rate `(N - 1)/N`.
//! * [`SunJafar`]: deterministic capacity-achieving scheme with subpackets
//!   of `N^K` symbols, message symmetry and side-information reuse.
//! * [`Tian`]: probabilistic capacity-achieving scheme with `N - 1` symbols
//!   per subpacket plus a zero dummy.
//! * [`LeakySymmetric`]: the four-row probabilistic table for `N = K = 2`.
//!
//! Message indices `theta` are 1-based everywhere in this module. Symbol and
//! message indices inside [`Query`] values are 0-based.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::databank::{
    replicate, serve_round, MessageStore, Query, SchemeTranscript, ServeRequest,
};
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::randomness::{enumerate_paths, RandomSource};
use crate::Rate;

/// Answers as seen by the user: one entry per database, `None` if the
/// database was not contacted.
pub type Answers = [Option<Vec<FieldElement>>];

/// A PIR scheme: query generation and decoding for one subpacket layout.
///
/// Queries are generated once per run and applied to every subpacket of the
/// store; answers are concatenated subpacket by subpacket.
pub trait PirScheme: Sync {
    /// Client-side secret needed to decode (symbol permutations, keys, ...).
    type Client;

    fn name(&self) -> &'static str;
    fn spec(&self) -> FieldSpec;
    fn databases(&self) -> usize;
    fn messages(&self) -> usize;
    /// Symbols of each message covered by one subpacket.
    fn subpacket_len(&self) -> usize;

    /// Per-database queries for retrieving `W_theta`.
    fn queries(
        &self,
        theta: usize,
        src: &mut dyn RandomSource,
    ) -> Result<(Vec<Option<Query>>, Self::Client)>;

    /// Recovers one subpacket of `W_theta` from the per-database answer
    /// chunks belonging to that subpacket.
    fn decode_subpacket(
        &self,
        theta: usize,
        client: &Self::Client,
        chunks: &[Option<&[FieldElement]>],
    ) -> Result<Vec<FieldElement>>;

    /// An equivalent scheme whose query distribution is obtained from this
    /// one's by relabeling symbol indices uniformly at random, if any. The
    /// audit enumerates the reduced scheme when the full space is too large.
    fn relabeling_reduction(&self) -> Option<Self>
    where
        Self: Sized,
    {
        None
    }

    fn check_theta(&self, theta: usize) -> Result<()> {
        if theta == 0 || theta > self.messages() {
            return Err(Error::InvalidParameters(format!(
                "theta = {theta} outside 1..={}",
                self.messages()
            )));
        }
        Ok(())
    }
}

/// Result of one simulated retrieval.
#[derive(Clone, Debug)]
pub struct RoundOutcome {
    pub transcript: SchemeTranscript,
    pub decoded: Vec<FieldElement>,
}

impl RoundOutcome {
    pub fn decoded_matches(&self, store: &MessageStore) -> bool {
        self.decoded == store.message(self.transcript.theta)
    }
}

fn check_store<S: PirScheme>(scheme: &S, store: &MessageStore) -> Result<()> {
    if store.spec() != scheme.spec() {
        return Err(Error::MismatchedField {
            left: scheme.spec().q(),
            right: store.spec().q(),
        });
    }
    if store.message_count() != scheme.messages() {
        return Err(Error::InvalidParameters(format!(
            "store holds {} messages, scheme expects {}",
            store.message_count(),
            scheme.messages()
        )));
    }
    if !store.message_len().is_multiple_of(scheme.subpacket_len()) {
        return Err(Error::InvalidParameters(format!(
            "message length {} is not a multiple of the subpacket length {}",
            store.message_len(),
            scheme.subpacket_len()
        )));
    }
    Ok(())
}

/// Splits each database's answer into per-subpacket chunks and decodes.
pub fn decode_answers<S: PirScheme>(
    scheme: &S,
    theta: usize,
    client: &S::Client,
    answers: &Answers,
    l: usize,
) -> Result<Vec<FieldElement>> {
    let p = scheme.subpacket_len();
    let subpackets = l / p;
    let mut out = Vec::with_capacity(l);
    for s in 0..subpackets {
        let chunks: Vec<Option<&[FieldElement]>> = answers
            .iter()
            .map(|a| {
                a.as_ref().map(|a| {
                    let per = a.len() / subpackets;
                    &a[s * per..(s + 1) * per]
                })
            })
            .collect();
        out.extend(scheme.decode_subpacket(theta, client, &chunks)?);
    }
    Ok(out)
}

/// Runs one retrieval of `W_theta` against `N` fresh replicas of `store`.
///
/// With `pad = Some((pool, offset))` every contacted database adds
/// common-randomness symbols `pool[offset + s]` to its answer for
/// subpacket `s`.
pub fn execute_round<S: PirScheme>(
    scheme: &S,
    store: &MessageStore,
    theta: usize,
    src: &mut dyn RandomSource,
    pad: Option<(std::sync::Arc<[FieldElement]>, usize)>,
) -> Result<RoundOutcome> {
    scheme.check_theta(theta)?;
    check_store(scheme, store)?;
    let (queries, client) = scheme.queries(theta, src)?;
    let mut dbs = replicate(store, scheme.databases());
    let requests: Vec<Option<ServeRequest>> = queries
        .into_iter()
        .map(|q| {
            q.map(|q| match &pad {
                Some((_, offset)) => ServeRequest::padded(q, *offset),
                None => ServeRequest::plain(q),
            })
        })
        .collect();
    if let Some((pool, _)) = &pad {
        for db in &mut dbs {
            db.attach_pool(pool.clone());
        }
    }
    let answers = serve_round(&mut dbs, &requests)?;
    let mut transcript = SchemeTranscript::new(
        scheme.name(),
        store.spec(),
        scheme.databases(),
        store.message_count(),
        store.message_len(),
        theta,
    );
    transcript.record(&requests, &answers);
    let decoded = decode_answers(scheme, theta, &client, &answers, store.message_len())?;
    Ok(RoundOutcome {
        transcript,
        decoded,
    })
}

/// Plain PIR retrieval.
pub fn run_round<S: PirScheme>(
    scheme: &S,
    store: &MessageStore,
    theta: usize,
    src: &mut dyn RandomSource,
) -> Result<RoundOutcome> {
    execute_round(scheme, store, theta, src, None)
}

/// Expected rate `L / E[downloaded symbols]`, averaged exactly over the
/// scheme's whole randomness space.
pub fn expected_rate<S: PirScheme>(scheme: &S, theta: usize, l: usize, cap: u128) -> Result<Rate> {
    scheme.check_theta(theta)?;
    let dist = enumerate_paths(cap, |src| {
        let (queries, _) = scheme.queries(theta, src)?;
        Ok(queries
            .iter()
            .flatten()
            .map(|q| q.answer_len(l))
            .sum::<usize>())
    })?;
    let expected: Rate = dist
        .into_iter()
        .map(|(down, p)| p * Rate::from_integer(BigInt::from(down)))
        .sum();
    if expected.is_zero() {
        return Err(Error::EmptyTranscript);
    }
    Ok(Rate::from_integer(BigInt::from(l)) / expected)
}

fn chunk<'a>(chunks: &[Option<&'a [FieldElement]>], n: usize) -> Result<&'a [FieldElement]> {
    chunks
        .get(n)
        .copied()
        .flatten()
        .ok_or_else(|| Error::DecodeFailure(format!("missing answer from database {}", n + 1)))
}

// ---------------------------------------------------------------------------
// CGKS

/// Two-database scheme: `h` to database 1, `h + e_theta` to database 2.
#[derive(Clone, Debug)]
pub struct Cgks {
    spec: FieldSpec,
    k: usize,
}

impl Cgks {
    pub fn new(spec: FieldSpec, n: usize, k: usize) -> Result<Self> {
        if n != 2 {
            return Err(Error::Unsupported {
                scheme: "cgks",
                reason: format!("requires exactly N = 2 databases (got {n})"),
            });
        }
        if k == 0 {
            return Err(Error::InvalidParameters("K must be at least 1".into()));
        }
        Ok(Self { spec, k })
    }
}

impl PirScheme for Cgks {
    type Client = ();

    fn name(&self) -> &'static str {
        "cgks"
    }
    fn spec(&self) -> FieldSpec {
        self.spec
    }
    fn databases(&self) -> usize {
        2
    }
    fn messages(&self) -> usize {
        self.k
    }
    fn subpacket_len(&self) -> usize {
        1
    }

    fn queries(&self, theta: usize, src: &mut dyn RandomSource) -> Result<(Vec<Option<Query>>, ())> {
        self.check_theta(theta)?;
        let h = src.elements(self.spec, self.k);
        let mut shifted = h.clone();
        shifted[theta - 1] += self.spec.one();
        let q = |coeffs| {
            Some(Query::Linear {
                subpacket_len: 1,
                coeffs,
            })
        };
        Ok((vec![q(h), q(shifted)], ()))
    }

    fn decode_subpacket(
        &self,
        _theta: usize,
        _client: &(),
        chunks: &[Option<&[FieldElement]>],
    ) -> Result<Vec<FieldElement>> {
        Ok(vec![chunk(chunks, 1)?[0] - chunk(chunks, 0)?[0]])
    }
}

// ---------------------------------------------------------------------------
// Residual scheme, rate (N - 1)/N

/// `N`-database scheme retrieving `N - 1` symbols per subpacket against a
/// single side-information answer from database 1.
#[derive(Clone, Debug)]
pub struct Residual {
    spec: FieldSpec,
    n: usize,
    k: usize,
}

impl Residual {
    pub fn new(spec: FieldSpec, n: usize, k: usize) -> Result<Self> {
        if n < 2 || k == 0 {
            return Err(Error::InvalidParameters(format!(
                "residual scheme needs N >= 2, K >= 1 (got N={n}, K={k})"
            )));
        }
        Ok(Self { spec, n, k })
    }

    /// Queries from an explicit `K x (N-1)` noise matrix, message-major.
    pub fn queries_from_noise(&self, theta: usize, h: &[FieldElement]) -> Result<Vec<Option<Query>>> {
        self.check_theta(theta)?;
        let p = self.n - 1;
        if h.len() != self.k * p {
            return Err(Error::LengthMismatch {
                expected: self.k * p,
                got: h.len(),
            });
        }
        let mut out = vec![Some(Query::Linear {
            subpacket_len: p,
            coeffs: h.to_vec(),
        })];
        for j in 0..p {
            let mut coeffs = h.to_vec();
            coeffs[(theta - 1) * p + j] += self.spec.one();
            out.push(Some(Query::Linear {
                subpacket_len: p,
                coeffs,
            }));
        }
        Ok(out)
    }
}

impl PirScheme for Residual {
    type Client = ();

    fn name(&self) -> &'static str {
        "residual"
    }
    fn spec(&self) -> FieldSpec {
        self.spec
    }
    fn databases(&self) -> usize {
        self.n
    }
    fn messages(&self) -> usize {
        self.k
    }
    fn subpacket_len(&self) -> usize {
        self.n - 1
    }

    fn queries(&self, theta: usize, src: &mut dyn RandomSource) -> Result<(Vec<Option<Query>>, ())> {
        let h = src.elements(self.spec, self.k * (self.n - 1));
        Ok((self.queries_from_noise(theta, &h)?, ()))
    }

    fn decode_subpacket(
        &self,
        _theta: usize,
        _client: &(),
        chunks: &[Option<&[FieldElement]>],
    ) -> Result<Vec<FieldElement>> {
        let base = chunk(chunks, 0)?[0];
        (1..self.n).map(|j| Ok(chunk(chunks, j)?[0] - base)).collect()
    }
}

// ---------------------------------------------------------------------------
// Sun–Jafar deterministic scheme

/// Where a desired symbol comes from: the request that carries it and, for
/// sums of two or more messages, the side-information request to cancel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DesiredSymbol {
    /// Position inside the subpacket of `W_theta`.
    pub position: usize,
    pub db: usize,
    pub request: usize,
    pub side_information: Option<(usize, usize)>,
}

/// Per-database download requests plus the client's decoding map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SunJafarPlan {
    pub subpacket_len: usize,
    /// `requests[db][i]` lists `(message, symbol)` pairs, 0-based, sorted by
    /// message.
    pub requests: Vec<Vec<Vec<(usize, usize)>>>,
    pub desired: Vec<DesiredSymbol>,
}

impl SunJafarPlan {
    pub fn downloads_per_db(&self) -> Vec<usize> {
        self.requests.iter().map(Vec::len).collect()
    }
}

fn subsets_of_size(k: usize, t: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, k: usize, t: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == t {
            out.push(cur.clone());
            return;
        }
        for i in start..k {
            cur.push(i);
            rec(i + 1, k, t, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, k, t, &mut Vec::new(), &mut out);
    out
}

/// Builds the download plan for `W_theta` given one symbol permutation per
/// message (`perms[m][i]` is where the `i`-th fresh symbol of message `m`
/// lives in the subpacket).
///
/// For each database and each `t`-subset `S` of messages the plan issues
/// `(N-1)^(t-1)` sums of one symbol from every member of `S`. Sums avoiding
/// `theta` use fresh symbols and become side information; sums containing
/// `theta` pair a fresh desired symbol with the `(S \ {theta})`-sums that
/// every other database downloaded one level below, taken in database order.
pub fn sunjafar_plan_with(n: usize, k: usize, theta: usize, perms: &[Vec<usize>]) -> Result<SunJafarPlan> {
    if n < 2 || k == 0 {
        return Err(Error::InvalidParameters(format!(
            "Sun-Jafar needs N >= 2, K >= 1 (got N={n}, K={k})"
        )));
    }
    if theta == 0 || theta > k {
        return Err(Error::InvalidParameters(format!("theta = {theta} outside 1..={k}")));
    }
    let p = n.checked_pow(k as u32).ok_or_else(|| {
        Error::InvalidParameters(format!("subpacket N^K overflows for N={n}, K={k}"))
    })?;
    if perms.len() != k || perms.iter().any(|pi| pi.len() != p) {
        return Err(Error::InvalidParameters("one permutation of N^K symbols per message".into()));
    }
    let desired_msg = theta - 1;
    let mut fresh = vec![0usize; k];
    let take = |m: usize, fresh: &mut Vec<usize>| -> Result<usize> {
        let i = fresh[m];
        if i >= p {
            return Err(Error::InvalidParameters("ran out of fresh symbols".into()));
        }
        fresh[m] += 1;
        Ok(perms[m][i])
    };

    let mut requests: Vec<Vec<Vec<(usize, usize)>>> = vec![Vec::new(); n];
    let mut desired = Vec::with_capacity(p);
    // (db, subset without theta) -> request indices of side-information sums
    let mut side: HashMap<(usize, Vec<usize>), Vec<usize>> = HashMap::new();

    for t in 1..=k {
        let instances = (n - 1).pow(t as u32 - 1);
        for db in 0..n {
            for subset in subsets_of_size(k, t) {
                if subset.contains(&desired_msg) {
                    let rest: Vec<usize> = subset.iter().copied().filter(|&m| m != desired_msg).collect();
                    let pairs: Vec<Option<(usize, usize)>> = if rest.is_empty() {
                        vec![None; instances]
                    } else {
                        (0..n)
                            .filter(|&other| other != db)
                            .flat_map(|other| {
                                side.get(&(other, rest.clone()))
                                    .into_iter()
                                    .flatten()
                                    .map(move |&r| Some((other, r)))
                            })
                            .collect()
                    };
                    if pairs.len() != instances {
                        return Err(Error::InvalidParameters(format!(
                            "side information mismatch at t={t}: {} vs {instances}",
                            pairs.len()
                        )));
                    }
                    for pair in pairs {
                        let pos = take(desired_msg, &mut fresh)?;
                        let mut members = vec![(desired_msg, pos)];
                        if let Some((other, r)) = pair {
                            members.extend(requests[other][r].iter().copied());
                        }
                        members.sort_unstable();
                        requests[db].push(members);
                        desired.push(DesiredSymbol {
                            position: pos,
                            db,
                            request: requests[db].len() - 1,
                            side_information: pair,
                        });
                    }
                } else {
                    for _ in 0..instances {
                        let members = subset
                            .iter()
                            .map(|&m| Ok((m, take(m, &mut fresh)?)))
                            .collect::<Result<Vec<_>>>()?;
                        requests[db].push(members);
                        side.entry((db, subset.clone()))
                            .or_default()
                            .push(requests[db].len() - 1);
                    }
                }
            }
        }
    }
    debug_assert_eq!(desired.len(), p);
    Ok(SunJafarPlan {
        subpacket_len: p,
        requests,
        desired,
    })
}

/// Plan with fresh uniform per-message permutations drawn from `src`.
pub fn sunjafar_plan(n: usize, k: usize, theta: usize, src: &mut dyn RandomSource) -> Result<SunJafarPlan> {
    let p = n.checked_pow(k as u32).ok_or_else(|| {
        Error::InvalidParameters(format!("subpacket N^K overflows for N={n}, K={k}"))
    })?;
    let perms: Vec<Vec<usize>> = (0..k).map(|_| src.permutation(p)).collect();
    sunjafar_plan_with(n, k, theta, &perms)
}

/// Deterministic capacity-achieving scheme with message symmetry.
#[derive(Clone, Debug)]
pub struct SunJafar {
    spec: FieldSpec,
    n: usize,
    k: usize,
    permute: bool,
}

impl SunJafar {
    pub fn new(spec: FieldSpec, n: usize, k: usize) -> Result<Self> {
        if n < 2 || k == 0 {
            return Err(Error::InvalidParameters(format!(
                "Sun-Jafar needs N >= 2, K >= 1 (got N={n}, K={k})"
            )));
        }
        if n.checked_pow(k as u32).is_none_or(|p| p > 1 << 20) {
            return Err(Error::InvalidParameters(format!(
                "subpacket N^K too large for N={n}, K={k}"
            )));
        }
        Ok(Self {
            spec,
            n,
            k,
            permute: true,
        })
    }

    /// The same scheme with every symbol permutation fixed to the identity.
    /// Used to reproduce the worked tables, whose subscripts are unpermuted.
    pub fn unpermuted(mut self) -> Self {
        self.permute = false;
        self
    }

    pub fn plan(&self, theta: usize, src: &mut dyn RandomSource) -> Result<SunJafarPlan> {
        if self.permute {
            sunjafar_plan(self.n, self.k, theta, src)
        } else {
            let p = self.subpacket_len();
            let id: Vec<Vec<usize>> = (0..self.k).map(|_| (0..p).collect()).collect();
            sunjafar_plan_with(self.n, self.k, theta, &id)
        }
    }
}

impl PirScheme for SunJafar {
    type Client = SunJafarPlan;

    fn name(&self) -> &'static str {
        "sunjafar"
    }
    fn spec(&self) -> FieldSpec {
        self.spec
    }
    fn databases(&self) -> usize {
        self.n
    }
    fn messages(&self) -> usize {
        self.k
    }
    fn subpacket_len(&self) -> usize {
        self.n.pow(self.k as u32)
    }

    fn queries(
        &self,
        theta: usize,
        src: &mut dyn RandomSource,
    ) -> Result<(Vec<Option<Query>>, SunJafarPlan)> {
        self.check_theta(theta)?;
        let plan = self.plan(theta, src)?;
        let queries = plan
            .requests
            .iter()
            .map(|reqs| {
                Some(Query::SymbolSums {
                    subpacket_len: plan.subpacket_len,
                    requests: reqs.clone(),
                })
            })
            .collect();
        Ok((queries, plan))
    }

    fn decode_subpacket(
        &self,
        _theta: usize,
        plan: &SunJafarPlan,
        chunks: &[Option<&[FieldElement]>],
    ) -> Result<Vec<FieldElement>> {
        let mut out = vec![self.spec.zero(); plan.subpacket_len];
        for d in &plan.desired {
            let mut v = chunk(chunks, d.db)?[d.request];
            if let Some((db, r)) = d.side_information {
                v -= chunk(chunks, db)?[r];
            }
            out[d.position] = v;
        }
        Ok(out)
    }

    fn relabeling_reduction(&self) -> Option<Self> {
        Some(self.clone().unpermuted())
    }
}

// ---------------------------------------------------------------------------
// Tian probabilistic scheme

/// The `N` index vectors for key `f` (length `K - 1`, entries in `0..N`).
///
/// Non-`theta` coordinates copy `f` in order; coordinate `theta` of the
/// query to database `n` is `(n - 1 - sum f) mod N`, so every query's
/// coordinates sum to `n - 1` modulo `N`.
pub fn tian_query(n: usize, k: usize, theta: usize, f: &[usize]) -> Result<Vec<Vec<usize>>> {
    if theta == 0 || theta > k {
        return Err(Error::InvalidParameters(format!("theta = {theta} outside 1..={k}")));
    }
    if f.len() != k - 1 || f.iter().any(|&x| x >= n) {
        return Err(Error::InvalidParameters(format!(
            "key {f:?} must have K-1 = {} entries in 0..{n}",
            k - 1
        )));
    }
    let sum: usize = f.iter().sum();
    Ok((0..n)
        .map(|db| {
            let mut q = Vec::with_capacity(k);
            let mut it = f.iter();
            for m in 0..k {
                if m == theta - 1 {
                    q.push((db + n * (sum / n + 1) - sum) % n);
                } else {
                    q.push(*it.next().expect("K-1 key entries"));
                }
            }
            q
        })
        .collect())
}

/// Probabilistic capacity-achieving scheme: `N - 1` real symbols per
/// subpacket behind a zero dummy at index 0.
#[derive(Clone, Debug)]
pub struct Tian {
    spec: FieldSpec,
    n: usize,
    k: usize,
    skip_zero_queries: bool,
}

impl Tian {
    pub fn new(spec: FieldSpec, n: usize, k: usize) -> Result<Self> {
        if n < 2 || k == 0 {
            return Err(Error::InvalidParameters(format!(
                "Tian scheme needs N >= 2, K >= 1 (got N={n}, K={k})"
            )));
        }
        Ok(Self {
            spec,
            n,
            k,
            skip_zero_queries: true,
        })
    }

    /// Contact every database, including one whose query is all zeros.
    pub fn without_skipping(mut self) -> Self {
        self.skip_zero_queries = false;
        self
    }

    pub fn queries_for_key(&self, theta: usize, f: &[usize]) -> Result<Vec<Option<Query>>> {
        Ok(tian_query(self.n, self.k, theta, f)?
            .into_iter()
            .map(|indices| {
                if self.skip_zero_queries && indices.iter().all(|&i| i == 0) {
                    None
                } else {
                    Some(Query::DummyIndexed {
                        subpacket_len: self.n - 1,
                        indices,
                    })
                }
            })
            .collect())
    }

    /// Exact expected rate averaged over all `N^(K-1)` keys.
    pub fn expected_rate(&self, theta: usize) -> Result<Rate> {
        expected_rate(self, theta, self.n - 1, crate::randomness::DEFAULT_ENUMERATION_CAP)
    }
}

/// Closed-form expected rate of [`Tian`]:
/// `(N-1) N^(K-1) / (N (N^(K-1) - 1) + (N - 1))`.
pub fn tian_expected_rate(n: u64, k: u64) -> Result<Rate> {
    if n < 2 || k == 0 {
        return Err(Error::InvalidParameters(format!(
            "need N >= 2, K >= 1 (got N={n}, K={k})"
        )));
    }
    let nb = BigInt::from(n);
    let pow = num_traits::pow(nb.clone(), (k - 1) as usize);
    let num = (nb.clone() - 1) * pow.clone();
    let den = nb.clone() * (pow - 1) + (nb - 1);
    Ok(Rate::new(num, den))
}

impl PirScheme for Tian {
    type Client = Vec<Vec<usize>>;

    fn name(&self) -> &'static str {
        "tian"
    }
    fn spec(&self) -> FieldSpec {
        self.spec
    }
    fn databases(&self) -> usize {
        self.n
    }
    fn messages(&self) -> usize {
        self.k
    }
    fn subpacket_len(&self) -> usize {
        self.n - 1
    }

    fn queries(
        &self,
        theta: usize,
        src: &mut dyn RandomSource,
    ) -> Result<(Vec<Option<Query>>, Vec<Vec<usize>>)> {
        self.check_theta(theta)?;
        let f: Vec<usize> = (1..self.k).map(|_| src.draw_below(self.n as u64) as usize).collect();
        let full = tian_query(self.n, self.k, theta, &f)?;
        Ok((self.queries_for_key(theta, &f)?, full))
    }

    fn decode_subpacket(
        &self,
        theta: usize,
        index_vectors: &Vec<Vec<usize>>,
        chunks: &[Option<&[FieldElement]>],
    ) -> Result<Vec<FieldElement>> {
        // answer of the database asked for index `j` of W_theta
        let answer_for = |j: usize| -> Result<FieldElement> {
            let db = index_vectors
                .iter()
                .position(|q| q[theta - 1] == j)
                .expect("every residue appears once");
            match chunks[db] {
                Some(c) => Ok(c[0]),
                None if index_vectors[db].iter().all(|&i| i == 0) => Ok(self.spec.zero()),
                None => Err(Error::DecodeFailure(format!("missing answer from database {}", db + 1))),
            }
        };
        let base = answer_for(0)?;
        (1..self.n).map(|j| Ok(answer_for(j)? - base)).collect()
    }
}

// ---------------------------------------------------------------------------
// Four-row probabilistic scheme for N = K = 2

/// Query rows for retrieving `W_1`; rows for `W_2` swap the two messages.
/// Each cell lists the 0-based messages summed by that database.
const LEAKY_ROWS: [[&[usize]; 2]; 4] = [
    [&[0], &[]],
    [&[], &[0]],
    [&[1], &[0, 1]],
    [&[0, 1], &[1]],
];

/// The probabilistic scheme with four equally likely query rows, for
/// `N = K = 2` only.
#[derive(Clone, Debug)]
pub struct LeakySymmetric {
    spec: FieldSpec,
}

impl LeakySymmetric {
    pub fn new(spec: FieldSpec, n: usize, k: usize) -> Result<Self> {
        if (n, k) != (2, 2) {
            return Err(Error::Unsupported {
                scheme: "leaky",
                reason: format!("only N = 2, K = 2 is defined (got N={n}, K={k})"),
            });
        }
        Ok(Self { spec })
    }

    /// Queries for a specific 1-based row of the table.
    pub fn queries_for_row(&self, theta: usize, row: usize) -> Result<Vec<Option<Query>>> {
        self.check_theta(theta)?;
        let cells = LEAKY_ROWS
            .get(row.wrapping_sub(1))
            .ok_or_else(|| Error::InvalidParameters(format!("row {row} outside 1..=4")))?;
        Ok(cells
            .iter()
            .map(|cell| {
                if cell.is_empty() {
                    None
                } else {
                    let mut messages: Vec<usize> = cell
                        .iter()
                        .map(|&m| if theta == 2 { 1 - m } else { m })
                        .collect();
                    messages.sort_unstable();
                    Some(Query::MessageSum { messages })
                }
            })
            .collect())
    }

    /// Exact expected rate over the four rows.
    pub fn expected_rate(&self, theta: usize) -> Result<Rate> {
        expected_rate(self, theta, 1, crate::randomness::DEFAULT_ENUMERATION_CAP)
    }
}

impl PirScheme for LeakySymmetric {
    type Client = usize;

    fn name(&self) -> &'static str {
        "leaky"
    }
    fn spec(&self) -> FieldSpec {
        self.spec
    }
    fn databases(&self) -> usize {
        2
    }
    fn messages(&self) -> usize {
        2
    }
    fn subpacket_len(&self) -> usize {
        1
    }

    fn queries(&self, theta: usize, src: &mut dyn RandomSource) -> Result<(Vec<Option<Query>>, usize)> {
        let row = src.draw_below(4) as usize + 1;
        Ok((self.queries_for_row(theta, row)?, row))
    }

    fn decode_subpacket(
        &self,
        _theta: usize,
        row: &usize,
        chunks: &[Option<&[FieldElement]>],
    ) -> Result<Vec<FieldElement>> {
        let a = |n| chunk(chunks, n).map(|c| c[0]);
        Ok(vec![match row {
            1 => a(0)?,
            2 => a(1)?,
            3 => a(1)? - a(0)?,
            4 => a(0)? - a(1)?,
            _ => return Err(Error::DecodeFailure(format!("unknown row {row}"))),
        }])
    }
}

/// Broken schemes for exercising the auditors.
pub mod fixtures {
    use super::*;

    /// Sends `e_theta` to database 1 in the clear.
    #[derive(Clone, Debug)]
    pub struct PlantedLeak {
        spec: FieldSpec,
        k: usize,
    }

    impl PlantedLeak {
        pub fn new(spec: FieldSpec, k: usize) -> Self {
            Self { spec, k }
        }
    }

    impl PirScheme for PlantedLeak {
        type Client = ();

        fn name(&self) -> &'static str {
            "fixture-leaky-theta"
        }
        fn spec(&self) -> FieldSpec {
            self.spec
        }
        fn databases(&self) -> usize {
            2
        }
        fn messages(&self) -> usize {
            self.k
        }
        fn subpacket_len(&self) -> usize {
            1
        }

        fn queries(&self, theta: usize, _src: &mut dyn RandomSource) -> Result<(Vec<Option<Query>>, ())> {
            self.check_theta(theta)?;
            let coeffs = self.spec.unit(self.k, theta - 1).to_vec();
            Ok((
                vec![
                    Some(Query::Linear {
                        subpacket_len: 1,
                        coeffs,
                    }),
                    None,
                ],
                (),
            ))
        }

        fn decode_subpacket(
            &self,
            _theta: usize,
            _client: &(),
            chunks: &[Option<&[FieldElement]>],
        ) -> Result<Vec<FieldElement>> {
            Ok(vec![chunk(chunks, 0)?[0]])
        }
    }
}
