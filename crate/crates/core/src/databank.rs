//! Replicated databases, the query/answer wire vocabulary, and transcript
//! accounting.
//!
//! A [`DatabaseState`] only ever computes answers from its own store and the
//! request in hand. Isolation between databases is structural: states share
//! no mutable data, and the only shared read-only input is the server-side
//! common randomness pool used by symmetric schemes.

use std::sync::Arc;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::randomness::RandomSource;
use crate::{rate_string, Rate};

/// `K` messages of `L` symbols each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MessageStore {
    spec: FieldSpec,
    messages: Vec<Vec<FieldElement>>,
}

impl MessageStore {
    pub fn new(spec: FieldSpec, messages: Vec<Vec<FieldElement>>) -> Result<Self> {
        let Some(first) = messages.first() else {
            return Err(Error::InvalidParameters("a store needs K >= 1 messages".into()));
        };
        let l = first.len();
        if l == 0 {
            return Err(Error::InvalidParameters("messages need L >= 1 symbols".into()));
        }
        for m in &messages {
            if m.len() != l {
                return Err(Error::LengthMismatch {
                    expected: l,
                    got: m.len(),
                });
            }
            if let Some(bad) = m.iter().find(|e| e.modulus() != spec.q()) {
                return Err(Error::MismatchedField {
                    left: spec.q(),
                    right: bad.modulus(),
                });
            }
        }
        Ok(Self { spec, messages })
    }

    pub fn from_values(spec: FieldSpec, values: &[Vec<u64>]) -> Result<Self> {
        Self::new(
            spec,
            values
                .iter()
                .map(|m| m.iter().map(|&v| spec.element(v)).collect())
                .collect(),
        )
    }

    pub fn random(spec: FieldSpec, k: usize, l: usize, src: &mut dyn RandomSource) -> Result<Self> {
        Self::new(spec, (0..k).map(|_| src.elements(spec, l)).collect())
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    /// `K`.
    pub fn message_count(&self) -> usize {
        self.messages.len()
    }

    /// `L`.
    pub fn message_len(&self) -> usize {
        self.messages[0].len()
    }

    /// Message `W_theta`, 1-indexed.
    pub fn message(&self, theta: usize) -> &[FieldElement] {
        &self.messages[theta - 1]
    }

    pub fn messages(&self) -> &[Vec<FieldElement>] {
        &self.messages
    }

    pub fn message_mut(&mut self, theta: usize) -> &mut [FieldElement] {
        &mut self.messages[theta - 1]
    }
}

/// A scheme-tagged query. Message and symbol indices are 0-based on the wire.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Query {
    /// Inner product with each subpacket; `coeffs` is message-major of
    /// length `K * subpacket_len`. One answer symbol per subpacket.
    Linear {
        subpacket_len: usize,
        coeffs: Vec<FieldElement>,
    },
    /// One answer symbol per request per subpacket; a request lists the
    /// `(message, symbol)` pairs to be summed.
    SymbolSums {
        subpacket_len: usize,
        requests: Vec<Vec<(usize, usize)>>,
    },
    /// One index per message into a subpacket padded with a leading zero
    /// symbol: index 0 is the dummy, index `i >= 1` is symbol `i - 1`.
    DummyIndexed {
        subpacket_len: usize,
        indices: Vec<usize>,
    },
    /// Symbol-wise sum of whole messages.
    MessageSum { messages: Vec<usize> },
}

impl Query {
    pub fn scheme_tag(&self) -> u8 {
        match self {
            Query::Linear { .. } => 1,
            Query::SymbolSums { .. } => 2,
            Query::DummyIndexed { .. } => 3,
            Query::MessageSum { .. } => 4,
        }
    }

    /// Symbols the user uploads to send this query.
    pub fn upload_symbols(&self) -> usize {
        match self {
            Query::Linear { coeffs, .. } => coeffs.len(),
            Query::SymbolSums { requests, .. } => requests.iter().map(Vec::len).sum(),
            Query::DummyIndexed { indices, .. } => indices.len(),
            Query::MessageSum { messages } => messages.len(),
        }
    }

    pub fn subpacket_len(&self) -> usize {
        match self {
            Query::Linear { subpacket_len, .. }
            | Query::SymbolSums { subpacket_len, .. }
            | Query::DummyIndexed { subpacket_len, .. } => *subpacket_len,
            Query::MessageSum { .. } => 1,
        }
    }

    pub fn answers_per_subpacket(&self) -> usize {
        match self {
            Query::SymbolSums { requests, .. } => requests.len(),
            _ => 1,
        }
    }

    /// Symbols in the answer to this query against messages of length `l`.
    pub fn answer_len(&self, l: usize) -> usize {
        (l / self.subpacket_len()) * self.answers_per_subpacket()
    }

    /// Canonical byte encoding, used as the support key of query
    /// distributions. Layout: tag byte, then little-endian `u64` fields:
    /// the subpacket length (absent for `MessageSum`), an item count, and
    /// the items. `SymbolSums` items are a member count followed by
    /// `(message, symbol)` pairs.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = vec![self.scheme_tag()];
        let mut put = |v: u64| out.extend_from_slice(&v.to_le_bytes());
        match self {
            Query::Linear {
                subpacket_len,
                coeffs,
            } => {
                put(*subpacket_len as u64);
                put(coeffs.len() as u64);
                coeffs.iter().for_each(|c| put(c.value()));
            }
            Query::SymbolSums {
                subpacket_len,
                requests,
            } => {
                put(*subpacket_len as u64);
                put(requests.len() as u64);
                for r in requests {
                    put(r.len() as u64);
                    for &(m, s) in r {
                        put(m as u64);
                        put(s as u64);
                    }
                }
            }
            Query::DummyIndexed {
                subpacket_len,
                indices,
            } => {
                put(*subpacket_len as u64);
                put(indices.len() as u64);
                indices.iter().for_each(|&i| put(i as u64));
            }
            Query::MessageSum { messages } => {
                put(messages.len() as u64);
                messages.iter().for_each(|&m| put(m as u64));
            }
        }
        out
    }
}

/// A query plus, for symmetric schemes, the offset of the first
/// common-randomness symbol the database must add (one per subpacket).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ServeRequest {
    pub query: Query,
    pub pad_offset: Option<usize>,
}

impl ServeRequest {
    pub fn plain(query: Query) -> Self {
        Self {
            query,
            pad_offset: None,
        }
    }

    pub fn padded(query: Query, offset: usize) -> Self {
        Self {
            query,
            pad_offset: Some(offset),
        }
    }
}

/// One simulated database.
#[derive(Clone, Debug)]
pub struct DatabaseState {
    index: usize,
    store: MessageStore,
    log: Vec<ServeRequest>,
    pool: Option<Arc<[FieldElement]>>,
}

impl DatabaseState {
    pub fn new(index: usize, store: MessageStore) -> Self {
        Self {
            index,
            store,
            log: Vec::new(),
            pool: None,
        }
    }

    /// 1-based database index `n`.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn store(&self) -> &MessageStore {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut MessageStore {
        &mut self.store
    }

    pub fn log(&self) -> &[ServeRequest] {
        &self.log
    }

    pub fn attach_pool(&mut self, pool: Arc<[FieldElement]>) {
        self.pool = Some(pool);
    }

    /// Computes the answer to `request` from this database's own state and
    /// appends the request to the log.
    pub fn serve(&mut self, request: &ServeRequest) -> Result<Vec<FieldElement>> {
        let answer = self.answer(request)?;
        self.log.push(request.clone());
        Ok(answer)
    }

    fn answer(&self, request: &ServeRequest) -> Result<Vec<FieldElement>> {
        let spec = self.store.spec();
        let k = self.store.message_count();
        let l = self.store.message_len();
        let query = &request.query;
        let p = query.subpacket_len();
        if p == 0 || !l.is_multiple_of(p) {
            return Err(Error::MalformedQuery(format!(
                "subpacket length {p} does not divide message length {l}"
            )));
        }
        let subpackets = l / p;
        let w = self.store.messages();

        let mut out = Vec::with_capacity(subpackets * query.answers_per_subpacket());
        match query {
            Query::Linear { coeffs, .. } => {
                if coeffs.len() != k * p {
                    return Err(Error::MalformedQuery(format!(
                        "linear query has {} coefficients, expected {}",
                        coeffs.len(),
                        k * p
                    )));
                }
                for s in 0..subpackets {
                    let mut acc = spec.zero();
                    for (m, msg) in w.iter().enumerate() {
                        for j in 0..p {
                            acc = acc.try_add(coeffs[m * p + j].try_mul(msg[s * p + j])?)?;
                        }
                    }
                    out.push(acc);
                }
            }
            Query::SymbolSums { requests, .. } => {
                for r in requests {
                    for &(m, j) in r {
                        if m >= k || j >= p {
                            return Err(Error::MalformedQuery(format!(
                                "symbol ({m}, {j}) outside {k} messages x {p} symbols"
                            )));
                        }
                    }
                }
                for s in 0..subpackets {
                    for r in requests {
                        let sum = r
                            .iter()
                            .fold(spec.zero(), |acc, &(m, j)| acc + w[m][s * p + j]);
                        out.push(sum);
                    }
                }
            }
            Query::DummyIndexed { indices, .. } => {
                if indices.len() != k || indices.iter().any(|&i| i > p) {
                    return Err(Error::MalformedQuery(format!(
                        "index query {indices:?} invalid for K={k}, subpacket {p}"
                    )));
                }
                for s in 0..subpackets {
                    let sum = indices
                        .iter()
                        .enumerate()
                        .filter(|(_, &i)| i > 0)
                        .fold(spec.zero(), |acc, (m, &i)| acc + w[m][s * p + i - 1]);
                    out.push(sum);
                }
            }
            Query::MessageSum { messages } => {
                if messages.iter().any(|&m| m >= k) {
                    return Err(Error::MalformedQuery(format!(
                        "message sum {messages:?} outside K={k}"
                    )));
                }
                for pos in 0..l {
                    out.push(messages.iter().fold(spec.zero(), |acc, &m| acc + w[m][pos]));
                }
            }
        }

        if let Some(offset) = request.pad_offset {
            if query.answers_per_subpacket() != 1 || matches!(query, Query::MessageSum { .. }) {
                return Err(Error::MalformedQuery(
                    "common randomness needs one answer symbol per subpacket".into(),
                ));
            }
            let pool = self
                .pool
                .as_ref()
                .ok_or_else(|| Error::MalformedQuery("no common randomness attached".into()))?;
            if offset + out.len() > pool.len() {
                return Err(Error::PoolExhausted {
                    needed: offset + out.len(),
                    remaining: pool.len(),
                });
            }
            for (a, s) in out.iter_mut().zip(&pool[offset..]) {
                *a += *s;
            }
        }
        Ok(out)
    }
}

/// `N` independent replicas of `store`, indexed `1..=N`.
pub fn replicate(store: &MessageStore, n: usize) -> Vec<DatabaseState> {
    (1..=n).map(|i| DatabaseState::new(i, store.clone())).collect()
}

/// Serves one round. `requests[i]` goes to database `i + 1`; `None` means
/// the database is not contacted. The databases are served in parallel.
pub fn serve_round(
    dbs: &mut [DatabaseState],
    requests: &[Option<ServeRequest>],
) -> Result<Vec<Option<Vec<FieldElement>>>> {
    if dbs.len() != requests.len() {
        return Err(Error::LengthMismatch {
            expected: dbs.len(),
            got: requests.len(),
        });
    }
    dbs.par_iter_mut()
        .zip(requests.par_iter())
        .map(|(db, req)| req.as_ref().map(|r| db.serve(r)).transpose())
        .collect()
}

/// What one database saw and sent during a run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DbRecord {
    pub n: usize,
    pub queries: Vec<Query>,
    pub answers: Vec<Vec<FieldElement>>,
}

impl DbRecord {
    pub fn uploaded_symbols(&self) -> usize {
        self.queries.iter().map(Query::upload_symbols).sum()
    }

    pub fn downloaded_symbols(&self) -> usize {
        self.answers.iter().map(Vec::len).sum()
    }
}

/// Full record of one protocol run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemeTranscript {
    pub scheme: String,
    pub spec: FieldSpec,
    pub k: usize,
    pub l: usize,
    pub theta: usize,
    pub per_db: Vec<DbRecord>,
}

impl SchemeTranscript {
    pub fn new(scheme: &str, spec: FieldSpec, n: usize, k: usize, l: usize, theta: usize) -> Self {
        Self {
            scheme: scheme.to_string(),
            spec,
            k,
            l,
            theta,
            per_db: (1..=n)
                .map(|n| DbRecord {
                    n,
                    queries: Vec::new(),
                    answers: Vec::new(),
                })
                .collect(),
        }
    }

    /// Appends a served round to the per-database records.
    pub fn record(
        &mut self,
        requests: &[Option<ServeRequest>],
        answers: &[Option<Vec<FieldElement>>],
    ) {
        for ((rec, req), ans) in self.per_db.iter_mut().zip(requests).zip(answers) {
            if let (Some(req), Some(ans)) = (req, ans) {
                rec.queries.push(req.query.clone());
                rec.answers.push(ans.clone());
            }
        }
    }

    pub fn databases(&self) -> usize {
        self.per_db.len()
    }

    pub fn downloaded_symbols(&self) -> usize {
        self.per_db.iter().map(DbRecord::downloaded_symbols).sum()
    }

    pub fn uploaded_symbols(&self) -> usize {
        self.per_db.iter().map(DbRecord::uploaded_symbols).sum()
    }

    pub fn downloaded_bits(&self) -> u64 {
        self.downloaded_symbols() as u64 * self.spec.symbol_bits() as u64
    }

    pub fn uploaded_bits(&self) -> u64 {
        self.uploaded_symbols() as u64 * self.spec.symbol_bits() as u64
    }

    /// Answers in database order; `None` for databases that were skipped.
    pub fn user_answers(&self) -> Vec<Option<Vec<FieldElement>>> {
        self.per_db
            .iter()
            .map(|r| {
                if r.answers.is_empty() {
                    None
                } else {
                    Some(r.answers.concat())
                }
            })
            .collect()
    }

    pub fn to_record(&self, rate: &Rate) -> TranscriptRecord {
        TranscriptRecord {
            scheme: self.scheme.clone(),
            n: self.databases(),
            k: self.k,
            l: self.l,
            q: self.spec.q().to_string(),
            theta: self.theta,
            per_db: self
                .per_db
                .iter()
                .map(|r| PerDbCounts {
                    n: r.n,
                    uploaded_symbols: r.uploaded_symbols(),
                    downloaded_symbols: r.downloaded_symbols(),
                })
                .collect(),
            rate: rate_string(rate),
        }
    }
}

/// Persisted transcript summary.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub scheme: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub q: String,
    pub theta: usize,
    pub per_db: Vec<PerDbCounts>,
    pub rate: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerDbCounts {
    pub n: usize,
    pub uploaded_symbols: usize,
    pub downloaded_symbols: usize,
}

/// Exact-rational costs of a run next to the closed-form reference.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CostReport {
    pub rate: Option<Rate>,
    pub capacity: Option<Rate>,
    pub reading_cost: Option<Rate>,
    pub writing_cost: Option<Rate>,
    /// Common-randomness symbols consumed per desired message symbol.
    pub pool_symbols_per_symbol: Option<Rate>,
}

impl CostReport {
    pub fn rate_matches_capacity(&self) -> bool {
        matches!((&self.rate, &self.capacity), (Some(r), Some(c)) if r == c)
    }
}

/// `L / (downloaded symbols)` as an exact rational.
pub fn empirical_rate(t: &SchemeTranscript) -> Result<CostReport> {
    let down = t.downloaded_symbols();
    if down == 0 {
        return Err(Error::EmptyTranscript);
    }
    Ok(CostReport {
        rate: Some(Rate::new(BigInt::from(t.l), BigInt::from(down))),
        ..CostReport::default()
    })
}
