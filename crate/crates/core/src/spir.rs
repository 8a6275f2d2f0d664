//! Symmetric PIR: PIR answers masked by server-side common randomness.
//!
//! Every contacted database adds the same pool symbol `S` to its answer for
//! a subpacket. The decoders only ever subtract two answers of the same
//! subpacket, so `S` cancels for the user while hiding everything else.
//!
//! * [`deterministic`] wraps the residual scheme; rate `1 - 1/N`.
//! * [`probabilistic`] wraps the Tian scheme and contacts every database,
//!   including the one whose query is all zeros: its answer is `S` alone,
//!   which is what cancels `S` from the other answer.

use std::sync::Arc;

use num_bigint::BigInt;

use crate::databank::{empirical_rate, CostReport, MessageStore, Query, SchemeTranscript};
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::pir::{execute_round, PirScheme, Residual, RoundOutcome, Tian};
use crate::randomness::RandomSource;
use crate::Rate;

/// Server-side common randomness shared by all databases and hidden from
/// the user. Symbols are handed out once and never reused.
#[derive(Clone, Debug)]
pub struct CommonRandomnessPool {
    symbols: Arc<[FieldElement]>,
    cursor: usize,
}

impl CommonRandomnessPool {
    pub fn from_symbols(symbols: Vec<FieldElement>) -> Self {
        Self {
            symbols: symbols.into(),
            cursor: 0,
        }
    }

    pub fn random(spec: FieldSpec, len: usize, src: &mut dyn RandomSource) -> Self {
        Self::from_symbols(src.elements(spec, len))
    }

    pub fn remaining(&self) -> usize {
        self.symbols.len() - self.cursor
    }

    pub fn consumed(&self) -> usize {
        self.cursor
    }

    /// Reserves `count` fresh symbols and returns the offset of the first.
    pub fn reserve(&mut self, count: usize) -> Result<usize> {
        if count > self.remaining() {
            return Err(Error::PoolExhausted {
                needed: count,
                remaining: self.remaining(),
            });
        }
        let offset = self.cursor;
        self.cursor += count;
        Ok(offset)
    }

    /// Read handle given to the databases.
    pub fn handle(&self) -> Arc<[FieldElement]> {
        self.symbols.clone()
    }
}

/// Residual-scheme queries with a pool symbol added to every answer.
pub fn deterministic(spec: FieldSpec, n: usize, k: usize) -> Result<Residual> {
    Residual::new(spec, n, k)
}

/// Tian queries with a pool symbol added to every answer. No database is
/// skipped.
pub fn probabilistic(spec: FieldSpec, n: usize, k: usize) -> Result<Tian> {
    Ok(Tian::new(spec, n, k)?.without_skipping())
}

/// Outcome of one SPIR retrieval.
#[derive(Clone, Debug)]
pub struct SpirOutcome {
    pub round: RoundOutcome,
    pub cost: CostReport,
    /// Offset of the first pool symbol used by this round.
    pub pool_offset: usize,
}

/// One SPIR retrieval: reserves one pool symbol per subpacket and runs the
/// wrapped scheme with every answer padded.
pub fn spir_round<S: PirScheme>(
    scheme: &S,
    store: &MessageStore,
    theta: usize,
    pool: &mut CommonRandomnessPool,
    src: &mut dyn RandomSource,
) -> Result<SpirOutcome> {
    if scheme.databases() < 2 {
        return Err(Error::InvalidParameters("SPIR needs N >= 2".into()));
    }
    let subpackets = store.message_len() / scheme.subpacket_len();
    let offset = pool.reserve(subpackets)?;
    let round = execute_round(scheme, store, theta, src, Some((pool.handle(), offset)))?;
    let mut cost = empirical_rate(&round.transcript)?;
    cost.capacity = Some(crate::capacity::c_spir(scheme.databases() as u64)?);
    cost.pool_symbols_per_symbol = Some(Rate::new(
        BigInt::from(subpackets),
        BigInt::from(store.message_len()),
    ));
    Ok(SpirOutcome {
        round,
        cost,
        pool_offset: offset,
    })
}

/// Everything the user observes in one round: its own queries and the
/// answers, in database order. `None` marks a database that was not
/// contacted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UserView {
    pub queries: Vec<Option<Vec<Query>>>,
    pub answers: Vec<Option<Vec<FieldElement>>>,
}

impl UserView {
    /// Byte key identifying the view, for posterior tables.
    pub fn key(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for (q, a) in self.queries.iter().zip(&self.answers) {
            match q {
                None => out.push(0),
                Some(qs) => {
                    out.push(1);
                    for q in qs {
                        out.extend(q.canonical_bytes());
                    }
                }
            }
            match a {
                None => out.push(0),
                Some(a) => {
                    out.push(1);
                    for x in a {
                        out.extend_from_slice(&x.value().to_le_bytes());
                    }
                }
            }
        }
        out
    }
}

/// The user's view of a completed round.
pub fn spir_user_view(t: &SchemeTranscript) -> UserView {
    UserView {
        queries: t
            .per_db
            .iter()
            .map(|r| (!r.queries.is_empty()).then(|| r.queries.clone()))
            .collect(),
        answers: t.user_answers(),
    }
}
