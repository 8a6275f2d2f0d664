//! Injectable randomness.
//!
//! Protocols never call an RNG directly; they pull uniform draws from a
//! [`RandomSource`]. A [`SeededSource`] drives ordinary simulation runs. A
//! [`PathSource`] replays one branch of the protocol's randomness tree, and
//! [`enumerate_paths`] walks every branch so that audits can compute exact
//! distributions instead of sampled ones.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::Rate;

/// Default cap on the size of an enumerated randomness space.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

pub trait RandomSource {
    /// A uniform draw from `0..bound`. `bound` must be at least 1.
    fn draw_below(&mut self, bound: u64) -> u64;

    fn element(&mut self, spec: FieldSpec) -> FieldElement {
        spec.element(self.draw_below(spec.q()))
    }

    fn elements(&mut self, spec: FieldSpec, count: usize) -> Vec<FieldElement> {
        (0..count).map(|_| self.element(spec)).collect()
    }

    /// Uniform permutation of `0..len` (Fisher-Yates, one draw per step).
    fn permutation(&mut self, len: usize) -> Vec<usize> {
        let mut perm: Vec<usize> = (0..len).collect();
        for i in (1..len).rev() {
            let j = self.draw_below(i as u64 + 1) as usize;
            perm.swap(i, j);
        }
        perm
    }
}

impl<R: RandomSource + ?Sized> RandomSource for &mut R {
    fn draw_below(&mut self, bound: u64) -> u64 {
        (**self).draw_below(bound)
    }
}

/// Derives a 32-byte seed for the stream named `label` from a master seed.
///
/// Each component hashes its own label, so adding a component never shifts
/// the draws seen by another.
pub fn derive_seed(master: u64, label: &str) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"pirlab/stream/v1");
    h.update(master.to_le_bytes());
    h.update((label.len() as u64).to_le_bytes());
    h.update(label.as_bytes());
    h.finalize().into()
}

/// ChaCha20-backed source for simulation runs.
#[derive(Clone, Debug)]
pub struct SeededSource {
    rng: ChaCha20Rng,
}

impl SeededSource {
    pub fn new(master: u64, label: &str) -> Self {
        Self {
            rng: ChaCha20Rng::from_seed(derive_seed(master, label)),
        }
    }
}

impl RandomSource for SeededSource {
    fn draw_below(&mut self, bound: u64) -> u64 {
        assert!(bound >= 1, "draw bound must be positive");
        self.rng.random_range(0..bound)
    }
}

/// Replays fixed draws; panics when asked for more than it holds.
#[derive(Clone, Debug)]
pub struct ScriptedSource {
    draws: Vec<u64>,
    pos: usize,
}

impl ScriptedSource {
    pub fn new(draws: Vec<u64>) -> Self {
        Self { draws, pos: 0 }
    }
}

impl RandomSource for ScriptedSource {
    fn draw_below(&mut self, bound: u64) -> u64 {
        let v = *self
            .draws
            .get(self.pos)
            .expect("scripted source ran out of draws");
        assert!(v < bound, "scripted draw {v} out of range 0..{bound}");
        self.pos += 1;
        v
    }
}

/// One branch of a randomness tree, advanced like an odometer.
///
/// Radices are discovered on the fly, so the protocol may decide how many
/// draws to make, and with what bounds, based on earlier draws.
#[derive(Clone, Debug, Default)]
pub struct PathSource {
    digits: Vec<(u64, u64)>,
    pos: usize,
    locked: usize,
}

impl PathSource {
    pub fn new() -> Self {
        Self::default()
    }

    /// A source whose first draws are pinned to `prefix`; [`advance`]
    /// never changes them.
    ///
    /// [`advance`]: PathSource::advance
    pub fn with_prefix(prefix: &[(u64, u64)]) -> Self {
        Self {
            digits: prefix.to_vec(),
            pos: 0,
            locked: prefix.len(),
        }
    }

    /// Product of the radices drawn on the current branch, i.e. the inverse
    /// of the branch probability.
    pub fn weight_denominator(&self) -> u128 {
        self.digits[..self.pos]
            .iter()
            .fold(1u128, |acc, &(_, r)| acc.saturating_mul(r as u128))
    }

    pub fn digits(&self) -> &[(u64, u64)] {
        &self.digits[..self.pos]
    }

    /// Moves to the next branch. Returns `false` once every branch below the
    /// locked prefix has been visited.
    pub fn advance(&mut self) -> bool {
        self.digits.truncate(self.pos);
        self.pos = 0;
        while self.digits.len() > self.locked {
            let last = self.digits.last_mut().expect("non-empty");
            if last.0 + 1 < last.1 {
                last.0 += 1;
                return true;
            }
            self.digits.pop();
        }
        false
    }
}

impl RandomSource for PathSource {
    fn draw_below(&mut self, bound: u64) -> u64 {
        assert!(bound >= 1, "draw bound must be positive");
        let v = if self.pos < self.digits.len() {
            let (v, r) = self.digits[self.pos];
            assert_eq!(r, bound, "randomness tree is not deterministic");
            v
        } else {
            self.digits.push((0, bound));
            0
        };
        self.pos += 1;
        v
    }
}

/// Accumulates exact probability mass per outcome as `count / denominator`
/// buckets, deferring rational arithmetic to the end.
#[derive(Clone, Debug)]
struct MassTable<K> {
    mass: HashMap<K, BTreeMap<u128, u64>>,
    paths: u128,
}

impl<K: std::hash::Hash + Eq + Ord + Clone> MassTable<K> {
    fn new() -> Self {
        Self {
            mass: HashMap::new(),
            paths: 0,
        }
    }

    fn add(&mut self, key: K, denom: u128) {
        *self.mass.entry(key).or_default().entry(denom).or_default() += 1;
        self.paths += 1;
    }

    fn merge(mut self, other: Self) -> Self {
        for (k, buckets) in other.mass {
            let slot = self.mass.entry(k).or_default();
            for (d, c) in buckets {
                *slot.entry(d).or_default() += c;
            }
        }
        self.paths += other.paths;
        self
    }

    fn finish(self) -> BTreeMap<K, Rate> {
        self.mass
            .into_iter()
            .map(|(k, buckets)| {
                let p = buckets
                    .into_iter()
                    .map(|(d, c)| Rate::new(BigInt::from(c), BigInt::from(d)))
                    .sum();
                (k, p)
            })
            .collect()
    }
}

/// Exact output distribution of `f` over its entire randomness tree.
///
/// Work is split across rayon workers by the value of the first draw. The
/// walk aborts with [`Error::SpaceTooLarge`] once more than `cap` branches
/// would be visited.
pub fn enumerate_paths<K, F>(cap: u128, f: F) -> Result<BTreeMap<K, Rate>>
where
    K: std::hash::Hash + Eq + Ord + Clone + Send,
    F: Fn(&mut PathSource) -> Result<K> + Sync,
{
    // Discover the first radix and the size of the first branch.
    let mut probe = PathSource::new();
    let first = f(&mut probe)?;
    if probe.weight_denominator() > cap {
        return Err(Error::SpaceTooLarge {
            size: probe.weight_denominator(),
            cap,
        });
    }
    let Some(&(_, radix)) = probe.digits().first() else {
        // Deterministic procedure: a single branch with probability one.
        let mut out = BTreeMap::new();
        out.insert(first, Rate::from_integer(1.into()));
        return Ok(out);
    };

    let visited = AtomicU64::new(0);
    let table = (0..radix)
        .into_par_iter()
        .map(|v| -> Result<MassTable<K>> {
            let mut src = PathSource::with_prefix(&[(v, radix)]);
            let mut table = MassTable::new();
            loop {
                let key = f(&mut src)?;
                table.add(key, src.weight_denominator());
                let seen = visited.fetch_add(1, Ordering::Relaxed) as u128 + 1;
                if seen > cap {
                    return Err(Error::SpaceTooLarge { size: seen, cap });
                }
                if !src.advance() {
                    break;
                }
            }
            Ok(table)
        })
        .try_reduce(MassTable::new, |a, b| Ok(a.merge(b)))?;
    Ok(table.finish())
}
