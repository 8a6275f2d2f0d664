//! Permutation-based sparse read-write for private federated learning.
//!
//! A coordinator draws a secret permutation `P` of the `L` model positions
//! (known to clients only) and gives database `n` the noisy
//! permutation-reversing matrix `R_n = Pi + alpha_n X`, where
//! `Pi e_j = e_{P(j)}` and `X` is uniform noise shared by all databases.
//! The model is stored as `s_n = w + alpha_n z_1 + alpha_n^2 z_2`.
//!
//! * Write: the client sends `u_n = Delta + alpha_n zdot` together with the
//!   permuted positions. The database embeds the values at those positions
//!   and adds `R_n v` to its share; the constant term moves by the update
//!   placed at the real positions and the share stays of degree 2.
//! * Read: the database answers `<s_n, R_n e_j>` for each selected permuted
//!   position `j`, a degree-3 polynomial in `alpha_n` whose constant term is
//!   `w(P(j))`, so `N >= 4` answers suffice.
//!
//! With `B` segments the permutation and `X` are block diagonal, which
//! shrinks `R_n` to `sum_b |segment_b|^2` symbols but reveals how many
//! updates fall in each segment. A second, inter-segment permutation hides
//! which segment each count belongs to.
//!
//! Positions are 0-based in this module.

use std::collections::BTreeMap;
use std::ops::Range;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::field::{solve_linear, FieldElement};
use crate::pruw::EvaluationFrame;
use crate::randomness::RandomSource;
use crate::Rate;

/// Largest model size accepted by [`leakage_entropy`].
pub const LEAKAGE_MAX_L: usize = 24;

/// `B` segments of `floor(L/B)` positions; the last one takes the rest.
pub fn segment_bounds(l: usize, b: usize) -> Result<Vec<Range<usize>>> {
    if l == 0 || b == 0 || b > l {
        return Err(Error::InvalidParameters(format!("need 1 <= B <= L (got L={l}, B={b})")));
    }
    let size = l / b;
    Ok((0..b)
        .map(|i| {
            let end = if i + 1 == b { l } else { (i + 1) * size };
            i * size..end
        })
        .collect())
}

/// `true` when the segments are not all the same size.
pub fn is_ragged(l: usize, b: usize) -> bool {
    b > 0 && !l.is_multiple_of(b)
}

/// Symbols of `R_n` held by each database: `sum_b |segment_b|^2`.
pub fn storage_overhead(l: usize, b: usize) -> Result<u64> {
    Ok(segment_bounds(l, b)?
        .iter()
        .map(|r| (r.len() as u64).pow(2))
        .sum())
}

/// The coordinator's output. `perm[j]` is the real position stored at
/// permuted position `j`; it maps every segment onto itself.
#[derive(Clone, Debug)]
pub struct PermutationSetup {
    frame: EvaluationFrame,
    segments: Vec<Range<usize>>,
    perm: Vec<usize>,
    inter: Option<Vec<usize>>,
    x: Vec<Vec<FieldElement>>,
}

impl PermutationSetup {
    /// Setup from explicit parts. `x` entries outside the diagonal blocks
    /// are ignored.
    pub fn from_parts(
        frame: EvaluationFrame,
        segments: Vec<Range<usize>>,
        perm: Vec<usize>,
        x: Vec<Vec<FieldElement>>,
    ) -> Result<Self> {
        let l = perm.len();
        if frame.alphas().iter().any(FieldElement::is_zero) {
            return Err(Error::InvalidParameters("evaluation points must be nonzero".into()));
        }
        let mut seen = vec![false; l];
        for &p in &perm {
            if p >= l || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidParameters(format!("{perm:?} is not a permutation")));
            }
        }
        let covered: usize = segments.iter().map(Range::len).sum();
        if covered != l || segments.windows(2).any(|w| w[0].end != w[1].start) {
            return Err(Error::InvalidParameters("segments must partition the model".into()));
        }
        for seg in &segments {
            if seg.clone().any(|j| !seg.contains(&perm[j])) {
                return Err(Error::InvalidParameters("permutation crosses a segment boundary".into()));
            }
        }
        if x.len() != l || x.iter().any(|row| row.len() != l) {
            return Err(Error::InvalidParameters(format!("X must be {l} x {l}")));
        }
        let mut x = x;
        let zero = frame.spec().zero();
        for (i, row) in x.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                if segment_of(&segments, i) != segment_of(&segments, j) {
                    *v = zero;
                }
            }
        }
        Ok(Self {
            frame,
            segments,
            perm,
            inter: None,
            x,
        })
    }

    /// Model size.
    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn frame(&self) -> &EvaluationFrame {
        &self.frame
    }

    pub fn segments(&self) -> &[Range<usize>] {
        &self.segments
    }

    /// Real position stored at each permuted position.
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn inter_segment(&self) -> Option<&[usize]> {
        self.inter.as_deref()
    }

    /// Permuted position of real position `i`.
    pub fn permuted_position(&self, i: usize) -> usize {
        self.perm.iter().position(|&p| p == i).expect("permutation covers every position")
    }

    /// The permutation matrix: `pi[i][j] = 1` iff `perm[j] == i`.
    pub fn pi_matrix(&self) -> Vec<Vec<u8>> {
        let l = self.len();
        let mut pi = vec![vec![0u8; l]; l];
        for (j, &i) in self.perm.iter().enumerate() {
            pi[i][j] = 1;
        }
        pi
    }

    /// `R_n = Pi + alpha_n X` for 0-based database `n`.
    pub fn r_matrix(&self, n: usize) -> Vec<Vec<FieldElement>> {
        let alpha = self.frame.alphas()[n];
        let spec = self.frame.spec();
        let mut r: Vec<Vec<FieldElement>> = self
            .x
            .iter()
            .map(|row| row.iter().map(|&v| alpha * v).collect())
            .collect();
        for (j, &i) in self.perm.iter().enumerate() {
            r[i][j] += spec.one();
        }
        r
    }
}

fn segment_of(segments: &[Range<usize>], i: usize) -> usize {
    segments.iter().position(|s| s.contains(&i)).expect("segments cover the model")
}

/// Draws a uniform permutation inside each of `B` segments, the noise
/// matrix `X`, and, for `two_stage`, a uniform permutation of the segments.
pub fn coordinator_setup(
    l: usize,
    b: usize,
    two_stage: bool,
    frame: &EvaluationFrame,
    src: &mut dyn RandomSource,
) -> Result<PermutationSetup> {
    let segments = segment_bounds(l, b)?;
    let mut perm = Vec::with_capacity(l);
    for seg in &segments {
        perm.extend(src.permutation(seg.len()).into_iter().map(|i| seg.start + i));
    }
    let spec = frame.spec();
    let mut x = vec![vec![spec.zero(); l]; l];
    for seg in &segments {
        for row in &mut x[seg.clone()] {
            for v in &mut row[seg.clone()] {
                *v = src.element(spec);
            }
        }
    }
    let mut setup = PermutationSetup::from_parts(frame.clone(), segments, perm, x)?;
    if two_stage {
        setup.inter = Some(src.permutation(b));
    }
    Ok(setup)
}

/// Database shares `s_n = w + alpha_n z_1 + alpha_n^2 z_2`.
pub fn share_model(
    w: &[FieldElement],
    frame: &EvaluationFrame,
    src: &mut dyn RandomSource,
) -> Vec<Vec<FieldElement>> {
    let spec = frame.spec();
    let z1 = src.elements(spec, w.len());
    let z2 = src.elements(spec, w.len());
    frame
        .alphas()
        .iter()
        .map(|&a| {
            (0..w.len())
                .map(|i| w[i] + a * z1[i] + a * a * z2[i])
                .collect()
        })
        .collect()
}

/// A sparse write as sent to the databases: the permuted positions plus
/// one noisy value per position for each database.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseWrite {
    pub positions: Vec<usize>,
    /// `values[n][i]` belongs to `positions[i]` at database `n`.
    pub values: Vec<Vec<FieldElement>>,
}

impl SparseWrite {
    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Maps real update positions to permuted ones and masks the values with
/// `u_n = Delta + alpha_n zdot`, one fresh `zdot` per update.
pub fn client_write_sparse(
    setup: &PermutationSetup,
    updates: &[(usize, FieldElement)],
    src: &mut dyn RandomSource,
) -> Result<SparseWrite> {
    let l = setup.len();
    let mut seen = vec![false; l];
    for &(i, _) in updates {
        if i >= l {
            return Err(Error::IndexOutOfRange { index: i, size: l });
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::DuplicateIndex(i));
        }
    }
    let spec = setup.frame.spec();
    let zdot = src.elements(spec, updates.len());
    Ok(SparseWrite {
        positions: updates.iter().map(|&(i, _)| setup.permuted_position(i)).collect(),
        values: setup
            .frame
            .alphas()
            .iter()
            .map(|&a| updates.iter().zip(&zdot).map(|(&(_, d), &z)| d + a * z).collect())
            .collect(),
    })
}

/// Database `n` (0-based) embeds its values at the permuted positions and
/// adds `R_n v` to its share.
pub fn db_rearrange_and_apply(
    share: &mut [FieldElement],
    r_n: &[Vec<FieldElement>],
    positions: &[usize],
    values: &[FieldElement],
) -> Result<()> {
    let l = share.len();
    if positions.len() != values.len() {
        return Err(Error::LengthMismatch {
            expected: positions.len(),
            got: values.len(),
        });
    }
    if let Some(&p) = positions.iter().find(|&&p| p >= l) {
        return Err(Error::IndexOutOfRange { index: p, size: l });
    }
    for (i, s) in share.iter_mut().enumerate() {
        for (&j, &v) in positions.iter().zip(values) {
            *s += r_n[i][j] * v;
        }
    }
    Ok(())
}

/// Applies a client's write at every database.
pub fn apply_write(setup: &PermutationSetup, shares: &mut [Vec<FieldElement>], write: &SparseWrite) -> Result<()> {
    for (n, share) in shares.iter_mut().enumerate() {
        db_rearrange_and_apply(share, &setup.r_matrix(n), &write.positions, &write.values[n])?;
    }
    Ok(())
}

/// The `ceil(r' L)` most frequent permuted positions in the previous
/// round's writes, by descending count and then ascending position.
pub fn db_select_popular(history: &[Vec<usize>], l: usize, r_prime: &Rate) -> Result<Vec<usize>> {
    if history.is_empty() {
        return Err(Error::NoHistory);
    }
    if *r_prime <= Rate::zero() || *r_prime > Rate::from_integer(BigInt::from(1)) {
        return Err(Error::InvalidParameters(format!("r' = {r_prime} outside (0, 1]")));
    }
    let take = (r_prime * Rate::from_integer(BigInt::from(l)))
        .ceil()
        .to_integer()
        .to_usize()
        .expect("at most L");
    let mut counts = vec![0usize; l];
    for &j in history.iter().flatten() {
        if j >= l {
            return Err(Error::IndexOutOfRange { index: j, size: l });
        }
        counts[j] += 1;
    }
    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    order.truncate(take);
    Ok(order)
}

/// Database `n`'s answers `<s_n, R_n e_j>` for the selected positions.
pub fn db_answer(share: &[FieldElement], r_n: &[Vec<FieldElement>], selected: &[usize]) -> Vec<FieldElement> {
    selected
        .iter()
        .map(|&j| {
            share
                .iter()
                .zip(r_n)
                .fold(share[0].spec().zero(), |acc, (s, row)| acc + *s * row[j])
        })
        .collect()
}

/// Interpolates each answer polynomial at zero and maps the permuted
/// positions back to real ones.
pub fn client_read_sparse(
    setup: &PermutationSetup,
    selected: &[usize],
    answers: &[Vec<FieldElement>],
) -> Result<Vec<(usize, FieldElement)>> {
    let alphas = setup.frame.alphas();
    let n = alphas.len();
    if n < 4 {
        return Err(Error::InvalidParameters(format!("sparse reads need N >= 4 (got {n})")));
    }
    if answers.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: answers.len(),
        });
    }
    let spec = setup.frame.spec();
    let vandermonde: Vec<Vec<FieldElement>> = alphas
        .iter()
        .map(|&a| {
            let mut row = Vec::with_capacity(n);
            let mut pow = spec.one();
            for _ in 0..n {
                row.push(pow);
                pow = pow * a;
            }
            row
        })
        .collect();
    selected
        .iter()
        .enumerate()
        .map(|(i, &j)| {
            let b: Vec<FieldElement> = answers.iter().map(|a| a[i]).collect();
            let c = solve_linear(&vandermonde, &b)?;
            Ok((setup.perm[j], c[0]))
        })
        .collect()
}

/// Reads the selected permuted positions from every database.
pub fn read_sparse(
    setup: &PermutationSetup,
    shares: &[Vec<FieldElement>],
    selected: &[usize],
) -> Result<Vec<(usize, FieldElement)>> {
    if let Some(&j) = selected.iter().find(|&&j| j >= setup.len()) {
        return Err(Error::IndexOutOfRange { index: j, size: setup.len() });
    }
    let answers: Vec<Vec<FieldElement>> = shares
        .iter()
        .enumerate()
        .map(|(n, s)| db_answer(s, &setup.r_matrix(n), selected))
        .collect();
    client_read_sparse(setup, selected, &answers)
}

/// Per-segment update counts a database learns from a write. With the
/// inter-segment stage, the counts are listed in shuffled segment order.
pub fn segment_view(setup: &PermutationSetup, positions: &[usize]) -> Vec<usize> {
    let mut counts = vec![0usize; setup.segments.len()];
    for &j in positions {
        counts[segment_of(&setup.segments, j)] += 1;
    }
    match &setup.inter {
        Some(sigma) => sigma.iter().map(|&b| counts[b]).collect(),
        None => counts,
    }
}

/// Entropy in bits of the per-segment update counts seen by a database
/// when `s` of `L` positions are updated uniformly at random.
///
/// Single-stage leaks the count vector; two-stage leaks only the multiset
/// of counts. Every `C(L, s)` support is enumerated.
pub fn leakage_entropy(l: usize, b: usize, s: usize, two_stage: bool) -> Result<f64> {
    if l > LEAKAGE_MAX_L {
        return Err(Error::SpaceTooLarge {
            size: binomial(l as u64, s as u64),
            cap: binomial(LEAKAGE_MAX_L as u64, LEAKAGE_MAX_L as u64 / 2),
        });
    }
    if s > l {
        return Err(Error::InvalidParameters(format!("s = {s} exceeds L = {l}")));
    }
    let masks: Vec<u32> = segment_bounds(l, b)?
        .iter()
        .map(|r| r.clone().fold(0u32, |m, i| m | (1 << i)))
        .collect();
    let mut dist: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
    let mut total = 0u64;
    for support in Combinations::new(l as u32, s as u32) {
        let mut key: Vec<u32> = masks.iter().map(|m| (support & m).count_ones()).collect();
        if two_stage {
            key.sort_unstable();
        }
        *dist.entry(key).or_default() += 1;
        total += 1;
    }
    Ok(entropy_bits(dist.values().copied(), total))
}

/// `- sum p log2 p` for the distribution `count / total`.
pub fn entropy_bits(counts: impl IntoIterator<Item = u64>, total: u64) -> f64 {
    let t = total as f64;
    counts
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / t;
            -p * p.log2()
        })
        .sum::<f64>()
        .max(0.0)
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// All `s`-subsets of `0..l` as bit masks (Gosper's hack).
struct Combinations {
    next: Option<u32>,
    limit: u32,
}

impl Combinations {
    fn new(l: u32, s: u32) -> Self {
        let first = if s == 0 { 0 } else { (1u32 << s) - 1 };
        Self {
            next: Some(first),
            limit: 1u32 << l,
        }
    }
}

impl Iterator for Combinations {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        let cur = self.next?;
        if cur >= self.limit {
            self.next = None;
            return None;
        }
        self.next = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            Some((((r ^ cur) >> 2) / c) | r)
        };
        Some(cur)
    }
}

/// Storage cost and measured read/write symbol counts for one sparse
/// round, normalized by `L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseCost {
    pub storage_symbols: u64,
    pub read_cost: Rate,
    pub write_cost: Rate,
}

pub fn sparse_cost(setup: &PermutationSetup, selected: usize, updates: usize) -> Result<SparseCost> {
    let l = setup.len();
    let n = setup.frame.databases();
    Ok(SparseCost {
        storage_symbols: storage_overhead(l, setup.segments.len())?,
        read_cost: Rate::new(BigInt::from(n * selected), BigInt::from(l)),
        write_cost: Rate::new(BigInt::from(n * updates), BigInt::from(l)),
    })
}
