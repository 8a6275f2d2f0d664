//! Private read-update-write (PRUW) for federated submodel learning.
//!
//! `M` submodels of `L` parameters each are stored at `N >= 4` databases as
//! evaluations of a noise-embedded polynomial at the database's point
//! `alpha_n`:
//!
//! ```text
//! S_k^[n](l) = w_k(l) + (f - alpha_n) * sum_{i=0}^{N-3} alpha_n^i Z_{k,i}(l)
//! ```
//!
//! Reading submodel `theta` sends `Q_n = e_theta / (f - alpha_n) + Zbar`,
//! one `M`-vector reused for every position. Each answer
//! `A_n = sum_k S_k^[n] Q_n(k)` equals `w_theta / (f - alpha_n)` plus a
//! polynomial of degree `N - 2` in `alpha_n`, so the `N` answers determine
//! `w_theta`. Writing sends `U_n = Delta + (f - alpha_n) Zdot`; database `n`
//! adds `(f - alpha_n) U_n Q_n(k)` to every submodel `k`, which moves the
//! data term of submodel `theta` by `Delta` and only refreshes the noise
//! terms elsewhere.

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{solve_linear, FieldElement, FieldSpec};
use crate::randomness::RandomSource;
use crate::Rate;

/// Global constant `f` and the distinct evaluation points `alpha_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvaluationFrame {
    spec: FieldSpec,
    f: FieldElement,
    alphas: Vec<FieldElement>,
}

impl EvaluationFrame {
    pub fn new(spec: FieldSpec, f: u64, alphas: &[u64]) -> Result<Self> {
        let n = alphas.len();
        if n < 4 {
            return Err(Error::InvalidParameters(format!("PRUW needs N >= 4 databases (got {n})")));
        }
        if spec.q() < n as u64 + 1 {
            return Err(Error::InvalidParameters(format!(
                "F_{} is too small for N = {n}: need q >= N + 1",
                spec.q()
            )));
        }
        let f = spec.element(f);
        let alphas: Vec<FieldElement> = alphas.iter().map(|&a| spec.element(a)).collect();
        for (i, a) in alphas.iter().enumerate() {
            if *a == f {
                return Err(Error::InvalidParameters(format!("alpha_{} equals f", i + 1)));
            }
            if alphas[..i].contains(a) {
                return Err(Error::InvalidParameters(format!("alpha_{} repeats", i + 1)));
            }
        }
        Ok(Self { spec, f, alphas })
    }

    /// `f = 0`, `alpha_n = n`.
    pub fn standard(spec: FieldSpec, n: usize) -> Result<Self> {
        let alphas: Vec<u64> = (1..=n as u64).collect();
        Self::new(spec, 0, &alphas)
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn f(&self) -> FieldElement {
        self.f
    }

    pub fn alphas(&self) -> &[FieldElement] {
        &self.alphas
    }

    pub fn databases(&self) -> usize {
        self.alphas.len()
    }

    /// Number of storage noise terms per symbol, `N - 2`.
    pub fn noise_terms(&self) -> usize {
        self.databases() - 2
    }

    fn gap(&self, n: usize) -> FieldElement {
        self.f - self.alphas[n]
    }
}

/// Storage share at one point: `w + (f - alpha) * sum_i alpha^i z_i`.
pub fn share_value(f: FieldElement, alpha: FieldElement, w: FieldElement, noise: &[FieldElement]) -> FieldElement {
    let mut poly = w.spec().zero();
    let mut pow = w.spec().one();
    for z in noise {
        poly += pow * *z;
        pow = pow * alpha;
    }
    w + (f - alpha) * poly
}

/// One database's evaluation of one stored symbol.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShareRecord {
    /// 1-based submodel index.
    pub submodel: usize,
    /// 0-based position inside the submodel.
    pub position: usize,
    /// 1-based database index.
    pub database: usize,
    pub alpha: String,
    pub value: String,
}

/// The state of database `n`: its share table and the read query cached
/// for the current round.
#[derive(Clone, Debug)]
pub struct PruwDatabase {
    n: usize,
    alpha: FieldElement,
    f: FieldElement,
    shares: Vec<Vec<FieldElement>>,
    cached: Option<(u64, Vec<FieldElement>)>,
}

impl PruwDatabase {
    /// 1-based index.
    pub fn index(&self) -> usize {
        self.n
    }

    pub fn shares(&self) -> &[Vec<FieldElement>] {
        &self.shares
    }

    pub fn records(&self) -> Vec<ShareRecord> {
        let mut out = Vec::new();
        for (k, row) in self.shares.iter().enumerate() {
            for (l, v) in row.iter().enumerate() {
                out.push(ShareRecord {
                    submodel: k + 1,
                    position: l,
                    database: self.n,
                    alpha: self.alpha.value().to_string(),
                    value: v.value().to_string(),
                });
            }
        }
        out
    }

    /// Answers a read of `positions` and caches `query` for `round`.
    pub fn answer(&mut self, round: u64, query: &[FieldElement], positions: &[usize]) -> Result<Vec<FieldElement>> {
        if query.len() != self.shares.len() {
            return Err(Error::LengthMismatch {
                expected: self.shares.len(),
                got: query.len(),
            });
        }
        let l = self.shares[0].len();
        let spec = self.alpha.spec();
        let out = positions
            .iter()
            .map(|&p| {
                if p >= l {
                    return Err(Error::IndexOutOfRange { index: p, size: l });
                }
                Ok(self
                    .shares
                    .iter()
                    .zip(query)
                    .fold(spec.zero(), |acc, (row, q)| acc + row[p] * *q))
            })
            .collect::<Result<Vec<_>>>()?;
        self.cached = Some((round, query.to_vec()));
        Ok(out)
    }

    /// Applies `(position, U_n)` updates using the query cached for `round`.
    pub fn apply_update(&mut self, round: u64, updates: &[(usize, FieldElement)]) -> Result<()> {
        let query = match &self.cached {
            Some((r, q)) if *r == round => q.clone(),
            _ => return Err(Error::MissingReadQuery(round)),
        };
        let l = self.shares[0].len();
        let gap = self.f - self.alpha;
        for &(p, u) in updates {
            if p >= l {
                return Err(Error::IndexOutOfRange { index: p, size: l });
            }
            for (row, q) in self.shares.iter_mut().zip(&query) {
                row[p] += gap * u * *q;
            }
        }
        Ok(())
    }
}

/// Secret-shares `models` (`M x L`) onto the frame's databases with fresh
/// noise for every symbol.
pub fn pruw_init(
    models: &[Vec<FieldElement>],
    frame: &EvaluationFrame,
    src: &mut dyn RandomSource,
) -> Result<Vec<PruwDatabase>> {
    let spec = frame.spec();
    let m = models.len();
    if m == 0 || models[0].is_empty() {
        return Err(Error::InvalidParameters("need at least one submodel of length >= 1".into()));
    }
    let l = models[0].len();
    if models.iter().any(|row| row.len() != l) {
        return Err(Error::InvalidParameters("submodels differ in length".into()));
    }
    if models.iter().flatten().any(|w| w.spec() != spec) {
        return Err(Error::MismatchedField {
            left: spec.q(),
            right: models.iter().flatten().find(|w| w.spec() != spec).map_or(0, |w| w.modulus()),
        });
    }
    let noise: Vec<Vec<Vec<FieldElement>>> = models
        .iter()
        .map(|row| row.iter().map(|_| src.elements(spec, frame.noise_terms())).collect())
        .collect();
    Ok((0..frame.databases())
        .map(|n| PruwDatabase {
            n: n + 1,
            alpha: frame.alphas[n],
            f: frame.f,
            shares: models
                .iter()
                .zip(&noise)
                .map(|(row, zs)| {
                    row.iter()
                        .zip(zs)
                        .map(|(w, z)| share_value(frame.f, frame.alphas[n], *w, z))
                        .collect()
                })
                .collect(),
            cached: None,
        })
        .collect())
}

/// Recovers the data term from one symbol's `N` shares, checking that they
/// still have the storage form.
pub fn share_constant(frame: &EvaluationFrame, shares: &[FieldElement]) -> Result<FieldElement> {
    let n = frame.databases();
    if shares.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: shares.len(),
        });
    }
    let row = |i: usize| -> Vec<FieldElement> {
        let alpha = frame.alphas[i];
        let mut r = vec![frame.spec.one()];
        let mut pow = frame.gap(i);
        for _ in 0..frame.noise_terms() {
            r.push(pow);
            pow = pow * alpha;
        }
        r
    };
    let a: Vec<Vec<FieldElement>> = (0..n - 1).map(row).collect();
    let x = solve_linear(&a, &shares[..n - 1])?;
    let last = row(n - 1)
        .iter()
        .zip(&x)
        .fold(frame.spec.zero(), |acc, (c, v)| acc + *c * *v);
    if last != shares[n - 1] {
        return Err(Error::DecodeFailure("shares do not have the storage form".into()));
    }
    Ok(x[0])
}

/// Per-database read queries plus the shared noise vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReadQuery {
    pub theta: usize,
    pub zbar: Vec<FieldElement>,
    pub per_db: Vec<Vec<FieldElement>>,
}

/// `e_theta / (f - alpha) + zbar` for one database.
pub fn query_for_point(
    f: FieldElement,
    alpha: FieldElement,
    theta: usize,
    zbar: &[FieldElement],
) -> Result<Vec<FieldElement>> {
    if theta == 0 || theta > zbar.len() {
        return Err(Error::InvalidParameters(format!("theta = {theta} outside 1..={}", zbar.len())));
    }
    let inv = (f - alpha).inv()?;
    let mut q = zbar.to_vec();
    q[theta - 1] += inv;
    Ok(q)
}

pub fn read_query(frame: &EvaluationFrame, m: usize, theta: usize, src: &mut dyn RandomSource) -> Result<ReadQuery> {
    let zbar = src.elements(frame.spec, m);
    read_query_with(frame, theta, zbar)
}

pub fn read_query_with(frame: &EvaluationFrame, theta: usize, zbar: Vec<FieldElement>) -> Result<ReadQuery> {
    let per_db = frame
        .alphas
        .iter()
        .map(|&a| query_for_point(frame.f, a, theta, &zbar))
        .collect::<Result<Vec<_>>>()?;
    Ok(ReadQuery { theta, zbar, per_db })
}

/// Solves the `N x N` system with rows `[1/(f - alpha_n), 1, alpha_n, ...,
/// alpha_n^(N-2)]` for each position and returns the data terms.
pub fn decode_read(frame: &EvaluationFrame, answers: &[Vec<FieldElement>]) -> Result<Vec<FieldElement>> {
    let n = frame.databases();
    if answers.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: answers.len(),
        });
    }
    let a = frame
        .alphas
        .iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let mut row = vec![frame.gap(i).inv()?];
            let mut pow = frame.spec.one();
            for _ in 0..n - 1 {
                row.push(pow);
                pow = pow * alpha;
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let len = answers[0].len();
    (0..len)
        .map(|p| {
            let b: Vec<FieldElement> = answers.iter().map(|a| a[p]).collect();
            let x = solve_linear(&a, &b).expect("frame points are distinct and differ from f");
            Ok(x[0])
        })
        .collect()
}

/// Per-database update values `U_n = Delta + (f - alpha_n) Zdot`, one
/// fresh `Zdot` per position shared across databases.
pub fn write_updates(
    frame: &EvaluationFrame,
    delta: &[(usize, FieldElement)],
    src: &mut dyn RandomSource,
) -> Vec<Vec<(usize, FieldElement)>> {
    let zdot: Vec<FieldElement> = delta.iter().map(|_| src.element(frame.spec)).collect();
    (0..frame.databases())
        .map(|n| {
            delta
                .iter()
                .zip(&zdot)
                .map(|(&(p, d), &z)| (p, d + frame.gap(n) * z))
                .collect()
        })
        .collect()
}

/// Symbol counts and normalized costs of one read-update-write round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PruwRound {
    pub decoded: Vec<FieldElement>,
    pub positions: Vec<usize>,
    pub downloaded_symbols: usize,
    pub uploaded_update_symbols: usize,
    pub uploaded_query_symbols: usize,
    /// Downloaded symbols per submodel symbol.
    pub reading_cost: Rate,
    /// Uploaded update symbols per submodel symbol.
    pub writing_cost: Rate,
}

/// Client and databases of one PRUW deployment.
#[derive(Clone, Debug)]
pub struct PruwSystem {
    frame: EvaluationFrame,
    dbs: Vec<PruwDatabase>,
    m: usize,
    l: usize,
    round: u64,
}

impl PruwSystem {
    pub fn new(models: &[Vec<FieldElement>], frame: EvaluationFrame, src: &mut dyn RandomSource) -> Result<Self> {
        let dbs = pruw_init(models, &frame, src)?;
        Ok(Self {
            m: models.len(),
            l: models[0].len(),
            frame,
            dbs,
            round: 0,
        })
    }

    pub fn frame(&self) -> &EvaluationFrame {
        &self.frame
    }

    pub fn databases(&self) -> &[PruwDatabase] {
        &self.dbs
    }

    /// Plaintext recovered by interpolating every stored symbol; fails if
    /// any symbol lost the storage form.
    pub fn reconstruct(&self) -> Result<Vec<Vec<FieldElement>>> {
        (0..self.m)
            .map(|k| {
                (0..self.l)
                    .map(|p| {
                        let shares: Vec<FieldElement> = self.dbs.iter().map(|d| d.shares[k][p]).collect();
                        share_constant(&self.frame, &shares)
                    })
                    .collect()
            })
            .collect()
    }

    /// Reads submodel `theta` at `positions`, then writes `delta` (one value
    /// per position) back to them. Pass `delta = None` for a read-only round.
    pub fn round(
        &mut self,
        theta: usize,
        positions: &[usize],
        delta: Option<&[FieldElement]>,
        src: &mut dyn RandomSource,
    ) -> Result<PruwRound> {
        if theta == 0 || theta > self.m {
            return Err(Error::InvalidParameters(format!("theta = {theta} outside 1..={}", self.m)));
        }
        self.round += 1;
        let round = self.round;
        let query = read_query(&self.frame, self.m, theta, src)?;
        let answers = self
            .dbs
            .par_iter_mut()
            .zip(query.per_db.par_iter())
            .map(|(db, q)| db.answer(round, q, positions))
            .collect::<Result<Vec<_>>>()?;
        let decoded = decode_read(&self.frame, &answers)?;
        let downloaded: usize = answers.iter().map(Vec::len).sum();

        let mut uploaded_updates = 0;
        if let Some(delta) = delta {
            if delta.len() != positions.len() {
                return Err(Error::LengthMismatch {
                    expected: positions.len(),
                    got: delta.len(),
                });
            }
            let pairs: Vec<(usize, FieldElement)> = positions.iter().copied().zip(delta.iter().copied()).collect();
            let updates = write_updates(&self.frame, &pairs, src);
            uploaded_updates = updates.iter().map(Vec::len).sum();
            self.dbs
                .par_iter_mut()
                .zip(updates.par_iter())
                .try_for_each(|(db, u)| db.apply_update(round, u))?;
        }
        let l = BigInt::from(self.l);
        Ok(PruwRound {
            decoded,
            positions: positions.to_vec(),
            downloaded_symbols: downloaded,
            uploaded_update_symbols: uploaded_updates,
            uploaded_query_symbols: query.per_db.iter().map(Vec::len).sum(),
            reading_cost: Rate::new(BigInt::from(downloaded), l.clone()),
            writing_cost: Rate::new(BigInt::from(uploaded_updates), l),
        })
    }

    /// Applies an update at database level without a read in the current
    /// round; always rejected.
    pub fn write_without_read(&mut self, updates: &[(usize, FieldElement)]) -> Result<()> {
        let next = self.round + 1;
        self.dbs[0].apply_update(next, updates)
    }

    /// Share tables as exportable records, ordered by database, submodel,
    /// position.
    pub fn export(&self) -> Vec<ShareRecord> {
        self.dbs.iter().flat_map(PruwDatabase::records).collect()
    }
}

/// Positions kept under read/write distortion `d`: a uniformly random
/// subset of size `L - floor(d L)`, in ascending order.
pub fn sparsified_positions(l: usize, d: &Rate, src: &mut dyn RandomSource) -> Result<Vec<usize>> {
    use num_traits::{One, ToPrimitive, Zero};
    if *d < Rate::zero() || *d > Rate::one() {
        return Err(Error::InvalidParameters(format!("distortion {d} outside [0, 1]")));
    }
    let skip = (d * Rate::from_integer(BigInt::from(l))).floor().to_integer().to_usize().unwrap_or(l);
    let perm = src.permutation(l);
    let mut keep: Vec<usize> = perm[skip..].to_vec();
    keep.sort_unstable();
    Ok(keep)
}

/// Verification report for init, read, write, read.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundtripReport {
    pub first_read_ok: bool,
    pub second_read_ok: bool,
    pub untouched_ok: bool,
    pub reading_cost: Rate,
    pub writing_cost: Rate,
}

impl RoundtripReport {
    pub fn passed(&self) -> bool {
        self.first_read_ok && self.second_read_ok && self.untouched_ok
    }
}

/// Shares `models`, reads and updates submodel `theta` by `delta` at every
/// position, reads it again and compares everything with the plaintext.
pub fn pruw_roundtrip(
    frame: &EvaluationFrame,
    models: &[Vec<FieldElement>],
    theta: usize,
    delta: &[FieldElement],
    src: &mut dyn RandomSource,
) -> Result<RoundtripReport> {
    let mut sys = PruwSystem::new(models, frame.clone(), src)?;
    let all: Vec<usize> = (0..sys.l).collect();
    let first = sys.round(theta, &all, Some(delta), src)?;
    let mut shadow = models.to_vec();
    for (w, d) in shadow[theta - 1].iter_mut().zip(delta) {
        *w += *d;
    }
    let second = sys.round(theta, &all, None, src)?;
    let plain = sys.reconstruct()?;
    Ok(RoundtripReport {
        first_read_ok: first.decoded == models[theta - 1],
        second_read_ok: second.decoded == shadow[theta - 1],
        untouched_ok: plain == shadow,
        reading_cost: first.reading_cost,
        writing_cost: first.writing_cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randomness::{ScriptedSource, SeededSource};

    fn f(q: u64) -> FieldSpec {
        FieldSpec::new(q).unwrap()
    }

    #[test]
    fn frame_validation() {
        let spec = f(7);
        assert!(EvaluationFrame::new(spec, 0, &[1, 2, 3, 4]).is_ok());
        assert!(EvaluationFrame::new(spec, 0, &[1, 2, 3]).is_err());
        assert!(EvaluationFrame::new(spec, 1, &[1, 2, 3, 4]).is_err());
        assert!(EvaluationFrame::new(spec, 0, &[1, 2, 2, 4]).is_err());
        assert!(EvaluationFrame::standard(f(5), 4).is_ok());
        assert!(EvaluationFrame::standard(f(3), 4).is_err());
    }

    #[test]
    fn zero_model_zero_noise_gives_zero_shares() {
        let spec = f(11);
        let frame = EvaluationFrame::standard(spec, 4).unwrap();
        let models = vec![vec![spec.zero(); 3]; 2];
        let dbs = pruw_init(&models, &frame, &mut ScriptedSource::new(vec![0; 12])).unwrap();
        assert!(dbs.iter().all(|d| d.shares().iter().flatten().all(|v| v.is_zero())));
    }

    #[test]
    fn four_database_share_shape() {
        // w + (f - alpha)(Z + alpha Y)
        let spec = f(97);
        let frame = EvaluationFrame::new(spec, 3, &[5, 6, 7, 8]).unwrap();
        let (w, z, y) = (spec.element(40), spec.element(17), spec.element(88));
        let models = vec![vec![w]];
        let dbs = pruw_init(&models, &frame, &mut ScriptedSource::new(vec![17, 88])).unwrap();
        for (db, a) in dbs.iter().zip([5u64, 6, 7, 8]) {
            let alpha = spec.element(a);
            let expect = w + (spec.element(3) - alpha) * (z + alpha * y);
            assert_eq!(db.shares()[0][0], expect);
        }
        let shares: Vec<_> = dbs.iter().map(|d| d.shares()[0][0]).collect();
        assert_eq!(share_constant(&frame, &shares).unwrap(), w);
    }

    #[test]
    fn noiseless_read_answers_are_scaled_data() {
        let spec = f(13);
        let frame = EvaluationFrame::standard(spec, 4).unwrap();
        let models = vec![vec![spec.element(3)], vec![spec.element(9)], vec![spec.element(5)]];
        let mut dbs = pruw_init(&models, &frame, &mut ScriptedSource::new(vec![0; 6])).unwrap();
        let q = read_query_with(&frame, 2, spec.zeros(3).to_vec()).unwrap();
        let answers: Vec<Vec<FieldElement>> = dbs
            .iter_mut()
            .zip(&q.per_db)
            .map(|(d, q)| d.answer(1, q, &[0]).unwrap())
            .collect();
        for (n, a) in answers.iter().enumerate() {
            let alpha = frame.alphas()[n];
            assert_eq!(a[0], spec.element(9).try_div(frame.f() - alpha).unwrap());
        }
        assert_eq!(decode_read(&frame, &answers).unwrap(), vec![spec.element(9)]);
    }

    #[test]
    fn answer_has_expected_shape() {
        // A_n - w_theta/(f - alpha_n) is a polynomial of degree N - 2 in alpha_n
        let spec = f(101);
        let frame = EvaluationFrame::new(spec, 0, &[3, 9, 27, 81]).unwrap();
        let mut src = SeededSource::new(3, "shape");
        let models: Vec<Vec<FieldElement>> = (0..3).map(|_| src.elements(spec, 1)).collect();
        let mut sys = PruwSystem::new(&models, frame.clone(), &mut src).unwrap();
        let q = read_query(&frame, 3, 2, &mut src).unwrap();
        let residual: Vec<FieldElement> = sys
            .dbs
            .iter_mut()
            .zip(&q.per_db)
            .enumerate()
            .map(|(n, (d, q))| {
                d.answer(1, q, &[0]).unwrap()[0] - models[1][0].try_div(frame.gap(n)).unwrap()
            })
            .collect();
        // fit V_0 + V_1 a + V_2 a^2 on three points, check the fourth
        let a: Vec<Vec<FieldElement>> = (0..3)
            .map(|n| {
                let x = frame.alphas()[n];
                vec![spec.one(), x, x * x]
            })
            .collect();
        let v = solve_linear(&a, &residual[..3]).unwrap();
        let x = frame.alphas()[3];
        assert_eq!(v[0] + v[1] * x + v[2] * x * x, residual[3]);
    }

    #[test]
    fn update_terms_for_desired_and_other_submodels() {
        let spec = f(97);
        let frame = EvaluationFrame::standard(spec, 4).unwrap();
        let zero = vec![vec![spec.zero(); 1]; 3];
        let mut sys = PruwSystem::new(&zero, frame.clone(), &mut ScriptedSource::new(vec![0; 6])).unwrap();
        let delta = spec.element(12);
        sys.round(2, &[0], Some(&[delta]), &mut SeededSource::new(1, "upd")).unwrap();
        let plain = sys.reconstruct().unwrap();
        assert_eq!(plain[1][0], delta);
        assert!(plain[0][0].is_zero() && plain[2][0].is_zero());

        // Delta = 0, Zdot = 0 and Zbar = 0 leave the shares untouched
        let before = sys.databases()[0].shares().to_vec();
        sys.round(1, &[0], Some(&[spec.zero()]), &mut ScriptedSource::new(vec![0; 4])).unwrap();
        assert_eq!(sys.databases()[0].shares(), &before[..]);
    }

    #[test]
    fn write_requires_read_in_same_round() {
        let spec = f(11);
        let frame = EvaluationFrame::standard(spec, 4).unwrap();
        let mut sys = PruwSystem::new(&[vec![spec.one()]], frame, &mut SeededSource::new(0, "w")).unwrap();
        assert!(matches!(
            sys.write_without_read(&[(0, spec.one())]),
            Err(Error::MissingReadQuery(1))
        ));
    }

    #[test]
    fn roundtrips() {
        let spec = f(97);
        let mut src = SeededSource::new(8, "rt");
        for n in [4, 5, 6] {
            let frame = EvaluationFrame::standard(spec, n).unwrap();
            let models: Vec<Vec<FieldElement>> = (0..3).map(|_| src.elements(spec, 8)).collect();
            let delta = src.elements(spec, 8);
            let report = pruw_roundtrip(&frame, &models, 2, &delta, &mut src).unwrap();
            assert!(report.passed(), "{report:?}");
            assert_eq!(report.reading_cost, Rate::from_integer(BigInt::from(n)));
            assert_eq!(report.writing_cost, Rate::from_integer(BigInt::from(n)));
        }
    }

    #[test]
    fn sequential_writes_accumulate() {
        let spec = f(101);
        let mut src = SeededSource::new(21, "seq");
        let frame = EvaluationFrame::standard(spec, 5).unwrap();
        let models: Vec<Vec<FieldElement>> = (0..3).map(|_| src.elements(spec, 4)).collect();
        let mut sys = PruwSystem::new(&models, frame, &mut src).unwrap();
        let mut shadow = models.clone();
        let all = [0, 1, 2, 3];
        for theta in [1, 3, 1] {
            let d = src.elements(spec, 4);
            let r = sys.round(theta, &all, Some(&d), &mut src).unwrap();
            assert_eq!(r.decoded, shadow[theta - 1]);
            for (w, x) in shadow[theta - 1].iter_mut().zip(&d) {
                *w += *x;
            }
        }
        assert_eq!(sys.reconstruct().unwrap(), shadow);
    }

    #[test]
    fn distortion_scales_costs() {
        let spec = f(97);
        let frame = EvaluationFrame::standard(spec, 4).unwrap();
        let mut src = SeededSource::new(2, "rd");
        let models: Vec<Vec<FieldElement>> = (0..3).map(|_| src.elements(spec, 8)).collect();
        for (num, den, kept) in [(0, 1, 8), (1, 4, 6), (1, 2, 4)] {
            let d = Rate::new(BigInt::from(num), BigInt::from(den));
            let pos = sparsified_positions(8, &d, &mut src).unwrap();
            assert_eq!(pos.len(), kept);
            let mut sys = PruwSystem::new(&models, frame.clone(), &mut src).unwrap();
            let delta = src.elements(spec, pos.len());
            let r = sys.round(1, &pos, Some(&delta), &mut src).unwrap();
            let expect = (Rate::from_integer(1.into()) - d) * Rate::from_integer(4.into());
            assert_eq!(r.reading_cost, expect);
            assert_eq!(r.writing_cost, expect);
        }
    }

    #[test]
    fn export_uses_decimal_strings() {
        let spec = f(11);
        let frame = EvaluationFrame::standard(spec, 4).unwrap();
        let sys = PruwSystem::new(&[vec![spec.one(), spec.zero()]], frame, &mut SeededSource::new(0, "x")).unwrap();
        let rec = sys.export();
        assert_eq!(rec.len(), 8);
        let json = serde_json::to_value(&rec[0]).unwrap();
        assert!(json["value"].is_string());
        assert_eq!(json["database"], 1);
    }
}
