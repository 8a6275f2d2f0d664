#![doc = include_str!("../docs/walkthroughs.md")]

use std::fmt::Debug;

use num_traits::Zero;
use serde::Serialize;

use crate::capacity::{c_pir, c_spir};
use crate::databank::{MessageStore, Query};
use crate::error::Result;
use crate::field::{solve_linear, FieldElement, FieldSpec};
use crate::pir::{
    run_round, sunjafar_plan_with, tian_query, Cgks, LeakySymmetric, PirScheme, Residual, RoundOutcome, SunJafar, Tian,
};
use crate::pruw::{pruw_init, query_for_point, share_value, write_updates, EvaluationFrame, PruwSystem};
use crate::randomness::{RandomSource, ScriptedSource, SeededSource};
use crate::sparsify::{
    client_write_sparse, db_rearrange_and_apply, read_sparse, share_model, PermutationSetup,
};
use crate::spir::{self, spir_round, CommonRandomnessPool};
use crate::{rate_string, Rate};

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    /// Printed in the worked example itself.
    Worked,
    /// Follows directly from the construction.
    Trivial,
    /// Computed independently of the code under test.
    Derived,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub label: String,
    pub origin: Origin,
    pub expected: String,
    pub actual: String,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.expected == self.actual
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Walkthrough {
    pub id: &'static str,
    /// Short description of the worked example being replayed.
    pub anchor: &'static str,
    pub checks: Vec<Check>,
}

impl Walkthrough {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(Check::passed)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub walkthroughs: Vec<Walkthrough>,
}

impl Summary {
    pub fn passed(&self) -> bool {
        self.walkthroughs.iter().all(Walkthrough::passed)
    }

    pub fn failures(&self) -> Vec<(&'static str, &Check)> {
        self.walkthroughs
            .iter()
            .flat_map(|w| w.checks.iter().filter(|c| !c.passed()).map(move |c| (w.id, c)))
            .collect()
    }
}

#[derive(Default)]
struct Book {
    checks: Vec<Check>,
}

impl Book {
    fn check<T: Debug + PartialEq>(&mut self, label: &str, origin: Origin, expected: T, actual: T) {
        self.checks.push(Check {
            label: label.to_string(),
            origin,
            expected: format!("{expected:?}"),
            actual: format!("{actual:?}"),
        });
    }

    fn rate(&mut self, label: &str, origin: Origin, expected: Rate, actual: Rate) {
        self.check(label, origin, rate_string(&expected), rate_string(&actual));
    }
}

type Script = fn(&mut Book) -> Result<()>;

const SCRIPTS: &[(&str, &str, Script)] = &[
    ("cgks", "two databases, three single-symbol messages", cgks),
    ("residual", "three databases, two messages of two symbols", residual),
    ("sunjafar-2x2", "side-information table for two databases and two messages", sunjafar_2x2),
    ("sunjafar-2x3", "two databases, three messages, rate 4/7", sunjafar_2x3),
    ("leaky", "four equally likely query rows", leaky),
    ("tian-2x2", "two-row probabilistic table", tian_2x2),
    ("tian-3x3", "all nine keys for three databases and three messages", tian_3x3),
    ("spir-deterministic", "two databases, three messages, common randomness S", spir_deterministic),
    ("spir-probabilistic", "two-row probabilistic table with S", spir_probabilistic),
    ("pruw", "four databases, three submodels, submodel 2", pruw),
    ("sparse-permutation", "five parameters under the permutation (2,1,4,5,3)", sparse_permutation),
];

/// Replays every walkthrough. A script that errors is recorded as a failed
/// check.
pub fn run_walkthroughs() -> Summary {
    let walkthroughs = SCRIPTS
        .iter()
        .map(|&(id, anchor, script)| {
            let mut book = Book::default();
            if let Err(e) = script(&mut book) {
                book.check("script completes", Origin::Trivial, "ok".to_string(), e.to_string());
            }
            Walkthrough {
                id,
                anchor,
                checks: book.checks,
            }
        })
        .collect();
    Summary { walkthroughs }
}

fn f(q: u64) -> FieldSpec {
    FieldSpec::new(q).expect("prime")
}

fn rate_of(out: &RoundOutcome) -> Result<Rate> {
    let desired = out.decoded.len();
    let downloaded: usize = out.transcript.per_db.iter().map(|d| d.downloaded_symbols()).sum();
    Ok(Rate::new(desired.into(), downloaded.into()))
}

fn answers(out: &RoundOutcome) -> Vec<Vec<FieldElement>> {
    out.transcript
        .user_answers()
        .into_iter()
        .map(Option::unwrap_or_default)
        .collect()
}

fn cgks(b: &mut Book) -> Result<()> {
    let spec = f(7);
    let store = MessageStore::from_values(spec, &[vec![3], vec![5], vec![6]])?;
    let s = Cgks::new(spec, 2, 3)?;
    let out = run_round(&s, &store, 2, &mut ScriptedSource::new(vec![1, 2, 3]))?;
    let a = answers(&out);
    b.check("A_1 = h.W", Origin::Derived, spec.element(3 + 10 + 18), a[0][0]);
    b.check("W_2 = A_2 - A_1", Origin::Worked, spec.element(5), a[1][0] - a[0][0]);
    b.rate("rate", Origin::Worked, Rate::new(1.into(), 2.into()), rate_of(&out)?);
    Ok(())
}

fn residual(b: &mut Book) -> Result<()> {
    let spec = f(11);
    let store = MessageStore::from_values(spec, &[vec![4, 7], vec![2, 9]])?;
    let s = Residual::new(spec, 3, 2)?;
    let h = spec.vector(&[5, 6, 2, 3]).to_vec();
    let queries = s.queries_from_noise(1, &h)?;
    let coeffs = |q: &Option<Query>| match q {
        Some(Query::Linear { coeffs, .. }) => coeffs.iter().map(FieldElement::value).collect(),
        _ => Vec::new(),
    };
    b.check("Q_1", Origin::Worked, vec![5, 6, 2, 3], coeffs(&queries[0]));
    b.check("Q_2 adds 1 to h_11", Origin::Worked, vec![6, 6, 2, 3], coeffs(&queries[1]));
    b.check("Q_3 adds 1 to h_12", Origin::Worked, vec![5, 7, 2, 3], coeffs(&queries[2]));
    let out = run_round(&s, &store, 1, &mut ScriptedSource::new(vec![5, 6, 2, 3]))?;
    let a = answers(&out);
    b.check("W_11 = A_2 - A_1", Origin::Worked, spec.element(4), a[1][0] - a[0][0]);
    b.check("W_12 = A_3 - A_1", Origin::Worked, spec.element(7), a[2][0] - a[0][0]);
    b.rate("rate", Origin::Worked, Rate::new(2.into(), 3.into()), rate_of(&out)?);
    Ok(())
}

fn sunjafar_2x2(b: &mut Book) -> Result<()> {
    let identity = [vec![0, 1, 2, 3], vec![0, 1, 2, 3]];
    // a_i = (0, i - 1), b_i = (1, i - 1)
    let plan = sunjafar_plan_with(2, 2, 1, &identity)?;
    b.check("W_1, DB 1", Origin::Worked, vec![vec![(0, 0)], vec![(1, 0)], vec![(0, 2), (1, 1)]], plan.requests[0].clone());
    b.check("W_1, DB 2", Origin::Worked, vec![vec![(0, 1)], vec![(1, 1)], vec![(0, 3), (1, 0)]], plan.requests[1].clone());
    let plan = sunjafar_plan_with(2, 2, 2, &identity)?;
    b.check("W_2, DB 1", Origin::Worked, vec![vec![(0, 0)], vec![(1, 0)], vec![(0, 1), (1, 2)]], plan.requests[0].clone());
    b.check("W_2, DB 2", Origin::Worked, vec![vec![(0, 1)], vec![(1, 1)], vec![(0, 0), (1, 3)]], plan.requests[1].clone());

    let spec = f(7);
    let s = SunJafar::new(spec, 2, 2)?.unpermuted();
    let store = MessageStore::from_values(spec, &[vec![1, 2, 3, 4], vec![5, 6, 0, 1]])?;
    let out = run_round(&s, &store, 1, &mut ScriptedSource::new(vec![]))?;
    let a = answers(&out);
    b.check("a_3 = (a_3 + b_2) - b_2", Origin::Trivial, spec.element(3), a[0][2] - a[1][1]);
    b.check("decoded", Origin::Trivial, store.message(1).to_vec(), out.decoded.clone());
    b.rate("rate", Origin::Worked, Rate::new(2.into(), 3.into()), rate_of(&out)?);
    Ok(())
}

fn sunjafar_2x3(b: &mut Book) -> Result<()> {
    let spec = f(5);
    let s = SunJafar::new(spec, 2, 3)?;
    b.check("subpacket N^K", Origin::Worked, 8, s.subpacket_len());
    let mut src = SeededSource::new(7, "docsbook/sunjafar");
    let store = MessageStore::random(spec, 3, 8, &mut src)?;
    for theta in 1..=3 {
        let out = run_round(&s, &store, theta, &mut src)?;
        b.check("decoded", Origin::Trivial, store.message(theta).to_vec(), out.decoded.clone());
        b.rate("rate", Origin::Worked, Rate::new(4.into(), 7.into()), rate_of(&out)?);
    }
    b.rate("capacity", Origin::Worked, Rate::new(4.into(), 7.into()), c_pir(2, 3)?);
    Ok(())
}

fn sums(q: &Option<Query>) -> Vec<usize> {
    match q {
        Some(Query::MessageSum { messages }) => messages.iter().map(|m| m + 1).collect(),
        _ => Vec::new(),
    }
}

fn leaky(b: &mut Book) -> Result<()> {
    let s = LeakySymmetric::new(f(3), 2, 2)?;
    // rows as message lists per database; empty is no query
    let w1: [[Vec<usize>; 2]; 4] = [
        [vec![1], vec![]],
        [vec![], vec![1]],
        [vec![2], vec![1, 2]],
        [vec![1, 2], vec![2]],
    ];
    let w2: [[Vec<usize>; 2]; 4] = [
        [vec![2], vec![]],
        [vec![], vec![2]],
        [vec![1], vec![1, 2]],
        [vec![1, 2], vec![1]],
    ];
    for (theta, rows) in [(1, &w1), (2, &w2)] {
        for (row, expect) in rows.iter().enumerate() {
            let q = s.queries_for_row(theta, row + 1)?;
            b.check(&format!("theta {theta} row {}", row + 1), Origin::Worked, expect.to_vec(), vec![sums(&q[0]), sums(&q[1])]);
        }
        b.rate("expected rate", Origin::Worked, Rate::new(2.into(), 3.into()), s.expected_rate(theta)?);
    }
    Ok(())
}

fn indices(q: &Option<Query>) -> Option<Vec<usize>> {
    match q {
        Some(Query::DummyIndexed { indices, .. }) => Some(indices.clone()),
        _ => None,
    }
}

fn tian_2x2(b: &mut Book) -> Result<()> {
    let s = Tian::new(f(3), 2, 2)?;
    for theta in 1..=2usize {
        let other = 3 - theta;
        let zero = s.queries_for_key(theta, &[0])?;
        b.check("key 0, DB 1 skipped", Origin::Worked, None, indices(&zero[0]));
        let mut only = vec![0, 0];
        only[theta - 1] = 1;
        b.check("key 0, DB 2 gets W_theta", Origin::Worked, Some(only), indices(&zero[1]));
        let one = s.queries_for_key(theta, &[1])?;
        b.check("key 1, DB 1 gets W_1 + W_2", Origin::Worked, Some(vec![1, 1]), indices(&one[0]));
        let mut rest = vec![0, 0];
        rest[other - 1] = 1;
        b.check("key 1, DB 2 gets the other message", Origin::Worked, Some(rest), indices(&one[1]));
        b.rate("expected rate", Origin::Derived, Rate::new(2.into(), 3.into()), s.expected_rate(theta)?);
    }
    Ok(())
}

fn digits(s: &str) -> Vec<usize> {
    s.bytes().map(|c| (c - b'0') as usize).collect()
}

// key, then the query of DB 1, 2, 3
const TIAN_W2: [[&str; 4]; 9] = [
    ["00", "000", "010", "020"],
    ["10", "120", "100", "110"],
    ["20", "210", "220", "200"],
    ["01", "021", "001", "011"],
    ["11", "111", "121", "101"],
    ["21", "201", "211", "221"],
    ["02", "012", "022", "002"],
    ["12", "102", "112", "122"],
    ["22", "222", "202", "212"],
];

const TIAN_W1: [[&str; 4]; 9] = [
    ["00", "000", "100", "200"],
    ["10", "210", "010", "110"],
    ["20", "120", "220", "020"],
    ["01", "201", "001", "101"],
    ["11", "111", "211", "011"],
    ["21", "021", "121", "221"],
    ["02", "102", "202", "002"],
    ["12", "012", "112", "212"],
    ["22", "222", "022", "122"],
];

fn tian_3x3(b: &mut Book) -> Result<()> {
    for (theta, table) in [(2, &TIAN_W2), (1, &TIAN_W1)] {
        for row in table {
            let got = tian_query(3, 3, theta, &digits(row[0]))?;
            let want: Vec<Vec<usize>> = row[1..].iter().map(|s| digits(s)).collect();
            b.check(&format!("theta {theta} key {}", row[0]), Origin::Worked, want, got);
        }
    }
    let spec = f(11);
    // (a_1, a_2), (b_1, b_2), (c_1, c_2)
    let store = MessageStore::from_values(spec, &[vec![1, 2], vec![3, 4], vec![5, 6]])?;
    let s = Tian::new(spec, 3, 3)?;
    let out = run_round(&s, &store, 2, &mut ScriptedSource::new(vec![0, 2]))?;
    let a = answers(&out);
    b.check("A_1 = b_1 + c_2", Origin::Worked, spec.element(3 + 6), a[0][0]);
    b.check("b_1 = A_1 - A_3", Origin::Worked, spec.element(3), a[0][0] - a[2][0]);
    b.check("b_2 = A_2 - A_3", Origin::Worked, spec.element(4), a[1][0] - a[2][0]);
    let skipped = run_round(&s, &store, 2, &mut ScriptedSource::new(vec![0, 0]))?;
    b.check("key 00 contacts two databases", Origin::Worked, 2, skipped.transcript.user_answers().iter().flatten().count());
    b.rate("expected rate", Origin::Worked, Rate::new(9.into(), 13.into()), s.expected_rate(2)?);
    b.rate("capacity", Origin::Worked, Rate::new(9.into(), 13.into()), c_pir(3, 3)?);
    Ok(())
}

fn spir_deterministic(b: &mut Book) -> Result<()> {
    let spec = f(7);
    let store = MessageStore::from_values(spec, &[vec![3], vec![5], vec![6]])?;
    let s = spir::deterministic(spec, 2, 3)?;
    let mut pool = CommonRandomnessPool::from_symbols(vec![spec.element(4)]);
    let out = spir_round(&s, &store, 2, &mut pool, &mut ScriptedSource::new(vec![1, 2, 3]))?;
    let a = answers(&out.round);
    b.check("A_1 = h.W + S", Origin::Derived, spec.element(3 + 10 + 18 + 4), a[0][0]);
    b.check("A_2 = h.W + W_2 + S", Origin::Derived, spec.element(3 + 10 + 18 + 5 + 4), a[1][0]);
    b.check("W_2 = A_2 - A_1", Origin::Worked, spec.element(5), a[1][0] - a[0][0]);
    b.rate("rate", Origin::Worked, Rate::new(1.into(), 2.into()), out.cost.rate.clone().unwrap_or_else(Rate::zero));
    b.rate("capacity", Origin::Worked, Rate::new(1.into(), 2.into()), c_spir(2)?);
    Ok(())
}

fn spir_probabilistic(b: &mut Book) -> Result<()> {
    let spec = f(7);
    let (w1, w2, s_val) = (2, 3, 5);
    let store = MessageStore::from_values(spec, &[vec![w1], vec![w2]])?;
    let s = spir::probabilistic(spec, 2, 2)?;
    // (theta, key, DB 1 answer, DB 2 answer)
    let rows = [
        (1, 0, s_val, w1 + s_val),
        (1, 1, w1 + w2 + s_val, w2 + s_val),
        (2, 0, s_val, w2 + s_val),
        (2, 1, w1 + w2 + s_val, w1 + s_val),
    ];
    for (theta, key, a1, a2) in rows {
        let mut pool = CommonRandomnessPool::from_symbols(vec![spec.element(s_val)]);
        let out = spir_round(&s, &store, theta, &mut pool, &mut ScriptedSource::new(vec![key]))?;
        let label = format!("theta {theta} key {key}");
        b.check(&label, Origin::Worked, vec![spec.element(a1), spec.element(a2)], answers(&out.round).concat());
        b.check("decoded", Origin::Trivial, store.message(theta).to_vec(), out.round.decoded.clone());
    }
    Ok(())
}

fn pruw(b: &mut Book) -> Result<()> {
    let spec = f(97);
    let frame = EvaluationFrame::standard(spec, 4)?;
    let (fv, alphas) = (frame.f(), frame.alphas().to_vec());
    b.check("noise terms per share", Origin::Worked, 2, frame.noise_terms());

    // S = w + (f - alpha)(Z + alpha Y)
    let (w, z, y) = (spec.element(40), spec.element(17), spec.element(58));
    for &a in &alphas {
        b.check("share form", Origin::Worked, w + (fv - a) * (z + a * y), share_value(fv, a, w, &[z, y]));
    }

    let zbar = spec.vector(&[9, 21, 33]).to_vec();
    for &a in &alphas {
        let q = query_for_point(fv, a, 2, &zbar)?;
        let mut want = zbar.clone();
        want[1] += (fv - a).inv()?;
        b.check("query form", Origin::Worked, want, q);
    }

    let models = vec![vec![spec.element(11)], vec![spec.element(40)], vec![spec.element(73)]];
    let mut src = SeededSource::new(2, "docsbook/pruw");
    let mut dbs = pruw_init(&models, &frame, &mut src)?;
    let residuals: Vec<FieldElement> = dbs
        .iter_mut()
        .enumerate()
        .map(|(n, d)| {
            let q = query_for_point(fv, alphas[n], 2, &zbar)?;
            let ans = d.answer(1, &q, &[0])?[0];
            Ok(ans - models[1][0] * (fv - alphas[n]).inv()?)
        })
        .collect::<Result<_>>()?;
    // A_n - w_2/(f - alpha_n) = V_0 + V_1 alpha_n + V_2 alpha_n^2 on all four points
    let rows: Vec<Vec<FieldElement>> = alphas[..3].iter().map(|&a| vec![spec.one(), a, a * a]).collect();
    let v = solve_linear(&rows, &residuals[..3])?;
    let a4 = alphas[3];
    b.check("answer form", Origin::Worked, residuals[3], v[0] + v[1] * a4 + v[2] * a4 * a4);

    let delta = spec.element(30);
    let updates = write_updates(&frame, &[(0, delta)], &mut ScriptedSource::new(vec![6]));
    for (n, &a) in alphas.iter().enumerate() {
        b.check("update form", Origin::Worked, delta + (fv - a) * spec.element(6), updates[n][0].1);
    }

    let mut sys = PruwSystem::new(&models, frame, &mut src)?;
    let round = sys.round(2, &[0], Some(&[delta]), &mut src)?;
    b.check("read returns w_2", Origin::Trivial, vec![models[1][0]], round.decoded.clone());
    let after = sys.reconstruct()?;
    b.check(
        "only W_2 changes",
        Origin::Trivial,
        vec![models[0][0], models[1][0] + delta, models[2][0]],
        after.iter().map(|m| m[0]).collect(),
    );
    b.rate("reading cost", Origin::Derived, Rate::from_integer(4.into()), round.reading_cost.clone());
    b.rate("writing cost", Origin::Derived, Rate::from_integer(4.into()), round.writing_cost.clone());
    Ok(())
}

fn sparse_permutation(b: &mut Book) -> Result<()> {
    let spec = f(97);
    let frame = EvaluationFrame::standard(spec, 4)?;
    // real position stored at each permuted position, 0-based
    let perm = vec![1, 0, 3, 4, 2];
    let mut src = SeededSource::new(10, "docsbook/sparse");
    let x: Vec<Vec<FieldElement>> = (0..5).map(|_| src.elements(spec, 5)).collect();
    let setup = PermutationSetup::from_parts(frame.clone(), vec![0..5], perm, x)?;
    b.check(
        "permutation-reversing matrix",
        Origin::Worked,
        vec![
            vec![0, 1, 0, 0, 0],
            vec![1, 0, 0, 0, 0],
            vec![0, 0, 0, 0, 1],
            vec![0, 0, 1, 0, 0],
            vec![0, 0, 0, 1, 0],
        ],
        setup.pi_matrix(),
    );

    let (d2, d3) = (spec.element(10), spec.element(20));
    let write = client_write_sparse(&setup, &[(1, d2), (2, d3)], &mut src)?;
    let one_based: Vec<usize> = write.positions.iter().map(|p| p + 1).collect();
    b.check("permuted indices", Origin::Worked, vec![1, 5], one_based);

    // noise-free view of the rearrangement: X = 0 and zdot = 0
    let plain = PermutationSetup::from_parts(frame.clone(), vec![0..5], setup.permutation().to_vec(), vec![vec![spec.zero(); 5]; 5])?;
    let r0 = plain.r_matrix(0);
    let mut constant = vec![spec.zero(); 5];
    db_rearrange_and_apply(&mut constant, &r0, &[0, 4], &[d2, d3])?;
    b.check("rearranged constant term", Origin::Worked, spec.vector(&[0, 10, 20, 0, 0]).to_vec(), constant);

    let model = spec.vector(&[1, 2, 3, 4, 5]).to_vec();
    let mut shares = share_model(&model, &frame, &mut src);
    crate::sparsify::apply_write(&setup, &mut shares, &write)?;
    let read = read_sparse(&setup, &shares, &[0, 1, 2, 3, 4])?;
    let mut got = vec![spec.zero(); 5];
    for (i, v) in read {
        got[i] = v;
    }
    b.check("read after write", Origin::Derived, spec.vector(&[1, 12, 23, 4, 5]).to_vec(), got);
    let first = read_sparse(&setup, &shares, &[0])?;
    b.check("permuted index 1 reads real parameter 2", Origin::Worked, vec![(1, spec.element(12))], first);
    Ok(())
}
