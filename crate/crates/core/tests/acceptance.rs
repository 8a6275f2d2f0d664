//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails or runs past its time budget.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use pirlab::audit::{
    max_user_privacy_tv, otp_uniformity, pruw_query_tv, pruw_share_uniformity, pruw_update_uniformity,
    sparse_index_tv, spir_db_privacy, PoolExposure,
};
use pirlab::capacity::{c_byzantine, c_coded, c_colluding, c_pir, c_spir, rd_costs};
use pirlab::databank::{empirical_rate, MessageStore};
use pirlab::pir::fixtures::PlantedLeak;
use pirlab::pir::{expected_rate, run_round, Cgks, LeakySymmetric, PirScheme, Residual, SunJafar, Tian};
use pirlab::pruw::{pruw_roundtrip, query_for_point, sparsified_positions, EvaluationFrame, PruwSystem};
use pirlab::randomness::{enumerate_paths, PathSource, RandomSource, ScriptedSource, SeededSource, DEFAULT_ENUMERATION_CAP};
use pirlab::sparsify::{
    apply_write, client_write_sparse, coordinator_setup, db_rearrange_and_apply, leakage_entropy, read_sparse,
    segment_bounds, share_model, sparse_cost, PermutationSetup,
};
use pirlab::spir::{self, spir_round, spir_user_view, CommonRandomnessPool};
use pirlab::{Error, FieldElement, FieldSpec, Rate};

type Outcome = Result<(), String>;

const CAP: u128 = DEFAULT_ENUMERATION_CAP;

fn f(q: u64) -> FieldSpec {
    FieldSpec::new(q).unwrap()
}

fn r(n: i64, d: i64) -> Rate {
    Rate::new(n.into(), d.into())
}

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn err(e: Error) -> String {
    e.to_string()
}

// ---------------------------------------------------------------------------
// 1. capacities

fn capacities() -> Outcome {
    for (n, k, c) in [(2, 2, r(2, 3)), (2, 3, r(4, 7)), (3, 3, r(9, 13))] {
        let got: Rate = c_pir(n, k).map_err(err)?;
        ensure(got == c, || format!("c_pir({n},{k}) = {got}, want {c}"))?;
    }
    for n in 2..=6u64 {
        let got: Rate = c_spir(n).map_err(err)?;
        ensure(got == r(n as i64 - 1, n as i64), || format!("c_spir({n}) = {got}"))?;
    }
    let mut compared = 0;
    for n in 1..=6u64 {
        for k in 1..=6u64 {
            let pir = c_pir::<Rate>(n, k).ok();
            let coded = c_coded::<Rate>(n, k, 1).ok();
            let coll = c_colluding::<Rate>(n, k, 1).ok();
            ensure(coded == pir && coll == pir, || format!("M=1 / T=1 reductions differ at N={n}, K={k}"))?;
            for t in 1..=6u64 {
                let coll = c_colluding::<Rate>(n, k, t).ok();
                let byz = c_byzantine::<Rate>(n, k, t, 0).ok();
                ensure(byz == coll, || format!("B=0 reduction differs at N={n}, K={k}, T={t}"))?;
                compared += usize::from(coll.is_some());
            }
        }
    }
    ensure(compared > 50, || format!("only {compared} grid points defined"))
}

// ---------------------------------------------------------------------------
// 2. rates

fn measured_rate<S: PirScheme>(s: &S, theta: usize, seed: u64) -> Result<Rate, String> {
    let spec = s.spec();
    let l = s.subpacket_len();
    let store = MessageStore::random(spec, s.messages(), l, &mut SeededSource::new(seed, "acceptance/store")).map_err(err)?;
    let out = run_round(s, &store, theta, &mut SeededSource::new(seed, "acceptance/user")).map_err(err)?;
    if !out.decoded_matches(&store) {
        return Err(format!("{} failed to decode", s.name()));
    }
    empirical_rate(&out.transcript)
        .map_err(err)?
        .rate
        .ok_or_else(|| "empty transcript".to_string())
}

fn rates() -> Outcome {
    let spec = f(3);
    for n in 2..=4usize {
        for k in 1..=4usize {
            let s = SunJafar::new(spec, n, k).map_err(err)?;
            let c: Rate = c_pir(n as u64, k as u64).map_err(err)?;
            for theta in 1..=k {
                let got = measured_rate(&s, theta, (n * 10 + k) as u64)?;
                ensure(got == c, || format!("sunjafar ({n},{k}) theta={theta}: {got} != {c}"))?;
            }
        }
    }
    for n in 2..=6usize {
        let s = Residual::new(spec, n, 3).map_err(err)?;
        let got = measured_rate(&s, 2, n as u64)?;
        ensure(got == r(n as i64 - 1, n as i64), || format!("residual N={n}: {got}"))?;
    }
    for n in 2..=3usize {
        for k in 2..=3usize {
            let s = Tian::new(spec, n, k).map_err(err)?;
            let c: Rate = c_pir(n as u64, k as u64).map_err(err)?;
            for theta in 1..=k {
                let got = expected_rate(&s, theta, s.subpacket_len(), CAP).map_err(err)?;
                ensure(got == c, || format!("tian ({n},{k}) theta={theta}: {got} != {c}"))?;
            }
        }
    }
    let s = LeakySymmetric::new(spec, 2, 2).map_err(err)?;
    for theta in 1..=2 {
        let got = expected_rate(&s, theta, s.subpacket_len(), CAP).map_err(err)?;
        ensure(got == r(2, 3), || format!("leaky theta={theta}: {got}"))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// 3. decodability

/// Every store when there are at most 243 of them. Otherwise the zero store,
/// every unit store and a few random ones: decoding is linear in the store
/// for fixed randomness, so the unit stores cover all of them.
fn stores(spec: FieldSpec, k: usize, l: usize) -> Vec<MessageStore> {
    let q = spec.q();
    let symbols = (k * l) as u32;
    if q.checked_pow(symbols).is_some_and(|n| n <= 243) {
        return (0..q.pow(symbols))
            .map(|mut i| {
                let values: Vec<Vec<u64>> = (0..k)
                    .map(|_| {
                        (0..l)
                            .map(|_| {
                                let d = i % q;
                                i /= q;
                                d
                            })
                            .collect()
                    })
                    .collect();
                MessageStore::from_values(spec, &values).unwrap()
            })
            .collect();
    }
    let mut out = vec![MessageStore::from_values(spec, &vec![vec![0; l]; k]).unwrap()];
    for m in 0..k {
        for i in 0..l {
            let mut values = vec![vec![0; l]; k];
            values[m][i] = 1;
            out.push(MessageStore::from_values(spec, &values).unwrap());
        }
    }
    let mut src = SeededSource::new(3, "acceptance/stores");
    for _ in 0..3 {
        out.push(MessageStore::random(spec, k, l, &mut src).unwrap());
    }
    out
}

fn round_decodes<S: PirScheme>(s: &S, store: &MessageStore, theta: usize, spir: bool, src: &mut dyn RandomSource) -> pirlab::Result<bool> {
    if spir {
        let mut pool = CommonRandomnessPool::random(s.spec(), 1, src);
        Ok(spir_round(s, store, theta, &mut pool, src)?.round.decoded_matches(store))
    } else {
        Ok(run_round(s, store, theta, src)?.decoded_matches(store))
    }
}

/// Number of (randomness, store) pairs checked and whether all decoded.
/// The randomness is enumerated when its space fits under the cap and
/// sampled from 200 seeded streams otherwise.
fn decodability<S: PirScheme>(s: &S, spir: bool) -> Result<(u128, bool), String> {
    let stores = stores(s.spec(), s.messages(), s.subpacket_len());
    let mut checked = 0u128;
    let mut ok = true;
    for theta in 1..=s.messages() {
        let enumerated = enumerate_paths(CAP, |src: &mut PathSource| {
            let mut all = round_decodes(s, &stores[0], theta, spir, src)?;
            let draws: Vec<u64> = src.digits().iter().map(|d| d.0).collect();
            for store in &stores[1..] {
                all &= round_decodes(s, store, theta, spir, &mut ScriptedSource::new(draws.clone()))?;
            }
            Ok(all)
        });
        match enumerated {
            Ok(dist) => {
                ok &= !dist.contains_key(&false);
                checked += stores.len() as u128;
            }
            Err(Error::SpaceTooLarge { .. }) => {
                for seed in 0..200 {
                    for store in &stores {
                        let mut src = SeededSource::new(seed, "acceptance/decode");
                        ok &= round_decodes(s, store, theta, spir, &mut src).map_err(err)?;
                        checked += 1;
                    }
                }
            }
            Err(e) => return Err(err(e)),
        }
    }
    Ok((checked, ok))
}

fn decodability_all() -> Outcome {
    let spec = f(3);
    let report = |name: &str, n: usize, k: usize, res: Result<(u128, bool), String>| -> Outcome {
        let (_, ok) = res?;
        ensure(ok, || format!("{name} ({n},{k}) decoded a wrong value"))
    };
    for k in 1..=3 {
        report("cgks", 2, k, decodability(&Cgks::new(spec, 2, k).map_err(err)?, false))?;
    }
    for n in 2..=3 {
        for k in 1..=3 {
            report("residual", n, k, decodability(&Residual::new(spec, n, k).map_err(err)?, false))?;
            report("sunjafar", n, k, decodability(&SunJafar::new(spec, n, k).map_err(err)?, false))?;
            report("tian", n, k, decodability(&Tian::new(spec, n, k).map_err(err)?, false))?;
            report("spir-deterministic", n, k, decodability(&spir::deterministic(spec, n, k).map_err(err)?, true))?;
            report("spir-probabilistic", n, k, decodability(&spir::probabilistic(spec, n, k).map_err(err)?, true))?;
        }
    }
    report("leaky", 2, 2, decodability(&LeakySymmetric::new(spec, 2, 2).map_err(err)?, false))
}

// ---------------------------------------------------------------------------
// 4. user privacy

fn user_privacy() -> Outcome {
    let spec = f(3);
    let zero = |name: &str, n: usize, k: usize, tv: pirlab::Result<Rate>| -> Outcome {
        let tv = tv.map_err(err)?;
        ensure(tv.is_zero(), || format!("{name} ({n},{k}): TV = {tv}"))
    };
    for k in 1..=3 {
        zero("cgks", 2, k, max_user_privacy_tv(&Cgks::new(spec, 2, k).map_err(err)?, CAP))?;
    }
    for n in 2..=3 {
        for k in 1..=3 {
            zero("residual", n, k, max_user_privacy_tv(&Residual::new(spec, n, k).map_err(err)?, CAP))?;
            zero("sunjafar", n, k, max_user_privacy_tv(&SunJafar::new(spec, n, k).map_err(err)?, CAP))?;
            zero("tian", n, k, max_user_privacy_tv(&Tian::new(spec, n, k).map_err(err)?, CAP))?;
            zero("spir-deterministic", n, k, max_user_privacy_tv(&spir::deterministic(spec, n, k).map_err(err)?, CAP))?;
            zero("spir-probabilistic", n, k, max_user_privacy_tv(&spir::probabilistic(spec, n, k).map_err(err)?, CAP))?;
        }
    }
    zero("leaky", 2, 2, max_user_privacy_tv(&LeakySymmetric::new(spec, 2, 2).map_err(err)?, CAP))?;

    // PRUW needs q > N >= 4; its query view at q = 3 is checked point by point in criterion 6
    let frame = EvaluationFrame::standard(f(5), 4).map_err(err)?;
    for &alpha in frame.alphas() {
        for (a, b) in [(1, 2), (1, 3), (2, 3)] {
            let tv = pruw_query_tv(f(5), frame.f().value(), alpha.value(), 3, a, b, CAP).map_err(err)?;
            ensure(tv.is_zero(), || format!("pruw query TV {tv} at alpha={}", alpha.value()))?;
        }
    }
    for l in 2..=4usize {
        for a in 0..l {
            for b in 0..l {
                let tv = sparse_index_tv(l, &[a], &[b], CAP).map_err(err)?;
                ensure(tv.is_zero(), || format!("sparse index TV {tv} at L={l}"))?;
            }
        }
    }

    for k in 2..=3 {
        let tv = max_user_privacy_tv(&PlantedLeak::new(spec, k), CAP).map_err(err)?;
        ensure(tv.is_one(), || format!("planted leak K={k}: TV = {tv}, want 1"))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// 5. SPIR database privacy

fn database_privacy() -> Outcome {
    for q in [2, 3, 5] {
        let spec = f(q);
        for k in 1..=3 {
            for theta in 1..=k {
                let det = spir::deterministic(spec, 2, k).map_err(err)?;
                let rep = spir_db_privacy(&det, theta, PoolExposure::Hidden, CAP).map_err(err)?;
                ensure(rep.uniform(), || format!("spir-deterministic q={q} K={k} theta={theta}: {}", rep.max_deviation))?;
                let prob = spir::probabilistic(spec, 2, k).map_err(err)?;
                let rep = spir_db_privacy(&prob, theta, PoolExposure::Hidden, CAP).map_err(err)?;
                ensure(rep.uniform(), || format!("spir-probabilistic q={q} K={k} theta={theta}: {}", rep.max_deviation))?;
            }
        }
        let prob = spir::probabilistic(spec, 3, 3).map_err(err)?;
        for theta in 1..=3 {
            let rep = spir_db_privacy(&prob, theta, PoolExposure::Hidden, CAP).map_err(err)?;
            ensure(rep.uniform(), || format!("spir-probabilistic (3,3) q={q} theta={theta}: {}", rep.max_deviation))?;
        }
    }
    for q in [2, 3] {
        let plain = Residual::new(f(q), 2, 2).map_err(err)?;
        let rep = spir_db_privacy(&plain, 1, PoolExposure::Absent, CAP).map_err(err)?;
        ensure(!rep.uniform(), || format!("plain PIR at q={q} passed the database-privacy check"))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// 6. PRUW

fn pruw() -> Outcome {
    let spec = f(97);
    for n in [4, 5] {
        let frame = EvaluationFrame::standard(spec, n).map_err(err)?;
        for i in 0..100u64 {
            let mut src = SeededSource::new(i, &format!("acceptance/pruw/{n}"));
            let models: Vec<Vec<FieldElement>> = (0..3).map(|_| src.elements(spec, 8)).collect();
            let delta = src.elements(spec, 8);
            let theta = 1 + src.draw_below(3) as usize;
            let rep = pruw_roundtrip(&frame, &models, theta, &delta, &mut src).map_err(err)?;
            ensure(rep.passed(), || format!("roundtrip N={n} instance {i}: {rep:?}"))?;
            let cost = Rate::from_integer(BigInt::from(n));
            ensure(rep.reading_cost == cost && rep.writing_cost == cost, || format!("costs N={n}: {rep:?}"))?;
        }
    }

    let frame = EvaluationFrame::standard(f(5), 4).map_err(err)?;
    let small = frame.spec();
    for db in 0..4 {
        for w in small.elements() {
            ensure(pruw_share_uniformity(&frame, w, db, CAP).map_err(err)?.uniform, || format!("share not uniform at db {db}"))?;
            ensure(pruw_update_uniformity(&frame, w, db, CAP).map_err(err)?.uniform, || format!("update not uniform at db {db}"))?;
        }
        let alpha = frame.alphas()[db];
        for theta in 1..=3 {
            let v = otp_uniformity(small, 3, CAP, |src| query_for_point(frame.f(), alpha, theta, &src.elements(small, 3)))
                .map_err(err)?;
            ensure(v.uniform, || format!("query not uniform at db {db}, theta {theta}"))?;
        }
    }

    let three = f(3);
    for fv in 0..3 {
        for alpha in (0..3).filter(|&a| a != fv) {
            let tv = pruw_query_tv(three, fv, alpha, 2, 1, 2, CAP).map_err(err)?;
            ensure(tv.is_zero(), || format!("query TV {tv} at f={fv}, alpha={alpha}"))?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// 7. sparsification

/// Leakage entropy from segment sizes: count vectors weighted by products
/// of binomials, grouped by sorted counts for the two-stage view.
fn leakage_oracle(l: usize, b: usize, s: usize) -> (f64, f64) {
    fn binom(n: usize, k: usize) -> f64 {
        if k > n {
            return 0.0;
        }
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }
    let base = l / b;
    let sizes: Vec<usize> = (0..b).map(|i| if i + 1 == b { l - base * (b - 1) } else { base }).collect();
    let mut vectors: Vec<(Vec<usize>, f64)> = vec![(Vec::new(), 1.0)];
    for &size in &sizes {
        let mut next = Vec::new();
        for (v, w) in &vectors {
            let used: usize = v.iter().sum();
            for c in 0..=size.min(s - used) {
                let mut v = v.clone();
                v.push(c);
                next.push((v, w * binom(size, c)));
            }
        }
        vectors = next;
    }
    let total = binom(l, s);
    let mut single = 0.0;
    let mut grouped: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for (v, w) in vectors.into_iter().filter(|(v, _)| v.iter().sum::<usize>() == s) {
        let p = w / total;
        single -= p * p.log2();
        let mut key = v;
        key.sort_unstable();
        *grouped.entry(key).or_default() += p;
    }
    let two = grouped.values().map(|p| -p * p.log2()).sum();
    (single, two)
}

fn permutations(l: usize) -> Vec<Vec<usize>> {
    if l == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(l - 1) {
        for at in 0..=p.len() {
            let mut p = p.clone();
            p.insert(at, l - 1);
            out.push(p);
        }
    }
    out
}

fn sparsification() -> Outcome {
    let spec = f(97);
    let frame = EvaluationFrame::standard(spec, 4).map_err(err)?;
    let mut src = SeededSource::new(10, "acceptance/sparse");

    // positions (2,1,4,5,3); Delta_2 = 10, Delta_3 = 20
    let x: Vec<Vec<FieldElement>> = (0..5).map(|_| src.elements(spec, 5)).collect();
    let setup = PermutationSetup::from_parts(frame.clone(), vec![0..5], vec![1, 0, 3, 4, 2], x).map_err(err)?;
    let (d2, d3) = (spec.element(10), spec.element(20));
    let write = client_write_sparse(&setup, &[(1, d2), (2, d3)], &mut src).map_err(err)?;
    ensure(write.positions == [0, 4], || format!("permuted indices {:?}", write.positions))?;
    let plain = PermutationSetup::from_parts(frame.clone(), vec![0..5], setup.permutation().to_vec(), vec![vec![spec.zero(); 5]; 5])
        .map_err(err)?;
    let mut constant = vec![spec.zero(); 5];
    db_rearrange_and_apply(&mut constant, &plain.r_matrix(0), &[0, 4], &[d2, d3]).map_err(err)?;
    ensure(constant == spec.vector(&[0, 10, 20, 0, 0]).to_vec(), || format!("constant term {constant:?}"))?;

    for l in 1..=5usize {
        for perm in permutations(l) {
            let x: Vec<Vec<FieldElement>> = (0..l).map(|_| src.elements(spec, l)).collect();
            let setup = PermutationSetup::from_parts(frame.clone(), vec![0..l], perm.clone(), x).map_err(err)?;
            let model = src.elements(spec, l);
            let mut shares = share_model(&model, &frame, &mut src);
            let count = 1 + src.draw_below(l as u64) as usize;
            let chosen = &src.permutation(l)[..count];
            let updates: Vec<(usize, FieldElement)> = chosen.iter().map(|&i| (i, src.element(spec))).collect();
            let mut shadow = model.clone();
            for &(i, d) in &updates {
                shadow[i] += d;
            }
            let write = client_write_sparse(&setup, &updates, &mut src).map_err(err)?;
            apply_write(&setup, &mut shares, &write).map_err(err)?;
            let mut got = vec![spec.zero(); l];
            for (i, v) in read_sparse(&setup, &shares, &(0..l).collect::<Vec<_>>()).map_err(err)? {
                got[i] = v;
            }
            ensure(got == shadow, || format!("read after write under {perm:?}"))?;
        }
    }

    let (single, two) = (leakage_entropy(4, 2, 2, false).map_err(err)?, leakage_entropy(4, 2, 2, true).map_err(err)?);
    let (os, ot) = leakage_oracle(4, 2, 2);
    ensure((single - os).abs() <= 1e-9 && (two - ot).abs() <= 1e-9, || format!("L=4 leakage {single}/{two}, oracle {os}/{ot}"))?;
    ensure(format!("{single:.3}/{two:.3}") == "1.252/0.918", || format!("L=4 leakage {single:.3}/{two:.3}"))?;
    for b in [1, 2, 3, 4, 5, 6, 12] {
        for s in 0..=12 {
            let one = leakage_entropy(12, b, s, false).map_err(err)?;
            let two = leakage_entropy(12, b, s, true).map_err(err)?;
            let (os, ot) = leakage_oracle(12, b, s);
            ensure((one - os).abs() <= 1e-9 && (two - ot).abs() <= 1e-9, || format!("L=12 B={b} s={s} disagrees with oracle"))?;
            ensure(two <= one + 1e-12, || format!("L=12 B={b} s={s}: two-stage {two} > single-stage {one}"))?;
        }
    }

    // measured costs are reported, not compared with the asymptotic ones
    let setup = coordinator_setup(12, 3, true, &frame, &mut src).map_err(err)?;
    let cost = sparse_cost(&setup, 3, 2).map_err(err)?;
    report_note(&format!(
        "sparse L=12 B=3: storage {} symbols, read {}, write {} ({} segments)",
        cost.storage_symbols,
        cost.read_cost,
        cost.write_cost,
        segment_bounds(12, 3).map_err(err)?.len()
    ));
    Ok(())
}

// ---------------------------------------------------------------------------
// 8. rate-distortion

fn rate_distortion() -> Outcome {
    let grid = [r(0, 1), r(1, 8), r(1, 4), r(1, 3), r(1, 2), r(3, 4), r(1, 1)];
    let costs = [r(1, 1), r(3, 2), r(4, 1)];
    for c in &costs {
        let at = |d: &Rate| -> Result<Rate, String> { Ok(rd_costs(d.clone(), d.clone(), c.clone(), c.clone()).map_err(err)?.0) };
        ensure(at(&r(0, 1))? == *c && at(&r(1, 1))?.is_zero(), || format!("endpoints for C={c}"))?;
        for a in &grid {
            for b in &grid {
                let mid = (a + b) / r(2, 1);
                let lhs = at(&mid)?;
                let rhs = (at(a)? + at(b)?) / r(2, 1);
                ensure(lhs == rhs, || format!("rd_costs not linear between {a} and {b}"))?;
            }
            let (cr, cw) = rd_costs(a.clone(), r(0, 1), c.clone(), r(2, 1)).map_err(err)?;
            ensure(cr == (Rate::one() - a) * c && cw == r(2, 1), || format!("rd_costs({a}, 0, {c}, 2)"))?;
        }
    }

    let spec = f(97);
    let frame = EvaluationFrame::standard(spec, 4).map_err(err)?;
    let run = |d: &Rate| -> Result<(Rate, Rate), String> {
        let mut src = SeededSource::new(8, "acceptance/rd");
        let models: Vec<Vec<FieldElement>> = (0..3).map(|_| src.elements(spec, 8)).collect();
        let mut sys = PruwSystem::new(&models, frame.clone(), &mut src).map_err(err)?;
        let keep = sparsified_positions(8, d, &mut src).map_err(err)?;
        let delta = src.elements(spec, keep.len());
        let round = sys.round(2, &keep, Some(&delta), &mut src).map_err(err)?;
        let expected: Vec<FieldElement> = keep.iter().map(|&p| models[1][p]).collect();
        ensure(round.decoded == expected, || format!("sparsified read at D={d}"))?;
        Ok((round.reading_cost, round.writing_cost))
    };
    let (base_r, base_w) = run(&r(0, 1))?;
    for d in [r(0, 1), r(1, 4), r(1, 2)] {
        let (cr, cw) = run(&d)?;
        let factor = Rate::one() - &d;
        ensure(cr == &factor * &base_r && cw == &factor * &base_w, || format!("D={d}: costs {cr}/{cw}, baseline {base_r}/{base_w}"))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// 9. determinism

fn seeded_run_bytes(seed: u64) -> Result<Vec<u8>, String> {
    let spec = f(3);
    let s = SunJafar::new(spec, 2, 3).map_err(err)?;
    let store = MessageStore::random(spec, 3, 16, &mut SeededSource::new(seed, "run/store")).map_err(err)?;
    let out = run_round(&s, &store, 1, &mut SeededSource::new(seed, "run/user")).map_err(err)?;
    let rate = empirical_rate(&out.transcript).map_err(err)?.rate.unwrap_or_default();
    let mut bytes = serde_json::to_vec(&out.transcript.to_record(&rate)).map_err(|e| e.to_string())?;
    bytes.extend(spir_user_view(&out.transcript).key());

    let prob = spir::probabilistic(spec, 3, 3).map_err(err)?;
    let store = MessageStore::random(spec, 3, 4, &mut SeededSource::new(seed, "run/store")).map_err(err)?;
    let mut pool = CommonRandomnessPool::random(spec, 2, &mut SeededSource::new(seed, "run/pool"));
    let out = spir_round(&prob, &store, 2, &mut pool, &mut SeededSource::new(seed, "run/user")).map_err(err)?;
    bytes.extend(spir_user_view(&out.round.transcript).key());
    Ok(bytes)
}

fn determinism() -> Outcome {
    for seed in [0, 7, 12345] {
        ensure(seeded_run_bytes(seed)? == seeded_run_bytes(seed)?, || format!("seed {seed} is not reproducible"))?;
    }
    ensure(seeded_run_bytes(1)? != seeded_run_bytes(2)?, || "different seeds gave identical runs".to_string())
}

// ---------------------------------------------------------------------------

fn report_note(text: &str) {
    let _ = writeln!(std::io::stdout(), "       note: {text}");
}

fn main() {
    let criteria: [(&str, u64, fn() -> Outcome); 9] = [
        ("capacity equalities", 1, capacities),
        ("scheme rate equals capacity", 10, rates),
        ("decodability", 60, decodability_all),
        ("user privacy", 120, user_privacy),
        ("SPIR database privacy", 120, database_privacy),
        ("PRUW roundtrip and marginals", 60, pruw),
        ("sparsification", 60, sparsification),
        ("rate-distortion", 10, rate_distortion),
        ("determinism", 10, determinism),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let result = result.and_then(|()| {
            ensure(took <= Duration::from_secs(budget), || format!("took {took:.1?}, budget {budget} s"))
        });
        let line = match &result {
            Ok(()) => format!("PASS {}. {name} ({took:.2?})", i + 1),
            Err(e) => {
                failed += 1;
                format!("FAIL {}. {name} ({took:.2?}): {e}", i + 1)
            }
        };
        let _ = writeln!(std::io::stdout(), "{line}");
    }
    let _ = writeln!(std::io::stdout(), "{} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
