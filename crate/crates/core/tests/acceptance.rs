//! Acceptance criteria. Each test prints one PASS/FAIL line; run with
//! `cargo test -p erdos-szekeres --test acceptance -- --nocapture --test-threads 1`
//! to see them in order.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::time::Instant;

use erdos_szekeres::moments::{pte_witness, vanishing_order_by_moments};
use erdos_szekeres::newton::{power_sums, reconstruct_multiset, IntMultiset};
use erdos_szekeres::norms::{coeff_norms, mean_square_on_grid, refine_enclosure, sup_norm_enclosure};
use erdos_szekeres::search::{exhaustive_search, SearchRecord, DEFAULT_FINE_GRID};
use erdos_szekeres::theorems::{batch_verify, verify_or_inequality, BatchOutcome, Family};
use erdos_szekeres::{ExponentSequence, IntPolynomial};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GRID: usize = 1 << 14;
const TOL: f64 = 1e-9;

fn exhaustive_family() -> Family {
    Family::Exhaustive { n_max: 3, s_max: 8 }
}

fn random_family() -> Family {
    Family::Random {
        count: 1000,
        n: 6,
        s_max: 12,
        seed: 1,
    }
}

fn family_members() -> Vec<ExponentSequence> {
    let mut all = exhaustive_family().members();
    all.extend(random_family().members());
    all
}

fn verdict(id: u32, what: &str, ok: bool, detail: String) {
    println!("[{}] criterion {id}: {what} ({detail})", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {id} failed: {detail}");
}

fn batches() -> Vec<BatchOutcome> {
    [exhaustive_family(), random_family()]
        .iter()
        .map(|f| batch_verify(f, GRID).unwrap())
        .collect()
}

#[test]
fn criterion_01_exact_coefficient_bounds() {
    let start = Instant::now();
    let mut checked = 0;
    let mut failures = Vec::new();
    for s in family_members() {
        let p = IntPolynomial::expand_product(&s);
        let norms = coeff_norms(&p);
        let two_n = BigInt::from(2 * s.len());
        if norms.l2_squared < two_n || norms.l1 < two_n {
            failures.push(s.to_string());
        }
        checked += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        1,
        "sum|a_k|^2 >= 2n and sum|a_k| >= 2n, exact",
        failures.is_empty() && checked == 164 + 1000 && secs < 60.0,
        format!("{checked} products, {} failures, {secs:.2} s", failures.len()),
    );
}

#[test]
fn criterion_02_main_bound_consistency() {
    let mut count = 0;
    let mut bad = Vec::new();
    for out in batches() {
        for r in &out.reports {
            count += 1;
            let e = &r.enclosure;
            let floor = 2.0 * (r.n as f64).sqrt();
            let upper_ok = e.upper >= floor - TOL;
            let lower_ok = e.lower >= floor - PI * e.lipschitz_bound / GRID as f64 - TOL;
            if !(upper_ok && lower_ok && r.consistent) {
                bad.push(r.s.to_string());
            }
        }
    }
    verdict(
        2,
        "upper >= 2 sqrt n and lower >= 2 sqrt n - pi L / M at M = 2^14",
        bad.is_empty() && count == 1164,
        format!("{count} products, failures {bad:?}"),
    );
}

#[test]
fn criterion_03_or_consistency() {
    let mut bad = Vec::new();
    for s in family_members() {
        let p = IntPolynomial::expand_product(&s);
        let r = verify_or_inequality(&p, GRID).unwrap();
        let two_l2 = 2.0 * r.l2_squared.to_f64().unwrap();
        if !(r.hypothesis_guaranteed && r.enclosure.upper * r.enclosure.upper >= two_l2 - TOL) {
            bad.push(s.to_string());
        }
    }
    let p = IntPolynomial::from_i64s(&[1, -1]);
    let tight = refine_enclosure(&p, &sup_norm_enclosure(&p, GRID).unwrap(), 1e-7).unwrap();
    let eq_ok = (tight.lower.powi(2) - 4.0).abs() <= 1e-6
        && (tight.upper.powi(2) - 4.0).abs() <= 1e-6
        && coeff_norms(&p).l2_squared == BigInt::from(2);
    verdict(
        3,
        "upper^2 >= 2 sum|a_k|^2 on all family products; equality at s = (1)",
        bad.is_empty() && eq_ok,
        format!("failures {bad:?}, sup^2 in [{}, {}]", tight.lower.powi(2), tight.upper.powi(2)),
    );
}

/// All multisets of size `m` over `lo..=hi`, as sorted vectors.
fn multisets(m: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    if m == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in lo..=hi {
        for mut rest in multisets(m - 1, first, hi) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

#[test]
fn criterion_04_power_sums_determine_multisets() {
    let start = Instant::now();
    let mut total = 0;
    let mut collisions = 0;
    let mut round_trip_failures = 0;
    for m in 1..=5 {
        let mut seen: HashMap<Vec<BigInt>, Vec<i64>> = HashMap::new();
        for xs in multisets(m, -4, 4) {
            total += 1;
            let x: IntMultiset = xs.iter().copied().collect();
            let ps = power_sums(&x, m as u32).unwrap();
            if seen.insert(ps.values.clone(), xs.clone()).is_some() {
                collisions += 1;
            }
            match reconstruct_multiset(&ps) {
                Ok(back) if back == x => {}
                _ => round_trip_failures += 1,
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        4,
        "power sums injective and reconstruction exact, m <= 5 over [-4, 4]",
        total == 2001 && collisions == 0 && round_trip_failures == 0 && secs < 120.0,
        format!("{total} multisets, {collisions} collisions, {round_trip_failures} round-trip failures, {secs:.2} s"),
    );
}

fn random_polynomials(count: usize, seed: u64) -> Vec<IntPolynomial> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let degree = rng.gen_range(0..=50);
            let mut c: Vec<i64> = (0..=degree).map(|_| rng.gen_range(-9..=9)).collect();
            if c.iter().all(|&x| x == 0) {
                c[0] = 1;
            }
            IntPolynomial::from_i64s(&c)
        })
        .collect()
}

#[test]
fn criterion_05_divisibility_cross_oracle() {
    let mut polys = random_polynomials(10_000, 5);
    polys.extend(family_members().iter().map(IntPolynomial::expand_product));
    let disagreements = polys
        .iter()
        .filter(|p| vanishing_order_by_moments(p).unwrap() != p.multiplicity_at_one().unwrap())
        .count();
    verdict(
        5,
        "vanishing order by moments equals multiplicity at z = 1",
        disagreements == 0,
        format!("{} polynomials, {disagreements} disagreements", polys.len()),
    );
}

#[test]
fn criterion_06_discrete_parseval() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    let mut count = 0;
    while count < 100 {
        let n = rng.gen_range(1..=40);
        let s: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=100)).collect();
        let seq = ExponentSequence::new(s).unwrap();
        if seq.degree() > 4096 {
            continue;
        }
        let p = IntPolynomial::expand_product(&seq);
        let m = (seq.degree() as usize + 1).next_power_of_two();
        let l2 = coeff_norms(&p).l2_squared.to_f64().unwrap();
        let rel = (mean_square_on_grid(&p, m).unwrap() - l2).abs() / l2;
        worst = worst.max(rel);
        count += 1;
    }
    verdict(
        6,
        "mean of |p|^2 on M > N grid points equals sum |a_k|^2",
        worst <= 1e-9,
        format!("{count} products, worst relative error {worst:e}"),
    );
}

#[test]
fn criterion_07_small_n_values() {
    let start = Instant::now();
    let one = exhaustive_search(1, 8, GRID).unwrap();
    let one_ok = one.best_s.exponents() == [1]
        && one.enclosure.width() <= 1e-6
        && one.enclosure.contains(2.0);
    let two = exhaustive_search(2, 8, GRID).unwrap();
    let target = 16.0 / (3.0 * 3f64.sqrt());
    let two_ok = two.best_s.exponents() == [1, 2] && (two.objective - target).abs() <= 1e-4;
    let secs = start.elapsed().as_secs_f64();
    verdict(
        7,
        "f(1) = 2 and exhaustive n = 2, s_max = 8 finds (1,2) at 16/(3 sqrt 3)",
        one_ok && two_ok && secs < 60.0,
        format!(
            "f(1) in [{}, {}], n=2 best {} objective {} (target {target}), {secs:.2} s",
            one.enclosure.lower, one.enclosure.upper, two.best_s, two.objective
        ),
    );
}

#[test]
fn criterion_08_pte_witness() {
    let p = IntPolynomial::expand_product(&ExponentSequence::new(vec![1, 2]).unwrap());
    let w = pte_witness(&p).unwrap();
    let sums = |xs: &[u64], k: u32| -> u64 { xs.iter().map(|x| x.pow(k)).sum() };
    let ok = w.a_list == [0, 3]
        && w.b_list == [1, 2]
        && (0..2).all(|k| sums(&w.a_list, k) == sums(&w.b_list, k))
        && w.agreement_order == 2
        && w.size() >= 2;
    verdict(
        8,
        "s = (1,2) gives PTE pair {0,3} / {1,2} of order 2",
        ok,
        format!("a = {:?}, b = {:?}, order {}", w.a_list, w.b_list, w.agreement_order),
    );
}

#[test]
fn criterion_09_nonzero_coefficient_count() {
    let members = exhaustive_family().members();
    let bad: Vec<String> = members
        .iter()
        .filter(|s| IntPolynomial::expand_product(s).nonzero_count() < s.len() + 1)
        .map(|s| s.to_string())
        .collect();
    verdict(
        9,
        "every exhaustive-family product has at least n + 1 nonzero coefficients",
        bad.is_empty(),
        format!("{} products, failures {bad:?}", members.len()),
    );
}

/// Serialised outputs of criteria 1 to 7.
fn criteria_outputs() -> String {
    let mut out = String::new();
    for b in batches() {
        out.push_str(&b.to_jsonl().unwrap());
        out.push_str(&serde_json::to_string(&b.summary).unwrap());
        out.push('\n');
    }
    let p = IntPolynomial::from_i64s(&[1, -1]);
    let or = verify_or_inequality(&p, GRID).unwrap();
    out.push_str(&serde_json::to_string(&or).unwrap());
    out.push('\n');
    for m in 1..=3 {
        for xs in multisets(m, -4, 4) {
            let x: IntMultiset = xs.into_iter().collect();
            let back = reconstruct_multiset(&power_sums(&x, m as u32).unwrap()).unwrap();
            out.push_str(&serde_json::to_string(&back).unwrap());
            out.push('\n');
        }
    }
    let orders: Vec<usize> = random_polynomials(500, 5)
        .iter()
        .map(|p| vanishing_order_by_moments(p).unwrap())
        .collect();
    out.push_str(&serde_json::to_string(&orders).unwrap());
    out.push('\n');
    let p = IntPolynomial::expand_product(&ExponentSequence::new(vec![3, 5, 9, 40]).unwrap());
    out.push_str(&serde_json::to_string(&mean_square_on_grid(&p, 64).unwrap()).unwrap());
    out.push('\n');
    let recs: Vec<SearchRecord> = vec![
        exhaustive_search(1, 8, DEFAULT_FINE_GRID).unwrap(),
        exhaustive_search(2, 8, DEFAULT_FINE_GRID).unwrap(),
        erdos_szekeres::search::local_search(3, 10, 1 << 12, 42, 200).unwrap(),
    ];
    for r in recs {
        out.push_str(&serde_json::to_string(&r).unwrap());
        out.push('\n');
    }
    out
}

#[test]
fn criterion_10_determinism_across_worker_counts() {
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(criteria_outputs)
    };
    let single = run(1);
    let again = run(1);
    let multi = run(4);
    verdict(
        10,
        "byte-identical JSONL across repeated runs and worker counts",
        single == again && single == multi,
        format!("{} bytes per run", single.len()),
    );
}
