//! Acceptance suite: one test per criterion, each printing a single
//! `criterion NN ... PASS|FAIL` line with the measured quantity.
//! Run with `cargo test --test acceptance -- --test-threads 1` to see the
//! lines in order.

use std::collections::HashMap;
use std::io::Write;
use std::time::Instant;

use mdplook::budget::DEFAULT_BUDGET;
use mdplook::cli;
use mdplook::decision::{decide_ardp, decide_dvdp};
use mdplook::gadgets::{bounds_at, build_gadget_mdp, check_integrity, fixtures, verify_separation, waiting_policy_value, xv_law};
use mdplook::generate::{
    random_deterministic_mdp, random_mdp, random_policy, random_rational_mdp, random_rational_policy, random_scores,
    RandomMdpSpec,
};
use mdplook::lookahead::{build_augmented_mdp, initial_lookahead_distribution, sample_initial, simulate_step};
use mdplook::onestep::{
    event_probabilities, expected_max_bruteforce, expected_max_sorted, score_table, separation_oracle,
    solve_onestep_average, solve_onestep_discounted, solve_onestep_discounted_cg, sorted_ordering, Separation,
};
use mdplook::planners::{average_reward_solve, value_iteration_discounted};
use mdplook::reset::{reset_transform, reset_transform_augmented, verify_renewal_identity};
use mdplook::unichain::check_unichain_exhaustive;
use mdplook::TabularMdp;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Writes straight to the process stdout so the line shows up without `--nocapture`.
fn verdict(id: u32, name: &str, pass: bool, detail: String, start: Instant) {
    let line = format!(
        "criterion {id:02} {name}: {} ({detail}; {:.1} s)\n",
        if pass { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64()
    );
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    assert!(pass, "criterion {id} failed: {detail}");
}

/// `|S| ≤ 4`, `|A| ≤ 3` with a random support size.
fn random_instance(rng: &mut ChaCha8Rng, max_states: usize, max_actions: usize) -> TabularMdp<f64> {
    let n = rng.gen_range(1..=max_states);
    let k = rng.gen_range(1..=max_actions);
    let support = rng.gen_range(1..=n);
    random_mdp(rng, RandomMdpSpec::sparse(n, k, support))
}

fn sup_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// `Σ_ξ Λ_s(ξ) v̄(ξ)` for every base state, with `v̄` from value iteration
/// on the explicit depth-`l` look-ahead MDP.
fn augmented_values(mdp: &TabularMdp<f64>, gamma: f64, l: usize) -> Vec<f64> {
    let roots: Vec<usize> = (0..mdp.n_states()).collect();
    let aug = build_augmented_mdp(mdp, &roots, l, DEFAULT_BUDGET).unwrap();
    let v = value_iteration_discounted(&aug.mdp, gamma, 1e-10).unwrap().values;
    (0..mdp.n_states()).map(|s| aug.expectation_at(mdp, s, &v, DEFAULT_BUDGET).unwrap()).collect()
}

#[test]
fn criterion_01_sorting_trick_matches_enumeration() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mut worst = 0.0f64;
    let mut evaluations = 0;
    for _ in 0..200 {
        let mdp = random_instance(&mut rng, 4, 3);
        for _ in 0..20 {
            let u = random_scores(&mut rng, mdp.n_states(), mdp.n_actions());
            for s in 0..mdp.n_states() {
                let gap = (expected_max_sorted(&mdp, s, &u) - expected_max_bruteforce(&mdp, s, &u, DEFAULT_BUDGET).unwrap()).abs();
                worst = worst.max(gap);
                evaluations += 1;
            }
        }
    }
    let mut exact_mismatches = 0;
    for _ in 0..40 {
        let n = rng.gen_range(1..=4);
        let k = rng.gen_range(1..=3);
        let support = rng.gen_range(1..=n);
        let mdp = random_rational_mdp(&mut rng, RandomMdpSpec::sparse(n, k, support));
        for _ in 0..5 {
            let u: Vec<Vec<BigRational>> = (0..n)
                .map(|_| (0..k).map(|_| BigRational::new(rng.gen_range(0..100).into(), rng.gen_range(1..20).into())).collect())
                .collect();
            for s in 0..n {
                if expected_max_sorted(&mdp, s, &u) != expected_max_bruteforce(&mdp, s, &u, DEFAULT_BUDGET).unwrap() {
                    exact_mismatches += 1;
                }
            }
        }
    }
    verdict(
        1,
        "sorting-trick oracle equivalence",
        worst <= 1e-10 && exact_mismatches == 0,
        format!("max |sorted - brute| = {worst:.2e} over {evaluations} float evaluations, {exact_mismatches} rational mismatches"),
        start,
    );
}

fn tower_instances() -> Vec<(TabularMdp<f64>, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    (0..100).map(|i| (random_instance(&mut rng, 4, 3), if i % 2 == 0 { 0.5 } else { 0.9 })).collect()
}

#[test]
fn criterion_02_tower_rule_against_augmented_mdp() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (mdp, gamma) in tower_instances() {
        let reduced = solve_onestep_discounted(&mdp, gamma, 1e-10).unwrap().values;
        worst = worst.max(sup_gap(&reduced, &augmented_values(&mdp, gamma, 1)));
    }
    verdict(2, "tower rule vs augmented value iteration", worst <= 1e-6, format!("max gap {worst:.2e} on 100 instances"), start);
}

#[test]
fn criterion_03_constraint_generation_matches_fixed_point() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    let mut infeasible = 0;
    let mut max_rounds = 0;
    for (i, (mdp, gamma)) in tower_instances().into_iter().enumerate() {
        let fixed = solve_onestep_discounted(&mdp, gamma, 1e-11).unwrap().values;
        match solve_onestep_discounted_cg(&mdp, gamma, None) {
            Ok(sol) => {
                worst = worst.max(sup_gap(&sol.values, &fixed));
                max_rounds = max_rounds.max(sol.iterations);
            }
            Err(e) => failures.push(format!("instance {i}: {e}")),
        }
        if matches!(separation_oracle(&mdp, gamma, &fixed), Separation::Violated(_)) {
            infeasible += 1;
        }
    }
    verdict(
        3,
        "constraint generation vs fixed point",
        worst <= 1e-6 && failures.is_empty() && infeasible == 0,
        format!("max gap {worst:.2e}, most rounds {max_rounds}, {} cap hits {failures:?}, {infeasible} fixed points cut", failures.len()),
        start,
    );
}

fn permutations(items: &[(usize, usize)]) -> Vec<Vec<(usize, usize)>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

#[test]
fn criterion_04_sorted_ordering_is_tightest() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1004);
    let shapes = [(2, 2), (3, 2), (2, 3), (6, 1), (1, 6), (3, 1), (1, 3), (2, 1)];
    let mut orderings = 0usize;
    let mut worst_excess = f64::NEG_INFINITY;
    for round in 0..24 {
        let (n, k) = shapes[round % shapes.len()];
        let mdp = random_mdp(&mut rng, RandomMdpSpec::dense(n, k));
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..5.0)).collect();
        for s in 0..n {
            let u = score_table(&mdp, s, &0.9, &v);
            let rhs = |m: &[(usize, usize)]| -> f64 {
                let (mu, _) = event_probabilities(&mdp, s, m);
                mu.iter().zip(m).map(|(w, &(t, a))| w * u[t][a]).sum()
            };
            let best = rhs(&sorted_ordering(&u));
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|t| (0..k).map(move |a| (t, a))).collect();
            for m in permutations(&pairs) {
                worst_excess = worst_excess.max(rhs(&m) - best);
                orderings += 1;
            }
        }
    }
    verdict(
        4,
        "tightest ordering by exhaustive enumeration",
        worst_excess <= 1e-12,
        format!("{orderings} orderings, max excess over the sorted ordering {worst_excess:.2e}"),
        start,
    );
}

#[test]
fn criterion_05_average_reward_against_augmented_mdp() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1005);
    let mut worst = 0.0f64;
    let mut solved = 0;
    while solved < 50 {
        let mdp = random_instance(&mut rng, 4, 3);
        if !check_unichain_exhaustive(&mdp, DEFAULT_BUDGET).unwrap().unichain {
            continue;
        }
        let reduced = solve_onestep_average(&mdp).unwrap().gain;
        let roots: Vec<usize> = (0..mdp.n_states()).collect();
        let aug = build_augmented_mdp(&mdp, &roots, 1, DEFAULT_BUDGET).unwrap();
        let brute = average_reward_solve(&aug.mdp).unwrap().gain;
        worst = worst.max((reduced - brute).abs());
        solved += 1;
    }
    verdict(5, "average-reward equivalence", worst <= 1e-6, format!("max gain gap {worst:.2e} on 50 unichain instances"), start);
}

#[test]
fn criterion_06_depth_two_kernel_matches_simulator() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1006);
    let samples = 100_000;
    let mut worst_tv = 0.0f64;
    let mut worst_row = 0.0f64;
    for _ in 0..20 {
        let n = rng.gen_range(2..=3);
        let support = rng.gen_range(1..=n);
        let mdp = random_mdp(&mut rng, RandomMdpSpec::sparse(n, 2, support));
        let roots: Vec<usize> = (0..n).collect();
        let aug = build_augmented_mdp(&mdp, &roots, 2, DEFAULT_BUDGET).unwrap();
        for a in 0..2 {
            for i in 0..aug.mdp.n_states() {
                let total: f64 = aug.mdp.row(a, i).iter().map(|(_, p)| p).sum();
                worst_row = worst_row.max((total - 1.0).abs());
            }
        }
        let xi = sample_initial(&mdp, rng.gen_range(0..n), 2, &mut rng);
        let i = aug.index_of(&xi).expect("sampled tree is reachable");
        for a in 0..2 {
            let mut counts: HashMap<usize, usize> = HashMap::new();
            for _ in 0..samples {
                let (next, _) = simulate_step(&mdp, &xi, a, &mut rng);
                *counts.entry(aug.index_of(&next).expect("successor reachable")).or_default() += 1;
            }
            let mut tv = 0.0;
            for (j, p) in aug.mdp.row(a, i) {
                tv += (p - counts.remove(j).unwrap_or(0) as f64 / samples as f64).abs();
            }
            tv += counts.values().map(|c| *c as f64 / samples as f64).sum::<f64>();
            worst_tv = worst_tv.max(tv / 2.0);
        }
    }
    verdict(
        6,
        "depth-2 kernel vs simulator",
        worst_tv <= 0.02 && worst_row <= 1e-12,
        format!("max TV {worst_tv:.4} at 1e5 samples, max row-sum error {worst_row:.1e}"),
        start,
    );
}

#[test]
fn criterion_07_information_monotonicity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1007);
    let mut worst_drop = 0.0f64;
    for (mdp, gamma) in tower_instances() {
        let classic = value_iteration_discounted(&mdp, gamma, 1e-11).unwrap().values;
        let one = solve_onestep_discounted(&mdp, gamma, 1e-11).unwrap().values;
        worst_drop = worst_drop.max(classic.iter().zip(&one).fold(0.0, |m, (c, o)| m.max(c - o)));
    }
    let mut worst_det = 0.0f64;
    for _ in 0..30 {
        let n = rng.gen_range(1..=4);
        let k = rng.gen_range(1..=3);
        let mdp = random_deterministic_mdp(&mut rng, n, k);
        let classic = value_iteration_discounted(&mdp, 0.9, 1e-11).unwrap().values;
        let one = solve_onestep_discounted(&mdp, 0.9, 1e-11).unwrap().values;
        worst_det = worst_det.max(sup_gap(&classic, &one));
    }
    let mut worst_two = 0.0f64;
    for i in 0..20 {
        let n = rng.gen_range(1..=3);
        let k = rng.gen_range(1..=3);
        let support = rng.gen_range(1..=n.min(2));
        let mdp = random_mdp(&mut rng, RandomMdpSpec::sparse(n, k, support));
        let gamma = if i % 2 == 0 { 0.5 } else { 0.9 };
        let one = solve_onestep_discounted(&mdp, gamma, 1e-11).unwrap().values;
        let two = augmented_values(&mdp, gamma, 2);
        worst_two = worst_two.max(one.iter().zip(&two).fold(0.0, |m, (o, t)| m.max(o - t)));
    }
    verdict(
        7,
        "information monotonicity",
        worst_drop <= 1e-9 && worst_det <= 1e-9 && worst_two <= 1e-6,
        format!("max v0 - v1 = {worst_drop:.1e}, deterministic gap {worst_det:.1e}, max v1 - v2 = {worst_two:.1e}"),
        start,
    );
}

#[test]
fn criterion_08_renewal_identity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1008);
    let gammas = [0.5, 0.75, 0.9, 0.99];
    let mut worst = 0.0f64;
    for i in 0..100 {
        let n = rng.gen_range(1..=5);
        let k = rng.gen_range(1..=3);
        let support = rng.gen_range(1..=n);
        let mdp = random_mdp(&mut rng, RandomMdpSpec::sparse(n, k, support));
        let pi = random_policy(&mut rng, n, k);
        let s0 = rng.gen_range(0..n);
        worst = worst.max(verify_renewal_identity(&mdp, &gammas[i % 4], s0, &pi).unwrap());
    }
    let mut nonzero = 0;
    for i in 0..10 {
        let n = rng.gen_range(1..=4);
        let k = rng.gen_range(1..=2);
        let mdp = random_rational_mdp(&mut rng, RandomMdpSpec::sparse(n, k, 2));
        let pi = random_rational_policy(&mut rng, n, k);
        let gamma = BigRational::new((i as i64 % 3 + 1).into(), 4.into());
        if !verify_renewal_identity(&mdp, &gamma, 0, &pi).unwrap().is_zero() {
            nonzero += 1;
        }
    }
    verdict(
        8,
        "renewal identity",
        worst <= 1e-8 && nonzero == 0,
        format!("max float residual {worst:.2e} on 100 triples, {nonzero} nonzero rational residuals on 10"),
        start,
    );
}

#[test]
fn criterion_09_decision_transfer() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1009);
    let mut comparisons = 0;
    let mut disagreements = Vec::new();
    let mut tightest = f64::INFINITY;
    for i in 0..20 {
        let l = [0, 0, 1, 1, 2][i % 5];
        let n = rng.gen_range(2..=3);
        let k = if l == 2 { 2 } else { rng.gen_range(1..=3) };
        let mdp = random_mdp(&mut rng, RandomMdpSpec::sparse(n, k, 2));
        let gamma = [0.5, 0.75, 0.9][i % 3];
        let s0 = 0;
        let reset = if l == 0 {
            reset_transform(&mdp, &gamma, s0).unwrap()
        } else {
            let aug = build_augmented_mdp(&mdp, &[s0], l, DEFAULT_BUDGET).unwrap();
            reset_transform_augmented(&aug, &mdp, &gamma, s0, DEFAULT_BUDGET).unwrap()
        };
        let v = decide_dvdp(&mdp, l, s0, gamma, 0.0, DEFAULT_BUDGET).unwrap().value;
        for delta in [-1e-2, -1e-4, 1e-4, 1e-2] {
            let theta = v + delta;
            let d = decide_dvdp(&mdp, l, s0, gamma, theta, DEFAULT_BUDGET).unwrap();
            let a = decide_ardp(&reset, 0, (1.0 - gamma) * theta, DEFAULT_BUDGET).unwrap();
            tightest = tightest.min(a.margin.abs());
            comparisons += 1;
            if d.decision != a.decision {
                disagreements.push((i, l, delta));
            }
        }
    }
    verdict(
        9,
        "decision transfer through the reset",
        disagreements.is_empty(),
        format!("{comparisons} comparisons at depths 0-2, smallest gain margin {tightest:.1e}, disagreements {disagreements:?}"),
        start,
    );
}

#[test]
fn criterion_10_gadget_integrity_and_separation() {
    let start = Instant::now();
    let mut problems = Vec::new();
    for (name, graph, k) in [("k4", fixtures::k4(), 2), ("k33", fixtures::k33(), 3), ("q3", fixtures::q3(), 4), ("petersen", fixtures::petersen(), 4)] {
        let inst = build_gadget_mdp(&graph, k, None).unwrap();
        let integrity = check_integrity(&inst).unwrap();
        if !(integrity.rows_exact && integrity.means_equal_mu && integrity.edge_atoms_exact) {
            problems.push(format!("{name}: integrity {integrity:?}"));
        }
        for v in 1..=graph.n {
            if xv_law(&inst, v).unwrap().mean() != inst.mu {
                problems.push(format!("{name}: E[X_{v}] != mu"));
            }
        }
    }
    let k4 = build_gadget_mdp(&fixtures::k4(), 2, None).unwrap();
    let sound = verify_separation(&k4).unwrap();
    if !(sound.lemma.lemma == "soundness" && sound.lemma.passed && sound.lemma.subsets_checked == 6) {
        problems.push(format!("k4 soundness {:?}", sound.lemma));
    }
    let k33 = build_gadget_mdp(&fixtures::k33(), 3, None).unwrap();
    let complete = verify_separation(&k33).unwrap();
    if !(complete.lemma.lemma == "completeness" && complete.lemma.passed) {
        problems.push(format!("k33 completeness {:?}", complete.lemma));
    }
    let t = &k33.thresholds;
    if !(t.soundness < t.completeness) {
        problems.push("k33: soundness not below completeness at the instance discount".into());
    }
    // The exact threshold is where the two bounds meet, so strictness can only
    // hold above it; the instance discount is the dyadic just above.
    let (s_min, c_min) = bounds_at(&k33, &t.gamma_min);
    let tie_at_threshold = s_min == c_min;
    if !tie_at_threshold || !(t.gamma > t.gamma_min) {
        problems.push("k33: bounds do not meet at the exact threshold".into());
    }
    let waiting = waiting_policy_value(&k33, &[1, 2, 3]).unwrap();
    if !(waiting.matches_closed_form && waiting.meets_completeness_bound && waiting.renewal_identity_exact) {
        problems.push(format!("k33 waiting policy {waiting:?}"));
    }
    let slack = ((&t.completeness - &t.soundness) / &t.soundness).to_f64().unwrap_or(f64::NAN);
    verdict(
        10,
        "gadget integrity and separation",
        problems.is_empty(),
        format!(
            "4 fixtures exact; K4 soundness over 6 subsets; K33 completeness; relative separation {slack:.2e} at gamma = {} \
             (dyadic above the exact threshold, where the bounds are equal: {tie_at_threshold}); \
             separated at the first-order threshold: {}; problems {problems:?}",
            t.gamma, t.separated_at_linearized
        ),
        start,
    );
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["mdplook"];
    full.extend_from_slice(args);
    let code = cli::run(full, &mut out, &mut err);
    (code, out)
}

#[test]
fn criterion_11_reproducible_reports() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1011);
    let mdp = random_mdp(&mut rng, RandomMdpSpec::sparse(3, 2, 2)).with_discount(0.9);
    let input = dir.path().join("m.json");
    mdplook::io::save_mdp(&mdp, &input).unwrap();
    let input = input.to_str().unwrap();
    let commands: Vec<Vec<&str>> = vec![
        vec!["validate", "--input", input],
        vec!["augment", "--input", input, "--lookahead", "2"],
        vec!["plan", "--input", input, "--lookahead", "1", "--theta", "1.5"],
        vec!["plan", "--input", input, "--lookahead", "1", "--method", "cg-lp"],
        vec!["plan", "--input", input, "--lookahead", "2", "--method", "augmented-brute", "--criterion", "average"],
        vec!["oracle", "--seed", "7", "--trials", "10"],
        vec!["gadget", "--fixture", "k4", "--k", "2", "--verify"],
        vec!["reset", "--input", input, "--gamma", "3/4", "--state", "s0"],
    ];
    let mut mismatches = Vec::new();
    for args in &commands {
        let (c1, first) = run_cli(args);
        let (c2, second) = run_cli(args);
        let mut threaded = vec!["--threads", "3"];
        threaded.extend_from_slice(args);
        let (c3, third) = run_cli(&threaded);
        if c1 != 0 || c1 != c2 || c1 != c3 || first != second || first != third {
            mismatches.push(args[0].to_string());
        }
    }
    verdict(
        11,
        "reproducible CLI reports",
        mismatches.is_empty(),
        format!("{} commands run three times (one with 3 threads), mismatches {mismatches:?}", commands.len()),
        start,
    );
}

#[test]
fn initial_law_sums_to_one_on_instances_used_above() {
    let mut rng = ChaCha8Rng::seed_from_u64(1012);
    let mdp = random_mdp(&mut rng, RandomMdpSpec::sparse(3, 2, 2));
    for s in 0..3 {
        let law = initial_lookahead_distribution(&mdp, s, 2, DEFAULT_BUDGET).unwrap();
        assert!((law.total() - 1.0).abs() < 1e-12);
    }
}
