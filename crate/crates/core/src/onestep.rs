//! One-step look-ahead planning without building the augmented MDP.
//!
//! With `ℓ = 1` the agent sees the whole next-state vector `p` before
//! acting, and `p ~ P̄(·|s) = ∏_a P_a(·|s)`. The reduced Bellman operator
//! needs `E_p[max_a u(p(a), a)]`; sorting the `(s', a)` pairs by `u` turns
//! that expectation into a sum over "first matching pair" events whose
//! probabilities have a product form.

use rayon::prelude::*;
use serde::Serialize;

use crate::budget::saturating_pow;
use crate::error::{Error, Result};
use crate::lookahead::AugmentedMdp;
use crate::lp::{solve_lp, Constraint, LpOutcome, Sense};
use crate::mdp::{Policy, TabularMdp};
use crate::planners::{contraction_fixed_point, relative_fixed_point, RVI_TOLERANCE};
use crate::scalar::Scalar;

/// `p[a]` is the state action `a` would lead to.
pub type NextStateVector = Vec<usize>;

/// A list of `(state, action)` pairs; a permutation of all pairs when
/// produced by [`sorted_ordering`].
pub type Ordering = Vec<(usize, usize)>;

/// Feasibility tolerance for separation.
pub const SEPARATION_TOL: f64 = 1e-9;

/// `P̄(p|s) = ∏_a P_a(p(a)|s)`.
pub fn product_lookahead_prob<T: Scalar>(mdp: &TabularMdp<T>, s: usize, p: &[usize]) -> Result<T> {
    mdp.check_state(s)?;
    if p.len() != mdp.n_actions() {
        return Err(Error::InvalidInput(format!("next-state vector has {} entries, expected {}", p.len(), mdp.n_actions())));
    }
    for &t in p {
        mdp.check_state(t)?;
    }
    Ok(p.iter().enumerate().fold(T::one(), |acc, (a, &t)| acc * mdp.prob(a, s, t)))
}

/// All next-state vectors with positive probability, last action fastest.
pub fn next_state_support<T: Scalar>(mdp: &TabularMdp<T>, s: usize, budget: u64) -> Result<Vec<(NextStateVector, T)>> {
    let k = mdp.n_actions();
    let full = saturating_pow(mdp.n_states() as u64, k as u64);
    if full > budget {
        return Err(Error::BudgetExceeded { what: "next-state vector enumeration", limit: budget, required: full });
    }
    let mut out = vec![(Vec::with_capacity(k), T::one())];
    for a in 0..k {
        let mut next = Vec::with_capacity(out.len() * mdp.row(a, s).len());
        for (p, q) in &out {
            for (t, w) in mdp.row(a, s) {
                let mut v = p.clone();
                v.push(*t);
                next.push((v, q.clone() * w.clone()));
            }
        }
        out = next;
    }
    Ok(out)
}

/// `E_{p ~ P̄(·|s)}[max_a u[p(a)][a]]` by enumerating every vector.
pub fn expected_max_bruteforce<T: Scalar>(mdp: &TabularMdp<T>, s: usize, u: &[Vec<T>], budget: u64) -> Result<T> {
    mdp.check_state(s)?;
    Ok(next_state_support(mdp, s, budget)?.into_iter().fold(T::zero(), |acc, (p, q)| {
        let best = p
            .iter()
            .enumerate()
            .map(|(a, &t)| u[t][a].clone())
            .reduce(|x, y| if y > x { y } else { x })
            .expect("at least one action");
        acc + q * best
    }))
}

/// All pairs sorted by score, descending; ties by (state, action).
pub fn sorted_ordering<T: Scalar>(u: &[Vec<T>]) -> Ordering {
    let mut pairs: Ordering = (0..u.len()).flat_map(|t| (0..u[t].len()).map(move |a| (t, a))).collect();
    sort_pairs(&mut pairs, |t, a| &u[t][a]);
    pairs
}

fn sort_pairs<'a, T: Scalar>(pairs: &mut [(usize, usize)], score: impl Fn(usize, usize) -> &'a T) {
    pairs.sort_by(|x, y| {
        score(y.0, y.1)
            .partial_cmp(score(x.0, x.1))
            .expect("finite scores")
            .then(x.cmp(y))
    });
}

/// `μ(i | m, P̄(·|s))` for every position of `m`, plus the probability that
/// no pair of `m` is matched by `p`.
///
/// `μ(i) = P_{a_i}(s_i|s) · ∏_{a ≠ a_i} (1 − F_a(i))` where `F_a(i)` is the
/// kernel mass of the states paired with `a` before position `i`.
pub fn event_probabilities<T: Scalar>(mdp: &TabularMdp<T>, s: usize, m: &[(usize, usize)]) -> (Vec<T>, T) {
    let k = mdp.n_actions();
    let mut forbidden = vec![T::zero(); k];
    let mut mu = Vec::with_capacity(m.len());
    for &(t, a) in m {
        let mass = mdp.prob(a, s, t);
        let others = (0..k)
            .filter(|&b| b != a)
            .fold(T::one(), |acc, b| acc * (T::one() - forbidden[b].clone()));
        mu.push(mass.clone() * others);
        forbidden[a] = forbidden[a].clone() + mass;
    }
    let unmatched = forbidden.into_iter().fold(T::one(), |acc, f| acc * (T::one() - f));
    (mu, unmatched)
}

/// Probability that pair `m[i]` is the first one matched by `p` (0-based `i`).
pub fn event_probability<T: Scalar>(mdp: &TabularMdp<T>, s: usize, m: &[(usize, usize)], i: usize) -> Result<T> {
    if i >= m.len() {
        return Err(Error::InvalidInput(format!("position {i} outside an ordering of length {}", m.len())));
    }
    Ok(event_probabilities(mdp, s, &m[..=i]).0.pop().expect("nonempty"))
}

/// Pairs `(s', a)` with `P_a(s'|s) > 0`; only these can be matched.
fn support_pairs<T: Scalar>(mdp: &TabularMdp<T>, s: usize) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> =
        (0..mdp.n_actions()).flat_map(|a| mdp.row(a, s).iter().map(move |(t, _)| (*t, a))).collect();
    pairs.sort_unstable();
    pairs
}

fn assert_no_residual<T: Scalar>(unmatched: &T) {
    assert!(
        unmatched.abs() <= T::row_tolerance() * T::from_f64(16.0).expect("small constant"),
        "ordering left unmatched mass {unmatched}"
    );
}

/// Sorting-trick evaluation of `E_p[max_a u[p(a)][a]]`.
pub fn expected_max_sorted<T: Scalar>(mdp: &TabularMdp<T>, s: usize, u: &[Vec<T>]) -> T {
    let mut pairs = support_pairs(mdp, s);
    sort_pairs(&mut pairs, |t, a| &u[t][a]);
    let (mu, unmatched) = event_probabilities(mdp, s, &pairs);
    assert_no_residual(&unmatched);
    mu.into_iter().zip(&pairs).fold(T::zero(), |acc, (w, &(t, a))| acc + w * u[t][a].clone())
}

/// `u_{v,s}(s', a) = r(s,a) + w·v(s')`.
pub fn score_table<T: Scalar>(mdp: &TabularMdp<T>, s: usize, weight: &T, v: &[T]) -> Vec<Vec<T>> {
    v.iter()
        .map(|vt| (0..mdp.n_actions()).map(|a| mdp.reward(s, a).clone() + weight.clone() * vt.clone()).collect())
        .collect()
}

/// A sorted-ordering constraint `lhs(s) ≥ Σ_{s'} c_{s'}·w·v(s') + b`, with
/// `lhs = v(s)` for the discounted LP and `g + h(s)` for the average one.
#[derive(Clone, Debug, Serialize)]
pub struct Cut {
    pub state: usize,
    pub ordering: Ordering,
    /// Aggregated event mass per successor state.
    pub coefficients: Vec<f64>,
    /// `Σ_i μ(i) r(s, a_i)`.
    pub reward_term: f64,
    /// Right-hand side minus left-hand side at the candidate (positive = violated).
    pub violation: f64,
}

fn cut_at(mdp: &TabularMdp<f64>, s: usize, weight: f64, v: &[f64], lhs: f64) -> Cut {
    let u = score_table(mdp, s, &weight, v);
    let mut pairs = support_pairs(mdp, s);
    sort_pairs(&mut pairs, |t, a| &u[t][a]);
    let (mu, unmatched) = event_probabilities(mdp, s, &pairs);
    assert_no_residual(&unmatched);
    let mut coefficients = vec![0.0; mdp.n_states()];
    let mut reward_term = 0.0;
    let mut rhs = 0.0;
    for (w, &(t, a)) in mu.iter().zip(&pairs) {
        coefficients[t] += w;
        reward_term += w * mdp.reward(s, a);
        rhs += w * u[t][a];
    }
    Cut { state: s, ordering: pairs, coefficients, reward_term, violation: rhs - lhs }
}

#[derive(Clone, Debug, Serialize)]
pub enum Separation {
    Feasible,
    Violated(Cut),
}

/// Checks `v(s) ≥ Σ_i μ(i|m_u, P̄(·|s)) u_{v,s}(m_u(i))` for each state with
/// the score-sorted ordering, which gives the tightest constraint of the family.
pub fn separation_oracle(mdp: &TabularMdp<f64>, gamma: f64, v: &[f64]) -> Separation {
    violated_cuts(mdp, gamma, v, |s| v[s]).into_iter().next().map_or(Separation::Feasible, Separation::Violated)
}

fn violated_cuts(mdp: &TabularMdp<f64>, weight: f64, v: &[f64], lhs: impl Fn(usize) -> f64) -> Vec<Cut> {
    (0..mdp.n_states())
        .map(|s| cut_at(mdp, s, weight, v, lhs(s)))
        .filter(|c| c.violation > SEPARATION_TOL * (1.0 + lhs(c.state).abs()))
        .collect()
}

/// `(T v)(s) = E_{p ~ P̄(·|s)}[max_a {r(s,a) + γ v(p(a))}]`.
pub fn reduced_bellman_operator<T: Scalar>(mdp: &TabularMdp<T>, gamma: &T, v: &[T]) -> Vec<T> {
    (0..mdp.n_states())
        .into_par_iter()
        .map(|s| expected_max_sorted(mdp, s, &score_table(mdp, s, gamma, v)))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct OnestepSolution {
    pub values: Vec<f64>,
    pub method: &'static str,
    pub iterations: usize,
    /// `‖T v − v‖∞` under the reduced operator.
    pub residual: f64,
    pub oracle_calls: usize,
    pub constraints: usize,
}

fn sup_residual(mdp: &TabularMdp<f64>, gamma: f64, v: &[f64]) -> f64 {
    reduced_bellman_operator(mdp, &gamma, v).iter().zip(v).fold(0.0, |m, (t, x)| m.max((t - x).abs()))
}

/// Fixed point of the reduced operator within `ε` in sup norm.
pub fn solve_onestep_discounted(mdp: &TabularMdp<f64>, gamma: f64, epsilon: f64) -> Result<OnestepSolution> {
    if !(gamma > 0.0 && gamma < 1.0) || epsilon <= 0.0 {
        return Err(Error::InvalidInput(format!("need γ in (0,1) and ε > 0, got γ = {gamma}, ε = {epsilon}")));
    }
    let (values, iterations, _) =
        contraction_fixed_point(vec![0.0; mdp.n_states()], gamma, epsilon, "reduced value iteration", |v| {
            reduced_bellman_operator(mdp, &gamma, v)
        })?;
    let residual = sup_residual(mdp, gamma, &values);
    Ok(OnestepSolution { values, method: "sorted-vi", iterations, residual, oracle_calls: 0, constraints: 0 })
}

/// Constraint generation on `min (1−γ) Σ μ_w(s) v(s)` over the sorted
/// constraints, starting from the box `0 ≤ v ≤ R_max/(1−γ)`.
pub fn solve_onestep_discounted_cg(
    mdp: &TabularMdp<f64>,
    gamma: f64,
    weights: Option<&[f64]>,
) -> Result<OnestepSolution> {
    let n = mdp.n_states();
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidInput(format!("discount {gamma} is not in (0, 1)")));
    }
    let uniform = vec![1.0 / n as f64; n];
    let weights = weights.unwrap_or(&uniform);
    if weights.len() != n || weights.iter().any(|w| *w <= 0.0) {
        return Err(Error::InvalidInput("LP weights must be strictly positive, one per state".into()));
    }
    let objective: Vec<f64> = weights.iter().map(|w| (1.0 - gamma) * w).collect();
    let upper = mdp.r_max() / (1.0 - gamma);
    let mut constraints: Vec<Constraint> = (0..n)
        .map(|s| {
            let mut c = vec![0.0; n];
            c[s] = 1.0;
            Constraint { coefficients: c, sense: Sense::Le, rhs: upper }
        })
        .collect();
    let cap = 10 * n * mdp.n_actions() * n;
    let mut oracle_calls = 0;
    let mut last = vec![0.0; n];
    for round in 1..=cap {
        let v = match solve_lp(&objective, &constraints)? {
            LpOutcome::Optimal { x, .. } => x,
            other => return Err(Error::InvalidInput(format!("restricted LP ended as {other:?}"))),
        };
        oracle_calls += 1;
        let cuts = violated_cuts(mdp, gamma, &v, |s| v[s]);
        if cuts.is_empty() {
            let residual = sup_residual(mdp, gamma, &v);
            return Ok(OnestepSolution {
                values: v,
                method: "cg-lp",
                iterations: round,
                residual,
                oracle_calls,
                constraints: constraints.len(),
            });
        }
        for cut in cuts {
            // v(s) − γ Σ c_{s'} v(s') ≥ Σ μ r
            let mut c: Vec<f64> = cut.coefficients.iter().map(|x| -gamma * x).collect();
            c[cut.state] += 1.0;
            constraints.push(Constraint { coefficients: c, sense: Sense::Ge, rhs: cut.reward_term });
        }
        last = v;
    }
    Err(Error::NotConverged { what: "constraint generation", iterations: cap, last_iterate: last })
}

/// `v̄*(s, p) = max_a {r(s,a) + γ v*(p(a))}`.
pub fn augmented_value(mdp: &TabularMdp<f64>, gamma: f64, v: &[f64], s: usize, p: &[usize]) -> f64 {
    (0..mdp.n_actions()).map(|a| mdp.reward(s, a) + gamma * v[p[a]]).fold(f64::NEG_INFINITY, f64::max)
}

/// Argmax of [`augmented_value`], smallest action on ties.
pub fn greedy_lookahead_action(mdp: &TabularMdp<f64>, gamma: f64, v: &[f64], s: usize, p: &[usize]) -> usize {
    let mut best = 0;
    let mut best_q = mdp.reward(s, 0) + gamma * v[p[0]];
    for a in 1..mdp.n_actions() {
        let q = mdp.reward(s, a) + gamma * v[p[a]];
        if q > best_q {
            best = a;
            best_q = q;
        }
    }
    best
}

/// The greedy look-ahead policy on the states of a depth-1 augmented MDP.
pub fn greedy_lookahead_policy(
    mdp: &TabularMdp<f64>,
    gamma: f64,
    v: &[f64],
    augmented: &AugmentedMdp<f64>,
) -> Result<Policy<f64>> {
    if augmented.depth != 1 {
        return Err(Error::InvalidInput("greedy look-ahead policy needs a depth-1 augmented MDP".into()));
    }
    Ok(Policy::Deterministic(
        augmented
            .states
            .iter()
            .map(|xi| {
                let p: Vec<usize> = xi.block(1).iter().map(|&t| t as usize).collect();
                greedy_lookahead_action(mdp, gamma, v, xi.root(), &p)
            })
            .collect(),
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct OnestepAverage {
    pub gain: f64,
    pub bias: Vec<f64>,
    pub method: &'static str,
    pub iterations: usize,
    /// `max_s |g + h(s) − E_p[max_a {r(s,a) + h(p(a))}]|`.
    pub residual: f64,
    pub oracle_calls: usize,
    pub constraints: usize,
}

pub fn average_reduced_residual(mdp: &TabularMdp<f64>, gain: f64, bias: &[f64]) -> f64 {
    reduced_bellman_operator(mdp, &1.0, bias).iter().zip(bias).fold(0.0, |m, (t, h)| m.max((gain + h - t).abs()))
}

/// Relative value iteration on the reduced average-reward operator.
/// The unichain precondition is the caller's.
pub fn solve_onestep_average(mdp: &TabularMdp<f64>) -> Result<OnestepAverage> {
    let (gain, bias, iterations, _) =
        relative_fixed_point(mdp.n_states(), RVI_TOLERANCE, "reduced relative value iteration", |h| {
            reduced_bellman_operator(mdp, &1.0, h)
        })?;
    let residual = average_reduced_residual(mdp, gain, &bias);
    Ok(OnestepAverage { gain, bias, method: "sorted-vi", iterations, residual, oracle_calls: 0, constraints: 0 })
}

/// Constraint generation on `min g` s.t. `g + h(s) ≥ Σ_i μ(i)(r(s,a_i) + h(s_i))`,
/// `0 ≤ g ≤ R_max`, `h(0) = 0`, with `h` split into nonnegative parts.
pub fn solve_onestep_average_cg(mdp: &TabularMdp<f64>) -> Result<OnestepAverage> {
    let n = mdp.n_states();
    // variables: g, then (h⁺_s, h⁻_s) for s = 1..n
    let width = 1 + 2 * (n - 1);
    let mut objective = vec![0.0; width];
    objective[0] = 1.0;
    let mut g_box = vec![0.0; width];
    g_box[0] = 1.0;
    let mut constraints = vec![Constraint { coefficients: g_box, sense: Sense::Le, rhs: *mdp.r_max() }];
    let unpack = |x: &[f64]| -> (f64, Vec<f64>) {
        let mut h = vec![0.0; n];
        for s in 1..n {
            h[s] = x[2 * s - 1] - x[2 * s];
        }
        (x[0], h)
    };
    let cap = 10 * n * mdp.n_actions() * n;
    let mut oracle_calls = 0;
    let mut last = vec![0.0; n];
    for round in 1..=cap {
        let x = match solve_lp(&objective, &constraints)? {
            LpOutcome::Optimal { x, .. } => x,
            other => return Err(Error::InvalidInput(format!("restricted LP ended as {other:?}"))),
        };
        let (g, h) = unpack(&x);
        oracle_calls += 1;
        let cuts = violated_cuts(mdp, 1.0, &h, |s| g + h[s]);
        if cuts.is_empty() {
            let residual = average_reduced_residual(mdp, g, &h);
            return Ok(OnestepAverage {
                gain: g,
                bias: h,
                method: "cg-lp",
                iterations: round,
                residual,
                oracle_calls,
                constraints: constraints.len(),
            });
        }
        for cut in cuts {
            let mut hc: Vec<f64> = cut.coefficients.iter().map(|x| -x).collect();
            hc[cut.state] += 1.0;
            let mut c = vec![0.0; width];
            c[0] = 1.0;
            for s in 1..n {
                c[2 * s - 1] = hc[s];
                c[2 * s] = -hc[s];
            }
            constraints.push(Constraint { coefficients: c, sense: Sense::Ge, rhs: cut.reward_term });
        }
        last = h;
    }
    Err(Error::NotConverged { what: "average-reward constraint generation", iterations: cap, last_iterate: last })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{random_deterministic_mdp, random_mdp, random_rational_mdp, RandomMdpSpec};
    use num_rational::BigRational;
    use num_traits::Zero;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn names(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    /// states {x, y}, two actions, both rows from x uniform
    fn uniform_pair() -> TabularMdp<f64> {
        TabularMdp::new(
            names("s", 2),
            names("a", 2),
            vec![vec![vec![0.5, 0.5], vec![0.0, 1.0]], vec![vec![0.5, 0.5], vec![0.0, 1.0]]],
            vec![vec![0.0; 2]; 2],
        )
        .unwrap()
    }

    #[test]
    fn worked_expected_max_example() {
        let mdp = uniform_pair();
        let u = vec![vec![1.0, 0.0], vec![0.0, 2.0]];
        assert_eq!(expected_max_bruteforce(&mdp, 0, &u, 100).unwrap(), 1.25);
        assert_eq!(expected_max_sorted(&mdp, 0, &u), 1.25);
        let m = sorted_ordering(&u);
        assert_eq!(m[0], (1, 1));
        let (mu, unmatched) = event_probabilities(&mdp, 0, &m);
        assert_eq!(&mu[..2], &[0.5, 0.25]);
        assert_eq!(unmatched, 0.0);
        assert_eq!(event_probability(&mdp, 0, &m, 0).unwrap(), 0.5);
    }

    #[test]
    fn product_probability_of_uniform_rows() {
        let mdp = uniform_pair();
        for p in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            assert_eq!(product_lookahead_prob(&mdp, 0, &p).unwrap(), 0.25);
        }
        assert!(product_lookahead_prob(&mdp, 0, &[0]).is_err());
    }

    #[test]
    fn sorted_matches_bruteforce_exactly_in_rational_mode() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..30 {
            let n = rng.gen_range(1..=4);
            let k = rng.gen_range(1..=3);
            let support = rng.gen_range(1..=n);
            let mdp = random_rational_mdp(&mut rng, RandomMdpSpec::sparse(n, k, support));
            let u: Vec<Vec<BigRational>> = (0..n)
                .map(|_| (0..k).map(|_| BigRational::new(rng.gen_range(0..6).into(), 5.into())).collect())
                .collect();
            for s in 0..n {
                assert_eq!(expected_max_sorted(&mdp, s, &u), expected_max_bruteforce(&mdp, s, &u, 10_000).unwrap());
            }
        }
    }

    #[test]
    fn partition_holds_for_arbitrary_orderings() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let mdp = random_rational_mdp(&mut rng, RandomMdpSpec::sparse(3, 2, 2));
        let mut m: Ordering = (0..3).flat_map(|t| (0..2).map(move |a| (t, a))).collect();
        for _ in 0..10 {
            for i in (1..m.len()).rev() {
                m.swap(i, rng.gen_range(0..=i));
            }
            let (mu, unmatched) = event_probabilities(&mdp, 1, &m);
            assert!(unmatched.is_zero());
            assert_eq!(mu.into_iter().sum::<BigRational>(), BigRational::from_integer(1.into()));
        }
    }

    fn permutations(items: &mut Vec<(usize, usize)>, k: usize, out: &mut Vec<Ordering>) {
        if k == items.len() {
            out.push(items.clone());
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permutations(items, k + 1, out);
            items.swap(k, i);
        }
    }

    #[test]
    fn sorted_ordering_is_tightest() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for (n, k) in [(2, 2), (3, 2), (2, 3)] {
            let mdp = random_mdp(&mut rng, RandomMdpSpec::dense(n, k));
            let v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 5.0).collect();
            let mut all = Vec::new();
            permutations(&mut (0..n).flat_map(|t| (0..k).map(move |a| (t, a))).collect(), 0, &mut all);
            for s in 0..n {
                let u = score_table(&mdp, s, &0.9, &v);
                let rhs = |m: &Ordering| {
                    let (mu, _) = event_probabilities(&mdp, s, m);
                    mu.iter().zip(m).map(|(w, &(t, a))| w * u[t][a]).sum::<f64>()
                };
                let best = rhs(&sorted_ordering(&u));
                assert!(all.iter().all(|m| rhs(m) <= best + 1e-12));
            }
        }
    }

    #[test]
    fn zero_values_give_max_reward() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let mdp = random_mdp(&mut rng, RandomMdpSpec::dense(3, 3));
        let t = reduced_bellman_operator(&mdp, &0.9, &[0.0; 3]);
        for s in 0..3 {
            let best = mdp.rewards()[s].iter().cloned().fold(0.0, f64::max);
            assert!((t[s] - best).abs() < 1e-15);
        }
    }

    #[test]
    fn deterministic_instances_reduce_to_classical_bellman() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let mdp = random_deterministic_mdp(&mut rng, 4, 3);
        let v = vec![1.0, 0.5, 2.0, 0.0];
        assert_eq!(reduced_bellman_operator(&mdp, &0.8, &v), crate::planners::bellman_operator(&mdp, 0.8, &v));
    }

    #[test]
    fn contraction_in_sup_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        let mdp = random_mdp(&mut rng, RandomMdpSpec::dense(4, 3));
        for _ in 0..20 {
            let v: Vec<f64> = (0..4).map(|_| rng.gen::<f64>() * 10.0).collect();
            let w: Vec<f64> = (0..4).map(|_| rng.gen::<f64>() * 10.0).collect();
            let tv = reduced_bellman_operator(&mdp, &0.9, &v);
            let tw = reduced_bellman_operator(&mdp, &0.9, &w);
            let lhs = tv.iter().zip(&tw).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            let rhs = v.iter().zip(&w).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(lhs <= 0.9 * rhs + 1e-12);
        }
    }

    #[test]
    fn separation_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let mdp = random_mdp(&mut rng, RandomMdpSpec::dense(3, 2));
        let sol = solve_onestep_discounted(&mdp, 0.9, 1e-11).unwrap();
        assert!(matches!(separation_oracle(&mdp, 0.9, &sol.values), Separation::Feasible));
        let top = vec![mdp.r_max() / 0.1; 3];
        assert!(matches!(separation_oracle(&mdp, 0.9, &top), Separation::Feasible));
        match separation_oracle(&mdp, 0.9, &[0.0; 3]) {
            Separation::Violated(cut) => assert!(cut.violation > 0.0),
            Separation::Feasible => panic!("zero values cannot be feasible with positive rewards"),
        }
    }

    #[test]
    fn constraint_generation_matches_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(38);
        for _ in 0..10 {
            let mdp = random_mdp(&mut rng, RandomMdpSpec::dense(3, 2));
            let fixed = solve_onestep_discounted(&mdp, 0.9, 1e-10).unwrap();
            let cg = solve_onestep_discounted_cg(&mdp, 0.9, None).unwrap();
            for s in 0..3 {
                assert!((fixed.values[s] - cg.values[s]).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn average_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(39);
        for _ in 0..10 {
            let mdp = random_mdp(&mut rng, RandomMdpSpec::dense(3, 2));
            let rvi = solve_onestep_average(&mdp).unwrap();
            assert!(rvi.residual <= 1e-8);
            let cg = solve_onestep_average_cg(&mdp).unwrap();
            assert!((rvi.gain - cg.gain).abs() <= 1e-6, "{} vs {}", rvi.gain, cg.gain);
        }
    }
}
