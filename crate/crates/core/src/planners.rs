//! Exact solvers for finite MDPs: discounted value iteration and policy
//! evaluation, average-reward relative value iteration, and policy gains.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{solve_discounted_chain, stationary_on_class};
use crate::lp::{solve_lp, Constraint, LpOutcome, Sense};
use crate::mdp::{Policy, Row, TabularMdp};
use crate::scalar::Scalar;
use crate::unichain::recurrent_classes;

/// Upper bound on sweeps for every iterative solver.
pub const ITERATION_CAP: usize = 5_000_000;

/// Aperiodicity mixing weight of relative value iteration.
pub const RVI_TAU: f64 = 0.5;

pub const RVI_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct DiscountedSolution {
    pub values: Vec<f64>,
    pub policy: Vec<usize>,
    pub iterations: usize,
    /// `‖T v − v‖∞` of the returned values.
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GainBias {
    pub gain: f64,
    pub bias: Vec<f64>,
    pub policy: Vec<usize>,
    pub iterations: usize,
    /// `max_s |g + h(s) − (T h)(s)|`.
    pub residual: f64,
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn span(d: &[f64]) -> (f64, f64) {
    d.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(*x), hi.max(*x)))
}

/// Iterates a γ-contraction until successive iterates differ by at most
/// `ε(1−γ)/(2γ)`, which places the last iterate within `ε` of the fixed point.
pub fn contraction_fixed_point(
    start: Vec<f64>,
    gamma: f64,
    epsilon: f64,
    what: &'static str,
    mut operator: impl FnMut(&[f64]) -> Vec<f64>,
) -> Result<(Vec<f64>, usize, f64)> {
    let threshold = epsilon * (1.0 - gamma) / (2.0 * gamma);
    let mut v = start;
    for iteration in 1..=ITERATION_CAP {
        let next = operator(&v);
        let diff = sup_distance(&next, &v);
        v = next;
        if diff <= threshold {
            return Ok((v, iteration, gamma * diff));
        }
    }
    Err(Error::IterationCap { what, iterations: ITERATION_CAP })
}

/// Relative value iteration `h ← h + τ(T h − h)`, normalized at state 0.
/// Stops when `span(T h − h) ≤ tol` and reports the span midpoint as gain.
pub fn relative_fixed_point(
    n: usize,
    tol: f64,
    what: &'static str,
    mut operator: impl FnMut(&[f64]) -> Vec<f64>,
) -> Result<(f64, Vec<f64>, usize, f64)> {
    let mut h = vec![0.0; n];
    for iteration in 1..=ITERATION_CAP {
        let th = operator(&h);
        let d: Vec<f64> = th.iter().zip(&h).map(|(t, x)| t - x).collect();
        let (lo, hi) = span(&d);
        if hi - lo <= tol {
            return Ok(((lo + hi) / 2.0, h, iteration, (hi - lo) / 2.0));
        }
        for (x, dx) in h.iter_mut().zip(&d) {
            *x += RVI_TAU * dx;
        }
        let reference = h[0];
        for x in h.iter_mut() {
            *x -= reference;
        }
    }
    Err(Error::IterationCap { what, iterations: ITERATION_CAP })
}

fn q_value(mdp: &TabularMdp<f64>, s: usize, a: usize, weight: f64, v: &[f64]) -> f64 {
    mdp.reward(s, a) + weight * mdp.row(a, s).iter().map(|(t, p)| p * v[*t]).sum::<f64>()
}

/// `(T v)(s) = max_a { r(s,a) + w Σ P_a(s'|s) v(s') }`.
pub fn bellman_operator(mdp: &TabularMdp<f64>, weight: f64, v: &[f64]) -> Vec<f64> {
    (0..mdp.n_states())
        .map(|s| (0..mdp.n_actions()).map(|a| q_value(mdp, s, a, weight, v)).fold(f64::NEG_INFINITY, f64::max))
        .collect()
}

/// Greedy actions with ties broken toward the smallest index.
pub fn greedy_policy(mdp: &TabularMdp<f64>, weight: f64, v: &[f64]) -> Vec<usize> {
    (0..mdp.n_states())
        .map(|s| {
            let mut best = 0;
            let mut best_q = q_value(mdp, s, 0, weight, v);
            for a in 1..mdp.n_actions() {
                let q = q_value(mdp, s, a, weight, v);
                if q > best_q {
                    best = a;
                    best_q = q;
                }
            }
            best
        })
        .collect()
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("discount {gamma} is not in (0, 1)")))
    }
}

pub fn value_iteration_discounted(mdp: &TabularMdp<f64>, gamma: f64, epsilon: f64) -> Result<DiscountedSolution> {
    check_gamma(gamma)?;
    if epsilon <= 0.0 {
        return Err(Error::InvalidInput("epsilon must be positive".into()));
    }
    let (values, iterations, _) =
        contraction_fixed_point(vec![0.0; mdp.n_states()], gamma, epsilon, "value iteration", |v| {
            bellman_operator(mdp, gamma, v)
        })?;
    let policy = greedy_policy(mdp, gamma, &values);
    let residual = sup_distance(&bellman_operator(mdp, gamma, &values), &values);
    Ok(DiscountedSolution { values, policy, iterations, residual })
}

/// Solves `(I − γ P_π) v = r_π` directly.
pub fn policy_evaluation_discounted<T: Scalar>(mdp: &TabularMdp<T>, policy: &Policy<T>, gamma: &T) -> Result<Vec<T>> {
    policy.check(mdp.n_states(), mdp.n_actions())?;
    if !(gamma.is_positive() && *gamma < T::one()) {
        return Err(Error::InvalidInput(format!("discount {gamma} is not in (0, 1)")));
    }
    let rows: Vec<Row<T>> = (0..mdp.n_states()).map(|s| mdp.policy_row(policy, s)).collect();
    let rewards: Vec<T> = (0..mdp.n_states()).map(|s| mdp.policy_reward(policy, s)).collect();
    solve_discounted_chain(&rows, &rewards, gamma)
}

/// Howard policy iteration started from the value-iteration policy; returns
/// an optimal deterministic policy and its exactly evaluated values.
pub fn policy_iteration_discounted(mdp: &TabularMdp<f64>, gamma: f64) -> Result<DiscountedSolution> {
    let start = value_iteration_discounted(mdp, gamma, 1e-8)?;
    let mut policy = start.policy;
    for iteration in 1..=10_000 {
        let values = policy_evaluation_discounted(mdp, &Policy::Deterministic(policy.clone()), &gamma)?;
        let mut improved = policy.clone();
        for s in 0..mdp.n_states() {
            let current = q_value(mdp, s, policy[s], gamma, &values);
            for a in 0..mdp.n_actions() {
                let q = q_value(mdp, s, a, gamma, &values);
                if q > current + 1e-12 * (1.0 + current.abs()) && q > q_value(mdp, s, improved[s], gamma, &values) {
                    improved[s] = a;
                }
            }
        }
        if improved == policy {
            let residual = sup_distance(&bellman_operator(mdp, gamma, &values), &values);
            return Ok(DiscountedSolution { values, policy, iterations: iteration, residual });
        }
        policy = improved;
    }
    Err(Error::IterationCap { what: "policy iteration", iterations: 10_000 })
}

/// Primal LP `min Σ v(s)` s.t. `v(s) − γ Σ P_a(s'|s) v(s') ≥ r(s,a)` for all
/// pairs, solved in one shot since every constraint is listed.
pub fn linear_program_discounted(mdp: &TabularMdp<f64>, gamma: f64) -> Result<DiscountedSolution> {
    check_gamma(gamma)?;
    let n = mdp.n_states();
    let mut constraints = Vec::with_capacity(n * mdp.n_actions());
    for s in 0..n {
        for a in 0..mdp.n_actions() {
            let mut c = vec![0.0; n];
            c[s] += 1.0;
            for (t, p) in mdp.row(a, s) {
                c[*t] -= gamma * p;
            }
            constraints.push(Constraint { coefficients: c, sense: Sense::Ge, rhs: *mdp.reward(s, a) });
        }
    }
    let values = match solve_lp(&vec![1.0; n], &constraints)? {
        LpOutcome::Optimal { x, .. } => x,
        other => return Err(Error::InvalidInput(format!("discounted LP ended as {other:?}"))),
    };
    let policy = greedy_policy(mdp, gamma, &values);
    let residual = sup_distance(&bellman_operator(mdp, gamma, &values), &values);
    Ok(DiscountedSolution { values, policy, iterations: 1, residual })
}

/// Average-reward optimality equations by relative value iteration.
/// The caller is responsible for the unichain precondition.
pub fn average_reward_solve(mdp: &TabularMdp<f64>) -> Result<GainBias> {
    let (gain, bias, iterations, residual) =
        relative_fixed_point(mdp.n_states(), RVI_TOLERANCE, "relative value iteration", |h| {
            bellman_operator(mdp, 1.0, h)
        })?;
    let policy = greedy_policy(mdp, 1.0, &bias);
    Ok(GainBias { gain, bias, policy, iterations, residual })
}

/// `max_s |g + h(s) − max_a{r(s,a) + Σ P h}|`.
pub fn average_residual(mdp: &TabularMdp<f64>, gain: f64, bias: &[f64]) -> f64 {
    bellman_operator(mdp, 1.0, bias).iter().zip(bias).fold(0.0, |m, (t, h)| m.max((gain + h - t).abs()))
}

/// Stationary distribution of `P_π`; the chain must have one recurrent class.
pub fn stationary_distribution<T: Scalar>(mdp: &TabularMdp<T>, policy: &Policy<T>) -> Result<Vec<T>> {
    policy.check(mdp.n_states(), mdp.n_actions())?;
    let rows: Vec<Row<T>> = (0..mdp.n_states()).map(|s| mdp.policy_row(policy, s)).collect();
    chain_stationary(&rows)
}

pub fn chain_stationary<T: Scalar>(rows: &[Row<T>]) -> Result<Vec<T>> {
    let classes = recurrent_classes(rows);
    if classes.len() != 1 {
        return Err(Error::ReducibleChain { classes: classes.len() });
    }
    stationary_on_class(rows, &classes[0])
}

/// `g = Σ_s μ_π(s) Σ_a π(a|s) r(s,a)`.
pub fn policy_average_gain<T: Scalar>(mdp: &TabularMdp<T>, policy: &Policy<T>) -> Result<T> {
    let mu = stationary_distribution(mdp, policy)?;
    Ok(mu.iter().enumerate().fold(T::zero(), |acc, (s, m)| acc + m.clone() * mdp.policy_reward(policy, s)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{random_mdp, random_policy, random_rational_mdp, random_rational_policy, RandomMdpSpec};
    use crate::lookahead::build_augmented_mdp;
    use num_rational::BigRational;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn names(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    fn cycle() -> TabularMdp<f64> {
        TabularMdp::new(names("s", 2), names("a", 1), vec![vec![vec![0.0, 1.0], vec![1.0, 0.0]]], vec![vec![0.0], vec![1.0]])
            .unwrap()
    }

    #[test]
    fn linear_program_matches_policy_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..5 {
            let mdp = random_mdp(&mut rng, RandomMdpSpec::sparse(4, 3, 2));
            let lp = linear_program_discounted(&mdp, 0.9).unwrap();
            let pi = policy_iteration_discounted(&mdp, 0.9).unwrap();
            for (a, b) in lp.values.iter().zip(&pi.values) {
                assert!((a - b).abs() < 1e-7, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn single_state_geometric_series() {
        let mdp = TabularMdp::new(names("s", 1), names("a", 1), vec![vec![vec![1.0]]], vec![vec![0.7]]).unwrap();
        let sol = value_iteration_discounted(&mdp, 0.9, 1e-9).unwrap();
        assert!((sol.values[0] - 7.0).abs() <= 1e-9);
        let exact = policy_evaluation_discounted(&mdp, &Policy::Deterministic(vec![0]), &0.9).unwrap();
        assert!((exact[0] - 7.0).abs() < 1e-12);
        let avg = average_reward_solve(&mdp).unwrap();
        assert!((avg.gain - 0.7).abs() < 1e-12 && avg.bias[0] == 0.0);
    }

    #[test]
    fn cycle_average_is_one_half() {
        let mdp = cycle();
        let avg = average_reward_solve(&mdp).unwrap();
        assert!((avg.gain - 0.5).abs() < 1e-9);
        assert!(average_residual(&mdp, avg.gain, &avg.bias) <= 1e-9);
        assert_eq!(policy_average_gain(&mdp, &Policy::Deterministic(vec![0, 0])).unwrap(), 0.5);
    }

    #[test]
    fn value_iteration_matches_linear_solve_of_optimal_policy() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let mdp = random_mdp(&mut rng, RandomMdpSpec::dense(3, 2));
            let eps = 1e-8;
            let vi = value_iteration_discounted(&mdp, 0.9, eps).unwrap();
            assert!(vi.residual <= eps);
            let pi = policy_iteration_discounted(&mdp, 0.9).unwrap();
            for s in 0..3 {
                assert!((vi.values[s] - pi.values[s]).abs() <= eps);
            }
            // greedy policy reproduces v within 2ε/(1−γ)
            let greedy = policy_evaluation_discounted(&mdp, &Policy::Deterministic(vi.policy.clone()), &0.9).unwrap();
            assert!(sup_distance(&greedy, &vi.values) <= 2.0 * eps / 0.1);
        }
    }

    #[test]
    fn evaluation_matches_truncated_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mdp = random_mdp(&mut rng, RandomMdpSpec::dense(3, 2));
        let policy = random_policy(&mut rng, 3, 2);
        let gamma = 0.95;
        let v = policy_evaluation_discounted(&mdp, &policy, &gamma).unwrap();
        // oracle: Σ_{t<10^4} γ^t P_π^t r_π by repeated matrix-vector products
        let rows: Vec<Row<f64>> = (0..3).map(|s| mdp.policy_row(&policy, s)).collect();
        let r: Vec<f64> = (0..3).map(|s| mdp.policy_reward(&policy, s)).collect();
        let mut term = r.clone();
        let mut total = r.clone();
        for _ in 1..10_000 {
            term = rows.iter().map(|row| gamma * row.iter().map(|(t, p)| p * term[*t]).sum::<f64>()).collect();
            for (acc, x) in total.iter_mut().zip(&term) {
                *acc += x;
            }
        }
        let bound = gamma.powi(10_000) * mdp.r_max() / (1.0 - gamma) + 1e-12;
        assert!(sup_distance(&v, &total) <= bound);
    }

    #[test]
    fn rational_evaluation_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mdp = random_rational_mdp(&mut rng, RandomMdpSpec::dense(3, 2));
        let policy = random_rational_policy(&mut rng, 3, 2);
        let gamma = BigRational::new(3.into(), 4.into());
        let v = policy_evaluation_discounted(&mdp, &policy, &gamma).unwrap();
        for s in 0..3 {
            let row = mdp.policy_row(&policy, s);
            let rhs = mdp.policy_reward(&policy, s)
                + gamma.clone() * row.iter().fold(BigRational::from_integer(0.into()), |acc, (t, p)| acc + p * &v[*t]);
            assert_eq!(rhs, v[s]);
        }
    }

    #[test]
    fn average_gain_matches_stationary_evaluation_of_returned_policy() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..10 {
            let mdp = random_mdp(&mut rng, RandomMdpSpec::dense(4, 3));
            let sol = average_reward_solve(&mdp).unwrap();
            assert!(sol.residual <= 1e-9);
            let g = policy_average_gain(&mdp, &Policy::Deterministic(sol.policy.clone())).unwrap();
            assert!((g - sol.gain).abs() <= 1e-9, "{g} vs {}", sol.gain);
            // shifting h by a constant leaves the residual unchanged
            let shifted: Vec<f64> = sol.bias.iter().map(|h| h + 3.0).collect();
            assert!((average_residual(&mdp, sol.gain, &shifted) - average_residual(&mdp, sol.gain, &sol.bias)).abs() < 1e-9);
        }
    }

    #[test]
    fn reducible_chain_is_rejected() {
        let mdp = TabularMdp::new(names("s", 2), names("a", 1), vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]], vec![vec![0.0]; 2])
            .unwrap();
        assert!(matches!(policy_average_gain(&mdp, &Policy::Deterministic(vec![0, 0])), Err(Error::ReducibleChain { classes: 2 })));
    }

    #[test]
    fn depth_zero_augmentation_preserves_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let mdp = random_mdp(&mut rng, RandomMdpSpec::sparse(4, 2, 2));
        let aug = build_augmented_mdp(&mdp, &[0, 1, 2, 3], 0, 100).unwrap();
        let base = value_iteration_discounted(&mdp, 0.9, 1e-9).unwrap();
        let lifted = value_iteration_discounted(&aug.mdp, 0.9, 1e-9).unwrap();
        assert_eq!(base.values, lifted.values);
    }
}
