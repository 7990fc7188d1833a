//! Threshold decision problems: does some policy with `ℓ`-step look-ahead
//! reach discounted value `θ` from `s0`, or average gain `θ`?

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lookahead::{build_augmented_mdp, MAX_LOOKAHEAD};
use crate::mdp::TabularMdp;
use crate::onestep::{solve_onestep_average, solve_onestep_discounted};
use crate::planners::{average_reward_solve, policy_iteration_discounted};

/// Tolerance handed to the iterative solvers behind a decision.
pub const DECISION_EPSILON: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decision {
    pub decision: bool,
    /// Optimal value at `s0` (discounted) or optimal gain (average).
    pub value: f64,
    pub threshold: f64,
    /// `value − threshold`; the decision is `margin ≥ 0`.
    pub margin: f64,
    pub method: &'static str,
}

impl Decision {
    pub fn new(value: f64, threshold: f64, method: &'static str) -> Self {
        let margin = value - threshold;
        Decision { decision: margin >= 0.0, value, threshold, margin, method }
    }
}

fn check_depth(lookahead: usize) -> Result<()> {
    if lookahead > MAX_LOOKAHEAD {
        Err(Error::Refused(format!("look-ahead depth {lookahead} exceeds {MAX_LOOKAHEAD}")))
    } else {
        Ok(())
    }
}

/// `v*_ℓ(s0) ≥ θ`. Depth 0 uses policy iteration, depth 1 the reduced
/// operator, deeper look-ahead the explicit augmented MDP averaged over `Λ_{s0}`.
pub fn decide_dvdp(
    mdp: &TabularMdp<f64>,
    lookahead: usize,
    s0: usize,
    gamma: f64,
    theta: f64,
    budget: u64,
) -> Result<Decision> {
    check_depth(lookahead)?;
    mdp.check_state(s0)?;
    match lookahead {
        0 => {
            let sol = policy_iteration_discounted(mdp, gamma)?;
            Ok(Decision::new(sol.values[s0], theta, "policy-iteration"))
        }
        1 => {
            let sol = solve_onestep_discounted(mdp, gamma, DECISION_EPSILON)?;
            Ok(Decision::new(sol.values[s0], theta, "sorted-vi"))
        }
        _ => {
            let aug = build_augmented_mdp(mdp, &[s0], lookahead, budget)?;
            let sol = policy_iteration_discounted(&aug.mdp, gamma)?;
            let value = aug.expectation_at(mdp, s0, &sol.values, budget)?;
            Ok(Decision::new(value, theta, "augmented-brute"))
        }
    }
}

/// `g*_ℓ ≥ θ` for a unichain MDP; the unichain precondition is the caller's.
pub fn decide_ardp(mdp: &TabularMdp<f64>, lookahead: usize, theta: f64, budget: u64) -> Result<Decision> {
    check_depth(lookahead)?;
    match lookahead {
        0 => Ok(Decision::new(average_reward_solve(mdp)?.gain, theta, "relative-vi")),
        1 => Ok(Decision::new(solve_onestep_average(mdp)?.gain, theta, "sorted-vi")),
        _ => {
            let roots: Vec<usize> = (0..mdp.n_states()).collect();
            let aug = build_augmented_mdp(mdp, &roots, lookahead, budget)?;
            Ok(Decision::new(average_reward_solve(&aug.mdp)?.gain, theta, "augmented-brute"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::DEFAULT_BUDGET;
    use crate::generate::{random_mdp, RandomMdpSpec};
    use crate::planners::value_iteration_discounted;
    use crate::reset::reset_transform;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn trivial_thresholds() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let mdp = random_mdp(&mut rng, RandomMdpSpec::dense(3, 2));
        for l in 0..=2 {
            assert!(decide_dvdp(&mdp, l, 0, 0.9, 0.0, DEFAULT_BUDGET).unwrap().decision);
            let above = mdp.r_max() / 0.1 + 1.0;
            assert!(!decide_dvdp(&mdp, l, 0, 0.9, above, DEFAULT_BUDGET).unwrap().decision);
        }
        assert!(decide_dvdp(&mdp, 5, 0, 0.9, 0.0, DEFAULT_BUDGET).is_err());
    }

    #[test]
    fn self_consistent_around_the_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(72);
        for _ in 0..5 {
            let mdp = random_mdp(&mut rng, RandomMdpSpec::sparse(3, 2, 2));
            let v = value_iteration_discounted(&mdp, 0.8, 1e-10).unwrap().values[0];
            assert!(decide_dvdp(&mdp, 0, 0, 0.8, v - 1e-6, DEFAULT_BUDGET).unwrap().decision);
            let d = decide_dvdp(&mdp, 0, 0, 0.8, v + 1e-6, DEFAULT_BUDGET).unwrap();
            assert!(!d.decision);
            assert!((d.margin + 1e-6).abs() < 1e-8);
        }
    }

    #[test]
    fn discounted_and_reset_decisions_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let gamma = 0.75;
        for _ in 0..5 {
            let mdp = random_mdp(&mut rng, RandomMdpSpec::sparse(3, 2, 2));
            let reset = reset_transform(&mdp, &gamma, 0).unwrap();
            let v = decide_dvdp(&mdp, 0, 0, gamma, 0.0, DEFAULT_BUDGET).unwrap().value;
            for delta in [-1e-4, 1e-4] {
                let d = decide_dvdp(&mdp, 0, 0, gamma, v + delta, DEFAULT_BUDGET).unwrap();
                let a = decide_ardp(&reset, 0, (1.0 - gamma) * (v + delta), DEFAULT_BUDGET).unwrap();
                assert_eq!(d.decision, a.decision);
            }
        }
    }
}
