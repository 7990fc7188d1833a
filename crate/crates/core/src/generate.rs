//! Seeded random instances for tests, examples and the oracle command.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use crate::mdp::{Policy, RationalMdp, Row, TabularMdp};

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Integer weights for one row; `support` states get a positive weight.
fn random_weights<R: Rng>(rng: &mut R, n: usize, support: usize, max_weight: u32) -> Vec<u32> {
    let mut weights = vec![0u32; n];
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..support.min(n) {
        let j = rng.gen_range(i..n);
        idx.swap(i, j);
        weights[idx[i]] = rng.gen_range(1..=max_weight);
    }
    weights
}

#[derive(Clone, Copy, Debug)]
pub struct RandomMdpSpec {
    pub n_states: usize,
    pub n_actions: usize,
    /// Number of successor states with positive mass per row (clamped to `n_states`).
    pub support: usize,
    pub max_weight: u32,
    /// Rewards are multiples of `1/reward_den` in `[0, 1]`.
    pub reward_den: u32,
}

impl RandomMdpSpec {
    pub fn dense(n_states: usize, n_actions: usize) -> Self {
        RandomMdpSpec { n_states, n_actions, support: n_states, max_weight: 9, reward_den: 8 }
    }

    pub fn sparse(n_states: usize, n_actions: usize, support: usize) -> Self {
        RandomMdpSpec { support, ..Self::dense(n_states, n_actions) }
    }
}

/// Random MDP with rational probabilities (weights over their row total).
pub fn random_rational_mdp<R: Rng>(rng: &mut R, spec: RandomMdpSpec) -> RationalMdp {
    let n = spec.n_states;
    let kernel: Vec<Vec<Row<BigRational>>> = (0..spec.n_actions)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let w = random_weights(rng, n, spec.support.max(1), spec.max_weight);
                    let total: u32 = w.iter().sum();
                    w.iter()
                        .enumerate()
                        .filter(|(_, w)| **w > 0)
                        .map(|(t, w)| (t, BigRational::new(BigInt::from(*w), BigInt::from(total))))
                        .collect()
                })
                .collect()
        })
        .collect();
    let rewards = (0..n)
        .map(|_| {
            (0..spec.n_actions)
                .map(|_| {
                    BigRational::new(BigInt::from(rng.gen_range(0..=spec.reward_den)), BigInt::from(spec.reward_den))
                })
                .collect()
        })
        .collect();
    TabularMdp::from_sparse(names("s", n), names("a", spec.n_actions), kernel, rewards)
        .expect("generated MDP is valid")
}

/// Floating-point image of [`random_rational_mdp`].
pub fn random_mdp<R: Rng>(rng: &mut R, spec: RandomMdpSpec) -> TabularMdp<f64> {
    random_rational_mdp(rng, spec).to_f64()
}

/// Every row a point mass on a uniformly chosen successor.
pub fn random_deterministic_mdp<R: Rng>(rng: &mut R, n_states: usize, n_actions: usize) -> TabularMdp<f64> {
    let kernel = (0..n_actions)
        .map(|_| (0..n_states).map(|_| vec![(rng.gen_range(0..n_states), 1.0)]).collect())
        .collect();
    let rewards =
        (0..n_states).map(|_| (0..n_actions).map(|_| rng.gen_range(0..=8) as f64 / 8.0).collect()).collect();
    TabularMdp::from_sparse(names("s", n_states), names("a", n_actions), kernel, rewards)
        .expect("generated MDP is valid")
}

pub fn random_rational_policy<R: Rng>(rng: &mut R, n_states: usize, n_actions: usize) -> Policy<BigRational> {
    Policy::Randomized(
        (0..n_states)
            .map(|_| {
                let w = random_weights(rng, n_actions, n_actions, 5);
                let total: u32 = w.iter().sum();
                w.iter().map(|w| BigRational::new(BigInt::from(*w), BigInt::from(total))).collect()
            })
            .collect(),
    )
}

pub fn random_policy<R: Rng>(rng: &mut R, n_states: usize, n_actions: usize) -> Policy<f64> {
    random_rational_policy(rng, n_states, n_actions).to_f64()
}

/// Score table `u[state][action]` with entries in `[0, 1]`.
pub fn random_scores<R: Rng>(rng: &mut R, n_states: usize, n_actions: usize) -> Vec<Vec<f64>> {
    (0..n_states).map(|_| (0..n_actions).map(|_| rng.gen::<f64>()).collect()).collect()
}
