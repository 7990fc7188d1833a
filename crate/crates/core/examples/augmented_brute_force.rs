//! Explicit look-ahead MDPs of depth 0, 1 and 2 solved by value iteration;
//! values never decrease with more information.

use mdplook::budget::DEFAULT_BUDGET;
use mdplook::generate::{random_mdp, RandomMdpSpec};
use mdplook::lookahead::build_augmented_mdp;
use mdplook::planners::value_iteration_discounted;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mdp = random_mdp(&mut rng, RandomMdpSpec::sparse(3, 2, 2));
    let gamma = 0.8;
    let roots: Vec<usize> = (0..mdp.n_states()).collect();

    for depth in 0..=2 {
        let aug = build_augmented_mdp(&mdp, &roots, depth, DEFAULT_BUDGET).unwrap();
        let v = value_iteration_discounted(&aug.mdp, gamma, 1e-10).unwrap().values;
        let at: Vec<String> = (0..mdp.n_states())
            .map(|s| format!("{:.6}", aug.expectation_at(&mdp, s, &v, DEFAULT_BUDGET).unwrap()))
            .collect();
        println!("depth {depth}: {:>3} augmented states, values {}", aug.mdp.n_states(), at.join("  "));
    }
}
