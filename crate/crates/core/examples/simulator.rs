//! Rolling a look-ahead tree forward with the simulator and comparing the
//! empirical successor law against the exact augmented kernel.

use std::collections::BTreeMap;

use mdplook::budget::DEFAULT_BUDGET;
use mdplook::generate::{random_mdp, RandomMdpSpec};
use mdplook::lookahead::{augmented_kernel, sample_initial, simulate_step};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mdp = random_mdp(&mut rng, RandomMdpSpec::sparse(3, 2, 2));
    let xi = sample_initial(&mdp, 0, 2, &mut rng);
    println!("start tree: {:?}", xi.blocks());

    let samples = 50_000;
    let mut counts = BTreeMap::new();
    let mut reward = 0.0;
    for _ in 0..samples {
        let (next, r) = simulate_step(&mdp, &xi, 1, &mut rng);
        reward += r;
        *counts.entry(next).or_insert(0usize) += 1;
    }
    println!("mean reward {:.4}", reward / samples as f64);

    let exact = augmented_kernel(&mdp, &xi, 1, DEFAULT_BUDGET).unwrap();
    let mut tv = 0.0;
    for (next, p) in exact.iter() {
        let freq = counts.remove(next).unwrap_or(0) as f64 / samples as f64;
        println!("  {:?}: exact {p:.4}, simulated {freq:.4}", next.blocks());
        tv += (p - freq).abs();
    }
    tv += counts.values().map(|c| *c as f64 / samples as f64).sum::<f64>();
    println!("total variation {:.4}", tv / 2.0);
}
