//! Expected maximum of look-ahead scores: the sorted closed form against
//! enumeration of every joint successor vector, in exact arithmetic.

use mdplook::budget::DEFAULT_BUDGET;
use mdplook::generate::{random_rational_mdp, RandomMdpSpec};
use mdplook::onestep::{event_probabilities, expected_max_bruteforce, expected_max_sorted, sorted_ordering};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mdp = random_rational_mdp(&mut rng, RandomMdpSpec::dense(3, 2));
    let u: Vec<Vec<BigRational>> =
        (0..3).map(|_| (0..2).map(|_| BigRational::new(rng.gen_range(0..20).into(), 4.into())).collect()).collect();

    let order = sorted_ordering(&u);
    let (mu, unmatched) = event_probabilities(&mdp, 0, &order);
    println!("pair (state, action)  score  first-match probability");
    for ((t, a), p) in order.iter().zip(&mu) {
        println!("  ({t}, {a})               {:<6} {p}", u[*t][*a]);
    }
    println!("unmatched mass: {unmatched}");

    let sorted = expected_max_sorted(&mdp, 0, &u);
    let brute = expected_max_bruteforce(&mdp, 0, &u, DEFAULT_BUDGET).unwrap();
    println!("sorted:     {sorted}");
    println!("enumerated: {brute}");
    assert_eq!(sorted, brute);
}
