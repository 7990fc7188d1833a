//! The reset transform turns a discounted objective into an average-reward
//! one: the gain of every policy equals (1 - gamma) times its discounted
//! value from the reset state.

use mdplook::generate::{random_rational_mdp, random_rational_policy, RandomMdpSpec};
use mdplook::planners::{policy_average_gain, policy_evaluation_discounted};
use mdplook::reset::{reset_transform, verify_renewal_identity};
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mdp = random_rational_mdp(&mut rng, RandomMdpSpec::sparse(3, 2, 2));
    let policy = random_rational_policy(&mut rng, 3, 2);
    let gamma = BigRational::new(3.into(), 4.into());

    let value = policy_evaluation_discounted(&mdp, &policy, &gamma).unwrap()[0].clone();
    let reset = reset_transform(&mdp, &gamma, 0).unwrap();
    let gain = policy_average_gain(&reset, &policy).unwrap();
    println!("discounted value at s0: {value}");
    println!("gain after reset:       {gain}");
    println!("(1 - gamma) * value:    {}", (BigRational::from_integer(1.into()) - &gamma) * &value);
    println!("residual: {}", verify_renewal_identity(&mdp, &gamma, 0, &policy).unwrap());
}
