//! Optimal one-step look-ahead values by reduced value iteration and by
//! constraint generation, next to the classical optimum.

use mdplook::generate::{random_mdp, RandomMdpSpec};
use mdplook::onestep::{solve_onestep_average, solve_onestep_discounted, solve_onestep_discounted_cg};
use mdplook::planners::{average_reward_solve, value_iteration_discounted};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mdp = random_mdp(&mut rng, RandomMdpSpec::dense(4, 3));
    let gamma = 0.9;

    let classic = value_iteration_discounted(&mdp, gamma, 1e-10).unwrap();
    let vi = solve_onestep_discounted(&mdp, gamma, 1e-10).unwrap();
    let cg = solve_onestep_discounted_cg(&mdp, gamma, None).unwrap();
    println!("state  no look-ahead  one-step (VI)  one-step (CG)");
    for s in 0..mdp.n_states() {
        println!("{s:>5}  {:>13.6}  {:>13.6}  {:>13.6}", classic.values[s], vi.values[s], cg.values[s]);
    }
    println!("VI iterations {}, CG rounds {} with {} constraints", vi.iterations, cg.iterations, cg.constraints);

    let g0 = average_reward_solve(&mdp).unwrap().gain;
    let g1 = solve_onestep_average(&mdp).unwrap();
    println!("average gain: {g0:.6} without look-ahead, {:.6} with one step (residual {:.1e})", g1.gain, g1.residual);
}
