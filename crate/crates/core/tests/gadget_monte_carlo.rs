//! Importance-sampling estimate of `E[max(X_u, X_v)]` for adjacent vertices
//! of K4, drawn straight from the gadget's transition rows.

use mdplook::gadgets::{build_gadget_mdp, expected_max_subset, fixtures};
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn adjacent_pair_expected_max_within_three_standard_errors() {
    let inst = build_gadget_mdp(&fixtures::k4(), 2, None).unwrap();
    let (u, v) = (1, 2);
    assert!(inst.graph.adjacent(u, v));

    // Atoms as (value, probability) straight from the rows out of each vertex state.
    let atoms = |w: usize| -> Vec<(f64, f64)> {
        inst.mdp
            .row(0, inst.vertex_state(w))
            .iter()
            .map(|(t, p)| (inst.mdp.reward(*t, 0).to_f64().unwrap(), p.to_f64().unwrap()))
            .collect()
    };
    let (a, b) = (atoms(u), atoms(v));

    // Uniform proposal over atoms; the weight is p / (1 / n_atoms).
    let samples = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let (xa, pa) = a[rng.gen_range(0..a.len())];
        let (xb, pb) = b[rng.gen_range(0..b.len())];
        let w = pa * a.len() as f64 * pb * b.len() as f64;
        let y = w * xa.max(xb);
        sum += y;
        sum_sq += y * y;
    }
    let n = samples as f64;
    let mean = sum / n;
    let se = ((sum_sq / n - mean * mean) / n).sqrt();
    let exact = expected_max_subset(&inst, &[u, v]).unwrap().to_f64().unwrap();
    println!("K4 adjacent pair: estimate {mean:.6} +/- {se:.2e}, exact {exact:.6}");
    assert!((mean - exact).abs() <= 3.0 * se, "estimate {mean} vs exact {exact}, se {se}");
}
