//! The independent-set gadget on K3,3: exact thresholds, the separation
//! check and the waiting policy on an independent triple.

use mdplook::gadgets::{build_gadget_mdp, fixtures, verify_separation, waiting_policy_value};

fn main() {
    let graph = fixtures::k33();
    let instance = build_gadget_mdp(&graph, 3, None).unwrap();
    let t = &instance.thresholds;
    println!("n = {}, m = {}, k = {}, |A| = {}", t.n, t.m, t.k, instance.n_actions());
    println!("mu = {}", t.mu);
    println!("discount threshold  {}", t.gamma_min);
    println!("instance discount   {}", t.gamma);
    println!("separated: {}", t.separated);

    let report = verify_separation(&instance).unwrap();
    println!(
        "independence number {}, {} lemma passed: {}",
        report.independence_number, report.lemma.lemma, report.lemma.passed
    );

    let waiting = waiting_policy_value(&instance, &[1, 2, 3]).unwrap();
    println!("waiting policy value matches closed form: {}", waiting.matches_closed_form);
    println!("meets completeness bound: {}", waiting.meets_completeness_bound);
}
