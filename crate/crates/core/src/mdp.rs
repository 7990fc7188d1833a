//! Tabular MDP data model: kernel, rewards, policies and validation.

use std::collections::HashMap;
use std::fmt;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use num_traits::Signed;

use crate::scalar::{float_exact_limit, sum, NumericMode, Scalar};

/// Sparse kernel row: `(target state, probability)` sorted by target.
pub type Row<T> = Vec<(usize, T)>;

/// A finite MDP with explicit kernel and reward tables.
///
/// Identifiers are kept as strings for IO; every algorithm works on the
/// dense indices, which follow declaration order.
#[derive(Clone, Debug, PartialEq)]
pub struct TabularMdp<T: Scalar = f64> {
    states: Vec<String>,
    actions: Vec<String>,
    /// `kernel[action][from]`
    kernel: Vec<Vec<Row<T>>>,
    /// `rewards[state][action]`
    rewards: Vec<Vec<T>>,
    discount: Option<T>,
    initial_state: Option<usize>,
    r_max: T,
}

pub type RationalMdp = TabularMdp<BigRational>;

impl<T: Scalar> TabularMdp<T> {
    /// Builds an MDP from dense tables and rejects it if it fails validation.
    pub fn new(
        states: Vec<String>,
        actions: Vec<String>,
        kernel: Vec<Vec<Vec<T>>>,
        rewards: Vec<Vec<T>>,
    ) -> Result<Self> {
        let sparse = kernel
            .into_iter()
            .map(|rows| rows.into_iter().map(dense_to_sparse).collect())
            .collect();
        Self::from_sparse(states, actions, sparse, rewards)
    }

    pub fn from_sparse(
        states: Vec<String>,
        actions: Vec<String>,
        kernel: Vec<Vec<Row<T>>>,
        rewards: Vec<Vec<T>>,
    ) -> Result<Self> {
        let mdp = Self::from_sparse_unchecked(states, actions, kernel, rewards);
        mdp.validate().into_result()?;
        Ok(mdp)
    }

    /// Builds without validating; use [`TabularMdp::validate`] to inspect.
    pub fn from_sparse_unchecked(
        states: Vec<String>,
        actions: Vec<String>,
        kernel: Vec<Vec<Row<T>>>,
        rewards: Vec<Vec<T>>,
    ) -> Self {
        let r_max = rewards
            .iter()
            .flatten()
            .fold(T::zero(), |m, r| if *r > m { r.clone() } else { m });
        let kernel = kernel
            .into_iter()
            .map(|rows| {
                rows.into_iter()
                    .map(|mut row| {
                        row.sort_by_key(|(t, _)| *t);
                        row
                    })
                    .collect()
            })
            .collect();
        TabularMdp { states, actions, kernel, rewards, discount: None, initial_state: None, r_max }
    }

    pub fn with_discount(mut self, gamma: T) -> Self {
        self.discount = Some(gamma);
        self
    }

    pub fn with_initial_state(mut self, state: usize) -> Self {
        self.initial_state = Some(state);
        self
    }

    /// Raises the recorded reward bound; it never drops below the largest reward.
    pub fn with_r_max(mut self, bound: T) -> Self {
        if bound > self.r_max {
            self.r_max = bound;
        }
        self
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn state_name(&self, s: usize) -> &str {
        &self.states[s]
    }

    pub fn action_name(&self, a: usize) -> &str {
        &self.actions[a]
    }

    pub fn state_index(&self, name: &str) -> Result<usize> {
        self.states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::InvalidId(format!("unknown state `{name}`")))
    }

    pub fn action_index(&self, name: &str) -> Result<usize> {
        self.actions
            .iter()
            .position(|a| a == name)
            .ok_or_else(|| Error::InvalidId(format!("unknown action `{name}`")))
    }

    pub fn row(&self, action: usize, from: usize) -> &[(usize, T)] {
        &self.kernel[action][from]
    }

    pub fn prob(&self, action: usize, from: usize, to: usize) -> T {
        let row = &self.kernel[action][from];
        match row.binary_search_by_key(&to, |(t, _)| *t) {
            Ok(i) => row[i].1.clone(),
            Err(_) => T::zero(),
        }
    }

    pub fn reward(&self, state: usize, action: usize) -> &T {
        &self.rewards[state][action]
    }

    pub fn rewards(&self) -> &[Vec<T>] {
        &self.rewards
    }

    pub fn kernel(&self) -> &[Vec<Row<T>>] {
        &self.kernel
    }

    pub fn discount(&self) -> Option<&T> {
        self.discount.as_ref()
    }

    pub fn initial_state(&self) -> Option<usize> {
        self.initial_state
    }

    pub fn r_max(&self) -> &T {
        &self.r_max
    }

    pub fn mode(&self) -> NumericMode {
        T::MODE
    }

    pub fn check_state(&self, s: usize) -> Result<()> {
        if s < self.n_states() {
            Ok(())
        } else {
            Err(Error::InvalidId(format!("state index {s} out of range 0..{}", self.n_states())))
        }
    }

    pub fn check_action(&self, a: usize) -> Result<()> {
        if a < self.n_actions() {
            Ok(())
        } else {
            Err(Error::InvalidId(format!("action index {a} out of range 0..{}", self.n_actions())))
        }
    }

    /// Dense copy of a kernel row.
    pub fn dense_row(&self, action: usize, from: usize) -> Vec<T> {
        let mut out = vec![T::zero(); self.n_states()];
        for (t, p) in &self.kernel[action][from] {
            out[*t] = p.clone();
        }
        out
    }

    /// Lossy conversion to floating point.
    pub fn to_f64(&self) -> TabularMdp<f64> {
        let conv = |v: &T| v.to_f64_lossy();
        TabularMdp {
            states: self.states.clone(),
            actions: self.actions.clone(),
            kernel: self
                .kernel
                .iter()
                .map(|rows| rows.iter().map(|r| r.iter().map(|(t, p)| (*t, conv(p))).collect()).collect())
                .collect(),
            rewards: self.rewards.iter().map(|r| r.iter().map(conv).collect()).collect(),
            discount: self.discount.as_ref().map(conv),
            initial_state: self.initial_state,
            r_max: conv(&self.r_max),
        }
    }

    /// True when every kernel row is a point mass.
    pub fn is_deterministic(&self) -> bool {
        self.kernel.iter().flatten().all(|row| row.len() == 1 && row[0].1 == T::one())
    }

    pub fn validate(&self) -> ValidationReport {
        validate_mdp(self)
    }

    /// Sparse row of the chain induced by a (possibly randomized) policy.
    pub fn policy_row(&self, policy: &Policy<T>, state: usize) -> Row<T> {
        let mut acc: Vec<T> = vec![T::zero(); self.n_states()];
        let mut touched = vec![false; self.n_states()];
        for (a, w) in policy.action_weights(state) {
            for (t, p) in &self.kernel[a][state] {
                acc[*t] = acc[*t].clone() + w.clone() * p.clone();
                touched[*t] = true;
            }
        }
        (0..self.n_states())
            .filter(|t| touched[*t] && !acc[*t].is_zero())
            .map(|t| (t, acc[t].clone()))
            .collect()
    }

    pub fn policy_reward(&self, policy: &Policy<T>, state: usize) -> T {
        policy
            .action_weights(state)
            .into_iter()
            .fold(T::zero(), |acc, (a, w)| acc + w * self.rewards[state][a].clone())
    }
}

fn dense_to_sparse<T: Scalar>(row: Vec<T>) -> Row<T> {
    row.into_iter().enumerate().filter(|(_, p)| !p.is_zero()).collect()
}

/// Finite distribution over arbitrary items.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution<K, T: Scalar = f64> {
    support: Vec<(K, T)>,
}

impl RationalMdp {
    /// Float copy, refused when a reward or the reciprocal of a nonzero
    /// probability exceeds 2^53 in magnitude.
    pub fn to_f64_checked(&self) -> Result<TabularMdp<f64>> {
        let limit = float_exact_limit();
        let reward_too_big = self.rewards.iter().flatten().any(|r| r.abs() > limit);
        let prob_too_small = self.kernel.iter().flatten().flatten().any(|(_, p)| {
            use num_traits::Zero;
            !p.is_zero() && p.abs().recip() > limit
        });
        if reward_too_big || prob_too_small {
            return Err(Error::Refused("magnitudes exceed exact double precision, float planning refused".into()));
        }
        Ok(self.to_f64())
    }
}

impl<K, T: Scalar> Distribution<K, T> {
    pub fn new(support: Vec<(K, T)>) -> Self {
        Distribution { support }
    }

    pub fn point(item: K) -> Self {
        Distribution { support: vec![(item, T::one())] }
    }

    pub fn support(&self) -> &[(K, T)] {
        &self.support
    }

    pub fn into_support(self) -> Vec<(K, T)> {
        self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn total(&self) -> T {
        sum(self.support.iter().map(|(_, p)| p))
    }

    /// Checks nonnegativity and unit mass within the mode's tolerance.
    pub fn is_valid(&self) -> bool {
        let total = self.total();
        self.support.iter().all(|(_, p)| !p.is_negative())
            && (total - T::one()).abs() <= T::row_tolerance()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(K, T)> {
        self.support.iter()
    }
}

impl<K: Ord + Clone, T: Scalar> Distribution<K, T> {
    /// Merges duplicate items and sorts by item.
    pub fn canonical(self) -> Self {
        let mut support = self.support;
        support.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(K, T)> = Vec::with_capacity(support.len());
        for (k, p) in support {
            match merged.last_mut() {
                Some((last, q)) if *last == k => *q = q.clone() + p,
                _ => merged.push((k, p)),
            }
        }
        merged.retain(|(_, p)| !p.is_zero());
        Distribution { support: merged }
    }

    pub fn prob_of(&self, item: &K) -> T {
        self.support
            .iter()
            .filter(|(k, _)| k == item)
            .fold(T::zero(), |acc, (_, p)| acc + p.clone())
    }
}

/// Stationary memoryless policy over dense state indices.
#[derive(Clone, Debug, PartialEq)]
pub enum Policy<T: Scalar = f64> {
    Deterministic(Vec<usize>),
    /// `table[state][action]` probabilities.
    Randomized(Vec<Vec<T>>),
}

impl<T: Scalar> Policy<T> {
    pub fn n_states(&self) -> usize {
        match self {
            Policy::Deterministic(t) => t.len(),
            Policy::Randomized(t) => t.len(),
        }
    }

    /// `(action, weight)` pairs with positive weight.
    pub fn action_weights(&self, state: usize) -> Vec<(usize, T)> {
        match self {
            Policy::Deterministic(t) => vec![(t[state], T::one())],
            Policy::Randomized(t) => t[state]
                .iter()
                .enumerate()
                .filter(|(_, w)| !w.is_zero())
                .map(|(a, w)| (a, w.clone()))
                .collect(),
        }
    }

    pub fn check(&self, n_states: usize, n_actions: usize) -> Result<()> {
        if self.n_states() != n_states {
            return Err(Error::InvalidInput(format!(
                "policy covers {} states, MDP has {n_states}",
                self.n_states()
            )));
        }
        match self {
            Policy::Deterministic(t) => {
                if let Some((s, a)) = t.iter().enumerate().find(|(_, a)| **a >= n_actions) {
                    return Err(Error::InvalidId(format!("policy picks action {a} at state {s}")));
                }
            }
            Policy::Randomized(t) => {
                for (s, row) in t.iter().enumerate() {
                    if row.len() != n_actions {
                        return Err(Error::InvalidInput(format!("policy row {s} has wrong width")));
                    }
                    let total = sum(row.iter());
                    if row.iter().any(|w| w.is_negative())
                        || (total - T::one()).abs() > T::row_tolerance()
                    {
                        return Err(Error::InvalidInput(format!("policy row {s} is not a distribution")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_f64(&self) -> Policy<f64> {
        match self {
            Policy::Deterministic(t) => Policy::Deterministic(t.clone()),
            Policy::Randomized(t) => {
                Policy::Randomized(t.iter().map(|r| r.iter().map(|w| w.to_f64_lossy()).collect()).collect())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    RowSum,
    Negativity,
    RewardRange,
    Shape,
    IdCollision,
    DiscountRange,
    InitialState,
    NonFinite,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::RowSum => "row-sum",
            ViolationKind::Negativity => "negativity",
            ViolationKind::RewardRange => "reward-range",
            ViolationKind::Shape => "shape",
            ViolationKind::IdCollision => "id-collision",
            ViolationKind::DiscountRange => "discount-range",
            ViolationKind::InitialState => "initial-state",
            ViolationKind::NonFinite => "non-finite",
        }
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, kind: ViolationKind, message: String) {
        self.violations.push(Violation { kind, message });
    }

    pub fn into_result(self) -> Result<()> {
        if self.passed() {
            Ok(())
        } else {
            let text: Vec<String> =
                self.violations.iter().map(|v| format!("{}: {}", v.kind, v.message)).collect();
            Err(Error::Schema(text.join("; ")))
        }
    }
}

/// Checks every structural invariant; violations are collected, never thrown.
pub fn validate_mdp<T: Scalar>(mdp: &TabularMdp<T>) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = mdp.n_states();
    let k = mdp.n_actions();

    if n == 0 || k == 0 {
        report.push(ViolationKind::Shape, format!("need at least one state and one action (got {n}, {k})"));
    }
    for (what, ids) in [("state", &mdp.states), ("action", &mdp.actions)] {
        let mut seen = HashMap::new();
        for (i, id) in ids.iter().enumerate() {
            if let Some(j) = seen.insert(id.as_str(), i) {
                report.push(ViolationKind::IdCollision, format!("{what} `{id}` declared at {j} and {i}"));
            }
        }
    }

    if mdp.kernel.len() != k {
        report.push(ViolationKind::Shape, format!("kernel has {} action blocks, expected {k}", mdp.kernel.len()));
    }
    for (a, rows) in mdp.kernel.iter().enumerate() {
        if rows.len() != n {
            report.push(ViolationKind::Shape, format!("kernel block {a} has {} rows, expected {n}", rows.len()));
            continue;
        }
        for (s, row) in rows.iter().enumerate() {
            let mut total = T::zero();
            let mut prev: Option<usize> = None;
            for (t, p) in row {
                if *t >= n {
                    report.push(ViolationKind::Shape, format!("row ({a},{s}) points to state {t}"));
                }
                if prev == Some(*t) {
                    report.push(ViolationKind::Shape, format!("row ({a},{s}) repeats target {t}"));
                }
                prev = Some(*t);
                if !p.is_finite_value() {
                    report.push(ViolationKind::NonFinite, format!("P[{a}][{s}][{t}] is not finite"));
                } else if p.is_negative() {
                    report.push(ViolationKind::Negativity, format!("P[{a}][{s}][{t}] = {p} < 0"));
                }
                total = total + p.clone();
            }
            if (total.clone() - T::one()).abs() > T::row_tolerance() {
                report.push(ViolationKind::RowSum, format!("row ({a},{s}) sums to {total}"));
            }
        }
    }

    if mdp.rewards.len() != n {
        report.push(ViolationKind::Shape, format!("reward table has {} rows, expected {n}", mdp.rewards.len()));
    }
    for (s, row) in mdp.rewards.iter().enumerate() {
        if row.len() != k {
            report.push(ViolationKind::Shape, format!("reward row {s} has {} entries, expected {k}", row.len()));
        }
        for (a, r) in row.iter().enumerate() {
            if !r.is_finite_value() {
                report.push(ViolationKind::NonFinite, format!("r[{s}][{a}] is not finite"));
            } else if r.is_negative() || *r > mdp.r_max {
                report.push(ViolationKind::RewardRange, format!("r[{s}][{a}] = {r} outside [0, {}]", mdp.r_max));
            }
        }
    }

    if let Some(g) = &mdp.discount {
        if !(*g > T::zero() && *g < T::one()) {
            report.push(ViolationKind::DiscountRange, format!("gamma = {g} outside (0,1)"));
        }
    }
    if let Some(s0) = mdp.initial_state {
        if s0 >= n {
            report.push(ViolationKind::InitialState, format!("initial state index {s0} out of range"));
        }
    }
    report
}

/// Draws `s' ~ P_a(s, .)` with a generator seeded from `seed`.
pub fn sample_transition<T: Scalar>(mdp: &TabularMdp<T>, state: usize, action: usize, seed: u64) -> Result<usize> {
    mdp.check_state(state)?;
    mdp.check_action(action)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample_row(mdp.row(action, state), &mut rng))
}

/// Inverse-CDF draw from a sparse row.
pub fn sample_row<T: Scalar, R: Rng + ?Sized>(row: &[(usize, T)], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (t, p) in row {
        acc += p.to_f64_lossy();
        if u < acc {
            return *t;
        }
    }
    // rounding: fall back to the last state with positive mass
    row.iter().rev().find(|(_, p)| p.is_positive()).map(|(t, _)| *t).unwrap_or(row[0].0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    #[test]
    fn single_state_identity_passes() {
        let mdp = TabularMdp::new(names("s", 1), names("a", 1), vec![vec![vec![1.0]]], vec![vec![0.0]]).unwrap();
        assert!(validate_mdp(&mdp).passed());
    }

    #[test]
    fn short_row_is_a_row_sum_violation() {
        let mdp = TabularMdp::from_sparse_unchecked(
            names("s", 2),
            names("a", 1),
            vec![vec![vec![(0, 0.5), (1, 0.4)], vec![(1, 1.0)]]],
            vec![vec![0.0], vec![0.0]],
        );
        let report = validate_mdp(&mdp);
        assert!(report.has(ViolationKind::RowSum));
        assert_eq!(report.violations.len(), 1);
        assert!(TabularMdp::from_sparse(mdp.states.clone(), mdp.actions.clone(), mdp.kernel.clone(), mdp.rewards.clone()).is_err());
    }

    #[test]
    fn negative_reward_is_reported() {
        let mdp = TabularMdp::from_sparse_unchecked(names("s", 1), names("a", 1), vec![vec![vec![(0, 1.0)]]], vec![vec![-1.0]]);
        assert!(validate_mdp(&mdp).has(ViolationKind::RewardRange));
    }

    #[test]
    fn negative_probability_and_collisions_are_reported() {
        let mdp = TabularMdp::from_sparse_unchecked(
            vec!["x".into(), "x".into()],
            names("a", 1),
            vec![vec![vec![(0, 1.5), (1, -0.5)], vec![(1, 1.0)]]],
            vec![vec![0.0], vec![0.0]],
        );
        let report = validate_mdp(&mdp);
        assert!(report.has(ViolationKind::Negativity));
        assert!(report.has(ViolationKind::IdCollision));
        assert!(!report.has(ViolationKind::RowSum));
    }

    #[test]
    fn shape_and_discount_checks() {
        let mdp = TabularMdp::from_sparse_unchecked(names("s", 2), names("a", 1), vec![vec![vec![(0, 1.0)]]], vec![vec![0.0]])
            .with_discount(1.5);
        let report = validate_mdp(&mdp);
        assert!(report.has(ViolationKind::Shape));
        assert!(report.has(ViolationKind::DiscountRange));
    }

    #[test]
    fn point_mass_sampling_ignores_seed() {
        let mdp = TabularMdp::new(
            names("s", 3),
            names("a", 1),
            vec![vec![vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]],
            vec![vec![0.0]; 3],
        )
        .unwrap();
        for seed in 0..50 {
            assert_eq!(sample_transition(&mdp, 0, 0, seed).unwrap(), 2);
        }
        assert!(sample_transition(&mdp, 3, 0, 0).is_err());
        assert!(sample_transition(&mdp, 0, 1, 0).is_err());
    }

    #[test]
    fn uniform_row_frequencies_and_determinism() {
        let mdp = TabularMdp::new(
            names("s", 2),
            names("a", 1),
            vec![vec![vec![0.5, 0.5], vec![0.5, 0.5]]],
            vec![vec![0.0]; 2],
        )
        .unwrap();
        assert_eq!(sample_transition(&mdp, 0, 0, 7).unwrap(), sample_transition(&mdp, 0, 0, 7).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let ones = (0..n).filter(|_| sample_row(mdp.row(0, 0), &mut rng) == 1).count();
        let freq = ones as f64 / n as f64;
        assert!((freq - 0.5).abs() <= 0.01, "freq {freq}");
    }

    #[test]
    fn policy_rows_mix_actions() {
        let mdp = TabularMdp::new(
            names("s", 2),
            names("a", 2),
            vec![vec![vec![1.0, 0.0], vec![1.0, 0.0]], vec![vec![0.0, 1.0], vec![0.0, 1.0]]],
            vec![vec![1.0, 3.0], vec![0.0, 0.0]],
        )
        .unwrap();
        let pi = Policy::Randomized(vec![vec![0.25, 0.75], vec![1.0, 0.0]]);
        pi.check(2, 2).unwrap();
        assert_eq!(mdp.policy_row(&pi, 0), vec![(0, 0.25), (1, 0.75)]);
        assert_eq!(mdp.policy_reward(&pi, 0), 2.5);
        assert!(Policy::<f64>::Deterministic(vec![0, 2]).check(2, 2).is_err());
    }
}
