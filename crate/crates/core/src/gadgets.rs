//! Hardness gadget `M_G` compiled from a 3-regular graph, with the random
//! rewards `X_v`, the soundness/completeness thresholds and their checks.
//!
//! States, in index order: `s0`, `s1`, one `s_v` per vertex, one `s_(u,v)`
//! per edge (edge order of the input), then `s_B`, `s_N`, `s_T`. From `s0`
//! action `a1` loops and every other action moves to `s1`; `s1` moves to a
//! uniform vertex state; `s_v` under `a1` reaches the edge state of an
//! incident edge `p` with probability `m^{-2p}`, the bonus state `s_B` with
//! the mass that makes the expected next reward equal `μ`, and `s_N`
//! otherwise. Other actions at `s_v` go to `s_N`. Edge states, `s_B` and
//! `s_N` lead to the absorbing `s_T`. Rewards are paid when leaving edge
//! states (`m^{4p}`) and `s_B` (`m^{10m}`).

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::budget::{budget_or, saturating_pow, DEFAULT_BUDGET, DEFAULT_SUBSET_EXPANSION_BUDGET};
use crate::chain::{acyclic_optimal_values, evaluate_chain_exact, gain_with_reset};
use crate::error::{Error, Result};
use crate::lookahead::build_augmented_mdp;
use crate::mdp::{RationalMdp, Row, TabularMdp};

/// Hard cap for exhaustive subset enumeration.
pub const MAX_EXHAUSTIVE_VERTICES: usize = 20;
pub const MAX_SEPARATION_VERTICES: usize = 12;

/// Serializes a rational as its exact `"p/q"` string.
pub fn rational_string<S: serde::Serializer>(value: &BigRational, serializer: S) -> std::result::Result<S::Ok, S::Error> {
    serializer.serialize_str(&value.to_string())
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn pow(base: usize, exp: usize) -> BigRational {
    BigRational::from_integer(num_traits::pow(BigInt::from(base), exp))
}

/// Undirected simple graph on vertices `1..=n`; edge `i` (1-based) is the
/// `i`-th input edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RegularityVerdict {
    pub regular: bool,
    pub degree: usize,
    /// First vertex whose degree differs, with that degree.
    pub offending: Option<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (i, &(u, v)) in edges.iter().enumerate() {
            if u == 0 || v == 0 || u > n || v > n {
                return Err(Error::InvalidInput(format!("edge {} = ({u}, {v}) has a vertex outside 1..={n}", i + 1)));
            }
            if u == v {
                return Err(Error::InvalidInput(format!("edge {} is a self-loop at {u}", i + 1)));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::InvalidInput(format!("edge {} = ({u}, {v}) is a duplicate", i + 1)));
            }
        }
        Ok(Graph { n, edges })
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    /// `(edge index p, other endpoint)` for each edge at `v`, by index.
    pub fn incident(&self, v: usize) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .enumerate()
            .filter_map(|(i, &(a, b))| {
                if a == v {
                    Some((i + 1, b))
                } else if b == v {
                    Some((i + 1, a))
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.edges.iter().any(|&(a, b)| (a == u && b == v) || (a == v && b == u))
    }

    pub fn is_independent(&self, set: &[usize]) -> bool {
        set.iter().enumerate().all(|(i, &u)| set[i + 1..].iter().all(|&v| !self.adjacent(u, v)))
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.m());
        for (u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

/// Parses `"n m"` followed by `m` lines `"u v"` (1-based vertices).
pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let parse_pair = |(no, line): (usize, &str)| -> Result<(usize, usize)> {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = |message: String| Error::Parse { location: format!("line {}", no + 1), message };
        if fields.len() != 2 {
            return Err(bad(format!("expected two integers, got `{line}`")));
        }
        let a = fields[0].parse().map_err(|e| bad(format!("`{}`: {e}", fields[0])))?;
        let b = fields[1].parse().map_err(|e| bad(format!("`{}`: {e}", fields[1])))?;
        Ok((a, b))
    };
    let header = lines.next().ok_or_else(|| Error::Parse { location: "line 1".into(), message: "empty graph file".into() })?;
    let (n, m) = parse_pair(header)?;
    let edges = lines.map(parse_pair).collect::<Result<Vec<_>>>()?;
    if edges.len() != m {
        return Err(Error::Parse {
            location: "header".into(),
            message: format!("header announces {m} edges, file lists {}", edges.len()),
        });
    }
    Graph::new(n, edges)
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<Graph> {
    parse_graph(&fs::read_to_string(path)?)
}

pub fn check_regular(graph: &Graph, d: usize) -> RegularityVerdict {
    let offending = (1..=graph.n).map(|v| (v, graph.degree(v))).find(|&(_, deg)| deg != d);
    RegularityVerdict { regular: offending.is_none() && graph.n > 0, degree: d, offending }
}

/// Named 3-regular fixtures with fixed edge order.
pub mod fixtures {
    use super::Graph;

    pub fn k4() -> Graph {
        Graph::new(4, vec![(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]).expect("fixture")
    }

    pub fn k33() -> Graph {
        let edges = (1..=3).flat_map(|u| (4..=6).map(move |v| (u, v))).collect();
        Graph::new(6, edges).expect("fixture")
    }

    /// 3-cube: vertex `i + 1` is the bit string `i`; edges join strings at Hamming distance one.
    pub fn q3() -> Graph {
        let mut edges = Vec::new();
        for a in 0..8usize {
            for b in a + 1..8 {
                if (a ^ b).count_ones() == 1 {
                    edges.push((a + 1, b + 1));
                }
            }
        }
        Graph::new(8, edges).expect("fixture")
    }

    /// Outer 5-cycle 1..5, spokes to 6..10, inner pentagram.
    pub fn petersen() -> Graph {
        Graph::new(
            10,
            vec![
                (1, 2), (2, 3), (3, 4), (4, 5), (5, 1),
                (1, 6), (2, 7), (3, 8), (4, 9), (5, 10),
                (6, 8), (8, 10), (10, 7), (7, 9), (9, 6),
            ],
        )
        .expect("fixture")
    }

    pub fn by_name(name: &str) -> Option<Graph> {
        match name.to_ascii_lowercase().as_str() {
            "k4" => Some(k4()),
            "k33" | "k3,3" | "k_3_3" => Some(k33()),
            "q3" | "cube" => Some(q3()),
            "petersen" => Some(petersen()),
            _ => None,
        }
    }

    pub const NAMES: [&str; 4] = ["k4", "k33", "q3", "petersen"];
}

/// Law of `X_v`: atoms `(value, probability)` in edge order, then the bonus
/// atom `m^{10m}`, then the zero atom (omitted when its mass vanishes).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct XvLaw {
    pub vertex: usize,
    pub atoms: Vec<XvAtom>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct XvAtom {
    /// `edge p`, `bonus` or `none`.
    pub source: String,
    #[serde(serialize_with = "rational_string")]
    pub value: BigRational,
    #[serde(serialize_with = "rational_string")]
    pub probability: BigRational,
}

impl XvLaw {
    pub fn mean(&self) -> BigRational {
        self.atoms.iter().fold(BigRational::zero(), |acc, a| acc + &a.value * &a.probability)
    }

    pub fn total(&self) -> BigRational {
        self.atoms.iter().fold(BigRational::zero(), |acc, a| acc + &a.probability)
    }
}

/// The compiled instance with its state layout.
#[derive(Clone, Debug)]
pub struct GadgetInstance {
    pub graph: Graph,
    pub mdp: RationalMdp,
    pub k: usize,
    pub mu: BigRational,
    pub gamma: BigRational,
    pub thresholds: Thresholds,
    pub b_mass: Vec<BigRational>,
}

impl GadgetInstance {
    pub const S0: usize = 0;
    pub const S1: usize = 1;

    pub fn n_actions(&self) -> usize {
        self.mdp.n_actions()
    }

    /// State index of vertex `v` (1-based).
    pub fn vertex_state(&self, v: usize) -> usize {
        1 + v
    }

    /// State index of edge `p` (1-based).
    pub fn edge_state(&self, p: usize) -> usize {
        1 + self.graph.n + p
    }

    pub fn bonus_state(&self) -> usize {
        2 + self.graph.n + self.graph.m()
    }

    pub fn null_state(&self) -> usize {
        self.bonus_state() + 1
    }

    pub fn terminal_state(&self) -> usize {
        self.bonus_state() + 2
    }

    /// Vertex (1-based) of a vertex state index, if it is one.
    pub fn vertex_of_state(&self, s: usize) -> Option<usize> {
        (2..2 + self.graph.n).contains(&s).then(|| s - 1)
    }

    /// Floating-point copy, refused when magnitudes exceed 2^53.
    pub fn to_f64_checked(&self) -> Result<TabularMdp<f64>> {
        self.mdp.to_f64_checked()
    }
}

/// Default `μ = max_v Σ_{(u,v)∈E} m^{2p} + 1`.
pub fn default_mu(graph: &Graph) -> BigRational {
    let m = graph.m();
    (1..=graph.n)
        .map(|v| graph.incident(v).iter().fold(BigRational::zero(), |acc, (p, _)| acc + pow(m, 2 * p)))
        .max()
        .unwrap_or_else(BigRational::zero)
        + BigRational::one()
}

/// Compiles `M_G`. The action count is `max(k, 2)`, so that a depth-2
/// look-ahead from `s0` reveals up to `k` vertices.
pub fn build_gadget_mdp(graph: &Graph, k: usize, mu: Option<BigRational>) -> Result<GadgetInstance> {
    let verdict = check_regular(graph, 3);
    if !verdict.regular {
        return Err(Error::InvalidInput(match verdict.offending {
            Some((v, d)) => format!("graph is not 3-regular: vertex {v} has degree {d}"),
            None => "graph is empty".into(),
        }));
    }
    if k == 0 || k > graph.n {
        return Err(Error::InvalidInput(format!("k = {k} outside 1..={}", graph.n)));
    }
    let n = graph.n;
    let m = graph.m();
    let mu = mu.unwrap_or_else(|| default_mu(graph));
    let n_actions = k.max(2);
    let bonus_reward = pow(m, 10 * m);

    let mut states = vec!["s0".to_string(), "s1".to_string()];
    states.extend((1..=n).map(|v| format!("v{v}")));
    states.extend(graph.edges.iter().map(|(u, v)| format!("e{u}_{v}")));
    states.extend(["sB".to_string(), "sN".to_string(), "sT".to_string()]);
    let actions: Vec<String> = (1..=n_actions).map(|a| format!("a{a}")).collect();
    let n_states = states.len();
    let (s_b, s_n, s_t) = (2 + n + m, 3 + n + m, 4 + n + m);

    let mut b_mass = Vec::with_capacity(n);
    let mut vertex_rows: Vec<Row<BigRational>> = Vec::with_capacity(n);
    for v in 1..=n {
        let incident = graph.incident(v);
        let edge_mean = incident.iter().fold(BigRational::zero(), |acc, (p, _)| acc + pow(m, 2 * p));
        let q_b = (&mu - &edge_mean) / &bonus_reward;
        if q_b.is_negative() {
            return Err(Error::InvalidInput(format!("μ = {mu} is too small for vertex {v}: bonus mass would be negative")));
        }
        let mut row: Row<BigRational> = incident.iter().map(|&(p, _)| (1 + n + p, pow(m, 2 * p).recip())).collect();
        let edge_mass = row.iter().fold(BigRational::zero(), |acc, (_, p)| acc + p);
        let q_n = BigRational::one() - &edge_mass - &q_b;
        if q_n.is_negative() {
            return Err(Error::InvalidInput(format!("μ = {mu} is too large for vertex {v}: no mass left for s_N")));
        }
        if !q_b.is_zero() {
            row.push((s_b, q_b.clone()));
        }
        if !q_n.is_zero() {
            row.push((s_n, q_n));
        }
        b_mass.push(q_b);
        vertex_rows.push(row);
    }

    let one = || BigRational::one();
    let uniform: Row<BigRational> = (0..n).map(|i| (2 + i, BigRational::new(1.into(), BigInt::from(n)))).collect();
    let kernel: Vec<Vec<Row<BigRational>>> = (0..n_actions)
        .map(|a| {
            (0..n_states)
                .map(|s| match s {
                    0 if a == 0 => vec![(0, one())],
                    0 => vec![(1, one())],
                    1 => uniform.clone(),
                    s if s < 2 + n => {
                        if a == 0 {
                            vertex_rows[s - 2].clone()
                        } else {
                            vec![(s_n, one())]
                        }
                    }
                    _ => vec![(s_t, one())],
                })
                .collect()
        })
        .collect();
    let rewards: Vec<Vec<BigRational>> = (0..n_states)
        .map(|s| {
            let r = if (2 + n..2 + n + m).contains(&s) {
                pow(m, 4 * (s - 1 - n))
            } else if s == s_b {
                bonus_reward.clone()
            } else {
                BigRational::zero()
            };
            vec![r; n_actions]
        })
        .collect();
    let mdp = TabularMdp::from_sparse(states, actions, kernel, rewards)?.with_initial_state(0);

    let thresholds = thresholds_for(n, m, k, &mu)?;
    let gamma = thresholds.gamma.clone();
    let mdp = mdp.with_discount(gamma.clone());
    Ok(GadgetInstance { graph: graph.clone(), mdp, k, mu, gamma, thresholds, b_mass })
}

/// `X_v`, read off the kernel row of `s_v` under `a1` and the rewards.
pub fn xv_law(instance: &GadgetInstance, v: usize) -> Result<XvLaw> {
    if v == 0 || v > instance.graph.n {
        return Err(Error::InvalidId(format!("vertex {v}")));
    }
    let s = instance.vertex_state(v);
    let mut atoms: Vec<XvAtom> = Vec::new();
    let mut null_mass = BigRational::zero();
    for (t, p) in instance.mdp.row(0, s) {
        if *t == instance.null_state() {
            null_mass = p.clone();
            continue;
        }
        let source = if *t == instance.bonus_state() { "bonus".to_string() } else { format!("edge {}", t - 1 - instance.graph.n) };
        atoms.push(XvAtom { source, value: instance.mdp.reward(*t, 0).clone(), probability: p.clone() });
    }
    if !null_mass.is_zero() {
        atoms.push(XvAtom { source: "none".into(), value: BigRational::zero(), probability: null_mass });
    }
    Ok(XvLaw { vertex: v, atoms })
}

/// `E[max_{v∈Y} X_v]` by expanding the product of the supports.
pub fn expected_max_subset(instance: &GadgetInstance, subset: &[usize]) -> Result<BigRational> {
    let unique: BTreeSet<usize> = subset.iter().copied().collect();
    if unique.len() != subset.len() {
        return Err(Error::InvalidInput("subset lists a vertex twice".into()));
    }
    let laws = subset.iter().map(|&v| xv_law(instance, v)).collect::<Result<Vec<_>>>()?;
    expected_max_of_laws(&laws, budget_or(DEFAULT_SUBSET_EXPANSION_BUDGET))
}

pub fn expected_max_of_laws(laws: &[XvLaw], budget: u64) -> Result<BigRational> {
    if laws.is_empty() {
        return Ok(BigRational::zero());
    }
    let size = laws.iter().fold(1u64, |acc, l| acc.saturating_mul(l.atoms.len() as u64));
    if size > budget {
        return Err(Error::BudgetExceeded { what: "subset expansion", limit: budget, required: size });
    }
    let mut choice = vec![0usize; laws.len()];
    let mut total = BigRational::zero();
    loop {
        let mut prob = BigRational::one();
        let mut best = &laws[0].atoms[choice[0]].value;
        for (law, &c) in laws.iter().zip(&choice) {
            let atom = &law.atoms[c];
            prob *= &atom.probability;
            if atom.value > *best {
                best = &atom.value;
            }
        }
        total += prob * best;
        let mut i = laws.len();
        loop {
            if i == 0 {
                return Ok(total);
            }
            i -= 1;
            choice[i] += 1;
            if choice[i] < laws[i].atoms.len() {
                break;
            }
            choice[i] = 0;
        }
    }
}

fn check_exhaustive(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        Err(Error::Refused(format!("exhaustive enumeration limited to {cap} vertices, graph has {n}")))
    } else {
        Ok(())
    }
}

/// Size-`k` subsets of `1..=n` in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..=n {
            if n - v + 1 < k - cur.len() {
                break;
            }
            cur.push(v);
            go(v + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(1, n, k, &mut Vec::new(), &mut out);
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct SubsetValue {
    pub subset: Vec<usize>,
    #[serde(serialize_with = "rational_string")]
    pub value: BigRational,
}

/// `max_{|Y|=k} E[max_{v∈Y} X_v]`; ties go to the lexicographically first subset.
pub fn best_subset_bruteforce(instance: &GadgetInstance, k: usize) -> Result<SubsetValue> {
    check_exhaustive(instance.graph.n, MAX_EXHAUSTIVE_VERTICES)?;
    let mut best: Option<SubsetValue> = None;
    for subset in subsets(instance.graph.n, k) {
        let value = expected_max_subset(instance, &subset)?;
        if best.as_ref().map_or(true, |b| value > b.value) {
            best = Some(SubsetValue { subset, value });
        }
    }
    best.ok_or_else(|| Error::InvalidInput(format!("no subset of size {k}")))
}

/// A maximum independent set (lexicographically first among the largest).
pub fn max_independent_set_bruteforce(graph: &Graph) -> Result<(Vec<usize>, usize)> {
    check_exhaustive(graph.n, MAX_EXHAUSTIVE_VERTICES)?;
    for k in (1..=graph.n).rev() {
        if let Some(set) = first_independent_set(graph, k) {
            return Ok((set, k));
        }
    }
    Ok((Vec::new(), 0))
}

pub fn first_independent_set(graph: &Graph, k: usize) -> Option<Vec<usize>> {
    subsets(graph.n, k).into_iter().find(|s| graph.is_independent(s))
}

/// Exact thresholds; all bounds are evaluated at the instance discount.
#[derive(Clone, Debug, Serialize)]
pub struct Thresholds {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    #[serde(serialize_with = "rational_string")]
    pub mu: BigRational,
    /// Waiting-time success probability `1/n^k` used by the bound.
    #[serde(serialize_with = "rational_string")]
    pub success_probability: BigRational,
    /// `(kμ − 2/m) / (kμ − 1)`.
    #[serde(serialize_with = "rational_string")]
    pub ratio: BigRational,
    /// Smallest discount for which completeness ≥ soundness: `1 / (1 + (c−1)/n^k)`.
    #[serde(serialize_with = "rational_string")]
    pub gamma_min: BigRational,
    /// First-order form `1 − (c−1)/n^k` of the same condition.
    #[serde(serialize_with = "rational_string")]
    pub gamma_min_linearized: BigRational,
    /// Instance discount: `gamma_min` rounded up to a dyadic rational.
    #[serde(serialize_with = "rational_string")]
    pub gamma: BigRational,
    /// `E[γ^τ]` for `τ ~ Geom(1/n^k)` on `{1, 2, …}`.
    #[serde(serialize_with = "rational_string")]
    pub expected_discount: BigRational,
    /// `γ³ (kμ − 1)`.
    #[serde(serialize_with = "rational_string")]
    pub soundness: BigRational,
    /// `(kμ − 2/m) γ³ E[γ^τ]`.
    #[serde(serialize_with = "rational_string")]
    pub completeness: BigRational,
    pub separated: bool,
    /// Whether completeness exceeds soundness at the linearized discount.
    pub separated_at_linearized: bool,
}

/// `E[γ^τ] = γp / (1 − γ(1 − p))` for `τ ~ Geom(p)` on `{1, 2, …}`.
pub fn expected_geometric_discount(gamma: &BigRational, p: &BigRational) -> BigRational {
    gamma * p / (BigRational::one() - gamma * (BigRational::one() - p))
}

/// Smallest-denominator dyadic `j / 2^e` strictly above `x ∈ (0, 1)` and below 1.
pub fn dyadic_above(x: &BigRational) -> BigRational {
    let mut e = 1u32;
    loop {
        let scale = BigInt::from(2).pow(e);
        let floor = (x * BigRational::from_integer(scale.clone())).floor().to_integer();
        let numer = floor + 1;
        if numer < scale {
            return BigRational::new(numer, scale);
        }
        e += 1;
    }
}

fn bounds_for(k_mu: &BigRational, two_over_m: &BigRational, p: &BigRational, g: &BigRational) -> (BigRational, BigRational) {
    let g3 = g * g * g;
    let sound = &g3 * (k_mu - BigRational::one());
    let complete = (k_mu - two_over_m) * &g3 * expected_geometric_discount(g, p);
    (sound, complete)
}

/// `(soundness, completeness)` of the instance evaluated at an arbitrary discount.
pub fn bounds_at(instance: &GadgetInstance, gamma: &BigRational) -> (BigRational, BigRational) {
    let k_mu = int(instance.k as i64) * &instance.mu;
    let two_over_m = BigRational::new(2.into(), BigInt::from(instance.graph.m()));
    bounds_for(&k_mu, &two_over_m, &instance.thresholds.success_probability, gamma)
}

fn thresholds_for(n: usize, m: usize, k: usize, mu: &BigRational) -> Result<Thresholds> {
    let k_mu = int(k as i64) * mu;
    if k_mu <= BigRational::one() {
        return Err(Error::InvalidInput(format!("degenerate instance: kμ = {k_mu} ≤ 1")));
    }
    let big_n = pow(n, k);
    let p = big_n.recip();
    let two_over_m = BigRational::new(2.into(), BigInt::from(m));
    let ratio = (&k_mu - &two_over_m) / (&k_mu - BigRational::one());
    let excess = (&ratio - BigRational::one()) * &p;
    let gamma_min = (BigRational::one() + &excess).recip();
    let gamma_min_linearized = BigRational::one() - &excess;
    let gamma = dyadic_above(&gamma_min);
    let bounds = |g: &BigRational| bounds_for(&k_mu, &two_over_m, &p, g);
    let (soundness, completeness) = bounds(&gamma);
    let (s_lin, c_lin) = bounds(&gamma_min_linearized);
    Ok(Thresholds {
        n,
        m,
        k,
        mu: mu.clone(),
        success_probability: p.clone(),
        ratio,
        expected_discount: expected_geometric_discount(&gamma, &p),
        separated: soundness < completeness,
        separated_at_linearized: s_lin < c_lin,
        gamma_min,
        gamma_min_linearized,
        gamma,
        soundness,
        completeness,
    })
}

pub fn thresholds(instance: &GadgetInstance) -> Result<Thresholds> {
    thresholds_for(instance.graph.n, instance.graph.m(), instance.k, &instance.mu)
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaCheck {
    pub lemma: &'static str,
    pub passed: bool,
    /// Extremal subset (largest value for soundness, the target set for completeness).
    pub subset: Vec<usize>,
    #[serde(serialize_with = "rational_string")]
    pub value: BigRational,
    #[serde(serialize_with = "rational_string")]
    pub bound: BigRational,
    pub subsets_checked: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationReport {
    pub independence_number: usize,
    pub has_independent_set_of_size_k: bool,
    pub lemma: LemmaCheck,
    pub thresholds_separated: bool,
    pub passed: bool,
}

/// Checks the lemma that applies to the instance: without a size-`k`
/// independent set every size-`k` subset has `E[max] ≤ kμ − 1`; with one
/// (`S*`, the first in lexicographic order) `E[max_{S*}] ≥ kμ − 2/m`.
pub fn verify_separation(instance: &GadgetInstance) -> Result<SeparationReport> {
    check_exhaustive(instance.graph.n, MAX_SEPARATION_VERTICES)?;
    let k = instance.k;
    let k_mu = int(k as i64) * &instance.mu;
    let (_, alpha) = max_independent_set_bruteforce(&instance.graph)?;
    let lemma = if alpha < k {
        let bound = &k_mu - BigRational::one();
        let all = subsets(instance.graph.n, k);
        let mut worst: Option<(Vec<usize>, BigRational)> = None;
        for s in &all {
            let value = expected_max_subset(instance, s)?;
            if worst.as_ref().map_or(true, |(_, w)| value > *w) {
                worst = Some((s.clone(), value));
            }
        }
        let (subset, value) = worst.expect("at least one subset");
        LemmaCheck { lemma: "soundness", passed: value <= bound, subset, value, bound, subsets_checked: all.len() }
    } else {
        let bound = &k_mu - BigRational::new(2.into(), BigInt::from(instance.graph.m()));
        let subset = first_independent_set(&instance.graph, k).expect("independent set exists");
        let value = expected_max_subset(instance, &subset)?;
        LemmaCheck { lemma: "completeness", passed: value >= bound, subset, value, bound, subsets_checked: 1 }
    };
    let thresholds_separated = instance.thresholds.separated;
    Ok(SeparationReport {
        independence_number: alpha,
        has_independent_set_of_size_k: alpha >= k,
        passed: lemma.passed && thresholds_separated,
        lemma,
        thresholds_separated,
    })
}

/// Structural integrity of a compiled instance, every check exact.
#[derive(Clone, Debug, Serialize)]
pub struct IntegrityReport {
    pub rows_exact: bool,
    pub means_equal_mu: bool,
    pub edge_atoms_exact: bool,
    /// `max_v P(X_v = m^{10m}) · m^{8m}`; stays below 4 with the default `μ`.
    pub scaled_bonus_mass: f64,
    pub bonus_mass_within_scaling: bool,
}

pub fn check_integrity(instance: &GadgetInstance) -> Result<IntegrityReport> {
    let report = instance.mdp.validate();
    let m = instance.graph.m();
    let mut means = true;
    let mut atoms = true;
    for v in 1..=instance.graph.n {
        let law = xv_law(instance, v)?;
        means &= law.mean() == instance.mu && law.total().is_one();
        for (p, _) in instance.graph.incident(v) {
            let source = format!("edge {p}");
            atoms &= law
                .atoms
                .iter()
                .any(|a| a.source == source && a.probability == pow(m, 2 * p).recip() && a.value == pow(m, 4 * p));
        }
    }
    let scale = pow(m, 8 * m);
    let scaled = instance.b_mass.iter().map(|q| q * &scale).max().unwrap_or_else(BigRational::zero);
    Ok(IntegrityReport {
        rows_exact: report.passed(),
        means_equal_mu: means,
        edge_atoms_exact: atoms,
        scaled_bonus_mass: scaled.to_f64().unwrap_or(f64::INFINITY),
        bonus_mass_within_scaling: scaled <= int(4),
    })
}

/// Exact evaluation of the waiting policy on the depth-2 augmented gadget.
#[derive(Clone, Debug, Serialize)]
pub struct WaitingReport {
    pub target_set: Vec<usize>,
    pub augmented_states: usize,
    pub root_states: usize,
    /// Root states whose leaving value equals `γ³ E[max_{v∈S_V(ξ)} X_v]`.
    pub leave_values_matching: usize,
    /// `P(S_V(ξ) = S*)` under `Λ_{s0}`.
    #[serde(serialize_with = "rational_string")]
    pub event_probability: BigRational,
    /// `k!/n^k`, the event probability when `|A| = k`.
    #[serde(serialize_with = "rational_string")]
    pub event_probability_formula: BigRational,
    /// `E_{Λ_{s0}}[v^π]`.
    #[serde(serialize_with = "rational_string")]
    pub policy_value: BigRational,
    /// `γ³ E[max_{S*} X] q / (1 − γ(1 − q))` with the exact `q`.
    #[serde(serialize_with = "rational_string")]
    pub closed_form: BigRational,
    #[serde(serialize_with = "rational_string")]
    pub completeness_bound: BigRational,
    /// Gain of the reset chain under the same policy.
    #[serde(serialize_with = "rational_string")]
    pub reset_gain: BigRational,
    pub matches_closed_form: bool,
    pub meets_completeness_bound: bool,
    pub renewal_identity_exact: bool,
}

/// Builds the reachable depth-2 augmented chain from `s0`, computes optimal
/// values below `s0` by backward induction, and evaluates the policy that
/// plays `a1` at `s0` until the revealed vertex set equals `S*` and then
/// acts optimally.
pub fn waiting_policy_value(instance: &GadgetInstance, target: &[usize]) -> Result<WaitingReport> {
    let mut target_set: Vec<usize> = target.to_vec();
    target_set.sort_unstable();
    target_set.dedup();
    if !instance.graph.is_independent(&target_set) || target_set.len() != instance.k {
        return Err(Error::InvalidInput(format!("{target:?} is not an independent set of size {}", instance.k)));
    }
    let budget = budget_or(DEFAULT_BUDGET);
    let base = &instance.mdp;
    let gamma = &instance.gamma;
    let aug = build_augmented_mdp(base, &[GadgetInstance::S0], 2, budget)?;
    let n_aug = aug.mdp.n_states();
    let at_root: Vec<bool> = aug.states.iter().map(|xi| xi.root() == GadgetInstance::S0).collect();
    let optimal = acyclic_optimal_values(&aug.mdp, gamma, &at_root)?;
    let revealed = |i: usize| -> BTreeSet<usize> {
        aug.states[i].revealed_set(2, 1).into_iter().filter_map(|s| instance.vertex_of_state(s)).collect()
    };
    let target_key: BTreeSet<usize> = target_set.iter().copied().collect();

    let mut memo: HashMap<Vec<usize>, BigRational> = HashMap::new();
    let g3 = gamma * gamma * gamma;
    let mut leave_matching = 0;
    let mut policy = vec![0usize; n_aug];
    for i in 0..n_aug {
        if at_root[i] {
            let set: Vec<usize> = revealed(i).into_iter().collect();
            let leave = aug.mdp.row(1, i).iter().fold(BigRational::zero(), |acc, (t, p)| {
                acc + p * optimal[*t].as_ref().expect("value below the root")
            }) * gamma;
            let expected = match memo.get(&set) {
                Some(x) => x.clone(),
                None => {
                    let x = expected_max_subset(instance, &set)?;
                    memo.insert(set.clone(), x.clone());
                    x
                }
            };
            if leave == &g3 * expected {
                leave_matching += 1;
            }
            policy[i] = if revealed(i) == target_key { 1 } else { 0 };
        } else {
            let mut best = 0;
            let mut best_q: Option<BigRational> = None;
            for a in 0..aug.mdp.n_actions() {
                let q = aug.mdp.reward(i, a).clone()
                    + gamma
                        * aug.mdp.row(a, i).iter().fold(BigRational::zero(), |acc, (t, p)| {
                            acc + p * optimal[*t].as_ref().expect("value below the root")
                        });
                if best_q.as_ref().map_or(true, |b| q > *b) {
                    best = a;
                    best_q = Some(q);
                }
            }
            policy[i] = best;
        }
    }
    let rows: Vec<Row<BigRational>> = (0..n_aug).map(|i| aug.mdp.row(policy[i], i).to_vec()).collect();
    let rewards: Vec<BigRational> = (0..n_aug).map(|i| aug.mdp.reward(i, policy[i]).clone()).collect();
    let values = evaluate_chain_exact(&rows, &rewards, gamma)?;
    let start = aug.initial_distribution(base, GadgetInstance::S0, budget)?;
    let policy_value = start.iter().fold(BigRational::zero(), |acc, (i, p)| acc + p * &values[*i]);
    let q = start
        .iter()
        .filter(|(i, _)| revealed(*i) == target_key)
        .fold(BigRational::zero(), |acc, (_, p)| acc + p);
    let k = instance.k;
    let factorial: BigInt = (1..=k).map(BigInt::from).product();
    let formula = BigRational::new(factorial, saturating_pow(instance.graph.n as u64, k as u64).into());
    let e_target = expected_max_subset(instance, &target_set)?;
    let closed_form = &g3 * &e_target * &q / (BigRational::one() - gamma * (BigRational::one() - &q));
    let reset_gain = gain_with_reset(&rows, &rewards, gamma, &start)?;
    let renewal = reset_gain == (BigRational::one() - gamma) * &policy_value;
    Ok(WaitingReport {
        target_set,
        augmented_states: n_aug,
        root_states: at_root.iter().filter(|x| **x).count(),
        leave_values_matching: leave_matching,
        event_probability: q,
        event_probability_formula: formula,
        matches_closed_form: policy_value == closed_form,
        meets_completeness_bound: policy_value >= instance.thresholds.completeness,
        completeness_bound: instance.thresholds.completeness.clone(),
        renewal_identity_exact: renewal,
        reset_gain,
        policy_value,
        closed_form,
    })
}

/// `gcd`-free size of a rational, for reporting magnitudes.
pub fn decimal_digits(x: &BigRational) -> usize {
    let g = x.numer().gcd(x.denom());
    (x.numer() / &g).to_string().trim_start_matches('-').len()
}
