//! Multi-step transition look-ahead as a state augmentation.
//!
//! An augmented state `ξ` stores, for every depth `k ≤ ℓ` and every action
//! sequence of length `k`, the state that sequence reaches from the current
//! state. Block `k` has `|A|^k` cells ordered lexicographically by action
//! sequence (first action most significant), so the cells of block `k` whose
//! sequence starts with action `a` form the contiguous range
//! `a·|A|^(k-1) .. (a+1)·|A|^(k-1)`.
//!
//! Successor draws are shared: at a fixed depth, every sequence reaching the
//! same state observes the same realized successor for each next action.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::budget::saturating_pow;
use crate::error::{Error, Result};
use crate::mdp::{sample_row, Distribution, Row, TabularMdp};
use crate::scalar::Scalar;

pub const MAX_LOOKAHEAD: usize = 4;

/// Look-ahead tree `ξ = (ξ[0], …, ξ[ℓ])` flattened block by block.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AugmentedState {
    depth: u8,
    n_actions: u16,
    cells: Vec<u32>,
}

fn block_offset(n_actions: usize, k: usize) -> usize {
    (0..k).map(|j| n_actions.pow(j as u32)).sum()
}

fn tree_len(n_actions: usize, depth: usize) -> usize {
    block_offset(n_actions, depth + 1)
}

impl AugmentedState {
    pub fn from_blocks(n_actions: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        if blocks.is_empty() || blocks.len() > MAX_LOOKAHEAD + 1 {
            return Err(Error::InvalidInput(format!("look-ahead tree needs 1..={} blocks", MAX_LOOKAHEAD + 1)));
        }
        for (k, b) in blocks.iter().enumerate() {
            if b.len() != n_actions.pow(k as u32) {
                return Err(Error::InvalidInput(format!(
                    "block {k} has {} cells, expected {}",
                    b.len(),
                    n_actions.pow(k as u32)
                )));
            }
        }
        Ok(AugmentedState {
            depth: (blocks.len() - 1) as u8,
            n_actions: n_actions as u16,
            cells: blocks.iter().flatten().map(|&s| s as u32).collect(),
        })
    }

    /// The trivial tree of a depth-0 look-ahead.
    pub fn root_only(state: usize, n_actions: usize) -> Self {
        AugmentedState { depth: 0, n_actions: n_actions as u16, cells: vec![state as u32] }
    }

    pub fn depth(&self) -> usize {
        self.depth as usize
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions as usize
    }

    /// Current state `ξ[0]`.
    pub fn root(&self) -> usize {
        self.cells[0] as usize
    }

    pub fn block(&self, k: usize) -> &[u32] {
        let a = self.n_actions();
        let start = block_offset(a, k);
        &self.cells[start..start + a.pow(k as u32)]
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        (0..=self.depth()).map(|k| self.block(k).iter().map(|&s| s as usize).collect()).collect()
    }

    /// `ξ[k](a)`: cells of block `k` whose action sequence starts with `a`.
    pub fn sub_block(&self, k: usize, action: usize) -> &[u32] {
        let width = self.n_actions().pow(k as u32 - 1);
        &self.block(k)[action * width..(action + 1) * width]
    }

    /// State reached by an explicit action sequence (the push-forward value).
    pub fn reached(&self, sequence: &[usize]) -> usize {
        let a = self.n_actions();
        let idx = sequence.iter().fold(0usize, |acc, x| acc * a + x);
        self.block(sequence.len())[idx] as usize
    }

    pub fn cells(&self) -> &[u32] {
        &self.cells
    }

    pub fn key(&self) -> AugmentedKey {
        AugmentedKey::encode(self)
    }

    /// States revealed at depth `k` under sequences starting with `action`.
    pub fn revealed_set(&self, k: usize, action: usize) -> BTreeSet<usize> {
        self.sub_block(k, action).iter().map(|&s| s as usize).collect()
    }
}

impl fmt::Display for AugmentedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..=self.depth() {
            if k > 0 {
                f.write_str("|")?;
            }
            let cells: Vec<String> = self.block(k).iter().map(|s| s.to_string()).collect();
            f.write_str(&cells.join(","))?;
        }
        Ok(())
    }
}

/// Canonical byte encoding: a one-byte depth, a two-byte action count, then
/// every cell as a little-endian `u32`, block by block.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AugmentedKey(Vec<u8>);

impl AugmentedKey {
    pub fn encode(state: &AugmentedState) -> Self {
        let mut bytes = Vec::with_capacity(3 + 4 * state.cells.len());
        bytes.push(state.depth);
        bytes.extend_from_slice(&state.n_actions.to_le_bytes());
        for c in &state.cells {
            bytes.extend_from_slice(&c.to_le_bytes());
        }
        AugmentedKey(bytes)
    }

    pub fn decode(&self) -> Result<AugmentedState> {
        let bad = || Error::InvalidInput("malformed augmented key".into());
        if self.0.len() < 3 {
            return Err(bad());
        }
        let depth = self.0[0];
        let n_actions = u16::from_le_bytes([self.0[1], self.0[2]]);
        let body = &self.0[3..];
        if depth as usize > MAX_LOOKAHEAD
            || body.len() % 4 != 0
            || body.len() / 4 != tree_len(n_actions as usize, depth as usize)
        {
            return Err(bad());
        }
        let cells = body.chunks_exact(4).map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
        Ok(AugmentedState { depth, n_actions, cells })
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        AugmentedKey(bytes)
    }
}

fn check_depth(depth: usize) -> Result<()> {
    if depth > MAX_LOOKAHEAD {
        Err(Error::Refused(format!("look-ahead depth {depth} exceeds the supported maximum {MAX_LOOKAHEAD}")))
    } else {
        Ok(())
    }
}

/// Joint law of a fresh block whose cell `j·|A| + a'` is the successor of
/// `parents[j]` under `a'`. One draw per distinct (parent, action) pair.
fn fresh_block_law<T: Scalar>(
    mdp: &TabularMdp<T>,
    parents: &[u32],
    budget: u64,
) -> Result<Vec<(Vec<u32>, T)>> {
    let k = mdp.n_actions();
    let distinct: Vec<u32> = parents.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let draws: Vec<(u32, usize)> = distinct.iter().flat_map(|&d| (0..k).map(move |a| (d, a))).collect();
    let size = draws
        .iter()
        .fold(1u64, |acc, &(d, a)| acc.saturating_mul(mdp.row(a, d as usize).len() as u64));
    if size > budget {
        return Err(Error::BudgetExceeded { what: "look-ahead support", limit: budget, required: size });
    }
    let position: HashMap<(u32, usize), usize> = draws.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let mut out = Vec::with_capacity(size as usize);
    let mut choice = vec![0usize; draws.len()];
    loop {
        let mut prob = T::one();
        for (i, &(d, a)) in draws.iter().enumerate() {
            prob = prob * mdp.row(a, d as usize)[choice[i]].1.clone();
        }
        let mut cells = Vec::with_capacity(parents.len() * k);
        for &p in parents {
            for a in 0..k {
                let i = position[&(p, a)];
                cells.push(mdp.row(a, p as usize)[choice[i]].0 as u32);
            }
        }
        out.push((cells, prob));
        // odometer, last draw fastest
        let mut i = draws.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            choice[i] += 1;
            if choice[i] < mdp.row(draws[i].1, draws[i].0 as usize).len() {
                break;
            }
            choice[i] = 0;
        }
    }
}

/// `Λ_s`: law of the full depth-`ℓ` look-ahead tree observed at `state`.
pub fn initial_lookahead_distribution<T: Scalar>(
    mdp: &TabularMdp<T>,
    state: usize,
    depth: usize,
    budget: u64,
) -> Result<Distribution<AugmentedState, T>> {
    check_depth(depth)?;
    mdp.check_state(state)?;
    let k = mdp.n_actions();
    let mut partial: Vec<(Vec<u32>, T)> = vec![(vec![state as u32], T::one())];
    for level in 1..=depth {
        let parent_start = block_offset(k, level - 1);
        let mut next = Vec::new();
        for (cells, p) in &partial {
            let parents = &cells[parent_start..];
            for (block, q) in fresh_block_law(mdp, parents, budget)? {
                let mut extended = cells.clone();
                extended.extend_from_slice(&block);
                next.push((extended, p.clone() * q));
                if next.len() as u64 > budget {
                    return Err(Error::BudgetExceeded {
                        what: "look-ahead support",
                        limit: budget,
                        required: next.len() as u64,
                    });
                }
            }
        }
        partial = next;
    }
    let support = partial
        .into_iter()
        .map(|(cells, p)| (AugmentedState { depth: depth as u8, n_actions: k as u16, cells }, p))
        .collect();
    Ok(Distribution::new(support).canonical())
}

/// Checks that `ξ` could have been produced by the look-ahead process:
/// correct shape, every cell in the support of its parent's kernel row,
/// and equal realizations for equal (parent, action) pairs within a depth.
pub fn check_consistent<T: Scalar>(mdp: &TabularMdp<T>, xi: &AugmentedState) -> Result<()> {
    let k = mdp.n_actions();
    let depth = xi.depth();
    if xi.n_actions() != k || xi.cells.len() != tree_len(k, depth) {
        return Err(Error::InvalidInput(format!("augmented state {xi} does not match |A| = {k}")));
    }
    if xi.cells.iter().any(|&c| c as usize >= mdp.n_states()) {
        return Err(Error::InvalidInput(format!("augmented state {xi} references an unknown state")));
    }
    for level in 1..=depth {
        let parents = xi.block(level - 1);
        let block = xi.block(level);
        let mut seen: HashMap<(u32, usize), u32> = HashMap::new();
        for (j, &p) in parents.iter().enumerate() {
            for a in 0..k {
                let child = block[j * k + a];
                if mdp.prob(a, p as usize, child as usize).is_zero() {
                    return Err(Error::InvalidInput(format!(
                        "augmented state {xi}: cell {child} at depth {level} has zero probability"
                    )));
                }
                if let Some(prev) = seen.insert((p, a), child) {
                    if prev != child {
                        return Err(Error::InvalidInput(format!(
                            "augmented state {xi}: state {p} under action {a} realized twice at depth {level}"
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

/// `P̄_a(ξ, ·)`: shift every block one level up along action `a` and append a
/// freshly drawn deepest block.
pub fn augmented_kernel<T: Scalar>(
    mdp: &TabularMdp<T>,
    xi: &AugmentedState,
    action: usize,
    budget: u64,
) -> Result<Distribution<AugmentedState, T>> {
    mdp.check_action(action)?;
    check_consistent(mdp, xi)?;
    Ok(Distribution::new(kernel_row_unchecked(mdp, xi, action, budget)?))
}

fn shifted_prefix(xi: &AugmentedState, action: usize) -> Vec<u32> {
    let depth = xi.depth();
    let mut prefix = Vec::with_capacity(xi.cells.len());
    for level in 1..=depth {
        prefix.extend_from_slice(xi.sub_block(level, action));
    }
    prefix
}

fn kernel_row_unchecked<T: Scalar>(
    mdp: &TabularMdp<T>,
    xi: &AugmentedState,
    action: usize,
    budget: u64,
) -> Result<Vec<(AugmentedState, T)>> {
    let depth = xi.depth();
    let k = xi.n_actions;
    if depth == 0 {
        return Ok(mdp
            .row(action, xi.root())
            .iter()
            .map(|(t, p)| (AugmentedState { depth: 0, n_actions: k, cells: vec![*t as u32] }, p.clone()))
            .collect());
    }
    let prefix = shifted_prefix(xi, action);
    let parents = xi.sub_block(depth, action);
    let law = fresh_block_law(mdp, parents, budget)?;
    Ok(law
        .into_iter()
        .map(|(block, p)| {
            let mut cells = prefix.clone();
            cells.extend_from_slice(&block);
            (AugmentedState { depth: depth as u8, n_actions: k, cells }, p)
        })
        .collect())
}

/// Breadth-first closure of `Λ_root` supports under the augmented kernel.
/// The result is sorted, independent of discovery order.
pub fn reachable_augmented_states<T: Scalar>(
    mdp: &TabularMdp<T>,
    roots: &[usize],
    depth: usize,
    budget: u64,
) -> Result<Vec<AugmentedState>> {
    Ok(explore(mdp, roots, depth, budget)?.states)
}

struct Exploration<T: Scalar> {
    states: Vec<AugmentedState>,
    /// rows[state][action], in the sorted indexing of `states`
    rows: Vec<Vec<Row<T>>>,
}

fn explore<T: Scalar>(mdp: &TabularMdp<T>, roots: &[usize], depth: usize, budget: u64) -> Result<Exploration<T>> {
    check_depth(depth)?;
    let k = mdp.n_actions();
    let mut index: HashMap<AugmentedState, usize> = HashMap::new();
    let mut order: Vec<AugmentedState> = Vec::new();
    let mut rows: Vec<Vec<Row<T>>> = Vec::new();

    let mut intern = |xi: AugmentedState, order: &mut Vec<AugmentedState>| -> Result<usize> {
        if let Some(&i) = index.get(&xi) {
            return Ok(i);
        }
        let i = order.len();
        if i as u64 >= budget {
            return Err(Error::BudgetExceeded { what: "augmented state", limit: budget, required: i as u64 + 1 });
        }
        index.insert(xi.clone(), i);
        order.push(xi);
        Ok(i)
    };

    for &r in roots {
        for (xi, _) in initial_lookahead_distribution(mdp, r, depth, budget)?.into_support() {
            intern(xi, &mut order)?;
        }
    }
    let mut cursor = 0;
    while cursor < order.len() {
        let xi = order[cursor].clone();
        let mut state_rows = Vec::with_capacity(k);
        for a in 0..k {
            let mut row = Vec::new();
            for (next, p) in kernel_row_unchecked(mdp, &xi, a, budget)? {
                row.push((intern(next, &mut order)?, p));
            }
            state_rows.push(row);
        }
        rows.push(state_rows);
        cursor += 1;
    }

    // canonical (sorted) ordering
    let mut perm: Vec<usize> = (0..order.len()).collect();
    perm.sort_by(|&a, &b| order[a].cmp(&order[b]));
    let mut new_index = vec![0usize; order.len()];
    for (new, &old) in perm.iter().enumerate() {
        new_index[old] = new;
    }
    let states: Vec<AugmentedState> = perm.iter().map(|&old| order[old].clone()).collect();
    let rows = perm
        .iter()
        .map(|&old| {
            rows[old]
                .iter()
                .map(|row| {
                    let mut r: Row<T> = row.iter().map(|(t, p)| (new_index[*t], p.clone())).collect();
                    r.sort_by_key(|(t, _)| *t);
                    r
                })
                .collect()
        })
        .collect();
    Ok(Exploration { states, rows })
}

/// Explicit augmented MDP over the reachable look-ahead trees.
#[derive(Clone, Debug)]
pub struct AugmentedMdp<T: Scalar = f64> {
    pub mdp: TabularMdp<T>,
    pub states: Vec<AugmentedState>,
    pub depth: usize,
    index: HashMap<AugmentedState, usize>,
}

impl<T: Scalar> AugmentedMdp<T> {
    pub fn index_of(&self, xi: &AugmentedState) -> Option<usize> {
        self.index.get(xi).copied()
    }

    /// `Λ_s` expressed over augmented indices.
    pub fn initial_distribution(&self, base: &TabularMdp<T>, state: usize, budget: u64) -> Result<Vec<(usize, T)>> {
        initial_lookahead_distribution(base, state, self.depth, budget)?
            .into_support()
            .into_iter()
            .map(|(xi, p)| {
                self.index_of(&xi)
                    .map(|i| (i, p))
                    .ok_or_else(|| Error::InvalidInput(format!("look-ahead tree {xi} is not in the augmented MDP")))
            })
            .collect()
    }

    /// `Σ_ξ Λ_s(ξ) f(ξ)` for a table over augmented states.
    pub fn expectation_at(&self, base: &TabularMdp<T>, state: usize, values: &[T], budget: u64) -> Result<T> {
        Ok(self
            .initial_distribution(base, state, budget)?
            .into_iter()
            .fold(T::zero(), |acc, (i, p)| acc + p * values[i].clone()))
    }

    /// Sidecar document mapping augmented state names to their blocks.
    pub fn sidecar(&self, base: &TabularMdp<T>) -> Sidecar {
        Sidecar {
            depth: self.depth,
            n_actions: base.n_actions(),
            states: self
                .states
                .iter()
                .map(|xi| SidecarEntry {
                    key: xi.to_string(),
                    blocks: xi
                        .blocks()
                        .into_iter()
                        .map(|b| b.into_iter().map(|s| base.state_name(s).to_string()).collect())
                        .collect(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SidecarEntry {
    pub key: String,
    pub blocks: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Sidecar {
    pub depth: usize,
    pub n_actions: usize,
    pub states: Vec<SidecarEntry>,
}

/// Builds `M̄ = (S̄, A, P̄, r̄)` on the states reachable from `roots`, with
/// `r̄(ξ, a) = r(ξ[0], a)` and the base discount.
pub fn build_augmented_mdp<T: Scalar>(
    mdp: &TabularMdp<T>,
    roots: &[usize],
    depth: usize,
    budget: u64,
) -> Result<AugmentedMdp<T>> {
    for &r in roots {
        mdp.check_state(r)?;
    }
    let Exploration { states, rows } = explore(mdp, roots, depth, budget)?;
    let k = mdp.n_actions();
    let kernel: Vec<Vec<Row<T>>> = (0..k).map(|a| rows.iter().map(|r| r[a].clone()).collect()).collect();
    let rewards: Vec<Vec<T>> =
        states.iter().map(|xi| (0..k).map(|a| mdp.reward(xi.root(), a).clone()).collect()).collect();
    let names: Vec<String> = states.iter().map(|xi| xi.to_string()).collect();
    let mut aug = TabularMdp::from_sparse_unchecked(names, mdp.actions().to_vec(), kernel, rewards)
        .with_r_max(mdp.r_max().clone());
    if let Some(g) = mdp.discount() {
        aug = aug.with_discount(g.clone());
    }
    if let Some(s0) = mdp.initial_state() {
        if depth == 0 {
            if let Some(i) = states.iter().position(|xi| xi.root() == s0) {
                aug = aug.with_initial_state(i);
            }
        }
    }
    let index = states.iter().cloned().enumerate().map(|(i, xi)| (xi, i)).collect();
    Ok(AugmentedMdp { mdp: aug, states, depth, index })
}

/// One environment step with look-ahead: returns `(ξ', r(ξ[0], a))`.
pub fn lookahead_simulator_step<T: Scalar>(
    mdp: &TabularMdp<T>,
    xi: &AugmentedState,
    action: usize,
    seed: u64,
) -> Result<(AugmentedState, T)> {
    mdp.check_action(action)?;
    check_consistent(mdp, xi)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(simulate_step(mdp, xi, action, &mut rng))
}

/// Draws one successor per distinct (state, action) pair of the deepest
/// revealed level and re-roots the tree at `ξ[1](a)`.
pub fn simulate_step<T: Scalar, R: Rng + ?Sized>(
    mdp: &TabularMdp<T>,
    xi: &AugmentedState,
    action: usize,
    rng: &mut R,
) -> (AugmentedState, T) {
    let reward = mdp.reward(xi.root(), action).clone();
    let depth = xi.depth();
    if depth == 0 {
        let next = sample_row(mdp.row(action, xi.root()), rng);
        return (AugmentedState::root_only(next, mdp.n_actions()), reward);
    }
    let mut cells = shifted_prefix(xi, action);
    let block = draw_block(mdp, xi.sub_block(depth, action), rng);
    cells.extend_from_slice(&block);
    (AugmentedState { depth: depth as u8, n_actions: xi.n_actions, cells }, reward)
}

fn draw_block<T: Scalar, R: Rng + ?Sized>(mdp: &TabularMdp<T>, parents: &[u32], rng: &mut R) -> Vec<u32> {
    let k = mdp.n_actions();
    let mut draws: HashMap<u32, Vec<u32>> = HashMap::new();
    let distinct: BTreeSet<u32> = parents.iter().copied().collect();
    for d in distinct {
        let succ = (0..k).map(|a| sample_row(mdp.row(a, d as usize), rng) as u32).collect();
        draws.insert(d, succ);
    }
    parents.iter().flat_map(|p| draws[p].iter().copied()).collect()
}

/// Samples `ξ ~ Λ_state` by the same shared-draw process.
pub fn sample_initial<T: Scalar, R: Rng + ?Sized>(
    mdp: &TabularMdp<T>,
    state: usize,
    depth: usize,
    rng: &mut R,
) -> AugmentedState {
    let k = mdp.n_actions();
    let mut cells = vec![state as u32];
    for level in 1..=depth {
        let start = block_offset(k, level - 1);
        let parents = cells[start..].to_vec();
        let block = draw_block(mdp, &parents, rng);
        cells.extend(block);
    }
    AugmentedState { depth: depth as u8, n_actions: k as u16, cells }
}

/// Number of cells in a depth-`ℓ` tree over `|A|` actions, and a crude
/// upper bound `|S|^cells` on the augmented state count.
pub fn augmented_space_bound(n_states: usize, n_actions: usize, depth: usize) -> u64 {
    saturating_pow(n_states as u64, tree_len(n_actions, depth) as u64)
}
