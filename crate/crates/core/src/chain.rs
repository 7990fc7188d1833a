//! Exact computations on large sparse Markov chains: lumping into the
//! coarsest reward-respecting lumpable partition, discounted evaluation by
//! strongly connected components, and optimal values on acyclic MDP parts.

use std::collections::HashMap;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{Error, Result};
use crate::linalg::{solve_dense, stationary_on_class};
use crate::mdp::{Row, TabularMdp};
use crate::scalar::Scalar;
use crate::unichain::recurrent_classes;

/// A chain aggregated over a lumpable partition.
#[derive(Clone, Debug)]
pub struct Lumped<T: Scalar> {
    pub class_of: Vec<usize>,
    pub rows: Vec<Row<T>>,
    pub rewards: Vec<T>,
}

fn aggregate<T: Scalar>(row: &[(usize, T)], class_of: &[usize]) -> Row<T> {
    let mut acc: Vec<(usize, T)> = row.iter().map(|(t, p)| (class_of[*t], p.clone())).collect();
    acc.sort_by_key(|(c, _)| *c);
    let mut out: Row<T> = Vec::with_capacity(acc.len());
    for (c, p) in acc {
        match out.last_mut() {
            Some((last, q)) if *last == c => *q = q.clone() + p,
            _ => out.push((c, p)),
        }
    }
    out
}

fn signature<T: Scalar>(head: &str, row: &[(usize, T)]) -> String {
    let mut key = String::from(head);
    for (c, p) in row {
        key.push_str(&format!(";{c}:{p}"));
    }
    key
}

/// Coarsest partition with equal rewards inside each class and equal
/// class-aggregated rows (exact comparison of the printed values).
pub fn lump_chain<T: Scalar>(rows: &[Row<T>], rewards: &[T]) -> Lumped<T> {
    let n = rows.len();
    let mut class_of = vec![0usize; n];
    let mut index: HashMap<String, usize> = HashMap::new();
    for s in 0..n {
        let next = index.len();
        class_of[s] = *index.entry(rewards[s].to_string()).or_insert(next);
    }
    let mut count = index.len();
    loop {
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut refined = vec![0usize; n];
        for s in 0..n {
            let key = signature(&class_of[s].to_string(), &aggregate(&rows[s], &class_of));
            let next = index.len();
            refined[s] = *index.entry(key).or_insert(next);
        }
        class_of = refined;
        if index.len() == count {
            break;
        }
        count = index.len();
    }
    let mut representative = vec![usize::MAX; count];
    for s in (0..n).rev() {
        representative[class_of[s]] = s;
    }
    Lumped {
        rows: representative.iter().map(|&s| aggregate(&rows[s], &class_of)).collect(),
        rewards: representative.iter().map(|&s| rewards[s].clone()).collect(),
        class_of,
    }
}

/// Solves `v = r + γ P v` component by component in reverse topological order.
pub fn discounted_values_by_scc<T: Scalar>(rows: &[Row<T>], rewards: &[T], gamma: &T) -> Result<Vec<T>> {
    let n = rows.len();
    let mut graph = DiGraph::<(), ()>::with_capacity(n, 0);
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for (s, row) in rows.iter().enumerate() {
        for (t, _) in row {
            graph.add_edge(nodes[s], nodes[*t], ());
        }
    }
    let mut values: Vec<Option<T>> = vec![None; n];
    // tarjan_scc yields components with successors first
    for scc in tarjan_scc(&graph) {
        let members: Vec<usize> = scc.iter().map(|x| x.index()).collect();
        let mut local = HashMap::new();
        for (i, &s) in members.iter().enumerate() {
            local.insert(s, i);
        }
        let m = members.len();
        let mut a = vec![vec![T::zero(); m]; m];
        let mut b = vec![T::zero(); m];
        for (i, &s) in members.iter().enumerate() {
            a[i][i] = T::one();
            b[i] = rewards[s].clone();
            for (t, p) in &rows[s] {
                let w = gamma.clone() * p.clone();
                match local.get(t) {
                    Some(&j) => a[i][j] = a[i][j].clone() - w,
                    None => {
                        let vt = values[*t].clone().expect("successor component solved first");
                        b[i] = b[i].clone() + w * vt;
                    }
                }
            }
        }
        let x = solve_dense(a, b)?;
        for (i, &s) in members.iter().enumerate() {
            values[s] = Some(x[i].clone());
        }
    }
    Ok(values.into_iter().map(|v| v.expect("every state solved")).collect())
}

/// Exact discounted values of a chain, computed on its lumped quotient.
pub fn evaluate_chain_exact<T: Scalar>(rows: &[Row<T>], rewards: &[T], gamma: &T) -> Result<Vec<T>> {
    let lumped = lump_chain(rows, rewards);
    let class_values = discounted_values_by_scc(&lumped.rows, &lumped.rewards, gamma)?;
    Ok(lumped.class_of.iter().map(|&c| class_values[c].clone()).collect())
}

/// Long-run average reward of the chain that, at every step, follows `rows`
/// with probability `γ` and otherwise jumps to a draw from `target`.
/// Solved through the stationary distribution of the lumped chain.
pub fn gain_with_reset<T: Scalar>(rows: &[Row<T>], rewards: &[T], gamma: &T, target: &[(usize, T)]) -> Result<T> {
    let lumped = lump_chain(rows, rewards);
    let reset_mass: Row<T> = aggregate(target, &lumped.class_of);
    let one_minus = T::one() - gamma.clone();
    let reset_rows: Vec<Row<T>> = lumped
        .rows
        .iter()
        .map(|row| {
            let mut mixed: Row<T> = row.iter().map(|(c, p)| (*c, gamma.clone() * p.clone())).collect();
            mixed.extend(reset_mass.iter().map(|(c, p)| (*c, one_minus.clone() * p.clone())));
            aggregate(&mixed, &(0..lumped.rows.len()).collect::<Vec<_>>())
        })
        .collect();
    let classes = recurrent_classes(&reset_rows);
    if classes.len() != 1 {
        return Err(Error::ReducibleChain { classes: classes.len() });
    }
    let mu = stationary_on_class(&reset_rows, &classes[0])?;
    Ok(mu.iter().zip(&lumped.rewards).fold(T::zero(), |acc, (m, r)| acc + m.clone() * r.clone()))
}

/// Optimal discounted values on the part of an MDP outside `excluded`,
/// which must be acyclic apart from single-state self-loops and must not
/// lead back into `excluded`. Entries for excluded states are `None`.
pub fn acyclic_optimal_values<T: Scalar>(mdp: &TabularMdp<T>, gamma: &T, excluded: &[bool]) -> Result<Vec<Option<T>>> {
    let n = mdp.n_states();
    let mut graph = DiGraph::<(), ()>::with_capacity(n, 0);
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for a in 0..mdp.n_actions() {
        for s in (0..n).filter(|&s| !excluded[s]) {
            for (t, _) in mdp.row(a, s) {
                if excluded[*t] {
                    return Err(Error::InvalidInput(format!("state {s} leads back into the excluded set")));
                }
                graph.add_edge(nodes[s], nodes[*t], ());
            }
        }
    }
    let mut values: Vec<Option<T>> = vec![None; n];
    for scc in tarjan_scc(&graph) {
        let s = scc[0].index();
        if excluded[s] {
            continue;
        }
        if scc.len() > 1 {
            return Err(Error::InvalidInput(format!("cycle through {} states below the excluded set", scc.len())));
        }
        // v = max_a (r + γ Σ_{t≠s} P v_t) / (1 − γ P_a(s|s))
        let mut best: Option<T> = None;
        for a in 0..mdp.n_actions() {
            let mut stay = T::zero();
            let mut acc = mdp.reward(s, a).clone();
            for (t, p) in mdp.row(a, s) {
                if *t == s {
                    stay = p.clone();
                } else {
                    acc = acc + gamma.clone() * p.clone() * values[*t].clone().expect("successor solved first");
                }
            }
            let q = acc / (T::one() - gamma.clone() * stay);
            if best.as_ref().map_or(true, |b| q > *b) {
                best = Some(q);
            }
        }
        values[s] = best;
    }
    Ok(values)
}
