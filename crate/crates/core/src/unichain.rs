//! Exhaustive unichain verification over deterministic stationary policies.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use crate::budget::saturating_pow;
use crate::error::{Error, Result};
use crate::mdp::{Row, TabularMdp};
use crate::scalar::Scalar;

/// Closed communicating classes of a Markov chain given by its sparse rows.
/// Each class is sorted; classes are ordered by smallest member.
pub fn recurrent_classes<T: Scalar>(rows: &[Row<T>]) -> Vec<Vec<usize>> {
    let n = rows.len();
    let mut graph = DiGraph::<(), ()>::with_capacity(n, rows.iter().map(|r| r.len()).sum());
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for (s, row) in rows.iter().enumerate() {
        for (t, p) in row {
            if p.is_positive() {
                graph.add_edge(nodes[s], nodes[*t], ());
            }
        }
    }
    let sccs = tarjan_scc(&graph);
    let mut component = vec![0usize; n];
    for (c, scc) in sccs.iter().enumerate() {
        for node in scc {
            component[node.index()] = c;
        }
    }
    let mut classes: Vec<Vec<usize>> = sccs
        .iter()
        .enumerate()
        .filter(|(c, scc)| {
            scc.iter().all(|node| {
                rows[node.index()].iter().all(|(t, p)| !p.is_positive() || component[*t] == *c)
            })
        })
        .map(|(_, scc)| {
            let mut members: Vec<usize> = scc.iter().map(|n| n.index()).collect();
            members.sort_unstable();
            members
        })
        .collect();
    classes.sort();
    classes
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UnichainVerdict {
    pub unichain: bool,
    /// A deterministic policy (action per state) with several recurrent classes.
    pub witness: Option<Vec<usize>>,
    pub witness_classes: Option<Vec<Vec<usize>>>,
    pub policies_checked: u64,
}

/// Enumerates all `|A|^|S|` deterministic policies and checks that each
/// induces a single recurrent class. Refuses above `budget` policies.
pub fn check_unichain_exhaustive<T: Scalar>(mdp: &TabularMdp<T>, budget: u64) -> Result<UnichainVerdict> {
    let n = mdp.n_states();
    let k = mdp.n_actions();
    let total = saturating_pow(k as u64, n as u64);
    if total > budget {
        return Err(Error::BudgetExceeded { what: "unichain policy enumeration", limit: budget, required: total });
    }
    let mut policy = vec![0usize; n];
    let mut checked = 0u64;
    loop {
        let rows: Vec<Row<T>> = (0..n).map(|s| mdp.row(policy[s], s).to_vec()).collect();
        let classes = recurrent_classes(&rows);
        checked += 1;
        if classes.len() != 1 {
            return Ok(UnichainVerdict {
                unichain: false,
                witness: Some(policy),
                witness_classes: Some(classes),
                policies_checked: checked,
            });
        }
        // odometer increment, first state fastest
        let mut i = 0;
        loop {
            if i == n {
                return Ok(UnichainVerdict { unichain: true, witness: None, witness_classes: None, policies_checked: checked });
            }
            policy[i] += 1;
            if policy[i] < k {
                break;
            }
            policy[i] = 0;
            i += 1;
        }
    }
}

/// Convenience wrapper: `Ok(())` if unichain, `NotUnichain` otherwise.
pub fn require_unichain<T: Scalar>(mdp: &TabularMdp<T>, budget: u64) -> Result<()> {
    let verdict = check_unichain_exhaustive(mdp, budget)?;
    if verdict.unichain {
        Ok(())
    } else {
        Err(Error::NotUnichain {
            classes: verdict.witness_classes.as_ref().map_or(0, |c| c.len()),
            witness: verdict.witness.unwrap_or_default(),
        })
    }
}
