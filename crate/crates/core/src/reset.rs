//! Reset transform turning discounted values into average gains.
//!
//! `P'_a(s'|s) = γ P_a(s'|s) + (1−γ) ν(s')` for a reset law `ν`, rewards
//! unchanged. With `ν = δ_{s0}`, every stationary policy satisfies
//! `g^π(M') = (1−γ) v^π_γ(s0; M)`.

use crate::error::{Error, Result};
use crate::lookahead::AugmentedMdp;
use crate::mdp::{Policy, Row, TabularMdp};
use crate::planners::{policy_average_gain, policy_evaluation_discounted};
use crate::scalar::Scalar;

fn check_gamma<T: Scalar>(gamma: &T) -> Result<()> {
    if gamma.is_positive() && *gamma < T::one() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("reset discount {gamma} is not in (0, 1)")))
    }
}

/// Mixes every kernel row with probability `1−γ` of a jump drawn from `target`.
pub fn reset_to_distribution<T: Scalar>(mdp: &TabularMdp<T>, gamma: &T, target: &[(usize, T)]) -> Result<TabularMdp<T>> {
    check_gamma(gamma)?;
    for (s, _) in target {
        mdp.check_state(*s)?;
    }
    let one_minus = T::one() - gamma.clone();
    let kernel: Vec<Vec<Row<T>>> = mdp
        .kernel()
        .iter()
        .map(|rows| {
            rows.iter()
                .map(|row| {
                    let mut dense: Vec<(usize, T)> = row.iter().map(|(t, p)| (*t, gamma.clone() * p.clone())).collect();
                    dense.extend(target.iter().map(|(t, p)| (*t, one_minus.clone() * p.clone())));
                    dense.sort_by_key(|(t, _)| *t);
                    let mut merged: Row<T> = Vec::with_capacity(dense.len());
                    for (t, p) in dense {
                        match merged.last_mut() {
                            Some((last, q)) if *last == t => *q = q.clone() + p,
                            _ => merged.push((t, p)),
                        }
                    }
                    merged
                })
                .collect()
        })
        .collect();
    let mut out = TabularMdp::from_sparse(mdp.states().to_vec(), mdp.actions().to_vec(), kernel, mdp.rewards().to_vec())?
        .with_r_max(mdp.r_max().clone());
    if let Some(s0) = mdp.initial_state() {
        out = out.with_initial_state(s0);
    }
    Ok(out)
}

/// `M'` with resets to the fixed state `s0`.
pub fn reset_transform<T: Scalar>(mdp: &TabularMdp<T>, gamma: &T, s0: usize) -> Result<TabularMdp<T>> {
    mdp.check_state(s0)?;
    Ok(reset_to_distribution(mdp, gamma, &[(s0, T::one())])?.with_initial_state(s0))
}

/// Reset of an augmented MDP: the state component returns to `s0` and the
/// look-ahead tree is redrawn from `Λ_{s0}`.
pub fn reset_transform_augmented<T: Scalar>(
    augmented: &AugmentedMdp<T>,
    base: &TabularMdp<T>,
    gamma: &T,
    s0: usize,
    budget: u64,
) -> Result<TabularMdp<T>> {
    let target = augmented.initial_distribution(base, s0, budget)?;
    reset_to_distribution(&augmented.mdp, gamma, &target)
}

/// `|g^π(M') − (1−γ) v^π_γ(s0; M)|`, each side from its own solver.
pub fn verify_renewal_identity<T: Scalar>(mdp: &TabularMdp<T>, gamma: &T, s0: usize, policy: &Policy<T>) -> Result<T> {
    let reset = reset_transform(mdp, gamma, s0)?;
    let gain = policy_average_gain(&reset, policy)?;
    let values = policy_evaluation_discounted(mdp, policy, gamma)?;
    Ok((gain - (T::one() - gamma.clone()) * values[s0].clone()).abs())
}

/// Same identity when resets redraw from `target`: `g = (1−γ) Σ ν(s) v^π(s)`.
pub fn verify_renewal_identity_distribution<T: Scalar>(
    mdp: &TabularMdp<T>,
    gamma: &T,
    target: &[(usize, T)],
    policy: &Policy<T>,
) -> Result<T> {
    let reset = reset_to_distribution(mdp, gamma, target)?;
    let gain = policy_average_gain(&reset, policy)?;
    let values = policy_evaluation_discounted(mdp, policy, gamma)?;
    let start = target.iter().fold(T::zero(), |acc, (s, p)| acc + p.clone() * values[*s].clone());
    Ok((gain - (T::one() - gamma.clone()) * start).abs())
}
