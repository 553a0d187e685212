//! Meta-stability: a system `S` is meta-stable when no single contract
//! dominates it. Existence is constructive: give every agent a worst-ranked
//! autarkic contract, linearize, find a compromise vector on the utility
//! grid and take its threshold system.

mod compromise;
mod domination;
mod minimal;

use crate::choice::{require_plott, respecting_order};
use crate::error::{Error, Result};
use crate::instance::{augment_autarkic, prune_null_contracts, ContractSystem, Instance};

pub use compromise::{
    find_compromise, is_compromise, system_from_compromise, CompromiseVector, DEFAULT_GRID_CAP,
};
pub use domination::{
    dominates, is_metastable, DominationRule, DominationWitness, MetastableVerdict, Temptation,
};
pub use minimal::{
    classify_components, is_minimal_metastable, minimize, perturb_ties, Component, PerturbationPlan,
    Shape,
};

/// Replaces each choice function by a linear order respecting it (greedy,
/// ties to the least id). Linear functions are kept as they are.
pub fn linearize_equipment(g: &Instance, cap: usize) -> Result<Instance> {
    let equipment = g
        .equipments()
        .iter()
        .map(|f| {
            if f.is_linear() {
                Ok(f.clone())
            } else {
                respecting_order(f, None, cap)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    g.with_equipment(equipment)
}

/// Output of [`solve_metastable`] with the intermediate objects kept for
/// reporting.
#[derive(Clone, Debug)]
pub struct MetastableSolution {
    /// The meta-stable system, in the input instance.
    pub system: ContractSystem,
    /// Contracts deleted as null before solving, in the input instance.
    pub pruned: ContractSystem,
    /// Linearized instance with an autarkic dummy for every agent that needed one.
    pub prepared: Instance,
    pub compromise: CompromiseVector,
    /// Threshold system of the compromise, in `prepared`.
    pub threshold: ContractSystem,
}

/// Null pruning, linearization, augmentation, compromise search and the
/// threshold system, with dummies dropped at the end.
///
/// The result is checked against the (pruned) input equipment; a failure
/// there is reported as an internal error.
pub fn solve_metastable(g: &Instance, cap: usize) -> Result<MetastableSolution> {
    for f in g.equipments() {
        require_plott(f, cap)?;
    }
    let (pruned_instance, pruned) = prune_null_contracts(g, cap)?;
    let linear = linearize_equipment(&pruned_instance, cap)?;
    let prepared = augment_autarkic(&linear, false)?;
    let compromise = find_compromise(&prepared, DEFAULT_GRID_CAP)?;
    let threshold = system_from_compromise(&prepared, &compromise)?;
    let in_pruned = prepared.transfer(threshold, &pruned_instance);
    let verdict = is_metastable(&pruned_instance, in_pruned, DominationRule::IncludeMembers);
    if let Some(w) = verdict.witness {
        return Err(Error::Internal(format!(
            "threshold system is dominated by {} in the input",
            w.dominator
        )));
    }
    Ok(MetastableSolution {
        system: pruned_instance.transfer(in_pruned, g),
        pruned,
        prepared,
        compromise,
        threshold,
    })
}
