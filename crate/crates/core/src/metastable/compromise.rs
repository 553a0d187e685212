//! Compromise vectors.
//!
//! View each contract `c` as a partial function on agents, `c(i) = u_i(c)`
//! for `i ∈ P(c)`. A vector `x` over agents is a compromise when
//!
//! 1. no contract exceeds `x` strictly on its whole domain, and
//! 2. every agent `i` belongs to some contract `c` with `x ≤ c` on `P(c)`.
//!
//! Any real compromise `x` can be moved onto the grid `x'(i) = min{u_i(c) :
//! c ∈ S_x(i)}` where `S_x = {c : x ≤ c on P(c)}`; `x'` keeps both properties
//! and induces the same threshold system. So a search over the finite grid
//! `∏ {u_i(c) : c ∈ C(i)}` is complete.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ids::AgentId;
use crate::instance::{ContractSystem, Instance};

/// Default cap on the number of grid points scanned.
pub const DEFAULT_GRID_CAP: usize = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompromiseVector {
    pub values: BTreeMap<AgentId, i64>,
}

impl CompromiseVector {
    pub fn from_levels(g: &Instance, levels: &[i64]) -> Self {
        CompromiseVector {
            values: g.agents().iter().cloned().zip(levels.iter().copied()).collect(),
        }
    }

    /// Values in agent order; missing agents are an input error.
    pub fn levels(&self, g: &Instance) -> Result<Vec<i64>> {
        g.agents()
            .iter()
            .map(|a| {
                self.values
                    .get(a)
                    .copied()
                    .ok_or_else(|| Error::Input(format!("no compromise value for agent {a}")))
            })
            .collect()
    }
}

/// Per contract, `(agent index, utility)` for each participant.
struct UtilityProfile {
    by_contract: Vec<Vec<(usize, i64)>>,
}

impl UtilityProfile {
    fn new(g: &Instance) -> Result<Self> {
        let utils: Vec<Vec<i64>> = g
            .equipments()
            .iter()
            .enumerate()
            .map(|(i, f)| {
                f.utilities().ok_or_else(|| {
                    Error::Precondition(format!(
                        "agent {} needs linear or weak preferences, has {}",
                        g.agents()[i],
                        f.kind()
                    ))
                })
            })
            .collect::<Result<_>>()?;
        let by_contract = (0..g.contracts().len())
            .map(|c| {
                g.participants(c)
                    .iter()
                    .map(|&i| (i, utils[i][g.local_index(i, c).unwrap()]))
                    .collect()
            })
            .collect();
        Ok(UtilityProfile { by_contract })
    }

    fn accepts(&self, c: usize, x: &[i64]) -> bool {
        self.by_contract[c].iter().all(|&(i, u)| x[i] <= u)
    }

    fn strictly_beats(&self, c: usize, x: &[i64]) -> bool {
        self.by_contract[c].iter().all(|&(i, u)| u > x[i])
    }
}

fn satisfies(g: &Instance, prof: &UtilityProfile, x: &[i64]) -> bool {
    let n_c = g.contracts().len();
    (0..n_c).all(|c| !prof.strictly_beats(c, x))
        && (0..g.agents().len()).all(|i| g.incident(i).iter().any(|&c| prof.accepts(c, x)))
}

/// Both compromise properties, checked directly.
pub fn is_compromise(g: &Instance, x: &CompromiseVector) -> Result<bool> {
    let prof = UtilityProfile::new(g)?;
    Ok(satisfies(g, &prof, &x.levels(g)?))
}

fn require_autarkic(g: &Instance) -> Result<()> {
    match (0..g.agents().len()).find(|&i| !g.has_autarkic(i)) {
        Some(i) => Err(Error::Precondition(format!(
            "agent {} owns no autarkic contract",
            g.agents()[i]
        ))),
        None => Ok(()),
    }
}

/// Per agent, the distinct utilities it assigns, in descending order.
fn grid_axes(g: &Instance, prof: &UtilityProfile) -> Vec<Vec<i64>> {
    let mut axes = vec![Vec::new(); g.agents().len()];
    for row in &prof.by_contract {
        for &(i, u) in row {
            axes[i].push(u);
        }
    }
    for a in &mut axes {
        a.sort_unstable_by(|x, y| y.cmp(x));
        a.dedup();
    }
    axes
}

/// First compromise on the utility grid in descending lexicographic order
/// (agents in id order).
///
/// Requires linear equipment and an autarkic contract for every agent.
pub fn find_compromise(g: &Instance, grid_cap: usize) -> Result<CompromiseVector> {
    if let Some(i) = (0..g.agents().len()).find(|&i| !g.equipment(i).is_linear()) {
        return Err(Error::Precondition(format!(
            "agent {} does not have linear preferences",
            g.agents()[i]
        )));
    }
    require_autarkic(g)?;
    let prof = UtilityProfile::new(g)?;
    let axes = grid_axes(g, &prof);
    let size = axes
        .iter()
        .try_fold(1usize, |acc, a| acc.checked_mul(a.len()))
        .unwrap_or(usize::MAX);
    crate::error::check_cap("compromise grid", size, grid_cap)?;

    let n = axes.len();
    let mut pos = vec![0usize; n];
    let mut x: Vec<i64> = axes.iter().map(|a| a[0]).collect();
    loop {
        if satisfies(g, &prof, &x) {
            return Ok(CompromiseVector::from_levels(g, &x));
        }
        // odometer, last agent fastest
        let mut k = n;
        loop {
            if k == 0 {
                return Err(Error::Internal(
                    "no compromise vector on the utility grid".into(),
                ));
            }
            k -= 1;
            pos[k] += 1;
            if pos[k] < axes[k].len() {
                x[k] = axes[k][pos[k]];
                break;
            }
            pos[k] = 0;
            x[k] = axes[k][0];
        }
    }
}

/// `S = {c : x(i) ≤ u_i(c) for all i ∈ P(c)}`.
pub fn system_from_compromise(g: &Instance, x: &CompromiseVector) -> Result<ContractSystem> {
    let prof = UtilityProfile::new(g)?;
    let levels = x.levels(g)?;
    if !satisfies(g, &prof, &levels) {
        return Err(Error::Input("vector is not a compromise".into()));
    }
    Ok(threshold_system(g, &prof, &levels))
}

fn threshold_system(g: &Instance, prof: &UtilityProfile, x: &[i64]) -> ContractSystem {
    ContractSystem(
        (0..g.contracts().len())
            .filter(|&c| prof.accepts(c, x))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{cyc3, solo};
    use crate::instance::augment_autarkic;

    fn levels(g: &Instance, x: &CompromiseVector) -> Vec<i64> {
        x.levels(g).unwrap()
    }

    #[test]
    fn cyc3_first_hit() {
        let g = cyc3();
        let x = find_compromise(&g, DEFAULT_GRID_CAP).unwrap();
        assert_eq!(levels(&g, &x), vec![2, 1, 1]);
        let s = system_from_compromise(&g, &x).unwrap();
        assert_eq!(g.system_ids(s), vec!["c12".into(), "c23".into()] as Vec<crate::ContractId>);
    }

    #[test]
    fn solo_is_forced() {
        let g = solo();
        assert_eq!(levels(&g, &find_compromise(&g, DEFAULT_GRID_CAP).unwrap()), vec![0]);
    }

    #[test]
    fn two_agents_one_mutual_contract() {
        let g = augment_autarkic(&crate::fixtures::pair_only(), false).unwrap();
        let x = find_compromise(&g, DEFAULT_GRID_CAP).unwrap();
        // c12 is each agent's top (utility 1), dummies sit at 0
        assert_eq!(levels(&g, &x), vec![1, 1]);
        let s = system_from_compromise(&g, &x).unwrap();
        assert_eq!(g.system_ids(s), vec![crate::ContractId::from("c12")]);
    }

    #[test]
    fn autarkic_floor_keeps_autarkics() {
        let g = cyc3();
        let x = CompromiseVector::from_levels(&g, &[0, 0, 0]);
        // every contract is accepted, but c12 beats x strictly for agents 1 and 2
        assert!(!is_compromise(&g, &x).unwrap());
        assert!(matches!(system_from_compromise(&g, &x), Err(Error::Input(_))));
    }

    #[test]
    fn preconditions() {
        assert!(matches!(
            find_compromise(&crate::fixtures::pair_only(), DEFAULT_GRID_CAP),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(find_compromise(&cyc3(), 3), Err(Error::Resource { .. })));
    }
}
