//! Stability of contract systems: individual rationality (every agent keeps
//! all of its contracts when choosing from them) plus the absence of a
//! blocking contract.

use serde::Serialize;

use crate::bits::{sort_canonical, Mask};
use crate::choice::blair_leq;
use crate::error::{check_cap, Error, Result};
use crate::ids::{AgentId, ContractId};
use crate::instance::{ContractSystem, Instance};

/// Default cap on `|C|` for exhaustive subset scans.
pub const DEFAULT_ENUM_CAP: usize = 20;

/// Agent `agent` would keep only `chosen` out of its contracts in `S`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct S0Violation {
    pub agent: AgentId,
    pub chosen: Vec<ContractId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StabilityVerdict {
    pub stable: bool,
    pub s0_violations: Vec<S0Violation>,
    pub blocking: Option<ContractId>,
}

/// Agents with `f_i(S(i)) ≠ S(i)`, in agent order. Empty iff `S` is
/// individually rational.
pub fn individual_rationality(g: &Instance, s: ContractSystem) -> Vec<S0Violation> {
    (0..g.agents().len())
        .filter_map(|i| {
            let own = g.local(s, i);
            let f = g.equipment(i);
            let chosen = f.choose(own);
            (chosen != own).then(|| S0Violation {
                agent: g.agents()[i].clone(),
                chosen: f.ids(chosen),
            })
        })
        .collect()
}

pub fn is_individually_rational(g: &Instance, s: ContractSystem) -> bool {
    (0..g.agents().len()).all(|i| {
        let own = g.local(s, i);
        g.equipment(i).choose(own) == own
    })
}

/// Whether `b ∉ S` is chosen by each participant from `S(i) ∪ {b}`.
pub fn blocks(g: &Instance, b: usize, s: ContractSystem) -> bool {
    !s.contains(b)
        && g.participants(b).iter().all(|&i| {
            let local_b = g.local_index(i, b).expect("participant owns the contract");
            let menu = g.local(s, i).with(local_b);
            g.equipment(i).choose(menu).contains(local_b)
        })
}

/// The least-id contract blocking `S`, if any.
pub fn find_blocking(g: &Instance, s: ContractSystem) -> Option<usize> {
    (0..g.contracts().len()).find(|&b| blocks(g, b, s))
}

pub fn is_stable(g: &Instance, s: ContractSystem) -> StabilityVerdict {
    let s0_violations = individual_rationality(g, s);
    let blocking = find_blocking(g, s).map(|b| g.contract(b).id.clone());
    StabilityVerdict {
        stable: s0_violations.is_empty() && blocking.is_none(),
        s0_violations,
        blocking,
    }
}

fn stable_fast(g: &Instance, s: ContractSystem) -> bool {
    is_individually_rational(g, s) && find_blocking(g, s).is_none()
}

/// Every stable system, by increasing size and then lexicographically.
pub fn enumerate_stable(g: &Instance, cap: usize) -> Result<Vec<ContractSystem>> {
    check_cap("contract set", g.contracts().len(), cap)?;
    let mut found: Vec<Mask> = g
        .all()
        .mask()
        .subsets()
        .filter(|&m| stable_fast(g, ContractSystem(m)))
        .collect();
    sort_canonical(&mut found);
    Ok(found.into_iter().map(ContractSystem).collect())
}

/// For stable `S` and individually rational `T`: evaluates
/// `(∀i: S(i) ⪯_i T(i)) ⇒ S = T`, where `⪯_i` is Blair's relation of `f_i`.
pub fn check_blair_rigidity(g: &Instance, s: ContractSystem, t: ContractSystem) -> Result<bool> {
    if !stable_fast(g, s) {
        return Err(Error::Input("first system is not stable".into()));
    }
    if !is_individually_rational(g, t) {
        return Err(Error::Input("second system is not individually rational".into()));
    }
    Ok(!blair_dominated(g, s, t) || s == t)
}

/// `S(i) ⪯_i T(i)` for every agent.
pub fn blair_dominated(g: &Instance, s: ContractSystem, t: ContractSystem) -> bool {
    (0..g.agents().len()).all(|i| blair_leq(g.equipment(i), g.local(s, i), g.local(t, i)))
}

/// Setwise blocking: a nonempty `B ⊆ C \ S` such that every `b ∈ B` is chosen
/// by each participant `i` from `S(i) ∪ B(i)`. Returns the least such `B`
/// (by size, then lexicographically).
pub fn find_blocking_set(g: &Instance, s: ContractSystem, cap: usize) -> Result<Option<ContractSystem>> {
    check_cap("contract set", g.contracts().len(), cap)?;
    let outside = g.all().mask().difference(s.mask());
    let mut candidates: Vec<Mask> = outside
        .subsets()
        .skip(1)
        .filter(|&b| blocks_as_set(g, s, b))
        .collect();
    sort_canonical(&mut candidates);
    Ok(candidates.first().map(|&m| ContractSystem(m)))
}

fn blocks_as_set(g: &Instance, s: ContractSystem, b: Mask) -> bool {
    let joint = ContractSystem(s.mask().union(b));
    b.iter().all(|c| {
        g.participants(c).iter().all(|&i| {
            let local_c = g.local_index(i, c).expect("participant owns the contract");
            g.equipment(i).choose(g.local(joint, i)).contains(local_c)
        })
    })
}
