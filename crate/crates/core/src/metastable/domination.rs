use std::collections::BTreeMap;

use serde::Serialize;

use crate::bits::Mask;
use crate::ids::{AgentId, ContractId};
use crate::instance::{ContractSystem, Instance};

/// Why a dominator tempts one of its participants.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "reason")]
pub enum Temptation {
    /// The agent holds nothing in `S`.
    EmptyHolding,
    /// The agent holds `worse`, which loses the pairwise choice against the dominator.
    Replaces { worse: ContractId },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DominationWitness {
    pub dominator: ContractId,
    pub per_agent: BTreeMap<AgentId, Temptation>,
}

/// Whether a contract already in `S` may dominate `S`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DominationRule {
    /// Every contract of `C` is a candidate dominator.
    #[default]
    IncludeMembers,
    /// Only contracts outside `S` are candidates.
    ExcludeMembers,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MetastableVerdict {
    pub metastable: bool,
    pub witness: Option<DominationWitness>,
}

/// The least-index element of `S(i)` rejected from the pair `{a, d}`, for
/// agent `i` and contract `d` (both in local indices).
fn worse_than(g: &Instance, i: usize, own: Mask, d_local: usize) -> Option<usize> {
    let f = g.equipment(i);
    own.iter()
        .find(|&a| !f.choose(Mask::singleton(a).with(d_local)).contains(a))
}

pub(crate) fn dominates_fast(g: &Instance, d: usize, s: ContractSystem) -> bool {
    g.participants(d).iter().all(|&i| {
        let own = g.local(s, i);
        own.is_empty() || worse_than(g, i, own, g.local_index(i, d).unwrap()).is_some()
    })
}

/// `d` dominates `S` when every participant `i` of `d` either holds nothing
/// in `S` or holds some `a` with `a ∉ f_i({a, d})`.
pub fn dominates(g: &Instance, d: usize, s: ContractSystem) -> Option<DominationWitness> {
    let mut per_agent = BTreeMap::new();
    for &i in g.participants(d) {
        let own = g.local(s, i);
        let why = if own.is_empty() {
            Temptation::EmptyHolding
        } else {
            let a = worse_than(g, i, own, g.local_index(i, d).unwrap())?;
            Temptation::Replaces {
                worse: g.equipment(i).ground()[a].clone(),
            }
        };
        per_agent.insert(g.agents()[i].clone(), why);
    }
    Some(DominationWitness {
        dominator: g.contract(d).id.clone(),
        per_agent,
    })
}

fn candidates(g: &Instance, s: ContractSystem, rule: DominationRule) -> impl Iterator<Item = usize> + '_ {
    (0..g.contracts().len()).filter(move |&d| rule == DominationRule::IncludeMembers || !s.contains(d))
}

/// No contract dominates `S`. The witness is the least-id dominator.
pub fn is_metastable(g: &Instance, s: ContractSystem, rule: DominationRule) -> MetastableVerdict {
    let witness = candidates(g, s, rule).find_map(|d| dominates(g, d, s));
    MetastableVerdict {
        metastable: witness.is_none(),
        witness,
    }
}

pub(crate) fn metastable_fast(g: &Instance, s: ContractSystem) -> bool {
    !(0..g.contracts().len()).any(|d| dominates_fast(g, d, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::cyc3;

    #[test]
    fn cyc3_domination() {
        let g = cyc3();
        let s = g.system(&["c12"]).unwrap();
        let w = dominates(&g, g.contract_index("c23").unwrap(), s).unwrap();
        assert_eq!(w.per_agent[&AgentId::from("2")], Temptation::Replaces { worse: "c12".into() });
        assert_eq!(w.per_agent[&AgentId::from("3")], Temptation::EmptyHolding);
        assert_eq!(dominates(&g, g.contract_index("c31").unwrap(), s), None);
    }

    #[test]
    fn sole_holders_are_not_dominated_by_their_own_contract() {
        let g = cyc3();
        let s = g.system(&["c12"]).unwrap();
        assert_eq!(dominates(&g, g.contract_index("c12").unwrap(), s), None);
    }

    #[test]
    fn cyc3_metastable_sets() {
        let g = cyc3();
        for ids in [&["c12", "c23"][..], &["c12", "c23", "c31"]] {
            let v = is_metastable(&g, g.system(ids).unwrap(), DominationRule::IncludeMembers);
            assert!(v.metastable, "{ids:?}: {v:?}");
        }
        let v = is_metastable(&g, ContractSystem::EMPTY, DominationRule::IncludeMembers);
        assert!(!v.metastable);
        assert_eq!(v.witness.unwrap().dominator, ContractId::from("a1"));
    }

    #[test]
    fn member_dominator_depends_on_rule() {
        // everyone holds everything: each a_i loses to both binary contracts of i
        let g = cyc3();
        let s = g.all();
        let incl = is_metastable(&g, s, DominationRule::IncludeMembers);
        assert_eq!(incl.witness.unwrap().dominator, ContractId::from("c12"));
        assert!(is_metastable(&g, s, DominationRule::ExcludeMembers).metastable);
    }
}
