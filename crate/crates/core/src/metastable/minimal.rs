//! Minimal meta-stable systems, tie perturbation and component shapes.
//!
//! With an autarkic contract for every agent, a meta-stable `S` is minimal
//! exactly when each of its contracts has a monogamous participant, i.e. one
//! with `S(i) = {s}`.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::domination::metastable_fast;
use crate::choice::ChoiceFunction;
use crate::error::{Error, Result};
use crate::ids::{AgentId, ContractId};
use crate::instance::{ContractSystem, Instance};

fn require_metastable(g: &Instance, s: ContractSystem) -> Result<()> {
    if metastable_fast(g, s) {
        Ok(())
    } else {
        Err(Error::Precondition("system is not meta-stable".into()))
    }
}

fn monogamous(g: &Instance, s: ContractSystem, c: usize) -> bool {
    g.participants(c).iter().any(|&i| g.local(s, i).len() == 1)
}

/// Least-id contract of `S` without a monogamous participant.
fn first_removable(g: &Instance, s: ContractSystem) -> Option<usize> {
    s.iter().find(|&c| !monogamous(g, s, c))
}

/// Whether meta-stable `S` is minimal, via the monogamy criterion.
pub fn is_minimal_metastable(g: &Instance, s: ContractSystem) -> Result<bool> {
    require_metastable(g, s)?;
    if let Some(i) = (0..g.agents().len()).find(|&i| !g.has_autarkic(i)) {
        return Err(Error::Precondition(format!(
            "agent {} owns no autarkic contract",
            g.agents()[i]
        )));
    }
    Ok(first_removable(g, s).is_none())
}

/// Drops contracts without a monogamous participant, least id first, until
/// none is left. Every intermediate system keeps all `S(i)` nonempty.
pub fn minimize(g: &Instance, s: ContractSystem) -> Result<ContractSystem> {
    require_metastable(g, s)?;
    let mut s = s;
    while let Some(c) = first_removable(g, s) {
        s = s.without(c);
    }
    Ok(s)
}

/// How one agent's ties at the bottom of `S(i)` are broken.
///
/// `M(i)` is the set of contracts of `i` tied with the worst member of
/// `S(i)`. The anchor is the least-id member of `M(i) ∩ S`, the remaining
/// members of `M(i) ∩ S` move up and `M(i) \ S` moves down.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PerturbationPlan {
    pub agent: AgentId,
    pub anchor: Option<ContractId>,
    pub raised: Vec<ContractId>,
    pub lowered: Vec<ContractId>,
}

/// Breaks all ties of a weakly ordered instance so that the minimal
/// meta-stable `S` stays meta-stable.
///
/// Utilities are doubled; the anchor keeps `2u`, raised contracts get
/// `2u + 1` and lowered ones `2u - 1`. Ties that remain are broken in favour
/// of the lower id.
pub fn perturb_ties(g: &Instance, s: ContractSystem) -> Result<(Instance, Vec<PerturbationPlan>)> {
    require_metastable(g, s)?;
    if let Some(c) = first_removable(g, s) {
        return Err(Error::Precondition(format!(
            "system is not minimal: {} has no monogamous participant",
            g.contract(c).id
        )));
    }
    let mut plans = Vec::new();
    let mut equipment = Vec::new();
    for (i, f) in g.equipments().iter().enumerate() {
        let u = f.utilities().ok_or_else(|| {
            Error::Precondition(format!(
                "agent {} needs linear or weak preferences, has {}",
                g.agents()[i],
                f.kind()
            ))
        })?;
        let mut v: Vec<i64> = u.iter().map(|x| 2 * x).collect();
        let own = g.local(s, i);
        let mut plan = PerturbationPlan {
            agent: g.agents()[i].clone(),
            anchor: None,
            raised: Vec::new(),
            lowered: Vec::new(),
        };
        if let Some(m) = own.iter().map(|a| u[a]).min() {
            let tied = f.full().iter().filter(|&a| u[a] == m);
            let (inside, outside): (Vec<usize>, Vec<usize>) = tied.partition(|&a| own.contains(a));
            plan.anchor = Some(f.ground()[inside[0]].clone());
            for &a in &inside[1..] {
                v[a] += 1;
                plan.raised.push(f.ground()[a].clone());
            }
            for &a in &outside {
                v[a] -= 1;
                plan.lowered.push(f.ground()[a].clone());
            }
        }
        let mut ranking: Vec<usize> = f.full().iter().collect();
        ranking.sort_by_key(|&a| (std::cmp::Reverse(v[a]), a));
        equipment.push(ChoiceFunction::from_linear_indices(f.ground().to_vec(), ranking));
        plans.push(plan);
    }
    let out = g.with_equipment(equipment)?;
    if !metastable_fast(&out, s) {
        return Err(Error::Internal("perturbed instance dominates the system".into()));
    }
    Ok((out, plans))
}

/// Shape of one connected component of the binary part of `S`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "shape")]
pub enum Shape {
    Isolated,
    /// One center, every other agent a monogamous leaf. A single binary
    /// contract is the degenerate case.
    Star {
        center: AgentId,
        leaves: Vec<AgentId>,
        degenerate: bool,
    },
    Other,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Component {
    pub agents: Vec<AgentId>,
    pub contracts: Vec<ContractId>,
    #[serde(flatten)]
    pub shape: Shape,
}

/// Splits the graph `(I, binary contracts of S)` into connected components
/// and reports the shape of each, in order of the least agent index.
pub fn classify_components(g: &Instance, s: ContractSystem) -> Result<Vec<Component>> {
    if let Some(c) = (0..g.contracts().len()).find(|&c| g.participants(c).len() > 2) {
        return Err(Error::Input(format!(
            "contract {} has more than two participants",
            g.contract(c).id
        )));
    }
    let n = g.agents().len();
    let edges: Vec<usize> = s.iter().filter(|&c| g.participants(c).len() == 2).collect();
    let mut comp = vec![usize::MAX; n];
    let mut out = Vec::new();
    for root in 0..n {
        if comp[root] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut stack = vec![root];
        let mut members = BTreeSet::new();
        comp[root] = id;
        while let Some(v) = stack.pop() {
            members.insert(v);
            for &c in &edges {
                let p = g.participants(c);
                if p.contains(&v) {
                    for &w in p {
                        if comp[w] == usize::MAX {
                            comp[w] = id;
                            stack.push(w);
                        }
                    }
                }
            }
        }
        let local_edges: Vec<usize> = edges
            .iter()
            .copied()
            .filter(|&c| members.contains(&g.participants(c)[0]))
            .collect();
        let shape = shape_of(g, s, &members, &local_edges);
        out.push(Component {
            agents: members.iter().map(|&i| g.agents()[i].clone()).collect(),
            contracts: local_edges.iter().map(|&c| g.contract(c).id.clone()).collect(),
            shape,
        });
    }
    Ok(out)
}

fn shape_of(g: &Instance, s: ContractSystem, members: &BTreeSet<usize>, edges: &[usize]) -> Shape {
    if edges.is_empty() {
        return Shape::Isolated;
    }
    let mono = |i: usize| g.local(s, i).len() == 1;
    let mut degree: BTreeMap<usize, usize> = BTreeMap::new();
    for &c in edges {
        for &i in g.participants(c) {
            *degree.entry(i).or_default() += 1;
        }
    }
    for &center in members {
        if degree[&center] != edges.len() {
            continue;
        }
        let leaves: Vec<usize> = members.iter().copied().filter(|&i| i != center).collect();
        if leaves.iter().all(|&i| mono(i)) {
            return Shape::Star {
                center: g.agents()[center].clone(),
                leaves: leaves.iter().map(|&i| g.agents()[i].clone()).collect(),
                degenerate: members.len() == 2,
            };
        }
    }
    Shape::Other
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{cyc3, marr};

    fn weak_pair() -> Instance {
        // agent 1 is indifferent between x and y, both above its autarkic a1
        Instance::from_json(
            r#"{"agents":["1","2","3"],
                "contracts":[{"id":"a1","participants":["1"]},{"id":"a2","participants":["2"]},
                  {"id":"a3","participants":["3"]},
                  {"id":"x","participants":["1","2"]},{"id":"y","participants":["1","3"]}],
                "preferences":{
                  "1":{"type":"weak","tiers":[["x","y"],["a1"]]},
                  "2":{"type":"linear","ranking":["x","a2"]},
                  "3":{"type":"linear","ranking":["y","a3"]}}}"#,
        )
        .unwrap()
    }

    #[test]
    fn minimality_examples() {
        let g = cyc3();
        assert!(is_minimal_metastable(&g, g.system(&["c12", "c23"]).unwrap()).unwrap());
        assert!(!is_minimal_metastable(&g, g.system(&["c12", "c23", "c31"]).unwrap()).unwrap());
        assert!(matches!(
            is_minimal_metastable(&g, ContractSystem::EMPTY),
            Err(Error::Precondition(_))
        ));
        let one = crate::fixtures::solo();
        assert!(is_minimal_metastable(&one, one.all()).unwrap());
    }

    #[test]
    fn minimize_examples() {
        let g = cyc3();
        let all_binary = g.system(&["c12", "c23", "c31"]).unwrap();
        let m = minimize(&g, all_binary).unwrap();
        assert_eq!(g.system_ids(m), vec!["c23".into(), "c31".into()] as Vec<ContractId>);
        assert!(is_minimal_metastable(&g, m).unwrap());
        let fixed = g.system(&["c12", "c23"]).unwrap();
        assert_eq!(minimize(&g, fixed).unwrap(), fixed);
    }

    #[test]
    fn perturbation_lowers_outside_tie() {
        let g = weak_pair();
        let s = g.system(&["x"]).unwrap();
        // y would tempt 3 (holds nothing) but agent 1 is tied: not dominated
        assert!(metastable_fast(&g, s.with(g.contract_index("a3").unwrap())));
        let s = s.with(g.contract_index("a3").unwrap());
        let (lin, plans) = perturb_ties(&g, s).unwrap();
        assert!(lin.equipments().iter().all(|f| f.is_linear()));
        assert_eq!(plans[0].anchor, Some("x".into()));
        assert_eq!(plans[0].lowered, vec![ContractId::from("y")]);
        assert!(metastable_fast(&lin, s));
    }

    #[test]
    fn perturbation_raises_inside_tie() {
        let g = weak_pair();
        let s = g.system(&["x", "y"]).unwrap();
        let (lin, plans) = perturb_ties(&g, s).unwrap();
        assert_eq!(plans[0].anchor, Some("x".into()));
        assert_eq!(plans[0].raised, vec![ContractId::from("y")]);
        assert!(metastable_fast(&lin, s));
    }

    #[test]
    fn linear_plans_are_trivial() {
        let g = cyc3();
        let s = g.system(&["c12", "c23"]).unwrap();
        let (lin, plans) = perturb_ties(&g, s).unwrap();
        assert!(plans.iter().all(|p| p.raised.is_empty() && p.lowered.is_empty()));
        assert!(g.equipments().iter().zip(lin.equipments()).all(|(a, b)| a.same_choices(b)));
    }

    #[test]
    fn components() {
        let g = cyc3();
        let comps = classify_components(&g, g.system(&["c12", "c23"]).unwrap()).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(
            comps[0].shape,
            Shape::Star {
                center: "2".into(),
                leaves: vec!["1".into(), "3".into()],
                degenerate: false
            }
        );
        let m = marr();
        let comps = classify_components(&m, m.system(&["m1w1", "m2w2"]).unwrap()).unwrap();
        assert_eq!(comps.len(), 2);
        assert!(comps
            .iter()
            .all(|c| matches!(c.shape, Shape::Star { degenerate: true, .. })));
        let comps = classify_components(&m, ContractSystem::EMPTY).unwrap();
        assert!(comps.iter().all(|c| c.shape == Shape::Isolated));
    }
}
