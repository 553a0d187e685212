//! Reduction of path-independent equipment to weak orders by splitting agents.
//!
//! An agent whose choice function is a union `f₁ ∪ … ∪ f_ℓ` is replaced by
//! `ℓ` sub-agents `0#1 … 0#ℓ`. Each contract `c` it takes part in is copied
//! into `c#1 … c#ℓ`, copy `k` going to sub-agent `k`; every other participant
//! sees the copies as indistinguishable (pullback of its choice function along
//! the copy-to-original projection). Stable systems of the split instance
//! project onto stable systems of the original, and every stable system of the
//! original lifts.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::choice::{
    am_decompose, is_non_empty_valued, is_path_independent, pullback, weak_representation,
    ChoiceFunction, ChoiceSpec,
};
use crate::error::{Error, Result};
use crate::ids::{AgentId, ContractId};
use crate::instance::{Contract, ContractSystem, Instance};
use crate::stability;

/// One sub-agent produced by a split.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPart {
    pub agent: AgentId,
    /// The part's choice function over the split agent's original contracts.
    pub choice: ChoiceSpec,
}

/// Record of splitting one agent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitStep {
    pub agent: AgentId,
    pub parts: Vec<SplitPart>,
    /// Each contract of the split agent, with its copies in part order.
    pub copies: BTreeMap<ContractId, Vec<ContractId>>,
}

/// The projection from a split instance back onto the original one.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitMap {
    /// New agent → original agent.
    pub agent_map: BTreeMap<AgentId, AgentId>,
    /// New contract → original contract.
    pub contract_map: BTreeMap<ContractId, ContractId>,
    pub steps: Vec<SplitStep>,
}

impl SplitMap {
    pub fn identity(g: &Instance) -> SplitMap {
        SplitMap {
            agent_map: g.agents().iter().map(|a| (a.clone(), a.clone())).collect(),
            contract_map: g
                .contracts()
                .iter()
                .map(|c| (c.id.clone(), c.id.clone()))
                .collect(),
            steps: Vec::new(),
        }
    }

    /// Appends a step whose maps go from `after` to the current domain.
    fn compose(&mut self, step: SplitStep, after: &Instance) {
        let mut agent_map = BTreeMap::new();
        for a in after.agents() {
            let via = if step.parts.iter().any(|p| &p.agent == a) {
                &step.agent
            } else {
                a
            };
            agent_map.insert(a.clone(), self.agent_map[via].clone());
        }
        let origin: BTreeMap<&ContractId, &ContractId> = step
            .copies
            .iter()
            .flat_map(|(orig, cs)| cs.iter().map(move |c| (c, orig)))
            .collect();
        let mut contract_map = BTreeMap::new();
        for c in after.contracts() {
            let via = origin.get(&c.id).copied().unwrap_or(&c.id);
            contract_map.insert(c.id.clone(), self.contract_map[via].clone());
        }
        self.agent_map = agent_map;
        self.contract_map = contract_map;
        self.steps.push(step);
    }

    /// Image of a set of contract ids.
    pub fn project_ids(&self, ids: &[ContractId]) -> Result<BTreeSet<ContractId>> {
        ids.iter()
            .map(|c| {
                self.contract_map
                    .get(c)
                    .cloned()
                    .ok_or_else(|| Error::Input(format!("contract {c} is not in the split map")))
            })
            .collect()
    }
}

fn rename_spec(spec: &ChoiceSpec, map: &impl Fn(&ContractId) -> ContractId) -> ChoiceSpec {
    let list = |v: &Vec<ContractId>| v.iter().map(map).collect::<Vec<_>>();
    match spec {
        ChoiceSpec::Linear { ranking } => ChoiceSpec::Linear { ranking: list(ranking) },
        ChoiceSpec::Weak { tiers } => ChoiceSpec::Weak {
            tiers: tiers.iter().map(list).collect(),
        },
        ChoiceSpec::Quota { ranking, quota } => ChoiceSpec::Quota {
            ranking: list(ranking),
            quota: *quota,
        },
        ChoiceSpec::Union { parts } => ChoiceSpec::Union {
            parts: parts.iter().map(list).collect(),
        },
        ChoiceSpec::Table { ground, entries } => ChoiceSpec::Table {
            ground: ground.as_ref().map(list),
            entries: entries.iter().map(|(m, c)| (list(m), list(c))).collect(),
        },
    }
}

/// Splits `agent` into one sub-agent per element of `parts`.
///
/// Every part must be non-empty-valued on the agent's contracts, and their
/// union must coincide with the agent's choice function on every menu.
pub fn split_agent(
    g: &Instance,
    agent: &str,
    parts: &[ChoiceFunction],
    cap: usize,
) -> Result<(Instance, SplitStep)> {
    let i0 = g
        .agent_index(agent)
        .ok_or_else(|| Error::Input(format!("unknown agent {agent}")))?;
    let f0 = g.equipment(i0);
    if parts.is_empty() {
        return Err(Error::Input("a split needs at least one part".into()));
    }
    crate::error::check_cap("choice ground set", f0.len(), cap)?;
    for p in parts {
        if p.ground() != f0.ground() {
            return Err(Error::Input(
                "split parts must be defined on the agent's contracts".into(),
            ));
        }
        if !is_non_empty_valued(p, cap)? {
            return Err(Error::Input("split parts must be non-empty-valued".into()));
        }
    }
    let union_matches = f0.full().subsets().all(|m| {
        parts
            .iter()
            .fold(crate::bits::Mask::EMPTY, |acc, p| acc.union(p.choose(m)))
            == f0.choose(m)
    });
    if !union_matches {
        return Err(Error::Input(format!(
            "the union of the parts differs from the choice function of {agent}"
        )));
    }

    let grown = g.contracts().len() + (parts.len() - 1) * g.incident(i0).len();
    crate::error::check_cap("contract set", grown, crate::bits::MAX_ELEMENTS)?;

    let old_agent = g.agents()[i0].clone();
    let new_agents: Vec<AgentId> = (1..=parts.len())
        .map(|k| AgentId::new(format!("{old_agent}#{k}")))
        .collect();
    let copy_id = |c: &ContractId, k: usize| ContractId::new(format!("{c}#{}", k + 1));

    let mut agents: Vec<AgentId> = g
        .agents()
        .iter()
        .filter(|a| **a != old_agent)
        .cloned()
        .collect();
    for a in &new_agents {
        if agents.contains(a) {
            return Err(Error::Input(format!("split would reuse agent id {a}")));
        }
        agents.push(a.clone());
    }

    let mut contracts = Vec::new();
    let mut copies: BTreeMap<ContractId, Vec<ContractId>> = BTreeMap::new();
    let mut projection: BTreeMap<ContractId, ContractId> = BTreeMap::new();
    for (k, c) in g.contracts().iter().enumerate() {
        if !g.participants(k).contains(&i0) {
            contracts.push(c.clone());
            projection.insert(c.id.clone(), c.id.clone());
            continue;
        }
        let mut ids = Vec::with_capacity(parts.len());
        for (p, new_agent) in new_agents.iter().enumerate() {
            let id = copy_id(&c.id, p);
            let participants = c
                .participants
                .iter()
                .map(|a| if *a == old_agent { new_agent.clone() } else { a.clone() })
                .collect();
            contracts.push(Contract {
                id: id.clone(),
                participants,
                autarkic_dummy: c.autarkic_dummy,
            });
            projection.insert(id.clone(), c.id.clone());
            ids.push(id);
        }
        copies.insert(c.id.clone(), ids);
    }
    let mut taken = BTreeSet::new();
    for c in &contracts {
        if !taken.insert(&c.id) {
            return Err(Error::Input(format!("split would reuse contract id {}", c.id)));
        }
    }

    let mut equipment = BTreeMap::new();
    for (p, (part, new_agent)) in parts.iter().zip(&new_agents).enumerate() {
        let renamed = rename_spec(&part.to_spec(), &|c| copy_id(c, p));
        let ground: Vec<ContractId> = f0.ground().iter().map(|c| copy_id(c, p)).collect();
        equipment.insert(new_agent.clone(), ChoiceFunction::from_spec(&renamed, Some(&ground))?);
    }
    for (j, a) in g.agents().iter().enumerate() {
        if j == i0 {
            continue;
        }
        let touches = g.incident(j).iter().any(|&k| g.participants(k).contains(&i0));
        let f = if touches {
            let ground: Vec<ContractId> = contracts
                .iter()
                .filter(|c| c.participants.contains(a))
                .map(|c| c.id.clone())
                .collect();
            pullback(&ground, &projection, g.equipment(j))?
        } else {
            g.equipment(j).clone()
        };
        equipment.insert(a.clone(), f);
    }

    let split = Instance::new(agents, contracts, equipment)?;
    let step = SplitStep {
        agent: old_agent,
        parts: parts
            .iter()
            .zip(&new_agents)
            .map(|(p, a)| SplitPart {
                agent: a.clone(),
                choice: p.to_spec(),
            })
            .collect(),
        copies,
    };
    Ok((split, step))
}

/// Outcome of [`reduce_to_weak_orders`].
#[derive(Clone, Debug)]
pub struct Reduction {
    /// `stages[0]` is the input; `stages[k + 1]` is the instance right after
    /// split step `k`.
    pub stages: Vec<Instance>,
    /// The final instance, every choice function a weak order.
    pub reduced: Instance,
    pub map: SplitMap,
}

impl Reduction {
    pub fn original(&self) -> &Instance {
        &self.stages[0]
    }
}

/// Splits agents (in id order) until every choice function is a weak order.
///
/// An agent is split when its choice function agrees with no weak order on
/// all menus; the parts are the linear orders of a union rule, or else those
/// of its [`am_decompose`] decomposition. Weak-representable choice functions are rewritten as weak
/// orders at the end.
pub fn reduce_to_weak_orders(g: &Instance, cap: usize) -> Result<Reduction> {
    for (i, f) in g.equipments().iter().enumerate() {
        if f.is_order_based() {
            continue;
        }
        if let Some(w) = is_path_independent(f, cap)? {
            return Err(Error::Precondition(format!(
                "agent {} has a choice function that is not path independent (A={:?}, B={:?})",
                g.agents()[i],
                w.a,
                w.b
            )));
        }
        if !is_non_empty_valued(f, cap)? {
            return Err(Error::Precondition(format!(
                "agent {} has null contracts; prune them first",
                g.agents()[i]
            )));
        }
    }
    let mut stages = vec![g.clone()];
    let mut map = SplitMap::identity(g);
    loop {
        let current = stages.last().unwrap();
        let mut target = None;
        for (i, f) in current.equipments().iter().enumerate() {
            if !f.is_order_based() && weak_representation(f, cap)?.is_none() {
                target = Some(i);
                break;
            }
        }
        let Some(i) = target else { break };
        let f = current.equipment(i);
        let parts = match f.linear_parts() {
            Some(parts) => parts,
            None => am_decompose(f, cap)?,
        };
        let agent = current.agents()[i].clone();
        let (next, step) = split_agent(current, agent.as_str(), &parts, cap)?;
        map.compose(step, &next);
        stages.push(next);
    }
    let last = stages.last().unwrap();
    let equipment = last
        .equipments()
        .iter()
        .map(|f| {
            if f.is_order_based() {
                Ok(f.clone())
            } else {
                weak_representation(f, cap)?
                    .ok_or_else(|| Error::Internal("unsplit agent is not weak".into()))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let reduced = last.with_equipment(equipment)?;
    Ok(Reduction {
        stages,
        reduced,
        map,
    })
}

/// Image `π(S')` of a system of the reduced instance in the original one.
pub fn project_system(
    map: &SplitMap,
    reduced: &Instance,
    original: &Instance,
    s: ContractSystem,
) -> Result<ContractSystem> {
    let image: Vec<ContractId> = map.project_ids(&reduced.system_ids(s))?.into_iter().collect();
    original.system(&image)
}

/// Lifts a stable system of `before` across one split: contracts avoiding
/// the split agent are kept, and sub-agent `k` receives the copies of
/// `f_k(S(0))`.
pub fn lift_stable(
    before: &Instance,
    after: &Instance,
    step: &SplitStep,
    s: ContractSystem,
) -> Result<ContractSystem> {
    if !stability::is_stable(before, s).stable {
        return Err(Error::Precondition("system to lift is not stable".into()));
    }
    let i0 = before
        .agent_index(step.agent.as_str())
        .ok_or_else(|| Error::Input(format!("unknown agent {}", step.agent)))?;
    let own = before.local(s, i0);
    let ground = before.equipment(i0).ground().to_vec();
    let mut lifted: Vec<ContractId> = before
        .system_ids(s)
        .into_iter()
        .filter(|c| !step.copies.contains_key(c))
        .collect();
    for (k, part) in step.parts.iter().enumerate() {
        let fk = ChoiceFunction::from_spec(&part.choice, Some(&ground))?;
        for c in fk.ids(fk.choose(own)) {
            lifted.push(step.copies[&c][k].clone());
        }
    }
    after.system(&lifted)
}

/// Lifts a stable system of the original instance through every step.
pub fn lift_through(red: &Reduction, s: ContractSystem) -> Result<ContractSystem> {
    let mut cur = s;
    for (k, step) in red.map.steps.iter().enumerate() {
        cur = lift_stable(&red.stages[k], &red.stages[k + 1], step, cur)?;
    }
    let last = red.stages.last().unwrap();
    Ok(last.transfer(cur, &red.reduced))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choice::{ids, DEFAULT_CAP};
    use crate::fixtures::{cyc3, split2};
    use crate::stability::{enumerate_stable, DEFAULT_ENUM_CAP};

    fn split2_parts(g: &Instance) -> Vec<ChoiceFunction> {
        let _ = g;
        vec![
            ChoiceFunction::linear(ids(&["c", "d"])).unwrap(),
            ChoiceFunction::linear(ids(&["d", "c"])).unwrap(),
        ]
    }

    #[test]
    fn split2_by_hand() {
        let g = split2();
        let (h, step) = split_agent(&g, "0", &split2_parts(&g), DEFAULT_CAP).unwrap();
        let names: Vec<&str> = h.agents().iter().map(|a| a.as_str()).collect();
        assert_eq!(names, vec!["0#1", "0#2", "j"]);
        let cs: Vec<&str> = h.contracts().iter().map(|c| c.id.as_str()).collect();
        assert_eq!(cs, vec!["c#1", "c#2", "d#1", "d#2"]);
        let j = h.agent_index("j").unwrap();
        assert_eq!(
            h.equipment(j).to_spec(),
            ChoiceSpec::Weak {
                tiers: vec![ids(&["c#1", "c#2"]), ids(&["d#1", "d#2"])]
            }
        );
        assert_eq!(step.copies[&ContractId::from("c")], ids(&["c#1", "c#2"]));
    }

    #[test]
    fn split2_lift_and_project() {
        let g = split2();
        let s = g.system(&["c"]).unwrap();
        assert_eq!(enumerate_stable(&g, DEFAULT_ENUM_CAP).unwrap(), vec![s]);
        let (h, step) = split_agent(&g, "0", &split2_parts(&g), DEFAULT_CAP).unwrap();
        let lifted = lift_stable(&g, &h, &step, s).unwrap();
        assert_eq!(h.system_ids(lifted), ids(&["c#1", "c#2"]));
        assert!(stability::is_stable(&h, lifted).stable);

        let mut map = SplitMap::identity(&g);
        map.compose(step, &h);
        assert_eq!(project_system(&map, &h, &g, lifted).unwrap(), s);
        assert_eq!(
            project_system(&map, &h, &g, ContractSystem::EMPTY).unwrap(),
            ContractSystem::EMPTY
        );
        let only_c1 = h.system(&["c#1"]).unwrap();
        assert_eq!(project_system(&map, &h, &g, only_c1).unwrap(), s);
    }

    #[test]
    fn identity_split() {
        let g = cyc3();
        let f = g.equipment(g.agent_index("2").unwrap()).clone();
        let (h, _) = split_agent(&g, "2", &[f], DEFAULT_CAP).unwrap();
        assert_eq!(h.agents().len(), 3);
        assert_eq!(h.contracts().len(), 6);
        assert!(h.agent_index("2#1").is_some());
        assert!(enumerate_stable(&h, DEFAULT_ENUM_CAP).unwrap().is_empty());
    }

    #[test]
    fn union_mismatch_is_rejected() {
        let g = split2();
        let only = vec![ChoiceFunction::linear(ids(&["c", "d"])).unwrap()];
        assert!(matches!(split_agent(&g, "0", &only, DEFAULT_CAP), Err(Error::Input(_))));
    }

    #[test]
    fn all_linear_reduction_is_identity() {
        let g = cyc3();
        let red = reduce_to_weak_orders(&g, DEFAULT_CAP).unwrap();
        assert!(red.map.steps.is_empty());
        assert_eq!(red.reduced, g);
    }

    #[test]
    fn split2_union_is_already_a_weak_tie() {
        // {c,d} ↦ {c,d}: the two-part union is the weak order c ~ d
        let red = reduce_to_weak_orders(&split2(), DEFAULT_CAP).unwrap();
        assert!(red.map.steps.is_empty());
        assert!(red.reduced.equipments().iter().all(|f| f.is_order_based()));
    }

    fn triple_union_instance(unions: usize) -> Instance {
        let mut prefs = vec![];
        let agents = ["p", "q", "r"];
        for (n, a) in agents.iter().enumerate() {
            let spec = if n < unions {
                format!(r#""{a}":{{"type":"union","parts":[["x{a}","y{a}","z"],["z","y{a}","x{a}"]]}}"#)
            } else {
                format!(r#""{a}":{{"type":"linear","ranking":["z","x{a}","y{a}"]}}"#)
            };
            prefs.push(spec);
        }
        let mut contracts = vec![r#"{"id":"z","participants":["p","q","r"]}"#.to_string()];
        for a in agents {
            contracts.push(format!(r#"{{"id":"x{a}","participants":["{a}"]}}"#));
            contracts.push(format!(r#"{{"id":"y{a}","participants":["{a}"]}}"#));
        }
        let json = format!(
            r#"{{"agents":["p","q","r"],"contracts":[{}],"preferences":{{{}}}}}"#,
            contracts.join(","),
            prefs.join(",")
        );
        Instance::from_json(&json).unwrap()
    }

    #[test]
    fn one_and_two_union_agents() {
        for unions in [1, 2] {
            let g = triple_union_instance(unions);
            let red = reduce_to_weak_orders(&g, DEFAULT_CAP).unwrap();
            assert_eq!(red.map.steps.len(), unions);
            assert!(red.reduced.equipments().iter().all(|f| f.is_order_based()));
            let orig: BTreeSet<_> = enumerate_stable(&g, DEFAULT_ENUM_CAP).unwrap().into_iter().collect();
            let image: BTreeSet<_> = enumerate_stable(&red.reduced, 24)
                .unwrap()
                .into_iter()
                .map(|s| project_system(&red.map, &red.reduced, &g, s).unwrap())
                .collect();
            assert_eq!(orig, image);
            for s in orig {
                let up = lift_through(&red, s).unwrap();
                assert!(stability::is_stable(&red.reduced, up).stable);
                assert_eq!(project_system(&red.map, &red.reduced, &g, up).unwrap(), s);
            }
        }
    }

    #[test]
    fn split_map_serializes() {
        let red = reduce_to_weak_orders(&triple_union_instance(1), DEFAULT_CAP).unwrap();
        let json = serde_json::to_string(&red.map).unwrap();
        let back: SplitMap = serde_json::from_str(&json).unwrap();
        assert_eq!(back, red.map);
        assert_eq!(back.agent_map[&AgentId::from("p#2")], AgentId::from("p"));
    }

    #[test]
    fn lifting_requires_stability() {
        let g = split2();
        let (h, step) = split_agent(&g, "0", &split2_parts(&g), DEFAULT_CAP).unwrap();
        assert!(matches!(
            lift_stable(&g, &h, &step, ContractSystem::EMPTY),
            Err(Error::Precondition(_))
        ));
    }
}
