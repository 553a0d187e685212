//! The equipped hypergraph: agents, contracts, and one choice function per
//! agent over the contracts it takes part in.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::{Mask, MAX_ELEMENTS};
use crate::choice::{ChoiceFunction, ChoiceSpec};
use crate::error::{Error, Result};
use crate::ids::{AgentId, ContractId};

/// One rule broken by an instance file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// The offending agent or contract id (empty when not attributable).
    pub subject: String,
    pub rule: String,
}

impl Violation {
    fn new(subject: impl fmt::Display, rule: impl Into<String>) -> Self {
        Violation {
            subject: subject.to_string(),
            rule: rule.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.subject.is_empty() {
            f.write_str(&self.rule)
        } else {
            write!(f, "{}: {}", self.subject, self.rule)
        }
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// A contract as it appears in an instance file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractEntry {
    pub id: ContractId,
    pub participants: Vec<AgentId>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub autarkic_dummy: bool,
}

/// The on-disk form of an instance. Unchecked; see [`validate`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub agents: Vec<AgentId>,
    pub contracts: Vec<ContractEntry>,
    pub preferences: BTreeMap<AgentId, ChoiceSpec>,
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance files always serialize")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contract {
    pub id: ContractId,
    /// Sorted, no repeats.
    pub participants: Vec<AgentId>,
    /// Set on contracts introduced by [`augment_autarkic`].
    pub autarkic_dummy: bool,
}

impl Contract {
    pub fn is_autarkic(&self) -> bool {
        self.participants.len() == 1
    }
}

/// A set of contracts of one instance, as a bitmask over contract indices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContractSystem(pub Mask);

impl ContractSystem {
    pub const EMPTY: ContractSystem = ContractSystem(Mask::EMPTY);

    pub fn mask(self) -> Mask {
        self.0
    }

    pub fn contains(self, c: usize) -> bool {
        self.0.contains(c)
    }

    pub fn len(self) -> usize {
        self.0.len()
    }

    pub fn is_empty(self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        self.0.iter()
    }

    pub fn with(self, c: usize) -> ContractSystem {
        ContractSystem(self.0.with(c))
    }

    pub fn without(self, c: usize) -> ContractSystem {
        ContractSystem(self.0.without(c))
    }

    pub fn is_subset(self, other: ContractSystem) -> bool {
        self.0.is_subset(other.0)
    }
}

/// A validated, immutable equipped hypergraph.
///
/// Agents and contracts are kept sorted by id; contract index `k` is the
/// `k`-th contract in id order. Each agent's choice function has ground set
/// `C(i)` in the same order, so local index `j` of agent `i` is the `j`-th
/// entry of [`Instance::incident`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    agents: Vec<AgentId>,
    contracts: Vec<Contract>,
    equipment: Vec<ChoiceFunction>,
    incident: Vec<Vec<usize>>,
    members: Vec<Vec<usize>>,
}

/// Checks an instance file against every structural rule.
pub fn validate(file: &InstanceFile) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut agents = BTreeSet::new();
    for a in &file.agents {
        if a.as_str().is_empty() {
            out.push(Violation::new("", "empty agent id"));
        } else if !agents.insert(a.clone()) {
            out.push(Violation::new(a, "duplicate agent id"));
        }
    }
    let mut contract_ids = BTreeSet::new();
    let mut incident: BTreeMap<&AgentId, Vec<ContractId>> =
        agents.iter().map(|a| (a, Vec::new())).collect();
    for c in &file.contracts {
        if c.id.as_str().is_empty() {
            out.push(Violation::new("", "empty contract id"));
            continue;
        }
        if !contract_ids.insert(c.id.clone()) {
            out.push(Violation::new(&c.id, "duplicate contract id"));
            continue;
        }
        if c.participants.is_empty() {
            out.push(Violation::new(&c.id, "empty participant set"));
        }
        let mut seen = BTreeSet::new();
        for p in &c.participants {
            if !seen.insert(p) {
                out.push(Violation::new(&c.id, format!("participant {p} listed twice")));
            } else if let Some(list) = incident.get_mut(p) {
                list.push(c.id.clone());
            } else {
                out.push(Violation::new(&c.id, format!("unknown participant {p}")));
            }
        }
        if c.autarkic_dummy && c.participants.len() != 1 {
            out.push(Violation::new(&c.id, "dummy contract must be autarkic"));
        }
    }
    if contract_ids.len() > MAX_ELEMENTS {
        out.push(Violation::new(
            "",
            format!("at most {MAX_ELEMENTS} contracts are supported"),
        ));
    }
    for a in file.preferences.keys() {
        if !agents.contains(a) {
            out.push(Violation::new(a, "preferences for unknown agent"));
        }
    }
    for (a, owned) in &incident {
        let Some(spec) = file.preferences.get(*a) else {
            if owned.is_empty() {
                // an isolated agent needs no preferences
                continue;
            }
            out.push(Violation::new(a, "missing preferences"));
            continue;
        };
        let owned_set: BTreeSet<&ContractId> = owned.iter().collect();
        let mentioned = spec.mentioned();
        if mentioned.iter().collect::<BTreeSet<_>>() != owned_set {
            out.push(Violation::new(a, "equipment/contract mismatch"));
            continue;
        }
        if let Err(e) = ChoiceFunction::from_spec(spec, Some(owned)) {
            out.push(Violation::new(a, format!("invalid preferences: {e}")));
        }
    }
    out
}

impl Instance {
    /// Builds an instance from its file form, rejecting any violation.
    pub fn from_file(file: &InstanceFile) -> Result<Self> {
        let violations = validate(file);
        if !violations.is_empty() {
            return Err(Error::Invalid(violations));
        }
        let contracts: Vec<Contract> = file
            .contracts
            .iter()
            .map(|c| {
                let mut participants = c.participants.clone();
                participants.sort();
                Contract {
                    id: c.id.clone(),
                    participants,
                    autarkic_dummy: c.autarkic_dummy,
                }
            })
            .collect();
        let mut equipment = BTreeMap::new();
        for a in &file.agents {
            let ground: Vec<ContractId> = contracts
                .iter()
                .filter(|c| c.participants.contains(a))
                .map(|c| c.id.clone())
                .collect();
            let f = match file.preferences.get(a) {
                Some(spec) => ChoiceFunction::from_spec(spec, Some(&ground))?,
                None => ChoiceFunction::linear(vec![])?,
            };
            equipment.insert(a.clone(), f);
        }
        Instance::new(file.agents.clone(), contracts, equipment)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Instance::from_file(&InstanceFile::from_json(text)?)
    }

    /// Assembles an instance from parts. Each equipment entry's ground set
    /// must be exactly the contracts its agent takes part in.
    pub fn new(
        agents: Vec<AgentId>,
        contracts: Vec<Contract>,
        mut equipment: BTreeMap<AgentId, ChoiceFunction>,
    ) -> Result<Self> {
        let mut agents = agents;
        agents.sort();
        if agents.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Input("duplicate agent id".into()));
        }
        let mut contracts = contracts;
        contracts.sort_by(|a, b| a.id.cmp(&b.id));
        if contracts.windows(2).any(|w| w[0].id == w[1].id) {
            return Err(Error::Input("duplicate contract id".into()));
        }
        if contracts.len() > MAX_ELEMENTS {
            return Err(Error::Resource {
                what: "contract set",
                size: contracts.len(),
                cap: MAX_ELEMENTS,
            });
        }
        let mut members = Vec::with_capacity(contracts.len());
        let mut incident = vec![Vec::new(); agents.len()];
        for (k, c) in contracts.iter_mut().enumerate() {
            c.participants.sort();
            c.participants.dedup();
            if c.participants.is_empty() {
                return Err(Error::Input(format!("contract {} has no participants", c.id)));
            }
            let mut idx = Vec::with_capacity(c.participants.len());
            for p in &c.participants {
                let i = agents
                    .binary_search(p)
                    .map_err(|_| Error::Input(format!("contract {} names unknown agent {p}", c.id)))?;
                incident[i].push(k);
                idx.push(i);
            }
            members.push(idx);
        }
        let mut eq = Vec::with_capacity(agents.len());
        for (i, a) in agents.iter().enumerate() {
            let f = equipment
                .remove(a)
                .ok_or_else(|| Error::Input(format!("no choice function for agent {a}")))?;
            let expected: Vec<&ContractId> = incident[i].iter().map(|&k| &contracts[k].id).collect();
            if f.ground().iter().collect::<Vec<_>>() != expected {
                return Err(Error::Input(format!(
                    "choice function of {a} does not cover exactly its contracts"
                )));
            }
            eq.push(f);
        }
        if let Some(a) = equipment.keys().next() {
            return Err(Error::Input(format!("choice function for unknown agent {a}")));
        }
        Ok(Instance {
            agents,
            contracts,
            equipment: eq,
            incident,
            members,
        })
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            agents: self.agents.clone(),
            contracts: self
                .contracts
                .iter()
                .map(|c| ContractEntry {
                    id: c.id.clone(),
                    participants: c.participants.clone(),
                    autarkic_dummy: c.autarkic_dummy,
                })
                .collect(),
            preferences: self
                .agents
                .iter()
                .zip(&self.equipment)
                .map(|(a, f)| (a.clone(), f.to_spec()))
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        self.to_file().to_json()
    }

    /// Re-checks the file-level invariants; always empty for a constructed instance.
    pub fn validate(&self) -> Vec<Violation> {
        validate(&self.to_file())
    }

    pub fn agents(&self) -> &[AgentId] {
        &self.agents
    }

    pub fn contracts(&self) -> &[Contract] {
        &self.contracts
    }

    pub fn contract(&self, c: usize) -> &Contract {
        &self.contracts[c]
    }

    pub fn agent_index(&self, id: &str) -> Option<usize> {
        self.agents.binary_search_by(|a| a.as_str().cmp(id)).ok()
    }

    pub fn contract_index(&self, id: &str) -> Option<usize> {
        self.contracts.binary_search_by(|c| c.id.as_str().cmp(id)).ok()
    }

    pub fn equipment(&self, agent: usize) -> &ChoiceFunction {
        &self.equipment[agent]
    }

    pub fn equipments(&self) -> &[ChoiceFunction] {
        &self.equipment
    }

    /// `C(i)` as ascending contract indices.
    pub fn incident(&self, agent: usize) -> &[usize] {
        &self.incident[agent]
    }

    /// `P(c)` as ascending agent indices.
    pub fn participants(&self, contract: usize) -> &[usize] {
        &self.members[contract]
    }

    /// Local index of `contract` in the ground set of `agent`.
    pub fn local_index(&self, agent: usize, contract: usize) -> Option<usize> {
        self.incident[agent].binary_search(&contract).ok()
    }

    pub fn all(&self) -> ContractSystem {
        ContractSystem(Mask::full(self.contracts.len()))
    }

    pub fn system<S: AsRef<str>>(&self, ids: &[S]) -> Result<ContractSystem> {
        ids.iter()
            .map(|id| {
                self.contract_index(id.as_ref())
                    .ok_or_else(|| Error::Input(format!("unknown contract {}", id.as_ref())))
            })
            .collect::<Result<Mask>>()
            .map(ContractSystem)
    }

    pub fn system_ids(&self, s: ContractSystem) -> Vec<ContractId> {
        s.iter().map(|k| self.contracts[k].id.clone()).collect()
    }

    /// `S(i)` as a menu of agent `i`'s choice function.
    pub fn local(&self, s: ContractSystem, agent: usize) -> Mask {
        self.incident[agent]
            .iter()
            .enumerate()
            .filter(|(_, &k)| s.contains(k))
            .map(|(j, _)| j)
            .collect()
    }

    /// Inverse of [`Instance::local`].
    pub fn global(&self, agent: usize, local: Mask) -> ContractSystem {
        ContractSystem(local.iter().map(|j| self.incident[agent][j]).collect())
    }

    /// `S(i) = {s ∈ S : i ∈ P(s)}`.
    pub fn restrict(&self, s: ContractSystem, agent: &str) -> Result<ContractSystem> {
        let i = self
            .agent_index(agent)
            .ok_or_else(|| Error::Input(format!("unknown agent {agent}")))?;
        Ok(self.global(i, self.local(s, i)))
    }

    pub fn has_autarkic(&self, agent: usize) -> bool {
        self.incident[agent]
            .iter()
            .any(|&k| self.contracts[k].is_autarkic())
    }

    /// Same hypergraph, new equipment (agent order).
    pub fn with_equipment(&self, equipment: Vec<ChoiceFunction>) -> Result<Instance> {
        let map = self.agents.iter().cloned().zip(equipment).collect();
        Instance::new(self.agents.clone(), self.contracts.clone(), map)
    }

    /// Deletes the contracts in `drop` and restricts every choice function.
    pub fn without_contracts(&self, drop: ContractSystem) -> Instance {
        let equipment = (0..self.agents.len())
            .map(|i| {
                let keep = self.local(ContractSystem(self.all().0.difference(drop.0)), i);
                (self.agents[i].clone(), self.equipment[i].restricted(keep))
            })
            .collect();
        let contracts = self
            .contracts
            .iter()
            .enumerate()
            .filter(|(k, _)| !drop.contains(*k))
            .map(|(_, c)| c.clone())
            .collect();
        Instance::new(self.agents.clone(), contracts, equipment)
            .expect("restriction of a valid instance is valid")
    }

    /// Maps a system of `self` into `other` by contract id, skipping ids
    /// `other` lacks.
    pub fn transfer(&self, s: ContractSystem, other: &Instance) -> ContractSystem {
        ContractSystem(
            s.iter()
                .filter_map(|k| other.contract_index(self.contracts[k].id.as_str()))
                .collect(),
        )
    }
}

/// Adds a worst-ranked dummy autarkic contract `{i}` for agents that need one.
///
/// With `add_always = false` an agent is left alone when it already owns an
/// autarkic contract ranked strictly below everything else in `C(i)`.
/// Only linear and weak equipment is supported; the dummy becomes a new
/// bottom tier, i.e. utility `min - 1`.
pub fn augment_autarkic(instance: &Instance, add_always: bool) -> Result<Instance> {
    let mut contracts = instance.contracts.clone();
    let mut taken: BTreeSet<ContractId> = contracts.iter().map(|c| c.id.clone()).collect();
    let mut equipment = BTreeMap::new();
    for (i, agent) in instance.agents.iter().enumerate() {
        let f = &instance.equipment[i];
        let tiers = f.tiers().ok_or_else(|| {
            Error::Unsupported(format!(
                "augmentation needs linear or weak preferences; agent {agent} has {}",
                f.kind()
            ))
        })?;
        let worst_is_autarkic = tiers.last().is_some_and(|t| {
            t.len() == 1 && instance.contracts[instance.incident[i][t.first().unwrap()]].is_autarkic()
        });
        if !add_always && worst_is_autarkic {
            equipment.insert(agent.clone(), f.clone());
            continue;
        }
        let mut id = ContractId::new(format!("{agent}#dummy"));
        let mut n = 1;
        while taken.contains(&id) {
            n += 1;
            id = ContractId::new(format!("{agent}#dummy{n}"));
        }
        taken.insert(id.clone());
        let mut spec_tiers: Vec<Vec<ContractId>> = tiers.iter().map(|&t| f.ids(t)).collect();
        spec_tiers.push(vec![id.clone()]);
        let g = if f.is_linear() {
            ChoiceFunction::linear(spec_tiers.into_iter().flatten().collect())?
        } else {
            ChoiceFunction::weak(spec_tiers)?
        };
        equipment.insert(agent.clone(), g);
        contracts.push(Contract {
            id,
            participants: vec![agent.clone()],
            autarkic_dummy: true,
        });
    }
    Instance::new(instance.agents.clone(), contracts, equipment)
}

/// Deletes every contract that is null for one of its participants (lies in
/// that agent's largest null set). Returns the pruned instance and the
/// removed system of the original.
pub fn prune_null_contracts(instance: &Instance, cap: usize) -> Result<(Instance, ContractSystem)> {
    let mut drop = ContractSystem::EMPTY;
    for i in 0..instance.agents.len() {
        let f = &instance.equipment[i];
        let null = crate::choice::largest_null_set(f, cap)?;
        for id in &null.members {
            let k = instance.contract_index(id.as_str()).expect("ground ids are contracts");
            drop = drop.with(k);
        }
    }
    if drop.is_empty() {
        return Ok((instance.clone(), drop));
    }
    Ok((instance.without_contracts(drop), drop))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{cyc3, pair_only};

    #[test]
    fn restrict_examples() {
        let g = cyc3();
        let s = g.system(&["c12", "c23"]).unwrap();
        assert_eq!(g.system_ids(g.restrict(s, "2").unwrap()), vec!["c12".into(), "c23".into()] as Vec<ContractId>);
        assert_eq!(g.system_ids(g.restrict(s, "3").unwrap()), vec![ContractId::from("c23")]);
        assert!(g.restrict(ContractSystem::EMPTY, "1").unwrap().is_empty());
        assert!(matches!(g.restrict(s, "9"), Err(Error::Input(_))));
    }

    #[test]
    fn cyc3_is_valid() {
        assert!(cyc3().validate().is_empty());
    }

    #[test]
    fn empty_participants_reported() {
        let mut file = cyc3().to_file();
        file.contracts.push(ContractEntry {
            id: "ghost".into(),
            participants: vec![],
            autarkic_dummy: false,
        });
        let v = validate(&file);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].subject, "ghost");
        assert_eq!(v[0].rule, "empty participant set");
    }

    #[test]
    fn equipment_mismatch_reported() {
        let mut file = cyc3().to_file();
        file.preferences.insert(
            "1".into(),
            ChoiceSpec::Linear {
                ranking: vec!["c12".into(), "a1".into()],
            },
        );
        let v = validate(&file);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].subject, "1");
        assert_eq!(v[0].rule, "equipment/contract mismatch");
        assert!(matches!(Instance::from_file(&file), Err(Error::Invalid(_))));
    }

    #[test]
    fn other_violations() {
        let file = InstanceFile::from_json(
            r#"{"agents":["x","x"],"contracts":[{"id":"k","participants":["x","y"]},{"id":"k","participants":["x"]}],"preferences":{"z":{"type":"linear","ranking":[]}}}"#,
        )
        .unwrap();
        let rules: Vec<String> = validate(&file).into_iter().map(|v| v.rule).collect();
        assert!(rules.contains(&"duplicate agent id".to_string()));
        assert!(rules.contains(&"duplicate contract id".to_string()));
        assert!(rules.contains(&"unknown participant y".to_string()));
        assert!(rules.contains(&"preferences for unknown agent".to_string()));
        assert!(rules.contains(&"missing preferences".to_string()));
    }

    #[test]
    fn augment_two_agents() {
        let g = pair_only();
        let aug = augment_autarkic(&g, false).unwrap();
        assert_eq!(aug.contracts().len(), 3);
        for (i, a) in aug.agents().iter().enumerate() {
            let f = aug.equipment(i);
            let worst = *f.ranking().unwrap().last().unwrap();
            let c = aug.contract(aug.incident(i)[worst]);
            assert!(c.autarkic_dummy);
            assert_eq!(c.participants, vec![a.clone()]);
        }
        assert!(aug.validate().is_empty());
    }

    #[test]
    fn augment_leaves_cyc3_alone() {
        let g = cyc3();
        assert_eq!(augment_autarkic(&g, false).unwrap(), g);
        assert_eq!(augment_autarkic(&g, true).unwrap().contracts().len(), 9);
    }

    #[test]
    fn augment_single_agent_without_contracts() {
        let file = InstanceFile::from_json(r#"{"agents":["1"],"contracts":[],"preferences":{}}"#).unwrap();
        let g = Instance::from_file(&file).unwrap();
        let aug = augment_autarkic(&g, false).unwrap();
        assert_eq!(aug.contracts().len(), 1);
        assert!(aug.contract(0).autarkic_dummy);
    }

    #[test]
    fn augment_rejects_quota() {
        let file = InstanceFile::from_json(
            r#"{"agents":["1"],"contracts":[{"id":"a","participants":["1"]}],"preferences":{"1":{"type":"quota","ranking":["a"],"quota":1}}}"#,
        )
        .unwrap();
        let g = Instance::from_file(&file).unwrap();
        assert!(matches!(augment_autarkic(&g, false), Err(Error::Unsupported(_))));
    }

    #[test]
    fn weak_augmentation_adds_bottom_tier() {
        let file = InstanceFile::from_json(
            r#"{"agents":["1"],"contracts":[{"id":"a","participants":["1"]},{"id":"b","participants":["1"]}],"preferences":{"1":{"type":"weak","tiers":[["a","b"]]}}}"#,
        )
        .unwrap();
        let g = Instance::from_file(&file).unwrap();
        let aug = augment_autarkic(&g, false).unwrap();
        // the dummy id sorts first in the ground set
        assert_eq!(aug.equipment(0).ground()[0].as_str(), "1#dummy");
        assert_eq!(aug.equipment(0).utilities().unwrap(), vec![0, 1, 1]);
    }

    #[test]
    fn json_round_trip() {
        let g = cyc3();
        assert_eq!(Instance::from_json(&g.to_json()).unwrap(), g);
    }

    #[test]
    fn pruning_removes_null_contracts() {
        let file = InstanceFile::from_json(
            r#"{"agents":["1","2"],"contracts":[{"id":"a","participants":["1"]},{"id":"z","participants":["1","2"]}],
               "preferences":{"1":{"type":"table","entries":[[["a"],["a"]],[["z"],[]],[["a","z"],["a"]]]},
                              "2":{"type":"linear","ranking":["z"]}}}"#,
        )
        .unwrap();
        let g = Instance::from_file(&file).unwrap();
        let (p, dropped) = prune_null_contracts(&g, 16).unwrap();
        assert_eq!(g.system_ids(dropped), vec![ContractId::from("z")]);
        assert_eq!(p.contracts().len(), 1);
        assert!(p.equipment(1).is_empty());
    }
}
