//! Exhaustive oracles and a seeded instance generator.
//!
//! The oracles are written against contract and agent ids only, sharing
//! nothing with the library modules except `ChoiceFunction::choose`, so that
//! property tests compare two independent implementations.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::{sort_canonical, Mask};
use crate::choice::{ChoiceFunction, ChoiceSpec};
use crate::error::{check_cap, Error, Result};
use crate::ids::{AgentId, ContractId};
use crate::instance::{ContractEntry, ContractSystem, Instance, InstanceFile};
use crate::metastable::CompromiseVector;

/// Default cap on `|C|` for the `2^|C|` scans.
pub const DEFAULT_ORACLE_CAP: usize = 20;

/// Default cap on the number of grid points for [`enumerate_compromises`].
pub const DEFAULT_GRID_CAP: usize = 1 << 20;

/// Whether `d` tempts every one of its participants away from `S`.
fn oracle_dominates(g: &Instance, held: &BTreeMap<&AgentId, Vec<&ContractId>>, d: &ContractId) -> bool {
    let c = &g.contracts()[g.contract_index(d.as_str()).unwrap()];
    c.participants.iter().all(|agent| {
        let f = g.equipment(g.agent_index(agent.as_str()).unwrap());
        let mine = held.get(agent).map(Vec::as_slice).unwrap_or(&[]);
        if mine.is_empty() {
            return true;
        }
        let di = f.index_of(d.as_str()).unwrap();
        mine.iter().any(|a| {
            let ai = f.index_of(a.as_str()).unwrap();
            let pair = Mask::singleton(ai).with(di);
            !f.choose(pair).contains(ai)
        })
    })
}

fn holdings<'a>(g: &'a Instance, s: Mask) -> BTreeMap<&'a AgentId, Vec<&'a ContractId>> {
    let mut held: BTreeMap<&AgentId, Vec<&ContractId>> = BTreeMap::new();
    for k in s.iter() {
        let c = &g.contracts()[k];
        for p in &c.participants {
            held.entry(p).or_default().push(&c.id);
        }
    }
    held
}

/// Whether no contract of `C` (members of `S` included) dominates `S`.
pub fn oracle_is_metastable(g: &Instance, s: ContractSystem) -> bool {
    let held = holdings(g, s.mask());
    !g.contracts().iter().any(|c| oracle_dominates(g, &held, &c.id))
}

/// Every meta-stable system, by increasing size and then lexicographically.
pub fn enumerate_metastable(g: &Instance, cap: usize) -> Result<Vec<ContractSystem>> {
    check_cap("contract set", g.contracts().len(), cap)?;
    let mut found: Vec<Mask> = Mask::full(g.contracts().len())
        .subsets()
        .filter(|&m| oracle_is_metastable(g, ContractSystem(m)))
        .collect();
    sort_canonical(&mut found);
    Ok(found.into_iter().map(ContractSystem).collect())
}

/// Every vector on the utility grid with both compromise properties, in
/// descending lexicographic order over agents.
///
/// Requires linear or weak equipment.
pub fn enumerate_compromises(g: &Instance, grid_cap: usize) -> Result<Vec<CompromiseVector>> {
    let n = g.agents().len();
    // utility of each (contract, participant) pair, by ids
    let mut table: Vec<Vec<(usize, i64)>> = Vec::new();
    let mut axes: Vec<Vec<i64>> = vec![Vec::new(); n];
    for c in g.contracts() {
        let mut row = Vec::new();
        for p in &c.participants {
            let i = g.agent_index(p.as_str()).unwrap();
            let f = g.equipment(i);
            let u = f.utilities().ok_or_else(|| {
                Error::Precondition(format!("agent {p} needs linear or weak preferences"))
            })?;
            let v = u[f.index_of(c.id.as_str()).unwrap()];
            row.push((i, v));
            axes[i].push(v);
        }
        table.push(row);
    }
    for a in &mut axes {
        a.sort_unstable();
        a.dedup();
        a.reverse();
    }
    let mut size = 1usize;
    for a in &axes {
        size = size.saturating_mul(a.len().max(1));
    }
    check_cap("compromise grid", size, grid_cap)?;
    if axes.iter().any(Vec::is_empty) {
        // an agent without contracts can never meet the second property
        return Ok(Vec::new());
    }

    let mut out = Vec::new();
    for idx in 0..size {
        // mixed radix, last agent fastest
        let mut rest = idx;
        let mut x = vec![0i64; n];
        for i in (0..n).rev() {
            x[i] = axes[i][rest % axes[i].len()];
            rest /= axes[i].len();
        }
        let nothing_beats = table.iter().all(|row| row.iter().any(|&(i, u)| u <= x[i]));
        let everyone_covered = (0..n).all(|i| {
            table
                .iter()
                .any(|row| row.iter().any(|&(j, _)| j == i) && row.iter().all(|&(j, u)| x[j] <= u))
        });
        if nothing_beats && everyone_covered {
            out.push(CompromiseVector {
                values: g.agents().iter().cloned().zip(x).collect(),
            });
        }
    }
    Ok(out)
}

/// Relative weights of the equipment kinds drawn by [`generate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquipmentMix {
    pub linear: f64,
    pub weak: f64,
    pub quota: f64,
    pub union: f64,
}

impl Default for EquipmentMix {
    fn default() -> Self {
        EquipmentMix {
            linear: 0.4,
            weak: 0.2,
            quota: 0.2,
            union: 0.2,
        }
    }
}

impl EquipmentMix {
    pub fn linear_only() -> Self {
        EquipmentMix {
            linear: 1.0,
            weak: 0.0,
            quota: 0.0,
            union: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub seed: u64,
    /// Inclusive range for the number of agents.
    pub agents: (usize, usize),
    /// Inclusive range for the number of contracts, autarkic ones included.
    pub contracts: (usize, usize),
    pub max_participants: usize,
    pub mix: EquipmentMix,
    /// Give every agent its own autarkic contract.
    pub autarkic: bool,
    /// Exactly this many agents get a union of two random linear orders;
    /// the others are drawn from the linear and weak weights of `mix`, so
    /// that the union agents are the only ones a reduction has to split.
    pub exact_union_agents: Option<usize>,
}

/// Module caps for generated instances.
pub const MAX_AGENTS: usize = 5;
pub const MAX_CONTRACTS: usize = 8;

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 1,
            agents: (2, 4),
            contracts: (3, 7),
            max_participants: 3,
            mix: EquipmentMix::default(),
            autarkic: true,
            exact_union_agents: None,
        }
    }
}

impl GeneratorConfig {
    pub fn with_seed(seed: u64) -> Self {
        GeneratorConfig {
            seed,
            ..Self::default()
        }
    }

    fn check(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Input(format!("generator config: {msg}")));
        let (a0, a1) = self.agents;
        let (c0, c1) = self.contracts;
        if a0 == 0 || a0 > a1 || a1 > MAX_AGENTS {
            return bad("agent range must satisfy 1 <= min <= max <= 5");
        }
        if c0 > c1 || c1 > MAX_CONTRACTS {
            return bad("contract range must satisfy min <= max <= 8");
        }
        if self.max_participants == 0 {
            return bad("max_participants must be positive");
        }
        if self.autarkic && c1 < a0 {
            return bad("too few contracts for one autarkic contract per agent");
        }
        let weights = [self.mix.linear, self.mix.weak, self.mix.quota, self.mix.union];
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || weights.iter().sum::<f64>() <= 0.0 {
            return bad("equipment weights must be non-negative with a positive sum");
        }
        if let Some(k) = self.exact_union_agents {
            if k > a1 {
                return bad("more union agents than agents");
            }
            if self.mix.linear + self.mix.weak <= 0.0 && k < a1 {
                return bad("non-union agents need a linear or weak weight");
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum Kind {
    Linear,
    Weak,
    Quota,
    Union,
}

fn pick_kind(rng: &mut ChaCha8Rng, mix: &EquipmentMix, orders_only: bool) -> Kind {
    let weights = if orders_only {
        [mix.linear, mix.weak, 0.0, 0.0]
    } else {
        [mix.linear, mix.weak, mix.quota, mix.union]
    };
    let mut r = rng.random::<f64>() * weights.iter().sum::<f64>();
    for (w, k) in weights
        .into_iter()
        .zip([Kind::Linear, Kind::Weak, Kind::Quota, Kind::Union])
    {
        if r < w {
            return k;
        }
        r -= w;
    }
    Kind::Linear
}

fn shuffled(rng: &mut ChaCha8Rng, ground: &[ContractId]) -> Vec<ContractId> {
    let mut v = ground.to_vec();
    v.shuffle(rng);
    v
}

fn random_spec(rng: &mut ChaCha8Rng, kind: Kind, ground: &[ContractId]) -> ChoiceSpec {
    match kind {
        Kind::Linear => ChoiceSpec::Linear {
            ranking: shuffled(rng, ground),
        },
        Kind::Weak => {
            let order = shuffled(rng, ground);
            let mut tiers: Vec<Vec<ContractId>> = vec![Vec::new()];
            for (k, c) in order.into_iter().enumerate() {
                if k > 0 && rng.random_bool(0.5) {
                    tiers.push(Vec::new());
                }
                tiers.last_mut().unwrap().push(c);
            }
            ChoiceSpec::Weak { tiers }
        }
        Kind::Quota => ChoiceSpec::Quota {
            quota: rng.random_range(1..=ground.len()),
            ranking: shuffled(rng, ground),
        },
        Kind::Union => ChoiceSpec::Union {
            parts: vec![shuffled(rng, ground), shuffled(rng, ground)],
        },
    }
}

/// A pseudo-random valid instance. The same config always yields the same
/// instance.
pub fn generate(config: &GeneratorConfig) -> Result<Instance> {
    config.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = rng.random_range(config.agents.0..=config.agents.1);
    let lo = if config.autarkic {
        config.contracts.0.max(n)
    } else {
        config.contracts.0
    };
    if lo > config.contracts.1 {
        return Err(Error::Input(format!(
            "generator config: {n} agents need at least {n} contracts"
        )));
    }
    let m = rng.random_range(lo..=config.contracts.1);
    let agents: Vec<AgentId> = (1..=n).map(|i| AgentId::new(i.to_string())).collect();

    let mut contracts = Vec::new();
    if config.autarkic {
        for a in &agents {
            contracts.push(ContractEntry {
                id: ContractId::new(format!("a{a}")),
                participants: vec![a.clone()],
                autarkic_dummy: false,
            });
        }
    }
    let width = config.max_participants.min(n);
    let mut k = 0;
    while contracts.len() < m {
        k += 1;
        let size = if width >= 2 { rng.random_range(2..=width) } else { 1 };
        let mut who = agents.clone();
        who.shuffle(&mut rng);
        who.truncate(size);
        who.sort();
        contracts.push(ContractEntry {
            id: ContractId::new(format!("c{k}")),
            participants: who,
            autarkic_dummy: false,
        });
    }

    let mut union_agents = vec![false; n];
    if let Some(u) = config.exact_union_agents {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        for &i in order.iter().take(u.min(n)) {
            union_agents[i] = true;
        }
    }
    let mut preferences = BTreeMap::new();
    for (i, a) in agents.iter().enumerate() {
        let mut ground: Vec<ContractId> = contracts
            .iter()
            .filter(|c| c.participants.contains(a))
            .map(|c| c.id.clone())
            .collect();
        if ground.is_empty() {
            continue;
        }
        ground.sort();
        let kind = match config.exact_union_agents {
            Some(_) if union_agents[i] => Kind::Union,
            Some(_) => pick_kind(&mut rng, &config.mix, true),
            None => pick_kind(&mut rng, &config.mix, false),
        };
        preferences.insert(a.clone(), random_spec(&mut rng, kind, &ground));
    }
    Instance::from_file(&InstanceFile {
        agents,
        contracts,
        preferences,
    })
}

/// `ChoiceFunction` over `0..n` named `e0, e1, ...` from a table closure;
/// handy for random-table tests.
pub fn random_table(rng: &mut ChaCha8Rng, n: usize) -> Result<ChoiceFunction> {
    let ground: Vec<ContractId> = (0..n).map(|i| ContractId::new(format!("e{i}"))).collect();
    let picks: Vec<Mask> = Mask::full(n)
        .subsets()
        .map(|m| m.iter().filter(|_| rng.random_bool(0.5)).collect())
        .collect();
    ChoiceFunction::tabulate(ground, |m| picks[m.0 as usize])
}

/// Union of `k` random linear orders over `n` elements named `e0, e1, ...`.
pub fn random_union(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Result<ChoiceFunction> {
    let ground: Vec<ContractId> = (0..n).map(|i| ContractId::new(format!("e{i}"))).collect();
    let parts = (0..k).map(|_| shuffled(rng, &ground)).collect();
    ChoiceFunction::union_of_linear(parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{cyc3, marr, solo};

    #[test]
    fn cyc3_oracle() {
        let g = cyc3();
        let all = enumerate_metastable(&g, DEFAULT_ORACLE_CAP).unwrap();
        assert!(all.contains(&g.system(&["c12", "c23"]).unwrap()));
        assert!(all.contains(&g.system(&["c12", "c23", "c31"]).unwrap()));
        assert!(!all.contains(&ContractSystem::EMPTY));
    }

    #[test]
    fn small_oracles() {
        let s = solo();
        assert_eq!(enumerate_metastable(&s, DEFAULT_ORACLE_CAP).unwrap(), vec![s.all()]);
        let x = enumerate_compromises(&s, DEFAULT_GRID_CAP).unwrap();
        assert_eq!(x.len(), 1);
        assert_eq!(x[0].values[&AgentId::from("1")], 0);
        let m = marr();
        assert!(enumerate_metastable(&m, DEFAULT_ORACLE_CAP)
            .unwrap()
            .contains(&m.system(&["m1w1", "m2w2"]).unwrap()));
    }

    #[test]
    fn cyc3_compromises() {
        let g = cyc3();
        let all = enumerate_compromises(&g, DEFAULT_GRID_CAP).unwrap();
        let want: Vec<i64> = vec![2, 1, 1];
        assert!(all.iter().any(|x| x.values.values().copied().collect::<Vec<_>>() == want));
    }

    #[test]
    fn generator_is_deterministic() {
        let c = GeneratorConfig::with_seed(1);
        let a = generate(&c).unwrap();
        assert!(a.validate().is_empty());
        assert_eq!(a.to_json(), generate(&c).unwrap().to_json());
        for seed in 1..=100 {
            assert!(generate(&GeneratorConfig::with_seed(seed)).unwrap().validate().is_empty());
        }
    }

    #[test]
    fn generator_rejects_bad_configs() {
        let mut c = GeneratorConfig::default();
        c.agents = (3, 2);
        assert!(matches!(generate(&c), Err(Error::Input(_))));
        let mut c = GeneratorConfig::default();
        c.agents = (4, 4);
        c.contracts = (1, 3);
        assert!(matches!(generate(&c), Err(Error::Input(_))));
    }

    #[test]
    fn exact_union_agents() {
        for seed in 0..30 {
            let c = GeneratorConfig {
                seed,
                exact_union_agents: Some(1),
                ..GeneratorConfig::default()
            };
            let g = generate(&c).unwrap();
            let unions = g.equipments().iter().filter(|f| f.kind() == "union").count();
            assert_eq!(unions, 1);
        }
    }
}
