//! Choice functions over a finite set of contracts.
//!
//! [`ChoiceSpec`] is the declarative, serializable form used in instance
//! files. [`ChoiceFunction`] is the compiled form: a sorted ground set plus a
//! rule operating on [`Mask`]s of local indices into that ground set.

mod orders;
mod plott;
mod pullback;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bits::{Mask, MAX_ELEMENTS};
use crate::error::{check_cap, Error, Result};
use crate::ids::ContractId;

pub use orders::{am_decompose, is_respecting, respecting_order};
pub use plott::{
    blair_leq, check_heredity, check_outcast, is_non_empty_valued, is_path_independent,
    largest_null_set, weak_representation, HeredityWitness, NullSet, OutcastWitness, PathWitness,
};
pub use pullback::{pullback, union_of};
pub(crate) use plott::require_plott;

/// Default ground-set cap for exhaustive menu scans (2^16 menus).
pub const DEFAULT_CAP: usize = 16;

/// Largest ground set an explicit table may have.
pub const TABLE_LIMIT: usize = 20;

/// Serialized preference device of one agent.
///
/// Rankings and tiers list the best contracts first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ChoiceSpec {
    Linear {
        ranking: Vec<ContractId>,
    },
    Weak {
        tiers: Vec<Vec<ContractId>>,
    },
    Quota {
        ranking: Vec<ContractId>,
        quota: usize,
    },
    Union {
        parts: Vec<Vec<ContractId>>,
    },
    /// Explicit `(menu, choice)` pairs. Every nonempty menu over the ground
    /// set must appear; the empty menu may be omitted.
    Table {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ground: Option<Vec<ContractId>>,
        entries: Vec<(Vec<ContractId>, Vec<ContractId>)>,
    },
}

impl ChoiceSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ChoiceSpec::Linear { .. } => "linear",
            ChoiceSpec::Weak { .. } => "weak",
            ChoiceSpec::Quota { .. } => "quota",
            ChoiceSpec::Union { .. } => "union",
            ChoiceSpec::Table { .. } => "table",
        }
    }

    /// Every contract id mentioned by the spec.
    pub fn mentioned(&self) -> BTreeSet<ContractId> {
        match self {
            ChoiceSpec::Linear { ranking } | ChoiceSpec::Quota { ranking, .. } => {
                ranking.iter().cloned().collect()
            }
            ChoiceSpec::Weak { tiers } => tiers.iter().flatten().cloned().collect(),
            ChoiceSpec::Union { parts } => parts.iter().flatten().cloned().collect(),
            ChoiceSpec::Table { ground, entries } => {
                let mut s: BTreeSet<ContractId> = entries
                    .iter()
                    .flat_map(|(m, c)| m.iter().chain(c))
                    .cloned()
                    .collect();
                if let Some(g) = ground {
                    s.extend(g.iter().cloned());
                }
                s
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Rule {
    /// Local indices, best first.
    Linear(Vec<usize>),
    /// Tiers of local indices, best first. Tiers are nonempty and disjoint.
    Weak(Vec<Mask>),
    Quota { ranking: Vec<usize>, quota: usize },
    /// Each part is a full ranking, best first.
    Union(Vec<Vec<usize>>),
    /// Indexed by menu bits.
    Table(Vec<Mask>),
}

/// A compiled choice function on a finite ground set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChoiceFunction {
    ground: Vec<ContractId>,
    rule: Rule,
}

impl ChoiceFunction {
    /// Compiles a spec. `ground`, when given, is the set the spec must cover
    /// (for an agent this is `C(i)`); otherwise it is inferred from the spec.
    pub fn from_spec(spec: &ChoiceSpec, ground: Option<&[ContractId]>) -> Result<Self> {
        let ground: Vec<ContractId> = match ground {
            Some(g) => {
                let set: BTreeSet<ContractId> = g.iter().cloned().collect();
                if set.len() != g.len() {
                    return Err(Error::Input("ground set has duplicate ids".into()));
                }
                set.into_iter().collect()
            }
            None => match spec {
                ChoiceSpec::Table {
                    ground: Some(g), ..
                } => {
                    let set: BTreeSet<ContractId> = g.iter().cloned().collect();
                    if set.len() != g.len() {
                        return Err(Error::Input("table ground has duplicate ids".into()));
                    }
                    set.into_iter().collect()
                }
                _ => spec.mentioned().into_iter().collect(),
            },
        };
        if ground.len() > MAX_ELEMENTS {
            return Err(Error::Resource {
                what: "choice ground set",
                size: ground.len(),
                cap: MAX_ELEMENTS,
            });
        }
        let index = |id: &ContractId| -> Result<usize> {
            ground
                .binary_search(id)
                .map_err(|_| Error::Input(format!("contract {id} is outside the ground set")))
        };
        let ranking_of = |ids: &[ContractId], what: &str| -> Result<Vec<usize>> {
            let r = ids.iter().map(index).collect::<Result<Vec<_>>>()?;
            if Mask::from_indices(r.iter().copied()) != Mask::full(ground.len())
                || r.len() != ground.len()
            {
                return Err(Error::Input(format!(
                    "{what} must list every ground contract exactly once"
                )));
            }
            Ok(r)
        };
        let rule = match spec {
            ChoiceSpec::Linear { ranking } => Rule::Linear(ranking_of(ranking, "linear ranking")?),
            ChoiceSpec::Weak { tiers } => {
                let mut seen = Mask::EMPTY;
                let mut out = Vec::with_capacity(tiers.len());
                for tier in tiers {
                    if tier.is_empty() {
                        return Err(Error::Input("weak order has an empty tier".into()));
                    }
                    let mut m = Mask::EMPTY;
                    for id in tier {
                        let i = index(id)?;
                        if seen.contains(i) {
                            return Err(Error::Input(format!("contract {id} appears twice")));
                        }
                        seen = seen.with(i);
                        m = m.with(i);
                    }
                    out.push(m);
                }
                if seen != Mask::full(ground.len()) {
                    return Err(Error::Input(
                        "weak order must cover every ground contract".into(),
                    ));
                }
                Rule::Weak(out)
            }
            ChoiceSpec::Quota { ranking, quota } => {
                if *quota == 0 {
                    return Err(Error::Input("quota must be at least 1".into()));
                }
                Rule::Quota {
                    ranking: ranking_of(ranking, "quota ranking")?,
                    quota: *quota,
                }
            }
            ChoiceSpec::Union { parts } => {
                if parts.is_empty() {
                    return Err(Error::Input("union needs at least one part".into()));
                }
                Rule::Union(
                    parts
                        .iter()
                        .map(|p| ranking_of(p, "union part"))
                        .collect::<Result<_>>()?,
                )
            }
            ChoiceSpec::Table { entries, .. } => {
                check_cap("table ground set", ground.len(), TABLE_LIMIT)?;
                let n_menus = 1usize << ground.len();
                let mut table: Vec<Option<Mask>> = vec![None; n_menus];
                table[0] = Some(Mask::EMPTY);
                for (menu, choice) in entries {
                    let m = Mask::from_indices(menu.iter().map(index).collect::<Result<Vec<_>>>()?);
                    let c =
                        Mask::from_indices(choice.iter().map(index).collect::<Result<Vec<_>>>()?);
                    if !c.is_subset(m) {
                        return Err(Error::Input(format!(
                            "table choice {choice:?} is not contained in menu {menu:?}"
                        )));
                    }
                    let slot = &mut table[m.0 as usize];
                    match slot {
                        Some(prev) if m.is_empty() && c.is_empty() && *prev == c => {}
                        Some(_) => {
                            return Err(Error::Input(format!("menu {menu:?} listed twice")))
                        }
                        None => *slot = Some(c),
                    }
                }
                let table = table
                    .into_iter()
                    .enumerate()
                    .map(|(bits, c)| {
                        c.ok_or_else(|| {
                            let ids: Vec<&str> = Mask(bits as u64)
                                .iter()
                                .map(|i| ground[i].as_str())
                                .collect();
                            Error::Input(format!("table has no entry for menu {ids:?}"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Rule::Table(table)
            }
        };
        Ok(ChoiceFunction { ground, rule })
    }

    /// Linear choice function from a best-first ranking.
    pub fn linear(ranking: Vec<ContractId>) -> Result<Self> {
        Self::from_spec(&ChoiceSpec::Linear { ranking }, None)
    }

    /// Weak-order choice function from best-first tiers.
    pub fn weak(tiers: Vec<Vec<ContractId>>) -> Result<Self> {
        Self::from_spec(&ChoiceSpec::Weak { tiers }, None)
    }

    pub fn quota(ranking: Vec<ContractId>, quota: usize) -> Result<Self> {
        Self::from_spec(&ChoiceSpec::Quota { ranking, quota }, None)
    }

    /// Union of linear choice functions given by best-first rankings.
    pub fn union_of_linear(parts: Vec<Vec<ContractId>>) -> Result<Self> {
        Self::from_spec(&ChoiceSpec::Union { parts }, None)
    }

    /// Tabulates an arbitrary function of local menus. The closure's output
    /// is intersected with the menu and forced empty on the empty menu.
    pub fn tabulate(ground: Vec<ContractId>, f: impl Fn(Mask) -> Mask) -> Result<Self> {
        let mut ground = ground;
        ground.sort();
        ground.dedup();
        check_cap("table ground set", ground.len(), TABLE_LIMIT)?;
        let table = Mask::full(ground.len())
            .subsets()
            .map(|m| f(m).intersection(m))
            .collect();
        Ok(ChoiceFunction {
            ground,
            rule: Rule::Table(table),
        })
    }

    pub(crate) fn from_linear_indices(ground: Vec<ContractId>, ranking: Vec<usize>) -> Self {
        debug_assert_eq!(ground.len(), ranking.len());
        ChoiceFunction {
            ground,
            rule: Rule::Linear(ranking),
        }
    }

    pub(crate) fn from_weak_tiers(ground: Vec<ContractId>, tiers: Vec<Mask>) -> Self {
        ChoiceFunction {
            ground,
            rule: Rule::Weak(tiers),
        }
    }

    /// Sorted ground set.
    pub fn ground(&self) -> &[ContractId] {
        &self.ground
    }

    pub fn len(&self) -> usize {
        self.ground.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ground.is_empty()
    }

    pub fn full(&self) -> Mask {
        Mask::full(self.ground.len())
    }

    pub fn kind(&self) -> &'static str {
        match self.rule {
            Rule::Linear(_) => "linear",
            Rule::Weak(_) => "weak",
            Rule::Quota { .. } => "quota",
            Rule::Union(_) => "union",
            Rule::Table(_) => "table",
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.rule, Rule::Linear(_))
    }

    pub fn is_weak(&self) -> bool {
        matches!(self.rule, Rule::Weak(_))
    }

    /// Linear or weak: preferences given by a (pre)order on contracts.
    pub fn is_order_based(&self) -> bool {
        matches!(self.rule, Rule::Linear(_) | Rule::Weak(_))
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ground.binary_search_by(|g| g.as_str().cmp(id)).ok()
    }

    pub fn menu<S: AsRef<str>>(&self, ids: &[S]) -> Result<Mask> {
        ids.iter()
            .map(|id| {
                self.index_of(id.as_ref()).ok_or_else(|| {
                    Error::Input(format!(
                        "contract {} is outside the ground set",
                        id.as_ref()
                    ))
                })
            })
            .collect()
    }

    pub fn ids(&self, m: Mask) -> Vec<ContractId> {
        m.iter().map(|i| self.ground[i].clone()).collect()
    }

    /// `f(menu)` on local indices. Bits outside the ground set are ignored.
    pub fn choose(&self, menu: Mask) -> Mask {
        let menu = menu.intersection(self.full());
        match &self.rule {
            Rule::Linear(r) => r
                .iter()
                .find(|&&i| menu.contains(i))
                .map_or(Mask::EMPTY, |&i| Mask::singleton(i)),
            Rule::Weak(tiers) => tiers
                .iter()
                .map(|t| t.intersection(menu))
                .find(|m| !m.is_empty())
                .unwrap_or(Mask::EMPTY),
            Rule::Quota { ranking, quota } => ranking
                .iter()
                .copied()
                .filter(|&i| menu.contains(i))
                .take(*quota)
                .collect(),
            Rule::Union(parts) => parts.iter().fold(Mask::EMPTY, |acc, p| {
                match p.iter().find(|&&i| menu.contains(i)) {
                    Some(&i) => acc.with(i),
                    None => acc,
                }
            }),
            Rule::Table(t) => t[menu.0 as usize],
        }
    }

    /// `f(menu)` by contract ids.
    pub fn choose_ids<S: AsRef<str>>(&self, menu: &[S]) -> Result<Vec<ContractId>> {
        Ok(self.ids(self.choose(self.menu(menu)?)))
    }

    /// The linear parts of a union rule, each as its own function.
    pub fn linear_parts(&self) -> Option<Vec<ChoiceFunction>> {
        match &self.rule {
            Rule::Union(parts) => Some(
                parts
                    .iter()
                    .map(|r| ChoiceFunction::from_linear_indices(self.ground.clone(), r.clone()))
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Best-first ranking of local indices, for linear functions.
    pub fn ranking(&self) -> Option<&[usize]> {
        match &self.rule {
            Rule::Linear(r) => Some(r),
            _ => None,
        }
    }

    /// Best-first tiers, for linear (singleton tiers) and weak functions.
    pub fn tiers(&self) -> Option<Vec<Mask>> {
        match &self.rule {
            Rule::Linear(r) => Some(r.iter().map(|&i| Mask::singleton(i)).collect()),
            Rule::Weak(t) => Some(t.clone()),
            _ => None,
        }
    }

    /// Integer utilities for order-based functions: the worst tier gets 0,
    /// each better tier one more.
    pub fn utilities(&self) -> Option<Vec<i64>> {
        let tiers = self.tiers()?;
        let mut u = vec![0i64; self.ground.len()];
        let top = tiers.len() as i64 - 1;
        for (k, t) in tiers.iter().enumerate() {
            for i in t.iter() {
                u[i] = top - k as i64;
            }
        }
        Some(u)
    }

    /// Restriction to the sub-ground `keep` (local indices). Choices on menus
    /// inside `keep` are unchanged.
    pub fn restricted(&self, keep: Mask) -> ChoiceFunction {
        let kept: Vec<usize> = keep.intersection(self.full()).iter().collect();
        let mut remap = vec![usize::MAX; self.ground.len()];
        for (new, &old) in kept.iter().enumerate() {
            remap[old] = new;
        }
        let ground: Vec<ContractId> = kept.iter().map(|&i| self.ground[i].clone()).collect();
        let map_rank = |r: &[usize]| -> Vec<usize> {
            r.iter()
                .filter(|&&i| remap[i] != usize::MAX)
                .map(|&i| remap[i])
                .collect()
        };
        let map_mask = |m: Mask| -> Mask {
            m.iter()
                .filter(|&i| remap[i] != usize::MAX)
                .map(|i| remap[i])
                .collect()
        };
        let rule = match &self.rule {
            Rule::Linear(r) => Rule::Linear(map_rank(r)),
            Rule::Weak(t) => Rule::Weak(
                t.iter()
                    .map(|&m| map_mask(m))
                    .filter(|m| !m.is_empty())
                    .collect(),
            ),
            Rule::Quota { ranking, quota } => Rule::Quota {
                ranking: map_rank(ranking),
                quota: *quota,
            },
            Rule::Union(parts) => Rule::Union(parts.iter().map(|p| map_rank(p)).collect()),
            Rule::Table(_) => Rule::Table(
                Mask::full(kept.len())
                    .subsets()
                    .map(|m| {
                        let orig: Mask = m.iter().map(|i| kept[i]).collect();
                        map_mask(self.choose(orig))
                    })
                    .collect(),
            ),
        };
        ChoiceFunction { ground, rule }
    }

    /// The same choice function as an explicit table.
    pub fn to_table(&self) -> Result<ChoiceFunction> {
        check_cap("table ground set", self.ground.len(), TABLE_LIMIT)?;
        Ok(ChoiceFunction {
            ground: self.ground.clone(),
            rule: Rule::Table(self.full().subsets().map(|m| self.choose(m)).collect()),
        })
    }

    /// Agreement with `other` on every menu; ground sets must coincide.
    pub fn same_choices(&self, other: &ChoiceFunction) -> bool {
        self.ground == other.ground && self.full().subsets().all(|m| self.choose(m) == other.choose(m))
    }

    /// Serializable form. Tables always carry their ground set.
    pub fn to_spec(&self) -> ChoiceSpec {
        let ids = |r: &[usize]| -> Vec<ContractId> { r.iter().map(|&i| self.ground[i].clone()).collect() };
        match &self.rule {
            Rule::Linear(r) => ChoiceSpec::Linear { ranking: ids(r) },
            Rule::Weak(t) => ChoiceSpec::Weak {
                tiers: t.iter().map(|&m| self.ids(m)).collect(),
            },
            Rule::Quota { ranking, quota } => ChoiceSpec::Quota {
                ranking: ids(ranking),
                quota: *quota,
            },
            Rule::Union(parts) => ChoiceSpec::Union {
                parts: parts.iter().map(|p| ids(p)).collect(),
            },
            Rule::Table(t) => ChoiceSpec::Table {
                ground: Some(self.ground.clone()),
                entries: self
                    .full()
                    .subsets()
                    .skip(1)
                    .map(|m| (self.ids(m), self.ids(t[m.0 as usize])))
                    .collect(),
            },
        }
    }
}

#[cfg(test)]
pub(crate) fn ids(xs: &[&str]) -> Vec<ContractId> {
    xs.iter().map(|&s| ContractId::from(s)).collect()
}
