//! Path independence and the properties that characterize it.

use serde::Serialize;

use super::ChoiceFunction;
use crate::bits::Mask;
use crate::error::{check_cap, Error, Result};
use crate::ids::ContractId;

/// Menus `A`, `B` with `f(A ∪ B) ≠ f(f(A) ∪ B)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PathWitness {
    pub a: Vec<ContractId>,
    pub b: Vec<ContractId>,
}

/// `smaller ⊆ larger` and `element ∈ f(larger) ∩ smaller` but `element ∉ f(smaller)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HeredityWitness {
    pub smaller: Vec<ContractId>,
    pub larger: Vec<ContractId>,
    pub element: ContractId,
}

/// `f(menu) ⊆ reduced ⊆ menu` but `f(reduced) ≠ f(menu)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OutcastWitness {
    pub menu: Vec<ContractId>,
    pub reduced: Vec<ContractId>,
}

/// A set of contracts whose choice is empty.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NullSet {
    pub members: Vec<ContractId>,
}

/// Checks `f(A ∪ B) = f(f(A) ∪ B)` for all menus.
///
/// Only `B = ∅` and singleton `B` are scanned: if the identity holds for
/// those, induction on `|B|` gives it for every `B`, since
/// `f(A∪B∪x) = f(f(A∪B)∪x) = f(f(f(A)∪B)∪x) = f(f(A)∪B∪x)`.
/// Returns `None` when `f` is path independent.
pub fn is_path_independent(f: &ChoiceFunction, cap: usize) -> Result<Option<PathWitness>> {
    check_cap("choice ground set", f.len(), cap)?;
    let full = f.full();
    for a in full.subsets() {
        let fa = f.choose(a);
        if f.choose(fa) != fa {
            return Ok(Some(PathWitness {
                a: f.ids(a),
                b: vec![],
            }));
        }
        for x in full.iter() {
            let b = Mask::singleton(x);
            if f.choose(a.union(b)) != f.choose(fa.union(b)) {
                return Ok(Some(PathWitness {
                    a: f.ids(a),
                    b: f.ids(b),
                }));
            }
        }
    }
    Ok(None)
}

/// Heredity: `A ⊆ B ⇒ f(B) ∩ A ⊆ f(A)`. Checked on one-element removals,
/// which chain to arbitrary subsets.
pub fn check_heredity(f: &ChoiceFunction, cap: usize) -> Result<Option<HeredityWitness>> {
    check_cap("choice ground set", f.len(), cap)?;
    for b in f.full().subsets() {
        let fb = f.choose(b);
        for x in b.iter() {
            let a = b.without(x);
            let lost = fb.intersection(a).difference(f.choose(a));
            if let Some(e) = lost.first() {
                return Ok(Some(HeredityWitness {
                    smaller: f.ids(a),
                    larger: f.ids(b),
                    element: f.ground()[e].clone(),
                }));
            }
        }
    }
    Ok(None)
}

/// Outcast: `f(A) ⊆ B ⊆ A ⇒ f(B) = f(A)`. Checked on removals of one
/// rejected element at a time.
pub fn check_outcast(f: &ChoiceFunction, cap: usize) -> Result<Option<OutcastWitness>> {
    check_cap("choice ground set", f.len(), cap)?;
    for a in f.full().subsets() {
        let fa = f.choose(a);
        for x in a.difference(fa).iter() {
            let b = a.without(x);
            if f.choose(b) != fa {
                return Ok(Some(OutcastWitness {
                    menu: f.ids(a),
                    reduced: f.ids(b),
                }));
            }
        }
    }
    Ok(None)
}

pub(crate) fn require_plott(f: &ChoiceFunction, cap: usize) -> Result<()> {
    // Linear, weak, quota and union rules are path independent by construction.
    if f.kind() == "table" {
        if let Some(w) = is_path_independent(f, cap)? {
            return Err(Error::Precondition(format!(
                "choice function is not path independent (A={:?}, B={:?})",
                w.a, w.b
            )));
        }
    }
    Ok(())
}

/// Union of all null sets of a path-independent `f`.
///
/// For such `f` an element `z` lies in a null set iff `f({z}) = ∅`
/// (Outcast applied to `f(N) = ∅ ⊆ {z} ⊆ N`), so singletons suffice.
pub fn largest_null_set(f: &ChoiceFunction, cap: usize) -> Result<NullSet> {
    require_plott(f, cap)?;
    Ok(NullSet {
        members: f.ids(null_mask(f)),
    })
}

pub(crate) fn null_mask(f: &ChoiceFunction) -> Mask {
    f.full()
        .iter()
        .filter(|&z| f.choose(Mask::singleton(z)).is_empty())
        .collect()
}

/// `f(A) ≠ ∅` whenever `A ≠ ∅`. Exhaustive over menus.
pub fn is_non_empty_valued(f: &ChoiceFunction, cap: usize) -> Result<bool> {
    check_cap("choice ground set", f.len(), cap)?;
    Ok(f.full().subsets().skip(1).all(|m| !f.choose(m).is_empty()))
}

/// Blair's relation `A ⪯ B  ⇔  f(A ∪ B) ⊆ B`, on local menus.
pub fn blair_leq(f: &ChoiceFunction, a: Mask, b: Mask) -> bool {
    f.choose(a.union(b)).is_subset(b)
}

/// If `f` coincides on every menu with the max-rule of some weak order,
/// returns that weak-order function.
///
/// The candidate order is read off pairwise choices (`x ≽ y` iff
/// `x ∈ f({x, y})`) and then verified on all menus.
pub fn weak_representation(f: &ChoiceFunction, cap: usize) -> Result<Option<ChoiceFunction>> {
    if f.is_weak() {
        return Ok(Some(f.clone()));
    }
    check_cap("choice ground set", f.len(), cap)?;
    let n = f.len();
    if (0..n).any(|x| f.choose(Mask::singleton(x)) != Mask::singleton(x)) {
        return Ok(None);
    }
    let mut beats = vec![0usize; n];
    for x in 0..n {
        for y in 0..n {
            if x != y && f.choose(Mask::singleton(x).with(y)).contains(x) {
                beats[x] += 1;
            }
        }
    }
    let mut levels: Vec<usize> = beats.clone();
    levels.sort_unstable_by(|a, b| b.cmp(a));
    levels.dedup();
    let tiers: Vec<Mask> = levels
        .iter()
        .map(|&lvl| (0..n).filter(|&x| beats[x] == lvl).collect())
        .collect();
    let candidate = ChoiceFunction::from_weak_tiers(f.ground().to_vec(), tiers);
    if f.full().subsets().all(|m| f.choose(m) == candidate.choose(m)) {
        Ok(Some(candidate))
    } else {
        Ok(None)
    }
}
