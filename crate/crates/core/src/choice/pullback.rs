use std::collections::BTreeMap;

use super::ChoiceFunction;
use crate::bits::Mask;
use crate::error::{Error, Result};
use crate::ids::ContractId;

/// Pulls `g` back along `projection: X → Y`:
/// `f(A) = A ∩ π⁻¹(g(π(A)))`.
///
/// When `g` is linear or weak the result is the weak order with tiers
/// `π⁻¹(tier)` (linear again if every such preimage is a single element);
/// otherwise it is tabulated.
pub fn pullback(
    ground: &[ContractId],
    projection: &BTreeMap<ContractId, ContractId>,
    g: &ChoiceFunction,
) -> Result<ChoiceFunction> {
    let mut ground: Vec<ContractId> = ground.to_vec();
    ground.sort();
    ground.dedup();
    let image: Vec<usize> = ground
        .iter()
        .map(|x| {
            let y = projection
                .get(x)
                .ok_or_else(|| Error::Input(format!("projection is undefined on {x}")))?;
            g.index_of(y.as_str())
                .ok_or_else(|| Error::Input(format!("projection sends {x} to {y}, outside the target")))
        })
        .collect::<Result<_>>()?;
    let preimage = |ym: Mask| -> Mask {
        image
            .iter()
            .enumerate()
            .filter(|(_, &y)| ym.contains(y))
            .map(|(x, _)| x)
            .collect()
    };

    if let Some(tiers) = g.tiers() {
        let tiers: Vec<Mask> = tiers
            .into_iter()
            .map(preimage)
            .filter(|t| !t.is_empty())
            .collect();
        if tiers.iter().all(|t| t.len() == 1) {
            let ranking = tiers.iter().map(|t| t.first().unwrap()).collect();
            return Ok(ChoiceFunction::from_linear_indices(ground, ranking));
        }
        return Ok(ChoiceFunction::from_weak_tiers(ground, tiers));
    }

    let image_of = |m: Mask| -> Mask { m.iter().map(|x| image[x]).collect() };
    ChoiceFunction::tabulate(ground, |a| a.intersection(preimage(g.choose(image_of(a)))))
}

/// Pointwise union `(f₁ ∪ … ∪ f_k)(A) = f₁(A) ∪ … ∪ f_k(A)`, tabulated.
/// All parts must share one ground set.
pub fn union_of(parts: &[ChoiceFunction]) -> Result<ChoiceFunction> {
    let first = parts
        .first()
        .ok_or_else(|| Error::Input("union of zero choice functions".into()))?;
    if parts.iter().any(|p| p.ground() != first.ground()) {
        return Err(Error::Input("union parts have different ground sets".into()));
    }
    if parts.iter().all(|p| p.is_linear()) {
        let rankings = parts.iter().map(|p| p.ids_ranked()).collect();
        return ChoiceFunction::union_of_linear(rankings);
    }
    ChoiceFunction::tabulate(first.ground().to_vec(), |m| {
        parts.iter().fold(Mask::EMPTY, |acc, p| acc.union(p.choose(m)))
    })
}

impl ChoiceFunction {
    fn ids_ranked(&self) -> Vec<ContractId> {
        self.ranking()
            .unwrap_or_default()
            .iter()
            .map(|&i| self.ground()[i].clone())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choice::{ids, is_path_independent, ChoiceSpec, DEFAULT_CAP};

    fn proj(pairs: &[(&str, &str)]) -> BTreeMap<ContractId, ContractId> {
        pairs.iter().map(|&(x, y)| (x.into(), y.into())).collect()
    }

    #[test]
    fn identity_projection_keeps_g() {
        let g = ChoiceFunction::linear(ids(&["b", "a", "c"])).unwrap();
        let f = pullback(&ids(&["a", "b", "c"]), &proj(&[("a", "a"), ("b", "b"), ("c", "c")]), &g)
            .unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn two_copies_become_a_tie() {
        let g = ChoiceFunction::linear(ids(&["c"])).unwrap();
        let f = pullback(&ids(&["c1", "c2"]), &proj(&[("c1", "c"), ("c2", "c")]), &g).unwrap();
        assert_eq!(f.to_spec(), ChoiceSpec::Weak { tiers: vec![ids(&["c1", "c2"])] });
    }

    #[test]
    fn two_to_one_over_linear() {
        let g = ChoiceFunction::linear(ids(&["p", "q"])).unwrap();
        let f = pullback(
            &ids(&["p1", "p2", "q1", "q2"]),
            &proj(&[("p1", "p"), ("p2", "p"), ("q1", "q"), ("q2", "q")]),
            &g,
        )
        .unwrap();
        assert_eq!(
            f.to_spec(),
            ChoiceSpec::Weak { tiers: vec![ids(&["p1", "p2"]), ids(&["q1", "q2"])] }
        );
        assert_eq!(is_path_independent(&f, DEFAULT_CAP).unwrap(), None);
        // formula check on every menu
        let table = ChoiceFunction::tabulate(f.ground().to_vec(), |a| {
            let pa: Vec<ContractId> = f.ids(a).iter().map(|x| ContractId::from(&x.as_str()[..1])).collect();
            let chosen = g.choose(g.menu(&pa).unwrap());
            a.iter()
                .filter(|&x| chosen.contains(g.index_of(&f.ground()[x].as_str()[..1]).unwrap()))
                .collect()
        })
        .unwrap();
        assert!(table.same_choices(&f));
    }

    #[test]
    fn non_total_projection_is_rejected() {
        let g = ChoiceFunction::linear(ids(&["c"])).unwrap();
        assert!(matches!(
            pullback(&ids(&["c1", "c2"]), &proj(&[("c1", "c")]), &g),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn quota_pullback_is_plott() {
        let g = ChoiceFunction::quota(ids(&["x", "y", "z"]), 2).unwrap();
        let f = pullback(
            &ids(&["x1", "x2", "y1", "z1"]),
            &proj(&[("x1", "x"), ("x2", "x"), ("y1", "y"), ("z1", "z")]),
            &g,
        )
        .unwrap();
        assert_eq!(f.kind(), "table");
        assert_eq!(is_path_independent(&f, DEFAULT_CAP).unwrap(), None);
    }
}
