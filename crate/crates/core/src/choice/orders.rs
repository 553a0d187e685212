//! Linear orders respecting a choice function, and the decomposition of a
//! non-empty-valued path-independent function into a union of linear ones.

use super::plott::is_path_independent;
use super::ChoiceFunction;
use crate::bits::Mask;
use crate::error::{Error, Result};

/// Whether the best-first `ranking` respects `f`: the top element of every
/// nonempty menu lies in `f(menu)`.
pub fn is_respecting(f: &ChoiceFunction, ranking: &[usize]) -> bool {
    f.full().subsets().skip(1).all(|m| {
        let top = ranking.iter().copied().find(|&i| m.contains(i));
        top.is_some_and(|t| f.choose(m).contains(t))
    })
}

/// Builds a linear order respecting `f`, top-down.
///
/// Each step places an element of `f(remaining)`, least index first. With a
/// pin `(A, a)`, elements outside `A` are placed first until
/// `f(remaining) ⊆ A`; at that point `f(remaining) = f(A) ∋ a` and `a` goes
/// next, so `a` becomes the top of `A`.
///
/// When `f` fits within `cap` the result is verified on every menu.
pub fn respecting_order(
    f: &ChoiceFunction,
    pin: Option<(Mask, usize)>,
    cap: usize,
) -> Result<ChoiceFunction> {
    let ranking = respecting_ranking(f, pin, f.len() <= cap)?;
    Ok(ChoiceFunction::from_linear_indices(f.ground().to_vec(), ranking))
}

pub(crate) fn respecting_ranking(
    f: &ChoiceFunction,
    pin: Option<(Mask, usize)>,
    verify: bool,
) -> Result<Vec<usize>> {
    if let Some((menu, a)) = pin {
        if !f.choose(menu).contains(a) {
            return Err(Error::Input(format!(
                "pinned element {} is not chosen from {:?}",
                f.ground().get(a).map_or("?", |c| c.as_str()),
                f.ids(menu)
            )));
        }
    }
    let mut remaining = f.full();
    let mut ranking = Vec::with_capacity(f.len());
    let mut pending = pin;
    while !remaining.is_empty() {
        let chosen = f.choose(remaining);
        if chosen.is_empty() {
            return Err(Error::Precondition(format!(
                "choice function is empty on {:?}",
                f.ids(remaining)
            )));
        }
        let next = match pending {
            Some((menu, a)) => {
                let outside = chosen.difference(menu);
                match outside.first() {
                    Some(x) => x,
                    None => {
                        if !chosen.contains(a) {
                            return Err(Error::Precondition(
                                "choice function is not path independent (outcast fails)".into(),
                            ));
                        }
                        pending = None;
                        a
                    }
                }
            }
            None => chosen.first().expect("nonempty"),
        };
        ranking.push(next);
        remaining = remaining.without(next);
    }
    if verify && !is_respecting(f, &ranking) {
        return Err(Error::Precondition(
            "greedy order does not respect the choice function (heredity fails)".into(),
        ));
    }
    Ok(ranking)
}

/// Linear orders whose union reproduces `f` on every menu.
///
/// Starts from the unpinned respecting order and adds a pinned one for each
/// `(A, a)` with `a ∈ f(A)` not yet the top of `A` under some produced order.
/// Orders that turn out redundant are dropped again, latest first.
pub fn am_decompose(f: &ChoiceFunction, cap: usize) -> Result<Vec<ChoiceFunction>> {
    if let Some(w) = is_path_independent(f, cap)? {
        return Err(Error::Precondition(format!(
            "choice function is not path independent (A={:?}, B={:?})",
            w.a, w.b
        )));
    }
    if f.is_linear() {
        return Ok(vec![f.clone()]);
    }
    let mut orders = vec![respecting_ranking(f, None, true)?];
    for menu in f.full().subsets().skip(1) {
        let chosen = f.choose(menu);
        if chosen.is_empty() {
            return Err(Error::Precondition(format!(
                "choice function is empty on {:?}",
                f.ids(menu)
            )));
        }
        let mut covered = top_of_each(&orders, menu);
        for a in chosen.difference(covered).iter() {
            if covered.contains(a) {
                continue;
            }
            let r = respecting_ranking(f, Some((menu, a)), true)?;
            covered = covered.union(top_of_each(std::slice::from_ref(&r), menu));
            orders.push(r);
        }
    }
    let mut out: Vec<ChoiceFunction> = orders
        .into_iter()
        .map(|r| ChoiceFunction::from_linear_indices(f.ground().to_vec(), r))
        .collect();
    if !reproduces(f, &out) {
        return Err(Error::Internal(
            "linear decomposition does not reproduce the choice function".into(),
        ));
    }
    for k in (0..out.len()).rev() {
        if out.len() > 1 {
            let mut fewer = out.clone();
            fewer.remove(k);
            if reproduces(f, &fewer) {
                out = fewer;
            }
        }
    }
    Ok(out)
}

fn reproduces(f: &ChoiceFunction, parts: &[ChoiceFunction]) -> bool {
    f.full().subsets().all(|m| {
        parts.iter().fold(Mask::EMPTY, |acc, l| acc.union(l.choose(m))) == f.choose(m)
    })
}

fn top_of_each(orders: &[Vec<usize>], menu: Mask) -> Mask {
    orders
        .iter()
        .filter_map(|r| r.iter().copied().find(|&i| menu.contains(i)))
        .collect()
}
