//! Model checking formulas over labeled digraphs.
//!
//! Semantics is the standard Kripke one, extended with counting diamonds:
//! ⋄^{≥n}φ holds where at least n successors satisfy φ, and ⋄̇^{≥r}/⋄̇^{>r}
//! compare the exact fraction of satisfying successors against r. At a
//! vertex without successors the fraction is undefined; by convention the
//! `≥` (and `=`) ratio diamonds hold there and the `>` ones do not.
//!
//! Evaluation is one bottom-up pass per distinct subterm: results are
//! memoized per AST node as whole-graph boolean vectors, so heavily shared
//! ASTs (as produced by extraction) cost their DAG size, not their tree size.

use super::{CountRel, Formula, LogicError, RatioRel};
use crate::graph::Graph;
use num::bigint::BigInt;
use num::rational::BigRational;
use std::collections::HashMap;
use std::sync::Arc;

/// Evaluates `f` at every vertex of `g`.
pub fn check_all(g: &Graph, f: &Formula) -> Result<Vec<bool>, LogicError> {
    let mut memo: HashMap<*const Formula, Arc<Vec<bool>>> = HashMap::new();
    let r = eval(g, f, &mut memo)?;
    Ok((*r).clone())
}

/// Evaluates `f` at a single vertex.
pub fn check(g: &Graph, v: usize, f: &Formula) -> Result<bool, LogicError> {
    Ok(check_all(g, f)?[v])
}

/// Evaluates `f` at the distinguished point.
pub fn check_at_point(g: &Graph, f: &Formula) -> Result<bool, LogicError> {
    let p = g
        .require_point()
        .map_err(|_| LogicError::NotInFragment("pointed graph required"))?;
    check(g, p, f)
}

fn eval(
    g: &Graph,
    f: &Formula,
    memo: &mut HashMap<*const Formula, Arc<Vec<bool>>>,
) -> Result<Arc<Vec<bool>>, LogicError> {
    // Nodes are keyed by address rather than by structure: every node stays
    // alive for the duration of the pass (the root is borrowed and children
    // sit behind Arcs), and address lookups stay O(1) even when a shared
    // subterm is itself enormous.
    if let Some(hit) = memo.get(&(f as *const Formula)) {
        return Ok(hit.clone());
    }
    let n = g.vertex_count();
    let res: Vec<bool> = match f {
        Formula::Top => vec![true; n],
        Formula::Bottom => vec![false; n],
        Formula::Atom(p) => {
            let li = g
                .label_index(p)
                .ok_or_else(|| LogicError::UnknownLabel(p.clone()))?;
            (0..n).map(|v| g.has_label(v, li)).collect()
        }
        Formula::Not(i) => eval(g, i, memo)?.iter().map(|b| !b).collect(),
        Formula::Or(l, r) => {
            let a = eval(g, l, memo)?;
            let b = eval(g, r, memo)?;
            a.iter().zip(b.iter()).map(|(x, y)| *x || *y).collect()
        }
        Formula::And(l, r) => {
            let a = eval(g, l, memo)?;
            let b = eval(g, r, memo)?;
            a.iter().zip(b.iter()).map(|(x, y)| *x && *y).collect()
        }
        Formula::Dia(i) => {
            let a = eval(g, i, memo)?;
            (0..n)
                .map(|v| g.successors(v).iter().any(|&u| a[u]))
                .collect()
        }
        Formula::Box(i) => {
            let a = eval(g, i, memo)?;
            (0..n)
                .map(|v| g.successors(v).iter().all(|&u| a[u]))
                .collect()
        }
        Formula::GDia { rel, count, inner } => {
            let a = eval(g, inner, memo)?;
            (0..n)
                .map(|v| {
                    let c = g.successors(v).iter().filter(|&&u| a[u]).count() as u64;
                    match rel {
                        CountRel::Geq => c >= *count,
                        CountRel::Eq => c == *count,
                    }
                })
                .collect()
        }
        Formula::RDia { rel, ratio, inner } => {
            let a = eval(g, inner, memo)?;
            (0..n)
                .map(|v| {
                    let succ = g.successors(v);
                    if succ.is_empty() {
                        // Leaf convention: ≥ holds, > fails; = expands to
                        // ≥ ∧ ¬>, which also holds.
                        return match rel {
                            RatioRel::Geq | RatioRel::Eq => true,
                            RatioRel::Gt => false,
                        };
                    }
                    let c = succ.iter().filter(|&&u| a[u]).count();
                    let frac =
                        BigRational::new(BigInt::from(c), BigInt::from(succ.len()));
                    match rel {
                        RatioRel::Geq => frac >= *ratio,
                        RatioRel::Gt => frac > *ratio,
                        RatioRel::Eq => frac == *ratio,
                    }
                })
                .collect()
        }
    };
    let arc = Arc::new(res);
    memo.insert(f as *const Formula, arc.clone());
    Ok(arc)
}
