//! Constructive translations from modal formulas to networks.
//!
//! Every compiler lays the (de-sugared) formula's subformulas out as
//! channels in dependency order and emits homogeneous layers whose weight
//! columns implement one connective each: channel k becomes correct once its
//! children's channels are, so after as many layers as there are channels
//! every vertex carries the truth values of all subformulas and a threshold
//! on the root channel classifies.
//!
//! The four table-driven compilers share that skeleton and differ only in
//! the diamond column and aggregation:
//!
//! * [`compile_rml_bounded`]: ratio diamonds over mean aggregation with
//!   truncated ReLU, exact on graphs of at most `n` vertices (weights `n²`
//!   amplify the smallest possible fraction gap past the bias).
//! * [`compile_ml_max`]: plain diamonds over max aggregation, exact on all
//!   graphs.
//! * [`compile_gml_sum`]: counting diamonds over sum aggregation, exact on
//!   all graphs.
//! * [`compile_rml_step`]: strict ratio diamonds over mean aggregation with
//!   the step activation, exact on all graphs.
//!
//! The remaining translations live in submodules: [`afml`] (truncated-ReLU
//! networks for the alternation-free fragments), [`sigmoid`] (the same
//! fragments over `f64` logistic networks), [`irrational`] (mean networks
//! whose truth values are irrational numbers, decided by an irrationality
//! test), and [`relu`] (the truncated-ReLU to ReLU rewriting).

pub mod afml;
pub mod irrational;
pub mod relu;
pub mod sigmoid;

pub use afml::{compile_afml_trrelu, compile_afml_trrelu_with_channels};
pub use irrational::{compile_ml_irrational, compile_ml_irrational_with_channels};
pub use relu::trrelu_to_relu;
pub use sigmoid::{compile_afml_sigmoid, compile_afml_sigmoid_with_channels, ActivationGadget};

use crate::gnn::{
    Activation, Aggregation, Classifier, Gnn, GnnError, Layer, ThresholdRel,
};
use crate::logic::{subformula_order, CountRel, Formula, LogicError, RatioRel};
use crate::scalar::rat;
use num::rational::BigRational;
use num::{BigInt, One, Zero};
use std::collections::HashMap;

/// Errors from formula compilation.
#[derive(Debug, thiserror::Error)]
pub enum CompileError {
    #[error("formula is outside {fragment}: {formula}")]
    NotInFragment {
        fragment: &'static str,
        formula: String,
    },
    #[error("layer {layer} must be a simple truncated-ReLU layer to be rewritten")]
    NotTrRelu { layer: usize },
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Gnn(#[from] GnnError),
}

fn require(fragment: &'static str, ok: bool, f: &Formula) -> Result<(), CompileError> {
    if ok {
        Ok(())
    } else {
        Err(CompileError::NotInFragment {
            fragment,
            formula: f.to_string(),
        })
    }
}

/// Channel layout shared by the table-driven compilers: subformulas in
/// dependency order, with an index for child lookup.
struct Table {
    order: Vec<Formula>,
    index: HashMap<Formula, usize>,
    root: usize,
    c: Vec<Vec<BigRational>>,
    a: Vec<Vec<BigRational>>,
    b: Vec<BigRational>,
}

impl Table {
    fn new(f: &Formula, alphabet: &[String]) -> Result<Self, CompileError> {
        let (order, root) = subformula_order(f, alphabet)?;
        let l = order.len();
        let index = order
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, g)| (g, i))
            .collect();
        Ok(Table {
            order,
            index,
            root,
            c: vec![vec![BigRational::zero(); l]; l],
            a: vec![vec![BigRational::zero(); l]; l],
            b: vec![BigRational::zero(); l],
        })
    }

    fn len(&self) -> usize {
        self.order.len()
    }

    fn idx(&self, f: &Formula) -> usize {
        *self.index.get(f).expect("child precedes parent in the order")
    }

    /// Fills the column of channel `k` for the connectives every table
    /// compiler treats identically; returns false on diamonds, which the
    /// caller owns.
    fn fill_common(&mut self, k: usize) -> bool {
        match self.order[k].clone() {
            Formula::Top => {
                self.b[k] = BigRational::one();
                true
            }
            Formula::Bottom => true,
            Formula::Atom(_) => {
                self.c[k][k] = BigRational::one();
                true
            }
            Formula::Not(i) => {
                let i = self.idx(&i);
                self.c[i][k] = -BigRational::one();
                self.b[k] = BigRational::one();
                true
            }
            Formula::Or(l, r) => {
                let (l, r) = (self.idx(&l), self.idx(&r));
                self.c[l][k] += BigRational::one();
                self.c[r][k] += BigRational::one();
                true
            }
            _ => false,
        }
    }

    /// One layer per channel, all layers identical, with a strict-positive
    /// threshold on the root channel.
    fn into_gnn(self, agg: Aggregation, activation: Activation) -> Gnn<BigRational> {
        let l = self.len();
        let layer = Layer::simple(agg, self.c, self.a, self.b, activation);
        Gnn {
            input_dim: l,
            layers: vec![layer; l],
            cls: Classifier::Threshold {
                index: self.root + 1,
                rel: ThresholdRel::Gt,
                c: BigRational::zero(),
            },
        }
    }
}

/// Largest fraction ℓ/m with 0 ≤ ℓ ≤ m ≤ n that is ≤ t (for the bias) —
/// the non-strict counterpart of the threshold shift in `eliminate_geq`.
fn largest_fraction_at_most(t: &BigRational, n: usize) -> BigRational {
    let mut best = BigRational::zero();
    for m in 1..=n {
        for l in 0..=m {
            let frac = rat(l as i64, m as i64);
            if &frac <= t && frac > best {
                best = frac;
            }
        }
    }
    best
}

/// Compiles a ratio-threshold formula into a mean network with truncated
/// ReLU that agrees with it on every pointed graph of at most `n` vertices.
///
/// `≥`-diamonds are first rewritten to the equivalent strict thresholds for
/// that size bound. A strict diamond's column amplifies the aggregated
/// fraction by n² — any two distinct fractions with denominators ≤ n differ
/// by at least 1/n², so the truncation yields exactly 0 or reaches 1.
pub fn compile_rml_bounded(
    f: &Formula,
    alphabet: &[String],
    n: usize,
) -> Result<Gnn<BigRational>, CompileError> {
    Ok(compile_rml_bounded_with_channels(f, alphabet, n)?.0)
}

/// As [`compile_rml_bounded`], also returning the channel-to-subformula map
/// of the rewritten formula (used by trace audits).
pub fn compile_rml_bounded_with_channels(
    f: &Formula,
    alphabet: &[String],
    n: usize,
) -> Result<(Gnn<BigRational>, Vec<Formula>), CompileError> {
    require("the ratio-threshold fragment", f.analyze().in_rml, f)?;
    let prepared = crate::logic::eliminate_geq(f, n)?.desugar_and();
    let nn = rat((n * n) as i64, 1);
    let mut t = Table::new(&prepared, alphabet)?;
    for k in 0..t.len() {
        if t.fill_common(k) {
            continue;
        }
        match t.order[k].clone() {
            Formula::RDia {
                rel: RatioRel::Gt,
                ratio,
                inner,
            } => {
                let i = t.idx(&inner);
                t.a[i][k] = nn.clone();
                t.b[k] = -&nn * largest_fraction_at_most(&ratio, n);
            }
            other => unreachable!("prepared ratio formula contains {other}"),
        }
    }
    let channels = t.order.clone();
    Ok((t.into_gnn(Aggregation::Mean, Activation::TrRelu), channels))
}

/// Compiles a basic modal formula into a max network with truncated ReLU
/// that agrees with it on every graph.
pub fn compile_ml_max(f: &Formula, alphabet: &[String]) -> Result<Gnn<BigRational>, CompileError> {
    Ok(compile_ml_max_with_channels(f, alphabet)?.0)
}

pub fn compile_ml_max_with_channels(
    f: &Formula,
    alphabet: &[String],
) -> Result<(Gnn<BigRational>, Vec<Formula>), CompileError> {
    require("basic modal logic", f.analyze().in_ml, f)?;
    let prepared = f.desugar_box().desugar_and();
    let mut t = Table::new(&prepared, alphabet)?;
    for k in 0..t.len() {
        if t.fill_common(k) {
            continue;
        }
        match t.order[k].clone() {
            Formula::Dia(inner) => {
                let i = t.idx(&inner);
                t.a[i][k] = BigRational::one();
            }
            other => unreachable!("prepared modal formula contains {other}"),
        }
    }
    let channels = t.order.clone();
    Ok((t.into_gnn(Aggregation::Max, Activation::TrRelu), channels))
}

/// Compiles a graded modal formula into a sum network with truncated ReLU
/// that agrees with it on every graph: a `⋄^{≥N}` column thresholds the
/// successor count at N via trReLU(count − (N−1)).
pub fn compile_gml_sum(f: &Formula, alphabet: &[String]) -> Result<Gnn<BigRational>, CompileError> {
    Ok(compile_gml_sum_with_channels(f, alphabet)?.0)
}

pub fn compile_gml_sum_with_channels(
    f: &Formula,
    alphabet: &[String],
) -> Result<(Gnn<BigRational>, Vec<Formula>), CompileError> {
    require("graded modal logic", f.analyze().in_gml, f)?;
    let prepared = f.desugar_eq().desugar_box().desugar_and();
    let mut t = Table::new(&prepared, alphabet)?;
    for k in 0..t.len() {
        if t.fill_common(k) {
            continue;
        }
        match t.order[k].clone() {
            Formula::Dia(inner) => {
                let i = t.idx(&inner);
                t.a[i][k] = BigRational::one();
            }
            Formula::GDia {
                rel: CountRel::Geq,
                count,
                inner,
            } => {
                let i = t.idx(&inner);
                t.a[i][k] = BigRational::one();
                t.b[k] = BigRational::one() - BigRational::from_integer(BigInt::from(count));
            }
            other => unreachable!("prepared graded formula contains {other}"),
        }
    }
    let channels = t.order.clone();
    Ok((t.into_gnn(Aggregation::Sum, Activation::TrRelu), channels))
}

/// Compiles a ratio-threshold formula into a mean network with the step
/// activation that agrees with it on every graph (no size bound): strict
/// thresholds become step(mean − t), and `≥`-diamonds are first rewritten
/// through ⋄̇^{≥t}ψ ≡ ¬⋄̇^{>1−t}¬ψ.
pub fn compile_rml_step(f: &Formula, alphabet: &[String]) -> Result<Gnn<BigRational>, CompileError> {
    Ok(compile_rml_step_with_channels(f, alphabet)?.0)
}

pub fn compile_rml_step_with_channels(
    f: &Formula,
    alphabet: &[String],
) -> Result<(Gnn<BigRational>, Vec<Formula>), CompileError> {
    require("the ratio-threshold fragment", f.analyze().in_rml, f)?;
    let prepared = rewrite_geq_strict(&f.desugar_eq()).desugar_and();
    let mut t = Table::new(&prepared, alphabet)?;
    for k in 0..t.len() {
        if t.fill_common(k) {
            continue;
        }
        match t.order[k].clone() {
            Formula::RDia {
                rel: RatioRel::Gt,
                ratio,
                inner,
            } => {
                let i = t.idx(&inner);
                t.a[i][k] = BigRational::one();
                t.b[k] = -ratio;
            }
            other => unreachable!("prepared ratio formula contains {other}"),
        }
    }
    let channels = t.order.clone();
    Ok((t.into_gnn(Aggregation::Mean, Activation::Step), channels))
}

/// ⋄̇^{≥t}ψ ≡ ¬⋄̇^{>1−t}¬ψ, applied bottom-up. On leaves both sides hold
/// vacuously (a leaf satisfies every `≥` diamond and no strict one).
pub fn rewrite_geq_strict(f: &Formula) -> Formula {
    f.map_children(&|g| match g {
        Formula::RDia {
            rel: RatioRel::Geq,
            ratio,
            inner,
        } => Some(Formula::not(Formula::RDia {
            rel: RatioRel::Gt,
            ratio: BigRational::one() - ratio,
            inner: std::sync::Arc::new(Formula::not((**inner).clone())),
        })),
        _ => None,
    })
}
