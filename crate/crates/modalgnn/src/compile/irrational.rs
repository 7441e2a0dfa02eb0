//! Mean networks over ℚ + ℚ√2 that encode truth as irrationality.
//!
//! Every plain modal formula compiles to a network whose channel values
//! live in [0, √2] with nonnegative √2-coefficient: truth is represented by
//! an irrational value, falsity by a rational one, and the classifier
//! accepts iff the root channel is irrational. Atoms map their 0/1 label
//! indicator to 0 or √2 in the first layer; later layers keep atoms fixed,
//! average the two operands of a disjunction, take the neighborhood mean
//! under a diamond, and route negation through a [`NegationOracle`] that
//! realizes an order-reversing involution of [0, √2] exchanging rationals
//! and irrationals. Since √2-coefficients stay nonnegative, an average or
//! mean is irrational exactly if one of its inputs is, so the encoding is
//! preserved by every connective.
//!
//! Channel k settles on its final value from layer k + 1 onwards, so L + 1
//! layers suffice for the root.
//!
//! [`NegationOracle`]: crate::oracle::NegationOracle

use super::{require, CompileError};
use crate::gnn::{
    Aggregation, BuiltinComb, ChannelRecipe, Classifier, Comb, Gnn, Layer,
};
use crate::logic::{subformula_order, Formula};
use crate::scalar::QuadExt;
use num::rational::BigRational;
use num::{One, Zero};
use std::collections::HashMap;

fn sqrt2() -> QuadExt {
    QuadExt {
        p: BigRational::zero(),
        q: BigRational::one(),
    }
}

fn zero() -> QuadExt {
    QuadExt {
        p: BigRational::zero(),
        q: BigRational::zero(),
    }
}

/// Compiles a plain modal formula to a mean network over ℚ + ℚ√2 whose
/// classifier accepts iff the root channel is irrational; see the module
/// docs for the encoding.
pub fn compile_ml_irrational(
    f: &Formula,
    alphabet: &[String],
) -> Result<Gnn<QuadExt>, CompileError> {
    Ok(compile_ml_irrational_with_channels(f, alphabet)?.0)
}

/// As [`compile_ml_irrational`], also returning the subformula carried by
/// each channel.
pub fn compile_ml_irrational_with_channels(
    f: &Formula,
    alphabet: &[String],
) -> Result<(Gnn<QuadExt>, Vec<Formula>), CompileError> {
    require("plain modal logic", f.analyze().in_ml, f)?;
    let f = f.desugar_box().desugar_and();
    let (order, root) = subformula_order(&f, alphabet)?;
    let l = order.len();
    let index: HashMap<Formula, usize> = order
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, g)| (g, i))
        .collect();
    let idx = |g: &Formula| *index.get(g).expect("child precedes parent");

    // First layer: scale label indicators to {0, √2}, pin the constants,
    // and zero everything else.
    let first: Vec<ChannelRecipe<QuadExt>> = order
        .iter()
        .enumerate()
        .map(|(k, sub)| match sub {
            Formula::Atom(_) => ChannelRecipe::AffineOwn {
                src: k,
                scale: sqrt2(),
                offset: zero(),
            },
            Formula::Top => ChannelRecipe::Const(sqrt2()),
            _ => ChannelRecipe::Const(zero()),
        })
        .collect();

    // Later layers: keep literals, average disjunctions, mean diamonds,
    // route negations through the oracle.
    let rest: Vec<ChannelRecipe<QuadExt>> = order
        .iter()
        .enumerate()
        .map(|(k, sub)| match sub {
            Formula::Atom(_) => ChannelRecipe::ProjOwn { src: k },
            Formula::Top => ChannelRecipe::Const(sqrt2()),
            Formula::Bottom => ChannelRecipe::Const(zero()),
            Formula::Not(i) => ChannelRecipe::OracleOwn { src: idx(i) },
            Formula::Or(lhs, rhs) => ChannelRecipe::AvgOwn {
                i: idx(lhs),
                j: idx(rhs),
            },
            Formula::Dia(i) => ChannelRecipe::ProjAgg { src: idx(i) },
            other => unreachable!("desugared modal formula contains {other}"),
        })
        .collect();

    let layer = |recipes: Vec<ChannelRecipe<QuadExt>>| Layer {
        agg: Aggregation::Mean,
        comb: Comb::Builtin(BuiltinComb::Channelwise {
            in_dim: l,
            recipes,
        }),
    };
    let mut layers = Vec::with_capacity(l + 1);
    layers.push(layer(first));
    layers.resize(l + 1, layer(rest));
    let gnn = Gnn {
        input_dim: l,
        layers,
        cls: Classifier::IrrationalityTest { index: root + 1 },
    };
    Ok((gnn, order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::logic::{check, parse};
    use crate::oracle::NegationOracle;
    use crate::scalar::rat;

    fn alpha1() -> Vec<String> {
        vec!["P".to_string()]
    }

    fn single(labeled: bool) -> Graph {
        let mut g = Graph::new(["P"]).unwrap();
        g.add_vertex("v").unwrap();
        if labeled {
            g.add_label(0, "P").unwrap();
        }
        g.set_point(Some(0));
        g
    }

    /// Point with one P-labeled and one unlabeled successor.
    fn mixed_star() -> Graph {
        let mut g = Graph::new(["P"]).unwrap();
        g.add_vertex("v").unwrap();
        for (name, labeled) in [("a", true), ("b", false)] {
            let vi = g.add_vertex(name).unwrap();
            g.add_edge(0, vi).unwrap();
            if labeled {
                g.add_label(vi, "P").unwrap();
            }
        }
        g.set_point(Some(0));
        g
    }

    #[test]
    fn atoms_map_to_sqrt2_or_zero() {
        let f = parse::parse("P").unwrap();
        let net = compile_ml_irrational(&f, &alpha1()).unwrap();
        assert!(!net.uses_oracle());
        let out = net.evaluate(&single(true), None).unwrap().outputs()[0].clone();
        assert_eq!(out[0], sqrt2());
        assert!(net.accepts_pointed(&single(true), None).unwrap());
        assert!(!net.accepts_pointed(&single(false), None).unwrap());
    }

    #[test]
    fn negation_uses_the_seeded_involution() {
        let f = parse::parse("!P").unwrap();
        let net = compile_ml_irrational(&f, &alpha1()).unwrap();
        assert!(net.uses_oracle());
        assert!(matches!(
            net.evaluate(&single(true), None),
            Err(crate::gnn::GnnError::OracleRequired)
        ));
        let mut oracle = NegationOracle::new();
        assert!(!net
            .accepts_pointed(&single(true), Some(&mut oracle))
            .unwrap());
        assert!(net
            .accepts_pointed(&single(false), Some(&mut oracle))
            .unwrap());
        oracle.check_invariants().unwrap();
    }

    #[test]
    fn diamond_takes_the_neighborhood_mean() {
        let f = parse::parse("<>P").unwrap();
        let net = compile_ml_irrational(&f, &alpha1()).unwrap();
        let root = net.cls.index() - 1;
        let out = net.evaluate(&mixed_star(), None).unwrap().outputs()[0].clone();
        // Mean of √2 and 0: still irrational, coefficient 1/2.
        assert_eq!(
            out[root],
            QuadExt {
                p: rat(0, 1),
                q: rat(1, 2)
            }
        );
        assert!(!net.accepts_pointed(&single(false), None).unwrap());
    }

    #[test]
    fn fresh_oracle_queries_follow_the_enumeration() {
        // ¬⋄P at the star point queries f(√2/2). The neighbors among the
        // seeded pairs are 0 and √2, so the answer is the first unpaired
        // rational in (0, √2) by ascending height: the integer 1.
        let f = parse::parse("!<>P").unwrap();
        let net = compile_ml_irrational(&f, &alpha1()).unwrap();
        let mut oracle = NegationOracle::new();
        let root = net.cls.index() - 1;
        let trace = net.evaluate(&mixed_star(), Some(&mut oracle)).unwrap();
        assert_eq!(
            trace.outputs()[0][root],
            QuadExt {
                p: rat(1, 1),
                q: rat(0, 1)
            }
        );
        assert!(oracle.log().iter().any(|q| q.fresh));
        oracle.check_invariants().unwrap();
    }

    #[test]
    fn matches_the_model_checker_on_small_graphs() {
        let formulas = ["P | !P", "<>!P", "!(P | <>P)", "[]P", "<>true & !false"];
        let graphs = [single(true), single(false), mixed_star()];
        for text in formulas {
            let f = parse::parse(text).unwrap();
            let net = compile_ml_irrational(&f, &alpha1()).unwrap();
            for g in &graphs {
                let mut oracle = NegationOracle::new();
                assert_eq!(
                    net.accepts_pointed(g, Some(&mut oracle)).unwrap(),
                    check::check_at_point(g, &f).unwrap(),
                    "{text}"
                );
                oracle.check_invariants().unwrap();
            }
        }
    }

    #[test]
    fn rejects_graded_formulas() {
        let f = parse::parse("<>{>=2}P").unwrap();
        assert!(matches!(
            compile_ml_irrational(&f, &alpha1()),
            Err(CompileError::NotInFragment { .. })
        ));
    }
}
