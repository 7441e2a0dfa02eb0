//! Mean networks with truncated ReLU for the alternation-free fragments.
//!
//! Diamond-only formulas (literals, ∧, ∨, ⋄, with □⊥ and ⋄⊤ as honorary
//! literals) compile to 2L homogeneous layers over 3L+1 channels: one
//! channel per subformula, two helper channels per subformula for the
//! conjunction gadget, and one constant-1 channel whose aggregate witnesses
//! leafness. Truth is encoded as a value in (0, 1], falsity as exactly 0;
//! mean aggregation preserves that encoding (some successor true ⇔ the mean
//! is positive), and the conjunction gadget
//!
//! ```text
//! trReLU(x + y − trReLU(x − y) − trReLU(y − x)) = trReLU(x + y − |x − y|)
//! ```
//!
//! equals trReLU(2·min(x, y)), which is 0 iff either operand is 0. Channel k
//! is settled from layer 2k on. Box-only formulas are compiled through their
//! diamond-only dual ψ (φ ≡ ¬ψ) with one extra layer computing 1 − x_ψ and
//! an accept-at-1 classifier.

use super::{require, CompileError};
use crate::gnn::{
    Activation, Aggregation, Classifier, Gnn, Layer, ThresholdRel,
};
use crate::logic::{afml_dual, subformula_order, Formula};
use num::rational::BigRational;
use num::{One, Zero};
use std::collections::HashMap;

/// Compiles a formula of either alternation-free fragment; see the module
/// docs for the encoding.
pub fn compile_afml_trrelu(
    f: &Formula,
    alphabet: &[String],
) -> Result<Gnn<BigRational>, CompileError> {
    Ok(compile_afml_trrelu_with_channels(f, alphabet)?.0)
}

/// As [`compile_afml_trrelu`], also returning the subformula carried by each
/// of the first L channels. For a box-only formula those are the subformulas
/// of its diamond-only dual.
pub fn compile_afml_trrelu_with_channels(
    f: &Formula,
    alphabet: &[String],
) -> Result<(Gnn<BigRational>, Vec<Formula>), CompileError> {
    let report = f.analyze();
    if report.in_afml1 {
        let (gnn, channels, _) = diamond_fragment_net(f, alphabet)?;
        return Ok((gnn, channels));
    }
    require("the alternation-free fragments", report.in_afml2, f)?;
    let dual = afml_dual(f);
    let (mut gnn, channels, root) = diamond_fragment_net(&dual, alphabet)?;
    let dim = gnn.out_dim();
    let mut c = vec![vec![BigRational::zero(); 1]; dim];
    c[root][0] = -BigRational::one();
    gnn.layers.push(Layer::simple(
        Aggregation::Mean,
        c,
        vec![vec![BigRational::zero(); 1]; dim],
        vec![BigRational::one()],
        Activation::TrRelu,
    ));
    gnn.cls = Classifier::Threshold {
        index: 1,
        rel: ThresholdRel::Geq,
        c: BigRational::one(),
    };
    Ok((gnn, channels))
}

/// The diamond-only construction. Returns the network, the L channel
/// formulas, and the root channel index.
fn diamond_fragment_net(
    f: &Formula,
    alphabet: &[String],
) -> Result<(Gnn<BigRational>, Vec<Formula>, usize), CompileError> {
    let (order, root) = subformula_order(f, alphabet)?;
    let l = order.len();
    let dim = 3 * l + 1;
    let index: HashMap<Formula, usize> = order
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, g)| (g, i))
        .collect();
    let idx = |g: &Formula| *index.get(g).expect("child precedes parent");

    let mut c = vec![vec![BigRational::zero(); dim]; dim];
    let mut a = vec![vec![BigRational::zero(); dim]; dim];
    let mut b = vec![BigRational::zero(); dim];
    // Constant channel: 1 from the first layer on; its aggregate is 1 at
    // non-leaves and 0 at leaves.
    b[3 * l] = BigRational::one();

    for (k, sub) in order.iter().enumerate() {
        match sub {
            Formula::Top => b[k] = BigRational::one(),
            Formula::Bottom => {}
            Formula::Atom(_) => c[k][k] = BigRational::one(),
            Formula::Not(i) => {
                c[idx(i)][k] = -BigRational::one();
                b[k] = BigRational::one();
            }
            Formula::Box(i) if matches!(**i, Formula::Bottom) => {
                a[3 * l][k] = -BigRational::one();
                b[k] = BigRational::one();
            }
            Formula::Dia(i) => a[idx(i)][k] = BigRational::one(),
            Formula::Or(lhs, rhs) => {
                c[idx(lhs)][k] += BigRational::one();
                c[idx(rhs)][k] += BigRational::one();
            }
            Formula::And(lhs, rhs) => {
                let (i, j) = (idx(lhs), idx(rhs));
                // Helpers carry trReLU(x_i − x_j) and trReLU(x_j − x_i).
                c[i][l + k] += BigRational::one();
                c[j][l + k] -= BigRational::one();
                c[i][2 * l + k] -= BigRational::one();
                c[j][2 * l + k] += BigRational::one();
                // Main channel: trReLU(x_i + x_j − |x_i − x_j|).
                c[i][k] += BigRational::one();
                c[j][k] += BigRational::one();
                c[l + k][k] = -BigRational::one();
                c[2 * l + k][k] = -BigRational::one();
            }
            other => unreachable!("diamond-only formula contains {other}"),
        }
    }

    let layer = Layer::simple(Aggregation::Mean, c, a, b, Activation::TrRelu);
    let gnn = Gnn {
        input_dim: dim,
        layers: vec![layer; 2 * l],
        cls: Classifier::Threshold {
            index: root + 1,
            rel: ThresholdRel::Gt,
            c: BigRational::zero(),
        },
    };
    Ok((gnn, order, root))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::logic::{check, parse};
    use crate::scalar::rat;

    fn alpha2() -> Vec<String> {
        vec!["P".to_string(), "Q".to_string()]
    }

    /// A point with `p` P-children, `q` Q-children, and `plain` unlabeled
    /// children.
    fn star(p: usize, q: usize, plain: usize) -> Graph {
        let mut g = Graph::new(["P", "Q"]).unwrap();
        g.add_vertex("v").unwrap();
        for (count, label) in [(p, Some("P")), (q, Some("Q")), (plain, None)] {
            for i in 0..count {
                let name = format!("{}{}", label.unwrap_or("u"), i);
                let vi = g.add_vertex(name).unwrap();
                g.add_edge(0, vi).unwrap();
                if let Some(lab) = label {
                    g.add_label(vi, lab).unwrap();
                }
            }
        }
        g.set_point(Some(0));
        g
    }

    #[test]
    fn conjunction_gadget_hits_the_expected_values() {
        // ⋄P ∧ ⋄Q at a point with fractions (1/2, 1/4): the gadget yields
        // trReLU(3/4 − trReLU(1/4) − trReLU(0)) = 1/2.
        let f = parse::parse("<>P & <>Q").unwrap();
        let (net, channels) = compile_afml_trrelu_with_channels(&f, &alpha2()).unwrap();
        let g = star(2, 1, 1);
        let root_channel = channels.iter().position(|c| c == &f).unwrap();
        let trace = net.evaluate(&g, None).unwrap();
        let out = &trace.outputs()[0];
        assert_eq!(out[root_channel], rat(1, 2));
        assert!(net.accepts_pointed(&g, None).unwrap());

        // Fractions (0, 7/10): one conjunct is exactly 0, so the gadget
        // emits exactly 0.
        let g = star(0, 7, 3);
        let trace = net.evaluate(&g, None).unwrap();
        assert_eq!(trace.outputs()[0][root_channel], rat(0, 1));
        assert!(!net.accepts_pointed(&g, None).unwrap());
    }

    #[test]
    fn box_bottom_and_dia_top_literals() {
        let leaf = star(0, 0, 0);
        let branchy = star(1, 0, 2);

        let f = parse::parse("[]false").unwrap();
        let net = compile_afml_trrelu(&f, &alpha2()).unwrap();
        assert!(net.accepts_pointed(&leaf, None).unwrap());
        assert!(!net.accepts_pointed(&branchy, None).unwrap());

        let f = parse::parse("<>true").unwrap();
        let net = compile_afml_trrelu(&f, &alpha2()).unwrap();
        assert!(!net.accepts_pointed(&leaf, None).unwrap());
        assert!(net.accepts_pointed(&branchy, None).unwrap());
    }

    #[test]
    fn box_fragment_compiles_through_the_dual() {
        // □(Q ∨ ⋄⊤): every successor is a Q-vertex or a non-leaf.
        let f = parse::parse("[](Q | <>true)").unwrap();
        let net = compile_afml_trrelu(&f, &alpha2()).unwrap();
        // Vacuously true at a leaf.
        assert!(net.accepts_pointed(&star(0, 0, 0), None).unwrap());
        // All successors Q: true.
        assert!(net.accepts_pointed(&star(0, 2, 0), None).unwrap());
        // An unlabeled leaf successor falsifies it.
        assert!(!net.accepts_pointed(&star(0, 2, 1), None).unwrap());

        // Cross-check against the model checker on a few stars.
        for g in [star(0, 0, 0), star(1, 1, 1), star(0, 3, 0), star(2, 0, 2)] {
            assert_eq!(
                net.accepts_pointed(&g, None).unwrap(),
                check::check_at_point(&g, &f).unwrap(),
            );
        }
    }

    #[test]
    fn channel_encoding_truth_positive_falsity_zero() {
        let f = parse::parse("(P & Q) | <>(P & <>true)").unwrap();
        assert!(f.analyze().in_afml1);
        let (net, channels) = compile_afml_trrelu_with_channels(&f, &alpha2()).unwrap();
        let mut g = star(1, 1, 1);
        // Give one successor a second layer to exercise ⋄ nesting.
        let vi = g.add_vertex("w").unwrap();
        g.add_edge(1, vi).unwrap();
        g.add_label(1, "Q").unwrap();
        let trace = net.evaluate(&g, None).unwrap();
        for (k, sub) in channels.iter().enumerate() {
            let truth = check::check_all(&g, sub).unwrap();
            for layer in (2 * (k + 1))..trace.values.len() {
                for v in 0..g.vertex_count() {
                    let val = &trace.values[layer][v][k];
                    if truth[v] {
                        assert!(
                            *val > rat(0, 1) && *val <= rat(1, 1),
                            "true {sub} at v{v} layer {layer}: {val}"
                        );
                    } else {
                        assert_eq!(*val, rat(0, 1), "false {sub} at v{v} layer {layer}");
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_alternating_formulas() {
        let f = parse::parse("<>P & []Q").unwrap();
        assert!(matches!(
            compile_afml_trrelu(&f, &alpha2()),
            Err(CompileError::NotInFragment { .. })
        ));
    }
}
