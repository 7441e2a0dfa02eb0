//! Mean networks with logistic activation for the alternation-free
//! fragments, over `f64`.
//!
//! Truth of a subformula is encoded as a channel value in (1/2, 1) and
//! falsity as exactly 1/2. Literals are produced by a distinct first layer;
//! the remaining 5L layers share one combination function in which literal
//! channels maintain their class via σ(x − 1/2), disjunction uses
//! σ(x + y − 1), diamonds compare the child mean against the constant-1/2
//! channel, and □⊥ reads only that constant channel. Conjunction needs the
//! even bump function τ(x) = −σ(σ(x)) − σ(σ(−x)), whose strict global
//! minimum at 0 turns "either operand equals 1/2" into an exact zero of
//!
//! ```text
//! α(x, y) = τ(τ(x − y) − τ(x + y − 1)) − τ(0)
//! ```
//!
//! so σ(α) is exactly 1/2 on false conjunctions and above 1/2 on true ones.
//! The pipeline B → σσ → difference → σσ → output takes five layers and
//! twelve bookkeeping channels per conjunction, giving dimension 13L + 1.
//!
//! The channel ordering of the bookkeeping slots is deliberate: terms are
//! accumulated bias first, then in ascending channel order, so pairing the
//! σσ values as (T₁, T₃, T₂, T₄) with alternating signs makes the falsity
//! cases cancel exactly in double precision (the relevant differences are
//! Sterbenz-exact), keeping false channels at bit-exact 0.5.
//!
//! Margins of true channels, in contrast, contract roughly fourfold per
//! maintenance layer and α is quartically small in its input margins, so on
//! the float path deeply nested formulas can round to exactly 1/2 and
//! misclassify; the rational semantics is unaffected. Box-only formulas are
//! handled through the diamond-only dual ψ with an extra σ(1/2 − x_ψ) layer
//! and an accept-at-≥1/2 classifier.

use super::{require, CompileError};
use crate::gnn::{
    Activation, Aggregation, Classifier, Gnn, Layer, ThresholdRel,
};
use crate::logic::{afml_dual, subformula_order, Formula};
use crate::scalar::{rat, Scalar};
use std::collections::HashMap;

fn sig(x: f64) -> f64 {
    Scalar::sigmoid(&x).expect("the logistic function is total on f64")
}

/// The analytic helper functions behind the conjunction gadget.
pub struct ActivationGadget;

impl ActivationGadget {
    /// τ(x) = −σ(σ(x)) − σ(σ(−x)): even, injective on [0, ∞), strict
    /// global minimum at 0.
    pub fn tau(x: f64) -> f64 {
        -sig(sig(x)) - sig(sig(-x))
    }

    /// τ(0) = −2 / (1 + e^(−1/2)), the minimum value of τ.
    pub fn e_min() -> f64 {
        Self::tau(0.0)
    }

    /// α(x, y) = τ(τ(x − y) − τ(x + y − 1)) − τ(0): zero iff x = 1/2 or
    /// y = 1/2, strictly positive otherwise.
    pub fn alpha(x: f64, y: f64) -> f64 {
        Self::tau(Self::tau(x - y) - Self::tau(x + y - 1.0)) - Self::e_min()
    }
}

/// Compiles a formula of either alternation-free fragment to a logistic
/// mean network over `f64`; see the module docs for the encoding.
pub fn compile_afml_sigmoid(
    f: &Formula,
    alphabet: &[String],
) -> Result<Gnn<f64>, CompileError> {
    Ok(compile_afml_sigmoid_with_channels(f, alphabet)?.0)
}

/// As [`compile_afml_sigmoid`], also returning the subformula carried by
/// each of the first L channels. For a box-only formula those are the
/// subformulas of its diamond-only dual.
pub fn compile_afml_sigmoid_with_channels(
    f: &Formula,
    alphabet: &[String],
) -> Result<(Gnn<f64>, Vec<Formula>), CompileError> {
    let report = f.analyze();
    if report.in_afml1 {
        let (gnn, channels, _) = diamond_fragment_net(f, alphabet)?;
        return Ok((gnn, channels));
    }
    require("the alternation-free fragments", report.in_afml2, f)?;
    let dual = afml_dual(f);
    let (mut gnn, channels, root) = diamond_fragment_net(&dual, alphabet)?;
    let dim = gnn.out_dim();
    let mut c = vec![vec![0.0; 1]; dim];
    c[root][0] = -1.0;
    gnn.layers.push(Layer::simple(
        Aggregation::Mean,
        c,
        vec![vec![0.0; 1]; dim],
        vec![0.5],
        Activation::Sigmoid,
    ));
    gnn.cls = Classifier::Threshold {
        index: 1,
        rel: ThresholdRel::Geq,
        c: rat(1, 2),
    };
    Ok((gnn, channels))
}

/// The diamond-only construction. Returns the network, the L channel
/// formulas, and the root channel index.
fn diamond_fragment_net(
    f: &Formula,
    alphabet: &[String],
) -> Result<(Gnn<f64>, Vec<Formula>, usize), CompileError> {
    let (order, root) = subformula_order(f, alphabet)?;
    let l = order.len();
    let dim = 13 * l + 1;
    let index: HashMap<Formula, usize> = order
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, g)| (g, i))
        .collect();
    let idx = |g: &Formula| *index.get(g).expect("child precedes parent");

    // First layer: literals from the 0/1 label indicators, everything else
    // (including the constant channel, via σ(0)) starts at 1/2.
    let mut c1 = vec![vec![0.0; dim]; dim];
    let mut b1 = vec![0.0; dim];
    for (k, sub) in order.iter().enumerate() {
        match sub {
            Formula::Atom(_) => c1[k][k] = 1.0,
            Formula::Not(i) => {
                c1[idx(i)][k] = -1.0;
                b1[k] = 1.0;
            }
            Formula::Top => b1[k] = 1.0,
            _ => {}
        }
    }
    let first = Layer::simple(
        Aggregation::Mean,
        c1,
        vec![vec![0.0; dim]; dim],
        b1,
        Activation::Sigmoid,
    );

    // Homogeneous layers.
    let g = sig(sig(0.0));
    let mut c = vec![vec![0.0; dim]; dim];
    let mut a = vec![vec![0.0; dim]; dim];
    let mut b = vec![0.0; dim];
    for (k, sub) in order.iter().enumerate() {
        match sub {
            Formula::Atom(_) | Formula::Not(_) | Formula::Top => {
                c[k][k] = 1.0;
                b[k] = -0.5;
            }
            Formula::Bottom => {}
            Formula::Box(i) if matches!(**i, Formula::Bottom) => {
                a[13 * l][k] = -1.0;
                b[k] = 0.5;
            }
            Formula::Dia(i) => {
                a[idx(i)][k] = 1.0;
                a[13 * l][k] = -1.0;
            }
            Formula::Or(lhs, rhs) => {
                c[idx(lhs)][k] += 1.0;
                c[idx(rhs)][k] += 1.0;
                b[k] = -1.0;
            }
            Formula::And(lhs, rhs) => {
                let (i, j) = (idx(lhs), idx(rhs));
                let base = l + 12 * k;
                // Stage 1: u₁ = x − y and u₂ = x + y − 1, each with its
                // negation.
                c[i][base] += 1.0;
                c[j][base] -= 1.0;
                c[i][base + 1] -= 1.0;
                c[j][base + 1] += 1.0;
                c[i][base + 2] += 1.0;
                c[j][base + 2] += 1.0;
                b[base + 2] = -1.0;
                c[i][base + 3] -= 1.0;
                c[j][base + 3] -= 1.0;
                b[base + 3] = 1.0;
                // Stage 2: the four σσ values, interleaved as T₁, T₃, T₂,
                // T₄ so the stage-3 accumulation cancels falsity exactly.
                c[base][base + 4] = 1.0;
                c[base + 2][base + 5] = 1.0;
                c[base + 1][base + 6] = 1.0;
                c[base + 3][base + 7] = 1.0;
                // Stage 3: w = τ(u₁) − τ(u₂) = −T₁ + T₃ − T₂ + T₄, and −w.
                c[base + 4][base + 8] = -1.0;
                c[base + 5][base + 8] = 1.0;
                c[base + 6][base + 8] = -1.0;
                c[base + 7][base + 8] = 1.0;
                c[base + 4][base + 9] = 1.0;
                c[base + 5][base + 9] = -1.0;
                c[base + 6][base + 9] = 1.0;
                c[base + 7][base + 9] = -1.0;
                // Stage 4: σσ(w) and σσ(−w).
                c[base + 8][base + 10] = 1.0;
                c[base + 9][base + 11] = 1.0;
                // Stage 5: σ(α) = σ(2g − σσ(w) − σσ(−w)) with g = σ(σ(0)).
                c[base + 10][k] = -1.0;
                c[base + 11][k] = -1.0;
                b[k] = 2.0 * g;
            }
            other => unreachable!("diamond-only formula contains {other}"),
        }
    }
    let homogeneous = Layer::simple(Aggregation::Mean, c, a, b, Activation::Sigmoid);

    let mut layers = Vec::with_capacity(5 * l + 1);
    layers.push(first);
    layers.resize(5 * l + 1, homogeneous);
    let gnn = Gnn {
        input_dim: dim,
        layers,
        cls: Classifier::Threshold {
            index: root + 1,
            rel: ThresholdRel::Gt,
            c: rat(1, 2),
        },
    };
    Ok((gnn, order, root))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::logic::{check, parse};

    fn alpha2() -> Vec<String> {
        vec!["P".to_string(), "Q".to_string()]
    }

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
    fn gadget_invariants_on_a_grid() {
        let e_min = ActivationGadget::e_min();
        assert!((e_min - (-2.0 / (1.0 + (-0.5f64).exp()))).abs() < 1e-15);
        for i in -50..=50 {
            let x = i as f64 / 10.0;
            let t = ActivationGadget::tau(x);
            assert_eq!(t, ActivationGadget::tau(-x), "τ must be even at {x}");
            if x != 0.0 {
                assert!(t > e_min, "τ({x}) must exceed the minimum");
            }
        }
        // α vanishes exactly on the lines x = 1/2 and y = 1/2 and is
        // positive elsewhere: a 100 × 100 grid over [0, 1]².
        for i in 0..100u32 {
            for j in 0..100u32 {
                let x = f64::from(i) / 99.0;
                let y = f64::from(j) / 99.0;
                let a = ActivationGadget::alpha(x, y);
                if x == 0.5 || y == 0.5 {
                    assert_eq!(a, 0.0, "α({x}, {y}) must vanish");
                } else {
                    assert!(a > 0.0, "α({x}, {y}) must be positive");
                }
            }
        }
        // The gadget also vanishes on points of the grid-exact form 0.5.
        assert_eq!(ActivationGadget::alpha(0.5, 0.123), 0.0);
        assert_eq!(ActivationGadget::alpha(0.9, 0.5), 0.0);
    }

    #[test]
    fn literals_classify_with_positive_margin() {
        let mut labeled = star(0, 0, 0);
        labeled.add_label(0, "P").unwrap();
        let unlabeled = star(0, 0, 0);

        let p = compile_afml_sigmoid(&parse::parse("P").unwrap(), &alpha2()).unwrap();
        assert!(p.accepts_pointed(&labeled, None).unwrap());
        assert!(!p.accepts_pointed(&unlabeled, None).unwrap());
        // Rejection is exact: the root channel is bit-identical to 1/2.
        let out = p.evaluate(&unlabeled, None).unwrap().outputs()[0].clone();
        assert_eq!(out[p.cls.index() - 1].to_bits(), 0.5f64.to_bits());

        let np = compile_afml_sigmoid(&parse::parse("!P").unwrap(), &alpha2()).unwrap();
        assert!(!np.accepts_pointed(&labeled, None).unwrap());
        assert!(np.accepts_pointed(&unlabeled, None).unwrap());
    }

    #[test]
    fn box_bottom_reads_the_constant_channel() {
        let f = parse::parse("[]false").unwrap();
        let net = compile_afml_sigmoid(&f, &alpha2()).unwrap();
        let leaf = star(0, 0, 0);
        let branchy = star(0, 0, 2);
        // At a leaf the aggregate is the zero vector, so the channel takes
        // σ(1/2); at a non-leaf the constant channel cancels the bias
        // exactly.
        let out = net.evaluate(&leaf, None).unwrap().outputs()[0][net.cls.index() - 1];
        assert_eq!(out.to_bits(), sig(0.5).to_bits());
        assert!(net.accepts_pointed(&leaf, None).unwrap());
        let out = net.evaluate(&branchy, None).unwrap().outputs()[0][net.cls.index() - 1];
        assert_eq!(out.to_bits(), 0.5f64.to_bits());
        assert!(!net.accepts_pointed(&branchy, None).unwrap());
    }

    #[test]
    fn disjunction_and_diamond_agree_with_the_model_checker() {
        for f in ["P | Q", "<>P", "<>(P | Q)"] {
            let f = parse::parse(f).unwrap();
            let net = compile_afml_sigmoid(&f, &alpha2()).unwrap();
            for mut g in [star(0, 0, 0), star(1, 0, 0), star(0, 2, 1), star(0, 0, 3)] {
                for bits in 0..2u8 {
                    if bits == 1 {
                        g.add_label(0, "Q").unwrap();
                    }
                    assert_eq!(
                        net.accepts_pointed(&g, None).unwrap(),
                        check::check_at_point(&g, &f).unwrap(),
                        "{f} on a star"
                    );
                }
            }
        }
    }

    #[test]
    fn false_conjunctions_are_rejected_bit_exactly() {
        let f = parse::parse("P & Q").unwrap();
        let net = compile_afml_sigmoid(&f, &alpha2()).unwrap();
        let mut g = star(0, 0, 0);
        g.add_label(0, "P").unwrap();
        let out = net.evaluate(&g, None).unwrap().outputs()[0][net.cls.index() - 1];
        assert_eq!(
            out.to_bits(),
            0.5f64.to_bits(),
            "a false conjunct must cancel to exactly 1/2"
        );
        assert!(!net.accepts_pointed(&g, None).unwrap());
    }

    #[test]
    fn true_conjunction_margins_underflow_in_double_precision() {
        // Over the reals the root channel of a true conjunction lies
        // strictly above 1/2, but its margin is quartically small in the
        // maintained literal margins, which contract fourfold per layer.
        // In `f64` the value rounds to exactly 1/2, so the network
        // misclassifies: this pins the floating-point behavior.
        let f = parse::parse("P & Q").unwrap();
        let net = compile_afml_sigmoid(&f, &alpha2()).unwrap();
        let mut g = star(0, 0, 0);
        g.add_label(0, "P").unwrap();
        g.add_label(0, "Q").unwrap();
        assert!(check::check_at_point(&g, &f).unwrap());
        let out = net.evaluate(&g, None).unwrap().outputs()[0][net.cls.index() - 1];
        assert_eq!(out.to_bits(), 0.5f64.to_bits());
        assert!(!net.accepts_pointed(&g, None).unwrap());
    }

    #[test]
    fn box_fragment_compiles_through_the_dual() {
        // □Q: acceptance goes through the appended σ(1/2 − x) layer, so
        // accepted points sit exactly at the 1/2 threshold.
        let f = parse::parse("[]Q").unwrap();
        let net = compile_afml_sigmoid(&f, &alpha2()).unwrap();
        for g in [star(0, 0, 0), star(0, 2, 0), star(0, 2, 1), star(1, 1, 0)] {
            assert_eq!(
                net.accepts_pointed(&g, None).unwrap(),
                check::check_at_point(&g, &f).unwrap(),
            );
        }
        let accepted = star(0, 2, 0);
        let out = net.evaluate(&accepted, None).unwrap().outputs()[0][0];
        assert_eq!(out.to_bits(), 0.5f64.to_bits());
    }

    #[test]
    fn channel_classes_settle_for_small_formulas() {
        let f = parse::parse("<>P | Q").unwrap();
        let (net, channels) = compile_afml_sigmoid_with_channels(&f, &alpha2()).unwrap();
        let g = star(1, 0, 1);
        let trace = net.evaluate(&g, None).unwrap();
        for (k, sub) in channels.iter().enumerate() {
            let truth = check::check_all(&g, sub).unwrap();
            for layer in (5 * (k + 1) + 1)..trace.values.len() {
                for v in 0..g.vertex_count() {
                    let val = trace.values[layer][v][k];
                    if truth[v] {
                        assert!(val > 0.5, "true {sub} at v{v} layer {layer}: {val}");
                    } else {
                        assert_eq!(val.to_bits(), 0.5f64.to_bits(), "false {sub} at v{v}");
                    }
                }
            }
        }
    }
}
