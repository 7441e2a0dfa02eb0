//! Rewriting truncated-ReLU networks into plain ReLU networks.
//!
//! The identity trReLU(z) = ReLU(z) − ReLU(z − 1) turns each layer into two:
//! an expansion layer that computes both ReLU branches side by side, and an
//! own-feature contraction layer that subtracts them. The outer ReLU of the
//! contraction is the identity on [0, 1], so every vertex carries exactly
//! the original feature vector after each even layer, and the classifier can
//! be kept unchanged.

use super::CompileError;
use crate::gnn::{Activation, Comb, Gnn, Layer};
use crate::scalar::Scalar;

/// Doubles every truncated-ReLU layer into an expansion/contraction pair of
/// plain ReLU layers with the same end-of-layer features.
///
/// Fails with [`CompileError::NotTrRelu`] if some layer is not a simple
/// combination with truncated-ReLU activation.
pub fn trrelu_to_relu<S: Scalar>(net: &Gnn<S>) -> Result<Gnn<S>, CompileError> {
    let mut layers = Vec::with_capacity(2 * net.layers.len());
    for (i, layer) in net.layers.iter().enumerate() {
        let sc = match &layer.comb {
            Comb::Simple(sc) if sc.activation == Activation::TrRelu => sc,
            _ => return Err(CompileError::NotTrRelu { layer: i + 1 }),
        };
        let out = sc.out_dim();

        // Expansion: [C | C], [A | A], [b | b − 1], computing ReLU(z_k) in
        // channel k and ReLU(z_k − 1) in channel out + k.
        let widen = |m: &[Vec<S>]| -> Vec<Vec<S>> {
            m.iter()
                .map(|row| row.iter().chain(row.iter()).cloned().collect())
                .collect()
        };
        let mut b = sc.b.clone();
        b.extend(sc.b.iter().map(|v| v.sub(&S::one())));
        layers.push(Layer::simple(
            layer.agg,
            widen(&sc.c),
            widen(&sc.a),
            b,
            Activation::Relu,
        ));

        // Contraction: own-feature difference channel k − channel out + k.
        let mut c = vec![vec![S::zero(); out]; 2 * out];
        for k in 0..out {
            c[k][k] = S::one();
            c[out + k][k] = Scalar::sub(&S::zero(), &S::one());
        }
        layers.push(Layer::simple(
            layer.agg,
            c,
            vec![vec![S::zero(); out]; 2 * out],
            vec![S::zero(); out],
            Activation::Relu,
        ));
    }
    let rewritten = Gnn {
        input_dim: net.input_dim,
        layers,
        cls: net.cls.clone(),
    };
    rewritten.validate()?;
    Ok(rewritten)
}
