//! Collapsing mean networks to two layers on depth-2 trees.
//!
//! On the family of trees with a root, a middle layer, and labeled leaves
//! (single label, only on leaves; the single-vertex tree is included), a
//! mean network of any depth L is equivalent to a two-layer mean network:
//!
//! * Stage 1 runs at the middle vertices. Their leaf children follow one of
//!   exactly two feature trajectories (labeled or unlabeled), so the whole
//!   aggregate at every layer is a blend of the two stored trajectories,
//!   keyed by the fraction of labeled children. The stage replays all L
//!   combination functions in one step and emits every intermediate vector,
//!   concatenated.
//! * Stage 2 runs at the root. The mean over the middle vertices of that
//!   concatenation contains, slice by slice, exactly the layer-wise
//!   aggregates the root would have seen, so the stage replays the stack
//!   once more, reading slice ℓ as the layer-(ℓ+1) aggregate.
//!
//! The classifier carries over unchanged. Over exact scalars the collapsed
//! network's root vector is identical to the original's; over floats the two
//! differ only in summation order (blend vs. per-leaf mean).

use super::{Aggregation, BuiltinComb, Comb, Gnn, GnnError, Layer};
use crate::graph::Graph;
use crate::scalar::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Rewrites a mean network with simple combination functions into the
/// equivalent two-layer form for depth-2 trees.
pub fn collapse_depth2_trees<S: Scalar>(net: &Gnn<S>) -> Result<Gnn<S>, GnnError> {
    net.validate()?;
    let mut combs = Vec::with_capacity(net.layers.len());
    for (idx, layer) in net.layers.iter().enumerate() {
        match (&layer.agg, &layer.comb) {
            (Aggregation::Mean, Comb::Simple(c)) => combs.push(c.clone()),
            (other, _) => {
                return Err(GnnError::BadShape {
                    layer: idx + 1,
                    detail: format!(
                        "collapse requires mean aggregation and simple combination functions, found {}",
                        other.name()
                    ),
                })
            }
        }
    }
    if combs.is_empty() {
        return Err(GnnError::BadShape {
            layer: 0,
            detail: "collapse requires at least one layer".to_string(),
        });
    }

    // Leaf trajectories: leaves aggregate the empty multiset forever, so
    // their layer-ℓ vector depends only on whether they carry the label.
    let mut labeled = vec![S::zero(); net.input_dim];
    labeled[0] = S::one();
    let mut plus = vec![labeled];
    let mut minus = vec![vec![S::zero(); net.input_dim]];
    for l in 0..combs.len() - 1 {
        let zeros = vec![S::zero(); combs[l].in_dim()];
        let p = combs[l].apply(&plus[l], &zeros)?;
        let m = combs[l].apply(&minus[l], &zeros)?;
        plus.push(p);
        minus.push(m);
    }

    Ok(Gnn {
        input_dim: net.input_dim,
        layers: vec![
            Layer {
                agg: Aggregation::Mean,
                comb: Comb::Builtin(BuiltinComb::CollapseLeafPipeline {
                    combs: combs.clone(),
                    plus,
                    minus,
                }),
            },
            Layer {
                agg: Aggregation::Mean,
                comb: Comb::Builtin(BuiltinComb::CollapseRootPipeline { combs }),
            },
        ],
        cls: net.cls.clone(),
    })
}

/// Samples a depth-2 tree (or, for `mids = 0`, the single-vertex tree) over
/// the one-label alphabet {P}: the root points at `mids` middle vertices,
/// each middle vertex at 1..=`max_leaves` leaves, and each leaf carries P
/// with probability 1/2. The root is the distinguished point.
pub fn random_depth2_tree(seed: u64, max_mids: usize, max_leaves: usize) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Graph::new(["P"]).expect("fixed alphabet");
    g.add_vertex("root").expect("fresh graph");
    g.set_point(Some(0));
    let mids = rng.gen_range(0..=max_mids);
    for m in 1..=mids {
        let mid = format!("m{m}");
        g.add_vertex(&mid).expect("fresh vertex");
        g.add_edge_named("root", &mid).expect("vertices exist");
        let leaves = rng.gen_range(1..=max_leaves.max(1));
        for l in 1..=leaves {
            let leaf = format!("m{m}_l{l}");
            let li = g.add_vertex(&leaf).expect("fresh vertex");
            g.add_edge_named(&mid, &leaf).expect("vertices exist");
            if rng.gen_bool(0.5) {
                g.add_label(li, "P").expect("label exists");
            }
        }
    }
    g
}
