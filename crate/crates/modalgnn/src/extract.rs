//! GNN-to-formula extraction: finite feature spaces and the constructions
//! that read a formula back out of an exact-arithmetic network.
//!
//! The compilers translate formulas into networks; this module is the
//! converse. Its backbone is the observation that a rational network can
//! only produce finitely many distinct feature vectors per layer once the
//! graphs are constrained:
//!
//! * **Mean and Sum networks** are extracted relative to a size bound `n`.
//!   [`feature_space_bounded`] collects every vector a layer realizes on
//!   any graph with at most `n` vertices. Each vector x̄ then gets a formula
//!   φ^ℓ_x̄ holding at exactly the vertices that carry x̄: layer 0 uses
//!   label-indicator patterns, and layer ℓ describes a vertex by its own
//!   previous vector ȳ together with a profile of its successor multiset —
//!   exact fractions ⋄̇^{=f}φ^{ℓ-1}_z̄ for Mean, exact multiplicities
//!   ⋄^{=m}φ^{ℓ-1}_z̄ for Sum. The disjunction of profiles whose aggregate
//!   combines with ȳ to x̄ is φ^ℓ_x̄, and the extracted formula is the
//!   disjunction of φ^L_x̄ over the accepted outputs. Vertices without
//!   successors need care in the ratio logic, where every ⋄̇^{=f} holds
//!   vacuously at a leaf: profile disjuncts carry a ⋄̇^{>0}⊤ guard and
//!   leaves get their own ¬⋄̇^{>0}⊤ disjunct per combination with the zero
//!   aggregate. In the graded logic the all-zero profile already pins
//!   leaves down, since ⋄^{=0} of every pattern fails wherever some
//!   successor exists.
//! * **Max networks** are oblivious to multiplicities, so extraction is
//!   uniform over all graphs. [`feature_space_overapprox`] closes the
//!   indicator patterns under the layer maps inductively, feeding every
//!   componentwise maximum of previous vectors (plus the empty-multiset
//!   zero vector) through the combination function. A successor multiset is
//!   abstracted by its componentwise maximum m̄, described compactly as
//!   "every successor sits below m̄, and each channel's maximum is
//!   witnessed": □(⋁_{z̄≤m̄} φ_z̄) ∧ ⋀_j ⋄(⋁_{z̄≤m̄, z̄_j=m̄_j} φ_z̄). This is
//!   equivalent to the disjunction over all successor-vector sets with
//!   maximum m̄ but avoids enumerating the powerset. Vertices whose layer
//!   map ignores the aggregate entirely collapse to their own-vector
//!   formula with no modalities at all.
//!
//! Subterms are shared aggressively (`Arc` children), so the emitted
//! formulas are small as DAGs even when their tree unfolding is not; the
//! model checker memoizes per node and pays DAG cost. Output is emitted
//! unsimplified; [`propagate_consts`] folds ⊤/⊥ through connectives as an
//! optional, equivalence-preserving cleanup.

use crate::gnn::{Aggregation, Comb, Gnn, GnnError, SimpleComb};
use crate::graph::transform::enumerate_graphs;
use crate::logic::{CountRel, Formula, RatioRel};
use crate::scalar::{rat, ScalarError};
use num::rational::BigRational;
use num::{One, Zero};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

/// Per-layer cap on the number of distinct feature vectors.
const MAX_LAYER_VECTORS: usize = 1024;
/// Cap on the componentwise-maximum closure used for Max extraction.
const MAX_CLOSURE: usize = 4096;
/// Cap on the number of successor profiles enumerated per layer.
const MAX_PROFILES: u128 = 100_000;

/// Errors from feature-space construction and extraction.
#[derive(Debug, thiserror::Error)]
pub enum ExtractError {
    #[error("size bound must be at least 1")]
    BadBound,
    #[error("layer {layer} does not use an explicit affine combination")]
    NotSimple { layer: usize },
    #[error("layer {layer} aggregates with {found}, extraction needs {expected}")]
    WrongAggregation {
        layer: usize,
        expected: &'static str,
        found: &'static str,
    },
    #[error("feature-space guard exceeded at layer {layer}: {what}")]
    Blowup { layer: usize, what: String },
    #[error(transparent)]
    Gnn(#[from] GnnError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// How a [`FeatureSpace`] was obtained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    /// Exhaustive evaluation on every graph with at most `bound` vertices.
    Realizable { bound: usize },
    /// Inductive image closure; a superset of every realizable vector on
    /// any graph (Max aggregation only).
    InductiveOverapprox,
}

/// The finite sets χ^ℓ of feature vectors a network can produce, layer by
/// layer; `layers[0]` holds the initial label-indicator vectors.
#[derive(Debug, Clone)]
pub struct FeatureSpace {
    pub provenance: Provenance,
    pub layers: Vec<BTreeSet<Vec<BigRational>>>,
}

impl FeatureSpace {
    /// The vector set of one layer (0 is the input layer).
    pub fn layer(&self, l: usize) -> &BTreeSet<Vec<BigRational>> {
        &self.layers[l]
    }

    /// Whether every vector of every layer also appears in `other`.
    pub fn is_subset_of(&self, other: &FeatureSpace) -> bool {
        self.layers.len() == other.layers.len()
            && self
                .layers
                .iter()
                .zip(other.layers.iter())
                .all(|(a, b)| a.is_subset(b))
    }
}

/// Checks that every layer uses the expected aggregation and an explicit
/// affine combination, returning the combination functions in order.
fn simple_layers<'n>(
    net: &'n Gnn<BigRational>,
    expected: Aggregation,
) -> Result<Vec<&'n SimpleComb<BigRational>>, ExtractError> {
    net.layers
        .iter()
        .enumerate()
        .map(|(i, layer)| {
            if layer.agg != expected {
                return Err(ExtractError::WrongAggregation {
                    layer: i + 1,
                    expected: expected.name(),
                    found: layer.agg.name(),
                });
            }
            match &layer.comb {
                Comb::Simple(sc) => Ok(sc),
                Comb::Builtin(_) => Err(ExtractError::NotSimple { layer: i + 1 }),
            }
        })
        .collect()
}

/// Collects every feature vector the network realizes on any graph with at
/// most `n` vertices, per layer, by exhaustive enumeration.
pub fn feature_space_bounded(
    net: &Gnn<BigRational>,
    alphabet: &[String],
    n: usize,
) -> Result<FeatureSpace, ExtractError> {
    if n == 0 {
        return Err(ExtractError::BadBound);
    }
    net.validate()?;
    let mut layers: Vec<BTreeSet<Vec<BigRational>>> = vec![BTreeSet::new(); net.layers.len() + 1];
    for g in enumerate_graphs(alphabet, n) {
        let trace = net.evaluate(&g, None)?;
        for (l, rows) in trace.values.iter().enumerate() {
            for row in rows {
                if !layers[l].contains(row) {
                    layers[l].insert(row.clone());
                    if layers[l].len() > MAX_LAYER_VECTORS {
                        return Err(ExtractError::Blowup {
                            layer: l,
                            what: format!("more than {MAX_LAYER_VECTORS} realizable vectors"),
                        });
                    }
                }
            }
        }
    }
    Ok(FeatureSpace {
        provenance: Provenance::Realizable { bound: n },
        layers,
    })
}

/// Closes `set` under componentwise maximum. The closure holds exactly the
/// maxima of the nonempty subsets of `set`.
fn max_closure(
    set: &BTreeSet<Vec<BigRational>>,
    layer: usize,
) -> Result<BTreeSet<Vec<BigRational>>, ExtractError> {
    let mut closure = set.clone();
    loop {
        let mut fresh: Vec<Vec<BigRational>> = Vec::new();
        for a in &closure {
            for b in &closure {
                let sup: Vec<BigRational> = a
                    .iter()
                    .zip(b.iter())
                    .map(|(x, y)| if x >= y { x.clone() } else { y.clone() })
                    .collect();
                if !closure.contains(&sup) && !fresh.contains(&sup) {
                    fresh.push(sup);
                }
            }
        }
        if fresh.is_empty() {
            return Ok(closure);
        }
        closure.extend(fresh);
        if closure.len() > MAX_CLOSURE {
            return Err(ExtractError::Blowup {
                layer,
                what: format!("aggregate closure exceeds {MAX_CLOSURE} vectors"),
            });
        }
    }
}

fn zero_vec(dim: usize) -> Vec<BigRational> {
    vec![BigRational::zero(); dim]
}

/// The label-indicator vectors over `alphabet`, padded to `dim`.
fn indicator_patterns(alphabet: &[String], dim: usize) -> Result<Vec<Vec<BigRational>>, ExtractError> {
    let r = alphabet.len();
    if dim < r {
        return Err(ExtractError::Gnn(GnnError::AlphabetTooLarge { dim, alphabet: r }));
    }
    if r > MAX_LAYER_VECTORS.ilog2() as usize {
        return Err(ExtractError::Blowup {
            layer: 0,
            what: format!("2^{r} label patterns exceed {MAX_LAYER_VECTORS} vectors"),
        });
    }
    let mut out = Vec::with_capacity(1 << r);
    for mask in 0u64..(1u64 << r) {
        let mut v = zero_vec(dim);
        for (i, slot) in v.iter_mut().enumerate().take(r) {
            if mask >> i & 1 == 1 {
                *slot = BigRational::one();
            }
        }
        out.push(v);
    }
    Ok(out)
}

/// Inductive overapproximation of the per-layer vector sets of a Max
/// network: feed every componentwise maximum of the previous layer's set
/// (and the empty-multiset zero vector) through the combination function.
/// Every vector arising on *any* graph appears, since a vertex's aggregate
/// is the maximum of its successors' vectors.
pub fn feature_space_overapprox(
    net: &Gnn<BigRational>,
    alphabet: &[String],
) -> Result<FeatureSpace, ExtractError> {
    net.validate()?;
    let combs = simple_layers(net, Aggregation::Max)?;
    let mut layers: Vec<BTreeSet<Vec<BigRational>>> = Vec::with_capacity(net.layers.len() + 1);
    layers.push(indicator_patterns(alphabet, net.input_dim)?.into_iter().collect());
    for (li, sc) in combs.iter().enumerate() {
        let prev = layers.last().expect("layer 0 present");
        let mut aggs = max_closure(prev, li + 1)?;
        aggs.insert(zero_vec(sc.in_dim()));
        let mut next: BTreeSet<Vec<BigRational>> = BTreeSet::new();
        for own in prev {
            for agg in &aggs {
                next.insert(sc.apply(own, agg)?);
                if next.len() > MAX_LAYER_VECTORS {
                    return Err(ExtractError::Blowup {
                        layer: li + 1,
                        what: format!("more than {MAX_LAYER_VECTORS} image vectors"),
                    });
                }
            }
        }
        layers.push(next);
    }
    Ok(FeatureSpace {
        provenance: Provenance::InductiveOverapprox,
        layers,
    })
}

/// ⋀ of positive/negative label literals pinning down a layer-0 vector.
fn label_pattern(alphabet: &[String], vector: &[BigRational]) -> Formula {
    let mut lits = Vec::with_capacity(alphabet.len());
    for (i, p) in alphabet.iter().enumerate() {
        let atom = Formula::atom(p.clone());
        lits.push(if vector[i].is_one() {
            atom
        } else {
            Formula::not(atom)
        });
    }
    lits.into_iter()
        .reduce(Formula::and)
        .unwrap_or(Formula::Top)
}

fn and2(l: &Arc<Formula>, r: &Arc<Formula>) -> Arc<Formula> {
    Arc::new(Formula::And(l.clone(), r.clone()))
}

/// Balanced conjunction; empty input yields ⊤.
fn and_chain(items: &[Arc<Formula>]) -> Arc<Formula> {
    match items.len() {
        0 => Arc::new(Formula::Top),
        1 => items[0].clone(),
        k => and2(&and_chain(&items[..k / 2]), &and_chain(&items[k / 2..])),
    }
}

/// Balanced disjunction; empty input yields ⊥.
fn or_chain(items: &[Arc<Formula>]) -> Arc<Formula> {
    match items.len() {
        0 => Arc::new(Formula::Bottom),
        1 => items[0].clone(),
        k => Arc::new(Formula::Or(
            or_chain(&items[..k / 2]),
            or_chain(&items[k / 2..]),
        )),
    }
}

/// Number of ways to write `total` as an ordered sum of `parts` naturals,
/// i.e. C(total + parts - 1, parts - 1); saturates instead of overflowing.
fn composition_count(total: u64, parts: usize) -> u128 {
    if parts == 0 {
        return u128::from(total == 0);
    }
    let mut acc: u128 = 1;
    for k in 1..=total as u128 {
        let factor = (parts as u128 - 1).saturating_add(k);
        acc = match acc.checked_mul(factor) {
            Some(v) => v / k,
            None => return u128::MAX,
        };
    }
    acc
}

/// Appends every ordered tuple of `parts` naturals summing to `total`.
fn push_compositions(total: u64, parts: usize, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
    if parts == 0 {
        if total == 0 {
            out.push(prefix.clone());
        }
        return;
    }
    if parts == 1 {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in 0..=total {
        prefix.push(first);
        push_compositions(total - first, parts - 1, prefix, out);
        prefix.pop();
    }
}

/// The formulas of the input layer, one per layer-0 vector.
fn base_formulas(
    layer0: &BTreeSet<Vec<BigRational>>,
    alphabet: &[String],
) -> BTreeMap<Vec<BigRational>, Arc<Formula>> {
    layer0
        .iter()
        .map(|v| (v.clone(), Arc::new(label_pattern(alphabet, v))))
        .collect()
}

/// Σᵢ weightᵢ · vectorᵢ.
fn weighted_sum(weights: &[BigRational], vectors: &[&Vec<BigRational>], dim: usize) -> Vec<BigRational> {
    let mut acc = zero_vec(dim);
    for (w, v) in weights.iter().zip(vectors.iter()) {
        if w.is_zero() {
            continue;
        }
        for (a, x) in acc.iter_mut().zip(v.iter()) {
            *a += w * x;
        }
    }
    acc
}

/// Extracts a ratio-logic formula equivalent to a Mean network on every
/// graph with at most `n` vertices.
pub fn extract_rml(
    net: &Gnn<BigRational>,
    alphabet: &[String],
    n: usize,
) -> Result<Formula, ExtractError> {
    if n == 0 {
        return Err(ExtractError::BadBound);
    }
    net.validate()?;
    let combs = simple_layers(net, Aggregation::Mean)?;
    let space = feature_space_bounded(net, alphabet, n)?;
    let some_successor = Arc::new(Formula::RDia {
        rel: RatioRel::Gt,
        ratio: BigRational::zero(),
        inner: Arc::new(Formula::Top),
    });
    let no_successor = Arc::new(Formula::Not(some_successor.clone()));

    let mut forms = base_formulas(&space.layers[0], alphabet);
    for (li, sc) in combs.iter().enumerate() {
        let prev: Vec<(&Vec<BigRational>, Arc<Formula>)> = space.layers[li]
            .iter()
            .map(|v| (v, forms[v].clone()))
            .collect();
        let p = prev.len();
        let mut profile_count: u128 = 0;
        for s in 1..=n as u64 {
            profile_count = profile_count.saturating_add(composition_count(s, p));
        }
        if profile_count > MAX_PROFILES {
            return Err(ExtractError::Blowup {
                layer: li + 1,
                what: format!("{profile_count} successor-fraction profiles over {p} vectors"),
            });
        }
        // Each profile fixes, for every previous vector, the exact fraction
        // of successors carrying it; on graphs of size ≤ n the successor
        // count is some s ≤ n, so all realizable profiles are compositions
        // of s rescaled to fractions (deduplicated after reduction).
        let mut profiles: BTreeSet<Vec<BigRational>> = BTreeSet::new();
        for s in 1..=n as u64 {
            let mut tuples = Vec::new();
            push_compositions(s, p, &mut Vec::new(), &mut tuples);
            for t in tuples {
                profiles.insert(t.iter().map(|c| rat(*c as i64, s as i64)).collect());
            }
        }
        let vectors: Vec<&Vec<BigRational>> = prev.iter().map(|(v, _)| *v).collect();
        let mut buckets: BTreeMap<Vec<BigRational>, Vec<Arc<Formula>>> = BTreeMap::new();
        for profile in &profiles {
            let agg = weighted_sum(profile, &vectors, sc.in_dim());
            let mut conj = vec![some_successor.clone()];
            conj.extend(prev.iter().zip(profile.iter()).map(|((_, f), frac)| {
                Arc::new(Formula::RDia {
                    rel: RatioRel::Eq,
                    ratio: frac.clone(),
                    inner: f.clone(),
                })
            }));
            let profile_formula = and_chain(&conj);
            for (own, own_formula) in &prev {
                let image = sc.apply(own, &agg)?;
                // Combinations that never occur on the corpus land outside
                // the realizable set; their disjuncts would be unsatisfiable.
                if space.layers[li + 1].contains(&image) {
                    buckets
                        .entry(image)
                        .or_default()
                        .push(and2(own_formula, &profile_formula));
                }
            }
        }
        let zero = zero_vec(sc.in_dim());
        for (own, own_formula) in &prev {
            let image = sc.apply(own, &zero)?;
            if space.layers[li + 1].contains(&image) {
                buckets
                    .entry(image)
                    .or_default()
                    .push(and2(own_formula, &no_successor));
            }
        }
        forms = space.layers[li + 1]
            .iter()
            .map(|x| {
                let disjuncts = buckets.remove(x).unwrap_or_default();
                (x.clone(), or_chain(&disjuncts))
            })
            .collect();
    }
    accepted_disjunction(net, space.layers.last().expect("input layer present"), &forms)
}

/// Extracts a graded-logic formula equivalent to a Sum network on every
/// graph with at most `n` vertices.
pub fn extract_gml(
    net: &Gnn<BigRational>,
    alphabet: &[String],
    n: usize,
) -> Result<Formula, ExtractError> {
    if n == 0 {
        return Err(ExtractError::BadBound);
    }
    net.validate()?;
    let combs = simple_layers(net, Aggregation::Sum)?;
    let space = feature_space_bounded(net, alphabet, n)?;

    let mut forms = base_formulas(&space.layers[0], alphabet);
    for (li, sc) in combs.iter().enumerate() {
        let prev: Vec<(&Vec<BigRational>, Arc<Formula>)> = space.layers[li]
            .iter()
            .map(|v| (v, forms[v].clone()))
            .collect();
        let p = prev.len();
        let mut profile_count: u128 = 0;
        for total in 0..=n as u64 {
            profile_count = profile_count.saturating_add(composition_count(total, p));
        }
        if profile_count > MAX_PROFILES {
            return Err(ExtractError::Blowup {
                layer: li + 1,
                what: format!("{profile_count} successor-multiplicity profiles over {p} vectors"),
            });
        }
        // A profile fixes the exact number of successors carrying each
        // previous vector. Totals beyond n are unrealizable on the corpus
        // (out-degree is bounded by the graph size). The all-zero profile
        // covers leaves: at a vertex with successors some ⋄^{=0} conjunct
        // fails, because every successor carries one of the vectors.
        let mut profiles: Vec<Vec<u64>> = Vec::new();
        for total in 0..=n as u64 {
            push_compositions(total, p, &mut Vec::new(), &mut profiles);
        }
        let vectors: Vec<&Vec<BigRational>> = prev.iter().map(|(v, _)| *v).collect();
        let mut buckets: BTreeMap<Vec<BigRational>, Vec<Arc<Formula>>> = BTreeMap::new();
        for profile in &profiles {
            let weights: Vec<BigRational> =
                profile.iter().map(|m| rat(*m as i64, 1)).collect();
            let agg = weighted_sum(&weights, &vectors, sc.in_dim());
            let conj: Vec<Arc<Formula>> = prev
                .iter()
                .zip(profile.iter())
                .map(|((_, f), m)| {
                    Arc::new(Formula::GDia {
                        rel: CountRel::Eq,
                        count: *m,
                        inner: f.clone(),
                    })
                })
                .collect();
            let profile_formula = and_chain(&conj);
            for (own, own_formula) in &prev {
                let image = sc.apply(own, &agg)?;
                if space.layers[li + 1].contains(&image) {
                    buckets
                        .entry(image)
                        .or_default()
                        .push(and2(own_formula, &profile_formula));
                }
            }
        }
        forms = space.layers[li + 1]
            .iter()
            .map(|x| {
                let disjuncts = buckets.remove(x).unwrap_or_default();
                (x.clone(), or_chain(&disjuncts))
            })
            .collect();
    }
    accepted_disjunction(net, space.layers.last().expect("input layer present"), &forms)
}

/// Extracts a basic modal formula equivalent to a Max network on *every*
/// graph, using the overapproximated feature space.
pub fn extract_ml(net: &Gnn<BigRational>, alphabet: &[String]) -> Result<Formula, ExtractError> {
    net.validate()?;
    let combs = simple_layers(net, Aggregation::Max)?;
    let space = feature_space_overapprox(net, alphabet)?;

    let mut forms = base_formulas(&space.layers[0], alphabet);
    for (li, sc) in combs.iter().enumerate() {
        let prev: Vec<(&Vec<BigRational>, Arc<Formula>)> = space.layers[li]
            .iter()
            .map(|v| (v, forms[v].clone()))
            .collect();
        let dim = sc.in_dim();
        // One aggregate option per possible successor abstraction: either
        // no successors at all, or a componentwise maximum m̄ from the
        // closure. These cases are exhaustive on every graph.
        let leaf_case: Vec<Arc<Formula>> = prev
            .iter()
            .map(|(_, f)| Arc::new(Formula::Box(Arc::new(Formula::Not(f.clone())))))
            .collect();
        let mut options: Vec<(Vec<BigRational>, Arc<Formula>)> =
            vec![(zero_vec(dim), and_chain(&leaf_case))];
        for m in &max_closure(&space.layers[li], li + 1)? {
            let below: Vec<usize> = prev
                .iter()
                .enumerate()
                .filter(|(_, (v, _))| v.iter().zip(m.iter()).all(|(a, b)| a <= b))
                .map(|(i, _)| i)
                .collect();
            let below_formula = or_chain(
                &below.iter().map(|&i| prev[i].1.clone()).collect::<Vec<_>>(),
            );
            let mut conj = vec![Arc::new(Formula::Box(below_formula))];
            for j in 0..dim {
                let witnesses: Vec<Arc<Formula>> = below
                    .iter()
                    .filter(|&&i| prev[i].0[j] == m[j])
                    .map(|&i| prev[i].1.clone())
                    .collect();
                conj.push(Arc::new(Formula::Dia(or_chain(&witnesses))));
            }
            options.push((m.clone(), and_chain(&conj)));
        }
        let mut buckets: BTreeMap<Vec<BigRational>, Vec<Arc<Formula>>> = BTreeMap::new();
        for (own, own_formula) in &prev {
            let images: Vec<Vec<BigRational>> = options
                .iter()
                .map(|(agg, _)| sc.apply(own, agg))
                .collect::<Result<_, _>>()?;
            if images.iter().all(|x| *x == images[0]) {
                // The layer map ignores the aggregate for this vector; the
                // case split over successor abstractions is a tautology.
                buckets
                    .entry(images[0].clone())
                    .or_default()
                    .push(own_formula.clone());
            } else {
                for ((_, case_formula), image) in options.iter().zip(images) {
                    buckets
                        .entry(image)
                        .or_default()
                        .push(and2(own_formula, case_formula));
                }
            }
        }
        forms = space.layers[li + 1]
            .iter()
            .map(|x| {
                let disjuncts = buckets.remove(x).unwrap_or_default();
                (x.clone(), or_chain(&disjuncts))
            })
            .collect();
    }
    accepted_disjunction(net, space.layers.last().expect("input layer present"), &forms)
}

/// ⋁ of the formulas of the accepted output vectors.
fn accepted_disjunction(
    net: &Gnn<BigRational>,
    outputs: &BTreeSet<Vec<BigRational>>,
    forms: &BTreeMap<Vec<BigRational>, Arc<Formula>>,
) -> Result<Formula, ExtractError> {
    let mut accepted = Vec::new();
    for x in outputs {
        if net.cls.accepts(x)? {
            accepted.push(forms[x].clone());
        }
    }
    Ok((*or_chain(&accepted)).clone())
}

/// Folds ⊤/⊥ through the connectives: ¬⊤, ¬⊥, conjunction and disjunction
/// units and zeros, ⋄⊥, □⊤, and the constant counting thresholds ⋄^{≥0}φ
/// and ⋄^{=k}⊥. Ratio diamonds are left alone apart from their subformula:
/// their leaf conventions make ⋄̇ of a constant non-constant. The result is
/// equivalent to the input on every graph, and sharing is preserved.
pub fn propagate_consts(f: &Formula) -> Formula {
    let mut memo: HashMap<*const Formula, Arc<Formula>> = HashMap::new();
    (*simplify(f, &mut memo)).clone()
}

fn simplify(f: &Formula, memo: &mut HashMap<*const Formula, Arc<Formula>>) -> Arc<Formula> {
    if let Some(hit) = memo.get(&(f as *const Formula)) {
        return hit.clone();
    }
    let out: Arc<Formula> = match f {
        Formula::Top | Formula::Bottom | Formula::Atom(_) => Arc::new(f.clone()),
        Formula::Not(i) => {
            let c = simplify(i, memo);
            match &*c {
                Formula::Top => Arc::new(Formula::Bottom),
                Formula::Bottom => Arc::new(Formula::Top),
                _ => rewrap(f, i, c, Formula::Not),
            }
        }
        Formula::Or(l, r) => {
            let cl = simplify(l, memo);
            let cr = simplify(r, memo);
            match (&*cl, &*cr) {
                (Formula::Top, _) | (_, Formula::Top) => Arc::new(Formula::Top),
                (Formula::Bottom, _) => cr,
                (_, Formula::Bottom) => cl,
                _ => {
                    if Arc::ptr_eq(&cl, l) && Arc::ptr_eq(&cr, r) {
                        Arc::new(f.clone())
                    } else {
                        Arc::new(Formula::Or(cl, cr))
                    }
                }
            }
        }
        Formula::And(l, r) => {
            let cl = simplify(l, memo);
            let cr = simplify(r, memo);
            match (&*cl, &*cr) {
                (Formula::Bottom, _) | (_, Formula::Bottom) => Arc::new(Formula::Bottom),
                (Formula::Top, _) => cr,
                (_, Formula::Top) => cl,
                _ => {
                    if Arc::ptr_eq(&cl, l) && Arc::ptr_eq(&cr, r) {
                        Arc::new(f.clone())
                    } else {
                        Arc::new(Formula::And(cl, cr))
                    }
                }
            }
        }
        Formula::Dia(i) => {
            let c = simplify(i, memo);
            match &*c {
                Formula::Bottom => Arc::new(Formula::Bottom),
                _ => rewrap(f, i, c, Formula::Dia),
            }
        }
        Formula::Box(i) => {
            let c = simplify(i, memo);
            match &*c {
                Formula::Top => Arc::new(Formula::Top),
                _ => rewrap(f, i, c, Formula::Box),
            }
        }
        Formula::GDia { rel, count, inner } => {
            let c = simplify(inner, memo);
            match (rel, count, &*c) {
                (CountRel::Geq, 0, _) => Arc::new(Formula::Top),
                (CountRel::Geq, _, Formula::Bottom) => Arc::new(Formula::Bottom),
                (CountRel::Eq, 0, Formula::Bottom) => Arc::new(Formula::Top),
                (CountRel::Eq, _, Formula::Bottom) => Arc::new(Formula::Bottom),
                _ => {
                    if Arc::ptr_eq(&c, inner) {
                        Arc::new(f.clone())
                    } else {
                        Arc::new(Formula::GDia {
                            rel: *rel,
                            count: *count,
                            inner: c,
                        })
                    }
                }
            }
        }
        Formula::RDia { rel, ratio, inner } => {
            let c = simplify(inner, memo);
            if Arc::ptr_eq(&c, inner) {
                Arc::new(f.clone())
            } else {
                Arc::new(Formula::RDia {
                    rel: *rel,
                    ratio: ratio.clone(),
                    inner: c,
                })
            }
        }
    };
    memo.insert(f as *const Formula, out.clone());
    out
}

/// Rebuilds a unary node, reusing the original when the child is unchanged.
fn rewrap(
    original: &Formula,
    old: &Arc<Formula>,
    new: Arc<Formula>,
    make: fn(Arc<Formula>) -> Formula,
) -> Arc<Formula> {
    if Arc::ptr_eq(&new, old) {
        Arc::new(original.clone())
    } else {
        Arc::new(make(new))
    }
}
