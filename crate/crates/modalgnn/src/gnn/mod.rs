//! The graph neural network model and its evaluator.
//!
//! A network is a stack of aggregate-combine layers over one scalar domain:
//! at every layer each vertex aggregates its successors' feature vectors
//! (mean, sum, or max; the empty multiset aggregates to the zero vector) and
//! combines the result with its own vector. Simple combination functions are
//! `act(x̄·C + ā·A + b̄)` in row-vector convention; builtin combination
//! functions cover the handful of closed-form maps the compilers need that
//! no single affine layer expresses (channelwise recipes with oracle calls,
//! and the two stages of the depth-2 tree collapse).
//!
//! Initial features are label indicators: channel k of vertex v is 1 exactly
//! when v carries the k-th label of the graph's alphabet, and channels past
//! the alphabet are 0. The input dimension must be at least the alphabet
//! size.
//!
//! Float evaluation is order-pinned for reproducibility: every accumulator
//! starts at the bias, adds own-feature terms in channel order, then
//! aggregate terms in channel order, skipping exact-zero weights; mean sums
//! in successor order before one final division. Two runs over the same
//! network and graph produce bit-identical traces.

pub mod collapse;
mod json;

pub use json::peek_scalar_kind;

use crate::graph::{Graph, GraphError};
use crate::oracle::{NegationOracle, OracleError};
use crate::scalar::{QuadExt, Scalar, ScalarError, ScalarKind};
use num::rational::BigRational;
use std::cmp::Ordering;

/// Errors from network construction, validation, or evaluation.
#[derive(Debug, thiserror::Error)]
pub enum GnnError {
    #[error("layer {layer}: expected input dimension {expected}, got {got}")]
    DimensionMismatch {
        layer: usize,
        expected: usize,
        got: usize,
    },
    #[error("layer {layer} is malformed: {detail}")]
    BadShape { layer: usize, detail: String },
    #[error("classifier index {index} is out of range for output dimension {dim} (indices are 1-based)")]
    ClassifierIndex { index: usize, dim: usize },
    #[error("input dimension {dim} is smaller than the label alphabet size {alphabet}")]
    AlphabetTooLarge { dim: usize, alphabet: usize },
    #[error("network applies the negation oracle but none was supplied")]
    OracleRequired,
    #[error("network JSON declares scalar domain `{declared}`, expected `{expected}`")]
    ScalarKindMismatch {
        declared: String,
        expected: ScalarKind,
    },
    #[error("malformed network JSON: {0}")]
    BadJson(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Componentwise activation function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    /// min(max(0, x), 1).
    TrRelu,
    /// max(0, x).
    Relu,
    /// 1 if x > 0 else 0.
    Step,
    /// Logistic function (float domain only).
    Sigmoid,
    Identity,
}

impl Activation {
    pub fn apply<S: Scalar>(&self, x: &S) -> Result<S, ScalarError> {
        Ok(match self {
            Activation::TrRelu => x.trrelu(),
            Activation::Relu => x.relu(),
            Activation::Step => x.step(),
            Activation::Sigmoid => x.sigmoid()?,
            Activation::Identity => x.clone(),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Activation::TrRelu => "trrelu",
            Activation::Relu => "relu",
            Activation::Step => "step",
            Activation::Sigmoid => "sigmoid",
            Activation::Identity => "identity",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "trrelu" => Activation::TrRelu,
            "relu" => Activation::Relu,
            "step" => Activation::Step,
            "sigmoid" => Activation::Sigmoid,
            "identity" => Activation::Identity,
            _ => return None,
        })
    }
}

/// Multiset aggregation over successor feature vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    Mean,
    Sum,
    Max,
}

impl Aggregation {
    pub fn name(&self) -> &'static str {
        match self {
            Aggregation::Mean => "mean",
            Aggregation::Sum => "sum",
            Aggregation::Max => "max",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "mean" => Aggregation::Mean,
            "sum" => Aggregation::Sum,
            "max" => Aggregation::Max,
            _ => return None,
        })
    }

    /// Aggregates the rows `prev[u]` for `u ∈ succs`; the empty multiset
    /// yields the zero vector in every mode.
    pub fn apply<S: Scalar>(&self, prev: &[Vec<S>], succs: &[usize], dim: usize) -> Vec<S> {
        if succs.is_empty() {
            return vec![S::zero(); dim];
        }
        let mut acc = prev[succs[0]].clone();
        for &u in &succs[1..] {
            for (a, x) in acc.iter_mut().zip(prev[u].iter()) {
                *a = match self {
                    Aggregation::Max => a.sup(x),
                    _ => a.add(x),
                };
            }
        }
        if *self == Aggregation::Mean {
            for a in acc.iter_mut() {
                *a = a.div_count(succs.len());
            }
        }
        acc
    }
}

/// `act(x̄·C + ā·A + b̄)`: x̄ is the vertex's own vector, ā the aggregate.
/// C and A have one row per input channel and one column per output channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleComb<S> {
    pub c: Vec<Vec<S>>,
    pub a: Vec<Vec<S>>,
    pub b: Vec<S>,
    pub activation: Activation,
}

impl<S: Scalar> SimpleComb<S> {
    pub fn in_dim(&self) -> usize {
        self.c.len()
    }

    pub fn out_dim(&self) -> usize {
        self.b.len()
    }

    fn check_shape(&self) -> Result<(), String> {
        let out = self.b.len();
        if self.a.len() != self.c.len() {
            return Err(format!(
                "C has {} rows but A has {}",
                self.c.len(),
                self.a.len()
            ));
        }
        for (i, row) in self.c.iter().enumerate() {
            if row.len() != out {
                return Err(format!("C row {} has {} columns, expected {}", i, row.len(), out));
            }
        }
        for (i, row) in self.a.iter().enumerate() {
            if row.len() != out {
                return Err(format!("A row {} has {} columns, expected {}", i, row.len(), out));
            }
        }
        if out == 0 {
            return Err("output dimension is zero".to_string());
        }
        Ok(())
    }

    /// Order-pinned application: bias, then own terms by channel, then
    /// aggregate terms by channel, zero weights skipped.
    pub fn apply(&self, own: &[S], agg: &[S]) -> Result<Vec<S>, ScalarError> {
        let out = self.out_dim();
        let mut result = Vec::with_capacity(out);
        for k in 0..out {
            let mut acc = self.b[k].clone();
            for (i, x) in own.iter().enumerate() {
                let w = &self.c[i][k];
                if !w.is_zero() {
                    acc = acc.add(&x.mul(w));
                }
            }
            for (i, y) in agg.iter().enumerate() {
                let w = &self.a[i][k];
                if !w.is_zero() {
                    acc = acc.add(&y.mul(w));
                }
            }
            result.push(self.activation.apply(&acc)?);
        }
        Ok(result)
    }
}

/// One output channel of a channelwise builtin combination function.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelRecipe<S> {
    /// A constant.
    Const(S),
    /// `scale · own[src] + offset` (affine-to-range map).
    AffineOwn { src: usize, scale: S, offset: S },
    /// `(own[i] + own[j]) / 2`.
    AvgOwn { i: usize, j: usize },
    /// `own[src]`.
    ProjOwn { src: usize },
    /// `agg[src]`.
    ProjAgg { src: usize },
    /// `f(own[src])` for the negation oracle f.
    OracleOwn { src: usize },
}

impl<S: Scalar> ChannelRecipe<S> {
    fn max_index(&self) -> Option<usize> {
        match self {
            ChannelRecipe::Const(_) => None,
            ChannelRecipe::AffineOwn { src, .. }
            | ChannelRecipe::ProjOwn { src }
            | ChannelRecipe::ProjAgg { src }
            | ChannelRecipe::OracleOwn { src } => Some(*src),
            ChannelRecipe::AvgOwn { i, j } => Some(*i.max(j)),
        }
    }

    fn apply(
        &self,
        own: &[S],
        agg: &[S],
        oracle: Option<&mut NegationOracle>,
    ) -> Result<S, GnnError> {
        Ok(match self {
            ChannelRecipe::Const(v) => v.clone(),
            ChannelRecipe::AffineOwn { src, scale, offset } => {
                own[*src].mul(scale).add(offset)
            }
            ChannelRecipe::AvgOwn { i, j } => own[*i].add(&own[*j]).div_count(2),
            ChannelRecipe::ProjOwn { src } => own[*src].clone(),
            ChannelRecipe::ProjAgg { src } => agg[*src].clone(),
            ChannelRecipe::OracleOwn { src } => {
                let q = own[*src]
                    .to_quad()
                    .ok_or(ScalarError::UnsupportedOracle {
                        domain: "non-quadratic scalar",
                    })?;
                let oracle = oracle.ok_or(GnnError::OracleRequired)?;
                let image = oracle.apply(&q)?;
                S::from_quad(&image).expect("oracle output embeds in an oracle-capable domain")
            }
        })
    }
}

/// Closed-form combination functions used where a single affine layer does
/// not suffice.
#[derive(Debug, Clone, PartialEq)]
pub enum BuiltinComb<S> {
    /// Each output channel is computed by its own recipe.
    Channelwise {
        in_dim: usize,
        recipes: Vec<ChannelRecipe<S>>,
    },
    /// First collapse stage: replays a full layer stack against the stored
    /// leaf trajectories, keyed by the aggregated fraction in channel 0, and
    /// concatenates every intermediate vector. `plus[ℓ]`/`minus[ℓ]` are the
    /// layer-ℓ vectors of a labeled/unlabeled leaf.
    CollapseLeafPipeline {
        combs: Vec<SimpleComb<S>>,
        plus: Vec<Vec<S>>,
        minus: Vec<Vec<S>>,
    },
    /// Second collapse stage: replays the stack at an unlabeled vertex,
    /// feeding slice ℓ of the aggregated concatenation as the layer-(ℓ+1)
    /// aggregate.
    CollapseRootPipeline { combs: Vec<SimpleComb<S>> },
}

impl<S: Scalar> BuiltinComb<S> {
    pub fn in_dim(&self) -> usize {
        match self {
            BuiltinComb::Channelwise { in_dim, .. } => *in_dim,
            BuiltinComb::CollapseLeafPipeline { combs, .. } => combs[0].in_dim(),
            BuiltinComb::CollapseRootPipeline { combs } => {
                combs.iter().map(|c| c.out_dim()).sum()
            }
        }
    }

    pub fn out_dim(&self) -> usize {
        match self {
            BuiltinComb::Channelwise { recipes, .. } => recipes.len(),
            BuiltinComb::CollapseLeafPipeline { combs, .. } => {
                combs.iter().map(|c| c.out_dim()).sum()
            }
            BuiltinComb::CollapseRootPipeline { combs } => {
                combs.last().map(|c| c.out_dim()).unwrap_or(0)
            }
        }
    }

    fn check_shape(&self) -> Result<(), String> {
        match self {
            BuiltinComb::Channelwise { in_dim, recipes } => {
                if recipes.is_empty() {
                    return Err("channelwise combination has no recipes".to_string());
                }
                for (k, r) in recipes.iter().enumerate() {
                    if let Some(src) = r.max_index() {
                        if src >= *in_dim {
                            return Err(format!(
                                "recipe for channel {} references channel {} of {}",
                                k, src, in_dim
                            ));
                        }
                    }
                }
                Ok(())
            }
            BuiltinComb::CollapseLeafPipeline { combs, plus, minus } => {
                check_pipeline(combs)?;
                if plus.len() != combs.len() || minus.len() != combs.len() {
                    return Err("one leaf trajectory entry per stacked layer required".to_string());
                }
                for (l, comb) in combs.iter().enumerate() {
                    if plus[l].len() != comb.in_dim() || minus[l].len() != comb.in_dim() {
                        return Err(format!(
                            "leaf trajectory {} has the wrong dimension",
                            l
                        ));
                    }
                }
                Ok(())
            }
            BuiltinComb::CollapseRootPipeline { combs } => check_pipeline(combs),
        }
    }

    fn apply(
        &self,
        own: &[S],
        agg: &[S],
        mut oracle: Option<&mut NegationOracle>,
    ) -> Result<Vec<S>, GnnError> {
        match self {
            BuiltinComb::Channelwise { recipes, .. } => {
                let mut out = Vec::with_capacity(recipes.len());
                for r in recipes {
                    out.push(r.apply(own, agg, oracle.as_deref_mut())?);
                }
                Ok(out)
            }
            BuiltinComb::CollapseLeafPipeline { combs, plus, minus } => {
                // Aggregated channel 0 is the fraction of labeled leaf
                // children; blend the two stored trajectories with it.
                let y = agg[0].clone();
                let co_y = S::one().sub(&y);
                let blend = |l: usize| -> Vec<S> {
                    plus[l]
                        .iter()
                        .zip(minus[l].iter())
                        .map(|(p, m)| p.mul(&y).add(&m.mul(&co_y)))
                        .collect()
                };
                let mut out = Vec::new();
                let mut v = combs[0].apply(own, &blend(0))?;
                out.extend(v.iter().cloned());
                for (l, comb) in combs.iter().enumerate().skip(1) {
                    v = comb.apply(&v, &blend(l))?;
                    out.extend(v.iter().cloned());
                }
                Ok(out)
            }
            BuiltinComb::CollapseRootPipeline { combs } => {
                let d0 = combs[0].in_dim();
                let zeros = vec![S::zero(); d0];
                let mut u = combs[0].apply(&zeros, &zeros)?;
                let mut offset = 0;
                for comb in combs.iter().skip(1) {
                    let chunk_len = u.len();
                    let chunk = &agg[offset..offset + chunk_len];
                    offset += chunk_len;
                    u = comb.apply(&u, chunk)?;
                }
                Ok(u)
            }
        }
    }

    fn activations(&self) -> Vec<Activation> {
        match self {
            BuiltinComb::Channelwise { .. } => Vec::new(),
            BuiltinComb::CollapseLeafPipeline { combs, .. }
            | BuiltinComb::CollapseRootPipeline { combs } => {
                combs.iter().map(|c| c.activation).collect()
            }
        }
    }

    fn uses_oracle(&self) -> bool {
        matches!(self, BuiltinComb::Channelwise { recipes, .. }
            if recipes.iter().any(|r| matches!(r, ChannelRecipe::OracleOwn { .. })))
    }
}

fn check_pipeline<S: Scalar>(combs: &[SimpleComb<S>]) -> Result<(), String> {
    if combs.is_empty() {
        return Err("pipeline has no stacked layers".to_string());
    }
    for (l, comb) in combs.iter().enumerate() {
        comb.check_shape()
            .map_err(|e| format!("stacked layer {}: {}", l, e))?;
        if l > 0 && comb.in_dim() != combs[l - 1].out_dim() {
            return Err(format!(
                "stacked layer {} expects dimension {}, previous produces {}",
                l,
                comb.in_dim(),
                combs[l - 1].out_dim()
            ));
        }
    }
    Ok(())
}

/// A combination function of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Comb<S> {
    Simple(SimpleComb<S>),
    Builtin(BuiltinComb<S>),
}

impl<S: Scalar> Comb<S> {
    pub fn in_dim(&self) -> usize {
        match self {
            Comb::Simple(c) => c.in_dim(),
            Comb::Builtin(b) => b.in_dim(),
        }
    }

    pub fn out_dim(&self) -> usize {
        match self {
            Comb::Simple(c) => c.out_dim(),
            Comb::Builtin(b) => b.out_dim(),
        }
    }
}

/// One aggregate-combine layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer<S> {
    pub agg: Aggregation,
    pub comb: Comb<S>,
}

impl<S: Scalar> Layer<S> {
    pub fn simple(
        agg: Aggregation,
        c: Vec<Vec<S>>,
        a: Vec<Vec<S>>,
        b: Vec<S>,
        activation: Activation,
    ) -> Self {
        Layer {
            agg,
            comb: Comb::Simple(SimpleComb { c, a, b, activation }),
        }
    }
}

/// Comparison direction of a threshold classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdRel {
    Geq,
    Gt,
}

impl ThresholdRel {
    pub fn name(&self) -> &'static str {
        match self {
            ThresholdRel::Geq => ">=",
            ThresholdRel::Gt => ">",
        }
    }
}

/// The acceptance test applied to a vertex's final feature vector.
#[derive(Debug, Clone, PartialEq)]
pub enum Classifier {
    /// Accept iff channel `index` (1-based) relates to the rational `c`.
    Threshold {
        index: usize,
        rel: ThresholdRel,
        c: BigRational,
    },
    /// Accept iff channel `index` (1-based) has a positive √2-coefficient.
    IrrationalityTest { index: usize },
}

impl Classifier {
    pub fn index(&self) -> usize {
        match self {
            Classifier::Threshold { index, .. } | Classifier::IrrationalityTest { index } => {
                *index
            }
        }
    }

    pub fn accepts<S: Scalar>(&self, out: &[S]) -> Result<bool, GnnError> {
        match self {
            Classifier::Threshold { index, rel, c } => {
                let v = &out[*index - 1];
                let ord = v.cmp_rat(c)?;
                Ok(match rel {
                    ThresholdRel::Geq => ord != Ordering::Less,
                    ThresholdRel::Gt => ord == Ordering::Greater,
                })
            }
            Classifier::IrrationalityTest { index } => {
                let v: QuadExt = out[*index - 1].to_quad().ok_or(
                    ScalarError::UnsupportedIrrationalityTest {
                        domain: "non-quadratic scalar",
                    },
                )?;
                Ok(num::Signed::is_positive(&v.q))
            }
        }
    }
}

/// A classified graph neural network over scalar domain `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gnn<S> {
    pub input_dim: usize,
    pub layers: Vec<Layer<S>>,
    pub cls: Classifier,
}

/// All per-layer, per-vertex feature vectors of one evaluation.
/// `values[0]` holds the initial features; `values[ℓ]` the layer-ℓ output.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationTrace<S> {
    pub values: Vec<Vec<Vec<S>>>,
}

impl<S: Scalar> EvaluationTrace<S> {
    /// Final feature vectors, one per vertex.
    pub fn outputs(&self) -> &[Vec<S>] {
        self.values.last().expect("trace holds at least the input")
    }
}

/// Builds the 0/1 label-indicator features for every vertex, padded with
/// zeros up to `dim`.
pub fn initial_features<S: Scalar>(g: &Graph, dim: usize) -> Result<Vec<Vec<S>>, GnnError> {
    let alphabet = g.labels().len();
    if dim < alphabet {
        return Err(GnnError::AlphabetTooLarge { dim, alphabet });
    }
    let mut rows = Vec::with_capacity(g.vertex_count());
    for v in 0..g.vertex_count() {
        let mut row = vec![S::zero(); dim];
        for &l in g.label_bits(v) {
            row[l] = S::one();
        }
        rows.push(row);
    }
    Ok(rows)
}

impl<S: Scalar> Gnn<S> {
    /// Output dimension of the whole stack (the input dimension if there are
    /// no layers).
    pub fn out_dim(&self) -> usize {
        self.layers
            .last()
            .map(|l| l.comb.out_dim())
            .unwrap_or(self.input_dim)
    }

    /// Whether any layer applies the negation oracle.
    pub fn uses_oracle(&self) -> bool {
        self.layers.iter().any(|l| match &l.comb {
            Comb::Simple(_) => false,
            Comb::Builtin(b) => b.uses_oracle(),
        })
    }

    /// Checks dimension chaining, internal layer shapes, the classifier
    /// index, and that every activation and the classifier are supported on
    /// the scalar domain.
    pub fn validate(&self) -> Result<(), GnnError> {
        if self.input_dim == 0 {
            return Err(GnnError::BadShape {
                layer: 0,
                detail: "input dimension is zero".to_string(),
            });
        }
        let mut dim = self.input_dim;
        for (idx, layer) in self.layers.iter().enumerate() {
            let layer_no = idx + 1;
            let activations = match &layer.comb {
                Comb::Simple(c) => {
                    c.check_shape().map_err(|detail| GnnError::BadShape {
                        layer: layer_no,
                        detail,
                    })?;
                    vec![c.activation]
                }
                Comb::Builtin(b) => {
                    b.check_shape().map_err(|detail| GnnError::BadShape {
                        layer: layer_no,
                        detail,
                    })?;
                    b.activations()
                }
            };
            for act in activations {
                if act == Activation::Sigmoid && S::KIND != ScalarKind::Float64 {
                    return Err(GnnError::Scalar(ScalarError::UnsupportedActivation {
                        activation: "sigmoid",
                        domain: match S::KIND {
                            ScalarKind::Rational => "rational",
                            ScalarKind::Float64 => "float64",
                            ScalarKind::QuadExt => "quad_ext",
                        },
                    }));
                }
            }
            if let Comb::Builtin(b) = &layer.comb {
                if b.uses_oracle() && S::KIND != ScalarKind::QuadExt {
                    return Err(GnnError::Scalar(ScalarError::UnsupportedOracle {
                        domain: match S::KIND {
                            ScalarKind::Rational => "rational",
                            ScalarKind::Float64 => "float64",
                            ScalarKind::QuadExt => "quad_ext",
                        },
                    }));
                }
            }
            if layer.comb.in_dim() != dim {
                return Err(GnnError::DimensionMismatch {
                    layer: layer_no,
                    expected: dim,
                    got: layer.comb.in_dim(),
                });
            }
            dim = layer.comb.out_dim();
        }
        let idx = self.cls.index();
        if idx == 0 || idx > dim {
            return Err(GnnError::ClassifierIndex { index: idx, dim });
        }
        if matches!(self.cls, Classifier::IrrationalityTest { .. })
            && S::KIND != ScalarKind::QuadExt
        {
            return Err(GnnError::Scalar(ScalarError::UnsupportedIrrationalityTest {
                domain: match S::KIND {
                    ScalarKind::Rational => "rational",
                    ScalarKind::Float64 => "float64",
                    ScalarKind::QuadExt => "quad_ext",
                },
            }));
        }
        Ok(())
    }

    /// Runs the network on every vertex of `g`, returning the full trace.
    /// Networks that apply the negation oracle need one passed in.
    pub fn evaluate(
        &self,
        g: &Graph,
        mut oracle: Option<&mut NegationOracle>,
    ) -> Result<EvaluationTrace<S>, GnnError> {
        self.validate()?;
        let n = g.vertex_count();
        let mut values = Vec::with_capacity(self.layers.len() + 1);
        values.push(initial_features::<S>(g, self.input_dim)?);
        for layer in &self.layers {
            let prev = values.last().expect("trace never empty");
            let dim = layer.comb.in_dim();
            let mut next = Vec::with_capacity(n);
            for v in 0..n {
                let agg = layer.agg.apply(prev, g.successors(v), dim);
                let row = match &layer.comb {
                    Comb::Simple(c) => c.apply(&prev[v], &agg)?,
                    Comb::Builtin(b) => b.apply(&prev[v], &agg, oracle.as_deref_mut())?,
                };
                next.push(row);
            }
            values.push(next);
        }
        Ok(EvaluationTrace { values })
    }

    /// Per-vertex acceptance verdicts.
    pub fn classify(
        &self,
        g: &Graph,
        oracle: Option<&mut NegationOracle>,
    ) -> Result<Vec<bool>, GnnError> {
        let trace = self.evaluate(g, oracle)?;
        trace
            .outputs()
            .iter()
            .map(|row| self.cls.accepts(row))
            .collect()
    }

    /// Acceptance at the distinguished point.
    pub fn accepts_pointed(
        &self,
        g: &Graph,
        oracle: Option<&mut NegationOracle>,
    ) -> Result<bool, GnnError> {
        let p = g.require_point()?;
        Ok(self.classify(g, oracle)?[p])
    }
}

impl Gnn<BigRational> {
    /// Re-expresses exact rational weights in another scalar domain (e.g.
    /// `f64` for floating-point runs of a compiled network).
    pub fn map_scalars<T: Scalar>(&self) -> Gnn<T> {
        fn vec_to<T: Scalar>(xs: &[BigRational]) -> Vec<T> {
            xs.iter().map(T::from_rat).collect()
        }
        fn mat_to<T: Scalar>(m: &[Vec<BigRational>]) -> Vec<Vec<T>> {
            m.iter().map(|row| vec_to(row)).collect()
        }
        fn simple_to<T: Scalar>(c: &SimpleComb<BigRational>) -> SimpleComb<T> {
            SimpleComb {
                c: mat_to(&c.c),
                a: mat_to(&c.a),
                b: vec_to(&c.b),
                activation: c.activation,
            }
        }
        let layers = self
            .layers
            .iter()
            .map(|l| Layer {
                agg: l.agg,
                comb: match &l.comb {
                    Comb::Simple(c) => Comb::Simple(simple_to(c)),
                    Comb::Builtin(BuiltinComb::Channelwise { in_dim, recipes }) => {
                        Comb::Builtin(BuiltinComb::Channelwise {
                            in_dim: *in_dim,
                            recipes: recipes
                                .iter()
                                .map(|r| match r {
                                    ChannelRecipe::Const(v) => {
                                        ChannelRecipe::Const(T::from_rat(v))
                                    }
                                    ChannelRecipe::AffineOwn { src, scale, offset } => {
                                        ChannelRecipe::AffineOwn {
                                            src: *src,
                                            scale: T::from_rat(scale),
                                            offset: T::from_rat(offset),
                                        }
                                    }
                                    ChannelRecipe::AvgOwn { i, j } => {
                                        ChannelRecipe::AvgOwn { i: *i, j: *j }
                                    }
                                    ChannelRecipe::ProjOwn { src } => {
                                        ChannelRecipe::ProjOwn { src: *src }
                                    }
                                    ChannelRecipe::ProjAgg { src } => {
                                        ChannelRecipe::ProjAgg { src: *src }
                                    }
                                    ChannelRecipe::OracleOwn { src } => {
                                        ChannelRecipe::OracleOwn { src: *src }
                                    }
                                })
                                .collect(),
                        })
                    }
                    Comb::Builtin(BuiltinComb::CollapseLeafPipeline { combs, plus, minus }) => {
                        Comb::Builtin(BuiltinComb::CollapseLeafPipeline {
                            combs: combs.iter().map(simple_to).collect(),
                            plus: mat_to(plus),
                            minus: mat_to(minus),
                        })
                    }
                    Comb::Builtin(BuiltinComb::CollapseRootPipeline { combs }) => {
                        Comb::Builtin(BuiltinComb::CollapseRootPipeline {
                            combs: combs.iter().map(simple_to).collect(),
                        })
                    }
                },
            })
            .collect();
        Gnn {
            input_dim: self.input_dim,
            layers,
            cls: self.cls.clone(),
        }
    }
}
