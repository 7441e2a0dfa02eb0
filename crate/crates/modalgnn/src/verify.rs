//! Differential and exhaustive equivalence checking between formulas and
//! networks, invariance checks, perturbation experiments, and
//! compile/extract round-trips.
//!
//! The central operation is [`equiv_exhaustive`]: it evaluates two
//! classifiers (each a formula or a network over a shared alphabet) on every
//! pointed labeled graph up to a size bound and reports either equivalence or
//! the first disagreement in enumeration order. The sweep always covers the
//! full enumeration; the stream is sharded across worker threads and the
//! verdict is reduced in enumeration order afterwards, so results are
//! deterministic regardless of scheduling.
//!
//! Exhaustive enumeration grows as 2^(k²), so the checker is guarded by an
//! [`EquivGuard`] (two labels and three vertices by default, configurable
//! via [`equiv_exhaustive_with`]). Exceeding the guard is reported as a
//! verdict, not an error, so pipelines that may blow up degrade gracefully.
//!
//! Whenever a network with a threshold classifier is involved, the verdict
//! also carries the minimum decision margin seen across the whole run: the
//! smallest distance between the classified channel and its threshold.
//! Equivalence of floating-point runs should be read through
//! [`Verdict::float_equivalent`], which demands a margin above
//! [`FLOAT_MARGIN`] on top of agreement, surfacing borderline runs instead
//! of silently passing them.

use std::time::{Duration, Instant};

use num::rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::compile::{compile_gml_sum, compile_ml_max, compile_rml_bounded, CompileError};
use crate::extract::{extract_gml, extract_ml, extract_rml, ExtractError};
use crate::gnn::{
    Activation, Aggregation, BuiltinComb, Classifier, Comb, EvaluationTrace, Gnn, GnnError,
};
use crate::graph::transform::{
    enumerate_graphs, n_extend, random_pointed, scale, unravel, TransformError,
};
use crate::graph::{Graph, GraphError};
use crate::logic::check::check_all;
use crate::logic::{Formula, LogicError};
use crate::oracle::NegationOracle;
use crate::scalar::Scalar;

/// Margin below which a threshold comparison counts as borderline: float
/// runs are only accepted as equivalent when every decision clears this.
pub const FLOAT_MARGIN: f64 = 1e-9;

/// Number of random pointed graphs in the large-graph sweep of the modal
/// round-trip pipeline.
const RANDOM_SWEEP_TRIALS: u64 = 200;

/// Size bound for the random large-graph sweep.
const RANDOM_SWEEP_MAX_SIZE: usize = 8;

/// Base seed of the random large-graph sweep (trial t uses base + t).
const RANDOM_SWEEP_SEED: u64 = 271_828;

/// Errors from the verification operations.
#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("{0} requires mean aggregation in every layer")]
    NeedsMean(&'static str),
    #[error("the network is not continuous: {0}")]
    NotContinuous(String),
    #[error(transparent)]
    Gnn(#[from] GnnError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
}

/// Outcome of an equivalence run.
#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    /// Both sides agreed on every graph checked.
    Equivalent,
    /// The first graph (in enumeration or sampling order) where the sides
    /// disagree, with both verdicts at its point.
    Counterexample { graph: Graph, lhs: bool, rhs: bool },
    /// The run was refused or cut short by a resource guard.
    GuardExceeded(String),
}

/// Result of an equivalence run: the outcome, how many pointed graphs were
/// confirmed, wall-clock time, and the minimum decision margin observed
/// (present whenever a threshold-classified network took part).
#[derive(Debug, Clone)]
pub struct Verdict {
    pub status: Status,
    pub graphs_checked: u64,
    pub elapsed: Duration,
    pub min_margin: Option<f64>,
}

impl Verdict {
    /// Whether the run established agreement on everything it checked.
    pub fn is_equivalent(&self) -> bool {
        matches!(self.status, Status::Equivalent)
    }

    /// Equivalence under the floating-point reading: agreement everywhere
    /// and every decision cleared the threshold by more than
    /// [`FLOAT_MARGIN`]. Runs without margin data reduce to agreement.
    pub fn float_equivalent(&self) -> bool {
        self.is_equivalent() && self.min_margin.map_or(true, |m| m > FLOAT_MARGIN)
    }

    /// Wire representation of the verdict; counterexample graphs use the
    /// graph JSON format.
    pub fn to_json(&self) -> serde_json::Value {
        let mut obj = serde_json::Map::new();
        match &self.status {
            Status::Equivalent => {
                obj.insert("status".into(), "equivalent".into());
            }
            Status::Counterexample { graph, lhs, rhs } => {
                obj.insert("status".into(), "counterexample".into());
                obj.insert(
                    "counterexample".into(),
                    serde_json::json!({
                        "graph": graph.to_json(),
                        "lhs": lhs,
                        "rhs": rhs,
                    }),
                );
            }
            Status::GuardExceeded(reason) => {
                obj.insert("status".into(), "guard-exceeded".into());
                obj.insert("reason".into(), reason.as_str().into());
            }
        }
        obj.insert("graphs_checked".into(), self.graphs_checked.into());
        obj.insert(
            "elapsed_ms".into(),
            serde_json::json!(self.elapsed.as_secs_f64() * 1e3),
        );
        if let Some(m) = self.min_margin {
            obj.insert("min_margin".into(), serde_json::json!(m));
        }
        serde_json::Value::Object(obj)
    }
}

/// Resource guard for exhaustive enumeration. The defaults keep runs in
/// seconds; raising them is the caller's deliberate choice.
#[derive(Debug, Clone, Copy)]
pub struct EquivGuard {
    /// Largest alphabet the enumeration accepts.
    pub max_alphabet: usize,
    /// Largest graph size the enumeration accepts.
    pub max_size: usize,
}

impl Default for EquivGuard {
    fn default() -> Self {
        EquivGuard {
            max_alphabet: 2,
            max_size: 3,
        }
    }
}

/// One side of an equivalence check.
#[derive(Clone, Copy)]
pub enum EquivSide<'a, S> {
    Formula(&'a Formula),
    Net(&'a Gnn<S>),
}

/// Checks `lhs` against `rhs` on every pointed graph over `alphabet` with at
/// most `n` vertices, under the default [`EquivGuard`].
pub fn equiv_exhaustive<S: Scalar>(
    lhs: EquivSide<'_, S>,
    rhs: EquivSide<'_, S>,
    alphabet: &[String],
    n: usize,
) -> Result<Verdict, VerifyError> {
    equiv_exhaustive_with(lhs, rhs, alphabet, n, &EquivGuard::default())
}

/// [`equiv_exhaustive`] with an explicit guard.
///
/// Every unpointed graph is evaluated once and compared at all of its
/// vertices, each vertex standing for one pointed graph. On equivalence,
/// `graphs_checked` is the total number of pointed graphs; on disagreement it
/// counts pointed graphs up to and including the counterexample. The margin
/// is collected over the full sweep either way.
pub fn equiv_exhaustive_with<S: Scalar>(
    lhs: EquivSide<'_, S>,
    rhs: EquivSide<'_, S>,
    alphabet: &[String],
    n: usize,
    guard: &EquivGuard,
) -> Result<Verdict, VerifyError> {
    let start = Instant::now();
    let refuse = |reason: String| Verdict {
        status: Status::GuardExceeded(reason),
        graphs_checked: 0,
        elapsed: start.elapsed(),
        min_margin: None,
    };
    if alphabet.len() > guard.max_alphabet {
        return Ok(refuse(format!(
            "alphabet has {} labels, the enumeration guard allows {}",
            alphabet.len(),
            guard.max_alphabet
        )));
    }
    if n > guard.max_size {
        return Ok(refuse(format!(
            "size bound {} exceeds the enumeration guard {}",
            n, guard.max_size
        )));
    }

    let graphs: Vec<Graph> = enumerate_graphs(alphabet, n).collect();
    // (pointings, first per-vertex disagreement, margin) per unpointed graph.
    type GraphReport = (u64, Option<(usize, bool, bool)>, Option<f64>);
    let reports: Vec<GraphReport> = graphs
        .par_iter()
        .map(|g| -> Result<GraphReport, VerifyError> {
            let (lv, lm) = side_eval(&lhs, g)?;
            let (rv, rm) = side_eval(&rhs, g)?;
            let disagreement = lv
                .iter()
                .zip(&rv)
                .position(|(a, b)| a != b)
                .map(|v| (v, lv[v], rv[v]));
            Ok((g.vertex_count() as u64, disagreement, merge_min(lm, rm)))
        })
        .collect::<Result<_, _>>()?;

    let mut checked = 0u64;
    let mut status = Status::Equivalent;
    let mut min_margin = None;
    for (g, (pointings, disagreement, margin)) in graphs.iter().zip(&reports) {
        min_margin = merge_min(min_margin, *margin);
        if !matches!(status, Status::Equivalent) {
            continue;
        }
        match disagreement {
            Some((v, l, r)) => {
                checked += *v as u64 + 1;
                status = Status::Counterexample {
                    graph: g.pointed_at(*v),
                    lhs: *l,
                    rhs: *r,
                };
            }
            None => checked += pointings,
        }
    }
    Ok(Verdict {
        status,
        graphs_checked: checked,
        elapsed: start.elapsed(),
        min_margin,
    })
}

/// Per-vertex verdicts of one side on one graph, plus the smallest threshold
/// distance for network sides.
fn side_eval<S: Scalar>(
    side: &EquivSide<'_, S>,
    g: &Graph,
) -> Result<(Vec<bool>, Option<f64>), VerifyError> {
    match side {
        EquivSide::Formula(f) => Ok((check_all(g, f)?, None)),
        EquivSide::Net(net) => {
            let trace = run(net, g)?;
            let outs = trace.outputs();
            let verdicts = outs
                .iter()
                .map(|row| net.cls.accepts(row))
                .collect::<Result<Vec<_>, _>>()?;
            let margin = match &net.cls {
                Classifier::Threshold { index, c, .. } => {
                    let t = f64::from_rat(c);
                    Some(
                        outs.iter()
                            .map(|row| (row[*index - 1].as_f64() - t).abs())
                            .fold(f64::INFINITY, f64::min),
                    )
                }
                Classifier::IrrationalityTest { .. } => None,
            };
            Ok((verdicts, margin))
        }
    }
}

fn merge_min(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Evaluates the network, supplying a fresh negation oracle when one is
/// needed.
fn run<S: Scalar>(net: &Gnn<S>, g: &Graph) -> Result<EvaluationTrace<S>, GnnError> {
    if net.uses_oracle() {
        let mut oracle = NegationOracle::new();
        net.evaluate(g, Some(&mut oracle))
    } else {
        net.evaluate(g, None)
    }
}

/// Which model transformation a network is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvarianceKind {
    /// Replace every vertex by `c` interconnected copies; mean networks must
    /// compute identical vectors on the copies.
    Scaling(usize),
    /// Unravel the graph at its point to a tree of depth equal to the layer
    /// count; every network must compute identical vectors at the roots.
    Unraveling,
}

/// Checks that the network's features are unchanged under the given
/// transformation of `g`, comparing exactly.
///
/// Scaling compares the final layer at every copy `(v,i)` of every vertex
/// and is only meaningful for mean aggregation (requested on anything else
/// it errors). Unraveling compares every layer ℓ at the root of the
/// depth-ℓ-sufficient unraveling against the original point.
pub fn check_invariance<S: Scalar>(
    net: &Gnn<S>,
    g: &Graph,
    kind: InvarianceKind,
) -> Result<bool, VerifyError> {
    match kind {
        InvarianceKind::Scaling(c) => {
            require_mean(net, "the scaling invariance check")?;
            scaling_matches(net, g, c)
        }
        InvarianceKind::Unraveling => unraveling_matches(net, g),
    }
}

fn scaling_matches<S: Scalar>(net: &Gnn<S>, g: &Graph, c: usize) -> Result<bool, VerifyError> {
    let h = scale(g, c)?;
    let tg = run(net, g)?;
    let th = run(net, &h)?;
    let original = tg.outputs();
    let scaled = th.outputs();
    for v in 0..g.vertex_count() {
        for i in 1..=c {
            let copy = h.resolve(&format!("({},{})", g.vertex_name(v), i))?;
            if original[v] != scaled[copy] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn unraveling_matches<S: Scalar>(net: &Gnn<S>, g: &Graph) -> Result<bool, VerifyError> {
    let p = g.require_point()?;
    let depth = net.layers.len();
    let t = unravel(g, p, depth)?;
    let root = t.require_point()?;
    let tg = run(net, g)?;
    let tt = run(net, &t)?;
    for layer in 0..=depth {
        if tg.values[layer][p] != tt.values[layer][root] {
            return Ok(false);
        }
    }
    Ok(true)
}

fn require_mean<S: Scalar>(net: &Gnn<S>, op: &'static str) -> Result<(), VerifyError> {
    if net.layers.iter().all(|l| l.agg == Aggregation::Mean) {
        Ok(())
    } else {
        Err(VerifyError::NeedsMean(op))
    }
}

/// Rejects networks whose vertex maps are not continuous: anything applying
/// the step activation or the negation oracle.
fn require_continuous<S: Scalar>(net: &Gnn<S>) -> Result<(), VerifyError> {
    if net.uses_oracle() {
        return Err(VerifyError::NotContinuous(
            "the negation oracle is applied".to_string(),
        ));
    }
    for (idx, layer) in net.layers.iter().enumerate() {
        let activations: Vec<Activation> = match &layer.comb {
            Comb::Simple(c) => vec![c.activation],
            // Channelwise recipes are affine once the oracle is excluded.
            Comb::Builtin(BuiltinComb::Channelwise { .. }) => Vec::new(),
            Comb::Builtin(BuiltinComb::CollapseLeafPipeline { combs, .. })
            | Comb::Builtin(BuiltinComb::CollapseRootPipeline { combs }) => {
                combs.iter().map(|c| c.activation).collect()
            }
        };
        if activations.contains(&Activation::Step) {
            return Err(VerifyError::NotContinuous(format!(
                "layer {} applies the step activation",
                idx + 1
            )));
        }
    }
    Ok(())
}

/// Distances measured for one scaling factor.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ScaleReport {
    pub scale: usize,
    /// Max-norm distance at the point per trial.
    pub distances: Vec<f64>,
    pub max: f64,
    pub median: f64,
}

/// Outcome of a perturbation experiment. Report only: how far the final
/// feature vector at the point moves when the scaled graph gains up to
/// `extension_bound` fresh random successors per vertex.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PerturbationReport {
    pub extension_bound: usize,
    pub trials: usize,
    pub per_scale: Vec<ScaleReport>,
}

/// For each factor `c` in `scales`, evaluates the network on `scale(g, c)`
/// and on `trials` random extensions of it (at most `n` fresh successors per
/// vertex) and records the max-norm distance of the final vectors at the
/// point. Requires a mean network with continuous activations; for those,
/// larger `c` should damp the distances, but no threshold is enforced here.
/// Deterministic for a fixed seed.
pub fn perturbation_experiment<S: Scalar>(
    net: &Gnn<S>,
    g: &Graph,
    n: usize,
    scales: &[usize],
    trials: usize,
    seed: u64,
) -> Result<PerturbationReport, VerifyError> {
    require_mean(net, "the perturbation experiment")?;
    require_continuous(net)?;
    g.require_point()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per_scale = Vec::with_capacity(scales.len());
    for &c in scales {
        let h = scale(g, c)?;
        let p = h.require_point()?;
        let base = run(net, &h)?;
        let base_out = &base.outputs()[p];
        let mut distances = Vec::with_capacity(trials);
        for _ in 0..trials {
            let extended = n_extend(&h, n, rng.gen())?;
            let trace = run(net, &extended)?;
            let out = &trace.outputs()[p];
            let d = base_out
                .iter()
                .zip(out)
                .map(|(x, y)| x.sub(y).as_f64().abs())
                .fold(0.0, f64::max);
            distances.push(d);
        }
        let max = distances.iter().copied().fold(0.0, f64::max);
        let median = median(&distances);
        per_scale.push(ScaleReport {
            scale: c,
            distances,
            max,
            median,
        });
    }
    Ok(PerturbationReport {
        extension_bound: n,
        trials,
        per_scale,
    })
}

fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    }
}

/// A compile-then-extract pipeline: which translation pair to exercise and,
/// for the bounded ones, the size bound shared by compilation, extraction,
/// and the equivalence sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pipeline {
    /// Ratio formulas through a mean network, valid on graphs of at most the
    /// given size.
    Rml(usize),
    /// Graded formulas through a sum network, extraction bounded by the
    /// given size.
    Gml(usize),
    /// Modal formulas through a max network, uniform on both legs; checked
    /// exhaustively on small graphs and by a seeded random sweep of larger
    /// ones.
    Ml,
}

/// Compiles `f`, extracts a formula back from the network, and checks the
/// two formulas for equivalence. Extraction running into its feature-space
/// guard yields a guard-exceeded verdict rather than an error.
pub fn roundtrip(
    f: &Formula,
    pipeline: Pipeline,
    alphabet: &[String],
) -> Result<Verdict, VerifyError> {
    let start = Instant::now();
    let finish = |mut v: Verdict| {
        v.elapsed = start.elapsed();
        v
    };
    let guard_verdict = |e: ExtractError| Verdict {
        status: Status::GuardExceeded(e.to_string()),
        graphs_checked: 0,
        elapsed: start.elapsed(),
        min_margin: None,
    };

    let bounded = |n: usize,
                   back: Result<Formula, ExtractError>|
     -> Result<Verdict, VerifyError> {
        let back = match back {
            Ok(b) => b,
            Err(e @ ExtractError::Blowup { .. }) => return Ok(guard_verdict(e)),
            Err(e) => return Err(e.into()),
        };
        let guard = EquivGuard {
            max_size: n,
            ..EquivGuard::default()
        };
        let v = equiv_exhaustive_with::<BigRational>(
            EquivSide::Formula(f),
            EquivSide::Formula(&back),
            alphabet,
            n,
            &guard,
        )?;
        Ok(finish(v))
    };

    match pipeline {
        Pipeline::Rml(n) => {
            let net = compile_rml_bounded(f, alphabet, n)?;
            bounded(n, extract_rml(&net, alphabet, n))
        }
        Pipeline::Gml(n) => {
            let net = compile_gml_sum(f, alphabet)?;
            bounded(n, extract_gml(&net, alphabet, n))
        }
        Pipeline::Ml => {
            let net = compile_ml_max(f, alphabet)?;
            let back = match extract_ml(&net, alphabet) {
                Ok(b) => b,
                Err(e @ ExtractError::Blowup { .. }) => return Ok(guard_verdict(e)),
                Err(e) => return Err(e.into()),
            };
            let mut v = equiv_exhaustive::<BigRational>(
                EquivSide::Formula(f),
                EquivSide::Formula(&back),
                alphabet,
                EquivGuard::default().max_size,
            )?;
            if !v.is_equivalent() {
                return Ok(finish(v));
            }
            for t in 0..RANDOM_SWEEP_TRIALS {
                let g = random_pointed(
                    alphabet,
                    RANDOM_SWEEP_MAX_SIZE,
                    RANDOM_SWEEP_SEED.wrapping_add(t),
                );
                let p = g.require_point()?;
                let at_lhs = check_all(&g, f)?[p];
                let at_rhs = check_all(&g, &back)?[p];
                v.graphs_checked += 1;
                if at_lhs != at_rhs {
                    v.status = Status::Counterexample {
                        graph: g,
                        lhs: at_lhs,
                        rhs: at_rhs,
                    };
                    return Ok(finish(v));
                }
            }
            Ok(finish(v))
        }
    }
}
