//! Formula ASTs for the modal logics, plus the analyses the rest of the
//! system needs: fragment classification, modal depth, subformula
//! enumeration, threshold elimination, and alternation-free dualization.
//!
//! Children are `Arc`-shared: extraction builds heavily shared DAGs and the
//! model checker memoizes per node, so clones must be cheap.

pub mod check;
pub mod parse;

use num::rational::BigRational;
use num::{One, Zero};
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

/// Errors from parsing, analysis, and normalization.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LogicError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("ratio threshold {0} lies outside [0,1]")]
    RatioOutOfRange(String),
    #[error("formula mentions label `{0}` missing from the alphabet")]
    UnknownLabel(String),
    #[error("formula is not in the required fragment: {0}")]
    NotInFragment(&'static str),
    #[error("size bound must be at least 1")]
    BadBound,
}

/// Comparison for graded diamonds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CountRel {
    Geq,
    Eq,
}

/// Comparison for ratio diamonds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RatioRel {
    Geq,
    Gt,
    Eq,
}

/// A modal formula. `Box`, `And`, `Top`, `Bottom` and the `=`-threshold
/// diamonds are derived operators; they are first-class in the AST so that
/// parsing and printing round-trip, and are expanded by [`Formula::desugar_eq`]
/// and friends where a construction needs the primitive grammar.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Top,
    Bottom,
    Atom(String),
    Not(Arc<Formula>),
    Or(Arc<Formula>, Arc<Formula>),
    And(Arc<Formula>, Arc<Formula>),
    Dia(Arc<Formula>),
    Box(Arc<Formula>),
    GDia {
        rel: CountRel,
        count: u64,
        inner: Arc<Formula>,
    },
    RDia {
        rel: RatioRel,
        ratio: BigRational,
        inner: Arc<Formula>,
    },
}

/// Fragment membership and size measures of a formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragmentReport {
    pub modal_depth: usize,
    pub in_ml: bool,
    pub in_gml: bool,
    /// Largest grading needed: max n over ⋄^{≥n}, k+1 over ⋄^{=k}, 1 for ⋄.
    pub max_count: u64,
    pub in_rml: bool,
    pub in_afml1: bool,
    pub in_afml2: bool,
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Formula {
        Formula::Atom(name.into())
    }
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Arc::new(f))
    }
    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(Arc::new(l), Arc::new(r))
    }
    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Arc::new(l), Arc::new(r))
    }
    pub fn dia(f: Formula) -> Formula {
        Formula::Dia(Arc::new(f))
    }
    pub fn boxm(f: Formula) -> Formula {
        Formula::Box(Arc::new(f))
    }
    pub fn gdia(rel: CountRel, count: u64, f: Formula) -> Formula {
        Formula::GDia {
            rel,
            count,
            inner: Arc::new(f),
        }
    }
    /// Ratio diamonds require a threshold in [0,1].
    pub fn rdia(rel: RatioRel, ratio: BigRational, f: Formula) -> Result<Formula, LogicError> {
        if ratio < BigRational::zero() || ratio > BigRational::one() {
            return Err(LogicError::RatioOutOfRange(ratio.to_string()));
        }
        Ok(Formula::RDia {
            rel,
            ratio,
            inner: Arc::new(f),
        })
    }

    /// Conjunction of a list; empty list is ⊤.
    pub fn big_and(fs: impl IntoIterator<Item = Formula>) -> Formula {
        let mut it = fs.into_iter();
        match it.next() {
            None => Formula::Top,
            Some(first) => it.fold(first, Formula::and),
        }
    }

    /// Disjunction of a list; empty list is ⊥.
    pub fn big_or(fs: impl IntoIterator<Item = Formula>) -> Formula {
        let mut it = fs.into_iter();
        match it.next() {
            None => Formula::Bottom,
            Some(first) => it.fold(first, Formula::or),
        }
    }

    /// Expands `=`-threshold diamonds: ⋄^{=k}ψ into ⋄^{≥k}ψ ∧ ¬⋄^{≥k+1}ψ and
    /// ⋄̇^{=f}ψ into ⋄̇^{≥f}ψ ∧ ¬⋄̇^{>f}ψ.
    pub fn desugar_eq(&self) -> Formula {
        self.map_children(&|f| match f {
            Formula::GDia {
                rel: CountRel::Eq,
                count,
                inner,
            } => {
                let lo = Formula::GDia {
                    rel: CountRel::Geq,
                    count: *count,
                    inner: inner.clone(),
                };
                let hi = Formula::GDia {
                    rel: CountRel::Geq,
                    count: count + 1,
                    inner: inner.clone(),
                };
                Some(Formula::and(lo, Formula::not(hi)))
            }
            Formula::RDia {
                rel: RatioRel::Eq,
                ratio,
                inner,
            } => {
                let lo = Formula::RDia {
                    rel: RatioRel::Geq,
                    ratio: ratio.clone(),
                    inner: inner.clone(),
                };
                let hi = Formula::RDia {
                    rel: RatioRel::Gt,
                    ratio: ratio.clone(),
                    inner: inner.clone(),
                };
                Some(Formula::and(lo, Formula::not(hi)))
            }
            _ => None,
        })
    }

    /// Rewrites □ψ into ¬⋄¬ψ.
    pub fn desugar_box(&self) -> Formula {
        self.map_children(&|f| match f {
            Formula::Box(inner) => Some(Formula::not(Formula::dia(Formula::Not(inner.clone())))),
            _ => None,
        })
    }

    /// Rewrites φ∧ψ into ¬(¬φ∨¬ψ).
    pub fn desugar_and(&self) -> Formula {
        self.map_children(&|f| match f {
            Formula::And(l, r) => Some(Formula::not(Formula::or(
                Formula::Not(l.clone()),
                Formula::Not(r.clone()),
            ))),
            _ => None,
        })
    }

    /// Bottom-up rewriting: `rule` sees a node whose children are already
    /// rewritten and may replace it (children it captured are the rewritten
    /// ones). Returns the original node when the rule declines.
    pub fn map_children(&self, rule: &impl Fn(&Formula) -> Option<Formula>) -> Formula {
        let rebuilt = match self {
            Formula::Top | Formula::Bottom | Formula::Atom(_) => self.clone(),
            Formula::Not(i) => Formula::not(i.map_children(rule)),
            Formula::Or(l, r) => Formula::or(l.map_children(rule), r.map_children(rule)),
            Formula::And(l, r) => Formula::and(l.map_children(rule), r.map_children(rule)),
            Formula::Dia(i) => Formula::dia(i.map_children(rule)),
            Formula::Box(i) => Formula::boxm(i.map_children(rule)),
            Formula::GDia { rel, count, inner } => Formula::GDia {
                rel: *rel,
                count: *count,
                inner: Arc::new(inner.map_children(rule)),
            },
            Formula::RDia { rel, ratio, inner } => Formula::RDia {
                rel: *rel,
                ratio: ratio.clone(),
                inner: Arc::new(inner.map_children(rule)),
            },
        };
        rule(&rebuilt).unwrap_or(rebuilt)
    }

    /// All labels mentioned, in first-appearance order.
    pub fn labels(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        self.visit(&mut |f| {
            if let Formula::Atom(p) = f {
                if seen.insert(p.clone()) {
                    out.push(p.clone());
                }
            }
        });
        out
    }

    fn visit(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        match self {
            Formula::Top | Formula::Bottom | Formula::Atom(_) => {}
            Formula::Not(i) | Formula::Dia(i) | Formula::Box(i) => i.visit(f),
            Formula::GDia { inner, .. } | Formula::RDia { inner, .. } => inner.visit(f),
            Formula::Or(l, r) | Formula::And(l, r) => {
                l.visit(f);
                r.visit(f);
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&parse::print(self))
    }
}

impl Formula {
    /// Classifies the formula into the supported fragments.
    ///
    /// Membership is syntactic, after the abbreviations each grammar admits:
    /// ⊤/⊥/∧/□ are available everywhere they abbreviate something in the
    /// fragment; plain ⋄/□ additionally count as GML's grade-1 modalities.
    /// RML membership requires ratio diamonds only (plain ⋄ is written
    /// ⋄̇^{>0/1} there). The alternation-free fragments restrict negation to
    /// atoms and fix the modality polarity, with □⊥ and ⋄⊤ admitted as
    /// literals of both.
    pub fn analyze(&self) -> FragmentReport {
        let mut memo: HashMap<*const Formula, FragmentReport> = HashMap::new();
        report(self, &mut memo)
    }
}

/// Nesting depth of modalities.
pub fn modal_depth(f: &Formula) -> usize {
    f.analyze().modal_depth
}

/// One bottom-up pass computing the whole report, memoized per AST node so
/// that shared subterms (extraction output) cost their DAG size.
fn report(f: &Formula, memo: &mut HashMap<*const Formula, FragmentReport>) -> FragmentReport {
    if let Some(hit) = memo.get(&(f as *const Formula)) {
        return hit.clone();
    }
    let out = match f {
        Formula::Top | Formula::Bottom | Formula::Atom(_) => FragmentReport {
            modal_depth: 0,
            in_ml: true,
            in_gml: true,
            max_count: 0,
            in_rml: true,
            in_afml1: true,
            in_afml2: true,
        },
        Formula::Not(i) => {
            let r = report(i, memo);
            let literal = matches!(**i, Formula::Atom(_));
            FragmentReport {
                in_afml1: literal,
                in_afml2: literal,
                ..r
            }
        }
        Formula::Or(l, r) | Formula::And(l, r) => {
            let a = report(l, memo);
            let b = report(r, memo);
            FragmentReport {
                modal_depth: a.modal_depth.max(b.modal_depth),
                in_ml: a.in_ml && b.in_ml,
                in_gml: a.in_gml && b.in_gml,
                max_count: a.max_count.max(b.max_count),
                in_rml: a.in_rml && b.in_rml,
                in_afml1: a.in_afml1 && b.in_afml1,
                in_afml2: a.in_afml2 && b.in_afml2,
            }
        }
        Formula::Dia(i) => {
            let r = report(i, memo);
            FragmentReport {
                modal_depth: 1 + r.modal_depth,
                max_count: 1.max(r.max_count),
                in_rml: false,
                in_afml1: r.in_afml1,
                in_afml2: matches!(**i, Formula::Top),
                ..r
            }
        }
        Formula::Box(i) => {
            let r = report(i, memo);
            FragmentReport {
                modal_depth: 1 + r.modal_depth,
                max_count: 1.max(r.max_count),
                in_rml: false,
                in_afml1: matches!(**i, Formula::Bottom),
                in_afml2: r.in_afml2,
                ..r
            }
        }
        Formula::GDia { rel, count, inner } => {
            let r = report(inner, memo);
            let here = match rel {
                CountRel::Geq => *count,
                // ⋄^{=k} needs ⋄^{≥k+1} after expansion.
                CountRel::Eq => count + 1,
            };
            FragmentReport {
                modal_depth: 1 + r.modal_depth,
                in_ml: false,
                max_count: here.max(r.max_count),
                in_rml: false,
                in_afml1: false,
                in_afml2: false,
                ..r
            }
        }
        Formula::RDia { inner, .. } => {
            let r = report(inner, memo);
            FragmentReport {
                modal_depth: 1 + r.modal_depth,
                in_ml: false,
                in_gml: false,
                in_afml1: false,
                in_afml2: false,
                ..r
            }
        }
    };
    memo.insert(f as *const Formula, out.clone());
    out
}

/// Enumerates the distinct subformulas of `f` over the given alphabet:
/// the alphabet's atoms come first (in alphabet order, padding with unused
/// atoms), every subformula precedes its superformulas, and `f` sits at the
/// returned index (the end, unless `f` is itself an early atom).
pub fn subformula_order(
    f: &Formula,
    alphabet: &[String],
) -> Result<(Vec<Formula>, usize), LogicError> {
    for l in f.labels() {
        if !alphabet.contains(&l) {
            return Err(LogicError::UnknownLabel(l));
        }
    }
    let mut order: Vec<Formula> = alphabet.iter().map(Formula::atom).collect();
    let mut seen: HashSet<Formula> = order.iter().cloned().collect();
    fn push(f: &Formula, order: &mut Vec<Formula>, seen: &mut HashSet<Formula>) {
        if seen.contains(f) {
            return;
        }
        match f {
            Formula::Top | Formula::Bottom | Formula::Atom(_) => {}
            Formula::Not(i) | Formula::Dia(i) | Formula::Box(i) => push(i, order, seen),
            Formula::GDia { inner, .. } | Formula::RDia { inner, .. } => push(inner, order, seen),
            Formula::Or(l, r) | Formula::And(l, r) => {
                push(l, order, seen);
                push(r, order, seen);
            }
        }
        seen.insert(f.clone());
        order.push(f.clone());
    }
    push(f, &mut order, &mut seen);
    let idx = order
        .iter()
        .position(|g| g == f)
        .expect("formula was just inserted");
    Ok((order, idx))
}

/// Replaces every ⋄̇^{≥t} by the strict threshold that is equivalent on
/// graphs with at most `n` vertices: ⋄̇^{>t'} with t' the largest fraction
/// ℓ/m (0 ≤ ℓ ≤ m ≤ n) below t. Degenerate ⋄̇^{≥0}ψ becomes ⊤ (true
/// everywhere, including leaves). `=`-thresholds are expanded first.
pub fn eliminate_geq(f: &Formula, n: usize) -> Result<Formula, LogicError> {
    if n == 0 {
        return Err(LogicError::BadBound);
    }
    fn largest_fraction_below(t: &BigRational, n: usize) -> BigRational {
        let mut best = BigRational::zero();
        for m in 1..=n {
            for l in 0..=m {
                let frac = crate::scalar::rat(l as i64, m as i64);
                if &frac < t && frac > best {
                    best = frac;
                }
            }
        }
        best
    }
    let out = f.desugar_eq().map_children(&|g| match g {
        Formula::RDia {
            rel: RatioRel::Geq,
            ratio,
            inner,
        } => {
            if ratio.is_zero() {
                Some(Formula::Top)
            } else {
                Some(Formula::RDia {
                    rel: RatioRel::Gt,
                    ratio: largest_fraction_below(ratio, n),
                    inner: inner.clone(),
                })
            }
        }
        _ => None,
    });
    Ok(out)
}

/// De Morgan dual of an alternation-free formula: atoms and their negations
/// swap, ⊤↔⊥, ∧↔∨, and modalities flip (⋄ψ ↔ □ψ*). Maps AFML[1] onto
/// AFML[2] and back, with f ≡ ¬dual(f).
pub fn afml_dual(f: &Formula) -> Formula {
    match f {
        Formula::Top => Formula::Bottom,
        Formula::Bottom => Formula::Top,
        Formula::Atom(_) => Formula::not(f.clone()),
        Formula::Not(i) => (**i).clone(),
        Formula::And(l, r) => Formula::or(afml_dual(l), afml_dual(r)),
        Formula::Or(l, r) => Formula::and(afml_dual(l), afml_dual(r)),
        Formula::Dia(i) => Formula::boxm(afml_dual(i)),
        Formula::Box(i) => Formula::dia(afml_dual(i)),
        Formula::GDia { .. } | Formula::RDia { .. } => {
            unreachable!("dualization is only called on alternation-free formulas")
        }
    }
}

/// Dualizes an AFML[2] formula into the AFML[1] formula ψ with φ ≡ ¬ψ;
/// errors if φ is not alternation-free of the box kind.
pub fn afml2_dual(f: &Formula) -> Result<Formula, LogicError> {
    if !f.analyze().in_afml2 {
        return Err(LogicError::NotInFragment("AFML[2]"));
    }
    Ok(afml_dual(f))
}
