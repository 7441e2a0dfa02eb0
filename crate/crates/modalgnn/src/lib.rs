//! Modal logics meeting graph neural networks, with exact arithmetic.
//!
//! The library has four pillars:
//!
//! * **Logic & graphs** — ASTs, a parser/printer round-tripping a fixed
//!   concrete grammar, a model checker over finite pointed labeled graphs,
//!   and structural analyses (fragment membership, modal depth, subformula
//!   order). Supported languages: basic modal logic (`dia`/`box`), graded
//!   modalities (`<>{>=n}`), ratio modalities (`<>{>=p/q}`, `<>{>p/q}`),
//!   and the two alternation-free fragments used by the game solvers.
//! * **GNN runtime** — aggregate-combine networks evaluated over a scalar
//!   type chosen at compile time: exact rationals, `f64`, or the quadratic
//!   extension ℚ+ℚ√2. Combination functions are either explicit affine
//!   layers with an activation or a small set of built-in channel recipes.
//! * **Compilers & extraction** — constructive translations from each logic
//!   into networks (Mean/Sum/Max aggregation; truncated-ReLU, ReLU, step,
//!   sigmoid, and oracle-based irrational activations) and the reverse
//!   direction: extracting formulas from networks that are uniformly or
//!   boundedly expressible.
//! * **Games & verification** — Ehrenfeucht-Fraisse style game solvers for
//!   the logics (with distinguishing-formula synthesis and Duplicator
//!   strategy trees), graph transformations (scaling, unraveling, random
//!   extensions), and an exhaustive equivalence checker that certifies a
//!   formula and a network agree on every labeled graph up to a size bound.

pub mod compile;
pub mod extract;
pub mod games;
pub mod gnn;
pub mod graph;
pub mod logic;
pub mod oracle;
pub mod scalar;
pub mod verify;

pub use graph::Graph;
pub use logic::Formula;
