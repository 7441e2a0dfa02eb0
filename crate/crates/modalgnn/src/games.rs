//! Ehrenfeucht–Fraïssé games between two pointed graphs: solvers for the
//! modal, graded modal, and alternation-free variants, synthesis of
//! distinguishing formulas from Spoiler wins, memoryless Duplicator
//! strategies on tree-shaped graphs, and the separating-graph construction
//! that pads a scaled unraveling with decoy subtrees.
//!
//! A game runs for a fixed number of rounds. Spoiler moves by picking a
//! successor (a set of up to c successors in the graded game) on one side;
//! Duplicator answers on the other side. Spoiler wins as soon as the current
//! vertices disagree on their labels or Duplicator cannot answer; Duplicator
//! wins by surviving all rounds. The variants differ in who may move where:
//! the modal game allows either side, the graded game trades sets instead of
//! single vertices, and the alternation-free games pin Spoiler to one fixed
//! side (side 1 for the diamond fragment, side 2 for the box fragment)
//! except that Spoiler may switch sides when the pinned vertex has no
//! successors.
//!
//! Verdicts are computed over the product position space with memoization.
//! The graded verdict uses the capped-count characterization: Duplicator
//! survives a round iff for every equivalence class of successors at the
//! shallower depth, both sides hold the same number of members capped at c.
//! The literal set-move recursion is kept as an independent cross-check
//! oracle ([`solve_game_by_set_moves`]) and is guarded to small graphs since
//! it enumerates subsets.

use crate::graph::transform::{scale, unravel, TransformError};
use crate::graph::{Graph, GraphError};
use crate::logic::{CountRel, Formula};
use std::collections::HashMap;
use std::fmt;

/// Largest per-side vertex count accepted by the exponential set-move oracle.
const SET_MOVE_MAX: usize = 12;

/// Errors reported by game solvers and constructions.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GameError {
    #[error("the two sides use different alphabets")]
    AlphabetMismatch,
    #[error("side {0} has no distinguished point")]
    Unpointed(u8),
    #[error("the graded game needs a counting bound of at least 1")]
    ZeroBound,
    #[error("side 1 must be a tree rooted at its point")]
    NotATree,
    #[error("the set-move recursion implements the counting games; use the ML or GML kind")]
    SetMovesNeedCounting,
    #[error("the set-move oracle enumerates subsets; it only runs on graphs with at most {SET_MOVE_MAX} vertices per side")]
    SetMoveGuard,
    #[error("Spoiler wins the {0}-round game, but the construction needs a Duplicator win")]
    SpoilerWins(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// Which game is being played.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GameKind {
    /// Modal game: Spoiler picks one successor on either side.
    Ml,
    /// Graded game with counting bound c ≥ 1: sets of up to c successors.
    Gml(u64),
    /// Alternation-free diamond game: Spoiler is pinned to side 1.
    Afml1,
    /// Alternation-free box game: Spoiler is pinned to side 2.
    Afml2,
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GameKind::Ml => write!(f, "ML"),
            GameKind::Gml(c) => write!(f, "GML[{c}]"),
            GameKind::Afml1 => write!(f, "AFML[1]"),
            GameKind::Afml2 => write!(f, "AFML[2]"),
        }
    }
}

/// A full game instance: the kind, the round budget, and the two sides.
/// Both graphs must be pointed and share an alphabet.
#[derive(Debug, Clone, Copy)]
pub struct GameConfig<'a> {
    pub kind: GameKind,
    pub rounds: usize,
    pub side1: &'a Graph,
    pub side2: &'a Graph,
}

/// The winner of a game.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Winner {
    Spoiler,
    Duplicator,
}

impl fmt::Display for Winner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Winner::Spoiler => write!(f, "Spoiler"),
            Winner::Duplicator => write!(f, "Duplicator"),
        }
    }
}

/// One of the two sides of a game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    One,
    Two,
}

/// A vertex of one of the two sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Loc {
    pub side: Side,
    pub vertex: usize,
}

/// A winning Spoiler opening: a single vertex in the modal and
/// alternation-free games, a set of up to c vertices in the graded game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpoilerMove {
    Vertex { side: Side, vertex: usize },
    Set { side: Side, vertices: Vec<usize> },
}

/// Outcome of [`solve_game`]: the winner, the memoized position table
/// (keyed by the two current vertices and the rounds remaining), and a
/// winning Spoiler opening when one exists. The opening is absent when
/// Duplicator wins and when Spoiler already wins on the root labels.
#[derive(Debug, Clone)]
pub struct GameResult {
    pub winner: Winner,
    pub table: HashMap<(Loc, Loc, usize), Winner>,
    pub witness_move: Option<SpoilerMove>,
}

/// A memoryless Duplicator strategy for a tree-shaped side 1: maps each
/// tree vertex within the round horizon to the side-2 vertex Duplicator
/// answers with. The root maps to side 2's point.
#[derive(Debug, Clone)]
pub struct DuplicatorStrategy {
    pub ws: HashMap<usize, usize>,
}

/// Provenance record of [`build_separating_graph`].
#[derive(Debug, Clone)]
pub struct SeparationTrace {
    /// Unraveling depth and round budget K used throughout.
    pub rounds: usize,
    /// Scaling factor applied to the unraveled first graph.
    pub scale_factor: usize,
    /// Vertex count of the scaled part (the first block of the result).
    pub scaled_vertices: usize,
    /// For each vertex v of the second graph, the index in the result of
    /// the root of the decoy unraveling of the second graph at v.
    pub decoy_roots: Vec<usize>,
    /// The Duplicator strategy the wiring followed: tree vertex → side-2 vertex.
    pub ws: HashMap<usize, usize>,
    /// Number of wiring edges added from the scaled part to decoy roots.
    pub added_edges: usize,
}

fn validate(cfg: &GameConfig) -> Result<(usize, usize), GameError> {
    if cfg.side1.labels() != cfg.side2.labels() {
        return Err(GameError::AlphabetMismatch);
    }
    if let GameKind::Gml(c) = cfg.kind {
        if c == 0 {
            return Err(GameError::ZeroBound);
        }
    }
    let p1 = cfg.side1.point().ok_or(GameError::Unpointed(1))?;
    let p2 = cfg.side2.point().ok_or(GameError::Unpointed(2))?;
    Ok((p1, p2))
}

/// Memoized solver over the product position space. Positions are pairs of
/// vertices from either side (the graded class computation also compares
/// vertices of the same side) plus the rounds remaining; verdicts are dense
/// in a flat table indexed by vertex numbers of the disjoint union.
struct Solver<'a> {
    kind: GameKind,
    g1: &'a Graph,
    g2: &'a Graph,
    rounds: usize,
    memo: Vec<Option<bool>>,
}

impl<'a> Solver<'a> {
    fn new(kind: GameKind, g1: &'a Graph, g2: &'a Graph, rounds: usize) -> Self {
        let n = g1.vertex_count() + g2.vertex_count();
        Solver {
            kind,
            g1,
            g2,
            rounds,
            memo: vec![None; n * n * (rounds + 1)],
        }
    }

    fn graph(&self, s: Side) -> &'a Graph {
        match s {
            Side::One => self.g1,
            Side::Two => self.g2,
        }
    }

    fn du(&self, l: Loc) -> usize {
        match l.side {
            Side::One => l.vertex,
            Side::Two => self.g1.vertex_count() + l.vertex,
        }
    }

    fn slot(&self, a: Loc, b: Loc, k: usize) -> usize {
        let n = self.g1.vertex_count() + self.g2.vertex_count();
        (self.du(a) * n + self.du(b)) * (self.rounds + 1) + k
    }

    fn succs(&self, l: Loc) -> Vec<Loc> {
        self.graph(l.side)
            .successors(l.vertex)
            .iter()
            .map(|&u| Loc {
                side: l.side,
                vertex: u,
            })
            .collect()
    }

    fn labels_eq(&self, a: Loc, b: Loc) -> bool {
        self.graph(a.side).label_bits(a.vertex) == self.graph(b.side).label_bits(b.vertex)
    }

    /// True iff Spoiler wins the k-round game from position (a, b).
    fn spoiler_wins(&mut self, a: Loc, b: Loc, k: usize) -> bool {
        let slot = self.slot(a, b, k);
        if let Some(v) = self.memo[slot] {
            return v;
        }
        let win = if !self.labels_eq(a, b) {
            true
        } else if k == 0 {
            false
        } else {
            match self.kind {
                GameKind::Ml => self.ml_round(a, b, k),
                GameKind::Gml(c) => self.gml_round(a, b, k, c),
                GameKind::Afml1 => self.afml_round(a, b, k, Side::One),
                GameKind::Afml2 => self.afml_round(a, b, k, Side::Two),
            }
        };
        self.memo[slot] = Some(win);
        win
    }

    /// Modal round: Spoiler picks a successor on either side; Duplicator
    /// must answer on the other with a position Duplicator survives.
    fn ml_round(&mut self, a: Loc, b: Loc, k: usize) -> bool {
        let sa = self.succs(a);
        let sb = self.succs(b);
        let side1_win = sa
            .iter()
            .any(|&u1| sb.iter().all(|&u2| self.spoiler_wins(u1, u2, k - 1)));
        if side1_win {
            return true;
        }
        sb.iter()
            .any(|&u2| sa.iter().all(|&u1| self.spoiler_wins(u1, u2, k - 1)))
    }

    /// Alternation-free round: Spoiler is pinned to `active` and may only
    /// switch sides when the active vertex has no successors (winning
    /// immediately unless the other side is also successor-free).
    fn afml_round(&mut self, a: Loc, b: Loc, k: usize, active: Side) -> bool {
        let (act, pas) = if active == Side::One { (a, b) } else { (b, a) };
        let sact = self.succs(act);
        let spas = self.succs(pas);
        if sact.is_empty() {
            return !spas.is_empty();
        }
        if spas.is_empty() {
            return true;
        }
        sact.iter().any(|&u| {
            spas.iter().all(|&w| {
                let (u1, u2) = if active == Side::One { (u, w) } else { (w, u) };
                self.spoiler_wins(u1, u2, k - 1)
            })
        })
    }

    /// Graded round via capped class counts: Duplicator survives iff every
    /// (k−1)-equivalence class of the combined successors has the same
    /// min(c, count) on both sides.
    fn gml_round(&mut self, a: Loc, b: Loc, k: usize, c: u64) -> bool {
        self.successor_classes(a, b, k - 1)
            .iter()
            .any(|&(_, na, nb)| (na as u64).min(c) != (nb as u64).min(c))
    }

    /// Partitions N(a) ∪ N(b) into equivalence classes of the k-round game
    /// (Duplicator-win as the relation) and counts members per side.
    /// Returns one (representative, side-1 count, side-2 count) per class.
    fn successor_classes(&mut self, a: Loc, b: Loc, k: usize) -> Vec<(Loc, usize, usize)> {
        let mut classes: Vec<(Loc, usize, usize)> = Vec::new();
        for (loc, from_a) in self
            .succs(a)
            .into_iter()
            .map(|l| (l, true))
            .chain(self.succs(b).into_iter().map(|l| (l, false)))
        {
            let found = classes
                .iter()
                .position(|&(rep, _, _)| !self.spoiler_wins(rep, loc, k));
            let entry = match found {
                Some(i) => &mut classes[i],
                None => {
                    classes.push((loc, 0, 0));
                    classes.last_mut().expect("just pushed")
                }
            };
            if from_a {
                entry.1 += 1;
            } else {
                entry.2 += 1;
            }
        }
        classes
    }

    /// A winning Spoiler opening from (a, b), assuming Spoiler wins with
    /// k ≥ 1 rounds and equal root labels.
    fn winning_move(&mut self, a: Loc, b: Loc, k: usize) -> SpoilerMove {
        match self.kind {
            GameKind::Ml | GameKind::Afml1 | GameKind::Afml2 => {
                let sa = self.succs(a);
                let sb = self.succs(b);
                // The alternation-free side switch and the Duplicator-cannot-
                // answer wins both surface as a move on the nonempty side.
                if sa.is_empty() || sb.is_empty() {
                    let l = *sa.first().or(sb.first()).expect("spoiler has a move");
                    return SpoilerMove::Vertex {
                        side: l.side,
                        vertex: l.vertex,
                    };
                }
                for &u1 in &sa {
                    if self.kind == GameKind::Afml2 {
                        break;
                    }
                    if sb.iter().all(|&u2| self.spoiler_wins(u1, u2, k - 1)) {
                        return SpoilerMove::Vertex {
                            side: Side::One,
                            vertex: u1.vertex,
                        };
                    }
                }
                for &u2 in &sb {
                    if self.kind == GameKind::Afml1 {
                        break;
                    }
                    if sa.iter().all(|&u1| self.spoiler_wins(u1, u2, k - 1)) {
                        return SpoilerMove::Vertex {
                            side: Side::Two,
                            vertex: u2.vertex,
                        };
                    }
                }
                unreachable!("a winning position has a winning move")
            }
            GameKind::Gml(c) => {
                for (rep, na, nb) in self.successor_classes(a, b, k - 1) {
                    let (ta, tb) = ((na as u64).min(c), (nb as u64).min(c));
                    if ta == tb {
                        continue;
                    }
                    // Pick min(c, count) same-class successors on the richer side.
                    let (side, from, want) = if ta > tb {
                        (Side::One, a, ta)
                    } else {
                        (Side::Two, b, tb)
                    };
                    let vertices: Vec<usize> = self
                        .succs(from)
                        .into_iter()
                        .filter(|&u| !self.spoiler_wins(rep, u, k - 1))
                        .take(want as usize)
                        .map(|u| u.vertex)
                        .collect();
                    return SpoilerMove::Set { side, vertices };
                }
                unreachable!("a winning graded position has an unbalanced class")
            }
        }
    }

    /// Publishes the populated part of the memo as a position table.
    fn table(&self) -> HashMap<(Loc, Loc, usize), Winner> {
        let n1 = self.g1.vertex_count();
        let n = n1 + self.g2.vertex_count();
        let loc = |du: usize| {
            if du < n1 {
                Loc {
                    side: Side::One,
                    vertex: du,
                }
            } else {
                Loc {
                    side: Side::Two,
                    vertex: du - n1,
                }
            }
        };
        let mut table = HashMap::new();
        for (slot, v) in self.memo.iter().enumerate() {
            if let Some(win) = v {
                let k = slot % (self.rounds + 1);
                let pair = slot / (self.rounds + 1);
                let key = (loc(pair / n), loc(pair % n), k);
                let winner = if *win {
                    Winner::Spoiler
                } else {
                    Winner::Duplicator
                };
                table.insert(key, winner);
            }
        }
        table
    }
}

/// Solves the configured game: who wins, the memoized position verdicts,
/// and a winning Spoiler opening when there is one.
pub fn solve_game(cfg: GameConfig) -> Result<GameResult, GameError> {
    let (p1, p2) = validate(&cfg)?;
    let mut sol = Solver::new(cfg.kind, cfg.side1, cfg.side2, cfg.rounds);
    let root1 = Loc {
        side: Side::One,
        vertex: p1,
    };
    let root2 = Loc {
        side: Side::Two,
        vertex: p2,
    };
    let spoiler = sol.spoiler_wins(root1, root2, cfg.rounds);
    let witness_move = if spoiler && cfg.rounds > 0 && sol.labels_eq(root1, root2) {
        Some(sol.winning_move(root1, root2, cfg.rounds))
    } else {
        None
    };
    Ok(GameResult {
        winner: if spoiler {
            Winner::Spoiler
        } else {
            Winner::Duplicator
        },
        table: sol.table(),
        witness_move,
    })
}

/// Literal set-move recursion for the counting games, used as an
/// independent cross-check for the capped-class verdict: Spoiler picks a
/// side and a set of up to c successors, Duplicator answers with an
/// equally-sized set, Spoiler picks from Duplicator's set, Duplicator from
/// Spoiler's. Exponential in the successor counts and guarded accordingly.
pub fn solve_game_by_set_moves(cfg: GameConfig) -> Result<Winner, GameError> {
    let (p1, p2) = validate(&cfg)?;
    let c = match cfg.kind {
        GameKind::Ml => 1,
        GameKind::Gml(c) => c,
        GameKind::Afml1 | GameKind::Afml2 => return Err(GameError::SetMovesNeedCounting),
    };
    if cfg.side1.vertex_count() > SET_MOVE_MAX || cfg.side2.vertex_count() > SET_MOVE_MAX {
        return Err(GameError::SetMoveGuard);
    }
    let mut sol = SetSolver {
        g1: cfg.side1,
        g2: cfg.side2,
        c: c as usize,
        rounds: cfg.rounds,
        memo: vec![
            None;
            cfg.side1.vertex_count() * cfg.side2.vertex_count() * (cfg.rounds + 1)
        ],
    };
    Ok(if sol.spoiler_wins(p1, p2, cfg.rounds) {
        Winner::Spoiler
    } else {
        Winner::Duplicator
    })
}

struct SetSolver<'a> {
    g1: &'a Graph,
    g2: &'a Graph,
    c: usize,
    rounds: usize,
    memo: Vec<Option<bool>>,
}

impl SetSolver<'_> {
    fn spoiler_wins(&mut self, v1: usize, v2: usize, k: usize) -> bool {
        let slot = (v1 * self.g2.vertex_count() + v2) * (self.rounds + 1) + k;
        if let Some(v) = self.memo[slot] {
            return v;
        }
        let win = if self.g1.label_bits(v1) != self.g2.label_bits(v2) {
            true
        } else if k == 0 {
            false
        } else {
            let s1: Vec<usize> = self.g1.successors(v1).to_vec();
            let s2: Vec<usize> = self.g2.successors(v2).to_vec();
            self.spoiler_set_win(&s1, &s2, k, true) || self.spoiler_set_win(&s2, &s1, k, false)
        };
        self.memo[slot] = Some(win);
        win
    }

    /// Spoiler proposes each set over `mine`; Duplicator answers over
    /// `theirs`. `mine_is_side1` orients the follow-up positions.
    fn spoiler_set_win(
        &mut self,
        mine: &[usize],
        theirs: &[usize],
        k: usize,
        mine_is_side1: bool,
    ) -> bool {
        for my_mask in 1u32..1 << mine.len() {
            let size = my_mask.count_ones() as usize;
            if size > self.c {
                continue;
            }
            if size > theirs.len() {
                // Duplicator cannot produce an equally-sized set.
                return true;
            }
            let mut all_answers_lose = true;
            for their_mask in 1u32..1 << theirs.len() {
                if their_mask.count_ones() as usize != size {
                    continue;
                }
                // Spoiler picks from Duplicator's set, then Duplicator
                // picks from Spoiler's.
                let spoiler_caught = bits(their_mask, theirs).any(|w| {
                    bits(my_mask, mine).all(|u| {
                        let (u1, u2) = if mine_is_side1 { (u, w) } else { (w, u) };
                        self.spoiler_wins(u1, u2, k - 1)
                    })
                });
                if !spoiler_caught {
                    all_answers_lose = false;
                    break;
                }
            }
            if all_answers_lose {
                return true;
            }
        }
        false
    }
}

fn bits(mask: u32, items: &[usize]) -> impl Iterator<Item = usize> + '_ {
    items
        .iter()
        .enumerate()
        .filter(move |(i, _)| mask >> i & 1 == 1)
        .map(|(_, &v)| v)
}

/// If Spoiler wins the configured game, synthesizes a formula of the
/// game's logic with modal depth at most the round budget that is true at
/// side 1's point and false at side 2's; returns None on Duplicator wins.
pub fn distinguishing_formula(cfg: GameConfig) -> Result<Option<Formula>, GameError> {
    let (p1, p2) = validate(&cfg)?;
    let mut sol = Solver::new(cfg.kind, cfg.side1, cfg.side2, cfg.rounds);
    let root1 = Loc {
        side: Side::One,
        vertex: p1,
    };
    let root2 = Loc {
        side: Side::Two,
        vertex: p2,
    };
    if !sol.spoiler_wins(root1, root2, cfg.rounds) {
        return Ok(None);
    }
    let mut synth = Synth {
        sol,
        memo: HashMap::new(),
    };
    Ok(Some(synth.formula(root1, root2, cfg.rounds)))
}

/// Formula synthesis from a solved game, following the winning structure:
/// label mismatches become literals, a winning side-1 vertex move becomes a
/// diamond over a conjunction of the answers' formulas, a winning side-2
/// move becomes a box over a disjunction, and a winning graded set move
/// becomes a counting diamond over the class-characterizing conjunction.
struct Synth<'a> {
    sol: Solver<'a>,
    memo: HashMap<(usize, usize, usize), Formula>,
}

impl Synth<'_> {
    /// Returns a formula true at `a` and false at `b`, of modal depth ≤ k.
    /// Precondition: Spoiler wins the k-round game from (a, b).
    fn formula(&mut self, a: Loc, b: Loc, k: usize) -> Formula {
        let key = (self.sol.du(a), self.sol.du(b), k);
        if let Some(f) = self.memo.get(&key) {
            return f.clone();
        }
        let f = self.build(a, b, k);
        self.memo.insert(key, f.clone());
        f
    }

    fn build(&mut self, a: Loc, b: Loc, k: usize) -> Formula {
        if !self.sol.labels_eq(a, b) {
            return self.literal(a, b);
        }
        debug_assert!(k > 0, "spoiler wins round 0 only on labels");
        match self.sol.kind {
            GameKind::Ml => self.modal(a, b, k, true, true),
            GameKind::Afml1 => {
                if self.sol.succs(a).is_empty() {
                    // Spoiler switches sides against a successor-free side 1.
                    Formula::boxm(Formula::Bottom)
                } else {
                    self.modal(a, b, k, true, false)
                }
            }
            GameKind::Afml2 => {
                if self.sol.succs(b).is_empty() {
                    // Spoiler switches sides against a successor-free side 2.
                    Formula::dia(Formula::Top)
                } else {
                    self.modal(a, b, k, false, true)
                }
            }
            GameKind::Gml(c) => self.graded(a, b, k, c),
        }
    }

    /// The first label on which the two vertices disagree, as a literal
    /// true at `a`.
    fn literal(&mut self, a: Loc, b: Loc) -> Formula {
        let la = self.sol.graph(a.side).label_bits(a.vertex);
        let lb = self.sol.graph(b.side).label_bits(b.vertex);
        let alphabet = self.sol.g1.labels();
        if let Some(&i) = la.difference(lb).next() {
            return Formula::atom(alphabet[i].clone());
        }
        let &i = lb.difference(la).next().expect("labels differ");
        Formula::not(Formula::atom(alphabet[i].clone()))
    }

    /// Vertex-move synthesis. A winning Spoiler vertex on side 1 yields
    /// ⋄(⋀ per-answer formulas); on side 2, □(⋁ per-successor formulas).
    /// Empty successor sets degenerate to ⋄⊤ and □⊥ respectively.
    fn modal(&mut self, a: Loc, b: Loc, k: usize, try_side1: bool, try_side2: bool) -> Formula {
        let sa = self.sol.succs(a);
        let sb = self.sol.succs(b);
        if try_side1 {
            for &u1 in &sa {
                if sb
                    .iter()
                    .all(|&u2| self.sol.spoiler_wins(u1, u2, k - 1))
                {
                    let mut conj: Vec<Formula> = Vec::new();
                    for &u2 in &sb {
                        let f = self.formula(u1, u2, k - 1);
                        if !conj.contains(&f) {
                            conj.push(f);
                        }
                    }
                    return Formula::dia(Formula::big_and(conj));
                }
            }
        }
        if try_side2 {
            for &u2 in &sb {
                if sa
                    .iter()
                    .all(|&u1| self.sol.spoiler_wins(u1, u2, k - 1))
                {
                    let mut disj: Vec<Formula> = Vec::new();
                    for &u1 in &sa {
                        let f = self.formula(u1, u2, k - 1);
                        if !disj.contains(&f) {
                            disj.push(f);
                        }
                    }
                    return Formula::boxm(Formula::big_or(disj));
                }
            }
        }
        unreachable!("a winning position has a winning move")
    }

    /// Graded synthesis from an unbalanced successor class C: the formula
    /// χ true exactly on C among the combined successors is the conjunction
    /// of formulas separating C's representative from each non-member;
    /// the verdict then turns on a capped counting threshold over χ.
    fn graded(&mut self, a: Loc, b: Loc, k: usize, c: u64) -> Formula {
        let classes = self.sol.successor_classes(a, b, k - 1);
        for &(rep, na, nb) in &classes {
            let (ta, tb) = ((na as u64).min(c), (nb as u64).min(c));
            if ta == tb {
                continue;
            }
            let mut conj: Vec<Formula> = Vec::new();
            for &(other, _, _) in &classes {
                if other == rep {
                    continue;
                }
                let f = self.formula(rep, other, k - 1);
                if !conj.contains(&f) {
                    conj.push(f);
                }
            }
            let chi = Formula::big_and(conj);
            // Members of C satisfy χ (they agree with the representative up
            // to depth k−1); non-members each violate their own conjunct.
            return if ta > tb {
                Formula::gdia(CountRel::Geq, ta, chi)
            } else {
                Formula::not(Formula::gdia(CountRel::Geq, tb, chi))
            };
        }
        unreachable!("a winning graded position has an unbalanced class")
    }
}

/// Checks that `t` is a tree rooted at its point: every vertex reachable
/// from the root, the root without incoming edges, everything else with
/// exactly one.
fn tree_root(t: &Graph) -> Result<usize, GameError> {
    let root = t.point().ok_or(GameError::Unpointed(1))?;
    let n = t.vertex_count();
    let mut indeg = vec![0usize; n];
    for (_, v) in t.edges() {
        indeg[v] += 1;
    }
    if indeg[root] != 0 {
        return Err(GameError::NotATree);
    }
    let mut seen = vec![false; n];
    seen[root] = true;
    let mut queue = vec![root];
    while let Some(v) = queue.pop() {
        for &u in t.successors(v) {
            if !seen[u] {
                seen[u] = true;
                queue.push(u);
            }
        }
    }
    let tree = (0..n).all(|v| seen[v] && (v == root || indeg[v] == 1));
    if tree {
        Ok(root)
    } else {
        Err(GameError::NotATree)
    }
}

/// If Duplicator wins the alternation-free diamond game with tree-shaped
/// `t` on side 1 against `g2`, extracts a memoryless strategy mapping each
/// tree vertex within the round horizon to Duplicator's answer in `g2`.
/// Ties among equally good answers go to the earliest-declared vertex.
pub fn duplicator_strategy_tree(
    t: &Graph,
    g2: &Graph,
    rounds: usize,
) -> Result<Option<DuplicatorStrategy>, GameError> {
    let root = tree_root(t)?;
    let cfg = GameConfig {
        kind: GameKind::Afml1,
        rounds,
        side1: t,
        side2: g2,
    };
    let (_, p2) = validate(&cfg)?;
    let mut sol = Solver::new(GameKind::Afml1, t, g2, rounds);
    let root1 = Loc {
        side: Side::One,
        vertex: root,
    };
    let root2 = Loc {
        side: Side::Two,
        vertex: p2,
    };
    if sol.spoiler_wins(root1, root2, rounds) {
        return Ok(None);
    }
    let mut ws = HashMap::new();
    ws.insert(root, p2);
    // Walk the tree down to the horizon; each child takes the first answer
    // that keeps Duplicator winning with one round fewer.
    let mut frontier = vec![(root, p2, rounds)];
    while let Some((p, w, left)) = frontier.pop() {
        if left == 0 {
            continue;
        }
        for &q in t.successors(p) {
            let ql = Loc {
                side: Side::One,
                vertex: q,
            };
            let answer = g2
                .successors(w)
                .iter()
                .copied()
                .find(|&u| {
                    !sol.spoiler_wins(
                        ql,
                        Loc {
                            side: Side::Two,
                            vertex: u,
                        },
                        left - 1,
                    )
                })
                .expect("Duplicator survives every Spoiler move from a winning position");
            ws.insert(q, answer);
            frontier.push((q, answer, left - 1));
        }
    }
    Ok(Some(DuplicatorStrategy { ws }))
}

/// Builds the decoy-padded graph H from a Duplicator win: H starts from c
/// copies of the depth-K unraveling of `g` (K = max(rounds, layers)), adds
/// the depth-K unraveling of `g2` at every vertex as disconnected decoys,
/// and wires every scaled vertex that kept a successor to the decoy roots
/// of the strategy image's successors. The result is pointed at the first
/// copy of the unraveling root and ships with a construction trace.
///
/// Errors when Spoiler wins the K-round alternation-free diamond game
/// between the unraveling and `g2`.
pub fn build_separating_graph(
    g: &Graph,
    g2: &Graph,
    rounds: usize,
    layers: usize,
    c: usize,
) -> Result<(Graph, SeparationTrace), GameError> {
    let p = g.require_point()?;
    let depth = rounds.max(layers);
    let t = unravel(g, p, depth)?;
    let strategy =
        duplicator_strategy_tree(&t, g2, depth)?.ok_or(GameError::SpoilerWins(depth))?;
    let scaled = scale(&t, c)?;
    let scaled_vertices = scaled.vertex_count();
    let mut h = scaled.clone();
    // Decoy blocks: one unraveling of g2 per vertex, vertices renamed to
    // stay disjoint from the scaled part and from each other.
    let mut decoy_roots = Vec::with_capacity(g2.vertex_count());
    for v in 0..g2.vertex_count() {
        let u = unravel(g2, v, depth)?;
        let offset = h.vertex_count();
        decoy_roots.push(offset);
        for i in 0..u.vertex_count() {
            let id = h.add_vertex(format!("u{v}|{}", u.vertex_name(i)))?;
            h.set_label_bits(id, u.label_bits(i).clone());
        }
        for (x, y) in u.edges() {
            h.add_edge(offset + x, offset + y)?;
        }
    }
    // Wiring: every copy of a tree vertex that has a successor gains the
    // decoy roots of its strategy image's successors.
    let mut added_edges = 0;
    for v in 0..t.vertex_count() {
        if t.is_leaf(v) {
            continue;
        }
        let image = strategy.ws[&v];
        for i in 1..=c {
            let copy = h.resolve(&format!("({},{})", t.vertex_name(v), i))?;
            for &succ in g2.successors(image) {
                h.add_edge(copy, decoy_roots[succ])?;
                added_edges += 1;
            }
        }
    }
    let trace = SeparationTrace {
        rounds: depth,
        scale_factor: c,
        scaled_vertices,
        decoy_roots,
        ws: strategy.ws,
        added_edges,
    };
    Ok((h, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::transform::enumerate_pointed;
    use crate::logic::check::check_at_point;

    /// The three-vertex graph satisfying ⋄P ∧ □Q at its point.
    fn graph_a() -> Graph {
        Graph::build(
            &["P", "Q"],
            &["a", "b", "c"],
            &[("a", "b"), ("a", "c")],
            &[("b", vec!["P", "Q"]), ("c", vec!["Q"])],
            Some("a"),
        )
        .unwrap()
    }

    /// Like `graph_a` plus an unlabeled successor d; falsifies □Q.
    fn graph_b1() -> Graph {
        Graph::build(
            &["P", "Q"],
            &["a", "b", "c", "d"],
            &[("a", "b"), ("a", "c"), ("a", "d")],
            &[("b", vec!["P", "Q"]), ("c", vec!["Q"])],
            Some("a"),
        )
        .unwrap()
    }

    /// Two-vertex chain missing the P-successor; falsifies ⋄P.
    fn graph_b2() -> Graph {
        Graph::build(
            &["P", "Q"],
            &["a", "c"],
            &[("a", "c")],
            &[("c", vec!["Q"])],
            Some("a"),
        )
        .unwrap()
    }

    fn cfg<'a>(kind: GameKind, rounds: usize, g1: &'a Graph, g2: &'a Graph) -> GameConfig<'a> {
        GameConfig {
            kind,
            rounds,
            side1: g1,
            side2: g2,
        }
    }

    #[test]
    fn alternation_free_fixtures_are_duplicator_wins() {
        let (a, b1, b2) = (graph_a(), graph_b1(), graph_b2());
        for rounds in 0..=4 {
            let r1 = solve_game(cfg(GameKind::Afml1, rounds, &a, &b1)).unwrap();
            assert_eq!(r1.winner, Winner::Duplicator, "AFML[1] rounds {rounds}");
            assert!(r1.witness_move.is_none());
            let r2 = solve_game(cfg(GameKind::Afml2, rounds, &a, &b2)).unwrap();
            assert_eq!(r2.winner, Winner::Duplicator, "AFML[2] rounds {rounds}");
        }
    }

    #[test]
    fn modal_game_separates_the_first_fixture_pair() {
        let (a, b1) = (graph_a(), graph_b1());
        let r = solve_game(cfg(GameKind::Ml, 1, &a, &b1)).unwrap();
        assert_eq!(r.winner, Winner::Spoiler);
        // The winning opening is the unlabeled successor d on side 2.
        assert_eq!(
            r.witness_move,
            Some(SpoilerMove::Vertex {
                side: Side::Two,
                vertex: b1.resolve("d").unwrap(),
            })
        );
        // Independent confirmation through the set-move game with bound 1.
        assert_eq!(
            solve_game_by_set_moves(cfg(GameKind::Ml, 1, &a, &b1)).unwrap(),
            Winner::Spoiler
        );
        // Zero rounds are not enough: the roots carry equal labels.
        let r0 = solve_game(cfg(GameKind::Ml, 0, &a, &b1)).unwrap();
        assert_eq!(r0.winner, Winner::Duplicator);
    }

    #[test]
    fn position_table_is_consistent_with_the_verdict() {
        let (a, b1) = (graph_a(), graph_b1());
        let r = solve_game(cfg(GameKind::Ml, 2, &a, &b1)).unwrap();
        let root = (
            Loc {
                side: Side::One,
                vertex: 0,
            },
            Loc {
                side: Side::Two,
                vertex: 0,
            },
            2,
        );
        assert_eq!(r.table.get(&root), Some(&Winner::Spoiler));
        assert_eq!(r.winner, Winner::Spoiler);
    }

    #[test]
    fn distinguishing_formula_matches_the_fixture_verdicts() {
        let (a, b1) = (graph_a(), graph_b1());
        let f = distinguishing_formula(cfg(GameKind::Ml, 1, &a, &b1))
            .unwrap()
            .expect("Spoiler wins");
        let rep = f.analyze();
        assert!(rep.in_ml && rep.modal_depth <= 1);
        assert!(check_at_point(&a, &f).unwrap());
        assert!(!check_at_point(&b1, &f).unwrap());
        // Identical graphs cannot be told apart.
        assert_eq!(
            distinguishing_formula(cfg(GameKind::Ml, 3, &a, &a)).unwrap(),
            None
        );
        assert_eq!(
            distinguishing_formula(cfg(GameKind::Afml1, 4, &a, &b1)).unwrap(),
            None
        );
    }

    #[test]
    fn leaf_versus_nonleaf_yields_box_bottom() {
        let leaf = Graph::build(&["P"], &["x"], &[], &[], Some("x")).unwrap();
        let mut chain = Graph::new(["P"]).unwrap();
        let x = chain.add_vertex("x").unwrap();
        let y = chain.add_vertex("y").unwrap();
        chain.add_edge(x, y).unwrap();
        chain.set_point(Some(x));
        let f = distinguishing_formula(cfg(GameKind::Afml1, 1, &leaf, &chain))
            .unwrap()
            .expect("Spoiler switches sides");
        assert_eq!(f, Formula::boxm(Formula::Bottom));
        assert!(f.analyze().in_afml1);
        // The mirrored pair under the box game yields the dual witness.
        let g = distinguishing_formula(cfg(GameKind::Afml2, 1, &chain, &leaf))
            .unwrap()
            .expect("Spoiler switches sides");
        assert_eq!(g, Formula::dia(Formula::Top));
        assert!(g.analyze().in_afml2);
    }

    /// A star with `p` P-labeled and `q` unlabeled successors.
    fn star(p: usize, q: usize) -> Graph {
        let mut g = Graph::new(["P"]).unwrap();
        let root = g.add_vertex("r").unwrap();
        for i in 0..p {
            let v = g.add_vertex(format!("p{i}")).unwrap();
            g.add_label(v, "P").unwrap();
            g.add_edge(root, v).unwrap();
        }
        for i in 0..q {
            let v = g.add_vertex(format!("q{i}")).unwrap();
            g.add_edge(root, v).unwrap();
        }
        g.set_point(Some(root));
        g
    }

    #[test]
    fn graded_bound_blinds_the_game_to_larger_counts() {
        for c in 1..=3u64 {
            let g1 = star(c as usize, c as usize);
            let g2 = star(c as usize, c as usize + 1);
            for rounds in 0..=3 {
                let r = solve_game(cfg(GameKind::Gml(c), rounds, &g1, &g2)).unwrap();
                assert_eq!(r.winner, Winner::Duplicator, "c {c} rounds {rounds}");
            }
            // One more unit of counting power tells the stars apart.
            let r = solve_game(cfg(GameKind::Gml(c + 1), 1, &g1, &g2)).unwrap();
            assert_eq!(r.winner, Winner::Spoiler);
            let f = distinguishing_formula(cfg(GameKind::Gml(c + 1), 1, &g1, &g2))
                .unwrap()
                .expect("Spoiler wins");
            let rep = f.analyze();
            assert!(rep.in_gml && rep.max_count <= c + 1 && rep.modal_depth <= 1);
            assert!(check_at_point(&g1, &f).unwrap());
            assert!(!check_at_point(&g2, &f).unwrap());
        }
    }

    #[test]
    fn graded_witness_move_is_a_winning_set() {
        let g1 = star(2, 0);
        let g2 = star(1, 0);
        let r = solve_game(cfg(GameKind::Gml(2), 1, &g1, &g2)).unwrap();
        assert_eq!(r.winner, Winner::Spoiler);
        match r.witness_move {
            Some(SpoilerMove::Set { side, vertices }) => {
                assert_eq!(side, Side::One);
                assert_eq!(vertices.len(), 2);
            }
            other => panic!("expected a set move, got {other:?}"),
        }
    }

    #[test]
    fn capped_class_verdict_matches_set_moves_on_small_graphs() {
        let alphabet = vec!["P".to_string()];
        let reps: Vec<Graph> = {
            let mut seen = std::collections::HashSet::new();
            enumerate_pointed(&alphabet, 2)
                .filter(|g| seen.insert(g.canonical_key()))
                .collect()
        };
        for c in 1..=2u64 {
            for g1 in &reps {
                for g2 in &reps {
                    let fast = solve_game(cfg(GameKind::Gml(c), 2, g1, g2)).unwrap().winner;
                    let slow =
                        solve_game_by_set_moves(cfg(GameKind::Gml(c), 2, g1, g2)).unwrap();
                    assert_eq!(fast, slow, "c {c}\n{g1:?}\n{g2:?}");
                }
            }
        }
    }

    #[test]
    fn spoiler_wins_are_monotone_in_the_round_budget() {
        let alphabet = vec!["P".to_string()];
        let reps: Vec<Graph> = {
            let mut seen = std::collections::HashSet::new();
            enumerate_pointed(&alphabet, 2)
                .filter(|g| seen.insert(g.canonical_key()))
                .collect()
        };
        for kind in [GameKind::Ml, GameKind::Gml(2), GameKind::Afml1, GameKind::Afml2] {
            for g1 in &reps {
                for g2 in &reps {
                    let mut spoiler_seen = false;
                    for rounds in 0..=3 {
                        let w = solve_game(cfg(kind, rounds, g1, g2)).unwrap().winner;
                        if spoiler_seen {
                            assert_eq!(w, Winner::Spoiler, "{kind} rounds {rounds}");
                        }
                        spoiler_seen = w == Winner::Spoiler;
                    }
                }
            }
        }
    }

    #[test]
    fn synthesized_formulas_separate_small_pairs_in_every_fragment() {
        let alphabet = vec!["P".to_string()];
        let reps: Vec<Graph> = {
            let mut seen = std::collections::HashSet::new();
            enumerate_pointed(&alphabet, 2)
                .filter(|g| seen.insert(g.canonical_key()))
                .collect()
        };
        for kind in [GameKind::Ml, GameKind::Gml(2), GameKind::Afml1, GameKind::Afml2] {
            for g1 in &reps {
                for g2 in &reps {
                    for rounds in 0..=2 {
                        let Some(f) =
                            distinguishing_formula(cfg(kind, rounds, g1, g2)).unwrap()
                        else {
                            continue;
                        };
                        let rep = f.analyze();
                        assert!(rep.modal_depth <= rounds);
                        match kind {
                            GameKind::Ml => assert!(rep.in_ml),
                            GameKind::Gml(c) => {
                                assert!(rep.in_gml && rep.max_count <= c)
                            }
                            GameKind::Afml1 => assert!(rep.in_afml1),
                            GameKind::Afml2 => assert!(rep.in_afml2),
                        }
                        assert!(check_at_point(g1, &f).unwrap(), "{kind} {f}");
                        assert!(!check_at_point(g2, &f).unwrap(), "{kind} {f}");
                    }
                }
            }
        }
    }

    #[test]
    fn strategy_tree_follows_the_winning_table() {
        let (a, b1) = (graph_a(), graph_b1());
        let t = unravel(&a, 0, 2).unwrap();
        let ws = duplicator_strategy_tree(&t, &b1, 2)
            .unwrap()
            .expect("Duplicator wins the diamond game");
        assert_eq!(ws.ws[&0], b1.resolve("a").unwrap());
        // Children map into successors of the parent's image with equal labels.
        for v in 0..t.vertex_count() {
            let Some(&img) = ws.ws.get(&v) else { continue };
            assert_eq!(t.label_bits(v), b1.label_bits(img));
            for &child in t.successors(v) {
                let ci = ws.ws[&child];
                assert!(b1.successors(img).contains(&ci));
            }
        }
    }

    #[test]
    fn strategy_on_single_vertices_and_leaf_mismatches() {
        let dot1 = Graph::build(&["P"], &["x"], &[], &[], Some("x")).unwrap();
        let dot2 = Graph::build(&["P"], &["y"], &[], &[], Some("y")).unwrap();
        let ws = duplicator_strategy_tree(&dot1, &dot2, 3).unwrap().unwrap();
        assert_eq!(ws.ws[&0], 0);
        // A tree leaf facing a vertex with successors loses one round in,
        // but survives a zero-round game.
        let mut chain = Graph::new(["P"]).unwrap();
        let x = chain.add_vertex("x").unwrap();
        let y = chain.add_vertex("y").unwrap();
        chain.add_edge(x, y).unwrap();
        chain.set_point(Some(x));
        assert!(duplicator_strategy_tree(&dot1, &chain, 1).unwrap().is_none());
        assert!(duplicator_strategy_tree(&dot1, &chain, 0).unwrap().is_some());
        // Non-tree side 1 is rejected.
        let mut cyc = Graph::new(["P"]).unwrap();
        let v = cyc.add_vertex("v").unwrap();
        cyc.add_edge(v, v).unwrap();
        cyc.set_point(Some(v));
        assert_eq!(
            duplicator_strategy_tree(&cyc, &dot2, 1).unwrap_err(),
            GameError::NotATree
        );
    }

    #[test]
    fn separating_graph_has_the_predicted_shape() {
        let (a, b1) = (graph_a(), graph_b1());
        let (h, trace) = build_separating_graph(&a, &b1, 2, 1, 2).unwrap();
        // Scaled part: 2 copies of the 3-vertex unraveling. Decoys: the
        // unravelings of b1 at a (4 vertices) and at b, c, d (1 each).
        assert_eq!(trace.rounds, 2);
        assert_eq!(trace.scaled_vertices, 6);
        assert_eq!(h.vertex_count(), 6 + 4 + 1 + 1 + 1);
        // Only the two root copies had successors; each gains |N(b1, a)| = 3.
        assert_eq!(trace.added_edges, 6);
        assert_eq!(h.point(), Some(h.resolve("(a,1)").unwrap()));
        // Old leaves of the scaled part stay leaves.
        for name in ["(a/b,1)", "(a/b,2)", "(a/c,1)", "(a/c,2)"] {
            assert!(h.is_leaf(h.resolve(name).unwrap()), "{name}");
        }
        // The whole padding is an m-extension of the scaled part, m = |V^b1|.
        let t = unravel(&a, 0, 2).unwrap();
        let scaled = scale(&t, 2).unwrap();
        assert!(crate::graph::transform::is_n_extension(&h, &scaled, b1.vertex_count()));
        // Vertex arithmetic: c·|Unr| + Σ decoy sizes.
        let decoy_total: usize = (0..b1.vertex_count())
            .map(|v| unravel(&b1, v, 2).unwrap().vertex_count())
            .sum();
        assert_eq!(h.vertex_count(), scaled.vertex_count() + decoy_total);
    }

    #[test]
    fn separating_graph_requires_a_duplicator_win() {
        let (a, b1) = (graph_a(), graph_b1());
        // Reversed sides: Spoiler finds b1's unlabeled successor.
        assert_eq!(
            build_separating_graph(&b1, &a, 2, 1, 2).unwrap_err(),
            GameError::SpoilerWins(2)
        );
    }

    #[test]
    fn configuration_errors_are_reported() {
        let a = graph_a();
        let other = Graph::build(&["R"], &["x"], &[], &[], Some("x")).unwrap();
        assert_eq!(
            solve_game(cfg(GameKind::Ml, 1, &a, &other)).unwrap_err(),
            GameError::AlphabetMismatch
        );
        let unpointed = Graph::build(&["P", "Q"], &["x"], &[], &[], None).unwrap();
        assert_eq!(
            solve_game(cfg(GameKind::Ml, 1, &a, &unpointed)).unwrap_err(),
            GameError::Unpointed(2)
        );
        assert_eq!(
            solve_game(cfg(GameKind::Gml(0), 1, &a, &a)).unwrap_err(),
            GameError::ZeroBound
        );
        assert_eq!(
            solve_game_by_set_moves(cfg(GameKind::Afml1, 1, &a, &a)).unwrap_err(),
            GameError::SetMovesNeedCounting
        );
    }

    #[test]
    fn modal_duplicator_wins_transfer_to_scaled_graded_games() {
        let alphabet = vec!["P".to_string()];
        let reps: Vec<Graph> = {
            let mut seen = std::collections::HashSet::new();
            enumerate_pointed(&alphabet, 2)
                .filter(|g| seen.insert(g.canonical_key()))
                .collect()
        };
        let mut transferred = 0;
        for g1 in &reps {
            for g2 in &reps {
                let ml = solve_game(cfg(GameKind::Ml, 2, g1, g2)).unwrap().winner;
                if ml != Winner::Duplicator {
                    continue;
                }
                for c in [2usize, 3] {
                    let s1 = scale(g1, c).unwrap();
                    let s2 = scale(g2, c).unwrap();
                    let graded = solve_game(cfg(GameKind::Gml(c as u64), 2, &s1, &s2))
                        .unwrap()
                        .winner;
                    assert_eq!(graded, Winner::Duplicator, "c {c}\n{g1:?}\n{g2:?}");
                    transferred += 1;
                }
            }
        }
        assert!(transferred > 0);
    }
}
