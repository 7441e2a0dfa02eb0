//! Graph transformations: scaling, unraveling, random n-extensions, and
//! exhaustive enumeration of all labeled graphs up to a size bound.

use super::{Graph, GraphError};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

/// Errors specific to transformations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error("scaling factor must be at least 1")]
    ZeroScale,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// The c-scaling of `g`: vertices (v,i) for i in 1..=c, an edge
/// ((v,i),(u,j)) for every original edge (v,u) and every i, j, labels copied.
/// If `g` is pointed at v, the result is pointed at (v,1).
pub fn scale(g: &Graph, c: usize) -> Result<Graph, TransformError> {
    if c == 0 {
        return Err(TransformError::ZeroScale);
    }
    let mut h = Graph::new(g.labels().iter().cloned())?;
    for v in 0..g.vertex_count() {
        for i in 1..=c {
            h.add_vertex(format!("({},{})", g.vertex_name(v), i))?;
        }
    }
    let id = |v: usize, i: usize| v * c + (i - 1);
    for (u, v) in g.edges() {
        for i in 1..=c {
            for j in 1..=c {
                h.add_edge(id(u, i), id(v, j))?;
            }
        }
    }
    for v in 0..g.vertex_count() {
        for i in 1..=c {
            h.set_label_bits(id(v, i), g.label_bits(v).clone());
        }
    }
    if let Some(p) = g.point() {
        h.set_point(Some(id(p, 1)));
    }
    Ok(h)
}

/// The unraveling of `g` at `v` up to the given depth: vertices are the
/// directed paths of length ≤ depth starting at v, edges extend paths by one
/// step, each path is labeled like its last vertex, and the point is the
/// length-0 path. The result is a tree.
pub fn unravel(g: &Graph, v: usize, depth: usize) -> Result<Graph, TransformError> {
    if v >= g.vertex_count() {
        return Err(TransformError::Graph(GraphError::UnknownVertex(format!(
            "#{v}"
        ))));
    }
    let mut h = Graph::new(g.labels().iter().cloned())?;
    // Breadth-first over paths; names are the path rendered through '/'.
    let root = h.add_vertex(g.vertex_name(v).to_string())?;
    h.set_label_bits(root, g.label_bits(v).clone());
    h.set_point(Some(root));
    let mut frontier: Vec<(usize, usize)> = vec![(root, v)]; // (path vertex in h, tail in g)
    for _ in 0..depth {
        let mut next = Vec::new();
        for (pid, tail) in frontier {
            for &u in g.successors(tail) {
                let name = format!("{}/{}", h.vertex_name(pid), g.vertex_name(u));
                let uid = h.add_vertex(name)?;
                h.set_label_bits(uid, g.label_bits(u).clone());
                h.add_edge(pid, uid)?;
                next.push((uid, u));
            }
        }
        frontier = next;
    }
    Ok(h)
}

/// Randomly extends `g` by at most `n` fresh successors per vertex that
/// already has one. Fresh vertices get uniformly random label sets and random
/// edges among themselves only; the original part of the graph is unchanged.
/// Deterministic for a fixed seed.
pub fn n_extend(g: &Graph, n: usize, seed: u64) -> Result<Graph, TransformError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = g.clone();
    let r = g.labels().len();
    let mut fresh: Vec<usize> = Vec::new();
    let mut counter = 0usize;
    for v in 0..g.vertex_count() {
        if g.is_leaf(v) {
            continue;
        }
        let k = rng.gen_range(0..=n);
        for _ in 0..k {
            let name = loop {
                counter += 1;
                let candidate = format!("ext{counter}");
                if h.resolve(&candidate).is_err() {
                    break candidate;
                }
            };
            let id = h.add_vertex(name)?;
            let mut bits = BTreeSet::new();
            for l in 0..r {
                if rng.gen_bool(0.5) {
                    bits.insert(l);
                }
            }
            h.set_label_bits(id, bits);
            h.add_edge(v, id)?;
            fresh.push(id);
        }
    }
    // Random structure among fresh vertices only.
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for &a in &fresh {
        for &b in &fresh {
            pairs.push((a, b));
        }
    }
    pairs.shuffle(&mut rng);
    for (a, b) in pairs {
        if rng.gen_bool(0.5) {
            h.add_edge(a, b)?;
        }
    }
    Ok(h)
}

/// Samples a pointed graph: uniform size in `1..=max_size`, each directed
/// edge (loops included) present with probability 1/2, each label held with
/// probability 1/2, point uniform. Deterministic for a fixed seed.
pub fn random_pointed(alphabet: &[String], max_size: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_size.max(1));
    let mut g = Graph::new(alphabet.iter().cloned()).expect("distinct labels");
    for v in 0..n {
        g.add_vertex(format!("v{v}")).expect("fresh name");
    }
    for u in 0..n {
        for v in 0..n {
            if rng.gen_bool(0.5) {
                g.add_edge(u, v).expect("valid endpoints");
            }
        }
    }
    for v in 0..n {
        let mut bits = BTreeSet::new();
        for l in 0..alphabet.len() {
            if rng.gen_bool(0.5) {
                bits.insert(l);
            }
        }
        g.set_label_bits(v, bits);
    }
    g.set_point(Some(rng.gen_range(0..n)));
    g
}

/// Checks the four defining conditions of an n-extension of `g`:
/// 1. the vertices and edges of `g` are preserved,
/// 2. labels of original vertices are unchanged,
/// 3. a vertex with a successor in `g` gains at most `n` new successors,
/// 4. a vertex without successors in `g` has none in `h` either.
pub fn is_n_extension(h: &Graph, g: &Graph, n: usize) -> bool {
    if h.labels() != g.labels() {
        return false;
    }
    // Condition 1: V ⊆ V', E ⊆ E'.
    let mut old = Vec::with_capacity(g.vertex_count());
    for v in 0..g.vertex_count() {
        match h.resolve(g.vertex_name(v)) {
            Ok(hv) => old.push(hv),
            Err(_) => return false,
        }
    }
    for (u, v) in g.edges() {
        if !h.has_edge(old[u], old[v]) {
            return false;
        }
    }
    for v in 0..g.vertex_count() {
        // Condition 2: labels preserved.
        if h.label_bits(old[v]) != g.label_bits(v) {
            return false;
        }
        let old_succ: BTreeSet<usize> = g.successors(v).iter().map(|&u| old[u]).collect();
        let new_succ: BTreeSet<usize> = h.successors(old[v]).iter().copied().collect();
        if g.is_leaf(v) {
            // Condition 4: leaves stay leaves.
            if !new_succ.is_empty() {
                return false;
            }
        } else {
            // Condition 3: at most n new successors.
            if new_succ.difference(&old_succ).count() > n {
                return false;
            }
        }
    }
    true
}

/// Streams every `alphabet`-labeled digraph with 1..=max_size named vertices
/// exactly once (not up to isomorphism): sizes ascending, then adjacency
/// matrices in row-major bit order, then labelings in (vertex, label) bit
/// order. Vertices are named v1..vk.
pub fn enumerate_graphs(
    alphabet: &[String],
    max_size: usize,
) -> impl Iterator<Item = Graph> + use<> {
    let alphabet = alphabet.to_vec();
    (1..=max_size).flat_map(move |k| GraphEnum::new(alphabet.clone(), k))
}

/// Pointed version of [`enumerate_graphs`]: each graph is yielded once per
/// choice of point, point index innermost.
pub fn enumerate_pointed(
    alphabet: &[String],
    max_size: usize,
) -> impl Iterator<Item = Graph> + use<> {
    enumerate_graphs(alphabet, max_size)
        .flat_map(|g| (0..g.vertex_count()).map(move |p| g.pointed_at(p)))
}

/// Number of pointed graphs with exactly n named vertices and r labels:
/// n · 2^(n²) · 2^(rn).
pub fn pointed_count(n: usize, r: usize) -> u128 {
    (n as u128) << (n * n + r * n)
}

struct GraphEnum {
    alphabet: Vec<String>,
    k: usize,
    adj: u128,
    lab: u128,
    adj_max: u128,
    lab_max: u128,
    done: bool,
}

impl GraphEnum {
    fn new(alphabet: Vec<String>, k: usize) -> Self {
        let r = alphabet.len();
        assert!(k * k < 128 && r * k < 128, "enumeration bound too large");
        GraphEnum {
            alphabet,
            k,
            adj: 0,
            lab: 0,
            adj_max: 1u128 << (k * k),
            lab_max: 1u128 << (r * k),
            done: false,
        }
    }
}

impl Iterator for GraphEnum {
    type Item = Graph;

    fn next(&mut self) -> Option<Graph> {
        if self.done {
            return None;
        }
        let k = self.k;
        let r = self.alphabet.len();
        let mut g = Graph::new(self.alphabet.iter().cloned()).expect("alphabet already validated");
        for i in 1..=k {
            g.add_vertex(format!("v{i}")).expect("fresh names");
        }
        for i in 0..k {
            for j in 0..k {
                if self.adj >> (i * k + j) & 1 == 1 {
                    g.add_edge(i, j).expect("fresh edges");
                }
            }
        }
        for v in 0..k {
            let mut bits = BTreeSet::new();
            for l in 0..r {
                if self.lab >> (v * r + l) & 1 == 1 {
                    bits.insert(l);
                }
            }
            g.set_label_bits(v, bits);
        }
        // Advance: labeling is the inner counter.
        self.lab += 1;
        if self.lab == self.lab_max {
            self.lab = 0;
            self.adj += 1;
            if self.adj == self.adj_max {
                self.done = true;
            }
        }
        Some(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge_graph() -> Graph {
        Graph::build(
            &["P"],
            &["v", "u"],
            &[("v", "u")],
            &[("u", vec!["P"])],
            Some("v"),
        )
        .unwrap()
    }

    #[test]
    fn scale_counts_and_labels() {
        let g = edge_graph();
        let h = scale(&g, 2).unwrap();
        assert_eq!(h.vertex_count(), 4);
        assert_eq!(h.edge_count(), 4);
        assert_eq!(h.point(), Some(h.resolve("(v,1)").unwrap()));
        let u1 = h.resolve("(u,1)").unwrap();
        let u2 = h.resolve("(u,2)").unwrap();
        assert!(h.has_label(u1, 0) && h.has_label(u2, 0));
        // c = 1 is the identity up to renaming.
        let h1 = scale(&g, 1).unwrap();
        assert_eq!(h1.vertex_count(), 2);
        assert_eq!(h1.edge_count(), 1);
        assert!(scale(&g, 0).is_err());
        // |E'| = c²·|E| on a 3-vertex graph.
        let g3 = Graph::build(
            &["P"],
            &["a", "b", "c"],
            &[("a", "b"), ("b", "c")],
            &[],
            None,
        )
        .unwrap();
        let h3 = scale(&g3, 3).unwrap();
        assert_eq!(h3.vertex_count(), 9);
        // |E'| = c²·|E| = 9·2.
        assert_eq!(h3.edge_count(), 18);
    }

    #[test]
    fn unravel_self_loop_gives_path() {
        let mut g = Graph::new(["P"]).unwrap();
        let v = g.add_vertex("v").unwrap();
        g.add_edge(v, v).unwrap();
        g.add_label(v, "P").unwrap();
        let t = unravel(&g, v, 2).unwrap();
        assert_eq!(t.vertex_count(), 3);
        assert_eq!(t.edge_count(), 2);
        assert_eq!(t.point(), Some(0));
        // Tree shape: each non-root has in-degree 1.
        let mut indeg = vec![0; t.vertex_count()];
        for (_, b) in t.edges() {
            indeg[b] += 1;
        }
        assert_eq!(indeg[0], 0);
        assert!(indeg[1..].iter().all(|&d| d == 1));
        assert!(t.has_label(1, 0));
    }

    #[test]
    fn unravel_depth_zero_and_leaf_truncation() {
        let g = edge_graph();
        let t0 = unravel(&g, 0, 0).unwrap();
        assert_eq!(t0.vertex_count(), 1);
        assert!(t0.label_bits(0).is_empty());
        // Two leaf successors: depth 3 still yields just 3 vertices.
        let g2 = Graph::build(
            &["P"],
            &["a", "b", "c"],
            &[("a", "b"), ("a", "c")],
            &[],
            None,
        )
        .unwrap();
        let t = unravel(&g2, 0, 3).unwrap();
        assert_eq!(t.vertex_count(), 3);
    }

    #[test]
    fn n_extension_predicate_and_generator_agree() {
        let g = edge_graph();
        for seed in 0..20 {
            let h = n_extend(&g, 3, seed).unwrap();
            assert!(is_n_extension(&h, &g, 3), "seed {seed}");
            // v has 1 successor in g, so at most 4 in h; u stays a leaf.
            let v = h.resolve("v").unwrap();
            let u = h.resolve("u").unwrap();
            assert!(h.successors(v).len() <= 4);
            assert!(h.is_leaf(u));
        }
        // Determinism.
        let h1 = n_extend(&g, 2, 7).unwrap();
        let h2 = n_extend(&g, 2, 7).unwrap();
        assert_eq!(h1, h2);
        // Zero-extension adds nothing anywhere.
        let h0 = n_extend(&g, 0, 1).unwrap();
        assert_eq!(h0, g);
    }

    #[test]
    fn random_graphs_are_deterministic_and_within_bounds() {
        let alphabet = vec!["P".to_string(), "Q".to_string()];
        for seed in 0..50 {
            let g = random_pointed(&alphabet, 6, seed);
            assert!((1..=6).contains(&g.vertex_count()), "seed {seed}");
            assert!(g.require_point().is_ok(), "seed {seed}");
            assert_eq!(g, random_pointed(&alphabet, 6, seed));
        }
        // The sampler covers more than one size.
        let sizes: std::collections::BTreeSet<usize> = (0..50)
            .map(|seed| random_pointed(&alphabet, 6, seed).vertex_count())
            .collect();
        assert!(sizes.len() > 1);
    }

    #[test]
    fn n_extension_predicate_rejects_violations() {
        let g = edge_graph();
        // Missing original edge.
        let bad1 = Graph::build(
            &["P"],
            &["v", "u"],
            &[],
            &[("u", vec!["P"])],
            None,
        )
        .unwrap();
        assert!(!is_n_extension(&bad1, &g, 3));
        // Changed label.
        let bad2 = Graph::build(&["P"], &["v", "u"], &[("v", "u")], &[], None).unwrap();
        assert!(!is_n_extension(&bad2, &g, 3));
        // Leaf gained a successor.
        let mut bad3 = g.clone();
        let w = bad3.add_vertex("w").unwrap();
        bad3.add_edge(1, w).unwrap();
        assert!(!is_n_extension(&bad3, &g, 3));
        // Too many fresh successors for n = 1.
        let mut bad4 = g.clone();
        let w1 = bad4.add_vertex("w1").unwrap();
        let w2 = bad4.add_vertex("w2").unwrap();
        bad4.add_edge(0, w1).unwrap();
        bad4.add_edge(0, w2).unwrap();
        assert!(!is_n_extension(&bad4, &g, 1));
        assert!(is_n_extension(&bad4, &g, 2));
    }

    #[test]
    fn enumeration_counts_match_closed_form() {
        let p = vec!["P".to_string()];
        assert_eq!(pointed_count(1, 1), 4);
        assert_eq!(pointed_count(2, 1), 128);
        let n1: Vec<Graph> = enumerate_pointed(&p, 1).collect();
        assert_eq!(n1.len(), 4);
        let n2: Vec<Graph> = enumerate_pointed(&p, 2).collect();
        assert_eq!(n2.len(), 132);
        // Unlabeled, one vertex: with/without self-loop.
        let e: Vec<String> = vec![];
        let u: Vec<Graph> = enumerate_graphs(&e, 1).collect();
        assert_eq!(u.len(), 2);
        // All distinct as named graphs.
        let mut seen = std::collections::HashSet::new();
        for g in &n2 {
            let key = format!("{:?}", (g.to_json().to_string(), g.point()));
            assert!(seen.insert(key));
        }
    }
}
