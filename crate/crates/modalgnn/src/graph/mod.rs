//! Finite directed graphs with vertex labels from a fixed alphabet.
//!
//! A [`Graph`] carries its alphabet (ordered label list), named vertices in
//! declaration order, a successor relation, a labeling, and an optional
//! distinguished point. Successor lists preserve edge insertion order, which
//! makes every downstream computation (evaluation, games, synthesis)
//! deterministic for a fixed input.

pub mod transform;

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// Errors constructing or deserializing graphs.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("duplicate vertex name `{0}`")]
    DuplicateVertex(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("duplicate label `{0}` in alphabet")]
    DuplicateLabel(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(String, String),
    #[error("graph has no distinguished point but the operation requires one")]
    NoPoint,
    #[error("malformed graph JSON: {0}")]
    BadJson(String),
}

/// A finite labeled digraph, optionally pointed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    labels: Vec<String>,
    vertices: Vec<String>,
    index: HashMap<String, usize>,
    succ: Vec<Vec<usize>>,
    edge_set: BTreeSet<(usize, usize)>,
    labeling: Vec<BTreeSet<usize>>,
    point: Option<usize>,
}

impl Graph {
    /// Creates an empty graph over the given alphabet (order is significant).
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self, GraphError> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !seen.insert(l.clone()) {
                return Err(GraphError::DuplicateLabel(l.clone()));
            }
        }
        Ok(Graph {
            labels,
            vertices: Vec::new(),
            index: HashMap::new(),
            succ: Vec::new(),
            edge_set: BTreeSet::new(),
            labeling: Vec::new(),
            point: None,
        })
    }

    /// One-shot constructor used by fixtures and JSON decoding.
    pub fn build<S: Into<String> + Clone>(
        labels: &[S],
        vertices: &[S],
        edges: &[(S, S)],
        labeling: &[(S, Vec<S>)],
        point: Option<S>,
    ) -> Result<Self, GraphError> {
        let mut g = Graph::new(labels.iter().cloned())?;
        for v in vertices {
            g.add_vertex(v.clone())?;
        }
        for (u, v) in edges {
            g.add_edge_named(&u.clone().into(), &v.clone().into())?;
        }
        for (v, ls) in labeling {
            let vi = g.resolve(&v.clone().into())?;
            for l in ls {
                g.add_label(vi, &l.clone().into())?;
            }
        }
        if let Some(p) = point {
            let pi = g.resolve(&p.clone().into())?;
            g.set_point(Some(pi));
        }
        Ok(g)
    }

    pub fn add_vertex(&mut self, name: impl Into<String>) -> Result<usize, GraphError> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(GraphError::DuplicateVertex(name));
        }
        let id = self.vertices.len();
        self.index.insert(name.clone(), id);
        self.vertices.push(name);
        self.succ.push(Vec::new());
        self.labeling.push(BTreeSet::new());
        Ok(id)
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        assert!(u < self.vertices.len() && v < self.vertices.len());
        if !self.edge_set.insert((u, v)) {
            return Err(GraphError::DuplicateEdge(
                self.vertices[u].clone(),
                self.vertices[v].clone(),
            ));
        }
        self.succ[u].push(v);
        Ok(())
    }

    pub fn add_edge_named(&mut self, u: &str, v: &str) -> Result<(), GraphError> {
        let ui = self.resolve(u)?;
        let vi = self.resolve(v)?;
        self.add_edge(ui, vi)
    }

    pub fn add_label(&mut self, v: usize, label: &str) -> Result<(), GraphError> {
        let li = self
            .labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| GraphError::UnknownLabel(label.to_string()))?;
        self.labeling[v].insert(li);
        Ok(())
    }

    pub fn set_label_bits(&mut self, v: usize, bits: BTreeSet<usize>) {
        debug_assert!(bits.iter().all(|&b| b < self.labels.len()));
        self.labeling[v] = bits;
    }

    pub fn set_point(&mut self, p: Option<usize>) {
        debug_assert!(p.map_or(true, |p| p < self.vertices.len()));
        self.point = p;
    }

    pub fn resolve(&self, name: &str) -> Result<usize, GraphError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| GraphError::UnknownVertex(name.to_string()))
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex_name(&self, v: usize) -> &str {
        &self.vertices[v]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertices
    }

    /// Successors of `v` in edge insertion order.
    pub fn successors(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edge_set.contains(&(u, v))
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(u, vs)| vs.iter().map(move |&v| (u, v)))
    }

    pub fn edge_count(&self) -> usize {
        self.edge_set.len()
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.succ[v].is_empty()
    }

    /// The alphabet, in order.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Label indices held by `v`.
    pub fn label_bits(&self, v: usize) -> &BTreeSet<usize> {
        &self.labeling[v]
    }

    pub fn has_label(&self, v: usize, label_idx: usize) -> bool {
        self.labeling[v].contains(&label_idx)
    }

    pub fn point(&self) -> Option<usize> {
        self.point
    }

    pub fn require_point(&self) -> Result<usize, GraphError> {
        self.point.ok_or(GraphError::NoPoint)
    }

    /// Returns a copy pointed at `v`.
    pub fn pointed_at(&self, v: usize) -> Graph {
        let mut g = self.clone();
        g.set_point(Some(v));
        g
    }

    /// Canonical key of the (pointed) graph under vertex renaming; equal keys
    /// iff the graphs are isomorphic (respecting point and labels). Brute
    /// force over permutations, intended for small graphs only.
    pub fn canonical_key(&self) -> Vec<u64> {
        let n = self.vertices.len();
        assert!(n <= 8, "canonical_key is brute-force, use only for n <= 8");
        let r = self.labels.len();
        let mut best: Option<Vec<u64>> = None;
        let mut perm: Vec<usize> = (0..n).collect();
        // perm[new] = old
        permute(&mut perm, 0, &mut |perm| {
            if let Some(p) = self.point {
                // Pointed isomorphism fixes the point at position 0.
                if perm[0] != p {
                    return;
                }
            }
            let mut old_to_new = vec![0usize; n];
            for (new, &old) in perm.iter().enumerate() {
                old_to_new[old] = new;
            }
            let mut key = Vec::with_capacity(2 + 2 * n);
            key.push(n as u64);
            key.push(if self.point.is_some() { 1 } else { 0 });
            for &old in perm.iter() {
                let mut bits = 0u64;
                for &l in &self.labeling[old] {
                    bits |= 1 << l;
                }
                key.push(bits);
            }
            for &old in perm.iter() {
                let mut row = 0u64;
                for &s in &self.succ[old] {
                    row |= 1 << old_to_new[s];
                }
                key.push(row);
            }
            let _ = r;
            if best.as_ref().map_or(true, |b| key < *b) {
                best = Some(key);
            }
        });
        best.expect("at least the identity permutation")
    }

    /// Serializes to the canonical JSON object shape.
    pub fn to_json(&self) -> serde_json::Value {
        let edges: Vec<[String; 2]> = self
            .edges()
            .map(|(u, v)| [self.vertices[u].clone(), self.vertices[v].clone()])
            .collect();
        let mut labeling = BTreeMap::new();
        for (v, ls) in self.labeling.iter().enumerate() {
            if !ls.is_empty() {
                let names: Vec<String> = ls.iter().map(|&l| self.labels[l].clone()).collect();
                labeling.insert(self.vertices[v].clone(), names);
            }
        }
        let mut obj = serde_json::json!({
            "labels": self.labels,
            "vertices": self.vertices,
            "edges": edges,
            "labeling": labeling,
        });
        if let Some(p) = self.point {
            obj["point"] = serde_json::Value::String(self.vertices[p].clone());
        }
        obj
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, GraphError> {
        let raw: GraphJson =
            serde_json::from_value(v.clone()).map_err(|e| GraphError::BadJson(e.to_string()))?;
        raw.try_into()
    }

    pub fn from_json_str(s: &str) -> Result<Self, GraphError> {
        let raw: GraphJson =
            serde_json::from_str(s).map_err(|e| GraphError::BadJson(e.to_string()))?;
        raw.try_into()
    }
}

fn permute(items: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        f(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, f);
        items.swap(k, i);
    }
}

/// Wire shape of a graph; unknown keys are rejected.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphJson {
    labels: Vec<String>,
    vertices: Vec<String>,
    edges: Vec<(String, String)>,
    #[serde(default)]
    labeling: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    point: Option<String>,
}

impl TryFrom<GraphJson> for Graph {
    type Error = GraphError;

    fn try_from(raw: GraphJson) -> Result<Self, GraphError> {
        let mut g = Graph::new(raw.labels)?;
        for v in raw.vertices {
            g.add_vertex(v)?;
        }
        for (u, v) in &raw.edges {
            g.add_edge_named(u, v)?;
        }
        for (v, ls) in &raw.labeling {
            let vi = g.resolve(v)?;
            for l in ls {
                g.add_label(vi, l)?;
            }
        }
        if let Some(p) = &raw.point {
            let pi = g.resolve(p)?;
            g.set_point(Some(pi));
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> Graph {
        Graph::build(
            &["P", "Q"],
            &["a", "b", "c"],
            &[("a", "b"), ("a", "c")],
            &[("b", vec!["P", "Q"]), ("c", vec!["Q"])],
            Some("a"),
        )
        .unwrap()
    }

    #[test]
    fn construction_and_accessors() {
        let g = abc();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.successors(0), &[1, 2]);
        assert!(g.is_leaf(1));
        assert!(g.has_label(1, 0) && g.has_label(1, 1));
        assert!(!g.has_label(2, 0) && g.has_label(2, 1));
        assert_eq!(g.point(), Some(0));
    }

    #[test]
    fn rejects_duplicates_and_unknowns() {
        let mut g = Graph::new(["P"]).unwrap();
        g.add_vertex("v").unwrap();
        assert!(matches!(
            g.add_vertex("v"),
            Err(GraphError::DuplicateVertex(_))
        ));
        let v = 0;
        assert!(matches!(
            g.add_label(v, "Z"),
            Err(GraphError::UnknownLabel(_))
        ));
        g.add_edge(v, v).unwrap();
        assert!(matches!(
            g.add_edge(v, v),
            Err(GraphError::DuplicateEdge(_, _))
        ));
        assert!(Graph::new(["P", "P"]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = abc();
        let j = g.to_json();
        let g2 = Graph::from_json(&j).unwrap();
        assert_eq!(g, g2);
        // Unknown keys rejected.
        let mut j2 = j.clone();
        j2["extra"] = serde_json::json!(1);
        assert!(Graph::from_json(&j2).is_err());
        // Labeling entries optional.
        let j3 = serde_json::json!({
            "labels": ["P"], "vertices": ["x"], "edges": []
        });
        let g3 = Graph::from_json(&j3).unwrap();
        assert_eq!(g3.vertex_count(), 1);
        assert!(g3.point().is_none());
    }

    #[test]
    fn canonical_key_detects_isomorphism() {
        let g1 = Graph::build(
            &["P"],
            &["x", "y"],
            &[("x", "y")],
            &[("y", vec!["P"])],
            Some("x"),
        )
        .unwrap();
        let g2 = Graph::build(
            &["P"],
            &["u", "w"],
            &[("w", "u")],
            &[("u", vec!["P"])],
            Some("w"),
        )
        .unwrap();
        assert_eq!(g1.canonical_key(), g2.canonical_key());
        // Moving the point breaks pointed isomorphism.
        let g3 = g1.pointed_at(1);
        assert_ne!(g1.canonical_key(), g3.canonical_key());
        // Different labeling breaks it too.
        let g4 = Graph::build(&["P"], &["x", "y"], &[("x", "y")], &[], Some("x")).unwrap();
        assert_ne!(g1.canonical_key(), g4.canonical_key());
    }
}
