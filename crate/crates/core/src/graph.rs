//! Simple undirected graphs with string labels on vertices and edges.

use std::collections::hash_map::DefaultHasher;
use std::collections::VecDeque;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

/// A vertex or edge label. Cheap to clone; the empty string is a valid label.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(Arc<str>);

impl Label {
    pub fn new(s: &str) -> Self {
        Label(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label::new(s)
    }
}

impl From<String> for Label {
    fn from(s: String) -> Self {
        Label(Arc::from(s))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {0} does not exist")]
    UnknownVertex(usize),
    #[error("self-loop on vertex {0} is not allowed")]
    SelfLoop(usize),
    #[error("parallel edge between {0} and {1}")]
    ParallelEdge(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub label: Label,
}

impl Edge {
    pub fn other(&self, v: usize) -> usize {
        if self.source == v {
            self.target
        } else {
            self.source
        }
    }
}

/// A simple undirected labeled graph. Vertices are numbered densely from 0.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct LabeledGraph {
    labels: Vec<Label>,
    edges: Vec<Edge>,
    // per vertex: (neighbour, edge index), kept sorted by neighbour
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl LabeledGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, label: impl Into<Label>) -> usize {
        self.labels.push(label.into());
        self.adjacency.push(Vec::new());
        self.labels.len() - 1
    }

    pub fn add_edge(&mut self, u: usize, v: usize, label: impl Into<Label>) -> Result<usize, GraphError> {
        let n = self.labels.len();
        if u >= n {
            return Err(GraphError::UnknownVertex(u));
        }
        if v >= n {
            return Err(GraphError::UnknownVertex(v));
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        let pos = match self.adjacency[u].binary_search_by_key(&v, |&(w, _)| w) {
            Ok(_) => return Err(GraphError::ParallelEdge(u.min(v), u.max(v))),
            Err(pos) => pos,
        };
        let idx = self.edges.len();
        self.edges.push(Edge { source: u.min(v), target: u.max(v), label: label.into() });
        self.adjacency[u].insert(pos, (v, idx));
        let pos_v = self.adjacency[v].binary_search_by_key(&u, |&(w, _)| w).unwrap_err();
        self.adjacency[v].insert(pos_v, (u, idx));
        Ok(idx)
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, v: usize) -> &Label {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn set_label(&mut self, v: usize, label: impl Into<Label>) {
        self.labels[v] = label.into();
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Neighbours of `v` as `(neighbour, edge index)` pairs in ascending neighbour order.
    pub fn neighbours(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        let (a, b) = if self.adjacency[u].len() <= self.adjacency[v].len() { (u, v) } else { (v, u) };
        self.adjacency[a]
            .binary_search_by_key(&b, |&(w, _)| w)
            .ok()
            .map(|i| self.adjacency[a][i].1)
    }

    pub fn edge_label(&self, u: usize, v: usize) -> Option<&Label> {
        self.edge_between(u, v).map(|e| &self.edges[e].label)
    }

    pub fn is_connected(&self) -> bool {
        self.is_empty() || component_labels(self).1 == 1
    }

    /// Disjoint union; the vertices of `other` are shifted by `self.vertex_count()`.
    pub fn disjoint_union(&self, other: &LabeledGraph) -> LabeledGraph {
        let mut g = self.clone();
        g.append(other);
        g
    }

    /// Appends a disjoint copy of `other`, returning the vertex offset of the copy.
    pub fn append(&mut self, other: &LabeledGraph) -> usize {
        let offset = self.vertex_count();
        for l in &other.labels {
            self.add_vertex(l.clone());
        }
        for e in &other.edges {
            self.add_edge(e.source + offset, e.target + offset, e.label.clone())
                .expect("copy of a simple graph is simple");
        }
        offset
    }

    /// Returns a copy with vertex `v` of `self` moved to position `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> LabeledGraph {
        assert_eq!(perm.len(), self.vertex_count());
        let mut labels = vec![Label::new(""); perm.len()];
        for (v, &p) in perm.iter().enumerate() {
            labels[p] = self.labels[v].clone();
        }
        let mut g = LabeledGraph::new();
        for l in labels {
            g.add_vertex(l);
        }
        let mut edges: Vec<_> = self.edges.iter().map(|e| (perm[e.source], perm[e.target], e.label.clone())).collect();
        edges.sort_by_key(|(u, v, _)| (*u.min(v), *u.max(v)));
        for (u, v, l) in edges {
            g.add_edge(u, v, l).expect("permutation keeps the graph simple");
        }
        g
    }

    /// Induced subgraph on `vertices` (in the given order).
    pub fn induced(&self, vertices: &[usize]) -> LabeledGraph {
        let mut index = vec![usize::MAX; self.vertex_count()];
        let mut g = LabeledGraph::new();
        for &v in vertices {
            index[v] = g.add_vertex(self.labels[v].clone());
        }
        for e in &self.edges {
            let (a, b) = (index[e.source], index[e.target]);
            if a != usize::MAX && b != usize::MAX {
                g.add_edge(a, b, e.label.clone()).expect("subgraph of a simple graph is simple");
            }
        }
        g
    }
}

impl fmt::Debug for LabeledGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LabeledGraph {{")?;
        for (v, l) in self.labels.iter().enumerate() {
            write!(f, " v {v} {l:?};")?;
        }
        for e in &self.edges {
            write!(f, " e {} {} {:?};", e.source, e.target, e.label)?;
        }
        write!(f, " }}")
    }
}

/// A connected component together with the original ids of its vertices.
#[derive(Debug, Clone)]
pub struct Component {
    pub graph: LabeledGraph,
    /// `origin[i]` is the vertex of the decomposed graph that became vertex `i`.
    pub origin: Vec<usize>,
}

fn component_labels(g: &LabeledGraph) -> (Vec<usize>, usize) {
    let n = g.vertex_count();
    let mut comp = vec![usize::MAX; n];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        comp[start] = count;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            for &(w, _) in g.neighbours(v) {
                if comp[w] == usize::MAX {
                    comp[w] = count;
                    queue.push_back(w);
                }
            }
        }
        count += 1;
    }
    (comp, count)
}

/// Splits `g` into its connected components, ordered by smallest member vertex.
/// Each component keeps the relative vertex order of `g`.
pub fn connected_components(g: &LabeledGraph) -> Vec<Component> {
    let (comp, count) = component_labels(g);
    let mut members = vec![Vec::new(); count];
    for (v, &c) in comp.iter().enumerate() {
        members[c].push(v);
    }
    members
        .into_iter()
        .map(|origin| Component { graph: g.induced(&origin), origin })
        .collect()
}

/// Isomorphism-invariant hash built from the vertex label multiset, the multiset of
/// edge signatures `(min endpoint label, edge label, max endpoint label)` and the
/// degree sequence. Equal hashes do not imply isomorphism.
pub fn structural_hash(g: &LabeledGraph) -> u64 {
    let mut vertex_labels: Vec<&str> = g.labels.iter().map(Label::as_str).collect();
    vertex_labels.sort_unstable();
    let mut signatures: Vec<(&str, &str, &str)> = g
        .edges
        .iter()
        .map(|e| {
            let a = g.labels[e.source].as_str();
            let b = g.labels[e.target].as_str();
            (a.min(b), e.label.as_str(), a.max(b))
        })
        .collect();
    signatures.sort_unstable();
    let mut degrees: Vec<usize> = g.adjacency.iter().map(Vec::len).collect();
    degrees.sort_unstable();

    let mut h = DefaultHasher::new();
    vertex_labels.hash(&mut h);
    signatures.hash(&mut h);
    degrees.hash(&mut h);
    h.finish()
}

/// True iff a label-preserving isomorphism between `g` and `h` exists.
pub fn isomorphic(g: &LabeledGraph, h: &LabeledGraph) -> bool {
    if g.vertex_count() != h.vertex_count() || g.edge_count() != h.edge_count() {
        return false;
    }
    if structural_hash(g) != structural_hash(h) {
        return false;
    }
    crate::matcher::find_isomorphism(g, h).is_some()
}
