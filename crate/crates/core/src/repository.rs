//! Interning of connected graphs up to isomorphism.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

use crate::graph::{structural_hash, LabeledGraph};
use crate::matcher::{find_isomorphism_colored, VertexMap};

/// Dense identifier of an isomorphism class, assigned in interning order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct GraphId(pub u32);

impl GraphId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for GraphId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InternError {
    #[error("only connected graphs can be interned (graph has {0} components)")]
    Disconnected(usize),
    #[error("the empty graph cannot be interned")]
    Empty,
}

/// A stored representative together with its isomorphism invariants.
#[derive(Debug)]
pub struct StoredGraph {
    pub graph: LabeledGraph,
    pub hash: u64,
    /// Colour refinement of the vertices; isomorphisms preserve these.
    pub colors: Vec<u64>,
    color_histogram: Vec<u64>,
}

fn mix(parts: impl Hash) -> u64 {
    let mut h = DefaultHasher::new();
    parts.hash(&mut h);
    h.finish()
}

/// 1-dimensional Weisfeiler-Leman colour refinement over vertex and edge labels.
pub fn refine_colors(g: &LabeledGraph) -> Vec<u64> {
    let n = g.vertex_count();
    let mut colors: Vec<u64> = (0..n).map(|v| mix(g.label(v).as_str())).collect();
    let mut classes = count_distinct(&colors);
    for _ in 0..n {
        let next: Vec<u64> = (0..n)
            .map(|v| {
                let mut around: Vec<(u64, u64)> = g
                    .neighbours(v)
                    .iter()
                    .map(|&(w, e)| (mix(g.edge(e).label.as_str()), colors[w]))
                    .collect();
                around.sort_unstable();
                mix((colors[v], around))
            })
            .collect();
        let next_classes = count_distinct(&next);
        colors = next;
        if next_classes == classes {
            break;
        }
        classes = next_classes;
    }
    colors
}

fn count_distinct(colors: &[u64]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

impl StoredGraph {
    fn new(graph: LabeledGraph) -> Self {
        let hash = structural_hash(&graph);
        let colors = refine_colors(&graph);
        let mut color_histogram = colors.clone();
        color_histogram.sort_unstable();
        StoredGraph { graph, hash, colors, color_histogram }
    }
}

/// Result of interning a graph.
#[derive(Debug, Clone)]
pub struct Interned {
    pub id: GraphId,
    pub is_new: bool,
    /// Maps each vertex of the interned input onto the stored representative.
    pub vertex_map: VertexMap,
}

/// Stores one representative per isomorphism class of connected graphs.
#[derive(Debug, Default)]
pub struct GraphRepository {
    graphs: Vec<Arc<StoredGraph>>,
    names: Vec<Option<String>>,
    buckets: HashMap<u64, Vec<GraphId>>,
}

impl GraphRepository {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = GraphId> + '_ {
        (0..self.graphs.len() as u32).map(GraphId)
    }

    pub fn graph(&self, id: GraphId) -> &LabeledGraph {
        &self.graphs[id.index()].graph
    }

    pub fn stored(&self, id: GraphId) -> &Arc<StoredGraph> {
        &self.graphs[id.index()]
    }

    pub fn name(&self, id: GraphId) -> Option<&str> {
        self.names[id.index()].as_deref()
    }

    /// Attaches a display name; the first name given to a class wins.
    pub fn set_name(&mut self, id: GraphId, name: &str) {
        let slot = &mut self.names[id.index()];
        if slot.is_none() {
            *slot = Some(name.to_string());
        }
    }

    pub fn find_by_name(&self, name: &str) -> Option<GraphId> {
        self.names.iter().position(|n| n.as_deref() == Some(name)).map(|i| GraphId(i as u32))
    }

    /// Buckets of ids sharing a structural hash, in ascending hash order.
    pub fn buckets(&self) -> Vec<Vec<GraphId>> {
        let mut keys: Vec<_> = self.buckets.keys().copied().collect();
        keys.sort_unstable();
        keys.into_iter().map(|k| self.buckets[&k].clone()).collect()
    }

    /// Looks up the class of `g` without storing it.
    pub fn lookup(&self, g: &LabeledGraph) -> Option<(GraphId, VertexMap)> {
        let candidate = StoredGraph::new(g.clone());
        self.lookup_stored(&candidate)
    }

    fn lookup_stored(&self, candidate: &StoredGraph) -> Option<(GraphId, VertexMap)> {
        let bucket = self.buckets.get(&candidate.hash)?;
        bucket.iter().find_map(|&id| {
            let stored = &self.graphs[id.index()];
            if stored.color_histogram != candidate.color_histogram {
                return None;
            }
            find_isomorphism_colored(&candidate.graph, &candidate.colors, &stored.graph, &stored.colors).map(|m| (id, m))
        })
    }

    /// Returns the id of the class of `g`, storing `g` as a new representative if needed.
    pub fn intern(&mut self, g: LabeledGraph) -> Result<Interned, InternError> {
        if g.is_empty() {
            return Err(InternError::Empty);
        }
        if !g.is_connected() {
            return Err(InternError::Disconnected(crate::graph::connected_components(&g).len()));
        }
        let candidate = StoredGraph::new(g);
        if let Some((id, vertex_map)) = self.lookup_stored(&candidate) {
            return Ok(Interned { id, is_new: false, vertex_map });
        }
        let id = GraphId(self.graphs.len() as u32);
        let vertex_map = (0..candidate.graph.vertex_count()).collect();
        self.buckets.entry(candidate.hash).or_default().push(id);
        self.graphs.push(Arc::new(candidate));
        self.names.push(None);
        Ok(Interned { id, is_new: true, vertex_map })
    }
}

/// A multiset of interned graph ids (kept sorted, with repetition).
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ComponentMultiset(Vec<GraphId>);

impl ComponentMultiset {
    pub fn new(mut ids: Vec<GraphId>) -> Self {
        ids.sort_unstable();
        ComponentMultiset(ids)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ids(&self) -> &[GraphId] {
        &self.0
    }

    pub fn multiplicity(&self, id: GraphId) -> usize {
        self.0.iter().filter(|&&g| g == id).count()
    }

    pub fn contains(&self, id: GraphId) -> bool {
        self.0.binary_search(&id).is_ok()
    }

    /// Distinct ids with their multiplicities, ascending by id.
    pub fn counts(&self) -> Vec<(GraphId, usize)> {
        let mut out: Vec<(GraphId, usize)> = Vec::new();
        for &id in &self.0 {
            match out.last_mut() {
                Some((last, c)) if *last == id => *c += 1,
                _ => out.push((id, 1)),
            }
        }
        out
    }

    pub fn union(&self, other: &ComponentMultiset) -> ComponentMultiset {
        let mut ids = self.0.clone();
        ids.extend_from_slice(&other.0);
        ComponentMultiset::new(ids)
    }

    /// Multiset difference: each element of `other` removes at most one occurrence.
    pub fn difference(&self, other: &ComponentMultiset) -> ComponentMultiset {
        let mut ids = self.0.clone();
        for id in &other.0 {
            if let Some(pos) = ids.iter().position(|g| g == id) {
                ids.remove(pos);
            }
        }
        ComponentMultiset(ids)
    }
}

impl FromIterator<GraphId> for ComponentMultiset {
    fn from_iter<T: IntoIterator<Item = GraphId>>(iter: T) -> Self {
        ComponentMultiset::new(iter.into_iter().collect())
    }
}
