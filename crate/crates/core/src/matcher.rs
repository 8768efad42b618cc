//! Injective, label-preserving subgraph embeddings (VF2-style backtracking) and
//! merging of partial matching morphisms.
//!
//! Embeddings are monomorphisms: every pattern edge must be present in the host
//! with the same label, but the host may have additional edges between image
//! vertices.

use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use crate::graph::LabeledGraph;

static EMBEDDING_QUERIES: AtomicU64 = AtomicU64::new(0);

/// Number of [`enumerate_embeddings`] calls made by this process so far.
pub fn embedding_queries() -> u64 {
    EMBEDDING_QUERIES.load(Ordering::Relaxed)
}

/// `map[p]` is the host vertex assigned to pattern vertex `p`.
pub type VertexMap = Vec<usize>;

#[derive(Clone, Copy)]
enum Mode {
    Monomorphism,
    Isomorphism,
}

struct Plan {
    order: Vec<usize>,
    // an earlier-placed neighbour of order[i], if any
    anchor: Vec<Option<usize>>,
}

fn plan(pattern: &LabeledGraph) -> Plan {
    let n = pattern.vertex_count();
    let mut placed = vec![false; n];
    let mut placed_neighbours = vec![0usize; n];
    let mut order = Vec::with_capacity(n);
    let mut anchor = Vec::with_capacity(n);
    while order.len() < n {
        // most already-placed neighbours first, then highest degree, then lowest id
        let next = (0..n)
            .filter(|&v| !placed[v])
            .max_by(|&a, &b| {
                (placed_neighbours[a], pattern.degree(a))
                    .cmp(&(placed_neighbours[b], pattern.degree(b)))
                    .then(b.cmp(&a))
            })
            .expect("unplaced vertex exists");
        anchor.push(
            pattern
                .neighbours(next)
                .iter()
                .map(|&(w, _)| w)
                .filter(|&w| placed[w])
                .min_by_key(|&w| order.iter().position(|&o| o == w)),
        );
        placed[next] = true;
        order.push(next);
        for &(w, _) in pattern.neighbours(next) {
            placed_neighbours[w] += 1;
        }
    }
    Plan { order, anchor }
}

struct Search<'a> {
    pattern: &'a LabeledGraph,
    host: &'a LabeledGraph,
    colors: Option<(&'a [u64], &'a [u64])>,
    mode: Mode,
    plan: Plan,
    map: Vec<usize>,
    used: Vec<bool>,
}

impl<'a> Search<'a> {
    fn new(pattern: &'a LabeledGraph, host: &'a LabeledGraph, mode: Mode, colors: Option<(&'a [u64], &'a [u64])>) -> Self {
        Search {
            pattern,
            host,
            colors,
            mode,
            plan: plan(pattern),
            map: vec![usize::MAX; pattern.vertex_count()],
            used: vec![false; host.vertex_count()],
        }
    }

    fn feasible(&self, p: usize, h: usize) -> bool {
        if self.used[h] || self.pattern.label(p) != self.host.label(h) {
            return false;
        }
        let (pd, hd) = (self.pattern.degree(p), self.host.degree(h));
        match self.mode {
            Mode::Monomorphism if hd < pd => return false,
            Mode::Isomorphism if hd != pd => return false,
            _ => {}
        }
        if let Some((pc, hc)) = self.colors {
            if pc[p] != hc[h] {
                return false;
            }
        }
        let mut mapped_neighbours = 0;
        for &(q, e) in self.pattern.neighbours(p) {
            let image = self.map[q];
            if image == usize::MAX {
                continue;
            }
            mapped_neighbours += 1;
            match self.host.edge_label(image, h) {
                Some(l) if l == &self.pattern.edge(e).label => {}
                _ => return false,
            }
        }
        if let Mode::Isomorphism = self.mode {
            let used_host_neighbours = self.host.neighbours(h).iter().filter(|&&(w, _)| self.used[w]).count();
            if used_host_neighbours != mapped_neighbours {
                return false;
            }
        }
        true
    }

    /// Depth-first enumeration; `visit` returns false to stop the search.
    fn run(&mut self, depth: usize, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if depth == self.plan.order.len() {
            return visit(&self.map);
        }
        let p = self.plan.order[depth];
        let candidates: Vec<usize> = match self.plan.anchor[depth] {
            Some(a) => self.host.neighbours(self.map[a]).iter().map(|&(w, _)| w).collect(),
            None => (0..self.host.vertex_count()).collect(),
        };
        for h in candidates {
            if !self.feasible(p, h) {
                continue;
            }
            self.map[p] = h;
            self.used[h] = true;
            let keep_going = self.run(depth + 1, visit);
            self.used[h] = false;
            self.map[p] = usize::MAX;
            if !keep_going {
                return false;
            }
        }
        true
    }
}

/// Visits every embedding of `pattern` into `host` in deterministic order.
/// Does not touch the query counter.
pub fn for_each_embedding(pattern: &LabeledGraph, host: &LabeledGraph, mut visit: impl FnMut(&[usize]) -> bool) {
    if pattern.vertex_count() > host.vertex_count() || pattern.edge_count() > host.edge_count() {
        return;
    }
    Search::new(pattern, host, Mode::Monomorphism, None).run(0, &mut visit);
}

/// All injective label- and edge-preserving maps from `pattern` into `host`.
/// Counts as one subgraph isomorphism query.
pub fn enumerate_embeddings(pattern: &LabeledGraph, host: &LabeledGraph) -> Vec<VertexMap> {
    EMBEDDING_QUERIES.fetch_add(1, Ordering::Relaxed);
    let mut out = Vec::new();
    for_each_embedding(pattern, host, |m| {
        out.push(m.to_vec());
        true
    });
    out
}

/// A label-preserving isomorphism from `g` onto `h`, if one exists.
pub fn find_isomorphism(g: &LabeledGraph, h: &LabeledGraph) -> Option<VertexMap> {
    find_isomorphism_colored(g, &[], h, &[])
}

/// Like [`find_isomorphism`], but restricted to maps that preserve the supplied
/// vertex colours (any isomorphism-invariant refinement). Empty slices disable the
/// colour check.
pub fn find_isomorphism_colored(g: &LabeledGraph, g_colors: &[u64], h: &LabeledGraph, h_colors: &[u64]) -> Option<VertexMap> {
    if g.vertex_count() != h.vertex_count() || g.edge_count() != h.edge_count() {
        return None;
    }
    let colors = if g_colors.is_empty() || h_colors.is_empty() { None } else { Some((g_colors, h_colors)) };
    let mut found = None;
    Search::new(g, h, Mode::Isomorphism, colors).run(0, &mut |m| {
        found = Some(m.to_vec());
        false
    });
    found
}

/// A host vertex inside a multiset of host graphs: `copy` selects the host graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HostVertex {
    pub copy: usize,
    pub vertex: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MergeConflict {
    #[error("pattern vertex {0} is mapped by more than one part")]
    PatternOverlap(usize),
    #[error("host vertex {0:?} is the image of more than one pattern vertex")]
    ImageOverlap(HostVertex),
    #[error("parts disagree on the pattern size")]
    SizeMismatch,
}

/// A possibly partial matching morphism from a pattern into a multiset of hosts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Morphism {
    images: Vec<Option<HostVertex>>,
}

impl Morphism {
    pub fn empty(pattern_size: usize) -> Self {
        Morphism { images: vec![None; pattern_size] }
    }

    /// Lifts an embedding of a pattern component into host copy `copy`.
    /// `component[i]` is the pattern vertex that the component's vertex `i` stands for.
    pub fn from_component(pattern_size: usize, component: &[usize], embedding: &[usize], copy: usize) -> Self {
        let mut m = Morphism::empty(pattern_size);
        for (&p, &h) in component.iter().zip(embedding) {
            m.images[p] = Some(HostVertex { copy, vertex: h });
        }
        m
    }

    pub fn pattern_size(&self) -> usize {
        self.images.len()
    }

    pub fn image(&self, p: usize) -> Option<HostVertex> {
        self.images[p]
    }

    pub fn images(&self) -> &[Option<HostVertex>] {
        &self.images
    }

    pub fn is_total(&self) -> bool {
        self.images.iter().all(Option::is_some)
    }

    /// Host copies touched by this morphism, ascending.
    pub fn copies(&self) -> Vec<usize> {
        let mut c: Vec<usize> = self.images.iter().flatten().map(|h| h.copy).collect();
        c.sort_unstable();
        c.dedup();
        c
    }

    /// Induced edge map: for each pattern edge with both ends mapped, the host copy and
    /// host edge index it lands on.
    pub fn edge_map(&self, pattern: &LabeledGraph, hosts: &[&LabeledGraph]) -> Vec<Option<(usize, usize)>> {
        pattern
            .edges()
            .iter()
            .map(|e| match (self.images[e.source], self.images[e.target]) {
                (Some(a), Some(b)) if a.copy == b.copy => {
                    hosts[a.copy].edge_between(a.vertex, b.vertex).map(|he| (a.copy, he))
                }
                _ => None,
            })
            .collect()
    }

    /// Union of morphisms over disjoint pattern parts; images must be pairwise distinct.
    pub fn merge(parts: &[Morphism]) -> Result<Morphism, MergeConflict> {
        let size = parts.first().map_or(0, Morphism::pattern_size);
        let mut merged = Morphism::empty(size);
        let mut seen = std::collections::HashSet::new();
        for part in parts {
            if part.pattern_size() != size {
                return Err(MergeConflict::SizeMismatch);
            }
            for (p, img) in part.images.iter().enumerate() {
                let Some(img) = img else { continue };
                if merged.images[p].is_some() {
                    return Err(MergeConflict::PatternOverlap(p));
                }
                if !seen.insert(*img) {
                    return Err(MergeConflict::ImageOverlap(*img));
                }
                merged.images[p] = Some(*img);
            }
        }
        Ok(merged)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g1() -> LabeledGraph {
        let mut g = LabeledGraph::new();
        g.add_vertex("a");
        g.add_vertex("a");
        g.add_edge(0, 1, "b").unwrap();
        g
    }

    fn g2() -> LabeledGraph {
        let mut g = LabeledGraph::new();
        for _ in 0..3 {
            g.add_vertex("a");
        }
        g.add_edge(0, 1, "b").unwrap();
        g.add_edge(1, 2, "b").unwrap();
        g
    }

    #[test]
    fn single_vertex_pattern_matches_every_vertex() {
        let mut p = LabeledGraph::new();
        p.add_vertex("a");
        assert_eq!(enumerate_embeddings(&p, &g2()).len(), 3);
    }

    #[test]
    fn edge_into_path_gives_four_embeddings() {
        let all = enumerate_embeddings(&g1(), &g2());
        assert_eq!(all, vec![vec![0, 1], vec![1, 0], vec![1, 2], vec![2, 1]]);
    }

    #[test]
    fn extra_host_edges_are_allowed() {
        // path a-a-a embeds into a triangle although the triangle has the closing edge
        let mut k3 = g2();
        k3.add_edge(0, 2, "b").unwrap();
        assert_eq!(enumerate_embeddings(&g2(), &k3).len(), 6);
        assert!(find_isomorphism(&g2(), &k3).is_none());
    }

    #[test]
    fn merge_disjoint_and_conflicting() {
        let a = Morphism::from_component(2, &[0], &[4], 0);
        let b = Morphism::from_component(2, &[1], &[4], 1);
        let merged = Morphism::merge(&[a.clone(), b]).unwrap();
        assert!(merged.is_total());
        assert_eq!(merged.copies(), vec![0, 1]);

        let c = Morphism::from_component(2, &[1], &[4], 0);
        assert_eq!(
            Morphism::merge(&[a.clone(), c]),
            Err(MergeConflict::ImageOverlap(HostVertex { copy: 0, vertex: 4 }))
        );
        assert_eq!(Morphism::merge(&[a.clone(), a]), Err(MergeConflict::PatternOverlap(0)));
    }

    #[test]
    fn two_copies_of_one_graph_merge() {
        let a = Morphism::from_component(4, &[0, 1], &[0, 1], 0);
        let b = Morphism::from_component(4, &[2, 3], &[0, 1], 1);
        let m = Morphism::merge(&[a, b]).unwrap();
        assert_eq!(m.image(2), Some(HostVertex { copy: 1, vertex: 0 }));
    }
}
