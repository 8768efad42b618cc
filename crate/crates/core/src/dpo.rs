//! Rule application at a match, partial rule binding and enumeration of proper
//! derivations over a universe of interned graphs.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use thiserror::Error;

use crate::graph::{connected_components, LabeledGraph};
use crate::matcher::{enumerate_embeddings, HostVertex, Morphism, VertexMap};
use crate::repository::{ComponentMultiset, GraphId, GraphRepository};
use crate::rule::{CompiledRule, End};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ApplyError {
    #[error("match does not cover the whole left graph")]
    IncompleteMatch,
    #[error("deleting {0:?} would leave dangling edges")]
    Dangling(HostVertex),
    #[error("created edge between {0:?} and {1:?} already exists")]
    Simplicity(HostVertex, HostVertex),
}

/// The concrete graph produced by one rule application.
#[derive(Debug, Clone)]
pub struct Rewrite {
    pub result: LabeledGraph,
    /// `trace[copy][v]`: the result vertex that host vertex `v` of `copy` became.
    pub trace: Vec<Vec<Option<usize>>>,
    /// result vertex of each created rule vertex
    pub created: Vec<usize>,
}

/// Dangling and simplicity checks for the part of `m` that lands in host `copy`.
fn check_copy(rule: &CompiledRule, host: &LabeledGraph, m: &Morphism, copy: usize) -> Result<(), ApplyError> {
    let fx = rule.effects();
    let left = rule.left();
    for (lv, after) in fx.vertex_after.iter().enumerate() {
        match m.image(lv) {
            Some(img) if img.copy == copy && after.is_none()
                // the match is injective on edges, so equal degrees mean every
                // incident host edge is matched (and hence deleted)
                && host.degree(img.vertex) != left.degree(lv) => {
                    return Err(ApplyError::Dangling(img));
                }
            _ => {}
        }
    }
    for (a, b, _) in &fx.created_edges {
        let (End::Matched(a), End::Matched(b)) = (*a, *b) else { continue };
        let (Some(ia), Some(ib)) = (m.image(a), m.image(b)) else { continue };
        if ia.copy != copy || ib.copy != copy || host.edge_between(ia.vertex, ib.vertex).is_none() {
            continue;
        }
        let deleted_by_rule = left.edge_between(a, b).is_some_and(|e| fx.edge_after[e].is_none());
        if !deleted_by_rule {
            return Err(ApplyError::Simplicity(ia, ib));
        }
    }
    Ok(())
}

/// Computes the pushout result `H` of applying `rule` to the disjoint union of
/// `hosts` at the total match `m`.
pub fn rewrite(rule: &CompiledRule, hosts: &[&LabeledGraph], m: &Morphism) -> Result<Rewrite, ApplyError> {
    if !m.is_total() || m.pattern_size() != rule.left().vertex_count() {
        return Err(ApplyError::IncompleteMatch);
    }
    for (copy, host) in hosts.iter().enumerate() {
        check_copy(rule, host, m, copy)?;
    }
    let fx = rule.effects();
    let left = rule.left();

    // what happens to each matched host vertex / edge
    let mut vertex_fate: Vec<HashMap<usize, Option<&crate::graph::Label>>> = vec![HashMap::new(); hosts.len()];
    for (lv, after) in fx.vertex_after.iter().enumerate() {
        let img = m.image(lv).expect("total");
        vertex_fate[img.copy].insert(img.vertex, after.as_ref());
    }
    let mut edge_fate: Vec<HashMap<usize, Option<&crate::graph::Label>>> = vec![HashMap::new(); hosts.len()];
    for (le, e) in left.edges().iter().enumerate() {
        let a = m.image(e.source).expect("total");
        let b = m.image(e.target).expect("total");
        let he = hosts[a.copy].edge_between(a.vertex, b.vertex).expect("match preserves edges");
        debug_assert_eq!(a.copy, b.copy);
        edge_fate[a.copy].insert(he, fx.edge_after[le].as_ref());
    }

    let mut result = LabeledGraph::new();
    let mut trace = Vec::with_capacity(hosts.len());
    for (copy, host) in hosts.iter().enumerate() {
        let mut t = vec![None; host.vertex_count()];
        for (v, slot) in t.iter_mut().enumerate() {
            let label = match vertex_fate[copy].get(&v) {
                Some(None) => continue,
                Some(Some(l)) => (*l).clone(),
                None => host.label(v).clone(),
            };
            *slot = Some(result.add_vertex(label));
        }
        for (ei, e) in host.edges().iter().enumerate() {
            let label = match edge_fate[copy].get(&ei) {
                Some(None) => continue,
                Some(Some(l)) => (*l).clone(),
                None => e.label.clone(),
            };
            let (a, b) = (t[e.source].expect("dangling checked"), t[e.target].expect("dangling checked"));
            result.add_edge(a, b, label).expect("kept edges stay simple");
        }
        trace.push(t);
    }
    let created: Vec<usize> = fx.created_vertices.iter().map(|l| result.add_vertex(l.clone())).collect();
    for (a, b, label) in &fx.created_edges {
        let resolve = |end: End| match end {
            End::Matched(lv) => {
                let img = m.image(lv).expect("total");
                (trace[img.copy][img.vertex].expect("created edges attach to context vertices"), Some(img))
            }
            End::Created(i) => (created[i], None),
        };
        let ((ra, ia), (rb, ib)) = (resolve(*a), resolve(*b));
        if result.add_edge(ra, rb, label.clone()).is_err() {
            let fallback = HostVertex { copy: usize::MAX, vertex: usize::MAX };
            return Err(ApplyError::Simplicity(ia.unwrap_or(fallback), ib.unwrap_or(fallback)));
        }
    }
    Ok(Rewrite { result, trace, created })
}

/// One proper derivation `G =(p,m)=> H` between multisets of interned graphs.
#[derive(Debug, Clone)]
pub struct Derivation {
    pub rule: Arc<CompiledRule>,
    /// Input graphs in binding order; position = host copy index of the match.
    pub inputs: Vec<GraphId>,
    pub outputs: Vec<GraphId>,
    pub morphism: Morphism,
    /// `trace[copy][v]`: where input vertex `v` ended up, as `(output index, vertex
    /// of the stored representative)`; `None` for deleted vertices.
    pub trace: Vec<Vec<Option<HostVertex>>>,
    /// Output position of each vertex created by the rule.
    pub created: Vec<HostVertex>,
}

/// Derivations with equal keys differ only in their match and count as duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DerivationKey {
    pub rule: String,
    pub inputs: ComponentMultiset,
    pub outputs: ComponentMultiset,
}

impl Derivation {
    pub fn key(&self) -> DerivationKey {
        DerivationKey {
            rule: self.rule.name().to_string(),
            inputs: self.input_multiset(),
            outputs: self.output_multiset(),
        }
    }

    pub fn input_multiset(&self) -> ComponentMultiset {
        self.inputs.iter().copied().collect()
    }

    pub fn output_multiset(&self) -> ComponentMultiset {
        self.outputs.iter().copied().collect()
    }

    /// The match touches every input component.
    pub fn is_proper(&self) -> bool {
        let copies = self.morphism.copies();
        (0..self.inputs.len()).all(|c| copies.binary_search(&c).is_ok())
    }

    /// The vertex bijection between inputs and outputs, available when the rule
    /// neither creates nor deletes vertices. Pairs are `(input vertex, output vertex)`.
    pub fn atom_mapping(&self) -> Option<Vec<(HostVertex, HostVertex)>> {
        if self.rule.rule().creates_or_deletes_vertices() {
            return None;
        }
        let mut out = Vec::new();
        for (copy, t) in self.trace.iter().enumerate() {
            for (v, target) in t.iter().enumerate() {
                out.push((HostVertex { copy, vertex: v }, (*target)?));
            }
        }
        Some(out)
    }
}

/// Applies `rule` at the total match `m` into the given input graphs and interns
/// every connected component of the result.
pub fn apply_at(
    rule: &Arc<CompiledRule>,
    inputs: &[GraphId],
    m: &Morphism,
    repo: &mut GraphRepository,
) -> Result<Derivation, ApplyError> {
    let hosts: Vec<&LabeledGraph> = inputs.iter().map(|&g| repo.graph(g)).collect();
    let rw = rewrite(rule, &hosts, m)?;
    let components = connected_components(&rw.result);
    let mut location = vec![HostVertex { copy: 0, vertex: 0 }; rw.result.vertex_count()];
    let mut outputs = Vec::with_capacity(components.len());
    for (out_idx, comp) in components.into_iter().enumerate() {
        let interned = repo.intern(comp.graph).expect("components are connected and nonempty");
        for (i, &orig) in comp.origin.iter().enumerate() {
            location[orig] = HostVertex { copy: out_idx, vertex: interned.vertex_map[i] };
        }
        outputs.push(interned.id);
    }
    let trace = rw.trace.iter().map(|t| t.iter().map(|r| r.map(|r| location[r])).collect()).collect();
    let created = rw.created.iter().map(|&r| location[r]).collect();
    Ok(Derivation { rule: rule.clone(), inputs: inputs.to_vec(), outputs, morphism: m.clone(), trace, created })
}

/// Supplies embeddings of left components into interned graphs.
pub trait EmbeddingSource {
    fn embeddings(&mut self, rule: &CompiledRule, component: usize, g: GraphId, repo: &GraphRepository) -> Arc<Vec<VertexMap>>;
}

/// Memoizes component embeddings per `(rule, component, graph)`; every cache miss is
/// one subgraph isomorphism query.
#[derive(Debug, Default)]
pub struct EmbeddingCache {
    entries: HashMap<(u64, usize, GraphId), Arc<Vec<VertexMap>>>,
    queries: u64,
}

impl EmbeddingCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }
}

impl EmbeddingSource for EmbeddingCache {
    fn embeddings(&mut self, rule: &CompiledRule, component: usize, g: GraphId, repo: &GraphRepository) -> Arc<Vec<VertexMap>> {
        let queries = &mut self.queries;
        self.entries
            .entry((rule.uid(), component, g))
            .or_insert_with(|| {
                *queries += 1;
                Arc::new(enumerate_embeddings(&rule.components()[component].graph, repo.graph(g)))
            })
            .clone()
    }
}

/// A rule with some of its left components bound to host graphs.
///
/// The bound hosts, transformed by the bound part of the rule, together with the
/// original right graph form the right side `R_G` of the partial rule; the unbound
/// components form its left side `L'`.
#[derive(Debug, Clone)]
pub struct PartialRule {
    rule: Arc<CompiledRule>,
    hosts: Vec<GraphId>,
    morphism: Morphism,
    remaining: Vec<usize>,
}

impl PartialRule {
    pub fn new(rule: Arc<CompiledRule>) -> Self {
        let remaining = (0..rule.components().len()).collect();
        let morphism = Morphism::empty(rule.left().vertex_count());
        PartialRule { rule, hosts: Vec::new(), morphism, remaining }
    }

    pub fn rule(&self) -> &Arc<CompiledRule> {
        &self.rule
    }

    /// Bound graphs; the index is the host copy used by the morphism.
    pub fn hosts(&self) -> &[GraphId] {
        &self.hosts
    }

    pub fn morphism(&self) -> &Morphism {
        &self.morphism
    }

    /// Indices of left components not bound yet.
    pub fn remaining(&self) -> &[usize] {
        &self.remaining
    }

    /// All left components are bound: the partial rule encodes a full derivation.
    pub fn is_complete(&self) -> bool {
        self.remaining.is_empty()
    }

    /// The remaining left graph `L'`.
    pub fn remaining_left(&self) -> LabeledGraph {
        let mut g = LabeledGraph::new();
        for &c in &self.remaining {
            g.append(&self.rule.components()[c].graph);
        }
        g
    }

    /// Materializes `R_G`: the bound hosts transformed by the bound part of the rule,
    /// glued to the not yet attached rest of the right graph.
    pub fn right_graph(&self, repo: &GraphRepository) -> LabeledGraph {
        let fx = self.rule.effects();
        let left = self.rule.left();
        let mut g = LabeledGraph::new();
        let mut at = vec![HashMap::new(); self.hosts.len()];
        let mut matched = vec![None; left.vertex_count()];
        for (copy, &h) in self.hosts.iter().enumerate() {
            let host = repo.graph(h);
            let mut fate: HashMap<usize, usize> = HashMap::new();
            for lv in 0..left.vertex_count() {
                if let Some(img) = self.morphism.image(lv) {
                    if img.copy == copy {
                        fate.insert(img.vertex, lv);
                    }
                }
            }
            for v in 0..host.vertex_count() {
                let label = match fate.get(&v) {
                    Some(&lv) => match &fx.vertex_after[lv] {
                        Some(l) => l.clone(),
                        None => continue,
                    },
                    None => host.label(v).clone(),
                };
                let nv = g.add_vertex(label);
                at[copy].insert(v, nv);
                if let Some(&lv) = fate.get(&v) {
                    matched[lv] = Some(nv);
                }
            }
            for e in host.edges() {
                let (la, lb) = (fate.get(&e.source), fate.get(&e.target));
                let label = match (la, lb) {
                    (Some(&a), Some(&b)) => match left.edge_between(a, b) {
                        Some(le) => match &fx.edge_after[le] {
                            Some(l) => l.clone(),
                            None => continue,
                        },
                        None => e.label.clone(),
                    },
                    _ => e.label.clone(),
                };
                g.add_edge(at[copy][&e.source], at[copy][&e.target], label).expect("bound part validated");
            }
        }
        // the rest of R: unbound context vertices and created vertices
        for (lv, after) in fx.vertex_after.iter().enumerate() {
            if matched[lv].is_none() {
                if let Some(l) = after {
                    matched[lv] = Some(g.add_vertex(l.clone()));
                }
            }
        }
        for e in left.edges() {
            let le = left.edge_between(e.source, e.target).expect("edge");
            if self.morphism.image(e.source).is_none() {
                if let Some(l) = &fx.edge_after[le] {
                    g.add_edge(matched[e.source].unwrap(), matched[e.target].unwrap(), l.clone()).expect("simple");
                }
            }
        }
        let created: Vec<usize> = fx.created_vertices.iter().map(|l| g.add_vertex(l.clone())).collect();
        for (a, b, l) in &fx.created_edges {
            let end = |x: End| match x {
                End::Matched(lv) => matched[lv].expect("context vertex present"),
                End::Created(i) => created[i],
            };
            g.add_edge(end(*a), end(*b), l.clone()).expect("bound part validated");
        }
        g
    }
}

/// Binds `g` to the partial rule `partial`: for every nonempty subset of the
/// remaining left components and every injective merge of their embeddings into
/// `g`, returns the resulting partial rule. Bindings whose partial application
/// would be rejected (dangling or simplicity) are dropped.
pub fn bind_graph(
    partial: &PartialRule,
    g: GraphId,
    repo: &GraphRepository,
    source: &mut impl EmbeddingSource,
) -> Vec<PartialRule> {
    let rule = &partial.rule;
    let copy = partial.hosts.len();
    let rem = &partial.remaining;
    let lists: Vec<Arc<Vec<VertexMap>>> = rem.iter().map(|&c| source.embeddings(rule, c, g, repo)).collect();
    let host = repo.graph(g);
    let left_size = rule.left().vertex_count();
    let mut out = Vec::new();
    for mask in 1u32..(1 << rem.len()) {
        let chosen: Vec<usize> = (0..rem.len()).filter(|i| mask & (1 << i) != 0).collect();
        if chosen.iter().any(|&i| lists[i].is_empty()) {
            continue;
        }
        let mut pick = vec![0usize; chosen.len()];
        'combos: loop {
            let mut parts = vec![partial.morphism.clone()];
            for (k, &i) in chosen.iter().enumerate() {
                let comp = &rule.components()[rem[i]];
                parts.push(Morphism::from_component(left_size, &comp.vertices, &lists[i][pick[k]], copy));
            }
            if let Ok(m) = Morphism::merge(&parts) {
                if check_copy(rule, host, &m, copy).is_ok() {
                    let mut hosts = partial.hosts.clone();
                    hosts.push(g);
                    let remaining = (0..rem.len()).filter(|i| mask & (1 << i) == 0).map(|i| rem[i]).collect();
                    out.push(PartialRule { rule: rule.clone(), hosts, morphism: m, remaining });
                }
            }
            // odometer over the chosen embedding lists
            for k in (0..chosen.len()).rev() {
                pick[k] += 1;
                if pick[k] < lists[chosen[k]].len() {
                    continue 'combos;
                }
                pick[k] = 0;
            }
            break;
        }
    }
    out
}

/// Which derivations to enumerate: inputs drawn (with repetition) from `universe`,
/// at most `max_components` of them, at least one from `required` unless it is empty.
#[derive(Debug, Clone, Copy)]
pub struct DerivationQuery<'a> {
    pub universe: &'a [GraphId],
    pub required: &'a [GraphId],
    pub max_components: usize,
}

/// All proper derivations of `rule` matching `query`, deduplicated by
/// [`DerivationKey`], in discovery order. Bindings start from required graphs and
/// are extended with universe graphs; `admit` sees each input multiset before the
/// rule is applied and may veto it.
pub fn enumerate_proper_derivations(
    rule: &Arc<CompiledRule>,
    query: &DerivationQuery<'_>,
    repo: &mut GraphRepository,
    source: &mut impl EmbeddingSource,
    admit: &mut dyn FnMut(&CompiledRule, &ComponentMultiset, &GraphRepository) -> bool,
) -> Vec<Derivation> {
    let starts = if query.required.is_empty() { query.universe } else { query.required };
    let mut rank: HashMap<GraphId, usize> = HashMap::new();
    for (i, &g) in starts.iter().enumerate() {
        rank.entry(g).or_insert(i);
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut complete = Vec::new();
    for (i, &start) in starts.iter().enumerate() {
        if rank[&start] != i {
            continue;
        }
        let mut stack: Vec<PartialRule> = bind_graph(&PartialRule::new(rule.clone()), start, repo, source);
        stack.reverse();
        while let Some(p) = stack.pop() {
            if p.is_complete() {
                complete.push(p);
                continue;
            }
            if p.hosts.len() >= query.max_components {
                continue;
            }
            let mut next = Vec::new();
            for &u in query.universe {
                // multisets containing an earlier start are enumerated from that start
                if rank.get(&u).is_some_and(|&r| r < i) {
                    continue;
                }
                next.extend(bind_graph(&p, u, repo, source));
            }
            stack.extend(next.into_iter().rev());
        }
        for p in complete.drain(..) {
            let inputs: ComponentMultiset = p.hosts.iter().copied().collect();
            if !admit(rule, &inputs, repo) {
                continue;
            }
            if let Ok(d) = apply_at(rule, &p.hosts, &p.morphism, repo) {
                if seen.insert(d.key()) {
                    out.push(d);
                }
            }
        }
    }
    out
}
