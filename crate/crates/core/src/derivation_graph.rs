//! The derivation hypergraph over isomorphism classes of connected graphs.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;

use crate::dpo::{Derivation, DerivationKey};
use crate::format::to_gml;
use crate::repository::{ComponentMultiset, GraphId, GraphRepository};

#[derive(Debug, Clone)]
pub struct HyperEdge {
    pub inputs: ComponentMultiset,
    pub rule: String,
    pub outputs: ComponentMultiset,
}

impl HyperEdge {
    /// Exactly one input and one output, each with multiplicity one.
    pub fn is_one_to_one(&self) -> bool {
        self.inputs.len() == 1 && self.outputs.len() == 1
    }
}

/// Deduplicated derivations, keyed by rule name and input/output class multisets.
#[derive(Debug, Default)]
pub struct DerivationGraph {
    vertices: Vec<GraphId>,
    vertex_set: HashSet<GraphId>,
    edges: Vec<HyperEdge>,
    representatives: Vec<Derivation>,
    index: HashMap<DerivationKey, usize>,
}

impl DerivationGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts the derivation; returns false if an equal-keyed one is already present.
    pub fn record(&mut self, d: &Derivation) -> bool {
        let key = d.key();
        if self.index.contains_key(&key) {
            return false;
        }
        for &g in d.inputs.iter().chain(&d.outputs) {
            if self.vertex_set.insert(g) {
                self.vertices.push(g);
            }
        }
        self.index.insert(key.clone(), self.edges.len());
        self.edges.push(HyperEdge { inputs: key.inputs, rule: key.rule, outputs: key.outputs });
        self.representatives.push(d.clone());
        true
    }

    pub fn contains(&self, key: &DerivationKey) -> bool {
        self.index.contains_key(key)
    }

    /// Graphs in order of first appearance.
    pub fn vertices(&self) -> &[GraphId] {
        &self.vertices
    }

    pub fn edges(&self) -> &[HyperEdge] {
        &self.edges
    }

    /// The first derivation recorded for each hyperedge (same order as [`Self::edges`]).
    pub fn derivations(&self) -> &[Derivation] {
        &self.representatives
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Graphviz digraph. Hyperedges become box nodes with one arc per unit of
    /// multiplicity; one-to-one derivations are drawn as a single labeled arc.
    pub fn to_dot(&self, repo: &GraphRepository) -> String {
        let mut out = String::from("digraph derivations {\n");
        let mut sorted = self.vertices.clone();
        sorted.sort_unstable();
        for g in &sorted {
            let label = repo.name(*g).map_or_else(|| g.to_string(), str::to_string);
            let _ = writeln!(out, "  {g} [shape=ellipse, label={}];", dot_quote(&label));
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.is_one_to_one() {
                let _ = writeln!(out, "  {} -> {} [label={}];", e.inputs.ids()[0], e.outputs.ids()[0], dot_quote(&e.rule));
                continue;
            }
            let _ = writeln!(out, "  r{i} [shape=box, label={}];", dot_quote(&e.rule));
            for g in e.inputs.ids() {
                let _ = writeln!(out, "  {g} -> r{i};");
            }
            for g in e.outputs.ids() {
                let _ = writeln!(out, "  r{i} -> {g};");
            }
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self, repo: &GraphRepository) -> String {
        #[derive(Serialize)]
        struct Count {
            id: u32,
            count: usize,
        }
        #[derive(Serialize)]
        struct Graph<'a> {
            id: u32,
            name: Option<&'a str>,
            gml: String,
        }
        #[derive(Serialize)]
        struct Edge<'a> {
            #[serde(rename = "in")]
            inputs: Vec<Count>,
            rule: &'a str,
            #[serde(rename = "out")]
            outputs: Vec<Count>,
        }
        #[derive(Serialize)]
        struct Document<'a> {
            format: u32,
            graphs: Vec<Graph<'a>>,
            edges: Vec<Edge<'a>>,
        }
        let counts = |m: &ComponentMultiset| m.counts().into_iter().map(|(g, count)| Count { id: g.0, count }).collect();
        let mut ids = self.vertices.clone();
        ids.sort_unstable();
        let doc = Document {
            format: 1,
            graphs: ids.iter().map(|&g| Graph { id: g.0, name: repo.name(g), gml: to_gml(repo.graph(g)) }).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| Edge { inputs: counts(&e.inputs), rule: &e.rule, outputs: counts(&e.outputs) })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
    }

    /// Shortest sequence of hyperedges leading from `source` to `target`. A hyperedge
    /// can fire once all its inputs are reached; `free` graphs count as always reached.
    /// The returned indices are in firing order.
    pub fn find_path(&self, source: GraphId, target: GraphId, free: &[GraphId]) -> Option<Vec<usize>> {
        if source == target {
            return Some(Vec::new());
        }
        let mut reached: HashMap<GraphId, Option<usize>> = HashMap::new();
        reached.insert(source, None);
        for &f in free {
            reached.entry(f).or_insert(None);
        }
        let mut by_input: HashMap<GraphId, Vec<usize>> = HashMap::new();
        for (i, e) in self.edges.iter().enumerate() {
            for (g, _) in e.inputs.counts() {
                by_input.entry(g).or_default().push(i);
            }
        }
        let mut fired = vec![false; self.edges.len()];
        let mut start: Vec<GraphId> = reached.keys().copied().collect();
        start.sort_unstable();
        let mut queue: VecDeque<GraphId> = start.into_iter().collect();
        while let Some(g) = queue.pop_front() {
            for &i in by_input.get(&g).map(Vec::as_slice).unwrap_or(&[]) {
                let e = &self.edges[i];
                if fired[i] || !e.inputs.ids().iter().all(|x| reached.contains_key(x)) {
                    continue;
                }
                fired[i] = true;
                for (h, _) in e.outputs.counts() {
                    if let std::collections::hash_map::Entry::Vacant(slot) = reached.entry(h) {
                        slot.insert(Some(i));
                        if h == target {
                            return Some(self.collect_path(target, &reached));
                        }
                        queue.push_back(h);
                    }
                }
            }
        }
        None
    }

    fn collect_path(&self, target: GraphId, reached: &HashMap<GraphId, Option<usize>>) -> Vec<usize> {
        fn visit(
            edges: &[HyperEdge],
            g: GraphId,
            reached: &HashMap<GraphId, Option<usize>>,
            seen: &mut HashSet<usize>,
            out: &mut Vec<usize>,
        ) {
            let Some(Some(i)) = reached.get(&g) else { return };
            if !seen.insert(*i) {
                return;
            }
            for &input in edges[*i].inputs.ids() {
                visit(edges, input, reached, seen, out);
            }
            out.push(*i);
        }
        let mut out = Vec::new();
        visit(&self.edges, target, reached, &mut HashSet::new(), &mut out);
        out
    }
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}
