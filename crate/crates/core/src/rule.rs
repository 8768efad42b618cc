//! DPO rules `L <- K -> R`.
//!
//! A rule is stored as one set of rule vertices and one set of rule edges, each
//! element carrying an optional label on the left and on the right side. Elements
//! with both labels form the context `K` (and may be relabeled), left-only
//! elements are deleted and right-only elements are created.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use crate::graph::{connected_components, Label, LabeledGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Membership {
    LeftOnly,
    Context,
    RightOnly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleVertex {
    pub id: u32,
    pub left: Option<Label>,
    pub right: Option<Label>,
}

impl RuleVertex {
    pub fn membership(&self) -> Option<Membership> {
        membership(&self.left, &self.right)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleEdge {
    pub source: u32,
    pub target: u32,
    pub left: Option<Label>,
    pub right: Option<Label>,
}

impl RuleEdge {
    pub fn membership(&self) -> Option<Membership> {
        membership(&self.left, &self.right)
    }
}

fn membership(left: &Option<Label>, right: &Option<Label>) -> Option<Membership> {
    match (left, right) {
        (Some(_), Some(_)) => Some(Membership::Context),
        (Some(_), None) => Some(Membership::LeftOnly),
        (None, Some(_)) => Some(Membership::RightOnly),
        (None, None) => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateVertex(u32),
    UnlabeledVertex(u32),
    UnlabeledEdge(u32, u32),
    UnknownEndpoint { edge: (u32, u32), vertex: u32 },
    SelfLoop(u32),
    /// Two edges between the same pair on one side of the rule.
    NonSimpleSide { side: &'static str, edge: (u32, u32) },
    /// An edge on one side whose endpoint does not exist on that side.
    DanglingEdge { side: &'static str, edge: (u32, u32), vertex: u32 },
    EmptyLeft,
    /// Chemical rules may neither create nor delete vertices.
    VertexNotConserved(u32),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateVertex(v) => write!(f, "vertex {v} declared twice"),
            Violation::UnlabeledVertex(v) => write!(f, "vertex {v} has no label on either side"),
            Violation::UnlabeledEdge(u, v) => write!(f, "edge {u}-{v} has no label on either side"),
            Violation::UnknownEndpoint { edge, vertex } => {
                write!(f, "edge {}-{} references unknown vertex {vertex}", edge.0, edge.1)
            }
            Violation::SelfLoop(v) => write!(f, "self-loop on vertex {v}"),
            Violation::NonSimpleSide { side, edge } => {
                write!(f, "{side} side has parallel edges between {} and {}", edge.0, edge.1)
            }
            Violation::DanglingEdge { side, edge, vertex } => write!(
                f,
                "{side} side edge {}-{} touches vertex {vertex} which is absent on that side",
                edge.0, edge.1
            ),
            Violation::EmptyLeft => write!(f, "left side is empty"),
            Violation::VertexNotConserved(v) => write!(f, "vertex {v} is created or deleted"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("rule '{name}' is invalid: {}", .violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
pub struct RuleError {
    pub name: String,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Rule {
    pub name: String,
    pub vertices: Vec<RuleVertex>,
    pub edges: Vec<RuleEdge>,
}

impl Rule {
    pub fn new(name: &str) -> Self {
        Rule { name: name.to_string(), ..Default::default() }
    }

    pub fn vertex(mut self, id: u32, left: Option<&str>, right: Option<&str>) -> Self {
        self.vertices.push(RuleVertex { id, left: left.map(Label::new), right: right.map(Label::new) });
        self
    }

    /// Context vertex whose label is unchanged.
    pub fn context_vertex(self, id: u32, label: &str) -> Self {
        self.vertex(id, Some(label), Some(label))
    }

    pub fn edge(mut self, source: u32, target: u32, left: Option<&str>, right: Option<&str>) -> Self {
        self.edges.push(RuleEdge { source, target, left: left.map(Label::new), right: right.map(Label::new) });
        self
    }

    pub fn context_edge(self, source: u32, target: u32, label: &str) -> Self {
        self.edge(source, target, Some(label), Some(label))
    }

    /// Structural well-formedness, plus vertex conservation when `chemical` is set.
    pub fn validate(&self, chemical: bool) -> Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        let mut by_id: HashMap<u32, &RuleVertex> = HashMap::new();
        for v in &self.vertices {
            if by_id.insert(v.id, v).is_some() {
                out.push(Violation::DuplicateVertex(v.id));
            }
            match v.membership() {
                None => out.push(Violation::UnlabeledVertex(v.id)),
                Some(Membership::Context) => {}
                Some(_) if chemical => out.push(Violation::VertexNotConserved(v.id)),
                Some(_) => {}
            }
        }
        let mut left_pairs = HashSet::new();
        let mut right_pairs = HashSet::new();
        for e in &self.edges {
            let pair = (e.source.min(e.target), e.source.max(e.target));
            if e.source == e.target {
                out.push(Violation::SelfLoop(e.source));
                continue;
            }
            if e.membership().is_none() {
                out.push(Violation::UnlabeledEdge(e.source, e.target));
                continue;
            }
            let mut endpoints_known = true;
            for end in [e.source, e.target] {
                if !by_id.contains_key(&end) {
                    out.push(Violation::UnknownEndpoint { edge: pair, vertex: end });
                    endpoints_known = false;
                }
            }
            if !endpoints_known {
                continue;
            }
            for (side, present, pairs) in [
                ("left", e.left.is_some(), &mut left_pairs),
                ("right", e.right.is_some(), &mut right_pairs),
            ] {
                if !present {
                    continue;
                }
                if !pairs.insert(pair) {
                    out.push(Violation::NonSimpleSide { side, edge: pair });
                }
                for end in [e.source, e.target] {
                    let v = by_id[&end];
                    let on_side = if side == "left" { v.left.is_some() } else { v.right.is_some() };
                    if !on_side {
                        out.push(Violation::DanglingEdge { side, edge: pair, vertex: end });
                    }
                }
            }
        }
        if !self.vertices.iter().any(|v| v.left.is_some()) {
            out.push(Violation::EmptyLeft);
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    /// The inverse production: left and right sides swapped.
    pub fn inverse(&self) -> Rule {
        Rule {
            name: inverse_name(&self.name),
            vertices: self
                .vertices
                .iter()
                .map(|v| RuleVertex { id: v.id, left: v.right.clone(), right: v.left.clone() })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| RuleEdge { source: e.source, target: e.target, left: e.right.clone(), right: e.left.clone() })
                .collect(),
        }
    }

    pub fn creates_or_deletes_vertices(&self) -> bool {
        self.vertices.iter().any(|v| v.membership() != Some(Membership::Context))
    }
}

fn inverse_name(name: &str) -> String {
    match name.strip_suffix("_inverse") {
        Some(base) => base.to_string(),
        None => format!("{name}_inverse"),
    }
}

/// One connected component of the left graph.
#[derive(Debug, Clone)]
pub struct LeftComponent {
    pub graph: LabeledGraph,
    /// `vertices[i]` is the left-graph vertex that component vertex `i` stands for.
    pub vertices: Vec<usize>,
}

static NEXT_RULE_UID: AtomicU64 = AtomicU64::new(0);

/// A validated rule with its left graph and left components precomputed.
#[derive(Debug)]
pub struct CompiledRule {
    uid: u64,
    rule: Rule,
    left: LabeledGraph,
    /// left-graph vertex -> index into `rule.vertices`
    left_origin: Vec<usize>,
    /// index into `rule.vertices` -> left-graph vertex
    left_index: Vec<Option<usize>>,
    components: Vec<LeftComponent>,
    /// left-graph vertex -> its component
    component_of: Vec<usize>,
    effects: Effects,
}

/// Endpoint of a created edge: either a matched left vertex or a created vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    Matched(usize),
    Created(usize),
}

/// What an application does to the image of the left graph.
#[derive(Debug, Clone, Default)]
pub struct Effects {
    /// per left vertex: None if deleted, else the label it carries afterwards
    pub vertex_after: Vec<Option<Label>>,
    /// per left-graph edge index: None if deleted, else the label afterwards
    pub edge_after: Vec<Option<Label>>,
    pub created_vertices: Vec<Label>,
    /// rule-vertex position of each created vertex
    pub created_origin: Vec<usize>,
    pub created_edges: Vec<(End, End, Label)>,
}

impl CompiledRule {
    pub fn new(rule: Rule) -> Result<CompiledRule, RuleError> {
        rule.validate(false).map_err(|violations| RuleError { name: rule.name.clone(), violations })?;
        let mut left = LabeledGraph::new();
        let mut left_origin = Vec::new();
        let mut left_index = vec![None; rule.vertices.len()];
        let position: HashMap<u32, usize> = rule.vertices.iter().enumerate().map(|(i, v)| (v.id, i)).collect();
        for (i, v) in rule.vertices.iter().enumerate() {
            if let Some(l) = &v.left {
                left_index[i] = Some(left.add_vertex(l.clone()));
                left_origin.push(i);
            }
        }
        for e in &rule.edges {
            if let Some(l) = &e.left {
                let a = left_index[position[&e.source]].expect("validated");
                let b = left_index[position[&e.target]].expect("validated");
                left.add_edge(a, b, l.clone()).expect("validated");
            }
        }
        let mut component_of = vec![0; left.vertex_count()];
        let components: Vec<LeftComponent> = connected_components(&left)
            .into_iter()
            .enumerate()
            .map(|(c, comp)| {
                for &v in &comp.origin {
                    component_of[v] = c;
                }
                LeftComponent { graph: comp.graph, vertices: comp.origin }
            })
            .collect();
        let effects = Effects::compute(&rule, &left, &left_index, &position);
        Ok(CompiledRule {
            effects,
            uid: NEXT_RULE_UID.fetch_add(1, Ordering::Relaxed),
            rule,
            left,
            left_origin,
            left_index,
            components,
            component_of,
        })
    }

    /// Process-unique identity, used to key embedding caches.
    pub fn uid(&self) -> u64 {
        self.uid
    }

    pub fn name(&self) -> &str {
        &self.rule.name
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    pub fn left(&self) -> &LabeledGraph {
        &self.left
    }

    pub fn components(&self) -> &[LeftComponent] {
        &self.components
    }

    pub fn component_of(&self, left_vertex: usize) -> usize {
        self.component_of[left_vertex]
    }

    /// The rule vertex behind a left-graph vertex.
    pub fn left_vertex(&self, left_vertex: usize) -> &RuleVertex {
        &self.rule.vertices[self.left_origin[left_vertex]]
    }

    /// Left-graph index of the rule vertex at position `i` of `rule().vertices`.
    pub fn left_index(&self, i: usize) -> Option<usize> {
        self.left_index[i]
    }

    /// The right graph `R`, with `origin[i]` the rule-vertex position of vertex `i`.
    pub fn right(&self) -> (LabeledGraph, Vec<usize>) {
        let mut g = LabeledGraph::new();
        let mut index = vec![usize::MAX; self.rule.vertices.len()];
        let mut origin = Vec::new();
        for (i, v) in self.rule.vertices.iter().enumerate() {
            if let Some(l) = &v.right {
                index[i] = g.add_vertex(l.clone());
                origin.push(i);
            }
        }
        for e in &self.rule.edges {
            if let Some(l) = &e.right {
                let a = index[self.position(e.source)];
                let b = index[self.position(e.target)];
                g.add_edge(a, b, l.clone()).expect("validated");
            }
        }
        (g, origin)
    }

    pub fn effects(&self) -> &Effects {
        &self.effects
    }

    pub fn position(&self, id: u32) -> usize {
        self.rule.vertices.iter().position(|v| v.id == id).expect("validated rule vertex")
    }
}

impl Effects {
    fn compute(rule: &Rule, left: &LabeledGraph, left_index: &[Option<usize>], position: &HashMap<u32, usize>) -> Effects {
        let mut fx = Effects { vertex_after: vec![None; left.vertex_count()], ..Default::default() };
        let mut created_index = vec![usize::MAX; rule.vertices.len()];
        for (i, v) in rule.vertices.iter().enumerate() {
            match (left_index[i], &v.right) {
                (Some(lv), right) => fx.vertex_after[lv] = right.clone(),
                (None, Some(l)) => {
                    created_index[i] = fx.created_vertices.len();
                    fx.created_vertices.push(l.clone());
                    fx.created_origin.push(i);
                }
                (None, None) => unreachable!("validated"),
            }
        }
        fx.edge_after = vec![None; left.edge_count()];
        let end = |id: u32| {
            let i = position[&id];
            match left_index[i] {
                Some(lv) => End::Matched(lv),
                None => End::Created(created_index[i]),
            }
        };
        for e in &rule.edges {
            match (&e.left, &e.right) {
                (Some(_), right) => {
                    let a = left_index[position[&e.source]].expect("validated");
                    let b = left_index[position[&e.target]].expect("validated");
                    let idx = left.edge_between(a, b).expect("left edge exists");
                    fx.edge_after[idx] = right.clone();
                }
                (None, Some(l)) => fx.created_edges.push((end(e.source), end(e.target), l.clone())),
                (None, None) => unreachable!("validated"),
            }
        }
        fx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn relabel_b_to_c() -> Rule {
        Rule::new("p")
            .context_vertex(0, "a")
            .context_vertex(1, "a")
            .edge(0, 1, Some("b"), Some("c"))
    }

    #[test]
    fn context_edge_touching_left_only_vertex_is_rejected() {
        let r = Rule::new("bad").vertex(0, Some("a"), None).context_vertex(1, "a").context_edge(0, 1, "x");
        let errs = r.validate(false).unwrap_err();
        assert!(errs.contains(&Violation::DanglingEdge { side: "right", edge: (0, 1), vertex: 0 }));
    }

    #[test]
    fn chemical_mode_rejects_vertex_deletion() {
        let r = Rule::new("del").vertex(0, Some("R"), None);
        assert!(r.validate(false).is_ok());
        assert_eq!(r.validate(true), Err(vec![Violation::VertexNotConserved(0)]));
    }

    #[test]
    fn empty_left_and_duplicates() {
        let r = Rule::new("create").vertex(0, None, Some("a"));
        assert_eq!(r.validate(false), Err(vec![Violation::EmptyLeft]));
        let r = Rule::new("dup").context_vertex(0, "a").context_vertex(0, "b");
        assert_eq!(r.validate(false), Err(vec![Violation::DuplicateVertex(0)]));
    }

    #[test]
    fn delete_and_recreate_on_same_pair_is_allowed() {
        let r = Rule::new("swap")
            .context_vertex(0, "a")
            .context_vertex(1, "a")
            .edge(0, 1, Some("x"), None)
            .edge(0, 1, None, Some("y"));
        assert!(r.validate(true).is_ok());
        let r = r.context_edge(1, 0, "z");
        assert!(r.validate(false).is_err());
    }

    #[test]
    fn inverse_is_an_involution() {
        let p = relabel_b_to_c();
        let inv = p.inverse();
        assert_eq!(inv.edges[0].left.as_ref().unwrap().as_str(), "c");
        assert_eq!(inv.edges[0].right.as_ref().unwrap().as_str(), "b");
        assert_eq!(inv.inverse(), p);
    }

    #[test]
    fn compiled_rule_splits_left_components() {
        let r = Rule::new("two")
            .context_vertex(0, "C")
            .context_vertex(1, "C")
            .context_vertex(2, "C")
            .context_edge(0, 1, "=")
            .vertex(3, None, Some("H"));
        let c = CompiledRule::new(r).unwrap();
        assert_eq!(c.left().vertex_count(), 3);
        assert_eq!(c.components().len(), 2);
        assert_eq!(c.right().0.vertex_count(), 4);
    }
}
