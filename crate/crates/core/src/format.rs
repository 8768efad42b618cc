//! Text formats for graphs, rules and Catalan levels, plus GML output.
//!
//! ```text
//! graph g1 { v 0 "a"; v 1 "a"; e 0 1 "b"; }
//! rule p { context { v 0 "a"; v 1 "a"; e 0 1 "b" "c"; } }
//! level k4 { v 0 "0"; v 1 "0"; ... e 0 1 ""; ... }
//! ```

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{Label, LabeledGraph};
use crate::lexer::{quote, Cursor, Location, SyntaxError};
use crate::rule::{Membership, Rule, RuleEdge, RuleError, RuleVertex};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("{at}: vertex {id} declared twice")]
    DuplicateVertex { at: Location, id: u64 },
    #[error("{at}: edge references unknown vertex {id}")]
    UnknownVertex { at: Location, id: u64 },
    #[error("{at}: self-loop on vertex {id} is not allowed")]
    SelfLoop { at: Location, id: u64 },
    #[error("{at}: parallel edge between {a} and {b}")]
    ParallelEdge { at: Location, a: u64, b: u64 },
    #[error("{at}: name '{name}' is defined twice")]
    DuplicateName { at: Location, name: String },
    #[error("{at}: {source}")]
    InvalidRule { at: Location, source: RuleError },
}

/// A parsed graph together with the ids used in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedGraph {
    pub name: Option<String>,
    pub graph: LabeledGraph,
    /// `ids[v]` is the textual id of vertex `v`.
    pub ids: Vec<u64>,
}

/// Parses `v`/`e` statements up to a closing brace or the end of input.
pub fn parse_graph_body(cur: &mut Cursor) -> Result<(LabeledGraph, Vec<u64>), FormatError> {
    let mut g = LabeledGraph::new();
    let mut ids = Vec::new();
    let mut index: HashMap<u64, usize> = HashMap::new();
    while !cur.at_eof() && !cur.is_sym("}") {
        let at = cur.at();
        if cur.accept_ident("v") {
            let (id, at) = cur.expect_int()?;
            let (label, _) = cur.expect_str()?;
            cur.expect_sym(";")?;
            if index.insert(id, g.vertex_count()).is_some() {
                return Err(FormatError::DuplicateVertex { at, id });
            }
            g.add_vertex(label.as_str());
            ids.push(id);
        } else if cur.accept_ident("e") {
            let (a, at_a) = cur.expect_int()?;
            let (b, at_b) = cur.expect_int()?;
            let (label, _) = cur.expect_str()?;
            cur.expect_sym(";")?;
            if a == b {
                return Err(FormatError::SelfLoop { at, id: a });
            }
            let u = *index.get(&a).ok_or(FormatError::UnknownVertex { at: at_a, id: a })?;
            let v = *index.get(&b).ok_or(FormatError::UnknownVertex { at: at_b, id: b })?;
            if g.add_edge(u, v, label.as_str()).is_err() {
                return Err(FormatError::ParallelEdge { at, a: a.min(b), b: a.max(b) });
            }
        } else {
            return Err(cur.error(format!("expected 'v' or 'e', found {}", cur.peek().tok)).into());
        }
    }
    Ok((g, ids))
}

fn parse_blocks(text: &str, keyword: &str) -> Result<Vec<NamedGraph>, FormatError> {
    let mut cur = Cursor::new(text)?;
    if cur.is_ident("v") || cur.is_ident("e") {
        let (graph, ids) = parse_graph_body(&mut cur)?;
        if !cur.at_eof() {
            return Err(cur.error("unexpected input after graph statements").into());
        }
        return Ok(vec![NamedGraph { name: None, graph, ids }]);
    }
    let mut out = Vec::new();
    let mut names = HashSet::new();
    while !cur.at_eof() {
        cur.expect_keyword(keyword)?;
        let (name, at) = cur.expect_ident()?;
        if !names.insert(name.clone()) {
            return Err(FormatError::DuplicateName { at, name });
        }
        cur.expect_sym("{")?;
        let (graph, ids) = parse_graph_body(&mut cur)?;
        cur.expect_sym("}")?;
        out.push(NamedGraph { name: Some(name), graph, ids });
    }
    Ok(out)
}

/// Parses a graph file: either bare statements or one or more `graph` blocks.
pub fn parse_graphs(text: &str) -> Result<Vec<NamedGraph>, FormatError> {
    parse_blocks(text, "graph")
}

/// Parses a file expected to contain exactly one graph.
pub fn parse_graph(text: &str) -> Result<LabeledGraph, FormatError> {
    let mut graphs = parse_graphs(text)?;
    match graphs.len() {
        1 => Ok(graphs.remove(0).graph),
        n => Err(SyntaxError::new(Location { line: 1, column: 1 }, format!("expected one graph, found {n}")).into()),
    }
}

/// Parses `level` blocks (same body syntax as graphs).
pub fn parse_levels(text: &str) -> Result<Vec<NamedGraph>, FormatError> {
    parse_blocks(text, "level")
}

fn write_body(out: &mut String, g: &LabeledGraph, indent: &str) {
    for v in 0..g.vertex_count() {
        let _ = writeln!(out, "{indent}v {v} {};", quote(g.label(v).as_str()));
    }
    let mut edges: Vec<_> = g.edges().iter().collect();
    edges.sort_by_key(|e| (e.source, e.target));
    for e in edges {
        let _ = writeln!(out, "{indent}e {} {} {};", e.source, e.target, quote(e.label.as_str()));
    }
}

/// Writes statements using the given textual ids, keeping edge insertion order so
/// that reparsing reproduces `g` exactly.
pub fn write_graph_body(out: &mut String, g: &LabeledGraph, ids: &[u64], indent: &str) {
    for v in 0..g.vertex_count() {
        let _ = writeln!(out, "{indent}v {} {};", ids[v], quote(g.label(v).as_str()));
    }
    for e in g.edges() {
        let _ = writeln!(out, "{indent}e {} {} {};", ids[e.source], ids[e.target], quote(e.label.as_str()));
    }
}

/// Bare `v`/`e` statements, vertices then edges in ascending id order.
pub fn serialize_graph(g: &LabeledGraph) -> String {
    let mut out = String::new();
    write_body(&mut out, g, "");
    out
}

pub fn serialize_named(keyword: &str, name: &str, g: &LabeledGraph) -> String {
    let mut out = format!("{keyword} {name} {{\n");
    write_body(&mut out, g, "  ");
    out.push_str("}\n");
    out
}

/// Parses the body of a rule (the sections between its braces).
pub fn parse_rule_body(cur: &mut Cursor, name: &str, at: Location) -> Result<Rule, FormatError> {
    let mut rule = Rule::new(name);
    let mut seen = HashSet::new();
    while !cur.is_sym("}") && !cur.at_eof() {
        let (section, sat) = cur.expect_ident()?;
        if !["left", "context", "right"].contains(&section.as_str()) {
            return Err(SyntaxError::new(sat, format!("expected 'left', 'context' or 'right', found '{section}'")).into());
        }
        if !seen.insert(section.clone()) {
            return Err(SyntaxError::new(sat, format!("section '{section}' appears twice")).into());
        }
        cur.expect_sym("{")?;
        while !cur.accept_sym("}") {
            let is_vertex = if cur.accept_ident("v") {
                true
            } else if cur.accept_ident("e") {
                false
            } else {
                return Err(cur.error(format!("expected 'v' or 'e', found {}", cur.peek().tok)).into());
            };
            let (a, _) = cur.expect_int()?;
            let b = if is_vertex { None } else { Some(cur.expect_int()?.0) };
            let (first, _) = cur.expect_str()?;
            let second = if section == "context" && cur.is_str() { Some(cur.expect_str()?.0) } else { None };
            cur.expect_sym(";")?;
            let first = Label::new(&first);
            let (left, right) = match section.as_str() {
                "left" => (Some(first), None),
                "right" => (None, Some(first)),
                _ => {
                    let r = second.map_or_else(|| first.clone(), |s| Label::new(&s));
                    (Some(first), Some(r))
                }
            };
            let id = |n: u64| u32::try_from(n).map_err(|_| SyntaxError::new(cur.at(), "rule vertex id out of range"));
            match b {
                None => rule.vertices.push(RuleVertex { id: id(a)?, left, right }),
                Some(b) => rule.edges.push(RuleEdge { source: id(a)?, target: id(b)?, left, right }),
            }
        }
    }
    rule.validate(false)
        .map_err(|violations| FormatError::InvalidRule { at, source: RuleError { name: name.to_string(), violations } })?;
    normalize_rule(&mut rule);
    Ok(rule)
}

pub fn parse_rules(text: &str) -> Result<Vec<Rule>, FormatError> {
    let mut cur = Cursor::new(text)?;
    let mut out = Vec::new();
    let mut names = HashSet::new();
    while !cur.at_eof() {
        cur.expect_keyword("rule")?;
        let (name, at) = cur.expect_ident()?;
        if !names.insert(name.clone()) {
            return Err(FormatError::DuplicateName { at, name });
        }
        cur.expect_sym("{")?;
        out.push(parse_rule_body(&mut cur, &name, at)?);
        cur.expect_sym("}")?;
    }
    Ok(out)
}

fn section_rank(m: Option<Membership>) -> u8 {
    match m {
        Some(Membership::LeftOnly) => 0,
        Some(Membership::Context) => 1,
        _ => 2,
    }
}

/// Sorts vertices and edges into the order [`serialize_rule`] writes them in.
pub fn normalize_rule(rule: &mut Rule) {
    rule.vertices.sort_by_key(|v| (section_rank(v.membership()), v.id));
    rule.edges.sort_by_key(|e| (section_rank(e.membership()), e.source.min(e.target), e.source.max(e.target)));
}

/// The sections of a rule without the surrounding `rule <name> { }`.
pub fn write_rule_body(out: &mut String, rule: &Rule, indent: &str) {
    let mut r = rule.clone();
    normalize_rule(&mut r);
    for (section, kind) in [("left", Membership::LeftOnly), ("context", Membership::Context), ("right", Membership::RightOnly)] {
        let labels = |l: &Option<Label>, r: &Option<Label>| match (l, r) {
            (Some(a), Some(b)) if a == b => quote(a.as_str()),
            (Some(a), Some(b)) => format!("{} {}", quote(a.as_str()), quote(b.as_str())),
            (Some(a), None) | (None, Some(a)) => quote(a.as_str()),
            (None, None) => unreachable!("validated rule"),
        };
        let vs: Vec<_> = r.vertices.iter().filter(|v| v.membership() == Some(kind)).collect();
        let es: Vec<_> = r.edges.iter().filter(|e| e.membership() == Some(kind)).collect();
        if vs.is_empty() && es.is_empty() {
            continue;
        }
        let _ = writeln!(out, "{indent}{section} {{");
        for v in vs {
            let _ = writeln!(out, "{indent}  v {} {};", v.id, labels(&v.left, &v.right));
        }
        for e in es {
            let _ = writeln!(out, "{indent}  e {} {} {};", e.source, e.target, labels(&e.left, &e.right));
        }
        let _ = writeln!(out, "{indent}}}");
    }
}

pub fn serialize_rule(rule: &Rule) -> String {
    let mut out = format!("rule {} {{\n", rule.name);
    write_rule_body(&mut out, rule, "  ");
    out.push_str("}\n");
    out
}

/// GML rendering used inside JSON exports.
pub fn to_gml(g: &LabeledGraph) -> String {
    let mut out = String::from("graph [\n");
    for v in 0..g.vertex_count() {
        let _ = writeln!(out, "  node [ id {v} label {} ]", quote(g.label(v).as_str()));
    }
    for e in g.edges() {
        let _ = writeln!(out, "  edge [ source {} target {} label {} ]", e.source, e.target, quote(e.label.as_str()));
    }
    out.push(']');
    out
}
