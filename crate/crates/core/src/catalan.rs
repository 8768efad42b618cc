//! The Catalan puzzle: contract a degree-3 vertex with its neighbours until one vertex is left.
//!
//! A move cannot be a single DPO rule since it rewires arbitrarily many edges, so it is
//! split into seven rules driven by a strategy.

use std::collections::HashSet;
use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::format::{parse_levels, serialize_named, FormatError};
use crate::graph::LabeledGraph;
use crate::repository::GraphId;
use crate::rule::{CompiledRule, Rule};
use crate::strategy::{Engine, EngineConfig, EvalError, GraphPredicate, Strategy};

pub const FREE: &str = "0";
pub const ACTIVE: &str = "A";
pub const REMOVED: &str = "R";
pub const FAIL: &str = "FAIL";

#[derive(Debug, Error)]
pub enum LevelError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("level {0} has no vertices")]
    Empty(String),
    #[error("level {0} is not connected")]
    Disconnected(String),
}

/// A puzzle instance: a connected graph, vertices labeled "0", edges labeled "".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalanLevel {
    pub name: String,
    graph: LabeledGraph,
}

impl CatalanLevel {
    /// Takes the structure of `g`; its labels are replaced.
    pub fn new(name: &str, g: &LabeledGraph) -> Result<Self, LevelError> {
        if g.is_empty() {
            return Err(LevelError::Empty(name.to_string()));
        }
        if !g.is_connected() {
            return Err(LevelError::Disconnected(name.to_string()));
        }
        Ok(CatalanLevel { name: name.to_string(), graph: unlabeled(g) })
    }

    pub fn graph(&self) -> &LabeledGraph {
        &self.graph
    }

    pub fn to_text(&self) -> String {
        serialize_named("level", &self.name, &self.graph)
    }
}

fn unlabeled(g: &LabeledGraph) -> LabeledGraph {
    let mut h = LabeledGraph::new();
    for _ in 0..g.vertex_count() {
        h.add_vertex(FREE);
    }
    for e in g.edges() {
        h.add_edge(e.source, e.target, "").expect("copied from a simple graph");
    }
    h
}

/// Reads `level name { ... }` blocks.
pub fn parse_level_file(text: &str) -> Result<Vec<CatalanLevel>, LevelError> {
    parse_levels(text)?
        .into_iter()
        .enumerate()
        .map(|(i, ng)| CatalanLevel::new(&ng.name.unwrap_or_else(|| format!("level{}", i + 1)), &ng.graph))
        .collect()
}

/// mark, markForFail, removeInterR, reattachExternal, removeAttached, removeR, unmark.
pub fn catalan_rules() -> Vec<Rule> {
    let mark = Rule::new("mark")
        .vertex(1, Some(FREE), Some(ACTIVE))
        .vertex(2, Some(FREE), Some(REMOVED))
        .vertex(3, Some(FREE), Some(REMOVED))
        .vertex(4, Some(FREE), Some(REMOVED))
        .context_edge(1, 2, "")
        .context_edge(1, 3, "")
        .context_edge(1, 4, "");
    let mark_for_fail = Rule::new("markForFail")
        .vertex(1, Some(ACTIVE), Some(FAIL))
        .context_vertex(2, FREE)
        .context_edge(1, 2, "");
    let remove_inter_r = Rule::new("removeInterR")
        .context_vertex(1, REMOVED)
        .context_vertex(2, REMOVED)
        .edge(1, 2, Some(""), None);
    // u = 1, r = 2, v = 3
    let reattach_external = Rule::new("reattachExternal")
        .context_vertex(1, FREE)
        .context_vertex(2, REMOVED)
        .context_vertex(3, ACTIVE)
        .edge(1, 2, Some(""), None)
        .context_edge(2, 3, "")
        .edge(1, 3, None, Some(""));
    let remove_attached = Rule::new("removeAttached")
        .context_vertex(1, FREE)
        .context_vertex(2, REMOVED)
        .context_vertex(3, ACTIVE)
        .edge(1, 2, Some(""), None)
        .context_edge(2, 3, "")
        .context_edge(1, 3, "");
    let remove_r = Rule::new("removeR")
        .context_vertex(1, ACTIVE)
        .vertex(2, Some(REMOVED), None)
        .vertex(3, Some(REMOVED), None)
        .vertex(4, Some(REMOVED), None)
        .edge(1, 2, Some(""), None)
        .edge(1, 3, Some(""), None)
        .edge(1, 4, Some(""), None);
    let unmark = Rule::new("unmark").vertex(1, Some(ACTIVE), Some(FREE));
    vec![mark, mark_for_fail, remove_inter_r, reattach_external, remove_attached, remove_r, unmark]
}

/// The compiled rules, in the order of [`catalan_rules`].
#[derive(Clone)]
pub struct CatalanRules {
    pub mark: Arc<CompiledRule>,
    pub mark_for_fail: Arc<CompiledRule>,
    pub remove_inter_r: Arc<CompiledRule>,
    pub reattach_external: Arc<CompiledRule>,
    pub remove_attached: Arc<CompiledRule>,
    pub remove_r: Arc<CompiledRule>,
    pub unmark: Arc<CompiledRule>,
}

impl CatalanRules {
    pub fn new() -> Self {
        let mut rules = catalan_rules().into_iter().map(|r| Arc::new(CompiledRule::new(r).expect("catalan rules are valid")));
        let mut next = || rules.next().expect("seven rules");
        CatalanRules {
            mark: next(),
            mark_for_fail: next(),
            remove_inter_r: next(),
            reattach_external: next(),
            remove_attached: next(),
            remove_r: next(),
            unmark: next(),
        }
    }

    /// Everything after marking: fail detection, rewiring, removal and unmarking.
    pub fn after_mark(&self) -> Strategy {
        let no_fail =
            GraphPredicate::new("no FAIL vertex", |g, _, repo| repo.graph(g).labels().iter().all(|l| l.as_str() != FAIL));
        Strategy::rule(&self.mark_for_fail)
            .revive()
            .then(Strategy::FilterUniverse(no_fail))
            .then(Strategy::rule(&self.remove_inter_r).revive().repeat())
            .then(Strategy::rule(&self.reattach_external).revive().repeat())
            .then(Strategy::rule(&self.remove_attached).revive().repeat())
            .then(Strategy::rule(&self.remove_r))
            .then(Strategy::rule(&self.unmark))
    }

    /// One full move.
    pub fn step(&self) -> Strategy {
        Strategy::rule(&self.mark).then(self.after_mark())
    }

    /// Repeats moves from `level` for as long as any apply.
    pub fn strategy(&self, level: GraphId) -> Strategy {
        Strategy::AddSubset(vec![level]).then(self.step().repeat().alt_rule_app())
    }
}

impl Default for CatalanRules {
    fn default() -> Self {
        Self::new()
    }
}

pub fn catalan_strategy(rules: &CatalanRules, level: GraphId) -> Strategy {
    rules.strategy(level)
}

/// Contracts `v` with its neighbours directly on the graph. `None` unless `v` has degree 3.
pub fn oracle_move(g: &LabeledGraph, v: usize) -> Option<LabeledGraph> {
    if v >= g.vertex_count() || g.degree(v) != 3 {
        return None;
    }
    let merged: HashSet<usize> = g.neighbours(v).iter().map(|&(u, _)| u).collect();
    let mut index = vec![usize::MAX; g.vertex_count()];
    let mut h = LabeledGraph::new();
    for u in 0..g.vertex_count() {
        if !merged.contains(&u) {
            index[u] = h.add_vertex(g.label(u).clone());
        }
    }
    for &u in &merged {
        index[u] = index[v];
    }
    for e in g.edges() {
        let (a, b) = (index[e.source], index[e.target]);
        if a != b && h.edge_between(a, b).is_none() {
            h.add_edge(a, b, e.label.clone()).expect("endpoints exist");
        }
    }
    Some(h)
}

/// Runs one move restricted to `v` on a fresh engine: `v` is marked with three of its
/// neighbours (the first three when it has more), and the rest of the pipeline follows.
/// Returns the unmarked results.
pub fn pipeline_move(g: &LabeledGraph, v: usize) -> Result<Vec<LabeledGraph>, EvalError> {
    let nbrs: Vec<usize> = g.neighbours(v).iter().map(|&(u, _)| u).take(3).collect();
    if nbrs.len() < 3 {
        return Ok(Vec::new());
    }
    let mut marked = unlabeled(g);
    marked.set_label(v, ACTIVE);
    for &u in &nbrs {
        marked.set_label(u, REMOVED);
    }
    let rules = CatalanRules::new();
    let mut engine = Engine::new(EngineConfig::default());
    let id = engine.add_graph(marked, None).expect("connected");
    let state = engine.run(&Strategy::AddSubset(vec![id]).then(rules.after_mark().alt_rule_app()))?;
    Ok(state.subset().iter().map(|&h| engine.repo.graph(h).clone()).collect())
}

/// All graphs one move away from `g` according to the rule pipeline.
pub fn pipeline_successors(g: &LabeledGraph) -> Result<Vec<LabeledGraph>, EvalError> {
    let rules = CatalanRules::new();
    let mut engine = Engine::new(EngineConfig::default());
    let id = engine.add_graph(unlabeled(g), None).expect("connected");
    let state = engine.run(&Strategy::AddSubset(vec![id]).then(rules.step().alt_rule_app()))?;
    Ok(state.subset().iter().map(|&h| engine.repo.graph(h).clone()).collect())
}

pub fn goal_graph() -> LabeledGraph {
    let mut g = LabeledGraph::new();
    g.add_vertex(FREE);
    g
}

/// Outcome of running the solving strategy on a level.
pub struct Solve {
    pub engine: Engine,
    pub level: GraphId,
    /// The unmarked graphs from the level to the single vertex, or `None` if unsolvable.
    pub solution: Option<Vec<GraphId>>,
}

impl Solve {
    pub fn moves(&self) -> Option<usize> {
        self.solution.as_ref().map(|s| s.len() - 1)
    }

    /// For each move, a vertex of the preceding graph whose contraction gives the next one.
    pub fn contracted_vertices(&self) -> Option<Vec<usize>> {
        let states = self.solution.as_ref()?;
        let repo = &self.engine.repo;
        states
            .windows(2)
            .map(|w| {
                let (g, h) = (repo.graph(w[0]), repo.graph(w[1]));
                (0..g.vertex_count()).find(|&v| oracle_move(g, v).is_some_and(|m| crate::graph::isomorphic(&m, h)))
            })
            .collect()
    }
}

fn is_unmarked(g: &LabeledGraph) -> bool {
    g.labels().iter().all(|l| l.as_str() == FREE)
}

/// Explores all move sequences from `level` and extracts a shortest path to one vertex.
pub fn solve_level(level: &CatalanLevel, config: EngineConfig) -> Result<Solve, EvalError> {
    let rules = CatalanRules::new();
    let mut engine = Engine::new(config);
    let id = engine.add_graph(level.graph().clone(), Some(&level.name)).expect("levels are connected");
    engine.run(&rules.strategy(id))?;
    let solution = engine.repo.lookup(&goal_graph()).and_then(|(goal, _)| {
        let path = engine.derivations.find_path(id, goal, &[])?;
        let mut states = vec![id];
        for i in path {
            for &h in engine.derivations.edges()[i].outputs.ids() {
                if is_unmarked(engine.repo.graph(h)) && states.last() != Some(&h) {
                    states.push(h);
                }
            }
        }
        Some(states)
    });
    Ok(Solve { engine, level: id, solution })
}

/// A random connected graph on `n` vertices: a random spanning tree plus each other
/// pair with probability `p`.
pub fn random_level<R: Rng>(rng: &mut R, n: usize, p: f64) -> LabeledGraph {
    let mut g = LabeledGraph::new();
    for _ in 0..n {
        g.add_vertex(FREE);
    }
    for v in 1..n {
        let u = rng.gen_range(0..v);
        g.add_edge(u, v, "").expect("new pair");
    }
    for u in 0..n {
        for v in u + 1..n {
            if g.edge_between(u, v).is_none() && rng.gen_bool(p) {
                g.add_edge(u, v, "").expect("new pair");
            }
        }
    }
    g
}
