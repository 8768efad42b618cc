//! Graph states and the strategy combinators evaluated over them.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::derivation_graph::DerivationGraph;
use crate::dpo::{enumerate_proper_derivations, Derivation, DerivationQuery, EmbeddingCache};
use crate::graph::LabeledGraph;
use crate::repository::{ComponentMultiset, GraphId, GraphRepository, InternError};
use crate::rule::CompiledRule;

/// An ordered universe together with an ordered subset of it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GraphState {
    universe: Vec<GraphId>,
    subset: Vec<GraphId>,
}

fn dedup_ordered(ids: impl IntoIterator<Item = GraphId>) -> Vec<GraphId> {
    let mut seen = HashSet::new();
    ids.into_iter().filter(|g| seen.insert(*g)).collect()
}

impl GraphState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a state, dropping duplicates and adding subset members missing from the universe.
    pub fn from_parts(universe: Vec<GraphId>, subset: Vec<GraphId>) -> Self {
        let subset = dedup_ordered(subset);
        let universe = dedup_ordered(universe.into_iter().chain(subset.iter().copied()));
        GraphState { universe, subset }
    }

    pub fn universe(&self) -> &[GraphId] {
        &self.universe
    }

    pub fn subset(&self) -> &[GraphId] {
        &self.subset
    }

    /// Equality of both components as sets.
    pub fn same_sets(&self, other: &GraphState) -> bool {
        let set = |v: &[GraphId]| v.iter().copied().collect::<HashSet<_>>();
        self.universe.len() == other.universe.len()
            && self.subset.len() == other.subset.len()
            && set(&self.universe) == set(&other.universe)
            && set(&self.subset) == set(&other.subset)
    }

    pub fn is_valid(&self) -> bool {
        let u: HashSet<_> = self.universe.iter().collect();
        let s: HashSet<_> = self.subset.iter().collect();
        u.len() == self.universe.len() && s.len() == self.subset.len() && s.is_subset(&u)
    }
}

/// A predicate on a rule and a multiset of graphs (the inputs or the outputs of a derivation).
pub type DerivationFn = dyn Fn(&CompiledRule, &ComponentMultiset, &GraphRepository) -> bool + Send + Sync;
/// A predicate on a graph of a state.
pub type GraphFn = dyn Fn(GraphId, &GraphState, &GraphRepository) -> bool + Send + Sync;
/// A strict less-than on graphs.
pub type OrderFn = dyn Fn(GraphId, GraphId, &GraphRepository) -> bool + Send + Sync;

/// A closure paired with a human readable description.
pub struct Described<F: ?Sized> {
    pub description: String,
    pub f: Arc<F>,
}

impl<F: ?Sized> Clone for Described<F> {
    fn clone(&self) -> Self {
        Described { description: self.description.clone(), f: self.f.clone() }
    }
}

impl<F: ?Sized> fmt::Debug for Described<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.description)
    }
}

pub type DerivationPredicate = Described<DerivationFn>;
pub type GraphPredicate = Described<GraphFn>;
pub type GraphOrder = Described<OrderFn>;

impl DerivationPredicate {
    pub fn new(
        description: &str,
        f: impl Fn(&CompiledRule, &ComponentMultiset, &GraphRepository) -> bool + Send + Sync + 'static,
    ) -> Self {
        Described { description: description.to_string(), f: Arc::new(f) }
    }
}

impl GraphPredicate {
    pub fn new(description: &str, f: impl Fn(GraphId, &GraphState, &GraphRepository) -> bool + Send + Sync + 'static) -> Self {
        Described { description: description.to_string(), f: Arc::new(f) }
    }
}

impl GraphOrder {
    pub fn new(description: &str, f: impl Fn(GraphId, GraphId, &GraphRepository) -> bool + Send + Sync + 'static) -> Self {
        Described { description: description.to_string(), f: Arc::new(f) }
    }

    /// Ascending order of an integer key.
    pub fn by_key(description: &str, key: impl Fn(&LabeledGraph) -> usize + Send + Sync + 'static) -> Self {
        Self::new(description, move |a, b, repo| key(repo.graph(a)) < key(repo.graph(b)))
    }
}

#[derive(Debug, Clone)]
pub enum Strategy {
    Rule(Arc<CompiledRule>),
    Parallel(Vec<Strategy>),
    Sequence(Vec<Strategy>),
    /// `limit: None` repeats until a fixed point (bounded by the engine's cap).
    Repeat { inner: Box<Strategy>, limit: Option<u64> },
    Revive(Box<Strategy>),
    LeftPredicate(DerivationPredicate, Box<Strategy>),
    RightPredicate(DerivationPredicate, Box<Strategy>),
    FilterSubset(GraphPredicate),
    FilterUniverse(GraphPredicate),
    SortSubset(GraphOrder),
    SortUniverse(GraphOrder),
    TakeSubset(usize),
    TakeUniverse(usize),
    AddSubset(Vec<GraphId>),
    AddUniverse(Vec<GraphId>),
    AltRuleApp(Box<Strategy>),
}

impl Strategy {
    pub fn rule(r: &Arc<CompiledRule>) -> Self {
        Strategy::Rule(r.clone())
    }

    pub fn then(self, next: Strategy) -> Self {
        match self {
            Strategy::Sequence(mut v) => {
                v.push(next);
                Strategy::Sequence(v)
            }
            s => Strategy::Sequence(vec![s, next]),
        }
    }

    pub fn repeat(self) -> Self {
        Strategy::Repeat { inner: Box::new(self), limit: None }
    }

    pub fn repeat_n(self, n: u64) -> Self {
        Strategy::Repeat { inner: Box::new(self), limit: Some(n) }
    }

    pub fn revive(self) -> Self {
        Strategy::Revive(Box::new(self))
    }

    pub fn left_predicate(self, p: DerivationPredicate) -> Self {
        Strategy::LeftPredicate(p, Box::new(self))
    }

    pub fn right_predicate(self, p: DerivationPredicate) -> Self {
        Strategy::RightPredicate(p, Box::new(self))
    }

    pub fn alt_rule_app(self) -> Self {
        Strategy::AltRuleApp(Box::new(self))
    }

    fn kind(&self) -> &'static str {
        match self {
            Strategy::Rule(_) => "rule",
            Strategy::Parallel(_) => "parallel",
            Strategy::Sequence(_) => "sequence",
            Strategy::Repeat { .. } => "repeat",
            Strategy::Revive(_) => "revive",
            Strategy::LeftPredicate(..) => "leftPredicate",
            Strategy::RightPredicate(..) => "rightPredicate",
            Strategy::FilterSubset(_) => "filterSubset",
            Strategy::FilterUniverse(_) => "filterUniverse",
            Strategy::SortSubset(_) => "sortSubset",
            Strategy::SortUniverse(_) => "sortUniverse",
            Strategy::TakeSubset(_) => "takeSubset",
            Strategy::TakeUniverse(_) => "takeUniverse",
            Strategy::AddSubset(_) => "addSubset",
            Strategy::AddUniverse(_) => "addUniverse",
            Strategy::AltRuleApp(_) => "altRuleApp",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbounded repeat at {path} did not reach a fixed point within {cap} iterations")]
    RepeatCap { path: String, cap: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    /// Iteration cap for unbounded repetition.
    pub repeat_cap: u64,
    /// Upper bound on the number of input graphs per derivation; `None` means the
    /// number of left components of each rule.
    pub max_components: Option<usize>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { repeat_cap: (1 << 31) - 1, max_components: None }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    /// Graphs first produced by a derivation (graphs given through add strategies excluded).
    pub new_graphs: usize,
    /// Deduplicated derivations recorded.
    pub derivations: usize,
    /// Subgraph isomorphism queries (component embedding enumerations).
    pub embedding_queries: u64,
    pub rule_applications: u64,
}

/// Observer called after each strategy node finishes, with the node path and its output.
pub type Observer = Box<dyn FnMut(&str, &GraphState, &GraphRepository)>;

/// Evaluates strategies, owning the graph repository and the derivation graph.
pub struct Engine {
    pub repo: GraphRepository,
    pub derivations: DerivationGraph,
    pub config: EngineConfig,
    cache: EmbeddingCache,
    added: HashSet<GraphId>,
    discovered: HashSet<GraphId>,
    rule_applications: u64,
    consumed: Vec<HashSet<GraphId>>,
    left: Vec<DerivationPredicate>,
    right: Vec<DerivationPredicate>,
    alt_mode: bool,
    path: Vec<String>,
    observer: Option<Observer>,
}

impl Default for Engine {
    fn default() -> Self {
        Self::new(EngineConfig::default())
    }
}

impl Engine {
    pub fn new(config: EngineConfig) -> Self {
        Self::with_repository(GraphRepository::new(), config)
    }

    pub fn with_repository(repo: GraphRepository, config: EngineConfig) -> Self {
        Engine {
            repo,
            derivations: DerivationGraph::new(),
            config,
            cache: EmbeddingCache::new(),
            added: HashSet::new(),
            discovered: HashSet::new(),
            rule_applications: 0,
            consumed: Vec::new(),
            left: Vec::new(),
            right: Vec::new(),
            alt_mode: false,
            path: Vec::new(),
            observer: None,
        }
    }

    pub fn set_observer(&mut self, observer: Observer) {
        self.observer = Some(observer);
    }

    /// Interns a connected graph, optionally naming its class.
    pub fn add_graph(&mut self, g: LabeledGraph, name: Option<&str>) -> Result<GraphId, InternError> {
        let id = self.repo.intern(g)?.id;
        if let Some(name) = name {
            self.repo.set_name(id, name);
        }
        Ok(id)
    }

    pub fn stats(&self) -> Stats {
        Stats {
            new_graphs: self.discovered.len(),
            derivations: self.derivations.len(),
            embedding_queries: self.cache.queries(),
            rule_applications: self.rule_applications,
        }
    }

    /// Evaluates `s` starting from the empty state.
    pub fn run(&mut self, s: &Strategy) -> Result<GraphState, EvalError> {
        self.evaluate(s, GraphState::new())
    }

    pub fn evaluate(&mut self, s: &Strategy, f: GraphState) -> Result<GraphState, EvalError> {
        self.path.push(s.kind().to_string());
        let out = self.eval(s, f);
        if let (Ok(state), Some(obs)) = (&out, self.observer.as_mut()) {
            obs(&self.path.join("/"), state, &self.repo);
        }
        self.path.pop();
        out
    }

    fn eval_child(&mut self, index: usize, s: &Strategy, f: GraphState) -> Result<GraphState, EvalError> {
        if let Some(last) = self.path.last_mut() {
            last.push_str(&format!("[{index}]"));
        }
        let out = self.evaluate(s, f);
        if let Some(last) = self.path.last_mut() {
            if let Some(cut) = last.rfind('[') {
                last.truncate(cut);
            }
        }
        out
    }

    fn eval(&mut self, s: &Strategy, f: GraphState) -> Result<GraphState, EvalError> {
        let out = match s {
            Strategy::Rule(r) => self.apply_rule(r, f),
            Strategy::Parallel(list) => {
                let mut universe = Vec::new();
                let mut subset = Vec::new();
                for (i, q) in list.iter().enumerate() {
                    let r = self.eval_child(i, q, f.clone())?;
                    universe.extend(r.universe);
                    subset.extend(r.subset);
                }
                if list.is_empty() {
                    f
                } else {
                    GraphState::from_parts(universe, subset)
                }
            }
            Strategy::Sequence(list) => {
                let mut cur = f;
                for (i, q) in list.iter().enumerate() {
                    cur = self.eval_child(i, q, cur)?;
                }
                cur
            }
            Strategy::Repeat { inner, limit } => self.repeat(inner, *limit, f)?,
            Strategy::Revive(inner) => {
                self.consumed.push(HashSet::new());
                let result = self.eval_child(0, inner, f.clone());
                let consumed = self.consumed.pop().expect("balanced consumed frames");
                let r = result?;
                let universe: HashSet<GraphId> = r.universe.iter().copied().collect();
                let revived = f.subset.iter().copied().filter(|g| universe.contains(g) && !consumed.contains(g));
                let subset = dedup_ordered(r.subset.iter().copied().chain(revived));
                GraphState { universe: r.universe, subset }
            }
            Strategy::LeftPredicate(p, inner) => {
                self.left.push(p.clone());
                let r = self.eval_child(0, inner, f);
                self.left.pop();
                r?
            }
            Strategy::RightPredicate(p, inner) => {
                self.right.push(p.clone());
                let r = self.eval_child(0, inner, f);
                self.right.pop();
                r?
            }
            Strategy::FilterSubset(p) => {
                let subset = f.subset.iter().copied().filter(|&g| (p.f)(g, &f, &self.repo)).collect();
                GraphState { universe: f.universe.clone(), subset }
            }
            Strategy::FilterUniverse(p) => {
                let keep: HashSet<GraphId> = f.universe.iter().copied().filter(|&g| (p.f)(g, &f, &self.repo)).collect();
                GraphState {
                    universe: f.universe.iter().copied().filter(|g| keep.contains(g)).collect(),
                    subset: f.subset.iter().copied().filter(|g| keep.contains(g)).collect(),
                }
            }
            Strategy::SortSubset(order) => GraphState { subset: self.sorted(order, &f.subset), universe: f.universe },
            Strategy::SortUniverse(order) => GraphState { universe: self.sorted(order, &f.universe), subset: f.subset },
            Strategy::TakeSubset(n) => {
                let mut f = f;
                f.subset.truncate(*n);
                f
            }
            Strategy::TakeUniverse(n) => {
                let mut f = f;
                f.universe.truncate(*n);
                let keep: HashSet<GraphId> = f.universe.iter().copied().collect();
                f.subset.retain(|g| keep.contains(g));
                f
            }
            Strategy::AddSubset(gs) => {
                self.added.extend(gs.iter().copied());
                GraphState::from_parts(f.universe.into_iter().chain(gs.iter().copied()).collect(), f.subset.into_iter().chain(gs.iter().copied()).collect())
            }
            Strategy::AddUniverse(gs) => {
                self.added.extend(gs.iter().copied());
                GraphState { universe: dedup_ordered(f.universe.into_iter().chain(gs.iter().copied())), subset: f.subset }
            }
            Strategy::AltRuleApp(inner) => {
                let saved = self.alt_mode;
                self.alt_mode = true;
                let r = self.eval_child(0, inner, f);
                self.alt_mode = saved;
                r?
            }
        };
        debug_assert!(out.is_valid(), "invalid graph state after {}", self.path.join("/"));
        Ok(out)
    }

    fn sorted(&self, order: &GraphOrder, ids: &[GraphId]) -> Vec<GraphId> {
        let mut v = ids.to_vec();
        v.sort_by(|&a, &b| {
            if (order.f)(a, b, &self.repo) {
                std::cmp::Ordering::Less
            } else if (order.f)(b, a, &self.repo) {
                std::cmp::Ordering::Greater
            } else {
                std::cmp::Ordering::Equal
            }
        });
        v
    }

    fn repeat(&mut self, inner: &Strategy, limit: Option<u64>, f: GraphState) -> Result<GraphState, EvalError> {
        let cap = limit.unwrap_or(self.config.repeat_cap);
        let mut cur = f;
        for i in 0..cap {
            let next = self.eval_child(i as usize, inner, cur.clone())?;
            if next.subset.is_empty() {
                return Ok(cur);
            }
            if next.same_sets(&cur) {
                return Ok(next);
            }
            cur = next;
        }
        match limit {
            Some(_) => Ok(cur),
            None => Err(EvalError::RepeatCap { path: self.path.join("/"), cap }),
        }
    }

    /// Proper derivations of `rule` from the universe of `f` that use at least one
    /// subset graph and pass the active predicates.
    pub fn derivations_for(&mut self, rule: &Arc<CompiledRule>, f: &GraphState) -> Vec<Derivation> {
        if f.subset.is_empty() {
            return Vec::new();
        }
        let components = rule.components().len();
        let max_components = self.config.max_components.map_or(components, |m| m.min(components));
        let query = DerivationQuery { universe: &f.universe, required: &f.subset, max_components };
        let left = &self.left;
        let mut admit = |r: &CompiledRule, g: &ComponentMultiset, repo: &GraphRepository| left.iter().all(|p| (p.f)(r, g, repo));
        let mut found = enumerate_proper_derivations(rule, &query, &mut self.repo, &mut self.cache, &mut admit);
        let right = &self.right;
        let repo = &self.repo;
        found.retain(|d| {
            let outputs = d.output_multiset();
            right.iter().all(|p| (p.f)(rule, &outputs, repo))
        });
        found
    }

    fn apply_rule(&mut self, rule: &Arc<CompiledRule>, f: GraphState) -> GraphState {
        self.rule_applications += 1;
        let found = self.derivations_for(rule, &f);
        let mut produced = Vec::new();
        for d in &found {
            debug_assert!(d.is_proper());
            self.derivations.record(d);
            for frame in &mut self.consumed {
                frame.extend(d.inputs.iter().copied());
            }
            produced.extend(d.outputs.iter().copied());
        }
        let produced = dedup_ordered(produced);
        let known: HashSet<GraphId> = f.universe.iter().copied().collect();
        for &h in &produced {
            if !self.added.contains(&h) {
                self.discovered.insert(h);
            }
        }
        let fresh: Vec<GraphId> = produced.iter().copied().filter(|h| !known.contains(h)).collect();
        let subset = if self.alt_mode { produced } else { fresh.clone() };
        let mut universe = f.universe;
        universe.extend(fresh);
        GraphState { universe, subset }
    }
}
