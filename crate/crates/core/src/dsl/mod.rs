//! The strategy scripting language.
//!
//! A script declares graphs, molecules, rules, predicates and named strategies,
//! then gives one entry strategy:
//!
//! ```text
//! molecule isoprene "CC(=C)C=C";
//! molecule cyclohexadiene "C1=CC=CCC1";
//! include "diels_alder.rules";
//! strategy qp = leftPredicate[componentCount == 2] { rule dielsAlder };
//! main = addSubset(isoprene, cyclohexadiene) -> repeat[4] { qp };
//! ```

pub mod ast;
mod parser;
pub mod predicate;
mod printer;

use std::collections::{HashMap, HashSet};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::chem::{parse_molecule, MoleculeError};
use crate::format::{serialize_graph, FormatError};
use crate::lexer::{Location, SyntaxError};
use crate::repository::{GraphId, InternError};
use crate::rule::{CompiledRule, RuleError};
use crate::strategy::{DerivationPredicate, Engine, EngineConfig, EvalError, GraphOrder, GraphPredicate, GraphState, Stats, Strategy};

pub use ast::{ExportKind, Script};
pub use parser::{parse_script, parse_strategy};
pub use printer::{print_expr, print_script, print_strategy};

use ast::{Item, Name, Side, SortKey, Strat};
use predicate::{compile_predicate, Context, Env, Scope};

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("{at}: unknown {kind} '{name}'")]
    UnknownName { at: Location, kind: &'static str, name: String },
    #[error("{at}: '{name}' is already defined")]
    DuplicateName { at: Location, name: String },
    #[error("{at}: '{name}' {message}")]
    Arity { at: Location, name: String, message: String },
    #[error("{at}: type error: {message}")]
    Type { at: Location, message: String },
    #[error("{at}: '{name}' is defined in terms of itself")]
    Cycle { at: Location, name: String },
    #[error("{at}: molecule '{name}': {source}")]
    Molecule { at: Location, name: String, source: MoleculeError },
    #[error("{at}: graph '{name}': {source}")]
    Graph { at: Location, name: String, source: InternError },
    #[error("{at}: rule '{name}': {source}")]
    Rule { at: Location, name: String, source: RuleError },
    #[error("{at}: {message}")]
    Invalid { at: Location, message: String },
    #[error("in {path}: {source}")]
    InFile { path: PathBuf, source: Box<ScriptError> },
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl ScriptError {
    /// True for failures to read or write files (as opposed to errors in the script).
    pub fn is_io(&self) -> bool {
        match self {
            ScriptError::Io { .. } => true,
            ScriptError::InFile { source, .. } => source.is_io(),
            _ => false,
        }
    }
}

/// A loaded script: graphs interned into the engine, rules compiled, strategies resolved.
pub struct Program {
    pub engine: Engine,
    pub main: Strategy,
    pub exports: Vec<(ExportKind, PathBuf)>,
    pub rules: HashMap<String, Arc<CompiledRule>>,
    pub graphs: HashMap<String, GraphId>,
    strategies: HashMap<String, Strategy>,
}

impl Program {
    pub fn strategy(&self, name: &str) -> Option<&Strategy> {
        self.strategies.get(name)
    }
}

#[derive(Default)]
struct Loader {
    engine: Engine,
    rules: HashMap<String, Arc<CompiledRule>>,
    graphs: HashMap<String, GraphId>,
    predicates: HashMap<String, ast::Expr>,
    strategy_defs: HashMap<String, Strat>,
    order: Vec<String>,
    main: Option<Strat>,
    exports: Vec<(ExportKind, PathBuf)>,
    names: HashSet<String>,
    includes: Vec<PathBuf>,
}

/// Reads and loads a script file; includes and exports resolve relative to its directory.
pub fn load_file(path: &Path, config: EngineConfig) -> Result<Program, ScriptError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScriptError::Io { path: path.to_path_buf(), source })?;
    let base = path.parent().unwrap_or(Path::new("."));
    load(&text, base, config)
}

/// Parses, checks and loads script text.
pub fn load(text: &str, base: &Path, config: EngineConfig) -> Result<Program, ScriptError> {
    let script = parse_script(text)?;
    let mut l = Loader { engine: Engine::new(config), ..Default::default() };
    l.items(&script, base)?;
    l.finish()
}

impl Loader {
    fn declare(&mut self, name: &Name) -> Result<(), ScriptError> {
        if !self.names.insert(name.text.clone()) {
            return Err(ScriptError::DuplicateName { at: name.at(), name: name.text.clone() });
        }
        Ok(())
    }

    fn items(&mut self, script: &Script, base: &Path) -> Result<(), ScriptError> {
        for item in &script.items {
            match item {
                Item::Graph { name, graph, .. } => {
                    self.declare(name)?;
                    let id = self.engine.add_graph(graph.clone(), Some(&name.text)).map_err(|source| ScriptError::Graph {
                        at: name.at(),
                        name: name.text.clone(),
                        source,
                    })?;
                    self.graphs.insert(name.text.clone(), id);
                }
                Item::Molecule { name, smiles } => {
                    self.declare(name)?;
                    let g = parse_molecule(smiles).map_err(|source| ScriptError::Molecule {
                        at: name.at(),
                        name: name.text.clone(),
                        source,
                    })?;
                    let id = self.engine.add_graph(g, Some(&name.text)).map_err(|source| ScriptError::Graph {
                        at: name.at(),
                        name: name.text.clone(),
                        source,
                    })?;
                    self.graphs.insert(name.text.clone(), id);
                }
                Item::Rule { name, rule } => {
                    self.declare(name)?;
                    let compiled = CompiledRule::new(rule.clone())
                        .map_err(|source| ScriptError::Rule { at: name.at(), name: name.text.clone(), source })?;
                    self.rules.insert(name.text.clone(), Arc::new(compiled));
                }
                Item::InverseRule { name, of } => {
                    self.declare(name)?;
                    let base_rule = self.rules.get(&of.text).ok_or_else(|| ScriptError::UnknownName {
                        at: of.at(),
                        kind: "rule",
                        name: of.text.clone(),
                    })?;
                    let mut inv = base_rule.rule().inverse();
                    inv.name = name.text.clone();
                    let compiled =
                        CompiledRule::new(inv).map_err(|source| ScriptError::Rule { at: name.at(), name: name.text.clone(), source })?;
                    self.rules.insert(name.text.clone(), Arc::new(compiled));
                }
                Item::Include { path, span } => {
                    let full = base.join(path);
                    if self.includes.contains(&full) {
                        return Err(ScriptError::Invalid { at: span.0, message: format!("'{path}' includes itself") });
                    }
                    let text = std::fs::read_to_string(&full).map_err(|source| ScriptError::Io { path: full.clone(), source })?;
                    let in_file = |e: ScriptError| ScriptError::InFile { path: full.clone(), source: Box::new(e) };
                    let included = parse_script(&text).map_err(in_file)?;
                    self.includes.push(full.clone());
                    let dir = full.parent().unwrap_or(base).to_path_buf();
                    let r = self.items(&included, &dir).map_err(in_file);
                    self.includes.pop();
                    r?;
                }
                Item::Predicate { name, expr } => {
                    self.declare(name)?;
                    self.predicates.insert(name.text.clone(), expr.clone());
                }
                Item::Strategy { name, body } => {
                    self.declare(name)?;
                    self.strategy_defs.insert(name.text.clone(), body.clone());
                    self.order.push(name.text.clone());
                }
                Item::Main { body, span } => {
                    if self.main.is_some() {
                        return Err(ScriptError::Invalid { at: span.0, message: "more than one 'main' strategy".to_string() });
                    }
                    self.main = Some(body.clone());
                }
                Item::Export { kind, path, .. } => self.exports.push((*kind, base.join(path))),
                Item::Config { key, value } => match key.text.as_str() {
                    "maxComponents" => self.engine.config.max_components = Some(*value as usize),
                    "repeatCap" => self.engine.config.repeat_cap = *value,
                    other => {
                        return Err(ScriptError::UnknownName { at: key.at(), kind: "config key", name: other.to_string() })
                    }
                },
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<Program, ScriptError> {
        let mut compiler = Compiler { l: &self, done: HashMap::new(), active: Vec::new() };
        for name in &self.order {
            compiler.named(&Name::new(name, Location::default()))?;
        }
        let main = match &self.main {
            Some(body) => compiler.compile(body)?,
            None => Strategy::Sequence(Vec::new()),
        };
        let strategies = compiler.done;
        Ok(Program {
            engine: self.engine,
            main,
            exports: self.exports,
            rules: self.rules,
            graphs: self.graphs,
            strategies,
        })
    }
}

struct Compiler<'a> {
    l: &'a Loader,
    done: HashMap<String, Strategy>,
    active: Vec<String>,
}

impl Compiler<'_> {
    fn named(&mut self, n: &Name) -> Result<Strategy, ScriptError> {
        if let Some(s) = self.done.get(&n.text) {
            return Ok(s.clone());
        }
        let Some(body) = self.l.strategy_defs.get(&n.text) else {
            return Err(ScriptError::UnknownName { at: n.at(), kind: "strategy", name: n.text.clone() });
        };
        if self.active.contains(&n.text) {
            return Err(ScriptError::Cycle { at: n.at(), name: n.text.clone() });
        }
        self.active.push(n.text.clone());
        let s = self.compile(body);
        self.active.pop();
        let s = s?;
        self.done.insert(n.text.clone(), s.clone());
        Ok(s)
    }

    fn scope(&self) -> Scope<'_> {
        Scope { graphs: &self.l.graphs, predicates: &self.l.predicates }
    }

    fn derivation_predicate(&self, e: &ast::Expr) -> Result<DerivationPredicate, ScriptError> {
        let c = compile_predicate(e, Context::Derivation, &self.scope())?;
        Ok(DerivationPredicate::new(&print_expr(e), move |_, m, repo| c.holds(&Env { multiset: Some(m), graph: None, repo })))
    }

    fn graph_ids(&self, names: &[Name]) -> Result<Vec<GraphId>, ScriptError> {
        names
            .iter()
            .map(|n| {
                self.l.graphs.get(&n.text).copied().ok_or_else(|| ScriptError::UnknownName {
                    at: n.at(),
                    kind: "graph",
                    name: n.text.clone(),
                })
            })
            .collect()
    }

    fn compile(&mut self, s: &Strat) -> Result<Strategy, ScriptError> {
        let boxed = |c: &mut Self, inner: &Strat| -> Result<Box<Strategy>, ScriptError> { Ok(Box::new(c.compile(inner)?)) };
        Ok(match s {
            Strat::Rule(n) => Strategy::Rule(
                self.l
                    .rules
                    .get(&n.text)
                    .ok_or_else(|| ScriptError::UnknownName { at: n.at(), kind: "rule", name: n.text.clone() })?
                    .clone(),
            ),
            Strat::Ref(n) => self.named(n)?,
            Strat::Identity(_) => Strategy::Sequence(Vec::new()),
            Strat::Parallel(list) => Strategy::Parallel(list.iter().map(|x| self.compile(x)).collect::<Result<_, _>>()?),
            Strat::Sequence(list) => Strategy::Sequence(list.iter().map(|x| self.compile(x)).collect::<Result<_, _>>()?),
            Strat::Repeat { limit, inner } => Strategy::Repeat { inner: boxed(self, inner)?, limit: *limit },
            Strat::Revive(inner) => Strategy::Revive(boxed(self, inner)?),
            Strat::AltRuleApp(inner) => Strategy::AltRuleApp(boxed(self, inner)?),
            Strat::LeftPredicate(e, inner) => Strategy::LeftPredicate(self.derivation_predicate(e)?, boxed(self, inner)?),
            Strat::RightPredicate(e, inner) => Strategy::RightPredicate(self.derivation_predicate(e)?, boxed(self, inner)?),
            Strat::Filter(side, e) => {
                let c = compile_predicate(e, Context::Graph, &self.scope())?;
                let p = GraphPredicate::new(&print_expr(e), move |g, _, repo| c.holds(&Env { multiset: None, graph: Some(g), repo }));
                match side {
                    Side::Subset => Strategy::FilterSubset(p),
                    Side::Universe => Strategy::FilterUniverse(p),
                }
            }
            Strat::Sort { side, key, descending } => {
                let desc = *descending;
                let description = format!("{}{}", key.keyword(), if desc { ", desc" } else { "" });
                let order = match key {
                    SortKey::VertexCount | SortKey::EdgeCount => {
                        let edges = *key == SortKey::EdgeCount;
                        GraphOrder::new(&description, move |a, b, repo| {
                            let k = |g| if edges { repo.graph(g).edge_count() } else { repo.graph(g).vertex_count() };
                            if desc { k(b) < k(a) } else { k(a) < k(b) }
                        })
                    }
                    SortKey::Text => GraphOrder::new(&description, move |a, b, repo| {
                        let (ta, tb) = (serialize_graph(repo.graph(a)), serialize_graph(repo.graph(b)));
                        if desc { tb < ta } else { ta < tb }
                    }),
                };
                match side {
                    Side::Subset => Strategy::SortSubset(order),
                    Side::Universe => Strategy::SortUniverse(order),
                }
            }
            Strat::Take(side, n) => {
                let n = usize::try_from(*n).unwrap_or(usize::MAX);
                match side {
                    Side::Subset => Strategy::TakeSubset(n),
                    Side::Universe => Strategy::TakeUniverse(n),
                }
            }
            Strat::Add(side, names) => {
                let ids = self.graph_ids(names)?;
                match side {
                    Side::Subset => Strategy::AddSubset(ids),
                    Side::Universe => Strategy::AddUniverse(ids),
                }
            }
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the cap on unbounded repetition.
    pub max_repeat: Option<u64>,
    pub dot: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub stats: Stats,
    pub wall_time: Duration,
    pub state: GraphState,
}

impl std::fmt::Display for RunReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "new graphs:         {}", self.stats.new_graphs)?;
        writeln!(f, "derivations:        {}", self.stats.derivations)?;
        writeln!(f, "embedding queries:  {}", self.stats.embedding_queries)?;
        writeln!(f, "rule applications:  {}", self.stats.rule_applications)?;
        writeln!(f, "final universe:     {}", self.state.universe().len())?;
        writeln!(f, "final subset:       {}", self.state.subset().len())?;
        write!(f, "wall time:          {:.3} s", self.wall_time.as_secs_f64())
    }
}

/// Evaluates the entry strategy on the empty state and writes the requested exports.
pub fn run_program(program: &mut Program, options: &RunOptions) -> Result<RunReport, ScriptError> {
    if let Some(cap) = options.max_repeat {
        program.engine.config.repeat_cap = cap;
    }
    let start = Instant::now();
    let state = program.engine.run(&program.main)?;
    let wall_time = start.elapsed();
    let mut targets = program.exports.clone();
    targets.extend(options.dot.iter().map(|p| (ExportKind::Dot, p.clone())));
    targets.extend(options.json.iter().map(|p| (ExportKind::Json, p.clone())));
    for (kind, path) in targets {
        let text = match kind {
            ExportKind::Dot => program.engine.derivations.to_dot(&program.engine.repo),
            ExportKind::Json => program.engine.derivations.to_json(&program.engine.repo),
        };
        write_atomic(&path, &text)?;
    }
    Ok(RunReport { stats: program.engine.stats(), wall_time, state })
}

/// Loads and runs a script file.
pub fn run_script(path: &Path, options: &RunOptions) -> Result<(RunReport, Program), ScriptError> {
    let mut program = load_file(path, EngineConfig::default())?;
    let report = run_program(&mut program, options)?;
    Ok((report, program))
}

/// Writes through a temporary file in the target directory, then renames it into place.
pub fn write_atomic(path: &Path, text: &str) -> Result<(), ScriptError> {
    let io = |source| ScriptError::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(text.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
