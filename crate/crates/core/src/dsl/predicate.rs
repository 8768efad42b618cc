//! Type checking and evaluation of predicate expressions.

use std::collections::HashMap;

use crate::lexer::Location;
use crate::repository::{ComponentMultiset, GraphId, GraphRepository};

use super::ast::{Arg, CmpOp, Expr, Name};
use super::ScriptError;

/// Where a predicate is evaluated: against the graph multiset of a derivation or
/// against a single graph of a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Context {
    Derivation,
    Graph,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ty {
    Int,
    Bool,
}

impl Ty {
    fn name(self) -> &'static str {
        match self {
            Ty::Int => "an integer",
            Ty::Bool => "a boolean",
        }
    }
}

/// A checked expression with graph names resolved.
#[derive(Debug, Clone)]
pub enum Compiled {
    Int(i64),
    Bool(bool),
    ComponentCount,
    VertexCount(Option<Box<Compiled>>),
    EdgeCount(Option<Box<Compiled>>),
    HasVertexLabel(Option<Box<Compiled>>, String),
    IsGraph(Option<Box<Compiled>>, GraphId),
    GraphsAre(ComponentMultiset),
    All(Box<Compiled>),
    Any(Box<Compiled>),
    Cmp(CmpOp, Box<Compiled>, Box<Compiled>),
    And(Box<Compiled>, Box<Compiled>),
    Or(Box<Compiled>, Box<Compiled>),
    Not(Box<Compiled>),
}

/// Name tables the checker resolves against.
pub struct Scope<'a> {
    pub graphs: &'a HashMap<String, GraphId>,
    pub predicates: &'a HashMap<String, Expr>,
}

fn type_error(at: Location, message: String) -> ScriptError {
    ScriptError::Type { at, message }
}

fn arity(name: &Name, expected: &str, found: usize) -> ScriptError {
    ScriptError::Arity { at: name.at(), name: name.text.clone(), message: format!("expects {expected}, got {found} argument(s)") }
}

struct Checker<'a, 'b> {
    scope: &'b Scope<'a>,
    expanding: Vec<String>,
}

/// Checks `e` as a boolean predicate in `ctx` and resolves its names.
pub fn compile_predicate(e: &Expr, ctx: Context, scope: &Scope<'_>) -> Result<Compiled, ScriptError> {
    let mut c = Checker { scope, expanding: Vec::new() };
    c.expect(e, ctx, Ty::Bool)
}

impl Checker<'_, '_> {
    fn expect(&mut self, e: &Expr, ctx: Context, ty: Ty) -> Result<Compiled, ScriptError> {
        let (c, found) = self.check(e, ctx)?;
        if found != ty {
            return Err(type_error(e.at(), format!("expected {}, found {}", ty.name(), found.name())));
        }
        Ok(c)
    }

    fn index(&mut self, args: &[Arg], ctx: Context) -> Result<Option<Box<Compiled>>, ScriptError> {
        match (ctx, args.first()) {
            (Context::Graph, _) => Ok(None),
            (Context::Derivation, Some(Arg::Expr(e))) => Ok(Some(Box::new(self.expect(e, ctx, Ty::Int)?))),
            (Context::Derivation, Some(Arg::Str(_, s))) => Err(type_error(s.0, "expected a graph index".to_string())),
            (Context::Derivation, None) => unreachable!("arity checked before"),
        }
    }

    fn graph_name(&self, arg: &Arg) -> Result<GraphId, ScriptError> {
        match arg {
            Arg::Expr(Expr::Name(n)) => self.scope.graphs.get(&n.text).copied().ok_or_else(|| ScriptError::UnknownName {
                at: n.at(),
                kind: "graph",
                name: n.text.clone(),
            }),
            Arg::Expr(e) => Err(type_error(e.at(), "expected a graph name".to_string())),
            Arg::Str(_, s) => Err(type_error(s.0, "expected a graph name, not a string".to_string())),
        }
    }

    fn check(&mut self, e: &Expr, ctx: Context) -> Result<(Compiled, Ty), ScriptError> {
        Ok(match e {
            Expr::Int(n, s) => {
                let v = i64::try_from(*n).map_err(|_| type_error(s.0, format!("integer {n} is too large")))?;
                (Compiled::Int(v), Ty::Int)
            }
            Expr::Bool(b, _) => (Compiled::Bool(*b), Ty::Bool),
            Expr::Name(n) => match n.text.as_str() {
                "componentCount" | "vertexCount" | "edgeCount" => self.call(n, &[], ctx)?,
                _ => {
                    let Some(body) = self.scope.predicates.get(&n.text) else {
                        return Err(ScriptError::UnknownName { at: n.at(), kind: "predicate", name: n.text.clone() });
                    };
                    if self.expanding.contains(&n.text) {
                        return Err(ScriptError::Cycle { at: n.at(), name: n.text.clone() });
                    }
                    self.expanding.push(n.text.clone());
                    let r = self.check(body, ctx);
                    self.expanding.pop();
                    r?
                }
            },
            Expr::Call(n, args) => self.call(n, args, ctx)?,
            Expr::Cmp(op, l, r) => {
                let l = self.expect(l, ctx, Ty::Int)?;
                let r = self.expect(r, ctx, Ty::Int)?;
                (Compiled::Cmp(*op, Box::new(l), Box::new(r)), Ty::Bool)
            }
            Expr::And(l, r) => {
                let l = self.expect(l, ctx, Ty::Bool)?;
                (Compiled::And(Box::new(l), Box::new(self.expect(r, ctx, Ty::Bool)?)), Ty::Bool)
            }
            Expr::Or(l, r) => {
                let l = self.expect(l, ctx, Ty::Bool)?;
                (Compiled::Or(Box::new(l), Box::new(self.expect(r, ctx, Ty::Bool)?)), Ty::Bool)
            }
            Expr::Not(inner) => (Compiled::Not(Box::new(self.expect(inner, ctx, Ty::Bool)?)), Ty::Bool),
        })
    }

    fn call(&mut self, n: &Name, args: &[Arg], ctx: Context) -> Result<(Compiled, Ty), ScriptError> {
        let in_derivation = ctx == Context::Derivation;
        let only_derivation = |what: &str| {
            type_error(n.at(), format!("'{}' {what}", n.text))
        };
        // graph-valued builtins take an extra leading index in derivation predicates
        let extra = usize::from(in_derivation);
        Ok(match n.text.as_str() {
            "componentCount" => {
                if !in_derivation {
                    return Err(only_derivation("is only available in derivation predicates"));
                }
                if !args.is_empty() {
                    return Err(arity(n, "no arguments", args.len()));
                }
                (Compiled::ComponentCount, Ty::Int)
            }
            "vertexCount" | "edgeCount" => {
                if args.len() != extra {
                    return Err(arity(n, if in_derivation { "a graph index" } else { "no arguments" }, args.len()));
                }
                let i = self.index(args, ctx)?;
                let c = if n.text == "vertexCount" { Compiled::VertexCount(i) } else { Compiled::EdgeCount(i) };
                (c, Ty::Int)
            }
            "hasVertexLabel" => {
                if args.len() != extra + 1 {
                    return Err(arity(n, if in_derivation { "a graph index and a label" } else { "a label" }, args.len()));
                }
                let i = self.index(args, ctx)?;
                let label = match &args[extra] {
                    Arg::Str(s, _) => s.clone(),
                    Arg::Expr(e) => return Err(type_error(e.at(), "expected a quoted label".to_string())),
                };
                (Compiled::HasVertexLabel(i, label), Ty::Bool)
            }
            "isGraph" => {
                if args.len() != extra + 1 {
                    return Err(arity(n, if in_derivation { "a graph index and a graph name" } else { "a graph name" }, args.len()));
                }
                let i = self.index(args, ctx)?;
                (Compiled::IsGraph(i, self.graph_name(&args[extra])?), Ty::Bool)
            }
            "graphsAre" => {
                if !in_derivation {
                    return Err(only_derivation("is only available in derivation predicates"));
                }
                let ids = args.iter().map(|a| self.graph_name(a)).collect::<Result<Vec<_>, _>>()?;
                (Compiled::GraphsAre(ComponentMultiset::new(ids)), Ty::Bool)
            }
            "all" | "any" => {
                if !in_derivation {
                    return Err(only_derivation("quantifies over derivation graphs and is only available in derivation predicates"));
                }
                let [Arg::Expr(body)] = args else {
                    return Err(arity(n, "one predicate", args.len()));
                };
                let body = Box::new(self.expect(body, Context::Graph, Ty::Bool)?);
                (if n.text == "all" { Compiled::All(body) } else { Compiled::Any(body) }, Ty::Bool)
            }
            _ => return Err(ScriptError::UnknownName { at: n.at(), kind: "function", name: n.text.clone() }),
        })
    }
}

/// Evaluation environment: the derivation multiset and/or the graph in focus.
#[derive(Clone, Copy)]
pub struct Env<'a> {
    pub multiset: Option<&'a ComponentMultiset>,
    pub graph: Option<GraphId>,
    pub repo: &'a GraphRepository,
}

impl Compiled {
    fn target(&self, index: &Option<Box<Compiled>>, env: &Env<'_>) -> Option<GraphId> {
        match index {
            None => env.graph,
            Some(i) => {
                let i = i.int(env);
                let ids = env.multiset?.ids();
                usize::try_from(i).ok().and_then(|i| ids.get(i).copied())
            }
        }
    }

    fn int(&self, env: &Env<'_>) -> i64 {
        match self {
            Compiled::Int(n) => *n,
            Compiled::ComponentCount => env.multiset.map_or(0, |m| m.len() as i64),
            Compiled::VertexCount(i) => self.target(i, env).map_or(0, |g| env.repo.graph(g).vertex_count() as i64),
            Compiled::EdgeCount(i) => self.target(i, env).map_or(0, |g| env.repo.graph(g).edge_count() as i64),
            _ => unreachable!("type checked"),
        }
    }

    pub fn holds(&self, env: &Env<'_>) -> bool {
        match self {
            Compiled::Bool(b) => *b,
            Compiled::HasVertexLabel(i, l) => {
                self.target(i, env).is_some_and(|g| env.repo.graph(g).labels().iter().any(|x| x.as_str() == l))
            }
            Compiled::IsGraph(i, id) => self.target(i, env) == Some(*id),
            Compiled::GraphsAre(m) => env.multiset == Some(m),
            Compiled::All(body) => env
                .multiset
                .is_some_and(|m| m.ids().iter().all(|&g| body.holds(&Env { graph: Some(g), ..*env }))),
            Compiled::Any(body) => env
                .multiset
                .is_some_and(|m| m.ids().iter().any(|&g| body.holds(&Env { graph: Some(g), ..*env }))),
            Compiled::Cmp(op, l, r) => op.apply(l.int(env), r.int(env)),
            Compiled::And(l, r) => l.holds(env) && r.holds(env),
            Compiled::Or(l, r) => l.holds(env) || r.holds(env),
            Compiled::Not(e) => !e.holds(env),
            _ => unreachable!("type checked"),
        }
    }
}
