//! Syntax tree of strategy scripts. Source positions never take part in equality.

use crate::graph::LabeledGraph;
use crate::lexer::Location;
use crate::rule::Rule;

/// A source position that compares equal to every other span.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span(pub Location);

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl Eq for Span {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Name {
    pub text: String,
    pub span: Span,
}

impl Name {
    pub fn new(text: &str, at: Location) -> Self {
        Name { text: text.to_string(), span: Span(at) }
    }

    pub fn at(&self) -> Location {
        self.span.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Script {
    pub items: Vec<Item>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportKind {
    Dot,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    Graph { name: Name, graph: LabeledGraph, ids: Vec<u64> },
    Molecule { name: Name, smiles: String },
    Rule { name: Name, rule: Rule },
    /// `rule q = inverse p;`
    InverseRule { name: Name, of: Name },
    Include { path: String, span: Span },
    Predicate { name: Name, expr: Expr },
    Strategy { name: Name, body: Strat },
    Main { body: Strat, span: Span },
    Export { kind: ExportKind, path: String, span: Span },
    Config { key: Name, value: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortKey {
    VertexCount,
    EdgeCount,
    Text,
}

impl SortKey {
    pub fn keyword(self) -> &'static str {
        match self {
            SortKey::VertexCount => "vertexCount",
            SortKey::EdgeCount => "edgeCount",
            SortKey::Text => "text",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Subset,
    Universe,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Strat {
    Rule(Name),
    Ref(Name),
    Identity(Span),
    Parallel(Vec<Strat>),
    Sequence(Vec<Strat>),
    Repeat { limit: Option<u64>, inner: Box<Strat> },
    Revive(Box<Strat>),
    LeftPredicate(Expr, Box<Strat>),
    RightPredicate(Expr, Box<Strat>),
    Filter(Side, Expr),
    Sort { side: Side, key: SortKey, descending: bool },
    Take(Side, u64),
    Add(Side, Vec<Name>),
    AltRuleApp(Box<Strat>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn from_symbol(s: &str) -> Option<CmpOp> {
        Some(match s {
            "==" => CmpOp::Eq,
            "!=" => CmpOp::Ne,
            "<" => CmpOp::Lt,
            "<=" => CmpOp::Le,
            ">" => CmpOp::Gt,
            ">=" => CmpOp::Ge,
            _ => return None,
        })
    }

    pub fn apply(self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }
}

/// Argument of a builtin call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Arg {
    Expr(Expr),
    Str(String, Span),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int(u64, Span),
    Bool(bool, Span),
    /// A bare name: a zero-argument builtin, a named predicate, or (as a call
    /// argument) a graph name.
    Name(Name),
    Call(Name, Vec<Arg>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
}

impl Expr {
    pub fn at(&self) -> Location {
        match self {
            Expr::Int(_, s) | Expr::Bool(_, s) => s.0,
            Expr::Name(n) | Expr::Call(n, _) => n.at(),
            Expr::Cmp(_, l, _) | Expr::And(l, _) | Expr::Or(l, _) => l.at(),
            Expr::Not(e) => e.at(),
        }
    }
}
