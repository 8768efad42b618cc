use crate::format::{parse_graph_body, parse_rule_body};
use crate::lexer::{Cursor, SyntaxError, Tok};

use super::ast::*;
use super::ScriptError;

const STRATEGY_KEYWORDS: [&str; 20] = [
    "rule",
    "identity",
    "parallel",
    "repeat",
    "revive",
    "leftPredicate",
    "rightPredicate",
    "filterSubset",
    "filterUniverse",
    "sortSubset",
    "sortUniverse",
    "takeSubset",
    "takeUniverse",
    "addSubset",
    "addUniverse",
    "altRuleApp",
    "take",
    "filter",
    "sort",
    "add",
];

pub fn parse_script(text: &str) -> Result<Script, ScriptError> {
    let mut cur = Cursor::new(text)?;
    let mut items = Vec::new();
    while !cur.at_eof() {
        items.push(item(&mut cur)?);
    }
    Ok(Script { items })
}

/// Parses a standalone strategy expression.
pub fn parse_strategy(text: &str) -> Result<Strat, ScriptError> {
    let mut cur = Cursor::new(text)?;
    let s = strategy(&mut cur)?;
    if !cur.at_eof() {
        return Err(cur.error(format!("unexpected {} after strategy", cur.peek().tok)).into());
    }
    Ok(s)
}

fn declared_name(cur: &mut Cursor) -> Result<Name, ScriptError> {
    let (text, at) = cur.expect_ident()?;
    if STRATEGY_KEYWORDS.contains(&text.as_str()) || ["true", "false", "and", "or", "not", "main"].contains(&text.as_str()) {
        return Err(SyntaxError::new(at, format!("'{text}' is a reserved word")).into());
    }
    Ok(Name::new(&text, at))
}

fn item(cur: &mut Cursor) -> Result<Item, ScriptError> {
    let (kw, at) = cur.expect_ident()?;
    let it = match kw.as_str() {
        "graph" => {
            let name = declared_name(cur)?;
            cur.expect_sym("{")?;
            let (graph, ids) = parse_graph_body(cur)?;
            cur.expect_sym("}")?;
            return Ok(Item::Graph { name, graph, ids });
        }
        "rule" => {
            let name = declared_name(cur)?;
            if cur.accept_sym("=") {
                cur.expect_keyword("inverse")?;
                let (of, oat) = cur.expect_ident()?;
                cur.expect_sym(";")?;
                return Ok(Item::InverseRule { name, of: Name::new(&of, oat) });
            }
            cur.expect_sym("{")?;
            let rule = parse_rule_body(cur, &name.text, name.at())?;
            cur.expect_sym("}")?;
            return Ok(Item::Rule { name, rule });
        }
        "molecule" => {
            let name = declared_name(cur)?;
            let (smiles, _) = cur.expect_str()?;
            Item::Molecule { name, smiles }
        }
        "include" => Item::Include { path: cur.expect_str()?.0, span: Span(at) },
        "predicate" => {
            let name = declared_name(cur)?;
            cur.expect_sym("=")?;
            Item::Predicate { name, expr: expr(cur)? }
        }
        "strategy" => {
            let name = declared_name(cur)?;
            cur.expect_sym("=")?;
            Item::Strategy { name, body: strategy(cur)? }
        }
        "main" => {
            cur.expect_sym("=")?;
            Item::Main { body: strategy(cur)?, span: Span(at) }
        }
        "export" => {
            let (kind, kat) = cur.expect_ident()?;
            let kind = match kind.as_str() {
                "dot" => ExportKind::Dot,
                "json" => ExportKind::Json,
                other => return Err(SyntaxError::new(kat, format!("unknown export format '{other}', expected 'dot' or 'json'")).into()),
            };
            Item::Export { kind, path: cur.expect_str()?.0, span: Span(at) }
        }
        "config" => {
            let (key, kat) = cur.expect_ident()?;
            cur.expect_sym("=")?;
            Item::Config { key: Name::new(&key, kat), value: cur.expect_int()?.0 }
        }
        other => {
            return Err(SyntaxError::new(
                at,
                format!("expected a declaration (graph, molecule, rule, include, predicate, strategy, main, export, config), found '{other}'"),
            )
            .into())
        }
    };
    cur.expect_sym(";")?;
    Ok(it)
}

pub(super) fn strategy(cur: &mut Cursor) -> Result<Strat, ScriptError> {
    let mut terms = vec![term(cur)?];
    while cur.accept_sym("->") {
        terms.push(term(cur)?);
    }
    Ok(if terms.len() == 1 { terms.pop().expect("one term") } else { Strat::Sequence(terms) })
}

fn braced(cur: &mut Cursor) -> Result<Box<Strat>, ScriptError> {
    cur.expect_sym("{")?;
    let s = strategy(cur)?;
    cur.expect_sym("}")?;
    Ok(Box::new(s))
}

fn bracketed_expr(cur: &mut Cursor) -> Result<Expr, ScriptError> {
    cur.expect_sym("[")?;
    let e = expr(cur)?;
    cur.expect_sym("]")?;
    Ok(e)
}

fn side_of(kw: &str) -> Side {
    if kw.ends_with("Subset") {
        Side::Subset
    } else {
        Side::Universe
    }
}

fn term(cur: &mut Cursor) -> Result<Strat, ScriptError> {
    if cur.accept_sym("(") {
        let s = strategy(cur)?;
        cur.expect_sym(")")?;
        return Ok(s);
    }
    let (kw, at) = cur.expect_ident()?;
    Ok(match kw.as_str() {
        "rule" => {
            let (n, nat) = cur.expect_ident()?;
            Strat::Rule(Name::new(&n, nat))
        }
        "identity" => Strat::Identity(Span(at)),
        "parallel" => {
            cur.expect_sym("{")?;
            let mut branches = vec![strategy(cur)?];
            while cur.accept_sym(",") {
                branches.push(strategy(cur)?);
            }
            cur.expect_sym("}")?;
            Strat::Parallel(branches)
        }
        "repeat" => {
            cur.expect_sym("[")?;
            let limit = if cur.is_sym("]") { None } else { Some(cur.expect_int()?.0) };
            cur.expect_sym("]")?;
            Strat::Repeat { limit, inner: braced(cur)? }
        }
        "revive" => Strat::Revive(braced(cur)?),
        "altRuleApp" => Strat::AltRuleApp(braced(cur)?),
        "leftPredicate" => {
            let e = bracketed_expr(cur)?;
            Strat::LeftPredicate(e, braced(cur)?)
        }
        "rightPredicate" => {
            let e = bracketed_expr(cur)?;
            Strat::RightPredicate(e, braced(cur)?)
        }
        "filterSubset" | "filterUniverse" => Strat::Filter(side_of(&kw), bracketed_expr(cur)?),
        "sortSubset" | "sortUniverse" => {
            cur.expect_sym("[")?;
            let (k, kat) = cur.expect_ident()?;
            let key = match k.as_str() {
                "vertexCount" => SortKey::VertexCount,
                "edgeCount" => SortKey::EdgeCount,
                "text" => SortKey::Text,
                other => {
                    return Err(SyntaxError::new(kat, format!("unknown sort key '{other}', expected vertexCount, edgeCount or text")).into())
                }
            };
            let descending = if cur.accept_sym(",") {
                cur.expect_keyword("desc")?;
                true
            } else {
                false
            };
            cur.expect_sym("]")?;
            Strat::Sort { side: side_of(&kw), key, descending }
        }
        "takeSubset" | "takeUniverse" => {
            cur.expect_sym("[")?;
            let (n, _) = cur.expect_int()?;
            cur.expect_sym("]")?;
            Strat::Take(side_of(&kw), n)
        }
        "addSubset" | "addUniverse" => {
            cur.expect_sym("(")?;
            let mut names = Vec::new();
            if !cur.is_sym(")") {
                loop {
                    let (n, nat) = cur.expect_ident()?;
                    names.push(Name::new(&n, nat));
                    if !cur.accept_sym(",") {
                        break;
                    }
                }
            }
            cur.expect_sym(")")?;
            Strat::Add(side_of(&kw), names)
        }
        "take" | "filter" | "sort" | "add" => {
            return Err(SyntaxError::new(at, format!("'{kw}' needs a variant suffix: {kw}Subset or {kw}Universe")).into())
        }
        _ => Strat::Ref(Name::new(&kw, at)),
    })
}

pub(super) fn expr(cur: &mut Cursor) -> Result<Expr, ScriptError> {
    let mut e = and_expr(cur)?;
    while cur.accept_ident("or") {
        e = Expr::Or(Box::new(e), Box::new(and_expr(cur)?));
    }
    Ok(e)
}

fn and_expr(cur: &mut Cursor) -> Result<Expr, ScriptError> {
    let mut e = unary(cur)?;
    while cur.accept_ident("and") {
        e = Expr::And(Box::new(e), Box::new(unary(cur)?));
    }
    Ok(e)
}

fn unary(cur: &mut Cursor) -> Result<Expr, ScriptError> {
    if cur.accept_ident("not") {
        return Ok(Expr::Not(Box::new(unary(cur)?)));
    }
    let left = atom(cur)?;
    let op = match &cur.peek().tok {
        Tok::Sym(s) => CmpOp::from_symbol(s),
        _ => None,
    };
    match op {
        Some(op) => {
            cur.next();
            Ok(Expr::Cmp(op, Box::new(left), Box::new(atom(cur)?)))
        }
        None => Ok(left),
    }
}

fn atom(cur: &mut Cursor) -> Result<Expr, ScriptError> {
    if cur.accept_sym("(") {
        let e = expr(cur)?;
        cur.expect_sym(")")?;
        return Ok(e);
    }
    let at = cur.at();
    match cur.peek().tok.clone() {
        Tok::Int(n) => {
            cur.next();
            Ok(Expr::Int(n, Span(at)))
        }
        Tok::Ident(s) if s == "true" || s == "false" => {
            cur.next();
            Ok(Expr::Bool(s == "true", Span(at)))
        }
        Tok::Ident(s) => {
            cur.next();
            let name = Name::new(&s, at);
            if !cur.accept_sym("(") {
                return Ok(Expr::Name(name));
            }
            let mut args = Vec::new();
            if !cur.is_sym(")") {
                loop {
                    if cur.is_str() {
                        let sat = cur.at();
                        args.push(Arg::Str(cur.expect_str()?.0, Span(sat)));
                    } else {
                        args.push(Arg::Expr(expr(cur)?));
                    }
                    if !cur.accept_sym(",") {
                        break;
                    }
                }
            }
            cur.expect_sym(")")?;
            Ok(Expr::Call(name, args))
        }
        other => Err(cur.error(format!("expected an expression, found {other}")).into()),
    }
}
