use std::fmt::Write as _;

use crate::format::{write_graph_body, write_rule_body};
use crate::lexer::quote;

use super::ast::*;

/// Renders a script in canonical layout; parsing the output gives back an equal script.
pub fn print_script(script: &Script) -> String {
    let mut out = String::new();
    for item in &script.items {
        match item {
            Item::Graph { name, graph, ids } => {
                let _ = writeln!(out, "graph {} {{", name.text);
                write_graph_body(&mut out, graph, ids, "  ");
                out.push_str("}\n");
            }
            Item::Molecule { name, smiles } => {
                let _ = writeln!(out, "molecule {} {};", name.text, quote(smiles));
            }
            Item::Rule { name, rule } => {
                let _ = writeln!(out, "rule {} {{", name.text);
                write_rule_body(&mut out, rule, "  ");
                out.push_str("}\n");
            }
            Item::InverseRule { name, of } => {
                let _ = writeln!(out, "rule {} = inverse {};", name.text, of.text);
            }
            Item::Include { path, .. } => {
                let _ = writeln!(out, "include {};", quote(path));
            }
            Item::Predicate { name, expr } => {
                let _ = writeln!(out, "predicate {} = {};", name.text, print_expr(expr));
            }
            Item::Strategy { name, body } => {
                let _ = writeln!(out, "strategy {} = {};", name.text, print_strategy(body));
            }
            Item::Main { body, .. } => {
                let _ = writeln!(out, "main = {};", print_strategy(body));
            }
            Item::Export { kind, path, .. } => {
                let k = match kind {
                    ExportKind::Dot => "dot",
                    ExportKind::Json => "json",
                };
                let _ = writeln!(out, "export {k} {};", quote(path));
            }
            Item::Config { key, value } => {
                let _ = writeln!(out, "config {} = {value};", key.text);
            }
        }
    }
    out
}

fn side(s: Side) -> &'static str {
    match s {
        Side::Subset => "Subset",
        Side::Universe => "Universe",
    }
}

pub fn print_strategy(s: &Strat) -> String {
    match s {
        Strat::Sequence(list) => list
            .iter()
            .map(|t| match t {
                Strat::Sequence(_) => format!("({})", print_strategy(t)),
                _ => print_strategy(t),
            })
            .collect::<Vec<_>>()
            .join(" -> "),
        Strat::Rule(n) => format!("rule {}", n.text),
        Strat::Ref(n) => n.text.clone(),
        Strat::Identity(_) => "identity".to_string(),
        Strat::Parallel(list) => {
            format!("parallel {{ {} }}", list.iter().map(print_strategy).collect::<Vec<_>>().join(", "))
        }
        Strat::Repeat { limit, inner } => {
            let n = limit.map_or_else(String::new, |n| n.to_string());
            format!("repeat[{n}] {{ {} }}", print_strategy(inner))
        }
        Strat::Revive(inner) => format!("revive {{ {} }}", print_strategy(inner)),
        Strat::AltRuleApp(inner) => format!("altRuleApp {{ {} }}", print_strategy(inner)),
        Strat::LeftPredicate(e, inner) => format!("leftPredicate[{}] {{ {} }}", print_expr(e), print_strategy(inner)),
        Strat::RightPredicate(e, inner) => format!("rightPredicate[{}] {{ {} }}", print_expr(e), print_strategy(inner)),
        Strat::Filter(sd, e) => format!("filter{}[{}]", side(*sd), print_expr(e)),
        Strat::Sort { side: sd, key, descending } => {
            format!("sort{}[{}{}]", side(*sd), key.keyword(), if *descending { ", desc" } else { "" })
        }
        Strat::Take(sd, n) => format!("take{}[{n}]", side(*sd)),
        Strat::Add(sd, names) => {
            format!("add{}({})", side(*sd), names.iter().map(|n| n.text.as_str()).collect::<Vec<_>>().join(", "))
        }
    }
}

fn operand(e: &Expr) -> String {
    match e {
        Expr::Int(..) | Expr::Bool(..) | Expr::Name(_) | Expr::Call(..) => print_expr(e),
        _ => format!("({})", print_expr(e)),
    }
}

pub fn print_expr(e: &Expr) -> String {
    match e {
        Expr::Int(n, _) => n.to_string(),
        Expr::Bool(b, _) => b.to_string(),
        Expr::Name(n) => n.text.clone(),
        Expr::Call(n, args) => {
            let args: Vec<String> = args
                .iter()
                .map(|a| match a {
                    Arg::Expr(e) => print_expr(e),
                    Arg::Str(s, _) => quote(s),
                })
                .collect();
            format!("{}({})", n.text, args.join(", "))
        }
        Expr::Cmp(op, l, r) => format!("{} {} {}", operand(l), op.symbol(), operand(r)),
        Expr::Not(inner) => match **inner {
            Expr::And(..) | Expr::Or(..) => format!("not ({})", print_expr(inner)),
            _ => format!("not {}", print_expr(inner)),
        },
        Expr::And(l, r) => {
            let l = match **l {
                Expr::Or(..) => format!("({})", print_expr(l)),
                _ => print_expr(l),
            };
            let r = match **r {
                Expr::Or(..) | Expr::And(..) => format!("({})", print_expr(r)),
                _ => print_expr(r),
            };
            format!("{l} and {r}")
        }
        Expr::Or(l, r) => {
            let r = match **r {
                Expr::Or(..) => format!("({})", print_expr(r)),
                _ => print_expr(r),
            };
            format!("{} or {r}", print_expr(l))
        }
    }
}
