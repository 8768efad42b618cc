//! Small molecules as explicit-hydrogen labeled graphs and the Diels-Alder rule.
//!
//! Only a subset of SMILES is understood: the elements C, N, O and H written
//! without brackets, the bonds `-`, `=` and `#`, branches and single-digit ring
//! closures. Hydrogens are added explicitly to fill the valence of each atom.

use std::collections::HashMap;

use thiserror::Error;

use crate::graph::LabeledGraph;
use crate::rule::Rule;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MoleculeError {
    #[error("unsupported token '{token}' at position {position}")]
    UnsupportedToken { token: char, position: usize },
    #[error("atom {atom} ({element}) exceeds its valence of {valence}")]
    Valence { atom: usize, element: &'static str, valence: u8 },
    #[error("ring bond {0} is never closed")]
    UnclosedRing(u8),
    #[error("unbalanced branch at position {0}")]
    UnbalancedBranch(usize),
    #[error("bond symbol at position {0} is not followed by an atom")]
    DanglingBond(usize),
    #[error("atoms {0} and {1} are bonded twice")]
    DuplicateBond(usize, usize),
    #[error("empty molecule")]
    Empty,
}

fn element(c: char) -> Option<(&'static str, u8)> {
    match c {
        'C' => Some(("C", 4)),
        'N' => Some(("N", 3)),
        'O' => Some(("O", 2)),
        'H' => Some(("H", 1)),
        _ => None,
    }
}

fn bond_label(order: u8) -> &'static str {
    match order {
        1 => "-",
        2 => "=",
        _ => "#",
    }
}

/// Parses a SMILES-subset string into an explicit-hydrogen molecule graph.
/// Vertex labels are element symbols; edge labels are `-`, `=` or `#`.
pub fn parse_molecule(smiles: &str) -> Result<LabeledGraph, MoleculeError> {
    let mut atoms: Vec<(&'static str, u8)> = Vec::new();
    let mut bonds: Vec<(usize, usize, u8)> = Vec::new();
    let mut branch_stack: Vec<usize> = Vec::new();
    let mut rings: HashMap<u8, (usize, Option<u8>)> = HashMap::new();
    let mut previous: Option<usize> = None;
    let mut pending: Option<(u8, usize)> = None;

    for (pos, c) in smiles.chars().enumerate() {
        if let Some(el) = element(c) {
            let a = atoms.len();
            atoms.push(el);
            if let Some(p) = previous {
                bonds.push((p, a, pending.map_or(1, |(o, _)| o)));
            } else if let Some((_, at)) = pending {
                return Err(MoleculeError::DanglingBond(at));
            }
            pending = None;
            previous = Some(a);
            continue;
        }
        match c {
            '-' | '=' | '#' => {
                if previous.is_none() || pending.is_some() {
                    return Err(MoleculeError::UnsupportedToken { token: c, position: pos });
                }
                pending = Some((if c == '-' { 1 } else if c == '=' { 2 } else { 3 }, pos));
            }
            '(' => {
                let p = previous.ok_or(MoleculeError::UnbalancedBranch(pos))?;
                branch_stack.push(p);
            }
            ')' => {
                if pending.is_some() {
                    return Err(MoleculeError::DanglingBond(pos));
                }
                previous = Some(branch_stack.pop().ok_or(MoleculeError::UnbalancedBranch(pos))?);
            }
            '1'..='9' => {
                let digit = c as u8 - b'0';
                let here = previous.ok_or(MoleculeError::UnsupportedToken { token: c, position: pos })?;
                let order = pending.take().map(|(o, _)| o);
                match rings.remove(&digit) {
                    Some((other, open_order)) => {
                        bonds.push((other, here, order.or(open_order).unwrap_or(1)));
                    }
                    None => {
                        rings.insert(digit, (here, order));
                    }
                }
            }
            _ => return Err(MoleculeError::UnsupportedToken { token: c, position: pos }),
        }
    }
    if let Some((_, at)) = pending {
        return Err(MoleculeError::DanglingBond(at));
    }
    if !branch_stack.is_empty() {
        return Err(MoleculeError::UnbalancedBranch(smiles.len()));
    }
    if let Some(&digit) = rings.keys().min() {
        return Err(MoleculeError::UnclosedRing(digit));
    }
    if atoms.is_empty() {
        return Err(MoleculeError::Empty);
    }

    let mut used = vec![0u8; atoms.len()];
    let mut g = LabeledGraph::new();
    for (sym, _) in &atoms {
        g.add_vertex(*sym);
    }
    for &(a, b, order) in &bonds {
        used[a] += order;
        used[b] += order;
        if g.add_edge(a, b, bond_label(order)).is_err() {
            return Err(MoleculeError::DuplicateBond(a.min(b), a.max(b)));
        }
    }
    for (a, &(sym, valence)) in atoms.iter().enumerate() {
        if used[a] > valence {
            return Err(MoleculeError::Valence { atom: a, element: sym, valence });
        }
        for _ in used[a]..valence {
            let h = g.add_vertex("H");
            g.add_edge(a, h, "-").expect("fresh hydrogen");
        }
    }
    Ok(g)
}

/// Checks that every vertex is a known element whose bond orders sum to its valence.
pub fn valence_consistent(g: &LabeledGraph) -> bool {
    (0..g.vertex_count()).all(|v| {
        let Some(valence) = g.label(v).as_str().chars().next().filter(|_| g.label(v).as_str().len() == 1).and_then(element) else {
            return false;
        };
        let total: u32 = g
            .neighbours(v)
            .iter()
            .map(|&(_, e)| match g.edge(e).label.as_str() {
                "-" => 1,
                "=" => 2,
                "#" => 3,
                _ => 100,
            })
            .sum();
        total == valence.1 as u32
    })
}

/// The Diels-Alder cycloaddition on six context carbons: diene `c1=c2-c3=c4` and
/// dienophile `c5=c6` become the ring `c1-c2=c3-c4-c5-c6-c1`.
pub fn diels_alder_rule() -> Rule {
    let mut r = Rule::new("dielsAlder");
    for id in 1..=6 {
        r = r.context_vertex(id, "C");
    }
    r.edge(1, 2, Some("="), Some("-"))
        .edge(2, 3, Some("-"), Some("="))
        .edge(3, 4, Some("="), Some("-"))
        .edge(5, 6, Some("="), Some("-"))
        .edge(4, 5, None, Some("-"))
        .edge(6, 1, None, Some("-"))
}

pub const ISOPRENE: &str = "CC(=C)C=C";
pub const CYCLOHEXADIENE: &str = "C1=CC=CCC1";

#[cfg(test)]
mod tests {
    use super::*;

    fn count(g: &LabeledGraph, label: &str) -> usize {
        g.labels().iter().filter(|l| l.as_str() == label).count()
    }

    fn edge_count(g: &LabeledGraph, label: &str) -> usize {
        g.edges().iter().filter(|e| e.label.as_str() == label).count()
    }

    #[test]
    fn isoprene_has_thirteen_atoms() {
        let g = parse_molecule(ISOPRENE).unwrap();
        assert_eq!((count(&g, "C"), count(&g, "H")), (5, 8));
        assert_eq!(edge_count(&g, "="), 2);
        assert_eq!(g.edge_count(), 12);
        assert!(valence_consistent(&g));
    }

    #[test]
    fn cyclohexadiene_has_fourteen_atoms() {
        let g = parse_molecule(CYCLOHEXADIENE).unwrap();
        assert_eq!((count(&g, "C"), count(&g, "H")), (6, 8));
        assert_eq!(edge_count(&g, "="), 2);
        // 6 ring bonds + 8 C-H
        assert_eq!(g.edge_count(), 14);
        assert!(g.is_connected());
    }

    #[test]
    fn water_and_triple_bonds() {
        let w = parse_molecule("O").unwrap();
        assert_eq!((w.vertex_count(), w.edge_count()), (3, 2));
        let hcn = parse_molecule("C#N").unwrap();
        assert_eq!(hcn.vertex_count(), 3);
        assert_eq!(edge_count(&hcn, "#"), 1);
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_molecule("c1ccccc1"), Err(MoleculeError::UnsupportedToken { token: 'c', .. })));
        assert!(matches!(parse_molecule("C=O=C=C"), Err(MoleculeError::Valence { .. })));
        assert_eq!(parse_molecule("C1CC"), Err(MoleculeError::UnclosedRing(1)));
        assert!(matches!(parse_molecule("C(C"), Err(MoleculeError::UnbalancedBranch(_))));
        assert!(matches!(parse_molecule("C="), Err(MoleculeError::DanglingBond(_))));
        assert_eq!(parse_molecule(""), Err(MoleculeError::Empty));
        assert!(matches!(parse_molecule("[CH4]"), Err(MoleculeError::UnsupportedToken { token: '[', .. })));
    }

    #[test]
    fn diels_alder_rule_is_chemical() {
        assert!(diels_alder_rule().validate(true).is_ok());
    }
}
