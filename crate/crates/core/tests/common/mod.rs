#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};

use gstrat::catalan::{oracle_move, FREE};
use gstrat::graph::LabeledGraph;
use gstrat::repository::{GraphId, GraphRepository};

/// One representative of every connected unlabeled graph on `n` vertices, built by
/// attaching a new vertex to a nonempty vertex set of each graph on `n - 1` vertices.
pub fn connected_graphs(n: usize) -> Vec<LabeledGraph> {
    let mut level = vec![{
        let mut g = LabeledGraph::new();
        g.add_vertex(FREE);
        g
    }];
    for size in 2..=n {
        let mut repo = GraphRepository::new();
        let mut next = Vec::new();
        for g in &level {
            for mask in 1u32..(1 << (size - 1)) {
                let mut h = g.clone();
                let v = h.add_vertex(FREE);
                for u in 0..size - 1 {
                    if mask & (1 << u) != 0 {
                        h.add_edge(u, v, "").unwrap();
                    }
                }
                if repo.intern(h.clone()).unwrap().is_new {
                    next.push(h);
                }
            }
        }
        level = next;
    }
    if n == 0 {
        Vec::new()
    } else {
        level
    }
}

/// All classes one oracle move away from `g`.
pub fn oracle_successors(g: &LabeledGraph) -> Vec<LabeledGraph> {
    let mut repo = GraphRepository::new();
    (0..g.vertex_count())
        .filter_map(|v| oracle_move(g, v))
        .filter(|h| repo.intern(h.clone()).unwrap().is_new)
        .collect()
}

/// Breadth-first search over oracle moves; true if a single vertex is reachable.
pub fn oracle_solvable(g: &LabeledGraph) -> bool {
    let mut repo = GraphRepository::new();
    let start = repo.intern(g.clone()).unwrap().id;
    let mut seen: HashSet<GraphId> = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(id) = queue.pop_front() {
        let cur = repo.graph(id).clone();
        if cur.vertex_count() == 1 {
            return true;
        }
        for h in oracle_successors(&cur) {
            let hid = repo.intern(h).unwrap().id;
            if seen.insert(hid) {
                queue.push_back(hid);
            }
        }
    }
    false
}

/// True if the two lists contain the same isomorphism classes, each exactly once.
pub fn same_classes(a: &[LabeledGraph], b: &[LabeledGraph]) -> bool {
    let mut repo = GraphRepository::new();
    let ids = |gs: &[LabeledGraph], repo: &mut GraphRepository| -> Option<HashSet<GraphId>> {
        let ids: Vec<GraphId> = gs.iter().map(|g| repo.intern(g.clone()).unwrap().id).collect();
        let set: HashSet<GraphId> = ids.iter().copied().collect();
        (set.len() == ids.len()).then_some(set)
    };
    match (ids(a, &mut repo), ids(b, &mut repo)) {
        (Some(x), Some(y)) => x == y,
        _ => false,
    }
}

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use gstrat::dpo::{apply_at, Derivation};
use gstrat::graph::connected_components;
use gstrat::matcher::{HostVertex, Morphism};
use gstrat::repository::ComponentMultiset;
use gstrat::rule::{CompiledRule, Rule};
use rand::seq::SliceRandom;
use rand::Rng;

/// Every injective label- and edge-preserving map from `pattern` into `host`, by plain backtracking.
pub fn brute_force_embeddings(pattern: &LabeledGraph, host: &LabeledGraph) -> Vec<Vec<usize>> {
    fn extend(p: &LabeledGraph, h: &LabeledGraph, map: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let i = map.len();
        if i == p.vertex_count() {
            out.push(map.clone());
            return;
        }
        for v in 0..h.vertex_count() {
            if map.contains(&v) || p.label(i) != h.label(v) {
                continue;
            }
            let ok = (0..i).all(|j| match p.edge_label(i, j) {
                Some(l) => h.edge_label(v, map[j]) == Some(l),
                None => true,
            });
            if ok {
                map.push(v);
                extend(p, h, map, out);
                map.pop();
            }
        }
    }
    let mut out = Vec::new();
    extend(pattern, host, &mut Vec::new(), &mut out);
    out
}

/// Applies `rule` directly from its vertex and edge lists. `image[id]` is the host
/// vertex of each left rule vertex. `None` if the dangling condition fails or a
/// created edge collides with an existing one.
pub fn naive_apply(rule: &Rule, host: &LabeledGraph, image: &HashMap<u32, usize>) -> Option<LabeledGraph> {
    let deleted: HashSet<usize> = rule.vertices.iter().filter(|v| v.right.is_none()).map(|v| image[&v.id]).collect();
    let pair = |a: usize, b: usize| (a.min(b), a.max(b));
    let removed_edges: HashSet<(usize, usize)> = rule
        .edges
        .iter()
        .filter(|e| e.left.is_some() && e.right.is_none())
        .map(|e| pair(image[&e.source], image[&e.target]))
        .collect();
    for e in host.edges() {
        let touches = deleted.contains(&e.source) || deleted.contains(&e.target);
        if touches && !removed_edges.contains(&pair(e.source, e.target)) {
            return None;
        }
    }
    let mut labels: Vec<Option<String>> = host.labels().iter().map(|l| Some(l.as_str().to_string())).collect();
    for v in &rule.vertices {
        if let (Some(_), right) = (&v.left, &v.right) {
            labels[image[&v.id]] = right.as_ref().map(|l| l.as_str().to_string());
        }
    }
    let mut edges: HashMap<(usize, usize), String> = host
        .edges()
        .iter()
        .map(|e| (pair(e.source, e.target), e.label.as_str().to_string()))
        .filter(|(k, _)| !removed_edges.contains(k))
        .collect();
    for e in rule.edges.iter().filter(|e| e.left.is_some()) {
        if let Some(r) = &e.right {
            edges.insert(pair(image[&e.source], image[&e.target]), r.as_str().to_string());
        }
    }
    let mut where_is: HashMap<u32, usize> = image.clone();
    for v in rule.vertices.iter().filter(|v| v.left.is_none()) {
        where_is.insert(v.id, labels.len());
        labels.push(v.right.as_ref().map(|l| l.as_str().to_string()));
    }
    for e in rule.edges.iter().filter(|e| e.left.is_none()) {
        let key = pair(where_is[&e.source], where_is[&e.target]);
        if edges.contains_key(&key) {
            return None;
        }
        edges.insert(key, e.right.as_ref().unwrap().as_str().to_string());
    }
    let mut g = LabeledGraph::new();
    let mut index = vec![usize::MAX; labels.len()];
    for (v, l) in labels.iter().enumerate() {
        if let Some(l) = l {
            index[v] = g.add_vertex(l.as_str());
        }
    }
    let mut sorted: Vec<_> = edges.into_iter().collect();
    sorted.sort();
    for ((a, b), l) in sorted {
        g.add_edge(index[a], index[b], l.as_str()).unwrap();
    }
    Some(g)
}

/// Left side of `rule` as a graph plus the rule vertex id of each of its vertices.
fn left_graph(rule: &Rule) -> (LabeledGraph, Vec<u32>) {
    let mut g = LabeledGraph::new();
    let mut ids = Vec::new();
    for v in &rule.vertices {
        if let Some(l) = &v.left {
            g.add_vertex(l.clone());
            ids.push(v.id);
        }
    }
    for e in rule.edges.iter().filter(|e| e.left.is_some()) {
        let a = ids.iter().position(|&x| x == e.source).unwrap();
        let b = ids.iter().position(|&x| x == e.target).unwrap();
        g.add_edge(a, b, e.left.clone().unwrap()).unwrap();
    }
    (g, ids)
}

pub type NaiveKey = (ComponentMultiset, ComponentMultiset);

/// Proper derivations by enumerating every multiset of universe graphs (with
/// repetition, up to the number of left components, containing a required graph)
/// and every embedding of the whole left side into their disjoint union.
pub fn naive_derivations(rule: &Rule, universe: &[GraphId], required: &[GraphId], repo: &mut GraphRepository) -> BTreeSet<NaiveKey> {
    let (left, ids) = left_graph(rule);
    let max_k = connected_components(&left).len();
    let mut pool: Vec<GraphId> = universe.to_vec();
    pool.sort();
    pool.dedup();
    let mut out = BTreeSet::new();
    let mut multisets: Vec<Vec<GraphId>> = vec![Vec::new()];
    for _ in 0..max_k {
        let mut next = Vec::new();
        for m in &multisets {
            for &g in &pool {
                if m.last().is_none_or(|&last| last <= g) {
                    let mut m2 = m.clone();
                    m2.push(g);
                    next.push(m2);
                }
            }
        }
        for m in &next {
            if !m.iter().any(|g| required.contains(g)) {
                continue;
            }
            let mut host = LabeledGraph::new();
            let mut copy_of = Vec::new();
            for (c, &g) in m.iter().enumerate() {
                host.append(repo.graph(g));
                copy_of.resize(host.vertex_count(), c);
            }
            for emb in brute_force_embeddings(&left, &host) {
                let touched: HashSet<usize> = emb.iter().map(|&v| copy_of[v]).collect();
                if touched.len() != m.len() {
                    continue;
                }
                let image: HashMap<u32, usize> = ids.iter().copied().zip(emb.iter().copied()).collect();
                if let Some(result) = naive_apply(rule, &host, &image) {
                    let outputs = connected_components(&result).into_iter().map(|c| repo.intern(c.graph).unwrap().id).collect();
                    out.insert((m.iter().copied().collect(), outputs));
                }
            }
        }
        multisets = next;
    }
    out
}

/// Applies the inverse rule to the outputs of `d`, at the match given by the trace,
/// and checks that the inputs come back.
pub fn inverse_recovers_inputs(d: &Derivation, inverse: &Arc<CompiledRule>, repo: &mut GraphRepository) -> bool {
    let rule = d.rule.rule();
    let fx = d.rule.effects();
    let mut output_of = vec![None; rule.vertices.len()];
    for i in 0..rule.vertices.len() {
        output_of[i] = match d.rule.left_index(i) {
            Some(lv) => {
                let h = d.morphism.image(lv).unwrap();
                d.trace[h.copy][h.vertex]
            }
            None => fx.created_origin.iter().position(|&o| o == i).map(|k| d.created[k]),
        };
    }
    let mut images: Vec<Option<HostVertex>> = vec![None; inverse.left().vertex_count()];
    for (lv, img) in images.iter_mut().enumerate() {
        let id = inverse.left_vertex(lv).id;
        let i = rule.vertices.iter().position(|v| v.id == id).unwrap();
        *img = output_of[i];
    }
    if images.iter().any(Option::is_none) {
        return false;
    }
    let mut m = Morphism::empty(images.len());
    for (lv, img) in images.iter().enumerate() {
        let img = img.unwrap();
        let part = Morphism::from_component(images.len(), &[lv], &[img.vertex], img.copy);
        m = Morphism::merge(&[m, part]).unwrap();
    }
    match apply_at(inverse, &d.outputs, &m, repo) {
        Ok(back) => back.output_multiset() == d.input_multiset(),
        Err(_) => false,
    }
}

pub fn random_connected<R: Rng>(rng: &mut R, n: usize, p: f64, vlabels: &[&str], elabels: &[&str]) -> LabeledGraph {
    let mut g = LabeledGraph::new();
    for _ in 0..n {
        g.add_vertex(*vlabels.choose(rng).unwrap());
    }
    for v in 1..n {
        let u = rng.gen_range(0..v);
        g.add_edge(u, v, *elabels.choose(rng).unwrap()).unwrap();
    }
    for u in 0..n {
        for v in u + 1..n {
            if g.edge_between(u, v).is_none() && rng.gen_bool(p) {
                g.add_edge(u, v, *elabels.choose(rng).unwrap()).unwrap();
            }
        }
    }
    g
}

/// A random valid rule, with a valid inverse, whose left side has one or two components of up to three vertices.
pub fn random_rule<R: Rng>(rng: &mut R, name: &str) -> Rule {
    const V: [&str; 2] = ["a", "b"];
    const E: [&str; 2] = ["x", "y"];
    loop {
        let mut rule = Rule::new(name);
        let mut next_id = 0u32;
        let mut left_ids = Vec::new();
        for _ in 0..rng.gen_range(1..=2) {
            let size = rng.gen_range(1..=3);
            let first = next_id;
            for k in 0..size {
                let id = next_id;
                next_id += 1;
                let l = *V.choose(rng).unwrap();
                let r = match rng.gen_range(0..6) {
                    0 => None,
                    1 => Some(*V.choose(rng).unwrap()),
                    _ => Some(l),
                };
                rule = rule.vertex(id, Some(l), r);
                left_ids.push(id);
                if k > 0 {
                    let src = rng.gen_range(first..id);
                    let el = *E.choose(rng).unwrap();
                    let er = match rng.gen_range(0..5) {
                        0 => None,
                        1 => Some(*E.choose(rng).unwrap()),
                        _ => Some(el),
                    };
                    rule = rule.edge(src, id, Some(el), er);
                }
            }
        }
        if rng.gen_bool(0.3) {
            let id = next_id;
            let anchor = *left_ids.choose(rng).unwrap();
            rule = rule.vertex(id, None, Some(*V.choose(rng).unwrap())).edge(anchor, id, None, Some(*E.choose(rng).unwrap()));
        }
        if rng.gen_bool(0.3) && left_ids.len() >= 2 {
            let pick: Vec<u32> = left_ids.choose_multiple(rng, 2).copied().collect();
            let exists = rule.edges.iter().any(|e| (e.source, e.target) == (pick[0], pick[1]) || (e.source, e.target) == (pick[1], pick[0]));
            if !exists {
                rule = rule.edge(pick[0], pick[1], None, Some(*E.choose(rng).unwrap()));
            }
        }
        // deleted vertices must lose all their rule edges
        let deleted: HashSet<u32> = rule.vertices.iter().filter(|v| v.right.is_none()).map(|v| v.id).collect();
        for e in &mut rule.edges {
            if deleted.contains(&e.source) || deleted.contains(&e.target) {
                e.right = None;
            }
        }
        rule.edges.retain(|e| e.left.is_some() || e.right.is_some());
        if rule.validate(false).is_ok() && rule.inverse().validate(false).is_ok() {
            return rule;
        }
    }
}

pub fn path_graph(labels: &[&str], edges: &[&str]) -> LabeledGraph {
    let mut g = LabeledGraph::new();
    for l in labels {
        g.add_vertex(*l);
    }
    for (i, e) in edges.iter().enumerate() {
        g.add_edge(i, i + 1, *e).unwrap();
    }
    g
}

/// The two-graph example: `a-b-a` and `a-b-a-b-a`, with the rule relabeling a `b` edge to `c`.
pub fn relabel_example() -> (gstrat::strategy::Engine, GraphId, GraphId, Arc<CompiledRule>) {
    let mut e = gstrat::strategy::Engine::default();
    let g1 = e.add_graph(path_graph(&["a", "a"], &["b"]), Some("g1")).unwrap();
    let g2 = e.add_graph(path_graph(&["a", "a", "a"], &["b", "b"]), Some("g2")).unwrap();
    let p = Rule::new("p").context_vertex(0, "a").context_vertex(1, "a").edge(0, 1, Some("b"), Some("c"));
    (e, g1, g2, Arc::new(CompiledRule::new(p).unwrap()))
}

/// Looks up the class of `g`, panicking if it was never discovered.
pub fn class_of(repo: &GraphRepository, g: &LabeledGraph) -> GraphId {
    repo.lookup(g).expect("graph was discovered").0
}
