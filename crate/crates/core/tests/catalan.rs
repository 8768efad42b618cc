mod common;

use common::{connected_graphs, oracle_solvable, oracle_successors, same_classes};
use gstrat::catalan::{
    oracle_move, pipeline_move, pipeline_successors, random_level, solve_level, CatalanLevel, CatalanRules, ACTIVE, FAIL, FREE,
    REMOVED,
};
use gstrat::graph::{isomorphic, LabeledGraph};
use gstrat::strategy::{Engine, EngineConfig, Strategy};
use rand::rngs::StdRng;
use rand::SeedableRng;

#[test]
fn connected_graph_counts() {
    let counts: Vec<usize> = (1..=6).map(|n| connected_graphs(n).len()).collect();
    assert_eq!(counts, [1, 1, 2, 6, 21, 112]);
}

fn check_graph(g: &LabeledGraph) {
    for v in 0..g.vertex_count() {
        let moved = pipeline_move(g, v).unwrap();
        match oracle_move(g, v) {
            Some(expected) => {
                assert_eq!(moved.len(), 1, "vertex {v}");
                assert!(isomorphic(&moved[0], &expected), "vertex {v}");
            }
            None => assert!(moved.is_empty(), "degree {} vertex {v} survived", g.degree(v)),
        }
    }
    assert!(same_classes(&pipeline_successors(g).unwrap(), &oracle_successors(g)));
}

#[test]
fn pipeline_matches_oracle_on_small_graphs() {
    for n in 1..=6 {
        for g in connected_graphs(n) {
            check_graph(&g);
        }
    }
}

#[test]
fn pipeline_matches_oracle_on_random_graphs() {
    let mut rng = StdRng::seed_from_u64(7);
    for i in 0..40 {
        let n = 4 + i % 7;
        check_graph(&random_level(&mut rng, n, 0.3));
    }
}

#[test]
fn intermediate_labels_stay_in_alphabet() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..10 {
        let g = random_level(&mut rng, 8, 0.35);
        let rules = CatalanRules::new();
        let mut engine = Engine::new(EngineConfig::default());
        let id = engine.add_graph(g, None).unwrap();
        engine.run(&Strategy::AddSubset(vec![id]).then(rules.step().alt_rule_app())).unwrap();
        for h in engine.derivations.vertices() {
            let h = engine.repo.graph(*h);
            assert!(h.labels().iter().all(|l| [FREE, ACTIVE, REMOVED, FAIL].contains(&l.as_str())));
            assert!(h.edges().iter().all(|e| e.label.as_str().is_empty()));
        }
    }
}

#[test]
fn solutions_replay_under_oracle() {
    let mut rng = StdRng::seed_from_u64(3);
    let mut solved = 0;
    while solved < 5 {
        let g = random_level(&mut rng, 7, 0.3);
        if !oracle_solvable(&g) {
            continue;
        }
        let solve = solve_level(&CatalanLevel::new("random", &g).unwrap(), EngineConfig::default()).unwrap();
        let states = solve.solution.clone().expect("oracle found a solution");
        let vertices = solve.contracted_vertices().expect("every step is a move");
        assert_eq!(vertices.len(), states.len() - 1);
        assert_eq!(solve.engine.repo.graph(*states.last().unwrap()).vertex_count(), 1);
        solved += 1;
    }
}

#[test]
fn cycle_has_no_moves() {
    let mut c5 = common::path_graph(&["0"; 5], &[""; 4]);
    c5.add_edge(4, 0, "").unwrap();
    let rules = CatalanRules::new();
    let mut engine = Engine::default();
    let id = engine.add_graph(c5, None).unwrap();
    let out = engine.run(&rules.strategy(id)).unwrap();
    assert_eq!((out.universe(), out.subset()), (&[id][..], &[id][..]));
    assert!(engine.derivations.is_empty());
}
