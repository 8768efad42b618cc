//! Acceptance suite: prints one PASS/FAIL line per criterion and exits non-zero on any failure.

mod common;

use std::collections::{BTreeSet, HashSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::*;
use gstrat::catalan::{oracle_move, random_level, solve_level, CatalanLevel, CatalanRules};
use gstrat::dpo::{enumerate_proper_derivations, Derivation, DerivationQuery, EmbeddingCache};
use gstrat::dsl::{self, RunOptions};
use gstrat::graph::{isomorphic, LabeledGraph};
use gstrat::repository::{GraphId, GraphRepository};
use gstrat::rule::CompiledRule;
use gstrat::strategy::{Engine, EngineConfig, GraphState, Strategy};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn assets() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("assets")
}

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn within(limit: Duration, start: Instant) -> (bool, String) {
    let t = start.elapsed();
    (t <= limit, format!("{:.2}s of {}s", t.as_secs_f64(), limit.as_secs()))
}

/// Inversion results, gathered while the other criteria run.
#[derive(Default)]
struct Inversions {
    checked: usize,
    failed: Vec<String>,
}

impl Inversions {
    fn check_all(&mut self, what: &str, derivations: &[Derivation], repo: &mut GraphRepository) {
        let mut inverses: std::collections::HashMap<String, Arc<CompiledRule>> = Default::default();
        for d in derivations {
            let inv = inverses
                .entry(d.rule.name().to_string())
                .or_insert_with(|| Arc::new(CompiledRule::new(d.rule.rule().inverse()).expect("invertible rule")))
                .clone();
            self.checked += 1;
            if !inverse_recovers_inputs(d, &inv, repo) {
                self.failed.push(format!("{what}: {}", d.rule.name()));
            }
        }
    }
}

fn revive_semantics() -> Outcome {
    let start = Instant::now();
    let run = |s: fn(Strategy) -> Strategy| {
        let (mut e, g1, g2, p) = relabel_example();
        let out = e.evaluate(&s(Strategy::rule(&p)), GraphState::from_parts(vec![g1, g2], vec![g1, g2])).unwrap();
        let classes: HashSet<GraphId> = out.subset().iter().copied().collect();
        let g3 = class_of(&e.repo, &path_graph(&["a", "a"], &["c"]));
        let g5 = class_of(&e.repo, &path_graph(&["a", "a", "a"], &["c", "c"]));
        (classes, g3, g5)
    };
    let (plain, _, g5) = run(|p| p.repeat());
    let (revived, g3r, g5r) = run(|p| p.revive().repeat());
    let (fast, time) = within(Duration::from_secs(1), start);
    let ok = plain == HashSet::from([g5]) && revived == HashSet::from([g3r, g5r]) && fast;
    outcome(ok, format!("repeat -> {} graph(s), repeat(revive) -> {} graph(s), {time}", plain.len(), revived.len()))
}

fn bfs_properties(inv: &mut Inversions) -> (bool, String) {
    let mut program = dsl::load_file(&assets().join("diels_bfs.gs"), EngineConfig::default()).unwrap();
    let Strategy::Sequence(steps) = program.main.clone() else { panic!("main is a sequence") };
    let Strategy::Repeat { inner, .. } = &steps[1] else { panic!("second step repeats") };
    let one = Strategy::Sequence(vec![steps[0].clone(), Strategy::Repeat { inner: inner.clone(), limit: Some(1) }]);
    program.engine.run(&one).unwrap();
    let engine = &mut program.engine;
    let ds = engine.derivations.derivations().to_vec();
    let mut ok = !ds.is_empty();
    for d in &ds {
        ok &= d.inputs.len() == 2 && d.is_proper();
        let Some(mapping) = d.atom_mapping() else {
            ok = false;
            continue;
        };
        let total: usize = d.inputs.iter().map(|&g| engine.repo.graph(g).vertex_count()).sum();
        let images: HashSet<_> = mapping.iter().map(|&(_, o)| o).collect();
        ok &= mapping.len() == total && images.len() == total;
        for (i, o) in mapping {
            ok &= engine.repo.graph(d.inputs[i.copy]).label(i.vertex) == engine.repo.graph(d.outputs[o.copy]).label(o.vertex);
        }
    }
    let before = inv.failed.len();
    inv.check_all("bfs n=1", &ds, &mut engine.repo);
    ok &= inv.failed.len() == before;
    (ok, format!("n=1 properties on {} derivations {}", ds.len(), if ok { "hold" } else { "violated" }))
}

fn diels_alder_bfs(inv: &mut Inversions) -> (Outcome, Option<Engine>) {
    let start = Instant::now();
    let (report, program) = dsl::run_script(&assets().join("diels_bfs.gs"), &RunOptions::default()).unwrap();
    let (fast, time) = within(Duration::from_secs(60), start);
    let mut engine = program.engine;
    let counts = (report.stats.new_graphs, report.stats.derivations);
    let ds = engine.derivations.derivations().to_vec();
    inv.check_all("bfs n=4", &ds, &mut engine.repo);
    let (props, props_detail) = bfs_properties(inv);
    let ok = counts == (825, 1278) && fast && props;
    (outcome(ok, format!("{} new graphs / {} derivations (target 825 / 1278), {props_detail}, {time}", counts.0, counts.1)), Some(engine))
}

fn diels_alder_subspace(inv: &mut Inversions) -> Outcome {
    let mut program = dsl::load_file(&assets().join("diels_subspace.gs"), EngineConfig::default()).unwrap();
    let iso = program.graphs["isoprene"];
    let chd = program.graphs["cyclohexadiene"];
    let Strategy::Sequence(steps) = program.main.clone() else { panic!("main is a sequence") };
    let engine = &mut program.engine;
    let state = engine.run(&Strategy::Sequence(steps[..3].to_vec())).unwrap();
    let first_step = engine.derivations.len();
    engine.evaluate(&Strategy::Sequence(steps[3..].to_vec()), state).unwrap();
    let stats = engine.stats();
    let ds = engine.derivations.derivations().to_vec();

    let mut chd_ok = first_step > 0;
    let mut provenance_ok = true;
    let mut known: HashSet<GraphId> = HashSet::from([iso]);
    for (i, d) in ds.iter().enumerate() {
        let uses_chd = d.inputs.contains(&chd) || d.outputs.contains(&chd);
        chd_ok &= uses_chd == (i < first_step);
        provenance_ok &= d.inputs.iter().all(|g| known.contains(g) || (i < first_step && *g == chd));
        provenance_ok &= d.inputs.contains(&iso) || d.inputs.iter().any(|g| *g != chd && known.contains(g) && *g != iso);
        known.extend(d.outputs.iter().copied());
    }
    inv.check_all("subspace", &ds, &mut engine.repo);
    let counts = (stats.new_graphs, stats.derivations);
    let ok = counts == (165, 236) && chd_ok && provenance_ok;
    outcome(
        ok,
        format!(
            "{} new graphs / {} derivations (target 165 / 236), cyclohexadiene only in the {first_step} first-step derivations: {chd_ok}, provenance: {provenance_ok}",
            counts.0, counts.1
        ),
    )
}

fn partial_binding(inv: &mut Inversions) -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(50);
    let mut discrepancies = 0;
    let mut derivations = 0;
    for i in 0..50 {
        let mut repo = GraphRepository::new();
        let universe: Vec<GraphId> = (0..rng.gen_range(1..=4))
            .map(|_| {
                let n = rng.gen_range(1..=6);
                repo.intern(random_connected(&mut rng, n, 0.4, &["a", "b"], &["x", "y"])).unwrap().id
            })
            .collect();
        let mut required: Vec<GraphId> = universe.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        if required.is_empty() {
            required.push(universe[0]);
        }
        let rule = random_rule(&mut rng, &format!("r{i}"));
        let compiled = Arc::new(CompiledRule::new(rule.clone()).unwrap());
        let query = DerivationQuery { universe: &universe, required: &required, max_components: compiled.components().len() };
        let found = enumerate_proper_derivations(&compiled, &query, &mut repo, &mut EmbeddingCache::new(), &mut |_, _, _| true);
        let engine: BTreeSet<NaiveKey> = found.iter().map(|d| (d.input_multiset(), d.output_multiset())).collect();
        let naive = naive_derivations(&rule, &universe, &required, &mut repo);
        discrepancies += engine.symmetric_difference(&naive).count() + (found.len() - engine.len());
        derivations += naive.len();
        inv.check_all("partial binding", &found, &mut repo);
    }
    let (fast, time) = within(Duration::from_secs(30), start);
    outcome(discrepancies == 0 && fast, format!("50 instances, {derivations} derivations, {discrepancies} discrepancies, {time}"))
}

/// The one-move successors from the pipeline, keeping the engine for inversion checks.
fn pipeline_step(g: &LabeledGraph, rules: &CatalanRules, inv: &mut Inversions) -> Vec<LabeledGraph> {
    let mut engine = Engine::default();
    let id = engine.add_graph(g.clone(), None).unwrap();
    let state = engine.run(&Strategy::AddSubset(vec![id]).then(rules.step().alt_rule_app())).unwrap();
    let out = state.subset().iter().map(|&h| engine.repo.graph(h).clone()).collect();
    let ds = engine.derivations.derivations().to_vec();
    inv.check_all("catalan step", &ds, &mut engine.repo);
    out
}

fn catalan_oracle(inv: &mut Inversions) -> Outcome {
    let start = Instant::now();
    let rules = CatalanRules::new();
    let mut graphs: Vec<LabeledGraph> = (1..=7).flat_map(connected_graphs).collect();
    let exhaustive = graphs.len();
    let mut rng = StdRng::seed_from_u64(5);
    for _ in 0..200 {
        let n = rng.gen_range(4..=10);
        let p = rng.gen_range(0.15..0.5);
        graphs.push(random_level(&mut rng, n, p));
    }
    let mut discrepancies = 0;
    for g in &graphs {
        if !same_classes(&pipeline_step(g, &rules, inv), &oracle_successors(g)) {
            discrepancies += 1;
        }
    }
    let (fast, time) = within(Duration::from_secs(300), start);
    outcome(
        discrepancies == 0 && fast && exhaustive == 1 + 1 + 2 + 6 + 21 + 112 + 853,
        format!("{exhaustive} exhaustive + 200 random graphs, {discrepancies} discrepancies, {time}"),
    )
}

fn replay_valid(level: &LabeledGraph, states: &[GraphId], repo: &GraphRepository) -> bool {
    let Some(&first) = states.first() else { return false };
    let last = repo.graph(*states.last().unwrap());
    let steps_ok = states.windows(2).all(|w| {
        let (g, h) = (repo.graph(w[0]), repo.graph(w[1]));
        (0..g.vertex_count()).any(|v| oracle_move(g, v).is_some_and(|m| isomorphic(&m, h)))
    });
    isomorphic(repo.graph(first), level) && last.vertex_count() == 1 && steps_ok
}

fn catalan_solving(inv: &mut Inversions) -> Outcome {
    let config = EngineConfig::default();
    let k4 = path_graph(&["0"; 4], &[]);
    let mut k4 = k4;
    for (u, v) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
        k4.add_edge(u, v, "").unwrap();
    }
    let solve = solve_level(&CatalanLevel::new("k4", &k4).unwrap(), config).unwrap();
    let k4_ok = solve.moves() == Some(1);
    let mut c6 = path_graph(&["0"; 6], &[""; 5]);
    c6.add_edge(5, 0, "").unwrap();
    let c6_ok = solve_level(&CatalanLevel::new("c6", &c6).unwrap(), config).unwrap().moves().is_none();

    let mut rng = StdRng::seed_from_u64(6);
    let mut solved = 0;
    let mut valid = 0;
    let mut tried = 0;
    while solved < 20 {
        let n = [4, 7, 10][solved % 3];
        let p = rng.gen_range(0.2..0.45);
        let g = random_level(&mut rng, n, p);
        tried += 1;
        if !oracle_solvable(&g) {
            continue;
        }
        solved += 1;
        let mut solve = solve_level(&CatalanLevel::new("random", &g).unwrap(), config).unwrap();
        if solve.solution.as_ref().is_some_and(|s| replay_valid(&g, s, &solve.engine.repo)) {
            valid += 1;
        }
        let ds = solve.engine.derivations.derivations().to_vec();
        inv.check_all("catalan solve", &ds, &mut solve.engine.repo);
    }
    outcome(
        k4_ok && c6_ok && valid == 20,
        format!("K4 in one move: {k4_ok}, C6 unsolvable: {c6_ok}, {valid}/20 replay-valid solutions ({tried} levels drawn)"),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut scripts: Vec<PathBuf> = std::fs::read_dir(assets())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "gs"))
        .collect();
    scripts.sort();
    let mut differing = Vec::new();
    for script in &scripts {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let json = dir.path().join(format!("run{run}.json"));
            dsl::run_script(script, &RunOptions { json: Some(json.clone()), ..Default::default() }).unwrap();
            outputs.push(std::fs::read(&json).unwrap());
        }
        if outputs[0] != outputs[1] {
            differing.push(script.file_name().unwrap().to_string_lossy().into_owned());
        }
    }
    outcome(differing.is_empty() && !scripts.is_empty(), format!("{} scripts run twice, differing: {differing:?}", scripts.len()))
}

fn bucket_check(engine: &Engine) -> Outcome {
    let mut pairs = 0;
    let mut duplicates = 0;
    let buckets = engine.repo.buckets();
    for bucket in &buckets {
        for (i, &a) in bucket.iter().enumerate() {
            for &b in &bucket[i + 1..] {
                pairs += 1;
                if isomorphic(engine.repo.graph(a), engine.repo.graph(b)) {
                    duplicates += 1;
                }
            }
        }
    }
    outcome(
        duplicates == 0,
        format!("{} graphs in {} buckets, {pairs} pairs compared, {duplicates} duplicates", engine.repo.len(), buckets.len()),
    )
}

fn main() {
    let mut inv = Inversions::default();
    let mut results = Vec::new();
    results.push(("revive semantics", revive_semantics()));
    let (bfs, bfs_engine) = diels_alder_bfs(&mut inv);
    results.push(("Diels-Alder breadth-first expansion", bfs));
    results.push(("Diels-Alder subspace expansion", diels_alder_subspace(&mut inv)));
    results.push(("partial binding completeness", partial_binding(&mut inv)));
    results.push(("Catalan oracle equivalence", catalan_oracle(&mut inv)));
    results.push(("Catalan solving", catalan_solving(&mut inv)));
    let inversion = outcome(
        inv.failed.is_empty() && inv.checked > 0,
        format!("{} derivations inverted, {} failures {:?}", inv.checked, inv.failed.len(), inv.failed.iter().take(3).collect::<Vec<_>>()),
    );
    results.push(("inversion round trip", inversion));
    results.push(("deterministic exports", determinism()));
    results.push(("interning buckets hold no duplicates", bucket_check(bfs_engine.as_ref().unwrap())));

    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        println!("{} {}. {name}: {}", if o.ok { "PASS" } else { "FAIL" }, i + 1, o.detail);
        failed += usize::from(!o.ok);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
