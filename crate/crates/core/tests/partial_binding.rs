mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use common::{inverse_recovers_inputs, naive_derivations, random_connected, random_rule};
use gstrat::dpo::{enumerate_proper_derivations, DerivationQuery, EmbeddingCache};
use gstrat::repository::{GraphId, GraphRepository};
use gstrat::rule::CompiledRule;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[test]
fn partial_binding_matches_naive_enumeration() {
    let mut rng = StdRng::seed_from_u64(2024);
    let mut nonempty = 0;
    for i in 0..60 {
        let mut repo = GraphRepository::new();
        let universe: Vec<GraphId> = (0..rng.gen_range(1..=4))
            .map(|_| {
                let n = rng.gen_range(1..=6);
                repo.intern(random_connected(&mut rng, n, 0.4, &["a", "b"], &["x", "y"])).unwrap().id
            })
            .collect();
        let required: Vec<GraphId> = universe.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        let required = if required.is_empty() { vec![universe[0]] } else { required };
        let rule = random_rule(&mut rng, &format!("r{i}"));
        let compiled = Arc::new(CompiledRule::new(rule.clone()).unwrap());
        let query = DerivationQuery { universe: &universe, required: &required, max_components: compiled.components().len() };
        let found = enumerate_proper_derivations(&compiled, &query, &mut repo, &mut EmbeddingCache::new(), &mut |_, _, _| true);
        let engine: BTreeSet<_> = found.iter().map(|d| (d.input_multiset(), d.output_multiset())).collect();
        assert_eq!(engine.len(), found.len());
        let naive = naive_derivations(&rule, &universe, &required, &mut repo);
        assert_eq!(engine, naive, "instance {i}: {rule:?}");
        nonempty += usize::from(!naive.is_empty());

        let inverse = Arc::new(CompiledRule::new(rule.inverse()).unwrap());
        for d in &found {
            assert!(d.is_proper());
            assert!(inverse_recovers_inputs(d, &inverse, &mut repo), "instance {i}");
        }
    }
    assert!(nonempty >= 20, "only {nonempty} instances had derivations");
}
