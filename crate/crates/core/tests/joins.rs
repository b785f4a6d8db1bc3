mod common;

use common::*;
use k2triples::joins::{execute_with_stats, JoinQuery};
use k2triples::{Slot, TriplePattern};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn check_category_axis(seed: u64, k: u32) {
    let mut rng = StdRng::seed_from_u64(seed);
    let sz = sizes(rng.gen_range(20..80), rng.gen_range(5..40), rng.gen_range(5..40), rng.gen_range(2..9));
    let (store, triples) = random_store(&mut rng, sz, 1200, k);
    let by_s = index_by(&triples, Pos::S);
    let by_o = index_by(&triples, Pos::O);
    let np = store.num_predicates() as usize;
    for category in Category::ALL {
        for axis in [Axis::SS, Axis::OO, Axis::SO] {
            let mut nonempty = 0;
            for _ in 0..8 {
                let (left, right) = random_join(&mut rng, category, axis, sz, &triples, &by_s, &by_o);
                let query = JoinQuery::new(left.clone(), right.clone()).unwrap();
                assert_eq!(query.category(), category, "{left} {right}");
                assert_eq!(query.axis(), axis, "{left} {right}");
                let (got, stats) = execute_with_stats(&store, &query).unwrap();
                let (vars, rows) = join_oracle(&triples, sz, &left, &right);
                assert_eq!(got.vars, vars);
                assert_eq!(got.rows, rows, "{category} {axis}: {left} {right}");
                nonempty += usize::from(!rows.is_empty());
                let bound = match category {
                    Category::A | Category::D => 2,
                    Category::B | Category::E => np + 1,
                    Category::C | Category::F => 2 * np,
                };
                assert!(stats.total() <= bound, "{category}: {} > {bound}", stats.total());
            }
            assert!(nonempty > 0, "{category} {axis} never produced rows");
        }
    }
}

#[test]
fn random_joins_match_nested_loop_k2() {
    check_category_axis(1, 2);
}

#[test]
fn random_joins_match_nested_loop_k3() {
    check_category_axis(2, 3);
}

#[test]
fn random_joins_match_nested_loop_k4() {
    check_category_axis(3, 4);
}

#[test]
fn so_join_ignores_ids_outside_shared_range() {
    // Subject 3 and object 3 are different terms when |SO| = 2.
    let sz = sizes(2, 2, 2, 1);
    let triples = [(3, 1, 1), (1, 1, 3), (1, 1, 2), (2, 1, 1)].map(k2triples::IdTriple::from);
    let store = k2triples::TripleStore::build(&triples, sz, 2).unwrap();
    let left = TriplePattern::new(Slot::var("X"), 1, Slot::var("Y"));
    let right = TriplePattern::new(Slot::var("Z"), 1, Slot::var("X"));
    let query = JoinQuery::new(left.clone(), right.clone()).unwrap();
    let got = k2triples::joins::execute(&store, &query).unwrap();
    assert_eq!(got.rows, join_oracle(&triples, sz, &left, &right).1);
    assert!(got.rows.iter().all(|r| r[0] <= 2));
    assert!(!got.rows.is_empty());
}

#[test]
fn dataset_join_by_terms() {
    let ds = example_dataset(2);
    let answer = ds
        .join("(?x, <http://example.org/about>, ?y)", "(?x, <http://example.org/isA>, ?t)")
        .unwrap();
    assert_eq!(answer.bindings.vars, ["x", "y", "t"]);
    let roles = k2triples::Dataset::join_roles(answer.query.as_ref().unwrap());
    let rendered: Vec<Vec<&str>> = answer
        .bindings
        .rows
        .iter()
        .map(|r| r.iter().zip(&roles).map(|(&id, &role)| ds.term(id, role).unwrap()).collect())
        .collect();
    assert_eq!(
        rendered,
        [
            ["<http://example.org/wikipage2>", "\"Valladolid\"@es", "<http://example.org/Place>"],
            ["<http://example.org/wikipage1>", "<http://example.org/wikipage2>", "<http://example.org/Person>"],
        ]
    );
}
