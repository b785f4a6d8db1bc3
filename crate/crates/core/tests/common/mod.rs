#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;

use k2triples::{Dataset, Id, IdTriple, ParseMode, PatternForm, Sizes, Slot, TriplePattern, TripleStore};
use rand::distributions::{Distribution, WeightedIndex};
use rand::rngs::StdRng;
use rand::Rng;

pub fn example_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/example.nt")
}

pub fn example_dataset(k: u32) -> Dataset {
    let (ds, errors) = Dataset::build_from_path(example_path(), k, ParseMode::Strict).unwrap();
    assert!(errors.is_empty());
    ds
}

pub fn sizes(shared: u64, subjects: u64, objects: u64, predicates: u64) -> Sizes {
    Sizes {
        shared,
        subjects,
        objects,
        predicates,
    }
}

/// Up to `count` distinct triples. Subjects and objects are drawn from a
/// Zipf-like distribution so terms are reused and joins find matches.
pub fn random_triples(rng: &mut StdRng, sz: Sizes, count: usize) -> Vec<IdTriple> {
    let zipf = |n: u64| WeightedIndex::new((1..=n).map(|i| 1.0 / (i as f64).powf(0.8))).unwrap();
    let subj = zipf(sz.max_subject());
    let obj = zipf(sz.max_object());
    // Shuffle ranks onto IDs so popularity does not follow ID order.
    let perm = |rng: &mut StdRng, n: u64| {
        let mut v: Vec<Id> = (1..=n).collect();
        for i in (1..v.len()).rev() {
            v.swap(i, rng.gen_range(0..=i));
        }
        v
    };
    let sperm = perm(rng, sz.max_subject());
    let operm = perm(rng, sz.max_object());
    let mut set = BTreeSet::new();
    let mut attempts = 0;
    while set.len() < count && attempts < count * 20 {
        attempts += 1;
        set.insert(IdTriple::new(
            sperm[subj.sample(rng)],
            rng.gen_range(1..=sz.predicates),
            operm[obj.sample(rng)],
        ));
    }
    set.into_iter().collect()
}

pub fn random_store(rng: &mut StdRng, sz: Sizes, count: usize, k: u32) -> (TripleStore, Vec<IdTriple>) {
    let triples = random_triples(rng, sz, count);
    (TripleStore::build(&triples, sz, k).unwrap(), triples)
}

/// Linear scan in declared order: predicate-major, then subject, then object.
pub fn pattern_oracle(triples: &[IdTriple], pattern: &TriplePattern) -> Vec<IdTriple> {
    let mut out: Vec<IdTriple> = triples.iter().copied().filter(|t| pattern.matches(t)).collect();
    out.sort_by_key(|t| (t.p, t.s, t.o));
    out
}

/// A pattern of the given form; bound positions come from a stored triple
/// half of the time and are uniform over the role's range otherwise.
pub fn random_pattern(rng: &mut StdRng, form: PatternForm, sz: Sizes, triples: &[IdTriple]) -> TriplePattern {
    let base = if !triples.is_empty() && rng.gen_bool(0.5) {
        triples[rng.gen_range(0..triples.len())]
    } else {
        IdTriple::new(
            rng.gen_range(1..=sz.max_subject().max(1)),
            rng.gen_range(1..=sz.predicates.max(1)),
            rng.gen_range(1..=sz.max_object().max(1)),
        )
    };
    let (s, p, o) = match form {
        PatternForm::Spo => (true, true, true),
        PatternForm::SpX => (true, true, false),
        PatternForm::XpO => (false, true, true),
        PatternForm::XpX => (false, true, false),
        PatternForm::SxO => (true, false, true),
        PatternForm::SxX => (true, false, false),
        PatternForm::XxO => (false, false, true),
        PatternForm::XxX => (false, false, false),
    };
    let slot = |bound: bool, v: Id, name: &str| if bound { Slot::Bound(v) } else { Slot::var(name) };
    TriplePattern::new(slot(s, base.s, "s"), slot(p, base.p, "p"), slot(o, base.o, "o"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pos {
    S,
    O,
}

fn at(t: &IdTriple, pos: Pos) -> Id {
    match pos {
        Pos::S => t.s,
        Pos::O => t.o,
    }
}

/// Nested-loop join of the two patterns' matches on every shared variable.
/// Subject and object IDs are the same term only inside `1..=|SO|`.
/// Columns: the shared variable, then the other variables in pattern order.
pub fn join_oracle(
    triples: &[IdTriple],
    sz: Sizes,
    left: &TriplePattern,
    right: &TriplePattern,
) -> (Vec<String>, Vec<Vec<Id>>) {
    let positions = |p: &TriplePattern| -> Vec<(String, char)> {
        [(&p.s, 's'), (&p.p, 'p'), (&p.o, 'o')]
            .into_iter()
            .filter_map(|(slot, c)| slot.var_name().map(|n| (n.to_string(), c)))
            .collect()
    };
    let lv = positions(left);
    let rv = positions(right);
    let shared: Vec<_> = lv.iter().filter(|(n, _)| rv.iter().any(|(m, _)| m == n)).collect();
    assert_eq!(shared.len(), 1);
    let join = shared[0].0.clone();
    let mut vars = vec![join.clone()];
    for (n, _) in lv.iter().chain(rv.iter()) {
        if *n != join {
            vars.push(n.clone());
        }
    }
    let value = |t: &IdTriple, c: char| match c {
        's' => t.s,
        'p' => t.p,
        _ => t.o,
    };
    let lj = lv.iter().find(|(n, _)| *n == join).unwrap().1;
    let rj = rv.iter().find(|(n, _)| *n == join).unwrap().1;
    let cross_role = (lj == 's') != (rj == 's');
    let lm: Vec<_> = triples.iter().filter(|t| left.matches(t)).collect();
    let rm: Vec<_> = triples.iter().filter(|t| right.matches(t)).collect();
    let mut rows = BTreeSet::new();
    for a in &lm {
        for b in &rm {
            let x = value(a, lj);
            if x != value(b, rj) || (cross_role && x > sz.shared) {
                continue;
            }
            let mut bind: HashMap<&str, Id> = HashMap::new();
            for (n, c) in &lv {
                bind.insert(n, value(a, *c));
            }
            for (n, c) in &rv {
                bind.insert(n, value(b, *c));
            }
            rows.insert(vars.iter().map(|v| bind[v.as_str()]).collect::<Vec<_>>());
        }
    }
    (vars, rows.into_iter().collect())
}

pub use k2triples::joins::{Axis, Category};

/// Builds a join query of the requested category and axis. Constants are
/// taken from two triples that share the join value whenever such a pair
/// exists, so most queries have answers.
pub fn random_join(
    rng: &mut StdRng,
    category: Category,
    axis: Axis,
    sz: Sizes,
    triples: &[IdTriple],
    by_s: &HashMap<Id, Vec<IdTriple>>,
    by_o: &HashMap<Id, Vec<IdTriple>>,
) -> (TriplePattern, TriplePattern) {
    let (le, re) = match axis {
        Axis::SS => (Pos::S, Pos::S),
        Axis::OO => (Pos::O, Pos::O),
        Axis::SO => {
            if rng.gen_bool(0.5) {
                (Pos::S, Pos::O)
            } else {
                (Pos::O, Pos::S)
            }
        }
    };
    let mut pair = None;
    for _ in 0..200 {
        let t1 = triples[rng.gen_range(0..triples.len())];
        let x = at(&t1, le);
        if axis == Axis::SO && x > sz.shared {
            continue;
        }
        let index = if re == Pos::S { by_s } else { by_o };
        if let Some(cands) = index.get(&x) {
            pair = Some((t1, cands[rng.gen_range(0..cands.len())]));
            break;
        }
    }
    let (t1, t2) = pair.unwrap_or_else(|| {
        (
            triples[rng.gen_range(0..triples.len())],
            triples[rng.gen_range(0..triples.len())],
        )
    });
    let (pl, pr) = match category {
        Category::A | Category::D => (true, true),
        Category::B | Category::E => {
            if rng.gen_bool(0.5) {
                (true, false)
            } else {
                (false, true)
            }
        }
        Category::C | Category::F => (false, false),
    };
    let (ol, or) = match category {
        Category::A | Category::B | Category::C => (true, true),
        _ => match rng.gen_range(0..3) {
            0 => (true, false),
            1 => (false, true),
            _ => (false, false),
        },
    };
    let make = |t: IdTriple, end: Pos, pred_bound: bool, other_bound: bool, pvar: &str, ovar: &str| {
        let p = if pred_bound { Slot::Bound(t.p) } else { Slot::var(pvar) };
        let other = |v: Id| if other_bound { Slot::Bound(v) } else { Slot::var(ovar) };
        match end {
            Pos::S => TriplePattern::new(Slot::var("X"), p, other(t.o)),
            Pos::O => TriplePattern::new(other(t.s), p, Slot::var("X")),
        }
    };
    (
        make(t1, le, pl, ol, "P1", "Y"),
        make(t2, re, pr, or, "P2", "Z"),
    )
}

pub fn index_by(triples: &[IdTriple], pos: Pos) -> HashMap<Id, Vec<IdTriple>> {
    let mut map: HashMap<Id, Vec<IdTriple>> = HashMap::new();
    for t in triples {
        map.entry(at(t, pos)).or_default().push(*t);
    }
    map
}
