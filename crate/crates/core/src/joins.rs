//! Two-pattern conjunctive queries joined on one shared variable.
//!
//! Queries are classified by how much of each pattern is unbound:
//!
//! | category | predicates unbound | non-join subject/object variables |
//! |----------|--------------------|-----------------------------------|
//! | A        | 0                  | no                                |
//! | B        | 1                  | no                                |
//! | C        | 2                  | no                                |
//! | D        | 0                  | yes                               |
//! | E        | 1                  | yes                               |
//! | F        | 2                  | yes                               |
//!
//! A–C resolve each side to an ascending list of join values per predicate
//! and merge-intersect the lists. D–F resolve one side (the one whose other
//! position is a constant, if any) and substitute every join value it yields
//! into the other side. Subject and object IDs only denote the same term in
//! the shared range `1..=|SO|`, so subject–object joins discard candidates
//! above it.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::dictionary::Id;
use crate::triplestore::{Slot, StoreError, TriplePattern, TripleStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    SS,
    OO,
    SO,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::SS => "SS",
            Axis::OO => "OO",
            Axis::SO => "SO",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    A,
    B,
    C,
    D,
    E,
    F,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::A,
        Category::B,
        Category::C,
        Category::D,
        Category::E,
        Category::F,
    ];
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum JoinError {
    #[error("the patterns share no variable")]
    NoSharedVariable,
    #[error("the patterns share more than one variable: {}", .0.join(", "))]
    MultipleSharedVariables(Vec<String>),
    #[error("variable ?{0} appears twice in one pattern")]
    RepeatedVariable(String),
    #[error("shared variable ?{0} must be in subject or object position in both patterns")]
    JoinOnPredicate(String),
    #[error(transparent)]
    Store(#[from] StoreError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum End {
    Subject,
    Object,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinQuery {
    left: TriplePattern,
    right: TriplePattern,
    join_var: String,
    left_end: End,
    right_end: End,
}

fn vars(p: &TriplePattern) -> Vec<(&str, Option<End>)> {
    [
        (&p.s, Some(End::Subject)),
        (&p.p, None),
        (&p.o, Some(End::Object)),
    ]
    .into_iter()
    .filter_map(|(slot, end)| slot.var_name().map(|n| (n, end)))
    .collect()
}

impl JoinQuery {
    pub fn new(left: TriplePattern, right: TriplePattern) -> Result<Self, JoinError> {
        let lv = vars(&left);
        let rv = vars(&right);
        for v in [&lv, &rv] {
            for (i, (name, _)) in v.iter().enumerate() {
                if v[..i].iter().any(|(n, _)| n == name) {
                    return Err(JoinError::RepeatedVariable(name.to_string()));
                }
            }
        }
        let shared: Vec<_> = lv
            .iter()
            .filter_map(|&(name, le)| {
                rv.iter()
                    .find(|(n, _)| *n == name)
                    .map(|&(_, re)| (name, le, re))
            })
            .collect();
        let (name, le, re) = match shared.as_slice() {
            [] => return Err(JoinError::NoSharedVariable),
            [one] => *one,
            many => {
                return Err(JoinError::MultipleSharedVariables(
                    many.iter().map(|(n, _, _)| n.to_string()).collect(),
                ))
            }
        };
        let (Some(left_end), Some(right_end)) = (le, re) else {
            return Err(JoinError::JoinOnPredicate(name.to_string()));
        };
        Ok(JoinQuery {
            join_var: name.to_string(),
            left,
            right,
            left_end,
            right_end,
        })
    }

    pub fn left(&self) -> &TriplePattern {
        &self.left
    }

    pub fn right(&self) -> &TriplePattern {
        &self.right
    }

    pub fn join_var(&self) -> &str {
        &self.join_var
    }

    pub fn axis(&self) -> Axis {
        match (self.left_end, self.right_end) {
            (End::Subject, End::Subject) => Axis::SS,
            (End::Object, End::Object) => Axis::OO,
            _ => Axis::SO,
        }
    }

    pub fn category(&self) -> Category {
        let unbound_preds = [&self.left, &self.right]
            .iter()
            .filter(|p| p.p.bound().is_none())
            .count();
        let other_vars = self.side(true).other.var_name().is_some()
            || self.side(false).other.var_name().is_some();
        match (other_vars, unbound_preds) {
            (false, 0) => Category::A,
            (false, 1) => Category::B,
            (false, _) => Category::C,
            (true, 0) => Category::D,
            (true, 1) => Category::E,
            (true, _) => Category::F,
        }
    }

    /// Output columns: the join variable, then the remaining variables in
    /// pattern order.
    pub fn variables(&self) -> Vec<String> {
        let mut out = vec![self.join_var.clone()];
        for p in [&self.left, &self.right] {
            for (name, _) in vars(p) {
                if name != self.join_var {
                    out.push(name.to_string());
                }
            }
        }
        out
    }

    fn side(&self, left: bool) -> Side<'_> {
        let (pattern, end) = if left {
            (&self.left, self.left_end)
        } else {
            (&self.right, self.right_end)
        };
        Side {
            end,
            pred: &pattern.p,
            other: match end {
                End::Subject => &pattern.o,
                End::Object => &pattern.s,
            },
        }
    }
}

impl fmt::Display for JoinQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.left, self.right)
    }
}

/// Classifies a query into one of the six categories.
pub fn classify(query: &JoinQuery) -> Category {
    query.category()
}

/// Solution rows, sorted and free of duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BindingSet {
    pub vars: Vec<String>,
    pub rows: Vec<Vec<Id>>,
}

impl BindingSet {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Trees consulted by each side of a join.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct JoinStats {
    pub left_trees: usize,
    pub right_trees: usize,
}

impl JoinStats {
    pub fn total(&self) -> usize {
        self.left_trees + self.right_trees
    }
}

/// Strictly ascending intersection of two strictly ascending lists.
pub fn intersect_sorted(a: &[Id], b: &[Id]) -> Vec<Id> {
    debug_assert!(a.windows(2).all(|w| w[0] < w[1]), "left input not strictly ascending");
    debug_assert!(b.windows(2).all(|w| w[0] < w[1]), "right input not strictly ascending");
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

struct Side<'q> {
    end: End,
    pred: &'q Slot,
    other: &'q Slot,
}

/// Per-side access log, one flag per predicate.
struct Touched(Vec<bool>);

impl Touched {
    fn new(preds: u64) -> Self {
        Touched(vec![false; preds as usize])
    }

    fn mark(&mut self, p: Id) {
        self.0[(p - 1) as usize] = true;
    }

    fn count(&self) -> usize {
        self.0.iter().filter(|&&t| t).count()
    }
}

impl Side<'_> {
    fn predicates(&self, store: &TripleStore) -> Result<Vec<Id>, StoreError> {
        let max = store.num_predicates();
        match self.pred.bound() {
            Some(p) if p == 0 || p > max => Err(StoreError::PredicateOutOfRange { id: p, max }),
            Some(p) => Ok(vec![p]),
            None => Ok((1..=max).collect()),
        }
    }

    /// Join values for a constant other position, ascending.
    fn values(&self, store: &TripleStore, p: Id, other: Id, log: &mut Touched) -> Vec<Id> {
        log.mark(p);
        match self.end {
            End::Subject => store.subjects_of(other, p),
            End::Object => store.objects_of(other, p),
        }
    }

    /// `(join, other)` pairs for a variable other position, ascending.
    fn pairs(&self, store: &TripleStore, p: Id, log: &mut Touched) -> Vec<(Id, Id)> {
        log.mark(p);
        let pairs = store.pairs_of(p);
        match self.end {
            End::Subject => pairs,
            End::Object => {
                let mut swapped: Vec<_> = pairs.into_iter().map(|(s, o)| (o, s)).collect();
                swapped.sort_unstable();
                swapped
            }
        }
    }

    /// Values of the other position once the join variable is fixed to `x`.
    fn probe(&self, store: &TripleStore, p: Id, x: Id, log: &mut Touched) -> Vec<Id> {
        log.mark(p);
        match self.end {
            End::Subject => store.objects_of(x, p),
            End::Object => store.subjects_of(x, p),
        }
    }
}

/// Where each output column takes its value from.
#[derive(Clone, Copy)]
enum Source {
    Join,
    Pred(bool),
    Other(bool),
}

struct RowBuilder {
    sources: Vec<Source>,
    rows: Vec<Vec<Id>>,
}

/// Bindings of one side for one candidate row.
#[derive(Clone, Copy)]
struct SideBinding {
    pred: Id,
    other: Option<Id>,
}

impl RowBuilder {
    fn new(q: &JoinQuery) -> Self {
        let mut sources = vec![Source::Join];
        for (left, pattern) in [(true, &q.left), (false, &q.right)] {
            for (name, end) in vars(pattern) {
                if name == q.join_var {
                    continue;
                }
                sources.push(if end.is_some() {
                    Source::Other(left)
                } else {
                    Source::Pred(left)
                });
            }
        }
        RowBuilder {
            sources,
            rows: Vec::new(),
        }
    }

    fn emit(&mut self, x: Id, left: SideBinding, right: SideBinding) {
        let pick = |is_left: bool| if is_left { left } else { right };
        let row = self
            .sources
            .iter()
            .map(|src| match *src {
                Source::Join => x,
                Source::Pred(l) => pick(l).pred,
                Source::Other(l) => pick(l).other.expect("variable other position is bound"),
            })
            .collect();
        self.rows.push(row);
    }

    fn finish(mut self, vars: Vec<String>) -> BindingSet {
        self.rows.sort_unstable();
        self.rows.dedup();
        BindingSet {
            vars,
            rows: self.rows,
        }
    }
}

pub fn execute(store: &TripleStore, query: &JoinQuery) -> Result<BindingSet, JoinError> {
    execute_with_stats(store, query).map(|(rows, _)| rows)
}

/// Runs the category algorithm and reports how many trees each side read.
pub fn execute_with_stats(
    store: &TripleStore,
    query: &JoinQuery,
) -> Result<(BindingSet, JoinStats), JoinError> {
    let left = query.side(true);
    let right = query.side(false);
    let left_preds = left.predicates(store)?;
    let right_preds = right.predicates(store)?;
    let limit = match query.axis() {
        Axis::SO => store.sizes().shared,
        _ => Id::MAX,
    };
    let clip = |mut v: Vec<Id>| {
        v.truncate(v.partition_point(|&x| x <= limit));
        v
    };
    let mut logs = [
        Touched::new(store.num_predicates()),
        Touched::new(store.num_predicates()),
    ];
    let mut out = RowBuilder::new(query);

    match (left.other.bound(), right.other.bound()) {
        // A, B, C: merge-intersect per predicate pair.
        (Some(lo), Some(ro)) => {
            let lists = |side: &Side, other, preds: &[Id], log: &mut Touched| {
                preds
                    .iter()
                    .map(|&p| (p, clip(side.values(store, p, other, log))))
                    .filter(|(_, v)| !v.is_empty())
                    .collect::<Vec<_>>()
            };
            let [ll, rl] = &mut logs;
            let left_lists = lists(&left, lo, &left_preds, ll);
            let right_lists = lists(&right, ro, &right_preds, rl);
            for (lp, lv) in &left_lists {
                for (rp, rv) in &right_lists {
                    for x in intersect_sorted(lv, rv) {
                        out.emit(
                            x,
                            SideBinding { pred: *lp, other: None },
                            SideBinding { pred: *rp, other: None },
                        );
                    }
                }
            }
        }
        // D, E, F: seed one side, substitute into the other.
        (lo, ro) => {
            let seed_left = match (lo, ro) {
                (Some(_), None) => true,
                (None, Some(_)) => false,
                _ => left.pred.bound().is_some() || right.pred.bound().is_none(),
            };
            let (seed, probe, seed_preds, probe_preds) = if seed_left {
                (&left, &right, &left_preds, &right_preds)
            } else {
                (&right, &left, &right_preds, &left_preds)
            };
            let (seed_log, probe_log) = {
                let [a, b] = &mut logs;
                if seed_left {
                    (a, b)
                } else {
                    (b, a)
                }
            };
            // Probe results only depend on (predicate, join value).
            let mut probe_cache: BTreeMap<(Id, Id), Vec<Id>> = BTreeMap::new();
            for &sp in seed_preds {
                let candidates: Vec<(Id, Option<Id>)> = match seed.other.bound() {
                    Some(other) => clip(seed.values(store, sp, other, seed_log))
                        .into_iter()
                        .map(|x| (x, None))
                        .collect(),
                    None => seed
                        .pairs(store, sp, seed_log)
                        .into_iter()
                        .filter(|&(x, _)| x <= limit)
                        .map(|(x, y)| (x, Some(y)))
                        .collect(),
                };
                for group in candidates.chunk_by(|a, b| a.0 == b.0) {
                    let x = group[0].0;
                    for &pp in probe_preds {
                        let others = probe_cache
                            .entry((pp, x))
                            .or_insert_with(|| probe.probe(store, pp, x, probe_log));
                        for &(_, seed_other) in group {
                            for &po in others.iter() {
                                let s = SideBinding { pred: sp, other: seed_other };
                                let p = SideBinding { pred: pp, other: Some(po) };
                                if seed_left {
                                    out.emit(x, s, p);
                                } else {
                                    out.emit(x, p, s);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    let stats = JoinStats {
        left_trees: logs[0].count(),
        right_trees: logs[1].count(),
    };
    Ok((out.finish(query.variables()), stats))
}
