//! Vertically partitioned triples: one k²-tree per predicate.
//!
//! Subject IDs index rows and object IDs index columns. Every tree shares the
//! same matrix side `|SO| + max(|S|, |O|)`, so coordinates are comparable
//! across predicates. IDs are 1-based, matrix coordinates 0-based.

use std::fmt;
use std::io::{Read, Write};
use std::ops::RangeInclusive;

use thiserror::Error;

use crate::dictionary::{Id, Sizes};
use crate::k2tree::{K2Tree, K2TreeError};
use crate::wire::{self, FormatError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IdTriple {
    pub s: Id,
    pub p: Id,
    pub o: Id,
}

impl IdTriple {
    pub fn new(s: Id, p: Id, o: Id) -> Self {
        IdTriple { s, p, o }
    }
}

impl fmt::Display for IdTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.s, self.p, self.o)
    }
}

impl From<(Id, Id, Id)> for IdTriple {
    fn from((s, p, o): (Id, Id, Id)) -> Self {
        IdTriple { s, p, o }
    }
}

/// One position of a triple pattern.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Slot {
    Bound(Id),
    Var(String),
}

impl Slot {
    pub fn var(name: impl Into<String>) -> Self {
        Slot::Var(name.into())
    }

    pub fn bound(&self) -> Option<Id> {
        match self {
            Slot::Bound(id) => Some(*id),
            Slot::Var(_) => None,
        }
    }

    pub fn var_name(&self) -> Option<&str> {
        match self {
            Slot::Var(name) => Some(name),
            Slot::Bound(_) => None,
        }
    }
}

impl From<Id> for Slot {
    fn from(id: Id) -> Self {
        Slot::Bound(id)
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Bound(id) => write!(f, "#{id}"),
            Slot::Var(name) => write!(f, "?{name}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TriplePattern {
    pub s: Slot,
    pub p: Slot,
    pub o: Slot,
}

impl TriplePattern {
    pub fn new(s: impl Into<Slot>, p: impl Into<Slot>, o: impl Into<Slot>) -> Self {
        TriplePattern {
            s: s.into(),
            p: p.into(),
            o: o.into(),
        }
    }

    pub fn form(&self) -> PatternForm {
        PatternForm::of(self.s.bound(), self.p.bound(), self.o.bound())
    }

    pub fn matches(&self, t: &IdTriple) -> bool {
        let ok = |slot: &Slot, v: Id| slot.bound().is_none_or(|b| b == v);
        ok(&self.s, t.s) && ok(&self.p, t.p) && ok(&self.o, t.o)
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.s, self.p, self.o)
    }
}

/// The eight bound/unbound combinations; `X` marks a variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatternForm {
    Spo,
    SpX,
    XpO,
    XpX,
    SxO,
    SxX,
    XxO,
    XxX,
}

impl PatternForm {
    pub const ALL: [PatternForm; 8] = [
        PatternForm::Spo,
        PatternForm::SpX,
        PatternForm::XpO,
        PatternForm::XpX,
        PatternForm::SxO,
        PatternForm::SxX,
        PatternForm::XxO,
        PatternForm::XxX,
    ];

    fn of(s: Option<Id>, p: Option<Id>, o: Option<Id>) -> Self {
        match (s.is_some(), p.is_some(), o.is_some()) {
            (true, true, true) => PatternForm::Spo,
            (true, true, false) => PatternForm::SpX,
            (false, true, true) => PatternForm::XpO,
            (false, true, false) => PatternForm::XpX,
            (true, false, true) => PatternForm::SxO,
            (true, false, false) => PatternForm::SxX,
            (false, false, true) => PatternForm::XxO,
            (false, false, false) => PatternForm::XxX,
        }
    }

    pub fn predicate_bound(self) -> bool {
        matches!(
            self,
            PatternForm::Spo | PatternForm::SpX | PatternForm::XpO | PatternForm::XpX
        )
    }
}

impl fmt::Display for PatternForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PatternForm::Spo => "(S,P,O)",
            PatternForm::SpX => "(S,P,?O)",
            PatternForm::XpO => "(?S,P,O)",
            PatternForm::XpX => "(?S,P,?O)",
            PatternForm::SxO => "(S,?P,O)",
            PatternForm::SxX => "(S,?P,?O)",
            PatternForm::XxO => "(?S,?P,O)",
            PatternForm::XxX => "(?S,?P,?O)",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StoreError {
    #[error("triple {triple} has an id outside its role range ({sizes:?})")]
    TripleOutOfRange { triple: IdTriple, sizes: Sizes },
    #[error("predicate id {id} is out of range, valid ids are 1..={max}")]
    PredicateOutOfRange { id: Id, max: Id },
    #[error(transparent)]
    Tree(#[from] K2TreeError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleStore {
    sizes: Sizes,
    k: u32,
    trees: Vec<K2Tree>,
}

pub const STORE_MAGIC: [u8; 4] = *b"K2TS";
pub const STORE_VERSION: u32 = 1;

impl TripleStore {
    /// Builds one tree per predicate. Predicates without triples get an
    /// empty tree; duplicate triples collapse.
    pub fn build(triples: &[IdTriple], sizes: Sizes, k: u32) -> Result<Self, StoreError> {
        let side = sizes.matrix_side();
        // Validates k before any work.
        crate::k2tree::matrix_side(side, k)?;
        let mut buckets: Vec<Vec<(u64, u64)>> = vec![Vec::new(); sizes.predicates as usize];
        for &t in triples {
            let in_range = (1..=sizes.max_subject()).contains(&t.s)
                && (1..=sizes.predicates).contains(&t.p)
                && (1..=sizes.max_object()).contains(&t.o);
            if !in_range {
                return Err(StoreError::TripleOutOfRange { triple: t, sizes });
            }
            buckets[(t.p - 1) as usize].push((t.s - 1, t.o - 1));
        }
        let trees = std::thread::scope(|scope| {
            let handles: Vec<_> = buckets
                .chunks(buckets.len().div_ceil(worker_count()).max(1))
                .map(|chunk| {
                    scope.spawn(move || {
                        chunk
                            .iter()
                            .map(|points| K2Tree::build(points, side, k))
                            .collect::<Result<Vec<_>, _>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("tree builder panicked"))
                .collect::<Result<Vec<_>, _>>()
        })?;
        Ok(TripleStore {
            sizes,
            k,
            trees: trees.into_iter().flatten().collect(),
        })
    }

    pub fn sizes(&self) -> Sizes {
        self.sizes
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn num_predicates(&self) -> u64 {
        self.sizes.predicates
    }

    pub fn trees(&self) -> &[K2Tree] {
        &self.trees
    }

    pub fn tree(&self, predicate: Id) -> Option<&K2Tree> {
        predicate
            .checked_sub(1)
            .and_then(|i| self.trees.get(i as usize))
    }

    pub fn num_triples(&self) -> u64 {
        self.trees.iter().map(K2Tree::ones).sum()
    }

    pub fn contains(&self, t: IdTriple) -> bool {
        self.subject_ok(t.s)
            && self.object_ok(t.o)
            && self
                .tree(t.p)
                .is_some_and(|tree| tree.contains_unchecked(t.s - 1, t.o - 1))
    }

    fn subject_ok(&self, s: Id) -> bool {
        (1..=self.sizes.max_subject()).contains(&s)
    }

    fn object_ok(&self, o: Id) -> bool {
        (1..=self.sizes.max_object()).contains(&o)
    }

    /// Resolves a triple pattern.
    ///
    /// Single-predicate results come in the order the tree produces them:
    /// objects ascending for `(S,P,?O)`, subjects ascending for `(?S,P,O)`,
    /// row-major for `(?S,P,?O)`. Unbounded predicates concatenate those
    /// per-tree streams by ascending predicate. A bound subject or object that
    /// is not a valid ID in its role yields an empty result.
    pub fn solve(&self, pattern: &TriplePattern) -> Result<Matches<'_>, StoreError> {
        let s = pattern.s.bound();
        let o = pattern.o.bound();
        let preds = match pattern.p.bound() {
            Some(p) if p == 0 || p > self.sizes.predicates => {
                return Err(StoreError::PredicateOutOfRange {
                    id: p,
                    max: self.sizes.predicates,
                })
            }
            Some(p) => p..=p,
            None => 1..=self.sizes.predicates,
        };
        let foreign = s.is_some_and(|s| !self.subject_ok(s)) || o.is_some_and(|o| !self.object_ok(o));
        Ok(Matches {
            store: self,
            s,
            o,
            preds: if foreign { empty_range() } else { preds },
            buf: Vec::new().into_iter(),
            touched: 0,
        })
    }

    /// Number of trees a pattern consults.
    pub fn tree_access_count(&self, pattern: &TriplePattern) -> Result<usize, StoreError> {
        let mut m = self.solve(pattern)?;
        m.by_ref().for_each(drop);
        Ok(m.trees_touched())
    }

    /// Every triple, predicate-major.
    pub fn triples(&self) -> Matches<'_> {
        self.solve(&TriplePattern::new(Slot::var("s"), Slot::var("p"), Slot::var("o")))
            .expect("unbounded pattern is always valid")
    }

    fn resolve_in(&self, p: Id, s: Option<Id>, o: Option<Id>) -> Vec<IdTriple> {
        let tree = &self.trees[(p - 1) as usize];
        match (s, o) {
            (Some(s), Some(o)) => {
                if tree.contains_unchecked(s - 1, o - 1) {
                    vec![IdTriple { s, p, o }]
                } else {
                    Vec::new()
                }
            }
            (Some(s), None) => tree
                .direct_unchecked(s - 1)
                .into_iter()
                .map(|c| IdTriple { s, p, o: c + 1 })
                .collect(),
            (None, Some(o)) => tree
                .reverse_unchecked(o - 1)
                .into_iter()
                .map(|r| IdTriple { s: r + 1, p, o })
                .collect(),
            (None, None) => tree
                .points()
                .into_iter()
                .map(|(r, c)| IdTriple { s: r + 1, p, o: c + 1 })
                .collect(),
        }
    }

    /// Objects of `s` under `p`, ascending. Both IDs must be valid.
    pub(crate) fn objects_of(&self, s: Id, p: Id) -> Vec<Id> {
        if !self.subject_ok(s) {
            return Vec::new();
        }
        let mut v = self.trees[(p - 1) as usize].direct_unchecked(s - 1);
        v.iter_mut().for_each(|c| *c += 1);
        v
    }

    /// Subjects of `o` under `p`, ascending.
    pub(crate) fn subjects_of(&self, o: Id, p: Id) -> Vec<Id> {
        if !self.object_ok(o) {
            return Vec::new();
        }
        let mut v = self.trees[(p - 1) as usize].reverse_unchecked(o - 1);
        v.iter_mut().for_each(|r| *r += 1);
        v
    }

    /// All `(s, o)` pairs of `p`, row-major.
    pub(crate) fn pairs_of(&self, p: Id) -> Vec<(Id, Id)> {
        self.trees[(p - 1) as usize]
            .points()
            .into_iter()
            .map(|(r, c)| (r + 1, c + 1))
            .collect()
    }

    /// Serialized size of the triples section: header plus all trees.
    pub fn serialized_len(&self) -> usize {
        4 + 4 + 4 * 8 + 2 + self.trees.iter().map(|t| 8 + t.serialized_len()).sum::<usize>()
    }

    /// Writes magic, version, sizes, `k` and every tree prefixed by its byte
    /// length. The dictionary, when present, follows in the same file.
    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(&STORE_MAGIC)?;
        wire::write_u32(w, STORE_VERSION)?;
        for v in [
            self.sizes.shared,
            self.sizes.subjects,
            self.sizes.objects,
            self.sizes.predicates,
        ] {
            wire::write_u64(w, v)?;
        }
        wire::write_u16(w, self.k as u16)?;
        for tree in &self.trees {
            wire::write_u64(w, tree.serialized_len() as u64)?;
            tree.write_to(w)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self, FormatError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if magic != STORE_MAGIC {
            return Err(FormatError::BadMagic {
                found: magic,
                expected: STORE_MAGIC,
            });
        }
        let version = wire::read_u32(r)?;
        if version != STORE_VERSION {
            return Err(FormatError::UnsupportedVersion(version));
        }
        let sizes = Sizes {
            shared: wire::read_u64(r)?,
            subjects: wire::read_u64(r)?,
            objects: wire::read_u64(r)?,
            predicates: wire::read_u64(r)?,
        };
        let k = u32::from(wire::read_u16(r)?);
        let (height, n) = crate::k2tree::matrix_side(sizes.matrix_side(), k)
            .map_err(|e| wire::corrupt(e.to_string()))?;
        let mut trees = Vec::new();
        for p in 1..=sizes.predicates {
            let len = wire::read_u64(r)?;
            let bytes = wire::read_bytes(r, len)?;
            let mut slice = bytes.as_slice();
            let tree = K2Tree::read_from(&mut slice)?;
            if !slice.is_empty() {
                return Err(wire::corrupt(format!("trailing bytes after tree {p}")));
            }
            if tree.k() != k || tree.n() != n || tree.height() != height {
                return Err(wire::corrupt(format!(
                    "tree {p} has k={} n={}, store expects k={k} n={n}",
                    tree.k(),
                    tree.n()
                )));
            }
            trees.push(tree);
        }
        Ok(TripleStore { sizes, k, trees })
    }
}

fn empty_range() -> RangeInclusive<Id> {
    #[allow(clippy::reversed_empty_ranges)]
    {
        1..=0
    }
}

fn worker_count() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Lazy pattern results. Each tree is consulted only when the stream
/// reaches its predicate.
#[derive(Debug)]
pub struct Matches<'a> {
    store: &'a TripleStore,
    s: Option<Id>,
    o: Option<Id>,
    preds: RangeInclusive<Id>,
    buf: std::vec::IntoIter<IdTriple>,
    touched: usize,
}

impl Matches<'_> {
    /// Trees consulted so far.
    pub fn trees_touched(&self) -> usize {
        self.touched
    }
}

impl Iterator for Matches<'_> {
    type Item = IdTriple;

    fn next(&mut self) -> Option<IdTriple> {
        loop {
            if let Some(t) = self.buf.next() {
                return Some(t);
            }
            let p = self.preds.next()?;
            self.touched += 1;
            self.buf = self.store.resolve_in(p, self.s, self.o).into_iter();
        }
    }
}
