//! A dictionary plus its triple store, and the file that holds both.
//!
//! File layout: the triple-store section (magic `K2TS`, version, partition
//! sizes, `k`, length-prefixed trees) immediately followed by the dictionary
//! section. All integers little-endian.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::dictionary::{DictionaryBuilder, Id, Role, TermDictionary};
use crate::ingest::{self, IngestError, LineError, NTriplesReader, ParseMode, RawTriple, ReadError};
use crate::joins::{self, BindingSet, JoinError, JoinQuery};
use crate::query::{parse_pattern, resolve_pattern, PatternSyntaxError, Resolved};
use crate::triplestore::{IdTriple, StoreError, TriplePattern, TripleStore};
use crate::wire::{self, FormatError};

#[derive(Debug, Error)]
pub enum BuildError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

#[derive(Debug, Error)]
pub enum QueryError {
    #[error(transparent)]
    Syntax(#[from] PatternSyntaxError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Join(#[from] JoinError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    dict: TermDictionary,
    store: TripleStore,
}

/// Result of a textual pattern query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternAnswer {
    pub triples: Vec<IdTriple>,
    /// Set when a term is absent from the dictionary in the role its
    /// position requires.
    pub unknown_term: Option<(String, Role)>,
}

/// Result of a textual join query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinAnswer {
    pub bindings: BindingSet,
    pub query: Option<JoinQuery>,
    pub unknown_term: Option<(String, Role)>,
}

impl Dataset {
    pub fn new(dict: TermDictionary, store: TripleStore) -> Self {
        assert_eq!(dict.sizes(), store.sizes(), "dictionary and store disagree");
        Dataset { dict, store }
    }

    /// Builds from parsed triples; exact duplicates are dropped.
    pub fn from_triples<I>(triples: I, k: u32) -> Result<Self, StoreError>
    where
        I: IntoIterator<Item = RawTriple>,
    {
        let unique: Vec<_> = ingest::deduplicate(triples)
            .map(|t| (t.subject.to_string(), t.predicate.to_string(), t.object.to_string()))
            .collect();
        let dict = TermDictionary::build(unique.iter().map(|(s, p, o)| (s.as_str(), p.as_str(), o.as_str())));
        let ids: Vec<IdTriple> = unique
            .iter()
            .map(|(s, p, o)| dict.encode(s, p, o).expect("every term was registered").into())
            .collect();
        let store = TripleStore::build(&ids, dict.sizes(), k)?;
        Ok(Dataset { dict, store })
    }

    /// Parses N-Triples text held in memory.
    pub fn from_ntriples<R: std::io::BufRead>(
        input: R,
        k: u32,
        mode: ParseMode,
    ) -> Result<(Self, Vec<LineError>), BuildError> {
        let (triples, errors) = ingest::parse_ntriples(input, mode)?;
        Ok((Dataset::from_triples(triples, k)?, errors))
    }

    /// Builds from an N-Triples file in two streaming passes: the first
    /// classifies term roles, the second encodes triples as IDs.
    pub fn build_from_path(
        path: impl AsRef<Path>,
        k: u32,
        mode: ParseMode,
    ) -> Result<(Self, Vec<LineError>), BuildError> {
        let path = path.as_ref();
        let open = || -> Result<_, IngestError> {
            Ok(NTriplesReader::new(BufReader::new(File::open(path)?)))
        };
        let mut builder = DictionaryBuilder::new();
        let mut errors = Vec::new();
        for item in open()? {
            match item {
                Ok(t) => builder.add(&t.subject.to_string(), &t.predicate.to_string(), &t.object.to_string()),
                Err(ReadError::Io(e)) => return Err(IngestError::Io(e).into()),
                Err(ReadError::Line(e)) if mode == ParseMode::Strict => {
                    return Err(IngestError::Syntax(e).into())
                }
                Err(ReadError::Line(e)) => errors.push(e),
            }
        }
        let dict = builder.finish();
        let mut ids = Vec::new();
        for item in open()? {
            match item {
                Ok(t) => {
                    let encoded = dict.encode(
                        &t.subject.to_string(),
                        &t.predicate.to_string(),
                        &t.object.to_string(),
                    );
                    ids.push(IdTriple::from(encoded.expect("term registered in first pass")));
                }
                Err(ReadError::Io(e)) => return Err(IngestError::Io(e).into()),
                Err(ReadError::Line(_)) => {}
            }
        }
        ids.sort_unstable();
        ids.dedup();
        let store = TripleStore::build(&ids, dict.sizes(), k)?;
        Ok((Dataset { dict, store }, errors))
    }

    pub fn dictionary(&self) -> &TermDictionary {
        &self.dict
    }

    pub fn store(&self) -> &TripleStore {
        &self.store
    }

    pub fn serialized_len(&self) -> usize {
        self.store.serialized_len() + self.dict.serialized_len()
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        self.store.write_to(w)?;
        self.dict.write_to(w)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(self.serialized_len());
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    /// Reads a complete file; trailing bytes are rejected.
    pub fn read_from<R: Read>(r: &mut R) -> Result<Self, FormatError> {
        let store = TripleStore::read_from(r)?;
        let dict = TermDictionary::read_from(r)?;
        if dict.sizes() != store.sizes() {
            return Err(wire::corrupt(format!(
                "dictionary sizes {:?} do not match store sizes {:?}",
                dict.sizes(),
                store.sizes()
            )));
        }
        let mut extra = [0u8; 1];
        if r.read(&mut extra)? != 0 {
            return Err(wire::corrupt("trailing bytes after dictionary"));
        }
        Ok(Dataset { dict, store })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, FormatError> {
        let mut r = BufReader::new(File::open(path)?);
        Dataset::read_from(&mut r)
    }

    /// Term spelling of an ID in a role.
    pub fn term(&self, id: Id, role: Role) -> Option<&str> {
        self.dict.term_for(id, role).ok()
    }

    /// Triple in N-Triples syntax.
    pub fn render(&self, t: &IdTriple) -> Option<String> {
        Some(format!(
            "{} {} {} .",
            self.term(t.s, Role::Subject)?,
            self.term(t.p, Role::Predicate)?,
            self.term(t.o, Role::Object)?
        ))
    }

    pub fn solve(&self, pattern: &TriplePattern) -> Result<Vec<IdTriple>, StoreError> {
        Ok(self.store.solve(pattern)?.collect())
    }

    /// Runs a textual pattern such as `(?s, <http://p>, #3)`.
    pub fn query(&self, text: &str) -> Result<PatternAnswer, QueryError> {
        let items = parse_pattern(text)?;
        match resolve_pattern(&self.dict, &items) {
            Resolved::Pattern(p) => Ok(PatternAnswer {
                triples: self.solve(&p)?,
                unknown_term: None,
            }),
            Resolved::UnknownTerm { term, role } => Ok(PatternAnswer {
                triples: Vec::new(),
                unknown_term: Some((term, role)),
            }),
        }
    }

    /// Runs a join of two textual patterns.
    pub fn join(&self, left: &str, right: &str) -> Result<JoinAnswer, QueryError> {
        let (li, ri) = (parse_pattern(left)?, parse_pattern(right)?);
        let (l, r) = match (resolve_pattern(&self.dict, &li), resolve_pattern(&self.dict, &ri)) {
            (Resolved::Pattern(l), Resolved::Pattern(r)) => (l, r),
            (Resolved::UnknownTerm { term, role }, _) | (_, Resolved::UnknownTerm { term, role }) => {
                // Variables still come from the text so the header stays
                // meaningful.
                let var_only = |items: &[crate::query::PatternItem; 3]| {
                    let slot = |i: &crate::query::PatternItem| match i {
                        crate::query::PatternItem::Var(n) => crate::triplestore::Slot::Var(n.clone()),
                        _ => crate::triplestore::Slot::Bound(1),
                    };
                    TriplePattern {
                        s: slot(&items[0]),
                        p: slot(&items[1]),
                        o: slot(&items[2]),
                    }
                };
                let query = JoinQuery::new(var_only(&li), var_only(&ri))?;
                return Ok(JoinAnswer {
                    bindings: BindingSet {
                        vars: query.variables(),
                        rows: Vec::new(),
                    },
                    query: Some(query),
                    unknown_term: Some((term, role)),
                });
            }
        };
        let query = JoinQuery::new(l, r)?;
        let bindings = joins::execute(&self.store, &query)?;
        Ok(JoinAnswer {
            bindings,
            query: Some(query),
            unknown_term: None,
        })
    }

    /// Role of each output column of a join, for rendering IDs as terms.
    pub fn join_roles(query: &JoinQuery) -> Vec<Role> {
        let role_of = |name: &str| {
            for p in [query.left(), query.right()] {
                if p.s.var_name() == Some(name) {
                    return Role::Subject;
                }
                if p.p.var_name() == Some(name) {
                    return Role::Predicate;
                }
                if p.o.var_name() == Some(name) {
                    return Role::Object;
                }
            }
            unreachable!("variable {name} comes from the query")
        };
        query.variables().iter().map(|v| role_of(v)).collect()
    }
}
