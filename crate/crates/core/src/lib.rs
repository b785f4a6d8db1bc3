//! Compressed in-memory RDF store.
//!
//! Triples are split by predicate and each predicate's subject × object
//! matrix is held in a [`K2Tree`]. Terms are mapped to integers by a
//! [`TermDictionary`] whose subject and object ID spaces share a common
//! prefix, so subject–object joins compare plain IDs. Triple patterns are
//! answered straight from the trees, and two-pattern joins run on the
//! sorted lists the trees return.

pub mod bitseq;
pub mod dataset;
pub mod dictionary;
pub mod ingest;
pub mod joins;
pub mod k2tree;
pub mod query;
pub mod stats;
pub mod triplestore;
pub mod wire;

pub use bitseq::BitSeq;
pub use dataset::{Dataset, QueryError};
pub use dictionary::{Id, Role, Sizes, TermDictionary};
pub use ingest::{LineError, ParseMode, RawTriple, Term};
pub use joins::{Axis, BindingSet, Category, JoinQuery};
pub use k2tree::K2Tree;
pub use stats::StoreStats;
pub use triplestore::{IdTriple, PatternForm, Slot, StoreError, TriplePattern, TripleStore};
pub use wire::FormatError;
