//! Term dictionary with four ID partitions.
//!
//! Terms that occur both as subject and object form the shared partition and
//! take IDs `1..=|SO|` in both roles. Subject-only terms continue the subject
//! ID space at `|SO| + 1`, object-only terms continue the object ID space at
//! `|SO| + 1`, so those two ranges overlap and are told apart by role.
//! Predicates have their own space `1..=|P|`. Inside a partition IDs follow
//! ascending byte order of the term's N-Triples spelling.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{Read, Write};

use thiserror::Error;

use crate::wire::{self, FormatError};

pub type Id = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Subject,
    Predicate,
    Object,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Subject => "subject",
            Role::Predicate => "predicate",
            Role::Object => "object",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DictionaryError {
    #[error("{role} id {id} is out of range, valid ids are 1..={max}")]
    IdOutOfRange { id: Id, role: Role, max: Id },
}

/// Partition sizes `(|SO|, |S|, |O|, |P|)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Sizes {
    pub shared: u64,
    pub subjects: u64,
    pub objects: u64,
    pub predicates: u64,
}

impl Sizes {
    pub fn max_subject(&self) -> Id {
        self.shared + self.subjects
    }

    pub fn max_object(&self) -> Id {
        self.shared + self.objects
    }

    pub fn max_id(&self, role: Role) -> Id {
        match role {
            Role::Subject => self.max_subject(),
            Role::Object => self.max_object(),
            Role::Predicate => self.predicates,
        }
    }

    /// Logical side of the subject × object matrix.
    pub fn matrix_side(&self) -> u64 {
        self.shared + self.subjects.max(self.objects)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TermDictionary {
    shared: Vec<String>,
    subjects: Vec<String>,
    objects: Vec<String>,
    predicates: Vec<String>,
}

/// Collects term roles; the first of the two passes over the input.
#[derive(Debug, Default)]
pub struct DictionaryBuilder {
    subjects: BTreeSet<String>,
    objects: BTreeSet<String>,
    predicates: BTreeSet<String>,
}

impl DictionaryBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, subject: &str, predicate: &str, object: &str) {
        insert(&mut self.subjects, subject);
        insert(&mut self.predicates, predicate);
        insert(&mut self.objects, object);
    }

    pub fn finish(self) -> TermDictionary {
        let DictionaryBuilder {
            subjects,
            objects,
            predicates,
        } = self;
        let mut shared = Vec::new();
        let mut s_only = Vec::new();
        for s in subjects {
            if objects.contains(&s) {
                shared.push(s);
            } else {
                s_only.push(s);
            }
        }
        let o_only = objects
            .into_iter()
            .filter(|o| shared.binary_search(o).is_err())
            .collect();
        TermDictionary {
            shared,
            subjects: s_only,
            objects: o_only,
            predicates: predicates.into_iter().collect(),
        }
    }
}

fn insert(set: &mut BTreeSet<String>, term: &str) {
    if !set.contains(term) {
        set.insert(term.to_owned());
    }
}

impl TermDictionary {
    /// Builds the dictionary from term triples given in N-Triples spelling.
    pub fn build<'a, I>(triples: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a str, &'a str)>,
    {
        let mut builder = DictionaryBuilder::new();
        for (s, p, o) in triples {
            builder.add(s, p, o);
        }
        builder.finish()
    }

    pub fn sizes(&self) -> Sizes {
        Sizes {
            shared: self.shared.len() as u64,
            subjects: self.subjects.len() as u64,
            objects: self.objects.len() as u64,
            predicates: self.predicates.len() as u64,
        }
    }

    pub fn shared_terms(&self) -> &[String] {
        &self.shared
    }

    pub fn subject_terms(&self) -> &[String] {
        &self.subjects
    }

    pub fn object_terms(&self) -> &[String] {
        &self.objects
    }

    pub fn predicate_terms(&self) -> &[String] {
        &self.predicates
    }

    pub fn id_for(&self, term: &str, role: Role) -> Option<Id> {
        let find = |list: &[String]| list.binary_search_by(|t| t.as_str().cmp(term)).ok();
        let so = self.shared.len() as u64;
        match role {
            Role::Predicate => find(&self.predicates).map(|i| i as u64 + 1),
            Role::Subject => find(&self.shared)
                .map(|i| i as u64 + 1)
                .or_else(|| find(&self.subjects).map(|i| so + i as u64 + 1)),
            Role::Object => find(&self.shared)
                .map(|i| i as u64 + 1)
                .or_else(|| find(&self.objects).map(|i| so + i as u64 + 1)),
        }
    }

    pub fn term_for(&self, id: Id, role: Role) -> Result<&str, DictionaryError> {
        let max = self.sizes().max_id(role);
        if id == 0 || id > max {
            return Err(DictionaryError::IdOutOfRange { id, role, max });
        }
        let idx = (id - 1) as usize;
        let so = self.shared.len();
        let term = match role {
            Role::Predicate => &self.predicates[idx],
            _ if idx < so => &self.shared[idx],
            Role::Subject => &self.subjects[idx - so],
            Role::Object => &self.objects[idx - so],
        };
        Ok(term)
    }

    /// Maps a term triple to IDs; `None` if any term is unknown in its role.
    pub fn encode(&self, subject: &str, predicate: &str, object: &str) -> Option<(Id, Id, Id)> {
        Some((
            self.id_for(subject, Role::Subject)?,
            self.id_for(predicate, Role::Predicate)?,
            self.id_for(object, Role::Object)?,
        ))
    }

    pub fn serialized_len(&self) -> usize {
        [&self.shared, &self.subjects, &self.objects, &self.predicates]
            .iter()
            .map(|list| 8 + list.iter().map(|t| 4 + t.len()).sum::<usize>())
            .sum()
    }

    /// Four term lists in partition order SO, S, O, P. Each list is a u64
    /// count followed by terms, each a u32 byte length plus UTF-8 bytes.
    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for list in [&self.shared, &self.subjects, &self.objects, &self.predicates] {
            wire::write_u64(w, list.len() as u64)?;
            for term in list {
                let len = u32::try_from(term.len()).map_err(|_| {
                    std::io::Error::new(std::io::ErrorKind::InvalidInput, "term longer than 4 GiB")
                })?;
                wire::write_u32(w, len)?;
                w.write_all(term.as_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self, FormatError> {
        let mut lists: [Vec<String>; 4] = Default::default();
        for list in lists.iter_mut() {
            let count = wire::read_u64(r)?;
            for _ in 0..count {
                let len = wire::read_u32(r)?;
                let bytes = wire::read_bytes(r, u64::from(len))?;
                let term = String::from_utf8(bytes)
                    .map_err(|_| wire::corrupt("dictionary term is not valid UTF-8"))?;
                if list.last().is_some_and(|prev| *prev >= term) {
                    return Err(wire::corrupt("dictionary partition is not strictly sorted"));
                }
                list.push(term);
            }
        }
        let [shared, subjects, objects, predicates] = lists;
        Ok(TermDictionary {
            shared,
            subjects,
            objects,
            predicates,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};
    use std::collections::HashSet;

    const EXAMPLE: [(&str, &str, &str); 3] = [
        ("<http://x/b>", "<http://p/1>", "<http://x/a>"),
        ("<http://x/a>", "<http://p/2>", "\"lit\""),
        ("<http://x/c>", "<http://p/1>", "<http://x/d>"),
    ];

    #[test]
    fn partitions_and_ranges() {
        let dict = TermDictionary::build(EXAMPLE);
        let sizes = dict.sizes();
        assert_eq!(
            sizes,
            Sizes {
                shared: 1,
                subjects: 2,
                objects: 2,
                predicates: 2
            }
        );
        assert_eq!(dict.id_for("<http://x/a>", Role::Subject), Some(1));
        assert_eq!(dict.id_for("<http://x/a>", Role::Object), Some(1));
        assert_eq!(dict.id_for("<http://x/b>", Role::Subject), Some(2));
        assert_eq!(dict.id_for("<http://x/c>", Role::Subject), Some(3));
        // '"' sorts before '<'
        assert_eq!(dict.id_for("\"lit\"", Role::Object), Some(2));
        assert_eq!(dict.id_for("<http://x/d>", Role::Object), Some(3));
        assert_eq!(dict.id_for("<http://x/b>", Role::Object), None);
        assert_eq!(dict.id_for("<http://p/2>", Role::Predicate), Some(2));
        assert_eq!(dict.id_for("<nowhere>", Role::Subject), None);
        assert_eq!(dict.term_for(1, Role::Object), Ok("<http://x/a>"));
        assert_eq!(
            dict.term_for(4, Role::Subject),
            Err(DictionaryError::IdOutOfRange {
                id: 4,
                role: Role::Subject,
                max: 3
            })
        );
        assert!(dict.term_for(0, Role::Predicate).is_err());
    }

    #[test]
    fn empty_input() {
        let dict = TermDictionary::build([]);
        assert_eq!(dict.sizes(), Sizes::default());
        assert!(dict.term_for(1, Role::Subject).is_err());
    }

    #[test]
    fn predicate_terms_are_independent() {
        let dict = TermDictionary::build([("<p>", "<p>", "<o>")]);
        assert_eq!(dict.id_for("<p>", Role::Predicate), Some(1));
        assert_eq!(dict.id_for("<p>", Role::Subject), Some(1));
        assert_eq!(dict.sizes().shared, 0);
    }

    fn random_triples(rng: &mut StdRng, count: usize, terms: usize) -> Vec<(String, String, String)> {
        (0..count)
            .map(|_| {
                (
                    format!("<t{}>", rng.gen_range(0..terms)),
                    format!("<p{}>", rng.gen_range(0..5)),
                    format!("<t{}>", rng.gen_range(0..terms)),
                )
            })
            .collect()
    }

    #[test]
    fn classification_matches_set_algebra() {
        let mut rng = StdRng::seed_from_u64(9);
        // Skewed so that all of S∩O, S∖O and O∖S are populated.
        let triples: Vec<_> = (0..1000)
            .map(|_| {
                (
                    format!("<t{}>", rng.gen_range(0..35)),
                    format!("<p{}>", rng.gen_range(0..5)),
                    format!("<t{}>", rng.gen_range(15..50)),
                )
            })
            .collect();
        let dict = TermDictionary::build(triples.iter().map(|(s, p, o)| (s.as_str(), p.as_str(), o.as_str())));
        let s: HashSet<_> = triples.iter().map(|t| t.0.clone()).collect();
        let o: HashSet<_> = triples.iter().map(|t| t.2.clone()).collect();
        let both: HashSet<_> = s.intersection(&o).cloned().collect();
        let s_only: HashSet<_> = s.difference(&o).cloned().collect();
        let o_only: HashSet<_> = o.difference(&s).cloned().collect();
        assert!(!both.is_empty() && !s_only.is_empty() && !o_only.is_empty());
        assert_eq!(dict.shared_terms().iter().cloned().collect::<HashSet<_>>(), both);
        assert_eq!(dict.subject_terms().iter().cloned().collect::<HashSet<_>>(), s_only);
        assert_eq!(dict.object_terms().iter().cloned().collect::<HashSet<_>>(), o_only);

        let sizes = dict.sizes();
        for t in &both {
            let id = dict.id_for(t, Role::Subject).unwrap();
            assert_eq!(Some(id), dict.id_for(t, Role::Object));
            assert!(id <= sizes.shared);
        }
        for t in &s_only {
            let id = dict.id_for(t, Role::Subject).unwrap();
            assert!(id > sizes.shared && id <= sizes.max_subject());
        }
        for t in &o_only {
            let id = dict.id_for(t, Role::Object).unwrap();
            assert!(id > sizes.shared && id <= sizes.max_object());
        }
    }

    #[test]
    fn ids_are_gap_free_and_inverse() {
        let mut rng = StdRng::seed_from_u64(10);
        let triples = random_triples(&mut rng, 500, 80);
        let dict = TermDictionary::build(triples.iter().map(|(s, p, o)| (s.as_str(), p.as_str(), o.as_str())));
        let sizes = dict.sizes();
        for role in [Role::Subject, Role::Object, Role::Predicate] {
            for id in 1..=sizes.max_id(role) {
                let term = dict.term_for(id, role).unwrap();
                assert_eq!(dict.id_for(term, role), Some(id));
            }
        }
        for (s, p, o) in &triples {
            let (si, pi, oi) = dict.encode(s, p, o).unwrap();
            assert_eq!(dict.term_for(si, Role::Subject).unwrap(), s);
            assert_eq!(dict.term_for(pi, Role::Predicate).unwrap(), p);
            assert_eq!(dict.term_for(oi, Role::Object).unwrap(), o);
        }
    }

    #[test]
    fn read_rejects_unsorted_partition() {
        let mut bytes = Vec::new();
        wire::write_u64(&mut bytes, 2).unwrap();
        for t in ["<b>", "<a>"] {
            wire::write_u32(&mut bytes, 3).unwrap();
            bytes.extend_from_slice(t.as_bytes());
        }
        for _ in 0..3 {
            wire::write_u64(&mut bytes, 0).unwrap();
        }
        assert!(TermDictionary::read_from(&mut bytes.as_slice()).is_err());
    }

    proptest! {
        #[test]
        fn build_is_order_independent_and_round_trips(
            raw in proptest::collection::vec((0u8..30, 0u8..4, 0u8..30), 0..120),
            seed in any::<u64>(),
        ) {
            let triples: Vec<(String, String, String)> = raw.iter()
                .map(|(s, p, o)| (format!("<{s}>"), format!("<p{p}>"), format!("\"{o}\"")))
                .chain(raw.iter().map(|(s, _, o)| (format!("<{o}>"), "<q>".into(), format!("<{s}>"))))
                .collect();
            let mut shuffled = triples.clone();
            let mut rng = StdRng::seed_from_u64(seed);
            for i in (1..shuffled.len()).rev() {
                shuffled.swap(i, rng.gen_range(0..=i));
            }
            let as_refs = |v: &[(String, String, String)]| {
                TermDictionary::build(v.iter().map(|(s, p, o)| (s.as_str(), p.as_str(), o.as_str())))
            };
            let a = as_refs(&triples);
            let b = as_refs(&shuffled);
            let mut ba = Vec::new();
            let mut bb = Vec::new();
            a.write_to(&mut ba).unwrap();
            b.write_to(&mut bb).unwrap();
            prop_assert_eq!(&ba, &bb);
            prop_assert_eq!(ba.len(), a.serialized_len());
            let back = TermDictionary::read_from(&mut ba.as_slice()).unwrap();
            prop_assert_eq!(back, a);
        }
    }
}
