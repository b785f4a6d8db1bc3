//! Textual triple patterns: `(item, item, item)` where an item is `?name`,
//! `#<id>` or a term in N-Triples syntax.

use std::fmt;

use thiserror::Error;

use crate::dictionary::{Id, Role, TermDictionary};
use crate::ingest::{parse_term_prefix, Term};
use crate::triplestore::{Slot, TriplePattern};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternItem {
    Var(String),
    Id(Id),
    Term(Term),
}

impl fmt::Display for PatternItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternItem::Var(name) => write!(f, "?{name}"),
            PatternItem::Id(id) => write!(f, "#{id}"),
            PatternItem::Term(term) => write!(f, "{term}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("malformed pattern at byte {offset}: {reason}")]
pub struct PatternSyntaxError {
    pub offset: usize,
    pub reason: String,
}

pub fn parse_pattern(text: &str) -> Result<[PatternItem; 3], PatternSyntaxError> {
    let mut pos = 0;
    let err = |offset: usize, reason: &str| PatternSyntaxError {
        offset,
        reason: reason.to_string(),
    };
    let skip_ws = |pos: &mut usize| {
        while text[*pos..].starts_with(char::is_whitespace) {
            *pos += text[*pos..].chars().next().unwrap().len_utf8();
        }
    };
    skip_ws(&mut pos);
    if !text[pos..].starts_with('(') {
        return Err(err(pos, "expected '('"));
    }
    pos += 1;
    let mut items = Vec::with_capacity(3);
    for i in 0..3 {
        skip_ws(&mut pos);
        let rest = &text[pos..];
        let item = if let Some(name) = rest.strip_prefix('?') {
            let len = name
                .find(|c: char| !(c.is_alphanumeric() || c == '_'))
                .unwrap_or(name.len());
            if len == 0 {
                return Err(err(pos, "empty variable name"));
            }
            pos += 1 + len;
            PatternItem::Var(name[..len].to_string())
        } else if let Some(digits) = rest.strip_prefix('#') {
            let len = digits
                .find(|c: char| !c.is_ascii_digit())
                .unwrap_or(digits.len());
            let id = digits[..len]
                .parse()
                .map_err(|_| err(pos, "expected a numeric id after '#'"))?;
            pos += 1 + len;
            PatternItem::Id(id)
        } else {
            let (term, used) = parse_term_prefix(rest).map_err(|e| err(pos, &e))?;
            pos += used;
            PatternItem::Term(term)
        };
        items.push(item);
        skip_ws(&mut pos);
        let sep = if i < 2 { ',' } else { ')' };
        if !text[pos..].starts_with(sep) {
            return Err(err(pos, &format!("expected '{sep}'")));
        }
        pos += 1;
    }
    skip_ws(&mut pos);
    if pos != text.len() {
        return Err(err(pos, "unexpected trailing input"));
    }
    Ok(items.try_into().expect("exactly three items"))
}

/// A pattern mapped onto dictionary IDs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolved {
    Pattern(TriplePattern),
    /// A term that never occurs in the role its position requires; the
    /// pattern cannot match anything.
    UnknownTerm { term: String, role: Role },
}

pub fn resolve_pattern(dict: &TermDictionary, items: &[PatternItem; 3]) -> Resolved {
    let roles = [Role::Subject, Role::Predicate, Role::Object];
    let mut slots = Vec::with_capacity(3);
    for (item, role) in items.iter().zip(roles) {
        let slot = match item {
            PatternItem::Var(name) => Slot::Var(name.clone()),
            PatternItem::Id(id) => Slot::Bound(*id),
            PatternItem::Term(term) => {
                let text = term.to_string();
                match dict.id_for(&text, role) {
                    Some(id) => Slot::Bound(id),
                    None => return Resolved::UnknownTerm { term: text, role },
                }
            }
        };
        slots.push(slot);
    }
    let [s, p, o]: [Slot; 3] = slots.try_into().expect("three slots");
    Resolved::Pattern(TriplePattern { s, p, o })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_item_kinds() {
        let items = parse_pattern(" ( ?x , <http://p>,\"a, b\"@en ) ").unwrap();
        assert_eq!(items[0], PatternItem::Var("x".into()));
        assert_eq!(items[1], PatternItem::Term(Term::iri("http://p")));
        assert_eq!(items[2].to_string(), "\"a, b\"@en");
        let items = parse_pattern("(#1,#22,_:b)").unwrap();
        assert_eq!(items[0], PatternItem::Id(1));
        assert_eq!(items[1], PatternItem::Id(22));
        assert_eq!(items[2], PatternItem::Term(Term::blank("b")));
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["?x, ?y, ?z", "(?x, ?y)", "(?x ?y ?z)", "(?, ?y, ?z)", "(#a, ?y, ?z)", "(?x, ?y, ?z) x", "(x, ?y, ?z)"] {
            assert!(parse_pattern(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn resolves_against_dictionary() {
        let dict = TermDictionary::build([("<s>", "<p>", "<o>")]);
        let items = parse_pattern("(<s>, <p>, ?o)").unwrap();
        assert_eq!(
            resolve_pattern(&dict, &items),
            Resolved::Pattern(TriplePattern::new(1, 1, Slot::var("o")))
        );
        let items = parse_pattern("(<o>, <p>, ?o)").unwrap();
        assert_eq!(
            resolve_pattern(&dict, &items),
            Resolved::UnknownTerm {
                term: "<o>".into(),
                role: Role::Subject
            }
        );
    }
}
