//! N-Triples ingestion.
//!
//! Terms are kept in their canonical N-Triples spelling, which is also the
//! key the dictionary sorts and stores.

use std::collections::HashSet;
use std::fmt;
use std::io::{self, BufRead};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(String),
    BlankNode(String),
    Literal(Literal),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub value: String,
    pub annotation: LiteralAnnotation,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LiteralAnnotation {
    None,
    Language(String),
    Datatype(String),
}

impl Term {
    pub fn iri(iri: impl Into<String>) -> Self {
        Term::Iri(iri.into())
    }

    pub fn blank(label: impl Into<String>) -> Self {
        Term::BlankNode(label.into())
    }

    pub fn literal(value: impl Into<String>) -> Self {
        Term::Literal(Literal {
            value: value.into(),
            annotation: LiteralAnnotation::None,
        })
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }

    /// Parses one term in N-Triples syntax; the whole input must be consumed.
    pub fn parse(text: &str) -> Result<Term, String> {
        let mut cur = Cursor::new(text);
        let term = cur.term()?;
        cur.skip_ws();
        if !cur.at_end() {
            return Err(format!("unexpected trailing input {:?}", cur.rest()));
        }
        Ok(term)
    }
}

/// Parses one term at the start of `text`; returns it with the number of
/// bytes consumed.
pub(crate) fn parse_term_prefix(text: &str) -> Result<(Term, usize), String> {
    let mut cur = Cursor::new(text);
    let term = cur.term()?;
    Ok((term, cur.pos))
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => write!(f, "<{iri}>"),
            Term::BlankNode(label) => write!(f, "_:{label}"),
            Term::Literal(lit) => {
                f.write_str("\"")?;
                for ch in lit.value.chars() {
                    match ch {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\r' => f.write_str("\\r")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")?;
                match &lit.annotation {
                    LiteralAnnotation::None => Ok(()),
                    LiteralAnnotation::Language(tag) => write!(f, "@{tag}"),
                    LiteralAnnotation::Datatype(dt) => write!(f, "^^<{dt}>"),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RawTriple {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
    pub line_no: usize,
}

impl RawTriple {
    fn key(&self) -> (&Term, &Term, &Term) {
        (&self.subject, &self.predicate, &self.object)
    }
}

impl fmt::Display for RawTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

/// A malformed input line. Renders as `line:<n> <reason>`.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line:{line} {reason}")]
pub struct LineError {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Syntax(LineError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Report malformed lines and keep going.
    #[default]
    Lenient,
    /// Stop at the first malformed line.
    Strict,
}

/// Parses one line. Blank lines and comments yield `Ok(None)`.
pub fn parse_line(line: &str) -> Result<Option<(Term, Term, Term)>, String> {
    let mut cur = Cursor::new(line);
    cur.skip_ws();
    if cur.at_end() || cur.peek() == Some('#') {
        return Ok(None);
    }
    let subject = cur.term()?;
    if subject.is_literal() {
        return Err("literal in subject position".into());
    }
    cur.expect_ws("after subject")?;
    let predicate = cur.term()?;
    if !matches!(predicate, Term::Iri(_)) {
        return Err("predicate must be an IRI".into());
    }
    cur.expect_ws("after predicate")?;
    let object = cur.term()?;
    cur.skip_ws();
    if cur.peek() != Some('.') {
        return Err("expected '.' at end of triple".into());
    }
    cur.bump();
    cur.skip_ws();
    if !cur.at_end() && cur.peek() != Some('#') {
        return Err(format!("unexpected trailing input {:?}", cur.rest()));
    }
    Ok(Some((subject, predicate, object)))
}

/// Streaming line-by-line N-Triples reader. Yields one item per triple line
/// and one error per malformed line.
pub struct NTriplesReader<R> {
    input: R,
    line_no: usize,
    buf: Vec<u8>,
}

impl<R: BufRead> NTriplesReader<R> {
    pub fn new(input: R) -> Self {
        NTriplesReader {
            input,
            line_no: 0,
            buf: Vec::new(),
        }
    }
}

impl<R: BufRead> Iterator for NTriplesReader<R> {
    type Item = Result<RawTriple, ReadError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.input.read_until(b'\n', &mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(ReadError::Io(e))),
            }
            self.line_no += 1;
            let Ok(line) = std::str::from_utf8(&self.buf) else {
                return Some(Err(ReadError::Line(LineError {
                    line: self.line_no,
                    reason: "invalid UTF-8".into(),
                })));
            };
            match parse_line(line) {
                Ok(None) => continue,
                Ok(Some((subject, predicate, object))) => {
                    return Some(Ok(RawTriple {
                        subject,
                        predicate,
                        object,
                        line_no: self.line_no,
                    }))
                }
                Err(reason) => {
                    return Some(Err(ReadError::Line(LineError {
                        line: self.line_no,
                        reason,
                    })))
                }
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum ReadError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Line(LineError),
}

/// Parses a whole input. In lenient mode malformed lines are collected and
/// skipped; in strict mode the first one aborts.
pub fn parse_ntriples<R: BufRead>(
    input: R,
    mode: ParseMode,
) -> Result<(Vec<RawTriple>, Vec<LineError>), IngestError> {
    let mut triples = Vec::new();
    let mut errors = Vec::new();
    for item in NTriplesReader::new(input) {
        match item {
            Ok(t) => triples.push(t),
            Err(ReadError::Io(e)) => return Err(IngestError::Io(e)),
            Err(ReadError::Line(e)) if mode == ParseMode::Strict => {
                return Err(IngestError::Syntax(e))
            }
            Err(ReadError::Line(e)) => errors.push(e),
        }
    }
    Ok((triples, errors))
}

/// Drops later exact duplicates (byte-exact on terms, line numbers ignored),
/// keeping survivors in input order.
pub fn deduplicate<I>(triples: I) -> Dedup<I::IntoIter>
where
    I: IntoIterator<Item = RawTriple>,
{
    Dedup {
        inner: triples.into_iter(),
        seen: HashSet::new(),
    }
}

pub struct Dedup<I> {
    inner: I,
    seen: HashSet<(Term, Term, Term)>,
}

impl<I: Iterator<Item = RawTriple>> Iterator for Dedup<I> {
    type Item = RawTriple;

    fn next(&mut self) -> Option<RawTriple> {
        for t in self.inner.by_ref() {
            let (s, p, o) = t.key();
            if self.seen.insert((s.clone(), p.clone(), o.clone())) {
                return Some(t);
            }
        }
        None
    }
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor { text, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.text.len()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t' | '\r' | '\n')) {
            self.pos += 1;
        }
    }

    fn expect_ws(&mut self, what: &str) -> Result<(), String> {
        let start = self.pos;
        self.skip_ws();
        if self.at_end() {
            return Err("unexpected end of line, expected a term".into());
        }
        if self.pos == start && !matches!(self.peek(), Some('<' | '"')) {
            return Err(format!("expected whitespace {what}"));
        }
        Ok(())
    }

    fn term(&mut self) -> Result<Term, String> {
        match self.peek() {
            Some('<') => self.iri().map(Term::Iri),
            Some('_') => self.blank(),
            Some('"') => self.literal(),
            Some(c) => Err(format!("unexpected character {c:?} at start of term")),
            None => Err("unexpected end of line, expected a term".into()),
        }
    }

    fn iri(&mut self) -> Result<String, String> {
        self.bump();
        let mut out = String::new();
        loop {
            match self.bump() {
                Some('>') => break,
                Some('\\') => out.push(self.unicode_escape()?),
                Some(c) if c <= ' ' || "<\"{}|^`".contains(c) => {
                    return Err(format!("invalid character {c:?} in IRI"))
                }
                Some(c) => out.push(c),
                None => return Err("unterminated IRI".into()),
            }
        }
        if out.is_empty() {
            return Err("empty IRI".into());
        }
        Ok(out)
    }

    fn blank(&mut self) -> Result<Term, String> {
        if !self.rest().starts_with("_:") {
            return Err("malformed blank node, expected '_:'".into());
        }
        self.pos += 2;
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || matches!(c, '_' | '-' | '.') {
                self.bump();
            } else {
                break;
            }
        }
        // A trailing '.' belongs to the statement terminator.
        while self.pos > start && self.text[..self.pos].ends_with('.') {
            self.pos -= 1;
        }
        if self.pos == start {
            return Err("empty blank node label".into());
        }
        Ok(Term::BlankNode(self.text[start..self.pos].to_string()))
    }

    fn literal(&mut self) -> Result<Term, String> {
        self.bump();
        let mut value = String::new();
        loop {
            match self.bump() {
                Some('"') => break,
                Some('\\') => match self.peek() {
                    Some('u' | 'U') => value.push(self.unicode_escape()?),
                    Some(c) => {
                        self.bump();
                        value.push(match c {
                            't' => '\t',
                            'b' => '\u{8}',
                            'n' => '\n',
                            'r' => '\r',
                            'f' => '\u{c}',
                            '"' => '"',
                            '\'' => '\'',
                            '\\' => '\\',
                            other => return Err(format!("invalid escape '\\{other}'")),
                        });
                    }
                    None => return Err("unterminated literal".into()),
                },
                Some('\n' | '\r') | None => return Err("unterminated literal".into()),
                Some(c) => value.push(c),
            }
        }
        let annotation = match self.peek() {
            Some('@') => {
                self.bump();
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '-') {
                    self.bump();
                }
                let tag = &self.text[start..self.pos];
                let valid = !tag.is_empty()
                    && tag.split('-').all(|p| !p.is_empty())
                    && tag.split('-').next().unwrap().chars().all(|c| c.is_ascii_alphabetic());
                if !valid {
                    return Err(format!("invalid language tag {tag:?}"));
                }
                LiteralAnnotation::Language(tag.to_string())
            }
            Some('^') => {
                if !self.rest().starts_with("^^<") {
                    return Err("expected '^^<' before datatype IRI".into());
                }
                self.pos += 2;
                LiteralAnnotation::Datatype(self.iri()?)
            }
            _ => LiteralAnnotation::None,
        };
        Ok(Term::Literal(Literal { value, annotation }))
    }

    /// Decodes `\uXXXX` or `\UXXXXXXXX`; the backslash is already consumed.
    fn unicode_escape(&mut self) -> Result<char, String> {
        let width = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err("invalid escape in IRI".into()),
        };
        let rest = self.rest();
        let hex = rest
            .get(..width)
            .filter(|h| h.chars().all(|c| c.is_ascii_hexdigit()))
            .ok_or_else(|| "malformed unicode escape".to_string())?;
        self.pos += width;
        let code = u32::from_str_radix(hex, 16).map_err(|e| e.to_string())?;
        char::from_u32(code).ok_or_else(|| format!("invalid code point U+{code:X}"))
    }
}
