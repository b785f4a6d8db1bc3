//! Python module `k2triples`.

use std::path::PathBuf;

use k2triples::dataset::{BuildError, QueryError};
use k2triples::{Dataset, FormatError, Id, IdTriple, ParseMode, Role, Slot, StoreStats, TriplePattern};
use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(k2triples, CorruptStoreError, PyValueError, "The store bytes do not decode.");
create_exception!(k2triples, ParseError, PyValueError, "Malformed N-Triples input in strict mode.");

fn build_err(e: BuildError) -> PyErr {
    match e {
        BuildError::Ingest(k2triples::ingest::IngestError::Io(e)) => PyOSError::new_err(e.to_string()),
        BuildError::Ingest(e) => ParseError::new_err(e.to_string()),
        BuildError::Store(e) => PyValueError::new_err(e.to_string()),
    }
}

fn format_err(e: FormatError) -> PyErr {
    match e {
        FormatError::Io(e) if e.kind() != std::io::ErrorKind::UnexpectedEof => PyOSError::new_err(e.to_string()),
        e => CorruptStoreError::new_err(e.to_string()),
    }
}

fn query_err(e: QueryError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn mode(strict: bool) -> ParseMode {
    if strict {
        ParseMode::Strict
    } else {
        ParseMode::Lenient
    }
}

fn slot(value: Option<Id>, name: &str) -> Slot {
    value.map_or_else(|| Slot::var(name), Slot::Bound)
}

/// A dictionary-encoded RDF graph with one k2-tree per predicate.
#[pyclass(name = "Dataset", module = "k2triples", frozen)]
struct PyDataset {
    inner: Dataset,
    line_errors: Vec<String>,
}

impl PyDataset {
    fn wrap(inner: Dataset, errors: Vec<k2triples::LineError>) -> Self {
        PyDataset {
            inner,
            line_errors: errors.iter().map(ToString::to_string).collect(),
        }
    }

    fn terms(&self, t: &IdTriple) -> (String, String, String) {
        let term = |id, role| self.inner.term(id, role).unwrap_or_default().to_string();
        (term(t.s, Role::Subject), term(t.p, Role::Predicate), term(t.o, Role::Object))
    }
}

#[pymethods]
impl PyDataset {
    /// Builds from an N-Triples file.
    #[staticmethod]
    #[pyo3(signature = (path, k = 2, strict = false))]
    fn build(py: Python<'_>, path: PathBuf, k: u32, strict: bool) -> PyResult<Self> {
        let (ds, errors) = py
            .detach(|| Dataset::build_from_path(&path, k, mode(strict)))
            .map_err(build_err)?;
        Ok(Self::wrap(ds, errors))
    }

    /// Builds from N-Triples text.
    #[staticmethod]
    #[pyo3(signature = (text, k = 2, strict = false))]
    fn from_ntriples(text: &str, k: u32, strict: bool) -> PyResult<Self> {
        let (ds, errors) = Dataset::from_ntriples(text.as_bytes(), k, mode(strict)).map_err(build_err)?;
        Ok(Self::wrap(ds, errors))
    }

    #[staticmethod]
    fn load(py: Python<'_>, path: PathBuf) -> PyResult<Self> {
        let ds = py.detach(|| Dataset::load(&path)).map_err(format_err)?;
        Ok(Self::wrap(ds, Vec::new()))
    }

    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        let ds = Dataset::read_from(&mut &data[..]).map_err(format_err)?;
        Ok(Self::wrap(ds, Vec::new()))
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(path).map_err(|e| PyOSError::new_err(e.to_string()))
    }

    fn to_bytes(&self) -> Vec<u8> {
        self.inner.to_bytes()
    }

    /// Malformed lines skipped while building, as `line:<n> <reason>`.
    #[getter]
    fn line_errors(&self) -> Vec<String> {
        self.line_errors.clone()
    }

    #[getter]
    fn k(&self) -> u32 {
        self.inner.store().k()
    }

    /// Partition sizes as `(so, s, o, p)`.
    #[getter]
    fn sizes(&self) -> (u64, u64, u64, u64) {
        let s = self.inner.store().sizes();
        (s.shared, s.subjects, s.objects, s.predicates)
    }

    fn __len__(&self) -> usize {
        self.inner.store().num_triples() as usize
    }

    fn __repr__(&self) -> String {
        let s = self.inner.store().sizes();
        format!(
            "Dataset(triples={}, so={}, s={}, o={}, p={}, k={})",
            self.inner.store().num_triples(),
            s.shared,
            s.subjects,
            s.objects,
            s.predicates,
            self.inner.store().k()
        )
    }

    /// Term spelling of an ID in a role (`"s"`, `"p"` or `"o"`).
    fn term(&self, id: Id, role: &str) -> PyResult<Option<String>> {
        let role = match role {
            "s" => Role::Subject,
            "p" => Role::Predicate,
            "o" => Role::Object,
            _ => return Err(PyValueError::new_err("role must be 's', 'p' or 'o'")),
        };
        Ok(self.inner.term(id, role).map(str::to_string))
    }

    /// Matches of a pattern given by IDs; `None` is a variable.
    #[pyo3(signature = (s = None, p = None, o = None))]
    fn solve(&self, s: Option<Id>, p: Option<Id>, o: Option<Id>) -> PyResult<Vec<(Id, Id, Id)>> {
        let pattern = TriplePattern::new(slot(s, "s"), slot(p, "p"), slot(o, "o"));
        let triples = self
            .inner
            .solve(&pattern)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(triples.iter().map(|t| (t.s, t.p, t.o)).collect())
    }

    /// Matches of a textual pattern such as `(?s, <http://p>, ?o)`, as terms.
    fn query(&self, pattern: &str) -> PyResult<Vec<(String, String, String)>> {
        let answer = self.inner.query(pattern).map_err(query_err)?;
        Ok(answer.triples.iter().map(|t| self.terms(t)).collect())
    }

    fn query_ids(&self, pattern: &str) -> PyResult<Vec<(Id, Id, Id)>> {
        let answer = self.inner.query(pattern).map_err(query_err)?;
        Ok(answer.triples.iter().map(|t| (t.s, t.p, t.o)).collect())
    }

    /// Joins two textual patterns; returns `(variables, rows)` with terms.
    fn join(&self, left: &str, right: &str) -> PyResult<(Vec<String>, Vec<Vec<String>>)> {
        let answer = self.inner.join(left, right).map_err(query_err)?;
        let roles = answer.query.as_ref().map(Dataset::join_roles).unwrap_or_default();
        let rows = answer
            .bindings
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&roles)
                    .map(|(&id, &role)| self.inner.term(id, role).unwrap_or_default().to_string())
                    .collect()
            })
            .collect();
        Ok((answer.bindings.vars, rows))
    }

    fn join_ids(&self, left: &str, right: &str) -> PyResult<(Vec<String>, Vec<Vec<Id>>)> {
        let answer = self.inner.join(left, right).map_err(query_err)?;
        Ok((answer.bindings.vars, answer.bindings.rows))
    }

    /// Join axis and category, e.g. `"SO / A"`.
    fn explain(&self, left: &str, right: &str) -> PyResult<String> {
        let answer = self.inner.join(left, right).map_err(query_err)?;
        let q = answer.query.expect("a parsed join carries its query");
        Ok(format!("{} / {}", q.axis(), q.category()))
    }

    fn stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let st = StoreStats::of(&self.inner);
        let d = PyDict::new(py);
        d.set_item("triples", st.triples)?;
        d.set_item("so", st.sizes.shared)?;
        d.set_item("s", st.sizes.subjects)?;
        d.set_item("o", st.sizes.objects)?;
        d.set_item("p", st.sizes.predicates)?;
        d.set_item("k", st.k)?;
        d.set_item("matrix_side", st.matrix_side)?;
        d.set_item("triples_bytes", st.triples_bytes)?;
        d.set_item("dictionary_bytes", st.dictionary_bytes)?;
        d.set_item("total_bytes", st.total_bytes)?;
        d.set_item("bits_per_triple", st.bits_per_triple())?;
        let per: Vec<(u64, u64)> = st.predicates.iter().map(|p| (p.id, p.ones)).collect();
        d.set_item("predicate_triples", per)?;
        Ok(d)
    }
}

#[pymodule(name = "k2triples")]
fn k2triples_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add("CorruptStoreError", m.py().get_type::<CorruptStoreError>())?;
    m.add("ParseError", m.py().get_type::<ParseError>())?;
    m.add("DEFAULT_K", k2triples::k2tree::DEFAULT_K)?;
    Ok(())
}
