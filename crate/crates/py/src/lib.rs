//! Python bindings. Structured results come back as plain dicts and lists
//! with the same shape as the HTTP API's JSON.

use std::collections::BTreeSet;
use std::sync::{Arc, Mutex};

use brics_core as core;
use brics_core::{GrammarSet, SourceText, StructureGrammar};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use pyo3::IntoPyObjectExt;
use serde::Serialize;
use serde_json::Value;

create_exception!(brics, BricsError, PyException, "Raised with (code, message) args.");

fn fail(err: impl std::fmt::Display) -> PyErr {
    let text = err.to_string();
    let (code, message) = match text.split_once(": ") {
        Some((c, m)) if c.starts_with("E_") => (c.to_string(), m.to_string()),
        _ => ("E_ERROR".to_string(), text),
    };
    BricsError::new_err((code, message))
}

fn to_py<'py>(py: Python<'py>, value: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match value {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_bound_py_any(py)?,
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => u.into_bound_py_any(py)?,
            (_, Some(i)) => i.into_bound_py_any(py)?,
            _ => n.as_f64().unwrap_or(f64::NAN).into_bound_py_any(py)?,
        },
        Value::String(s) => s.into_bound_py_any(py)?,
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, v) in map {
                dict.set_item(k, to_py(py, v)?)?;
            }
            dict.into_any()
        }
    })
}

fn serialize<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &serde_json::to_value(value).map_err(fail)?)
}

/// A block structure grammar.
#[pyclass(frozen, module = "brics")]
struct Grammar {
    inner: Arc<StructureGrammar>,
}

#[pymethods]
impl Grammar {
    /// One of the builtin grammars: "c", "java" or "brace".
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Grammar> {
        let inner = GrammarSet::builtin().get(name).map_err(fail)?;
        Ok(Grammar { inner })
    }

    /// Parses a JSON grammar document.
    #[staticmethod]
    fn load(config_text: &str) -> PyResult<Grammar> {
        core::load_grammar(config_text)
            .map(|g| Grammar { inner: Arc::new(g) })
            .map_err(|diags| fail(core::GrammarError::Invalid(diags)))
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    fn to_json(&self) -> String {
        self.inner.to_config_json()
    }

    fn __repr__(&self) -> String {
        format!("Grammar({:?})", self.inner.name)
    }
}

#[derive(FromPyObject)]
enum GrammarArg {
    Grammar(Py<Grammar>),
    Name(String),
}

impl GrammarArg {
    fn resolve(&self) -> PyResult<Arc<StructureGrammar>> {
        match self {
            GrammarArg::Grammar(g) => Ok(g.get().inner.clone()),
            GrammarArg::Name(name) => GrammarSet::builtin().get(name).map_err(fail),
        }
    }
}

struct Parsed {
    grammar: Arc<StructureGrammar>,
    source: SourceText,
    tree: core::BlockTree,
    diagnostics: Vec<core::ParseDiagnostic>,
}

fn parsed(text: &str, grammar: &GrammarArg) -> PyResult<Parsed> {
    let grammar = grammar.resolve()?;
    let source = SourceText::new(text);
    let (tree, diagnostics) = core::parse_blocks(&source, &grammar);
    Ok(Parsed { grammar, source, tree, diagnostics })
}

fn define_set(defines: Option<Vec<String>>) -> Option<BTreeSet<String>> {
    defines.map(|d| d.into_iter().collect())
}

/// Validates a grammar document. Returns a list of diagnostics; errors make it invalid.
#[pyfunction]
fn check_grammar<'py>(py: Python<'py>, config_text: &str) -> PyResult<Bound<'py, PyAny>> {
    serialize(py, &core::check_grammar(config_text).1)
}

/// Parses text into `{"tree": ..., "diagnostics": [...]}`.
#[pyfunction]
fn parse<'py>(py: Python<'py>, text: &str, grammar: GrammarArg) -> PyResult<Bound<'py, PyAny>> {
    let p = parsed(text, &grammar)?;
    serialize(py, &serde_json::json!({ "tree": p.tree, "diagnostics": p.diagnostics }))
}

/// Id of the block at a 1-based line and 0-based column, or None.
#[pyfunction]
fn block_at(text: &str, grammar: GrammarArg, line: usize, col: usize) -> PyResult<Option<usize>> {
    let p = parsed(text, &grammar)?;
    core::block_at(&p.tree, &p.source, core::Pos::new(line, col)).map_err(fail)
}

#[pyfunction]
#[pyo3(signature = (text, grammar, defines=None))]
fn rects<'py>(py: Python<'py>, text: &str, grammar: GrammarArg, defines: Option<Vec<String>>) -> PyResult<Bound<'py, PyAny>> {
    let p = parsed(text, &grammar)?;
    let activity = define_set(defines).map(|d| core::conditional_activity(&p.tree, &d));
    let rects = core::editor_rects_with_activity(&p.tree, &p.source, &core::Palette::default(), activity.as_ref())
        .map_err(fail)?;
    serialize(py, &rects)
}

/// Active flag per conditional region, keyed by block id.
#[pyfunction]
fn activity<'py>(py: Python<'py>, text: &str, grammar: GrammarArg, defines: Vec<String>) -> PyResult<Bound<'py, PyAny>> {
    let p = parsed(text, &grammar)?;
    let map = core::conditional_activity(&p.tree, &defines.into_iter().collect());
    if let Some(e) = map.errors.first() {
        return Err(BricsError::new_err(("E_EXPR".to_string(), e.message.clone())));
    }
    let dict = PyDict::new(py);
    for (id, active) in map.active {
        dict.set_item(id, active)?;
    }
    Ok(dict.into_any())
}

#[pyfunction]
#[pyo3(signature = (text, grammar, width, height, granularity, zoom=None, errors=None, defines=None))]
#[allow(clippy::too_many_arguments)]
fn overview<'py>(
    py: Python<'py>,
    text: &str,
    grammar: GrammarArg,
    width: u32,
    height: u32,
    granularity: usize,
    zoom: Option<(usize, usize)>,
    errors: Option<Vec<usize>>,
    defines: Option<Vec<String>>,
) -> PyResult<Bound<'py, PyAny>> {
    let p = parsed(text, &grammar)?;
    let activity = define_set(defines).map(|d| core::conditional_activity(&p.tree, &d));
    let params = core::OverviewParams { view_width: width, view_height: height, granularity, zoom };
    let model = core::overview_model(&p.tree, &p.source, params, &core::Palette::default(), activity.as_ref())
        .map_err(fail)?;
    let lines = errors.unwrap_or_else(|| p.diagnostics.iter().map(|d| d.pos.line).collect());
    serialize(py, &core::mark_errors(model, &lines))
}

/// Input and output variables of a block: `{"inputs": [...], "outputs": [...]}`.
#[pyfunction]
fn dependencies<'py>(py: Python<'py>, text: &str, grammar: GrammarArg, block_id: usize) -> PyResult<Bound<'py, PyAny>> {
    let p = parsed(text, &grammar)?;
    let deps = core::block_dependencies(&p.source, &p.grammar, &p.tree, block_id).map_err(fail)?;
    serialize(py, &deps)
}

/// Extracts a block into a new method named `name`.
#[pyfunction]
fn extract<'py>(py: Python<'py>, text: &str, grammar: GrammarArg, block_id: usize, name: &str) -> PyResult<Bound<'py, PyAny>> {
    let p = parsed(text, &grammar)?;
    let result = core::extract_block(&p.source, &p.grammar, &p.tree, block_id, name).map_err(fail)?;
    serialize(py, &result)
}

#[pyfunction]
fn folds<'py>(py: Python<'py>, text: &str, grammar: GrammarArg, granularity: usize) -> PyResult<Bound<'py, PyAny>> {
    let p = parsed(text, &grammar)?;
    serialize(py, &core::fold_spans(&p.tree, granularity))
}

#[pyfunction]
#[pyo3(signature = (text, grammar, fold=None))]
fn render_svg(text: &str, grammar: GrammarArg, fold: Option<usize>) -> PyResult<String> {
    let p = parsed(text, &grammar)?;
    let rects = core::editor_rects(&p.tree, &p.source, &core::Palette::default()).map_err(fail)?;
    let folds = fold.map(|g| core::fold_spans(&p.tree, g)).unwrap_or_default();
    Ok(core::render_svg(&rects, &folds, &p.source))
}

#[pyfunction]
fn render_ansi(text: &str, grammar: GrammarArg) -> PyResult<String> {
    let p = parsed(text, &grammar)?;
    let rects = core::editor_rects(&p.tree, &p.source, &core::Palette::default()).map_err(fail)?;
    Ok(core::render_ansi(&rects, &p.source))
}

#[pyfunction]
fn digest(text: &str) -> String {
    core::digest(text)
}

fn snapshot_dict<'py>(py: Python<'py>, snap: &core::Snapshot) -> PyResult<Bound<'py, PyAny>> {
    serialize(
        py,
        &serde_json::json!({
            "version": snap.version,
            "digest": snap.digest,
            "text": snap.text(),
            "tree": snap.tree,
            "diagnostics": snap.diagnostics,
        }),
    )
}

/// An edited document. Every edit reparses and notifies subscribers in version order.
#[pyclass(frozen, module = "brics")]
struct Session {
    inner: Arc<core::Session>,
}

#[pymethods]
impl Session {
    #[new]
    fn new(text: String, grammar: GrammarArg) -> PyResult<Session> {
        Ok(Session { inner: Arc::new(core::Session::open(text, grammar.resolve()?)) })
    }

    #[getter]
    fn version(&self) -> u64 {
        self.inner.version()
    }

    #[getter]
    fn text(&self) -> String {
        self.inner.snapshot().text().to_string()
    }

    #[getter]
    fn digest(&self) -> String {
        self.inner.snapshot().digest.clone()
    }

    fn snapshot<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        snapshot_dict(py, &self.inner.snapshot())
    }

    /// Replaces bytes `start..end`. Raises E_STALE unless `base_version` is current.
    fn apply_edit<'py>(
        &self,
        py: Python<'py>,
        start_byte: usize,
        end_byte: usize,
        replacement: String,
        base_version: u64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let edit = core::Edit { start_byte, end_byte, replacement, base_version };
        let inner = self.inner.clone();
        let snap = py.detach(move || inner.apply_edit(&edit)).map_err(fail)?;
        snapshot_dict(py, &snap)
    }

    fn replace_all<'py>(&self, py: Python<'py>, base_version: u64, text: String) -> PyResult<Bound<'py, PyAny>> {
        let inner = self.inner.clone();
        let snap = py.detach(move || inner.replace_all(base_version, text)).map_err(fail)?;
        snapshot_dict(py, &snap)
    }

    /// Calls `callback(version, digest)` after each edit until cancelled.
    fn subscribe(&self, callback: Py<PyAny>) -> Subscription {
        let sub = self.inner.subscribe(move |snap| {
            Python::attach(|py| {
                if let Err(e) = callback.call1(py, (snap.version, snap.digest.clone())) {
                    e.write_unraisable(py, None);
                }
            })
        });
        Subscription { inner: Mutex::new(Some(sub)) }
    }

    #[getter]
    fn listener_count(&self) -> usize {
        self.inner.listener_count()
    }
}

#[pyclass(frozen, module = "brics")]
struct Subscription {
    inner: Mutex<Option<core::Subscription>>,
}

#[pymethods]
impl Subscription {
    fn cancel(&self, py: Python<'_>) {
        let sub = self.inner.lock().unwrap().take();
        py.detach(move || drop(sub));
    }
}

#[pymodule]
fn brics(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("BricsError", m.py().get_type::<BricsError>())?;
    m.add_class::<Grammar>()?;
    m.add_class::<Session>()?;
    m.add_class::<Subscription>()?;
    m.add_function(wrap_pyfunction!(check_grammar, m)?)?;
    m.add_function(wrap_pyfunction!(parse, m)?)?;
    m.add_function(wrap_pyfunction!(block_at, m)?)?;
    m.add_function(wrap_pyfunction!(rects, m)?)?;
    m.add_function(wrap_pyfunction!(activity, m)?)?;
    m.add_function(wrap_pyfunction!(overview, m)?)?;
    m.add_function(wrap_pyfunction!(dependencies, m)?)?;
    m.add_function(wrap_pyfunction!(extract, m)?)?;
    m.add_function(wrap_pyfunction!(folds, m)?)?;
    m.add_function(wrap_pyfunction!(render_svg, m)?)?;
    m.add_function(wrap_pyfunction!(render_ansi, m)?)?;
    m.add_function(wrap_pyfunction!(digest, m)?)?;
    Ok(())
}
