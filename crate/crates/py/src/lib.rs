//! Python bindings: parse, compile, run, back-translate and check from Python.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyList;
use serde_json::Value as Json;

use scwb_core::backtrans;
use scwb_core::compiler::compile_program;
use scwb_core::counterexamples::{run_demo, DemoOptions, DEMOS};
use scwb_core::criteria::{check_criterion, Bounds, CriterionId, LtLd, Targets};
use scwb_core::monitor::{dense_bounded_check, MonitorSpec, PropVerdict};
use scwb_core::sexp::ParseError as CoreParseError;
use scwb_core::source::{self, parse_src_context, parse_src_iface, parse_src_program, Iface, SrcContext, SrcProgram};
use scwb_core::target::{self, parse_tgt_context, parse_tgt_program, TgtContext, TgtProgram};
use scwb_core::trace::{Event, TracePrefix};
use scwb_core::trace_json::{end_to_json, trace_from_json, trace_from_jsonl, trace_to_json, trace_to_jsonl};

create_exception!(scwb, ParseError, PyValueError, "Malformed program, context, interface or trace text.");

fn parse_err(e: CoreParseError) -> PyErr {
    ParseError::new_err(format!("{}:{}: expected {}", e.line, e.col, e.expected))
}

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Converts a JSON value into the matching Python object.
fn to_py(py: Python<'_>, j: &Json) -> PyResult<PyObject> {
    let json = py.import_bound("json")?;
    Ok(json.call_method1("loads", (j.to_string(),))?.unbind())
}

fn from_py(py: Python<'_>, obj: &Bound<'_, PyAny>) -> PyResult<Json> {
    let json = py.import_bound("json")?;
    let text: String = json.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(value_err)
}

/// A typed interface, e.g. `(iface (f (-> nat nat)))`.
#[pyclass(name = "Iface", module = "scwb", frozen)]
#[derive(Clone)]
struct PyIface(Iface);

#[pymethods]
impl PyIface {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        parse_src_iface(text).map(PyIface).map_err(parse_err)
    }

    #[getter]
    fn names(&self) -> Vec<String> {
        self.0.names()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Iface({:?})", self.0.to_string())
    }
}

#[pyclass(name = "SrcProgram", module = "scwb", frozen)]
#[derive(Clone)]
struct PySrcProgram(SrcProgram);

#[pymethods]
impl PySrcProgram {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        parse_src_program(text).map(PySrcProgram).map_err(parse_err)
    }

    #[getter]
    fn iface(&self) -> PyIface {
        PyIface(self.0.iface.clone())
    }

    /// Compiles to the untyped target language, inserting argument checks.
    fn compile(&self) -> PyResult<PyTgtProgram> {
        compile_program(&self.0).map(PyTgtProgram).map_err(value_err)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("SrcProgram({:?})", self.0.to_string())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

#[pyclass(name = "TgtProgram", module = "scwb", frozen)]
#[derive(Clone)]
struct PyTgtProgram(TgtProgram);

#[pymethods]
impl PyTgtProgram {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        parse_tgt_program(text).map(PyTgtProgram).map_err(parse_err)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("TgtProgram({:?})", self.0.to_string())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

#[pyclass(name = "SrcContext", module = "scwb", frozen)]
#[derive(Clone)]
struct PySrcContext(SrcContext);

#[pymethods]
impl PySrcContext {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        parse_src_context(text).map(PySrcContext).map_err(parse_err)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("SrcContext({:?})", self.0.to_string())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

#[pyclass(name = "TgtContext", module = "scwb", frozen)]
#[derive(Clone)]
struct PyTgtContext(TgtContext);

#[pymethods]
impl PyTgtContext {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        parse_tgt_context(text).map(PyTgtContext).map_err(parse_err)
    }

    /// The source context that simulates this one against programs of `iface`.
    fn backtranslate(&self, iface: &PyIface) -> PyResult<PySrcContext> {
        backtrans::backtranslate_ctx(&self.0, &iface.0).map(PySrcContext).map_err(value_err)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("TgtContext({:?})", self.0.to_string())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

/// A finite trace prefix with its terminal mark.
#[pyclass(name = "Trace", module = "scwb", frozen)]
#[derive(Clone)]
struct PyTrace(TracePrefix);

#[pymethods]
impl PyTrace {
    /// Decodes JSON-lines text, one event or terminal mark per line.
    #[staticmethod]
    fn from_jsonl(text: &str) -> PyResult<Self> {
        trace_from_jsonl(text).map(PyTrace).map_err(|e| ParseError::new_err(e.to_string()))
    }

    /// Decodes a list of event dicts ending in a terminal mark.
    #[staticmethod]
    fn from_json(py: Python<'_>, items: &Bound<'_, PyAny>) -> PyResult<Self> {
        trace_from_json(&from_py(py, items)?).map(PyTrace).map_err(|e| ParseError::new_err(e.to_string()))
    }

    fn to_json(&self, py: Python<'_>) -> PyResult<PyObject> {
        to_py(py, &trace_to_json(&self.0))
    }

    fn to_jsonl(&self) -> String {
        trace_to_jsonl(&self.0)
    }

    #[getter]
    fn events(&self) -> Vec<String> {
        self.0.events.iter().map(Event::to_string).collect()
    }

    /// The terminal mark as a dict, e.g. `{"end": "term"}`.
    #[getter]
    fn end(&self, py: Python<'_>) -> PyResult<PyObject> {
        to_py(py, &end_to_json(&self.0.end))
    }

    #[getter]
    fn terminating(&self) -> bool {
        self.0.is_terminating()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Trace({:?})", self.0.to_string())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

/// Runs `context[program]` in the source language.
#[pyfunction]
#[pyo3(signature = (program, context, inputs=vec![], budget=1000, informative=false))]
fn run_src(program: &PySrcProgram, context: &PySrcContext, inputs: Vec<u64>, budget: u64, informative: bool) -> PyResult<PyTrace> {
    let w = source::link(&program.0, &context.0).map_err(value_err)?;
    Ok(PyTrace(source::run(&w, &inputs, budget, informative).trace))
}

/// Runs `context[program]` in the target language.
#[pyfunction]
#[pyo3(signature = (program, context, inputs=vec![], budget=1000, informative=false))]
fn run_tgt(program: &PyTgtProgram, context: &PyTgtContext, inputs: Vec<u64>, budget: u64, informative: bool) -> PyResult<PyTrace> {
    let w = target::link(&program.0, &context.0).map_err(value_err)?;
    Ok(PyTrace(target::run(&w, &inputs, budget, informative).trace))
}

/// Back-translates one target context from its runs against several programs
/// and reports every stage of the reconstruction as a dict.
#[pyfunction]
#[pyo3(signature = (programs, context, inputs=vec![vec![]], budget=1000))]
fn verify_rfrxc(
    py: Python<'_>,
    programs: Vec<PySrcProgram>,
    context: &PyTgtContext,
    inputs: Vec<Vec<u64>>,
    budget: u64,
) -> PyResult<PyObject> {
    let ps: Vec<SrcProgram> = programs.into_iter().map(|p| p.0).collect();
    let r = backtrans::verify_rfrxc(&ps, &context.0, &inputs, budget).map_err(value_err)?;
    to_py(py, &r.to_json())
}

/// Checks a criterion on the typed-to-untyped chain. Without `targets`, target
/// contexts are enumerated up to `ctx_size`.
#[pyfunction]
#[pyo3(signature = (criterion, programs, targets=None, ctx_size=3, input_len=2, budget=2000, domain=vec![0, 1, 2]))]
#[allow(clippy::too_many_arguments)]
fn check(
    py: Python<'_>,
    criterion: &str,
    programs: Vec<PySrcProgram>,
    targets: Option<Vec<PyTgtContext>>,
    ctx_size: usize,
    input_len: usize,
    budget: u64,
    domain: Vec<u64>,
) -> PyResult<PyObject> {
    let id: CriterionId = criterion.parse().map_err(value_err)?;
    let ps: Vec<SrcProgram> = programs.into_iter().map(|p| p.0).collect();
    let targets = match targets {
        Some(ts) => Targets::Given(ts.into_iter().map(|t| t.0).collect()),
        None => Targets::Enumerate,
    };
    let bounds = Bounds { ctx_size, input_len, budget, domain };
    let v = py.allow_threads(|| check_criterion(&LtLd, id, &ps, targets, &bounds)).map_err(value_err)?;
    to_py(py, &v.to_json())
}

/// Runs a separation demo and returns its report as a dict.
#[pyfunction]
#[pyo3(signature = (name, k=2, depth=8))]
fn demo(py: Python<'_>, name: &str, k: usize, depth: usize) -> PyResult<PyObject> {
    let r = py.allow_threads(|| run_demo(name, &DemoOptions { k, depth })).map_err(value_err)?;
    to_py(py, &r.to_json())
}

/// Classifies a monitor description such as `{"kind": "never_event", "event": {"ev": "wr", "n": 1}}`.
#[pyfunction]
#[pyo3(signature = (spec, depth=4))]
fn classify(py: Python<'_>, spec: &Bound<'_, PyAny>, depth: usize) -> PyResult<PyObject> {
    let spec = MonitorSpec::from_json(&from_py(py, spec)?).map_err(value_err)?;
    let m = spec.build();
    let alphabet = [Event::Write(0), Event::Write(1)];
    let dense = dense_bounded_check(&m, depth, &alphabet).verdict != PropVerdict::Reject;
    let report = serde_json::json!({"monitor": m.name, "safety": m.is_safety(), "dense": dense});
    to_py(py, &report)
}

#[pymodule]
fn scwb(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ParseError", m.py().get_type_bound::<ParseError>())?;
    m.add("DEMOS", PyList::new_bound(m.py(), DEMOS))?;
    m.add_class::<PyIface>()?;
    m.add_class::<PySrcProgram>()?;
    m.add_class::<PyTgtProgram>()?;
    m.add_class::<PySrcContext>()?;
    m.add_class::<PyTgtContext>()?;
    m.add_class::<PyTrace>()?;
    m.add_function(wrap_pyfunction!(run_src, m)?)?;
    m.add_function(wrap_pyfunction!(run_tgt, m)?)?;
    m.add_function(wrap_pyfunction!(verify_rfrxc, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(demo, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    Ok(())
}
