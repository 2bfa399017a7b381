//! Python bindings. Differential polynomials get a real class with
//! operator overloading; solver input and output travel as the same
//! system-file text and series-document JSON the command line uses, so
//! Python sees exactly the artifacts the other frontends produce.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use ckalg::{
    format_derivative_var, format_diffpoly, parse_diffpoly, parse_rational, pipeline,
    MultiIndex, Rat, SeriesDocument, SystemFile, TruncatedSeries,
};

create_exception!(
    ckalg_py,
    CkalgError,
    PyException,
    "Raised for every kernel error; the message starts with the stable error kind."
);

fn raise(e: ckalg::Error) -> PyErr {
    CkalgError::new_err(format!("{}: {e}", e.kind()))
}

fn ctx_err(message: &str) -> PyErr {
    CkalgError::new_err(format!("context-mismatch: {message}"))
}

fn parse_point(point: Option<Vec<String>>) -> PyResult<Option<Vec<Rat>>> {
    let Some(entries) = point else { return Ok(None) };
    let mut out = Vec::with_capacity(entries.len());
    for e in &entries {
        out.push(parse_rational(e).map_err(raise)?);
    }
    Ok(Some(out))
}

fn load_system(text: &str) -> PyResult<SystemFile> {
    SystemFile::parse(text).map_err(raise)
}

/// A differential polynomial in named unknowns over Q(z1..zm).
#[pyclass(name = "DiffPoly", frozen)]
struct PyDiffPoly {
    inner: ckalg::DiffPoly,
    names: Vec<String>,
}

impl PyDiffPoly {
    fn same_context(&self, other: &PyDiffPoly) -> PyResult<()> {
        if self.names != other.names
            || self.inner.derivations() != other.inner.derivations()
        {
            return Err(ctx_err(
                "operands come from different derivation/unknown contexts",
            ));
        }
        Ok(())
    }
}

#[pymethods]
impl PyDiffPoly {
    /// Parse text like "d1^2 u - z1*(d2 u)^3" in the given context.
    #[staticmethod]
    fn parse(text: &str, derivations: usize, names: Vec<String>) -> PyResult<Self> {
        let inner = parse_diffpoly(text, derivations, &names).map_err(raise)?;
        Ok(PyDiffPoly { inner, names })
    }

    #[getter]
    fn derivations(&self) -> usize {
        self.inner.derivations()
    }

    #[getter]
    fn unknown_names(&self) -> Vec<String> {
        self.names.clone()
    }

    /// Apply the derivation d<i> (1-based, matching the syntax).
    fn derive(&self, i: usize) -> PyResult<Self> {
        if i == 0 || i > self.inner.derivations() {
            return Err(ctx_err("derivation index out of range"));
        }
        Ok(PyDiffPoly {
            inner: self.inner.derive(i - 1),
            names: self.names.clone(),
        })
    }

    /// The grlex-largest derivative of the unknown, as printed text.
    fn leader(&self, unknown: &str) -> PyResult<String> {
        let j = self
            .names
            .iter()
            .position(|n| n == unknown)
            .ok_or_else(|| ctx_err("unknown name not in this context"))?;
        let v = self.inner.leader(j).map_err(raise)?;
        Ok(format_derivative_var(&v, &self.names))
    }

    /// Partial derivative with respect to the unknown's leader.
    fn separant(&self, unknown: &str) -> PyResult<Self> {
        let j = self
            .names
            .iter()
            .position(|n| n == unknown)
            .ok_or_else(|| ctx_err("unknown name not in this context"))?;
        Ok(PyDiffPoly {
            inner: self.inner.separant(j).map_err(raise)?,
            names: self.names.clone(),
        })
    }

    fn __add__(&self, other: &PyDiffPoly) -> PyResult<Self> {
        self.same_context(other)?;
        Ok(PyDiffPoly {
            inner: self.inner.add(&other.inner),
            names: self.names.clone(),
        })
    }

    fn __sub__(&self, other: &PyDiffPoly) -> PyResult<Self> {
        self.same_context(other)?;
        Ok(PyDiffPoly {
            inner: self.inner.sub(&other.inner),
            names: self.names.clone(),
        })
    }

    fn __mul__(&self, other: &PyDiffPoly) -> PyResult<Self> {
        self.same_context(other)?;
        Ok(PyDiffPoly {
            inner: self.inner.mul(&other.inner),
            names: self.names.clone(),
        })
    }

    fn __pow__(&self, e: u32, modulo: Option<u32>) -> PyResult<Self> {
        if modulo.is_some() {
            return Err(ctx_err("modular exponentiation is not defined"));
        }
        Ok(PyDiffPoly {
            inner: self.inner.pow(e),
            names: self.names.clone(),
        })
    }

    fn __neg__(&self) -> Self {
        PyDiffPoly {
            inner: self.inner.neg(),
            names: self.names.clone(),
        }
    }

    fn __eq__(&self, other: &PyDiffPoly) -> bool {
        self.names == other.names && self.inner == other.inner
    }

    fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }

    fn __str__(&self) -> String {
        format_diffpoly(&self.inner, &self.names)
    }

    fn __repr__(&self) -> String {
        format!("DiffPoly({:?})", format_diffpoly(&self.inner, &self.names))
    }
}

/// One unknown's truncated series, extracted from a series document.
#[pyclass(name = "Series", frozen)]
struct PySeries {
    inner: TruncatedSeries,
}

#[pymethods]
impl PySeries {
    /// Pull the series of `name` out of a series-document JSON string.
    #[staticmethod]
    fn from_document(document: &str, name: &str) -> PyResult<Self> {
        let doc = SeriesDocument::from_json(document).map_err(raise)?;
        for (n, s) in &doc.unknowns {
            if n == name {
                return Ok(PySeries { inner: s.clone() });
            }
        }
        Err(ctx_err("no series with that name in the document"))
    }

    #[getter]
    fn order(&self) -> u32 {
        self.inner.order()
    }

    #[getter]
    fn variables(&self) -> usize {
        self.inner.nvars()
    }

    #[getter]
    fn base(&self) -> Vec<String> {
        self.inner.base().iter().map(|c| c.to_string()).collect()
    }

    /// Taylor coefficient at the multi-index, as an exact rational string.
    fn coeff(&self, alpha: Vec<u32>) -> PyResult<String> {
        if alpha.len() != self.inner.nvars() {
            return Err(ctx_err("multi-index length must match the variables"));
        }
        if alpha.iter().sum::<u32>() > self.inner.order() {
            return Err(ctx_err("multi-index degree exceeds the certified order"));
        }
        Ok(self.inner.coeff(&MultiIndex::new(alpha)).to_string())
    }

    fn __eq__(&self, other: &PySeries) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "Series(variables={}, order={})",
            self.inner.nvars(),
            self.inner.order()
        )
    }
}

/// Solve a system file; returns series-document JSON.
#[pyfunction]
#[pyo3(signature = (system, order=None, point=None))]
fn solve(system: &str, order: Option<u32>, point: Option<Vec<String>>) -> PyResult<String> {
    let file = load_system(system)?;
    let point = parse_point(point)?;
    Ok(pipeline::solve(&file, order, point).map_err(raise)?.to_json())
}

/// Extend a lower-dimensional solution document by one variable.
#[pyfunction]
#[pyo3(signature = (system, lower, order=None, point=None))]
fn extend(
    system: &str,
    lower: &str,
    order: Option<u32>,
    point: Option<Vec<String>>,
) -> PyResult<String> {
    let file = load_system(system)?;
    let lower = SeriesDocument::from_json(lower).map_err(raise)?;
    let point = parse_point(point)?;
    Ok(pipeline::extend(&file, &lower, order, point)
        .map_err(raise)?
        .to_json())
}

/// Recheck a document's residuals; returns the textual pass report.
#[pyfunction]
fn verify(document: &str) -> PyResult<String> {
    let doc = SeriesDocument::from_json(document).map_err(raise)?;
    pipeline::verify(&doc).map_err(raise)
}

/// Leader/order/separant report for the file's relation.
#[pyfunction]
fn separant_report(system: &str) -> PyResult<String> {
    pipeline::separant_report(&load_system(system)?).map_err(raise)
}

/// Search for a unimodular derivation change making the relations
/// integral on their witnesses.
#[pyfunction]
#[pyo3(signature = (system, lambda_bound=None))]
fn change_derivations(system: &str, lambda_bound: Option<i64>) -> PyResult<String> {
    pipeline::change_derivations(&load_system(system)?, lambda_bound).map_err(raise)
}

/// Rewrite the file's expr lines modulo its relation.
#[pyfunction]
fn reduce(system: &str) -> PyResult<String> {
    pipeline::reduce(&load_system(system)?).map_err(raise)
}

/// Expand the file's expr lines (coefficient functions) as series JSON.
#[pyfunction]
#[pyo3(signature = (system, order=None, point=None))]
fn expand(system: &str, order: Option<u32>, point: Option<Vec<String>>) -> PyResult<String> {
    let file = load_system(system)?;
    let point = parse_point(point)?;
    Ok(pipeline::expand(&file, order, point)
        .map_err(raise)?
        .to_json())
}

#[pymodule]
fn ckalg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDiffPoly>()?;
    m.add_class::<PySeries>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(extend, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(separant_report, m)?)?;
    m.add_function(wrap_pyfunction!(change_derivations, m)?)?;
    m.add_function(wrap_pyfunction!(reduce, m)?)?;
    m.add_function(wrap_pyfunction!(expand, m)?)?;
    m.add("CkalgError", m.py().get_type::<CkalgError>())?;
    m.add("SERIES_FORMAT", ckalg::SERIES_FORMAT)?;
    Ok(())
}
