//! JSON documents for emitted series: the machine-readable output format.
//!
//! The document format `ckalg.series.v1` is exact end to end. Every number
//! that is not a count is a rational written as a decimal string `p` or
//! `p/q`; floats never appear. Object keys serialize in sorted order and
//! series terms in the kernel's own term order, so equal documents encode
//! to byte-identical text and decoding is lossless.

use serde_json::{json, Map, Value};

use crate::ck::{ResidualRecord, Solution};
use crate::error::{Error, Result};
use crate::multiindex::MultiIndex;
use crate::parse::parse_rational;
use crate::poly::{format_rat, Rat};
use crate::series::TruncatedSeries;

pub const SERIES_FORMAT: &str = "ckalg.series.v1";

/// A solved (or supplied) family of series with its provenance: base point,
/// certified order, residual verdicts, and optionally the original system
/// text so the document can be re-verified on its own.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesDocument {
    pub variables: usize,
    pub base: Vec<Rat>,
    pub order: u32,
    pub unknowns: Vec<(String, TruncatedSeries)>,
    pub residuals: Vec<ResidualRecord>,
    pub system: Option<String>,
}

fn doc_err(message: impl Into<String>) -> Error {
    Error::ContextMismatch(format!("series document: {}", message.into()))
}

fn as_u64(v: &Value, what: &str) -> Result<u64> {
    v.as_u64().ok_or_else(|| doc_err(format!("{what} must be a nonnegative integer")))
}

fn as_str<'a>(v: &'a Value, what: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| doc_err(format!("{what} must be a string")))
}

fn as_array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| doc_err(format!("{what} must be an array")))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| doc_err(format!("missing field `{key}`")))
}

impl SeriesDocument {
    pub fn from_solution(sol: &Solution, system: Option<String>) -> Result<Self> {
        let first = sol
            .series
            .first()
            .ok_or_else(|| doc_err("solution has no unknowns"))?;
        if sol.names.len() != sol.series.len() {
            return Err(Error::DimensionMismatch {
                expected: sol.names.len(),
                found: sol.series.len(),
            });
        }
        Ok(SeriesDocument {
            variables: first.nvars(),
            base: first.base().to_vec(),
            order: sol.order,
            unknowns: sol
                .names
                .iter()
                .cloned()
                .zip(sol.series.iter().cloned())
                .collect(),
            residuals: sol.residuals.clone(),
            system: system,
        })
    }

    pub fn solution(&self) -> Solution {
        Solution {
            names: self.unknowns.iter().map(|(n, _)| n.clone()).collect(),
            series: self.unknowns.iter().map(|(_, s)| s.clone()).collect(),
            order: self.order,
            residuals: self.residuals.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let unknowns: Vec<Value> = self
            .unknowns
            .iter()
            .map(|(name, s)| {
                let terms: Vec<Value> = s
                    .coeffs()
                    .map(|(alpha, c)| {
                        json!({
                            "alpha": alpha.entries(),
                            "value": format_rat(c),
                        })
                    })
                    .collect();
                json!({ "name": name, "terms": terms })
            })
            .collect();
        let residuals: Vec<Value> = self
            .residuals
            .iter()
            .map(|r| {
                json!({
                    "certified_order": r.certified_order,
                    "equation": r.equation,
                    "pass": r.pass,
                    "unknown": r.unknown,
                })
            })
            .collect();
        let mut root = Map::new();
        root.insert(
            "base".to_string(),
            Value::Array(self.base.iter().map(|c| json!(format_rat(c))).collect()),
        );
        root.insert("format".to_string(), json!(SERIES_FORMAT));
        root.insert("order".to_string(), json!(self.order));
        root.insert("residuals".to_string(), Value::Array(residuals));
        if let Some(sys) = &self.system {
            root.insert("system".to_string(), json!(sys));
        }
        root.insert("unknowns".to_string(), Value::Array(unknowns));
        root.insert("variables".to_string(), json!(self.variables));
        let mut text =
            serde_json::to_string_pretty(&Value::Object(root)).expect("serialization is total");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let root: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            col: e.column(),
            message: format!("invalid JSON: {e}"),
        })?;
        let obj = root
            .as_object()
            .ok_or_else(|| doc_err("top level must be an object"))?;
        let format = as_str(field(obj, "format")?, "`format`")?;
        if format != SERIES_FORMAT {
            return Err(doc_err(format!("unsupported format `{format}`")));
        }
        let variables = as_u64(field(obj, "variables")?, "`variables`")? as usize;
        let order = u32::try_from(as_u64(field(obj, "order")?, "`order`")?)
            .map_err(|_| doc_err("`order` out of range"))?;
        let base_vals = as_array(field(obj, "base")?, "`base`")?;
        if base_vals.len() != variables {
            return Err(doc_err(format!(
                "base point has {} coordinates, expected {variables}",
                base_vals.len()
            )));
        }
        let mut base = Vec::with_capacity(variables);
        for v in base_vals {
            base.push(parse_rational(as_str(v, "base coordinate")?)?);
        }
        let mut unknowns = Vec::new();
        for entry in as_array(field(obj, "unknowns")?, "`unknowns`")? {
            let entry = entry
                .as_object()
                .ok_or_else(|| doc_err("each unknown must be an object"))?;
            let name = as_str(field(entry, "name")?, "`name`")?.to_string();
            let mut series = TruncatedSeries::zero(variables, order, base.clone());
            for term in as_array(field(entry, "terms")?, "`terms`")? {
                let term = term
                    .as_object()
                    .ok_or_else(|| doc_err("each term must be an object"))?;
                let alpha_vals = as_array(field(term, "alpha")?, "`alpha`")?;
                if alpha_vals.len() != variables {
                    return Err(doc_err(format!(
                        "term index has {} entries, expected {variables}",
                        alpha_vals.len()
                    )));
                }
                let mut entries = Vec::with_capacity(variables);
                for a in alpha_vals {
                    entries.push(
                        u32::try_from(as_u64(a, "index entry")?)
                            .map_err(|_| doc_err("index entry out of range"))?,
                    );
                }
                let alpha = MultiIndex::new(entries);
                if alpha.degree() > order {
                    return Err(doc_err(format!(
                        "term of degree {} beyond certified order {order}",
                        alpha.degree()
                    )));
                }
                let value = parse_rational(as_str(field(term, "value")?, "`value`")?)?;
                series.set_coeff(alpha, value);
            }
            unknowns.push((name, series));
        }
        let mut residuals = Vec::new();
        for entry in as_array(field(obj, "residuals")?, "`residuals`")? {
            let entry = entry
                .as_object()
                .ok_or_else(|| doc_err("each residual must be an object"))?;
            residuals.push(ResidualRecord {
                equation: as_u64(field(entry, "equation")?, "`equation`")? as usize,
                unknown: as_str(field(entry, "unknown")?, "`unknown`")?.to_string(),
                certified_order: u32::try_from(as_u64(
                    field(entry, "certified_order")?,
                    "`certified_order`",
                )?)
                .map_err(|_| doc_err("`certified_order` out of range"))?,
                pass: field(entry, "pass")?
                    .as_bool()
                    .ok_or_else(|| doc_err("`pass` must be a boolean"))?,
            });
        }
        let system = match obj.get("system") {
            Some(v) => Some(as_str(v, "`system`")?.to_string()),
            None => None,
        };
        Ok(SeriesDocument {
            variables,
            base,
            order,
            unknowns,
            residuals,
            system,
        })
    }
}
