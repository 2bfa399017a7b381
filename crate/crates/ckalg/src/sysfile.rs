//! Line-oriented system files: the text input format of the command-line
//! tools.
//!
//! A file is a sequence of directives, one per line; blank lines and lines
//! starting with `#` are ignored. Expressions use the syntax of
//! [`crate::parse`].
//!
//! ```text
//! derivations 2            # number of commuting derivations (required first)
//! unknown u w              # unknown function names, in order
//! eq d1^2 u = d2^2 u       # normal-form equation; left side is d1^r <name>
//! relation (d1 x)^2 - 4*x  # a relation in a single unknown, alternative to eq
//! init u 0: z2^2           # slice k of an unknown: (d1^k u) restricted to z1 = w1
//! point 0 0                # base point w (defaults to the origin)
//! order 8                  # requested truncation order
//! lambda-search-bound 3    # search radius for derivation changes
//! witness x: z2            # formal solution used to certify a relation
//! expr d1 x + x            # free-standing operand for reduce/expand
//! ```
//!
//! The slice expressions are written in the ambient coordinates `z2..zm`
//! and must not involve `z1`; they describe functions on the hyperplane
//! z1 = w1.

use std::collections::BTreeMap;

use crate::ck::PDESystem;
use crate::diffpoly::{DiffPoly, DiffRationalFunction};
use crate::error::{Error, Result};
use crate::parse::{is_reserved_name, parse_coefficient, parse_diff_rational, parse_diffpoly,
    parse_rational};
use crate::poly::Rat;
use crate::ratfunc::RatFunc;

#[derive(Debug, Clone)]
pub struct SystemFile {
    pub m: usize,
    pub names: Vec<String>,
    /// Per unknown: declared left-side order and right-side expression.
    pub equations: Vec<Option<(u32, DiffRationalFunction)>>,
    /// Per unknown: a relation given instead of an explicit equation.
    pub relations: Vec<Option<DiffPoly>>,
    /// Per unknown: slice index k -> closed-form slice in z2..zm.
    pub inits: Vec<BTreeMap<u32, RatFunc>>,
    /// Per unknown: closed-form formal solution for certification searches.
    pub witnesses: Vec<Option<RatFunc>>,
    /// Free-standing expressions with their line numbers, in file order.
    pub exprs: Vec<(usize, String)>,
    pub point: Option<Vec<Rat>>,
    pub order: Option<u32>,
    pub lambda_bound: Option<i64>,
    /// The verbatim file text, embedded into emitted documents.
    pub source: String,
}

fn perr(line: usize, col: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        col,
        message: message.into(),
    }
}

/// Rebase an error produced while parsing an expression substring so that
/// its position refers to the enclosing file.
fn at_line(err: Error, line: usize, col_offset: usize) -> Error {
    match err {
        Error::Parse { col, message, .. } => perr(line, col + col_offset - 1, message),
        other => perr(line, col_offset, other.to_string()),
    }
}

fn ident_ok(name: &str) -> bool {
    let mut it = name.chars();
    it.next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// The left side of an `eq` directive must be a single power of d1 applied
/// to an unknown with unit coefficient.
fn lhs_shape(p: &DiffPoly) -> Option<(usize, u32)> {
    let vars = p.vars();
    if vars.len() != 1 {
        return None;
    }
    let v = vars.iter().next().unwrap().clone();
    let r = v.index.get(0);
    if r == 0 || v.index.degree() != r {
        return None;
    }
    let expected = DiffPoly::var(p.derivations(), p.unknowns(), v.unknown, v.index.clone());
    (*p == expected).then_some((v.unknown, r))
}

impl SystemFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut file = SystemFile {
            m: 0,
            names: Vec::new(),
            equations: Vec::new(),
            relations: Vec::new(),
            inits: Vec::new(),
            witnesses: Vec::new(),
            exprs: Vec::new(),
            point: None,
            order: None,
            lambda_bound: None,
            source: text.to_string(),
        };
        let mut have_m = false;
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let stmt = raw.trim();
            if stmt.is_empty() || stmt.starts_with('#') {
                continue;
            }
            let indent = raw.chars().take_while(|c| c.is_whitespace()).count();
            let (word, rest) = stmt
                .split_once(char::is_whitespace)
                .unwrap_or((stmt, ""));
            let payload = rest.trim_start();
            // 1-based column where the payload starts in the raw line; the
            // statement is right-trimmed, so a nonempty rest means exactly
            // one separator char was consumed by the split.
            let sep = usize::from(!rest.is_empty());
            let ws = rest.chars().count() - payload.chars().count();
            let pcol = indent + word.chars().count() + sep + ws + 1;
            if !have_m && word != "derivations" {
                return Err(perr(
                    lineno,
                    1,
                    format!("directive `{word}` before `derivations`"),
                ));
            }
            match word {
                "derivations" => {
                    if have_m {
                        return Err(perr(lineno, 1, "duplicate `derivations` directive"));
                    }
                    let m: usize = payload
                        .parse()
                        .map_err(|_| perr(lineno, pcol, "expected a positive derivation count"))?;
                    if m == 0 {
                        return Err(perr(lineno, pcol, "expected a positive derivation count"));
                    }
                    file.m = m;
                    have_m = true;
                }
                "unknown" => {
                    if payload.split_whitespace().next().is_none() {
                        return Err(perr(lineno, pcol, "expected at least one unknown name"));
                    }
                    for name in payload.split_whitespace() {
                        if !ident_ok(name) {
                            return Err(perr(lineno, pcol, format!("bad unknown name `{name}`")));
                        }
                        if is_reserved_name(name) {
                            return Err(perr(
                                lineno,
                                pcol,
                                format!("`{name}` is reserved for derivations/coordinates"),
                            ));
                        }
                        if file.names.iter().any(|s| s == name) {
                            return Err(perr(
                                lineno,
                                pcol,
                                format!("duplicate unknown name `{name}`"),
                            ));
                        }
                        file.names.push(name.to_string());
                        file.equations.push(None);
                        file.relations.push(None);
                        file.inits.push(BTreeMap::new());
                        file.witnesses.push(None);
                    }
                }
                "eq" => {
                    let Some((lhs, rhs)) = payload.split_once('=') else {
                        return Err(perr(lineno, pcol, "expected `<lhs> = <rhs>`"));
                    };
                    let lp = parse_diffpoly(lhs, file.m, &file.names)
                        .map_err(|e| at_line(e, lineno, pcol))?;
                    let Some((j, r)) = lhs_shape(&lp) else {
                        return Err(perr(
                            lineno,
                            pcol,
                            "left side must be d1^r applied to an unknown",
                        ));
                    };
                    let rhs_col = pcol + lhs.chars().count() + 1;
                    let rp = parse_diff_rational(rhs, file.m, &file.names)
                        .map_err(|e| at_line(e, lineno, rhs_col))?;
                    if file.equations[j].is_some() || file.relations[j].is_some() {
                        return Err(perr(
                            lineno,
                            1,
                            format!("unknown `{}` already has an equation", file.names[j]),
                        ));
                    }
                    file.equations[j] = Some((r, rp));
                }
                "relation" => {
                    let p = parse_diffpoly(payload, file.m, &file.names)
                        .map_err(|e| at_line(e, lineno, pcol))?;
                    let mut used: Vec<usize> =
                        p.vars().iter().map(|v| v.unknown).collect();
                    used.dedup();
                    let &[j] = used.as_slice() else {
                        return Err(perr(
                            lineno,
                            pcol,
                            "a relation must involve exactly one unknown",
                        ));
                    };
                    if file.equations[j].is_some() || file.relations[j].is_some() {
                        return Err(perr(
                            lineno,
                            1,
                            format!("unknown `{}` already has an equation", file.names[j]),
                        ));
                    }
                    file.relations[j] = Some(p);
                }
                "init" => {
                    let Some((head, expr)) = payload.split_once(':') else {
                        return Err(perr(lineno, pcol, "expected `init <name> <k>: <expr>`"));
                    };
                    let parts: Vec<&str> = head.split_whitespace().collect();
                    let [name, k_text] = parts[..] else {
                        return Err(perr(lineno, pcol, "expected `init <name> <k>: <expr>`"));
                    };
                    let Some(j) = file.names.iter().position(|s| s == name) else {
                        return Err(perr(lineno, pcol, format!("unknown `{name}` not declared")));
                    };
                    let k: u32 = k_text
                        .parse()
                        .map_err(|_| perr(lineno, pcol, "expected a slice index"))?;
                    let expr_col = pcol + head.chars().count() + 1;
                    let f = parse_coefficient(expr, file.m)
                        .map_err(|e| at_line(e, lineno, expr_col))?;
                    if file.inits[j].insert(k, f).is_some() {
                        return Err(perr(
                            lineno,
                            1,
                            format!("duplicate init slice {k} for `{name}`"),
                        ));
                    }
                }
                "witness" => {
                    let Some((head, expr)) = payload.split_once(':') else {
                        return Err(perr(lineno, pcol, "expected `witness <name>: <expr>`"));
                    };
                    let name = head.trim();
                    let Some(j) = file.names.iter().position(|s| s == name) else {
                        return Err(perr(lineno, pcol, format!("unknown `{name}` not declared")));
                    };
                    let expr_col = pcol + head.chars().count() + 1;
                    let f = parse_coefficient(expr, file.m)
                        .map_err(|e| at_line(e, lineno, expr_col))?;
                    if file.witnesses[j].replace(f).is_some() {
                        return Err(perr(lineno, 1, format!("duplicate witness for `{name}`")));
                    }
                }
                "point" => {
                    if file.point.is_some() {
                        return Err(perr(lineno, 1, "duplicate `point` directive"));
                    }
                    let mut coords = Vec::new();
                    for piece in payload
                        .split(|c: char| c == ',' || c.is_whitespace())
                        .filter(|s| !s.is_empty())
                    {
                        coords.push(
                            parse_rational(piece).map_err(|e| at_line(e, lineno, pcol))?,
                        );
                    }
                    if coords.len() != file.m {
                        return Err(perr(
                            lineno,
                            pcol,
                            format!("expected {} coordinates, found {}", file.m, coords.len()),
                        ));
                    }
                    file.point = Some(coords);
                }
                "order" => {
                    if file.order.is_some() {
                        return Err(perr(lineno, 1, "duplicate `order` directive"));
                    }
                    let n: u32 = payload
                        .parse()
                        .map_err(|_| perr(lineno, pcol, "expected a truncation order"))?;
                    file.order = Some(n);
                }
                "lambda-search-bound" => {
                    if file.lambda_bound.is_some() {
                        return Err(perr(lineno, 1, "duplicate `lambda-search-bound` directive"));
                    }
                    let b: i64 = payload.parse().map_err(|_| {
                        perr(lineno, pcol, "expected a nonnegative search bound")
                    })?;
                    if b < 0 {
                        return Err(perr(lineno, pcol, "expected a nonnegative search bound"));
                    }
                    file.lambda_bound = Some(b);
                }
                "expr" => {
                    if payload.is_empty() {
                        return Err(perr(lineno, pcol, "expected an expression"));
                    }
                    file.exprs.push((lineno, payload.to_string()));
                }
                other => {
                    return Err(perr(lineno, 1, format!("unknown directive `{other}`")));
                }
            }
        }
        if !have_m {
            return Err(perr(1, 1, "missing `derivations` directive"));
        }
        Ok(file)
    }

    /// Base point, defaulting to the origin.
    pub fn base_point(&self) -> Vec<Rat> {
        self.point
            .clone()
            .unwrap_or_else(|| vec![Rat::from_integer(0.into()); self.m])
    }

    /// Assemble the normal-form system; every unknown needs an `eq` line.
    pub fn pde_system(&self) -> Result<PDESystem> {
        let mut eqs = Vec::with_capacity(self.names.len());
        for (j, e) in self.equations.iter().enumerate() {
            match e {
                Some(pair) => eqs.push(pair.clone()),
                None => {
                    return Err(Error::Underdetermined(format!(
                        "no equation for unknown `{}`",
                        self.names[j]
                    )))
                }
            }
        }
        PDESystem::new(self.m, self.names.clone(), eqs)
    }

    /// The file's single relation, for subcommands that operate on one.
    pub fn single_relation(&self) -> Result<(usize, DiffPoly)> {
        let mut found = None;
        for (j, r) in self.relations.iter().enumerate() {
            if let Some(p) = r {
                if found.is_some() {
                    return Err(Error::ContextMismatch(
                        "file declares more than one relation".to_string(),
                    ));
                }
                found = Some((j, p.clone()));
            }
        }
        found.ok_or_else(|| Error::Underdetermined("file declares no relation".to_string()))
    }

    /// The required truncation order, from the file or a command-line
    /// override.
    pub fn required_order(&self, flag: Option<u32>) -> Result<u32> {
        flag.or(self.order).ok_or_else(|| {
            Error::Underdetermined(
                "no truncation order given (use an `order` directive or --order)".to_string(),
            )
        })
    }
}

/// Slice expressions live on the hyperplane z1 = w1: reject any use of z1,
/// then expand around the base point and drop the first coordinate.
pub fn expand_slice(
    f: &RatFunc,
    base: &[Rat],
    order: u32,
) -> Result<crate::series::TruncatedSeries> {
    let uses_z1 = f
        .num()
        .terms()
        .chain(f.den().terms())
        .any(|(alpha, _)| alpha.get(0) > 0);
    if uses_z1 {
        return Err(Error::ContextMismatch(
            "initial-data slices must not involve z1".to_string(),
        ));
    }
    let full = crate::series::expand_ratfunc(f, base, order)?;
    full.restrict_first()
}
