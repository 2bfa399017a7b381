//! The operations behind the command-line subcommands, shared with the
//! Python bindings: each takes parsed inputs and returns either a
//! [`SeriesDocument`] or a plain-text report, so the front ends stay thin.

use crate::ck::{
    ck_solve, extend_dimension, validate_normal_form, GeneratorSpec, InitialData,
};
use crate::derivation::find_integral_change;
use crate::diffpoly::{format_derivative_var, format_diffpoly, DiffPoly};
use crate::document::SeriesDocument;
use crate::error::{Error, Result};
use crate::parse::parse_diffpoly;
use crate::poly::Rat;
use crate::reduction::{reduce_delta1, IntegralRelation};
use crate::series::{expand_ratfunc, TruncatedSeries};
use crate::sysfile::{expand_slice, SystemFile};

/// Base point for a run: a --point override wins over the file directive,
/// both checked against the derivation count.
fn resolve_point(file: &SystemFile, flag: Option<Vec<Rat>>) -> Result<Vec<Rat>> {
    match flag {
        Some(p) => {
            if p.len() != file.m {
                return Err(Error::DimensionMismatch {
                    expected: file.m,
                    found: p.len(),
                });
            }
            Ok(p)
        }
        None => Ok(file.base_point()),
    }
}

/// Expand the declared slices k = from..count for one unknown, certified
/// to `order`. Missing slices are hard errors; so are surplus ones.
fn expanded_slices(
    file: &SystemFile,
    i: usize,
    from: u32,
    count: u32,
    base: &[Rat],
    order: u32,
) -> Result<Vec<TruncatedSeries>> {
    let name = &file.names[i];
    for &k in file.inits[i].keys() {
        if k < from {
            return Err(Error::ContextMismatch(format!(
                "slice {k} of `{name}` is determined by the lower-dimensional solution"
            )));
        }
        if k >= count {
            return Err(Error::ContextMismatch(format!(
                "slice {k} of `{name}` exceeds the d1-order of its equation"
            )));
        }
    }
    let mut out = Vec::new();
    for k in from..count {
        let f = file.inits[i].get(&k).ok_or_else(|| {
            Error::Underdetermined(format!("missing initial slice {k} for `{name}`"))
        })?;
        out.push(expand_slice(f, base, order)?);
    }
    Ok(out)
}

/// Solve a normal-form system from a file: expand the closed-form initial
/// slices, run the recursion, return the document with residual verdicts
/// and the source embedded for later verification.
pub fn solve(
    file: &SystemFile,
    order: Option<u32>,
    point: Option<Vec<Rat>>,
) -> Result<SeriesDocument> {
    let sys = file.pde_system()?;
    validate_normal_form(&sys)?;
    let n_order = file.required_order(order)?;
    let base = resolve_point(file, point)?;
    let w1 = base[0].clone();

    let rmax = *sys.orders().iter().max().expect("nonempty");
    let rmin = *sys.orders().iter().min().expect("nonempty");
    let work_order = n_order + (rmax - rmin);

    let mut rows = Vec::with_capacity(sys.unknowns());
    for i in 0..sys.unknowns() {
        rows.push(expanded_slices(file, i, 0, sys.order(i), &base, work_order)?);
    }
    let init = InitialData::new(rows)?;
    let sol = ck_solve(&sys, &init, &w1, n_order)?;
    SeriesDocument::from_solution(&sol, Some(file.source.clone()))
}

/// Re-check a document against the system it embeds: every equation (or
/// relation) must have an identically zero defect on the carried series,
/// to the honestly certified order.
pub fn verify(doc: &SeriesDocument) -> Result<String> {
    let text = doc.system.as_ref().ok_or_else(|| {
        Error::Underdetermined("document carries no system text to verify against".to_string())
    })?;
    let file = SystemFile::parse(text)?;
    if doc.variables != file.m {
        return Err(Error::DimensionMismatch {
            expected: file.m,
            found: doc.variables,
        });
    }
    let doc_names: Vec<&String> = doc.unknowns.iter().map(|(n, _)| n).collect();
    if doc_names.len() != file.names.len()
        || doc_names.iter().zip(&file.names).any(|(a, b)| *a != b)
    {
        return Err(Error::ContextMismatch(format!(
            "document unknowns [{}] do not match the system's [{}]",
            doc_names
                .iter()
                .map(|s| s.as_str())
                .collect::<Vec<_>>()
                .join(", "),
            file.names.join(", ")
        )));
    }
    let series: Vec<TruncatedSeries> = doc.unknowns.iter().map(|(_, s)| s.clone()).collect();
    let n = file.names.len();
    let mut report = String::new();
    for (i, name) in file.names.iter().enumerate() {
        let defect = match (&file.equations[i], &file.relations[i]) {
            (Some((r, rhs)), None) => {
                let mut idx = vec![0u32; file.m];
                idx[0] = *r;
                let lhs = DiffPoly::var(file.m, n, i, crate::multiindex::MultiIndex::new(idx));
                lhs.mul(rhs.den()).sub(rhs.num())
            }
            (None, Some(rel)) => rel.clone(),
            _ => {
                return Err(Error::Underdetermined(format!(
                    "no equation or relation for unknown `{name}`"
                )))
            }
        };
        let value = defect.evaluate_jet(&series)?;
        if !value.is_zero() {
            return Err(Error::VerificationFailed(format!(
                "equation {} for {}: residual is nonzero at order {}",
                i + 1,
                name,
                value.order()
            )));
        }
        report.push_str(&format!(
            "equation {} for {}: residual 0 to order {}: pass\n",
            i + 1,
            name,
            value.order()
        ));
    }
    report.push_str(&format!("all {n} equation(s) pass\n"));
    Ok(report)
}

/// Extend a lower-dimensional solution along z1, one generator per
/// unknown, each given by a relation or an explicit right-hand side.
pub fn extend(
    file: &SystemFile,
    lower: &SeriesDocument,
    order: Option<u32>,
    point: Option<Vec<Rat>>,
) -> Result<SeriesDocument> {
    let n_order = file.required_order(order)?;
    let base = resolve_point(file, point)?;
    let w1 = base[0].clone();
    if file.names.is_empty() {
        return Err(Error::Underdetermined("file declares no unknowns".to_string()));
    }
    if lower.variables + 1 != file.m {
        return Err(Error::DimensionMismatch {
            expected: file.m - 1,
            found: lower.variables,
        });
    }
    if lower.base != base[1..] {
        return Err(Error::ContextMismatch(
            "the lower-dimensional solution is based at a different point".to_string(),
        ));
    }
    let lower_names: Vec<&String> = lower.unknowns.iter().map(|(n, _)| n).collect();
    if lower_names.len() != file.names.len()
        || lower_names.iter().zip(&file.names).any(|(a, b)| *a != b)
    {
        return Err(Error::ContextMismatch(format!(
            "lower-dimensional unknowns [{}] do not match the file's [{}]",
            lower_names
                .iter()
                .map(|s| s.as_str())
                .collect::<Vec<_>>()
                .join(", "),
            file.names.join(", ")
        )));
    }

    // Effective d1-order of each generator, to size the working order.
    let mut orders = Vec::with_capacity(file.names.len());
    for (i, name) in file.names.iter().enumerate() {
        let r = match (&file.equations[i], &file.relations[i]) {
            (Some((r, _)), None) => *r,
            (None, Some(rel)) => {
                let ir = IntegralRelation::new(rel.clone())?;
                if ir.is_linear_in_leader() {
                    ir.order()
                } else {
                    ir.order() + 1
                }
            }
            _ => {
                return Err(Error::Underdetermined(format!(
                    "unknown `{name}` needs a relation or an equation to extend along"
                )))
            }
        };
        orders.push(r);
    }
    let rmax = *orders.iter().max().expect("nonempty");
    let rmin = *orders.iter().min().expect("nonempty");
    let work_order = n_order + (rmax - rmin);
    if lower.order < work_order {
        return Err(Error::Underdetermined(format!(
            "lower-dimensional solution certified to order {}, but order {} is needed for an exact truncation at {}",
            lower.order, work_order, n_order
        )));
    }

    let mut specs = Vec::with_capacity(file.names.len());
    let mut lower_series = Vec::with_capacity(file.names.len());
    for (i, r) in orders.iter().enumerate() {
        let initial = expanded_slices(file, i, 1, *r, &base, work_order)?;
        let spec = match (&file.equations[i], &file.relations[i]) {
            (Some((r, rhs)), None) => GeneratorSpec::from_rhs(*r, rhs.clone(), initial),
            (None, Some(rel)) => GeneratorSpec::from_relation(rel.clone(), initial),
            _ => unreachable!("checked above"),
        };
        specs.push(spec);
        lower_series.push(lower.unknowns[i].1.truncate(work_order)?);
    }

    let mut sol = extend_dimension(&specs, &lower_series, &w1, n_order)?;
    // The kernel names generators positionally; restore the file's names.
    sol.names = file.names.clone();
    for (rec, name) in sol.residuals.iter_mut().zip(&file.names) {
        rec.unknown = name.clone();
    }
    SeriesDocument::from_solution(&sol, Some(file.source.clone()))
}

/// Report the leader, order, and separant of the file's relation, plus a
/// certification of integrality when a witness series is declared.
pub fn separant_report(file: &SystemFile) -> Result<String> {
    let (j, rel) = file.single_relation()?;
    let ir = IntegralRelation::new(rel.clone())?;
    let names = &file.names;
    let mut report = String::new();
    report.push_str(&format!("relation: {}\n", format_diffpoly(&rel, names)));
    report.push_str(&format!("unknown: {}\n", names[j]));
    report.push_str(&format!(
        "leader: {}\n",
        format_derivative_var(&ir.leader(), names)
    ));
    report.push_str(&format!("order: {}\n", ir.order()));
    report.push_str(&format!(
        "separant: {}\n",
        format_diffpoly(ir.separant(), names)
    ));
    report.push_str(&format!(
        "linear in leader: {}\n",
        if ir.is_linear_in_leader() { "yes" } else { "no" }
    ));
    if let Some(w) = &file.witnesses[j] {
        let base = file.base_point();
        let maxdeg = rel
            .vars()
            .iter()
            .map(|v| v.index.degree())
            .max()
            .unwrap_or(0);
        let order = file.order.unwrap_or(maxdeg + 2).max(maxdeg);
        let witness = expand_ratfunc(w, &base, order)?;
        report.push_str(&format!(
            "integral at witness: {}\n",
            if crate::diffpoly::is_integral(&rel, &witness) {
                "yes"
            } else {
                "no"
            }
        ));
    }
    Ok(report)
}

/// Search for an integral change of derivations for all declared
/// relations; each needs a witness series. Reports the found lambda, the
/// matrix, and the transformed relations.
pub fn change_derivations(file: &SystemFile, bound: Option<i64>) -> Result<String> {
    let base = file.base_point();
    let mut relations = Vec::new();
    let mut indices = Vec::new();
    for (j, rel) in file.relations.iter().enumerate() {
        let Some(rel) = rel else { continue };
        let w = file.witnesses[j].as_ref().ok_or_else(|| {
            Error::Underdetermined(format!(
                "relation for `{}` needs a `witness` line to certify the change",
                file.names[j]
            ))
        })?;
        let maxdeg = rel
            .vars()
            .iter()
            .map(|v| v.index.degree())
            .max()
            .unwrap_or(0);
        let order = file.order.unwrap_or(maxdeg + 2).max(maxdeg);
        relations.push((rel.clone(), expand_ratfunc(w, &base, order)?));
        indices.push(j);
    }
    if relations.is_empty() {
        return Err(Error::Underdetermined(
            "file declares no relations to transform".to_string(),
        ));
    }
    let bound = bound.or(file.lambda_bound).unwrap_or(2);
    let (lambda, mat) = find_integral_change(file.m, &relations, bound)?;
    let mut report = String::new();
    report.push_str(&format!(
        "lambda: {}\n",
        lambda
            .0
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    ));
    report.push_str("matrix:\n");
    for row in mat.rows() {
        report.push_str(&format!(
            "  {}\n",
            row.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        ));
    }
    for (&j, (rel, _)) in indices.iter().zip(&relations) {
        let transformed = crate::derivation::transform(rel, &mat)?;
        report.push_str(&format!(
            "relation for {} in the new derivations: {}\n",
            file.names[j],
            format_diffpoly(&transformed, &file.names)
        ));
    }
    Ok(report)
}

/// Rewrite every `expr` line modulo the file's relation, eliminating
/// d1-excess derivatives; reports the normal form and the separant power
/// absorbed by the rewrite.
pub fn reduce(file: &SystemFile) -> Result<String> {
    let (j, rel) = file.single_relation()?;
    let ir = IntegralRelation::new(rel.clone())?;
    if file.exprs.is_empty() {
        return Err(Error::Underdetermined(
            "no `expr` lines to reduce".to_string(),
        ));
    }
    let mut report = String::new();
    report.push_str(&format!(
        "relation: {}\n",
        format_diffpoly(&rel, &file.names)
    ));
    for (lineno, text) in &file.exprs {
        let p = parse_diffpoly(text, file.m, &file.names)?;
        if p.vars().iter().any(|v| v.unknown != j) {
            return Err(Error::ContextMismatch(format!(
                "line {lineno}: expression involves an unknown the relation does not constrain"
            )));
        }
        let (reduced, k) = reduce_delta1(&p, &ir);
        report.push_str(&format!("expr: {}\n", format_diffpoly(&p, &file.names)));
        report.push_str(&format!(
            "reduced: {}\n",
            format_diffpoly(&reduced, &file.names)
        ));
        report.push_str(&format!("separant power: {k}\n"));
    }
    Ok(report)
}

/// Expand each `expr` line (a closed-form rational function of z) as a
/// series at the base point, packaged as a document.
pub fn expand(
    file: &SystemFile,
    order: Option<u32>,
    point: Option<Vec<Rat>>,
) -> Result<SeriesDocument> {
    let n_order = file.required_order(order)?;
    let base = resolve_point(file, point)?;
    if file.exprs.is_empty() {
        return Err(Error::Underdetermined(
            "no `expr` lines to expand".to_string(),
        ));
    }
    let mut unknowns = Vec::new();
    for (_, text) in &file.exprs {
        let f = crate::parse::parse_coefficient(text, file.m)?;
        unknowns.push((text.clone(), expand_ratfunc(&f, &base, n_order)?));
    }
    Ok(SeriesDocument {
        variables: file.m,
        base,
        order: n_order,
        unknowns,
        residuals: Vec::new(),
        system: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiindex::MultiIndex;
    use crate::poly::{rat, rat_int};
    use num_traits::One;

    fn mi(entries: &[u32]) -> MultiIndex {
        MultiIndex::new(entries.to_vec())
    }

    fn factorial(k: u32) -> Rat {
        let mut f = Rat::one();
        for j in 2..=k {
            f *= Rat::from_integer(j.into());
        }
        f
    }

    #[test]
    fn solve_exponential_from_file() {
        let file = SystemFile::parse(
            "derivations 1\nunknown u\neq d1 u = u\ninit u 0: 1\npoint 0\norder 5\n",
        )
        .unwrap();
        let doc = solve(&file, None, None).unwrap();
        assert_eq!(doc.order, 5);
        let s = &doc.unknowns[0].1;
        for k in 0..=5u32 {
            assert_eq!(s.coeff(&mi(&[k])), Rat::one() / factorial(k), "k = {k}");
        }
        assert!(doc.residuals.iter().all(|r| r.pass));
        assert!(doc.system.is_some());
    }

    #[test]
    fn solve_respects_order_flag_over_directive() {
        let file = SystemFile::parse(
            "derivations 1\nunknown u\neq d1 u = u\ninit u 0: 1\norder 3\n",
        )
        .unwrap();
        let doc = solve(&file, Some(6), None).unwrap();
        assert_eq!(doc.order, 6);
    }

    #[test]
    fn solve_transport_and_wave_oracles() {
        // d1 u = d2 u with u(0, z2) = z2^2 has solution (z1 + z2)^2.
        let file = SystemFile::parse(
            "derivations 2\nunknown u\neq d1 u = d2 u\ninit u 0: z2^2\npoint 0 0\norder 6\n",
        )
        .unwrap();
        let doc = solve(&file, None, None).unwrap();
        let s = &doc.unknowns[0].1;
        assert_eq!(s.coeff(&mi(&[2, 0])), rat_int(1));
        assert_eq!(s.coeff(&mi(&[1, 1])), rat_int(2));
        assert_eq!(s.coeff(&mi(&[0, 2])), rat_int(1));
        assert_eq!(s.coeff(&mi(&[3, 0])), rat_int(0));

        // d1^2 u = d2^2 u with slices z2^2 and 0 gives z1^2 + z2^2.
        let wave = SystemFile::parse(
            "derivations 2\nunknown u\neq d1^2 u = d2^2 u\ninit u 0: z2^2\ninit u 1: 0\npoint 0 0\norder 8\n",
        )
        .unwrap();
        let wdoc = solve(&wave, None, None).unwrap();
        let w = &wdoc.unknowns[0].1;
        assert_eq!(w.coeff(&mi(&[2, 0])), rat_int(1));
        assert_eq!(w.coeff(&mi(&[0, 2])), rat_int(1));
        assert_eq!(w.coeff(&mi(&[1, 1])), rat_int(0));
        assert_eq!(w.coeff(&mi(&[4, 0])), rat_int(0));
    }

    #[test]
    fn solve_rejects_heat_equation_by_name() {
        let file = SystemFile::parse(
            "derivations 2\nunknown u\neq d1 u = d2^2 u\ninit u 0: z2\norder 4\n",
        )
        .unwrap();
        let err = solve(&file, None, None).unwrap_err();
        match err {
            Error::NormalForm { variable, .. } => assert_eq!(variable, "d2^2 u"),
            other => panic!("wrong error: {other}"),
        }
    }

    #[test]
    fn solve_reports_missing_slices() {
        let file = SystemFile::parse(
            "derivations 2\nunknown u\neq d1^2 u = d2^2 u\ninit u 0: z2^2\norder 4\n",
        )
        .unwrap();
        let err = solve(&file, None, None).unwrap_err();
        assert!(err.to_string().contains("missing initial slice 1"), "{err}");
        let extra = SystemFile::parse(
            "derivations 2\nunknown u\neq d1 u = d2 u\ninit u 0: 1\ninit u 1: 0\norder 4\n",
        )
        .unwrap();
        assert!(solve(&extra, None, None).is_err());
    }

    #[test]
    fn verify_accepts_solver_output_and_rejects_corruption() {
        let file = SystemFile::parse(
            "derivations 2\nunknown u\neq d1 u = d2 u\ninit u 0: z2^2\npoint 0 0\norder 6\n",
        )
        .unwrap();
        let doc = solve(&file, None, None).unwrap();
        let report = verify(&doc).unwrap();
        assert!(report.contains("pass"), "{report}");

        let mut bad = doc.clone();
        let mut s = bad.unknowns[0].1.clone();
        s.set_coeff(mi(&[3, 1]), rat(7, 2));
        bad.unknowns[0].1 = s;
        let err = verify(&bad).unwrap_err();
        assert_eq!(err.kind(), "verification-failed");
    }

    #[test]
    fn verify_needs_embedded_system() {
        let file = SystemFile::parse(
            "derivations 1\nunknown u\neq d1 u = u\ninit u 0: 1\norder 4\n",
        )
        .unwrap();
        let mut doc = solve(&file, None, None).unwrap();
        doc.system = None;
        assert!(verify(&doc).is_err());
    }

    #[test]
    fn extend_square_from_relation() {
        // Relation (d1 x)^2 - 4x with lower solution (1 + z2)^2 and slice
        // d1 x|_{z1=0} = 2 + 2*z2 extends to (z1 + 1 + z2)^2.
        let lower_file = SystemFile::parse(
            "derivations 1\nunknown x\neq d1 x = x\ninit x 0: 1\norder 9\n",
        )
        .unwrap();
        // Build the lower document directly instead: (1 + t2)^2 at base 0.
        let mut low = TruncatedSeries::zero(1, 9, vec![rat_int(0)]);
        low.set_coeff(mi(&[0]), rat_int(1));
        low.set_coeff(mi(&[1]), rat_int(2));
        low.set_coeff(mi(&[2]), rat_int(1));
        let lower = SeriesDocument {
            variables: 1,
            base: vec![rat_int(0)],
            order: 9,
            unknowns: vec![("x".to_string(), low)],
            residuals: Vec::new(),
            system: None,
        };
        drop(lower_file);

        let file = SystemFile::parse(
            "derivations 2\nunknown x\nrelation (d1 x)^2 - 4*x\ninit x 1: 2 + 2*z2\npoint 0 0\norder 8\n",
        )
        .unwrap();
        let doc = extend(&file, &lower, None, None).unwrap();
        let s = &doc.unknowns[0].1;
        // (z1 + 1 + z2)^2 = 1 + 2 z1 + 2 z2 + z1^2 + 2 z1 z2 + z2^2.
        assert_eq!(s.coeff(&mi(&[0, 0])), rat_int(1));
        assert_eq!(s.coeff(&mi(&[1, 0])), rat_int(2));
        assert_eq!(s.coeff(&mi(&[0, 1])), rat_int(2));
        assert_eq!(s.coeff(&mi(&[2, 0])), rat_int(1));
        assert_eq!(s.coeff(&mi(&[1, 1])), rat_int(2));
        assert_eq!(s.coeff(&mi(&[0, 2])), rat_int(1));
        assert_eq!(s.coeff(&mi(&[3, 0])), rat_int(0));
        assert_eq!(doc.unknowns[0].0, "x");
        assert_eq!(doc.residuals[0].unknown, "x");
        // Restriction to z1 = 0 reproduces the lower data.
        let restricted = s.restrict_first().unwrap();
        assert!(restricted
            .eq_to_order(&lower.unknowns[0].1, 6)
            .unwrap());
    }

    #[test]
    fn extend_checks_lower_context() {
        let file = SystemFile::parse(
            "derivations 2\nunknown x\nrelation d1 x - x\npoint 0 0\norder 4\n",
        )
        .unwrap();
        let mut low = TruncatedSeries::zero(1, 8, vec![rat_int(0)]);
        low.set_coeff(mi(&[0]), rat_int(1));
        let mk = |vars: usize, base: Vec<Rat>, name: &str, order: u32| SeriesDocument {
            variables: vars,
            base,
            order,
            unknowns: vec![(name.to_string(), low.clone())],
            residuals: Vec::new(),
            system: None,
        };
        // Wrong dimension.
        assert!(extend(&file, &mk(2, vec![rat_int(0), rat_int(0)], "x", 8), None, None).is_err());
        // Wrong base point.
        assert!(extend(&file, &mk(1, vec![rat_int(1)], "x", 8), None, None).is_err());
        // Wrong name.
        assert!(extend(&file, &mk(1, vec![rat_int(0)], "y", 8), None, None).is_err());
        // Insufficient lower order.
        assert!(extend(&file, &mk(1, vec![rat_int(0)], "x", 2), None, None).is_err());
        // All aligned: works.
        assert!(extend(&file, &mk(1, vec![rat_int(0)], "x", 8), None, None).is_ok());
    }

    #[test]
    fn separant_report_fixture() {
        let file = SystemFile::parse(
            "derivations 1\nunknown x\nrelation (d1 x)^2 - 4*x\n",
        )
        .unwrap();
        let report = separant_report(&file).unwrap();
        assert!(report.contains("leader: d1 x"), "{report}");
        assert!(report.contains("order: 1"), "{report}");
        assert!(report.contains("separant: 2*d1 x"), "{report}");
        assert!(report.contains("linear in leader: no"), "{report}");
    }

    #[test]
    fn separant_report_with_witness() {
        let file = SystemFile::parse(
            "derivations 2\nunknown x\nrelation d1 x - 1\nwitness x: z1\n",
        )
        .unwrap();
        let report = separant_report(&file).unwrap();
        assert!(report.contains("integral at witness: yes"), "{report}");
    }

    #[test]
    fn change_derivations_fixture() {
        // d2 x - 1 is not integral (no d1-leader); lambda = (1) fixes it.
        let file = SystemFile::parse(
            "derivations 2\nunknown x\nrelation d2 x - 1\nwitness x: z2\nlambda-search-bound 3\n",
        )
        .unwrap();
        let report = change_derivations(&file, None).unwrap();
        assert!(report.contains("lambda: 1\n"), "{report}");
        assert!(report.contains("matrix:"), "{report}");
        // The transformed relation gains a d1-leader.
        assert!(report.contains("d1 x"), "{report}");
    }

    #[test]
    fn change_derivations_identity_when_already_integral() {
        let file = SystemFile::parse(
            "derivations 2\nunknown x\nrelation d1 x - 1\nwitness x: z1\n",
        )
        .unwrap();
        let report = change_derivations(&file, Some(2)).unwrap();
        assert!(report.contains("lambda: 0\n"), "{report}");
    }

    #[test]
    fn reduce_exponential_chain() {
        let file = SystemFile::parse(
            "derivations 1\nunknown x\nrelation d1 x - x\nexpr d1^3 x\nexpr d1 x + x\n",
        )
        .unwrap();
        let report = reduce(&file).unwrap();
        assert!(report.contains("reduced: x\n"), "{report}");
        assert!(report.contains("reduced: 2*x\n"), "{report}");
        assert!(report.contains("separant power: 0"), "{report}");
    }

    #[test]
    fn expand_documents_geometric_series() {
        let file = SystemFile::parse(
            "derivations 1\nexpr 1/(1 - z1)\npoint 0\norder 4\n",
        )
        .unwrap();
        let doc = expand(&file, None, None).unwrap();
        let s = &doc.unknowns[0].1;
        for k in 0..=4u32 {
            assert_eq!(s.coeff(&mi(&[k])), rat_int(1));
        }
        // Pole at the point is an error.
        let err = expand(&file, None, Some(vec![rat_int(1)])).unwrap_err();
        assert_eq!(err.kind(), "pole");
    }

    #[test]
    fn mixed_order_solve_needs_deeper_data_automatically() {
        // d1 u = d2^2 v, d1^2 v = 0: the work order exceeds the target by
        // the order spread, and the closed-form slices cover it.
        let file = SystemFile::parse(
            "derivations 2\nunknown u v\neq d1 u = d2^2 v\neq d1^2 v = 0\ninit u 0: 0\ninit v 0: z2^3\ninit v 1: z2^2\npoint 0 0\norder 4\n",
        )
        .unwrap();
        let doc = solve(&file, None, None).unwrap();
        let u = &doc.unknowns[0].1;
        // v = z2^3 + z1 z2^2, so d2^2 v = 6 z2 + 2 z1 and u = 6 z1 z2 + z1^2.
        assert_eq!(u.coeff(&mi(&[1, 1])), rat_int(6));
        assert_eq!(u.coeff(&mi(&[2, 0])), rat_int(1));
        assert!(doc.residuals.iter().all(|r| r.pass));
    }
}
