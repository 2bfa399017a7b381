//! Formal Cauchy-Kovalevskaya machinery: point evaluations and Taylor
//! series of differential polynomials, jet prolongation along d1,
//! normal-form PDE systems solved by recursion on z1-degree, residual
//! verification, and the one-step dimension extension.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::diffpoly::{
    default_names, format_derivative_var, DerivativeVar, DiffPoly, DiffRationalFunction,
};
use crate::error::{Error, Result};
use crate::multiindex::{indices_up_to, MultiIndex};
use crate::poly::Rat;
use crate::reduction::{prolongation_chain, IntegralRelation};
use crate::series::TruncatedSeries;

// ---------------------------------------------------------------------------
// Point evaluations (the homomorphism psi of the Taylor construction).
// ---------------------------------------------------------------------------

/// Finitely supported assignment of rational values to derivative
/// variables at a base point w. Queries outside the support are an
/// error, never an implicit zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointEvaluation {
    base: Vec<Rat>,
    values: BTreeMap<DerivativeVar, Rat>,
}

impl PointEvaluation {
    pub fn new(base: Vec<Rat>) -> Self {
        PointEvaluation {
            base,
            values: BTreeMap::new(),
        }
    }

    /// Read off psi(d^alpha x_j) = alpha! * coeff_alpha from actual jets,
    /// for every index within the jets' certified order.
    pub fn from_jets(jets: &[TruncatedSeries]) -> Result<Self> {
        let first = jets.first().ok_or_else(|| {
            Error::Underdetermined("no jets given for a point evaluation".into())
        })?;
        let mut psi = PointEvaluation::new(first.base().to_vec());
        for (j, jet) in jets.iter().enumerate() {
            if jet.nvars() != first.nvars() || jet.base() != first.base() {
                return Err(Error::ContextMismatch(
                    "jets have different variable counts or base points".into(),
                ));
            }
            for alpha in indices_up_to(jet.nvars(), jet.order()) {
                let fact = Rat::from_integer(BigInt::from(alpha.factorial()));
                psi.set(DerivativeVar::new(j, alpha.clone()), jet.coeff(&alpha) * fact);
            }
        }
        Ok(psi)
    }

    pub fn base(&self) -> &[Rat] {
        &self.base
    }

    pub fn set(&mut self, v: DerivativeVar, value: Rat) {
        self.values.insert(v, value);
    }

    pub fn get(&self, v: &DerivativeVar) -> Option<&Rat> {
        self.values.get(v)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Evaluate a differential polynomial: coefficients at the base
    /// point, derivative variables from the stored values. Missing
    /// variables are collected and reported together.
    pub fn eval_poly(&self, p: &DiffPoly) -> Result<Rat> {
        let missing: Vec<String> = p
            .vars()
            .into_iter()
            .filter(|v| !self.values.contains_key(v))
            .map(|v| format_derivative_var(&v, &default_names(p.unknowns())))
            .collect();
        if !missing.is_empty() {
            return Err(Error::Underdetermined(format!(
                "point evaluation lacks values for {}",
                missing.join(", ")
            )));
        }
        let mut acc = Rat::zero();
        for (mono, coeff) in p.terms() {
            let mut term = coeff.eval(&self.base)?;
            for (v, &e) in mono.factors() {
                let val = &self.values[v];
                for _ in 0..e {
                    term *= val;
                }
            }
            acc += term;
        }
        Ok(acc)
    }
}

// ---------------------------------------------------------------------------
// Taylor homomorphism.
// ---------------------------------------------------------------------------

/// T_{psi,w}(a) = sum over |alpha| <= N of psi(d^alpha a) (t-w)^alpha/alpha!.
pub fn taylor_homomorphism(
    psi: &PointEvaluation,
    a: &DiffPoly,
    n: u32,
) -> Result<TruncatedSeries> {
    let m = a.derivations();
    if psi.base.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: psi.base.len(),
        });
    }
    let mut out = TruncatedSeries::zero(m, n, psi.base.clone());
    for alpha in indices_up_to(m, n) {
        let value = psi.eval_poly(&a.derive_multi(&alpha))?;
        let fact = Rat::from_integer(BigInt::from(alpha.factorial()));
        out.set_coeff(alpha, value / fact);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Jet prolongation along d1.
// ---------------------------------------------------------------------------

/// Extend a point evaluation to all derivatives |alpha| <= N using the
/// relation's d1-prolongation identities. The seed must cover the
/// non-prolonged levels (alpha_1 <= r, or alpha_1 < r for relations
/// linear in the leader, whose level-r values are computable too).
pub fn jet_prolongation(
    relation: &DiffPoly,
    seed: &PointEvaluation,
    n: u32,
) -> Result<PointEvaluation> {
    let rel = IntegralRelation::new(relation.clone())?;
    let m = relation.derivations();
    if seed.base.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: seed.base.len(),
        });
    }
    let start_level = if rel.is_linear_in_leader() {
        rel.order()
    } else {
        rel.order() + 1
    };
    let mut out = seed.clone();
    let mut cache = BTreeMap::new();
    let mut sep_val: Option<Rat> = None;
    for alpha in indices_up_to(m, n) {
        if alpha.get(0) < start_level {
            continue;
        }
        let v = DerivativeVar::new(rel.unknown(), alpha.clone());
        if out.get(&v).is_some() {
            continue;
        }
        let sep = match &sep_val {
            Some(s) => s.clone(),
            None => {
                let s = out.eval_poly(rel.separant())?;
                sep_val = Some(s.clone());
                s
            }
        };
        if sep.is_zero() {
            return Err(Error::SingularProlongation(format!(
                "separant {} evaluates to zero while prolonging to {}",
                rel.separant(),
                format_derivative_var(&v, &default_names(relation.unknowns()))
            )));
        }
        let gamma = alpha
            .checked_sub(&rel.leader().index)
            .expect("prolonged index dominates the leader");
        let (a, k) = prolongation_chain(&gamma, &rel, &mut cache);
        let num = out.eval_poly(&a)?;
        let mut den = Rat::one();
        for _ in 0..k {
            den *= &sep;
        }
        out.set(v, num / den);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Normal-form PDE systems.
// ---------------------------------------------------------------------------

/// d1^(r_i) x_i = F_i, one equation per unknown, with every derivative
/// in every right-hand side subject to the per-unknown window
/// |alpha| <= r_j, alpha_1 < r_j.
#[derive(Debug, Clone)]
pub struct PDESystem {
    m: usize,
    names: Vec<String>,
    orders: Vec<u32>,
    rhs: Vec<DiffRationalFunction>,
}

impl PDESystem {
    pub fn new(
        m: usize,
        names: Vec<String>,
        equations: Vec<(u32, DiffRationalFunction)>,
    ) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return Err(Error::Underdetermined("system has no unknowns".into()));
        }
        if m == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if equations.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: equations.len(),
            });
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(Error::ContextMismatch(format!(
                    "unknown name {name} appears twice"
                )));
            }
        }
        let mut orders = Vec::with_capacity(n);
        let mut rhs = Vec::with_capacity(n);
        for (i, (r, f)) in equations.into_iter().enumerate() {
            if r == 0 {
                return Err(Error::ContextMismatch(format!(
                    "equation {} for {}: the d1-order must be positive",
                    i + 1,
                    names[i]
                )));
            }
            if f.num().derivations() != m || f.num().unknowns() != n {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: f.num().derivations(),
                });
            }
            orders.push(r);
            rhs.push(f);
        }
        Ok(PDESystem {
            m,
            names,
            orders,
            rhs,
        })
    }

    pub fn derivations(&self) -> usize {
        self.m
    }

    pub fn unknowns(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    pub fn order(&self, i: usize) -> u32 {
        self.orders[i]
    }

    pub fn rhs(&self, i: usize) -> &DiffRationalFunction {
        &self.rhs[i]
    }
}

/// Check the normal-form window on every equation; the error names the
/// equation and the offending derivative.
pub fn validate_normal_form(sys: &PDESystem) -> Result<()> {
    for i in 0..sys.unknowns() {
        for v in sys.rhs[i].vars() {
            let r_j = sys.orders[v.unknown];
            if v.index.degree() > r_j || v.index.get(0) >= r_j {
                return Err(Error::NormalForm {
                    equation: format!("equation {} for {}", i + 1, sys.names[i]),
                    variable: format_derivative_var(&v, &sys.names),
                });
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Initial data.
// ---------------------------------------------------------------------------

/// Per unknown i, the slices phi_{i,k} = (d1^k u_i)|_{z1=w1} for
/// k < r_i, as series in z2..zm at a common base point and order.
#[derive(Debug, Clone)]
pub struct InitialData {
    data: Vec<Vec<TruncatedSeries>>,
    base: Vec<Rat>,
    order: u32,
}

impl InitialData {
    pub fn new(data: Vec<Vec<TruncatedSeries>>) -> Result<Self> {
        let first = data
            .iter()
            .flat_map(|row| row.iter())
            .next()
            .ok_or_else(|| Error::Underdetermined("initial data is empty".into()))?
            .clone();
        for row in &data {
            for s in row {
                if s.nvars() != first.nvars() {
                    return Err(Error::DimensionMismatch {
                        expected: first.nvars(),
                        found: s.nvars(),
                    });
                }
                if s.base() != first.base() {
                    return Err(Error::ContextMismatch(
                        "initial slices have different base points".into(),
                    ));
                }
                if s.order() != first.order() {
                    return Err(Error::ContextMismatch(
                        "initial slices have different truncation orders".into(),
                    ));
                }
            }
        }
        Ok(InitialData {
            base: first.base().to_vec(),
            order: first.order(),
            data,
        })
    }

    pub fn unknowns(&self) -> usize {
        self.data.len()
    }

    pub fn slices(&self, i: usize) -> &[TruncatedSeries] {
        &self.data[i]
    }

    pub fn base(&self) -> &[Rat] {
        &self.base
    }

    pub fn order(&self) -> u32 {
        self.order
    }
}

// ---------------------------------------------------------------------------
// Solutions and residuals.
// ---------------------------------------------------------------------------

/// Verifier verdict for one equation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidualRecord {
    pub equation: usize,
    pub unknown: String,
    pub certified_order: u32,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub names: Vec<String>,
    pub series: Vec<TruncatedSeries>,
    pub order: u32,
    pub residuals: Vec<ResidualRecord>,
}

/// Defect of each equation on the solution jets:
/// d1^(r_i) x_i * den(F_i) - num(F_i), evaluated with honest order
/// bookkeeping (certified to N minus the defect's derivative order).
pub fn residual(sys: &PDESystem, sol: &Solution) -> Result<Vec<TruncatedSeries>> {
    let n = sys.unknowns();
    if sol.series.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: sol.series.len(),
        });
    }
    let rmax = *sys.orders.iter().max().expect("nonempty system");
    if sol.order < rmax {
        return Err(Error::InsufficientOrder {
            needed: rmax,
            available: sol.order,
        });
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut idx = vec![0u32; sys.m];
        idx[0] = sys.orders[i];
        let lhs = DiffPoly::var(sys.m, n, i, MultiIndex::new(idx));
        let defect = lhs.mul(sys.rhs[i].den()).sub(sys.rhs[i].num());
        out.push(defect.evaluate_jet(&sol.series)?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// The solver.
// ---------------------------------------------------------------------------

/// Jets at z1 = w1 built from the initial slices alone (higher
/// z1-degrees zero): coefficient (k, beta) = phi_k[beta] / k!.
fn assemble_initial_jets(
    sys: &PDESystem,
    init: &InitialData,
    w1: &Rat,
    order: u32,
) -> Result<Vec<TruncatedSeries>> {
    let mut jets = Vec::with_capacity(sys.unknowns());
    for i in 0..sys.unknowns() {
        let mut fact = Rat::one();
        let mut slices = Vec::new();
        for (k, phi) in init.slices(i).iter().enumerate() {
            if k > 0 {
                fact *= Rat::from_integer(BigInt::from(k));
            }
            slices.push(phi.scale(&(Rat::one() / &fact)));
        }
        jets.push(TruncatedSeries::from_slices(&slices, w1.clone(), order)?);
    }
    Ok(jets)
}

/// Solve the system as truncated power series at (w1, base(init)).
///
/// Coefficients are determined by recursion on z1-degree: below r_i they
/// come from the initial slices, from r_i on by matching z1-slices of
/// F_i. Internally the recursion runs at order N plus the order spread
/// max(r) - min(r); equations that read a higher-order unknown reach
/// that much beyond their own total degree, and the initial data must be
/// certified that far as well.
pub fn ck_solve(
    sys: &PDESystem,
    init: &InitialData,
    w1: &Rat,
    n_order: u32,
) -> Result<Solution> {
    validate_normal_form(sys)?;
    let n = sys.unknowns();
    let m = sys.m;
    if init.unknowns() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: init.unknowns(),
        });
    }
    if init.base().len() != m - 1 {
        return Err(Error::DimensionMismatch {
            expected: m - 1,
            found: init.base().len(),
        });
    }
    for i in 0..n {
        let have = init.slices(i).len();
        let need = sys.orders[i] as usize;
        if have < need {
            return Err(Error::Underdetermined(format!(
                "unknown {}: {} initial slice(s) given, {} required",
                sys.names[i], have, need
            )));
        }
        if have > need {
            return Err(Error::ContextMismatch(format!(
                "unknown {}: {} initial slice(s) given, only {} expected",
                sys.names[i], have, need
            )));
        }
    }
    let rmax = *sys.orders.iter().max().expect("nonempty");
    let rmin = *sys.orders.iter().min().expect("nonempty");
    let work_order = n_order + (rmax - rmin);
    if init.order() < work_order {
        return Err(Error::Underdetermined(format!(
            "initial data certified to order {}, but order {} is needed for an exact truncation at {}",
            init.order(),
            work_order,
            n_order
        )));
    }

    let mut work = assemble_initial_jets(sys, init, w1, work_order)?;

    // The recursion divides by each denominator's series, which needs a
    // nonzero value at the point. Derivatives in the denominator satisfy
    // alpha_1 < r_j, so the value on the initial jet already equals the
    // value on the full solution.
    for i in 0..n {
        let den_val = sys.rhs[i].den().evaluate_jet_raw(&work)?;
        if den_val.value_at_base().is_zero() {
            return Err(Error::DenominatorVanishes {
                equation: format!("equation {} for {}", i + 1, sys.names[i]),
            });
        }
    }

    // Round s settles the z1-degree r_i + s of every unknown. All reads
    // of F_i at slice s touch z1-degrees at most s + r_j - 1, settled in
    // earlier rounds, so in-place updates match the simultaneous order.
    let mut s: u32 = 0;
    while sys.orders.iter().any(|&r| r + s <= work_order) {
        for i in 0..n {
            let k = sys.orders[i] + s;
            if k > work_order {
                continue;
            }
            let num_v = sys.rhs[i].num().evaluate_jet_raw(&work)?;
            let den_v = sys.rhs[i].den().evaluate_jet_raw(&work)?;
            let g = num_v.div(&den_v)?;
            let slice = g.slice_first(s)?;
            // c_{k,beta} = slice[beta] * s!/k!
            let mut factor = Rat::one();
            for j in (s + 1)..=k {
                factor /= Rat::from_integer(BigInt::from(j));
            }
            for (beta, c) in slice.coeffs() {
                if k + beta.degree() <= work_order {
                    work[i].set_coeff(beta.prepend(k), c * &factor);
                }
            }
        }
        s += 1;
    }

    let series = work
        .iter()
        .map(|jet| jet.truncate(n_order))
        .collect::<Result<Vec<_>>>()?;
    let mut sol = Solution {
        names: sys.names.clone(),
        series,
        order: n_order,
        residuals: Vec::new(),
    };
    let defects = residual(sys, &sol)?;
    sol.residuals = defects
        .iter()
        .enumerate()
        .map(|(i, d)| ResidualRecord {
            equation: i + 1,
            unknown: sys.names[i].clone(),
            certified_order: d.order(),
            pass: d.is_zero(),
        })
        .collect();
    Ok(sol)
}

// ---------------------------------------------------------------------------
// Dimension extension.
// ---------------------------------------------------------------------------

/// One generator of the extension step: either an explicit normal-form
/// right-hand side (with its d1-order), or a Delta-integral relation
/// from which the equation is derived. `initial` supplies the slices
/// (d1^k a_i)|_{z1=w1} for 1 <= k < order; the k = 0 slice is the lower
/// solution itself.
#[derive(Debug, Clone)]
pub struct GeneratorSpec {
    pub relation: Option<DiffPoly>,
    pub order: Option<u32>,
    pub rhs: Option<DiffRationalFunction>,
    pub initial: Vec<TruncatedSeries>,
}

impl GeneratorSpec {
    pub fn from_relation(relation: DiffPoly, initial: Vec<TruncatedSeries>) -> Self {
        GeneratorSpec {
            relation: Some(relation),
            order: None,
            rhs: None,
            initial,
        }
    }

    pub fn from_rhs(order: u32, rhs: DiffRationalFunction, initial: Vec<TruncatedSeries>) -> Self {
        GeneratorSpec {
            relation: None,
            order: Some(order),
            rhs: Some(rhs),
            initial,
        }
    }
}

/// Lift solutions in z2..zm to z1..zm: assemble a normal-form system
/// from the generators (for a relation linear in its leader, solve for
/// the leader; otherwise prolong once along d1 and solve for
/// d1^(r+1) x = q/sep), run the CK recursion, and verify that the
/// result restricts back to the lower solution and satisfies the
/// original relations.
pub fn extend_dimension(
    generators: &[GeneratorSpec],
    lower: &[TruncatedSeries],
    w1: &Rat,
    n_order: u32,
) -> Result<Solution> {
    if generators.is_empty() {
        return Err(Error::Underdetermined("no generators to extend".into()));
    }
    if generators.len() != lower.len() {
        return Err(Error::DimensionMismatch {
            expected: generators.len(),
            found: lower.len(),
        });
    }
    let n = generators.len();
    let m = lower[0].nvars() + 1;
    let names = default_names(n);

    let mut equations = Vec::with_capacity(n);
    let mut init_rows = Vec::with_capacity(n);
    let mut relation_checks: Vec<(usize, IntegralRelation)> = Vec::new();
    for (i, spec) in generators.iter().enumerate() {
        let (order, rhs) = match (&spec.rhs, &spec.relation) {
            (Some(rhs), _) => {
                let r = spec.order.ok_or_else(|| {
                    Error::Underdetermined(format!(
                        "generator {}: an explicit right-hand side needs an explicit d1-order",
                        names[i]
                    ))
                })?;
                (r, rhs.clone())
            }
            (None, Some(relation)) => {
                if relation.derivations() != m {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        found: relation.derivations(),
                    });
                }
                let rel = IntegralRelation::new(relation.clone())?;
                if rel.unknown() != i || relation.unknowns() != n {
                    return Err(Error::ContextMismatch(format!(
                        "generator {}: the relation must constrain exactly unknown {}",
                        names[i],
                        names[i]
                    )));
                }
                let derived = if rel.is_linear_in_leader() {
                    let leader = DiffPoly::var(m, n, i, rel.leader().index);
                    let num = rel.separant().mul(&leader).sub(rel.relation());
                    (
                        rel.order(),
                        DiffRationalFunction::new(num, rel.separant().clone())?,
                    )
                } else {
                    (
                        rel.order() + 1,
                        DiffRationalFunction::new(rel.q().clone(), rel.separant().clone())?,
                    )
                };
                if let Some(declared) = spec.order {
                    if declared != derived.0 {
                        return Err(Error::ContextMismatch(format!(
                            "generator {}: declared d1-order {} but the relation yields {}",
                            names[i], declared, derived.0
                        )));
                    }
                }
                relation_checks.push((i, rel));
                derived
            }
            (None, None) => {
                return Err(Error::Underdetermined(format!(
                    "generator {}: needs a relation or an explicit right-hand side",
                    names[i]
                )));
            }
        };
        if order == 0 {
            return Err(Error::ContextMismatch(format!(
                "generator {}: a relation of d1-order zero gives no equation to integrate",
                names[i]
            )));
        }
        let have = spec.initial.len() + 1;
        let need = order as usize;
        if have < need {
            return Err(Error::Underdetermined(format!(
                "generator {}: {} initial slice(s) available (with the lower solution), {} required",
                names[i], have, need
            )));
        }
        if have > need {
            return Err(Error::ContextMismatch(format!(
                "generator {}: {} initial slice(s) available, only {} expected",
                names[i], have, need
            )));
        }
        let mut row = Vec::with_capacity(need);
        row.push(lower[i].clone());
        row.extend(spec.initial.iter().cloned());
        init_rows.push(row);
        equations.push((order, rhs));
    }

    let sys = PDESystem::new(m, names.clone(), equations)?;
    let init = InitialData::new(init_rows)?;

    // Relations need a nonvanishing separant on the initial jet before
    // the division by it can mean anything.
    if !relation_checks.is_empty() {
        let jets = assemble_initial_jets(&sys, &init, w1, init.order())?;
        for (i, rel) in &relation_checks {
            let sep_val = rel.separant().evaluate_jet_raw(&jets)?;
            if sep_val.value_at_base().is_zero() {
                return Err(Error::SingularProlongation(format!(
                    "generator {}: separant {} vanishes at the initial data",
                    names[*i],
                    rel.separant()
                )));
            }
        }
    }

    let sol = ck_solve(&sys, &init, w1, n_order)?;

    let rmax = *sys.orders().iter().max().expect("nonempty");
    let check_order = n_order - rmax;
    for i in 0..n {
        let restricted = sol.series[i].restrict_first()?;
        if !restricted.eq_to_order(&lower[i], check_order)? {
            return Err(Error::Consistency(format!(
                "restriction of {} to z1 = {} disagrees with the supplied solution at order {}",
                names[i], w1, check_order
            )));
        }
    }
    for (i, rel) in &relation_checks {
        let value = rel.relation().evaluate_jet(&sol.series)?;
        if !value.is_zero() {
            return Err(Error::Consistency(format!(
                "relation for {} is not satisfied by the extension (nonzero at certified order {})",
                names[*i],
                value.order()
            )));
        }
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, rat_int};
    use crate::ratfunc::RatFunc;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    fn x(m: usize, v: &[u32]) -> DiffPoly {
        DiffPoly::var(m, 1, 0, mi(v))
    }

    fn origin(m: usize) -> Vec<Rat> {
        vec![Rat::zero(); m]
    }

    fn exp_series(nvars: usize, order: u32, dir: usize) -> TruncatedSeries {
        let mut s = TruncatedSeries::zero(nvars, order, origin(nvars));
        let mut c = Rat::one();
        for k in 0..=order {
            if k > 0 {
                c /= Rat::from_integer(k.into());
            }
            let mut idx = vec![0u32; nvars];
            idx[dir] = k;
            s.set_coeff(mi(&idx), c.clone());
        }
        s
    }

    #[test]
    fn taylor_linear_example() {
        let mut psi = PointEvaluation::new(origin(2));
        psi.set(DerivativeVar::new(0, mi(&[0, 0])), Rat::zero());
        psi.set(DerivativeVar::new(0, mi(&[1, 0])), rat_int(1));
        psi.set(DerivativeVar::new(0, mi(&[0, 1])), rat_int(2));
        for idx in [[2, 0], [1, 1], [0, 2]] {
            psi.set(DerivativeVar::new(0, mi(&idx)), Rat::zero());
        }
        let t = taylor_homomorphism(&psi, &x(2, &[0, 0]), 2).unwrap();
        let mut expect = TruncatedSeries::zero(2, 2, origin(2));
        expect.set_coeff(mi(&[1, 0]), rat_int(1));
        expect.set_coeff(mi(&[0, 1]), rat_int(2));
        assert_eq!(t, expect);
        // Multiplicativity on the induced jet: T(x*x) = T(x)^2 at order 2.
        let t2 = taylor_homomorphism(&psi, &x(2, &[0, 0]).mul(&x(2, &[0, 0])), 2).unwrap();
        assert_eq!(t2, t.mul(&t).unwrap());
    }

    #[test]
    fn taylor_exp_jet() {
        let mut psi = PointEvaluation::new(origin(1));
        for k in 0..=4u32 {
            psi.set(DerivativeVar::new(0, mi(&[k])), rat_int(1));
        }
        let t = taylor_homomorphism(&psi, &x(1, &[0]), 4).unwrap();
        assert_eq!(t, exp_series(1, 4, 0));
    }

    #[test]
    fn taylor_missing_values_are_listed() {
        let psi = PointEvaluation::new(origin(1));
        let err = taylor_homomorphism(&psi, &x(1, &[0]), 1).unwrap_err();
        match err {
            Error::Underdetermined(msg) => assert!(msg.contains('x'), "{msg}"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn taylor_laws_on_series_jets() {
        // psi must cover derivatives to N + (max var order of the
        // products), so the jet is taken a little deeper than N.
        let jet = exp_series(2, 6, 0);
        let psi = PointEvaluation::from_jets(std::slice::from_ref(&jet)).unwrap();
        let a = x(2, &[1, 0]).mul(&x(2, &[0, 1])).add(&x(2, &[0, 0]));
        let b = x(2, &[1, 1]).sub(&DiffPoly::one(2, 1));
        let n = 3;
        let ta = taylor_homomorphism(&psi, &a, n).unwrap();
        let tb = taylor_homomorphism(&psi, &b, n).unwrap();
        assert_eq!(
            taylor_homomorphism(&psi, &a.add(&b), n).unwrap(),
            ta.add(&tb).unwrap()
        );
        assert_eq!(
            taylor_homomorphism(&psi, &a.mul(&b), n).unwrap(),
            ta.mul(&tb).unwrap()
        );
        for i in 0..2 {
            assert_eq!(
                taylor_homomorphism(&psi, &a.derive(i), n - 1).unwrap(),
                ta.derive(i).unwrap()
            );
        }
    }

    #[test]
    fn prolong_exp_relation() {
        let rel = x(1, &[1]).sub(&x(1, &[0]));
        let mut seed = PointEvaluation::new(origin(1));
        seed.set(DerivativeVar::new(0, mi(&[0])), rat_int(1));
        let psi = jet_prolongation(&rel, &seed, 4).unwrap();
        for k in 0..=4u32 {
            assert_eq!(psi.get(&DerivativeVar::new(0, mi(&[k]))), Some(&rat_int(1)));
        }
    }

    #[test]
    fn prolong_parabola_relation() {
        let rel = x(1, &[1])
            .pow(2)
            .sub(&x(1, &[0]).scale(&RatFunc::constant(1, rat_int(4))));
        let mut seed = PointEvaluation::new(origin(1));
        seed.set(DerivativeVar::new(0, mi(&[0])), rat_int(1));
        seed.set(DerivativeVar::new(0, mi(&[1])), rat_int(2));
        let psi = jet_prolongation(&rel, &seed, 3).unwrap();
        assert_eq!(psi.get(&DerivativeVar::new(0, mi(&[2]))), Some(&rat_int(2)));
        assert_eq!(psi.get(&DerivativeVar::new(0, mi(&[3]))), Some(&Rat::zero()));
    }

    #[test]
    fn prolong_singular_seed() {
        let rel = x(1, &[1])
            .pow(2)
            .sub(&x(1, &[0]).scale(&RatFunc::constant(1, rat_int(4))));
        let mut seed = PointEvaluation::new(origin(1));
        seed.set(DerivativeVar::new(0, mi(&[0])), Rat::zero());
        seed.set(DerivativeVar::new(0, mi(&[1])), Rat::zero());
        let err = jet_prolongation(&rel, &seed, 3).unwrap_err();
        assert_eq!(err.kind(), "singular-prolongation");
    }

    fn system1(m: usize, rhs: DiffPoly) -> PDESystem {
        PDESystem::new(
            m,
            vec!["u".into()],
            vec![(1, DiffRationalFunction::from_poly(rhs))],
        )
        .unwrap()
    }

    #[test]
    fn normal_form_examples() {
        // d1 u = d2 u: fine.
        assert!(validate_normal_form(&system1(2, x(2, &[0, 1]))).is_ok());
        // d1 u = d2^2 u: the heat equation is rejected, naming d2^2 u.
        let err = validate_normal_form(&system1(2, x(2, &[0, 2]))).unwrap_err();
        match err {
            Error::NormalForm { equation, variable } => {
                assert!(equation.contains("equation 1"), "{equation}");
                assert_eq!(variable, "d2^2 u");
            }
            other => panic!("unexpected error {other:?}"),
        }
        // d1^2 u = d2^2 u: fine at order 2.
        let wave = PDESystem::new(
            2,
            vec!["u".into()],
            vec![(2, DiffRationalFunction::from_poly(x(2, &[0, 2])))],
        )
        .unwrap();
        assert!(validate_normal_form(&wave).is_ok());
    }

    fn poly_series(nvars: usize, order: u32, coeffs: &[(&[u32], i64)]) -> TruncatedSeries {
        let mut s = TruncatedSeries::zero(nvars, order, origin(nvars));
        for (idx, c) in coeffs {
            s.set_coeff(mi(idx), rat_int(*c));
        }
        s
    }

    #[test]
    fn solve_exp() {
        let sys = system1(1, x(1, &[0]));
        let init = InitialData::new(vec![vec![poly_series(0, 5, &[(&[], 1)])]]).unwrap();
        let sol = ck_solve(&sys, &init, &Rat::zero(), 5).unwrap();
        assert_eq!(sol.series[0], exp_series(1, 5, 0));
        assert!(sol.residuals.iter().all(|r| r.pass));
        assert_eq!(sol.residuals[0].certified_order, 4);
    }

    #[test]
    fn solve_transport() {
        // d1 u = d2 u with phi0 = z2^2 gives (z1 + z2)^2.
        let sys = system1(2, x(2, &[0, 1]));
        let init = InitialData::new(vec![vec![poly_series(1, 4, &[(&[2], 1)])]]).unwrap();
        let sol = ck_solve(&sys, &init, &Rat::zero(), 4).unwrap();
        let expect = poly_series(2, 4, &[(&[2, 0], 1), (&[1, 1], 2), (&[0, 2], 1)]);
        assert_eq!(sol.series[0], expect);
        assert!(sol.residuals[0].pass);
        // Restriction consistency: slice k matches phi_k (here d2 phi0 at k=1).
        assert_eq!(
            sol.series[0].slice_first(0).unwrap(),
            poly_series(1, 4, &[(&[2], 1)])
        );
    }

    #[test]
    fn solve_wave() {
        // d1^2 u = d2^2 u, phi0 = z2^2, phi1 = 0 gives z1^2 + z2^2.
        let sys = PDESystem::new(
            2,
            vec!["u".into()],
            vec![(2, DiffRationalFunction::from_poly(x(2, &[0, 2])))],
        )
        .unwrap();
        let init = InitialData::new(vec![vec![
            poly_series(1, 4, &[(&[2], 1)]),
            poly_series(1, 4, &[]),
        ]])
        .unwrap();
        let sol = ck_solve(&sys, &init, &Rat::zero(), 4).unwrap();
        let expect = poly_series(2, 4, &[(&[2, 0], 1), (&[0, 2], 1)]);
        assert_eq!(sol.series[0], expect);
        assert!(sol.residuals[0].pass);
    }

    #[test]
    fn solve_coupled_rotation() {
        // d1 u = v, d1 v = -u with u(0) = 1, v(0) = 0: cosine and -sine.
        let u = DiffPoly::var(1, 2, 0, mi(&[0]));
        let v = DiffPoly::var(1, 2, 1, mi(&[0]));
        let sys = PDESystem::new(
            1,
            vec!["u".into(), "v".into()],
            vec![
                (1, DiffRationalFunction::from_poly(v.clone())),
                (1, DiffRationalFunction::from_poly(u.neg())),
            ],
        )
        .unwrap();
        let one = poly_series(0, 4, &[(&[], 1)]);
        let zero = poly_series(0, 4, &[]);
        let init = InitialData::new(vec![vec![one], vec![zero]]).unwrap();
        let sol = ck_solve(&sys, &init, &Rat::zero(), 4).unwrap();
        let mut cos = TruncatedSeries::zero(1, 4, origin(1));
        cos.set_coeff(mi(&[0]), rat_int(1));
        cos.set_coeff(mi(&[2]), rat(-1, 2));
        cos.set_coeff(mi(&[4]), rat(1, 24));
        let mut msin = TruncatedSeries::zero(1, 4, origin(1));
        msin.set_coeff(mi(&[1]), rat_int(-1));
        msin.set_coeff(mi(&[3]), rat(1, 6));
        assert_eq!(sol.series[0], cos);
        assert_eq!(sol.series[1], msin);
        assert!(sol.residuals.iter().all(|r| r.pass));
    }

    #[test]
    fn solve_rational_rhs() {
        // d1 u = 1/u with u(0) = 1: u = sqrt(1 + 2 z1).
        let sys = PDESystem::new(
            1,
            vec!["u".into()],
            vec![(
                1,
                DiffRationalFunction::new(DiffPoly::one(1, 1), x(1, &[0])).unwrap(),
            )],
        )
        .unwrap();
        let init = InitialData::new(vec![vec![poly_series(0, 4, &[(&[], 1)])]]).unwrap();
        let sol = ck_solve(&sys, &init, &Rat::zero(), 4).unwrap();
        let mut expect = TruncatedSeries::zero(1, 4, origin(1));
        expect.set_coeff(mi(&[0]), rat_int(1));
        expect.set_coeff(mi(&[1]), rat_int(1));
        expect.set_coeff(mi(&[2]), rat(-1, 2));
        expect.set_coeff(mi(&[3]), rat(1, 2));
        expect.set_coeff(mi(&[4]), rat(-5, 8));
        assert_eq!(sol.series[0], expect);
        assert!(sol.residuals[0].pass);
    }

    #[test]
    fn solve_denominator_vanishes() {
        let sys = PDESystem::new(
            1,
            vec!["u".into()],
            vec![(
                1,
                DiffRationalFunction::new(DiffPoly::one(1, 1), x(1, &[0])).unwrap(),
            )],
        )
        .unwrap();
        let init = InitialData::new(vec![vec![poly_series(0, 3, &[])]]).unwrap();
        let err = ck_solve(&sys, &init, &Rat::zero(), 3).unwrap_err();
        assert_eq!(err.kind(), "denominator-vanishes");
    }

    #[test]
    fn solve_insufficient_data() {
        let sys = PDESystem::new(
            2,
            vec!["u".into()],
            vec![(2, DiffRationalFunction::from_poly(x(2, &[0, 2])))],
        )
        .unwrap();
        // One slice where two are required.
        let short = InitialData::new(vec![vec![poly_series(1, 4, &[(&[2], 1)])]]).unwrap();
        let err = ck_solve(&sys, &short, &Rat::zero(), 4).unwrap_err();
        assert_eq!(err.kind(), "underdetermined");
        // Enough slices but certified too low for N = 4.
        let low = InitialData::new(vec![vec![
            poly_series(1, 3, &[(&[2], 1)]),
            poly_series(1, 3, &[]),
        ]])
        .unwrap();
        let err2 = ck_solve(&sys, &low, &Rat::zero(), 4).unwrap_err();
        assert_eq!(err2.kind(), "underdetermined");
    }

    #[test]
    fn solve_mixed_orders_needs_and_uses_extra_order() {
        // d1 u = d2^2 v, d1^2 v = 0: v = z2^3 + z2^2 z1,
        // u = 6 z1 z2 + z1^2 exactly.
        let dv2 = DiffPoly::var(2, 2, 1, mi(&[0, 2]));
        let sys = PDESystem::new(
            2,
            vec!["u".into(), "v".into()],
            vec![
                (1, DiffRationalFunction::from_poly(dv2)),
                (2, DiffRationalFunction::from_poly(DiffPoly::zero(2, 2))),
            ],
        )
        .unwrap();
        let n = 3;
        // Data must be certified one order beyond N (order spread 1).
        let phi_u0 = poly_series(1, n + 1, &[]);
        let phi_v0 = poly_series(1, n + 1, &[(&[3], 1)]);
        let phi_v1 = poly_series(1, n + 1, &[(&[2], 1)]);
        let init =
            InitialData::new(vec![vec![phi_u0.clone()], vec![phi_v0, phi_v1]]).unwrap();
        let sol = ck_solve(&sys, &init, &Rat::zero(), n).unwrap();
        let expect_u = poly_series(2, n, &[(&[1, 1], 6), (&[2, 0], 1)]);
        assert_eq!(sol.series[0], expect_u);
        assert!(sol.residuals.iter().all(|r| r.pass));
        // The same data at order N only is rejected.
        let low = InitialData::new(vec![
            vec![poly_series(1, n, &[])],
            vec![poly_series(1, n, &[(&[3], 1)]), poly_series(1, n, &[(&[2], 1)])],
        ])
        .unwrap();
        assert_eq!(
            ck_solve(&sys, &low, &Rat::zero(), n).unwrap_err().kind(),
            "underdetermined"
        );
    }

    #[test]
    fn taylor_over_prolonged_jet_matches_solver() {
        // Two independent code paths for d1 x = x, x(0) = 1.
        let rel = x(1, &[1]).sub(&x(1, &[0]));
        let mut seed = PointEvaluation::new(origin(1));
        seed.set(DerivativeVar::new(0, mi(&[0])), rat_int(1));
        let psi = jet_prolongation(&rel, &seed, 5).unwrap();
        let via_taylor = taylor_homomorphism(&psi, &x(1, &[0]), 5).unwrap();
        let sys = system1(1, x(1, &[0]));
        let init = InitialData::new(vec![vec![poly_series(0, 5, &[(&[], 1)])]]).unwrap();
        let via_solver = ck_solve(&sys, &init, &Rat::zero(), 5).unwrap();
        assert_eq!(via_taylor, via_solver.series[0]);
    }

    #[test]
    fn residual_catches_corruption() {
        let sys = system1(1, x(1, &[0]));
        let init = InitialData::new(vec![vec![poly_series(0, 4, &[(&[], 1)])]]).unwrap();
        let mut sol = ck_solve(&sys, &init, &Rat::zero(), 4).unwrap();
        let mut corrupted = sol.series[0].clone();
        corrupted.set_coeff(mi(&[3]), rat(7, 3));
        sol.series[0] = corrupted;
        let defects = residual(&sys, &sol).unwrap();
        assert!(!defects[0].is_zero());
    }

    #[test]
    fn solver_is_deterministic() {
        let sys = system1(2, x(2, &[0, 1]));
        let init = InitialData::new(vec![vec![poly_series(1, 4, &[(&[2], 1), (&[1], -3)])]])
            .unwrap();
        let a = ck_solve(&sys, &init, &Rat::zero(), 4).unwrap();
        let b = ck_solve(&sys, &init, &Rat::zero(), 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn extend_exp_relation() {
        // d1 x - x over the lower solution 1 + t2.
        let rel = x(2, &[1, 0]).sub(&x(2, &[0, 0]));
        let lower = poly_series(1, 3, &[(&[0], 1), (&[1], 1)]);
        let spec = GeneratorSpec::from_relation(rel.clone(), vec![]);
        let sol = extend_dimension(&[spec], &[lower.clone()], &Rat::zero(), 3).unwrap();
        // Solution is (1 + t2) * exp(t1) truncated at 3.
        let e = exp_series(2, 3, 0);
        let lifted = lower.embed_first(Rat::zero());
        let expect = e.mul(&lifted).unwrap();
        assert_eq!(sol.series[0], expect);
        assert_eq!(sol.series[0].restrict_first().unwrap(), lower);
        assert!(sol.residuals[0].pass);
    }

    #[test]
    fn extend_constant_relation() {
        // d1 x = 0 keeps the initial slice.
        let rel = x(2, &[1, 0]);
        let lower = poly_series(1, 3, &[(&[1], 1)]);
        let spec = GeneratorSpec::from_relation(rel, vec![]);
        let sol = extend_dimension(&[spec], &[lower.clone()], &Rat::zero(), 3).unwrap();
        assert_eq!(sol.series[0], lower.embed_first(Rat::zero()));
    }

    #[test]
    fn extend_singular_relation() {
        let rel = x(2, &[1, 0])
            .pow(2)
            .sub(&x(2, &[0, 0]).scale(&RatFunc::constant(2, rat_int(4))));
        let lower = poly_series(1, 3, &[]);
        let phi1 = poly_series(1, 3, &[]);
        let spec = GeneratorSpec::from_relation(rel, vec![phi1]);
        let err = extend_dimension(&[spec], &[lower], &Rat::zero(), 3).unwrap_err();
        assert_eq!(err.kind(), "singular-prolongation");
    }

    #[test]
    fn extend_nonlinear_relation_succeeds_off_singularity() {
        // (d1 x)^2 - 4x with lower solution (1 + t2)^2 and
        // phi1 = 2(1 + t2): the square (z1 + 1 + z2)^2.
        let rel = x(2, &[1, 0])
            .pow(2)
            .sub(&x(2, &[0, 0]).scale(&RatFunc::constant(2, rat_int(4))));
        let lower = poly_series(1, 4, &[(&[0], 1), (&[1], 2), (&[2], 1)]);
        let phi1 = poly_series(1, 4, &[(&[0], 2), (&[1], 2)]);
        let spec = GeneratorSpec::from_relation(rel, vec![phi1]);
        let sol = extend_dimension(&[spec], &[lower.clone()], &Rat::zero(), 4).unwrap();
        let expect = poly_series(
            2,
            4,
            &[
                (&[0, 0], 1),
                (&[1, 0], 2),
                (&[0, 1], 2),
                (&[2, 0], 1),
                (&[1, 1], 2),
                (&[0, 2], 1),
            ],
        );
        assert_eq!(sol.series[0], expect);
        assert_eq!(sol.series[0].restrict_first().unwrap(), lower);
    }

    #[test]
    fn extend_rejects_inconsistent_higher_slice() {
        // phi1 breaking (d1 x)^2 = 4x at z1 = 0 must be flagged.
        let rel = x(2, &[1, 0])
            .pow(2)
            .sub(&x(2, &[0, 0]).scale(&RatFunc::constant(2, rat_int(4))));
        let lower = poly_series(1, 4, &[(&[0], 1), (&[1], 2), (&[2], 1)]);
        let phi1 = poly_series(1, 4, &[(&[0], 1)]);
        let spec = GeneratorSpec::from_relation(rel, vec![phi1]);
        let err = extend_dimension(&[spec], &[lower], &Rat::zero(), 4).unwrap_err();
        assert_eq!(err.kind(), "consistency");
    }

    #[test]
    fn extend_with_explicit_rhs() {
        let rhs = DiffRationalFunction::from_poly(x(2, &[0, 1]));
        let lower = poly_series(1, 3, &[(&[2], 1)]);
        let spec = GeneratorSpec::from_rhs(1, rhs, vec![]);
        let sol = extend_dimension(&[spec], &[lower], &Rat::zero(), 3).unwrap();
        let expect = poly_series(2, 3, &[(&[2, 0], 1), (&[1, 1], 2), (&[0, 2], 1)]);
        assert_eq!(sol.series[0], expect);
    }
}
