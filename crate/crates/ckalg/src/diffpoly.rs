//! Differential polynomials: polynomials over Q(z1..zm) in the formal
//! derivatives d^alpha x_j of a finite set of unknowns, with m commuting
//! derivations d1..dm acting on both coefficients and variables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::multiindex::{grlex_compare, MultiIndex};
use crate::poly::Rat;
use crate::ratfunc::RatFunc;
use crate::series::{expand_ratfunc, TruncatedSeries};

/// One formal derivative d^alpha x_j. Ordered by unknown, then grlex.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DerivativeVar {
    pub unknown: usize,
    pub index: MultiIndex,
}

impl DerivativeVar {
    pub fn new(unknown: usize, index: MultiIndex) -> Self {
        DerivativeVar { unknown, index }
    }
}

/// Product of derivative variables with positive integer exponents.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DiffMonomial {
    factors: BTreeMap<DerivativeVar, u32>,
}

impl DiffMonomial {
    pub fn one() -> Self {
        DiffMonomial {
            factors: BTreeMap::new(),
        }
    }

    pub fn var(v: DerivativeVar) -> Self {
        let mut factors = BTreeMap::new();
        factors.insert(v, 1);
        DiffMonomial { factors }
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> impl Iterator<Item = (&DerivativeVar, &u32)> {
        self.factors.iter()
    }

    pub fn exponent(&self, v: &DerivativeVar) -> u32 {
        self.factors.get(v).copied().unwrap_or(0)
    }

    /// Total degree in the derivative variables.
    pub fn degree(&self) -> u32 {
        self.factors.values().sum()
    }

    pub fn mul(&self, other: &DiffMonomial) -> DiffMonomial {
        let mut out = self.clone();
        for (v, e) in &other.factors {
            *out.factors.entry(v.clone()).or_insert(0) += e;
        }
        out
    }

    pub fn with_exponent(&self, v: &DerivativeVar, e: u32) -> DiffMonomial {
        let mut out = self.clone();
        if e == 0 {
            out.factors.remove(v);
        } else {
            out.factors.insert(v.clone(), e);
        }
        out
    }
}

/// Differential polynomial in context (m derivations, n unknowns).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffPoly {
    m: usize,
    n: usize,
    terms: BTreeMap<DiffMonomial, RatFunc>,
}

/// Which unknowns occur among the derivative variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnknownUse {
    NoVars,
    Single(usize),
    Mixed,
}

impl DiffPoly {
    pub fn zero(m: usize, n: usize) -> Self {
        DiffPoly {
            m,
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(m: usize, n: usize, c: RatFunc) -> Self {
        assert_eq!(c.nvars(), m, "coefficient variable count mismatch");
        let mut p = DiffPoly::zero(m, n);
        if !c.is_zero() {
            p.terms.insert(DiffMonomial::one(), c);
        }
        p
    }

    pub fn one(m: usize, n: usize) -> Self {
        DiffPoly::constant(m, n, RatFunc::one(m))
    }

    pub fn rational(m: usize, n: usize, c: Rat) -> Self {
        DiffPoly::constant(m, n, RatFunc::constant(m, c))
    }

    /// The single derivative variable d^alpha x_j as a polynomial.
    pub fn var(m: usize, n: usize, unknown: usize, index: MultiIndex) -> Self {
        assert!(unknown < n, "unknown {unknown} out of range for {n}");
        assert_eq!(index.len(), m, "index length mismatch");
        let mut p = DiffPoly::zero(m, n);
        p.terms.insert(
            DiffMonomial::var(DerivativeVar::new(unknown, index)),
            RatFunc::one(m),
        );
        p
    }

    pub fn from_term(m: usize, n: usize, mono: DiffMonomial, coeff: RatFunc) -> Self {
        let mut p = DiffPoly::zero(m, n);
        p.add_term(mono, coeff);
        p
    }

    pub fn derivations(&self) -> usize {
        self.m
    }

    pub fn unknowns(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&DiffMonomial::one())
                .is_some_and(|c| c.is_one())
    }

    /// True when no derivative variable occurs (pure coefficient).
    pub fn is_coefficient(&self) -> bool {
        self.terms.keys().all(|mono| mono.is_one())
    }

    /// The coefficient part when `is_coefficient`, else None.
    pub fn as_coefficient(&self) -> Option<RatFunc> {
        if self.is_zero() {
            return Some(RatFunc::zero(self.m));
        }
        if self.is_coefficient() {
            Some(self.terms.get(&DiffMonomial::one()).unwrap().clone())
        } else {
            None
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&DiffMonomial, &RatFunc)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add_term(&mut self, mono: DiffMonomial, coeff: RatFunc) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&mono) {
            Some(existing) => {
                *existing = existing.add(&coeff);
                if existing.is_zero() {
                    self.terms.remove(&mono);
                }
            }
            None => {
                self.terms.insert(mono, coeff);
            }
        }
    }

    fn check_context(&self, other: &DiffPoly) {
        assert_eq!(self.m, other.m, "derivation count mismatch");
        assert_eq!(self.n, other.n, "unknown count mismatch");
    }

    pub fn add(&self, other: &DiffPoly) -> DiffPoly {
        self.check_context(other);
        let mut out = self.clone();
        for (mono, c) in &other.terms {
            out.add_term(mono.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> DiffPoly {
        let mut out = DiffPoly::zero(self.m, self.n);
        for (mono, c) in &self.terms {
            out.terms.insert(mono.clone(), c.neg());
        }
        out
    }

    pub fn sub(&self, other: &DiffPoly) -> DiffPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &DiffPoly) -> DiffPoly {
        self.check_context(other);
        let mut out = DiffPoly::zero(self.m, self.n);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca.mul(cb));
            }
        }
        out
    }

    pub fn scale(&self, c: &RatFunc) -> DiffPoly {
        let mut out = DiffPoly::zero(self.m, self.n);
        for (mono, ca) in &self.terms {
            out.add_term(mono.clone(), ca.mul(c));
        }
        out
    }

    pub fn pow(&self, e: u32) -> DiffPoly {
        let mut out = DiffPoly::one(self.m, self.n);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// All derivative variables occurring, in canonical order.
    pub fn vars(&self) -> BTreeSet<DerivativeVar> {
        let mut set = BTreeSet::new();
        for mono in self.terms.keys() {
            for (v, _) in mono.factors() {
                set.insert(v.clone());
            }
        }
        set
    }

    /// Largest |alpha| over all derivative variables (0 when none occur).
    pub fn max_derivative_order(&self) -> u32 {
        self.vars().iter().map(|v| v.index.degree()).max().unwrap_or(0)
    }

    /// Degree in one derivative variable.
    pub fn degree_in(&self, v: &DerivativeVar) -> u32 {
        self.terms.keys().map(|mono| mono.exponent(v)).max().unwrap_or(0)
    }

    pub fn unknown_use(&self) -> UnknownUse {
        let mut seen: Option<usize> = None;
        for v in self.vars() {
            match seen {
                None => seen = Some(v.unknown),
                Some(j) if j != v.unknown => return UnknownUse::Mixed,
                _ => {}
            }
        }
        match seen {
            None => UnknownUse::NoVars,
            Some(j) => UnknownUse::Single(j),
        }
    }

    /// Apply the derivation d_i: coefficients via d/dz_i, variables via
    /// the Leibniz rule with d_i(d^alpha x_j) = d^(alpha+e_i) x_j.
    pub fn derive(&self, i: usize) -> DiffPoly {
        assert!(i < self.m, "derivation index out of range");
        let mut out = DiffPoly::zero(self.m, self.n);
        for (mono, coeff) in &self.terms {
            // Coefficient part.
            out.add_term(mono.clone(), coeff.derive(i));
            // Variable part.
            for (v, &e) in mono.factors() {
                let bumped = DerivativeVar::new(v.unknown, v.index.bump(i));
                let rest = mono.with_exponent(v, e - 1);
                let new_mono = rest.mul(&DiffMonomial::var(bumped));
                out.add_term(new_mono, coeff.scale(&Rat::from_integer(e.into())));
            }
        }
        out
    }

    /// Iterated derivation d^gamma.
    pub fn derive_multi(&self, gamma: &MultiIndex) -> DiffPoly {
        assert_eq!(gamma.len(), self.m);
        let mut out = self.clone();
        for (i, &e) in gamma.entries().iter().enumerate() {
            for _ in 0..e {
                out = out.derive(i);
            }
        }
        out
    }

    /// Grlex-largest derivative of the given unknown.
    pub fn leader(&self, unknown: usize) -> Result<DerivativeVar> {
        let mut best: Option<DerivativeVar> = None;
        for v in self.vars() {
            if v.unknown != unknown {
                continue;
            }
            best = Some(match best {
                None => v,
                Some(b) => {
                    if grlex_compare(&v.index, &b.index)? == std::cmp::Ordering::Greater {
                        v
                    } else {
                        b
                    }
                }
            });
        }
        best.ok_or(Error::NoLeader {
            unknown: format!("{unknown}"),
        })
    }

    /// Formal partial derivative with respect to one derivative variable.
    pub fn partial_wrt(&self, v: &DerivativeVar) -> DiffPoly {
        let mut out = DiffPoly::zero(self.m, self.n);
        for (mono, coeff) in &self.terms {
            let e = mono.exponent(v);
            if e > 0 {
                out.add_term(
                    mono.with_exponent(v, e - 1),
                    coeff.scale(&Rat::from_integer(e.into())),
                );
            }
        }
        out
    }

    /// Separant: partial derivative with respect to the leader.
    pub fn separant(&self, unknown: usize) -> Result<DiffPoly> {
        let leader = self.leader(unknown)?;
        Ok(self.partial_wrt(&leader))
    }

    /// Replace one derivative variable by a polynomial.
    pub fn substitute_var(&self, v: &DerivativeVar, image: &DiffPoly) -> DiffPoly {
        self.check_context(image);
        let mut out = DiffPoly::zero(self.m, self.n);
        for (mono, coeff) in &self.terms {
            let e = mono.exponent(v);
            if e == 0 {
                out.add_term(mono.clone(), coeff.clone());
            } else {
                let rest = DiffPoly::from_term(self.m, self.n, mono.with_exponent(v, 0), coeff.clone());
                out = out.add(&rest.mul(&image.pow(e)));
            }
        }
        out
    }

    /// Evaluate at a jet: substitute the series d^alpha(jets[j]) for each
    /// d^alpha x_j and expand coefficients around the jets' base point.
    /// The certified order of the result is N - max |alpha| in self.
    pub fn evaluate_jet(&self, jets: &[TruncatedSeries]) -> Result<TruncatedSeries> {
        let ctx = JetContext::new(self.m, self.n, jets)?;
        let maxdeg = self.max_derivative_order();
        if maxdeg > ctx.order {
            return Err(Error::InsufficientOrder {
                needed: maxdeg,
                available: ctx.order,
            });
        }
        self.evaluate_in(&ctx, ctx.order - maxdeg, false)
    }

    /// Internal evaluation keeping the full order on every intermediate
    /// (callers must certify the retained coefficients themselves).
    pub(crate) fn evaluate_jet_raw(&self, jets: &[TruncatedSeries]) -> Result<TruncatedSeries> {
        let ctx = JetContext::new(self.m, self.n, jets)?;
        self.evaluate_in(&ctx, ctx.order, true)
    }

    fn evaluate_in(
        &self,
        ctx: &JetContext<'_>,
        out_order: u32,
        raw: bool,
    ) -> Result<TruncatedSeries> {
        let mut cache: BTreeMap<DerivativeVar, TruncatedSeries> = BTreeMap::new();
        let mut acc = TruncatedSeries::zero(self.m, out_order, ctx.base.to_vec());
        for (mono, coeff) in &self.terms {
            let mut term = expand_ratfunc(coeff, ctx.base, ctx.order)?.truncate(out_order)?;
            for (v, &e) in mono.factors() {
                let derived = ctx.derived(v, &mut cache, raw)?;
                let factor = derived.truncate(out_order)?;
                for _ in 0..e {
                    term = term.mul(&factor)?;
                }
            }
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }
}

struct JetContext<'a> {
    jets: &'a [TruncatedSeries],
    base: &'a [Rat],
    order: u32,
}

impl<'a> JetContext<'a> {
    fn new(m: usize, n: usize, jets: &'a [TruncatedSeries]) -> Result<Self> {
        if jets.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: jets.len(),
            });
        }
        let first = jets.first().ok_or_else(|| {
            Error::Underdetermined("evaluation requires at least one jet".into())
        })?;
        for jet in jets {
            if jet.nvars() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: jet.nvars(),
                });
            }
            if jet.base() != first.base() || jet.order() != first.order() {
                return Err(Error::ContextMismatch(
                    "jets have different base points or orders".into(),
                ));
            }
        }
        Ok(JetContext {
            jets,
            base: first.base(),
            order: first.order(),
        })
    }

    fn derived(
        &self,
        v: &DerivativeVar,
        cache: &mut BTreeMap<DerivativeVar, TruncatedSeries>,
        raw: bool,
    ) -> Result<TruncatedSeries> {
        if let Some(s) = cache.get(v) {
            return Ok(s.clone());
        }
        let s = if let Some(i) = v.index.first_nonzero() {
            let mut parent_idx = v.index.entries().to_vec();
            parent_idx[i] -= 1;
            let parent = DerivativeVar::new(v.unknown, MultiIndex::new(parent_idx));
            let ps = self.derived(&parent, cache, raw)?;
            if raw {
                ps.derive_raw(i)
            } else {
                ps.derive(i)?
            }
        } else {
            self.jets[v.unknown].clone()
        };
        cache.insert(v.clone(), s.clone());
        Ok(s)
    }
}

// ---------------------------------------------------------------------------
// Integral relations: the one-step prolongation identity.
// ---------------------------------------------------------------------------

/// Result of prolonging a relation once along d1:
/// d1 P = sep * d1^(r+1) x - q, with q below d1^(r+1) x in grlex.
#[derive(Debug, Clone)]
pub struct ProlongationStep {
    pub separant: DiffPoly,
    pub q: DiffPoly,
    pub order: u32,
}

/// The unknown and pure-d1 leader order of a relation, after checking the
/// integral shape (single unknown, leader of the form d1^r x).
pub fn integral_shape(p: &DiffPoly) -> Result<(usize, u32)> {
    let unknown = match p.unknown_use() {
        UnknownUse::Single(j) => j,
        UnknownUse::NoVars => {
            return Err(Error::NotIntegral(
                "no derivative variable occurs".into(),
            ))
        }
        UnknownUse::Mixed => {
            return Err(Error::NotIntegral(
                "several unknowns occur in one relation".into(),
            ))
        }
    };
    let leader = p.leader(unknown)?;
    let r = leader.index.degree();
    if leader.index.get(0) != r {
        return Err(Error::NotIntegral(format!(
            "leader index {} is not a pure d1 derivative",
            leader.index
        )));
    }
    Ok((unknown, r))
}

/// Differentiate the relation once along d1 and solve for the top term.
pub fn prolongation_step(p: &DiffPoly) -> Result<ProlongationStep> {
    let (unknown, r) = integral_shape(p)?;
    let m = p.derivations();
    let leader = DerivativeVar::new(unknown, {
        let mut idx = vec![0; m];
        idx[0] = r;
        MultiIndex::new(idx)
    });
    let separant = p.partial_wrt(&leader);
    let dp = p.derive(0);
    let top = DiffPoly::var(m, p.unknowns(), unknown, {
        let mut idx = vec![0; m];
        idx[0] = r + 1;
        MultiIndex::new(idx)
    });
    let q = separant.mul(&top).sub(&dp);
    Ok(ProlongationStep { separant, q, order: r })
}

/// Integral-element test: the relation vanishes on the witness jet, the
/// separant does not, and the leader is a pure d1 derivative. Structural
/// or evaluation failures report false.
pub fn is_integral(p: &DiffPoly, witness: &TruncatedSeries) -> bool {
    if p.unknowns() != 1 {
        return false;
    }
    let Ok((unknown, _)) = integral_shape(p) else {
        return false;
    };
    let Ok(sep) = p.separant(unknown) else {
        return false;
    };
    let jets = std::slice::from_ref(witness);
    let Ok(p_val) = p.evaluate_jet(jets) else {
        return false;
    };
    let Ok(sep_val) = sep.evaluate_jet(jets) else {
        return false;
    };
    p_val.is_zero() && !sep_val.is_zero()
}

// ---------------------------------------------------------------------------
// Rational expressions in differential polynomials (no gcd reduction; the
// denominator is only required to be nonzero).
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffRationalFunction {
    num: DiffPoly,
    den: DiffPoly,
}

impl DiffRationalFunction {
    pub fn new(num: DiffPoly, den: DiffPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(DiffRationalFunction { num, den })
    }

    pub fn from_poly(p: DiffPoly) -> Self {
        let den = DiffPoly::one(p.derivations(), p.unknowns());
        DiffRationalFunction { num: p, den }
    }

    pub fn num(&self) -> &DiffPoly {
        &self.num
    }

    pub fn den(&self) -> &DiffPoly {
        &self.den
    }

    pub fn derivations(&self) -> usize {
        self.num.derivations()
    }

    pub fn unknowns(&self) -> usize {
        self.num.unknowns()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn add(&self, other: &Self) -> Self {
        DiffRationalFunction {
            num: self
                .num
                .mul(&other.den)
                .add(&other.num.mul(&self.den)),
            den: self.den.mul(&other.den),
        }
    }

    pub fn neg(&self) -> Self {
        DiffRationalFunction {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        DiffRationalFunction {
            num: self.num.mul(&other.num),
            den: self.den.mul(&other.den),
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        if other.num.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(DiffRationalFunction {
            num: self.num.mul(&other.den),
            den: self.den.mul(&other.num),
        })
    }

    /// Quotient rule for the derivation d_i.
    pub fn derive(&self, i: usize) -> Self {
        if self.is_polynomial() {
            return DiffRationalFunction::from_poly(self.num.derive(i));
        }
        DiffRationalFunction {
            num: self
                .num
                .derive(i)
                .mul(&self.den)
                .sub(&self.num.mul(&self.den.derive(i))),
            den: self.den.mul(&self.den),
        }
    }

    /// All derivative variables in numerator and denominator.
    pub fn vars(&self) -> BTreeSet<DerivativeVar> {
        let mut set = self.num.vars();
        set.extend(self.den.vars());
        set
    }

    /// Evaluate at a jet; errors when the denominator's value has zero
    /// constant term.
    pub fn evaluate_jet(&self, jets: &[TruncatedSeries]) -> Result<TruncatedSeries> {
        let num = self.num.evaluate_jet(jets)?;
        if self.is_polynomial() {
            return Ok(num);
        }
        let den = self.den.evaluate_jet(jets)?;
        let shared = num.order().min(den.order());
        num.truncate(shared)?.div(&den.truncate(shared)?)
    }
}

// ---------------------------------------------------------------------------
// Printing. Names are supplied by the caller; defaults are x or x1..xn.
// ---------------------------------------------------------------------------

pub fn default_names(n: usize) -> Vec<String> {
    if n == 1 {
        vec!["x".to_string()]
    } else {
        (1..=n).map(|j| format!("x{j}")).collect()
    }
}

/// Render d^alpha x_j as `d1^2 d2 u`; the zero index renders as the name.
pub fn format_derivative_var(v: &DerivativeVar, names: &[String]) -> String {
    let mut parts = Vec::new();
    for (i, &e) in v.index.entries().iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(format!("d{}", i + 1)),
            _ => parts.push(format!("d{}^{}", i + 1, e)),
        }
    }
    parts.push(names[v.unknown].clone());
    parts.join(" ")
}

/// Deterministic textual form that `parse_diffpoly` reads back exactly.
pub fn format_diffpoly(p: &DiffPoly, names: &[String]) -> String {
    assert!(names.len() >= p.unknowns(), "not enough unknown names");
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    let mut first = true;
    for (mono, coeff) in p.terms.iter().rev() {
        // Pull the sign out of single-monomial numerators for readability.
        let negative = coeff.den().is_one()
            && coeff.num().num_terms() == 1
            && coeff
                .num()
                .leading_term()
                .is_some_and(|(_, c)| c.is_negative());
        let shown = if negative { coeff.neg() } else { coeff.clone() };
        if first {
            if negative {
                out.push('-');
            }
            first = false;
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        let mut factors: Vec<String> = Vec::new();
        if !shown.is_one() || mono.is_one() {
            factors.push(shown.to_string());
        }
        for (v, &e) in mono.factors() {
            let rendered = format_derivative_var(v, names);
            if e == 1 {
                factors.push(rendered);
            } else if v.index.is_zero() {
                factors.push(format!("{rendered}^{e}"));
            } else {
                factors.push(format!("({rendered})^{e}"));
            }
        }
        out.push_str(&factors.join("*"));
    }
    out
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_diffpoly(self, &default_names(self.n)))
    }
}

impl fmt::Display for DiffRationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_polynomial() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}
