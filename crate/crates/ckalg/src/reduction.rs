//! Rewriting modulo a Delta-integral relation: elimination of d1-excess
//! derivatives (tracking the separant power used) and the explicit
//! finite Delta0-generator set of the resulting algebra.

use std::collections::BTreeMap;



use crate::diffpoly::{
    prolongation_step, DerivativeVar, DiffPoly, DiffRationalFunction, UnknownUse,
};
use crate::error::Result;
use crate::multiindex::{indices_up_to, MultiIndex};
use crate::ratfunc::RatFunc;

/// A relation in integral shape: one unknown, leader d1^r x.
///
/// Caches the separant and the prolongation remainder q (so that
/// sep * d1^(r+1) x = q modulo the relation).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegralRelation {
    relation: DiffPoly,
    unknown: usize,
    order: u32,
    separant: DiffPoly,
    q: DiffPoly,
    /// Degree of the relation in its leader; 1 means the leader itself
    /// can be rewritten, not just its proper derivatives.
    leader_degree: u32,
}

impl IntegralRelation {
    pub fn new(relation: DiffPoly) -> Result<Self> {
        let step = prolongation_step(&relation)?;
        let (unknown, order) = crate::diffpoly::integral_shape(&relation)?;
        let leader_degree = relation.degree_in(&Self::leader_of(&relation, unknown, order));
        Ok(IntegralRelation {
            relation,
            unknown,
            order,
            separant: step.separant,
            q: step.q,
            leader_degree,
        })
    }

    fn leader_of(p: &DiffPoly, unknown: usize, order: u32) -> DerivativeVar {
        let mut idx = vec![0u32; p.derivations()];
        idx[0] = order;
        DerivativeVar::new(unknown, MultiIndex::new(idx))
    }

    pub fn relation(&self) -> &DiffPoly {
        &self.relation
    }

    pub fn unknown(&self) -> usize {
        self.unknown
    }

    /// The leader's d1-order r.
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn separant(&self) -> &DiffPoly {
        &self.separant
    }

    /// Remainder of the first d1-prolongation: sep * d1^(r+1) x - d1(rel).
    pub fn q(&self) -> &DiffPoly {
        &self.q
    }

    pub fn leader(&self) -> DerivativeVar {
        Self::leader_of(&self.relation, self.unknown, self.order)
    }

    pub fn is_linear_in_leader(&self) -> bool {
        self.leader_degree == 1
    }
}

// ---------------------------------------------------------------------------
// d1-normal forms.
// ---------------------------------------------------------------------------

/// Is v rewritable modulo rel? Proper d1-excess always is; the leader's
/// level (alpha_1 = r, including mixed derivatives of the leader) only
/// when the relation is linear in the leader.
fn offending(v: &DerivativeVar, rel: &IntegralRelation) -> bool {
    if v.unknown != rel.unknown {
        return false;
    }
    let a1 = v.index.get(0);
    a1 > rel.order || (rel.is_linear_in_leader() && a1 == rel.order)
}

/// Identity data for gamma: sep^k * d^gamma(leader) = A modulo the
/// relation, with A's variables grlex-below gamma + r*e1.
pub(crate) fn prolongation_chain(
    gamma: &MultiIndex,
    rel: &IntegralRelation,
    cache: &mut BTreeMap<MultiIndex, (DiffPoly, u32)>,
) -> (DiffPoly, u32) {
    if let Some(hit) = cache.get(gamma) {
        return hit.clone();
    }
    let entry = if gamma.is_zero() {
        // Only valid for relations linear in the leader:
        // sep * L = sep * L - rel modulo the relation.
        assert!(
            rel.is_linear_in_leader(),
            "leader-level rewriting needs a leader-linear relation"
        );
        let l = DiffPoly::var(
            rel.relation.derivations(),
            rel.relation.unknowns(),
            rel.unknown,
            rel.leader().index,
        );
        (rel.separant.mul(&l).sub(&rel.relation), 1)
    } else if gamma.degree() == 1 && gamma.get(0) == 1 {
        (rel.q.clone(), 1)
    } else {
        // Peel the last nonzero direction so that pure-d1 prefixes reach
        // the q base case before gamma hits zero.
        let i = gamma
            .entries()
            .iter()
            .rposition(|&e| e > 0)
            .expect("nonzero gamma");
        let mut prev = gamma.entries().to_vec();
        prev[i] -= 1;
        let (a, k) = prolongation_chain(&MultiIndex::new(prev), rel, cache);
        let next = rel
            .separant
            .mul(&a.derive(i))
            .sub(&a.mul(&rel.separant.derive(i)).scale(&RatFunc::constant(
                rel.relation.derivations(),
                crate::poly::rat_int(k as i64),
            )));
        (next, k + 1)
    };
    cache.insert(gamma.clone(), entry.clone());
    entry
}

/// Eliminate every rewritable derivative from Q, grlex-largest first.
///
/// Returns (Q', k) with sep^k * Q = Q' modulo the differential ideal of
/// the relation. When the separant is a unit of the coefficient field
/// (no derivative variables), rewriting divides by it directly and k
/// stays 0; otherwise k counts the separant multiplications used to
/// clear denominators.
pub fn reduce_delta1(q: &DiffPoly, rel: &IntegralRelation) -> (DiffPoly, u32) {
    assert_eq!(q.derivations(), rel.relation.derivations());
    assert_eq!(q.unknowns(), rel.relation.unknowns());
    match q.unknown_use() {
        UnknownUse::NoVars => {}
        UnknownUse::Single(j) => assert_eq!(j, rel.unknown, "unknown not shared with the relation"),
        UnknownUse::Mixed => panic!("reduction requires a single shared unknown"),
    }

    let m = q.derivations();
    let sep_unit = rel.separant.as_coefficient();
    let mut cache: BTreeMap<MultiIndex, (DiffPoly, u32)> = BTreeMap::new();
    let mut work = q.clone();
    let mut k_total: u32 = 0;

    loop {
        let target = work
            .vars()
            .into_iter()
            .filter(|v| offending(v, rel))
            .max();
        let Some(v) = target else { break };
        let gamma = v
            .index
            .checked_sub(&rel.leader().index)
            .expect("offending derivative dominates the leader");
        let (a, k) = prolongation_chain(&gamma, rel, &mut cache);

        if let Some(c) = &sep_unit {
            // d^gamma L = A / c^k exactly in the coefficient field.
            let image = a.scale(&c.inv().expect("nonzero separant").pow(k));
            work = work.substitute_var(&v, &image);
        } else {
            // Multiply through by sep^(k*d) and replace (sep^k v)^e by A^e.
            let d = work.degree_in(&v);
            let mut next = DiffPoly::zero(m, work.unknowns());
            for (mono, coeff) in work.terms() {
                let e = mono.exponent(&v);
                let rest = DiffPoly::from_term(
                    m,
                    work.unknowns(),
                    mono.with_exponent(&v, 0),
                    coeff.clone(),
                );
                let lifted = rest
                    .mul(&a.pow(e))
                    .mul(&rel.separant.pow(k * (d - e)));
                next = next.add(&lifted);
            }
            work = next;
            k_total += k * d;
        }
        if work.is_zero() {
            break;
        }
    }
    (work, k_total)
}

// ---------------------------------------------------------------------------
// Finite Delta0-generator sets.
// ---------------------------------------------------------------------------

/// Explicit generators for the algebra of all derivatives modulo the
/// relation, truncated at a Delta0-order bound: Delta0^gamma(d1^j x) for
/// j <= r, plus the inverted separant b2 and its Delta0-derivatives.
/// b1, the localization witness inherited from the inductive step over
/// earlier unknowns, stays symbolic.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    pub b1: String,
    pub b2: DiffPoly,
    /// Delta0^gamma(d1^j x) as plain derivative variables, grlex order.
    pub polynomial: Vec<DiffPoly>,
    /// (gamma, d^gamma(1/b2)) for Delta0-indices gamma up to the bound.
    pub inverted: Vec<(MultiIndex, DiffRationalFunction)>,
}

impl GeneratorSet {
    /// Human-readable generator labels in listing order.
    pub fn labels(&self) -> Vec<String> {
        let mut out: Vec<String> = self.polynomial.iter().map(|p| p.to_string()).collect();
        for (gamma, _) in &self.inverted {
            if gamma.is_zero() {
                out.push("1/b2".into());
            } else {
                let mut ops = String::new();
                for (i, &e) in gamma.entries().iter().enumerate() {
                    if e == 0 {
                        continue;
                    }
                    if e == 1 {
                        ops.push_str(&format!("d{} ", i + 1));
                    } else {
                        ops.push_str(&format!("d{}^{} ", i + 1, e));
                    }
                }
                out.push(format!("{ops}(1/b2)"));
            }
        }
        out
    }
}

pub fn fingen_generators(rel: &IntegralRelation, delta0_order_bound: u32) -> GeneratorSet {
    let m = rel.relation().derivations();
    let n = rel.relation().unknowns();
    let r = rel.order();

    let delta0: Vec<MultiIndex> = indices_up_to(m, delta0_order_bound)
        .into_iter()
        .filter(|g| g.get(0) == 0)
        .collect();

    let mut polynomial = Vec::new();
    for gamma in &delta0 {
        for j in 0..=r {
            let mut idx = gamma.entries().to_vec();
            idx[0] = j;
            polynomial.push(DiffPoly::var(m, n, rel.unknown(), MultiIndex::new(idx)));
        }
    }

    let inv_b2 = DiffRationalFunction::new(DiffPoly::one(m, n), rel.separant().clone())
        .expect("separant of a relation with a leader is nonzero");
    let mut inverted = Vec::new();
    for gamma in &delta0 {
        let mut value = inv_b2.clone();
        for (i, &e) in gamma.entries().iter().enumerate() {
            for _ in 0..e {
                value = value.derive(i);
            }
        }
        inverted.push((gamma.clone(), value));
    }

    GeneratorSet {
        b1: "b1 (localization witness of the inductive step, symbolic)".into(),
        b2: rel.separant().clone(),
        polynomial,
        inverted,
    }
}
