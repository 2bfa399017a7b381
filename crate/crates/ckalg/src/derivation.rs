//! Integer changes of the derivation basis D = M * d and the search for a
//! basis in which given relations become integral (pure-d1 leaders with
//! nonvanishing separants).

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::diffpoly::{is_integral, DerivativeVar, DiffPoly};
use crate::error::{Error, Result};
use crate::multiindex::{indices_up_to, MultiIndex};
use crate::poly::{rat_int, MPoly, Rat};
use crate::ratfunc::RatFunc;
use crate::series::TruncatedSeries;

/// Invertible integer matrix M defining new derivations D_i = sum_j M_ij d_j.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationMatrix {
    m: usize,
    /// Row-major entries.
    entries: Vec<i64>,
}

/// The lambda part of a triangular change D_j = d_j + lambda_j d_1 (j >= 2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaVector(pub Vec<i64>);

impl DerivationMatrix {
    pub fn new(m: usize, entries: Vec<i64>) -> Result<Self> {
        if entries.len() != m * m {
            return Err(Error::Matrix(format!(
                "expected {} entries for a {m}x{m} matrix, got {}",
                m * m,
                entries.len()
            )));
        }
        let mat = DerivationMatrix { m, entries };
        let d = mat.det();
        if d != 1 && d != -1 {
            return Err(Error::Matrix(format!(
                "determinant {d} is not a unit; the change is not invertible over the integers"
            )));
        }
        Ok(mat)
    }

    pub fn identity(m: usize) -> Self {
        let mut entries = vec![0; m * m];
        for i in 0..m {
            entries[i * m + i] = 1;
        }
        DerivationMatrix { m, entries }
    }

    /// M = I + sum_j lambda_j E_{j,1} for j = 2..m.
    pub fn from_lambda(lambda: &LambdaVector) -> Self {
        let m = lambda.0.len() + 1;
        let mut mat = DerivationMatrix::identity(m);
        for (j, &l) in lambda.0.iter().enumerate() {
            mat.entries[(j + 1) * m] = l;
        }
        mat
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.m + j]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        (0..self.m)
            .map(|i| (0..self.m).map(|j| self.entry(i, j)).collect())
            .collect()
    }

    pub fn det(&self) -> i64 {
        det_rec(&self.entries, self.m)
    }

    /// Exact inverse; integer because the determinant is a unit.
    pub fn inverse(&self) -> DerivationMatrix {
        let d = self.det();
        let m = self.m;
        let mut inv = vec![0i64; m * m];
        for i in 0..m {
            for j in 0..m {
                // Cofactor expansion: inv[j][i] = det(minor_ij) * sign / det.
                let minor = minor_matrix(&self.entries, m, i, j);
                let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                inv[j * m + i] = sign * det_rec(&minor, m - 1) * d;
            }
        }
        DerivationMatrix { m, entries: inv }
    }

    pub fn matmul(&self, other: &DerivationMatrix) -> DerivationMatrix {
        assert_eq!(self.m, other.m);
        let m = self.m;
        let mut entries = vec![0i64; m * m];
        for i in 0..m {
            for j in 0..m {
                entries[i * m + j] =
                    (0..m).map(|k| self.entry(i, k) * other.entry(k, j)).sum();
            }
        }
        DerivationMatrix { m, entries }
    }
}

fn det_rec(entries: &[i64], m: usize) -> i64 {
    match m {
        0 => 1,
        1 => entries[0],
        2 => entries[0] * entries[3] - entries[1] * entries[2],
        _ => {
            let mut acc = 0;
            for j in 0..m {
                let a = entries[j];
                if a == 0 {
                    continue;
                }
                let minor = minor_matrix(entries, m, 0, j);
                let sign = if j % 2 == 0 { 1 } else { -1 };
                acc += sign * a * det_rec(&minor, m - 1);
            }
            acc
        }
    }
}

fn minor_matrix(entries: &[i64], m: usize, skip_row: usize, skip_col: usize) -> Vec<i64> {
    let mut out = Vec::with_capacity((m - 1) * (m - 1));
    for i in 0..m {
        if i == skip_row {
            continue;
        }
        for j in 0..m {
            if j == skip_col {
                continue;
            }
            out.push(entries[i * m + j]);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Rewriting a differential polynomial in the new derivations.
// ---------------------------------------------------------------------------

/// Express P in the derivations D = M*d and the matching new coordinates.
///
/// Derivative variables expand through d_j = sum_k (M^-1)_jk D_k
/// multinomially; coefficients f(z) become f(M^T y) in the new coordinates
/// y = M^-T z, which makes the operation a ring homomorphism that
/// intertwines the two derivation actions.
pub fn transform(p: &DiffPoly, mat: &DerivationMatrix) -> Result<DiffPoly> {
    let m = p.derivations();
    if mat.size() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: mat.size(),
        });
    }
    let n = p.unknowns();
    let inv = mat.inverse();

    // Image of each derivative variable, built by iterating the first-order
    // rule d_j = sum_k inv[j][k] D_k; memoized per variable.
    let mut var_images: BTreeMap<DerivativeVar, DiffPoly> = BTreeMap::new();

    // Coordinate substitution for the coefficients: z_j = sum_k M_kj y_k.
    let coord_images: Vec<MPoly> = (0..m)
        .map(|j| {
            let mut p = MPoly::zero(m);
            for k in 0..m {
                let c = mat.entry(k, j);
                if c != 0 {
                    p = p.add(&MPoly::var(m, k).scale(&rat_int(c)));
                }
            }
            p
        })
        .collect();

    let mut out = DiffPoly::zero(m, n);
    for (mono, coeff) in p.terms() {
        let new_coeff = coeff.compose(&coord_images)?;
        let mut term = DiffPoly::constant(m, n, new_coeff);
        for (v, &e) in mono.factors() {
            let img = image_rec(v, &inv, m, n, &mut var_images);
            term = term.mul(&img.pow(e));
        }
        out = out.add(&term);
    }
    Ok(out)
}

fn image_rec(
    v: &DerivativeVar,
    inv: &DerivationMatrix,
    m: usize,
    n: usize,
    images: &mut BTreeMap<DerivativeVar, DiffPoly>,
) -> DiffPoly {
    if let Some(img) = images.get(v) {
        return img.clone();
    }
    let img = match v.index.first_nonzero() {
        None => DiffPoly::var(m, n, v.unknown, v.index.clone()),
        Some(j) => {
            // v = d_j applied to the parent variable; in the new basis
            // d_j = sum_k inv[j][k] D_k acts on the parent's image.
            let mut parent_idx = v.index.entries().to_vec();
            parent_idx[j] -= 1;
            let parent = DerivativeVar::new(v.unknown, MultiIndex::new(parent_idx));
            let parent_img = image_rec(&parent, inv, m, n, images);
            let mut acc = DiffPoly::zero(m, n);
            for k in 0..m {
                let c = inv.entry(j, k);
                if c != 0 {
                    acc = acc.add(
                        &parent_img
                            .derive(k)
                            .scale(&RatFunc::constant(m, rat_int(c))),
                    );
                }
            }
            acc
        }
    };
    images.insert(v.clone(), img.clone());
    img
}

/// Rewrite a series in the coordinates matching the new derivations:
/// s*(y) = s(M^T y), so the i-th partial of s* realizes D_i = sum M_ij d_j.
pub fn coordinate_change_series(
    s: &TruncatedSeries,
    mat: &DerivationMatrix,
) -> Result<TruncatedSeries> {
    let m = s.nvars();
    if mat.size() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: mat.size(),
        });
    }
    if s.base().iter().any(|c| !c.is_zero()) {
        return Err(Error::ContextMismatch(
            "coordinate change requires a series based at the origin".into(),
        ));
    }
    // Finite coefficient data as a polynomial in t, composed with the
    // linear forms (M^T y)_j = sum_k M_kj y_k; degrees are preserved, so
    // the certified order carries over.
    let mut poly = MPoly::zero(m);
    for (alpha, c) in s.coeffs() {
        poly.add_term(alpha.clone(), c.clone());
    }
    let images: Vec<MPoly> = (0..m)
        .map(|j| {
            let mut p = MPoly::zero(m);
            for k in 0..m {
                let c = mat.entry(k, j);
                if c != 0 {
                    p = p.add(&MPoly::var(m, k).scale(&rat_int(c)));
                }
            }
            p
        })
        .collect();
    let composed = poly.compose(&images);
    let mut out = TruncatedSeries::zero(m, s.order(), s.base().to_vec());
    for (alpha, c) in composed.terms() {
        if alpha.degree() <= s.order() {
            out.set_coeff(alpha.clone(), c.clone());
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// The symbolic separant in the triangular family D_j = d_j + lambda_j d_1.
// ---------------------------------------------------------------------------

/// Polynomial in lambda_2..lambda_m with differential-polynomial
/// coefficients, keyed by the lambda exponent vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaPoly {
    pub coeffs: BTreeMap<MultiIndex, DiffPoly>,
}

impl LambdaPoly {
    /// Specialize the lambda variables to integers.
    pub fn eval(&self, lambda: &LambdaVector, m: usize, n: usize) -> DiffPoly {
        let mut acc = DiffPoly::zero(m, n);
        for (q, coeff) in &self.coeffs {
            let mut factor = Rat::one();
            for (j, &e) in q.entries().iter().enumerate() {
                for _ in 0..e {
                    factor *= rat_int(lambda.0[j]);
                }
            }
            if !factor.is_zero() {
                acc = acc.add(&coeff.scale(&RatFunc::constant(m, factor)));
            }
        }
        acc
    }

    /// The lambda = 0 coefficient.
    pub fn constant_term(&self, m: usize, n: usize) -> DiffPoly {
        let zero = MultiIndex::zero(if self.coeffs.is_empty() {
            0
        } else {
            self.coeffs.keys().next().unwrap().len()
        });
        self.coeffs
            .get(&zero)
            .cloned()
            .unwrap_or_else(|| DiffPoly::zero(m, n))
    }
}

/// s(lambda) = sum over |q| = r of lambda_2^(q_2) ... lambda_m^(q_m)
/// times the partial of f with respect to d^q x, where r is the total
/// order of f's leader. Nonvanishing of s at lambda certifies that the
/// triangular change M(lambda) gives f a pure-D1 leader of order r with
/// that value as (up to sign) its separant.
pub fn symbolic_lambda_separant(f: &DiffPoly) -> Result<LambdaPoly> {
    let unknown = match f.unknown_use() {
        crate::diffpoly::UnknownUse::Single(j) => j,
        crate::diffpoly::UnknownUse::NoVars => {
            return Err(Error::NoLeader {
                unknown: "(none occurs)".into(),
            })
        }
        crate::diffpoly::UnknownUse::Mixed => {
            return Err(Error::NotIntegral(
                "several unknowns occur in one relation".into(),
            ))
        }
    };
    let leader = f.leader(unknown)?;
    let r = leader.index.degree();
    let m = f.derivations();
    let mut coeffs = BTreeMap::new();
    for q in indices_up_to(m, r) {
        if q.degree() != r {
            continue;
        }
        let partial = f.partial_wrt(&DerivativeVar::new(unknown, q.clone()));
        if partial.is_zero() {
            continue;
        }
        coeffs.insert(q.tail(), partial);
    }
    Ok(LambdaPoly { coeffs })
}

// ---------------------------------------------------------------------------
// Search for an integralizing change of derivations.
// ---------------------------------------------------------------------------

/// Integer tuples of length k ordered by increasing max-norm box; inside a
/// box lexicographically with per-coordinate order 0, 1, -1, 2, -2, ...
/// so the zero tuple comes first and positive candidates precede their
/// negatives.
pub(crate) fn lambda_candidates(k: usize, bound: i64) -> impl Iterator<Item = Vec<i64>> {
    let coords: Vec<i64> = std::iter::once(0)
        .chain((1..=bound).flat_map(|v| [v, -v]))
        .collect();
    let mut boxes: Vec<Vec<i64>> = Vec::new();
    let mut stack = vec![Vec::with_capacity(k)];
    // Depth-first in the magnitude-then-sign coordinate order enumerates
    // lexicographically; we then stable-partition by max-norm.
    while let Some(prefix) = stack.pop() {
        if prefix.len() == k {
            boxes.push(prefix);
            continue;
        }
        for &c in coords.iter().rev() {
            let mut next = prefix.clone();
            next.push(c);
            stack.push(next);
        }
    }
    let norm = |t: &[i64]| t.iter().map(|v| v.abs()).max().unwrap_or(0);
    boxes.sort_by_key(|t| norm(t));
    boxes.into_iter()
}

/// Find integer lambda (and the matrix M(lambda)) making every relation
/// integral on its transformed witness. Witness series must be based at
/// the origin. Candidates are tried up to the given max-norm bound.
pub fn find_integral_change(
    m: usize,
    relations: &[(DiffPoly, TruncatedSeries)],
    bound: i64,
) -> Result<(LambdaVector, DerivationMatrix)> {
    if m == 0 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: 0,
        });
    }
    for (f, w) in relations {
        if f.derivations() != m || w.nvars() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: f.derivations().max(w.nvars()),
            });
        }
    }
    for lambda in lambda_candidates(m - 1, bound) {
        let lv = LambdaVector(lambda);
        let mat = DerivationMatrix::from_lambda(&lv);
        let mut all_ok = true;
        for (f, witness) in relations {
            let g = transform(f, &mat)?;
            // Structural check: the transformed leader must be pure D1 of
            // the same total order, and the witness must certify it.
            let changed = coordinate_change_series(witness, &mat)?;
            if !is_integral(&g, &changed) {
                all_ok = false;
                break;
            }
        }
        if all_ok {
            return Ok((lv, mat));
        }
    }
    Err(Error::SearchExhausted { bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    fn x2(v: &[u32]) -> DiffPoly {
        DiffPoly::var(2, 1, 0, mi(v))
    }

    fn origin(m: usize) -> Vec<Rat> {
        vec![Rat::zero(); m]
    }

    #[test]
    fn determinant_and_inverse() {
        let m = DerivationMatrix::new(2, vec![1, 0, 1, 1]).unwrap();
        assert_eq!(m.det(), 1);
        let inv = m.inverse();
        assert_eq!(inv.rows(), vec![vec![1, 0], vec![-1, 1]]);
        assert_eq!(m.matmul(&inv), DerivationMatrix::identity(2));
        assert!(DerivationMatrix::new(2, vec![2, 0, 0, 1]).is_err());
        let m3 = DerivationMatrix::new(3, vec![1, 0, 0, 2, 1, 0, 3, 0, 1]).unwrap();
        assert_eq!(m3.matmul(&m3.inverse()), DerivationMatrix::identity(3));
    }

    #[test]
    fn transform_rewrites_old_d2() {
        // M = [[1,0],[1,1]]: D1 = d1, D2 = d1 + d2, so d2 = D2 - D1.
        let mat = DerivationMatrix::new(2, vec![1, 0, 1, 1]).unwrap();
        let p = x2(&[0, 1]); // d2 x
        let t = transform(&p, &mat).unwrap();
        assert_eq!(t, x2(&[0, 1]).sub(&x2(&[1, 0])));
    }

    #[test]
    fn transform_is_a_ring_homomorphism() {
        let mat = DerivationMatrix::new(2, vec![1, 0, 2, 1]).unwrap();
        let p = x2(&[1, 0]).mul(&x2(&[0, 1])).add(&x2(&[0, 0]));
        let q = x2(&[1, 1]).scale(&RatFunc::var(2, 0));
        assert_eq!(
            transform(&p.mul(&q), &mat).unwrap(),
            transform(&p, &mat).unwrap().mul(&transform(&q, &mat).unwrap())
        );
        assert_eq!(
            transform(&p.add(&q), &mat).unwrap(),
            transform(&p, &mat).unwrap().add(&transform(&q, &mat).unwrap())
        );
    }

    #[test]
    fn transform_intertwines_derivations() {
        // Old d_j corresponds to sum_k inv[j][k] D_k on the transformed side.
        let mat = DerivationMatrix::new(2, vec![1, 0, 1, 1]).unwrap();
        let inv = mat.inverse();
        let p = x2(&[1, 0]).mul(&x2(&[0, 1])).scale(&RatFunc::var(2, 1));
        for j in 0..2 {
            let lhs = transform(&p.derive(j), &mat).unwrap();
            let tp = transform(&p, &mat).unwrap();
            let mut rhs = DiffPoly::zero(2, 1);
            for k in 0..2 {
                let c = inv.entry(j, k);
                if c != 0 {
                    rhs = rhs.add(&tp.derive(k).scale(&RatFunc::constant(2, rat_int(c))));
                }
            }
            assert_eq!(lhs, rhs, "derivation {j}");
        }
    }

    #[test]
    fn transform_roundtrip() {
        let mat = DerivationMatrix::new(2, vec![1, 0, 3, 1]).unwrap();
        let p = x2(&[2, 1])
            .pow(2)
            .add(&x2(&[0, 1]).scale(&RatFunc::var(2, 0)))
            .sub(&DiffPoly::one(2, 1));
        let there = transform(&p, &mat).unwrap();
        let back = transform(&there, &mat.inverse()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn coordinate_change_keeps_t2_fixed_for_triangular_m() {
        let mat = DerivationMatrix::new(2, vec![1, 0, 1, 1]).unwrap();
        let s = TruncatedSeries::variable(2, 3, origin(2), 1);
        let changed = coordinate_change_series(&s, &mat).unwrap();
        assert_eq!(changed, s);
    }

    #[test]
    fn coordinate_change_duality() {
        // Partial_i of the changed series equals the change of
        // (sum_j M_ij d_j) applied to the original.
        let mat = DerivationMatrix::new(2, vec![1, 0, 2, 1]).unwrap();
        let p = MPoly::var(2, 0)
            .pow(2)
            .mul(&MPoly::var(2, 1))
            .add(&MPoly::var(2, 1).pow(3));
        let s = TruncatedSeries::from_poly(&p, 6, origin(2));
        let changed = coordinate_change_series(&s, &mat).unwrap();
        for i in 0..2 {
            let lhs = changed.derive(i).unwrap();
            let mut combo = TruncatedSeries::zero(2, s.order() - 1, origin(2));
            for j in 0..2 {
                let c = mat.entry(i, j);
                if c != 0 {
                    combo = combo
                        .add(&s.derive(j).unwrap().scale(&rat_int(c)))
                        .unwrap();
                }
            }
            let rhs = coordinate_change_series(&combo, &mat).unwrap();
            assert_eq!(lhs, rhs, "derivation {i}");
        }
    }

    #[test]
    fn coordinate_change_requires_origin() {
        let mat = DerivationMatrix::identity(2);
        let s = TruncatedSeries::zero(2, 2, vec![rat_int(1), Rat::zero()]);
        assert_eq!(
            coordinate_change_series(&s, &mat).unwrap_err().kind(),
            "context-mismatch"
        );
    }

    #[test]
    fn symbolic_separant_examples() {
        // f = d2 x - 1: s(lambda) = lambda_2.
        let f = x2(&[0, 1]).sub(&DiffPoly::one(2, 1));
        let s = symbolic_lambda_separant(&f).unwrap();
        assert_eq!(s.coeffs.len(), 1);
        assert!(s.coeffs.get(&mi(&[1])).unwrap().is_one());
        // f = d1 x * d2 x: s(lambda) = d2 x + lambda_2 d1 x.
        let g = x2(&[1, 0]).mul(&x2(&[0, 1]));
        let sg = symbolic_lambda_separant(&g).unwrap();
        assert_eq!(sg.coeffs.get(&mi(&[0])).unwrap(), &x2(&[0, 1]));
        assert_eq!(sg.coeffs.get(&mi(&[1])).unwrap(), &x2(&[1, 0]));
        // Specializing at lambda = 0 picks out the d1^r partial.
        let at_zero = sg.eval(&LambdaVector(vec![0]), 2, 1);
        assert_eq!(at_zero, x2(&[0, 1]));
    }

    #[test]
    fn candidate_enumeration_order() {
        let cands: Vec<Vec<i64>> = lambda_candidates(1, 2).collect();
        assert_eq!(cands, vec![vec![0], vec![1], vec![-1], vec![2], vec![-2]]);
        let cands2: Vec<Vec<i64>> = lambda_candidates(2, 1).collect();
        assert_eq!(
            cands2,
            vec![
                vec![0, 0],
                vec![0, 1],
                vec![0, -1],
                vec![1, 0],
                vec![1, 1],
                vec![1, -1],
                vec![-1, 0],
                vec![-1, 1],
                vec![-1, -1],
            ]
        );
    }

    #[test]
    fn lambda_search_fixture() {
        // f = d2 x - 1 with witness t2 needs lambda = (1).
        let f = x2(&[0, 1]).sub(&DiffPoly::one(2, 1));
        let witness = TruncatedSeries::variable(2, 4, origin(2), 1);
        let (lambda, mat) = find_integral_change(2, &[(f.clone(), witness)], 32).unwrap();
        assert_eq!(lambda, LambdaVector(vec![1]));
        assert_eq!(mat.rows(), vec![vec![1, 0], vec![1, 1]]);
        let g = transform(&f, &mat).unwrap();
        // g = D2 x - D1 x - 1 with leader D1 x and separant -1.
        assert_eq!(
            g,
            x2(&[0, 1]).sub(&x2(&[1, 0])).sub(&DiffPoly::one(2, 1))
        );
        let sep = g.separant(0).unwrap();
        assert_eq!(sep, DiffPoly::one(2, 1).neg());
    }

    #[test]
    fn lambda_search_returns_zero_when_already_integral() {
        // d1 x - x with the exp(z1) witness is already integral.
        let f = x2(&[1, 0]).sub(&x2(&[0, 0]));
        let mut witness = TruncatedSeries::zero(2, 4, origin(2));
        let mut c = Rat::one();
        for k in 0..=4u32 {
            if k > 0 {
                c /= Rat::from_integer(k.into());
            }
            witness.set_coeff(mi(&[k, 0]), c.clone());
        }
        let (lambda, mat) = find_integral_change(2, &[(f, witness)], 32).unwrap();
        assert_eq!(lambda, LambdaVector(vec![0]));
        assert_eq!(mat, DerivationMatrix::identity(2));
    }

    #[test]
    fn lambda_search_exhaustion() {
        // d2 x - 1 with a witness that never vanishes on it: x = 0 series
        // fails the relation for every lambda, exhausting the search.
        let f = x2(&[0, 1]).sub(&DiffPoly::one(2, 1));
        let witness = TruncatedSeries::zero(2, 4, origin(2));
        let err = find_integral_change(2, &[(f, witness)], 2).unwrap_err();
        assert_eq!(err, Error::SearchExhausted { bound: 2 });
    }

    #[test]
    fn vacuous_search_accepts_identity() {
        let (lambda, mat) = find_integral_change(2, &[], 32).unwrap();
        assert_eq!(lambda, LambdaVector(vec![0]));
        assert_eq!(mat, DerivationMatrix::identity(2));
    }

    #[test]
    fn lambda_poly_eval_uses_rational_arithmetic() {
        let f = x2(&[1, 0]).mul(&x2(&[0, 1]));
        let s = symbolic_lambda_separant(&f).unwrap();
        let v = s.eval(&LambdaVector(vec![3]), 2, 1);
        assert_eq!(
            v,
            x2(&[0, 1]).add(&x2(&[1, 0]).scale(&RatFunc::constant(2, rat(3, 1))))
        );
    }
}
