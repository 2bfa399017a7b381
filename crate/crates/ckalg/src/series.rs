//! Truncated multivariate power series with explicit certified order.
//!
//! A series lives at a base point w and stores rational coefficients of
//! (z - w)^alpha for |alpha| <= order. The order says which coefficients are
//! certified; operations never silently recenter or extend it.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::multiindex::MultiIndex;
use crate::poly::{format_rat, MPoly, Rat};
use crate::ratfunc::RatFunc;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    nvars: usize,
    order: u32,
    base: Vec<Rat>,
    coeffs: BTreeMap<MultiIndex, Rat>,
}

impl TruncatedSeries {
    pub fn zero(nvars: usize, order: u32, base: Vec<Rat>) -> Self {
        assert_eq!(base.len(), nvars, "base point length mismatch");
        TruncatedSeries {
            nvars,
            order,
            base,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, order: u32, base: Vec<Rat>, c: Rat) -> Self {
        let mut s = TruncatedSeries::zero(nvars, order, base);
        s.set_coeff(MultiIndex::zero(nvars), c);
        s
    }

    /// The local coordinate t_i = z_i - w_i; requires order >= 1.
    pub fn variable(nvars: usize, order: u32, base: Vec<Rat>, i: usize) -> Self {
        assert!(i < nvars && order >= 1);
        let mut s = TruncatedSeries::zero(nvars, order, base);
        s.set_coeff(MultiIndex::unit(nvars, i), Rat::one());
        s
    }

    /// Expansion of a polynomial around the base point (exact, then cut).
    pub fn from_poly(p: &MPoly, order: u32, base: Vec<Rat>) -> Self {
        assert_eq!(p.nvars(), base.len());
        let shifted = p.shift(&base);
        let mut s = TruncatedSeries::zero(p.nvars(), order, base);
        for (alpha, c) in shifted.terms() {
            if alpha.degree() <= order {
                s.set_coeff(alpha.clone(), c.clone());
            }
        }
        s
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn base(&self) -> &[Rat] {
        &self.base
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&MultiIndex, &Rat)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> Rat {
        self.coeffs.get(alpha).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn set_coeff(&mut self, alpha: MultiIndex, c: Rat) {
        assert_eq!(alpha.len(), self.nvars);
        assert!(alpha.degree() <= self.order, "coefficient beyond order");
        if c.is_zero() {
            self.coeffs.remove(&alpha);
        } else {
            self.coeffs.insert(alpha, c);
        }
    }

    pub fn add_coeff(&mut self, alpha: MultiIndex, c: Rat) {
        let cur = self.coeff(&alpha);
        self.set_coeff(alpha, cur + c);
    }

    fn check_context(&self, other: &TruncatedSeries) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: other.nvars,
            });
        }
        if self.base != other.base {
            return Err(Error::ContextMismatch(
                "series have different base points".into(),
            ));
        }
        if self.order != other.order {
            return Err(Error::ContextMismatch(format!(
                "series have different truncation orders ({} vs {})",
                self.order, other.order
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.check_context(other)?;
        let mut out = self.clone();
        for (alpha, c) in &other.coeffs {
            out.add_coeff(alpha.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> TruncatedSeries {
        let mut out = TruncatedSeries::zero(self.nvars, self.order, self.base.clone());
        for (alpha, c) in &self.coeffs {
            out.coeffs.insert(alpha.clone(), -c.clone());
        }
        out
    }

    pub fn sub(&self, other: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.add(&other.neg())
    }

    /// Product, truncated at the common order.
    pub fn mul(&self, other: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.check_context(other)?;
        let mut out = TruncatedSeries::zero(self.nvars, self.order, self.base.clone());
        for (a, ca) in &self.coeffs {
            let da = a.degree();
            for (b, cb) in &other.coeffs {
                if da + b.degree() > self.order {
                    continue;
                }
                out.add_coeff(a.add(b).expect("equal lengths"), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rat) -> TruncatedSeries {
        let mut out = TruncatedSeries::zero(self.nvars, self.order, self.base.clone());
        if c.is_zero() {
            return out;
        }
        for (alpha, ca) in &self.coeffs {
            out.coeffs.insert(alpha.clone(), ca * c);
        }
        out
    }

    /// Termwise partial derivative; the certified order drops by one.
    pub fn derive(&self, i: usize) -> Result<TruncatedSeries> {
        if i >= self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: i + 1,
            });
        }
        if self.order == 0 {
            return Err(Error::InsufficientOrder {
                needed: 1,
                available: 0,
            });
        }
        let mut out = TruncatedSeries::zero(self.nvars, self.order - 1, self.base.clone());
        for (alpha, c) in &self.coeffs {
            let e = alpha.get(i);
            if e > 0 {
                let mut v = alpha.entries().to_vec();
                v[i] = e - 1;
                let idx = MultiIndex::new(v);
                if idx.degree() <= out.order {
                    out.add_coeff(idx, c * Rat::from_integer(BigInt::from(e)));
                }
            }
        }
        Ok(out)
    }

    /// Termwise derivative that keeps the stated order. Only for internal
    /// use where a separate argument certifies the retained coefficients.
    pub(crate) fn derive_raw(&self, i: usize) -> TruncatedSeries {
        assert!(i < self.nvars);
        let mut out = TruncatedSeries::zero(self.nvars, self.order, self.base.clone());
        for (alpha, c) in &self.coeffs {
            let e = alpha.get(i);
            if e > 0 {
                let mut v = alpha.entries().to_vec();
                v[i] = e - 1;
                out.add_coeff(MultiIndex::new(v), c * Rat::from_integer(BigInt::from(e)));
            }
        }
        out
    }

    /// Lower the truncation order, dropping coefficients above it.
    pub fn truncate(&self, order: u32) -> Result<TruncatedSeries> {
        if order > self.order {
            return Err(Error::InsufficientOrder {
                needed: order,
                available: self.order,
            });
        }
        let mut out = TruncatedSeries::zero(self.nvars, order, self.base.clone());
        for (alpha, c) in &self.coeffs {
            if alpha.degree() <= order {
                out.coeffs.insert(alpha.clone(), c.clone());
            }
        }
        Ok(out)
    }

    /// Equality after truncating both sides to the given order.
    pub fn eq_to_order(&self, other: &TruncatedSeries, order: u32) -> Result<bool> {
        Ok(self.truncate(order)? == other.truncate(order)?)
    }

    /// Value at the base point.
    pub fn value_at_base(&self) -> Rat {
        self.coeff(&MultiIndex::zero(self.nvars))
    }

    /// Multiplicative inverse; the constant term must be nonzero.
    pub fn inverse(&self) -> Result<TruncatedSeries> {
        let a0 = self.value_at_base();
        if a0.is_zero() {
            return Err(Error::Pole(
                "series has zero constant term, no inverse".into(),
            ));
        }
        let inv_a0 = Rat::one() / a0;
        let mut out = TruncatedSeries::zero(self.nvars, self.order, self.base.clone());
        for alpha in crate::multiindex::indices_up_to(self.nvars, self.order) {
            if alpha.is_zero() {
                out.set_coeff(alpha, inv_a0.clone());
                continue;
            }
            // b_alpha = -(1/a0) sum_{0 < beta <= alpha} a_beta b_{alpha-beta}
            let mut acc = Rat::zero();
            for (beta, a_beta) in &self.coeffs {
                if beta.is_zero() {
                    continue;
                }
                if let Some(rest) = alpha.checked_sub(beta) {
                    let b_rest = out.coeff(&rest);
                    if !b_rest.is_zero() {
                        acc += a_beta * &b_rest;
                    }
                }
            }
            out.set_coeff(alpha, -(&inv_a0 * acc));
        }
        Ok(out)
    }

    pub fn div(&self, other: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.mul(&other.inverse()?)
    }

    /// Coefficient slice of (z1 - w1)^k: a series in the remaining
    /// variables at the shortened base point, certified to order - k.
    pub fn slice_first(&self, k: u32) -> Result<TruncatedSeries> {
        if self.nvars == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if k > self.order {
            return Err(Error::InsufficientOrder {
                needed: k,
                available: self.order,
            });
        }
        let mut out =
            TruncatedSeries::zero(self.nvars - 1, self.order - k, self.base[1..].to_vec());
        for (alpha, c) in &self.coeffs {
            if alpha.get(0) == k {
                out.coeffs.insert(alpha.tail(), c.clone());
            }
        }
        Ok(out)
    }

    /// Restriction to the hyperplane z_1 = w_1 (drop all t_1 powers).
    pub fn restrict_first(&self) -> Result<TruncatedSeries> {
        if self.nvars == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        let mut out = TruncatedSeries::zero(self.nvars - 1, self.order, self.base[1..].to_vec());
        for (alpha, c) in &self.coeffs {
            if alpha.get(0) == 0 {
                out.coeffs.insert(alpha.tail(), c.clone());
            }
        }
        Ok(out)
    }

    /// View a function of z2..zm as a function of z1..zm constant in z1.
    /// Exact: every t_1-coefficient of the embedding is genuinely zero.
    pub fn embed_first(&self, w1: Rat) -> TruncatedSeries {
        let mut base = Vec::with_capacity(self.nvars + 1);
        base.push(w1);
        base.extend_from_slice(&self.base);
        let mut out = TruncatedSeries::zero(self.nvars + 1, self.order, base);
        for (alpha, c) in &self.coeffs {
            out.coeffs.insert(alpha.prepend(0), c.clone());
        }
        out
    }

    /// Assemble sum_k t_1^k * slices[k] into an n+1-variable series.
    pub fn from_slices(slices: &[TruncatedSeries], w1: Rat, order: u32) -> Result<TruncatedSeries> {
        let first = slices.first().ok_or_else(|| {
            Error::Underdetermined("no slices given to assemble a series".into())
        })?;
        let mut base = Vec::with_capacity(first.nvars + 1);
        base.push(w1);
        base.extend_from_slice(&first.base);
        let mut out = TruncatedSeries::zero(first.nvars + 1, order, base);
        for (k, s) in slices.iter().enumerate() {
            let k = k as u32;
            if k > order {
                break;
            }
            for (alpha, c) in &s.coeffs {
                if k + alpha.degree() <= order {
                    out.coeffs.insert(alpha.prepend(k), c.clone());
                }
            }
        }
        Ok(out)
    }
}

/// Taylor expansion of a rational function around a base point.
/// Errors with a pole when the denominator vanishes at the point.
pub fn expand_ratfunc(f: &RatFunc, base: &[Rat], order: u32) -> Result<TruncatedSeries> {
    assert_eq!(f.nvars(), base.len(), "base point length mismatch");
    let num = TruncatedSeries::from_poly(f.num(), order, base.to_vec());
    if f.is_polynomial() {
        return Ok(num);
    }
    let den = TruncatedSeries::from_poly(f.den(), order, base.to_vec());
    if den.value_at_base().is_zero() {
        return Err(Error::Pole(format!(
            "{} at the expansion point",
            f.den()
        )));
    }
    num.mul(&den.inverse()?)
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            write!(f, "0")?;
        } else {
            let mut first = true;
            for (alpha, c) in &self.coeffs {
                let (sign, mag) = if c.is_negative() {
                    ("-", -c.clone())
                } else {
                    ("+", c.clone())
                };
                if first {
                    if sign == "-" {
                        write!(f, "-")?;
                    }
                    first = false;
                } else {
                    write!(f, " {sign} ")?;
                }
                let mono = format_t_monomial(alpha);
                if mono.is_empty() {
                    write!(f, "{}", format_rat(&mag))?;
                } else if mag.is_one() {
                    write!(f, "{mono}")?;
                } else {
                    write!(f, "{}*{}", format_rat(&mag), mono)?;
                }
            }
        }
        write!(f, " + O(t^{})", self.order + 1)
    }
}

fn format_t_monomial(alpha: &MultiIndex) -> String {
    let mut parts = Vec::new();
    for (i, &e) in alpha.entries().iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(format!("t{}", i + 1)),
            _ => parts.push(format!("t{}^{}", i + 1, e)),
        }
    }
    parts.join("*")
}
