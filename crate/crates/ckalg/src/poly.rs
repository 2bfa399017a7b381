//! Sparse multivariate polynomials over Q in the coordinates z1..zm.
//!
//! Terms are kept in a BTreeMap keyed by exponent multi-index, so iteration
//! is always grlex-ascending and printing is deterministic. Zero
//! coefficients are never stored.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::multiindex::MultiIndex;

pub type Rat = BigRational;

/// Integer-valued rational helper.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// p/q as an exact rational; q must be nonzero.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// Polynomial in `nvars` commuting variables with rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MPoly {
    nvars: usize,
    terms: BTreeMap<MultiIndex, Rat>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rat) -> Self {
        let mut p = MPoly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(MultiIndex::zero(nvars), c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        MPoly::constant(nvars, Rat::one())
    }

    /// The variable z_i (0-based).
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable {i} out of range for {nvars} variables");
        let mut p = MPoly::zero(nvars);
        p.terms.insert(MultiIndex::unit(nvars, i), Rat::one());
        p
    }

    /// Single term c * z^alpha.
    pub fn monomial(nvars: usize, alpha: MultiIndex, c: Rat) -> Self {
        assert_eq!(alpha.len(), nvars);
        let mut p = MPoly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(alpha, c);
        }
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (MultiIndex, Rat)>) -> Self {
        let mut p = MPoly::zero(nvars);
        for (alpha, c) in terms {
            p.add_term(alpha, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.is_constant() && self.constant_coeff().is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms.keys().next().unwrap().is_zero())
    }

    /// Coefficient of z^0.
    pub fn constant_coeff(&self) -> Rat {
        self.terms
            .get(&MultiIndex::zero(self.nvars))
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> Rat {
        self.terms.get(alpha).cloned().unwrap_or_else(Rat::zero)
    }

    /// Total degree; zero polynomial reports 0.
    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|a| a.degree()).max().unwrap_or(0)
    }

    /// Degree in variable i.
    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|a| a.get(i)).max().unwrap_or(0)
    }

    /// Largest variable index that actually occurs.
    pub fn top_variable(&self) -> Option<usize> {
        let mut top = None;
        for alpha in self.terms.keys() {
            for i in (0..self.nvars).rev() {
                if alpha.get(i) > 0 {
                    top = Some(top.map_or(i, |t: usize| t.max(i)));
                    break;
                }
            }
        }
        top
    }

    /// Grlex-leading (monomial, coefficient) pair.
    pub fn leading_term(&self) -> Option<(&MultiIndex, &Rat)> {
        self.terms.iter().next_back()
    }

    pub fn add_term(&mut self, alpha: MultiIndex, c: Rat) {
        assert_eq!(alpha.len(), self.nvars, "term length mismatch");
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&alpha) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&alpha);
                }
            }
            None => {
                self.terms.insert(alpha, c);
            }
        }
    }

    pub fn add(&self, other: &MPoly) -> MPoly {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        let mut out = self.clone();
        for (alpha, c) in &other.terms {
            out.add_term(alpha.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> MPoly {
        let mut out = MPoly::zero(self.nvars);
        for (alpha, c) in &self.terms {
            out.terms.insert(alpha.clone(), -c.clone());
        }
        out
    }

    pub fn sub(&self, other: &MPoly) -> MPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &MPoly) -> MPoly {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        let mut out = MPoly::zero(self.nvars);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.add_term(a.add(b).expect("equal lengths"), ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> MPoly {
        if c.is_zero() {
            return MPoly::zero(self.nvars);
        }
        let mut out = MPoly::zero(self.nvars);
        for (alpha, ca) in &self.terms {
            out.terms.insert(alpha.clone(), ca * c);
        }
        out
    }

    pub fn pow(&self, e: u32) -> MPoly {
        let mut out = MPoly::one(self.nvars);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Partial derivative with respect to z_i.
    pub fn derive(&self, i: usize) -> MPoly {
        assert!(i < self.nvars);
        let mut out = MPoly::zero(self.nvars);
        for (alpha, c) in &self.terms {
            let e = alpha.get(i);
            if e > 0 {
                let mut v = alpha.entries().to_vec();
                v[i] = e - 1;
                out.add_term(MultiIndex::new(v), c * rat_int(e as i64));
            }
        }
        out
    }

    /// Value at a point; the point length must equal nvars.
    pub fn eval(&self, point: &[Rat]) -> Rat {
        assert_eq!(point.len(), self.nvars, "point length mismatch");
        let mut acc = Rat::zero();
        for (alpha, c) in &self.terms {
            let mut term = c.clone();
            for (i, &e) in alpha.entries().iter().enumerate() {
                for _ in 0..e {
                    term *= &point[i];
                }
            }
            acc += term;
        }
        acc
    }

    /// Substitute z_1 = c, producing a polynomial in one fewer variable.
    pub fn substitute_first(&self, c: &Rat) -> MPoly {
        assert!(self.nvars >= 1);
        let mut out = MPoly::zero(self.nvars - 1);
        for (alpha, coeff) in &self.terms {
            let mut scaled = coeff.clone();
            for _ in 0..alpha.get(0) {
                scaled *= c;
            }
            out.add_term(alpha.tail(), scaled);
        }
        out
    }

    /// Substitute every variable by the given polynomial images.
    pub fn compose(&self, images: &[MPoly]) -> MPoly {
        assert_eq!(images.len(), self.nvars, "one image per variable required");
        let out_vars = if images.is_empty() {
            self.nvars
        } else {
            images[0].nvars
        };
        // Powers of each image are cached up to the degree actually used.
        let mut powers: Vec<Vec<MPoly>> = images
            .iter()
            .map(|im| vec![MPoly::one(out_vars), im.clone()])
            .collect();
        let mut out = MPoly::zero(out_vars);
        for (alpha, c) in &self.terms {
            let mut term = MPoly::constant(out_vars, c.clone());
            for (i, &e) in alpha.entries().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap().mul(&images[i]);
                    powers[i].push(next);
                }
                term = term.mul(&powers[i][e as usize]);
            }
            out = out.add(&term);
        }
        out
    }

    /// Shift z -> z + w, the expansion step for Taylor series.
    pub fn shift(&self, w: &[Rat]) -> MPoly {
        assert_eq!(w.len(), self.nvars);
        if w.iter().all(|c| c.is_zero()) {
            return self.clone();
        }
        let images: Vec<MPoly> = (0..self.nvars)
            .map(|i| MPoly::var(self.nvars, i).add(&MPoly::constant(self.nvars, w[i].clone())))
            .collect();
        self.compose(&images)
    }

    /// Exact division; None when other does not divide self.
    pub fn div_exact(&self, other: &MPoly) -> Option<MPoly> {
        assert_eq!(self.nvars, other.nvars);
        if other.is_zero() {
            return None;
        }
        let (lead_b, lc_b) = other.leading_term().unwrap();
        let lead_b = lead_b.clone();
        let lc_b = lc_b.clone();
        let mut rem = self.clone();
        let mut quot = MPoly::zero(self.nvars);
        while let Some((lead_r, lc_r)) = rem.leading_term() {
            let step = lead_r.checked_sub(&lead_b)?;
            let c = lc_r / &lc_b;
            let qterm = MPoly::monomial(self.nvars, step, c);
            quot = quot.add(&qterm);
            rem = rem.sub(&qterm.mul(other));
        }
        Some(quot)
    }

    /// Divide by the grlex-leading coefficient.
    pub fn make_monic(&self) -> MPoly {
        match self.leading_term() {
            None => self.clone(),
            Some((_, lc)) => {
                let inv = Rat::one() / lc.clone();
                self.scale(&inv)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Multivariate gcd via a primitive polynomial remainder sequence.
// ---------------------------------------------------------------------------

/// Monic gcd of two polynomials over Q; gcd(0, 0) = 0.
pub fn poly_gcd(a: &MPoly, b: &MPoly) -> MPoly {
    assert_eq!(a.nvars(), b.nvars());
    if a.is_zero() {
        return b.make_monic();
    }
    if b.is_zero() {
        return a.make_monic();
    }
    if a.is_constant() || b.is_constant() {
        return MPoly::one(a.nvars());
    }
    gcd_inner(a, b).make_monic()
}

fn gcd_inner(a: &MPoly, b: &MPoly) -> MPoly {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    if a.is_constant() || b.is_constant() {
        return MPoly::one(a.nvars());
    }
    let v = a
        .top_variable()
        .unwrap()
        .max(b.top_variable().unwrap());
    let ua = to_univar(a, v);
    let ub = to_univar(b, v);
    let cont_a = coeff_gcd(&ua);
    let cont_b = coeff_gcd(&ub);
    let cont = gcd_inner(&cont_a, &cont_b);
    let pa = divide_coeffs(&ua, &cont_a);
    let pb = divide_coeffs(&ub, &cont_b);

    let (mut r0, mut r1) = if pa.len() >= pb.len() {
        (pa, pb)
    } else {
        (pb, pa)
    };
    while !r1.is_empty() {
        let rem = pseudo_rem(&r0, &r1, v, a.nvars());
        r0 = r1;
        r1 = if rem.is_empty() {
            rem
        } else {
            let c = coeff_gcd(&rem);
            divide_coeffs(&rem, &c)
        };
    }
    let prim = from_univar(&r0, v, a.nvars());
    cont.mul(&prim)
}

// Univariate view: coefficients by v-degree, v removed from each coefficient.
fn to_univar(p: &MPoly, v: usize) -> Vec<MPoly> {
    let d = p.degree_in(v) as usize;
    let mut coeffs = vec![MPoly::zero(p.nvars()); d + 1];
    for (alpha, c) in p.terms() {
        let e = alpha.get(v) as usize;
        let mut rest = alpha.entries().to_vec();
        rest[v] = 0;
        coeffs[e].add_term(MultiIndex::new(rest), c.clone());
    }
    trim(coeffs)
}

fn from_univar(coeffs: &[MPoly], v: usize, nvars: usize) -> MPoly {
    let mut out = MPoly::zero(nvars);
    for (e, c) in coeffs.iter().enumerate() {
        let shift = MPoly::monomial(
            nvars,
            {
                let mut idx = vec![0; nvars];
                idx[v] = e as u32;
                MultiIndex::new(idx)
            },
            Rat::one(),
        );
        out = out.add(&c.mul(&shift));
    }
    out
}

fn trim(mut coeffs: Vec<MPoly>) -> Vec<MPoly> {
    while coeffs.last().is_some_and(|c| c.is_zero()) {
        coeffs.pop();
    }
    coeffs
}

fn coeff_gcd(coeffs: &[MPoly]) -> MPoly {
    let mut acc: Option<MPoly> = None;
    for c in coeffs {
        if c.is_zero() {
            continue;
        }
        acc = Some(match acc {
            None => c.clone(),
            Some(g) => gcd_inner(&g, c),
        });
        if acc.as_ref().unwrap().is_constant() {
            break;
        }
    }
    acc.unwrap_or_else(|| MPoly::one(coeffs.first().map_or(0, |c| c.nvars())))
}

fn divide_coeffs(coeffs: &[MPoly], d: &MPoly) -> Vec<MPoly> {
    coeffs
        .iter()
        .map(|c| {
            if c.is_zero() {
                c.clone()
            } else {
                c.div_exact(d).expect("content divides every coefficient")
            }
        })
        .collect()
}

// Pseudo-remainder of a by b in the univariate view over Q[rest].
fn pseudo_rem(a: &[MPoly], b: &[MPoly], v: usize, nvars: usize) -> Vec<MPoly> {
    let db = b.len() - 1;
    let lc_b = b[db].clone();
    let mut r: Vec<MPoly> = a.to_vec();
    while r.len() > db {
        let dr = r.len() - 1;
        let lc_r = r[dr].clone();
        // r := lc_b * r - lc_r * b * v^(dr - db)
        let mut next = vec![MPoly::zero(nvars); dr];
        for (e, c) in r.iter().enumerate().take(dr) {
            next[e] = c.mul(&lc_b);
        }
        for (e, c) in b.iter().enumerate().take(db) {
            let target = e + dr - db;
            next[target] = next[target].sub(&c.mul(&lc_r));
        }
        r = trim(next);
        if r.is_empty() {
            break;
        }
    }
    let _ = v;
    r
}

// ---------------------------------------------------------------------------
// Printing: grlex-descending terms, explicit * between factors.
// ---------------------------------------------------------------------------

/// Render one monomial as `z1^2*z3`; the zero index renders as `1`.
pub fn format_monomial(alpha: &MultiIndex) -> String {
    let mut parts = Vec::new();
    for (i, &e) in alpha.entries().iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(format!("z{}", i + 1)),
            _ => parts.push(format!("z{}^{}", i + 1, e)),
        }
    }
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join("*")
    }
}

pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (alpha, c) in self.terms.iter().rev() {
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
            if alpha.is_zero() {
                write!(f, "{}", format_rat(&mag))?;
            } else if mag.is_one() {
                write!(f, "{}", format_monomial(alpha))?;
            } else {
                write!(f, "{}*{}", format_rat(&mag), format_monomial(alpha))?;
            }
        }
        Ok(())
    }
}
