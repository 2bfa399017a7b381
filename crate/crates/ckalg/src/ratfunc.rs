//! The coefficient field Q(z1..zm): exact rational functions.
//!
//! Canonical form: numerator and denominator are coprime (multivariate gcd
//! divided out) and the denominator is monic under grlex. Equality is
//! therefore plain coefficient-wise equality.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::{poly_gcd, MPoly, Rat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatFunc {
    num: MPoly,
    den: MPoly,
}

impl RatFunc {
    /// Build num/den in canonical form; den must be nonzero.
    pub fn new(num: MPoly, den: MPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        assert_eq!(num.nvars(), den.nvars(), "variable count mismatch");
        Ok(Self::reduce(num, den))
    }

    fn reduce(num: MPoly, den: MPoly) -> Self {
        if num.is_zero() {
            return RatFunc {
                den: MPoly::one(num.nvars()),
                num,
            };
        }
        let (mut num, mut den) = if den.is_constant() {
            (num, den)
        } else {
            let g = poly_gcd(&num, &den);
            if g.is_one() {
                (num, den)
            } else {
                (
                    num.div_exact(&g).expect("gcd divides numerator"),
                    den.div_exact(&g).expect("gcd divides denominator"),
                )
            }
        };
        // Monic denominator pins the representative uniquely.
        let lc = den.leading_term().expect("den nonzero").1.clone();
        if !lc.is_one() {
            let inv = Rat::one() / lc;
            num = num.scale(&inv);
            den = den.scale(&inv);
        }
        RatFunc { num, den }
    }

    pub fn from_poly(p: MPoly) -> Self {
        let den = MPoly::one(p.nvars());
        RatFunc { num: p, den }
    }

    pub fn zero(nvars: usize) -> Self {
        RatFunc::from_poly(MPoly::zero(nvars))
    }

    pub fn one(nvars: usize) -> Self {
        RatFunc::from_poly(MPoly::one(nvars))
    }

    pub fn constant(nvars: usize, c: Rat) -> Self {
        RatFunc::from_poly(MPoly::constant(nvars, c))
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        RatFunc::from_poly(MPoly::var(nvars, i))
    }

    pub fn num(&self) -> &MPoly {
        &self.num
    }

    pub fn den(&self) -> &MPoly {
        &self.den
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    /// True when the element is a polynomial (denominator 1).
    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_one()
    }

    /// The constant value when `is_constant`, else None.
    pub fn as_constant(&self) -> Option<Rat> {
        if self.is_constant() {
            Some(self.num.constant_coeff())
        } else {
            None
        }
    }

    pub fn add(&self, other: &RatFunc) -> RatFunc {
        RatFunc::reduce(
            self.num
                .mul(&other.den)
                .add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &RatFunc) -> RatFunc {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RatFunc) -> RatFunc {
        RatFunc::reduce(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn scale(&self, c: &Rat) -> RatFunc {
        RatFunc::reduce(self.num.scale(c), self.den.clone())
    }

    pub fn div(&self, other: &RatFunc) -> Result<RatFunc> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(RatFunc::reduce(
            self.num.mul(&other.den),
            self.den.mul(&other.num),
        ))
    }

    pub fn inv(&self) -> Result<RatFunc> {
        RatFunc::one(self.nvars()).div(self)
    }

    pub fn pow(&self, e: u32) -> RatFunc {
        let mut out = RatFunc::one(self.nvars());
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Partial derivative d/dz_i via the quotient rule.
    pub fn derive(&self, i: usize) -> RatFunc {
        if self.den.is_one() {
            return RatFunc::from_poly(self.num.derive(i));
        }
        RatFunc::reduce(
            self.num
                .derive(i)
                .mul(&self.den)
                .sub(&self.num.mul(&self.den.derive(i))),
            self.den.mul(&self.den),
        )
    }

    /// Value at a point; pole error when the denominator vanishes there.
    pub fn eval(&self, point: &[Rat]) -> Result<Rat> {
        let d = self.den.eval(point);
        if d.is_zero() {
            return Err(Error::Pole(format!("{} at the evaluation point", self.den)));
        }
        Ok(self.num.eval(point) / d)
    }

    /// Restriction to the hyperplane z_1 = c, in one fewer variable.
    pub fn restrict_first(&self, c: &Rat) -> Result<RatFunc> {
        let den = self.den.substitute_first(c);
        if den.is_zero() {
            return Err(Error::RestrictionVanishes);
        }
        Ok(RatFunc::reduce(self.num.substitute_first(c), den))
    }

    /// Substitute each variable by a polynomial image, renormalizing.
    pub fn compose(&self, images: &[MPoly]) -> Result<RatFunc> {
        let den = self.den.compose(images);
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(RatFunc::reduce(self.num.compose(images), den))
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            if self.num.num_terms() <= 1 {
                write!(f, "{}", self.num)
            } else {
                write!(f, "({})", self.num)
            }
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}
