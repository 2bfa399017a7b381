//! Text syntax for differential polynomials and rational expressions.
//!
//! The grammar, with `INT` an unsigned decimal literal and `K` a positive
//! decimal suffix:
//!
//! ```text
//! expr   := term  (('+' | '-') term)*
//! term   := signed (('*' | '/') signed)*
//! signed := '-' signed | dop
//! dop    := dK ('^' INT)? dop | power
//! power  := atom ('^' INT)?
//! atom   := INT | zK | NAME | '(' expr ')'
//! ```
//!
//! `d1, d2, ...` are the derivations and `z1, z2, ...` the coordinates of
//! the coefficient field; both are reserved and checked against the ambient
//! dimension. Every other identifier must be one of the caller-supplied
//! unknown names. A derivation symbol applies to the whole power expression
//! that follows it, so `d1 u^2` means d1 applied to u squared, while
//! `(d1 u)^2` squares the first derivative. Chained symbols compose:
//! `d2 d1^2 u` is the mixed third derivative.
//!
//! Everything parses into a [`DiffRationalFunction`]; [`parse_diffpoly`]
//! additionally folds the denominator into the coefficient field and rejects
//! expressions that divide by a derivative variable.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::diffpoly::{DiffPoly, DiffRationalFunction};
use crate::error::{Error, Result};
use crate::multiindex::MultiIndex;
use crate::ratfunc::RatFunc;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn perr(line: usize, col: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        col,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        if c.is_ascii_digit() {
            let mut digits = String::new();
            while chars.peek().is_some_and(|c| c.is_ascii_digit()) {
                digits.push(bump(&mut chars));
            }
            let value = digits
                .parse::<BigInt>()
                .map_err(|e| perr(tline, tcol, format!("bad integer literal: {e}")))?;
            out.push(Spanned {
                tok: Tok::Int(value),
                line: tline,
                col: tcol,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut name = String::new();
            while chars
                .peek()
                .is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_')
            {
                name.push(bump(&mut chars));
            }
            out.push(Spanned {
                tok: Tok::Ident(name),
                line: tline,
                col: tcol,
            });
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            other => return Err(perr(tline, tcol, format!("unexpected character `{other}`"))),
        };
        bump(&mut chars);
        out.push(Spanned {
            tok,
            line: tline,
            col: tcol,
        });
    }
    Ok(out)
}

/// Splits a reserved identifier `d7` / `z12` into its letter and index.
fn reserved_index(name: &str) -> Option<(char, &str)> {
    let mut it = name.chars();
    let head = it.next()?;
    if (head == 'd' || head == 'z') && name.len() > 1 && it.all(|c| c.is_ascii_digit()) {
        Some((head, &name[1..]))
    } else {
        None
    }
}

/// True when `name` collides with the reserved `d<k>`/`z<k>` lexical space
/// and therefore cannot be used as an unknown name.
pub fn is_reserved_name(name: &str) -> bool {
    reserved_index(name).is_some()
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    m: usize,
    names: &'a [String],
    end: (usize, usize),
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map_or(self.end, |s| (s.line, s.col))
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        match self.next() {
            Some(s) if s.tok == tok => Ok(()),
            Some(s) => Err(perr(s.line, s.col, format!("expected {what}"))),
            None => {
                let (l, c) = self.end;
                Err(perr(l, c, format!("expected {what}, found end of input")))
            }
        }
    }

    /// Parses the positive suffix of a reserved identifier, bounds-checked
    /// against the number of derivations.
    fn coord_index(&self, digits: &str, line: usize, col: usize, what: &str) -> Result<usize> {
        let k: usize = digits
            .parse()
            .map_err(|_| perr(line, col, format!("{what} index out of range")))?;
        if k == 0 || k > self.m {
            return Err(perr(
                line,
                col,
                format!("{what} index out of range (have {} derivations)", self.m),
            ));
        }
        Ok(k - 1)
    }

    fn exponent(&mut self) -> Result<u32> {
        let (l, c) = self.here();
        match self.next() {
            Some(Spanned {
                tok: Tok::Int(v),
                line,
                col,
            }) => u32::try_from(&v).map_err(|_| perr(line, col, "exponent too large")),
            _ => Err(perr(l, c, "expected integer exponent after `^`")),
        }
    }

    fn expr(&mut self) -> Result<DiffRationalFunction> {
        let mut acc = self.term()?;
        loop {
            match self.peek().map(|s| s.tok.clone()) {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<DiffRationalFunction> {
        let mut acc = self.signed()?;
        loop {
            match self.peek().map(|s| (s.tok.clone(), s.line, s.col)) {
                Some((Tok::Star, _, _)) => {
                    self.pos += 1;
                    acc = acc.mul(&self.signed()?);
                }
                Some((Tok::Slash, line, col)) => {
                    self.pos += 1;
                    let rhs = self.signed()?;
                    acc = acc
                        .div(&rhs)
                        .map_err(|_| perr(line, col, "division by zero"))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn signed(&mut self) -> Result<DiffRationalFunction> {
        if self.peek().is_some_and(|s| s.tok == Tok::Minus) {
            self.pos += 1;
            return Ok(self.signed()?.neg());
        }
        self.dop()
    }

    fn dop(&mut self) -> Result<DiffRationalFunction> {
        // A derivation symbol here is an operator on the expression to its
        // right; the same spelling never denotes a standalone value.
        if let Some(Spanned {
            tok: Tok::Ident(name),
            line,
            col,
        }) = self.peek().cloned()
        {
            if let Some(('d', digits)) = reserved_index(&name) {
                self.pos += 1;
                let i = self.coord_index(digits, line, col, "derivation")?;
                let mut times = 1u32;
                if self.peek().is_some_and(|s| s.tok == Tok::Caret) {
                    self.pos += 1;
                    times = self.exponent()?;
                }
                let mut operand = self.dop().map_err(|e| match e {
                    Error::Parse { line, col, message } => {
                        let message = if message.contains("end of input") {
                            format!("derivation `{name}` needs an operand")
                        } else {
                            message
                        };
                        perr(line, col, message)
                    }
                    other => other,
                })?;
                for _ in 0..times {
                    operand = operand.derive(i);
                }
                return Ok(operand);
            }
        }
        self.power()
    }

    fn power(&mut self) -> Result<DiffRationalFunction> {
        let base = self.atom()?;
        if self.peek().is_some_and(|s| s.tok == Tok::Caret) {
            self.pos += 1;
            let e = self.exponent()?;
            let mut out = DiffRationalFunction::from_poly(DiffPoly::one(
                base.derivations(),
                base.unknowns(),
            ));
            for _ in 0..e {
                out = out.mul(&base);
            }
            return Ok(out);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<DiffRationalFunction> {
        let n = self.names.len();
        let (l, c) = self.here();
        match self.next() {
            Some(Spanned {
                tok: Tok::Int(v), ..
            }) => {
                let c = BigRational::from_integer(v);
                Ok(DiffRationalFunction::from_poly(DiffPoly::rational(
                    self.m, n, c,
                )))
            }
            Some(Spanned {
                tok: Tok::Ident(name),
                line,
                col,
            }) => match reserved_index(&name) {
                Some(('z', digits)) => {
                    let k = self.coord_index(digits, line, col, "coordinate")?;
                    Ok(DiffRationalFunction::from_poly(DiffPoly::constant(
                        self.m,
                        n,
                        RatFunc::var(self.m, k),
                    )))
                }
                Some(('d', _)) => Err(perr(
                    line,
                    col,
                    format!("derivation `{name}` needs an operand"),
                )),
                _ => match self.names.iter().position(|s| s == &name) {
                    Some(j) => Ok(DiffRationalFunction::from_poly(DiffPoly::var(
                        self.m,
                        n,
                        j,
                        MultiIndex::zero(self.m),
                    ))),
                    None => Err(perr(line, col, format!("unknown identifier `{name}`"))),
                },
            },
            Some(Spanned {
                tok: Tok::LParen, ..
            }) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "closing `)`")?;
                Ok(inner)
            }
            Some(s) => Err(perr(s.line, s.col, "expected a value")),
            None => Err(perr(l, c, "expected a value, found end of input")),
        }
    }
}

/// Parses `text` as a rational expression in the differential variables of
/// the given unknowns over m derivations.
pub fn parse_diff_rational(
    text: &str,
    m: usize,
    names: &[String],
) -> Result<DiffRationalFunction> {
    let toks = lex(text)?;
    let mut lines = 1usize;
    let mut last_len = 0usize;
    for ch in text.chars() {
        if ch == '\n' {
            lines += 1;
            last_len = 0;
        } else {
            last_len += 1;
        }
    }
    let mut p = Parser {
        toks,
        pos: 0,
        m,
        names,
        end: (lines, last_len + 1),
    };
    if p.peek().is_none() {
        return Err(perr(1, 1, "empty expression"));
    }
    let value = p.expr()?;
    if let Some(s) = p.peek() {
        return Err(perr(s.line, s.col, "unexpected trailing input"));
    }
    Ok(value)
}

/// Parses `text` and requires the result to live in the differential
/// polynomial ring: any denominator must be free of derivative variables so
/// it can be absorbed into the rational-function coefficients.
pub fn parse_diffpoly(text: &str, m: usize, names: &[String]) -> Result<DiffPoly> {
    let r = parse_diff_rational(text, m, names)?;
    if r.is_polynomial() {
        return Ok(r.num().clone());
    }
    match r.den().as_coefficient() {
        Some(c) => Ok(r.num().scale(&c.inv()?)),
        None => Err(Error::ContextMismatch(
            "expression divides by a derivative variable; not a differential polynomial"
                .to_string(),
        )),
    }
}

/// Parses a coefficient-field element: an expression in z1..zm only.
pub fn parse_coefficient(text: &str, m: usize) -> Result<RatFunc> {
    let r = parse_diff_rational(text, m, &[])?;
    let num = r
        .num()
        .as_coefficient()
        .ok_or_else(|| Error::ContextMismatch("expected a coefficient expression".to_string()))?;
    let den = r
        .den()
        .as_coefficient()
        .ok_or_else(|| Error::ContextMismatch("expected a coefficient expression".to_string()))?;
    num.div(&den)
}

/// Parses an exact rational literal such as `5`, `-3/4`.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    use num_traits::Zero;
    let t = text.trim();
    let bad = || perr(1, 1, format!("bad rational literal `{t}`"));
    let (ns, ds) = t.split_once('/').unwrap_or((t, "1"));
    let n = ns.trim().parse::<BigInt>().map_err(|_| bad())?;
    let d = ds.trim().parse::<BigInt>().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(BigRational::new(n, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffpoly::format_diffpoly;
    use crate::poly::{rat, rat_int};

    fn names(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn spec_example_with_mixed_powers() {
        // d1^2 u - z1*(d2 u)^3 over two derivations, one unknown.
        let ns = names(&["u"]);
        let p = parse_diffpoly("d1^2 u - z1*(d2 u)^3", 2, &ns).unwrap();
        let d1d1 = DiffPoly::var(2, 1, 0, MultiIndex::new(vec![2, 0]));
        let d2 = DiffPoly::var(2, 1, 0, MultiIndex::new(vec![0, 1]));
        let expected = d1d1.sub(&d2.pow(3).scale(&RatFunc::var(2, 0)));
        assert_eq!(p, expected);
    }

    #[test]
    fn derivation_index_out_of_range() {
        let ns = names(&["u"]);
        let err = parse_diffpoly("d3 u", 2, &ns).unwrap_err();
        match err {
            Error::Parse { line, col, message } => {
                assert_eq!((line, col), (1, 1));
                assert!(message.contains("derivation index out of range"), "{message}");
            }
            other => panic!("wrong error: {other}"),
        }
    }

    #[test]
    fn coordinate_index_out_of_range() {
        let err = parse_coefficient("z4 + 1", 3).unwrap_err();
        match err {
            Error::Parse { message, .. } => {
                assert!(message.contains("coordinate index out of range"), "{message}")
            }
            other => panic!("wrong error: {other}"),
        }
    }

    #[test]
    fn operator_binds_the_following_power() {
        let ns = names(&["u"]);
        // d1 u^2 is the derivative of the square: 2u * d1 u.
        let p = parse_diffpoly("d1 u^2", 1, &ns).unwrap();
        let u = DiffPoly::var(1, 1, 0, MultiIndex::zero(1));
        assert_eq!(p, u.mul(&u).derive(0));
        // (d1 u)^2 squares the derivative.
        let q = parse_diffpoly("(d1 u)^2", 1, &ns).unwrap();
        assert_eq!(q, u.derive(0).pow(2));
        assert_ne!(p, q);
    }

    #[test]
    fn chained_operators_compose() {
        let ns = names(&["u"]);
        let p = parse_diffpoly("d2 d1^2 u", 2, &ns).unwrap();
        let expected = DiffPoly::var(2, 1, 0, MultiIndex::new(vec![2, 1]));
        assert_eq!(p, expected);
    }

    #[test]
    fn rational_coefficients_fold_into_the_field() {
        let ns = names(&["x"]);
        let p = parse_diffpoly("(x^2 - 1)/2", 1, &ns).unwrap();
        let x = DiffPoly::var(1, 1, 0, MultiIndex::zero(1));
        let expected = x
            .mul(&x)
            .sub(&DiffPoly::one(1, 1))
            .scale(&RatFunc::constant(1, rat(1, 2)));
        assert_eq!(p, expected);

        let q = parse_diffpoly("x/z1", 1, &ns).unwrap();
        assert_eq!(q, x.scale(&RatFunc::var(1, 0).inv().unwrap()));
    }

    #[test]
    fn derivative_denominators_stay_rational() {
        let ns = names(&["x"]);
        let r = parse_diff_rational("1/(d1 x)", 1, &ns).unwrap();
        assert!(!r.is_polynomial());
        assert!(parse_diffpoly("1/(d1 x)", 1, &ns).is_err());
    }

    #[test]
    fn unary_minus_and_precedence() {
        let ns = names(&["u"]);
        let p = parse_diffpoly("-u^2", 1, &ns).unwrap();
        let u = DiffPoly::var(1, 1, 0, MultiIndex::zero(1));
        assert_eq!(p, u.pow(2).neg());
        let q = parse_diffpoly("2*u + 3*u", 1, &ns).unwrap();
        assert_eq!(q, u.scale(&RatFunc::constant(1, rat_int(5))));
        let r = parse_diffpoly("1 - 2 - 3", 1, &ns).unwrap();
        assert_eq!(r, DiffPoly::rational(1, 1, rat_int(-4)));
    }

    #[test]
    fn unknown_identifier_is_rejected_with_position() {
        let ns = names(&["u"]);
        let err = parse_diffpoly("u + v", 1, &ns).unwrap_err();
        match err {
            Error::Parse { line, col, message } => {
                assert_eq!((line, col), (1, 5));
                assert!(message.contains("unknown identifier `v`"), "{message}");
            }
            other => panic!("wrong error: {other}"),
        }
    }

    #[test]
    fn truncated_input_reports_end_position() {
        let ns = names(&["u"]);
        let err = parse_diffpoly("u +", 1, &ns).unwrap_err();
        match err {
            Error::Parse { message, .. } => {
                assert!(message.contains("end of input"), "{message}")
            }
            other => panic!("wrong error: {other}"),
        }
        assert!(parse_diffpoly("d1", 1, &ns).is_err());
        assert!(parse_diffpoly("", 1, &ns).is_err());
    }

    #[test]
    fn division_by_zero_is_a_parse_error() {
        let ns = names(&["u"]);
        let err = parse_diffpoly("u/(1 - 1)", 1, &ns).unwrap_err();
        match err {
            Error::Parse { message, .. } => assert!(message.contains("division by zero")),
            other => panic!("wrong error: {other}"),
        }
    }

    #[test]
    fn print_parse_roundtrip_on_handpicked_values() {
        let ns = names(&["u", "w"]);
        let u1 = DiffPoly::var(2, 2, 0, MultiIndex::new(vec![1, 0]));
        let w = DiffPoly::var(2, 2, 1, MultiIndex::zero(2));
        let coeff = RatFunc::var(2, 0)
            .add(&RatFunc::constant(2, rat(1, 3)))
            .div(&RatFunc::var(2, 1))
            .unwrap();
        let cases = vec![
            DiffPoly::zero(2, 2),
            DiffPoly::rational(2, 2, rat(-7, 2)),
            u1.pow(3).sub(&w.scale(&coeff)),
            u1.mul(&w.pow(2)).add(&DiffPoly::constant(2, 2, RatFunc::var(2, 1))),
            u1.derive(1).pow(2).neg(),
        ];
        for p in cases {
            let text = format_diffpoly(&p, &ns);
            let back = parse_diffpoly(&text, 2, &ns).unwrap();
            assert_eq!(back, p, "roundtrip failed for `{text}`");
        }
    }

    #[test]
    fn multiline_positions() {
        let ns = names(&["u"]);
        let err = parse_diffpoly("u +\n  @", 1, &ns).unwrap_err();
        match err {
            Error::Parse { line, col, .. } => assert_eq!((line, col), (2, 3)),
            other => panic!("wrong error: {other}"),
        }
    }

    #[test]
    fn reserved_names_are_recognized() {
        assert!(is_reserved_name("d1"));
        assert!(is_reserved_name("z12"));
        assert!(!is_reserved_name("d"));
        assert!(!is_reserved_name("dx"));
        assert!(!is_reserved_name("u2"));
        assert!(!is_reserved_name("z1a"));
    }

    #[test]
    fn rational_literals() {
        assert_eq!(parse_rational("5").unwrap(), rat_int(5));
        assert_eq!(parse_rational(" -3/4 ").unwrap(), rat(-3, 4));
        assert!(parse_rational("3/0").is_err());
        assert!(parse_rational("x").is_err());
    }
}
