//! Sparse multivariate polynomials over an exact or floating coefficient ring.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Neg;
use std::str::FromStr;

use num::{BigInt, BigRational, Num, Signed};

use crate::error::{Error, Result};

/// Coefficient ring for [`Poly`].
pub trait Coeff: Num + Clone + Neg<Output = Self> + fmt::Debug + fmt::Display + Send + Sync + 'static {
    fn from_int(i: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn parse_coeff(s: &str) -> Option<Self>;
    fn is_negative_coeff(&self) -> bool;
    fn abs_coeff(&self) -> Self;
}

impl Coeff for BigRational {
    fn from_int(i: i64) -> Self {
        BigRational::from_integer(BigInt::from(i))
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn parse_coeff(s: &str) -> Option<Self> {
        BigRational::from_str(s).ok()
    }

    fn is_negative_coeff(&self) -> bool {
        self.is_negative()
    }

    fn abs_coeff(&self) -> Self {
        self.abs()
    }
}

impl Coeff for f64 {
    fn from_int(i: i64) -> Self {
        i as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn parse_coeff(s: &str) -> Option<Self> {
        s.parse().ok()
    }

    fn is_negative_coeff(&self) -> bool {
        *self < 0.0
    }

    fn abs_coeff(&self) -> Self {
        self.abs()
    }
}

/// Nearest double to a rational, robust to huge numerators and denominators.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    use num::ToPrimitive;
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    let shift = nb - db - 60;
    let scaled = if shift >= 0 {
        q.numer() / (q.denom() << shift as usize)
    } else {
        (q.numer() << (-shift) as usize) / q.denom()
    };
    scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
}

/// Exact rational from a double whose shortest decimal form has at most
/// `max_digits` significant digits, e.g. `0.6 -> 3/5`.
pub fn rational_from_decimal(x: f64, max_digits: usize) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let s = format!("{x:e}");
    let (mant, exp) = s.split_once('e')?;
    let exp: i64 = exp.parse().ok()?;
    let neg = mant.starts_with('-');
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    if digits.trim_end_matches('0').len() > max_digits {
        return None;
    }
    let frac_len = digits.len() as i64 - 1;
    let mut n = BigInt::from_str(&digits).ok()?;
    if neg {
        n = -n;
    }
    let p = exp - frac_len;
    let ten = BigInt::from(10);
    Some(if p >= 0 {
        BigRational::from_integer(n * num::pow(ten, p as usize))
    } else {
        BigRational::new(n, num::pow(ten, (-p) as usize))
    })
}

pub type Exponent = Vec<u32>;

/// Sparse polynomial in `d` variables `x1..xd`; zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly<C: Coeff> {
    d: usize,
    terms: BTreeMap<Exponent, C>,
}

/// Exact polynomial with rational coefficients.
pub type MultiPoly = Poly<BigRational>;
pub type FloatPoly = Poly<f64>;

impl<C: Coeff> Poly<C> {
    pub fn zero(d: usize) -> Self {
        Poly { d, terms: BTreeMap::new() }
    }

    pub fn constant(d: usize, c: C) -> Self {
        Self::monomial(vec![0; d], c)
    }

    pub fn monomial(exp: Exponent, c: C) -> Self {
        let mut p = Poly::zero(exp.len());
        p.add_term(exp, c);
        p
    }

    /// The coordinate function `x_j` (0-based `j`).
    pub fn var(d: usize, j: usize) -> Self {
        let mut e = vec![0; d];
        e[j] = 1;
        Self::monomial(e, C::one())
    }

    pub fn nvars(&self) -> usize {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &C)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exp: &[u32]) -> C {
        self.terms.get(exp).cloned().unwrap_or_else(C::zero)
    }

    /// Maximum total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|e| e.iter().sum::<u32>());
        match degs.next() {
            None => true,
            Some(first) => degs.all(|x| x == first),
        }
    }

    pub fn add_term(&mut self, exp: Exponent, c: C) {
        assert_eq!(exp.len(), self.d, "exponent length mismatch");
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().clone() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, s: &C) -> Self {
        let mut out = Poly::zero(self.d);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.clone() * s.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Poly::zero(self.d);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Exponent = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca.clone() * cb.clone());
            }
        }
        out
    }

    /// Multiply by the monomial `x_j`.
    pub fn mul_var(&self, j: usize) -> Self {
        let mut out = Poly::zero(self.d);
        for (e, c) in &self.terms {
            let mut e = e.clone();
            e[j] += 1;
            out.terms.insert(e, c.clone());
        }
        out
    }

    /// Classical partial derivative in `x_j`.
    pub fn partial(&self, j: usize) -> Self {
        self.map_terms(|e, c| {
            if e[j] == 0 {
                None
            } else {
                let mut e = e.to_vec();
                let k = e[j];
                e[j] -= 1;
                Some((e, c.clone() * C::from_int(k as i64)))
            }
        })
    }

    /// The polynomial `x -> P(sigma_j x)`.
    pub fn reflect(&self, j: usize) -> Self {
        self.map_terms(|e, c| Some((e.to_vec(), if e[j] % 2 == 1 { -c.clone() } else { c.clone() })))
    }

    /// Builds a new polynomial from a term-by-term rewrite.
    pub fn map_terms(&self, f: impl Fn(&[u32], &C) -> Option<(Exponent, C)>) -> Self {
        let mut out = Poly::zero(self.d);
        for (e, c) in &self.terms {
            if let Some((e2, c2)) = f(e, c) {
                out.add_term(e2, c2);
            }
        }
        out
    }

    pub fn to_float(&self) -> FloatPoly {
        let mut out = Poly::zero(self.d);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.to_f64());
        }
        out
    }

    /// Horner-free evaluation with cached coordinate powers.
    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.d);
        let maxdeg = self.terms.keys().flat_map(|e| e.iter().copied()).max().unwrap_or(0) as usize;
        let pows: Vec<Vec<f64>> = x
            .iter()
            .map(|&xi| {
                let mut v = Vec::with_capacity(maxdeg + 1);
                let mut acc = 1.0;
                for _ in 0..=maxdeg {
                    v.push(acc);
                    acc *= xi;
                }
                v
            })
            .collect();
        self.terms
            .iter()
            .map(|(e, c)| c.to_f64() * e.iter().enumerate().map(|(j, &k)| pows[j][k as usize]).product::<f64>())
            .sum()
    }

    /// True iff every exponent is even in every coordinate.
    pub fn is_even_in_all(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|k| k % 2 == 0))
    }

    fn canonical_order(&self) -> Vec<(&Exponent, &C)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|(a, _), (b, _)| {
            let (da, db): (u32, u32) = (a.iter().sum(), b.iter().sum());
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        v
    }
}

impl FloatPoly {
    /// Largest absolute coefficient, zero for the zero polynomial.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// Canonical text form: terms by descending total degree, then descending
/// exponent vector, e.g. `x1^2*x2 - 3/5*x2 + 1`.
impl<C: Coeff> fmt::Display for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.canonical_order().into_iter().enumerate() {
            let neg = c.is_negative_coeff();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let a = c.abs_coeff();
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(j, &k)| if k == 1 { format!("x{}", j + 1) } else { format!("x{}^{}", j + 1, k) })
                .collect();
            if vars.is_empty() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{a}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

impl<C: Coeff> Poly<C> {
    /// Parses the canonical text form (any term order is accepted).
    pub fn parse(d: usize, s: &str) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("{m} in polynomial {s:?}"));
        let s = s.trim();
        let mut out = Poly::zero(d);
        if s == "0" {
            return Ok(out);
        }
        let mut rest = s;
        let mut sign_neg = false;
        if let Some(r) = rest.strip_prefix('-') {
            sign_neg = true;
            rest = r;
        }
        loop {
            let (term, next) = match (rest.find(" + "), rest.find(" - ")) {
                (None, None) => (rest, None),
                (Some(a), None) => (&rest[..a], Some((false, &rest[a + 3..]))),
                (None, Some(b)) => (&rest[..b], Some((true, &rest[b + 3..]))),
                (Some(a), Some(b)) if a < b => (&rest[..a], Some((false, &rest[a + 3..]))),
                (_, Some(b)) => (&rest[..b], Some((true, &rest[b + 3..]))),
            };
            let mut coeff = C::one();
            let mut exp = vec![0u32; d];
            for (k, factor) in term.split('*').enumerate() {
                let factor = factor.trim();
                if let Some(v) = factor.strip_prefix('x') {
                    let (idx, pow) = match v.split_once('^') {
                        Some((i, p)) => (i, p.parse::<u32>().map_err(|_| bad("bad power"))?),
                        None => (v, 1),
                    };
                    let idx: usize = idx.parse().map_err(|_| bad("bad variable"))?;
                    if idx == 0 || idx > d {
                        return Err(bad("variable out of range"));
                    }
                    exp[idx - 1] += pow;
                } else if k == 0 {
                    coeff = C::parse_coeff(factor).ok_or_else(|| bad("bad coefficient"))?;
                } else {
                    return Err(bad("coefficient after variable"));
                }
            }
            out.add_term(exp, if sign_neg { -coeff } else { coeff });
            match next {
                None => break,
                Some((neg, r)) => {
                    sign_neg = neg;
                    rest = r;
                }
            }
        }
        Ok(out)
    }
}

/// Coefficients `[c_0, .., c_k]` of `L_k^delta(x) = sum_i c_i x^i`.
pub fn laguerre_coeffs<C: Coeff>(k: usize, delta: &C) -> Vec<C> {
    // c_i = (-1)^i / i! * prod_{l=i+1}^{k} (l + delta) / (k - i)!
    let mut out = Vec::with_capacity(k + 1);
    for i in 0..=k {
        let mut num = C::one();
        for l in (i + 1)..=k {
            num = num * (C::from_int(l as i64) + delta.clone());
        }
        let mut den = C::one();
        for l in 1..=i {
            den = den * C::from_int(l as i64);
        }
        for l in 1..=(k - i) {
            den = den * C::from_int(l as i64);
        }
        let c = num / den;
        out.push(if i % 2 == 1 { -c } else { c });
    }
    out
}

/// `L_k^delta(x_j^2)` as a polynomial in `d` variables.
pub fn laguerre_in_square<C: Coeff>(d: usize, j: usize, k: usize, delta: &C) -> Poly<C> {
    let mut p = Poly::zero(d);
    for (i, c) in laguerre_coeffs(k, delta).into_iter().enumerate() {
        let mut e = vec![0; d];
        e[j] = 2 * i as u32;
        p.add_term(e, c);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn canonical_text_roundtrip() {
        let mut p = MultiPoly::zero(2);
        p.add_term(vec![2, 1], q(1, 1));
        p.add_term(vec![0, 1], q(-3, 5));
        p.add_term(vec![0, 0], q(1, 1));
        p.add_term(vec![1, 2], q(7, 2));
        let s = p.to_string();
        assert_eq!(s, "x1^2*x2 + 7/2*x1*x2^2 - 3/5*x2 + 1");
        assert_eq!(MultiPoly::parse(2, &s).unwrap(), p);
        let neg = p.scale(&q(-1, 1));
        assert_eq!(MultiPoly::parse(2, &neg.to_string()).unwrap(), neg);
        assert_eq!(MultiPoly::parse(2, "0").unwrap(), MultiPoly::zero(2));
        assert!(MultiPoly::parse(2, "x3").is_err());
    }

    #[test]
    fn arithmetic_and_eval() {
        let x = MultiPoly::var(2, 0);
        let y = MultiPoly::var(2, 1);
        let p = x.add(&y).mul(&x.sub(&y));
        assert_eq!(p.to_string(), "x1^2 - x2^2");
        assert!(p.is_homogeneous());
        assert_eq!(p.degree(), Some(2));
        assert!((p.eval(&[3.0, 2.0]) - 5.0).abs() < 1e-15);
        assert_eq!(p.partial(0).to_string(), "2*x1");
        assert_eq!(x.mul(&y).reflect(1).to_string(), "-x1*x2");
        assert!(p.sub(&p).is_zero());
    }

    #[test]
    fn decimal_to_rational() {
        assert_eq!(rational_from_decimal(0.6, 10), Some(q(3, 5)));
        assert_eq!(rational_from_decimal(2.35, 10), Some(q(47, 20)));
        assert_eq!(rational_from_decimal(0.0, 10), Some(q(0, 1)));
        assert_eq!(rational_from_decimal(std::f64::consts::PI, 10), None);
        assert!((rational_to_f64(&q(3, 10)) - 0.3).abs() == 0.0);
    }

    #[test]
    fn huge_rational_to_f64() {
        let big = num::pow(BigInt::from(10), 400);
        let r = BigRational::new(big.clone() * 3, big * 7);
        assert!((rational_to_f64(&r) - 3.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn laguerre_coefficients_match_float_recurrence() {
        let delta = q(1, 5);
        for k in 0..10 {
            let p = laguerre_in_square(1, 0, k, &delta);
            for &x in &[0.3, 1.1, 2.0] {
                let v = crate::specfun::laguerre_poly(k, 0.2, x * x).unwrap();
                assert!((p.eval(&[x]) - v).abs() < 1e-11 * v.abs().max(1.0), "k={k}");
            }
        }
    }
}
