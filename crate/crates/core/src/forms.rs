//! Exact arithmetic for affine forms `a*m + b`, bivariate integer polynomials
//! in `(m, s)`, and rationals, with sign decisions quantified over `m >= m0`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;

pub type Rational = BigRational;

/// Parse a rational written as `p/q` or a plain integer `p`.
pub fn parse_rational(s: &str) -> Result<Rational, Error> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n = BigInt::from_str(num.trim()).map_err(|_| Error::Parse(format!("bad rational: {s}")))?;
    let d = BigInt::from_str(den.trim()).map_err(|_| Error::Parse(format!("bad rational: {s}")))?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator: {s}")));
    }
    Ok(Rational::new(n, d))
}

/// Canonical textual form of a rational, always `p/q`.
pub fn rational_string(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// An integer affine form `slope*m + offset` in the parameter `m`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffineForm {
    pub slope: BigInt,
    pub offset: BigInt,
}

/// Requested sign for [`AffineForm::sign_from`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    NonNeg,
    Negative,
    Positive,
}

impl AffineForm {
    pub fn new<A: Into<BigInt>, B: Into<BigInt>>(slope: A, offset: B) -> Self {
        AffineForm { slope: slope.into(), offset: offset.into() }
    }

    pub fn zero() -> Self {
        AffineForm::new(0, 0)
    }

    pub fn constant<B: Into<BigInt>>(c: B) -> Self {
        AffineForm::new(0, c)
    }

    pub fn is_zero(&self) -> bool {
        self.slope.is_zero() && self.offset.is_zero()
    }

    /// Exact evaluation at integer `m >= 1`.
    pub fn eval(&self, m: &BigInt) -> BigInt {
        &self.slope * m + &self.offset
    }

    pub fn add(&self, other: &AffineForm) -> AffineForm {
        AffineForm { slope: &self.slope + &other.slope, offset: &self.offset + &other.offset }
    }

    pub fn sub(&self, other: &AffineForm) -> AffineForm {
        AffineForm { slope: &self.slope - &other.slope, offset: &self.offset - &other.offset }
    }

    pub fn scale(&self, c: i64) -> AffineForm {
        AffineForm { slope: &self.slope * c, offset: &self.offset * c }
    }

    /// Least integer `m0 >= 1` such that `self(m)` has the requested sign for
    /// ALL `m >= m0`, or `None` if the sign eventually fails forever.
    pub fn sign_from(&self, sign: Sign) -> Option<BigInt> {
        let a = &self.slope;
        let b = &self.offset;
        let one = BigInt::one();
        match sign {
            Sign::Positive => {
                if a.is_positive() {
                    // least m with a*m + b > 0, i.e. m > -b/a
                    let m0 = (-b).div_floor(a) + &one;
                    Some(m0.max(one))
                } else if a.is_zero() && b.is_positive() {
                    Some(one)
                } else {
                    None
                }
            }
            Sign::NonNeg => {
                if a.is_positive() {
                    // least m with a*m + b >= 0, i.e. m >= -b/a
                    let m0 = (-b).div_ceil(a);
                    Some(m0.max(one))
                } else if a.is_zero() && !b.is_negative() {
                    Some(one)
                } else {
                    None
                }
            }
            Sign::Negative => {
                if a.is_negative() {
                    // least m with a*m + b < 0, i.e. m > b/(-a)
                    let m0 = b.div_floor(&-a) + &one;
                    Some(m0.max(one))
                } else if a.is_zero() && b.is_negative() {
                    Some(one)
                } else {
                    None
                }
            }
        }
    }

    /// Least `m0 >= 1` with `self(m) <= 0` for all `m >= m0`, if any.
    /// Used by linear-system normalization to clip dead multiplicities.
    pub fn nonpositive_from(&self) -> Option<BigInt> {
        if self.slope.is_negative() {
            // a*m + b <= 0 iff m >= b/(-a)
            let m0 = self.offset.div_ceil(&-&self.slope);
            Some(m0.max(BigInt::one()))
        } else if self.slope.is_zero() && !self.offset.is_positive() {
            Some(BigInt::one())
        } else {
            None
        }
    }
}

impl fmt::Display for AffineForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.offset.is_negative() {
            write!(f, "{}*m-{}", self.slope, -&self.offset)
        } else {
            write!(f, "{}*m+{}", self.slope, self.offset)
        }
    }
}

impl fmt::Debug for AffineForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for AffineForm {
    type Err = Error;

    /// Accepts `a*m+b`, `a*m-b`, `a*m`, and plain integers `b`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let bad = || Error::Parse(format!("bad affine form: {s}"));
        match s.find("*m") {
            Some(pos) => {
                let slope = BigInt::from_str(&s[..pos]).map_err(|_| bad())?;
                let rest = &s[pos + 2..];
                let offset = if rest.is_empty() {
                    BigInt::zero()
                } else {
                    let (sign, digits) = rest.split_at(1);
                    let v = BigInt::from_str(digits.trim()).map_err(|_| bad())?;
                    match sign {
                        "+" => v,
                        "-" => -v,
                        _ => return Err(bad()),
                    }
                };
                Ok(AffineForm { slope, offset })
            }
            None => Ok(AffineForm::constant(BigInt::from_str(s).map_err(|_| bad())?)),
        }
    }
}

impl Serialize for AffineForm {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for AffineForm {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A polynomial in `Z[m, s]`, keyed by exponent pair `(deg_m, deg_s)`.
/// Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct BivariatePoly {
    pub coeffs: BTreeMap<(u32, u32), BigInt>,
}

impl BivariatePoly {
    pub fn zero() -> Self {
        BivariatePoly::default()
    }

    pub fn constant<C: Into<BigInt>>(c: C) -> Self {
        let mut p = BivariatePoly::zero();
        p.add_term(0, 0, c.into());
        p
    }

    pub fn var_m() -> Self {
        let mut p = BivariatePoly::zero();
        p.add_term(1, 0, BigInt::one());
        p
    }

    pub fn var_s() -> Self {
        let mut p = BivariatePoly::zero();
        p.add_term(0, 1, BigInt::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_term(&mut self, dm: u32, ds: u32, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry((dm, ds)).or_insert_with(BigInt::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&(dm, ds));
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&k, c) in &other.coeffs {
            out.add_term(k.0, k.1, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&k, c) in &other.coeffs {
            out.add_term(k.0, k.1, -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        BivariatePoly::zero().sub(self)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = BivariatePoly::zero();
        for (&(am, as_), ac) in &self.coeffs {
            for (&(bm, bs), bc) in &other.coeffs {
                out.add_term(am + bm, as_ + bs, ac * bc);
            }
        }
        out
    }

    pub fn scale<C: Into<BigInt>>(&self, c: C) -> Self {
        self.mul(&BivariatePoly::constant(c))
    }

    /// Substitute `s -> expr` (used for the induction shift `s -> s+1` and the
    /// termination substitution `s -> m`).
    pub fn subst_s(&self, expr: &BivariatePoly) -> Self {
        let mut out = BivariatePoly::zero();
        for (&(dm, ds), c) in &self.coeffs {
            let mut term = BivariatePoly::zero();
            term.add_term(dm, 0, c.clone());
            let mut pw = BivariatePoly::constant(1);
            for _ in 0..ds {
                pw = pw.mul(expr);
            }
            out = out.add(&term.mul(&pw));
        }
        out
    }

    /// Exact evaluation at integer `(m, s)`.
    pub fn eval(&self, m: &BigInt, s: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for (&(dm, ds), c) in &self.coeffs {
            acc += c * m.pow(dm) * s.pow(ds);
        }
        acc
    }

    /// Coefficients `[c0, c1, c2]` of a polynomial univariate in `m`.
    /// Errors if the polynomial involves `s` or has degree > 2.
    fn univariate_m_coeffs(&self) -> Result<[BigInt; 3], Error> {
        let mut out = [BigInt::zero(), BigInt::zero(), BigInt::zero()];
        for (&(dm, ds), c) in &self.coeffs {
            if ds != 0 {
                return Err(Error::Forms("polynomial is not univariate in m".into()));
            }
            if dm > 2 {
                return Err(Error::Forms("degree in m exceeds 2".into()));
            }
            out[dm as usize] = c.clone();
        }
        Ok(out)
    }
}

impl fmt::Debug for BivariatePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(dm, ds), c) in self.coeffs.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            if dm > 0 {
                write!(f, "*m^{dm}")?;
            }
            if ds > 0 {
                write!(f, "*s^{ds}")?;
            }
        }
        Ok(())
    }
}

/// Decides `q(m) > 0` for all integers `m >= m0`, exactly, for `q` univariate
/// in `m` of degree at most 2. A convex quadratic attains its integer minimum
/// at one of the integers adjacent to the vertex, so it suffices to evaluate
/// there and at `m0`.
pub fn poly_sign_all_m(q: &BivariatePoly, m0: &BigInt) -> Result<bool, Error> {
    let [c0, c1, c2] = q.univariate_m_coeffs()?;
    let at = |m: &BigInt| -> BigInt { &c2 * m * m + &c1 * m + &c0 };
    if c2.is_zero() {
        if c1.is_zero() {
            return Ok(c0.is_positive());
        }
        if c1.is_negative() {
            return Ok(false);
        }
        return Ok(at(m0).is_positive());
    }
    if c2.is_negative() {
        return Ok(false);
    }
    // vertex at -c1/(2*c2); integer minimizers to test
    let two_a = &c2 * 2;
    let vf = (-&c1).div_floor(&two_a);
    let vc = (-&c1).div_ceil(&two_a);
    let candidates = [m0.clone(), vf.max(m0.clone()), vc.max(m0.clone())];
    Ok(candidates.iter().all(|m| at(m).is_positive()))
}

/// Decides `q >= cbrt(a)/3 + 1/2^k` exactly: with `u = q - 1/2^k`, the answer
/// is `u >= 0 && 27*u^3 >= a`. Ties count as satisfied.
pub fn cmp_rational_cbrt(q: &Rational, a: u64, k: u32) -> bool {
    let half_pow = Rational::new(BigInt::one(), BigInt::from(2u64).pow(k));
    let u = q - half_pow;
    if u.is_negative() {
        return false;
    }
    let cube = &u * &u * &u;
    cube * BigInt::from(27) >= Rational::from(BigInt::from(a))
}
