//! Exact arithmetic in `Z[q]` and its fraction field, plus the q-analogue
//! counts (Gaussian binomials, q-factorials, general linear group orders).

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Deserializer;
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Polynomial in `q` with integer coefficients, lowest power first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QPoly {
    coeffs: Vec<BigInt>,
}

impl QPoly {
    pub fn zero() -> Self {
        QPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(1)
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::from_coeffs(vec![c.into()])
    }

    /// `c * q^k`
    pub fn monomial(c: impl Into<BigInt>, k: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); k + 1];
        coeffs[k] = c.into();
        Self::from_coeffs(coeffs)
    }

    pub fn q() -> Self {
        Self::monomial(1, 1)
    }

    pub fn q_pow(k: usize) -> Self {
        Self::monomial(1, k)
    }

    pub fn from_coeffs(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn from_i64s(cs: &[i64]) -> Self {
        Self::from_coeffs(cs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    /// Evaluate at an integer; Horner.
    pub fn eval(&self, q0: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * q0 + c;
        }
        acc
    }

    pub fn eval_i64(&self, q0: i64) -> BigInt {
        self.eval(&BigInt::from(q0))
    }

    /// Substitute `q -> q^d`.
    pub fn compose_power(&self, d: usize) -> Self {
        assert!(d >= 1);
        let mut coeffs = vec![BigInt::zero(); (self.coeffs.len().max(1) - 1) * d + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * d] = c.clone();
        }
        Self::from_coeffs(coeffs)
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|x| x * c).collect())
    }

    /// Multiply by `q^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![BigInt::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        QPoly { coeffs }
    }

    /// Nonnegative gcd of the coefficients.
    pub fn content(&self) -> BigInt {
        self.coeffs
            .iter()
            .fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    pub fn primitive_part(&self) -> Self {
        let c = self.content();
        if c.is_zero() {
            return Self::zero();
        }
        Self::from_coeffs(self.coeffs.iter().map(|x| x / &c).collect())
    }

    fn pseudo_rem(&self, b: &QPoly) -> QPoly {
        let db = b.degree().expect("pseudo-remainder by zero");
        let lb = b.leading();
        let mut r = self.clone();
        while let Some(dr) = r.degree() {
            if dr < db {
                break;
            }
            let lr = r.leading();
            r = &r.scale(&lb) - &b.shift(dr - db).scale(&lr);
        }
        r
    }

    /// Exact quotient in `Z[q]`, or `None` if `b` does not divide `self`.
    pub fn div_exact(&self, b: &QPoly) -> Option<QPoly> {
        let db = b.degree()?;
        let lb = b.leading();
        let mut r = self.clone();
        let mut quot = vec![BigInt::zero(); self.coeffs.len().saturating_sub(db).max(1)];
        while let Some(dr) = r.degree() {
            if dr < db {
                return None;
            }
            let (c, rem) = r.leading().div_rem(&lb);
            if !rem.is_zero() {
                return None;
            }
            r = &r - &b.shift(dr - db).scale(&c);
            quot[dr - db] = c;
        }
        Some(Self::from_coeffs(quot))
    }

    /// Greatest common divisor with positive leading coefficient.
    pub fn gcd(&self, other: &QPoly) -> QPoly {
        if self.is_zero() {
            return other.normalize_sign();
        }
        if other.is_zero() {
            return self.normalize_sign();
        }
        let c = self.content().gcd(&other.content());
        let (mut a, mut b) = (self.primitive_part(), other.primitive_part());
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        loop {
            let r = a.pseudo_rem(&b);
            if r.is_zero() {
                break;
            }
            a = b;
            b = r.primitive_part();
        }
        b.primitive_part().scale(&c).normalize_sign()
    }

    fn normalize_sign(&self) -> QPoly {
        if self.leading().is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn pow(&self, e: usize) -> QPoly {
        let mut acc = QPoly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if c.is_negative() {
                write!(f, "-")?;
            } else if !first {
                write!(f, "+")?;
            }
            first = false;
            let show_mag = k == 0 || !mag.is_one();
            if show_mag {
                write!(f, "{mag}")?;
            }
            match k {
                0 => {}
                1 => write!(f, "q")?,
                _ => write!(f, "q^{k}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for QPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.coeffs.len()))?;
        for c in &self.coeffs {
            match c.to_i64() {
                Some(v) => seq.serialize_element(&v)?,
                None => seq.serialize_element(&c.to_string())?,
            }
        }
        seq.end()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawCoeff {
    Int(i64),
    Text(String),
}

impl<'de> Deserialize<'de> for QPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<RawCoeff>::deserialize(d)?;
        let mut coeffs = Vec::with_capacity(raw.len());
        for c in raw {
            coeffs.push(match c {
                RawCoeff::Int(v) => BigInt::from(v),
                RawCoeff::Text(t) => t.parse().map_err(serde::de::Error::custom)?,
            });
        }
        Ok(QPoly::from_coeffs(coeffs))
    }
}

impl Add<&QPoly> for &QPoly {
    type Output = QPoly;
    fn add(self, rhs: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.coeffs.get(i);
            let b = rhs.coeffs.get(i);
            out.push(match (a, b) {
                (Some(a), Some(b)) => a + b,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            });
        }
        QPoly::from_coeffs(out)
    }
}

impl Sub<&QPoly> for &QPoly {
    type Output = QPoly;
    fn sub(self, rhs: &QPoly) -> QPoly {
        self + &(-rhs)
    }
}

impl Mul<&QPoly> for &QPoly {
    type Output = QPoly;
    fn mul(self, rhs: &QPoly) -> QPoly {
        if self.is_zero() || rhs.is_zero() {
            return QPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPoly::from_coeffs(out)
    }
}

impl Neg for &QPoly {
    type Output = QPoly;
    fn neg(self) -> QPoly {
        QPoly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Add for QPoly {
    type Output = QPoly;
    fn add(self, rhs: QPoly) -> QPoly {
        &self + &rhs
    }
}

impl Sub for QPoly {
    type Output = QPoly;
    fn sub(self, rhs: QPoly) -> QPoly {
        &self - &rhs
    }
}

impl Mul for QPoly {
    type Output = QPoly;
    fn mul(self, rhs: QPoly) -> QPoly {
        &self * &rhs
    }
}

impl Neg for QPoly {
    type Output = QPoly;
    fn neg(self) -> QPoly {
        -&self
    }
}

impl AddAssign<&QPoly> for QPoly {
    fn add_assign(&mut self, rhs: &QPoly) {
        *self = &*self + rhs;
    }
}

/// Reduced quotient of two polynomials in `q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QRat {
    num: QPoly,
    den: QPoly,
}

impl QRat {
    pub fn new(num: QPoly, den: QPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let g = num.gcd(&den);
        let mut num = num.div_exact(&g).expect("gcd divides numerator");
        let mut den = den.div_exact(&g).expect("gcd divides denominator");
        if den.leading().is_negative() {
            num = -num;
            den = -den;
        }
        Ok(QRat { num, den })
    }

    pub fn zero() -> Self {
        QRat { num: QPoly::zero(), den: QPoly::one() }
    }

    pub fn one() -> Self {
        QRat { num: QPoly::one(), den: QPoly::one() }
    }

    pub fn from_poly(p: QPoly) -> Self {
        QRat { num: p, den: QPoly::one() }
    }

    pub fn numer(&self) -> &QPoly {
        &self.num
    }

    pub fn denom(&self) -> &QPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The numerator when the denominator is 1.
    pub fn as_poly(&self) -> Option<&QPoly> {
        self.den.is_one().then_some(&self.num)
    }

    pub fn recip(&self) -> Result<Self> {
        QRat::new(self.den.clone(), self.num.clone())
    }

    pub fn checked_div(&self, rhs: &QRat) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        QRat::new(&self.num * &rhs.den, &self.den * &rhs.num)
    }

    pub fn mul_poly(&self, p: &QPoly) -> Self {
        QRat::new(&self.num * p, self.den.clone()).expect("nonzero denominator")
    }

    pub fn eval(&self, q0: &BigInt) -> Result<BigRational> {
        let d = self.den.eval(q0);
        if d.is_zero() {
            return Err(Error::Pole(q0.clone()));
        }
        Ok(BigRational::new(self.num.eval(q0), d))
    }

    pub fn eval_i64(&self, q0: i64) -> Result<BigRational> {
        self.eval(&BigInt::from(q0))
    }
}

impl fmt::Display for QRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl From<QPoly> for QRat {
    fn from(p: QPoly) -> Self {
        QRat::from_poly(p)
    }
}

impl Add<&QRat> for &QRat {
    type Output = QRat;
    fn add(self, rhs: &QRat) -> QRat {
        if self.den == rhs.den {
            return QRat::new(&self.num + &rhs.num, self.den.clone()).unwrap();
        }
        QRat::new(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
        .unwrap()
    }
}

impl Sub<&QRat> for &QRat {
    type Output = QRat;
    fn sub(self, rhs: &QRat) -> QRat {
        self + &(-rhs)
    }
}

impl Mul<&QRat> for &QRat {
    type Output = QRat;
    fn mul(self, rhs: &QRat) -> QRat {
        QRat::new(&self.num * &rhs.num, &self.den * &rhs.den).unwrap()
    }
}

impl Neg for &QRat {
    type Output = QRat;
    fn neg(self) -> QRat {
        QRat { num: -&self.num, den: self.den.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn qrat_arith(a: &QRat, b: &QRat, op: ArithOp) -> Result<QRat> {
    Ok(match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
        ArithOp::Div => a.checked_div(b)?,
    })
}

/// `q^n - 1`
fn q_pow_minus_one(n: usize) -> QPoly {
    &QPoly::q_pow(n) - &QPoly::one()
}

/// `[n]_q = 1 + q + ... + q^{n-1}`
pub fn q_integer(n: usize) -> QPoly {
    QPoly::from_coeffs(vec![BigInt::one(); n])
}

/// `[n]_q!`
pub fn q_factorial(n: usize) -> QPoly {
    (1..=n).fold(QPoly::one(), |acc, i| &acc * &q_integer(i))
}

/// Number of `k`-dimensional subspaces of `F_q^n`, as a polynomial in `q`.
pub fn gaussian_binomial(k: usize, n: usize) -> Result<QPoly> {
    if k > n {
        return domain(format!("gaussian binomial needs k <= n, got k={k}, n={n}"));
    }
    let num = (0..k).fold(QPoly::one(), |acc, i| &acc * &q_pow_minus_one(n - i));
    let den = (1..=k).fold(QPoly::one(), |acc, i| &acc * &q_pow_minus_one(i));
    Ok(num.div_exact(&den).expect("gaussian binomial is a polynomial"))
}

/// `|GL_n(F_{q0})|`
pub fn gl_order(n: usize, q0: &BigInt) -> BigInt {
    let qn = q0.pow(n as u32);
    (0..n).fold(BigInt::one(), |acc, i| acc * (&qn - q0.pow(i as u32)))
}

pub fn eval_poly(p: &QPoly, q0: i64) -> BigRational {
    BigRational::from_integer(p.eval_i64(q0))
}

pub fn eval_rat(p: &QRat, q0: i64) -> Result<BigRational> {
    p.eval_i64(q0)
}
