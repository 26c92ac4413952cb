//! Univariate polynomials over a prime field `F_p`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Inverse of a nonzero residue modulo the prime `p`.
pub fn inv_mod(a: u64, p: u64) -> u64 {
    assert!(!a.is_multiple_of(p), "inverse of zero mod {p}");
    pow_mod(a % p, p - 2, p)
}

pub fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

pub fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|k| k * k <= p).all(|k| !p.is_multiple_of(k))
}

/// Polynomial in `t` over `F_p`, lowest power first, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FpPoly {
    p: u64,
    coeffs: Vec<u64>,
}

impl FpPoly {
    pub fn new(p: u64, coeffs: Vec<u64>) -> Self {
        let mut coeffs: Vec<u64> = coeffs.into_iter().map(|c| c % p).collect();
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        FpPoly { p, coeffs }
    }

    pub fn zero(p: u64) -> Self {
        FpPoly { p, coeffs: Vec::new() }
    }

    pub fn constant(p: u64, c: u64) -> Self {
        Self::new(p, vec![c])
    }

    pub fn one(p: u64) -> Self {
        Self::constant(p, 1)
    }

    /// `c * t^k`
    pub fn monomial(p: u64, c: u64, k: usize) -> Self {
        let mut v = vec![0; k + 1];
        v[k] = c;
        Self::new(p, v)
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> u64 {
        self.coeffs.get(k).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [1]
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> u64 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn scale(&self, c: u64) -> Self {
        Self::new(self.p, self.coeffs.iter().map(|x| x * (c % self.p)).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(inv_mod(self.leading(), self.p))
    }

    pub fn div_rem(&self, b: &FpPoly) -> (FpPoly, FpPoly) {
        assert_eq!(self.p, b.p);
        let p = self.p;
        let db = b.degree().expect("division by zero polynomial");
        let inv = inv_mod(b.leading(), p);
        let mut r = self.coeffs.clone();
        let mut q = vec![0; r.len().saturating_sub(db).max(1)];
        while r.len() > db {
            let k = r.len() - 1 - db;
            let c = r[r.len() - 1] * inv % p;
            q[k] = c;
            for (i, bc) in b.coeffs.iter().enumerate() {
                r[k + i] = (r[k + i] + p - c * bc % p) % p;
            }
            while r.last() == Some(&0) {
                r.pop();
            }
        }
        (FpPoly::new(p, q), FpPoly::new(p, r))
    }

    pub fn rem(&self, b: &FpPoly) -> FpPoly {
        self.div_rem(b).1
    }

    /// Monic gcd.
    pub fn gcd(&self, b: &FpPoly) -> FpPoly {
        let (mut a, mut b) = (self.clone(), b.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// All monic polynomials of exact degree `k`, in lexicographic order of
    /// their lower coefficients.
    pub fn monics_of_degree(p: u64, k: usize) -> impl Iterator<Item = FpPoly> {
        let total = p.pow(k as u32);
        (0..total).map(move |mut idx| {
            let mut v = Vec::with_capacity(k + 1);
            for _ in 0..k {
                v.push(idx % p);
                idx /= p;
            }
            v.push(1);
            FpPoly::new(p, v)
        })
    }

    /// Irreducibility by trial division against every monic polynomial of
    /// degree at most half the degree.
    pub fn is_irreducible(&self) -> bool {
        let Some(d) = self.degree() else { return false };
        if d == 0 {
            return false;
        }
        (1..=d / 2).all(|k| Self::monics_of_degree(self.p, k).all(|f| !self.rem(&f).is_zero()))
    }

    pub fn eval(&self, x: u64) -> u64 {
        self.coeffs.iter().rev().fold(0, |acc, c| (acc * x + c) % self.p)
    }
}

impl fmt::Display for FpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            if c != 1 || k == 0 {
                write!(f, "{c}")?;
            }
            match k {
                0 => {}
                1 => write!(f, "t")?,
                _ => write!(f, "t^{k}")?,
            }
        }
        Ok(())
    }
}

impl Add<&FpPoly> for &FpPoly {
    type Output = FpPoly;
    fn add(self, rhs: &FpPoly) -> FpPoly {
        assert_eq!(self.p, rhs.p);
        let n = self.coeffs.len().max(rhs.coeffs.len());
        FpPoly::new(self.p, (0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Neg for &FpPoly {
    type Output = FpPoly;
    fn neg(self) -> FpPoly {
        FpPoly::new(self.p, self.coeffs.iter().map(|c| (self.p - c) % self.p).collect())
    }
}

impl Sub<&FpPoly> for &FpPoly {
    type Output = FpPoly;
    fn sub(self, rhs: &FpPoly) -> FpPoly {
        self + &(-rhs)
    }
}

impl Mul<&FpPoly> for &FpPoly {
    type Output = FpPoly;
    fn mul(self, rhs: &FpPoly) -> FpPoly {
        assert_eq!(self.p, rhs.p);
        if self.is_zero() || rhs.is_zero() {
            return FpPoly::zero(self.p);
        }
        let p = self.p;
        let mut out = vec![0u64; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = (out[i + j] + a * b) % p;
            }
        }
        FpPoly::new(p, out)
    }
}
