//! Residue fields `F_p[t]/(f)` of closed points.

use crate::bundles::ClosedPoint;
use crate::error::{domain, Result};
use crate::fpoly::FpPoly;

/// An element of a residue field, encoded as the base-`p` integer whose
/// digits are its coefficients in `1, t, ..., t^{d-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElem(pub u32);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

const TABLE_LIMIT: u64 = 512;

#[derive(Clone, Debug)]
pub struct ResidueField {
    p: u64,
    d: usize,
    modulus: FpPoly,
    size: u64,
    mul_table: Option<Vec<u32>>,
    inv_table: Vec<u32>,
}

impl ResidueField {
    pub fn new(modulus: FpPoly) -> Result<Self> {
        let Some(d) = modulus.degree() else {
            return domain("zero modulus");
        };
        if d == 0 || modulus.leading() != 1 || !modulus.is_irreducible() {
            return domain(format!("{modulus} is not monic irreducible"));
        }
        let p = modulus.modulus();
        let size = p.pow(d as u32);
        let mut field = ResidueField { p, d, modulus, size, mul_table: None, inv_table: Vec::new() };
        if size <= TABLE_LIMIT {
            let mut t = vec![0u32; (size * size) as usize];
            for a in 0..size {
                for b in 0..size {
                    t[(a * size + b) as usize] = field.mul_slow(FieldElem(a as u32), FieldElem(b as u32)).0;
                }
            }
            field.mul_table = Some(t);
        }
        let mut inv = vec![0u32; size as usize];
        for a in 1..size {
            inv[a as usize] = field.pow(FieldElem(a as u32), size - 2).0;
        }
        field.inv_table = inv;
        Ok(field)
    }

    pub fn of_point(x: &ClosedPoint) -> Result<Self> {
        match x.fp_poly() {
            Some(f) => Self::new(f),
            None => domain("the point has no explicit polynomial"),
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn modulus(&self) -> &FpPoly {
        &self.modulus
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElem> {
        (0..self.size as u32).map(FieldElem)
    }

    pub fn digits(&self, a: FieldElem) -> Vec<u64> {
        let mut v = Vec::with_capacity(self.d);
        let mut x = a.0 as u64;
        for _ in 0..self.d {
            v.push(x % self.p);
            x /= self.p;
        }
        v
    }

    pub fn from_digits(&self, digits: &[u64]) -> FieldElem {
        let mut x = 0u64;
        for &c in digits.iter().rev() {
            x = x * self.p + c % self.p;
        }
        FieldElem(x as u32)
    }

    /// Reduce a polynomial modulo the defining polynomial.
    pub fn reduce(&self, f: &FpPoly) -> FieldElem {
        let r = f.rem(&self.modulus);
        let mut digits = r.coeffs().to_vec();
        digits.resize(self.d, 0);
        self.from_digits(&digits)
    }

    pub fn to_poly(&self, a: FieldElem) -> FpPoly {
        FpPoly::new(self.p, self.digits(a))
    }

    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        let (x, y) = (self.digits(a), self.digits(b));
        let s: Vec<u64> = x.iter().zip(&y).map(|(u, v)| (u + v) % self.p).collect();
        self.from_digits(&s)
    }

    pub fn neg(&self, a: FieldElem) -> FieldElem {
        let s: Vec<u64> = self.digits(a).iter().map(|u| (self.p - u) % self.p).collect();
        self.from_digits(&s)
    }

    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        match &self.mul_table {
            Some(t) => FieldElem(t[(a.0 as u64 * self.size + b.0 as u64) as usize]),
            None => self.mul_slow(a, b),
        }
    }

    fn mul_slow(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.reduce(&(&self.to_poly(a) * &self.to_poly(b)))
    }

    pub fn pow(&self, a: FieldElem, mut e: u64) -> FieldElem {
        let mut acc = FieldElem::ONE;
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: FieldElem) -> FieldElem {
        assert!(!a.is_zero(), "inverse of zero");
        FieldElem(self.inv_table[a.0 as usize])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f4_arithmetic() {
        let f = ResidueField::new(FpPoly::new(2, vec![1, 1, 1])).unwrap();
        assert_eq!(f.size(), 4);
        let t = FieldElem(2);
        // t^2 = t + 1
        assert_eq!(f.mul(t, t), FieldElem(3));
        for a in f.elements().skip(1) {
            assert_eq!(f.mul(a, f.inv(a)), FieldElem::ONE);
        }
    }

    #[test]
    fn field_axioms_in_f9_and_f49() {
        for (p, m) in [(3u64, vec![1u64, 0, 1]), (7, vec![3, 1, 1])] {
            let f = ResidueField::new(FpPoly::new(p, m)).unwrap();
            let els: Vec<FieldElem> = f.elements().collect();
            for &a in els.iter().step_by(3) {
                for &b in els.iter().step_by(5) {
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    assert_eq!(f.add(f.sub(a, b), b), a);
                    if !b.is_zero() {
                        assert_eq!(f.mul(f.mul(a, b), f.inv(b)), a);
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_reducible_modulus() {
        assert!(ResidueField::new(FpPoly::new(2, vec![1, 0, 1])).is_err());
    }
}
