//! Splitting types of vector bundles on the projective line.

use std::fmt;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fpoly::{is_prime, FpPoly};
use crate::qcalc::{gl_order, q_factorial, QPoly, QRat};

/// `O(d_1) + ... + O(d_n)` with `d_1 <= ... <= d_n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawBundle")]
pub struct BundleType {
    degrees: Vec<i64>,
}

#[derive(Deserialize)]
struct RawBundle {
    degrees: Vec<i64>,
}

impl TryFrom<RawBundle> for BundleType {
    type Error = Error;
    fn try_from(raw: RawBundle) -> Result<Self> {
        normalize(&raw.degrees)
    }
}

/// Sorted copy of a nonempty degree list.
pub fn normalize(degrees: &[i64]) -> Result<BundleType> {
    if degrees.is_empty() {
        return domain("a bundle needs at least one line bundle summand");
    }
    let mut degrees = degrees.to_vec();
    degrees.sort_unstable();
    Ok(BundleType { degrees })
}

impl BundleType {
    pub fn new(degrees: &[i64]) -> Result<Self> {
        normalize(degrees)
    }

    /// The trivial bundle of rank `n`.
    pub fn trivial(n: usize) -> Self {
        BundleType { degrees: vec![0; n] }
    }

    pub fn degrees(&self) -> &[i64] {
        &self.degrees
    }

    pub fn rank(&self) -> usize {
        self.degrees.len()
    }

    pub fn degree(&self) -> i64 {
        self.degrees.iter().sum()
    }

    pub fn min_degree(&self) -> i64 {
        self.degrees[0]
    }

    pub fn max_degree(&self) -> i64 {
        self.degrees[self.degrees.len() - 1]
    }

    pub fn spread(&self) -> i64 {
        self.max_degree() - self.min_degree()
    }

    /// `(b_i, l_i)` with the `b_i` strictly increasing.
    pub fn grouped(&self) -> Vec<(i64, usize)> {
        let mut out: Vec<(i64, usize)> = Vec::new();
        for &d in &self.degrees {
            match out.last_mut() {
                Some((b, l)) if *b == d => *l += 1,
                _ => out.push((d, 1)),
            }
        }
        out
    }

    pub fn has_distinct_degrees(&self) -> bool {
        self.degrees.windows(2).all(|w| w[0] < w[1])
    }

    /// Tensor with `O(k)`.
    pub fn twist(&self, k: i64) -> Self {
        BundleType { degrees: self.degrees.iter().map(|d| d + k).collect() }
    }

    pub fn direct_sum(&self, other: &BundleType) -> Self {
        let mut degrees = self.degrees.clone();
        degrees.extend_from_slice(&other.degrees);
        degrees.sort_unstable();
        BundleType { degrees }
    }

    /// Summands with indices in `range`, which stay sorted.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        BundleType { degrees: self.degrees[range].to_vec() }
    }

    pub fn proj_class(&self) -> ProjBundleClass {
        ProjBundleClass(self.twist(-self.min_degree()))
    }

    /// `Q(E)`: the inverse of the product of q-factorials of the multiplicities.
    pub fn q_factor(&self) -> QRat {
        let den = self
            .grouped()
            .iter()
            .fold(QPoly::one(), |acc, &(_, l)| &acc * &q_factorial(l));
        QRat::new(QPoly::one(), den).expect("q-factorials are nonzero")
    }

    /// Order of the automorphism group over `F_{q0}`.
    pub fn aut_order(&self, q0: &BigInt) -> BigInt {
        let g = self.grouped();
        let mut acc = BigInt::one();
        let mut exp: u64 = 0;
        for (i, &(bi, li)) in g.iter().enumerate() {
            acc *= gl_order(li, q0);
            for &(bj, lj) in &g[i + 1..] {
                exp += (li * lj) as u64 * (bj - bi + 1) as u64;
            }
        }
        acc * q0.pow(exp as u32)
    }
}

impl fmt::Display for BundleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .grouped()
            .iter()
            .map(|&(b, l)| {
                let base = if b == 0 { "O".to_string() } else { format!("O({b})") };
                if l == 1 {
                    base
                } else {
                    format!("{base}^{l}")
                }
            })
            .collect();
        write!(f, "{}", parts.join("+"))
    }
}

/// A splitting type up to twist, represented with minimum degree zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProjBundleClass(BundleType);

impl ProjBundleClass {
    pub fn bundle(&self) -> &BundleType {
        &self.0
    }

    pub fn degrees(&self) -> &[i64] {
        self.0.degrees()
    }
}

impl fmt::Display for ProjBundleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A closed point of degree `d` on the affine line over `F_q`, optionally
/// with an explicit monic irreducible polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPoint")]
pub struct ClosedPoint {
    q: u64,
    degree: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    poly: Option<Vec<u64>>,
}

#[derive(Deserialize)]
struct RawPoint {
    q: u64,
    degree: usize,
    poly: Option<Vec<u64>>,
}

impl TryFrom<RawPoint> for ClosedPoint {
    type Error = Error;
    fn try_from(raw: RawPoint) -> Result<Self> {
        ClosedPoint::new(raw.q, raw.degree, raw.poly)
    }
}

impl ClosedPoint {
    pub fn new(q: u64, degree: usize, poly: Option<Vec<u64>>) -> Result<Self> {
        if q < 2 {
            return domain(format!("field size must be at least 2, got {q}"));
        }
        if degree == 0 {
            return domain("point degree must be at least 1");
        }
        if let Some(cs) = &poly {
            if !is_prime(q) {
                return domain(format!("explicit points need a prime base field, got q={q}"));
            }
            if cs.iter().any(|&c| c >= q) {
                return domain("polynomial coefficients must be reduced mod q");
            }
            let f = FpPoly::new(q, cs.clone());
            if f.degree() != Some(degree) || f.leading() != 1 || cs.len() != degree + 1 {
                return domain(format!("point polynomial must be monic of degree {degree}"));
            }
            if !f.is_irreducible() {
                return domain(format!("{f} is reducible over F_{q}"));
            }
        }
        Ok(ClosedPoint { q, degree, poly })
    }

    /// A point known only by its degree.
    pub fn abstract_point(q: u64, degree: usize) -> Result<Self> {
        Self::new(q, degree, None)
    }

    /// The first monic irreducible polynomial of the given degree.
    pub fn first_of_degree(q: u64, degree: usize) -> Result<Self> {
        if !is_prime(q) || degree == 0 {
            return domain(format!("no explicit point of degree {degree} over F_{q}"));
        }
        let f = FpPoly::monics_of_degree(q, degree)
            .find(|f| f.is_irreducible())
            .expect("irreducibles exist in every degree");
        Self::new(q, degree, Some(f.coeffs().to_vec()))
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn poly(&self) -> Option<&[u64]> {
        self.poly.as_deref()
    }

    pub fn fp_poly(&self) -> Option<FpPoly> {
        self.poly.as_ref().map(|cs| FpPoly::new(self.q, cs.clone()))
    }

    /// Size of the residue field.
    pub fn residue_size(&self) -> u64 {
        self.q.pow(self.degree as u32)
    }
}
