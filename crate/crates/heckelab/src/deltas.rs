//! Binary vectors with a fixed number of ones and their statistics.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::qcalc::QPoly;

/// A 0/1 vector of length `n` with `r` ones. Positions are 1-based in the
/// formulas below and 0-based in the stored array.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct DeltaVec {
    bits: Vec<u8>,
}

impl TryFrom<Vec<u8>> for DeltaVec {
    type Error = Error;
    fn try_from(bits: Vec<u8>) -> Result<Self> {
        DeltaVec::new(bits)
    }
}

impl From<DeltaVec> for Vec<u8> {
    fn from(d: DeltaVec) -> Vec<u8> {
        d.bits
    }
}

impl DeltaVec {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return domain("delta vectors hold only zeros and ones");
        }
        Ok(DeltaVec { bits })
    }

    pub fn zeros(n: usize) -> Self {
        DeltaVec { bits: vec![0; n] }
    }

    /// `(0^{n-r}, 1^r)`, the vector of largest weight.
    pub fn maximal(n: usize, r: usize) -> Self {
        let mut bits = vec![0; n - r];
        bits.extend(std::iter::repeat_n(1, r));
        DeltaVec { bits }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn get(&self, i: usize) -> u8 {
        self.bits[i]
    }

    /// `|delta|` with respect to its own number of ones.
    pub fn weight(&self) -> i64 {
        self.weight_in(self.ones())
    }

    /// `sum_i (1 - delta(i)) (r - sum_{j <= i} delta(j))` for an ambient `r`,
    /// which may exceed the number of ones when torsion survives a product.
    pub fn weight_in(&self, r: usize) -> i64 {
        let mut seen = 0i64;
        let mut acc = 0i64;
        for &b in &self.bits {
            seen += b as i64;
            if b == 0 {
                acc += r as i64 - seen;
            }
        }
        acc
    }

    /// Sum of the 1-based positions of the ones.
    pub fn omega(&self) -> i64 {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == 1)
            .map(|(i, _)| i as i64 + 1)
            .sum()
    }

    pub fn concat(&self, other: &DeltaVec) -> DeltaVec {
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&other.bits);
        DeltaVec { bits }
    }
}

impl fmt::Display for DeltaVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.bits.iter().map(|b| b.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// All vectors of length `n` with `r` ones, ordered lexicographically by the
/// positions of their ones.
pub fn enumerate(n: usize, r: usize) -> Result<Vec<DeltaVec>> {
    if r > n {
        return domain(format!("cannot place {r} ones in a vector of length {n}"));
    }
    let mut out = Vec::new();
    let mut pos: Vec<usize> = (0..r).collect();
    loop {
        let mut bits = vec![0u8; n];
        for &p in &pos {
            bits[p] = 1;
        }
        out.push(DeltaVec { bits });
        let Some(i) = (0..r).rev().find(|&i| pos[i] < n - r + i) else {
            break;
        };
        pos[i] += 1;
        for j in i + 1..r {
            pos[j] = pos[j - 1] + 1;
        }
    }
    Ok(out)
}

/// `sum_{sigma} q^{omega(max) - omega(sigma)}` over all vectors with `r` ones.
pub fn schubert_count(n: usize, r: usize) -> Result<QPoly> {
    let top = DeltaVec::maximal(n, r).omega();
    let mut acc = QPoly::zero();
    for s in enumerate(n, r)? {
        acc += &QPoly::q_pow((top - s.omega()) as usize);
    }
    Ok(acc)
}
