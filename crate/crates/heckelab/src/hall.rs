//! Hall products of line bundles and of the skyscraper `K_x^r` with a bundle
//! on the projective line.
//!
//! Words of line bundles are straightened by rewriting the rightmost
//! inversion `O(n) * O(m)`, `n > m`, into ascending pairs. An ascending word
//! with multiplicities `l_i` equals `prod [l_i]_q!` times the direct sum.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_traits::Signed;

use crate::bundles::BundleType;
use crate::deltas::{self, DeltaVec};
use crate::error::{domain, Error, Result};
use crate::qcalc::{q_factorial, QPoly, QRat};

/// `bundle + K_x^torsion` at the fixed point of a computation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HallTerm {
    pub bundle: BundleType,
    pub torsion: usize,
}

impl HallTerm {
    pub fn bundle(bundle: BundleType) -> Self {
        HallTerm { bundle, torsion: 0 }
    }
}

/// Finite combination of Hall terms; zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HallElement {
    terms: BTreeMap<HallTerm, QRat>,
}

impl HallElement {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_term(&mut self, term: HallTerm, c: &QRat) {
        if c.is_zero() {
            return;
        }
        let sum = match self.terms.get(&term) {
            Some(old) => old + c,
            None => c.clone(),
        };
        if sum.is_zero() {
            self.terms.remove(&term);
        } else {
            self.terms.insert(term, sum);
        }
    }

    pub fn terms(&self) -> &BTreeMap<HallTerm, QRat> {
        &self.terms
    }

    pub fn coefficient(&self, term: &HallTerm) -> QRat {
        self.terms.get(term).cloned().unwrap_or_else(QRat::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: &QRat) -> Self {
        let mut out = HallElement::new();
        for (t, v) in &self.terms {
            out.add_term(t.clone(), &(v * c));
        }
        out
    }

    fn from_combination(comb: &Combination, torsion: usize, factor: &QRat) -> Self {
        let mut out = HallElement::new();
        for (degrees, c) in comb {
            let term = HallTerm { bundle: BundleType::new(degrees).expect("nonempty"), torsion };
            out.add_term(term, &factor.mul_poly(c));
        }
        out
    }
}

/// Torsion-free terms only.
pub fn vec_part(h: &HallElement) -> HallElement {
    let mut out = HallElement::new();
    for (t, c) in h.terms() {
        if t.torsion == 0 {
            out.add_term(t.clone(), c);
        }
    }
    out
}

/// Sorted degree vector to polynomial coefficient.
pub type Combination = BTreeMap<Vec<i64>, QPoly>;

fn add_scaled(acc: &mut Combination, src: &Combination, c: &QPoly, shift: i64) {
    for (k, v) in src {
        let key: Vec<i64> = k.iter().map(|d| d + shift).collect();
        let term = c * v;
        let slot = acc.entry(key).or_insert_with(QPoly::zero);
        *slot += &term;
    }
    acc.retain(|_, v| !v.is_zero());
}

/// Ascending pairs replacing `O(n) * O(m)` for `n > m`.
fn rewrite_inversion(n: i64, m: i64) -> Vec<(QPoly, i64, i64)> {
    let g = (n - m) as usize;
    let mut out = vec![(QPoly::q_pow(g + 1), m, n)];
    let q2m1 = QPoly::from_i64s(&[-1, 0, 1]);
    let qm1 = QPoly::from_i64s(&[-1, 1]);
    for j in 1..=(g / 2) as i64 {
        let (a, b) = (m + j, n - j);
        let c = if a < b { q2m1.shift(g - 1) } else { qm1.shift(g - 1) };
        out.push((c, a, b));
    }
    out
}

/// Memoized straightening engine; memo access is synchronized so one engine
/// may be shared across threads.
#[derive(Default)]
pub struct HallEngine {
    memo: RwLock<HashMap<Vec<i64>, Arc<Combination>>>,
}

impl HallEngine {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn memo_len(&self) -> usize {
        self.memo.read().unwrap().len()
    }

    /// `O(e_1) * ... * O(e_k)` as a combination of direct sums.
    pub fn word_combination(&self, word: &[i64]) -> Result<Combination> {
        if word.is_empty() {
            return domain("empty word has no bundle terms");
        }
        let c = *word.iter().min().unwrap();
        let key: Vec<i64> = word.iter().map(|d| d - c).collect();
        let base = self.straighten(&key);
        let mut out = Combination::new();
        add_scaled(&mut out, &base, &QPoly::one(), c);
        Ok(out)
    }

    fn straighten(&self, key: &[i64]) -> Arc<Combination> {
        if let Some(hit) = self.memo.read().unwrap().get(key) {
            return hit.clone();
        }
        let mut out = Combination::new();
        match (0..key.len().saturating_sub(1)).rev().find(|&i| key[i] > key[i + 1]) {
            None => {
                let b = BundleType::new(key).expect("nonempty");
                let c = b.grouped().iter().fold(QPoly::one(), |acc, &(_, l)| &acc * &q_factorial(l));
                out.insert(key.to_vec(), c);
            }
            Some(i) => {
                for (c, a, b) in rewrite_inversion(key[i], key[i + 1]) {
                    let mut w = key.to_vec();
                    w[i] = a;
                    w[i + 1] = b;
                    let shift = *w.iter().min().unwrap();
                    let norm: Vec<i64> = w.iter().map(|d| d - shift).collect();
                    let sub = self.straighten(&norm);
                    add_scaled(&mut out, &sub, &c, shift);
                }
            }
        }
        let out = Arc::new(out);
        self.memo.write().unwrap().insert(key.to_vec(), out.clone());
        out
    }

    pub fn word_product(&self, word: &[i64]) -> Result<HallElement> {
        Ok(HallElement::from_combination(&self.word_combination(word)?, 0, &QRat::one()))
    }

    /// `F * G` for bundles.
    pub fn bundle_product(&self, f: &BundleType, g: &BundleType) -> Result<HallElement> {
        let mut word = f.degrees().to_vec();
        word.extend_from_slice(g.degrees());
        let factor = &f.q_factor() * &g.q_factor();
        Ok(HallElement::from_combination(&self.word_combination(&word)?, 0, &factor))
    }

    /// `K_x^r * E` for a point of degree `d`, summed over the drop patterns.
    pub fn kx_times(&self, r: usize, e: &BundleType, d: usize) -> Result<HallElement> {
        check_kx(r, d)?;
        let n = e.rank();
        let mut out = HallElement::new();
        let qe = e.q_factor();
        for i in 0..=r.min(n) {
            for sigma in deltas::enumerate(n, i)? {
                let word = raise(e.degrees(), &sigma, d);
                let coef = QPoly::q_pow(sigma.weight_in(r) as usize * d);
                let part = self.word_combination(&word)?;
                let term = HallElement::from_combination(&part, r - i, &qe.mul_poly(&coef));
                for (t, c) in term.terms() {
                    out.add_term(t.clone(), c);
                }
            }
        }
        Ok(out)
    }

    /// `K_x^r * E` by pushing the skyscraper through the summands of `E` one
    /// at a time: `K^s * O(m) = O(m+d) * K^{s-1} + q^{sd} O(m) * K^s`.
    pub fn kx_times_recursive(&self, r: usize, e: &BundleType, d: usize) -> Result<HallElement> {
        check_kx(r, d)?;
        let mut states: BTreeMap<(Vec<i64>, usize), QPoly> = BTreeMap::new();
        states.insert((Vec::new(), r), QPoly::one());
        for &m in e.degrees() {
            let mut next: BTreeMap<(Vec<i64>, usize), QPoly> = BTreeMap::new();
            for ((prefix, s), c) in states {
                let mut push = |deg: i64, s_new: usize, coef: QPoly| {
                    let mut w = prefix.clone();
                    w.push(deg);
                    *next.entry((w, s_new)).or_insert_with(QPoly::zero) += &coef;
                };
                if s > 0 {
                    push(m + d as i64, s - 1, c.clone());
                }
                push(m, s, &c * &QPoly::q_pow(s * d));
            }
            states = next;
        }
        let qe = e.q_factor();
        let mut out = HallElement::new();
        for ((word, s), c) in states {
            let part = self.word_combination(&word)?;
            let term = HallElement::from_combination(&part, s, &qe.mul_poly(&c));
            for (t, v) in term.terms() {
                out.add_term(t.clone(), v);
            }
        }
        Ok(out)
    }

    /// Number of subsheaves of `E` isomorphic to `E'` with quotient `K_x^r`,
    /// read off as the coefficient of `E` in `K_x^r * E'`.
    pub fn hall_multiplicity(&self, e_prime: &BundleType, e: &BundleType, d: usize, r: usize) -> Result<QPoly> {
        let n = e.rank();
        if e_prime.rank() != n {
            return domain(format!("rank mismatch: {} vs {}", e_prime.rank(), n));
        }
        if d == 0 {
            return domain("point degree must be at least 1");
        }
        if e.degree() - e_prime.degree() != (r * d) as i64 || r > n {
            return Ok(QPoly::zero());
        }
        let mut acc = QPoly::zero();
        for sigma in deltas::enumerate(n, r)? {
            let word = raise(e_prime.degrees(), &sigma, d);
            let part = self.word_combination(&word)?;
            if let Some(c) = part.get(e.degrees()) {
                acc += &(c * &QPoly::q_pow(sigma.weight() as usize * d));
            }
        }
        let m = e_prime.q_factor().mul_poly(&acc);
        match m.as_poly() {
            Some(p) => Ok(p.clone()),
            None => Err(Error::Identity(format!(
                "multiplicity of {e_prime} in {e} at degree {d}, weight {r} reduced to {m}, not a polynomial"
            ))),
        }
    }

    /// The drop patterns `delta` for which `E` occurs in the straightened
    /// word `O(d'_i + d delta(i))`.
    pub fn realizing_deltas(&self, e_prime: &BundleType, e: &BundleType, d: usize, r: usize) -> Result<Vec<Realizer>> {
        let n = e.rank();
        if e_prime.rank() != n {
            return domain(format!("rank mismatch: {} vs {}", e_prime.rank(), n));
        }
        if r > n {
            return Ok(Vec::new());
        }
        let mut found = Vec::new();
        for delta in deltas::enumerate(n, r)? {
            let word = raise(e_prime.degrees(), &delta, d);
            let part = self.word_combination(&word)?;
            if let Some(c) = part.get(e.degrees()) {
                let nonpositive = [2i64, 3, 4, 5].iter().any(|&q0| !c.eval_i64(q0).is_positive());
                found.push(Realizer {
                    weight: delta.weight(),
                    delta,
                    coefficient: c.clone(),
                    maximal: false,
                    nonpositive,
                });
            }
        }
        if let Some(top) = found.iter().map(|x| x.weight).max() {
            for x in &mut found {
                x.maximal = x.weight == top;
            }
        }
        Ok(found)
    }
}

/// A drop pattern realizing a modification, with the coefficient of the
/// target bundle in its word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Realizer {
    pub delta: DeltaVec,
    pub weight: i64,
    pub coefficient: QPoly,
    pub maximal: bool,
    /// Set when the coefficient fails to be positive at some q in 2..=5.
    pub nonpositive: bool,
}

fn check_kx(r: usize, d: usize) -> Result<()> {
    if r == 0 {
        return domain("skyscraper weight must be at least 1");
    }
    if d == 0 {
        return domain("point degree must be at least 1");
    }
    Ok(())
}

fn raise(degrees: &[i64], delta: &DeltaVec, d: usize) -> Vec<i64> {
    degrees
        .iter()
        .enumerate()
        .map(|(i, &x)| x + d as i64 * delta.get(i) as i64)
        .collect()
}

/// Evaluate every coefficient of an element at an integer.
pub fn evaluate(h: &HallElement, q0: i64) -> Result<BTreeMap<HallTerm, num_rational::BigRational>> {
    let q0 = BigInt::from(q0);
    h.terms().iter().map(|(t, c)| Ok((t.clone(), c.eval(&q0)?))).collect()
}
