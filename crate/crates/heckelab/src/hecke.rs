//! Existence and multiplicity of Hecke modifications `E' -> E` at a closed
//! point of degree `d` with weight `r`, from closed formulas where they apply
//! and from the Hall engine otherwise.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bundles::BundleType;
use crate::deltas::DeltaVec;
use crate::error::{domain, Error, Result};
use crate::hall::HallEngine;
use crate::qcalc::{gaussian_binomial, QPoly};

/// A candidate modification `E' -> E` together with the indexwise drops
/// `eps_i = d_i - d'_i` of the sorted splitting types.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModificationQuery {
    pub e: BundleType,
    pub e_prime: BundleType,
    pub d: usize,
    pub r: usize,
    eps: Vec<i64>,
}

impl ModificationQuery {
    pub fn new(e_prime: &BundleType, e: &BundleType, d: usize, r: usize) -> Result<Self> {
        if e.rank() != e_prime.rank() {
            return domain(format!("rank mismatch: {} vs {}", e_prime.rank(), e.rank()));
        }
        if d == 0 {
            return domain("point degree must be at least 1");
        }
        let eps = e.degrees().iter().zip(e_prime.degrees()).map(|(a, b)| a - b).collect();
        Ok(ModificationQuery { e: e.clone(), e_prime: e_prime.clone(), d, r, eps })
    }

    pub fn rank(&self) -> usize {
        self.e.rank()
    }

    pub fn drops(&self) -> &[i64] {
        &self.eps
    }

    /// `A = {i | eps_i != 0}`, 1-based.
    pub fn support(&self) -> Vec<usize> {
        (0..self.eps.len()).filter(|&i| self.eps[i] != 0).map(|i| i + 1).collect()
    }

    pub fn s(&self) -> Option<usize> {
        self.support().first().copied()
    }

    pub fn b(&self) -> Option<usize> {
        self.support().last().copied()
    }

    fn degree_conserved(&self) -> bool {
        self.r <= self.rank() && self.e.degree() - self.e_prime.degree() == (self.r * self.d) as i64
    }

    fn drops_bounded(&self) -> bool {
        self.eps.iter().all(|&x| 0 <= x && x <= self.d as i64)
    }

    /// Splits the first `n1` summands from the rest; `None` when the weight
    /// does not divide between the halves.
    fn split(&self, n1: usize) -> Option<(ModificationQuery, ModificationQuery)> {
        let n = self.rank();
        let (e1, e2) = (self.e.slice(0..n1), self.e.slice(n1..n));
        let (p1, p2) = (self.e_prime.slice(0..n1), self.e_prime.slice(n1..n));
        let lost = e1.degree() - p1.degree();
        let d = self.d as i64;
        if lost < 0 || lost % d != 0 {
            return None;
        }
        let r1 = (lost / d) as usize;
        if r1 > n1 || r1 > self.r || self.r - r1 > n - n1 {
            return None;
        }
        let q1 = ModificationQuery::new(&p1, &e1, self.d, r1).ok()?;
        let q2 = ModificationQuery::new(&p2, &e2, self.d, self.r - r1).ok()?;
        Some((q1, q2))
    }

    /// First index `j` (count of summands before the gap) with
    /// `d_{j+1} - d_j` exceeding `d` (strict) or at least `d`.
    fn gap_at(&self, strict: bool, range: std::ops::RangeInclusive<usize>) -> Option<usize> {
        let g = self.e.degrees();
        let d = self.d as i64;
        range.into_iter().find(|&j| {
            j >= 1 && j < g.len() && {
                let gap = g[j] - g[j - 1];
                if strict { gap > d } else { gap >= d }
            }
        })
    }
}

impl fmt::Display for ModificationQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} -> {} at degree {}, weight {}]", self.e_prime, self.e, self.d, self.r)
    }
}

/// Which rule produced a multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Impossible,
    Trivial,
    RankTwoTable,
    DegreeOne,
    SpacedDegrees,
    Grassmannian,
    SpacedFactorization,
    HallEngine,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json_name(*self);
        write!(f, "{s}")
    }
}

fn serde_json_name(m: Method) -> &'static str {
    match m {
        Method::Impossible => "impossible",
        Method::Trivial => "trivial",
        Method::RankTwoTable => "rank_two_table",
        Method::DegreeOne => "degree_one",
        Method::SpacedDegrees => "spaced_degrees",
        Method::Grassmannian => "grassmannian",
        Method::SpacedFactorization => "spaced_factorization",
        Method::HallEngine => "hall_engine",
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multiplicity {
    pub poly: QPoly,
    pub method: Method,
}

/// Rank two, weight one.
pub fn rank_two_table(q: &ModificationQuery) -> Option<QPoly> {
    if q.rank() != 2 || q.r != 1 {
        return None;
    }
    if !q.degree_conserved() {
        return Some(QPoly::zero());
    }
    let (d1, d2) = (q.e.degrees()[0], q.e.degrees()[1]);
    let d = q.d as i64;
    let du = q.d;
    let diff = |hi: usize, lo: usize| &QPoly::q_pow(hi) - &QPoly::q_pow(lo);
    let mut table: Vec<([i64; 2], QPoly)> = Vec::new();
    if d1 == d2 {
        let c = d1;
        table.push(([c - d, c], QPoly::from_i64s(&[1, 1])));
        if du.is_multiple_of(2) {
            table.push(([c - d / 2, c - d / 2], diff(du, du - 1)));
        }
        for i in 1..=(du - 1) / 2 {
            let i64_ = i as i64;
            table.push(([c - d + i64_, c - i64_], diff(2 * i + 1, 2 * i - 1)));
        }
    } else if d2 - d1 >= d {
        table.push(([d1, d2 - d], QPoly::q_pow(du)));
        table.push(([d1 - d, d2], QPoly::one()));
    } else {
        let g = (d2 - d1) as usize;
        table.push(([d1, d2 - d], QPoly::q_pow(g + 1)));
        table.push(([d1 - d, d2], QPoly::one()));
        if (d2 + d - d1) % 2 == 0 {
            let c = (d1 + d2 - d) / 2;
            table.push(([c, c], diff(du, du - 1)));
        }
        let ell = (d - (d2 - d1) - 1) / 2;
        for i in 1..=ell {
            let iu = i as usize;
            table.push(([d1 - i, d2 - d + i], diff(g + 2 * iu + 1, g + 2 * iu - 1)));
        }
    }
    let target = q.e_prime.degrees();
    let mut acc = QPoly::zero();
    for (mut pair, m) in table {
        pair.sort_unstable();
        if pair[..] == *target {
            acc += &m;
        }
    }
    Some(acc)
}

/// Points of degree one: `q^alpha prod Gr(theta_j, l_j)`.
pub fn degree_one_formula(q: &ModificationQuery) -> Option<QPoly> {
    if q.d != 1 {
        return None;
    }
    if !q.degree_conserved() {
        return Some(QPoly::zero());
    }
    let blocks = q.e.grouped();
    let r = q.r;
    let mut found = QPoly::zero();
    for_each_bounded(&blocks.iter().map(|&(_, l)| l).collect::<Vec<_>>(), r, &mut |theta| {
        let mut degrees = Vec::with_capacity(q.rank());
        for (&(b, l), &t) in blocks.iter().zip(theta) {
            degrees.extend(std::iter::repeat_n(b - 1, t));
            degrees.extend(std::iter::repeat_n(b, l - t));
        }
        degrees.sort_unstable();
        if degrees[..] != *q.e_prime.degrees() {
            return;
        }
        let mut alpha = 0usize;
        let mut seen = 0usize;
        let mut prod = QPoly::one();
        for (&(_, l), &t) in blocks.iter().zip(theta) {
            seen += t;
            alpha += (l - t) * (r - seen);
            prod = &prod * &gaussian_binomial(t, l).expect("t <= l");
        }
        found = prod.shift(alpha);
    });
    Some(found)
}

/// Calls `f` on every vector `0 <= v_j <= caps_j` with sum `total`.
fn for_each_bounded(caps: &[usize], total: usize, f: &mut dyn FnMut(&[usize])) {
    fn go(caps: &[usize], left: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == caps.len() {
            if left == 0 {
                f(cur);
            }
            return;
        }
        let rest: usize = caps[cur.len() + 1..].iter().sum();
        for t in 0..=caps[cur.len()].min(left) {
            if left - t > rest {
                continue;
            }
            cur.push(t);
            go(caps, left - t, cur, f);
            cur.pop();
        }
    }
    go(caps, total, &mut Vec::new(), f);
}

/// Distinct degrees with every gap at least `d`: `q^{|delta| d}`.
pub fn spaced_degrees_formula(q: &ModificationQuery) -> Option<QPoly> {
    let g = q.e.degrees();
    let d = q.d as i64;
    if !g.windows(2).all(|w| w[1] - w[0] >= d && w[1] > w[0]) {
        return None;
    }
    if !q.degree_conserved() {
        return Some(QPoly::zero());
    }
    if !q.drops().iter().all(|&x| x == 0 || x == d) {
        return None;
    }
    let bits: Vec<u8> = q.drops().iter().map(|&x| (x == d) as u8).collect();
    let delta = DeltaVec::new(bits).expect("binary");
    Some(QPoly::q_pow(delta.weight() as usize * q.d))
}

/// `E = O(c)^n` and `E' = O(c-d)^r + O(c)^{n-r}`.
pub fn grassmannian_formula(q: &ModificationQuery) -> Option<QPoly> {
    let g = q.e.degrees();
    let c = g[0];
    if g.iter().any(|&x| x != c) {
        return None;
    }
    let mut expect = vec![c - q.d as i64; q.r.min(q.rank())];
    expect.extend(std::iter::repeat_n(c, q.rank() - expect.len()));
    if q.r <= q.rank() && expect[..] == *q.e_prime.degrees() {
        Some(gaussian_binomial(q.r, q.rank()).expect("r <= n"))
    } else {
        None
    }
}

/// Weight-one chain condition `d_{j+1} - eps_{j+1} <= d_j` for `j` between
/// the first and last nonzero drop.
pub fn chain_criterion(q: &ModificationQuery) -> Option<bool> {
    if q.r != 1 {
        return None;
    }
    if !q.degree_conserved() || !q.drops_bounded() {
        return Some(false);
    }
    let (Some(s), Some(b)) = (q.s(), q.b()) else {
        return Some(false);
    };
    let g = q.e.degrees();
    let eps = q.drops();
    Some((s..b).all(|j| g[j] - eps[j] <= g[j - 1]))
}

/// Classifier and multiplicity calculator sharing one Hall engine.
pub struct Hecke {
    engine: Arc<HallEngine>,
    guard_limit: usize,
}

impl Default for Hecke {
    fn default() -> Self {
        Self::new()
    }
}

impl Hecke {
    pub fn new() -> Self {
        Self::with_engine(Arc::new(HallEngine::new()))
    }

    pub fn with_engine(engine: Arc<HallEngine>) -> Self {
        Hecke { engine, guard_limit: 8 }
    }

    /// Cross-check every closed-form answer against the Hall engine when
    /// `n * d <= limit`; zero disables the check.
    pub fn with_guard_limit(mut self, limit: usize) -> Self {
        self.guard_limit = limit;
        self
    }

    pub fn engine(&self) -> &HallEngine {
        &self.engine
    }

    pub fn engine_arc(&self) -> Arc<HallEngine> {
        self.engine.clone()
    }

    pub fn query(&self, e_prime: &BundleType, e: &BundleType, d: usize, r: usize) -> Result<ModificationQuery> {
        ModificationQuery::new(e_prime, e, d, r)
    }

    pub fn exists_modification(&self, q: &ModificationQuery) -> Result<bool> {
        if !q.degree_conserved() || !q.drops_bounded() {
            return Ok(false);
        }
        if q.r == 0 || q.r == q.rank() {
            return Ok(true);
        }
        if let Some(j) = q.gap_at(true, 1..=q.rank() - 1) {
            return match q.split(j) {
                None => Ok(false),
                Some((a, b)) => Ok(self.exists_modification(&a)? && self.exists_modification(&b)?),
            };
        }
        if q.d == 1 {
            return Ok(true);
        }
        if let Some(v) = chain_criterion(q) {
            return Ok(v);
        }
        Ok(!self.engine.hall_multiplicity(&q.e_prime, &q.e, q.d, q.r)?.is_zero())
    }

    pub fn multiplicity(&self, q: &ModificationQuery) -> Result<Multiplicity> {
        let m = self.dispatch(q)?;
        if self.guard_limit > 0 && q.rank() * q.d <= self.guard_limit && m.method != Method::HallEngine {
            let h = self.engine.hall_multiplicity(&q.e_prime, &q.e, q.d, q.r)?;
            if h != m.poly {
                return Err(Error::Identity(format!(
                    "{q}: {} gives {}, Hall engine gives {h}",
                    m.method, m.poly
                )));
            }
        }
        Ok(m)
    }

    fn dispatch(&self, q: &ModificationQuery) -> Result<Multiplicity> {
        let found = |poly, method| Ok(Multiplicity { poly, method });
        if !self.exists_modification(q)? {
            return found(QPoly::zero(), Method::Impossible);
        }
        if q.r == 0 || q.r == q.rank() {
            return found(QPoly::one(), Method::Trivial);
        }
        if let Some(p) = rank_two_table(q) {
            return found(p, Method::RankTwoTable);
        }
        if let Some(p) = degree_one_formula(q) {
            return found(p, Method::DegreeOne);
        }
        if let Some(p) = spaced_degrees_formula(q) {
            return found(p, Method::SpacedDegrees);
        }
        if let Some(p) = grassmannian_formula(q) {
            return found(p, Method::Grassmannian);
        }
        if let Some(p) = self.spaced_factorization(q)? {
            return found(p, Method::SpacedFactorization);
        }
        found(self.engine.hall_multiplicity(&q.e_prime, &q.e, q.d, q.r)?, Method::HallEngine)
    }

    /// `m_1 m_2 q^{r_2 (n_1 - r_1) d}` across the first gap of size at least
    /// `d` after `n_1` summands, `2 <= n_1 <= n - 1`.
    pub fn spaced_factorization(&self, q: &ModificationQuery) -> Result<Option<QPoly>> {
        let n = q.rank();
        if n < 3 {
            return Ok(None);
        }
        let Some(n1) = q.gap_at(false, 2..=n - 1) else {
            return Ok(None);
        };
        let Some((a, b)) = q.split(n1) else {
            return Ok(Some(QPoly::zero()));
        };
        let m1 = self.multiplicity(&a)?.poly;
        let m2 = self.multiplicity(&b)?.poly;
        let exp = b.r * (n1 - a.r) * q.d;
        Ok(Some((&m1 * &m2).shift(exp)))
    }

    /// All `E'` with a modification `E' -> E`, keyed by splitting type.
    pub fn neighbors(&self, e: &BundleType, d: usize, r: usize) -> Result<BTreeMap<BundleType, Multiplicity>> {
        let n = e.rank();
        if r > n {
            return domain(format!("weight {r} exceeds rank {n}"));
        }
        let mut out = BTreeMap::new();
        for cand in drop_candidates(e, d, r) {
            let q = ModificationQuery::new(&cand, e, d, r)?;
            if !self.exists_modification(&q)? {
                continue;
            }
            let m = self.multiplicity(&q)?;
            if m.poly.is_zero() {
                return Err(Error::Identity(format!("{q} exists but has multiplicity zero")));
            }
            out.insert(cand, m);
        }
        Ok(out)
    }

    /// Existence of `E -> E'(x)` with the complementary weight.
    pub fn dual_existence_check(&self, q: &ModificationQuery) -> Result<bool> {
        let dual = ModificationQuery::new(&q.e, &q.e_prime.twist(q.d as i64), q.d, q.rank() - q.r.min(q.rank()))?;
        self.exists_modification(&dual)
    }
}

/// Sorted `E - eps` for all `eps` in `{0..d}^n` summing to `r d`.
pub fn drop_candidates(e: &BundleType, d: usize, r: usize) -> Vec<BundleType> {
    let n = e.rank();
    let caps = vec![d; n];
    let mut out = std::collections::BTreeSet::new();
    for_each_bounded(&caps, r * d, &mut |eps| {
        let w: Vec<i64> = e.degrees().iter().zip(eps).map(|(a, &x)| a - x as i64).collect();
        out.insert(BundleType::new(&w).expect("nonempty"));
    });
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(d: &[i64]) -> BundleType {
        BundleType::new(d).unwrap()
    }

    fn q(from: &[i64], to: &[i64], d: usize, r: usize) -> ModificationQuery {
        ModificationQuery::new(&b(from), &b(to), d, r).unwrap()
    }

    fn p(cs: &[i64]) -> QPoly {
        QPoly::from_i64s(cs)
    }

    #[test]
    fn existence_examples() {
        let h = Hecke::new();
        assert!(h.exists_modification(&q(&[-2, 0], &[0, 0], 2, 1)).unwrap());
        assert!(!h.exists_modification(&q(&[-1, 4], &[0, 5], 3, 1)).unwrap());
        assert!(h.exists_modification(&q(&[3, 1, 4], &[1, 3, 4], 2, 0)).unwrap());
        assert!(ModificationQuery::new(&b(&[0]), &b(&[0, 0]), 1, 1).is_err());
    }

    #[test]
    fn gap_larger_than_point_splits_the_problem() {
        let h = Hecke::new();
        // gap 5 > 3: the top summand cannot lose degree 1 while the bottom loses 2
        assert!(!h.exists_modification(&q(&[-2, 4], &[0, 5], 3, 1)).unwrap());
        assert!(h.exists_modification(&q(&[-3, 5], &[0, 5], 3, 1)).unwrap());
        assert!(h.exists_modification(&q(&[0, 2], &[0, 5], 3, 1)).unwrap());
    }

    #[test]
    fn multiplicity_examples() {
        let h = Hecke::new();
        for (d1, d2, d) in [(0, 3, 2), (1, 5, 3), (-2, 0, 1)] {
            let m = h.multiplicity(&q(&[d1, d2 - d], &[d1, d2], d as usize, 1)).unwrap();
            assert_eq!(m.poly, QPoly::q_pow(d as usize));
        }
        let m = h.multiplicity(&q(&[0, 0], &[0, 1], 1, 1)).unwrap();
        assert_eq!(m.poly, p(&[0, 1]));
        for n in 1..=4usize {
            for r in 0..=n {
                for d in 1..=2usize {
                    let mut from = vec![-(d as i64); r];
                    from.extend(vec![0; n - r]);
                    let m = h.multiplicity(&q(&from, &vec![0; n], d, r)).unwrap();
                    assert_eq!(m.poly, gaussian_binomial(r, n).unwrap(), "n={n} r={r} d={d}");
                }
            }
        }
    }

    #[test]
    fn impossible_is_zero_not_error() {
        let h = Hecke::new();
        let m = h.multiplicity(&q(&[0, 0], &[0, 0], 2, 1)).unwrap();
        assert!(m.poly.is_zero());
        assert_eq!(m.method, Method::Impossible);
    }

    #[test]
    fn neighbor_examples() {
        let h = Hecke::new();
        let nb = h.neighbors(&b(&[0, 0]), 2, 1).unwrap();
        let at2: Vec<(Vec<i64>, i64)> = nb
            .iter()
            .map(|(k, m)| (k.degrees().to_vec(), m.poly.eval_i64(2).try_into().unwrap()))
            .collect();
        assert_eq!(at2, vec![(vec![-2, 0], 3), (vec![-1, -1], 2)]);
        let nb = h.neighbors(&b(&[0, 0]), 1, 2).unwrap();
        assert_eq!(nb.len(), 1);
        assert!(nb[&b(&[-1, -1])].poly.is_one());
        let nb = h.neighbors(&b(&[5]), 3, 1).unwrap();
        assert_eq!(nb.len(), 1);
        assert!(nb[&b(&[2])].poly.is_one());
    }

    #[test]
    fn duality_examples() {
        let h = Hecke::new();
        assert!(h.dual_existence_check(&q(&[-2, 0], &[0, 0], 2, 1)).unwrap());
        assert!(h.dual_existence_check(&q(&[-1, -1, 1], &[0, 0, 2], 1, 3)).unwrap());
        for (from, m) in h.neighbors(&b(&[0, 1, 1]), 2, 2).unwrap() {
            assert!(!m.poly.is_zero());
            assert!(h.dual_existence_check(&q(from.degrees(), &[0, 1, 1], 2, 2)).unwrap());
        }
    }

    #[test]
    fn query_metadata() {
        let x = q(&[-1, 0, 3, 3], &[0, 1, 3, 4], 3, 1);
        assert_eq!(x.drops(), &[1, 1, 0, 1]);
        assert_eq!(x.support(), vec![1, 2, 4]);
        assert_eq!((x.s(), x.b()), (Some(1), Some(4)));
    }

    #[test]
    fn rank_two_table_matches_engine_beyond_small_points() {
        let h = Hecke::new().with_guard_limit(0);
        for d in 1..=6usize {
            for d1 in 0..=3i64 {
                for d2 in d1..=d1 + 7 {
                    let e = b(&[d1, d2]);
                    for cand in drop_candidates(&e, d, 1) {
                        let x = ModificationQuery::new(&cand, &e, d, 1).unwrap();
                        let table = rank_two_table(&x).unwrap();
                        let hall = h.engine().hall_multiplicity(&cand, &e, d, 1).unwrap();
                        assert_eq!(table, hall, "{x}");
                    }
                }
            }
        }
    }

    #[test]
    fn branches_agree_where_they_overlap() {
        let h = Hecke::new().with_guard_limit(0);
        let mut overlaps = 0;
        for n in 1..=4usize {
            for degrees in crate::testutil::grid(n, 0, 3) {
                let e = b(&degrees);
                for d in 1..=3usize {
                    for r in 0..=n {
                        for cand in drop_candidates(&e, d, r) {
                            let x = ModificationQuery::new(&cand, &e, d, r).unwrap();
                            let mut vals = vec![];
                            vals.extend(rank_two_table(&x));
                            vals.extend(degree_one_formula(&x));
                            vals.extend(spaced_degrees_formula(&x));
                            vals.extend(grassmannian_formula(&x));
                            vals.extend(h.spaced_factorization(&x).unwrap());
                            if vals.len() > 1 {
                                overlaps += 1;
                            }
                            let hall = h.engine().hall_multiplicity(&cand, &e, d, r).unwrap();
                            for v in vals {
                                assert_eq!(v, hall, "{x}");
                            }
                        }
                    }
                }
            }
        }
        assert!(overlaps > 0);
    }
}
