//! Brute force over finite fields: weight-`r` modifications of `E` at `x`
//! are the subsheaves `{s : s(x) in W}` for `W` of codimension `r` in the
//! fiber, and their splitting types are read off from section counts.

pub mod field;
pub mod snf;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::bundles::{BundleType, ClosedPoint};
use crate::deltas;
use crate::error::{domain, Error, Result};
use crate::fpoly::FpPoly;
use crate::qcalc::gaussian_binomial;

pub use field::{FieldElem, ResidueField};
pub use snf::{det, smith_normal_form, PolyMatrix, SmithForm};

/// Enumeration limits; exceeding one is an error.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub subspaces: u128,
    pub matrices: u128,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { subspaces: 1_000_000, matrices: 10_000_000 }
    }
}

impl Budget {
    /// Defaults, overridden by `HECKELAB_MAX_SUBSPACES` and
    /// `HECKELAB_MAX_MATRICES` when set.
    pub fn from_env() -> Self {
        let mut b = Budget::default();
        if let Some(v) = std::env::var("HECKELAB_MAX_SUBSPACES").ok().and_then(|s| s.parse().ok()) {
            b.subspaces = v;
        }
        if let Some(v) = std::env::var("HECKELAB_MAX_MATRICES").ok().and_then(|s| s.parse().ok()) {
            b.matrices = v;
        }
        b
    }

    fn check(limit: u128, needed: u128) -> Result<()> {
        if needed > limit {
            return Err(Error::Budget { needed, limit });
        }
        Ok(())
    }
}

/// A subspace of `kappa(x)^n` in reduced row echelon form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiberSubspace {
    pub n: usize,
    pub pivots: Vec<usize>,
    pub basis: Vec<Vec<FieldElem>>,
}

impl FiberSubspace {
    pub fn dim(&self) -> usize {
        self.pivots.len()
    }
}

/// Pivot sets of `dim`-dimensional subspaces of an `n`-dimensional space.
pub fn schubert_cells(n: usize, dim: usize) -> Vec<Vec<usize>> {
    deltas::enumerate(n, dim)
        .expect("dim <= n")
        .into_iter()
        .map(|v| (0..n).filter(|&i| v.get(i) == 1).collect())
        .collect()
}

/// Every subspace with the given pivot columns.
pub fn cell_subspaces(field: &ResidueField, n: usize, pivots: &[usize]) -> Vec<FiberSubspace> {
    let free: Vec<(usize, usize)> = pivots
        .iter()
        .enumerate()
        .flat_map(|(row, &pc)| (pc + 1..n).filter(|c| !pivots.contains(c)).map(move |c| (row, c)))
        .collect();
    let size = field.size();
    let total = size.pow(free.len() as u32);
    let mut out = Vec::with_capacity(total as usize);
    for mut idx in 0..total {
        let mut basis = vec![vec![FieldElem::ZERO; n]; pivots.len()];
        for (row, &pc) in pivots.iter().enumerate() {
            basis[row][pc] = FieldElem::ONE;
        }
        for &(row, c) in &free {
            basis[row][c] = FieldElem((idx % size) as u32);
            idx /= size;
        }
        out.push(FiberSubspace { n, pivots: pivots.to_vec(), basis });
    }
    out
}

fn subspace_count(n: usize, r: usize, size: u64) -> u128 {
    let g = gaussian_binomial(n - r, n).expect("r <= n");
    let v: BigInt = g.eval(&BigInt::from(size));
    u128::try_from(v).unwrap_or(u128::MAX)
}

/// All subspaces of codimension `r` in `kappa^n`, Schubert cell by cell.
pub fn enumerate_subspaces(n: usize, r: usize, field: &ResidueField, budget: &Budget) -> Result<Vec<FiberSubspace>> {
    if r > n {
        return domain(format!("codimension {r} exceeds dimension {n}"));
    }
    Budget::check(budget.subspaces, subspace_count(n, r, field.size()))?;
    Ok(schubert_cells(n, n - r)
        .iter()
        .flat_map(|piv| cell_subspaces(field, n, piv))
        .collect())
}

/// Rank over `F_p` of a matrix with entries in `0..p`.
fn rank_mod_p(mut rows: Vec<Vec<u64>>, p: u64) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(rank, piv);
        let inv = crate::fpoly::inv_mod(rows[rank][c], p);
        for x in rows[rank].iter_mut() {
            *x = *x * inv % p;
        }
        for i in 0..rows.len() {
            if i != rank && rows[i][c] != 0 {
                let f = rows[i][c];
                for j in 0..cols {
                    rows[i][j] = (rows[i][j] + p * p - f * rows[rank][j] % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Splitting type of `{s in E : s(x) in W}`.
pub fn splitting_type(e: &BundleType, w: &FiberSubspace, x: &ClosedPoint) -> Result<BundleType> {
    let field = ResidueField::of_point(x)?;
    splitting_type_in(e, w, &field)
}

pub fn splitting_type_in(e: &BundleType, w: &FiberSubspace, field: &ResidueField) -> Result<BundleType> {
    let n = e.rank();
    if w.n != n {
        return domain(format!("fiber subspace lives in dimension {}, bundle has rank {n}", w.n));
    }
    let d = field.degree();
    let p = field.p();
    let free: Vec<usize> = (0..n).filter(|c| !w.pivots.contains(c)).collect();
    let r = free.len();
    let (lo_d, hi_d) = (e.min_degree(), e.max_degree());
    let k_lo = -(hi_d + d as i64 + 1);
    let k_hi = hi_d.max(d as i64 - lo_d);

    // t^j mod f for every exponent that occurs
    let max_exp = (hi_d + k_hi).max(0) as usize;
    let mut powers = Vec::with_capacity(max_exp + 1);
    for j in 0..=max_exp {
        powers.push(field.reduce(&FpPoly::monomial(p, 1, j)));
    }

    // v lies in W iff v_c - sum_row v_{pivot(row)} basis[row][c] = 0 for free c
    let h0 = |k: i64| -> usize {
        let mut rows: Vec<Vec<u64>> = Vec::new();
        for (i, &di) in e.degrees().iter().enumerate() {
            let top = di + k;
            for j in 0..=top.max(-1) {
                let tj = powers[j as usize];
                let mut row = Vec::with_capacity(r * d);
                for &c in &free {
                    let val = if i == c {
                        tj
                    } else if let Some(rw) = w.pivots.iter().position(|&pc| pc == i) {
                        field.neg(field.mul(w.basis[rw][c], tj))
                    } else {
                        FieldElem::ZERO
                    };
                    row.extend(field.digits(val));
                }
                rows.push(row);
            }
        }
        let total = rows.len();
        if total == 0 || r == 0 {
            return total;
        }
        total - rank_mod_p(rows, p)
    };

    let mut prev = h0(k_lo);
    if prev != 0 {
        return Err(Error::Identity(format!("sections survive at twist {k_lo}")));
    }
    // ge[k] = #{i : d'_i >= -k}
    let mut ge: Vec<(i64, usize)> = Vec::new();
    for k in k_lo + 1..=k_hi {
        let h = h0(k);
        ge.push((k, h - prev));
        prev = h;
    }
    let mut degrees = Vec::with_capacity(n);
    let mut below = 0usize;
    for &(k, c) in &ge {
        if c < below {
            return Err(Error::Identity("section counts are not convex".into()));
        }
        degrees.extend(std::iter::repeat_n(-k, c - below));
        below = c;
    }
    if degrees.len() != n {
        return Err(Error::Identity(format!("recovered {} summands, expected {n}", degrees.len())));
    }
    BundleType::new(&degrees)
}

/// Census of splitting types over all codimension-`r` subspaces.
pub fn brute_multiplicity(e: &BundleType, x: &ClosedPoint, r: usize, budget: &Budget) -> Result<BTreeMap<BundleType, u64>> {
    let field = ResidueField::of_point(x)?;
    let n = e.rank();
    if r > n {
        return domain(format!("weight {r} exceeds rank {n}"));
    }
    Budget::check(budget.subspaces, subspace_count(n, r, field.size()))?;
    let partials: Vec<Result<BTreeMap<BundleType, u64>>> = schubert_cells(n, n - r)
        .par_iter()
        .map(|piv| {
            let mut counts = BTreeMap::new();
            for w in cell_subspaces(&field, n, piv) {
                *counts.entry(splitting_type_in(e, &w, &field)?).or_insert(0u64) += 1;
            }
            Ok(counts)
        })
        .collect();
    let mut out = BTreeMap::new();
    for part in partials {
        for (k, v) in part? {
            *out.entry(k).or_insert(0) += v;
        }
    }
    Ok(out)
}

/// Every polynomial of degree at most `max_deg` (empty range when negative),
/// indexed by its base-`p` coefficient code.
fn polys_up_to(p: u64, max_deg: i64, idx: u64) -> FpPoly {
    let len = (max_deg + 1).max(0) as usize;
    let mut v = Vec::with_capacity(len);
    let mut x = idx;
    for _ in 0..len {
        v.push(x % p);
        x /= p;
    }
    FpPoly::new(p, v)
}

/// Calls `f` on every matrix whose `(i, j)` entry ranges over polynomials of
/// degree at most `bounds[i][j]`.
fn for_each_matrix(p: u64, bounds: &[Vec<i64>], budget: &Budget, mut f: impl FnMut(&PolyMatrix)) -> Result<()> {
    let n = bounds.len();
    let sizes: Vec<u32> = bounds.iter().flatten().map(|&b| (b + 1).max(0) as u32).collect();
    let exp: u32 = sizes.iter().sum();
    let total = (p as u128).checked_pow(exp).unwrap_or(u128::MAX);
    Budget::check(budget.matrices, total)?;
    let radix: Vec<u64> = sizes.iter().map(|&s| p.pow(s)).collect();
    let mut m: PolyMatrix = vec![vec![FpPoly::zero(p); n]; n];
    for mut code in 0..total as u64 {
        for (slot, &rad) in radix.iter().enumerate() {
            let (i, j) = (slot / n, slot % n);
            m[i][j] = polys_up_to(p, bounds[i][j], code % rad);
            code /= rad;
        }
        f(&m);
    }
    Ok(())
}

/// Invertible endomorphisms of `E`: the constant blocks between summands of
/// equal degree must be invertible.
pub fn brute_aut_order(e: &BundleType, q: u64, budget: &Budget) -> Result<u64> {
    if !crate::fpoly::is_prime(q) {
        return domain(format!("oracle fields need prime q, got {q}"));
    }
    let g = e.degrees();
    let n = g.len();
    let bounds: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| g[i] - g[j]).collect()).collect();
    let mut count = 0u64;
    for_each_matrix(q, &bounds, budget, |m| {
        let ok = e.grouped().iter().all(|&(b, _)| {
            let idx: Vec<usize> = (0..n).filter(|&i| g[i] == b).collect();
            let block: Vec<Vec<u64>> = idx.iter().map(|&i| idx.iter().map(|&j| m[i][j].coeff(0)).collect()).collect();
            rank_mod_p(block, q) == idx.len()
        });
        count += ok as u64;
    })?;
    Ok(count)
}

/// Maps `phi: E' -> E` whose determinant is a unit times the point's
/// polynomial.
pub fn count_monomorphisms(e_prime: &BundleType, e: &BundleType, x: &ClosedPoint, budget: &Budget) -> Result<u64> {
    let Some(f) = x.fp_poly() else {
        return domain("the point has no explicit polynomial");
    };
    let n = e.rank();
    if e_prime.rank() != n {
        return domain(format!("rank mismatch: {} vs {n}", e_prime.rank()));
    }
    if e.degree() - e_prime.degree() != x.degree() as i64 {
        return domain("monomorphism counts need a drop of exactly one point degree");
    }
    let (a, dd) = (e_prime.degrees(), e.degrees());
    let bounds: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| dd[i] - a[j]).collect()).collect();
    let mut count = 0u64;
    for_each_matrix(x.q(), &bounds, budget, |m| {
        let dt = det(m);
        if !dt.is_zero() && dt.monic() == f {
            count += 1;
        }
    })?;
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hecke::Hecke;
    use crate::qcalc::gaussian_binomial;

    fn b(d: &[i64]) -> BundleType {
        BundleType::new(d).unwrap()
    }

    fn f4() -> ClosedPoint {
        ClosedPoint::new(2, 2, Some(vec![1, 1, 1])).unwrap()
    }

    #[test]
    fn subspace_count_examples() {
        let budget = Budget::default();
        let f4 = ResidueField::of_point(&f4()).unwrap();
        assert_eq!(enumerate_subspaces(2, 1, &f4, &budget).unwrap().len(), 5);
        let f2 = ResidueField::new(FpPoly::new(2, vec![0, 1])).unwrap();
        let zero = enumerate_subspaces(3, 3, &f2, &budget).unwrap();
        assert_eq!(zero.len(), 1);
        assert_eq!(zero[0].dim(), 0);
        assert_eq!(enumerate_subspaces(3, 1, &f2, &budget).unwrap().len(), 7);
    }

    #[test]
    fn subspace_counts_match_gaussian_binomials() {
        let budget = Budget::default();
        for (p, m) in [(2u64, vec![0u64, 1]), (3, vec![0, 1]), (2, vec![1, 1, 1]), (5, vec![0, 1])] {
            let field = ResidueField::new(FpPoly::new(p, m)).unwrap();
            for n in 0..=4usize {
                for k in 0..=n {
                    let all = enumerate_subspaces(n, n - k, &field, &budget).unwrap();
                    let expect = gaussian_binomial(k, n).unwrap().eval(&BigInt::from(field.size()));
                    assert_eq!(BigInt::from(all.len()), expect);
                    let distinct: std::collections::HashSet<_> = all.iter().collect();
                    assert_eq!(distinct.len(), all.len());
                }
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let tiny = Budget { subspaces: 3, matrices: 3 };
        let f4 = ResidueField::of_point(&f4()).unwrap();
        assert!(matches!(enumerate_subspaces(2, 1, &f4, &tiny), Err(Error::Budget { .. })));
        assert!(matches!(brute_aut_order(&b(&[0, 0]), 2, &tiny), Err(Error::Budget { .. })));
    }

    #[test]
    fn splitting_type_examples() {
        let x = f4();
        let field = ResidueField::of_point(&x).unwrap();
        let t = FieldElem(2);
        let w = FiberSubspace { n: 2, pivots: vec![0], basis: vec![vec![FieldElem::ONE, t]] };
        let s = splitting_type(&b(&[0, 0]), &w, &x).unwrap();
        assert_eq!(s.degree(), -2);
        assert!(s == b(&[-1, -1]) || s == b(&[-2, 0]));
        let full = enumerate_subspaces(3, 0, &field, &Budget::default()).unwrap();
        assert_eq!(splitting_type(&b(&[0, 2, 5]), &full[0], &x).unwrap(), b(&[0, 2, 5]));
        let line = ClosedPoint::new(3, 1, Some(vec![1, 1])).unwrap();
        let zero = FiberSubspace { n: 1, pivots: vec![], basis: vec![] };
        assert_eq!(splitting_type(&b(&[3]), &zero, &line).unwrap(), b(&[2]));
        let no_poly = ClosedPoint::abstract_point(2, 2).unwrap();
        assert!(splitting_type(&b(&[0, 0]), &w, &no_poly).is_err());
    }

    #[test]
    fn census_examples() {
        let budget = Budget::default();
        let c = brute_multiplicity(&b(&[0, 0]), &f4(), 1, &budget).unwrap();
        assert_eq!(c, BTreeMap::from([(b(&[-2, 0]), 3), (b(&[-1, -1]), 2)]));
        let line = ClosedPoint::new(2, 1, Some(vec![0, 1])).unwrap();
        let c = brute_multiplicity(&b(&[0, 0]), &line, 1, &budget).unwrap();
        assert_eq!(c, BTreeMap::from([(b(&[-1, 0]), 3)]));
        let c = brute_multiplicity(&b(&[0, 1, 3]), &f4(), 3, &budget).unwrap();
        assert_eq!(c, BTreeMap::from([(b(&[-2, -1, 1]), 1)]));
    }

    #[test]
    fn splitting_types_respect_drop_bounds() {
        let budget = Budget::default();
        let x = ClosedPoint::new(3, 2, Some(vec![1, 0, 1])).unwrap();
        for degrees in [[0i64, 0, 0], [0, 1, 2], [0, 0, 3]] {
            let e = b(&degrees);
            for r in 0..=3 {
                for (s, _) in brute_multiplicity(&e, &x, r, &budget).unwrap() {
                    assert_eq!(s.degree(), e.degree() - 2 * r as i64);
                    for (a, bb) in e.degrees().iter().zip(s.degrees()) {
                        assert!((0..=2).contains(&(a - bb)));
                    }
                }
            }
        }
    }

    #[test]
    fn aut_order_examples() {
        let budget = Budget::default();
        assert_eq!(brute_aut_order(&b(&[0, 0]), 2, &budget).unwrap(), 6);
        assert_eq!(brute_aut_order(&b(&[0, 1]), 2, &budget).unwrap(), 4);
        assert_eq!(brute_aut_order(&b(&[5]), 3, &budget).unwrap(), 2);
    }

    #[test]
    fn aut_orders_match_closed_form() {
        let budget = Budget::default();
        for q in [2u64, 3] {
            for n in 1..=3 {
                for degrees in crate::testutil::grid(n, 0, 2) {
                    let e = b(&degrees);
                    let brute = brute_aut_order(&e, q, &budget).unwrap();
                    assert_eq!(BigInt::from(brute), e.aut_order(&BigInt::from(q)), "{e} q={q}");
                }
            }
        }
    }

    #[test]
    fn block_criterion_agrees_with_determinant() {
        let budget = Budget::default();
        for degrees in [[0i64, 0, 1], [0, 1, 1], [0, 1, 2]] {
            let e = b(&degrees);
            let g = e.degrees();
            let bounds: Vec<Vec<i64>> = (0..3).map(|i| (0..3).map(|j| g[i] - g[j]).collect()).collect();
            let mut by_det = 0u64;
            for_each_matrix(2, &bounds, &budget, |m| {
                let dt = det(m);
                by_det += (!dt.is_zero() && dt.is_constant()) as u64;
            })
            .unwrap();
            assert_eq!(by_det, brute_aut_order(&e, 2, &budget).unwrap());
        }
    }

    #[test]
    fn monomorphism_count_examples() {
        let budget = Budget::default();
        let x = f4();
        assert_eq!(count_monomorphisms(&b(&[-1, -1]), &b(&[0, 0]), &x, &budget).unwrap(), 12);
        let aut = b(&[-2, 0]).aut_order(&BigInt::from(2));
        assert_eq!(BigInt::from(count_monomorphisms(&b(&[-2, 0]), &b(&[0, 0]), &x, &budget).unwrap()), aut * 3);
        assert_eq!(count_monomorphisms(&b(&[-2]), &b(&[0]), &x, &budget).unwrap(), 1);
    }

    #[test]
    fn monomorphism_counts_factor_through_multiplicities() {
        let budget = Budget::default();
        let hecke = Hecke::new();
        for (q, poly) in [(2u64, vec![1u64, 1]), (3, vec![1, 1]), (2, vec![1, 1, 1])] {
            let x = ClosedPoint::new(q, poly.len() - 1, Some(poly)).unwrap();
            let d = x.degree();
            for degrees in crate::testutil::grid(2, 0, 2) {
                let e = b(&degrees);
                for cand in crate::hecke::drop_candidates(&e, d, 1) {
                    let m = hecke.multiplicity(&hecke.query(&cand, &e, d, 1).unwrap()).unwrap();
                    let count = count_monomorphisms(&cand, &e, &x, &budget).unwrap();
                    let expect = m.poly.eval_i64(q as i64) * BigInt::from(brute_aut_order(&cand, q, &budget).unwrap());
                    assert_eq!(BigInt::from(count), expect, "{cand} -> {e} q={q} d={d}");
                }
            }
        }
    }

    #[test]
    fn determinant_of_worked_morphism() {
        let m = vec![
            vec![FpPoly::new(2, vec![0, 1]), FpPoly::new(2, vec![1, 1])],
            vec![FpPoly::new(2, vec![1]), FpPoly::new(2, vec![0, 1])],
        ];
        assert_eq!(det(&m), FpPoly::new(2, vec![1, 1, 1]));
    }
}
