//! Unramified forms for `PGL_n` on a finite window of projective bundle
//! classes.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::bundles::{BundleType, ClosedPoint, ProjBundleClass};
use crate::error::{domain, Error, Result};
use crate::hall::{HallEngine, HallTerm};
use crate::hecke::Hecke;
use crate::qcalc::QPoly;

/// Classes `0 = d_1 <= ... <= d_n <= depth`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedPBun {
    n: usize,
    depth: i64,
    classes: Vec<ProjBundleClass>,
    index: HashMap<ProjBundleClass, usize>,
}

impl TruncatedPBun {
    pub fn new(n: usize, depth: i64) -> Result<Self> {
        if n == 0 || depth < 0 {
            return domain(format!("no truncation with n={n}, depth={depth}"));
        }
        let mut classes = Vec::new();
        let mut cur = vec![0i64];
        fill(&mut cur, n, depth, &mut classes);
        let index = classes.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
        Ok(TruncatedPBun { n, depth, classes, index })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> i64 {
        self.depth
    }

    pub fn classes(&self) -> &[ProjBundleClass] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn index_of(&self, c: &ProjBundleClass) -> Option<usize> {
        self.index.get(c).copied()
    }

    /// Index of the class of `E`, if it lies in the window.
    pub fn locate(&self, e: &BundleType) -> Option<usize> {
        self.index_of(&e.proj_class())
    }

    /// The class of the trivial bundle.
    pub fn base(&self) -> usize {
        0
    }
}

fn fill(cur: &mut Vec<i64>, n: usize, depth: i64, out: &mut Vec<ProjBundleClass>) {
    if cur.len() == n {
        out.push(BundleType::new(cur).expect("nonempty").proj_class());
        return;
    }
    let lo = *cur.last().expect("starts at 0");
    for v in lo..=depth {
        cur.push(v);
        fill(cur, n, depth, out);
        cur.pop();
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormVector {
    space: TruncatedPBun,
    values: Vec<BigRational>,
}

impl FormVector {
    pub fn new(space: TruncatedPBun, values: Vec<BigRational>) -> Result<Self> {
        if values.len() != space.len() {
            return domain(format!("{} values for {} classes", values.len(), space.len()));
        }
        Ok(FormVector { space, values })
    }

    pub fn zero(space: TruncatedPBun) -> Self {
        let values = vec![BigRational::zero(); space.len()];
        FormVector { space, values }
    }

    pub fn space(&self) -> &TruncatedPBun {
        &self.space
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    pub fn get(&self, c: &ProjBundleClass) -> Option<&BigRational> {
        self.space.index_of(c).map(|i| &self.values[i])
    }

    /// `f` at the class of a bundle.
    pub fn at(&self, e: &BundleType) -> Result<&BigRational> {
        self.get(&e.proj_class())
            .ok_or_else(|| Error::Domain(format!("{e} lies outside the window")))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Zero::is_zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&ProjBundleClass, &BigRational)> {
        self.space.classes.iter().zip(&self.values)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeckeRow {
    pub class: usize,
    pub entries: BTreeMap<usize, QPoly>,
    pub complete: bool,
}

/// Rows of `Phi_{x,r}` for a degree-one point, one per class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeckeMatrix {
    pub r: usize,
    pub rows: Vec<HeckeRow>,
}

pub fn hecke_matrix(space: &TruncatedPBun, r: usize, hecke: &Hecke) -> Result<HeckeMatrix> {
    let n = space.n();
    if r == 0 || r >= n {
        return domain(format!("weight {r} outside 1..{n}"));
    }
    let rows = space
        .classes()
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let mut entries = BTreeMap::new();
            let mut complete = true;
            for (e_prime, m) in hecke.neighbors(c.bundle(), 1, r)? {
                match space.locate(&e_prime) {
                    Some(j) => {
                        let slot = entries.entry(j).or_insert_with(QPoly::zero);
                        *slot += &m.poly;
                    }
                    None => complete = false,
                }
            }
            Ok(HeckeRow { class: i, entries, complete })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HeckeMatrix { r, rows })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EigenQuery {
    pub lambda: Vec<BigRational>,
    pub x: ClosedPoint,
    pub depth: i64,
}

impl EigenQuery {
    pub fn new(lambda: Vec<BigRational>, x: ClosedPoint, depth: i64) -> Result<Self> {
        if lambda.is_empty() {
            return domain("need at least one eigenvalue");
        }
        if x.degree() != 1 {
            return domain(format!("eigen systems use a degree-one point, got degree {}", x.degree()));
        }
        Ok(EigenQuery { lambda, x, depth })
    }

    pub fn n(&self) -> usize {
        self.lambda.len() + 1
    }
}

/// Linear equations on the classes of a window padded by one.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub space: TruncatedPBun,
    pub rows: Vec<Vec<BigRational>>,
}

impl EigenSystem {
    pub fn build(query: &EigenQuery, hecke: &Hecke) -> Result<Self> {
        let space = TruncatedPBun::new(query.n(), query.depth + 1)?;
        let q0 = BigInt::from(query.x.q());
        let mut rows = Vec::new();
        for (k, lambda) in query.lambda.iter().enumerate() {
            let m = hecke_matrix(&space, k + 1, hecke)?;
            for row in m.rows.iter().filter(|row| row.complete) {
                let mut eq = vec![BigRational::zero(); space.len()];
                for (&j, p) in &row.entries {
                    eq[j] += BigRational::from_integer(p.eval(&q0));
                }
                eq[row.class] -= lambda;
                rows.push(eq);
            }
        }
        Ok(EigenSystem { space, rows })
    }

    /// Appends the toroidal functional as one more equation.
    pub fn with_toroidal_row(mut self) -> Self {
        let mut eq = vec![BigRational::zero(); self.space.len()];
        for k in coset_representatives(self.space.n()) {
            if let Some(j) = self.space.locate(&trace_bundle(k, self.space.n())) {
                eq[j] += BigRational::one();
            }
        }
        self.rows.push(eq);
        self
    }

    pub fn nullity(&self) -> usize {
        let (_, pivots) = rref(self.rows.clone(), self.space.len());
        self.space.len() - pivots.len()
    }

    /// A basis of the solution space.
    pub fn kernel(&self) -> Vec<Vec<BigRational>> {
        let cols = self.space.len();
        let (m, pivots) = rref(self.rows.clone(), cols);
        let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![BigRational::zero(); cols];
                v[fc] = BigRational::one();
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = -m[row][fc].clone();
                }
                v
            })
            .collect()
    }
}

fn rref(mut m: Vec<Vec<BigRational>>, cols: usize) -> (Vec<Vec<BigRational>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let inv = m[rank][c].recip();
        for x in m[rank].iter_mut() {
            *x *= &inv;
        }
        for i in 0..m.len() {
            if i != rank && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    let t = &f * &m[rank][j];
                    m[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        rank += 1;
    }
    m.truncate(rank);
    (m, pivots)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Eigenform {
    pub form: FormVector,
    pub nullity: usize,
}

/// The eigenform with `f(E_0) = 1`.
pub fn eigenform_solve(query: &EigenQuery, hecke: &Hecke) -> Result<Eigenform> {
    let system = EigenSystem::build(query, hecke)?;
    let kernel = system.kernel();
    let nullity = kernel.len();
    if nullity != 1 {
        return Err(Error::Theorem(format!("eigen system has nullity {nullity}, expected 1")));
    }
    let v = &kernel[0];
    let base = &v[system.space.base()];
    if base.is_zero() {
        return Err(Error::Theorem("eigenform vanishes at the trivial class".into()));
    }
    let values = v.iter().map(|x| x / base).collect();
    Ok(Eigenform { form: FormVector::new(system.space, values)?, nullity })
}

/// Nullity of the eigen system with the toroidal sum forced to vanish.
pub fn forced_toroidal_nullity(query: &EigenQuery, hecke: &Hecke) -> Result<usize> {
    Ok(EigenSystem::build(query, hecke)?.with_toroidal_row().nullity())
}

/// `p_* O(k)` for the degree-`n` constant extension.
pub fn trace_bundle(k: i64, n: usize) -> BundleType {
    BundleType::new(&vec![k; n]).expect("n >= 1")
}

/// Representatives of `Pic` of the extended line modulo pullbacks; the
/// quotient is trivial.
pub fn coset_representatives(_n: usize) -> Vec<i64> {
    vec![0]
}

pub fn toroidal_sum(f: &FormVector) -> Result<BigRational> {
    let n = f.space().n();
    let mut acc = BigRational::zero();
    for k in coset_representatives(n) {
        acc += f.at(&trace_bundle(k, n))?;
    }
    Ok(acc)
}

fn hom_dim(f: &BundleType, g: &BundleType) -> u32 {
    let mut dim = 0i64;
    for a in f.degrees() {
        for b in g.degrees() {
            dim += (b - a + 1).max(0);
        }
    }
    dim as u32
}

/// `dim Ext^1(F, G)`.
pub fn ext_dim(f: &BundleType, g: &BundleType) -> u32 {
    let mut dim = 0i64;
    for a in f.degrees() {
        for b in g.degrees() {
            dim += (a - b - 1).max(0);
        }
    }
    dim as u32
}

/// Number of classes in `Ext^1(F, G)` with each middle term.
pub fn extension_middle_distribution(f: &BundleType, g: &BundleType, q0: u64, engine: &HallEngine) -> Result<BTreeMap<BundleType, BigInt>> {
    if q0 < 2 {
        return domain(format!("q0 must be at least 2, got {q0}"));
    }
    let q = BigInt::from(q0);
    let product = engine.bundle_product(f, g)?;
    let scale = q.pow(hom_dim(f, g)) * f.aut_order(&q) * g.aut_order(&q);
    let mut out = BTreeMap::new();
    let mut mass = BigInt::zero();
    for (HallTerm { bundle, torsion }, c) in product.terms() {
        if *torsion != 0 {
            return Err(Error::Identity("torsion in a product of bundles".into()));
        }
        let phi = c.eval(&q)?;
        let g_b = phi * BigRational::from_integer(scale.clone()) / BigRational::from_integer(bundle.aut_order(&q));
        if !g_b.is_integer() || g_b.is_negative() {
            return Err(Error::Identity(format!("extension count {g_b} for {bundle} is not a natural number")));
        }
        let g_b = g_b.to_integer();
        if !g_b.is_zero() {
            mass += &g_b;
            out.insert(bundle.clone(), g_b);
        }
    }
    let expect = q.pow(ext_dim(f, g));
    if mass != expect {
        return Err(Error::Identity(format!("extension mass {mass} for ({f}, {g}), expected {expect}")));
    }
    Ok(out)
}

fn types_in(rank: usize, depth: i64) -> Vec<BundleType> {
    fn go(cur: &mut Vec<i64>, rank: usize, depth: i64, out: &mut Vec<BundleType>) {
        if cur.len() == rank {
            out.push(BundleType::new(cur).expect("nonempty"));
            return;
        }
        let lo = cur.last().copied().unwrap_or(0);
        for v in lo..=depth {
            cur.push(v);
            go(cur, rank, depth, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), rank, depth, &mut out);
    out
}

/// `sum_B g^B f(B)` for every pair `(F, G)` with degrees in `[0, depth]`
/// whose middle terms all lie in `space`.
pub fn cusp_defect(
    f: &FormVector,
    n1: usize,
    n2: usize,
    space: &TruncatedPBun,
    q0: u64,
    engine: &HallEngine,
) -> Result<BTreeMap<(BundleType, BundleType), BigRational>> {
    if n1 == 0 || n2 == 0 || n1 + n2 != space.n() {
        return domain(format!("ranks {n1}+{n2} do not split {}", space.n()));
    }
    let mut out = BTreeMap::new();
    for big_f in types_in(n1, space.depth()) {
        for g in types_in(n2, space.depth()) {
            let dist = extension_middle_distribution(&big_f, &g, q0, engine)?;
            if dist.keys().any(|b| space.locate(b).is_none()) {
                continue;
            }
            let mut acc = BigRational::zero();
            for (b, count) in &dist {
                acc += f.at(b)? * BigRational::from_integer(count.clone());
            }
            out.insert((big_f.clone(), g), acc);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcalc::gaussian_binomial;
    use num_traits::FromPrimitive;

    fn b(d: &[i64]) -> BundleType {
        BundleType::new(d).unwrap()
    }

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    fn query(lambda: &[BigRational], q: u64, depth: i64) -> EigenQuery {
        EigenQuery::new(lambda.to_vec(), ClosedPoint::abstract_point(q, 1).unwrap(), depth).unwrap()
    }

    #[test]
    fn window_is_complete_and_indexed() {
        let s = TruncatedPBun::new(3, 4).unwrap();
        assert_eq!(s.len(), 15);
        for (i, c) in s.classes().iter().enumerate() {
            assert_eq!(s.index_of(c), Some(i));
            assert_eq!(c.degrees()[0], 0);
        }
        assert_eq!(s.classes()[s.base()], BundleType::trivial(3).proj_class());
        assert_eq!(s.locate(&b(&[3, 5])), s.index_of(&b(&[0, 2]).proj_class()));
        assert!(TruncatedPBun::new(0, 3).is_err());
    }

    #[test]
    fn hecke_rows_rank_two() {
        let hecke = Hecke::new();
        let s = TruncatedPBun::new(2, 5).unwrap();
        let m = hecke_matrix(&s, 1, &hecke).unwrap();
        let at = |c: &[i64]| s.locate(&b(c)).unwrap();
        let row0 = &m.rows[at(&[0, 0])];
        assert_eq!(row0.entries, BTreeMap::from([(at(&[0, 1]), QPoly::from_i64s(&[1, 1]))]));
        for k in 1..5 {
            let row = &m.rows[at(&[0, k])];
            assert!(row.complete);
            assert_eq!(
                row.entries,
                BTreeMap::from([(at(&[0, k + 1]), QPoly::one()), (at(&[0, k - 1]), QPoly::q())])
            );
        }
        assert!(!m.rows[at(&[0, 5])].complete);
    }

    #[test]
    fn hecke_row_rank_three_trivial() {
        let hecke = Hecke::new();
        let s = TruncatedPBun::new(3, 2).unwrap();
        for r in 1..=2 {
            let m = hecke_matrix(&s, r, &hecke).unwrap();
            let row = &m.rows[s.base()];
            let mut target = vec![-1; r];
            target.extend(vec![0; 3 - r]);
            assert_eq!(
                row.entries,
                BTreeMap::from([(s.locate(&b(&target)).unwrap(), gaussian_binomial(r, 3).unwrap())])
            );
        }
        assert!(hecke_matrix(&s, 3, &hecke).is_err());
    }

    #[test]
    fn rank_two_eigenform_recurrence() {
        let hecke = Hecke::new();
        for (lambda, q) in [(rat(3, 1), 2u64), (rat(-5, 7), 3), (rat(0, 1), 2)] {
            let sol = eigenform_solve(&query(std::slice::from_ref(&lambda), q, 5), &hecke).unwrap();
            assert_eq!(sol.nullity, 1);
            let f = |k: i64| sol.form.at(&b(&[0, k])).unwrap().clone();
            let qq = BigRational::from_u64(q).unwrap();
            assert_eq!(f(0), BigRational::one());
            assert_eq!(f(1), &lambda * f(0) / (&qq + BigRational::one()));
            for k in 1..=5 {
                assert_eq!(f(k + 1), &lambda * f(k) - &qq * f(k - 1));
            }
        }
    }

    #[test]
    fn rank_three_nullity_one() {
        let hecke = Hecke::new();
        for (l1, l2, q) in [(rat(2, 1), rat(1, 3), 2u64), (rat(-1, 2), rat(4, 1), 3)] {
            let sol = eigenform_solve(&query(&[l1.clone(), l2.clone()], q, 3), &hecke).unwrap();
            assert_eq!(sol.nullity, 1);
            let f = |c: &[i64]| sol.form.at(&b(c)).unwrap().clone();
            let gr = BigRational::from_u64(q * q + q + 1).unwrap();
            assert_eq!(f(&[0, 1, 1]), &l1 / &gr);
            assert_eq!(f(&[0, 0, 1]), &l2 / &gr);
        }
    }

    #[test]
    fn forcing_toroidal_kills_the_form() {
        let hecke = Hecke::new();
        assert_eq!(forced_toroidal_nullity(&query(&[rat(3, 1)], 2, 4), &hecke).unwrap(), 0);
        assert_eq!(forced_toroidal_nullity(&query(&[rat(1, 1), rat(2, 1)], 3, 3), &hecke).unwrap(), 0);
    }

    #[test]
    fn toroidal_sum_examples() {
        let hecke = Hecke::new();
        let sol = eigenform_solve(&query(&[rat(3, 1)], 2, 4), &hecke).unwrap();
        assert_eq!(toroidal_sum(&sol.form).unwrap(), BigRational::one());
        let zero = FormVector::zero(TruncatedPBun::new(2, 4).unwrap());
        assert!(toroidal_sum(&zero).unwrap().is_zero());
        assert_eq!(trace_bundle(2, 3), b(&[2, 2, 2]));
    }

    #[test]
    fn extension_middle_examples() {
        let engine = HallEngine::new();
        for q0 in [2u64, 3, 5] {
            let d = |f: &[i64], g: &[i64]| extension_middle_distribution(&b(f), &b(g), q0, &engine).unwrap();
            assert_eq!(d(&[0], &[0]), BTreeMap::from([(b(&[0, 0]), BigInt::from(1))]));
            assert_eq!(
                d(&[2], &[0]),
                BTreeMap::from([(b(&[0, 2]), BigInt::from(1)), (b(&[1, 1]), BigInt::from(q0 - 1))])
            );
            assert_eq!(d(&[1], &[0]), BTreeMap::from([(b(&[0, 1]), BigInt::from(1))]));
        }
    }

    #[test]
    fn extension_mass_small_grid() {
        let engine = HallEngine::new();
        for n1 in 1..=2 {
            for n2 in 1..=2 {
                for f in types_in(n1, 3) {
                    for g in types_in(n2, 3) {
                        for q0 in [2u64, 3] {
                            extension_middle_distribution(&f, &g, q0, &engine).unwrap();
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn cusp_defect_examples() {
        let hecke = Hecke::new();
        let q0 = 2u64;
        let sol = eigenform_solve(&query(&[rat(3, 1)], q0, 4), &hecke).unwrap();
        let space = TruncatedPBun::new(2, 4).unwrap();
        let defects = cusp_defect(&sol.form, 1, 1, &space, q0, hecke.engine()).unwrap();
        assert_eq!(defects[&(b(&[0]), b(&[0]))], BigRational::one());
        let f = |c: &[i64]| sol.form.at(&b(c)).unwrap().clone();
        let expect = f(&[0, 2]) + BigRational::from_u64(q0 - 1).unwrap() * f(&[0, 0]);
        assert_eq!(defects[&(b(&[2]), b(&[0]))], expect);
        let zero = FormVector::zero(space.clone());
        assert!(cusp_defect(&zero, 1, 1, &space, q0, hecke.engine()).unwrap().values().all(Zero::is_zero));
    }
}
