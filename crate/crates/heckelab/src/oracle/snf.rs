//! Matrices over `F_p[t]` and their Smith normal form.

use crate::error::{domain, Error, Result};
use crate::fpoly::FpPoly;

pub type PolyMatrix = Vec<Vec<FpPoly>>;

pub fn identity(n: usize, p: u64) -> PolyMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| FpPoly::constant(p, (i == j) as u64)).collect())
        .collect()
}

pub fn mat_mul(a: &PolyMatrix, b: &PolyMatrix) -> PolyMatrix {
    let p = a[0][0].modulus();
    let (n, m, k) = (a.len(), b[0].len(), b.len());
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..k).fold(FpPoly::zero(p), |acc, l| &acc + &(&a[i][l] * &b[l][j])))
                .collect()
        })
        .collect()
}

/// Determinant by cofactor expansion along the first row.
pub fn det(m: &PolyMatrix) -> FpPoly {
    let n = m.len();
    let p = m[0][0].modulus();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = FpPoly::zero(p);
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: PolyMatrix = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, x)| x.clone()).collect())
            .collect();
        let term = &m[0][j] * &det(&minor);
        acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
    }
    acc
}

/// `M = left * diag * right` with `diag` monic and each entry dividing the next.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub diag: Vec<FpPoly>,
    pub left: PolyMatrix,
    pub right: PolyMatrix,
}

pub fn smith_normal_form(m: &PolyMatrix) -> Result<SmithForm> {
    let n = m.len();
    if n == 0 || m.iter().any(|row| row.len() != n) {
        return domain("smith normal form needs a nonempty square matrix");
    }
    let p = m[0][0].modulus();
    let mut a = m.clone();
    let mut left = identity(n, p);
    let mut right = identity(n, p);

    for t in 0..n {
        loop {
            let Some((pi, pj)) = min_degree_entry(&a, t) else {
                return domain("matrix is singular");
            };
            if pi != t {
                a.swap(pi, t);
                swap_cols(&mut left, pi, t);
            }
            if pj != t {
                swap_cols(&mut a, pj, t);
                right.swap(pj, t);
            }
            let mut dirty = false;
            for i in t + 1..n {
                if a[i][t].is_zero() {
                    continue;
                }
                let (quo, _) = a[i][t].div_rem(&a[t][t]);
                // row_i -= quo * row_t, so column t of left gains quo * column i
                for j in 0..n {
                    let v = &a[i][j] - &(&quo * &a[t][j]);
                    a[i][j] = v;
                }
                for row in left.iter_mut() {
                    let v = &row[t] + &(&quo * &row[i]);
                    row[t] = v;
                }
                dirty |= !a[i][t].is_zero();
            }
            for j in t + 1..n {
                if a[t][j].is_zero() {
                    continue;
                }
                let (quo, _) = a[t][j].div_rem(&a[t][t]);
                // col_j -= quo * col_t, so row t of right gains quo * row j
                for row in a.iter_mut() {
                    let v = &row[j] - &(&quo * &row[t]);
                    row[j] = v;
                }
                for k in 0..n {
                    let v = &right[t][k] + &(&quo * &right[j][k]);
                    right[t][k] = v;
                }
                dirty |= !a[t][j].is_zero();
            }
            if dirty {
                continue;
            }
            // the pivot must divide the rest of the block
            let bad = (t + 1..n).find(|&i| (t + 1..n).any(|j| !a[i][j].rem(&a[t][t]).is_zero()));
            match bad {
                Some(i) => {
                    // row_t += row_i, so column i of left loses column t
                    for j in 0..n {
                        let v = &a[t][j] + &a[i][j];
                        a[t][j] = v;
                    }
                    for row in left.iter_mut() {
                        let v = &row[i] - &row[t];
                        row[i] = v;
                    }
                }
                None => break,
            }
        }
        let lead = a[t][t].leading();
        let inv = crate::fpoly::inv_mod(lead, p);
        for j in 0..n {
            a[t][j] = a[t][j].scale(inv);
        }
        for row in left.iter_mut() {
            row[t] = row[t].scale(lead);
        }
    }

    let diag: Vec<FpPoly> = (0..n).map(|i| a[i][i].clone()).collect();
    let mut d = identity(n, p);
    for i in 0..n {
        d[i][i] = diag[i].clone();
    }
    if mat_mul(&mat_mul(&left, &d), &right) != *m {
        return Err(Error::Identity("smith normal form transforms do not reproduce the input".into()));
    }
    if !det(&left).is_constant() || det(&left).is_zero() || !det(&right).is_constant() || det(&right).is_zero() {
        return Err(Error::Identity("smith normal form transforms are not invertible".into()));
    }
    Ok(SmithForm { diag, left, right })
}

fn min_degree_entry(a: &PolyMatrix, t: usize) -> Option<(usize, usize)> {
    let n = a.len();
    let mut best: Option<(usize, usize, usize)> = None;
    for i in t..n {
        for j in t..n {
            if let Some(dg) = a[i][j].degree() {
                if best.is_none_or(|(_, _, bd)| dg < bd) {
                    best = Some((i, j, dg));
                }
            }
        }
    }
    best.map(|(i, j, _)| (i, j))
}

fn swap_cols(m: &mut PolyMatrix, i: usize, j: usize) {
    for row in m.iter_mut() {
        row.swap(i, j);
    }
}
