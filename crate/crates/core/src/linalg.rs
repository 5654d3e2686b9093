//! Sparse linear algebra: triplet operators, a banded LDL^T direct
//! factorization sized for desk-scale meshes, and a diagonally preconditioned
//! conjugate gradient fallback.

use crate::error::{Error, Result};

/// Square sparse matrix in unsorted triplet form; duplicate entries sum.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    pub n: usize,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl SparseOperator {
    pub fn new(n: usize) -> Self {
        SparseOperator {
            n,
            rows: Vec::new(),
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        self.rows.push(i);
        self.cols.push(j);
        self.vals.push(v);
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for k in 0..self.vals.len() {
            y[self.rows[k]] += self.vals[k] * x[self.cols[k]];
        }
        y
    }

    /// Consolidated diagonal (duplicates summed).
    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for k in 0..self.vals.len() {
            if self.rows[k] == self.cols[k] {
                d[self.rows[k]] += self.vals[k];
            }
        }
        d
    }

    /// Half bandwidth max |i - j| over stored entries.
    pub fn bandwidth(&self) -> usize {
        self.rows
            .iter()
            .zip(&self.cols)
            .map(|(&i, &j)| i.abs_diff(j))
            .max()
            .unwrap_or(0)
    }

    /// Max |A_ij - A_ji| after consolidating duplicates, relative to the
    /// largest entry magnitude.
    pub fn max_relative_asymmetry(&self) -> f64 {
        use std::collections::HashMap;
        let mut m: HashMap<(usize, usize), f64> = HashMap::new();
        let mut amax: f64 = 0.0;
        for k in 0..self.vals.len() {
            *m.entry((self.rows[k], self.cols[k])).or_insert(0.0) += self.vals[k];
        }
        for v in m.values() {
            amax = amax.max(v.abs());
        }
        let mut asym: f64 = 0.0;
        for (&(i, j), &v) in &m {
            let vt = m.get(&(j, i)).cloned().unwrap_or(0.0);
            asym = asym.max((v - vt).abs());
        }
        if amax > 0.0 {
            asym / amax
        } else {
            0.0
        }
    }
}

/// Banded LDL^T factorization of a symmetric matrix (no pivoting; mildly
/// indefinite matrices factor fine as long as no pivot collapses).
pub struct BandedLdlt {
    n: usize,
    bw: usize,
    /// Unit lower band, row-major: entry (i, j) at i*(bw+1) + (j - i + bw).
    band: Vec<f64>,
    diag: Vec<f64>,
}

impl BandedLdlt {
    pub fn factor(op: &SparseOperator) -> Result<Self> {
        let n = op.n;
        let bw = op.bandwidth();
        let w = bw + 1;
        let mut band = vec![0.0; n * w];
        let mut diag = vec![0.0; n];
        let mut scale: f64 = 0.0;
        for k in 0..op.vals.len() {
            let (i, j, v) = (op.rows[k], op.cols[k], op.vals[k]);
            scale = scale.max(v.abs());
            if i == j {
                diag[i] += v;
            } else if i > j {
                band[i * w + (j + bw - i)] += v;
            }
        }
        // factor in place: band holds L (unit diagonal), diag holds D
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..i {
                let mut s = band[i * w + (j + bw - i)];
                let k0 = j0.max(j.saturating_sub(bw));
                for k in k0..j {
                    s -= band[i * w + (k + bw - i)] * diag[k] * band[j * w + (k + bw - j)];
                }
                band[i * w + (j + bw - i)] = s / diag[j];
            }
            let mut d = diag[i];
            for k in j0..i {
                let l = band[i * w + (k + bw - i)];
                d -= l * l * diag[k];
            }
            if d.abs() < 1e-300 || !d.is_finite() {
                return Err(Error::LinearBreakdown(format!(
                    "zero or non-finite pivot at row {i} (scale {scale})"
                )));
            }
            diag[i] = d;
        }
        Ok(BandedLdlt { n, bw, band, diag })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        let mut x = b.to_vec();
        // forward: L z = b
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            let mut s = x[i];
            for j in j0..i {
                s -= self.band[i * w + (j + bw - i)] * x[j];
            }
            x[i] = s;
        }
        for i in 0..n {
            x[i] /= self.diag[i];
        }
        // backward: L^T x = z
        for i in (0..n).rev() {
            let jmax = (i + bw).min(n - 1);
            let mut s = x[i];
            for j in i + 1..=jmax {
                s -= self.band[j * w + (i + bw - j)] * x[j];
            }
            x[i] = s;
        }
        x
    }
}

/// Diagonally preconditioned conjugate gradient; fallback for very wide
/// bandwidths. Requires a symmetric positive definite operator.
pub fn cg_solve(op: &SparseOperator, b: &[f64], rtol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = op.n;
    let diag = op.diagonal();
    let precond = |r: &[f64]| -> Vec<f64> {
        r.iter()
            .zip(&diag)
            .map(|(ri, di)| if di.abs() > 0.0 { ri / di } else { *ri })
            .collect()
    };
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for _ in 0..max_iter {
        let ap = op.matvec(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::LinearBreakdown(
                "conjugate gradient: operator not positive definite".into(),
            ));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if norm2(&r) <= rtol * bnorm {
            return Ok(x);
        }
        z = precond(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::LinearBreakdown(
        "conjugate gradient: iteration cap reached".into(),
    ))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_banded_spd(n: usize, bw: usize, seed: u64) -> SparseOperator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut op = SparseOperator::new(n);
        for i in 0..n {
            op.push(i, i, 4.0 + rng.gen::<f64>());
            for j in i.saturating_sub(bw)..i {
                let v = rng.gen::<f64>() - 0.5;
                op.push(i, j, v);
                op.push(j, i, v);
            }
        }
        op
    }

    #[test]
    fn ldlt_solves_spd_system() {
        let op = random_banded_spd(60, 4, 7);
        let x_true: Vec<f64> = (0..60).map(|i| (i as f64).sin()).collect();
        let b = op.matvec(&x_true);
        let f = BandedLdlt::factor(&op).unwrap();
        let x = f.solve(&b);
        for i in 0..60 {
            assert!((x[i] - x_true[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn ldlt_solves_symmetric_indefinite_system() {
        // SPD matrix minus a modest multiple of a diagonal chunk stays
        // factorable without pivoting
        let mut op = random_banded_spd(40, 3, 11);
        for i in 0..10 {
            op.push(i, i, -6.5);
        }
        let x_true: Vec<f64> = (0..40).map(|i| 1.0 + (i % 5) as f64).collect();
        let b = op.matvec(&x_true);
        let f = BandedLdlt::factor(&op).unwrap();
        let x = f.solve(&b);
        let r: Vec<f64> = op
            .matvec(&x)
            .iter()
            .zip(&b)
            .map(|(a, bb)| a - bb)
            .collect();
        assert!(norm2(&r) / norm2(&b) < 1e-10);
    }

    #[test]
    fn cg_matches_direct_solve() {
        let op = random_banded_spd(50, 3, 3);
        let b: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).cos()).collect();
        let xd = BandedLdlt::factor(&op).unwrap().solve(&b);
        let xc = cg_solve(&op, &b, 1e-13, 500).unwrap();
        for i in 0..50 {
            assert!((xd[i] - xc[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn asymmetry_detects_nonsymmetric_matrix() {
        let mut op = SparseOperator::new(3);
        op.push(0, 0, 1.0);
        op.push(1, 1, 1.0);
        op.push(2, 2, 1.0);
        op.push(0, 1, 0.5);
        op.push(1, 0, 0.5);
        assert!(op.max_relative_asymmetry() < 1e-15);
        op.push(2, 0, 0.25);
        assert!(op.max_relative_asymmetry() > 0.2);
    }
}
