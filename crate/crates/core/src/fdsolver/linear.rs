//! Sparse linear algebra for the policy systems: CSR storage, an incomplete
//! LU factorization with zero fill, and preconditioned BiCGSTAB.

use crate::error::{Error, Result};

/// Compressed sparse rows with sorted column indices in each row.
#[derive(Debug, Clone, Default)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn with_capacity(n: usize, nnz: usize) -> Self {
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        Self { n, row_ptr, cols: Vec::with_capacity(nnz), vals: Vec::with_capacity(nnz) }
    }

    /// Appends a row given as unsorted `(column, value)` entries.
    pub fn push_row(&mut self, entries: &mut [(usize, f64)]) {
        entries.sort_by_key(|e| e.0);
        let mut last = usize::MAX;
        for &(c, v) in entries.iter() {
            if c == last {
                *self.vals.last_mut().expect("entry exists") += v;
            } else {
                self.cols.push(c);
                self.vals.push(v);
                last = c;
            }
        }
        self.row_ptr.push(self.cols.len());
    }

    pub fn mul_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yi = acc;
        }
    }
}

/// `L U ~ A` on the sparsity pattern of `A`; `L` has a unit diagonal.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    lu: CsrMatrix,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let mut lu = a.clone();
        let n = a.n;
        let mut diag = vec![usize::MAX; n];
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            let (start, end) = (lu.row_ptr[i], lu.row_ptr[i + 1]);
            for k in start..end {
                pos[lu.cols[k]] = k;
                if lu.cols[k] == i {
                    diag[i] = k;
                }
            }
            if diag[i] == usize::MAX {
                return Err(Error::Numerical(format!("row {i} has no diagonal entry")));
            }
            for k in start..end {
                let c = lu.cols[k];
                if c >= i {
                    break;
                }
                let pivot = lu.vals[diag[c]];
                let factor = lu.vals[k] / pivot;
                lu.vals[k] = factor;
                for m in diag[c] + 1..lu.row_ptr[c + 1] {
                    let p = pos[lu.cols[m]];
                    if p != usize::MAX {
                        lu.vals[p] -= factor * lu.vals[m];
                    }
                }
            }
            if lu.vals[diag[i]] == 0.0 {
                return Err(Error::Numerical(format!("zero pivot in row {i}")));
            }
            for k in start..end {
                pos[lu.cols[k]] = usize::MAX;
            }
        }
        Ok(Self { lu, diag })
    }

    /// Overwrites `x` with `(L U)^{-1} x`.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let lu = &self.lu;
        for i in 0..lu.n {
            let mut acc = x[i];
            for k in lu.row_ptr[i]..self.diag[i] {
                acc -= lu.vals[k] * x[lu.cols[k]];
            }
            x[i] = acc;
        }
        for i in (0..lu.n).rev() {
            let mut acc = x[i];
            for k in self.diag[i] + 1..lu.row_ptr[i + 1] {
                acc -= lu.vals[k] * x[lu.cols[k]];
            }
            x[i] = acc / lu.vals[self.diag[i]];
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Right-preconditioned BiCGSTAB. Iterates until `max |b - A x| <= tol` and
/// returns the iteration count.
pub fn bicgstab(a: &CsrMatrix, pre: &Ilu0, b: &[f64], x: &mut [f64], tol: f64, max_iter: usize) -> Result<usize> {
    let n = a.n;
    let mut r = vec![0.0; n];
    a.mul_into(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    if max_abs(&r) <= tol {
        return Ok(0);
    }
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut p_hat = vec![0.0; n];
    let mut s_hat = vec![0.0; n];
    let mut t = vec![0.0; n];
    for it in 1..=max_iter {
        let rho_next = dot(&r_hat, &r);
        if rho_next == 0.0 || omega == 0.0 {
            return Err(Error::Numerical(format!("BiCGSTAB breakdown at iteration {it}")));
        }
        let beta = (rho_next / rho) * (alpha / omega);
        rho = rho_next;
        for k in 0..n {
            p[k] = r[k] + beta * (p[k] - omega * v[k]);
        }
        p_hat.copy_from_slice(&p);
        pre.solve_in_place(&mut p_hat);
        a.mul_into(&p_hat, &mut v);
        alpha = rho / dot(&r_hat, &v);
        for k in 0..n {
            r[k] -= alpha * v[k];
            x[k] += alpha * p_hat[k];
        }
        if max_abs(&r) <= tol {
            return Ok(it);
        }
        s_hat.copy_from_slice(&r);
        pre.solve_in_place(&mut s_hat);
        a.mul_into(&s_hat, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &r) / tt } else { 0.0 };
        for k in 0..n {
            x[k] += omega * s_hat[k];
            r[k] -= omega * t[k];
        }
        if max_abs(&r) <= tol {
            return Ok(it);
        }
        if !omega.is_finite() || !alpha.is_finite() {
            return Err(Error::Numerical(format!("BiCGSTAB produced non-finite coefficients at iteration {it}")));
        }
    }
    Err(Error::Numerical(format!("BiCGSTAB did not reach {tol:e} in {max_iter} iterations")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poisson(m: usize) -> CsrMatrix {
        let mut a = CsrMatrix::with_capacity(m * m, 5 * m * m);
        for j in 0..m {
            for i in 0..m {
                let mut row = vec![(j * m + i, 4.0)];
                if i > 0 {
                    row.push((j * m + i - 1, -1.0));
                }
                if i + 1 < m {
                    row.push((j * m + i + 1, -1.0));
                }
                if j > 0 {
                    row.push(((j - 1) * m + i, -1.0));
                }
                if j + 1 < m {
                    row.push(((j + 1) * m + i, -1.0));
                }
                a.push_row(&mut row);
            }
        }
        a
    }

    #[test]
    fn ilu_is_exact_for_tridiagonal() {
        let mut a = CsrMatrix::with_capacity(4, 10);
        a.push_row(&mut [(0, 2.0), (1, -1.0)]);
        a.push_row(&mut [(1, 2.0), (0, -1.0), (2, -1.0)]);
        a.push_row(&mut [(1, -1.0), (2, 2.0), (3, -1.0)]);
        a.push_row(&mut [(2, -1.0), (3, 2.0)]);
        let ilu = Ilu0::new(&a).unwrap();
        let mut x = vec![1.0, 0.0, 0.0, 1.0];
        ilu.solve_in_place(&mut x);
        for v in x {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn solves_poisson() {
        let a = poisson(40);
        let exact: Vec<f64> = (0..1600).map(|k| ((k as f64) * 0.01).sin()).collect();
        let mut b = vec![0.0; 1600];
        a.mul_into(&exact, &mut b);
        let ilu = Ilu0::new(&a).unwrap();
        let mut x = vec![0.0; 1600];
        let its = bicgstab(&a, &ilu, &b, &mut x, 1e-12, 500).unwrap();
        assert!(its < 100, "{its}");
        for (u, v) in x.iter().zip(&exact) {
            assert!((u - v).abs() < 1e-9);
        }
    }
}
