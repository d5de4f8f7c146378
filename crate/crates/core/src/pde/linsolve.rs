//! Sparse CSR matrices and a Jacobi-preconditioned BiCGStab solver for
//! the nonsymmetric linearized systems of the Dirichlet solvers.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Csr {
    /// Assemble from per-row (column, value) lists; entries with the
    /// same column are merged.
    pub fn from_rows(n: usize, rows: Vec<Vec<(usize, f64)>>) -> Csr {
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for (c, v) in row {
                match merged.last_mut() {
                    Some((lc, lv)) if *lc == c => *lv += v,
                    _ => merged.push((c, v)),
                }
            }
            for (c, v) in merged {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Csr { n, row_ptr, cols, vals }
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        for r in 0..self.n {
            let mut s = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            out[r] = s;
        }
    }

    /// Scale every row (and the right-hand side) by its max-norm; the
    /// truncated-arm stencils near curved boundaries produce rows of
    /// wildly different magnitude otherwise.
    pub fn equilibrate_rows(&mut self, rhs: &mut [f64]) {
        for r in 0..self.n {
            let mut m = 0.0f64;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m = m.max(self.vals[k].abs());
            }
            if m > 0.0 {
                let inv = 1.0 / m;
                for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                    self.vals[k] *= inv;
                }
                rhs[r] *= inv;
            }
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![1.0; self.n];
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.cols[k] == r && self.vals[k].abs() > 1e-300 {
                    d[r] = self.vals[k];
                }
            }
        }
        d
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// BiCGStab with Jacobi preconditioning. Converges when the true
/// residual norm drops below `rel_tol`·‖b‖ (plus a small absolute
/// floor).
pub fn bicgstab(a: &Csr, b: &[f64], rel_tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = a.n;
    if b.len() != n {
        return Err(Error::domain("bicgstab: size mismatch"));
    }
    let b_norm = norm(b);
    let target = rel_tol * b_norm + 1e-300;
    if b_norm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let diag = a.diagonal();
    let precond = |v: &[f64], out: &mut Vec<f64>| {
        out.clear();
        out.extend(v.iter().zip(diag.iter()).map(|(x, d)| x / d));
    };

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let r0 = r.clone();
    let mut rho = 1.0;
    let mut alpha = 1.0;
    let mut omega = 1.0;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut phat = Vec::with_capacity(n);
    let mut shat = Vec::with_capacity(n);
    let mut t = vec![0.0; n];

    for _iter in 0..max_iter {
        let rho_new = dot(&r0, &r);
        if rho_new.abs() < 1e-280 {
            // breakdown: restart from the current residual
            return Err(Error::numeric("bicgstab breakdown (rho ≈ 0)"));
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        precond(&p, &mut phat);
        a.matvec(&phat, &mut v);
        alpha = rho / dot(&r0, &v);
        let s: Vec<f64> = r.iter().zip(v.iter()).map(|(ri, vi)| ri - alpha * vi).collect();
        if norm(&s) < target {
            for i in 0..n {
                x[i] += alpha * phat[i];
            }
            return Ok(x);
        }
        precond(&s, &mut shat);
        a.matvec(&shat, &mut t);
        let tt = dot(&t, &t);
        if tt.abs() < 1e-280 {
            return Err(Error::numeric("bicgstab breakdown (t ≈ 0)"));
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * phat[i] + omega * shat[i];
            r[i] = s[i] - omega * t[i];
        }
        if norm(&r) < target {
            return Ok(x);
        }
    }
    Err(Error::numeric(format!(
        "bicgstab did not reach relative tolerance {rel_tol} in {max_iter} iterations"
    )))
}
