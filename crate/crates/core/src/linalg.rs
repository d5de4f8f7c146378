//! Small dense linear algebra used by the kernels.
//!
//! Everything here operates on matrices of size at most ~12, so the
//! routines favor clarity and determinism over asymptotics: cyclic
//! Jacobi for symmetric eigenvalues, Gaussian elimination with partial
//! pivoting for the tiny solves.

use crate::error::{Error, Result};

/// Dense square matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::domain("matrix rows must all have length n"));
        }
        let data = rows.iter().flatten().copied().collect();
        Ok(SquareMatrix { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if (self[(i, j)] - self[(j, i)]).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Determinant by LU with partial pivoting.
    pub fn det(&self) -> f64 {
        let mut a = self.data.clone();
        let n = self.n;
        let mut det = 1.0;
        for col in 0..n {
            let mut piv = col;
            for r in (col + 1)..n {
                if a[r * n + col].abs() > a[piv * n + col].abs() {
                    piv = r;
                }
            }
            if a[piv * n + col] == 0.0 {
                return 0.0;
            }
            if piv != col {
                for c in 0..n {
                    a.swap(col * n + c, piv * n + c);
                }
                det = -det;
            }
            det *= a[col * n + col];
            for r in (col + 1)..n {
                let f = a[r * n + col] / a[col * n + col];
                for c in col..n {
                    a[r * n + c] -= f * a[col * n + c];
                }
            }
        }
        det
    }

    /// Sum of all k×k principal minors, i.e. the elementary symmetric
    /// function of the eigenvalues evaluated without diagonalizing.
    pub fn principal_minor_sum(&self, k: usize) -> f64 {
        let n = self.n;
        if k == 0 {
            return 1.0;
        }
        if k > n {
            return 0.0;
        }
        let mut total = 0.0;
        let mut subset: Vec<usize> = (0..k).collect();
        loop {
            let mut sub = SquareMatrix::zeros(k);
            for (a, &i) in subset.iter().enumerate() {
                for (b, &j) in subset.iter().enumerate() {
                    sub[(a, b)] = self[(i, j)];
                }
            }
            total += sub.det();
            // next k-subset in lexicographic order
            let mut i = k;
            loop {
                if i == 0 {
                    return total;
                }
                i -= 1;
                if subset[i] != i + n - k {
                    break;
                }
            }
            subset[i] += 1;
            for j in (i + 1)..k {
                subset[j] = subset[j - 1] + 1;
            }
        }
    }
}

impl std::ops::Index<(usize, usize)> for SquareMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for SquareMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations,
/// returned in ascending order.
pub fn symmetric_eigenvalues(m: &SquareMatrix) -> Result<Vec<f64>> {
    if !m.is_symmetric(1e-9 * (1.0 + frob_norm(m))) {
        return Err(Error::domain("eigenvalue routine requires a symmetric matrix"));
    }
    let n = m.dim();
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    if n == 2 {
        let (a, b, c) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
        let tr = a + c;
        let disc = ((a - c) * 0.5).hypot(b);
        return Ok(vec![tr * 0.5 - disc, tr * 0.5 + disc]);
    }
    let mut a = m.clone();
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[(i, j)] * a[(i, j)];
            }
        }
        if off.sqrt() < 1e-14 * (1.0 + frob_norm(&a)) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(|x, y| x.total_cmp(y));
    Ok(eig)
}

fn frob_norm(m: &SquareMatrix) -> f64 {
    let n = m.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += m[(i, j)] * m[(i, j)];
        }
    }
    s.sqrt()
}

/// Solve a small dense system Ax = b by Gaussian elimination with
/// partial pivoting. Errors on (near-)singular pivots.
pub fn solve_dense(a: &SquareMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::domain("solve_dense: size mismatch"));
    }
    let mut m = a.clone();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if m[(r, col)].abs() > m[(piv, col)].abs() {
                piv = r;
            }
        }
        if m[(piv, col)].abs() < 1e-300 {
            return Err(Error::numeric("solve_dense: singular matrix"));
        }
        if piv != col {
            for c in 0..n {
                let tmp = m[(col, c)];
                m[(col, c)] = m[(piv, c)];
                m[(piv, c)] = tmp;
            }
            rhs.swap(col, piv);
        }
        for r in (col + 1)..n {
            let f = m[(r, col)] / m[(col, col)];
            for c in col..n {
                let v = m[(col, c)];
                m[(r, c)] -= f * v;
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut s = rhs[r];
        for c in (r + 1)..n {
            s -= m[(r, c)] * x[c];
        }
        x[r] = s / m[(r, r)];
    }
    Ok(x)
}

/// Symmetric 2×2 (or 1×1) matrix stored as (a11, a12, a22); the small
/// metric blocks used by the periodic-grid flow.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SymMat2 {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl SymMat2 {
    pub fn diag(a: f64, b: f64) -> Self {
        SymMat2 { a11: a, a12: 0.0, a22: b }
    }

    pub fn scalar(a: f64) -> Self {
        SymMat2 { a11: a, a12: 0.0, a22: 0.0 }
    }

    pub fn det(&self, n: usize) -> f64 {
        match n {
            1 => self.a11,
            _ => self.a11 * self.a22 - self.a12 * self.a12,
        }
    }

    pub fn trace(&self, n: usize) -> f64 {
        match n {
            1 => self.a11,
            _ => self.a11 + self.a22,
        }
    }

    pub fn min_eigenvalue(&self, n: usize) -> f64 {
        match n {
            1 => self.a11,
            _ => {
                let half_tr = 0.5 * (self.a11 + self.a22);
                let disc = (0.5 * (self.a11 - self.a22)).hypot(self.a12);
                half_tr - disc
            }
        }
    }

    pub fn is_positive_definite(&self, n: usize) -> bool {
        match n {
            1 => self.a11 > 0.0,
            _ => self.a11 > 0.0 && self.det(2) > 0.0,
        }
    }

    pub fn add(&self, other: &SymMat2) -> SymMat2 {
        SymMat2 {
            a11: self.a11 + other.a11,
            a12: self.a12 + other.a12,
            a22: self.a22 + other.a22,
        }
    }

    pub fn scale(&self, t: f64) -> SymMat2 {
        SymMat2 { a11: t * self.a11, a12: t * self.a12, a22: t * self.a22 }
    }

    /// Eigenvalues of the pencil (B, A): solutions of det(B − λA) = 0
    /// for A positive definite. Ascending; both real and positive when
    /// B is positive definite too.
    pub fn pencil_eigenvalues(b: &SymMat2, a: &SymMat2, n: usize) -> Result<Vec<f64>> {
        match n {
            1 => {
                if a.a11 <= 0.0 {
                    return Err(Error::domain("pencil: base matrix not positive"));
                }
                Ok(vec![b.a11 / a.a11])
            }
            2 => {
                let det_a = a.det(2);
                if a.a11 <= 0.0 || det_a <= 0.0 {
                    return Err(Error::domain("pencil: base matrix not positive definite"));
                }
                // det(B - λA) = det(A)·λ² - m·λ + det(B), with the mixed
                // determinant m = a11·b22 + a22·b11 - 2·a12·b12.
                let m = a.a11 * b.a22 + a.a22 * b.a11 - 2.0 * a.a12 * b.a12;
                let det_b = b.det(2);
                let disc = (m * m - 4.0 * det_a * det_b).max(0.0).sqrt();
                let l1 = (m - disc) / (2.0 * det_a);
                let l2 = (m + disc) / (2.0 * det_a);
                Ok(vec![l1, l2])
            }
            _ => Err(Error::domain("pencil eigenvalues implemented for n ≤ 2")),
        }
    }

    /// Adjugate (cofactor transpose); for n = 1 this is the constant 1.
    pub fn adjugate(&self, n: usize) -> SymMat2 {
        match n {
            1 => SymMat2::scalar(1.0),
            _ => SymMat2 { a11: self.a22, a12: -self.a12, a22: self.a11 },
        }
    }

    /// Inner product Tr(self · other) for symmetric matrices.
    pub fn dot(&self, other: &SymMat2, n: usize) -> f64 {
        match n {
            1 => self.a11 * other.a11,
            _ => self.a11 * other.a11 + self.a22 * other.a22 + 2.0 * self.a12 * other.a12,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_matches_known_eigenvalues() {
        let m = SquareMatrix::from_rows(&[
            vec![2.0, 1.0, 0.0],
            vec![1.0, 3.0, 1.0],
            vec![0.0, 1.0, 2.0],
        ])
        .unwrap();
        let eig = symmetric_eigenvalues(&m).unwrap();
        // det(A - xI) = (2-x)(x² - 5x + 4): roots 1, 2, 4
        let expected = [1.0, 2.0, 4.0];
        for (e, x) in eig.iter().zip(expected.iter()) {
            assert!((e - x).abs() < 1e-10, "{e} vs {x}");
        }
    }

    #[test]
    fn principal_minor_sums_equal_symmetric_functions() {
        let m = SquareMatrix::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0],
            vec![0.0, 0.0, 3.0],
        ])
        .unwrap();
        assert_eq!(m.principal_minor_sum(1), 6.0);
        assert_eq!(m.principal_minor_sum(2), 11.0);
        assert_eq!(m.principal_minor_sum(3), 6.0);
    }

    #[test]
    fn pencil_eigenvalues_diag_case() {
        let a = SymMat2::diag(1.0, 1.0);
        let b = SymMat2::diag(2.0, 3.0);
        let eig = SymMat2::pencil_eigenvalues(&b, &a, 2).unwrap();
        assert!((eig[0] - 2.0).abs() < 1e-14);
        assert!((eig[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn solve_dense_roundtrip() {
        let a = SquareMatrix::from_rows(&[
            vec![4.0, 1.0, 0.0],
            vec![1.0, 3.0, 1.0],
            vec![0.0, 1.0, 2.0],
        ])
        .unwrap();
        let x_true = [1.0, -2.0, 0.5];
        let b: Vec<f64> = (0..3)
            .map(|i| (0..3).map(|j| a[(i, j)] * x_true[j]).sum())
            .collect();
        let x = solve_dense(&a, &b).unwrap();
        for (xi, ti) in x.iter().zip(x_true.iter()) {
            assert!((xi - ti).abs() < 1e-12);
        }
    }
}
