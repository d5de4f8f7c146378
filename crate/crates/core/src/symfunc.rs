//! Elementary-symmetric-function kernel.
//!
//! For an n-tuple λ = (λ₁, …, λ_n) we write S_k(λ) for the elementary
//! symmetric function of degree k, with the conventions S₀ = 1 and
//! S₋₁ = 0, and
//!
//! ```text
//! S_{k; i₁,…,i_l}(λ) = S_k(λ) |_{λ_{i₁} = … = λ_{i_l} = 0},
//! ```
//!
//! the "deleted" symmetric function, which is defined to be 0 when the
//! listed indices are not distinct.
//!
//! The inverse σ_k operator F(A) = S_k(A⁻¹) = S_{n−k}(A)/S_n(A) has, at
//! a diagonal matrix A with eigenvalues λ_i, the derivatives
//!
//! ```text
//! ∂_ii F        = −S_{n−k;i} / (λ_i S_n)
//! ∂_ii ∂_jj F   =  S_{n−k;i,j} / (λ_i λ_j S_n)                i ≠ j
//! ∂_ij ∂_ji F   = (S_{n−k;i} + λ_i S_{n−k−1;i,j}) / (λ_i λ_j S_n)   i ≠ j
//! ∂_ii ∂_ii F   = 2 S_{n−k;i} / (λ_i² S_n)
//! ```
//!
//! with every other first/second derivative equal to zero. These are
//! the only patterns this module stores. All operations are pure
//! functions of value-semantic inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Threshold below which S_k is evaluated by exact subset enumeration;
/// larger spectra use the one-variable-at-a-time product recursion,
/// which is subtraction-free for positive entries.
const ENUMERATION_LIMIT: usize = 12;

/// Ordered list of eigenvalues of a metric endomorphism.
///
/// The length fixes the ambient dimension n. Entries must be strictly
/// positive wherever the value is used as the spectrum of a metric
/// pairing; construction itself only requires finiteness so that
/// deleted evaluations (which zero out entries) remain representable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("spectrum must have length n ≥ 1"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("spectrum entries must be finite"));
        }
        Ok(Spectrum { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.values.iter().all(|&v| v > 0.0)
    }

    /// Entrywise reciprocal; errors on zero entries.
    pub fn reciprocal(&self) -> Result<Spectrum> {
        if self.values.iter().any(|&v| v == 0.0) {
            return Err(Error::domain("cannot invert a spectrum with zero entries"));
        }
        Spectrum::new(self.values.iter().map(|v| 1.0 / v).collect())
    }

    /// Spectrum of a symmetric matrix, for callers holding a general
    /// (non-diagonal) endomorphism: all the derivative formulas are
    /// spectral, so diagonalize first.
    pub fn from_symmetric(m: &crate::linalg::SquareMatrix) -> Result<Spectrum> {
        Spectrum::new(crate::linalg::symmetric_eigenvalues(m)?)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Sorted set of distinct deletion indices (0-based, within 0..n).
///
/// The evaluation convention for *repeated* indices (value 0) is
/// handled by [`elem_sym_deleted_raw`], which accepts an arbitrary raw
/// index list; this type stores only the distinct case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeletionIndexSet {
    indices: Vec<usize>,
}

impl DeletionIndexSet {
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::domain("deletion indices must be distinct"));
        }
        Ok(DeletionIndexSet { indices })
    }

    pub fn empty() -> Self {
        DeletionIndexSet { indices: Vec::new() }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}

fn check_k(k: i64, n: usize) -> Result<()> {
    if k < -1 || k > n as i64 {
        return Err(Error::domain(format!(
            "degree k = {k} outside the admissible range -1..={n}"
        )));
    }
    Ok(())
}

/// S_k by exact enumeration of k-subsets.
fn sk_enumerate(vals: &[f64], k: usize) -> f64 {
    let n = vals.len();
    if k == 0 {
        return 1.0;
    }
    if k > n {
        return 0.0;
    }
    let mut subset: Vec<usize> = (0..k).collect();
    let mut total = 0.0;
    loop {
        total += subset.iter().map(|&i| vals[i]).product::<f64>();
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

/// All of S₀..S_n at once via the product recursion
/// e_k ← e_k + λ·e_{k−1}, one variable at a time.
fn sk_recursive_all(vals: &[f64]) -> Vec<f64> {
    let n = vals.len();
    let mut e = vec![0.0; n + 1];
    e[0] = 1.0;
    for (m, &v) in vals.iter().enumerate() {
        for k in (1..=(m + 1)).rev() {
            e[k] += v * e[k - 1];
        }
    }
    e
}

fn sk(vals: &[f64], k: i64) -> f64 {
    if k == -1 {
        return 0.0;
    }
    if k == 0 {
        return 1.0;
    }
    let k = k as usize;
    if vals.len() <= ENUMERATION_LIMIT {
        sk_enumerate(vals, k)
    } else {
        sk_recursive_all(vals)[k.min(vals.len())]
    }
}

/// Elementary symmetric function S_k(λ), with S₀ = 1 and S₋₁ = 0.
///
/// Errors when k lies outside −1..=n.
pub fn elem_sym(k: i64, lambda: &Spectrum) -> Result<f64> {
    check_k(k, lambda.dim())?;
    Ok(sk(lambda.values(), k))
}

/// Deleted symmetric function S_{k; i₁,…,i_l}(λ) for distinct indices.
pub fn elem_sym_deleted(k: i64, del: &DeletionIndexSet, lambda: &Spectrum) -> Result<f64> {
    let n = lambda.dim();
    check_k(k, n)?;
    if del.indices().iter().any(|&i| i >= n) {
        return Err(Error::domain("deletion index out of range"));
    }
    Ok(sk_deleted_distinct(lambda.values(), k, del.indices()))
}

/// Deleted symmetric function for a raw index list: repeated indices
/// yield 0 by convention.
pub fn elem_sym_deleted_raw(k: i64, indices: &[usize], lambda: &Spectrum) -> Result<f64> {
    let n = lambda.dim();
    check_k(k, n)?;
    if indices.iter().any(|&i| i >= n) {
        return Err(Error::domain("deletion index out of range"));
    }
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Ok(0.0);
    }
    Ok(sk_deleted_distinct(lambda.values(), k, &sorted))
}

/// Setting λ_i = 0 for i in the deletion set is the same as removing
/// those variables, since zero entries contribute nothing to S_k.
fn sk_deleted_distinct(vals: &[f64], k: i64, deleted_sorted: &[usize]) -> f64 {
    if k == -1 {
        return 0.0;
    }
    let filtered: Vec<f64> = vals
        .iter()
        .enumerate()
        .filter(|(i, _)| deleted_sorted.binary_search(i).is_err())
        .map(|(_, &v)| v)
        .collect();
    sk(&filtered, k)
}

/// Diagonal of the gradient of F(A) = S_k(A⁻¹) at the diagonal matrix
/// with spectrum λ: ∂_ii F = −S_{n−k;i}/(λ_i S_n). Off-diagonal
/// entries of the gradient vanish.
pub fn grad_inverse_sigma(k: usize, lambda: &Spectrum) -> Result<Vec<f64>> {
    let n = lambda.dim();
    if k > n {
        return Err(Error::domain(format!("grad_inverse_sigma: k = {k} exceeds n = {n}")));
    }
    if !lambda.is_strictly_positive() {
        return Err(Error::domain("grad_inverse_sigma requires a strictly positive spectrum"));
    }
    let vals = lambda.values();
    let s_n: f64 = vals.iter().product();
    let mut diag = vec![0.0; n];
    for i in 0..n {
        let s_del = sk_deleted_distinct(vals, (n - k) as i64, &[i]);
        diag[i] = -s_del / (vals[i] * s_n);
    }
    Ok(diag)
}

/// Second derivatives of F(A) = S_k(A⁻¹) at a diagonal matrix, stored
/// sparsely by nonzero pattern.
///
/// `diag_pairs[(i, j)]` holds ∂_ii ∂_jj F (for i = j this is the value
/// ∂_ii ∂_ii F), and `transpose_pairs[(i, j)]` holds ∂_ij ∂_ji F for
/// i ≠ j. Every index combination outside these patterns is exactly
/// zero; [`SymHessian::entry`] exposes the full rank-4 indexing.
#[derive(Debug, Clone)]
pub struct SymHessian {
    n: usize,
    diag_pairs: Vec<f64>,
    transpose_pairs: Vec<f64>,
}

impl SymHessian {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn diag_pair(&self, i: usize, j: usize) -> f64 {
        self.diag_pairs[i * self.n + j]
    }

    pub fn transpose_pair(&self, i: usize, j: usize) -> f64 {
        self.transpose_pairs[i * self.n + j]
    }

    /// Full rank-4 entry ∂_ij ∂_rs F; zero off the stored patterns.
    pub fn entry(&self, i: usize, j: usize, r: usize, s: usize) -> f64 {
        if i == j && r == s {
            self.diag_pair(i, r)
        } else if i != j && r == j && s == i {
            self.transpose_pair(i, j)
        } else {
            0.0
        }
    }
}

/// Hessian of F(A) = S_k(A⁻¹) at the diagonal matrix with spectrum λ.
pub fn hessian_inverse_sigma(k: usize, lambda: &Spectrum) -> Result<SymHessian> {
    let n = lambda.dim();
    if k > n {
        return Err(Error::domain(format!(
            "hessian_inverse_sigma: k = {k} exceeds n = {n}"
        )));
    }
    if !lambda.is_strictly_positive() {
        return Err(Error::domain(
            "hessian_inverse_sigma requires a strictly positive spectrum",
        ));
    }
    hessian_weights_unchecked(&unit_weight(k, n), lambda)
}

fn unit_weight(k: usize, n: usize) -> Vec<f64> {
    let mut w = vec![0.0; n + 1];
    w[k] = 1.0;
    w
}

/// Hessian for a weighted combination F = Σ_k w_k S_k(A⁻¹); the weight
/// vector is indexed by degree, w[0]..w[n].
fn hessian_weights_unchecked(w: &[f64], lambda: &Spectrum) -> Result<SymHessian> {
    let n = lambda.dim();
    let vals = lambda.values();
    let s_n: f64 = vals.iter().product();
    let mut diag_pairs = vec![0.0; n * n];
    let mut transpose_pairs = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut dp = 0.0;
            let mut tp = 0.0;
            for (k, &wk) in w.iter().enumerate() {
                if wk == 0.0 {
                    continue;
                }
                let nk = n as i64 - k as i64;
                if i == j {
                    let s_i = sk_deleted_distinct(vals, nk, &[i]);
                    dp += wk * 2.0 * s_i / (vals[i] * vals[i] * s_n);
                } else {
                    let s_ij = sk_deleted_distinct(vals, nk, &[i.min(j), i.max(j)]);
                    dp += wk * s_ij / (vals[i] * vals[j] * s_n);
                    let s_i = sk_deleted_distinct(vals, nk, &[i]);
                    let s_ij_lower = sk_deleted_distinct(vals, nk - 1, &[i.min(j), i.max(j)]);
                    tp += wk * (s_i + vals[i] * s_ij_lower) / (vals[i] * vals[j] * s_n);
                }
            }
            diag_pairs[i * n + j] = dp;
            transpose_pairs[i * n + j] = if i == j { 0.0 } else { tp };
        }
    }
    Ok(SymHessian { n, diag_pairs, transpose_pairs })
}

fn grad_weights_unchecked(w: &[f64], lambda: &Spectrum) -> Vec<f64> {
    let n = lambda.dim();
    let vals = lambda.values();
    let s_n: f64 = vals.iter().product();
    let mut diag = vec![0.0; n];
    for i in 0..n {
        let mut g = 0.0;
        for (k, &wk) in w.iter().enumerate() {
            if wk == 0.0 {
                continue;
            }
            let s_del = sk_deleted_distinct(vals, n as i64 - k as i64, &[i]);
            g -= wk * s_del / (vals[i] * s_n);
        }
        diag[i] = g;
    }
    diag
}

/// Weight vector for a combination F(A) = Σ_{k=1}^n w_k S_k(A⁻¹),
/// together with an optional eigenvalue floor marking the validity
/// region when negative weights (deflation) are present.
///
/// This is the kernel-level view of an operator: the operator module
/// folds its σ-weights, Laplacian and determinant terms into one such
/// vector before calling into the derivative machinery.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaWeights {
    weights: Vec<f64>,
    floor: Option<f64>,
}

impl SigmaWeights {
    /// `weights[k]` multiplies S_k(A⁻¹), for k = 0..=n (the k = 0 slot
    /// is a constant offset and does not affect derivatives).
    pub fn new(weights: Vec<f64>, floor: Option<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::domain("weight vector must cover degrees 0..=n with n ≥ 1"));
        }
        if let Some(d) = floor {
            if d <= 0.0 {
                return Err(Error::domain("eigenvalue floor must be positive"));
            }
        }
        Ok(SigmaWeights { weights, floor })
    }

    pub fn dim(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn floor(&self) -> Option<f64> {
        self.floor
    }

    fn check_region(&self, lambda: &Spectrum) -> Result<()> {
        if lambda.dim() != self.dim() {
            return Err(Error::domain(format!(
                "spectrum length {} does not match weight dimension {}",
                lambda.dim(),
                self.dim()
            )));
        }
        if !lambda.is_strictly_positive() {
            return Err(Error::domain("spectrum must be strictly positive"));
        }
        if let Some(d) = self.floor {
            if lambda.values().iter().any(|&v| v <= d) {
                return Err(Error::region(format!(
                    "spectrum entry at or below the declared eigenvalue floor {d}"
                )));
            }
        }
        Ok(())
    }

    /// F(λ) = Σ_k w_k S_k(λ⁻¹).
    pub fn eval(&self, lambda: &Spectrum) -> Result<f64> {
        self.check_region(lambda)?;
        let recip = lambda.reciprocal()?;
        let mut f = 0.0;
        for (k, &wk) in self.weights.iter().enumerate() {
            if wk != 0.0 {
                f += wk * sk(recip.values(), k as i64);
            }
        }
        Ok(f)
    }

    pub fn gradient(&self, lambda: &Spectrum) -> Result<Vec<f64>> {
        self.check_region(lambda)?;
        Ok(grad_weights_unchecked(&self.weights, lambda))
    }

    pub fn hessian(&self, lambda: &Spectrum) -> Result<SymHessian> {
        self.check_region(lambda)?;
        hessian_weights_unchecked(&self.weights, lambda)
    }
}

/// Left-hand side of the convexity inequality for F = Σ w_k S_k(A⁻¹)
/// at a diagonal matrix with spectrum λ:
///
/// ```text
/// Σ_{pqrs} B_rs conj(B_qp) ∂_pq∂_rs F(A) + Σ_{ij} |B_ij|² ∂_ii F(A)/λ_j.
/// ```
///
/// The complex matrix B is passed as the pair (re, im) of row-major
/// n×n real matrices. On the validity region of the weights the value
/// is nonnegative up to rounding.
pub fn convexity_form(
    weights: &SigmaWeights,
    lambda: &Spectrum,
    b_re: &[f64],
    b_im: &[f64],
) -> Result<f64> {
    let n = weights.dim();
    if b_re.len() != n * n || b_im.len() != n * n {
        return Err(Error::domain("perturbation matrix must be n×n"));
    }
    weights.check_region(lambda)?;
    let grad = grad_weights_unchecked(weights.weights(), lambda);
    let hess = hessian_weights_unchecked(weights.weights(), lambda)?;
    let vals = lambda.values();

    let b = |i: usize, j: usize| (b_re[i * n + j], b_im[i * n + j]);
    let abs2 = |(re, im): (f64, f64)| re * re + im * im;

    // Σ B_rs conj(B_qp) ∂_pq∂_rs F over the three nonzero patterns.
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                quad += abs2(b(i, i)) * hess.diag_pair(i, i);
            } else {
                // (pq, rs) = (ii, jj): B_jj · conj(B_ii)
                let (re_i, im_i) = b(i, i);
                let (re_j, im_j) = b(j, j);
                quad += (re_i * re_j + im_i * im_j) * hess.diag_pair(i, j);
                // (pq, rs) = (ij, ji): |B_ji|²
                quad += abs2(b(j, i)) * hess.transpose_pair(i, j);
            }
        }
    }

    let mut first_order = 0.0;
    for i in 0..n {
        for j in 0..n {
            first_order += abs2(b(i, j)) * grad[i] / vals[j];
        }
    }
    Ok(quad + first_order)
}
