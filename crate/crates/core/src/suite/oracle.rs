//! Independent oracles for the verification battery.
//!
//! The derivative oracle evaluates F(A) = S_k(A⁻¹) as the ratio of
//! characteristic-polynomial coefficients S_{n−k}(A)/S_n(A) (sums of
//! principal minors), which is defined for arbitrary matrix
//! perturbations of a diagonal A without any eigendecomposition — an
//! evaluation path entirely independent of the closed-form derivative
//! kernel it checks.

use crate::linalg::SquareMatrix;

/// F(A) = S_k(A⁻¹) via principal minors.
pub fn inverse_sigma_value(a: &SquareMatrix, k: usize) -> f64 {
    let n = a.dim();
    a.principal_minor_sum(n - k) / a.principal_minor_sum(n)
}

fn diagonal(lambda: &[f64]) -> SquareMatrix {
    let n = lambda.len();
    let mut m = SquareMatrix::zeros(n);
    for (i, &v) in lambda.iter().enumerate() {
        m[(i, i)] = v;
    }
    m
}

/// Central finite difference of S_k(A⁻¹) in the (i, j) entry at the
/// diagonal matrix with the given spectrum.
pub fn fd_gradient_entry(lambda: &[f64], k: usize, i: usize, j: usize, step: f64) -> f64 {
    let mut plus = diagonal(lambda);
    plus[(i, j)] += step;
    let mut minus = diagonal(lambda);
    minus[(i, j)] -= step;
    (inverse_sigma_value(&plus, k) - inverse_sigma_value(&minus, k)) / (2.0 * step)
}

/// Central second finite difference ∂_{ij}∂_{rs} S_k(A⁻¹) at a
/// diagonal matrix.
pub fn fd_hessian_entry(
    lambda: &[f64],
    k: usize,
    (i, j): (usize, usize),
    (r, s): (usize, usize),
    step: f64,
) -> f64 {
    if (i, j) == (r, s) {
        let mut plus = diagonal(lambda);
        plus[(i, j)] += step;
        let mut minus = diagonal(lambda);
        minus[(i, j)] -= step;
        let center = diagonal(lambda);
        (inverse_sigma_value(&plus, k) - 2.0 * inverse_sigma_value(&center, k)
            + inverse_sigma_value(&minus, k))
            / (step * step)
    } else {
        let mut pp = diagonal(lambda);
        pp[(i, j)] += step;
        pp[(r, s)] += step;
        let mut pm = diagonal(lambda);
        pm[(i, j)] += step;
        pm[(r, s)] -= step;
        let mut mp = diagonal(lambda);
        mp[(i, j)] -= step;
        mp[(r, s)] += step;
        let mut mm = diagonal(lambda);
        mm[(i, j)] -= step;
        mm[(r, s)] -= step;
        (inverse_sigma_value(&pp, k) - inverse_sigma_value(&pm, k)
            - inverse_sigma_value(&mp, k)
            + inverse_sigma_value(&mm, k))
            / (4.0 * step * step)
    }
}
