//! Parabolic flow integration on the invariant torus reduction.
//!
//! Torus-invariant Kähler data reduces to a periodic potential φ on
//! [0,1)ⁿ with metric ω = G₀ + D²φ (second-order central differences
//! for the discrete Hessian). With A = α⁻¹ω the flow
//!
//! ```text
//! ∂φ/∂t = c − F(A),      c chosen so ∫ (c − F(A))·det ω = 0 at φ = 0,
//! ```
//!
//! is the negative gradient flow of the functional J with variational
//! derivative ∫ φ̇ (F(A) − c) det ω; along it sup F(A) is nonincreasing
//! and J dissipates at rate −∫(F − c)² det ω. Forward Euler with an
//! adaptive CFL-style step and admissibility safeguarding is the
//! default integrator; a semi-implicit (gradient-damped) variant is
//! available for stiff deflated runs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymMat2;
use crate::operators::{OperatorSpec, Region};

/// One Fourier mode of a synthesized periodic field:
/// amplitude·cos(2π(k·x) + phase).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigMode {
    pub amplitude: f64,
    pub freq: Vec<i32>,
    #[serde(default)]
    pub phase: f64,
}

/// Periodic scalar potential on a uniform N-per-axis grid over the
/// n-torus (n = 1 or 2), stored row-major with x fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialField {
    pub n: usize,
    pub grid: usize,
    pub values: Vec<f64>,
}

impl PotentialField {
    pub fn zero(n: usize, grid: usize) -> Result<Self> {
        check_dims(n, grid)?;
        Ok(PotentialField { n, grid, values: vec![0.0; grid.pow(n as u32)] })
    }

    pub fn from_fn(n: usize, grid: usize, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        check_dims(n, grid)?;
        let h = 1.0 / grid as f64;
        let count = grid.pow(n as u32);
        let mut values = vec![0.0; count];
        for (idx, v) in values.iter_mut().enumerate() {
            let (ix, iy) = (idx % grid, idx / grid);
            let x = [ix as f64 * h, iy as f64 * h];
            *v = f(&x[..n]);
        }
        Ok(PotentialField { n, grid, values })
    }

    pub fn from_modes(n: usize, grid: usize, modes: &[TrigMode]) -> Result<Self> {
        for m in modes {
            if m.freq.len() != n {
                return Err(Error::domain("trig mode frequency length must equal n"));
            }
        }
        Self::from_fn(n, grid, |x| {
            modes
                .iter()
                .map(|m| {
                    let dot: f64 =
                        m.freq.iter().zip(x.iter()).map(|(&k, &xi)| k as f64 * xi).sum();
                    m.amplitude * (std::f64::consts::TAU * dot + m.phase).cos()
                })
                .sum()
        })
    }

    pub fn node_count(&self) -> usize {
        self.values.len()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn subtract_mean(&mut self) {
        let m = self.mean();
        for v in self.values.iter_mut() {
            *v -= m;
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, &v| a.max(v.abs()))
    }

    /// Discrete Hessian at a node by periodic central differences.
    pub fn hessian_at(&self, ix: usize, iy: usize) -> SymMat2 {
        let grid = self.grid;
        let h2 = (grid as f64) * (grid as f64);
        let at = |ix: isize, iy: isize| -> f64 {
            let ix = ix.rem_euclid(grid as isize) as usize;
            let iy = iy.rem_euclid(grid as isize) as usize;
            self.values[iy * grid + ix]
        };
        let (x, y) = (ix as isize, iy as isize);
        if self.n == 1 {
            let xx = (at(x + 1, 0) - 2.0 * at(x, 0) + at(x - 1, 0)) * h2;
            return SymMat2::scalar(xx);
        }
        let center = at(x, y);
        let xx = (at(x + 1, y) - 2.0 * center + at(x - 1, y)) * h2;
        let yy = (at(x, y + 1) - 2.0 * center + at(x, y - 1)) * h2;
        let xy = (at(x + 1, y + 1) - at(x + 1, y - 1) - at(x - 1, y + 1) + at(x - 1, y - 1))
            * h2
            * 0.25;
        SymMat2 { a11: xx, a12: xy, a22: yy }
    }
}

fn check_dims(n: usize, grid: usize) -> Result<()> {
    if !(n == 1 || n == 2) {
        return Err(Error::domain("reduced dimension must be 1 or 2"));
    }
    if grid < 4 {
        return Err(Error::domain("grid resolution must be at least 4"));
    }
    Ok(())
}

/// Invariant-frame problem data: a positive background G₀, a positive
/// definite α-field, and the operator to flow by.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TorusProblem {
    pub n: usize,
    pub grid: usize,
    pub g0: SymMat2,
    /// α in the invariant frame, one symmetric matrix per node.
    pub alpha: Vec<SymMat2>,
    pub spec: OperatorSpec,
}

impl TorusProblem {
    pub fn with_constant_alpha(
        n: usize,
        grid: usize,
        alpha: SymMat2,
        g0: SymMat2,
        spec: OperatorSpec,
    ) -> Result<Self> {
        check_dims(n, grid)?;
        let prob = TorusProblem {
            n,
            grid,
            g0,
            alpha: vec![alpha; grid.pow(n as u32)],
            spec,
        };
        prob.validate()?;
        Ok(prob)
    }

    /// Replace α by α + D²ψ (a change of background inside the same
    /// class), keeping everything else.
    pub fn with_background_shift(&self, psi: &PotentialField) -> Result<Self> {
        if psi.n != self.n || psi.grid != self.grid {
            return Err(Error::domain("background shift grid mismatch"));
        }
        let mut alpha = self.alpha.clone();
        for iy in 0..grid_y(self.n, self.grid) {
            for ix in 0..self.grid {
                let idx = iy * self.grid + ix;
                alpha[idx] = alpha[idx].add(&psi.hessian_at(ix, iy));
            }
        }
        let shifted = TorusProblem { alpha, ..self.clone() };
        shifted.validate()?;
        Ok(shifted)
    }

    pub fn validate(&self) -> Result<()> {
        check_dims(self.n, self.grid)?;
        self.spec.validate()?;
        if self.spec.dim() != self.n {
            return Err(Error::domain("operator dimension must match the reduced dimension"));
        }
        if self.alpha.len() != self.grid.pow(self.n as u32) {
            return Err(Error::domain("alpha field has the wrong node count"));
        }
        if !self.g0.is_positive_definite(self.n) {
            return Err(Error::domain("background G₀ must be positive definite"));
        }
        for (idx, a) in self.alpha.iter().enumerate() {
            if !a.is_positive_definite(self.n) {
                return Err(Error::DegenerateMetric {
                    node: node_coords(self.n, self.grid, idx),
                    detail: "alpha field not positive definite".into(),
                });
            }
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.grid.pow(self.n as u32)
    }

    fn cell_measure(&self) -> f64 {
        (1.0 / self.grid as f64).powi(self.n as i32)
    }
}

fn grid_y(n: usize, grid: usize) -> usize {
    if n == 1 {
        1
    } else {
        grid
    }
}

fn node_coords(n: usize, grid: usize, idx: usize) -> Vec<usize> {
    if n == 1 {
        vec![idx]
    } else {
        vec![idx % grid, idx / grid]
    }
}

/// Per-node spectra of A = α⁻¹ω together with det ω and F(A).
#[derive(Debug, Clone)]
pub struct AssembledField {
    pub n: usize,
    /// Eigenvalues of A per node, ascending, stride n.
    pub spectra: Vec<f64>,
    pub det_omega: Vec<f64>,
    pub f_values: Vec<f64>,
}

impl AssembledField {
    pub fn spectrum_at(&self, idx: usize) -> &[f64] {
        &self.spectra[idx * self.n..(idx + 1) * self.n]
    }

    pub fn sup_f(&self) -> f64 {
        self.f_values.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(v))
    }

    pub fn residual(&self, c: f64) -> f64 {
        self.f_values.iter().fold(0.0f64, |a, &v| a.max((v - c).abs()))
    }

    /// ∫ (F − c)² det ω over the torus.
    fn dissipation(&self, c: f64, cell: f64) -> f64 {
        self.f_values
            .iter()
            .zip(self.det_omega.iter())
            .map(|(&f, &d)| (f - c) * (f - c) * d)
            .sum::<f64>()
            * cell
    }
}

/// Fast evaluation of F on a spectrum of length ≤ 2 from the collapsed
/// weight vector (w[k] multiplies S_k(A⁻¹)).
fn eval_weights(n: usize, w: &[f64], lam: &[f64]) -> f64 {
    match n {
        1 => w[1] / lam[0],
        _ => {
            let (l1, l2) = (lam[0], lam[1]);
            w[1] * (1.0 / l1 + 1.0 / l2) + w[2] / (l1 * l2)
        }
    }
}

/// Largest |∂F/∂λ_i| on a spectrum, for the CFL heuristic.
fn max_slope(n: usize, w: &[f64], lam: &[f64]) -> f64 {
    match n {
        1 => (w[1] / (lam[0] * lam[0])).abs(),
        _ => {
            let (l1, l2) = (lam[0], lam[1]);
            let s1 = ((w[1] + w[2] / l2) / (l1 * l1)).abs();
            let s2 = ((w[1] + w[2] / l1) / (l2 * l2)).abs();
            s1.max(s2)
        }
    }
}

fn region_ok(region: &Region, lam: &[f64]) -> bool {
    match *region {
        Region::AllPositive => lam.iter().all(|&v| v > 0.0),
        Region::EigenvalueFloor { delta } => lam.iter().all(|&v| v > delta),
        Region::Sublevel { q } => lam.iter().map(|&v| 1.0 / v).sum::<f64>() < q,
    }
}

/// Assemble ω = G₀ + D²φ, the spectra of A = α⁻¹ω, det ω and F(A) at
/// every node. Errors with the node location if ω degenerates or the
/// spectrum leaves the operator's region.
pub fn assemble_a(prob: &TorusProblem, phi: &PotentialField) -> Result<AssembledField> {
    if phi.n != prob.n || phi.grid != prob.grid {
        return Err(Error::domain("potential grid does not match the problem"));
    }
    let n = prob.n;
    let count = prob.node_count();
    let w = prob.spec.sigma_weights()?;
    let w = w.weights().to_vec();
    let region = prob.spec.region;

    let mut spectra = vec![0.0; count * n];
    let mut det_omega = vec![0.0; count];
    let mut f_values = vec![0.0; count];

    let grid = prob.grid;
    let results: Vec<Result<()>> = spectra
        .par_chunks_mut(n)
        .zip(det_omega.par_iter_mut())
        .zip(f_values.par_iter_mut())
        .enumerate()
        .map(|(idx, ((spec_out, det_out), f_out))| {
            let (ix, iy) = (idx % grid, idx / grid);
            let omega = prob.g0.add(&phi.hessian_at(ix, iy));
            if !omega.is_positive_definite(n) {
                return Err(Error::DegenerateMetric {
                    node: node_coords(n, grid, idx),
                    detail: format!("ω = G₀ + D²φ lost positivity: {omega:?}"),
                });
            }
            let lam = SymMat2::pencil_eigenvalues(&omega, &prob.alpha[idx], n)?;
            if !region_ok(&region, &lam) {
                return Err(Error::region(format!(
                    "spectrum {lam:?} left the operator region at node {:?}",
                    node_coords(n, grid, idx)
                )));
            }
            spec_out.copy_from_slice(&lam);
            *det_out = prob.alpha[idx].det(n) * lam.iter().product::<f64>();
            *f_out = eval_weights(n, &w, &lam);
            Ok(())
        })
        .collect();
    for r in results {
        r?;
    }
    Ok(AssembledField { n, spectra, det_omega, f_values })
}

/// Normalizing constant from class data: quadrature of F(A)·det ω
/// against det ω at the given potential.
pub fn normalizing_constant_at(prob: &TorusProblem, phi: &PotentialField) -> Result<f64> {
    let asm = assemble_a(prob, phi)?;
    let num: f64 = asm
        .f_values
        .iter()
        .zip(asm.det_omega.iter())
        .map(|(&f, &d)| f * d)
        .sum();
    let den: f64 = asm.det_omega.iter().sum();
    Ok(num / den)
}

/// Normalizing constant at φ = 0 (it depends only on class data, up to
/// quadrature error).
pub fn normalizing_constant(prob: &TorusProblem) -> Result<f64> {
    normalizing_constant_at(prob, &PotentialField::zero(prob.n, prob.grid)?)
}

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stepper {
    #[default]
    ForwardEuler,
    /// Forward Euler on the gradient direction with the update damped
    /// by 1/(1 + dt·s̄) where s̄ is the current stiffness estimate;
    /// useful for deflated runs where the explicit CFL bound is harsh.
    SemiImplicit,
}

/// Flow state: potential, normalization, and running diagnostics.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: f64,
    pub phi: PotentialField,
    pub c: f64,
    pub sup_f: f64,
    pub residual: f64,
    /// Accumulated functional value along the flow path.
    pub j_value: f64,
    assembled: AssembledField,
}

impl FlowState {
    pub fn new(prob: &TorusProblem, phi0: PotentialField) -> Result<Self> {
        let mut phi = phi0;
        phi.subtract_mean();
        let c = normalizing_constant(prob)?;
        let assembled = assemble_a(prob, &phi)?;
        let j_value = j_functional(prob, &phi, 33)?;
        Ok(FlowState {
            t: 0.0,
            c,
            sup_f: assembled.sup_f(),
            residual: assembled.residual(c),
            j_value,
            phi,
            assembled,
        })
    }

    pub fn assembled(&self) -> &AssembledField {
        &self.assembled
    }
}

/// One row of the run trace.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub t: f64,
    pub residual: f64,
    pub sup_f: f64,
    pub j: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowOutcome {
    Converged,
    TimedOut,
}

/// A completed run: final state, trace, and monotonicity bookkeeping.
#[derive(Debug)]
pub struct FlowRun {
    pub state: FlowState,
    pub trace: Vec<TraceRow>,
    pub outcome: FlowOutcome,
    /// Steps on which sup F increased by more than the per-step
    /// tolerance (reported, never silently tolerated).
    pub sup_f_violations: usize,
    pub max_sup_f_increase: f64,
    pub steps: usize,
}

/// Per-step tolerance for the discrete maximum-principle and energy
/// monotonicity contracts.
pub const MONOTONE_TOL: f64 = 1e-8;

/// Advance the flow by one step of at most `dt`, halving on
/// admissibility failure. Returns the new state and the dt actually
/// taken.
pub fn step(
    prob: &TorusProblem,
    state: &FlowState,
    dt: f64,
    scheme: Stepper,
) -> Result<(FlowState, f64)> {
    if !(dt > 0.0) {
        return Err(Error::domain("time step must be positive"));
    }
    let cell = prob.cell_measure();
    let mut dt_try = dt;
    for _attempt in 0..60 {
        let mut phi_new = state.phi.clone();
        let damp = match scheme {
            Stepper::ForwardEuler => 1.0,
            Stepper::SemiImplicit => {
                let s = stiffness(prob, &state.assembled);
                1.0 / (1.0 + dt_try * s)
            }
        };
        for (v, &f) in phi_new.values.iter_mut().zip(state.assembled.f_values.iter()) {
            *v += dt_try * damp * (state.c - f);
        }
        phi_new.subtract_mean();
        match assemble_a(prob, &phi_new) {
            Ok(assembled) => {
                let j_step = 0.5
                    * dt_try
                    * (state.assembled.dissipation(state.c, cell)
                        + assembled.dissipation(state.c, cell));
                let new_state = FlowState {
                    t: state.t + dt_try,
                    c: state.c,
                    sup_f: assembled.sup_f(),
                    residual: assembled.residual(state.c),
                    j_value: state.j_value - j_step,
                    phi: phi_new,
                    assembled,
                };
                return Ok((new_state, dt_try));
            }
            Err(Error::DegenerateMetric { .. }) | Err(Error::Region(_)) => {
                dt_try *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::NonConvergence(
        "flow step rejected repeatedly: admissibility could not be maintained".into(),
    ))
}

/// Stiffness bound max_i (−∂F/∂λ_i)·‖α⁻¹‖ over the grid.
fn stiffness(prob: &TorusProblem, asm: &AssembledField) -> f64 {
    let w = prob
        .spec
        .sigma_weights()
        .expect("validated spec")
        .weights()
        .to_vec();
    let n = prob.n;
    let mut s: f64 = 0.0;
    for idx in 0..prob.node_count() {
        let lam = asm.spectrum_at(idx);
        let slope = max_slope(n, &w, lam);
        let a = &prob.alpha[idx];
        let inv_min = 1.0 / a.min_eigenvalue(n).max(1e-300);
        s = s.max(slope * inv_min);
    }
    s
}

/// CFL-style step bound dt ≤ 0.8·h²/(2n·D), D the stiffness estimate.
fn heuristic_dt(prob: &TorusProblem, asm: &AssembledField) -> f64 {
    let h = 1.0 / prob.grid as f64;
    let d = stiffness(prob, asm).max(1e-12);
    0.8 * h * h / (2.0 * prob.n as f64 * d)
}

/// Integrate until the residual drops below `tol` or t reaches
/// `t_max`; the trace carries (t, residual, sup F, J, dt) per step.
pub fn run(
    prob: &TorusProblem,
    phi0: PotentialField,
    tol: f64,
    t_max: f64,
    scheme: Stepper,
) -> Result<FlowRun> {
    let mut state = FlowState::new(prob, phi0)?;
    let mut trace = Vec::new();
    trace.push(TraceRow {
        t: 0.0,
        residual: state.residual,
        sup_f: state.sup_f,
        j: state.j_value,
        dt: 0.0,
    });
    let mut violations = 0usize;
    let mut max_increase: f64 = 0.0;
    let mut steps = 0usize;
    while state.residual >= tol && state.t < t_max {
        let dt = heuristic_dt(prob, &state.assembled).min(t_max - state.t);
        let (next, dt_used) = step(prob, &state, dt, scheme)?;
        let increase = next.sup_f - state.sup_f;
        if increase > MONOTONE_TOL {
            violations += 1;
            max_increase = max_increase.max(increase);
        }
        state = next;
        steps += 1;
        trace.push(TraceRow {
            t: state.t,
            residual: state.residual,
            sup_f: state.sup_f,
            j: state.j_value,
            dt: dt_used,
        });
        if steps > 50_000_000 {
            return Err(Error::NonConvergence("flow exceeded the step budget".into()));
        }
    }
    let outcome =
        if state.residual < tol { FlowOutcome::Converged } else { FlowOutcome::TimedOut };
    Ok(FlowRun {
        state,
        trace,
        outcome,
        sup_f_violations: violations,
        max_sup_f_increase: max_increase,
        steps,
    })
}

/// J(G₀ + D²φ) by Simpson quadrature in t along the linear path t·φ,
/// normalized to J(G₀) = 0. `path_nodes` must be odd and ≥ 3; errors
/// carry the first inadmissible path time.
pub fn j_functional(prob: &TorusProblem, phi: &PotentialField, path_nodes: usize) -> Result<f64> {
    if path_nodes < 3 || path_nodes % 2 == 0 {
        return Err(Error::domain("Simpson path quadrature needs an odd node count ≥ 3"));
    }
    let c = normalizing_constant(prob)?;
    let cell = prob.cell_measure();
    let ht = 1.0 / (path_nodes - 1) as f64;
    let mut total = 0.0;
    for node in 0..path_nodes {
        let t = node as f64 * ht;
        let mut phi_t = phi.clone();
        for v in phi_t.values.iter_mut() {
            *v *= t;
        }
        let asm = assemble_a(prob, &phi_t)
            .map_err(|e| Error::domain(format!("path admissibility fails at t = {t}: {e}")))?;
        let integrand: f64 = phi
            .values
            .iter()
            .zip(asm.f_values.iter().zip(asm.det_omega.iter()))
            .map(|(&p, (&f, &d))| p * (f - c) * d)
            .sum::<f64>()
            * cell;
        let weight = if node == 0 || node == path_nodes - 1 {
            1.0
        } else if node % 2 == 1 {
            4.0
        } else {
            2.0
        };
        total += weight * integrand;
    }
    Ok(total * ht / 3.0)
}

/// Change-of-background discrepancy: computes J_β(ω) − J_α(ω) for
/// β = α + D²ψ both by path quadrature and by the closed form
/// (n−1)!·∫ψ(det ω₁ − det ω₀) (the wedge-power identity
/// (1/n)∫ψ(ω₁ⁿ − ω₀ⁿ) written in the determinant normalization), and
/// returns the difference between the two routes.
pub fn background_change_delta(
    prob: &TorusProblem,
    psi: &PotentialField,
    phi: &PotentialField,
    path_nodes: usize,
) -> Result<f64> {
    let beta_prob = prob.with_background_shift(psi)?;
    let j_beta = j_functional(&beta_prob, phi, path_nodes)?;
    let j_alpha = j_functional(prob, phi, path_nodes)?;

    let cell = prob.cell_measure();
    let grid = prob.grid;
    let mut closed = 0.0;
    for iy in 0..grid_y(prob.n, grid) {
        for ix in 0..grid {
            let idx = iy * grid + ix;
            let omega1 = prob.g0.add(&phi.hessian_at(ix, iy));
            closed += psi.values[idx] * (omega1.det(prob.n) - prob.g0.det(prob.n));
        }
    }
    // (n−1)! = 1 for the supported n ≤ 2
    closed *= cell;
    Ok((j_beta - j_alpha) - closed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace_spec(n: usize) -> OperatorSpec {
        OperatorSpec::trace_operator(n)
    }

    fn small_problem_2d() -> TorusProblem {
        TorusProblem::with_constant_alpha(
            2,
            32,
            SymMat2::diag(1.0, 1.0),
            SymMat2::diag(2.0, 3.0),
            trace_spec(2),
        )
        .unwrap()
    }

    #[test]
    fn assemble_identity_cases() {
        // φ ≡ 0, α = G₀: unit spectrum everywhere
        let prob = TorusProblem::with_constant_alpha(
            2,
            8,
            SymMat2::diag(2.0, 3.0),
            SymMat2::diag(2.0, 3.0),
            trace_spec(2),
        )
        .unwrap();
        let phi = PotentialField::zero(2, 8).unwrap();
        let asm = assemble_a(&prob, &phi).unwrap();
        for idx in 0..prob.node_count() {
            let lam = asm.spectrum_at(idx);
            assert!((lam[0] - 1.0).abs() < 1e-12 && (lam[1] - 1.0).abs() < 1e-12);
        }

        // n = 1: spectrum g₀/a
        let p1 = TorusProblem::with_constant_alpha(
            1,
            8,
            SymMat2::scalar(0.5),
            SymMat2::scalar(2.0),
            trace_spec(1),
        )
        .unwrap();
        let phi1 = PotentialField::zero(1, 8).unwrap();
        let asm1 = assemble_a(&p1, &phi1).unwrap();
        assert!((asm1.spectrum_at(0)[0] - 4.0).abs() < 1e-12);

        // n = 2 with α = I, G₀ = diag(2,3): spectrum (2,3)
        let prob = small_problem_2d();
        let phi = PotentialField::zero(2, 32).unwrap();
        let asm = assemble_a(&prob, &phi).unwrap();
        let lam = asm.spectrum_at(17);
        assert!((lam[0] - 2.0).abs() < 1e-12 && (lam[1] - 3.0).abs() < 1e-12);
        // S₁(A⁻¹) = Λ_ω α pointwise
        assert!((asm.f_values[17] - (0.5 + 1.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn admissibility_violation_reports_node() {
        let prob = small_problem_2d();
        // a potential spike strong enough to break ω ≻ 0
        let mut phi = PotentialField::zero(2, 32).unwrap();
        phi.values[5] = 0.1; // second difference ~ 0.1·32² ≫ G₀
        match assemble_a(&prob, &phi) {
            Err(Error::DegenerateMetric { node, .. }) => {
                assert_eq!(node.len(), 2);
            }
            other => panic!("expected degenerate-metric error, got {other:?}"),
        }
    }

    #[test]
    fn normalizing_constant_cases() {
        // n = 1, constant coefficients: c = a/g₀ pointwise
        let p1 = TorusProblem::with_constant_alpha(
            1,
            16,
            SymMat2::scalar(1.5),
            SymMat2::scalar(0.75),
            trace_spec(1),
        )
        .unwrap();
        assert!((normalizing_constant(&p1).unwrap() - 2.0).abs() < 1e-13);

        // pure S_n: c = ∫det α / ∫det ω
        let mut c = vec![0.0; 2];
        c[1] = 1.0;
        let pn = TorusProblem::with_constant_alpha(
            2,
            8,
            SymMat2::diag(2.0, 2.0),
            SymMat2::diag(1.0, 4.0),
            OperatorSpec::pure_sigma(c).unwrap(),
        )
        .unwrap();
        assert!((normalizing_constant(&pn).unwrap() - 1.0).abs() < 1e-13);

        // deflated with matched volumes: c_ε = c − ε
        let eps = 0.25;
        let spec_eps = OperatorSpec::deflated(2, eps, Region::Sublevel { q: 100.0 }).unwrap();
        let pe = TorusProblem::with_constant_alpha(
            2,
            8,
            SymMat2::diag(1.0, 1.0),
            SymMat2::diag(1.0, 1.0),
            spec_eps,
        )
        .unwrap();
        let c_eps = normalizing_constant(&pe).unwrap();
        assert!((c_eps - (2.0 - eps)).abs() < 1e-13);
    }

    #[test]
    fn normalizing_constant_is_phi_independent() {
        let prob = small_problem_2d();
        let c0 = normalizing_constant(&prob).unwrap();
        // a single-direction mode has det D²φ ≡ 0, so the quadrature
        // is exactly φ-independent
        let phi_flat = PotentialField::from_modes(
            2,
            32,
            &[TrigMode { amplitude: 0.012, freq: vec![1, 0], phase: 0.4 }],
        )
        .unwrap();
        let c1 = normalizing_constant_at(&prob, &phi_flat).unwrap();
        assert!((c0 - c1).abs() < 1e-13, "|Δc| = {}", (c0 - c1).abs());
        // a genuinely 2D mode leaves Σ det D²φ ≠ 0 at O(h²·amp²);
        // invariance holds at quadrature tolerance only
        let phi_mixed = PotentialField::from_modes(
            2,
            32,
            &[TrigMode { amplitude: 0.012, freq: vec![1, 1], phase: 0.4 }],
        )
        .unwrap();
        let c2 = normalizing_constant_at(&prob, &phi_mixed).unwrap();
        assert!((c0 - c2).abs() < 5e-4, "|Δc| = {}", (c0 - c2).abs());
    }

    #[test]
    fn fixed_point_step_is_identity() {
        let prob = small_problem_2d();
        let phi = PotentialField::zero(2, 32).unwrap();
        let state = FlowState::new(&prob, phi).unwrap();
        assert!(state.residual < 1e-13);
        let (next, _) = step(&prob, &state, 1e-4, Stepper::ForwardEuler).unwrap();
        assert!(next.phi.sup_norm() < 1e-15);
    }

    #[test]
    fn one_dimensional_run_converges() {
        // |φ₀″| = 0.05·(2π)² ≈ 1.97, so G₀ must exceed that for the
        // initial data to be admissible
        let prob = TorusProblem::with_constant_alpha(
            1,
            64,
            SymMat2::scalar(1.0),
            SymMat2::scalar(4.0),
            trace_spec(1),
        )
        .unwrap();
        let phi0 = PotentialField::from_modes(
            1,
            64,
            &[TrigMode { amplitude: 0.05, freq: vec![1], phase: 0.0 }],
        )
        .unwrap();
        let run = run(&prob, phi0, 1e-5, 50.0, Stepper::ForwardEuler).unwrap();
        assert_eq!(run.outcome, FlowOutcome::Converged);
        assert!(run.state.phi.sup_norm() < 1e-5, "limit is the flat potential");
        assert_eq!(run.sup_f_violations, 0);
        // J is nonincreasing along the trace
        for w in run.trace.windows(2) {
            assert!(w[1].j <= w[0].j + MONOTONE_TOL);
        }
        // residual decreases monotonically after the initial transient
        let tail = &run.trace[run.trace.len().min(10) - 1..];
        for w in tail.windows(2) {
            assert!(w[1].residual <= w[0].residual * (1.0 + 1e-6));
        }
    }

    #[test]
    fn class_volume_is_conserved_along_the_flow() {
        let prob = small_problem_2d();
        let phi0 = PotentialField::from_modes(
            2,
            32,
            &[TrigMode { amplitude: 0.01, freq: vec![1, 0], phase: 0.3 }],
        )
        .unwrap();
        let cell = prob.cell_measure();
        let asm0 = assemble_a(&prob, &phi0).unwrap();
        let mass0: f64 = asm0.det_omega.iter().sum::<f64>() * cell;
        let run = run(&prob, phi0, 1e-6, 20.0, Stepper::ForwardEuler).unwrap();
        let mass1: f64 = run.state.assembled().det_omega.iter().sum::<f64>() * cell;
        assert!((mass0 - mass1).abs() < 1e-8, "Δmass = {}", (mass0 - mass1).abs());
    }

    #[test]
    fn j_functional_normalization_and_dissipation() {
        let prob = small_problem_2d();
        let zero = PotentialField::zero(2, 32).unwrap();
        assert_eq!(j_functional(&prob, &zero, 9).unwrap(), 0.0);

        let phi0 = PotentialField::from_modes(
            2,
            32,
            &[TrigMode { amplitude: 0.015, freq: vec![0, 1], phase: 1.1 }],
        )
        .unwrap();
        let run = run(&prob, phi0, 1e-6, 20.0, Stepper::ForwardEuler).unwrap();
        // accumulated J tracks the path-quadrature value at the end
        let j_direct = j_functional(&prob, &run.state.phi, 65).unwrap();
        assert!(
            (run.state.j_value - j_direct).abs() < 1e-5,
            "accumulated {} vs direct {}",
            run.state.j_value,
            j_direct
        );
        // strict decrease while the residual is large
        let early = &run.trace[..run.trace.len().min(50)];
        for w in early.windows(2) {
            assert!(w[1].j < w[0].j);
        }
    }

    #[test]
    fn background_change_identity() {
        let prob = small_problem_2d();
        let zero = PotentialField::zero(2, 32).unwrap();
        let phi = PotentialField::from_modes(
            2,
            32,
            &[TrigMode { amplitude: 0.012, freq: vec![1, 0], phase: 0.2 }],
        )
        .unwrap();
        let psi = PotentialField::from_modes(
            2,
            32,
            &[TrigMode { amplitude: 0.010, freq: vec![0, 1], phase: 2.0 }],
        )
        .unwrap();
        // ψ ≡ 0 gives zero discrepancy exactly
        let d0 = background_change_delta(&prob, &zero, &phi, 17).unwrap();
        assert_eq!(d0, 0.0);
        let d = background_change_delta(&prob, &psi, &phi, 33).unwrap();
        assert!(d.abs() < 2e-5, "discrepancy {d}");
    }

    #[test]
    fn background_change_bounded_over_potentials() {
        let prob = small_problem_2d();
        let psi = PotentialField::from_modes(
            2,
            32,
            &[TrigMode { amplitude: 0.01, freq: vec![1, 1], phase: 0.0 }],
        )
        .unwrap();
        let beta_prob = prob.with_background_shift(&psi).unwrap();
        let mut spread: Vec<f64> = Vec::new();
        for (amp, phase) in [(0.004, 0.0), (0.009, 1.0), (0.014, 2.2), (0.02, 0.7)] {
            let phi = PotentialField::from_modes(
                2,
                32,
                &[TrigMode { amplitude: amp, freq: vec![1, 0], phase }],
            )
            .unwrap();
            let jb = j_functional(&beta_prob, &phi, 33).unwrap();
            let ja = j_functional(&prob, &phi, 33).unwrap();
            spread.push(jb - ja);
        }
        // |J_β − J_α| stays bounded by a ψ-dependent constant across
        // the φ family (the closed form is O(‖ψ‖·‖det ω₁ − det ω₀‖))
        for v in &spread {
            assert!(v.abs() < 0.05, "unexpectedly large gap {v}");
        }
    }

    #[test]
    fn semi_implicit_step_converges_too() {
        let prob = small_problem_2d();
        let phi0 = PotentialField::from_modes(
            2,
            32,
            &[TrigMode { amplitude: 0.01, freq: vec![1, 0], phase: 0.0 }],
        )
        .unwrap();
        let run = run(&prob, phi0, 1e-5, 20.0, Stepper::SemiImplicit).unwrap();
        assert_eq!(run.outcome, FlowOutcome::Converged);
    }
}
