//! Strictly-parsed JSON run configurations for the command-line
//! front end. Unknown keys are rejected so a typo in a config fails
//! loudly instead of silently running defaults.

use serde::{Deserialize, Serialize};

use sigmaflow_core::flow::{Stepper, TrigMode};
use sigmaflow_core::linalg::SymMat2;
use sigmaflow_core::operators::{OperatorSpec, SpectrumBox};
use sigmaflow_core::pde::{AnalyticFn, CSchedule, DirichletProblem};
use sigmaflow_core::toric::{FacetLabel, Polytope};

/// `check-operator`: sample the structural conditions of an operator.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckOperatorConfig {
    pub operator: OperatorSpec,
    #[serde(default = "default_samples")]
    pub samples: usize,
    pub spectrum_box: SpectrumBox,
}

fn default_samples() -> usize {
    500
}

/// `toric-stability`: face-wise test for a pair of polytopes.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToricStabilityConfig {
    pub chi: Polytope,
    pub alpha: Polytope,
    /// Optional level constant; computed from the equality case when
    /// absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default)]
    pub labels: Vec<FacetLabel>,
}

/// A positive-definite symmetric matrix in the invariant frame.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatSpec {
    pub a11: f64,
    #[serde(default)]
    pub a12: f64,
    #[serde(default)]
    pub a22: f64,
}

impl MatSpec {
    pub fn to_mat(&self) -> SymMat2 {
        SymMat2 { a11: self.a11, a12: self.a12, a22: self.a22 }
    }
}

/// `flow`: integrate the parabolic flow on the torus.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub n: usize,
    pub grid: usize,
    pub alpha: MatSpec,
    /// Optional Hessian perturbation of α (a background change inside
    /// the class).
    #[serde(default)]
    pub alpha_shift_modes: Vec<TrigMode>,
    pub g0: MatSpec,
    pub operator: OperatorSpec,
    #[serde(default)]
    pub phi0_modes: Vec<TrigMode>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default)]
    pub stepper: Stepper,
    /// Keep every k-th trace row in the CSV (the full trace stays in
    /// memory for the diagnostics).
    #[serde(default = "default_stride")]
    pub trace_stride: usize,
}

fn default_tol() -> f64 {
    1e-5
}

fn default_t_max() -> f64 {
    50.0
}

fn default_stride() -> usize {
    1
}

/// `solve-model` / `solve-toric`: a Dirichlet problem as defined by
/// the solver library.
pub type SolveConfig = DirichletProblem;

/// `continuity`: walk the determinant weight down a schedule.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuityConfig {
    pub problem: DirichletProblem,
    pub d_start: f64,
    #[serde(default)]
    pub d_end: f64,
    #[serde(default = "default_stages")]
    pub stages: usize,
    pub c_schedule: CSchedule,
}

fn default_stages() -> usize {
    8
}

/// `legendre`: sample a convex potential and transform it.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegendreConfig {
    pub domain: sigmaflow_core::pde::DomainShape,
    pub resolution: usize,
    pub potential: AnalyticFn,
    #[serde(default = "default_out_resolution")]
    pub out_resolution: usize,
    #[serde(default = "default_shrink")]
    pub shrink: f64,
}

fn default_out_resolution() -> usize {
    65
}

fn default_shrink() -> f64 {
    0.05
}
