//! The verification battery: a fixed-seed, machine-checkable run of
//! every contract the library is built around, one outcome per
//! criterion. `run_all` executes the battery twice and adds a
//! byte-identity determinism check as the final criterion.
//!
//! Every tolerance here is pinned in code; detail strings carry only
//! deterministic quantities so reports are reproducible byte-for-byte.

mod oracle;

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::flow::{
    self, FlowOutcome, PotentialField, Stepper, TorusProblem, TrigMode, MONOTONE_TOL,
};
use crate::linalg::SymMat2;
use crate::operators::{self, OperatorSpec, Region, SpectrumBox};
use crate::pde::{
    self, AnalyticFn, BoundarySpec, CSchedule, DirichletProblem, DomainShape, SolveResult,
    TargetKind,
};
use crate::symfunc::{self, DeletionIndexSet, Spectrum};
use crate::toric::{self, shapes, FacetLabel, Verdict};

/// One verified contract.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CriterionOutcome {
    fn new(id: u32, name: &str, passed: bool, detail: String) -> Self {
        CriterionOutcome { id, name: name.to_string(), passed, detail }
    }
}

/// Full battery report.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub criteria: Vec<CriterionOutcome>,
    pub all_passed: bool,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn first_failure(&self) -> Option<&CriterionOutcome> {
        self.criteria.iter().find(|c| !c.passed)
    }
}

fn rng_for(seed: u64, criterion: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (criterion.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

/// Run criteria 1–11 once.
pub fn run_once(seed: u64) -> Vec<CriterionOutcome> {
    let models = ModelRuns::compute();
    vec![
        criterion_1(seed),
        criterion_2(seed),
        criterion_3(seed),
        criterion_4(seed),
        criterion_5(),
        criterion_6(),
        criterion_7(seed),
        criterion_8(&models),
        criterion_9(&models),
        criterion_10(&models),
        criterion_11(),
    ]
}

/// Run the full battery, appending the determinism criterion (two
/// fresh runs of 1–11 must serialize to identical bytes).
pub fn run_all(seed: u64) -> SuiteReport {
    let first = run_once(seed);
    let second = run_once(seed);
    let bytes_a = serde_json::to_vec(&first).expect("serializable");
    let bytes_b = serde_json::to_vec(&second).expect("serializable");
    let identical = bytes_a == bytes_b;
    let mut criteria = first;
    criteria.push(CriterionOutcome::new(
        12,
        "determinism",
        identical,
        if identical {
            format!("two runs serialized to identical {}-byte reports", bytes_a.len())
        } else {
            format!("reports differ: {} vs {} bytes", bytes_a.len(), bytes_b.len())
        },
    ));
    let all_passed = criteria.iter().all(|c| c.passed);
    SuiteReport { seed, criteria, all_passed }
}

const FD_STEP: f64 = 1e-5;

/// Gradient and Hessian of S_k(A⁻¹) against central finite
/// differences: 200 seeded spectra, n ∈ 2..=5, every k, relative
/// error < 1e−6 (gradient) and < 1e−4 (Hessian), within 5 s.
fn criterion_1(seed: u64) -> CriterionOutcome {
    let start = Instant::now();
    let mut rng = rng_for(seed, 1);
    let mut max_grad_err = 0.0f64;
    let mut max_hess_err = 0.0f64;
    let mut failures = 0usize;
    for _ in 0..200 {
        let n = rng.gen_range(2..=5usize);
        let vals: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..5.0)).collect();
        let lambda = Spectrum::new(vals.clone()).expect("finite");
        for k in 1..=n {
            let grad = symfunc::grad_inverse_sigma(k, &lambda).expect("positive spectrum");
            for i in 0..n {
                let fd = oracle::fd_gradient_entry(&vals, k, i, i, FD_STEP);
                let rel = (fd - grad[i]).abs() / grad[i].abs().max(1e-12);
                max_grad_err = max_grad_err.max(rel);
                if rel >= 1e-6 {
                    failures += 1;
                }
            }
            let hess = symfunc::hessian_inverse_sigma(k, &lambda).expect("positive spectrum");
            for i in 0..n {
                for j in 0..n {
                    let (pq, rs) = if i == j { ((i, i), (i, i)) } else { ((i, i), (j, j)) };
                    let fd = oracle::fd_hessian_entry(&vals, k, pq, rs, FD_STEP);
                    let exact = hess.diag_pair(i, j);
                    let rel = (fd - exact).abs() / exact.abs().max(1.0);
                    max_hess_err = max_hess_err.max(rel);
                    if rel >= 1e-4 {
                        failures += 1;
                    }
                    if i != j {
                        let fd =
                            oracle::fd_hessian_entry(&vals, k, (i, j), (j, i), FD_STEP);
                        let exact = hess.transpose_pair(i, j);
                        let rel = (fd - exact).abs() / exact.abs().max(1.0);
                        max_hess_err = max_hess_err.max(rel);
                        if rel >= 1e-4 {
                            failures += 1;
                        }
                    }
                }
            }
            // an off-pattern entry: ∂_{01}∂_{12} must vanish
            if n >= 3 {
                let fd = oracle::fd_hessian_entry(&vals, k, (0, 1), (1, 2), FD_STEP);
                if fd.abs() >= 1e-4 || hess.entry(0, 1, 1, 2) != 0.0 {
                    failures += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let within_budget = elapsed.as_secs_f64() < 5.0;
    CriterionOutcome::new(
        1,
        "derivative-formulas",
        failures == 0 && within_budget,
        format!(
            "200 spectra: max gradient rel err {max_grad_err:.3e}, max Hessian rel err {max_hess_err:.3e}, {failures} failures{}",
            if within_budget { "" } else { " (runtime budget exceeded)" }
        ),
    )
}

/// Convexity inequality ≥ −1e−10 for 1000 draws per family: pure
/// σ-combinations on positive spectra, and the budgeted deflated
/// operator on its floor region, within 10 s.
fn criterion_2(seed: u64) -> CriterionOutcome {
    let start = Instant::now();
    let mut rng = rng_for(seed, 2);
    let mut min_value = f64::INFINITY;
    let mut failures = 0usize;

    for _ in 0..1000 {
        let n = rng.gen_range(2..=5usize);
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let spec = OperatorSpec::pure_sigma(c).expect("nonnegative");
        let weights = spec.sigma_weights().expect("valid");
        let vals: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..10.0)).collect();
        let lambda = Spectrum::new(vals).expect("finite");
        let mut b_re = vec![0.0; n * n];
        let mut b_im = vec![0.0; n * n];
        for v in b_re.iter_mut().chain(b_im.iter_mut()) {
            *v = rng.gen_range(-1.0..1.0);
        }
        let q = symfunc::convexity_form(&weights, &lambda, &b_re, &b_im).expect("in region");
        min_value = min_value.min(q);
        if q < -1e-10 {
            failures += 1;
        }
    }

    let delta = 0.5;
    let mut min_deflated = f64::INFINITY;
    for n in [2usize, 3, 4] {
        let eps = operators::epsilon_budget(delta, n).expect("positive floor");
        let spec = OperatorSpec::deflated(n, eps, Region::EigenvalueFloor { delta })
            .expect("valid deflation");
        let weights = spec.sigma_weights().expect("valid");
        for _ in 0..334 {
            // bias samples toward the floor where the inequality is tight
            let vals: Vec<f64> = (0..n)
                .map(|_| delta * (1.0 + rng.gen_range(1e-9..7.0f64).powi(2) / 7.0))
                .collect();
            let lambda = Spectrum::new(vals).expect("finite");
            let mut b_re = vec![0.0; n * n];
            let mut b_im = vec![0.0; n * n];
            for v in b_re.iter_mut().chain(b_im.iter_mut()) {
                *v = rng.gen_range(-1.0..1.0);
            }
            let q = symfunc::convexity_form(&weights, &lambda, &b_re, &b_im)
                .expect("inside floor region");
            min_deflated = min_deflated.min(q);
            if q < -1e-10 {
                failures += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    let within_budget = elapsed.as_secs_f64() < 10.0;
    CriterionOutcome::new(
        2,
        "convexity-inequality",
        failures == 0 && within_budget,
        format!(
            "pure family min {min_value:.3e}, deflated family min {min_deflated:.3e}, {failures} violations{}",
            if within_budget { "" } else { " (runtime budget exceeded)" }
        ),
    )
}

/// Deletion identity Σ_i S_{l;i} = (n−l)·S_l to 1e−12 relative, for
/// n ≤ 8 and all l ≤ n−1.
fn criterion_3(seed: u64) -> CriterionOutcome {
    let mut rng = rng_for(seed, 3);
    let mut max_rel = 0.0f64;
    let mut failures = 0usize;
    for n in 1..=8usize {
        for _ in 0..40 {
            let vals: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..6.0)).collect();
            let lambda = Spectrum::new(vals).expect("finite");
            for l in 0..n {
                let mut sum = 0.0;
                for i in 0..n {
                    let del = DeletionIndexSet::new(vec![i]).expect("distinct");
                    sum += symfunc::elem_sym_deleted(l as i64, &del, &lambda)
                        .expect("valid degree");
                }
                let rhs = (n - l) as f64
                    * symfunc::elem_sym(l as i64, &lambda).expect("valid degree");
                let rel = (sum - rhs).abs() / rhs.abs().max(1e-300);
                max_rel = max_rel.max(rel);
                if rel > 1e-12 {
                    failures += 1;
                }
            }
        }
    }
    CriterionOutcome::new(
        3,
        "deletion-identity",
        failures == 0,
        format!("n ≤ 8, all degrees: max relative defect {max_rel:.3e}"),
    )
}

/// Structural conditions for pure σ-combinations on 500 draws, with
/// the trace ratio inside [1, n].
fn criterion_4(seed: u64) -> CriterionOutcome {
    let mut rng = rng_for(seed, 4);
    let n = 4usize;
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let spec = OperatorSpec::pure_sigma(c).expect("nonnegative");
    let bbox = SpectrumBox::new(0.2, 5.0).expect("ordered");
    match operators::check_structural(&spec, 500, &bbox, seed ^ 4) {
        Ok(report) => {
            let ratio_ok = report.trace_ratio_min >= 1.0 - 1e-9
                && report.trace_ratio_max <= n as f64 + 1e-9;
            CriterionOutcome::new(
                4,
                "structural-conditions",
                report.all_passed() && ratio_ok,
                format!(
                    "five conditions {}; trace ratio in [{:.6}, {:.6}] ⊆ [1, {n}]",
                    if report.all_passed() { "pass" } else { "FAIL" },
                    report.trace_ratio_min,
                    report.trace_ratio_max
                ),
            )
        }
        Err(e) => CriterionOutcome::new(4, "structural-conditions", false, e.to_string()),
    }
}

/// Toric stability: the plane at χ = 3H, the blown-up plane at
/// (b, e) = (0.1, 0.5) and (0.1, 0.1), plus mixed-volume symmetry and
/// multilinearity cross-checks.
fn criterion_5() -> CriterionOutcome {
    let run = || -> Result<String, String> {
        let a = 3.0;
        let chi = shapes::simplex2(a).map_err(|e| e.to_string())?;
        let alpha = shapes::simplex2(1.0).map_err(|e| e.to_string())?;
        let report =
            toric::stability_report(&chi, &alpha, None, &[]).map_err(|e| e.to_string())?;
        if (report.c - 2.0 / a).abs() > 1e-12 || report.verdict != Verdict::SolvableJ {
            return Err(format!("plane case: c = {}, verdict {:?}", report.c, report.verdict));
        }

        let labels = vec![FacetLabel { name: "E".into(), normal: vec![-1.0, -1.0] }];
        let chi_b = shapes::corner_cut_simplex(1.0, 0.1).map_err(|e| e.to_string())?;
        let alpha_b = shapes::corner_cut_simplex(1.0, 0.5).map_err(|e| e.to_string())?;
        let unstable =
            toric::stability_report(&chi_b, &alpha_b, None, &labels).map_err(|e| e.to_string())?;
        let e_margin = unstable
            .margins
            .iter()
            .find(|m| m.id == "E")
            .ok_or("missing E margin")?
            .margin;
        // hand value via intersection numbers: c·b − e = 19/99·… = −61/198
        let expected = -61.0 / 198.0;
        if (e_margin - expected).abs() > 1e-6 {
            return Err(format!("E margin {e_margin} vs {expected}"));
        }
        if unstable.verdict != (Verdict::Unstable { witness: "E".into() }) {
            return Err(format!("expected unstable at E, got {:?}", unstable.verdict));
        }

        let alpha_s = shapes::corner_cut_simplex(1.0, 0.1).map_err(|e| e.to_string())?;
        let stable =
            toric::stability_report(&chi_b, &alpha_s, None, &labels).map_err(|e| e.to_string())?;
        let e_small = stable
            .margins
            .iter()
            .find(|m| m.id == "E")
            .ok_or("missing E margin")?
            .margin;
        if stable.verdict != Verdict::SolvableJ || (e_small - 0.1).abs() > 1e-9 {
            return Err(format!("self-pair case: margin {e_small}, verdict {:?}", stable.verdict));
        }

        // mixed-volume oracle checks: symmetry and multilinearity
        let p = shapes::simplex2(2.0).map_err(|e| e.to_string())?;
        let q = shapes::rect2(1.0, 3.0).map_err(|e| e.to_string())?;
        let mut worst_sym = 0.0f64;
        let mut worst_scale = 0.0f64;
        for k in 0..=2usize {
            let v = toric::mixed_volume(&p, &q, k).map_err(|e| e.to_string())?;
            let w = toric::mixed_volume(&q, &p, 2 - k).map_err(|e| e.to_string())?;
            worst_sym = worst_sym.max((v - w).abs() / v.abs().max(1e-300));
            let t = 1.75;
            let tp = p.scale(t).map_err(|e| e.to_string())?;
            let vt = toric::mixed_volume(&tp, &q, k).map_err(|e| e.to_string())?;
            let expected = t.powi(k as i32) * v;
            worst_scale = worst_scale.max((vt - expected).abs() / expected.abs().max(1e-300));
        }
        if worst_sym > 1e-9 || worst_scale > 1e-10 {
            return Err(format!("mixed-volume identities: sym {worst_sym:.3e}, scale {worst_scale:.3e}"));
        }
        Ok(format!(
            "plane c = 2/3, blow-up E-margin {e_margin:.10} (−61/198), self-pair margin {e_small:.10}; symmetry defect {worst_sym:.3e}, scaling defect {worst_scale:.3e}"
        ))
    };
    match run() {
        Ok(detail) => CriterionOutcome::new(5, "toric-stability", true, detail),
        Err(detail) => CriterionOutcome::new(5, "toric-stability", false, detail),
    }
}

/// Constant-coefficient flows on 64-per-axis grids converge below
/// residual 1e−5 within t ≤ 50, with sup F and J nonincreasing per
/// step within 1e−8, each run within 60 s.
fn criterion_6() -> CriterionOutcome {
    let run = || -> Result<String, String> {
        let spec1 = OperatorSpec::trace_operator(1);
        let prob1 = TorusProblem::with_constant_alpha(
            1,
            64,
            SymMat2::scalar(1.0),
            SymMat2::scalar(4.0),
            spec1,
        )
        .map_err(|e| e.to_string())?;
        let phi1 = PotentialField::from_modes(
            1,
            64,
            &[TrigMode { amplitude: 0.05, freq: vec![1], phase: 0.0 }],
        )
        .map_err(|e| e.to_string())?;
        let start = Instant::now();
        let run1 = flow::run(&prob1, phi1, 1e-5, 50.0, Stepper::ForwardEuler)
            .map_err(|e| e.to_string())?;
        let t1 = start.elapsed().as_secs_f64();

        let spec2 = OperatorSpec::trace_operator(2);
        let prob2 = TorusProblem::with_constant_alpha(
            2,
            64,
            SymMat2::diag(1.0, 1.0),
            SymMat2::diag(2.0, 3.0),
            spec2,
        )
        .map_err(|e| e.to_string())?;
        let phi2 = PotentialField::from_modes(
            2,
            64,
            &[
                TrigMode { amplitude: 0.010, freq: vec![1, 0], phase: 0.0 },
                TrigMode { amplitude: 0.008, freq: vec![0, 1], phase: 1.1 },
            ],
        )
        .map_err(|e| e.to_string())?;
        let start = Instant::now();
        let run2 = flow::run(&prob2, phi2, 1e-5, 50.0, Stepper::ForwardEuler)
            .map_err(|e| e.to_string())?;
        let t2 = start.elapsed().as_secs_f64();

        for (name, r, t) in [("n=1", &run1, t1), ("n=2", &run2, t2)] {
            if r.outcome != FlowOutcome::Converged {
                return Err(format!("{name}: did not converge, residual {}", r.state.residual));
            }
            if r.sup_f_violations > 0 {
                return Err(format!(
                    "{name}: {} sup F increases, max {:.3e}",
                    r.sup_f_violations, r.max_sup_f_increase
                ));
            }
            for w in r.trace.windows(2) {
                if w[1].j > w[0].j + MONOTONE_TOL {
                    return Err(format!("{name}: J increased by {:.3e}", w[1].j - w[0].j));
                }
            }
            if t >= 60.0 {
                return Err(format!("{name}: runtime budget exceeded"));
            }
        }
        Ok(format!(
            "n=1: residual {:.3e} in {} steps; n=2: residual {:.3e} in {} steps; sup F and J monotone within 1e-8",
            run1.state.residual, run1.steps, run2.state.residual, run2.steps
        ))
    };
    match run() {
        Ok(detail) => CriterionOutcome::new(6, "flow-convergence", true, detail),
        Err(detail) => CriterionOutcome::new(6, "flow-convergence", false, detail),
    }
}

/// Path-quadrature change of background against the closed form on a
/// 64² grid with 65 Simpson nodes: |discrepancy| < 1e−4 for 5 seeded
/// field pairs.
fn criterion_7(seed: u64) -> CriterionOutcome {
    let mut rng = rng_for(seed, 7);
    let spec = OperatorSpec::trace_operator(2);
    let prob = match TorusProblem::with_constant_alpha(
        2,
        64,
        SymMat2::diag(1.0, 1.0),
        SymMat2::diag(2.0, 3.0),
        spec,
    ) {
        Ok(p) => p,
        Err(e) => return CriterionOutcome::new(7, "background-change-identity", false, e.to_string()),
    };
    let random_field = |rng: &mut ChaCha8Rng| -> Result<PotentialField, String> {
        let mut modes = Vec::new();
        for _ in 0..2 {
            let dirs = [[1i32, 0i32], [0, 1], [1, 1], [1, -1]];
            let d = dirs[rng.gen_range(0..dirs.len())];
            let k2 = (d[0] * d[0] + d[1] * d[1]) as f64;
            // keep Σ |D²mode| ≲ 0.8 so both α + D²ψ and G₀ + D²φ stay
            // safely positive definite
            modes.push(TrigMode {
                amplitude: rng.gen_range(0.004..0.010) / k2,
                freq: vec![d[0], d[1]],
                phase: rng.gen_range(0.0..std::f64::consts::TAU),
            });
        }
        PotentialField::from_modes(2, 64, &modes).map_err(|e| e.to_string())
    };
    let mut worst = 0.0f64;
    for pair in 0..5 {
        let psi = match random_field(&mut rng) {
            Ok(f) => f,
            Err(e) => return CriterionOutcome::new(7, "background-change-identity", false, e),
        };
        let phi = match random_field(&mut rng) {
            Ok(f) => f,
            Err(e) => return CriterionOutcome::new(7, "background-change-identity", false, e),
        };
        match flow::background_change_delta(&prob, &psi, &phi, 65) {
            Ok(d) => worst = worst.max(d.abs()),
            Err(e) => {
                return CriterionOutcome::new(
                    7,
                    "background-change-identity",
                    false,
                    format!("pair {pair}: {e}"),
                )
            }
        }
    }
    CriterionOutcome::new(
        7,
        "background-change-identity",
        worst < 1e-4,
        format!("5 pairs on 64² with 65 Simpson nodes: worst |discrepancy| = {worst:.3e}"),
    )
}

/// Shared model-equation solves used by criteria 8, 9 and 10.
struct ModelRuns {
    one_d: Result<(SolveResult, f64), String>,
    ball: Result<(SolveResult, f64), String>,
    /// (resolution, sup error vs the closed form, solve)
    order_series: Vec<(usize, Result<(SolveResult, f64), String>)>,
    /// (resolution, h, solve) for the perturbed-boundary problem
    nonradial: Vec<(usize, f64, Result<SolveResult, String>)>,
}

impl ModelRuns {
    fn compute() -> ModelRuns {
        let one_d = {
            let prob = DirichletProblem {
                domain: DomainShape::Rect { min: vec![-1.0], max: vec![1.0] },
                resolution: 257,
                target: TargetKind::Model,
                b_or_d: 1.0,
                c: 1.0,
                background: None,
                boundary: BoundarySpec::Zero,
            };
            pde::solve_model_dirichlet(&prob).map_err(|e| e.to_string()).map(|r| {
                let grid = &r.solution.grid;
                let mut err = 0.0f64;
                for &flat in grid.interior_nodes() {
                    let x = grid.node_xy(flat)[0];
                    err = err.max((r.solution.values[flat] - (x * x - 1.0) / 4.0).abs());
                }
                (r, err)
            })
        };
        let ball = {
            let prob = DirichletProblem {
                domain: DomainShape::Ball { center: vec![0.0, 0.0], radius: 1.0 },
                resolution: 129,
                target: TargetKind::Model,
                b_or_d: 1.0,
                c: 1.0,
                background: None,
                boundary: BoundarySpec::Zero,
            };
            pde::solve_model_dirichlet(&prob).map_err(|e| e.to_string()).map(|r| {
                let grid = &r.solution.grid;
                let sigma = 1.0 + 2f64.sqrt();
                let center = grid
                    .interior_nodes()
                    .iter()
                    .copied()
                    .find(|&f| {
                        let p = grid.node_xy(f);
                        p[0].abs() < 1e-12 && p[1].abs() < 1e-12
                    })
                    .expect("center node exists at odd resolution");
                let err = (r.solution.values[center] + 1.0 / (2.0 * sigma)).abs();
                (r, err)
            })
        };
        let exact = AnalyticFn::RadialModelSolution { b: 1.0, c2: 0.2, r0: 1.0 };
        let order_series = [33usize, 65, 129]
            .into_iter()
            .map(|res| {
                let prob = DirichletProblem {
                    domain: DomainShape::Rect { min: vec![1.0, -0.5], max: vec![2.0, 0.5] },
                    resolution: res,
                    target: TargetKind::Model,
                    b_or_d: 1.0,
                    c: 1.0,
                    background: None,
                    boundary: BoundarySpec::Analytic { f: Box::new(exact.clone()) },
                };
                let run = pde::solve_model_dirichlet(&prob).map_err(|e| e.to_string()).map(|r| {
                    let grid = &r.solution.grid;
                    let mut err = 0.0f64;
                    for &flat in grid.interior_nodes() {
                        let p = grid.node_xy(flat);
                        err = err.max((r.solution.values[flat] - exact.value(&p)).abs());
                    }
                    (r, err)
                });
                (res, run)
            })
            .collect();
        let nonradial = [33usize, 65, 129]
            .into_iter()
            .map(|res| {
                let prob = DirichletProblem {
                    domain: DomainShape::Rect { min: vec![-1.0, -1.0], max: vec![1.0, 1.0] },
                    resolution: res,
                    target: TargetKind::Model,
                    b_or_d: 1.0,
                    c: 1.0,
                    background: None,
                    boundary: BoundarySpec::Analytic {
                        f: Box::new(AnalyticFn::PerturbedQuadratic {
                            scale: 0.414,
                            amp: 0.03,
                            freq: 2.0,
                        }),
                    },
                };
                let h = 2.0 / (res - 1) as f64;
                (res, h, pde::solve_model_dirichlet(&prob).map_err(|e| e.to_string()))
            })
            .collect();
        ModelRuns { one_d, ball, order_series, nonradial }
    }
}

/// Model Dirichlet exactness: the 1D quadratic to 1e−8 on 257 nodes,
/// the radial ball value h(0) to 1e−5 on 129², and observed
/// convergence order 2 ± 0.2 across three refinements.
fn criterion_8(models: &ModelRuns) -> CriterionOutcome {
    let run = || -> Result<String, String> {
        let (_, err_1d) = models.one_d.as_ref().map_err(|e| e.clone())?;
        if *err_1d >= 1e-8 {
            return Err(format!("1D error {err_1d:.3e} ≥ 1e-8"));
        }
        let (_, err_ball) = models.ball.as_ref().map_err(|e| e.clone())?;
        if *err_ball >= 1e-5 {
            return Err(format!("ball h(0) error {err_ball:.3e} ≥ 1e-5"));
        }
        let mut errs = Vec::new();
        for (res, run) in &models.order_series {
            let (_, err) = run.as_ref().map_err(|e| format!("res {res}: {e}"))?;
            errs.push(*err);
        }
        let o1 = (errs[0] / errs[1]).log2();
        let o2 = (errs[1] / errs[2]).log2();
        if (o1 - 2.0).abs() > 0.2 || (o2 - 2.0).abs() > 0.2 {
            return Err(format!("observed orders {o1:.3}, {o2:.3} outside 2 ± 0.2"));
        }
        Ok(format!(
            "1D err {err_1d:.3e}; ball h(0) err {err_ball:.3e}; refinement orders {o1:.3}, {o2:.3}"
        ))
    };
    match run() {
        Ok(detail) => CriterionOutcome::new(8, "model-dirichlet-exactness", true, detail),
        Err(detail) => CriterionOutcome::new(8, "model-dirichlet-exactness", false, detail),
    }
}

/// Supersolution property: L[det(D²h)^{1/n}] stays below the pinned
/// tolerance 0.05·h² on the converged non-radial solves (decreasing
/// under refinement), and vanishes exactly for a constant-Hessian
/// solution on a dyadic grid.
fn criterion_9(models: &ModelRuns) -> CriterionOutcome {
    /// Pinned discretization tolerance for the supersolution check;
    /// the measured values sit two orders below it with exponent 2.
    fn tol(h: f64) -> f64 {
        0.05 * h * h
    }
    let run = || -> Result<String, String> {
        let mut details = Vec::new();
        for (res, h, solve) in &models.nonradial {
            let result = solve.as_ref().map_err(|e| format!("res {res}: {e}"))?;
            let report =
                pde::supersolution_check(&result.solution, 1.0).map_err(|e| e.to_string())?;
            if report.warned {
                return Err(format!("res {res}: input fails the solution check"));
            }
            if report.max_lf > tol(*h) {
                return Err(format!(
                    "res {res}: max Lf {:.3e} above tol(h) = {:.3e}",
                    report.max_lf,
                    tol(*h)
                ));
            }
            details.push(format!("res {res}: max Lf {:.3e} ≤ {:.3e}", report.max_lf, tol(*h)));
        }
        // constant-Hessian solution on a dyadic grid: exact zero
        let q = |x: &[f64]| 0.25 * (x[0] * x[0] + x[1] * x[1]);
        let grid = std::sync::Arc::new(
            pde::DomainGrid::new(
                DomainShape::Rect { min: vec![-1.0, -1.0], max: vec![1.0, 1.0] },
                33,
                &q,
            )
            .map_err(|e| e.to_string())?,
        );
        let h_const = pde::GridFunction::sample(grid, &q);
        let const_report = pde::supersolution_check(&h_const, 0.0).map_err(|e| e.to_string())?;
        if const_report.warned || const_report.max_lf.abs() > 1e-12 {
            return Err(format!(
                "constant-Hessian case: max |Lf| = {:.3e}",
                const_report.max_lf.abs()
            ));
        }
        details.push(format!("constant-Hessian max |Lf| = {:.1e}", const_report.max_lf.abs()));
        Ok(details.join("; "))
    };
    match run() {
        Ok(detail) => CriterionOutcome::new(9, "supersolution-property", true, detail),
        Err(detail) => CriterionOutcome::new(9, "supersolution-property", false, detail),
    }
}

/// Hessian bound: ‖D²u‖_F ≤ √n + 1e−8 on every converged model
/// solution in the battery.
fn criterion_10(models: &ModelRuns) -> CriterionOutcome {
    let run = || -> Result<String, String> {
        let mut worst_margin = f64::NEG_INFINITY;
        let mut count = 0usize;
        let mut check = |result: &SolveResult, n: usize, b: f64| {
            let (frob, _res) = pde::hessian_bound_check(&result.solution, b);
            let bound = (n as f64).sqrt() + 1e-8;
            worst_margin = worst_margin.max(frob - bound);
            count += 1;
            (frob, bound)
        };
        let (r1, _) = models.one_d.as_ref().map_err(|e| e.clone())?;
        check(r1, 1, 1.0);
        let (rb, _) = models.ball.as_ref().map_err(|e| e.clone())?;
        check(rb, 2, 1.0);
        for (res, run) in &models.order_series {
            let (r, _) = run.as_ref().map_err(|e| format!("res {res}: {e}"))?;
            check(r, 2, 1.0);
        }
        for (res, _, run) in &models.nonradial {
            let r = run.as_ref().map_err(|e| format!("res {res}: {e}"))?;
            check(r, 2, 1.0);
        }
        if worst_margin > 0.0 {
            return Err(format!("a solution exceeds √n by {worst_margin:.3e}"));
        }
        Ok(format!(
            "{count} converged solutions, worst Frobenius margin below √n: {:.3e}",
            -worst_margin
        ))
    };
    match run() {
        Ok(detail) => CriterionOutcome::new(10, "hessian-bound", true, detail),
        Err(detail) => CriterionOutcome::new(10, "hessian-bound", false, detail),
    }
}

/// Continuity path: the compatible level completes from d = 10 to
/// d = 0 with every stage below 1e−9 and the d = 0 stage matching a
/// direct solve to 1e−8; the 30%-reduced level stalls at positive d.
fn criterion_11() -> CriterionOutcome {
    let background = AnalyticFn::Quadratic {
        quad: vec![vec![1.0, 0.0], vec![0.0, 24.0]],
        linear: vec![0.0, 0.0],
        constant: 0.0,
    };
    let base = DirichletProblem {
        domain: DomainShape::Rect { min: vec![-1.0, -1.0], max: vec![1.0, 1.0] },
        resolution: 129,
        target: TargetKind::Toric,
        b_or_d: 0.0,
        c: 25.0,
        background: Some(background),
        boundary: BoundarySpec::Analytic {
            f: Box::new(AnalyticFn::isotropic_quadratic(2, 1.0)),
        },
    };
    let run = || -> Result<String, String> {
        let healthy =
            pde::continuity_solve(&base, 10.0, 0.0, 8, CSchedule::Compatible { slope: 24.0 })
                .map_err(|e| e.to_string())?;
        if !healthy.completed {
            return Err(format!("compatible path stalled at {:?}", healthy.stalled_at));
        }
        let mut worst_res = 0.0f64;
        for s in &healthy.stages {
            if !s.converged || !(s.residual < 1e-9) {
                return Err(format!("stage d = {} residual {:.3e}", s.d, s.residual));
            }
            worst_res = worst_res.max(s.residual);
        }
        let direct = pde::solve_toric_equation(&base).map_err(|e| e.to_string())?;
        let last = healthy.final_solution.as_ref().ok_or("missing final stage")?;
        let mut gap = 0.0f64;
        for (&a, &b) in last
            .interior_values()
            .iter()
            .zip(direct.solution.interior_values().iter())
        {
            gap = gap.max((a - b).abs());
        }
        if gap > 1e-8 {
            return Err(format!("d = 0 stage differs from direct solve by {gap:.3e}"));
        }

        let reduced = DirichletProblem { c: 0.7 * 25.0, ..base.clone() };
        let stalled = pde::continuity_solve(
            &reduced,
            10.0,
            0.0,
            8,
            CSchedule::Compatible { slope: 0.7 * 24.0 },
        )
        .map_err(|e| e.to_string())?;
        if stalled.completed {
            return Err("reduced-level path unexpectedly completed".into());
        }
        let stall_d = stalled.stalled_at.ok_or("missing stall record")?;
        if !(stall_d > 0.0) {
            return Err(format!("stall at d = {stall_d}"));
        }
        Ok(format!(
            "compatible path: 8 stages, worst residual {worst_res:.3e}, d = 0 gap {gap:.3e}; reduced level stalls at d = {stall_d:.6}"
        ))
    };
    match run() {
        Ok(detail) => CriterionOutcome::new(11, "continuity-path", true, detail),
        Err(detail) => CriterionOutcome::new(11, "continuity-path", false, detail),
    }
}
