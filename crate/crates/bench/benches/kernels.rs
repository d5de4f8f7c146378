//! Microbenchmarks for the hot kernels: symmetric-function
//! derivatives, the convexity form, one flow step, a mixed-volume
//! interpolation, and a small Dirichlet solve.

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use sigmaflow_core::flow::{self, PotentialField, Stepper, TorusProblem, TrigMode};
use sigmaflow_core::linalg::SymMat2;
use sigmaflow_core::operators::OperatorSpec;
use sigmaflow_core::pde::{
    self, AnalyticFn, BoundarySpec, DirichletProblem, DomainShape, TargetKind,
};
use sigmaflow_core::symfunc::{self, Spectrum};
use sigmaflow_core::toric::{self, shapes};

fn bench_symfunc(c: &mut Criterion) {
    let lambda8 = Spectrum::new((1..=8).map(|i| 0.3 + 0.4 * i as f64).collect()).unwrap();
    c.bench_function("elem_sym n=8 k=4", |b| {
        b.iter(|| symfunc::elem_sym(4, black_box(&lambda8)).unwrap())
    });

    let lambda5 = Spectrum::new(vec![0.5, 1.0, 1.5, 2.0, 2.5]).unwrap();
    c.bench_function("hessian_inverse_sigma n=5 k=2", |b| {
        b.iter(|| symfunc::hessian_inverse_sigma(2, black_box(&lambda5)).unwrap())
    });

    let spec = OperatorSpec::pure_sigma(vec![1.0, 0.5, 0.25, 0.125]).unwrap();
    let weights = spec.sigma_weights().unwrap();
    let lambda4 = Spectrum::new(vec![0.5, 1.0, 2.0, 4.0]).unwrap();
    let b_re: Vec<f64> = (0..16).map(|i| (i as f64 * 0.37).sin()).collect();
    let b_im: Vec<f64> = (0..16).map(|i| (i as f64 * 0.61).cos()).collect();
    c.bench_function("convexity_form n=4", |b| {
        b.iter(|| {
            symfunc::convexity_form(
                black_box(&weights),
                black_box(&lambda4),
                black_box(&b_re),
                black_box(&b_im),
            )
            .unwrap()
        })
    });
}

fn bench_flow_step(c: &mut Criterion) {
    let prob = TorusProblem::with_constant_alpha(
        2,
        32,
        SymMat2::diag(1.0, 1.0),
        SymMat2::diag(2.0, 3.0),
        OperatorSpec::trace_operator(2),
    )
    .unwrap();
    let phi0 = PotentialField::from_modes(
        2,
        32,
        &[TrigMode { amplitude: 0.01, freq: vec![1, 0], phase: 0.0 }],
    )
    .unwrap();
    let state = flow::FlowState::new(&prob, phi0).unwrap();
    c.bench_function("flow step 32x32", |b| {
        b.iter(|| flow::step(black_box(&prob), black_box(&state), 1e-4, Stepper::ForwardEuler).unwrap())
    });
}

fn bench_mixed_volume(c: &mut Criterion) {
    let p = shapes::corner_cut_simplex(1.0, 0.1).unwrap();
    let q = shapes::corner_cut_simplex(1.0, 0.5).unwrap();
    c.bench_function("mixed_volume 2d trapezoids", |b| {
        b.iter(|| toric::mixed_volume(black_box(&p), black_box(&q), 1).unwrap())
    });
    let cube = shapes::unit_box(3).unwrap();
    let simplex = shapes::simplex3(1.0).unwrap();
    c.bench_function("mixed_volume 3d cube-simplex", |b| {
        b.iter(|| toric::mixed_volume(black_box(&cube), black_box(&simplex), 1).unwrap())
    });
}

fn bench_model_solve(c: &mut Criterion) {
    let prob = DirichletProblem {
        domain: DomainShape::Rect { min: vec![-1.0, -1.0], max: vec![1.0, 1.0] },
        resolution: 33,
        target: TargetKind::Model,
        b_or_d: 1.0,
        c: 1.0,
        background: None,
        boundary: BoundarySpec::Analytic {
            f: Box::new(AnalyticFn::PerturbedQuadratic { scale: 0.414, amp: 0.03, freq: 2.0 }),
        },
    };
    let mut group = c.benchmark_group("dirichlet");
    group.sample_size(20);
    group.bench_function("model solve 33x33", |b| {
        b.iter(|| pde::solve_model_dirichlet(black_box(&prob)).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_symfunc,
    bench_flow_step,
    bench_mixed_volume,
    bench_model_solve
);
criterion_main!(benches);
