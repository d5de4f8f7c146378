//! Command-line front end for the σ_k laboratory: operator checks,
//! toric stability reports, flow runs, Dirichlet solves, continuity
//! paths, Legendre transforms, and the full verification battery.
//!
//! Exit codes: 0 on success, 1 on a mathematical failure
//! (non-convergence, a failed verification criterion, an instability
//! verdict under `--expect-stable`), 2 on input errors.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use sigmaflow_core::error::Error as CoreError;
use sigmaflow_core::flow::{self, PotentialField, TorusProblem};
use sigmaflow_core::operators;
use sigmaflow_core::pde::{self, GridFunction, NodeClass};
use sigmaflow_core::suite;
use sigmaflow_core::toric::{self, Verdict};

#[derive(Parser)]
#[command(
    name = "sigmaflow",
    about = "numerical laboratory for inverse sigma_k equations",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory for reports, traces and grids.
    #[arg(long, global = true, default_value = "sigmaflow-out")]
    out: PathBuf,
    /// Seed for every sampling stream (fixed seed ⇒ bit-identical runs).
    #[arg(long, global = true, default_value_t = 0x51_6d_af_10)]
    seed: u64,
    /// Override the primary tolerance of the command (flow residual).
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the structural conditions of an operator family.
    CheckOperator {
        #[arg(long)]
        config: PathBuf,
    },
    /// Face-wise stability test for a pair of moment polytopes.
    ToricStability {
        #[arg(long)]
        config: PathBuf,
        /// Exit with status 1 if the verdict is unstable.
        #[arg(long)]
        expect_stable: bool,
    },
    /// Integrate the parabolic flow on the torus.
    Flow {
        #[arg(long)]
        config: PathBuf,
    },
    /// Solve the constant-coefficient model Dirichlet problem.
    SolveModel {
        #[arg(long)]
        config: PathBuf,
    },
    /// Solve the toric Dirichlet problem.
    SolveToric {
        #[arg(long)]
        config: PathBuf,
    },
    /// Walk the determinant weight down a continuity schedule.
    Continuity {
        #[arg(long)]
        config: PathBuf,
    },
    /// Legendre-transform a sampled convex potential.
    Legendre {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the full verification battery.
    VerifyAll,
}

/// Non-zero exit statuses, separated so CI can tell a wrong answer
/// from a broken input.
enum Failure {
    Math(String),
    Input(String),
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NonConvergence(_) => Failure::Math(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("SIGMAFLOW_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            // best effort: the pool may already exist
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        }
    }
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Math(msg)) => {
            eprintln!("mathematical failure: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("input error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    fs::create_dir_all(&cli.out)
        .map_err(|e| Failure::Input(format!("cannot create output directory: {e}")))?;
    match &cli.command {
        Command::CheckOperator { config } => check_operator(cli, config),
        Command::ToricStability { config, expect_stable } => {
            toric_stability(cli, config, *expect_stable)
        }
        Command::Flow { config } => run_flow(cli, config),
        Command::SolveModel { config } => solve_dirichlet(cli, config, false),
        Command::SolveToric { config } => solve_dirichlet(cli, config, true),
        Command::Continuity { config } => continuity(cli, config),
        Command::Legendre { config } => legendre(cli, config),
        Command::VerifyAll => verify_all(cli),
    }
}

fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Input(format!("cannot parse {}: {e}", path.display())))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::Input(format!("serialization: {e}")))?;
    fs::write(dir.join(name), text + "\n")
        .map_err(|e| Failure::Input(format!("cannot write {name}: {e}")))
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<(), Failure> {
    fs::write(dir.join(name), text)
        .map_err(|e| Failure::Input(format!("cannot write {name}: {e}")))
}

fn check_operator(cli: &Cli, path: &Path) -> Result<(), Failure> {
    let cfg: config::CheckOperatorConfig = load_config(path)?;
    cfg.operator.validate().map_err(Failure::from)?;
    let report =
        operators::check_structural(&cfg.operator, cfg.samples, &cfg.spectrum_box, cli.seed)
            .map_err(Failure::from)?;
    write_json(&cli.out, "structural-report.json", &report)?;
    let passed = report.all_passed();
    println!(
        "structural conditions: {} (trace ratio [{:.6}, {:.6}])",
        if passed { "pass" } else { "FAIL" },
        report.trace_ratio_min,
        report.trace_ratio_max
    );
    if passed {
        Ok(())
    } else {
        Err(Failure::Math(
            "a structural condition failed; see structural-report.json".into(),
        ))
    }
}

fn toric_stability(cli: &Cli, path: &Path, expect_stable: bool) -> Result<(), Failure> {
    let cfg: config::ToricStabilityConfig = load_config(path)?;
    let report = toric::stability_report(&cfg.chi, &cfg.alpha, cfg.c, &cfg.labels)
        .map_err(Failure::from)?;
    write_json(&cli.out, "stability-report.json", &report)?;
    write_text(&cli.out, "face-margins.csv", &report.to_csv())?;
    match &report.verdict {
        Verdict::SolvableJ => println!("verdict: solvable-J (c = {:.12})", report.c),
        Verdict::SolvableTwisted => println!(
            "verdict: solvable-twisted (c = {:.12}, global = {:.3e})",
            report.c, report.global
        ),
        Verdict::Unstable { witness } => println!("verdict: unstable, witness face {witness}"),
    }
    if expect_stable && matches!(report.verdict, Verdict::Unstable { .. }) {
        return Err(Failure::Math("unstable verdict under --expect-stable".into()));
    }
    Ok(())
}

fn build_torus_problem(cfg: &config::FlowConfig) -> Result<TorusProblem, Failure> {
    let base = TorusProblem::with_constant_alpha(
        cfg.n,
        cfg.grid,
        cfg.alpha.to_mat(),
        cfg.g0.to_mat(),
        cfg.operator.clone(),
    )
    .map_err(Failure::from)?;
    if cfg.alpha_shift_modes.is_empty() {
        Ok(base)
    } else {
        let psi = PotentialField::from_modes(cfg.n, cfg.grid, &cfg.alpha_shift_modes)
            .map_err(Failure::from)?;
        base.with_background_shift(&psi).map_err(Failure::from)
    }
}

fn run_flow(cli: &Cli, path: &Path) -> Result<(), Failure> {
    let cfg: config::FlowConfig = load_config(path)?;
    let prob = build_torus_problem(&cfg)?;
    let phi0 =
        PotentialField::from_modes(cfg.n, cfg.grid, &cfg.phi0_modes).map_err(Failure::from)?;
    let tol = cli.tol.unwrap_or(cfg.tol);
    let run = flow::run(&prob, phi0, tol, cfg.t_max, cfg.stepper).map_err(Failure::from)?;

    let mut trace = String::from("t,residual,sup_f,j,dt\n");
    for (i, row) in run.trace.iter().enumerate() {
        if i % cfg.trace_stride.max(1) == 0 || i + 1 == run.trace.len() {
            trace.push_str(&format!(
                "{:.10e},{:.10e},{:.10e},{:.10e},{:.3e}\n",
                row.t, row.residual, row.sup_f, row.j, row.dt
            ));
        }
    }
    write_text(&cli.out, "trace.csv", &trace)?;
    write_text(&cli.out, "phi.csv", &potential_csv(&prob, &run.state.phi))?;

    #[derive(Serialize)]
    struct Summary {
        outcome: flow::FlowOutcome,
        t_final: f64,
        residual: f64,
        sup_f: f64,
        j_value: f64,
        c: f64,
        steps: usize,
        sup_f_violations: usize,
    }
    write_json(
        &cli.out,
        "summary.json",
        &Summary {
            outcome: run.outcome,
            t_final: run.state.t,
            residual: run.state.residual,
            sup_f: run.state.sup_f,
            j_value: run.state.j_value,
            c: run.state.c,
            steps: run.steps,
            sup_f_violations: run.sup_f_violations,
        },
    )?;
    println!(
        "flow: {:?} at t = {:.4}, residual {:.3e}, {} steps",
        run.outcome, run.state.t, run.state.residual, run.steps
    );
    match run.outcome {
        flow::FlowOutcome::Converged => Ok(()),
        flow::FlowOutcome::TimedOut => Err(Failure::Math(format!(
            "flow timed out at residual {:.3e}",
            run.state.residual
        ))),
    }
}

/// Grid dump of the final potential with a header naming the problem.
fn potential_csv(prob: &TorusProblem, phi: &PotentialField) -> String {
    let mut out = format!(
        "# n={} N={} g0=[{},{},{}] operator={}\n",
        prob.n,
        prob.grid,
        prob.g0.a11,
        prob.g0.a12,
        prob.g0.a22,
        serde_json::to_string(&prob.spec).unwrap_or_default()
    );
    out.push_str("ix,iy,phi\n");
    for (idx, v) in phi.values.iter().enumerate() {
        let (ix, iy) = (idx % prob.grid, idx / prob.grid);
        out.push_str(&format!("{ix},{iy},{v:.16e}\n"));
    }
    out
}

fn solution_csv(f: &GridFunction) -> String {
    let grid = &f.grid;
    let mut out = format!(
        "# domain={} resolution={} h={:.10e}\n",
        serde_json::to_string(&grid.shape).unwrap_or_default(),
        grid.nx,
        grid.h
    );
    out.push_str("x,y,value,class\n");
    for flat in 0..grid.node_count() {
        let class = match grid.class_of(flat) {
            NodeClass::Interior => "interior",
            NodeClass::Boundary => "boundary",
            NodeClass::Exterior => continue,
        };
        let p = grid.node_xy(flat);
        out.push_str(&format!(
            "{:.10e},{:.10e},{:.16e},{class}\n",
            p[0], p[1], f.values[flat]
        ));
    }
    out
}

fn solve_dirichlet(cli: &Cli, path: &Path, toric_target: bool) -> Result<(), Failure> {
    let cfg: config::SolveConfig = load_config(path)?;
    cfg.validate().map_err(Failure::from)?;
    let result = if toric_target {
        pde::solve_toric_equation(&cfg)
    } else {
        pde::solve_model_dirichlet(&cfg)
    };
    let result = result.map_err(Failure::from)?;
    write_text(&cli.out, "solution.csv", &solution_csv(&result.solution))?;
    write_text(&cli.out, "newton.csv", &result.log.to_csv())?;
    #[derive(Serialize)]
    struct Summary {
        residual: f64,
        min_hessian_eig: f64,
        newton_iters: usize,
    }
    write_json(
        &cli.out,
        "summary.json",
        &Summary {
            residual: result.residual,
            min_hessian_eig: result.min_hessian_eig,
            newton_iters: result.log.rows.len(),
        },
    )?;
    println!(
        "solved: residual {:.3e}, min Hessian eigenvalue {:.3e}",
        result.residual, result.min_hessian_eig
    );
    Ok(())
}

fn continuity(cli: &Cli, path: &Path) -> Result<(), Failure> {
    let cfg: config::ContinuityConfig = load_config(path)?;
    cfg.problem.validate().map_err(Failure::from)?;
    let result =
        pde::continuity_solve(&cfg.problem, cfg.d_start, cfg.d_end, cfg.stages, cfg.c_schedule)
            .map_err(Failure::from)?;
    let mut csv = String::from("d,c,converged,newton_iters,residual\n");
    for s in &result.stages {
        csv.push_str(&format!(
            "{:.10e},{:.10e},{},{},{:.10e}\n",
            s.d, s.c, s.converged, s.newton_iters, s.residual
        ));
    }
    write_text(&cli.out, "stages.csv", &csv)?;
    if let Some(sol) = &result.final_solution {
        write_text(&cli.out, "solution.csv", &solution_csv(sol))?;
    }
    #[derive(Serialize)]
    struct Summary {
        completed: bool,
        stalled_at: Option<f64>,
        stages: usize,
    }
    write_json(
        &cli.out,
        "summary.json",
        &Summary {
            completed: result.completed,
            stalled_at: result.stalled_at,
            stages: result.stages.len(),
        },
    )?;
    if result.completed {
        println!("continuity path completed ({} stages)", result.stages.len());
        Ok(())
    } else {
        let d = result.stalled_at.unwrap_or(f64::NAN);
        println!("continuity path stalled at d = {d:.6}");
        Err(Failure::Math(format!("path stalled at d = {d:.6}")))
    }
}

fn legendre(cli: &Cli, path: &Path) -> Result<(), Failure> {
    let cfg: config::LegendreConfig = load_config(path)?;
    let potential = cfg.potential.clone();
    let grid = std::sync::Arc::new(
        pde::DomainGrid::new(cfg.domain.clone(), cfg.resolution, &|x: &[f64]| {
            potential.value(x)
        })
        .map_err(Failure::from)?,
    );
    let g = GridFunction::sample(grid, &|x| potential.value(x));
    let transform =
        pde::legendre_transform(&g, cfg.out_resolution, cfg.shrink).map_err(Failure::from)?;
    write_text(&cli.out, "transform.csv", &solution_csv(&transform))?;
    #[derive(Serialize)]
    struct Summary {
        image_min: Vec<f64>,
        image_max: Vec<f64>,
        min_hessian_eig: f64,
    }
    let (lo, hi) = match &transform.grid.shape {
        pde::DomainShape::Rect { min, max } => (min.clone(), max.clone()),
        pde::DomainShape::Ball { .. } => unreachable!("transform grids are rectangles"),
    };
    write_json(
        &cli.out,
        "summary.json",
        &Summary {
            image_min: lo,
            image_max: hi,
            min_hessian_eig: transform.min_hessian_eigenvalue(),
        },
    )?;
    println!("legendre transform written over the shrunken gradient image");
    Ok(())
}

fn verify_all(cli: &Cli) -> Result<(), Failure> {
    let report = suite::run_all(cli.seed);
    for c in &report.criteria {
        println!(
            "criterion {:>2} [{}] {} — {}",
            c.id,
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    write_text(&cli.out, "verify-report.json", &(report.to_json() + "\n"))?;
    if report.all_passed {
        Ok(())
    } else {
        let first = report.first_failure().expect("some criterion failed");
        Err(Failure::Math(format!("criterion {} ({}) failed", first.id, first.name)))
    }
}
