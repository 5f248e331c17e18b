use std::time::Duration;

use anyhow::{bail, Context, Result};
use quic_core::io::{read_matrix, write_matrix_sparse, write_trace_csv};
use quic_core::{
    solve_quic, solve_reference_with, LineSearchConfig, Problem, QuicError, ReferenceConfig,
    Solution, SolverConfig, StopReason, SymMatrix,
};
use serde_json::json;

use crate::args::{SolveArgs, SolverKind, TuningArgs};
use crate::manifest::{ensure_dir, read, write, RunManifest};
use crate::{EXIT_NOT_CONVERGED, EXIT_STALLED};

pub fn quic_config(t: &TuningArgs, seed: u64) -> Result<SolverConfig> {
    let cfg = SolverConfig {
        line_search: LineSearchConfig {
            sigma: t.sigma,
            beta: t.beta,
            ..Default::default()
        },
        outer_tol: t.tol,
        max_outer: t.max_outer,
        inner_schedule_rate: t.inner_rate,
        seed,
        use_block_decomposition: !t.no_block_decomp,
        coordinate_permutation: t.permute_coords,
        time_limit: time_limit(t.time_limit)?,
        ..Default::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn time_limit(secs: Option<f64>) -> Result<Option<Duration>> {
    secs.map(|s| {
        Duration::try_from_secs_f64(s)
            .context("time limit must be a non-negative number of seconds")
    })
    .transpose()
}

pub fn config_json(cfg: &SolverConfig) -> serde_json::Value {
    json!({
        "tol": cfg.outer_tol,
        "max_outer": cfg.max_outer,
        "inner_rate": cfg.inner_schedule_rate,
        "inner_min_sweeps": cfg.inner_min_sweeps,
        "inner_stagnation_tol": cfg.inner_stagnation_tol,
        "sigma": cfg.line_search.sigma,
        "beta": cfg.line_search.beta,
        "max_backtracks": cfg.line_search.max_backtracks,
        "block_decomposition": cfg.use_block_decomposition,
        "permute_coords": cfg.coordinate_permutation,
        "seed": cfg.seed,
        "time_limit": cfg.time_limit.map(|d| d.as_secs_f64()),
    })
}

/// Scalar penalties cover the off-diagonal only unless `penalize_diagonal`.
pub fn scalar_problem(s: SymMatrix, lambda: f64, penalize_diagonal: bool) -> Result<Problem> {
    Ok(if penalize_diagonal {
        Problem::uniform(s, lambda)?
    } else {
        Problem::off_diagonal(s, lambda)?
    })
}

pub fn run_solver(
    kind: SolverKind,
    prob: &Problem,
    cfg: &SolverConfig,
) -> quic_core::Result<Solution> {
    match kind {
        SolverKind::Quic => solve_quic(prob, None, cfg),
        SolverKind::Reference => solve_reference_with(
            prob,
            None,
            &ReferenceConfig {
                tol: cfg.outer_tol,
                max_iter: cfg.max_outer,
                time_limit: cfg.time_limit,
                target_objective: cfg.target_objective,
                ..Default::default()
            },
        ),
    }
}

pub fn run(args: &SolveArgs) -> Result<u8> {
    let cfg = quic_config(&args.tuning, args.seed)?;
    let mut config = config_json(&cfg);
    config["solver"] = json!(args.solver.name());
    config["lambda"] = json!(args.lambda);
    config["penalize_diagonal"] = json!(args.penalize_diagonal);
    let mut manifest = RunManifest::start(config, Some(args.seed));

    let s = read_matrix(&read(&args.cov)?)
        .with_context(|| format!("parsing {}", args.cov.display()))?;
    manifest.input(&args.cov)?;
    let prob = match (&args.lambda_file, args.lambda) {
        (Some(path), _) => {
            let lam =
                read_matrix(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
            manifest.input(path)?;
            Problem::new(s, lam)?
        }
        (None, Some(l)) => scalar_problem(s, l, args.penalize_diagonal)?,
        (None, None) => bail!("one of --lambda or --lambda-file is required"),
    };

    ensure_dir(&args.out)?;
    let trace_path = args.out.join("trace.csv");
    let sol = match run_solver(args.solver, &prob, &cfg) {
        Ok(sol) => sol,
        Err(QuicError::LineSearchFailed {
            backtracks,
            delta,
            trace,
        }) => {
            if let Some(t) = &trace {
                write(&trace_path, &write_trace_csv(t))?;
            }
            return Err(QuicError::LineSearchFailed {
                backtracks,
                delta,
                trace,
            }
            .into());
        }
        Err(e) => return Err(e.into()),
    };

    let solution_path = args.out.join("solution.txt");
    write(&solution_path, &write_matrix_sparse(&sol.x))?;
    write(&trace_path, &write_trace_csv(&sol.trace))?;
    manifest.finish(&args.out, &[solution_path, trace_path])?;

    println!(
        "{}: f = {:.12e}, {} iterations, subgradient {:.3e}, {} blocks, stop: {:?}",
        args.solver.name(),
        sol.f_opt,
        sol.iterations,
        sol.subgrad_norm,
        sol.blocks,
        sol.stop
    );
    Ok(match sol.stop {
        StopReason::Converged => 0,
        StopReason::Stalled => {
            eprintln!(
                "warning: progress fell below round-off before reaching tol {:e}",
                cfg.outer_tol
            );
            EXIT_STALLED
        }
        StopReason::MaxIterations | StopReason::TimeLimit | StopReason::TargetReached => {
            eprintln!("warning: not converged ({:?})", sol.stop);
            EXIT_NOT_CONVERGED
        }
    })
}
