use std::fmt::Write as _;
use std::time::Duration;

use anyhow::{Context, Result};
use quic_core::io::{fmt_f64, read_matrix};
use quic_core::metrics::DEFAULT_NONZERO_THRESHOLD;
use quic_core::{
    recovery, relative_error, solve_quic, GroundTruth, LineSearchConfig, Problem, Solution,
    SolverConfig,
};
use rayon::prelude::*;
use serde_json::json;

use crate::args::{BenchArgs, SolverKind};
use crate::generate;
use crate::manifest::{ensure_dir, platform, read, write, RunManifest};
use crate::solve::{run_solver, scalar_problem};

/// Accuracy of the `f*` runs every cell is measured against.
const STAR_TOL: f64 = 1e-12;

enum Cell {
    Reached { seconds: f64, iterations: usize },
    OverBudget,
    Failed(String),
}

impl Cell {
    fn table_entry(&self) -> String {
        match self {
            Cell::Reached { seconds, .. } => format!("{seconds:.4}"),
            Cell::OverBudget => "*".into(),
            Cell::Failed(_) => "failed".into(),
        }
    }
}

fn base_config(args: &BenchArgs) -> SolverConfig {
    SolverConfig {
        line_search: LineSearchConfig {
            sigma: args.sigma,
            beta: args.beta,
            ..Default::default()
        },
        outer_tol: STAR_TOL,
        max_outer: 1000,
        inner_schedule_rate: args.inner_rate,
        use_block_decomposition: !args.no_block_decomp,
        ..Default::default()
    }
}

/// First point of the run's trace within `eps` of `f_star`.
fn time_to(sol: &Solution, f_star: f64, eps: f64) -> Cell {
    let hit = sol
        .trace
        .rows
        .iter()
        .find(|r| relative_error(r.f, f_star).is_ok_and(|e| e <= eps));
    match hit {
        Some(r) => Cell::Reached {
            seconds: r.seconds,
            iterations: r.iter + 1,
        },
        None if relative_error(sol.trace.f_initial, f_star).is_ok_and(|e| e <= eps) => {
            Cell::Reached {
                seconds: 0.0,
                iterations: 0,
            }
        }
        None => Cell::OverBudget,
    }
}

pub fn run(args: &BenchArgs) -> Result<u8> {
    let mut config = json!({
        "lambda": args.lambda,
        "penalize_diagonal": args.penalize_diagonal,
        "solvers": args.solver.iter().map(|s| s.name()).collect::<Vec<_>>(),
        "eps": args.eps,
        "budget_seconds": args.budget,
        "inner_rate": args.inner_rate,
        "sigma": args.sigma,
        "beta": args.beta,
        "block_decomposition": !args.no_block_decomp,
        "star_tol": STAR_TOL,
    });
    let budget =
        Duration::try_from_secs_f64(args.budget).context("--budget must be non-negative")?;

    let (dataset, s, truth, seed) = match &args.cov {
        Some(path) => {
            let s =
                read_matrix(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
            let truth = match &args.truth {
                Some(t) => Some(GroundTruth::from_precision(
                    read_matrix(&read(t)?).with_context(|| format!("parsing {}", t.display()))?,
                )),
                None => None,
            };
            let name = path
                .file_stem()
                .map_or("cov".into(), |n| n.to_string_lossy().into_owned());
            (name, s, truth, None)
        }
        None => {
            config["generator"] = generate::config_json(&args.gen);
            let g = generate::build(&args.gen)?;
            let name = format!("{:?}", args.gen.kind.expect("checked by build")).to_lowercase();
            (name, g.cov, Some(g.truth), Some(args.gen.seed))
        }
    };
    let mut manifest = RunManifest::start(config, seed);
    for path in [&args.cov, &args.truth].into_iter().flatten() {
        manifest.input(path)?;
    }
    let p = s.dim();
    let problems: Vec<Problem> = args
        .lambda
        .iter()
        .map(|&l| scalar_problem(s.clone(), l, args.penalize_diagonal))
        .collect::<Result<_>>()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads.unwrap_or(0))
        .build()
        .context("building worker pool")?;
    let base = base_config(args);

    let stars: Vec<quic_core::Result<Solution>> = pool.install(|| {
        problems
            .par_iter()
            .map(|prob| solve_quic(prob, None, &base))
            .collect()
    });

    let jobs: Vec<(usize, SolverKind)> = (0..problems.len())
        .flat_map(|li| args.solver.iter().map(move |&k| (li, k)))
        .collect();
    let tightest = args.eps.iter().copied().fold(f64::INFINITY, f64::min);
    let runs: Vec<quic_core::Result<Solution>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(li, kind)| {
                let target = stars[li]
                    .as_ref()
                    .ok()
                    .map(|s| s.f_opt + tightest * s.f_opt.abs());
                let cfg = SolverConfig {
                    time_limit: Some(budget),
                    max_outer: usize::MAX,
                    target_objective: target,
                    ..base.clone()
                };
                run_solver(kind, &problems[li], &cfg)
            })
            .collect()
    });

    let plat = platform();
    let mut cells_csv =
        String::from("dataset,p,lambda,solver,eps,seconds,iterations,status,platform\n");
    let mut table = String::from("dataset,p,lambda,eps");
    for k in &args.solver {
        let _ = write!(table, ",{}", k.name());
    }
    table.push('\n');

    for (li, &lambda) in args.lambda.iter().enumerate() {
        for &eps in &args.eps {
            let _ = write!(table, "{dataset},{p},{lambda},{eps:e}");
            for (ji, &(jl, kind)) in jobs.iter().enumerate() {
                if jl != li {
                    continue;
                }
                let cell = match (&stars[li], &runs[ji]) {
                    (Err(e), _) => Cell::Failed(format!("f* run: {e}")),
                    (_, Err(e)) => Cell::Failed(e.to_string()),
                    (Ok(star), Ok(sol)) => time_to(sol, star.f_opt, eps),
                };
                let (secs, iters, status) = match &cell {
                    Cell::Reached {
                        seconds,
                        iterations,
                    } => (fmt_f64(*seconds), iterations.to_string(), "ok".to_string()),
                    Cell::OverBudget => (String::new(), String::new(), "over_budget".into()),
                    Cell::Failed(msg) => (
                        String::new(),
                        String::new(),
                        format!("failed: {}", msg.replace(',', ";")),
                    ),
                };
                let _ = writeln!(
                    cells_csv,
                    "{dataset},{p},{lambda},{},{eps:e},{secs},{iters},{status},{plat}",
                    kind.name()
                );
                let _ = write!(table, ",{}", cell.table_entry());
            }
            table.push('\n');
        }
    }

    ensure_dir(&args.out)?;
    let mut outputs = vec![args.out.join("table.csv"), args.out.join("cells.csv")];
    write(&outputs[0], &table)?;
    write(&outputs[1], &cells_csv)?;
    if let Some(truth) = &truth {
        let mut rec = String::from("lambda,tpr,fpr,nnz_estimate,nnz_truth,threshold\n");
        for (li, &lambda) in args.lambda.iter().enumerate() {
            if let Ok(star) = &stars[li] {
                let r = recovery(&star.x, truth, DEFAULT_NONZERO_THRESHOLD)?;
                let _ = writeln!(
                    rec,
                    "{lambda},{},{},{},{},{:e}",
                    fmt_f64(r.tpr),
                    fmt_f64(r.fpr),
                    r.nnz_estimate,
                    r.nnz_truth,
                    r.threshold
                );
            }
        }
        let path = args.out.join("recovery.csv");
        write(&path, &rec)?;
        outputs.push(path);
    }
    manifest.finish(&args.out, &outputs)?;
    print!("{table}");
    Ok(0)
}
