use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use sdp_core::audit;
use sdp_core::diagnostics::regularity_probe;
use sdp_core::dual::{eval_penalized, PenaltyConfig, StepSchedule, StopCriteria};
use sdp_core::linalg;
use sdp_core::oracle::{enumerate_solution_rank, solve_dense, DenseOracleConfig, DenseProblem};
use sdp_core::pipeline::{default_recovery_schedule, run_pipeline, PipelineConfig, PipelineEvent};
use sdp_core::recovery::{default_rank, recover, CompressedSolution, RecoveryConfig, Which};
use sdp_core::spectral::EigensolverConfig;
use sdp_core::{SdpError, SdpProblem};

use crate::artifacts::Artifacts;
use crate::source::Source;
use crate::{CliError, OracleArgs, PerturbArgs, ProblemArgs, SolveArgs, SolverArgs};

const VERSION: &str = env!("CARGO_PKG_VERSION");

fn source_of(args: &ProblemArgs) -> Result<(String, Source), CliError> {
    let source_text = match (&args.problem, &args.graph, &args.obs) {
        (Some(p), None, None) => p.clone(),
        (None, Some(g), None) => format!("maxcut:{}", g.display()),
        (None, None, Some(o)) => format!("matcomp:{}", o.display()),
        (None, None, None) => return Err(CliError::Input("one of --problem, --graph, --obs is required".into())),
        _ => return Err(CliError::Input("--problem, --graph and --obs are mutually exclusive".into())),
    };
    let src = Source::parse(&source_text)?;
    src.validate()?;
    Ok((source_text, src))
}

fn parse_schedule(s: &str) -> Result<StepSchedule, CliError> {
    let (name, arg) = match s.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (s, None),
    };
    let num = |a: Option<&str>| -> Result<f64, CliError> {
        a.ok_or_else(|| CliError::Input(format!("schedule '{s}' needs a value")))?
            .parse()
            .map_err(|_| CliError::Input(format!("bad schedule value in '{s}'")))
    };
    match name {
        "polyak" => Ok(StepSchedule::Polyak {
            target: arg.map(|a| num(Some(a))).transpose()?,
        }),
        "invsqrt" => Ok(StepSchedule::InvSqrt { eta0: num(arg)? }),
        "adaptive" => Ok(StepSchedule::Adaptive { eta0: num(arg)? }),
        _ => Err(CliError::Input(format!("unknown schedule '{s}'"))),
    }
}

fn parse_penalty(alpha: Option<&str>, problem: &SdpProblem) -> Result<PenaltyConfig, CliError> {
    let Some(a) = alpha else {
        return Ok(if problem.trace_hint().is_some() {
            PenaltyConfig::TraceHintScaled
        } else {
            PenaltyConfig::DoublingSearch { d: 10 }
        });
    };
    if a == "trace" {
        return Ok(PenaltyConfig::TraceHintScaled);
    }
    if let Some(d) = a.strip_prefix("search:") {
        let d = d
            .parse()
            .map_err(|_| CliError::Input(format!("bad doubling depth in --alpha {a}")))?;
        return Ok(PenaltyConfig::DoublingSearch { d });
    }
    let alpha = a
        .parse()
        .map_err(|_| CliError::Input(format!("--alpha expects a number, 'trace' or 'search:<d>', got '{a}'")))?;
    Ok(PenaltyConfig::Explicit { alpha })
}

fn parse_rank(rank: &str, problem: &SdpProblem) -> Result<usize, CliError> {
    if rank == "auto" {
        return Ok(default_rank(problem.n(), problem.m(), None));
    }
    match rank.parse::<usize>() {
        Ok(r) if r >= 1 && r <= problem.n() => Ok(r),
        _ => Err(CliError::Input(format!(
            "--rank must be 'auto' or an integer in 1..={}, got '{rank}'",
            problem.n()
        ))),
    }
}

fn eig_config(args: &SolverArgs, seed: u64) -> Result<EigensolverConfig, CliError> {
    if !(args.tol > 0.0 && args.tol < 1.0) {
        return Err(CliError::Input(format!("--tol must be in (0, 1), got {}", args.tol)));
    }
    Ok(EigensolverConfig {
        tol: args.tol,
        max_lanczos_dim: args.krylov_dim,
        seed,
        ..EigensolverConfig::default()
    })
}

fn recovery_config(args: &SolverArgs, problem: &SdpProblem, eig: &EigensolverConfig) -> Result<RecoveryConfig, CliError> {
    let mut rc = RecoveryConfig::new(parse_rank(&args.rank, problem)?);
    rc.gamma = args.gamma;
    rc.eig = eig.clone();
    Ok(rc)
}

fn option_of(which: Which) -> u8 {
    match which {
        Which::MinFeas => 1,
        Which::MinObj => 2,
    }
}

#[derive(Serialize)]
struct TraceCsvRow {
    iter: usize,
    wall_time_s: f64,
    g_alpha: f64,
    lambda_min: f64,
    dual_infeas: f64,
    best_g_alpha: f64,
    alpha: f64,
}

#[derive(Serialize)]
struct RecoveryCsvRow {
    iter: usize,
    option: u8,
    r: usize,
    residual: f64,
    objective: f64,
    primal_subopt_bound: f64,
    dimacs_feas: f64,
    dimacs_gap: f64,
    #[serde(rename = "T")]
    threshold: Option<f64>,
    #[serde(rename = "sigma_min_AV")]
    sigma_min_av: f64,
    alpha: f64,
}

fn io_err(e: impl std::fmt::Display) -> SdpError {
    SdpError::Io(std::io::Error::other(e.to_string()))
}

pub fn solve(args: &SolveArgs) -> Result<(), CliError> {
    let (source_text, src) = source_of(&args.problem)?;
    let seed = args.problem.seed;
    let problem = src.load(seed)?;
    let eig = eig_config(&args.solver, seed)?;
    if args.max_iters == 0 {
        return Err(CliError::Input("--max-iters must be >= 1".into()));
    }
    let time_budget = match args.time_budget {
        Some(t) if !(t > 0.0 && t.is_finite()) => {
            return Err(CliError::Input(format!("--time-budget must be > 0, got {t}")))
        }
        t => t.map(Duration::from_secs_f64),
    };
    let cfg = PipelineConfig {
        penalty: parse_penalty(args.solver.alpha.as_deref(), &problem)?,
        schedule: parse_schedule(&args.solver.schedule)?,
        eig: eig.clone(),
        stop: StopCriteria {
            max_iters: Some(args.max_iters),
            time_budget,
            target_gval: None,
        },
        recover_at: args
            .recover_at
            .clone()
            .unwrap_or_else(|| default_recovery_schedule(args.max_iters)),
        recovery: recovery_config(&args.solver, &problem, &eig)?,
        option: args.solver.option,
        sigma_max_a: None,
    };
    cfg.validate()?;
    cfg.penalty.candidates(&problem)?;

    let mut art = Artifacts::create(&args.problem.out)?;
    let mut trace = art.csv("trace.csv")?;
    let mut recov = art.csv("recovery.csv")?;
    let mut alpha = f64::NAN;
    let result = run_pipeline(&problem, &cfg, &mut |ev| {
        match ev {
            PipelineEvent::AlphaStart(a) => alpha = a,
            PipelineEvent::Iteration(row) => trace
                .serialize(TraceCsvRow {
                    iter: row.iter,
                    wall_time_s: row.wall_time_s,
                    g_alpha: row.g_alpha,
                    lambda_min: row.lambda_min,
                    dual_infeas: row.dual_infeas,
                    best_g_alpha: row.best_g_alpha,
                    alpha,
                })
                .map_err(io_err)?,
            PipelineEvent::Recovery(ev) => {
                recov
                    .serialize(RecoveryCsvRow {
                        iter: ev.iter,
                        option: option_of(ev.which),
                        r: ev.r,
                        residual: ev.residual,
                        objective: ev.objective,
                        primal_subopt_bound: ev.quality.primal_subopt_bound,
                        dimacs_feas: ev.quality.dimacs_feas,
                        dimacs_gap: ev.quality.dimacs_gap,
                        threshold: ev.threshold,
                        sigma_min_av: ev.sigma_min_av,
                        alpha: ev.alpha,
                    })
                    .map_err(io_err)?;
                recov.flush()?;
            }
        }
        Ok(())
    });
    trace.flush()?;
    recov.flush()?;
    drop((trace, recov));
    let out = result?;

    let sol = out.recovery.solution();
    art.matrix("V.txt", &sol.v)?;
    art.matrix("S.txt", &sol.s)?;
    let summary = json!({
        "version": VERSION,
        "command": "solve",
        "source": source_text,
        "seeds": { "instance": seed, "eigensolver": eig.seed },
        "n": problem.n(),
        "m": problem.m(),
        "config": cfg,
        "alpha": out.alpha,
        "alpha_search": out.alpha_search,
        "stop_reason": out.stop_reason,
        "iterations": out.iterations,
        "best_iter": out.best.iter,
        "best_g_alpha": out.best.g_val,
        "best_lambda_min": out.best.lambda_min,
        "certified_lower_bound": out.certified_lower_bound,
        "quality": out.quality,
        "conditioning": out.conditioning,
        "recovery": out.recovery,
        "audit_peak_entries": audit::peak_entries(),
    });
    art.json("summary.json", &summary)?;
    art.commit()?;
    println!(
        "alpha {:.6e}  iters {}  objective {:.10e}  dimacs_feas {:.3e}  dimacs_gap {:.3e}",
        out.alpha, out.iterations, out.quality.primal_objective, out.quality.dimacs_feas, out.quality.dimacs_gap
    );
    Ok(())
}

#[derive(Serialize)]
struct PerturbRow {
    noise: f64,
    r: usize,
    option: u8,
    dual_rel_subopt: f64,
    rel_subopt: f64,
    rel_infeas: f64,
    rel_dist: f64,
}

fn oracle_config(max_n: usize) -> DenseOracleConfig {
    DenseOracleConfig {
        max_n,
        ..DenseOracleConfig::default()
    }
}

pub fn perturb(args: &PerturbArgs) -> Result<(), CliError> {
    let (source_text, src) = source_of(&args.problem)?;
    let seed = args.problem.seed;
    if args.noise.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
        return Err(CliError::Input("noise levels must be finite and >= 0".into()));
    }
    let problem = src.load(seed)?;
    let eig = eig_config(&args.solver, seed)?;
    let alpha = match parse_penalty(args.solver.alpha.as_deref(), &problem)? {
        PenaltyConfig::Explicit { alpha } => alpha,
        PenaltyConfig::TraceHintScaled => PenaltyConfig::TraceHintScaled.candidates(&problem)?[0],
        PenaltyConfig::DoublingSearch { .. } => {
            return Err(CliError::Input("perturb needs an explicit --alpha or a trace bound".into()))
        }
    };
    let base = recovery_config(&args.solver, &problem, &eig)?;
    let sol = solve_dense(&problem, &oracle_config(args.max_n))?;
    let (rstar, _) = enumerate_solution_rank(&sol);
    let ranks: Vec<usize> = if 3 * rstar.max(1) <= problem.n() && rstar > 0 {
        vec![rstar, 3 * rstar]
    } else {
        vec![rstar.max(1)]
    };
    let b_norm = linalg::norm2(problem.b());
    let x_norm = sol.x.norm().max(f64::MIN_POSITIVE);
    let p_scale = sol.p_star.abs().max(f64::MIN_POSITIVE);
    let y_norm = linalg::norm2(&sol.y);

    let mut art = Artifacts::create(&args.problem.out)?;
    let mut w = art.csv("perturb.csv")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &noise in &args.noise {
        let s = linalg::random_unit_vector(&mut rng, problem.m());
        let y: Vec<f64> = sol.y.iter().zip(&s).map(|(a, d)| a + noise * y_norm * d).collect();
        let g = eval_penalized(&problem, &y, alpha, &eig, None)?.g_val;
        let dual_rel_subopt = (sol.p_star + g).abs() / p_scale;
        for &r in &ranks {
            let mut rc = base.clone();
            rc.r = r;
            let rec = match recover(&problem, &y, 2, &rc) {
                Ok(rec) => rec,
                Err(e) => {
                    eprintln!("noise {noise:e}, r = {r}: MinObj skipped ({e})");
                    recover(&problem, &y, 1, &rc)?
                }
            };
            let mut row = |c: &CompressedSolution| -> Result<(), CliError> {
                w.serialize(PerturbRow {
                    noise,
                    r,
                    option: option_of(c.which),
                    dual_rel_subopt,
                    rel_subopt: (c.objective - sol.p_star).abs() / p_scale,
                    rel_infeas: c.residual / b_norm.max(f64::MIN_POSITIVE),
                    rel_dist: (&c.to_dense() - &sol.x).norm() / x_norm,
                })?;
                Ok(())
            };
            row(&rec.minfeas)?;
            if let Some(c) = &rec.minobj {
                row(c)?;
            }
        }
        w.flush()?;
    }
    drop(w);
    art.json(
        "summary.json",
        &json!({
            "version": VERSION,
            "command": "perturb",
            "source": source_text,
            "seeds": { "instance": seed, "noise": seed, "eigensolver": eig.seed },
            "alpha": alpha,
            "gamma": base.gamma,
            "p_star": sol.p_star,
            "rank_star": rstar,
            "ranks": ranks,
            "noise": args.noise,
            "audit_peak_entries": audit::peak_entries(),
        }),
    )?;
    art.commit()?;
    Ok(())
}

pub fn oracle(args: &OracleArgs) -> Result<(), CliError> {
    let (source_text, src) = source_of(&args.problem)?;
    let seed = args.problem.seed;
    let problem = src.load(seed)?;
    let cfg = oracle_config(args.max_n);
    let sol = solve_dense(&problem, &cfg)?;
    let others = (0..args.restarts)
        .map(|k| {
            solve_dense(
                &problem,
                &DenseOracleConfig {
                    start_seed: Some(seed.wrapping_add(k as u64 + 1)),
                    ..cfg.clone()
                },
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let dp = DenseProblem::from_problem(&problem);
    let regularity = regularity_probe(&dp, &sol, &others);
    let (rank, _) = enumerate_solution_rank(&sol);

    let mut art = Artifacts::create(&args.problem.out)?;
    art.matrix("X.txt", &sol.x)?;
    art.json(
        "oracle.json",
        &json!({
            "version": VERSION,
            "source": source_text,
            "seeds": { "instance": seed, "restarts": args.restarts },
            "n": problem.n(),
            "m": problem.m(),
            "solution": sol,
            "rank": rank,
            "regularity_probe": regularity,
        }),
    )?;
    art.commit()?;
    println!("p* = {:.10e}  d* = {:.10e}  rank {rank}", sol.p_star, sol.d_star);
    if regularity.rank_deficient {
        println!("warning: rank X* + rank Z(y*) = {} < n = {}", regularity.rank_sum, regularity.n);
    }
    Ok(())
}
