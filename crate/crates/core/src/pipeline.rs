//! Dual iterations with primal recovery at scheduled iterations.

use serde::Serialize;

use crate::diagnostics::{quality_from_parts, ConditioningReport, QualityReport};
use crate::dual::{
    find_feasible_anchor, repair_feasibility, DualIterate, DualSolver, PenaltyConfig, StepSchedule, StopCriteria,
    StopReason, TraceRow,
};
use crate::error::{Result, SdpError};
use crate::problem::SdpProblem;
use crate::recovery::{recover, CompressedSolution, Recovery, RecoveryConfig, Which};
use crate::spectral::{operator_norm_amap, EigensolverConfig};

#[derive(Debug, Clone, Serialize)]
pub struct PipelineConfig {
    pub penalty: PenaltyConfig,
    pub schedule: StepSchedule,
    pub eig: EigensolverConfig,
    pub stop: StopCriteria,
    /// Iterations after which the primal is recovered. A final recovery
    /// always runs at the last iteration.
    pub recover_at: Vec<usize>,
    pub recovery: RecoveryConfig,
    /// 1 = MinFeas, 2 = MinFeas then MinObj.
    pub option: u8,
    /// `||A||_op`; estimated by power iteration when absent.
    pub sigma_max_a: Option<f64>,
}

/// `10, 100, 1000, ...` up to `max`.
pub fn default_recovery_schedule(max: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut k = 10usize;
    while k <= max {
        out.push(k);
        match k.checked_mul(10) {
            Some(next) => k = next,
            None => break,
        }
    }
    out
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.recover_at.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SdpError::InvalidInput("recovery schedule must be strictly increasing".into()));
        }
        if self.recover_at.first() == Some(&0) {
            return Err(SdpError::InvalidInput("recovery iterations start at 1".into()));
        }
        if self.option != 1 && self.option != 2 {
            return Err(SdpError::InvalidInput(format!("recovery option must be 1 or 2, got {}", self.option)));
        }
        Ok(())
    }
}

/// One recovered primal.
#[derive(Debug, Clone, Serialize)]
pub struct RecoveryEvent {
    pub iter: usize,
    pub alpha: f64,
    pub which: Which,
    pub r: usize,
    pub residual: f64,
    pub objective: f64,
    pub quality: QualityReport,
    pub threshold: Option<f64>,
    pub sigma_min_av: f64,
    pub clustered: bool,
}

/// Progress notifications.
#[derive(Debug, Clone)]
pub enum PipelineEvent<'a> {
    AlphaStart(f64),
    Iteration(&'a TraceRow),
    Recovery(&'a RecoveryEvent),
}

/// Outcome for one penalty weight of a search.
#[derive(Debug, Clone, Serialize)]
pub struct AlphaTrial {
    pub alpha: f64,
    pub residual: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineOutput {
    pub alpha: f64,
    pub stop_reason: StopReason,
    pub iterations: usize,
    pub best: DualIterate,
    pub trace: Vec<TraceRow>,
    pub events: Vec<RecoveryEvent>,
    pub recovery: Recovery,
    pub quality: QualityReport,
    pub conditioning: ConditioningReport,
    /// `b^T y` at the best iterate moved into the feasible set, a certified
    /// lower bound on the optimal value. `None` without a feasible anchor.
    pub certified_lower_bound: Option<f64>,
    pub alpha_search: Vec<AlphaTrial>,
}

/// Events for a recovery at iteration `iter` from the best iterate `it`.
fn events_for(alpha: f64, iter: usize, it: &DualIterate, rec: &Recovery, b: &[f64]) -> Vec<RecoveryEvent> {
    let make = |sol: &CompressedSolution| RecoveryEvent {
        iter,
        alpha,
        which: sol.which,
        r: rec.r,
        residual: sol.residual,
        objective: sol.objective,
        quality: quality_from_parts(sol.objective, sol.residual, b, &it.y, alpha, it.lambda_min),
        threshold: rec.threshold,
        sigma_min_av: rec.sigma_min_av,
        clustered: rec.clustered,
    };
    let mut out = vec![make(&rec.minfeas)];
    if let Some(s) = &rec.minobj {
        out.push(make(s));
    }
    out
}

struct SingleRun {
    stop_reason: StopReason,
    iterations: usize,
    best: DualIterate,
    trace: Vec<TraceRow>,
    events: Vec<RecoveryEvent>,
    recovery: Recovery,
}

fn run_single(
    problem: &SdpProblem,
    alpha: f64,
    cfg: &PipelineConfig,
    on_event: &mut dyn FnMut(PipelineEvent) -> Result<()>,
) -> Result<SingleRun> {
    let mut solver = DualSolver::new(problem, alpha, cfg.schedule.clone(), cfg.eig.clone(), None)?;
    let mut events = Vec::new();
    let mut last: Option<(usize, Recovery)> = None;
    let mut next = 0;
    let b = problem.b();
    let reason = solver.run_with(&cfg.stop, |s, it| {
        on_event(PipelineEvent::Iteration(s.trace().last().expect("row was just pushed")))?;
        while next < cfg.recover_at.len() && cfg.recover_at[next] < it.iter {
            next += 1;
        }
        if next < cfg.recover_at.len() && cfg.recover_at[next] == it.iter {
            next += 1;
            let best = s.best().expect("an iterate was evaluated");
            let rec = recover(problem, &best.y, cfg.option, &cfg.recovery)?;
            for ev in events_for(alpha, it.iter, best, &rec, b) {
                on_event(PipelineEvent::Recovery(&ev))?;
                events.push(ev);
            }
            last = Some((it.iter, rec));
        }
        Ok(())
    })?;
    let best = solver.best().cloned().ok_or_else(|| SdpError::InvalidInput("no iterations were run".into()))?;
    let iterations = solver.iterations();
    let recovery = match last {
        Some((k, rec)) if k == iterations => rec,
        _ => {
            let rec = recover(problem, &best.y, cfg.option, &cfg.recovery)?;
            for ev in events_for(alpha, iterations, &best, &rec, b) {
                on_event(PipelineEvent::Recovery(&ev))?;
                events.push(ev);
            }
            rec
        }
    };
    Ok(SingleRun {
        stop_reason: reason,
        iterations,
        best,
        trace: solver.trace().to_vec(),
        events,
        recovery,
    })
}

/// Runs the dual method and recovers the primal on schedule. With a doubling
/// search the weights are tried in increasing order until the final
/// recovered residual stops improving.
pub fn run_pipeline(
    problem: &SdpProblem,
    cfg: &PipelineConfig,
    on_event: &mut dyn FnMut(PipelineEvent) -> Result<()>,
) -> Result<PipelineOutput> {
    cfg.validate()?;
    let alphas = cfg.penalty.candidates(problem)?;
    let searching = alphas.len() > 1;
    let mut trials = Vec::new();
    let mut chosen: Option<(f64, SingleRun)> = None;
    for alpha in alphas {
        on_event(PipelineEvent::AlphaStart(alpha))?;
        match run_single(problem, alpha, cfg, on_event) {
            Ok(run) => {
                let res = run.recovery.solution().residual;
                trials.push(AlphaTrial {
                    alpha,
                    residual: Some(res),
                    error: None,
                });
                let improved = chosen.as_ref().is_none_or(|(_, c)| res < c.recovery.solution().residual);
                if improved {
                    chosen = Some((alpha, run));
                } else {
                    break;
                }
            }
            Err(e @ SdpError::Diverged { .. }) if searching => trials.push(AlphaTrial {
                alpha,
                residual: None,
                error: Some(e.to_string()),
            }),
            Err(e) => return Err(e),
        }
    }
    let (alpha, run) = chosen.ok_or_else(|| SdpError::InvalidInput("every penalty weight diverged".into()))?;

    let b = problem.b();
    let sol = run.recovery.solution();
    let quality = quality_from_parts(sol.objective, sol.residual, b, &run.best.y, alpha, run.best.lambda_min);
    let sigma_max_a = match cfg.sigma_max_a {
        Some(s) => s,
        None => operator_norm_amap(problem, 200, cfg.eig.seed),
    };
    let rec = &run.recovery;
    let kappa = (rec.sigma_min_av > 0.0).then(|| sigma_max_a / rec.sigma_min_av);
    let conditioning = ConditioningReport {
        threshold: rec.threshold,
        sigma_min_av: rec.sigma_min_av,
        sigma_max_a,
        kappa_v: kappa,
        kappa_infinite: kappa.is_none(),
        structurally_singular: rec.structurally_singular,
        clustered: rec.clustered,
    };
    let certified_lower_bound = certified_bound(problem, &run.best, &cfg.eig)?;
    Ok(PipelineOutput {
        alpha,
        stop_reason: run.stop_reason,
        iterations: run.iterations,
        best: run.best,
        trace: run.trace,
        events: run.events,
        recovery: run.recovery,
        quality,
        conditioning,
        certified_lower_bound,
        alpha_search: trials,
    })
}

fn certified_bound(problem: &SdpProblem, best: &DualIterate, eig: &EigensolverConfig) -> Result<Option<f64>> {
    let dot = |y: &[f64]| problem.b().iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    if best.lambda_min >= 0.0 {
        return Ok(Some(dot(&best.y)));
    }
    let anchor = match find_feasible_anchor(problem, eig) {
        Ok(a) => a,
        Err(SdpError::NoFeasibleAnchor(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let rep = repair_feasibility(problem, &best.y, &anchor, None, eig)?;
    Ok((rep.lambda_min >= -eig.tol).then(|| dot(&rep.y)))
}
