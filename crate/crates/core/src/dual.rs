//! Subgradient minimization of the penalized dual
//! `g_alpha(y) = -b^T y + alpha * max(-lambda_min(Z(y)), 0)`, plus the
//! feasibility repair that turns a near-feasible iterate into a feasible one.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Result, SdpError};
use crate::linalg;
use crate::problem::{ConstraintMap, SdpProblem};
use crate::spectral::{min_eigpair, EigensolverConfig};

/// Growth factor that triggers the divergence guard.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

/// How the penalty weight is chosen.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum PenaltyConfig {
    Explicit { alpha: f64 },
    /// `alpha = 1.1 * trace_hint`.
    TraceHintScaled,
    /// Candidates `2, 4, ..., 2^d`.
    DoublingSearch { d: u32 },
}

impl PenaltyConfig {
    /// The candidate weights, in the order they should be tried.
    pub fn candidates(&self, problem: &SdpProblem) -> Result<Vec<f64>> {
        let out = match self {
            PenaltyConfig::Explicit { alpha } => vec![*alpha],
            PenaltyConfig::TraceHintScaled => {
                let hint = problem.trace_hint().ok_or_else(|| {
                    SdpError::InvalidInput("trace-hint-scaled penalty needs a trace hint".into())
                })?;
                vec![1.1 * hint]
            }
            PenaltyConfig::DoublingSearch { d } => {
                if *d == 0 {
                    return Err(SdpError::InvalidInput("doubling search needs d >= 1".into()));
                }
                (1..=*d).map(|k| 2f64.powi(k as i32)).collect()
            }
        };
        if out.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(SdpError::InvalidInput(format!("penalty weights must be > 0, got {out:?}")));
        }
        Ok(out)
    }
}

/// Step-size rule for `y_{k+1} = y_k - eta_k g_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StepSchedule {
    /// `eta_k = (g_k - target_k) / ||s_k||^2`. With no target the level is
    /// estimated as `best - delta`; `delta` grows by 1.5 (up to its initial
    /// value) after each sufficient decrease and is halved when progress stalls.
    Polyak { target: Option<f64> },
    /// `eta_k = eta0 / sqrt(k)`.
    InvSqrt { eta0: f64 },
    /// `eta_k = eta0 / sqrt(sum_{i <= k} ||s_i||^2)`.
    Adaptive { eta0: f64 },
}

impl StepSchedule {
    fn validate(&self) -> Result<()> {
        match self {
            StepSchedule::Polyak { target: Some(t) } if !t.is_finite() => {
                Err(SdpError::InvalidInput("Polyak target must be finite".into()))
            }
            StepSchedule::InvSqrt { eta0 } | StepSchedule::Adaptive { eta0 }
                if !(eta0.is_finite() && *eta0 > 0.0) =>
            {
                Err(SdpError::InvalidInput(format!("base step {eta0} must be > 0")))
            }
            _ => Ok(()),
        }
    }
}

/// Mutable state of a [`StepSchedule`].
#[derive(Debug, Clone)]
pub struct ScheduleState {
    schedule: StepSchedule,
    sum_sq: f64,
    delta: Option<f64>,
    delta0: Option<f64>,
    level_ref: f64,
    stall: usize,
}

const POLYAK_STALL: usize = 20;

impl ScheduleState {
    pub fn new(schedule: StepSchedule) -> Self {
        Self {
            schedule,
            sum_sq: 0.0,
            delta: None,
            delta0: None,
            level_ref: f64::INFINITY,
            stall: 0,
        }
    }

    /// Step for iteration `k >= 1` given the current value, its subgradient
    /// norm and the best value seen so far (including the current one).
    pub fn step(&mut self, k: usize, g_val: f64, s_norm: f64, best: f64) -> f64 {
        let s_sq = s_norm * s_norm;
        self.sum_sq += s_sq;
        if s_sq == 0.0 {
            return 0.0;
        }
        match &self.schedule {
            StepSchedule::InvSqrt { eta0 } => eta0 / (k as f64).sqrt(),
            StepSchedule::Adaptive { eta0 } => eta0 / self.sum_sq.sqrt(),
            StepSchedule::Polyak { target: Some(t) } => (g_val - t).max(0.0) / s_sq,
            StepSchedule::Polyak { target: None } => {
                let delta = *self
                    .delta
                    .get_or_insert_with(|| 0.1 * g_val.abs().max(1.0));
                let cap = *self.delta0.get_or_insert(delta);
                if best <= self.level_ref - 0.5 * delta {
                    self.level_ref = best;
                    self.stall = 0;
                    self.delta = Some((1.5 * delta).min(cap));
                } else {
                    self.stall += 1;
                    if self.stall >= POLYAK_STALL {
                        self.delta = Some((delta * 0.5).max(1e-14));
                        self.level_ref = best;
                        self.stall = 0;
                    }
                }
                let level = best - self.delta.unwrap_or(delta);
                (g_val - level).max(0.0) / s_sq
            }
        }
    }
}

/// `g_alpha(y)` together with the eigenpair it was computed from.
#[derive(Debug, Clone, Serialize)]
pub struct PenalizedValue {
    pub g_val: f64,
    pub lambda_min: f64,
    pub v: Vec<f64>,
    pub eig_residual: f64,
    pub eig_converged: bool,
}

/// Evaluates `g_alpha(y)`; `warm` seeds the eigensolver.
pub fn eval_penalized(
    problem: &SdpProblem,
    y: &[f64],
    alpha: f64,
    eig: &EigensolverConfig,
    warm: Option<&[f64]>,
) -> Result<PenalizedValue> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(SdpError::InvalidInput(format!("alpha = {alpha} must be > 0")));
    }
    if y.len() != problem.m() {
        return Err(SdpError::Dimension(format!("y has length {}, m = {}", y.len(), problem.m())));
    }
    let pair = min_eigpair(&problem.slack(y), eig, warm)?;
    let g_val = -linalg::dot(problem.b(), y) + alpha * (-pair.lambda).max(0.0);
    if !g_val.is_finite() {
        return Err(SdpError::NonFinite("penalized dual value"));
    }
    Ok(PenalizedValue {
        g_val,
        lambda_min: pair.lambda,
        v: pair.v,
        eig_residual: pair.residual,
        eig_converged: pair.converged,
    })
}

/// `-b + alpha A(v v^T)` when `lambda_min < 0`, else `-b`.
pub fn subgradient(problem: &SdpProblem, alpha: f64, lambda_min: f64, v: &[f64]) -> Vec<f64> {
    let mut s: Vec<f64> = problem.b().iter().map(|b| -b).collect();
    if lambda_min < 0.0 {
        problem.constraints().forward_rank1_add(alpha, v, v, &mut s);
    }
    s
}

/// Lower bound `-eps / (alpha - alpha_bar)` on `lambda_min(Z(y))` for a `y`
/// that is `eps`-suboptimal for `g_alpha`.
pub fn infeasibility_bound(alpha: f64, alpha_bar: f64, eps: f64) -> Result<f64> {
    if !(alpha > alpha_bar && alpha_bar >= 0.0) {
        return Err(SdpError::InvalidInput(format!(
            "bound needs alpha > alpha_bar >= 0 (alpha = {alpha}, alpha_bar = {alpha_bar})"
        )));
    }
    if eps < 0.0 {
        return Err(SdpError::InvalidInput(format!("suboptimality {eps} must be >= 0")));
    }
    Ok(-eps / (alpha - alpha_bar))
}

/// Default `alpha_bar`: the trace hint when every feasible `X` has that trace.
pub fn default_trace_lower(problem: &SdpProblem) -> f64 {
    if problem.has_constant_trace() {
        problem.trace_hint().unwrap_or(0.0)
    } else {
        0.0
    }
}

/// One evaluated dual point.
#[derive(Debug, Clone, Serialize)]
pub struct DualIterate {
    pub iter: usize,
    pub y: Vec<f64>,
    pub g_val: f64,
    pub lambda_min: f64,
    pub v: Vec<f64>,
    pub subgrad: Vec<f64>,
    pub wall_time: f64,
    pub eig_converged: bool,
}

/// One row of the iteration trace.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub wall_time_s: f64,
    pub g_alpha: f64,
    pub lambda_min: f64,
    pub dual_infeas: f64,
    pub best_g_alpha: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct StopCriteria {
    pub max_iters: Option<usize>,
    pub time_budget: Option<Duration>,
    /// Stop once the best value is at or below this level.
    pub target_gval: Option<f64>,
}

impl StopCriteria {
    pub fn iters(n: usize) -> Self {
        Self {
            max_iters: Some(n),
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iters.is_none() && self.time_budget.is_none() && self.target_gval.is_none() {
            return Err(SdpError::InvalidInput("at least one stopping criterion is required".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    MaxIters,
    TimeBudget,
    Target,
    ZeroSubgradient,
}

/// Stateful subgradient iteration on `g_alpha`.
pub struct DualSolver<'a> {
    problem: &'a SdpProblem,
    alpha: f64,
    eig: EigensolverConfig,
    schedule: ScheduleState,
    y: Vec<f64>,
    warm: Option<Vec<f64>>,
    iter: usize,
    g_first: Option<f64>,
    best: Option<DualIterate>,
    trace: Vec<TraceRow>,
    start: Instant,
    last_zero_subgrad: bool,
}

impl<'a> DualSolver<'a> {
    pub fn new(
        problem: &'a SdpProblem,
        alpha: f64,
        schedule: StepSchedule,
        eig: EigensolverConfig,
        y0: Option<Vec<f64>>,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(SdpError::InvalidInput(format!("alpha = {alpha} must be > 0")));
        }
        schedule.validate()?;
        eig.validate()?;
        let y = y0.unwrap_or_else(|| vec![0.0; problem.m()]);
        if y.len() != problem.m() {
            return Err(SdpError::Dimension(format!("y0 has length {}, m = {}", y.len(), problem.m())));
        }
        Ok(Self {
            problem,
            alpha,
            eig,
            schedule: ScheduleState::new(schedule),
            y,
            warm: None,
            iter: 0,
            g_first: None,
            best: None,
            trace: Vec::new(),
            start: Instant::now(),
            last_zero_subgrad: false,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn iterations(&self) -> usize {
        self.iter
    }

    pub fn trace(&self) -> &[TraceRow] {
        &self.trace
    }

    pub fn best(&self) -> Option<&DualIterate> {
        self.best.as_ref()
    }

    pub fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }

    /// Evaluates the current point, records it, and moves to the next one.
    /// Returns the evaluated iterate.
    pub fn step(&mut self) -> Result<DualIterate> {
        self.iter += 1;
        let k = self.iter;
        let pv = eval_penalized(self.problem, &self.y, self.alpha, &self.eig, self.warm.as_deref())?;
        let g1 = *self.g_first.get_or_insert(pv.g_val);
        if pv.g_val > DIVERGENCE_FACTOR * g1.abs().max(1.0) {
            return Err(SdpError::Diverged {
                iter: k,
                g_val: pv.g_val,
                g_initial: g1,
            });
        }
        let s = subgradient(self.problem, self.alpha, pv.lambda_min, &pv.v);
        let wall = self.start.elapsed().as_secs_f64();
        let it = DualIterate {
            iter: k,
            y: self.y.clone(),
            g_val: pv.g_val,
            lambda_min: pv.lambda_min,
            v: pv.v,
            subgrad: s,
            wall_time: wall,
            eig_converged: pv.eig_converged,
        };
        if self.best.as_ref().is_none_or(|b| it.g_val < b.g_val) {
            self.best = Some(it.clone());
        }
        let best_g = self.best.as_ref().map(|b| b.g_val).unwrap_or(it.g_val);
        self.trace.push(TraceRow {
            iter: k,
            wall_time_s: wall,
            g_alpha: it.g_val,
            lambda_min: it.lambda_min,
            dual_infeas: (-it.lambda_min).max(0.0),
            best_g_alpha: best_g,
        });

        let s_norm = linalg::norm2(&it.subgrad);
        self.last_zero_subgrad = s_norm == 0.0;
        let eta = self.schedule.step(k, it.g_val, s_norm, best_g);
        linalg::axpy(-eta, &it.subgrad, &mut self.y);
        if self.y.iter().any(|v| !v.is_finite()) {
            return Err(SdpError::NonFinite("dual iterate"));
        }
        self.warm = Some(it.v.clone());
        Ok(it)
    }

    /// Steps until a stopping criterion fires. `on_iter` sees every evaluated
    /// iterate.
    pub fn run_with<F>(&mut self, stop: &StopCriteria, mut on_iter: F) -> Result<StopReason>
    where
        F: FnMut(&Self, &DualIterate) -> Result<()>,
    {
        stop.validate()?;
        loop {
            if let Some(max) = stop.max_iters {
                if self.iter >= max {
                    return Ok(StopReason::MaxIters);
                }
            }
            if let Some(budget) = stop.time_budget {
                if self.start.elapsed() >= budget {
                    return Ok(StopReason::TimeBudget);
                }
            }
            let it = self.step()?;
            on_iter(self, &it)?;
            if let (Some(t), Some(b)) = (stop.target_gval, &self.best) {
                if b.g_val <= t {
                    return Ok(StopReason::Target);
                }
            }
            if self.last_zero_subgrad {
                return Ok(StopReason::ZeroSubgradient);
            }
        }
    }

    pub fn run(&mut self, stop: &StopCriteria) -> Result<StopReason> {
        self.run_with(stop, |_, _| Ok(()))
    }
}

/// Outcome of [`solve_dual`].
#[derive(Debug, Clone, Serialize)]
pub struct DualResult {
    pub alpha: f64,
    pub best: DualIterate,
    pub last_y: Vec<f64>,
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub trace: Vec<TraceRow>,
}

/// Runs the subgradient method from `y = 0` with a single penalty weight.
pub fn solve_dual(
    problem: &SdpProblem,
    alpha: f64,
    schedule: StepSchedule,
    eig: &EigensolverConfig,
    stop: &StopCriteria,
) -> Result<DualResult> {
    let mut solver = DualSolver::new(problem, alpha, schedule, eig.clone(), None)?;
    let reason = solver.run(stop)?;
    let best = solver
        .best
        .clone()
        .ok_or_else(|| SdpError::InvalidInput("no iterations were run".into()))?;
    Ok(DualResult {
        alpha,
        best,
        last_y: solver.y.clone(),
        iterations: solver.iter,
        stop_reason: reason,
        trace: std::mem::take(&mut solver.trace),
    })
}

/// A strictly dual-feasible point when one is cheap to construct:
/// `y = 0` if `C` is positive definite, or `y = (lambda_min(C) - 1) 1` for
/// the diagonal constraint map, where `Z = C - (lambda_min(C) - 1) I`.
pub fn find_feasible_anchor(problem: &SdpProblem, eig: &EigensolverConfig) -> Result<Vec<f64>> {
    let zero = vec![0.0; problem.m()];
    let c_min = min_eigpair(&problem.slack(&zero), eig, None)?.lambda;
    if c_min > 0.0 {
        return Ok(zero);
    }
    if let ConstraintMap::DiagEquality { n } = problem.constraints() {
        return Ok(vec![c_min - 1.0; *n]);
    }
    Err(SdpError::NoFeasibleAnchor(c_min))
}

#[derive(Debug, Clone, Serialize)]
pub struct RepairResult {
    pub y: Vec<f64>,
    pub gamma: f64,
    pub eps_used: f64,
    pub lambda_min: f64,
    pub attempts: usize,
}

/// Moves `y1` toward the strictly feasible anchor `y2`:
/// `y = gamma y1 + (1 - gamma) y2` with `gamma = l2 / (eps + l2)`, where
/// `l2 = lambda_min(Z(y2))` and `eps >= -lambda_min(Z(y1))`. If the computed
/// `lambda_min(Z(y))` falls below `-tol`, `eps` is inflated and the step
/// repeated.
pub fn repair_feasibility(
    problem: &SdpProblem,
    y1: &[f64],
    y2: &[f64],
    eps: Option<f64>,
    eig: &EigensolverConfig,
) -> Result<RepairResult> {
    let m = problem.m();
    if y1.len() != m || y2.len() != m {
        return Err(SdpError::Dimension("dual vectors must have length m".into()));
    }
    let l1 = min_eigpair(&problem.slack(y1), eig, None)?.lambda;
    let l2 = min_eigpair(&problem.slack(y2), eig, None)?.lambda;
    if l2 <= 0.0 {
        return Err(SdpError::NoFeasibleAnchor(l2));
    }
    let mut eps = eps.unwrap_or(0.0).max(-l1).max(0.0);
    let tol = eig.tol;
    let mut attempts = 0;
    loop {
        attempts += 1;
        let gamma = l2 / (eps + l2);
        let y: Vec<f64> = y1
            .iter()
            .zip(y2)
            .map(|(a, b)| gamma * a + (1.0 - gamma) * b)
            .collect();
        let lam = min_eigpair(&problem.slack(&y), eig, None)?.lambda;
        if lam >= -tol || attempts >= 30 {
            return Ok(RepairResult {
                y,
                gamma,
                eps_used: eps,
                lambda_min: lam,
                attempts,
            });
        }
        eps = 2.0 * eps + 10.0 * tol;
    }
}
