//! Iterative thresholding solvers: the cyclic coordinate scheme ([`gaita`])
//! and the full-vector Jacobi baseline ([`jaita`]).

pub mod gaita;
pub mod jaita;
pub mod trace;

use serde::{Deserialize, Serialize};

use crate::linalg::{distance, DenseVector};
use crate::problem::ProblemInstance;
use crate::prox::PROX_TOL;

pub use gaita::{coordinate_forward_step, gaita_run, gaita_update, CoordinateUpdate, Gaita};
pub use jaita::{jaita_run, jaita_update, Jaita};
pub use trace::{IterationTrace, Snapshots, TraceRecord};

/// Objective growth (relative to the starting objective) treated as divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e6;
pub const DEFAULT_MAX_SWEEPS: usize = 10_000;
pub const DEFAULT_ITERATE_TOL: f64 = 1e-10;

/// When a run stops early. Checked once per sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StopRule {
    /// `‖x_end − x_start‖₂ ≤ tol` over one sweep.
    IterateChange { tol: f64 },
    /// Relative error against [`SolverConfig::reference`] at most `tol`.
    Rmse { tol: f64 },
    SweepCapOnly,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule::IterateChange {
            tol: DEFAULT_ITERATE_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub mu: f64,
    pub max_sweeps: usize,
    pub stop_rule: StopRule,
    /// Record interval in updates (coordinate updates for GAITA, full
    /// updates for JAITA). `None` records once per sweep.
    pub record_every: Option<usize>,
    pub prox_tol: f64,
    /// Ground truth used for the trace RMSE column and the RMSE stop rule.
    pub reference: Option<DenseVector>,
    /// Keep the sign vector at every record.
    pub record_signs: bool,
    /// Keep the full iterate at every record.
    pub keep_iterates: bool,
    /// Fill the elapsed-time column. Off by default so traces are reproducible.
    pub record_time: bool,
    pub divergence_factor: f64,
}

impl SolverConfig {
    pub fn new(mu: f64) -> Self {
        Self {
            mu,
            max_sweeps: DEFAULT_MAX_SWEEPS,
            stop_rule: StopRule::default(),
            record_every: None,
            prox_tol: PROX_TOL,
            reference: None,
            record_signs: false,
            keep_iterates: false,
            record_time: false,
            divergence_factor: DIVERGENCE_FACTOR,
        }
    }

    /// `μ = 0.95 / L_max`.
    pub fn gaita_default(p: &ProblemInstance) -> Self {
        Self::new(0.95 / crate::linalg::l_max(p.a()))
    }

    /// `μ = 0.99 / ‖A‖₂²`.
    pub fn jaita_default(p: &ProblemInstance) -> crate::Result<Self> {
        let s = crate::linalg::spectral_norm_sq(p.a(), crate::linalg::SPECTRAL_TOL)?;
        Ok(Self::new(0.99 / s))
    }

    pub fn with_max_sweeps(mut self, max_sweeps: usize) -> Self {
        self.max_sweeps = max_sweeps;
        self
    }

    pub fn with_stop_rule(mut self, stop_rule: StopRule) -> Self {
        self.stop_rule = stop_rule;
        self
    }

    pub fn with_reference(mut self, reference: DenseVector) -> Self {
        self.reference = Some(reference);
        self
    }

    pub fn with_record_every(mut self, every: usize) -> Self {
        self.record_every = Some(every);
        self
    }

    pub fn with_signs(mut self) -> Self {
        self.record_signs = true;
        self
    }

    pub fn with_iterates(mut self) -> Self {
        self.keep_iterates = true;
        self
    }

    pub(crate) fn validate(&self, dim: usize) -> crate::Result<()> {
        use crate::Error;
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("step size must be positive, got {}", self.mu)));
        }
        if !(self.prox_tol > 0.0) {
            return Err(Error::InvalidParameter("prox tolerance must be positive".into()));
        }
        if self.record_every == Some(0) {
            return Err(Error::InvalidParameter("record interval must be at least 1".into()));
        }
        if let Some(r) = &self.reference {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    context: "reference vector",
                    expected: dim,
                    actual: r.len(),
                });
            }
            if r.norm() == 0.0 {
                return Err(Error::ZeroReference);
            }
        }
        if matches!(self.stop_rule, StopRule::Rmse { .. }) && self.reference.is_none() {
            return Err(Error::InvalidParameter("RMSE stop rule needs a reference vector".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    DidNotConverge,
    Diverged,
}

/// Iterate plus the cached residual `Ax − y` and objective.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub x: DenseVector,
    /// Number of updates performed so far.
    pub n: usize,
    pub residual: DenseVector,
    pub objective: f64,
}

impl SolverState {
    pub fn new(p: &ProblemInstance, x: DenseVector) -> crate::Result<Self> {
        let residual = p.residual(&x)?;
        let objective = p.objective_from_residual(&residual, &x);
        Ok(Self {
            x,
            n: 0,
            residual,
            objective,
        })
    }

    /// Recomputes the residual and objective from scratch.
    pub fn refresh(&mut self, p: &ProblemInstance) {
        self.residual = p.residual(&self.x).expect("state dimension fixed at construction");
        self.objective = p.objective_from_residual(&self.residual, &self.x);
    }

    pub fn support_size(&self) -> usize {
        self.x.iter().filter(|v| **v != 0.0).count()
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: SolverState,
    pub trace: IterationTrace,
    pub snapshots: Snapshots,
    pub status: RunStatus,
    pub sweeps: usize,
    pub initial_objective: f64,
    /// μ is outside the range covered by the convergence theory for this solver.
    pub step_size_warning: bool,
}

impl RunOutcome {
    pub fn converged(&self) -> bool {
        self.status == RunStatus::Converged
    }

    pub fn diverged(&self) -> bool {
        self.status == RunStatus::Diverged
    }
}

/// Cyclic coordinate for update `n` (0-based): `n mod N`.
pub fn select_index(n: usize, dim: usize) -> usize {
    debug_assert!(dim > 0);
    n % dim
}

/// Relative error `‖x − x_ref‖₂ / ‖x_ref‖₂`; callers guarantee `x_ref ≠ 0`.
pub(crate) fn relative_error(x: &[f64], x_ref: &[f64]) -> f64 {
    distance(x, x_ref) / crate::linalg::norm(x_ref)
}

pub(crate) fn signs(x: &[f64]) -> Vec<i8> {
    x.iter()
        .map(|&v| {
            if v > 0.0 {
                1
            } else if v < 0.0 {
                -1
            } else {
                0
            }
        })
        .collect()
}

/// Shared bookkeeping for both solvers' run loops.
pub(crate) struct Recorder<'a> {
    config: &'a SolverConfig,
    start: std::time::Instant,
    last_recorded: Vec<f64>,
    pub trace: IterationTrace,
    pub snapshots: Snapshots,
}

impl<'a> Recorder<'a> {
    pub fn new(config: &'a SolverConfig, x0: &[f64]) -> Self {
        Self {
            config,
            start: std::time::Instant::now(),
            last_recorded: x0.to_vec(),
            trace: IterationTrace::default(),
            snapshots: Snapshots::default(),
        }
    }

    pub fn record(&mut self, state: &SolverState, sweep: usize) {
        let step_norm = distance(&state.x, &self.last_recorded);
        self.last_recorded.copy_from_slice(&state.x);
        self.trace.records.push(TraceRecord {
            n: state.n,
            sweep,
            objective: state.objective,
            step_norm,
            support_size: state.support_size(),
            rmse: self
                .config
                .reference
                .as_ref()
                .map(|r| relative_error(&state.x, r)),
            elapsed_s: self
                .config
                .record_time
                .then(|| self.start.elapsed().as_secs_f64()),
        });
        if self.config.record_signs {
            self.snapshots.signs.push(signs(&state.x));
        }
        if self.config.keep_iterates {
            self.snapshots.iterates.push(state.x.clone());
        }
    }
}

/// Sweep-end termination test. `sweep_start` is the iterate before the sweep.
pub(crate) fn sweep_verdict(
    config: &SolverConfig,
    state: &SolverState,
    sweep_start: &[f64],
    initial_objective: f64,
) -> Option<RunStatus> {
    let limit = config.divergence_factor * initial_objective.max(f64::MIN_POSITIVE);
    if !state.objective.is_finite() || state.objective > limit {
        return Some(RunStatus::Diverged);
    }
    let done = match config.stop_rule {
        StopRule::IterateChange { tol } => distance(&state.x, sweep_start) <= tol,
        StopRule::Rmse { tol } => {
            let r = config.reference.as_ref().expect("validated");
            relative_error(&state.x, r) <= tol
        }
        StopRule::SweepCapOnly => false,
    };
    done.then_some(RunStatus::Converged)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_index_examples() {
        // 1-based: n=0 → 1, n=2 → 3, n=5 → 3
        assert_eq!(select_index(0, 3), 0);
        assert_eq!(select_index(2, 3), 2);
        assert_eq!(select_index(5, 3), 2);
    }

    #[test]
    fn sign_vector() {
        assert_eq!(signs(&[1.5, 0.0, -0.2]), vec![1, 0, -1]);
    }
}
