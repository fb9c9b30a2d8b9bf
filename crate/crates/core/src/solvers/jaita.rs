//! Jacobi iterative thresholding: `x ← prox(x − μAᵀ(Ax − y))` on all
//! coordinates at once.

use crate::error::{Error, Result};
use crate::linalg::{matvec_transpose, spectral_norm_sq, DenseVector, SPECTRAL_TOL};
use crate::problem::ProblemInstance;
use crate::prox::{prox_vector, ProxParams};

use super::{sweep_verdict, Recorder, RunOutcome, RunStatus, SolverConfig, SolverState};

pub struct Jaita<'a> {
    problem: &'a ProblemInstance,
    config: &'a SolverConfig,
    params: ProxParams,
    spectral_norm_sq: f64,
}

impl<'a> Jaita<'a> {
    pub fn new(problem: &'a ProblemInstance, config: &'a SolverConfig) -> Result<Self> {
        let s = spectral_norm_sq(problem.a(), SPECTRAL_TOL)?;
        Self::with_spectral_norm_sq(problem, config, s)
    }

    /// Skips the power iteration when `‖A‖₂²` is already known.
    pub fn with_spectral_norm_sq(
        problem: &'a ProblemInstance,
        config: &'a SolverConfig,
        spectral_norm_sq: f64,
    ) -> Result<Self> {
        config.validate(problem.dim())?;
        let params = ProxParams::new(problem.lambda() * config.mu, problem.q())?;
        Ok(Self {
            problem,
            config,
            params,
            spectral_norm_sq,
        })
    }

    /// True when `μ ≥ ‖A‖₂⁻²`.
    pub fn step_size_warning(&self) -> bool {
        self.config.mu * self.spectral_norm_sq >= 1.0
    }

    pub fn update(&self, state: &mut SolverState) {
        let grad = matvec_transpose(self.problem.a(), &state.residual).expect("state dimensions");
        let z: Vec<f64> = state
            .x
            .iter()
            .zip(grad.iter())
            .map(|(x, g)| x - self.config.mu * g)
            .collect();
        state.x = prox_vector(&z, &state.x, &self.params, self.config.prox_tol).expect("same length");
        state.n += 1;
        state.refresh(self.problem);
    }

    pub fn run(&self, x0: &[f64]) -> Result<RunOutcome> {
        if x0.len() != self.problem.dim() {
            return Err(Error::DimensionMismatch {
                context: "initial iterate",
                expected: self.problem.dim(),
                actual: x0.len(),
            });
        }
        let mut state = SolverState::new(self.problem, DenseVector::new(x0.to_vec())?)?;
        let initial_objective = state.objective;
        let mut recorder = Recorder::new(self.config, &state.x);
        let mut sweep_start = state.x.to_vec();
        let mut status = RunStatus::DidNotConverge;
        let every = self.config.record_every.unwrap_or(1);
        let mut sweeps = 0;

        while sweeps < self.config.max_sweeps {
            sweep_start.copy_from_slice(&state.x);
            self.update(&mut state);
            sweeps += 1;
            let verdict = sweep_verdict(self.config, &state, &sweep_start, initial_objective);
            if sweeps % every == 0 || verdict.is_some() {
                recorder.record(&state, sweeps);
            }
            if let Some(v) = verdict {
                status = v;
                break;
            }
        }

        Ok(RunOutcome {
            state,
            trace: recorder.trace,
            snapshots: recorder.snapshots,
            status,
            sweeps,
            initial_objective,
            step_size_warning: self.step_size_warning(),
        })
    }
}

pub fn jaita_update(state: &SolverState, p: &ProblemInstance, config: &SolverConfig) -> Result<SolverState> {
    // the step-size flag is irrelevant for a single update
    let solver = Jaita::with_spectral_norm_sq(p, config, 0.0)?;
    let mut next = state.clone();
    solver.update(&mut next);
    Ok(next)
}

pub fn jaita_run(p: &ProblemInstance, x0: &[f64], config: &SolverConfig) -> Result<RunOutcome> {
    Jaita::new(p, config)?.run(x0)
}
