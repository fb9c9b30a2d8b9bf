//! Gauss-Seidel iterative thresholding: one coordinate per update, chosen
//! cyclically, always against the latest residual.

use crate::error::{Error, Result};
use crate::linalg::{axpy, column_norms_sq, dot, DenseVector};
use crate::problem::{abs_pow, ProblemInstance};
use crate::prox::{prox_scalar, ProxParams};

use super::{select_index, sweep_verdict, Recorder, RunOutcome, RunStatus, SolverConfig, SolverState};

/// What a single coordinate update did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateUpdate {
    /// Update counter before the update.
    pub n: usize,
    pub index: usize,
    /// Forward (gradient) step value `z_i`.
    pub z: f64,
    pub old: f64,
    pub new: f64,
}

impl CoordinateUpdate {
    pub fn delta(&self) -> f64 {
        self.new - self.old
    }
}

/// `z_i = x_i − μ A_iᵀ(Ax − y)` from the cached residual, in O(m).
pub fn coordinate_forward_step(state: &SolverState, p: &ProblemInstance, mu: f64, i: usize) -> f64 {
    state.x[i] - mu * dot(p.column(i), &state.residual)
}

/// A configured GAITA solver bound to one problem.
pub struct Gaita<'a> {
    problem: &'a ProblemInstance,
    config: &'a SolverConfig,
    params: ProxParams,
    col_norms_sq: DenseVector,
    l_max: f64,
}

impl<'a> Gaita<'a> {
    pub fn new(problem: &'a ProblemInstance, config: &'a SolverConfig) -> Result<Self> {
        config.validate(problem.dim())?;
        let params = ProxParams::new(problem.lambda() * config.mu, problem.q())?;
        let col_norms_sq = column_norms_sq(problem.a());
        let l_max = col_norms_sq.iter().copied().fold(0.0, f64::max);
        Ok(Self {
            problem,
            config,
            params,
            col_norms_sq,
            l_max,
        })
    }

    pub fn l_max(&self) -> f64 {
        self.l_max
    }

    pub fn params(&self) -> &ProxParams {
        &self.params
    }

    /// True when `μ ≥ 1/L_max`, outside the sufficient-decrease regime.
    pub fn step_size_warning(&self) -> bool {
        self.config.mu * self.l_max >= 1.0
    }

    pub fn initial_state(&self, x0: &[f64]) -> Result<SolverState> {
        if x0.len() != self.problem.dim() {
            return Err(Error::DimensionMismatch {
                context: "initial iterate",
                expected: self.problem.dim(),
                actual: x0.len(),
            });
        }
        SolverState::new(self.problem, DenseVector::new(x0.to_vec())?)
    }

    /// One coordinate update; the residual and objective are updated incrementally.
    pub fn update(&self, state: &mut SolverState) -> CoordinateUpdate {
        let p = self.problem;
        let i = select_index(state.n, p.dim());
        let col = p.column(i);
        let grad_i = dot(col, &state.residual);
        let old = state.x[i];
        let z = old - self.config.mu * grad_i;
        let new = prox_scalar(z, old, &self.params, self.config.prox_tol);
        let d = new - old;
        if d != 0.0 {
            axpy(d, col, &mut state.residual);
            state.x[i] = new;
            state.objective += d * grad_i
                + 0.5 * d * d * self.col_norms_sq[i]
                + p.lambda() * (abs_pow(new, p.q()) - abs_pow(old, p.q()));
        }
        let update = CoordinateUpdate {
            n: state.n,
            index: i,
            z,
            old,
            new,
        };
        state.n += 1;
        update
    }

    /// `N` consecutive updates followed by a residual refresh.
    pub fn sweep(&self, state: &mut SolverState) {
        for _ in 0..self.problem.dim() {
            self.update(state);
        }
        state.refresh(self.problem);
    }

    pub fn run(&self, x0: &[f64]) -> Result<RunOutcome> {
        self.run_with(x0, |_, _| {})
    }

    /// Runs to termination, calling `observer` after every coordinate update
    /// with the post-update state.
    pub fn run_with<F>(&self, x0: &[f64], mut observer: F) -> Result<RunOutcome>
    where
        F: FnMut(&SolverState, &CoordinateUpdate),
    {
        let dim = self.problem.dim();
        let mut state = self.initial_state(x0)?;
        let initial_objective = state.objective;
        let mut recorder = Recorder::new(self.config, &state.x);
        let mut sweep_start = state.x.to_vec();
        let mut status = RunStatus::DidNotConverge;
        let mut sweeps = 0;

        while sweeps < self.config.max_sweeps {
            sweep_start.copy_from_slice(&state.x);
            sweeps += 1;
            for k in 0..dim {
                let update = self.update(&mut state);
                if k + 1 == dim {
                    state.refresh(self.problem);
                }
                observer(&state, &update);
                if let Some(every) = self.config.record_every {
                    if state.n % every == 0 {
                        recorder.record(&state, sweeps);
                    }
                }
            }
            if self.config.record_every.is_none() {
                recorder.record(&state, sweeps);
            }
            if let Some(verdict) = sweep_verdict(self.config, &state, &sweep_start, initial_objective) {
                status = verdict;
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

/// One GAITA update on a copy of `state`.
pub fn gaita_update(state: &SolverState, p: &ProblemInstance, config: &SolverConfig) -> Result<SolverState> {
    let solver = Gaita::new(p, config)?;
    let mut next = state.clone();
    solver.update(&mut next);
    Ok(next)
}

pub fn gaita_run(p: &ProblemInstance, x0: &[f64], config: &SolverConfig) -> Result<RunOutcome> {
    Gaita::new(p, config)?.run(x0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::solvers::StopRule;

    fn scalar_problem() -> ProblemInstance {
        ProblemInstance::new(DenseMatrix::identity(1), vec![2.0].into(), 1.0, 0.5).unwrap()
    }

    fn small_problem() -> ProblemInstance {
        let a = DenseMatrix::from_rows(&[
            vec![0.9, -0.2, 0.4, 0.1],
            vec![0.1, 0.8, -0.3, 0.5],
            vec![-0.4, 0.3, 0.7, -0.6],
        ])
        .unwrap();
        ProblemInstance::new(a, vec![1.0, -0.5, 0.8].into(), 0.05, 0.5).unwrap()
    }

    #[test]
    fn forward_step_examples() {
        let p = scalar_problem();
        for x in [-3.0, 0.0, 0.7, 5.0] {
            let state = SolverState::new(&p, vec![x].into()).unwrap();
            assert!((coordinate_forward_step(&state, &p, 1.0, 0) - 2.0).abs() < 1e-14);
        }

        let p = small_problem();
        let state = SolverState::new(&p, DenseVector::zeros(4)).unwrap();
        let aty = crate::linalg::matvec_transpose(p.a(), p.y()).unwrap();
        for i in 0..4 {
            assert!((coordinate_forward_step(&state, &p, 1.0, i) - aty[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn scalar_instance_one_update() {
        let p = scalar_problem();
        let config = SolverConfig::new(1.0);
        let state = SolverState::new(&p, DenseVector::zeros(1)).unwrap();
        let next = gaita_update(&state, &p, &config).unwrap();
        let x = next.x[0];
        assert!((x - 1.605).abs() < 1e-3);
        let stationarity = (x - 2.0) + 0.5 * x.powf(-0.5);
        assert!(stationarity.abs() < 1e-3);
        assert_eq!(next.n, 1);
    }

    #[test]
    fn fixed_point_is_preserved() {
        let p = scalar_problem();
        let config = SolverConfig::new(1.0);
        let state = SolverState::new(&p, DenseVector::zeros(1)).unwrap();
        let fixed = gaita_update(&state, &p, &config).unwrap();
        let again = gaita_update(&fixed, &p, &config).unwrap();
        assert!((again.x[0] - fixed.x[0]).abs() < 1e-12);
    }

    #[test]
    fn zero_observation_stops_at_zero() {
        let a = small_problem().a().clone();
        let p = ProblemInstance::new(a, DenseVector::zeros(3), 0.05, 0.5).unwrap();
        let out = gaita_run(&p, &[0.0; 4], &SolverConfig::gaita_default(&p)).unwrap();
        assert!(out.converged());
        assert_eq!(out.sweeps, 1);
        assert!(out.state.x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn incremental_residual_tracks_fresh_residual() {
        let p = small_problem();
        let config = SolverConfig::gaita_default(&p);
        let solver = Gaita::new(&p, &config).unwrap();
        let mut state = solver.initial_state(&[0.0; 4]).unwrap();
        for _ in 0..37 {
            solver.update(&mut state);
            let fresh = p.residual(&state.x).unwrap();
            let scale = 1.0 + fresh.norm();
            assert!(crate::linalg::distance(&fresh, &state.residual) <= 1e-8 * scale);
            assert!((p.objective(&state.x).unwrap() - state.objective).abs() <= 1e-10);
        }
    }

    #[test]
    fn per_update_sufficient_decrease() {
        let p = small_problem();
        let config = SolverConfig::gaita_default(&p);
        let solver = Gaita::new(&p, &config).unwrap();
        let a = 0.5 * (1.0 / config.mu - solver.l_max());
        let mut prev = vec![0.0; 4];
        let mut prev_obj = p.objective(&prev).unwrap();
        solver
            .run_with(&prev.clone(), |state, update| {
                let obj = p.objective(&state.x).unwrap();
                let d = update.delta();
                assert!(prev_obj - obj >= a * d * d - 1e-9);
                prev_obj = obj;
                prev.copy_from_slice(&state.x);
            })
            .unwrap();
    }

    #[test]
    fn sweep_cap_reports_non_convergence() {
        let p = small_problem();
        let config = SolverConfig::gaita_default(&p)
            .with_stop_rule(StopRule::SweepCapOnly)
            .with_max_sweeps(3);
        let out = gaita_run(&p, &[0.0; 4], &config).unwrap();
        assert_eq!(out.status, RunStatus::DidNotConverge);
        assert_eq!(out.trace.len(), 3);
        assert_eq!(out.trace.records[2].n, 12);
    }

    #[test]
    fn zero_sweeps_leaves_initial_state() {
        let p = small_problem();
        let config = SolverConfig::gaita_default(&p).with_max_sweeps(0);
        let out = gaita_run(&p, &[0.0; 4], &config).unwrap();
        assert!(out.trace.is_empty());
        assert_eq!(out.state.objective, out.initial_objective);
    }

    #[test]
    fn record_every_update() {
        let p = small_problem();
        let config = SolverConfig::gaita_default(&p)
            .with_record_every(1)
            .with_stop_rule(StopRule::SweepCapOnly)
            .with_max_sweeps(2);
        let out = gaita_run(&p, &[0.0; 4], &config).unwrap();
        assert_eq!(out.trace.len(), 8);
        assert_eq!(out.trace.records[4].sweep, 2);
    }

    #[test]
    fn step_size_flag() {
        let p = small_problem();
        let l_max = crate::linalg::l_max(p.a());
        let config = SolverConfig::new(1.01 / l_max);
        assert!(Gaita::new(&p, &config).unwrap().step_size_warning());
        let config = SolverConfig::new(0.9 / l_max);
        assert!(!Gaita::new(&p, &config).unwrap().step_size_warning());
    }
}
