//! Preset experiments mirroring the GAITA/JAITA comparison figures.
//!
//! Step sizes in every preset are given in units of `1/L_max`; on a
//! column-normalized matrix that is the literal step size.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::detect_support_convergence;
use crate::error::{Error, Result};
use crate::linalg::{l_max, spectral_norm_sq, DenseVector, SPECTRAL_TOL};
use crate::problem::ProblemInstance;
use crate::solvers::{Gaita, Jaita, RunOutcome, RunStatus, SolverConfig, StopRule};

use super::instance::{generate_instance, rmse, InstanceSpec};

/// Iteration-error level used to compare sweep counts in the `fig3` preset.
pub const FIG3_ERROR_TARGET: f64 = 1e-6;
/// Sweeps of unchanged support and sign before a freeze is reported.
pub const FREEZE_WINDOW: usize = 10;
/// Step-norm tolerance used by the convergence presets.
pub const CONVERGENCE_TOL: f64 = 1e-10;
/// Stop tolerance for the high-accuracy reference limit in `fig3`.
pub const REFERENCE_TOL: f64 = 1e-13;
pub const MU_SWEEP_RMSE_TOL: f64 = 1e-2;
pub const MU_SWEEP_MAX_SWEEPS: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Fig1,
    Fig3,
    Fig4,
    MuSweep,
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(Preset::Fig1),
            "fig3" => Ok(Preset::Fig3),
            "fig4" => Ok(Preset::Fig4),
            "mu_sweep" | "mu-sweep" => Ok(Preset::MuSweep),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Fig1 => "fig1",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::MuSweep => "mu_sweep",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Gaita,
    Jaita,
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaita" => Ok(Algorithm::Gaita),
            "jaita" => Ok(Algorithm::Jaita),
            other => Err(Error::InvalidParameter(format!("unknown algorithm `{other}`"))),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Gaita => "gaita",
            Algorithm::Jaita => "jaita",
        })
    }
}

/// Optional replacements for preset defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Overrides {
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub k_star: Option<usize>,
    pub column_normalize: Option<bool>,
    pub snr_db: Option<f64>,
    pub lambda: Option<f64>,
    pub q_values: Option<Vec<f64>>,
    /// In units of `1/L_max`.
    pub mu_values: Option<Vec<f64>>,
    pub max_sweeps: Option<usize>,
}

/// Fully resolved experiment parameters, echoed into every result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSettings {
    pub preset: Preset,
    pub instance: InstanceSpec,
    pub lambda: f64,
    pub q_values: Vec<f64>,
    pub mu_values: Vec<f64>,
    pub max_sweeps: usize,
    pub stop_rule: StopRule,
    pub l_max: f64,
    pub spectral_norm_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub algorithm: Algorithm,
    pub q: f64,
    /// Actual step size used.
    pub mu: f64,
    pub status: RunStatus,
    pub sweeps: usize,
    pub initial_objective: f64,
    pub final_objective: f64,
    pub final_step_norm: Option<f64>,
    pub objective_monotone: bool,
    pub final_rmse: f64,
    pub support_size: usize,
    pub support_freeze_sweep: Option<usize>,
    pub step_size_warning: bool,
    /// `‖xⁿ − x̂‖₂` per sweep against the reference limit `x̂` (`fig3` only).
    pub iteration_error: Option<Vec<f64>>,
    /// First sweep with iteration error at most [`FIG3_ERROR_TARGET`] (`fig3` only).
    pub sweeps_to_error_target: Option<usize>,
    pub trace: crate::solvers::IterationTrace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub seed: u64,
    pub settings: ExperimentSettings,
    /// Sweeps used to compute the reference limit (`fig3` only).
    pub reference_sweeps: Option<usize>,
    pub runs: Vec<RunSummary>,
}

impl ExperimentResult {
    pub fn runs_for(&self, algorithm: Algorithm) -> impl Iterator<Item = &RunSummary> {
        self.runs.iter().filter(move |r| r.algorithm == algorithm)
    }
}

struct Resolved {
    settings: ExperimentSettings,
    truth: DenseVector,
    base: ProblemInstance,
}

fn resolve(preset: Preset, overrides: &Overrides, seed: u64) -> Result<Resolved> {
    let mut spec = InstanceSpec::standard(seed);
    let (lambda, q_values, mu_values, max_sweeps, stop_rule) = match preset {
        Preset::Fig1 => (
            0.001,
            vec![0.5, 2.0 / 3.0],
            vec![0.95],
            2000,
            StopRule::IterateChange { tol: CONVERGENCE_TOL },
        ),
        Preset::Fig3 => (
            0.001,
            vec![0.5, 2.0 / 3.0],
            vec![0.95],
            5000,
            StopRule::IterateChange { tol: REFERENCE_TOL },
        ),
        Preset::Fig4 => (
            0.001,
            vec![0.5],
            vec![0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
            2000,
            StopRule::IterateChange { tol: CONVERGENCE_TOL },
        ),
        Preset::MuSweep => {
            spec.snr_db = Some(30.0);
            (
                0.009,
                vec![0.1, 0.3, 0.5, 0.7, 0.9],
                vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95],
                MU_SWEEP_MAX_SWEEPS,
                StopRule::Rmse { tol: MU_SWEEP_RMSE_TOL },
            )
        }
    };
    if let Some(m) = overrides.m {
        spec.m = m;
    }
    if let Some(n) = overrides.n {
        spec.n = n;
    }
    if let Some(k) = overrides.k_star {
        spec.k_star = k;
    }
    if let Some(c) = overrides.column_normalize {
        spec.column_normalize = c;
    }
    if overrides.snr_db.is_some() {
        spec.snr_db = overrides.snr_db;
    }
    let lambda = overrides.lambda.unwrap_or(lambda);
    let q_values = overrides.q_values.clone().unwrap_or(q_values);
    let mu_values = overrides.mu_values.clone().unwrap_or(mu_values);
    let max_sweeps = overrides.max_sweeps.unwrap_or(max_sweeps);
    if q_values.is_empty() || mu_values.is_empty() {
        return Err(Error::InvalidParameter("empty q or mu grid".into()));
    }

    let inst = generate_instance(&spec)?;
    let l_max = l_max(&inst.a);
    let spectral = spectral_norm_sq(&inst.a, SPECTRAL_TOL)?;
    let base = ProblemInstance::new(inst.a, inst.y, lambda, q_values[0])?;
    Ok(Resolved {
        settings: ExperimentSettings {
            preset,
            instance: spec,
            lambda,
            q_values,
            mu_values,
            max_sweeps,
            stop_rule,
            l_max,
            spectral_norm_sq: spectral,
        },
        truth: inst.x_true,
        base,
    })
}

struct Job {
    algorithm: Algorithm,
    q: f64,
    mu: f64,
}

fn execute(
    job: &Job,
    resolved: &Resolved,
    reference: Option<&DenseVector>,
) -> Result<RunSummary> {
    let s = &resolved.settings;
    let problem = resolved.base.with_params(s.lambda, job.q)?;
    let truth = &resolved.truth;
    let mut config = SolverConfig::new(job.mu)
        .with_max_sweeps(s.max_sweeps)
        .with_stop_rule(s.stop_rule)
        .with_reference(reference.cloned().unwrap_or_else(|| truth.clone()));
    if job.algorithm == Algorithm::Gaita {
        config = config.with_signs();
    }
    let out: RunOutcome = match job.algorithm {
        Algorithm::Gaita => Gaita::new(&problem, &config)?.run(&vec![0.0; problem.dim()])?,
        Algorithm::Jaita => {
            Jaita::with_spectral_norm_sq(&problem, &config, s.spectral_norm_sq)?.run(&vec![0.0; problem.dim()])?
        }
    };

    let slack = 1e-12 * out.initial_objective.max(f64::MIN_POSITIVE);
    let (iteration_error, sweeps_to_error_target) = match reference {
        Some(r) => {
            let scale = r.norm();
            let errs: Vec<f64> = out
                .trace
                .records
                .iter()
                .map(|rec| rec.rmse.expect("reference set") * scale)
                .collect();
            let first = out
                .trace
                .records
                .iter()
                .zip(&errs)
                .find(|(_, e)| **e <= FIG3_ERROR_TARGET)
                .map(|(rec, _)| rec.sweep);
            (Some(errs), first)
        }
        None => (None, None),
    };
    Ok(RunSummary {
        algorithm: job.algorithm,
        q: job.q,
        mu: job.mu,
        status: out.status,
        sweeps: out.sweeps,
        initial_objective: out.initial_objective,
        final_objective: out.state.objective,
        final_step_norm: out.trace.last().map(|r| r.step_norm),
        objective_monotone: out.trace.is_monotone_nonincreasing(slack)
            && out.trace.records.first().is_none_or(|r| r.objective <= out.initial_objective + slack),
        final_rmse: rmse(&out.state.x, truth).unwrap_or(f64::NAN),
        support_size: out.state.support_size(),
        support_freeze_sweep: detect_support_convergence(&out.snapshots.signs, FREEZE_WINDOW)
            .map(|idx| out.trace.records[idx].sweep),
        step_size_warning: out.step_size_warning,
        iteration_error,
        sweeps_to_error_target,
        trace: out.trace,
    })
}

/// High-accuracy limit of the job's own solver, used as `x̂` for its
/// iteration-error trace. The two solvers may settle on different
/// stationary points, so each is measured against its own limit.
fn reference_limit(job: &Job, resolved: &Resolved) -> Result<(DenseVector, usize)> {
    let s = &resolved.settings;
    let problem = resolved.base.with_params(s.lambda, job.q)?;
    let config = SolverConfig::new(job.mu)
        .with_max_sweeps((4 * s.max_sweeps).max(20_000))
        .with_stop_rule(StopRule::IterateChange { tol: REFERENCE_TOL * 0.1 })
        .with_record_every(usize::MAX);
    let x0 = vec![0.0; problem.dim()];
    let out = match job.algorithm {
        Algorithm::Gaita => Gaita::new(&problem, &config)?.run(&x0)?,
        Algorithm::Jaita => Jaita::with_spectral_norm_sq(&problem, &config, s.spectral_norm_sq)?.run(&x0)?,
    };
    Ok((out.state.x, out.sweeps))
}

/// Runs one preset on the instance generated from `seed`.
pub fn run_experiment(preset: Preset, overrides: &Overrides, seed: u64) -> Result<ExperimentResult> {
    let resolved = resolve(preset, overrides, seed)?;
    let s = &resolved.settings;
    let mut jobs = Vec::new();
    match preset {
        Preset::Fig1 | Preset::Fig4 => {
            for &q in &s.q_values {
                for &mu in &s.mu_values {
                    for algorithm in [Algorithm::Gaita, Algorithm::Jaita] {
                        jobs.push(Job {
                            algorithm,
                            q,
                            mu: mu / s.l_max,
                        });
                    }
                }
            }
        }
        Preset::Fig3 => {
            for &q in &s.q_values {
                for &mu in &s.mu_values {
                    jobs.push(Job {
                        algorithm: Algorithm::Gaita,
                        q,
                        mu: mu / s.l_max,
                    });
                }
                jobs.push(Job {
                    algorithm: Algorithm::Jaita,
                    q,
                    mu: 0.99 / s.spectral_norm_sq,
                });
            }
        }
        Preset::MuSweep => {
            for &q in &s.q_values {
                for &mu in &s.mu_values {
                    jobs.push(Job {
                        algorithm: Algorithm::Gaita,
                        q,
                        mu: mu / s.l_max,
                    });
                }
            }
        }
    }

    let (runs, reference_sweeps) = if preset == Preset::Fig3 {
        let out = jobs
            .par_iter()
            .map(|job| {
                let (x_ref, sweeps) = reference_limit(job, &resolved)?;
                Ok((execute(job, &resolved, Some(&x_ref))?, sweeps))
            })
            .collect::<Result<Vec<_>>>()?;
        let sweeps = out.iter().map(|r| r.1).max();
        (out.into_iter().map(|r| r.0).collect(), sweeps)
    } else {
        let runs = jobs
            .par_iter()
            .map(|job| execute(job, &resolved, None))
            .collect::<Result<Vec<_>>>()?;
        (runs, None)
    };

    Ok(ExperimentResult {
        seed,
        settings: resolved.settings,
        reference_sweeps,
        runs,
    })
}
