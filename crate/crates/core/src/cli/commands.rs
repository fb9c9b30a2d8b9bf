use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::config::RunConfig;
use super::io::{matrix_to_csv, read_matrix, read_vector, sha256_hex, to_json, vector_to_csv, write_json, write_text};
use super::CliError;
use crate::diagnostics::{certify_local_min, check_stationary, LocalMinCertificate, StationarityReport, STATIONARITY_TOL};
use crate::harness::{generate_instance, rmse, run_experiment, Algorithm, ExperimentResult, InstanceSpec, Preset};
use crate::linalg::{l_max, DenseMatrix, DenseVector};
use crate::problem::ProblemInstance;
use crate::prox::{prox_scalar, ProxParams, PROX_TOL};
use crate::solvers::trace::format_f64;
use crate::solvers::{Gaita, Jaita, RunStatus, SolverConfig, StopRule};
use crate::Error;

#[derive(Serialize)]
struct Manifest<'a> {
    config: &'a RunConfig,
    spec: &'a InstanceSpec,
    spec_sha256: String,
    files: BTreeMap<&'static str, String>,
}

pub fn cmd_gen(config: &RunConfig, quiet: bool) -> Result<(), CliError> {
    let spec = config.instance_spec();
    let inst = generate_instance(&spec)?;
    let dir = &config.out_dir;
    let mut files = BTreeMap::new();
    for (name, text) in [
        ("A.csv", matrix_to_csv(&inst.a)),
        ("y.csv", vector_to_csv(&inst.y)),
        ("x_true.csv", vector_to_csv(&inst.x_true)),
    ] {
        write_text(&dir.join(name), &text)?;
        files.insert(name, sha256_hex(text.as_bytes()));
    }
    let manifest = Manifest {
        config,
        spec: &spec,
        spec_sha256: sha256_hex(serde_json::to_string(&spec).expect("spec serializes").as_bytes()),
        files,
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    if !quiet {
        println!("wrote {}x{} instance (k={}) to {}", spec.m, spec.n, spec.k_star, dir.display());
    }
    Ok(())
}

struct LoadedInstance {
    a: DenseMatrix,
    y: DenseVector,
    x_true: Option<DenseVector>,
}

fn load_instance(config: &RunConfig) -> Result<LoadedInstance, CliError> {
    match &config.instance_dir {
        Some(dir) => {
            let x_path = dir.join("x_true.csv");
            Ok(LoadedInstance {
                a: read_matrix(&dir.join("A.csv"))?,
                y: read_vector(&dir.join("y.csv"))?,
                x_true: if x_path.exists() {
                    Some(read_vector(&x_path)?)
                } else {
                    None
                },
            })
        }
        None => {
            let inst = generate_instance(&config.instance_spec())?;
            Ok(LoadedInstance {
                a: inst.a,
                y: inst.y,
                x_true: Some(inst.x_true),
            })
        }
    }
}

fn build_problem(config: &RunConfig, inst: &LoadedInstance) -> Result<ProblemInstance, CliError> {
    let lambda = config.lambda.expect("resolved");
    let q = config.q.expect("resolved");
    if let Some(x) = &inst.x_true {
        if x.len() != inst.a.cols() {
            return Err(Error::DimensionMismatch {
                context: "x_true length vs columns of A",
                expected: inst.a.cols(),
                actual: x.len(),
            }
            .into());
        }
    }
    Ok(ProblemInstance::new(inst.a.clone(), inst.y.clone(), lambda, q)?)
}

#[derive(Serialize)]
struct SolveSummary<'a> {
    config: &'a RunConfig,
    algorithm: Algorithm,
    mu: f64,
    l_max: f64,
    status: RunStatus,
    converged: bool,
    diverged: bool,
    did_not_converge: bool,
    step_size_warning: bool,
    sweeps: usize,
    updates: usize,
    initial_objective: f64,
    final_objective: f64,
    final_step_norm: Option<f64>,
    final_rmse: Option<f64>,
    support_size: usize,
    stationarity: StationarityReport,
}

pub fn cmd_solve(config: &RunConfig, quiet: bool) -> Result<(), CliError> {
    let config = config.clone().resolved();
    let inst = load_instance(&config)?;
    let p = build_problem(&config, &inst)?;
    let lmax = l_max(p.a());

    let mut sc = match (config.mu, config.algorithm) {
        (Some(mu), _) => SolverConfig::new(mu),
        (None, Algorithm::Gaita) => SolverConfig::gaita_default(&p),
        (None, Algorithm::Jaita) => SolverConfig::jaita_default(&p)?,
    };
    sc = sc
        .with_max_sweeps(config.max_sweeps.expect("resolved"))
        .with_stop_rule(config.stop_rule.expect("resolved"));
    sc.record_time = config.record_time;
    match (&inst.x_true, sc.stop_rule) {
        (Some(x), _) => sc = sc.with_reference(x.clone()),
        (None, StopRule::Rmse { .. }) => {
            return Err(CliError::Config("an RMSE stop rule needs x_true.csv".into()));
        }
        (None, _) => {}
    }

    let x0 = vec![0.0; p.dim()];
    let out = match config.algorithm {
        Algorithm::Gaita => Gaita::new(&p, &sc)?.run(&x0)?,
        Algorithm::Jaita => Jaita::new(&p, &sc)?.run(&x0)?,
    };
    let stationarity = check_stationary(&p, &out.state.x, sc.mu, STATIONARITY_TOL)?;
    let final_rmse = match &inst.x_true {
        Some(x) => Some(rmse(&out.state.x, x)?),
        None => None,
    };
    let summary = SolveSummary {
        config: &config,
        algorithm: config.algorithm,
        mu: sc.mu,
        l_max: lmax,
        status: out.status,
        converged: out.status == RunStatus::Converged,
        diverged: out.status == RunStatus::Diverged,
        did_not_converge: out.status == RunStatus::DidNotConverge,
        step_size_warning: out.step_size_warning,
        sweeps: out.sweeps,
        updates: out.state.n,
        initial_objective: out.initial_objective,
        final_objective: out.state.objective,
        final_step_norm: out.trace.last().map(|r| r.step_norm),
        final_rmse,
        support_size: out.state.support_size(),
        stationarity,
    };

    let dir = &config.out_dir;
    write_text(&dir.join("trace.csv"), &out.trace.to_csv())?;
    write_text(&dir.join("solution.csv"), &vector_to_csv(&out.state.x))?;
    write_json(&dir.join("summary.json"), &summary)?;
    write_json(&dir.join("config.json"), &config)?;
    if !quiet {
        println!(
            "{} {:?} after {} sweeps: objective {:.6e}, support {}{}",
            config.algorithm,
            out.status,
            out.sweeps,
            out.state.objective,
            summary.support_size,
            final_rmse.map(|r| format!(", rmse {r:.3e}")).unwrap_or_default()
        );
    }
    Ok(())
}

fn run_label(algorithm: Algorithm, q: f64, mu: f64) -> String {
    format!("{algorithm}_q{q:.4}_mu{mu:.6e}")
}

/// One row per run: parameters, status and headline numbers.
pub fn runs_table(result: &ExperimentResult) -> String {
    let mut out = String::from(
        "algorithm,q,mu,status,converged,diverged,sweeps,initial_objective,final_objective,final_step_norm,\
         final_rmse,support_size,support_freeze_sweep,sweeps_to_error_target,objective_monotone,step_size_warning\n",
    );
    let opt_f = |v: Option<f64>| v.map(format_f64).unwrap_or_default();
    let opt_u = |v: Option<usize>| v.map(|s| s.to_string()).unwrap_or_default();
    for r in &result.runs {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.algorithm,
            format_f64(r.q),
            format_f64(r.mu),
            serde_json::to_value(r.status).expect("status").as_str().unwrap_or_default(),
            r.status == RunStatus::Converged,
            r.status == RunStatus::Diverged,
            r.sweeps,
            format_f64(r.initial_objective),
            format_f64(r.final_objective),
            opt_f(r.final_step_norm),
            format_f64(r.final_rmse),
            r.support_size,
            opt_u(r.support_freeze_sweep),
            opt_u(r.sweeps_to_error_target),
            r.objective_monotone,
            r.step_size_warning,
        );
    }
    out
}

/// Traces aligned by sweep: one objective column per run, plus an
/// iteration-error column when the preset measures one. Runs that stopped
/// early leave their cells empty.
pub fn compare_table(result: &ExperimentResult) -> String {
    let mut columns: Vec<(String, BTreeMap<usize, f64>)> = Vec::new();
    for r in &result.runs {
        let label = run_label(r.algorithm, r.q, r.mu);
        columns.push((
            format!("{label}_objective"),
            r.trace.records.iter().map(|rec| (rec.sweep, rec.objective)).collect(),
        ));
        if let Some(errs) = &r.iteration_error {
            columns.push((
                format!("{label}_error"),
                r.trace.records.iter().zip(errs).map(|(rec, &e)| (rec.sweep, e)).collect(),
            ));
        }
    }
    let sweeps: std::collections::BTreeSet<usize> = columns.iter().flat_map(|(_, c)| c.keys().copied()).collect();
    let mut out = String::from("sweep");
    for (name, _) in &columns {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for s in sweeps {
        out.push_str(&s.to_string());
        for (_, col) in &columns {
            out.push(',');
            if let Some(&v) = col.get(&s) {
                out.push_str(&format_f64(v));
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct ExperimentOutput<'a> {
    config: &'a RunConfig,
    result: &'a ExperimentResult,
}

fn experiment(config: &RunConfig, default: Preset, allowed: &[Preset]) -> Result<ExperimentResult, CliError> {
    let preset = config.preset.unwrap_or(default);
    if !allowed.contains(&preset) {
        let names: Vec<String> = allowed.iter().map(|p| p.to_string()).collect();
        return Err(CliError::Config(format!("preset {preset} not valid here (use {})", names.join(", "))));
    }
    Ok(run_experiment(preset, &config.overrides(), config.seed)?)
}

pub fn cmd_compare(config: &RunConfig, quiet: bool) -> Result<(), CliError> {
    let result = experiment(config, Preset::Fig3, &[Preset::Fig1, Preset::Fig3, Preset::Fig4])?;
    let dir = &config.out_dir;
    write_text(&dir.join("compare.csv"), &compare_table(&result))?;
    write_text(&dir.join("runs.csv"), &runs_table(&result))?;
    write_json(&dir.join("config.json"), config)?;
    if !quiet {
        for r in &result.runs {
            println!(
                "{} q={:.4} mu={:.4e}: {:?} after {} sweeps{}",
                r.algorithm,
                r.q,
                r.mu,
                r.status,
                r.sweeps,
                r.sweeps_to_error_target
                    .map(|s| format!(", error <= 1e-6 at sweep {s}"))
                    .unwrap_or_default()
            );
        }
    }
    Ok(())
}

pub fn cmd_sweep(config: &RunConfig, quiet: bool) -> Result<(), CliError> {
    let mut result = experiment(config, Preset::MuSweep, &[Preset::MuSweep, Preset::Fig4])?;
    let dir = &config.out_dir;
    write_text(&dir.join("sweep.csv"), &runs_table(&result))?;
    // Per-sweep traces are summarized in sweep.csv; keep result.json small.
    for r in &mut result.runs {
        r.trace.records.clear();
        r.iteration_error = None;
    }
    write_json(&dir.join("result.json"), &ExperimentOutput { config, result: &result })?;
    write_json(&dir.join("config.json"), config)?;
    if !quiet {
        let ok = result.runs.iter().filter(|r| r.status == RunStatus::Converged).count();
        println!("{ok}/{} cells met the stop rule", result.runs.len());
    }
    Ok(())
}

/// Table of `prox(z)` for a zero and a nonzero previous value; the two
/// columns differ only at the tie `|z| = tau`.
pub fn cmd_prox_eval(q: f64, c: f64, z: &[f64]) -> Result<String, CliError> {
    let params = ProxParams::new(c, q)?;
    let t = params.thresholds();
    let mut out = format!("# tau={} eta={}\nz,prox,prox_if_prev_nonzero\n", t.tau, t.eta);
    for &zi in z {
        let _ = writeln!(
            out,
            "{},{},{}",
            zi,
            prox_scalar(zi, 0.0, &params, PROX_TOL),
            prox_scalar(zi, 1.0, &params, PROX_TOL)
        );
    }
    Ok(out)
}

#[derive(Serialize)]
struct CertificateOutput<'a> {
    config: &'a RunConfig,
    mu: f64,
    stationarity: &'a StationarityReport,
    certificate: Option<LocalMinCertificate>,
}

pub fn cmd_certify(config: &RunConfig, solution: &Path, tol: Option<f64>, quiet: bool) -> Result<(), CliError> {
    let config = config.clone().resolved();
    let inst = load_instance(&config)?;
    let p = build_problem(&config, &inst)?;
    let x = read_vector(solution)?;
    let mu = config.mu.unwrap_or_else(|| 0.95 / l_max(p.a()));
    let tol = tol.unwrap_or(STATIONARITY_TOL);
    let report = check_stationary(&p, &x, mu, tol)?;
    let certificate = if report.is_stationary {
        Some(certify_local_min(&p, &x, mu, tol)?)
    } else {
        None
    };
    let path = config.out_dir.join("certificate.json");
    write_text(
        &path,
        &to_json(&CertificateOutput {
            config: &config,
            mu,
            stationarity: &report,
            certificate: certificate.clone(),
        }),
    )?;
    match certificate {
        None => Err(CliError::NotStationary(path)),
        Some(c) => {
            if !quiet {
                println!(
                    "stationary; support {} local-min certificate: {} (sufficient conditions a={}, b={})",
                    c.k, c.theorem7_holds, c.theorem8a_holds, c.theorem8b_holds
                );
            }
            Ok(())
        }
    }
}
