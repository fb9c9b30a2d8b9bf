//! Checkable consequences of the convergence theory: stationarity of a
//! point, optimality of a single coordinate update, support/sign freeze
//! detection, the relative-error bound on a frozen support, and second-order
//! local-minimizer certificates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, l_max, min_eig_symmetric, norm, DenseVector, EIG_TOL};
use crate::problem::ProblemInstance;
use crate::prox::{ProxParams, Thresholds};

/// Default tolerance for [`check_stationary`].
pub const STATIONARITY_TOL: f64 = 1e-8;
/// Fixed slack added to the right-hand side of the relative-error bound.
pub const RELATIVE_ERROR_SLACK: f64 = 1e-9;

/// The three fixed-point conditions evaluated at a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub support: Vec<usize>,
    /// `min_{i∈I} |x_i|`; `None` for an empty support.
    pub min_support_magnitude: Option<f64>,
    /// `max_{i∈I} |A_iᵀ(Ax−y) + λq sgn(x_i)|x_i|^{q−1}|`.
    pub max_gradient_residual_on_support: f64,
    /// `max_{i∉I} |A_iᵀ(Ax−y)|`.
    pub max_offsupport_score: f64,
    pub eta: f64,
    pub tau_over_mu: f64,
    pub tol: f64,
    pub magnitude_ok: bool,
    pub gradient_ok: bool,
    pub offsupport_ok: bool,
    pub is_stationary: bool,
}

/// Evaluates the stationarity conditions at `x` for step size `mu`:
/// (a) `|x_i| ≥ η` on the support, (b) vanishing coordinate gradient on the
/// support, (c) `|A_iᵀ(Ax−y)| ≤ τ/μ` off the support.
pub fn check_stationary(p: &ProblemInstance, x: &[f64], mu: f64, tol: f64) -> Result<StationarityReport> {
    let Thresholds { tau, eta } = ProxParams::new(p.lambda() * mu, p.q())?.thresholds();
    let r = p.residual(x)?;
    let (lambda, q) = (p.lambda(), p.q());

    let mut support = Vec::new();
    let mut min_mag = f64::INFINITY;
    let mut grad_res = 0.0_f64;
    let mut off_score = 0.0_f64;
    for (i, &xi) in x.iter().enumerate() {
        let g = dot(p.column(i), &r);
        if xi != 0.0 {
            support.push(i);
            min_mag = min_mag.min(xi.abs());
            let full = g + lambda * q * xi.signum() * xi.abs().powf(q - 1.0);
            grad_res = grad_res.max(full.abs());
        } else {
            off_score = off_score.max(g.abs());
        }
    }

    let tau_over_mu = tau / mu;
    let magnitude_ok = support.is_empty() || min_mag >= eta - tol;
    let gradient_ok = grad_res <= tol;
    let offsupport_ok = off_score <= tau_over_mu + tol;
    Ok(StationarityReport {
        min_support_magnitude: (!support.is_empty()).then_some(min_mag),
        support,
        max_gradient_residual_on_support: grad_res,
        max_offsupport_score: off_score,
        eta,
        tau_over_mu,
        tol,
        magnitude_ok,
        gradient_ok,
        offsupport_ok,
        is_stationary: magnitude_ok && gradient_ok && offsupport_ok,
    })
}

/// Checks the per-update optimality relation for a GAITA step that changed
/// only coordinate `i`: either `x_next_i = 0`, or `|x_next_i| ≥ η` and
/// `∇_i T(x_next) = (1/μ − A_iᵀA_i)(x_prev_i − x_next_i)` within `tol`.
pub fn check_update_optimality(
    x_prev: &[f64],
    x_next: &[f64],
    p: &ProblemInstance,
    mu: f64,
    i: usize,
    tol: f64,
) -> Result<bool> {
    if x_prev.len() != x_next.len() || x_next.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            context: "update optimality iterates",
            expected: p.dim(),
            actual: x_next.len(),
        });
    }
    if x_prev
        .iter()
        .zip(x_next)
        .enumerate()
        .any(|(j, (a, b))| j != i && a != b)
    {
        return Err(Error::DiffersOffCoordinate(i));
    }
    let v = x_next[i];
    if v == 0.0 {
        return Ok(true);
    }
    let eta = ProxParams::new(p.lambda() * mu, p.q())?.thresholds().eta;
    if v.abs() < eta {
        return Ok(false);
    }
    let col = p.column(i);
    let r = p.residual(x_next)?;
    let (lambda, q) = (p.lambda(), p.q());
    let grad_i = dot(col, &r) + lambda * q * v.signum() * v.abs().powf(q - 1.0);
    let rhs = (1.0 / mu - dot(col, col)) * (x_prev[i] - v);
    Ok((grad_i - rhs).abs() <= tol)
}

/// Earliest index `s` with `signs[s] == signs[s+1] == … == signs[s+window]`.
///
/// Sign vectors encode the support as well (`0` = off support).
pub fn detect_support_convergence(signs: &[Vec<i8>], window: usize) -> Option<usize> {
    assert!(window >= 1, "window must be at least 1");
    if signs.len() <= window {
        return None;
    }
    let mut run_start = 0;
    for k in 1..signs.len() {
        if signs[k] != signs[k - 1] {
            run_start = k;
        }
        if k - run_start >= window {
            return Some(run_start);
        }
    }
    None
}

/// Index of the first record after which the sign vector never changes
/// again, i.e. the start of the final constant run. `None` for an empty trace.
pub fn final_sign_change(signs: &[Vec<i8>]) -> Option<usize> {
    if signs.is_empty() {
        return None;
    }
    Some(
        (1..signs.len())
            .rev()
            .find(|&k| signs[k] != signs[k - 1])
            .unwrap_or(0),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeErrorCheck {
    pub support: Vec<usize>,
    /// `δ = max_{i,j∈I} |A_iᵀA_j|`.
    pub delta: f64,
    /// `b = (1/μ + Kδ)√K`.
    pub bound_constant: f64,
    /// `(‖∇T(u_{k+1})‖₂, b‖u_{k+1} − u_k‖₂)` per consecutive pair.
    pub pairs: Vec<(f64, f64)>,
    pub holds: bool,
}

/// Verifies `‖∇T(u_{k+1})‖₂ ≤ b‖u_{k+1} − u_k‖₂` (plus a fixed slack of
/// [`RELATIVE_ERROR_SLACK`]) over consecutive iterates of `tail`, where `T`
/// is the objective restricted to the common support `I` and one sweep
/// separates consecutive iterates.
pub fn check_relative_error(p: &ProblemInstance, tail: &[DenseVector], mu: f64) -> Result<RelativeErrorCheck> {
    let first = tail
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty iterate tail".into()))?;
    let support: Vec<usize> = (0..first.len()).filter(|&i| first[i] != 0.0).collect();
    for (k, x) in tail.iter().enumerate() {
        if x.len() != p.dim() {
            return Err(Error::DimensionMismatch {
                context: "tail iterate",
                expected: p.dim(),
                actual: x.len(),
            });
        }
        let same_support = (0..x.len()).all(|i| (x[i] != 0.0) == (first[i] != 0.0));
        if !same_support {
            return Err(Error::SupportNotFixed(k));
        }
    }

    let k = support.len();
    let mut delta = 0.0_f64;
    for &i in &support {
        for &j in &support {
            delta = delta.max(dot(p.column(i), p.column(j)).abs());
        }
    }
    let b = (1.0 / mu + k as f64 * delta) * (k as f64).sqrt();
    let (lambda, q) = (p.lambda(), p.q());

    let mut pairs = Vec::with_capacity(tail.len().saturating_sub(1));
    for w in tail.windows(2) {
        let (prev, next) = (&w[0], &w[1]);
        let r = p.residual(next)?;
        let grad: Vec<f64> = support
            .iter()
            .map(|&i| {
                let v = next[i];
                dot(p.column(i), &r) + lambda * q * v.signum() * v.abs().powf(q - 1.0)
            })
            .collect();
        let step: Vec<f64> = support.iter().map(|&i| next[i] - prev[i]).collect();
        pairs.push((norm(&grad), b * norm(&step)));
    }
    let holds = pairs
        .iter()
        .all(|&(lhs, rhs)| lhs <= rhs + RELATIVE_ERROR_SLACK);
    Ok(RelativeErrorCheck {
        support,
        delta,
        bound_constant: b,
        pairs,
        holds,
    })
}

/// Outcome of the second-order local-minimizer tests at a stationary point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalMinCertificate {
    pub support: Vec<usize>,
    pub k: usize,
    /// `λ_min(A_IᵀA_I + λq(q−1)Λ(x_I))`; `None` for an empty support.
    pub min_eig_condition: Option<f64>,
    /// `λ_min(A_IᵀA_I)`; `None` for an empty support.
    pub min_eig_gram: Option<f64>,
    /// `min_{i∈I} |x_i|`; `None` for an empty support.
    pub e_min: Option<f64>,
    pub l_max: f64,
    pub theorem7_holds: bool,
    pub theorem8a_holds: bool,
    pub theorem8b_holds: bool,
}

/// Certifies a stationary point as a strict local minimizer.
///
/// The primary test is positive definiteness of
/// `M = A_IᵀA_I + λq(q−1)Λ(x_I)` with `Λ = diag(|x_i|^{q−2})`. Two cheaper
/// sufficient conditions are reported alongside:
/// (a) `λ_min(A_IᵀA_I) > 0` and `λ < λ_min(A_IᵀA_I) e^{2−q} / (q(1−q))`;
/// (b) `λ_min(A_IᵀA_I)/L_max > q/2` and `q/(2λ_min(A_IᵀA_I)) < μ < 1/L_max`.
///
/// An empty support is certified outright: the `λ|h|^q` term dominates any
/// linear term near zero.
pub fn certify_local_min(p: &ProblemInstance, x_star: &[f64], mu: f64, tol: f64) -> Result<LocalMinCertificate> {
    let report = check_stationary(p, x_star, mu, tol)?;
    if !report.is_stationary {
        return Err(Error::NotStationary(Box::new(report)));
    }
    let l_max = l_max(p.a());
    let support = report.support;
    let k = support.len();
    if k == 0 {
        return Ok(LocalMinCertificate {
            support,
            k,
            min_eig_condition: None,
            min_eig_gram: None,
            e_min: None,
            l_max,
            theorem7_holds: true,
            theorem8a_holds: false,
            theorem8b_holds: false,
        });
    }

    let (lambda, q) = (p.lambda(), p.q());
    let a_i = p.a().select_columns(&support);
    let gram = a_i.gram();
    let min_eig_gram = min_eig_symmetric(&gram, EIG_TOL)?;

    let diag: Vec<f64> = support
        .iter()
        .map(|&i| lambda * q * (q - 1.0) * x_star[i].abs().powf(q - 2.0))
        .collect();
    let mut m = gram.as_slice().to_vec();
    for (j, d) in diag.iter().enumerate() {
        m[j * k + j] += d;
    }
    let m = crate::linalg::DenseMatrix::new(k, k, m)?;
    let min_eig_condition = min_eig_symmetric(&m, EIG_TOL)?;

    let e_min = support
        .iter()
        .map(|&i| x_star[i].abs())
        .fold(f64::INFINITY, f64::min);

    let theorem7_holds = min_eig_condition > tol;
    let theorem8a_holds =
        min_eig_gram > 0.0 && lambda < min_eig_gram * e_min.powf(2.0 - q) / (q * (1.0 - q));
    let theorem8b_holds =
        min_eig_gram / l_max > q / 2.0 && q / (2.0 * min_eig_gram) < mu && mu < 1.0 / l_max;

    Ok(LocalMinCertificate {
        support,
        k,
        min_eig_condition: Some(min_eig_condition),
        min_eig_gram: Some(min_eig_gram),
        e_min: Some(e_min),
        l_max,
        theorem7_holds,
        theorem8a_holds,
        theorem8b_holds,
    })
}
