//! Scalar and componentwise ℓq thresholding.
//!
//! For `c = λμ` the scalar problem `argmin_v (z−v)²/2 + c|v|^q` has the
//! closed characterization
//!
//! ```text
//! prox(z) = 0                         if |z| < τ
//! prox(z) = sgn(z) · g⁻¹(|z|)         if |z| > τ,   g(v) = v + c q v^{q−1}
//! ```
//!
//! with `η = (2c(1−q))^{1/(2−q)}` and `τ = η (2−q)/(2−2q)`. Nonzero outputs
//! always have magnitude at least `η`. At `|z| = τ` the prox is two-valued;
//! the selection keeps `sgn(z)·η` only when the previous coordinate value was
//! nonzero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseVector;

/// Default absolute tolerance for [`solve_inverse`].
pub const PROX_TOL: f64 = 1e-12;

const ROOT_ITERATION_CAP: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProxParams {
    c: f64,
    q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Jump point: inputs below it map to zero.
    pub tau: f64,
    /// Smallest nonzero output magnitude.
    pub eta: f64,
}

impl ProxParams {
    /// `c` is the product `λμ`.
    pub fn new(c: f64, q: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("prox weight must be positive, got {c}")));
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParameter(format!("q must lie in (0, 1), got {q}")));
        }
        Ok(Self { c, q })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn thresholds(&self) -> Thresholds {
        thresholds(self)
    }

    /// `g(v) = v + c q v^{q−1}` for `v > 0`.
    pub fn g(&self, v: f64) -> f64 {
        v + self.c * self.q * v.powf(self.q - 1.0)
    }

    fn g_prime(&self, v: f64) -> f64 {
        1.0 + self.c * self.q * (self.q - 1.0) * v.powf(self.q - 2.0)
    }

    /// The scalar objective `(z−v)²/2 + c|v|^q`.
    pub fn scalar_objective(&self, z: f64, v: f64) -> f64 {
        0.5 * (z - v) * (z - v) + self.c * crate::problem::abs_pow(v, self.q)
    }
}

pub fn thresholds(params: &ProxParams) -> Thresholds {
    let q = params.q;
    let eta = (2.0 * params.c * (1.0 - q)).powf(1.0 / (2.0 - q));
    let tau = eta * (2.0 - q) / (2.0 - 2.0 * q);
    Thresholds { tau, eta }
}

/// Solves `g(v) = z_abs` for `v ∈ [η, z_abs]`.
///
/// `g` is increasing and convex on `[η, ∞)` with `g(η) = τ`, so Newton from
/// the right end of the bracket decreases monotonically onto the root.
/// A bisection step is taken whenever Newton would leave the bracket.
pub fn solve_inverse(z_abs: f64, params: &ProxParams, tol: f64) -> Result<f64> {
    let Thresholds { tau, eta } = params.thresholds();
    debug_assert!((params.g(eta) - tau).abs() <= 1e-10 * (1.0 + tau));
    if !(z_abs >= tau) {
        return Err(Error::BelowThreshold { z_abs, tau });
    }
    if z_abs == tau {
        return Ok(eta);
    }

    let (mut lo, mut hi) = (eta, z_abs);
    let mut v = z_abs;
    for _ in 0..ROOT_ITERATION_CAP {
        let f = params.g(v) - z_abs;
        if f == 0.0 {
            return Ok(v);
        }
        if f > 0.0 {
            hi = v;
        } else {
            lo = v;
        }
        let newton = v - f / params.g_prime(v);
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - v).abs() <= 0.5 * tol || hi - lo <= tol {
            return Ok(next);
        }
        v = next;
    }
    Err(Error::NoConvergence {
        method: "prox root solve",
        iterations: ROOT_ITERATION_CAP,
    })
}

/// The single-valued prox selection. `x_prev` only matters on the tie `|z| = τ`.
pub fn prox_scalar(z: f64, x_prev: f64, params: &ProxParams, tol: f64) -> f64 {
    let Thresholds { tau, eta } = params.thresholds();
    let z_abs = z.abs();
    if z_abs < tau {
        0.0
    } else if z_abs == tau {
        if x_prev != 0.0 {
            eta.copysign(z)
        } else {
            0.0
        }
    } else {
        // z_abs > tau: the solve cannot hit the below-threshold error
        let v = solve_inverse(z_abs, params, tol).expect("bracketed prox root solve");
        v.copysign(z)
    }
}

pub fn prox_vector(z: &[f64], x_prev: &[f64], params: &ProxParams, tol: f64) -> Result<DenseVector> {
    if z.len() != x_prev.len() {
        return Err(Error::DimensionMismatch {
            context: "prox previous iterate",
            expected: z.len(),
            actual: x_prev.len(),
        });
    }
    Ok(z.iter()
        .zip(x_prev)
        .map(|(&zi, &xi)| prox_scalar(zi, xi, params, tol))
        .collect::<Vec<_>>()
        .into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn half() -> ProxParams {
        ProxParams::new(1.0, 0.5).unwrap()
    }

    /// Plain bisection on the monotone branch, independent of the Newton path.
    fn bisect_root(z_abs: f64, p: &ProxParams) -> f64 {
        let (mut lo, mut hi) = (p.thresholds().eta, z_abs);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if p.g(mid) > z_abs {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn threshold_examples() {
        let t = half().thresholds();
        assert!((t.tau - 1.5).abs() < 1e-14);
        assert!((t.eta - 1.0).abs() < 1e-14);

        let t = ProxParams::new(1.0, 2.0 / 3.0).unwrap().thresholds();
        assert!((t.tau - 1.4757).abs() < 5e-4);
        assert!((t.eta - 0.7379).abs() < 5e-4);
        // direct evaluation: η = (2/3)^{3/4}, τ = 2η
        assert!((t.eta - 0.7377879464668812).abs() < 1e-14);
        assert!((t.tau - 1.4755758929337623).abs() < 1e-14);
    }

    #[test]
    fn eta_is_homogeneous_in_c() {
        for &q in &[0.1, 0.5, 0.9] {
            let c0 = 0.37;
            let base = ProxParams::new(c0, q).unwrap().thresholds().eta;
            let scaled = ProxParams::new(2f64.powf(2.0 - q) * c0, q).unwrap().thresholds().eta;
            assert!((scaled - 2.0 * base).abs() < 1e-14);
        }
    }

    #[test]
    fn solve_inverse_examples() {
        let p = half();
        assert_eq!(solve_inverse(1.5, &p, PROX_TOL).unwrap(), 1.0);
        let v = solve_inverse(2.0, &p, PROX_TOL).unwrap();
        assert!((v - bisect_root(2.0, &p)).abs() < 1e-11);
        assert!((v - 1.605).abs() < 1e-3);
        let big = 1e8;
        let v = solve_inverse(big, &p, PROX_TOL).unwrap();
        assert!((v / big - 1.0).abs() < 1e-10);
        assert!(matches!(
            solve_inverse(1.0, &p, PROX_TOL),
            Err(Error::BelowThreshold { .. })
        ));
    }

    #[test]
    fn prox_scalar_examples() {
        let p = half();
        assert_eq!(prox_scalar(0.0, 3.0, &p, PROX_TOL), 0.0);
        assert_eq!(prox_scalar(1.5, 1.0, &p, PROX_TOL), 1.0);
        assert_eq!(prox_scalar(1.5, 0.0, &p, PROX_TOL), 0.0);
        assert_eq!(prox_scalar(-1.5, -2.0, &p, PROX_TOL), -1.0);
        let v = prox_scalar(-2.0, 0.0, &p, PROX_TOL);
        assert!((v + bisect_root(2.0, &p)).abs() < 1e-11);
    }

    #[test]
    fn prox_vector_examples() {
        let p = half();
        let zero = prox_vector(&[0.0; 4], &[1.0; 4], &p, PROX_TOL).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));

        let out = prox_vector(&[2.0, 1.0], &[0.0, 0.0], &p, PROX_TOL).unwrap();
        assert!((out[0] - bisect_root(2.0, &p)).abs() < 1e-11);
        assert_eq!(out[1], 0.0);

        assert!(prox_vector(&[1.0], &[1.0, 2.0], &p, PROX_TOL).is_err());
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(ProxParams::new(0.0, 0.5).is_err());
        assert!(ProxParams::new(1.0, 1.0).is_err());
        assert!(ProxParams::new(1.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn range_law(z in -20.0f64..20.0, q in 0.05f64..0.95, c in 0.01f64..10.0) {
            let p = ProxParams::new(c, q).unwrap();
            let v = prox_scalar(z, 0.0, &p, PROX_TOL);
            prop_assert!(v == 0.0 || v.abs() >= p.thresholds().eta);
        }

        #[test]
        fn odd_symmetry(z in -20.0f64..20.0, xp in -3.0f64..3.0, q in 0.05f64..0.95, c in 0.01f64..10.0) {
            let p = ProxParams::new(c, q).unwrap();
            prop_assert_eq!(prox_scalar(-z, -xp, &p, PROX_TOL), -prox_scalar(z, xp, &p, PROX_TOL));
        }

        #[test]
        fn monotone_on_active_branch(d1 in 0.0f64..10.0, d2 in 1e-6f64..10.0, q in 0.05f64..0.95, c in 0.01f64..10.0) {
            let p = ProxParams::new(c, q).unwrap();
            let tau = p.thresholds().tau;
            let z1 = tau * (1.0 + 1e-9) + d1;
            let z2 = z1 + d2;
            prop_assert!(prox_scalar(z2, 0.0, &p, PROX_TOL) > prox_scalar(z1, 0.0, &p, PROX_TOL));
        }

        #[test]
        fn root_residual(extra in 0.0f64..50.0, q in 0.05f64..0.95, c in 0.01f64..10.0) {
            let p = ProxParams::new(c, q).unwrap();
            let z = p.thresholds().tau + extra;
            let v = solve_inverse(z, &p, PROX_TOL).unwrap();
            prop_assert!((p.g(v) - z).abs() <= PROX_TOL * (1.0 + z));
        }

        #[test]
        fn boundary_identity(q in 0.01f64..0.99, c in 1e-3f64..100.0) {
            let p = ProxParams::new(c, q).unwrap();
            let t = p.thresholds();
            prop_assert!((p.g(t.eta) - t.tau).abs() <= 1e-10);
            prop_assert!(t.tau > t.eta && t.eta > 0.0);
        }
    }
}
