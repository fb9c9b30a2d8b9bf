//! The ℓq-regularized least-squares datum `min ½‖Ax−y‖² + λ‖x‖_q^q`.

use crate::error::{Error, Result};
use crate::linalg::{matvec, DenseMatrix, DenseVector};

/// `|v|^q` with `|0|^q = 0`.
#[inline]
pub fn abs_pow(v: f64, q: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v.abs().powf(q)
    }
}

/// `Σ |x_i|^q`.
pub fn lq_penalty(x: &[f64], q: f64) -> f64 {
    x.iter().map(|&v| abs_pow(v, q)).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    a: DenseMatrix,
    // Aᵀ, so that column access is contiguous
    at: DenseMatrix,
    y: DenseVector,
    lambda: f64,
    q: f64,
}

impl ProblemInstance {
    pub fn new(a: DenseMatrix, y: DenseVector, lambda: f64, q: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParameter(format!("q must lie in (0, 1), got {q}")));
        }
        if y.len() != a.rows() {
            return Err(Error::DimensionMismatch {
                context: "observation length",
                expected: a.rows(),
                actual: y.len(),
            });
        }
        let at = a.transpose();
        Ok(Self {
            a,
            at,
            y,
            lambda,
            q,
        })
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    /// Column `i` of `A`.
    pub fn column(&self, i: usize) -> &[f64] {
        self.at.row(i)
    }

    pub fn y(&self) -> &DenseVector {
        &self.y
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Number of unknowns `N`.
    pub fn dim(&self) -> usize {
        self.a.cols()
    }

    /// Same data, different regularization.
    pub fn with_params(&self, lambda: f64, q: f64) -> Result<Self> {
        Self::new(self.a.clone(), self.y.clone(), lambda, q)
    }

    /// `Ax − y`.
    pub fn residual(&self, x: &[f64]) -> Result<DenseVector> {
        let mut r = matvec(&self.a, x)?;
        for (ri, yi) in r.iter_mut().zip(self.y.iter()) {
            *ri -= yi;
        }
        Ok(r)
    }

    /// `T_λ(x) = ½‖Ax−y‖² + λ Σ|x_i|^q`.
    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        let r = self.residual(x)?;
        Ok(self.objective_from_residual(&r, x))
    }

    pub(crate) fn objective_from_residual(&self, r: &[f64], x: &[f64]) -> f64 {
        0.5 * r.iter().map(|v| v * v).sum::<f64>() + self.lambda * lq_penalty(x, self.q)
    }
}

/// Free-function form of [`ProblemInstance::objective`].
pub fn objective(p: &ProblemInstance, x: &[f64]) -> Result<f64> {
    p.objective(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_problem(y: Vec<f64>, lambda: f64, q: f64) -> ProblemInstance {
        let n = y.len();
        ProblemInstance::new(DenseMatrix::identity(n), y.into(), lambda, q).unwrap()
    }

    #[test]
    fn objective_examples() {
        let p = identity_problem(vec![1.0, 1.0], 1.0, 0.5);
        assert!((p.objective(&[1.0, 0.0]).unwrap() - 1.5).abs() < 1e-15);
        assert_eq!(p.objective(&[0.0, 0.0]).unwrap(), 1.0);

        let p = identity_problem(vec![0.0], 1.0, 0.5);
        assert!((p.objective(&[-4.0]).unwrap() - 10.0).abs() < 1e-15);
    }

    #[test]
    fn objective_rejects_wrong_length() {
        let p = identity_problem(vec![1.0, 1.0], 1.0, 0.5);
        assert!(p.objective(&[1.0]).is_err());
    }

    #[test]
    fn parameters_validated() {
        let a = DenseMatrix::identity(1);
        let y = DenseVector::from(vec![1.0]);
        assert!(ProblemInstance::new(a.clone(), y.clone(), 0.0, 0.5).is_err());
        assert!(ProblemInstance::new(a.clone(), y.clone(), 1.0, 1.0).is_err());
        assert!(ProblemInstance::new(a.clone(), y.clone(), 1.0, 0.0).is_err());
        assert!(ProblemInstance::new(a, vec![1.0, 2.0].into(), 1.0, 0.5).is_err());
    }

    #[test]
    fn zero_to_the_q_is_zero() {
        assert_eq!(abs_pow(0.0, 0.1), 0.0);
        assert_eq!(abs_pow(-0.0, 0.9), 0.0);
        assert_eq!(abs_pow(-4.0, 0.5), 2.0);
    }
}
