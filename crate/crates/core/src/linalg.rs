//! Dense real matrices and vectors, plus the handful of kernels the solvers
//! need: products, column norms, the operator norm and the smallest
//! eigenvalue of a symmetric matrix.

use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative tolerance for [`spectral_norm_sq`].
pub const SPECTRAL_TOL: f64 = 1e-10;
/// Default absolute tolerance for [`min_eig_symmetric`].
pub const EIG_TOL: f64 = 1e-10;
/// Largest entrywise asymmetry accepted by [`min_eig_symmetric`].
pub const SYMMETRY_TOL: f64 = 1e-10;

const POWER_ITERATION_CAP: usize = 200_000;
const JACOBI_SWEEP_CAP: usize = 100;

/// A real vector with finite entries.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    /// Wraps `data`, rejecting NaN and infinite entries.
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.iter().all(|v| v.is_finite()) {
            Ok(Self(data))
        } else {
            Err(Error::NonFinite("vector"))
        }
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }
}

/// Unchecked conversion; used for iterates produced by the solvers.
impl From<Vec<f64>> for DenseVector {
    fn from(data: Vec<f64>) -> Self {
        Self(data)
    }
}

impl Deref for DenseVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for DenseVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// Row-major dense matrix with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "matrix entries",
                expected: rows * cols,
                actual: data.len(),
            });
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    /// Builds a matrix from nested rows. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        t
    }

    pub fn scaled(&self, factor: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// Submatrix made of the listed columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> DenseMatrix {
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for r in 0..self.rows {
            let row = self.row(r);
            data.extend(cols.iter().map(|&c| row[c]));
        }
        DenseMatrix {
            rows: self.rows,
            cols: cols.len(),
            data,
        }
    }

    /// Divides each column by its Euclidean norm. Zero columns are left alone.
    pub fn normalize_columns(&mut self) {
        let norms: Vec<f64> = column_norms_sq(self).iter().map(|v| v.sqrt()).collect();
        for r in 0..self.rows {
            for (c, &n) in norms.iter().enumerate() {
                if n > 0.0 {
                    self.data[r * self.cols + c] /= n;
                }
            }
        }
    }

    /// `AᵀA`, symmetric by construction.
    pub fn gram(&self) -> DenseMatrix {
        let n = self.cols;
        let mut g = Self::zeros(n, n);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..n {
                let ri = row[i];
                if ri == 0.0 {
                    continue;
                }
                for j in i..n {
                    g.data[i * n + j] += ri * row[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                g.data[i * n + j] = g.data[j * n + i];
            }
        }
        g
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `Ax`.
pub fn matvec(a: &DenseMatrix, x: &[f64]) -> Result<DenseVector> {
    if x.len() != a.cols {
        return Err(Error::DimensionMismatch {
            context: "matvec operand",
            expected: a.cols,
            actual: x.len(),
        });
    }
    Ok((0..a.rows).map(|r| dot(a.row(r), x)).collect::<Vec<_>>().into())
}

/// `Aᵀx`.
pub fn matvec_transpose(a: &DenseMatrix, x: &[f64]) -> Result<DenseVector> {
    if x.len() != a.rows {
        return Err(Error::DimensionMismatch {
            context: "transposed matvec operand",
            expected: a.rows,
            actual: x.len(),
        });
    }
    let mut out = vec![0.0; a.cols];
    for (r, &xr) in x.iter().enumerate() {
        axpy(xr, a.row(r), &mut out);
    }
    Ok(out.into())
}

/// Squared Euclidean norm of each column.
pub fn column_norms_sq(a: &DenseMatrix) -> DenseVector {
    let mut out = vec![0.0; a.cols];
    for r in 0..a.rows {
        for (o, v) in out.iter_mut().zip(a.row(r)) {
            *o += v * v;
        }
    }
    out.into()
}

/// `max_i ‖A_i‖₂²`.
pub fn l_max(a: &DenseMatrix) -> f64 {
    column_norms_sq(a).iter().copied().fold(0.0, f64::max)
}

/// `‖A‖₂²` by power iteration on `AᵀA`, started from the normalized
/// all-ones vector. Stops once the Rayleigh quotient changes by less than
/// `tol` relative.
pub fn spectral_norm_sq(a: &DenseMatrix, tol: f64) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    let n = a.cols;
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut estimate = 0.0;
    for _ in 0..POWER_ITERATION_CAP {
        let av = matvec(a, &v)?;
        let w = matvec_transpose(a, &av)?;
        // Rayleigh quotient vᵀAᵀAv with ‖v‖ = 1
        let next = dot(&av, &av);
        let wn = norm(&w);
        if wn == 0.0 {
            return Ok(0.0);
        }
        if (next - estimate).abs() <= tol * next {
            return Ok(next);
        }
        estimate = next;
        v = w.iter().map(|x| x / wn).collect();
    }
    Err(Error::NoConvergence {
        method: "power iteration",
        iterations: POWER_ITERATION_CAP,
    })
}

/// All eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues(m: &DenseMatrix, tol: f64) -> Result<Vec<f64>> {
    let n = m.rows;
    if n != m.cols {
        return Err(Error::DimensionMismatch {
            context: "square matrix",
            expected: n,
            actual: m.cols,
        });
    }
    let mut asym = 0.0_f64;
    for i in 0..n {
        for j in 0..i {
            asym = asym.max((m.get(i, j) - m.get(j, i)).abs());
        }
    }
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(asym));
    }

    let mut a = m.data.clone();
    let scale = a.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    // Weyl: diagonal entries are within ‖off‖_F of the eigenvalues
    let target = (0.01 * tol).max(8.0 * f64::EPSILON * scale);
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off(&a) > target {
        if sweeps == JACOBI_SWEEP_CAP {
            return Err(Error::NoConvergence {
                method: "Jacobi eigenvalue sweep",
                iterations: sweeps,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Smallest eigenvalue of a symmetric matrix, to absolute accuracy `tol`.
pub fn min_eig_symmetric(m: &DenseMatrix, tol: f64) -> Result<f64> {
    if m.rows == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    Ok(symmetric_eigenvalues(m, tol)?[0])
}
