//! Synthetic compressed-sensing instances: Gaussian measurement matrix,
//! sparse Gaussian signal, optional white noise at a fixed SNR.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{matvec, norm, DenseMatrix, DenseVector};

use super::rng::{SampleRng, Stream};

/// SNR at or above this is treated as noiseless.
pub const NOISELESS_SNR_DB: f64 = 300.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub m: usize,
    pub n: usize,
    pub k_star: usize,
    /// Entries are drawn from `N(0, 1/m)`; this rescales columns to unit norm afterwards.
    pub column_normalize: bool,
    pub snr_db: Option<f64>,
    pub seed: u64,
}

impl InstanceSpec {
    /// The 250×500, 15-sparse, column-normalized setup.
    pub fn standard(seed: u64) -> Self {
        Self {
            m: 250,
            n: 500,
            k_star: 15,
            column_normalize: true,
            snr_db: None,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidParameter("instance dimensions must be positive".into()));
        }
        if self.k_star > self.n {
            return Err(Error::InvalidParameter(format!(
                "sparsity {} exceeds dimension {}",
                self.k_star, self.n
            )));
        }
        if let Some(snr) = self.snr_db {
            if !snr.is_finite() {
                return Err(Error::InvalidParameter("snr_db must be finite".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedInstance {
    pub a: DenseMatrix,
    pub y: DenseVector,
    pub x_true: DenseVector,
}

pub fn generate_instance(spec: &InstanceSpec) -> Result<GeneratedInstance> {
    spec.validate()?;
    let (m, n) = (spec.m, spec.n);

    let mut rng = SampleRng::new(spec.seed, Stream::Matrix);
    let scale = 1.0 / (m as f64).sqrt();
    let data: Vec<f64> = (0..m * n).map(|_| rng.normal() * scale).collect();
    let mut a = DenseMatrix::new(m, n, data)?;
    if spec.column_normalize {
        a.normalize_columns();
    }

    let mut rng = SampleRng::new(spec.seed, Stream::Signal);
    let mut support = rng.sample_indices(n, spec.k_star);
    support.sort_unstable();
    let mut x_true = vec![0.0; n];
    for &i in &support {
        x_true[i] = rng.normal();
    }

    let clean = matvec(&a, &x_true)?;
    let y = match spec.snr_db {
        Some(snr) if snr < NOISELESS_SNR_DB && spec.k_star > 0 => add_noise_snr(&clean, snr, spec.seed)?,
        _ => clean,
    };
    Ok(GeneratedInstance {
        a,
        y,
        x_true: x_true.into(),
    })
}

/// `signal + ε` with `ε` Gaussian, rescaled so `‖signal‖²/‖ε‖² = 10^{snr/10}` exactly.
pub fn add_noise_snr(signal: &[f64], snr_db: f64, seed: u64) -> Result<DenseVector> {
    let s_norm = norm(signal);
    if s_norm == 0.0 {
        return Err(Error::ZeroSignal);
    }
    if snr_db >= NOISELESS_SNR_DB {
        return Ok(signal.to_vec().into());
    }
    let mut rng = SampleRng::new(seed, Stream::Noise);
    let raw: Vec<f64> = signal.iter().map(|_| rng.normal()).collect();
    let target = s_norm * 10f64.powf(-snr_db / 20.0);
    let factor = target / norm(&raw);
    Ok(signal
        .iter()
        .zip(&raw)
        .map(|(s, e)| s + factor * e)
        .collect::<Vec<_>>()
        .into())
}

/// `‖x − x_ref‖₂ / ‖x_ref‖₂`.
pub fn rmse(x: &[f64], x_ref: &[f64]) -> Result<f64> {
    if x.len() != x_ref.len() {
        return Err(Error::DimensionMismatch {
            context: "rmse operands",
            expected: x_ref.len(),
            actual: x.len(),
        });
    }
    let r = norm(x_ref);
    if r == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(crate::linalg::distance(x, x_ref) / r)
}

/// Measured SNR in dB of `observed` around `clean`.
pub fn measured_snr_db(clean: &[f64], observed: &[f64]) -> f64 {
    let noise = crate::linalg::distance(clean, observed);
    20.0 * (norm(clean) / noise).log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::column_norms_sq;

    fn small_spec(seed: u64) -> InstanceSpec {
        InstanceSpec {
            m: 20,
            n: 40,
            k_star: 4,
            column_normalize: true,
            snr_db: Some(30.0),
            seed,
        }
    }

    #[test]
    fn normalized_columns() {
        let inst = generate_instance(&small_spec(1)).unwrap();
        for v in column_norms_sq(&inst.a).iter() {
            assert!((v.sqrt() - 1.0).abs() < 1e-12);
        }
        assert_eq!(inst.x_true.iter().filter(|v| **v != 0.0).count(), 4);
    }

    #[test]
    fn noiseless_observation_is_exact() {
        let mut spec = small_spec(2);
        spec.snr_db = None;
        let inst = generate_instance(&spec).unwrap();
        assert_eq!(inst.y, matvec(&inst.a, &inst.x_true).unwrap());
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_instance(&small_spec(5)).unwrap();
        let b = generate_instance(&small_spec(5)).unwrap();
        assert_eq!(a, b);
        let c = generate_instance(&small_spec(6)).unwrap();
        assert_ne!(a.a, c.a);
    }

    #[test]
    fn noise_is_calibrated() {
        let signal: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
        let noisy = add_noise_snr(&signal, 30.0, 9).unwrap();
        let noise = crate::linalg::distance(&signal, &noisy);
        assert!((noise - norm(&signal) * 10f64.powf(-1.5)).abs() < 1e-12);
        assert!((measured_snr_db(&signal, &noisy) - 30.0).abs() < 1e-9);
        assert_eq!(noisy, add_noise_snr(&signal, 30.0, 9).unwrap());
        assert_eq!(&*add_noise_snr(&signal, 300.0, 9).unwrap(), &signal[..]);
        assert!(matches!(add_noise_snr(&[0.0; 3], 30.0, 1), Err(Error::ZeroSignal)));
    }

    #[test]
    fn rmse_examples() {
        let r = [1.0, -2.0, 0.5];
        assert_eq!(rmse(&r, &r).unwrap(), 0.0);
        assert_eq!(rmse(&[0.0; 3], &r).unwrap(), 1.0);
        let twice: Vec<f64> = r.iter().map(|v| 2.0 * v).collect();
        assert!((rmse(&twice, &r).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(rmse(&r, &[0.0; 3]), Err(Error::ZeroReference)));
    }

    #[test]
    fn oversized_sparsity_rejected() {
        let mut spec = small_spec(1);
        spec.k_star = 41;
        assert!(generate_instance(&spec).is_err());
    }
}
