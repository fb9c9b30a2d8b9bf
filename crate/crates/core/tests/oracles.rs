//! Cross-checks against independent reference computations.

use lqsolve::harness::{generate_instance, InstanceSpec, SampleRng, Stream};
use lqsolve::linalg::{min_eig_symmetric, spectral_norm_sq, symmetric_eigenvalues, DenseMatrix, SPECTRAL_TOL};
use lqsolve::prox::{prox_scalar, ProxParams, PROX_TOL};
use lqsolve::solvers::{Gaita, SolverConfig};
use lqsolve::ProblemInstance;
use nalgebra::DMatrix;

fn to_na(a: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.rows(), a.cols(), a.as_slice())
}

fn random_symmetric(rng: &mut SampleRng, n: usize) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(n, n).as_slice().to_vec();
    for i in 0..n {
        for j in 0..=i {
            let v = rng.normal();
            m[i * n + j] = v;
            m[j * n + i] = v;
        }
    }
    DenseMatrix::new(n, n, m).unwrap()
}

#[test]
fn eigenvalues_match_nalgebra() {
    let mut rng = SampleRng::new(11, Stream::Perturbation);
    for n in 1..=8 {
        for _ in 0..5 {
            let m = random_symmetric(&mut rng, n);
            let mut want: Vec<f64> = to_na(&m).symmetric_eigen().eigenvalues.iter().copied().collect();
            want.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let got = symmetric_eigenvalues(&m, 1e-12).unwrap();
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-10, "n={n}: {g} vs {w}");
            }
            assert!((min_eig_symmetric(&m, 1e-12).unwrap() - want[0]).abs() < 1e-10);
        }
    }
}

#[test]
fn spectral_norm_matches_svd() {
    let mut rng = SampleRng::new(12, Stream::Perturbation);
    for (r, c) in [(1, 1), (3, 2), (2, 5), (8, 8), (6, 3)] {
        let data: Vec<f64> = (0..r * c).map(|_| rng.normal()).collect();
        let a = DenseMatrix::new(r, c, data).unwrap();
        let sigma = to_na(&a).singular_values().max();
        let got = spectral_norm_sq(&a, 1e-12).unwrap();
        assert!((got - sigma * sigma).abs() <= 1e-8 * sigma * sigma, "{r}x{c}: {got} vs {}", sigma * sigma);
    }
}

#[test]
fn gaussian_instance_spectral_norm() {
    let spec = InstanceSpec {
        column_normalize: false,
        ..InstanceSpec::standard(0)
    };
    let a = generate_instance(&spec).unwrap().a;
    let big = spectral_norm_sq(&a, SPECTRAL_TOL).unwrap();
    // Asymptotic value (1 + sqrt(N/m))^2 for N(0, 1/m) entries.
    let mp = (1.0 + 2f64.sqrt()).powi(2);
    assert!((big - mp).abs() < 0.5, "{big} vs {mp}");

    let rows: Vec<usize> = (0..10).collect();
    let sub_rows: Vec<Vec<f64>> = rows.iter().map(|&r| a.row(r)[..20].to_vec()).collect();
    let sub = DenseMatrix::from_rows(&sub_rows).unwrap();
    let gram = to_na(&sub).transpose() * to_na(&sub);
    let want = gram.symmetric_eigen().eigenvalues.max();
    let got = spectral_norm_sq(&sub, 1e-13).unwrap();
    assert!((got - want).abs() <= 1e-9 * want, "{got} vs {want}");
}

/// `(z − v)²/2 + c|v|^q`, written out independently of the library.
fn phi(z: f64, v: f64, q: f64, c: f64) -> f64 {
    let pen = if v == 0.0 { 0.0 } else { v.abs().powf(q) };
    0.5 * (z - v) * (z - v) + c * pen
}

fn grid_min(z: f64, q: f64, c: f64, h: f64) -> f64 {
    let lo = z.min(0.0) - 0.1;
    let hi = z.max(0.0) + 0.1;
    let steps = ((hi - lo) / h).ceil() as usize;
    let mut best = phi(z, 0.0, q, c);
    for k in 0..=steps {
        best = best.min(phi(z, lo + k as f64 * h, q, c));
    }
    best
}

#[test]
fn prox_attains_grid_minimum() {
    let mut rng = SampleRng::new(13, Stream::Perturbation);
    for _ in 0..100 {
        let q = 0.05 + 0.9 * rng.uniform();
        let c = 0.01 + 3.0 * rng.uniform();
        let params = ProxParams::new(c, q).unwrap();
        let tau = params.thresholds().tau;
        let z = (rng.uniform() * 6.0 - 3.0) * tau;
        let v = prox_scalar(z, 0.0, &params, PROX_TOL);
        let got = phi(z, v, q, c);
        let want = grid_min(z, q, c, 1e-4);
        assert!((got - want).abs() <= 1e-6, "z={z} q={q} c={c}: {got} vs {want}");
    }
}

/// Noiseless desk-scale recovery: GAITA's limit support equals the true
/// support on most seeds.
#[test]
fn support_recovery_sanity() {
    let mut hits = 0;
    for seed in 0..10 {
        let spec = InstanceSpec {
            m: 50,
            n: 100,
            k_star: 5,
            column_normalize: true,
            snr_db: None,
            seed,
        };
        let inst = generate_instance(&spec).unwrap();
        let p = ProblemInstance::new(inst.a, inst.y, 0.001, 0.5).unwrap();
        let config = SolverConfig::gaita_default(&p).with_max_sweeps(5000);
        let out = Gaita::new(&p, &config).unwrap().run(&vec![0.0; 100]).unwrap();
        let support = |x: &[f64]| -> Vec<usize> { (0..x.len()).filter(|&i| x[i] != 0.0).collect() };
        if support(&out.state.x) == support(&inst.x_true) {
            hits += 1;
        }
    }
    assert!(hits >= 8, "support recovered on {hits}/10 seeds");
}
