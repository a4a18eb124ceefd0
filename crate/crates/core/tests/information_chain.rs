use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wva_core::fisher::{joint_state, qfi_coupling, qfi_pure};
use wva_core::quantum::spectral_decompose;
use wva_core::{fps_total, gaussian_meter, measurement_fisher, MeasurementSpec, SystemState, WvaSetup};

fn random_state(rng: &mut ChaCha8Rng, dim: usize) -> SystemState {
    let amps: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    SystemState::normalized(nalgebra::DVector::from_vec(amps)).unwrap()
}

fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> DMatrix<Complex64> {
    let raw = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    (&raw + raw.adjoint()) * Complex64::new(0.5, 0.0)
}

#[test]
fn qfi_matches_pure_state_family() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for dim in [2, 3] {
        let psi = random_state(&mut rng, dim);
        let obs = spectral_decompose(&random_hermitian(&mut rng, dim)).unwrap();
        let meter = gaussian_meter(1.3, 2001, 8.0).unwrap();
        let qfi = qfi_coupling(&psi, &obs, &meter);
        let a2 = (obs.matrix() * psi.amplitudes()).norm_squared();
        assert!((qfi - 4.0 * a2 * 1.3 * 1.3).abs() <= 1e-12 * qfi);
        let est = qfi_pure(|g| joint_state(&psi, &obs, &meter, g), 0.07, 1e-5).unwrap();
        assert!((est.value - qfi).abs() <= 1e-6 * qfi, "{} vs {qfi}", est.value);
        assert!((est.fidelity - qfi).abs() <= 1e-6 * qfi, "{} vs {qfi}", est.fidelity);
    }
}

#[test]
fn information_chain_on_random_configurations() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    for k in 0..1000 {
        let dim = if k % 3 == 0 { 3 } else { 2 };
        let psi_i = random_state(&mut rng, dim);
        let psi_f = random_state(&mut rng, dim);
        let obs = spectral_decompose(&random_hermitian(&mut rng, dim)).unwrap();
        let delta = rng.random_range(0.5..2.0);
        let meter = gaussian_meter(delta, 401, 8.0).unwrap();
        let setup = WvaSetup::new(psi_i, &psi_f, obs, meter).unwrap();
        let g = rng.random_range(0.0..0.5) / (delta * setup.observable().max_abs_eigenvalue());
        let spec = MeasurementSpec::ALL[k % 3];
        let report = fps_total(&setup, g).unwrap();
        let classical = measurement_fisher(&setup, g, spec).unwrap();
        let tol = 1e-9 * report.qfi;
        assert!(classical <= report.fps + tol, "config {k}: {classical} > {}", report.fps);
        assert!(report.fps <= report.qfi + tol, "config {k}: {} > {}", report.fps, report.qfi);
        assert!((report.fps - report.fps_direct).abs() <= 1e-10 * report.qfi.max(1.0));
        checked += 1;
    }
    assert_eq!(checked, 1000);
}
