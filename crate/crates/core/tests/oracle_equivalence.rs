use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use tanpulse::counterdiabatic::{CdDrive, CdProtocol};
use tanpulse::oracle::{integrate_propagator, integrate_state, DEFAULT_TOL};
use tanpulse::protocol::{TangentDrive, TangentProtocol, TruncationWindow};
use tanpulse::scalar::max_abs_diff;
use tanpulse::su2::Spin;

const FIDELITY_DEFICIT: f64 = 1e-8;

fn reference_drive() -> TangentDrive<f64> {
    TangentDrive::from_ratio(1.0, 0.8).unwrap()
}

#[test]
fn tangent_propagator_matches_integrator() {
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let two_j = rng.random_range(1..=6);
        let ratio = rng.random_range(0.1..0.99);
        let delta = rng.random_range(0.05..0.5);
        let drive = TangentDrive::from_ratio(1.0, ratio).unwrap();
        let w = TruncationWindow::from_delta(&drive, delta).unwrap();
        let spin = Spin::new(two_j);
        let analytic = TangentProtocol::new(drive, spin)
            .propagator(-w.tau_c(), w.tau_c())
            .unwrap();
        let numeric = integrate_propagator(&drive.drive_function(), spin, -w.tau_c(), w.tau_c(), DEFAULT_TOL).unwrap();
        let deficit = 1.0 - analytic.fidelity(&numeric);
        worst = worst.max(deficit);
        assert!(
            deficit <= FIDELITY_DEFICIT,
            "2j={two_j} ratio={ratio} delta={delta}: {deficit}"
        );
    }
    eprintln!("worst tangent deficit {worst:e}");
}

#[test]
fn cd_propagator_matches_integrator() {
    let mut rng = StdRng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let two_j = rng.random_range(1..=6);
        let ratio = rng.random_range(0.1..0.99);
        let delta = rng.random_range(0.05..0.5);
        let drive = TangentDrive::from_ratio(1.0, ratio).unwrap();
        let w = TruncationWindow::from_delta(&drive, delta).unwrap();
        let spin = Spin::new(two_j);
        let cd = CdDrive::new(drive);
        let analytic = CdProtocol::new(cd, spin).propagator(-w.tau_c(), w.tau_c()).unwrap();
        let numeric = integrate_propagator(&cd.drive_function(), spin, -w.tau_c(), w.tau_c(), DEFAULT_TOL).unwrap();
        let deficit = 1.0 - analytic.fidelity(&numeric);
        worst = worst.max(deficit);
        assert!(
            deficit <= FIDELITY_DEFICIT,
            "2j={two_j} ratio={ratio} delta={delta}: {deficit}"
        );
    }
    eprintln!("worst cd deficit {worst:e}");
}

#[test]
fn integrated_transfer_matches_closed_form_near_full_sweep() {
    let drive = reference_drive();
    let w = TruncationWindow::from_gamma_tau_c(&drive, std::f64::consts::FRAC_PI_2 - 1e-3).unwrap();
    let p = TangentProtocol::new(drive, Spin::HALF)
        .truncated_transition_matrix(&w)
        .unwrap();
    let psi0 = Spin::HALF.basis_state(1).unwrap();
    let r = integrate_state(
        &drive.drive_function(),
        Spin::HALF,
        &psi0,
        -w.tau_c(),
        w.tau_c(),
        DEFAULT_TOL,
    )
    .unwrap();
    let pop = r.final_state[1].norm_sqr();
    assert!((pop - p.get(-1, 1).unwrap()).abs() < 1e-7, "{pop}");
    assert!(r.max_norm_drift < 1e-9, "{}", r.max_norm_drift);
}

#[test]
fn truncated_matrix_equals_propagator_moduli() {
    let drive = reference_drive();
    for two_j in 1..=5 {
        let spin = Spin::new(two_j);
        let proto = TangentProtocol::new(drive, spin);
        for &delta in &[1e-3, 0.1, 0.7] {
            let w = TruncationWindow::from_delta(&drive, delta).unwrap();
            let u = proto.propagator(-w.tau_c(), w.tau_c()).unwrap();
            let from_u = u.matrix().map(|z| z.norm_sqr());
            let p = proto.truncated_transition_matrix(&w).unwrap();
            assert!((p.probabilities() - from_u).amax() < 1e-12);
        }
    }
}

#[test]
fn composition_law() {
    let mut rng = StdRng::seed_from_u64(3);
    let drive = reference_drive();
    let limit = drive.time_limit() * 0.99;
    for _ in 0..30 {
        let spin = Spin::new(rng.random_range(1..=6));
        let proto = TangentProtocol::new(drive, spin);
        let cd = CdProtocol::new(CdDrive::new(drive), spin);
        let mut ts: Vec<f64> = (0..3).map(|_| rng.random_range(-limit..limit)).collect();
        ts.sort_by(f64::total_cmp);
        let (a, b, c) = (ts[0], ts[1], ts[2]);
        let whole = proto.propagator(a, c).unwrap();
        let parts = proto.propagator(b, c).unwrap().matrix() * proto.propagator(a, b).unwrap().matrix();
        assert!(max_abs_diff(whole.matrix(), &parts) < 1e-11);
        let whole = cd.propagator(a, c).unwrap();
        let parts = cd.propagator(b, c).unwrap().matrix() * cd.propagator(a, b).unwrap().matrix();
        assert!(max_abs_diff(whole.matrix(), &parts) < 1e-11);
        assert!(whole.unitarity_defect() < 1e-11);
    }
}

#[test]
fn integrator_converges_as_tolerance_tightens() {
    let drive = reference_drive();
    let w = TruncationWindow::from_delta(&drive, 0.05).unwrap();
    let spin = Spin::new(3);
    let exact = TangentProtocol::new(drive, spin)
        .propagator(-w.tau_c(), w.tau_c())
        .unwrap();
    let mut previous = f64::INFINITY;
    for tol in [1e-6, 1e-8, 1e-10, 1e-12] {
        let r = tanpulse::oracle::integrate_columns(&drive.drive_function(), spin, -w.tau_c(), w.tau_c(), tol).unwrap();
        let u = r.final_propagator.unwrap();
        let err = max_abs_diff(u.matrix(), exact.matrix());
        assert!(err < previous, "tol {tol}: {err} not below {previous}");
        assert!(err < 1e3 * tol, "tol {tol}: {err}");
        assert!(r.max_norm_drift < 1e2 * tol, "tol {tol}: drift {}", r.max_norm_drift);
        previous = err;
    }
}
