mod common;

use common::reference;
use nalgebra::{DMatrix, DVector};
use netobs::gain::{
    closed_loop, error_bound, isolation_violation, parse_gain, synthesize_gain, GainConfig, GainFile, GainMatrix,
    Solver, ISOLATION_SLACK,
};
use netobs::linalg::{spectral_norm, spectral_radius};
use netobs::network::SensorNetwork;
use netobs::sim::{simulate, FaultProfile, LtiSystem, ResidualStats};
use netobs::Error;

#[test]
fn reference_gain_meets_its_postconditions() {
    let (sc, d) = reference();
    let (a, w, u, c) = (&d.system.a, d.network.w(), d.network.u(), &d.system.c);
    let a_hat = closed_loop(&d.gain, a, w, u, c).unwrap();
    assert!(spectral_radius(&a_hat).unwrap() < 1.0);
    assert!(isolation_violation(&d.gain, u, c, sc.gain.epsilon) <= ISOLATION_SLACK);
    assert!(d.bound.b <= sc.gain.target_norm + 1e-12);
    assert!(d.bound.is_finite() && d.bound.bound > 0.0);
    // the uncorrected network error does not contract
    assert!(spectral_norm(&w.kronecker(a)) > 1.0);
    let zero = GainMatrix::zeros(4, 10);
    let open = error_bound(&zero, a, w, u, c, &d.system.sigma_nu, &d.system.sigma_zeta).unwrap();
    assert!(!open.is_finite());
    assert!(matches!(
        ResidualStats::from_bound(&open, &d.system),
        Err(Error::UnstableError { .. })
    ));
}

fn small_problem() -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let a = DMatrix::from_row_slice(2, 2, &[1.05, 0.3, 0.0, 0.9]);
    let c = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
    let w = DMatrix::from_row_slice(2, 2, &[0.6, 0.4, 0.3, 0.7]);
    let u = DMatrix::from_element(2, 2, 1.0);
    (a, w, u, c)
}

#[test]
fn cone_complementarity_on_a_small_unstable_system() {
    let (a, w, u, c) = small_problem();
    for solver in [Solver::ConeComplementarity, Solver::Descent, Solver::Auto] {
        let config = GainConfig {
            epsilon: 0.5,
            solver,
            ..GainConfig::default()
        };
        let k = synthesize_gain(&a, &w, &u, &c, &config).unwrap();
        let rho = spectral_radius(&closed_loop(&k, &a, &w, &u, &c).unwrap()).unwrap();
        assert!(rho < 1.0, "{solver}: {rho}");
        assert!(isolation_violation(&k, &u, &c, 0.5) <= ISOLATION_SLACK, "{solver}");
    }
}

#[test]
fn unobservable_pair_is_rejected() {
    let (a, w, _, _) = small_problem();
    // only x2 is measured and x1 does not feed it
    let c = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 1.0]);
    let u = DMatrix::identity(2, 2);
    assert_eq!(
        synthesize_gain(&a, &w, &u, &c, &GainConfig::default()),
        Err(Error::NotObservable)
    );
}

#[test]
fn scalar_bound_is_the_steady_state_variance() {
    let (a, k, nu, zeta) = (0.9, 0.5, 0.01, 0.02);
    let m = |x: f64| DMatrix::from_element(1, 1, x);
    let system = LtiSystem::new(m(a), m(1.0), m(nu), vec![zeta]).unwrap();
    let network = SensorNetwork::new(m(1.0), m(1.0), vec![]).unwrap();
    let gain = GainMatrix { blocks: vec![m(k)] };
    let bound = error_bound(
        &gain,
        &system.a,
        network.w(),
        network.u(),
        &system.c,
        &system.sigma_nu,
        &[zeta],
    )
    .unwrap();
    let b = (1.0 - k) * a;
    let exact = ((1.0 - k) * (1.0 - k) * nu + k * k * zeta) / (1.0 - b * b);
    assert!((bound.bound - exact).abs() < 1e-12);

    let horizon = 200_000;
    let trace = simulate(
        &system,
        &network,
        &gain,
        &FaultProfile::none(),
        horizon,
        5,
        &DVector::zeros(1),
    )
    .unwrap();
    let tail = &trace.mse[100..];
    let var = tail.iter().sum::<f64>() / tail.len() as f64;
    assert!((var - exact).abs() < 0.03 * exact, "{var} vs {exact}");
}

#[test]
fn gain_file_round_trip() {
    let (sc, d) = reference();
    let f = GainFile {
        epsilon: sc.gain.epsilon,
        rho: d.rho,
        gain: d.gain.clone(),
    };
    assert_eq!(parse_gain(&f.to_text()).unwrap(), f);
}
