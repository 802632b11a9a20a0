mod common;

use common::scenario_design;
use netobs::detect::special::{erf, erfinv, inv_reg_upper_gamma, reg_upper_gamma};
use netobs::detect::{
    detector_decisions, effective_dof, false_negative_rate, far_from_measure, kappa, stateful_threshold,
    DetectorConfig, SensorDetector, SigmaSource,
};
use netobs::harness::{initial_state, sweep_grid, REFERENCE_SCENARIO};
use netobs::sim::{burn_in, empirical_residual_variance, simulate, FaultProfile, ResidualStats};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};

fn normals(seed: u64, len: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| StandardNormal.sample(&mut rng)).collect()
}

fn exceedance(config: DetectorConfig, samples: &[f64], skip: usize) -> f64 {
    let mut det = SensorDetector::new(config, 1.0).unwrap();
    let alarms = samples
        .iter()
        .map(|&r| det.push(r).alarm)
        .skip(skip)
        .filter(|&a| a)
        .count();
    alarms as f64 / (samples.len() - skip) as f64
}

#[test]
fn stateless_rate_on_steady_state_residuals() {
    let text: String = REFERENCE_SCENARIO
        .lines()
        .filter(|l| !l.starts_with("fault ="))
        .collect::<Vec<_>>()
        .join("\n");
    let (sc, d) = scenario_design(&text);
    let x0 = initial_state(&sc, 10).unwrap();
    let settle = burn_in(d.rho);
    let horizon = settle + 2500;
    let run = |seeds: std::ops::Range<u64>| -> Vec<_> {
        seeds
            .map(|s| simulate(&d.system, &d.network, &d.gain, &FaultProfile::none(), horizon, s, &x0).unwrap())
            .collect()
    };
    let calibration = run(101..111);
    let stats = ResidualStats::from_bound(&d.bound, &d.system)
        .unwrap()
        .with_empirical(empirical_residual_variance(&calibration, settle).unwrap())
        .unwrap();
    let traces = run(1..11);
    let samples = (traces.len() * 4 * (horizon - settle)) as f64;
    assert!(samples >= 1e5);
    for p in [0.317, 0.046] {
        let config = DetectorConfig::stateless(p).with_source(SigmaSource::Empirical);
        let mut alarms = 0usize;
        for t in &traces {
            for per_sensor in detector_decisions(t, &stats, &config).unwrap() {
                alarms += per_sensor[settle..].iter().filter(|d| d.alarm).count();
            }
        }
        let rate = alarms as f64 / samples;
        assert!((rate - p).abs() <= 0.02, "p {p}: {rate}");

        // the analytic variance is conservative
        let bound_rate: usize = traces
            .iter()
            .map(|t| {
                detector_decisions(t, &stats, &DetectorConfig::stateless(p))
                    .unwrap()
                    .iter()
                    .map(|s| s[settle..].iter().filter(|d| d.alarm).count())
                    .sum::<usize>()
            })
            .sum();
        assert!(bound_rate as f64 / samples <= p + 0.02);
    }
}

#[test]
fn chi_squared_exceedance_matches_design_rate() {
    let r = normals(11, 100_000);
    for p in [0.317, 0.046, 0.003] {
        let rate = exceedance(DetectorConfig::window(p, 10), &r, 10);
        assert!((rate - p).abs() <= 0.02, "window p {p}: {rate}");
        for mu in [0.6, 0.75, 0.9] {
            let rate = exceedance(DetectorConfig::weighted(p, 10, mu), &r, 10);
            assert!((rate - p).abs() <= 0.03, "weighted {mu} p {p}: {rate}");
        }
    }
}

#[test]
fn unit_weight_matches_the_plain_window() {
    let r = normals(5, 2000);
    let mut a = SensorDetector::new(DetectorConfig::window(0.01, 7), 0.8).unwrap();
    let mut b = SensorDetector::new(DetectorConfig::weighted(0.01, 7, 1.0), 0.8).unwrap();
    for &x in &r {
        assert_eq!(a.push(x * 1.3), b.push(x * 1.3));
    }
}

#[test]
fn stateless_kappa_is_a_two_sided_normal_quantile() {
    let normal = Normal::new(0.0, 1.0).unwrap();
    for p in [0.317, 0.05, 0.046, 0.003, 1e-4] {
        let oracle = normal.inverse_cdf(1.0 - p / 2.0);
        assert!((kappa(p).unwrap() - oracle).abs() < 1e-7, "{p}");
    }
    let r = normals(3, 200_000);
    let k = kappa(0.05).unwrap();
    let rate = r.iter().filter(|x| x.abs() > k).count() as f64 / r.len() as f64;
    assert!((rate - 0.05).abs() < 0.003, "{rate}");
}

#[test]
fn false_negative_rate_by_quadrature() {
    // Simpson's rule on the standard normal density over [kappa, 3 kappa]
    let pdf = |x: f64| (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    for k in [0.5, 1.0, 2.0] {
        let (lo, hi, n) = (k, 3.0 * k, 2000);
        let h = (hi - lo) / n as f64;
        let mut s = pdf(lo) + pdf(hi);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * pdf(lo + i as f64 * h);
        }
        assert!((false_negative_rate(k) - s * h / 3.0).abs() < 1e-10, "{k}");
    }
}

#[test]
fn distance_measure_mean_is_twice_the_shape() {
    let r = normals(8, 200_000);
    for mu in [1.0, 0.75, 0.5] {
        let mut det = SensorDetector::new(DetectorConfig::weighted(0.05, 10, mu), 1.0).unwrap();
        let measures: Vec<f64> = r.iter().map(|&x| det.push(x).measure).skip(10).collect();
        let mean = measures.iter().sum::<f64>() / measures.len() as f64;
        let expected = 2.0 * effective_dof(10, mu);
        assert!(
            (mean - expected).abs() < 0.03 * expected,
            "mu {mu}: {mean} vs {expected}"
        );
    }
    assert_eq!(effective_dof(10, 1.0), 5.0);
}

#[test]
fn unit_weight_column_matches_reference_gamma() {
    for t in 1..=16usize {
        for m in [0.5, 2.0, 7.3, 20.0, 45.0] {
            let ours = far_from_measure(m, t, 1.0).unwrap();
            let oracle = statrs::function::gamma::gamma_ur(t as f64 / 2.0, m / 2.0);
            assert!((ours - oracle).abs() < 1e-10, "T {t} m {m}: {ours} vs {oracle}");
        }
        let theta = stateful_threshold(0.003, t, 1.0).unwrap();
        let back = statrs::function::gamma::gamma_ur(t as f64 / 2.0, theta / 2.0);
        assert!((back - 0.003).abs() < 1e-10);
    }
}

#[test]
fn special_function_round_trips() {
    for i in 1..200 {
        let y = -1.0 + i as f64 / 100.0;
        assert!((erf(erfinv(y).unwrap()) - y).abs() <= 1e-8, "{y}");
    }
    // reference values rounded from 30-digit evaluations
    for (x, v) in [
        (0.5, 0.5204998778130465),
        (0.99, 0.8385080695553698),
        (2.0, 0.9953222650189527),
        (2.6, 0.9997639655834707),
        (3.0, 0.9999779095030014),
    ] {
        assert!((erf(x) - v).abs() <= 4e-16, "{x}");
    }
    for s in [0.5, 1.0, 2.5, 5.0, 8.0, 30.0] {
        for q in [1e-6, 0.003, 0.05, 0.5, 0.95] {
            let x = inv_reg_upper_gamma(q, s).unwrap();
            assert!(
                (reg_upper_gamma(s, x).unwrap() - q).abs() <= 1e-8 * q.max(1e-3),
                "s {s} q {q}"
            );
        }
    }
}

#[test]
fn sweep_trends() {
    let weights = [0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
    let windows: Vec<usize> = (2..=16).collect();
    let grid = sweep_grid(2.0, &windows, &weights).unwrap();
    for &t in &windows {
        let col: Vec<f64> = grid.iter().filter(|p| p.window == t).map(|p| p.far).collect();
        assert!(col.windows(2).all(|w| w[1] <= w[0] + 1e-15), "T {t}: {col:?}");
    }
    for mu in [0.5, 0.6] {
        let row: Vec<&_> = grid.iter().filter(|p| p.weight == mu && p.window >= 8).collect();
        for w in row.windows(2) {
            assert!((w[0].far - w[1].far).abs() < 0.005);
        }
    }
    // a longer window averages more noise at full weight
    let full: Vec<f64> = grid.iter().filter(|p| p.weight == 1.0).map(|p| p.far).collect();
    assert!(full.windows(2).all(|w| w[1] <= w[0]));
}
