mod common;

use flatfocus::dynamics::{sample_regular, Restriction};
use flatfocus::lyapunov::{lyapunov_orbit, lyapunov_survey, LyapunovConfig};
use flatfocus::rng::stream;
use flatfocus::table::build_dispersing_bulk;
use flatfocus::tangent::TangentVector;

#[test]
fn flat_square_has_no_exponential_growth() {
    let t = common::unit_square();
    let n = 10_000;
    let est = lyapunov_survey(&t, 50, n, 51, &LyapunovConfig::default());
    assert_eq!(est.included, 50);
    let scale = 1.0 / (n as f64).sqrt();
    for o in &est.per_orbit {
        assert!(o.lambda_hat.abs() < scale, "{}", o.lambda_hat);
    }
    // Tangent growth is at most linear in n, so n * lambda is a logarithm
    // of roughly (n + burn_in) / burn_in.
    let log_growth = est.mean * n as f64;
    assert!(log_growth > -1.0 && log_growth < ((n + 100) as f64 / 100.0).ln() + 1.0, "{log_growth}");
}

#[test]
fn dispersing_bulk_exponent_is_stable_in_n() {
    let t = build_dispersing_bulk(-1.0, 0.5).unwrap();
    let cfg = LyapunovConfig::default();
    let a = lyapunov_survey(&t, 40, 10_000, 52, &cfg);
    let b = lyapunov_survey(&t, 40, 100_000, 52, &cfg);
    assert!(a.mean > 0.0 && b.mean > 0.0);
    assert!(((a.mean - b.mean) / b.mean).abs() < 0.05, "{} vs {}", a.mean, b.mean);
    assert!(b.ci_excludes_zero());
}

#[test]
fn optimal_table_exponent_is_positive() {
    let t = &common::optimal(0.01).table;
    let cfg = LyapunovConfig {
        with_cones: true,
        second_vector: true,
        ..LyapunovConfig::default()
    };
    let est = lyapunov_survey(t, 64, 10_000, 53, &cfg);
    assert!(est.mean > 0.0 && est.ci_excludes_zero(), "{} +- {}", est.mean, est.stderr);
    assert!(est.converged(), "{} vs half {}", est.mean, est.mean_half);
    assert_eq!(est.cone_violations, 0);
    // Two random initial vectors give the same exponent.
    assert!(est.vector_agreement.unwrap() >= 0.95);
    for o in &est.per_orbit {
        assert!(o.lambda_hat > -3.0 * est.stderr);
    }
}

#[test]
fn reversed_time_gives_the_same_exponent() {
    let t = &common::optimal(0.1).table;
    let fwd = lyapunov_survey(t, 100, 10_000, 54, &LyapunovConfig::default());
    let cfg = LyapunovConfig {
        reverse_time: true,
        ..LyapunovConfig::default()
    };
    let back = lyapunov_survey(t, 100, 10_000, 54, &cfg);
    let se = fwd.stderr.hypot(back.stderr);
    assert!((fwd.mean - back.mean).abs() < 2.0 * se, "{} vs {} (se {se})", fwd.mean, back.mean);
}

#[test]
fn orbit_estimate_is_reproducible_and_rejects_zero_vectors() {
    let t = &common::optimal(0.1).table;
    let mut rng = stream(55, 0);
    let x0 = sample_regular(&mut rng, t, Restriction::Section, 1e-9);
    let cfg = LyapunovConfig::default();
    assert!(lyapunov_orbit(t, &x0, 100, TangentVector::new(0.0, 0.0), &cfg).is_err());
    let a = lyapunov_orbit(t, &x0, 2000, TangentVector::new(1.0, 0.0), &cfg).unwrap();
    let b = lyapunov_orbit(t, &x0, 2000, TangentVector::new(1.0, 0.0), &cfg).unwrap();
    assert_eq!(a, b);
    // Scaling v0 changes nothing after renormalization.
    let c = lyapunov_orbit(t, &x0, 2000, TangentVector::new(7.0, 0.0), &cfg).unwrap();
    assert!((a.lambda_hat - c.lambda_hat).abs() < 1e-12);
}

#[test]
fn survey_csv_lists_every_orbit() {
    let t = &common::optimal(0.1).table;
    let est = lyapunov_survey(t, 8, 1000, 56, &LyapunovConfig::default());
    let csv = est.to_csv();
    assert_eq!(csv.lines().count(), 1 + est.per_orbit.len());
    let again = lyapunov_survey(t, 8, 1000, 56, &LyapunovConfig::default());
    assert_eq!(serde_json::to_string(&est).unwrap(), serde_json::to_string(&again).unwrap());
}
