mod common;

use irrcast::arima::{self, ArimaCoefficients, ArimaModel, ArimaSpec, FitOptions};
use irrcast::forecast::{persistence_predict, recursive_forecast};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn recovers_ar1() {
    let x = common::simulate_ar1(0.7, 10_000, 1);
    let model = arima::fit_arima(&x, None, &ArimaSpec::arima(1, 0, 0), &FitOptions::default()).unwrap();
    let phi = model.coefficients.phi[0];
    assert!((phi - 0.7).abs() < 0.05, "phi {phi}");
    assert!((model.residual_variance - 1.0).abs() < 0.1);
}

#[test]
fn recovers_ma1() {
    let x = common::simulate_ma1(0.5, 10_000, 2);
    let model = arima::fit_arima(&x, None, &ArimaSpec::arima(0, 0, 1), &FitOptions::default()).unwrap();
    let theta = model.coefficients.theta[0];
    assert!((theta - 0.5).abs() < 0.05, "theta {theta}");
}

#[test]
fn optimum_beats_random_feasible_points() {
    let x = common::simulate_ar1(0.5, 2_000, 3);
    let spec = ArimaSpec::arima(2, 0, 1);
    let model = arima::fit_arima(&x, None, &spec, &FitOptions::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut tried = 0;
    while tried < 20 {
        let coefs = ArimaCoefficients {
            constant: rng.random_range(-0.5..0.5),
            phi: vec![rng.random_range(-0.9..0.9), rng.random_range(-0.9..0.9)],
            theta: vec![rng.random_range(-0.9..0.9)],
            seasonal_phi: vec![],
            seasonal_theta: vec![],
        };
        if ArimaModel::from_coefficients(spec, coefs.clone()).is_err()
            || arima::poly::max_inverse_root(&coefs.phi) >= 1.0
        {
            continue;
        }
        tried += 1;
        let ll = arima::conditional_log_likelihood(&x, None, &spec, &coefs).unwrap();
        assert!(model.log_likelihood >= ll, "{} < {ll}", model.log_likelihood);
    }
}

#[test]
fn random_walk_model_is_persistence() {
    let x: Vec<f64> = common::gaussian_noise(5, 300)
        .iter()
        .scan(0.0, |s, e| {
            *s += e;
            Some(*s)
        })
        .collect();
    let model = arima::fit_arima(
        &x,
        None,
        &ArimaSpec::arima(0, 1, 0).without_constant(),
        &FitOptions::default(),
    )
    .unwrap();
    let path = recursive_forecast(&model, &x, &model_innovations(&model, &x), 12).unwrap();
    let last = persistence_predict(&x).unwrap();
    assert!(path.values.iter().all(|v| *v == last));
}

fn model_innovations(model: &ArimaModel, x: &[f64]) -> Vec<f64> {
    use irrcast::forecast::Forecaster;
    model.innovations(x)
}

#[test]
fn noise_free_ar3_is_predicted_exactly() {
    let phi = [0.5, -0.3, 0.2];
    let mut x = vec![1.0, -0.5, 0.25];
    for t in 3..200 {
        let v = phi[0] * x[t - 1] + phi[1] * x[t - 2] + phi[2] * x[t - 3];
        x.push(v);
    }
    let coefs = ArimaCoefficients {
        constant: 0.0,
        phi: phi.to_vec(),
        theta: vec![],
        seasonal_phi: vec![],
        seasonal_theta: vec![],
    };
    let model = ArimaModel::from_coefficients(ArimaSpec::arima(3, 0, 0), coefs).unwrap();
    for origin in [20, 57, 150] {
        let path = recursive_forecast(&model, &x[..=origin], &[], 12).unwrap();
        for (j, v) in path.values.iter().enumerate() {
            assert!((v - x[origin + 1 + j]).abs() < 1e-9);
        }
    }
}

#[test]
fn differencing_route_agrees_with_level_route() {
    let x = common::simulate_ar1(0.6, 1_500, 6)
        .iter()
        .scan(0.0, |s, e| {
            *s += e;
            Some(*s)
        })
        .collect::<Vec<_>>();
    let model = arima::fit_arima(&x, None, &ArimaSpec::arima(1, 1, 1), &FitOptions::default()).unwrap();
    let levels = recursive_forecast(&model, &x, &model_innovations(&model, &x), 12)
        .unwrap()
        .values;
    let via = model.forecast_via_differences(&x, 12).unwrap();
    for (a, b) in levels.iter().zip(&via) {
        assert!((a - b).abs() < 1e-8 * (1.0 + a.abs()), "{a} vs {b}");
    }
}
