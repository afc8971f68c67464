//! End-to-end fitting behavior on synthetic data with known ground truth:
//! parameter recovery, holdout generalization, and the advantage of the
//! trainable effect network when the true infection rate drifts.

use chrono::NaiveDate;
use epifit::*;

const N: f64 = 1.0e6;

fn region() -> RegionConfig {
    RegionConfig {
        region_id: "synthetic".into(),
        population: N,
        e0_ratio: 1.0,
        mild_fraction: 0.9,
    }
}

fn to_series(
    variant: ModelVariant,
    trajectory: &[CompartmentState],
) -> CaseSeries {
    let start = NaiveDate::from_ymd_opt(2020, 3, 1).unwrap();
    let records = trajectory
        .iter()
        .enumerate()
        .map(|(d, state)| {
            let i = variant.infected_total(&state.values);
            let r = state.values[variant.recovered_index()];
            let dd = variant.death_index().map_or(0.0, |k| state.values[k]);
            DailyRecord {
                date: start + chrono::Days::new(d as u64),
                cumulative_cases: i + r + dd,
                recovered: r,
                deaths: dd,
            }
        })
        .collect();
    CaseSeries { records }
}

/// Constant-rate SIRD world: integrate the truth, read off observations.
fn constant_rate_series(beta: f64, delta: f64, eps: f64, days: usize) -> CaseSeries {
    let truth = RateParameters::from_active_values(ModelVariant::Sird, &[beta, delta, eps], N);
    let z0 = initial_state(
        ModelVariant::Sird,
        (100.0, 0.0, 0.0),
        &truth,
        &InitialSplit::default(),
    )
    .unwrap();
    let trajectory = integrate(
        ModelVariant::Sird,
        &z0,
        &truth,
        None,
        days,
        &IntegratorConfig {
            scheme: IntegratorScheme::Euler,
            substeps_per_day: 4,
        },
    )
    .unwrap();
    to_series(ModelVariant::Sird, &trajectory)
}

/// A world where the infection rate declines linearly over time,
/// beta(t) = 0.4 (1 - t / (2 T)) — something constant rates cannot track.
fn declining_beta_series(days: usize) -> CaseSeries {
    let (delta, eps) = (0.05, 0.01);
    let substeps = 4;
    let dt = 1.0 / substeps as f64;
    let horizon = days as f64;
    let mut z = [N - 100.0, 100.0, 0.0, 0.0];
    let mut states = vec![CompartmentState::new(z.to_vec(), 0)];
    for day in 1..days {
        for s in 0..substeps {
            let t = (day - 1) as f64 + s as f64 * dt;
            let beta = 0.4 * (1.0 - t / (2.0 * horizon));
            let infection = beta * z[0] * z[1] / N;
            let d = [
                -infection,
                infection - (delta + eps) * z[1],
                delta * z[1],
                eps * z[1],
            ];
            for i in 0..4 {
                z[i] = (z[i] + dt * d[i]).max(0.0);
            }
        }
        states.push(CompartmentState::new(z.to_vec(), day as u32));
    }
    to_series(ModelVariant::Sird, &states)
}

#[test]
fn const_grad_recovers_generating_rates() {
    let series = constant_rate_series(0.3, 0.05, 0.01, 60);
    let config = TrainingConfig {
        iterations: 1500,
        ..TrainingConfig::default()
    };
    let result = fit(
        ModelVariant::Sird,
        FitMethod::ConstGrad,
        &series,
        &region(),
        &config,
    )
    .unwrap();
    let truth = [0.3, 0.05, 0.01];
    let fitted = result.params.active_values(ModelVariant::Sird);
    for ((got, want), id) in fitted.iter().zip(truth).zip(ModelVariant::Sird.active_rates()) {
        let rel = (got - want).abs() / want;
        assert!(
            rel < 0.1,
            "{}: fitted {got}, truth {want} ({:.1}% off)",
            id.name(),
            100.0 * rel
        );
    }
}

#[test]
fn dde_generalizes_to_holdout_window() {
    let series = constant_rate_series(0.3, 0.05, 0.01, 60);
    let (train, test) = series.split_train_test(20).unwrap();
    let config = TrainingConfig {
        iterations: 1500,
        ..TrainingConfig::default()
    };
    let result = fit(ModelVariant::Sird, FitMethod::Dde, &train, &region(), &config).unwrap();

    // Forecast the full window with the fitted model and score the holdout.
    let z0 = initial_state(
        ModelVariant::Sird,
        train.first_observation().unwrap(),
        &result.params,
        &region().initial_split(),
    )
    .unwrap();
    let trajectory = integrate(
        ModelVariant::Sird,
        &z0,
        &result.params,
        result.network.as_ref(),
        series.len(),
        &config.training_integrator(),
    )
    .unwrap();
    let holdout = &trajectory[train.len()..];
    let metrics = evaluate(ModelVariant::Sird, holdout, &test.observed()).unwrap();
    let r = metrics.infected.pearson.expect("holdout has variance");
    assert!(r > 0.95, "holdout infected correlation {r}");
}

#[test]
fn effect_network_beats_constant_rates_on_drifting_beta() {
    let series = declining_beta_series(50);
    let config = TrainingConfig {
        iterations: 2000,
        ..TrainingConfig::default()
    };
    let dde = fit(ModelVariant::Sird, FitMethod::Dde, &series, &region(), &config).unwrap();
    let const_grad = fit(
        ModelVariant::Sird,
        FitMethod::ConstGrad,
        &series,
        &region(),
        &config,
    )
    .unwrap();
    let nm = fit(
        ModelVariant::Sird,
        FitMethod::NelderMead,
        &series,
        &region(),
        &config,
    )
    .unwrap();

    assert!(dde.diverged_at.is_none());
    assert!(
        dde.final_loss < const_grad.final_loss,
        "dde {} vs const-grad {}",
        dde.final_loss,
        const_grad.final_loss
    );
    assert!(
        dde.final_loss < nm.final_loss,
        "dde {} vs nelder-mead {}",
        dde.final_loss,
        nm.final_loss
    );
}
