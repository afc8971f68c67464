//! Shared builders for the benchmark targets.

use epifit::{
    initial_state, CompartmentState, EffectNetwork, InitialSplit, ModelVariant, ObservedSeries,
    RateParameters,
};

pub const POPULATION: f64 = 1e6;

pub fn bench_params(variant: ModelVariant) -> RateParameters {
    let values: Vec<f64> = variant
        .active_rates()
        .iter()
        .enumerate()
        .map(|(i, _)| match i {
            0 => 0.3,
            _ => 0.05 / i as f64,
        })
        .collect();
    RateParameters::from_active_values(variant, &values, POPULATION)
}

pub fn bench_initial(variant: ModelVariant) -> CompartmentState {
    initial_state(
        variant,
        (500.0, 40.0, 10.0),
        &bench_params(variant),
        &InitialSplit::default(),
    )
    .expect("valid initial state")
}

pub fn bench_network(variant: ModelVariant) -> EffectNetwork {
    EffectNetwork::new(variant, &[16, 16], 42).expect("valid network")
}

/// Synthetic observations matching a trajectory's length, cheap to build
/// and strictly positive so the loss is well defined.
pub fn bench_observed(days: usize) -> ObservedSeries {
    let ramp = |scale: f64| (0..days).map(|d| scale * (d as f64 + 1.0)).collect();
    ObservedSeries {
        active_infected: ramp(120.0),
        recovered: ramp(40.0),
        deaths: ramp(3.0),
    }
}
