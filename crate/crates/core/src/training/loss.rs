//! The fitting loss: a mean over days of squared log-count errors.
//!
//! Each day contributes the average of three squared differences of
//! log-shifted counts — active infected, recovered, dead — between the
//! trajectory and the observations. Log counts keep the early exponential
//! phase and the later plateau on comparable scales; the +1 shift keeps
//! zero counts finite.

use crate::compartments::{CompartmentState, ModelVariant};
use crate::data::ObservedSeries;
use crate::error::{Error, Result};

/// For variants whose removed pool absorbs deaths, the recovered channel is
/// compared against observed recovered + deaths and the death term is zero.
#[inline]
fn observed_recovered(variant: ModelVariant, recovered: f64, deaths: f64) -> f64 {
    if variant.has_death() {
        recovered
    } else {
        recovered + deaths
    }
}

#[inline]
fn log1(x: f64) -> f64 {
    (x + 1.0).ln()
}

/// The loss of one day's state against one day's observation.
fn day_loss(variant: ModelVariant, values: &[f64], obs_i: f64, obs_r: f64, obs_d: f64) -> f64 {
    let infected = variant.infected_total(values);
    let recovered = values[variant.recovered_index()];
    let mut sum = (log1(infected) - log1(obs_i)).powi(2)
        + (log1(recovered) - log1(observed_recovered(variant, obs_r, obs_d))).powi(2);
    if let Some(d_idx) = variant.death_index() {
        sum += (log1(values[d_idx]) - log1(obs_d)).powi(2);
    }
    sum / 3.0
}

/// Mean per-day loss of the first `observed.len()` days of a trajectory.
///
/// Day 0 is included; when the initial state is built from the first
/// observation its term is identically zero, so it only affects the
/// normalization.
pub fn trajectory_loss(
    variant: ModelVariant,
    trajectory: &[CompartmentState],
    observed: &ObservedSeries,
) -> Result<f64> {
    let days = observed.len();
    if days == 0 {
        return Err(Error::InvalidConfig(
            "cannot compute loss against an empty series".into(),
        ));
    }
    if trajectory.len() < days {
        return Err(Error::ShortTrajectory {
            predicted: trajectory.len(),
            observed: days,
        });
    }
    let mut total = 0.0;
    for d in 0..days {
        total += day_loss(
            variant,
            &trajectory[d].values,
            observed.active_infected[d],
            observed.recovered[d],
            observed.deaths[d],
        );
    }
    Ok(total / days as f64)
}

/// Gradient of the *mean* trajectory loss with respect to one day's state,
/// written into `out`. `days` is the number of observed days (the mean's
/// normalizer).
pub(crate) fn day_loss_state_gradient(
    variant: ModelVariant,
    values: &[f64],
    obs_i: f64,
    obs_r: f64,
    obs_d: f64,
    days: usize,
    out: &mut [f64],
) {
    out.fill(0.0);
    let scale = 2.0 / (3.0 * days as f64);

    let infected = variant.infected_total(values);
    let g_i = scale * (log1(infected) - log1(obs_i)) / (infected + 1.0);
    for &idx in variant.infected_indices() {
        out[idx] += g_i;
    }

    let r_idx = variant.recovered_index();
    let target_r = observed_recovered(variant, obs_r, obs_d);
    out[r_idx] += scale * (log1(values[r_idx]) - log1(target_r)) / (values[r_idx] + 1.0);

    if let Some(d_idx) = variant.death_index() {
        out[d_idx] += scale * (log1(values[d_idx]) - log1(obs_d)) / (values[d_idx] + 1.0);
    }
}
