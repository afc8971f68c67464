//! Goodness-of-fit metrics comparing a model trajectory against observations.
//!
//! Two metrics are reported per channel (active infected, recovered, dead):
//! a mean squared error with counts expressed in units of ten thousand
//! people, and the sample Pearson correlation. Correlation is undefined when
//! either side has zero variance, which genuinely happens (for instance a
//! death column that is all zeros), so it is an `Option` rather than a NaN.

use serde::{Deserialize, Serialize};

use crate::compartments::{initial_state, CompartmentState, ModelVariant, RateParameters};
use crate::data::{CaseSeries, ObservedSeries, RegionConfig};
use crate::effect_net::EffectNetwork;
use crate::error::{Error, Result};
use crate::integrator::{integrate, IntegratorConfig};

/// Mean squared error with both series scaled by 1/10000 first.
pub fn mse_ten_thousand(predicted: &[f64], observed: &[f64]) -> Result<f64> {
    if predicted.len() != observed.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: observed.len(),
        });
    }
    if predicted.is_empty() {
        return Err(Error::InvalidConfig(
            "cannot compute MSE of an empty series".into(),
        ));
    }
    let sum: f64 = predicted
        .iter()
        .zip(observed)
        .map(|(p, o)| {
            let d = (p - o) / 1.0e4;
            d * d
        })
        .sum();
    Ok(sum / predicted.len() as f64)
}

/// Sample Pearson correlation; `None` when either series has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::InvalidConfig(
            "cannot compute correlation of an empty series".into(),
        ));
    }
    let n = x.len() as f64;
    let mean_x: f64 = x.iter().sum::<f64>() / n;
    let mean_y: f64 = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mean_x;
        let dy = yi - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Ok(None);
    }
    Ok(Some(cov / (var_x * var_y).sqrt()))
}

/// Metrics for one observed channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelMetrics {
    pub mse_ten_thousand: f64,
    /// `None` when the correlation is undefined (zero variance).
    pub pearson: Option<f64>,
}

/// Per-channel and aggregate metrics for one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationMetrics {
    pub infected: ChannelMetrics,
    pub recovered: ChannelMetrics,
    /// Absent for variants without a death compartment.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub deaths: Option<ChannelMetrics>,
    /// Mean MSE over the channels present.
    pub mean_mse_ten_thousand: f64,
    /// Mean of the defined per-channel correlations; `None` if all are
    /// undefined.
    pub mean_pearson: Option<f64>,
    /// How many channels had an undefined correlation.
    pub undefined_pearson_channels: usize,
}

/// The per-day channel values a variant's trajectory predicts.
pub(crate) struct PredictedChannels {
    pub infected: Vec<f64>,
    pub recovered: Vec<f64>,
    pub deaths: Option<Vec<f64>>,
}

pub(crate) fn predicted_channels(
    variant: ModelVariant,
    trajectory: &[CompartmentState],
    days: usize,
) -> PredictedChannels {
    let r_idx = variant.recovered_index();
    let d_idx = variant.death_index();
    PredictedChannels {
        infected: trajectory[..days]
            .iter()
            .map(|s| variant.infected_total(&s.values))
            .collect(),
        recovered: trajectory[..days].iter().map(|s| s.values[r_idx]).collect(),
        deaths: d_idx.map(|i| trajectory[..days].iter().map(|s| s.values[i]).collect()),
    }
}

/// Scores the first `observed.len()` days of a trajectory against the
/// observations.
///
/// For variants without a death compartment the model's removed pool absorbs
/// deaths, so it is compared against observed recovered + deaths and no
/// death channel is reported.
pub fn evaluate(
    variant: ModelVariant,
    trajectory: &[CompartmentState],
    observed: &ObservedSeries,
) -> Result<EvaluationMetrics> {
    let days = observed.len();
    if trajectory.len() < days {
        return Err(Error::ShortTrajectory {
            predicted: trajectory.len(),
            observed: days,
        });
    }
    if days == 0 {
        return Err(Error::InvalidConfig(
            "cannot evaluate against an empty series".into(),
        ));
    }
    let predicted = predicted_channels(variant, trajectory, days);
    let observed_recovered: Vec<f64> = if variant.has_death() {
        observed.recovered.clone()
    } else {
        observed
            .recovered
            .iter()
            .zip(&observed.deaths)
            .map(|(r, d)| r + d)
            .collect()
    };

    let channel = |pred: &[f64], obs: &[f64]| -> Result<ChannelMetrics> {
        Ok(ChannelMetrics {
            mse_ten_thousand: mse_ten_thousand(pred, obs)?,
            pearson: pearson(pred, obs)?,
        })
    };
    let infected = channel(&predicted.infected, &observed.active_infected)?;
    let recovered = channel(&predicted.recovered, &observed_recovered)?;
    let deaths = match &predicted.deaths {
        Some(pred) => Some(channel(pred, &observed.deaths)?),
        None => None,
    };

    let mut mses = vec![infected.mse_ten_thousand, recovered.mse_ten_thousand];
    let mut correlations = vec![infected.pearson, recovered.pearson];
    if let Some(d) = &deaths {
        mses.push(d.mse_ten_thousand);
        correlations.push(d.pearson);
    }
    let defined: Vec<f64> = correlations.iter().filter_map(|c| *c).collect();
    Ok(EvaluationMetrics {
        infected,
        recovered,
        deaths,
        mean_mse_ten_thousand: mses.iter().sum::<f64>() / mses.len() as f64,
        mean_pearson: if defined.is_empty() {
            None
        } else {
            Some(defined.iter().sum::<f64>() / defined.len() as f64)
        },
        undefined_pearson_channels: correlations.len() - defined.len(),
    })
}

/// Integrates fitted parameters over the whole series span, starting from
/// the first observation.
///
/// The returned trajectory has one state per observed day, so its tail lines
/// up with any holdout window split off the same series.
pub fn predict_series(
    variant: ModelVariant,
    params: &RateParameters,
    network: Option<&EffectNetwork>,
    series: &CaseSeries,
    region: &RegionConfig,
    integrator: &IntegratorConfig,
) -> Result<Vec<CompartmentState>> {
    region.validate()?;
    let initial = initial_state(
        variant,
        series.first_observation()?,
        params,
        &region.initial_split(),
    )?;
    integrate(variant, &initial, params, network, series.len(), integrator)
}

/// Scores fitted parameters on the final `holdout_days` of `series`.
///
/// The model is integrated across the full span from day 0 — the holdout
/// window is never refit — and only the last `holdout_days` states are
/// compared against the observations, so this reproduces exactly what a
/// forward forecast from the end of training would produce.
pub fn evaluate_on_holdout(
    variant: ModelVariant,
    params: &RateParameters,
    network: Option<&EffectNetwork>,
    series: &CaseSeries,
    region: &RegionConfig,
    integrator: &IntegratorConfig,
    holdout_days: usize,
) -> Result<EvaluationMetrics> {
    let (_, test) = series.split_train_test(holdout_days)?;
    let trajectory = predict_series(variant, params, network, series, region, integrator)?;
    let tail = &trajectory[series.len() - holdout_days..];
    evaluate(variant, tail, &test.observed())
}
