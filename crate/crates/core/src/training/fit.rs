//! The three fitting strategies: gradient descent over the constant rates,
//! gradient descent over rates plus an effect network, and a derivative-free
//! Nelder–Mead baseline over the rates.
//!
//! All three minimize the same trajectory loss over the same unrolled Euler
//! integration, so their final losses are directly comparable. Gradient
//! methods use Adam with a step-decay schedule and project the rates back
//! into [0, 1] after every update.

use serde::{Deserialize, Serialize};

use crate::compartments::{
    initial_state, CompartmentState, ModelVariant, RateParameters,
};
use crate::data::{CaseSeries, ObservedSeries, RegionConfig};
use crate::effect_net::EffectNetwork;
use crate::error::{Error, Result};
use crate::integrator::{integrate, IntegratorConfig, IntegratorScheme};
use crate::training::adam::{adam_step, lr_schedule_with, AdamState};
use crate::training::gradients::fit_gradients;
use crate::training::loss::trajectory_loss;
use crate::training::nelder_mead::{nelder_mead_minimize, NelderMeadOptions};

/// Which fitting strategy to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    /// Trainable effect network modulating the infection rate, optimized
    /// jointly with the rates by gradient descent.
    Dde,
    /// Constant rates only, optimized by gradient descent.
    ConstGrad,
    /// Constant rates only, optimized by the simplex baseline.
    NelderMead,
}

impl FitMethod {
    pub const ALL: [FitMethod; 3] = [FitMethod::Dde, FitMethod::ConstGrad, FitMethod::NelderMead];

    pub fn name(self) -> &'static str {
        match self {
            FitMethod::Dde => "dde",
            FitMethod::ConstGrad => "const-grad",
            FitMethod::NelderMead => "nelder-mead",
        }
    }

    pub fn parse(s: &str) -> Option<FitMethod> {
        Self::ALL.iter().copied().find(|m| m.name() == s)
    }

    /// Whether this method trains an effect network.
    pub fn uses_network(self) -> bool {
        matches!(self, FitMethod::Dde)
    }
}

impl std::fmt::Display for FitMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Hyperparameters shared by the fitting strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    /// Gradient-descent iterations.
    pub iterations: u32,
    pub learning_rate: f64,
    /// The learning rate is multiplied by this every `decay_every`
    /// iterations.
    pub decay_factor: f64,
    pub decay_every: u32,
    /// Euler substeps per day during training.
    pub substeps_per_day: u32,
    /// Hidden layer widths of the effect network.
    pub hidden: Vec<usize>,
    /// Seed for the network initialization.
    pub seed: u64,
    /// Iteration cap for the Nelder–Mead baseline.
    pub nm_max_iters: u32,
    pub nm_x_tolerance: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            iterations: 5000,
            learning_rate: 1e-3,
            decay_factor: 0.95,
            decay_every: 400,
            substeps_per_day: 4,
            hidden: vec![16, 16],
            seed: 42,
            nm_max_iters: 2000,
            nm_x_tolerance: 1e-8,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.decay_factor > 0.0 && self.decay_factor <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "decay_factor must lie in (0, 1], got {}",
                self.decay_factor
            )));
        }
        if self.substeps_per_day == 0 {
            return Err(Error::InvalidConfig(
                "substeps_per_day must be at least 1".into(),
            ));
        }
        if self.hidden.is_empty() || self.hidden.iter().any(|&h| h == 0) {
            return Err(Error::InvalidConfig(format!(
                "hidden layer widths must be positive, got {:?}",
                self.hidden
            )));
        }
        if !(self.nm_x_tolerance > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "nm_x_tolerance must be positive, got {}",
                self.nm_x_tolerance
            )));
        }
        Ok(())
    }

    /// The Euler configuration the loss is defined over.
    pub fn training_integrator(&self) -> IntegratorConfig {
        IntegratorConfig {
            scheme: IntegratorScheme::Euler,
            substeps_per_day: self.substeps_per_day,
        }
    }
}

/// A fitted model plus its optimization trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub variant: ModelVariant,
    pub method: FitMethod,
    pub params: RateParameters,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub network: Option<EffectNetwork>,
    /// Loss before each iteration (gradient methods) or the incumbent best
    /// per iteration (Nelder–Mead).
    pub loss_curve: Vec<f64>,
    /// Loss of the returned parameters; NaN when training diverged.
    pub final_loss: f64,
    /// Iteration at which the loss became non-finite, if it ever did.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub diverged_at: Option<u32>,
}

/// Fits `variant` to the training series with the chosen method.
///
/// The day-0 state is built from the first observation and the region's
/// population and split settings; a zero-iteration configuration returns
/// the initial parameters (and freshly initialized network) unchanged.
pub fn fit(
    variant: ModelVariant,
    method: FitMethod,
    train: &CaseSeries,
    region: &RegionConfig,
    config: &TrainingConfig,
) -> Result<FitResult> {
    region.validate()?;
    config.validate()?;
    let params = RateParameters::initial_guess(variant, region.population);
    let initial = initial_state(
        variant,
        train.first_observation()?,
        &params,
        &region.initial_split(),
    )?;
    let observed = train.observed();
    if observed.len() < 2 {
        return Err(Error::SeriesTooShort {
            len: observed.len(),
            holdout: 0,
        });
    }

    match method {
        FitMethod::NelderMead => fit_nelder_mead(variant, &initial, params, &observed, config),
        FitMethod::ConstGrad => {
            gradient_descent(variant, &initial, params, None, &observed, config, method)
        }
        FitMethod::Dde => {
            let network = EffectNetwork::new(variant, &config.hidden, config.seed)?;
            gradient_descent(
                variant,
                &initial,
                params,
                Some(network),
                &observed,
                config,
                method,
            )
        }
    }
}

/// Trains an effect-network model on `train`; shorthand for
/// [`fit`] with [`FitMethod::Dde`].
pub fn train_dde(
    variant: ModelVariant,
    train: &CaseSeries,
    region: &RegionConfig,
    config: &TrainingConfig,
) -> Result<FitResult> {
    fit(variant, FitMethod::Dde, train, region, config)
}

/// Fits constant rates by gradient descent; shorthand for [`fit`] with
/// [`FitMethod::ConstGrad`].
pub fn fit_constant_gradient(
    variant: ModelVariant,
    train: &CaseSeries,
    region: &RegionConfig,
    config: &TrainingConfig,
) -> Result<FitResult> {
    fit(variant, FitMethod::ConstGrad, train, region, config)
}

/// Fits constant rates with the derivative-free simplex search; shorthand
/// for [`fit`] with [`FitMethod::NelderMead`].
pub fn nelder_mead_fit(
    variant: ModelVariant,
    train: &CaseSeries,
    region: &RegionConfig,
    config: &TrainingConfig,
) -> Result<FitResult> {
    fit(variant, FitMethod::NelderMead, train, region, config)
}

fn euler_loss(
    variant: ModelVariant,
    initial: &CompartmentState,
    params: &RateParameters,
    network: Option<&EffectNetwork>,
    observed: &ObservedSeries,
    integrator: &IntegratorConfig,
) -> Result<f64> {
    let trajectory = integrate(variant, initial, params, network, observed.len(), integrator)?;
    trajectory_loss(variant, &trajectory, observed)
}

fn gradient_descent(
    variant: ModelVariant,
    initial: &CompartmentState,
    mut params: RateParameters,
    mut network: Option<EffectNetwork>,
    observed: &ObservedSeries,
    config: &TrainingConfig,
    method: FitMethod,
) -> Result<FitResult> {
    let integrator = config.training_integrator();
    let n_rates = variant.active_rates().len();
    let n_net = network.as_ref().map_or(0, |n| n.param_count());
    let mut adam = AdamState::new(n_rates + n_net);
    let mut flat = vec![0.0; n_rates + n_net];
    let mut grads = vec![0.0; n_rates + n_net];
    let mut loss_curve = Vec::with_capacity(config.iterations as usize);
    let mut diverged_at = None;

    for iteration in 0..config.iterations {
        let out = match fit_gradients(
            variant,
            initial,
            &params,
            network.as_ref(),
            observed,
            &integrator,
        ) {
            Ok(out) if out.loss.is_finite() => out,
            Ok(_) | Err(Error::NonFinite { .. }) => {
                diverged_at = Some(iteration);
                break;
            }
            Err(e) => return Err(e),
        };
        loss_curve.push(out.loss);

        flat[..n_rates].copy_from_slice(&params.active_values(variant));
        grads[..n_rates].copy_from_slice(&out.rate_gradients);
        if let Some(net) = &network {
            flat[n_rates..].copy_from_slice(&net.params_flat());
            grads[n_rates..].copy_from_slice(
                &out.network_gradients
                    .as_ref()
                    .expect("network gradients present when a network is trained")
                    .flat(),
            );
        }

        let lr = lr_schedule_with(
            config.learning_rate,
            iteration,
            config.decay_factor,
            config.decay_every,
        );
        adam_step(&mut adam, &mut flat, &grads, lr);

        // Rates live in [0, 1]; the network parameters are unconstrained.
        for v in &mut flat[..n_rates] {
            *v = v.clamp(0.0, 1.0);
        }
        params = RateParameters::from_active_values(variant, &flat[..n_rates], params.population);
        if let Some(net) = &mut network {
            net.set_params_flat(&flat[n_rates..])?;
        }
    }

    let final_loss = if diverged_at.is_some() {
        f64::NAN
    } else {
        match euler_loss(
            variant,
            initial,
            &params,
            network.as_ref(),
            observed,
            &integrator,
        ) {
            Ok(loss) if loss.is_finite() => loss,
            _ => {
                diverged_at = Some(config.iterations);
                f64::NAN
            }
        }
    };

    Ok(FitResult {
        variant,
        method,
        params,
        network,
        loss_curve,
        final_loss,
        diverged_at,
    })
}

fn fit_nelder_mead(
    variant: ModelVariant,
    initial: &CompartmentState,
    params: RateParameters,
    observed: &ObservedSeries,
    config: &TrainingConfig,
) -> Result<FitResult> {
    let integrator = config.training_integrator();
    let population = params.population;
    let objective = |x: &[f64]| {
        let clamped: Vec<f64> = x.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        let candidate = RateParameters::from_active_values(variant, &clamped, population);
        euler_loss(variant, initial, &candidate, None, observed, &integrator)
            .unwrap_or(f64::INFINITY)
    };
    let result = nelder_mead_minimize(
        objective,
        &params.active_values(variant),
        &NelderMeadOptions {
            max_iters: config.nm_max_iters,
            x_tolerance: config.nm_x_tolerance,
        },
    );
    let best: Vec<f64> = result.x.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    Ok(FitResult {
        variant,
        method: FitMethod::NelderMead,
        params: RateParameters::from_active_values(variant, &best, population),
        network: None,
        loss_curve: result.history,
        final_loss: result.fx,
        diverged_at: None,
    })
}
