//! Exact loss gradients by reverse accumulation through the unrolled
//! forward-Euler integration.
//!
//! The forward sweep integrates the model exactly as [`integrate`] would
//! with the Euler scheme — same substep function, same effect-network
//! evaluation, same clamping — while recording the pre-step state, the
//! effective infection rate and the network's forward cache for every
//! substep. The reverse sweep then pulls one adjoint vector back through
//! the recorded steps, accumulating gradients for the active rates and, in
//! the trainable case, every network weight and bias. Clamped components
//! hold their adjoint at zero across the step that clamped them, matching
//! the piecewise-constant forward behavior.
//!
//! Gradients are only defined for the Euler scheme; asking for RK4 here is
//! an error rather than a silently different derivative.

use crate::compartments::{
    CompartmentState, Flow, ModelVariant, RateId, RateParameters,
};
use crate::data::ObservedSeries;
use crate::effect_net::{effect_input_into, EffectNetwork, ForwardCache, NetworkGradients};
use crate::error::{Error, Result};
use crate::integrator::{euler_substep, IntegratorConfig, IntegratorScheme};
use crate::training::loss::{day_loss_state_gradient, trajectory_loss};

/// Loss, fitted trajectory and gradients from one forward/backward sweep.
#[derive(Debug, Clone)]
pub struct GradientOutput {
    pub loss: f64,
    /// Daily states, day 0 first — identical to what [`integrate`] returns
    /// for the same Euler configuration.
    pub trajectory: Vec<CompartmentState>,
    /// d loss / d rate for the active rates in canonical order.
    pub rate_gradients: Vec<f64>,
    /// d loss / d weight for every network parameter, when a network is in
    /// play.
    pub network_gradients: Option<NetworkGradients>,
}

/// Everything the reverse sweep needs about one executed substep.
struct StepRecord {
    z_before: Vec<f64>,
    beta_eff: f64,
    cache: Option<ForwardCache>,
    clamp_mask: u8,
}

/// Computes the trajectory loss and its exact gradients with respect to the
/// active rates and (optionally) the effect-network parameters.
pub fn fit_gradients(
    variant: ModelVariant,
    initial: &CompartmentState,
    params: &RateParameters,
    effect: Option<&EffectNetwork>,
    observed: &ObservedSeries,
    config: &IntegratorConfig,
) -> Result<GradientOutput> {
    fit_gradients_scaled(variant, initial, params, effect, observed, config, 1.0)
}

/// As [`fit_gradients`] but with the upstream loss gradient scaled by
/// `upstream`; gradients are linear in it, which the tests exploit.
pub(crate) fn fit_gradients_scaled(
    variant: ModelVariant,
    initial: &CompartmentState,
    params: &RateParameters,
    effect: Option<&EffectNetwork>,
    observed: &ObservedSeries,
    config: &IntegratorConfig,
    upstream: f64,
) -> Result<GradientOutput> {
    config.validate()?;
    if config.scheme != IntegratorScheme::Euler {
        return Err(Error::GradientsRequireEuler);
    }
    initial.validate(variant)?;
    params.validate_for(variant)?;
    if let Some(net) = effect {
        if net.input_dim() != variant.effect_input_dim() {
            return Err(Error::InputDimensionMismatch {
                expected: variant.effect_input_dim(),
                got: net.input_dim(),
            });
        }
    }
    let days = observed.len();
    if days == 0 {
        return Err(Error::InvalidConfig(
            "cannot fit against an empty series".into(),
        ));
    }

    let dim = variant.dimension();
    let dt = config.dt();
    let substeps = config.substeps_per_day as usize;

    // Forward sweep: plain Euler integration plus per-substep records.
    let mut trajectory = Vec::with_capacity(days);
    trajectory.push(CompartmentState::new(initial.values.clone(), 0));
    let mut records: Vec<StepRecord> = Vec::with_capacity((days - 1) * substeps);
    let mut current = initial.values.clone();
    let mut next = vec![0.0; dim];
    let mut deriv = vec![0.0; dim];
    let mut input_buf = Vec::with_capacity(variant.effect_input_dim());

    for day in 1..days {
        for _ in 0..substeps {
            let (beta_eff, cache) = match effect {
                None => (params.beta_star, None),
                Some(net) => {
                    effect_input_into(variant, &current, params.population, &mut input_buf);
                    let cache = net.forward(&input_buf)?;
                    (params.beta_star * cache.eff, Some(cache))
                }
            };
            let clamp_mask =
                euler_substep(variant, &current, params, beta_eff, dt, &mut deriv, &mut next);
            records.push(StepRecord {
                z_before: std::mem::replace(&mut current, vec![0.0; dim]),
                beta_eff,
                cache,
                clamp_mask,
            });
            std::mem::swap(&mut current, &mut next);
        }
        if current.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "integrated state".into(),
                day: Some(day as u32),
            });
        }
        trajectory.push(CompartmentState::new(current.clone(), day as u32));
    }

    let loss = trajectory_loss(variant, &trajectory, observed)?;

    // Reverse sweep.
    let active = variant.active_rates();
    debug_assert_eq!(active[0], RateId::BetaStar);
    let mut rate_gradients = vec![0.0; active.len()];
    let mut network_gradients = effect.map(NetworkGradients::zeros_like);
    let mut lambda = vec![0.0; dim];
    let mut lambda_prev = vec![0.0; dim];
    let mut day_grad = vec![0.0; dim];
    let population = params.population;

    for day in (1..days).rev() {
        day_loss_state_gradient(
            variant,
            &trajectory[day].values,
            observed.active_infected[day],
            observed.recovered[day],
            observed.deaths[day],
            days,
            &mut day_grad,
        );
        for i in 0..dim {
            lambda[i] += upstream * day_grad[i];
        }

        for record in records[(day - 1) * substeps..day * substeps].iter().rev() {
            // A clamped component was pinned to zero by this step, so no
            // sensitivity flows through it into the pre-step state.
            for i in 0..dim {
                if record.clamp_mask & (1 << i) != 0 {
                    lambda[i] = 0.0;
                }
            }
            lambda_prev.copy_from_slice(&lambda);
            let z = &record.z_before;

            for flow in variant.flows() {
                match *flow {
                    Flow::Linear { from, to, rate } => {
                        let w = lambda[to] - lambda[from];
                        let position = active
                            .iter()
                            .position(|&id| id == rate)
                            .expect("flow rate is active");
                        rate_gradients[position] += dt * w * z[from];
                        lambda_prev[from] += dt * w * params.require(rate);
                    }
                    Flow::Infection {
                        from,
                        to,
                        transmitter,
                    } => {
                        let w = lambda[to] - lambda[from];
                        lambda_prev[from] += dt * w * record.beta_eff * z[transmitter] / population;
                        lambda_prev[transmitter] += dt * w * record.beta_eff * z[from] / population;
                        // Sensitivity of the loss to the effective rate of
                        // this one substep.
                        let u_eff = dt * w * z[from] * z[transmitter] / population;
                        match (&record.cache, effect) {
                            (Some(cache), Some(net)) => {
                                rate_gradients[0] += u_eff * cache.eff;
                                let (grads, d_input) =
                                    net.backward(cache, u_eff * params.beta_star);
                                network_gradients
                                    .as_mut()
                                    .expect("allocated alongside the network")
                                    .add_assign(&grads);
                                for (j, idx) in variant.effect_input_indices().enumerate() {
                                    lambda_prev[idx] += d_input[j] / population;
                                }
                            }
                            _ => rate_gradients[0] += u_eff,
                        }
                    }
                }
            }
            std::mem::swap(&mut lambda, &mut lambda_prev);
        }
    }

    Ok(GradientOutput {
        loss,
        trajectory,
        rate_gradients,
        network_gradients,
    })
}
