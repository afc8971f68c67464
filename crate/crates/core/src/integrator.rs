//! Fixed-step time integration of the compartmental ODEs.
//!
//! Two explicit schemes are provided: forward Euler (the scheme the training
//! gradients are differentiated through) and classical RK4 for higher-order
//! inference and forecasting. Both subdivide each day into a fixed number of
//! substeps and clamp any component that would cross zero, so trajectories
//! stay physically meaningful even with aggressive rates.

use serde::{Deserialize, Serialize};

use crate::compartments::{
    vector_field_into, CompartmentState, ModelVariant, RateParameters,
};
use crate::effect_net::{effect_input_into, EffectNetwork};
use crate::error::{Error, Result};

/// Which explicit scheme advances the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegratorScheme {
    Euler,
    Rk4,
}

impl IntegratorScheme {
    pub fn name(self) -> &'static str {
        match self {
            IntegratorScheme::Euler => "euler",
            IntegratorScheme::Rk4 => "rk4",
        }
    }
}

/// Scheme plus temporal resolution. Each day is split into
/// `substeps_per_day` equal steps of length `1 / substeps_per_day`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub scheme: IntegratorScheme,
    pub substeps_per_day: u32,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            scheme: IntegratorScheme::Rk4,
            substeps_per_day: 1,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.substeps_per_day == 0 {
            return Err(Error::InvalidConfig(
                "substeps_per_day must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.substeps_per_day as f64
    }
}

/// Computes the effective infection rate at a state: `beta_star` scaled by
/// the effect network when one is supplied.
///
/// Callers must have checked the network input width against the variant;
/// after that the forward pass cannot fail.
#[inline]
pub(crate) fn beta_eff_at(
    variant: ModelVariant,
    z: &[f64],
    params: &RateParameters,
    effect: Option<&EffectNetwork>,
    input_buf: &mut Vec<f64>,
) -> f64 {
    match effect {
        None => params.beta_star,
        Some(net) => {
            effect_input_into(variant, z, params.population, input_buf);
            let eff = net.eff(input_buf).expect("input width checked by caller");
            params.beta_star * eff
        }
    }
}

/// One forward-Euler substep with clamping.
///
/// Writes the next state into `out` and returns a bitmask with bit `i` set
/// when component `i` was clamped to zero. This exact update is what the
/// training gradients differentiate through, so the reverse pass reuses it.
#[inline]
pub(crate) fn euler_substep(
    variant: ModelVariant,
    z: &[f64],
    params: &RateParameters,
    beta_eff: f64,
    dt: f64,
    deriv_buf: &mut [f64],
    out: &mut [f64],
) -> u8 {
    vector_field_into(variant, z, params, beta_eff, deriv_buf);
    let mut mask = 0u8;
    for i in 0..z.len() {
        let v = z[i] + dt * deriv_buf[i];
        if v < 0.0 {
            mask |= 1 << i;
            out[i] = 0.0;
        } else {
            out[i] = v;
        }
    }
    mask
}

struct Rk4Scratch {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    stage: Vec<f64>,
}

impl Rk4Scratch {
    fn new(dim: usize) -> Self {
        Self {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            stage: vec![0.0; dim],
        }
    }
}

/// One classical RK4 substep with clamping. The effect network (when
/// present) is re-evaluated at every stage state, since it is part of the
/// autonomous right-hand side.
fn rk4_substep(
    variant: ModelVariant,
    z: &[f64],
    params: &RateParameters,
    effect: Option<&EffectNetwork>,
    dt: f64,
    scratch: &mut Rk4Scratch,
    input_buf: &mut Vec<f64>,
    out: &mut [f64],
) {
    let dim = z.len();
    let beta1 = beta_eff_at(variant, z, params, effect, input_buf);
    vector_field_into(variant, z, params, beta1, &mut scratch.k1);

    for i in 0..dim {
        scratch.stage[i] = z[i] + 0.5 * dt * scratch.k1[i];
    }
    let beta2 = beta_eff_at(variant, &scratch.stage, params, effect, input_buf);
    vector_field_into(variant, &scratch.stage, params, beta2, &mut scratch.k2);

    for i in 0..dim {
        scratch.stage[i] = z[i] + 0.5 * dt * scratch.k2[i];
    }
    let beta3 = beta_eff_at(variant, &scratch.stage, params, effect, input_buf);
    vector_field_into(variant, &scratch.stage, params, beta3, &mut scratch.k3);

    for i in 0..dim {
        scratch.stage[i] = z[i] + dt * scratch.k3[i];
    }
    let beta4 = beta_eff_at(variant, &scratch.stage, params, effect, input_buf);
    vector_field_into(variant, &scratch.stage, params, beta4, &mut scratch.k4);

    for i in 0..dim {
        let incr = (scratch.k1[i] + 2.0 * scratch.k2[i] + 2.0 * scratch.k3[i] + scratch.k4[i])
            / 6.0;
        out[i] = (z[i] + dt * incr).max(0.0);
    }
}

/// Integrates `days` daily states starting from `initial` (which becomes
/// day 0 of the result). `days` must be at least 1.
pub fn integrate(
    variant: ModelVariant,
    initial: &CompartmentState,
    params: &RateParameters,
    effect: Option<&EffectNetwork>,
    days: usize,
    config: &IntegratorConfig,
) -> Result<Vec<CompartmentState>> {
    config.validate()?;
    if days == 0 {
        return Err(Error::InvalidConfig(
            "trajectory must cover at least one day".into(),
        ));
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

    let dim = variant.dimension();
    let dt = config.dt();
    let mut trajectory = Vec::with_capacity(days);
    trajectory.push(CompartmentState::new(initial.values.clone(), 0));

    let mut current = initial.values.clone();
    let mut next = vec![0.0; dim];
    let mut deriv = vec![0.0; dim];
    let mut input_buf = Vec::with_capacity(variant.effect_input_dim());
    let mut rk4 = Rk4Scratch::new(dim);

    for day in 1..days {
        for _ in 0..config.substeps_per_day {
            match config.scheme {
                IntegratorScheme::Euler => {
                    let beta = beta_eff_at(variant, &current, params, effect, &mut input_buf);
                    euler_substep(variant, &current, params, beta, dt, &mut deriv, &mut next);
                }
                IntegratorScheme::Rk4 => {
                    rk4_substep(
                        variant, &current, params, effect, dt, &mut rk4, &mut input_buf,
                        &mut next,
                    );
                }
            }
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
    Ok(trajectory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compartments::InitialSplit;

    fn sird_params(beta: f64, delta: f64, eps: f64, n: f64) -> RateParameters {
        let mut p = RateParameters::zeros(ModelVariant::Sird, n);
        p.beta_star = beta;
        p.delta = Some(delta);
        p.epsilon = Some(eps);
        p
    }

    fn config(scheme: IntegratorScheme, substeps: u32) -> IntegratorConfig {
        IntegratorConfig {
            scheme,
            substeps_per_day: substeps,
        }
    }

    #[test]
    fn euler_single_step_hand_computed() {
        let z0 = CompartmentState::new(vec![990.0, 10.0, 0.0, 0.0], 0);
        let params = sird_params(0.5, 0.1, 0.05, 1000.0);
        let traj = integrate(
            ModelVariant::Sird,
            &z0,
            &params,
            None,
            2,
            &config(IntegratorScheme::Euler, 1),
        )
        .unwrap();
        // z + 1.0 * (-4.95, 3.45, 1.0, 0.5)
        assert_eq!(traj[1].values, vec![985.05, 13.45, 1.0, 0.5]);
    }

    #[test]
    fn rk4_single_step_matches_frozen_oracle() {
        // Reference values computed with an independent 64-bit RK4
        // implementation of the same right-hand side.
        let z0 = CompartmentState::new(vec![990.0, 10.0, 0.0, 0.0], 0);
        let params = sird_params(0.5, 0.1, 0.05, 1000.0);
        let traj = integrate(
            ModelVariant::Sird,
            &z0,
            &params,
            None,
            2,
            &config(IntegratorScheme::Rk4, 1),
        )
        .unwrap();
        let expected = [
            984.1099133041885,
            14.099874040747354,
            1.193475103376087,
            0.5967375516880435,
        ];
        for (got, want) in traj[1].values.iter().zip(expected) {
            assert!(
                (got - want).abs() <= 1e-12 * want.abs().max(1.0),
                "got {got}, want {want}"
            );
        }
    }

    #[test]
    fn rk4_matches_exponential_decay_truncation() {
        // With S = 0 and delta = 1 the infected pool decays as e^{-t};
        // one RK4 step of size 1 gives the 4th-order Taylor value 0.375.
        let mut params = RateParameters::zeros(ModelVariant::Sir, 1.0);
        params.beta_star = 0.0;
        params.delta = Some(1.0);
        let z0 = CompartmentState::new(vec![0.0, 1.0, 0.0], 0);
        let traj = integrate(
            ModelVariant::Sir,
            &z0,
            &params,
            None,
            2,
            &config(IntegratorScheme::Rk4, 1),
        )
        .unwrap();
        assert_eq!(traj[1].values[1], 0.375);
        assert_eq!(traj[1].values[2], 0.625);
    }

    #[test]
    fn conservation_long_run_with_network() {
        let n = 1.0e6;
        let params = RateParameters::initial_guess(ModelVariant::Semcrd, n);
        let net = EffectNetwork::new(ModelVariant::Semcrd, &[16, 16], 42).unwrap();
        let z0 = crate::compartments::initial_state(
            ModelVariant::Semcrd,
            (150.0, 3.0, 1.0),
            &params,
            &InitialSplit::default(),
        )
        .unwrap();
        for scheme in [IntegratorScheme::Euler, IntegratorScheme::Rk4] {
            let traj = integrate(
                ModelVariant::Semcrd,
                &z0,
                &params,
                Some(&net),
                60,
                &config(scheme, 4),
            )
            .unwrap();
            for state in &traj {
                let rel = (state.total() - n).abs() / n;
                assert!(rel < 1e-9, "{scheme:?} day {}: drift {rel}", state.day_index);
                assert!(state.values.iter().all(|&v| v >= 0.0));
            }
        }
    }

    #[test]
    fn clamping_keeps_states_non_negative() {
        // Outflow rates that would overshoot zero in a single Euler step.
        let params = sird_params(0.0, 0.9, 0.9, 1000.0);
        let z0 = CompartmentState::new(vec![0.0, 10.0, 0.0, 0.0], 0);
        let traj = integrate(
            ModelVariant::Sird,
            &z0,
            &params,
            None,
            3,
            &config(IntegratorScheme::Euler, 1),
        )
        .unwrap();
        // I would be 10 - 1.8*10 = -8 without clamping.
        assert_eq!(traj[1].values[1], 0.0);
        assert!(traj
            .iter()
            .all(|s| s.values.iter().all(|&v| v >= 0.0)));
    }

    #[test]
    fn convergence_orders() {
        let params = sird_params(0.4, 0.1, 0.02, 1.0e6);
        let z0 = CompartmentState::new(vec![999_000.0, 1000.0, 0.0, 0.0], 0);
        let days = 4;
        let error_at = |scheme, substeps: u32| -> f64 {
            let reference = integrate(
                ModelVariant::Sird,
                &z0,
                &params,
                None,
                days,
                &config(IntegratorScheme::Rk4, 64),
            )
            .unwrap();
            let traj = integrate(
                ModelVariant::Sird,
                &z0,
                &params,
                None,
                days,
                &config(scheme, substeps),
            )
            .unwrap();
            traj.last()
                .unwrap()
                .values
                .iter()
                .zip(&reference.last().unwrap().values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        let euler_ratio = error_at(IntegratorScheme::Euler, 4) / error_at(IntegratorScheme::Euler, 8);
        let rk4_ratio = error_at(IntegratorScheme::Rk4, 4) / error_at(IntegratorScheme::Rk4, 8);
        assert!(
            (1.5..=2.5).contains(&euler_ratio),
            "euler halving ratio {euler_ratio}"
        );
        assert!(rk4_ratio >= 8.0, "rk4 halving ratio {rk4_ratio}");
    }

    #[test]
    fn effect_network_dampens_infection() {
        let n = 1.0e6;
        let params = sird_params(0.4, 0.05, 0.01, n);
        let z0 = CompartmentState::new(vec![n - 100.0, 100.0, 0.0, 0.0], 0);
        let net = EffectNetwork::new(ModelVariant::Sird, &[8], 1).unwrap();
        let cfg = config(IntegratorScheme::Rk4, 4);
        let with_net =
            integrate(ModelVariant::Sird, &z0, &params, Some(&net), 30, &cfg).unwrap();
        let without =
            integrate(ModelVariant::Sird, &z0, &params, None, 30, &cfg).unwrap();
        // Eff < 1 always, so fewer susceptibles are ever consumed.
        assert!(with_net.last().unwrap().values[0] > without.last().unwrap().values[0]);
    }

    #[test]
    fn repeated_runs_are_bit_identical() {
        let params = RateParameters::initial_guess(ModelVariant::Seird, 1.0e5);
        let net = EffectNetwork::new(ModelVariant::Seird, &[16, 16], 9).unwrap();
        let z0 = crate::compartments::initial_state(
            ModelVariant::Seird,
            (50.0, 2.0, 1.0),
            &params,
            &InitialSplit::default(),
        )
        .unwrap();
        let cfg = IntegratorConfig::default();
        let a = integrate(ModelVariant::Seird, &z0, &params, Some(&net), 40, &cfg).unwrap();
        let b = integrate(ModelVariant::Seird, &z0, &params, Some(&net), 40, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_configs_rejected() {
        let params = sird_params(0.3, 0.1, 0.01, 1000.0);
        let z0 = CompartmentState::new(vec![990.0, 10.0, 0.0, 0.0], 0);
        assert!(matches!(
            integrate(
                ModelVariant::Sird,
                &z0,
                &params,
                None,
                0,
                &IntegratorConfig::default()
            ),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            integrate(
                ModelVariant::Sird,
                &z0,
                &params,
                None,
                5,
                &config(IntegratorScheme::Rk4, 0)
            ),
            Err(Error::InvalidConfig(_))
        ));
        let wrong_net = EffectNetwork::with_input_dim(5, &[4], 1).unwrap();
        assert!(matches!(
            integrate(
                ModelVariant::Sird,
                &z0,
                &params,
                Some(&wrong_net),
                5,
                &IntegratorConfig::default()
            ),
            Err(Error::InputDimensionMismatch { expected: 3, got: 5 })
        ));
    }

    #[test]
    fn single_day_returns_initial_only() {
        let params = sird_params(0.3, 0.1, 0.01, 1000.0);
        let z0 = CompartmentState::new(vec![990.0, 10.0, 0.0, 0.0], 0);
        let traj = integrate(
            ModelVariant::Sird,
            &z0,
            &params,
            None,
            1,
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj[0], z0);
    }
}
