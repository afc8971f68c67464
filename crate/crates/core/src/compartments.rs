//! Model variants, their state layouts, and the right-hand-side vector fields.
//!
//! Every variant is described by a static table of [`Flow`]s between
//! compartments. The vector field, its Jacobian-vector products used by the
//! gradient code, and the population-conservation property all fall out of
//! that single table: each flow subtracts from its source and adds to its
//! destination, so the components of `dZ/dt` always sum to zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The six supported compartmental models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelVariant {
    Sir,
    Seir,
    Sird,
    Seird,
    Smcrd,
    Semcrd,
}

/// Identifies one of the named epidemiological rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateId {
    /// Base infection rate β*; modulated by the effect network when present.
    BetaStar,
    /// Exposed-to-infectious rate γ.
    Gamma,
    /// Recovery rate δ (single-infectious-compartment variants).
    Delta,
    /// Mild recovery rate δ₁.
    Delta1,
    /// Critical recovery rate δ₂.
    Delta2,
    /// Mild-to-critical transition rate α.
    Alpha,
    /// Mortality rate ε.
    Epsilon,
}

impl RateId {
    pub fn name(self) -> &'static str {
        match self {
            RateId::BetaStar => "beta_star",
            RateId::Gamma => "gamma",
            RateId::Delta => "delta",
            RateId::Delta1 => "delta1",
            RateId::Delta2 => "delta2",
            RateId::Alpha => "alpha",
            RateId::Epsilon => "epsilon",
        }
    }
}

/// One directed flow of people between two compartments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    /// The force of infection `beta_eff * Z[susceptible] * Z[transmitter] / N`.
    Infection {
        from: usize,
        to: usize,
        transmitter: usize,
    },
    /// A linear flow `rate * Z[from]`.
    Linear {
        from: usize,
        to: usize,
        rate: RateId,
    },
}

use Flow::{Infection, Linear};
use RateId::{Alpha, Delta, Delta1, Delta2, Epsilon, Gamma};

const SIR_FLOWS: &[Flow] = &[
    Infection { from: 0, to: 1, transmitter: 1 },
    Linear { from: 1, to: 2, rate: Delta },
];

const SEIR_FLOWS: &[Flow] = &[
    Infection { from: 0, to: 1, transmitter: 2 },
    Linear { from: 1, to: 2, rate: Gamma },
    Linear { from: 2, to: 3, rate: Delta },
];

const SIRD_FLOWS: &[Flow] = &[
    Infection { from: 0, to: 1, transmitter: 1 },
    Linear { from: 1, to: 2, rate: Delta },
    Linear { from: 1, to: 3, rate: Epsilon },
];

const SEIRD_FLOWS: &[Flow] = &[
    Infection { from: 0, to: 1, transmitter: 2 },
    Linear { from: 1, to: 2, rate: Gamma },
    Linear { from: 2, to: 3, rate: Delta },
    Linear { from: 2, to: 4, rate: Epsilon },
];

// Only mild cases transmit; critical cases are hospitalized. Death occurs
// from the critical compartment only.
const SMCRD_FLOWS: &[Flow] = &[
    Infection { from: 0, to: 1, transmitter: 1 },
    Linear { from: 1, to: 2, rate: Alpha },
    Linear { from: 1, to: 3, rate: Delta1 },
    Linear { from: 2, to: 3, rate: Delta2 },
    Linear { from: 2, to: 4, rate: Epsilon },
];

const SEMCRD_FLOWS: &[Flow] = &[
    Infection { from: 0, to: 1, transmitter: 2 },
    Linear { from: 1, to: 2, rate: Gamma },
    Linear { from: 2, to: 3, rate: Alpha },
    Linear { from: 2, to: 4, rate: Delta1 },
    Linear { from: 3, to: 4, rate: Delta2 },
    Linear { from: 3, to: 5, rate: Epsilon },
];

impl ModelVariant {
    pub const ALL: [ModelVariant; 6] = [
        ModelVariant::Sir,
        ModelVariant::Seir,
        ModelVariant::Sird,
        ModelVariant::Seird,
        ModelVariant::Smcrd,
        ModelVariant::Semcrd,
    ];

    /// Number of compartments.
    pub fn dimension(self) -> usize {
        self.labels().len()
    }

    /// Compartment labels in state-vector order.
    pub fn labels(self) -> &'static [&'static str] {
        match self {
            ModelVariant::Sir => &["S", "I", "R"],
            ModelVariant::Seir => &["S", "E", "I", "R"],
            ModelVariant::Sird => &["S", "I", "R", "D"],
            ModelVariant::Seird => &["S", "E", "I", "R", "D"],
            ModelVariant::Smcrd => &["S", "M", "C", "R", "D"],
            ModelVariant::Semcrd => &["S", "E", "M", "C", "R", "D"],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelVariant::Sir => "sir",
            ModelVariant::Seir => "seir",
            ModelVariant::Sird => "sird",
            ModelVariant::Seird => "seird",
            ModelVariant::Smcrd => "smcrd",
            ModelVariant::Semcrd => "semcrd",
        }
    }

    /// The flow table defining the vector field.
    pub fn flows(self) -> &'static [Flow] {
        match self {
            ModelVariant::Sir => SIR_FLOWS,
            ModelVariant::Seir => SEIR_FLOWS,
            ModelVariant::Sird => SIRD_FLOWS,
            ModelVariant::Seird => SEIRD_FLOWS,
            ModelVariant::Smcrd => SMCRD_FLOWS,
            ModelVariant::Semcrd => SEMCRD_FLOWS,
        }
    }

    /// The rates that are structurally active for this variant, in canonical
    /// order. `beta_star` always comes first.
    pub fn active_rates(self) -> &'static [RateId] {
        use RateId::*;
        match self {
            ModelVariant::Sir => &[BetaStar, Delta],
            ModelVariant::Seir => &[BetaStar, Gamma, Delta],
            ModelVariant::Sird => &[BetaStar, Delta, Epsilon],
            ModelVariant::Seird => &[BetaStar, Gamma, Delta, Epsilon],
            ModelVariant::Smcrd => &[BetaStar, Delta1, Delta2, Alpha, Epsilon],
            ModelVariant::Semcrd => &[BetaStar, Gamma, Delta1, Delta2, Alpha, Epsilon],
        }
    }

    pub fn has_exposed(self) -> bool {
        matches!(
            self,
            ModelVariant::Seir | ModelVariant::Seird | ModelVariant::Semcrd
        )
    }

    pub fn has_death(self) -> bool {
        !matches!(self, ModelVariant::Sir | ModelVariant::Seir)
    }

    /// True for the variants that split infections into mild and critical.
    pub fn has_mild_critical(self) -> bool {
        matches!(self, ModelVariant::Smcrd | ModelVariant::Semcrd)
    }

    /// Indices of the compartments counted as "currently infected" when
    /// comparing against observed active infections (I, or M + C).
    pub fn infected_indices(self) -> &'static [usize] {
        match self {
            ModelVariant::Sir => &[1],
            ModelVariant::Seir => &[2],
            ModelVariant::Sird => &[1],
            ModelVariant::Seird => &[2],
            ModelVariant::Smcrd => &[1, 2],
            ModelVariant::Semcrd => &[2, 3],
        }
    }

    /// Total currently infected in a state vector (I, or M + C).
    pub fn infected_total(self, values: &[f64]) -> f64 {
        self.infected_indices().iter().map(|&i| values[i]).sum()
    }

    /// Index of the recovered compartment.
    pub fn recovered_index(self) -> usize {
        match self {
            ModelVariant::Sir => 2,
            ModelVariant::Seir => 3,
            ModelVariant::Sird => 2,
            ModelVariant::Seird => 3,
            ModelVariant::Smcrd => 3,
            ModelVariant::Semcrd => 4,
        }
    }

    /// Index of the death compartment, if the variant has one.
    pub fn death_index(self) -> Option<usize> {
        match self {
            ModelVariant::Sir | ModelVariant::Seir => None,
            ModelVariant::Sird => Some(3),
            ModelVariant::Seird => Some(4),
            ModelVariant::Smcrd => Some(4),
            ModelVariant::Semcrd => Some(5),
        }
    }

    /// Compartment indices fed to the effect network: everything except S,
    /// in state order.
    pub fn effect_input_indices(self) -> std::ops::Range<usize> {
        1..self.dimension()
    }

    /// Effect-network input width (state dimension minus the S compartment).
    pub fn effect_input_dim(self) -> usize {
        self.dimension() - 1
    }

    pub fn parse(s: &str) -> Option<ModelVariant> {
        Self::ALL.iter().copied().find(|v| v.name() == s)
    }
}

impl std::fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Population counts per compartment at one day index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompartmentState {
    pub values: Vec<f64>,
    pub day_index: u32,
}

impl CompartmentState {
    pub fn new(values: Vec<f64>, day_index: u32) -> Self {
        Self { values, day_index }
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn validate(&self, variant: ModelVariant) -> Result<()> {
        if self.values.len() != variant.dimension() {
            return Err(Error::DimensionMismatch {
                variant: variant.name(),
                expected: variant.dimension(),
                got: self.values.len(),
            });
        }
        for (i, v) in self.values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    what: format!("compartment {}", variant.labels()[i]),
                    day: Some(self.day_index),
                });
            }
            if *v < 0.0 {
                return Err(Error::NonFinite {
                    what: format!("negative compartment {}", variant.labels()[i]),
                    day: Some(self.day_index),
                });
            }
        }
        Ok(())
    }
}

/// The scalar epidemiological rates of one variant, plus the population.
///
/// Rates that do not belong to a variant are `None`, never zero, so the
/// optimizer and gradient code only ever see the active set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateParameters {
    pub beta_star: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub delta1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub delta2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub epsilon: Option<f64>,
    pub population: f64,
}

impl RateParameters {
    /// All-zero active rates for a variant.
    pub fn zeros(variant: ModelVariant, population: f64) -> Self {
        Self::from_active_values(
            variant,
            &vec![0.0; variant.active_rates().len()],
            population,
        )
    }

    /// The default starting point used by the fitting routines:
    /// β* = 0.3, γ = 0.15, δ = 0.07, δ₁ = 0.07, δ₂ = 0.03, α = 0.15, ε = 0.03.
    pub fn initial_guess(variant: ModelVariant, population: f64) -> Self {
        let mut p = Self::zeros(variant, population);
        for &id in variant.active_rates() {
            let v = match id {
                RateId::BetaStar => 0.3,
                RateId::Gamma => 0.15,
                RateId::Delta => 0.07,
                RateId::Delta1 => 0.07,
                RateId::Delta2 => 0.03,
                RateId::Alpha => 0.15,
                RateId::Epsilon => 0.03,
            };
            p.set(id, v);
        }
        p
    }

    /// Build from active-rate values in the variant's canonical order.
    pub fn from_active_values(variant: ModelVariant, values: &[f64], population: f64) -> Self {
        let ids = variant.active_rates();
        assert_eq!(
            ids.len(),
            values.len(),
            "expected {} active rates for {variant}",
            ids.len()
        );
        let mut p = RateParameters {
            beta_star: 0.0,
            gamma: None,
            delta: None,
            delta1: None,
            delta2: None,
            alpha: None,
            epsilon: None,
            population,
        };
        for (&id, &v) in ids.iter().zip(values) {
            p.set(id, v);
        }
        p
    }

    /// Active-rate values in the variant's canonical order.
    pub fn active_values(&self, variant: ModelVariant) -> Vec<f64> {
        variant
            .active_rates()
            .iter()
            .map(|&id| self.get(id).expect("active rate must be present"))
            .collect()
    }

    pub fn get(&self, id: RateId) -> Option<f64> {
        match id {
            RateId::BetaStar => Some(self.beta_star),
            RateId::Gamma => self.gamma,
            RateId::Delta => self.delta,
            RateId::Delta1 => self.delta1,
            RateId::Delta2 => self.delta2,
            RateId::Alpha => self.alpha,
            RateId::Epsilon => self.epsilon,
        }
    }

    pub fn set(&mut self, id: RateId, value: f64) {
        match id {
            RateId::BetaStar => self.beta_star = value,
            RateId::Gamma => self.gamma = Some(value),
            RateId::Delta => self.delta = Some(value),
            RateId::Delta1 => self.delta1 = Some(value),
            RateId::Delta2 => self.delta2 = Some(value),
            RateId::Alpha => self.alpha = Some(value),
            RateId::Epsilon => self.epsilon = Some(value),
        }
    }

    /// A rate that a variant's flow table references; absent means the
    /// parameters were built for a different variant.
    pub(crate) fn require(&self, id: RateId) -> f64 {
        self.get(id)
            .unwrap_or_else(|| panic!("rate {} referenced by flow but absent", id.name()))
    }

    /// Checks the active set matches the variant exactly, rates lie in
    /// [0, 1], and the population is positive.
    pub fn validate_for(&self, variant: ModelVariant) -> Result<()> {
        if !(self.population > 0.0) {
            return Err(Error::NonPositivePopulation(self.population));
        }
        let active = variant.active_rates();
        for &id in active {
            match self.get(id) {
                None => {
                    return Err(Error::MissingRate {
                        rate: id.name(),
                        variant: variant.name(),
                    })
                }
                Some(v) if !(0.0..=1.0).contains(&v) => {
                    return Err(Error::RateOutOfRange {
                        rate: id.name(),
                        value: v,
                    })
                }
                _ => {}
            }
        }
        use RateId::*;
        for id in [Gamma, Delta, Delta1, Delta2, Alpha, Epsilon] {
            if self.get(id).is_some() && !active.contains(&id) {
                return Err(Error::InactiveRate {
                    rate: id.name(),
                    variant: variant.name(),
                });
            }
        }
        Ok(())
    }
}

/// Writes `dZ/dt` into `out` without validating inputs. Hot path shared by
/// the integrator and the gradient code.
pub(crate) fn vector_field_into(
    variant: ModelVariant,
    z: &[f64],
    params: &RateParameters,
    beta_eff: f64,
    out: &mut [f64],
) {
    out.fill(0.0);
    let n = params.population;
    for flow in variant.flows() {
        let (from, to, value) = match *flow {
            Infection {
                from,
                to,
                transmitter,
            } => (from, to, beta_eff * z[from] * z[transmitter] / n),
            Linear { from, to, rate } => (from, to, params.require(rate) * z[from]),
        };
        out[from] -= value;
        out[to] += value;
    }
}

/// Evaluates the right-hand side `F(Z, t, θ)` of a variant.
///
/// `beta_eff` is the effective infection rate for this evaluation; the base
/// rate `beta_star` in `params` is not read here.
pub fn vector_field(
    variant: ModelVariant,
    state: &CompartmentState,
    params: &RateParameters,
    beta_eff: f64,
) -> Result<Vec<f64>> {
    state.validate(variant)?;
    params.validate_for(variant)?;
    if !beta_eff.is_finite() || beta_eff < 0.0 {
        return Err(Error::NonFinite {
            what: "beta_eff".into(),
            day: Some(state.day_index),
        });
    }
    let mut out = vec![0.0; variant.dimension()];
    vector_field_into(variant, &state.values, params, beta_eff, &mut out);
    Ok(out)
}

/// How the first observation is split across latent compartments when a
/// variant distinguishes them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialSplit {
    /// E₀ = `e0_ratio` · I₀ for variants with an exposed compartment.
    pub e0_ratio: f64,
    /// M₀ = `mild_fraction` · I₀ (the rest is critical) for SMCRD/SEMCRD.
    pub mild_fraction: f64,
}

impl Default for InitialSplit {
    fn default() -> Self {
        Self {
            e0_ratio: 1.0,
            mild_fraction: 0.9,
        }
    }
}

/// Builds the day-0 state from the first observed (I₀, R₀, D₀).
///
/// For variants without a death compartment the deaths are folded into the
/// removed compartment, so the state always sums to the population.
pub fn initial_state(
    variant: ModelVariant,
    first_observation: (f64, f64, f64),
    params: &RateParameters,
    split: &InitialSplit,
) -> Result<CompartmentState> {
    let (i0, r0, d0) = first_observation;
    let n = params.population;
    if !(n > 0.0) {
        return Err(Error::NonPositivePopulation(n));
    }
    for (name, v) in [("I0", i0), ("R0", r0), ("D0", d0)] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::NonFinite {
                what: name.into(),
                day: Some(0),
            });
        }
    }
    if !(0.0..=1.0).contains(&split.mild_fraction) || split.e0_ratio < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "e0_ratio {} / mild_fraction {} out of range",
            split.e0_ratio, split.mild_fraction
        )));
    }

    let e0 = if variant.has_exposed() {
        split.e0_ratio * i0
    } else {
        0.0
    };
    let s0 = n - e0 - i0 - r0 - d0;
    if s0 < 0.0 {
        return Err(Error::InfeasibleInitialState { s0 });
    }

    let mut values = vec![0.0; variant.dimension()];
    values[0] = s0;
    if variant.has_exposed() {
        values[1] = e0;
    }
    if variant.has_mild_critical() {
        let [m_idx, c_idx] = variant.infected_indices() else {
            unreachable!()
        };
        let mild = split.mild_fraction * i0;
        values[*m_idx] = mild;
        // Exact complement so the compartments always sum to i0.
        values[*c_idx] = i0 - mild;
    } else {
        values[variant.infected_indices()[0]] = i0;
    }
    match variant.death_index() {
        Some(d_idx) => {
            values[variant.recovered_index()] = r0;
            values[d_idx] = d0;
        }
        // No death compartment: the removed pool absorbs deaths.
        None => values[variant.recovered_index()] = r0 + d0,
    }
    Ok(CompartmentState::new(values, 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sird_params() -> RateParameters {
        let mut p = RateParameters::zeros(ModelVariant::Sird, 1000.0);
        p.beta_star = 0.5;
        p.delta = Some(0.1);
        p.epsilon = Some(0.05);
        p
    }

    /// Independent scalar evaluation of the SIRD right-hand side.
    fn sird_rhs_oracle(z: &[f64], beta: f64, delta: f64, eps: f64, n: f64) -> [f64; 4] {
        let (s, i) = (z[0], z[1]);
        let phi = beta * s * i / n;
        [-phi, phi - (delta + eps) * i, delta * i, eps * i]
    }

    #[test]
    fn sird_vector_field_matches_oracle() {
        let state = CompartmentState::new(vec![990.0, 10.0, 0.0, 0.0], 0);
        let d = vector_field(ModelVariant::Sird, &state, &sird_params(), 0.5).unwrap();
        let expected = sird_rhs_oracle(&state.values, 0.5, 0.1, 0.05, 1000.0);
        assert_eq!(expected, [-4.95, 3.45, 1.0, 0.5]);
        for (got, want) in d.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "got {got}, want {want}");
        }
    }

    #[test]
    fn zero_rates_zero_field() {
        for variant in ModelVariant::ALL {
            let params = RateParameters::zeros(variant, 1000.0);
            let mut values = vec![10.0; variant.dimension()];
            values[0] = 900.0;
            let state = CompartmentState::new(values, 0);
            let d = vector_field(variant, &state, &params, 0.0).unwrap();
            assert!(d.iter().all(|&x| x == 0.0), "{variant}: {d:?}");
        }
    }

    #[test]
    fn components_sum_to_zero() {
        for variant in ModelVariant::ALL {
            let mut params = RateParameters::zeros(variant, 5000.0);
            for (k, &id) in variant.active_rates().iter().enumerate() {
                params.set(id, 0.05 + 0.11 * k as f64);
            }
            let mut values: Vec<f64> = (0..variant.dimension())
                .map(|i| 30.0 + 7.0 * i as f64)
                .collect();
            values[0] = 4000.0;
            let state = CompartmentState::new(values, 0);
            let d = vector_field(variant, &state, &params, 0.4).unwrap();
            let sum: f64 = d.iter().sum();
            let scale = d.iter().fold(0.0_f64, |a, &x| a.max(x.abs())).max(1e-12);
            assert!(sum.abs() / scale < 1e-9, "{variant}: sum {sum}");
        }
    }

    #[test]
    fn zero_beta_freezes_susceptibles() {
        for variant in ModelVariant::ALL {
            let mut params = RateParameters::zeros(variant, 2000.0);
            for &id in variant.active_rates() {
                params.set(id, 0.2);
            }
            let mut values = vec![15.0; variant.dimension()];
            values[0] = 1500.0;
            let state = CompartmentState::new(values, 0);
            let d = vector_field(variant, &state, &params, 0.0).unwrap();
            assert_eq!(d[0], 0.0, "{variant}");
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let state = CompartmentState::new(vec![1.0, 2.0, 3.0], 0);
        let err = vector_field(ModelVariant::Sird, &state, &sird_params(), 0.1).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 4, got: 3, .. }));
    }

    #[test]
    fn initial_state_sird() {
        let params = sird_params();
        let z = initial_state(
            ModelVariant::Sird,
            (10.0, 0.0, 0.0),
            &params,
            &InitialSplit::default(),
        )
        .unwrap();
        assert_eq!(z.values, vec![990.0, 10.0, 0.0, 0.0]);
        assert_eq!(z.total(), 1000.0);
    }

    #[test]
    fn initial_state_semcrd_split() {
        let params = RateParameters::initial_guess(ModelVariant::Semcrd, 1000.0);
        let split = InitialSplit {
            e0_ratio: 1.0,
            mild_fraction: 0.9,
        };
        let z = initial_state(ModelVariant::Semcrd, (10.0, 2.0, 1.0), &params, &split).unwrap();
        assert_eq!(z.values, vec![977.0, 10.0, 9.0, 1.0, 2.0, 1.0]);
        assert_eq!(z.total(), 1000.0);
    }

    #[test]
    fn initial_state_empty_epidemic() {
        let params = RateParameters::initial_guess(ModelVariant::Seird, 100.0);
        let z = initial_state(
            ModelVariant::Seird,
            (0.0, 0.0, 0.0),
            &params,
            &InitialSplit::default(),
        )
        .unwrap();
        assert_eq!(z.values, vec![100.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn initial_state_infeasible() {
        let params = RateParameters::initial_guess(ModelVariant::Seird, 100.0);
        let split = InitialSplit {
            e0_ratio: 3.0,
            mild_fraction: 0.9,
        };
        let err = initial_state(ModelVariant::Seird, (40.0, 0.0, 0.0), &params, &split).unwrap_err();
        assert!(matches!(err, Error::InfeasibleInitialState { .. }));
    }

    #[test]
    fn initial_state_folds_deaths_without_death_compartment() {
        let mut params = RateParameters::zeros(ModelVariant::Sir, 1000.0);
        params.beta_star = 0.3;
        params.delta = Some(0.1);
        let z = initial_state(
            ModelVariant::Sir,
            (10.0, 5.0, 2.0),
            &params,
            &InitialSplit::default(),
        )
        .unwrap();
        assert_eq!(z.values, vec![983.0, 10.0, 7.0]);
        assert_eq!(z.total(), 1000.0);
    }

    #[test]
    fn inactive_rate_rejected() {
        let mut p = RateParameters::zeros(ModelVariant::Sir, 100.0);
        p.epsilon = Some(0.1);
        assert!(matches!(
            p.validate_for(ModelVariant::Sir),
            Err(Error::InactiveRate { .. })
        ));
    }

    #[test]
    fn variant_dimensions_and_inputs() {
        let dims: Vec<usize> = ModelVariant::ALL.iter().map(|v| v.dimension()).collect();
        assert_eq!(dims, vec![3, 4, 4, 5, 5, 6]);
        let inputs: Vec<usize> = ModelVariant::ALL
            .iter()
            .map(|v| v.effect_input_dim())
            .collect();
        assert_eq!(inputs, vec![2, 3, 3, 4, 4, 5]);
    }
}
