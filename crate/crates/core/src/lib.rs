//! Compartmental epidemic models fitted to daily case counts.
//!
//! Six model variants (SIR through SEMCRD) share one flow-based vector
//! field, one fixed-step integrator (Euler or RK4) and one log-count
//! trajectory loss. Fitting either optimizes the constant epidemiological
//! rates directly, or additionally trains a small neural "effect network"
//! that modulates the infection rate from the current compartment mix —
//! with exact gradients obtained by reverse accumulation through the
//! unrolled Euler integration rather than by finite differences.
//!
//! The crate deliberately avoids any threading or hash-based iteration in
//! the numeric paths: identical inputs produce bit-identical trajectories,
//! losses and fitted parameters.

pub mod compartments;
pub mod data;
pub mod effect_net;
pub mod error;
pub mod integrator;
pub mod metrics;
pub mod training;

pub use compartments::{
    initial_state, vector_field, CompartmentState, Flow, InitialSplit, ModelVariant,
    RateId, RateParameters,
};
pub use data::{
    load_case_series, load_region_config, write_case_series, CaseSeries, DailyRecord,
    ObservedSeries, RegionConfig,
};
pub use effect_net::{effect_input, DenseLayer, EffectNetwork, ForwardCache, NetworkGradients};
pub use error::{Error, Result};
pub use integrator::{integrate, IntegratorConfig, IntegratorScheme};
pub use metrics::{
    evaluate, evaluate_on_holdout, mse_ten_thousand, pearson, predict_series, ChannelMetrics,
    EvaluationMetrics,
};
pub use training::{
    adam_step, fit, fit_constant_gradient, fit_gradients, lr_schedule, lr_schedule_with,
    nelder_mead_fit, nelder_mead_minimize, train_dde, trajectory_loss, AdamState, FitMethod,
    FitResult, GradientOutput, NelderMeadOptions, NelderMeadResult, TrainingConfig,
};
