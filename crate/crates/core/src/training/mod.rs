//! Loss, gradients and the optimizers that fit models to observations.

pub mod adam;
pub mod fit;
pub mod gradients;
pub mod loss;
pub mod nelder_mead;

pub use adam::{adam_step, lr_schedule, lr_schedule_with, AdamState};
pub use fit::{
    fit, fit_constant_gradient, nelder_mead_fit, train_dde, FitMethod, FitResult, TrainingConfig,
};
pub use gradients::{fit_gradients, GradientOutput};
pub use loss::trajectory_loss;
pub use nelder_mead::{nelder_mead_minimize, NelderMeadOptions, NelderMeadResult};
