//! Adam optimizer with bias correction, plus the step-decay learning-rate
//! schedule used by the trainers.

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPSILON: f64 = 1e-8;

/// First and second moment estimates for one flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    pub fn new(dim: usize) -> Self {
        Self {
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            t: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }
}

/// One Adam update of `params` in place.
///
/// Uses the standard moment decays (0.9, 0.999) and bias-corrected
/// estimates. Panics if the dimensions disagree; parameter vectors never
/// change shape mid-run.
pub fn adam_step(state: &mut AdamState, params: &mut [f64], grads: &[f64], lr: f64) {
    assert_eq!(state.dim(), params.len(), "optimizer state dimension");
    assert_eq!(params.len(), grads.len(), "gradient dimension");
    state.t += 1;
    let bc1 = 1.0 - BETA1.powi(state.t as i32);
    let bc2 = 1.0 - BETA2.powi(state.t as i32);
    for i in 0..params.len() {
        let g = grads[i];
        state.m[i] = BETA1 * state.m[i] + (1.0 - BETA1) * g;
        state.v[i] = BETA2 * state.v[i] + (1.0 - BETA2) * g * g;
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + EPSILON);
    }
}

/// The canonical schedule: the base rate decays by 0.95 every 400
/// iterations, i.e. `base * 0.95^floor(iteration / 400)`.
pub fn lr_schedule(base: f64, iteration: u32) -> f64 {
    lr_schedule_with(base, iteration, 0.95, 400)
}

/// Step decay with explicit factor and period. A zero period disables decay.
pub fn lr_schedule_with(base: f64, iteration: u32, factor: f64, every: u32) -> f64 {
    if every == 0 {
        return base;
    }
    base * factor.powi((iteration / every) as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_converges_in_200_steps() {
        // Minimize (x - 3)^2 from 0.
        let mut x = vec![0.0];
        let mut state = AdamState::new(1);
        for _ in 0..200 {
            let g = vec![2.0 * (x[0] - 3.0)];
            adam_step(&mut state, &mut x, &g, 0.1);
        }
        assert!((x[0] - 3.0).abs() < 0.05, "x = {}", x[0]);
    }

    #[test]
    fn schedule_exact_values() {
        assert_eq!(lr_schedule(1e-3, 0), 1e-3);
        assert_eq!(lr_schedule(1e-3, 399), 1e-3);
        assert_eq!(lr_schedule(1e-3, 400), 9.5e-4);
        assert_eq!(lr_schedule(1e-3, 799), 9.5e-4);
        assert_eq!(lr_schedule(1e-3, 800), 1e-3 * 0.95 * 0.95);
        assert_eq!(lr_schedule(1e-3, 4800), 1e-3 * 0.95f64.powi(12));
        assert_eq!(lr_schedule_with(1e-3, 10_000, 0.5, 0), 1e-3);
    }

    #[test]
    fn first_step_moves_by_lr() {
        // With bias correction the very first update is lr * sign(g)
        // up to the epsilon regularizer.
        let mut x = vec![1.0, -2.0];
        let mut state = AdamState::new(2);
        adam_step(&mut state, &mut x, &[0.3, -7.0], 0.01);
        assert!((x[0] - (1.0 - 0.01)).abs() < 1e-6);
        assert!((x[1] - (-2.0 + 0.01)).abs() < 1e-6);
    }

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let mut x = vec![4.2];
        let mut state = AdamState::new(1);
        for _ in 0..10 {
            adam_step(&mut state, &mut x, &[0.0], 0.5);
        }
        assert_eq!(x[0], 4.2);
    }
}
