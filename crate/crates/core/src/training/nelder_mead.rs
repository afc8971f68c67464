//! A from-scratch Nelder–Mead simplex minimizer.
//!
//! Classic coefficients (reflection 1, expansion 2, contraction 0.5,
//! shrink 0.5) and the customary initial simplex that perturbs one
//! coordinate at a time by 5 % (or by 0.00025 where the coordinate is
//! zero). Serves as the derivative-free baseline the gradient trainers are
//! compared against.

/// Stopping controls for [`nelder_mead_minimize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub max_iters: u32,
    /// Terminate when every vertex is within this (infinity-norm) distance
    /// of the best vertex.
    pub x_tolerance: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            x_tolerance: 1e-8,
        }
    }
}

/// Outcome of a simplex run.
#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: u32,
    /// True when the simplex collapsed below the tolerance rather than
    /// hitting the iteration cap.
    pub converged: bool,
    /// Best objective value after each iteration.
    pub history: Vec<f64>,
}

const REFLECTION: f64 = 1.0;
const EXPANSION: f64 = 2.0;
const CONTRACTION: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Orders non-finite values last so a NaN objective can never be adopted as
/// the incumbent best.
#[inline]
fn objective_cmp(a: f64, b: f64) -> std::cmp::Ordering {
    match (a.is_nan(), b.is_nan()) {
        (false, false) => a.partial_cmp(&b).unwrap(),
        (true, true) => std::cmp::Ordering::Equal,
        (true, false) => std::cmp::Ordering::Greater,
        (false, true) => std::cmp::Ordering::Less,
    }
}

/// Minimizes `f` from `x0`, returning the best vertex found.
pub fn nelder_mead_minimize(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    options: &NelderMeadOptions,
) -> NelderMeadResult {
    let n = x0.len();
    assert!(n > 0, "cannot optimize a zero-dimensional point");

    // Initial simplex: x0 plus one vertex per coordinate direction.
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] = if v[i] != 0.0 { 1.05 * v[i] } else { 0.00025 };
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    for _ in 0..options.max_iters {
        // Sort vertices by objective, best first.
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| objective_cmp(values[a], values[b]));
        let best = order[0];
        let second_worst = order[n - 1];
        let worst = order[n];

        // Centroid of all vertices except the worst.
        let mut centroid = vec![0.0; n];
        for (k, v) in simplex.iter().enumerate() {
            if k != worst {
                for i in 0..n {
                    centroid[i] += v[i];
                }
            }
        }
        for c in centroid.iter_mut() {
            *c /= n as f64;
        }

        let blend = |t: f64| -> Vec<f64> {
            (0..n)
                .map(|i| centroid[i] + t * (centroid[i] - simplex[worst][i]))
                .collect()
        };

        let reflected = blend(REFLECTION);
        let f_reflected = f(&reflected);

        if objective_cmp(f_reflected, values[best]).is_lt() {
            // Best point so far: try stretching further out.
            let expanded = blend(EXPANSION);
            let f_expanded = f(&expanded);
            if objective_cmp(f_expanded, f_reflected).is_lt() {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
        } else if objective_cmp(f_reflected, values[second_worst]).is_lt() {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
        } else {
            // Contract: outside if the reflection improved on the worst
            // vertex, inside otherwise.
            let (contracted, threshold) = if objective_cmp(f_reflected, values[worst]).is_lt() {
                (blend(CONTRACTION), f_reflected)
            } else {
                (blend(-CONTRACTION), values[worst])
            };
            let f_contracted = f(&contracted);
            if objective_cmp(f_contracted, threshold).is_lt() {
                simplex[worst] = contracted;
                values[worst] = f_contracted;
            } else {
                // Shrink everything toward the best vertex.
                let best_vertex = simplex[best].clone();
                for k in 0..=n {
                    if k != best {
                        for i in 0..n {
                            simplex[k][i] =
                                best_vertex[i] + SHRINK * (simplex[k][i] - best_vertex[i]);
                        }
                        values[k] = f(&simplex[k]);
                    }
                }
            }
        }
        iterations += 1;

        let best_now = (0..=n)
            .min_by(|&a, &b| objective_cmp(values[a], values[b]))
            .unwrap();
        history.push(values[best_now]);

        let spread = simplex
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[best_now])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread < options.x_tolerance {
            converged = true;
            break;
        }
    }

    let best = (0..=n)
        .min_by(|&a, &b| objective_cmp(values[a], values[b]))
        .unwrap();
    NelderMeadResult {
        x: simplex.swap_remove(best),
        fx: values[best],
        iterations,
        converged,
        history,
    }
}
