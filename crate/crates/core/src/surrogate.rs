//! Binary logistic regression used as a local surrogate model.
//!
//! The objective is the mean negative log-likelihood plus `l2 / 2 * |w|^2`
//! (the bias is not penalised). It is minimised by full-batch gradient
//! descent from zero, with a Barzilai-Borwein trial step and Armijo
//! backtracking, so every accepted iterate lowers the loss.

use serde::{Deserialize, Serialize};

use crate::error::{ContractError, FitError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub l2: f64,
    pub max_iter: usize,
    /// Convergence threshold on the gradient's max-norm.
    pub tol: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            l2: 1e-4,
            max_iter: 500,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub converged: bool,
    pub iterations: usize,
    pub final_loss: f64,
    /// Loss after every accepted step, starting with the loss at zero weights.
    pub loss_trace: Vec<f64>,
}

impl LogisticModel {
    /// Probability of the positive class, `sigmoid(w.x + b)`, kept strictly inside (0, 1).
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64, ContractError> {
        if x.len() != self.weights.len() {
            return Err(ContractError::Dimension {
                expected: self.weights.len(),
                actual: x.len(),
            });
        }
        Ok(sigmoid(self.margin(x)))
    }

    pub fn margin(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }
}

const MAX_PROBABILITY: f64 = 1.0 - f64::EPSILON / 2.0;

pub fn sigmoid(z: f64) -> f64 {
    let p = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    p.clamp(f64::MIN_POSITIVE, MAX_PROBABILITY)
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Loss and gradient of the regularised objective at `(weights, bias)`.
pub fn objective(
    features: &[&[f64]],
    labels: &[bool],
    weights: &[f64],
    bias: f64,
    l2: f64,
) -> (f64, Vec<f64>, f64) {
    let n = features.len() as f64;
    let mut loss = 0.0;
    let mut grad_w = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    for (x, &y) in features.iter().zip(labels) {
        let z = dot(weights, x) + bias;
        let target = if y { 1.0 } else { 0.0 };
        loss += softplus(z) - target * z;
        let residual = logistic(z) - target;
        for (g, &xi) in grad_w.iter_mut().zip(x.iter()) {
            *g += residual * xi;
        }
        grad_b += residual;
    }
    loss /= n;
    grad_b /= n;
    for (g, &w) in grad_w.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
    }
    loss += 0.5 * l2 * dot(weights, weights);
    (loss, grad_w, grad_b)
}

/// Unclamped logistic function for gradient computation.
fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-20;

/// Fits a logistic regression from zero initial weights.
pub fn fit_logistic(
    features: &[&[f64]],
    labels: &[bool],
    config: &LogisticConfig,
) -> Result<LogisticModel, FitError> {
    if features.is_empty() || features.len() != labels.len() {
        return Err(FitError::Empty);
    }
    let dim = features[0].len();
    if features.iter().any(|x| x.len() != dim) {
        return Err(FitError::Ragged);
    }
    if labels.iter().all(|&y| y) || labels.iter().all(|&y| !y) {
        return Err(FitError::SingleLabel);
    }

    let mut weights = vec![0.0; dim];
    let mut bias = 0.0;
    let (mut loss, mut grad_w, mut grad_b) = objective(features, labels, &weights, bias, config.l2);
    if !loss.is_finite() {
        return Err(FitError::NonFinite { iteration: 0 });
    }
    let mut trace = vec![loss];

    // 1/L for the logistic part: the Hessian is bounded by max|x|^2 / 4.
    let max_sq = features.iter().map(|x| dot(x, x) + 1.0).fold(0.0, f64::max);
    let mut step = 1.0 / (0.25 * max_sq + config.l2);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iter {
        let grad_inf = grad_w.iter().fold(grad_b.abs(), |m, g| m.max(g.abs()));
        if grad_inf <= config.tol {
            converged = true;
            break;
        }
        let grad_sq = dot(&grad_w, &grad_w) + grad_b * grad_b;

        let mut t = step;
        let accepted = loop {
            let trial_w: Vec<f64> = weights
                .iter()
                .zip(&grad_w)
                .map(|(w, g)| w - t * g)
                .collect();
            let trial_b = bias - t * grad_b;
            let (trial_loss, trial_gw, trial_gb) =
                objective(features, labels, &trial_w, trial_b, config.l2);
            if trial_loss.is_finite() && trial_loss <= loss - ARMIJO * t * grad_sq {
                break Some((trial_w, trial_b, trial_loss, trial_gw, trial_gb));
            }
            t *= 0.5;
            if t < MIN_STEP {
                break None;
            }
        };
        let Some((new_w, new_b, new_loss, new_gw, new_gb)) = accepted else {
            break;
        };
        iterations += 1;

        // Barzilai-Borwein trial step for the next iteration.
        let mut ss = (new_b - bias).powi(2);
        let mut sy = (new_b - bias) * (new_gb - grad_b);
        for i in 0..dim {
            let s = new_w[i] - weights[i];
            ss += s * s;
            sy += s * (new_gw[i] - grad_w[i]);
        }
        step = if sy > 0.0 {
            (ss / sy).clamp(1e-10, 1e10)
        } else {
            t * 2.0
        };

        weights = new_w;
        bias = new_b;
        loss = new_loss;
        grad_w = new_gw;
        grad_b = new_gb;
        trace.push(loss);
    }
    if !converged {
        let grad_inf = grad_w.iter().fold(grad_b.abs(), |m, g| m.max(g.abs()));
        converged = grad_inf <= config.tol;
    }

    Ok(LogisticModel {
        weights,
        bias,
        converged,
        iterations,
        final_loss: loss,
        loss_trace: trace,
    })
}
