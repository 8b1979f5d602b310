//! Proximal gradient and accelerated proximal gradient for
//! `min (1/n) ||y - X b||^2 + lambda rho(b)`.

use ndarray::Array1;

use super::{IterRow, LinearInstance, RunTrace};
use crate::error::{Error, Result};
use crate::prox::ProxRule;

/// Step-size choice: a fixed value, or `0.95 / L` with `L` the smoothness
/// constant of the data-fit term estimated by power iteration.
#[derive(Debug, Clone, Copy)]
pub enum StepRule {
    Fixed(f64),
    Auto,
}

#[derive(Debug, Clone, Copy)]
pub struct StopRule {
    pub grad_norm_tol: f64,
    pub max_iter: usize,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            grad_norm_tol: 1e-10,
            max_iter: 20_000,
        }
    }
}

/// Iterations after which the extrapolation weight `k/(k+3)` switches off.
pub const ACCEL_CUTOFF: usize = 1500;

/// Smoothness constant `(2/n) ||X||_op^2` via power iteration on `X^T X`.
pub fn data_fit_smoothness(instance: &LinearInstance) -> f64 {
    let mut v = Array1::from_elem(instance.p, 1.0 / (instance.p as f64).sqrt());
    let mut lam = 0.0;
    for _ in 0..60 {
        let xv = instance.x.dot(&v);
        let mut w = instance.x.t().dot(&xv);
        let norm = w.dot(&w).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        w /= norm;
        lam = norm;
        v = w;
    }
    2.0 * lam / instance.n as f64
}

/// Run (accelerated) proximal gradient. Returns the first iterate whose
/// subgradient norm drops below tolerance, or the final iterate at the cap.
pub fn prox_grad_solve(
    instance: &LinearInstance,
    rule: &ProxRule,
    step: StepRule,
    accel: bool,
    stop: StopRule,
) -> Result<RunTrace> {
    let start = std::time::Instant::now();
    let c = match step {
        StepRule::Fixed(v) if v > 0.0 => v,
        StepRule::Fixed(v) => {
            return Err(Error::Config(format!(
                "step size must be positive, got {v}"
            )))
        }
        StepRule::Auto => {
            let l = data_fit_smoothness(instance);
            if l <= 0.0 {
                return Err(Error::Config("zero design matrix".into()));
            }
            0.95 / l
        }
    };
    let n_inv2 = 2.0 / instance.n as f64;
    let grad = |b: &Array1<f64>| -> Array1<f64> {
        let r = instance.x.dot(b) - &instance.y;
        instance.x.t().dot(&r) * n_inv2
    };
    let data_fit = |b: &Array1<f64>| -> f64 {
        let r = &instance.y - &instance.x.dot(b);
        r.dot(&r) / instance.n as f64
    };
    let objective = |b: &Array1<f64>| -> f64 {
        data_fit(b) + rule.penalty_value(b.as_slice().unwrap()).unwrap_or(0.0)
    };

    let mut beta = Array1::<f64>::zeros(instance.p);
    let mut beta_prev = beta.clone();
    let mut rows: Vec<IterRow> = Vec::new();
    let mut initial_objective: Option<f64> = None;
    let mut prev_objective = f64::INFINITY;

    for k in 1..=stop.max_iter {
        let v = if accel {
            let omega = if k <= ACCEL_CUTOFF {
                k as f64 / (k as f64 + 3.0)
            } else {
                0.0
            };
            &beta + &((&beta - &beta_prev) * omega)
        } else {
            beta.clone()
        };
        let g = grad(&v);
        let pre_prox = &v - &(&g * c);
        let next = Array1::from_vec(rule.prox_scaled(c, pre_prox.as_slice().unwrap())?);

        // Subgradient at the new iterate: the prox optimality condition turns
        // the step residual into an element of the objective's subgradient.
        let sub = grad(&next) + &(&pre_prox - &next) / c;
        let grad_norm = sub.dot(&sub).sqrt();

        let obj = objective(&next);
        let loss = super::squared_loss(&next, &instance.beta0);
        rows.push(IterRow {
            t: k,
            objective: obj,
            grad_norm: Some(grad_norm),
            loss,
            tau_hat_sq: None,
            onsager: None,
        });

        let init = *initial_objective.get_or_insert(obj);
        if obj.is_nan() || (obj > 1e3 * init.abs().max(1e-12) && obj > init) {
            return Err(Error::Solver {
                message: "proximal gradient diverged".into(),
                residual: obj,
                iterations: k,
            });
        }
        if !accel && obj > prev_objective + 1e-10 * (1.0 + prev_objective.abs()) {
            return Err(Error::Solver {
                message: format!(
                    "objective increased ({prev_objective} -> {obj}) in non-accelerated mode"
                ),
                residual: obj - prev_objective,
                iterations: k,
            });
        }
        prev_objective = obj;
        beta_prev = std::mem::replace(&mut beta, next);

        if grad_norm <= stop.grad_norm_tol {
            break;
        }
    }

    let iterations = rows.len();
    Ok(RunTrace {
        rows,
        beta_hat: beta,
        iterations,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}
