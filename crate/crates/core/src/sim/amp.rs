//! Bayes-AMP: matrix multiplies alternating with the scalar posterior-mean
//! denoiser plus an Onsager memory term. The effective noise and Onsager
//! coefficient come either from the theoretical state evolution with a
//! truncated denoiser, or from empirical estimates (the simulation default).

use ndarray::Array1;

use super::{IterRow, LinearInstance, RunTrace};
use crate::channel::{mmse, posterior_mean, ChannelGrid};
use crate::error::{Error, Result};
use crate::optimal::{sequence_risk, sequence_width};
use crate::prior::Prior;

#[derive(Debug, Clone, Copy)]
pub enum AmpMode {
    /// Posterior-mean denoiser clamped to `[-m, m]`, with noise levels and
    /// Onsager terms from the truncated state evolution.
    Truncated { m: f64 },
    /// `tau_t^2 = p ||r_t||^2` and `b_t = mmse(tau_{t-1}^2)/(delta tau_{t-1}^2)`.
    /// `damping` blends each denoiser output with the previous iterate
    /// (1.0 reproduces the plain calibrated iteration). Near-tangent state
    /// evolution can trap the undamped iteration in finite-sample two-cycles;
    /// 0.8 escapes them at the cost of a few extra iterations.
    Empirical { damping: f64 },
}

impl AmpMode {
    pub fn empirical() -> Self {
        AmpMode::Empirical { damping: 1.0 }
    }
}

/// Floor for the empirical noise level; below it the denoiser just snaps to
/// the nearest atom so the iteration has converged for all practical purposes.
const TAU_FLOOR: f64 = 1e-15;

struct TruncatedSchedule {
    /// tau_t for t = 0..t_max.
    taus: Vec<f64>,
    /// Onsager coefficient b_t for t >= 1 (index t-1).
    onsager: Vec<f64>,
    m: f64,
}

fn truncated_schedule(
    prior: &Prior,
    delta: f64,
    sigma: f64,
    m: f64,
    t_max: usize,
    grid: &ChannelGrid,
) -> Result<TruncatedSchedule> {
    let sig2 = sigma * sigma;
    let mut taus = Vec::with_capacity(t_max + 1);
    let mut onsager = Vec::with_capacity(t_max);
    taus.push(((sig2 + prior.second_moment()) / delta).sqrt());
    for t in 0..t_max {
        let tau = taus[t].max(TAU_FLOOR);
        let eta = |y: f64| posterior_mean(prior, tau, y).unwrap_or(0.0).clamp(-m, m);
        let risk = sequence_risk(prior, tau, grid, eta)?;
        let width = sequence_width(prior, tau, grid, eta)?;
        onsager.push(width / delta);
        taus.push(((sig2 + risk) / delta).sqrt());
    }
    Ok(TruncatedSchedule { taus, onsager, m })
}

/// Run Bayes-AMP for `t_max` iterations.
pub fn amp_run(
    instance: &LinearInstance,
    mode: AmpMode,
    t_max: usize,
    grid: &ChannelGrid,
) -> Result<RunTrace> {
    if t_max < 1 {
        return Err(Error::Config("amp needs t_max >= 1".into()));
    }
    let damping = match mode {
        AmpMode::Empirical { damping } => {
            if !(damping > 0.0 && damping <= 1.0) {
                return Err(Error::Config(format!(
                    "amp damping must be in (0, 1], got {damping}"
                )));
            }
            damping
        }
        AmpMode::Truncated { .. } => 1.0,
    };
    let start = std::time::Instant::now();
    let prior = &instance.prior;
    let delta = instance.params.delta;
    let p = instance.p;
    let n = instance.n as f64;
    let root_p = (p as f64).sqrt();

    let schedule = match mode {
        AmpMode::Truncated { m } => Some(truncated_schedule(
            prior,
            delta,
            instance.params.sigma,
            m,
            t_max,
            grid,
        )?),
        AmpMode::Empirical { .. } => None,
    };

    let mut beta = Array1::<f64>::zeros(p);
    let mut r_prev = Array1::<f64>::zeros(instance.n);
    let mut tau_prev_sq: Option<f64> = None;
    let mut rows: Vec<IterRow> = Vec::with_capacity(t_max);

    for t in 0..t_max {
        // Onsager coefficient for this step.
        let b_t = match (&schedule, t) {
            (_, 0) => 0.0,
            (Some(s), _) => s.onsager[t - 1],
            (None, _) => {
                let prev_sq = tau_prev_sq.expect("set after first iteration");
                let prev = prev_sq.sqrt().max(TAU_FLOOR);
                mmse(prior, prev, grid)? / (delta * prev_sq.max(TAU_FLOOR * TAU_FLOOR))
            }
        };
        let resid = (&instance.y - &instance.x.dot(&beta)) / n;
        let r = resid + &(&r_prev * b_t);

        let tau_hat_sq = p as f64 * r.dot(&r);
        if !tau_hat_sq.is_finite() {
            return Err(Error::Calibration(format!(
                "empirical tau^2 became non-finite at iteration {t}"
            )));
        }
        let tau_t = match &schedule {
            Some(s) => s.taus[t].max(TAU_FLOOR),
            None => tau_hat_sq.sqrt().max(TAU_FLOOR),
        };

        let v = &beta + &instance.x.t().dot(&r);
        let mut next = Array1::<f64>::zeros(p);
        for (out, &vj) in next.iter_mut().zip(v.iter()) {
            let mut e = posterior_mean(prior, tau_t, root_p * vj)?;
            if let Some(s) = &schedule {
                e = e.clamp(-s.m, s.m);
            }
            *out = e / root_p;
        }
        beta = if damping < 1.0 {
            &beta * (1.0 - damping) + &(&next * damping)
        } else {
            next
        };
        r_prev = r;
        tau_prev_sq = Some(tau_hat_sq);

        let fit = {
            let d = &instance.y - &instance.x.dot(&beta);
            d.dot(&d) / n
        };
        rows.push(IterRow {
            t,
            objective: fit,
            grad_norm: None,
            loss: super::squared_loss(&beta, &instance.beta0),
            tau_hat_sq: Some(tau_hat_sq),
            onsager: Some(b_t),
        });
    }

    let iterations = rows.len();
    Ok(RunTrace {
        rows,
        beta_hat: beta,
        iterations,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}
