//! The optimal separable proximal operator at a given noise level: the
//! discretized problem is a weighted least-squares over non-decreasing
//! 1-Lipschitz functions (chain-bounded increments), solved exactly by a
//! dynamic program over piecewise-linear derivatives. Also: the lambda
//! calibration of the induced regularizer and the reconstruction of the
//! scalar penalty from the prox.

use rayon::prelude::*;

use crate::channel::{normal_pdf, ChannelGrid};
use crate::error::{Error, Result};
use crate::prior::Prior;
use crate::tabfn::{TabulatedFn, TabulatedMonotoneFn};

/// Continuous, non-decreasing, piecewise-linear derivative of a convex
/// value function. Knots are strictly increasing in x.
#[derive(Debug, Clone)]
struct PwlDerivative {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slope_left: f64,
    slope_right: f64,
}

impl PwlDerivative {
    fn empty() -> Self {
        PwlDerivative {
            xs: Vec::new(),
            ys: Vec::new(),
            slope_left: 0.0,
            slope_right: 0.0,
        }
    }

    fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Add the derivative of `w (x - m)^2`.
    fn add_quadratic(&mut self, w: f64, m: f64) {
        if w <= 0.0 {
            return;
        }
        if self.is_empty() {
            self.xs.push(m);
            self.ys.push(0.0);
            self.slope_left = 2.0 * w;
            self.slope_right = 2.0 * w;
            return;
        }
        for (x, y) in self.xs.iter().zip(self.ys.iter_mut()) {
            *y += 2.0 * w * (x - m);
        }
        self.slope_left += 2.0 * w;
        self.slope_right += 2.0 * w;
    }

    /// `[zL, zR]`: the (possibly flat) root interval of the derivative.
    fn root_interval(&self) -> (f64, f64) {
        let n = self.xs.len();
        let first_nonneg = self.ys.iter().position(|&y| y >= 0.0);
        match first_nonneg {
            None => {
                let z = self.xs[n - 1] - self.ys[n - 1] / self.slope_right;
                (z, z)
            }
            Some(i) => {
                if self.ys[i] > 0.0 {
                    let z = if i == 0 {
                        self.xs[0] - self.ys[0] / self.slope_left
                    } else {
                        let t = -self.ys[i - 1] / (self.ys[i] - self.ys[i - 1]);
                        self.xs[i - 1] + t * (self.xs[i] - self.xs[i - 1])
                    };
                    (z, z)
                } else {
                    // Flat run of exact zeros.
                    let mut k = i;
                    while k + 1 < n && self.ys[k + 1] == 0.0 {
                        k += 1;
                    }
                    (self.xs[i], self.xs[k])
                }
            }
        }
    }

    /// Replace the value function F by `x -> min_{s in [x - delta, x]} F(s)`:
    /// the derivative keeps its negative part, gains a flat zero gap of width
    /// `delta`, and shifts its positive part right by `delta`.
    /// Returns the recorded minimizer (midpoint of the root interval).
    fn windowed_min(&mut self, delta: f64) -> Option<f64> {
        if self.is_empty() {
            return None;
        }
        let (z_lo, z_hi) = self.root_interval();
        let mut xs = Vec::with_capacity(self.xs.len() + 2);
        let mut ys = Vec::with_capacity(self.ys.len() + 2);
        for (&x, &y) in self.xs.iter().zip(&self.ys) {
            if y < 0.0 {
                xs.push(x);
                ys.push(y);
            }
        }
        xs.push(z_lo);
        ys.push(0.0);
        xs.push(z_hi + delta);
        ys.push(0.0);
        for (&x, &y) in self.xs.iter().zip(&self.ys) {
            if y > 0.0 {
                xs.push(x + delta);
                ys.push(y);
            }
        }
        self.xs = xs;
        self.ys = ys;
        Some(0.5 * (z_lo + z_hi))
    }
}

#[derive(Debug, Clone)]
pub struct OptimalProxSolution {
    pub prox_fn: TabulatedMonotoneFn,
    /// Objective value: the discretized sequence-model risk of the rule.
    pub risk: f64,
    /// Stationarity residual of the box-constrained KKT system.
    pub kkt_residual: f64,
}

/// Per-grid-point weights `W_j` and targets `m_j` obtained by collapsing
/// atoms: the objective equals `sum_j W_j (eta_j - m_j)^2 + const`.
fn collapse_weights(prior: &Prior, tau: f64, xs: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let atoms = prior
        .atoms()
        .ok_or_else(|| Error::Config("optimal prox needs a discrete prior".into()))?;
    let step = xs[1] - xs[0];
    let mut w = vec![0.0; xs.len()];
    let mut m = vec![0.0; xs.len()];
    for (j, &x) in xs.iter().enumerate() {
        let mut wj = 0.0;
        let mut cj = 0.0;
        for a in atoms {
            let u = (x - a.location) / tau;
            let weight = a.mass * normal_pdf(u) / tau * step;
            wj += weight;
            cj += weight * a.location;
        }
        w[j] = wj;
        m[j] = if wj > 0.0 { cj / wj } else { 0.0 };
    }
    Ok((w, m))
}

fn window_points(grid: &ChannelGrid, tau: f64) -> Vec<f64> {
    let w = grid.window(tau);
    (0..w.n_points).map(|j| w.point(j)).collect()
}

/// Riemann objective `E[(eta(beta0 + tau z) - beta0)^2]` of an arbitrary
/// scalar denoiser, using the same rule as the solver.
pub fn sequence_risk(
    prior: &Prior,
    tau: f64,
    grid: &ChannelGrid,
    eta: impl Fn(f64) -> f64,
) -> Result<f64> {
    let atoms = prior
        .atoms()
        .ok_or_else(|| Error::Config("sequence risk needs a discrete prior".into()))?;
    let w = grid.window(tau);
    let xs = window_points(grid, tau);
    let step = xs[1] - xs[0];
    let mut total = 0.0;
    for &x in &xs {
        let e = eta(x);
        for a in atoms {
            let u = (x - a.location) / tau;
            let d = e - a.location;
            total += a.mass * normal_pdf(u) / tau * step * d * d;
        }
    }
    let ext = crate::channel::EdgeExtension::probe(&w, &eta);
    Ok(total + crate::channel::tail_risk(atoms, tau, &w, ext))
}

/// Exact minimizer of the discretized optimal-prox problem.
pub fn solve_optimal_prox(
    prior: &Prior,
    tau: f64,
    grid: &ChannelGrid,
) -> Result<OptimalProxSolution> {
    if !(tau > 0.0) {
        return Err(Error::Domain(format!(
            "optimal prox needs tau > 0, got {tau}"
        )));
    }
    if grid.n_points() < 2 {
        return Err(Error::Config("optimal prox grid too coarse".into()));
    }
    let xs = window_points(grid, tau);
    let step = xs[1] - xs[0];
    let (w, m) = collapse_weights(prior, tau, &xs)?;
    if w.iter().all(|&wj| wj <= 0.0) {
        return Err(Error::Solver {
            message: "all quadrature weights vanished".into(),
            residual: f64::NAN,
            iterations: 0,
        });
    }

    // Forward pass: value-function derivatives with a windowed min between
    // consecutive grid points; record each stage's minimizer for backtracking.
    let n = xs.len();
    let mut state = PwlDerivative::empty();
    let mut stage_roots: Vec<Option<f64>> = Vec::with_capacity(n);
    state.add_quadratic(w[0], m[0]);
    for j in 1..n {
        stage_roots.push(state.windowed_min(step));
        state.add_quadratic(w[j], m[j]);
    }
    let final_root = if state.is_empty() {
        unreachable!("some weight is positive")
    } else {
        let (lo, hi) = state.root_interval();
        0.5 * (lo + hi)
    };

    // Backward pass: clamp each stage minimizer into the feasible window.
    let mut eta = vec![0.0; n];
    eta[n - 1] = final_root;
    for j in (0..n - 1).rev() {
        let next = eta[j + 1];
        let z = stage_roots[j].unwrap_or(next);
        eta[j] = z.clamp(next - step, next);
    }

    let prox_fn = TabulatedMonotoneFn::new(xs[0], step, eta)?;
    let risk = sequence_risk(prior, tau, grid, |x| prox_fn.eval(x))?;
    let kkt_residual = kkt_residual(&w, &m, prox_fn.values(), step);
    Ok(OptimalProxSolution {
        prox_fn,
        risk,
        kkt_residual,
    })
}

/// Box-KKT stationarity residual for the increment parametrization:
/// suffix gradient sums must vanish on interior increments and have the
/// right sign on active bounds; the free offset needs a zero total gradient.
fn kkt_residual(w: &[f64], m: &[f64], eta: &[f64], step: f64) -> f64 {
    let n = eta.len();
    let g: Vec<f64> = (0..n).map(|j| 2.0 * w[j] * (eta[j] - m[j])).collect();
    let mut residual: f64 = g.iter().sum::<f64>().abs();
    let mut suffix = 0.0;
    let bound_tol = 1e-9 * step;
    for k in (1..n).rev() {
        suffix += g[k];
        let d = eta[k] - eta[k - 1];
        let r = if d <= bound_tol {
            (-suffix).max(0.0)
        } else if d >= step - bound_tol {
            suffix.max(0.0)
        } else {
            suffix.abs()
        };
        residual = residual.max(r);
    }
    residual
}

/// Scale against which KKT residuals are judged: total quadrature weight
/// times the window width.
pub fn kkt_scale(prior: &Prior, tau: f64, grid: &ChannelGrid) -> f64 {
    let xs = window_points(grid, tau);
    match collapse_weights(prior, tau, &xs) {
        Ok((w, _)) => w.iter().sum::<f64>() * (xs[xs.len() - 1] - xs[0]),
        Err(_) => 1.0,
    }
}

/// The lambda calibration attached to a solved prox rule.
#[derive(Debug, Clone, Copy)]
pub struct PenaltyCalibration {
    pub lambda: f64,
    pub width: f64,
    pub risk: f64,
    pub tau: f64,
}

/// Width `(1/tau) E[z eta(beta0 + tau z)]` by the solver's Riemann rule.
pub fn sequence_width(
    prior: &Prior,
    tau: f64,
    grid: &ChannelGrid,
    eta: impl Fn(f64) -> f64,
) -> Result<f64> {
    let w = grid.window(tau);
    let xs = window_points(grid, tau);
    let step = xs[1] - xs[0];
    match prior.atoms() {
        Some(atoms) => {
            let mut total = 0.0;
            for &x in &xs {
                let e = eta(x);
                for a in atoms {
                    let u = (x - a.location) / tau;
                    total += a.mass * normal_pdf(u) / tau * step * (u / tau) * e;
                }
            }
            let ext = crate::channel::EdgeExtension::probe(&w, &eta);
            Ok(total + crate::channel::tail_width(atoms, tau, &w, ext))
        }
        None => {
            // Gaussian prior: E[z | y] = y tau / (s2 + tau^2), so the width is
            // E[y eta(y)] / (s2 + tau^2) over y ~ N(0, s2 + tau^2).
            let s2 = prior.second_moment();
            let v = s2 + tau * tau;
            let sd = v.sqrt();
            let mut total = 0.0;
            for &x in &xs {
                total += normal_pdf(x / sd) / sd * step * x * eta(x);
            }
            // Single-bump tail terms at the effective scale sd.
            let ext = crate::channel::EdgeExtension::probe(&w, &eta);
            let u0 = w.y_max / sd;
            total += sd
                * (ext.eta_hi * normal_pdf(u0) + ext.slope_hi * sd * crate::channel::normal_sf(u0));
            let w0 = -w.y_min / sd;
            total += sd
                * (-ext.eta_lo * normal_pdf(w0)
                    + ext.slope_lo * sd * crate::channel::normal_sf(w0));
            Ok(total / v)
        }
    }
}

/// `lambda = (1 - width/delta)^{-1} / 2`; fails when the width reaches
/// `delta` (the bounded-width condition breaks at this tau).
pub fn compute_lambda(
    prox_fn: &TabulatedMonotoneFn,
    prior: &Prior,
    tau: f64,
    delta: f64,
    grid: &ChannelGrid,
) -> Result<PenaltyCalibration> {
    if !(tau > 0.0 && delta > 0.0) {
        return Err(Error::Domain(
            "compute_lambda needs positive tau and delta".into(),
        ));
    }
    let width = sequence_width(prior, tau, grid, |x| prox_fn.eval(x))?;
    if width >= delta {
        return Err(Error::Calibration(format!(
            "width {width} >= delta {delta}: no finite lambda at tau {tau}"
        )));
    }
    let lambda = 0.5 / (1.0 - width / delta);
    let risk = match prior.atoms() {
        Some(_) => sequence_risk(prior, tau, grid, |x| prox_fn.eval(x))?,
        None => {
            let s2 = prior.second_moment();
            let v = s2 + tau * tau;
            let sd = v.sqrt();
            // E[(eta(y) - beta0)^2] = E[(eta(y) - E[beta0|y])^2] + mmse.
            let xs = window_points(grid, tau);
            let step = xs[1] - xs[0];
            let shrink = s2 / v;
            let mut total = 0.0;
            for &x in &xs {
                let d = prox_fn.eval(x) - shrink * x;
                total += normal_pdf(x / sd) / sd * step * d * d;
            }
            total + s2 * tau * tau / v
        }
    };
    Ok(PenaltyCalibration {
        lambda,
        width,
        risk,
        tau,
    })
}

/// Reconstruct the scalar penalty from its prox: `lambda rho'(eta(y)) =
/// y - eta(y)` integrated against `d eta`, then shifted to have minimum 0.
/// Flat stretches of the prox collapse to single penalty knots.
pub fn reconstruct_penalty(prox_fn: &TabulatedMonotoneFn, lambda: f64) -> Result<TabulatedFn> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!(
            "reconstruct needs lambda > 0, got {lambda}"
        )));
    }
    let values = prox_fn.values();
    let n = values.len();
    // Group grid points whose prox values coincide (flat runs).
    let run_tol = 1e-13 * (values[n - 1] - values[0]).abs().max(1.0);
    struct Run {
        s: f64,
        g_left: f64,
        g_right: f64,
    }
    let mut runs: Vec<Run> = Vec::new();
    for (j, &s) in values.iter().enumerate() {
        let g = (prox_fn.x(j) - s) / lambda;
        match runs.last_mut() {
            Some(run) if (s - run.s).abs() <= run_tol => run.g_right = g,
            _ => runs.push(Run {
                s,
                g_left: g,
                g_right: g,
            }),
        }
    }
    if runs.len() < 2 {
        return Err(Error::Config(
            "prox is constant: penalty reduces to a single point".into(),
        ));
    }
    let mut s_knots = Vec::with_capacity(runs.len());
    let mut rho = Vec::with_capacity(runs.len());
    let mut acc = 0.0;
    s_knots.push(runs[0].s);
    rho.push(0.0);
    for i in 1..runs.len() {
        let ds = runs[i].s - runs[i - 1].s;
        acc += 0.5 * ds * (runs[i - 1].g_right + runs[i].g_left);
        s_knots.push(runs[i].s);
        rho.push(acc);
    }
    let min = rho.iter().cloned().fold(f64::INFINITY, f64::min);
    for v in rho.iter_mut() {
        *v -= min;
    }
    TabulatedFn::new(s_knots, rho)
}

#[derive(Debug, Clone, Copy)]
pub struct RiskPoint {
    pub tau: f64,
    pub risk: f64,
    /// Width of the optimal rule at this tau (independent of delta).
    pub width: f64,
}

/// `R_opt(tau)` over a tau grid; solves run in parallel, results are ordered
/// by tau index. Solver failures are annotated with the offending tau.
pub fn r_opt_curve(prior: &Prior, taus: &[f64], grid: &ChannelGrid) -> Result<Vec<RiskPoint>> {
    taus.par_iter()
        .map(|&tau| {
            let sol = solve_optimal_prox(prior, tau, grid).map_err(|e| match e {
                Error::Solver {
                    message,
                    residual,
                    iterations,
                } => Error::Solver {
                    message: format!("tau {tau}: {message}"),
                    residual,
                    iterations,
                },
                other => other,
            })?;
            let width = sequence_width(prior, tau, grid, |x| sol.prox_fn.eval(x))?;
            Ok(RiskPoint {
                tau,
                risk: sol.risk,
                width,
            })
        })
        .collect()
}
