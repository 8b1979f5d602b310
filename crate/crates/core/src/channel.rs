//! The scalar Gaussian channel `y = beta0 + tau * z` for a signal prior:
//! posterior mean, MMSE, mutual information, the replica-symmetric
//! potential, and a log-concavity certificate for the noisy density.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::prior::{Prior, PriorKind};

pub const SQRT_2PI: f64 = 2.5066282746310002;

pub fn normal_pdf(u: f64) -> f64 {
    (-0.5 * u * u).exp() / SQRT_2PI
}

pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Upper tail probability `P(Z > z)`.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(z / std::f64::consts::SQRT_2)
}

/// Moments of the standard normal restricted to `(z, inf)`:
/// `q = P(Z > z)`, `m1 = E[(Z - z)+]`, `m2 = E[(Z - z)^2 1{Z > z}]`.
pub(crate) struct TailMoments {
    pub q: f64,
    pub m1: f64,
    pub m2: f64,
}

pub(crate) fn tail_moments(z: f64) -> TailMoments {
    let q = normal_sf(z);
    let pdf = normal_pdf(z);
    TailMoments {
        q,
        m1: pdf - z * q,
        m2: (1.0 + z * z) * q - z * pdf,
    }
}

/// Linear extension of the integrand outside the window: the scalar function
/// is `value + slope * (y - edge)` beyond each edge.
#[derive(Debug, Clone, Copy)]
pub(crate) struct EdgeExtension {
    pub eta_lo: f64,
    pub eta_hi: f64,
    pub slope_lo: f64,
    pub slope_hi: f64,
}

impl EdgeExtension {
    /// Probe a scalar function at the window edges; slopes come from one-step
    /// finite differences clamped into [0, 1].
    pub fn probe(w: &Window, eta: impl Fn(f64) -> f64) -> Self {
        let h = w.step();
        let eta_lo = eta(w.y_min);
        let eta_hi = eta(w.y_max);
        EdgeExtension {
            eta_lo,
            eta_hi,
            slope_lo: ((eta(w.y_min + h) - eta_lo) / h).clamp(0.0, 1.0),
            slope_hi: ((eta_hi - eta(w.y_max - h)) / h).clamp(0.0, 1.0),
        }
    }
}

/// Mass the window Riemann rule misses in `E[(eta(b + tau Z) - b)^2]`,
/// integrating the linear extension over both tails for each atom.
pub(crate) fn tail_risk(
    atoms: &[crate::prior::Atom],
    tau: f64,
    w: &Window,
    ext: EdgeExtension,
) -> f64 {
    let mut total = 0.0;
    for a in atoms {
        // Upper tail: u > (y_max - b)/tau, eta = eta_hi + s_hi tau (u - u0).
        let u0 = (w.y_max - a.location) / tau;
        let t = tail_moments(u0);
        let av = ext.eta_hi - a.location;
        let c = ext.slope_hi * tau;
        total += a.mass * (av * av * t.q + 2.0 * av * c * t.m1 + c * c * t.m2);
        // Lower tail, reflected.
        let w0 = (a.location - w.y_min) / tau;
        let t = tail_moments(w0);
        let av = ext.eta_lo - a.location;
        let c = -ext.slope_lo * tau;
        total += a.mass * (av * av * t.q + 2.0 * av * c * t.m1 + c * c * t.m2);
    }
    total
}

/// Same for the width integrand `(1/tau) E[Z eta(b + tau Z)]`.
pub(crate) fn tail_width(
    atoms: &[crate::prior::Atom],
    tau: f64,
    w: &Window,
    ext: EdgeExtension,
) -> f64 {
    let mut total = 0.0;
    for a in atoms {
        let u0 = (w.y_max - a.location) / tau;
        total += a.mass * (ext.eta_hi * normal_pdf(u0) + ext.slope_hi * tau * normal_sf(u0));
        let w0 = (a.location - w.y_min) / tau;
        total += a.mass * (-ext.eta_lo * normal_pdf(w0) + ext.slope_lo * tau * normal_sf(w0));
    }
    total / tau
}

/// Tabulation choices for channel quantities.
#[derive(Debug, Clone, Copy)]
pub struct GridConfig {
    /// Intervals of the y-window Riemann rule (the window has
    /// `n_intervals + 1` sample points).
    pub n_intervals: usize,
    /// Mass cut from each side when sizing windows.
    pub mass_tail: f64,
    /// Number of log-spaced tau values.
    pub n_taus: usize,
    /// Smallest tabulated tau.
    pub tau_floor: f64,
    /// Largest tabulated tau.
    pub tau_cap: f64,
}

impl GridConfig {
    /// Defaults sized so that every fixed point `tau^2 <= (sigma^2 + s2)/delta`
    /// lies well inside the tabulated range.
    pub fn for_problem(prior: &Prior, delta: f64, sigma: f64) -> Self {
        let s2 = prior.second_moment();
        let cap_sq = (10.0 * (sigma * sigma + s2) / delta).max(1.0);
        GridConfig {
            n_intervals: 1000,
            mass_tail: 1e-3,
            n_taus: 2000,
            tau_floor: 1e-4,
            tau_cap: cap_sq.sqrt(),
        }
    }

    pub fn with_intervals(mut self, n: usize) -> Self {
        self.n_intervals = n;
        self
    }
}

/// A y-window `[y_min, y_max]` sampled at `n_points` uniform points.
#[derive(Debug, Clone, Copy)]
pub struct Window {
    pub y_min: f64,
    pub y_max: f64,
    pub n_points: usize,
}

impl Window {
    pub fn step(&self) -> f64 {
        (self.y_max - self.y_min) / (self.n_points - 1) as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        self.y_min + j as f64 * self.step()
    }
}

/// Log-spaced tau grid plus the window rule shared by all tabulations.
#[derive(Debug, Clone)]
pub struct ChannelGrid {
    taus: Vec<f64>,
    support_lo: f64,
    support_hi: f64,
    n_intervals: usize,
    mass_tail: f64,
}

impl ChannelGrid {
    pub fn new(prior: &Prior, cfg: &GridConfig) -> Result<Self> {
        if cfg.n_intervals < 1 {
            return Err(Error::Config(
                "channel grid needs at least 2 points per window".into(),
            ));
        }
        if !(cfg.tau_floor > 0.0 && cfg.tau_cap > cfg.tau_floor) {
            return Err(Error::Config(format!(
                "bad tau range [{}, {}]",
                cfg.tau_floor, cfg.tau_cap
            )));
        }
        if cfg.n_taus < 2 {
            return Err(Error::Config("tau grid needs at least 2 values".into()));
        }
        let log_lo = cfg.tau_floor.ln();
        let log_hi = cfg.tau_cap.ln();
        let taus: Vec<f64> = (0..cfg.n_taus)
            .map(|k| {
                let t = k as f64 / (cfg.n_taus - 1) as f64;
                (log_lo + t * (log_hi - log_lo)).exp()
            })
            .collect();
        let (support_lo, support_hi) = prior.support_bounds(cfg.mass_tail);
        Ok(ChannelGrid {
            taus,
            support_lo,
            support_hi,
            n_intervals: cfg.n_intervals,
            mass_tail: cfg.mass_tail,
        })
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn n_points(&self) -> usize {
        self.n_intervals + 1
    }

    /// The window for noise level `tau`, covering all but the `mass_tail`
    /// quantiles of the convolved law on each side.
    pub fn window(&self, tau: f64) -> Window {
        let z_lo = normal_quantile(self.mass_tail);
        let z_hi = normal_quantile(1.0 - self.mass_tail);
        Window {
            y_min: self.support_lo + tau * z_lo,
            y_max: self.support_hi + tau * z_hi,
            n_points: self.n_points(),
        }
    }
}

/// Posterior mean `E[beta0 | beta0 + tau z = y]`.
///
/// Discrete priors are evaluated in log-space with max-subtraction, so the
/// value degrades gracefully to the nearest-atom limit at extreme `y`
/// instead of hitting 0/0.
pub fn posterior_mean(prior: &Prior, tau: f64, y: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::Domain(format!(
            "posterior mean needs tau > 0, got {tau}"
        )));
    }
    match prior.kind() {
        PriorKind::Gaussian { variance } => Ok(variance * y / (variance + tau * tau)),
        PriorKind::Discrete(atoms) => {
            let mut best = f64::NEG_INFINITY;
            let logw: Vec<f64> = atoms
                .iter()
                .map(|a| {
                    let u = (y - a.location) / tau;
                    let lw = a.mass.ln() - 0.5 * u * u;
                    if lw > best {
                        best = lw;
                    }
                    lw
                })
                .collect();
            let mut num = 0.0;
            let mut den = 0.0;
            for (a, lw) in atoms.iter().zip(&logw) {
                let w = (lw - best).exp();
                num += a.location * w;
                den += w;
            }
            Ok(num / den)
        }
    }
}

/// Log density of `y = beta0 + tau z` (log-sum-exp over atoms).
pub fn log_noisy_density(prior: &Prior, tau: f64, y: f64) -> f64 {
    match prior.kind() {
        PriorKind::Gaussian { variance } => {
            let v = variance + tau * tau;
            -0.5 * y * y / v - 0.5 * (v.ln() + SQRT_2PI.ln() * 2.0)
        }
        PriorKind::Discrete(atoms) => {
            let mut best = f64::NEG_INFINITY;
            let terms: Vec<f64> = atoms
                .iter()
                .map(|a| {
                    let u = (y - a.location) / tau;
                    let lw = a.mass.ln() - 0.5 * u * u;
                    if lw > best {
                        best = lw;
                    }
                    lw
                })
                .collect();
            let sum: f64 = terms.iter().map(|lw| (lw - best).exp()).sum();
            best + sum.ln() - tau.ln() - SQRT_2PI.ln()
        }
    }
}

/// MMSE of the scalar channel at noise `tau`.
///
/// Discrete priors integrate `E[(eta(y) - b)^2]` with the window Riemann
/// rule; the Gaussian prior has the closed form `s2 tau^2 / (s2 + tau^2)`.
pub fn mmse(prior: &Prior, tau: f64, grid: &ChannelGrid) -> Result<f64> {
    if tau < 0.0 {
        return Err(Error::Domain(format!("mmse needs tau >= 0, got {tau}")));
    }
    if tau == 0.0 {
        return Ok(0.0);
    }
    if grid.n_points() < 2 {
        return Err(Error::Config("mmse grid too coarse".into()));
    }
    match prior.kind() {
        PriorKind::Gaussian { variance } => {
            let t2 = tau * tau;
            Ok(variance * t2 / (variance + t2))
        }
        PriorKind::Discrete(atoms) => {
            if atoms.len() == 1 {
                return Ok(0.0);
            }
            let w = grid.window(tau);
            let step = w.step();
            let mut total = 0.0;
            for j in 0..w.n_points {
                let y = w.point(j);
                let eta = posterior_mean(prior, tau, y)?;
                for a in atoms {
                    let u = (y - a.location) / tau;
                    let weight = a.mass * normal_pdf(u) / tau * step;
                    let d = eta - a.location;
                    total += weight * d * d;
                }
            }
            // Window tails, integrated against the linearly extended estimator.
            let ext =
                EdgeExtension::probe(&w, |y| posterior_mean(prior, tau, y).unwrap_or_default());
            total += tail_risk(atoms, tau, &w, ext);
            // Estimator risk cannot exceed the constant-mean benchmark.
            Ok(total.min(prior.variance()))
        }
    }
}

/// Mutual information and MMSE tabulated on the tau grid.
///
/// `i(tau^2)` integrates `d i / d tau^{-2} = mmse / 2` by the trapezoid rule
/// downward from the largest tau, anchored there with the Gaussian-tail
/// correction `log(1 + Var / tau_max^2) / 2`.
#[derive(Debug, Clone)]
pub struct ChannelCurve {
    grid: ChannelGrid,
    mmse: Vec<f64>,
    mi: Vec<f64>,
}

impl ChannelCurve {
    pub fn build(prior: &Prior, grid: ChannelGrid) -> Result<Self> {
        let taus = grid.taus().to_vec();
        let n = taus.len();
        let mut mm = Vec::with_capacity(n);
        for &t in &taus {
            mm.push(mmse(prior, t, &grid)?);
        }
        let mut mi = vec![0.0; n];
        let var = prior.variance();
        let t_max = taus[n - 1];
        mi[n - 1] = 0.5 * (1.0 + var / (t_max * t_max)).ln();
        for k in (0..n - 1).rev() {
            let u_hi = 1.0 / (taus[k] * taus[k]);
            let u_lo = 1.0 / (taus[k + 1] * taus[k + 1]);
            mi[k] = mi[k + 1] + 0.25 * (u_hi - u_lo) * (mm[k] + mm[k + 1]);
        }
        Ok(ChannelCurve { grid, mmse: mm, mi })
    }

    pub fn grid(&self) -> &ChannelGrid {
        &self.grid
    }

    pub fn taus(&self) -> &[f64] {
        self.grid.taus()
    }

    pub fn mmse_values(&self) -> &[f64] {
        &self.mmse
    }

    pub fn mi_values(&self) -> &[f64] {
        &self.mi
    }

    fn bracket(&self, tau: f64) -> Result<usize> {
        let taus = self.grid.taus();
        if tau < taus[0] || tau > taus[taus.len() - 1] {
            return Err(Error::Range(format!(
                "tau {tau} outside tabulated range [{}, {}]",
                taus[0],
                taus[taus.len() - 1]
            )));
        }
        Ok(taus.partition_point(|&t| t < tau).min(taus.len() - 1))
    }

    /// `i(tau^2)` for any tau in the grid range, extending the trapezoid rule
    /// from the nearest grid point (so grid points reproduce table values).
    pub fn mutual_info(&self, prior: &Prior, tau: f64) -> Result<f64> {
        let k = self.bracket(tau)?;
        let taus = self.grid.taus();
        let anchor = taus[k];
        let u = 1.0 / (tau * tau);
        let u_anchor = 1.0 / (anchor * anchor);
        let m = mmse(prior, tau, &self.grid)?;
        Ok(self.mi[k] + 0.25 * (u - u_anchor) * (m + self.mmse[k]))
    }

    pub fn mmse_at(&self, prior: &Prior, tau: f64) -> Result<f64> {
        mmse(prior, tau, &self.grid)
    }

    /// RS potential `phi(tau^2; delta, sigma)`.
    pub fn potential(&self, prior: &Prior, delta: f64, sigma: f64, tau: f64) -> Result<f64> {
        if !(delta > 0.0 && sigma > 0.0 && tau > 0.0) {
            return Err(Error::Domain(
                "potential needs positive delta, sigma, tau".into(),
            ));
        }
        let s2 = sigma * sigma;
        let t2 = tau * tau;
        Ok(s2 / (2.0 * t2) - 0.5 * delta * (s2 / t2).ln() + self.mutual_info(prior, tau)?)
    }

    /// Potential with the `-(delta/2) log sigma^2` constant dropped: the same
    /// argmin for sigma > 0, and still well-defined at sigma = 0.
    pub fn potential_shifted(
        &self,
        prior: &Prior,
        delta: f64,
        sigma: f64,
        tau: f64,
    ) -> Result<f64> {
        let s2 = sigma * sigma;
        let t2 = tau * tau;
        Ok(s2 / (2.0 * t2) + 0.5 * delta * t2.ln() + self.mutual_info(prior, tau)?)
    }
}

/// Verdict of the log-concavity check for `pi * N(0, tau^2)`.
#[derive(Debug, Clone, Copy)]
pub struct LogConcavity {
    pub log_concave: bool,
    pub max_second_derivative: f64,
}

/// Checks `(log p_Y)'' <= 0` on the window by central differences.
/// The tolerance scales with `1/tau^2`, the curvature of the Gaussian factor.
pub fn logconcavity_certificate(
    prior: &Prior,
    tau: f64,
    grid: &ChannelGrid,
) -> Result<LogConcavity> {
    if !(tau > 0.0) {
        return Err(Error::Domain(format!(
            "log-concavity certificate needs tau > 0, got {tau}"
        )));
    }
    if let PriorKind::Gaussian { variance } = prior.kind() {
        return Ok(LogConcavity {
            log_concave: true,
            max_second_derivative: -1.0 / (variance + tau * tau),
        });
    }
    let w = grid.window(tau);
    let h = w.step();
    let logs: Vec<f64> = (0..w.n_points)
        .map(|j| log_noisy_density(prior, tau, w.point(j)))
        .collect();
    let mut max_dd = f64::NEG_INFINITY;
    for j in 1..w.n_points - 1 {
        let dd = (logs[j + 1] - 2.0 * logs[j] + logs[j - 1]) / (h * h);
        if dd > max_dd {
            max_dd = dd;
        }
    }
    let tol = 1e-8 / (tau * tau);
    Ok(LogConcavity {
        log_concave: max_dd <= tol,
        max_second_derivative: max_dd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_for(prior: &Prior, cap: f64) -> ChannelGrid {
        let cfg = GridConfig {
            n_intervals: 1000,
            mass_tail: 1e-3,
            n_taus: 200,
            tau_floor: 1e-4,
            tau_cap: cap,
        };
        ChannelGrid::new(prior, &cfg).unwrap()
    }

    #[test]
    fn posterior_mean_point_mass_is_constant() {
        let p = Prior::point_mass(0.7);
        for y in [-5.0, 0.0, 3.0] {
            assert_eq!(posterior_mean(&p, 1.0, y).unwrap(), 0.7);
        }
    }

    #[test]
    fn posterior_mean_gaussian_is_linear_shrinkage() {
        let p = Prior::gaussian(1.0).unwrap();
        assert!((posterior_mean(&p, 1.0, 2.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn posterior_mean_two_atoms_is_tanh() {
        // Independent route: eta(y) = tanh(y / tau^2) for the +/-1 prior.
        let p = Prior::from_atoms(&[(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        let got = posterior_mean(&p, 0.5, 0.3).unwrap();
        let oracle = (0.3f64 / 0.25).tanh();
        assert!((got - oracle).abs() < 1e-12, "got {got}, oracle {oracle}");
        assert!((got - 0.83365).abs() < 1e-5);
    }

    #[test]
    fn posterior_mean_monotone_and_bounded() {
        let p = Prior::from_atoms(&[(0.0, 0.7), (0.2, 0.15), (1.0, 0.15)]).unwrap();
        let mut last = f64::NEG_INFINITY;
        for k in 0..400 {
            let y = -20.0 + k as f64 * 0.1;
            let e = posterior_mean(&p, 0.3, y).unwrap();
            assert!(e >= last - 1e-12);
            assert!((0.0..=1.0).contains(&e));
            last = e;
        }
        // Extreme inputs clamp to the nearest atom.
        assert!((posterior_mean(&p, 0.3, 1e6).unwrap() - 1.0).abs() < 1e-12);
        assert!(posterior_mean(&p, 0.3, -1e6).unwrap().abs() < 1e-12);
        assert!(posterior_mean(&p, 0.0, 1.0).is_err());
    }

    #[test]
    fn mmse_trivial_and_gaussian() {
        let pm = Prior::point_mass(2.0);
        let g = grid_for(&pm, 4.0);
        assert_eq!(mmse(&pm, 0.7, &g).unwrap(), 0.0);
        assert_eq!(mmse(&pm, 0.0, &g).unwrap(), 0.0);

        let gp = Prior::gaussian(1.5).unwrap();
        let gg = grid_for(&gp, 4.0);
        for t in [0.1, 0.9, 2.3] {
            let want = 1.5 * t * t / (1.5 + t * t);
            assert!((mmse(&gp, t, &gg).unwrap() - want).abs() < 1e-14);
        }
    }

    #[test]
    fn mmse_monotone_in_tau_and_bounded_by_variance() {
        let p = Prior::from_atoms(&[(-1.0, 0.1), (0.0, 0.8), (1.0, 0.1)]).unwrap();
        let g = grid_for(&p, 60.0);
        let var = p.variance();
        let mut last = -1.0;
        for k in 0..60 {
            let t = 1e-3 * (60.0f64 / 1e-3).powf(k as f64 / 59.0);
            let m = mmse(&p, t, &g).unwrap();
            assert!(m >= last - 1e-8, "mmse not monotone at tau {t}");
            assert!(m <= var + 1e-12);
            last = m;
        }
        // Saturation at very large noise.
        let m_far = mmse(&p, 50.0, &g).unwrap();
        assert!(var - m_far <= 1e-3 * var, "gap {}", var - m_far);
    }

    #[test]
    fn mutual_info_gaussian_matches_closed_form() {
        let p = Prior::gaussian(1.0).unwrap();
        let cfg = GridConfig {
            n_intervals: 1000,
            mass_tail: 1e-3,
            n_taus: 2000,
            tau_floor: 1e-4,
            tau_cap: 8.0,
        };
        let curve = ChannelCurve::build(&p, ChannelGrid::new(&p, &cfg).unwrap()).unwrap();
        // Oracle: integrating mmse = s2 u / (s2 u + 1)... gives i = log(1 + s2/tau^2)/2.
        let got = curve.mutual_info(&p, 1.0).unwrap();
        assert!((got - 0.5 * 2.0f64.ln()).abs() < 1e-3, "got {got}");
        for t in [0.3f64, 0.7, 2.0] {
            let want = 0.5 * (1.0 + 1.0 / (t * t)).ln();
            assert!((curve.mutual_info(&p, t).unwrap() - want).abs() < 1e-3);
        }
        assert!(curve.mutual_info(&p, 100.0).is_err());
    }

    #[test]
    fn mutual_info_table_monotone_nonnegative() {
        let p = Prior::from_atoms(&[(0.0, 0.7), (0.2, 0.15), (1.0, 0.15)]).unwrap();
        let cfg = GridConfig {
            n_intervals: 600,
            mass_tail: 1e-3,
            n_taus: 300,
            tau_floor: 1e-3,
            tau_cap: 30.0,
        };
        let curve = ChannelCurve::build(&p, ChannelGrid::new(&p, &cfg).unwrap()).unwrap();
        let mi = curve.mi_values();
        assert!(mi.iter().all(|&v| v >= 0.0));
        for w in mi.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "mi not non-increasing");
        }
        assert!(mi[mi.len() - 1] < 1e-3, "mi does not vanish at large tau");
        // mmse table is non-decreasing within tolerance.
        for w in curve.mmse_values().windows(2) {
            assert!(w[1] >= w[0] - 1e-8);
        }
    }

    #[test]
    fn mutual_info_point_mass_and_large_noise() {
        let pm = Prior::point_mass(1.0);
        let curve = ChannelCurve::build(&pm, grid_for(&pm, 20.0)).unwrap();
        assert!(curve.mutual_info(&pm, 1.0).unwrap().abs() < 1e-12);

        let p = Prior::from_atoms(&[(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        let curve = ChannelCurve::build(&p, grid_for(&p, 20.0)).unwrap();
        // tau = 10 * max support.
        assert!(curve.mutual_info(&p, 10.0).unwrap() <= 0.02);
    }

    #[test]
    fn potential_stationary_point_mass() {
        // i = 0, so phi = sigma^2/(2 t^2) + (delta/2) log t^2 + const has its
        // minimum at t^2 = sigma^2 / delta.
        let pm = Prior::point_mass(0.3);
        let curve = ChannelCurve::build(&pm, grid_for(&pm, 10.0)).unwrap();
        let (delta, sigma) = (0.8f64, 0.6f64);
        let t_star = (sigma * sigma / delta).sqrt();
        let phi0 = curve.potential(&pm, delta, sigma, t_star).unwrap();
        for dt in [-0.05, 0.05] {
            let phi = curve.potential(&pm, delta, sigma, t_star + dt).unwrap();
            assert!(phi >= phi0 - 1e-10);
        }
    }

    #[test]
    fn potential_derivative_identity() {
        // d phi / d tau^{-2} = (sigma^2 - delta tau^2 + mmse(tau^2)) / 2,
        // checked by central finite differences in u = tau^{-2}.
        let p = Prior::from_atoms(&[(0.0, 0.7), (0.2, 0.15), (1.0, 0.15)]).unwrap();
        let cfg = GridConfig {
            n_intervals: 1000,
            mass_tail: 1e-3,
            n_taus: 2000,
            tau_floor: 1e-4,
            tau_cap: 6.0,
        };
        let curve = ChannelCurve::build(&p, ChannelGrid::new(&p, &cfg).unwrap()).unwrap();
        let (delta, sigma) = (0.6f64, 0.5f64);
        for tau in [0.3f64, 0.8, 1.7] {
            let u = 1.0 / (tau * tau);
            let du = u * 1e-4;
            let hi = curve
                .potential(&p, delta, sigma, 1.0 / (u + du).sqrt())
                .unwrap();
            let lo = curve
                .potential(&p, delta, sigma, 1.0 / (u - du).sqrt())
                .unwrap();
            let fd = (hi - lo) / (2.0 * du);
            let want =
                0.5 * (sigma * sigma - delta * tau * tau + mmse(&p, tau, curve.grid()).unwrap());
            assert!((fd - want).abs() < 1e-4, "tau {tau}: fd {fd} vs {want}");
        }
    }

    #[test]
    fn log_concavity_two_point_prior() {
        // Oracle: (log p)''(y) = sech^2(y/tau^2)/tau^4 - 1/tau^2, positive at
        // y = 0 iff tau < 1.
        let p = Prior::from_atoms(&[(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        let g = grid_for(&p, 10.0);
        let low = logconcavity_certificate(&p, 0.2, &g).unwrap();
        assert!(!low.log_concave);
        let oracle = 1.0 / 0.2f64.powi(4) - 1.0 / 0.04;
        assert!((low.max_second_derivative - oracle).abs() < 1e-2 * oracle.abs());

        let high = logconcavity_certificate(&p, 2.0, &g).unwrap();
        assert!(high.log_concave);

        let gp = Prior::gaussian(0.5).unwrap();
        assert!(logconcavity_certificate(&gp, 0.05, &g).unwrap().log_concave);
        assert!(logconcavity_certificate(&p, 0.0, &g).is_err());
    }

    #[test]
    fn log_concavity_monotone_in_tau() {
        let p = Prior::from_atoms(&[(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        let g = grid_for(&p, 10.0);
        let mut seen_true = false;
        for k in 0..40 {
            let tau = 0.2 + 0.1 * k as f64;
            let cert = logconcavity_certificate(&p, tau, &g).unwrap().log_concave;
            if seen_true {
                assert!(cert, "certificate flipped back to false at tau {tau}");
            }
            seen_true |= cert;
        }
        assert!(seen_true);
    }
}
