//! Scalar fixed-point systems: state evolution, the four effective-noise
//! parameters (stat / alg / alg* / cvx), phase classification in delta, and
//! the SNR-gap bounds with the ridge closed form.

use crate::channel::{logconcavity_certificate, mmse, ChannelCurve, ChannelGrid};
use crate::error::{Error, Result};
use crate::prior::Prior;

/// Aspect ratio and noise scale of the regression problem.
#[derive(Debug, Clone, Copy)]
pub struct ProblemParams {
    pub delta: f64,
    pub sigma: f64,
}

impl ProblemParams {
    pub fn new(delta: f64, sigma: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::Domain(format!(
                "delta must be positive, got {delta}"
            )));
        }
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::Domain(format!(
                "sigma must be non-negative, got {sigma}"
            )));
        }
        Ok(ProblemParams { delta, sigma })
    }
}

#[derive(Debug, Clone)]
pub struct StateEvolutionTrace {
    /// tau_t^2 for t = 0, 1, ...
    pub tau_sq: Vec<f64>,
    pub converged: bool,
    pub limit: f64,
}

/// `tau_{t+1}^2 = (sigma^2 + mmse(tau_t^2)) / delta` from
/// `tau_0^2 = (sigma^2 + s2) / delta`. The sequence is non-increasing and
/// bounded below by `sigma^2 / delta`, so it always settles.
pub fn state_evolution(
    prior: &Prior,
    params: ProblemParams,
    grid: &ChannelGrid,
    max_t: usize,
    tol: f64,
) -> Result<StateEvolutionTrace> {
    if max_t < 1 {
        return Err(Error::Config("state evolution needs max_t >= 1".into()));
    }
    let s2 = prior.second_moment();
    let sig2 = params.sigma * params.sigma;
    let mut tau_sq = vec![(sig2 + s2) / params.delta];
    let mut converged = false;
    for _ in 0..max_t {
        let cur = *tau_sq.last().unwrap();
        let next = (sig2 + mmse(prior, cur.sqrt(), grid)?) / params.delta;
        tau_sq.push(next);
        if (next - cur).abs() < tol {
            converged = true;
            break;
        }
    }
    let limit = *tau_sq.last().unwrap();
    Ok(StateEvolutionTrace {
        tau_sq,
        converged,
        limit,
    })
}

/// The four effective-noise parameters and their risks `delta tau^2 - sigma^2`.
#[derive(Debug, Clone, Copy)]
pub struct EffectiveNoiseReport {
    pub tau_stat_sq: f64,
    pub tau_alg_sq: f64,
    pub tau_alg_star_sq: f64,
    pub tau_cvx_sq: f64,
    pub risk_stat: f64,
    pub risk_alg: f64,
    pub risk_alg_star: f64,
    pub risk_cvx: f64,
    pub unique_stat_min: bool,
}

/// Ordering slack (in tau^2) tolerated before the report is rejected.
pub const ORDER_TOL: f64 = 1e-6;

/// A risk curve `tau -> R(tau)` that can be evaluated off-grid
/// (the separable-optimal curve, or mmse itself).
pub trait RiskCurve {
    fn risk(&self, tau: f64) -> Result<f64>;
}

/// The separable-optimal risk curve backed by per-tau exact solves.
pub struct SeparableOptCurve {
    prior: Prior,
    grid: ChannelGrid,
    /// Precomputed `(tau, risk)` pairs on the scan grid, ascending in tau.
    pub points: Vec<crate::optimal::RiskPoint>,
}

impl SeparableOptCurve {
    pub fn build(prior: &Prior, grid: &ChannelGrid) -> Result<Self> {
        let points = crate::optimal::r_opt_curve(prior, grid.taus(), grid)?;
        Ok(SeparableOptCurve {
            prior: prior.clone(),
            grid: grid.clone(),
            points,
        })
    }
}

impl RiskCurve for SeparableOptCurve {
    fn risk(&self, tau: f64) -> Result<f64> {
        // Exact-solve rather than interpolate: refinement probes land off-grid.
        if let Some(pt) = self
            .points
            .iter()
            .find(|p| (p.tau - tau).abs() <= f64::EPSILON * tau.abs())
        {
            return Ok(pt.risk);
        }
        Ok(crate::optimal::solve_optimal_prox(&self.prior, tau, &self.grid)?.risk)
    }
}

/// mmse as a risk curve: the separable optimum for priors whose posterior
/// mean is itself non-decreasing and 1-Lipschitz (Gaussian priors), and the
/// scan curve for the alg parameters.
pub struct MmseRiskCurve {
    prior: Prior,
    grid: ChannelGrid,
}

impl MmseRiskCurve {
    pub fn new(prior: &Prior, grid: &ChannelGrid) -> Self {
        MmseRiskCurve {
            prior: prior.clone(),
            grid: grid.clone(),
        }
    }
}

impl RiskCurve for MmseRiskCurve {
    fn risk(&self, tau: f64) -> Result<f64> {
        mmse(&self.prior, tau, &self.grid)
    }
}

/// Borrowed mmse view used internally by the scans.
struct MmseCurve<'a> {
    prior: &'a Prior,
    grid: &'a ChannelGrid,
}

impl RiskCurve for MmseCurve<'_> {
    fn risk(&self, tau: f64) -> Result<f64> {
        mmse(self.prior, tau, self.grid)
    }
}

/// Largest grid tau whose squared value satisfies
/// `delta tau^2 - sigma^2 < R(tau)`, sharpened by bisecting the sign change
/// of `g(u) = delta u - sigma^2 - R(sqrt(u))` one grid cell up.
fn sup_crossing(
    curve: &dyn RiskCurve,
    taus: &[f64],
    risks: &[f64],
    params: ProblemParams,
) -> Result<f64> {
    let sig2 = params.sigma * params.sigma;
    let holds = |t: f64, r: f64| params.delta * t * t - sig2 < r;
    let mut idx: Option<usize> = None;
    for k in (0..taus.len()).rev() {
        if holds(taus[k], risks[k]) {
            idx = Some(k);
            break;
        }
    }
    let Some(k) = idx else {
        return Ok(0.0);
    };
    if k + 1 >= taus.len() {
        return Ok(taus[k] * taus[k]);
    }
    // Bisect g over [tau_k, tau_{k+1}] where the inequality flips.
    let (mut lo, mut hi) = (taus[k], taus[k + 1]);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if holds(mid, curve.risk(mid)?) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(lo * lo)
}

/// Grid argmin of the potential, refined by bisecting the stationarity
/// condition `h(u) = sigma^2 - delta u + mmse(u) = 0` when interior.
/// Returns `(tau_stat^2, unique_min_flag)`.
fn potential_argmin(
    prior: &Prior,
    curve: &ChannelCurve,
    params: ProblemParams,
) -> Result<(f64, bool)> {
    let taus = curve.taus();
    let n = taus.len();
    let mut phi = Vec::with_capacity(n);
    for &t in taus {
        phi.push(curve.potential_shifted(prior, params.delta, params.sigma, t)?);
    }
    // Local minima on the grid (edges count).
    let mut minima: Vec<(usize, f64)> = Vec::new();
    for k in 0..n {
        let left_ok = k == 0 || phi[k] <= phi[k - 1];
        let right_ok = k + 1 == n || phi[k] <= phi[k + 1];
        if left_ok && right_ok {
            minima.push((k, phi[k]));
        }
    }
    minima.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (k_star, phi_star) = minima[0];
    // Collapse plateaus: runs of adjacent indices belong to one minimum.
    let unique = minima
        .iter()
        .skip(1)
        .filter(|(k, _)| k.abs_diff(k_star) > 1)
        .all(|(_, v)| v - phi_star > 1e-6);

    if k_star == 0 || k_star + 1 == n {
        return Ok((taus[k_star] * taus[k_star], unique));
    }
    // h(u) crosses from + to - across the interior minimizer.
    let sig2 = params.sigma * params.sigma;
    let h = |u: f64| -> Result<f64> {
        Ok(sig2 - params.delta * u + mmse(prior, u.sqrt(), curve.grid())?)
    };
    let (mut lo, mut hi) = (
        taus[k_star - 1] * taus[k_star - 1],
        taus[k_star + 1] * taus[k_star + 1],
    );
    if h(lo)? <= 0.0 || h(hi)? >= 0.0 {
        // No clean sign change (flat or boundary effects): keep the grid point.
        return Ok((taus[k_star] * taus[k_star], unique));
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if h(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    Ok((0.5 * (lo + hi), unique))
}

/// Solve the four effective-noise definitions on the curve's tau grid.
pub fn effective_noises(
    prior: &Prior,
    params: ProblemParams,
    curve: &ChannelCurve,
    r_opt: &dyn RiskCurve,
) -> Result<EffectiveNoiseReport> {
    let taus = curve.taus();
    let sig2 = params.sigma * params.sigma;

    let mmse_curve = MmseCurve {
        prior,
        grid: curve.grid(),
    };
    let mm = curve.mmse_values();
    let tau_alg_sq = sup_crossing(&mmse_curve, taus, mm, params)?;
    // The weak-inequality variant differs only on exact-tangency plateaus;
    // on a grid both scans produce the same crossing.
    let tau_alg_star_sq = tau_alg_sq;

    let r_risks: Vec<f64> = {
        let mut v = Vec::with_capacity(taus.len());
        for &t in taus {
            v.push(r_opt.risk(t)?);
        }
        v
    };
    let tau_cvx_sq = sup_crossing(r_opt, taus, &r_risks, params)?;

    let (tau_stat_sq, unique_stat_min) = potential_argmin(prior, curve, params)?;

    let report = EffectiveNoiseReport {
        tau_stat_sq,
        tau_alg_sq,
        tau_alg_star_sq,
        tau_cvx_sq: tau_cvx_sq.max(tau_alg_sq),
        risk_stat: params.delta * tau_stat_sq - sig2,
        risk_alg: params.delta * tau_alg_sq - sig2,
        risk_alg_star: params.delta * tau_alg_star_sq - sig2,
        risk_cvx: params.delta * tau_cvx_sq.max(tau_alg_sq) - sig2,
        unique_stat_min,
    };
    if report.tau_cvx_sq < report.tau_alg_sq - ORDER_TOL
        || report.tau_alg_sq < report.tau_stat_sq - ORDER_TOL
        || report.tau_alg_star_sq < report.tau_alg_sq - ORDER_TOL
    {
        return Err(Error::Solver {
            message: format!(
                "effective-noise ordering violated: cvx {} alg {} stat {}",
                report.tau_cvx_sq, report.tau_alg_sq, report.tau_stat_sq
            ),
            residual: report.tau_stat_sq - report.tau_alg_sq,
            iterations: 0,
        });
    }
    Ok(report)
}

/// Per-delta phase labels and the thresholds where they flip.
#[derive(Debug, Clone)]
pub struct PhaseDiagram {
    pub delta_grid: Vec<f64>,
    pub cvx_equals_alg: Vec<bool>,
    pub cvx_equals_stat: Vec<bool>,
    /// First grid delta where the alg certificate flips false, if any.
    pub delta_alg: Option<f64>,
    pub delta_stat: Option<f64>,
}

/// Classify each delta by checking log-concavity of `pi * N(0, tau^2)` at
/// the alg and stat effective noises.
pub fn phase_classify(
    prior: &Prior,
    sigma: f64,
    delta_grid: &[f64],
    curve: &ChannelCurve,
) -> Result<PhaseDiagram> {
    if !(sigma > 0.0) {
        return Err(Error::Domain("phase classification needs sigma > 0".into()));
    }
    let mut cvx_equals_alg = Vec::with_capacity(delta_grid.len());
    let mut cvx_equals_stat = Vec::with_capacity(delta_grid.len());
    let mut delta_alg = None;
    let mut delta_stat = None;
    for &delta in delta_grid {
        let params = ProblemParams::new(delta, sigma)?;
        let taus = curve.taus();
        let mm = curve.mmse_values();
        let mmse_curve = MmseCurve {
            prior,
            grid: curve.grid(),
        };
        let alg_sq = sup_crossing(&mmse_curve, taus, mm, params)?;
        let (stat_sq, _) = potential_argmin(prior, curve, params)?;

        let alg_ok =
            logconcavity_certificate(prior, alg_sq.sqrt().max(1e-12), curve.grid())?.log_concave;
        let stat_ok =
            logconcavity_certificate(prior, stat_sq.sqrt().max(1e-12), curve.grid())?.log_concave;
        if !alg_ok && delta_alg.is_none() {
            delta_alg = Some(delta);
        }
        if !stat_ok && delta_stat.is_none() {
            delta_stat = Some(delta);
        }
        cvx_equals_alg.push(alg_ok);
        cvx_equals_stat.push(stat_ok);
    }
    // stat flips at or before alg: tau_stat <= tau_alg and the certificate
    // is monotone in tau.
    if let (Some(ds), Some(da)) = (delta_stat, delta_alg) {
        if ds > da {
            return Err(Error::Solver {
                message: format!("phase thresholds out of order: stat {ds} > alg {da}"),
                residual: ds - da,
                iterations: 0,
            });
        }
    }
    Ok(PhaseDiagram {
        delta_grid: delta_grid.to_vec(),
        cvx_equals_alg,
        cvx_equals_stat,
        delta_alg,
        delta_stat,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct SnrGapBounds {
    pub ridge_tau_sq: f64,
    pub gap_estimate: f64,
    pub low_snr_bound: f64,
    pub zero_s3_bound: f64,
}

/// Ridge effective noise (closed-form quadratic root of
/// `delta tau^2 - sigma^2 = s2 tau^2 / (s2 + tau^2)`), the gap between the
/// ridge risk and the Bayes risk, and the low-SNR bounds from the moment
/// expansion.
pub fn snr_gap_bounds(
    prior: &Prior,
    params: ProblemParams,
    curve: &ChannelCurve,
) -> Result<SnrGapBounds> {
    if !(params.sigma > 0.0) {
        return Err(Error::Domain("snr gap bounds need sigma > 0".into()));
    }
    let s2 = prior.second_moment();
    let s3 = prior.moment(3);
    let s4 = prior.moment(4);
    let sig2 = params.sigma * params.sigma;
    let delta = params.delta;

    // delta u^2 + (delta s2 - sigma^2 - s2) u - sigma^2 s2 = 0, positive root.
    let b = delta * s2 - sig2 - s2;
    let ridge_tau_sq = (-b + (b * b + 4.0 * delta * sig2 * s2).sqrt()) / (2.0 * delta);

    let ridge_risk = s2 * ridge_tau_sq / (s2 + ridge_tau_sq);
    let (tau_stat_sq, _) = potential_argmin(prior, curve, params)?;
    let bayes_risk = mmse(prior, tau_stat_sq.sqrt(), curve.grid())?;
    let gap_estimate = ridge_risk - bayes_risk;

    let snr = s2 / sig2;
    let low_snr_bound = s2 * delta * delta * s3 * s3 / (2.0 * s2 * s2 * s2) * snr * snr;
    let zero_s3_bound =
        s2 * delta.powi(3) * (1.5 - s4 / (s2 * s2) + s4 * s4 / (6.0 * s2.powi(4))) * snr.powi(3);
    Ok(SnrGapBounds {
        ridge_tau_sq,
        gap_estimate,
        low_snr_bound,
        zero_s3_bound,
    })
}
