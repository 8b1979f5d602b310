//! Randomized validators for the structural laws every proximal rule must
//! satisfy: firm non-expansiveness, the Lipschitz bound, continuity in
//! lambda, and order consistency for symmetric rules. Used by the test
//! suites; exposed so external harnesses can re-run them.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::prox::ProxRule;
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, Default)]
pub struct LawReport {
    pub pairs: usize,
    pub violations: usize,
    /// Largest violation margin observed (negative when all checks pass).
    pub worst: f64,
}

impl LawReport {
    fn record(&mut self, margin: f64, tol: f64) {
        self.pairs += 1;
        if margin > tol {
            self.violations += 1;
        }
        if margin > self.worst {
            self.worst = margin;
        }
    }
}

fn gaussian_vec(rng: &mut impl Rng, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            z * scale
        })
        .collect()
}

/// Firm non-expansiveness: `<y - y', p - p'> >= (1 + lambda gamma) ||p - p'||^2`.
pub fn check_firm_nonexpansive(
    rule: &ProxRule,
    dim: usize,
    pairs: usize,
    tol: f64,
    seed: u64,
) -> Result<LawReport> {
    let factor = 1.0 + rule.lambda * rule.strong_convexity();
    let mut report = LawReport::default();
    let mut rng = stream_rng(seed, 0);
    for _ in 0..pairs {
        let y = gaussian_vec(&mut rng, dim, 1.0);
        let y2 = gaussian_vec(&mut rng, dim, 1.0);
        let p = rule.prox(&y)?;
        let p2 = rule.prox(&y2)?;
        let mut inner = 0.0;
        let mut norm_sq = 0.0;
        for i in 0..dim {
            let dp = p[i] - p2[i];
            inner += (y[i] - y2[i]) * dp;
            norm_sq += dp * dp;
        }
        report.record(factor * norm_sq - inner, tol);
    }
    Ok(report)
}

/// Lipschitz bound: `||p - p'|| <= (1 + lambda gamma)^{-1} ||y - y'||`.
pub fn check_lipschitz(
    rule: &ProxRule,
    dim: usize,
    pairs: usize,
    tol: f64,
    seed: u64,
) -> Result<LawReport> {
    let factor = 1.0 / (1.0 + rule.lambda * rule.strong_convexity());
    let mut report = LawReport::default();
    let mut rng = stream_rng(seed, 1);
    for _ in 0..pairs {
        let y = gaussian_vec(&mut rng, dim, 1.2);
        let y2 = gaussian_vec(&mut rng, dim, 1.2);
        let p = rule.prox(&y)?;
        let p2 = rule.prox(&y2)?;
        let mut dp = 0.0;
        let mut dy = 0.0;
        for i in 0..dim {
            dp += (p[i] - p2[i]) * (p[i] - p2[i]);
            dy += (y[i] - y2[i]) * (y[i] - y2[i]);
        }
        report.record(dp.sqrt() - factor * dy.sqrt(), tol);
    }
    Ok(report)
}

/// Continuity in lambda:
/// `||prox[l rho](y) - prox[l' rho](y)|| <= ||y - prox[l rho](y)|| |l'/l - 1|`.
pub fn check_lambda_continuity(
    rule: &ProxRule,
    dim: usize,
    pairs: usize,
    tol: f64,
    seed: u64,
) -> Result<LawReport> {
    let mut report = LawReport::default();
    let mut rng = stream_rng(seed, 2);
    for _ in 0..pairs {
        let y = gaussian_vec(&mut rng, dim, 1.5);
        let ratio: f64 = rng.gen_range(0.25..4.0);
        let p = rule.prox(&y)?;
        let p2 = rule.prox_scaled(ratio, &y)?;
        let mut moved = 0.0;
        let mut slack = 0.0;
        for i in 0..dim {
            moved += (p[i] - p2[i]) * (p[i] - p2[i]);
            slack += (y[i] - p[i]) * (y[i] - p[i]);
        }
        report.record(moved.sqrt() - slack.sqrt() * (ratio - 1.0).abs(), tol);
    }
    Ok(report)
}

/// For symmetric rules on sorted input: outputs stay order-consistent and
/// pairwise gaps contract (`|b_i - b_j| <= |y_i - y_j|`).
pub fn check_symmetric_consistency(
    rule: &ProxRule,
    dim: usize,
    pairs: usize,
    tol: f64,
    seed: u64,
) -> Result<LawReport> {
    let mut report = LawReport::default();
    let mut rng = stream_rng(seed, 3);
    for _ in 0..pairs {
        let mut y = gaussian_vec(&mut rng, dim, 1.0);
        y.sort_by(|a, b| b.total_cmp(a));
        let b = rule.prox(&y)?;
        let mut worst: f64 = f64::NEG_INFINITY;
        for i in 0..dim {
            for j in i + 1..dim {
                let order = -(y[i] - y[j]) * (b[i] - b[j]);
                let contract = (b[i] - b[j]).abs() - (y[i] - y[j]).abs();
                worst = worst.max(order).max(contract);
            }
        }
        report.record(worst, tol);
    }
    Ok(report)
}
