//! Desk-scale Monte-Carlo: instance generation under the deterministic
//! signal-and-noise design, estimator runs, and loss summaries.

pub mod amp;
pub mod post;
pub mod prox_grad;

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fixed_point::ProblemParams;
use crate::prior::{Prior, PriorKind};
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseMode {
    Zero,
    Gaussian,
    /// `||w|| = sqrt(n) sigma` exactly.
    Sphere,
}

impl NoiseMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(NoiseMode::Zero),
            "gaussian" => Ok(NoiseMode::Gaussian),
            "sphere" => Ok(NoiseMode::Sphere),
            other => Err(Error::Parse(format!("unknown noise mode `{other}`"))),
        }
    }
}

/// A generated regression problem `y = X beta0 + w`.
#[derive(Debug, Clone)]
pub struct LinearInstance {
    pub x: Array2<f64>,
    pub beta0: Array1<f64>,
    pub w: Array1<f64>,
    pub y: Array1<f64>,
    pub n: usize,
    pub p: usize,
    pub params: ProblemParams,
    pub prior: Prior,
    pub seed: u64,
}

/// Exact atom counts for a discrete prior at dimension `p` by
/// largest-remainder rounding (ties go to the lower atom index).
pub fn atom_counts(prior: &Prior, p: usize) -> Result<Vec<usize>> {
    let atoms = prior
        .atoms()
        .ok_or_else(|| Error::Config("atom counts need a discrete prior".into()))?;
    let mut counts: Vec<usize> = Vec::with_capacity(atoms.len());
    let mut remainders: Vec<(usize, f64)> = Vec::with_capacity(atoms.len());
    let mut assigned = 0usize;
    for (i, a) in atoms.iter().enumerate() {
        let exact = a.mass * p as f64;
        let floor = exact.floor() as usize;
        counts.push(floor);
        assigned += floor;
        remainders.push((i, exact - floor as f64));
    }
    remainders.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    for k in 0..p.saturating_sub(assigned) {
        counts[remainders[k % remainders.len()].0] += 1;
    }
    if counts.iter().all(|&c| c == 0) {
        return Err(Error::Config(format!(
            "no atom receives a coordinate at p = {p}"
        )));
    }
    Ok(counts)
}

/// Generate an instance. RNG streams: 0 for the signal (permutation or
/// i.i.d. draws), 1 for the design matrix, 2 for the noise; all derived from
/// the seed, so identical seeds give bit-identical instances.
pub fn generate_instance(
    prior: &Prior,
    params: ProblemParams,
    p: usize,
    noise_mode: NoiseMode,
    seed: u64,
) -> Result<LinearInstance> {
    if p < 2 {
        return Err(Error::Config(format!("instance needs p >= 2, got {p}")));
    }
    let n = (params.delta * p as f64).round() as usize;
    if n < 1 {
        return Err(Error::Config(format!(
            "n = round(delta p) = 0 at delta {}, p {p}",
            params.delta
        )));
    }
    let root_p = (p as f64).sqrt();

    let mut signal_rng = stream_rng(seed, 0);
    let mut scaled: Vec<f64> = match prior.kind() {
        PriorKind::Discrete(atoms) => {
            let counts = atom_counts(prior, p)?;
            let mut v = Vec::with_capacity(p);
            for (a, &c) in atoms.iter().zip(&counts) {
                v.extend(std::iter::repeat_n(a.location, c));
            }
            v.shuffle(&mut signal_rng);
            v
        }
        PriorKind::Gaussian { variance } => {
            let sd = variance.sqrt();
            (0..p)
                .map(|_| {
                    let z: f64 = signal_rng.sample(StandardNormal);
                    z * sd
                })
                .collect()
        }
    };
    for v in scaled.iter_mut() {
        *v /= root_p;
    }
    let beta0 = Array1::from_vec(scaled);

    let mut design_rng = stream_rng(seed, 1);
    let mut x = Array2::<f64>::zeros((n, p));
    for v in x.iter_mut() {
        *v = design_rng.sample(StandardNormal);
    }

    let mut noise_rng = stream_rng(seed, 2);
    let sigma = params.sigma;
    let w: Array1<f64> = match noise_mode {
        NoiseMode::Zero => Array1::zeros(n),
        NoiseMode::Gaussian => Array1::from_iter((0..n).map(|_| {
            let z: f64 = noise_rng.sample(StandardNormal);
            z * sigma
        })),
        NoiseMode::Sphere => {
            let g: Array1<f64> =
                Array1::from_iter((0..n).map(|_| noise_rng.sample::<f64, _>(StandardNormal)));
            let norm = g.dot(&g).sqrt();
            if norm == 0.0 || sigma == 0.0 {
                Array1::zeros(n)
            } else {
                g * (sigma * (n as f64).sqrt() / norm)
            }
        }
    };

    let y = x.dot(&beta0) + &w;
    Ok(LinearInstance {
        x,
        beta0,
        w,
        y,
        n,
        p,
        params,
        prior: prior.clone(),
        seed,
    })
}

/// One per-iteration diagnostic row.
#[derive(Debug, Clone, Copy)]
pub struct IterRow {
    pub t: usize,
    pub objective: f64,
    /// Subgradient norm for gradient methods; absent for AMP rows.
    pub grad_norm: Option<f64>,
    pub loss: f64,
    /// Empirical effective noise (AMP rows).
    pub tau_hat_sq: Option<f64>,
    /// Onsager coefficient (AMP rows).
    pub onsager: Option<f64>,
}

/// The full run record of one estimator on one instance.
#[derive(Debug, Clone)]
pub struct RunTrace {
    pub rows: Vec<IterRow>,
    pub beta_hat: Array1<f64>,
    pub iterations: usize,
    pub wall_time_secs: f64,
}

/// Default relative-loss threshold standing in for exact recovery.
pub const RECOVERY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
pub struct SimSummary {
    pub loss: f64,
    pub relative_loss: f64,
    pub recovered: bool,
    pub iterations: usize,
    pub wall_time_secs: f64,
}

pub fn squared_loss(beta_hat: &Array1<f64>, beta0: &Array1<f64>) -> f64 {
    let d = beta_hat - beta0;
    d.dot(&d)
}

/// Loss, relative loss (loss / Var(pi)), and the recovery flag.
pub fn evaluate(trace: &RunTrace, instance: &LinearInstance, recovery_tol: f64) -> SimSummary {
    let loss = squared_loss(&trace.beta_hat, &instance.beta0);
    let var = instance.prior.variance();
    let relative_loss = if var > 0.0 {
        loss / var
    } else if loss == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    SimSummary {
        loss,
        relative_loss,
        recovered: relative_loss < recovery_tol,
        iterations: trace.iterations,
        wall_time_secs: trace.wall_time_secs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_point() -> Prior {
        Prior::from_atoms(&[(0.0, 0.7), (0.2, 0.15), (1.0, 0.15)]).unwrap()
    }

    #[test]
    fn counts_follow_largest_remainder() {
        let prior = three_point();
        assert_eq!(atom_counts(&prior, 2000).unwrap(), vec![1400, 300, 300]);
        assert_eq!(atom_counts(&prior, 1000).unwrap(), vec![700, 150, 150]);
        // p = 3 with masses 0.7/0.15/0.15: floors (2,0,0), remainder goes to
        // the first of the tied atoms.
        assert_eq!(atom_counts(&prior, 3).unwrap(), vec![2, 1, 0]);
    }

    #[test]
    fn instance_realizes_exact_counts_and_model() {
        let prior = three_point();
        let params = ProblemParams::new(0.37, 0.0).unwrap();
        let inst = generate_instance(&prior, params, 200, NoiseMode::Zero, 42).unwrap();
        assert_eq!(inst.n, 74);
        let root_p = (200f64).sqrt();
        let mut zeros = 0;
        let mut small = 0;
        let mut big = 0;
        for &b in inst.beta0.iter() {
            let s = b * root_p;
            if s.abs() < 1e-12 {
                zeros += 1;
            } else if (s - 0.2).abs() < 1e-12 {
                small += 1;
            } else if (s - 1.0).abs() < 1e-12 {
                big += 1;
            }
        }
        assert_eq!((zeros, small, big), (140, 30, 30));
        // y = X beta0 exactly in the zero-noise mode.
        let resid = &inst.y - &inst.x.dot(&inst.beta0);
        assert!(resid.dot(&resid) == 0.0);
    }

    #[test]
    fn sphere_noise_has_exact_norm() {
        let prior = three_point();
        let params = ProblemParams::new(0.6, 0.3).unwrap();
        let inst = generate_instance(&prior, params, 100, NoiseMode::Sphere, 7).unwrap();
        let norm_sq = inst.w.dot(&inst.w);
        assert!((norm_sq / inst.n as f64 - 0.09).abs() < 1e-12);
    }

    #[test]
    fn generation_is_deterministic() {
        let prior = three_point();
        let params = ProblemParams::new(0.5, 0.2).unwrap();
        let a = generate_instance(&prior, params, 50, NoiseMode::Gaussian, 9).unwrap();
        let b = generate_instance(&prior, params, 50, NoiseMode::Gaussian, 9).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.beta0, b.beta0);
        assert_eq!(a.y, b.y);
        let c = generate_instance(&prior, params, 50, NoiseMode::Gaussian, 10).unwrap();
        assert_ne!(a.y, c.y);
    }

    #[test]
    fn rejects_tiny_problems() {
        let prior = three_point();
        let params = ProblemParams::new(0.37, 0.0).unwrap();
        assert!(generate_instance(&prior, params, 1, NoiseMode::Zero, 0).is_err());
        let thin = ProblemParams::new(0.05, 0.0).unwrap();
        assert!(generate_instance(&prior, thin, 2, NoiseMode::Zero, 0).is_err());
    }
}
