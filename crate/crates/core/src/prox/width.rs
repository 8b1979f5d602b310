//! Monte-Carlo estimator of the width functional
//! `W = (1/tau) E <z, prox[lambda rho](beta0 + tau z)>`
//! with `beta0` i.i.d. `pi/sqrt(p)` and `z ~ N(0, I/p)`. The lower bound
//! machinery needs `W < delta`; for proximal maps the exact value always
//! lies in `[0, 1]`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::prior::{Prior, PriorKind};
use crate::prox::ProxRule;
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy)]
pub struct WidthEstimate {
    pub mean: f64,
    pub std_err: f64,
}

/// Draw one coordinate of `sqrt(p) beta0` from the prior.
pub(crate) fn draw_signal(prior: &Prior, rng: &mut impl Rng) -> f64 {
    match prior.kind() {
        PriorKind::Gaussian { variance } => {
            let z: f64 = rng.sample(StandardNormal);
            z * variance.sqrt()
        }
        PriorKind::Discrete(atoms) => {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            for a in atoms {
                acc += a.mass;
                if u < acc {
                    return a.location;
                }
            }
            atoms[atoms.len() - 1].location
        }
    }
}

/// Per-replicate streams are derived from `(seed, replicate)`, and the
/// reduction runs in replicate order, so the result is independent of the
/// number of worker threads.
pub fn width_estimate(
    rule: &ProxRule,
    prior: &Prior,
    tau: f64,
    p: usize,
    n_mc: usize,
    seed: u64,
) -> Result<WidthEstimate> {
    if p < 1 {
        return Err(Error::Config("width estimate needs p >= 1".into()));
    }
    if n_mc < 2 {
        return Err(Error::Config("width estimate needs n_mc >= 2".into()));
    }
    if !(tau > 0.0) {
        return Err(Error::Domain(format!(
            "width estimate needs tau > 0, got {tau}"
        )));
    }
    let root_p = (p as f64).sqrt();
    let samples: Vec<f64> = (0..n_mc)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream_rng(seed, rep as u64);
            let mut z = vec![0.0; p];
            let mut y = vec![0.0; p];
            for j in 0..p {
                let beta = draw_signal(prior, &mut rng) / root_p;
                let g: f64 = rng.sample(StandardNormal);
                z[j] = g / root_p;
                y[j] = beta + tau * z[j];
            }
            let b = rule.prox(&y)?;
            Ok(z.iter().zip(&b).map(|(zi, bi)| zi * bi).sum::<f64>() / tau)
        })
        .collect::<Result<_>>()?;
    let mean = samples.iter().sum::<f64>() / n_mc as f64;
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n_mc - 1) as f64;
    Ok(WidthEstimate {
        mean,
        std_err: (var / n_mc as f64).sqrt(),
    })
}
