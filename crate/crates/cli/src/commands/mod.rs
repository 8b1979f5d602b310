pub mod project;
pub mod reproduce;
pub mod simulate;
pub mod theory;

use anyhow::Result;
use regap_core::channel::{ChannelCurve, ChannelGrid, GridConfig};
use regap_core::fixed_point::{MmseRiskCurve, RiskCurve, SeparableOptCurve};
use regap_core::Prior;

/// Tabulated channel curve plus the convex risk curve for a prior: the
/// separable-optimal solve for discrete priors; for Gaussian priors the
/// posterior mean is already an admissible prox, so the curve is mmse itself.
pub struct TheoryBundle {
    pub curve: ChannelCurve,
    pub r_opt: Box<dyn RiskCurve>,
    /// Tabulated (tau, risk, width) points when the separable solve ran.
    pub r_opt_points: Option<Vec<regap_core::optimal::RiskPoint>>,
}

pub fn build_theory(prior: &Prior, cfg: &GridConfig) -> Result<TheoryBundle> {
    let grid = ChannelGrid::new(prior, cfg)?;
    let (r_opt, points): (Box<dyn RiskCurve>, _) = if prior.atoms().is_some() {
        let sep = SeparableOptCurve::build(prior, &grid)?;
        let points = sep.points.clone();
        (Box::new(sep), Some(points))
    } else {
        (Box::new(MmseRiskCurve::new(prior, &grid)), None)
    };
    let curve = ChannelCurve::build(prior, grid)?;
    Ok(TheoryBundle {
        curve,
        r_opt,
        r_opt_points: points,
    })
}
