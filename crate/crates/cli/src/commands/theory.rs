//! `regap theory`: tabulate channel curves, effective noises, and phase
//! labels for a prior over (delta, sigma) grids.

use std::path::Path;

use anyhow::{Context, Result};
use regap_core::channel::ChannelGrid;
use regap_core::fixed_point::{effective_noises, phase_classify, ProblemParams};
use regap_core::optimal::{compute_lambda, reconstruct_penalty, solve_optimal_prox};

use super::build_theory;
use crate::config::RawConfig;
use crate::csvio::{b, f, CsvCell, CsvTable};

fn tag(v: f64) -> String {
    v.to_string().replace('.', "_")
}

pub fn run(cfg: &RawConfig, out: &Path) -> Result<()> {
    let prior = cfg.prior()?;
    let deltas = cfg.grid("delta")?.context("theory needs `delta`")?;
    let sigmas = cfg.grid("sigma")?.context("theory needs `sigma`")?;
    let grid_cfg = cfg.grid_config(&prior, &deltas, &sigmas)?;
    let bundle = build_theory(&prior, &grid_cfg)?;
    let var = prior.variance();

    // curves.csv: tau, mmse, mi, and the potential at each (delta, sigma).
    // For sigma = 0 the potential column drops its -(delta/2) log sigma^2
    // constant (same minimizer, finite values).
    let mut curves = CsvTable::new(&["delta", "sigma", "tau", "mmse", "mi", "phi"]);
    for &delta in &deltas {
        for &sigma in &sigmas {
            for (k, &tau) in bundle.curve.taus().iter().enumerate() {
                let phi = if sigma > 0.0 {
                    bundle.curve.potential(&prior, delta, sigma, tau)?
                } else {
                    bundle.curve.potential_shifted(&prior, delta, sigma, tau)?
                };
                curves.row(&[
                    f(delta),
                    f(sigma),
                    f(tau),
                    f(bundle.curve.mmse_values()[k]),
                    f(bundle.curve.mi_values()[k]),
                    f(phi),
                ]);
            }
        }
    }
    curves.write(&out.join("curves.csv"))?;

    // noises.csv: the four effective noises and risks per (delta, sigma).
    let mut noises = CsvTable::new(&[
        "delta",
        "sigma",
        "tau_stat_sq",
        "tau_alg_sq",
        "tau_alg_star_sq",
        "tau_cvx_sq",
        "risk_stat",
        "risk_alg",
        "risk_alg_star",
        "risk_cvx",
        "rel_risk_alg_star",
        "rel_risk_cvx",
        "unique_stat_min",
    ]);
    for &delta in &deltas {
        for &sigma in &sigmas {
            let params = ProblemParams::new(delta, sigma)?;
            let rep = effective_noises(&prior, params, &bundle.curve, bundle.r_opt.as_ref())?;
            let rel = |r: f64| if var > 0.0 { r / var } else { 0.0 };
            noises.row(&[
                f(delta),
                f(sigma),
                f(rep.tau_stat_sq),
                f(rep.tau_alg_sq),
                f(rep.tau_alg_star_sq),
                f(rep.tau_cvx_sq),
                f(rep.risk_stat),
                f(rep.risk_alg),
                f(rep.risk_alg_star),
                f(rep.risk_cvx),
                f(rel(rep.risk_alg_star)),
                f(rel(rep.risk_cvx)),
                b(rep.unique_stat_min),
            ]);
        }
    }
    noises.write(&out.join("noises.csv"))?;

    // phases.csv: log-concavity labels per delta, for each positive sigma.
    let mut phases = CsvTable::new(&[
        "sigma",
        "delta",
        "cvx_equals_alg",
        "cvx_equals_stat",
        "delta_alg",
        "delta_stat",
    ]);
    for &sigma in &sigmas {
        if sigma <= 0.0 {
            continue;
        }
        let diagram = phase_classify(&prior, sigma, &deltas, &bundle.curve)?;
        for (i, &delta) in diagram.delta_grid.iter().enumerate() {
            phases.row(&[
                f(sigma),
                f(delta),
                b(diagram.cvx_equals_alg[i]),
                b(diagram.cvx_equals_stat[i]),
                diagram.delta_alg.map_or(CsvCell::Empty, CsvCell::Float),
                diagram.delta_stat.map_or(CsvCell::Empty, CsvCell::Float),
            ]);
        }
    }
    phases.write(&out.join("phases.csv"))?;

    // ropt.csv: the separable-optimal curve with calibration per delta.
    if let Some(points) = &bundle.r_opt_points {
        let mut ropt = CsvTable::new(&["delta", "tau", "risk", "width", "lambda"]);
        for &delta in &deltas {
            for pt in points {
                let lambda = if pt.width < delta {
                    CsvCell::Float(0.5 / (1.0 - pt.width / delta))
                } else {
                    CsvCell::Empty
                };
                ropt.row(&[f(delta), f(pt.tau), f(pt.risk), f(pt.width), lambda]);
            }
        }
        ropt.write(&out.join("ropt.csv"))?;

        // The optimal prox and its reconstructed penalty at tau_cvx, per
        // (delta, sigma), as two-column (x, value) tables.
        let grid = ChannelGrid::new(&prior, &grid_cfg)?;
        for &delta in &deltas {
            for &sigma in &sigmas {
                let params = ProblemParams::new(delta, sigma)?;
                let rep = effective_noises(&prior, params, &bundle.curve, bundle.r_opt.as_ref())?;
                let tau = rep.tau_cvx_sq.sqrt().max(grid_cfg.tau_floor);
                let sol = solve_optimal_prox(&prior, tau, &grid)?;
                let suffix = format!("d{}_s{}", tag(delta), tag(sigma));
                std::fs::write(
                    out.join(format!("opt_prox_{suffix}.csv")),
                    sol.prox_fn.to_csv(),
                )?;
                if let Ok(cal) = compute_lambda(&sol.prox_fn, &prior, tau, delta, &grid) {
                    if let Ok(rho) = reconstruct_penalty(&sol.prox_fn, cal.lambda) {
                        std::fs::write(
                            out.join(format!("opt_penalty_{suffix}.csv")),
                            rho.to_csv(),
                        )?;
                    }
                }
            }
        }
    }
    Ok(())
}
