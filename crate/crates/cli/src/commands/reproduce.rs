//! `regap reproduce`: canned recipes that regenerate the headline tables and
//! figures at desk or paper scale, with side-by-side simulated and theory
//! columns plus static plots.

use std::path::Path;

use anyhow::{bail, Result};
use regap_core::channel::ChannelGrid;
use regap_core::fixed_point::{effective_noises, ProblemParams};
use regap_core::prox::ProxRule;
use regap_core::sim::amp::AmpMode;
use regap_core::sim::prox_grad::{StepRule, StopRule};
use regap_core::sim::NoiseMode;
use regap_core::Prior;

use super::simulate::{hull_spec_for, optimal_rule, run_replicates, Batch, Method};
use super::{build_theory, TheoryBundle};
use crate::config::RawConfig;
use crate::csvio::{f, i, CsvCell, CsvTable};
use crate::plot::{Plot, Series};

pub fn run(target: &str, scale: &str, cfg: &RawConfig, out: &Path, seed: u64) -> Result<()> {
    match (target, scale) {
        ("table1", "desk") => table1(cfg, out, seed, 1000, 20),
        ("table1", "paper") => table1(cfg, out, seed, 2000, 500),
        ("fig1", "desk") => fig1(cfg, out, seed, 500, 3),
        ("fig1", "paper") => fig1(cfg, out, seed, 2000, 50),
        _ => bail!("unknown reproduce target `{target}`/`{scale}` (table1|fig1, desk|paper)"),
    }
}

/// Noiseless recovery from the 3-point prior at delta = 0.37: projection
/// denoising vs Bayes-AMP, with the asymptotic lower bounds.
fn table1(
    cfg: &RawConfig,
    out: &Path,
    seed: u64,
    p_default: usize,
    reps_default: usize,
) -> Result<()> {
    let prior = Prior::from_atoms(&[(0.0, 0.7), (0.2, 0.15), (1.0, 0.15)])?;
    let params = ProblemParams::new(0.37, 0.0)?;
    let p = cfg.usize("p", p_default)?;
    let replicates = cfg.usize("replicates", reps_default)?;
    let var = prior.variance();

    let grid_cfg = cfg.grid_config(&prior, &[params.delta], &[params.sigma])?;
    let bundle = build_theory(&prior, &grid_cfg)?;
    let rep = effective_noises(&prior, params, &bundle.curve, bundle.r_opt.as_ref())?;
    let theory_cvx = rep.risk_cvx / var;
    let theory_amp = rep.risk_alg_star / var;

    let grid = ChannelGrid::new(&prior, &grid_cfg)?;
    // Undamped empirical AMP two-cycles at the noiseless near-tangency; 0.8
    // damping with a longer budget recovers reliably at desk scale.
    let amp = Method::Amp {
        mode: AmpMode::Empirical {
            damping: cfg.f64("amp_damping", 0.8)?,
        },
        t_max: cfg.usize("t_max", 150)?,
    };
    // Step 0.1 sits above the conservative 1/L certificate but inside the
    // gradient stability range. The noiseless problem has a large solution
    // set; the overshooting trajectory settles on points with markedly lower
    // estimation error than small-step runs reach.
    let hull = Method::ProxGrad {
        rule: ProxRule::hull(hull_spec_for(&prior, p)?),
        step: StepRule::Fixed(cfg.f64("step", 0.1)?),
        accel: true,
        stop: StopRule {
            grad_norm_tol: cfg.f64("grad_tol", 1e-10)?,
            max_iter: cfg.usize("max_iter", 6000)?,
        },
    };
    let recovery_tol = cfg.f64("recovery_tol", regap_core::sim::RECOVERY_TOL)?;

    let batch = Batch {
        prior: &prior,
        params,
        p,
        noise: NoiseMode::Zero,
        replicates,
        seed,
        recovery_tol,
    };
    let hull_runs = run_replicates(batch, &hull, &grid)?;
    let amp_runs = run_replicates(batch, &amp, &grid)?;

    let stats = |runs: &[super::simulate::ReplicateRun]| -> (f64, f64, f64, f64) {
        let mut rels: Vec<f64> = runs.iter().map(|r| r.summary.relative_loss).collect();
        rels.sort_by(|a, b| a.total_cmp(b));
        let recovered =
            runs.iter().filter(|r| r.summary.recovered).count() as f64 / runs.len() as f64;
        let median = if rels.len() % 2 == 1 {
            rels[rels.len() / 2]
        } else {
            0.5 * (rels[rels.len() / 2 - 1] + rels[rels.len() / 2])
        };
        (recovered * 100.0, median, rels[0], rels[rels.len() - 1])
    };
    let (h_rec, h_med, h_min, h_max) = stats(&hull_runs);
    let (a_rec, a_med, a_min, a_max) = stats(&amp_runs);

    let mut table = CsvTable::new(&["metric", "projection_denoising", "bayes_amp"]);
    table.row(&[CsvCell::Str("full_recovery_pct"), f(h_rec), f(a_rec)]);
    table.row(&[CsvCell::Str("median_est_error"), f(h_med), f(a_med)]);
    table.row(&[CsvCell::Str("min_est_error"), f(h_min), f(a_min)]);
    table.row(&[CsvCell::Str("max_est_error"), f(h_max), f(a_max)]);
    table.row(&[
        CsvCell::Str("theory_lower_bound"),
        f(theory_cvx),
        f(theory_amp),
    ]);
    table.write(&out.join("table1.csv"))?;

    let mut reps_csv = CsvTable::new(&["method", "replicate", "relative_loss", "recovered"]);
    for (name, runs) in [("projection", &hull_runs), ("bayes_amp", &amp_runs)] {
        for (k, r) in runs.iter().enumerate() {
            reps_csv.row(&[
                CsvCell::Str(name),
                i(k),
                f(r.summary.relative_loss),
                crate::csvio::b(r.summary.recovered),
            ]);
        }
    }
    reps_csv.write(&out.join("table1_replicates.csv"))?;

    let plot = Plot {
        title: format!("Noiseless 3-point recovery, p = {p}, delta = 0.37"),
        x_label: "replicate".into(),
        y_label: "relative loss".into(),
        series: vec![
            Series {
                label: "projection".into(),
                color: "#d62728",
                points: hull_runs
                    .iter()
                    .enumerate()
                    .map(|(k, r)| (k as f64, r.summary.relative_loss))
                    .collect(),
                markers: true,
            },
            Series {
                label: "bayes-amp".into(),
                color: "#1f77b4",
                points: amp_runs
                    .iter()
                    .enumerate()
                    .map(|(k, r)| (k as f64, r.summary.relative_loss))
                    .collect(),
                markers: true,
            },
            Series {
                label: "convex bound".into(),
                color: "#2ca02c",
                points: vec![(0.0, theory_cvx), (replicates as f64 - 1.0, theory_cvx)],
                markers: false,
            },
        ],
    };
    plot.write(&out.join("table1.svg"))?;
    Ok(())
}

/// Loss-vs-sigma curves for the symmetric 3-point prior at four aspect
/// ratios: Bayes, Bayes-AMP, and the convex bound, with simulation markers.
fn fig1(
    cfg: &RawConfig,
    out: &Path,
    seed: u64,
    p_default: usize,
    reps_default: usize,
) -> Result<()> {
    let prior = Prior::from_atoms(&[(-1.0, 0.1), (0.0, 0.8), (1.0, 0.1)])?;
    let deltas = cfg
        .grid("delta")?
        .unwrap_or_else(|| vec![0.45, 0.5, 0.6, 0.75]);
    let sigmas = match cfg.grid("sigma")? {
        Some(s) => s,
        None => (0..31).map(|k| 0.05 + 0.04 * k as f64).collect(),
    };
    let p = cfg.usize("p", p_default)?;
    let replicates = cfg.usize("replicates", reps_default)?;
    let sim_every = cfg.usize("sim_every", 6)?;
    let recovery_tol = cfg.f64("recovery_tol", regap_core::sim::RECOVERY_TOL)?;

    let grid_cfg = cfg.grid_config(&prior, &deltas, &sigmas)?;
    let bundle: TheoryBundle = build_theory(&prior, &grid_cfg)?;
    let grid = ChannelGrid::new(&prior, &grid_cfg)?;

    let mut theory = CsvTable::new(&["delta", "sigma", "r_stat", "r_amp", "r_cvx"]);
    let mut sim = CsvTable::new(&["delta", "sigma", "method", "median_loss", "replicates"]);
    let mut theory_rows: Vec<(f64, f64, f64, f64, f64)> = Vec::new();
    for &delta in &deltas {
        for &sigma in &sigmas {
            let params = ProblemParams::new(delta, sigma)?;
            let rep = effective_noises(&prior, params, &bundle.curve, bundle.r_opt.as_ref())?;
            theory.row(&[
                f(delta),
                f(sigma),
                f(rep.risk_stat),
                f(rep.risk_alg_star),
                f(rep.risk_cvx),
            ]);
            theory_rows.push((delta, sigma, rep.risk_stat, rep.risk_alg_star, rep.risk_cvx));
        }
    }
    theory.write(&out.join("fig1_theory.csv"))?;

    let mut sim_points: Vec<(f64, f64, &'static str, f64)> = Vec::new();
    if replicates > 0 {
        for &delta in &deltas {
            for (si, &sigma) in sigmas.iter().enumerate() {
                if si % sim_every != 0 {
                    continue;
                }
                let params = ProblemParams::new(delta, sigma)?;
                let amp = Method::Amp {
                    mode: AmpMode::Empirical {
                        damping: cfg.f64("amp_damping", 1.0)?,
                    },
                    t_max: cfg.usize("t_max", 100)?,
                };
                let (rule, _tau) = optimal_rule(&bundle, &prior, params, &grid_cfg)?;
                let cvx = Method::ProxGrad {
                    rule,
                    step: StepRule::Auto,
                    accel: true,
                    stop: StopRule {
                        grad_norm_tol: cfg.f64("grad_tol", 1e-10)?,
                        max_iter: cfg.usize("max_iter", 3000)?,
                    },
                };
                let batch = Batch {
                    prior: &prior,
                    params,
                    p,
                    noise: NoiseMode::Sphere,
                    replicates,
                    seed,
                    recovery_tol,
                };
                for (label, method) in [("amp", amp), ("cvx", cvx)] {
                    let runs = run_replicates(batch, &method, &grid)?;
                    let mut losses: Vec<f64> = runs.iter().map(|r| r.summary.loss).collect();
                    losses.sort_by(|a, b| a.total_cmp(b));
                    let median = if losses.len() % 2 == 1 {
                        losses[losses.len() / 2]
                    } else {
                        0.5 * (losses[losses.len() / 2 - 1] + losses[losses.len() / 2])
                    };
                    sim.row(&[
                        f(delta),
                        f(sigma),
                        CsvCell::Str(label),
                        f(median),
                        i(replicates),
                    ]);
                    sim_points.push((delta, sigma, label, median));
                }
            }
        }
    }
    sim.write(&out.join("fig1_sim.csv"))?;

    for &delta in &deltas {
        let rows: Vec<_> = theory_rows.iter().filter(|r| r.0 == delta).collect();
        let line = |pick: fn(&(f64, f64, f64, f64, f64)) -> f64| -> Vec<(f64, f64)> {
            rows.iter().map(|r| (r.1, pick(r))).collect()
        };
        let mut series = vec![
            Series {
                label: "bayes".into(),
                color: "#2ca02c",
                points: line(|r| r.2),
                markers: false,
            },
            Series {
                label: "bayes-amp".into(),
                color: "#1f77b4",
                points: line(|r| r.3),
                markers: false,
            },
            Series {
                label: "convex bound".into(),
                color: "#d62728",
                points: line(|r| r.4),
                markers: false,
            },
        ];
        let amp_pts: Vec<(f64, f64)> = sim_points
            .iter()
            .filter(|s| s.0 == delta && s.2 == "amp")
            .map(|s| (s.1, s.3))
            .collect();
        let cvx_pts: Vec<(f64, f64)> = sim_points
            .iter()
            .filter(|s| s.0 == delta && s.2 == "cvx")
            .map(|s| (s.1, s.3))
            .collect();
        if !amp_pts.is_empty() {
            series.push(Series {
                label: "amp (sim)".into(),
                color: "#1f77b4",
                points: amp_pts,
                markers: true,
            });
        }
        if !cvx_pts.is_empty() {
            series.push(Series {
                label: "cvx (sim)".into(),
                color: "#d62728",
                points: cvx_pts,
                markers: true,
            });
        }
        let plot = Plot {
            title: format!("Median squared error, delta = {delta}"),
            x_label: "sigma".into(),
            y_label: "squared error".into(),
            series,
        };
        let name = format!("fig1_delta_{}.svg", delta.to_string().replace('.', "_"));
        plot.write(&out.join(name))?;
    }
    Ok(())
}
