//! `regap simulate`: run estimators over seeded replicates and write
//! per-iteration traces plus a summary with median/min/max rows.

use std::path::Path;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use regap_core::channel::{ChannelGrid, GridConfig};
use regap_core::fixed_point::{effective_noises, ProblemParams};
use regap_core::optimal::{compute_lambda, reconstruct_penalty, solve_optimal_prox};
use regap_core::prox::{HullSpec, ProxRule};
use regap_core::sim::amp::{amp_run, AmpMode};
use regap_core::sim::prox_grad::{prox_grad_solve, StepRule, StopRule};
use regap_core::sim::{atom_counts, evaluate, generate_instance, NoiseMode, RunTrace, SimSummary};
use regap_core::Prior;

use super::build_theory;
use crate::config::RawConfig;
use crate::csvio::{b, f, i, CsvCell, CsvTable};

#[derive(Clone)]
pub enum Method {
    Amp {
        mode: AmpMode,
        t_max: usize,
    },
    ProxGrad {
        rule: ProxRule,
        step: StepRule,
        accel: bool,
        stop: StopRule,
    },
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Amp { .. } => "amp",
            Method::ProxGrad { .. } => "prox-grad",
        }
    }
}

/// The hull spec of the prior's exact atom counts at dimension p, in the
/// 1/sqrt(p) coordinates of the regression problem.
pub fn hull_spec_for(prior: &Prior, p: usize) -> Result<HullSpec> {
    let atoms = prior
        .atoms()
        .context("hull penalty needs a discrete prior")?;
    if atoms.len() > 3 {
        bail!("hull penalty supports at most 3 atoms");
    }
    let counts = atom_counts(prior, p)?;
    let root_p = (p as f64).sqrt();
    let mut support = [0.0; 3];
    let mut ks = [0usize; 3];
    // Levels in decreasing order of location.
    for (slot, (a, &c)) in atoms.iter().zip(&counts).rev().enumerate() {
        support[slot] = a.location / root_p;
        ks[slot] = c;
    }
    // Pad unused levels with strictly decreasing dummies and zero counts.
    for slot in atoms.len()..3 {
        support[slot] = support[slot - 1] - 1.0;
        ks[slot] = 0;
    }
    Ok(HullSpec::new(support, ks)?)
}

/// Solve the optimal separable rule at tau_cvx(delta, sigma) and package it
/// with its calibration and reconstructed penalty. The theory bundle is
/// taken by reference so sweeps can reuse one expensive curve build.
pub fn optimal_rule(
    bundle: &super::TheoryBundle,
    prior: &Prior,
    params: ProblemParams,
    grid_cfg: &GridConfig,
) -> Result<(ProxRule, f64)> {
    let rep = effective_noises(prior, params, &bundle.curve, bundle.r_opt.as_ref())?;
    let tau = rep.tau_cvx_sq.sqrt().max(grid_cfg.tau_floor);
    let grid = ChannelGrid::new(prior, grid_cfg)?;
    let sol = solve_optimal_prox(prior, tau, &grid)?;
    let cal = compute_lambda(&sol.prox_fn, prior, tau, params.delta, &grid)?;
    let rho = reconstruct_penalty(&sol.prox_fn, cal.lambda)?;
    Ok((
        ProxRule::tabulated_with_penalty(sol.prox_fn, rho, cal.lambda)?,
        tau,
    ))
}

fn parse_methods(
    cfg: &RawConfig,
    prior: &Prior,
    params: ProblemParams,
    p: usize,
) -> Result<Vec<Method>> {
    let mut methods = Vec::new();
    for name in cfg.get("method").unwrap_or("amp").split(',') {
        match name.trim() {
            "amp" => {
                let t_max = cfg.usize("t_max", 100)?;
                let mode = match cfg.get("amp_mode").unwrap_or("empirical") {
                    "empirical" => AmpMode::Empirical {
                        damping: cfg.f64("amp_damping", 1.0)?,
                    },
                    "truncated" => {
                        let m = cfg.f64("trunc_m", 10.0 * prior.support_scale(1e-3))?;
                        AmpMode::Truncated { m }
                    }
                    other => bail!("unknown amp_mode `{other}`"),
                };
                methods.push(Method::Amp { mode, t_max });
            }
            "prox-grad" => {
                let lambda = cfg.f64("lambda", 1.0)?;
                let rule = match cfg.get("penalty").unwrap_or("zero") {
                    "zero" => ProxRule::zero(),
                    "hull" => ProxRule::hull(hull_spec_for(prior, p)?),
                    "optimal" => {
                        let grid_cfg = cfg.grid_config(prior, &[params.delta], &[params.sigma])?;
                        let bundle = build_theory(prior, &grid_cfg)?;
                        optimal_rule(&bundle, prior, params, &grid_cfg)?.0
                    }
                    spec => ProxRule::parse_record(&format!("{spec} lambda {lambda}"))?,
                };
                let step = match cfg.get("step").unwrap_or("auto") {
                    "auto" => StepRule::Auto,
                    v => StepRule::Fixed(v.parse().context("bad `step`")?),
                };
                methods.push(Method::ProxGrad {
                    rule,
                    step,
                    accel: cfg.bool("accel", true)?,
                    stop: StopRule {
                        grad_norm_tol: cfg.f64("grad_tol", 1e-10)?,
                        max_iter: cfg.usize("max_iter", 20_000)?,
                    },
                });
            }
            other => bail!("unknown method `{other}`"),
        }
    }
    Ok(methods)
}

pub struct ReplicateRun {
    pub trace: RunTrace,
    pub summary: SimSummary,
}

/// One batch of seeded replicates: instance seeds are `seed + index`.
#[derive(Clone, Copy)]
pub struct Batch<'a> {
    pub prior: &'a Prior,
    pub params: ProblemParams,
    pub p: usize,
    pub noise: NoiseMode,
    pub replicates: usize,
    pub seed: u64,
    pub recovery_tol: f64,
}

/// Run one method over the batch; replicates execute in parallel, results
/// are ordered by index.
pub fn run_replicates(
    batch: Batch<'_>,
    method: &Method,
    grid: &ChannelGrid,
) -> Result<Vec<ReplicateRun>> {
    (0..batch.replicates)
        .into_par_iter()
        .map(|rep| {
            let inst = generate_instance(
                batch.prior,
                batch.params,
                batch.p,
                batch.noise,
                batch.seed.wrapping_add(rep as u64),
            )?;
            let trace = match method {
                Method::Amp { mode, t_max } => amp_run(&inst, *mode, *t_max, grid)?,
                Method::ProxGrad {
                    rule,
                    step,
                    accel,
                    stop,
                } => prox_grad_solve(&inst, rule, *step, *accel, *stop)?,
            };
            let summary = evaluate(&trace, &inst, batch.recovery_tol);
            Ok(ReplicateRun { trace, summary })
        })
        .collect::<regap_core::Result<Vec<_>>>()
        .map_err(Into::into)
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

pub fn run(cfg: &RawConfig, out: &Path, seed: u64) -> Result<()> {
    let prior = cfg.prior()?;
    let deltas = cfg.grid("delta")?.context("simulate needs `delta`")?;
    let sigmas = cfg.grid("sigma")?.context("simulate needs `sigma`")?;
    if deltas.len() != 1 || sigmas.len() != 1 {
        bail!("simulate expects scalar `delta` and `sigma` (use reproduce for sweeps)");
    }
    let params = ProblemParams::new(deltas[0], sigmas[0])?;
    let p = cfg.usize("p", 1000)?;
    let replicates = cfg.usize("replicates", 20)?;
    let noise = cfg.noise_mode()?;
    let recovery_tol = cfg.f64("recovery_tol", regap_core::sim::RECOVERY_TOL)?;
    let methods = parse_methods(cfg, &prior, params, p)?;
    let grid_cfg = cfg.grid_config(&prior, &deltas, &sigmas)?;
    let grid = ChannelGrid::new(&prior, &grid_cfg)?;

    let mut traces = CsvTable::new(&["method", "replicate", "t", "objective", "grad_norm", "loss"]);
    let mut summary = CsvTable::new(&[
        "method",
        "replicate",
        "loss",
        "relative_loss",
        "recovered",
        "iterations",
    ]);

    let batch = Batch {
        prior: &prior,
        params,
        p,
        noise,
        replicates,
        seed,
        recovery_tol,
    };
    for method in &methods {
        let runs = run_replicates(batch, method, &grid)?;
        for (rep, run) in runs.iter().enumerate() {
            for row in &run.trace.rows {
                traces.row(&[
                    CsvCell::Str(method.label()),
                    i(rep),
                    i(row.t),
                    f(row.objective),
                    row.grad_norm.map_or(CsvCell::Empty, CsvCell::Float),
                    f(row.loss),
                ]);
            }
            summary.row(&[
                CsvCell::Str(method.label()),
                i(rep),
                f(run.summary.loss),
                f(run.summary.relative_loss),
                b(run.summary.recovered),
                i(run.summary.iterations),
            ]);
        }
        // Aggregates: medians/extremes of the loss columns; `recovered`
        // becomes the fraction of recovered replicates.
        let mut losses: Vec<f64> = runs.iter().map(|r| r.summary.loss).collect();
        let mut rels: Vec<f64> = runs.iter().map(|r| r.summary.relative_loss).collect();
        let mut iters: Vec<f64> = runs.iter().map(|r| r.summary.iterations as f64).collect();
        losses.sort_by(|a, c| a.total_cmp(c));
        rels.sort_by(|a, c| a.total_cmp(c));
        iters.sort_by(|a, c| a.total_cmp(c));
        let frac =
            runs.iter().filter(|r| r.summary.recovered).count() as f64 / replicates.max(1) as f64;
        for (tag, loss, rel) in [
            ("median", median(&losses), median(&rels)),
            ("min", losses[0], rels[0]),
            ("max", losses[losses.len() - 1], rels[rels.len() - 1]),
        ] {
            summary.row(&[
                CsvCell::Str(method.label()),
                CsvCell::Str(tag),
                f(loss),
                f(rel),
                f(frac),
                f(median(&iters)),
            ]);
        }
    }
    traces.write(&out.join("traces.csv"))?;
    summary.write(&out.join("summary.csv"))?;
    Ok(())
}
