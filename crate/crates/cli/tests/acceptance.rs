//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//! Tolerances and thresholds are pinned in the assertions.

use std::time::Instant;

use regap_core::channel::{ChannelCurve, ChannelGrid, GridConfig};
use regap_core::fixed_point::{
    effective_noises, snr_gap_bounds, ProblemParams, RiskCurve, SeparableOptCurve,
};
use regap_core::prox::laws::{check_firm_nonexpansive, check_lambda_continuity, check_lipschitz};
use regap_core::prox::{project_hull, HullSpec, ProxRule};
use regap_core::rng::stream_rng;
use regap_core::sim::amp::AmpMode;
use regap_core::sim::prox_grad::{StepRule, StopRule};
use regap_core::sim::NoiseMode;
use regap_core::tabfn::TabulatedMonotoneFn;
use regap_core::Prior;

use regap_cli::commands::simulate::{hull_spec_for, run_replicates, Batch, Method};

fn table1_prior() -> Prior {
    Prior::from_atoms(&[(0.0, 0.7), (0.2, 0.15), (1.0, 0.15)]).unwrap()
}

fn fig1_prior() -> Prior {
    Prior::from_atoms(&[(-1.0, 0.1), (0.0, 0.8), (1.0, 0.1)]).unwrap()
}

struct InfiniteCurve;
impl RiskCurve for InfiniteCurve {
    fn risk(&self, _tau: f64) -> regap_core::Result<f64> {
        Ok(f64::INFINITY)
    }
}

#[test]
fn criterion_1_table1_theory_convex() {
    let start = Instant::now();
    let prior = table1_prior();
    let params = ProblemParams::new(0.37, 0.0).unwrap();
    let cfg = GridConfig::for_problem(&prior, 0.37, 0.0);
    let grid = ChannelGrid::new(&prior, &cfg).unwrap();
    let r_opt = SeparableOptCurve::build(&prior, &grid).unwrap();
    let curve = ChannelCurve::build(&prior, grid).unwrap();
    let report = effective_noises(&prior, params, &curve, &r_opt).unwrap();
    let rel = report.risk_cvx / prior.variance();
    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        (rel - 0.18).abs() <= 0.015,
        "convex relative risk {rel} outside 0.18 +/- 0.015"
    );
    assert!(elapsed <= 300.0, "runtime {elapsed:.1}s exceeds 5 minutes");
    println!(
        "criterion 1 (table1 convex bound): PASS - delta tau_cvx^2 / Var = {rel:.4} (target 0.18 +/- 0.015), {elapsed:.1}s"
    );
}

#[test]
fn criterion_2_table1_theory_amp() {
    let prior = table1_prior();
    let params = ProblemParams::new(0.37, 0.0).unwrap();
    let cfg = GridConfig::for_problem(&prior, 0.37, 0.0);
    let grid = ChannelGrid::new(&prior, &cfg).unwrap();
    let curve = ChannelCurve::build(&prior, grid).unwrap();
    let report = effective_noises(&prior, params, &curve, &InfiniteCurve).unwrap();
    let var = prior.variance();
    let amp_risk = 0.37 * report.tau_alg_star_sq;
    assert!(
        amp_risk <= 1e-3 * var,
        "delta tau_alg*^2 = {amp_risk} above 1e-3 Var = {}",
        1e-3 * var
    );
    println!(
        "criterion 2 (table1 AMP bound): PASS - delta tau_alg*^2 = {amp_risk:.2e} <= {:.2e}",
        1e-3 * var
    );
}

#[test]
fn criterion_3_table1_simulation_desk() {
    let start = Instant::now();
    let prior = table1_prior();
    let params = ProblemParams::new(0.37, 0.0).unwrap();
    let p = 1000;
    let replicates = 20;
    let seed = 1u64;
    let cfg = GridConfig::for_problem(&prior, 0.37, 0.0);
    let grid = ChannelGrid::new(&prior, &cfg).unwrap();

    let batch = Batch {
        prior: &prior,
        params,
        p,
        noise: NoiseMode::Zero,
        replicates,
        seed,
        recovery_tol: 1e-10,
    };
    let amp = Method::Amp {
        mode: AmpMode::Empirical { damping: 0.8 },
        t_max: 150,
    };
    let amp_runs = run_replicates(batch, &amp, &grid).unwrap();
    let amp_recovered = amp_runs
        .iter()
        .filter(|r| r.summary.relative_loss < 1e-6)
        .count();

    let hull = Method::ProxGrad {
        rule: ProxRule::hull(hull_spec_for(&prior, p).unwrap()),
        step: StepRule::Fixed(0.1),
        accel: true,
        stop: StopRule {
            grad_norm_tol: 1e-10,
            max_iter: 6000,
        },
    };
    let hull_runs = run_replicates(batch, &hull, &grid).unwrap();
    let mut rels: Vec<f64> = hull_runs.iter().map(|r| r.summary.relative_loss).collect();
    rels.sort_by(|a, b| a.total_cmp(b));
    let median = 0.5 * (rels[9] + rels[10]);
    let elapsed = start.elapsed().as_secs_f64();

    assert!(
        amp_recovered >= 18,
        "AMP recovered only {amp_recovered}/20 replicates below 1e-6 relative loss"
    );
    assert!(
        (0.12..=0.25).contains(&median),
        "hull median relative loss {median} outside [0.12, 0.25]"
    );
    assert!(
        elapsed <= 1800.0,
        "runtime {elapsed:.1}s exceeds 30 minutes"
    );
    println!(
        "criterion 3 (table1 desk simulation): PASS - AMP recovery {amp_recovered}/20, hull median {median:.3} in [0.12, 0.25], {elapsed:.1}s"
    );
}

#[test]
fn criterion_4_fig1_theory_ordering() {
    let prior = fig1_prior();
    let var = prior.variance();
    let deltas = [0.45, 0.5, 0.6, 0.75];
    let sigmas: Vec<f64> = (0..31).map(|k| 0.05 + 1.2 * k as f64 / 30.0).collect();
    let cfg = GridConfig::for_problem(&prior, 0.45, 1.25);
    let grid = ChannelGrid::new(&prior, &cfg).unwrap();
    let r_opt = SeparableOptCurve::build(&prior, &grid).unwrap();
    let curve = ChannelCurve::build(&prior, grid).unwrap();

    let mut worst_amp_stat_075: f64 = 0.0;
    let mut worst_cvx_amp_045: f64 = 0.0;
    for &delta in &deltas {
        for &sigma in &sigmas {
            let params = ProblemParams::new(delta, sigma).unwrap();
            let rep = effective_noises(&prior, params, &curve, &r_opt).unwrap();
            assert!(
                rep.risk_stat <= rep.risk_alg_star + 1e-6 * var,
                "delta {delta} sigma {sigma}: R_stat {} > R_amp {}",
                rep.risk_stat,
                rep.risk_alg_star
            );
            assert!(
                rep.risk_alg_star <= rep.risk_cvx + 1e-6 * var,
                "delta {delta} sigma {sigma}: R_amp {} > R_cvx {}",
                rep.risk_alg_star,
                rep.risk_cvx
            );
            if delta == 0.75 {
                worst_amp_stat_075 =
                    worst_amp_stat_075.max((rep.risk_alg_star - rep.risk_stat).abs());
            }
            if delta == 0.45 {
                worst_cvx_amp_045 = worst_cvx_amp_045.max((rep.risk_cvx - rep.risk_alg_star).abs());
            }
        }
    }
    assert!(
        worst_amp_stat_075 <= 0.01 * var,
        "delta 0.75: |R_amp - R_stat| max {worst_amp_stat_075} above 1% Var"
    );
    assert!(
        worst_cvx_amp_045 <= 0.02 * var,
        "delta 0.45: |R_cvx - R_amp| max {worst_cvx_amp_045} above 2% Var"
    );
    println!(
        "criterion 4 (fig1 theory ordering): PASS - ordering holds on 4x31 grid; |R_amp-R_stat| at 0.75 = {:.2}% Var, |R_cvx-R_amp| at 0.45 = {:.2}% Var",
        100.0 * worst_amp_stat_075 / var,
        100.0 * worst_cvx_amp_045 / var
    );
}

#[test]
fn criterion_5_amp_state_evolution_tracking() {
    let prior = fig1_prior();
    let var = prior.variance();
    let params = ProblemParams::new(0.6, 0.3).unwrap();
    let cfg = GridConfig::for_problem(&prior, 0.6, 0.3);
    let grid = ChannelGrid::new(&prior, &cfg).unwrap();
    let se = regap_core::fixed_point::state_evolution(&prior, params, &grid, 11, 0.0).unwrap();

    let method = Method::Amp {
        mode: AmpMode::empirical(),
        t_max: 11,
    };
    let batch = Batch {
        prior: &prior,
        params,
        p: 2000,
        noise: NoiseMode::Sphere,
        replicates: 10,
        seed: 7,
        recovery_tol: 1e-10,
    };
    let runs = run_replicates(batch, &method, &grid).unwrap();
    let mut worst_median: f64 = 0.0;
    for t in 0..=10usize {
        let mut devs: Vec<f64> = runs
            .iter()
            .map(|r| {
                let m = regap_core::channel::mmse(&prior, se.tau_sq[t].sqrt(), &grid).unwrap();
                (r.trace.rows[t].loss - m).abs()
            })
            .collect();
        devs.sort_by(|a, b| a.total_cmp(b));
        let median = 0.5 * (devs[4] + devs[5]);
        assert!(
            median <= 0.05 * var,
            "t {t}: median |loss - mmse(tau_t^2)| = {median} above 0.05 Var = {}",
            0.05 * var
        );
        worst_median = worst_median.max(median);
    }
    println!(
        "criterion 5 (AMP tracks state evolution): PASS - worst median deviation {:.4} <= {:.4} (0.05 Var)",
        worst_median,
        0.05 * var
    );
}

#[test]
fn criterion_6_closed_form_oracles() {
    let prior = Prior::gaussian(1.0).unwrap();
    let cfg = GridConfig::for_problem(&prior, 1.0, 1.0);
    let grid = ChannelGrid::new(&prior, &cfg).unwrap();
    let curve = ChannelCurve::build(&prior, grid).unwrap();

    let mut worst_mmse: f64 = 0.0;
    let mut worst_mi: f64 = 0.0;
    for tau in [0.3, 0.7, 1.0, 1.6, 2.5] {
        let m = curve.mmse_at(&prior, tau).unwrap();
        worst_mmse = worst_mmse.max((m - tau * tau / (1.0 + tau * tau)).abs());
        let mi = curve.mutual_info(&prior, tau).unwrap();
        worst_mi = worst_mi.max((mi - 0.5 * (1.0 + 1.0 / (tau * tau)).ln()).abs());
    }
    assert!(worst_mmse <= 1e-3, "Gaussian mmse off by {worst_mmse}");
    assert!(
        worst_mi <= 1e-3,
        "Gaussian mutual information off by {worst_mi}"
    );

    let params = ProblemParams::new(1.0, 1.0).unwrap();
    let report = effective_noises(&prior, params, &curve, &InfiniteCurve).unwrap();
    let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
    let err = (report.tau_stat_sq - golden).abs();
    assert!(
        err <= 1e-3,
        "tau_stat^2 = {} vs golden ratio {golden}",
        report.tau_stat_sq
    );
    println!(
        "criterion 6 (closed-form oracles): PASS - mmse err {worst_mmse:.1e}, mi err {worst_mi:.1e}, golden-ratio err {err:.1e} (all <= 1e-3)"
    );
}

/// Exhaustive active-set QP oracle: enumerate active prefix constraints,
/// solve each equality-constrained projection, keep the feasible minimum.
fn qp_oracle(spec: &HullSpec, y_sorted: &[f64]) -> Vec<f64> {
    let p = y_sorted.len();
    let reference = spec.reference();
    let prefix_c: Vec<f64> = reference
        .iter()
        .scan(0.0, |acc, &v| {
            *acc += v;
            Some(*acc)
        })
        .collect();
    let prefix_y: Vec<f64> = y_sorted
        .iter()
        .scan(0.0, |acc, &v| {
            *acc += v;
            Some(*acc)
        })
        .collect();

    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0..(1u32 << (p - 1)) {
        let mut rows: Vec<usize> = (1..p).filter(|l| mask & (1 << (l - 1)) != 0).collect();
        rows.push(p);
        let k = rows.len();
        // (A A^T)_{ij} = min(l_i, l_j); rhs = A y - c.
        let mut m = vec![vec![0.0f64; k]; k];
        let mut rhs = vec![0.0f64; k];
        for i in 0..k {
            for j in 0..k {
                m[i][j] = rows[i].min(rows[j]) as f64;
            }
            rhs[i] = prefix_y[rows[i] - 1] - prefix_c[rows[i] - 1];
        }
        let Some(nu) = solve_dense(m, rhs) else {
            continue;
        };
        // b = y - A^T nu: coordinate j subtracts nu_l for every row l > j.
        let mut b = y_sorted.to_vec();
        for (i, &l) in rows.iter().enumerate() {
            for slot in b.iter_mut().take(l) {
                *slot -= nu[i];
            }
        }
        // True feasibility via order statistics.
        let mut sorted = b.clone();
        sorted.sort_by(|a, c| c.total_cmp(a));
        let mut acc = 0.0;
        let mut feasible = true;
        for (j, &v) in sorted.iter().enumerate() {
            acc += v;
            if j + 1 < p && acc > prefix_c[j] + 1e-9 {
                feasible = false;
                break;
            }
        }
        if (acc - prefix_c[p - 1]).abs() > 1e-9 {
            feasible = false;
        }
        if !feasible {
            continue;
        }
        let obj: f64 = y_sorted
            .iter()
            .zip(&b)
            .map(|(y, v)| (y - v) * (y - v))
            .sum();
        if best.as_ref().is_none_or(|(o, _)| obj < *o) {
            best = Some((obj, b));
        }
    }
    best.expect("the projection's own active set is always feasible")
        .1
}

fn solve_dense(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[r][col].abs() > m[piv][col].abs() {
                piv = r;
            }
        }
        if m[piv][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            let (head, tail) = m.split_at_mut(r);
            for (c, slot) in tail[0].iter_mut().enumerate().skip(col) {
                *slot -= f * head[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = b[r];
        for c in r + 1..n {
            acc -= m[r][c] * x[c];
        }
        x[r] = acc / m[r][r];
    }
    Some(x)
}

#[test]
fn criterion_7_projection_vs_qp_oracle() {
    use rand::Rng;
    let mut rng = stream_rng(2024, 0);
    let mut worst_coord: f64 = 0.0;
    let mut worst_feas: f64 = 0.0;
    let mut worst_cone: f64 = 0.0;
    for case in 0..1000 {
        // Random spec: strictly decreasing support, counts filling p <= 6.
        let x1: f64 = rng.gen_range(0.2..2.0);
        let x2: f64 = x1 - rng.gen_range(0.1..1.0);
        let x3: f64 = x2 - rng.gen_range(0.1..1.0);
        let k1 = rng.gen_range(1..=2usize);
        let k2 = rng.gen_range(1..=2usize);
        let k3 = rng.gen_range(1..=(6 - k1 - k2).max(1));
        let spec = HullSpec::new([x1, x2, x3], [k1, k2, k3]).unwrap();
        let p = spec.dim();
        let scale: f64 = rng.gen_range(0.5..3.0);
        let mut y: Vec<f64> = (0..p).map(|_| rng.gen_range(-scale..scale)).collect();
        y.sort_by(|a, b| b.total_cmp(a));

        let got = project_hull(&spec, &y).unwrap();
        let oracle = qp_oracle(&spec, &y);
        for (g, o) in got.iter().zip(&oracle) {
            worst_coord = worst_coord.max((g - o).abs());
        }
        assert!(
            got.iter().zip(&oracle).all(|(g, o)| (g - o).abs() <= 1e-8),
            "case {case}: projection {got:?} vs oracle {oracle:?} (spec {spec:?}, y {y:?})"
        );

        // Feasibility and normal-cone conditions at 1e-10 scale.
        let tol = 1e-10 * (1.0 + x1.abs().max(x3.abs()) + scale);
        let reference = spec.reference();
        let mut acc_b = 0.0;
        let mut acc_p = 0.0;
        for j in 0..p {
            acc_b += got[j];
            acc_p += reference[j];
            let violation = if j + 1 < p {
                acc_b - acc_p
            } else {
                (acc_b - acc_p).abs()
            };
            worst_feas = worst_feas.max(violation);
            assert!(
                violation <= tol,
                "case {case}: prefix violation {violation}"
            );
        }
        for j in 0..p - 1 {
            let drop = (y[j + 1] - got[j + 1]) - (y[j] - got[j]);
            worst_cone = worst_cone.max(drop);
            assert!(
                drop <= tol,
                "case {case}: normal cone monotonicity broken by {drop}"
            );
            if (y[j] - got[j]) - (y[j + 1] - got[j + 1]) > tol {
                let prefix_b: f64 = got[..=j].iter().sum();
                let prefix_p: f64 = reference[..=j].iter().sum();
                let gap = (prefix_b - prefix_p).abs();
                worst_feas = worst_feas.max(gap);
                assert!(
                    gap <= tol,
                    "case {case}: strict drop at loose prefix (gap {gap})"
                );
            }
        }
    }
    println!(
        "criterion 7 (projection vs QP oracle): PASS - 1000 cases, worst coord err {worst_coord:.1e} (<= 1e-8), worst feasibility {worst_feas:.1e}, worst cone slack {worst_cone:.1e} (<= 1e-10 scale)"
    );
}

#[test]
fn criterion_8_prox_law_suite() {
    let dim = 6;
    let kappa: Vec<f64> = (0..dim).map(|j| 1.5 - 0.2 * j as f64).collect();
    let tab =
        TabulatedMonotoneFn::sample(-8.0, 0.01, 1601, |x| x.signum() * (x.abs() - 0.7).max(0.0))
            .unwrap();
    let anchor = vec![0.3, -0.2, 0.0, 0.5, -1.0, 0.8];
    let rules: Vec<(&str, ProxRule)> = vec![
        ("zero", ProxRule::zero()),
        ("l1", ProxRule::l1(1.0, 0.4).unwrap()),
        ("ridge", ProxRule::ridge(0.5, 0.8).unwrap()),
        ("slope", ProxRule::slope(kappa, 0.6).unwrap()),
        (
            "hull",
            ProxRule::hull(HullSpec::new([1.0, 0.2, 0.0], [2, 1, 3]).unwrap()),
        ),
        ("tabulated", ProxRule::tabulated(tab, 0.7).unwrap()),
        (
            "oracle-wrapped",
            ProxRule::oracle_wrapped(ProxRule::l1(1.0, 1.0).unwrap(), 0.7, anchor, 0.9).unwrap(),
        ),
    ];
    let pairs = 10_000;
    for (i, (name, rule)) in rules.iter().enumerate() {
        let firm = check_firm_nonexpansive(rule, dim, pairs, 1e-10, 800 + i as u64).unwrap();
        assert_eq!(
            firm.violations, 0,
            "{name}: firm non-expansiveness {firm:?}"
        );
        let lip = check_lipschitz(rule, dim, pairs, 1e-10, 900 + i as u64).unwrap();
        assert_eq!(lip.violations, 0, "{name}: Lipschitz {lip:?}");
        let lam = check_lambda_continuity(rule, dim, pairs, 1e-10, 1000 + i as u64).unwrap();
        assert_eq!(lam.violations, 0, "{name}: lambda continuity {lam:?}");
    }
    println!(
        "criterion 8 (prox law suite): PASS - firm/Lipschitz/lambda-continuity on {pairs} pairs x {} rules, zero violations beyond 1e-10",
        rules.len()
    );
}

#[test]
fn criterion_9_low_snr_gap() {
    // Mean-zero skewed prior with nonzero third moment.
    let prior = Prior::from_atoms(&[(-1.0, 0.4), (0.0, 0.4), (2.0, 0.2)]).unwrap();
    let s2 = prior.second_moment();
    let s3 = prior.moment(3);
    assert!(prior.mean().abs() < 1e-15 && s3 != 0.0);
    let delta = 1.0;
    let bound = s2 * delta * delta * s3 * s3 / (2.0 * s2 * s2 * s2);

    let mut ratios = Vec::new();
    for snr in [0.01f64, 0.005] {
        let sigma = (s2 / snr).sqrt();
        let mut cfg = GridConfig::for_problem(&prior, delta, sigma);
        // The gap is O(snr^2); resolving it needs a finer window than default.
        cfg.n_intervals = 8000;
        cfg.mass_tail = 1e-4;
        let grid = ChannelGrid::new(&prior, &cfg).unwrap();
        let curve = ChannelCurve::build(&prior, grid).unwrap();
        let params = ProblemParams::new(delta, sigma).unwrap();
        let bounds = snr_gap_bounds(&prior, params, &curve).unwrap();
        let ratio = bounds.gap_estimate / (snr * snr);
        assert!(
            ratio <= 1.2 * bound,
            "snr {snr}: gap/snr^2 = {ratio} above 1.2 * {bound}"
        );
        ratios.push(ratio);
    }
    let change = (ratios[1] - ratios[0]) / ratios[0];
    assert!(
        ratios[1] <= ratios[0] || change.abs() <= 0.10,
        "ratio went from {} to {} (change {:.1}%)",
        ratios[0],
        ratios[1],
        100.0 * change
    );
    println!(
        "criterion 9 (low-SNR gap): PASS - gap/snr^2 = {:.4} -> {:.4} (bound {:.3}, change {:+.1}%)",
        ratios[0],
        ratios[1],
        1.2 * bound,
        100.0 * change
    );
}

#[test]
fn criterion_10_byte_identical_outputs() {
    let bin = env!("CARGO_BIN_EXE_regap");
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    std::fs::write(
        root.join("prior.txt"),
        "atom 0 0.7\natom 0.2 0.15\natom 1 0.15\n",
    )
    .unwrap();
    std::fs::write(
        root.join("theory.cfg"),
        "prior = prior.txt\ndelta = 0.37,0.6\nsigma = 0.0,0.3\nseed = 5\nn_taus = 200\nn_intervals = 400\n",
    )
    .unwrap();
    std::fs::write(
        root.join("sim.cfg"),
        "prior = prior.txt\ndelta = 0.5\nsigma = 0.2\np = 120\nreplicates = 3\nseed = 11\nmethod = amp,prox-grad\npenalty = l1 1.0\nlambda = 0.05\nnoise = sphere\nt_max = 30\nmax_iter = 400\n",
    )
    .unwrap();
    std::fs::write(root.join("hull.spec"), "x 1.0 0.2 0.0\nk 1 2 3\n").unwrap();
    std::fs::write(
        root.join("vectors.csv"),
        "y1,y2,y3,y4,y5,y6\n1.5,0.7,-0.2,0.0,0.3,0.9\n0.1,0.1,0.1,0.1,0.1,0.1\n",
    )
    .unwrap();

    let run = |label: &str| {
        let out = root.join(label);
        for (cmd, args) in [
            ("theory", vec!["--config", "theory.cfg"]),
            ("simulate", vec!["--config", "sim.cfg"]),
        ] {
            let status = std::process::Command::new(bin)
                .current_dir(root)
                .arg(cmd)
                .args(&args)
                .arg("--out")
                .arg(out.join(cmd))
                .status()
                .unwrap();
            assert!(status.success(), "{cmd} failed on pass {label}");
        }
        let status = std::process::Command::new(bin)
            .current_dir(root)
            .args([
                "project",
                "--spec",
                "hull.spec",
                "--in",
                "vectors.csv",
                "--out",
            ])
            .arg(out.join("projected.csv"))
            .status()
            .unwrap();
        assert!(status.success(), "project failed on pass {label}");
        out
    };

    let a = run("a");
    let b = run("b");
    let mut compared = 0;
    for rel in [
        "theory/curves.csv",
        "theory/noises.csv",
        "theory/phases.csv",
        "theory/ropt.csv",
        "simulate/traces.csv",
        "simulate/summary.csv",
        "projected.csv",
    ] {
        let fa = std::fs::read(a.join(rel)).unwrap();
        let fb = std::fs::read(b.join(rel)).unwrap();
        assert_eq!(fa, fb, "{rel} differs between identical runs");
        compared += 1;
    }
    println!(
        "criterion 10 (determinism): PASS - {compared} CSV outputs byte-identical across re-runs"
    );
}
