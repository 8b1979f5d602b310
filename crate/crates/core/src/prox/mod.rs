//! Vector proximal operators for the penalty families: separable rules,
//! SLOPE/OWL, the permutation-hull indicator, tabulated scalar rules, and
//! oracle-wrapped penalties.

pub mod hull;
pub mod laws;
pub mod slope;
pub mod width;

use crate::error::{Error, Result};
use crate::tabfn::{TabulatedFn, TabulatedMonotoneFn};

pub use hull::{project_hull, HullSpec};

/// A penalty family member. The scalar ones act coordinatewise; `Tabulated`
/// applies its function in `sqrt(p)`-scaled coordinates, matching the
/// normalization under which it was solved.
#[derive(Debug, Clone)]
pub enum Penalty {
    Zero,
    L1 {
        weight: f64,
    },
    Ridge {
        weight: f64,
    },
    Slope {
        kappa: Vec<f64>,
    },
    HullIndicator(HullSpec),
    Tabulated {
        prox_fn: TabulatedMonotoneFn,
        /// Reconstructed scalar penalty (per unit lambda), when available.
        /// Needed only to evaluate objectives, not to apply the prox.
        penalty: Option<TabulatedFn>,
    },
    OracleWrapped {
        base: Box<ProxRule>,
        gamma: f64,
        anchor: Vec<f64>,
    },
}

/// A penalty plus its regularization level: evaluating the rule on `y`
/// returns `prox[lambda * rho](y)`.
#[derive(Debug, Clone)]
pub struct ProxRule {
    pub penalty: Penalty,
    pub lambda: f64,
}

impl ProxRule {
    pub fn new(penalty: Penalty, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Config(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        match &penalty {
            Penalty::L1 { weight } | Penalty::Ridge { weight } => {
                if !(*weight >= 0.0) {
                    return Err(Error::Config("penalty weight must be non-negative".into()));
                }
            }
            Penalty::Slope { kappa } => {
                if kappa.is_empty() {
                    return Err(Error::Config("slope weights must be non-empty".into()));
                }
                if kappa.iter().any(|k| *k < 0.0) || kappa.windows(2).any(|w| w[0] < w[1]) {
                    return Err(Error::Config(
                        "slope weights must be non-increasing and non-negative".into(),
                    ));
                }
            }
            Penalty::OracleWrapped { gamma, .. } if !(*gamma > 0.0) => {
                return Err(Error::Config("oracle gamma must be positive".into()));
            }
            _ => {}
        }
        Ok(ProxRule { penalty, lambda })
    }

    pub fn zero() -> Self {
        ProxRule {
            penalty: Penalty::Zero,
            lambda: 0.5,
        }
    }

    pub fn l1(weight: f64, lambda: f64) -> Result<Self> {
        Self::new(Penalty::L1 { weight }, lambda)
    }

    pub fn ridge(weight: f64, lambda: f64) -> Result<Self> {
        Self::new(Penalty::Ridge { weight }, lambda)
    }

    pub fn slope(kappa: Vec<f64>, lambda: f64) -> Result<Self> {
        Self::new(Penalty::Slope { kappa }, lambda)
    }

    pub fn hull(spec: HullSpec) -> Self {
        ProxRule {
            penalty: Penalty::HullIndicator(spec),
            lambda: 1.0,
        }
    }

    pub fn tabulated(prox_fn: TabulatedMonotoneFn, lambda: f64) -> Result<Self> {
        Self::new(
            Penalty::Tabulated {
                prox_fn,
                penalty: None,
            },
            lambda,
        )
    }

    pub fn tabulated_with_penalty(
        prox_fn: TabulatedMonotoneFn,
        penalty: TabulatedFn,
        lambda: f64,
    ) -> Result<Self> {
        Self::new(
            Penalty::Tabulated {
                prox_fn,
                penalty: Some(penalty),
            },
            lambda,
        )
    }

    pub fn oracle_wrapped(
        base: ProxRule,
        gamma: f64,
        anchor: Vec<f64>,
        lambda: f64,
    ) -> Result<Self> {
        Self::new(
            Penalty::OracleWrapped {
                base: Box::new(base),
                gamma,
                anchor,
            },
            lambda,
        )
    }

    /// Strong-convexity parameter of `rho` (per unit lambda).
    pub fn strong_convexity(&self) -> f64 {
        match &self.penalty {
            Penalty::Ridge { weight } => 2.0 * weight,
            Penalty::OracleWrapped { base, gamma, .. } => {
                gamma + base.lambda * base.strong_convexity()
            }
            _ => 0.0,
        }
    }

    /// `prox[lambda * rho](y)`.
    pub fn prox(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.prox_scaled(1.0, y)
    }

    /// `prox[c * lambda * rho](y)`, the step-scaled proximal map used inside
    /// gradient solvers.
    pub fn prox_scaled(&self, c: f64, y: &[f64]) -> Result<Vec<f64>> {
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("prox input must be finite".into()));
        }
        let eff = c * self.lambda;
        match &self.penalty {
            Penalty::Zero => Ok(y.to_vec()),
            Penalty::L1 { weight } => {
                let t = eff * weight;
                Ok(y.iter()
                    .map(|&v| v.signum() * (v.abs() - t).max(0.0))
                    .collect())
            }
            Penalty::Ridge { weight } => {
                let s = 1.0 / (1.0 + 2.0 * eff * weight);
                Ok(y.iter().map(|&v| s * v).collect())
            }
            Penalty::Slope { kappa } => {
                if kappa.len() != y.len() {
                    return Err(Error::Dimension {
                        expected: kappa.len(),
                        got: y.len(),
                    });
                }
                let w: Vec<f64> = kappa.iter().map(|k| eff * k).collect();
                Ok(slope::owl_prox(y, &w))
            }
            Penalty::HullIndicator(spec) => hull::project_hull(spec, y),
            Penalty::Tabulated { prox_fn, .. } => {
                let root_p = (y.len() as f64).sqrt();
                if c == 1.0 {
                    Ok(y.iter()
                        .map(|&v| prox_fn.eval(root_p * v) / root_p)
                        .collect())
                } else {
                    Ok(y.iter()
                        .map(|&v| tabulated_step_prox(prox_fn, c, root_p * v) / root_p)
                        .collect())
                }
            }
            Penalty::OracleWrapped {
                base,
                gamma,
                anchor,
            } => {
                if anchor.len() != y.len() {
                    return Err(Error::Dimension {
                        expected: anchor.len(),
                        got: y.len(),
                    });
                }
                let lg = eff * gamma;
                let shifted: Vec<f64> = y
                    .iter()
                    .zip(anchor)
                    .map(|(&v, &a)| (lg * a + v) / (lg + 1.0))
                    .collect();
                // prox[c lam (rho_b + g/2 ||.-a||^2)](y)
                //   = prox[(c lam)/(c lam g + 1) rho_b]((c lam g a + y)/(c lam g + 1)).
                base.prox_scaled(eff / ((lg + 1.0) * base.lambda), &shifted)
            }
        }
    }

    /// `lambda * rho(beta)` when the penalty value is computable
    /// (`None` for tabulated rules without a reconstructed penalty).
    pub fn penalty_value(&self, beta: &[f64]) -> Option<f64> {
        match &self.penalty {
            Penalty::Zero => Some(0.0),
            Penalty::L1 { weight } => {
                Some(self.lambda * weight * beta.iter().map(|v| v.abs()).sum::<f64>())
            }
            Penalty::Ridge { weight } => {
                Some(self.lambda * weight * beta.iter().map(|v| v * v).sum::<f64>())
            }
            Penalty::Slope { kappa } => {
                let mut mags: Vec<f64> = beta.iter().map(|v| v.abs()).collect();
                mags.sort_by(|a, b| b.total_cmp(a));
                Some(self.lambda * mags.iter().zip(kappa).map(|(m, k)| m * k).sum::<f64>())
            }
            Penalty::HullIndicator(spec) => {
                let mut sorted = beta.to_vec();
                sorted.sort_by(|a, b| b.total_cmp(a));
                let (viol, gap) = hull::membership_residuals(spec, &sorted);
                let scale = spec.reference().iter().map(|x| x.abs()).fold(1.0, f64::max);
                if viol <= 1e-8 * scale && gap.abs() <= 1e-8 * scale {
                    Some(0.0)
                } else {
                    Some(f64::INFINITY)
                }
            }
            Penalty::Tabulated { penalty, .. } => penalty.as_ref().map(|rho| {
                let p = beta.len() as f64;
                let root_p = p.sqrt();
                self.lambda / p * beta.iter().map(|&v| rho.eval(root_p * v)).sum::<f64>()
            }),
            Penalty::OracleWrapped {
                base,
                gamma,
                anchor,
            } => {
                let quad: f64 = beta
                    .iter()
                    .zip(anchor)
                    .map(|(&b, &a)| (b - a) * (b - a))
                    .sum();
                base.penalty_value(beta)
                    .map(|v| self.lambda * (v + 0.5 * gamma * quad))
            }
        }
    }

    /// Plain-text record, e.g. `l1 1 lambda 0.5`. Tabulated and
    /// oracle-wrapped rules are runtime constructions and have no record form.
    pub fn to_record(&self) -> Option<String> {
        let head = match &self.penalty {
            Penalty::Zero => "zero".to_string(),
            Penalty::L1 { weight } => format!("l1 {weight}"),
            Penalty::Ridge { weight } => format!("ridge {weight}"),
            Penalty::Slope { kappa } => format!(
                "slope {}",
                kappa
                    .iter()
                    .map(|k| k.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            Penalty::HullIndicator(spec) => {
                let mut xs = Vec::new();
                for &(x, k) in spec.levels() {
                    xs.push(format!("{x}:{k}"));
                }
                format!("hull {}", xs.join(","))
            }
            Penalty::Tabulated { .. } | Penalty::OracleWrapped { .. } => return None,
        };
        Some(format!("{head} lambda {}", self.lambda))
    }

    pub fn parse_record(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split_whitespace().collect();
        let lambda = match parts.iter().position(|p| *p == "lambda") {
            Some(i) if i + 1 < parts.len() => parts[i + 1]
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad lambda: {e}")))?,
            _ => 1.0,
        };
        let arg = parts.get(1).copied().unwrap_or("");
        let num = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|e| Error::Parse(format!("bad number `{s}`: {e}")))
        };
        match parts.first().copied() {
            Some("zero") => Ok(ProxRule {
                penalty: Penalty::Zero,
                lambda,
            }),
            Some("l1") => ProxRule::l1(num(arg)?, lambda),
            Some("ridge") => ProxRule::ridge(num(arg)?, lambda),
            Some("slope") => {
                let kappa = arg.split(',').map(num).collect::<Result<Vec<f64>>>()?;
                ProxRule::slope(kappa, lambda)
            }
            Some("hull") => {
                let mut xs = [0.0; 3];
                let mut ks = [0usize; 3];
                for (i, pair) in arg.split(',').enumerate() {
                    if i >= 3 {
                        return Err(Error::Parse("hull record has more than 3 levels".into()));
                    }
                    let (x, k) = pair
                        .split_once(':')
                        .ok_or_else(|| Error::Parse(format!("bad hull level `{pair}`")))?;
                    xs[i] = num(x)?;
                    ks[i] = k
                        .parse()
                        .map_err(|e| Error::Parse(format!("bad hull count: {e}")))?;
                }
                for i in arg.split(',').count()..3 {
                    xs[i] = xs[i.saturating_sub(1)] - 1.0 - i as f64;
                }
                Ok(ProxRule::hull(HullSpec::new(xs, ks)?))
            }
            other => Err(Error::Parse(format!("unknown penalty record {other:?}"))),
        }
    }
}

/// `prox[c * lambda * rho](z)` for a tabulated rule in scalar coordinates.
///
/// With knots `s_k = fn(x_k)` and `lambda rho'(s_k) = x_k - s_k`, the prox at
/// step scale `c` inverts the monotone map `s + c (x(s) - s)`, whose knots
/// are `z_k = (1-c) s_k + c x_k`.
fn tabulated_step_prox(f: &TabulatedMonotoneFn, c: f64, z: f64) -> f64 {
    let values = f.values();
    let n = values.len();
    let knot_z = |k: usize| (1.0 - c) * values[k] + c * f.x(k);
    let (slope_lo, slope_hi) = f.extrapolation_slopes();
    let step_slope = |s: f64| {
        if s > 0.0 {
            s / (s + c * (1.0 - s))
        } else {
            0.0
        }
    };
    if z <= knot_z(0) {
        return values[0] + step_slope(slope_lo) * (z - knot_z(0));
    }
    if z >= knot_z(n - 1) {
        return values[n - 1] + step_slope(slope_hi) * (z - knot_z(n - 1));
    }
    // Binary search on the increasing knot positions.
    let (mut lo, mut hi) = (0usize, n - 1);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if knot_z(mid) <= z {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (z0, z1) = (knot_z(lo), knot_z(hi));
    let frac = if z1 > z0 { (z - z0) / (z1 - z0) } else { 0.0 };
    values[lo] + frac * (values[hi] - values[lo])
}
