//! Euclidean projection onto the convex hull of all vectors sharing a fixed
//! three-level empirical distribution. The hull is cut out by sorted
//! prefix-sum constraints plus a total-sum equality, and the projection of a
//! sorted input reduces to one or two scalar clamp equations.

use crate::error::{Error, Result};

/// A three-level support with multiplicities; zero counts collapse the level.
#[derive(Debug, Clone)]
pub struct HullSpec {
    /// `(value, count)` levels, values strictly decreasing, counts >= 1.
    levels: Vec<(f64, usize)>,
    p: usize,
}

impl HullSpec {
    /// `support` in strictly decreasing order, one count per level.
    /// Levels with count zero are dropped; at least one must survive.
    pub fn new(support: [f64; 3], counts: [usize; 3]) -> Result<Self> {
        if support.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::Config(
                "hull support values must be strictly decreasing".into(),
            ));
        }
        if support.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("hull support values must be finite".into()));
        }
        let levels: Vec<(f64, usize)> = support
            .iter()
            .zip(counts.iter())
            .filter(|(_, &k)| k > 0)
            .map(|(&x, &k)| (x, k))
            .collect();
        if levels.is_empty() {
            return Err(Error::Config("hull spec has no positive counts".into()));
        }
        let p = levels.iter().map(|&(_, k)| k).sum();
        Ok(HullSpec { levels, p })
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn levels(&self) -> &[(f64, usize)] {
        &self.levels
    }

    /// The sorted (non-increasing) reference vector.
    pub fn reference(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.p);
        for &(x, k) in &self.levels {
            out.extend(std::iter::repeat_n(x, k));
        }
        out
    }

    pub fn total(&self) -> f64 {
        self.levels.iter().map(|&(x, k)| x * k as f64).sum()
    }

    /// Parse records of the form `x <v1> <v2> <v3>` and `k <c1> <c2> <c3>`.
    pub fn parse_records(text: &str) -> Result<Self> {
        let mut support: Option<[f64; 3]> = None;
        let mut counts: Option<[usize; 3]> = None;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("x") => {
                    let vals: Vec<f64> = parts
                        .map(|s| {
                            s.parse()
                                .map_err(|e| Error::Parse(format!("bad support: {e}")))
                        })
                        .collect::<Result<_>>()?;
                    if vals.len() != 3 {
                        return Err(Error::Parse("`x` record needs 3 values".into()));
                    }
                    support = Some([vals[0], vals[1], vals[2]]);
                }
                Some("k") => {
                    let vals: Vec<usize> = parts
                        .map(|s| {
                            s.parse()
                                .map_err(|e| Error::Parse(format!("bad count: {e}")))
                        })
                        .collect::<Result<_>>()?;
                    if vals.len() != 3 {
                        return Err(Error::Parse("`k` record needs 3 values".into()));
                    }
                    counts = Some([vals[0], vals[1], vals[2]]);
                }
                Some(other) => return Err(Error::Parse(format!("unknown hull record `{other}`"))),
                None => {}
            }
        }
        match (support, counts) {
            (Some(x), Some(k)) => HullSpec::new(x, k),
            _ => Err(Error::Parse("hull spec needs `x` and `k` records".into())),
        }
    }

    pub fn to_records(&self) -> String {
        let mut xs = [0.0; 3];
        let mut ks = [0usize; 3];
        for (i, &(x, k)) in self.levels.iter().enumerate() {
            xs[i] = x;
            ks[i] = k;
        }
        // Pad collapsed levels with strictly smaller dummies and zero counts.
        for i in self.levels.len()..3 {
            xs[i] = xs[i - 1] - 1.0;
            ks[i] = 0;
        }
        format!(
            "x {} {} {}\nk {} {} {}\n",
            xs[0], xs[1], xs[2], ks[0], ks[1], ks[2]
        )
    }
}

/// Solve `sum_j clamp(y_j - t, lo, hi) = target` for `t`.
///
/// The left side is non-increasing piecewise linear in `t`. The exact
/// solution set is located by a breakpoint sweep; when it is an interval the
/// midpoint is returned (clamped terms make the projection invariant on it).
pub fn solve_clamp_sum(y: &[f64], lo: f64, hi: f64, target: f64) -> f64 {
    debug_assert!(hi > lo);
    let n = y.len();
    // Events: at t = y_j - hi the term starts decreasing, at t = y_j - lo it stops.
    let mut events: Vec<(f64, f64)> = Vec::with_capacity(2 * n);
    for &v in y {
        events.push((v - hi, -1.0));
        events.push((v - lo, 1.0));
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    let f_max = n as f64 * hi;
    let f_min = n as f64 * lo;
    if target >= f_max {
        // All terms clamp at `hi` for any t up to the first breakpoint;
        // return that finite endpoint of the solution interval.
        return events[0].0;
    }
    if target <= f_min {
        return events[2 * n - 1].0;
    }

    // One sweep finds a = inf{t : f(t) <= target} and b = sup{t : f(t) >= target}.
    let mut slope = 0.0;
    let mut f_prev = f_max;
    let mut t_prev = events[0].0;
    let mut a: Option<f64> = None;
    let mut b = events[0].0;
    for &(t, ds) in &events {
        let f_now = f_prev + slope * (t - t_prev);
        if a.is_none() && f_now <= target {
            // First touch happens inside this segment, where slope < 0.
            a = Some(t_prev + (target - f_prev) / slope);
        }
        if f_prev >= target {
            b = if f_now >= target {
                t
            } else {
                t_prev + (target - f_prev) / slope
            };
        }
        f_prev = f_now;
        t_prev = t;
        slope += ds;
    }
    let a = a.expect("target strictly inside the range of f");
    0.5 * (a + b)
}

/// Projection of `y` onto the hull. Sorts internally and undoes the
/// permutation, so the input need not be ordered.
pub fn project_hull(spec: &HullSpec, y: &[f64]) -> Result<Vec<f64>> {
    if y.len() != spec.dim() {
        return Err(Error::Dimension {
            expected: spec.dim(),
            got: y.len(),
        });
    }
    let p = y.len();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| y[b].total_cmp(&y[a]));
    let sorted: Vec<f64> = order.iter().map(|&i| y[i]).collect();

    let b_sorted = project_sorted(spec, &sorted);

    let mut out = vec![0.0; p];
    for (rank, &i) in order.iter().enumerate() {
        out[i] = b_sorted[rank];
    }
    Ok(out)
}

/// Projection of an already non-increasing `y`.
pub fn project_sorted(spec: &HullSpec, y: &[f64]) -> Vec<f64> {
    let levels = spec.levels();
    match levels.len() {
        1 => vec![levels[0].0; spec.dim()],
        2 => {
            let (x_hi, _) = levels[0];
            let (x_lo, _) = levels[1];
            let t = solve_clamp_sum(y, x_lo, x_hi, spec.total());
            y.iter().map(|&v| (v - t).clamp(x_lo, x_hi)).collect()
        }
        3 => {
            let (x1, k1) = levels[0];
            let (x2, k2) = levels[1];
            let (x3, _) = levels[2];
            let head = &y[..k1 + k2];
            let tail = &y[k1..];
            let t1 = solve_clamp_sum(head, x2, x1, x1 * k1 as f64 + x2 * k2 as f64);
            let t2 = solve_clamp_sum(tail, x3, x2, spec.total() - x1 * k1 as f64);
            if t1 >= t2 {
                y.iter()
                    .map(|&v| ((v - t1).clamp(x2, x1)).min((v - t2).max(x3)))
                    .collect()
            } else {
                let t = solve_clamp_sum(y, x3, x1, spec.total());
                y.iter().map(|&v| (v - t).clamp(x3, x1)).collect()
            }
        }
        _ => unreachable!("hull specs have 1..=3 levels"),
    }
}

/// Largest prefix-sum violation and the total-sum gap of sorted `b`
/// against the hull constraints (both should be ~0 for members).
pub fn membership_residuals(spec: &HullSpec, b_sorted: &[f64]) -> (f64, f64) {
    let reference = spec.reference();
    let mut prefix_b = 0.0;
    let mut prefix_p = 0.0;
    let mut worst: f64 = f64::NEG_INFINITY;
    for j in 0..b_sorted.len() - 1 {
        prefix_b += b_sorted[j];
        prefix_p += reference[j];
        worst = worst.max(prefix_b - prefix_p);
    }
    let sum_gap = prefix_b + b_sorted[b_sorted.len() - 1] - spec.total();
    (worst.max(0.0), sum_gap)
}
