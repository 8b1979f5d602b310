//! Proximal operator of the ordered weighted L1 norm
//! `rho(b) = sum_j w_j |b|_(j)` with non-increasing weights.
//!
//! On sorted magnitudes the problem is an isotonic projection of
//! `|y|_(j) - w_j` onto the non-increasing cone followed by a positive part,
//! solved with a single monotone pooling pass.

/// Weights must be non-increasing, non-negative, and match `y` in length.
pub fn owl_prox(y: &[f64], weights: &[f64]) -> Vec<f64> {
    debug_assert_eq!(y.len(), weights.len());
    let p = y.len();
    if p == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| y[b].abs().total_cmp(&y[a].abs()));

    // Pool adjacent violators on v = |y|_sorted - w.
    // Stack blocks carry (sum, len); block means must end up non-increasing.
    let mut sums: Vec<f64> = Vec::with_capacity(p);
    let mut lens: Vec<usize> = Vec::with_capacity(p);
    for (rank, &idx) in order.iter().enumerate() {
        let mut sum = y[idx].abs() - weights[rank];
        let mut len = 1usize;
        while let (Some(&ps), Some(&pl)) = (sums.last(), lens.last()) {
            if ps / pl as f64 <= sum / len as f64 {
                sum += ps;
                len += pl;
                sums.pop();
                lens.pop();
            } else {
                break;
            }
        }
        sums.push(sum);
        lens.push(len);
    }

    let mut out = vec![0.0; p];
    let mut rank = 0;
    for (sum, len) in sums.iter().zip(&lens) {
        let value = (sum / *len as f64).max(0.0);
        for _ in 0..*len {
            let idx = order[rank];
            out[idx] = if value > 0.0 {
                value * y[idx].signum()
            } else {
                0.0
            };
            rank += 1;
        }
    }
    out
}
