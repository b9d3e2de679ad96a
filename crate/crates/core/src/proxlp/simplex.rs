use crate::model::LabelScores;

/// Euclidean projection of one row onto the probability simplex, in place.
pub fn project_row(row: &mut [f64]) {
    let theta = simplex_threshold(row);
    for v in row.iter_mut() {
        *v = (*v - theta).max(0.0);
    }
}

/// Threshold `theta` with `sum_i max(z_i - theta, 0) = 1`.
pub fn simplex_threshold(row: &[f64]) -> f64 {
    let mut sorted: Vec<f64> = row.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    theta
}

/// Per-pixel Euclidean projection onto the probability simplex.
pub fn project_simplex(y: &LabelScores) -> LabelScores {
    let mut out = y.clone();
    for a in 0..out.n() {
        project_row(out.row_mut(a));
    }
    out
}
