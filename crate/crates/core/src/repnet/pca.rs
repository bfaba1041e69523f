use nalgebra::{DMatrix, SymmetricEigen};

use super::network::Representation;
use crate::error::{Error, Result};

/// Centered projection onto the top-2 principal axes. Each axis is oriented so
/// that its largest-magnitude loading is positive; identical inputs project
/// to zeros.
pub fn pca_project(reps: &[Representation]) -> Result<Vec<[f64; 2]>> {
    if reps.len() < 3 {
        return Err(Error::validation(format!("PCA needs at least 3 representations, got {}", reps.len())));
    }
    let d = reps[0].dim();
    if reps.iter().any(|r| r.dim() != d) || d == 0 {
        return Err(Error::validation("representations of different dimensions"));
    }
    let n = reps.len();
    let mut x = DMatrix::from_fn(n, d, |i, j| reps[i].0[j]);
    let mean = x.row_mean();
    for mut row in x.row_iter_mut() {
        row -= &mean;
    }
    let scale = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(vec![[0.0, 0.0]; n]);
    }
    let cov = x.transpose() * &x / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut axes = Vec::with_capacity(2);
    for &k in order.iter().take(2) {
        let mut axis = eig.eigenvectors.column(k).into_owned();
        let lead = axis.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        if lead < 0.0 {
            axis = -axis;
        }
        // Directions with no variance contribute nothing.
        if eig.eigenvalues[k] <= 1e-14 * eig.eigenvalues[order[0]].max(f64::MIN_POSITIVE) {
            axis.fill(0.0);
        }
        axes.push(axis);
    }
    while axes.len() < 2 {
        axes.push(nalgebra::DVector::zeros(d));
    }
    Ok(x.row_iter()
        .map(|row| [(row * &axes[0])[(0, 0)], (row * &axes[1])[(0, 0)]])
        .collect())
}
