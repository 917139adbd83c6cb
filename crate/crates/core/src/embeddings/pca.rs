use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};

/// Eigenvalues below this fraction of the largest one count as zero rank.
const RANK_TOLERANCE: f64 = 1e-10;

/// Centering mean plus orthonormal principal axes (one per row).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaProjection {
    pub mean: Vec<f64>,
    pub components: Matrix,
    /// Covariance eigenvalue of each component, descending.
    pub explained_variance: Vec<f64>,
}

impl PcaProjection {
    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn n_components(&self) -> usize {
        self.components.rows()
    }

    /// `components · (v − mean)`
    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.input_dim() {
            return Err(Error::Dimension(format!(
                "projection expects dim {}, got {}",
                self.input_dim(),
                v.len()
            )));
        }
        let centered: Vec<f64> = v.iter().zip(&self.mean).map(|(x, m)| x - m).collect();
        Ok((0..self.n_components())
            .map(|k| dot(self.components.row(k), &centered))
            .collect())
    }

    /// `mean + componentsᵀ · y`
    pub fn reconstruct(&self, y: &[f64]) -> Vec<f64> {
        let mut out = self.components.matvec_t(y);
        for (o, m) in out.iter_mut().zip(&self.mean) {
            *o += m;
        }
        out
    }
}

/// Principal components from the eigendecomposition of the sample
/// covariance of centered data.
///
/// Components are sorted by descending eigenvalue and signed so that the
/// largest-magnitude coordinate of each is positive.
pub fn fit_pca(vectors: &[Vec<f64>], n_components: usize) -> Result<PcaProjection> {
    let n = vectors.len();
    let dim = vectors.first().map_or(0, Vec::len);
    if n_components == 0 {
        return Err(Error::invalid("n_components must be positive"));
    }
    if n_components > dim {
        return Err(Error::Dimension(format!(
            "n_components {n_components} exceeds input dim {dim}"
        )));
    }
    if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
        return Err(Error::Dimension(format!(
            "PCA input has mixed dims {dim} and {}",
            v.len()
        )));
    }
    if n < 2 {
        return Err(Error::RankDeficient {
            achieved: 0,
            requested: n_components,
        });
    }

    let mut mean = vec![0.0; dim];
    for v in vectors {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let centered = DMatrix::from_fn(n, dim, |i, j| vectors[i][j] - mean[j]);
    let cov = (centered.transpose() * &centered) / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let largest = eig.eigenvalues[order[0]].max(0.0);
    let rank = order
        .iter()
        .filter(|&&k| largest > 0.0 && eig.eigenvalues[k] > RANK_TOLERANCE * largest)
        .count();
    if rank < n_components {
        return Err(Error::RankDeficient {
            achieved: rank,
            requested: n_components,
        });
    }

    let mut components = Matrix::zeros(n_components, dim);
    let mut explained_variance = Vec::with_capacity(n_components);
    for (row, &k) in order.iter().take(n_components).enumerate() {
        let axis = eig.eigenvectors.column(k);
        let pivot = (0..dim)
            .max_by(|&a, &b| axis[a].abs().total_cmp(&axis[b].abs()).then(b.cmp(&a)))
            .unwrap();
        let sign = if axis[pivot] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..dim {
            components.set(row, j, sign * axis[j]);
        }
        explained_variance.push(eig.eigenvalues[k]);
    }
    Ok(PcaProjection {
        mean,
        components,
        explained_variance,
    })
}
