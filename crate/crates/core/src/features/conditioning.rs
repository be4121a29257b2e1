//! Feature scaling fitted on training data, PCA through SVD, and the
//! combination of the two applied ahead of every classifier.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::extract::FEATURE_NAMES;
use super::matrix::FeatureMatrix;
use crate::error::{Error, Result};
use crate::timeseries::NormalizeMode;

/// Per-feature affine map `x ↦ (x − offset) / scale`. Test data is not clipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mode: NormalizeMode,
    pub offset: [f64; 4],
    pub scale: [f64; 4],
}

impl Scaler {
    pub fn fit(rows: &[[f64; 4]], mode: NormalizeMode) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidInput("cannot fit a scaler on no data".into()));
        }
        let mut offset = [0.0; 4];
        let mut scale = [0.0; 4];
        for k in 0..4 {
            let col = rows.iter().map(|r| r[k]);
            let (o, s) = match mode {
                NormalizeMode::MinMax => {
                    let (lo, hi) = col.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
                    (lo, hi - lo)
                }
                NormalizeMode::ZScore => {
                    let n = rows.len() as f64;
                    let mean = col.clone().sum::<f64>() / n;
                    let var = if rows.len() > 1 {
                        col.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
                    } else {
                        0.0
                    };
                    (mean, var.sqrt())
                }
            };
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::DegenerateTrainingSet(format!(
                    "feature {} is constant on the training data",
                    FEATURE_NAMES[k]
                )));
            }
            offset[k] = o;
            scale[k] = s;
        }
        Ok(Self { mode, offset, scale })
    }

    pub fn fit_matrix(train: &FeatureMatrix, mode: NormalizeMode) -> Result<Self> {
        let rows: Vec<[f64; 4]> = train.to_vectors().iter().map(|v| v.values()).collect();
        Self::fit(&rows, mode)
    }

    pub fn apply(&self, x: [f64; 4]) -> [f64; 4] {
        std::array::from_fn(|k| (x[k] - self.offset[k]) / self.scale[k])
    }

    pub fn invert(&self, y: [f64; 4]) -> [f64; 4] {
        std::array::from_fn(|k| y[k] * self.scale[k] + self.offset[k])
    }

    pub fn apply_matrix(&self, m: &FeatureMatrix) -> FeatureMatrix {
        m.map_rows(|x| self.apply(x))
    }
}

/// Principal axes of centered training rows. `components` holds one unit
/// vector per row, ordered by non-increasing singular value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: [f64; 4],
    pub components: [[f64; 4]; 4],
    pub singular_values: [f64; 4],
}

impl PcaModel {
    /// Needs more than four rows. Zero singular values are kept.
    pub fn fit(rows: &[[f64; 4]]) -> Result<Self> {
        if rows.len() <= 4 {
            return Err(Error::InsufficientLength {
                required: 5,
                actual: rows.len(),
            });
        }
        let n = rows.len() as f64;
        let mean: [f64; 4] = std::array::from_fn(|k| rows.iter().map(|r| r[k]).sum::<f64>() / n);
        let x = DMatrix::from_fn(rows.len(), 4, |i, k| rows[i][k] - mean[k]);
        // X = U Σ Vᵀ; the principal axes are the columns of V
        let svd = x.svd(false, true);
        let v_t = svd.v_t.ok_or_else(|| Error::InvalidInput("SVD did not converge".into()))?;
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let mut components = [[0.0; 4]; 4];
        let mut singular_values = [0.0; 4];
        for (slot, &o) in order.iter().enumerate() {
            singular_values[slot] = svd.singular_values[o];
            let row: [f64; 4] = std::array::from_fn(|k| v_t[(o, k)]);
            // sign convention: largest-magnitude entry positive
            let pivot = row.iter().copied().max_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap_or(1.0);
            let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
            components[slot] = row.map(|v| sign * v);
        }
        Ok(Self {
            mean,
            components,
            singular_values,
        })
    }

    pub fn fit_matrix(train: &FeatureMatrix) -> Result<Self> {
        let rows: Vec<[f64; 4]> = train.to_vectors().iter().map(|v| v.values()).collect();
        Self::fit(&rows)
    }

    /// Coordinates on the first `k` axes.
    pub fn transform(&self, x: [f64; 4], k: usize) -> Result<Vec<f64>> {
        if !(1..=4).contains(&k) {
            return Err(Error::InvalidInput(format!("PCA keeps 1..=4 components, got {k}")));
        }
        Ok(self.components[..k]
            .iter()
            .map(|c| (0..4).map(|j| c[j] * (x[j] - self.mean[j])).sum())
            .collect())
    }

    pub fn transform_full(&self, x: [f64; 4]) -> [f64; 4] {
        std::array::from_fn(|i| (0..4).map(|j| self.components[i][j] * (x[j] - self.mean[j])).sum())
    }

    pub fn inverse(&self, y: [f64; 4]) -> [f64; 4] {
        std::array::from_fn(|j| self.mean[j] + (0..4).map(|i| self.components[i][j] * y[i]).sum::<f64>())
    }

    pub fn transform_matrix(&self, m: &FeatureMatrix, k: usize) -> Result<Vec<Vec<f64>>> {
        m.to_vectors().iter().map(|v| self.transform(v.values(), k)).collect()
    }
}

/// Scaling followed by an optional full-rank PCA rotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conditioning {
    pub scaler: Scaler,
    pub pca: Option<PcaModel>,
}

impl Conditioning {
    pub fn fit(rows: &[[f64; 4]], mode: NormalizeMode, pca: bool) -> Result<Self> {
        let scaler = Scaler::fit(rows, mode)?;
        let pca = if pca {
            let scaled: Vec<[f64; 4]> = rows.iter().map(|&r| scaler.apply(r)).collect();
            Some(PcaModel::fit(&scaled)?)
        } else {
            None
        };
        Ok(Self { scaler, pca })
    }

    pub fn apply(&self, x: [f64; 4]) -> [f64; 4] {
        let s = self.scaler.apply(x);
        match &self.pca {
            Some(p) => p.transform_full(s),
            None => s,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn rows(cols: [&[f64]; 4]) -> Vec<[f64; 4]> {
        (0..cols[0].len()).map(|i| std::array::from_fn(|k| cols[k][i])).collect()
    }

    #[test]
    fn minmax_column() {
        let r = rows([&[2.0, 4.0, 6.0], &[0.0, 1.0, 2.0], &[1.0, 2.0, 3.0], &[5.0, 3.0, 1.0]]);
        let s = Scaler::fit(&r, NormalizeMode::MinMax).unwrap();
        let col: Vec<f64> = r.iter().map(|&x| s.apply(x)[0]).collect();
        assert_eq!(col, vec![0.0, 0.5, 1.0]);
        // below the training minimum stays negative
        assert_eq!(s.apply([0.0, 0.0, 1.0, 1.0])[0], -0.5);
    }

    #[test]
    fn constant_feature_rejected() {
        let r = rows([&[1.0, 2.0], &[3.0, 3.0], &[0.0, 1.0], &[0.0, 1.0]]);
        assert!(matches!(Scaler::fit(&r, NormalizeMode::MinMax), Err(Error::DegenerateTrainingSet(_))));
        assert!(Scaler::fit(&r, NormalizeMode::ZScore).is_err());
    }

    fn random_rows(seed: u64, n: usize, sd: [f64; 4]) -> Vec<[f64; 4]> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| std::array::from_fn(|k| sd[k] * rng.random_range(-1.0..1.0) + k as f64)).collect()
    }

    #[test]
    fn axis_aligned_variances() {
        // ±sd[k] on axis k only: sample variances exactly (4, 3, 2, 1)·n/(n−1)
        let sd = [2.0, 3f64.sqrt(), 2f64.sqrt(), 1.0];
        let mut r = Vec::new();
        for k in 0..4 {
            for s in [-1.0, 1.0] {
                let mut x = [0.0; 4];
                x[k] = s * sd[k];
                r.push(x);
            }
        }
        let p = PcaModel::fit(&r).unwrap();
        let n = r.len() as f64;
        for k in 0..4 {
            let var = p.singular_values[k].powi(2) / (n - 1.0);
            assert!((var - sd[k].powi(2) * 2.0 / (n - 1.0)).abs() < 1e-12);
            assert!((p.components[k][k].abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn orthonormal_components() {
        let r = random_rows(9, 200, [1.0, 0.5, 2.0, 0.1]);
        let p = PcaModel::fit(&r).unwrap();
        // independent Gram computation
        for a in 0..4 {
            for b in 0..4 {
                let g: f64 = (0..4).map(|j| p.components[a][j] * p.components[b][j]).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-10);
            }
        }
        assert!(p.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn rank_deficient_keeps_zero_values() {
        let r: Vec<[f64; 4]> = (0..10).map(|i| [i as f64, 2.0 * i as f64, 1.0, -(i as f64)]).collect();
        let p = PcaModel::fit(&r).unwrap();
        assert_eq!(p.singular_values.len(), 4);
        assert!(p.singular_values[1..].iter().all(|s| *s < 1e-10));
        assert!(PcaModel::fit(&r[..4]).is_err());
        assert!(p.transform(r[0], 0).is_err());
    }

    proptest! {
        #[test]
        fn scaler_round_trip(seed in 0u64..1000) {
            let r = random_rows(seed, 30, [1.0, 10.0, 0.01, 100.0]);
            for mode in [NormalizeMode::MinMax, NormalizeMode::ZScore] {
                let s = Scaler::fit(&r, mode).unwrap();
                for &x in &r {
                    let back = s.invert(s.apply(x));
                    for k in 0..4 {
                        prop_assert!((back[k] - x[k]).abs() < 1e-12 * x[k].abs().max(1.0));
                    }
                }
            }
            let s = Scaler::fit(&r, NormalizeMode::MinMax).unwrap();
            for k in 0..4 {
                let col: Vec<f64> = r.iter().map(|&x| s.apply(x)[k]).collect();
                prop_assert_eq!(col.iter().copied().fold(f64::INFINITY, f64::min), 0.0);
                prop_assert_eq!(col.iter().copied().fold(f64::NEG_INFINITY, f64::max), 1.0);
            }
        }

        #[test]
        fn pca_full_rank_identity(seed in 0u64..1000) {
            let r = random_rows(seed, 50, [3.0, 1.0, 0.2, 0.7]);
            let p = PcaModel::fit(&r).unwrap();
            let mut ss = 0.0;
            for &x in &r {
                let back = p.inverse(p.transform_full(x));
                for k in 0..4 {
                    prop_assert!((back[k] - x[k]).abs() < 1e-10);
                    ss += (x[k] - p.mean[k]).powi(2);
                }
            }
            let sv2: f64 = p.singular_values.iter().map(|s| s * s).sum();
            prop_assert!((sv2 - ss).abs() < 1e-8 * ss.max(1.0));
        }
    }
}
