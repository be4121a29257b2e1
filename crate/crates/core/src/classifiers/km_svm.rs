//! k-means centers of each class used as the training set of an SVM.

use serde::{Deserialize, Serialize};

use super::kmeans::{kmeans_fit, ClusterMode, KMeansConfig, LabeledCenter};
use super::svm::{svm_train, Kernel, SvmModel};
use crate::error::{Error, Result};
use crate::label::Label;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KernelChoice {
    Linear,
    /// `gamma: None` resolves to `1 / (4 · mean feature variance)` of the
    /// training vectors.
    Rbf { gamma: Option<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KmSvmConfig {
    pub k: usize,
    pub mode: ClusterMode,
    pub kernel: KernelChoice,
    pub c: f64,
    pub kmeans: KMeansConfig,
}

impl Default for KmSvmConfig {
    fn default() -> Self {
        Self {
            k: 4,
            mode: ClusterMode::PerClass,
            kernel: KernelChoice::Rbf { gamma: None },
            c: 10.0,
            kmeans: KMeansConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmSvmModel {
    pub centers: Vec<LabeledCenter>,
    pub svm: SvmModel,
}

impl KmSvmModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.svm.decision(x)
    }

    pub fn predict(&self, x: &[f64]) -> Label {
        self.svm.predict(x)
    }
}

/// Mean over features of the sample variance.
pub fn mean_feature_variance(points: &[Vec<f64>]) -> f64 {
    let n = points.len() as f64;
    if points.len() < 2 {
        return 0.0;
    }
    let dim = points[0].len();
    // sorted sums keep the result independent of point order
    let sorted_sum = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v.into_iter().sum::<f64>()
    };
    (0..dim)
        .map(|k| {
            let mean = sorted_sum(points.iter().map(|p| p[k]).collect()) / n;
            sorted_sum(points.iter().map(|p| (p[k] - mean).powi(2)).collect()) / (n - 1.0)
        })
        .sum::<f64>()
        / dim as f64
}

pub fn resolve_kernel(choice: KernelChoice, points: &[Vec<f64>]) -> Result<Kernel> {
    Ok(match choice {
        KernelChoice::Linear => Kernel::Linear,
        KernelChoice::Rbf { gamma: Some(gamma) } => Kernel::Rbf { gamma },
        KernelChoice::Rbf { gamma: None } => {
            let v = mean_feature_variance(points);
            if !(v > 0.0) {
                return Err(Error::DegenerateTrainingSet("training features have zero variance".into()));
            }
            Kernel::Rbf { gamma: 1.0 / (4.0 * v) }
        }
    })
}

pub fn km_svm_train(points: &[Vec<f64>], labels: &[Label], cfg: &KmSvmConfig) -> Result<KmSvmModel> {
    let kernel = resolve_kernel(cfg.kernel, points)?;
    let centers = kmeans_fit(points, labels, cfg.k, cfg.mode, &cfg.kmeans)?;
    let xs: Vec<Vec<f64>> = centers.iter().map(|c| c.center.clone()).collect();
    let ys: Vec<Label> = centers.iter().map(|c| c.label).collect();
    let svm = svm_train(&xs, &ys, kernel, cfg.c)?;
    Ok(KmSvmModel { centers, svm })
}
