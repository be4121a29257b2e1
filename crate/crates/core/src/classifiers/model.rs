//! Conditioning plus classifier, trained from feature vectors and stored as
//! a single JSON document.

use serde::{Deserialize, Serialize};

use super::eval::{evaluate, EvalReport};
use super::km_svm::{km_svm_train, KmSvmConfig, KmSvmModel};
use super::mlp::{mlp_train, MlpConfig, MlpModel};
use crate::error::{Error, Result};
use crate::features::{Conditioning, FeatureVector};
use crate::label::Label;
use crate::timeseries::NormalizeMode;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Mlp,
    KmSvm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub kind: ModelKind,
    pub scaling: NormalizeMode,
    /// Rotate scaled features onto their principal axes (all four kept).
    pub pca: bool,
    pub mlp: MlpConfig,
    pub km_svm: KmSvmConfig,
}

impl TrainConfig {
    pub fn new(kind: ModelKind) -> Self {
        Self {
            kind,
            scaling: NormalizeMode::MinMax,
            pca: true,
            mlp: MlpConfig::default(),
            km_svm: KmSvmConfig::default(),
        }
    }

    /// Seeds every random component.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.mlp.seed = seed;
        self.km_svm.kmeans.seed = seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classifier {
    Mlp(MlpModel),
    KmSvm(KmSvmModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub conditioning: Conditioning,
    pub classifier: Classifier,
    pub config: TrainConfig,
}

impl TrainedModel {
    /// Vectors are sorted by value first, so their order in the input does
    /// not affect the model.
    pub fn train(vectors: &[FeatureVector], cfg: &TrainConfig) -> Result<Self> {
        let mut vectors = vectors.to_vec();
        vectors.sort_by(|a, b| {
            a.values()
                .iter()
                .zip(&b.values())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.label.cmp(&b.label))
        });
        let raw: Vec<[f64; 4]> = vectors.iter().map(|v| v.values()).collect();
        let labels: Vec<Label> = vectors.iter().map(|v| v.label).collect();
        let conditioning = Conditioning::fit(&raw, cfg.scaling, cfg.pca)?;
        let xs: Vec<[f64; 4]> = raw.iter().map(|&r| conditioning.apply(r)).collect();
        let classifier = match cfg.kind {
            ModelKind::Mlp => {
                let (m, trace) = mlp_train(&xs, &labels, &cfg.mlp)?;
                log::info!(
                    "mlp: {} iterations, final loss {:.6}, gradient norm {:.3e}",
                    trace.iterations,
                    trace.losses.last().copied().unwrap_or(f64::NAN),
                    trace.gradient_norm
                );
                Classifier::Mlp(m)
            }
            ModelKind::KmSvm => {
                let pts: Vec<Vec<f64>> = xs.iter().map(|x| x.to_vec()).collect();
                Classifier::KmSvm(km_svm_train(&pts, &labels, &cfg.km_svm)?)
            }
        };
        Ok(Self {
            format_version: FORMAT_VERSION,
            conditioning,
            classifier,
            config: *cfg,
        })
    }

    /// Raw classifier output for unscaled features.
    pub fn decision(&self, raw: [f64; 4]) -> f64 {
        let x = self.conditioning.apply(raw);
        match &self.classifier {
            Classifier::Mlp(m) => m.output(&x),
            Classifier::KmSvm(m) => m.decision(&x),
        }
    }

    pub fn predict(&self, vectors: &[FeatureVector]) -> Vec<Label> {
        vectors.iter().map(|v| Label::from_score(self.decision(v.values()))).collect()
    }

    pub fn evaluate(&self, vectors: &[FeatureVector]) -> Result<EvalReport> {
        let actual: Vec<Label> = vectors.iter().map(|v| v.label).collect();
        evaluate(&self.predict(vectors), &actual)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Model(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(s).map_err(|e| Error::Model(e.to_string()))?;
        if m.format_version != FORMAT_VERSION {
            return Err(Error::Model(format!(
                "unsupported format_version {}, expected {FORMAT_VERSION}",
                m.format_version
            )));
        }
        Ok(m)
    }
}
