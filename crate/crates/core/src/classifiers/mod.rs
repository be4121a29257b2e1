//! Two-class classifiers on four-index feature vectors and their evaluation.

pub mod eval;
pub mod km_svm;
pub mod kmeans;
pub mod mlp;
pub mod model;
pub mod svm;

pub use eval::{evaluate, EvalReport};
pub use km_svm::{km_svm_train, KernelChoice, KmSvmConfig, KmSvmModel};
pub use kmeans::{kmeans, kmeans_fit, ClusterMode, KMeansConfig, LabeledCenter};
pub use mlp::{mlp_train, MlpConfig, MlpModel};
pub use model::{Classifier, ModelKind, TrainConfig, TrainedModel};
pub use svm::{svm_train, Kernel, SvmModel};
