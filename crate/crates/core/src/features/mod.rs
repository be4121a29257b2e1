//! From windows to feature tensors: index extraction, class-balanced
//! matrices, conditioning, Table-style summaries and histograms.

pub mod conditioning;
pub mod csv;
pub mod extract;
pub mod matrix;

pub use conditioning::{Conditioning, PcaModel, Scaler};
pub use extract::{extract_features, extract_features_multi, Extraction, FeatureVector, IndexParams, SkippedTrial};
pub use matrix::{build_matrices, histogram, summarize, FeatureMatrix, Histogram, Moments, Summary};
