//! Chaos-theoretic feature extraction and classification for two-class EEG
//! tasks.
//!
//! Four indices are computed per analysis window (largest Lyapunov exponent,
//! lag mutual information, Cao minimum embedding dimension and
//! Grassberger–Procaccia correlation dimension), assembled into
//! index × trial × class tensors, scaled, optionally rotated by PCA and
//! classified by a 4-3-1 perceptron or a k-means + SVM hybrid.

pub mod classifiers;
pub mod embedding;
pub mod error;
pub mod features;
pub mod indices;
pub mod label;
pub mod synth;
pub mod timeseries;

pub use embedding::{delay_embed, nearest_neighbor, DelayEmbedding, NeighborIndex, Norm, SignalKind};
pub use error::{Error, Result};
pub use label::Label;
pub use timeseries::{normalize, slice_window, NormalizeMode, TimeSeries, WindowSpec};
