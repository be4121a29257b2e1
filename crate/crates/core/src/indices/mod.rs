//! Nonlinear dynamics indices computed on scalar time series.

pub mod cao;
pub mod correlation;
pub mod lyapunov;
pub mod mutual_info;

pub use cao::{cao_embedding_dimension, CaoParams, CaoResult};
pub use correlation::{correlation_dimension, correlation_sum, GpParams, GpResult};
pub use lyapunov::{largest_lyapunov_wolf, lyapunov_map_derivative, wolf_detailed, WolfEstimate, WolfParams};
pub use mutual_info::{lag_mutual_information, mutual_information, select_lag, MiEstimate};
