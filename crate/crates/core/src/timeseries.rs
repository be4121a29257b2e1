//! Uniformly sampled scalar signals, analysis windows and normalization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::Label;

/// A uniformly sampled, finite, non-empty scalar signal.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    samples: Vec<f64>,
    sampling_rate: f64,
}

impl TimeSeries {
    pub fn new(samples: Vec<f64>, sampling_rate: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidInput("time series is empty".into()));
        }
        if !(sampling_rate.is_finite() && sampling_rate > 0.0) {
            return Err(Error::InvalidInput(format!(
                "sampling rate must be positive, got {sampling_rate}"
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite sample at index {i}")));
        }
        Ok(Self {
            samples,
            sampling_rate,
        })
    }

    /// Series sampled once per iteration, as produced by discrete maps.
    pub fn from_map(samples: Vec<f64>) -> Result<Self> {
        Self::new(samples, 1.0)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sampling_rate(&self) -> f64 {
        self.sampling_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub(crate) fn min_max(&self) -> (f64, f64) {
        self.samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizeMode {
    ZScore,
    MinMax,
}

/// Rescales a series to zero mean / unit sample standard deviation, or onto [0, 1].
pub fn normalize(series: &TimeSeries, mode: NormalizeMode) -> Result<TimeSeries> {
    let x = series.samples();
    let out = match mode {
        NormalizeMode::MinMax => {
            let (lo, hi) = series.min_max();
            let span = hi - lo;
            if span <= 0.0 {
                return Err(Error::ZeroVariance);
            }
            x.iter().map(|&v| (v - lo) / span).collect()
        }
        NormalizeMode::ZScore => {
            if x.len() < 2 {
                return Err(Error::ZeroVariance);
            }
            let n = x.len() as f64;
            let mean = x.iter().sum::<f64>() / n;
            let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            if var <= 0.0 {
                return Err(Error::ZeroVariance);
            }
            let sd = var.sqrt();
            let centered: Vec<f64> = x.iter().map(|v| (v - mean) / sd).collect();
            // second pass removes the rounding residue of the first mean
            let resid = centered.iter().sum::<f64>() / n;
            centered.into_iter().map(|v| v - resid).collect()
        }
    };
    TimeSeries::new(out, series.sampling_rate())
}

/// One cued trial: the half-open sample range `[onset, offset)` and its class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub onset: usize,
    pub offset: usize,
    pub label: Label,
    pub trial_id: u64,
}

impl WindowSpec {
    pub fn new(trial_id: u64, onset: usize, offset: usize, label: Label) -> Self {
        Self {
            onset,
            offset,
            label,
            trial_id,
        }
    }

    pub fn len(&self) -> usize {
        self.offset.saturating_sub(self.onset)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn check(&self, series_len: usize) -> Result<()> {
        if self.onset < self.offset && self.offset <= series_len {
            Ok(())
        } else {
            Err(Error::OutOfBounds {
                onset: self.onset,
                offset: self.offset,
                len: series_len,
            })
        }
    }
}

pub fn slice_window(series: &TimeSeries, w: &WindowSpec) -> Result<TimeSeries> {
    w.check(series.len())?;
    TimeSeries::new(
        series.samples()[w.onset..w.offset].to_vec(),
        series.sampling_rate(),
    )
}
