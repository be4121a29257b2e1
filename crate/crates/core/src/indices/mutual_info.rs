//! Histogram (equidistant-bin) estimates of entropy and mutual information,
//! in bits, and lag selection by the first minimum of the lag-MI curve.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timeseries::TimeSeries;

pub const DEFAULT_BINS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiEstimate {
    pub lag: usize,
    pub bins: usize,
    /// Mutual information in bits.
    pub value: f64,
    pub entropy_x: f64,
    pub entropy_y: f64,
    pub joint_entropy: f64,
}

/// Sum that depends only on the multiset of terms, not their order.
fn order_free_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.into_iter().sum()
}

fn bin_indices(x: &[f64], bins: usize) -> Vec<usize> {
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = hi - lo;
    if span <= 0.0 {
        return vec![0; x.len()];
    }
    x.iter()
        .map(|&v| (((v - lo) / span * bins as f64) as usize).min(bins - 1))
        .collect()
}

/// Shannon entropy in bits of a count vector, over non-zero cells only.
fn entropy(counts: &[usize], n: f64) -> f64 {
    let terms = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -(p * p.log2())
        })
        .collect();
    order_free_sum(terms)
}

fn mi_from_bins(bx: &[usize], by: &[usize], bins: usize, lag: usize) -> MiEstimate {
    let n = bx.len() as f64;
    let mut cx = vec![0usize; bins];
    let mut cy = vec![0usize; bins];
    let mut joint = vec![0usize; bins * bins];
    for (&i, &j) in bx.iter().zip(by) {
        cx[i] += 1;
        cy[j] += 1;
        joint[i * bins + j] += 1;
    }
    let log_px: Vec<f64> = cx.iter().map(|&c| (c as f64 / n).log2()).collect();
    let log_py: Vec<f64> = cy.iter().map(|&c| (c as f64 / n).log2()).collect();

    let mut terms = Vec::new();
    for i in 0..bins {
        for j in 0..bins {
            let c = joint[i * bins + j];
            if c == 0 {
                continue;
            }
            let p = c as f64 / n;
            // p·log2(p / (p_x p_y)), written so that swapping x and y or
            // setting y = x reproduces the entropy terms exactly
            terms.push(p * (p.log2() - (log_px[i] + log_py[j])));
        }
    }
    let value = order_free_sum(terms);
    MiEstimate {
        lag,
        bins,
        value,
        entropy_x: entropy(&cx, n),
        entropy_y: entropy(&cy, n),
        joint_entropy: entropy(&joint, n),
    }
}

fn check_bins(bins: usize) -> Result<()> {
    if bins < 2 {
        return Err(Error::InvalidInput(format!("bins must be at least 2, got {bins}")));
    }
    Ok(())
}

/// Mutual information between two equally long series, each binned over its
/// own range.
pub fn mutual_information(x: &TimeSeries, y: &TimeSeries, bins: usize) -> Result<MiEstimate> {
    mutual_information_slices(x.samples(), y.samples(), bins, 0)
}

pub(crate) fn mutual_information_slices(
    x: &[f64],
    y: &[f64],
    bins: usize,
    lag: usize,
) -> Result<MiEstimate> {
    check_bins(bins)?;
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InsufficientLength {
            required: 2,
            actual: x.len(),
        });
    }
    Ok(mi_from_bins(&bin_indices(x, bins), &bin_indices(y, bins), bins, lag))
}

/// `I(x_t ; x_{t+m})` for `m = 0..=max_lag`.
pub fn lag_mutual_information(
    series: &TimeSeries,
    max_lag: usize,
    bins: usize,
) -> Result<Vec<MiEstimate>> {
    check_bins(bins)?;
    let x = series.samples();
    let n = x.len();
    if max_lag == 0 {
        return Err(Error::InvalidInput("max_lag must be positive".into()));
    }
    if max_lag + 1 >= n {
        return Err(Error::InsufficientLength {
            required: max_lag + 2,
            actual: n,
        });
    }
    (0..=max_lag)
        .map(|m| mutual_information_slices(&x[..n - m], &x[m..], bins, m))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LagRule {
    FirstMinimum,
    /// No local minimum; first lag where MI fell below a fifth of `I(0)`.
    FifthOfEntropy,
    /// Neither criterion met; `max_lag` returned.
    NoMinimum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagSelection {
    pub lag: usize,
    pub rule: LagRule,
    /// MI at the selected lag, in bits.
    pub mi: f64,
}

/// Picks a delay from a lag-MI curve (element `m` is `I(m)`).
pub fn select_lag_from_curve(curve: &[f64]) -> LagSelection {
    let max_lag = curve.len() - 1;
    for m in 1..max_lag {
        if curve[m] < curve[m - 1] && curve[m] <= curve[m + 1] {
            return LagSelection {
                lag: m,
                rule: LagRule::FirstMinimum,
                mi: curve[m],
            };
        }
    }
    if let Some(m) = (1..=max_lag).find(|&m| curve[m] < curve[0] / 5.0) {
        return LagSelection {
            lag: m,
            rule: LagRule::FifthOfEntropy,
            mi: curve[m],
        };
    }
    log::warn!("lag-MI curve has no minimum up to lag {max_lag}");
    LagSelection {
        lag: max_lag,
        rule: LagRule::NoMinimum,
        mi: curve[max_lag],
    }
}

pub fn select_lag_detailed(series: &TimeSeries, max_lag: usize, bins: usize) -> Result<LagSelection> {
    let curve: Vec<f64> = lag_mutual_information(series, max_lag, bins)?
        .into_iter()
        .map(|e| e.value)
        .collect();
    Ok(select_lag_from_curve(&curve))
}

pub fn select_lag(series: &TimeSeries, max_lag: usize, bins: usize) -> Result<usize> {
    select_lag_detailed(series, max_lag, bins).map(|s| s.lag)
}
