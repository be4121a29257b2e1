//! Cao's averaged false-neighbor statistics E1(m), E2(m) and the minimum
//! embedding dimension read from the saturation of E1.

use serde::{Deserialize, Serialize};

use crate::embedding::{embed_slice, Norm, NeighborIndex};
use crate::error::{Error, Result};
use crate::timeseries::TimeSeries;

pub const DEFAULT_SATURATION_TOL: f64 = 0.05;

/// Fraction of query points allowed to have a coincident nearest neighbor.
const MAX_DEGENERATE_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaoParams {
    pub lag: usize,
    pub m_max: usize,
    pub theiler: usize,
    pub saturation_tol: f64,
}

impl CaoParams {
    pub fn new(lag: usize, m_max: usize, theiler: usize) -> Self {
        Self {
            lag,
            m_max,
            theiler,
            saturation_tol: DEFAULT_SATURATION_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaoResult {
    /// `e1[k]` is E1(k + 1).
    pub e1: Vec<f64>,
    /// `e2[k]` is E2(k + 1).
    pub e2: Vec<f64>,
    /// `None` when E1 never stops changing within `m_max`.
    pub minimum_dim: Option<usize>,
    pub saturation_tol: f64,
}

impl CaoResult {
    pub fn is_saturated(&self) -> bool {
        self.minimum_dim.is_some()
    }

    pub fn mean_e2(&self) -> f64 {
        self.e2.iter().sum::<f64>() / self.e2.len() as f64
    }
}

/// Minimum embedding dimension `m0 + 1`, where `m0` is the smallest value
/// such that `|E1(m+1) − E1(m)| < tol` for every computed `m > m0`.
pub fn saturation_dimension(e1: &[f64], tol: f64) -> Option<usize> {
    // diffs[k] = |E1(k + 2) − E1(k + 1)|, i.e. the step taken at m = k + 1
    let diffs: Vec<f64> = e1.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let mut first_flat = diffs.len();
    while first_flat > 0 && diffs[first_flat - 1] < tol {
        first_flat -= 1;
    }
    if first_flat == diffs.len() {
        return None;
    }
    // flat for all m >= first_flat + 1, so m0 = first_flat
    Some(first_flat + 1)
}

struct Level {
    /// E(m): mean of a(i, m).
    e: f64,
    /// E*(m).
    e_star: f64,
}

fn level(x: &[f64], m: usize, t: usize, theiler: usize, norm: Norm) -> Result<Level> {
    let n = x.len();
    let count = n - m * t;
    // points of dimension m that also exist in dimension m + 1
    let emb = embed_slice(&x[..n - t], m, t)?;
    debug_assert_eq!(emb.len(), count);
    let index = NeighborIndex::new(&emb, norm);

    let mut ratios = Vec::with_capacity(count);
    let mut stars = Vec::with_capacity(count);
    let mut excluded = 0usize;
    for i in 0..count {
        let Some((nb, d_m)) = index.nearest_within(i, theiler, count) else {
            excluded += 1;
            continue;
        };
        let extra = (x[i + m * t] - x[nb + m * t]).abs();
        stars.push(extra);
        if d_m == 0.0 {
            excluded += 1;
            continue;
        }
        let d_m1 = match norm {
            Norm::Chebyshev => d_m.max(extra),
            Norm::Euclidean => (d_m * d_m + extra * extra).sqrt(),
        };
        ratios.push(d_m1 / d_m);
    }
    if excluded as f64 > MAX_DEGENERATE_FRACTION * count as f64 || ratios.is_empty() {
        return Err(Error::DegenerateEmbedding {
            excluded,
            total: count,
        });
    }
    Ok(Level {
        e: ratios.iter().sum::<f64>() / ratios.len() as f64,
        e_star: stars.iter().sum::<f64>() / stars.len() as f64,
    })
}

/// Cao's method with the maximum norm.
pub fn cao_embedding_dimension(series: &TimeSeries, p: &CaoParams) -> Result<CaoResult> {
    cao_with_norm(series, p, Norm::Chebyshev)
}

pub fn cao_with_norm(series: &TimeSeries, p: &CaoParams, norm: Norm) -> Result<CaoResult> {
    if p.m_max < 2 {
        return Err(Error::InvalidInput(format!("m_max must be at least 2, got {}", p.m_max)));
    }
    if p.lag == 0 {
        return Err(Error::InvalidInput("lag must be positive".into()));
    }
    let x = series.samples();
    // E(m_max + 1) needs dimension m_max + 2 vectors, plus room for two of them
    let required = (p.m_max + 1) * p.lag + p.theiler + 3;
    if x.len() < required {
        return Err(Error::InsufficientLength {
            required,
            actual: x.len(),
        });
    }
    let levels = (1..=p.m_max + 1)
        .map(|m| level(x, m, p.lag, p.theiler, norm))
        .collect::<Result<Vec<_>>>()?;
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { f64::NAN };
    let e1: Vec<f64> = levels.windows(2).map(|w| ratio(w[1].e, w[0].e)).collect();
    let e2: Vec<f64> = levels.windows(2).map(|w| ratio(w[1].e_star, w[0].e_star)).collect();
    if e2.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateEmbedding {
            excluded: x.len(),
            total: x.len(),
        });
    }
    Ok(CaoResult {
        minimum_dim: saturation_dimension(&e1, p.saturation_tol),
        e1,
        e2,
        saturation_tol: p.saturation_tol,
    })
}
