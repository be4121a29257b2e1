//! Largest Lyapunov exponent: the analytic orbit average of `ln|f'(x)|` for
//! maps with a known slope, and Wolf-style trajectory following for
//! measured series. Both return natural-log units per sample.

use serde::{Deserialize, Serialize};

use crate::embedding::{delay_embed, Norm, NeighborIndex, SignalKind};
use crate::error::{Error, Result};
use crate::timeseries::TimeSeries;

/// `(1/n) Σ ln|f'(x_i)|` over the orbit.
pub fn lyapunov_map_derivative(derivative_at: impl Fn(f64) -> f64, orbit: &TimeSeries) -> Result<f64> {
    let mut sum = 0.0;
    for (i, &x) in orbit.samples().iter().enumerate() {
        let d = derivative_at(x).abs();
        if d == 0.0 || !d.is_finite() {
            return Err(Error::SingularDerivative(i));
        }
        sum += d.ln();
    }
    Ok(sum / orbit.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WolfParams {
    pub m: usize,
    pub t: usize,
    pub theiler: usize,
    /// Samples evolved between renormalizations.
    pub evolve_steps: usize,
    /// Smallest admissible neighbor separation, series units.
    pub eps_min: f64,
    /// Separation that triggers neighbor replacement, series units.
    pub eps_max: f64,
    #[serde(default)]
    pub norm: Norm,
}

impl WolfParams {
    /// Defaults scaled to the embedded attractor: `eps_min` = 0.1 % and
    /// `eps_max` = 10 % of its diameter, three steps per renormalization for
    /// maps and `round(0.1 · rate · t_char)` (capped at 10) for flows, where
    /// `t_char` is the embedding window `(m − 1)·t` in seconds.
    pub fn with_defaults(series: &TimeSeries, m: usize, t: usize, kind: SignalKind, theiler: usize) -> Self {
        let (lo, hi) = series.min_max();
        let diameter = hi - lo;
        let evolve_steps = match kind {
            SignalKind::Map => 3,
            SignalKind::Flow => {
                let t_char = ((m.max(2) - 1) * t) as f64 / series.sampling_rate();
                ((0.1 * series.sampling_rate() * t_char).round() as usize).clamp(1, 10)
            }
        };
        Self {
            m,
            t,
            theiler,
            evolve_steps,
            eps_min: 1e-3 * diameter,
            eps_max: 0.1 * diameter,
            norm: Norm::Chebyshev,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.evolve_steps == 0 {
            return Err(Error::InvalidInput("evolve_steps must be at least 1".into()));
        }
        if !(self.eps_min > 0.0 && self.eps_min < self.eps_max && self.eps_max.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "need 0 < eps_min < eps_max, got {} and {}",
                self.eps_min, self.eps_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WolfEstimate {
    /// Natural-log units per sample.
    pub exponent: f64,
    pub renormalizations: usize,
    pub replacements: usize,
    /// Replacement searches that found no candidate even after widening.
    pub skipped: usize,
    pub evolved_samples: usize,
}

impl WolfEstimate {
    pub fn per_second(&self, sampling_rate: f64) -> f64 {
        self.exponent * sampling_rate
    }
}

const MAX_WIDENINGS: usize = 3;

fn cosine(a: &[f64], b: &[f64], origin: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for k in 0..origin.len() {
        let u = a[k] - origin[k];
        let v = b[k] - origin[k];
        dot += u * v;
        na += u * u;
        nb += v * v;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na.sqrt() * nb.sqrt())).abs()
}

pub fn largest_lyapunov_wolf(series: &TimeSeries, p: &WolfParams) -> Result<f64> {
    wolf_detailed(series, p).map(|e| e.exponent)
}

/// Wolf trajectory following with orientation-preserving replacement.
pub fn wolf_detailed(series: &TimeSeries, p: &WolfParams) -> Result<WolfEstimate> {
    p.validate()?;
    let emb = delay_embed(series, p.m, p.t)?;
    let n = emb.len();
    let k = p.evolve_steps;
    if n < 2 * k + 2 {
        return Err(Error::InsufficientLength {
            required: (p.m - 1) * p.t + 2 * k + 2,
            actual: series.len(),
        });
    }
    let index = NeighborIndex::new(&emb, p.norm);
    let dist = |a: usize, b: usize| p.norm.distance(emb.point(a), emb.point(b));
    // points that can still be evolved k steps
    let limit = n - k;

    // Candidate z for fiducial i: admissible, evolvable, eps_min <= d <= radius.
    // With an old neighbor the best-aligned candidate wins, otherwise the
    // closest; remaining ties go to the smaller distance, then smaller index.
    let pick = |i: usize, old: Option<usize>, radius: f64| -> Option<usize> {
        let mut best: Option<(f64, f64, usize)> = None;
        index.for_each_within(i, radius, p.theiler, limit, |z, d| {
            if d < p.eps_min {
                return;
            }
            let align = match old {
                Some(j) => cosine(emb.point(z), emb.point(j), emb.point(i)),
                None => 0.0,
            };
            let better = match best {
                None => true,
                Some((ba, bd, bz)) => {
                    align > ba || (align == ba && (d < bd || (d == bd && z < bz)))
                }
            };
            if better {
                best = Some((align, d, z));
            }
        });
        best.map(|(_, _, z)| z)
    };
    let search = |i: usize, old: Option<usize>| -> Option<usize> {
        let mut radius = p.eps_max;
        for _ in 0..=MAX_WIDENINGS {
            if let Some(z) = pick(i, old, radius) {
                return Some(z);
            }
            radius *= 2.0;
        }
        None
    };

    let mut i = 0;
    let mut j = search(0, None).ok_or_else(|| {
        Error::InvalidInput(format!(
            "no neighbor of the first point within {} x eps_max = {}",
            1 << MAX_WIDENINGS,
            p.eps_max
        ))
    })?;

    let mut sum = 0.0;
    let mut evolved = 0;
    let mut renorms = 0;
    let mut replacements = 0;
    let mut skipped = 0;
    while i < limit && j < limit {
        let d0 = dist(i, j);
        i += k;
        j += k;
        let d1 = dist(i, j);
        renorms += 1;
        if d1 > 0.0 {
            sum += (d1 / d0).ln();
            evolved += k;
        }
        if i >= limit {
            break;
        }
        if d1 > p.eps_max || d1 == 0.0 || j >= limit {
            replacements += 1;
            match search(i, Some(j).filter(|&j| j < n)) {
                Some(z) => j = z,
                None => {
                    skipped += 1;
                    match index.nearest_within(i, p.theiler, limit) {
                        Some((z, d)) if d > 0.0 => j = z,
                        _ => break,
                    }
                }
            }
        }
    }

    if renorms == 0 || evolved == 0 || 2 * skipped > renorms {
        return Err(Error::InsufficientDensity {
            skipped,
            total: renorms,
        });
    }
    if skipped > 0 {
        log::warn!("wolf: {skipped} of {renorms} renormalizations had no replacement candidate");
    }
    Ok(WolfEstimate {
        exponent: sum / evolved as f64,
        renormalizations: renorms,
        replacements,
        skipped,
        evolved_samples: evolved,
    })
}
