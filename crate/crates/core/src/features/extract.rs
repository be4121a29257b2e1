//! Per-trial computation of the four indices.

use serde::{Deserialize, Serialize};

use crate::embedding::{default_theiler, Norm, SignalKind};
use crate::error::{Error, Result};
use crate::indices::cao::{cao_with_norm, CaoParams, DEFAULT_SATURATION_TOL};
use crate::indices::correlation::{correlation_dimension, GpParams};
use crate::indices::lyapunov::{wolf_detailed, WolfParams};
use crate::indices::mutual_info::{select_lag_detailed, DEFAULT_BINS};
use crate::label::Label;
use crate::timeseries::{slice_window, TimeSeries, WindowSpec};

pub const FEATURE_NAMES: [&str; 4] = ["lle", "mi", "med", "d2"];

/// One trial's indices. `lle` is in natural-log units per sample, `mi` in
/// bits at the selected lag, `med` is Cao's minimum embedding dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub trial_id: u64,
    pub label: Label,
    pub lle: f64,
    pub mi: f64,
    pub med: f64,
    pub d2: f64,
}

impl FeatureVector {
    pub fn values(&self) -> [f64; 4] {
        [self.lle, self.mi, self.med, self.d2]
    }

    pub fn from_values(trial_id: u64, label: Label, v: [f64; 4]) -> Self {
        Self {
            trial_id,
            label,
            lle: v[0],
            mi: v[1],
            med: v[2],
            d2: v[3],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexParams {
    pub kind: SignalKind,
    /// `None` picks one sample for maps and a tenth of a second for flows.
    pub theiler: Option<usize>,
    /// Upper bound for the MI lag scan; capped at a quarter of the window.
    pub max_lag: usize,
    pub bins: usize,
    pub m_max: usize,
    pub saturation_tol: f64,
    pub n_radii: usize,
    pub norm: Norm,
}

impl Default for IndexParams {
    fn default() -> Self {
        Self {
            kind: SignalKind::Flow,
            theiler: None,
            max_lag: 50,
            bins: DEFAULT_BINS,
            m_max: 8,
            saturation_tol: DEFAULT_SATURATION_TOL,
            n_radii: 20,
            norm: Norm::Chebyshev,
        }
    }
}

/// Intermediate values behind one feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialDiagnostics {
    pub lag: usize,
    pub cao_saturated: bool,
    pub wolf_skipped: usize,
    pub gp_fit_range: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedTrial {
    pub trial_id: u64,
    pub label: Label,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Extraction {
    /// Sorted by trial id.
    pub features: Vec<FeatureVector>,
    pub skipped: Vec<SkippedTrial>,
}

/// All four indices of one window, or the first index failure.
pub fn trial_indices(window: &TimeSeries, p: &IndexParams) -> Result<([f64; 4], TrialDiagnostics)> {
    let n = window.len();
    let theiler = p.theiler.unwrap_or_else(|| default_theiler(p.kind, window.sampling_rate()));
    let max_lag = p.max_lag.min(n / 4);
    if max_lag == 0 {
        return Err(Error::InsufficientLength { required: 4, actual: n });
    }
    let sel = select_lag_detailed(window, max_lag, p.bins)?;
    let lag = sel.lag;

    let cao = cao_with_norm(
        window,
        &CaoParams {
            lag,
            m_max: p.m_max,
            theiler,
            saturation_tol: p.saturation_tol,
        },
        p.norm,
    )?;
    let med = cao.minimum_dim.unwrap_or(p.m_max);

    let mut wolf = WolfParams::with_defaults(window, med, lag, p.kind, theiler);
    wolf.norm = p.norm;
    let lle = wolf_detailed(window, &wolf)?;

    let mut gp = GpParams::new(med, lag, p.n_radii, theiler);
    gp.norm = p.norm;
    let d2 = correlation_dimension(window, &gp)?;

    Ok((
        [lle.exponent, sel.mi, med as f64, d2.d2],
        TrialDiagnostics {
            lag,
            cao_saturated: cao.is_saturated(),
            wolf_skipped: lle.skipped,
            gp_fit_range: d2.fit_range,
        },
    ))
}

fn skip(w: &WindowSpec, e: &Error) -> SkippedTrial {
    log::warn!("trial {} skipped: {e}", w.trial_id);
    SkippedTrial {
        trial_id: w.trial_id,
        label: w.label,
        reason: e.to_string(),
    }
}

fn finish(mut out: Extraction) -> Extraction {
    out.features.sort_by_key(|f| f.trial_id);
    out.skipped.sort_by_key(|s| s.trial_id);
    out
}

/// Indices for every window; failing windows are reported, not fatal.
pub fn extract_features(series: &TimeSeries, windows: &[WindowSpec], p: &IndexParams) -> Extraction {
    extract_features_multi(std::slice::from_ref(series), windows, p)
}

/// Indices averaged over channels. A trial is skipped if any channel fails.
pub fn extract_features_multi(channels: &[TimeSeries], windows: &[WindowSpec], p: &IndexParams) -> Extraction {
    let mut out = Extraction::default();
    if channels.is_empty() {
        let e = Error::InvalidInput("no channels selected".into());
        out.skipped = windows.iter().map(|w| skip(w, &e)).collect();
        return finish(out);
    }
    'trials: for w in windows {
        let mut sum = [0.0; 4];
        for ch in channels {
            let res = slice_window(ch, w).and_then(|s| trial_indices(&s, p));
            match res {
                Ok((v, _)) => (0..4).for_each(|k| sum[k] += v[k]),
                Err(e) => {
                    out.skipped.push(skip(w, &e));
                    continue 'trials;
                }
            }
        }
        let k = channels.len() as f64;
        let fv = FeatureVector::from_values(w.trial_id, w.label, sum.map(|s| s / k));
        if !fv.is_finite() {
            out.skipped.push(skip(w, &Error::InvalidInput("non-finite index".into())));
            continue;
        }
        out.features.push(fv);
    }
    finish(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, System, SystemSpec};

    fn params() -> IndexParams {
        IndexParams {
            kind: SignalKind::Map,
            ..IndexParams::default()
        }
    }

    fn stream(sys: System, n: usize) -> TimeSeries {
        generate(&SystemSpec::new(sys, n).with_transient(100)).unwrap()
    }

    #[test]
    fn chaotic_windows_have_larger_lle() {
        let p = params();
        let w = |label| vec![WindowSpec::new(0, 0, 800, label), WindowSpec::new(1, 800, 1600, label)];
        let chaos = extract_features(&stream(System::Logistic { r: 4.0 }, 1600), &w(Label::Positive), &p);
        let noise = extract_features(&stream(System::Ar1 { phi: 0.9, seed: 1 }, 1600), &w(Label::Negative), &p);
        assert_eq!((chaos.features.len(), noise.features.len()), (2, 2));
        for a in &chaos.features {
            for b in &noise.features {
                assert!(a.lle > b.lle, "{} vs {}", a.lle, b.lle);
            }
        }
    }

    #[test]
    fn identical_windows_identical_vectors() {
        let s = stream(System::Logistic { r: 4.0 }, 700);
        let w = [WindowSpec::new(1, 0, 700, Label::Positive), WindowSpec::new(2, 0, 700, Label::Positive)];
        let ex = extract_features(&s, &w, &params());
        assert_eq!(ex.features[0].values().map(f64::to_bits), ex.features[1].values().map(f64::to_bits));
    }

    #[test]
    fn short_and_out_of_range_windows_skipped() {
        let s = stream(System::Logistic { r: 4.0 }, 1000);
        let w = [
            WindowSpec::new(7, 0, 12, Label::Positive),
            WindowSpec::new(8, 900, 1200, Label::Positive),
            WindowSpec::new(9, 0, 600, Label::Positive),
        ];
        let ex = extract_features(&s, &w, &params());
        assert_eq!(ex.features.len(), 1);
        assert_eq!(ex.skipped.iter().map(|s| s.trial_id).collect::<Vec<_>>(), vec![7, 8]);
        assert!(ex.skipped[0].reason.contains("insufficient length"), "{}", ex.skipped[0].reason);
        assert!(ex.skipped[1].reason.contains("out of bounds"));
    }

    #[test]
    fn window_order_does_not_matter() {
        let s = stream(System::Ar1 { phi: 0.9, seed: 4 }, 1800);
        let mut w: Vec<WindowSpec> = (0..3).map(|i| WindowSpec::new(10 - i, 600 * i as usize, 600 * (i as usize + 1), Label::Negative)).collect();
        let a = extract_features(&s, &w, &params());
        w.reverse();
        assert_eq!(a, extract_features(&s, &w, &params()));
        assert!(a.features.windows(2).all(|p| p[0].trial_id < p[1].trial_id));
    }

    #[test]
    fn channel_average_of_copies() {
        let s = stream(System::Logistic { r: 4.0 }, 700);
        let w = [WindowSpec::new(0, 0, 700, Label::Positive)];
        let one = extract_features(&s, &w, &params());
        let two = extract_features_multi(&[s.clone(), s], &w, &params());
        assert_eq!(one, two);
        assert_eq!(extract_features_multi(&[], &w, &params()).skipped.len(), 1);
    }
}
