//! Grassberger–Procaccia correlation sums and correlation dimension.

use serde::{Deserialize, Serialize};

use crate::embedding::{delay_embed, DelayEmbedding, Norm};
use crate::error::{Error, Result};
use crate::timeseries::TimeSeries;

/// Points used to estimate the pairwise-distance distribution for the radius grid.
const RADIUS_SAMPLE_POINTS: usize = 1000;
/// Quantiles of the pairwise-distance distribution bounding the radius grid.
/// Since C(ε) is that distribution's CDF, the grid spans C ≈ 1e-3 .. 1e-1.
const RADIUS_QUANTILES: (f64, f64) = (0.001, 0.10);
/// Local slopes in a scaling run stay within this fraction of the run median.
const SLOPE_TOLERANCE: f64 = 0.15;
const FALLBACK_RANGE: (f64, f64) = (1e-3, 1e-1);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpResult {
    pub radii: Vec<f64>,
    pub correlation_sums: Vec<f64>,
    pub d2: f64,
    /// Inclusive index range into `radii` used for the fit.
    pub fit_range: (usize, usize),
    /// RMS residual of the log-log fit.
    pub fit_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpParams {
    pub m: usize,
    pub t: usize,
    pub n_radii: usize,
    pub theiler: usize,
    #[serde(default)]
    pub norm: Norm,
}

impl GpParams {
    pub fn new(m: usize, t: usize, n_radii: usize, theiler: usize) -> Self {
        Self {
            m,
            t,
            n_radii,
            theiler,
            norm: Norm::Chebyshev,
        }
    }
}

fn admissible_pairs(n: usize, theiler: usize) -> u64 {
    // pairs i < j with j - i > theiler
    if n <= theiler + 1 {
        return 0;
    }
    let k = (n - theiler - 1) as u64;
    k * (k + 1) / 2
}

/// Fraction of admissible pairs `(i < j, j − i > theiler)` within distance ε,
/// for each ε in `radii`.
pub fn correlation_sum(
    embedding: &DelayEmbedding,
    radii: &[f64],
    theiler: usize,
    norm: Norm,
) -> Result<Vec<f64>> {
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("radii must be positive and strictly increasing".into()));
    }
    let n = embedding.len();
    let total = admissible_pairs(n, theiler);
    if total == 0 {
        return Err(Error::InvalidInput(format!(
            "no admissible pairs among {n} points with Theiler window {theiler}"
        )));
    }
    let reduced: Vec<f64> = radii.iter().map(|&r| norm.to_reduced(r)).collect();
    let r_max = *reduced.last().unwrap();
    // hist[k]: pairs whose distance first fits under radius k
    let mut hist = vec![0u64; radii.len()];
    for i in 0..n {
        let a = embedding.point(i);
        for j in i + theiler + 1..n {
            let r = norm.reduced(a, embedding.point(j));
            if r <= r_max {
                hist[reduced.partition_point(|&e| e < r)] += 1;
            }
        }
    }
    let mut cum = 0u64;
    Ok(hist
        .into_iter()
        .map(|h| {
            cum += h;
            cum as f64 / total as f64
        })
        .collect())
}

/// Radius grid: `n` log-spaced values between the 0.1 % and 10 % quantiles
/// of pairwise distances over an evenly strided subset of points.
pub fn radius_grid(embedding: &DelayEmbedding, n: usize, theiler: usize, norm: Norm) -> Result<Vec<f64>> {
    let len = embedding.len();
    let stride = len.div_ceil(RADIUS_SAMPLE_POINTS).max(1);
    let picks: Vec<usize> = (0..len).step_by(stride).collect();
    let mut d = Vec::new();
    for (a, &i) in picks.iter().enumerate() {
        for &j in &picks[a + 1..] {
            if j - i > theiler {
                d.push(norm.distance(embedding.point(i), embedding.point(j)));
            }
        }
    }
    d.retain(|&v| v > 0.0);
    if d.len() < 2 {
        return Err(Error::NoScalingRegion("too few distinct pairwise distances".into()));
    }
    d.sort_by(f64::total_cmp);
    let pct = |q: f64| d[((q * d.len() as f64).ceil() as usize).clamp(1, d.len()) - 1];
    let (lo, hi) = (pct(RADIUS_QUANTILES.0), pct(RADIUS_QUANTILES.1));
    if !(hi > lo) {
        return Err(Error::NoScalingRegion("degenerate distance distribution".into()));
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    let step = (lhi - llo) / (n - 1) as f64;
    let mut radii: Vec<f64> = (0..n).map(|k| (llo + step * k as f64).exp()).collect();
    radii[0] = lo;
    radii[n - 1] = hi;
    Ok(radii)
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Longest contiguous block of local slopes that all sit within
/// `SLOPE_TOLERANCE` of the block median; the earliest wins ties. Returns an
/// inclusive radius-index range.
fn longest_straight_run(log_r: &[f64], log_c: &[Option<f64>]) -> Option<(usize, usize)> {
    let slopes: Vec<Option<f64>> = (0..log_r.len() - 1)
        .map(|k| match (log_c[k], log_c[k + 1]) {
            (Some(a), Some(b)) => Some((b - a) / (log_r[k + 1] - log_r[k])),
            _ => None,
        })
        .collect();
    let mut best: Option<(usize, usize)> = None;
    for a in 0..slopes.len() {
        for b in a + 1..slopes.len() {
            let run: Option<Vec<f64>> = slopes[a..=b].iter().copied().collect();
            let Some(run) = run else { break };
            let med = median(&run);
            if !(med > 0.0) || run.iter().any(|s| (s - med).abs() >= SLOPE_TOLERANCE * med) {
                continue;
            }
            if best.is_none_or(|(ba, bb)| b - a > bb - ba) {
                best = Some((a, b));
            }
        }
    }
    // slopes a..=b join radii a..=b+1
    best.map(|(a, b)| (a, b + 1))
}

fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let rms = (x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - my - slope * (a - mx)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, rms)
}

/// Slope of `ln C(ε)` against `ln ε` over an automatically chosen scaling region.
pub fn dimension_from_sums(radii: Vec<f64>, sums: Vec<f64>) -> Result<GpResult> {
    let interior = sums.iter().filter(|&&c| c > 0.0 && c < 1.0).count();
    if interior < 3 {
        return Err(Error::NoScalingRegion(format!(
            "only {interior} radii with 0 < C(ε) < 1"
        )));
    }
    let log_r: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let log_c: Vec<Option<f64>> = sums.iter().map(|&c| (c > 0.0).then(|| c.ln())).collect();
    let range = longest_straight_run(&log_r, &log_c)
        .or_else(|| {
            let inside: Vec<usize> = (0..sums.len())
                .filter(|&k| sums[k] >= FALLBACK_RANGE.0 && sums[k] <= FALLBACK_RANGE.1)
                .collect();
            (inside.len() >= 3).then(|| (inside[0], *inside.last().unwrap()))
        })
        .ok_or_else(|| Error::NoScalingRegion("no straight segment in log-log curve".into()))?;
    let xs = &log_r[range.0..=range.1];
    let ys: Vec<f64> = log_c[range.0..=range.1].iter().map(|v| v.unwrap_or(f64::NAN)).collect();
    let (slope, rms) = fit_line(xs, &ys);
    if !slope.is_finite() {
        return Err(Error::NoScalingRegion("fit range contains empty radii".into()));
    }
    Ok(GpResult {
        radii,
        correlation_sums: sums,
        d2: slope.max(0.0),
        fit_range: range,
        fit_residual: rms,
    })
}

pub fn correlation_dimension(series: &TimeSeries, p: &GpParams) -> Result<GpResult> {
    if p.n_radii < 10 {
        return Err(Error::InvalidInput(format!("n_radii must be at least 10, got {}", p.n_radii)));
    }
    let emb = delay_embed(series, p.m, p.t)?;
    embedding_dimension_estimate(&emb, p.n_radii, p.theiler, p.norm)
}

/// Correlation dimension of an explicit point set.
pub fn embedding_dimension_estimate(
    emb: &DelayEmbedding,
    n_radii: usize,
    theiler: usize,
    norm: Norm,
) -> Result<GpResult> {
    let radii = radius_grid(emb, n_radii, theiler, norm)?;
    let sums = correlation_sum(emb, &radii, theiler, norm)?;
    dimension_from_sums(radii, sums)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, System, SystemSpec};

    #[test]
    fn collinear_triple() {
        let e = DelayEmbedding::from_points(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let c = correlation_sum(&e, &[1.5], 0, Norm::Chebyshev).unwrap();
        assert_eq!(c, vec![2.0 / 3.0]);
    }

    #[test]
    fn saturates_at_diameter() {
        let s = generate(&SystemSpec::new(System::henon_canonical(), 500).with_transient(100)).unwrap();
        let e = delay_embed(&s, 2, 1).unwrap();
        let c = correlation_sum(&e, &[0.01, 0.1, 1.0, 4.0], 0, Norm::Euclidean).unwrap();
        assert_eq!(*c.last().unwrap(), 1.0);
        assert!(c.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rejects_bad_radii_and_empty_pairs() {
        let e = DelayEmbedding::from_points(&[vec![0.0], vec![1.0]]).unwrap();
        assert!(correlation_sum(&e, &[1.0, 0.5], 0, Norm::Chebyshev).is_err());
        assert!(correlation_sum(&e, &[0.0, 0.5], 0, Norm::Chebyshev).is_err());
        assert!(correlation_sum(&e, &[1.0], 1, Norm::Chebyshev).is_err());
    }

    #[test]
    fn admissible_pair_count() {
        for n in 0..12 {
            for w in 0..5 {
                let brute = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|(i, j)| j - i > w).count();
                assert_eq!(admissible_pairs(n, w), brute as u64);
            }
        }
    }

    #[test]
    fn straight_run_prefers_longest() {
        let log_r: Vec<f64> = (0..8).map(f64::from).collect();
        // slopes: 3, 1, 1, 1.05, 1, 0.2, 0.2
        let ys = [0.0, 3.0, 4.0, 5.0, 6.05, 7.05, 7.25, 7.45];
        let log_c: Vec<Option<f64>> = ys.iter().map(|&v| Some(v)).collect();
        assert_eq!(longest_straight_run(&log_r, &log_c), Some((1, 5)));
    }

    #[test]
    fn constant_series_has_no_scaling_region() {
        let s = TimeSeries::from_map(vec![1.0; 300]).unwrap();
        assert!(matches!(
            correlation_dimension(&s, &GpParams::new(2, 1, 12, 0)),
            Err(Error::NoScalingRegion(_))
        ));
    }

    fn henon(n: usize) -> TimeSeries {
        generate(&SystemSpec::new(System::henon_canonical(), n).with_transient(100)).unwrap()
    }

    #[test]
    fn matches_double_loop() {
        let e = delay_embed(&henon(5000), 2, 1).unwrap();
        let radii: Vec<f64> = (0..20).map(|k| 1e-3 * 1.5f64.powi(k)).collect();
        let got = correlation_sum(&e, &radii, 1, Norm::Chebyshev).unwrap();
        let pts: Vec<&[f64]> = (0..e.len()).map(|i| e.point(i)).collect();
        let mut pairs = 0u64;
        let mut within = vec![0u64; radii.len()];
        for i in 0..pts.len() {
            for j in i + 2..pts.len() {
                pairs += 1;
                let d = (pts[i][0] - pts[j][0]).abs().max((pts[i][1] - pts[j][1]).abs());
                for (k, r) in radii.iter().enumerate() {
                    if d <= *r {
                        within[k] += 1;
                    }
                }
            }
        }
        let want: Vec<f64> = within.iter().map(|&c| c as f64 / pairs as f64).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn uniform_controls() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let u: Vec<f64> = (0..20_000).map(|_| rng.random()).collect();
        let est = |pts: Vec<Vec<f64>>| {
            let e = DelayEmbedding::from_points(&pts).unwrap();
            embedding_dimension_estimate(&e, 20, 0, Norm::Chebyshev).unwrap().d2
        };
        let line = est(u[..10_000].iter().map(|&v| vec![v, v]).collect());
        assert!((line - 1.0).abs() < 0.05, "{line}");
        let square = est(u.chunks(2).map(|c| c.to_vec()).collect());
        assert!((square - 2.0).abs() < 0.1, "{square}");
    }

    #[test]
    fn henon_dimension() {
        let r = correlation_dimension(&henon(5000), &GpParams::new(2, 1, 20, 1)).unwrap();
        assert!((r.d2 - 1.22).abs() < 0.15, "{}", r.d2);
        assert!(r.fit_range.1 - r.fit_range.0 >= 2);
        assert!(r.correlation_sums.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn scale_invariant() {
        let s = henon(3000);
        let scaled = TimeSeries::from_map(s.samples().iter().map(|x| 8.0 * x).collect()).unwrap();
        let p = GpParams::new(2, 1, 16, 1);
        let a = correlation_dimension(&s, &p).unwrap();
        let b = correlation_dimension(&scaled, &p).unwrap();
        assert!((a.d2 - b.d2).abs() < 1e-6);
        for (ra, rb) in a.radii.iter().zip(&b.radii) {
            assert!((8.0 * ra - rb).abs() < 1e-12 * rb);
        }
    }
}
