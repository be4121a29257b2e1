//! Lloyd's k-means with k-means++ seeding and best-of-restarts selection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::Label;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub seed: u64,
    pub max_iters: usize,
    pub restarts: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            max_iters: 300,
            restarts: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansRun {
    pub centers: Vec<Vec<f64>>,
    pub assignment: Vec<usize>,
    pub inertia: f64,
    /// Inertia after every assignment step.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
    /// Which restart won.
    pub restart: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest center, ties to the lower index.
fn nearest(x: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = sq_dist(x, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centers = vec![points[rng.random_range(0..points.len())].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut chosen = points.len() - 1;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 && r < w {
                    chosen = i;
                    break;
                }
                r -= w;
            }
            // rounding can run off the end onto a zero-weight point
            if d2[chosen] == 0.0 {
                chosen = d2.iter().rposition(|&w| w > 0.0).unwrap_or(chosen);
            }
            chosen
        } else {
            rng.random_range(0..points.len())
        };
        centers.push(points[pick].clone());
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, &centers[centers.len() - 1]));
        }
    }
    centers
}

fn lloyd(points: &[Vec<f64>], mut centers: Vec<Vec<f64>>, max_iters: usize) -> KMeansRun {
    let k = centers.len();
    let dim = points[0].len();
    let mut assignment = vec![usize::MAX; points.len()];
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        let mut changed = false;
        let mut inertia = 0.0;
        for (i, p) in points.iter().enumerate() {
            let (c, d) = nearest(p, &centers);
            inertia += d;
            if assignment[i] != c {
                assignment[i] = c;
                changed = true;
            }
        }
        history.push(inertia);
        if !changed || iterations >= max_iters {
            return KMeansRun {
                centers,
                assignment,
                inertia,
                inertia_history: history,
                iterations,
                restart: 0,
            };
        }
        iterations += 1;
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in points.iter().zip(&assignment) {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // empty cluster: move it onto the point farthest from its center
                let far = (0..points.len())
                    .max_by(|&a, &b| {
                        sq_dist(&points[a], &centers[assignment[a]])
                            .total_cmp(&sq_dist(&points[b], &centers[assignment[b]]))
                            .then(b.cmp(&a))
                    })
                    .unwrap();
                if sq_dist(&points[far], &centers[assignment[far]]) == 0.0 {
                    // every point sits on a center already
                    continue;
                }
                log::debug!("k-means: re-seeding empty cluster {c} at point {far}");
                centers[c] = points[far].clone();
                let old = assignment[far];
                counts[old] -= 1;
                counts[c] = 1;
                assignment[far] = c;
            }
        }
    }
}

/// Best of `cfg.restarts` runs by (inertia, restart index). Points are
/// sorted first, so input order does not affect the result.
pub fn kmeans(points: &[Vec<f64>], k: usize, cfg: &KMeansConfig) -> Result<KMeansRun> {
    if k == 0 || points.len() < k {
        return Err(Error::InvalidInput(format!(
            "k-means needs 1 <= k <= number of points, got k = {k} for {} points",
            points.len()
        )));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::InvalidInput("points differ in dimension".into()));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<KMeansRun> = None;
    for r in 0..cfg.restarts.max(1) {
        let mut run = lloyd(&sorted, plus_plus(&sorted, k, &mut rng), cfg.max_iters);
        run.restart = r;
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    let mut best = best.unwrap();
    // report assignments in the caller's order
    best.assignment = points.iter().map(|p| nearest(p, &best.centers).0).collect();
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledCenter {
    pub center: Vec<f64>,
    pub label: Label,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterMode {
    /// `k` clusters inside each class.
    PerClass,
    /// `k` clusters over the pooled data, each labeled by majority vote
    /// (ties go to +1).
    Total,
}

/// Labeled centers from class-wise (or pooled) clustering. Each class is
/// clustered with a generator freshly seeded from `cfg.seed`.
pub fn kmeans_fit(points: &[Vec<f64>], labels: &[Label], k: usize, mode: ClusterMode, cfg: &KMeansConfig) -> Result<Vec<LabeledCenter>> {
    if points.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            actual: labels.len(),
        });
    }
    match mode {
        ClusterMode::PerClass => {
            let mut out = Vec::new();
            for label in [Label::Positive, Label::Negative] {
                let class: Vec<Vec<f64>> = points
                    .iter()
                    .zip(labels)
                    .filter(|(_, &l)| l == label)
                    .map(|(p, _)| p.clone())
                    .collect();
                if class.is_empty() {
                    return Err(Error::MissingClass(label.into()));
                }
                let run = kmeans(&class, k, cfg)?;
                out.extend(run.centers.into_iter().map(|center| LabeledCenter { center, label }));
            }
            Ok(out)
        }
        ClusterMode::Total => {
            let run = kmeans(points, k, cfg)?;
            let mut votes = vec![0i64; k];
            for (&c, l) in run.assignment.iter().zip(labels) {
                votes[c] += l.as_f64() as i64;
            }
            Ok(run
                .centers
                .into_iter()
                .zip(votes)
                .map(|(center, v)| LabeledCenter {
                    center,
                    label: Label::from_score(v as f64),
                })
                .collect())
        }
    }
}
