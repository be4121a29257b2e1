//! Index × trial × class tensors and their summaries.

use ndarray::Array3;
use serde::{Deserialize, Serialize};

use super::extract::FeatureVector;
use crate::error::{Error, Result};
use crate::label::Label;

pub const CLASSES: [Label; 2] = [Label::Positive, Label::Negative];

/// `features[[index, trial, class]]`, classes ordered (+1, −1), trials sorted
/// by id within each class.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    features: Array3<f64>,
    trial_ids: [Vec<u64>; 2],
}

impl FeatureMatrix {
    /// Requires both classes present in equal numbers.
    pub fn from_vectors(vectors: &[FeatureVector]) -> Result<Self> {
        let mut by_class: [Vec<&FeatureVector>; 2] = [Vec::new(), Vec::new()];
        for v in vectors {
            by_class[v.label.class_index()].push(v);
        }
        let (pos, neg) = (by_class[0].len(), by_class[1].len());
        if pos == 0 {
            return Err(Error::MissingClass(1));
        }
        if neg == 0 {
            return Err(Error::MissingClass(-1));
        }
        if pos != neg {
            return Err(Error::ClassImbalance {
                positive: pos,
                negative: neg,
            });
        }
        let mut features = Array3::zeros((4, pos, 2));
        let mut trial_ids = [Vec::with_capacity(pos), Vec::with_capacity(pos)];
        for (c, class) in by_class.iter_mut().enumerate() {
            class.sort_by_key(|v| v.trial_id);
            for (t, v) in class.iter().enumerate() {
                for (k, x) in v.values().into_iter().enumerate() {
                    features[[k, t, c]] = x;
                }
                trial_ids[c].push(v.trial_id);
            }
        }
        Ok(Self { features, trial_ids })
    }

    pub fn features(&self) -> &Array3<f64> {
        &self.features
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        self.features.dim()
    }

    pub fn n_trials(&self) -> usize {
        self.features.dim().1
    }

    pub fn trial_ids(&self, class: Label) -> &[u64] {
        &self.trial_ids[class.class_index()]
    }

    pub fn get(&self, trial: usize, class: Label) -> [f64; 4] {
        let c = class.class_index();
        std::array::from_fn(|k| self.features[[k, trial, c]])
    }

    /// Class +1 trials first, then class −1.
    pub fn to_vectors(&self) -> Vec<FeatureVector> {
        CLASSES
            .iter()
            .flat_map(|&label| {
                (0..self.n_trials()).map(move |t| {
                    FeatureVector::from_values(self.trial_ids[label.class_index()][t], label, self.get(t, label))
                })
            })
            .collect()
    }

    /// Applies `f` to every 4-vector, keeping ids and layout.
    pub fn map_rows(&self, mut f: impl FnMut([f64; 4]) -> [f64; 4]) -> Self {
        let mut out = self.clone();
        for c in 0..2 {
            for t in 0..self.n_trials() {
                let row = f(std::array::from_fn(|k| self.features[[k, t, c]]));
                for (k, v) in row.into_iter().enumerate() {
                    out.features[[k, t, c]] = v;
                }
            }
        }
        out
    }
}

/// Training and test tensors, each required to be class balanced.
pub fn build_matrices(train: &[FeatureVector], test: &[FeatureVector]) -> Result<(FeatureMatrix, FeatureMatrix)> {
    Ok((FeatureMatrix::from_vectors(train)?, FeatureMatrix::from_vectors(test)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std: f64,
    pub n: usize,
    /// Set when fewer than two values were available.
    pub degenerate: bool,
}

impl Moments {
    pub fn of(v: &[f64]) -> Option<Self> {
        if v.is_empty() {
            return None;
        }
        let n = v.len();
        let mean = v.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Self {
            mean,
            std,
            n,
            degenerate: n < 2,
        })
    }

    /// `mean (std)` with four decimals.
    pub fn render(&self) -> String {
        format!("{:.4} ({:.4})", self.mean, self.std)
    }
}

/// `cells[feature][class]`, `None` where a class has no trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub cells: [[Option<Moments>; 2]; 4],
}

const ROW_TITLES: [&str; 4] = [
    "Largest Lyapunov exponent",
    "Mutual information",
    "Minimum embedding dimension",
    "Correlation dimension",
];

impl Summary {
    /// One row per index, one `mean (std)` column per class.
    pub fn render(&self) -> String {
        let mut s = format!("{:<30}{:<20}{:<20}\n", "Index", "Class 1", "Class 2");
        for (k, row) in self.cells.iter().enumerate() {
            let cell = |m: &Option<Moments>| m.map_or_else(|| "-".to_string(), |m| m.render());
            s.push_str(&format!("{:<30}{:<20}{:<20}\n", ROW_TITLES[k], cell(&row[0]), cell(&row[1])));
        }
        s
    }
}

pub fn summarize(vectors: &[FeatureVector]) -> Summary {
    let cells = std::array::from_fn(|k| {
        CLASSES.map(|label| {
            let v: Vec<f64> = vectors.iter().filter(|f| f.label == label).map(|f| f.values()[k]).collect();
            Moments::of(&v)
        })
    });
    Summary { cells }
}

pub fn summarize_matrix(m: &FeatureMatrix) -> Summary {
    summarize(&m.to_vectors())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub centers: Vec<f64>,
    /// Per class (+1, −1) relative frequencies; all zero for an absent class.
    pub freq: [Vec<f64>; 2],
}

impl Histogram {
    /// Sum over bins of the smaller of the two class frequencies.
    pub fn overlap(&self) -> f64 {
        self.freq[0].iter().zip(&self.freq[1]).map(|(a, b)| a.min(*b)).sum()
    }
}

/// Relative-frequency curves of one index over equal bins spanning the
/// pooled range of both classes.
pub fn histogram(vectors: &[FeatureVector], feature: usize, bins: usize) -> Result<Histogram> {
    if bins < 2 {
        return Err(Error::InvalidInput(format!("bins must be at least 2, got {bins}")));
    }
    if feature >= 4 {
        return Err(Error::InvalidInput(format!("feature index must be 0..4, got {feature}")));
    }
    if vectors.is_empty() {
        return Err(Error::InvalidInput("no feature vectors".into()));
    }
    let vals = || vectors.iter().map(|f| f.values()[feature]);
    let (mut lo, mut hi) = vals().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if hi <= lo {
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = [vec![0usize; bins], vec![0usize; bins]];
    for f in vectors {
        let b = (((f.values()[feature] - lo) / width) as usize).min(bins - 1);
        counts[f.label.class_index()][b] += 1;
    }
    let freq = counts.map(|c| {
        let total: usize = c.iter().sum();
        c.iter()
            .map(|&k| if total == 0 { 0.0 } else { k as f64 / total as f64 })
            .collect()
    });
    Ok(Histogram {
        centers: (0..bins).map(|b| lo + (b as f64 + 0.5) * width).collect(),
        freq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fv(id: u64, label: Label, v: [f64; 4]) -> FeatureVector {
        FeatureVector::from_values(id, label, v)
    }

    fn balanced(n: usize) -> Vec<FeatureVector> {
        (0..2 * n)
            .map(|i| {
                let label = if i % 2 == 0 { Label::Positive } else { Label::Negative };
                fv(i as u64, label, [i as f64, 0.5 * i as f64, 2.0, 1.0 + i as f64])
            })
            .collect()
    }

    #[test]
    fn reference_corpus_shapes() {
        let (train, test) = build_matrices(&balanced(400), &balanced(450)).unwrap();
        assert_eq!(train.shape(), (4, 400, 2));
        assert_eq!(test.shape(), (4, 450, 2));
    }

    #[test]
    fn one_per_class() {
        let m = FeatureMatrix::from_vectors(&balanced(1)).unwrap();
        assert_eq!(m.shape(), (4, 1, 2));
        assert_eq!(m.get(0, Label::Negative), [1.0, 0.5, 2.0, 2.0]);
    }

    #[test]
    fn imbalance_and_missing_class() {
        let mut v = balanced(2);
        v.push(fv(99, Label::Positive, [0.0; 4]));
        assert_eq!(
            FeatureMatrix::from_vectors(&v),
            Err(Error::ClassImbalance { positive: 3, negative: 2 })
        );
        let only: Vec<_> = v.into_iter().filter(|f| f.label == Label::Positive).collect();
        assert_eq!(FeatureMatrix::from_vectors(&only), Err(Error::MissingClass(-1)));
    }

    #[test]
    fn sorted_by_trial_id() {
        let mut v = balanced(3);
        v.reverse();
        let m = FeatureMatrix::from_vectors(&v).unwrap();
        assert_eq!(m.trial_ids(Label::Positive), &[0, 2, 4]);
        assert_eq!(m.trial_ids(Label::Negative), &[1, 3, 5]);
    }

    #[test]
    fn summary_cells() {
        let v = vec![fv(0, Label::Positive, [0.0; 4]), fv(1, Label::Positive, [1.0; 4]), fv(2, Label::Negative, [3.0; 4])];
        let s = summarize(&v);
        let pos = s.cells[0][0].unwrap();
        assert_eq!(pos.mean, 0.5);
        assert!((pos.std - 0.5f64.sqrt()).abs() < 1e-15);
        let neg = s.cells[0][1].unwrap();
        assert_eq!((neg.std, neg.degenerate), (0.0, true));
        let table = Moments {
            mean: 0.3821,
            std: 0.1246,
            n: 400,
            degenerate: false,
        };
        assert_eq!(table.render(), "0.3821 (0.1246)");
        assert!(s.render().contains("0.5000 (0.7071)"));
    }

    #[test]
    fn histogram_single_bin_and_absent_class() {
        let v: Vec<_> = (0..5).map(|i| fv(i, Label::Positive, [7.0; 4])).collect();
        let h = histogram(&v, 0, 10).unwrap();
        assert_eq!(h.freq[0].iter().filter(|&&f| f == 1.0).count(), 1);
        assert!(h.freq[1].iter().all(|&f| f == 0.0));
        assert!(histogram(&v, 0, 1).is_err());
    }

    #[test]
    fn separated_gaussians_barely_overlap() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal};
        // means 4 sd apart: the exact overlap of the densities is 2Φ(−2) ≈ 0.0455
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let (a, b) = (Normal::new(0.0, 1.0).unwrap(), Normal::new(4.0, 1.0).unwrap());
        let mut v = Vec::new();
        for i in 0..2000 {
            v.push(fv(i, Label::Positive, [a.sample(&mut rng); 4]));
            v.push(fv(10_000 + i, Label::Negative, [b.sample(&mut rng); 4]));
        }
        let h = histogram(&v, 0, 30).unwrap();
        assert!(h.overlap() < 0.2, "{}", h.overlap());
    }

    proptest! {
        #[test]
        fn round_trip(vals in prop::collection::vec(prop::array::uniform4(-1e3f64..1e3), 1..40)) {
            let n = vals.len();
            let v: Vec<FeatureVector> = vals.iter().enumerate().map(|(i, &x)| fv(i as u64, Label::Positive, x)).chain(vals.iter().enumerate().map(|(i, &x)| fv((n + i) as u64, Label::Negative, x.map(|y| -y))))
            .collect();
            let m = FeatureMatrix::from_vectors(&v).unwrap();
            prop_assert_eq!(m.to_vectors(), v);
        }

        #[test]
        fn histogram_sums_to_one(vals in prop::collection::vec((-5.0f64..5.0, any::<bool>()), 2..200), bins in 2usize..40) {
            let v: Vec<_> = vals.iter().enumerate()
                .map(|(i, &(x, pos))| fv(i as u64, if pos { Label::Positive } else { Label::Negative }, [x; 4]))
                .collect();
            let h = histogram(&v, 2, bins).unwrap();
            for c in 0..2 {
                let s: f64 = h.freq[c].iter().sum();
                prop_assert!(s == 0.0 || (s - 1.0).abs() < 1e-12);
            }
        }
    }
}
