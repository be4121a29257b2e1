//! Delay-coordinate reconstruction and nearest-neighbor search with a
//! Theiler exclusion window.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timeseries::TimeSeries;

/// Distance used for neighbor searches and correlation sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    /// Maximum coordinate difference.
    #[default]
    Chebyshev,
    Euclidean,
}

impl Norm {
    /// Monotone surrogate of the distance: max |d| or sum d².
    ///
    /// Comparisons are done on this value so that pruning by a single axis
    /// is exact in floating point.
    #[inline]
    pub(crate) fn reduced(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Norm::Chebyshev => a
                .iter()
                .zip(b)
                .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs())),
            Norm::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum(),
        }
    }

    #[inline]
    pub(crate) fn reduced_axis(self, d: f64) -> f64 {
        match self {
            Norm::Chebyshev => d.abs(),
            Norm::Euclidean => d * d,
        }
    }

    #[inline]
    pub(crate) fn finish(self, r: f64) -> f64 {
        match self {
            Norm::Chebyshev => r,
            Norm::Euclidean => r.sqrt(),
        }
    }

    #[inline]
    pub(crate) fn to_reduced(self, dist: f64) -> f64 {
        match self {
            Norm::Chebyshev => dist,
            Norm::Euclidean => dist * dist,
        }
    }

    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        self.finish(self.reduced(a, b))
    }
}

/// Whether a series comes from an iterated map or a sampled flow. Only used
/// to pick default exclusion windows and evolution times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalKind {
    Map,
    Flow,
}

/// Default Theiler window: one sample for maps, a tenth of a second for flows.
pub fn default_theiler(kind: SignalKind, sampling_rate: f64) -> usize {
    match kind {
        SignalKind::Map => 1,
        SignalKind::Flow => ((sampling_rate / 10.0).round() as usize).max(1),
    }
}

/// Delay vectors `y_i = (x_i, x_{i+t}, ..., x_{i+(m-1)t})`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayEmbedding {
    dim: usize,
    lag: usize,
    coords: Vec<f64>,
}

impl DelayEmbedding {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lag(&self) -> usize {
        self.lag
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    /// Builds an embedding directly from points, e.g. for geometric test sets.
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map(Vec::len).unwrap_or(0);
        if dim == 0 || points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidInput(
                "points must be non-empty and share one dimension".into(),
            ));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite coordinate".into()));
        }
        Ok(Self {
            dim,
            lag: 1,
            coords: points.iter().flatten().copied().collect(),
        })
    }

    /// Largest pairwise extent along any coordinate (an upper bound on the
    /// Chebyshev diameter and a lower bound on the Euclidean one).
    pub fn extent(&self) -> f64 {
        (0..self.dim)
            .map(|k| {
                let (lo, hi) = self.points().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                    (lo.min(p[k]), hi.max(p[k]))
                });
                hi - lo
            })
            .fold(0.0, f64::max)
    }
}

/// Minimum series length needed to form at least two delay vectors.
pub fn min_embeddable_len(m: usize, t: usize) -> usize {
    (m - 1) * t + 2
}

pub fn delay_embed(series: &TimeSeries, m: usize, t: usize) -> Result<DelayEmbedding> {
    embed_slice(series.samples(), m, t)
}

pub(crate) fn embed_slice(x: &[f64], m: usize, t: usize) -> Result<DelayEmbedding> {
    if m == 0 || t == 0 {
        return Err(Error::InvalidInput(format!(
            "embedding dimension and lag must be positive (m={m}, t={t})"
        )));
    }
    let required = min_embeddable_len(m, t);
    if x.len() < required {
        return Err(Error::InsufficientLength {
            required,
            actual: x.len(),
        });
    }
    let count = x.len() - (m - 1) * t;
    let mut coords = Vec::with_capacity(count * m);
    for i in 0..count {
        for j in 0..m {
            coords.push(x[i + j * t]);
        }
    }
    Ok(DelayEmbedding {
        dim: m,
        lag: t,
        coords,
    })
}

/// Exhaustive nearest-neighbor scan. Candidates satisfy `|i - query| > theiler`;
/// ties go to the smallest index.
pub fn nearest_neighbor(
    embedding: &DelayEmbedding,
    query_index: usize,
    theiler: usize,
    norm: Norm,
) -> Result<(usize, f64)> {
    let q = embedding.point(query_index);
    let mut best: Option<(usize, f64)> = None;
    for j in 0..embedding.len() {
        if j.abs_diff(query_index) <= theiler {
            continue;
        }
        let r = norm.reduced(q, embedding.point(j));
        if best.is_none_or(|(_, b)| r < b) {
            best = Some((j, r));
        }
    }
    best.map(|(j, r)| (j, norm.finish(r)))
        .ok_or(Error::NoNeighbor {
            query: query_index,
            theiler,
        })
}

/// Neighbor index over an embedding: points sorted by their first
/// coordinate, searched outward with an exact axis bound. Results are
/// identical to [`nearest_neighbor`].
pub struct NeighborIndex<'a> {
    emb: &'a DelayEmbedding,
    norm: Norm,
    order: Vec<usize>,
    keys: Vec<f64>,
    rank: Vec<usize>,
}

impl<'a> NeighborIndex<'a> {
    pub fn new(emb: &'a DelayEmbedding, norm: Norm) -> Self {
        let mut order: Vec<usize> = (0..emb.len()).collect();
        order.sort_by(|&a, &b| {
            emb.point(a)[0]
                .total_cmp(&emb.point(b)[0])
                .then(a.cmp(&b))
        });
        let keys = order.iter().map(|&i| emb.point(i)[0]).collect();
        let mut rank = vec![0; order.len()];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r;
        }
        Self {
            emb,
            norm,
            order,
            keys,
            rank,
        }
    }

    pub fn embedding(&self) -> &DelayEmbedding {
        self.emb
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    /// Nearest admissible neighbor of point `query` among indices `< limit`.
    pub fn nearest_within(&self, query: usize, theiler: usize, limit: usize) -> Option<(usize, f64)> {
        let q = self.emb.point(query);
        let q0 = q[0];
        let start = self.rank[query];
        let mut best: Option<(usize, f64)> = None;
        let consider = |j: usize, best: &mut Option<(usize, f64)>| {
            if j >= limit || j.abs_diff(query) <= theiler {
                return;
            }
            let r = self.norm.reduced(q, self.emb.point(j));
            match *best {
                Some((bj, br)) if r > br || (r == br && j > bj) => {}
                _ => *best = Some((j, r)),
            }
        };
        let n = self.order.len();
        let (mut lo, mut hi) = (start, start + 1);
        let mut lo_open = true;
        let mut hi_open = true;
        while lo_open || hi_open {
            if hi_open {
                if hi >= n {
                    hi_open = false;
                } else {
                    let bound = self.norm.reduced_axis(self.keys[hi] - q0);
                    if best.is_some_and(|(_, b)| bound > b) {
                        hi_open = false;
                    } else {
                        consider(self.order[hi], &mut best);
                        hi += 1;
                    }
                }
            }
            if lo_open {
                if lo == 0 {
                    lo_open = false;
                } else {
                    let bound = self.norm.reduced_axis(q0 - self.keys[lo - 1]);
                    if best.is_some_and(|(_, b)| bound > b) {
                        lo_open = false;
                    } else {
                        consider(self.order[lo - 1], &mut best);
                        lo -= 1;
                    }
                }
            }
        }
        best.map(|(j, r)| (j, self.norm.finish(r)))
    }

    pub fn nearest(&self, query: usize, theiler: usize) -> Option<(usize, f64)> {
        self.nearest_within(query, theiler, self.emb.len())
    }

    /// Visits every admissible point `j < limit` whose distance to `query`
    /// is at most `radius`, passing `(j, distance)`.
    pub fn for_each_within(
        &self,
        query: usize,
        radius: f64,
        theiler: usize,
        limit: usize,
        mut f: impl FnMut(usize, f64),
    ) {
        let q = self.emb.point(query);
        let q0 = q[0];
        let r_red = self.norm.to_reduced(radius);
        let start = self.keys.partition_point(|&k| k < q0 - 2.0 * radius);
        for pos in start..self.keys.len() {
            let d0 = self.keys[pos] - q0;
            if self.norm.reduced_axis(d0) > r_red {
                if d0 > 0.0 {
                    break;
                }
                continue;
            }
            let j = self.order[pos];
            if j >= limit || j.abs_diff(query) <= theiler {
                continue;
            }
            let r = self.norm.reduced(q, self.emb.point(j));
            if r <= r_red {
                f(j, self.norm.finish(r));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(v: &[[f64; 2]]) -> DelayEmbedding {
        DelayEmbedding::from_points(&v.iter().map(|p| p.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn embed_small() {
        let s = TimeSeries::from_map(vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let e = delay_embed(&s, 2, 1).unwrap();
        let got: Vec<Vec<f64>> = e.points().map(|p| p.to_vec()).collect();
        assert_eq!(
            got,
            vec![vec![1.0, 2.0], vec![2.0, 3.0], vec![3.0, 4.0], vec![4.0, 5.0]]
        );
    }

    #[test]
    fn embed_dimension_one_is_identity() {
        let v: Vec<f64> = (0..17).map(|i| (i as f64).sin()).collect();
        let s = TimeSeries::from_map(v.clone()).unwrap();
        for t in [1, 3, 9] {
            let e = delay_embed(&s, 1, t).unwrap();
            assert_eq!(e.len(), v.len());
            assert!(e.points().zip(&v).all(|(p, x)| p[0] == *x));
        }
    }

    #[test]
    fn embed_count_arithmetic() {
        let s = TimeSeries::from_map(vec![0.0; 1000]).unwrap();
        assert_eq!(delay_embed(&s, 3, 5).unwrap().len(), 990);
    }

    #[test]
    fn embed_too_short_names_minimum() {
        let s = TimeSeries::from_map(vec![0.0; 10]).unwrap();
        assert_eq!(
            delay_embed(&s, 4, 3),
            Err(Error::InsufficientLength {
                required: 11,
                actual: 10
            })
        );
    }

    #[test]
    fn nearest_geometry() {
        let e = pts(&[[0.0, 0.0], [10.0, 10.0], [0.1, 0.0]]);
        assert_eq!(nearest_neighbor(&e, 0, 0, Norm::Chebyshev).unwrap().0, 2);
        assert_eq!(NeighborIndex::new(&e, Norm::Chebyshev).nearest(0, 0).unwrap().0, 2);
    }

    #[test]
    fn nearest_respects_theiler() {
        let e = pts(&[[0.0, 0.0], [0.1, 0.0], [10.0, 10.0]]);
        assert_eq!(nearest_neighbor(&e, 0, 1, Norm::Chebyshev).unwrap().0, 2);
        assert_eq!(NeighborIndex::new(&e, Norm::Euclidean).nearest(0, 1).unwrap().0, 2);
        assert!(matches!(
            nearest_neighbor(&e, 0, 2, Norm::Chebyshev),
            Err(Error::NoNeighbor { .. })
        ));
        assert!(NeighborIndex::new(&e, Norm::Chebyshev).nearest(0, 2).is_none());
    }

    #[test]
    fn ties_go_to_smallest_index() {
        let e = pts(&[[0.0, 0.0], [5.0, 5.0], [1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]]);
        for norm in [Norm::Chebyshev, Norm::Euclidean] {
            assert_eq!(nearest_neighbor(&e, 0, 0, norm).unwrap(), (2, 1.0));
            assert_eq!(NeighborIndex::new(&e, norm).nearest(0, 0).unwrap(), (2, 1.0));
        }
    }

    fn henon(n: usize) -> Vec<f64> {
        let (mut x, mut y) = (0.1, 0.0);
        let mut out = Vec::with_capacity(n);
        for i in 0..n + 100 {
            let nx = 1.0 - 1.4 * x * x + y;
            y = 0.3 * x;
            x = nx;
            if i >= 100 {
                out.push(x);
            }
        }
        out
    }

    #[test]
    fn henon_query_matches_scan() {
        let s = TimeSeries::from_map(henon(1000)).unwrap();
        let e = delay_embed(&s, 2, 1).unwrap();
        let idx = NeighborIndex::new(&e, Norm::Chebyshev);
        // plain double loop, independent of both search routines
        let q = e.point(500);
        let mut best = (usize::MAX, f64::INFINITY);
        for j in 0..e.len() {
            if j.abs_diff(500) > 10 {
                let d = (q[0] - e.point(j)[0]).abs().max((q[1] - e.point(j)[1]).abs());
                if d < best.1 {
                    best = (j, d);
                }
            }
        }
        assert_eq!(nearest_neighbor(&e, 500, 10, Norm::Chebyshev).unwrap(), best);
        assert_eq!(idx.nearest(500, 10).unwrap(), best);
    }

    #[test]
    fn within_radius_matches_filter() {
        let s = TimeSeries::from_map(henon(400)).unwrap();
        let e = delay_embed(&s, 3, 1).unwrap();
        for norm in [Norm::Chebyshev, Norm::Euclidean] {
            let idx = NeighborIndex::new(&e, norm);
            let mut got = Vec::new();
            idx.for_each_within(7, 0.3, 2, e.len(), |j, _| got.push(j));
            got.sort_unstable();
            let want: Vec<usize> = (0..e.len())
                .filter(|&j| {
                    j.abs_diff(7) > 2 && norm.reduced(e.point(7), e.point(j)) <= norm.to_reduced(0.3)
                })
                .collect();
            assert_eq!(got, want);
        }
    }

    proptest! {
        #[test]
        fn point_count_law(n in 2usize..400, m in 1usize..8, t in 1usize..12) {
            let s = TimeSeries::from_map((0..n).map(|i| i as f64).collect()).unwrap();
            match delay_embed(&s, m, t) {
                Ok(e) => {
                    prop_assert_eq!(e.len(), n - (m - 1) * t);
                    for i in [0, e.len() - 1] {
                        for j in 0..m {
                            prop_assert_eq!(e.point(i)[j], s.samples()[i + j * t]);
                        }
                    }
                }
                Err(Error::InsufficientLength { required, .. }) => prop_assert!(n < required),
                Err(e) => prop_assert!(false, "{e}"),
            }
        }

        #[test]
        fn index_equals_exhaustive_scan(
            v in prop::collection::vec(-3i32..3, 10..120),
            m in 1usize..4,
            theiler in 0usize..4,
            euclid in any::<bool>(),
        ) {
            // small integer alphabet forces many exact ties
            let s = TimeSeries::from_map(v.iter().map(|&x| x as f64).collect()).unwrap();
            let e = delay_embed(&s, m, 1).unwrap();
            let norm = if euclid { Norm::Euclidean } else { Norm::Chebyshev };
            let idx = NeighborIndex::new(&e, norm);
            for q in 0..e.len() {
                let a = nearest_neighbor(&e, q, theiler, norm).ok();
                prop_assert_eq!(a, idx.nearest(q, theiler));
            }
        }
    }
}
