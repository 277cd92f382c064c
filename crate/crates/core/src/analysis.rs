//! Feature-quality diagnostics: window-feature stability, k-means++ with
//! an elbow/silhouette sweep, a 2-D PCA projection and the most/least
//! similar series pairs.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::error::{Error, Result};
use crate::extractor::FeatureVector;
use crate::rng;

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    sq_dist(a, b).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityRecord {
    pub series_id: String,
    /// Population std / |mean| per feature; `None` where |mean| < 1e-12.
    pub ratios: Vec<Option<f64>>,
    /// Mean of the defined ratios.
    pub aggregate: Option<f64>,
    /// Fewer than two windows, or some ratio undefined.
    pub flagged: bool,
    pub windows: usize,
}

pub fn stability(groups: &[Vec<FeatureVector>]) -> Vec<StabilityRecord> {
    groups
        .iter()
        .filter(|g| !g.is_empty())
        .map(|g| {
            let n = g.len() as f64;
            let dim = g[0].values.len();
            let ratios: Vec<Option<f64>> = (0..dim)
                .map(|j| {
                    let mean = g.iter().map(|f| f.values[j]).sum::<f64>() / n;
                    let var = g.iter().map(|f| (f.values[j] - mean).powi(2)).sum::<f64>() / n;
                    (mean.abs() >= 1e-12).then(|| var.sqrt() / mean.abs())
                })
                .collect();
            let defined: Vec<f64> = ratios.iter().flatten().copied().collect();
            StabilityRecord {
                series_id: g[0].series_id.clone(),
                aggregate: (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64),
                flagged: g.len() < 2 || defined.len() < dim,
                ratios,
                windows: g.len(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

/// Histogram of every defined per-feature ratio; the last bin also counts
/// values at or above `max`.
pub fn stability_histogram(records: &[StabilityRecord], bins: usize, max: f64) -> Vec<HistogramBin> {
    let width = max / bins as f64;
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|b| HistogramBin {
            lower: b as f64 * width,
            upper: (b + 1) as f64 * width,
            count: 0,
        })
        .collect();
    for r in records.iter().flat_map(|r| r.ratios.iter().flatten()) {
        let b = ((r / width) as usize).min(bins - 1);
        out[b].count += 1;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    PlusPlus,
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterReport {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    pub silhouette: f64,
    pub cluster_means: Vec<Vec<f64>>,
    pub cluster_stds: Vec<Vec<f64>>,
}

fn distinct_count(points: &[Vec<f64>]) -> usize {
    let mut sorted: Vec<&Vec<f64>> = points.iter().collect();
    sorted.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    sorted.dedup();
    sorted.len()
}

fn seed_centroids(points: &[Vec<f64>], k: usize, init: Init, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    match init {
        Init::Random => rand::seq::index::sample(rng, n, k)
            .into_iter()
            .map(|i| points[i].clone())
            .collect(),
        Init::PlusPlus => {
            let mut centroids = vec![points[rng.gen_range(0..n)].clone()];
            let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
            while centroids.len() < k {
                let total: f64 = d2.iter().sum();
                let pick = if total > 0.0 {
                    let mut target = rng.gen::<f64>() * total;
                    let mut chosen = n - 1;
                    for (i, d) in d2.iter().enumerate() {
                        if *d > 0.0 && target < *d {
                            chosen = i;
                            break;
                        }
                        target -= d;
                    }
                    if d2[chosen] == 0.0 {
                        chosen = d2.iter().rposition(|d| *d > 0.0).expect("total > 0");
                    }
                    chosen
                } else {
                    rng.gen_range(0..n)
                };
                centroids.push(points[pick].clone());
                for (d, p) in d2.iter_mut().zip(points) {
                    *d = d.min(sq_dist(p, &centroids[centroids.len() - 1]));
                }
            }
            centroids
        }
    }
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(p, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// One Lloyd run: until the largest centroid shift is below 1e-9 or 300
/// iterations, then Hartigan refinement. Empty clusters are re-seeded with
/// the worst-fitting point.
fn lloyd(points: &[Vec<f64>], mut centroids: Vec<Vec<f64>>) -> (Vec<usize>, Vec<Vec<f64>>, f64) {
    let k = centroids.len();
    let dim = points[0].len();
    let mut assign = vec![0; points.len()];
    for _ in 0..300 {
        let mut costs = Vec::with_capacity(points.len());
        for (a, p) in assign.iter_mut().zip(points) {
            let (c, d) = nearest(p, &centroids);
            *a = c;
            costs.push(d);
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (a, p) in assign.iter().zip(points) {
            counts[*a] += 1;
            for (s, v) in sums[*a].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                let worst = (0..points.len())
                    .max_by(|&a, &b| costs[a].total_cmp(&costs[b]).then(b.cmp(&a)))
                    .expect("non-empty");
                counts[assign[worst]] -= 1;
                for (s, v) in sums[assign[worst]].iter_mut().zip(&points[worst]) {
                    *s -= v;
                }
                assign[worst] = c;
                costs[worst] = 0.0;
                counts[c] = 1;
                sums[c] = points[worst].clone();
            }
        }
        let mut shift: f64 = 0.0;
        for c in 0..k {
            let next: Vec<f64> = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            shift = shift.max(dist(&next, &centroids[c]));
            centroids[c] = next;
        }
        if shift < 1e-9 {
            break;
        }
    }
    for (a, p) in assign.iter_mut().zip(points) {
        *a = nearest(p, &centroids).0;
    }
    let centroids = hartigan(points, &mut assign, k);
    let inertia = assign.iter().zip(points).map(|(a, p)| sq_dist(p, &centroids[*a])).sum();
    (assign, centroids, inertia)
}

fn means(points: &[Vec<f64>], assign: &[usize], k: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    let dim = points[0].len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (a, p) in assign.iter().zip(points) {
        counts[*a] += 1;
        for (s, v) in sums[*a].iter_mut().zip(p) {
            *s += v;
        }
    }
    for (s, n) in sums.iter_mut().zip(&counts) {
        s.iter_mut().for_each(|v| *v /= (*n).max(1) as f64);
    }
    (sums, counts)
}

/// Single-point transfers that strictly lower the inertia, taking the
/// centroid shift into account; escapes Lloyd fixed points that a better
/// partition is one move away from.
fn hartigan(points: &[Vec<f64>], assign: &mut [usize], k: usize) -> Vec<Vec<f64>> {
    let (mut centroids, mut counts) = means(points, assign, k);
    let scale: f64 = points.iter().map(|p| sq_dist(p, &centroids[0])).sum::<f64>().max(f64::MIN_POSITIVE);
    for _ in 0..300 {
        let mut moved = false;
        for i in 0..points.len() {
            let from = assign[i];
            if counts[from] <= 1 {
                continue;
            }
            let nf = counts[from] as f64;
            let removal = nf / (nf - 1.0) * sq_dist(&points[i], &centroids[from]);
            let mut best = (from, 0.0);
            for to in (0..k).filter(|&c| c != from) {
                let nt = counts[to] as f64;
                let delta = nt / (nt + 1.0) * sq_dist(&points[i], &centroids[to]) - removal;
                if delta < best.1 - 1e-12 * scale {
                    best = (to, delta);
                }
            }
            if best.0 != from {
                assign[i] = best.0;
                (centroids, counts) = means(points, assign, k);
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    centroids
}

/// Mean silhouette with Euclidean distance; points in singleton clusters
/// score 0.
pub fn silhouette(points: &[Vec<f64>], assign: &[usize], k: usize) -> f64 {
    let n = points.len();
    let mut counts = vec![0usize; k];
    for a in assign {
        counts[*a] += 1;
    }
    let mut total = 0.0;
    for i in 0..n {
        if counts[assign[i]] <= 1 {
            continue;
        }
        let mut sums = vec![0.0; k];
        for j in 0..n {
            if i != j {
                sums[assign[j]] += dist(&points[i], &points[j]);
            }
        }
        let a = sums[assign[i]] / (counts[assign[i]] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != assign[i] && counts[c] > 0)
            .map(|c| sums[c] / counts[c] as f64)
            .fold(f64::INFINITY, f64::min);
        if b.is_finite() && a.max(b) > 0.0 {
            total += (b - a) / a.max(b);
        }
    }
    total / n as f64
}

pub fn kmeans(points: &[Vec<f64>], k: usize, restarts: usize, seed: u64, init: Init) -> Result<ClusterReport> {
    let n = points.len();
    if k < 2 || k > n {
        return Err(Error::InvalidInput(format!("k = {k} must lie in [2, {n}]")));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim || p.iter().any(|v| !v.is_finite())) {
        return Err(Error::InvalidInput("points must be finite and share a dimension".into()));
    }
    if distinct_count(points) < k {
        return Err(Error::InvalidInput(format!(
            "only {} distinct points for k = {k}",
            distinct_count(points)
        )));
    }
    let mut best: Option<(Vec<usize>, Vec<Vec<f64>>, f64)> = None;
    for r in 0..restarts.max(1) {
        let mut rng = rng::indexed_stream(seed, "clustering", r as u64);
        let start = seed_centroids(points, k, init, &mut rng);
        let run = lloyd(points, start);
        if best.as_ref().is_none_or(|b| run.2 < b.2) {
            best = Some(run);
        }
    }
    let (assignments, centroids, inertia) = best.expect("at least one restart");
    let mut cluster_means = vec![vec![0.0; dim]; k];
    let mut cluster_stds = vec![vec![0.0; dim]; k];
    for c in 0..k {
        let members: Vec<&Vec<f64>> = points.iter().zip(&assignments).filter(|(_, a)| **a == c).map(|(p, _)| p).collect();
        let m = members.len().max(1) as f64;
        for j in 0..dim {
            let mean = members.iter().map(|p| p[j]).sum::<f64>() / m;
            cluster_means[c][j] = mean;
            cluster_stds[c][j] = (members.iter().map(|p| (p[j] - mean).powi(2)).sum::<f64>() / m).sqrt();
        }
    }
    Ok(ClusterReport {
        k,
        silhouette: silhouette(points, &assignments, k),
        assignments,
        centroids,
        inertia,
        cluster_means,
        cluster_stds,
    })
}

/// k-means++ seeding, Lloyd iterations, best of `restarts` by inertia.
pub fn kmeans_pp(points: &[Vec<f64>], k: usize, restarts: usize, seed: u64) -> Result<ClusterReport> {
    kmeans(points, k, restarts, seed, Init::PlusPlus)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElbowRow {
    pub k: usize,
    pub inertia: f64,
    pub silhouette: f64,
}

pub fn elbow_sweep(
    points: &[Vec<f64>],
    ks: std::ops::RangeInclusive<usize>,
    restarts: usize,
    seed: u64,
) -> Result<Vec<ElbowRow>> {
    if *ks.start() < 2 || *ks.end() + 1 > points.len() {
        return Err(Error::InvalidInput(format!(
            "k range {ks:?} must lie within [2, {}]",
            points.len().saturating_sub(1)
        )));
    }
    ks.map(|k| {
        kmeans_pp(points, k, restarts, seed).map(|r| ElbowRow {
            k,
            inertia: r.inertia,
            silhouette: r.silhouette,
        })
    })
    .collect()
}

/// Adjusted Rand index between two labelings.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let ka = a.iter().max().map_or(0, |m| m + 1);
    let kb = b.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![vec![0u64; kb]; ka];
    for (x, y) in a.iter().zip(b) {
        table[*x][*y] += 1;
    }
    let c2 = |v: u64| (v * v.saturating_sub(1)) as f64 / 2.0;
    let index: f64 = table.iter().flatten().map(|v| c2(*v)).sum();
    let rows: f64 = table.iter().map(|r| c2(r.iter().sum())).sum();
    let cols: f64 = (0..kb).map(|j| c2(table.iter().map(|r| r[j]).sum())).sum();
    let expected = rows * cols / c2(n as u64);
    let max = (rows + cols) / 2.0;
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub coords: Vec<[f64; 2]>,
    pub explained_variance: [f64; 2],
    /// Covariance rank below 2; the second coordinate is zero.
    pub rank_deficient: bool,
}

/// Mean-centred projection onto the top two principal components. Each
/// component's sign is fixed so its largest-magnitude loading is positive.
pub fn pca_2d(points: &[Vec<f64>]) -> Result<Projection> {
    let n = points.len();
    if n < 3 {
        return Err(Error::InvalidInput("PCA needs at least 3 points".into()));
    }
    let dim = points[0].len();
    if dim < 2 || points.iter().any(|p| p.len() != dim) {
        return Err(Error::InvalidInput("points must share a dimension of at least 2".into()));
    }
    let mean: Vec<f64> = (0..dim).map(|j| points.iter().map(|p| p[j]).sum::<f64>() / n as f64).collect();
    let centred = DMatrix::from_fn(n, dim, |i, j| points[i][j] - mean[j]);
    let cov = centred.transpose() * &centred / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let trace: f64 = eig.eigenvalues.iter().map(|v| v.max(0.0)).sum();
    let rank_deficient = eig.eigenvalues[order[1]] <= 1e-12 * trace.max(f64::MIN_POSITIVE);
    let mut comps = Vec::with_capacity(2);
    for (c, &idx) in order.iter().take(2).enumerate() {
        let mut v: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
        if c == 1 && rank_deficient {
            v.iter_mut().for_each(|x| *x = 0.0);
        }
        let lead = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        if lead < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        comps.push(v);
    }
    let coords = (0..n)
        .map(|i| {
            let row = centred.row(i);
            [
                row.iter().zip(&comps[0]).map(|(a, b)| a * b).sum(),
                row.iter().zip(&comps[1]).map(|(a, b)| a * b).sum(),
            ]
        })
        .collect();
    Ok(Projection {
        coords,
        explained_variance: [
            eig.eigenvalues[order[0]].max(0.0),
            if rank_deficient { 0.0 } else { eig.eigenvalues[order[1]] },
        ],
        rank_deficient,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pair {
    pub first: String,
    pub second: String,
    pub distance: f64,
}

/// Closest and farthest pair of rows by Euclidean distance; ties go to the
/// lexicographically smallest `(id, id)` pair.
pub fn similarity_extremes(ids: &[String], rows: &[Vec<f64>]) -> Result<(Pair, Pair)> {
    if ids.len() < 2 || ids.len() != rows.len() {
        return Err(Error::InvalidInput("need at least two labelled rows".into()));
    }
    let key = |i: usize, j: usize| {
        let (a, b) = (&ids[i], &ids[j]);
        if a <= b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        }
    };
    let mut closest: Option<(f64, (String, String))> = None;
    let mut farthest: Option<(f64, (String, String))> = None;
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let d = dist(&rows[i], &rows[j]);
            let k = key(i, j);
            if closest.as_ref().is_none_or(|(bd, bk)| d < *bd || (d == *bd && k < *bk)) {
                closest = Some((d, k.clone()));
            }
            if farthest.as_ref().is_none_or(|(bd, bk)| d > *bd || (d == *bd && k < *bk)) {
                farthest = Some((d, k));
            }
        }
    }
    let to_pair = |(d, (a, b)): (f64, (String, String))| Pair { first: a, second: b, distance: d };
    Ok((to_pair(closest.expect("two rows")), to_pair(farthest.expect("two rows"))))
}

/// For each query point, the index of the nearest projected row.
pub fn nearest_rows(coords: &[[f64; 2]], queries: &[[f64; 2]]) -> Vec<usize> {
    queries
        .iter()
        .map(|q| {
            (0..coords.len())
                .min_by(|&a, &b| sq_dist(&coords[a], q).total_cmp(&sq_dist(&coords[b], q)).then(a.cmp(&b)))
                .unwrap_or(0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extractor::FeatureKind;

    fn fv(values: Vec<f64>) -> FeatureVector {
        FeatureVector { series_id: "s".into(), kind: FeatureKind::Window, values, window_offset: None }
    }

    #[test]
    fn stability_examples() {
        let same = stability(&[vec![fv(vec![2.0, -1.0]), fv(vec![2.0, -1.0])]]);
        assert_eq!(same[0].ratios, vec![Some(0.0), Some(0.0)]);
        let hand = stability(&[vec![fv(vec![1.0]), fv(vec![3.0])]]);
        assert_eq!(hand[0].ratios, vec![Some(0.5)]);
        let zero_mean = stability(&[vec![fv(vec![1.0]), fv(vec![-1.0])]]);
        assert_eq!(zero_mean[0].ratios, vec![None]);
        assert!(zero_mean[0].flagged);
        let single = stability(&[vec![fv(vec![1.0])]]);
        assert!(single[0].flagged);
        let h = stability_histogram(&hand, 4, 2.0);
        assert_eq!(h[1].count, 1);
    }

    #[test]
    fn k_equals_n_has_zero_inertia() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![5.0, 5.0], vec![2.0, 9.0]];
        let r = kmeans_pp(&pts, 4, 3, 1).unwrap();
        assert_eq!(r.inertia, 0.0);
    }

    #[test]
    fn duplicates_below_k_rejected() {
        let pts = vec![vec![1.0], vec![1.0], vec![1.0], vec![2.0]];
        assert!(kmeans_pp(&pts, 3, 2, 0).is_err());
    }

    #[test]
    fn ari_of_relabelled_partition_is_one() {
        assert!((adjusted_rand_index(&[0, 0, 1, 1, 2], &[2, 2, 0, 0, 1]) - 1.0).abs() < 1e-12);
        assert!(adjusted_rand_index(&[0, 0, 1, 1], &[0, 1, 0, 1]) < 0.0);
    }

    #[test]
    fn collinear_extremes() {
        let ids: Vec<String> = ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
        let rows = vec![vec![0.0], vec![1.0], vec![2.0]];
        let (close, far) = similarity_extremes(&ids, &rows).unwrap();
        assert_eq!((far.first.as_str(), far.second.as_str()), ("A", "C"));
        assert_eq!((close.first.as_str(), close.second.as_str()), ("A", "B"));
    }

    #[test]
    fn identical_rows_are_closest() {
        let ids: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
        let rows = vec![vec![0.0, 1.0], vec![3.0, 3.0], vec![0.0, 1.0]];
        let (close, _) = similarity_extremes(&ids, &rows).unwrap();
        assert_eq!(close.distance, 0.0);
        assert_eq!((close.first.as_str(), close.second.as_str()), ("x", "z"));
    }

    #[test]
    fn pca_rank_one_flagged() {
        let pts: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, 2.0 * i as f64, 0.0]).collect();
        let p = pca_2d(&pts).unwrap();
        assert!(p.rank_deficient);
        assert!(p.coords.iter().all(|c| c[1] == 0.0));
    }
}
