//! Train/test divergence statistics.
//!
//! Seven measures over per-feature 1-D samples and shared 50-bin
//! histograms: Welch t-test and two-sample KS p-values, mutual information
//! against set membership, KL and JS divergence, 1-D Wasserstein distance
//! and RBF-kernel MMD. A report carries the per-feature values and their
//! arithmetic means.
//!
//! Samples arrive as FP32 feature columns; the statistics themselves are
//! computed in f64.

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::util::par_map_indexed;

/// Histogram bin count used throughout.
pub const DEFAULT_BINS: usize = 50;

/// Smoothing mass added to each bin before KL.
const KL_SMOOTHING: f64 = 1e-10;

/// MMD subsample cap; larger samples are thinned by deterministic stride.
const MMD_MAX_POINTS: usize = 2000;

/// Aligned histograms of a train and a test sample over 50 shared bins.
#[derive(Debug, Clone)]
pub struct HistogramPair {
    /// `bins + 1` edges spanning the union range of both samples.
    pub bin_edges: Vec<f64>,
    pub p_train: Vec<f64>,
    pub p_test: Vec<f64>,
}

/// Shared-edge histograms: edges are a linspace over the pooled range; a
/// degenerate range (all values equal) puts all mass in the first bin.
pub fn histogram_pair(train: &[f32], test: &[f32], bins: usize) -> Result<HistogramPair> {
    if train.is_empty() || test.is_empty() {
        return Err(Error::Data(
            "histograms require non-empty train and test samples".into(),
        ));
    }
    assert!(bins >= 1);
    let (lo, hi) = pooled_range(train, test);
    let bin_edges: Vec<f64> = (0..=bins)
        .map(|i| lo + (hi - lo) * i as f64 / bins as f64)
        .collect();
    let assign = |p: &mut [f64], sample: &[f32]| {
        for &v in sample {
            p[bin_index(v as f64, lo, hi, bins)] += 1.0;
        }
        let n = sample.len() as f64;
        for q in p.iter_mut() {
            *q /= n;
        }
    };
    let mut p_train = vec![0.0; bins];
    let mut p_test = vec![0.0; bins];
    assign(&mut p_train, train);
    assign(&mut p_test, test);
    Ok(HistogramPair {
        bin_edges,
        p_train,
        p_test,
    })
}

fn pooled_range(a: &[f32], b: &[f32]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in a.iter().chain(b) {
        let v = v as f64;
        if v < lo {
            lo = v;
        }
        if v > hi {
            hi = v;
        }
    }
    (lo, hi)
}

fn bin_index(v: f64, lo: f64, hi: f64, bins: usize) -> usize {
    if hi <= lo {
        return 0;
    }
    (((v - lo) / (hi - lo) * bins as f64) as usize).min(bins - 1)
}

/// Two-sample Kolmogorov-Smirnov p-value.
///
/// The statistic is the supremum gap between the two empirical CDFs; the
/// p-value evaluates the asymptotic Kolmogorov series at
/// `z = D * sqrt(n1*n2 / (n1+n2))`.
pub fn ks_test(train: &[f32], test: &[f32]) -> f64 {
    let d = ks_statistic(train, test);
    let n1 = train.len() as f64;
    let n2 = test.len() as f64;
    let effective = n1 * n2 / (n1 + n2);
    kolmogorov_sf(d * effective.sqrt())
}

fn sorted_f64(sample: &[f32]) -> Vec<f64> {
    let mut v: Vec<f64> = sample.iter().map(|&x| x as f64).collect();
    v.sort_unstable_by(|a, b| a.total_cmp(b));
    v
}

/// `sup |F1 - F2|` over the pooled sample points.
pub fn ks_statistic(train: &[f32], test: &[f32]) -> f64 {
    let a = sorted_f64(train);
    let b = sorted_f64(test);
    let (na, nb) = (a.len(), b.len());
    let mut ia = 0;
    let mut ib = 0;
    let mut sup = 0.0f64;
    while ia < na || ib < nb {
        let x = match (a.get(ia), b.get(ib)) {
            (Some(&va), Some(&vb)) => va.min(vb),
            (Some(&va), None) => va,
            (None, Some(&vb)) => vb,
            (None, None) => break,
        };
        while ia < na && a[ia] <= x {
            ia += 1;
        }
        while ib < nb && b[ib] <= x {
            ib += 1;
        }
        let gap = (ia as f64 / na as f64 - ib as f64 / nb as f64).abs();
        if gap > sup {
            sup = gap;
        }
    }
    sup
}

/// Kolmogorov survival function, 20-term alternating series, clamped to
/// [0, 1]. A zero statistic short-circuits to 1.
pub fn kolmogorov_sf(z: f64) -> f64 {
    if z <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=20u32 {
        let jj = (j * j) as f64;
        sum += sign * (-2.0 * jj * z * z).exp();
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Welch's unequal-variance t-test, two-sided p-value.
///
/// Degenerate conventions: when the standard error vanishes (both samples
/// constant, or too small to carry a variance) the p-value is 1 for equal
/// means and 0 otherwise.
pub fn t_test(train: &[f32], test: &[f32]) -> f64 {
    let (n1, m1, v1) = moments(train);
    let (n2, m2, v2) = moments(test);
    let a = if n1 > 0.0 { v1 / n1 } else { 0.0 };
    let b = if n2 > 0.0 { v2 / n2 } else { 0.0 };
    let se2 = a + b;
    if se2 == 0.0 {
        return if m1 == m2 { 1.0 } else { 0.0 };
    }
    let t = (m1 - m2) / se2.sqrt();
    if t == 0.0 {
        return 1.0;
    }
    let mut df_den = 0.0;
    if n1 > 1.0 {
        df_den += a * a / (n1 - 1.0);
    }
    if n2 > 1.0 {
        df_den += b * b / (n2 - 1.0);
    }
    if df_den == 0.0 {
        return if m1 == m2 { 1.0 } else { 0.0 };
    }
    let df = se2 * se2 / df_den;
    let dist = StudentsT::new(0.0, 1.0, df).expect("valid dof");
    (2.0 * dist.cdf(-t.abs())).clamp(0.0, 1.0)
}

/// (count, mean, sample variance); variance is 0 for fewer than 2 points.
fn moments(sample: &[f32]) -> (f64, f64, f64) {
    let n = sample.len() as f64;
    if sample.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let mean = sample.iter().map(|&v| v as f64).sum::<f64>() / n;
    if sample.len() < 2 {
        return (n, mean, 0.0);
    }
    let var = sample
        .iter()
        .map(|&v| {
            let r = v as f64 - mean;
            r * r
        })
        .sum::<f64>()
        / (n - 1.0);
    (n, mean, var)
}

/// Mutual information (nats) between the 50-bin value variable and the
/// train/test membership label, from the joint histogram over the pooled
/// sample. Zero-count cells contribute nothing.
pub fn mutual_information(train: &[f32], test: &[f32]) -> f64 {
    let bins = DEFAULT_BINS;
    let (lo, hi) = pooled_range(train, test);
    let mut joint = vec![[0u64; 2]; bins];
    for &v in train {
        joint[bin_index(v as f64, lo, hi, bins)][0] += 1;
    }
    for &v in test {
        joint[bin_index(v as f64, lo, hi, bins)][1] += 1;
    }
    let n = (train.len() + test.len()) as f64;
    let p_set = [train.len() as f64 / n, test.len() as f64 / n];
    let mut mi = 0.0;
    for cell in &joint {
        let total = cell[0] + cell[1];
        if total == 0 {
            continue;
        }
        let p_bin = total as f64 / n;
        for s in 0..2 {
            if cell[s] == 0 {
                continue;
            }
            let p_joint = cell[s] as f64 / n;
            mi += p_joint * (p_joint / (p_bin * p_set[s])).ln();
        }
    }
    mi
}

/// `KL(p_test || p_train)` in nats, with additive smoothing on both
/// histograms followed by renormalisation.
pub fn kl_divergence(pair: &HistogramPair) -> f64 {
    let p = smooth(&pair.p_test);
    let q = smooth(&pair.p_train);
    p.iter()
        .zip(&q)
        .map(|(&pi, &qi)| pi * (pi / qi).ln())
        .sum()
}

fn smooth(p: &[f64]) -> Vec<f64> {
    let total: f64 = p.iter().map(|&v| v + KL_SMOOTHING).sum();
    p.iter().map(|&v| (v + KL_SMOOTHING) / total).collect()
}

/// Jensen-Shannon divergence in base 2, bounded by [0, 1]:
/// `JS = KL(p||m)/2 + KL(q||m)/2` with `m` the midpoint distribution.
pub fn js_divergence(pair: &HistogramPair) -> f64 {
    let kl2 = |p: &[f64], q: &[f64]| -> f64 {
        p.iter()
            .zip(q)
            .filter(|(&pi, _)| pi > 0.0)
            .map(|(&pi, &mi)| pi * (pi / mi).log2())
            .sum()
    };
    let m: Vec<f64> = pair
        .p_train
        .iter()
        .zip(&pair.p_test)
        .map(|(&a, &b)| 0.5 * (a + b))
        .collect();
    0.5 * kl2(&pair.p_test, &m) + 0.5 * kl2(&pair.p_train, &m)
}

/// Exact 1-D Wasserstein-1 distance between the two empirical
/// distributions: the integral of the CDF gap, weighted for unequal
/// sample sizes.
pub fn wasserstein_1d(train: &[f32], test: &[f32]) -> f64 {
    let a = sorted_f64(train);
    let b = sorted_f64(test);
    let mut pooled: Vec<f64> = a.iter().chain(&b).copied().collect();
    pooled.sort_unstable_by(|x, y| x.total_cmp(y));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mut ia = 0usize;
    let mut ib = 0usize;
    let mut total = 0.0;
    for t in 0..pooled.len().saturating_sub(1) {
        let x = pooled[t];
        while ia < a.len() && a[ia] <= x {
            ia += 1;
        }
        while ib < b.len() && b[ib] <= x {
            ib += 1;
        }
        let gap = (ia as f64 / na - ib as f64 / nb).abs();
        total += gap * (pooled[t + 1] - x);
    }
    total
}

/// RBF-kernel maximum mean discrepancy with the median heuristic.
///
/// Samples above 2000 points are thinned by deterministic stride first.
/// The bandwidth is the median pairwise distance over the pooled
/// (subsampled) values, falling back to 1 when the median is 0. Returns
/// the square root of the non-negative biased MMD^2 estimate.
pub fn mmd_rbf(train: &[f32], test: &[f32]) -> f64 {
    let x = stride_subsample(train, MMD_MAX_POINTS);
    let y = stride_subsample(test, MMD_MAX_POINTS);
    let sigma = median_pairwise_distance(&x, &y);
    mmd_rbf_with_bandwidth(&x, &y, sigma)
}

/// Biased-estimator MMD with a fixed bandwidth (exposed so closed-form
/// checks can pin sigma).
pub fn mmd_rbf_with_bandwidth(x: &[f64], y: &[f64], sigma: f64) -> f64 {
    let gamma = 1.0 / (2.0 * sigma * sigma);
    let kernel_mean = |a: &[f64], b: &[f64]| -> f64 {
        let mut sum = 0.0;
        for &u in a {
            for &v in b {
                let d = u - v;
                sum += (-gamma * d * d).exp();
            }
        }
        sum / (a.len() as f64 * b.len() as f64)
    };
    let mmd2 = kernel_mean(x, x) + kernel_mean(y, y) - 2.0 * kernel_mean(x, y);
    mmd2.max(0.0).sqrt()
}

fn stride_subsample(sample: &[f32], cap: usize) -> Vec<f64> {
    if sample.len() <= cap {
        return sample.iter().map(|&v| v as f64).collect();
    }
    let stride = sample.len().div_ceil(cap);
    sample
        .iter()
        .step_by(stride)
        .map(|&v| v as f64)
        .collect()
}

/// Median over all pooled pairwise absolute differences; 1.0 when the
/// median is 0 (all pooled values equal, or heavily duplicated).
fn median_pairwise_distance(x: &[f64], y: &[f64]) -> f64 {
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let mut dists = Vec::with_capacity(pooled.len() * (pooled.len() - 1) / 2);
    for i in 0..pooled.len() {
        for j in (i + 1)..pooled.len() {
            dists.push((pooled[i] - pooled[j]).abs());
        }
    }
    if dists.is_empty() {
        return 1.0;
    }
    dists.sort_unstable_by(|a, b| a.total_cmp(b));
    let m = dists.len();
    let median = if m % 2 == 1 {
        dists[m / 2]
    } else {
        0.5 * (dists[m / 2 - 1] + dists[m / 2])
    };
    if median > 0.0 {
        median
    } else {
        1.0
    }
}

/// The seven statistics for one feature (or one aggregate row).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricVector {
    pub t_p: f64,
    pub ks_p: f64,
    pub mi: f64,
    pub kl: f64,
    pub js: f64,
    pub wasserstein: f64,
    pub mmd: f64,
}

impl MetricVector {
    pub fn to_array(self) -> [f64; 7] {
        [
            self.t_p,
            self.ks_p,
            self.mi,
            self.kl,
            self.js,
            self.wasserstein,
            self.mmd,
        ]
    }

    pub fn from_array(a: [f64; 7]) -> Self {
        MetricVector {
            t_p: a[0],
            ks_p: a[1],
            mi: a[2],
            kl: a[3],
            js: a[4],
            wasserstein: a[5],
            mmd: a[6],
        }
    }
}

/// Aggregate (mean-over-features) statistics plus the per-feature rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport {
    pub t_p: f64,
    pub ks_p: f64,
    pub mi: f64,
    pub kl: f64,
    pub js: f64,
    pub wasserstein: f64,
    pub mmd: f64,
    pub per_feature: Vec<MetricVector>,
}

impl MetricReport {
    pub fn aggregate(&self) -> MetricVector {
        MetricVector {
            t_p: self.t_p,
            ks_p: self.ks_p,
            mi: self.mi,
            kl: self.kl,
            js: self.js,
            wasserstein: self.wasserstein,
            mmd: self.mmd,
        }
    }
}

/// All seven statistics for one feature column.
pub fn feature_metrics(train: &[f32], test: &[f32]) -> Result<MetricVector> {
    let pair = histogram_pair(train, test, DEFAULT_BINS)?;
    Ok(MetricVector {
        t_p: t_test(train, test),
        ks_p: ks_test(train, test),
        mi: mutual_information(train, test),
        kl: kl_divergence(&pair),
        js: js_divergence(&pair),
        wasserstein: wasserstein_1d(train, test),
        mmd: mmd_rbf(train, test),
    })
}

/// Evaluate a split: each metric per feature column, aggregated by
/// arithmetic mean over features.
pub fn evaluate_split(train: &Array2<f32>, test: &Array2<f32>) -> Result<MetricReport> {
    let d = train.ncols();
    if d != test.ncols() {
        return Err(Error::Data(format!(
            "feature dimension mismatch: train has {d}, test has {}",
            test.ncols()
        )));
    }
    if train.nrows() == 0 || test.nrows() == 0 {
        return Err(Error::Data(
            "both train and test sets must be non-empty".into(),
        ));
    }
    let per_feature: Vec<Result<MetricVector>> = par_map_indexed(d, |j| {
        let tr: Vec<f32> = train.column(j).to_vec();
        let te: Vec<f32> = test.column(j).to_vec();
        feature_metrics(&tr, &te)
    });
    let per_feature: Vec<MetricVector> =
        per_feature.into_iter().collect::<Result<Vec<_>>>()?;
    let mut sums = [0.0f64; 7];
    for row in &per_feature {
        for (s, v) in sums.iter_mut().zip(row.to_array()) {
            *s += v;
        }
    }
    for s in sums.iter_mut() {
        *s /= d as f64;
    }
    let agg = MetricVector::from_array(sums);
    Ok(MetricReport {
        t_p: agg.t_p,
        ks_p: agg.ks_p,
        mi: agg.mi,
        kl: agg.kl,
        js: agg.js,
        wasserstein: agg.wasserstein,
        mmd: agg.mmd,
        per_feature,
    })
}
