//! Elementary statistics with a fixed accumulation order.
//!
//! Every reduction here goes through [`pairwise_sum_by`], so results depend
//! only on the order of the input slice, never on scheduling.

use crate::error::{Error, Result};

const PAIRWISE_BLOCK: usize = 64;

/// Pairwise summation of `f(0) + f(1) + ... + f(n-1)`.
pub fn pairwise_sum_by<F: Fn(usize) -> f64>(n: usize, f: &F) -> f64 {
    fn go<F: Fn(usize) -> f64>(lo: usize, hi: usize, f: &F) -> f64 {
        if hi - lo <= PAIRWISE_BLOCK {
            let mut acc = 0.0;
            for i in lo..hi {
                acc += f(i);
            }
            acc
        } else {
            let mid = lo + (hi - lo) / 2;
            go(lo, mid, f) + go(mid, hi, f)
        }
    }
    go(0, n, f)
}

pub fn pairwise_sum(xs: &[f64]) -> f64 {
    pairwise_sum_by(xs.len(), &|i| xs[i])
}

/// Neumaier-compensated sum. Used where the exact total matters more than
/// speed (probability tables).
pub fn compensated_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

/// Population variance (divides by N).
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    pairwise_sum_by(xs.len(), &|i| {
        let d = xs[i] - m;
        d * d
    }) / xs.len() as f64
}

/// True when the spread of `xs` is indistinguishable from rounding noise
/// relative to its magnitude.
pub fn is_effectively_constant(xs: &[f64]) -> bool {
    let (lo, hi) = min_max(xs);
    let scale = lo.abs().max(hi.abs());
    hi - lo <= 1e-12 * scale
}

pub fn min_max(xs: &[f64]) -> (f64, f64) {
    xs.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}

/// Occupancy-weighted variance of bin means around `grand_mean`.
///
/// Bins with zero count contribute nothing.
pub fn weighted_variance(bin_means: &[f64], bin_counts: &[u64], grand_mean: f64) -> Result<f64> {
    if bin_means.len() != bin_counts.len() || bin_means.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "weighted_variance: {} means vs {} counts",
            bin_means.len(),
            bin_counts.len()
        )));
    }
    let total: u64 = bin_counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyBinning);
    }
    let num = pairwise_sum_by(bin_means.len(), &|b| {
        if bin_counts[b] == 0 {
            0.0
        } else {
            let d = bin_means[b] - grand_mean;
            bin_counts[b] as f64 * d * d
        }
    });
    Ok(num / total as f64)
}

/// Count-weighted mean of bin means; equals the sample mean when the bins
/// partition the sample.
pub fn weighted_mean(bin_means: &[f64], bin_counts: &[u64]) -> f64 {
    let total: u64 = bin_counts.iter().sum();
    pairwise_sum_by(bin_means.len(), &|b| {
        if bin_counts[b] == 0 {
            0.0
        } else {
            bin_counts[b] as f64 * bin_means[b]
        }
    }) / total as f64
}

/// Product-moment correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "pearson: lengths {} and {} (need equal, >= 2)",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    let mx = mean(x);
    let my = mean(y);
    let sxy = pairwise_sum_by(n, &|i| (x[i] - mx) * (y[i] - my));
    let sxx = pairwise_sum_by(n, &|i| (x[i] - mx) * (x[i] - mx));
    let syy = pairwise_sum_by(n, &|i| (y[i] - my) * (y[i] - my));
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::DegenerateCorrelation);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// 1-based mid-ranks; tied values share the average of their positions.
pub fn mid_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && x[order[j]] == x[order[i]] {
            j += 1;
        }
        // positions i..j (0-based) share rank mean((i+1)..=j)
        let r = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = r;
        }
        i = j;
    }
    ranks
}

/// Rank correlation: pearson on mid-ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "spearman: lengths {} and {} (need equal, >= 2)",
            x.len(),
            y.len()
        )));
    }
    pearson(&mid_ranks(x), &mid_ranks(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn weighted_variance_examples() {
        assert_eq!(
            weighted_variance(&[1.0, 1.0, 1.0], &[5, 5, 5], 1.0).unwrap(),
            0.0
        );
        assert_eq!(weighted_variance(&[0.0, 2.0], &[1, 1], 1.0).unwrap(), 1.0);
        // (1 * 2.25^2 + 3 * 0.75^2) / 4
        let v = weighted_variance(&[0.0, 3.0], &[1, 3], 2.25).unwrap();
        assert!((v - 1.6875).abs() < 1e-15);
    }

    #[test]
    fn weighted_variance_skips_empty_bins_and_rejects_all_empty() {
        let v = weighted_variance(&[0.0, 123.0, 2.0], &[1, 0, 1], 1.0).unwrap();
        assert_eq!(v, 1.0);
        assert!(matches!(
            weighted_variance(&[1.0, 2.0], &[0, 0], 0.0),
            Err(Error::EmptyBinning)
        ));
    }

    #[test]
    fn correlation_examples() {
        let x: Vec<f64> = (0..50)
            .map(|i| (i as f64 * 0.37).sin() + i as f64 * 0.01)
            .collect();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-15);
        let ex: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        let cube: Vec<f64> = x.iter().map(|v| -v * v * v).collect();
        assert_eq!(spearman(&x, &ex).unwrap(), 1.0);
        assert!((spearman(&x, &cube).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_variance_is_degenerate() {
        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::DegenerateCorrelation)
        ));
        assert!(matches!(
            spearman(&[1.0, 2.0, 3.0], &[4.0, 4.0, 4.0]),
            Err(Error::DegenerateCorrelation)
        ));
    }

    #[test]
    fn mid_ranks_average_ties() {
        assert_eq!(mid_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn compensated_sum_recovers_cancellation() {
        assert_eq!(compensated_sum(&[1.0, 1e100, 1.0, -1e100]), 2.0);
    }

    proptest! {
        #[test]
        fn weighted_variance_scale_invariant(
            bins in prop::collection::vec((-100.0f64..100.0, 0u64..50), 1..20),
            k in 1u64..10,
        ) {
            prop_assume!(bins.iter().any(|b| b.1 > 0));
            let means: Vec<f64> = bins.iter().map(|b| b.0).collect();
            let counts: Vec<u64> = bins.iter().map(|b| b.1).collect();
            let scaled: Vec<u64> = counts.iter().map(|c| c * k).collect();
            let g = weighted_mean(&means, &counts);
            let a = weighted_variance(&means, &counts, g).unwrap();
            let b = weighted_variance(&means, &scaled, g).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
            let bound = means.iter().zip(&counts)
                .filter(|(_, &c)| c > 0)
                .map(|(m, _)| (m - g) * (m - g))
                .fold(0.0, f64::max);
            prop_assert!(a <= bound * (1.0 + 1e-12));
        }

        #[test]
        fn correlations_affine_invariant(
            xs in prop::collection::vec(-1e3f64..1e3, 5..60),
            noise in prop::collection::vec(-1e3f64..1e3, 60),
            alpha in 0.1f64..50.0,
            beta in -1e3f64..1e3,
        ) {
            let ys: Vec<f64> = xs.iter().zip(&noise).map(|(x, e)| x + e).collect();
            prop_assume!(variance(&xs) > 1e-6 && variance(&ys) > 1e-6);
            let xt: Vec<f64> = xs.iter().map(|x| alpha * x + beta).collect();
            let p0 = pearson(&xs, &ys).unwrap();
            let p1 = pearson(&xt, &ys).unwrap();
            prop_assert!((p0 - p1).abs() < 1e-12);
            let s0 = spearman(&xs, &ys).unwrap();
            let s1 = spearman(&xt, &ys).unwrap();
            prop_assert!((s0 - s1).abs() < 1e-12);
        }
    }
}
