//! Binning estimator for first- and second-order variance-based indices.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{
    is_effectively_constant, min_max, pairwise_sum, variance, weighted_mean, weighted_variance,
};
use crate::types::{Dataset, InputSpec, MarginalDistribution, SensitivityReport};

const GRID_N: [f64; 7] = [1000.0, 2500.0, 5000.0, 7500.0, 10000.0, 25000.0, 50000.0];
const GRID_K: [f64; 3] = [3.0, 6.0, 12.0];
/// Optimal first-order bin counts; rows follow `GRID_N`, columns `GRID_K`.
const BIN_TABLE: [[f64; 3]; 7] = [
    [10.0, 10.0, 10.0],
    [25.0, 10.0, 10.0],
    [50.0, 10.0, 10.0],
    [50.0, 25.0, 10.0],
    [50.0, 50.0, 10.0],
    [100.0, 50.0, 25.0],
    [100.0, 50.0, 50.0],
];
pub const MIN_BINS: usize = 10;
pub const MAX_BINS: usize = 100;
pub const MIN_OBSERVATIONS: usize = 100;

fn bracket(grid: &[f64], x: f64) -> (usize, f64) {
    let last = grid.len() - 1;
    let x = x.clamp(grid[0], grid[last]);
    let mut i = 0;
    while i + 1 < last && x > grid[i + 1] {
        i += 1;
    }
    let t = (x - grid[i]) / (grid[i + 1] - grid[i]);
    (i, t)
}

/// First-order bin count for `n_obs` rows and `k_inputs` inputs: bilinear
/// interpolation of the tabulated optimum, clamped to the table, rounded,
/// then kept within `[MIN_BINS, MAX_BINS]`.
pub fn bin_count_first(n_obs: usize, k_inputs: usize) -> Result<usize> {
    if n_obs < MIN_OBSERVATIONS {
        return Err(Error::SampleTooSmall(n_obs));
    }
    if k_inputs == 0 {
        return Err(Error::InvalidArgument("at least one input required".into()));
    }
    let (i, tn) = bracket(&GRID_N, n_obs as f64);
    let (j, tk) = bracket(&GRID_K, k_inputs as f64);
    let v = (1.0 - tn) * (1.0 - tk) * BIN_TABLE[i][j]
        + tn * (1.0 - tk) * BIN_TABLE[i + 1][j]
        + (1.0 - tn) * tk * BIN_TABLE[i][j + 1]
        + tn * tk * BIN_TABLE[i + 1][j + 1];
    Ok((v.round() as usize).clamp(MIN_BINS, MAX_BINS))
}

/// Bins per dimension for the pairwise grid.
pub fn bin_count_second(n_bins_first: usize) -> usize {
    ((n_bins_first as f64).sqrt().round() as usize).max(2)
}

/// Partition of one input's observed values.
#[derive(Debug, Clone, PartialEq)]
pub enum BinEdges {
    /// `n + 1` equal-width edges; the last bin includes its right edge.
    Numeric(Vec<f64>),
    /// One bin per level; values are level indices.
    Categorical(usize),
}

impl BinEdges {
    pub fn n_bins(&self) -> usize {
        match self {
            BinEdges::Numeric(e) => e.len() - 1,
            BinEdges::Categorical(n) => *n,
        }
    }

    pub fn assign(&self, x: f64) -> usize {
        match self {
            BinEdges::Numeric(e) => {
                let n = e.len() - 1;
                let (lo, hi) = (e[0], e[n]);
                let pos = ((x - lo) / (hi - lo) * n as f64).floor();
                if pos <= 0.0 {
                    0
                } else {
                    (pos as usize).min(n - 1)
                }
            }
            BinEdges::Categorical(n) => (x as usize).min(n - 1),
        }
    }
}

pub fn bin_edges(column: &[f64], spec: &InputSpec, n_bins: usize) -> Result<BinEdges> {
    if column.is_empty() {
        return Err(Error::InvalidArgument("empty column".into()));
    }
    let (lo, hi) = min_max(column);
    if let MarginalDistribution::Categorical { levels, .. } = &spec.distribution {
        if lo == hi {
            return Err(Error::DegenerateInput(spec.name.clone()));
        }
        return Ok(BinEdges::Categorical(levels.len()));
    }
    if n_bins < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 bins, got {n_bins}"
        )));
    }
    if hi <= lo {
        return Err(Error::DegenerateInput(spec.name.clone()));
    }
    let width = (hi - lo) / n_bins as f64;
    let mut edges: Vec<f64> = (0..n_bins).map(|b| lo + b as f64 * width).collect();
    edges.push(hi);
    Ok(edges.into())
}

impl From<Vec<f64>> for BinEdges {
    fn from(edges: Vec<f64>) -> Self {
        BinEdges::Numeric(edges)
    }
}

/// Occupancy-weighted variance of cell means of `y`, with cells given per row.
fn explained_variance(cells: &[usize], n_cells: usize, y: &[f64]) -> Result<f64> {
    let mut sums = vec![0.0f64; n_cells];
    let mut counts = vec![0u64; n_cells];
    for (&c, &v) in cells.iter().zip(y) {
        sums[c] += v;
        counts[c] += 1;
    }
    let means: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| if c == 0 { 0.0 } else { s / c as f64 })
        .collect();
    let grand = weighted_mean(&means, &counts);
    weighted_variance(&means, &counts, grand)
}

/// Output variance and centred output; centring keeps cell sums small so
/// affine changes of `y` only move rounding error.
fn checked_output(y: &[f64]) -> Result<(f64, Vec<f64>)> {
    if y.len() < 2 || is_effectively_constant(y) {
        return Err(Error::ConstantOutput);
    }
    let m = pairwise_sum(y) / y.len() as f64;
    let centred: Vec<f64> = y.iter().map(|v| v - m).collect();
    let var = variance(&centred);
    if var.is_nan() || var <= 0.0 {
        return Err(Error::ConstantOutput);
    }
    Ok((var, centred))
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {a} vs {b}"
        )));
    }
    Ok(())
}

fn first_order_centred(
    x: &[f64],
    y: &[f64],
    var_y: f64,
    spec: &InputSpec,
    n_bins: usize,
) -> Result<f64> {
    let edges = bin_edges(x, spec, n_bins)?;
    let cells: Vec<usize> = x.iter().map(|&v| edges.assign(v)).collect();
    Ok(explained_variance(&cells, edges.n_bins(), y)? / var_y)
}

/// Variance of within-bin means of `y` over equal-width bins of `x`,
/// divided by the variance of `y`.
pub fn first_order_index(x: &[f64], y: &[f64], spec: &InputSpec, n_bins: usize) -> Result<f64> {
    check_lengths(x.len(), y.len())?;
    let (var_y, yc) = checked_output(y)?;
    first_order_centred(x, &yc, var_y, spec, n_bins)
}

fn joint_centred(
    xi: &[f64],
    xj: &[f64],
    y: &[f64],
    var_y: f64,
    spec_i: &InputSpec,
    spec_j: &InputSpec,
    m: usize,
) -> Result<f64> {
    // fixed argument order so (i, j) and (j, i) reduce identically
    let swap = xi
        .iter()
        .zip(xj)
        .map(|(a, b)| a.total_cmp(b))
        .find(|o| *o != Ordering::Equal)
        == Some(Ordering::Greater);
    let (xi, xj, spec_i, spec_j) = if swap {
        (xj, xi, spec_j, spec_i)
    } else {
        (xi, xj, spec_i, spec_j)
    };
    let ei = bin_edges(xi, spec_i, m)?;
    let ej = bin_edges(xj, spec_j, m)?;
    let nj = ej.n_bins();
    let cells: Vec<usize> = xi
        .iter()
        .zip(xj)
        .map(|(&a, &b)| ei.assign(a) * nj + ej.assign(b))
        .collect();
    Ok(explained_variance(&cells, ei.n_bins() * nj, y)? / var_y)
}

/// True when an `m`-by-`m` grid leaves fewer than five rows per cell on
/// average.
pub fn is_sparse_grid(n_obs: usize, m: usize) -> bool {
    m * m * 5 > n_obs
}

/// Pairwise index: joint explained fraction on the `m`-by-`m` grid minus
/// both marginal fractions recomputed with `m` bins.
pub fn second_order_index(
    xi: &[f64],
    xj: &[f64],
    y: &[f64],
    spec_i: &InputSpec,
    spec_j: &InputSpec,
    m: usize,
) -> Result<f64> {
    check_lengths(xi.len(), y.len())?;
    check_lengths(xj.len(), y.len())?;
    if m < 2 {
        return Err(Error::InvalidArgument(format!("need m >= 2, got {m}")));
    }
    let (var_y, yc) = checked_output(y)?;
    let joint = joint_centred(xi, xj, &yc, var_y, spec_i, spec_j, m)?;
    let si = first_order_centred(xi, &yc, var_y, spec_i, m)?;
    let sj = first_order_centred(xj, &yc, var_y, spec_j, m)?;
    Ok(joint - (si + sj))
}

/// Which first-order values are subtracted from the joint term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondOrderMarginals {
    /// Marginals recomputed on the pairwise bin count.
    #[default]
    Recomputed,
    /// The published first-order values at the full bin count.
    FullResolution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct BinningConfig {
    /// `None` picks the tabulated rule.
    pub n_bins_first: Option<usize>,
    /// `None` uses the rounded square root of the first-order count.
    pub n_bins_second_per_dim: Option<usize>,
    pub marginals: SecondOrderMarginals,
}

impl BinningConfig {
    pub fn with_bins(n_bins_first: usize) -> Self {
        BinningConfig {
            n_bins_first: Some(n_bins_first),
            ..Default::default()
        }
    }

    /// Effective `(first, second-per-dim)` bin counts.
    pub fn resolve(&self, n_obs: usize, k_inputs: usize) -> Result<(usize, usize)> {
        let first = match self.n_bins_first {
            Some(b) if b < 2 => {
                return Err(Error::InvalidArgument(format!(
                    "n_bins_first must be >= 2, got {b}"
                )))
            }
            Some(b) => b,
            None => bin_count_first(n_obs, k_inputs)?,
        };
        let second = match self.n_bins_second_per_dim {
            Some(m) if m < 2 => {
                return Err(Error::InvalidArgument(format!(
                    "n_bins_second_per_dim must be >= 2, got {m}"
                )))
            }
            Some(m) => m,
            None => bin_count_second(first),
        };
        Ok((first, second))
    }
}

/// Row order by inputs then output, so that results do not depend on the
/// order rows arrive in.
fn canonical_order(ds: &Dataset) -> Vec<usize> {
    let x = ds.inputs();
    let y = ds.output();
    let mut order: Vec<usize> = (0..ds.n_rows()).collect();
    order.sort_by(|&a, &b| {
        x.row(a)
            .iter()
            .zip(x.row(b))
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or_else(|| y[a].total_cmp(&y[b]))
    });
    order
}

/// First-order, second-order and combined indices for every input.
///
/// Constant input columns get zero indices and a warning; the remaining
/// columns are analysed normally.
pub fn analyze(ds: &Dataset, config: &BinningConfig) -> Result<SensitivityReport> {
    let n = ds.n_rows();
    let k = ds.n_inputs();
    let (n_first, m) = config.resolve(n, k)?;
    let order = canonical_order(ds);
    let y: Vec<f64> = order.iter().map(|&r| ds.output()[r]).collect();
    let (var_y, yc) = checked_output(&y)?;
    let columns: Vec<Vec<f64>> = (0..k)
        .map(|c| order.iter().map(|&r| ds.inputs().get(r, c)).collect())
        .collect();
    let specs = ds.specs();

    let mut warnings = Vec::new();
    let degenerate: Vec<bool> = columns
        .iter()
        .map(|c| {
            let (lo, hi) = min_max(c);
            lo == hi
        })
        .collect();
    for (c, &d) in degenerate.iter().enumerate() {
        if d {
            warnings.push(format!(
                "degenerate input `{}`: constant column, indices set to 0",
                specs[c].name
            ));
        }
    }

    let first_at = |bins: usize| -> Result<Vec<f64>> {
        (0..k)
            .into_par_iter()
            .map(|c| {
                if degenerate[c] {
                    Ok(0.0)
                } else {
                    first_order_centred(&columns[c], &yc, var_y, &specs[c], bins)
                }
            })
            .collect()
    };
    let first_order = first_at(n_first)?;

    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .collect();
    let mut second_order = vec![vec![0.0; k]; k];
    if !pairs.is_empty() {
        if is_sparse_grid(n, m) {
            warnings.push(format!("sparse grid: {m}x{m} cells for {n} observations"));
        }
        let marginals = match config.marginals {
            SecondOrderMarginals::Recomputed => first_at(m)?,
            SecondOrderMarginals::FullResolution => first_order.clone(),
        };
        let values: Vec<f64> = pairs
            .par_iter()
            .map(|&(i, j)| {
                if degenerate[i] || degenerate[j] {
                    return Ok(0.0);
                }
                let joint = joint_centred(
                    &columns[i],
                    &columns[j],
                    &yc,
                    var_y,
                    &specs[i],
                    &specs[j],
                    m,
                )?;
                Ok(joint - (marginals[i] + marginals[j]))
            })
            .collect::<Result<_>>()?;
        for (&(i, j), v) in pairs.iter().zip(values) {
            second_order[i][j] = v;
            second_order[j][i] = v;
        }
    }

    let combined = (0..k)
        .map(|i| {
            let half: f64 = (0..k).filter(|&j| j != i).map(|j| second_order[i][j]).sum();
            first_order[i] + 0.5 * half
        })
        .collect();

    Ok(SensitivityReport {
        names: ds.names(),
        first_order,
        second_order,
        combined,
        var_y,
        n_bins_first: n_first,
        n_bins_second_per_dim: m,
        warnings,
    })
}

/// Sum of all first-order and distinct second-order indices.
pub fn conservation_check(report: &SensitivityReport) -> f64 {
    let first: f64 = report.first_order.iter().sum();
    let second: f64 = report.upper_pairs().iter().map(|p| p.2).sum();
    first + second
}
