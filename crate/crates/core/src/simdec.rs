//! Simulation decomposition: split the output distribution into scenarios
//! formed by state combinations of the most influential inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{compensated_sum, min_max, pairwise_sum};
use crate::types::{Dataset, MarginalDistribution, SensitivityReport};

/// Base hues, one per state of the top input.
pub const PALETTE: [[u8; 3]; 10] = [
    [0x00, 0x08, 0xB1], // blue
    [0x9C, 0x6F, 0x00], // olive-yellow
    [0x00, 0x82, 0x01], // green
    [0xB1, 0x10, 0x00], // red
    [0x6A, 0x00, 0x9C], // purple
    [0x00, 0x78, 0x80], // teal
    [0xC0, 0x50, 0x00], // orange
    [0x6B, 0x3E, 0x1E], // brown
    [0xB0, 0x00, 0x6A], // magenta
    [0x4A, 0x4A, 0x4A], // grey
];
/// Fraction of the way to white reached by the palest shade of a hue.
const MAX_TINT: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimdecConfig {
    pub max_inputs: usize,
    pub cum_threshold: f64,
    pub n_output_bins: usize,
}

impl Default for SimdecConfig {
    fn default() -> Self {
        SimdecConfig {
            max_inputs: 3,
            cum_threshold: 0.8,
            n_output_bins: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateBound {
    /// `[min, max)`; the last range of an input also includes `max`.
    Range {
        min: f64,
        max: f64,
    },
    Levels {
        levels: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub label: String,
    #[serde(flatten)]
    pub bound: StateBound,
}

impl State {
    pub fn range(label: impl Into<String>, min: f64, max: f64) -> Self {
        State {
            label: label.into(),
            bound: StateBound::Range { min, max },
        }
    }

    pub fn levels(label: impl Into<String>, levels: Vec<String>) -> Self {
        State {
            label: label.into(),
            bound: StateBound::Levels { levels },
        }
    }
}

/// Ordered states of one input, referenced by column name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDefinition {
    pub input: String,
    pub states: Vec<State>,
}

/// State definition bound to a dataset column.
#[derive(Debug, Clone)]
enum Resolved {
    /// Interior cut points, ascending.
    Ranges { column: usize, cuts: Vec<f64> },
    /// State index for each level index.
    Levels { column: usize, of_level: Vec<usize> },
}

impl Resolved {
    fn column(&self) -> usize {
        match self {
            Resolved::Ranges { column, .. } | Resolved::Levels { column, .. } => *column,
        }
    }

    fn assign(&self, x: f64) -> usize {
        match self {
            Resolved::Ranges { cuts, .. } => cuts.partition_point(|&c| c <= x),
            Resolved::Levels { of_level, .. } => of_level[x as usize],
        }
    }
}

fn resolve(ds: &Dataset, def: &StateDefinition) -> Result<Resolved> {
    let column = ds
        .index_of(&def.input)
        .ok_or_else(|| Error::InvalidStates(format!("unknown column `{}`", def.input)))?;
    if def.states.is_empty() {
        return Err(Error::InvalidStates(format!(
            "`{}` has no states",
            def.input
        )));
    }
    let spec = &ds.specs()[column];
    let values = ds.column(column);
    if let MarginalDistribution::Categorical { levels, .. } = &spec.distribution {
        let mut of_level = vec![usize::MAX; levels.len()];
        for (s, state) in def.states.iter().enumerate() {
            let StateBound::Levels { levels: names } = &state.bound else {
                return Err(Error::InvalidStates(format!(
                    "categorical `{}` needs level sets, state `{}` is a range",
                    def.input, state.label
                )));
            };
            for name in names {
                let l = levels.iter().position(|x| x == name).ok_or_else(|| {
                    Error::InvalidStates(format!("`{}` has no level `{name}`", def.input))
                })?;
                if of_level[l] != usize::MAX {
                    return Err(Error::InvalidStates(format!(
                        "level `{name}` of `{}` appears in two states",
                        def.input
                    )));
                }
                of_level[l] = s;
            }
        }
        if let Some(&v) = values.iter().find(|&&v| of_level[v as usize] == usize::MAX) {
            return Err(Error::InvalidStates(format!(
                "level `{}` of `{}` is in no state",
                levels[v as usize], def.input
            )));
        }
        return Ok(Resolved::Levels { column, of_level });
    }

    let mut bounds = Vec::with_capacity(def.states.len());
    for state in &def.states {
        match state.bound {
            StateBound::Range { min, max } if min.is_finite() && max.is_finite() && min < max => {
                bounds.push((min, max))
            }
            _ => {
                return Err(Error::InvalidStates(format!(
                    "state `{}` of `{}` needs finite min < max",
                    state.label, def.input
                )))
            }
        }
    }
    for w in bounds.windows(2) {
        if w[0].1 != w[1].0 {
            return Err(Error::InvalidStates(format!(
                "states of `{}` must be contiguous: {} then {}",
                def.input, w[0].1, w[1].0
            )));
        }
    }
    let (lo, hi) = min_max(&values);
    if lo < bounds[0].0 || hi > bounds[bounds.len() - 1].1 {
        return Err(Error::InvalidStates(format!(
            "states of `{}` span [{}, {}] but the data span [{lo}, {hi}]",
            def.input,
            bounds[0].0,
            bounds[bounds.len() - 1].1
        )));
    }
    let cuts = bounds[1..].iter().map(|b| b.0).collect();
    Ok(Resolved::Ranges { column, cuts })
}

/// Most influential inputs by combined index: the shortest prefix reaching
/// `cum_threshold`, at most `max_inputs`, at least one.
pub fn select_inputs(
    report: &SensitivityReport,
    max_inputs: usize,
    cum_threshold: f64,
) -> Result<Vec<usize>> {
    if report.combined.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidArgument(
            "combined indices must be finite".into(),
        ));
    }
    if report.combined.iter().all(|&c| c <= 0.0) {
        return Err(Error::NothingToDecompose);
    }
    let mut order: Vec<usize> = (0..report.combined.len()).collect();
    order.sort_by(|&a, &b| report.combined[b].total_cmp(&report.combined[a]));
    let cap = max_inputs.max(1);
    let mut cum = 0.0;
    let mut out = Vec::new();
    for i in order {
        out.push(i);
        cum += report.combined[i];
        if cum >= cum_threshold || out.len() == cap {
            break;
        }
    }
    Ok(out)
}

/// Equal-width states over the observed range: three (low/medium/high) for
/// the first selected input, two (low/high) for the rest; categorical
/// inputs get one state per level.
pub fn default_states(ds: &Dataset, selected: &[usize]) -> Result<Vec<StateDefinition>> {
    if selected.is_empty() {
        return Err(Error::InvalidArgument("no inputs selected".into()));
    }
    selected
        .iter()
        .enumerate()
        .map(|(rank, &c)| {
            let spec = ds
                .specs()
                .get(c)
                .ok_or_else(|| Error::InvalidArgument(format!("input index {c} out of range")))?;
            let values = ds.column(c);
            let (lo, hi) = min_max(&values);
            if lo == hi {
                return Err(Error::DegenerateInput(spec.name.clone()));
            }
            let states = match &spec.distribution {
                MarginalDistribution::Categorical { levels, .. } => levels
                    .iter()
                    .map(|l| State::levels(l.clone(), vec![l.clone()]))
                    .collect(),
                _ => {
                    let labels: &[&str] = if rank == 0 {
                        &["low", "medium", "high"]
                    } else {
                        &["low", "high"]
                    };
                    let n = labels.len();
                    let w = (hi - lo) / n as f64;
                    let cut = |s: usize| if s == n { hi } else { lo + s as f64 * w };
                    labels
                        .iter()
                        .enumerate()
                        .map(|(s, l)| State::range(*l, cut(s), cut(s + 1)))
                        .collect()
                }
            };
            Ok(StateDefinition {
                input: spec.name.clone(),
                states,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// 1-based position in the table.
    pub id: usize,
    pub state_indices: Vec<usize>,
    pub state_labels: Vec<String>,
    pub color: String,
    pub count: u64,
    pub probability: f64,
    /// `None` when no row falls in the scenario.
    pub min: Option<f64>,
    pub mean: Option<f64>,
    pub max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackedHistogram {
    pub edges: Vec<f64>,
    /// `counts[scenario][bin]`.
    pub counts: Vec<Vec<u64>>,
}

impl StackedHistogram {
    pub fn n_bins(&self) -> usize {
        self.edges.len() - 1
    }

    /// Column sums over scenarios.
    pub fn totals(&self) -> Vec<u64> {
        let mut t = vec![0u64; self.n_bins()];
        for row in &self.counts {
            for (acc, c) in t.iter_mut().zip(row) {
                *acc += c;
            }
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    /// Input names in importance order.
    pub inputs: Vec<String>,
    pub states: Vec<StateDefinition>,
    pub scenarios: Vec<Scenario>,
    /// Scenario table position of each dataset row.
    pub row_scenarios: Vec<usize>,
    pub histogram: StackedHistogram,
    pub n_rows: usize,
}

impl Decomposition {
    /// Total probability from the integer counts; exactly 1 for a partition.
    pub fn probability_total(&self) -> f64 {
        self.scenarios.iter().map(|s| s.count).sum::<u64>() as f64 / self.n_rows as f64
    }

    /// Floating-point sum of the published probabilities.
    pub fn probability_sum(&self) -> f64 {
        compensated_sum(
            &self
                .scenarios
                .iter()
                .map(|s| s.probability)
                .collect::<Vec<_>>(),
        )
    }
}

/// Equal-width bins over the observed output range, last bin closed.
pub fn histogram_edges(y: &[f64], n_bins: usize) -> Vec<f64> {
    let (lo, hi) = min_max(y);
    let w = (hi - lo) / n_bins as f64;
    (0..=n_bins)
        .map(|b| if b == n_bins { hi } else { lo + b as f64 * w })
        .collect()
}

fn histogram_bin(edges: &[f64], v: f64) -> usize {
    let n = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[n]);
    if hi <= lo {
        return 0;
    }
    let pos = ((v - lo) / (hi - lo) * n as f64).floor();
    if pos <= 0.0 {
        0
    } else {
        (pos as usize).min(n - 1)
    }
}

/// Plain histogram of `y` on the given edges.
pub fn histogram_counts(y: &[f64], edges: &[f64]) -> Vec<u64> {
    let mut out = vec![0u64; edges.len() - 1];
    for &v in y {
        out[histogram_bin(edges, v)] += 1;
    }
    out
}

/// Hex colours for scenarios given the top-input state of each scenario
/// in table order. Each top state gets a palette hue; successive scenarios
/// in a hue are tinted progressively towards white.
pub fn assign_colors(top_states: &[usize]) -> Result<Vec<String>> {
    if top_states.is_empty() {
        return Err(Error::InvalidArgument("empty scenario table".into()));
    }
    let n_hues = top_states.iter().max().unwrap() + 1;
    if n_hues > PALETTE.len() {
        return Err(Error::PaletteExhausted(n_hues));
    }
    let mut per_hue = vec![0usize; n_hues];
    for &h in top_states {
        per_hue[h] += 1;
    }
    let mut seen = vec![0usize; n_hues];
    Ok(top_states
        .iter()
        .map(|&h| {
            let t = if per_hue[h] > 1 {
                MAX_TINT * seen[h] as f64 / (per_hue[h] - 1) as f64
            } else {
                0.0
            };
            seen[h] += 1;
            let [r, g, b] = PALETTE[h].map(|c| (c as f64 + (255.0 - c as f64) * t).round() as u8);
            format!("#{r:02X}{g:02X}{b:02X}")
        })
        .collect())
}

/// Partition the rows by state tuple and summarise each scenario.
pub fn decompose(
    ds: &Dataset,
    states: &[StateDefinition],
    n_output_bins: usize,
) -> Result<Decomposition> {
    if states.is_empty() {
        return Err(Error::InvalidStates("no state definitions".into()));
    }
    if n_output_bins == 0 {
        return Err(Error::InvalidArgument(
            "need at least one output bin".into(),
        ));
    }
    let resolved: Vec<Resolved> = states
        .iter()
        .map(|d| resolve(ds, d))
        .collect::<Result<_>>()?;
    let mut cols: Vec<usize> = resolved.iter().map(Resolved::column).collect();
    cols.sort_unstable();
    if cols.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidStates("an input appears twice".into()));
    }

    let sizes: Vec<usize> = states.iter().map(|d| d.states.len()).collect();
    let n_scen: usize = sizes.iter().product();
    let mut strides = vec![1usize; sizes.len()];
    for i in (0..sizes.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * sizes[i + 1];
    }

    let y = ds.output();
    let x = ds.inputs();
    let row_scenarios: Vec<usize> = (0..ds.n_rows())
        .map(|r| {
            resolved
                .iter()
                .zip(&strides)
                .map(|(res, st)| res.assign(x.get(r, res.column())) * st)
                .sum()
        })
        .collect();

    let mut members: Vec<Vec<f64>> = vec![Vec::new(); n_scen];
    for (r, &s) in row_scenarios.iter().enumerate() {
        members[s].push(y[r]);
    }
    let edges = histogram_edges(y, n_output_bins);
    let mut counts = vec![vec![0u64; n_output_bins]; n_scen];
    for (r, &s) in row_scenarios.iter().enumerate() {
        counts[s][histogram_bin(&edges, y[r])] += 1;
    }

    let tuples: Vec<Vec<usize>> = (0..n_scen)
        .map(|s| {
            sizes
                .iter()
                .zip(&strides)
                .map(|(n, st)| (s / st) % n)
                .collect()
        })
        .collect();
    let colors = assign_colors(&tuples.iter().map(|t| t[0]).collect::<Vec<_>>())?;
    let n = ds.n_rows() as f64;

    let scenarios = members
        .iter_mut()
        .zip(tuples)
        .zip(colors)
        .enumerate()
        .map(|(s, ((vals, tuple), color))| {
            // sorted so statistics ignore row order
            vals.sort_by(f64::total_cmp);
            let count = vals.len() as u64;
            let (min, mean, max) = if vals.is_empty() {
                (None, None, None)
            } else {
                let mean =
                    (pairwise_sum(vals) / vals.len() as f64).clamp(vals[0], vals[vals.len() - 1]);
                (Some(vals[0]), Some(mean), Some(vals[vals.len() - 1]))
            };
            Scenario {
                id: s + 1,
                state_labels: tuple
                    .iter()
                    .zip(states)
                    .map(|(&i, d)| d.states[i].label.clone())
                    .collect(),
                state_indices: tuple,
                color,
                count,
                probability: count as f64 / n,
                min,
                mean,
                max,
            }
        })
        .collect();

    Ok(Decomposition {
        inputs: states.iter().map(|d| d.input.clone()).collect(),
        states: states.to_vec(),
        scenarios,
        row_scenarios,
        histogram: StackedHistogram { edges, counts },
        n_rows: ds.n_rows(),
    })
}
