//! Downstream analyses of antifragility values: correlation with the
//! performance descriptors, equal-count bins, histograms, and the comparison
//! of top performers against the whole population.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::ingestion::{AnalysisWindow, TopPerformerList};
use crate::measures::{AntifragilityResult, MeasureId};
use crate::normalize::TimeScale;
use crate::performance::{PerfVariable, PerformanceRecord};
use crate::stats;

pub const DEFAULT_HIST_BINS: usize = 50;
pub const QUANTILE_BINS: usize = 5;

/// Pearson correlation of paired samples. `None` for fewer than two pairs or
/// when either side has zero variance.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let mx = stats::mean(xs)?;
    let my = stats::mean(ys)?;
    let sxx = stats::sum(xs.iter().map(|x| (x - mx) * (x - mx)));
    let syy = stats::sum(ys.iter().map(|y| (y - my) * (y - my)));
    let sxy = stats::sum(xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)));
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    let denom = (sxx * syy).sqrt();
    let denom = if denom.is_finite() {
        denom
    } else {
        sxx.sqrt() * syy.sqrt()
    };
    let r = sxy / denom;
    r.is_finite().then(|| r.clamp(-1.0, 1.0))
}

/// Pearson over pairs, dropping those with an undefined member first.
pub fn pearson_defined(pairs: &[(Option<f64>, Option<f64>)]) -> (usize, Option<f64>) {
    let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.iter().filter_map(|&(x, y)| Some((x?, y?))).unzip();
    (xs.len(), pearson(&xs, &ys))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinSummary {
    /// 0 = low ... 4 = high.
    pub bin_index: usize,
    pub bin_by: String,
    pub stat_of: String,
    pub count: usize,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

/// One agent's entry for binning: the value that orders it and the value
/// summarized per bin.
#[derive(Debug, Clone, PartialEq)]
pub struct BinItem {
    pub agent_id: String,
    pub bin_by: f64,
    pub stat_of: f64,
}

/// Sizes of `n_bins` contiguous groups over `n` items, differing by at most
/// one, with the remainder in the lowest bins.
pub fn bin_sizes(n: usize, n_bins: usize) -> Vec<usize> {
    let base = n / n_bins;
    let extra = n % n_bins;
    (0..n_bins).map(|i| base + usize::from(i < extra)).collect()
}

/// Sorts by `bin_by` (ties by agent id), splits into equal-count bins and
/// reports min, mean and max of `stat_of` in each.
pub fn quantile_bin_summary(
    items: &[BinItem],
    n_bins: usize,
    bin_by: &str,
    stat_of: &str,
) -> Result<Vec<BinSummary>> {
    if n_bins == 0 || items.len() < n_bins {
        return Err(Error::Analysis(format!(
            "binning {stat_of} by {bin_by} needs at least {n_bins} agents, have {}",
            items.len()
        )));
    }
    let mut sorted: Vec<&BinItem> = items.iter().collect();
    sorted.sort_by(|a, b| {
        a.bin_by
            .total_cmp(&b.bin_by)
            .then_with(|| a.agent_id.cmp(&b.agent_id))
    });
    let mut out = Vec::with_capacity(n_bins);
    let mut start = 0;
    for (bin_index, size) in bin_sizes(sorted.len(), n_bins).into_iter().enumerate() {
        let values: Vec<f64> = sorted[start..start + size]
            .iter()
            .map(|i| i.stat_of)
            .collect();
        start += size;
        let (min, max) = stats::min_max(&values).expect("bins are non-empty");
        out.push(BinSummary {
            bin_index,
            bin_by: bin_by.to_string(),
            stat_of: stat_of.to_string(),
            count: size,
            min,
            mean: stats::mean(&values).expect("bins are non-empty"),
            max,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub variable: String,
    pub bin_edges: Vec<f64>,
    pub densities: Vec<f64>,
    pub sample_count: usize,
}

impl Distribution {
    /// Sum of density times bin width; 1 up to rounding for any non-empty sample.
    pub fn integral(&self) -> f64 {
        stats::sum(
            self.densities
                .iter()
                .zip(self.bin_edges.windows(2))
                .map(|(d, e)| d * (e[1] - e[0])),
        )
    }
}

/// Equal-width edges spanning `[min, max]` of the values; a single-point span
/// is widened by 1e-9 on each side.
pub fn equal_width_edges(values: &[f64], n_bins: usize) -> Option<Vec<f64>> {
    let (mut lo, mut hi) = stats::min_max(values)?;
    if n_bins == 0 {
        return None;
    }
    if hi <= lo {
        lo -= 1e-9;
        hi += 1e-9;
    }
    let width = (hi - lo) / n_bins as f64;
    let mut edges: Vec<f64> = (0..n_bins).map(|j| lo + j as f64 * width).collect();
    edges.push(hi);
    Some(edges)
}

/// Density histogram of `values` over fixed edges. Values outside the edges
/// are clamped into the outermost bins.
pub fn distribution_with_edges(variable: &str, values: &[f64], edges: &[f64]) -> Distribution {
    let n_bins = edges.len().saturating_sub(1);
    let mut counts = vec![0usize; n_bins];
    if n_bins > 0 {
        for &v in values {
            // Index of the last edge <= v, so each bin is [left, right) and
            // the top edge falls into the last bin.
            let idx = edges.partition_point(|&e| e <= v).saturating_sub(1);
            counts[idx.min(n_bins - 1)] += 1;
        }
    }
    let total = values.len() as f64;
    let densities = counts
        .iter()
        .zip(edges.windows(2))
        .map(|(&c, e)| {
            if c == 0 {
                0.0
            } else {
                c as f64 / (total * (e[1] - e[0]))
            }
        })
        .collect();
    Distribution {
        variable: variable.to_string(),
        bin_edges: edges.to_vec(),
        densities,
        sample_count: values.len(),
    }
}

pub fn distribution(variable: &str, values: &[f64], n_bins: usize) -> Result<Distribution> {
    let edges = equal_width_edges(values, n_bins).ok_or_else(|| {
        Error::Analysis(format!(
            "distribution of {variable}: need at least one value and one bin"
        ))
    })?;
    Ok(distribution_with_edges(variable, values, &edges))
}

/// Top-performer mean against population mean for one (window, measure, scale).
#[derive(Debug, Clone, PartialEq)]
pub struct CaseComparison {
    pub window: String,
    pub measure: MeasureId,
    pub scale: TimeScale,
    pub n_all: usize,
    pub n_top: usize,
    pub mean_all: f64,
    pub mean_top: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonStats {
    pub cases_total: usize,
    pub cases_top_greater: usize,
    pub fraction_top_greater: f64,
    pub sum_diff_when_greater: f64,
    pub sum_diff_otherwise: f64,
    /// `None` when `sum_diff_otherwise` is zero.
    pub ratio: Option<f64>,
    pub cases: Vec<CaseComparison>,
}

/// Groups results into cases and compares the mean global antifragility of
/// the window-year's top performers against that of all agents.
/// Cases without any alive top performer are skipped.
pub fn top_comparison(
    results: &[AntifragilityResult],
    windows: &[AnalysisWindow],
    top_lists: &[TopPerformerList],
) -> Result<ComparisonStats> {
    let years: HashMap<&str, i32> = windows
        .iter()
        .map(|w| (w.label.as_str(), w.year_key()))
        .collect();
    let window_order: HashMap<&str, usize> = windows
        .iter()
        .enumerate()
        .map(|(i, w)| (w.label.as_str(), i))
        .collect();

    let mut groups: BTreeMap<(usize, &str, MeasureId, TimeScale), Vec<&AntifragilityResult>> =
        BTreeMap::new();
    for r in results {
        let order = window_order
            .get(r.window.as_str())
            .copied()
            .unwrap_or(usize::MAX);
        groups
            .entry((order, r.window.as_str(), r.measure, r.scale))
            .or_default()
            .push(r);
    }

    let mut cases = Vec::new();
    for ((_, window, measure, scale), mut members) in groups {
        members.sort_by(|a, b| a.agent_id.cmp(&b.agent_id));
        let year = years.get(window).copied();
        let is_top = |id: &str| {
            top_lists
                .iter()
                .any(|l| Some(l.year) == year && l.agent_ids.contains(id))
        };
        let all: Vec<f64> = members.iter().map(|r| r.global).collect();
        let top: Vec<f64> = members
            .iter()
            .filter(|r| is_top(&r.agent_id))
            .map(|r| r.global)
            .collect();
        if top.is_empty() {
            tracing::info!(window, %measure, %scale, "comparison case skipped: no top performer alive");
            continue;
        }
        cases.push(CaseComparison {
            window: window.to_string(),
            measure,
            scale,
            n_all: all.len(),
            n_top: top.len(),
            mean_all: stats::mean(&all).expect("non-empty"),
            mean_top: stats::mean(&top).expect("non-empty"),
        });
    }
    if cases.is_empty() {
        return Err(Error::Analysis(
            "top-performer comparison: no case has an alive top performer".into(),
        ));
    }
    Ok(summarize_cases(cases))
}

pub fn summarize_cases(cases: Vec<CaseComparison>) -> ComparisonStats {
    let greater: Vec<f64> = cases
        .iter()
        .filter(|c| c.mean_top > c.mean_all)
        .map(|c| (c.mean_top - c.mean_all).abs())
        .collect();
    let otherwise: Vec<f64> = cases
        .iter()
        .filter(|c| c.mean_top <= c.mean_all)
        .map(|c| (c.mean_top - c.mean_all).abs())
        .collect();
    let sum_diff_when_greater = stats::sum(greater.iter().copied());
    let sum_diff_otherwise = stats::sum(otherwise.iter().copied());
    ComparisonStats {
        cases_total: cases.len(),
        cases_top_greater: greater.len(),
        fraction_top_greater: greater.len() as f64 / cases.len() as f64,
        sum_diff_when_greater,
        sum_diff_otherwise,
        ratio: (sum_diff_otherwise > 0.0).then(|| sum_diff_when_greater / sum_diff_otherwise),
        cases,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterRow {
    pub window: String,
    pub measure: MeasureId,
    pub scale: TimeScale,
    pub agent_id: String,
    pub antifragility: f64,
    pub variable: PerfVariable,
    pub value: f64,
}

/// Long-format (A, performance) pairs; pairs with an undefined performance
/// value are omitted. Rows are ordered by window (in `windows` order),
/// measure, scale, agent and variable.
pub fn scatter_export(
    results: &[AntifragilityResult],
    performance: &[PerformanceRecord],
    variables: &[PerfVariable],
    windows: &[AnalysisWindow],
) -> Vec<ScatterRow> {
    let perf: HashMap<(&str, &str), &PerformanceRecord> = performance
        .iter()
        .map(|p| ((p.window.as_str(), p.agent_id.as_str()), p))
        .collect();
    let order = window_order(windows);
    let mut sorted: Vec<&AntifragilityResult> = results.iter().collect();
    sorted.sort_by(|a, b| result_key(a, &order).cmp(&result_key(b, &order)));

    let mut vars = variables.to_vec();
    vars.sort();
    let mut rows = Vec::new();
    for r in sorted {
        let Some(p) = perf.get(&(r.window.as_str(), r.agent_id.as_str())) else {
            continue;
        };
        for &var in &vars {
            if let Some(value) = p.value(var) {
                rows.push(ScatterRow {
                    window: r.window.clone(),
                    measure: r.measure,
                    scale: r.scale,
                    agent_id: r.agent_id.clone(),
                    antifragility: r.global,
                    variable: var,
                    value,
                });
            }
        }
    }
    rows
}

fn window_order(windows: &[AnalysisWindow]) -> HashMap<String, usize> {
    windows
        .iter()
        .enumerate()
        .map(|(i, w)| (w.label.clone(), i))
        .collect()
}

fn result_key<'a>(
    r: &'a AntifragilityResult,
    order: &HashMap<String, usize>,
) -> (usize, &'a str, MeasureId, TimeScale, &'a str) {
    (
        order.get(&r.window).copied().unwrap_or(usize::MAX),
        r.window.as_str(),
        r.measure,
        r.scale,
        r.agent_id.as_str(),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRow {
    pub window: String,
    pub measure: MeasureId,
    pub scale: TimeScale,
    pub variable: PerfVariable,
    pub n: usize,
    pub r: Option<f64>,
}

/// Pearson r between global A and each performance variable, per case.
/// Agents whose performance value is undefined are dropped from that pair set.
pub fn correlations(
    results: &[AntifragilityResult],
    performance: &[PerformanceRecord],
    variables: &[PerfVariable],
    windows: &[AnalysisWindow],
) -> Vec<CorrelationRow> {
    let perf: HashMap<(&str, &str), &PerformanceRecord> = performance
        .iter()
        .map(|p| ((p.window.as_str(), p.agent_id.as_str()), p))
        .collect();
    let order = window_order(windows);
    let mut cases: BTreeMap<(usize, &str, MeasureId, TimeScale), Vec<&AntifragilityResult>> =
        BTreeMap::new();
    for r in results {
        let (o, w, m, s, _) = result_key(r, &order);
        cases.entry((o, w, m, s)).or_default().push(r);
    }
    let mut vars = variables.to_vec();
    vars.sort();

    let mut out = Vec::new();
    for ((_, window, measure, scale), mut members) in cases {
        members.sort_by(|a, b| a.agent_id.cmp(&b.agent_id));
        for &var in &vars {
            let pairs: Vec<(Option<f64>, Option<f64>)> = members
                .iter()
                .map(|r| {
                    let value = perf
                        .get(&(r.window.as_str(), r.agent_id.as_str()))
                        .and_then(|p| p.value(var));
                    (Some(r.global), value)
                })
                .collect();
            let (n, r) = pearson_defined(&pairs);
            out.push(CorrelationRow {
                window: window.to_string(),
                measure,
                scale,
                variable: var,
                n,
                r,
            });
        }
    }
    out
}
