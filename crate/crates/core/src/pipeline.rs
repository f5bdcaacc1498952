//! End-to-end batch run: load inputs, build panels for every window and
//! scale, compute measures, performance and analyses, and write the outputs.
//!
//! Parallel work is confined to per-agent and per-panel computations whose
//! results are collected in a fixed order, so the written bytes do not depend
//! on the worker count.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::analysis::{
    correlations, distribution, distribution_with_edges, quantile_bin_summary, scatter_export,
    top_comparison, BinItem, ComparisonStats, CorrelationRow, ScatterRow, QUANTILE_BINS,
};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::ingestion::{
    agent_files, load_agent_dir, load_index_dir, load_top_performers, slice_window,
    unused_top_years, AgentSeries, AnalysisWindow, IndexId, IndexSeries, MarketKind,
    TopPerformerList,
};
use crate::measures::{compute_panel, AntifragilityResult, MeasureId, PanelMeasures};
use crate::normalize::{build_panel, Channel, NormalizedPanel, TimeScale};
use crate::output::{self, BinRow, DistributionRow};
use crate::performance::{compute_performance, PerfVariable, PerformanceRecord};

/// All inputs of one run, already loaded.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub market_kind: MarketKind,
    pub agents: Vec<AgentSeries>,
    pub indexes: Vec<IndexSeries>,
    pub top_lists: Vec<TopPerformerList>,
}

impl Dataset {
    /// Sorts agents by id and rejects duplicates, so any input order gives the
    /// same dataset.
    pub fn new(
        market_kind: MarketKind,
        mut agents: Vec<AgentSeries>,
        mut indexes: Vec<IndexSeries>,
        top_lists: Vec<TopPerformerList>,
    ) -> Result<Self> {
        agents.sort_by(|a, b| a.agent_id.cmp(&b.agent_id));
        if let Some(pair) = agents.windows(2).find(|p| p[0].agent_id == p[1].agent_id) {
            return Err(Error::DuplicateAgent(pair[0].agent_id.clone()));
        }
        if let Some(a) = agents.iter().find(|a| a.market_kind != market_kind) {
            return Err(Error::Invariant(format!(
                "agent {} is {} in a {market_kind} dataset",
                a.agent_id, a.market_kind
            )));
        }
        indexes.sort_by_key(|i| i.index_id);
        Ok(Dataset {
            market_kind,
            agents,
            indexes,
            top_lists,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    pub windows: Vec<AnalysisWindow>,
    pub scales: Vec<TimeScale>,
    pub measures: Vec<MeasureId>,
    pub n_hist_bins: usize,
    pub keep_panels: bool,
}

impl AnalysisOptions {
    pub fn new(kind: MarketKind, windows: Vec<AnalysisWindow>) -> Self {
        AnalysisOptions {
            windows,
            scales: TimeScale::ALL.to_vec(),
            measures: MeasureId::defaults_for(kind),
            n_hist_bins: crate::analysis::DEFAULT_HIST_BINS,
            keep_panels: false,
        }
    }

    pub fn from_config(config: &RunConfig) -> Self {
        AnalysisOptions {
            windows: config.windows.clone(),
            scales: config.scales.clone(),
            measures: config.measures.clone(),
            n_hist_bins: config.n_hist_bins,
            keep_panels: config.dump_panels,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowSummary {
    pub label: String,
    pub start: String,
    pub end: String,
    /// Agents with at least two observations in the window.
    pub alive_agents: usize,
    /// Agents with at least two periods, keyed by scale code.
    pub panel_agents: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResults {
    pub market_kind: MarketKind,
    /// One per (window, scale), in option order.
    pub panel_measures: Vec<PanelMeasures>,
    pub panels: Vec<NormalizedPanel>,
    /// Ordered by window, measure, scale, agent id.
    pub results: Vec<AntifragilityResult>,
    pub performance: Vec<PerformanceRecord>,
    pub scatter: Vec<ScatterRow>,
    pub correlations: Vec<CorrelationRow>,
    pub bins: Vec<BinRow>,
    pub distributions: Vec<DistributionRow>,
    pub comparison: Option<ComparisonStats>,
    pub windows: Vec<WindowSummary>,
}

/// Runs every computation on the current rayon pool.
pub fn analyze(dataset: &Dataset, opts: &AnalysisOptions) -> Result<RunResults> {
    let kind = dataset.market_kind;
    if let Some(m) = opts.measures.iter().find(|m| !m.valid_for(kind)) {
        return Err(Error::InvalidMeasure {
            measure: m.to_string(),
            kind: kind.to_string(),
        });
    }
    let jobs: Vec<(&AnalysisWindow, TimeScale)> = opts
        .windows
        .iter()
        .flat_map(|w| opts.scales.iter().map(move |&s| (w, s)))
        .collect();

    let computed: Vec<(NormalizedPanel, PanelMeasures)> = jobs
        .par_iter()
        .map(|&(window, scale)| {
            let panel = build_panel(&dataset.agents, &dataset.indexes, window, scale)?;
            let measures = compute_panel(&panel, kind, &opts.measures)?;
            Ok((panel, measures))
        })
        .collect::<Result<Vec<_>>>()?;

    let performance = compute_all_performance(dataset, &opts.windows)?;

    let mut windows = Vec::with_capacity(opts.windows.len());
    for w in &opts.windows {
        let alive_agents = dataset
            .agents
            .iter()
            .filter(|a| slice_window(a, w).is_some())
            .count();
        let panel_agents = computed
            .iter()
            .filter(|(p, _)| p.window.label == w.label)
            .map(|(p, _)| (p.scale.code().to_string(), p.agents.len()))
            .collect();
        windows.push(WindowSummary {
            label: w.label.clone(),
            start: w.start.to_string(),
            end: w.end.to_string(),
            alive_agents,
            panel_agents,
        });
    }

    let (panels, panel_measures): (Vec<NormalizedPanel>, Vec<PanelMeasures>) =
        computed.into_iter().unzip();

    let measure_rank: HashMap<MeasureId, usize> = opts
        .measures
        .iter()
        .enumerate()
        .map(|(i, m)| (*m, i))
        .collect();
    let window_rank: HashMap<&str, usize> = opts
        .windows
        .iter()
        .enumerate()
        .map(|(i, w)| (w.label.as_str(), i))
        .collect();
    let mut results: Vec<AntifragilityResult> = panel_measures
        .iter()
        .flat_map(|pm| pm.results.iter().cloned())
        .collect();
    results.sort_by(|a, b| {
        (
            window_rank[a.window.as_str()],
            measure_rank[&a.measure],
            a.scale,
            &a.agent_id,
        )
            .cmp(&(
                window_rank[b.window.as_str()],
                measure_rank[&b.measure],
                b.scale,
                &b.agent_id,
            ))
    });

    let variables = PerfVariable::for_kind(kind);
    let scatter = scatter_export(&results, &performance, &variables, &opts.windows);
    let correlations = correlations(&results, &performance, &variables, &opts.windows);
    let (bins, distributions) =
        bins_and_distributions(&results, &performance, &variables, dataset, opts)?;

    let comparison = if dataset.top_lists.is_empty() {
        None
    } else {
        for year in unused_top_years(&dataset.top_lists, &opts.windows) {
            tracing::warn!(year, "top-performer list year matches no analysis window");
        }
        match top_comparison(&results, &opts.windows, &dataset.top_lists) {
            Ok(stats) => Some(stats),
            Err(e) => {
                tracing::warn!("{e}");
                None
            }
        }
    };

    Ok(RunResults {
        market_kind: kind,
        panel_measures,
        panels: if opts.keep_panels { panels } else { Vec::new() },
        results,
        performance,
        scatter,
        correlations,
        bins,
        distributions,
        comparison,
        windows,
    })
}

fn compute_all_performance(
    dataset: &Dataset,
    windows: &[AnalysisWindow],
) -> Result<Vec<PerformanceRecord>> {
    let mut out = Vec::new();
    for w in windows {
        let records = dataset
            .agents
            .par_iter()
            .filter_map(|a| slice_window(a, w).map(|s| (a.first_date(), s)))
            .map(|(born, s)| compute_performance(&s, born, w, &dataset.top_lists))
            .collect::<Result<Vec<_>>>()?;
        out.extend(records);
    }
    Ok(out)
}

type CaseKey<'a> = (&'a str, MeasureId, TimeScale);

fn bins_and_distributions(
    results: &[AntifragilityResult],
    performance: &[PerformanceRecord],
    variables: &[PerfVariable],
    dataset: &Dataset,
    opts: &AnalysisOptions,
) -> Result<(Vec<BinRow>, Vec<DistributionRow>)> {
    let perf: HashMap<(&str, &str), &PerformanceRecord> = performance
        .iter()
        .map(|p| ((p.window.as_str(), p.agent_id.as_str()), p))
        .collect();

    // `results` is already in case order; group without reordering.
    let mut cases: Vec<(CaseKey, Vec<&AntifragilityResult>)> = Vec::new();
    for r in results {
        let key = (r.window.as_str(), r.measure, r.scale);
        match cases.last_mut() {
            Some((k, members)) if *k == key => members.push(r),
            _ => cases.push((key, vec![r])),
        }
    }

    let per_case: Vec<(Vec<BinRow>, Vec<DistributionRow>)> = cases
        .par_iter()
        .map(|((window, measure, scale), members)| {
            let tag = |summary| BinRow {
                window: window.to_string(),
                measure: *measure,
                scale: *scale,
                summary,
            };
            let mut bins = Vec::new();
            for &var in variables {
                let items_by_a: Vec<BinItem> = members
                    .iter()
                    .filter_map(|r| {
                        let v = perf.get(&(*window, r.agent_id.as_str()))?.value(var)?;
                        Some(BinItem {
                            agent_id: r.agent_id.clone(),
                            bin_by: r.global,
                            stat_of: v,
                        })
                    })
                    .collect();
                if items_by_a.len() < QUANTILE_BINS {
                    tracing::debug!(window, %measure, %scale, variable = %var, "too few agents to bin");
                    continue;
                }
                let items_by_var: Vec<BinItem> = items_by_a
                    .iter()
                    .map(|i| BinItem {
                        agent_id: i.agent_id.clone(),
                        bin_by: i.stat_of,
                        stat_of: i.bin_by,
                    })
                    .collect();
                let a_name = measure.as_str();
                bins.extend(
                    quantile_bin_summary(&items_by_a, QUANTILE_BINS, a_name, var.as_str())?
                        .into_iter()
                        .map(tag),
                );
                bins.extend(
                    quantile_bin_summary(&items_by_var, QUANTILE_BINS, var.as_str(), a_name)?
                        .into_iter()
                        .map(tag),
                );
            }

            let all: Vec<f64> = members.iter().map(|r| r.global).collect();
            let mut dists = Vec::new();
            let population = distribution(measure.as_str(), &all, opts.n_hist_bins)?;
            let year = opts
                .windows
                .iter()
                .find(|w| w.label == *window)
                .map(|w| w.year_key());
            let top: Vec<f64> = members
                .iter()
                .filter(|r| {
                    dataset
                        .top_lists
                        .iter()
                        .any(|l| Some(l.year) == year && l.agent_ids.contains(&r.agent_id))
                })
                .map(|r| r.global)
                .collect();
            let top_dist = (!top.is_empty())
                .then(|| distribution_with_edges(measure.as_str(), &top, &population.bin_edges));
            let row = |group, distribution| DistributionRow {
                window: window.to_string(),
                measure: *measure,
                scale: *scale,
                group,
                distribution,
            };
            dists.push(row("all", population));
            if let Some(d) = top_dist {
                dists.push(row("top", d));
            }
            Ok((bins, dists))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut bins = Vec::new();
    let mut dists = Vec::new();
    for (b, d) in per_case {
        bins.extend(b);
        dists.extend(d);
    }
    Ok((bins, dists))
}

/// Runs `analyze` on a dedicated pool of `workers` threads (0 = all cores).
pub fn analyze_with_workers(
    dataset: &Dataset,
    opts: &AnalysisOptions,
    workers: usize,
) -> Result<RunResults> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Pool(e.to_string()))?;
    pool.install(|| analyze(dataset, opts))
}

pub const ANTIFRAGILITY_CSV: &str = "antifragility.csv";
pub const PERFORMANCE_CSV: &str = "performance.csv";
pub const SCATTER_CSV: &str = "scatter.csv";
pub const CORRELATIONS_CSV: &str = "correlations.csv";
pub const BINS_CSV: &str = "bins.csv";
pub const DISTRIBUTIONS_CSV: &str = "distributions.csv";
pub const COMPARISON_JSON: &str = "comparison.json";
pub const MANIFEST_JSON: &str = "run_manifest.json";

/// Renders every data output to its file name and content.
pub fn render(results: &RunResults) -> BTreeMap<String, String> {
    let mut files = BTreeMap::new();
    files.insert(
        ANTIFRAGILITY_CSV.into(),
        output::antifragility_csv(&results.results),
    );
    files.insert(
        PERFORMANCE_CSV.into(),
        output::performance_csv(&results.performance),
    );
    files.insert(SCATTER_CSV.into(), output::scatter_csv(&results.scatter));
    files.insert(
        CORRELATIONS_CSV.into(),
        output::correlations_csv(&results.correlations),
    );
    files.insert(BINS_CSV.into(), output::bins_csv(&results.bins));
    files.insert(
        DISTRIBUTIONS_CSV.into(),
        output::distributions_csv(&results.distributions),
    );
    if let Some(c) = &results.comparison {
        files.insert(COMPARISON_JSON.into(), output::comparison_json(c));
    }
    for panel in &results.panels {
        for channel in [Channel::Price, Channel::Volume, Channel::MarketCap] {
            if channel == Channel::MarketCap && results.market_kind == MarketKind::Stock {
                continue;
            }
            let name = format!(
                "panels/{}_{}_{}.csv",
                panel.window.label.replace(['/', '\\', '.'], "_"),
                panel.scale.code(),
                channel.as_str()
            );
            files.insert(name, panel.to_csv(channel));
        }
    }
    files
}

#[derive(Debug, Serialize)]
struct ManifestInput {
    role: &'static str,
    name: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct ManifestWindow {
    label: String,
    start: String,
    end: String,
}

#[derive(Debug, Serialize)]
struct ManifestConfig {
    market_kind: &'static str,
    windows: Vec<ManifestWindow>,
    scales: Vec<u8>,
    measures: Vec<&'static str>,
    n_hist_bins: usize,
    top_performers: bool,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: ManifestConfig,
    inputs: Vec<ManifestInput>,
    windows: &'a [WindowSummary],
    outputs: Vec<String>,
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Input paths actually read by a run, by role.
#[derive(Debug, Clone, Default)]
pub struct InputFiles {
    pub agents: Vec<PathBuf>,
    pub indexes: Vec<PathBuf>,
    pub top_performers: Option<PathBuf>,
}

/// Records the options, input digests (by file name) and per-window agent
/// counts. Output directory and worker count are left out since they do not
/// affect any output byte.
pub fn manifest_json(
    opts: &AnalysisOptions,
    kind: MarketKind,
    inputs: &InputFiles,
    results: &RunResults,
    outputs: &[String],
) -> Result<String> {
    let mut entries = Vec::new();
    for p in &inputs.agents {
        entries.push(ManifestInput {
            role: "agent",
            name: file_name(p),
            sha256: sha256_file(p)?,
        });
    }
    for p in &inputs.indexes {
        entries.push(ManifestInput {
            role: "index",
            name: file_name(p),
            sha256: sha256_file(p)?,
        });
    }
    if let Some(p) = &inputs.top_performers {
        entries.push(ManifestInput {
            role: "top_performers",
            name: file_name(p),
            sha256: sha256_file(p)?,
        });
    }
    let manifest = Manifest {
        tool: "antifragility",
        version: env!("CARGO_PKG_VERSION"),
        config: ManifestConfig {
            market_kind: kind.as_str(),
            windows: opts
                .windows
                .iter()
                .map(|w| ManifestWindow {
                    label: w.label.clone(),
                    start: w.start.to_string(),
                    end: w.end.to_string(),
                })
                .collect(),
            scales: opts.scales.iter().map(|s| s.code()).collect(),
            measures: opts.measures.iter().map(|m| m.as_str()).collect(),
            n_hist_bins: opts.n_hist_bins,
            top_performers: inputs.top_performers.is_some(),
        },
        inputs: entries,
        windows: &results.windows,
        outputs: outputs.to_vec(),
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    Ok(text)
}

/// Loads the inputs named by a config.
pub fn load_dataset(config: &RunConfig) -> Result<(Dataset, InputFiles)> {
    let agents = load_agent_dir(&config.data_dir, config.market_kind)?;
    let mut files = InputFiles {
        agents: agent_files(&config.data_dir)?,
        ..Default::default()
    };
    let indexes = match &config.index_dir {
        Some(dir) if config.market_kind == MarketKind::Stock => {
            let loaded = load_index_dir(dir)?;
            files.indexes = loaded
                .iter()
                .map(|i| dir.join(format!("{}.csv", i.index_id)))
                .collect();
            loaded
        }
        _ => Vec::new(),
    };
    for m in &config.measures {
        let needed: &[IndexId] = match m {
            MeasureId::Afx => &[IndexId::Vix],
            MeasureId::Af3m => &[IndexId::Nasdaq, IndexId::Dji, IndexId::Spx],
            _ => &[],
        };
        for id in needed {
            if !indexes.iter().any(|i| i.index_id == *id) {
                return Err(Error::MissingIndex {
                    measure: m.to_string(),
                    index: id.to_string(),
                    window: "all".into(),
                });
            }
        }
    }
    let top_lists = match &config.top_performers_path {
        Some(p) => {
            files.top_performers = Some(p.clone());
            load_top_performers(p)?
        }
        None => Vec::new(),
    };
    Ok((
        Dataset::new(config.market_kind, agents, indexes, top_lists)?,
        files,
    ))
}

/// What a successful run wrote.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub files: Vec<String>,
    pub results: usize,
}

/// Writes all files or none: on any write failure the files already written
/// by this call are removed.
pub fn write_outputs(dir: &Path, files: &BTreeMap<String, String>) -> Result<()> {
    let mut written: Vec<PathBuf> = Vec::new();
    let outcome = (|| {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, content) in files {
            let path = dir.join(name);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            fs::write(&path, content).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
        Ok(())
    })();
    if outcome.is_err() {
        for p in &written {
            let _ = fs::remove_file(p);
        }
    }
    outcome
}

/// Full batch run from a config. Nothing is written unless every
/// computation succeeds.
pub fn run(config: &RunConfig) -> Result<RunSummary> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.worker_count)
        .build()
        .map_err(|e| Error::Pool(e.to_string()))?;
    pool.install(|| {
        let (dataset, inputs) = load_dataset(config)?;
        let opts = AnalysisOptions::from_config(config);
        let results = analyze(&dataset, &opts)?;
        let mut files = render(&results);
        let mut names: Vec<String> = files.keys().cloned().collect();
        names.push(MANIFEST_JSON.into());
        names.sort();
        let manifest = manifest_json(&opts, config.market_kind, &inputs, &results, &names)?;
        files.insert(MANIFEST_JSON.into(), manifest);
        write_outputs(&config.output_dir, &files)?;
        Ok(RunSummary {
            output_dir: config.output_dir.clone(),
            files: names,
            results: results.results.len(),
        })
    })
}
