//! Per-agent "good-performance" descriptors over one analysis window.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::ingestion::{AgentSeries, AnalysisWindow, MarketKind, TopPerformerList};
use crate::stats;

/// Metrics are computed on raw (unnormalized) window values. A ratio whose
/// denominator mean is zero is `None`, as is every market-cap metric for stocks.
#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceRecord {
    pub agent_id: String,
    pub window: String,
    pub age_days: i64,
    pub pct_dlt_pr: Option<f64>,
    pub pct_dlt_mk: Option<f64>,
    pub pct_dlt_vl: Option<f64>,
    pub pct_pr_f_i: Option<f64>,
    pub pct_mk_f_i: Option<f64>,
    pub pct_vl_f_i: Option<f64>,
    pub pr_mea: Option<f64>,
    pub pr_std: Option<f64>,
    pub mk_mea: Option<f64>,
    pub vl_mea: Option<f64>,
    pub is_top_performer: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PerfVariable {
    Age,
    PctDltPr,
    PctDltMk,
    PctDltVl,
    PctPrFI,
    PctMkFI,
    PctVlFI,
    PrMea,
    PrStd,
    MkMea,
    VlMea,
}

impl PerfVariable {
    pub const ALL: [PerfVariable; 11] = [
        PerfVariable::Age,
        PerfVariable::PctDltPr,
        PerfVariable::PctDltMk,
        PerfVariable::PctDltVl,
        PerfVariable::PctPrFI,
        PerfVariable::PctMkFI,
        PerfVariable::PctVlFI,
        PerfVariable::PrMea,
        PerfVariable::PrStd,
        PerfVariable::MkMea,
        PerfVariable::VlMea,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PerfVariable::Age => "age_days",
            PerfVariable::PctDltPr => "pct_dlt_pr",
            PerfVariable::PctDltMk => "pct_dlt_mk",
            PerfVariable::PctDltVl => "pct_dlt_vl",
            PerfVariable::PctPrFI => "pct_pr_f_i",
            PerfVariable::PctMkFI => "pct_mk_f_i",
            PerfVariable::PctVlFI => "pct_vl_f_i",
            PerfVariable::PrMea => "pr_mea",
            PerfVariable::PrStd => "pr_std",
            PerfVariable::MkMea => "mk_mea",
            PerfVariable::VlMea => "vl_mea",
        }
    }

    fn uses_market_cap(self) -> bool {
        matches!(
            self,
            PerfVariable::PctDltMk | PerfVariable::PctMkFI | PerfVariable::MkMea
        )
    }

    pub fn for_kind(kind: MarketKind) -> Vec<PerfVariable> {
        PerfVariable::ALL
            .into_iter()
            .filter(|v| kind == MarketKind::Crypto || !v.uses_market_cap())
            .collect()
    }
}

impl fmt::Display for PerfVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PerfVariable {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PerfVariable::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| format!("unknown performance variable `{s}`"))
    }
}

impl PerformanceRecord {
    pub fn value(&self, var: PerfVariable) -> Option<f64> {
        match var {
            PerfVariable::Age => Some(self.age_days as f64),
            PerfVariable::PctDltPr => self.pct_dlt_pr,
            PerfVariable::PctDltMk => self.pct_dlt_mk,
            PerfVariable::PctDltVl => self.pct_dlt_vl,
            PerfVariable::PctPrFI => self.pct_pr_f_i,
            PerfVariable::PctMkFI => self.pct_mk_f_i,
            PerfVariable::PctVlFI => self.pct_vl_f_i,
            PerfVariable::PrMea => self.pr_mea,
            PerfVariable::PrStd => self.pr_std,
            PerfVariable::MkMea => self.mk_mea,
            PerfVariable::VlMea => self.vl_mea,
        }
    }
}

struct ChannelStats {
    range_ratio: Option<f64>,
    endpoint_ratio: Option<f64>,
    mean: Option<f64>,
}

fn channel_stats(values: &[f64]) -> ChannelStats {
    let Some(mean) = stats::mean(values) else {
        return ChannelStats {
            range_ratio: None,
            endpoint_ratio: None,
            mean: None,
        };
    };
    let (lo, hi) = stats::min_max(values).expect("non-empty");
    let (first, last) = (values[0], values[values.len() - 1]);
    let ratio = |num: f64| (mean > 0.0).then(|| num / mean);
    ChannelStats {
        range_ratio: ratio(hi - lo),
        endpoint_ratio: ratio(last - first),
        mean: Some(mean),
    }
}

/// Computes the descriptors of one window-sliced agent. `full_history_start`
/// is the agent's first observation over its whole history; age runs from
/// there to the window end.
pub fn compute_performance(
    series: &AgentSeries,
    full_history_start: NaiveDate,
    window: &AnalysisWindow,
    top_lists: &[TopPerformerList],
) -> Result<PerformanceRecord> {
    if series.observations.len() < 2 {
        return Err(Error::TooShort(format!(
            "performance of {} needs at least two observations in window {}",
            series.agent_id, window.label
        )));
    }
    let opens: Vec<f64> = series.observations.iter().map(|o| o.open).collect();
    let volumes: Vec<f64> = series.observations.iter().map(|o| o.volume).collect();
    let caps: Vec<f64> = series
        .observations
        .iter()
        .filter_map(|o| o.market_cap)
        .collect();

    let price = channel_stats(&opens);
    let volume = channel_stats(&volumes);
    let cap = match series.market_kind {
        MarketKind::Crypto => channel_stats(&caps),
        MarketKind::Stock => channel_stats(&[]),
    };

    let year = window.year_key();
    let is_top_performer = top_lists
        .iter()
        .any(|l| l.year == year && l.agent_ids.contains(&series.agent_id));

    Ok(PerformanceRecord {
        agent_id: series.agent_id.clone(),
        window: window.label.clone(),
        age_days: (window.end - full_history_start).num_days(),
        pct_dlt_pr: price.range_ratio,
        pct_dlt_mk: cap.range_ratio,
        pct_dlt_vl: volume.range_ratio,
        pct_pr_f_i: price.endpoint_ratio,
        pct_mk_f_i: cap.endpoint_ratio,
        pct_vl_f_i: volume.endpoint_ratio,
        pr_mea: price.mean,
        pr_std: stats::std_population(&opens),
        mk_mea: cap.mean,
        vl_mea: volume.mean,
        is_top_performer,
    })
}
