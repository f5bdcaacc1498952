//! Time-scale resampling and per-window min-max normalization.
//!
//! A period is identified by its first calendar day: the date itself at the
//! daily scale, the Monday of the ISO week at the weekly scale and the first
//! of the month at the monthly scale.

use std::collections::BTreeSet;
use std::fmt;

use chrono::{Datelike, NaiveDate, Weekday};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingestion::{
    slice_index, slice_window, AgentSeries, AnalysisWindow, IndexId, IndexSeries, RawObservation,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TimeScale {
    Daily,
    Weekly,
    Monthly,
}

impl TimeScale {
    pub const ALL: [TimeScale; 3] = [TimeScale::Daily, TimeScale::Weekly, TimeScale::Monthly];

    pub fn code(self) -> u8 {
        match self {
            TimeScale::Daily => 0,
            TimeScale::Weekly => 1,
            TimeScale::Monthly => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(TimeScale::Daily),
            1 => Some(TimeScale::Weekly),
            2 => Some(TimeScale::Monthly),
            _ => None,
        }
    }

    /// First day of the period containing `date`.
    pub fn period_of(self, date: NaiveDate) -> NaiveDate {
        match self {
            TimeScale::Daily => date,
            TimeScale::Weekly => {
                let w = date.iso_week();
                NaiveDate::from_isoywd_opt(w.year(), w.week(), Weekday::Mon)
                    .expect("ISO week of a valid date")
            }
            TimeScale::Monthly => date.with_day(1).expect("day 1 exists"),
        }
    }
}

impl fmt::Display for TimeScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    Price,
    Volume,
    MarketCap,
}

impl Channel {
    pub fn as_str(self) -> &'static str {
        match self {
            Channel::Price => "price",
            Channel::Volume => "volume",
            Channel::MarketCap => "market_cap",
        }
    }
}

/// One normalized channel of one agent, every value in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSeries {
    pub agent_id: String,
    pub scale: TimeScale,
    pub channel: Channel,
    pub values: Vec<(NaiveDate, f64)>,
}

/// Resamples a series to `scale` within `window`. Open and market cap come
/// from the first observation of each period, volume is summed. Returns
/// `None` when fewer than two periods remain. Output observations are dated
/// by their period start.
pub fn resample(
    series: &AgentSeries,
    scale: TimeScale,
    window: &AnalysisWindow,
) -> Option<AgentSeries> {
    let mut out: Vec<RawObservation> = Vec::new();
    for o in series
        .observations
        .iter()
        .filter(|o| window.contains(o.date))
    {
        let period = scale.period_of(o.date);
        match out.last_mut() {
            Some(last) if last.date == period => last.volume += o.volume,
            _ => out.push(RawObservation { date: period, ..*o }),
        }
    }
    (out.len() >= 2).then(|| AgentSeries {
        agent_id: series.agent_id.clone(),
        market_kind: series.market_kind,
        observations: out,
    })
}

/// Min-max normalization into `[0, 1]`; a zero-range input maps to 0.5
/// everywhere so that all of its differences vanish.
pub fn minmax_normalize(values: &[f64]) -> Vec<f64> {
    let Some((lo, hi)) = crate::stats::min_max(values) else {
        return Vec::new();
    };
    if hi > lo {
        let range = hi - lo;
        values
            .iter()
            .map(|v| ((v - lo) / range).clamp(0.0, 1.0))
            .collect()
    } else {
        vec![0.5; values.len()]
    }
}

/// Normalizes the present entries of a partially missing channel.
fn minmax_normalize_sparse(values: &[Option<f64>]) -> Vec<Option<f64>> {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    let mut normalized = minmax_normalize(&present).into_iter();
    values
        .iter()
        .map(|v| v.and_then(|_| normalized.next()))
        .collect()
}

/// One alive agent inside a panel. All vectors are aligned with `periods`,
/// the agent's own (strictly increasing) periods.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelAgent {
    pub agent_id: String,
    pub periods: Vec<NaiveDate>,
    pub raw_open: Vec<f64>,
    pub price: Vec<f64>,
    pub volume: Vec<f64>,
    pub market_cap: Vec<Option<f64>>,
}

impl PanelAgent {
    fn from_resampled(series: &AgentSeries) -> Self {
        let obs = &series.observations;
        let raw_open: Vec<f64> = obs.iter().map(|o| o.open).collect();
        let volumes: Vec<f64> = obs.iter().map(|o| o.volume).collect();
        let caps: Vec<Option<f64>> = obs.iter().map(|o| o.market_cap).collect();
        PanelAgent {
            agent_id: series.agent_id.clone(),
            periods: obs.iter().map(|o| o.date).collect(),
            price: minmax_normalize(&raw_open),
            volume: minmax_normalize(&volumes),
            market_cap: minmax_normalize_sparse(&caps),
            raw_open,
        }
    }

    pub fn series(&self, channel: Channel, scale: TimeScale) -> NormalizedSeries {
        let values = match channel {
            Channel::Price => zip_dense(&self.periods, &self.price),
            Channel::Volume => zip_dense(&self.periods, &self.volume),
            Channel::MarketCap => self
                .periods
                .iter()
                .zip(&self.market_cap)
                .filter_map(|(p, v)| v.map(|v| (*p, v)))
                .collect(),
        };
        NormalizedSeries {
            agent_id: self.agent_id.clone(),
            scale,
            channel,
            values,
        }
    }
}

fn zip_dense(periods: &[NaiveDate], values: &[f64]) -> Vec<(NaiveDate, f64)> {
    periods
        .iter()
        .copied()
        .zip(values.iter().copied())
        .collect()
}

/// A market index resampled to the panel scale and normalized over the window.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelIndex {
    pub index_id: IndexId,
    pub periods: Vec<NaiveDate>,
    pub levels: Vec<f64>,
}

impl PanelIndex {
    pub fn level_at(&self, period: NaiveDate) -> Option<f64> {
        self.periods
            .binary_search(&period)
            .ok()
            .map(|i| self.levels[i])
    }
}

/// First level of each period.
pub fn resample_index(series: &IndexSeries, scale: TimeScale) -> Vec<(NaiveDate, f64)> {
    let mut out: Vec<(NaiveDate, f64)> = Vec::new();
    for &(date, level) in &series.values {
        let period = scale.period_of(date);
        if out.last().map(|&(p, _)| p) != Some(period) {
            out.push((period, level));
        }
    }
    out
}

/// Date-aligned, normalized view of every alive agent and index for one
/// window at one time-scale. Agents are ordered by id.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedPanel {
    pub scale: TimeScale,
    pub window: AnalysisWindow,
    pub period_axis: Vec<NaiveDate>,
    pub agents: Vec<PanelAgent>,
    pub indexes: Vec<PanelIndex>,
}

impl NormalizedPanel {
    pub fn index(&self, id: IndexId) -> Option<&PanelIndex> {
        self.indexes.iter().find(|i| i.index_id == id)
    }

    /// Period-by-agent table of one channel; absent cells are empty.
    pub fn to_csv(&self, channel: Channel) -> String {
        let mut out = String::from("period");
        for a in &self.agents {
            out.push(',');
            out.push_str(&a.agent_id);
        }
        out.push('\n');
        let columns: Vec<NormalizedSeries> = self
            .agents
            .iter()
            .map(|a| a.series(channel, self.scale))
            .collect();
        for period in &self.period_axis {
            out.push_str(&period.format("%Y-%m-%d").to_string());
            for col in &columns {
                out.push(',');
                if let Ok(i) = col.values.binary_search_by_key(period, |&(p, _)| p) {
                    out.push_str(&crate::output::fmt_real(col.values[i].1));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Resamples and normalizes every agent alive in `window`, plus the indexes.
pub fn build_panel(
    agents: &[AgentSeries],
    indexes: &[IndexSeries],
    window: &AnalysisWindow,
    scale: TimeScale,
) -> Result<NormalizedPanel> {
    let mut members: Vec<PanelAgent> = agents
        .par_iter()
        .filter_map(|a| slice_window(a, window))
        .filter_map(|a| resample(&a, scale, window))
        .map(|a| PanelAgent::from_resampled(&a))
        .collect();
    if members.is_empty() {
        return Err(Error::EmptyPanel {
            window: window.label.clone(),
            scale: scale.code(),
        });
    }
    members.sort_by(|a, b| a.agent_id.cmp(&b.agent_id));

    let period_axis: Vec<NaiveDate> = members
        .iter()
        .flat_map(|a| a.periods.iter().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let mut panel_indexes: Vec<PanelIndex> = indexes
        .iter()
        .filter_map(|series| {
            let resampled = resample_index(&slice_index(series, window), scale);
            if resampled.is_empty() {
                return None;
            }
            let raw: Vec<f64> = resampled.iter().map(|&(_, l)| l).collect();
            Some(PanelIndex {
                index_id: series.index_id,
                periods: resampled.iter().map(|&(p, _)| p).collect(),
                levels: minmax_normalize(&raw),
            })
        })
        .collect();
    panel_indexes.sort_by_key(|i| i.index_id);

    Ok(NormalizedPanel {
        scale,
        window: window.clone(),
        period_axis,
        agents: members,
        indexes: panel_indexes,
    })
}
