//! Satisfaction, the eight perturbation measures, and antifragility.
//!
//! Satisfaction of an agent at period `i` is the change of its normalized
//! open price since its previous period. A perturbation is a system-level
//! series in `[0, 1]`; agent-level perturbations are averaged over the agents
//! that define a value at that period. Antifragility at an instant is
//! `S(x, i) * P(i)` and an agent's global value is the mean over the periods
//! where both are defined.
//!
//! Differences are always taken between consecutive observations of the same
//! agent (or index), never across calendar gaps in the panel axis.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingestion::{IndexId, MarketKind};
use crate::normalize::{
    minmax_normalize, Channel, NormalizedPanel, NormalizedSeries, PanelAgent, TimeScale,
};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MeasureId {
    /// Open-price differences.
    Afp,
    /// Volume differences (combined with satisfaction for stocks).
    Afv,
    /// Normalized VIX level. Stocks only.
    Afx,
    /// Mean absolute change of NASDAQ, DJI and SPX. Stocks only.
    Af3m,
    /// Lagged satisfaction magnitude. Crypto only.
    Afn,
    /// Market-cap differences. Crypto only.
    Afm,
}

impl MeasureId {
    pub const ALL: [MeasureId; 6] = [
        MeasureId::Afp,
        MeasureId::Afv,
        MeasureId::Afx,
        MeasureId::Af3m,
        MeasureId::Afn,
        MeasureId::Afm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MeasureId::Afp => "afp",
            MeasureId::Afv => "afv",
            MeasureId::Afx => "afx",
            MeasureId::Af3m => "af3m",
            MeasureId::Afn => "afn",
            MeasureId::Afm => "afm",
        }
    }

    pub fn valid_for(self, kind: MarketKind) -> bool {
        match self {
            MeasureId::Afp | MeasureId::Afv => true,
            MeasureId::Afx | MeasureId::Af3m => kind == MarketKind::Stock,
            MeasureId::Afn | MeasureId::Afm => kind == MarketKind::Crypto,
        }
    }

    pub fn defaults_for(kind: MarketKind) -> Vec<MeasureId> {
        match kind {
            MarketKind::Stock => vec![
                MeasureId::Afp,
                MeasureId::Afv,
                MeasureId::Afx,
                MeasureId::Af3m,
            ],
            MarketKind::Crypto => vec![
                MeasureId::Afp,
                MeasureId::Afv,
                MeasureId::Afn,
                MeasureId::Afm,
            ],
        }
    }
}

impl fmt::Display for MeasureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MeasureId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MeasureId::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown measure `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SatisfactionSeries {
    pub agent_id: String,
    pub scale: TimeScale,
    pub values: Vec<(NaiveDate, f64)>,
}

impl SatisfactionSeries {
    pub fn value_at(&self, period: NaiveDate) -> Option<f64> {
        lookup(&self.values, period)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSeries {
    pub measure: MeasureId,
    pub scale: TimeScale,
    pub values: Vec<(NaiveDate, f64)>,
}

impl PerturbationSeries {
    pub fn value_at(&self, period: NaiveDate) -> Option<f64> {
        lookup(&self.values, period)
    }
}

fn lookup(values: &[(NaiveDate, f64)], period: NaiveDate) -> Option<f64> {
    values
        .binary_search_by_key(&period, |&(p, _)| p)
        .ok()
        .map(|i| values[i].1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AntifragilityResult {
    pub agent_id: String,
    pub measure: MeasureId,
    pub scale: TimeScale,
    pub window: String,
    pub instant_values: Vec<(NaiveDate, f64)>,
    pub global: f64,
    pub n_used: usize,
}

/// `S_i = p_i - p_{i-1}` over consecutive entries of a normalized price series.
pub fn satisfaction(prices: &NormalizedSeries) -> Result<SatisfactionSeries> {
    if prices.values.len() < 2 {
        return Err(Error::TooShort(format!(
            "satisfaction of {} needs at least two prices",
            prices.agent_id
        )));
    }
    Ok(SatisfactionSeries {
        agent_id: prices.agent_id.clone(),
        scale: prices.scale,
        values: prices
            .values
            .windows(2)
            .map(|w| (w[1].0, w[1].1 - w[0].1))
            .collect(),
    })
}

/// System aggregation: the value at a period is the mean over
/// exactly those agents contributing there. Agents are reduced in slice
/// order, so callers pass them sorted by id.
pub fn system_mean(
    contributions: &[Vec<(NaiveDate, f64)>],
    measure: MeasureId,
    scale: TimeScale,
) -> Result<PerturbationSeries> {
    let mut per_period: BTreeMap<NaiveDate, Vec<f64>> = BTreeMap::new();
    for agent in contributions {
        for &(period, v) in agent {
            per_period.entry(period).or_default().push(v);
        }
    }
    if per_period.is_empty() {
        return Err(Error::NoPerturbation {
            measure: measure.to_string(),
        });
    }
    Ok(PerturbationSeries {
        measure,
        scale,
        values: per_period
            .into_iter()
            .map(|(p, vs)| (p, stats::mean(&vs).expect("non-empty").clamp(0.0, 1.0)))
            .collect(),
    })
}

fn abs_diffs(periods: &[NaiveDate], values: &[f64]) -> Vec<(NaiveDate, f64)> {
    (1..values.len())
        .map(|j| (periods[j], (values[j] - values[j - 1]).abs()))
        .collect()
}

fn per_agent<F>(panel: &NormalizedPanel, f: F) -> Vec<Vec<(NaiveDate, f64)>>
where
    F: Fn(&PanelAgent) -> Vec<(NaiveDate, f64)> + Sync + Send,
{
    panel.agents.par_iter().map(f).collect()
}

/// afp. Stocks average absolute differences of normalized opens. Crypto
/// averages raw absolute differences first and normalizes the resulting
/// system series afterwards.
pub fn perturb_price(panel: &NormalizedPanel, kind: MarketKind) -> Result<PerturbationSeries> {
    match kind {
        MarketKind::Stock => {
            let contributions = per_agent(panel, |a| {
                abs_diffs(&a.periods, &a.price)
                    .into_iter()
                    .map(|(p, v)| (p, v.clamp(0.0, 1.0)))
                    .collect()
            });
            system_mean(&contributions, MeasureId::Afp, panel.scale)
        }
        MarketKind::Crypto => {
            let contributions = per_agent(panel, |a| abs_diffs(&a.periods, &a.raw_open));
            let mut per_period: BTreeMap<NaiveDate, Vec<f64>> = BTreeMap::new();
            for agent in &contributions {
                for &(p, v) in agent {
                    per_period.entry(p).or_default().push(v);
                }
            }
            if per_period.is_empty() {
                return Err(Error::NoPerturbation {
                    measure: MeasureId::Afp.to_string(),
                });
            }
            let periods: Vec<NaiveDate> = per_period.keys().copied().collect();
            let raw: Vec<f64> = per_period
                .values()
                .map(|vs| stats::mean(vs).expect("non-empty"))
                .collect();
            Ok(PerturbationSeries {
                measure: MeasureId::Afp,
                scale: panel.scale,
                values: periods.into_iter().zip(minmax_normalize(&raw)).collect(),
            })
        }
    }
}

/// afv for stocks: `|S_i + v_i - v_{i-1}| / 2` on normalized volumes.
pub fn perturb_volume_stock(panel: &NormalizedPanel) -> Result<PerturbationSeries> {
    let contributions = per_agent(panel, |a| {
        (1..a.periods.len())
            .map(|j| {
                let s = a.price[j] - a.price[j - 1];
                let dv = a.volume[j] - a.volume[j - 1];
                (a.periods[j], ((s + dv).abs() / 2.0).clamp(0.0, 1.0))
            })
            .collect()
    });
    system_mean(&contributions, MeasureId::Afv, panel.scale)
}

/// afv for crypto: absolute differences of normalized volumes.
pub fn perturb_volume_crypto(panel: &NormalizedPanel) -> Result<PerturbationSeries> {
    let contributions = per_agent(panel, |a| abs_diffs(&a.periods, &a.volume));
    system_mean(&contributions, MeasureId::Afv, panel.scale)
}

/// afm: absolute differences of normalized market caps between consecutive
/// periods where both caps are present.
pub fn perturb_marketcap(panel: &NormalizedPanel) -> Result<PerturbationSeries> {
    let contributions = per_agent(panel, |a| {
        (1..a.periods.len())
            .filter_map(|j| match (a.market_cap[j - 1], a.market_cap[j]) {
                (Some(prev), Some(cur)) => Some((a.periods[j], (cur - prev).abs())),
                _ => None,
            })
            .collect()
    });
    system_mean(&contributions, MeasureId::Afm, panel.scale)
}

/// afn: at period `i` an agent contributes `|S(x, i-1)|`, its previous
/// satisfaction magnitude.
pub fn perturb_normalized_price(panel: &NormalizedPanel) -> Result<PerturbationSeries> {
    let contributions = per_agent(panel, |a| {
        (2..a.periods.len())
            .map(|j| (a.periods[j], (a.price[j - 1] - a.price[j - 2]).abs()))
            .collect()
    });
    system_mean(&contributions, MeasureId::Afn, panel.scale)
}

/// afx: the normalized VIX level itself.
pub fn perturb_vix(panel: &NormalizedPanel) -> Result<PerturbationSeries> {
    let vix = panel
        .index(IndexId::Vix)
        .ok_or_else(|| Error::MissingIndex {
            measure: MeasureId::Afx.to_string(),
            index: IndexId::Vix.to_string(),
            window: panel.window.label.clone(),
        })?;
    Ok(PerturbationSeries {
        measure: MeasureId::Afx,
        scale: panel.scale,
        values: vix
            .periods
            .iter()
            .copied()
            .zip(vix.levels.iter().copied())
            .collect(),
    })
}

/// af3m: each of NASDAQ, DJI and SPX is normalized over the window, absolute
/// first differences are taken, and the three are averaged at periods where
/// all three are defined.
pub fn perturb_three_indexes(panel: &NormalizedPanel) -> Result<PerturbationSeries> {
    let mut diffs: Vec<BTreeMap<NaiveDate, f64>> = Vec::with_capacity(3);
    for id in [IndexId::Nasdaq, IndexId::Dji, IndexId::Spx] {
        let index = panel.index(id).ok_or_else(|| Error::MissingIndex {
            measure: MeasureId::Af3m.to_string(),
            index: id.to_string(),
            window: panel.window.label.clone(),
        })?;
        diffs.push(
            abs_diffs(&index.periods, &index.levels)
                .into_iter()
                .collect(),
        );
    }
    let values: Vec<(NaiveDate, f64)> = diffs[0]
        .iter()
        .filter_map(|(p, &a)| {
            let b = *diffs[1].get(p)?;
            let c = *diffs[2].get(p)?;
            Some((*p, stats::mean(&[a, b, c])?.clamp(0.0, 1.0)))
        })
        .collect();
    if values.is_empty() {
        return Err(Error::NoPerturbation {
            measure: MeasureId::Af3m.to_string(),
        });
    }
    Ok(PerturbationSeries {
        measure: MeasureId::Af3m,
        scale: panel.scale,
        values,
    })
}

/// `A(x, i) = S(x, i) * P(i)` at every period where both are defined, and
/// their mean. `None` when the two series share no period.
pub fn antifragility(
    satisfaction: &SatisfactionSeries,
    perturbation: &PerturbationSeries,
    window: &str,
) -> Option<AntifragilityResult> {
    let instant_values: Vec<(NaiveDate, f64)> = satisfaction
        .values
        .iter()
        .filter_map(|&(p, s)| perturbation.value_at(p).map(|pv| (p, s * pv)))
        .collect();
    if instant_values.is_empty() {
        tracing::info!(
            agent = %satisfaction.agent_id,
            measure = %perturbation.measure,
            scale = %perturbation.scale,
            window,
            "excluded: no period with both satisfaction and perturbation"
        );
        return None;
    }
    let values: Vec<f64> = instant_values.iter().map(|&(_, a)| a).collect();
    Some(AntifragilityResult {
        agent_id: satisfaction.agent_id.clone(),
        measure: perturbation.measure,
        scale: satisfaction.scale,
        window: window.to_string(),
        global: stats::mean(&values).expect("non-empty"),
        n_used: values.len(),
        instant_values,
    })
}

/// Every series computed for one panel.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelMeasures {
    pub scale: TimeScale,
    pub window: String,
    /// One per panel agent, in panel order.
    pub satisfaction: Vec<SatisfactionSeries>,
    pub perturbations: Vec<PerturbationSeries>,
    /// Ordered by measure (in request order), then agent id.
    pub results: Vec<AntifragilityResult>,
}

pub fn perturbation(
    panel: &NormalizedPanel,
    kind: MarketKind,
    measure: MeasureId,
) -> Result<PerturbationSeries> {
    if !measure.valid_for(kind) {
        return Err(Error::InvalidMeasure {
            measure: measure.to_string(),
            kind: kind.to_string(),
        });
    }
    match (measure, kind) {
        (MeasureId::Afp, _) => perturb_price(panel, kind),
        (MeasureId::Afv, MarketKind::Stock) => perturb_volume_stock(panel),
        (MeasureId::Afv, MarketKind::Crypto) => perturb_volume_crypto(panel),
        (MeasureId::Afx, _) => perturb_vix(panel),
        (MeasureId::Af3m, _) => perturb_three_indexes(panel),
        (MeasureId::Afn, _) => perturb_normalized_price(panel),
        (MeasureId::Afm, _) => perturb_marketcap(panel),
    }
}

/// Computes satisfaction, the requested perturbations and all antifragility
/// results for one panel, then checks the value bounds.
///
/// A measure for which no period is defined (e.g. afn when every agent has
/// only two periods) is skipped with a warning; a missing index is an error.
pub fn compute_panel(
    panel: &NormalizedPanel,
    kind: MarketKind,
    measures: &[MeasureId],
) -> Result<PanelMeasures> {
    let satisfaction = panel
        .agents
        .par_iter()
        .map(|a| satisfaction(&a.series(Channel::Price, panel.scale)))
        .collect::<Result<Vec<_>>>()?;

    let mut perturbations = Vec::with_capacity(measures.len());
    for &m in measures {
        match perturbation(panel, kind, m) {
            Ok(p) => perturbations.push(p),
            Err(Error::NoPerturbation { measure }) => {
                tracing::warn!(
                    measure,
                    window = %panel.window.label,
                    scale = %panel.scale,
                    "no perturbation defined at any period; measure skipped"
                );
            }
            Err(e) => return Err(e),
        }
    }

    let label = panel.window.label.as_str();
    let results: Vec<AntifragilityResult> = perturbations
        .iter()
        .flat_map(|p| {
            satisfaction
                .par_iter()
                .filter_map(|s| antifragility(s, p, label))
                .collect::<Vec<_>>()
        })
        .collect();

    let out = PanelMeasures {
        scale: panel.scale,
        window: panel.window.label.clone(),
        satisfaction,
        perturbations,
        results,
    };
    check_bounds(&out)?;
    Ok(out)
}

/// S in [-1, 1], P in [0, 1], A(x, i) in [-1, 1] and |A(x)| <= max |A(x, i)|.
pub fn check_bounds(m: &PanelMeasures) -> Result<()> {
    for s in &m.satisfaction {
        if let Some(&(p, v)) = s.values.iter().find(|(_, v)| !(-1.0..=1.0).contains(v)) {
            return Err(Error::Invariant(format!(
                "S({}, {p}) = {v} outside [-1, 1]",
                s.agent_id
            )));
        }
    }
    for ps in &m.perturbations {
        if let Some(&(p, v)) = ps.values.iter().find(|(_, v)| !(0.0..=1.0).contains(v)) {
            return Err(Error::Invariant(format!(
                "P_{}({p}) = {v} outside [0, 1]",
                ps.measure
            )));
        }
    }
    for r in &m.results {
        let max_abs = r
            .instant_values
            .iter()
            .map(|&(_, a)| a.abs())
            .fold(0.0f64, f64::max);
        if max_abs > 1.0 {
            return Err(Error::Invariant(format!(
                "A({}) instant value {max_abs} outside [-1, 1]",
                r.agent_id
            )));
        }
        if r.global.abs() > max_abs || r.n_used == 0 {
            return Err(Error::Invariant(format!(
                "|A({})| = {} exceeds max instant {max_abs}",
                r.agent_id, r.global
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingestion::AnalysisWindow;
    use crate::normalize::PanelIndex;

    fn d(day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2014, 1, day).unwrap()
    }

    fn norm(values: &[f64]) -> NormalizedSeries {
        NormalizedSeries {
            agent_id: "X".into(),
            scale: TimeScale::Daily,
            channel: Channel::Price,
            values: values
                .iter()
                .enumerate()
                .map(|(i, &v)| (d(i as u32 + 1), v))
                .collect(),
        }
    }

    fn vals(s: &[(NaiveDate, f64)]) -> Vec<f64> {
        s.iter().map(|&(_, v)| v).collect()
    }

    fn agent(id: &str, price: &[f64], volume: &[f64]) -> PanelAgent {
        PanelAgent {
            agent_id: id.into(),
            periods: (0..price.len()).map(|i| d(i as u32 + 1)).collect(),
            raw_open: price.to_vec(),
            price: price.to_vec(),
            volume: volume.to_vec(),
            market_cap: volume.iter().map(|&v| Some(v)).collect(),
        }
    }

    fn panel(agents: Vec<PanelAgent>, indexes: Vec<PanelIndex>) -> NormalizedPanel {
        let mut axis: Vec<NaiveDate> = agents.iter().flat_map(|a| a.periods.clone()).collect();
        axis.sort();
        axis.dedup();
        NormalizedPanel {
            scale: TimeScale::Daily,
            window: AnalysisWindow::year(2014),
            period_axis: axis,
            agents,
            indexes,
        }
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn satisfaction_examples() {
        assert_eq!(
            vals(&satisfaction(&norm(&[0.0, 1.0, 0.5])).unwrap().values),
            vec![1.0, -0.5]
        );
        assert_eq!(
            vals(&satisfaction(&norm(&[0.5, 0.5, 0.5])).unwrap().values),
            vec![0.0, 0.0]
        );
        assert!(close(
            &vals(&satisfaction(&norm(&[0.2, 0.2, 0.9])).unwrap().values),
            &[0.0, 0.7]
        ));
        assert!(satisfaction(&norm(&[0.3])).is_err());
    }

    #[test]
    fn stock_afp_single_and_two_agents() {
        let p = panel(vec![agent("A", &[0.0, 1.0, 1.0], &[0.0, 0.0, 0.0])], vec![]);
        assert_eq!(
            vals(&perturb_price(&p, MarketKind::Stock).unwrap().values),
            vec![1.0, 0.0]
        );

        let p = panel(
            vec![
                agent("A", &[0.0, 0.2], &[0.0, 0.0]),
                agent("B", &[1.0, 0.6], &[0.0, 0.0]),
            ],
            vec![],
        );
        let ps = perturb_price(&p, MarketKind::Stock).unwrap();
        assert!((ps.values[0].1 - 0.3).abs() < 1e-15);
    }

    #[test]
    fn stock_afv_examples() {
        // S = 0, no volume change.
        let p = panel(vec![agent("A", &[0.5, 0.5], &[0.3, 0.3])], vec![]);
        assert_eq!(vals(&perturb_volume_stock(&p).unwrap().values), vec![0.0]);
        // S = 1, volume 0 -> 1.
        let p = panel(vec![agent("A", &[0.0, 1.0], &[0.0, 1.0])], vec![]);
        assert_eq!(vals(&perturb_volume_stock(&p).unwrap().values), vec![1.0]);
        // S = 0.5, volume diff -0.5.
        let p = panel(vec![agent("A", &[0.25, 0.75], &[1.0, 0.5])], vec![]);
        assert_eq!(vals(&perturb_volume_stock(&p).unwrap().values), vec![0.0]);
    }

    #[test]
    fn crypto_volume_and_cap() {
        let p = panel(vec![agent("A", &[0.0, 1.0], &[0.5, 0.5])], vec![]);
        assert_eq!(vals(&perturb_volume_crypto(&p).unwrap().values), vec![0.0]);
        assert_eq!(vals(&perturb_marketcap(&p).unwrap().values), vec![0.0]);
        let p = panel(vec![agent("A", &[0.0, 1.0], &[0.0, 1.0])], vec![]);
        assert_eq!(vals(&perturb_volume_crypto(&p).unwrap().values), vec![1.0]);
        assert_eq!(vals(&perturb_marketcap(&p).unwrap().values), vec![1.0]);
    }

    #[test]
    fn cap_gaps_skip_the_agent_there() {
        let mut a = agent("A", &[0.0, 1.0, 0.0, 1.0], &[0.0, 1.0, 0.0, 1.0]);
        a.market_cap = vec![Some(0.0), None, Some(0.0), Some(1.0)];
        let ps = perturb_marketcap(&panel(vec![a], vec![])).unwrap();
        assert_eq!(ps.values, vec![(d(4), 1.0)]);
    }

    #[test]
    fn afn_is_lagged_satisfaction() {
        let p = panel(vec![agent("A", &[0.0, 0.4, 0.4, 1.0], &[0.0; 4])], vec![]);
        let ps = perturb_normalized_price(&p).unwrap();
        assert_eq!(ps.values, vec![(d(3), 0.4), (d(4), 0.0)]);

        let p = panel(vec![agent("A", &[0.5; 4], &[0.0; 4])], vec![]);
        assert_eq!(
            vals(&perturb_normalized_price(&p).unwrap().values),
            vec![0.0, 0.0]
        );

        let p = panel(vec![agent("A", &[0.0, 1.0], &[0.0; 2])], vec![]);
        assert!(matches!(
            perturb_normalized_price(&p),
            Err(Error::NoPerturbation { .. })
        ));
    }

    fn index(id: IndexId, raw: &[f64]) -> PanelIndex {
        PanelIndex {
            index_id: id,
            periods: (0..raw.len()).map(|i| d(i as u32 + 1)).collect(),
            levels: minmax_normalize(raw),
        }
    }

    #[test]
    fn vix_is_a_level() {
        let p = panel(
            vec![agent("A", &[0.0, 1.0, 0.5], &[0.0; 3])],
            vec![index(IndexId::Vix, &[10.0, 30.0, 20.0])],
        );
        assert_eq!(vals(&perturb_vix(&p).unwrap().values), vec![0.0, 1.0, 0.5]);
    }

    #[test]
    fn constant_vix_gives_half_mean_satisfaction() {
        let p = panel(
            vec![agent("A", &[0.0, 1.0, 0.5], &[0.0; 3])],
            vec![index(IndexId::Vix, &[20.0, 20.0, 20.0])],
        );
        let pv = perturb_vix(&p).unwrap();
        let s = satisfaction(&p.agents[0].series(Channel::Price, TimeScale::Daily)).unwrap();
        let r = antifragility(&s, &pv, "2014").unwrap();
        assert_eq!(r.global, 0.5 * 0.25);
    }

    #[test]
    fn missing_vix_is_an_error() {
        let p = panel(vec![agent("A", &[0.0, 1.0], &[0.0; 2])], vec![]);
        assert!(matches!(perturb_vix(&p), Err(Error::MissingIndex { .. })));
    }

    #[test]
    fn three_indexes() {
        let p = panel(
            vec![agent("A", &[0.0, 1.0], &[0.0; 2])],
            vec![
                index(IndexId::Nasdaq, &[5.0, 5.0, 5.0]),
                index(IndexId::Dji, &[7.0, 7.0, 7.0]),
                index(IndexId::Spx, &[9.0, 9.0, 9.0]),
            ],
        );
        assert_eq!(
            vals(&perturb_three_indexes(&p).unwrap().values),
            vec![0.0, 0.0]
        );

        let p = panel(
            vec![agent("A", &[0.0, 1.0], &[0.0; 2])],
            vec![
                index(IndexId::Nasdaq, &[1.0, 2.0]),
                index(IndexId::Dji, &[100.0, 50.0]),
                index(IndexId::Spx, &[3.0, 4.0]),
            ],
        );
        assert_eq!(vals(&perturb_three_indexes(&p).unwrap().values), vec![1.0]);
    }

    #[test]
    fn three_indexes_need_common_periods() {
        let mut spx = index(IndexId::Spx, &[3.0, 4.0, 6.0]);
        spx.periods = vec![d(1), d(2), d(5)];
        let p = panel(
            vec![agent("A", &[0.0, 1.0], &[0.0; 2])],
            vec![
                index(IndexId::Nasdaq, &[1.0, 2.0, 0.0]),
                index(IndexId::Dji, &[1.0, 2.0, 0.0]),
                spx,
            ],
        );
        let ps = perturb_three_indexes(&p).unwrap();
        assert_eq!(ps.values.len(), 1);
        assert_eq!(ps.values[0].0, d(2));
    }

    #[test]
    fn antifragility_examples() {
        let s = SatisfactionSeries {
            agent_id: "X".into(),
            scale: TimeScale::Daily,
            values: vec![(d(2), 1.0), (d(3), -0.5)],
        };
        let p = PerturbationSeries {
            measure: MeasureId::Afp,
            scale: TimeScale::Daily,
            values: vec![(d(2), 0.5), (d(3), 0.5)],
        };
        let r = antifragility(&s, &p, "2014").unwrap();
        assert_eq!(vals(&r.instant_values), vec![0.5, -0.25]);
        assert_eq!(r.global, 0.125);
        assert_eq!(r.n_used, 2);

        let zero = SatisfactionSeries {
            values: vec![(d(2), 0.0), (d(3), 0.0)],
            ..s.clone()
        };
        assert_eq!(antifragility(&zero, &p, "2014").unwrap().global, 0.0);

        let disjoint = PerturbationSeries {
            values: vec![(d(9), 0.5)],
            ..p
        };
        assert!(antifragility(&s, &disjoint, "2014").is_none());
    }

    #[test]
    fn invalid_measure_for_kind() {
        let p = panel(vec![agent("A", &[0.0, 1.0], &[0.0; 2])], vec![]);
        let err = perturbation(&p, MarketKind::Crypto, MeasureId::Afx).unwrap_err();
        assert_eq!(err.to_string(), "measure afx invalid for crypto");
    }

    #[test]
    fn zero_perturbation_zeroes_antifragility_and_sign_follows_s() {
        let p = panel(
            vec![
                agent("A", &[0.0, 1.0, 0.2, 0.2], &[0.1, 0.1, 0.1, 0.1]),
                agent("B", &[1.0, 0.0, 0.5, 0.5], &[0.9, 0.1, 0.5, 0.5]),
            ],
            vec![],
        );
        let m = compute_panel(
            &p,
            MarketKind::Crypto,
            &MeasureId::defaults_for(MarketKind::Crypto),
        )
        .unwrap();
        for r in &m.results {
            let pert = m
                .perturbations
                .iter()
                .find(|x| x.measure == r.measure)
                .unwrap();
            let sat = &m.satisfaction[if r.agent_id == "A" { 0 } else { 1 }];
            for &(period, a) in &r.instant_values {
                let pv = pert.value_at(period).unwrap();
                let sv = sat.value_at(period).unwrap();
                if pv == 0.0 || sv == 0.0 {
                    assert_eq!(a, 0.0);
                } else {
                    assert_eq!(a.signum(), sv.signum());
                }
            }
        }
    }
}
