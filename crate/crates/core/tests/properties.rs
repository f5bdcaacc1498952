use std::collections::BTreeMap;
use std::path::Path;

use antifragility_core::ingestion::{parse_agent_csv, write_agent_csv};
use antifragility_core::measures::{compute_panel, system_mean};
use antifragility_core::normalize::build_panel;
use antifragility_core::pipeline::render;
use antifragility_core::synthetic::{self, SyntheticSpec};
use antifragility_core::{
    analyze, AgentSeries, AnalysisOptions, AnalysisWindow, Dataset, MarketKind, MeasureId,
    RawObservation, TimeScale,
};
use chrono::{Days, NaiveDate};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn kind_strategy() -> impl Strategy<Value = MarketKind> {
    prop_oneof![Just(MarketKind::Stock), Just(MarketKind::Crypto)]
}

fn dataset(
    kind: MarketKind,
    n_agents: usize,
    n_periods: usize,
    sparse: bool,
    seed: u64,
) -> Dataset {
    synthetic::dataset(&SyntheticSpec {
        market_kind: kind,
        n_agents,
        n_periods,
        year: 2015,
        sparse_dates: sparse,
        seed,
    })
}

fn naive_reverse_mean(values: &[f64]) -> f64 {
    let mut total = 0.0;
    for v in values.iter().rev() {
        total += v;
    }
    total / values.len() as f64
}

/// Per-agent contributions for the measures that average over agents, read
/// back off the panel.
fn contributions(
    panel: &antifragility_core::NormalizedPanel,
    kind: MarketKind,
    measure: MeasureId,
) -> Vec<Vec<(NaiveDate, f64)>> {
    panel
        .agents
        .iter()
        .map(|a| {
            let n = a.periods.len();
            match (kind, measure) {
                (MarketKind::Stock, MeasureId::Afp) => (1..n)
                    .map(|j| (a.periods[j], (a.price[j] - a.price[j - 1]).abs()))
                    .collect(),
                (MarketKind::Stock, MeasureId::Afv) => (1..n)
                    .map(|j| {
                        let s = a.price[j] - a.price[j - 1];
                        let dv = a.volume[j] - a.volume[j - 1];
                        (a.periods[j], (s + dv).abs() / 2.0)
                    })
                    .collect(),
                (MarketKind::Crypto, MeasureId::Afv) => (1..n)
                    .map(|j| (a.periods[j], (a.volume[j] - a.volume[j - 1]).abs()))
                    .collect(),
                (MarketKind::Crypto, MeasureId::Afn) => (2..n)
                    .map(|j| (a.periods[j], (a.price[j - 1] - a.price[j - 2]).abs()))
                    .collect(),
                (MarketKind::Crypto, MeasureId::Afm) => (1..n)
                    .filter_map(|j| {
                        Some((
                            a.periods[j],
                            (a.market_cap[j]? - a.market_cap[j - 1]?).abs(),
                        ))
                    })
                    .collect(),
                _ => unreachable!("not an agent-averaged measure"),
            }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn system_value_is_mean_of_defined_contributions(
        kind in kind_strategy(),
        n_agents in 1usize..40,
        n_periods in 2usize..60,
        sparse in any::<bool>(),
        seed in any::<u64>(),
        scale in 0u8..3,
    ) {
        let ds = dataset(kind, n_agents, n_periods, sparse, seed);
        let scale = TimeScale::from_code(scale).unwrap();
        let Ok(panel) = build_panel(&ds.agents, &ds.indexes, &AnalysisWindow::year(2015), scale) else {
            return Ok(());
        };
        let measures = match kind {
            MarketKind::Stock => vec![MeasureId::Afp, MeasureId::Afv],
            MarketKind::Crypto => vec![MeasureId::Afv, MeasureId::Afn, MeasureId::Afm],
        };
        let computed = compute_panel(&panel, kind, &measures).unwrap();
        for m in measures {
            let mut by_period: BTreeMap<NaiveDate, Vec<f64>> = BTreeMap::new();
            for agent in contributions(&panel, kind, m) {
                for (p, v) in agent {
                    by_period.entry(p).or_default().push(v);
                }
            }
            let Some(series) = computed.perturbations.iter().find(|p| p.measure == m) else {
                prop_assert!(by_period.is_empty());
                continue;
            };
            prop_assert_eq!(series.values.len(), by_period.len());
            for (&(p, v), (q, vs)) in series.values.iter().zip(&by_period) {
                prop_assert_eq!(p, *q);
                prop_assert!((v - naive_reverse_mean(vs)).abs() <= 1e-12, "{} at {}: {} vs {}", m, p, v, naive_reverse_mean(vs));
            }
        }
    }

    #[test]
    fn system_mean_ignores_contribution_order(
        raw in prop::collection::vec(prop::collection::vec((0u64..30, 0.0f64..1.0), 0..30), 1..20),
        seed in any::<u64>(),
    ) {
        let base = NaiveDate::from_ymd_opt(2016, 1, 1).unwrap();
        let contribs: Vec<Vec<(NaiveDate, f64)>> = raw
            .iter()
            .map(|agent| {
                let mut seen = BTreeMap::new();
                for &(d, v) in agent {
                    seen.insert(base + Days::new(d), v);
                }
                seen.into_iter().collect()
            })
            .collect();
        let mut shuffled = contribs.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let a = system_mean(&contribs, MeasureId::Afv, TimeScale::Daily);
        let b = system_mean(&shuffled, MeasureId::Afv, TimeScale::Daily);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.values.len(), b.values.len());
                for (x, y) in a.values.iter().zip(&b.values) {
                    prop_assert_eq!(x.0, y.0);
                    prop_assert!((x.1 - y.1).abs() <= 1e-12);
                    prop_assert!((0.0..=1.0).contains(&x.1));
                }
            }
            (Err(_), Err(_)) => prop_assert!(contribs.iter().all(Vec::is_empty)),
            _ => prop_assert!(false, "order changed definedness"),
        }
    }

    #[test]
    fn outputs_ignore_agent_order(
        kind in kind_strategy(),
        n_agents in 2usize..25,
        n_periods in 5usize..50,
        seed in any::<u64>(),
        shuffle_seed in any::<u64>(),
    ) {
        let ds = dataset(kind, n_agents, n_periods, true, seed);
        let opts = AnalysisOptions::new(kind, vec![AnalysisWindow::year(2015)]);
        let Ok(base) = analyze(&ds, &opts) else { return Ok(()); };
        let mut agents = ds.agents.clone();
        agents.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle_seed));
        let shuffled = Dataset::new(kind, agents, ds.indexes.clone(), Vec::new()).unwrap();
        let other = analyze(&shuffled, &opts).unwrap();
        prop_assert_eq!(render(&base), render(&other));
    }

    #[test]
    fn agent_csv_round_trips(
        kind in kind_strategy(),
        rows in prop::collection::vec(
            (1u64..20, 0.0f64..1e6, 0.0f64..1e12, prop::option::of(0.0f64..1e12)),
            1..60,
        ),
    ) {
        let mut date = NaiveDate::from_ymd_opt(2013, 3, 1).unwrap();
        let observations: Vec<RawObservation> = rows
            .iter()
            .map(|&(gap, open, volume, cap)| {
                date = date + Days::new(gap);
                RawObservation {
                    date,
                    open,
                    volume,
                    market_cap: if kind == MarketKind::Crypto { cap } else { None },
                }
            })
            .collect();
        let series = AgentSeries::new("RT", kind, observations).unwrap();
        let text = write_agent_csv(&series);
        let back = parse_agent_csv(text.as_bytes(), Path::new("RT.csv"), "RT", kind).unwrap();
        prop_assert_eq!(back, series);
    }
}
