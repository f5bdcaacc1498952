//! Seeded random-walk datasets for property tests and benchmarks.

use chrono::{Datelike, Days, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ingestion::{AgentSeries, IndexId, IndexSeries, MarketKind, RawObservation};
use crate::pipeline::Dataset;

#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub market_kind: MarketKind,
    pub n_agents: usize,
    /// Observations per full-lived agent.
    pub n_periods: usize,
    pub year: i32,
    /// Spread observations over the whole year instead of consecutive weekdays.
    pub sparse_dates: bool,
    pub seed: u64,
}

/// Calendar dates of the full sample: `n` consecutive weekdays from the first
/// weekday of `year`, or `n` random distinct days of the year when sparse.
fn sample_dates(rng: &mut ChaCha8Rng, year: i32, n: usize, sparse: bool) -> Vec<NaiveDate> {
    let jan1 = NaiveDate::from_ymd_opt(year, 1, 1).expect("valid year");
    if sparse {
        let days_in_year = if NaiveDate::from_ymd_opt(year, 12, 31).unwrap().ordinal() == 366 {
            366
        } else {
            365
        };
        let mut offsets: Vec<u64> =
            rand::seq::index::sample(rng, days_in_year, n.min(days_in_year))
                .into_iter()
                .map(|i| i as u64)
                .collect();
        offsets.sort_unstable();
        return offsets.into_iter().map(|o| jan1 + Days::new(o)).collect();
    }
    let mut out = Vec::with_capacity(n);
    let mut d = jan1;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}

fn random_walk(rng: &mut ChaCha8Rng, n: usize, start: f64, vol: f64) -> Vec<f64> {
    let mut level = start;
    (0..n)
        .map(|_| {
            let v = level;
            level *= (vol * (rng.random::<f64>() - 0.5) * 2.0).exp();
            v
        })
        .collect()
}

/// Builds a dataset of random-walk agents. Roughly one agent in twelve has a
/// constant price, one in six starts late, one in six ends early, and one in
/// five skips random observations. Crypto agents occasionally miss a cap value.
pub fn dataset(spec: &SyntheticSpec) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let dates = sample_dates(&mut rng, spec.year, spec.n_periods, spec.sparse_dates);
    let n = dates.len();
    let mut agents = Vec::with_capacity(spec.n_agents);
    for k in 0..spec.n_agents {
        let start = if rng.random_bool(1.0 / 6.0) {
            rng.random_range(0..n)
        } else {
            0
        };
        let end = if rng.random_bool(1.0 / 6.0) {
            rng.random_range(start..=n)
        } else {
            n
        };
        let constant = rng.random_bool(1.0 / 12.0);
        let gappy = rng.random_bool(0.2);
        let len = end - start;
        let base = 10f64.powf(rng.random_range(-2.0..4.0));
        let opens = if constant {
            vec![base; len]
        } else {
            random_walk(&mut rng, len, base, 0.05)
        };
        let base_volume = 10f64.powf(rng.random_range(2.0..7.0));
        let volumes = random_walk(&mut rng, len, base_volume, 0.4);
        let supply = 10f64.powf(rng.random_range(5.0..9.0));
        let mut obs = Vec::with_capacity(len);
        for j in 0..len {
            if gappy && rng.random_bool(0.25) {
                continue;
            }
            let market_cap = (spec.market_kind == MarketKind::Crypto && !rng.random_bool(0.02))
                .then(|| opens[j] * supply * (1.0 + 0.01 * (rng.random::<f64>() - 0.5)));
            obs.push(RawObservation {
                date: dates[start + j],
                open: opens[j],
                volume: volumes[j].round(),
                market_cap,
            });
        }
        if obs.is_empty() {
            obs.push(RawObservation {
                date: dates[start.min(n - 1)],
                open: base,
                volume: 1.0,
                market_cap: (spec.market_kind == MarketKind::Crypto).then_some(base),
            });
        }
        agents.push(
            AgentSeries::new(format!("S{k:05}"), spec.market_kind, obs)
                .expect("generated agent is valid"),
        );
    }
    let indexes = if spec.market_kind == MarketKind::Stock {
        [
            (IndexId::Vix, 15.0, 0.1),
            (IndexId::Nasdaq, 4000.0, 0.02),
            (IndexId::Dji, 16000.0, 0.02),
            (IndexId::Spx, 1800.0, 0.02),
        ]
        .into_iter()
        .map(|(index_id, start, vol)| {
            let levels = random_walk(&mut rng, n, start, vol);
            let values = dates
                .iter()
                .copied()
                .zip(levels)
                .filter(|_| !rng.random_bool(0.03))
                .collect();
            IndexSeries { index_id, values }
        })
        .collect()
    } else {
        Vec::new()
    };
    Dataset::new(spec.market_kind, agents, indexes, Vec::new()).expect("generated dataset is valid")
}
