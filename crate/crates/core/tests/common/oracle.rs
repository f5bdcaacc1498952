//! Brute-force single-threaded reference for satisfaction, perturbation and
//! antifragility. Shares no code with the library beyond its input types:
//! periods are integer keys, sums are plain left folds, and every measure is
//! written out from its definition.

use std::collections::BTreeMap;

use antifragility_core::{AnalysisWindow, Dataset, IndexId, MarketKind};
use chrono::{Datelike, NaiveDate};

pub type Key = i64;

pub fn key(date: NaiveDate, scale: u8) -> Key {
    match scale {
        0 => date.num_days_from_ce() as i64,
        1 => {
            let w = date.iso_week();
            w.year() as i64 * 100 + w.week() as i64
        }
        2 => date.year() as i64 * 100 + date.month() as i64,
        _ => unreachable!("scale code"),
    }
}

#[derive(Debug, Default)]
pub struct Reference {
    pub satisfaction: BTreeMap<String, BTreeMap<Key, f64>>,
    pub perturbation: BTreeMap<&'static str, BTreeMap<Key, f64>>,
    /// (agent, measure) -> instant values by key.
    pub instants: BTreeMap<(String, &'static str), BTreeMap<Key, f64>>,
    /// (agent, measure) -> (global, n_used).
    pub global: BTreeMap<(String, &'static str), (f64, usize)>,
}

struct Bucketed {
    keys: Vec<Key>,
    raw_open: Vec<f64>,
    price: Vec<f64>,
    volume: Vec<f64>,
    cap: Vec<Option<f64>>,
}

fn normalize(xs: &[f64]) -> Vec<f64> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in xs {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    xs.iter()
        .map(|&x| if hi > lo { (x - lo) / (hi - lo) } else { 0.5 })
        .collect()
}

fn normalize_opt(xs: &[Option<f64>]) -> Vec<Option<f64>> {
    let present: Vec<f64> = xs.iter().flatten().copied().collect();
    let scaled = normalize(&present);
    let mut it = scaled.into_iter();
    xs.iter().map(|x| x.and_then(|_| it.next())).collect()
}

fn mean(xs: &[f64]) -> f64 {
    let mut total = 0.0;
    for x in xs {
        total += x;
    }
    total / xs.len() as f64
}

/// Mean over the agents contributing at each key.
fn system(contribs: &[BTreeMap<Key, f64>]) -> BTreeMap<Key, f64> {
    let mut acc: BTreeMap<Key, Vec<f64>> = BTreeMap::new();
    for c in contribs {
        for (&k, &v) in c {
            acc.entry(k).or_default().push(v);
        }
    }
    acc.into_iter().map(|(k, vs)| (k, mean(&vs))).collect()
}

fn diffs(keys: &[Key], xs: &[f64]) -> BTreeMap<Key, f64> {
    (1..xs.len())
        .map(|j| (keys[j], xs[j] - xs[j - 1]))
        .collect()
}

fn index_levels(
    dataset: &Dataset,
    id: IndexId,
    window: &AnalysisWindow,
    scale: u8,
) -> Option<(Vec<Key>, Vec<f64>)> {
    let series = dataset.indexes.iter().find(|s| s.index_id == id)?;
    let mut keys = Vec::new();
    let mut levels = Vec::new();
    for &(d, level) in &series.values {
        if d < window.start || d > window.end {
            continue;
        }
        let k = key(d, scale);
        if keys.last() != Some(&k) {
            keys.push(k);
            levels.push(level);
        }
    }
    if keys.is_empty() {
        return None;
    }
    Some((keys, normalize(&levels)))
}

pub fn evaluate(dataset: &Dataset, window: &AnalysisWindow, scale: u8) -> Reference {
    let mut agents: BTreeMap<String, Bucketed> = BTreeMap::new();
    for a in &dataset.agents {
        let obs: Vec<_> = a
            .observations
            .iter()
            .filter(|o| o.date >= window.start && o.date <= window.end)
            .collect();
        if obs.len() < 2 {
            continue;
        }
        let mut keys: Vec<Key> = Vec::new();
        let mut opens = Vec::new();
        let mut vols: Vec<f64> = Vec::new();
        let mut caps = Vec::new();
        for o in obs {
            let k = key(o.date, scale);
            if keys.last() == Some(&k) {
                *vols.last_mut().unwrap() += o.volume;
            } else {
                keys.push(k);
                opens.push(o.open);
                vols.push(o.volume);
                caps.push(o.market_cap);
            }
        }
        if keys.len() < 2 {
            continue;
        }
        agents.insert(
            a.agent_id.clone(),
            Bucketed {
                price: normalize(&opens),
                volume: normalize(&vols),
                cap: normalize_opt(&caps),
                raw_open: opens,
                keys,
            },
        );
    }

    let mut out = Reference::default();
    for (id, b) in &agents {
        out.satisfaction
            .insert(id.clone(), diffs(&b.keys, &b.price));
    }

    let per_agent =
        |f: &dyn Fn(&String, &Bucketed) -> BTreeMap<Key, f64>| -> Vec<BTreeMap<Key, f64>> {
            agents.iter().map(|(id, b)| f(id, b)).collect()
        };

    let mut p: BTreeMap<&'static str, BTreeMap<Key, f64>> = BTreeMap::new();
    match dataset.market_kind {
        MarketKind::Stock => {
            p.insert(
                "afp",
                system(&per_agent(&|_, b| {
                    diffs(&b.keys, &b.price)
                        .into_iter()
                        .map(|(k, d)| (k, d.abs()))
                        .collect()
                })),
            );
            p.insert(
                "afv",
                system(&per_agent(&|id, b| {
                    let s = &out.satisfaction[id];
                    diffs(&b.keys, &b.volume)
                        .into_iter()
                        .map(|(k, dv)| (k, (s[&k] + dv).abs() / 2.0))
                        .collect()
                })),
            );
            if let Some((keys, levels)) = index_levels(dataset, IndexId::Vix, window, scale) {
                p.insert("afx", keys.into_iter().zip(levels).collect());
            }
            let three: Vec<BTreeMap<Key, f64>> = [IndexId::Nasdaq, IndexId::Dji, IndexId::Spx]
                .iter()
                .filter_map(|&id| index_levels(dataset, id, window, scale))
                .map(|(keys, levels)| {
                    diffs(&keys, &levels)
                        .into_iter()
                        .map(|(k, d)| (k, d.abs()))
                        .collect()
                })
                .collect();
            if three.len() == 3 {
                let combined: BTreeMap<Key, f64> = three[0]
                    .iter()
                    .filter(|(k, _)| three[1].contains_key(k) && three[2].contains_key(k))
                    .map(|(&k, &a)| (k, (a + three[1][&k] + three[2][&k]) / 3.0))
                    .collect();
                p.insert("af3m", combined);
            }
        }
        MarketKind::Crypto => {
            let raw = system(&per_agent(&|_, b| {
                diffs(&b.keys, &b.raw_open)
                    .into_iter()
                    .map(|(k, d)| (k, d.abs()))
                    .collect()
            }));
            let keys: Vec<Key> = raw.keys().copied().collect();
            let vals: Vec<f64> = raw.values().copied().collect();
            p.insert("afp", keys.into_iter().zip(normalize(&vals)).collect());
            p.insert(
                "afv",
                system(&per_agent(&|_, b| {
                    diffs(&b.keys, &b.volume)
                        .into_iter()
                        .map(|(k, d)| (k, d.abs()))
                        .collect()
                })),
            );
            p.insert(
                "afn",
                system(&per_agent(&|_, b| {
                    (2..b.keys.len())
                        .map(|j| (b.keys[j], (b.price[j - 1] - b.price[j - 2]).abs()))
                        .collect()
                })),
            );
            p.insert(
                "afm",
                system(&per_agent(&|_, b| {
                    (1..b.keys.len())
                        .filter_map(|j| Some((b.keys[j], (b.cap[j]? - b.cap[j - 1]?).abs())))
                        .collect()
                })),
            );
        }
    }
    p.retain(|_, series| !series.is_empty());

    for (&m, series) in &p {
        for (id, s) in &out.satisfaction {
            let inst: BTreeMap<Key, f64> = s
                .iter()
                .filter_map(|(k, sv)| series.get(k).map(|pv| (*k, sv * pv)))
                .collect();
            if inst.is_empty() {
                continue;
            }
            let vals: Vec<f64> = inst.values().copied().collect();
            out.global
                .insert((id.clone(), m), (mean(&vals), vals.len()));
            out.instants.insert((id.clone(), m), inst);
        }
    }
    out.perturbation = p;
    out
}
