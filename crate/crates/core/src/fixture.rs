//! A small built-in dataset for smoke tests and golden files: three agents
//! observed on five dates of 2014, plus the four market indexes.
//!
//! `AAA` moves freely and has one extra observation in late 2013, `BBB` has a
//! constant price and `CCC` is first observed on the second date.

use std::fs;
use std::path::Path;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::ingestion::{
    write_agent_csv, AgentSeries, AnalysisWindow, IndexId, IndexSeries, MarketKind, RawObservation,
    TopPerformerList,
};
use crate::pipeline::Dataset;

const DATES: [&str; 5] = [
    "2014-01-06",
    "2014-01-14",
    "2014-02-04",
    "2014-02-19",
    "2014-03-10",
];

// (date, open, volume, market_cap)
const AAA: [(&str, f64, f64, f64); 6] = [
    ("2013-12-16", 9.0, 70.0, 900.0),
    ("2014-01-06", 10.0, 100.0, 1000.0),
    ("2014-01-14", 12.0, 80.0, 1250.0),
    ("2014-02-04", 11.0, 120.0, 1100.0),
    ("2014-02-19", 15.0, 90.0, 1480.0),
    ("2014-03-10", 14.0, 150.0, 1400.0),
];
const BBB: [(&str, f64, f64, f64); 5] = [
    ("2014-01-06", 7.0, 50.0, 700.0),
    ("2014-01-14", 7.0, 60.0, 700.0),
    ("2014-02-04", 7.0, 55.0, 700.0),
    ("2014-02-19", 7.0, 70.0, 700.0),
    ("2014-03-10", 7.0, 40.0, 700.0),
];
const CCC: [(&str, f64, f64, f64); 4] = [
    ("2014-01-14", 3.0, 10.0, 30.0),
    ("2014-02-04", 2.5, 30.0, 26.0),
    ("2014-02-19", 2.8, 20.0, 29.0),
    ("2014-03-10", 2.2, 25.0, 21.0),
];

const VIX: [f64; 5] = [14.0, 18.0, 13.0, 21.0, 16.0];
const NASDAQ: [f64; 5] = [4100.0, 4180.0, 4050.0, 4250.0, 4300.0];
const DJI: [f64; 5] = [16400.0, 16300.0, 15900.0, 16200.0, 16500.0];
const SPX: [f64; 5] = [1830.0, 1845.0, 1790.0, 1850.0, 1870.0];

pub const TOP_PERFORMERS_JSON: &str = "{\n  \"2014\": [\"AAA\"]\n}\n";

fn date(s: &str) -> NaiveDate {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").expect("fixture date")
}

fn agent(id: &str, rows: &[(&str, f64, f64, f64)], kind: MarketKind) -> AgentSeries {
    let obs = rows
        .iter()
        .map(|&(d, open, volume, cap)| RawObservation {
            date: date(d),
            open,
            volume,
            market_cap: (kind == MarketKind::Crypto).then_some(cap),
        })
        .collect();
    AgentSeries::new(id, kind, obs).expect("fixture agent is valid")
}

pub fn agents(kind: MarketKind) -> Vec<AgentSeries> {
    vec![
        agent("AAA", &AAA, kind),
        agent("BBB", &BBB, kind),
        agent("CCC", &CCC, kind),
    ]
}

pub fn indexes() -> Vec<IndexSeries> {
    [
        (IndexId::Vix, VIX),
        (IndexId::Nasdaq, NASDAQ),
        (IndexId::Dji, DJI),
        (IndexId::Spx, SPX),
    ]
    .into_iter()
    .map(|(index_id, levels)| IndexSeries {
        index_id,
        values: DATES.iter().map(|d| date(d)).zip(levels).collect(),
    })
    .collect()
}

pub fn top_lists() -> Vec<TopPerformerList> {
    vec![TopPerformerList {
        year: 2014,
        agent_ids: ["AAA".to_string()].into_iter().collect(),
        source_label: "top_performers.json".into(),
    }]
}

pub fn window() -> AnalysisWindow {
    AnalysisWindow::year(2014)
}

pub fn dataset(kind: MarketKind) -> Dataset {
    let indexes = if kind == MarketKind::Stock {
        indexes()
    } else {
        Vec::new()
    };
    Dataset::new(kind, agents(kind), indexes, top_lists()).expect("fixture dataset is valid")
}

fn index_csv(series: &IndexSeries) -> String {
    let mut out = String::from("date,level\n");
    for (d, l) in &series.values {
        out.push_str(&format!("{},{}\n", d.format("%Y-%m-%d"), l));
    }
    out
}

fn config_toml(kind: MarketKind) -> String {
    let mut out = format!("market_kind = \"{kind}\"\ndata_dir = \"data\"\n");
    if kind == MarketKind::Stock {
        out.push_str("index_dir = \"indexes\"\n");
    }
    out.push_str(
        "top_performers = \"top_performers.json\"\nwindows = [\"2014\"]\nscales = [0, 1, 2]\noutput_dir = \"out\"\nn_hist_bins = 50\nworkers = 0\n",
    );
    out
}

fn write(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, content).map_err(|e| Error::io(path, e))
}

/// Writes `stock/` and `crypto/` fixture trees under `dir`, each with a
/// ready-to-run `config.toml`.
pub fn write_fixture(dir: &Path) -> Result<()> {
    for kind in [MarketKind::Stock, MarketKind::Crypto] {
        let root = dir.join(kind.as_str());
        for a in agents(kind) {
            write(
                &root.join("data").join(format!("{}.csv", a.agent_id)),
                &write_agent_csv(&a),
            )?;
        }
        if kind == MarketKind::Stock {
            for i in indexes() {
                write(
                    &root.join("indexes").join(format!("{}.csv", i.index_id)),
                    &index_csv(&i),
                )?;
            }
        }
        write(&root.join("top_performers.json"), TOP_PERFORMERS_JSON)?;
        write(&root.join("config.toml"), &config_toml(kind))?;
    }
    Ok(())
}
