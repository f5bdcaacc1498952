//! Loading of agent histories, market indexes and top-performer lists, and
//! slicing them into analysis windows.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use rayon::prelude::*;
use serde::de::{MapAccess, Visitor};
use serde::Deserializer;

use crate::error::{Error, Result};

/// Which market an agent belongs to. Stocks carry no market capitalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MarketKind {
    Stock,
    Crypto,
}

impl MarketKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MarketKind::Stock => "stock",
            MarketKind::Crypto => "crypto",
        }
    }
}

impl fmt::Display for MarketKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MarketKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "stock" | "stocks" => Ok(MarketKind::Stock),
            "crypto" | "cryptocurrency" => Ok(MarketKind::Crypto),
            other => Err(format!(
                "unknown market_kind `{other}` (expected stock or crypto)"
            )),
        }
    }
}

/// One row of an agent's history: open price, traded volume and, for
/// cryptocurrencies, market capitalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawObservation {
    pub date: NaiveDate,
    pub open: f64,
    pub volume: f64,
    pub market_cap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentSeries {
    pub agent_id: String,
    pub market_kind: MarketKind,
    /// Strictly increasing by date, never empty.
    pub observations: Vec<RawObservation>,
}

impl AgentSeries {
    /// Builds a series after checking the ordering, sign and market-kind invariants.
    pub fn new(
        agent_id: impl Into<String>,
        market_kind: MarketKind,
        mut observations: Vec<RawObservation>,
    ) -> Result<Self> {
        let agent_id = agent_id.into();
        let path = PathBuf::from(&agent_id);
        if observations.is_empty() {
            return Err(Error::Empty { path });
        }
        observations.sort_by_key(|o| o.date);
        for pair in observations.windows(2) {
            if pair[0].date == pair[1].date {
                return Err(Error::DuplicateDate {
                    path,
                    date: pair[0].date,
                });
            }
        }
        for o in &observations {
            let bad = !(o.open.is_finite() && o.open >= 0.0)
                || !(o.volume.is_finite() && o.volume >= 0.0)
                || o.market_cap.is_some_and(|m| !(m.is_finite() && m >= 0.0));
            if bad {
                return Err(Error::Invariant(format!(
                    "agent {agent_id}: negative or non-finite value on {}",
                    o.date
                )));
            }
            if market_kind == MarketKind::Stock && o.market_cap.is_some() {
                return Err(Error::MarketCapForStock { path });
            }
        }
        Ok(AgentSeries {
            agent_id,
            market_kind,
            observations,
        })
    }

    pub fn first_date(&self) -> NaiveDate {
        self.observations[0].date
    }

    pub fn last_date(&self) -> NaiveDate {
        self.observations[self.observations.len() - 1].date
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IndexId {
    Vix,
    Nasdaq,
    Dji,
    Spx,
}

impl IndexId {
    pub const ALL: [IndexId; 4] = [IndexId::Vix, IndexId::Nasdaq, IndexId::Dji, IndexId::Spx];

    pub fn as_str(self) -> &'static str {
        match self {
            IndexId::Vix => "VIX",
            IndexId::Nasdaq => "NASDAQ",
            IndexId::Dji => "DJI",
            IndexId::Spx => "SPX",
        }
    }
}

impl fmt::Display for IndexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IndexId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IndexId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::UnknownIndex(s.to_string()))
    }
}

/// Daily levels of one market index.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexSeries {
    pub index_id: IndexId,
    pub values: Vec<(NaiveDate, f64)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopPerformerList {
    pub year: i32,
    pub agent_ids: BTreeSet<String>,
    pub source_label: String,
}

/// Inclusive calendar bounds of one analysis, usually one calendar year.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AnalysisWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub label: String,
}

impl AnalysisWindow {
    pub fn new(start: NaiveDate, end: NaiveDate, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if start > end {
            return Err(Error::Config(vec![format!(
                "window {label}: start {start} is after end {end}"
            )]));
        }
        Ok(AnalysisWindow { start, end, label })
    }

    /// The whole calendar year, labelled by the year number.
    pub fn year(year: i32) -> Self {
        AnalysisWindow {
            start: NaiveDate::from_ymd_opt(year, 1, 1).expect("valid year"),
            end: NaiveDate::from_ymd_opt(year, 12, 31).expect("valid year"),
            label: year.to_string(),
        }
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }

    pub fn overlaps(&self, other: &AnalysisWindow) -> bool {
        self.start <= other.end && other.start <= self.end
    }

    /// Calendar year used to pick the matching top-performer list.
    pub fn year_key(&self) -> i32 {
        self.start.year()
    }
}

impl FromStr for AnalysisWindow {
    type Err = String;

    /// Accepts `YYYY` or `YYYY-MM-DD..YYYY-MM-DD`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some((a, b)) = s.split_once("..") {
            let start = parse_date(a.trim()).map_err(|e| format!("window `{s}`: {e}"))?;
            let end = parse_date(b.trim()).map_err(|e| format!("window `{s}`: {e}"))?;
            AnalysisWindow::new(start, end, s).map_err(|e| e.to_string())
        } else {
            let year: i32 = s
                .parse()
                .map_err(|_| format!("window `{s}`: expected YYYY or YYYY-MM-DD..YYYY-MM-DD"))?;
            if NaiveDate::from_ymd_opt(year, 1, 1).is_none() {
                return Err(format!("window `{s}`: year out of range"));
            }
            Ok(AnalysisWindow::year(year))
        }
    }
}

fn parse_date(s: &str) -> Result<NaiveDate, String> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|e| format!("bad date `{s}`: {e}"))
}

fn parse_non_negative(raw: &str) -> Result<f64, String> {
    let v: f64 = raw
        .trim()
        .parse()
        .map_err(|_| format!("not a number: `{raw}`"))?;
    if !v.is_finite() {
        return Err(format!("not finite: `{raw}`"));
    }
    if v < 0.0 {
        return Err(format!("negative value {v}"));
    }
    Ok(v)
}

fn csv_reader(bytes: &[u8]) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(bytes)
}

fn malformed(path: &Path, line: u64, field: &str, message: impl Into<String>) -> Error {
    Error::Malformed {
        path: path.to_path_buf(),
        line,
        field: field.to_string(),
        message: message.into(),
    }
}

/// Parses an agent CSV (`date,open,volume[,market_cap]`). The agent id is the
/// file stem.
pub fn load_agent_series(path: &Path, market_kind: MarketKind) -> Result<AgentSeries> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let agent_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_agent_csv(&bytes, path, &agent_id, market_kind)
}

/// Parses agent CSV content already in memory. `path` is only used in diagnostics.
pub fn parse_agent_csv(
    bytes: &[u8],
    path: &Path,
    agent_id: &str,
    market_kind: MarketKind,
) -> Result<AgentSeries> {
    let mut reader = csv_reader(bytes);
    let headers = reader
        .headers()
        .map_err(|e| malformed(path, 1, "header", e.to_string()))?
        .clone();
    let cols: Vec<&str> = headers.iter().collect();
    let has_cap = match cols.as_slice() {
        [] | [""] => return Err(Error::Empty { path: path.into() }),
        ["date", "open", "volume"] => false,
        ["date", "open", "volume", "market_cap"] => true,
        _ => {
            return Err(malformed(
                path,
                1,
                "header",
                format!(
                    "expected `date,open,volume[,market_cap]`, found `{}`",
                    cols.join(",")
                ),
            ))
        }
    };
    if has_cap && market_kind == MarketKind::Stock {
        return Err(Error::MarketCapForStock { path: path.into() });
    }

    let mut observations = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            malformed(path, line, "row", e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize, name: &str| {
            record
                .get(i)
                .ok_or_else(|| malformed(path, line, name, "missing"))
        };
        let date = parse_date(field(0, "date")?).map_err(|m| malformed(path, line, "date", m))?;
        let open =
            parse_non_negative(field(1, "open")?).map_err(|m| malformed(path, line, "open", m))?;
        let volume = parse_non_negative(field(2, "volume")?)
            .map_err(|m| malformed(path, line, "volume", m))?;
        let market_cap = if has_cap {
            let raw = field(3, "market_cap")?;
            if raw.is_empty() {
                None
            } else {
                Some(parse_non_negative(raw).map_err(|m| malformed(path, line, "market_cap", m))?)
            }
        } else {
            None
        };
        observations.push(RawObservation {
            date,
            open,
            volume,
            market_cap,
        });
    }
    if observations.is_empty() {
        return Err(Error::Empty { path: path.into() });
    }
    observations.sort_by_key(|o| o.date);
    if let Some(pair) = observations.windows(2).find(|p| p[0].date == p[1].date) {
        return Err(Error::DuplicateDate {
            path: path.into(),
            date: pair[0].date,
        });
    }
    Ok(AgentSeries {
        agent_id: agent_id.to_string(),
        market_kind,
        observations,
    })
}

/// Serializes a series back into the agent CSV format. Crypto series always
/// carry the `market_cap` column.
pub fn write_agent_csv(series: &AgentSeries) -> String {
    let mut out = String::new();
    let with_cap = series.market_kind == MarketKind::Crypto;
    out.push_str(if with_cap {
        "date,open,volume,market_cap\n"
    } else {
        "date,open,volume\n"
    });
    for o in &series.observations {
        out.push_str(&format!(
            "{},{},{}",
            o.date.format("%Y-%m-%d"),
            o.open,
            o.volume
        ));
        if with_cap {
            out.push(',');
            if let Some(m) = o.market_cap {
                out.push_str(&m.to_string());
            }
        }
        out.push('\n');
    }
    out
}

/// Parses an index CSV (`date,level`); dates must strictly increase.
pub fn load_index_series(path: &Path, index_id: &str) -> Result<IndexSeries> {
    let index_id: IndexId = index_id.parse()?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_index_csv(&bytes, path, index_id)
}

pub fn parse_index_csv(bytes: &[u8], path: &Path, index_id: IndexId) -> Result<IndexSeries> {
    let mut reader = csv_reader(bytes);
    let headers = reader
        .headers()
        .map_err(|e| malformed(path, 1, "header", e.to_string()))?
        .clone();
    let cols: Vec<&str> = headers.iter().collect();
    match cols.as_slice() {
        [] | [""] => return Err(Error::Empty { path: path.into() }),
        ["date", "level"] => {}
        _ => {
            return Err(malformed(
                path,
                1,
                "header",
                format!("expected `date,level`, found `{}`", cols.join(",")),
            ))
        }
    }
    let mut values: Vec<(NaiveDate, f64)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            malformed(path, line, "row", e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let date = parse_date(record.get(0).unwrap_or(""))
            .map_err(|m| malformed(path, line, "date", m))?;
        let level = parse_non_negative(record.get(1).unwrap_or(""))
            .map_err(|m| malformed(path, line, "level", m))?;
        if let Some(&(prev, _)) = values.last() {
            if date == prev {
                return Err(Error::DuplicateDate {
                    path: path.into(),
                    date,
                });
            }
            if date < prev {
                return Err(Error::OutOfOrder {
                    path: path.into(),
                    date,
                });
            }
        }
        values.push((date, level));
    }
    if values.is_empty() {
        return Err(Error::Empty { path: path.into() });
    }
    Ok(IndexSeries { index_id, values })
}

/// Collects `(year, ids)` entries in file order so that repeated year keys
/// survive deserialization and can be unioned.
struct YearEntries(Vec<(String, Vec<String>)>);

impl<'de> serde::Deserialize<'de> for YearEntries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct EntriesVisitor;

        impl<'de> Visitor<'de> for EntriesVisitor {
            type Value = YearEntries;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object mapping years to lists of agent ids")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<YearEntries, A::Error> {
                let mut entries = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, Vec<String>>()? {
                    entries.push((k, v));
                }
                Ok(YearEntries(entries))
            }
        }

        deserializer.deserialize_map(EntriesVisitor)
    }
}

/// Parses a top-performer file `{ "<year>": ["id", ...], ... }`. Repeated
/// years are unioned; an empty list is an error.
pub fn load_top_performers(path: &Path) -> Result<Vec<TopPerformerList>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_top_performers(&bytes, path)
}

pub fn parse_top_performers(bytes: &[u8], path: &Path) -> Result<Vec<TopPerformerList>> {
    let entries: YearEntries = serde_json::from_slice(bytes).map_err(|e| Error::TopList {
        path: path.into(),
        message: e.to_string(),
    })?;
    let source_label = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut by_year: BTreeMap<i32, BTreeSet<String>> = BTreeMap::new();
    for (key, ids) in entries.0 {
        let year: i32 = key.trim().parse().map_err(|_| Error::TopList {
            path: path.into(),
            message: format!("`{key}` is not a year"),
        })?;
        if ids.is_empty() {
            return Err(Error::EmptyTopList {
                path: path.into(),
                year,
            });
        }
        by_year.entry(year).or_default().extend(ids);
    }
    Ok(by_year
        .into_iter()
        .map(|(year, agent_ids)| TopPerformerList {
            year,
            agent_ids,
            source_label: source_label.clone(),
        })
        .collect())
}

/// Years present in the lists that fall outside every configured window.
/// These are reported as warnings, never errors.
pub fn unused_top_years(lists: &[TopPerformerList], windows: &[AnalysisWindow]) -> Vec<i32> {
    lists
        .iter()
        .map(|l| l.year)
        .filter(|y| !windows.iter().any(|w| w.year_key() == *y))
        .collect()
}

/// Restricts a series to the window. Agents with fewer than two observations
/// inside are not alive in the window and yield `None`.
pub fn slice_window(series: &AgentSeries, window: &AnalysisWindow) -> Option<AgentSeries> {
    let observations: Vec<RawObservation> = series
        .observations
        .iter()
        .filter(|o| window.contains(o.date))
        .copied()
        .collect();
    (observations.len() >= 2).then(|| AgentSeries {
        agent_id: series.agent_id.clone(),
        market_kind: series.market_kind,
        observations,
    })
}

pub fn slice_index(series: &IndexSeries, window: &AnalysisWindow) -> IndexSeries {
    IndexSeries {
        index_id: series.index_id,
        values: series
            .values
            .iter()
            .filter(|(d, _)| window.contains(*d))
            .copied()
            .collect(),
    }
}

fn csv_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "csv") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Loads every `*.csv` in `dir` as one agent, in parallel. The result is
/// sorted by agent id regardless of directory order.
pub fn load_agent_dir(dir: &Path, market_kind: MarketKind) -> Result<Vec<AgentSeries>> {
    let files = csv_files(dir)?;
    let mut agents = files
        .par_iter()
        .map(|p| load_agent_series(p, market_kind))
        .collect::<Result<Vec<_>>>()?;
    agents.sort_by(|a, b| a.agent_id.cmp(&b.agent_id));
    if let Some(pair) = agents.windows(2).find(|p| p[0].agent_id == p[1].agent_id) {
        return Err(Error::DuplicateAgent(pair[0].agent_id.clone()));
    }
    Ok(agents)
}

/// Loads `VIX.csv`, `NASDAQ.csv`, `DJI.csv` and `SPX.csv` from `dir`, whichever exist.
pub fn load_index_dir(dir: &Path) -> Result<Vec<IndexSeries>> {
    let mut out = Vec::new();
    for id in IndexId::ALL {
        let path = dir.join(format!("{}.csv", id.as_str()));
        if path.is_file() {
            out.push(load_index_series(&path, id.as_str())?);
        }
    }
    Ok(out)
}

/// Paths of every input file `load_agent_dir` would read, sorted.
pub fn agent_files(dir: &Path) -> Result<Vec<PathBuf>> {
    csv_files(dir)
}
