//! Run configuration: a flat TOML document of keys, with paths resolved
//! relative to the config file.
//!
//! ```toml
//! market_kind = "stock"
//! data_dir = "data"
//! index_dir = "indexes"
//! top_performers = "top_performers.json"
//! windows = ["2014", "2018-01-01..2018-11-30"]
//! scales = [0, 1, 2]
//! measures = ["afp", "afv", "afx", "af3m"]
//! output_dir = "out"
//! n_hist_bins = 50
//! workers = 0
//! ```

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use toml::{Table, Value};

use crate::analysis::DEFAULT_HIST_BINS;
use crate::error::{Error, Result};
use crate::ingestion::{AnalysisWindow, MarketKind};
use crate::measures::MeasureId;
use crate::normalize::TimeScale;

const KNOWN_KEYS: &[&str] = &[
    "market_kind",
    "data_dir",
    "index_dir",
    "top_performers",
    "windows",
    "scales",
    "measures",
    "output_dir",
    "n_hist_bins",
    "workers",
    "dump_panels",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub market_kind: MarketKind,
    pub data_dir: PathBuf,
    pub index_dir: Option<PathBuf>,
    pub top_performers_path: Option<PathBuf>,
    pub windows: Vec<AnalysisWindow>,
    pub scales: Vec<TimeScale>,
    pub measures: Vec<MeasureId>,
    pub output_dir: PathBuf,
    pub n_hist_bins: usize,
    /// 0 picks the number of available cores.
    pub worker_count: usize,
    /// Also write each normalized panel as CSV under `panels/`.
    pub dump_panels: bool,
}

/// Everything `validate` found. Errors block a run; notes do not.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub errors: Vec<String>,
    pub notes: Vec<String>,
}

impl Diagnostics {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.errors {
            writeln!(f, "error: {e}")?;
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        let n = self.errors.len();
        write!(f, "{n} error{}", if n == 1 { "" } else { "s" })
    }
}

fn str_key<'a>(table: &'a Table, key: &str, diags: &mut Diagnostics) -> Option<&'a str> {
    match table.get(key)? {
        Value::String(s) => Some(s.as_str()),
        other => {
            diags.errors.push(format!(
                "`{key}` must be a string, found {}",
                other.type_str()
            ));
            None
        }
    }
}

fn uint_key(table: &Table, key: &str, diags: &mut Diagnostics) -> Option<usize> {
    match table.get(key)? {
        Value::Integer(i) if *i >= 0 => Some(*i as usize),
        other => {
            diags.errors.push(format!(
                "`{key}` must be a non-negative integer, found {other}"
            ));
            None
        }
    }
}

fn array_key<'a>(table: &'a Table, key: &str, diags: &mut Diagnostics) -> Option<&'a [Value]> {
    match table.get(key)? {
        Value::Array(a) => Some(a.as_slice()),
        other => {
            diags.errors.push(format!(
                "`{key}` must be an array, found {}",
                other.type_str()
            ));
            None
        }
    }
}

/// Parses and checks a config document. Every problem is collected; the
/// config is returned only when there are no errors.
pub fn parse_config(text: &str, base_dir: &Path) -> (Option<RunConfig>, Diagnostics) {
    let mut diags = Diagnostics::default();
    let table: Table = match text.parse() {
        Ok(t) => t,
        Err(e) => {
            diags.errors.push(format!("not a valid TOML document: {e}"));
            return (None, diags);
        }
    };

    for key in table.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            diags.errors.push(format!("unknown key `{key}`"));
        }
    }

    let resolve = |p: &str| base_dir.join(p);

    let market_kind = match str_key(&table, "market_kind", &mut diags) {
        Some(s) => match s.parse::<MarketKind>() {
            Ok(k) => Some(k),
            Err(e) => {
                diags.errors.push(e);
                None
            }
        },
        None => {
            if !table.contains_key("market_kind") {
                diags.errors.push("missing `market_kind`".into());
            }
            None
        }
    };

    let data_dir = str_key(&table, "data_dir", &mut diags).map(resolve);
    if !table.contains_key("data_dir") {
        diags.errors.push("missing `data_dir`".into());
    }
    let index_dir = str_key(&table, "index_dir", &mut diags).map(resolve);
    let top_performers_path = str_key(&table, "top_performers", &mut diags).map(resolve);
    let output_dir = str_key(&table, "output_dir", &mut diags)
        .map(resolve)
        .unwrap_or_else(|| base_dir.join("out"));

    let mut windows = Vec::new();
    match array_key(&table, "windows", &mut diags) {
        Some(items) if !items.is_empty() => {
            for item in items {
                let parsed = match item {
                    Value::String(s) => s.parse::<AnalysisWindow>(),
                    Value::Integer(y) => y.to_string().parse::<AnalysisWindow>(),
                    other => Err(format!("window entries must be strings, found {other}")),
                };
                match parsed {
                    Ok(w) => windows.push(w),
                    Err(e) => diags.errors.push(e),
                }
            }
        }
        Some(_) => diags.errors.push("`windows` is empty".into()),
        None => {
            if !table.contains_key("windows") {
                diags.errors.push("missing `windows`".into());
            }
        }
    }
    for (i, a) in windows.iter().enumerate() {
        for b in &windows[i + 1..] {
            if a.label == b.label {
                diags
                    .errors
                    .push(format!("window {} listed twice", a.label));
            } else if a.overlaps(b) {
                diags
                    .notes
                    .push(format!("windows {} and {} overlap", a.label, b.label));
            }
        }
    }

    let mut scales = Vec::new();
    match array_key(&table, "scales", &mut diags) {
        Some(items) => {
            for item in items {
                match item
                    .as_integer()
                    .and_then(|c| u8::try_from(c).ok())
                    .and_then(TimeScale::from_code)
                {
                    Some(s) if !scales.contains(&s) => scales.push(s),
                    Some(_) => {}
                    None => diags.errors.push(format!(
                        "scale {item} is not one of 0 (daily), 1 (weekly), 2 (monthly)"
                    )),
                }
            }
            if items.is_empty() {
                diags.errors.push("`scales` is empty".into());
            }
        }
        None => scales = TimeScale::ALL.to_vec(),
    }
    scales.sort();

    let mut measures = Vec::new();
    let explicit_measures = array_key(&table, "measures", &mut diags);
    if let Some(items) = explicit_measures {
        if items.is_empty() {
            diags.errors.push("`measures` is empty".into());
        }
        for item in items {
            match item.as_str().map(str::parse::<MeasureId>) {
                Some(Ok(m)) => {
                    if let Some(kind) = market_kind {
                        if !m.valid_for(kind) {
                            diags.errors.push(format!("measure {m} invalid for {kind}"));
                            continue;
                        }
                    }
                    if !measures.contains(&m) {
                        measures.push(m);
                    }
                }
                Some(Err(e)) => diags.errors.push(e),
                None => diags
                    .errors
                    .push(format!("measure entries must be strings, found {item}")),
            }
        }
    } else if let Some(kind) = market_kind {
        measures = MeasureId::defaults_for(kind);
    }

    if market_kind == Some(MarketKind::Stock)
        && index_dir.is_none()
        && measures
            .iter()
            .any(|m| matches!(m, MeasureId::Afx | MeasureId::Af3m))
    {
        diags
            .errors
            .push("measures afx and af3m need `index_dir`".into());
    }
    if market_kind == Some(MarketKind::Crypto) && index_dir.is_some() {
        diags.notes.push("`index_dir` is ignored for crypto".into());
    }

    let n_hist_bins = uint_key(&table, "n_hist_bins", &mut diags).unwrap_or(DEFAULT_HIST_BINS);
    if n_hist_bins == 0 {
        diags.errors.push("`n_hist_bins` must be at least 1".into());
    }
    let worker_count = uint_key(&table, "workers", &mut diags).unwrap_or(0);
    let dump_panels = match table.get("dump_panels") {
        None => false,
        Some(Value::Boolean(b)) => *b,
        Some(other) => {
            diags
                .errors
                .push(format!("`dump_panels` must be a boolean, found {other}"));
            false
        }
    };

    if !diags.is_ok() {
        return (None, diags);
    }
    let (Some(market_kind), Some(data_dir)) = (market_kind, data_dir) else {
        return (None, diags);
    };
    let config = RunConfig {
        market_kind,
        data_dir,
        index_dir: if market_kind == MarketKind::Stock {
            index_dir
        } else {
            None
        },
        top_performers_path,
        windows,
        scales,
        measures,
        output_dir,
        n_hist_bins,
        worker_count,
        dump_panels,
    };
    (Some(config), diags)
}

fn base_dir_of(path: &Path) -> PathBuf {
    path.parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Checks a config file without reading any data file.
pub fn validate(config_path: &Path) -> Diagnostics {
    match fs::read_to_string(config_path) {
        Ok(text) => parse_config(&text, &base_dir_of(config_path)).1,
        Err(e) => Diagnostics {
            errors: vec![format!("{}: {e}", config_path.display())],
            notes: Vec::new(),
        },
    }
}

pub fn load_config(config_path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(config_path).map_err(|e| Error::io(config_path, e))?;
    let (config, diags) = parse_config(&text, &base_dir_of(config_path));
    for note in &diags.notes {
        tracing::info!("{note}");
    }
    config.ok_or(Error::Config(diags.errors))
}
