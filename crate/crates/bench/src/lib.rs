//! Shared inputs for the criterion benchmarks.

use antifragility_core::synthetic::{self, SyntheticSpec};
use antifragility_core::{AnalysisOptions, AnalysisWindow, Dataset, MarketKind};

pub const YEAR: i32 = 2014;

pub fn dataset(kind: MarketKind, n_agents: usize, n_periods: usize) -> Dataset {
    synthetic::dataset(&SyntheticSpec {
        market_kind: kind,
        n_agents,
        n_periods,
        year: YEAR,
        sparse_dates: false,
        seed: 0xA5F1,
    })
}

pub fn options(kind: MarketKind) -> AnalysisOptions {
    AnalysisOptions::new(kind, vec![AnalysisWindow::year(YEAR)])
}
