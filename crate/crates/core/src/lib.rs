//! Antifragility of market agents under system-wide perturbations.
//!
//! For each agent (a stock or a cryptocurrency) and each analysis window the
//! crate computes a satisfaction series from normalized open prices, several
//! system perturbation series, and their product averaged over time. It then
//! relates these values to descriptive performance metrics.
//!
//! The modules follow the batch pipeline: [`ingestion`] loads and slices the
//! inputs, [`normalize`] resamples and min-max normalizes them into panels,
//! [`measures`] computes satisfaction, perturbation and antifragility,
//! [`performance`] and [`analysis`] produce the descriptive outputs, and
//! [`pipeline`] ties everything to a [`config::RunConfig`].

pub mod analysis;
pub mod config;
pub mod error;
pub mod fixture;
pub mod ingestion;
pub mod measures;
pub mod normalize;
pub mod output;
pub mod performance;
pub mod pipeline;
pub mod stats;
pub mod synthetic;

pub use error::{Error, Result};
pub use ingestion::{
    AgentSeries, AnalysisWindow, IndexId, IndexSeries, MarketKind, RawObservation, TopPerformerList,
};
pub use measures::{AntifragilityResult, MeasureId, PerturbationSeries, SatisfactionSeries};
pub use normalize::{NormalizedPanel, NormalizedSeries, TimeScale};
pub use performance::{PerfVariable, PerformanceRecord};
pub use pipeline::{analyze, analyze_with_workers, AnalysisOptions, Dataset, RunResults};
