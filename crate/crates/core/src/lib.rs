//! Aggregated fairness metrics and performance–fairness trade-off analysis.
//!
//! The pipeline runs from per-instance predictions to per-group confusion
//! counts ([`dataset`]), to a class × group metric matrix ([`metrics`]), to a
//! single fairness score ([`aggregation`]). Trained models then become points
//! in the performance–fairness plane, summarised by frontiers and areas
//! ([`tradeoff`]) and compared under several selection rules ([`selection`]).

pub mod aggregation;
pub mod dataset;
pub mod error;
pub mod fixture;
pub mod metrics;
pub mod report;
pub mod selection;
pub mod tradeoff;

pub use aggregation::{aggregate, AggregationOutcome, AggregationSpec, Preset};
pub use dataset::{DatasetSchema, GroupedConfusions, PredictionRecord, Split};
pub use error::{Error, Position, Result};
pub use metrics::{metric_matrix, BaseMetricKind, MeanMode, MetricMatrix};
pub use tradeoff::{Frontier, TradeoffPoint, UtopiaPoint};
