//! Generation metrics and table rendering.

pub mod metrics;
pub mod table;

pub use metrics::{
    compute_generation_metrics, compute_rs_case, render_generation_table, FocalOutcome, GenerationMetrics, Grouping,
};
pub use table::{Format, ReportTable};
