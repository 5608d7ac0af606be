//! Group comparisons and report rendering.

pub mod bh;
pub mod boxplot;
pub mod compare;
pub mod mwu;
pub mod report;

pub use bh::benjamini_hochberg;
pub use boxplot::{boxplot_stats, quantile, BoxplotStats};
pub use compare::{
    planned_tests, run_comparisons, Block, BoxplotRecord, Comparison, ComparisonConfig, FamilyMode,
    GroupDescription, Measure, SkippedTest, Statistic, TestResult,
};
pub use mwu::{mann_whitney_u, MannWhitney, PMethod};
pub use report::{
    format_cell, format_p, format_value, render_boxplots, render_csv, render_markdown,
};
