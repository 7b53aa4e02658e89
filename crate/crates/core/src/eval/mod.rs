//! Evaluation: AUC and EER, bootstrap standard errors, paired significance
//! tests, the utterance-count sweep and the first/last window comparison,
//! plus CSV, Markdown and SVG reports.

mod bootstrap;
mod experiments;
mod metrics;
mod report;
mod significance;

pub use bootstrap::{bootstrap, resample_indices, BootstrapResult, MAX_CONSECUTIVE_REDRAWS};
pub use experiments::{
    first_last_experiment, parse_window_sizes, sweep_utterances, BootstrapSettings, FirstLastResult, FirstLastRow,
    SweepRow, WindowSize,
};
pub use metrics::{auc, eer, Metric};
pub use report::{
    first_last_csv, parse_table, read_table, report_csv, report_markdown, significance_csv, sweep_csv, sweep_markdown, sweep_svg,
    write_report_csv, ComparisonRow, EvalRow, SweepPoint, Table, REPORT_HEADER, SWEEP_HEADER,
};
pub use significance::{paired_ttest, wilcoxon, SignificanceResult, TestKind, WILCOXON_EXACT_MAX};

use crate::error::Result;
use crate::scoring::ScoreSet;

/// AUC of a score set.
pub fn score_auc(scores: &ScoreSet) -> Result<f64> {
    auc(&scores.scores(), &scores.labels())
}

/// EER of a score set.
pub fn score_eer(scores: &ScoreSet) -> Result<f64> {
    eer(&scores.scores(), &scores.labels())
}
