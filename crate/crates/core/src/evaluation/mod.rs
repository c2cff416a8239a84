//! Filtered ranking, ranking metrics, degree-binned reports and the paired t-test.

mod metrics;
mod rank;
mod report;
mod ttest;

pub use metrics::{
    binned_report, hits_at_k, mrr, stratified_report, BinRow, DegreeBins, DegreeFeature, StratRow,
    Summary,
};
pub use rank::{filtered_rank, rank_from_scores, rank_queries, KnownTriples, RankResult, TieMode};
pub use report::{binned_csv, csv_field, overall_csv, stratified_csv, ttest_csv, METRIC_HEADER};
pub use ttest::{paired_t_test, PairedTTest};
