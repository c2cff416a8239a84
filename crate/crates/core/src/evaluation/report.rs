use std::borrow::Cow;

use crate::evaluation::{BinRow, PairedTTest, StratRow, Summary};

pub const METRIC_HEADER: &str = "metric,bin,count,value\n";

/// Quotes a field that contains a comma, quote or newline.
pub fn csv_field(s: &str) -> Cow<'_, str> {
    if s.contains([',', '"', '\n']) {
        Cow::Owned(format!("\"{}\"", s.replace('"', "\"\"")))
    } else {
        Cow::Borrowed(s)
    }
}

fn summary_rows(out: &mut String, bin: &str, s: &Summary) {
    for (name, v) in [
        ("mrr", s.mrr),
        ("hits@1", s.hits1),
        ("hits@3", s.hits3),
        ("hits@10", s.hits10),
    ] {
        out.push_str(&format!("{name},{},{},{v}\n", csv_field(bin), s.count));
    }
}

pub fn overall_csv(s: &Summary) -> String {
    let mut out = String::from(METRIC_HEADER);
    summary_rows(&mut out, "all", s);
    out
}

pub fn binned_csv(rows: &[BinRow]) -> String {
    let mut out = String::from(METRIC_HEADER);
    for r in rows {
        summary_rows(&mut out, &r.label, &r.summary);
    }
    out
}

/// Stratified MRR; cross-tabulated bins are written as `primary|secondary`.
pub fn stratified_csv(feature: &str, secondary: Option<&str>, rows: &[StratRow]) -> String {
    let mut out = String::from(METRIC_HEADER);
    let metric = match secondary {
        Some(s) => format!("mrr:{feature}|{s}"),
        None => format!("mrr:{feature}"),
    };
    for r in rows {
        let bin = match &r.secondary {
            Some(s) => format!("{}|{s}", r.primary),
            None => r.primary.clone(),
        };
        out.push_str(&format!(
            "{metric},{},{},{}\n",
            csv_field(&bin),
            r.count,
            r.mrr
        ));
    }
    out
}

pub fn ttest_csv(t: &PairedTTest) -> String {
    let mut out = String::from(METRIC_HEADER);
    let stat =
        t.t.map_or_else(|| "undefined".to_owned(), |v| v.to_string());
    out.push_str(&format!("mean_diff,all,{},{}\n", t.n, t.mean_diff));
    out.push_str(&format!("t,all,{},{stat}\n", t.n));
    out.push_str(&format!("p_value,all,{},{}\n", t.n, t.p_value));
    out.push_str(&format!("significant,all,{},{}\n", t.n, t.significant));
    out
}
