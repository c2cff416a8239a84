use crate::error::{Error, Result};
use crate::evaluation::{DegreeBins, RankResult};
use crate::numerics::sigmoid;

/// One evaluated query: whether it counts as correct and the model's confidence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationInput {
    pub hit: bool,
    pub confidence: f64,
    pub degree: usize,
}

/// Correct means Hits@10; confidence is `σ(score of the true tail)`.
pub fn calibration_inputs(results: &[RankResult]) -> Vec<CalibrationInput> {
    results
        .iter()
        .map(|r| CalibrationInput {
            hit: r.rank <= 10.0,
            confidence: sigmoid(r.target_score),
            degree: r.tail_relation_degree,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationBin {
    pub label: String,
    pub count: usize,
    pub accuracy: f64,
    pub confidence: f64,
    /// `|accuracy − confidence|` of this bin alone.
    pub ece: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    pub bins: Vec<CalibrationBin>,
    pub ece: f64,
    pub count: usize,
}

fn check(items: &[CalibrationInput]) -> Result<()> {
    if items.is_empty() {
        return Err(Error::Empty("no calibration inputs".into()));
    }
    if let Some(bad) = items.iter().find(|i| !(0.0..=1.0).contains(&i.confidence)) {
        return Err(Error::InvalidParameter(format!(
            "confidence {} outside [0, 1]",
            bad.confidence
        )));
    }
    Ok(())
}

fn report(groups: Vec<(String, Vec<&CalibrationInput>)>, n: usize) -> CalibrationReport {
    let mut bins = Vec::new();
    let mut ece = 0.0;
    for (label, members) in groups {
        if members.is_empty() {
            continue;
        }
        let c = members.len() as f64;
        let accuracy = members.iter().filter(|m| m.hit).count() as f64 / c;
        let confidence = members.iter().map(|m| m.confidence).sum::<f64>() / c;
        let gap = (accuracy - confidence).abs();
        ece += c / n as f64 * gap;
        bins.push(CalibrationBin {
            label,
            count: members.len(),
            accuracy,
            confidence,
            ece: gap,
        });
    }
    CalibrationReport {
        bins,
        ece,
        count: n,
    }
}

/// Expected calibration error with queries grouped by tail-relation degree.
/// Queries below the first edge are ignored.
pub fn ece(items: &[CalibrationInput], bins: &DegreeBins) -> Result<CalibrationReport> {
    check(items)?;
    let mut groups: Vec<(String, Vec<&CalibrationInput>)> = (0..bins.len())
        .map(|b| (bins.label(b), Vec::new()))
        .collect();
    for it in items {
        if let Some(b) = bins.bin_of(it.degree) {
            groups[b].1.push(it);
        }
    }
    let n = groups.iter().map(|g| g.1.len()).sum();
    if n == 0 {
        return Err(Error::Empty("no query falls in any bin".into()));
    }
    Ok(report(groups, n))
}

/// Expected calibration error over `n_bins` equal-count bins of sorted confidence.
pub fn ece_by_confidence(items: &[CalibrationInput], n_bins: usize) -> Result<CalibrationReport> {
    check(items)?;
    if n_bins == 0 {
        return Err(Error::InvalidParameter("need at least one bin".into()));
    }
    let mut sorted: Vec<&CalibrationInput> = items.iter().collect();
    sorted.sort_by(|a, b| a.confidence.total_cmp(&b.confidence));
    let n = sorted.len();
    let groups = (0..n_bins)
        .map(|b| {
            let (lo, hi) = (b * n / n_bins, (b + 1) * n / n_bins);
            (format!("q{b}"), sorted[lo..hi].to_vec())
        })
        .collect();
    Ok(report(groups, n))
}
