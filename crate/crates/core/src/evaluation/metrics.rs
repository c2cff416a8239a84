use std::collections::BTreeMap;

use crate::degree::DegreeIndex;
use crate::error::{Error, Result};
use crate::evaluation::RankResult;
use crate::graph::Triple;

pub fn mrr(ranks: &[f64]) -> Result<f64> {
    if ranks.is_empty() {
        return Err(Error::Empty("no ranks".into()));
    }
    Ok(ranks.iter().map(|r| 1.0 / r).sum::<f64>() / ranks.len() as f64)
}

pub fn hits_at_k(ranks: &[f64], k: usize) -> Result<f64> {
    if ranks.is_empty() {
        return Err(Error::Empty("no ranks".into()));
    }
    Ok(ranks.iter().filter(|&&r| r <= k as f64).count() as f64 / ranks.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mrr: f64,
    pub hits1: f64,
    pub hits3: f64,
    pub hits10: f64,
}

impl Summary {
    pub fn of(ranks: &[f64]) -> Result<Self> {
        Ok(Self {
            count: ranks.len(),
            mrr: mrr(ranks)?,
            hits1: hits_at_k(ranks, 1)?,
            hits3: hits_at_k(ranks, 3)?,
            hits10: hits_at_k(ranks, 10)?,
        })
    }

    pub fn of_results(results: &[RankResult]) -> Result<Self> {
        Self::of(&results.iter().map(|r| r.rank).collect::<Vec<_>>())
    }
}

/// Half-open integer bins `[e_0, e_1), …, [e_last, ∞)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeBins {
    edges: Vec<usize>,
}

impl DegreeBins {
    pub fn new(edges: Vec<usize>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::InvalidParameter(
                "bins need at least one edge".into(),
            ));
        }
        if edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(format!(
                "bin edges must be strictly increasing: {edges:?}"
            )));
        }
        Ok(Self { edges })
    }

    /// Zero, low, medium and high: `[0,1) [1,10) [10,50) [50,∞)`.
    pub fn standard() -> Self {
        Self {
            edges: vec![0, 1, 10, 50],
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        if text == "standard" {
            return Ok(Self::standard());
        }
        let edges = text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("bad bin edge {s:?}")))
            })
            .collect::<Result<Vec<usize>>>()?;
        Self::new(edges)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    /// `None` for values below the first edge.
    pub fn bin_of(&self, value: usize) -> Option<usize> {
        if value < self.edges[0] {
            return None;
        }
        Some(self.edges.partition_point(|&e| e <= value) - 1)
    }

    pub fn bounds(&self, bin: usize) -> (usize, Option<usize>) {
        (self.edges[bin], self.edges.get(bin + 1).copied())
    }

    pub fn label(&self, bin: usize) -> String {
        match self.bounds(bin) {
            (lo, Some(hi)) => format!("[{lo},{hi})"),
            (lo, None) => format!("[{lo},inf)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinRow {
    pub bin: usize,
    pub label: String,
    pub summary: Summary,
}

/// Metrics per tail-relation degree bin. Empty bins are left out.
pub fn binned_report(results: &[RankResult], bins: &DegreeBins) -> Vec<BinRow> {
    let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in results {
        if let Some(b) = bins.bin_of(r.tail_relation_degree) {
            groups.entry(b).or_default().push(r.rank);
        }
    }
    groups
        .into_iter()
        .map(|(bin, ranks)| BinRow {
            bin,
            label: bins.label(bin),
            summary: Summary::of(&ranks).expect("groups are non-empty"),
        })
        .collect()
}

/// Training-degree feature of a query triple used to stratify results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeFeature {
    HeadIn,
    HeadOut,
    TailIn,
    TailOut,
    TailRelation,
    OtherTailRelation,
}

impl DegreeFeature {
    pub const ALL: [DegreeFeature; 6] = [
        DegreeFeature::HeadIn,
        DegreeFeature::HeadOut,
        DegreeFeature::TailIn,
        DegreeFeature::TailOut,
        DegreeFeature::TailRelation,
        DegreeFeature::OtherTailRelation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DegreeFeature::HeadIn => "head_in",
            DegreeFeature::HeadOut => "head_out",
            DegreeFeature::TailIn => "tail_in",
            DegreeFeature::TailOut => "tail_out",
            DegreeFeature::TailRelation => "tail_relation",
            DegreeFeature::OtherTailRelation => "other_tail_relation",
        }
    }

    pub fn value(self, idx: &DegreeIndex, t: &Triple) -> usize {
        match self {
            DegreeFeature::HeadIn => idx.in_degree(t.head),
            DegreeFeature::HeadOut => idx.out_degree(t.head),
            DegreeFeature::TailIn => idx.in_degree(t.tail),
            DegreeFeature::TailOut => idx.out_degree(t.tail),
            DegreeFeature::TailRelation => idx.tail_relation_degree(t.tail, t.relation),
            DegreeFeature::OtherTailRelation => idx.other_tail_relation_degree(t.tail, t.relation),
        }
    }
}

impl std::str::FromStr for DegreeFeature {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        DegreeFeature::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown degree feature {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StratRow {
    pub primary: String,
    pub secondary: Option<String>,
    pub count: usize,
    pub mrr: f64,
}

/// MRR grouped by one degree feature, optionally crossed with a second one.
/// Queries whose feature falls below the first edge are left out.
pub fn stratified_report(
    results: &[RankResult],
    idx: &DegreeIndex,
    feature: DegreeFeature,
    edges: &[usize],
    secondary: Option<(DegreeFeature, &[usize])>,
) -> Result<Vec<StratRow>> {
    let bins = DegreeBins::new(edges.to_vec())?;
    let second = secondary
        .map(|(f, e)| DegreeBins::new(e.to_vec()).map(|b| (f, b)))
        .transpose()?;
    let mut groups: BTreeMap<(usize, Option<usize>), Vec<f64>> = BTreeMap::new();
    for r in results {
        let Some(b) = bins.bin_of(feature.value(idx, &r.query)) else {
            continue;
        };
        let s = match &second {
            Some((f, sb)) => match sb.bin_of(f.value(idx, &r.query)) {
                Some(s) => Some(s),
                None => continue,
            },
            None => None,
        };
        groups.entry((b, s)).or_default().push(r.rank);
    }
    Ok(groups
        .into_iter()
        .map(|((b, s), ranks)| StratRow {
            primary: bins.label(b),
            secondary: s.map(|s| second.as_ref().unwrap().1.label(s)),
            count: ranks.len(),
            mrr: mrr(&ranks).expect("groups are non-empty"),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(deg: usize, rank: f64) -> RankResult {
        RankResult {
            query: Triple {
                head: 0,
                relation: 0,
                tail: 0,
            },
            rank,
            tail_relation_degree: deg,
            target_score: 0.0,
        }
    }

    #[test]
    fn formulas() {
        assert!((mrr(&[1.0, 2.0, 4.0]).unwrap() - 1.75 / 3.0).abs() < 1e-15);
        assert_eq!(mrr(&[1.0; 4]).unwrap(), 1.0);
        assert_eq!(hits_at_k(&[1.0; 4], 1).unwrap(), 1.0);
        assert_eq!(hits_at_k(&[1.0, 11.0], 10).unwrap(), 0.5);
        assert_eq!(hits_at_k(&[1.0, 11.0], 1).unwrap(), 0.5);
        assert!(mrr(&[]).is_err() && hits_at_k(&[], 3).is_err());
    }

    #[test]
    fn standard_bins() {
        let b = DegreeBins::standard();
        assert_eq!(b.bin_of(0), Some(0));
        assert_eq!(b.bin_of(9), Some(1));
        assert_eq!(b.bin_of(10), Some(2));
        assert_eq!(b.bin_of(50), Some(3));
        assert_eq!(b.label(3), "[50,inf)");
        assert!(DegreeBins::new(vec![0, 5, 5]).is_err());
        assert!(DegreeBins::new(vec![3, 1]).is_err());
        assert_eq!(DegreeBins::parse("standard").unwrap(), b);
        assert_eq!(DegreeBins::parse("0,1,10,50").unwrap(), b);
    }

    #[test]
    fn one_query_per_bin() {
        let rs: Vec<RankResult> = [0, 3, 20, 100].iter().map(|&d| result(d, 2.0)).collect();
        let rows = binned_report(&rs, &DegreeBins::standard());
        assert_eq!(rows.len(), 4);
        for row in rows {
            assert_eq!(row.summary.count, 1);
            assert_eq!(row.summary.mrr, 0.5);
        }
    }

    #[test]
    fn empty_bins_absent() {
        let rs = vec![result(3, 1.0), result(4, 2.0)];
        let rows = binned_report(&rs, &DegreeBins::standard());
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].label, "[1,10)");
    }

    #[test]
    fn feature_names_round_trip() {
        for f in DegreeFeature::ALL {
            assert_eq!(f.as_str().parse::<DegreeFeature>().unwrap(), f);
        }
    }
}
