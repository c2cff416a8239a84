use std::collections::HashMap;

use rayon::prelude::*;

use crate::degree::DegreeIndex;
use crate::error::{Error, Result};
use crate::graph::{KnowledgeGraph, Triple};
use crate::models::ModelParams;

/// How a target tied with other candidates is ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieMode {
    /// Average position among the tied block.
    #[default]
    Mean,
    Optimistic,
    Pessimistic,
}

impl TieMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TieMode::Mean => "mean",
            TieMode::Optimistic => "optimistic",
            TieMode::Pessimistic => "pessimistic",
        }
    }
}

impl std::str::FromStr for TieMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(TieMode::Mean),
            "optimistic" => Ok(TieMode::Optimistic),
            "pessimistic" => Ok(TieMode::Pessimistic),
            other => Err(Error::Config(format!("unknown tie mode {other:?}"))),
        }
    }
}

/// Known true tails per `(head, relation)`, used to filter competitors.
#[derive(Debug, Clone, Default)]
pub struct KnownTriples {
    tails: HashMap<(usize, usize), Vec<usize>>,
}

impl KnownTriples {
    pub fn from_triples<'a>(triples: impl IntoIterator<Item = &'a Triple>) -> Self {
        let mut tails: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for t in triples {
            tails.entry((t.head, t.relation)).or_default().push(t.tail);
        }
        for v in tails.values_mut() {
            v.sort_unstable();
            v.dedup();
        }
        Self { tails }
    }

    /// Every triple of every split.
    pub fn from_graph(g: &KnowledgeGraph) -> Self {
        Self::from_triples(g.all_triples())
    }

    pub fn tails(&self, head: usize, relation: usize) -> &[usize] {
        self.tails.get(&(head, relation)).map_or(&[], Vec::as_slice)
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.tails(t.head, t.relation)
            .binary_search(&t.tail)
            .is_ok()
    }
}

/// Rank of `target` among all candidates except the filtered ones.
/// `filtered` must be sorted; the target itself is never filtered.
pub fn rank_from_scores(
    scores: &[f64],
    target: usize,
    filtered: &[usize],
    tie: TieMode,
) -> Result<f64> {
    let s_t = *scores
        .get(target)
        .ok_or_else(|| Error::InvalidParameter(format!("target {target} out of range")))?;
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFinite("NaN score".into()));
    }
    let (mut greater, mut equal) = (0usize, 0usize);
    for (v, &s) in scores.iter().enumerate() {
        if v == target || filtered.binary_search(&v).is_ok() {
            continue;
        }
        if s > s_t {
            greater += 1;
        } else if s == s_t {
            equal += 1;
        }
    }
    Ok(1.0
        + greater as f64
        + match tie {
            TieMode::Mean => equal as f64 / 2.0,
            TieMode::Optimistic => 0.0,
            TieMode::Pessimistic => equal as f64,
        })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankResult {
    pub query: Triple,
    pub rank: f64,
    /// Training tail-relation degree of the query's `(tail, relation)`.
    pub tail_relation_degree: usize,
    /// Score of the true tail.
    pub target_score: f64,
}

pub fn filtered_rank(
    params: &ModelParams,
    query: &Triple,
    known: &KnownTriples,
    tie: TieMode,
) -> Result<(f64, f64)> {
    let scores = params.score_all_tails(query.head, query.relation)?;
    let rank = rank_from_scores(
        &scores,
        query.tail,
        known.tails(query.head, query.relation),
        tie,
    )?;
    Ok((rank, scores[query.tail]))
}

/// Filtered ranks of many queries, computed in parallel, in query order.
pub fn rank_queries(
    params: &ModelParams,
    queries: &[Triple],
    known: &KnownTriples,
    idx: &DegreeIndex,
    tie: TieMode,
) -> Result<Vec<RankResult>> {
    if params.num_entities() != idx.num_entities() {
        return Err(Error::Incompatible(format!(
            "model has {} entities, dataset {}",
            params.num_entities(),
            idx.num_entities()
        )));
    }
    queries
        .par_iter()
        .map(|q| {
            if q.relation >= params.num_relations()
                || q.head >= params.num_entities()
                || q.tail >= params.num_entities()
            {
                return Err(Error::Incompatible(format!(
                    "query {q:?} outside the model"
                )));
            }
            let (rank, target_score) = filtered_rank(params, q, known, tie)?;
            Ok(RankResult {
                query: *q,
                rank,
                tail_relation_degree: idx.tail_relation_degree(q.tail, q.relation),
                target_score,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn best_score_ranks_first() {
        let r = rank_from_scores(&[0.9, 0.1, 0.2, 0.3], 0, &[], TieMode::Mean).unwrap();
        assert_eq!(r, 1.0);
    }

    #[test]
    fn tie_at_top() {
        let s = [0.5, 0.9, 0.9, 0.1];
        assert_eq!(rank_from_scores(&s, 1, &[], TieMode::Mean).unwrap(), 1.5);
        assert_eq!(
            rank_from_scores(&s, 1, &[], TieMode::Optimistic).unwrap(),
            1.0
        );
        assert_eq!(
            rank_from_scores(&s, 1, &[], TieMode::Pessimistic).unwrap(),
            2.0
        );
    }

    #[test]
    fn filtered_competitors_removed() {
        let s = [0.1, 0.9, 0.8, 0.5, 0.2];
        assert_eq!(rank_from_scores(&s, 3, &[], TieMode::Mean).unwrap(), 3.0);
        assert_eq!(
            rank_from_scores(&s, 3, &[1, 2, 3], TieMode::Mean).unwrap(),
            1.0
        );
    }

    #[test]
    fn known_triples_lookup() {
        let t = |h, r, t| Triple {
            head: h,
            relation: r,
            tail: t,
        };
        let k = KnownTriples::from_triples(&[t(0, 0, 3), t(0, 0, 1), t(0, 0, 3), t(1, 0, 2)]);
        assert_eq!(k.tails(0, 0), &[1, 3]);
        assert!(k.contains(&t(1, 0, 2)));
        assert!(k.tails(5, 5).is_empty());
    }

    #[test]
    fn nan_rejected() {
        assert!(rank_from_scores(&[f64::NAN, 1.0], 1, &[], TieMode::Mean).is_err());
    }
}
