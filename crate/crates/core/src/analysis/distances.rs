use rayon::prelude::*;

use crate::degree::DegreeIndex;
use crate::error::{Error, Result};
use crate::models::ModelParams;
use crate::numerics::l2_distance;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceReport {
    pub d_head: f64,
    pub d_rel: f64,
    pub e_thresh: usize,
}

/// Mean Euclidean distance from each low-degree triple's head (relation) to the
/// heads (relations) of all training triples sharing its tail, the triple itself
/// included. `None` when no training triple is below the threshold.
pub fn embedding_distances(
    params: &ModelParams,
    idx: &DegreeIndex,
    threshold: usize,
) -> Result<Option<DistanceReport>> {
    if params.num_entities() != idx.num_entities() {
        return Err(Error::Incompatible(
            "model and degree index disagree on entities".into(),
        ));
    }
    let low = idx.below_threshold(threshold);
    if low.is_empty() {
        return Ok(None);
    }
    let per_triple: Vec<(f64, f64)> = low
        .par_iter()
        .map(|e| {
            let (mut h, mut r, mut n) = (0.0, 0.0, 0usize);
            for other in idx.triples_with_tail(e.tail) {
                h += l2_distance(params.entity(e.head), params.entity(other.head));
                r += l2_distance(params.relation(e.relation), params.relation(other.relation));
                n += 1;
            }
            (h / n as f64, r / n as f64)
        })
        .collect();
    let m = per_triple.len() as f64;
    Ok(Some(DistanceReport {
        d_head: per_triple.iter().map(|p| p.0).sum::<f64>() / m,
        d_rel: per_triple.iter().map(|p| p.1).sum::<f64>() / m,
        e_thresh: per_triple.len(),
    }))
}
