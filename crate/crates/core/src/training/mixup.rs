use crate::degree::DegreeIndex;
use crate::error::{Error, Result};
use crate::graph::Triple;
use crate::models::{ModelParams, Operand};
use crate::numerics::{lerp, BetaSampler, RngStream};
use crate::training::TrainConfig;

/// A synthetic positive: head and relation embeddings interpolated between two
/// training triples that share a tail.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedTriple {
    pub mixed_head: Vec<f64>,
    pub mixed_rel: Vec<f64>,
    pub tail: usize,
    /// Weight of `source_e1`.
    pub lambda: f64,
    pub source_e1: Triple,
    pub source_e2: Triple,
}

impl MixedTriple {
    pub fn head_operand(&self) -> Operand {
        Operand::Mix {
            first: self.source_e1.head,
            second: self.source_e2.head,
            lambda: self.lambda,
        }
    }

    pub fn relation_operand(&self) -> Operand {
        Operand::Mix {
            first: self.source_e1.relation,
            second: self.source_e2.relation,
            lambda: self.lambda,
        }
    }

    /// Every mixed component lies between the corresponding source components.
    pub fn is_convex(&self, params: &ModelParams) -> bool {
        let within = |m: &[f64], a: &[f64], b: &[f64]| {
            m.iter().zip(a.iter().zip(b)).all(|(&x, (&p, &q))| {
                let tol = 1e-12 * p.abs().max(q.abs()).max(1.0);
                x >= p.min(q) - tol && x <= p.max(q) + tol
            })
        };
        self.tail == self.source_e1.tail
            && self.tail == self.source_e2.tail
            && within(
                &self.mixed_head,
                params.entity(self.source_e1.head),
                params.entity(self.source_e2.head),
            )
            && within(
                &self.mixed_rel,
                params.relation(self.source_e1.relation),
                params.relation(self.source_e2.relation),
            )
    }
}

/// Interpolates `e1` and `e2`; the tail embedding is never mixed.
pub fn mix(e1: &Triple, e2: &Triple, lambda: f64, params: &ModelParams) -> Result<MixedTriple> {
    if e1.tail != e2.tail {
        return Err(Error::TailMismatch(e1.tail, e2.tail));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!(
            "lambda {lambda} outside [0, 1]"
        )));
    }
    Ok(MixedTriple {
        mixed_head: lerp(lambda, params.entity(e1.head), params.entity(e2.head)),
        mixed_rel: lerp(
            lambda,
            params.relation(e1.relation),
            params.relation(e2.relation),
        ),
        tail: e1.tail,
        lambda,
        source_e1: *e1,
        source_e2: *e2,
    })
}

/// What the augmentation step decided for one training triple.
#[derive(Debug, Clone, PartialEq)]
pub enum SynthPlan {
    /// Tail-relation degree is at or above the threshold.
    NotEligible,
    /// Eligible, but no other triple shares the tail.
    NoCandidates,
    /// Partner triples with their mixing weights.
    Mixes(Vec<(Triple, f64)>),
}

/// Picks `k` partners and one `λ ~ Beta(α, α)` each for a low-degree triple.
///
/// Partners are drawn without replacement when enough candidates exist, with
/// replacement otherwise.
pub fn plan_synthetic(
    e: &Triple,
    idx: &DegreeIndex,
    cfg: &TrainConfig,
    beta: &BetaSampler,
    stream: &mut RngStream,
) -> Result<SynthPlan> {
    if idx.tail_relation_degree(e.tail, e.relation) >= cfg.degree_threshold {
        return Ok(SynthPlan::NotEligible);
    }
    let candidates = idx.candidates(e, cfg.candidate_policy);
    if candidates.is_empty() {
        return Ok(SynthPlan::NoCandidates);
    }
    let k = cfg.synth_per_triple;
    let partners: Vec<Triple> = if candidates.len() >= k {
        let mut order: Vec<usize> = (0..candidates.len()).collect();
        for i in 0..k {
            let j = i + stream.below(order.len() - i);
            order.swap(i, j);
        }
        order[..k].iter().map(|&i| candidates[i]).collect()
    } else {
        (0..k)
            .map(|_| candidates[stream.below(candidates.len())])
            .collect()
    };
    let mut mixes = Vec::with_capacity(k);
    for p in partners {
        mixes.push((p, beta.sample(stream, false)?));
    }
    Ok(SynthPlan::Mixes(mixes))
}

/// Synthetic positives for `e`: empty when `e` is not low-degree or has no partner.
pub fn synth_batch(
    e: &Triple,
    idx: &DegreeIndex,
    cfg: &TrainConfig,
    stream: &mut RngStream,
    params: &ModelParams,
) -> Result<Vec<MixedTriple>> {
    let beta = BetaSampler::new(cfg.mix_alpha)?;
    match plan_synthetic(e, idx, cfg, &beta, stream)? {
        SynthPlan::Mixes(m) => m.iter().map(|(p, l)| mix(e, p, *l, params)).collect(),
        _ => Ok(Vec::new()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degree::CandidatePolicy;
    use crate::models::ModelKind;
    use crate::numerics::{Purpose, Tensor};

    fn t(head: usize, relation: usize, tail: usize) -> Triple {
        Triple {
            head,
            relation,
            tail,
        }
    }

    fn toy_params() -> ModelParams {
        ModelParams::init(ModelKind::DistMult, 4, 2, 3, 3, 1).unwrap()
    }

    #[test]
    fn lambda_one_is_identity() {
        let p = toy_params();
        let m = mix(&t(0, 0, 1), &t(3, 1, 1), 1.0, &p).unwrap();
        assert_eq!(m.mixed_head, p.entity(0));
        assert_eq!(m.mixed_rel, p.relation(0));
    }

    #[test]
    fn midpoint() {
        let ents = Tensor::new(vec![3, 2], vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        let rels = Tensor::new(vec![1, 2], vec![1.0, 1.0]).unwrap();
        let p = ModelParams::new(ModelKind::DistMult, ents, rels, None).unwrap();
        let m = mix(&t(0, 0, 2), &t(1, 0, 2), 0.5, &p).unwrap();
        assert_eq!(m.mixed_head, vec![0.5, 0.5]);
    }

    #[test]
    fn europe_belgium_germany() {
        // Europe=0, Germany=1, Belgium=3; HasCountry=0, Borders=1
        let p = ModelParams::init(ModelKind::DistMult, 4, 2, 4, 4, 5).unwrap();
        let lambda = 0.3;
        let m = mix(&t(0, 0, 1), &t(3, 1, 1), lambda, &p).unwrap();
        for i in 0..4 {
            let h = lambda * p.entity(0)[i] + (1.0 - lambda) * p.entity(3)[i];
            let r = lambda * p.relation(0)[i] + (1.0 - lambda) * p.relation(1)[i];
            assert!((m.mixed_head[i] - h).abs() < 1e-15);
            assert!((m.mixed_rel[i] - r).abs() < 1e-15);
        }
        assert_eq!(m.tail, 1);
        assert!(m.is_convex(&p));
    }

    #[test]
    fn tail_mismatch_rejected() {
        let p = toy_params();
        assert!(matches!(
            mix(&t(0, 0, 1), &t(0, 0, 2), 0.5, &p),
            Err(Error::TailMismatch(1, 2))
        ));
        assert!(mix(&t(0, 0, 1), &t(2, 1, 1), 1.5, &p).is_err());
    }

    fn cfg(threshold: usize) -> TrainConfig {
        TrainConfig {
            degree_threshold: threshold,
            synth_per_triple: 5,
            candidate_policy: CandidatePolicy::StrictThenLenient,
            ..TrainConfig::desk()
        }
    }

    #[test]
    fn zero_threshold_never_mixes() {
        let train = vec![t(0, 0, 1), t(2, 1, 1), t(3, 0, 1)];
        let idx = DegreeIndex::build(&train, 4);
        let p = toy_params();
        let mut s = RngStream::new(0, Purpose::Mixup);
        for e in &train {
            assert!(synth_batch(e, &idx, &cfg(0), &mut s, &p)
                .unwrap()
                .is_empty());
        }
    }

    #[test]
    fn single_candidate_drawn_with_replacement() {
        // (0,0,1) has tail-relation degree 2 and one strict candidate (2,1,1)
        let train = vec![t(0, 0, 1), t(3, 0, 1), t(2, 1, 1)];
        let idx = DegreeIndex::build(&train, 4);
        let p = toy_params();
        let mut s = RngStream::new(0, Purpose::Mixup);
        let out = synth_batch(&train[0], &idx, &cfg(5), &mut s, &p).unwrap();
        assert_eq!(out.len(), 5);
        assert!(out.iter().all(|m| m.source_e2 == t(2, 1, 1)));
        let mut lambdas: Vec<f64> = out.iter().map(|m| m.lambda).collect();
        lambdas.sort_by(f64::total_cmp);
        lambdas.dedup();
        assert_eq!(lambdas.len(), 5);
        assert!(out.iter().all(|m| m.is_convex(&p)));
    }

    #[test]
    fn without_replacement_when_enough() {
        let train: Vec<Triple> = (0..8).map(|h| t(h, h % 2, 9)).collect();
        let idx = DegreeIndex::build(&train, 10);
        let c = TrainConfig {
            candidate_policy: CandidatePolicy::Lenient,
            ..cfg(5)
        };
        let beta = BetaSampler::new(1.0).unwrap();
        let mut s = RngStream::new(4, Purpose::Mixup);
        match plan_synthetic(&train[0], &idx, &c, &beta, &mut s).unwrap() {
            SynthPlan::Mixes(m) => {
                let mut heads: Vec<usize> = m.iter().map(|(p, _)| p.head).collect();
                heads.sort_unstable();
                heads.dedup();
                assert_eq!(heads.len(), 5);
                assert!(!heads.contains(&0));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn isolated_triple_has_no_candidates() {
        let train = vec![t(0, 0, 1)];
        let idx = DegreeIndex::build(&train, 2);
        let beta = BetaSampler::new(1.0).unwrap();
        let mut s = RngStream::new(4, Purpose::Mixup);
        assert_eq!(
            plan_synthetic(&train[0], &idx, &cfg(5), &beta, &mut s).unwrap(),
            SynthPlan::NoCandidates
        );
    }
}
