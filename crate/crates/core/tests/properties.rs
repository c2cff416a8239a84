use std::path::Path;

use proptest::prelude::*;

use kgmix::analysis::{ece, embedding_distances, CalibrationInput};
use kgmix::degree::{CandidatePolicy, DegreeIndex};
use kgmix::evaluation::{
    binned_report, rank_from_scores, DegreeBins, RankResult, Summary, TieMode,
};
use kgmix::graph::{parse_triples, triples_to_tsv, KnowledgeGraph, Triple, Vocab};
use kgmix::models::{bce_loss, LossConfig, ModelKind, ModelParams};
use kgmix::numerics::{BetaSampler, Purpose, RngStream, Tensor};
use kgmix::training::{
    decode_checkpoint, encode_checkpoint, mix, plan_synthetic, SynthPlan, TrainConfig,
};

fn triples(ne: usize, nr: usize, max: usize) -> impl Strategy<Value = Vec<Triple>> {
    proptest::collection::vec((0..ne, 0..nr, 0..ne), 1..max).prop_map(|v| {
        v.into_iter()
            .map(|(h, r, t)| Triple::new(h, r, t))
            .collect()
    })
}

fn vocab(prefix: &str, n: usize) -> Vocab {
    Vocab::from_names((0..n).map(|i| format!("{prefix}{i}"))).unwrap()
}

fn sorted(mut v: Vec<Triple>) -> Vec<Triple> {
    v.sort();
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn degree_identities(train in triples(12, 4, 200)) {
        let idx = DegreeIndex::build(&train, 12);
        for v in 0..12 {
            let by_rel: usize = (0..4).map(|r| idx.tail_relation_degree(v, r)).sum();
            prop_assert_eq!(by_rel, idx.in_degree(v));
            prop_assert_eq!(idx.total_degree(v), idx.in_degree(v) + idx.out_degree(v));
            for r in 0..4 {
                prop_assert_eq!(
                    idx.other_tail_relation_degree(v, r) + idx.tail_relation_degree(v, r),
                    idx.in_degree(v)
                );
            }
        }
        let pair_total: usize = idx.tail_relation_pairs().iter().map(|p| p.1).sum();
        prop_assert_eq!(pair_total, train.len());
    }

    #[test]
    fn tsv_round_trip_keeps_multiset(train in triples(9, 3, 80)) {
        let (ents, rels) = (vocab("e", 9), vocab("r", 3));
        let text = triples_to_tsv(&train, &ents, &rels);
        let (mut e2, mut r2) = (ents.clone(), rels.clone());
        let back = parse_triples(text.as_bytes(), Path::new("mem"), &mut e2, &mut r2).unwrap();
        prop_assert_eq!(e2.len(), 9);
        prop_assert_eq!(sorted(back), sorted(train));
    }

    #[test]
    fn inverse_augmentation_swaps_roles(train in triples(8, 3, 60)) {
        let g = KnowledgeGraph::new(vocab("e", 8), vocab("r", 3), train.clone(), vec![], vec![])
            .unwrap()
            .add_inverses()
            .unwrap();
        prop_assert_eq!(g.train.len(), 2 * train.len());
        let raw = DegreeIndex::build(&train, 8);
        let aug = DegreeIndex::from_graph(&g);
        for v in 0..8 {
            prop_assert_eq!(aug.in_degree(v), raw.in_degree(v) + raw.out_degree(v));
            for r in 0..3 {
                let inv = g.inverse_relation(r).unwrap();
                let heads = train.iter().filter(|t| t.head == v && t.relation == r).count();
                prop_assert_eq!(aug.tail_relation_degree(v, inv), heads);
            }
        }
    }

    #[test]
    fn filtered_rank_bounds(
        scores in proptest::collection::vec(-3i32..3, 2..40),
        target_seed in any::<usize>(),
        filter_mask in proptest::collection::vec(any::<bool>(), 40),
    ) {
        let scores: Vec<f64> = scores.into_iter().map(f64::from).collect();
        let n = scores.len();
        let target = target_seed % n;
        let filtered: Vec<usize> = (0..n).filter(|&v| v != target && filter_mask[v]).collect();
        for tie in [TieMode::Optimistic, TieMode::Mean, TieMode::Pessimistic] {
            let f = rank_from_scores(&scores, target, &filtered, tie).unwrap();
            let raw = rank_from_scores(&scores, target, &[], tie).unwrap();
            prop_assert!(f <= raw);
            prop_assert!(f >= 1.0 && raw <= n as f64);
        }
        let opt = rank_from_scores(&scores, target, &filtered, TieMode::Optimistic).unwrap();
        let pes = rank_from_scores(&scores, target, &filtered, TieMode::Pessimistic).unwrap();
        let mean = rank_from_scores(&scores, target, &filtered, TieMode::Mean).unwrap();
        prop_assert_eq!(mean, (opt + pes) / 2.0);
    }

    #[test]
    fn metrics_recombine(
        ranks in proptest::collection::vec((1u32..60, 0usize..80), 1..120),
    ) {
        let q = Triple::new(0, 0, 0);
        let results: Vec<RankResult> = ranks
            .iter()
            .map(|&(rank, degree)| RankResult {
                query: q,
                rank: f64::from(rank),
                tail_relation_degree: degree,
                target_score: 0.0,
            })
            .collect();
        let all = Summary::of_results(&results).unwrap();
        prop_assert!(all.hits1 <= all.hits3 && all.hits3 <= all.hits10);
        prop_assert!(all.mrr >= all.hits1);
        let bins = binned_report(&results, &DegreeBins::standard());
        let count: usize = bins.iter().map(|b| b.summary.count).sum();
        prop_assert_eq!(count, results.len());
        let weighted: f64 = bins.iter().map(|b| b.summary.mrr * b.summary.count as f64).sum::<f64>()
            / count as f64;
        prop_assert!((weighted - all.mrr).abs() <= 1e-12);
    }

    #[test]
    fn ece_bounded_and_scale_free(
        items in proptest::collection::vec((any::<bool>(), 0.0f64..=1.0, 0usize..100), 1..60),
        copies in 2usize..5,
    ) {
        let items: Vec<CalibrationInput> = items
            .into_iter()
            .map(|(hit, confidence, degree)| CalibrationInput { hit, confidence, degree })
            .collect();
        let bins = DegreeBins::standard();
        let base = ece(&items, &bins).unwrap();
        prop_assert!((0.0..=1.0).contains(&base.ece));
        prop_assert_eq!(base.bins.iter().map(|b| b.count).sum::<usize>(), items.len());
        let repeated: Vec<CalibrationInput> =
            items.iter().flat_map(|i| std::iter::repeat_n(*i, copies)).collect();
        prop_assert!((ece(&repeated, &bins).unwrap().ece - base.ece).abs() <= 1e-12);
    }

    #[test]
    fn loss_is_non_negative(
        logits in proptest::collection::vec(-30.0f64..30.0, 1..20),
        eps in 0.0f64..0.5,
        gamma in 0.0f64..3.0,
    ) {
        let targets: Vec<f64> = (0..logits.len()).map(|i| (i % 2) as f64).collect();
        let cfg = LossConfig { label_smoothing: eps, focal_gamma: gamma };
        let (l, grads) = bce_loss(&logits, &targets, &cfg, None).unwrap();
        prop_assert!(l >= 0.0 && l.is_finite());
        prop_assert!(grads.iter().all(|g| g.is_finite()));
        if eps > 0.0 {
            for y in [0.0, 1.0] {
                let s = cfg.smooth(y);
                prop_assert!(s > 0.0 && s < 1.0);
            }
        }
    }

    #[test]
    fn synthetic_triples_are_convex(
        train in triples(10, 3, 60),
        seed in any::<u64>(),
        alpha in 0.1f64..3.0,
    ) {
        let p = ModelParams::init(ModelKind::TuckER, 10, 3, 4, 3, seed).unwrap();
        let idx = DegreeIndex::build(&train, 10);
        let cfg = TrainConfig {
            degree_threshold: 3,
            synth_per_triple: 4,
            mix_alpha: alpha,
            candidate_policy: CandidatePolicy::Lenient,
            ..TrainConfig::default()
        };
        let beta = BetaSampler::new(alpha).unwrap();
        let mut stream = RngStream::new(seed, Purpose::Mixup);
        for e in &train {
            if let SynthPlan::Mixes(m) = plan_synthetic(e, &idx, &cfg, &beta, &mut stream).unwrap() {
                prop_assert_eq!(m.len(), 4);
                for (partner, lambda) in m {
                    prop_assert_eq!(partner.tail, e.tail);
                    prop_assert!(idx.train().contains(&partner));
                    let mixed = mix(e, &partner, lambda, &p).unwrap();
                    prop_assert!(mixed.is_convex(&p));
                }
            }
        }
    }

    #[test]
    fn checkpoint_round_trip(seed in any::<u64>(), tucker in any::<bool>(), epoch in 0u32..500) {
        let kind = if tucker { ModelKind::TuckER } else { ModelKind::DistMult };
        let p = ModelParams::init(kind, 7, 3, 5, if tucker { 4 } else { 5 }, seed).unwrap();
        let bytes = encode_checkpoint(&p, "lr = 0.01\n", epoch);
        let ck = decode_checkpoint(&bytes).unwrap();
        prop_assert_eq!(ck.epoch, epoch);
        prop_assert_eq!(&ck.config_text, "lr = 0.01\n");
        for (a, b) in p.tensors().iter().zip(ck.params.tensors()) {
            for (x, y) in a.data().iter().zip(b.data()) {
                prop_assert_eq!(*x as f32, *y as f32);
            }
        }
        // already at stored precision, so a second pass is exact
        prop_assert_eq!(encode_checkpoint(&ck.params, &ck.config_text, epoch), bytes);
    }

    #[test]
    fn distances_ignore_rotation(train in triples(9, 3, 50), seed in any::<u64>()) {
        let d = 4;
        let p = ModelParams::init(ModelKind::DistMult, 9, 3, d, d, seed).unwrap();
        let idx = DegreeIndex::build(&train, 9);
        let q = random_orthogonal(d, seed);
        let mut rotated = p.clone();
        for v in 0..9 {
            let row = p.entities.row(v);
            let out = rotated.entities.row_mut(v);
            for (i, o) in out.iter_mut().enumerate() {
                *o = (0..d).map(|j| q.row(i)[j] * row[j]).sum();
            }
        }
        let a = embedding_distances(&p, &idx, 4).unwrap();
        let b = embedding_distances(&rotated, &idx, 4).unwrap();
        match (a, b) {
            (Some(a), Some(b)) => {
                prop_assert!((a.d_head - b.d_head).abs() <= 1e-9);
                prop_assert!((a.d_rel - b.d_rel).abs() <= 1e-9);
                prop_assert_eq!(a.e_thresh, b.e_thresh);
            }
            (None, None) => {}
            _ => prop_assert!(false, "rotation changed the low-degree set"),
        }
    }

    #[test]
    fn config_text_round_trip(
        lr in 1e-6f64..1.0,
        threshold in 0usize..50,
        k in 1usize..10,
        alpha in 0.05f64..5.0,
        seed in any::<u64>(),
    ) {
        let cfg = TrainConfig {
            lr,
            degree_threshold: threshold,
            synth_per_triple: k,
            mix_alpha: alpha,
            seed,
            ..TrainConfig::desk()
        };
        let mut back = TrainConfig::default();
        back.apply_text(&cfg.to_text(), Path::new("mem")).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

/// Product of `d` Householder reflections.
fn random_orthogonal(d: usize, seed: u64) -> Tensor {
    let mut rng = RngStream::new(seed, Purpose::Analysis);
    let mut q = Tensor::from_fn(&[d, d], |i| if i / d == i % d { 1.0 } else { 0.0 });
    for _ in 0..d {
        let v: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
        let vv: f64 = v.iter().map(|x| x * x).sum();
        // q ← q (I − 2vvᵀ/vᵀv)
        for i in 0..d {
            let row = q.row_mut(i);
            let proj: f64 = row.iter().zip(&v).map(|(a, b)| a * b).sum();
            for (x, vj) in row.iter_mut().zip(&v) {
                *x -= 2.0 * proj * vj / vv;
            }
        }
    }
    q
}

#[test]
fn householder_product_is_orthogonal() {
    let q = random_orthogonal(5, 7);
    for i in 0..5 {
        for j in 0..5 {
            let dot: f64 = q.row(i).iter().zip(q.row(j)).map(|(a, b)| a * b).sum();
            assert!((dot - f64::from(u8::from(i == j))).abs() < 1e-12);
        }
    }
}
