use crate::degree::DegreeIndex;
use crate::error::{Error, Result};
use crate::graph::{KnowledgeGraph, Triple};
use crate::models::{batch_loss_and_grad, Dropout, Gradients, ModelParams, Operand, Query};
use crate::numerics::{AdamConfig, AdamState, BetaSampler, Purpose, RngStream};
use crate::training::mixup::{plan_synthetic, SynthPlan};
use crate::training::negatives::corrupt_tail;
use crate::training::swa::SwaAverager;
use crate::training::{Method, TrainConfig};

/// Adam slot holding the TuckER core.
const CORE_SLOT: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchStats {
    pub kg_loss: f64,
    pub mix_loss: f64,
    /// `kg_loss + β·mix_loss`.
    pub total: f64,
    pub positives: usize,
    pub synthetic: usize,
}

/// Hooks called during training. Both default to no-ops.
pub trait TrainObserver {
    fn on_batch(&mut self, _epoch: usize, _batch: usize, _stats: &BatchStats) {}
    /// `averaged` is true when this epoch's parameters entered the SWA mean.
    fn on_epoch_end(&mut self, _epoch: usize, _params: &ModelParams, _averaged: bool) {}
}

impl TrainObserver for () {}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    /// 1-based; 0 is reserved for the pre-training loss row.
    pub epoch: usize,
    /// Mean over batches of the full objective.
    pub train_loss: f64,
    pub kg_loss: f64,
    pub synth_count: usize,
    /// Low-degree triples with no partner to mix with.
    pub synth_skipped: usize,
    /// Every scored (query, tail) pair, positives, negatives and synthetic.
    pub scored_samples: usize,
    pub lr: f64,
    pub swa: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub initial_loss: f64,
    pub initial_lr: f64,
    pub initial_scored: usize,
    pub epochs: Vec<EpochRecord>,
    /// Training triples whose tail-relation degree is below the threshold.
    pub e_thresh: usize,
    /// Positives per epoch, after over-sampling.
    pub epoch_length: usize,
}

impl RunReport {
    pub fn final_loss(&self) -> f64 {
        self.epochs
            .last()
            .map_or(self.initial_loss, |e| e.train_loss)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,synth_count,lr,scored_samples\n");
        out.push_str(&format!(
            "0,{},0,{},{}\n",
            self.initial_loss, self.initial_lr, self.initial_scored
        ));
        for e in &self.epochs {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                e.epoch, e.train_loss, e.synth_count, e.lr, e.scored_samples
            ));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ModelParams,
    /// Averaged parameters, when SWA ran for at least one epoch.
    pub swa: Option<ModelParams>,
    pub report: RunReport,
}

pub fn train(g: &KnowledgeGraph, idx: &DegreeIndex, cfg: &TrainConfig) -> Result<TrainOutcome> {
    train_with_observer(g, idx, cfg, &mut ())
}

/// Positions into the training split forming one epoch, before shuffling.
pub fn epoch_triples(idx: &DegreeIndex, cfg: &TrainConfig) -> Vec<usize> {
    let train = idx.train();
    let mut out = Vec::with_capacity(train.len());
    for (i, e) in train.iter().enumerate() {
        out.push(i);
        if cfg.method == Method::Oversample {
            let d = idx.tail_relation_degree(e.tail, e.relation);
            if d < cfg.degree_threshold {
                out.extend(std::iter::repeat_n(i, cfg.degree_threshold - d));
            }
        }
    }
    out
}

struct Streams {
    negatives: RngStream,
    dropout: RngStream,
}

fn kg_query(e: &Triple, cfg: &TrainConfig, idx: &DegreeIndex, negatives: &mut RngStream) -> Query {
    let ne = idx.num_entities();
    let mut tails = Vec::with_capacity(cfg.negatives + 1);
    tails.push(e.tail);
    tails.extend((0..cfg.negatives).map(|_| corrupt_tail(negatives, e.tail, ne)));
    let mut targets = vec![0.0; tails.len()];
    targets[0] = 1.0;
    let weight = if cfg.method == Method::Reweight {
        cfg.reweight(idx.tail_relation_degree(e.tail, e.relation))
    } else {
        1.0
    };
    Query {
        head: Operand::Row(e.head),
        relation: Operand::Row(e.relation),
        tails,
        targets,
        weight,
    }
}

fn diverged(epoch: usize, batch: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::NonFinite(_) => Error::Divergence {
            epoch,
            batch,
            loss: f64::NAN,
        },
        other => other,
    }
}

/// Mean batch loss over one epoch without updating anything.
fn initial_loss(
    params: &ModelParams,
    idx: &DegreeIndex,
    cfg: &TrainConfig,
    order: &[usize],
    streams: &mut Streams,
) -> Result<(f64, usize)> {
    let mut scratch = Gradients::zeros_like(params);
    let (mut sum, mut batches, mut scored) = (0.0, 0usize, 0usize);
    for (b, chunk) in order.chunks(cfg.batch_size).enumerate() {
        let queries: Vec<Query> = chunk
            .iter()
            .map(|&i| kg_query(&idx.train()[i], cfg, idx, &mut streams.negatives))
            .collect();
        scored += queries.iter().map(|q| q.tails.len()).sum::<usize>();
        let dropout = Some(Dropout {
            rates: cfg.dropout(),
            rng: &mut streams.dropout,
        });
        sum += batch_loss_and_grad(params, &queries, &cfg.loss(), dropout, 0.0, &mut scratch)
            .map_err(diverged(0, b))?;
        batches += 1;
    }
    Ok((sum / batches.max(1) as f64, scored))
}

/// Runs the configured method. The graph must be inverse-augmented and `idx`
/// built over its training split.
pub fn train_with_observer(
    g: &KnowledgeGraph,
    idx: &DegreeIndex,
    cfg: &TrainConfig,
    observer: &mut dyn TrainObserver,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if !g.is_inverse_augmented() {
        return Err(Error::InvalidParameter(
            "training expects an inverse-augmented graph".into(),
        ));
    }
    if idx.num_entities() != g.num_entities() || idx.train().len() != g.train.len() {
        return Err(Error::InvalidParameter(
            "degree index was not built from this graph".into(),
        ));
    }
    if g.train.is_empty() {
        return Err(Error::Empty("training split".into()));
    }
    if g.num_entities() < 2 {
        return Err(Error::InvalidParameter(
            "negative sampling needs at least two entities".into(),
        ));
    }

    let seed = cfg.seed;
    let mut params = ModelParams::init(
        cfg.model_kind,
        g.num_entities(),
        g.num_relations(),
        cfg.entity_dim,
        cfg.relation_dim,
        seed,
    )?;
    let shapes = params.shapes();
    let shape_refs: Vec<&[usize]> = shapes.iter().map(Vec::as_slice).collect();
    let mut adam = AdamState::new(
        AdamConfig {
            lr: cfg.lr,
            ..AdamConfig::default()
        },
        &shape_refs,
    );
    let mut grads = Gradients::zeros_like(&params);
    let beta = BetaSampler::new(cfg.mix_alpha)?;
    let loss_cfg = cfg.loss();
    let rates = cfg.dropout();

    let mut main = Streams {
        negatives: RngStream::new(seed, Purpose::Negatives),
        dropout: RngStream::new(seed, Purpose::Dropout),
    };
    let mut synth_dropout = RngStream::for_worker(seed, Purpose::Dropout, 1);
    let mut mixup = RngStream::new(seed, Purpose::Mixup);
    let mut data_order = RngStream::new(seed, Purpose::DataOrder);

    let mut order = epoch_triples(idx, cfg);
    let mut probe = Streams {
        negatives: RngStream::for_worker(seed, Purpose::Negatives, 2),
        dropout: RngStream::for_worker(seed, Purpose::Dropout, 2),
    };
    let (initial, initial_scored) = initial_loss(&params, idx, cfg, &order, &mut probe)?;

    let pretrain = cfg.pretrain_epochs();
    let swa_start = cfg.swa_start_epoch();
    let swa_on = cfg.swa_enabled();
    let mut swa = SwaAverager::new();
    let mut lr = cfg.lr;
    let mut records = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        if cfg.method == Method::KgMixup && pretrain > 0 && epoch == pretrain {
            let mut init = RngStream::for_worker(seed, Purpose::Init, 1);
            params.reinit_non_embedding(&mut init);
            if params.core.is_some() {
                adam.reset_slot(CORE_SLOT);
            }
        }
        let mixing = cfg.method == Method::KgMixup && epoch >= pretrain;
        let averaging = swa_on && epoch >= swa_start;
        let epoch_lr = if averaging { cfg.swa_lr } else { lr };
        adam.set_lr(epoch_lr);
        data_order.shuffle(&mut order);

        let mut rec = EpochRecord {
            epoch: epoch + 1,
            train_loss: 0.0,
            kg_loss: 0.0,
            synth_count: 0,
            synth_skipped: 0,
            scored_samples: 0,
            lr: epoch_lr,
            swa: averaging,
        };
        let mut batches = 0usize;
        for (b, chunk) in order.chunks(cfg.batch_size).enumerate() {
            grads.clear();
            let mut kg = Vec::with_capacity(chunk.len());
            let mut synth = Vec::new();
            for &i in chunk {
                let e = idx.train()[i];
                kg.push(kg_query(&e, cfg, idx, &mut main.negatives));
                if !mixing {
                    continue;
                }
                match plan_synthetic(&e, idx, cfg, &beta, &mut mixup)? {
                    SynthPlan::NotEligible => {}
                    SynthPlan::NoCandidates => rec.synth_skipped += 1,
                    SynthPlan::Mixes(mixes) => {
                        for (p, lambda) in mixes {
                            synth.push(Query {
                                head: Operand::Mix {
                                    first: e.head,
                                    second: p.head,
                                    lambda,
                                },
                                relation: Operand::Mix {
                                    first: e.relation,
                                    second: p.relation,
                                    lambda,
                                },
                                tails: vec![e.tail],
                                targets: vec![1.0],
                                weight: 1.0,
                            });
                        }
                    }
                }
            }
            let kg_loss = batch_loss_and_grad(
                &params,
                &kg,
                &loss_cfg,
                Some(Dropout {
                    rates,
                    rng: &mut main.dropout,
                }),
                1.0,
                &mut grads,
            )
            .map_err(diverged(epoch + 1, b))?;
            let mix_loss = if synth.is_empty() || cfg.synth_loss_weight == 0.0 {
                0.0
            } else {
                batch_loss_and_grad(
                    &params,
                    &synth,
                    &loss_cfg,
                    Some(Dropout {
                        rates,
                        rng: &mut synth_dropout,
                    }),
                    cfg.synth_loss_weight,
                    &mut grads,
                )
                .map_err(diverged(epoch + 1, b))?
            };
            let total = if mix_loss == 0.0 {
                kg_loss
            } else {
                kg_loss + cfg.synth_loss_weight * mix_loss
            };
            if !total.is_finite() {
                return Err(Error::Divergence {
                    epoch: epoch + 1,
                    batch: b,
                    loss: total,
                });
            }
            adam.step(&mut params.tensors_mut(), &grads.tensors())?;
            if !params.all_finite() {
                return Err(Error::Divergence {
                    epoch: epoch + 1,
                    batch: b,
                    loss: total,
                });
            }
            let stats = BatchStats {
                kg_loss,
                mix_loss,
                total,
                positives: kg.len(),
                synthetic: synth.len(),
            };
            observer.on_batch(epoch + 1, b, &stats);
            rec.train_loss += total;
            rec.kg_loss += kg_loss;
            rec.synth_count += synth.len();
            rec.scored_samples += kg.iter().map(|q| q.tails.len()).sum::<usize>() + synth.len();
            batches += 1;
        }
        rec.train_loss /= batches as f64;
        rec.kg_loss /= batches as f64;
        if averaging {
            swa.update(&params)?;
        } else {
            lr *= cfg.lr_decay;
        }
        observer.on_epoch_end(epoch + 1, &params, averaging);
        records.push(rec);
    }

    Ok(TrainOutcome {
        params,
        swa: swa.into_average(),
        report: RunReport {
            initial_loss: initial,
            initial_lr: cfg.lr,
            initial_scored,
            epochs: records,
            e_thresh: idx.below_threshold(cfg.degree_threshold).len(),
            epoch_length: order.len(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Vocab;
    use crate::models::ModelKind;

    fn toy_graph() -> KnowledgeGraph {
        let names =
            |p: &str, n: usize| Vocab::from_names((0..n).map(|i| format!("{p}{i}"))).unwrap();
        let mut train = Vec::new();
        for h in 0..12 {
            for r in 0..2 {
                train.push(Triple {
                    head: h,
                    relation: r,
                    tail: (h * (r + 2) + 1) % 12,
                });
            }
        }
        KnowledgeGraph::new(names("e", 12), names("r", 2), train, vec![], vec![])
            .unwrap()
            .add_inverses()
            .unwrap()
    }

    fn small_cfg(method: Method) -> TrainConfig {
        TrainConfig {
            model_kind: ModelKind::DistMult,
            entity_dim: 8,
            relation_dim: 8,
            epochs: 4,
            pretrain_epochs: Some(1),
            batch_size: 16,
            negatives: 5,
            lr: 1e-2,
            method,
            ..TrainConfig::desk()
        }
    }

    #[test]
    fn oversample_epoch_length() {
        let g = toy_graph();
        let idx = DegreeIndex::from_graph(&g);
        let cfg = small_cfg(Method::Oversample);
        let extra: usize = g
            .train
            .iter()
            .map(|e| {
                let d = idx.tail_relation_degree(e.tail, e.relation);
                cfg.degree_threshold.saturating_sub(d)
            })
            .sum();
        assert_eq!(epoch_triples(&idx, &cfg).len(), g.train.len() + extra);
    }

    #[test]
    fn every_method_runs_and_reports() {
        let g = toy_graph();
        let idx = DegreeIndex::from_graph(&g);
        for m in Method::ALL {
            let out = train(&g, &idx, &small_cfg(m)).unwrap();
            assert_eq!(out.report.epochs.len(), 4);
            assert!(out.params.all_finite());
            assert_eq!(out.swa.is_some(), m == Method::KgMixup);
            let csv = out.report.to_csv();
            assert_eq!(csv.lines().count(), 6);
        }
    }

    #[test]
    fn pretraining_epochs_have_no_synthetics() {
        let g = toy_graph();
        let idx = DegreeIndex::from_graph(&g);
        let out = train(&g, &idx, &small_cfg(Method::KgMixup)).unwrap();
        assert_eq!(out.report.epochs[0].synth_count, 0);
        let k = 5;
        for e in &out.report.epochs[1..] {
            assert_eq!(e.synth_count + k * e.synth_skipped, k * out.report.e_thresh);
        }
    }

    #[test]
    fn zero_epochs_returns_initialization() {
        let g = toy_graph();
        let idx = DegreeIndex::from_graph(&g);
        let cfg = TrainConfig {
            epochs: 0,
            ..small_cfg(Method::Standard)
        };
        let out = train(&g, &idx, &cfg).unwrap();
        let init = ModelParams::init(ModelKind::DistMult, 12, 4, 8, 8, cfg.seed).unwrap();
        assert_eq!(out.params, init);
        assert!(out.report.epochs.is_empty());
    }

    #[test]
    fn rejects_unaugmented_graph() {
        let g = toy_graph();
        let idx = DegreeIndex::from_graph(&g);
        let raw = KnowledgeGraph::new(
            g.entities.clone(),
            Vocab::from_names(["r0", "r1"]).unwrap(),
            g.train[..24].to_vec(),
            vec![],
            vec![],
        )
        .unwrap();
        assert!(train(&raw, &idx, &small_cfg(Method::Standard)).is_err());
    }

    #[test]
    fn divergence_is_reported() {
        let g = toy_graph();
        let idx = DegreeIndex::from_graph(&g);
        let cfg = TrainConfig {
            lr: 1e300,
            ..small_cfg(Method::Standard)
        };
        assert!(matches!(
            train(&g, &idx, &cfg),
            Err(Error::Divergence { epoch: 1, .. })
        ));
    }
}
