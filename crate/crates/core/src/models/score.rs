//! Forward and backward passes of the trilinear score functions.
//!
//! Both models reduce a `(head, relation)` query to a hidden vector `x` of entity
//! dimension, and score tail `t` as `x · e_t`:
//!
//! * DistMult: `x = (h ⊙ r)`
//! * TuckER:  `x_k = Σ_i h_i · M_ik` with `M = W ×₂ r`
//!
//! Dropout sites: the head input, the TuckER intermediate `M` and the hidden vector.

use crate::error::{Error, Result};
use crate::models::{ModelKind, ModelParams};
use crate::numerics::{dot, RngStream, Tensor};

/// Dropout probabilities for the three sites.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DropoutRates {
    pub input: f64,
    pub intermediate: f64,
    pub hidden: f64,
}

impl DropoutRates {
    pub fn is_zero(&self) -> bool {
        self.input == 0.0 && self.intermediate == 0.0 && self.hidden == 0.0
    }
}

/// Inverted-dropout masks: entries are `0` or `1/(1−p)`. `None` means identity.
#[derive(Debug, Clone, Default)]
pub struct DropoutMasks {
    pub input: Option<Vec<f64>>,
    pub intermediate: Option<Vec<f64>>,
    pub hidden: Option<Vec<f64>>,
}

pub fn dropout_mask(len: usize, rate: f64, rng: &mut RngStream) -> Option<Vec<f64>> {
    if rate <= 0.0 {
        return None;
    }
    let keep = 1.0 / (1.0 - rate);
    Some(
        (0..len)
            .map(|_| if rng.bernoulli(rate) { 0.0 } else { keep })
            .collect(),
    )
}

impl DropoutMasks {
    pub fn sample(params: &ModelParams, rates: &DropoutRates, rng: &mut RngStream) -> Self {
        let nv = params.entity_dim();
        Self {
            input: dropout_mask(nv, rates.input, rng),
            intermediate: match params.kind {
                ModelKind::TuckER => dropout_mask(nv * nv, rates.intermediate, rng),
                ModelKind::DistMult => None,
            },
            hidden: dropout_mask(nv, rates.hidden, rng),
        }
    }
}

fn apply(mask: Option<&Vec<f64>>, v: &mut [f64]) {
    if let Some(m) = mask {
        for (x, &k) in v.iter_mut().zip(m) {
            *x *= k;
        }
    }
}

/// Cached intermediates of one query's forward pass.
#[derive(Debug, Clone)]
pub struct Forward {
    head: Vec<f64>,
    intermediate: Option<Tensor>,
    pub hidden: Vec<f64>,
}

impl ModelParams {
    fn check_query(&self, h: &[f64], r: &[f64]) -> Result<()> {
        if h.len() != self.entity_dim() || r.len() != self.relation_dim() {
            return Err(Error::Shape(format!(
                "query dims ({}, {}) vs model ({}, {})",
                h.len(),
                r.len(),
                self.entity_dim(),
                self.relation_dim()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, h: &[f64], r: &[f64], masks: Option<&DropoutMasks>) -> Result<Forward> {
        self.check_query(h, r)?;
        let mut head = h.to_vec();
        apply(masks.and_then(|m| m.input.as_ref()), &mut head);
        let (mut hidden, intermediate) = match (&self.kind, &self.core) {
            (ModelKind::DistMult, _) => (head.iter().zip(r).map(|(a, b)| a * b).collect(), None),
            (ModelKind::TuckER, Some(core)) => {
                let mut m = core.contract_middle(r)?;
                apply(masks.and_then(|m| m.intermediate.as_ref()), m.data_mut());
                (m.vecmat(&head)?, Some(m))
            }
            (ModelKind::TuckER, None) => return Err(Error::Shape("missing core".into())),
        };
        apply(masks.and_then(|m| m.hidden.as_ref()), &mut hidden);
        Ok(Forward {
            head,
            intermediate,
            hidden,
        })
    }

    /// Backpropagates `∂L/∂hidden` to the head and relation inputs, accumulating the
    /// core gradient into `core_grad` when present.
    pub fn backward(
        &self,
        fwd: &Forward,
        r: &[f64],
        masks: Option<&DropoutMasks>,
        grad_hidden: &[f64],
        core_grad: Option<&mut Tensor>,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut g_pre = grad_hidden.to_vec();
        apply(masks.and_then(|m| m.hidden.as_ref()), &mut g_pre);
        let (mut g_head, g_rel) = match self.kind {
            ModelKind::DistMult => {
                let gh: Vec<f64> = g_pre.iter().zip(r).map(|(g, x)| g * x).collect();
                let gr: Vec<f64> = g_pre.iter().zip(&fwd.head).map(|(g, x)| g * x).collect();
                (gh, gr)
            }
            ModelKind::TuckER => {
                let core = self
                    .core
                    .as_ref()
                    .ok_or_else(|| Error::Shape("missing core".into()))?;
                let m = fwd
                    .intermediate
                    .as_ref()
                    .ok_or_else(|| Error::Shape("forward cache lacks intermediate".into()))?;
                let gh = m.matvec(&g_pre)?;
                let (nv, nr) = (self.entity_dim(), self.relation_dim());
                // gM_ik = h_i · g_k, masked like M
                let mut gm = vec![0.0; nv * nv];
                for i in 0..nv {
                    let hi = fwd.head[i];
                    for k in 0..nv {
                        gm[i * nv + k] = hi * g_pre[k];
                    }
                }
                apply(masks.and_then(|m| m.intermediate.as_ref()), &mut gm);
                let w = core.data();
                let mut gr = vec![0.0; nr];
                for i in 0..nv {
                    let gmi = &gm[i * nv..(i + 1) * nv];
                    for (j, gr_j) in gr.iter_mut().enumerate() {
                        let base = (i * nr + j) * nv;
                        *gr_j += dot(&w[base..base + nv], gmi);
                    }
                }
                if let Some(cg) = core_grad {
                    let cg = cg.data_mut();
                    for i in 0..nv {
                        let gmi = &gm[i * nv..(i + 1) * nv];
                        for (j, &rj) in r.iter().enumerate() {
                            if rj == 0.0 {
                                continue;
                            }
                            let base = (i * nr + j) * nv;
                            for (c, &g) in cg[base..base + nv].iter_mut().zip(gmi) {
                                *c += g * rj;
                            }
                        }
                    }
                }
                (gh, gr)
            }
        };
        apply(masks.and_then(|m| m.input.as_ref()), &mut g_head);
        Ok((g_head, g_rel))
    }

    /// Evaluation-mode score of explicit (possibly mixed) vectors.
    pub fn score_vectors(&self, h: &[f64], r: &[f64], t: &[f64]) -> Result<f64> {
        if t.len() != self.entity_dim() {
            return Err(Error::Shape(format!(
                "tail dim {} vs {}",
                t.len(),
                self.entity_dim()
            )));
        }
        Ok(dot(&self.forward(h, r, None)?.hidden, t))
    }

    pub fn score(&self, h: usize, r: usize, t: usize) -> Result<f64> {
        self.check_ids(h, r)?;
        if t >= self.num_entities() {
            return Err(Error::Shape(format!("tail {t} out of range")));
        }
        self.score_vectors(self.entity(h), self.relation(r), self.entity(t))
    }

    fn check_ids(&self, h: usize, r: usize) -> Result<()> {
        if h >= self.num_entities() || r >= self.num_relations() {
            return Err(Error::Shape(format!(
                "ids ({h}, {r}) out of range ({}, {})",
                self.num_entities(),
                self.num_relations()
            )));
        }
        Ok(())
    }

    /// Scores of every entity as tail for explicit query vectors.
    pub fn score_all_tails_vectors(&self, h: &[f64], r: &[f64]) -> Result<Vec<f64>> {
        let x = self.forward(h, r, None)?.hidden;
        self.entities.matvec(&x)
    }

    pub fn score_all_tails(&self, h: usize, r: usize) -> Result<Vec<f64>> {
        self.check_ids(h, r)?;
        self.score_all_tails_vectors(self.entity(h), self.relation(r))
    }
}
