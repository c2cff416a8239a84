//! Batch loss with exact gradients over table rows, mixed rows and the core.

use crate::error::{Error, Result};
use crate::models::{DropoutMasks, DropoutRates, LossConfig, ModelParams};
use crate::numerics::{axpy, dot, lerp, RngStream, Tensor};

/// A query input: a table row, or a convex mix `λ·row(first) + (1−λ)·row(second)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Operand {
    Row(usize),
    Mix {
        first: usize,
        second: usize,
        lambda: f64,
    },
}

impl Operand {
    fn resolve(&self, table: &Tensor) -> Vec<f64> {
        match *self {
            Operand::Row(i) => table.row(i).to_vec(),
            Operand::Mix {
                first,
                second,
                lambda,
            } => lerp(lambda, table.row(first), table.row(second)),
        }
    }

    fn scatter(&self, grad: &[f64], table: &mut Tensor) {
        match *self {
            Operand::Row(i) => axpy(1.0, grad, table.row_mut(i)),
            Operand::Mix {
                first,
                second,
                lambda,
            } => {
                axpy(lambda, grad, table.row_mut(first));
                axpy(1.0 - lambda, grad, table.row_mut(second));
            }
        }
    }

    fn rows(&self) -> [Option<usize>; 2] {
        match *self {
            Operand::Row(i) => [Some(i), None],
            Operand::Mix { first, second, .. } => [Some(first), Some(second)],
        }
    }
}

/// One `(head, relation)` query scored against a list of tails with hard targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub head: Operand,
    pub relation: Operand,
    pub tails: Vec<usize>,
    pub targets: Vec<f64>,
    /// Multiplies every loss term of this query.
    pub weight: f64,
}

/// Gradient buffers shaped like [`ModelParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub entities: Tensor,
    pub relations: Tensor,
    pub core: Option<Tensor>,
}

impl Gradients {
    pub fn zeros_like(params: &ModelParams) -> Self {
        Self {
            entities: Tensor::zeros(params.entities.shape()),
            relations: Tensor::zeros(params.relations.shape()),
            core: params.core.as_ref().map(|c| Tensor::zeros(c.shape())),
        }
    }

    pub fn clear(&mut self) {
        self.entities.fill(0.0);
        self.relations.fill(0.0);
        if let Some(c) = &mut self.core {
            c.fill(0.0);
        }
    }

    pub fn tensors(&self) -> Vec<&Tensor> {
        let mut out = vec![&self.entities, &self.relations];
        out.extend(self.core.as_ref());
        out
    }
}

/// Training-mode dropout source.
pub struct Dropout<'a> {
    pub rates: DropoutRates,
    pub rng: &'a mut RngStream,
}

/// Mean loss over every scored `(query, tail)` pair, accumulating `scale · ∂loss`
/// into `grads`. Queries are processed in order so the reduction is deterministic.
pub fn batch_loss_and_grad(
    params: &ModelParams,
    queries: &[Query],
    loss: &LossConfig,
    mut dropout: Option<Dropout<'_>>,
    scale: f64,
    grads: &mut Gradients,
) -> Result<f64> {
    let total: usize = queries.iter().map(|q| q.tails.len()).sum();
    if total == 0 {
        return Ok(0.0);
    }
    let n = total as f64;
    let ne = params.num_entities();
    let nr = params.num_relations();
    let mut sum = 0.0;
    for q in queries {
        if q.tails.len() != q.targets.len() {
            return Err(Error::Shape("tails and targets must align".into()));
        }
        for row in q.head.rows().into_iter().flatten() {
            if row >= ne {
                return Err(Error::Shape(format!("head row {row} out of range")));
            }
        }
        for row in q.relation.rows().into_iter().flatten() {
            if row >= nr {
                return Err(Error::Shape(format!("relation row {row} out of range")));
            }
        }
        let h = q.head.resolve(&params.entities);
        let r = q.relation.resolve(&params.relations);
        let masks = match dropout.as_mut() {
            Some(d) if !d.rates.is_zero() => Some(DropoutMasks::sample(params, &d.rates, d.rng)),
            _ => None,
        };
        let fwd = params.forward(&h, &r, masks.as_ref())?;
        let mut g_hidden = vec![0.0; params.entity_dim()];
        for (&t, &y) in q.tails.iter().zip(&q.targets) {
            if t >= ne {
                return Err(Error::Shape(format!("tail {t} out of range")));
            }
            let e_t = params.entity(t);
            let f = dot(&fwd.hidden, e_t);
            if !f.is_finite() {
                return Err(Error::NonFinite(format!("score {f}")));
            }
            let (l, d) = loss.term(f, y);
            sum += q.weight * l;
            let g = scale * q.weight * d / n;
            axpy(g, e_t, &mut g_hidden);
            axpy(g, &fwd.hidden, grads.entities.row_mut(t));
        }
        let (gh, gr) = params.backward(&fwd, &r, masks.as_ref(), &g_hidden, grads.core.as_mut())?;
        q.head.scatter(&gh, &mut grads.entities);
        q.relation.scatter(&gr, &mut grads.relations);
    }
    Ok(sum / n)
}

/// Loss only, evaluation mode.
pub fn batch_loss(params: &ModelParams, queries: &[Query], loss: &LossConfig) -> Result<f64> {
    let total: usize = queries.iter().map(|q| q.tails.len()).sum();
    if total == 0 {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for q in queries {
        let h = q.head.resolve(&params.entities);
        let r = q.relation.resolve(&params.relations);
        let fwd = params.forward(&h, &r, None)?;
        for (&t, &y) in q.tails.iter().zip(&q.targets) {
            let f = dot(&fwd.hidden, params.entity(t));
            sum += q.weight * loss.term(f, y).0;
        }
    }
    Ok(sum / total as f64)
}
