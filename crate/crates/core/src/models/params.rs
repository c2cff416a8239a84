use crate::error::{Error, Result};
use crate::numerics::{Purpose, RngStream, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    DistMult,
    TuckER,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::DistMult => "distmult",
            ModelKind::TuckER => "tucker",
        }
    }

    pub(crate) fn code(self) -> u32 {
        match self {
            ModelKind::DistMult => 0,
            ModelKind::TuckER => 1,
        }
    }

    pub(crate) fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(ModelKind::DistMult),
            1 => Some(ModelKind::TuckER),
            _ => None,
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "distmult" => Ok(ModelKind::DistMult),
            "tucker" => Ok(ModelKind::TuckER),
            other => Err(Error::Config(format!("unknown model kind {other:?}"))),
        }
    }
}

/// Embedding tables plus the TuckER core tensor.
///
/// The core is indexed `[head_dim][relation_dim][tail_dim]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub kind: ModelKind,
    pub entities: Tensor,
    pub relations: Tensor,
    pub core: Option<Tensor>,
}

impl ModelParams {
    pub fn new(
        kind: ModelKind,
        entities: Tensor,
        relations: Tensor,
        core: Option<Tensor>,
    ) -> Result<Self> {
        let p = Self {
            kind,
            entities,
            relations,
            core,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if self.entities.shape().len() != 2 || self.relations.shape().len() != 2 {
            return Err(Error::Shape("embedding tables must be matrices".into()));
        }
        let (nv, nr) = (self.entity_dim(), self.relation_dim());
        match (self.kind, &self.core) {
            (ModelKind::DistMult, None) if nv == nr => {}
            (ModelKind::DistMult, None) => {
                return Err(Error::Shape(format!(
                    "DistMult needs equal entity and relation dims, got {nv} and {nr}"
                )))
            }
            (ModelKind::DistMult, Some(_)) => {
                return Err(Error::Shape("DistMult has no core tensor".into()))
            }
            (ModelKind::TuckER, Some(core)) if core.shape() == [nv, nr, nv] => {}
            (ModelKind::TuckER, Some(core)) => {
                return Err(Error::Shape(format!(
                    "TuckER core must be [{nv}, {nr}, {nv}], got {:?}",
                    core.shape()
                )))
            }
            (ModelKind::TuckER, None) => {
                return Err(Error::Shape("TuckER requires a core tensor".into()))
            }
        }
        Ok(())
    }

    /// Random initialization: embedding entries `N(0, 1/dim)`, core entries `U(−1, 1)`.
    pub fn init(
        kind: ModelKind,
        num_entities: usize,
        num_relations: usize,
        entity_dim: usize,
        relation_dim: usize,
        seed: u64,
    ) -> Result<Self> {
        if entity_dim == 0 || relation_dim == 0 {
            return Err(Error::InvalidParameter(
                "embedding dims must be positive".into(),
            ));
        }
        let mut rng = RngStream::new(seed, Purpose::Init);
        let es = 1.0 / (entity_dim as f64).sqrt();
        let rs = 1.0 / (relation_dim as f64).sqrt();
        let entities = Tensor::from_fn(&[num_entities, entity_dim], |_| es * rng.normal());
        let relations = Tensor::from_fn(&[num_relations, relation_dim], |_| rs * rng.normal());
        let core = match kind {
            ModelKind::DistMult => None,
            ModelKind::TuckER => Some(random_core(entity_dim, relation_dim, &mut rng)),
        };
        Self::new(kind, entities, relations, core)
    }

    /// Draws a fresh core tensor, keeping the embeddings. No-op for DistMult.
    pub fn reinit_non_embedding(&mut self, rng: &mut RngStream) {
        if self.core.is_some() {
            self.core = Some(random_core(self.entity_dim(), self.relation_dim(), rng));
        }
    }

    pub fn num_entities(&self) -> usize {
        self.entities.shape()[0]
    }

    pub fn num_relations(&self) -> usize {
        self.relations.shape()[0]
    }

    pub fn entity_dim(&self) -> usize {
        self.entities.shape()[1]
    }

    pub fn relation_dim(&self) -> usize {
        self.relations.shape()[1]
    }

    pub fn entity(&self, v: usize) -> &[f64] {
        self.entities.row(v)
    }

    pub fn relation(&self, r: usize) -> &[f64] {
        self.relations.row(r)
    }

    pub fn tensors(&self) -> Vec<&Tensor> {
        let mut out = vec![&self.entities, &self.relations];
        out.extend(self.core.as_ref());
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = vec![&mut self.entities, &mut self.relations];
        out.extend(self.core.as_mut());
        out
    }

    pub fn shapes(&self) -> Vec<Vec<usize>> {
        self.tensors().iter().map(|t| t.shape().to_vec()).collect()
    }

    /// Rebuilds parameters from a tensor list in [`ModelParams::tensors`] order.
    pub fn with_tensors(&self, tensors: &[Tensor]) -> Result<Self> {
        let core = match self.kind {
            ModelKind::DistMult => None,
            ModelKind::TuckER => Some(
                tensors
                    .get(2)
                    .cloned()
                    .ok_or_else(|| Error::Shape("missing core".into()))?,
            ),
        };
        Self::new(self.kind, tensors[0].clone(), tensors[1].clone(), core)
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.all_finite())
    }
}

fn random_core(nv: usize, nr: usize, rng: &mut RngStream) -> Tensor {
    Tensor::from_fn(&[nv, nr, nv], |_| 2.0 * rng.uniform() - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distmult_requires_equal_dims() {
        assert!(ModelParams::init(ModelKind::DistMult, 3, 2, 4, 5, 0).is_err());
        assert!(ModelParams::init(ModelKind::DistMult, 3, 2, 4, 4, 0).is_ok());
    }

    #[test]
    fn tucker_core_shape() {
        let p = ModelParams::init(ModelKind::TuckER, 3, 2, 4, 5, 0).unwrap();
        assert_eq!(p.core.as_ref().unwrap().shape(), &[4, 5, 4]);
        assert_eq!(p.tensors().len(), 3);
    }

    #[test]
    fn reinit_keeps_embeddings() {
        let mut p = ModelParams::init(ModelKind::TuckER, 3, 2, 4, 3, 0).unwrap();
        let before = p.clone();
        p.reinit_non_embedding(&mut RngStream::new(9, Purpose::Init));
        assert_eq!(p.entities, before.entities);
        assert_ne!(p.core, before.core);

        let mut d = ModelParams::init(ModelKind::DistMult, 3, 2, 4, 4, 0).unwrap();
        let before = d.clone();
        d.reinit_non_embedding(&mut RngStream::new(9, Purpose::Init));
        assert_eq!(d, before);
    }
}
