//! Binary checkpoint: `KGMX` magic, little-endian header, 32-bit float payloads,
//! then a length-prefixed UTF-8 config echo.

use std::path::Path;

use crate::error::{Error, Result};
use crate::models::{ModelKind, ModelParams};
use crate::numerics::Tensor;
use crate::training::TrainConfig;

pub const MAGIC: &[u8; 4] = b"KGMX";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: ModelParams,
    pub config_text: String,
    pub epoch: u32,
}

impl Checkpoint {
    /// Parses the config echo on top of the defaults.
    pub fn config(&self) -> Result<TrainConfig> {
        let mut cfg = TrainConfig::default();
        cfg.apply_text(&self.config_text, Path::new("<checkpoint>"))?;
        Ok(cfg)
    }
}

pub fn encode_checkpoint(params: &ModelParams, config_text: &str, epoch: u32) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&params.kind.code().to_le_bytes());
    out.extend_from_slice(&(params.num_entities() as u64).to_le_bytes());
    out.extend_from_slice(&(params.num_relations() as u64).to_le_bytes());
    out.extend_from_slice(&(params.entity_dim() as u32).to_le_bytes());
    out.extend_from_slice(&(params.relation_dim() as u32).to_le_bytes());
    out.extend_from_slice(&epoch.to_le_bytes());
    for t in params.tensors() {
        for &v in t.data() {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out.extend_from_slice(&(config_text.len() as u64).to_le_bytes());
    out.extend_from_slice(config_text.as_bytes());
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Checkpoint("truncated checkpoint".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn floats(&mut self, shape: &[usize]) -> Result<Tensor> {
        let n = shape
            .iter()
            .try_fold(1usize, |a, &d| a.checked_mul(d))
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| Error::Checkpoint("payload size overflows".into()))?;
        let raw = self.take(n)?;
        let data = raw
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
            .collect();
        Tensor::new(shape.to_vec(), data)
    }
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<Checkpoint> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)
        .map_err(|_| Error::Checkpoint("bad magic".into()))?
        != MAGIC
    {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let code = r.u32()?;
    let kind = ModelKind::from_code(code)
        .ok_or_else(|| Error::Checkpoint(format!("unknown model code {code}")))?;
    let to_usize =
        |v: u64| usize::try_from(v).map_err(|_| Error::Checkpoint("count too large".into()));
    let ne = to_usize(r.u64()?)?;
    let nr = to_usize(r.u64()?)?;
    let nv = r.u32()? as usize;
    let nrd = r.u32()? as usize;
    let epoch = r.u32()?;
    let entities = r.floats(&[ne, nv])?;
    let relations = r.floats(&[nr, nrd])?;
    let core = match kind {
        ModelKind::DistMult => None,
        ModelKind::TuckER => Some(r.floats(&[nv, nrd, nv])?),
    };
    let params = ModelParams::new(kind, entities, relations, core)
        .map_err(|e| Error::Checkpoint(format!("shape mismatch: {e}")))?;
    let len = to_usize(r.u64()?)?;
    let config_text = String::from_utf8(r.take(len)?.to_vec())
        .map_err(|_| Error::Checkpoint("config echo is not UTF-8".into()))?;
    if r.pos != bytes.len() {
        return Err(Error::Checkpoint("trailing bytes after config echo".into()));
    }
    Ok(Checkpoint {
        params,
        config_text,
        epoch,
    })
}

pub fn save_checkpoint(
    path: &Path,
    params: &ModelParams,
    config_text: &str,
    epoch: u32,
) -> Result<()> {
    std::fs::write(path, encode_checkpoint(params, config_text, epoch))
        .map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes)
}
