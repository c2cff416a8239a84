use std::path::Path;

use crate::degree::CandidatePolicy;
use crate::error::{Error, Result};
use crate::kv;
use crate::models::{DropoutRates, LossConfig, ModelKind};

/// Training objective variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Standard,
    Oversample,
    Reweight,
    Focal,
    KgMixup,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Standard,
        Method::Oversample,
        Method::Reweight,
        Method::Focal,
        Method::KgMixup,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Standard => "standard",
            Method::Oversample => "oversample",
            Method::Reweight => "reweight",
            Method::Focal => "focal",
            Method::KgMixup => "kg_mixup",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}

/// All training hyperparameters. Keys of the `key = value` config format are the
/// field names.
///
/// Defaults follow the tuned TuckER settings for FB15K-237 where those exist.
/// `mix_alpha` (1.0), `pretrain_epochs` (a quarter of `epochs`) and
/// `swa_start_fraction` (0.75) have no published value.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub model_kind: ModelKind,
    pub entity_dim: usize,
    pub relation_dim: usize,
    pub epochs: usize,
    /// `None` means `epochs / 4`. Only used by `kg_mixup`; counted inside `epochs`.
    pub pretrain_epochs: Option<usize>,
    pub batch_size: usize,
    pub negatives: usize,
    pub lr: f64,
    pub lr_decay: f64,
    pub label_smoothing: f64,
    pub dropout_1: f64,
    pub dropout_2: f64,
    pub dropout_3: f64,
    pub method: Method,
    pub degree_threshold: usize,
    pub synth_per_triple: usize,
    pub synth_loss_weight: f64,
    pub mix_alpha: f64,
    pub candidate_policy: CandidatePolicy,
    pub focal_gamma: f64,
    pub reweight_cap: f64,
    /// `None` means enabled for `kg_mixup` only.
    pub swa_enabled: Option<bool>,
    pub swa_start_fraction: f64,
    pub swa_lr: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            model_kind: ModelKind::TuckER,
            entity_dim: 200,
            relation_dim: 200,
            epochs: 400,
            pretrain_epochs: None,
            batch_size: 128,
            negatives: 100,
            lr: 5e-5,
            lr_decay: 0.99,
            label_smoothing: 0.0,
            dropout_1: 0.3,
            dropout_2: 0.4,
            dropout_3: 0.5,
            method: Method::Standard,
            degree_threshold: 5,
            synth_per_triple: 5,
            synth_loss_weight: 1.0,
            mix_alpha: 1.0,
            candidate_policy: CandidatePolicy::StrictThenLenient,
            focal_gamma: 2.0,
            reweight_cap: 10.0,
            swa_enabled: None,
            swa_start_fraction: 0.75,
            swa_lr: 5e-4,
            seed: 0,
        }
    }
}

pub const CONFIG_KEYS: &[&str] = &[
    "model_kind",
    "entity_dim",
    "relation_dim",
    "epochs",
    "pretrain_epochs",
    "batch_size",
    "negatives",
    "lr",
    "lr_decay",
    "label_smoothing",
    "dropout_1",
    "dropout_2",
    "dropout_3",
    "method",
    "degree_threshold",
    "synth_per_triple",
    "synth_loss_weight",
    "mix_alpha",
    "candidate_policy",
    "focal_gamma",
    "reweight_cap",
    "swa_enabled",
    "swa_start_fraction",
    "swa_lr",
    "seed",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value for {key}: {value:?}")))
}

impl TrainConfig {
    /// Small, fast settings used for the synthetic benchmark.
    pub fn desk() -> Self {
        Self {
            model_kind: ModelKind::DistMult,
            entity_dim: 32,
            relation_dim: 32,
            epochs: 50,
            batch_size: 128,
            negatives: 50,
            lr: 5e-3,
            lr_decay: 1.0,
            dropout_1: 0.2,
            dropout_2: 0.0,
            dropout_3: 0.3,
            synth_loss_weight: 0.03,
            mix_alpha: 0.2,
            swa_lr: 1e-3,
            ..Self::default()
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "model_kind" => self.model_kind = value.parse()?,
            "entity_dim" => self.entity_dim = parse(key, value)?,
            "relation_dim" => self.relation_dim = parse(key, value)?,
            "epochs" => self.epochs = parse(key, value)?,
            "pretrain_epochs" => {
                self.pretrain_epochs = match value {
                    "auto" => None,
                    v => Some(parse(key, v)?),
                }
            }
            "batch_size" => self.batch_size = parse(key, value)?,
            "negatives" => self.negatives = parse(key, value)?,
            "lr" => self.lr = parse(key, value)?,
            "lr_decay" => self.lr_decay = parse(key, value)?,
            "label_smoothing" => self.label_smoothing = parse(key, value)?,
            "dropout_1" => self.dropout_1 = parse(key, value)?,
            "dropout_2" => self.dropout_2 = parse(key, value)?,
            "dropout_3" => self.dropout_3 = parse(key, value)?,
            "method" => self.method = value.parse()?,
            "degree_threshold" => self.degree_threshold = parse(key, value)?,
            "synth_per_triple" => self.synth_per_triple = parse(key, value)?,
            "synth_loss_weight" => self.synth_loss_weight = parse(key, value)?,
            "mix_alpha" => self.mix_alpha = parse(key, value)?,
            "candidate_policy" => self.candidate_policy = value.parse()?,
            "focal_gamma" => self.focal_gamma = parse(key, value)?,
            "reweight_cap" => self.reweight_cap = parse(key, value)?,
            "swa_enabled" => {
                self.swa_enabled = match value {
                    "auto" => None,
                    v => Some(parse(key, v)?),
                }
            }
            "swa_start_fraction" => self.swa_start_fraction = parse(key, value)?,
            "swa_lr" => self.swa_lr = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            other => return Err(Error::Config(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "model_kind" => self.model_kind.as_str().to_owned(),
            "entity_dim" => self.entity_dim.to_string(),
            "relation_dim" => self.relation_dim.to_string(),
            "epochs" => self.epochs.to_string(),
            "pretrain_epochs" => self
                .pretrain_epochs
                .map_or_else(|| "auto".to_owned(), |v| v.to_string()),
            "batch_size" => self.batch_size.to_string(),
            "negatives" => self.negatives.to_string(),
            "lr" => self.lr.to_string(),
            "lr_decay" => self.lr_decay.to_string(),
            "label_smoothing" => self.label_smoothing.to_string(),
            "dropout_1" => self.dropout_1.to_string(),
            "dropout_2" => self.dropout_2.to_string(),
            "dropout_3" => self.dropout_3.to_string(),
            "method" => self.method.as_str().to_owned(),
            "degree_threshold" => self.degree_threshold.to_string(),
            "synth_per_triple" => self.synth_per_triple.to_string(),
            "synth_loss_weight" => self.synth_loss_weight.to_string(),
            "mix_alpha" => self.mix_alpha.to_string(),
            "candidate_policy" => self.candidate_policy.as_str().to_owned(),
            "focal_gamma" => self.focal_gamma.to_string(),
            "reweight_cap" => self.reweight_cap.to_string(),
            "swa_enabled" => self
                .swa_enabled
                .map_or_else(|| "auto".to_owned(), |v| v.to_string()),
            "swa_start_fraction" => self.swa_start_fraction.to_string(),
            "swa_lr" => self.swa_lr.to_string(),
            "seed" => self.seed.to_string(),
            _ => return None,
        })
    }

    /// Applies every `key = value` pair of a config text on top of `self`.
    pub fn apply_text(&mut self, text: &str, source: &Path) -> Result<()> {
        for (k, v) in kv::parse_kv(text, source)? {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text, path)?;
        Ok(cfg)
    }

    /// Canonical `key = value` rendering, in [`CONFIG_KEYS`] order.
    pub fn to_text(&self) -> String {
        kv::render_kv(
            CONFIG_KEYS
                .iter()
                .map(|&k| (k, self.get(k).unwrap_or_default())),
        )
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.entity_dim == 0 || self.relation_dim == 0 {
            return fail("embedding dims must be positive".into());
        }
        if self.model_kind == ModelKind::DistMult && self.entity_dim != self.relation_dim {
            return fail("DistMult needs entity_dim == relation_dim".into());
        }
        if self.batch_size == 0 {
            return fail("batch_size must be at least 1".into());
        }
        if self.negatives == 0 {
            return fail("negatives must be at least 1".into());
        }
        if !(self.lr > 0.0) || !(self.swa_lr > 0.0) {
            return fail("learning rates must be positive".into());
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return fail("lr_decay must lie in (0, 1]".into());
        }
        if !(0.0..1.0).contains(&self.label_smoothing) {
            return fail("label_smoothing must lie in [0, 1)".into());
        }
        for (name, p) in [
            ("dropout_1", self.dropout_1),
            ("dropout_2", self.dropout_2),
            ("dropout_3", self.dropout_3),
        ] {
            if !(0.0..1.0).contains(&p) {
                return fail(format!("{name} must lie in [0, 1)"));
            }
        }
        if self.method == Method::KgMixup && self.synth_per_triple == 0 {
            return fail("synth_per_triple must be at least 1 for kg_mixup".into());
        }
        if !(self.synth_loss_weight >= 0.0) {
            return fail("synth_loss_weight must be non-negative".into());
        }
        if !(self.mix_alpha > 0.0 && self.mix_alpha.is_finite()) {
            return fail("mix_alpha must be positive".into());
        }
        if !(self.focal_gamma >= 0.0) {
            return fail("focal_gamma must be non-negative".into());
        }
        if !(self.reweight_cap >= 1.0) {
            return fail("reweight_cap must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.swa_start_fraction) {
            return fail("swa_start_fraction must lie in [0, 1]".into());
        }
        Ok(())
    }

    pub fn pretrain_epochs(&self) -> usize {
        match self.method {
            Method::KgMixup => self
                .pretrain_epochs
                .unwrap_or(self.epochs / 4)
                .min(self.epochs),
            _ => 0,
        }
    }

    pub fn swa_enabled(&self) -> bool {
        self.swa_enabled.unwrap_or(self.method == Method::KgMixup)
    }

    /// First (0-based) epoch that runs at the SWA learning rate and is averaged.
    pub fn swa_start_epoch(&self) -> usize {
        (self.swa_start_fraction * self.epochs as f64).ceil() as usize
    }

    pub fn dropout(&self) -> DropoutRates {
        DropoutRates {
            input: self.dropout_1,
            intermediate: self.dropout_2,
            hidden: self.dropout_3,
        }
    }

    pub fn loss(&self) -> LossConfig {
        LossConfig {
            label_smoothing: self.label_smoothing,
            focal_gamma: if self.method == Method::Focal {
                self.focal_gamma
            } else {
                0.0
            },
        }
    }

    /// Loss multiplier of a positive whose pair has tail-relation degree `degree`.
    pub fn reweight(&self, degree: usize) -> f64 {
        if degree < self.degree_threshold {
            (self.degree_threshold as f64 / degree.max(1) as f64).min(self.reweight_cap)
        } else {
            1.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut cfg = TrainConfig::desk();
        cfg.method = Method::KgMixup;
        cfg.pretrain_epochs = Some(3);
        cfg.swa_enabled = Some(false);
        let text = cfg.to_text();
        let mut back = TrainConfig::default();
        back.apply_text(&text, Path::new("cfg")).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_key_rejected() {
        let mut cfg = TrainConfig::default();
        assert!(cfg.set("learning_rate", "1").is_err());
        assert!(cfg.set("lr", "fast").is_err());
    }

    #[test]
    fn invariants_checked() {
        let mut cfg = TrainConfig::desk();
        cfg.validate().unwrap();
        cfg.negatives = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = TrainConfig::desk();
        cfg.method = Method::KgMixup;
        cfg.synth_per_triple = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = TrainConfig::desk();
        cfg.mix_alpha = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn reweight_formula() {
        let cfg = TrainConfig::default();
        assert_eq!(cfg.reweight(0), 5.0);
        assert_eq!(cfg.reweight(1), 5.0);
        assert_eq!(cfg.reweight(2), 2.5);
        assert_eq!(cfg.reweight(5), 1.0);
        let capped = TrainConfig {
            degree_threshold: 50,
            ..TrainConfig::default()
        };
        assert_eq!(capped.reweight(1), 10.0);
    }

    #[test]
    fn derived_defaults() {
        let mut cfg = TrainConfig::desk();
        assert_eq!(cfg.pretrain_epochs(), 0);
        assert!(!cfg.swa_enabled());
        cfg.method = Method::KgMixup;
        assert_eq!(cfg.pretrain_epochs(), 12);
        assert!(cfg.swa_enabled());
        assert_eq!(cfg.swa_start_epoch(), 38);
    }
}
