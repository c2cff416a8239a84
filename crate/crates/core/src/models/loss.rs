use crate::error::{Error, Result};
use crate::numerics::{sigmoid, softplus};

/// Binary cross-entropy settings shared by every scored sample.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossConfig {
    /// Targets become `(1−ε)·y + ε/2`.
    pub label_smoothing: f64,
    /// Focal exponent γ; `0` is plain BCE.
    pub focal_gamma: f64,
}

impl LossConfig {
    pub fn smooth(&self, y: f64) -> f64 {
        (1.0 - self.label_smoothing) * y + self.label_smoothing / 2.0
    }

    /// Loss and `dloss/dlogit` of a single logit against a hard target in `{0, 1}`.
    pub fn term(&self, logit: f64, target: f64) -> (f64, f64) {
        let y = self.smooth(target);
        // −[y log σ(f) + (1−y) log σ(−f)] = softplus(f) − y·f
        let bce = softplus(logit) - y * logit;
        let d_bce = sigmoid(logit) - y;
        if self.focal_gamma == 0.0 {
            return (bce, d_bce);
        }
        let gamma = self.focal_gamma;
        let (p_pos, p_neg) = (sigmoid(logit), sigmoid(-logit));
        // factor = (1 − p_correct)^γ
        let (base, d_base) = if target >= 0.5 {
            (p_neg, -p_pos * p_neg)
        } else {
            (p_pos, p_pos * p_neg)
        };
        let factor = base.powf(gamma);
        let d_factor = if base > 0.0 {
            gamma * base.powf(gamma - 1.0) * d_base
        } else {
            0.0
        };
        (factor * bce, d_factor * bce + factor * d_bce)
    }
}

/// Mean of `w_i · ℓ(f_i, y_i)` with its gradient with respect to each logit.
pub fn bce_loss(
    logits: &[f64],
    targets: &[f64],
    cfg: &LossConfig,
    weights: Option<&[f64]>,
) -> Result<(f64, Vec<f64>)> {
    if logits.len() != targets.len() || weights.is_some_and(|w| w.len() != logits.len()) {
        return Err(Error::Shape(
            "logits, targets and weights must align".into(),
        ));
    }
    if logits.is_empty() {
        return Err(Error::Empty("no logits".into()));
    }
    if let Some(bad) = logits.iter().find(|f| !f.is_finite()) {
        return Err(Error::NonFinite(format!("logit {bad}")));
    }
    let n = logits.len() as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(logits.len());
    for (i, (&f, &y)) in logits.iter().zip(targets).enumerate() {
        let w = weights.map_or(1.0, |w| w[i]);
        let (l, d) = cfg.term(f, y);
        loss += w * l;
        grad.push(w * d / n);
    }
    Ok((loss / n, grad))
}
