//! First-order expansion of the mixed-sample loss around the unmixed triple.
//!
//! With `τ = 1 − λ`, the mixed triple is `((1−τ)h_i + τh_j, (1−τ)r_i + τr_j, t)` and
//! `l(τ) = −log σ(f)`. Its derivative at zero is
//! `−(1 − σ(f(e_i))) · (∂f/∂h·Δh + ∂f/∂r·Δr)`.

use crate::degree::DegreeIndex;
use crate::error::{Error, Result};
use crate::graph::Triple;
use crate::models::ModelParams;
use crate::numerics::{dot, lerp, sigmoid, softplus, BetaSampler, RngStream};

/// Score and its gradients with respect to the head and relation inputs.
fn score_and_grads(
    params: &ModelParams,
    h: &[f64],
    r: &[f64],
    t: usize,
) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let fwd = params.forward(h, r, None)?;
    let e_t = params.entity(t);
    let f = dot(&fwd.hidden, e_t);
    let (gh, gr) = params.backward(&fwd, r, None, e_t, None)?;
    Ok((f, gh, gr))
}

fn mixed_loss(params: &ModelParams, ei: &Triple, ej: &Triple, tau: f64) -> Result<f64> {
    let h = lerp(1.0 - tau, params.entity(ei.head), params.entity(ej.head));
    let r = lerp(
        1.0 - tau,
        params.relation(ei.relation),
        params.relation(ej.relation),
    );
    let f = params.score_vectors(&h, &r, params.entity(ei.tail))?;
    Ok(softplus(-f))
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaylorCheckReport {
    pub taus: Vec<f64>,
    /// `l(τ)` per entry of `taus`.
    pub losses: Vec<f64>,
    /// `|l(τ) − l(0) − τ·l'(0)|` per entry of `taus`.
    pub residuals: Vec<f64>,
    /// `residual(τ) / residual(τ/2)`; NaN when both vanish.
    pub ratios: Vec<f64>,
    pub l0: f64,
    /// Analytic derivative of the negative log-likelihood.
    pub derivative: f64,
    /// Same term with the log-likelihood sign, `+(1 − σ(f))·∂f/∂τ`.
    pub derivative_loglik: f64,
    /// Central finite difference of `l` at zero.
    pub derivative_fd: f64,
    pub delta_h_norm: f64,
    pub delta_r_norm: f64,
    /// Finite difference agrees within 1e-4 relative.
    pub derivative_ok: bool,
    /// Every defined ratio lies in `[3, 5]`.
    pub quadratic_ok: bool,
}

impl TaylorCheckReport {
    pub fn pass(&self) -> bool {
        self.derivative_ok && self.quadratic_ok
    }
}

/// Compares the mixed-sample loss against its linearization at `τ = 0`.
pub fn taylor_check(
    params: &ModelParams,
    ei: &Triple,
    ej: &Triple,
    taus: &[f64],
) -> Result<TaylorCheckReport> {
    if ei.tail != ej.tail {
        return Err(Error::TailMismatch(ei.tail, ej.tail));
    }
    if taus.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::InvalidParameter(
            "tau values must be positive".into(),
        ));
    }
    let (hi, ri) = (params.entity(ei.head), params.relation(ei.relation));
    let dh = diff(params.entity(ej.head), hi);
    let dr = diff(params.relation(ej.relation), ri);
    let (f, gh, gr) = score_and_grads(params, hi, ri, ei.tail)?;
    let df_dtau = dot(&gh, &dh) + dot(&gr, &dr);
    // 1 − σ(f) = σ(−f)
    let derivative = -sigmoid(-f) * df_dtau;
    let l0 = softplus(-f);

    let step = 1e-5;
    let derivative_fd =
        (mixed_loss(params, ei, ej, step)? - mixed_loss(params, ei, ej, -step)?) / (2.0 * step);
    let scale = derivative.abs().max(derivative_fd.abs());
    let derivative_ok = scale < 1e-12 || (derivative - derivative_fd).abs() <= 1e-4 * scale;

    let residual = |tau: f64| -> Result<(f64, f64)> {
        let l = mixed_loss(params, ei, ej, tau)?;
        Ok((l, (l - l0 - tau * derivative).abs()))
    };
    let (mut losses, mut residuals, mut ratios) = (Vec::new(), Vec::new(), Vec::new());
    let mut quadratic_ok = true;
    for &tau in taus {
        let (l, res) = residual(tau)?;
        let (_, half) = residual(tau / 2.0)?;
        let ratio = if res == 0.0 && half == 0.0 {
            f64::NAN
        } else {
            res / half
        };
        if !ratio.is_nan() && !(3.0..=5.0).contains(&ratio) {
            quadratic_ok = false;
        }
        losses.push(l);
        residuals.push(res);
        ratios.push(ratio);
    }
    Ok(TaylorCheckReport {
        taus: taus.to_vec(),
        losses,
        residuals,
        ratios,
        l0,
        derivative,
        derivative_loglik: -derivative,
        derivative_fd,
        delta_h_norm: norm(&dh),
        delta_r_norm: norm(&dr),
        derivative_ok,
        quadratic_ok,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizerReport {
    pub r1: f64,
    pub r2: f64,
    /// Monte Carlo estimate of `E[1 − λ]` under the folded Beta.
    pub tau: f64,
    pub triples: usize,
    /// Set when the triple set was empty and both terms are zero by convention.
    pub empty_warning: bool,
}

/// Monte Carlo estimate of `E[1 − λ]`, `λ ~ Beta(α, α)` folded onto `[½, 1]`.
pub fn estimate_tau(alpha: f64, draws: usize, stream: &mut RngStream) -> Result<f64> {
    if draws == 0 {
        return Err(Error::InvalidParameter("need at least one draw".into()));
    }
    let beta = BetaSampler::new(alpha)?;
    let mut sum = 0.0;
    for _ in 0..draws {
        sum += 1.0 - beta.sample(stream, true)?;
    }
    Ok(sum / draws as f64)
}

pub const TAU_DRAWS: usize = 100_000;

/// Estimates both first-order regularizers over `triples`, each paired with `k`
/// partners drawn uniformly from the training triples sharing its tail (itself
/// included).
pub fn regularizer_terms(
    params: &ModelParams,
    triples: &[Triple],
    idx: &DegreeIndex,
    k: usize,
    alpha: f64,
    stream: &mut RngStream,
) -> Result<RegularizerReport> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let tau = estimate_tau(alpha, TAU_DRAWS, stream)?;
    if triples.is_empty() {
        return Ok(RegularizerReport {
            r1: 0.0,
            r2: 0.0,
            tau,
            triples: 0,
            empty_warning: true,
        });
    }
    let (mut r1, mut r2) = (0.0, 0.0);
    for ei in triples {
        let same_tail: Vec<&Triple> = idx.triples_with_tail(ei.tail).collect();
        if same_tail.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "{ei:?} has no training triple with its tail"
            )));
        }
        let (hi, ri) = (params.entity(ei.head), params.relation(ei.relation));
        let (f, gh, gr) = score_and_grads(params, hi, ri, ei.tail)?;
        let slack = sigmoid(-f);
        for _ in 0..k {
            let ej = same_tail[stream.below(same_tail.len())];
            r1 += slack * dot(&gh, &diff(params.entity(ej.head), hi));
            r2 += slack * dot(&gr, &diff(params.relation(ej.relation), ri));
        }
    }
    let scale = tau / triples.len() as f64;
    Ok(RegularizerReport {
        r1: scale * r1,
        r2: scale * r2,
        tau,
        triples: triples.len(),
        empty_warning: false,
    })
}
