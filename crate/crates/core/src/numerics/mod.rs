//! Dense tensors, seeded randomness, Adam and a finite-difference gradient oracle.

mod adam;
mod finite_diff;
mod rng;
mod special;
mod tensor;

pub use adam::{AdamConfig, AdamState};
pub use finite_diff::{finite_diff_grad, max_relative_error};
pub use rng::{beta_sample, BetaSampler, Purpose, RngStream};
pub use special::{ln_gamma, reg_inc_beta, student_t_two_sided};
pub use tensor::{axpy, dot, l2_distance, lerp, Tensor};

/// Logistic function, evaluated without overflow.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)`, evaluated without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}
