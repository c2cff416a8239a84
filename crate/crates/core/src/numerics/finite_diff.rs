use crate::error::{Error, Result};
use crate::numerics::Tensor;

/// Central-difference gradient `(f(x+h) − f(x−h)) / 2h` for every coordinate of every tensor.
pub fn finite_diff_grad<F>(mut f: F, params: &[Tensor], h: f64) -> Result<Vec<Tensor>>
where
    F: FnMut(&[Tensor]) -> f64,
{
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "step must be positive, got {h}"
        )));
    }
    let mut work: Vec<Tensor> = params.to_vec();
    let mut grads: Vec<Tensor> = params.iter().map(|p| Tensor::zeros(p.shape())).collect();
    for t in 0..work.len() {
        for i in 0..work[t].len() {
            let orig = work[t].data()[i];
            work[t].data_mut()[i] = orig + h;
            let plus = f(&work);
            work[t].data_mut()[i] = orig - h;
            let minus = f(&work);
            work[t].data_mut()[i] = orig;
            if !plus.is_finite() || !minus.is_finite() {
                return Err(Error::NonFinite(format!(
                    "objective not finite near tensor {t} coordinate {i}"
                )));
            }
            grads[t].data_mut()[i] = (plus - minus) / (2.0 * h);
        }
    }
    Ok(grads)
}

/// Largest `|a − b| / max(|a|, |b|, floor)` over all coordinates.
pub fn max_relative_error(a: &[Tensor], b: &[Tensor], floor: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for (x, y) in a.iter().zip(b) {
        for (&u, &v) in x.data().iter().zip(y.data()) {
            let denom = u.abs().max(v.abs()).max(floor);
            worst = worst.max((u - v).abs() / denom);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic() {
        let x = Tensor::new(vec![1], vec![3.0]).unwrap();
        let g = finite_diff_grad(|p| p[0].data()[0].powi(2), &[x], 1e-5).unwrap();
        assert!((g[0].data()[0] - 6.0).abs() < 1e-6);
    }

    #[test]
    fn constant_has_zero_gradient() {
        let x = Tensor::new(vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let g = finite_diff_grad(|_| 5.0, &[x], 1e-4).unwrap();
        assert!(g[0].data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn non_finite_objective_rejected() {
        let x = Tensor::new(vec![1], vec![0.0]).unwrap();
        assert!(finite_diff_grad(|_| f64::NAN, std::slice::from_ref(&x), 1e-4).is_err());
        assert!(finite_diff_grad(|_| 0.0, &[x], 0.0).is_err());
    }
}
