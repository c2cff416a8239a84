use crate::error::{Error, Result};
use crate::numerics::student_t_two_sided;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedTTest {
    pub n: usize,
    pub mean_diff: f64,
    pub sd_diff: f64,
    /// `None` when every difference is zero.
    pub t: Option<f64>,
    pub p_value: f64,
    pub significant: bool,
}

impl PairedTTest {
    pub fn no_difference(&self) -> bool {
        self.t.is_none()
    }
}

/// Two-sided paired t-test on `a − b` at the 5% level.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<PairedTTest> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "paired t-test needs at least two pairs".into(),
        ));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("paired sample".into()));
    }
    let nf = n as f64;
    let mean = d.iter().sum::<f64>() / nf;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let sd = var.sqrt();
    if d.iter().all(|&v| v == 0.0) {
        return Ok(PairedTTest {
            n,
            mean_diff: 0.0,
            sd_diff: 0.0,
            t: None,
            p_value: 1.0,
            significant: false,
        });
    }
    let t = if sd == 0.0 {
        f64::INFINITY.copysign(mean)
    } else {
        mean / (sd / nf.sqrt())
    };
    let p = student_t_two_sided(t, nf - 1.0);
    Ok(PairedTTest {
        n,
        mean_diff: mean,
        sd_diff: sd,
        t: Some(t),
        p_value: p,
        significant: p < 0.05,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples() {
        let a = [0.5, 0.25, 1.0];
        let r = paired_t_test(&a, &a).unwrap();
        assert!(r.no_difference() && !r.significant);
    }

    #[test]
    fn hand_example() {
        let a = [1.0, -1.0, 0.0, 2.0];
        let r = paired_t_test(&a, &[0.0; 4]).unwrap();
        // mean 0.5, sample sd sqrt(5/3)
        assert!((r.sd_diff - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((r.t.unwrap() - 0.774_596_669_241_483).abs() < 1e-12);
        assert!(!r.significant);
    }

    #[test]
    fn constant_shift() {
        let r = paired_t_test(&[2.0, 3.0], &[1.0, 2.0]).unwrap();
        assert_eq!(r.t, Some(f64::INFINITY));
        assert!(r.significant && r.p_value == 0.0);
    }

    #[test]
    fn bad_inputs() {
        assert!(paired_t_test(&[1.0], &[1.0]).is_err());
        assert!(paired_t_test(&[1.0, 2.0], &[1.0]).is_err());
    }
}
