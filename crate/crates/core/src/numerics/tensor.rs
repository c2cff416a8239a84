use crate::error::{Error, Result};

/// Dense row-major tensor of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::Shape(format!(
                "shape {shape:?} needs {expected} elements, got {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let n = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: vec![0.0; n],
        }
    }

    pub fn from_fn(shape: &[usize], mut f: impl FnMut(usize) -> f64) -> Self {
        let n: usize = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: (0..n).map(&mut f).collect(),
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    fn row_width(&self) -> usize {
        debug_assert_eq!(self.shape.len(), 2);
        self.shape[1]
    }

    pub fn rows(&self) -> usize {
        self.shape.first().copied().unwrap_or(0)
    }

    /// Row `i` of a matrix.
    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.row_width();
        &self.data[i * w..(i + 1) * w]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let w = self.row_width();
        &mut self.data[i * w..(i + 1) * w]
    }

    fn check_same_shape(&self, other: &Tensor) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::Shape(format!(
                "{:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn hadamard(&self, other: &Tensor) -> Result<Tensor> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn zip_with(&self, other: &Tensor, f: impl Fn(f64, f64) -> f64) -> Result<Tensor> {
        self.check_same_shape(other)?;
        Ok(Tensor {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, alpha: f64) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&a| a * alpha).collect(),
        }
    }

    /// `self += alpha * x`
    pub fn axpy(&mut self, alpha: f64, x: &Tensor) -> Result<()> {
        self.check_same_shape(x)?;
        axpy(alpha, &x.data, &mut self.data);
        Ok(())
    }

    pub fn fill(&mut self, value: f64) {
        self.data.iter_mut().for_each(|v| *v = value);
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Matrix-vector product for a 2-D tensor.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if self.shape.len() != 2 || self.shape[1] != x.len() {
            return Err(Error::Shape(format!(
                "matvec {:?} x [{}]",
                self.shape,
                x.len()
            )));
        }
        Ok((0..self.shape[0]).map(|i| dot(self.row(i), x)).collect())
    }

    /// Contracts the middle mode of an `a × b × c` tensor with a length-`b` vector,
    /// returning the `a × c` matrix `M[i][k] = Σ_j T[i][j][k] · x[j]`.
    pub fn contract_middle(&self, x: &[f64]) -> Result<Tensor> {
        if self.shape.len() != 3 || self.shape[1] != x.len() {
            return Err(Error::Shape(format!(
                "contract_middle {:?} with [{}]",
                self.shape,
                x.len()
            )));
        }
        let (a, b, c) = (self.shape[0], self.shape[1], self.shape[2]);
        let mut out = vec![0.0; a * c];
        for i in 0..a {
            let dst = &mut out[i * c..(i + 1) * c];
            for (j, &xj) in x.iter().enumerate() {
                let base = (i * b + j) * c;
                axpy(xj, &self.data[base..base + c], dst);
            }
        }
        Tensor::new(vec![a, c], out)
    }

    /// `y[k] = Σ_i x[i] · M[i][k]` for a 2-D tensor.
    pub fn vecmat(&self, x: &[f64]) -> Result<Vec<f64>> {
        if self.shape.len() != 2 || self.shape[0] != x.len() {
            return Err(Error::Shape(format!(
                "vecmat [{}] x {:?}",
                x.len(),
                self.shape
            )));
        }
        let c = self.shape[1];
        let mut out = vec![0.0; c];
        for (i, &xi) in x.iter().enumerate() {
            axpy(xi, &self.data[i * c..(i + 1) * c], &mut out);
        }
        Ok(out)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `λ·a + (1−λ)·b`. For `λ ∈ [0, 1]` each component is clamped to its endpoints,
/// since rounding can otherwise land one ulp outside them.
pub fn lerp(lambda: f64, a: &[f64], b: &[f64]) -> Vec<f64> {
    let inside = (0.0..=1.0).contains(&lambda);
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let v = lambda * x + (1.0 - lambda) * y;
            if inside {
                v.clamp(x.min(y), x.max(y))
            } else {
                v
            }
        })
        .collect()
}

pub fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tensor(shape: &[usize]) -> impl Strategy<Value = Tensor> {
        let n: usize = shape.iter().product();
        let shape = shape.to_vec();
        proptest::collection::vec(-10.0f64..10.0, n)
            .prop_map(move |d| Tensor::new(shape.clone(), d).unwrap())
    }

    #[test]
    fn shape_checked() {
        assert!(Tensor::new(vec![2, 3], vec![0.0; 5]).is_err());
        let a = Tensor::zeros(&[2, 3]);
        let b = Tensor::zeros(&[3, 2]);
        assert!(a.add(&b).is_err());
    }

    proptest! {
        #[test]
        fn elementwise_matches_loops(a in tensor(&[4, 5]), b in tensor(&[4, 5]), s in -3.0f64..3.0) {
            let sum = a.add(&b).unwrap();
            let diff = a.sub(&b).unwrap();
            let prod = a.hadamard(&b).unwrap();
            let scaled = a.scale(s);
            for i in 0..4 {
                for j in 0..5 {
                    let (x, y) = (a.data()[i * 5 + j], b.data()[i * 5 + j]);
                    prop_assert!((sum.row(i)[j] - (x + y)).abs() <= 1e-12);
                    prop_assert!((diff.row(i)[j] - (x - y)).abs() <= 1e-12);
                    prop_assert!((prod.row(i)[j] - x * y).abs() <= 1e-12);
                    prop_assert!((scaled.row(i)[j] - s * x).abs() <= 1e-12);
                }
            }
            let mut naive = 0.0;
            for v in a.data() { naive += v; }
            prop_assert!((a.sum() - naive).abs() <= 1e-12);
        }

        #[test]
        fn contractions_match_loops(t in tensor(&[3, 4, 5]), x in proptest::collection::vec(-5.0f64..5.0, 4),
                                    m in tensor(&[6, 4]), y in proptest::collection::vec(-5.0f64..5.0, 3)) {
            let c = t.contract_middle(&x).unwrap();
            for i in 0..3 {
                for k in 0..5 {
                    let mut acc = 0.0;
                    for j in 0..4 { acc += t.data()[(i * 4 + j) * 5 + k] * x[j]; }
                    prop_assert!((c.row(i)[k] - acc).abs() <= 1e-12);
                }
            }
            let mv = m.matvec(&x).unwrap();
            for i in 0..6 {
                let mut acc = 0.0;
                for j in 0..4 { acc += m.data()[i * 4 + j] * x[j]; }
                prop_assert!((mv[i] - acc).abs() <= 1e-12);
            }
            let vm = c.vecmat(&y).unwrap();
            for k in 0..5 {
                let mut acc = 0.0;
                for i in 0..3 { acc += y[i] * c.row(i)[k]; }
                prop_assert!((vm[k] - acc).abs() <= 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn lerp_stays_between_endpoints(a in -4.0f64..4.0, b in -4.0f64..4.0, l in 0.0f64..=1.0) {
            let v = lerp(l, &[a], &[b])[0];
            prop_assert!(v >= a.min(b) && v <= a.max(b));
        }
    }

    #[test]
    fn lerp_endpoints_and_extrapolation() {
        assert_eq!(lerp(1.0, &[0.1], &[0.7]), vec![0.1]);
        assert_eq!(lerp(0.0, &[0.1], &[0.7]), vec![0.7]);
        assert!((lerp(2.0, &[1.0], &[0.0])[0] - 2.0).abs() < 1e-15);
    }
}
