use crate::error::{Error, Result};
use crate::models::ModelParams;

/// Equal-weight running mean of parameter snapshots.
#[derive(Debug, Clone, Default)]
pub struct SwaAverager {
    mean: Option<ModelParams>,
    count: usize,
}

impl SwaAverager {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn update(&mut self, snapshot: &ModelParams) -> Result<()> {
        self.count += 1;
        let Some(mean) = &mut self.mean else {
            self.mean = Some(snapshot.clone());
            return Ok(());
        };
        if mean.shapes() != snapshot.shapes() {
            return Err(Error::Shape("SWA snapshot shape changed".into()));
        }
        let w = 1.0 / self.count as f64;
        for (m, s) in mean.tensors_mut().into_iter().zip(snapshot.tensors()) {
            for (a, &b) in m.data_mut().iter_mut().zip(s.data()) {
                *a += w * (b - *a);
            }
        }
        Ok(())
    }

    pub fn average(&self) -> Option<&ModelParams> {
        self.mean.as_ref()
    }

    pub fn into_average(self) -> Option<ModelParams> {
        self.mean
    }
}
