//! Error statistics between SOC series: MAPE, MAPD and RMS.

use crate::error::{Error, Result};

/// Magnitude below which a denominator is treated as zero.
pub const ZERO_TOLERANCE: f64 = 1e-9;

/// Reference and candidate series aligned by index.
#[derive(Debug, Clone, Copy)]
pub struct SeriesPair<'a> {
    pub reference: &'a [f64],
    pub candidate: &'a [f64],
}

impl<'a> SeriesPair<'a> {
    pub fn new(reference: &'a [f64], candidate: &'a [f64]) -> Result<Self> {
        if reference.len() != candidate.len() {
            return Err(Error::Shape {
                expected: reference.len(),
                found: candidate.len(),
            });
        }
        if reference.is_empty() {
            return Err(Error::EmptySeries);
        }
        let non_finite = reference
            .iter()
            .zip(candidate)
            .position(|(a, b)| !(a.is_finite() && b.is_finite()));
        if let Some(index) = non_finite {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            reference,
            candidate,
        })
    }

    fn len(&self) -> f64 {
        self.reference.len() as f64
    }

    fn pairs(&self) -> impl Iterator<Item = (usize, (f64, f64))> + 'a {
        self.reference
            .iter()
            .copied()
            .zip(self.candidate.iter().copied())
            .enumerate()
    }
}

/// Mean absolute percentage error, `100/N · Σ |A − P| / |A|`.
pub fn mape(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    let series = SeriesPair::new(actual, predicted)?;
    let mut sum = 0.0;
    for (index, (a, p)) in series.pairs() {
        if a.abs() <= ZERO_TOLERANCE {
            return Err(Error::DivisionByActualZero { index });
        }
        sum += ((a - p) / a).abs();
    }
    Ok(100.0 * sum / series.len())
}

/// Mean absolute percentage difference between two predicted series,
/// each term divided by the pair mean.
pub fn mapd(predicted_normal: &[f64], predicted_hacked: &[f64]) -> Result<f64> {
    let series = SeriesPair::new(predicted_normal, predicted_hacked)?;
    let mut sum = 0.0;
    for (index, (a, b)) in series.pairs() {
        let mean = (a + b) / 2.0;
        if mean.abs() <= ZERO_TOLERANCE {
            return Err(Error::DivisionByPairMeanZero { index });
        }
        sum += ((a - b) / mean).abs();
    }
    Ok(100.0 * sum / series.len())
}

pub fn rmse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    let series = SeriesPair::new(actual, predicted)?;
    let sum: f64 = series.pairs().map(|(_, (a, p))| (a - p) * (a - p)).sum();
    Ok((sum / series.len()).sqrt())
}
