use serde::{Deserialize, Serialize};

use super::ProbError;

/// Per-letter distortion `d(u, û)`, rows indexed by source symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct DistortionMeasure {
    rows: Vec<Vec<f64>>,
    recon_size: usize,
}

impl DistortionMeasure {
    /// Rectangular, finite, nonnegative entries.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, ProbError> {
        let recon_size = rows.first().map(Vec::len).ok_or(ProbError::Empty)?;
        if recon_size == 0 {
            return Err(ProbError::Empty);
        }
        for (row, values) in rows.iter().enumerate() {
            if values.len() != recon_size {
                return Err(ProbError::RaggedKernel { row });
            }
            if let Some(index) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
                return Err(ProbError::Negative {
                    index: row * recon_size + index,
                    value: values[index],
                });
            }
        }
        Ok(Self { rows, recon_size })
    }

    /// Rectangular check only; finiteness and sign are left to [`Self::check`].
    pub fn new_unchecked(rows: Vec<Vec<f64>>) -> Result<Self, ProbError> {
        let recon_size = rows.first().map(Vec::len).ok_or(ProbError::Empty)?;
        if let Some(row) = rows.iter().position(|r| r.len() != recon_size) {
            return Err(ProbError::RaggedKernel { row });
        }
        Ok(Self { rows, recon_size })
    }

    pub fn check(&self) -> Result<(), ProbError> {
        Self::new(self.rows.clone()).map(|_| ())
    }

    pub fn hamming(size: usize) -> Self {
        let rows = (0..size)
            .map(|u| (0..size).map(|v| if u == v { 0.0 } else { 1.0 }).collect())
            .collect();
        Self {
            rows,
            recon_size: size,
        }
    }

    pub fn source_size(&self) -> usize {
        self.rows.len()
    }

    pub fn recon_size(&self) -> usize {
        self.recon_size
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.rows[u][v]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn max(&self) -> f64 {
        self.rows.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// `(1/L) Σ_k d(u_k, v_k)`.
    pub fn block(&self, source: &[usize], recon: &[usize]) -> f64 {
        debug_assert_eq!(source.len(), recon.len());
        if source.is_empty() {
            return 0.0;
        }
        let total: f64 = source
            .iter()
            .zip(recon)
            .map(|(&u, &v)| self.rows[u][v])
            .sum();
        total / source.len() as f64
    }
}

impl TryFrom<Vec<Vec<f64>>> for DistortionMeasure {
    type Error = ProbError;

    fn try_from(value: Vec<Vec<f64>>) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<DistortionMeasure> for Vec<Vec<f64>> {
    fn from(value: DistortionMeasure) -> Self {
        value.rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hamming_block_average() {
        let d = DistortionMeasure::hamming(2);
        assert_eq!(d.block(&[0, 1, 1, 0], &[0, 0, 1, 1]), 0.5);
        assert_eq!(d.max(), 1.0);
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(DistortionMeasure::new(vec![vec![0.0, f64::INFINITY]]).is_err());
        assert!(DistortionMeasure::new(vec![vec![0.0, -1.0]]).is_err());
        assert!(DistortionMeasure::new(vec![vec![0.0], vec![0.0, 1.0]]).is_err());
    }
}
