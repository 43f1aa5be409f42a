use serde::{Deserialize, Serialize};

use super::{JointPmf, ProbError};

/// Counts of `(x, y)` pairs across `total` layers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmpiricalJointType {
    x_size: usize,
    y_size: usize,
    counts: Vec<u64>,
    total: u64,
}

impl EmpiricalJointType {
    pub fn zeros(x_size: usize, y_size: usize) -> Self {
        Self {
            x_size,
            y_size,
            counts: vec![0; x_size * y_size],
            total: 0,
        }
    }

    pub fn push(&mut self, x: usize, y: usize) -> Result<(), ProbError> {
        if x >= self.x_size || y >= self.y_size {
            return Err(ProbError::SymbolOutOfRange { x, y });
        }
        self.counts[x * self.y_size + y] += 1;
        self.total += 1;
        Ok(())
    }

    pub fn count(&self, x: usize, y: usize) -> u64 {
        self.counts[x * self.y_size + y]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.x_size, self.y_size)
    }

    /// Normalized type as a flat row-major vector.
    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.total as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    pub fn to_joint(&self) -> Result<JointPmf, ProbError> {
        if self.total == 0 {
            return Err(ProbError::Empty);
        }
        JointPmf::new(vec![self.x_size, self.y_size], self.frequencies())
    }

    /// Counts of the x coordinate alone.
    pub fn x_counts(&self) -> Vec<u64> {
        self.counts
            .chunks(self.y_size)
            .map(|row| row.iter().sum())
            .collect()
    }
}

/// Empirical joint type of a nonempty pair sequence.
pub fn empirical_type(
    pairs: &[(usize, usize)],
    x_size: usize,
    y_size: usize,
) -> Result<EmpiricalJointType, ProbError> {
    if pairs.is_empty() {
        return Err(ProbError::Empty);
    }
    let mut t = EmpiricalJointType::zeros(x_size, y_size);
    for &(x, y) in pairs {
        t.push(x, y)?;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counting_examples() {
        let t = empirical_type(&[(0, 0), (0, 0)], 2, 2).unwrap();
        assert_eq!(t.count(0, 0), 2);
        assert_eq!(t.total(), 2);
        let t = empirical_type(&[(0, 1), (1, 0)], 2, 2).unwrap();
        assert_eq!(t.frequencies(), vec![0.0, 0.5, 0.5, 0.0]);
        assert_eq!(t.x_counts(), vec![1, 1]);
    }

    #[test]
    fn errors() {
        assert!(matches!(empirical_type(&[], 2, 2), Err(ProbError::Empty)));
        assert!(matches!(
            empirical_type(&[(0, 2)], 2, 2),
            Err(ProbError::SymbolOutOfRange { x: 0, y: 2 })
        ));
    }
}
