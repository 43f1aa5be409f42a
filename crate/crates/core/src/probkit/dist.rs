//! Finite distributions, conditional kernels and joint tables.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ProbError, PROB_TOLERANCE};

/// A probability distribution over `{0, .., len-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbVector {
    probs: Vec<f64>,
}

impl ProbVector {
    pub fn new(probs: Vec<f64>) -> Result<Self, ProbError> {
        check_weights(&probs)?;
        Ok(Self { probs })
    }

    /// Builds a distribution from nonnegative weights, normalizing them.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self, ProbError> {
        if weights.is_empty() {
            return Err(ProbError::Empty);
        }
        for (index, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(ProbError::Negative { index, value: w });
            }
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(ProbError::NotNormalized { sum: total });
        }
        Ok(Self {
            probs: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    pub fn uniform(len: usize) -> Self {
        assert!(len > 0, "uniform distribution needs a nonempty alphabet");
        Self {
            probs: vec![1.0 / len as f64; len],
        }
    }

    pub fn point_mass(len: usize, at: usize) -> Self {
        assert!(at < len, "point mass outside the alphabet");
        let mut probs = vec![0.0; len];
        probs[at] = 1.0;
        Self { probs }
    }

    /// Bernoulli law on `{0, 1}` with `P(1) = p`.
    pub fn bernoulli(p: f64) -> Result<Self, ProbError> {
        Self::new(vec![1.0 - p, p])
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }

    /// Draws an index with probability `probs[i]` by inverting the CDF at one
    /// uniform draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_index(&self.probs, rng.gen::<f64>())
    }
}

impl TryFrom<Vec<f64>> for ProbVector {
    type Error = ProbError;

    fn try_from(value: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<ProbVector> for Vec<f64> {
    fn from(value: ProbVector) -> Self {
        value.probs
    }
}

/// Inverse-CDF lookup of `u ∈ [0, 1)` in `probs`.
///
/// Rounding slack at the top end falls on the last index with positive mass,
/// so a zero-probability symbol is never returned.
pub fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

pub(crate) fn check_weights(probs: &[f64]) -> Result<(), ProbError> {
    if probs.is_empty() {
        return Err(ProbError::Empty);
    }
    for (index, &p) in probs.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(ProbError::Negative { index, value: p });
        }
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > PROB_TOLERANCE {
        return Err(ProbError::NotNormalized { sum });
    }
    Ok(())
}

/// A conditional law `p(y|x)`: one distribution over outputs per input symbol.
///
/// Kernels read from user input may be held unchecked so that diagnostics can
/// name the offending row; [`Kernel::check`] reports the first bad row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Kernel {
    rows: Vec<Vec<f64>>,
    output_size: usize,
}

impl Kernel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, ProbError> {
        let kernel = Self::new_unchecked(rows)?;
        kernel.check()?;
        Ok(kernel)
    }

    /// Keeps the rows as given after checking only that they are rectangular.
    pub fn new_unchecked(rows: Vec<Vec<f64>>) -> Result<Self, ProbError> {
        let output_size = rows.first().map(Vec::len).ok_or(ProbError::Empty)?;
        if let Some(row) = rows.iter().position(|r| r.len() != output_size) {
            return Err(ProbError::RaggedKernel { row });
        }
        Ok(Self { rows, output_size })
    }

    pub fn check(&self) -> Result<(), ProbError> {
        for (row, probs) in self.rows.iter().enumerate() {
            check_weights(probs).map_err(|source| ProbError::InvalidRow {
                row,
                source: Box::new(source),
            })?;
        }
        Ok(())
    }

    pub fn identity(size: usize) -> Self {
        let rows = (0..size)
            .map(|x| ProbVector::point_mass(size, x).into())
            .collect();
        Self {
            rows,
            output_size: size,
        }
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self, ProbError> {
        Self::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// Binary erasure channel; output 2 is the erasure symbol.
    pub fn bec(eps: f64) -> Result<Self, ProbError> {
        Self::new(vec![vec![1.0 - eps, 0.0, eps], vec![0.0, 1.0 - eps, eps]])
    }

    /// Every input maps to the same output law.
    pub fn constant(inputs: usize, row: &ProbVector) -> Self {
        Self {
            rows: vec![row.as_slice().to_vec(); inputs],
            output_size: row.len(),
        }
    }

    pub fn input_size(&self) -> usize {
        self.rows.len()
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.rows[x]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.rows[x][y]
    }

    /// Draws an output for input `x` from one uniform variate.
    pub fn sample_output(&self, x: usize, u: f64) -> usize {
        sample_index(&self.rows[x], u)
    }

    /// Output marginal `q(y) = Σ_x p(x) W(y|x)`.
    pub fn output_marginal(&self, input: &ProbVector) -> Result<ProbVector, ProbError> {
        if input.len() != self.input_size() {
            return Err(ProbError::DimensionMismatch {
                left: input.len(),
                right: self.input_size(),
            });
        }
        let mut q = vec![0.0; self.output_size];
        for (x, row) in self.rows.iter().enumerate() {
            let px = input.get(x);
            for (qy, w) in q.iter_mut().zip(row) {
                *qy += px * w;
            }
        }
        ProbVector::from_weights(q)
    }

    /// True when every row is a point mass and distinct inputs land on
    /// distinct outputs.
    pub fn is_noiseless(&self) -> bool {
        let mut seen = vec![false; self.output_size];
        for row in &self.rows {
            let Some(y) = row.iter().position(|&w| (w - 1.0).abs() <= PROB_TOLERANCE) else {
                return false;
            };
            if seen[y] {
                return false;
            }
            seen[y] = true;
        }
        true
    }

    /// Relabels inputs and outputs: new row `i` is old row `input_perm[i]`,
    /// new column `j` is old column `output_perm[j]`.
    pub fn permuted(&self, input_perm: &[usize], output_perm: &[usize]) -> Self {
        let rows = input_perm
            .iter()
            .map(|&x| output_perm.iter().map(|&y| self.rows[x][y]).collect())
            .collect();
        Self {
            rows,
            output_size: self.output_size,
        }
    }
}

impl TryFrom<Vec<Vec<f64>>> for Kernel {
    type Error = ProbError;

    fn try_from(value: Vec<Vec<f64>>) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<Kernel> for Vec<Vec<f64>> {
    fn from(value: Kernel) -> Self {
        value.rows
    }
}

/// A joint law over a product alphabet, stored row-major (last axis fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPmf {
    dims: Vec<usize>,
    table: Vec<f64>,
}

impl JointPmf {
    pub fn new(dims: Vec<usize>, table: Vec<f64>) -> Result<Self, ProbError> {
        let size: usize = dims.iter().product();
        if dims.is_empty() || size == 0 {
            return Err(ProbError::Empty);
        }
        if table.len() != size {
            return Err(ProbError::DimensionMismatch {
                left: table.len(),
                right: size,
            });
        }
        check_weights(&table)?;
        Ok(Self { dims, table })
    }

    /// `p(x, y) = p(x) W(y|x)`.
    pub fn from_input_and_channel(input: &ProbVector, channel: &Kernel) -> Result<Self, ProbError> {
        if input.len() != channel.input_size() {
            return Err(ProbError::DimensionMismatch {
                left: input.len(),
                right: channel.input_size(),
            });
        }
        let ny = channel.output_size();
        let mut table = Vec::with_capacity(input.len() * ny);
        for x in 0..input.len() {
            table.extend(channel.row(x).iter().map(|w| input.get(x) * w));
        }
        Self::new(vec![input.len(), ny], table)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn as_prob_vector(&self) -> ProbVector {
        ProbVector {
            probs: self.table.clone(),
        }
    }

    /// Flat index of a multi-index.
    pub fn index_of(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.dims.len());
        coords
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&c, &d)| acc * d + c)
    }

    pub fn coords_of(&self, mut index: usize) -> Vec<usize> {
        let mut coords = vec![0; self.dims.len()];
        for (c, &d) in coords.iter_mut().zip(&self.dims).rev() {
            *c = index % d;
            index /= d;
        }
        coords
    }

    pub fn prob(&self, coords: &[usize]) -> f64 {
        self.table[self.index_of(coords)]
    }

    pub fn marginal(&self, axis: usize) -> ProbVector {
        let mut m = vec![0.0; self.dims[axis]];
        for (i, &p) in self.table.iter().enumerate() {
            m[self.coords_of(i)[axis]] += p;
        }
        ProbVector { probs: m }
    }
}
