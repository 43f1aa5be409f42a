//! Distances and information measures, in bits.

use super::{Kernel, ProbError, ProbVector};

/// `Σ |a(i) - b(i)|` over two equal-length weight vectors.
pub fn l1_slices(a: &[f64], b: &[f64]) -> Result<f64, ProbError> {
    if a.len() != b.len() {
        return Err(ProbError::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum())
}

pub fn l1_distance(a: &ProbVector, b: &ProbVector) -> Result<f64, ProbError> {
    l1_slices(a.as_slice(), b.as_slice())
}

/// Half the ℓ1 distance; lies in `[0, 1]`.
pub fn tv_distance(a: &ProbVector, b: &ProbVector) -> Result<f64, ProbError> {
    Ok(0.5 * l1_distance(a, b)?)
}

/// `-p log2 p` with the `0 log 0 = 0` convention.
fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

pub fn entropy(p: &ProbVector) -> f64 {
    p.as_slice().iter().map(|&x| plogp(x)).sum()
}

/// `h(p) = -p log2 p - (1-p) log2 (1-p)`.
pub fn binary_entropy(p: f64) -> f64 {
    plogp(p) + plogp(1.0 - p)
}

/// `I(X;Y) = H(Y) - H(Y|X)` for `X ~ input` sent through `channel`.
pub fn mutual_information(input: &ProbVector, channel: &Kernel) -> Result<f64, ProbError> {
    let output = channel.output_marginal(input)?;
    let conditional: f64 = (0..input.len())
        .map(|x| input.get(x) * channel.row(x).iter().map(|&w| plogp(w)).sum::<f64>())
        .sum();
    // cancellation can leave a tiny negative residue
    Ok((entropy(&output) - conditional).max(0.0))
}
