//! Channel capacity by alternating maximization.
//!
//! Each step computes, for every input `x`, the divergence
//! `D(x) = Σ_y W(y|x) log2(W(y|x) / q(y))` against the current output
//! marginal `q`. The mutual information `Σ_x r(x) D(x)` is a lower bound on
//! capacity and `max_x D(x)` an upper bound, so their difference certifies
//! how far the iterate is from optimal.

use serde::Serialize;

use crate::probkit::{Kernel, ProbVector};

use super::SolverError;

#[derive(Debug, Clone, Serialize)]
pub struct CapacityResult {
    /// Mutual information achieved by `optimal_input`, bits per use.
    pub capacity: f64,
    pub optimal_input: ProbVector,
    pub iterations: usize,
    /// Upper bound minus lower bound at the last iterate.
    pub gap: f64,
    pub converged: bool,
}

/// Lower and upper capacity bounds at one iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Iterator over successive capacity bounds, updating the input law in place.
pub struct CapacityIteration<'a> {
    channel: &'a Kernel,
    input: Vec<f64>,
    divergence: Vec<f64>,
}

impl<'a> CapacityIteration<'a> {
    pub fn new(channel: &'a Kernel) -> Self {
        let n = channel.input_size();
        Self {
            channel,
            input: vec![1.0 / n as f64; n],
            divergence: vec![0.0; n],
        }
    }

    pub fn input(&self) -> &[f64] {
        &self.input
    }

    fn bounds(&mut self) -> CapacityBounds {
        let ny = self.channel.output_size();
        let mut q = vec![0.0; ny];
        for (x, &r) in self.input.iter().enumerate() {
            for (qy, &w) in q.iter_mut().zip(self.channel.row(x)) {
                *qy += r * w;
            }
        }
        let mut upper = f64::NEG_INFINITY;
        let mut lower = 0.0;
        for (x, &r) in self.input.iter().enumerate() {
            let d: f64 = self
                .channel
                .row(x)
                .iter()
                .zip(&q)
                .filter(|(&w, _)| w > 0.0)
                .map(|(&w, &qy)| w * (w / qy).log2())
                .sum();
            self.divergence[x] = d;
            upper = upper.max(d);
            lower += r * d;
        }
        CapacityBounds {
            lower: lower.max(0.0),
            upper: upper.max(0.0),
        }
    }

    fn update(&mut self) {
        // multiplicative step; symbols at zero stay at zero
        let dmax = self
            .divergence
            .iter()
            .zip(&self.input)
            .filter(|(_, &r)| r > 0.0)
            .map(|(&d, _)| d)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for (r, &d) in self.input.iter_mut().zip(&self.divergence) {
            if *r > 0.0 {
                *r *= (d - dmax).exp2();
                total += *r;
            }
        }
        self.input.iter_mut().for_each(|r| *r /= total);
    }
}

impl Iterator for CapacityIteration<'_> {
    type Item = CapacityBounds;

    /// Bounds for the current input law, then one update step.
    fn next(&mut self) -> Option<CapacityBounds> {
        let b = self.bounds();
        self.update();
        Some(b)
    }
}

pub fn blahut_capacity(
    channel: &Kernel,
    tol: f64,
    max_iters: usize,
) -> Result<CapacityResult, SolverError> {
    if !(tol > 0.0) {
        return Err(SolverError::InvalidTolerance(tol));
    }
    channel.check()?;
    let mut it = CapacityIteration::new(channel);
    let mut best = None;
    for iteration in 1..=max_iters.max(1) {
        let input = it.input().to_vec();
        let b = it.next().expect("capacity iteration is infinite");
        let gap = b.upper - b.lower;
        best = Some((b.lower, input, iteration, gap));
        if gap <= tol {
            break;
        }
    }
    let (capacity, input, iterations, gap) = best.expect("at least one iteration");
    Ok(CapacityResult {
        capacity,
        optimal_input: ProbVector::from_weights(input)?,
        iterations,
        gap: gap.max(0.0),
        converged: gap <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probkit::{binary_entropy, mutual_information};

    #[test]
    fn noiseless_binary() {
        let r = blahut_capacity(&Kernel::identity(2), 1e-9, 1000).unwrap();
        assert!((r.capacity - 1.0).abs() < 1e-9);
        assert!(r.converged);
    }

    #[test]
    fn bsc_and_bec_closed_forms() {
        let r = blahut_capacity(&Kernel::bsc(0.11).unwrap(), 1e-9, 1000).unwrap();
        assert!((r.capacity - (1.0 - binary_entropy(0.11))).abs() < 1e-6);
        assert!((r.capacity - 0.50009).abs() < 1e-5);
        let r = blahut_capacity(&Kernel::bec(0.3).unwrap(), 1e-9, 1000).unwrap();
        assert!((r.capacity - 0.7).abs() < 1e-6);
    }

    #[test]
    fn asymmetric_channel_certificate() {
        // Z-channel: C = log2(1 + (1-p) p^(p/(1-p))) for crossover p on input 1
        let p: f64 = 0.3;
        let w = Kernel::new(vec![vec![1.0, 0.0], vec![p, 1.0 - p]]).unwrap();
        let r = blahut_capacity(&w, 1e-10, 100_000).unwrap();
        let closed = (1.0 + (1.0 - p) * p.powf(p / (1.0 - p))).log2();
        assert!(r.converged);
        assert!((r.capacity - closed).abs() < 1e-9);
        let mi = mutual_information(&r.optimal_input, &w).unwrap();
        assert!((mi - r.capacity).abs() < 1e-12);
    }

    #[test]
    fn reports_non_convergence() {
        let w = Kernel::new(vec![vec![1.0, 0.0], vec![0.3, 0.7]]).unwrap();
        let r = blahut_capacity(&w, 1e-15, 2).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 2);
        assert!(r.gap > 1e-15);
        assert!(blahut_capacity(&w, 0.0, 10).is_err());
    }
}
