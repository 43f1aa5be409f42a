use crate::netmodel::NetError;
use crate::probkit::{
    l1_slices, mutual_information, EmpiricalJointType, JointPmf, Kernel, ProbVector, RngStream,
    Role,
};

use super::packed::{enumerate_sequences, PackedSeq};
use super::{index_bits, LinkCodeConfig, LinkError};

/// Simulates `N` uses of a DMC from a finite-rate description.
///
/// The codebook holds `2^⌈NR⌉` output sequences drawn i.i.d. from the output
/// marginal of `input ∘ channel`. Given inputs `x^N`, the likelihood encoder
/// picks index `w` with probability proportional to `∏ P(x_i | y_i(w))` and
/// the outputs are that codeword. When every output sequence fits in the
/// index space the codebook lists each sequence once, weighted by
/// `∏ W(y_i | x_i)`, which samples the channel exactly.
#[derive(Debug, Clone)]
pub struct SynthesisCode {
    channel: Kernel,
    input: ProbVector,
    layers: usize,
    rate: f64,
    information: f64,
    index_bits: usize,
    codebook: Vec<Vec<usize>>,
    packed: Vec<PackedSeq>,
    log_weight: Vec<f64>,
}

pub fn build_synthesis_code(
    input: &ProbVector,
    channel: &Kernel,
    layers: usize,
    rate: f64,
    rng: &RngStream,
    config: &LinkCodeConfig,
) -> Result<SynthesisCode, LinkError> {
    if layers == 0 {
        return Err(NetError::InvalidLayerCount(layers).into());
    }
    if !rate.is_finite() || rate < 0.0 {
        return Err(LinkError::InvalidRate(rate));
    }
    let information = mutual_information(input, channel)?;
    if config.enforce_rate && rate + 1e-9 < information + config.margin {
        return Err(LinkError::RateBelowInformation {
            rate,
            information,
            margin: config.margin,
        });
    }
    let bits = index_bits(layers, rate);
    if bits > config.cap_bits {
        return Err(LinkError::CodebookCap { bits, cap: config.cap_bits });
    }
    let size = 1usize << bits;
    let (nx, ny) = (channel.input_size(), channel.output_size());
    let q = channel.output_marginal(input)?;
    let full_space = (layers as f64) * (ny as f64).log2() <= bits as f64 + 1e-9;
    let (codebook, log_weight): (Vec<Vec<usize>>, Vec<f64>) = if full_space {
        let book = enumerate_sequences(ny, layers);
        let w = (0..nx * ny).map(|i| channel.prob(i / ny, i % ny).ln()).collect();
        (book, w)
    } else {
        let mut r = rng.rng();
        let book = (0..size)
            .map(|_| (0..layers).map(|_| q.sample(&mut r)).collect())
            .collect();
        let w = (0..nx * ny)
            .map(|i| {
                let (x, y) = (i / ny, i % ny);
                let joint = input.get(x) * channel.prob(x, y);
                if joint > 0.0 {
                    (joint / q.get(y)).ln()
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        (book, w)
    };
    let packed = codebook.iter().map(|c| PackedSeq::new(c, ny)).collect();
    Ok(SynthesisCode {
        channel: channel.clone(),
        input: input.clone(),
        layers,
        rate,
        information,
        index_bits: bits,
        codebook,
        packed,
        log_weight,
    })
}

impl SynthesisCode {
    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn information(&self) -> f64 {
        self.information
    }

    pub fn index_bits(&self) -> usize {
        self.index_bits
    }

    pub fn channel(&self) -> &Kernel {
        &self.channel
    }

    pub fn input(&self) -> &ProbVector {
        &self.input
    }

    pub fn codeword(&self, index: usize) -> &[usize] {
        &self.codebook[index]
    }

    /// `p(x) W(y|x)` as an `|X| × |Y|` table.
    pub fn target(&self) -> JointPmf {
        JointPmf::from_input_and_channel(&self.input, &self.channel).expect("valid by construction")
    }

    /// Unnormalized log weights over the codebook, with codewords that
    /// contradict `x` handled as follows: if every codeword has an impossible
    /// pair, only those with the fewest impossible pairs stay eligible and are
    /// weighted by their remaining likelihood.
    fn log_weights(&self, x: &[usize]) -> Result<Vec<f64>, NetError> {
        let nx = self.channel.input_size();
        if x.len() != self.layers {
            return Err(NetError::LayerMismatch {
                expected: self.layers,
                got: x.len(),
            });
        }
        if x.iter().any(|&s| s >= nx) {
            return Err(NetError::Code("synthesis input outside the channel alphabet".into()));
        }
        let px = PackedSeq::new(x, nx);
        let ny = self.channel.output_size();
        let mut counts = vec![0u32; nx * ny];
        let mut scored = Vec::with_capacity(self.packed.len());
        let mut fewest = u32::MAX;
        for word in &self.packed {
            px.joint_counts_into(word, &mut counts);
            let mut impossible = 0u32;
            let mut ll = 0.0;
            for (&c, &lw) in counts.iter().zip(&self.log_weight) {
                if c == 0 {
                    continue;
                }
                if lw == f64::NEG_INFINITY {
                    impossible += c;
                } else {
                    ll += c as f64 * lw;
                }
            }
            fewest = fewest.min(impossible);
            scored.push((impossible, ll));
        }
        Ok(scored
            .into_iter()
            .map(|(imp, ll)| if imp == fewest { ll } else { f64::NEG_INFINITY })
            .collect())
    }

    /// Selection probabilities over the codebook for input `x`.
    pub fn selection_weights(&self, x: &[usize]) -> Result<Vec<f64>, NetError> {
        let lw = self.log_weights(x)?;
        let max = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = lw.iter().map(|&l| (l - max).exp()).collect();
        let total: f64 = w.iter().sum();
        Ok(w.into_iter().map(|v| v / total).collect())
    }

    /// Index chosen by the likelihood encoder for uniform draw `u`.
    pub fn select(&self, x: &[usize], u: f64) -> Result<usize, NetError> {
        let lw = self.log_weights(x)?;
        let max = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = lw.iter().map(|&l| (l - max).exp()).collect();
        let total: f64 = w.iter().sum();
        let target = u * total;
        let mut acc = 0.0;
        let mut last = 0;
        for (i, &v) in w.iter().enumerate() {
            if v > 0.0 {
                acc += v;
                last = i;
                if target < acc {
                    return Ok(i);
                }
            }
        }
        Ok(last)
    }

    /// Draws `x^N` i.i.d. from the input law and synthesizes its outputs;
    /// returns the TV distance between the empirical joint type of the `N`
    /// pairs and `p(x) W(y|x)`.
    pub fn sample_tv(&self, rng: &RngStream) -> Result<f64, NetError> {
        let mut r = rng.child(Role::Source).rng();
        let x: Vec<usize> = (0..self.layers).map(|_| self.input.sample(&mut r)).collect();
        let w = self.select(&x, rng.child(Role::Selection).uniform())?;
        let ny = self.channel.output_size();
        let mut ty = EmpiricalJointType::zeros(self.channel.input_size(), ny);
        for (&a, &b) in x.iter().zip(&self.codebook[w]) {
            ty.push(a, b)?;
        }
        let target = self.target();
        Ok(0.5 * l1_slices(&ty.frequencies(), target.table())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unchecked() -> LinkCodeConfig {
        LinkCodeConfig {
            enforce_rate: false,
            ..LinkCodeConfig::default()
        }
    }

    #[test]
    fn identity_channel_copies_inputs() {
        let cfg = LinkCodeConfig::default();
        let code = build_synthesis_code(&ProbVector::uniform(2), &Kernel::identity(2), 16, 1.05, &RngStream::new(1), &cfg)
            .unwrap();
        let x: Vec<usize> = (0..16).map(|i| (i * 5 + 1) % 3 % 2).collect();
        let w = code.select(&x, 0.7).unwrap();
        assert_eq!(code.codeword(w), &x[..]);
    }

    #[test]
    fn weights_normalize() {
        let code = build_synthesis_code(
            &ProbVector::uniform(2),
            &Kernel::bsc(0.2).unwrap(),
            8,
            0.6,
            &RngStream::new(4),
            &LinkCodeConfig::default(),
        )
        .unwrap();
        let w = code.selection_weights(&[0, 1, 1, 0, 0, 0, 1, 0]).unwrap();
        assert_eq!(w.len(), 32);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rate_below_information_rejected() {
        let err = build_synthesis_code(
            &ProbVector::uniform(2),
            &Kernel::bsc(0.2).unwrap(),
            8,
            0.3,
            &RngStream::new(4),
            &LinkCodeConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, LinkError::RateBelowInformation { .. }));
    }

    #[test]
    fn impossible_pairs_fall_back() {
        // x = 0 never yields y = 1, so codewords containing a 1 contradict x = 0^6
        let z = Kernel::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        let code = build_synthesis_code(&ProbVector::uniform(2), &z, 6, 0.5, &RngStream::new(2), &unchecked()).unwrap();
        let w = code.selection_weights(&[0, 0, 0, 0, 0, 0]).unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let i = code.select(&[0; 6], 0.3).unwrap();
        assert!(w[i] > 0.0);
    }

    #[test]
    fn full_description_samples_channel_exactly() {
        let bsc = Kernel::bsc(0.2).unwrap();
        let code = build_synthesis_code(&ProbVector::bernoulli(0.3).unwrap(), &bsc, 1, 1.0, &RngStream::new(2), &unchecked())
            .unwrap();
        let w = code.selection_weights(&[1]).unwrap();
        let p1 = w.iter().enumerate().filter(|(i, _)| code.codeword(*i)[0] == 1).map(|(_, v)| v).sum::<f64>();
        assert!((p1 - 0.8).abs() < 1e-12);
    }
}
