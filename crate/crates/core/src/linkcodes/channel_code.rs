use rand::Rng;

use crate::infosolvers::{blahut_capacity, DEFAULT_MAX_ITERS, DEFAULT_TOLERANCE};
use crate::netmodel::{parallel_map, NetError};
use crate::probkit::stats::Summary;
use crate::probkit::{Kernel, Label, ProbVector, RngStream, Role};
use crate::stacking::BundleTransport;

use super::packed::{enumerate_sequences, pack_index, unpack_index, PackedSeq};
use super::{index_bits, message_bits, LinkCodeConfig, LinkError};

/// Random block code over `N` uses of a DMC with maximum-likelihood decoding.
///
/// The codebook holds `2^⌈NR⌉` words drawn i.i.d. from the
/// capacity-achieving input law with `rng` as given (or every sequence, when
/// the whole input space fits). A message of `⌊NR⌋` bits selects one of the
/// first `2^⌊NR⌋` words, and the decoder searches those.
#[derive(Debug, Clone)]
pub struct ChannelCode {
    channel: Kernel,
    layers: usize,
    rate: f64,
    capacity: f64,
    input_law: ProbVector,
    codebook: Vec<Vec<usize>>,
    packed: Vec<PackedSeq>,
    message_bits: usize,
    log_w: Vec<f64>,
}

pub fn build_channel_code(
    channel: &Kernel,
    layers: usize,
    rate: f64,
    rng: &RngStream,
    config: &LinkCodeConfig,
) -> Result<ChannelCode, LinkError> {
    if layers == 0 {
        return Err(NetError::InvalidLayerCount(layers).into());
    }
    if !rate.is_finite() || rate < 0.0 {
        return Err(LinkError::InvalidRate(rate));
    }
    let cap = blahut_capacity(channel, DEFAULT_TOLERANCE, DEFAULT_MAX_ITERS)?;
    let capacity = cap.capacity;
    if config.enforce_rate {
        let limit = if channel.is_noiseless() { capacity + 1e-9 } else { capacity - config.margin };
        if rate > limit {
            return Err(LinkError::RateAboveCapacity {
                rate,
                capacity,
                margin: config.margin,
            });
        }
    }
    let bits = index_bits(layers, rate);
    if bits > config.cap_bits {
        return Err(LinkError::CodebookCap { bits, cap: config.cap_bits });
    }
    let size = 1usize << bits;
    let nx = channel.input_size();
    let full_space = (layers as f64) * (nx as f64).log2() <= bits as f64 + 1e-9;
    let codebook: Vec<Vec<usize>> = if full_space {
        let all = enumerate_sequences(nx, layers);
        (0..size).map(|i| all[i % all.len()].clone()).collect()
    } else {
        let mut r = rng.rng();
        (0..size)
            .map(|_| (0..layers).map(|_| cap.optimal_input.sample(&mut r)).collect())
            .collect()
    };
    let packed = codebook.iter().map(|c| PackedSeq::new(c, nx)).collect();
    let ny = channel.output_size();
    let log_w = (0..nx * ny).map(|i| channel.prob(i / ny, i % ny).ln()).collect();
    Ok(ChannelCode {
        channel: channel.clone(),
        layers,
        rate,
        capacity,
        input_law: cap.optimal_input,
        codebook,
        packed,
        message_bits: message_bits(layers, rate),
        log_w,
    })
}

impl ChannelCode {
    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn channel(&self) -> &Kernel {
        &self.channel
    }

    pub fn input_law(&self) -> &ProbVector {
        &self.input_law
    }

    pub fn codebook(&self) -> &[Vec<usize>] {
        &self.codebook
    }

    pub fn message_bits(&self) -> usize {
        self.message_bits
    }

    pub fn messages(&self) -> u64 {
        1 << self.message_bits
    }

    pub fn codeword(&self, message: u64) -> &[usize] {
        &self.codebook[message as usize]
    }

    /// Maximum-likelihood message; ties go to the smallest index.
    pub fn decode(&self, y: &[usize]) -> u64 {
        let ny = self.channel.output_size();
        let py = PackedSeq::new(y, ny);
        let mut counts = vec![0u32; self.log_w.len()];
        let mut best = (f64::NEG_INFINITY, 0u64);
        for m in 0..self.messages() {
            self.packed[m as usize].joint_counts_into(&py, &mut counts);
            let score: f64 = counts
                .iter()
                .zip(&self.log_w)
                .filter(|(&c, _)| c > 0)
                .map(|(&c, &lw)| c as f64 * lw)
                .sum();
            if score > best.0 {
                best = (score, m);
            }
        }
        best.1
    }

    /// Channel outputs for `message`; layer `ℓ` uses `noise / Layer(ℓ)`.
    pub fn transmit(&self, message: u64, noise: &RngStream) -> Vec<usize> {
        self.codeword(message)
            .iter()
            .enumerate()
            .map(|(l, &x)| self.channel.sample_output(x, noise.child(Label::Layer(l + 1)).uniform()))
            .collect()
    }

    /// Block error rate over `trials` uniformly random messages, with its
    /// standard error.
    pub fn estimate_error(&self, trials: u64, rng: &RngStream) -> (f64, f64) {
        let errors = parallel_map(trials, |i| {
            let trial = rng.trial(i);
            let m = trial.child(Label::Index(0)).rng().gen_range(0..self.messages());
            let y = self.transmit(m, &trial.child(Role::Noise));
            Ok::<_, ()>(if self.decode(&y) == m { 0.0 } else { 1.0 })
        })
        .expect("infallible");
        let s = Summary::from_slice(&errors);
        (s.mean(), s.stderr())
    }
}

impl BundleTransport for ChannelCode {
    fn capacity(&self) -> usize {
        self.message_bits
    }

    /// Pads to `⌊NR⌋` bits, sends the message over the `N` copies with noise
    /// from `stream / Noise / Time(t)`, and returns the decoded prefix.
    fn carry(&self, bits: &[bool], t: usize, stream: &RngStream) -> Result<Vec<bool>, NetError> {
        if bits.len() > self.message_bits {
            return Err(NetError::Code(format!(
                "{} bits offered to a {}-bit channel code",
                bits.len(),
                self.message_bits
            )));
        }
        let mut padded = bits.to_vec();
        padded.resize(self.message_bits, false);
        let m = unpack_index(&padded);
        let y = self.transmit(m, &stream.child(Role::Noise).child(Label::Time(t)));
        let mut out = pack_index(self.decode(&y), self.message_bits);
        out.truncate(bits.len());
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_full_enumeration() {
        let cfg = LinkCodeConfig::default();
        let code = build_channel_code(&Kernel::identity(2), 4, 1.0, &RngStream::new(1), &cfg).unwrap();
        assert_eq!(code.codebook().len(), 16);
        assert_eq!(code.message_bits(), 4);
        let (pe, _) = code.estimate_error(2000, &RngStream::new(2));
        assert_eq!(pe, 0.0);
    }

    #[test]
    fn rejects_rate_near_capacity() {
        let cfg = LinkCodeConfig::default();
        let bsc = Kernel::bsc(0.11).unwrap();
        let err = build_channel_code(&bsc, 8, 0.48, &RngStream::new(1), &cfg).unwrap_err();
        assert!(matches!(err, LinkError::RateAboveCapacity { .. }));
        let err = build_channel_code(&bsc, 100, 0.4, &RngStream::new(1), &cfg).unwrap_err();
        assert!(matches!(err, LinkError::CodebookCap { bits: 40, .. }));
    }

    #[test]
    fn carry_roundtrip_on_clean_channel() {
        let cfg = LinkCodeConfig::default();
        let code = build_channel_code(&Kernel::identity(2), 6, 1.0, &RngStream::new(1), &cfg).unwrap();
        let bits = vec![true, false, true];
        let out = code.carry(&bits, 1, &RngStream::new(3)).unwrap();
        assert_eq!(out, bits);
        assert!(code.carry(&[true; 7], 1, &RngStream::new(3)).is_err());
    }

    #[test]
    fn ml_decoder_is_total() {
        let cfg = LinkCodeConfig::default();
        let code = build_channel_code(&Kernel::bsc(0.11).unwrap(), 8, 0.25, &RngStream::new(9), &cfg).unwrap();
        for y in enumerate_sequences(2, 8) {
            assert!(code.decode(&y) < code.messages());
        }
    }
}
