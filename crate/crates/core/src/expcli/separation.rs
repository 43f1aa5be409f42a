use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::infosolvers::{blahut_capacity, distortion_rate, DEFAULT_MAX_ITERS, DEFAULT_TOLERANCE};
use crate::linkcodes::packed::{enumerate_sequences, pack_index, unpack_index, PackedSeq};
use crate::linkcodes::{build_channel_code, emulate_pipe_over_dmc, ideal_pipe, LinkCodeConfig, LinkCodeReport};
use crate::netmodel::{CodeParameters, NetError, NetworkSpec, Signal};
use crate::probkit::stats::{pooled_stderr, Summary};
use crate::probkit::{DistortionMeasure, Kernel, Label, ProbVector, RngStream, Role};
use crate::stacking::{
    stack_network, stacked_distortions, StackedCode, StackedDecoderView, StackedEncoderView,
    StackedNetwork,
};

use super::lemma1::point_to_point;
use super::ExpError;

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeparationConfig {
    pub crossover: f64,
    /// Source symbols per layer (`L`) and channel uses (`n`); `κ = L / n`.
    pub source_len: usize,
    pub channel_uses: usize,
    pub layers: usize,
    /// Quantizer codebook sizes, as `log2` of the number of codewords.
    pub quantizer_bits: Vec<usize>,
    pub trials: Option<u64>,
    pub pe_trials: u64,
    pub link: LinkCodeConfig,
}

impl Default for SeparationConfig {
    fn default() -> Self {
        Self {
            crossover: 0.11,
            source_len: 1,
            channel_uses: 1,
            layers: 24,
            quantizer_bits: vec![6, 8, 10],
            trials: None,
            pe_trials: 10_000,
            link: LinkCodeConfig::default(),
        }
    }
}

/// Random quantizer with minimum-distortion encoding.
#[derive(Debug, Clone)]
pub struct Quantizer {
    pub bits: usize,
    pub block: usize,
    codebook: Vec<Vec<usize>>,
    packed: Vec<PackedSeq>,
    distortion: DistortionMeasure,
}

impl Quantizer {
    /// `2^bits` words of length `block` drawn i.i.d. from `output`, or every
    /// sequence when they all fit.
    pub fn random(
        bits: usize,
        block: usize,
        output: &ProbVector,
        distortion: &DistortionMeasure,
        rng: &RngStream,
    ) -> Self {
        let size = 1usize << bits;
        let nv = distortion.recon_size();
        let lossless = (block as f64) * (nv as f64).log2() <= bits as f64 + 1e-9;
        let codebook: Vec<Vec<usize>> = if lossless {
            let all = enumerate_sequences(nv, block);
            (0..size).map(|i| all[i % all.len()].clone()).collect()
        } else {
            let mut r = rng.rng();
            (0..size).map(|_| (0..block).map(|_| output.sample(&mut r)).collect()).collect()
        };
        let packed = codebook.iter().map(|c| PackedSeq::new(c, nv)).collect();
        Self {
            bits,
            block,
            codebook,
            packed,
            distortion: distortion.clone(),
        }
    }

    /// Lowest-index codeword of least distortion.
    pub fn encode(&self, u: &[usize]) -> usize {
        let nu = self.distortion.source_size();
        let nv = self.distortion.recon_size();
        let pu = PackedSeq::new(u, nu);
        let weights: Vec<f64> = (0..nu * nv).map(|i| self.distortion.get(i / nv, i % nv)).collect();
        let mut counts = vec![0u32; nu * nv];
        let mut best = (f64::INFINITY, 0);
        for (i, word) in self.packed.iter().enumerate() {
            pu.joint_counts_into(word, &mut counts);
            let d: f64 = counts.iter().zip(&weights).map(|(&c, &w)| c as f64 * w).sum();
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }

    pub fn codeword(&self, index: usize) -> &[usize] {
        &self.codebook[index]
    }
}

/// Source code then link transport over a single bundled edge: at stacked
/// time `t` the sender quantizes source chunk `t` and ships the index as
/// big-endian bits; the sink maps every received index back to its codeword.
pub struct SeparatedCode {
    pub layers: usize,
    pub quantizer: Arc<Quantizer>,
}

impl StackedCode for SeparatedCode {
    fn name(&self) -> &str {
        "separated"
    }

    fn layers(&self) -> usize {
        self.layers
    }

    fn encode(&self, view: &StackedEncoderView<'_>, _: &RngStream) -> Result<Vec<Vec<Signal>>, NetError> {
        let k = self.quantizer.block;
        let chunk = view.source.get((view.t - 1) * k..view.t * k);
        let bits = match chunk {
            Some(u) if view.base.demands.first().is_some_and(|d| d.source == view.node) => {
                pack_index(self.quantizer.encode(u) as u64, self.quantizer.bits)
            }
            _ => Vec::new(),
        };
        Ok(vec![vec![Signal::Bits(bits)]; view.out_edges.len()])
    }

    fn decode(&self, view: &StackedDecoderView<'_>, _: &RngStream) -> Result<Vec<usize>, NetError> {
        let q = &self.quantizer;
        let mut out = Vec::with_capacity(self.layers * view.params.block_len);
        for step in view.received {
            let mut bits = step
                .first()
                .and_then(|lanes| lanes[0].bits())
                .map(<[bool]>::to_vec)
                .unwrap_or_default();
            bits.resize(q.bits, false);
            out.extend_from_slice(q.codeword(unpack_index(&bits) as usize));
        }
        out.resize(self.layers * view.params.block_len, 0);
        Ok(out)
    }

    fn check(&self, net: &StackedNetwork, params: &CodeParameters) -> Result<(), NetError> {
        if self.layers * params.block_len != params.channel_uses * self.quantizer.block {
            return Err(NetError::Code("quantizer blocks must tile the source block".into()));
        }
        if net.lanes(0) != 1 {
            return Err(NetError::Code("separated code needs a bundled link".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationPoint {
    pub quantizer_bits: usize,
    /// Source symbols per quantizer index.
    pub quantizer_block: usize,
    pub quantizer_rate: f64,
    /// Channel code rate: one index per stacked use.
    pub link_rate: f64,
    pub p_e: f64,
    pub p_e_stderr: f64,
    pub excess_bound: f64,
    #[serde(rename = "D_noisy")]
    pub d_noisy: f64,
    pub stderr_noisy: f64,
    #[serde(rename = "D_pipe")]
    pub d_pipe: f64,
    pub stderr_pipe: f64,
    pub pooled_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationReport {
    pub capacity: f64,
    pub kappa: f64,
    pub layers: usize,
    pub trials: u64,
    /// Bits per stacked use carried by the capacity pipe.
    pub pipe_bits: usize,
    #[serde(rename = "D_target")]
    pub d_target: f64,
    /// Values of the largest quantizer.
    #[serde(rename = "D_noisy")]
    pub d_noisy: f64,
    pub stderr_noisy: f64,
    #[serde(rename = "D_pipe")]
    pub d_pipe: f64,
    pub stderr_pipe: f64,
    pub excess_bound: f64,
    pub points: Vec<SeparationPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparationChecks {
    pub above_floor: bool,
    pub within_bound: bool,
    pub monotone: bool,
}

impl SeparationReport {
    pub fn checks(&self) -> SeparationChecks {
        let p = &self.points;
        SeparationChecks {
            above_floor: p.iter().all(|q| {
                q.d_noisy >= self.d_target - 3.0 * q.stderr_noisy && q.d_pipe >= self.d_target - 3.0 * q.stderr_pipe
            }),
            within_bound: p
                .iter()
                .all(|q| (q.d_noisy - q.d_pipe).abs() <= q.excess_bound + 3.0 * q.pooled_stderr),
            monotone: p.windows(2).all(|w| {
                w[1].d_noisy <= w[0].d_noisy + 3.0 * pooled_stderr(w[0].stderr_noisy, w[1].stderr_noisy)
                    && w[1].d_pipe <= w[0].d_pipe + 3.0 * pooled_stderr(w[0].stderr_pipe, w[1].stderr_pipe)
            }),
        }
    }
}

fn mean_stderr(per_trial: &[Vec<f64>]) -> (f64, f64) {
    let mut s = Summary::new();
    for t in per_trial {
        s.push(t[0]);
    }
    (s.mean(), s.stderr())
}

/// Uniform binary source over a BSC: the same separated scheme runs over the
/// channel-coded link and over a capacity pipe, on coupled streams.
pub fn separation_experiment(cfg: &SeparationConfig, trials: u64, rng: &RngStream) -> Result<SeparationReport, ExpError> {
    let trials = cfg.trials.unwrap_or(trials);
    let (l, n, big_n) = (cfg.source_len, cfg.channel_uses, cfg.layers);
    if l == 0 || n == 0 || big_n == 0 {
        return Err(ExpError::Scenario("source_len, channel_uses and layers must be positive".into()));
    }
    let channel = Kernel::bsc(cfg.crossover)?;
    let base: NetworkSpec = point_to_point(&channel);
    let source = ProbVector::uniform(2);
    let hamming = DistortionMeasure::hamming(2);
    let capacity = blahut_capacity(&channel, DEFAULT_TOLERANCE, DEFAULT_MAX_ITERS)?.capacity;
    let kappa = l as f64 / n as f64;
    let d_target = distortion_rate(&source, &hamming, capacity / kappa, DEFAULT_TOLERANCE)?.distortion;
    if (big_n * l) % n != 0 {
        return Err(ExpError::Scenario("N·L must be a multiple of n".into()));
    }
    let block = big_n * l / n;
    let pipe_bits = (big_n as f64 * capacity + 1e-9).floor() as usize;
    let params = CodeParameters::new(l, n);
    let stacked = stack_network(&base, big_n)?;

    let mut points = Vec::with_capacity(cfg.quantizer_bits.len());
    for &bits in &cfg.quantizer_bits {
        let link_rate = bits as f64 / big_n as f64;
        if bits > pipe_bits {
            return Err(ExpError::Scenario(format!(
                "{bits}-bit indices do not fit the {pipe_bits}-bit capacity pipe"
            )));
        }
        let q_rate = bits as f64 / block as f64;
        let test = distortion_rate(&source, &hamming, q_rate.min(1.0), DEFAULT_TOLERANCE)?;
        let output = test.test_channel.output_marginal(&source)?;
        let key = rng.child(Role::Codebook).child(Label::Index(bits as u64));
        let quantizer = Arc::new(Quantizer::random(bits, block, &output, &hamming, &key.child(Label::Index(0))));
        let link = Arc::new(build_channel_code(&channel, big_n, link_rate, &key.child(Label::Edge(0)), &cfg.link)?);
        let (p_e, p_e_stderr) = link.estimate_error(cfg.pe_trials, &rng.child(Role::Noise).child(Label::Index(bits as u64)));
        let report = LinkCodeReport::new(vec![p_e], base.edges.len(), base.d_max());

        let code = SeparatedCode {
            layers: big_n,
            quantizer,
        };
        let noisy = emulate_pipe_over_dmc(stacked.clone(), 0, link)?;
        let pipe = ideal_pipe(stacked.clone(), 0, pipe_bits);
        let trial_rng = rng.child(Role::Trial);
        let (d_noisy, stderr_noisy) = mean_stderr(&stacked_distortions(&noisy, &code, &params, trials, &trial_rng)?);
        let (d_pipe, stderr_pipe) = mean_stderr(&stacked_distortions(&pipe, &code, &params, trials, &trial_rng)?);
        points.push(SeparationPoint {
            quantizer_bits: bits,
            quantizer_block: block,
            quantizer_rate: q_rate,
            link_rate,
            p_e,
            p_e_stderr,
            excess_bound: report.excess_bound,
            d_noisy,
            stderr_noisy,
            d_pipe,
            stderr_pipe,
            pooled_stderr: pooled_stderr(stderr_noisy, stderr_pipe),
        });
    }
    let last = points
        .last()
        .cloned()
        .ok_or_else(|| ExpError::Scenario("no quantizer sizes given".into()))?;
    Ok(SeparationReport {
        capacity,
        kappa,
        layers: big_n,
        trials,
        pipe_bits,
        d_target,
        d_noisy: last.d_noisy,
        stderr_noisy: last.stderr_noisy,
        d_pipe: last.d_pipe,
        stderr_pipe: last.stderr_pipe,
        excess_bound: last.excess_bound,
        points,
    })
}
