use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linkcodes::{build_channel_code, build_synthesis_code, LinkCodeConfig};
use crate::netmodel::parallel_map;
use crate::probkit::stats::Summary;
use crate::probkit::{Kernel, Label, ProbVector, RngStream, Role};

use super::ExpError;

/// Block error rate of random channel codes against `N` and `R`. Each
/// (batch, N, R) point draws one codebook, or with `ensemble` a fresh codebook
/// per trial, which estimates the error rate averaged over the code ensemble.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSweepConfig {
    pub channel: Kernel,
    pub layers: Vec<usize>,
    pub rates: Vec<f64>,
    pub batches: u64,
    pub trials_per_batch: Option<u64>,
    pub ensemble: bool,
    pub link: LinkCodeConfig,
}

impl Default for ChannelSweepConfig {
    fn default() -> Self {
        Self {
            channel: Kernel::bsc(0.11).expect("valid crossover"),
            layers: vec![8, 16, 24],
            rates: vec![0.25, 0.75],
            batches: 30,
            trials_per_batch: None,
            ensemble: false,
            link: LinkCodeConfig {
                enforce_rate: false,
                ..LinkCodeConfig::default()
            },
        }
    }
}

/// TV between the synthesized empirical joint type and `p(x)W(y|x)`.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSweepConfig {
    pub input: ProbVector,
    pub channel: Kernel,
    pub layers: Vec<usize>,
    pub rates: Vec<f64>,
    pub batches: u64,
    pub trials_per_batch: Option<u64>,
    pub link: LinkCodeConfig,
}

impl Default for SynthSweepConfig {
    fn default() -> Self {
        Self {
            input: ProbVector::uniform(2),
            channel: Kernel::bsc(0.2).expect("valid crossover"),
            layers: vec![8, 16, 24],
            rates: vec![0.6, 0.1],
            batches: 30,
            trials_per_batch: None,
            link: LinkCodeConfig {
                enforce_rate: false,
                ..LinkCodeConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "R")]
    pub rate: f64,
    pub metric_mean: f64,
    pub metric_stderr: f64,
    pub seed_batch: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub metric: String,
    pub trials_per_batch: u64,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    /// Batches at `rate` whose metric strictly decreases along `layers`.
    pub fn decreasing_batches(&self, rate: f64, layers: &[usize]) -> (u64, u64) {
        let mut batches: Vec<u64> = self.rows.iter().map(|r| r.seed_batch).collect();
        batches.sort_unstable();
        batches.dedup();
        let hits = batches
            .iter()
            .filter(|&&b| {
                let series: Option<Vec<f64>> = layers
                    .iter()
                    .map(|&n| {
                        self.rows
                            .iter()
                            .find(|r| r.seed_batch == b && r.n == n && r.rate == rate)
                            .map(|r| r.metric_mean)
                    })
                    .collect();
                series.is_some_and(|s| s.windows(2).all(|w| w[1] < w[0]))
            })
            .count();
        (hits as u64, batches.len() as u64)
    }

    /// Mean of the metric over batches at `(n, rate)`.
    pub fn grand_mean(&self, n: usize, rate: f64) -> f64 {
        let mut s = Summary::new();
        for r in self.rows.iter().filter(|r| r.n == n && r.rate == rate) {
            s.push(r.metric_mean);
        }
        s.mean()
    }

    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.n.to_string(),
                    r.rate.to_string(),
                    r.metric_mean.to_string(),
                    r.metric_stderr.to_string(),
                    r.seed_batch.to_string(),
                ]
            })
            .collect()
    }
}

pub const SWEEP_HEADER: [&str; 5] = ["N", "R", "metric_mean", "metric_stderr", "seed_batch"];

fn points(layers: &[usize], rates: &[f64], batches: u64) -> Vec<(usize, usize, u64)> {
    let mut out = Vec::new();
    for ri in 0..rates.len() {
        for &n in layers {
            for b in 0..batches {
                out.push((ri, n, b));
            }
        }
    }
    out
}

fn point_streams(rng: &RngStream, ri: usize, n: usize, b: u64) -> (RngStream, RngStream) {
    let batch = rng.child(Label::Batch(b));
    let key = |role| batch.child(role).child(Label::Layer(n)).child(Label::Index(ri as u64));
    (key(Role::Codebook), key(Role::Trial))
}

pub fn chancode_sweep(cfg: &ChannelSweepConfig, trials: u64, rng: &RngStream) -> Result<SweepReport, ExpError> {
    let trials = cfg.trials_per_batch.unwrap_or(trials);
    let mut rows = Vec::new();
    for (ri, n, b) in points(&cfg.layers, &cfg.rates, cfg.batches) {
        let (book, eval) = point_streams(rng, ri, n, b);
        let (mean, stderr) = if cfg.ensemble {
            let errors = parallel_map(trials, |i| {
                let trial = eval.trial(i);
                let code = build_channel_code(&cfg.channel, n, cfg.rates[ri], &trial.child(Role::Codebook), &cfg.link)?;
                let m = trial.child(Label::Index(0)).rng().gen_range(0..code.messages());
                let y = code.transmit(m, &trial.child(Role::Noise));
                Ok::<_, ExpError>(if code.decode(&y) == m { 0.0 } else { 1.0 })
            })?;
            let s = Summary::from_slice(&errors);
            (s.mean(), s.stderr())
        } else {
            build_channel_code(&cfg.channel, n, cfg.rates[ri], &book, &cfg.link)?.estimate_error(trials, &eval)
        };
        rows.push(SweepRow {
            n,
            rate: cfg.rates[ri],
            metric_mean: mean,
            metric_stderr: stderr,
            seed_batch: b,
        });
    }
    Ok(SweepReport {
        metric: "block_error".into(),
        trials_per_batch: trials,
        rows,
    })
}

pub fn synth_sweep(cfg: &SynthSweepConfig, trials: u64, rng: &RngStream) -> Result<SweepReport, ExpError> {
    let trials = cfg.trials_per_batch.unwrap_or(trials);
    let mut rows = Vec::new();
    for (ri, n, b) in points(&cfg.layers, &cfg.rates, cfg.batches) {
        let (book, eval) = point_streams(rng, ri, n, b);
        let code = build_synthesis_code(&cfg.input, &cfg.channel, n, cfg.rates[ri], &book, &cfg.link)?;
        let tvs = parallel_map(trials, |i| code.sample_tv(&eval.trial(i)))?;
        let s = Summary::from_slice(&tvs);
        rows.push(SweepRow {
            n,
            rate: cfg.rates[ri],
            metric_mean: s.mean(),
            metric_stderr: s.stderr(),
            seed_batch: b,
        });
    }
    Ok(SweepReport {
        metric: "tv".into(),
        trials_per_batch: trials,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweep_shape_and_order() {
        let cfg = SynthSweepConfig {
            layers: vec![4, 8],
            rates: vec![0.6],
            batches: 2,
            ..SynthSweepConfig::default()
        };
        let r = synth_sweep(&cfg, 20, &RngStream::new(1)).unwrap();
        let keys: Vec<(usize, u64)> = r.rows.iter().map(|r| (r.n, r.seed_batch)).collect();
        assert_eq!(keys, vec![(4, 0), (4, 1), (8, 0), (8, 1)]);
        assert!(r.rows.iter().all(|r| (0.0..=1.0).contains(&r.metric_mean)));
    }

    #[test]
    fn decreasing_batch_count() {
        let row = |n, m, b| SweepRow {
            n,
            rate: 0.5,
            metric_mean: m,
            metric_stderr: 0.0,
            seed_batch: b,
        };
        let r = SweepReport {
            metric: "tv".into(),
            trials_per_batch: 1,
            rows: vec![row(8, 0.3, 0), row(16, 0.2, 0), row(8, 0.3, 1), row(16, 0.3, 1)],
        };
        assert_eq!(r.decreasing_batches(0.5, &[8, 16]), (1, 2));
    }
}
