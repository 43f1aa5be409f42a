use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use crate::probkit::stats::Summary;
use crate::probkit::RngStream;

use super::{run_block, CodeParameters, CodingPolicy, NetError, NetworkSpec};

/// Environment variable that caps the number of worker threads.
pub const WORKERS_ENV: &str = "SEPNET_WORKERS";

fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let workers = std::env::var(WORKERS_ENV)
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|&w| w > 0)
            .unwrap_or(0);
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool")
    })
}

/// `f(0), ..., f(count - 1)` evaluated in parallel, results in index order.
///
/// Each call must depend only on its index (and captured read-only state),
/// so the output is the same for any worker count.
pub fn parallel_map<T, E, F>(count: u64, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(u64) -> Result<T, E> + Sync + Send,
{
    pool().install(|| (0..count).into_par_iter().map(&f).collect())
}

/// Monte Carlo distortion matrix, `m × m`; entries without a demand are 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistortionMatrix {
    pub matrix: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
    pub trials: u64,
}

impl DistortionMatrix {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.matrix[a][b]
    }

    /// Every entry within `eps` of or below `target`.
    pub fn achieves(&self, target: &[Vec<f64>], eps: f64) -> bool {
        self.matrix
            .iter()
            .zip(target)
            .all(|(row, t)| row.iter().zip(t).all(|(d, t)| *d <= t + eps))
    }
}

/// Runs `trials` independent blocks, trial `i` on `rng.trial(i)`.
pub fn estimate_distortion(
    net: &NetworkSpec,
    code: &dyn CodingPolicy,
    params: &CodeParameters,
    trials: u64,
    rng: &RngStream,
) -> Result<DistortionMatrix, NetError> {
    let per_trial = parallel_map(trials, |i| {
        run_block(net, code, params, &rng.trial(i)).map(|tr| tr.distortions())
    })?;
    Ok(summarize(net, &per_trial))
}

/// Matrix from per-trial, per-demand distortions.
pub fn summarize(net: &NetworkSpec, per_trial: &[Vec<f64>]) -> DistortionMatrix {
    let m = net.nodes;
    let mut matrix = vec![vec![0.0; m]; m];
    let mut stderr = vec![vec![0.0; m]; m];
    for (d, demand) in net.demands.iter().enumerate() {
        let mut s = Summary::new();
        for trial in per_trial {
            s.push(trial[d]);
        }
        matrix[demand.source.0][demand.sink.0] = s.mean();
        stderr[demand.source.0][demand.sink.0] = s.stderr();
    }
    DistortionMatrix {
        matrix,
        stderr,
        trials: per_trial.len() as u64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{codes::UncodedRelay, ChannelSpec, Demand, Edge, NodeId, SourceModel};
    use crate::probkit::{DistortionMeasure, Kernel, ProbVector};

    #[test]
    fn bsc_relay_matches_crossover() {
        let net = NetworkSpec {
            nodes: 2,
            edges: vec![Edge {
                from: NodeId(0),
                to: NodeId(1),
                channel: ChannelSpec::Dmc(Kernel::bsc(0.2).unwrap()),
            }],
            sources: SourceModel::single(2, NodeId(0), ProbVector::uniform(2)),
            demands: vec![Demand {
                source: NodeId(0),
                sink: NodeId(1),
                distortion: DistortionMeasure::hamming(2),
            }],
        };
        let params = CodeParameters::new(10, 10);
        let dm = estimate_distortion(&net, &UncodedRelay, &params, 2000, &RngStream::new(4)).unwrap();
        assert!((dm.get(0, 1) - 0.2).abs() < 4.0 * dm.stderr[0][1] + 1e-3);
        assert_eq!(dm.get(1, 0), 0.0);
        assert!(dm.achieves(&[vec![0.0, 0.25], vec![0.0, 0.0]], 0.0));
        let again = estimate_distortion(&net, &UncodedRelay, &params, 2000, &RngStream::new(4)).unwrap();
        assert_eq!(dm, again);
    }
}
