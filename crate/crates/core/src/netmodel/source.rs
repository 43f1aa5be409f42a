use rand::Rng;

use crate::probkit::{sample_index, Kernel, ProbError, ProbVector, RngStream};

use super::NodeId;

/// Joint law of the node sources over time.
///
/// Letters live on the mixed-radix product of the node alphabets, node 1 most
/// significant. Nodes without a source have alphabet size 1.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceModel {
    Iid {
        alphabets: Vec<usize>,
        joint: ProbVector,
    },
    Markov {
        alphabets: Vec<usize>,
        initial: ProbVector,
        transition: Kernel,
    },
}

impl SourceModel {
    pub fn iid(alphabets: Vec<usize>, joint: ProbVector) -> Result<Self, ProbError> {
        let size = product(&alphabets)?;
        if joint.len() != size {
            return Err(ProbError::DimensionMismatch {
                left: joint.len(),
                right: size,
            });
        }
        Ok(SourceModel::Iid { alphabets, joint })
    }

    /// Only `at` observes a source, drawn i.i.d. from `law`.
    pub fn single(nodes: usize, at: NodeId, law: ProbVector) -> Self {
        let mut alphabets = vec![1; nodes];
        alphabets[at.0] = law.len();
        SourceModel::Iid {
            alphabets,
            joint: law,
        }
    }

    pub fn markov(
        alphabets: Vec<usize>,
        initial: ProbVector,
        transition: Kernel,
    ) -> Result<Self, ProbError> {
        let size = product(&alphabets)?;
        for len in [initial.len(), transition.input_size(), transition.output_size()] {
            if len != size {
                return Err(ProbError::DimensionMismatch { left: len, right: size });
            }
        }
        Ok(SourceModel::Markov {
            alphabets,
            initial,
            transition,
        })
    }

    /// Binary chain at node `at` that flips state with probability `flip`,
    /// started from its uniform stationary law.
    pub fn binary_markov(nodes: usize, at: NodeId, flip: f64) -> Result<Self, ProbError> {
        let mut alphabets = vec![1; nodes];
        alphabets[at.0] = 2;
        let transition = Kernel::bsc(flip)?;
        Self::markov(alphabets, ProbVector::uniform(2), transition)
    }

    pub fn alphabets(&self) -> &[usize] {
        match self {
            SourceModel::Iid { alphabets, .. } | SourceModel::Markov { alphabets, .. } => alphabets,
        }
    }

    pub fn alphabet(&self, node: NodeId) -> usize {
        self.alphabets()[node.0]
    }

    pub fn is_markov(&self) -> bool {
        matches!(self, SourceModel::Markov { .. })
    }

    /// Product letter split into per-node symbols.
    pub fn split(&self, mut index: usize) -> Vec<usize> {
        let alphabets = self.alphabets();
        let mut out = vec![0; alphabets.len()];
        for (slot, &a) in out.iter_mut().zip(alphabets).rev() {
            *slot = index % a;
            index /= a;
        }
        out
    }

    pub fn join(&self, symbols: &[usize]) -> usize {
        symbols
            .iter()
            .zip(self.alphabets())
            .fold(0, |acc, (&s, &a)| acc * a + s)
    }

    /// `len` consecutive letters, returned per node.
    pub fn sample_block(&self, len: usize, stream: &RngStream) -> Vec<Vec<usize>> {
        let mut rng = stream.rng();
        let nodes = self.alphabets().len();
        let mut out = vec![Vec::with_capacity(len); nodes];
        let mut state = None;
        for _ in 0..len {
            let letter = match (self, state) {
                (SourceModel::Iid { joint, .. }, _) => sample_index(joint.as_slice(), rng.gen()),
                (SourceModel::Markov { initial, .. }, None) => {
                    sample_index(initial.as_slice(), rng.gen())
                }
                (SourceModel::Markov { transition, .. }, Some(prev)) => {
                    sample_index(transition.row(prev), rng.gen())
                }
            };
            state = Some(letter);
            for (seq, s) in out.iter_mut().zip(self.split(letter)) {
                seq.push(s);
            }
        }
        out
    }

    /// Per-letter law of node `node`: the joint marginal for i.i.d. sources,
    /// the stationary marginal for Markov ones.
    pub fn marginal(&self, node: NodeId) -> ProbVector {
        let letter_law = match self {
            SourceModel::Iid { joint, .. } => joint.as_slice().to_vec(),
            SourceModel::Markov { transition, .. } => stationary(transition),
        };
        let mut out = vec![0.0; self.alphabet(node)];
        for (index, p) in letter_law.into_iter().enumerate() {
            out[self.split(index)[node.0]] += p;
        }
        ProbVector::from_weights(out).expect("marginal of a distribution")
    }

    /// Why the chain fails to be irreducible and aperiodic, if it does.
    /// Always `None` for i.i.d. sources.
    pub fn mixing_problem(&self) -> Option<String> {
        let SourceModel::Markov { transition, .. } = self else {
            return None;
        };
        let n = transition.input_size();
        let succ: Vec<Vec<usize>> = (0..n)
            .map(|x| (0..n).filter(|&y| transition.prob(x, y) > 0.0).collect())
            .collect();
        let level = bfs_levels(&succ);
        if let Some(s) = level.iter().position(Option::is_none) {
            return Some(format!("state {s} is unreachable from state 0"));
        }
        let pred: Vec<Vec<usize>> = (0..n)
            .map(|y| (0..n).filter(|&x| transition.prob(x, y) > 0.0).collect())
            .collect();
        if let Some(s) = bfs_levels(&pred).iter().position(Option::is_none) {
            return Some(format!("state 0 is unreachable from state {s}"));
        }
        let mut period = 0usize;
        for (x, next) in succ.iter().enumerate() {
            for &y in next {
                let lx = level[x].unwrap() as i64;
                let ly = level[y].unwrap() as i64;
                period = gcd(period, (lx + 1 - ly).unsigned_abs() as usize);
            }
        }
        (period != 1).then(|| format!("chain has period {period}"))
    }
}

fn product(alphabets: &[usize]) -> Result<usize, ProbError> {
    if alphabets.is_empty() || alphabets.contains(&0) {
        return Err(ProbError::Empty);
    }
    Ok(alphabets.iter().product())
}

fn bfs_levels(succ: &[Vec<usize>]) -> Vec<Option<usize>> {
    let mut level = vec![None; succ.len()];
    let mut queue = std::collections::VecDeque::from([0usize]);
    level[0] = Some(0);
    while let Some(x) = queue.pop_front() {
        for &y in &succ[x] {
            if level[y].is_none() {
                level[y] = Some(level[x].unwrap() + 1);
                queue.push_back(y);
            }
        }
    }
    level
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Stationary law by power iteration on the lazy chain `(I + P) / 2`, which
/// has the same fixed point and converges for periodic chains too.
fn stationary(transition: &Kernel) -> Vec<f64> {
    let n = transition.input_size();
    let mut pi = vec![1.0 / n as f64; n];
    for _ in 0..100_000 {
        let mut next: Vec<f64> = pi.iter().map(|p| 0.5 * p).collect();
        for (x, &p) in pi.iter().enumerate() {
            for (y, &w) in transition.row(x).iter().enumerate() {
                next[y] += 0.5 * p * w;
            }
        }
        let delta: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if delta < 1e-15 {
            break;
        }
    }
    pi
}
