use std::collections::HashMap;

use crate::netmodel::{parallel_map, NodeId, SourceModel};
use crate::probkit::RngStream;

/// Same-class blocks compared jointly by [`class_dependence_tv`].
pub const DEFAULT_WINDOW: usize = 3;

/// How far `window` consecutive same-class blocks of length `block_len` are
/// from independent.
///
/// Same-class blocks sit one block apart. Each sample draws
/// `(2·window - 1)·block_len` consecutive symbols at `node` and keeps the
/// blocks at even positions. For a Markov source the likelihood ratio between
/// the joint law of those blocks and the product of their marginals depends
/// only on each block's (first, last) symbols, so the total variation is
/// computed exactly on those boundary signatures. Returns the TV between
/// their empirical joint law and the product of the empirical marginals.
pub fn class_dependence_tv(
    source: &SourceModel,
    node: NodeId,
    block_len: usize,
    window: usize,
    samples: u64,
    rng: &RngStream,
) -> f64 {
    assert!(block_len > 0 && window > 0 && samples > 0);
    let a = source.alphabet(node);
    let cells = a * a;
    let span = (2 * window - 1) * block_len;
    let signatures: Vec<Vec<usize>> = parallel_map(samples, |i| {
        let seq = &source.sample_block(span, &rng.trial(i))[node.0];
        Ok::<_, ()>(
            (0..window)
                .map(|k| {
                    let blk = &seq[2 * k * block_len..(2 * k + 1) * block_len];
                    blk[0] * a + blk[block_len - 1]
                })
                .collect(),
        )
    })
    .expect("sampling cannot fail");

    let mut joint: HashMap<Vec<usize>, u64> = HashMap::new();
    let mut marginals = vec![vec![0u64; cells]; window];
    for sig in &signatures {
        for (m, &s) in marginals.iter_mut().zip(sig) {
            m[s] += 1;
        }
        *joint.entry(sig.clone()).or_default() += 1;
    }
    let n = samples as f64;
    let product = |sig: &[usize]| -> f64 {
        sig.iter()
            .zip(&marginals)
            .map(|(&s, m)| m[s] as f64 / n)
            .product()
    };
    // Σ|p - q| over observed cells, plus the product mass on unobserved ones
    let mut keys: Vec<&Vec<usize>> = joint.keys().collect();
    keys.sort();
    let mut diff = 0.0;
    let mut covered = 0.0;
    for key in keys {
        let p = joint[key] as f64 / n;
        let q = product(key);
        diff += (p - q).abs();
        covered += q;
    }
    0.5 * (diff + (1.0 - covered).max(0.0))
}
