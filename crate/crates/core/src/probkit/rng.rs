//! Hierarchically keyed random streams.
//!
//! A [`RngStream`] is a master seed plus a key accumulated from a path of
//! [`Label`]s (trial, node, edge, layer, time, role, ...). Two streams with the
//! same seed and path produce identical draws; streams with different paths
//! are seeded from unrelated ChaCha keys. Nothing is shared between streams,
//! so concurrent workers can derive their own without coordination.

use std::collections::HashSet;
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ProbError;

/// What a stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Source,
    Noise,
    Encoder,
    Decoder,
    Link,
    Codebook,
    Selection,
    Trial,
    Experiment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Role(Role),
    Trial(u64),
    Batch(u64),
    Node(usize),
    Edge(usize),
    Layer(usize),
    Time(usize),
    Demand(usize),
    Index(u64),
}

impl From<Role> for Label {
    fn from(r: Role) -> Self {
        Label::Role(r)
    }
}

impl Label {
    fn code(self) -> u64 {
        let (tag, value): (u64, u64) = match self {
            Label::Role(r) => (1, r as u64),
            Label::Trial(v) => (2, v),
            Label::Batch(v) => (3, v),
            Label::Node(v) => (4, v as u64),
            Label::Edge(v) => (5, v as u64),
            Label::Layer(v) => (6, v as u64),
            Label::Time(v) => (7, v as u64),
            Label::Demand(v) => (8, v as u64),
            Label::Index(v) => (9, v),
        };
        splitmix64(tag.wrapping_mul(0xA076_1D64_78BD_642F) ^ splitmix64(value))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    seed: u64,
    key: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, key: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    /// Sub-stream one level down the label path.
    #[must_use]
    pub fn child(&self, label: impl Into<Label>) -> Self {
        let code = label.into().code();
        Self {
            seed: self.seed,
            key: splitmix64(self.key.rotate_left(17) ^ code),
        }
    }

    pub fn trial(&self, index: u64) -> Self {
        self.child(Role::Trial).child(Label::Trial(index))
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut bytes = [0u8; 32];
        let mut state = splitmix64(self.seed) ^ self.key;
        for chunk in bytes.chunks_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        ChaCha8Rng::from_seed(bytes)
    }

    /// First uniform draw of this stream, in `[0, 1)`.
    pub fn uniform(&self) -> f64 {
        self.rng().gen::<f64>()
    }
}

/// Records stream keys handed out for code construction and rejects reuse.
#[derive(Debug, Default)]
pub struct StreamAudit {
    claimed: Mutex<HashSet<(u64, u64)>>,
}

impl StreamAudit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn claim(&self, stream: &RngStream) -> Result<(), ProbError> {
        let mut claimed = self.claimed.lock().expect("audit lock poisoned");
        if !claimed.insert((stream.seed, stream.key)) {
            return Err(ProbError::StreamReused { key: stream.key });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.claimed.lock().expect("audit lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probkit::ProbVector;

    #[test]
    fn replay_is_deterministic() {
        let s = RngStream::new(7).child(Role::Noise).child(Label::Edge(2));
        let a: Vec<u64> = (0..5).map({
            let mut r = s.rng();
            move |_| r.gen()
        }).collect();
        let b: Vec<u64> = (0..5).map({
            let mut r = s.rng();
            move |_| r.gen()
        }).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn label_order_and_kind_matter() {
        let root = RngStream::new(1);
        let ab = root.child(Label::Node(1)).child(Label::Time(2));
        let ba = root.child(Label::Time(2)).child(Label::Node(1));
        assert_ne!(ab.key(), ba.key());
        assert_ne!(root.child(Label::Node(3)).key(), root.child(Label::Edge(3)).key());
        assert_ne!(RngStream::new(1).uniform(), RngStream::new(2).uniform());
    }

    #[test]
    fn point_mass_sample_is_fixed() {
        let p = ProbVector::new(vec![1.0, 0.0]).unwrap();
        for seed in 0..20 {
            assert_eq!(p.sample(&mut RngStream::new(seed).rng()), 0);
        }
    }

    #[test]
    fn sample_frequency_concentrates() {
        let p = ProbVector::new(vec![0.3, 0.7]).unwrap();
        let mut rng = RngStream::new(2024).rng();
        let zeros = (0..100_000).filter(|_| p.sample(&mut rng) == 0).count();
        assert!((zeros as f64 / 1e5 - 0.3).abs() < 0.01);
    }

    #[test]
    fn audit_rejects_reuse() {
        let audit = StreamAudit::new();
        let s = RngStream::new(3).child(Label::Time(1));
        audit.claim(&s).unwrap();
        audit.claim(&s.child(Label::Index(0))).unwrap();
        assert!(matches!(audit.claim(&s), Err(ProbError::StreamReused { .. })));
        assert_eq!(audit.len(), 2);
    }
}
