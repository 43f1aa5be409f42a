//! Symbol sequences stored as one bitmask per symbol value, so joint symbol
//! counts between two sequences reduce to popcounts.

/// A sequence over `0..alphabet` as per-symbol occupancy masks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedSeq {
    len: usize,
    masks: Vec<Vec<u64>>,
}

impl PackedSeq {
    pub fn new(seq: &[usize], alphabet: usize) -> Self {
        let words = seq.len().div_ceil(64);
        let mut masks = vec![vec![0u64; words]; alphabet];
        for (i, &s) in seq.iter().enumerate() {
            masks[s][i / 64] |= 1 << (i % 64);
        }
        Self {
            len: seq.len(),
            masks,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn alphabet(&self) -> usize {
        self.masks.len()
    }

    /// `out[a * |other| + b]` = positions where `self` is `a` and `other` is `b`.
    pub fn joint_counts_into(&self, other: &PackedSeq, out: &mut [u32]) {
        let nb = other.alphabet();
        for (a, ma) in self.masks.iter().enumerate() {
            for (b, mb) in other.masks.iter().enumerate() {
                out[a * nb + b] = ma.iter().zip(mb).map(|(x, y)| (x & y).count_ones()).sum();
            }
        }
    }

    pub fn joint_counts(&self, other: &PackedSeq) -> Vec<u32> {
        let mut out = vec![0; self.alphabet() * other.alphabet()];
        self.joint_counts_into(other, &mut out);
        out
    }
}

/// `value` as `width` bits, most significant first.
pub fn pack_index(value: u64, width: usize) -> Vec<bool> {
    (0..width).rev().map(|i| (value >> i) & 1 == 1).collect()
}

/// Inverse of [`pack_index`].
pub fn unpack_index(bits: &[bool]) -> u64 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | u64::from(b))
}

/// All `alphabet^len` sequences in lexicographic order.
pub fn enumerate_sequences(alphabet: usize, len: usize) -> Vec<Vec<usize>> {
    let total = alphabet.pow(len as u32);
    (0..total)
        .map(|mut i| {
            let mut seq = vec![0; len];
            for s in seq.iter_mut().rev() {
                *s = i % alphabet;
                i /= alphabet;
            }
            seq
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_direct_tally() {
        let x: Vec<usize> = (0..150).map(|i| (i * 7 + 3) % 3).collect();
        let y: Vec<usize> = (0..150).map(|i| (i * i + 1) % 2).collect();
        let counts = PackedSeq::new(&x, 3).joint_counts(&PackedSeq::new(&y, 2));
        let mut direct = vec![0u32; 6];
        for (&a, &b) in x.iter().zip(&y) {
            direct[a * 2 + b] += 1;
        }
        assert_eq!(counts, direct);
    }

    #[test]
    fn big_endian_roundtrip() {
        assert_eq!(pack_index(6, 4), vec![false, true, true, false]);
        for v in 0..64 {
            assert_eq!(unpack_index(&pack_index(v, 6)), v);
        }
    }

    #[test]
    fn enumeration_order() {
        let all = enumerate_sequences(2, 3);
        assert_eq!(all.len(), 8);
        assert_eq!(all[5], vec![1, 0, 1]);
    }
}
