use proptest::prelude::*;
use sepnet::infosolvers::{
    blahut_capacity, blahut_rate_distortion, CapacityIteration, DEFAULT_MAX_ITERS, DEFAULT_TOLERANCE,
};
use sepnet::probkit::{binary_entropy, DistortionMeasure, Kernel, ProbVector, RngStream};

fn capacity(k: &Kernel) -> f64 {
    blahut_capacity(k, DEFAULT_TOLERANCE, DEFAULT_MAX_ITERS).unwrap().capacity
}

#[test]
fn bsc_capacity_strictly_decreasing() {
    let caps: Vec<f64> = (0..=50).map(|k| capacity(&Kernel::bsc(0.01 * k as f64).unwrap())).collect();
    assert!(caps.windows(2).all(|c| c[1] < c[0]));
    assert!(caps[50].abs() < 1e-9);
}

#[test]
fn bounds_bracket_closed_form_every_iteration() {
    let cases: Vec<(Kernel, f64)> = [0.05, 0.11, 0.3, 0.45]
        .iter()
        .map(|&p| (Kernel::bsc(p).unwrap(), 1.0 - binary_entropy(p)))
        .chain([0.1, 0.3, 0.7].iter().map(|&e| (Kernel::bec(e).unwrap(), 1.0 - e)))
        .chain(std::iter::once((
            Kernel::new(vec![vec![0.9, 0.1], vec![0.4, 0.6]]).unwrap(),
            capacity(&Kernel::new(vec![vec![0.9, 0.1], vec![0.4, 0.6]]).unwrap()),
        )))
        .collect();
    for (k, exact) in cases {
        for b in CapacityIteration::new(&k).skip(1).take(200) {
            assert!(b.lower <= exact + 1e-9 && exact <= b.upper + 1e-9, "{b:?} vs {exact}");
        }
    }
}

fn random_kernel(nx: usize, ny: usize, seed: u64) -> Kernel {
    let mut r = RngStream::new(seed).rng();
    Kernel::new(
        (0..nx)
            .map(|_| {
                let w: Vec<f64> = (0..ny).map(|_| rand::Rng::gen_range(&mut r, 0.01..1.0)).collect();
                ProbVector::from_weights(w).unwrap().as_slice().to_vec()
            })
            .collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn capacity_ignores_labels(nx in 2usize..5, ny in 2usize..5, seed in any::<u64>(), shift in 1usize..4) {
        let k = random_kernel(nx, ny, seed);
        let ip: Vec<usize> = (0..nx).map(|i| (i + shift) % nx).collect();
        let op: Vec<usize> = (0..ny).rev().collect();
        let a = capacity(&k);
        let b = capacity(&k.permuted(&ip, &op));
        prop_assert!((a - b).abs() <= 1e-8, "{} vs {}", a, b);
    }
}

/// `R(D)` on a grid from the minimum distortion to the zero-rate floor.
fn rd_curve(p: &ProbVector, d: &DistortionMeasure, points: usize) -> Vec<(f64, f64)> {
    let floor: f64 = (0..d.recon_size())
        .map(|v| (0..p.len()).map(|u| p.get(u) * d.get(u, v)).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    (0..points)
        .map(|i| {
            let target = floor * i as f64 / (points - 1) as f64;
            (target, blahut_rate_distortion(p, d, target, 1e-10).unwrap().rate)
        })
        .collect()
}

#[test]
fn rd_convex_and_non_increasing() {
    for (alphabet, seeds) in [(2usize, 0..5u64), (3, 5..10)] {
        for seed in seeds {
            let mut r = RngStream::new(seed).rng();
            let w: Vec<f64> = (0..alphabet).map(|_| rand::Rng::gen_range(&mut r, 0.05..1.0)).collect();
            let p = ProbVector::from_weights(w).unwrap();
            let d = DistortionMeasure::hamming(alphabet);
            let curve = rd_curve(&p, &d, 21);
            for w in curve.windows(2) {
                assert!(w[1].1 <= w[0].1 + 1e-8, "not non-increasing: {w:?}");
            }
            for w in curve.windows(3) {
                // equal spacing, so convexity is a nonnegative second difference
                let second = w[0].1 - 2.0 * w[1].1 + w[2].1;
                assert!(second >= -1e-7, "not convex at {:?}: {second}", w[1]);
            }
        }
    }
}

#[test]
fn binary_rd_matches_closed_form_on_grid() {
    let p = ProbVector::uniform(2);
    let d = DistortionMeasure::hamming(2);
    for i in 0..20 {
        let target = 0.5 * i as f64 / 20.0;
        let r = blahut_rate_distortion(&p, &d, target, DEFAULT_TOLERANCE).unwrap();
        assert!((r.rate - (1.0 - binary_entropy(target))).abs() < 1e-6, "D={target}");
    }
}
