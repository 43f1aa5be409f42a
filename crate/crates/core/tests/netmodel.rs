mod common;

use proptest::prelude::*;
use sepnet::netmodel::codes::{ConstantCode, FeedbackRepeat, UncodedRelay};
use sepnet::netmodel::{
    estimate_distortion, run_block, run_block_with, CodeParameters, CodingPolicy, NetworkSpec,
    RunOptions, Signal,
};
use sepnet::probkit::stats::Summary;
use sepnet::probkit::{ProbVector, RngStream};

use common::{broadcast, line, single_bsc, single_link, two_way};

#[test]
fn replay_is_deterministic() {
    let net = two_way(0.2, 0.1);
    let params = CodeParameters::new(4, 12);
    for i in 0..50 {
        let trial = RngStream::new(77).trial(i);
        let a = run_block(&net, &FeedbackRepeat, &params, &trial).unwrap();
        let b = run_block(&net, &FeedbackRepeat, &params, &trial).unwrap();
        assert_eq!(a, b);
    }
}

fn causality_case(net: &NetworkSpec, code: &dyn CodingPolicy, params: CodeParameters, seed: u64, edge: usize, time: usize) {
    let trial = RngStream::new(seed);
    let clean = run_block(net, code, &params, &trial).unwrap();
    let opts = RunOptions {
        perturb: Some((edge, time)),
        ..RunOptions::default()
    };
    let probed = run_block_with(net, code, &params, &trial, &opts).unwrap();
    assert_ne!(clean.edges[edge].outputs[time - 1], probed.edges[edge].outputs[time - 1]);
    for (e, (a, b)) in clean.edges.iter().zip(&probed.edges).enumerate() {
        assert_eq!(a.inputs[..time], b.inputs[..time], "edge {e} inputs changed at or before {time}");
    }
    assert_eq!(clean.demands[0].block, probed.demands[0].block);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn outputs_never_reach_back_in_time(seed in any::<u64>(), edge in 0usize..2, time in 1usize..=12) {
        causality_case(&two_way(0.2, 0.2), &FeedbackRepeat, CodeParameters::new(4, 12), seed, edge, time);
    }

    #[test]
    fn relay_outputs_never_reach_back_in_time(seed in any::<u64>(), edge in 0usize..3, time in 1usize..=6) {
        causality_case(&line(3, 0.1), &UncodedRelay, CodeParameters::new(6, 6), seed, edge, time);
    }
}

fn flips(signals: (&[Signal], &[Signal])) -> Vec<f64> {
    signals
        .0
        .iter()
        .zip(signals.1)
        .map(|(x, y)| if x == y { 0.0 } else { 1.0 })
        .collect()
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (sa, sb) = (Summary::from_slice(a), Summary::from_slice(b));
    let cov = a.iter().zip(b).map(|(x, y)| (x - sa.mean()) * (y - sb.mean())).sum::<f64>() / a.len() as f64;
    cov / (sa.variance() * sb.variance()).sqrt()
}

#[test]
fn edge_noise_is_independent() {
    let net = broadcast(0.3);
    let params = CodeParameters::new(2, 2);
    let trials = 20_000u64;
    let (mut e0, mut e1, mut later) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..trials {
        let tr = run_block(&net, &UncodedRelay, &params, &RngStream::new(3).trial(i)).unwrap();
        let f0 = flips((&tr.edges[0].inputs, &tr.edges[0].outputs));
        let f1 = flips((&tr.edges[1].inputs, &tr.edges[1].outputs));
        e0.push(f0[0]);
        e1.push(f1[0]);
        later.push(f0[1]);
    }
    let limit = 4.0 / (trials as f64).sqrt();
    assert!(correlation(&e0, &e1).abs() < limit, "across edges");
    assert!(correlation(&e0, &later).abs() < limit, "across time");
    assert!((Summary::from_slice(&e0).mean() - 0.3).abs() < limit);
}

#[test]
fn uncoded_estimate_covers_crossover() {
    let p = 0.11;
    let net = single_bsc(p);
    let params = CodeParameters::new(4, 4);
    let covered = (0..100)
        .filter(|&r| {
            let m = estimate_distortion(&net, &UncodedRelay, &params, 500, &RngStream::new(1000 + r)).unwrap();
            (m.get(0, 1) - p).abs() <= 3.0 * m.stderr[0][1]
        })
        .count();
    assert!(covered >= 95, "{covered}/100");
}

#[test]
fn constant_code_matches_source_mass() {
    let net = single_link(0.4, ProbVector::bernoulli(0.3).unwrap());
    let params = CodeParameters::new(5, 1);
    let m = estimate_distortion(&net, &ConstantCode { value: 0 }, &params, 4000, &RngStream::new(8)).unwrap();
    let se = m.stderr[0][1];
    assert!((m.get(0, 1) - 0.3).abs() <= 4.0 * se, "{} ± {se}", m.get(0, 1));
    let m = estimate_distortion(&net, &ConstantCode { value: 1 }, &params, 4000, &RngStream::new(8)).unwrap();
    assert!((m.get(0, 1) - 0.7).abs() <= 4.0 * m.stderr[0][1]);
}

#[test]
fn entries_without_demand_are_zero() {
    let net = line(2, 0.2);
    let m = estimate_distortion(&net, &UncodedRelay, &CodeParameters::new(3, 3), 200, &RngStream::new(2)).unwrap();
    for a in 0..3 {
        for b in 0..3 {
            if (a, b) != (0, 2) {
                assert_eq!(m.get(a, b), 0.0);
                assert_eq!(m.stderr[a][b], 0.0);
            }
        }
    }
    assert!(m.get(0, 2) > 0.0);
}
