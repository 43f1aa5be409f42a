//! Acceptance suite: one PASS/FAIL line per criterion, then a rerun of every
//! criterion from its stored seed to check bit-identical results.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use sepnet::expcli::{
    run_stack_check, separation_experiment, synth_sweep, two_step_check, verify_lemma1, Lemma1Config,
    Realization, SeparationConfig, SynthSweepConfig, TwoStepConfig, Verdict,
};
use sepnet::infosolvers::{blahut_capacity, blahut_rate_distortion, DEFAULT_MAX_ITERS};
use sepnet::linkcodes::{
    build_channel_code, emulate_pipe_over_dmc, ideal_pipe, BundleRelay, LinkCodeConfig, LinkCodeReport,
};
use sepnet::netmodel::codes::{FeedbackRepeat, UncodedRelay};
use sepnet::netmodel::{ChannelSpec, CodeParameters, CodingPolicy, Demand, Edge, NetworkSpec, NodeId, SourceModel};
use sepnet::probkit::stats::{pooled_stderr, Summary};
use sepnet::probkit::{binary_entropy, DistortionMeasure, Kernel, ProbVector, RngStream};
use sepnet::stacking::{class_dependence_tv, stack_network, stacked_distortions, DEFAULT_WINDOW};

const SOLVER_TOL: f64 = 1e-6;
const SWEEP_MIN_BATCHES: u64 = 27;
const SWEEP_TRIALS: u64 = 300;
const LOW_RATE_TV_FLOOR: f64 = 0.1;
const TWO_STEP_TV_MAX: f64 = 0.1;
const MIXING_TV_MAX: f64 = 0.05;
const STICKY_TV_MIN: f64 = 0.5;
const LEMMA1_SEEDS: u64 = 10;

struct Outcome {
    pass: bool,
    detail: String,
    /// Debug rendering of every computed number; equal strings mean equal bits.
    fingerprint: String,
}

fn hamming_demand(source: usize, sink: usize) -> Demand {
    Demand {
        source: NodeId(source),
        sink: NodeId(sink),
        distortion: DistortionMeasure::hamming(2),
    }
}

fn bsc_edge(from: usize, to: usize, p: f64) -> Edge {
    Edge {
        from: NodeId(from),
        to: NodeId(to),
        channel: ChannelSpec::Dmc(Kernel::bsc(p).unwrap()),
    }
}

fn capacity_closed_forms() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut values = Vec::new();
    for k in 0..=10 {
        let p = 0.05 * k as f64;
        let c = blahut_capacity(&Kernel::bsc(p).unwrap(), 1e-12, DEFAULT_MAX_ITERS).unwrap().capacity;
        worst = worst.max((c - (1.0 - binary_entropy(p))).abs());
        values.push(c);
    }
    for k in 0..=9 {
        let e = 0.1 * k as f64;
        let c = blahut_capacity(&Kernel::bec(e).unwrap(), 1e-12, DEFAULT_MAX_ITERS).unwrap().capacity;
        worst = worst.max((c - (1.0 - e)).abs());
        values.push(c);
    }
    Outcome {
        pass: worst <= SOLVER_TOL,
        detail: format!("max |C - closed form| = {worst:.2e} (tol {SOLVER_TOL:.0e})"),
        fingerprint: format!("{values:?}"),
    }
}

fn rd_closed_form() -> Outcome {
    let p = ProbVector::uniform(2);
    let d = DistortionMeasure::hamming(2);
    let mut worst: f64 = 0.0;
    let mut values = Vec::new();
    for i in 0..20 {
        let target = 0.5 * i as f64 / 20.0;
        let r = blahut_rate_distortion(&p, &d, target, 1e-12).unwrap().rate;
        worst = worst.max((r - (1.0 - binary_entropy(target))).abs());
        values.push(r);
    }
    Outcome {
        pass: worst <= SOLVER_TOL,
        detail: format!("max |R(D) - (1 - h(D))| = {worst:.2e} on 20 points (tol {SOLVER_TOL:.0e})"),
        fingerprint: format!("{values:?}"),
    }
}

fn stack_equivalence() -> Outcome {
    let hop = NetworkSpec {
        nodes: 2,
        edges: vec![bsc_edge(0, 1, 0.11)],
        sources: SourceModel::single(2, NodeId(0), ProbVector::uniform(2)),
        demands: vec![hamming_demand(0, 1)],
    };
    let mut two_way = hop.clone();
    two_way.edges.push(bsc_edge(1, 0, 0.05));
    let cases: [(&NetworkSpec, Arc<dyn CodingPolicy>, CodeParameters); 2] = [
        (&hop, Arc::new(UncodedRelay), CodeParameters::new(4, 4)),
        (&two_way, Arc::new(FeedbackRepeat), CodeParameters::new(2, 6)),
    ];
    let reports: Vec<_> = cases
        .into_iter()
        .map(|(net, code, params)| run_stack_check(net, code, &params, 8, 1000, &RngStream::new(2024)).unwrap())
        .collect();
    Outcome {
        pass: reports.iter().all(|r| r.exact_match),
        detail: format!(
            "N=8, 1000 trials: uncoded relay mismatches {}, feedback code mismatches {}",
            reports[0].mismatched_trials, reports[1].mismatched_trials
        ),
        fingerprint: format!("{reports:?}"),
    }
}

fn channel_coded_line() -> Outcome {
    let (layers, rate, trials) = (24, 0.4, 10_000);
    let net = NetworkSpec {
        nodes: 3,
        edges: vec![bsc_edge(0, 1, 0.11), bsc_edge(1, 2, 0.11)],
        sources: SourceModel::single(3, NodeId(0), ProbVector::uniform(2)),
        demands: vec![hamming_demand(0, 2)],
    };
    let cfg = LinkCodeConfig::default();
    let codes: Vec<_> = (0..2)
        .map(|e| Arc::new(build_channel_code(&Kernel::bsc(0.11).unwrap(), layers, rate, &RngStream::new(100 + e), &cfg).unwrap()))
        .collect();
    let p_e: Vec<f64> = codes.iter().map(|c| c.estimate_error(trials, &RngStream::new(7)).0).collect();
    let report = LinkCodeReport::new(p_e, net.edges.len(), net.d_max());
    let bits = codes[0].message_bits();
    let mut coded = stack_network(&net, layers).unwrap();
    let mut ideal = coded.clone();
    for (e, code) in codes.into_iter().enumerate() {
        coded = emulate_pipe_over_dmc(coded, e, code).unwrap();
        ideal = ideal_pipe(ideal, e, bits);
    }
    // n = 7 stacked uses carry the 48-bit block across both hops
    let relay = BundleRelay { layers, bits_per_use: bits };
    let params = CodeParameters::new(2, 7);
    let rng = RngStream::new(8);
    let first = |v: Vec<Vec<f64>>| Summary::from_slice(&v.into_iter().map(|d| d[0]).collect::<Vec<_>>());
    let a = first(stacked_distortions(&coded, &relay, &params, trials, &rng).unwrap());
    let b = first(stacked_distortions(&ideal, &relay, &params, trials, &rng).unwrap());
    let excess = a.mean() - b.mean();
    let se = pooled_stderr(a.stderr(), b.stderr());
    Outcome {
        pass: excess <= report.excess_bound + 3.0 * se,
        detail: format!(
            "excess {excess:.4} <= |E|·Pe·dmax {:.4} + 3·{se:.4} (Pe {:?}, pipe D {:.4})",
            report.excess_bound,
            report.p_e,
            b.mean()
        ),
        fingerprint: format!("{report:?} {} {} {} {}", a.mean(), a.stderr(), b.mean(), b.stderr()),
    }
}

fn soft_covering() -> Outcome {
    let report = synth_sweep(&SynthSweepConfig::default(), SWEEP_TRIALS, &RngStream::new(2024)).unwrap();
    let (hits, batches) = report.decreasing_batches(0.6, &[8, 16, 24]);
    let low: Vec<f64> = [8, 16, 24].iter().map(|&n| report.grand_mean(n, 0.1)).collect();
    Outcome {
        pass: hits >= SWEEP_MIN_BATCHES && low.iter().all(|&t| t > LOW_RATE_TV_FLOOR),
        detail: format!(
            "R=0.6 decreasing in {hits}/{batches} batches (need {SWEEP_MIN_BATCHES}); R=0.1 mean TV {low:.3?} (need > {LOW_RATE_TV_FLOOR})"
        ),
        fingerprint: format!("{report:?}"),
    }
}

fn two_step() -> Outcome {
    let r = two_step_check(&TwoStepConfig::default(), 2000, &RngStream::new(2024)).unwrap();
    Outcome {
        pass: r.tv <= TWO_STEP_TV_MAX,
        detail: format!("N={}, TV of (x1,y1,x2,y2) law = {:.4} (max {TWO_STEP_TV_MAX})", r.layers, r.tv),
        fingerprint: format!("{r:?}"),
    }
}

fn lemma1() -> Outcome {
    let run = |realization| -> Vec<_> {
        let cfg = Lemma1Config {
            realization,
            ..Lemma1Config::default()
        };
        (0..LEMMA1_SEEDS)
            .map(|s| verify_lemma1(&cfg, 10_000, &RngStream::new(1000 + s)).unwrap())
            .collect()
    };
    let positive = run(Realization::Synthesis);
    let negative = run(Realization::ReusedSynthesis);
    let pos_pass = positive.iter().filter(|r| r.verdict == Verdict::Pass).count();
    let neg_fail = negative.iter().filter(|r| r.verdict == Verdict::Fail).count();
    let n = LEMMA1_SEEDS as usize;
    Outcome {
        pass: pos_pass == n && neg_fail == n,
        detail: format!(
            "fresh synthesis PASS {pos_pass}/{n} (exceedances {:?} of {} z); reused FAIL {neg_fail}/{n}",
            positive.iter().map(|r| r.exceedances).collect::<Vec<_>>(),
            positive[0].z_count
        ),
        fingerprint: format!("{positive:?} {negative:?}"),
    }
}

fn separation() -> Outcome {
    let r = separation_experiment(&SeparationConfig::default(), 10_000, &RngStream::new(2024)).unwrap();
    // R(D*) = 1 - h(D*) = C = 1 - h(0.11)
    let d_star = 0.11;
    let c = r.checks();
    let noisy: Vec<f64> = r.points.iter().map(|p| p.d_noisy).collect();
    let pipe: Vec<f64> = r.points.iter().map(|p| p.d_pipe).collect();
    Outcome {
        pass: c.above_floor && c.within_bound && c.monotone && (r.d_target - d_star).abs() < SOLVER_TOL,
        detail: format!(
            "D* {:.4}; D_noisy {noisy:.4?}; D_pipe {pipe:.4?}; floor {} bound {} monotone {}",
            r.d_target, c.above_floor, c.within_bound, c.monotone
        ),
        fingerprint: format!("{r:?}"),
    }
}

fn mixing() -> Outcome {
    let samples = 20_000;
    let mixing = SourceModel::binary_markov(1, NodeId(0), 0.4).unwrap();
    let sticky = SourceModel::binary_markov(1, NodeId(0), 0.01).unwrap();
    let long = class_dependence_tv(&mixing, NodeId(0), 64, DEFAULT_WINDOW, samples, &RngStream::new(2024));
    let short = class_dependence_tv(&sticky, NodeId(0), 1, DEFAULT_WINDOW, samples, &RngStream::new(2024));
    Outcome {
        pass: long < MIXING_TV_MAX && short > STICKY_TV_MIN,
        detail: format!(
            "flip 0.4, L=64: TV {long:.4} (< {MIXING_TV_MAX}); flip 0.01, L=1: TV {short:.4} (> {STICKY_TV_MIN})"
        ),
        fingerprint: format!("{long:?} {short:?}"),
    }
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("capacity closed forms", capacity_closed_forms, Duration::from_secs(1)),
        ("rate-distortion closed form", rd_closed_form, Duration::from_secs(1)),
        ("lift/destack bit-exact replay", stack_equivalence, Duration::from_secs(30)),
        ("channel-coded line within bound", channel_coded_line, Duration::from_secs(300)),
        ("soft-covering TV trend", soft_covering, Duration::from_secs(300)),
        ("two-step induction law", two_step, Duration::from_secs(300)),
        ("cross-time independence controls", lemma1, Duration::from_secs(120)),
        ("separation coherence", separation, Duration::from_secs(600)),
        ("even/odd mixing", mixing, Duration::from_secs(60)),
    ];
    let mut all_pass = true;
    let mut fingerprints = Vec::new();
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let pass = out.pass && elapsed <= *budget;
        all_pass &= pass;
        println!(
            "criterion {:>2} {}: {name}: {} [{:.1}s, budget {}s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
        fingerprints.push(out.fingerprint);
    }
    let start = Instant::now();
    let differing: Vec<usize> = criteria
        .iter()
        .zip(&fingerprints)
        .enumerate()
        .filter(|(_, ((_, run, _), first))| run().fingerprint != **first)
        .map(|(i, _)| i + 1)
        .collect();
    let pass = differing.is_empty();
    all_pass &= pass;
    println!(
        "criterion 10 {}: determinism: criteria 1-9 rerun from stored seeds, differing {differing:?} [{:.1}s]",
        if pass { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64()
    );
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
