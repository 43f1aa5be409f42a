//! Rate–distortion function by the slope-parametrized alternating iteration.
//!
//! For a slope `s < 0` the fixed point of
//! `Q(v|u) ∝ q(v) exp(s d(u,v))`, `q(v) = Σ_u p(u) Q(v|u)` traces the point of
//! the R(D) curve whose supporting line has slope `s` (in nats per unit
//! distortion). A target distortion is hit by bisecting on `s`.

use serde::Serialize;

use crate::probkit::{DistortionMeasure, Kernel, ProbVector};

use super::SolverError;

const MAX_INNER_ITERS: usize = 200_000;
const MAX_BISECTION_STEPS: usize = 200;

#[derive(Debug, Clone, Serialize)]
pub struct RdResult {
    /// `I(U; V)` of `test_channel`, bits per source symbol.
    pub rate: f64,
    pub distortion: f64,
    pub test_channel: Kernel,
    pub iterations: usize,
    /// Slope of the supporting line, nats per unit distortion; `-inf` at the
    /// minimum-distortion end, 0 on the zero-rate floor.
    pub slope: f64,
    /// Upper minus lower rate bound at the final slope, bits.
    pub gap: f64,
}

/// One solved point of the curve.
#[derive(Debug, Clone)]
pub struct RdPoint {
    pub rate: f64,
    pub distortion: f64,
    pub slope: f64,
    pub gap: f64,
    pub iterations: usize,
    output: Vec<f64>,
    channel: Vec<Vec<f64>>,
}

impl RdPoint {
    pub fn output_marginal(&self) -> &[f64] {
        &self.output
    }
}

struct Problem<'a> {
    source: &'a ProbVector,
    d: &'a DistortionMeasure,
    dmin_row: Vec<f64>,
}

impl<'a> Problem<'a> {
    fn new(source: &'a ProbVector, d: &'a DistortionMeasure) -> Result<Self, SolverError> {
        if source.len() != d.source_size() {
            return Err(SolverError::Dimension {
                source_size: source.len(),
                rows: d.source_size(),
            });
        }
        let dmin_row = d
            .rows()
            .iter()
            .map(|row| row.iter().copied().fold(f64::INFINITY, f64::min))
            .collect();
        Ok(Self {
            source,
            d,
            dmin_row,
        })
    }

    /// Smallest achievable expected distortion.
    fn d_min(&self) -> f64 {
        (0..self.source.len())
            .map(|u| self.source.get(u) * self.dmin_row[u])
            .sum()
    }

    /// Best single reconstruction symbol and its expected distortion.
    fn zero_rate(&self) -> (usize, f64) {
        (0..self.d.recon_size())
            .map(|v| {
                let e: f64 = (0..self.source.len())
                    .map(|u| self.source.get(u) * self.d.get(u, v))
                    .sum();
                (v, e)
            })
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
    }

    /// `exp(s (d(u,v) - dmin(u)))`, or the indicator of `d = dmin` at `s = -inf`.
    fn weights(&self, slope: f64) -> Vec<Vec<f64>> {
        self.d
            .rows()
            .iter()
            .zip(&self.dmin_row)
            .map(|(row, &m)| {
                row.iter()
                    .map(|&dv| {
                        if slope == f64::NEG_INFINITY {
                            if dv <= m { 1.0 } else { 0.0 }
                        } else {
                            (slope * (dv - m)).exp()
                        }
                    })
                    .collect()
            })
            .collect()
    }

    fn solve_slope(&self, slope: f64, warm: Option<&[f64]>, tol: f64) -> RdPoint {
        let nv = self.d.recon_size();
        let a = self.weights(slope);
        let mut q: Vec<f64> = match warm {
            Some(q) => q.to_vec(),
            None => vec![1.0 / nv as f64; nv],
        };
        let tol_nats = tol * std::f64::consts::LN_2;
        let mut gap = f64::INFINITY;
        let mut iterations = 0;
        let mut z = vec![0.0; self.source.len()];
        while iterations < MAX_INNER_ITERS {
            iterations += 1;
            for (u, zu) in z.iter_mut().enumerate() {
                *zu = a[u].iter().zip(&q).map(|(w, qv)| w * qv).sum();
            }
            let mut c = vec![0.0; nv];
            for (u, row) in a.iter().enumerate() {
                let pu = self.source.get(u);
                if pu == 0.0 {
                    continue;
                }
                for (cv, w) in c.iter_mut().zip(row) {
                    *cv += pu * w / z[u];
                }
            }
            let max_log = c
                .iter()
                .zip(&q)
                .filter(|(_, &qv)| qv > 0.0)
                .map(|(&cv, _)| cv.ln())
                .fold(f64::NEG_INFINITY, f64::max);
            let mean_log: f64 = c
                .iter()
                .zip(&q)
                .filter(|(_, &qv)| qv > 0.0)
                .map(|(&cv, &qv)| qv * cv.ln())
                .sum();
            gap = (max_log - mean_log).max(0.0);
            for (qv, cv) in q.iter_mut().zip(&c) {
                *qv *= cv;
            }
            let total: f64 = q.iter().sum();
            q.iter_mut().for_each(|qv| *qv /= total);
            if gap < tol_nats {
                break;
            }
        }
        self.point(slope, &a, q, gap / std::f64::consts::LN_2, iterations)
    }

    fn point(&self, slope: f64, a: &[Vec<f64>], q: Vec<f64>, gap: f64, iterations: usize) -> RdPoint {
        let nu = self.source.len();
        let nv = self.d.recon_size();
        let mut channel = vec![vec![0.0; nv]; nu];
        for u in 0..nu {
            let z: f64 = a[u].iter().zip(&q).map(|(w, qv)| w * qv).sum();
            for v in 0..nv {
                channel[u][v] = q[v] * a[u][v] / z;
            }
        }
        let mut output = vec![0.0; nv];
        let mut distortion = 0.0;
        for u in 0..nu {
            let pu = self.source.get(u);
            for v in 0..nv {
                output[v] += pu * channel[u][v];
                distortion += pu * channel[u][v] * self.d.get(u, v);
            }
        }
        let mut rate = 0.0;
        for u in 0..nu {
            let pu = self.source.get(u);
            for v in 0..nv {
                let w = channel[u][v];
                if pu > 0.0 && w > 0.0 {
                    rate += pu * w * (w / output[v]).log2();
                }
            }
        }
        RdPoint {
            rate: rate.max(0.0),
            distortion,
            slope,
            gap,
            iterations,
            output,
            channel,
        }
    }

    fn zero_rate_point(&self) -> RdPoint {
        let (v, dist) = self.zero_rate();
        let nv = self.d.recon_size();
        let mut row = vec![0.0; nv];
        row[v] = 1.0;
        RdPoint {
            rate: 0.0,
            distortion: dist,
            slope: 0.0,
            gap: 0.0,
            iterations: 0,
            output: row.clone(),
            channel: vec![row; self.source.len()],
        }
    }

    /// Bisection on the slope until `metric(point)` reaches `target`.
    /// `metric` must be increasing in the slope.
    fn bisect(
        &self,
        target: f64,
        tol: f64,
        metric: impl Fn(&RdPoint) -> f64,
        close_enough: impl Fn(&RdPoint, f64) -> bool,
    ) -> RdPoint {
        let inner_tol = tol * 1e-3;
        let mut lo = -1.0;
        let mut p_lo = self.solve_slope(lo, None, inner_tol);
        while metric(&p_lo) > target {
            lo *= 2.0;
            p_lo = self.solve_slope(lo, Some(&p_lo.output), inner_tol);
        }
        let mut hi = lo / 2.0;
        let mut p_hi = self.solve_slope(hi, Some(&p_lo.output), inner_tol);
        while metric(&p_hi) < target {
            lo = hi;
            p_lo = p_hi;
            hi /= 2.0;
            p_hi = self.solve_slope(hi, Some(&p_lo.output), inner_tol);
        }
        let mut iterations = p_lo.iterations + p_hi.iterations;
        let mut best = if (metric(&p_lo) - target).abs() < (metric(&p_hi) - target).abs() {
            p_lo.clone()
        } else {
            p_hi.clone()
        };
        for _ in 0..MAX_BISECTION_STEPS {
            if close_enough(&best, target) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            let p = self.solve_slope(mid, Some(&best.output), inner_tol);
            iterations += p.iterations;
            if metric(&p) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            best = p;
        }
        best.iterations = iterations;
        best
    }
}

fn check_tol(tol: f64) -> Result<(), SolverError> {
    if tol > 0.0 {
        Ok(())
    } else {
        Err(SolverError::InvalidTolerance(tol))
    }
}

fn into_result(p: RdPoint) -> Result<RdResult, SolverError> {
    Ok(RdResult {
        rate: p.rate,
        distortion: p.distortion,
        test_channel: Kernel::new_unchecked(p.channel)?,
        iterations: p.iterations,
        slope: p.slope,
        gap: p.gap,
    })
}

/// Solves the curve at a fixed slope (nats per unit distortion, `s <= 0`).
pub fn rd_at_slope(
    source: &ProbVector,
    distortion: &DistortionMeasure,
    slope: f64,
    tol: f64,
) -> Result<RdPoint, SolverError> {
    check_tol(tol)?;
    let problem = Problem::new(source, distortion)?;
    if slope >= 0.0 {
        return Ok(problem.zero_rate_point());
    }
    Ok(problem.solve_slope(slope, None, tol))
}

/// `R(target_d)` with its test channel.
pub fn blahut_rate_distortion(
    source: &ProbVector,
    distortion: &DistortionMeasure,
    target_d: f64,
    tol: f64,
) -> Result<RdResult, SolverError> {
    check_tol(tol)?;
    let problem = Problem::new(source, distortion)?;
    let d_min = problem.d_min();
    let (_, d_max) = problem.zero_rate();
    if !target_d.is_finite() || target_d < d_min - 1e-12 {
        return Err(SolverError::InfeasibleDistortion {
            target: target_d,
            min: d_min,
        });
    }
    if target_d >= d_max {
        return into_result(problem.zero_rate_point());
    }
    if target_d <= d_min + 1e-12 {
        return into_result(problem.solve_slope(f64::NEG_INFINITY, None, tol * 1e-3));
    }
    let point = problem.bisect(
        target_d,
        tol,
        |p| p.distortion,
        |p, t| {
            let err = p.distortion - t;
            // rate error ≈ |s| |ΔD| / ln 2; stay on the feasible side
            err <= tol * 1e-3 && err.abs() * p.slope.abs() / std::f64::consts::LN_2 <= tol * 0.5
        },
    );
    into_result(point)
}

/// Inverse curve `D(rate)`: the smallest distortion reachable at `rate` bits.
pub fn distortion_rate(
    source: &ProbVector,
    distortion: &DistortionMeasure,
    rate: f64,
    tol: f64,
) -> Result<RdResult, SolverError> {
    check_tol(tol)?;
    let problem = Problem::new(source, distortion)?;
    if !rate.is_finite() || rate < 0.0 {
        return Err(SolverError::InvalidRate(rate));
    }
    if rate == 0.0 {
        return into_result(problem.zero_rate_point());
    }
    let floor = problem.solve_slope(f64::NEG_INFINITY, None, tol * 1e-3);
    if rate >= floor.rate {
        return into_result(floor);
    }
    // rate falls as the slope rises, so bisect on -rate
    let point = problem.bisect(
        -rate,
        tol,
        |p| -p.rate,
        |p, t| (-p.rate - t).abs() <= tol * 0.5,
    );
    into_result(point)
}
