//! Wall-clock comparison of DTW, band-constrained DTW, FastDTW and spatial sampling.

use std::hint::black_box;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dtw::{dtw, fast_dtw};
use crate::error::{Error, Result};
use crate::sampling::{spatial_sample, DEFAULT_SKILL_DELTA};
use crate::trajectory::{Points, Trajectory};

pub const BENCHMARK_CSV_HEADER: &str = "method,complexity,size,repeats,median_s,mean_s,std_s";

/// Fine spatial period of the benchmark; the coarse one is ten times larger. At the
/// skill-extraction spacing every size produces fewer spatial samples than recorded ones,
/// which is the regime spatial sampling is used in.
const SS_DELTA: f64 = DEFAULT_SKILL_DELTA;
const FAST_DTW_RADIUS: usize = 1;
/// Each case runs untimed for at least this long before measuring.
const WARM_UP_S: f64 = 0.02;
/// Calls are batched so that one timing sample lasts at least this long.
const MIN_SAMPLE_S: f64 = 0.002;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub method: String,
    pub complexity: String,
    pub size: usize,
    pub repeats: usize,
    pub median_s: f64,
    pub mean_s: f64,
    /// Sample standard deviation (0 for a single repeat).
    pub std_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkTable {
    pub rows: Vec<BenchmarkRow>,
}

impl BenchmarkTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(BENCHMARK_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{:e},{:e},{:e}\n",
                r.method, r.complexity, r.size, r.repeats, r.median_s, r.mean_s, r.std_s
            ));
        }
        out
    }

    pub fn methods(&self) -> Vec<&str> {
        let mut m: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !m.contains(&r.method.as_str()) {
                m.push(&r.method);
            }
        }
        m
    }

    /// Least-squares slope of `log(median)` against `log(size)` for `method`.
    pub fn loglog_slope(&self, method: &str) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.method == method && r.median_s > 0.0)
            .map(|r| ((r.size as f64).ln(), r.median_s.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    }

    /// Total median time of spatial sampling at the fine spacing over that at the coarse
    /// spacing, summed across sizes.
    pub fn ss_ratio(&self) -> Option<f64> {
        let total = |m: &str| -> f64 {
            self.rows
                .iter()
                .filter(|r| r.method == m)
                .map(|r| r.median_s)
                .sum()
        };
        let (fine, coarse) = (total("ss_d1"), total("ss_d2"));
        (coarse > 0.0).then(|| fine / coarse)
    }
}

/// Times every method on generated signals of each size.
///
/// Each case is warmed up for 20 ms, then timed `repeats` times, visiting the cases
/// round-robin. A timing sample batches enough calls to last at least 2 ms and records
/// the time per call. Runs are serial.
pub fn benchmark_runtimes(sizes: &[usize], repeats: usize) -> Result<BenchmarkTable> {
    if sizes.is_empty() {
        return Err(Error::invalid("need at least one size"));
    }
    if sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("sizes must be strictly ascending"));
    }
    if sizes[0] < 2 {
        return Err(Error::invalid("sizes must be at least 2"));
    }
    if repeats == 0 {
        return Err(Error::invalid("repeats must be at least 1"));
    }
    let inputs: Vec<Inputs> = sizes.iter().map(|&n| Inputs::new(n)).collect();
    let mut cases: Vec<Case> = Vec::new();
    for input in &inputs {
        for method in METHODS {
            cases.push(Case {
                method,
                input,
                batch: 1,
                times: Vec::with_capacity(repeats),
            });
        }
    }
    for case in &mut cases {
        let per_call = warm_up(|| case.run())?;
        case.batch = ((MIN_SAMPLE_S / per_call).ceil() as usize).max(1);
    }
    // Round-robin over the cases so slow periods of the host hit every size alike.
    for _ in 0..repeats {
        for case in &mut cases {
            let start = Instant::now();
            for _ in 0..case.batch {
                case.run()?;
            }
            let per_call = start.elapsed().as_secs_f64() / case.batch as f64;
            case.times.push(per_call);
        }
    }
    let rows = cases
        .into_iter()
        .map(|mut case| {
            let (median, mean, std) = summarize(&mut case.times);
            BenchmarkRow {
                method: case.method.0.to_string(),
                complexity: case.method.1.to_string(),
                size: case.input.n,
                repeats,
                median_s: median,
                mean_s: mean,
                std_s: std,
            }
        })
        .collect();
    Ok(BenchmarkTable { rows })
}

/// Method name and complexity label, in table order.
const METHODS: [(&str, &str); 5] = [
    ("dtw", "O(NM)"),
    ("cdtw", "O(NW)"),
    ("fastdtw", "O(N)"),
    ("ss_d1", "O(N)"),
    ("ss_d2", "O(N)"),
];

/// Signals of one size.
struct Inputs {
    n: usize,
    a: Points<f64>,
    b: Points<f64>,
    traj: Trajectory<f64>,
}

impl Inputs {
    fn new(n: usize) -> Self {
        let (a, b) = signal_pair(n);
        Self {
            n,
            a,
            b,
            traj: recording(n),
        }
    }
}

struct Case<'a> {
    method: (&'static str, &'static str),
    input: &'a Inputs,
    batch: usize,
    times: Vec<f64>,
}

impl Case<'_> {
    fn run(&self) -> Result<()> {
        let Inputs { n, a, b, traj } = self.input;
        match self.method.0 {
            "dtw" => dtw(a, b, None).map(|r| drop(black_box(r))),
            "cdtw" => dtw(a, b, Some((n / 10).max(1))).map(|r| drop(black_box(r))),
            "fastdtw" => fast_dtw(a, b, FAST_DTW_RADIUS).map(|r| drop(black_box(r))),
            "ss_d1" => spatial_sample(traj, SS_DELTA, false).map(|r| drop(black_box(r))),
            _ => spatial_sample(traj, 10.0 * SS_DELTA, false).map(|r| drop(black_box(r))),
        }
    }
}

/// Runs `f` for at least [`WARM_UP_S`] and returns the mean time per call.
fn warm_up(f: impl Fn() -> Result<()>) -> Result<f64> {
    let start = Instant::now();
    let mut calls = 0u32;
    loop {
        f()?;
        calls += 1;
        let elapsed = start.elapsed().as_secs_f64();
        if elapsed >= WARM_UP_S {
            return Ok((elapsed / calls as f64).max(1e-9));
        }
    }
}

fn summarize(times: &mut [f64]) -> (f64, f64, f64) {
    times.sort_by(f64::total_cmp);
    let n = times.len();
    let median = if n % 2 == 1 {
        times[n / 2]
    } else {
        0.5 * (times[n / 2 - 1] + times[n / 2])
    };
    let mean = times.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    (median, mean, std)
}

/// Two planar curves of `n` samples with different phase progressions.
fn signal_pair(n: usize) -> (Points<f64>, Points<f64>) {
    let curve = |warp: fn(f64) -> f64| {
        let rows: Vec<[f64; 2]> = (0..n)
            .map(|i| {
                let u = warp(i as f64 / (n - 1) as f64);
                [0.4 * u, 0.05 * (std::f64::consts::TAU * 2.0 * u).sin()]
            })
            .collect();
        Points::from_rows(rows.iter()).expect("well-formed rows")
    };
    (curve(|u| u), curve(|u| u * u * (3.0 - 2.0 * u)))
}

/// A recording of `n` samples along a fixed 0.4 m sine path, so the spatial sample count
/// does not grow with `n`.
fn recording(n: usize) -> Trajectory<f64> {
    let (a, _) = signal_pair(n);
    let times = (0..n).map(|i| i as f64 * 0.01).collect();
    Trajectory::new(times, a).expect("strictly increasing times")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_repeat_table_is_well_formed() {
        let t = benchmark_runtimes(&[16, 32], 1).unwrap();
        assert_eq!(t.rows.len(), 10);
        assert!(t.rows.iter().all(|r| r.std_s == 0.0 && r.median_s >= 0.0));
        let csv = t.to_csv();
        assert!(csv.starts_with(BENCHMARK_CSV_HEADER));
        assert_eq!(csv.lines().count(), 11);
        assert_eq!(
            t.methods(),
            vec!["dtw", "cdtw", "fastdtw", "ss_d1", "ss_d2"]
        );
        assert!(benchmark_runtimes(&[32, 16], 1).is_err());
        assert!(benchmark_runtimes(&[16], 0).is_err());
    }

    #[test]
    fn slope_of_exact_power_law() {
        let rows = [100usize, 200, 400]
            .iter()
            .map(|&n| BenchmarkRow {
                method: "x".into(),
                complexity: "O(N^2)".into(),
                size: n,
                repeats: 1,
                median_s: 1e-6 * (n * n) as f64,
                mean_s: 0.0,
                std_s: 0.0,
            })
            .collect();
        let t = BenchmarkTable { rows };
        assert!((t.loglog_slope("x").unwrap() - 2.0).abs() < 1e-12);
        assert!(t.loglog_slope("y").is_none());
    }

    #[test]
    fn summary_statistics() {
        let (med, mean, std) = summarize(&mut [3.0, 1.0, 2.0, 6.0]);
        assert_eq!(med, 2.5);
        assert_eq!(mean, 3.0);
        assert!((std - (14.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }
}
