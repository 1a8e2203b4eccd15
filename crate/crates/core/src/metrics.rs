//! Approximation and multivariate synchrony metrics.
//!
//! * [`hausdorff`]: symmetric Hausdorff distance between two finite sample sets.
//! * [`cumulative_l2`]: sum of pointwise Euclidean errors of equal-length sequences.
//! * [`rho`]: cluster-phase synchrony of the analytic-signal phases.
//! * [`symbolic_entropy`]: Shannon entropy (bits) of the mean-binarized joint state.
//! * [`sn_csd`]: sum-normalized cross-spectral density, 1 iff all spectra coincide.

use std::collections::BTreeMap;

use num_traits::Zero;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{squared_distance, Scalar};
use crate::trajectory::Points;

/// Fraction of samples trimmed at each edge before averaging phase-based quantities.
pub const PHASE_EDGE_TRIM: f64 = 0.05;

/// Minimum length accepted by [`analytic_phase`].
pub const MIN_PHASE_LEN: usize = 8;

/// Hausdorff distance between the sample sets `a` and `b`.
///
/// Exact; the inner scan stops as soon as a point of `b` closer than the running
/// maximum is found, since that point can no longer raise the directed distance.
pub fn hausdorff<T: Scalar>(a: &Points<T>, b: &Points<T>) -> Result<T> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("hausdorff distance of an empty point set"));
    }
    if a.dim() != b.dim() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let h = directed_sq(a, b).max(directed_sq(b, a));
    Ok(h.sqrt())
}

fn directed_sq<T: Scalar>(a: &Points<T>, b: &Points<T>) -> T {
    let mut cmax = T::zero();
    // Start each scan near the previous nearest neighbour; sequences are usually ordered.
    let mut hint = 0usize;
    let nb = b.len();
    for p in a.rows() {
        let mut cmin = T::infinity();
        let mut best = hint;
        for step in 0..nb {
            let j = (hint + step) % nb;
            let d = squared_distance(p, b.row(j));
            if d < cmin {
                cmin = d;
                best = j;
                if cmin < cmax {
                    break;
                }
            }
        }
        hint = best;
        if cmin > cmax {
            cmax = cmin;
        }
    }
    cmax
}

/// Sum over `i` of `|a_i - b_i|`.
pub fn cumulative_l2<T: Scalar>(a: &Points<T>, b: &Points<T>) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "cumulative l2 needs equal lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.dim() != b.dim() {
        return Err(Error::invalid("cumulative l2 dimension mismatch"));
    }
    Ok(a.rows()
        .zip(b.rows())
        .fold(T::zero(), |acc, (x, y)| acc + squared_distance(x, y).sqrt()))
}

/// Instantaneous phase of a real signal.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticPhase<T> {
    /// Wrapped phase in `(-pi, pi]`.
    pub phase: Vec<T>,
    /// The signal was constant; the phase is reported as zero everywhere.
    pub zero_amplitude: bool,
}

/// Phase of the analytic signal obtained with the FFT Hilbert transform.
///
/// The input is mean-centred first. Positive frequencies are doubled, negative ones
/// zeroed, DC and Nyquist bins left as they are.
pub fn analytic_phase<T: Scalar>(x: &[T]) -> Result<AnalyticPhase<T>> {
    let n = x.len();
    if n < MIN_PHASE_LEN {
        return Err(Error::invalid(format!(
            "analytic phase needs at least {MIN_PHASE_LEN} samples, got {n}"
        )));
    }
    let mean = mean(x);
    let scale = x.iter().fold(T::zero(), |m, &v| m.max((v - mean).abs()));
    let tiny = T::epsilon() * T::lit(16.0) * mean.abs().max(T::one());
    if scale <= tiny {
        return Ok(AnalyticPhase {
            phase: vec![T::zero(); n],
            zero_amplitude: true,
        });
    }

    let mut buf: Vec<Complex<T>> = x
        .iter()
        .map(|&v| Complex::new(v - mean, T::zero()))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let two = T::lit(2.0);
    let half = n / 2;
    let positive_end = if n.is_multiple_of(2) { half } else { half + 1 };
    for v in buf.iter_mut().take(positive_end).skip(1) {
        *v = *v * two;
    }
    for v in buf.iter_mut().skip(half + 1) {
        *v = Complex::zero();
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    // The unnormalized inverse scales by n, which does not affect the angle.
    Ok(AnalyticPhase {
        phase: buf.iter().map(|c| c.im.atan2(c.re)).collect(),
        zero_amplitude: false,
    })
}

/// Removes `2*pi` jumps from a wrapped phase sequence.
pub fn unwrap_phase<T: Scalar>(phase: &[T]) -> Vec<T> {
    let two_pi = T::TAU();
    let pi = T::PI();
    let mut out = Vec::with_capacity(phase.len());
    let mut offset = T::zero();
    for (i, &p) in phase.iter().enumerate() {
        if i > 0 {
            let d = p - phase[i - 1];
            if d > pi {
                offset = offset - two_pi;
            } else if d < -pi {
                offset = offset + two_pi;
            }
        }
        out.push(p + offset);
    }
    out
}

/// Cluster-phase synchrony together with the indices of excluded (constant) signals.
#[derive(Clone, Debug, PartialEq)]
pub struct Rho<T> {
    pub value: T,
    pub excluded: Vec<usize>,
}

/// Cluster-phase synchrony `rho` in `[0, 1]`; see [`rho_detailed`].
pub fn rho<T: Scalar>(signals: &[Vec<T>]) -> Result<T> {
    rho_detailed(signals).map(|r| r.value)
}

/// Cluster-phase synchrony.
///
/// With `theta_i(t)` the analytic phases, the cluster phase is the angle of their mean
/// phasor; `phi_i = theta_i - q` are relative phases and `phi_bar_i` their circular means.
/// `rho` is the time average of `|mean_i exp(j (phi_i(t) - phi_bar_i))|`, taken over the
/// interior once [`PHASE_EDGE_TRIM`] of the samples has been dropped at each edge.
/// Constant signals carry no phase and are excluded.
pub fn rho_detailed<T: Scalar>(signals: &[Vec<T>]) -> Result<Rho<T>> {
    let n = check_signals(signals, 2)?;
    let mut phases = Vec::new();
    let mut excluded = Vec::new();
    for (i, s) in signals.iter().enumerate() {
        let ph = analytic_phase(s)?;
        if ph.zero_amplitude {
            excluded.push(i);
        } else {
            phases.push(ph.phase);
        }
    }
    if phases.is_empty() {
        return Err(Error::UndefinedMetric(
            "rho: every signal is constant".into(),
        ));
    }
    let (lo, hi) = trimmed_range(n);
    let k = T::from_usize_lossy(phases.len());

    let cluster: Vec<T> = (lo..hi)
        .map(|t| {
            let (c, s) = phases.iter().fold((T::zero(), T::zero()), |(c, s), p| {
                (c + p[t].cos(), s + p[t].sin())
            });
            s.atan2(c)
        })
        .collect();
    let mean_rel: Vec<T> = phases
        .iter()
        .map(|p| {
            let (c, s) = (lo..hi).fold((T::zero(), T::zero()), |(c, s), t| {
                let r = p[t] - cluster[t - lo];
                (c + r.cos(), s + r.sin())
            });
            s.atan2(c)
        })
        .collect();
    let total = (lo..hi).fold(T::zero(), |acc, t| {
        let (c, s) =
            phases
                .iter()
                .zip(&mean_rel)
                .fold((T::zero(), T::zero()), |(c, s), (p, &m)| {
                    let r = p[t] - cluster[t - lo] - m;
                    (c + r.cos(), s + r.sin())
                });
        acc + (c * c + s * s).sqrt() / k
    });
    let value = (total / T::from_usize_lossy(hi - lo)).min(T::one());
    Ok(Rho { value, excluded })
}

/// Shannon entropy in bits of the joint binary state of `signals`.
///
/// Each signal is binarized about its own mean (strictly above = 1); the `k` bits at
/// one sample form a word, and the entropy of the empirical word distribution is returned.
pub fn symbolic_entropy<T: Scalar>(signals: &[Vec<T>]) -> Result<T> {
    let n = check_signals(signals, 1)?;
    let means: Vec<T> = signals.iter().map(|s| mean(s)).collect();
    let mut counts: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
    let words = signals.len().div_ceil(64);
    for t in 0..n {
        let mut word = vec![0u64; words];
        for (i, (s, &m)) in signals.iter().zip(&means).enumerate() {
            if s[t] > m {
                word[i / 64] |= 1 << (i % 64);
            }
        }
        *counts.entry(word).or_default() += 1;
    }
    let total = T::from_usize_lossy(n);
    let h = counts.values().fold(T::zero(), |acc, &c| {
        let p = T::from_usize_lossy(c) / total;
        acc - p * p.log2()
    });
    Ok(h.max(T::zero()))
}

/// Sum-normalized cross-spectral density.
///
/// For mean-centred spectra `X_i` (DC bin excluded) this is
/// `sum_f |sum_i X_i(f)|^2 / (k * sum_i sum_f |X_i(f)|^2)`, in `[0, 1]` by Cauchy-Schwarz.
pub fn sn_csd<T: Scalar>(signals: &[Vec<T>]) -> Result<T> {
    let n = check_signals(signals, 2)?;
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let mut sum_spec = vec![Complex::<T>::zero(); n];
    let mut power = T::zero();
    for s in signals {
        let m = mean(s);
        let mut buf: Vec<Complex<T>> = s.iter().map(|&v| Complex::new(v - m, T::zero())).collect();
        fft.process(&mut buf);
        for (acc, v) in sum_spec.iter_mut().zip(&buf).skip(1) {
            *acc = *acc + *v;
            power = power + v.norm_sqr();
        }
    }
    let tiny = T::epsilon() * T::epsilon();
    if power <= tiny {
        return Err(Error::UndefinedMetric(
            "snCSD: every signal is constant".into(),
        ));
    }
    let cross = sum_spec
        .iter()
        .skip(1)
        .fold(T::zero(), |acc, v| acc + v.norm_sqr());
    let k = T::from_usize_lossy(signals.len());
    Ok((cross / (k * power)).max(T::zero()).min(T::one()))
}

/// Synchrony and approximation scores of one processed demonstration group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport<T> {
    pub group: String,
    /// `"time"` or `"arclength"`.
    pub domain: String,
    /// Barycenter method label.
    pub method: String,
    pub rho: T,
    pub entropy: T,
    pub sncsd: T,
    pub l2: T,
}

impl<T: Scalar> MetricReport<T> {
    pub const CSV_HEADER: &'static str = "group,domain,method,rho,entropy,sncsd,l2";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:e},{:e},{:e},{:e}",
            self.group, self.domain, self.method, self.rho, self.entropy, self.sncsd, self.l2
        )
    }
}

fn mean<T: Scalar>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |a, &b| a + b) / T::from_usize_lossy(x.len())
}

fn trimmed_range(n: usize) -> (usize, usize) {
    let trim = (n as f64 * PHASE_EDGE_TRIM).floor() as usize;
    if n > 2 * trim {
        (trim, n - trim)
    } else {
        (0, n)
    }
}

fn check_signals<T>(signals: &[Vec<T>], min_count: usize) -> Result<usize> {
    if signals.len() < min_count {
        return Err(Error::invalid(format!(
            "need at least {min_count} signals, got {}",
            signals.len()
        )));
    }
    let n = signals[0].len();
    if n == 0 {
        return Err(Error::invalid("signals are empty"));
    }
    if signals.iter().any(|s| s.len() != n) {
        return Err(Error::invalid("signals must have equal length"));
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pts(rows: &[[f64; 2]]) -> Points<f64> {
        Points::from_rows(rows.iter()).unwrap()
    }

    #[test]
    fn hausdorff_examples() {
        let a = pts(&[[0.0, 0.0], [1.0, 0.0]]);
        assert_eq!(hausdorff(&a, &a).unwrap(), 0.0);
        assert_eq!(
            hausdorff(&pts(&[[0.0, 0.0]]), &pts(&[[3.0, 4.0]])).unwrap(),
            5.0
        );
        let empty = Points::<f64>::with_capacity(2, 0);
        assert!(matches!(
            hausdorff(&a, &empty),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn l2_examples() {
        let a = Points::<f64>::from_scalars(vec![0.5; 10]);
        let b = Points::from_scalars(vec![0.0; 10]);
        assert_eq!(cumulative_l2(&a, &a).unwrap(), 0.0);
        assert!((cumulative_l2(&a, &b).unwrap() - 5.0).abs() < 1e-12);
        let c = Points::from_scalars(vec![0.0; 9]);
        assert!(matches!(
            cumulative_l2(&a, &c),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn cosine_phase_is_linear() {
        let n = 400;
        let f = 5.0; // cycles over the window
        let x: Vec<f64> = (0..n)
            .map(|i| (2.0 * PI * f * i as f64 / n as f64).cos())
            .collect();
        let ph = unwrap_phase(&analytic_phase(&x).unwrap().phase);
        let (lo, hi) = trimmed_range(n);
        for (i, p) in ph.iter().enumerate().take(hi).skip(lo) {
            let expect = 2.0 * PI * f * i as f64 / n as f64;
            assert!((p - ph[0] - expect).abs() < 0.05, "sample {i}");
        }
    }

    #[test]
    fn sine_lags_cosine_by_quarter_period() {
        let n = 256;
        let w = |i: usize| 2.0 * PI * 4.0 * i as f64 / n as f64;
        let c: Vec<f64> = (0..n).map(|i| w(i).cos()).collect();
        let s: Vec<f64> = (0..n).map(|i| w(i).sin()).collect();
        let pc = analytic_phase(&c).unwrap().phase;
        let ps = analytic_phase(&s).unwrap().phase;
        let (lo, hi) = trimmed_range(n);
        for i in lo..hi {
            let mut d = pc[i] - ps[i];
            while d <= -PI {
                d += 2.0 * PI;
            }
            while d > PI {
                d -= 2.0 * PI;
            }
            assert!((d - PI / 2.0).abs() < 0.05);
        }
    }

    #[test]
    fn constant_signal_is_flagged() {
        let ph = analytic_phase(&[3.0; 16]).unwrap();
        assert!(ph.zero_amplitude);
        assert!(ph.phase.iter().all(|&p| p == 0.0));
        assert!(analytic_phase(&[1.0; 7]).is_err());
    }

    #[test]
    fn rho_examples() {
        let n = 512;
        let w = |i: usize| 2.0 * PI * 6.0 * i as f64 / n as f64;
        let a: Vec<f64> = (0..n).map(|i| w(i).sin()).collect();
        assert!((rho(&[a.clone(), a.clone(), a.clone()]).unwrap() - 1.0).abs() < 1e-6);
        let b: Vec<f64> = (0..n).map(|i| w(i).cos()).collect();
        assert!((rho(&[a.clone(), b]).unwrap() - 1.0).abs() < 1e-3);

        let flat = vec![1.0; n];
        let r = rho_detailed(&[a.clone(), flat.clone(), a]).unwrap();
        assert_eq!(r.excluded, vec![1]);
        assert!(matches!(
            rho(&[flat.clone(), flat]),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn entropy_examples() {
        let flat = vec![vec![2.0; 50]; 3];
        assert_eq!(symbolic_entropy(&flat).unwrap(), 0.0);
        let x: Vec<f64> = (0..100).map(|i| (i as f64 * 0.3).sin()).collect();
        let h = symbolic_entropy(&[x.clone(), x.clone(), x]).unwrap();
        assert!(h <= 1.0 && h > 0.9);
    }

    #[test]
    fn sncsd_examples() {
        let n = 256;
        let w = |f: f64, i: usize| (2.0 * PI * f * i as f64 / n as f64).sin();
        let a: Vec<f64> = (0..n).map(|i| w(3.0, i)).collect();
        let b: Vec<f64> = (0..n).map(|i| w(11.0, i)).collect();
        assert!((sn_csd(&[a.clone(), a.clone()]).unwrap() - 1.0).abs() < 1e-9);
        assert!((sn_csd(&[a.clone(), b]).unwrap() - 0.5).abs() < 1e-6);
        let neg: Vec<f64> = a.iter().map(|v| -v).collect();
        assert!(sn_csd(&[a, neg]).unwrap().abs() < 1e-9);
        assert!(matches!(
            sn_csd(&[vec![0.0; 16], vec![0.0; 16]]),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn report_row() {
        let r = MetricReport {
            group: "g".into(),
            domain: "time".into(),
            method: "euc".into(),
            rho: 1.0,
            entropy: 0.5,
            sncsd: 0.25,
            l2: 2.0,
        };
        assert_eq!(r.csv_row(), "g,time,euc,1e0,5e-1,2.5e-1,2e0");
    }
}
