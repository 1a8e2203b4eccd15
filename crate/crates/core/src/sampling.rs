//! Spatial sampling: reparametrization of a time-based recording by arc length.
//!
//! [`spatial_sample`] walks the linear interpolant of the recording and emits a new
//! point every time the Euclidean distance from the previously emitted point reaches
//! `delta`. The emitted point is the exit of the sphere of radius `delta` through the
//! current segment, so consecutive samples are exactly `delta` apart regardless of how
//! fast (or whether) the demonstrator was moving. Zero-length segments, which encode
//! pauses, are skipped without any division.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::hausdorff;
use crate::scalar::{distance, Scalar};
use crate::trajectory::{polyline_length, ArcLengthPath, Points, Trajectory};

/// Absolute slack on the emission test: a point `delta - 1e-12` away still emits.
const BOUNDARY_TOL: f64 = 1e-12;

/// Hard cap on bisection steps and on grid doublings in [`optimize_delta`].
const MAX_SEARCH_STEPS: usize = 64;

/// Default spacing for alignment workloads.
pub const DEFAULT_ALIGNMENT_DELTA: f64 = 0.02;
/// Default spacing for skill extraction.
pub const DEFAULT_SKILL_DELTA: f64 = 0.005;

pub fn spatial_sample<T: Scalar>(
    traj: &Trajectory<T>,
    delta: T,
    keep_endpoint: bool,
) -> Result<ArcLengthPath<T>> {
    if !(delta > T::zero()) || !delta.is_finite() {
        return Err(Error::invalid(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if polyline_length(traj) == T::zero() {
        return Err(Error::DegeneratePath(
            "all recorded points coincide; the path has zero length".into(),
        ));
    }

    let r = traj.points();
    let times = traj.times();
    let n = traj.len();
    let dim = traj.dim();
    let tol = T::lit(BOUNDARY_TOL);
    let delta_sq = delta * delta;

    let mut points = Points::with_capacity(dim, n);
    let mut s = vec![T::zero()];
    let mut t = vec![times[0]];
    points.push(r.row(0));

    // Current sample and where it sits: on segment `seg` at parameter `alpha`.
    let mut current = r.row(0).to_vec();
    let mut seg = 0;
    let mut alpha = T::zero();
    let mut start = vec![T::zero(); dim];
    let mut emitted = 0usize;

    while seg + 1 < n {
        let end = r.row(seg + 1);
        if distance(end, &current) + tol < delta {
            seg += 1;
            alpha = T::zero();
            continue;
        }

        // Remaining part of the segment runs from `start` (point at `alpha`) to `end`.
        let a_pt = r.row(seg);
        for c in 0..dim {
            start[c] = a_pt[c] + (end[c] - a_pt[c]) * alpha;
        }
        let mut a = T::zero();
        let mut b = T::zero();
        let mut c0 = T::zero();
        for c in 0..dim {
            let w = start[c] - current[c];
            let e = end[c] - start[c];
            a = a + e * e;
            b = b + w * e;
            c0 = c0 + w * w;
        }
        if a == T::zero() {
            seg += 1;
            alpha = T::zero();
            continue;
        }
        let b = b + b;
        let c0 = (c0 - delta_sq).min(T::zero());
        let disc = (b * b - T::lit(4.0) * a * c0).max(T::zero()).sqrt();
        // Larger (exit) root of a*beta^2 + b*beta + c0, cancellation-free.
        let beta = if b >= T::zero() {
            if b + disc == T::zero() {
                T::zero()
            } else {
                -(c0 + c0) / (b + disc)
            }
        } else {
            (disc - b) / (a + a)
        };

        if beta >= T::one() {
            current.copy_from_slice(end);
            alpha = T::one();
        } else {
            let beta = beta.max(T::zero());
            for c in 0..dim {
                current[c] = start[c] + (end[c] - start[c]) * beta;
            }
            alpha = alpha + beta * (T::one() - alpha);
        }
        emitted += 1;
        points.push(&current);
        s.push(T::from_usize_lossy(emitted) * delta);
        let (t0, t1) = (times[seg], times[seg + 1]);
        t.push(if alpha >= T::one() {
            t1
        } else {
            t0 + (t1 - t0) * alpha
        });
    }

    let mut endpoint_appended = false;
    if keep_endpoint {
        let last = r.row(n - 1);
        let gap = distance(last, &current);
        if gap > tol {
            points.push(last);
            s.push(s[s.len() - 1] + gap);
            t.push(times[n - 1]);
            endpoint_appended = true;
        }
    }

    Ok(ArcLengthPath {
        delta,
        s,
        t,
        points,
        endpoint_appended,
    })
}

/// Outcome of the spacing search of [`optimize_delta`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaSearchReport<T> {
    /// Geometric progression `delta1 * 2^k` that was evaluated.
    pub grid: Vec<T>,
    /// Hausdorff distance for each grid value.
    pub dh: Vec<T>,
    /// `(delta, d_H)` pairs evaluated while bisecting between grid values.
    pub refinements: Vec<(T, T)>,
    /// Largest spacing found with `d_H <= dh_star`.
    pub chosen: Option<T>,
    /// `d_H` at `chosen`.
    pub achieved: Option<T>,
    pub feasible: bool,
    /// Whether `dh` was non-decreasing along the evaluated grid.
    pub grid_monotone: bool,
    /// Whether `0 < dh_star - achieved <= dh_tol` was met.
    pub tolerance_met: bool,
}

/// Hausdorff distance between the recorded samples and the spatial samples at `delta`.
pub fn sampling_error<T: Scalar>(traj: &Trajectory<T>, delta: T) -> Result<T> {
    let path = spatial_sample(traj, delta, false)?;
    hausdorff(traj.points(), &path.points)
}

/// Finds the largest spacing whose sampling error stays below `dh_star`.
///
/// The spacing is scanned along `delta1, 2*delta1, 4*delta1, ...` until the error exceeds
/// `dh_star`; the last feasible and first infeasible values then bracket a bisection
/// that stops once `0 < dh_star - d_H <= dh_tol`.
pub fn optimize_delta<T: Scalar>(
    traj: &Trajectory<T>,
    dh_star: T,
    dh_tol: T,
    delta1: T,
) -> Result<DeltaSearchReport<T>> {
    if !(dh_tol > T::zero() && dh_tol < dh_star) {
        return Err(Error::invalid(format!(
            "need 0 < dh_tol < dh_star, got dh_tol={dh_tol}, dh_star={dh_star}"
        )));
    }
    if !(delta1 > T::zero()) || !delta1.is_finite() {
        return Err(Error::invalid(format!(
            "delta1 must be positive, got {delta1}"
        )));
    }
    let length = polyline_length(traj);
    if length == T::zero() {
        return Err(Error::DegeneratePath(
            "all recorded points coincide; the path has zero length".into(),
        ));
    }

    let mut grid = Vec::new();
    let mut dh = Vec::new();
    let mut first_infeasible = None;
    let mut d = delta1;
    for _ in 0..MAX_SEARCH_STEPS {
        let e = sampling_error(traj, d)?;
        grid.push(d);
        dh.push(e);
        if e > dh_star {
            first_infeasible = Some(d);
            break;
        }
        // Past the path length the sample set no longer changes.
        if d > length {
            break;
        }
        d = d + d;
    }
    let grid_monotone = dh.windows(2).all(|w| w[1] >= w[0]);

    let within_tol = |e: T| dh_star - e > T::zero() && dh_star - e <= dh_tol;
    let mut refinements = Vec::new();
    let last_feasible = dh.iter().rposition(|&e| e <= dh_star);
    let Some(idx) = last_feasible else {
        return Ok(DeltaSearchReport {
            grid,
            dh,
            refinements,
            chosen: None,
            achieved: None,
            feasible: false,
            grid_monotone,
            tolerance_met: false,
        });
    };

    let mut lo = grid[idx];
    let mut lo_err = dh[idx];
    if let Some(mut hi) = first_infeasible {
        for _ in 0..MAX_SEARCH_STEPS {
            if within_tol(lo_err) {
                break;
            }
            let mid = lo + (hi - lo) / T::lit(2.0);
            if mid <= lo || mid >= hi {
                break;
            }
            let e = sampling_error(traj, mid)?;
            refinements.push((mid, e));
            if e <= dh_star {
                lo = mid;
                lo_err = e;
            } else {
                hi = mid;
            }
        }
    }

    Ok(DeltaSearchReport {
        grid,
        dh,
        refinements,
        chosen: Some(lo),
        achieved: Some(lo_err),
        feasible: true,
        grid_monotone,
        tolerance_met: within_tol(lo_err),
    })
}

/// Feed rate sample: the speed along the path over one interval of the arc-length path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeedSample<T> {
    /// Midpoint of the interval.
    pub t: T,
    /// `ds/dt` over the interval; `+inf` when both ends share a timestamp.
    pub s_dot: T,
}

/// Speed along the path between consecutive samples.
///
/// Since the samples are a constant distance apart, the tangent has unit norm and the
/// ratio `delta / dt` is the speed of the demonstrator along the curve.
pub fn recover_feed_rate<T: Scalar>(path: &ArcLengthPath<T>) -> Result<Vec<FeedSample<T>>> {
    if path.len() < 2 {
        return Err(Error::invalid(
            "feed rate needs a path with at least two samples",
        ));
    }
    let half = T::lit(0.5);
    Ok((0..path.len() - 1)
        .map(|k| {
            let dt = path.t[k + 1] - path.t[k];
            let ds = path.s[k + 1] - path.s[k];
            FeedSample {
                t: (path.t[k] + path.t[k + 1]) * half,
                s_dot: if dt > T::zero() {
                    ds / dt
                } else {
                    T::infinity()
                },
            }
        })
        .collect())
}

/// A timing law for [`retime`], expressed as the speed `ds/dt` along the path.
#[derive(Clone, Debug, PartialEq)]
pub enum FeedRate<T> {
    /// Constant speed.
    Constant(T),
    /// Constant speed chosen so the whole path takes this long.
    Duration(T),
    /// `rates[k]` holds on `[knots[k], knots[k + 1])`.
    Steps { knots: Vec<T>, rates: Vec<T> },
    /// Speed interpolated linearly between `(knots[k], rates[k])` pairs.
    Ramps { knots: Vec<T>, rates: Vec<T> },
}

impl<T: Scalar> FeedRate<T> {
    /// The timing law recovered from a spatially sampled path (interval-wise constant speed).
    pub fn from_path(path: &ArcLengthPath<T>) -> Result<Self> {
        let samples = recover_feed_rate(path)?;
        Ok(FeedRate::Steps {
            knots: path.t.clone(),
            rates: samples
                .iter()
                .map(|f| {
                    if f.s_dot.is_finite() {
                        f.s_dot
                    } else {
                        T::zero()
                    }
                })
                .collect(),
        })
    }
}

/// Replays `path` under a new timing law, sampled every `period` seconds starting at `path.t[0]`.
///
/// Progress past the end of the path is clamped to the final point.
pub fn retime<T: Scalar>(
    path: &ArcLengthPath<T>,
    feed: &FeedRate<T>,
    period: T,
) -> Result<Trajectory<T>> {
    if path.len() < 2 {
        return Err(Error::invalid(
            "retiming needs a path with at least two samples",
        ));
    }
    if !(period > T::zero()) {
        return Err(Error::invalid(format!(
            "sample period must be positive, got {period}"
        )));
    }
    let s_max = path.s_max();
    let t0 = path.t[0];

    // Piecewise description: (start time, start s, rate at start, rate at end, end time).
    let pieces: Vec<(T, T, T, T, T)> = match feed {
        FeedRate::Constant(v) | FeedRate::Duration(v) => {
            let rate = match feed {
                FeedRate::Duration(d) => {
                    if !(*d > T::zero()) {
                        return Err(Error::invalid(format!(
                            "duration must be positive, got {d}"
                        )));
                    }
                    s_max / *d
                }
                _ => *v,
            };
            if !(rate > T::zero()) || !rate.is_finite() {
                return Err(Error::invalid(format!(
                    "feed rate must be positive, got {rate}"
                )));
            }
            vec![(t0, T::zero(), rate, rate, t0 + s_max / rate)]
        }
        FeedRate::Steps { knots, rates } | FeedRate::Ramps { knots, rates } => {
            let ramps = matches!(feed, FeedRate::Ramps { .. });
            let needed = if ramps {
                knots.len()
            } else {
                knots.len().saturating_sub(1)
            };
            if knots.len() < 2 || rates.len() != needed {
                return Err(Error::invalid(
                    "feed profile needs >= 2 knots and one rate per interval (steps) or per knot (ramps)",
                ));
            }
            if knots.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::invalid("feed profile knots must be non-decreasing"));
            }
            if rates.iter().any(|r| *r < T::zero() || !r.is_finite()) {
                return Err(Error::invalid("feed rates must be finite and non-negative"));
            }
            let mut s = T::zero();
            let mut pieces = Vec::with_capacity(knots.len());
            for k in 0..knots.len() - 1 {
                let (ra, rb) = if ramps {
                    (rates[k], rates[k + 1])
                } else {
                    (rates[k], rates[k])
                };
                pieces.push((knots[k], s, ra, rb, knots[k + 1]));
                s = s + (ra + rb) * T::lit(0.5) * (knots[k + 1] - knots[k]);
            }
            pieces
        }
    };

    let start = pieces[0].0;
    // End at the first instant the path is complete, or at the end of the profile.
    let mut end = pieces[pieces.len() - 1].4;
    for &(ta, sa, ra, rb, tb) in &pieces {
        let sb = sa + (ra + rb) * T::lit(0.5) * (tb - ta);
        if sb >= s_max {
            end = time_reaching(ta, sa, ra, rb, tb, s_max);
            break;
        }
    }
    if !(end > start) {
        return Err(Error::invalid(
            "feed profile yields a non-positive duration",
        ));
    }

    let s_at = |t: T| -> T {
        let idx = pieces.iter().rposition(|p| p.0 <= t).unwrap_or(0);
        let (ta, sa, ra, rb, tb) = pieces[idx];
        let tau = (t - ta).max(T::zero()).min(tb - ta);
        let span = tb - ta;
        let slope = if span > T::zero() {
            (rb - ra) / span
        } else {
            T::zero()
        };
        (sa + ra * tau + slope * tau * tau * T::lit(0.5)).min(s_max)
    };

    let mut times = Vec::new();
    let mut k = 0usize;
    loop {
        let t = start + period * T::from_usize_lossy(k);
        if t >= end {
            break;
        }
        times.push(t);
        k += 1;
    }
    if times
        .last()
        .is_none_or(|&t| end - t > period * T::lit(1e-9))
    {
        times.push(end);
    } else if let Some(last) = times.last_mut() {
        *last = end;
    }
    if times.len() < 2 {
        times = vec![start, end];
    }

    let mut pts = Points::with_capacity(path.points.dim(), times.len());
    let mut buf = Vec::new();
    let mut seg = 0;
    for &t in &times {
        let s = s_at(t);
        while seg + 2 < path.len() && path.s[seg + 1] <= s {
            seg += 1;
        }
        let (sa, sb) = (path.s[seg], path.s[seg + 1]);
        let alpha = if sb > sa {
            ((s - sa) / (sb - sa)).max(T::zero()).min(T::one())
        } else {
            T::zero()
        };
        crate::scalar::lerp_into(
            path.points.row(seg),
            path.points.row(seg + 1),
            alpha,
            &mut buf,
        );
        pts.push(&buf);
    }
    Trajectory::new(times, pts)
}

/// Time within a linear-rate piece at which the accumulated arc length reaches `target`.
fn time_reaching<T: Scalar>(ta: T, sa: T, ra: T, rb: T, tb: T, target: T) -> T {
    let need = target - sa;
    let span = tb - ta;
    if need <= T::zero() {
        return ta;
    }
    let slope = if span > T::zero() {
        (rb - ra) / span
    } else {
        T::zero()
    };
    let tau = if slope.abs() <= T::epsilon() * ra.abs().max(T::one()) {
        need / ra
    } else {
        // 0.5*slope*tau^2 + ra*tau - need = 0
        let disc = (ra * ra + T::lit(2.0) * slope * need).max(T::zero()).sqrt();
        (T::lit(2.0) * need) / (ra + disc)
    };
    (ta + tau).min(tb)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(times: &[f64], rows: &[[f64; 2]]) -> Trajectory<f64> {
        Trajectory::from_rows(times.to_vec(), rows.iter()).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn uniform_line() {
        let r = traj(&[0.0, 1.0], &[[0.0, 0.0], [1.0, 0.0]]);
        let p = spatial_sample(&r, 0.25, false).unwrap();
        assert_eq!(p.s, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(close(&p.t, &[0.0, 0.25, 0.5, 0.75, 1.0], 1e-15));
        assert!(close(
            p.points.as_slice(),
            &[0., 0., 0.25, 0., 0.5, 0., 0.75, 0., 1., 0.],
            1e-15
        ));
        assert!(!p.endpoint_appended);
    }

    #[test]
    fn pause_is_skipped_with_earliest_time() {
        let r = traj(
            &[0.0, 1.0, 2.0, 3.0, 4.0],
            &[[0.0, 0.0], [0.5, 0.0], [0.5, 0.0], [0.5, 0.0], [1.0, 0.0]],
        );
        let p = spatial_sample(&r, 0.25, false).unwrap();
        assert_eq!(p.s, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(close(&p.t, &[0.0, 0.5, 1.0, 3.5, 4.0], 1e-15));
        assert!(close(
            p.points.column(0).as_slice(),
            &[0.0, 0.25, 0.5, 0.75, 1.0],
            1e-15
        ));
    }

    #[test]
    fn corner_uses_sphere_segment_intersection() {
        let r = traj(&[0.0, 1.0, 2.0], &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]);
        let p = spatial_sample(&r, 0.75, false).unwrap();
        let y = (0.5f64).sqrt();
        assert_eq!(p.s, vec![0.0, 0.75, 1.5]);
        assert!(close(
            p.points.as_slice(),
            &[0.0, 0.0, 0.75, 0.0, 1.0, y],
            1e-12
        ));
        assert!(close(&p.t, &[0.0, 0.75, 1.0 + y], 1e-12));
    }

    #[test]
    fn keep_endpoint_appends_short_tail() {
        let r = traj(&[0.0, 1.0], &[[0.0, 0.0], [1.0, 0.0]]);
        let p = spatial_sample(&r, 0.3, true).unwrap();
        assert!(p.endpoint_appended);
        assert_eq!(p.len(), 5);
        assert_eq!(p.spatial_len(), 4);
        assert_eq!(p.points.last().unwrap(), &[1.0, 0.0]);
        assert!((p.s[4] - 1.0).abs() < 1e-12);
        // Nothing to append when the last sample already is the endpoint.
        let q = spatial_sample(&r, 0.25, true).unwrap();
        assert!(!q.endpoint_appended);
    }

    #[test]
    fn delta_beyond_length_gives_start_only() {
        let r = traj(&[0.0, 1.0], &[[0.0, 0.0], [1.0, 0.0]]);
        let p = spatial_sample(&r, 2.0, false).unwrap();
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn errors() {
        let r = traj(&[0.0, 1.0], &[[0.0, 0.0], [1.0, 0.0]]);
        assert!(matches!(
            spatial_sample(&r, 0.0, false),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            spatial_sample(&r, -1.0, false),
            Err(Error::InvalidArgument(_))
        ));
        let flat = traj(&[0.0, 1.0, 2.0], &[[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]]);
        assert!(matches!(
            spatial_sample(&flat, 0.1, false),
            Err(Error::DegeneratePath(_))
        ));
        assert!(matches!(
            optimize_delta(&flat, 0.1, 0.01, 0.01),
            Err(Error::DegeneratePath(_))
        ));
    }

    #[test]
    fn feed_rate_examples() {
        let r = traj(&[0.0, 1.0], &[[0.0, 0.0], [1.0, 0.0]]);
        let p = spatial_sample(&r, 0.25, false).unwrap();
        let f = recover_feed_rate(&p).unwrap();
        assert!(f.iter().all(|x| (x.s_dot - 1.0).abs() < 1e-12));

        let r = traj(
            &[0.0, 1.0, 2.0, 3.0, 4.0],
            &[[0.0, 0.0], [0.5, 0.0], [0.5, 0.0], [0.5, 0.0], [1.0, 0.0]],
        );
        let p = spatial_sample(&r, 0.25, false).unwrap();
        let f: Vec<f64> = recover_feed_rate(&p)
            .unwrap()
            .iter()
            .map(|x| x.s_dot)
            .collect();
        assert!(close(&f, &[0.5, 0.5, 0.1, 0.5], 1e-12));

        let r = traj(&[0.0, 2.0], &[[0.0, 0.0], [1.0, 0.0]]);
        let p = spatial_sample(&r, 1.0, false).unwrap();
        let f = recover_feed_rate(&p).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].s_dot, 0.5);
        assert_eq!(f[0].t, 1.0);
    }

    #[test]
    fn feed_rate_marks_zero_duration_intervals() {
        let path = ArcLengthPath {
            delta: 1.0,
            s: vec![0.0f64, 1.0],
            t: vec![3.0, 3.0],
            points: Points::from_scalars(vec![0.0, 1.0]),
            endpoint_appended: false,
        };
        assert!(recover_feed_rate(&path).unwrap()[0].s_dot.is_infinite());
    }

    #[test]
    fn retime_constant_rates() {
        let r = traj(&[0.0, 1.0], &[[0.0, 0.0], [1.0, 0.0]]);
        let p = spatial_sample(&r, 0.25, false).unwrap();
        let a = retime(&p, &FeedRate::Constant(1.0), 0.1).unwrap();
        assert!((a.duration() - 1.0).abs() < 1e-12);
        assert_eq!(a.len(), 11);
        for (t, x) in a.times().iter().zip(a.points().rows()) {
            assert!((x[0] - t).abs() < 1e-12);
        }
        let b = retime(&p, &FeedRate::Constant(2.0), 0.1).unwrap();
        assert!((b.duration() - 0.5).abs() < 1e-12);
        let c = retime(&p, &FeedRate::Duration(4.0), 0.5).unwrap();
        assert!((c.duration() - 4.0).abs() < 1e-12);
        assert!(matches!(
            retime(&p, &FeedRate::Duration(0.0), 0.1),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn retime_triangular_profile_matches_closed_form() {
        // Speed rises linearly 0 -> 2 over [0, 0.5] then falls back to 0 at 1: s(1) = 1.
        let r = traj(&[0.0, 1.0], &[[0.0, 0.0], [1.0, 0.0]]);
        let p = spatial_sample(&r, 0.01, false).unwrap();
        let feed = FeedRate::Ramps {
            knots: vec![0.0, 0.5, 1.0],
            rates: vec![0.0, 2.0, 0.0],
        };
        let out = retime(&p, &feed, 0.01).unwrap();
        let exact = |t: f64| {
            if t <= 0.5 {
                2.0 * t * t
            } else {
                1.0 - 2.0 * (1.0 - t) * (1.0 - t)
            }
        };
        for (t, x) in out.times().iter().zip(out.points().rows()) {
            assert!(
                (x[0] - exact(*t)).abs() < 1e-6,
                "t={t}: {} vs {}",
                x[0],
                exact(*t)
            );
        }
    }

    #[test]
    fn line_search_grid_matches_brute_force() {
        // 1-D line [0, 1] sampled every 0.001.
        let n = 1001;
        let times: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let xs: Vec<f64> = (0..n).map(|i| i as f64 * 0.001).collect();
        let r = Trajectory::new(times, Points::from_scalars(xs.clone())).unwrap();
        let rep = optimize_delta(&r, 0.01, 1e-4, 0.001).unwrap();

        // Oracle: spatial samples of a line are k*delta; brute-force both directed distances.
        let oracle = |delta: f64| {
            let k = ((1.0 + 1e-12) / delta).floor() as usize;
            let ss: Vec<f64> = (0..=k).map(|j| j as f64 * delta).collect();
            let dir = |a: &[f64], b: &[f64]| {
                a.iter()
                    .map(|x| {
                        b.iter()
                            .map(|y| (x - y).abs())
                            .fold(f64::INFINITY, f64::min)
                    })
                    .fold(0.0, f64::max)
            };
            dir(&xs, &ss).max(dir(&ss, &xs))
        };
        assert_eq!(rep.grid, vec![0.001, 0.002, 0.004, 0.008, 0.016, 0.032]);
        for (d, e) in rep.grid.iter().zip(&rep.dh) {
            assert!(
                (e - oracle(*d)).abs() < 1e-9,
                "delta {d}: {e} vs {}",
                oracle(*d)
            );
        }
        assert!(rep.feasible);
        let chosen = rep.chosen.unwrap();
        assert!((0.016..0.032).contains(&chosen));
        assert!(rep.achieved.unwrap() <= 0.01);
        assert!(rep.dh[rep.grid.len() - 1] > 0.01);
    }

    #[test]
    fn infeasible_when_initial_spacing_too_coarse() {
        let r = traj(&[0.0, 1.0, 2.0], &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]);
        let rep = optimize_delta(&r, 0.01, 0.001, 0.5).unwrap();
        assert!(!rep.feasible);
        assert!(rep.chosen.is_none());
        assert!(matches!(
            optimize_delta(&r, 0.01, 0.01, 0.5),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            optimize_delta(&r, 0.01, 0.001, 0.0),
            Err(Error::InvalidArgument(_))
        ));
    }
}
