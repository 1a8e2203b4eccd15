//! Synthetic demonstrations: one geometric path, many timing laws.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::trajectory::{resample_by_parameter, DemonstrationSet, Points, Trajectory};

/// Number of segments used to flatten curved shapes.
const CURVE_SEGMENTS: usize = 256;

/// Demos per synthetic group (matches six recordings per symbol).
pub const SYNTHETIC_DEMOS_PER_GROUP: usize = 6;

/// Geometric path of a synthetic demonstration. Coordinates are in metres.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Shape {
    Line {
        start: Vec<f64>,
        end: Vec<f64>,
    },
    LCorner {
        start: Vec<f64>,
        corner: Vec<f64>,
        end: Vec<f64>,
    },
    /// `y = amplitude * sin(2 pi periods x / length)` for `x` in `[0, length]`.
    Sine {
        length: f64,
        amplitude: f64,
        periods: f64,
    },
    /// Bezier curve of any degree given by its control points.
    Bezier {
        control: Vec<Vec<f64>>,
    },
    /// An explicit polyline.
    Polyline {
        vertices: Vec<Vec<f64>>,
    },
}

impl Shape {
    /// Eight planar preset shapes of roughly 0.3-0.5 m extent.
    pub fn presets() -> Vec<(&'static str, Shape)> {
        let bez = |c: &[[f64; 2]]| Shape::Bezier {
            control: c.iter().map(|p| p.to_vec()).collect(),
        };
        vec![
            (
                "line",
                Shape::Line {
                    start: vec![0.0, 0.0],
                    end: vec![0.4, 0.2],
                },
            ),
            (
                "l-corner",
                Shape::LCorner {
                    start: vec![0.0, 0.3],
                    corner: vec![0.0, 0.0],
                    end: vec![0.3, 0.0],
                },
            ),
            (
                "sine",
                Shape::Sine {
                    length: 0.4,
                    amplitude: 0.05,
                    periods: 1.0,
                },
            ),
            (
                "double-sine",
                Shape::Sine {
                    length: 0.5,
                    amplitude: 0.04,
                    periods: 2.0,
                },
            ),
            (
                "s-curve",
                bez(&[[0.0, 0.0], [0.4, 0.0], [-0.1, 0.3], [0.3, 0.3]]),
            ),
            (
                "arc",
                bez(&[[0.0, 0.0], [0.0, 0.3], [0.35, 0.3], [0.35, 0.0]]),
            ),
            (
                "loop",
                bez(&[[0.0, 0.0], [0.5, 0.35], [-0.15, 0.35], [0.3, 0.0]]),
            ),
            (
                "zigzag",
                Shape::Polyline {
                    vertices: vec![
                        vec![0.0, 0.0],
                        vec![0.1, 0.12],
                        vec![0.2, 0.0],
                        vec![0.3, 0.12],
                        vec![0.4, 0.0],
                    ],
                },
            ),
        ]
    }

    pub fn preset(name: &str) -> Option<Shape> {
        Self::presets()
            .into_iter()
            .find(|(n, _)| *n == name)
            .map(|(_, s)| s)
    }

    /// The shape as a polyline; curves are flattened into 256 segments.
    pub fn polyline<T: Scalar>(&self) -> Result<Points<T>> {
        let rows: Vec<Vec<f64>> = match self {
            Shape::Line { start, end } => vec![start.clone(), end.clone()],
            Shape::LCorner { start, corner, end } => {
                vec![start.clone(), corner.clone(), end.clone()]
            }
            Shape::Sine {
                length,
                amplitude,
                periods,
            } => {
                if !(*length > 0.0) || !amplitude.is_finite() || !(*periods > 0.0) {
                    return Err(Error::invalid(
                        "sine needs length > 0, finite amplitude, periods > 0",
                    ));
                }
                (0..=CURVE_SEGMENTS)
                    .map(|i| {
                        let x = length * i as f64 / CURVE_SEGMENTS as f64;
                        let phase = std::f64::consts::TAU * periods * x / length;
                        vec![x, amplitude * phase.sin()]
                    })
                    .collect()
            }
            Shape::Bezier { control } => {
                if control.len() < 2 {
                    return Err(Error::invalid(
                        "a Bezier curve needs at least two control points",
                    ));
                }
                (0..=CURVE_SEGMENTS)
                    .map(|i| de_casteljau(control, i as f64 / CURVE_SEGMENTS as f64))
                    .collect()
            }
            Shape::Polyline { vertices } => vertices.clone(),
        };
        let dim = rows.first().map_or(0, Vec::len);
        if dim == 0 || rows.len() < 2 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid(
                "shape needs at least two points of one non-zero dimension",
            ));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("shape coordinates must be finite"));
        }
        let pts = Points::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| T::lit(v)).collect::<Vec<_>>()),
        )?;
        if !(pts.polyline_length() > T::zero()) {
            return Err(Error::DegeneratePath("shape has zero length".into()));
        }
        Ok(pts)
    }
}

fn de_casteljau(control: &[Vec<f64>], u: f64) -> Vec<f64> {
    let mut pts: Vec<Vec<f64>> = control.to_vec();
    for level in (1..pts.len()).rev() {
        for i in 0..level {
            let next = pts[i + 1].clone();
            for (a, b) in pts[i].iter_mut().zip(next) {
                *a += (b - *a) * u;
            }
        }
    }
    pts.swap_remove(0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pause {
    /// Position along the path as a fraction of its length, strictly inside (0, 1).
    pub at: f64,
    /// Seconds.
    pub duration: f64,
}

/// Timing law of a synthetic demonstration.
///
/// The demonstrator moves for `duration` seconds in total, with relative speed given by
/// the piecewise-linear profile through `speed` knots `(path fraction, factor)` (held
/// constant outside the knots; constant speed when empty), and stops for each pause.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingSpec {
    pub duration: f64,
    pub pauses: Vec<Pause>,
    pub speed: Vec<(f64, f64)>,
    /// Seeds the measurement noise.
    pub seed: u64,
}

impl TimingSpec {
    pub fn constant(duration: f64, seed: u64) -> Self {
        Self {
            duration,
            pauses: Vec::new(),
            speed: Vec::new(),
            seed,
        }
    }

    /// A randomized law: 4-8 s of motion, 0-2 pauses of 0.5-2 s, and a speed profile
    /// with 3-5 knots whose factors span 0.3-2.0.
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7417_a5c3_55e1_0b29);
        let duration = rng.gen_range(4.0..8.0);
        let mut pauses: Vec<Pause> = (0..rng.gen_range(0..=2))
            .map(|_| Pause {
                at: rng.gen_range(0.1..0.9),
                duration: rng.gen_range(0.5..2.0),
            })
            .collect();
        pauses.sort_by(|a, b| a.at.total_cmp(&b.at));
        let knots = rng.gen_range(3..=5);
        let speed = (0..knots)
            .map(|i| (i as f64 / (knots - 1) as f64, rng.gen_range(0.3..2.0)))
            .collect();
        Self {
            duration,
            pauses,
            speed,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(Error::invalid("timing duration must be positive"));
        }
        for p in &self.pauses {
            if !(p.at > 0.0 && p.at < 1.0) {
                return Err(Error::invalid(format!(
                    "pause position {} outside (0, 1)",
                    p.at
                )));
            }
            if !(p.duration > 0.0) || !p.duration.is_finite() {
                return Err(Error::invalid("pause durations must be positive"));
            }
        }
        for w in self.speed.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::invalid("speed knots must have increasing positions"));
            }
        }
        for &(at, v) in &self.speed {
            if !(0.0..=1.0).contains(&at) || !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(
                    "speed knots need positions in [0, 1] and positive factors",
                ));
            }
        }
        Ok(())
    }

    /// Total recording time including pauses.
    pub fn total_duration(&self) -> f64 {
        self.duration + self.pauses.iter().map(|p| p.duration).sum::<f64>()
    }
}

/// One piece of the time-to-progress map.
#[derive(Clone, Copy, Debug)]
enum Piece {
    /// Progress moves from `p0` to `p1` with speed factor linear in progress.
    Move {
        t0: f64,
        t1: f64,
        p0: f64,
        p1: f64,
        v0: f64,
        v1: f64,
    },
    Hold {
        t1: f64,
        p: f64,
    },
}

/// Progress along the path (fraction of its length) as a function of time.
struct TimingLaw {
    pieces: Vec<Piece>,
    /// `dp/dt = scale * factor(p)`.
    scale: f64,
}

impl TimingLaw {
    fn new(spec: &TimingSpec) -> Result<Self> {
        spec.validate()?;
        let factor = |p: f64| -> f64 {
            let k = &spec.speed;
            match k.len() {
                0 => 1.0,
                _ if p <= k[0].0 => k[0].1,
                _ if p >= k[k.len() - 1].0 => k[k.len() - 1].1,
                _ => {
                    let i = k.partition_point(|&(at, _)| at <= p) - 1;
                    let (a, b) = (k[i], k[i + 1]);
                    a.1 + (b.1 - a.1) * (p - a.0) / (b.0 - a.0)
                }
            }
        };
        let mut breaks: Vec<f64> = vec![0.0, 1.0];
        breaks.extend(spec.speed.iter().map(|k| k.0));
        breaks.extend(spec.pauses.iter().map(|p| p.at));
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();

        // Time to cross [p0, p1] at unit scale, speed factor linear from v0 to v1.
        let unit_time = |p0: f64, p1: f64, v0: f64, v1: f64| -> f64 {
            let k = (v1 - v0) / (p1 - p0);
            if (v1 - v0).abs() <= 1e-12 * v0.max(v1) {
                (p1 - p0) / v0
            } else {
                (v1 / v0).ln() / k
            }
        };
        let moving: f64 = breaks
            .windows(2)
            .map(|w| unit_time(w[0], w[1], factor(w[0]), factor(w[1])))
            .sum();
        let scale = moving / spec.duration;

        let mut pieces = Vec::new();
        let mut t = 0.0;
        let mut pauses = spec.pauses.clone();
        pauses.sort_by(|a, b| a.at.total_cmp(&b.at));
        let mut next_pause = pauses.iter().peekable();
        for w in breaks.windows(2) {
            while let Some(p) = next_pause.next_if(|p| p.at <= w[0]) {
                pieces.push(Piece::Hold {
                    t1: t + p.duration,
                    p: p.at,
                });
                t += p.duration;
            }
            let (v0, v1) = (factor(w[0]), factor(w[1]));
            let dt = unit_time(w[0], w[1], v0, v1) / scale;
            pieces.push(Piece::Move {
                t0: t,
                t1: t + dt,
                p0: w[0],
                p1: w[1],
                v0,
                v1,
            });
            t += dt;
        }
        Ok(Self { pieces, scale })
    }

    fn total(&self) -> f64 {
        match self.pieces.last() {
            Some(Piece::Move { t1, .. } | Piece::Hold { t1, .. }) => *t1,
            None => 0.0,
        }
    }

    /// Progress at time `t`.
    fn progress(&self, t: f64) -> f64 {
        let i = self
            .pieces
            .partition_point(|p| match p {
                Piece::Move { t1, .. } | Piece::Hold { t1, .. } => *t1 < t,
            })
            .min(self.pieces.len() - 1);
        match self.pieces[i] {
            Piece::Hold { p, .. } => p,
            Piece::Move {
                t0,
                t1,
                p0,
                p1,
                v0,
                v1,
            } => {
                if t >= t1 {
                    return p1;
                }
                let tau = (t - t0).max(0.0) * self.scale;
                let k = (v1 - v0) / (p1 - p0);
                let p = if (v1 - v0).abs() <= 1e-12 * v0.max(v1) {
                    p0 + v0 * tau
                } else {
                    p0 + v0 * (k * tau).exp_m1() / k
                };
                p.clamp(p0, p1)
            }
        }
    }

    /// Earliest time at which progress reaches `p`.
    fn time_at(&self, p: f64) -> f64 {
        for piece in &self.pieces {
            if let Piece::Move {
                t0,
                t1,
                p0,
                p1,
                v0,
                v1,
            } = *piece
            {
                if p > p1 {
                    continue;
                }
                if p <= p0 {
                    return t0;
                }
                let k = (v1 - v0) / (p1 - p0);
                let v = v0 + k * (p - p0);
                let tau = if (v1 - v0).abs() <= 1e-12 * v0.max(v1) {
                    (p - p0) / v0
                } else {
                    (v / v0).ln() / k
                };
                return (t0 + tau / self.scale).min(t1);
            }
        }
        self.total()
    }
}

/// Generates a recording of `shape` under `timing`, sampled at `sample_rate` Hz, with
/// isotropic Gaussian noise of standard deviation `noise_sigma` added to the points.
pub fn generate_synthetic<T: Scalar>(
    shape: &Shape,
    timing: &TimingSpec,
    sample_rate: f64,
    noise_sigma: f64,
) -> Result<Trajectory<T>> {
    sample_polyline(&shape.polyline::<T>()?, timing, sample_rate, noise_sigma)
}

/// Records the polyline `path` under `timing`.
///
/// Samples are taken uniformly in time; in addition, every interior vertex of `path` is
/// recorded at the instant it is reached, so that a noise-free recording traces exactly
/// the given polyline whatever the timing law.
pub fn sample_polyline<T: Scalar>(
    path: &Points<T>,
    timing: &TimingSpec,
    sample_rate: f64,
    noise_sigma: f64,
) -> Result<Trajectory<T>> {
    if !(sample_rate > 0.0) || !sample_rate.is_finite() {
        return Err(Error::invalid(format!(
            "sample rate must be positive, got {sample_rate}"
        )));
    }
    if !(noise_sigma >= 0.0) || !noise_sigma.is_finite() {
        return Err(Error::invalid("noise sigma must be non-negative"));
    }
    if path.len() < 2 {
        return Err(Error::invalid("path needs at least two vertices"));
    }
    let law = TimingLaw::new(timing)?;
    let total = law.total();

    let mut cum = Vec::with_capacity(path.len());
    let mut acc = 0.0;
    cum.push(0.0);
    for w in 1..path.len() {
        acc += crate::scalar::distance(path.row(w - 1), path.row(w)).to_f64_lossy();
        cum.push(acc);
    }
    let length = acc;
    if !(length > 0.0) {
        return Err(Error::DegeneratePath("path has zero length".into()));
    }

    // (time, Some(vertex) | None for an interpolated sample)
    let count = (total * sample_rate).floor() as usize;
    let mut events: Vec<(f64, Option<usize>)> = (0..=count)
        .map(|i| (i as f64 / sample_rate, None))
        .collect();
    if events.last().is_none_or(|e| e.0 < total) {
        events.push((total, None));
    }
    for v in 1..path.len() - 1 {
        events.push((law.time_at(cum[v] / length), Some(v)));
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.is_some().cmp(&a.1.is_some())));
    events.dedup_by(|later, earlier| later.0 == earlier.0);

    let dim = path.dim();
    let mut times = Vec::with_capacity(events.len());
    let mut pts = Points::with_capacity(dim, events.len());
    let mut seg = 0;
    let mut buf = Vec::with_capacity(dim);
    let last = events.len() - 1;
    for (i, &(t, vertex)) in events.iter().enumerate() {
        times.push(T::lit(t));
        if let Some(v) = vertex {
            pts.push(path.row(v));
            continue;
        }
        if i == 0 {
            pts.push(path.row(0));
            continue;
        }
        if i == last {
            pts.push(path.row(path.len() - 1));
            continue;
        }
        let s = law.progress(t) * length;
        while seg + 2 < path.len() && cum[seg + 1] <= s {
            seg += 1;
        }
        let seg_len = cum[seg + 1] - cum[seg];
        if s <= cum[seg] {
            pts.push(path.row(seg));
        } else if s >= cum[seg + 1] {
            pts.push(path.row(seg + 1));
        } else {
            let alpha = T::lit((s - cum[seg]) / seg_len);
            crate::scalar::lerp_into(path.row(seg), path.row(seg + 1), alpha, &mut buf);
            pts.push(&buf);
        }
    }

    if noise_sigma > 0.0 {
        let normal = Normal::new(0.0, noise_sigma).map_err(|e| Error::invalid(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(timing.seed);
        let noisy: Vec<T> = pts
            .as_slice()
            .iter()
            .map(|&v| v + T::lit(normal.sample(&mut rng)))
            .collect();
        pts = Points::new(dim, noisy)?;
    }
    Trajectory::new(times, pts)
}

/// `m` points spaced uniformly in arc length along the shape (endpoints included).
pub fn ground_truth<T: Scalar>(shape: &Shape, m: usize) -> Result<Points<T>> {
    let path = shape.polyline::<T>()?;
    let mut cum = Vec::with_capacity(path.len());
    let mut acc = T::zero();
    cum.push(acc);
    for w in 1..path.len() {
        acc = acc + crate::scalar::distance(path.row(w - 1), path.row(w));
        cum.push(acc);
    }
    resample_by_parameter(&cum, &path, m)
}

/// A group of [`SYNTHETIC_DEMOS_PER_GROUP`] recordings of `shape` under random timing
/// laws derived from `seed`.
pub fn synthetic_group<T: Scalar>(
    name: &str,
    shape: &Shape,
    seed: u64,
    sample_rate: f64,
    noise_sigma: f64,
) -> Result<DemonstrationSet<T>> {
    let demos = (0..SYNTHETIC_DEMOS_PER_GROUP as u64)
        .map(|i| {
            let timing = TimingSpec::random(seed.wrapping_mul(1_000_003).wrapping_add(i));
            generate_synthetic(shape, &timing, sample_rate, noise_sigma)
        })
        .collect::<Result<Vec<_>>>()?;
    DemonstrationSet::new(name, demos)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> Shape {
        Shape::Line {
            start: vec![0.0, 0.0],
            end: vec![0.3, 0.4],
        }
    }

    #[test]
    fn constant_line_is_uniform() {
        let traj: Trajectory<f64> =
            generate_synthetic(&line(), &TimingSpec::constant(2.0, 0), 50.0, 0.0).unwrap();
        assert_eq!(traj.len(), 101);
        assert!((traj.points().polyline_length() - 0.5).abs() < 1e-9);
        let p = traj.points();
        for i in 1..p.len() {
            let d = crate::scalar::distance(p.row(i - 1), p.row(i));
            assert!((d - 0.005).abs() < 1e-12);
        }
    }

    #[test]
    fn pause_repeats_the_midpoint() {
        let mut spec = TimingSpec::constant(2.0, 0);
        spec.pauses.push(Pause {
            at: 0.5,
            duration: 2.0,
        });
        let rate = 50.0;
        let traj: Trajectory<f64> = generate_synthetic(&line(), &spec, rate, 0.0).unwrap();
        assert!((traj.duration() - 4.0).abs() < 1e-12);
        let p = traj.points();
        let mid = [0.15, 0.2];
        let repeated = p
            .rows()
            .filter(|r| crate::scalar::distance(r, &mid) < 1e-12)
            .count();
        assert!(repeated >= 2 * rate as usize, "{repeated}");
    }

    #[test]
    fn ramps_integrate_to_the_requested_duration() {
        let spec = TimingSpec {
            duration: 5.0,
            pauses: vec![
                Pause {
                    at: 0.3,
                    duration: 1.0,
                },
                Pause {
                    at: 0.7,
                    duration: 0.5,
                },
            ],
            speed: vec![(0.0, 0.5), (0.5, 2.0), (1.0, 1.0)],
            seed: 1,
        };
        let law = TimingLaw::new(&spec).unwrap();
        assert!((law.total() - 6.5).abs() < 1e-12);
        for i in 0..=100 {
            let p = i as f64 / 100.0;
            let t = law.time_at(p);
            assert!((law.progress(t) - p).abs() < 1e-12, "p {p}");
        }
        // progress is monotone
        let mut prev = 0.0;
        for i in 0..=650 {
            let p = law.progress(i as f64 / 100.0);
            assert!(p >= prev);
            prev = p;
        }
    }

    #[test]
    fn vertices_are_recorded_exactly() {
        let shape = Shape::preset("zigzag").unwrap();
        let poly = shape.polyline::<f64>().unwrap();
        let traj: Trajectory<f64> =
            generate_synthetic(&shape, &TimingSpec::random(4), 30.0, 0.0).unwrap();
        for v in poly.rows() {
            assert!(traj.points().rows().any(|r| r == v));
        }
        assert_eq!(traj.points().first(), poly.first());
        assert_eq!(traj.points().last(), poly.last());
    }

    #[test]
    fn deterministic_and_validated() {
        let spec = TimingSpec::random(9);
        let a: Trajectory<f64> = generate_synthetic(&line(), &spec, 100.0, 1e-3).unwrap();
        let b: Trajectory<f64> = generate_synthetic(&line(), &spec, 100.0, 1e-3).unwrap();
        assert_eq!(a, b);
        assert!(generate_synthetic::<f64>(&line(), &spec, 0.0, 0.0).is_err());
        let bad = TimingSpec {
            pauses: vec![Pause {
                at: 1.0,
                duration: 1.0,
            }],
            ..TimingSpec::constant(1.0, 0)
        };
        assert!(generate_synthetic::<f64>(&line(), &bad, 10.0, 0.0).is_err());
        assert!(Shape::Bezier {
            control: vec![vec![0.0, 0.0]]
        }
        .polyline::<f64>()
        .is_err());
        for (_, s) in Shape::presets() {
            let len = s.polyline::<f64>().unwrap().polyline_length();
            assert!(len > 0.25 && len < 1.0, "{len}");
        }
    }

    #[test]
    fn ground_truth_spacing() {
        let g: Points<f64> = ground_truth(&line(), 11).unwrap();
        for i in 1..11 {
            assert!((crate::scalar::distance(g.row(i - 1), g.row(i)) - 0.05).abs() < 1e-12);
        }
    }
}
