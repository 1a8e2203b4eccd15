//! Core trajectory containers and elementary polyline geometry.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{distance, lerp_into, Scalar};

/// A sequence of `d`-dimensional points stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Points<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> Points<T> {
    pub fn new(dim: usize, data: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("point dimension must be at least 1"));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::invalid(format!(
                "{} values do not split into points of dimension {dim}",
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn with_capacity(dim: usize, len: usize) -> Self {
        assert!(dim > 0, "point dimension must be at least 1");
        Self {
            dim,
            data: Vec::with_capacity(dim * len),
        }
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: impl IntoIterator<Item = R>) -> Result<Self> {
        let mut dim = None;
        let mut data = Vec::new();
        for (i, row) in rows.into_iter().enumerate() {
            let row = row.as_ref();
            match dim {
                None => dim = Some(row.len()),
                Some(d) if d != row.len() => {
                    return Err(Error::invalid(format!(
                        "row {i} has dimension {} but earlier rows have {d}",
                        row.len()
                    )))
                }
                _ => {}
            }
            data.extend_from_slice(row);
        }
        let dim = dim.ok_or_else(|| Error::invalid("no rows given"))?;
        Self::new(dim, data)
    }

    /// One-dimensional sequence.
    pub fn from_scalars(values: Vec<T>) -> Self {
        Self {
            dim: 1,
            data: values,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, T> {
        self.data.chunks_exact(self.dim)
    }

    pub fn push(&mut self, p: &[T]) {
        assert_eq!(p.len(), self.dim, "pushed point has the wrong dimension");
        self.data.extend_from_slice(p);
    }

    pub fn first(&self) -> Option<&[T]> {
        (!self.is_empty()).then(|| self.row(0))
    }

    pub fn last(&self) -> Option<&[T]> {
        (!self.is_empty()).then(|| self.row(self.len() - 1))
    }

    /// Values of coordinate `c` across all points.
    pub fn column(&self, c: usize) -> Vec<T> {
        self.rows().map(|r| r[c]).collect()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    /// Sum of consecutive chord lengths.
    pub fn polyline_length(&self) -> T {
        self.data
            .chunks_exact(self.dim)
            .zip(self.data.chunks_exact(self.dim).skip(1))
            .fold(T::zero(), |acc, (a, b)| acc + distance(a, b))
    }

    /// Linear resampling to `m` points at a uniform parameter over the index range.
    pub fn resample(&self, m: usize) -> Result<Self> {
        if self.len() < 2 {
            return Err(Error::invalid("resampling needs at least two points"));
        }
        let params: Vec<T> = (0..self.len())
            .map(|i| T::from_usize_lossy(i) / T::from_usize_lossy(self.len() - 1))
            .collect();
        resample_by_parameter(&params, self, m)
    }
}

/// A time-stamped recording `r(t)` with strictly increasing timestamps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    times: Vec<T>,
    points: Points<T>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn new(times: Vec<T>, points: Points<T>) -> Result<Self> {
        if times.len() != points.len() {
            return Err(Error::invalid(format!(
                "{} timestamps for {} points",
                times.len(),
                points.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::invalid("a trajectory needs at least two samples"));
        }
        if let Some(bad) = times.iter().position(|t| !t.is_finite()) {
            return Err(Error::invalid(format!("timestamp {bad} is not finite")));
        }
        if let Some(bad) = points.as_slice().iter().position(|x| !x.is_finite()) {
            return Err(Error::invalid(format!(
                "point {} has a non-finite coordinate",
                bad / points.dim()
            )));
        }
        if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::invalid(format!(
                "timestamps must be strictly increasing (sample {} at {} follows {})",
                i + 1,
                times[i + 1],
                times[i]
            )));
        }
        Ok(Self { times, points })
    }

    /// Convenience constructor from row vectors.
    pub fn from_rows<R: AsRef<[T]>>(
        times: Vec<T>,
        rows: impl IntoIterator<Item = R>,
    ) -> Result<Self> {
        Self::new(times, Points::from_rows(rows)?)
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn points(&self) -> &Points<T> {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn duration(&self) -> T {
        self.times[self.times.len() - 1] - self.times[0]
    }

    pub fn into_parts(self) -> (Vec<T>, Points<T>) {
        (self.times, self.points)
    }
}

/// Total chord length of the recorded polyline.
pub fn polyline_length<T: Scalar>(traj: &Trajectory<T>) -> T {
    traj.points.polyline_length()
}

/// Linear interpolation of `traj` at `m` uniformly spaced instants spanning its time range.
///
/// The first and last output samples are copies of the input endpoints.
pub fn resample_uniform<T: Scalar>(traj: &Trajectory<T>, m: usize) -> Result<Trajectory<T>> {
    if m < 2 {
        return Err(Error::invalid(format!(
            "resample count must be >= 2, got {m}"
        )));
    }
    let points = resample_by_parameter(&traj.times, &traj.points, m)?;
    let t0 = traj.times[0];
    let t1 = traj.times[traj.len() - 1];
    let span = t1 - t0;
    let last = m - 1;
    let times = (0..m)
        .map(|j| match j {
            0 => t0,
            j if j == last => t1,
            j => t0 + span * (T::from_usize_lossy(j) / T::from_usize_lossy(last)),
        })
        .collect();
    Trajectory::new(times, points)
}

/// Interpolates `points` (sampled at the non-decreasing `params`) at `m` uniform parameter values.
pub(crate) fn resample_by_parameter<T: Scalar>(
    params: &[T],
    points: &Points<T>,
    m: usize,
) -> Result<Points<T>> {
    if m < 2 {
        return Err(Error::invalid(format!(
            "resample count must be >= 2, got {m}"
        )));
    }
    let n = params.len();
    debug_assert_eq!(n, points.len());
    let p0 = params[0];
    let p1 = params[n - 1];
    let span = p1 - p0;
    let mut out = Points::with_capacity(points.dim(), m);
    out.push(points.row(0));
    let mut seg = 0;
    let mut buf = Vec::with_capacity(points.dim());
    for j in 1..m - 1 {
        let q = p0 + span * (T::from_usize_lossy(j) / T::from_usize_lossy(m - 1));
        while seg + 2 < n && params[seg + 1] <= q {
            seg += 1;
        }
        let (a, b) = (params[seg], params[seg + 1]);
        let alpha = if b > a {
            ((q - a) / (b - a)).max(T::zero()).min(T::one())
        } else {
            T::zero()
        };
        lerp_into(points.row(seg), points.row(seg + 1), alpha, &mut buf);
        out.push(&buf);
    }
    out.push(points.row(n - 1));
    Ok(out)
}

/// Output of spatial sampling: points exactly `delta` apart along the recorded polyline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcLengthPath<T> {
    pub delta: T,
    /// Arc-length coordinate, `s[k] = k * delta` for every spatial sample.
    pub s: Vec<T>,
    /// Recovered timestamps of the emitted samples.
    pub t: Vec<T>,
    pub points: Points<T>,
    /// The final recorded point was appended after the last spatial sample.
    /// Its spacing to the previous sample is generally shorter than `delta`.
    pub endpoint_appended: bool,
}

impl<T: Scalar> ArcLengthPath<T> {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// Number of samples that obey the constant-spacing law (excludes an appended endpoint).
    pub fn spatial_len(&self) -> usize {
        self.len() - usize::from(self.endpoint_appended)
    }

    pub fn s_max(&self) -> T {
        self.s.last().copied().unwrap_or_else(T::zero)
    }
}

/// A named group of demonstrations of the same task.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemonstrationSet<T> {
    pub name: String,
    demos: Vec<Trajectory<T>>,
}

impl<T: Scalar> DemonstrationSet<T> {
    pub fn new(name: impl Into<String>, demos: Vec<Trajectory<T>>) -> Result<Self> {
        let first = demos
            .first()
            .ok_or_else(|| Error::invalid("a demonstration set needs at least one demo"))?;
        let dim = first.dim();
        if let Some(i) = demos.iter().position(|d| d.dim() != dim) {
            return Err(Error::invalid(format!(
                "demo {i} has dimension {} but the set has dimension {dim}",
                demos[i].dim()
            )));
        }
        Ok(Self {
            name: name.into(),
            demos,
        })
    }

    pub fn demos(&self) -> &[Trajectory<T>] {
        &self.demos
    }

    pub fn len(&self) -> usize {
        self.demos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demos.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.demos[0].dim()
    }
}
