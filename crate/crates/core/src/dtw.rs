//! Dynamic time warping baselines: exact and Sakoe-Chiba banded DTW, FastDTW, soft-DTW.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{squared_distance, Scalar};
use crate::trajectory::{DemonstrationSet, Points};

/// Monotone, continuous index-pair sequence from `(0, 0)` to `(n - 1, m - 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentPath {
    pub pairs: Vec<(usize, usize)>,
}

impl AlignmentPath {
    /// Checks the boundary and step conditions for sequences of length `n` and `m`.
    pub fn is_valid(&self, n: usize, m: usize) -> bool {
        let (Some(&first), Some(&last)) = (self.pairs.first(), self.pairs.last()) else {
            return false;
        };
        first == (0, 0)
            && last == (n - 1, m - 1)
            && self.pairs.windows(2).all(|w| {
                let (di, dj) = (w[1].0.wrapping_sub(w[0].0), w[1].1.wrapping_sub(w[0].1));
                matches!((di, dj), (1, 0) | (0, 1) | (1, 1))
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DtwResult<T> {
    /// Minimal cumulative local cost.
    pub distance: T,
    pub path: AlignmentPath,
}

/// Local cost between two aligned points.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum LocalCost {
    #[default]
    Euclidean,
    SquaredEuclidean,
}

impl LocalCost {
    #[inline]
    pub fn eval<T: Scalar>(self, a: &[T], b: &[T]) -> T {
        let sq = squared_distance(a, b);
        match self {
            LocalCost::Euclidean => sq.sqrt(),
            LocalCost::SquaredEuclidean => sq,
        }
    }
}

/// Exact DTW with Euclidean local cost; `window` is an optional Sakoe-Chiba half-width.
pub fn dtw<T: Scalar>(a: &Points<T>, b: &Points<T>, window: Option<usize>) -> Result<DtwResult<T>> {
    dtw_with_cost(a, b, window, LocalCost::Euclidean)
}

/// Exact DTW with the given local cost.
///
/// With `window = Some(w)`, cell `(i, j)` is admissible iff `|i - j * n / m| <= w`
/// (the band follows the diagonal of the `n x m` matrix).
pub fn dtw_with_cost<T: Scalar>(
    a: &Points<T>,
    b: &Points<T>,
    window: Option<usize>,
    cost: LocalCost,
) -> Result<DtwResult<T>> {
    check_pair(a, b)?;
    let (n, m) = (a.len(), b.len());
    let ranges = match window {
        None => RowRanges::full(n, m),
        Some(w) => RowRanges::band(n, m, w),
    };
    windowed_dtw(a, b, &ranges, cost).ok_or(Error::InfeasibleBand {
        window: window.unwrap_or(0),
    })
}

/// FastDTW: solve on a coarsened pair, project the path, refine inside the
/// projection widened by `radius`.
///
/// Sequences are halved by pairwise averaging (an odd trailing sample is carried
/// unchanged) until either is shorter than `2 * (radius + 2)`, where exact DTW is used.
pub fn fast_dtw<T: Scalar>(a: &Points<T>, b: &Points<T>, radius: usize) -> Result<DtwResult<T>> {
    check_pair(a, b)?;
    Ok(fast_dtw_rec(a, b, radius, LocalCost::Euclidean))
}

fn fast_dtw_rec<T: Scalar>(
    a: &Points<T>,
    b: &Points<T>,
    radius: usize,
    cost: LocalCost,
) -> DtwResult<T> {
    let base = 2 * (radius + 2);
    let (n, m) = (a.len(), b.len());
    if n < base || m < base {
        return windowed_dtw(a, b, &RowRanges::full(n, m), cost)
            .expect("unconstrained DTW always has a path");
    }
    let low = fast_dtw_rec(&coarsen(a), &coarsen(b), radius, cost);
    let ranges = RowRanges::project(&low.path, n, m, radius);
    windowed_dtw(a, b, &ranges, cost).expect("projected FastDTW window always contains a path")
}

/// Halves a sequence by averaging consecutive pairs.
fn coarsen<T: Scalar>(x: &Points<T>) -> Points<T> {
    let half = T::lit(0.5);
    let mut out = Points::with_capacity(x.dim(), x.len().div_ceil(2));
    let mut buf = vec![T::zero(); x.dim()];
    let mut i = 0;
    while i + 1 < x.len() {
        for (o, (&p, &q)) in buf.iter_mut().zip(x.row(i).iter().zip(x.row(i + 1))) {
            *o = (p + q) * half;
        }
        out.push(&buf);
        i += 2;
    }
    if i < x.len() {
        out.push(x.row(i));
    }
    out
}

/// Per-row admissible column ranges `[lo, hi]` (inclusive) of the cost matrix.
#[derive(Clone, Debug)]
struct RowRanges {
    lo: Vec<usize>,
    hi: Vec<usize>,
    m: usize,
}

impl RowRanges {
    fn full(n: usize, m: usize) -> Self {
        Self {
            lo: vec![0; n],
            hi: vec![m - 1; n],
            m,
        }
    }

    fn band(n: usize, m: usize, w: usize) -> Self {
        // |i - j n / m| <= w  <=>  (i - w) m <= j n <= (i + w) m
        let mut lo = Vec::with_capacity(n);
        let mut hi = Vec::with_capacity(n);
        for i in 0..n {
            let l = if i > w { ((i - w) * m).div_ceil(n) } else { 0 };
            let h = ((i + w) * m / n).min(m - 1);
            lo.push(l.min(m));
            hi.push(h);
        }
        Self { lo, hi, m }
    }

    fn project(path: &AlignmentPath, n: usize, m: usize, radius: usize) -> Self {
        let mut lo = vec![usize::MAX; n];
        let mut hi = vec![0usize; n];
        for &(i, j) in &path.pairs {
            for r in [2 * i, 2 * i + 1] {
                if r < n {
                    lo[r] = lo[r].min(2 * j);
                    hi[r] = hi[r].max((2 * j + 1).min(m - 1));
                }
            }
        }
        let mut out_lo = vec![0; n];
        let mut out_hi = vec![0; n];
        for r in 0..n {
            let a = r.saturating_sub(radius);
            let b = (r + radius).min(n - 1);
            let l = (a..=b).map(|q| lo[q]).min().unwrap_or(0);
            let h = (a..=b).map(|q| hi[q]).max().unwrap_or(m - 1);
            out_lo[r] = l.saturating_sub(radius);
            out_hi[r] = (h + radius).min(m - 1);
        }
        Self {
            lo: out_lo,
            hi: out_hi,
            m,
        }
    }

    fn width(&self, i: usize) -> usize {
        if self.lo[i] > self.hi[i] || self.lo[i] >= self.m {
            0
        } else {
            self.hi[i] - self.lo[i] + 1
        }
    }
}

/// Cumulative-cost matrix restricted to `ranges`, stored row by row.
struct Banded<T> {
    ranges: RowRanges,
    offsets: Vec<usize>,
    cells: Vec<T>,
}

impl<T: Scalar> Banded<T> {
    fn new(ranges: RowRanges) -> Self {
        let mut offsets = Vec::with_capacity(ranges.lo.len() + 1);
        let mut total = 0;
        for i in 0..ranges.lo.len() {
            offsets.push(total);
            total += ranges.width(i);
        }
        offsets.push(total);
        Self {
            ranges,
            offsets,
            cells: vec![T::infinity(); total],
        }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> T {
        let lo = self.ranges.lo[i];
        if j < lo || j > self.ranges.hi[i] {
            return T::infinity();
        }
        self.cells[self.offsets[i] + j - lo]
    }
}

fn windowed_dtw<T: Scalar>(
    a: &Points<T>,
    b: &Points<T>,
    ranges: &RowRanges,
    cost: LocalCost,
) -> Option<DtwResult<T>> {
    let (n, m) = (a.len(), b.len());
    let mut d = Banded::new(ranges.clone());
    for i in 0..n {
        if d.ranges.width(i) == 0 {
            continue;
        }
        let ai = a.row(i);
        let lo = d.ranges.lo[i];
        let hi = d.ranges.hi[i];
        let base = d.offsets[i];
        for j in lo..=hi {
            let best = if i == 0 && j == 0 {
                T::zero()
            } else {
                let diag = if i > 0 && j > 0 {
                    d.get(i - 1, j - 1)
                } else {
                    T::infinity()
                };
                let up = if i > 0 {
                    d.get(i - 1, j)
                } else {
                    T::infinity()
                };
                let left = if j > lo {
                    d.cells[base + j - lo - 1]
                } else {
                    T::infinity()
                };
                diag.min(up).min(left)
            };
            if best.is_finite() {
                d.cells[base + j - lo] = cost.eval(ai, b.row(j)) + best;
            }
        }
    }
    let distance = d.get(n - 1, m - 1);
    if !distance.is_finite() {
        return None;
    }
    Some(DtwResult {
        distance,
        path: backtrack(&d, n, m),
    })
}

/// Walks back from the last cell; ties prefer diagonal, then vertical (`i - 1`), then horizontal.
fn backtrack<T: Scalar>(d: &Banded<T>, n: usize, m: usize) -> AlignmentPath {
    let (mut i, mut j) = (n - 1, m - 1);
    let mut pairs = vec![(i, j)];
    while i > 0 || j > 0 {
        if i == 0 {
            j -= 1;
        } else if j == 0 {
            i -= 1;
        } else {
            let diag = d.get(i - 1, j - 1);
            let up = d.get(i - 1, j);
            let left = d.get(i, j - 1);
            if diag <= up && diag <= left {
                i -= 1;
                j -= 1;
            } else if up <= left {
                i -= 1;
            } else {
                j -= 1;
            }
        }
        pairs.push((i, j));
    }
    pairs.reverse();
    AlignmentPath { pairs }
}

/// Soft-DTW value and its gradient with respect to the points of the first sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct SoftDtw<T> {
    pub value: T,
    pub gradient: Points<T>,
}

/// Soft-DTW with squared Euclidean cost and smoothing `gamma` (value only).
pub fn soft_dtw_value<T: Scalar>(a: &Points<T>, b: &Points<T>, gamma: T) -> Result<T> {
    check_pair(a, b)?;
    check_gamma(gamma)?;
    let costs = cost_matrix(a, b);
    let r = soft_forward(&costs, a.len(), b.len(), gamma);
    Ok(r[a.len() * (b.len() + 2) + b.len()])
}

/// Soft-DTW with squared Euclidean cost, plus the gradient with respect to `a`.
///
/// The forward recursion replaces `min` by `-gamma * log(sum exp(-x / gamma))`; the
/// backward recursion accumulates the expected alignment matrix `E`, and
/// `dV/da_i = sum_j E[i][j] * 2 (a_i - b_j)`.
pub fn soft_dtw<T: Scalar>(a: &Points<T>, b: &Points<T>, gamma: T) -> Result<SoftDtw<T>> {
    check_pair(a, b)?;
    check_gamma(gamma)?;
    let (n, m) = (a.len(), b.len());
    let costs = cost_matrix(a, b);
    let mut r = soft_forward(&costs, n, m, gamma);
    let w = m + 2;
    let value = r[n * w + m];

    // Borders for the backward pass, 1-based indices as in the forward table.
    for i in 0..n + 2 {
        r[i * w + m + 1] = T::neg_infinity();
    }
    for j in 0..m + 2 {
        r[(n + 1) * w + j] = T::neg_infinity();
    }
    r[(n + 1) * w + m + 1] = value;
    let dcost = |i: usize, j: usize| -> T {
        if i >= 1 && i <= n && j >= 1 && j <= m {
            costs[(i - 1) * m + (j - 1)]
        } else {
            T::zero()
        }
    };
    let mut e = vec![T::zero(); (n + 2) * w];
    e[(n + 1) * w + m + 1] = T::one();
    for i in (1..=n).rev() {
        for j in (1..=m).rev() {
            let rij = r[i * w + j];
            let wa = ((r[(i + 1) * w + j] - rij - dcost(i + 1, j)) / gamma).exp();
            let wb = ((r[i * w + j + 1] - rij - dcost(i, j + 1)) / gamma).exp();
            let wc = ((r[(i + 1) * w + j + 1] - rij - dcost(i + 1, j + 1)) / gamma).exp();
            e[i * w + j] =
                e[(i + 1) * w + j] * wa + e[i * w + j + 1] * wb + e[(i + 1) * w + j + 1] * wc;
        }
    }

    let dim = a.dim();
    let two = T::lit(2.0);
    let mut grad = vec![T::zero(); n * dim];
    for i in 0..n {
        let ai = a.row(i);
        let g = &mut grad[i * dim..(i + 1) * dim];
        for j in 0..m {
            let eij = e[(i + 1) * w + j + 1];
            if eij == T::zero() {
                continue;
            }
            for (gc, (&x, &y)) in g.iter_mut().zip(ai.iter().zip(b.row(j))) {
                *gc = *gc + eij * two * (x - y);
            }
        }
    }
    Ok(SoftDtw {
        value,
        gradient: Points::new(dim, grad)?,
    })
}

fn cost_matrix<T: Scalar>(a: &Points<T>, b: &Points<T>) -> Vec<T> {
    let mut c = Vec::with_capacity(a.len() * b.len());
    for x in a.rows() {
        c.extend(b.rows().map(|y| squared_distance(x, y)));
    }
    c
}

/// Forward table of size `(n + 2) x (m + 2)`; `R[0][0] = 0`, other borders `+inf`.
fn soft_forward<T: Scalar>(costs: &[T], n: usize, m: usize, gamma: T) -> Vec<T> {
    let w = m + 2;
    let mut r = vec![T::infinity(); (n + 2) * w];
    r[0] = T::zero();
    for i in 1..=n {
        for j in 1..=m {
            let sm = soft_min(
                r[(i - 1) * w + j - 1],
                r[(i - 1) * w + j],
                r[i * w + j - 1],
                gamma,
            );
            r[i * w + j] = costs[(i - 1) * m + j - 1] + sm;
        }
    }
    r
}

#[inline]
fn soft_min<T: Scalar>(x: T, y: T, z: T, gamma: T) -> T {
    let lo = x.min(y).min(z);
    if !lo.is_finite() {
        return lo;
    }
    let term = |v: T| {
        if v.is_finite() {
            (-(v - lo) / gamma).exp()
        } else {
            T::zero()
        }
    };
    lo - gamma * (term(x) + term(y) + term(z)).ln()
}

/// Aligns every sequence to `seqs[ref_index]` with exact DTW.
///
/// Each output has the reference's length; sample `i` is the mean of the points of the
/// sequence that the warping path maps onto reference index `i`.
pub fn warp_to_reference<T: Scalar>(
    seqs: &[Points<T>],
    ref_index: usize,
) -> Result<Vec<Points<T>>> {
    if seqs.is_empty() {
        return Err(Error::invalid("cannot align an empty set"));
    }
    let reference = seqs.get(ref_index).ok_or_else(|| {
        Error::invalid(format!(
            "reference index {ref_index} out of range for {} sequences",
            seqs.len()
        ))
    })?;
    let n = reference.len();
    let dim = reference.dim();
    seqs.iter()
        .map(|s| {
            let res = dtw(reference, s, None)?;
            let mut sums = vec![T::zero(); n * dim];
            let mut counts = vec![0usize; n];
            for &(i, j) in &res.path.pairs {
                counts[i] += 1;
                for (acc, &v) in sums[i * dim..(i + 1) * dim].iter_mut().zip(s.row(j)) {
                    *acc = *acc + v;
                }
            }
            for (i, &c) in counts.iter().enumerate() {
                let c = T::from_usize_lossy(c);
                for v in &mut sums[i * dim..(i + 1) * dim] {
                    *v = *v / c;
                }
            }
            Points::new(dim, sums)
        })
        .collect()
}

/// [`warp_to_reference`] over the point sequences of a demonstration set.
pub fn warp_set_to_reference<T: Scalar>(
    set: &DemonstrationSet<T>,
    ref_index: usize,
) -> Result<Vec<Points<T>>> {
    let seqs: Vec<Points<T>> = set.demos().iter().map(|d| d.points().clone()).collect();
    warp_to_reference(&seqs, ref_index)
}

fn check_pair<T: Scalar>(a: &Points<T>, b: &Points<T>) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("DTW needs non-empty sequences"));
    }
    if a.dim() != b.dim() {
        return Err(Error::invalid(format!(
            "DTW dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

fn check_gamma<T: Scalar>(gamma: T) -> Result<()> {
    if !(gamma > T::zero()) || !gamma.is_finite() {
        return Err(Error::invalid(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(v: &[f64]) -> Points<f64> {
        Points::from_scalars(v.to_vec())
    }

    #[test]
    fn identical_sequences_align_on_the_diagonal() {
        let a = seq(&[0.3, -1.0, 2.0, 2.5]);
        let r = dtw(&a, &a, None).unwrap();
        assert_eq!(r.distance, 0.0);
        assert_eq!(r.path.pairs, vec![(0, 0), (1, 1), (2, 2), (3, 3)]);
    }

    #[test]
    fn duplicate_sample_is_absorbed() {
        let r = dtw(&seq(&[1.0, 2.0, 3.0]), &seq(&[1.0, 2.0, 2.0, 3.0]), None).unwrap();
        assert_eq!(r.distance, 0.0);
        assert!(r.path.is_valid(3, 4));
    }

    #[test]
    fn constant_offset_pair() {
        let r = dtw(&seq(&[0.0, 0.0]), &seq(&[1.0, 1.0]), None).unwrap();
        assert_eq!(r.distance, 2.0);
        assert_eq!(r.path.pairs, vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn narrow_band_on_unequal_lengths_is_infeasible() {
        let a = seq(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        let b = seq(&[0.0, 5.0]);
        assert!(matches!(
            dtw(&a, &b, Some(0)),
            Err(Error::InfeasibleBand { .. })
        ));
        assert!(dtw(&a, &b, Some(3)).is_ok());
    }

    #[test]
    fn band_matches_full_when_wide() {
        let a = seq(&[0.0, 2.0, 1.0, 3.0, 0.5]);
        let b = seq(&[1.0, 0.0, 2.5, 1.0]);
        let full = dtw(&a, &b, None).unwrap();
        let wide = dtw(&a, &b, Some(10)).unwrap();
        assert_eq!(full, wide);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let a = Points::from_rows([[0.0, 1.0]]).unwrap();
        assert!(dtw(&a, &seq(&[0.0]), None).is_err());
    }

    #[test]
    fn coarsen_carries_odd_tail() {
        let c = coarsen(&seq(&[0.0, 2.0, 4.0, 6.0, 9.0]));
        assert_eq!(c.as_slice(), &[1.0, 5.0, 9.0]);
    }

    #[test]
    fn fast_dtw_exact_when_radius_covers() {
        let a = seq(&[0.0, 1.0, 3.0, 2.0, 0.0, 1.0, 4.0]);
        let b = seq(&[1.0, 1.0, 2.0, 0.0, 3.0]);
        assert_eq!(fast_dtw(&a, &b, 7).unwrap(), dtw(&a, &b, None).unwrap());
        assert_eq!(fast_dtw(&a, &a, 0).unwrap().distance, 0.0);
    }

    #[test]
    fn soft_dtw_single_cells() {
        assert_eq!(
            soft_dtw_value(&seq(&[0.0]), &seq(&[1.0]), 0.7).unwrap(),
            1.0
        );
        assert_eq!(
            soft_dtw_value(&seq(&[0.0]), &seq(&[0.0]), 0.7).unwrap(),
            0.0
        );
        assert!(soft_dtw(&seq(&[0.0]), &seq(&[0.0]), 0.0).is_err());
    }

    #[test]
    fn soft_dtw_two_by_two_hand_recursion() {
        let g: f64 = 0.1;
        let v = soft_dtw_value(&seq(&[0.0, 1.0]), &seq(&[0.0, 1.0]), g).unwrap();
        // R11 = 0, R12 = R21 = 1, R22 = 0 + softmin(0, 1, 1).
        let expect = -g * (1.0 + 2.0 * (-1.0 / g).exp()).ln();
        assert!(v < 0.0);
        assert!((v - expect).abs() < 1e-15);
    }

    #[test]
    fn warp_removes_duplicates() {
        let a = seq(&[0.0, 1.0, 2.0, 3.0]);
        let b = seq(&[0.0, 1.0, 1.0, 2.0, 3.0, 3.0]);
        let out = warp_to_reference(&[a.clone(), b], 0).unwrap();
        assert_eq!(out[0], a);
        for (x, y) in out[1].as_slice().iter().zip(a.as_slice()) {
            assert!((x - y).abs() <= 1e-12);
        }
        assert!(warp_to_reference::<f64>(&[], 0).is_err());
        assert!(warp_to_reference(&[seq(&[1.0])], 1).is_err());
    }
}
