//! Consensus curves of a demonstration set.

mod gmm;

pub use gmm::{fit_gmm, gmr, GmmFit, GmmModel, GmrOutput, COVARIANCE_REGULARIZATION};

use serde::{Deserialize, Serialize};

use crate::dtw::{dtw_with_cost, soft_dtw, LocalCost};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::trajectory::Points;

/// Default iteration cap for [`dba`].
pub const DBA_MAX_ITERS: usize = 30;

const DBA_REL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarycenterResult<T> {
    pub curve: Points<T>,
    /// Per-point conditional covariance (row-major, `dim x dim`); GMR only.
    pub variance: Option<Vec<Vec<T>>>,
    pub method: String,
    /// Objective value after each accepted iterate (iterative methods only).
    pub history: Vec<T>,
}

impl<T: Scalar> BarycenterResult<T> {
    fn plain(curve: Points<T>, method: &str) -> Self {
        Self {
            curve,
            variance: None,
            method: method.into(),
            history: Vec::new(),
        }
    }
}

/// Pointwise arithmetic mean of equal-length sequences.
pub fn euclidean_barycenter<T: Scalar>(set: &[Points<T>]) -> Result<BarycenterResult<T>> {
    let first = check_set(set)?;
    if set.iter().any(|s| s.len() != first.len()) {
        return Err(Error::invalid(
            "euclidean barycenter needs equal-length sequences; align or resample first",
        ));
    }
    let k = T::from_usize_lossy(set.len());
    let mut acc = vec![T::zero(); first.as_slice().len()];
    for s in set {
        for (a, &v) in acc.iter_mut().zip(s.as_slice()) {
            *a = *a + v;
        }
    }
    for a in &mut acc {
        *a = *a / k;
    }
    Ok(BarycenterResult::plain(
        Points::new(first.dim(), acc)?,
        "euc",
    ))
}

/// DTW barycenter averaging under squared Euclidean cost.
///
/// Starts from `init` or the medoid of the set. Each iteration aligns every member to
/// the current barycenter and replaces each barycenter sample by the mean of the member
/// samples mapped to it. The objective (sum of DTW costs) cannot increase; iteration
/// stops at `max_iters` or when the relative decrease falls below `1e-9`.
pub fn dba<T: Scalar>(
    set: &[Points<T>],
    init: Option<&Points<T>>,
    max_iters: usize,
) -> Result<BarycenterResult<T>> {
    let first = check_set(set)?;
    let mut z = match init {
        Some(z) => {
            if z.dim() != first.dim() || z.is_empty() {
                return Err(Error::invalid("initial barycenter has the wrong shape"));
            }
            z.clone()
        }
        None => set[medoid(set)?].clone(),
    };
    let cost = LocalCost::SquaredEuclidean;
    let dim = z.dim();
    let tol = T::lit(DBA_REL_TOL);

    let mut history = Vec::new();
    let mut prev: Option<(T, Points<T>)> = None;
    for _ in 0..=max_iters {
        let aligned = set
            .iter()
            .map(|x| dtw_with_cost(&z, x, None, cost))
            .collect::<Result<Vec<_>>>()?;
        let obj = aligned.iter().fold(T::zero(), |acc, r| acc + r.distance);
        if let Some((p, pz)) = &prev {
            if obj > *p {
                z = pz.clone();
                break;
            }
            history.push(obj);
            if *p - obj <= tol * p.abs() {
                break;
            }
        } else {
            history.push(obj);
        }
        if history.len() > max_iters {
            break;
        }

        let n = z.len();
        let mut sums = vec![T::zero(); n * dim];
        let mut counts = vec![0usize; n];
        for (res, x) in aligned.iter().zip(set) {
            for &(i, j) in &res.path.pairs {
                counts[i] += 1;
                for (s, &v) in sums[i * dim..(i + 1) * dim].iter_mut().zip(x.row(j)) {
                    *s = *s + v;
                }
            }
        }
        for (i, &c) in counts.iter().enumerate() {
            let c = T::from_usize_lossy(c);
            for s in &mut sums[i * dim..(i + 1) * dim] {
                *s = *s / c;
            }
        }
        prev = Some((obj, std::mem::replace(&mut z, Points::new(dim, sums)?)));
    }
    Ok(BarycenterResult {
        curve: z,
        variance: None,
        method: "dba".into(),
        history,
    })
}

/// Index of the member minimizing the summed squared-cost DTW distance to all others.
pub fn medoid<T: Scalar>(set: &[Points<T>]) -> Result<usize> {
    check_set(set)?;
    let k = set.len();
    let mut total = vec![T::zero(); k];
    for i in 0..k {
        for j in i + 1..k {
            let d = dtw_with_cost(&set[i], &set[j], None, LocalCost::SquaredEuclidean)?.distance;
            total[i] = total[i] + d;
            total[j] = total[j] + d;
        }
    }
    Ok((0..k)
        .min_by(|&a, &b| {
            total[a]
                .partial_cmp(&total[b])
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap_or(0))
}

/// Settings for [`soft_dtw_barycenter`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoftBarycenterOptions<T> {
    pub gamma: T,
    /// Number of samples of the barycenter.
    pub length: usize,
    pub max_iters: usize,
    /// First trial step of the backtracking line search; `None` picks `1 / (2 k)`.
    pub initial_step: Option<T>,
}

impl<T: Scalar> SoftBarycenterOptions<T> {
    pub fn new(gamma: T, length: usize) -> Self {
        Self {
            gamma,
            length,
            max_iters: 30,
            initial_step: None,
        }
    }
}

/// Gradient descent on `sum_i softDTW(z, x_i)` with Armijo backtracking.
///
/// Starts from the Euclidean mean of the members resampled to `opts.length` samples and
/// returns the best iterate.
pub fn soft_dtw_barycenter<T: Scalar>(
    set: &[Points<T>],
    opts: &SoftBarycenterOptions<T>,
) -> Result<BarycenterResult<T>> {
    check_set(set)?;
    if !(opts.gamma > T::zero()) {
        return Err(Error::invalid(format!(
            "gamma must be positive, got {}",
            opts.gamma
        )));
    }
    if opts.length < 2 {
        return Err(Error::invalid("barycenter length must be >= 2"));
    }
    let resampled = set
        .iter()
        .map(|s| {
            if s.len() == opts.length {
                Ok(s.clone())
            } else if s.len() < 2 {
                Err(Error::invalid("members need at least two samples"))
            } else {
                s.resample(opts.length)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut z = euclidean_barycenter(&resampled)?.curve;

    let value_and_grad = |z: &Points<T>| -> Result<(T, Vec<T>)> {
        let mut v = T::zero();
        let mut g = vec![T::zero(); z.as_slice().len()];
        for x in set {
            let r = soft_dtw(z, x, opts.gamma)?;
            v = v + r.value;
            for (a, &b) in g.iter_mut().zip(r.gradient.as_slice()) {
                *a = *a + b;
            }
        }
        Ok((v, g))
    };

    let armijo = T::lit(1e-4);
    let half = T::lit(0.5);
    let mut step = opts
        .initial_step
        .unwrap_or_else(|| T::one() / (T::lit(2.0) * T::from_usize_lossy(set.len())));
    let (mut f, mut g) = value_and_grad(&z)?;
    let mut history = vec![f];
    for _ in 0..opts.max_iters {
        let gnorm2 = g.iter().fold(T::zero(), |a, &v| a + v * v);
        if gnorm2 == T::zero() {
            break;
        }
        let mut accepted = None;
        for _ in 0..40 {
            let cand: Vec<T> = z
                .as_slice()
                .iter()
                .zip(&g)
                .map(|(&x, &d)| x - step * d)
                .collect();
            let cand = Points::new(z.dim(), cand)?;
            let (fc, gc) = value_and_grad(&cand)?;
            if fc <= f - armijo * step * gnorm2 {
                accepted = Some((cand, fc, gc));
                break;
            }
            step = step * half;
        }
        let Some((cand, fc, gc)) = accepted else {
            break;
        };
        let decrease = f - fc;
        z = cand;
        f = fc;
        g = gc;
        history.push(f);
        step = step + step;
        if decrease <= T::lit(1e-9) * f.abs().max(T::epsilon()) {
            break;
        }
    }
    Ok(BarycenterResult {
        curve: z,
        variance: None,
        method: "sdtw".into(),
        history,
    })
}

fn check_set<T: Scalar>(set: &[Points<T>]) -> Result<&Points<T>> {
    let first = set
        .first()
        .ok_or_else(|| Error::invalid("barycenter of an empty set"))?;
    if set.iter().any(|s| s.dim() != first.dim()) {
        return Err(Error::invalid("sequences must share one dimension"));
    }
    if set.iter().any(|s| s.is_empty()) {
        return Err(Error::invalid("sequences must be non-empty"));
    }
    Ok(first)
}
