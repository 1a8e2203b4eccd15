//! Gaussian mixture model (EM) and Gaussian mixture regression.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::BarycenterResult;
use crate::error::{Error, Result};
use crate::scalar::{squared_distance, Scalar};
use crate::trajectory::Points;

/// Lower bound imposed on every covariance eigenvalue in each M-step.
pub const COVARIANCE_REGULARIZATION: f64 = 1e-6;

const EM_MAX_ITERS: usize = 200;
const EM_REL_TOL: f64 = 1e-8;
const EM_SLACK: f64 = 1e-10;
const LLOYD_ITERS: usize = 20;

/// Mixture of full-covariance Gaussians over a joint (input, output) space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmmModel<T> {
    /// Dimension of the joint space.
    pub dim: usize,
    pub weights: Vec<T>,
    pub means: Vec<Vec<T>>,
    /// Row-major `dim x dim` matrices.
    pub covariances: Vec<Vec<T>>,
}

impl<T: Scalar> GmmModel<T> {
    pub fn new(weights: Vec<T>, means: Vec<Vec<T>>, covariances: Vec<Vec<T>>) -> Result<Self> {
        let dim = means.first().map_or(0, Vec::len);
        let model = Self {
            dim,
            weights,
            means,
            covariances,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn components(&self) -> usize {
        self.weights.len()
    }

    /// Checks shapes, weight normalization and that every covariance is symmetric
    /// positive definite.
    pub fn validate(&self) -> Result<()> {
        let g = self.weights.len();
        if g == 0 || self.dim == 0 {
            return Err(Error::invalid("mixture needs at least one component"));
        }
        if self.means.len() != g || self.covariances.len() != g {
            return Err(Error::invalid(
                "weights, means and covariances disagree on G",
            ));
        }
        if self.means.iter().any(|m| m.len() != self.dim)
            || self
                .covariances
                .iter()
                .any(|c| c.len() != self.dim * self.dim)
        {
            return Err(Error::invalid(
                "component shapes disagree with the joint dimension",
            ));
        }
        if self.weights.iter().any(|&w| !(w >= T::zero())) {
            return Err(Error::invalid("mixture weights must be non-negative"));
        }
        let total = self.weights.iter().fold(T::zero(), |a, &w| a + w);
        if (total - T::one()).abs() > T::lit(1e-9).max(T::epsilon() * T::lit(16.0)) {
            return Err(Error::invalid(format!(
                "mixture weights sum to {total}, not 1"
            )));
        }
        let d = self.dim;
        for c in &self.covariances {
            for i in 0..d {
                for j in 0..i {
                    let (a, b) = (c[i * d + j], c[j * d + i]);
                    if (a - b).abs() > T::lit(1e-9) * (a.abs() + b.abs() + T::one()) {
                        return Err(Error::invalid("covariance is not symmetric"));
                    }
                }
            }
            cholesky(c, d).ok_or_else(|| Error::invalid("covariance is not positive definite"))?;
        }
        Ok(())
    }

    /// Total log-likelihood of `data` (rows in the joint space).
    pub fn log_likelihood(&self, data: &Points<T>) -> Result<T> {
        let comps = self.prepare()?;
        Ok(data
            .rows()
            .fold(T::zero(), |acc, x| acc + log_sum_exp(&log_joint(&comps, x))))
    }

    fn prepare(&self) -> Result<Vec<Component<T>>> {
        (0..self.components())
            .map(|k| {
                Component::new(
                    self.weights[k],
                    &self.means[k],
                    &self.covariances[k],
                    self.dim,
                )
            })
            .collect()
    }
}

/// Outcome of [`fit_gmm`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmmFit<T> {
    pub model: GmmModel<T>,
    /// Log-likelihood of the data under every parameter set EM evaluated, in order.
    /// When `reverted` is set, the last entry belongs to the rejected update.
    pub log_likelihood: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
    /// An update lowered the likelihood beyond rounding slack and was undone. EM is an
    /// ascent method, so this flags a numerical problem rather than normal operation.
    pub reverted: bool,
    /// All samples coincide; the model is a single regularized point mass.
    pub degenerate: bool,
}

/// Fits a `g`-component mixture to the rows of `data` by EM.
///
/// Initialization is seeded k-means++ followed by Lloyd iterations. Every M-step raises
/// covariance eigenvalues below [`COVARIANCE_REGULARIZATION`] to that value, which keeps
/// the components positive definite without breaking the monotone likelihood. EM stops once the
/// relative log-likelihood gain drops below `1e-8` or after 200 iterations.
pub fn fit_gmm<T: Scalar>(data: &Points<T>, g: usize, seed: u64) -> Result<GmmFit<T>> {
    let n = data.len();
    let d = data.dim();
    if g == 0 {
        return Err(Error::invalid("G must be at least 1"));
    }
    if n < g * (d + 1) {
        return Err(Error::invalid(format!(
            "{n} samples cannot support {g} components in {d} dimensions (need {})",
            g * (d + 1)
        )));
    }
    if data.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("GMM data must be finite"));
    }
    let reg = T::lit(COVARIANCE_REGULARIZATION);
    let first = data.row(0);
    if data.rows().all(|x| squared_distance(x, first) == T::zero()) {
        let model = GmmModel::new(
            vec![T::one()],
            vec![first.to_vec()],
            vec![scaled_identity(d, reg)],
        )?;
        let ll = model.log_likelihood(data)?;
        return Ok(GmmFit {
            model,
            log_likelihood: vec![ll],
            iterations: 0,
            converged: true,
            reverted: false,
            degenerate: true,
        });
    }

    let labels = kmeans(data, g, seed);
    let mut model = initial_model(data, g, &labels, reg)?;
    let mut history: Vec<T> = Vec::new();
    let mut resp = vec![T::zero(); n * g];
    let mut converged = false;
    let mut reverted = false;
    let mut previous: Option<GmmModel<T>> = None;
    let mut iterations = 0;
    loop {
        let ll = e_step(&model, data, &mut resp)?;
        if let (Some(&prev_ll), Some(prev_model)) = (history.last(), previous.as_ref()) {
            let scale = prev_ll.abs().max(T::one());
            if ll < prev_ll - T::lit(EM_SLACK) * scale {
                history.push(ll);
                model = prev_model.clone();
                reverted = true;
                break;
            }
            history.push(ll);
            if ll - prev_ll < T::lit(EM_REL_TOL) * scale {
                converged = true;
                break;
            }
        } else {
            history.push(ll);
        }
        if iterations == EM_MAX_ITERS {
            break;
        }
        let next = m_step(&model, data, &resp, reg)?;
        previous = Some(std::mem::replace(&mut model, next));
        iterations += 1;
    }
    Ok(GmmFit {
        model,
        log_likelihood: history,
        iterations,
        converged,
        reverted,
        degenerate: false,
    })
}

/// Output of [`gmr`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmrOutput<T> {
    /// Conditional mean curve with per-point conditional covariance.
    pub barycenter: BarycenterResult<T>,
    /// Queries whose responsibilities all underflowed; they were answered by the
    /// component with the nearest input mean.
    pub fallback: Vec<usize>,
}

/// Gaussian mixture regression of the trailing output coordinates on the leading
/// `queries.dim()` input coordinates of the model.
///
/// Returns the conditional mean per query and the conditional covariance of the
/// mixture (within-component covariance plus spread of the component predictions).
pub fn gmr<T: Scalar>(model: &GmmModel<T>, queries: &Points<T>) -> Result<GmrOutput<T>> {
    model.validate()?;
    let q = queries.dim();
    let d = model.dim;
    if q == 0 || q >= d {
        return Err(Error::invalid(format!(
            "query dimension {q} must be between 1 and {} for a {d}-dimensional model",
            d - 1
        )));
    }
    if queries.len() < 2 {
        return Err(Error::invalid("GMR needs at least two queries"));
    }
    let p = d - q;
    let comps = (0..model.components())
        .map(|k| Conditional::new(model, k, q))
        .collect::<Result<Vec<_>>>()?;

    let mut curve = Points::with_capacity(p, queries.len());
    let mut variance = Vec::with_capacity(queries.len());
    let mut fallback = Vec::new();
    let mut logs = vec![T::zero(); comps.len()];
    let mut preds = vec![T::zero(); comps.len() * p];
    for (qi, x) in queries.rows().enumerate() {
        for (k, c) in comps.iter().enumerate() {
            logs[k] = c.marginal.log_density(x);
            c.predict(x, &mut preds[k * p..(k + 1) * p]);
        }
        let lse = log_sum_exp(&logs);
        let h: Vec<T> = if lse.is_finite() {
            logs.iter().map(|&l| (l - lse).exp()).collect()
        } else {
            fallback.push(qi);
            let nearest = (0..comps.len())
                .min_by(|&a, &b| {
                    let da = squared_distance(x, &comps[a].marginal.mean);
                    let db = squared_distance(x, &comps[b].marginal.mean);
                    da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(0);
            (0..comps.len())
                .map(|k| if k == nearest { T::one() } else { T::zero() })
                .collect()
        };
        let mut mean = vec![T::zero(); p];
        for (k, &hk) in h.iter().enumerate() {
            for (m, &v) in mean.iter_mut().zip(&preds[k * p..(k + 1) * p]) {
                *m = *m + hk * v;
            }
        }
        let mut cov = vec![T::zero(); p * p];
        for (k, &hk) in h.iter().enumerate() {
            if hk == T::zero() {
                continue;
            }
            let pred = &preds[k * p..(k + 1) * p];
            for i in 0..p {
                for j in 0..p {
                    let spread = (pred[i] - mean[i]) * (pred[j] - mean[j]);
                    cov[i * p + j] = cov[i * p + j] + hk * (comps[k].cov[i * p + j] + spread);
                }
            }
        }
        curve.push(&mean);
        variance.push(cov);
    }
    Ok(GmrOutput {
        barycenter: BarycenterResult {
            curve,
            variance: Some(variance),
            method: "gmr".into(),
            history: Vec::new(),
        },
        fallback,
    })
}

/// Gaussian with a cached Cholesky factor.
struct Component<T> {
    log_weight: T,
    mean: Vec<T>,
    chol: Vec<T>,
    dim: usize,
    log_norm: T,
}

impl<T: Scalar> Component<T> {
    fn new(weight: T, mean: &[T], cov: &[T], dim: usize) -> Result<Self> {
        let chol = cholesky(cov, dim)
            .ok_or_else(|| Error::Numeric("covariance is not positive definite".into()))?;
        let log_det = (0..dim).fold(T::zero(), |a, i| a + chol[i * dim + i].ln());
        let half_log_2pi = T::lit(0.5) * (T::lit(2.0) * T::PI()).ln();
        Ok(Self {
            log_weight: weight.ln(),
            mean: mean.to_vec(),
            chol,
            dim,
            log_norm: -(T::from_usize_lossy(dim) * half_log_2pi + log_det),
        })
    }

    fn log_density(&self, x: &[T]) -> T {
        let diff: Vec<T> = x.iter().zip(&self.mean).map(|(&a, &b)| a - b).collect();
        let y = forward_substitute(&self.chol, self.dim, &diff);
        let maha = y.iter().fold(T::zero(), |a, &v| a + v * v);
        self.log_weight + self.log_norm - T::lit(0.5) * maha
    }
}

/// Per-component pieces of the output-given-input conditional.
struct Conditional<T> {
    marginal: Component<T>,
    mean_out: Vec<T>,
    /// `Sigma_oi * Sigma_ii^-1`, row-major `p x q`.
    gain: Vec<T>,
    /// `Sigma_oo - Sigma_oi Sigma_ii^-1 Sigma_io`, row-major `p x p`.
    cov: Vec<T>,
}

impl<T: Scalar> Conditional<T> {
    fn new(model: &GmmModel<T>, k: usize, q: usize) -> Result<Self> {
        let d = model.dim;
        let p = d - q;
        let s = &model.covariances[k];
        let mu = &model.means[k];
        let mut s_ii = vec![T::zero(); q * q];
        for i in 0..q {
            for j in 0..q {
                s_ii[i * q + j] = s[i * d + j];
            }
        }
        let marginal = Component::new(model.weights[k], &mu[..q], &s_ii, q)?;
        // gain row r solves Sigma_ii * g_r = Sigma_io[:, r] (Sigma_ii symmetric).
        let mut gain = vec![T::zero(); p * q];
        for r in 0..p {
            let rhs: Vec<T> = (0..q).map(|j| s[(q + r) * d + j]).collect();
            let sol = cholesky_solve(&marginal.chol, q, &rhs);
            gain[r * q..(r + 1) * q].copy_from_slice(&sol);
        }
        let mut cov = vec![T::zero(); p * p];
        for r in 0..p {
            for c in 0..p {
                let correction =
                    (0..q).fold(T::zero(), |a, j| a + gain[r * q + j] * s[j * d + q + c]);
                cov[r * p + c] = s[(q + r) * d + q + c] - correction;
            }
        }
        for r in 0..p {
            for c in 0..r {
                let avg = T::lit(0.5) * (cov[r * p + c] + cov[c * p + r]);
                cov[r * p + c] = avg;
                cov[c * p + r] = avg;
            }
        }
        Ok(Self {
            marginal,
            mean_out: mu[q..].to_vec(),
            gain,
            cov,
        })
    }

    fn predict(&self, x: &[T], out: &mut [T]) {
        let q = x.len();
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.mean_out[r]
                + (0..q).fold(T::zero(), |a, j| {
                    a + self.gain[r * q + j] * (x[j] - self.marginal.mean[j])
                });
        }
    }
}

fn log_joint<T: Scalar>(comps: &[Component<T>], x: &[T]) -> Vec<T> {
    comps.iter().map(|c| c.log_density(x)).collect()
}

pub(crate) fn log_sum_exp<T: Scalar>(v: &[T]) -> T {
    let max = v.iter().copied().fold(T::neg_infinity(), T::max);
    if !max.is_finite() {
        return max;
    }
    max + v.iter().fold(T::zero(), |a, &x| a + (x - max).exp()).ln()
}

/// Fills `resp` (row-major `n x g`) with responsibilities and returns the log-likelihood.
fn e_step<T: Scalar>(model: &GmmModel<T>, data: &Points<T>, resp: &mut [T]) -> Result<T> {
    let comps = model.prepare()?;
    let g = comps.len();
    let mut ll = T::zero();
    for (x, r) in data.rows().zip(resp.chunks_exact_mut(g)) {
        let logs = log_joint(&comps, x);
        let lse = log_sum_exp(&logs);
        if !lse.is_finite() {
            return Err(Error::Numeric(
                "sample has zero likelihood under every component".into(),
            ));
        }
        for (ri, &l) in r.iter_mut().zip(&logs) {
            *ri = (l - lse).exp();
        }
        ll = ll + lse;
    }
    Ok(ll)
}

fn m_step<T: Scalar>(
    model: &GmmModel<T>,
    data: &Points<T>,
    resp: &[T],
    reg: T,
) -> Result<GmmModel<T>> {
    let g = model.components();
    let d = data.dim();
    let n = T::from_usize_lossy(data.len());
    let mut weights = Vec::with_capacity(g);
    let mut means = Vec::with_capacity(g);
    let mut covs = Vec::with_capacity(g);
    for k in 0..g {
        let nk = resp.chunks_exact(g).fold(T::zero(), |a, r| a + r[k]);
        weights.push(nk / n);
        if nk <= T::epsilon() * n {
            // Starved component: keep its shape; its weight is already ~0.
            means.push(model.means[k].clone());
            covs.push(model.covariances[k].clone());
            continue;
        }
        let mut mean = vec![T::zero(); d];
        for (x, r) in data.rows().zip(resp.chunks_exact(g)) {
            for (m, &v) in mean.iter_mut().zip(x) {
                *m = *m + r[k] * v;
            }
        }
        for m in &mut mean {
            *m = *m / nk;
        }
        let mut cov = vec![T::zero(); d * d];
        for (x, r) in data.rows().zip(resp.chunks_exact(g)) {
            accumulate_outer(&mut cov, x, &mean, r[k]);
        }
        finish_covariance(&mut cov, d, nk, reg);
        means.push(mean);
        covs.push(cov);
    }
    let total = weights.iter().fold(T::zero(), |a, &w| a + w);
    for w in &mut weights {
        *w = *w / total;
    }
    Ok(GmmModel {
        dim: d,
        weights,
        means,
        covariances: covs,
    })
}

fn accumulate_outer<T: Scalar>(cov: &mut [T], x: &[T], mean: &[T], w: T) {
    let d = mean.len();
    for i in 0..d {
        let di = x[i] - mean[i];
        for j in 0..=i {
            cov[i * d + j] = cov[i * d + j] + w * di * (x[j] - mean[j]);
        }
    }
}

/// Divides the lower triangle by `count`, mirrors it and raises every eigenvalue below
/// `floor` to `floor`.
///
/// The result maximizes the expected complete-data log-likelihood over covariances
/// `Σ ⪰ floor·I`. Because every previous iterate is also in that set, EM remains an
/// ascent method; adding a ridge instead would not be (it moves the covariance off the
/// maximizer whenever some variance is comparable to the ridge).
fn finish_covariance<T: Scalar>(cov: &mut [T], d: usize, count: T, floor: T) {
    for i in 0..d {
        for j in 0..=i {
            let v = cov[i * d + j] / count;
            cov[i * d + j] = v;
            cov[j * d + i] = v;
        }
    }
    floor_eigenvalues(cov, d, floor);
}

/// Replaces the symmetric matrix `a` by `V max(Λ, floor) Vᵀ`. Leaves `a` untouched when
/// no eigenvalue is below `floor`.
fn floor_eigenvalues<T: Scalar>(a: &mut [T], d: usize, floor: T) {
    let (values, vectors) = symmetric_eigen(a, d);
    if values.iter().all(|&l| l >= floor) {
        return;
    }
    for i in 0..d {
        for j in 0..=i {
            let v = (0..d).fold(T::zero(), |acc, k| {
                acc + vectors[i * d + k] * values[k].max(floor) * vectors[j * d + k]
            });
            a[i * d + j] = v;
            a[j * d + i] = v;
        }
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric row-major matrix. Returns the
/// eigenvalues and the eigenvectors as the columns of a row-major matrix.
fn symmetric_eigen<T: Scalar>(a: &[T], d: usize) -> (Vec<T>, Vec<T>) {
    const SWEEPS: usize = 64;
    let mut m = a.to_vec();
    let mut v = scaled_identity(d, T::one());
    let two = T::lit(2.0);
    for _ in 0..SWEEPS {
        let off = (0..d)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .fold(T::zero(), |acc, (i, j)| acc + m[i * d + j] * m[i * d + j]);
        let diag = (0..d).fold(T::zero(), |acc, i| acc + m[i * d + i] * m[i * d + i]);
        if off <= T::epsilon() * T::epsilon() * diag || off == T::zero() {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = m[p * d + q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (m[q * d + q] - m[p * d + p]) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..d {
                    let (mkp, mkq) = (m[k * d + p], m[k * d + q]);
                    m[k * d + p] = c * mkp - s * mkq;
                    m[k * d + q] = s * mkp + c * mkq;
                }
                for k in 0..d {
                    let (mpk, mqk) = (m[p * d + k], m[q * d + k]);
                    m[p * d + k] = c * mpk - s * mqk;
                    m[q * d + k] = s * mpk + c * mqk;
                }
                for k in 0..d {
                    let (vkp, vkq) = (v[k * d + p], v[k * d + q]);
                    v[k * d + p] = c * vkp - s * vkq;
                    v[k * d + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..d).map(|i| m[i * d + i]).collect(), v)
}

fn scaled_identity<T: Scalar>(d: usize, v: T) -> Vec<T> {
    let mut m = vec![T::zero(); d * d];
    for i in 0..d {
        m[i * d + i] = v;
    }
    m
}

/// Seeded k-means++ followed by Lloyd iterations; returns a label per row.
fn kmeans<T: Scalar>(data: &Points<T>, g: usize, seed: u64) -> Vec<usize> {
    let n = data.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers: Vec<Vec<T>> = vec![data.row(rng.gen_range(0..n)).to_vec()];
    let mut d2: Vec<f64> = data
        .rows()
        .map(|x| squared_distance(x, &centers[0]).to_f64_lossy())
        .collect();
    while centers.len() < g {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        let c = data.row(pick).to_vec();
        for (v, x) in d2.iter_mut().zip(data.rows()) {
            *v = v.min(squared_distance(x, &c).to_f64_lossy());
        }
        centers.push(c);
    }

    let d = data.dim();
    let mut labels = vec![0usize; n];
    for iter in 0..=LLOYD_ITERS {
        let mut changed = false;
        for (l, x) in labels.iter_mut().zip(data.rows()) {
            let best = (0..g)
                .min_by(|&a, &b| {
                    squared_distance(x, &centers[a])
                        .partial_cmp(&squared_distance(x, &centers[b]))
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(0);
            if *l != best {
                *l = best;
                changed = true;
            }
        }
        if (iter > 0 && !changed) || iter == LLOYD_ITERS {
            break;
        }
        let mut sums = vec![T::zero(); g * d];
        let mut counts = vec![0usize; g];
        for (&l, x) in labels.iter().zip(data.rows()) {
            counts[l] += 1;
            for (s, &v) in sums[l * d..(l + 1) * d].iter_mut().zip(x) {
                *s = *s + v;
            }
        }
        for k in 0..g {
            if counts[k] > 0 {
                let c = T::from_usize_lossy(counts[k]);
                for (dst, &s) in centers[k].iter_mut().zip(&sums[k * d..(k + 1) * d]) {
                    *dst = s / c;
                }
            }
        }
    }
    labels
}

/// Mixture parameters from hard cluster labels. Clusters with fewer than two members
/// borrow the global covariance.
fn initial_model<T: Scalar>(
    data: &Points<T>,
    g: usize,
    labels: &[usize],
    reg: T,
) -> Result<GmmModel<T>> {
    let d = data.dim();
    let n = data.len();
    let global_mean: Vec<T> = (0..d)
        .map(|c| data.rows().fold(T::zero(), |a, x| a + x[c]) / T::from_usize_lossy(n))
        .collect();
    let mut global_cov = vec![T::zero(); d * d];
    for x in data.rows() {
        accumulate_outer(&mut global_cov, x, &global_mean, T::one());
    }
    finish_covariance(&mut global_cov, d, T::from_usize_lossy(n), reg);

    let mut weights = Vec::with_capacity(g);
    let mut means = Vec::with_capacity(g);
    let mut covs = Vec::with_capacity(g);
    for k in 0..g {
        let members: Vec<&[T]> = data
            .rows()
            .zip(labels)
            .filter(|(_, &l)| l == k)
            .map(|(x, _)| x)
            .collect();
        // Empty clusters get a small, non-zero prior so EM can still use them.
        let count = members.len().max(1);
        weights.push(T::from_usize_lossy(count));
        if members.len() < 2 {
            means.push(
                members
                    .first()
                    .map_or_else(|| global_mean.clone(), |x| x.to_vec()),
            );
            covs.push(global_cov.clone());
            continue;
        }
        let c = T::from_usize_lossy(members.len());
        let mean: Vec<T> = (0..d)
            .map(|j| members.iter().fold(T::zero(), |a, x| a + x[j]) / c)
            .collect();
        let mut cov = vec![T::zero(); d * d];
        for x in &members {
            accumulate_outer(&mut cov, x, &mean, T::one());
        }
        finish_covariance(&mut cov, d, c, reg);
        means.push(mean);
        covs.push(cov);
    }
    let total = weights.iter().fold(T::zero(), |a, &w| a + w);
    for w in &mut weights {
        *w = *w / total;
    }
    Ok(GmmModel {
        dim: d,
        weights,
        means,
        covariances: covs,
    })
}

/// Lower Cholesky factor of a row-major SPD matrix, or `None` if a pivot is not positive.
fn cholesky<T: Scalar>(a: &[T], d: usize) -> Option<Vec<T>> {
    let mut l = vec![T::zero(); d * d];
    for i in 0..d {
        for j in 0..=i {
            let s = (0..j).fold(a[i * d + j], |acc, k| acc - l[i * d + k] * l[j * d + k]);
            if i == j {
                if !(s > T::zero()) {
                    return None;
                }
                l[i * d + i] = s.sqrt();
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    Some(l)
}

/// Solves `L y = b` for lower-triangular `L`.
fn forward_substitute<T: Scalar>(l: &[T], d: usize, b: &[T]) -> Vec<T> {
    let mut y = vec![T::zero(); d];
    for i in 0..d {
        let s = (0..i).fold(b[i], |acc, k| acc - l[i * d + k] * y[k]);
        y[i] = s / l[i * d + i];
    }
    y
}

/// Solves `L L^T x = b`.
fn cholesky_solve<T: Scalar>(l: &[T], d: usize, b: &[T]) -> Vec<T> {
    let y = forward_substitute(l, d, b);
    let mut x = vec![T::zero(); d];
    for i in (0..d).rev() {
        let s = (i + 1..d).fold(y[i], |acc, k| acc - l[k * d + i] * x[k]);
        x[i] = s / l[i * d + i];
    }
    x
}
