//! Evaluation protocols: time vs. arc-length pipelines, barycenter quality against a
//! known path, reference and component sweeps, and runtime benchmarks.

mod bench;
pub mod plot;

pub use bench::{benchmark_runtimes, BenchmarkRow, BenchmarkTable, BENCHMARK_CSV_HEADER};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::barycenter::{
    dba, euclidean_barycenter, fit_gmm, gmr, soft_dtw_barycenter, BarycenterResult, GmmFit,
    SoftBarycenterOptions, DBA_MAX_ITERS,
};
use crate::dtw::{dtw, warp_to_reference};
use crate::error::{Error, Result};
use crate::metrics::{cumulative_l2, hausdorff, rho, sn_csd, symbolic_entropy, MetricReport};
use crate::sampling::{optimize_delta, spatial_sample};
use crate::scalar::Scalar;
use crate::trajectory::{resample_by_parameter, resample_uniform, DemonstrationSet, Points};

/// Default common resample length.
pub const DEFAULT_RESAMPLE: usize = 200;
/// Default mixture size for GMR barycenters.
pub const DEFAULT_COMPONENTS: usize = 5;
/// Default soft-DTW smoothing for data in metres.
pub const DEFAULT_SOFT_GAMMA: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    Time,
    ArcLength,
}

impl Domain {
    pub fn label(self) -> &'static str {
        match self {
            Domain::Time => "time",
            Domain::ArcLength => "arclength",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aligner {
    None,
    /// Warp every demo onto demo `index` with exact DTW.
    DtwToReference(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Euc,
    Dba,
    Sdtw,
    Gmr,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Euc => "euc",
            Method::Dba => "dba",
            Method::Sdtw => "sdtw",
            Method::Gmr => "gmr",
        }
    }
}

/// Spatial period used by the arc-length domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaRule<T> {
    Fixed(T),
    /// Per-demo largest spacing meeting the Hausdorff budget `dh_star`.
    Optimized {
        dh_star: T,
        dh_tol: T,
        delta1: T,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig<T> {
    pub domain: Domain,
    pub aligner: Aligner,
    pub method: Method,
    /// Required iff `domain` is arc-length.
    pub delta: Option<DeltaRule<T>>,
    /// Mixture size; required iff `method` is GMR.
    pub components: Option<usize>,
    /// Soft-DTW smoothing (soft-DTW method only).
    pub gamma: T,
    /// Common resample length M.
    pub resample: usize,
    pub seed: u64,
}

impl<T: Scalar> PipelineConfig<T> {
    /// A valid configuration with defaults for everything but the three selectors.
    pub fn new(domain: Domain, aligner: Aligner, method: Method) -> Self {
        Self {
            domain,
            aligner,
            method,
            delta: (domain == Domain::ArcLength)
                .then(|| DeltaRule::Fixed(T::lit(crate::sampling::DEFAULT_SKILL_DELTA))),
            components: (method == Method::Gmr).then_some(DEFAULT_COMPONENTS),
            gamma: T::lit(DEFAULT_SOFT_GAMMA),
            resample: DEFAULT_RESAMPLE,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.domain, &self.delta) {
            (Domain::ArcLength, None) => {
                return Err(Error::invalid("the arc-length domain needs a delta"))
            }
            (Domain::Time, Some(_)) => {
                return Err(Error::invalid(
                    "delta only applies to the arc-length domain",
                ))
            }
            (Domain::ArcLength, Some(DeltaRule::Fixed(d))) if !(*d > T::zero()) => {
                return Err(Error::invalid(format!("delta must be positive, got {d}")))
            }
            _ => {}
        }
        match (self.method, self.components) {
            (Method::Gmr, None) => return Err(Error::invalid("the GMR method needs G")),
            (Method::Gmr, Some(0)) => return Err(Error::invalid("G must be at least 1")),
            (m, Some(_)) if m != Method::Gmr => {
                return Err(Error::invalid("G only applies to the GMR method"))
            }
            _ => {}
        }
        if self.resample < 2 {
            return Err(Error::invalid("resample length must be >= 2"));
        }
        if self.method == Method::Sdtw && !(self.gamma > T::zero()) {
            return Err(Error::invalid("soft-DTW gamma must be positive"));
        }
        Ok(())
    }

    /// Short label such as `arclength/gmr` or `time/dtw/gmr`.
    pub fn label(&self) -> String {
        let mut s = self.domain.label().to_string();
        if let Aligner::DtwToReference(_) = self.aligner {
            s.push_str("/dtw");
        }
        s.push('/');
        s.push_str(self.method.label());
        s
    }
}

/// Everything [`evaluate_group`] computes for one group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupOutcome<T> {
    pub report: MetricReport<T>,
    pub barycenter: BarycenterResult<T>,
    /// Demos after domain conversion, resampling and optional alignment.
    pub processed: Vec<Points<T>>,
    /// Mixture fit behind a GMR barycenter.
    pub gmm: Option<GmmFit<T>>,
}

/// Converts every demo into the configured domain, resamples it to M points and
/// optionally aligns it to the reference demo.
pub fn preprocess<T: Scalar>(
    set: &DemonstrationSet<T>,
    cfg: &PipelineConfig<T>,
) -> Result<Vec<Points<T>>> {
    cfg.validate()?;
    let m = cfg.resample;
    let processed = set
        .demos()
        .iter()
        .enumerate()
        .map(|(i, demo)| match cfg.domain {
            Domain::Time => Ok(resample_uniform(demo, m)?.into_parts().1),
            Domain::ArcLength => {
                let delta = match cfg.delta {
                    Some(DeltaRule::Fixed(d)) => d,
                    Some(DeltaRule::Optimized {
                        dh_star,
                        dh_tol,
                        delta1,
                    }) => optimize_delta(demo, dh_star, dh_tol, delta1)?
                        .chosen
                        .ok_or_else(|| {
                            Error::invalid(format!("demo {i}: no spacing meets d_H* = {dh_star}"))
                        })?,
                    None => unreachable!("validated"),
                };
                let path = spatial_sample(demo, delta, true)?;
                resample_by_parameter(&path.s, &path.points, m)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    match cfg.aligner {
        Aligner::None => Ok(processed),
        Aligner::DtwToReference(r) => warp_to_reference(&processed, r),
    }
}

/// Runs the configured pipeline on one group and scores it.
pub fn evaluate_group<T: Scalar>(
    set: &DemonstrationSet<T>,
    cfg: &PipelineConfig<T>,
) -> Result<GroupOutcome<T>> {
    let processed = preprocess(set, cfg)?;
    let (barycenter, gmm) = barycenter_of(&processed, cfg)?;
    let (rho_v, entropy, sncsd) = synchrony(&processed)?;
    let l2 = processed.iter().try_fold(T::zero(), |acc, p| {
        Ok::<_, Error>(acc + cumulative_l2(p, &barycenter.curve)?)
    })?;
    Ok(GroupOutcome {
        report: MetricReport {
            group: set.name.clone(),
            domain: cfg.domain.label().into(),
            method: cfg.method.label().into(),
            rho: rho_v,
            entropy,
            sncsd,
            l2,
        },
        barycenter,
        processed,
        gmm,
    })
}

/// [`evaluate_group`] over many groups in parallel; results keep the input order.
pub fn evaluate_groups<T: Scalar>(
    sets: &[DemonstrationSet<T>],
    cfg: &PipelineConfig<T>,
) -> Result<Vec<GroupOutcome<T>>> {
    sets.par_iter().map(|s| evaluate_group(s, cfg)).collect()
}

/// The barycenter of already processed (equal-length) demos.
pub fn barycenter_of<T: Scalar>(
    processed: &[Points<T>],
    cfg: &PipelineConfig<T>,
) -> Result<(BarycenterResult<T>, Option<GmmFit<T>>)> {
    match cfg.method {
        Method::Euc => Ok((euclidean_barycenter(processed)?, None)),
        Method::Dba => Ok((dba(processed, None, DBA_MAX_ITERS)?, None)),
        Method::Sdtw => {
            let opts = SoftBarycenterOptions::new(cfg.gamma, cfg.resample);
            Ok((soft_dtw_barycenter(processed, &opts)?, None))
        }
        Method::Gmr => {
            let g = cfg
                .components
                .ok_or_else(|| Error::invalid("the GMR method needs G"))?;
            let m = cfg.resample;
            let dim = processed.first().map_or(0, Points::dim);
            let inputs = unit_grid::<T>(m);
            let mut joint = Points::with_capacity(dim + 1, m * processed.len());
            let mut row = Vec::with_capacity(dim + 1);
            for p in processed {
                for (j, x) in p.rows().enumerate() {
                    row.clear();
                    row.push(inputs[j]);
                    row.extend_from_slice(x);
                    joint.push(&row);
                }
            }
            let fit = fit_gmm(&joint, g, cfg.seed)?;
            let out = gmr(&fit.model, &Points::from_scalars(inputs))?;
            Ok((out.barycenter, Some(fit)))
        }
    }
}

/// `m` evenly spaced values on `[0, 1]`, endpoints exact.
fn unit_grid<T: Scalar>(m: usize) -> Vec<T> {
    let last = T::from_usize_lossy(m - 1);
    (0..m).map(|j| T::from_usize_lossy(j) / last).collect()
}

/// `(rho, entropy, snCSD)` per dimension, averaged over dimensions in which at least one
/// demo varies. A single demo is trivially synchronous with itself.
fn synchrony<T: Scalar>(processed: &[Points<T>]) -> Result<(T, T, T)> {
    let dim = processed.first().map_or(0, Points::dim);
    let k = processed.len();
    let mut sums = (T::zero(), T::zero(), T::zero());
    let mut used = 0usize;
    for d in 0..dim {
        let signals: Vec<Vec<T>> = processed.iter().map(|p| p.column(d)).collect();
        let varies = signals.iter().any(|s| s.iter().any(|&v| v != s[0]));
        if !varies {
            continue;
        }
        let (r, c) = if k < 2 {
            (T::one(), T::one())
        } else {
            (rho(&signals)?, sn_csd(&signals)?)
        };
        sums = (sums.0 + r, sums.1 + symbolic_entropy(&signals)?, sums.2 + c);
        used += 1;
    }
    if used == 0 {
        return Err(Error::UndefinedMetric(
            "every demo is constant in every dimension".into(),
        ));
    }
    let n = T::from_usize_lossy(used);
    Ok((sums.0 / n, sums.1 / n, sums.2 / n))
}

/// Closeness of a barycenter to the known path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quality<T> {
    /// Hausdorff distance between the two sample sets.
    pub d_h: T,
    /// Exact (unconstrained, Euclidean-cost) DTW distance.
    pub d_dtw: T,
}

/// Scores `curve` against `ground_truth`.
pub fn score_against<T: Scalar>(curve: &Points<T>, ground_truth: &Points<T>) -> Result<Quality<T>> {
    Ok(Quality {
        d_h: hausdorff(curve, ground_truth)?,
        d_dtw: dtw(curve, ground_truth, None)?.distance,
    })
}

/// Runs the pipeline and scores its barycenter against `ground_truth`.
pub fn barycenter_quality<T: Scalar>(
    set: &DemonstrationSet<T>,
    cfg: &PipelineConfig<T>,
    ground_truth: &Points<T>,
) -> Result<Quality<T>> {
    let processed = preprocess(set, cfg)?;
    let (bary, _) = barycenter_of(&processed, cfg)?;
    score_against(&bary.curve, ground_truth)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow<T> {
    pub reference: usize,
    pub quality: Quality<T>,
    pub curve: Points<T>,
}

/// One row per possible reference demo.
///
/// With a DTW aligner the reference is swapped in turn; a pipeline without an aligner
/// never reads the reference, so its rows are identical by construction.
pub fn reference_sensitivity<T: Scalar>(
    set: &DemonstrationSet<T>,
    cfg: &PipelineConfig<T>,
    ground_truth: &Points<T>,
) -> Result<Vec<ReferenceRow<T>>> {
    (0..set.len())
        .into_par_iter()
        .map(|r| {
            let mut c = cfg.clone();
            if let Aligner::DtwToReference(_) = c.aligner {
                c.aligner = Aligner::DtwToReference(r);
            }
            let processed = preprocess(set, &c)?;
            let (bary, _) = barycenter_of(&processed, &c)?;
            Ok(ReferenceRow {
                reference: r,
                quality: score_against(&bary.curve, ground_truth)?,
                curve: bary.curve,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow<T> {
    pub components: usize,
    /// `None` when the data cannot support this many components.
    pub quality: Option<Quality<T>>,
    pub feasible: bool,
}

/// Barycenter quality for each mixture size in `gs`; each size uses seed `cfg.seed + G`.
pub fn gmm_sweep<T: Scalar>(
    set: &DemonstrationSet<T>,
    cfg: &PipelineConfig<T>,
    gs: &[usize],
    ground_truth: &Points<T>,
) -> Result<Vec<SweepRow<T>>> {
    if cfg.method != Method::Gmr {
        return Err(Error::invalid("gmm_sweep needs the GMR method"));
    }
    let processed = preprocess(set, cfg)?;
    let samples = processed.len() * cfg.resample;
    let joint_dim = set.dim() + 1;
    gs.par_iter()
        .map(|&g| {
            if g == 0 || samples < g * (joint_dim + 1) {
                return Ok(SweepRow {
                    components: g,
                    quality: None,
                    feasible: false,
                });
            }
            let mut c = cfg.clone();
            c.components = Some(g);
            c.seed = cfg.seed.wrapping_add(g as u64);
            let (bary, _) = barycenter_of(&processed, &c)?;
            Ok(SweepRow {
                components: g,
                quality: Some(score_against(&bary.curve, ground_truth)?),
                feasible: true,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::Trajectory;

    fn demo(times: Vec<f64>) -> Trajectory<f64> {
        let n = times.len();
        let rows: Vec<[f64; 2]> = (0..n)
            .map(|i| {
                let u = i as f64 / (n - 1) as f64;
                [u, (3.0 * u).sin()]
            })
            .collect();
        Trajectory::from_rows(times, rows.iter()).unwrap()
    }

    fn identical_set() -> DemonstrationSet<f64> {
        let d = demo((0..50).map(|i| i as f64 * 0.1).collect());
        DemonstrationSet::new("same", vec![d.clone(), d.clone(), d]).unwrap()
    }

    #[test]
    fn config_invariants() {
        let mut c = PipelineConfig::<f64>::new(Domain::ArcLength, Aligner::None, Method::Gmr);
        assert!(c.validate().is_ok());
        c.delta = None;
        assert!(c.validate().is_err());
        let mut c = PipelineConfig::<f64>::new(Domain::Time, Aligner::None, Method::Euc);
        assert!(c.validate().is_ok());
        c.components = Some(3);
        assert!(c.validate().is_err());
        assert_eq!(
            PipelineConfig::<f64>::new(Domain::Time, Aligner::DtwToReference(0), Method::Gmr)
                .label(),
            "time/dtw/gmr"
        );
    }

    #[test]
    fn identical_demos_are_perfectly_synchronous() {
        let set = identical_set();
        for domain in [Domain::Time, Domain::ArcLength] {
            for method in [Method::Euc, Method::Dba, Method::Gmr] {
                let mut cfg = PipelineConfig::new(domain, Aligner::None, method);
                cfg.resample = 64;
                let out = evaluate_group(&set, &cfg).unwrap();
                assert!((out.report.rho - 1.0).abs() < 1e-6, "{method:?}");
                assert!((out.report.sncsd - 1.0).abs() < 1e-9);
                if method != Method::Gmr {
                    assert!(out.report.l2.abs() < 1e-9, "{method:?} {}", out.report.l2);
                }
            }
        }
    }

    #[test]
    fn constant_shift_quality() {
        let gt = Points::<f64>::from_scalars(vec![0.0, 1.0, 2.0, 3.0]);
        let shifted = Points::from_scalars(vec![0.5, 1.5, 2.5, 3.5]);
        let q = score_against(&gt, &gt).unwrap();
        assert_eq!((q.d_h, q.d_dtw), (0.0, 0.0));
        let q = score_against(&shifted, &gt).unwrap();
        assert!((q.d_h - 0.5).abs() < 1e-12);
        assert!((q.d_dtw - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sweeps_have_one_row_per_entry() {
        let set = identical_set();
        let mut cfg = PipelineConfig::new(Domain::ArcLength, Aligner::None, Method::Gmr);
        cfg.resample = 40;
        let gt = set.demos()[0].points().resample(40).unwrap();
        let rows = gmm_sweep(&set, &cfg, &[1], &gt).unwrap();
        assert_eq!(rows.len(), 1);
        let rows = gmm_sweep(&set, &cfg, &[1, 1000], &gt).unwrap();
        assert!(rows[0].feasible && !rows[1].feasible);
        let single = DemonstrationSet::new("one", vec![set.demos()[0].clone()]).unwrap();
        let mut cfg = PipelineConfig::new(Domain::Time, Aligner::DtwToReference(0), Method::Gmr);
        cfg.resample = 40;
        assert_eq!(reference_sensitivity(&single, &cfg, &gt).unwrap().len(), 1);
    }
}
