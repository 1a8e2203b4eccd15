//! `arcsync` command-line frontend.
//!
//! Exit codes: 0 success, 2 usage or invalid argument, 3 unreadable or malformed data,
//! 4 degenerate input or numeric failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use arcsync::dataset::{
    ground_truth, load_dataset, load_demo_csv, save_dataset, synthetic_group, write_curve_csv,
    write_demo_csv, write_path_csv, Shape,
};
use arcsync::harness::plot::{boxplot, line_plot, Series};
use arcsync::harness::{
    benchmark_runtimes, evaluate_groups, gmm_sweep, reference_sensitivity, score_against, Aligner,
    DeltaRule, Domain, GroupOutcome, Method, PipelineConfig, DEFAULT_COMPONENTS, DEFAULT_RESAMPLE,
    DEFAULT_SOFT_GAMMA,
};
use arcsync::metrics::MetricReport;
use arcsync::sampling::{optimize_delta, spatial_sample, DEFAULT_SKILL_DELTA};
use arcsync::{DemonstrationSet, Error, Points};

/// Environment variable overriding the worker thread count.
const THREADS_ENV: &str = "ARCSYNC_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "arcsync",
    version,
    about = "Arc-length trajectory sampling, alignment and barycenters"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Spatially sample one demo CSV at a fixed spacing.
    Filter(FilterArgs),
    /// Search the largest spacing whose Hausdorff error stays below a budget.
    OptimizeDelta(OptimizeArgs),
    /// Run a time or arc-length pipeline over demonstration sets and score it.
    Evaluate(EvaluateArgs),
    /// Time DTW, band-constrained DTW, FastDTW and spatial sampling.
    Benchmark(BenchmarkArgs),
    /// Write synthetic demonstration groups (same path, random timing laws).
    Generate(GenerateArgs),
}

#[derive(Args, Debug)]
struct FilterArgs {
    /// Demo CSV with header `t,x0,...`.
    #[arg(long = "in")]
    input: PathBuf,
    /// Spatial period in metres.
    #[arg(long)]
    delta: f64,
    /// Append the final recorded point when it is closer than delta to the last sample.
    #[arg(long)]
    keep_endpoint: bool,
    /// Output CSV (`s,t,x0,...`).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct OptimizeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Hausdorff budget in metres.
    #[arg(long, default_value_t = 0.004)]
    dh_star: f64,
    #[arg(long, default_value_t = 1e-4)]
    dh_tol: f64,
    /// First spacing of the geometric grid.
    #[arg(long, default_value_t = 1e-3)]
    delta1: f64,
    /// Output JSON report.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DomainArg {
    Time,
    Arclength,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Euc,
    Dba,
    Sdtw,
    Gmr,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AlignerArg {
    None,
    Dtw,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Dataset manifest; repeat for several groups.
    #[arg(long, required = true)]
    manifest: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "arclength")]
    domain: DomainArg,
    #[arg(long, value_enum, default_value = "gmr")]
    method: MethodArg,
    #[arg(long, value_enum, default_value = "none")]
    aligner: AlignerArg,
    /// Reference demo for the DTW aligner.
    #[arg(long, default_value_t = 0)]
    reference: usize,
    /// Spatial period (arc-length domain; default 0.005).
    #[arg(long)]
    delta: Option<f64>,
    /// Pick the spacing per demo from this Hausdorff budget instead of --delta.
    #[arg(long, conflicts_with = "delta")]
    dh_star: Option<f64>,
    /// Mixture size (GMR only; default 5).
    #[arg(long = "G")]
    components: Option<usize>,
    /// Soft-DTW smoothing.
    #[arg(long, default_value_t = DEFAULT_SOFT_GAMMA)]
    gamma: f64,
    /// Common resample length.
    #[arg(long, default_value_t = DEFAULT_RESAMPLE)]
    resample: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Known path (CSV `t,x0,...`; the first column is ignored) for quality scores.
    #[arg(long)]
    ground_truth: Option<PathBuf>,
    /// Mixture sizes for a component sweep, e.g. `3,5,8,12` (needs --ground-truth).
    #[arg(long, value_delimiter = ',')]
    sweep_g: Vec<usize>,
    /// Score every choice of reference demo (needs --ground-truth).
    #[arg(long)]
    sweep_reference: bool,
    /// Also write SVG plots.
    #[arg(long)]
    plots: bool,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BenchmarkArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [256usize, 512, 1024, 2048])]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    repeats: usize,
    /// Output CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Preset shape name; repeat for several (default: every preset).
    #[arg(long)]
    shape: Vec<String>,
    /// Groups per shape.
    #[arg(long, default_value_t = 1)]
    groups: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sample rate in Hz.
    #[arg(long, default_value_t = 100.0)]
    rate: f64,
    /// Standard deviation of the position noise in metres.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Ground-truth resample length.
    #[arg(long, default_value_t = DEFAULT_RESAMPLE)]
    resample: usize,
    /// Replace existing output.
    #[arg(long)]
    overwrite: bool,
    /// Output directory; one sub-directory per group.
    #[arg(long)]
    out: PathBuf,
}

/// A failure together with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_) | Error::InfeasibleBand { .. } => 2,
            Error::Parse { .. } | Error::Io { .. } | Error::Json { .. } => 3,
            Error::DegeneratePath(_) | Error::Numeric(_) | Error::UndefinedMetric(_) => 4,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
    .into()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(f) = configure_threads() {
        eprintln!("error: {}", f.message);
        return ExitCode::from(f.code);
    }
    let result = match cli.command {
        Command::Filter(a) => filter(a),
        Command::OptimizeDelta(a) => optimize(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Benchmark(a) => benchmark(a),
        Command::Generate(a) => generate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        usage(format!(
            "{THREADS_ENV} must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| usage(format!("cannot configure {n} threads: {e}")))
}

fn filter(a: FilterArgs) -> Result<(), Failure> {
    let traj = load_demo_csv::<f64>(&a.input)?;
    let path = spatial_sample(&traj, a.delta, a.keep_endpoint)?;
    write_path_csv(&path, &a.out)?;
    println!(
        "{} -> {}: {} samples at delta {}",
        a.input.display(),
        a.out.display(),
        path.len(),
        a.delta
    );
    Ok(())
}

fn optimize(a: OptimizeArgs) -> Result<(), Failure> {
    let traj = load_demo_csv::<f64>(&a.input)?;
    let report = optimize_delta(&traj, a.dh_star, a.dh_tol, a.delta1)?;
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| usage(format!("cannot serialize report: {e}")))?;
    fs::write(&a.out, json + "\n").map_err(|e| io_failure(&a.out, e))?;
    match (report.chosen, report.achieved) {
        (Some(d), Some(dh)) => println!("delta* = {d:.6e} (d_H = {dh:.6e}, budget {})", a.dh_star),
        _ => println!("no spacing meets d_H* = {} (report written)", a.dh_star),
    }
    Ok(())
}

fn pipeline_config(a: &EvaluateArgs) -> PipelineConfig<f64> {
    let domain = match a.domain {
        DomainArg::Time => Domain::Time,
        DomainArg::Arclength => Domain::ArcLength,
    };
    let method = match a.method {
        MethodArg::Euc => Method::Euc,
        MethodArg::Dba => Method::Dba,
        MethodArg::Sdtw => Method::Sdtw,
        MethodArg::Gmr => Method::Gmr,
    };
    let aligner = match a.aligner {
        AlignerArg::None => Aligner::None,
        AlignerArg::Dtw => Aligner::DtwToReference(a.reference),
    };
    let delta = match (domain, a.delta, a.dh_star) {
        (_, Some(d), _) => Some(DeltaRule::Fixed(d)),
        (_, None, Some(dh_star)) => Some(DeltaRule::Optimized {
            dh_star,
            dh_tol: dh_star / 40.0,
            delta1: 1e-3,
        }),
        (Domain::ArcLength, None, None) => Some(DeltaRule::Fixed(DEFAULT_SKILL_DELTA)),
        (Domain::Time, None, None) => None,
    };
    let components = match (method, a.components) {
        (Method::Gmr, None) => Some(DEFAULT_COMPONENTS),
        (_, g) => g,
    };
    PipelineConfig {
        domain,
        aligner,
        method,
        delta,
        components,
        gamma: a.gamma,
        resample: a.resample,
        seed: a.seed,
    }
}

fn evaluate(a: EvaluateArgs) -> Result<(), Failure> {
    let cfg = pipeline_config(&a);
    cfg.validate()?;
    if (a.sweep_reference || !a.sweep_g.is_empty()) && a.ground_truth.is_none() {
        return Err(usage("--sweep-g and --sweep-reference need --ground-truth"));
    }
    if !a.sweep_g.is_empty() && cfg.method != Method::Gmr {
        return Err(usage("--sweep-g needs --method gmr"));
    }
    let sets = a
        .manifest
        .iter()
        .map(|m| load_dataset::<f64>(m))
        .collect::<Result<Vec<_>, _>>()?;
    let gt = a
        .ground_truth
        .as_ref()
        .map(|p| load_demo_csv::<f64>(p).map(|t| t.into_parts().1))
        .transpose()?;
    fs::create_dir_all(&a.out).map_err(|e| io_failure(&a.out, e))?;

    let outcomes: Vec<GroupOutcome<f64>> = evaluate_groups(&sets, &cfg)?;
    let mut metrics = format!("{}\n", MetricReport::<f64>::CSV_HEADER);
    for o in &outcomes {
        metrics.push_str(&o.report.csv_row());
        metrics.push('\n');
    }
    write_text(&a.out.join("metrics.csv"), &metrics)?;

    let grid: Vec<f64> = (0..cfg.resample)
        .map(|j| j as f64 / (cfg.resample - 1) as f64)
        .collect();
    for (set, o) in sets.iter().zip(&outcomes) {
        let stem = file_stem(&set.name);
        write_curve_csv(
            "u",
            &grid,
            &o.barycenter.curve,
            &a.out.join(format!("barycenter_{stem}.csv")),
        )?;
        if a.plots {
            write_text(
                &a.out.join(format!("barycenter_{stem}.svg")),
                &barycenter_svg(set, o, &cfg),
            )?;
        }
        println!(
            "{} [{}]: rho {:.4} H {:.4} snCSD {:.4} l2 {:.4}",
            set.name,
            cfg.label(),
            o.report.rho,
            o.report.entropy,
            o.report.sncsd,
            o.report.l2
        );
    }

    if let Some(gt) = &gt {
        let mut quality = String::from("group,d_h,d_dtw\n");
        for (set, o) in sets.iter().zip(&outcomes) {
            let q = score_against(&o.barycenter.curve, gt)?;
            quality.push_str(&format!("{},{:e},{:e}\n", set.name, q.d_h, q.d_dtw));
        }
        write_text(&a.out.join("quality.csv"), &quality)?;

        if a.sweep_reference {
            let mut csv = String::from("group,reference,d_h,d_dtw\n");
            let mut plot_groups = Vec::new();
            for set in &sets {
                let rows = reference_sensitivity(set, &cfg, gt)?;
                for r in &rows {
                    csv.push_str(&format!(
                        "{},{},{:e},{:e}\n",
                        set.name, r.reference, r.quality.d_h, r.quality.d_dtw
                    ));
                }
                plot_groups.push((
                    set.name.clone(),
                    rows.iter().map(|r| r.quality.d_dtw).collect(),
                ));
            }
            write_text(&a.out.join("reference_sensitivity.csv"), &csv)?;
            if a.plots {
                write_text(
                    &a.out.join("reference_sensitivity.svg"),
                    &boxplot(
                        &format!("d_DTW across references ({})", cfg.label()),
                        &plot_groups,
                    ),
                )?;
            }
        }

        if !a.sweep_g.is_empty() {
            let mut csv = String::from("group,G,feasible,d_h,d_dtw\n");
            let mut series = Vec::new();
            for set in &sets {
                let rows = gmm_sweep(set, &cfg, &a.sweep_g, gt)?;
                let mut pts = Vec::new();
                for r in &rows {
                    match r.quality {
                        Some(q) => {
                            csv.push_str(&format!(
                                "{},{},true,{:e},{:e}\n",
                                set.name, r.components, q.d_h, q.d_dtw
                            ));
                            pts.push((r.components as f64, q.d_dtw));
                        }
                        None => csv.push_str(&format!("{},{},false,,\n", set.name, r.components)),
                    }
                }
                series.push(Series {
                    label: set.name.clone(),
                    points: pts,
                });
            }
            write_text(&a.out.join("gmm_sweep.csv"), &csv)?;
            if a.plots {
                write_text(
                    &a.out.join("gmm_sweep.svg"),
                    &line_plot("d_DTW versus G", &series),
                )?;
            }
        }
    }
    Ok(())
}

fn barycenter_svg(
    set: &DemonstrationSet<f64>,
    o: &GroupOutcome<f64>,
    cfg: &PipelineConfig<f64>,
) -> String {
    let xy = |p: &Points<f64>| -> Vec<(f64, f64)> {
        if p.dim() >= 2 {
            p.rows().map(|r| (r[0], r[1])).collect()
        } else {
            p.rows()
                .enumerate()
                .map(|(i, r)| (i as f64, r[0]))
                .collect()
        }
    };
    let mut series: Vec<Series> = o
        .processed
        .iter()
        .enumerate()
        .map(|(i, p)| Series {
            label: format!("demo {i}"),
            points: xy(p),
        })
        .collect();
    series.push(Series {
        label: "barycenter".into(),
        points: xy(&o.barycenter.curve),
    });
    line_plot(&format!("{} ({})", set.name, cfg.label()), &series)
}

fn benchmark(a: BenchmarkArgs) -> Result<(), Failure> {
    let table = benchmark_runtimes(&a.sizes, a.repeats)?;
    write_text(&a.out, &table.to_csv())?;
    for m in table.methods() {
        match table.loglog_slope(m) {
            Some(s) => println!("{m}: log-log slope {s:.2}"),
            None => println!("{m}: single size, no slope"),
        }
    }
    if let Some(r) = table.ss_ratio() {
        println!("spatial sampling fine/coarse runtime ratio {r:.2}");
    }
    Ok(())
}

fn generate(a: GenerateArgs) -> Result<(), Failure> {
    let presets = Shape::presets();
    let names: Vec<String> = if a.shape.is_empty() {
        presets.iter().map(|(n, _)| n.to_string()).collect()
    } else {
        a.shape.clone()
    };
    for name in &names {
        let shape = Shape::preset(name).ok_or_else(|| {
            usage(format!(
                "unknown shape {name:?}; choose from {}",
                presets.iter().map(|p| p.0).collect::<Vec<_>>().join(", ")
            ))
        })?;
        for g in 0..a.groups {
            let group = format!("{name}-{g}");
            let seed = a.seed.wrapping_mul(1_000_003).wrapping_add(
                (names.iter().position(|n| n == name).unwrap_or(0) * a.groups + g) as u64,
            );
            let set = synthetic_group::<f64>(&group, &shape, seed, a.rate, a.noise)?;
            let dir = a.out.join(&group);
            let manifest = save_dataset(&set, &dir, a.overwrite)?;
            let gt = ground_truth::<f64>(&shape, a.resample)?;
            let u: Vec<f64> = (0..gt.len())
                .map(|j| j as f64 / (gt.len() - 1) as f64)
                .collect();
            let traj = arcsync::Trajectory::new(u, gt)?;
            write_demo_csv(&traj, &dir.join("ground_truth.csv"))?;
            println!("{}", manifest.display());
        }
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| io_failure(path, e))
}

/// File-name-safe version of a group name.
fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}
