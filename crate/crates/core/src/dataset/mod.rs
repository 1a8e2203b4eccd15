//! Demonstration-set persistence (CSV per demo plus a JSON manifest) and a synthetic
//! generator for same-path, differently-timed recordings.

mod synthetic;

pub use synthetic::{
    generate_synthetic, ground_truth, sample_polyline, synthetic_group, Pause, Shape, TimingSpec,
    SYNTHETIC_DEMOS_PER_GROUP,
};

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::trajectory::{ArcLengthPath, DemonstrationSet, Points, Trajectory};

/// File name written by [`save_dataset`].
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemoEntry {
    /// Path of the demo CSV, relative to the manifest's directory.
    pub file: String,
    pub samples: usize,
    /// Time span of the demo in seconds.
    pub duration: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: String,
    pub dimension: usize,
    pub demos: Vec<DemoEntry>,
}

/// CSV header for a demo of dimension `dim`: `t,x0,...,x{dim-1}`.
pub fn csv_header(dim: usize) -> Vec<String> {
    std::iter::once("t".to_string())
        .chain((0..dim).map(|i| format!("x{i}")))
        .collect()
}

/// Loads the set described by the manifest at `manifest_path`.
pub fn load_dataset<T: Scalar>(manifest_path: &Path) -> Result<DemonstrationSet<T>> {
    let text = fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let manifest: DatasetManifest = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: manifest_path.to_path_buf(),
        source,
    })?;
    if manifest.demos.is_empty() {
        return Err(Error::invalid(format!(
            "{}: manifest lists no demos",
            manifest_path.display()
        )));
    }
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let demos = manifest
        .demos
        .iter()
        .map(|entry| {
            let path = base.join(&entry.file);
            let traj = read_demo_csv::<T>(&path, manifest.dimension)?;
            if traj.len() != entry.samples {
                return Err(Error::invalid(format!(
                    "{}: manifest lists {} samples, file has {}",
                    path.display(),
                    entry.samples,
                    traj.len()
                )));
            }
            Ok(traj)
        })
        .collect::<Result<Vec<_>>>()?;
    DemonstrationSet::new(manifest.name, demos)
}

/// Writes one CSV per demo plus [`MANIFEST_FILE`] into `dir` and returns the manifest path.
///
/// `dir` is created if needed. An existing manifest is only replaced when `overwrite`
/// is set. Values are written with 17 significant digits, so a reload is bit-exact.
pub fn save_dataset<T: Scalar>(
    set: &DemonstrationSet<T>,
    dir: &Path,
    overwrite: bool,
) -> Result<PathBuf> {
    if set.name.trim().is_empty() {
        return Err(Error::invalid("dataset name must not be empty"));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let manifest_path = dir.join(MANIFEST_FILE);
    if manifest_path.exists() && !overwrite {
        return Err(Error::invalid(format!(
            "{} already exists; pass overwrite to replace it",
            manifest_path.display()
        )));
    }
    let mut entries = Vec::with_capacity(set.len());
    for (i, demo) in set.demos().iter().enumerate() {
        let file = format!("demo_{i:03}.csv");
        write_demo_csv(demo, &dir.join(&file))?;
        entries.push(DemoEntry {
            file,
            samples: demo.len(),
            duration: demo.duration().to_f64_lossy(),
        });
    }
    let manifest = DatasetManifest {
        name: set.name.clone(),
        dimension: set.dim(),
        demos: entries,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|source| Error::Json {
        path: manifest_path.clone(),
        source,
    })?;
    fs::write(&manifest_path, json + "\n").map_err(|e| Error::io(&manifest_path, e))?;
    Ok(manifest_path)
}

/// Writes `t,x0,...` rows for one demo.
pub fn write_demo_csv<T: Scalar>(traj: &Trajectory<T>, path: &Path) -> Result<()> {
    let rows = traj
        .times()
        .iter()
        .zip(traj.points().rows())
        .map(|(&t, p)| std::iter::once(t).chain(p.iter().copied()).collect());
    write_rows(path, &csv_header(traj.dim()), rows)
}

/// Reads one demo CSV, taking the point dimension from its header.
pub fn load_demo_csv<T: Scalar>(path: &Path) -> Result<Trajectory<T>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let columns = r.headers().map_err(|e| csv_error(path, e))?.len();
    if columns < 2 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "header needs a time column and at least one coordinate".into(),
        });
    }
    drop(r);
    read_demo_csv(path, columns - 1)
}

/// Writes a spatially sampled path as `s,t,x0,...` rows.
pub fn write_path_csv<T: Scalar>(path: &ArcLengthPath<T>, file: &Path) -> Result<()> {
    let mut header = vec!["s".to_string()];
    header.extend(csv_header(path.points.dim()));
    let rows = path
        .s
        .iter()
        .zip(&path.t)
        .zip(path.points.rows())
        .map(|((&s, &t), p)| {
            std::iter::once(s)
                .chain(std::iter::once(t))
                .chain(p.iter().copied())
                .collect()
        });
    write_rows(file, &header, rows)
}

/// Writes `points` as `{param},x0,...` rows, one parameter value per point.
pub fn write_curve_csv<T: Scalar>(
    param: &str,
    params: &[T],
    points: &Points<T>,
    file: &Path,
) -> Result<()> {
    if params.len() != points.len() {
        return Err(Error::invalid("one parameter value per point is required"));
    }
    let mut header = vec![param.to_string()];
    header.extend((0..points.dim()).map(|i| format!("x{i}")));
    let rows = params
        .iter()
        .zip(points.rows())
        .map(|(&u, p)| std::iter::once(u).chain(p.iter().copied()).collect());
    write_rows(file, &header, rows)
}

fn write_rows<T: Scalar>(
    file: &Path,
    header: &[String],
    rows: impl Iterator<Item = Vec<T>>,
) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(file)
        .map_err(|e| csv_error(file, e))?;
    w.write_record(header).map_err(|e| csv_error(file, e))?;
    for row in rows {
        w.write_record(row.iter().map(|v| format!("{v:.16e}")))
            .map_err(|e| csv_error(file, e))?;
    }
    w.flush().map_err(|e| Error::io(file, e))
}

/// Reads one demo CSV; `dim` is the expected point dimension.
///
/// Errors cite the 1-based file line (the header is line 1).
pub fn read_demo_csv<T: Scalar>(path: &Path, dim: usize) -> Result<Trajectory<T>> {
    let parse = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let expected = csv_header(dim);
    let header = r.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(parse(
            1,
            format!(
                "expected header {:?}, found {:?}",
                expected.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let mut times: Vec<T> = Vec::new();
    let mut data: Vec<T> = Vec::new();
    for record in r.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let mut values = record.iter().enumerate().map(|(col, field)| {
            field
                .trim()
                .parse::<T>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    parse(
                        line,
                        format!("column {}: {field:?} is not a finite number", col + 1),
                    )
                })
        });
        let t = values
            .next()
            .ok_or_else(|| parse(line, "empty row".into()))??;
        if let Some(&prev) = times.last() {
            if !(t > prev) {
                return Err(parse(
                    line,
                    format!("time {t} does not increase (previous {prev})"),
                ));
            }
        }
        times.push(t);
        for v in values {
            data.push(v?);
        }
    }
    let points = Points::new(dim, data).map_err(|e| parse(0, e.to_string()))?;
    Trajectory::new(times, points).map_err(|e| parse(0, e.to_string()))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("row has {len} fields, expected {expected_len}"),
        },
        other => Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("{other:?}"),
        },
    }
}
