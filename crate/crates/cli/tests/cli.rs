use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn arcsync(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arcsync"))
        .args(args)
        .env("ARCSYNC_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

/// A straight 1 m line walked at constant speed in `n` samples.
fn uniform_line(n: usize) -> String {
    let mut s = String::from("t,x0,x1\n");
    for i in 0..n {
        let u = i as f64 / (n - 1) as f64;
        s.push_str(&format!("{},{},0\n", u * 2.0, u));
    }
    s
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn filter_samples_at_fixed_spacing() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "line.csv", &uniform_line(101));
    let out = dir.path().join("ss.csv");
    let run = arcsync(&[
        "filter",
        "--in",
        p(&input),
        "--delta",
        "0.25",
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("s,t,x0,x1"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 5);
    for (k, r) in rows.iter().enumerate() {
        let s = 0.25 * k as f64;
        assert!((r[0] - s).abs() < 1e-12);
        assert!((r[1] - 2.0 * s).abs() < 1e-12, "constant speed 0.5 m/s");
        assert!((r[2] - s).abs() < 1e-12 && r[3] == 0.0);
    }
}

#[test]
fn filter_reports_usage_and_degenerate_errors() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "line.csv", &uniform_line(11));
    let out = dir.path().join("ss.csv");
    assert_eq!(
        code(&arcsync(&["filter", "--in", p(&input), "--out", p(&out)])),
        2
    );
    assert_eq!(
        code(&arcsync(&[
            "filter",
            "--in",
            p(&input),
            "--delta",
            "-1",
            "--out",
            p(&out)
        ])),
        2
    );

    let still = write(dir.path(), "still.csv", "t,x0,x1\n0,1,1\n1,1,1\n2,1,1\n");
    let run = arcsync(&[
        "filter",
        "--in",
        p(&still),
        "--delta",
        "0.1",
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&run), 4);

    let missing = dir.path().join("nope.csv");
    let run = arcsync(&[
        "filter",
        "--in",
        p(&missing),
        "--delta",
        "0.1",
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&run), 3);
    assert!(String::from_utf8_lossy(&run.stderr).contains("nope.csv"));

    let backwards = write(dir.path(), "back.csv", "t,x0\n0,0\n1,1\n0.5,2\n");
    let run = arcsync(&[
        "filter",
        "--in",
        p(&backwards),
        "--delta",
        "0.1",
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&run), 3);
    assert!(String::from_utf8_lossy(&run.stderr).contains("back.csv"));
}

#[test]
fn optimize_delta_is_deterministic_and_validates_tolerance() {
    let dir = TempDir::new().unwrap();
    let mut text = String::from("t,x0,x1\n");
    for i in 0..400 {
        let u = i as f64 / 399.0;
        text.push_str(&format!(
            "{},{},{}\n",
            u * 4.0,
            0.4 * u,
            0.05 * (12.0 * u).sin()
        ));
    }
    let input = write(dir.path(), "sine.csv", &text);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let run = arcsync(&[
            "optimize-delta",
            "--in",
            p(&input),
            "--dh-star",
            "0.004",
            "--out",
            p(out),
        ]);
        assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    }
    let report = fs::read_to_string(&a).unwrap();
    assert_eq!(report, fs::read_to_string(&b).unwrap());
    let json: serde_json::Value = serde_json::from_str(&report).unwrap();
    let achieved = json["achieved"].as_f64().unwrap();
    assert!(achieved <= 0.004 && achieved > 0.0);

    let run = arcsync(&[
        "optimize-delta",
        "--in",
        p(&input),
        "--dh-star",
        "0.004",
        "--dh-tol",
        "0.004",
        "--out",
        p(&a),
    ]);
    assert_eq!(code(&run), 2);
}

fn identical_group(dir: &Path, name: &str) -> PathBuf {
    let group = dir.join(name);
    fs::create_dir_all(&group).unwrap();
    let mut demos = Vec::new();
    for i in 0..4 {
        let file = format!("demo_{i:03}.csv");
        fs::write(group.join(&file), uniform_line(50)).unwrap();
        demos.push(serde_json::json!({"file": file, "samples": 50, "duration": 2.0}));
    }
    let manifest = serde_json::json!({"name": name, "dimension": 2, "demos": demos});
    let path = group.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap()).unwrap();
    path
}

fn metrics_rows(dir: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(dir.join("metrics.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("group,domain,method,rho,entropy,sncsd,l2")
    );
    lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn evaluate_identical_demos_is_perfectly_synchronous() {
    let dir = TempDir::new().unwrap();
    let manifest = identical_group(dir.path(), "same");
    for method in ["euc", "dba", "gmr"] {
        for domain in ["time", "arclength"] {
            let out = dir.path().join(format!("out-{method}-{domain}"));
            let mut args = vec![
                "evaluate",
                "--manifest",
                p(&manifest),
                "--domain",
                domain,
                "--method",
                method,
                "--resample",
                "50",
                "--out",
                p(&out),
            ];
            if method == "gmr" {
                args.extend(["--G", "2"]);
            }
            let run = arcsync(&args);
            assert_eq!(
                code(&run),
                0,
                "{method}/{domain}: {}",
                String::from_utf8_lossy(&run.stderr)
            );
            let rows = metrics_rows(&out);
            assert_eq!(rows.len(), 1);
            assert_eq!(rows[0][0], "same");
            let l2: f64 = rows[0][6].parse().unwrap();
            if method == "gmr" {
                // regression, not interpolation: near zero over 4 demos x 50 samples
                assert!(l2 < 1e-2, "{method}/{domain}: {l2}");
            } else {
                assert_eq!(l2, 0.0, "{method}/{domain}");
            }
            let sncsd: f64 = rows[0][5].parse().unwrap();
            assert!((sncsd - 1.0).abs() < 1e-12);
            assert!(out.join("barycenter_same.csv").exists());
        }
    }
}

#[test]
fn evaluate_rejects_bad_arguments() {
    let dir = TempDir::new().unwrap();
    let manifest = identical_group(dir.path(), "same");
    let out = dir.path().join("out");
    let base = ["evaluate", "--manifest", p(&manifest), "--out", p(&out)];
    let with = |extra: &[&str]| {
        let mut args = base.to_vec();
        args.extend_from_slice(extra);
        code(&arcsync(&args))
    };
    assert_eq!(with(&["--method", "median"]), 2);
    assert_eq!(with(&["--method", "euc", "--G", "3"]), 2);
    assert_eq!(
        with(&["--domain", "time", "--method", "euc", "--delta", "0.01"]),
        2
    );
    assert_eq!(with(&["--method", "euc", "--sweep-reference"]), 2);
    let broken = write(dir.path(), "broken.json", "{ not json");
    assert_eq!(
        code(&arcsync(&[
            "evaluate",
            "--manifest",
            p(&broken),
            "--out",
            p(&out)
        ])),
        3
    );
}

#[test]
fn generate_then_evaluate_with_sweeps() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("data");
    let run = arcsync(&[
        "generate",
        "--shape",
        "sine",
        "--seed",
        "3",
        "--noise",
        "0.0002",
        "--out",
        p(&data),
    ]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let manifest = data.join("sine-0").join("manifest.json");
    let gt = data.join("sine-0").join("ground_truth.csv");
    assert!(manifest.exists() && gt.exists());
    let again = arcsync(&[
        "generate",
        "--shape",
        "sine",
        "--seed",
        "3",
        "--out",
        p(&data),
    ]);
    assert_eq!(code(&again), 2, "refuses to overwrite without --overwrite");
    assert_eq!(
        code(&arcsync(&[
            "generate",
            "--shape",
            "blob",
            "--out",
            p(&dir.path().join("x"))
        ])),
        2
    );

    let out = dir.path().join("eval");
    let run = arcsync(&[
        "evaluate",
        "--manifest",
        p(&manifest),
        "--domain",
        "time",
        "--aligner",
        "dtw",
        "--method",
        "gmr",
        "--resample",
        "80",
        "--ground-truth",
        p(&gt),
        "--sweep-reference",
        "--sweep-g",
        "2,3",
        "--plots",
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let refs = fs::read_to_string(out.join("reference_sensitivity.csv")).unwrap();
    assert_eq!(refs.lines().count(), 1 + 6);
    let sweep = fs::read_to_string(out.join("gmm_sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 1 + 2);
    let quality = fs::read_to_string(out.join("quality.csv")).unwrap();
    assert!(quality.starts_with("group,d_h,d_dtw\n"));
    for svg in [
        "barycenter_sine-0.svg",
        "reference_sensitivity.svg",
        "gmm_sweep.svg",
    ] {
        let text = fs::read_to_string(out.join(svg)).unwrap();
        assert!(text.starts_with("<svg"), "{svg}");
    }
}

#[test]
fn benchmark_writes_table() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("bench.csv");
    let run = arcsync(&[
        "benchmark",
        "--sizes",
        "32,64",
        "--repeats",
        "1",
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("method,complexity,size,repeats,median_s,mean_s,std_s")
    );
    assert_eq!(lines.count(), 10);
    assert_eq!(
        code(&arcsync(&[
            "benchmark",
            "--sizes",
            "64,32",
            "--out",
            p(&out)
        ])),
        2
    );
}

#[test]
fn thread_variable_is_validated() {
    let run = Command::new(env!("CARGO_BIN_EXE_arcsync"))
        .args([
            "benchmark",
            "--sizes",
            "8",
            "--repeats",
            "1",
            "--out",
            "/dev/null",
        ])
        .env("ARCSYNC_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(2));
}
