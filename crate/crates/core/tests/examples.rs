use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use arcsync::barycenter::{
    dba, euclidean_barycenter, fit_gmm, gmr, medoid, soft_dtw_barycenter, SoftBarycenterOptions,
};
use arcsync::dtw::{soft_dtw_value, LocalCost};
use arcsync::sampling::{retime, spatial_sample, FeedRate};
use arcsync::{Points64, Trajectory64};

#[test]
fn euclidean_barycenter_is_the_per_index_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let set: Vec<Points64> = (0..5)
        .map(|_| {
            let rows: Vec<[f64; 3]> = (0..40).map(|_| [rng.gen(), rng.gen(), rng.gen()]).collect();
            Points64::from_rows(rows.iter()).unwrap()
        })
        .collect();
    let bary = euclidean_barycenter(&set).unwrap();
    for i in 0..40 {
        for c in 0..3 {
            let mut sum = 0.0;
            for p in &set {
                sum += p.row(i)[c];
            }
            assert!((bary.curve.row(i)[c] - sum / 5.0).abs() < 1e-12);
        }
    }
}

#[test]
fn dba_never_does_worse_than_the_medoid() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let set: Vec<Points64> = (0..4)
        .map(|k| {
            let shift = 3.0 + k as f64;
            Points64::from_scalars(
                (0..30)
                    .map(|i| ((i as f64 - shift) / 4.0).tanh() + 0.05 * rng.gen::<f64>())
                    .collect(),
            )
        })
        .collect();
    let objective = |z: &Points64| -> f64 {
        set.iter()
            .map(|x| {
                arcsync::dtw::dtw_with_cost(z, x, None, LocalCost::SquaredEuclidean)
                    .unwrap()
                    .distance
            })
            .sum()
    };
    let m = medoid(&set).unwrap();
    // the medoid minimizes the summed cost among the members themselves
    let member_costs: Vec<f64> = set.iter().map(&objective).collect();
    let best = member_costs.iter().cloned().fold(f64::INFINITY, f64::min);
    assert_eq!(member_costs[m], best);
    let result = dba(&set, None, 20).unwrap();
    assert!(objective(&result.curve) <= best + 1e-12);
}

#[test]
fn soft_barycenter_of_offset_constants_matches_grid_search() {
    let set = vec![
        Points64::from_scalars(vec![0.0; 3]),
        Points64::from_scalars(vec![2.0; 3]),
    ];
    let opts = SoftBarycenterOptions::new(1.0, 3);
    let result = soft_dtw_barycenter(&set, &opts).unwrap();
    let objective = |c: f64| -> f64 {
        set.iter()
            .map(|x| soft_dtw_value(&Points64::from_scalars(vec![c; 3]), x, 1.0).unwrap())
            .sum()
    };
    let (best_c, _) = (0..=2000)
        .map(|i| i as f64 / 1000.0)
        .map(|c| (c, objective(c)))
        .fold(
            (0.0, f64::INFINITY),
            |acc, x| if x.1 < acc.1 { x } else { acc },
        );
    assert!((best_c - 1.0).abs() <= 1e-3);
    for v in result.curve.as_slice() {
        assert!((v - 1.0).abs() < 1e-3, "{v}");
    }
}

#[test]
fn separated_clusters_recover_their_means() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut rows = Vec::new();
    for centre in [-10.0, 10.0] {
        for _ in 0..100 {
            rows.push([
                centre + rng.gen_range(-1.0..1.0),
                centre + rng.gen_range(-1.0..1.0),
            ]);
        }
    }
    let cluster_mean = |lo: usize| -> [f64; 2] {
        let mut m = [0.0; 2];
        for r in &rows[lo..lo + 100] {
            m[0] += r[0] / 100.0;
            m[1] += r[1] / 100.0;
        }
        m
    };
    let expected = [cluster_mean(0), cluster_mean(100)];
    let fit = fit_gmm(&Points64::from_rows(rows.iter()).unwrap(), 2, 9).unwrap();
    let mut means = fit.model.means.clone();
    means.sort_by(|a, b| a[0].total_cmp(&b[0]));
    for (m, e) in means.iter().zip(&expected) {
        assert!(
            (m[0] - e[0]).abs() < 1e-3 && (m[1] - e[1]).abs() < 1e-3,
            "{m:?} vs {e:?}"
        );
    }
    for w in &fit.model.weights {
        assert!((w - 0.5).abs() < 1e-9);
    }
}

#[test]
fn regression_on_a_noiseless_line_is_the_line() {
    let rows: Vec<[f64; 2]> = (0..101)
        .map(|i| i as f64 / 100.0)
        .map(|x| [x, 2.0 * x])
        .collect();
    let data = Points64::from_rows(rows.iter()).unwrap();
    let queries: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    for g in [1, 3] {
        let fit = fit_gmm(&data, g, 4).unwrap();
        let out = gmr(&fit.model, &Points64::from_scalars(queries.clone())).unwrap();
        for (x, y) in queries.iter().zip(out.barycenter.curve.as_slice()) {
            assert!((y - 2.0 * x).abs() < 1e-4, "G={g}: gmr({x}) = {y}");
        }
    }
}

#[test]
fn retiming_with_the_recovered_feed_reproduces_positions() {
    // A corner path walked with a slow-down and a pause, sampled at 100 Hz.
    let mut times = Vec::new();
    let mut rows = Vec::new();
    for i in 0..=500 {
        let t = i as f64 / 100.0;
        let u = match t {
            t if t < 2.0 => 0.5 * t,
            t if t < 2.5 => 1.0,
            t => 1.0 + (t - 2.5) * 0.4,
        };
        times.push(t);
        rows.push(if u <= 1.0 { [u, 0.0] } else { [1.0, u - 1.0] });
    }
    let traj = Trajectory64::new(times.clone(), Points64::from_rows(rows.iter()).unwrap()).unwrap();
    for delta in [0.01, 0.05] {
        let path = spatial_sample(&traj, delta, false).unwrap();
        let feed = FeedRate::from_path(&path).unwrap();
        let replay = retime(&path, &feed, 0.01).unwrap();
        let t0 = path.t[0];
        for (t, p) in replay.times().iter().zip(replay.points().rows()) {
            let i = ((t - t0) * 100.0).round() as usize;
            assert!((times[i] - t).abs() < 1e-9);
            let d = ((p[0] - rows[i][0]).powi(2) + (p[1] - rows[i][1]).powi(2)).sqrt();
            assert!(d <= 2.0 * delta, "delta {delta}, t {t}: off by {d}");
        }
    }
}
