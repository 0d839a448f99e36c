use kepler_core::expr::{parse, BinaryOp};
use kepler_core::search::{self, Dataset, ParetoArchive, ParetoEntry, SearchConfig};

fn dataset(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Dataset {
    let xs: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let ys = xs.iter().map(|&x| f(x)).collect();
    Dataset::new(vec![xs], ys).unwrap()
}

/// Best rmse over the archive, measured on a grid offset from the training one.
fn fresh_rmse(archive: &ParetoArchive, f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let fresh = dataset(&f, lo + 0.0037, hi - 0.0041, 257);
    archive
        .entries()
        .iter()
        .map(|e| search::rmse(&e.expr, &fresh))
        .fold(f64::INFINITY, f64::min)
}

fn recover(f: impl Fn(f64) -> f64 + Copy, lo: f64, hi: f64, iterations: usize, seed: u64) -> f64 {
    let data = dataset(f, lo, hi, 200);
    let cfg = SearchConfig {
        iterations,
        seed,
        ..SearchConfig::default()
    };
    let out = search::search(&data, &cfg).unwrap();
    fresh_rmse(&out.archive, f, lo, hi)
}

#[test]
fn recovers_a_constant() {
    assert!(recover(|_| 2.75, 0.0, 3.0, 2_000, 1) < 1e-8);
}

#[test]
fn recovers_a_proportion() {
    assert!(recover(|x| 1.7 * x, 0.0, 3.0, 5_000, 2) < 1e-8);
}

#[test]
fn recovers_an_inverse_cube() {
    assert!(recover(|x| 2.96e-4 / (x * x * x), 1.35, 1.7, 30_000, 3) < 1e-8);
}

#[test]
fn recovers_a_conic() {
    let conic = |x: f64| 1.51 / (1.0 + 0.0934 * (x + 0.5445).cos());
    assert!(recover(conic, 0.0, std::f64::consts::TAU, 100_000, 4) < 1e-8);
}

#[test]
fn chain_best_never_worsens_without_polish() {
    let data = dataset(|x| (x * 0.7).cos() + 0.3 * x, 0.0, 4.0, 80);
    let cfg = SearchConfig {
        iterations: 8_000,
        polish: false,
        log_every: 200,
        seed: 6,
        ..SearchConfig::default()
    };
    let out = search::search(&data, &cfg).unwrap();
    assert!(out.progress.len() >= 10);
    for w in out.progress.windows(2) {
        assert!(w[1].best_rmse <= w[0].best_rmse, "{:?} then {:?}", w[0], w[1]);
        assert!(w[1].iteration > w[0].iteration);
    }
    let entries = out.archive.entries();
    for w in entries.windows(2) {
        assert!(w[0].size < w[1].size && w[0].rmse > w[1].rmse);
    }
    let best = entries.iter().map(|e| e.rmse).fold(f64::INFINITY, f64::min);
    assert!(best <= out.progress.last().unwrap().best_rmse);
}

#[test]
fn one_worker_runs_are_reproducible() {
    let data = dataset(|x| 0.5 / (1.2 + x * x), -2.0, 2.0, 60);
    let cfg = SearchConfig {
        iterations: 4_000,
        seed: 17,
        workers: 1,
        ..SearchConfig::default()
    };
    let a = search::search(&data, &cfg).unwrap();
    let b = search::search(&data, &cfg).unwrap();
    assert_eq!(a.archive.to_csv(), b.archive.to_csv());
    assert_eq!(a.progress_csv(), b.progress_csv());
    let c = search::search(&data, &SearchConfig { seed: 18, ..cfg }).unwrap();
    assert_ne!(a.progress_csv(), c.progress_csv());
}

#[test]
fn archive_csv_round_trips() {
    let data = dataset(|x| 3.0 * x - 1.0, 0.0, 1.0, 30);
    let cfg = SearchConfig {
        iterations: 2_000,
        ..SearchConfig::default()
    };
    let out = search::search(&data, &cfg).unwrap();
    let back = ParetoArchive::from_csv(&out.archive.to_csv()).unwrap();
    assert_eq!(back.to_csv(), out.archive.to_csv());
    assert_eq!(back.len(), out.archive.len());
}

#[test]
fn sweep_drops_dead_branches() {
    let data = dataset(|x| 2.0 * x + 1.0, 0.0, 2.0, 50);
    let bloated = parse("2*x0 + 1 + 0.0001*cos(x0*x0 + 3)").unwrap();
    let mut archive = ParetoArchive::new();
    archive.insert(ParetoEntry::new(bloated.clone(), search::rmse(&bloated, &data)));
    let cfg = SearchConfig {
        polish_steps: 100,
        ..SearchConfig::default()
    };
    search::sweep_archive(&mut archive, &data, &data, &cfg);
    let small = archive
        .entries()
        .iter()
        .find(|e| e.size < bloated.size() && e.rmse < 1e-10)
        .expect("an exact smaller law");
    assert!(small.size <= 5, "{}", small.expr);
}

#[test]
fn sweep_reaches_a_reciprocal_by_wrapping() {
    let conic = |x: f64| 1.51 / (1.0 + 0.0934 * (x + 0.5445).cos());
    let data = dataset(conic, 0.0, std::f64::consts::TAU, 120);
    let shifted = parse("1.51 - 0.14*cos(x0 + 0.54)").unwrap();
    let mut archive = ParetoArchive::new();
    archive.insert(ParetoEntry::new(shifted.clone(), search::rmse(&shifted, &data)));
    search::sweep_archive(&mut archive, &data, &data, &SearchConfig::default());
    assert!(archive.entries().iter().any(|e| e.rmse < 1e-10), "{:?}", archive.entries());

    let no_div = SearchConfig {
        binary_ops: vec![BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul],
        ..SearchConfig::default()
    };
    let mut archive = ParetoArchive::new();
    archive.insert(ParetoEntry::new(shifted.clone(), search::rmse(&shifted, &data)));
    search::sweep_archive(&mut archive, &data, &data, &no_div);
    assert!(archive.entries().iter().all(|e| !e.expr.to_string().contains('/')));
}
