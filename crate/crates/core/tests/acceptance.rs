//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero when a criterion fails that is not listed in `KNOWN_RED`.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::Instant;

use kepler_core::augment;
use kepler_core::ephemeris::{self, NormalizedSample};
use kepler_core::expr::{Expr, Parser};
use kepler_core::interpret::{self, ConicFit};
use kepler_core::neural::NetworkModel;
use kepler_core::oracle::{self, OrbitSpec, SynthConfig};
use kepler_core::pipeline::{self, PipelineConfig, PipelineOutput, SECOND_LAW_POWERS};
use kepler_core::search::{self, ParetoArchive, ParetoEntry, SearchConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0;
const KEPLER_ECCENTRICITY: f64 = 0.09264;
const PHASE: f64 = 0.544536;
const GM: f64 = 2.96e-4;
const THIRD_LAW: f64 = 7.495e-6;

/// Criteria that fail for a reason analysed in the project notes. They are
/// still evaluated and printed as FAIL.
const KNOWN_RED: [usize; 2] = [4, 9];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn rel(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs()
}

fn log(line: &str) {
    eprintln!("[acceptance] {line}");
}

fn main() -> ExitCode {
    let start = Instant::now();
    let obs = ephemeris::tycho_mars();
    let config = PipelineConfig::with_seed(SEED);
    let mut out = PipelineOutput::default();
    let run = pipeline::run(&config, &obs, &mut out, log);
    if let Err(e) = &run {
        log(&format!("pipeline failed: {e}"));
    }

    let verdicts = [
        eccentricity(&out, &config),
        perihelion(&out),
        first_law_knee(&out),
        power_law(&out),
        third_law(&out),
        network_fit(&out),
        sizes(),
        knee_selection(),
        oracle_properties(&config),
        archive_streams(),
        areal_velocity(&out),
    ];

    let mut unexpected = 0;
    for (i, v) in verdicts.iter().enumerate() {
        let n = i + 1;
        let known = KNOWN_RED.contains(&n);
        let tag = match (v.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        if !v.pass && !known {
            unexpected += 1;
        }
        println!("criterion {n:>2}: {tag:<12} {}", v.detail);
    }
    let passed = verdicts.iter().filter(|v| v.pass).count();
    println!(
        "acceptance: {passed}/{} pass, {unexpected} unexpected failures, {:.0?}",
        verdicts.len(),
        start.elapsed()
    );
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn conic(out: &PipelineOutput) -> Option<ConicFit> {
    out.interpretation.as_ref()?.conic
}

fn eccentricity(out: &PipelineOutput, config: &PipelineConfig) -> Verdict {
    let Some(fit) = conic(out) else {
        return verdict(false, "no conic in the pipeline output".into());
    };
    let in_band = (0.088..=0.098).contains(&fit.eps);
    let err = rel(fit.eps, KEPLER_ECCENTRICITY);

    let (Some(samples), Some(first)) = (&out.r_augmented, &out.first_law) else {
        return verdict(false, "pipeline stopped before the first search".into());
    };
    let data = pipeline::series_dataset(samples, "theta").expect("augmented samples");
    let mut seed_eps = Vec::new();
    let pipeline_seed = config.first_law.seed;
    for k in 0..5 {
        let seed = pipeline_seed + k;
        let eps = if k == 0 {
            interpret::to_standard_conic(&first.expr).ok().map(|c| c.eps)
        } else {
            let cfg = SearchConfig {
                seed,
                ..config.first_law.clone()
            };
            search::search(&data, &cfg).ok().and_then(|o| {
                let knee = search::select(o.archive.entries()).ok()?.clone();
                interpret::to_standard_conic(&knee.expr).ok().map(|c| c.eps)
            })
        };
        log(&format!("first-law search seed {seed}: eps {eps:?}"));
        seed_eps.push(eps);
    }
    let close = seed_eps
        .iter()
        .flatten()
        .filter(|&&e| rel(e, KEPLER_ECCENTRICITY) < 0.01)
        .count();
    verdict(
        in_band && err < 0.03 && close >= 1,
        format!(
            "eps {:.6}, {:.2}% from {KEPLER_ECCENTRICITY}; {close}/5 search seeds within 1%",
            fit.eps,
            100.0 * err
        ),
    )
}

fn perihelion(out: &PipelineOutput) -> Verdict {
    let Some(fit) = conic(out) else {
        return verdict(false, "no conic in the pipeline output".into());
    };
    let days = interpret::perihelion_season(&fit, 365.0).days_before_equinox;
    verdict(
        (fit.phi0.abs() - PHASE).abs() <= 0.035 && (25.0..=40.0).contains(&days),
        format!("phi0 {:.6} rad, perihelion {days:.1} days before the fall equinox", fit.phi0),
    )
}

fn first_law_knee(out: &PipelineOutput) -> Verdict {
    let Some(knee) = &out.first_law else {
        return verdict(false, "no first-law knee".into());
    };
    let conic = interpret::to_standard_conic(&knee.expr);
    verdict(
        conic.is_ok() && knee.rmse <= 5e-4,
        format!(
            "size {} rmse {:.3e}, conic: {}",
            knee.size,
            knee.rmse,
            if conic.is_ok() { "yes" } else { "no" }
        ),
    )
}

fn power_law(out: &PipelineOutput) -> Verdict {
    let Some(knee) = &out.second_law else {
        return verdict(false, "no second-law knee".into());
    };
    let names: Vec<String> = pipeline::SECOND_LAW_FEATURES.iter().map(|s| s.to_string()).collect();
    let law = interpret::power_law_from_expr(&knee.expr, &SECOND_LAW_POWERS);
    let detail = format!(
        "knee `{}` (size {}, rmse {:.3e})",
        knee.expr.display_with(&names),
        knee.size,
        knee.rmse
    );
    match law {
        Some(l) if l.exponent == -3 => verdict(
            rel(l.c, GM) < 0.02,
            format!("{detail}: c {:.5e}, {:.2}% from {GM}", l.c, 100.0 * rel(l.c, GM)),
        ),
        Some(l) => verdict(false, format!("{detail}: w2 = c*r^{} with c {:.5e}, not c/r^3", l.exponent, l.c)),
        None => verdict(false, format!("{detail}: not a power law")),
    }
}

fn third_law(out: &PipelineOutput) -> Verdict {
    let Some(c) = out.interpretation.as_ref().and_then(|i| i.headline_c()) else {
        return verdict(false, "no r^3 w^2 constant".into());
    };
    let k = c / (4.0 * PI * PI);
    verdict(
        rel(k, THIRD_LAW) < 0.02,
        format!("c/4pi^2 {k:.5e}, {:.2}% from {THIRD_LAW}", 100.0 * rel(k, THIRD_LAW)),
    )
}

fn network_fit(out: &PipelineOutput) -> Verdict {
    let (Some(r), Some(t)) = (&out.r_report, &out.theta_report) else {
        return verdict(false, "missing training reports".into());
    };
    let fits = r.train_mse <= 1e-6 && r.val_mse <= 1e-4 && t.train_mse <= 1e-6 && t.val_mse <= 1e-3;
    let worst = out
        .ingested
        .as_ref()
        .map(|ing| gradient_check(&ing.r_samples))
        .unwrap_or(f64::INFINITY);
    verdict(
        fits && worst <= 1e-4,
        format!(
            "r: train {:.2e} val {:.2e}; theta: train {:.2e} val {:.2e}; worst gradient rel err {worst:.1e}",
            r.train_mse, r.val_mse, t.train_mse, t.val_mse
        ),
    )
}

/// Largest relative gap between backpropagation and central differences
/// over every parameter of a default-width network.
fn gradient_check(samples: &[NormalizedSample]) -> f64 {
    let model = NetworkModel::new(&[1, 100, 100, 1], 11).expect("network");
    let (_, grad) = model.loss_and_gradient(samples);
    let params = model.parameters();
    let mut probe = model.clone();
    let mut p = params.clone();
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for (k, &g) in grad.iter().enumerate() {
        p[k] = params[k] + h;
        probe.set_parameters(&p);
        let up = probe.mse(samples);
        p[k] = params[k] - h;
        probe.set_parameters(&p);
        let down = probe.mse(samples);
        p[k] = params[k];
        let fd = (up - down) / (2.0 * h);
        worst = worst.max((fd - g).abs() / fd.abs().max(g.abs()).max(1e-7));
    }
    worst
}

fn sizes() -> Verdict {
    let theta = Parser::with_variables(&["theta"]);
    let r = Parser::with_variables(&["r", "r2", "r3"]);
    let rows: [(&Parser, usize, &str); 11] = [
        (&theta, 1, "1.54806"),
        (&theta, 5, "1.54329+0.0130577*theta"),
        (&theta, 7, "1.45537+0.021878*theta*theta"),
        (&theta, 10, "1.65411-0.321963/(1.21921+theta*theta)"),
        (&theta, 11, "1.51578-0.142019*cos(theta+0.542453)"),
        (&theta, 13, "1.51836 - 0.141285*cos(0.979081*(-0.544189-theta))"),
        (&theta, 14, "1.51977/(1.00625+0.0932972*cos(theta+0.544536))"),
        (&r, 1, "8.18954e-5"),
        (&r, 4, "0.000298491/r3"),
        (&r, 5, "0.000218591*(1.92033-r)"),
        (&r, 6, "-2.65592e-5+0.000390417/r3"),
    ];
    let wrong: Vec<String> = rows
        .iter()
        .filter_map(|(p, want, text)| {
            let got = p.parse(text).map(|e| e.size());
            (got.as_ref().ok() != Some(want)).then(|| format!("{text}: {got:?} != {want}"))
        })
        .collect();
    verdict(
        wrong.is_empty(),
        if wrong.is_empty() {
            format!("{} published sizes reproduced", rows.len())
        } else {
            wrong.join("; ")
        },
    )
}

fn entries(rows: &[(usize, f64)]) -> Vec<ParetoEntry> {
    rows.iter()
        .map(|&(size, rmse)| ParetoEntry {
            size,
            rmse,
            expr: Expr::constant(0.0),
        })
        .collect()
}

fn knee_selection() -> Verdict {
    let first = entries(&[
        (1, 0.088419),
        (5, 0.084370),
        (7, 0.045791),
        (8, 0.038594),
        (10, 0.031201),
        (11, 0.004519),
        (13, 0.003003),
        (14, 0.000136),
        (16, 0.000133),
        (18, 0.000124),
        (19, 0.000118),
        (21, 0.000060),
        (24, 0.000048),
        (26, 0.000034),
        (29, 0.000030),
    ]);
    let second = entries(&[
        (1, 0.000022),
        (4, 0.000006),
        (5, 0.000004),
        (6, 0.000003),
        (13, 0.000003),
        (16, 0.000002),
        (22, 0.000001),
    ]);
    let a = search::knee(&first).map(|e| e.size);
    let b = search::knee(&second).map(|e| e.size);
    verdict(
        matches!((&a, &b), (Ok(14), Ok(4))),
        format!("knees at sizes {a:?} and {b:?}"),
    )
}

fn oracle_properties(config: &PipelineConfig) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_angle: f64 = 0.0;
    let mut worst_time: f64 = 0.0;
    for eps in [0.0, 0.0934, 0.5, 0.9] {
        let spec = OrbitSpec { eps, ..OrbitSpec::MARS };
        for _ in 0..1000 {
            let theta = rng.random_range(0.0..TAU);
            let back = oracle::angle_of_time_default(oracle::time_of_angle(theta, &spec), &spec);
            worst_angle = worst_angle.max(back.map_or(f64::INFINITY, |b| (b - theta).abs()));
            let t = rng.random_range(0.0..spec.period);
            let back = oracle::angle_of_time_default(t, &spec).map(|a| oracle::time_of_angle(a, &spec));
            worst_time = worst_time.max(back.map_or(f64::INFINITY, |b| (b - t).abs() / spec.period));
        }
    }

    let spec = OrbitSpec::MARS;
    let h = 2e-3;
    let areal: Vec<f64> = (0..1000)
        .map(|i| {
            let t = spec.period * (i as f64 + 0.5) / 1000.0;
            let at = |t: f64| oracle::angle_of_time_default(t, &spec).unwrap_or(f64::NAN);
            let omega = (at(t + h) - at(t - h)) / (2.0 * h);
            let r = spec.radius(at(t));
            r * r * omega
        })
        .collect();
    let drift = areal.iter().map(|h| rel(*h, areal[0])).fold(0.0, f64::max);

    let synthetic = synthetic_eccentricity(&spec, config);
    let eps_err = synthetic.as_ref().map_or(f64::INFINITY, |e| rel(*e, spec.eps));
    verdict(
        worst_angle <= 1e-10 && worst_time <= 1e-10 && drift <= 1e-9 && eps_err <= 0.005,
        format!(
            "round trip {worst_angle:.1e} rad / {worst_time:.1e} T; r^2 w drift {drift:.1e}; synthetic {}",
            match &synthetic {
                Ok(e) => format!("eps {e:.6} ({:.3}% off)", 100.0 * eps_err),
                Err(why) => why.clone(),
            }
        ),
    )
}

/// First half of the pipeline on a noiseless oracle catalog.
fn synthetic_eccentricity(spec: &OrbitSpec, config: &PipelineConfig) -> Result<f64, String> {
    let catalog = oracle::synth_catalog(spec, &SynthConfig::default()).map_err(|e| e.to_string())?;
    let ing = pipeline::ingest(&catalog, spec.period).map_err(|e| e.to_string())?;
    let (model, report) = pipeline::fit_model(&ing.r_samples, ing.r_scaling, &config.r_training)
        .map_err(|e| e.to_string())?;
    log(&format!(
        "synthetic r(theta) fit: train {:.2e} val {:.2e}",
        report.train_mse, report.val_mse
    ));
    let samples = augment::augment(&model, config.r_samples, config.augment_seed);
    let data = pipeline::series_dataset(&samples, "theta").map_err(|e| e.to_string())?;
    let outcome = search::search(&data, &config.first_law).map_err(|e| e.to_string())?;
    let knee = search::select(outcome.archive.entries()).map_err(|e| e.to_string())?;
    log(&format!("synthetic knee: size {} rmse {:.3e} {}", knee.size, knee.rmse, knee.expr));
    interpret::to_standard_conic(&knee.expr)
        .map(|c| c.eps)
        .map_err(|_| format!("knee is not a conic (size {}, rmse {:.2e})", knee.size, knee.rmse))
}

fn archive_streams() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut mismatches = 0;
    for _ in 0..10_000 {
        let len = rng.random_range(0..40);
        let stream: Vec<(usize, f64)> = (0..len)
            .map(|_| {
                let size = rng.random_range(1..12);
                let rmse = match rng.random_range(0..20) {
                    0 => f64::NAN,
                    1 => f64::INFINITY,
                    _ => rng.random_range(0..8) as f64 * 0.125,
                };
                (size, rmse)
            })
            .collect();
        let mut archive = ParetoArchive::new();
        for (id, &(size, rmse)) in stream.iter().enumerate() {
            archive.insert(ParetoEntry {
                size,
                rmse,
                expr: Expr::constant(id as f64),
            });
        }
        let got: Vec<(usize, f64, usize)> = archive
            .entries()
            .iter()
            .map(|e| (e.size, e.rmse, e.expr.constants()[0] as usize))
            .collect();
        if got != brute_force_front(&stream) {
            mismatches += 1;
        }
    }
    verdict(
        mismatches == 0,
        format!("{mismatches} of 10000 random insert streams differ from the brute-force front"),
    )
}

/// Finite entries that nothing strictly dominates; among exact duplicates
/// the earliest survives.
fn brute_force_front(stream: &[(usize, f64)]) -> Vec<(usize, f64, usize)> {
    let finite = |r: f64| r.is_finite();
    let mut front: Vec<(usize, f64, usize)> = stream
        .iter()
        .enumerate()
        .filter(|&(i, &(s, r))| {
            finite(r)
                && !stream.iter().enumerate().any(|(j, &(s2, r2))| {
                    finite(r2)
                        && ((s2 <= s && r2 <= r && (s2 < s || r2 < r)) || (j < i && s2 == s && r2 == r))
                })
        })
        .map(|(i, &(s, r))| (s, r, i))
        .collect();
    front.sort_by_key(|e| e.0);
    front
}

fn areal_velocity(out: &PipelineOutput) -> Verdict {
    match out.interpretation.as_ref().and_then(|i| i.stats) {
        Some(s) => verdict(
            s.areal_dispersion < 0.02,
            format!(
                "r^2 w = {:.5e} with {:.3}% relative spread over {} points",
                s.areal_rate,
                100.0 * s.areal_dispersion,
                s.points
            ),
        ),
        None => verdict(false, "no kinematics statistics".into()),
    }
}
