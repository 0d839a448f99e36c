use std::fs;
use std::path::Path;

use kepler_core::augment::{self, KinematicsConfig};
use kepler_core::ephemeris::{self, Observation};
use kepler_core::expr::Parser;
use kepler_core::interpret::Interpretation;
use kepler_core::neural::{NetworkModel, TrainReport};
use kepler_core::oracle::{self, Noise, OrbitSpec, SynthConfig};
use kepler_core::pipeline::{self, PipelineConfig, PipelineOutput, SECOND_LAW_FEATURES};
use kepler_core::search::{self, Dataset, ParetoArchive, SearchOutcome};

use crate::settings::{read, Output, Settings};
use crate::{
    AugmentArgs, Cli, CliError, Command, FitArgs, IngestArgs, InterpretArgs, OracleArgs,
    PipelineArgs, SymregArgs,
};

/// Config keys that name files rather than pipeline settings.
const PATH_KEYS: [&str; 4] = ["catalog", "out", "r_model", "theta_model"];

pub fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let quiet = cli.quiet;
    let log = move |line: &str| {
        if !quiet {
            eprintln!("{line}");
        }
    };
    match &cli.command {
        Command::Ingest(a) => ingest(a, log),
        Command::FitNn(a) => fit_nn(a, log),
        Command::Augment(a) => augment_cmd(a, log),
        Command::Symreg(a) => symreg(a, log),
        Command::Interpret(a) => interpret_cmd(a),
        Command::Oracle(a) => oracle_cmd(a),
        Command::Pipeline(a) => pipeline_cmd(a, log),
    }
}

fn load_catalog(path: Option<&Path>) -> Result<Vec<Observation>, CliError> {
    match path {
        None => Ok(ephemeris::tycho_mars()),
        Some(p) => ephemeris::parse_catalog(&read(p)?)
            .map_err(|e| CliError::Data(format!("{}: {e}", p.display()))),
    }
}

/// Seed first (it resets every stage setting), then the file, then flags.
fn build_config(
    seed: Option<u64>,
    settings: &Settings,
    overrides: &[(String, String)],
) -> Result<PipelineConfig, CliError> {
    let seed = match seed {
        Some(s) => s,
        None => match settings.get("seed") {
            Some(v) => v
                .parse()
                .map_err(|_| CliError::Data(format!("bad seed {v:?}")))?,
            None => 0,
        },
    };
    let mut cfg = PipelineConfig::with_seed(seed);
    for (k, v) in settings.entries.iter().chain(overrides) {
        if k == "seed" || PATH_KEYS.contains(&k.as_str()) {
            continue;
        }
        cfg.set(k, v)?;
    }
    Ok(cfg)
}

fn pair(key: &str, value: Option<impl ToString>) -> Option<(String, String)> {
    value.map(|v| (key.to_string(), v.to_string()))
}

fn ingest(a: &IngestArgs, log: impl Fn(&str)) -> Result<(), CliError> {
    let obs = load_catalog(a.catalog.as_deref())?;
    let ing = pipeline::ingest(&obs, a.period_days)?;
    let mut out = Output::create(&a.out)?;
    write_ingested(&mut out, &ing, obs.len())?;
    log(&format!("ingest: {} observations, {} warnings", obs.len(), ing.warnings.len()));
    out.finish("ingest", &format!("period_days={}\n", a.period_days))
}

fn write_ingested(out: &mut Output, ing: &pipeline::Ingested, rows: usize) -> Result<(), CliError> {
    out.write("r_of_theta.csv", &ephemeris::normalized_csv(&ing.r_samples, &ing.r_scaling))?;
    out.write(
        "theta_of_t.csv",
        &ephemeris::normalized_csv(&ing.theta_samples, &ing.theta_scaling),
    )?;
    let mut summary = format!("observations={rows}\nwarnings={}\n", ing.warnings.len());
    for w in &ing.warnings {
        summary.push_str(&format!("warning: {w}\n"));
    }
    out.write("validation.txt", &summary)
}

fn fit_nn(a: &FitArgs, log: impl Fn(&str)) -> Result<(), CliError> {
    let settings = Settings::load(a.config.as_deref())?;
    let overrides: Vec<_> = [
        pair("epochs", a.epochs),
        pair("learning_rate", a.learning_rate),
        pair("validation_size", a.validation_size),
    ]
    .into_iter()
    .flatten()
    .collect();
    let mut train = build_config(Some(0), &settings, &overrides)?.r_training;
    train.seed = a.seed;
    let (samples, scaling) = ephemeris::parse_normalized_csv(&read(&a.data)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", a.data.display())))?;
    let name = a.name.clone().unwrap_or_else(|| stem(&a.data));
    let (model, report) = pipeline::fit_model(&samples, scaling, &train)?;
    log(&fit_line(&name, &report));
    let mut out = Output::create(&a.out)?;
    out.write(&format!("model_{name}.txt"), &model.to_checkpoint())?;
    out.write(&format!("loss_{name}.csv"), &report.trace_csv())?;
    out.finish(
        "fit-nn",
        &format!(
            "seed={}\nepochs={}\nlearning_rate={}\nvalidation_size={}\n",
            train.seed, train.epochs, train.learning_rate, train.validation_size
        ),
    )
}

fn fit_line(name: &str, r: &TrainReport) -> String {
    format!(
        "fit-nn {name}: train mse {:.3e}, validation mse {:.3e}",
        r.train_mse, r.val_mse
    )
}

fn stem(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "model".into())
}

fn load_model(path: &Path) -> Result<NetworkModel, CliError> {
    NetworkModel::from_checkpoint(&read(path)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn load_archive(path: &Path) -> Result<ParetoArchive, CliError> {
    ParetoArchive::from_csv(&read(path)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Data(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

fn augment_cmd(a: &AugmentArgs, log: impl Fn(&str)) -> Result<(), CliError> {
    let model = load_model(&a.model)?;
    let (mut out, name) = Output::for_file(&a.out)?;
    let echo_model = format!("model={}\nseed={}\n", a.model.display(), a.seed);
    if !a.kinematics {
        let n = a.n.ok_or_else(|| CliError::Usage("augment needs --n or --kinematics".into()))?;
        let (input, output) = a
            .names
            .split_once(',')
            .ok_or_else(|| CliError::Usage("--names takes two comma-separated names".into()))?;
        let samples = augment::augment(&model, n, a.seed);
        out.write(&name, &augment::samples_csv(&samples, input.trim(), output.trim()))?;
        log(&format!("augment: {n} samples"));
        return out.finish("augment", &format!("{echo_model}n={n}\nnames={}\n", a.names));
    }
    let law = match (&a.law, &a.law_archive) {
        (Some(text), None) => Parser::default().parse(text)?,
        (None, Some(path)) => search::select(load_archive(path)?.entries())?.expr.clone(),
        _ => return Err(CliError::Usage("--kinematics needs --law or --law-archive".into())),
    };
    let cfg = KinematicsConfig {
        n: a.points,
        seed: a.seed,
        delta_days: a.delta_days,
        period_days: a.period_days,
        ..KinematicsConfig::default()
    };
    let points = augment::sample_kinematics(&model, pipeline::radius_law(&law), &cfg)?;
    out.write(&name, &augment::kinematics_csv(&points))?;
    if let Some(f) = &a.features_out {
        write_file(f, &pipeline::w2_features_csv(&points))?;
    }
    log(&format!("kinematics: {} points", points.len()));
    out.finish(
        "augment",
        &format!(
            "{echo_model}points={}\ndelta_days={}\nperiod_days={}\nlaw={law}\n",
            a.points, a.delta_days, a.period_days
        ),
    )
}

fn symreg(a: &SymregArgs, log: impl Fn(&str)) -> Result<(), CliError> {
    let settings = Settings::load(a.config.as_deref())?;
    let overrides: Vec<_> = [
        pair("ops", a.ops.clone()),
        pair("iterations", a.iterations),
        pair("max_size", a.max_size),
        pair("workers", a.workers),
        pair("polish", a.polish),
    ]
    .into_iter()
    .flatten()
    .collect();
    let mut cfg = build_config(Some(0), &settings, &overrides)?.first_law;
    cfg.seed = a.seed;
    let features: Option<Vec<String>> = a
        .features
        .as_ref()
        .map(|f| f.split(',').map(|s| s.trim().to_string()).collect());
    let data = Dataset::from_csv(&read(&a.input)?, &a.target, features.as_deref())
        .map_err(|e| CliError::Data(format!("{}: {e}", a.input.display())))?;
    let outcome = search::search(&data, &cfg)?;
    let mut out = Output::create(&a.out)?;
    let knee = write_search(&mut out, &a.prefix, &outcome, &data.names)?;
    log(&format!(
        "symreg: {} archive entries, knee size {} rmse {:.3e}",
        outcome.archive.len(),
        knee.size,
        knee.rmse
    ));
    out.finish(
        "symreg",
        &format!(
            "seed={}\niterations={}\nmax_size={}\nops={}\nworkers={}\npolish={}\ntarget={}\nfeatures={}\n",
            cfg.seed,
            cfg.iterations,
            cfg.max_size,
            cfg.operations_string(),
            cfg.workers,
            cfg.polish,
            a.target,
            data.names.join(",")
        ),
    )
}

/// Archive, progress log, size/neg-log-error series and the knee.
fn write_search(
    out: &mut Output,
    prefix: &str,
    s: &SearchOutcome,
    names: &[String],
) -> Result<search::ParetoEntry, CliError> {
    let entries = s.archive.entries();
    out.write(&format!("{prefix}archive.csv"), &s.archive.to_csv())?;
    out.write(&format!("{prefix}progress.csv"), &s.progress_csv())?;
    out.write(&format!("{prefix}pareto.csv"), &search::neg_log_error_csv(entries))?;
    let knee = search::select(entries)?.clone();
    out.write(
        &format!("{prefix}knee.txt"),
        &format!(
            "size={}\nrmse={}\nexpression={}\nreadable={}\n",
            knee.size,
            knee.rmse,
            knee.expr,
            knee.expr.display_with(names)
        ),
    )?;
    Ok(knee)
}

fn interpret_cmd(a: &InterpretArgs) -> Result<(), CliError> {
    if a.first.is_none() && a.second.is_none() && a.kinematics.is_none() {
        return Err(CliError::Usage(
            "interpret needs at least one of --first, --second, --kinematics".into(),
        ));
    }
    let first = a.first.as_deref().map(load_archive).transpose()?;
    let second = a.second.as_deref().map(load_archive).transpose()?;
    let points = match &a.kinematics {
        Some(p) => Some(
            augment::parse_kinematics_csv(&read(p)?)
                .map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?,
        ),
        None => None,
    };
    let first_law = first.as_ref().map(|f| search::select(f.entries())).transpose()?;
    let second_law = second.as_ref().map(|s| search::select(s.entries())).transpose()?;
    let interp = pipeline::interpret(first_law, second_law, points.as_deref());
    let mut out = Output::create(&a.out)?;
    write_interpretation(&mut out, &interp)?;
    print!("{interp}");
    out.finish("interpret", "")
}

fn write_interpretation(out: &mut Output, i: &Interpretation) -> Result<(), CliError> {
    out.write("interpretation.txt", &i.to_string())?;
    out.write("constants.csv", &i.constants_csv())
}

fn oracle_cmd(a: &OracleArgs) -> Result<(), CliError> {
    let spec = OrbitSpec {
        eps: a.eps,
        l: a.l,
        period: a.period_days,
        phi0: a.phi0,
    };
    let noise = if a.noiseless {
        Noise::NONE
    } else {
        Noise {
            theta_arcsec: a.noise_theta,
            r_relative: a.noise_r,
        }
    };
    let cfg = SynthConfig {
        n: a.n,
        noise,
        seed: a.seed,
        ..SynthConfig::default()
    };
    let catalog = oracle::synth_catalog(&spec, &cfg)?;
    let header = format!(
        "# synthetic two-body catalog: eps={} l={} period={} phi0={} seed={} noise_theta_arcsec={} noise_r={}\n",
        spec.eps, spec.l, spec.period, spec.phi0, a.seed, noise.theta_arcsec, noise.r_relative
    );
    let (mut out, name) = Output::for_file(&a.out)?;
    out.write(&name, &(header + &ephemeris::write_catalog(&catalog)))?;
    out.finish(
        "oracle",
        &format!(
            "eps={}\nl={}\nperiod_days={}\nphi0={}\nn={}\nseed={}\nnoise_theta={}\nnoise_r={}\n",
            spec.eps, spec.l, spec.period, spec.phi0, a.n, a.seed, noise.theta_arcsec, noise.r_relative
        ),
    )
}

fn pipeline_cmd(a: &PipelineArgs, log: impl Fn(&str)) -> Result<(), CliError> {
    let settings = Settings::load(a.config.as_deref())?;
    let mut overrides: Vec<(String, String)> = [
        pair("epochs", a.epochs),
        pair("iterations", a.iterations),
        pair("workers", a.workers),
    ]
    .into_iter()
    .flatten()
    .collect();
    for kv in &a.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        if k.trim() == "seed" {
            return Err(CliError::Usage("use --seed rather than --set seed=...".into()));
        }
        overrides.push((k.trim().to_string(), v.trim().to_string()));
    }
    let config = build_config(a.seed, &settings, &overrides)?;
    let catalog_path = a.catalog.clone().or_else(|| settings.path("catalog"));
    let out_dir = a
        .out
        .clone()
        .or_else(|| settings.path("out"))
        .ok_or_else(|| CliError::Usage("pipeline needs --out or `out = ...` in the config".into()))?;
    let r_model_path = a.r_model.clone().or_else(|| settings.path("r_model"));
    let theta_model_path = a.theta_model.clone().or_else(|| settings.path("theta_model"));

    let obs = load_catalog(catalog_path.as_deref())?;
    let mut state = PipelineOutput {
        r_model: r_model_path.as_deref().map(load_model).transpose()?,
        theta_model: theta_model_path.as_deref().map(load_model).transpose()?,
        ..PipelineOutput::default()
    };
    let mut out = Output::create(&out_dir)?;
    let result = pipeline::run(&config, &obs, &mut state, &log);
    // Whatever finished is written even when a later stage failed.
    write_pipeline(&mut out, &state, obs.len())?;
    let mut echo = format!("seed={}\n", config.r_training.seed);
    echo.push_str(&format!(
        "catalog={}\n",
        catalog_path.as_deref().map_or("<bundled>".into(), |p| p.display().to_string())
    ));
    for (k, p) in [("r_model", &r_model_path), ("theta_model", &theta_model_path)] {
        if let Some(p) = p {
            echo.push_str(&format!("{k}={}\n", p.display()));
        }
    }
    echo.push_str(&config.echo());
    out.finish("pipeline", &echo)?;
    result?;
    if let Some(i) = &state.interpretation {
        print!("{i}");
    }
    Ok(())
}

fn write_pipeline(out: &mut Output, s: &PipelineOutput, rows: usize) -> Result<(), CliError> {
    let theta = ["theta".to_string()];
    let features: Vec<String> = SECOND_LAW_FEATURES.iter().map(|f| f.to_string()).collect();
    if let Some(ing) = &s.ingested {
        write_ingested(out, ing, rows)?;
    }
    if let Some(m) = &s.r_model {
        out.write("model_r.txt", &m.to_checkpoint())?;
    }
    if let Some(r) = &s.r_report {
        out.write("loss_r.csv", &r.trace_csv())?;
    }
    if let Some(a) = &s.r_augmented {
        out.write("r_augmented.csv", &augment::samples_csv(a, "theta", "r"))?;
    }
    if let Some(f) = &s.first_search {
        write_search(out, "first_", f, &theta)?;
    }
    if let Some(m) = &s.theta_model {
        out.write("model_theta.txt", &m.to_checkpoint())?;
    }
    if let Some(r) = &s.theta_report {
        out.write("loss_theta.csv", &r.trace_csv())?;
    }
    if let Some(a) = &s.theta_augmented {
        out.write("theta_augmented.csv", &augment::samples_csv(a, "t", "theta"))?;
    }
    if let Some(k) = &s.kinematics {
        out.write("kinematics.csv", &augment::kinematics_csv(k))?;
        out.write("w2_features.csv", &pipeline::w2_features_csv(k))?;
    }
    if let Some(f) = &s.second_search {
        write_search(out, "second_", f, &features)?;
    }
    if let Some(i) = &s.interpretation {
        write_interpretation(out, i)?;
        out.write("report.txt", &s.report())?;
    }
    Ok(())
}
