//! End-to-end discovery run: network fits, augmentation, two symbolic
//! regressions and their interpretation. Each stage is also exposed on its
//! own so callers can recombine them.

use std::fmt::Write as _;

use crate::augment::{self, AugmentedPoint, AugmentedSample, KinematicsConfig};
use crate::ephemeris::{self, InputScaling, NormalizedSample, Observation, Scaling, ScalingRecord, Warning};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::interpret::{self, Interpretation};
use crate::neural::{self, NetworkModel, TrainConfig, TrainReport};
use crate::search::{self, Dataset, ParetoEntry, SearchConfig, SearchOutcome};

/// Powers of `r` carried by the second-law feature columns.
pub const SECOND_LAW_POWERS: [i32; 3] = [1, 2, 3];
pub const SECOND_LAW_FEATURES: [&str; 3] = ["r", "r2", "r3"];

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub period_days: f64,
    pub r_training: TrainConfig,
    pub theta_training: TrainConfig,
    pub r_samples: usize,
    pub theta_samples: usize,
    pub augment_seed: u64,
    pub kinematics: KinematicsConfig,
    pub first_law: SearchConfig,
    pub second_law: SearchConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self::with_seed(0)
    }
}

impl PipelineConfig {
    /// Defaults with every stage seed derived from `seed`.
    pub fn with_seed(seed: u64) -> Self {
        let period = ephemeris::MARS_PERIOD_DAYS;
        Self {
            period_days: period,
            r_training: TrainConfig {
                seed,
                ..TrainConfig::default()
            },
            theta_training: TrainConfig {
                seed: seed.wrapping_add(1),
                ..TrainConfig::default()
            },
            r_samples: 1000,
            theta_samples: (2.0 * period).round() as usize,
            augment_seed: seed.wrapping_add(2),
            kinematics: KinematicsConfig {
                seed: seed.wrapping_add(3),
                period_days: period,
                ..KinematicsConfig::default()
            },
            first_law: SearchConfig {
                seed: seed.wrapping_add(4),
                ..SearchConfig::default()
            },
            second_law: SearchConfig {
                seed: seed.wrapping_add(5),
                ..SearchConfig::default()
            },
        }
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::InvalidArgument(format!("bad value {v:?} for `{key}`")))
        }
        match key {
            "seed" => *self = Self::with_seed(num(key, value)?),
            "period_days" => {
                self.period_days = num(key, value)?;
                self.kinematics.period_days = self.period_days;
            }
            "epochs" => {
                self.r_training.epochs = num(key, value)?;
                self.theta_training.epochs = self.r_training.epochs;
            }
            "learning_rate" => {
                self.r_training.learning_rate = num(key, value)?;
                self.theta_training.learning_rate = self.r_training.learning_rate;
            }
            "validation_size" => {
                self.r_training.validation_size = num(key, value)?;
                self.theta_training.validation_size = self.r_training.validation_size;
            }
            "r_samples" => self.r_samples = num(key, value)?,
            "theta_samples" => self.theta_samples = num(key, value)?,
            "kinematic_points" => self.kinematics.n = num(key, value)?,
            "delta_days" => self.kinematics.delta_days = num(key, value)?,
            "iterations" => {
                self.first_law.iterations = num(key, value)?;
                self.second_law.iterations = self.first_law.iterations;
            }
            "workers" => {
                self.first_law.workers = num(key, value)?;
                self.second_law.workers = self.first_law.workers;
            }
            "max_size" => {
                self.first_law.max_size = num(key, value)?;
                self.second_law.max_size = self.first_law.max_size;
            }
            "ops" => {
                self.first_law.set_operations(value)?;
                self.second_law.set_operations(value)?;
            }
            "polish" => {
                self.first_law.polish = num(key, value)?;
                self.second_law.polish = self.first_law.polish;
            }
            _ => return Err(Error::InvalidArgument(format!("unknown setting `{key}`"))),
        }
        Ok(())
    }

    /// `key=value` lines for the run manifest.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        let t = &self.r_training;
        let s = &self.first_law;
        let _ = writeln!(out, "period_days={}", self.period_days);
        let _ = writeln!(out, "r_seed={}", t.seed);
        let _ = writeln!(out, "theta_seed={}", self.theta_training.seed);
        let _ = writeln!(out, "epochs={}", t.epochs);
        let _ = writeln!(out, "learning_rate={}", t.learning_rate);
        let _ = writeln!(out, "validation_size={}", t.validation_size);
        let _ = writeln!(out, "widths={:?}", t.widths);
        let _ = writeln!(out, "r_samples={}", self.r_samples);
        let _ = writeln!(out, "theta_samples={}", self.theta_samples);
        let _ = writeln!(out, "augment_seed={}", self.augment_seed);
        let _ = writeln!(out, "kinematic_points={}", self.kinematics.n);
        let _ = writeln!(out, "kinematic_seed={}", self.kinematics.seed);
        let _ = writeln!(out, "delta_days={}", self.kinematics.delta_days);
        let _ = writeln!(out, "first_law_seed={}", s.seed);
        let _ = writeln!(out, "second_law_seed={}", self.second_law.seed);
        let _ = writeln!(out, "iterations={}", s.iterations);
        let _ = writeln!(out, "workers={}", s.workers);
        let _ = writeln!(out, "max_size={}", s.max_size);
        let _ = writeln!(out, "ops={}", s.operations_string());
        let _ = writeln!(out, "polish={}", s.polish);
        out
    }
}

/// Normalised training data for both tasks.
#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub r_samples: Vec<NormalizedSample>,
    pub r_scaling: ScalingRecord,
    pub theta_samples: Vec<NormalizedSample>,
    pub theta_scaling: ScalingRecord,
    pub warnings: Vec<Warning>,
}

pub fn ingest(observations: &[Observation], period_days: f64) -> Result<Ingested> {
    if observations.is_empty() {
        return Err(Error::InvalidArgument("empty catalog".into()));
    }
    let r = ephemeris::r_of_theta(observations);
    let (r_samples, r_scaling) =
        ephemeris::normalize(&r.inputs, &r.targets, InputScaling::Fixed(Scaling::TURN))?;
    let t = ephemeris::theta_of_t(observations, period_days)?;
    let period = Scaling {
        offset: 0.0,
        span: period_days,
    };
    let (mut theta_samples, theta_scaling) =
        ephemeris::normalize(&t.inputs, &t.targets, InputScaling::Fixed(period))?;
    for (s, row) in theta_samples.iter_mut().zip(&t.rows) {
        s.provenance = ephemeris::Provenance::Observation(*row);
    }
    Ok(Ingested {
        r_samples,
        r_scaling,
        theta_samples,
        theta_scaling,
        warnings: ephemeris::validate(observations),
    })
}

/// Splits off a validation set, trains, and attaches the scaling record.
pub fn fit_model(
    samples: &[NormalizedSample],
    scaling: ScalingRecord,
    config: &TrainConfig,
) -> Result<(NetworkModel, TrainReport)> {
    let (train, val) = neural::split(samples, config.validation_size, config.seed)?;
    let (mut model, report) = neural::train(&train, &val, config)?;
    model.scaling = scaling;
    Ok((model, report))
}

/// One-input dataset from an augmented series.
pub fn series_dataset(samples: &[AugmentedSample], name: &str) -> Result<Dataset> {
    Dataset::with_names(
        vec![samples.iter().map(|s| s.input).collect()],
        samples.iter().map(|s| s.output).collect(),
        vec![name.to_string()],
    )
}

/// `r,r2,r3,w2` columns, the standalone input of the second search.
pub fn w2_features_csv(points: &[AugmentedPoint]) -> String {
    let mut out = String::from("r,r2,r3,w2\n");
    for p in points {
        let _ = writeln!(out, "{},{},{},{}", p.r, p.r2, p.r3, p.w2);
    }
    out
}

/// `w2` against `(r, r2, r3)`.
pub fn second_law_dataset(points: &[AugmentedPoint]) -> Result<Dataset> {
    Dataset::with_names(
        vec![
            points.iter().map(|p| p.r).collect(),
            points.iter().map(|p| p.r2).collect(),
            points.iter().map(|p| p.r3).collect(),
        ],
        points.iter().map(|p| p.w2).collect(),
        SECOND_LAW_FEATURES.iter().map(|s| s.to_string()).collect(),
    )
}

/// Evaluates a one-variable expression as `r(theta)`.
pub fn radius_law(expr: &Expr) -> impl Fn(f64) -> f64 + '_ {
    move |theta| {
        expr.evaluate(&[theta])
            .map(|e| e.value())
            .unwrap_or(f64::NAN)
    }
}

/// Builds the interpretation record from the selected expressions.
pub fn interpret(
    first: Option<&ParetoEntry>,
    second: Option<&ParetoEntry>,
    points: Option<&[AugmentedPoint]>,
) -> Interpretation {
    let mut out = Interpretation::default();
    if let Some(e) = first {
        out.first_law_expr = Some(e.expr.display_with(&["theta".to_string()]).to_string());
        out.first_law_rmse = Some(e.rmse);
        match interpret::to_standard_conic(&e.expr) {
            Ok(c) => out.conic = Some(c),
            Err(err) => out.conic_error = Some(err.to_string()),
        }
    }
    if let Some(e) = second {
        let names: Vec<String> = SECOND_LAW_FEATURES.iter().map(|s| s.to_string()).collect();
        out.second_law_expr = Some(e.expr.display_with(&names).to_string());
        out.second_law_rmse = Some(e.rmse);
        out.selected_law = interpret::power_law_from_expr(&e.expr, &SECOND_LAW_POWERS);
    }
    if let Some(p) = points {
        out.stats = interpret::power_law_constant(p).ok();
    }
    out
}

/// Everything a run produced, filled stage by stage so a failure leaves the
/// completed stages in place.
#[derive(Debug, Clone, Default)]
pub struct PipelineOutput {
    pub ingested: Option<Ingested>,
    pub r_model: Option<NetworkModel>,
    pub r_report: Option<TrainReport>,
    pub r_augmented: Option<Vec<AugmentedSample>>,
    pub first_search: Option<SearchOutcome>,
    pub first_law: Option<ParetoEntry>,
    pub theta_model: Option<NetworkModel>,
    pub theta_report: Option<TrainReport>,
    pub theta_augmented: Option<Vec<AugmentedSample>>,
    pub kinematics: Option<Vec<AugmentedPoint>>,
    pub second_search: Option<SearchOutcome>,
    pub second_law: Option<ParetoEntry>,
    pub interpretation: Option<Interpretation>,
}

/// Runs every stage in order. `log` receives one line per finished stage.
/// A model already present in `out` is used as is instead of being trained.
pub fn run(
    config: &PipelineConfig,
    observations: &[Observation],
    out: &mut PipelineOutput,
    mut log: impl FnMut(&str),
) -> Result<()> {
    let ing = ingest(observations, config.period_days).map_err(|e| e.in_stage("ingest"))?;
    log(&format!(
        "ingest: {} observations, {} warnings",
        observations.len(),
        ing.warnings.len()
    ));
    out.ingested = Some(ing.clone());

    let r_model = match out.r_model.clone() {
        Some(m) => {
            log("fit-nn r(theta): using the supplied model");
            m
        }
        None => {
            let (m, rep) = fit_model(&ing.r_samples, ing.r_scaling, &config.r_training)
                .map_err(|e| e.in_stage("fit-nn r(theta)"))?;
            log(&format!(
                "fit-nn r(theta): train mse {:.3e}, validation mse {:.3e}",
                rep.train_mse, rep.val_mse
            ));
            out.r_model = Some(m.clone());
            out.r_report = Some(rep);
            m
        }
    };
    let r_aug = augment::augment(&r_model, config.r_samples, config.augment_seed);
    out.r_augmented = Some(r_aug.clone());

    let data = series_dataset(&r_aug, "theta").map_err(|e| e.in_stage("symreg r(theta)"))?;
    let first = search::search(&data, &config.first_law).map_err(|e| e.in_stage("symreg r(theta)"))?;
    let first_law = search::select(first.archive.entries())
        .map_err(|e| e.in_stage("symreg r(theta)"))?
        .clone();
    log(&format!(
        "symreg r(theta): {} archive entries, knee size {} rmse {:.3e}",
        first.archive.len(),
        first_law.size,
        first_law.rmse
    ));
    out.first_search = Some(first);
    out.first_law = Some(first_law.clone());

    let t_model = match out.theta_model.clone() {
        Some(m) => {
            log("fit-nn theta(t): using the supplied model");
            m
        }
        None => {
            let (m, rep) = fit_model(&ing.theta_samples, ing.theta_scaling, &config.theta_training)
                .map_err(|e| e.in_stage("fit-nn theta(t)"))?;
            log(&format!(
                "fit-nn theta(t): train mse {:.3e}, validation mse {:.3e}",
                rep.train_mse, rep.val_mse
            ));
            out.theta_model = Some(m.clone());
            out.theta_report = Some(rep);
            m
        }
    };
    out.theta_augmented = Some(augment::augment(
        &t_model,
        config.theta_samples,
        config.augment_seed.wrapping_add(1),
    ));
    let points = augment::sample_kinematics(&t_model, radius_law(&first_law.expr), &config.kinematics)
        .map_err(|e| e.in_stage("kinematics"))?;
    out.kinematics = Some(points.clone());
    log(&format!("kinematics: {} points", points.len()));

    let data = second_law_dataset(&points).map_err(|e| e.in_stage("symreg w2"))?;
    let second = search::search(&data, &config.second_law).map_err(|e| e.in_stage("symreg w2"))?;
    let second_law = search::select(second.archive.entries())
        .map_err(|e| e.in_stage("symreg w2"))?
        .clone();
    log(&format!(
        "symreg w2: {} archive entries, knee size {} rmse {:.3e}",
        second.archive.len(),
        second_law.size,
        second_law.rmse
    ));
    out.second_search = Some(second);
    out.second_law = Some(second_law.clone());

    out.interpretation = Some(interpret(Some(&first_law), Some(&second_law), Some(&points)));
    Ok(())
}

impl PipelineOutput {
    /// Consolidated plain-text report.
    pub fn report(&self) -> String {
        let mut out = String::from("Kepler/Newton rediscovery report\n\n");
        let fit_line = |out: &mut String, name: &str, r: &Option<TrainReport>| {
            if let Some(r) = r {
                let _ = writeln!(
                    out,
                    "network {name}: train mse {:.6e}, validation mse {:.6e}",
                    r.train_mse, r.val_mse
                );
            }
        };
        fit_line(&mut out, "r(theta)", &self.r_report);
        fit_line(&mut out, "theta(t)", &self.theta_report);
        let arch = |out: &mut String, name: &str, s: &Option<SearchOutcome>, names: &[String]| {
            if let Some(s) = s {
                let _ = writeln!(out, "\nPareto archive, {name}:");
                for e in s.archive.entries() {
                    let _ = writeln!(out, "  {:>3}  {:.6e}  {}", e.size, e.rmse, e.expr.display_with(names));
                }
            }
        };
        arch(&mut out, "r(theta)", &self.first_search, &["theta".to_string()]);
        let names: Vec<String> = SECOND_LAW_FEATURES.iter().map(|s| s.to_string()).collect();
        arch(&mut out, "w^2(r, r2, r3)", &self.second_search, &names);
        if let Some(i) = &self.interpretation {
            let _ = writeln!(out);
            let _ = write!(out, "{i}");
        }
        out
    }
}
