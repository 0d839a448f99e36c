//! Dense resampling of a trained surrogate, finite-difference angular
//! velocity, and the power features fed to symbolic regression.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::neural::NetworkModel;

/// Default central-difference half-width: 1/32 day, about 45 minutes.
pub const DEFAULT_DELTA_DAYS: f64 = 1.0 / 32.0;

pub const KINEMATICS_HEADER: &str = "t,theta_rad,r_au,omega_radday,r2,r3,w2,w3";

/// Anything that maps a normalised input to a physical output.
pub trait Surrogate {
    /// Physical value of the input at normalised position `x`.
    fn input_at(&self, x: f64) -> f64;
    /// Physical output at normalised input `x`.
    fn output_at(&self, x: f64) -> f64;
}

impl Surrogate for NetworkModel {
    fn input_at(&self, x: f64) -> f64 {
        self.scaling.input.invert(x)
    }

    fn output_at(&self, x: f64) -> f64 {
        self.scaling.target.invert(self.predict(x))
    }
}

/// A closure over the normalised input, with a fixed input span.
pub struct FnSurrogate<F> {
    pub input_offset: f64,
    pub input_span: f64,
    pub f: F,
}

impl<F: Fn(f64) -> f64> FnSurrogate<F> {
    pub fn new(input_span: f64, f: F) -> Self {
        Self {
            input_offset: 0.0,
            input_span,
            f,
        }
    }
}

impl<F: Fn(f64) -> f64> Surrogate for FnSurrogate<F> {
    fn input_at(&self, x: f64) -> f64 {
        self.input_offset + x * self.input_span
    }

    fn output_at(&self, x: f64) -> f64 {
        (self.f)(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentedSample {
    /// Normalised input in `[0, 1]`.
    pub x: f64,
    pub input: f64,
    pub output: f64,
}

/// `n` uniform draws on `[0, 1]`, sorted, each paired with the model output.
pub fn augment(model: &impl Surrogate, n: usize, seed: u64) -> Vec<AugmentedSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    xs.sort_by(f64::total_cmp);
    xs.into_iter()
        .map(|x| AugmentedSample {
            x,
            input: model.input_at(x),
            output: model.output_at(x),
        })
        .collect()
}

/// Central difference of the model output around normalised time `t`, in
/// output units per day.
pub fn angular_velocity(
    model: &impl Surrogate,
    t: f64,
    delta_days: f64,
    period_days: f64,
) -> Result<f64> {
    if !(delta_days > 0.0 && period_days > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "delta {delta_days} and period {period_days} must be positive"
        )));
    }
    let h = delta_days / period_days;
    let (lo, hi) = (t - h, t + h);
    if !(lo >= 0.0 && hi <= 1.0) {
        return Err(Error::OutOfRange { lo, hi });
    }
    Ok((model.output_at(hi) - model.output_at(lo)) / (2.0 * delta_days))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentedPoint {
    pub t: Option<f64>,
    pub theta: f64,
    pub r: f64,
    pub omega: f64,
    pub r2: f64,
    pub r3: f64,
    pub w2: f64,
    pub w3: f64,
}

impl AugmentedPoint {
    pub fn new(t: Option<f64>, theta: f64, r: f64, omega: f64) -> Self {
        Self {
            t,
            theta,
            r,
            omega,
            r2: r * r,
            r3: r * r * r,
            w2: omega * omega,
            w3: omega * omega * omega,
        }
    }

    /// Twice the areal velocity.
    pub fn areal_rate(&self) -> f64 {
        self.r2 * self.omega
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicsConfig {
    pub n: usize,
    pub range: (f64, f64),
    pub seed: u64,
    pub delta_days: f64,
    pub period_days: f64,
}

impl Default for KinematicsConfig {
    fn default() -> Self {
        Self {
            n: 28,
            range: (0.1, 0.9),
            seed: 0,
            delta_days: DEFAULT_DELTA_DAYS,
            period_days: crate::ephemeris::MARS_PERIOD_DAYS,
        }
    }
}

/// Draws times uniformly in `config.range`, then reads longitude and angular
/// velocity off the θ(t) model and distance off `r_law`. Points are sorted by
/// time.
pub fn sample_kinematics(
    model: &impl Surrogate,
    r_law: impl Fn(f64) -> f64,
    config: &KinematicsConfig,
) -> Result<Vec<AugmentedPoint>> {
    let (lo, hi) = config.range;
    if !(0.0 <= lo && lo < hi && hi <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "sampling range [{lo}, {hi}] must be a proper subinterval of [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut ts: Vec<f64> = (0..config.n).map(|_| rng.random_range(lo..hi)).collect();
    ts.sort_by(f64::total_cmp);
    ts.into_iter()
        .map(|t| {
            let omega = angular_velocity(model, t, config.delta_days, config.period_days)?;
            let theta = model.output_at(t);
            Ok(AugmentedPoint::new(Some(t), theta, r_law(theta), omega))
        })
        .collect()
}

pub fn kinematics_csv(points: &[AugmentedPoint]) -> String {
    let mut out = String::from(KINEMATICS_HEADER);
    out.push('\n');
    for p in points {
        let t = p.t.map(|t| t.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{t},{},{},{},{},{},{},{}",
            p.theta, p.r, p.omega, p.r2, p.r3, p.w2, p.w3
        );
    }
    out
}

/// Inverse of [`kinematics_csv`].
pub fn parse_kinematics_csv(text: &str) -> Result<Vec<AugmentedPoint>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>().join(",") != KINEMATICS_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{KINEMATICS_HEADER}`"),
        });
    }
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let field = |k: usize| -> Result<f64> {
            record[k].trim().parse::<f64>().map_err(|_| Error::Parse {
                line: i + 2,
                message: format!("bad number {:?}", &record[k]),
            })
        };
        let t = if record[0].trim().is_empty() {
            None
        } else {
            Some(field(0)?)
        };
        out.push(AugmentedPoint {
            t,
            theta: field(1)?,
            r: field(2)?,
            omega: field(3)?,
            r2: field(4)?,
            r3: field(5)?,
            w2: field(6)?,
            w3: field(7)?,
        });
    }
    Ok(out)
}

/// Two-column CSV of an augmented series, physical units.
pub fn samples_csv(samples: &[AugmentedSample], input: &str, output: &str) -> String {
    let mut out = format!("{input},{output}\n");
    for s in samples {
        let _ = writeln!(out, "{},{}", s.input, s.output);
    }
    out
}
