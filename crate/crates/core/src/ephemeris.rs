//! Observation catalog: parsing, calendar arithmetic, period folding and
//! unit scaling.
//!
//! Catalog rows look like
//!
//! ```text
//! 1587/03/10 11:30,177.59833,1.64382,0,0
//! ```
//!
//! i.e. an old-style (Julian calendar) date and local clock time, the
//! heliocentric ecliptic longitude in degrees, the Sun-Mars distance in AU and
//! the computed-minus-observed residual split into signed arc-minutes and
//! arc-seconds. Lines starting with `#` are comments.

use std::f64::consts::{PI, TAU};
use std::fmt;

use crate::error::{Error, OldStyleDisplay, Result};

/// The reduced Mars positions shipped with the crate.
pub const TYCHO_MARS_CSV: &str = include_str!("../data/tycho_mars.csv");

/// Sidereal period of Mars as known in Kepler's day, in days.
pub const MARS_PERIOD_DAYS: f64 = 687.0;

/// Julian day number of 1582-10-15, the first day of the Gregorian calendar.
const REFORM_JDN: i64 = 2_299_161;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct OldStyleDate {
    pub year: i32,
    pub month: u32,
    pub day: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct GregorianDate {
    pub year: i32,
    pub month: u32,
    pub day: u32,
}

fn is_julian_leap(year: i32) -> bool {
    year.rem_euclid(4) == 0
}

fn month_length(month: u32, leap: bool) -> u32 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if leap => 29,
        _ => 28,
    }
}

impl OldStyleDate {
    pub fn new(year: i32, month: u32, day: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::InvalidArgument(format!("month {month} out of range")));
        }
        let len = month_length(month, is_julian_leap(year));
        if day == 0 || day > len {
            return Err(Error::InvalidArgument(format!(
                "day {day} out of range for {year:04}/{month:02}"
            )));
        }
        Ok(Self { year, month, day })
    }

    /// Julian day number of this Julian-calendar date.
    pub fn julian_day_number(&self) -> i64 {
        let a = (14 - self.month as i64) / 12;
        let y = self.year as i64 + 4800 - a;
        let m = self.month as i64 + 12 * a - 3;
        self.day as i64 + (153 * m + 2) / 5 + 365 * y + y.div_euclid(4) - 32083
    }

    /// Julian-calendar date of a Julian day number.
    pub fn from_julian_day_number(jdn: i64) -> Self {
        let c = jdn + 32_082;
        let d = (4 * c + 3).div_euclid(1461);
        let e = c - (1461 * d).div_euclid(4);
        let m = (5 * e + 2) / 153;
        Self {
            year: (d - 4800 + m / 10) as i32,
            month: (m + 3 - 12 * (m / 10)) as u32,
            day: (e - (153 * m + 2) / 5 + 1) as u32,
        }
    }

    fn ensure_reformed(&self) -> Result<i64> {
        let jdn = self.julian_day_number();
        if jdn < REFORM_JDN {
            return Err(Error::UnsupportedEra(OldStyleDisplay {
                year: self.year,
                month: self.month,
                day: self.day,
            }));
        }
        Ok(jdn)
    }

    /// The same day on the Gregorian calendar. Between 1582 and 1700 this is
    /// the old-style date plus ten days.
    pub fn to_gregorian(&self) -> Result<GregorianDate> {
        let jdn = self.ensure_reformed()?;
        Ok(GregorianDate::from_julian_day_number(jdn))
    }
}

impl GregorianDate {
    pub fn from_julian_day_number(jdn: i64) -> Self {
        let f = jdn + 1401 + (((4 * jdn + 274_277) / 146_097) * 3) / 4 - 38;
        let e = 4 * f + 3;
        let g = e.rem_euclid(1461) / 4;
        let h = 5 * g + 2;
        let day = (h.rem_euclid(153)) / 5 + 1;
        let month = ((h / 153 + 2) % 12) + 1;
        let year = e / 1461 - 4716 + (12 + 2 - month) / 12;
        Self {
            year: year as i32,
            month: month as u32,
            day: day as u32,
        }
    }
}

impl fmt::Display for OldStyleDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}/{:02}/{:02}", self.year, self.month, self.day)
    }
}

impl fmt::Display for GregorianDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}/{:02}/{:02}", self.year, self.month, self.day)
    }
}

/// Local clock time as printed in the catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClockTime {
    pub hour: u32,
    pub minute: u32,
}

impl ClockTime {
    pub fn day_fraction(&self) -> f64 {
        (self.hour * 60 + self.minute) as f64 / 1440.0
    }
}

/// How the sign of a residual was printed (`+1`, `-0`, `0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
    Unsigned,
}

/// Computed-minus-observed geocentric longitude, as arc-minutes and seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Residual {
    pub sign: Sign,
    pub minutes: u32,
    pub seconds: u32,
}

impl Residual {
    pub fn arcsec(&self) -> f64 {
        let magnitude = (self.minutes * 60 + self.seconds) as f64;
        match self.sign {
            Sign::Minus => -magnitude,
            _ => magnitude,
        }
    }
}

/// One catalog row.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub date: OldStyleDate,
    pub clock: ClockTime,
    pub theta_deg: f64,
    pub r_au: f64,
    pub residual: Residual,
    /// Decimal places printed for `theta_deg` and `r_au`, kept for
    /// re-serialization at the original precision.
    pub theta_decimals: usize,
    pub r_decimals: usize,
}

impl Observation {
    pub fn theta_rad(&self) -> f64 {
        self.theta_deg.to_radians()
    }

    pub fn residual_arcsec(&self) -> f64 {
        self.residual.arcsec()
    }

    /// One catalog line, without the trailing newline.
    pub fn to_csv_line(&self) -> String {
        let sign = match self.residual.sign {
            Sign::Plus => "+",
            Sign::Minus => "-",
            Sign::Unsigned => "",
        };
        let seconds = match self.residual.sign {
            Sign::Unsigned => self.residual.seconds.to_string(),
            _ => format!("{:02}", self.residual.seconds),
        };
        format!(
            "{} {:02}:{:02},{:.*},{:.*},{}{},{}",
            self.date,
            self.clock.hour,
            self.clock.minute,
            self.theta_decimals,
            self.theta_deg,
            self.r_decimals,
            self.r_au,
            sign,
            self.residual.minutes,
            seconds
        )
    }
}

fn decimals(token: &str) -> usize {
    token.split_once('.').map_or(0, |(_, frac)| frac.len())
}

fn parse_uint(token: &str, what: &str, line: usize) -> Result<u32> {
    token.parse::<u32>().map_err(|_| Error::Parse {
        line,
        message: format!("malformed {what} {token:?}"),
    })
}

fn parse_line(raw: &str, line: usize) -> Result<Observation> {
    let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
    if fields.len() != 5 {
        return Err(Error::Parse {
            line,
            message: format!("expected 5 comma-separated fields, found {}", fields.len()),
        });
    }
    let malformed_date = || Error::Parse {
        line,
        message: format!("malformed timestamp {:?}", fields[0]),
    };
    let (date_text, clock_text) = fields[0].split_once(' ').ok_or_else(malformed_date)?;
    let parts: Vec<&str> = date_text.split('/').collect();
    if parts.len() != 3 {
        return Err(malformed_date());
    }
    let year = parts[0].parse::<i32>().map_err(|_| malformed_date())?;
    let month = parse_uint(parts[1], "month", line)?;
    let day = parse_uint(parts[2], "day", line)?;
    let date = OldStyleDate::new(year, month, day).map_err(|e| Error::Parse {
        line,
        message: e.to_string(),
    })?;
    let (h, m) = clock_text.trim().split_once(':').ok_or_else(malformed_date)?;
    let clock = ClockTime {
        hour: parse_uint(h, "hour", line)?,
        minute: parse_uint(m, "minute", line)?,
    };
    if clock.hour > 23 || clock.minute > 59 {
        return Err(malformed_date());
    }

    let theta_deg = fields[1].parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("malformed longitude {:?}", fields[1]),
    })?;
    if !(0.0..360.0).contains(&theta_deg) {
        return Err(Error::Parse {
            line,
            message: format!("longitude {theta_deg} outside [0, 360)"),
        });
    }
    let r_au = fields[2].parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("malformed distance {:?}", fields[2]),
    })?;
    if !(r_au > 0.0) || !r_au.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("distance {r_au} must be positive"),
        });
    }

    let (sign, minutes_text) = match fields[3].as_bytes().first() {
        Some(b'+') => (Sign::Plus, &fields[3][1..]),
        Some(b'-') => (Sign::Minus, &fields[3][1..]),
        _ => (Sign::Unsigned, fields[3]),
    };
    let residual = Residual {
        sign,
        minutes: parse_uint(minutes_text, "residual minutes", line)?,
        seconds: parse_uint(fields[4], "residual seconds", line)?,
    };
    if residual.seconds > 59 {
        return Err(Error::Parse {
            line,
            message: format!("residual seconds {} exceed 59", residual.seconds),
        });
    }

    Ok(Observation {
        date,
        clock,
        theta_deg,
        r_au,
        residual,
        theta_decimals: decimals(fields[1]),
        r_decimals: decimals(fields[2]),
    })
}

/// Parses catalog text into observations in file order. Line numbers in
/// errors are 1-based.
pub fn parse_catalog(text: &str) -> Result<Vec<Observation>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(i, l)| parse_line(l.trim(), i + 1))
        .collect()
}

pub fn write_catalog(observations: &[Observation]) -> String {
    let mut out = String::new();
    for o in observations {
        out.push_str(&o.to_csv_line());
        out.push('\n');
    }
    out
}

/// Built-in Tycho/Kepler catalog.
pub fn tycho_mars() -> Vec<Observation> {
    parse_catalog(TYCHO_MARS_CSV).expect("embedded catalog parses")
}

/// Non-fatal findings about a catalog.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    DistanceOutsideMarsRange { index: usize, r_au: f64 },
    LargeResidual { index: usize, arcsec: f64 },
    OutOfChronologicalOrder { index: usize },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::DistanceOutsideMarsRange { index, r_au } => {
                write!(f, "row {}: distance {r_au} AU outside (1.3, 1.8)", index + 1)
            }
            Warning::LargeResidual { index, arcsec } => {
                write!(f, "row {}: residual {arcsec}\" exceeds 600\"", index + 1)
            }
            Warning::OutOfChronologicalOrder { index } => {
                write!(f, "row {}: dated earlier than the row before it", index + 1)
            }
        }
    }
}

pub fn validate(observations: &[Observation]) -> Vec<Warning> {
    let mut warnings = Vec::new();
    for (index, o) in observations.iter().enumerate() {
        if !(o.r_au > 1.3 && o.r_au < 1.8) {
            warnings.push(Warning::DistanceOutsideMarsRange { index, r_au: o.r_au });
        }
        if o.residual_arcsec().abs() >= 600.0 {
            warnings.push(Warning::LargeResidual {
                index,
                arcsec: o.residual_arcsec(),
            });
        }
        if index > 0 {
            let prev = &observations[index - 1];
            if (o.date, o.clock.hour, o.clock.minute) < (prev.date, prev.clock.hour, prev.clock.minute)
            {
                warnings.push(Warning::OutOfChronologicalOrder { index });
            }
        }
    }
    warnings
}

/// Continuous day count relative to an epoch observation.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EpochTime {
    pub days: f64,
}

/// Fractional days elapsed from `epoch` to `obs`. Both dates are first mapped
/// onto the Gregorian calendar; clock times are taken as uniform local time.
pub fn old_style_to_epoch_days(obs: &Observation, epoch: &Observation) -> Result<EpochTime> {
    let a = obs.date.ensure_reformed()?;
    let b = epoch.date.ensure_reformed()?;
    let whole = (a - b) as f64;
    Ok(EpochTime {
        days: whole + obs.clock.day_fraction() - epoch.clock.day_fraction(),
    })
}

/// `(t mod period) / period`, always in `[0, 1)`.
///
/// # Panics
///
/// If `period_days` is not strictly positive.
pub fn fold_to_period(t: EpochTime, period_days: f64) -> f64 {
    assert!(period_days > 0.0, "period must be positive");
    let f = t.days.rem_euclid(period_days) / period_days;
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Converts longitudes in degrees (ordered by time) to radians, adding or
/// removing whole turns so that no step exceeds half a turn.
pub fn unwrap_longitudes(degrees: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(degrees.len());
    let mut turns = 0.0;
    let mut prev: Option<f64> = None;
    for &d in degrees {
        let raw = d.to_radians();
        if let Some(p) = prev {
            let step = raw - p;
            if step < -PI {
                turns += 1.0;
            } else if step > PI {
                turns -= 1.0;
            }
        }
        prev = Some(raw);
        out.push(raw + turns * TAU);
    }
    out
}

/// Affine map `v -> (v - offset) / span`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaling {
    pub offset: f64,
    pub span: f64,
}

impl Scaling {
    pub const IDENTITY: Scaling = Scaling {
        offset: 0.0,
        span: 1.0,
    };

    /// Longitudes in radians divided by a full turn.
    pub const TURN: Scaling = Scaling {
        offset: 0.0,
        span: TAU,
    };

    pub fn min_max(values: &[f64]) -> Result<Self> {
        let (lo, hi) = finite_bounds(values)?;
        if hi - lo <= 0.0 {
            return Err(Error::DegenerateRange(format!(
                "all {} values equal {lo}",
                values.len()
            )));
        }
        Ok(Self {
            offset: lo,
            span: hi - lo,
        })
    }

    pub fn apply(&self, v: f64) -> f64 {
        (v - self.offset) / self.span
    }

    pub fn invert(&self, x: f64) -> f64 {
        x * self.span + self.offset
    }
}

fn finite_bounds(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("cannot scale an empty series".into()));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite value {bad}")));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

/// Input and target scalings, stored alongside a trained model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRecord {
    pub input: Scaling,
    pub target: Scaling,
}

impl Default for ScalingRecord {
    fn default() -> Self {
        Self {
            input: Scaling::IDENTITY,
            target: Scaling::IDENTITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Observation(usize),
    Augmented,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Observation(i) => write!(f, "{i}"),
            Provenance::Augmented => f.write_str("augmented"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedSample {
    pub x: f64,
    pub y: f64,
    pub provenance: Provenance,
}

/// How task inputs are mapped onto `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InputScaling {
    /// Span the observed range.
    MinMax,
    /// A fixed affine map, e.g. [`Scaling::TURN`] for longitudes.
    Fixed(Scaling),
}

/// Scales raw `(input, target)` pairs. Targets are always min-max scaled; a
/// constant target series is only shifted.
pub fn normalize(
    inputs: &[f64],
    targets: &[f64],
    input_scaling: InputScaling,
) -> Result<(Vec<NormalizedSample>, ScalingRecord)> {
    if inputs.is_empty() || inputs.len() != targets.len() {
        return Err(Error::InvalidArgument(format!(
            "need equally many inputs and targets, got {} and {}",
            inputs.len(),
            targets.len()
        )));
    }
    let input = match input_scaling {
        InputScaling::MinMax => Scaling::min_max(inputs)?,
        InputScaling::Fixed(s) => {
            finite_bounds(inputs)?;
            s
        }
    };
    let (lo, hi) = finite_bounds(targets)?;
    let target = if hi > lo {
        Scaling {
            offset: lo,
            span: hi - lo,
        }
    } else {
        Scaling {
            offset: lo,
            span: 1.0,
        }
    };
    let samples = inputs
        .iter()
        .zip(targets)
        .enumerate()
        .map(|(i, (&v, &t))| {
            let x = input.apply(v);
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::InvalidArgument(format!(
                    "input {v} maps to {x}, outside [0, 1]"
                )));
            }
            Ok(NormalizedSample {
                x,
                y: target.apply(t),
                provenance: Provenance::Observation(i),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((samples, ScalingRecord { input, target }))
}

/// A regression task in physical units with the row each point came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub inputs: Vec<f64>,
    pub targets: Vec<f64>,
    pub rows: Vec<usize>,
}

/// Distance as a function of longitude (radians), in catalog order.
pub fn r_of_theta(observations: &[Observation]) -> Task {
    Task {
        inputs: observations.iter().map(Observation::theta_rad).collect(),
        targets: observations.iter().map(|o| o.r_au).collect(),
        rows: (0..observations.len()).collect(),
    }
}

/// Unwrapped longitude (radians) against time in days folded into one
/// period, with the first observation as epoch. Points are sorted by folded
/// time.
pub fn theta_of_t(observations: &[Observation], period_days: f64) -> Result<Task> {
    let Some(epoch) = observations.first() else {
        return Ok(Task {
            inputs: vec![],
            targets: vec![],
            rows: vec![],
        });
    };
    let mut folded = observations
        .iter()
        .enumerate()
        .map(|(i, o)| {
            let t = old_style_to_epoch_days(o, epoch)?;
            Ok((fold_to_period(t, period_days) * period_days, o.theta_deg, i))
        })
        .collect::<Result<Vec<_>>>()?;
    folded.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
    let degrees: Vec<f64> = folded.iter().map(|f| f.1).collect();
    Ok(Task {
        inputs: folded.iter().map(|f| f.0).collect(),
        targets: unwrap_longitudes(&degrees),
        rows: folded.iter().map(|f| f.2).collect(),
    })
}

/// Normalised task as CSV: two `#` lines carrying the scalings, then
/// `x,y,provenance` rows.
pub fn normalized_csv(samples: &[NormalizedSample], scaling: &ScalingRecord) -> String {
    let mut out = format!(
        "# input_scaling {} {}\n# target_scaling {} {}\nx,y,provenance\n",
        scaling.input.offset, scaling.input.span, scaling.target.offset, scaling.target.span
    );
    for s in samples {
        out.push_str(&format!("{},{},{}\n", s.x, s.y, s.provenance));
    }
    out
}

/// Inverse of [`normalized_csv`].
pub fn parse_normalized_csv(text: &str) -> Result<(Vec<NormalizedSample>, ScalingRecord)> {
    let mut input = None;
    let mut target = None;
    let mut samples = Vec::new();
    let mut header = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let bad = |message: String| Error::Parse { line: i + 1, message };
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let f: Vec<&str> = comment.split_whitespace().collect();
            if let [key @ ("input_scaling" | "target_scaling"), o, s] = f[..] {
                let num = |v: &str| v.parse::<f64>().map_err(|_| bad(format!("bad number {v:?}")));
                let sc = Scaling {
                    offset: num(o)?,
                    span: num(s)?,
                };
                if key == "input_scaling" {
                    input = Some(sc);
                } else {
                    target = Some(sc);
                }
            }
            continue;
        }
        if !header {
            if line != "x,y,provenance" {
                return Err(bad("expected header `x,y,provenance`".into()));
            }
            header = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let [x, y, p] = f[..] else {
            return Err(bad(format!("expected 3 fields, found {}", f.len())));
        };
        let num = |v: &str| v.parse::<f64>().map_err(|_| bad(format!("bad number {v:?}")));
        let provenance = match p {
            "augmented" => Provenance::Augmented,
            _ => Provenance::Observation(
                p.parse().map_err(|_| bad(format!("bad provenance {p:?}")))?,
            ),
        };
        samples.push(NormalizedSample {
            x: num(x)?,
            y: num(y)?,
            provenance,
        });
    }
    let (Some(input), Some(target)) = (input, target) else {
        return Err(Error::Parse {
            line: 1,
            message: "missing `# input_scaling` or `# target_scaling` line".into(),
        });
    };
    if samples.is_empty() {
        return Err(Error::InvalidArgument("empty dataset".into()));
    }
    Ok((samples, ScalingRecord { input, target }))
}
