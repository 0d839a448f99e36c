//! Exact two-body time/angle relation and synthetic catalogs built from it.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::ephemeris::{ClockTime, Observation, OldStyleDate, Residual, Sign};
use crate::error::{Error, Result};

const MAX_NEWTON_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitSpec {
    pub eps: f64,
    /// Semi-latus rectum, AU.
    pub l: f64,
    /// Period, days.
    pub period: f64,
    /// Phase offset, radians: true anomaly = longitude + phi0.
    pub phi0: f64,
}

impl OrbitSpec {
    /// Mars with modern elements and Tycho's 687-day period.
    pub const MARS: OrbitSpec = OrbitSpec {
        eps: 0.0934,
        l: 1.5104,
        period: 687.0,
        phi0: 0.544536,
    };

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.eps) {
            return Err(Error::NotAnEllipse(self.eps));
        }
        if !(self.l > 0.0 && self.period > 0.0 && self.phi0.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "orbit needs l > 0 and T > 0, got l={} T={}",
                self.l, self.period
            )));
        }
        Ok(())
    }

    /// Heliocentric distance at true anomaly `nu`.
    pub fn radius(&self, nu: f64) -> f64 {
        self.l / (1.0 + self.eps * nu.cos())
    }

    /// `dt/dnu` in days per radian.
    pub fn time_derivative(&self, nu: f64) -> f64 {
        let e = self.eps;
        let q = 1.0 + e * nu.cos();
        self.period / TAU * (1.0 - e * e).powf(1.5) / (q * q)
    }
}

/// Time since perihelion for true anomaly `theta`. Whole revolutions add
/// whole periods, so the result is continuous and increasing in `theta`.
pub fn time_of_angle(theta: f64, spec: &OrbitSpec) -> f64 {
    let turns = (theta / TAU).floor();
    let phi = theta - turns * TAU;
    spec.period * turns + time_in_period(phi, spec)
}

/// `phi` in `[0, 2pi]`. The half-angle form keeps the inverse tangent on a
/// single branch across the whole orbit.
fn time_in_period(phi: f64, spec: &OrbitSpec) -> f64 {
    let e = spec.eps;
    let half = 0.5 * phi;
    let ecc_anomaly = 2.0 * ((1.0 - e).sqrt() * half.sin()).atan2((1.0 + e).sqrt() * half.cos());
    let mean_anomaly =
        ecc_anomaly - e * (1.0 - e * e).sqrt() * phi.sin() / (1.0 + e * phi.cos());
    spec.period / TAU * mean_anomaly
}

/// Inverse of [`time_of_angle`] by Newton steps kept inside a bisection
/// bracket. Converges when `|t(theta) - t| <= tol * T`.
pub fn angle_of_time(t: f64, spec: &OrbitSpec, tol: f64) -> Result<f64> {
    let turns = (t / spec.period).floor();
    let tau = t - turns * spec.period;
    let (mut lo, mut hi) = (0.0, TAU);
    // Mean anomaly is a good first guess for small eccentricity.
    let mut x = TAU * tau / spec.period;
    for _ in 0..MAX_NEWTON_ITERATIONS {
        let f = time_in_period(x, spec) - tau;
        if f.abs() <= tol * spec.period {
            // A time tolerance is loose in angle near perihelion of eccentric
            // orbits; one more Newton step costs little.
            let last = x - f / spec.time_derivative(x);
            let better = last > lo
                && last < hi
                && (time_in_period(last, spec) - tau).abs() < f.abs();
            return Ok(if better { last } else { x } + turns * TAU);
        }
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - f / spec.time_derivative(x);
        x = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * TAU {
            return Ok(x + turns * TAU);
        }
    }
    Err(Error::Numeric(format!(
        "angle_of_time did not converge for t={t} eps={}",
        spec.eps
    )))
}

pub fn angle_of_time_default(t: f64, spec: &OrbitSpec) -> Result<f64> {
    angle_of_time(t, spec, 1e-12)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Noise {
    /// Standard deviation of longitude noise, arcseconds.
    pub theta_arcsec: f64,
    /// Relative standard deviation of distance noise.
    pub r_relative: f64,
}

impl Noise {
    pub const NONE: Noise = Noise {
        theta_arcsec: 0.0,
        r_relative: 0.0,
    };
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n: usize,
    pub noise: Noise,
    pub seed: u64,
    /// Old-style date of the first day; times are counted from its midnight.
    pub epoch: OldStyleDate,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n: 28,
            noise: Noise::NONE,
            seed: 0,
            epoch: OldStyleDate {
                year: 1582,
                month: 11,
                day: 23,
            },
        }
    }
}

/// `n` observations at uniform random minutes in `[0, T)` after the epoch,
/// in time order. The perihelion passage is taken at the epoch. Longitudes
/// are `true anomaly - phi0`, so a fit of `l/(1 + eps cos(theta + D))`
/// recovers `D = phi0`.
pub fn synth_catalog(spec: &OrbitSpec, config: &SynthConfig) -> Result<Vec<Observation>> {
    spec.validate()?;
    if config.n == 0 {
        return Err(Error::InvalidArgument("need at least one observation".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let minutes_per_period = (spec.period * 1440.0).floor() as u64;
    let mut minutes: Vec<u64> = (0..config.n)
        .map(|_| rng.random_range(0..minutes_per_period))
        .collect();
    minutes.sort_unstable();
    let theta_noise = Normal::new(0.0, config.noise.theta_arcsec.max(0.0) / 3600.0)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let r_noise = Normal::new(0.0, config.noise.r_relative.max(0.0))
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let epoch_jdn = config.epoch.julian_day_number();

    minutes
        .into_iter()
        .map(|m| {
            let t = m as f64 / 1440.0;
            let nu = angle_of_time_default(t, spec)?;
            let r = spec.radius(nu) * (1.0 + r_noise.sample(&mut rng));
            let longitude = (nu - spec.phi0).to_degrees() + theta_noise.sample(&mut rng);
            let day = (m / 1440) as i64;
            let minute_of_day = (m % 1440) as u32;
            Ok(Observation {
                date: OldStyleDate::from_julian_day_number(epoch_jdn + day),
                clock: ClockTime {
                    hour: minute_of_day / 60,
                    minute: minute_of_day % 60,
                },
                theta_deg: longitude.rem_euclid(360.0) % 360.0,
                r_au: r,
                residual: Residual {
                    sign: Sign::Unsigned,
                    minutes: 0,
                    seconds: 0,
                },
                theta_decimals: 10,
                r_decimals: 12,
            })
        })
        .collect()
}

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(eps: f64) -> OrbitSpec {
        OrbitSpec {
            eps,
            ..OrbitSpec::MARS
        }
    }

    #[test]
    fn anchor_points() {
        for e in [0.0, 0.0934, 0.5, 0.9] {
            let s = spec(e);
            assert_eq!(time_of_angle(0.0, &s), 0.0);
            assert!((time_of_angle(PI, &s) - s.period / 2.0).abs() < 1e-9);
            assert_eq!(time_of_angle(TAU, &s), s.period);
            assert!((angle_of_time_default(s.period, &s).unwrap() - TAU).abs() < 1e-12);
        }
        let c = spec(0.0);
        for th in [0.3, 1.0, 2.5, 4.0, 6.0] {
            assert!((time_of_angle(th, &c) - c.period * th / TAU).abs() < 1e-10);
        }
        let q = angle_of_time_default(c.period / 4.0, &c).unwrap();
        assert!((q - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn monotone_over_the_orbit() {
        for e in [0.0, 0.3, 0.7, 0.95] {
            let s = spec(e);
            let mut prev = -1.0;
            for i in 0..=4000 {
                let t = time_of_angle(TAU * i as f64 / 4000.0, &s);
                assert!(t > prev, "eps {e} step {i}");
                prev = t;
            }
        }
    }

    #[test]
    fn noiseless_catalog_lies_on_the_conic() {
        let s = OrbitSpec {
            eps: 0.0934,
            l: 1.5104,
            period: 687.0,
            phi0: 0.544536,
        };
        let cat = synth_catalog(&s, &SynthConfig::default()).unwrap();
        assert_eq!(cat.len(), 28);
        for o in &cat {
            let nu = o.theta_rad() + s.phi0;
            assert!((o.r_au * (1.0 + s.eps * nu.cos()) - s.l).abs() < 1e-12);
        }
        let circle = synth_catalog(&spec(0.0), &SynthConfig::default()).unwrap();
        assert!(circle.iter().all(|o| o.r_au == circle[0].r_au));
    }

    #[test]
    fn round_trips_to_angle_precision() {
        for e in [0.0, 0.0934, 0.5, 0.9] {
            let s = spec(e);
            for i in 0..1000 {
                let th = TAU * (i as f64 + 0.37) / 1000.0;
                let t = time_of_angle(th, &s);
                let back = angle_of_time_default(t, &s).unwrap();
                assert!((back - th).abs() <= 1e-10, "eps {e} theta {th}: {back}");
                assert!((time_of_angle(back, &s) - t).abs() <= 1e-12 * s.period);
            }
        }
    }

    #[test]
    fn finite_difference_areal_rate_is_constant() {
        let s = spec(0.5);
        let h = 2e-3;
        let at = |t: f64| angle_of_time_default(t, &s).unwrap();
        let rates: Vec<f64> = (0..200)
            .map(|i| {
                let t = s.period * (i as f64 + 0.5) / 200.0;
                let r = s.radius(at(t));
                r * r * (at(t + h) - at(t - h)) / (2.0 * h)
            })
            .collect();
        let exact = TAU * s.l * s.l / (s.period * (1.0 - s.eps * s.eps).powf(1.5));
        for r in rates {
            assert!(((r - exact) / exact).abs() < 1e-9, "{r} vs {exact}");
        }
    }

    #[test]
    fn bad_orbits_are_rejected() {
        assert!(spec(1.0).validate().is_err());
        assert!(OrbitSpec { l: 0.0, ..OrbitSpec::MARS }.validate().is_err());
    }
}
