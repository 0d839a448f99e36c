//! Physical reading of the selected laws: conic elements of the orbit, the
//! r³ω² constant and its relation to the period form of Kepler's third law.

use std::f64::consts::{PI, TAU};
use std::fmt::{self, Write as _};

use crate::augment::AugmentedPoint;
use crate::error::{Error, Result};
use crate::expr::{BinaryOp, Expr, UnaryOp};
use crate::oracle::wrap_angle;

pub const KEPLER_ECCENTRICITY: f64 = 0.09264;
pub const MODERN_ECCENTRICITY: f64 = 0.093_412_33;
pub const MODERN_SEMI_MAJOR_AXIS: f64 = 1.523_662_31;
/// GM of the Sun in AU³/day².
pub const SOLAR_GM: f64 = 2.96e-4;
pub const KEPLER_THIRD_LAW_CONSTANT: f64 = 7.5e-6;
pub const MODERN_THIRD_LAW_CONSTANT: f64 = 7.495e-6;

const MONTHS: [&str; 12] = [
    "January", "February", "March", "April", "May", "June", "July", "August", "September",
    "October", "November", "December",
];
/// Day of year (1-based, common year) of the September equinox.
const FALL_EQUINOX_DAY: f64 = 266.0;

/// Focus-centred polar conic `r = l / (1 + eps cos(theta + phi0))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConicFit {
    pub l: f64,
    pub eps: f64,
    pub phi0: f64,
}

impl ConicFit {
    pub fn radius(&self, theta: f64) -> f64 {
        self.l / (1.0 + self.eps * (theta + self.phi0).cos())
    }

    /// `A/(B + C*cos(x0 + D))` with `B = 1`.
    pub fn to_expr(&self) -> Expr {
        Expr::div(
            Expr::Const(self.l),
            Expr::add(
                Expr::Const(1.0),
                Expr::mul(
                    Expr::Const(self.eps),
                    Expr::cos(Expr::add(Expr::Var(0), Expr::Const(self.phi0))),
                ),
            ),
        )
    }

    pub fn perihelion(&self) -> f64 {
        self.l / (1.0 + self.eps)
    }

    pub fn aphelion(&self) -> f64 {
        self.l / (1.0 - self.eps)
    }
}

fn not_conic(expr: &Expr, why: &str) -> Error {
    Error::NotAConic(format!("{expr} ({why})"))
}

/// Reads `A/(B + C*cos(x + D))` off an expression tree after constant
/// folding. Sums may appear in either order or as differences, `C` may sit on
/// either side of the product (or be absent), and the divisor may be a
/// product with a constant. Trees that fail this match are accepted when
/// they contain a single cosine of `±x + D` and their reciprocal is affine in
/// it, which covers unsimplified search output. The result has `eps >= 0`
/// and `phi0` in `(-pi, pi]`.
pub fn to_standard_conic(expr: &Expr) -> Result<ConicFit> {
    let (l, eps, phi0) = match syntactic_conic(expr) {
        Ok(v) => v,
        Err(e) => numeric_conic(expr).ok_or(e)?,
    };
    normalise_conic(expr, l, eps, phi0)
}

fn syntactic_conic(expr: &Expr) -> Result<(f64, f64, f64)> {
    let folded = expr.fold_constants();
    let Expr::Binary(BinaryOp::Div, num, den) = &folded else {
        return Err(not_conic(expr, "top level is not a quotient"));
    };
    let Expr::Const(a) = **num else {
        return Err(not_conic(expr, "numerator is not a constant"));
    };
    let (b, c, d) = match_denominator(den).ok_or_else(|| not_conic(expr, "denominator shape"))?;
    if b == 0.0 || !b.is_finite() {
        return Err(not_conic(expr, "zero constant term"));
    }
    Ok((a / b, c / b, d))
}

/// `(l, eps, phi0)` from sampling the tree on a full turn.
fn numeric_conic(expr: &Expr) -> Option<(f64, f64, f64)> {
    if expr.max_variable() != Some(0) {
        return None;
    }
    let mut args = Vec::new();
    expr.visit(&mut |e| {
        if let Expr::Unary(UnaryOp::Cos, a) = e {
            args.push((**a).clone());
        }
    });
    let [arg] = &args[..] else { return None };
    let at = |e: &Expr, x: f64| e.evaluate(&[x]).ok().map(|v| v.value()).filter(|v| v.is_finite());
    let d0 = at(arg, 0.0)?;
    let slope = at(arg, 1.0)? - d0;
    let sign = if (slope - 1.0).abs() < 1e-9 {
        1.0
    } else if (slope + 1.0).abs() < 1e-9 {
        -1.0
    } else {
        return None;
    };
    // cos(-x + D) = cos(x - D)
    let phase = sign * d0;
    let n = 24;
    let mut pts = Vec::with_capacity(n);
    for i in 0..n {
        let x = TAU * (i as f64 + 0.37) / n as f64;
        if (at(arg, x)? - (sign * x + d0)).abs() > 1e-9 * (1.0 + x.abs() + d0.abs()) {
            return None;
        }
        pts.push(((x + phase).cos(), 1.0 / at(expr, x)?));
    }
    // Least squares for 1/f = p + q u.
    let m = n as f64;
    let (su, sg) = pts.iter().fold((0.0, 0.0), |(a, b), (u, g)| (a + u, b + g));
    let (mu, mg) = (su / m, sg / m);
    let (suu, sug) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (u, g)| (a + (u - mu).powi(2), b + (u - mu) * (g - mg)));
    let q = sug / suu;
    let p = mg - q * mu;
    let scale = pts.iter().map(|(_, g)| g.abs()).fold(0.0, f64::max);
    if pts.iter().any(|(u, g)| (p + q * u - g).abs() > 1e-9 * scale) || p == 0.0 {
        return None;
    }
    Some((1.0 / p, q / p, phase))
}

fn normalise_conic(expr: &Expr, l: f64, eps: f64, phi0: f64) -> Result<ConicFit> {
    let (mut l, mut eps, mut phi0) = (l, eps, phi0);
    if eps < 0.0 {
        eps = -eps;
        phi0 += PI;
    }
    if l < 0.0 {
        // Both A/B and the curve are negative: not a distance.
        return Err(not_conic(expr, "negative semi-latus rectum"));
    }
    if eps >= 1.0 {
        return Err(Error::NotAnEllipse(eps));
    }
    l = l.abs();
    phi0 = wrap_angle(phi0);
    Ok(ConicFit { l, eps, phi0 })
}

/// `(B, C, D)` of `B + C*cos(x + D)`, also accepting `k * (...)` and
/// `(...) / k`.
fn match_denominator(e: &Expr) -> Option<(f64, f64, f64)> {
    match e {
        Expr::Binary(op @ (BinaryOp::Add | BinaryOp::Sub), l, r) => {
            let sign = if *op == BinaryOp::Sub { -1.0 } else { 1.0 };
            if let (Expr::Const(b), Some((c, d))) = (&**l, match_cos_term(r)) {
                return Some((*b, sign * c, d));
            }
            if let (Some((c, d)), Expr::Const(b)) = (match_cos_term(l), &**r) {
                return Some((sign * b, c, d));
            }
            None
        }
        Expr::Binary(BinaryOp::Mul, l, r) => match (&**l, &**r) {
            (Expr::Const(k), inner) | (inner, Expr::Const(k)) => {
                let (b, c, d) = match_denominator(inner)?;
                Some((k * b, k * c, d))
            }
            _ => None,
        },
        Expr::Binary(BinaryOp::Div, l, r) => match **r {
            Expr::Const(k) => {
                let (b, c, d) = match_denominator(l)?;
                Some((b / k, c / k, d))
            }
            _ => None,
        },
        _ => None,
    }
}

/// `(C, D)` of `C*cos(x + D)`.
fn match_cos_term(e: &Expr) -> Option<(f64, f64)> {
    match e {
        Expr::Unary(UnaryOp::Cos, arg) => Some((1.0, match_phase(arg)?)),
        Expr::Binary(BinaryOp::Mul, l, r) => match (&**l, &**r) {
            (Expr::Const(c), other) | (other, Expr::Const(c)) => {
                let (k, d) = match_cos_term(other)?;
                Some((c * k, d))
            }
            _ => None,
        },
        Expr::Binary(BinaryOp::Div, l, r) => match **r {
            Expr::Const(k) => {
                let (c, d) = match_cos_term(l)?;
                Some((c / k, d))
            }
            _ => None,
        },
        _ => None,
    }
}

/// `D` of `x + D`, `D + x`, `x - D` or `D - x` (cosine is even).
fn match_phase(e: &Expr) -> Option<f64> {
    match e {
        Expr::Var(_) => Some(0.0),
        Expr::Binary(op @ (BinaryOp::Add | BinaryOp::Sub), l, r) => match (&**l, &**r, op) {
            (Expr::Var(_), Expr::Const(d), BinaryOp::Add) => Some(*d),
            (Expr::Const(d), Expr::Var(_), BinaryOp::Add) => Some(*d),
            (Expr::Var(_), Expr::Const(d), BinaryOp::Sub) => Some(-*d),
            (Expr::Const(d), Expr::Var(_), BinaryOp::Sub) => Some(-*d),
            _ => None,
        },
        _ => None,
    }
}

/// A computed value against a reference.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub name: String,
    pub value: f64,
    pub reference_name: String,
    pub reference: f64,
}

impl Comparison {
    pub fn new(name: &str, value: f64, reference_name: &str, reference: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            reference_name: reference_name.to_string(),
            reference,
        }
    }

    pub fn relative_error(&self) -> f64 {
        ((self.value - self.reference) / self.reference).abs()
    }
}

pub fn eccentricity_report(fit: &ConicFit) -> [Comparison; 2] {
    [
        Comparison::new("eccentricity", fit.eps, "Kepler", KEPLER_ECCENTRICITY),
        Comparison::new("eccentricity", fit.eps, "modern", MODERN_ECCENTRICITY),
    ]
}

/// `a = l / (1 - eps²)`.
pub fn semi_major_axis(fit: &ConicFit) -> Result<f64> {
    if !(0.0..1.0).contains(&fit.eps) {
        return Err(Error::NotAnEllipse(fit.eps));
    }
    Ok(fit.l / (1.0 - fit.eps * fit.eps))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerihelionSeason {
    pub days_before_equinox: f64,
    /// Calendar month of the perihelion passage, counted back from the
    /// September equinox.
    pub month: &'static str,
}

/// Distance in days (at `days_per_year`) between the perihelion direction
/// and the equinox direction, `|phi0| / 2pi` of a year.
pub fn perihelion_season(fit: &ConicFit, days_per_year: f64) -> PerihelionSeason {
    let days = fit.phi0.abs() / TAU * days_per_year;
    let doy = (FALL_EQUINOX_DAY - days).rem_euclid(365.0);
    let lengths = [31.0, 28.0, 31.0, 30.0, 31.0, 30.0, 31.0, 31.0, 30.0, 31.0, 30.0, 31.0];
    let mut acc = 0.0;
    let mut month = MONTHS[11];
    for (name, len) in MONTHS.iter().zip(lengths) {
        acc += len;
        if doy < acc {
            month = name;
            break;
        }
    }
    PerihelionSeason {
        days_before_equinox: days,
        month,
    }
}

/// `omega^2 = c * r^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub c: f64,
    pub exponent: i32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawStats {
    /// `c` as the mean of `r³ω²`.
    pub law: PowerLaw,
    /// Relative standard deviation of `r³ω²`.
    pub dispersion: f64,
    pub areal_rate: f64,
    /// Relative standard deviation of `r²ω`.
    pub areal_dispersion: f64,
    pub points: usize,
}

fn mean_and_relstd(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt() / mean.abs())
}

/// Mean and population relative spread of `r³ω²` and of `r²ω`.
pub fn power_law_constant(points: &[AugmentedPoint]) -> Result<PowerLawStats> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least two kinematic points, got {}",
            points.len()
        )));
    }
    if let Some(p) = points.iter().find(|p| !(p.r > 0.0 && p.omega > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "point with r={} omega={} is not prograde",
            p.r, p.omega
        )));
    }
    let (c, dispersion) = mean_and_relstd(points.iter().map(|p| p.r3 * p.w2));
    let (h, areal_dispersion) = mean_and_relstd(points.iter().map(AugmentedPoint::areal_rate));
    Ok(PowerLawStats {
        law: PowerLaw { c, exponent: -3 },
        dispersion,
        areal_rate: h,
        areal_dispersion,
        points: points.len(),
    })
}

/// Reads `c * prod(var^±1)` off an expression, `powers[k]` being the power
/// of `r` that variable `k` stands for.
pub fn power_law_from_expr(expr: &Expr, powers: &[i32]) -> Option<PowerLaw> {
    fn monomial(e: &Expr, powers: &[i32]) -> Option<(f64, i32)> {
        match e {
            Expr::Const(c) => Some((*c, 0)),
            Expr::Var(k) => Some((1.0, *powers.get(*k)?)),
            Expr::Binary(BinaryOp::Mul, l, r) => {
                let (a, p) = monomial(l, powers)?;
                let (b, q) = monomial(r, powers)?;
                Some((a * b, p + q))
            }
            Expr::Binary(BinaryOp::Div, l, r) => {
                let (a, p) = monomial(l, powers)?;
                let (b, q) = monomial(r, powers)?;
                Some((a / b, p - q))
            }
            _ => None,
        }
    }
    let (c, exponent) = monomial(&expr.fold_constants(), powers)?;
    (c.is_finite() && c != 0.0).then_some(PowerLaw { c, exponent })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentripetalForm {
    pub c: f64,
    pub perihelion_au: f64,
    pub aphelion_au: f64,
    pub a_perihelion: f64,
    pub a_aphelion: f64,
}

impl CentripetalForm {
    /// `a = r ω² = c / r²`, AU/day².
    pub fn acceleration(&self, r: f64) -> f64 {
        self.c / (r * r)
    }
}

pub fn centripetal_form(law: &PowerLaw, perihelion_au: f64, aphelion_au: f64) -> CentripetalForm {
    let a = |r: f64| law.c / (r * r);
    CentripetalForm {
        c: law.c,
        perihelion_au,
        aphelion_au,
        a_perihelion: a(perihelion_au),
        a_aphelion: a(aphelion_au),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeplerBridge {
    /// `c / 4pi²`, AU³/day².
    pub constant: f64,
    pub comparisons: [Comparison; 2],
}

pub fn kepler3_bridge(law: &PowerLaw) -> KeplerBridge {
    let constant = law.c / (4.0 * PI * PI);
    KeplerBridge {
        constant,
        comparisons: [
            Comparison::new("c/4pi^2", constant, "Kepler", KEPLER_THIRD_LAW_CONSTANT),
            Comparison::new("c/4pi^2", constant, "modern", MODERN_THIRD_LAW_CONSTANT),
        ],
    }
}

/// Everything the interpretation stage found.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Interpretation {
    pub first_law_expr: Option<String>,
    pub first_law_rmse: Option<f64>,
    pub conic: Option<ConicFit>,
    pub conic_error: Option<String>,
    pub second_law_expr: Option<String>,
    pub second_law_rmse: Option<f64>,
    /// Power law read off the selected expression, when it is a monomial.
    pub selected_law: Option<PowerLaw>,
    pub stats: Option<PowerLawStats>,
}

impl Interpretation {
    /// The r³ω² constant used downstream: the selected expression's constant
    /// when it is `c/r³`, otherwise the point mean.
    pub fn headline_c(&self) -> Option<f64> {
        match self.selected_law {
            Some(l) if l.exponent == -3 => Some(l.c),
            _ => self.stats.map(|s| s.law.c),
        }
    }

    pub fn comparisons(&self) -> Vec<Comparison> {
        let mut out = Vec::new();
        if let Some(fit) = &self.conic {
            out.extend(eccentricity_report(fit));
            if let Ok(a) = semi_major_axis(fit) {
                out.push(Comparison::new("semi_major_axis", a, "modern", MODERN_SEMI_MAJOR_AXIS));
            }
        }
        if let Some(s) = &self.stats {
            out.push(Comparison::new("r3w2_mean", s.law.c, "GM", SOLAR_GM));
        }
        if let Some(l) = &self.selected_law {
            if l.exponent == -3 {
                out.push(Comparison::new("c_selected", l.c, "GM", SOLAR_GM));
            }
        }
        if let Some(c) = self.headline_c() {
            out.extend(kepler3_bridge(&PowerLaw { c, exponent: -3 }).comparisons);
        }
        out
    }

    /// `name,value,reference_name,reference,relative_error`, plus reference-free
    /// constants with empty reference columns.
    pub fn constants_csv(&self) -> String {
        let mut out = String::from("name,value,reference_name,reference,relative_error\n");
        let mut bare = |name: &str, v: f64| {
            let _ = writeln!(out, "{name},{v},,,");
        };
        if let Some(f) = &self.conic {
            bare("l", f.l);
            bare("eps", f.eps);
            bare("phi0", f.phi0);
            bare("perihelion_days_before_equinox", perihelion_season(f, 365.0).days_before_equinox);
        }
        if let Some(s) = &self.stats {
            bare("r3w2_dispersion", s.dispersion);
            bare("r2w_mean", s.areal_rate);
            bare("r2w_dispersion", s.areal_dispersion);
        }
        if let Some(l) = &self.selected_law {
            bare("selected_c", l.c);
            bare("selected_exponent", l.exponent as f64);
        }
        if let Some(c) = self.headline_c() {
            bare("c", c);
        }
        for c in self.comparisons() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                c.name,
                c.value,
                c.reference_name,
                c.reference,
                c.relative_error()
            );
        }
        out
    }
}

fn pct(x: f64) -> String {
    format!("{:.3}%", 100.0 * x)
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "First law: distance against longitude")?;
        if let Some(e) = &self.first_law_expr {
            writeln!(f, "  selected expression  r(theta) = {e}")?;
        }
        if let Some(r) = self.first_law_rmse {
            writeln!(f, "  rmse vs network      {r:.6e}")?;
        }
        match (&self.conic, &self.conic_error) {
            (Some(c), _) => {
                writeln!(f, "  standard form        r = {:.6} / (1 + {:.7} cos(theta + {:.6}))", c.l, c.eps, c.phi0)?;
                for cmp in eccentricity_report(c) {
                    writeln!(f, "  eccentricity vs {:<8} {} (relative error {})", cmp.reference_name, cmp.reference, pct(cmp.relative_error()))?;
                }
                if let Ok(a) = semi_major_axis(c) {
                    writeln!(f, "  semi-major axis      {a:.6} AU (modern {MODERN_SEMI_MAJOR_AXIS}, relative error {})", pct(((a - MODERN_SEMI_MAJOR_AXIS) / MODERN_SEMI_MAJOR_AXIS).abs()))?;
                }
                let s = perihelion_season(c, 365.0);
                writeln!(f, "  perihelion direction {:.1} days before the fall equinox (Earth passes it in {})", s.days_before_equinox, s.month)?;
            }
            (None, Some(err)) => writeln!(f, "  not a conic: {err}")?,
            (None, None) => {}
        }
        writeln!(f)?;
        writeln!(f, "Angular velocity against distance")?;
        if let Some(e) = &self.second_law_expr {
            writeln!(f, "  selected expression  w^2 = {e}")?;
        }
        if let Some(r) = self.second_law_rmse {
            writeln!(f, "  rmse                 {r:.6e}")?;
        }
        if let Some(l) = &self.selected_law {
            writeln!(f, "  power law            w^2 = {:.6e} * r^{}", l.c, l.exponent)?;
            if l.exponent == -4 && l.c > 0.0 {
                writeln!(f, "  equivalent to        r^2 w = {:.6e} AU^2/day, the areal-rate law", l.c.sqrt())?;
            }
            if l.exponent != -3 {
                writeln!(f, "  the selected law is not c/r^3; the r^3 w^2 constant below is the point mean")?;
            }
        }
        if let Some(s) = &self.stats {
            writeln!(f, "  mean r^3 w^2         {:.6e} AU^3/day^2 over {} points (spread {})", s.law.c, s.points, pct(s.dispersion))?;
            writeln!(f, "  vs GM {SOLAR_GM:e}       relative error {}", pct(((s.law.c - SOLAR_GM) / SOLAR_GM).abs()))?;
            writeln!(f, "  mean r^2 w           {:.6e} AU^2/day (spread {})", s.areal_rate, pct(s.areal_dispersion))?;
            writeln!(f, "  r^2 w is the conserved quantity of an ellipse (equal areas in equal times);")?;
            writeln!(f, "  r^3 w^2 varies at order eps, so its small spread reflects the small eccentricity.")?;
        }
        if let Some(c) = self.headline_c() {
            let law = PowerLaw { c, exponent: -3 };
            if let Some(s) = &self.conic {
                let cf = centripetal_form(&law, s.perihelion(), s.aphelion());
                writeln!(f, "  centripetal form     a = r w^2 = c / r^2, an inverse-square attraction")?;
                writeln!(f, "  a at perihelion      {:.6e} AU/day^2 (r = {:.5} AU)", cf.a_perihelion, cf.perihelion_au)?;
                writeln!(f, "  a at aphelion        {:.6e} AU/day^2 (r = {:.5} AU)", cf.a_aphelion, cf.aphelion_au)?;
            }
            let b = kepler3_bridge(&law);
            writeln!(f, "  c / 4pi^2            {:.6e} AU^3/day^2", b.constant)?;
            for cmp in &b.comparisons {
                writeln!(f, "    vs {:<8} {:e} relative error {}", cmp.reference_name, cmp.reference, pct(cmp.relative_error()))?;
            }
            writeln!(f, "  Caveat: with a single planet this constant should not be interpreted as")?;
            writeln!(f, "  Kepler's third law, which relates periods and axes across planets.")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn fit(text: &str) -> ConicFit {
        to_standard_conic(&parse(text).unwrap()).unwrap()
    }

    #[test]
    fn reads_the_first_law() {
        let f = fit("1.51977/(1.00625+0.0932972*cos(x+0.544536))");
        assert!((f.l - 1.51977 / 1.00625).abs() < 1e-12);
        assert!((f.eps - 0.0932972 / 1.00625).abs() < 1e-12);
        assert_eq!(f.phi0, 0.544536);
        let g = fit("1.51033/(1 + 0.0927177*cos(x + 0.544536))");
        assert_eq!((g.l, g.eps, g.phi0), (1.51033, 0.0927177, 0.544536));
    }

    #[test]
    fn tolerates_shape_variants() {
        let base = fit("1.5/(1 + 0.1*cos(x + 0.5))");
        for text in [
            "1.5/(cos(x + 0.5)*0.1 + 1)",
            "1.5/(1 - -0.1*cos(0.5 + x))",
            "3/(2 + 0.2*cos(x - -0.5))",
            "-1.5/(-1 - 0.1*cos(x + 0.5))",
            "1.5/(1 - 0.1*cos(x + 3.641592653589793))",
            "1.5/((1 + 0.1*cos(x + 0.5))*1)",
        ] {
            let f = fit(text);
            assert!((f.l - base.l).abs() < 1e-12, "{text}");
            assert!((f.eps - base.eps).abs() < 1e-12, "{text}");
            assert!((f.phi0 - base.phi0).abs() < 1e-12, "{text}: {}", f.phi0);
        }
        let circle = fit("2/(4 + 0*cos(x))");
        assert_eq!((circle.l, circle.eps), (0.5, 0.0));
        assert!(to_standard_conic(&parse("1.5/(1 + 0.1*sin(x))").unwrap()).is_err());
        assert!(to_standard_conic(&parse("x*1.5").unwrap()).is_err());
        assert!(to_standard_conic(&parse("1.5 - 0.1*cos(x + 0.5)").unwrap()).is_err());
        assert!(to_standard_conic(&parse("1.5/(1 + 0.1*cos(2*x + 0.5))").unwrap()).is_err());
        assert!(matches!(
            to_standard_conic(&parse("1/(1 + 2*cos(x))").unwrap()),
            Err(Error::NotAnEllipse(_))
        ));
    }

    #[test]
    fn unsimplified_trees_are_read_numerically() {
        let base = fit("1.5/(1 + 0.1*cos(x + 0.5))");
        for text in [
            "15/(10 + cos(29.5 + x - 29))",
            "15/(10 + cos(-29.5 - x + 29))",
            "-0.15/((-0.1 - 0.01*cos(x + 0.5))/(1 + 0*x))",
            "1.5/(0.3 + 0.1*cos(x + 0.5) + 0.7)",
        ] {
            let f = fit(text);
            assert!((f.l - base.l).abs() < 1e-9, "{text}");
            assert!((f.eps - base.eps).abs() < 1e-9, "{text}");
            assert!((f.phi0 - base.phi0).abs() < 1e-9, "{text}: {}", f.phi0);
        }
    }

    #[test]
    fn orbital_elements() {
        let f = ConicFit {
            l: 1.51033,
            eps: 0.0927177,
            phi0: 0.544536,
        };
        assert!((semi_major_axis(&f).unwrap() - 1.52341).abs() < 5e-5);
        let [kepler, modern] = eccentricity_report(&f);
        assert!((kepler.relative_error() - 0.00083).abs() < 5e-5);
        assert!((modern.relative_error() - 0.0074).abs() < 5e-4);
        let s = perihelion_season(&ConicFit { phi0: -0.544536, ..f }, 365.0);
        assert!((s.days_before_equinox - 31.63).abs() < 0.01);
        assert_eq!(s.month, "August");
        let quarter = perihelion_season(&ConicFit { phi0: -PI / 2.0, ..f }, 365.0);
        assert!((quarter.days_before_equinox - 91.25).abs() < 1e-12);
        assert!(semi_major_axis(&ConicFit { eps: 1.0, ..f }).is_err());
    }

    #[test]
    fn power_law_reading() {
        let powers = [1, 2, 3];
        let e = parse("0.000298491/x2").unwrap();
        assert_eq!(
            power_law_from_expr(&e, &powers),
            Some(PowerLaw {
                c: 0.000298491,
                exponent: -3
            })
        );
        let e = parse("0.0003/(x0*x2)").unwrap();
        assert_eq!(power_law_from_expr(&e, &powers).unwrap().exponent, -4);
        assert!(power_law_from_expr(&parse("0.0003 - x0").unwrap(), &powers).is_none());
        let b = kepler3_bridge(&PowerLaw {
            c: 2.98491e-4,
            exponent: -3,
        });
        assert!((b.constant - 7.56086e-6).abs() < 5e-11);
    }

    #[test]
    fn circular_points_have_no_spread() {
        let pts: Vec<AugmentedPoint> = (0..5)
            .map(|i| AugmentedPoint::new(Some(i as f64), 0.1 * i as f64, 1.5, 0.01))
            .collect();
        let s = power_law_constant(&pts).unwrap();
        assert_eq!(s.dispersion, 0.0);
        assert!((s.law.c - 1.5f64.powi(3) * 1e-4).abs() < 1e-15);
        assert!(power_law_constant(&pts[..1]).is_err());
    }
}
