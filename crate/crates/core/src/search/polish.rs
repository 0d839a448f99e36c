//! Levenberg-Marquardt refinement of an expression's constants against a
//! dataset, with a central-difference Jacobian.

use super::Dataset;
use crate::expr::Expr;

/// Returns the expression with refined constants and its rmse on `data`.
/// The input is returned unchanged when no step improves the fit.
pub fn fit_constants(expr: &Expr, data: &Dataset, max_iter: usize) -> (Expr, f64) {
    let mut best = expr.clone();
    let mut c = expr.constants();
    let Some(mut res) = residuals(&best, data) else {
        return (best, f64::INFINITY);
    };
    let mut sse = sum_sq(&res);
    if c.is_empty() || max_iter == 0 || sse == 0.0 {
        return (best, rmse_of(sse, data));
    }
    let k = c.len();
    let n = data.rows();
    let mut trial = best.clone();
    let mut mu = 1.0;
    let mut jac = vec![0.0; k * n];

    'outer: for _ in 0..max_iter {
        if !jacobian(&mut trial, &c, data, &mut jac) {
            break;
        }
        let mut a = vec![0.0; k * k];
        let mut g = vec![0.0; k];
        for p in 0..k {
            let jp = &jac[p * n..(p + 1) * n];
            g[p] = jp.iter().zip(&res).map(|(j, r)| j * r).sum();
            for q in 0..=p {
                let jq = &jac[q * n..(q + 1) * n];
                let v: f64 = jp.iter().zip(jq).map(|(x, y)| x * y).sum();
                a[p * k + q] = v;
                a[q * k + p] = v;
            }
        }
        for _ in 0..16 {
            let mut damped = a.clone();
            for p in 0..k {
                damped[p * k + p] += mu * a[p * k + p].max(1e-12);
            }
            let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
            let Some(step) = solve_spd(&mut damped, &neg_g, k) else {
                mu *= 4.0;
                continue;
            };
            let cand: Vec<f64> = c.iter().zip(&step).map(|(c, s)| c + s).collect();
            trial.set_constants(&cand);
            if let Some(r) = residuals(&trial, data) {
                let s = sum_sq(&r);
                if s < sse {
                    let gain = sse - s;
                    c = cand;
                    res = r;
                    sse = s;
                    mu = (mu / 3.0).max(1e-15);
                    if gain <= 1e-14 * sse || sse == 0.0 {
                        break 'outer;
                    }
                    continue 'outer;
                }
            }
            mu *= 4.0;
        }
        break;
    }
    best.set_constants(&c);
    (best, rmse_of(sse, data))
}

fn rmse_of(sse: f64, data: &Dataset) -> f64 {
    (sse / data.rows() as f64).sqrt()
}

fn sum_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn residuals(expr: &Expr, data: &Dataset) -> Option<Vec<f64>> {
    let mut v = expr.eval_columns(&data.columns, data.rows())?;
    for (p, t) in v.iter_mut().zip(&data.target) {
        *p -= t;
        if !p.is_finite() {
            return None;
        }
    }
    Some(v)
}

/// Column `p` of `jac` (stored contiguously) is d(residual)/d(c_p).
fn jacobian(trial: &mut Expr, c: &[f64], data: &Dataset, jac: &mut [f64]) -> bool {
    let n = data.rows();
    let mut shifted = c.to_vec();
    for p in 0..c.len() {
        let h = 1e-6 * c[p].abs().max(1e-8);
        shifted[p] = c[p] + h;
        trial.set_constants(&shifted);
        let Some(up) = trial.eval_columns(&data.columns, n) else {
            return false;
        };
        shifted[p] = c[p] - h;
        trial.set_constants(&shifted);
        let Some(down) = trial.eval_columns(&data.columns, n) else {
            return false;
        };
        shifted[p] = c[p];
        for (i, (u, d)) in up.iter().zip(&down).enumerate() {
            let v = (u - d) / (2.0 * h);
            if !v.is_finite() {
                return false;
            }
            jac[p * n + i] = v;
        }
    }
    true
}

/// Cholesky solve of a symmetric positive-definite `k x k` system.
fn solve_spd(a: &mut [f64], b: &[f64], k: usize) -> Option<Vec<f64>> {
    for j in 0..k {
        let mut d = a[j * k + j];
        for m in 0..j {
            d -= a[j * k + m] * a[j * k + m];
        }
        if !(d > 0.0) {
            return None;
        }
        let d = d.sqrt();
        a[j * k + j] = d;
        for i in j + 1..k {
            let mut s = a[i * k + j];
            for m in 0..j {
                s -= a[i * k + m] * a[j * k + m];
            }
            a[i * k + j] = s / d;
        }
    }
    let mut y = b.to_vec();
    for i in 0..k {
        for m in 0..i {
            y[i] -= a[i * k + m] * y[m];
        }
        y[i] /= a[i * k + i];
    }
    for i in (0..k).rev() {
        for m in i + 1..k {
            y[i] -= a[m * k + i] * y[m];
        }
        y[i] /= a[i * k + i];
    }
    y.iter().all(|v| v.is_finite()).then_some(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn recovers_a_conic() {
        let xs: Vec<f64> = (0..200).map(|i| i as f64 * 0.0314).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 / (1.0 + 0.3 * (x + 0.7).cos())).collect();
        let data = Dataset::new(vec![xs], ys).unwrap();
        let start = parse("2/(1.1 + 0.2*cos(x0 + 0.5))").unwrap();
        let (fit, rmse) = fit_constants(&start, &data, 200);
        assert!(rmse < 1e-10, "{rmse} {fit}");
    }

    #[test]
    fn constant_free_expressions_pass_through() {
        let data = Dataset::new(vec![vec![1.0, 2.0]], vec![1.0, 2.5]).unwrap();
        let e = parse("x0").unwrap();
        let (fit, rmse) = fit_constants(&e, &data, 10);
        assert_eq!(fit, e);
        assert!((rmse - (0.125f64).sqrt()).abs() < 1e-15);
    }
}
