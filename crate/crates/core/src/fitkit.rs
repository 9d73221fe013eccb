//! Luttinger-liquid predictions and small nonlinear least-squares fits.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::modes::MomentumGrid;

pub const MAX_FIT_ITERATIONS: usize = 500;
/// Convergence requires `|J^T r| <= GRADIENT_TOL (1 + rss)`.
pub const GRADIENT_TOL: f64 = 1e-10;

/// Luttinger parameter and occupation exponent of the critical XXZ chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Luttinger {
    pub k: f64,
    pub alpha: f64,
}

/// `K = pi / (2 (pi - acos Delta))`, `alpha = (K + 1/K) / 2 - 1`, for
/// `-1 < Delta <= 1`.
pub fn luttinger(delta: f64) -> Result<Luttinger> {
    if !(delta > -1.0 && delta <= 1.0) {
        return Err(Error::Domain(format!(
            "Luttinger parameter defined for -1 < Delta <= 1, got {delta}"
        )));
    }
    let k = PI / (2.0 * (PI - delta.acos()));
    Ok(Luttinger {
        k,
        alpha: 0.5 * (k + 1.0 / k) - 1.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// `y = a x^b`
    Power,
    /// `y = A exp(-x / sigma) + S0`
    ExpOffset,
    /// `y = theta ln x + beta + gamma / x^2`
    LogCorrection,
    /// `y = a x + b`
    Linear,
}

impl FitModel {
    pub fn as_str(self) -> &'static str {
        match self {
            FitModel::Power => "power",
            FitModel::ExpOffset => "exp_offset",
            FitModel::LogCorrection => "log_correction",
            FitModel::Linear => "linear",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "power" => Some(FitModel::Power),
            "exp_offset" => Some(FitModel::ExpOffset),
            "log_correction" => Some(FitModel::LogCorrection),
            "linear" => Some(FitModel::Linear),
            _ => None,
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            FitModel::Power => &["a", "b"],
            FitModel::ExpOffset => &["A", "sigma", "S0"],
            FitModel::LogCorrection => &["theta", "beta", "gamma"],
            FitModel::Linear => &["a", "b"],
        }
    }

    pub fn eval(self, p: &[f64], x: f64) -> f64 {
        match self {
            FitModel::Power => p[0] * x.powf(p[1]),
            FitModel::ExpOffset => p[0] * (-x / p[1]).exp() + p[2],
            FitModel::LogCorrection => p[0] * x.ln() + p[1] + p[2] / (x * x),
            FitModel::Linear => p[0] * x + p[1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    pub params: BTreeMap<String, f64>,
    pub rss: f64,
    pub r_squared: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    pub fn param(&self, name: &str) -> f64 {
        self.params[name]
    }

    pub fn values(&self) -> Vec<f64> {
        self.model
            .param_names()
            .iter()
            .map(|n| self.params[*n])
            .collect()
    }

    pub fn predict(&self, x: f64) -> f64 {
        self.model.eval(&self.values(), x)
    }
}

fn rss_of(model: FitModel, p: &[f64], pts: &[(f64, f64)]) -> f64 {
    pts.iter()
        .map(|&(x, y)| (model.eval(p, x) - y).powi(2))
        .sum()
}

fn residuals(model: FitModel, p: &[f64], pts: &[(f64, f64)]) -> DVector<f64> {
    DVector::from_iterator(pts.len(), pts.iter().map(|&(x, y)| model.eval(p, x) - y))
}

fn jacobian(model: FitModel, p: &[f64], pts: &[(f64, f64)]) -> DMatrix<f64> {
    let mut jac = DMatrix::zeros(pts.len(), p.len());
    for j in 0..p.len() {
        let h = 1e-6 * p[j].abs().max(1e-3);
        let mut hi = p.to_vec();
        let mut lo = p.to_vec();
        hi[j] += h;
        lo[j] -= h;
        for (i, &(x, _)) in pts.iter().enumerate() {
            jac[(i, j)] = (model.eval(&hi, x) - model.eval(&lo, x)) / (2.0 * h);
        }
    }
    jac
}

/// Ordinary least squares for `y = sum_j c_j f_j(x)`.
fn linear_least_squares(pts: &[(f64, f64)], basis: &[&dyn Fn(f64) -> f64]) -> Option<Vec<f64>> {
    let a = DMatrix::from_fn(pts.len(), basis.len(), |i, j| basis[j](pts[i].0));
    let b = DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1));
    let sol = a.svd(true, true).solve(&b, 1e-14).ok()?;
    Some(sol.iter().copied().collect())
}

fn initial_guess(model: FitModel, pts: &[(f64, f64)]) -> Vec<f64> {
    match model {
        FitModel::Linear => {
            linear_least_squares(pts, &[&|x| x, &|_| 1.0]).unwrap_or_else(|| vec![0.0, 0.0])
        }
        FitModel::LogCorrection => {
            linear_least_squares(pts, &[&|x: f64| x.ln(), &|_| 1.0, &|x: f64| 1.0 / (x * x)])
                .unwrap_or_else(|| vec![0.0, 0.0, 0.0])
        }
        FitModel::Power => {
            if pts.iter().all(|&(x, y)| x > 0.0 && y > 0.0) {
                if let Some(p) = loglog_power(pts) {
                    return p;
                }
            }
            let (x0, y0) = pts[pts.len() - 1];
            vec![if x0 != 0.0 { y0 / x0 } else { y0 }, 1.0]
        }
        FitModel::ExpOffset => {
            // scan sigma, solve the two linear coefficients for each
            let xmin = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
            let xmax = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
            let span = (xmax - xmin).max(1e-12);
            let mut best = (f64::INFINITY, vec![0.0, span, 0.0]);
            for i in 0..=80 {
                let sigma = span * 10f64.powf(-2.0 + 3.0 * i as f64 / 80.0);
                if let Some(c) =
                    linear_least_squares(pts, &[&|x: f64| (-x / sigma).exp(), &|_| 1.0])
                {
                    let p = vec![c[0], sigma, c[1]];
                    let r = rss_of(model, &p, pts);
                    if r < best.0 {
                        best = (r, p);
                    }
                }
            }
            best.1
        }
    }
}

/// Power law fitted as a straight line in log-log space.
fn loglog_power(pts: &[(f64, f64)]) -> Option<Vec<f64>> {
    let logs: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let c = linear_least_squares(&logs, &[&|x| x, &|_| 1.0])?;
    Some(vec![c[1].exp(), c[0]])
}

/// Least-squares fit of one of the four model forms.
///
/// Without `init`, a power law with all `y > 0` is solved in closed form
/// as a line in log-log space; `converged` then refers to that objective.
/// Every other case runs Levenberg-damped Gauss-Newton with a
/// central-difference Jacobian. `rss` and `r_squared` are always computed
/// on the original data.
pub fn fit_model(pts: &[(f64, f64)], model: FitModel, init: Option<&[f64]>) -> Result<FitResult> {
    let n_par = model.param_names().len();
    if pts.len() < n_par + 1 {
        return invalid(format!(
            "{} model needs at least {} points, got {}",
            model.as_str(),
            n_par + 1,
            pts.len()
        ));
    }
    if pts.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return invalid("non-finite data point");
    }
    let mut xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    if xs.windows(2).any(|w| w[0] == w[1]) {
        return invalid("x values must be distinct");
    }
    if matches!(model, FitModel::Power | FitModel::LogCorrection) && xs[0] <= 0.0 {
        return Err(Error::Domain(format!(
            "{} model needs x > 0",
            model.as_str()
        )));
    }
    if model == FitModel::Power && init.is_none() && pts.iter().all(|p| p.1 > 0.0) {
        if let Some(p) = loglog_power(pts) {
            return Ok(finish(model, p, pts, true, 0));
        }
    }
    let mut p = match init {
        Some(v) if v.len() == n_par => v.to_vec(),
        Some(v) => {
            return invalid(format!(
                "{} model takes {n_par} parameters, got {}",
                model.as_str(),
                v.len()
            ))
        }
        None => initial_guess(model, pts),
    };

    let mut rss = rss_of(model, &p, pts);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_FIT_ITERATIONS {
        let jac = jacobian(model, &p, pts);
        let r = residuals(model, &p, pts);
        let grad = jac.transpose() * &r;
        if grad.norm() <= GRADIENT_TOL * (1.0 + rss.abs()) {
            converged = true;
            break;
        }
        iterations += 1;
        let jtj = jac.transpose() * &jac;
        let mut accepted = false;
        while lambda < 1e16 {
            let mut damped = jtj.clone();
            for d in 0..n_par {
                damped[(d, d)] += lambda * jtj[(d, d)].max(1e-12);
            }
            let Some(step) = damped.cholesky().map(|c| c.solve(&(-&grad))) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let trial_rss = rss_of(model, &trial, pts);
            if trial_rss.is_finite() && trial_rss <= rss {
                let stalled = trial == p;
                p = trial;
                rss = trial_rss;
                lambda = (lambda / 10.0).max(1e-15);
                accepted = !stalled;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            let jac = jacobian(model, &p, pts);
            let grad = jac.transpose() * residuals(model, &p, pts);
            converged = grad.norm() <= GRADIENT_TOL * (1.0 + rss.abs());
            break;
        }
    }
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("fit produced non-finite parameters".into()));
    }
    Ok(finish(model, p, pts, converged, iterations))
}

fn finish(
    model: FitModel,
    p: Vec<f64>,
    pts: &[(f64, f64)],
    converged: bool,
    iterations: usize,
) -> FitResult {
    let rss = rss_of(model, &p, pts);
    let mean = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let tss: f64 = pts.iter().map(|p| (p.1 - mean).powi(2)).sum();
    let r_squared = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };
    FitResult {
        model,
        params: model
            .param_names()
            .iter()
            .zip(&p)
            .map(|(n, v)| (n.to_string(), *v))
            .collect(),
        rss,
        r_squared,
        converged,
        iterations,
    }
}

/// `(|k - k_F|, |n_k - 1/2|)` for the positive momenta, each distance
/// averaged over the two momenta `k_F +- d` and over `+-k`.
pub fn occupation_points(
    grid: &MomentumGrid,
    occupations: &[f64],
    k_fermi: f64,
) -> Result<Vec<(f64, f64)>> {
    if occupations.len() != grid.len() {
        return invalid("one occupation per grid mode expected");
    }
    let mut buckets: BTreeMap<i64, (f64, usize)> = BTreeMap::new();
    let scale = grid.len() as f64 / PI;
    for j in 0..grid.len() {
        let k = grid.momentum(j).abs();
        let d = (k - k_fermi).abs();
        if d < 1e-12 {
            continue;
        }
        let entry = buckets
            .entry((d * scale * 1e6).round() as i64)
            .or_insert((0.0, 0));
        entry.0 += (occupations[j] - 0.5).abs();
        entry.1 += 1;
    }
    Ok(buckets
        .into_iter()
        .map(|(key, (sum, count))| (key as f64 / (scale * 1e6), sum / count as f64))
        .collect())
}

/// Power-law fit `|n_k - 1/2| ~ |k - k_F|^alpha`; returns the fit with
/// `b = alpha`.
pub fn occupation_exponent(
    grid: &MomentumGrid,
    occupations: &[f64],
    k_fermi: f64,
) -> Result<FitResult> {
    fit_model(
        &occupation_points(grid, occupations, k_fermi)?,
        FitModel::Power,
        None,
    )
}
