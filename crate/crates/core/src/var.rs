//! Vector autoregression on a subset of LP components: least-squares fits,
//! Schwarz order selection, residual whiteness checks and iterated forecasts.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::basis::LPSeries;
use crate::error::{LpError, Result};

pub const DIAGNOSTIC_LAGS: usize = 20;
pub const DIAGNOSTIC_MAX_OUTSIDE: f64 = 0.10;
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarModel {
    /// LP component indices (1-based) of the modelled columns, or `1..=k'`
    /// for plain column data.
    pub components: Vec<usize>,
    pub order: usize,
    /// `coefficients[i][r][c]`: effect of column `c` at lag `i + 1` on column `r`.
    pub coefficients: Vec<Vec<Vec<f64>>>,
    /// Standard errors laid out like `coefficients`.
    pub std_errors: Vec<Vec<Vec<f64>>>,
    /// Residual covariance (divisor = number of regression rows).
    pub sigma: Vec<Vec<f64>>,
    /// Criterion value per candidate order, all on the common sample.
    pub bic_trace: Vec<f64>,
    /// Observations in the series.
    pub n_obs: usize,
    pub spectral_radius: f64,
    pub stable: bool,
}

impl VarModel {
    pub fn dim(&self) -> usize {
        self.sigma.len()
    }

    pub fn residuals(&self, columns: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let k = self.dim();
        check_columns(columns, k)?;
        let t = columns[0].len();
        if t <= self.order {
            return Err(LpError::InsufficientData(format!(
                "{t} observations cannot support order {}",
                self.order
            )));
        }
        let mut out = vec![Vec::with_capacity(t - self.order); k];
        for s in self.order..t {
            for (r, col) in out.iter_mut().enumerate() {
                let mut pred = 0.0;
                for (i, a) in self.coefficients.iter().enumerate() {
                    for (c, x) in columns.iter().enumerate() {
                        pred += a[r][c] * x[s - i - 1];
                    }
                }
                col.push(columns[r][s] - pred);
            }
        }
        Ok(out)
    }
}

fn check_columns(columns: &[Vec<f64>], k: usize) -> Result<()> {
    if columns.len() != k || k == 0 {
        return Err(LpError::DimensionMismatch(format!(
            "expected {k} columns, got {}",
            columns.len()
        )));
    }
    let t = columns[0].len();
    if columns.iter().any(|c| c.len() != t) {
        return Err(LpError::DimensionMismatch("columns differ in length".into()));
    }
    Ok(())
}

struct LsFit {
    /// `(m k') × k'` stacked coefficients.
    b: DMatrix<f64>,
    sigma: DMatrix<f64>,
    xtx_inv: DMatrix<f64>,
    rows: usize,
}

/// Regression of rows `start..T` on their `m` lags.
fn least_squares(columns: &[Vec<f64>], m: usize, start: usize) -> Result<LsFit> {
    let k = columns.len();
    let t = columns[0].len();
    let rows = t - start;
    let y = DMatrix::from_fn(rows, k, |r, c| columns[c][start + r]);
    if m == 0 {
        let sigma = y.transpose() * &y / rows as f64;
        return Ok(LsFit {
            b: DMatrix::zeros(0, k),
            sigma,
            xtx_inv: DMatrix::zeros(0, 0),
            rows,
        });
    }
    let x = DMatrix::from_fn(rows, m * k, |r, j| {
        let (lag, c) = (j / k + 1, j % k);
        columns[c][start + r - lag]
    });
    let xtx = x.transpose() * &x;
    let chol = xtx
        .clone()
        .cholesky()
        .ok_or_else(|| LpError::RankDeficient(format!("lagged regressors singular at order {m}")))?;
    // L_jj² / (X'X)_jj is the share of regressor j not explained by earlier ones
    let l = chol.l();
    if (0..m * k).any(|j| !(l[(j, j)].powi(2) > RANK_TOL * xtx[(j, j)])) {
        return Err(LpError::RankDeficient(format!("lagged regressors collinear at order {m}")));
    }
    let xtx_inv = chol.inverse();
    let b = chol.solve(&(x.transpose() * &y));
    let e = &y - &x * &b;
    let sigma = e.transpose() * &e / rows as f64;
    Ok(LsFit { b, sigma, xtx_inv, rows })
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

fn log_det(sigma: &DMatrix<f64>) -> Result<f64> {
    let chol = sigma
        .clone()
        .cholesky()
        .ok_or_else(|| LpError::RankDeficient("residual covariance is singular".into()))?;
    Ok(2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// `log|Σ̂_m| + m k'² log n / n`.
pub fn var_bic(log_det_sigma: f64, m: usize, k: usize, n: usize) -> f64 {
    let n = n as f64;
    log_det_sigma + (m * k * k) as f64 * n.ln() / n
}

fn companion_radius(coefs: &[Vec<Vec<f64>>], k: usize) -> f64 {
    let m = coefs.len();
    if m == 0 {
        return 0.0;
    }
    let mk = m * k;
    let mut c = DMatrix::zeros(mk, mk);
    for (i, a) in coefs.iter().enumerate() {
        for r in 0..k {
            for col in 0..k {
                c[(r, i * k + col)] = a[r][col];
            }
        }
    }
    for j in k..mk {
        c[(j, j - k)] = 1.0;
    }
    c.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

fn build_model(columns: &[Vec<f64>], components: Vec<usize>, m: usize, bic_trace: Vec<f64>) -> Result<VarModel> {
    let k = columns.len();
    let fit = least_squares(columns, m, m)?;
    let mut coefficients = vec![vec![vec![0.0; k]; k]; m];
    let mut std_errors = vec![vec![vec![0.0; k]; k]; m];
    for i in 0..m {
        for r in 0..k {
            for c in 0..k {
                let j = i * k + c;
                coefficients[i][r][c] = fit.b[(j, r)];
                std_errors[i][r][c] = (fit.sigma[(r, r)] * fit.xtx_inv[(j, j)]).max(0.0).sqrt();
            }
        }
    }
    let spectral_radius = companion_radius(&coefficients, k);
    debug_assert!(fit.rows == columns[0].len() - m);
    Ok(VarModel {
        components,
        order: m,
        coefficients,
        std_errors,
        sigma: to_rows(&fit.sigma),
        bic_trace,
        n_obs: columns[0].len(),
        spectral_radius,
        stable: spectral_radius < 1.0,
    })
}

fn check_length(t: usize, k: usize, max_order: usize) -> Result<()> {
    if t <= 10 * k * max_order.max(1) {
        return Err(LpError::InsufficientData(format!(
            "{t} observations are too few for {k} components and order {max_order}"
        )));
    }
    Ok(())
}

/// Fit orders `0..=max_order` on the common sample `max_order..T`, pick the
/// Schwarz minimizer (ties to the smaller order) and refit it on all usable rows.
pub fn fit_var_columns(columns: &[Vec<f64>], max_order: usize) -> Result<VarModel> {
    let k = columns.len();
    check_columns(columns, k)?;
    check_length(columns[0].len(), k, max_order)?;
    let mut trace = Vec::with_capacity(max_order + 1);
    for m in 0..=max_order {
        let fit = least_squares(columns, m, max_order)?;
        trace.push(var_bic(log_det(&fit.sigma)?, m, k, fit.rows));
    }
    let order = trace
        .iter()
        .enumerate()
        .fold(0, |best, (m, &v)| if v < trace[best] { m } else { best });
    build_model(columns, (1..=k).collect(), order, trace)
}

/// Least-squares fit at a fixed order, bypassing selection.
pub fn fit_var_order(columns: &[Vec<f64>], order: usize) -> Result<VarModel> {
    let k = columns.len();
    check_columns(columns, k)?;
    check_length(columns[0].len(), k, order)?;
    let fit = least_squares(columns, order, order)?;
    let trace = vec![var_bic(log_det(&fit.sigma)?, order, k, fit.rows)];
    build_model(columns, (1..=k).collect(), order, trace)
}

fn select_components(series: &LPSeries, components: &[usize]) -> Result<Vec<Vec<f64>>> {
    if components.is_empty() {
        return Err(LpError::InvalidArgument("no components selected".into()));
    }
    components
        .iter()
        .map(|&j| {
            if j == 0 || j > series.k() {
                Err(LpError::InvalidArgument(format!(
                    "component {j} outside 1..={}",
                    series.k()
                )))
            } else {
                Ok(series.component(j).to_vec())
            }
        })
        .collect()
}

/// [`fit_var_columns`] on the chosen LP components (1-based).
pub fn fit_var(series: &LPSeries, components: &[usize], max_order: usize) -> Result<VarModel> {
    let columns = select_components(series, components)?;
    let mut model = fit_var_columns(&columns, max_order)?;
    model.components = components.to_vec();
    Ok(model)
}

/// The model's columns extracted from an LP series.
pub fn model_columns(model: &VarModel, series: &LPSeries) -> Result<Vec<Vec<f64>>> {
    select_components(series, &model.components)
}

/// Iterated linear prediction with zero innovations. `history` holds one
/// column per component; its last `order` rows seed the recursion.
pub fn forecast(model: &VarModel, history: &[Vec<f64>], steps: usize) -> Result<Vec<Vec<f64>>> {
    let k = model.dim();
    check_columns(history, k)?;
    if !model.stable {
        return Err(LpError::UnstableModel(format!(
            "companion spectral radius {:.4} is not below 1",
            model.spectral_radius
        )));
    }
    let m = model.order;
    let t = history[0].len();
    if t < m {
        return Err(LpError::InsufficientData(format!(
            "history of {t} rows is shorter than order {m}"
        )));
    }
    // most recent first
    let mut recent: Vec<DVector<f64>> = (0..m)
        .map(|i| DVector::from_fn(k, |c, _| history[c][t - 1 - i]))
        .collect();
    let a: Vec<DMatrix<f64>> = model
        .coefficients
        .iter()
        .map(|a| DMatrix::from_fn(k, k, |r, c| a[r][c]))
        .collect();
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let mut next = DVector::zeros(k);
        for (ai, yi) in a.iter().zip(&recent) {
            next += ai * yi;
        }
        out.push(next.iter().copied().collect());
        if m > 0 {
            recent.pop();
            recent.insert(0, next);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualDiagnostics {
    pub lags: usize,
    pub band: f64,
    /// `acf[c][h - 1]` for residual column `c` at lag `h`.
    pub acf: Vec<Vec<f64>>,
    pub fraction_outside: Vec<f64>,
    pub overall_fraction_outside: f64,
    pub pass: bool,
}

fn autocorrelations(x: &[f64], lags: usize) -> Vec<f64> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let c0: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    (1..=lags)
        .map(|h| {
            if h >= n || c0 == 0.0 {
                return 0.0;
            }
            let ch: f64 = (h..n).map(|t| (x[t] - mean) * (x[t - h] - mean)).sum();
            ch / c0
        })
        .collect()
}

/// Residual autocorrelations to lag 20 against the ±1.96/√n band. The check
/// passes when at most 10% of all (component, lag) values fall outside.
pub fn residual_diagnostics(model: &VarModel, columns: &[Vec<f64>]) -> Result<ResidualDiagnostics> {
    let resid = model.residuals(columns)?;
    let n = resid[0].len();
    let lags = DIAGNOSTIC_LAGS.min(n.saturating_sub(1)).max(1);
    let band = 1.96 / (n as f64).sqrt();
    let acf: Vec<Vec<f64>> = resid.iter().map(|r| autocorrelations(r, lags)).collect();
    let outside: Vec<usize> = acf
        .iter()
        .map(|a| a.iter().filter(|v| v.abs() > band).count())
        .collect();
    let fraction_outside: Vec<f64> = outside.iter().map(|&o| o as f64 / lags as f64).collect();
    let overall = outside.iter().sum::<usize>() as f64 / (lags * acf.len()) as f64;
    Ok(ResidualDiagnostics {
        lags,
        band,
        acf,
        fraction_outside,
        overall_fraction_outside: overall,
        pass: overall <= DIAGNOSTIC_MAX_OUTSIDE,
    })
}
