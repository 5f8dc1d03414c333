//! Burg autoregressive fits with information-criterion order selection, AR
//! spectral densities per LP component, and the copula spectral density.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::basis::LPSeries;
use crate::copula::{copula_density, CopulaModel};
use crate::empirical::mean;
use crate::error::{LpError, Result};

pub const DEFAULT_SPECTRUM_GRID: usize = 512;
pub const DEFAULT_COPULA_SPECTRUM_LAGS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Aic,
    Bic,
}

/// An autoregressive fit `Y(t) = Σ a(i) Y(t − i) + σ ε(t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArFit {
    /// Order currently selected.
    pub order: usize,
    pub coefficients: Vec<f64>,
    pub sigma2: f64,
    /// Innovation variance for orders `0..=max_order`.
    pub sigma2_path: Vec<f64>,
    /// Reflection (partial autocorrelation) coefficients, one per order.
    pub reflection: Vec<f64>,
    /// Coefficient vectors for orders `0..=max_order`.
    pub coefficient_path: Vec<Vec<f64>>,
    /// Number of observations behind the fit.
    pub n: usize,
    pub criterion: Criterion,
    /// Criterion values for orders `0..=max_order`.
    pub criterion_values: Vec<f64>,
}

impl ArFit {
    /// A fit given by coefficients and innovation variance (no data behind it).
    ///
    /// Reflection coefficients are recovered by the step-down recursion.
    pub fn from_coefficients(coefficients: Vec<f64>, sigma2: f64) -> Self {
        let order = coefficients.len();
        let mut reflection = vec![0.0; order];
        let mut a = coefficients.clone();
        let mut path = vec![Vec::new(); order + 1];
        path[order] = a.clone();
        for m in (1..=order).rev() {
            let k = a[m - 1];
            reflection[m - 1] = k;
            if m > 1 {
                let denom = 1.0 - k * k;
                let prev: Vec<f64> = (0..m - 1)
                    .map(|i| (a[i] + k * a[m - 2 - i]) / denom)
                    .collect();
                a = prev;
                path[m - 1] = a.clone();
            }
        }
        Self {
            order,
            coefficients,
            sigma2,
            sigma2_path: vec![sigma2; order + 1],
            reflection,
            coefficient_path: path,
            n: 0,
            criterion: Criterion::Bic,
            criterion_values: Vec::new(),
        }
    }

    pub fn max_order(&self) -> usize {
        self.sigma2_path.len() - 1
    }

    /// The same fit with order `m` selected.
    pub fn at_order(&self, m: usize) -> Result<Self> {
        if m > self.max_order() {
            return Err(LpError::InvalidArgument(format!(
                "order {m} exceeds fitted maximum {}",
                self.max_order()
            )));
        }
        Ok(Self {
            order: m,
            coefficients: self.coefficient_path[m].clone(),
            sigma2: self.sigma2_path[m],
            ..self.clone()
        })
    }

    /// Stable when every reflection coefficient up to the order lies in (−1, 1).
    pub fn is_stable(&self) -> bool {
        self.reflection[..self.order]
            .iter()
            .all(|k| k.abs() < 1.0 && k.is_finite())
    }

    /// Whether the selected order is zero (a flat spectrum).
    pub fn is_flat(&self) -> bool {
        self.order == 0
    }
}

/// Burg recursion up to `max_order` on the mean-removed series, followed by
/// BIC order selection.
pub fn burg_fit(series: &[f64], max_order: usize) -> Result<ArFit> {
    let n = series.len();
    if n <= 2 * max_order || n < 2 {
        return Err(LpError::InsufficientData(format!(
            "{n} observations cannot support order {max_order}"
        )));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(LpError::InvalidSample("non-finite value in series".into()));
    }
    let m = mean(series);
    let x: Vec<f64> = series.iter().map(|v| v - m).collect();
    let s0 = x.iter().map(|v| v * v).sum::<f64>() / n as f64;

    let mut f = x.clone();
    let mut b = x;
    let mut a: Vec<f64> = Vec::new();
    let mut sigma2 = s0;
    let mut sigma2_path = vec![s0];
    let mut reflection = Vec::with_capacity(max_order);
    let mut coefficient_path = vec![Vec::new()];

    for order in 1..=max_order {
        // f[t] and b[t - 1] for t = order..n-1
        let mut num = 0.0;
        let mut den = 0.0;
        for t in order..n {
            num += f[t] * b[t - 1];
            den += f[t] * f[t] + b[t - 1] * b[t - 1];
        }
        let k = if den > 0.0 { 2.0 * num / den } else { 0.0 };
        for t in (order..n).rev() {
            let ft = f[t];
            f[t] = ft - k * b[t - 1];
            b[t] = b[t - 1] - k * ft;
        }
        let mut next = Vec::with_capacity(order);
        for i in 0..order - 1 {
            next.push(a[i] - k * a[order - 2 - i]);
        }
        next.push(k);
        a = next;
        sigma2 *= 1.0 - k * k;
        sigma2_path.push(sigma2);
        reflection.push(k);
        coefficient_path.push(a.clone());
    }

    let mut fit = ArFit {
        order: 0,
        coefficients: Vec::new(),
        sigma2: s0,
        sigma2_path,
        reflection,
        coefficient_path,
        n,
        criterion: Criterion::Bic,
        criterion_values: Vec::new(),
    };
    let order = select_order(&fit, Criterion::Bic, n);
    fit.criterion_values = criterion_values(&fit, Criterion::Bic, n);
    fit.at_order(order)
}

fn criterion_values(fit: &ArFit, criterion: Criterion, n: usize) -> Vec<f64> {
    let n = n.max(2) as f64;
    let c = match criterion {
        Criterion::Aic => 2.0,
        Criterion::Bic => n.ln(),
    };
    fit.sigma2_path
        .iter()
        .enumerate()
        .map(|(m, s)| s.ln() + c * m as f64 / n)
        .collect()
}

/// Order minimizing `log σ²_m + c·m/n` (`c = 2` for AIC, `log n` for BIC);
/// ties go to the smaller order.
pub fn select_order(fit: &ArFit, criterion: Criterion, n: usize) -> usize {
    let values = criterion_values(fit, criterion, n);
    values
        .iter()
        .enumerate()
        .fold(0, |best, (m, &v)| if v < values[best] { m } else { best })
}

/// Refit helper: select by `criterion` and record its values.
pub fn with_criterion(fit: &ArFit, criterion: Criterion) -> Result<ArFit> {
    let n = fit.n.max(2);
    let order = select_order(fit, criterion, n);
    let mut out = fit.at_order(order)?;
    out.criterion = criterion;
    out.criterion_values = criterion_values(fit, criterion, n);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralCurve {
    pub omega: Vec<f64>,
    pub density: Vec<f64>,
}

/// `n` frequencies evenly spaced on `[0, ½]`.
pub fn frequency_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| 0.5 * i as f64 / (n - 1) as f64).collect(),
    }
}

/// `σ² / |1 − Σ a(k) e^{2πiωk}|²` on the grid.
pub fn ar_spectral_density(fit: &ArFit, omega_grid: &[f64]) -> Result<SpectralCurve> {
    if !fit.is_stable() {
        return Err(LpError::UnstableModel(
            "a reflection coefficient lies outside (-1, 1)".into(),
        ));
    }
    let density = omega_grid
        .iter()
        .map(|&w| {
            let (mut re, mut im) = (1.0, 0.0);
            for (k, a) in fit.coefficients.iter().enumerate() {
                let arg = 2.0 * PI * w * (k + 1) as f64;
                re -= a * arg.cos();
                im -= a * arg.sin();
            }
            fit.sigma2 / (re * re + im * im)
        })
        .collect();
    Ok(SpectralCurve {
        omega: omega_grid.to_vec(),
        density,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentSpectrum {
    /// `"Z"` for the normalized series, `"YS<j>"` for LP components.
    pub name: String,
    /// 0 for `Z`, otherwise the LP component index.
    pub component: usize,
    pub fit: ArFit,
    pub curve: SpectralCurve,
    pub flat: bool,
}

/// Burg + BIC spectra of the normalized series and each LP component.
pub fn lp_spectrum(series: &LPSeries, max_order: usize, omega_grid: &[f64]) -> Result<Vec<ComponentSpectrum>> {
    let mut out = Vec::with_capacity(series.k() + 1);
    let parts = std::iter::once(("Z".to_string(), 0usize, series.z()))
        .chain((1..=series.k()).map(|j| (format!("YS{j}"), j, series.component(j))));
    for (name, component, data) in parts {
        let fit = burg_fit(data, max_order)?;
        let curve = ar_spectral_density(&fit, omega_grid)?;
        out.push(ComponentSpectrum {
            name,
            component,
            flat: fit.is_flat(),
            fit,
            curve,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CopulaSpectrum {
    pub u: f64,
    pub v: f64,
    pub lags: usize,
    pub omega: Vec<f64>,
    pub real: Vec<f64>,
    pub imag: Vec<f64>,
}

/// `1 + Σ_{0<|h|≤H} (cop(u, v; h) − 1) e^{−2πihω}` with `cop(u, v; −h) = cop(v, u; h)`.
///
/// `models[h - 1]` is the lag-`h` copula.
pub fn copula_spectral_density(models: &[CopulaModel], u: f64, v: f64, omega_grid: &[f64]) -> Result<CopulaSpectrum> {
    let forward: Vec<f64> = models
        .iter()
        .map(|m| Ok(copula_density(m, u, v)? - 1.0))
        .collect::<Result<_>>()?;
    let backward: Vec<f64> = models
        .iter()
        .map(|m| Ok(copula_density(m, v, u)? - 1.0))
        .collect::<Result<_>>()?;
    let mut real = Vec::with_capacity(omega_grid.len());
    let mut imag = Vec::with_capacity(omega_grid.len());
    for &w in omega_grid {
        let (mut re, mut im) = (1.0, 0.0);
        for (h, (f, b)) in forward.iter().zip(&backward).enumerate() {
            let arg = 2.0 * PI * (h + 1) as f64 * w;
            // e^{-i arg} f + e^{+i arg} b
            re += (f + b) * arg.cos();
            im += (b - f) * arg.sin();
        }
        real.push(re);
        imag.push(im);
    }
    Ok(CopulaSpectrum {
        u,
        v,
        lags: models.len(),
        omega: omega_grid.to_vec(),
        real,
        imag,
    })
}
