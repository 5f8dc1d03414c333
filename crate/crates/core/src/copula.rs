//! Serial copula density expanded in products of score functions, and the
//! dependence measures derived from it.
//!
//! The raw expansion `1 + Σ L[j,m] S_j(u) S_m(v)` can dip below zero. It is
//! exposed unchanged (Parseval identities hold for it exactly); sampling and
//! the Granger–Lin entropy use the clipped, renormalized density instead.

use std::sync::OnceLock;

use serde::Serialize;

use crate::basis::{lp_transform, LPSeries, MarginalScores};
use crate::comoment::{bic_smooth, lp_comoment_matrix, ComomentMatrix};
use crate::empirical::SeriesSample;
use crate::error::{check_probability, LpError, Result};
use crate::normal::{bivariate_normal_cdf, phi_inv};

/// Empirical margins with more cells than this are integrated on a midpoint
/// grid of this many points instead of cell by cell.
pub const DEFAULT_MAX_CELLS: usize = 2048;

/// Floor applied inside the logarithm of the Granger–Lin integrand.
pub const LOG_FLOOR: f64 = 1e-12;

#[derive(Debug)]
pub struct CopulaModel {
    rows: MarginalScores,
    cols: MarginalScores,
    coef: Vec<Vec<f64>>,
    max_cells: Option<usize>,
    clipped_mass: OnceLock<f64>,
}

impl Clone for CopulaModel {
    fn clone(&self) -> Self {
        Self {
            rows: self.rows.clone(),
            cols: self.cols.clone(),
            coef: self.coef.clone(),
            max_cells: self.max_cells,
            clipped_mass: OnceLock::new(),
        }
    }
}

struct Node {
    weight: f64,
    scores: Vec<f64>,
}

impl CopulaModel {
    /// Model with coefficient matrix `coef` (rows: conditioning margin).
    pub fn from_coefficients(
        coef: Vec<Vec<f64>>,
        rows: MarginalScores,
        cols: MarginalScores,
    ) -> Result<Self> {
        if coef.len() > rows.k() || coef.iter().any(|r| r.len() > cols.k()) {
            return Err(LpError::DimensionMismatch(format!(
                "coefficients exceed the {}x{} score dimensions",
                rows.k(),
                cols.k()
            )));
        }
        let mut full = vec![vec![0.0; cols.k()]; rows.k()];
        for (dst, src) in full.iter_mut().zip(&coef) {
            dst[..src.len()].copy_from_slice(src);
        }
        Ok(Self {
            rows,
            cols,
            coef: full,
            max_cells: Some(DEFAULT_MAX_CELLS),
            clipped_mass: OnceLock::new(),
        })
    }

    /// Model built from the smooth part of `matrix` (or raw if not smoothed).
    pub fn from_matrix(matrix: &ComomentMatrix, rows: MarginalScores, cols: MarginalScores) -> Result<Self> {
        let entries = matrix.smooth().unwrap_or(&matrix.raw).clone();
        Self::from_coefficients(entries, rows, cols)
    }

    /// Integrate every empirical margin cell by cell, however many cells it has.
    pub fn with_exact_quadrature(mut self) -> Self {
        self.max_cells = None;
        self.clipped_mass = OnceLock::new();
        self
    }

    /// Switch to a midpoint grid of `n` points for margins with more than `n` cells.
    pub fn with_max_cells(mut self, n: usize) -> Self {
        self.max_cells = Some(n.max(1));
        self.clipped_mass = OnceLock::new();
        self
    }

    pub fn coefficients(&self) -> &[Vec<f64>] {
        &self.coef
    }

    pub fn row_scores(&self) -> &MarginalScores {
        &self.rows
    }

    pub fn col_scores(&self) -> &MarginalScores {
        &self.cols
    }

    fn nodes(&self, margin: &MarginalScores) -> Vec<Node> {
        let coarse = match (margin, self.max_cells) {
            (MarginalScores::Empirical(b), Some(g)) if b.distribution().n_distinct() > g => Some(g),
            _ => None,
        };
        match coarse {
            Some(g) => (0..g)
                .map(|i| {
                    let u = (i as f64 + 0.5) / g as f64;
                    Node {
                        weight: 1.0 / g as f64,
                        scores: margin.scores(u).expect("grid point inside (0,1)"),
                    }
                })
                .collect(),
            None => margin
                .quadrature()
                .into_iter()
                .map(|(_, weight, scores)| Node { weight, scores })
                .collect(),
        }
    }

    /// `β_m(u) = Σ_j S_j(u) L[j,m]` for every column score `m`.
    fn betas_from_scores(&self, row_scores: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols.k()];
        for (s, row) in row_scores.iter().zip(&self.coef) {
            for (o, c) in out.iter_mut().zip(row) {
                *o += s * c;
            }
        }
        out
    }

    /// Quadrature of `f(cop(u, v))` over the unit square.
    fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let col_nodes = self.nodes(&self.cols);
        self.nodes(&self.rows)
            .iter()
            .map(|a| {
                let beta = self.betas_from_scores(&a.scores);
                let inner: f64 = col_nodes
                    .iter()
                    .map(|b| {
                        let c = 1.0 + beta.iter().zip(&b.scores).map(|(x, y)| x * y).sum::<f64>();
                        b.weight * f(c)
                    })
                    .sum();
                a.weight * inner
            })
            .sum()
    }

    /// `∫∫ max(cop, 0)`, the normalizer of the clipped density.
    pub fn clipped_mass(&self) -> f64 {
        *self
            .clipped_mass
            .get_or_init(|| self.integrate(|c| c.max(0.0)))
    }

    /// `∫∫ g(cop(u, v)) du dv` by the model's quadrature.
    pub fn integrate_density<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.integrate(g)
    }
}

/// Lag-`h` serial copula from the BIC-smoothed comoments of `series`.
pub fn serial_copula(series: &LPSeries, h: usize) -> Result<(ComomentMatrix, CopulaModel)> {
    let matrix = bic_smooth(&lp_comoment_matrix(series, h)?);
    let model = CopulaModel::from_matrix(&matrix, series.marginal(), series.marginal())?;
    Ok((matrix, model))
}

/// `1 + Σ L[j,m] S_j(u) S_m(v)`; may be negative.
pub fn copula_density(model: &CopulaModel, u: f64, v: f64) -> Result<f64> {
    let su = model.rows.scores(u)?;
    let sv = model.cols.scores(v)?;
    let beta = model.betas_from_scores(&su);
    Ok(1.0 + beta.iter().zip(&sv).map(|(b, s)| b * s).sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClippedDensity {
    pub density: f64,
    /// `Z = ∫∫ max(cop, 0)`; at least 1.
    pub normalizer: f64,
}

/// `max(cop, 0) / Z`.
pub fn clipped_density(model: &CopulaModel, u: f64, v: f64) -> Result<ClippedDensity> {
    let raw = copula_density(model, u, v)?;
    let z = model.clipped_mass();
    if !(z > 0.0) {
        return Err(LpError::DegenerateCopula("clipped density integrates to 0".into()));
    }
    Ok(ClippedDensity {
        density: raw.max(0.0) / z,
        normalizer: z,
    })
}

/// Squared Frobenius norm of the coefficient matrix.
pub fn auto_lpinfor(model: &CopulaModel) -> f64 {
    model.coef.iter().flatten().map(|c| c * c).sum()
}

/// `∫∫ c log c` of the clipped density.
pub fn granger_lin(model: &CopulaModel) -> Result<f64> {
    let z = model.clipped_mass();
    if !(z > 0.0) {
        return Err(LpError::DegenerateCopula("clipped density integrates to 0".into()));
    }
    Ok(model.integrate(|c| {
        let d = c.max(0.0) / z;
        if d == 0.0 {
            0.0
        } else {
            d * d.max(LOG_FLOOR).ln()
        }
    }))
}

fn check_unit(u: f64) -> Result<()> {
    if (0.0..=1.0).contains(&u) {
        Ok(())
    } else {
        Err(LpError::InvalidProbability(u))
    }
}

/// `Cop(u, v) = uv + Σ L[j,m] I_j(u) I_m(v)` with `I_j(x) = ∫_0^x S_j`.
pub fn copula_cdf(model: &CopulaModel, u: f64, v: f64) -> Result<f64> {
    check_unit(u)?;
    check_unit(v)?;
    let iu: Vec<f64> = (1..=model.rows.k()).map(|j| model.rows.score_integral(j, u)).collect();
    let iv: Vec<f64> = (1..=model.cols.k()).map(|m| model.cols.score_integral(m, v)).collect();
    let beta = model.betas_from_scores(&iu);
    Ok(u * v + beta.iter().zip(&iv).map(|(b, i)| b * i).sum::<f64>())
}

fn lambda_from_diagonal(u: f64, diag: f64) -> f64 {
    if u <= 0.5 {
        diag / u
    } else {
        (1.0 - 2.0 * u + diag) / (1.0 - u)
    }
}

/// Quantile correlation `λ(u)` from the diagonal of the copula cdf.
pub fn quantile_correlation(model: &CopulaModel, u: f64) -> Result<f64> {
    check_probability(u)?;
    Ok(lambda_from_diagonal(u, copula_cdf(model, u, u)?))
}

/// `λ(u)` of a Gaussian copula with correlation `rho`.
pub fn gaussian_copula_curve(rho: f64, u: f64) -> Result<f64> {
    check_probability(u)?;
    if !(-1.0..=1.0).contains(&rho) {
        return Err(LpError::InvalidArgument(format!("correlation {rho} outside [-1, 1]")));
    }
    let x = phi_inv(u);
    Ok(lambda_from_diagonal(u, bivariate_normal_cdf(x, x, rho)))
}

/// Blomqvist's medial correlation `4 Cop(½, ½) − 1`, by term-wise integration.
pub fn blomqvist_beta(model: &CopulaModel) -> f64 {
    let iu: Vec<f64> = (1..=model.rows.k()).map(|j| model.rows.score_integral(j, 0.5)).collect();
    let iv: Vec<f64> = (1..=model.cols.k()).map(|m| model.cols.score_integral(m, 0.5)).collect();
    let beta = model.betas_from_scores(&iu);
    4.0 * beta.iter().zip(&iv).map(|(b, i)| b * i).sum::<f64>()
}

/// `β_m(u) = Σ_j S_j(u) L[j,m]` for 1-based `m`.
pub fn conditional_beta(model: &CopulaModel, u: f64, m: usize) -> Result<f64> {
    if m == 0 || m > model.cols.k() {
        return Err(LpError::InvalidArgument(format!(
            "coefficient index {m} outside 1..={}",
            model.cols.k()
        )));
    }
    Ok(conditional_betas(model, u)?[m - 1])
}

/// All orthogonal coefficients of the conditional comparison density at `u`.
pub fn conditional_betas(model: &CopulaModel, u: f64) -> Result<Vec<f64>> {
    Ok(model.betas_from_scores(&model.rows.scores(u)?))
}

/// `∫ d(v; u)² dv − 1 = Σ_m β_m(u)²`.
pub fn conditional_lpinfor(model: &CopulaModel, u: f64) -> Result<f64> {
    Ok(conditional_betas(model, u)?.iter().map(|b| b * b).sum())
}

/// `d(v; h, u)`: the copula density slice at the conditioning level `u`.
pub fn conditional_comparison_density(model: &CopulaModel, u: f64, v: f64) -> Result<f64> {
    copula_density(model, u, v)
}

/// Copula density on the `n × n` grid `i / (n + 1)`; `out[a][b] = cop(u_a, v_b)`.
pub fn density_grid(model: &CopulaModel, n: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let grid = crate::empirical::probability_grid(n);
    let col_scores: Vec<Vec<f64>> = grid.iter().map(|&v| model.cols.scores(v)).collect::<Result<_>>()?;
    let values = grid
        .iter()
        .map(|&u| {
            let beta = model.betas_from_scores(&model.rows.scores(u)?);
            Ok(col_scores
                .iter()
                .map(|s| 1.0 + beta.iter().zip(s).map(|(b, x)| b * x).sum::<f64>())
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok((grid, values))
}

/// Lag-`h` Blomqvist β of the series formed by one LP component, re-transformed
/// with its own `k` scores. `component = 0` uses the original observations.
pub fn blomqvist_for_component(series: &LPSeries, sample: &SeriesSample, component: usize, h: usize, k: usize) -> Result<f64> {
    let own = if component == 0 {
        lp_transform(sample, k)?
    } else {
        if component > series.k() {
            return Err(LpError::InvalidArgument(format!(
                "component {component} outside 1..={}",
                series.k()
            )));
        }
        lp_transform(&SeriesSample::new(series.component(component).to_vec())?, k)?
    };
    let (_, model) = serial_copula(&own, h)?;
    Ok(blomqvist_beta(&model))
}
