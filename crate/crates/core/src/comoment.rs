//! Lagged LP-comoment matrices, BIC smoothing, the Pearson decomposition,
//! the LP-correlogram and the time-index (nonstationarity) comoments.

use serde::Serialize;

use crate::basis::{build_score_basis, legendre_score, lp_transform, LPSeries, ScoreBasis};
use crate::empirical::{MidDistribution, SeriesSample};
use crate::error::{LpError, Result};
use crate::moments::{lp_moments_from_basis, LPMomentVector};

/// Smallest overlap window accepted for a lagged comoment.
pub const MIN_OVERLAP: usize = 10;

/// What the rows of a comoment matrix are paired against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "lag", rename_all = "snake_case")]
pub enum Pairing {
    /// `Y(t)` against `Y(t + h)`.
    Serial(usize),
    /// Legendre scores of the time index against `Y(t)`.
    TimeIndex,
    /// Two variables of a joint distribution.
    Joint,
}

/// BIC-thresholded copy of a comoment matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Smoothing {
    pub smooth: Vec<Vec<f64>>,
    pub mask: Vec<Vec<bool>>,
    /// Penalized cumulative sums for `m = 0, 1, ..., rows·cols`.
    pub bic_path: Vec<f64>,
    pub selected: usize,
}

/// Entry `(j, m)` is `E[YS_j(t) YS_m(t + h)]`; rows belong to the earlier variable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComomentMatrix {
    pub pairing: Pairing,
    pub raw: Vec<Vec<f64>>,
    /// Effective sample size used for the BIC penalty.
    pub n: usize,
    pub smoothing: Option<Smoothing>,
}

impl ComomentMatrix {
    pub fn from_raw(pairing: Pairing, raw: Vec<Vec<f64>>, n: usize) -> Result<Self> {
        let cols = raw.first().map_or(0, Vec::len);
        if raw.is_empty() || cols == 0 || raw.iter().any(|r| r.len() != cols) {
            return Err(LpError::DimensionMismatch(
                "comoment matrix must be a non-empty rectangle".into(),
            ));
        }
        Ok(Self {
            pairing,
            raw,
            n,
            smoothing: None,
        })
    }

    pub fn rows(&self) -> usize {
        self.raw.len()
    }

    pub fn cols(&self) -> usize {
        self.raw[0].len()
    }

    /// The smooth entries if `use_smooth`, else the raw ones.
    pub fn entries(&self, use_smooth: bool) -> Result<&Vec<Vec<f64>>> {
        if use_smooth {
            self.smoothing
                .as_ref()
                .map(|s| &s.smooth)
                .ok_or_else(|| LpError::InvalidArgument("matrix has not been smoothed".into()))
        } else {
            Ok(&self.raw)
        }
    }

    pub fn smooth(&self) -> Option<&Vec<Vec<f64>>> {
        self.smoothing.as_ref().map(|s| &s.smooth)
    }

    /// A matrix whose raw entries are this matrix's smooth entries, already
    /// smoothed (everything retained that survived).
    pub fn smooth_as_raw(&self) -> Result<Self> {
        let s = self.entries(true)?.clone();
        Ok(bic_smooth(&Self::from_raw(self.pairing, s, self.n)?))
    }
}

fn lagged_cross(rows: &[Vec<f64>], cols: &[Vec<f64>], h: usize) -> Vec<Vec<f64>> {
    let len = rows[0].len();
    let n = (len - h) as f64;
    rows.iter()
        .map(|a| {
            cols.iter()
                .map(|b| a[..len - h].iter().zip(&b[h..]).map(|(x, y)| x * y).sum::<f64>() / n)
                .collect()
        })
        .collect()
}

fn check_lag(len: usize, h: usize) -> Result<()> {
    if h == 0 {
        return Err(LpError::InvalidArgument("lag must be at least 1".into()));
    }
    let overlap = len.saturating_sub(h);
    if overlap < MIN_OVERLAP {
        return Err(LpError::InsufficientOverlap {
            lag: h,
            overlap,
            required: MIN_OVERLAP,
        });
    }
    Ok(())
}

/// Raw lag-`h` comoments, normalized by the overlap length `T − h`.
pub fn lp_comoment_matrix(series: &LPSeries, h: usize) -> Result<ComomentMatrix> {
    check_lag(series.len(), h)?;
    let raw = lagged_cross(series.columns(), series.columns(), h);
    ComomentMatrix::from_raw(Pairing::Serial(h), raw, series.len() - h)
}

/// Lag-`h` comoments between two column sets of equal length.
pub fn cross_comoment_matrix(rows: &[Vec<f64>], cols: &[Vec<f64>], h: usize) -> Result<ComomentMatrix> {
    let len = rows.first().map_or(0, Vec::len);
    if rows.iter().chain(cols).any(|c| c.len() != len) || cols.is_empty() {
        return Err(LpError::DimensionMismatch("columns differ in length".into()));
    }
    check_lag(len, h)?;
    ComomentMatrix::from_raw(Pairing::Serial(h), lagged_cross(rows, cols, h), len - h)
}

/// Keeps the top `m*` entries by squared magnitude, where `m*` maximizes
/// `Σ_{i≤m} c²_(i) − 2 m log(n) / n`.
pub fn bic_smooth(matrix: &ComomentMatrix) -> ComomentMatrix {
    let (rows, cols) = (matrix.rows(), matrix.cols());
    let mut order: Vec<(usize, usize, f64)> = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .map(|(r, c)| (r, c, matrix.raw[r][c] * matrix.raw[r][c]))
        .collect();
    order.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));

    let n = matrix.n.max(2) as f64;
    let penalty = 2.0 * n.ln() / n;
    let mut bic_path = Vec::with_capacity(order.len() + 1);
    bic_path.push(0.0);
    let mut acc = 0.0;
    for (m, entry) in order.iter().enumerate() {
        acc += entry.2;
        bic_path.push(acc - (m + 1) as f64 * penalty);
    }
    let selected = bic_path
        .iter()
        .enumerate()
        .fold(0, |best, (m, &v)| if v > bic_path[best] { m } else { best });

    let mut smooth = vec![vec![0.0; cols]; rows];
    let mut mask = vec![vec![false; cols]; rows];
    for &(r, c, _) in &order[..selected] {
        smooth[r][c] = matrix.raw[r][c];
        mask[r][c] = true;
    }
    ComomentMatrix {
        smoothing: Some(Smoothing {
            smooth,
            mask,
            bic_path,
            selected,
        }),
        ..matrix.clone()
    }
}

/// `Σ_j Σ_k LP_A[j] · M[j,k] · LP_B[k]`, the Pearson correlation rebuilt from
/// LP moments and comoments.
pub fn lp_autocorrelation(
    mom_a: &LPMomentVector,
    mom_b: &LPMomentVector,
    matrix: &ComomentMatrix,
    use_smooth: bool,
) -> Result<f64> {
    let m = matrix.entries(use_smooth)?;
    if mom_a.len() < matrix.rows() || mom_b.len() < matrix.cols() {
        return Err(LpError::DimensionMismatch(format!(
            "moments of length {} and {} against a {}x{} matrix",
            mom_a.len(),
            mom_b.len(),
            matrix.rows(),
            matrix.cols()
        )));
    }
    Ok(m.iter()
        .enumerate()
        .map(|(j, row)| {
            mom_a.values[j]
                * row
                    .iter()
                    .zip(&mom_b.values)
                    .map(|(c, b)| c * b)
                    .sum::<f64>()
        })
        .sum())
}

/// Sum of squared comoments (selected entries only when `use_smooth`).
pub fn lpinfor_stat(matrix: &ComomentMatrix, use_smooth: bool) -> Result<f64> {
    Ok(matrix
        .entries(use_smooth)?
        .iter()
        .flatten()
        .map(|c| c * c)
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Correlogram {
    /// `acf[j][h - 1]` is the lag-`h` autocorrelation of `YS_{j+1}`.
    pub acf: Vec<Vec<f64>>,
    pub max_lag: usize,
    /// Half-width `1.96 / √T` of the white-noise band.
    pub band: f64,
}

impl Correlogram {
    /// Fraction of entries of component `j` (1-based) outside the band.
    pub fn fraction_outside(&self, j: usize) -> f64 {
        let col = &self.acf[j - 1];
        col.iter().filter(|v| v.abs() > self.band).count() as f64 / col.len() as f64
    }
}

/// Autocorrelation functions of every LP component up to `max_lag`.
pub fn lp_correlogram(series: &LPSeries, max_lag: usize) -> Result<Correlogram> {
    if max_lag == 0 {
        return Err(LpError::InvalidArgument("max_lag must be at least 1".into()));
    }
    if 4 * max_lag >= series.len() {
        return Err(LpError::InsufficientOverlap {
            lag: max_lag,
            overlap: series.len() - max_lag.min(series.len()),
            required: 3 * max_lag + 1,
        });
    }
    let t = series.len();
    let acf = series
        .columns()
        .iter()
        .map(|col| {
            (1..=max_lag)
                .map(|h| {
                    col[..t - h].iter().zip(&col[h..]).map(|(a, b)| a * b).sum::<f64>()
                        / (t - h) as f64
                })
                .collect()
        })
        .collect();
    Ok(Correlogram {
        acf,
        max_lag,
        band: 1.96 / (t as f64).sqrt(),
    })
}

/// Comoments of the time index (scored with exact Legendre polynomials at
/// `(t − ½)/T`) against the LP components of the series.
pub fn nonstationarity_comoment(sample: &SeriesSample, k: usize) -> Result<ComomentMatrix> {
    let series = lp_transform(sample, k)?;
    nonstationarity_comoment_series(&series)
}

pub fn nonstationarity_comoment_series(series: &LPSeries) -> Result<ComomentMatrix> {
    let t = series.len();
    let k = series.k();
    let time_scores: Vec<Vec<f64>> = (1..=k)
        .map(|j| {
            (0..t)
                .map(|i| legendre_score(j, (i as f64 + 0.5) / t as f64))
                .collect()
        })
        .collect();
    let raw = time_scores
        .iter()
        .map(|a| {
            series
                .columns()
                .iter()
                .map(|b| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / t as f64)
                .collect()
        })
        .collect();
    ComomentMatrix::from_raw(Pairing::TimeIndex, raw, t)
}

/// LP decomposition of a finite joint distribution under complete bases.
#[derive(Debug, Clone, PartialEq)]
pub struct JointLp {
    pub x_basis: ScoreBasis,
    pub y_basis: ScoreBasis,
    pub x_moments: LPMomentVector,
    pub y_moments: LPMomentVector,
    pub matrix: ComomentMatrix,
}

/// Builds complete score bases for the two margins of `pmf[a][b] =
/// P(X = x_support[a], Y = y_support[b])` and the comoment matrix
/// `E[T_j(X) T_m(Y)]`.
pub fn joint_pmf_comoments(x_support: &[f64], y_support: &[f64], pmf: &[Vec<f64>]) -> Result<JointLp> {
    if pmf.len() != x_support.len() || pmf.iter().any(|r| r.len() != y_support.len()) {
        return Err(LpError::DimensionMismatch("pmf shape does not match supports".into()));
    }
    let total: f64 = pmf.iter().flatten().sum();
    if !(total > 0.0) {
        return Err(LpError::InvalidArgument("pmf has no mass".into()));
    }
    let px: Vec<f64> = pmf.iter().map(|r| r.iter().sum::<f64>() / total).collect();
    let py: Vec<f64> = (0..y_support.len())
        .map(|b| pmf.iter().map(|r| r[b]).sum::<f64>() / total)
        .collect();
    let x_dist = MidDistribution::from_weighted(x_support, &px)?;
    let y_dist = MidDistribution::from_weighted(y_support, &py)?;
    let x_basis = build_score_basis(&x_dist, x_dist.n_distinct() - 1)?;
    let y_basis = build_score_basis(&y_dist, y_dist.n_distinct() - 1)?;
    let x_moments = lp_moments_from_basis(&x_dist, &x_basis)?;
    let y_moments = lp_moments_from_basis(&y_dist, &y_basis)?;

    let mut raw = vec![vec![0.0; y_basis.k()]; x_basis.k()];
    for (a, row) in pmf.iter().enumerate() {
        for (b, &p) in row.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let (Some(ia), Some(ib)) = (x_dist.index_of(x_support[a]), y_dist.index_of(y_support[b])) else {
                continue;
            };
            for (j, r) in raw.iter_mut().enumerate() {
                let tj = x_basis.score_values(j + 1)[ia];
                for (m, cell) in r.iter_mut().enumerate() {
                    *cell += p / total * tj * y_basis.score_values(m + 1)[ib];
                }
            }
        }
    }
    let matrix = ComomentMatrix::from_raw(Pairing::Joint, raw, 0)?;
    Ok(JointLp {
        x_basis,
        y_basis,
        x_moments,
        y_moments,
        matrix,
    })
}
