//! Empirical distribution machinery: the mid-distribution transform,
//! step-function quantiles, standardization and the QIQ shape diagnostic.
//!
//! Variances use divisor `T` throughout so that score functions built on
//! the empirical measure are orthonormal exactly, not only asymptotically.

use serde::Serialize;

use crate::error::{check_probability, LpError, Result};

/// Ordered observations of a single series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSample {
    values: Vec<f64>,
    timestamps: Option<Vec<String>>,
}

impl SeriesSample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(LpError::InvalidSample(format!(
                "need at least 2 observations, got {}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(LpError::InvalidSample(format!(
                "non-finite value {} at position {}",
                values[pos],
                pos + 1
            )));
        }
        Ok(Self {
            values,
            timestamps: None,
        })
    }

    /// Attaches one label per observation (dates, usually).
    pub fn with_timestamps(mut self, timestamps: Vec<String>) -> Result<Self> {
        if timestamps.len() != self.values.len() {
            return Err(LpError::DimensionMismatch(format!(
                "{} timestamps for {} observations",
                timestamps.len(),
                self.values.len()
            )));
        }
        self.timestamps = Some(timestamps);
        Ok(self)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn timestamps(&self) -> Option<&[String]> {
        self.timestamps.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// The empirical distribution of a sample summarized on its distinct values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MidDistribution {
    distinct_values: Vec<f64>,
    masses: Vec<f64>,
    cdf: Vec<f64>,
    middist: Vec<f64>,
}

impl MidDistribution {
    /// Builds the distribution of a sample, pooling tied observations.
    pub fn from_sample(sample: &SeriesSample) -> Result<Self> {
        let mut sorted = sample.values().to_vec();
        sorted.sort_by(f64::total_cmp);

        let n = sorted.len() as f64;
        let mut distinct_values = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        for &v in &sorted {
            match distinct_values.last() {
                Some(&last) if last == v => *counts.last_mut().unwrap() += 1,
                _ => {
                    distinct_values.push(v);
                    counts.push(1);
                }
            }
        }
        if distinct_values.len() < 2 {
            return Err(LpError::DegenerateDistribution(
                "sample has a single distinct value".into(),
            ));
        }

        let mut cumulative = 0usize;
        let mut masses = Vec::with_capacity(counts.len());
        let mut cdf = Vec::with_capacity(counts.len());
        let mut middist = Vec::with_capacity(counts.len());
        for &c in &counts {
            cumulative += c;
            masses.push(c as f64 / n);
            cdf.push(cumulative as f64 / n);
            middist.push((2 * cumulative - c) as f64 / (2.0 * n));
        }
        Ok(Self {
            distinct_values,
            masses,
            cdf,
            middist,
        })
    }

    /// Builds a distribution from support points and nonnegative weights.
    ///
    /// Weights are normalized to sum to one; points with zero weight are
    /// dropped and repeated points are merged.
    pub fn from_weighted(values: &[f64], weights: &[f64]) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(LpError::DimensionMismatch(format!(
                "{} values for {} weights",
                values.len(),
                weights.len()
            )));
        }
        if values.iter().chain(weights).any(|v| !v.is_finite()) {
            return Err(LpError::InvalidSample("non-finite value or weight".into()));
        }
        if weights.iter().any(|&w| w < 0.0) {
            return Err(LpError::InvalidArgument("negative weight".into()));
        }
        let mut pairs: Vec<(f64, f64)> = values
            .iter()
            .zip(weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(&v, &w)| (v, w))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut distinct_values: Vec<f64> = Vec::new();
        let mut raw: Vec<f64> = Vec::new();
        for (v, w) in pairs {
            match distinct_values.last() {
                Some(&last) if last == v => *raw.last_mut().unwrap() += w,
                _ => {
                    distinct_values.push(v);
                    raw.push(w);
                }
            }
        }
        if distinct_values.len() < 2 {
            return Err(LpError::DegenerateDistribution(
                "fewer than two support points carry mass".into(),
            ));
        }
        let total: f64 = raw.iter().sum();
        let masses: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let mut cdf = Vec::with_capacity(masses.len());
        let mut middist = Vec::with_capacity(masses.len());
        let mut acc = 0.0;
        for &p in &masses {
            middist.push(acc + p / 2.0);
            acc += p;
            cdf.push(acc);
        }
        *cdf.last_mut().unwrap() = 1.0;
        Ok(Self {
            distinct_values,
            masses,
            cdf,
            middist,
        })
    }

    pub fn distinct_values(&self) -> &[f64] {
        &self.distinct_values
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    pub fn middist(&self) -> &[f64] {
        &self.middist
    }

    pub fn n_distinct(&self) -> usize {
        self.distinct_values.len()
    }

    /// Position of `y` among the distinct values, if it is one of them.
    pub fn index_of(&self, y: f64) -> Option<usize> {
        self.distinct_values
            .binary_search_by(|v| v.total_cmp(&y))
            .ok()
    }

    /// Index of the smallest distinct value whose cdf reaches `u`.
    pub fn quantile_index(&self, u: f64) -> Result<usize> {
        check_probability(u)?;
        let idx = self.cdf.partition_point(|&c| c < u);
        Ok(idx.min(self.cdf.len() - 1))
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        Ok(self.distinct_values[self.quantile_index(u)?])
    }

    /// Lower edge of the probability cell owned by distinct value `i`.
    pub fn cell_start(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.cdf[i - 1]
        }
    }

    /// Mean and population variance of the distinct values under the masses.
    pub fn moments(&self) -> (f64, f64) {
        let mean: f64 = self
            .distinct_values
            .iter()
            .zip(&self.masses)
            .map(|(v, p)| v * p)
            .sum();
        let var: f64 = self
            .distinct_values
            .iter()
            .zip(&self.masses)
            .map(|(v, p)| p * (v - mean) * (v - mean))
            .sum();
        (mean, var)
    }
}

pub fn empirical_mid_distribution(sample: &SeriesSample) -> Result<MidDistribution> {
    MidDistribution::from_sample(sample)
}

/// Mid-rank `F̃ᵐ(Y(t))` of every observation, in observation order.
pub fn mid_rank_series(sample: &SeriesSample) -> Result<Vec<f64>> {
    let dist = MidDistribution::from_sample(sample)?;
    Ok(sample
        .values()
        .iter()
        .map(|&y| dist.middist()[dist.index_of(y).expect("observation in support")])
        .collect())
}

/// Left-continuous inverse of the empirical cdf.
pub fn empirical_quantile(sample: &SeriesSample, u: f64) -> Result<f64> {
    check_probability(u)?;
    let mut sorted = sample.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(step_quantile_sorted(&sorted, u))
}

/// Step quantile of already sorted data: the `ceil(u n)`-th order statistic.
pub(crate) fn step_quantile_sorted(sorted: &[f64], u: f64) -> f64 {
    let n = sorted.len();
    let pos = (u * n as f64).ceil() as usize;
    sorted[pos.clamp(1, n) - 1]
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub(crate) fn population_variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

/// Standardizes to mean 0 and (divisor-`T`) variance 1.
pub fn normalize(sample: &SeriesSample) -> Result<Vec<f64>> {
    normalize_values(sample.values())
}

pub(crate) fn normalize_values(values: &[f64]) -> Result<Vec<f64>> {
    let m = mean(values);
    let sd = population_variance(values).sqrt();
    if !(sd > 0.0) || sd < f64::EPSILON * m.abs().max(1.0) {
        return Err(LpError::DegenerateDistribution("zero variance".into()));
    }
    Ok(values.iter().map(|v| (v - m) / sd).collect())
}

/// Informative quantile function `(Q(u) - MQ) / DQ` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QiqCurve {
    pub grid: Vec<f64>,
    pub qiq: Vec<f64>,
    /// Mid-quartile `(Q1 + Q3) / 2`.
    pub mq: f64,
    /// Quartile deviation `2 (Q3 - Q1)`.
    pub dq: f64,
}

pub fn qiq_curve(sample: &SeriesSample, grid: &[f64]) -> Result<QiqCurve> {
    for &u in grid {
        check_probability(u)?;
    }
    let mut sorted = sample.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = step_quantile_sorted(&sorted, 0.25);
    let q3 = step_quantile_sorted(&sorted, 0.75);
    if q3 <= q1 {
        return Err(LpError::DegenerateDistribution(
            "upper and lower quartiles coincide".into(),
        ));
    }
    let mq = 0.5 * (q1 + q3);
    let dq = 2.0 * (q3 - q1);
    let qiq = grid
        .iter()
        .map(|&u| (step_quantile_sorted(&sorted, u) - mq) / dq)
        .collect();
    Ok(QiqCurve {
        grid: grid.to_vec(),
        qiq,
        mq,
        dq,
    })
}

/// Probability levels must lie in (0, 1) and be sorted ascending.
pub fn check_sorted_levels(levels: &[f64]) -> Result<()> {
    for &p in levels {
        check_probability(p)?;
    }
    if levels.windows(2).any(|w| w[1] < w[0]) {
        return Err(LpError::InvalidArgument("levels must be sorted ascending".into()));
    }
    Ok(())
}

/// `n` equispaced interior points `i / (n + 1)`.
pub fn probability_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64 / (n + 1) as f64).collect()
}
