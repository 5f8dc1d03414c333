//! Conditional distributions of `Y(t + h)` given `Y(t) = Q(u)`: the skew-G
//! reweighting of the empirical distribution by a copula slice, accept-reject
//! simulation from it, and non-crossing conditional quantiles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::copula::CopulaModel;
use crate::empirical::{check_sorted_levels, qiq_curve, step_quantile_sorted, MidDistribution, QiqCurve, SeriesSample};
use crate::error::{check_probability, LpError, Result};

pub const DEFAULT_N_SIM: usize = 10_000;

/// Clipped slice `max(cop(u, v_i), 0)` at the mid-rank of every distinct value.
fn clipped_slice(dist: &MidDistribution, model: &CopulaModel, u: f64) -> Result<Vec<f64>> {
    let beta = crate::copula::conditional_betas(model, u)?;
    dist.middist()
        .iter()
        .map(|&v| {
            let s = model.col_scores().scores(v)?;
            Ok((1.0 + beta.iter().zip(&s).map(|(b, x)| b * x).sum::<f64>()).max(0.0))
        })
        .collect()
}

/// Skew-G conditional mass function on the distinct sample values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalDistribution {
    pub u: f64,
    pub values: Vec<f64>,
    pub masses: Vec<f64>,
}

impl ConditionalDistribution {
    /// Mass at `y`; zero off the sample support.
    pub fn mass_at(&self, y: f64) -> f64 {
        self.values
            .binary_search_by(|v| v.total_cmp(&y))
            .map_or(0.0, |i| self.masses[i])
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().zip(&self.masses).map(|(v, p)| v * p).sum()
    }

    pub fn cdf(&self, y: f64) -> f64 {
        self.values
            .iter()
            .zip(&self.masses)
            .take_while(|(v, _)| **v <= y)
            .map(|(_, p)| p)
            .sum()
    }
}

/// `f̂(y | Y(t) = Q(u)) ∝ p(y) · max(d(F̃ᵐ(y); u), 0)` over the sample support.
pub fn conditional_distribution(sample: &SeriesSample, model: &CopulaModel, u: f64) -> Result<ConditionalDistribution> {
    check_probability(u)?;
    let dist = MidDistribution::from_sample(sample)?;
    let slice = clipped_slice(&dist, model, u)?;
    let raw: Vec<f64> = dist.masses().iter().zip(&slice).map(|(p, d)| p * d).collect();
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) {
        return Err(LpError::DegenerateCopula(format!("slice at u = {u} has no positive mass")));
    }
    Ok(ConditionalDistribution {
        u,
        values: dist.distinct_values().to_vec(),
        masses: raw.iter().map(|r| r / total).collect(),
    })
}

/// Conditional mass at a single value `y` (zero off the support).
pub fn skew_g_density(sample: &SeriesSample, model: &CopulaModel, u: f64, y: f64) -> Result<f64> {
    Ok(conditional_distribution(sample, model, u)?.mass_at(y))
}

/// Draws from the conditional distribution at level `u`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalSample {
    pub u: f64,
    pub draws: Vec<f64>,
    pub seed: u64,
    /// Stream of the seeded generator the draws came from.
    pub stream: u64,
    pub proposals: usize,
    pub acceptance_rate: f64,
}

/// Accept-reject sampling: propose uniformly from the observations, accept with
/// probability `d_clipped(v; u) / M` where `M` is the slice maximum.
pub fn sample_conditional(
    sample: &SeriesSample,
    model: &CopulaModel,
    u: f64,
    n_sim: usize,
    seed: u64,
) -> Result<ConditionalSample> {
    sample_conditional_stream(sample, model, u, n_sim, seed, 0)
}

/// As [`sample_conditional`], drawing from an independent stream of the seeded
/// generator so that several levels can share one seed.
pub fn sample_conditional_stream(
    sample: &SeriesSample,
    model: &CopulaModel,
    u: f64,
    n_sim: usize,
    seed: u64,
    stream: u64,
) -> Result<ConditionalSample> {
    check_probability(u)?;
    if n_sim == 0 {
        return Err(LpError::InvalidArgument("n_sim must be positive".into()));
    }
    let dist = MidDistribution::from_sample(sample)?;
    let slice = clipped_slice(&dist, model, u)?;
    let max = slice.iter().cloned().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(LpError::DegenerateCopula(format!("slice at u = {u} is identically zero")));
    }
    let accept: Vec<f64> = sample
        .values()
        .iter()
        .map(|&y| slice[dist.index_of(y).expect("observation in support")] / max)
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let n = sample.len();
    let mut draws = Vec::with_capacity(n_sim);
    let mut proposals = 0usize;
    while draws.len() < n_sim {
        let i = rng.random_range(0..n);
        proposals += 1;
        if rng.random::<f64>() < accept[i] {
            draws.push(sample.values()[i]);
        }
    }
    Ok(ConditionalSample {
        u,
        draws,
        seed,
        stream,
        proposals,
        acceptance_rate: n_sim as f64 / proposals as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalQuantiles {
    pub u: f64,
    pub levels: Vec<f64>,
    pub quantiles: Vec<f64>,
    /// Levels closer to 0 or 1 than `1 / n_sim`.
    pub extreme_level_unstable: Vec<bool>,
}

/// Empirical (step) quantiles of the draws; nondecreasing across sorted levels.
pub fn conditional_quantiles(cond: &ConditionalSample, levels: &[f64]) -> Result<ConditionalQuantiles> {
    check_sorted_levels(levels)?;
    let mut sorted = cond.draws.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(ConditionalQuantiles {
        u: cond.u,
        levels: levels.to_vec(),
        quantiles: levels.iter().map(|&p| step_quantile_sorted(&sorted, p)).collect(),
        extreme_level_unstable: levels.iter().map(|&p| p < 1.0 / n || p > 1.0 - 1.0 / n).collect(),
    })
}

/// QIQ curve of the simulated conditional distribution.
pub fn conditional_qiq(cond: &ConditionalSample, grid: &[f64]) -> Result<QiqCurve> {
    qiq_curve(&SeriesSample::new(cond.draws.clone())?, grid)
}
