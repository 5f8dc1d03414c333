//! LP moments, the tail index and the orthogonal quantile representation.

use serde::{Deserialize, Serialize};

use crate::basis::{build_score_basis, eval_score, ScoreBasis};
use crate::empirical::{MidDistribution, SeriesSample};
use crate::error::{check_probability, LpError, Result};

/// Default cumulative-variance threshold for the tail index.
pub const DEFAULT_TAIL_THRESHOLD: f64 = 0.95;

/// `LP(j; Y) = E[Z(Y) T_j(Y)]` for `j = 1..k`, with running sums of squares.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LPMomentVector {
    pub values: Vec<f64>,
    pub cumsum: Vec<f64>,
    /// Number of moments requested; `values.len()` is smaller when the
    /// basis had to be capped.
    pub k_requested: usize,
}

impl LPMomentVector {
    pub fn from_values(values: Vec<f64>) -> Self {
        let cumsum = values
            .iter()
            .scan(0.0, |acc, v| {
                *acc += v * v;
                Some(*acc)
            })
            .collect();
        let k_requested = values.len();
        Self {
            values,
            cumsum,
            k_requested,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `LP(j)`, 1-based.
    pub fn get(&self, j: usize) -> f64 {
        self.values[j - 1]
    }
}

/// LP moments of a distribution with respect to an existing basis.
pub fn lp_moments_from_basis(dist: &MidDistribution, basis: &ScoreBasis) -> Result<LPMomentVector> {
    let (mean, var) = dist.moments();
    if !(var > 0.0) {
        return Err(LpError::DegenerateDistribution("zero variance".into()));
    }
    let sd = var.sqrt();
    let z: Vec<f64> = dist.distinct_values().iter().map(|y| (y - mean) / sd).collect();
    let values = (1..=basis.k())
        .map(|j| {
            basis
                .score_values(j)
                .iter()
                .zip(&z)
                .zip(dist.masses())
                .map(|((t, z), p)| p * z * t)
                .sum()
        })
        .collect();
    let mut out = LPMomentVector::from_values(values);
    out.k_requested = basis.requested_k();
    Ok(out)
}

pub fn lp_moments(sample: &SeriesSample, k_moments: usize) -> Result<LPMomentVector> {
    let dist = MidDistribution::from_sample(sample)?;
    let basis = build_score_basis(&dist, k_moments)?;
    lp_moments_from_basis(&dist, &basis)
}

/// `LP(1)` of the standard normal, `√(3/π)`.
pub fn lp_moment_normal_first() -> f64 {
    (3.0 / std::f64::consts::PI).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TailIndex {
    pub index: usize,
    /// Set when the cumulative sum never exceeded the threshold.
    pub saturated: bool,
}

/// Smallest `j` whose cumulative `Σ LP(i)²` exceeds `threshold`.
pub fn lp_tail_index(moments: &LPMomentVector, threshold: f64) -> TailIndex {
    match moments.cumsum.iter().position(|&c| c > threshold) {
        Some(i) => TailIndex {
            index: i + 1,
            saturated: false,
        },
        None => TailIndex {
            index: moments.len(),
            saturated: true,
        },
    }
}

/// Partial sum `Σ_j LP(j) S_j(u)` approximating the quantile function of `Z(Y)`.
pub fn quantile_reconstruction(moments: &LPMomentVector, basis: &ScoreBasis, u: f64) -> Result<f64> {
    check_probability(u)?;
    let k = moments.len().min(basis.k());
    (1..=k).try_fold(0.0, |acc, j| Ok(acc + moments.get(j) * eval_score(basis, j, u)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceDistribution {
    pub name: String,
    pub lp: [f64; 4],
}

/// First four LP moments of a few standard distributions.
pub fn reference_table() -> Vec<ReferenceDistribution> {
    serde_json::from_str(include_str!("../data/lp_moment_reference.json"))
        .expect("bundled reference table is valid")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NearestReference {
    pub name: String,
    pub distance: f64,
}

/// Closest reference distribution in Euclidean distance over `LP(1..4)`.
pub fn nearest_reference(moments: &LPMomentVector) -> NearestReference {
    let own: Vec<f64> = (0..4).map(|i| moments.values.get(i).copied().unwrap_or(0.0)).collect();
    reference_table()
        .into_iter()
        .map(|r| {
            let distance = r
                .lp
                .iter()
                .zip(&own)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            NearestReference {
                name: r.name,
                distance,
            }
        })
        .min_by(|a, b| a.distance.total_cmp(&b.distance))
        .expect("reference table is not empty")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_constant() {
        assert!((lp_moment_normal_first() - 0.977_205_023_805_839_8).abs() < 1e-15);
        assert_eq!((lp_moment_normal_first() * 1000.0).round() / 1000.0, 0.977);
    }

    #[test]
    fn tail_index_examples() {
        let normal = LPMomentVector::from_values(vec![0.977, 0.0, 0.184, 0.0]);
        assert_eq!(lp_tail_index(&normal, DEFAULT_TAIL_THRESHOLD).index, 1);
        let uniform = LPMomentVector::from_values(vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(lp_tail_index(&uniform, DEFAULT_TAIL_THRESHOLD).index, 1);
        let flat = LPMomentVector::from_values(vec![0.6; 5]);
        assert_eq!(
            lp_tail_index(&flat, DEFAULT_TAIL_THRESHOLD),
            TailIndex { index: 3, saturated: false }
        );
        let heavy = LPMomentVector::from_values(vec![0.5, 0.0, 0.4, 0.0]);
        assert_eq!(
            lp_tail_index(&heavy, DEFAULT_TAIL_THRESHOLD),
            TailIndex { index: 4, saturated: true }
        );
    }

    #[test]
    fn reference_lookup() {
        let table = reference_table();
        assert_eq!(table.len(), 5);
        let near = nearest_reference(&LPMomentVector::from_values(vec![0.97, 0.01, 0.18, 0.0]));
        assert_eq!(near.name, "N(0,1)");
        let near = nearest_reference(&LPMomentVector::from_values(vec![0.87, 0.37, 0.22, 0.15, 0.1]));
        assert_eq!(near.name, "Exp(1)");
    }

    #[test]
    fn complete_basis_decomposes_variance() {
        let s = SeriesSample::new(vec![0.2, -1.0, 3.5, 0.2, 7.0, -2.2, 1.1, 1.1, 0.0]).unwrap();
        let m = lp_moments(&s, 100).unwrap();
        assert_eq!(m.len(), 6);
        assert!((m.cumsum.last().unwrap() - 1.0).abs() < 1e-10);
    }
}
