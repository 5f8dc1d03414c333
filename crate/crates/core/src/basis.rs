//! Data-adaptive orthonormal score functions and the LP-transformed series.
//!
//! `T_1` is the standardized mid-rank. Higher scores come from weighted
//! Gram–Schmidt (modified, with one re-orthogonalization sweep) under the
//! sample masses, so every score has mean zero and unit variance under the
//! empirical measure. On tie-free data the scores approach the shifted
//! orthonormal Legendre polynomials evaluated at the mid-ranks.

use serde::Serialize;

use crate::empirical::{normalize_values, MidDistribution, SeriesSample};
use crate::error::{check_probability, LpError, Result};
use crate::quadrature::{gauss_legendre_on, legendre_p};

/// Default number of score functions used for comoments and copulas.
pub const DEFAULT_K: usize = 4;
/// Default number of LP moments used for the tail index.
pub const DEFAULT_K_MOMENTS: usize = 20;

const PIVOT_TOLERANCE: f64 = 1e-12;

/// Why a basis holds fewer functions than requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CapReason {
    /// Only `#distinct - 1` non-constant orthonormal functions exist.
    SupportSize,
    /// Gram–Schmidt residual fell below the pivot tolerance.
    Collinear,
}

/// Orthonormal score functions tabulated on the distinct values of a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreBasis {
    dist: MidDistribution,
    requested_k: usize,
    cap: Option<CapReason>,
    sigma_middist: f64,
    /// `values[j][i]` is `T_{j+1}` at distinct value `i`.
    values: Vec<Vec<f64>>,
    /// `poly[j][p]` is the coefficient of `T_1^p` in `T_{j+1}`.
    poly: Vec<Vec<f64>>,
    /// `prefix[j][i]` is `sum_{l < i} p_l T_{j+1}(l)`.
    prefix: Vec<Vec<f64>>,
}

fn weighted_dot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a).zip(b).map(|((w, a), b)| w * a * b).sum()
}

impl ScoreBasis {
    pub fn k(&self) -> usize {
        self.values.len()
    }

    pub fn requested_k(&self) -> usize {
        self.requested_k
    }

    /// `Some` when fewer than the requested number of functions were built.
    pub fn cap_reason(&self) -> Option<CapReason> {
        self.cap
    }

    pub fn is_capped(&self) -> bool {
        self.cap.is_some()
    }

    pub fn distribution(&self) -> &MidDistribution {
        &self.dist
    }

    /// Standard deviation of the mid-rank under the sample masses.
    pub fn sigma_middist(&self) -> f64 {
        self.sigma_middist
    }

    /// Values of `T_j` (1-based `j`) at the distinct sample values.
    pub fn score_values(&self, j: usize) -> &[f64] {
        &self.values[j - 1]
    }

    /// Coefficients of `T_j` as a polynomial in `T_1`, lowest degree first.
    pub fn polynomial(&self, j: usize) -> &[f64] {
        &self.poly[j - 1]
    }

    /// `T_j` evaluated at an arbitrary value of `T_1` through the polynomial form.
    pub fn eval_polynomial(&self, j: usize, t1: f64) -> f64 {
        self.poly[j - 1].iter().rev().fold(0.0, |acc, c| acc * t1 + c)
    }

    /// `T_j(y)` for an observed value `y`.
    pub fn score_at_value(&self, j: usize, y: f64) -> Option<f64> {
        self.dist.index_of(y).map(|i| self.values[j - 1][i])
    }

    /// `∫_0^x S_j(u) du` for `x` in `[0, 1]`, exact over the cells.
    pub fn score_integral(&self, j: usize, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        if x == 0.0 {
            return 0.0;
        }
        let cdf = self.dist.cdf();
        let cell = cdf.partition_point(|&c| c < x).min(cdf.len() - 1);
        self.prefix[j - 1][cell] + (x - self.dist.cell_start(cell)) * self.values[j - 1][cell]
    }
}

/// Builds `k` orthonormal score functions for `dist`.
///
/// `k` is capped at `#distinct - 1`; the cap (or an early stop because of
/// numerical collinearity) is reported through [`ScoreBasis::cap_reason`].
pub fn build_score_basis(dist: &MidDistribution, k: usize) -> Result<ScoreBasis> {
    if k == 0 {
        return Err(LpError::InvalidArgument("k must be at least 1".into()));
    }
    let d = dist.n_distinct();
    if d < 2 {
        return Err(LpError::DegenerateDistribution(
            "need two distinct values".into(),
        ));
    }
    let w = dist.masses();
    let target = k.min(d - 1);
    let mut cap = (target < k).then_some(CapReason::SupportSize);

    let var_mid: f64 = dist
        .middist()
        .iter()
        .zip(w)
        .map(|(m, p)| p * (m - 0.5) * (m - 0.5))
        .sum();
    let sigma = var_mid.sqrt();
    if !(sigma > 0.0) {
        return Err(LpError::DegenerateDistribution(
            "mid-ranks have zero spread".into(),
        ));
    }
    let t1: Vec<f64> = dist.middist().iter().map(|m| (m - 0.5) / sigma).collect();

    // q[0] is the constant function; the returned basis excludes it.
    let mut q: Vec<Vec<f64>> = vec![vec![1.0; d]];
    let mut poly: Vec<Vec<f64>> = vec![vec![1.0]];

    for j in 1..=target {
        let (mut v, mut c) = if j == 1 {
            (t1.clone(), vec![0.0, 1.0])
        } else {
            // T_1 * T_{j-1} spans the same space as T_1^j modulo lower degrees.
            let prev = &q[j - 1];
            let v: Vec<f64> = t1.iter().zip(prev).map(|(a, b)| a * b).collect();
            let mut c = vec![0.0];
            c.extend_from_slice(&poly[j - 1]);
            (v, c)
        };
        let start_norm = weighted_dot(w, &v, &v).sqrt();
        for _sweep in 0..2 {
            for (qi, pi) in q.iter().zip(&poly) {
                let proj = weighted_dot(w, &v, qi);
                v.iter_mut().zip(qi).for_each(|(a, b)| *a -= proj * b);
                c.iter_mut().zip(pi).for_each(|(a, b)| *a -= proj * b);
            }
        }
        let norm = weighted_dot(w, &v, &v).sqrt();
        if !(norm > PIVOT_TOLERANCE * start_norm) {
            cap = Some(CapReason::Collinear);
            break;
        }
        v.iter_mut().for_each(|a| *a /= norm);
        c.iter_mut().for_each(|a| *a /= norm);
        q.push(v);
        poly.push(c);
    }

    if q.len() == 1 {
        return Err(LpError::DegenerateDistribution(
            "no non-constant score function could be built".into(),
        ));
    }
    let values: Vec<Vec<f64>> = q.into_iter().skip(1).collect();
    let poly: Vec<Vec<f64>> = poly.into_iter().skip(1).collect();
    let prefix = values
        .iter()
        .map(|col| {
            let mut acc = 0.0;
            let mut out = Vec::with_capacity(d);
            for (p, t) in w.iter().zip(col) {
                out.push(acc);
                acc += p * t;
            }
            out
        })
        .collect();

    Ok(ScoreBasis {
        dist: dist.clone(),
        requested_k: k,
        cap,
        sigma_middist: sigma,
        values,
        poly,
        prefix,
    })
}

/// Shifted Legendre polynomial on `(0, 1)` normalized to unit `L²` norm.
///
/// `legendre_score(1, u) = √12 (u − ½)`. `j = 0` gives the constant 1.
pub fn legendre_score(j: usize, u: f64) -> f64 {
    ((2 * j + 1) as f64).sqrt() * legendre_p(j, 2.0 * u - 1.0).0
}

/// `∫_0^x legendre_score(j, u) du`.
pub fn legendre_score_integral(j: usize, x: f64) -> f64 {
    if j == 0 {
        return x;
    }
    let s = 2.0 * x - 1.0;
    let jf = (2 * j + 1) as f64;
    jf.sqrt() * (legendre_p(j + 1, s).0 - legendre_p(j - 1, s).0) / (2.0 * jf)
}

/// `S_j(u) = T_j` at the distinct value `Q(u)`.
pub fn eval_score(basis: &ScoreBasis, j: usize, u: f64) -> Result<f64> {
    if j == 0 || j > basis.k() {
        return Err(LpError::InvalidArgument(format!(
            "score index {j} outside 1..={}",
            basis.k()
        )));
    }
    let i = basis.dist.quantile_index(u)?;
    Ok(basis.values[j - 1][i])
}

/// Score functions of one margin of a copula: either fitted to a sample, or
/// the continuous Legendre system (the tie-free limit).
#[derive(Debug, Clone, PartialEq)]
pub enum MarginalScores {
    Empirical(ScoreBasis),
    Legendre {
        k: usize,
        /// Quadrature rule on (0, 1): `(node, weight)`.
        rule: Vec<(f64, f64)>,
    },
}

impl MarginalScores {
    /// Legendre scores with a Gauss–Legendre rule of `nodes` points, exact
    /// for polynomial integrands up to degree `2 nodes − 1`.
    pub fn legendre(k: usize, nodes: usize) -> Self {
        MarginalScores::Legendre {
            k,
            rule: gauss_legendre_on(nodes, 0.0, 1.0),
        }
    }

    pub fn k(&self) -> usize {
        match self {
            MarginalScores::Empirical(b) => b.k(),
            MarginalScores::Legendre { k, .. } => *k,
        }
    }

    /// `S_j(u)`, 1-based `j`.
    pub fn score(&self, j: usize, u: f64) -> Result<f64> {
        check_probability(u)?;
        match self {
            MarginalScores::Empirical(b) => eval_score(b, j, u),
            MarginalScores::Legendre { .. } => Ok(legendre_score(j, u)),
        }
    }

    /// All `k` scores at `u`.
    pub fn scores(&self, u: f64) -> Result<Vec<f64>> {
        check_probability(u)?;
        match self {
            MarginalScores::Empirical(b) => {
                let i = b.dist.quantile_index(u)?;
                Ok(b.values.iter().map(|col| col[i]).collect())
            }
            MarginalScores::Legendre { k, .. } => {
                Ok((1..=*k).map(|j| legendre_score(j, u)).collect())
            }
        }
    }

    /// `∫_0^x S_j(u) du`.
    pub fn score_integral(&self, j: usize, x: f64) -> f64 {
        match self {
            MarginalScores::Empirical(b) => b.score_integral(j, x),
            MarginalScores::Legendre { .. } => legendre_score_integral(j, x.clamp(0.0, 1.0)),
        }
    }

    /// Quadrature over (0, 1) as `(node, weight, scores at node)`.
    ///
    /// For empirical scores the nodes are the mid-ranks with the cell
    /// masses as weights, which integrates any function of the scores exactly.
    pub fn quadrature(&self) -> Vec<(f64, f64, Vec<f64>)> {
        match self {
            MarginalScores::Empirical(b) => b
                .dist
                .middist()
                .iter()
                .zip(b.dist.masses())
                .enumerate()
                .map(|(i, (&u, &p))| (u, p, b.values.iter().map(|col| col[i]).collect()))
                .collect(),
            MarginalScores::Legendre { k, rule } => rule
                .iter()
                .map(|&(u, w)| (u, w, (1..=*k).map(|j| legendre_score(j, u)).collect()))
                .collect(),
        }
    }
}

/// The `T × k` LP-transformed series together with the normalized input.
#[derive(Debug, Clone, PartialEq)]
pub struct LPSeries {
    basis: ScoreBasis,
    /// `columns[j][t] = YS_{j+1}(t)`.
    columns: Vec<Vec<f64>>,
    z: Vec<f64>,
    /// Distinct-value index of each observation.
    cells: Vec<usize>,
}

impl LPSeries {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn k(&self) -> usize {
        self.columns.len()
    }

    pub fn basis(&self) -> &ScoreBasis {
        &self.basis
    }

    pub fn distribution(&self) -> &MidDistribution {
        &self.basis.dist
    }

    /// `YS_j` for 1-based `j`.
    pub fn component(&self, j: usize) -> &[f64] {
        &self.columns[j - 1]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    /// The standardized series `Z(Y(t))`.
    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    /// Mid-rank of each observation.
    pub fn mid_ranks(&self) -> Vec<f64> {
        let m = self.basis.dist.middist();
        self.cells.iter().map(|&i| m[i]).collect()
    }

    pub fn marginal(&self) -> MarginalScores {
        MarginalScores::Empirical(self.basis.clone())
    }
}

/// Transforms a sample into `k` orthonormal score series.
pub fn lp_transform(sample: &SeriesSample, k: usize) -> Result<LPSeries> {
    let dist = MidDistribution::from_sample(sample)?;
    let basis = build_score_basis(&dist, k)?;
    let cells: Vec<usize> = sample
        .values()
        .iter()
        .map(|&y| dist.index_of(y).expect("observation in support"))
        .collect();
    let columns = basis
        .values
        .iter()
        .map(|col| cells.iter().map(|&i| col[i]).collect())
        .collect();
    let z = normalize_values(sample.values())?;
    Ok(LPSeries {
        basis,
        columns,
        z,
        cells,
    })
}
