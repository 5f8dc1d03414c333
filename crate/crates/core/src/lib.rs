//! Mid-rank LP score transforms of univariate time series and the dependence
//! diagnostics built on them: LP moments and comoments, nonparametric copula
//! densities and their summaries, conditional quantile simulation, Burg AR
//! spectra, and vector autoregressions on the transformed components.

pub mod basis;
pub mod comoment;
pub mod conditional;
pub mod copula;
pub mod empirical;
pub mod error;
pub mod moments;
pub mod normal;
pub mod quadrature;
pub mod spectrum;
pub mod var;

pub use basis::{lp_transform, CapReason, LPSeries, MarginalScores, ScoreBasis, DEFAULT_K, DEFAULT_K_MOMENTS};
pub use comoment::{ComomentMatrix, Correlogram, Pairing};
pub use copula::CopulaModel;
pub use empirical::{MidDistribution, QiqCurve, SeriesSample};
pub use error::{LpError, Result};
pub use moments::LPMomentVector;
pub use spectrum::{ArFit, Criterion, SpectralCurve};
pub use var::VarModel;

/// Library version, recorded in report metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
