mod common;

use lptime_core::basis::{lp_transform, MarginalScores};
use lptime_core::comoment::{
    bic_smooth, joint_pmf_comoments, lp_autocorrelation, lp_comoment_matrix, lp_correlogram,
    nonstationarity_comoment, lpinfor_stat, ComomentMatrix, Pairing,
};
use lptime_core::conditional::{conditional_quantiles, sample_conditional};
use lptime_core::copula::{
    auto_lpinfor, blomqvist_beta, conditional_lpinfor, copula_cdf, copula_density, granger_lin,
    quantile_correlation, serial_copula, CopulaModel,
};
use lptime_core::empirical::SeriesSample;
use lptime_core::quadrature::gauss_legendre_on;
use lptime_core::spectrum::{copula_spectral_density, frequency_grid};
use proptest::prelude::*;
use rand::Rng;

fn legendre_model(coef: Vec<Vec<f64>>, k: usize) -> CopulaModel {
    CopulaModel::from_coefficients(coef, MarginalScores::legendre(k, 24), MarginalScores::legendre(k, 24)).unwrap()
}

fn matrix(k: usize, scale: f64) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-scale..scale, k), k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bic_smoothing_is_idempotent(raw in matrix(4, 0.3), n in 20usize..5000) {
        let m = ComomentMatrix::from_raw(Pairing::Serial(1), raw, n).unwrap();
        let once = bic_smooth(&m);
        let twice = bic_smooth(&once.smooth_as_raw().unwrap());
        prop_assert_eq!(once.smooth(), twice.smooth());
    }

    #[test]
    fn parseval_legendre(coef in matrix(4, 0.1)) {
        let m = legendre_model(coef, 4);
        let direct = m.integrate_density(|c| c * c) - 1.0;
        prop_assert!((auto_lpinfor(&m) - direct).abs() < 1e-8);
        let (nodes, w): (Vec<f64>, Vec<f64>) = gauss_legendre_on(24, 0.0, 1.0).into_iter().unzip();
        for &u in &[0.05, 0.37, 0.5, 0.81] {
            let int: f64 = nodes.iter().zip(&w).map(|(v, w)| w * copula_density(&m, u, *v).unwrap().powi(2)).sum();
            prop_assert!((conditional_lpinfor(&m, u).unwrap() - (int - 1.0)).abs() < 1e-8);
        }
    }

    #[test]
    fn blomqvist_matches_quadrature(coef in matrix(4, 0.2)) {
        let m = legendre_model(coef, 4);
        let rule = gauss_legendre_on(12, 0.0, 0.5);
        let mut cop = 0.0;
        for (u, wu) in &rule {
            for (v, wv) in &rule {
                cop += wu * wv * copula_density(&m, *u, *v).unwrap();
            }
        }
        prop_assert!((blomqvist_beta(&m) - (4.0 * cop - 1.0)).abs() < 1e-8);
        prop_assert!((4.0 * copula_cdf(&m, 0.5, 0.5).unwrap() - 1.0 - blomqvist_beta(&m)).abs() < 1e-12);
    }

    #[test]
    fn small_dependence_granger_lin_is_half(coef in matrix(3, 0.03)) {
        let norm2: f64 = coef.iter().flatten().map(|c| c * c).sum();
        prop_assume!(norm2 > 1e-6 && norm2 <= 0.0025);
        let m = legendre_model(coef, 3);
        let ratio = auto_lpinfor(&m) / granger_lin(&m).unwrap();
        prop_assert!((1.9..=2.1).contains(&ratio), "ratio {}", ratio);
    }

    #[test]
    fn conditional_quantiles_never_cross(seed in 0u64..1000, c in -0.5f64..0.5, u in 0.01f64..0.99) {
        let v = common::normals(300, seed);
        let s = SeriesSample::new(v).unwrap();
        let series = lp_transform(&s, 2).unwrap();
        let m = CopulaModel::from_coefficients(vec![vec![c, 0.0], vec![0.0, c / 2.0]], series.marginal(), series.marginal()).unwrap();
        let draws = sample_conditional(&s, &m, u, 400, seed).unwrap();
        let q = conditional_quantiles(&draws, &[0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99]).unwrap();
        prop_assert!(q.quantiles.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn parseval_with_empirical_margins() {
    let v = common::ar_series(&[0.4], 400, 3);
    let series = lp_transform(&SeriesSample::new(v).unwrap(), 4).unwrap();
    let raw = lp_comoment_matrix(&series, 1).unwrap();
    let m = CopulaModel::from_coefficients(raw.raw.clone(), series.marginal(), series.marginal())
        .unwrap()
        .with_exact_quadrature();
    let direct = m.integrate_density(|c| c * c) - 1.0;
    assert!((auto_lpinfor(&m) - direct).abs() < 1e-8);
}

#[test]
fn pearson_from_joint_pmf() {
    let mut r = common::rng(99);
    for _ in 0..20 {
        let nx = r.random_range(2..=5);
        let ny = r.random_range(2..=5);
        let xs: Vec<f64> = (0..nx).map(|i| i as f64 + r.random::<f64>()).collect();
        let ys: Vec<f64> = (0..ny).map(|i| 2.0 * i as f64 + r.random::<f64>()).collect();
        let pmf: Vec<Vec<f64>> = (0..nx).map(|_| common::uniform_probs(ny, &mut r)).collect();
        let total: f64 = pmf.iter().flatten().sum();
        let (mut ex, mut ey, mut exx, mut eyy, mut exy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for a in 0..nx {
            for b in 0..ny {
                let p = pmf[a][b] / total;
                ex += p * xs[a];
                ey += p * ys[b];
                exx += p * xs[a] * xs[a];
                eyy += p * ys[b] * ys[b];
                exy += p * xs[a] * ys[b];
            }
        }
        let pearson = (exy - ex * ey) / ((exx - ex * ex) * (eyy - ey * ey)).sqrt();
        let j = joint_pmf_comoments(&xs, &ys, &pmf).unwrap();
        let lp = lp_autocorrelation(&j.x_moments, &j.y_moments, &j.matrix, false).unwrap();
        assert!((lp - pearson).abs() < 1e-8, "{lp} vs {pearson}");
    }
}

#[test]
fn independence_quantile_correlation() {
    let m = legendre_model(vec![vec![0.0; 4]; 4], 4);
    for i in 1..100 {
        let u = i as f64 / 100.0;
        assert!((quantile_correlation(&m, u).unwrap() - u.min(1.0 - u)).abs() < 1e-10);
    }
}

#[test]
fn copula_spectrum_closed_form() {
    let c = 0.25;
    let lag1 = legendre_model(vec![vec![c]], 1);
    let zero = legendre_model(vec![vec![0.0]], 1);
    let grid = frequency_grid(65);
    for &(u, v) in &[(0.1, 0.1), (0.2, 0.7), (0.9, 0.4)] {
        let s = copula_spectral_density(&[lag1.clone(), zero.clone()], u, v, &grid).unwrap();
        let d = copula_density(&lag1, u, v).unwrap() - 1.0;
        for (w, (re, im)) in grid.iter().zip(s.real.iter().zip(&s.imag)) {
            let want = 1.0 + 2.0 * d * (2.0 * std::f64::consts::PI * w).cos();
            assert!((re - want).abs() < 1e-12);
            assert!(im.abs() < 1e-10);
        }
    }
    let flat = copula_spectral_density(&[zero.clone(), zero], 0.3, 0.6, &grid).unwrap();
    assert!(flat.real.iter().all(|x| (x - 1.0).abs() < 1e-15));
}

#[test]
fn white_noise_has_no_serial_structure() {
    let v = common::normals(20_000, 8);
    let series = lp_transform(&SeriesSample::new(v).unwrap(), 4).unwrap();
    for h in 1..=5 {
        let (m, model) = serial_copula(&series, h).unwrap();
        assert!(lpinfor_stat(&m, true).unwrap() < 0.002, "lag {h}");
        assert!(auto_lpinfor(&model) < 0.002);
    }
    let c = lp_correlogram(&series, 20).unwrap();
    for j in 1..=4 {
        assert!(c.fraction_outside(j) <= 0.2);
    }
    let ns = bic_smooth(&nonstationarity_comoment(&SeriesSample::new(common::normals(5000, 4)).unwrap(), 4).unwrap());
    assert!(lpinfor_stat(&ns, true).unwrap() < 0.01);
}

#[test]
fn trend_shows_in_time_index_comoment() {
    let v: Vec<f64> = common::normals(2000, 12).iter().enumerate().map(|(t, e)| t as f64 / 200.0 + e).collect();
    let m = nonstationarity_comoment(&SeriesSample::new(v).unwrap(), 4).unwrap();
    assert!(m.raw[0][0] > 0.8);
}

#[test]
fn ar_dependence_is_detected() {
    let v = common::ar_series(&[0.6], 5000, 21);
    let series = lp_transform(&SeriesSample::new(v).unwrap(), 4).unwrap();
    let (m, model) = serial_copula(&series, 1).unwrap();
    let s = m.smooth().unwrap();
    // Gaussian AR(1): LP[1,1] close to the rank correlation 6/π·asin(ρ/2)
    let spearman = 6.0 / std::f64::consts::PI * (0.3f64).asin();
    assert!((s[0][0] - spearman).abs() < 0.03);
    assert!(blomqvist_beta(&model) > 0.3);
    assert!(quantile_correlation(&model, 0.5).unwrap() > 0.6);
}
