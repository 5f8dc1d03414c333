//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary so the
//! lines are always shown; exits non-zero when any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use lptime_cli::pipeline::run_pipeline;
use lptime_cli::PipelineConfig;
use lptime_core::basis::{lp_transform, MarginalScores};
use lptime_core::comoment::{joint_pmf_comoments, lp_autocorrelation, lp_comoment_matrix};
use lptime_core::conditional::{conditional_quantiles, sample_conditional};
use lptime_core::copula::{
    auto_lpinfor, blomqvist_beta, conditional_lpinfor, copula_density, gaussian_copula_curve, granger_lin,
    quantile_correlation, CopulaModel,
};
use lptime_core::empirical::SeriesSample;
use lptime_core::moments::{lp_moments, lp_tail_index, DEFAULT_TAIL_THRESHOLD};
use lptime_core::quadrature::gauss_legendre_on;
use lptime_core::spectrum::{ar_spectral_density, burg_fit};
use lptime_core::var::{fit_var_columns, fit_var_order, residual_diagnostics};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal, StudentT};
use serde_json::Value;

type Outcome = (bool, String);

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn draw<D: Distribution<f64>>(d: D, n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n).map(|_| d.sample(&mut r)).collect()
}

fn normals(n: usize, seed: u64) -> Vec<f64> {
    draw(StandardNormal, n, seed)
}

fn ar_series(coef: &[f64], n: usize, seed: u64) -> Vec<f64> {
    let burn = 500;
    let e = normals(n + burn, seed);
    let mut y = vec![0.0; n + burn];
    for t in 0..n + burn {
        y[t] = e[t] + coef.iter().enumerate().filter(|(i, _)| t > *i).map(|(i, a)| a * y[t - i - 1]).sum::<f64>();
    }
    y.split_off(burn)
}

fn legendre_model(coef: Vec<Vec<f64>>, k: usize) -> CopulaModel {
    CopulaModel::from_coefficients(coef, MarginalScores::legendre(k, 24), MarginalScores::legendre(k, 24)).unwrap()
}

fn random_matrix(r: &mut ChaCha8Rng, k: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..k).map(|_| (0..k).map(|_| scale * (2.0 * r.random::<f64>() - 1.0)).collect()).collect()
}

fn table_one() -> Outcome {
    let n = 1_000_000;
    let start = Instant::now();
    let cases: Vec<(&str, Vec<f64>, [f64; 4])> = vec![
        ("uniform", draw(rand_distr::Uniform::new(0.0, 1.0).unwrap(), n, 1), [1.0, 0.0, 0.0, 0.0]),
        ("normal", normals(n, 2), [0.977, 0.0, 0.184, 0.0]),
        ("exp", draw(Exp::new(1.0).unwrap(), n, 3), [0.866, 0.373, 0.220, 0.150]),
        ("t4", draw(StudentT::new(4.0).unwrap(), n, 4), [0.902, 0.0, 0.299, 0.0]),
    ];
    let mut ok = true;
    let mut worst = 0.0f64;
    for (_, values, want) in &cases {
        let m = lp_moments(&SeriesSample::new(values.clone()).unwrap(), 4).unwrap();
        for (got, w) in m.values.iter().zip(want) {
            worst = worst.max((got - w).abs());
            ok &= (got - w).abs() <= 0.01;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    (ok && secs < 30.0, format!("max |error| {worst:.4} (tol 0.01), {secs:.1} s (limit 30 s)"))
}

fn analytic_constant() -> Outcome {
    let exact = (3.0 / PI).sqrt();
    let m = lp_moments(&SeriesSample::new(normals(1_000_000, 5)).unwrap(), 20).unwrap();
    let tail = lp_tail_index(&m, DEFAULT_TAIL_THRESHOLD);
    let err = (m.get(1) - exact).abs();
    (err <= 0.005 && tail.index == 1, format!("LP1 {:.5} vs {exact:.6}, tail index {}", m.get(1), tail.index))
}

fn pearson_decomposition() -> Outcome {
    let mut r = rng(6);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let nx = r.random_range(2..=5);
        let ny = r.random_range(2..=5);
        let xs: Vec<f64> = (0..nx).map(|i| i as f64 + r.random::<f64>()).collect();
        let ys: Vec<f64> = (0..ny).map(|i| i as f64 * 0.7 + r.random::<f64>()).collect();
        let pmf: Vec<Vec<f64>> = (0..nx).map(|_| (0..ny).map(|_| r.random::<f64>()).collect()).collect();
        let total: f64 = pmf.iter().flatten().sum();
        let e = |f: &dyn Fn(f64, f64) -> f64| -> f64 {
            (0..nx).flat_map(|a| (0..ny).map(move |b| (a, b))).map(|(a, b)| pmf[a][b] / total * f(xs[a], ys[b])).sum()
        };
        let (mx, my) = (e(&|x, _| x), e(&|_, y| y));
        let cov = e(&|x, y| (x - mx) * (y - my));
        let pearson = cov / (e(&|x, _| (x - mx).powi(2)) * e(&|_, y| (y - my).powi(2))).sqrt();
        let j = joint_pmf_comoments(&xs, &ys, &pmf).unwrap();
        let lp = lp_autocorrelation(&j.x_moments, &j.y_moments, &j.matrix, false).unwrap();
        worst = worst.max((lp - pearson).abs());
    }
    (worst <= 1e-8, format!("max |LP form - Pearson| {worst:.2e} over 20 pmfs (tol 1e-8)"))
}

fn blomqvist_consistency() -> Outcome {
    let mut r = rng(7);
    let rule = gauss_legendre_on(12, 0.0, 0.5);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let m = legendre_model(random_matrix(&mut r, 4, 0.2), 4);
        let mut cop = 0.0;
        for (u, wu) in &rule {
            for (v, wv) in &rule {
                cop += wu * wv * copula_density(&m, *u, *v).unwrap();
            }
        }
        worst = worst.max((blomqvist_beta(&m) - (4.0 * cop - 1.0)).abs());
    }
    let single = |c: f64| blomqvist_beta(&legendre_model(vec![vec![c]], 4));
    let lin = [0.1, -0.3, 0.5].iter().map(|&c| (single(c) - 0.75 * c).abs()).fold(0.0, f64::max);
    let paper = single(0.0705);
    let ok = worst <= 1e-8 && lin <= 1e-8 && (paper - 0.0529).abs() < 5e-5 && (paper - 0.0528).abs() < 1e-4;
    (ok, format!("quadrature gap {worst:.2e}, 0.75c gap {lin:.2e}, beta(0.0705) = {paper:.6}"))
}

fn parseval_suite() -> Outcome {
    let mut r = rng(8);
    let nodes = gauss_legendre_on(24, 0.0, 1.0);
    let (mut worst_auto, mut worst_cond) = (0.0f64, 0.0f64);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..20 {
        let m = legendre_model(random_matrix(&mut r, 4, 0.15), 4);
        worst_auto = worst_auto.max((auto_lpinfor(&m) - (m.integrate_density(|c| c * c) - 1.0)).abs());
        for &u in &[0.1, 0.5, 0.83] {
            let int: f64 = nodes.iter().map(|(v, w)| w * copula_density(&m, u, *v).unwrap().powi(2)).sum();
            worst_cond = worst_cond.max((conditional_lpinfor(&m, u).unwrap() - (int - 1.0)).abs());
        }
        let mut small = random_matrix(&mut r, 4, 1.0);
        let norm = small.iter().flatten().map(|c| c * c).sum::<f64>().sqrt();
        let target = 0.005 + 0.045 * r.random::<f64>();
        small.iter_mut().flatten().for_each(|c| *c *= target / norm);
        let s = legendre_model(small, 4);
        let ratio = auto_lpinfor(&s) / granger_lin(&s).unwrap();
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    // empirical margins, exact cell quadrature
    let series = lp_transform(&SeriesSample::new(ar_series(&[0.4], 2000, 9)).unwrap(), 4).unwrap();
    let raw = lp_comoment_matrix(&series, 1).unwrap().raw;
    let em = CopulaModel::from_coefficients(raw, series.marginal(), series.marginal()).unwrap().with_exact_quadrature();
    worst_auto = worst_auto.max((auto_lpinfor(&em) - (em.integrate_density(|c| c * c) - 1.0)).abs());
    let ok = worst_auto <= 1e-8 && worst_cond <= 1e-8 && lo >= 1.9 && hi <= 2.1;
    (ok, format!("auto gap {worst_auto:.2e}, conditional gap {worst_cond:.2e}, AutoLPinfor/GL in [{lo:.3}, {hi:.3}]"))
}

fn quantile_correlation_checks() -> Outcome {
    let m = legendre_model(vec![vec![0.0; 4]; 4], 4);
    let (mut ind, mut gauss) = (0.0f64, 0.0f64);
    for i in 1..=99 {
        let u = i as f64 / 100.0;
        ind = ind.max((quantile_correlation(&m, u).unwrap() - u.min(1.0 - u)).abs());
        gauss = gauss.max((gaussian_copula_curve(0.0, u).unwrap() - u.min(1.0 - u)).abs());
    }
    let half = gaussian_copula_curve(0.5, 0.5).unwrap();
    let ok = ind <= 1e-10 && gauss <= 1e-10 && (half - 2.0 / 3.0).abs() <= 1e-6;
    (ok, format!("independence gap {ind:.1e}, Gaussian rho=0 gap {gauss:.1e}, lambda(0.5; rho=0.5) = {half:.8}"))
}

fn spectral_recovery() -> Outcome {
    let f1 = burg_fit(&ar_series(&[0.5], 100_000, 10), 10).unwrap();
    let f2 = burg_fit(&ar_series(&[0.5, -0.3], 100_000, 11), 10).unwrap();
    let coef_ok = f1.order == 1
        && (f1.coefficients[0] - 0.5).abs() <= 0.02
        && f2.order == 2
        && (f2.coefficients[0] - 0.5).abs() <= 0.02
        && (f2.coefficients[1] + 0.3).abs() <= 0.02;
    let hits = |coef: &[f64], base: u64| {
        (0..100).filter(|i| burg_fit(&ar_series(coef, 10_000, base + i), 10).unwrap().order == coef.len()).count()
    };
    let (h1, h2) = (hits(&[0.5], 1000), hits(&[0.5, -0.3], 2000));
    let big = burg_fit(&ar_series(&[0.5], 1_000_000, 12), 10).unwrap();
    let f0 = ar_spectral_density(&big, &[0.0]).unwrap().density[0];
    let rel = (f0 / 4.0 - 1.0).abs();
    let ok = coef_ok && h1 >= 95 && h2 >= 95 && rel <= 0.01;
    (
        ok,
        format!(
            "AR(1) {:.4}, AR(2) ({:.4}, {:.4}), BIC hits {h1}/100 and {h2}/100, f(0) {f0:.4} vs 4 ({:.2}%)",
            f1.coefficients.first().unwrap_or(&f64::NAN),
            f2.coefficients.first().unwrap_or(&f64::NAN),
            f2.coefficients.get(1).unwrap_or(&f64::NAN),
            100.0 * rel
        ),
    )
}

fn var_recovery() -> Outcome {
    let cols: Vec<Vec<f64>> = (0..3).map(|c| ar_series(&[0.3], 100_000, 20 + c)).collect();
    let model = fit_var_columns(&cols, 4).unwrap();
    let mut worst = 0.0f64;
    if let Some(a) = model.coefficients.first() {
        for r in 0..3 {
            for c in 0..3 {
                worst = worst.max((a[r][c] - if r == c { 0.3 } else { 0.0 }).abs());
            }
        }
    } else {
        worst = f64::INFINITY;
    }
    let good = residual_diagnostics(&model, &cols).unwrap();
    let bad = residual_diagnostics(&fit_var_order(&cols, 0).unwrap(), &cols).unwrap();
    let ok = model.order == 1 && worst <= 0.02 && good.pass && !bad.pass;
    (
        ok,
        format!(
            "order {}, max entry error {worst:.4}, diagnostics outside band: fit {:.3}, order-0 {:.3}",
            model.order, good.overall_fraction_outside, bad.overall_fraction_outside
        ),
    )
}

fn conditional_quantile_checks() -> Outcome {
    let values = normals(2000, 30);
    let s = SeriesSample::new(values.clone()).unwrap();
    let series = lp_transform(&s, 4).unwrap();
    let mut r = rng(31);
    let dep = CopulaModel::from_coefficients(random_matrix(&mut r, 4, 0.2), series.marginal(), series.marginal()).unwrap();
    let levels = [0.01, 0.05, 0.5, 0.95, 0.99];
    let mut crossings = 0;
    for i in 1..=21 {
        let u = i as f64 / 22.0;
        let q = conditional_quantiles(&sample_conditional(&s, &dep, u, 2000, 32 + i).unwrap(), &levels).unwrap();
        crossings += q.quantiles.windows(2).filter(|w| w[0] > w[1]).count();
    }
    let ind = CopulaModel::from_coefficients(vec![vec![0.0; 4]; 4], series.marginal(), series.marginal()).unwrap();
    let n_sim = 10_000;
    let draws = sample_conditional(&s, &ind, 0.5, n_sim, 40).unwrap();
    let q = conditional_quantiles(&draws, &levels).unwrap();
    // compare on the probability scale: ecdf of the sample at the simulated quantile
    let mut worst_se = 0.0f64;
    for (p, x) in levels.iter().zip(&q.quantiles) {
        let below = values.iter().filter(|v| **v < *x).count() as f64 / values.len() as f64;
        let at = values.iter().filter(|v| **v <= *x).count() as f64 / values.len() as f64;
        let se = (p * (1.0 - p) / n_sim as f64).sqrt();
        let gap = if *p < below { below - p } else if *p > at { p - at } else { 0.0 };
        worst_se = worst_se.max(gap / se);
    }
    let again = sample_conditional(&s, &dep, 0.3, 5000, 99).unwrap();
    let same = sample_conditional(&s, &dep, 0.3, 5000, 99).unwrap();
    let identical = again.draws.iter().zip(&same.draws).all(|(a, b)| a.to_bits() == b.to_bits());
    let ok = crossings == 0 && worst_se <= 2.0 && identical;
    (ok, format!("{crossings} crossings in 21x5 sweep, independence gap {worst_se:.2} MC SE, bit-identical {identical}"))
}

fn arch_pipeline() -> Outcome {
    let n = 10_000;
    let e = normals(n + 500, 50);
    let mut y = vec![0.0f64; n + 500];
    for t in 1..y.len() {
        y[t] = (0.2 + 0.7 * y[t - 1] * y[t - 1]).sqrt() * e[t];
    }
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("arch.csv");
    let mut text = String::from("y\n");
    for v in &y[500..] {
        text.push_str(&format!("{v}\n"));
    }
    std::fs::write(&input, text).unwrap();
    let config = PipelineConfig {
        input: Some(input),
        out_dir: Some(dir.path().join("bundle")),
        seed: Some(51),
        n_sim: 2000,
        ..Default::default()
    };
    let manifest = run_pipeline(config).unwrap();
    let read = |name: &str| -> Value {
        serde_json::from_slice(&std::fs::read(dir.path().join("bundle").join(name)).unwrap()).unwrap()
    };
    let all_ok = manifest.stages.iter().all(|s| s.status == "ok");
    let corr = read("correlogram.json");
    let band = corr["result"]["correlogram"]["band"].as_f64().unwrap();
    let acf = &corr["result"]["correlogram"]["acf"];
    let outside = corr["result"]["fraction_outside"].as_array().unwrap();
    let ys1_flat = outside[0].as_f64().unwrap() <= 0.10;
    let ys2_lag1 = acf[1][0].as_f64().unwrap();
    let spec = read("spectrum.json");
    let fits = spec["result"]["fits"].as_array().unwrap();
    let ys2 = fits.iter().position(|f| f["name"] == "YS2").unwrap();
    let f0 = spec["result"]["density"][ys2][0].as_f64().unwrap();
    // a fitted AR(1) coefficient φ gives f(0) ≈ 1 + 2φ, so 2·band is the
    // white-noise allowance at ω = 0
    let ys2_elevated = fits[ys2]["flat"] == false && f0 > 1.0 + 2.0 * band;
    let var = read("var.json");
    let comps: Vec<u64> = var["result"]["model"]["components"].as_array().unwrap().iter().filter_map(Value::as_u64).collect();
    let ok = all_ok && ys1_flat && ys2_lag1 > band && ys2_elevated && comps.contains(&2);
    (
        ok,
        format!(
            "stages ok {all_ok}, YS1 outside band {:.2}, YS2 lag-1 ACF {ys2_lag1:.3} vs band {band:.3}, YS2 f(0) {f0:.2}, VAR components {comps:?}",
            outside[0].as_f64().unwrap()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 moment table, Monte Carlo at T=1e6", table_one),
        ("2 normal LP1 = sqrt(3/pi) and tail index 1", analytic_constant),
        ("3 Pearson correlation from LP moments and comoments", pearson_decomposition),
        ("4 Blomqvist beta term-wise vs quadrature", blomqvist_consistency),
        ("5 Parseval identities and Granger-Lin ratio", parseval_suite),
        ("6 quantile correlation curves", quantile_correlation_checks),
        ("7 Burg recovery, BIC order selection, AR spectrum", spectral_recovery),
        ("8 VAR recovery and residual diagnostics", var_recovery),
        ("9 conditional quantiles", conditional_quantile_checks),
        ("10 ARCH pipeline signatures", arch_pipeline),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let (ok, detail) = check();
        if !ok {
            failed += 1;
        }
        println!("{} criterion {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
