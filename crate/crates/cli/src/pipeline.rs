//! Analysis stages behind the subcommands and the bundled `run` pipeline.

use std::path::Path;

use lptime_core::basis::lp_transform;
use lptime_core::comoment::{
    bic_smooth, lp_autocorrelation, lp_comoment_matrix, lp_correlogram, lpinfor_stat,
    nonstationarity_comoment_series,
};
use lptime_core::conditional::{conditional_quantiles, sample_conditional_stream};
use lptime_core::copula::{
    auto_lpinfor, blomqvist_for_component, conditional_lpinfor, density_grid, gaussian_copula_curve,
    granger_lin, quantile_correlation, serial_copula, CopulaModel,
};
use lptime_core::empirical::{probability_grid, qiq_curve};
use lptime_core::moments::{lp_moments, lp_tail_index, nearest_reference};
use lptime_core::spectrum::{copula_spectral_density, frequency_grid, lp_spectrum};
use lptime_core::var::{fit_var, forecast, model_columns, residual_diagnostics};
use lptime_core::{LPSeries, SeriesSample, VarModel};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, PipelineConfig};
use crate::error::{CliError, CliResult};
use crate::io::{json_string, load_series, Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Transform,
    Qiq,
    Moments,
    Comoment,
    Correlogram,
    Copula,
    Autolpinfor,
    Nonstat,
    Quantcorr,
    Condinfor,
    Condquant,
    Blomqvist,
    Spectrum,
    Copspec,
    Var,
    Forecast,
}

impl Stage {
    pub const ALL: [Stage; 16] = [
        Stage::Transform,
        Stage::Qiq,
        Stage::Moments,
        Stage::Comoment,
        Stage::Correlogram,
        Stage::Copula,
        Stage::Autolpinfor,
        Stage::Nonstat,
        Stage::Quantcorr,
        Stage::Condinfor,
        Stage::Condquant,
        Stage::Blomqvist,
        Stage::Spectrum,
        Stage::Copspec,
        Stage::Var,
        Stage::Forecast,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Transform => "transform",
            Stage::Qiq => "qiq",
            Stage::Moments => "moments",
            Stage::Comoment => "comoment",
            Stage::Correlogram => "correlogram",
            Stage::Copula => "copula",
            Stage::Autolpinfor => "autolpinfor",
            Stage::Nonstat => "nonstat",
            Stage::Quantcorr => "quantcorr",
            Stage::Condinfor => "condinfor",
            Stage::Condquant => "condquant",
            Stage::Blomqvist => "blomqvist",
            Stage::Spectrum => "spectrum",
            Stage::Copspec => "copspec",
            Stage::Var => "var",
            Stage::Forecast => "forecast",
        }
    }
}

/// One stage's output: a JSON document and a flat table for CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub json: Value,
    pub table: Table,
}

/// Loaded data shared by all stages.
pub struct Context {
    pub config: PipelineConfig,
    pub seed: u64,
    pub seed_generated: bool,
    pub sample: SeriesSample,
    pub series: LPSeries,
}

impl Context {
    /// Materializes the seed, then loads and transforms the configured input.
    pub fn load(mut config: PipelineConfig) -> CliResult<Self> {
        let seed_generated = config.materialize_seed();
        let input = config
            .input
            .clone()
            .ok_or_else(|| CliError::Config("no input file given".into()))?;
        let sample = load_series(&input, config.column.as_deref(), config.returns)?;
        Self::from_sample(config, sample, seed_generated)
    }

    pub fn from_sample(mut config: PipelineConfig, sample: SeriesSample, seed_generated: bool) -> CliResult<Self> {
        config.materialize_seed();
        let series = lp_transform(&sample, config.k)?;
        Ok(Self {
            seed: config.seed.expect("seed materialized"),
            seed_generated,
            config,
            sample,
            series,
        })
    }

    pub fn metadata(&self, command: &str) -> Value {
        json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "core_version": lptime_core::VERSION,
            "seed": self.seed,
            "seed_generated": self.seed_generated,
            "observations": self.sample.len(),
            "k": self.series.k(),
            "variance_convention": "population (divisor T)",
            "quantile_convention": "left-continuous step inverse",
            "config": self.config,
        })
    }

    fn copula(&self, h: usize) -> CliResult<(lptime_core::ComomentMatrix, CopulaModel)> {
        Ok(serial_copula(&self.series, h)?)
    }
}

fn component_names(k: usize) -> Vec<String> {
    (1..=k).map(|j| format!("YS{j}")).collect()
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn matrix_table(raw: &[Vec<f64>], smooth: Option<&Vec<Vec<f64>>>) -> Table {
    let mut t = Table::new(["j", "m", "raw", "smooth"]);
    for (j, row) in raw.iter().enumerate() {
        for (m, &v) in row.iter().enumerate() {
            let s = smooth.map_or(f64::NAN, |s| s[j][m]);
            t.push(vec![(j + 1).into(), (m + 1).into(), v.into(), s.into()]);
        }
    }
    t
}

pub fn transform(ctx: &Context) -> CliResult<Report> {
    let s = &ctx.series;
    let names = component_names(s.k());
    let mut header = vec!["t".to_string()];
    let stamps = ctx.sample.timestamps();
    if stamps.is_some() {
        header.push("timestamp".into());
    }
    header.extend(["y", "z", "mid_rank"].map(String::from));
    header.extend(names.iter().cloned());
    let mut table = Table::new(header);
    let ranks = s.mid_ranks();
    for t in 0..s.len() {
        let mut row: Vec<Cell> = vec![(t + 1).into()];
        if let Some(ts) = stamps {
            row.push(ts[t].as_str().into());
        }
        row.extend([ctx.sample.values()[t], s.z()[t], ranks[t]].map(Cell::from));
        row.extend((1..=s.k()).map(|j| Cell::from(s.component(j)[t])));
        table.push(row);
    }
    let basis = s.basis();
    let json = json!({
        "k": basis.k(),
        "requested_k": basis.requested_k(),
        "cap_reason": basis.cap_reason(),
        "sigma_middist": basis.sigma_middist(),
        "polynomials": (1..=basis.k()).map(|j| basis.polynomial(j).to_vec()).collect::<Vec<_>>(),
        "z": s.z(),
        "mid_rank": ranks,
        "components": names.iter().zip(s.columns()).map(|(n, c)| json!({"name": n, "values": c})).collect::<Vec<_>>(),
    });
    Ok(Report { json, table })
}

pub fn qiq(ctx: &Context) -> CliResult<Report> {
    let grid = probability_grid(ctx.config.grid);
    let curve = qiq_curve(&ctx.sample, &grid)?;
    let mut table = Table::new(["u", "qiq"]);
    for (u, q) in curve.grid.iter().zip(&curve.qiq) {
        table.push(vec![(*u).into(), (*q).into()]);
    }
    Ok(Report { json: to_value(&curve), table })
}

pub fn moments(ctx: &Context) -> CliResult<Report> {
    let m = lp_moments(&ctx.sample, ctx.config.k_moments)?;
    let tail = lp_tail_index(&m, ctx.config.tail_threshold);
    let nearest = nearest_reference(&m);
    let mut table = Table::new(["j", "lp", "cumulative_sq"]);
    for (j, (v, c)) in m.values.iter().zip(&m.cumsum).enumerate() {
        table.push(vec![(j + 1).into(), (*v).into(), (*c).into()]);
    }
    let json = json!({
        "lp": m.values,
        "cumulative_sq": m.cumsum,
        "k_requested": m.k_requested,
        "tail_index": tail,
        "tail_threshold": ctx.config.tail_threshold,
        "nearest_reference": nearest,
    });
    Ok(Report { json, table })
}

pub fn comoment(ctx: &Context) -> CliResult<Report> {
    let h = ctx.config.lag;
    let matrix = bic_smooth(&lp_comoment_matrix(&ctx.series, h)?);
    let mom = lp_moments(&ctx.sample, ctx.series.k())?;
    let json = json!({
        "lag": h,
        "matrix": matrix,
        "lpinfor_raw": lpinfor_stat(&matrix, false)?,
        "lpinfor_smooth": lpinfor_stat(&matrix, true)?,
        "autocorrelation_raw": lp_autocorrelation(&mom, &mom, &matrix, false)?,
        "autocorrelation_smooth": lp_autocorrelation(&mom, &mom, &matrix, true)?,
    });
    Ok(Report {
        table: matrix_table(&matrix.raw, matrix.smooth()),
        json,
    })
}

pub fn correlogram(ctx: &Context) -> CliResult<Report> {
    let c = lp_correlogram(&ctx.series, ctx.config.max_lag)?;
    let names = component_names(ctx.series.k());
    let mut header = vec!["lag".to_string()];
    header.extend(names.iter().cloned());
    let mut table = Table::new(header);
    for h in 0..c.max_lag {
        let mut row: Vec<Cell> = vec![(h + 1).into()];
        row.extend(c.acf.iter().map(|a| Cell::from(a[h])));
        table.push(row);
    }
    let outside: Vec<f64> = (1..=ctx.series.k()).map(|j| c.fraction_outside(j)).collect();
    let json = json!({"correlogram": c, "components": names, "fraction_outside": outside});
    Ok(Report { json, table })
}

pub fn copula(ctx: &Context) -> CliResult<Report> {
    let h = ctx.config.lag;
    let (matrix, model) = ctx.copula(h)?;
    let (grid, values) = density_grid(&model, ctx.config.copula_grid)?;
    let mut table = Table::new(["u", "v", "density"]);
    for (a, u) in grid.iter().enumerate() {
        for (b, v) in grid.iter().enumerate() {
            table.push(vec![(*u).into(), (*v).into(), values[a][b].into()]);
        }
    }
    let json = json!({
        "lag": h,
        "coefficients": matrix.smooth(),
        "clipped_mass": model.clipped_mass(),
        "grid": grid,
        "density": values,
    });
    Ok(Report { json, table })
}

pub fn autolpinfor(ctx: &Context) -> CliResult<Report> {
    let mut table = Table::new(["lag", "autolpinfor", "granger_lin", "ratio"]);
    let mut rows = Vec::new();
    for h in 1..=ctx.config.max_lag {
        let (_, model) = ctx.copula(h)?;
        let a = auto_lpinfor(&model);
        let g = granger_lin(&model)?;
        let ratio = if g > 0.0 { a / g } else { f64::NAN };
        table.push(vec![h.into(), a.into(), g.into(), ratio.into()]);
        rows.push(json!({"lag": h, "autolpinfor": a, "granger_lin": g, "ratio": ratio}));
    }
    Ok(Report { json: json!({"lags": rows}), table })
}

pub fn nonstat(ctx: &Context) -> CliResult<Report> {
    let matrix = bic_smooth(&nonstationarity_comoment_series(&ctx.series)?);
    let json = json!({
        "matrix": matrix,
        "lpinfor_raw": lpinfor_stat(&matrix, false)?,
        "lpinfor_smooth": lpinfor_stat(&matrix, true)?,
    });
    Ok(Report {
        table: matrix_table(&matrix.raw, matrix.smooth()),
        json,
    })
}

/// Lag-`h` sample autocorrelation of the normalized series.
fn linear_autocorrelation(z: &[f64], h: usize) -> f64 {
    let n = z.len();
    z[..n - h].iter().zip(&z[h..]).map(|(a, b)| a * b).sum::<f64>() / (n - h) as f64
}

pub fn quantcorr(ctx: &Context) -> CliResult<Report> {
    let h = ctx.config.lag;
    let (_, model) = ctx.copula(h)?;
    let rho = linear_autocorrelation(ctx.series.z(), h).clamp(-1.0, 1.0);
    let grid = probability_grid(ctx.config.grid);
    let mut table = Table::new(["u", "lp", "gaussian", "independence"]);
    let (mut lp, mut gauss) = (Vec::new(), Vec::new());
    for &u in &grid {
        let l = quantile_correlation(&model, u)?;
        let g = gaussian_copula_curve(rho, u)?;
        table.push(vec![u.into(), l.into(), g.into(), u.min(1.0 - u).into()]);
        lp.push(l);
        gauss.push(g);
    }
    let json = json!({"lag": h, "gaussian_rho": rho, "u": grid, "lp": lp, "gaussian": gauss});
    Ok(Report { json, table })
}

pub fn condinfor(ctx: &Context) -> CliResult<Report> {
    let h = ctx.config.lag;
    let (_, model) = ctx.copula(h)?;
    let grid = probability_grid(ctx.config.grid);
    let values: Vec<f64> = grid
        .iter()
        .map(|&u| conditional_lpinfor(&model, u))
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(["u", "conditional_lpinfor"]);
    for (u, v) in grid.iter().zip(&values) {
        table.push(vec![(*u).into(), (*v).into()]);
    }
    Ok(Report {
        json: json!({"lag": h, "u": grid, "conditional_lpinfor": values}),
        table,
    })
}

pub fn condquant(ctx: &Context) -> CliResult<Report> {
    let cfg = &ctx.config;
    let (_, model) = ctx.copula(cfg.lag)?;
    let mut table = Table::new(["u", "level", "quantile", "extreme_level_unstable"]);
    let mut out = Vec::new();
    for (stream, &u) in cfg.u.iter().enumerate() {
        let draws = sample_conditional_stream(&ctx.sample, &model, u, cfg.n_sim, ctx.seed, stream as u64)?;
        let q = conditional_quantiles(&draws, &cfg.levels)?;
        for ((p, x), flag) in q.levels.iter().zip(&q.quantiles).zip(&q.extreme_level_unstable) {
            table.push(vec![u.into(), (*p).into(), (*x).into(), flag.to_string().into()]);
        }
        out.push(json!({
            "u": u,
            "stream": stream,
            "levels": q.levels,
            "quantiles": q.quantiles,
            "extreme_level_unstable": q.extreme_level_unstable,
            "acceptance_rate": draws.acceptance_rate,
        }));
    }
    Ok(Report {
        json: json!({"lag": cfg.lag, "n_sim": cfg.n_sim, "seed": ctx.seed, "conditional": out}),
        table,
    })
}

pub fn blomqvist(ctx: &Context) -> CliResult<Report> {
    let k = ctx.series.k();
    let mut table = Table::new(["series", "beta"]);
    let mut out = Vec::new();
    for c in 0..=k {
        let name = if c == 0 { "Y".to_string() } else { format!("YS{c}") };
        let beta = blomqvist_for_component(&ctx.series, &ctx.sample, c, ctx.config.lag, k)?;
        table.push(vec![name.clone().into(), beta.into()]);
        out.push(json!({"series": name, "beta": beta}));
    }
    Ok(Report {
        json: json!({"lag": ctx.config.lag, "blomqvist": out}),
        table,
    })
}

pub fn spectrum(ctx: &Context) -> CliResult<Report> {
    let grid = frequency_grid(ctx.config.spectrum_grid);
    let spectra = lp_spectrum(&ctx.series, ctx.config.max_order, &grid)?;
    let mut header = vec!["omega".to_string()];
    header.extend(spectra.iter().map(|s| s.name.clone()));
    let mut table = Table::new(header);
    for (i, w) in grid.iter().enumerate() {
        let mut row: Vec<Cell> = vec![(*w).into()];
        row.extend(spectra.iter().map(|s| Cell::from(s.curve.density[i])));
        table.push(row);
    }
    let fits: Vec<Value> = spectra
        .iter()
        .map(|s| {
            json!({
                "name": s.name,
                "order": s.fit.order,
                "coefficients": s.fit.coefficients,
                "sigma2": s.fit.sigma2,
                "flat": s.flat,
                "bic": s.fit.criterion_values,
            })
        })
        .collect();
    Ok(Report {
        json: json!({"max_order": ctx.config.max_order, "omega": grid, "fits": fits,
            "density": spectra.iter().map(|s| &s.curve.density).collect::<Vec<_>>()}),
        table,
    })
}

pub fn copspec(ctx: &Context) -> CliResult<Report> {
    let cfg = &ctx.config;
    let models: Vec<CopulaModel> = (1..=cfg.copspec_lags)
        .map(|h| ctx.copula(h).map(|(_, m)| m))
        .collect::<CliResult<_>>()?;
    let grid = frequency_grid(cfg.spectrum_grid);
    let s = copula_spectral_density(&models, cfg.copspec_u, cfg.copspec_v, &grid)?;
    let mut table = Table::new(["omega", "real", "imag"]);
    for i in 0..grid.len() {
        table.push(vec![s.omega[i].into(), s.real[i].into(), s.imag[i].into()]);
    }
    Ok(Report { json: to_value(&s), table })
}

/// Components for the VAR: configured ones, else those whose spectrum is not
/// flat, else all of them.
pub fn var_components(ctx: &Context) -> CliResult<(Vec<usize>, &'static str)> {
    if let Some(c) = &ctx.config.components {
        return Ok((c.clone(), "configured"));
    }
    let spectra = lp_spectrum(&ctx.series, ctx.config.max_order, &[0.0])?;
    let selected: Vec<usize> = spectra
        .iter()
        .filter(|s| s.component > 0 && !s.flat)
        .map(|s| s.component)
        .collect();
    if selected.is_empty() {
        Ok(((1..=ctx.series.k()).collect(), "all (every spectrum flat)"))
    } else {
        Ok((selected, "non-flat spectra"))
    }
}

pub fn fit_var_model(ctx: &Context) -> CliResult<(VarModel, Vec<Vec<f64>>, &'static str)> {
    let (components, source) = var_components(ctx)?;
    let model = fit_var(&ctx.series, &components, ctx.config.var_max_order)?;
    let columns = model_columns(&model, &ctx.series)?;
    Ok((model, columns, source))
}

pub fn var_report(model: &VarModel, columns: &[Vec<f64>], source: &str) -> CliResult<Report> {
    let diag = residual_diagnostics(model, columns)?;
    let mut table = Table::new(["lag", "row", "col", "coefficient", "std_error"]);
    for (i, (a, se)) in model.coefficients.iter().zip(&model.std_errors).enumerate() {
        for r in 0..model.dim() {
            for c in 0..model.dim() {
                table.push(vec![
                    (i + 1).into(),
                    model.components[r].into(),
                    model.components[c].into(),
                    a[r][c].into(),
                    se[r][c].into(),
                ]);
            }
        }
    }
    Ok(Report {
        json: json!({"component_source": source, "model": model, "diagnostics": diag}),
        table,
    })
}

pub fn forecast_report(model: &VarModel, columns: &[Vec<f64>], steps: usize) -> CliResult<Report> {
    let f = forecast(model, columns, steps)?;
    let names: Vec<String> = model.components.iter().map(|j| format!("YS{j}")).collect();
    let mut header = vec!["step".to_string()];
    header.extend(names.iter().cloned());
    let mut table = Table::new(header);
    for (s, row) in f.iter().enumerate() {
        let mut cells: Vec<Cell> = vec![(s + 1).into()];
        cells.extend(row.iter().map(|&v| Cell::from(v)));
        table.push(cells);
    }
    Ok(Report {
        json: json!({"components": names, "steps": steps, "forecast": f}),
        table,
    })
}

/// Runs a single stage (model-dependent stages fit their own VAR).
pub fn run_stage(stage: Stage, ctx: &Context) -> CliResult<Report> {
    match stage {
        Stage::Transform => transform(ctx),
        Stage::Qiq => qiq(ctx),
        Stage::Moments => moments(ctx),
        Stage::Comoment => comoment(ctx),
        Stage::Correlogram => correlogram(ctx),
        Stage::Copula => copula(ctx),
        Stage::Autolpinfor => autolpinfor(ctx),
        Stage::Nonstat => nonstat(ctx),
        Stage::Quantcorr => quantcorr(ctx),
        Stage::Condinfor => condinfor(ctx),
        Stage::Condquant => condquant(ctx),
        Stage::Blomqvist => blomqvist(ctx),
        Stage::Spectrum => spectrum(ctx),
        Stage::Copspec => copspec(ctx),
        Stage::Var => {
            let (m, cols, src) = fit_var_model(ctx)?;
            var_report(&m, &cols, src)
        }
        Stage::Forecast => {
            let (m, cols, _) = fit_var_model(ctx)?;
            forecast_report(&m, &cols, ctx.config.steps)
        }
    }
}

/// The stage's document wrapped with run metadata.
pub fn document(ctx: &Context, stage: Stage, report: &Report) -> Value {
    json!({"metadata": ctx.metadata(stage.name()), "result": report.json})
}

pub fn render(ctx: &Context, stage: Stage, report: &Report, format: Format) -> CliResult<String> {
    match format {
        Format::Json => Ok(json_string(&document(ctx, stage, report))),
        Format::Csv => report.table.to_csv(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageStatus {
    pub name: &'static str,
    /// `ok`, `failed` or `skipped`.
    pub status: &'static str,
    pub error: Option<String>,
    pub exit_code: Option<i32>,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub core_version: &'static str,
    pub seed: Option<u64>,
    pub seed_generated: bool,
    pub config: PipelineConfig,
    pub observations: Option<usize>,
    pub load_error: Option<String>,
    pub stages: Vec<StageStatus>,
}

impl Manifest {
    /// Exit code of the first failure, or 0.
    pub fn exit_code(&self) -> i32 {
        self.stages.iter().find_map(|s| s.exit_code).unwrap_or(0)
    }
}

fn write_stage(dir: &Path, ctx: &Context, stage: Stage, report: &Report) -> CliResult<Vec<String>> {
    let json_name = format!("{}.json", stage.name());
    let csv_name = format!("{}.csv", stage.name());
    std::fs::write(dir.join(&json_name), json_string(&document(ctx, stage, report)))?;
    std::fs::write(dir.join(&csv_name), report.table.to_csv()?)?;
    Ok(vec![json_name, csv_name])
}

fn status(name: &'static str, result: CliResult<Vec<String>>) -> StageStatus {
    match result {
        Ok(files) => StageStatus { name, status: "ok", error: None, exit_code: None, files },
        Err(e) => StageStatus {
            name,
            status: "failed",
            error: Some(e.to_string()),
            exit_code: Some(e.exit_code()),
            files: Vec::new(),
        },
    }
}

fn write_manifest(dir: &Path, manifest: &Manifest) -> CliResult<()> {
    std::fs::write(dir.join("manifest.json"), json_string(&serde_json::to_value(manifest)?))?;
    Ok(())
}

/// Full pipeline into `config.out_dir`. Independent stages run concurrently;
/// the forecast waits for the VAR fit. The manifest is written even when
/// loading or individual stages fail.
pub fn run_pipeline(mut config: PipelineConfig) -> CliResult<Manifest> {
    let dir = config
        .out_dir
        .clone()
        .ok_or_else(|| CliError::Config("run needs --out-dir".into()))?;
    std::fs::create_dir_all(&dir)?;
    let seed_generated = config.materialize_seed();
    let mut manifest = Manifest {
        tool: "lptime",
        version: env!("CARGO_PKG_VERSION"),
        core_version: lptime_core::VERSION,
        seed: config.seed,
        seed_generated,
        config: config.clone(),
        observations: None,
        load_error: None,
        stages: Vec::new(),
    };
    let ctx = match Context::load(config) {
        Ok(mut c) => {
            c.seed_generated = seed_generated;
            c
        }
        Err(e) => {
            manifest.load_error = Some(e.to_string());
            manifest.stages = Stage::ALL
                .iter()
                .map(|s| StageStatus { name: s.name(), status: "skipped", error: None, exit_code: None, files: Vec::new() })
                .collect();
            write_manifest(&dir, &manifest)?;
            return Err(e);
        }
    };
    manifest.observations = Some(ctx.sample.len());

    let independent: Vec<Stage> = Stage::ALL
        .iter()
        .copied()
        .filter(|s| !matches!(s, Stage::Var | Stage::Forecast))
        .collect();
    let (mut statuses, var_fit) = std::thread::scope(|scope| {
        let handles: Vec<_> = independent
            .iter()
            .map(|&stage| {
                let ctx = &ctx;
                let dir = &dir;
                scope.spawn(move || status(stage.name(), run_stage(stage, ctx).and_then(|r| write_stage(dir, ctx, stage, &r))))
            })
            .collect();
        let var_fit = fit_var_model(&ctx);
        let statuses: Vec<StageStatus> = handles.into_iter().map(|h| h.join().expect("stage thread panicked")).collect();
        (statuses, var_fit)
    });

    match var_fit {
        Ok((model, cols, source)) => {
            statuses.push(status(
                "var",
                var_report(&model, &cols, source).and_then(|r| write_stage(&dir, &ctx, Stage::Var, &r)),
            ));
            statuses.push(status(
                "forecast",
                forecast_report(&model, &cols, ctx.config.steps)
                    .and_then(|r| write_stage(&dir, &ctx, Stage::Forecast, &r)),
            ));
        }
        Err(e) => {
            statuses.push(status("var", Err(e)));
            statuses.push(StageStatus {
                name: "forecast",
                status: "skipped",
                error: Some("depends on var".into()),
                exit_code: None,
                files: Vec::new(),
            });
        }
    }
    manifest.stages = statuses;
    write_manifest(&dir, &manifest)?;
    Ok(manifest)
}
