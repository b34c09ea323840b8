use std::path::{Path, PathBuf};

use wavemix::sim::results_table_csv;
use wavemix::{
    estimate_components, run_study, shrink, AggregatedData, Band, DMatrix, MixingMatrix,
    QuadratureSpec, ShrinkageParams, StudyResult,
};

use crate::args::{Command, ReplayArgs, WeightsScale};
use crate::config::{
    resolve_estimate, resolve_rulecurve, resolve_simulate, resolve_testfuncs, EstimateConfig,
    RulecurveConfig, SimulateConfig, TestfuncsConfig,
};
use crate::io::{fmt_f64, read_table, write_csv};
use crate::manifest::RunManifest;
use crate::{io_error, CliError, CliResult};

pub fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Testfuncs(a) => exec_testfuncs(&resolve_testfuncs(&a)?, &a.out_dir),
        Command::Simulate(a) => exec_simulate(&resolve_simulate(&a)?, &a.out_dir),
        Command::Estimate(a) => exec_estimate(&resolve_estimate(&a)?, &a.out_dir),
        Command::Rulecurve(a) => exec_rulecurve(&resolve_rulecurve(&a)?, &a.out_dir),
        Command::Replay(a) => replay(&a),
    }
}

fn prepare(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

fn finish(manifest: &RunManifest, dir: &Path) -> CliResult<()> {
    for out in &manifest.outputs {
        println!("wrote {}", dir.join(out).display());
    }
    let path = manifest.write(dir)?;
    println!("wrote {}", path.display());
    Ok(())
}

pub fn exec_testfuncs(cfg: &TestfuncsConfig, dir: &Path) -> CliResult<()> {
    prepare(dir)?;
    let grid = wavemix::testfuncs::grid(cfg.grid_size)?;
    let columns = cfg
        .tags
        .iter()
        .map(|t| t.sample_grid(cfg.grid_size))
        .collect::<wavemix::Result<Vec<_>>>()?;
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain(cfg.tags.iter().map(|t| t.name().to_string()))
        .collect();
    let rows = grid.iter().enumerate().map(|(m, t)| {
        std::iter::once(fmt_f64(*t))
            .chain(columns.iter().map(|c| fmt_f64(c[m])))
            .collect()
    });
    let name = "testfuncs.csv";
    write_csv(&dir.join(name), &header, rows)?;

    let mut manifest = RunManifest::new("testfuncs", cfg)?;
    manifest.outputs.push(name.into());
    finish(&manifest, dir)
}

pub fn exec_simulate(cfg: &SimulateConfig, dir: &Path) -> CliResult<()> {
    prepare(dir)?;
    let results = cfg
        .studies()
        .iter()
        .map(|s| {
            let r = run_study(s)?;
            eprintln!(
                "study {} at SNR {}: {} replicates in {:.1}s",
                cfg.study,
                s.snr.map_or_else(|| "inf".into(), |v| v.to_string()),
                s.replicates,
                r.elapsed_secs
            );
            Ok(r)
        })
        .collect::<CliResult<Vec<StudyResult>>>()?;

    let csv_path = dir.join("results.csv");
    std::fs::write(&csv_path, results_table_csv(&results)).map_err(|e| io_error(&csv_path, e))?;
    let json_path = dir.join("results.json");
    let json = serde_json::to_string_pretty(&results)
        .map_err(|e| CliError::Runtime(format!("cannot serialize results: {e}")))?;
    std::fs::write(&json_path, json + "\n").map_err(|e| io_error(&json_path, e))?;

    let mut manifest = RunManifest::new("simulate", cfg)?;
    manifest.seed = Some(cfg.base.seed);
    manifest.outputs = vec!["results.csv".into(), "results.json".into()];
    finish(&manifest, dir)
}

fn dyadic_hint(m: usize) -> String {
    let below = if m < 2 { 2 } else { 1usize << (usize::BITS - 1 - m.leading_zeros()) };
    let above = m.max(2).next_power_of_two();
    format!(
        "the data have M = {m} grid points, but the transform needs a power of two; \
         truncate to the first or a central window of {below} points, or pad \
         (e.g. by reflection) to {above} points"
    )
}

/// Equispaced grid with both endpoints, or `t_m = m/M`.
fn estimate_grid(m: usize, grid: Option<(f64, f64)>) -> Vec<f64> {
    match grid {
        Some((a, b)) => (0..m)
            .map(|k| a + (b - a) * k as f64 / (m - 1) as f64)
            .collect(),
        None => (1..=m).map(|k| k as f64 / m as f64).collect(),
    }
}

pub fn exec_estimate(cfg: &EstimateConfig, dir: &Path) -> CliResult<()> {
    prepare(dir)?;
    let data = read_table(&cfg.data)?;
    let weights = read_table(&cfg.weights)?;
    let (m, i) = data.values.shape();
    if m < 2 || !m.is_power_of_two() {
        return Err(CliError::Usage(dyadic_hint(m)));
    }
    let (l, wi) = weights.values.shape();
    if wi != i {
        return Err(CliError::Usage(format!(
            "the weights have {wi} columns but the data have {i} samples"
        )));
    }
    if l > i {
        return Err(CliError::Usage(format!(
            "{l} components cannot be estimated from {i} samples"
        )));
    }
    let y = match cfg.weights_scale {
        WeightsScale::Percent => weights.values.map(|v| v / 100.0),
        WeightsScale::Fraction => weights.values.clone(),
    };
    let grid = estimate_grid(m, cfg.grid);
    let agg = AggregatedData::new(data.values, grid.clone())?;
    let est = estimate_components(&agg, &MixingMatrix::new(y)?, &cfg.estimation)?;

    let names: Vec<String> = weights
        .labels
        .unwrap_or_else(|| (1..=l).map(|k| format!("component_{k}")).collect());
    let curves_header: Vec<String> = std::iter::once("t".to_string()).chain(names.iter().cloned()).collect();
    write_csv(
        &dir.join("curves.csv"),
        &curves_header,
        matrix_rows(&est.curves, |r| vec![fmt_f64(grid[r])]),
    )?;
    let coef_header: Vec<String> = ["index", "level", "shift"]
        .into_iter()
        .map(String::from)
        .chain(names.iter().cloned())
        .collect();
    write_csv(
        &dir.join("coefficients.csv"),
        &coef_header,
        matrix_rows(&est.gamma, |r| match est.layout.band(r) {
            Some(Band::Detail { j, k }) => vec![r.to_string(), j.to_string(), k.to_string()],
            Some(Band::Scaling { k }) => vec![r.to_string(), "scaling".into(), k.to_string()],
            None => vec![r.to_string(), String::new(), String::new()],
        }),
    )?;

    let mut manifest = RunManifest::new("estimate", cfg)?;
    manifest.add_input(&cfg.data)?;
    manifest.add_input(&cfg.weights)?;
    manifest.outputs = vec!["curves.csv".into(), "coefficients.csv".into()];
    manifest.sigma_hat = Some(est.sigma_hat);
    eprintln!("estimated noise sd {}", fmt_f64(est.sigma_hat));
    finish(&manifest, dir)
}

fn matrix_rows<'a>(
    m: &'a DMatrix<f64>,
    lead: impl Fn(usize) -> Vec<String> + 'a,
) -> impl Iterator<Item = Vec<String>> + 'a {
    (0..m.nrows()).map(move |r| {
        let mut row = lead(r);
        row.extend(m.row(r).iter().map(|v| fmt_f64(*v)));
        row
    })
}

pub fn exec_rulecurve(cfg: &RulecurveConfig, dir: &Path) -> CliResult<()> {
    prepare(dir)?;
    let params = ShrinkageParams::new(cfg.p, cfg.tau, cfg.sigma)?;
    let quad = QuadratureSpec::standard();
    let rows = (0..cfg.steps).map(|k| {
        let d = if cfg.steps == 1 {
            cfg.d_min
        } else {
            cfg.d_min + (cfg.d_max - cfg.d_min) * k as f64 / (cfg.steps - 1) as f64
        };
        vec![fmt_f64(d), fmt_f64(shrink(d, &params, quad))]
    });
    write_csv(&dir.join("rulecurve.csv"), &["d".into(), "delta".into()], rows)?;

    let mut manifest = RunManifest::new("rulecurve", cfg)?;
    manifest.outputs.push("rulecurve.csv".into());
    finish(&manifest, dir)
}

fn replay(a: &ReplayArgs) -> CliResult<()> {
    let manifest = RunManifest::read(&a.manifest)?;
    manifest.verify_inputs()?;
    let dir: PathBuf = match &a.out_dir {
        Some(d) => d.clone(),
        None => a
            .manifest
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    fn config<T: serde::de::DeserializeOwned>(m: &RunManifest) -> CliResult<T> {
        serde_json::from_value(m.config.clone())
            .map_err(|e| CliError::Usage(format!("manifest config does not match '{}': {e}", m.subcommand)))
    }
    match manifest.subcommand.as_str() {
        "testfuncs" => exec_testfuncs(&config(&manifest)?, &dir),
        "simulate" => {
            let cfg: SimulateConfig = config(&manifest)?;
            for s in cfg.studies() {
                s.validate()?;
            }
            exec_simulate(&cfg, &dir)
        }
        "estimate" => exec_estimate(&config(&manifest)?, &dir),
        "rulecurve" => exec_rulecurve(&config(&manifest)?, &dir),
        other => Err(CliError::Usage(format!("manifest names unknown subcommand '{other}'"))),
    }
}
