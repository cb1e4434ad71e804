//! Subcommand implementations.

use crate::config::{spec_from_flags, EpliModeField, EstimatorMode, RunConfig};
use crate::output::{
    curve_csv, epli_csv, fim_json, geodesic_csv, sobol_csv, sphere_csv, sphere_detail_csv,
    OutputDir,
};
use crate::{Cli, Command, DemoModel};
use anyhow::{anyhow, bail, Result};
use fisherpli::distributions::{fisher_information, DistributionSpec};
use fisherpli::geometry::{fisher_sphere, integrate_geodesic, IntegratorMethod};
use fisherpli::models::{Model, ModelSpec};
use fisherpli::robustness::{
    epli_curve, ofpli_curve, pli_with_estimator, EpliMode, GeodesicConfig, OfpliConfig, PliCurve,
    QuantileEstimator,
};
use fisherpli::sensitivity::sobol_target;
use fisherpli::seed::derive_seed;
use serde_json::json;

pub fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Fim { family, theta, support } => {
            let spec = spec_from_flags(family, theta, support.as_deref())?;
            let fim = fisher_information(&spec)?;
            let mut out = OutputDir::new(&cli.out)?;
            let path = out.write("fim.json", &fim_json(&fim))?;
            out.write_manifest("fim", 0, json!({ "spec": spec }), json!({}))?;
            println!("I({:?}) = {:?}", fim.theta_at, fim.matrix.rows());
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Geodesic { family, theta, support, delta, angle, method, steps } => {
            let spec = spec_from_flags(family, theta, support.as_deref())?;
            let p0 = momentum_at_angle(&spec, *delta, *angle)?;
            let path = integrate_geodesic(&spec, &p0, (*method).into(), *steps)?;
            let mut out = OutputDir::new(&cli.out)?;
            let file = out.write("geodesic.csv", &geodesic_csv(&path))?;
            out.write_manifest(
                "geodesic",
                0,
                json!({
                    "spec": spec, "delta": delta, "angle": angle, "steps": steps,
                }),
                json!({
                    "status": path.status.label(),
                    "max_drift": path.max_drift(),
                    "measured_length": path.measured_length(),
                }),
            )?;
            println!(
                "geodesic: status {}, length {:.6}, max drift {:.3e}; wrote {}",
                path.status.label(),
                path.measured_length(),
                path.max_drift(),
                file.display()
            );
            Ok(())
        }
        Command::Sphere { family, theta, support, delta, k, method, steps } => {
            let spec = spec_from_flags(family, theta, support.as_deref())?;
            let sphere = fisher_sphere(&spec, *delta, *k, (*method).into(), *steps)?;
            let mut out = OutputDir::new(&cli.out)?;
            let file = out.write("sphere.csv", &sphere_csv(&sphere))?;
            out.write_manifest(
                "sphere",
                0,
                json!({ "spec": spec, "delta": delta, "k": k, "steps": steps }),
                json!({ "n_valid": sphere.n_valid(), "n_invalid": sphere.n_invalid() }),
            )?;
            println!(
                "sphere: {} of {} directions valid at radius {delta}; wrote {}",
                sphere.n_valid(),
                sphere.points.len(),
                file.display()
            );
            Ok(())
        }
        Command::Pli { config, input, perturbed } => {
            let cfg = RunConfig::load(config)?;
            let model = cfg.model_spec()?;
            let sample = cfg.sample(&model)?;
            let i = input_index(*input, sample.d())?;
            let spec = DistributionSpec::from_json(perturbed)
                .map_err(|e| anyhow!("flag `perturbed`: {e}"))?;
            let estimator = estimator_for(&cfg, &model)?;
            let value = pli_with_estimator(&sample, i, &spec, cfg.alpha, &estimator)?;
            let mut out = OutputDir::new(cfg.out_dir.as_deref().unwrap_or(&cli.out))?;
            out.write(
                "pli.json",
                &serde_json::to_string_pretty(&json!({
                    "input": input, "alpha": cfg.alpha, "perturbed": spec, "pli": value,
                }))
                .expect("serializes"),
            )?;
            println!("input {input}: PLI = {value:.6}");
            Ok(())
        }
        Command::Ofpli { config } => run_ofpli(cli, config),
        Command::Epli { config } => run_epli(cli, config),
        Command::Sobol { config } => run_sobol(cli, config),
        Command::Demo { model, seed, n, k, steps, b } => {
            run_demo(cli, *model, *seed, *n, *k, *steps, *b)
        }
    }
}

/// 1-based input number (matching x1..xd columns) to 0-based index.
fn input_index(number: usize, d: usize) -> Result<usize> {
    if number == 0 || number > d {
        bail!("flag `input` must lie in 1..={d}, got {number}");
    }
    Ok(number - 1)
}

fn momentum_at_angle(spec: &DistributionSpec, delta: f64, angle: f64) -> Result<Vec<f64>> {
    if delta < 0.0 {
        bail!("flag `delta` must be >= 0, got {delta}");
    }
    let fim = fisher_information(spec)?;
    let l = fim.matrix.cholesky_lower()?;
    if spec.r() == 1 {
        let u = if angle.cos() >= 0.0 { 1.0 } else { -1.0 };
        Ok(vec![delta * l[0][0] * u])
    } else {
        let (u0, u1) = (angle.cos(), angle.sin());
        Ok(vec![
            delta * l[0][0] * u0,
            delta * (l[1][0] * u0 + l[1][1] * u1),
        ])
    }
}

fn estimator_for<'a>(cfg: &RunConfig, model: &'a ModelSpec) -> Result<QuantileEstimator<'a>> {
    match cfg.mode {
        EstimatorMode::ReverseIs => Ok(QuantileEstimator::ReverseIs),
        EstimatorMode::Resample => {
            let m = model.builtin().ok_or_else(|| {
                anyhow!("config field `mode`: resample mode needs a built-in model, not an external sample")
            })?;
            Ok(QuantileEstimator::Resample { model: m })
        }
    }
}

fn run_ofpli(cli: &Cli, config_path: &std::path::Path) -> Result<()> {
    let cfg = RunConfig::load(config_path)?;
    let model = cfg.model_spec()?;
    let sample = cfg.sample(&model)?;
    let mut out = OutputDir::new(cfg.out_dir.as_deref().unwrap_or(&cli.out))?;
    let config_echo = serde_json::to_value(serde_json::from_str::<serde_json::Value>(
        &std::fs::read_to_string(config_path)?,
    )?)?;

    if cfg.delta_grid.is_empty() {
        println!("warning: empty delta grid; writing manifest only");
        out.write_manifest("ofpli", cfg.seed, config_echo, json!({ "curves": {} }))?;
        return Ok(());
    }

    let estimator = estimator_for(&cfg, &model)?;
    let ofpli_cfg = OfpliConfig {
        alpha: cfg.alpha,
        k: cfg.k,
        geodesic: GeodesicConfig { method: cfg.integrator, n_steps: cfg.n_steps },
        b: cfg.b,
        bootstrap_seed: derive_seed(cfg.seed, &[0x0f11]),
    };
    let mut admissibility = serde_json::Map::new();
    for i in 0..sample.d() {
        let number = i + 1;
        let spec = &sample.input_specs()[i];
        if !spec.family().has_fisher_structure() {
            println!(
                "input {number}: skipped ({} has no Fisher structure)",
                spec.family().name()
            );
            continue;
        }
        let curve = ofpli_curve(&sample, i, &cfg.delta_grid, &ofpli_cfg, &estimator)?;
        write_curve_outputs(&mut out, number, spec.r(), &curve)?;
        summarize_curve(number, &curve);
        admissibility.insert(
            format!("input_{number}"),
            json!({
                "delta_max": curve.delta_max,
                "admissible": curve.points.iter().map(|p| p.admissible).collect::<Vec<_>>(),
            }),
        );
    }
    out.write_manifest("ofpli", cfg.seed, config_echo, json!({ "admissibility": admissibility }))?;
    Ok(())
}

fn write_curve_outputs(
    out: &mut OutputDir,
    number: usize,
    r: usize,
    curve: &PliCurve,
) -> Result<()> {
    out.write(&format!("ofpli_curve_input{number}.csv"), &curve_csv(number, curve))?;
    out.write(
        &format!("ofpli_sphere_input{number}.csv"),
        &sphere_detail_csv(number, curve, r),
    )?;
    Ok(())
}

fn summarize_curve(number: usize, curve: &PliCurve) {
    let s_plus_max = curve.points.iter().map(|p| p.s_plus).fold(f64::NEG_INFINITY, f64::max);
    let s_minus_min = curve.points.iter().map(|p| p.s_minus).fold(f64::INFINITY, f64::min);
    println!(
        "input {number}: S+ up to {s_plus_max:+.4}, S- down to {s_minus_min:+.4}, delta_max {}",
        curve
            .delta_max
            .map(|d| d.to_string())
            .unwrap_or_else(|| "none".to_string())
    );
}

fn run_epli(cli: &Cli, config_path: &std::path::Path) -> Result<()> {
    let cfg = RunConfig::load(config_path)?;
    let section = cfg
        .epli
        .clone()
        .ok_or_else(|| anyhow!("config field `epli` (mode, grid) is required for this command"))?;
    if section.grid.is_empty() {
        bail!("config field `epli.grid` must not be empty");
    }
    let model = cfg.model_spec()?;
    let sample = cfg.sample(&model)?;
    let estimator = estimator_for(&cfg, &model)?;
    let mode = match section.mode {
        EpliModeField::MeanShift => EpliMode::MeanShift,
        EpliModeField::VarianceScale => EpliMode::VarianceScale,
    };
    let mode_name = match mode {
        EpliMode::MeanShift => "mean_shift",
        EpliMode::VarianceScale => "variance_scale",
    };
    let numbers: Vec<usize> = match &section.inputs {
        Some(list) => list.clone(),
        None => (1..=sample.d()).collect(),
    };
    let mut out = OutputDir::new(cfg.out_dir.as_deref().unwrap_or(&cli.out))?;
    for &number in &numbers {
        let i = input_index(number, sample.d())?;
        let points = epli_curve(&sample, i, &section.grid, cfg.alpha, mode, &estimator)?;
        out.write(&format!("epli_input{number}.csv"), &epli_csv(number, mode_name, &points))?;
        let max_abs = points.iter().map(|p| p.pli.abs()).fold(0.0, f64::max);
        println!("input {number}: {mode_name} E-PLI over {} grid points, max |PLI| = {max_abs:.4}", points.len());
    }
    let config_echo =
        serde_json::from_str::<serde_json::Value>(&std::fs::read_to_string(config_path)?)?;
    out.write_manifest("epli", cfg.seed, config_echo, json!({ "inputs": numbers }))?;
    Ok(())
}

fn run_sobol(cli: &Cli, config_path: &std::path::Path) -> Result<()> {
    let cfg = RunConfig::load(config_path)?;
    let model = cfg.model_spec()?;
    let evaluable: &dyn Model = model
        .builtin()
        .ok_or_else(|| anyhow!("config field `model`: sobol needs a built-in model"))?;
    let n_base = cfg.n_base.unwrap_or(100_000);
    let threshold = match cfg.threshold {
        Some(t) => t,
        None => {
            // Default: the α-quantile of an independent nominal run.
            let nominal = fisherpli::models::generate_sample(
                &model,
                n_base,
                derive_seed(cfg.seed, &[0x7485]),
            )?;
            fisherpli::estimation::empirical_quantile(nominal.outputs(), cfg.alpha)?
        }
    };
    let result = sobol_target(evaluable, &model.input_specs, n_base, threshold, cfg.seed)?;
    if result.variance.degenerate {
        println!("warning: zero output variance; all indices reported as 0");
    }
    let mut out = OutputDir::new(cfg.out_dir.as_deref().unwrap_or(&cli.out))?;
    out.write("sobol.csv", &sobol_csv(&result))?;
    for i in 0..model.d() {
        println!(
            "input {}: S = {:.4} (se {:.4}), T = {:.4}, target S = {:.4}, target T = {:.4}",
            i + 1,
            result.variance.first_order[i],
            result.variance.first_order_se[i],
            result.variance.total[i],
            result.target.as_ref().map(|t| t.first_order[i]).unwrap_or(f64::NAN),
            result.target.as_ref().map(|t| t.total[i]).unwrap_or(f64::NAN),
        );
    }
    let config_echo =
        serde_json::from_str::<serde_json::Value>(&std::fs::read_to_string(config_path)?)?;
    out.write_manifest(
        "sobol",
        cfg.seed,
        config_echo,
        json!({ "n_base": n_base, "threshold": threshold }),
    )?;
    Ok(())
}

fn run_demo(
    cli: &Cli,
    model: DemoModel,
    seed: u64,
    n: usize,
    k: usize,
    steps: usize,
    b: usize,
) -> Result<()> {
    let mut out = OutputDir::new(&cli.out)?;
    let geodesic = GeodesicConfig { method: IntegratorMethod::AdamsMoulton, n_steps: steps };
    match model {
        DemoModel::Ishigami => {
            let spec = ModelSpec::ishigami();
            let sample = fisherpli::models::generate_sample(&spec, n, seed)?;
            let builtin = spec.builtin().expect("built-in");
            let estimator = QuantileEstimator::Resample { model: builtin };
            let grid = [0.3, 0.6, 0.9];
            let cfg = OfpliConfig {
                alpha: 0.95,
                k,
                geodesic,
                b,
                bootstrap_seed: derive_seed(seed, &[0x0f11]),
            };
            for i in 0..3 {
                let curve = ofpli_curve(&sample, i, &grid, &cfg, &estimator)?;
                write_curve_outputs(&mut out, i + 1, 2, &curve)?;
                summarize_curve(i + 1, &curve);
            }
            // E-PLI baseline for the third input: mean shifts in [-1, 1],
            // variances in [0.5, 4].
            let mean_grid: Vec<f64> = (-4..=4).map(|j| j as f64 * 0.25).collect();
            let var_grid: Vec<f64> = (1..=8).map(|j| j as f64 * 0.5).collect();
            let mean_pts =
                epli_curve(&sample, 2, &mean_grid, 0.95, EpliMode::MeanShift, &estimator)?;
            out.write("epli_input3_mean.csv", &epli_csv(3, "mean_shift", &mean_pts))?;
            let var_pts =
                epli_curve(&sample, 2, &var_grid, 0.95, EpliMode::VarianceScale, &estimator)?;
            out.write("epli_input3_variance.csv", &epli_csv(3, "variance_scale", &var_pts))?;
            out.write_manifest(
                "demo ishigami",
                seed,
                json!({ "model": "ishigami", "n": n, "k": k, "steps": steps, "b": b, "alpha": 0.95, "delta_grid": grid, "seed": seed }),
                json!({ "epli_inputs": [3] }),
            )?;
        }
        DemoModel::Flood => {
            let spec = ModelSpec::flood();
            let sample = fisherpli::models::generate_sample(&spec, n, seed)?;
            let grid = [0.3, 0.7, 1.1];
            let cfg = OfpliConfig {
                alpha: 0.95,
                k,
                geodesic,
                b,
                bootstrap_seed: derive_seed(seed, &[0x0f11]),
            };
            let mut admissibility = serde_json::Map::new();
            for i in 0..4 {
                let curve = ofpli_curve(&sample, i, &grid, &cfg, &QuantileEstimator::ReverseIs)?;
                write_curve_outputs(&mut out, i + 1, sample.input_specs()[i].r(), &curve)?;
                summarize_curve(i + 1, &curve);
                admissibility.insert(
                    format!("input_{}", i + 1),
                    json!({ "delta_max": curve.delta_max }),
                );
            }
            let evaluable = spec.builtin().expect("built-in");
            let n_base = 20_000;
            let nominal = fisherpli::models::generate_sample(
                &spec,
                n_base,
                derive_seed(seed, &[0x7485]),
            )?;
            let threshold =
                fisherpli::estimation::empirical_quantile(nominal.outputs(), 0.95)?;
            let sobol = sobol_target(evaluable, &spec.input_specs, n_base, threshold, seed)?;
            out.write("sobol.csv", &sobol_csv(&sobol))?;
            out.write_manifest(
                "demo flood",
                seed,
                json!({ "model": "flood", "n": n, "k": k, "steps": steps, "b": b, "alpha": 0.95, "delta_grid": grid, "n_base": n_base, "seed": seed }),
                json!({ "admissibility": admissibility, "threshold": threshold }),
            )?;
        }
    }
    Ok(())
}
