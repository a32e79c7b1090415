#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use nalgebra::{DMatrix, DVector};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use netkrig::anomaly::{diagnose, DEFAULT_MIN_RUN};
use netkrig::covariance::TemporalCov;
use netkrig::estimation::{common_hurst, flow_stats, DEFAULT_J1};
use netkrig::kriging::KrigingModel;
use netkrig::protocol::{internet2_sweep_sets, krige_sweep, write_sweep_csv, INTERNET2_TARGET};
use netkrig::sim::{
    simulate_aggregate_onoff, synthesize_route_traffic, MeanProfile, OnOffParams, Regime,
    RegimeModel,
};
use netkrig::trace::{format_f64, TraceKind, TraceSet};
use netkrig::validation::{run_criterion, Scale, ValidationOptions, ValidationReport, CRITERIA, REPORT_SCHEMA_VERSION};
use netkrig::{build_routing_matrix, internet2_topology, Error, RoutingMatrix, Topology};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "netkrig", version, about = "Network traffic simulation, kriging and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize route and link traces.
    Simulate(SimulateArgs),
    /// Predict a link from observed links, optionally sweeping several observed sets.
    Krige(KrigeArgs),
    /// Per-series moments, Hurst exponents and correlations.
    Estimate(EstimateArgs),
    /// Per-bin p-values of a link predicted from other links.
    Diagnose(DiagnoseArgs),
    /// Run the acceptance checks and write a JSON report.
    Validate(ValidateArgs),
}

#[derive(Args, Serialize, Deserialize, Default, Clone)]
#[serde(default)]
struct Common {
    /// `builtin:internet2` or a topology JSON file.
    #[arg(long)]
    topology: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file with default values for any flag.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Default, Clone)]
#[serde(default)]
struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    /// fbm, stable or onoff.
    #[arg(long)]
    regime: Option<String>,
    #[arg(long)]
    hurst: Option<f64>,
    /// Stable index, or the On/Off duration tail index.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    bins: Option<usize>,
    /// Bin width in seconds.
    #[arg(long)]
    delta: Option<f64>,
    /// Mean bytes per bin on every route.
    #[arg(long)]
    mean: Option<f64>,
    /// Fluctuation scale (bytes per bin) on every route.
    #[arg(long)]
    scale: Option<f64>,
    /// On/Off sources per route.
    #[arg(long)]
    sources: Option<usize>,
    /// On/Off sending rate in bytes per second.
    #[arg(long)]
    rate: Option<f64>,
    /// On/Off minimum duration in seconds.
    #[arg(long)]
    x_min: Option<f64>,
    #[arg(long)]
    start_time: Option<f64>,
    /// Replace negative counts by zero in the written files.
    #[arg(long)]
    clip_at_zero: Option<bool>,
}

#[derive(Args, Serialize, Deserialize, Default, Clone)]
#[serde(default)]
struct KrigeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    /// Link trace CSV (with its JSON sidecar).
    #[arg(long)]
    links: Option<PathBuf>,
    /// Route trace CSV used to estimate route means and variances.
    #[arg(long)]
    routes: Option<PathBuf>,
    #[arg(long)]
    target: Option<usize>,
    /// Comma-separated observed link ids; repeat for a sweep.
    #[arg(long)]
    observed: Vec<String>,
    /// Use the built-in Internet2 sweep of observed sets (target 13).
    #[arg(long)]
    internet2_sweep: Option<bool>,
    #[arg(long)]
    confidence: Option<f64>,
    /// Also run h-step prediction with this horizon.
    #[arg(long)]
    horizon: Option<usize>,
    /// Past bins used by the h-step predictor.
    #[arg(long)]
    memory: Option<usize>,
    /// Hurst exponent for h-step prediction; estimated from routes if absent.
    #[arg(long)]
    hurst: Option<f64>,
}

#[derive(Args, Serialize, Deserialize, Default, Clone)]
#[serde(default)]
struct EstimateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    /// Trace CSV (route or link level).
    #[arg(long)]
    traces: Option<PathBuf>,
    #[arg(long)]
    j1: Option<usize>,
    #[arg(long)]
    j2: Option<usize>,
    /// Hurst spread tolerated before a series is reported as an outlier.
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Args, Serialize, Deserialize, Default, Clone)]
#[serde(default)]
struct DiagnoseArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[arg(long)]
    links: Option<PathBuf>,
    #[arg(long)]
    routes: Option<PathBuf>,
    #[arg(long)]
    target: Option<usize>,
    /// Comma-separated observed link ids.
    #[arg(long)]
    observed: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Consecutive sub-alpha bins needed to flag a window.
    #[arg(long)]
    min_run: Option<usize>,
}

#[derive(Args, Serialize, Deserialize, Default, Clone)]
#[serde(default)]
struct ValidateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    /// quick or full.
    #[arg(long)]
    scale: Option<String>,
    /// Diagnostic: flip the sign of the kriging gain.
    #[arg(long)]
    mutate_gain: Option<bool>,
    /// Comma-separated criterion ids to run.
    #[arg(long)]
    only: Option<String>,
}

/// Overlays explicitly given flags on the config file.
fn merge<A: Serialize + DeserializeOwned>(cli: &A, config: Option<&Path>) -> Result<A> {
    let mut base = match config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
            serde_json::from_str::<Value>(&text).with_context(|| format!("parsing config {}", p.display()))?
        }
        None => json!({}),
    };
    let Some(obj) = base.as_object_mut() else {
        bail!("config file must hold a JSON object");
    };
    if let Value::Object(over) = serde_json::to_value(cli)? {
        for (k, v) in over {
            let empty = v.is_null() || v.as_array().is_some_and(|a| a.is_empty());
            if !empty {
                obj.insert(k, v);
            }
        }
    }
    serde_json::from_value(base).context("config does not match the command's options")
}

fn out_dir(common: &mut Common) -> Result<PathBuf> {
    let dir = common.out.get_or_insert_with(|| PathBuf::from("out")).clone();
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn echo_config<A: Serialize>(dir: &Path, args: &A) -> Result<()> {
    fs::write(dir.join("config.json"), serde_json::to_string_pretty(args)? + "\n")?;
    Ok(())
}

fn load_topology(spec: &str) -> Result<Topology> {
    match spec {
        "builtin:internet2" => Ok(internet2_topology()),
        s if s.starts_with("builtin:") => bail!("unknown built-in topology `{s}`"),
        path => {
            let text = fs::read_to_string(path).with_context(|| format!("reading topology {path}"))?;
            Ok(Topology::from_json(&text)?)
        }
    }
}

fn parse_ids(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().with_context(|| format!("bad link id `{t}`")))
        .collect()
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")
        .with_context(|| format!("writing {}", path.display()))
}

fn cmd_simulate(cli: &SimulateArgs) -> Result<()> {
    let mut a = merge(cli, cli.common.config.as_deref())?;
    let topo = load_topology(a.common.topology.get_or_insert_with(|| "builtin:internet2".into()))?;
    let routing = build_routing_matrix(&topo)?;
    let j = routing.num_routes();
    let bins = *a.bins.get_or_insert(8640);
    if bins == 0 {
        bail!("--bins must be positive");
    }
    let delta = *a.delta.get_or_insert(10.0);
    if !(delta > 0.0) {
        bail!("--delta must be positive");
    }
    let seed = *a.common.seed.get_or_insert(1);
    let regime = a.regime.get_or_insert_with(|| "fbm".into()).clone();
    let start = *a.start_time.get_or_insert(0.0);

    let (routes, links) = match regime.as_str() {
        "fbm" | "stable" => {
            let kind = if regime == "fbm" {
                Regime::FastGaussian {
                    hurst: *a.hurst.get_or_insert(0.8),
                }
            } else {
                Regime::SlowStable {
                    alpha: *a.alpha.get_or_insert(1.5),
                    beta: *a.beta.get_or_insert(0.0),
                }
            };
            let model = RegimeModel {
                regime: kind,
                weights: vec![1.0; j],
                mean: MeanProfile::Constant(DVector::from_element(j, *a.mean.get_or_insert(1e6))),
                scale: vec![*a.scale.get_or_insert(1e5); j],
            };
            let (r, l) = synthesize_route_traffic(&model, &routing, bins, seed)?;
            (
                TraceSet::new(delta, start, r.series, r.ids, TraceKind::Route)?,
                TraceSet::new(delta, start, l.series, l.ids, TraceKind::Link)?,
            )
        }
        "onoff" => {
            let alpha = *a.alpha.get_or_insert(1.5);
            let x_min = *a.x_min.get_or_insert(1.0);
            let params = OnOffParams {
                alpha_on: alpha,
                alpha_off: alpha,
                x_min_on: x_min,
                x_min_off: x_min,
                num_sources: *a.sources.get_or_insert(100),
                rate: *a.rate.get_or_insert(1250.0),
            };
            params.validate_heavy_tailed()?;
            let r = simulate_aggregate_onoff::<f64>(&params, j, bins as f64 * delta, delta, seed)?;
            let l = routing.apply_series(&r.series)?;
            (
                TraceSet::new(delta, start, r.series, r.ids, TraceKind::Route)?,
                TraceSet::new(delta, start, l, (1..=routing.num_links()).collect(), TraceKind::Link)?,
            )
        }
        other => bail!("unknown regime `{other}` (expected fbm, stable or onoff)"),
    };
    let (routes, links) = if *a.clip_at_zero.get_or_insert(false) {
        (routes.clipped_at_zero(), links.clipped_at_zero())
    } else {
        (routes, links)
    };
    let dir = out_dir(&mut a.common)?;
    routes.save(&dir, "routes")?;
    links.save(&dir, "links")?;
    fs::write(dir.join("topology.json"), topo.to_json()? + "\n")?;
    echo_config(&dir, &a)?;
    println!(
        "wrote {} routes and {} links x {bins} bins to {}",
        routes.num_series(),
        links.num_series(),
        dir.display()
    );
    Ok(())
}

/// Route means and variances estimated from a route trace.
fn route_moments(path: &Path, routing: &RoutingMatrix) -> Result<(DVector<f64>, DVector<f64>, TraceSet<f64>)> {
    let routes = TraceSet::<f64>::load(path).with_context(|| format!("loading {}", path.display()))?;
    if routes.num_series() != routing.num_routes() {
        bail!(
            "route trace has {} series, topology has {} routes",
            routes.num_series(),
            routing.num_routes()
        );
    }
    let n = routes.num_bins() as f64;
    if n < 2.0 {
        bail!("route trace needs at least two bins");
    }
    let mu = DVector::from_fn(routes.num_series(), |i, _| routes.series.row(i).sum() / n);
    let var = DVector::from_fn(routes.num_series(), |i, _| {
        routes.series.row(i).iter().map(|v| (v - mu[i]).powi(2)).sum::<f64>() / (n - 1.0)
    });
    Ok((mu, var, routes))
}

fn labels(set: &[usize]) -> String {
    set.iter().map(|l| l.to_string()).collect::<Vec<_>>().join("_")
}

fn cmd_krige(cli: &KrigeArgs) -> Result<()> {
    let mut a = merge(cli, cli.common.config.as_deref())?;
    let topo = load_topology(a.common.topology.get_or_insert_with(|| "builtin:internet2".into()))?;
    let routing = build_routing_matrix(&topo)?;
    let links_path = a.links.clone().context("--links is required")?;
    let routes_path = a.routes.clone().context("--routes is required")?;
    let links = TraceSet::<f64>::load(&links_path).with_context(|| format!("loading {}", links_path.display()))?;
    let (mu, var, routes) = route_moments(&routes_path, &routing)?;

    let (target, sets) = if *a.internet2_sweep.get_or_insert(false) {
        (*a.target.get_or_insert(INTERNET2_TARGET), internet2_sweep_sets())
    } else {
        let target = a.target.context("--target is required")?;
        if a.observed.is_empty() {
            bail!("at least one --observed set is required");
        }
        let sets = a.observed.iter().map(|s| parse_ids(s)).collect::<Result<Vec<_>>>()?;
        (target, sets)
    };
    for set in &sets {
        if set.contains(&target) {
            bail!("target link {target} is part of observed set {}", labels(set));
        }
    }
    let confidence = *a.confidence.get_or_insert(0.95);
    let dir = out_dir(&mut a.common)?;
    let (rows, runs) = krige_sweep(&routing, &links, &mu, &var, target, &sets)?;
    for run in &runs {
        let file = fs::File::create(dir.join(format!("predictions_{}.csv", labels(&run.observed))))?;
        run.write_csv(&links, confidence, std::io::BufWriter::new(file))?;
    }
    write_sweep_csv(&rows, std::io::BufWriter::new(fs::File::create(dir.join("summary.csv"))?))?;

    let mut summary = json!({
        "schema_version": SCHEMA_VERSION,
        "target": target,
        "bins": links.num_bins(),
        "confidence": confidence,
        "rows": rows,
    });

    if let Some(h) = a.horizon {
        let m = *a.memory.get_or_insert(10);
        if links.num_bins() < m + h + 1 {
            bail!("h-step prediction needs at least {} bins", m + h + 1);
        }
        let hurst = match a.hurst {
            Some(hv) => hv,
            None => common_hurst(&flow_stats(&routes, DEFAULT_J1, None)?, 0.1)?.hurst,
        };
        a.hurst = Some(hurst);
        let temporal = TemporalCov::new(hurst, 1.0, m)?;
        let mut hstep = Vec::new();
        for set in &sets {
            let model = KrigingModel::fit(&routing, set, &mu, &var)?;
            let pos = model.unobserved_position(target).ok_or(Error::UnknownLink(target))?;
            let y_o = links.select(set)?;
            let actual = links.row(target)?;
            let mut wtr = csv_writer(&dir.join(format!("hstep_{}.csv", labels(set))))?;
            wtr.write_record(["timestamp", "actual", "predicted", "lower", "upper"])?;
            let (mut num, mut den) = (0.0, 0.0);
            for t0 in m..links.num_bins() - h {
                let history: DMatrix<f64> = y_o.columns(t0 - m, m + 1).into_owned();
                let p = model.predict_h_step(&temporal, &history, h)?;
                let (lo, hi) = p.unobserved.bounds.as_ref().expect("gaussian")[pos];
                let (y, yhat) = (actual[t0 + h], p.unobserved.point[pos]);
                num += (yhat - y).powi(2);
                den += y * y;
                wtr.write_record([
                    format_f64(links.timestamp(t0 + h)),
                    format_f64(y),
                    format_f64(yhat),
                    format_f64(lo),
                    format_f64(hi),
                ])?;
            }
            wtr.flush()?;
            hstep.push(json!({
                "link_labels": set,
                "relative_mse": if den > 0.0 { num / den } else { f64::NAN },
            }));
        }
        summary["h_step"] = json!({ "horizon": h, "memory": m, "hurst": hurst, "rows": hstep });
    }
    write_json(&dir.join("summary.json"), &summary)?;
    echo_config(&dir, &a)?;
    for r in &rows {
        println!("{:>2}  {:<28} {:.6}", r.number_of_links, labels(&r.link_labels).replace('_', ","), r.relative_mse);
    }
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

fn cmd_estimate(cli: &EstimateArgs) -> Result<()> {
    let mut a = merge(cli, cli.common.config.as_deref())?;
    let path = a.traces.clone().context("--traces is required")?;
    let traces = TraceSet::<f64>::load(&path).with_context(|| format!("loading {}", path.display()))?;
    let j1 = *a.j1.get_or_insert(DEFAULT_J1);
    let stats = flow_stats(&traces, j1, a.j2)?;
    if stats.spectra.iter().all(|s| s.is_none()) {
        // surface the reason, e.g. a series too short for the octaves
        let row: Vec<f64> = traces.series.row(0).iter().copied().collect();
        netkrig::estimation::wavelet_spectrum(&row, j1, a.j2)?;
    }
    let dir = out_dir(&mut a.common)?;
    for (id, spec) in stats.ids.iter().zip(&stats.spectra) {
        if let Some(s) = spec {
            s.write_csv(std::io::BufWriter::new(fs::File::create(dir.join(format!("spectrum_{id}.csv")))?))?;
        }
    }
    let mut wtr = csv_writer(&dir.join("correlation.csv"))?;
    let header: Vec<String> = std::iter::once("id".to_string())
        .chain(stats.ids.iter().map(|i| i.to_string()))
        .collect();
    wtr.write_record(&header)?;
    for (id, row) in stats.ids.iter().zip(&stats.correlation) {
        let cells: Vec<String> = std::iter::once(id.to_string())
            .chain(row.iter().map(|c| c.map(format_f64).unwrap_or_default()))
            .collect();
        wtr.write_record(&cells)?;
    }
    wtr.flush()?;
    let common = common_hurst(&stats, *a.tolerance.get_or_insert(0.1)).ok();
    write_json(
        &dir.join("flow_stats.json"),
        &json!({
            "schema_version": SCHEMA_VERSION,
            "kind": traces.kind,
            "delta": traces.delta,
            "bins": traces.num_bins(),
            "stats": stats,
            "common_hurst": common,
        }),
    )?;
    echo_config(&dir, &a)?;
    if let Some(c) = common {
        println!("common H = {:.4}; outliers: {:?}", c.hurst, c.outliers);
    }
    Ok(())
}

fn cmd_diagnose(cli: &DiagnoseArgs) -> Result<()> {
    let mut a = merge(cli, cli.common.config.as_deref())?;
    let topo = load_topology(a.common.topology.get_or_insert_with(|| "builtin:internet2".into()))?;
    let routing = build_routing_matrix(&topo)?;
    let links_path = a.links.clone().context("--links is required")?;
    let routes_path = a.routes.clone().context("--routes is required")?;
    let target = a.target.context("--target is required")?;
    let observed = parse_ids(a.observed.as_deref().context("--observed is required")?)?;
    if observed.contains(&target) {
        bail!("target link {target} is part of the observed set");
    }
    let links = TraceSet::<f64>::load(&links_path).with_context(|| format!("loading {}", links_path.display()))?;
    let (mu, var, _) = route_moments(&routes_path, &routing)?;
    let model = KrigingModel::fit(&routing, &observed, &mu, &var)?;
    let dir = out_dir(&mut a.common)?;
    echo_config(&dir, &a)?;
    match diagnose(
        &model,
        &links,
        target,
        *a.alpha.get_or_insert(0.01),
        *a.min_run.get_or_insert(DEFAULT_MIN_RUN),
    ) {
        Ok(rep) => {
            rep.write_csv(std::io::BufWriter::new(fs::File::create(dir.join("anomaly.csv"))?))?;
            fs::write(dir.join("windows.json"), rep.windows_json()? + "\n")?;
            write_json(
                &dir.join("summary.json"),
                &json!({
                    "schema_version": SCHEMA_VERSION,
                    "target": target,
                    "observed": observed,
                    "alpha": rep.alpha,
                    "min_run": rep.min_run,
                    "bins": rep.rows.len(),
                    "flagged_windows": rep.windows.len(),
                    "exact": false,
                }),
            )?;
            println!("{} flagged windows", rep.windows.len());
            Ok(())
        }
        Err(Error::ExactPrediction { link, max_residual }) => {
            write_json(
                &dir.join("summary.json"),
                &json!({
                    "schema_version": SCHEMA_VERSION,
                    "target": link,
                    "observed": observed,
                    "exact": true,
                    "max_residual": max_residual,
                }),
            )?;
            println!("link {link} is an exact combination of the observed links (max residual {max_residual:e}); no p-values");
            Ok(())
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_validate(cli: &ValidateArgs) -> Result<bool> {
    let mut a = merge(cli, cli.common.config.as_deref())?;
    let scale = match a.scale.get_or_insert_with(|| "quick".into()).as_str() {
        "quick" => Scale::Quick,
        "full" => Scale::Full,
        other => bail!("unknown scale `{other}` (expected quick or full)"),
    };
    let opts = ValidationOptions {
        seed: *a.common.seed.get_or_insert(1),
        scale,
        mutate_gain: *a.mutate_gain.get_or_insert(false),
    };
    let only = a.only.as_deref().map(parse_ids).transpose()?;
    let mut criteria = Vec::new();
    for (id, _) in CRITERIA {
        if only.as_ref().is_some_and(|o| !o.contains(&(id as usize))) {
            continue;
        }
        let r = run_criterion(id, &opts);
        println!("{}", r.line());
        criteria.push(r);
    }
    let report = ValidationReport {
        schema_version: REPORT_SCHEMA_VERSION,
        seed: opts.seed,
        scale,
        mutate_gain: opts.mutate_gain,
        passed: criteria.iter().all(|c| c.passed),
        criteria,
    };
    let dir = out_dir(&mut a.common)?;
    write_json(&dir.join("validation.json"), &report)?;
    echo_config(&dir, &a)?;
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a).map(|_| true),
        Command::Krige(a) => cmd_krige(a).map(|_| true),
        Command::Estimate(a) => cmd_estimate(a).map(|_| true),
        Command::Diagnose(a) => cmd_diagnose(a).map(|_| true),
        Command::Validate(a) => cmd_validate(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
