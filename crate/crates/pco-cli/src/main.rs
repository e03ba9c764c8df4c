//! Command-line front end: bandwidth selection on CSV data, penalty
//! calibration, the Monte Carlo risk laboratory, and the Gaussian-sequence
//! demo. Structured results go to JSON, long-format tables to CSV, both
//! under `<out>/<subcommand>_<timestamp>.{json,csv}`.

mod ingest;

use chrono::Utc;
use clap::{Parser, Subcommand};
use pco::baselines::{self, BaselineSpec};
use pco::calibration;
use pco::gwn;
use pco::kernels::{Bandwidth, Kernel, ProductKernel};
use pco::risklab::{self, Density, Method};
use pco::selection::{BandwidthGrid, PenaltySpec};
use pco::{CriterionTable, Sample};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_INVALID: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_NO_TRANSITION: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "pco", version, about = "Bandwidth selection by penalized comparison to overfitting")]
struct Cli {
    /// JSON config file; fields present in it override the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (1 = fully sequential execution order).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    /// Output directory for result files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Master seed; required by the randomized subcommands.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Select a bandwidth for a CSV sample.
    Select {
        /// CSV input, one observation per row.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Kernel id: gaussian | epanechnikov | order:<l>:<base>.
        #[arg(long)]
        kernel: Option<String>,
        /// Grid spec "geometric:<hmin>:<hmax>:<count>"; ";"-separated per axis.
        #[arg(long)]
        grid: Option<String>,
        /// Penalty constant for the pco method.
        #[arg(long)]
        lambda: Option<f64>,
        /// pco | lepski | gl | lscv.
        #[arg(long)]
        method: Option<String>,
        /// Variance-proxy constant for the baseline methods.
        #[arg(long)]
        kappa1: Option<f64>,
    },
    /// Sweep the penalty constant and locate the minimal-penalty transition.
    Calibrate {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        kernel: Option<String>,
        #[arg(long)]
        grid: Option<String>,
        /// Linear lambda grid "lo:hi:count" (default -1:2:31).
        #[arg(long)]
        lambda_grid: Option<String>,
    },
    /// Run a risk-laboratory experiment described by --config.
    Simulate,
    /// Gaussian-sequence-model phase diagram.
    GwnDemo {
        /// Number of coefficients N (noise level is 1/sqrt(N)).
        #[arg(long = "N", visible_alias = "dims")]
        dims: Option<usize>,
        /// Linear lambda grid "lo:hi:count" (default 0.1:2:20).
        #[arg(long)]
        lambda_grid: Option<String>,
        #[arg(long)]
        reps: Option<usize>,
        /// Target coefficients: zero | power:<a>.
        #[arg(long)]
        theta: Option<String>,
    },
}

/// Config-file counterpart of the flags; present fields win.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    input: Option<PathBuf>,
    out: Option<PathBuf>,
    kernel: Option<String>,
    grid: Option<String>,
    lambda: Option<f64>,
    lambda_grid: Option<String>,
    method: Option<String>,
    kappa1: Option<f64>,
    seed: Option<u64>,
    threads: Option<usize>,
    dims: Option<usize>,
    reps: Option<usize>,
    theta: Option<String>,
    experiment: Option<Scenario>,
}

/// Risk-laboratory scenario carried by the config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Scenario {
    Oracle {
        density: Density,
        n: usize,
        reps: usize,
        methods: Vec<Method>,
    },
    MinimalPenalty {
        density: Density,
        n: usize,
        reps: usize,
        lambdas: Vec<f64>,
    },
    Rate {
        density: Density,
        n_list: Vec<usize>,
        reps: usize,
        #[serde(default = "default_rate_lambda")]
        lambda: f64,
    },
}

fn default_rate_lambda() -> f64 {
    1.0
}

/// Failure carrying the process exit code and a machine-readable kind.
#[derive(Debug)]
struct CliError {
    code: u8,
    kind: &'static str,
    message: String,
}

impl CliError {
    fn invalid(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INVALID,
            kind: "invalid_argument",
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_IO,
            kind: "io",
            message: message.into(),
        }
    }
}

impl From<pco::Error> for CliError {
    fn from(err: pco::Error) -> Self {
        match err {
            pco::Error::CalibrationFailed { .. } => CliError {
                code: EXIT_NO_TRANSITION,
                kind: "no_transition",
                message: err.to_string(),
            },
            other => CliError::invalid(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let payload = serde_json::json!({
                "error": { "code": err.code, "kind": err.kind, "message": err.message }
            });
            println!("{payload}");
            ExitCode::from(err.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<FileConfig>(&text)
                .map_err(|e| CliError::invalid(format!("bad config {}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let threads = config.threads.unwrap_or(cli.threads);
    pco::exec::configure_threads(threads).map_err(CliError::invalid)?;
    let out_dir = config.out.clone().unwrap_or_else(|| cli.out.clone());
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::io(format!("cannot create {}: {e}", out_dir.display())))?;
    let seed = config.seed.or(cli.seed);

    match &cli.command {
        Command::Select {
            input,
            kernel,
            grid,
            lambda,
            method,
            kappa1,
        } => run_select(
            &out_dir,
            config.input.as_ref().or(input.as_ref()),
            config.kernel.as_deref().or(kernel.as_deref()),
            config.grid.as_deref().or(grid.as_deref()),
            config.lambda.or(*lambda),
            config.method.as_deref().or(method.as_deref()),
            config.kappa1.or(*kappa1),
        ),
        Command::Calibrate {
            input,
            kernel,
            grid,
            lambda_grid,
        } => run_calibrate(
            &out_dir,
            config.input.as_ref().or(input.as_ref()),
            config.kernel.as_deref().or(kernel.as_deref()),
            config.grid.as_deref().or(grid.as_deref()),
            config.lambda_grid.as_deref().or(lambda_grid.as_deref()),
        ),
        Command::Simulate => {
            let scenario = config
                .experiment
                .clone()
                .ok_or_else(|| CliError::invalid("simulate needs an `experiment` in --config"))?;
            let seed = seed.ok_or_else(|| {
                CliError::invalid("simulate needs --seed (or a seed in the config)")
            })?;
            run_simulate(
                &out_dir,
                scenario,
                config.kernel.as_deref(),
                config.grid.as_deref(),
                seed,
            )
        }
        Command::GwnDemo {
            dims,
            lambda_grid,
            reps,
            theta,
        } => {
            let seed = seed.ok_or_else(|| {
                CliError::invalid("gwn-demo needs --seed (or a seed in the config)")
            })?;
            run_gwn(
                &out_dir,
                config.dims.or(*dims).unwrap_or(500),
                config.lambda_grid.as_deref().or(lambda_grid.as_deref()),
                config.reps.or(*reps).unwrap_or(200),
                config.theta.as_deref().or(theta.as_deref()).unwrap_or("zero"),
                seed,
            )
        }
    }
}

// ---------------------------------------------------------------------------
// shared pieces

fn timestamp() -> String {
    Utc::now().format("%Y%m%dT%H%M%SZ").to_string()
}

fn write_json<T: Serialize>(out_dir: &Path, name: &str, value: &T) -> Result<PathBuf, CliError> {
    let path = out_dir.join(format!("{name}.json"));
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::invalid(format!("serialization failed: {e}")))?;
    std::fs::write(&path, text + "\n")
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn write_csv(
    out_dir: &Path,
    name: &str,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<PathBuf, CliError> {
    let path = out_dir.join(format!("{name}.csv"));
    let mut writer = csv::Writer::from_path(&path)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
    writer
        .write_record(header)
        .and_then(|()| rows.iter().try_for_each(|row| writer.write_record(row)))
        .and_then(|()| writer.flush().map_err(Into::into))
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn load_sample(input: Option<&PathBuf>) -> Result<Sample, CliError> {
    let path = input.ok_or_else(|| CliError::invalid("--input is required"))?;
    ingest::ingest_csv(path).map_err(|e| {
        if path.exists() {
            CliError::invalid(format!("{e:#}"))
        } else {
            CliError::io(format!("{e:#}"))
        }
    })
}

fn build_kernel(id: Option<&str>, dim: usize) -> Result<ProductKernel, CliError> {
    let axis = Kernel::parse(id.unwrap_or("gaussian")).map_err(CliError::from)?;
    ProductKernel::new(axis, dim).map_err(CliError::from)
}

/// Grid spec: "geometric:<hmin>:<hmax>:<count>", ";"-separated per axis.
fn parse_grid(
    spec: Option<&str>,
    kernel: &ProductKernel,
    n: usize,
) -> Result<BandwidthGrid, CliError> {
    let Some(spec) = spec else {
        if kernel.dim() == 1 {
            return BandwidthGrid::geometric_default(kernel, n).map_err(CliError::from);
        }
        return Err(CliError::invalid(
            "multivariate data needs an explicit --grid with one spec per axis",
        ));
    };
    let axes: Vec<Vec<f64>> = spec
        .split(';')
        .map(parse_axis_spec)
        .collect::<Result<_, _>>()?;
    if axes.len() != kernel.dim() {
        return Err(CliError::invalid(format!(
            "grid has {} axes but the data has dimension {}",
            axes.len(),
            kernel.dim()
        )));
    }
    if kernel.dim() == 1 {
        let list = axes[0]
            .iter()
            .map(|&h| Bandwidth::scalar(h))
            .collect::<pco::Result<Vec<_>>>()
            .map_err(CliError::from)?;
        BandwidthGrid::new(list, kernel, n).map_err(CliError::from)
    } else {
        BandwidthGrid::product(&axes, kernel, n).map_err(CliError::from)
    }
}

fn parse_axis_spec(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        ["geometric", lo, hi, count] => {
            let lo: f64 = lo
                .parse()
                .map_err(|_| CliError::invalid(format!("bad grid bound {lo:?}")))?;
            let hi: f64 = hi
                .parse()
                .map_err(|_| CliError::invalid(format!("bad grid bound {hi:?}")))?;
            let count: usize = count
                .parse()
                .map_err(|_| CliError::invalid(format!("bad grid count {count:?}")))?;
            if count == 0 || lo.is_nan() || lo <= 0.0 || hi < lo {
                return Err(CliError::invalid(format!("bad grid spec {spec:?}")));
            }
            Ok(pco::selection::geometric_points(lo, hi, count))
        }
        _ => Err(CliError::invalid(format!(
            "grid spec {spec:?} is not geometric:<hmin>:<hmax>:<count>"
        ))),
    }
}

/// Linear grid "lo:hi:count".
fn parse_linear_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, count] = parts.as_slice() else {
        return Err(CliError::invalid(format!(
            "grid {spec:?} is not lo:hi:count"
        )));
    };
    let lo: f64 = lo
        .parse()
        .map_err(|_| CliError::invalid(format!("bad bound {lo:?}")))?;
    let hi: f64 = hi
        .parse()
        .map_err(|_| CliError::invalid(format!("bad bound {hi:?}")))?;
    let count: usize = count
        .parse()
        .map_err(|_| CliError::invalid(format!("bad count {count:?}")))?;
    if count < 2 || hi <= lo {
        return Err(CliError::invalid(format!("bad grid spec {spec:?}")));
    }
    let step = (hi - lo) / (count - 1) as f64;
    Ok((0..count).map(|k| lo + k as f64 * step).collect())
}

fn format_components(h: &Bandwidth) -> Vec<String> {
    h.components().iter().map(|c| c.to_string()).collect()
}

// ---------------------------------------------------------------------------
// select

#[derive(Serialize)]
struct SelectResult {
    method: String,
    kernel: String,
    lambda: Option<f64>,
    selected: Bandwidth,
    warnings: Vec<String>,
    table: Option<CriterionTable>,
}

fn run_select(
    out_dir: &Path,
    input: Option<&PathBuf>,
    kernel_id: Option<&str>,
    grid_spec: Option<&str>,
    lambda: Option<f64>,
    method: Option<&str>,
    kappa1: Option<f64>,
) -> Result<(), CliError> {
    let sample = load_sample(input)?;
    let kernel = build_kernel(kernel_id, sample.dim())?;
    let grid = parse_grid(grid_spec, &kernel, sample.n())?;
    let mut warnings = Vec::new();
    if !grid.is_admissible() {
        warnings.push(format!(
            "minimal grid volume {:.3e} lies below the admissibility floor {:.3e}",
            grid.hmin().volume(),
            kernel.admissibility_threshold(sample.n())
        ));
    }
    let method = method.unwrap_or("pco");
    let baseline_spec = match kappa1 {
        Some(k) => BaselineSpec::with_kappa1(k),
        None => BaselineSpec::default(),
    };
    let result = match method {
        "pco" => {
            let spec = PenaltySpec::Family {
                lambda: lambda.unwrap_or(1.0),
            };
            let table = pco::select_bandwidth(&sample, &kernel, &grid, &spec)?;
            SelectResult {
                method: method.into(),
                kernel: kernel.axis().id().into(),
                lambda: Some(lambda.unwrap_or(1.0)),
                selected: table.selected_bandwidth().clone(),
                warnings,
                table: Some(table),
            }
        }
        "lepski" | "gl" | "lscv" => {
            let selected = match method {
                "lepski" => baselines::lepski_select(&sample, &kernel, &grid, &baseline_spec)?,
                "gl" => baselines::gl_select(&sample, &kernel, &grid, &baseline_spec)?,
                _ => baselines::lscv_select(&sample, &kernel, &grid)?,
            };
            SelectResult {
                method: method.into(),
                kernel: kernel.axis().id().into(),
                lambda: None,
                selected,
                warnings,
                table: None,
            }
        }
        other => {
            return Err(CliError::invalid(format!(
                "unknown method {other:?}; expected pco, lepski, gl, or lscv"
            )))
        }
    };
    let path = write_json(out_dir, &format!("select_{}", timestamp()), &result)?;
    println!(
        "selected bandwidth {:?} by {} -> {}",
        result.selected.components(),
        result.method,
        path.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// calibrate

#[derive(Serialize)]
struct CalibrateSummary {
    kernel: String,
    no_transition: bool,
    critical_lambda: Option<f64>,
    jump_ratio: Option<f64>,
    recommended_lambda: Option<f64>,
    trace: calibration::CalibrationTrace,
}

fn run_calibrate(
    out_dir: &Path,
    input: Option<&PathBuf>,
    kernel_id: Option<&str>,
    grid_spec: Option<&str>,
    lambda_grid: Option<&str>,
) -> Result<(), CliError> {
    let sample = load_sample(input)?;
    let kernel = build_kernel(kernel_id, sample.dim())?;
    let grid = parse_grid(grid_spec, &kernel, sample.n())?;
    let lambdas = match lambda_grid {
        Some(spec) => parse_linear_grid(spec)?,
        None => calibration::default_lambda_grid(),
    };
    let trace = calibration::scan_lambda(&sample, &kernel, &grid, &lambdas)?;
    let jump = calibration::detect_jump(&trace);

    let stem = format!("calibrate_{}", timestamp());
    let mut header = vec!["lambda".to_string()];
    header.extend((1..=sample.dim()).map(|j| format!("h{j}")));
    header.push("volume".into());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = trace
        .rows
        .iter()
        .map(|row| {
            let mut cells = vec![row.lambda.to_string()];
            cells.extend(format_components(&row.selected));
            cells.push(row.volume.to_string());
            cells
        })
        .collect();
    let csv_path = write_csv(out_dir, &stem, &header_refs, &rows)?;

    let summary = CalibrateSummary {
        kernel: kernel.axis().id().into(),
        no_transition: jump.is_none(),
        critical_lambda: jump.map(|j| j.lambda),
        jump_ratio: jump.map(|j| j.ratio),
        recommended_lambda: jump.map(|j| j.lambda + 1.0),
        trace,
    };
    let json_path = write_json(out_dir, &stem, &summary)?;
    println!("trace -> {}", csv_path.display());
    println!("summary -> {}", json_path.display());
    match jump {
        Some(j) => {
            println!(
                "critical lambda {:.4}, recommended lambda {:.4}",
                j.lambda,
                j.lambda + 1.0
            );
            Ok(())
        }
        None => Err(CliError {
            code: EXIT_NO_TRANSITION,
            kind: "no_transition",
            message: "no penalty transition detected over the lambda grid".into(),
        }),
    }
}

// ---------------------------------------------------------------------------
// simulate

fn run_simulate(
    out_dir: &Path,
    scenario: Scenario,
    kernel_id: Option<&str>,
    grid_spec: Option<&str>,
    seed: u64,
) -> Result<(), CliError> {
    let stem = format!("simulate_{}", timestamp());
    match scenario {
        Scenario::Oracle {
            density,
            n,
            reps,
            methods,
        } => {
            let kernel = build_kernel(kernel_id, 1)?;
            let grid = parse_grid(grid_spec, &kernel, n)?;
            let report =
                risklab::oracle_experiment(&density, n, &kernel, &grid, &methods, reps, seed)?;
            let mut rows = Vec::new();
            for summary in &report.methods {
                let lambda = summary
                    .method
                    .strip_prefix("pco(lambda=")
                    .and_then(|rest| rest.strip_suffix(')'))
                    .unwrap_or("")
                    .to_string();
                for rep in &summary.reps {
                    rows.push(vec![
                        summary.method.clone(),
                        lambda.clone(),
                        rep.selected.components()[0].to_string(),
                        rep.rep.to_string(),
                        rep.ise.to_string(),
                    ]);
                }
            }
            let csv_path = write_csv(
                out_dir,
                &stem,
                &["method", "lambda", "h", "rep", "ise"],
                &rows,
            )?;
            let json_path = write_json(out_dir, &stem, &report)?;
            println!("long table -> {}", csv_path.display());
            println!("summary -> {}", json_path.display());
            for summary in &report.methods {
                println!(
                    "{}: median oracle ratio {:.4}",
                    summary.method, summary.median_oracle_ratio
                );
            }
            Ok(())
        }
        Scenario::MinimalPenalty {
            density,
            n,
            reps,
            lambdas,
        } => {
            let kernel = build_kernel(kernel_id, 1)?;
            let grid = parse_grid(grid_spec, &kernel, n)?;
            let report = risklab::minimal_penalty_experiment(
                &density, n, &kernel, &grid, &lambdas, reps, seed,
            )?;
            let mut rows = Vec::new();
            for row in &report.rows {
                for (rep, volume) in row.selected_volumes.iter().enumerate() {
                    rows.push(vec![
                        row.lambda.to_string(),
                        rep.to_string(),
                        volume.to_string(),
                        row.cap_factor.to_string(),
                    ]);
                }
            }
            let csv_path = write_csv(
                out_dir,
                &stem,
                &["lambda", "rep", "selected_volume", "cap_factor"],
                &rows,
            )?;
            let json_path = write_json(out_dir, &stem, &report)?;
            println!("long table -> {}", csv_path.display());
            println!("summary -> {}", json_path.display());
            for row in &report.rows {
                println!(
                    "lambda {:+.3}: frequency within {:.2} x minimal volume = {:.3}",
                    row.lambda, row.cap_factor, row.frequency
                );
            }
            Ok(())
        }
        Scenario::Rate {
            density,
            n_list,
            reps,
            lambda,
        } => {
            let kernel = build_kernel(kernel_id.or(Some("order:4:gaussian")), 1)?;
            let penalty = PenaltySpec::Family { lambda };
            let report =
                risklab::rate_experiment(&density, &kernel, &n_list, &penalty, reps, seed)?;
            let rows: Vec<Vec<String>> = report
                .rows
                .iter()
                .map(|row| {
                    vec![
                        row.n.to_string(),
                        row.median_ise.to_string(),
                        row.median_volume.to_string(),
                    ]
                })
                .collect();
            let csv_path = write_csv(
                out_dir,
                &stem,
                &["n", "median_ise", "median_volume"],
                &rows,
            )?;
            let json_path = write_json(out_dir, &stem, &report)?;
            println!("table -> {}", csv_path.display());
            println!("summary -> {}", json_path.display());
            println!("log-log slope {:.4}", report.slope);
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// gwn demo

#[derive(Serialize)]
struct GwnSummary {
    dims: usize,
    epsilon: f64,
    theta: String,
    reps: usize,
    seed: u64,
    rows: Vec<gwn::PhaseRow>,
}

fn run_gwn(
    out_dir: &Path,
    dims: usize,
    lambda_grid: Option<&str>,
    reps: usize,
    theta: &str,
    seed: u64,
) -> Result<(), CliError> {
    let epsilon = 1.0 / (dims as f64).sqrt();
    let model = match theta {
        "zero" => gwn::SequenceModel::zero(dims, epsilon)?,
        other => match other.strip_prefix("power:") {
            Some(exp) => {
                let exponent: f64 = exp
                    .parse()
                    .map_err(|_| CliError::invalid(format!("bad theta exponent {exp:?}")))?;
                gwn::SequenceModel::power(dims, exponent, epsilon)?
            }
            None => {
                return Err(CliError::invalid(format!(
                    "theta {other:?} is not zero or power:<a>"
                )))
            }
        },
    };
    let lambdas = match lambda_grid {
        Some(spec) => parse_linear_grid(spec)?,
        None => parse_linear_grid("0.1:2:20")?,
    };
    let rows = gwn::phase_diagram(&model, &lambdas, reps, seed)?;
    let stem = format!("gwn-demo_{}", timestamp());
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|row| {
            vec![
                row.lambda.to_string(),
                row.mean_dim.to_string(),
                row.mean_risk.to_string(),
            ]
        })
        .collect();
    let csv_path = write_csv(
        out_dir,
        &stem,
        &["lambda", "mean_dim", "mean_risk"],
        &csv_rows,
    )?;
    let summary = GwnSummary {
        dims,
        epsilon,
        theta: theta.to_string(),
        reps,
        seed,
        rows,
    };
    let json_path = write_json(out_dir, &stem, &summary)?;
    println!("table -> {}", csv_path.display());
    println!("summary -> {}", json_path.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_scenario_configs_parse() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        for name in [
            "oracle_normal.json",
            "oracle_bimodal.json",
            "oracle_claw.json",
            "minimal_penalty.json",
            "rate_normal.json",
        ] {
            let text = std::fs::read_to_string(dir.join(name)).unwrap();
            let config: FileConfig = serde_json::from_str(&text)
                .unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(config.experiment.is_some(), "{name} carries an experiment");
            assert!(config.seed.is_some(), "{name} carries a seed");
        }
    }

    #[test]
    fn grid_specs_parse_and_validate() {
        let points = parse_axis_spec("geometric:0.01:1:5").unwrap();
        assert_eq!(points.len(), 5);
        assert!((points[0] - 0.01).abs() < 1e-15);
        assert!((points[4] - 1.0).abs() < 1e-15);
        assert!(parse_axis_spec("geometric:0:1:5").is_err());
        assert!(parse_axis_spec("linear:0.1:1:5").is_err());
        assert!(parse_linear_grid("-1:2:31").unwrap().len() == 31);
        assert!(parse_linear_grid("2:-1:31").is_err());
    }
}
