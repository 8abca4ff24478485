//! Experiment runner: parses JSON configs (or builds them from flags),
//! dispatches to the core modules, and emits machine-readable reports.
//!
//! Exit codes: 0 all checks passed, 1 usage/config error, 2 check failure.

mod config;
mod runner;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use config::{ExperimentConfig, ExperimentKind};
use runner::Report;

#[derive(Parser)]
#[command(name = "conelab", version, about = "Weighted log-Sobolev / Hopf-Lax numerical laboratory")]
struct Cli {
    /// JSON experiment config; subcommand flags fill in a default config
    /// when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for reports and CSV series (stdout only if unset).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for sampled checks; overrides the config's seed when given.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Reserved; all computations are deterministic and single-threaded.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sharp constant, proof constants and cone masses.
    Constants(CommonArgs),
    /// Sampled validation of the weight hypotheses.
    Weightcheck(CommonArgs),
    /// Log-Sobolev deficit for p > 1.
    Deficit(CommonArgs),
    /// Indicator-family deficit for p = 1.
    Deficit1(CommonArgs),
    /// Hopf-Lax inf-convolution run with diagnostics.
    Hopflax(HopflaxArgs),
    /// Hypercontractivity estimate for the Hopf-Lax flow.
    Hyper(HyperArgs),
    /// 1D transport chain replay.
    Transport(TransportArgs),
    /// Run every config in a directory and aggregate.
    Suite(SuiteArgs),
}

#[derive(Args)]
struct CommonArgs {
    #[arg(long)]
    p: Option<f64>,
}

#[derive(Args)]
struct HopflaxArgs {
    #[arg(long)]
    p: Option<f64>,
    /// Comma-separated times, e.g. "0.25,0.5,1.0".
    #[arg(long)]
    t_grid: Option<String>,
    /// naive | pruned | fast_p2
    #[arg(long)]
    method: Option<String>,
    /// 1D grid "lo:hi:n", e.g. "-4:4:512".
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Initial datum "family:b=...", e.g. "convex_power:b=1.0".
    #[arg(long)]
    g: Option<String>,
}

#[derive(Args)]
struct HyperArgs {
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    /// Initial datum, e.g. "hyper_extremal" or "concave_power:b=0.5".
    #[arg(long)]
    g: Option<String>,
    /// "constant" or "monomial:a1,a2,...".
    #[arg(long)]
    weight: Option<String>,
    /// 1D grid "lo:hi:n".
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
}

#[derive(Args)]
struct TransportArgs {
    #[arg(long)]
    p: Option<f64>,
    /// "constant" or "monomial:tau".
    #[arg(long)]
    weight: Option<String>,
    /// Source family, e.g. "gaussian_extremal:lambda=1".
    #[arg(long)]
    src: Option<String>,
    /// Cells of the 1D grid.
    #[arg(long, alias = "N")]
    n_cells: Option<usize>,
}

#[derive(Args)]
struct SuiteArgs {
    /// Directory of *.json configs.
    #[arg(long)]
    dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<bool> {
    if cli.threads == 0 {
        bail!("--threads must be at least 1");
    }
    match &cli.command {
        Command::Suite(args) => run_suite(cli, &args.dir),
        command => {
            let (cfg, echo) = build_config(cli, command)?;
            let report = execute(cli, &cfg, echo)?;
            Ok(report.pass)
        }
    }
}

fn execute(cli: &Cli, cfg: &ExperimentConfig, echo: Value) -> Result<Report> {
    if let Some(dir) = &cli.out {
        fs::create_dir_all(dir).context("creating the output directory")?;
    }
    let report = runner::run(cfg, echo, cli.out.as_deref())?;
    let text = report.to_json();
    if let Some(dir) = &cli.out {
        let fname = format!("{}.json", report.name);
        fs::write(dir.join(&fname), &text).context("writing the report")?;
        println!("{}: {} -> {}", report.name, if report.pass { "PASS" } else { "FAIL" }, fname);
    } else {
        println!("{text}");
    }
    Ok(report)
}

fn build_config(cli: &Cli, command: &Command) -> Result<(ExperimentConfig, Value)> {
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let (mut cfg, echo) = ExperimentConfig::from_json(&text)?;
        let expected = command_kind(command);
        if cfg.experiment != expected {
            bail!(
                "config experiment \"{}\" does not match the \"{}\" subcommand",
                cfg.experiment.as_str(),
                expected.as_str()
            );
        }
        if let Some(seed) = cli.seed {
            cfg.seed = Some(seed);
        }
        return Ok((cfg, echo));
    }
    // assemble a config from flags
    let value = flags_to_json(cli, command)?;
    let (cfg, echo) = ExperimentConfig::from_json(&value.to_string())?;
    Ok((cfg, echo))
}

fn command_kind(command: &Command) -> ExperimentKind {
    match command {
        Command::Constants(_) => ExperimentKind::Constants,
        Command::Weightcheck(_) => ExperimentKind::Weightcheck,
        Command::Deficit(_) => ExperimentKind::Deficit,
        Command::Deficit1(_) => ExperimentKind::Deficit1,
        Command::Hopflax(_) => ExperimentKind::Hopflax,
        Command::Hyper(_) => ExperimentKind::Hyper,
        Command::Transport(_) => ExperimentKind::Transport,
        Command::Suite(_) => unreachable!("suite handled separately"),
    }
}

fn parse_grid_flag(s: &str) -> Result<Value> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        bail!("--grid expects \"lo:hi:n\", got \"{s}\"");
    }
    let lo: f64 = parts[0].parse().map_err(|_| anyhow!("--grid lo is not a number"))?;
    let hi: f64 = parts[1].parse().map_err(|_| anyhow!("--grid hi is not a number"))?;
    let n: usize = parts[2].parse().map_err(|_| anyhow!("--grid n is not an integer"))?;
    Ok(json!({"lo": [lo], "hi": [hi], "n_per_axis": n}))
}

fn parse_function_flag(s: &str) -> Result<Value> {
    let (family, rest) = match s.split_once(':') {
        Some((f, r)) => (f, Some(r)),
        None => (s, None),
    };
    let mut obj = json!({"family": family});
    if let Some(rest) = rest {
        for kv in rest.split(',') {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| anyhow!("--g expects key=value pairs, got \"{kv}\""))?;
            let num: f64 = v.parse().map_err(|_| anyhow!("--g value \"{v}\" is not a number"))?;
            obj[k] = json!(num);
        }
    }
    Ok(obj)
}

fn parse_weight_flag(s: &str) -> Result<(Value, Value)> {
    if s == "constant" {
        return Ok((json!({"kind": "full_space", "n": 1}), json!({"kind": "constant", "c": 1.0})));
    }
    if let Some(rest) = s.strip_prefix("constant:") {
        let c: f64 = rest.parse().map_err(|_| anyhow!("--weight constant value is not a number"))?;
        return Ok((json!({"kind": "full_space", "n": 1}), json!({"kind": "constant", "c": c})));
    }
    if let Some(rest) = s.strip_prefix("monomial:") {
        let exps: Vec<f64> = rest
            .split(',')
            .map(|v| v.parse::<f64>().map_err(|_| anyhow!("--weight exponent \"{v}\" is not a number")))
            .collect::<Result<_>>()?;
        let n = exps.len();
        return Ok((json!({"kind": "orthant", "n": n}), json!({"kind": "monomial", "exponents": exps})));
    }
    bail!("--weight expects \"constant[:c]\" or \"monomial:a1,a2,...\", got \"{s}\"")
}

fn flags_to_json(cli: &Cli, command: &Command) -> Result<Value> {
    let kind = command_kind(command);
    let mut cfg = json!({"experiment": kind.as_str(), "seed": cli.seed.unwrap_or(0)});
    match command {
        Command::Constants(args) | Command::Weightcheck(args) | Command::Deficit(args)
        | Command::Deficit1(args) => {
            cfg["p"] = json!(args.p.unwrap_or(2.0));
            cfg["cone"] = json!({"kind": "full_space", "n": 1});
            cfg["weight"] = json!({"kind": "constant", "c": 1.0});
            match kind {
                ExperimentKind::Deficit => {
                    cfg["function"] = json!({"family": "gaussian_extremal", "lambda": 1.0});
                }
                ExperimentKind::Deficit1 => {
                    cfg["lambda"] = json!(1.0);
                }
                _ => {}
            }
        }
        Command::Hopflax(args) => {
            cfg["p"] = json!(args.p.unwrap_or(2.0));
            cfg["cone"] = json!({"kind": "full_space", "n": 1});
            cfg["weight"] = json!({"kind": "constant", "c": 1.0});
            cfg["t_grid"] = match &args.t_grid {
                Some(s) => {
                    let ts: Vec<f64> = s
                        .split(',')
                        .map(|v| v.parse::<f64>().map_err(|_| anyhow!("--t-grid entry \"{v}\" is not a number")))
                        .collect::<Result<_>>()?;
                    json!(ts)
                }
                None => json!([0.25, 0.5, 1.0]),
            };
            if let Some(m) = &args.method {
                cfg["method"] = json!(m);
            }
            cfg["grid"] = match &args.grid {
                Some(s) => parse_grid_flag(s)?,
                None => json!({"lo": [-4.0], "hi": [4.0], "n_per_axis": 512}),
            };
            cfg["function"] = match &args.g {
                Some(s) => parse_function_flag(s)?,
                None => json!({"family": "convex_power", "b": 1.0}),
            };
        }
        Command::Hyper(args) => {
            cfg["p"] = json!(args.p.unwrap_or(2.0));
            cfg["alpha"] = json!(args.alpha.unwrap_or(1.0));
            cfg["beta"] = json!(args.beta.unwrap_or(2.0));
            cfg["t"] = json!(args.t.unwrap_or(1.0));
            let (cone, weight) = match &args.weight {
                Some(s) => parse_weight_flag(s)?,
                None => (json!({"kind": "full_space", "n": 1}), json!({"kind": "constant", "c": 1.0})),
            };
            cfg["cone"] = cone;
            cfg["weight"] = weight;
            cfg["grid"] = match &args.grid {
                Some(s) => parse_grid_flag(s)?,
                None => json!({"lo": [-14.0], "hi": [14.0], "n_per_axis": 2048}),
            };
            cfg["function"] = match &args.g {
                Some(s) => parse_function_flag(s)?,
                None => json!({"family": "hyper_extremal"}),
            };
        }
        Command::Transport(args) => {
            cfg["p"] = json!(args.p.unwrap_or(2.0));
            let (cone, weight) = match &args.weight {
                Some(s) => parse_weight_flag(s)?,
                None => (json!({"kind": "full_space", "n": 1}), json!({"kind": "constant", "c": 1.0})),
            };
            cfg["cone"] = cone;
            cfg["weight"] = weight;
            cfg["function"] = match &args.src {
                Some(s) => parse_function_flag(s)?,
                None => json!({"family": "gaussian_extremal", "lambda": 1.0}),
            };
            if let Some(n) = args.n_cells {
                cfg["n_cells"] = json!(n);
            }
        }
        Command::Suite(_) => unreachable!(),
    }
    Ok(cfg)
}

fn run_suite(cli: &Cli, dir: &Path) -> Result<bool> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading suite directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no configs found in {}", dir.display());
    }
    let mut all_pass = true;
    let mut rows = Vec::new();
    for path in &paths {
        let text = fs::read_to_string(path)?;
        let (mut cfg, echo) = ExperimentConfig::from_json(&text)
            .with_context(|| format!("config {}", path.display()))?;
        if cfg.name.is_none() {
            cfg.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        }
        let report = execute(cli, &cfg, echo)
            .with_context(|| format!("running {}", path.display()))?;
        let metric = report
            .checks
            .first()
            .map(|c| format!("{} = {:.6e}", c.name, c.value))
            .unwrap_or_default();
        all_pass &= report.pass;
        rows.push((report.name.clone(), metric, report.pass));
    }
    println!("\nsuite summary ({} configs):", rows.len());
    for (name, metric, pass) in &rows {
        println!("  {:<28} {:<40} {}", name, metric, if *pass { "PASS" } else { "FAIL" });
    }
    Ok(all_pass)
}
