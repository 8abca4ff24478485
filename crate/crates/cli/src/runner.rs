//! Experiment dispatch: one function per experiment kind, each producing a
//! structured report plus optional CSV series.

use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use conelab_core::constants::{proof_constants, sharp_constant};
use conelab_core::functionals::{deficit_1, deficit_p, lp_norm, EntropyRoute};
use conelab_core::hopflax::{hj_residual, run_hopf_lax, GridField, HlMethod};
use conelab_core::hyper::{hyper_check, HyperConfig};
use conelab_core::quadrature::ConeMass;
use conelab_core::transport::{apply_scaling_normalization, entropy_chain, Density1D};
use conelab_core::weight::check_log_concavity;
use conelab_core::Quadrature;

use crate::config::{ExperimentConfig, ExperimentKind};

/// One named check with its measured value and threshold.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, threshold: f64) -> Check {
        Check { name: name.into(), value, threshold, pass: value.is_finite() && value <= threshold }
    }

    fn at_least(name: &str, value: f64, threshold: f64) -> Check {
        Check { name: name.into(), value, threshold, pass: value.is_finite() && value >= threshold }
    }
}

/// The structured result of one experiment run.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub version: String,
    pub experiment: String,
    pub name: String,
    pub config: Value,
    pub values: Value,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub wall_time_ms: f64,
}

impl Report {
    /// Deterministic serialization: everything except the wall time, which
    /// is appended last so reports stay byte-comparable without it.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

fn finish(
    experiment: ExperimentKind,
    cfg_echo: Value,
    name: String,
    values: Value,
    checks: Vec<Check>,
    started: Instant,
) -> Report {
    let pass = checks.iter().all(|c| c.pass);
    Report {
        version: format!("conelab {}", env!("CARGO_PKG_VERSION")),
        experiment: experiment.as_str().into(),
        name,
        config: cfg_echo,
        values,
        checks,
        pass,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
    }
}

/// Execute one experiment config.
pub fn run(cfg: &ExperimentConfig, cfg_echo: Value, out_dir: Option<&Path>) -> Result<Report> {
    let started = Instant::now();
    let name = cfg.name.clone().unwrap_or_else(|| cfg.experiment.as_str().to_string());
    let seed = cfg.seed.unwrap_or(0);
    match cfg.experiment {
        ExperimentKind::Constants => {
            let p = cfg.require_p()?;
            let (_, w) = cfg.cone_and_weight()?;
            let s = sharp_constant(p, &w)?;
            let c = proof_constants(p, &w)?;
            let mass = ConeMass::compute(&w)?;
            let beta = w.cone().dim() as f64 + w.degree();
            let residual = (c.consistency(p, beta) - s.value).abs() / s.value;
            let values = json!({
                "L_p": s.value,
                "p_prime": s.p_prime,
                "n": s.n,
                "tau": s.tau,
                "M_B": mass.ball_mass,
                "w_SE": mass.sphere_mass,
                "C1": c.c1, "C2": c.c2, "C3": c.c3, "C4": c.c4,
            });
            let checks = vec![Check::at_most("constant_consistency_rel", residual, 1e-12)];
            Ok(finish(cfg.experiment, cfg_echo, name, values, checks, started))
        }
        ExperimentKind::Weightcheck => {
            let (_, w) = cfg.cone_and_weight()?;
            let samples = cfg.samples.unwrap_or(1000);
            let cert = check_log_concavity(&w, samples, seed)?;
            let values = serde_json::to_value(&cert)?;
            let ok = cert.all_ok();
            let checks = vec![Check {
                name: "certificate_all_ok".into(),
                value: if ok { 1.0 } else { 0.0 },
                threshold: 1.0,
                pass: ok,
            }];
            Ok(finish(cfg.experiment, cfg_echo, name, values, checks, started))
        }
        ExperimentKind::Deficit => {
            let p = cfg.require_p()?;
            let (cone, w) = cfg.cone_and_weight()?;
            let func = cfg
                .function
                .as_ref()
                .ok_or_else(|| anyhow!("config key \"function\" is required for deficit"))?;
            let q = cfg.quadrature(&cone)?;
            let mut u = func.build(p, &w)?;
            if func.family != "gaussian_extremal" {
                let norm = lp_norm(&u, p, &w, &q)?;
                if !norm.is_finite() || norm <= 0.0 {
                    bail!("function has zero norm under the given quadrature");
                }
                u = u.scaled_by(1.0 / norm);
            }
            let tol = cfg.tolerances();
            let rep = deficit_p(&u, p, &w, &q, &tol)?;
            let values = serde_json::to_value(&rep)?;
            let checks = vec![
                Check::at_least("deficit", rep.deficit, -tol.eps_quad),
                Check::at_most("normalization_err", (rep.normalization - 1.0).abs(), tol.eps_norm),
            ];
            Ok(finish(cfg.experiment, cfg_echo, name, values, checks, started))
        }
        ExperimentKind::Deficit1 => {
            let (cone, w) = cfg.cone_and_weight()?;
            let lambda = cfg
                .lambda
                .ok_or_else(|| anyhow!("config key \"lambda\" is required for deficit1"))?;
            let x0 = cfg.x0.clone().unwrap_or_else(|| vec![0.0; cone.dim()]);
            let tol = cfg.tolerances();
            let route = match cfg.entropy_route.as_deref() {
                Some("grid") => {
                    let spec = cfg
                        .grid
                        .as_ref()
                        .ok_or_else(|| anyhow!("config key \"grid\" is required for the grid entropy route"))?;
                    EntropyRoute::Grid(spec.build(&cone)?)
                }
                Some("closed_form") | None => EntropyRoute::ClosedForm,
                Some(other) => bail!("entropy_route \"{other}\" not recognized"),
            };
            let closed = matches!(route, EntropyRoute::ClosedForm);
            let rep = deficit_1(lambda, &x0, &w, route, &tol)?;
            let values = serde_json::to_value(&rep)?;
            let threshold = if closed { 1e-12 } else { tol.eps_quad };
            let checks = vec![Check::at_most("abs_deficit", rep.deficit.abs(), threshold)];
            Ok(finish(cfg.experiment, cfg_echo, name, values, checks, started))
        }
        ExperimentKind::Hopflax => {
            let p = cfg.require_p()?;
            let (cone, w) = cfg.cone_and_weight()?;
            let func = cfg
                .function
                .as_ref()
                .ok_or_else(|| anyhow!("config key \"function\" (initial g) is required for hopflax"))?;
            let grid_spec = cfg
                .grid
                .as_ref()
                .ok_or_else(|| anyhow!("config key \"grid\" is required for hopflax"))?;
            let times = cfg
                .t_grid
                .clone()
                .ok_or_else(|| anyhow!("config key \"t_grid\" is required for hopflax"))?;
            let method = parse_method(cfg.method.as_deref().unwrap_or("fast_p2"))?;
            let rule = Arc::new(grid_spec.build(&cone)?);
            let g = GridField::sample(rule.clone(), &func.build(p, &w)?, 0.0);
            let run = run_hopf_lax(&g, p, &times, &cone, method)?;

            if let Some(dir) = out_dir {
                for slice in &run.slices {
                    write_slice_csv(dir, &name, slice)?;
                }
            }
            let max_boundary =
                run.boundary_argmin_ratios.iter().cloned().fold(0.0f64, f64::max);
            let (residual_json, residual_checks) = if times.len() >= 3 {
                let (residual_fields, summary) = hj_residual(&run)?;
                if let Some(dir) = out_dir {
                    for (t, field) in &residual_fields {
                        write_residual_csv(dir, &name, *t, field)?;
                    }
                }
                (
                    json!({"median_abs": summary.median, "p90_abs": summary.p90, "nodes": summary.nodes}),
                    vec![Check::at_most("hj_residual_median", summary.median, 0.1)],
                )
            } else {
                (Value::Null, vec![])
            };
            let values = json!({
                "times": run.times,
                "boundary_argmin_ratios": run.boundary_argmin_ratios,
                "monotonicity_violations": run.monotonicity_violations,
                "hj_residual": residual_json,
            });
            let mut checks = vec![
                Check::at_most("monotonicity_violations", run.monotonicity_violations as f64, 0.0),
                Check::at_most("max_boundary_argmin_ratio", max_boundary, 0.5),
            ];
            checks.extend(residual_checks);
            Ok(finish(cfg.experiment, cfg_echo, name, values, checks, started))
        }
        ExperimentKind::Hyper => {
            let p = cfg.require_p()?;
            let (cone, w) = cfg.cone_and_weight()?;
            let alpha = cfg.alpha.ok_or_else(|| anyhow!("config key \"alpha\" is required for hyper"))?;
            let beta = cfg.beta.ok_or_else(|| anyhow!("config key \"beta\" is required for hyper"))?;
            let t = cfg.t.ok_or_else(|| anyhow!("config key \"t\" is required for hyper"))?;
            let func = cfg
                .function
                .as_ref()
                .ok_or_else(|| anyhow!("config key \"function\" (initial g) is required for hyper"))?;
            let grid_spec = cfg
                .grid
                .as_ref()
                .ok_or_else(|| anyhow!("config key \"grid\" is required for hyper"))?;
            let g = if func.family == "hyper_extremal" {
                conelab_core::constants::hyper_extremal_g(
                    p,
                    alpha,
                    beta,
                    t,
                    func.x0.clone().unwrap_or_else(|| vec![0.0; cone.dim()]),
                    func.offset.unwrap_or(0.0),
                )?
            } else {
                func.build(p, &w)?
            };
            let grid = grid_spec.build(&cone)?;
            let hyper_cfg = HyperConfig::new(p, alpha, beta, t, w, g, grid)?;
            let report = hyper_check(&hyper_cfg)?;
            if let Some(dir) = out_dir {
                let mut csv = String::from("t,q,f\n");
                for pt in &report.f_trace {
                    csv.push_str(&format!("{},{},{}\n", pt.t, pt.q, pt.f));
                }
                fs::write(dir.join(format!("{name}_f_trace.csv")), csv)?;
            }
            let values = serde_json::to_value(&report)?;
            let checks = vec![Check::at_most("ratio", report.ratio, 1.0 + hyper_cfg.eps_ratio)];
            Ok(finish(cfg.experiment, cfg_echo, name, values, checks, started))
        }
        ExperimentKind::Transport => {
            let p = cfg.require_p()?;
            let (_, w) = cfg.cone_and_weight()?;
            let func = cfg
                .function
                .as_ref()
                .ok_or_else(|| anyhow!("config key \"function\" (src family) is required for transport"))?;
            let grid = cfg.grid_1d()?;
            let q = Quadrature::Grid(conelab_core::GridRule::new(
                w.cone(),
                vec![grid.lo],
                vec![grid.hi],
                grid.n,
            )?);
            let mut u = func.build(p, &w)?;
            if func.family != "gaussian_extremal" {
                let norm = lp_norm(&u, p, &w, &q)?;
                u = u.scaled_by(1.0 / norm);
            }
            let u = apply_scaling_normalization(&u, p, &w, grid)?;
            let src = Density1D::from_test_function(&u, p, w.clone(), grid)?;
            let report = entropy_chain(&src, p, &w)?;
            let tol = cfg.tolerances();
            let values = serde_json::to_value(&report)?;
            let checks = vec![
                Check::at_least("jensen_gap", report.jensen_gap, -tol.eps_quad),
                Check::at_least("byparts_gap", report.byparts_gap, -tol.eps_quad),
                Check::at_most(
                    "entropy_below_bound",
                    report.i_entropy - report.final_bound,
                    tol.eps_quad,
                ),
                Check::at_most("ma_residual_median", report.ma_residual, 0.05),
                Check::at_most(
                    "routes_agree",
                    (report.final_bound - report.sharp_rhs).abs(),
                    1e-10,
                ),
            ];
            Ok(finish(cfg.experiment, cfg_echo, name, values, checks, started))
        }
    }
}

fn parse_method(s: &str) -> Result<HlMethod> {
    match s {
        "naive" => Ok(HlMethod::Naive),
        "pruned" => Ok(HlMethod::Pruned),
        "fast_p2" => Ok(HlMethod::FastP2),
        other => bail!("method \"{other}\" not recognized (naive | pruned | fast_p2)"),
    }
}

fn write_residual_csv(dir: &Path, name: &str, t: f64, field: &GridField) -> Result<()> {
    let rule = field.rule();
    let mut csv = String::from("x,r\n");
    rule.for_each_active(|flat, x| {
        let r = field.values()[flat];
        if r.is_finite() {
            for xi in x {
                csv.push_str(&format!("{xi},"));
            }
            csv.push_str(&format!("{r}\n"));
        }
    });
    let fname = format!("{name}_residual_t{t:.6}.csv");
    fs::write(dir.join(fname), csv).context("writing residual CSV")?;
    Ok(())
}

fn write_slice_csv(dir: &Path, name: &str, slice: &GridField) -> Result<()> {
    let rule = slice.rule();
    let mut csv = String::new();
    match rule.dim() {
        1 => csv.push_str("x,q\n"),
        2 => csv.push_str("x0,x1,q\n"),
        _ => csv.push_str("x0,x1,x2,q\n"),
    }
    rule.for_each_active(|flat, x| {
        for xi in x {
            csv.push_str(&format!("{xi},"));
        }
        csv.push_str(&format!("{}\n", slice.values()[flat]));
    });
    let fname = format!("{name}_slice_t{:.6}.csv", slice.time());
    fs::write(dir.join(fname), csv).context("writing slice CSV")?;
    Ok(())
}
