//! Weighted hypercontractivity of the Hopf-Lax flow: both sides of the
//! norm-interpolation estimate for `e^g -> e^{Q_t g}`, the exponent path
//! `q(t)`, the `F(t)` trace along it, and the log-derivative bound that the
//! estimate integrates.

use std::sync::Arc;

use serde::Serialize;

use crate::constants::{conjugate, sharp_constant};
use crate::error::CoreError;
use crate::hopflax::{inf_convolve, membership_f_t0, GridField, HlMethod, Membership};
use crate::quadrature::{ConeMass, GridRule};
use crate::special::{gamma, gl_composite};
use crate::testfn::TestFunction;
use crate::weight::Weight;
use crate::Result;

/// One hypercontractivity experiment. The test function's tail certificate is
/// read as a bound on `e^g` (the quantity actually integrated).
#[derive(Debug, Clone)]
pub struct HyperConfig {
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
    pub t_tilde: f64,
    pub weight: Weight,
    pub g: TestFunction,
    pub grid: GridRule,
    pub method: HlMethod,
    pub trace_points: usize,
    pub eps_ratio: f64,
}

impl HyperConfig {
    pub fn new(
        p: f64,
        alpha: f64,
        beta: f64,
        t_tilde: f64,
        weight: Weight,
        g: TestFunction,
        grid: GridRule,
    ) -> Result<Self> {
        if !(p > 1.0) {
            return Err(CoreError::OutOfRange(format!("need p > 1, got {p}")));
        }
        if !(alpha > 0.0) || !(alpha <= beta) {
            return Err(CoreError::OutOfRange(format!(
                "need 0 < alpha <= beta, got alpha = {alpha}, beta = {beta}"
            )));
        }
        if !(t_tilde > 0.0) {
            return Err(CoreError::OutOfRange(format!("need t_tilde > 0, got {t_tilde}")));
        }
        let method = if (conjugate(p) - 2.0).abs() < 1e-12 {
            HlMethod::FastP2
        } else {
            HlMethod::Pruned
        };
        Ok(HyperConfig {
            p,
            alpha,
            beta,
            t_tilde,
            weight,
            g,
            grid,
            method,
            trace_points: 5,
            eps_ratio: 1e-3,
        })
    }
}

/// One point of the `F(t)` trace.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FTracePoint {
    pub t: f64,
    pub q: f64,
    pub f: f64,
}

/// Both sides of the estimate, their ratio, and the trace.
#[derive(Debug, Clone, Serialize)]
pub struct HyperReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub f_trace: Vec<FTracePoint>,
    pub pass: bool,
    pub max_boundary_argmin_ratio: f64,
}

/// The exponent path `q(t) = alpha beta / ((alpha - beta) t / ttilde + beta)`,
/// increasing from `q(0) = alpha` to `q(ttilde) = beta`.
pub fn q_path(alpha: f64, beta: f64, t_tilde: f64, t: f64) -> Result<f64> {
    if !(alpha > 0.0) || !(alpha <= beta) || !(t_tilde > 0.0) {
        return Err(CoreError::OutOfRange(format!(
            "need 0 < alpha <= beta and t_tilde > 0, got ({alpha}, {beta}, {t_tilde})"
        )));
    }
    if !(0.0..=t_tilde).contains(&t) {
        return Err(CoreError::OutOfRange(format!("t = {t} outside [0, {t_tilde}]")));
    }
    Ok(alpha * beta / ((alpha - beta) * t / t_tilde + beta))
}

fn dq_dt(alpha: f64, beta: f64, t_tilde: f64, q: f64) -> f64 {
    (beta - alpha) / (alpha * beta * t_tilde) * q * q
}

/// `(int e^{q f} w)^{1/q}` over the grid, with a truncation sanity check:
/// the ring of nodes along truncating faces must carry a negligible share
/// of the integral (faces coinciding with the cone boundary do not count --
/// the weight genuinely vanishes there).
fn exp_norm_field(field: &GridField, q: f64, w: &Weight) -> Result<f64> {
    let rule = field.rule();
    let n = rule.n_per_axis();
    let faces = rule.truncating_faces(w.cone());
    let mut total = 0.0;
    let mut ring = 0.0;
    let mut bad: Option<Vec<f64>> = None;
    rule.for_each_active(|flat, x| {
        let v = field.values()[flat];
        if !v.is_finite() {
            bad = Some(x.to_vec());
            return;
        }
        let term = (q * v).exp() * w.value(x);
        total += term;
        let idx = rule.multi_index(flat);
        if idx
            .iter()
            .enumerate()
            .any(|(d, &i)| (i == 0 && faces[d][0]) || (i == n - 1 && faces[d][1]))
        {
            ring += term;
        }
    });
    if let Some(x) = bad {
        return Err(CoreError::NonFiniteSample(x));
    }
    let total = total * rule.cell_volume();
    let ring = ring * rule.cell_volume();
    if !(total > 0.0) || !total.is_finite() {
        return Err(CoreError::NonIntegrable(format!("integral = {total}")));
    }
    if ring > 1e-3 * total {
        return Err(CoreError::NonIntegrable(format!(
            "outermost ring carries {:.2e} of the integral; enlarge the box",
            ring / total
        )));
    }
    Ok(total.powf(1.0 / q))
}

fn exp_norm_fn(g: &TestFunction, q: f64, w: &Weight, rule: &GridRule) -> Result<f64> {
    let field = GridField::sample(Arc::new(rule.clone()), g, 0.0);
    exp_norm_field(&field, q, w)
}

/// Full right side of the hypercontractivity estimate. For `alpha = beta`
/// every exponent vanishes and the right side is just `||e^g||_alpha`.
pub fn hyper_rhs(cfg: &HyperConfig) -> Result<f64> {
    let norm_g = exp_norm_fn(&cfg.g, cfg.alpha, &cfg.weight, &cfg.grid)?;
    if cfg.alpha == cfg.beta {
        return Ok(norm_g);
    }
    let (alpha, beta, p) = (cfg.alpha, cfg.beta, cfg.p);
    let pp = conjugate(p);
    let n_tau = cfg.weight.cone().dim() as f64 + cfg.weight.degree();
    let mass = ConeMass::compute(&cfg.weight)?;
    let f1 = ((beta - alpha) / cfg.t_tilde).powf(n_tau / p * (beta - alpha) / (alpha * beta));
    let f2 = alpha.powf(n_tau / (alpha * beta) * (alpha / p + beta / pp))
        / beta.powf(n_tau / (alpha * beta) * (beta / p + alpha / pp));
    let f3 = (pp.powf(n_tau / pp) * gamma(n_tau / pp + 1.0) * mass.ball_mass)
        .powf((alpha - beta) / (alpha * beta));
    Ok(norm_g * f1 * f2 * f3)
}

/// Run the whole estimate: admissibility probe, `Q_{ttilde} g`, both norms,
/// and the `F(t)` trace at interior times.
pub fn hyper_check(cfg: &HyperConfig) -> Result<HyperReport> {
    let cone = cfg.weight.cone().clone();
    // admissibility probe on a coarse companion grid
    let center: Vec<f64> = cfg
        .grid
        .lo()
        .iter()
        .zip(cfg.grid.hi())
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    let radius = cfg
        .grid
        .lo()
        .iter()
        .zip(cfg.grid.hi())
        .map(|(a, b)| 0.25 * (b - a))
        .fold(f64::INFINITY, f64::min);
    match membership_f_t0(&cfg.g, cfg.p, cfg.t_tilde, &center, &cone, radius, 33)? {
        Membership::Member => {}
        Membership::Indeterminate => return Err(CoreError::MembershipIndeterminate),
        Membership::NotMember => {
            return Err(CoreError::InvalidInput(
                "g is not in the admissible class for this t".into(),
            ))
        }
    }

    let rule = Arc::new(cfg.grid.clone());
    let g_field = GridField::sample(rule.clone(), &cfg.g, 0.0);
    let mut max_boundary = 0.0f64;

    let rhs = hyper_rhs(cfg)?;
    let norm_g = exp_norm_field(&g_field, cfg.alpha, &cfg.weight)?;

    let mut f_trace = Vec::with_capacity(cfg.trace_points + 2);
    f_trace.push(FTracePoint { t: 0.0, q: cfg.alpha, f: norm_g });
    for k in 1..=cfg.trace_points {
        let t = cfg.t_tilde * k as f64 / (cfg.trace_points + 1) as f64;
        let q = q_path(cfg.alpha, cfg.beta, cfg.t_tilde, t)?;
        let conv = inf_convolve(&g_field, t, cfg.p, &cone, cfg.method)?;
        max_boundary = max_boundary.max(conv.boundary_argmin_ratio);
        let f = exp_norm_field(&conv.field, q, &cfg.weight)?;
        f_trace.push(FTracePoint { t, q, f });
    }
    let conv = inf_convolve(&g_field, cfg.t_tilde, cfg.p, &cone, cfg.method)?;
    max_boundary = max_boundary.max(conv.boundary_argmin_ratio);
    let lhs = exp_norm_field(&conv.field, cfg.beta, &cfg.weight)?;
    f_trace.push(FTracePoint { t: cfg.t_tilde, q: cfg.beta, f: lhs });

    let ratio = lhs / rhs;
    Ok(HyperReport {
        lhs,
        rhs,
        ratio,
        f_trace,
        pass: ratio <= 1.0 + cfg.eps_ratio,
        max_boundary_argmin_ratio: max_boundary,
    })
}

/// Finite-difference `(log F)'(t)` against the closed-form bound
/// `(n+tau)/p (q'/q^2) log(L/(e p^p) (n+tau) q' q^{p-2})`.
/// Returns `(lhs, bound)`; errors with `StepTooCoarse` when FD noise
/// swamps a negative-looking gap.
pub fn log_derivative_bound(cfg: &HyperConfig, t: f64, dt: f64) -> Result<(f64, f64)> {
    if !(t - dt > 0.0) || !(t + dt < cfg.t_tilde) {
        return Err(CoreError::OutOfRange(format!(
            "need [t-dt, t+dt] inside (0, {}), got t = {t}, dt = {dt}",
            cfg.t_tilde
        )));
    }
    let cone = cfg.weight.cone().clone();
    let rule = Arc::new(cfg.grid.clone());
    let g_field = GridField::sample(rule, &cfg.g, 0.0);
    let mut log_f = [0.0f64; 3];
    for (i, tt) in [t - dt, t, t + dt].into_iter().enumerate() {
        let q = q_path(cfg.alpha, cfg.beta, cfg.t_tilde, tt)?;
        let conv = inf_convolve(&g_field, tt, cfg.p, &cone, cfg.method)?;
        log_f[i] = exp_norm_field(&conv.field, q, &cfg.weight)?.ln();
    }
    let lhs = (log_f[2] - log_f[0]) / (2.0 * dt);
    let noise = (log_f[2] - 2.0 * log_f[1] + log_f[0]).abs() / (2.0 * dt) * 3.0 + 1e-10;
    let q = q_path(cfg.alpha, cfg.beta, cfg.t_tilde, t)?;
    let qp = dq_dt(cfg.alpha, cfg.beta, cfg.t_tilde, q);
    let n_tau = cfg.weight.cone().dim() as f64 + cfg.weight.degree();
    let l = sharp_constant(cfg.p, &cfg.weight)?.value;
    let bound = n_tau / cfg.p * qp / (q * q)
        * (l / (std::f64::consts::E * cfg.p.powf(cfg.p)) * n_tau * qp * q.powf(cfg.p - 2.0)).ln();
    let gap = bound - lhs;
    if gap < 0.0 && gap.abs() <= noise {
        return Err(CoreError::StepTooCoarse { noise, gap });
    }
    Ok((lhs, bound))
}

/// `int_0^{ttilde}` of the log-derivative bound; by construction this equals
/// `log(rhs / ||e^g||_alpha)` of the assembled estimate.
pub fn bound_integral(cfg: &HyperConfig) -> Result<f64> {
    let n_tau = cfg.weight.cone().dim() as f64 + cfg.weight.degree();
    let l = sharp_constant(cfg.p, &cfg.weight)?.value;
    let (alpha, beta, t_tilde, p) = (cfg.alpha, cfg.beta, cfg.t_tilde, cfg.p);
    if alpha == beta {
        return Ok(0.0);
    }
    Ok(gl_composite(
        |t| {
            let q = alpha * beta / ((alpha - beta) * t / t_tilde + beta);
            let qp = (beta - alpha) / (alpha * beta * t_tilde) * q * q;
            n_tau / p
                * qp
                / (q * q)
                * (l / (std::f64::consts::E * p.powf(p)) * n_tau * qp * q.powf(p - 2.0)).ln()
        },
        0.0,
        t_tilde,
        32,
        64,
    ))
}
