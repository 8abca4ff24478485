//! Hopf-Lax inf-convolution on grids:
//! `(Q_t g)(x) = inf_y { g(y) + |y - x|^{p'} / (p' t^{p'-1}) }`,
//! with a naive scan, a pruned window scan, and (for the quadratic cost) the
//! per-axis lower-envelope transform. All three report the argmin so runs can
//! flag minimizers that touch the truncation boundary instead of silently
//! trusting them.

use std::sync::Arc;

use serde::Serialize;

use crate::cone::Cone;
use crate::constants::conjugate;
use crate::error::CoreError;
use crate::quadrature::GridRule;
use crate::testfn::TestFunction;
use crate::Result;

/// A scalar field sampled on a grid rule, labelled with its time.
#[derive(Debug, Clone)]
pub struct GridField {
    rule: Arc<GridRule>,
    values: Vec<f64>,
    time: f64,
}

impl GridField {
    /// Sample a function at the active nodes; inactive nodes hold +inf.
    pub fn sample(rule: Arc<GridRule>, f: &TestFunction, time: f64) -> Self {
        let mut values = vec![f64::INFINITY; rule.len()];
        rule.for_each_active(|flat, x| {
            values[flat] = f.eval(x);
        });
        GridField { rule, values, time }
    }

    pub fn from_fn(rule: Arc<GridRule>, f: impl Fn(&[f64]) -> f64, time: f64) -> Self {
        let mut values = vec![f64::INFINITY; rule.len()];
        rule.for_each_active(|flat, x| {
            values[flat] = f(x);
        });
        GridField { rule, values, time }
    }

    pub fn rule(&self) -> &Arc<GridRule> {
        &self.rule
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Negate the active values, keeping inactive nodes at +inf.
    pub fn negated(&self) -> GridField {
        let mut values = self.values.clone();
        for (flat, v) in values.iter_mut().enumerate() {
            if self.rule.is_active(flat) {
                *v = -*v;
            }
        }
        GridField { rule: self.rule.clone(), values, time: self.time }
    }

    fn finite_range(&self) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (flat, &v) in self.values.iter().enumerate() {
            if self.rule.is_active(flat) && v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if lo <= hi {
            Some((lo, hi))
        } else {
            None
        }
    }
}

/// Inf-convolution strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HlMethod {
    /// Full O(N^2) scan over source nodes.
    Naive,
    /// Scan restricted to `|y - x| <= rho(t)`, the minimizer radius certified
    /// by the spread of g.
    Pruned,
    /// Per-axis lower-envelope (parabola) transform; quadratic cost only.
    FastP2,
}

/// Result of one inf-convolution: the field, per-node argmin, and the
/// fraction of argmins sitting on the truncation boundary.
#[derive(Debug, Clone)]
pub struct InfConvolution {
    pub field: GridField,
    pub argmin: Vec<usize>,
    pub argmin_on_boundary: Vec<bool>,
    pub boundary_argmin_ratio: f64,
}

#[inline]
fn hl_cost(dist2: f64, p_prime: f64, t_scale: f64) -> f64 {
    if p_prime == 2.0 {
        dist2 * t_scale
    } else {
        dist2.sqrt().powf(p_prime) * t_scale
    }
}

fn axis_coords(rule: &GridRule) -> Vec<Vec<f64>> {
    (0..rule.dim())
        .map(|d| {
            (0..rule.n_per_axis())
                .map(|i| rule.lo()[d] + (i as f64 + 0.5) * rule.spacing()[d])
                .collect()
        })
        .collect()
}

fn dist2_between(a: &[usize], b: &[usize], coords: &[Vec<f64>]) -> f64 {
    let mut acc = 0.0;
    for d in 0..a.len() {
        let diff = coords[d][a[d]] - coords[d][b[d]];
        acc += diff * diff;
    }
    acc
}

fn on_truncating_face(idx: &[usize], n: usize, faces: &[[bool; 2]]) -> bool {
    idx.iter()
        .enumerate()
        .any(|(d, &i)| (i == 0 && faces[d][0]) || (i == n - 1 && faces[d][1]))
}

/// `(Q_t g)(x_i) = min_j g(y_j) + |y_j - x_i|^{p'} / (p' t^{p'-1})` over the
/// grid nodes. `t = 0` short-circuits to `g` itself.
pub fn inf_convolve(g: &GridField, t: f64, p: f64, cone: &Cone, method: HlMethod) -> Result<InfConvolution> {
    if !(p > 1.0) {
        return Err(CoreError::OutOfRange(format!("need p > 1, got {p}")));
    }
    if t < 0.0 {
        return Err(CoreError::OutOfRange(format!("need t >= 0, got {t}")));
    }
    let rule = g.rule.clone();
    if t == 0.0 {
        let n = rule.len();
        return Ok(InfConvolution {
            field: GridField { rule, values: g.values.clone(), time: 0.0 },
            argmin: (0..n).collect(),
            argmin_on_boundary: vec![false; n],
            boundary_argmin_ratio: 0.0,
        });
    }
    let p_prime = conjugate(p);
    let t_scale = 1.0 / (p_prime * t.powf(p_prime - 1.0));
    g.finite_range().ok_or(CoreError::EmptyDomain)?;

    let argmin = match method {
        HlMethod::Naive => scan_min(g, p_prime, t_scale, None)?,
        HlMethod::Pruned => {
            let (lo, hi) = g.finite_range().unwrap();
            let rho = (p_prime * t.powf(p_prime - 1.0) * (hi - lo)).powf(1.0 / p_prime);
            let windows: Vec<usize> = rule
                .spacing()
                .iter()
                .map(|h| (rho / h).ceil() as usize)
                .collect();
            scan_min(g, p_prime, t_scale, Some(&windows))?
        }
        HlMethod::FastP2 => {
            if (p_prime - 2.0).abs() > 1e-12 {
                return Err(CoreError::MethodCostMismatch(p_prime));
            }
            envelope_min(g, t_scale)?
        }
    };

    // evaluate every target through the same cost expression
    let coords = axis_coords(&rule);
    let faces = rule.truncating_faces(cone);
    let n = rule.n_per_axis();
    let mut values = vec![f64::INFINITY; rule.len()];
    let mut on_boundary = vec![false; rule.len()];
    let mut boundary_hits = 0usize;
    let mut active_targets = 0usize;
    for flat in 0..rule.len() {
        let j = argmin[flat];
        if j == usize::MAX {
            continue;
        }
        let xi = rule.multi_index(flat);
        let yj = rule.multi_index(j);
        values[flat] = g.values[j] + hl_cost(dist2_between(&xi, &yj, &coords), p_prime, t_scale);
        if rule.is_active(flat) {
            active_targets += 1;
            if on_truncating_face(&yj, n, &faces) {
                on_boundary[flat] = true;
                boundary_hits += 1;
            }
        }
    }
    let ratio = if active_targets > 0 {
        boundary_hits as f64 / active_targets as f64
    } else {
        0.0
    };
    Ok(InfConvolution {
        field: GridField { rule, values, time: t },
        argmin,
        argmin_on_boundary: on_boundary,
        boundary_argmin_ratio: ratio,
    })
}

/// Direct scan, optionally restricted to a per-axis index window.
fn scan_min(
    g: &GridField,
    p_prime: f64,
    t_scale: f64,
    windows: Option<&[usize]>,
) -> Result<Vec<usize>> {
    let rule = &g.rule;
    let dim = rule.dim();
    let n = rule.n_per_axis();
    let coords = axis_coords(rule);
    let sources: Vec<usize> = (0..rule.len())
        .filter(|&f| rule.is_active(f) && g.values[f].is_finite())
        .collect();
    let mut argmin = vec![usize::MAX; rule.len()];
    let mut src_idx = vec![0usize; dim];
    for flat in 0..rule.len() {
        let xi = rule.multi_index(flat);
        let mut best = f64::INFINITY;
        let mut best_j = usize::MAX;
        match windows {
            None => {
                for &j in &sources {
                    let mut rem = j;
                    for d in (0..dim).rev() {
                        src_idx[d] = rem % n;
                        rem /= n;
                    }
                    let val = g.values[j]
                        + hl_cost(dist2_between(&xi, &src_idx, &coords), p_prime, t_scale);
                    if val < best {
                        best = val;
                        best_j = j;
                    }
                }
            }
            Some(win) => {
                // odometer scan of the index box around xi
                let lo: Vec<usize> = (0..dim).map(|d| xi[d].saturating_sub(win[d])).collect();
                let hi: Vec<usize> = (0..dim).map(|d| (xi[d] + win[d]).min(n - 1)).collect();
                let mut idx = lo.clone();
                loop {
                    let j = rule.flat_index(&idx);
                    if rule.is_active(j) && g.values[j].is_finite() {
                        let val = g.values[j]
                            + hl_cost(dist2_between(&xi, &idx, &coords), p_prime, t_scale);
                        if val < best {
                            best = val;
                            best_j = j;
                        }
                    }
                    let mut advanced = false;
                    let mut d = dim;
                    while d > 0 {
                        d -= 1;
                        if idx[d] < hi[d] {
                            idx[d] += 1;
                            idx[(d + 1)..dim].copy_from_slice(&lo[(d + 1)..dim]);
                            advanced = true;
                            break;
                        }
                    }
                    if !advanced {
                        break;
                    }
                }
            }
        }
        argmin[flat] = best_j;
    }
    Ok(argmin)
}

/// Felzenszwalb-Huttenlocher lower envelope of parabolas along one axis.
/// `f` holds the row values (+inf allowed); `s` is the parabola scale in
/// index units. Writes the per-position argmin into `arg`.
fn envelope_row(f: &[f64], s: f64, out: &mut [f64], arg: &mut [usize]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    let mut started = false;
    for q in 0..n {
        if !f[q].is_finite() {
            continue;
        }
        if !started {
            v[0] = q;
            z[0] = f64::NEG_INFINITY;
            z[1] = f64::INFINITY;
            started = true;
            continue;
        }
        let mut s_q;
        loop {
            let p = v[k];
            s_q = ((f[q] + s * (q * q) as f64) - (f[p] + s * (p * p) as f64))
                / (2.0 * s * (q as f64 - p as f64));
            if s_q <= z[k] && k > 0 {
                k -= 1;
            } else {
                break;
            }
        }
        if s_q <= z[k] {
            // replaces the only parabola
            v[k] = q;
            z[k] = f64::NEG_INFINITY;
            z[k + 1] = f64::INFINITY;
        } else {
            k += 1;
            v[k] = q;
            z[k] = s_q;
            z[k + 1] = f64::INFINITY;
        }
    }
    if !started {
        for q in 0..n {
            out[q] = f64::INFINITY;
            arg[q] = usize::MAX;
        }
        return;
    }
    let mut k = 0usize;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let j = v[k];
        out[q] = f[j] + s * ((q as f64 - j as f64) * (q as f64 - j as f64));
        arg[q] = j;
    }
}

/// Separable quadratic-cost transform: one envelope pass per axis (last axis
/// first), then argmin backtracking through the passes.
fn envelope_min(g: &GridField, t_scale: f64) -> Result<Vec<usize>> {
    let rule = &g.rule;
    let dim = rule.dim();
    let n = rule.n_per_axis();
    let total = rule.len();
    let mut current = g.values.clone();
    // mask inactive sources
    for flat in 0..total {
        if !rule.is_active(flat) {
            current[flat] = f64::INFINITY;
        }
    }
    let mut args: Vec<Vec<usize>> = Vec::with_capacity(dim);
    let mut row = vec![0.0f64; n];
    let mut row_out = vec![0.0f64; n];
    let mut row_arg = vec![0usize; n];
    for d in (0..dim).rev() {
        let stride = n.pow((dim - 1 - d) as u32);
        let mut arg_d = vec![usize::MAX; total];
        let mut next = vec![f64::INFINITY; total];
        let s = t_scale * rule.spacing()[d] * rule.spacing()[d];
        // iterate over all lines along axis d
        let outer = total / n;
        for line in 0..outer {
            // base offset of this line
            let block = line / stride;
            let within = line % stride;
            let base = block * stride * n + within;
            for i in 0..n {
                row[i] = current[base + i * stride];
            }
            envelope_row(&row, s, &mut row_out, &mut row_arg);
            for i in 0..n {
                next[base + i * stride] = row_out[i];
                arg_d[base + i * stride] = row_arg[i];
            }
        }
        current = next;
        args.push(arg_d);
    }
    // args[k] corresponds to axis dim-1-k; backtrack from the first-applied...
    // passes were applied d = dim-1 .. 0; backtracking goes d = 0 .. dim-1
    let mut argmin = vec![usize::MAX; total];
    for flat in 0..total {
        let mut idx = rule.multi_index(flat);
        let mut ok = true;
        for d in 0..dim {
            let pass = &args[dim - 1 - d];
            let j = pass[rule.flat_index(&idx)];
            if j == usize::MAX {
                ok = false;
                break;
            }
            idx[d] = j;
        }
        if ok {
            argmin[flat] = rule.flat_index(&idx);
        }
    }
    Ok(argmin)
}

// ---------------------------------------------------------------------------
// Runs, residuals, diagnostics
// ---------------------------------------------------------------------------

/// A time-sliced Hopf-Lax computation with its diagnostics.
#[derive(Debug, Clone)]
pub struct HopfLaxRun {
    pub p: f64,
    pub method: HlMethod,
    pub initial: GridField,
    pub times: Vec<f64>,
    pub slices: Vec<GridField>,
    pub boundary_argmin_ratios: Vec<f64>,
    /// Nodes where `Q_{t_{k+1}} > Q_{t_k}` beyond round-off, summed over slices.
    pub monotonicity_violations: usize,
}

pub fn run_hopf_lax(
    initial: &GridField,
    p: f64,
    times: &[f64],
    cone: &Cone,
    method: HlMethod,
) -> Result<HopfLaxRun> {
    if times.iter().any(|t| *t <= 0.0) {
        return Err(CoreError::OutOfRange("all times must be positive".into()));
    }
    if times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CoreError::OutOfRange("times must be strictly increasing".into()));
    }
    let mut slices = Vec::with_capacity(times.len());
    let mut ratios = Vec::with_capacity(times.len());
    let mut violations = 0usize;
    let rule = initial.rule().clone();
    let mut prev = initial.values().to_vec();
    for &t in times {
        let conv = inf_convolve(initial, t, p, cone, method)?;
        for flat in 0..rule.len() {
            if rule.is_active(flat) && conv.field.values[flat] > prev[flat] + 1e-12 {
                violations += 1;
            }
        }
        prev = conv.field.values.clone();
        ratios.push(conv.boundary_argmin_ratio);
        slices.push(conv.field);
    }
    Ok(HopfLaxRun {
        p,
        method,
        initial: initial.clone(),
        times: times.to_vec(),
        slices,
        boundary_argmin_ratios: ratios,
        monotonicity_violations: violations,
    })
}

/// Median and 90th percentile of the absolute Hamilton-Jacobi residual.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HjResidualSummary {
    pub median: f64,
    pub p90: f64,
    pub nodes: usize,
}

/// Residual `r = d/dt Q_t g + |grad Q_t g|^p / p` by central differences in
/// t and x, at interior times and interior nodes.
pub fn hj_residual(run: &HopfLaxRun) -> Result<(Vec<(f64, GridField)>, HjResidualSummary)> {
    let m = run.times.len();
    if m < 3 {
        return Err(CoreError::InsufficientSlices { needed: 3, got: m });
    }
    let dt = run.times[1] - run.times[0];
    for w in run.times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt {
            return Err(CoreError::OutOfRange("time grid must be uniform".into()));
        }
    }
    let rule = run.initial.rule().clone();
    let dim = rule.dim();
    let n = rule.n_per_axis();
    let mut fields = Vec::new();
    let mut abs_residuals = Vec::new();
    for k in 1..m - 1 {
        let qm = run.slices[k - 1].values();
        let q0 = run.slices[k].values();
        let qp = run.slices[k + 1].values();
        let mut res = vec![f64::NAN; rule.len()];
        for flat in 0..rule.len() {
            if !rule.is_active(flat) {
                continue;
            }
            let idx = rule.multi_index(flat);
            if idx.iter().any(|&i| i == 0 || i == n - 1) {
                continue;
            }
            // all spatial neighbors must be active
            let mut grad2 = 0.0;
            let mut usable = true;
            for d in 0..dim {
                let mut ip = idx.clone();
                ip[d] += 1;
                let mut im = idx.clone();
                im[d] -= 1;
                let fp = rule.flat_index(&ip);
                let fm = rule.flat_index(&im);
                if !rule.is_active(fp) || !rule.is_active(fm) {
                    usable = false;
                    break;
                }
                let gd = (q0[fp] - q0[fm]) / (2.0 * rule.spacing()[d]);
                grad2 += gd * gd;
            }
            if !usable {
                continue;
            }
            let dq_dt = (qp[flat] - qm[flat]) / (2.0 * dt);
            let r = dq_dt + grad2.powf(run.p / 2.0) / run.p;
            res[flat] = r;
            abs_residuals.push(r.abs());
        }
        fields.push((
            run.times[k],
            GridField { rule: rule.clone(), values: res, time: run.times[k] },
        ));
    }
    if abs_residuals.is_empty() {
        return Err(CoreError::EmptyDomain);
    }
    abs_residuals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = abs_residuals[abs_residuals.len() / 2];
    let p90 = abs_residuals[((abs_residuals.len() as f64 * 0.9) as usize).min(abs_residuals.len() - 1)];
    Ok((fields, HjResidualSummary { median, p90, nodes: abs_residuals.len() }))
}

/// Tri-state admissibility: is `g` bounded above with a finite inf-convolution
/// at the probe point?
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Member,
    NotMember,
    Indeterminate,
}

/// Probe `inf_y g(y) + |y - x0|^{p'}/(p' t0^{p'-1})` over boxes of radius
/// `radius`, `2 radius`, `4 radius`. A decreasing minimum trend or an
/// increasing maximum of g reads as "not in the class"; an argmin on the
/// largest truncation boundary stays indeterminate.
pub fn membership_f_t0(
    g: &TestFunction,
    p: f64,
    t0: f64,
    probe: &[f64],
    cone: &Cone,
    radius: f64,
    n_per_axis: usize,
) -> Result<Membership> {
    if !(t0 > 0.0) || !(radius > 0.0) {
        return Err(CoreError::OutOfRange("need t0 > 0 and radius > 0".into()));
    }
    let p_prime = conjugate(p);
    let t_scale = 1.0 / (p_prime * t0.powf(p_prime - 1.0));
    let mut mins = Vec::new();
    let mut gmaxes = Vec::new();
    let mut interior_last = false;
    for &scale in &[1.0, 2.0, 4.0] {
        let r = radius * scale;
        let lo: Vec<f64> = probe.iter().map(|c| c - r).collect();
        let hi: Vec<f64> = probe.iter().map(|c| c + r).collect();
        let rule = GridRule::new(cone, lo, hi, n_per_axis)?;
        let faces = rule.truncating_faces(cone);
        let n = rule.n_per_axis();
        let mut best = f64::INFINITY;
        let mut best_idx: Option<Vec<usize>> = None;
        let mut gmax = f64::NEG_INFINITY;
        let mut bad: Option<Vec<f64>> = None;
        rule.for_each_active(|flat, y| {
            let gv = g.eval(y);
            if !gv.is_finite() {
                bad = Some(y.to_vec());
                return;
            }
            gmax = gmax.max(gv);
            let d2: f64 = y.iter().zip(probe).map(|(a, b)| (a - b) * (a - b)).sum();
            let val = gv + hl_cost(d2, p_prime, t_scale);
            if val < best {
                best = val;
                best_idx = Some(rule.multi_index(flat));
            }
        });
        if let Some(y) = bad {
            return Err(CoreError::NonFiniteSample(y));
        }
        let idx = best_idx.ok_or(CoreError::EmptyDomain)?;
        interior_last = !on_truncating_face(&idx, n, &faces);
        mins.push(best);
        gmaxes.push(gmax);
    }
    let dec_tol = 1e-7 * (1.0 + mins[0].abs());
    if mins[1] < mins[0] - dec_tol && mins[2] < mins[1] - dec_tol {
        return Ok(Membership::NotMember);
    }
    let growth_tol = 1e-7 * (1.0 + gmaxes[0].abs());
    if gmaxes[1] > gmaxes[0] + growth_tol && gmaxes[2] > gmaxes[1] + growth_tol {
        return Ok(Membership::NotMember);
    }
    if interior_last {
        Ok(Membership::Member)
    } else {
        Ok(Membership::Indeterminate)
    }
}

/// Max deviation of `Q_t(-Q_t g)` from `-g` over nodes whose argmins (in both
/// legs) stayed off the truncation boundary. Zero for c-concave `-g`.
pub fn c_transform_involution(
    g: &TestFunction,
    t: f64,
    p: f64,
    cone: &Cone,
    rule: &GridRule,
    method: HlMethod,
) -> Result<f64> {
    let rule = Arc::new(rule.clone());
    let g0 = GridField::sample(rule.clone(), g, 0.0);
    let first = inf_convolve(&g0, t, p, cone, method)?;
    let second = inf_convolve(&first.field.negated(), t, p, cone, method)?;
    let mut worst = 0.0f64;
    let mut trusted = 0usize;
    for flat in 0..rule.len() {
        if !rule.is_active(flat) {
            continue;
        }
        if second.argmin_on_boundary[flat] {
            continue;
        }
        let j = second.argmin[flat];
        if j == usize::MAX || first.argmin_on_boundary[j] {
            continue;
        }
        trusted += 1;
        let dev = (second.field.values[flat] - (-g0.values[flat])).abs();
        worst = worst.max(dev);
    }
    if trusted == 0 {
        return Err(CoreError::EmptyDomain);
    }
    Ok(worst)
}

/// Pointwise gap `Q_t(-Q_t g) - (-g)` (min, max) over trusted nodes; the gap
/// is nonnegative for every g and zero exactly in the c-concave case.
pub fn c_transform_gap_range(
    g: &TestFunction,
    t: f64,
    p: f64,
    cone: &Cone,
    rule: &GridRule,
    method: HlMethod,
) -> Result<(f64, f64)> {
    let rule = Arc::new(rule.clone());
    let g0 = GridField::sample(rule.clone(), g, 0.0);
    let first = inf_convolve(&g0, t, p, cone, method)?;
    let second = inf_convolve(&first.field.negated(), t, p, cone, method)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for flat in 0..rule.len() {
        if !rule.is_active(flat) || second.argmin_on_boundary[flat] {
            continue;
        }
        let j = second.argmin[flat];
        if j == usize::MAX || first.argmin_on_boundary[j] {
            continue;
        }
        let gap = second.field.values[flat] - (-g0.values[flat]);
        lo = lo.min(gap);
        hi = hi.max(gap);
    }
    if lo > hi {
        return Err(CoreError::EmptyDomain);
    }
    Ok((lo, hi))
}

/// Closed form `Q_t((b/p')|.+x0|^{p'}) = b/(p'(1+t b^{p-1})^{p'-1}) |x+x0|^{p'}`.
pub fn convex_power_transform_coefficient(b: f64, t: f64, p: f64) -> f64 {
    let pp = conjugate(p);
    b / (pp * (1.0 + t * b.powf(p - 1.0)).powf(pp - 1.0)) * pp
}

/// Closed form `Q_t(-(b/p')|.+x0|^{p'}) = -b/(p'(1-t b^{p-1})^{p'-1}) |x+x0|^{p'}`,
/// valid for `t b^{p-1} < 1`.
pub fn concave_power_transform_coefficient(b: f64, t: f64, p: f64) -> Result<f64> {
    let pp = conjugate(p);
    let s = 1.0 - t * b.powf(p - 1.0);
    if s <= 0.0 {
        return Err(CoreError::OutOfRange(format!(
            "concave-power transform blows up: t b^(p-1) = {}",
            t * b.powf(p - 1.0)
        )));
    }
    Ok(b / (pp * s.powf(pp - 1.0)) * pp)
}
