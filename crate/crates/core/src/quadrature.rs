//! Weighted integration over truncated cones.
//!
//! Degree-tau homogeneity factors every radial integrand into an angular mass
//! times a 1D integral against `r^{n+tau-1} dr`; the radial rule handles the
//! 1D part with geometrically graded Gauss-Legendre panels, and closed forms
//! (Gamma factorization of the angular integral) cover the built-in weights.
//! Tensor grids with cell-centered nodes handle everything non-radial.

use serde::Serialize;

use crate::cone::{Cone, ConeKind};
use crate::error::CoreError;
use crate::special::{gamma, gauss_legendre, gl_graded, gl_panel, graded_panels};
use crate::testfn::TailBound;
use crate::weight::{Weight, WeightKind};
use crate::Result;

const PI: f64 = std::f64::consts::PI;
/// Tail mass dropped by truncation.
pub const EPS_TAIL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Radial rule
// ---------------------------------------------------------------------------

/// Quadrature rule for `int_0^R f(r) r^{beta-1} dr` with `beta = n + tau`.
///
/// Geometrically graded panels toward the origin keep fractional powers of r
/// harmless; weights absorb the `r^{beta-1}` factor.
#[derive(Debug, Clone)]
pub struct RadialRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    beta: f64,
    order: usize,
    truncation: f64,
}

impl RadialRule {
    pub fn new(beta: f64, truncation: f64, order: usize) -> Result<Self> {
        if !(beta >= 1.0) {
            return Err(CoreError::OutOfRange(format!("beta = n + tau must be >= 1, got {beta}")));
        }
        if !(truncation > 0.0) || order < 2 {
            return Err(CoreError::OutOfRange("need truncation > 0 and order >= 2".into()));
        }
        let (gl_nodes, gl_weights) = gauss_legendre(order);
        // panel boundaries R*2^-55, ..., R/2, R plus a head panel at the origin
        let levels = 55;
        let mut bounds = Vec::with_capacity(levels + 2);
        bounds.push(0.0);
        for j in (0..=levels).rev() {
            bounds.push(truncation * (0.5f64).powi(j as i32));
        }
        let mut nodes = Vec::with_capacity((levels + 1) * order);
        let mut weights = Vec::with_capacity((levels + 1) * order);
        for pair in bounds.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let mid = 0.5 * (a + b);
            let half = 0.5 * (b - a);
            for (&x, &w) in gl_nodes.iter().zip(&gl_weights) {
                let r = mid + half * x;
                nodes.push(r);
                weights.push(w * half * r.powf(beta - 1.0));
            }
        }
        Ok(RadialRule { nodes, weights, beta, order, truncation })
    }

    /// Rule sized for a tail-certified integrand.
    pub fn for_tail(beta: f64, tail: &TailBound, order: usize) -> Result<Self> {
        let r = tail.truncation_radius(EPS_TAIL).max(1.0);
        Self::new(beta, r, order)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    /// `int_0^R f(r) r^{beta-1} dr`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> Result<f64> {
        let mut acc = 0.0;
        for (&r, &w) in self.nodes.iter().zip(&self.weights) {
            let v = f(r);
            if !v.is_finite() {
                return Err(CoreError::NonFiniteSample(vec![r]));
            }
            acc += w * v;
        }
        Ok(acc)
    }
}

// ---------------------------------------------------------------------------
// Tensor grid
// ---------------------------------------------------------------------------

/// Cell-centered tensor grid over `[lo, hi]^n` intersected with a cone.
///
/// Boundary cells are kept iff their center lies strictly inside the cone;
/// the node order (last axis fastest) is also the fixed summation order, so
/// integrals are bit-reproducible.
#[derive(Debug, Clone)]
pub struct GridRule {
    dim: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    n_per_axis: usize,
    spacing: Vec<f64>,
    mask: Vec<bool>,
    active_count: usize,
    cell_volume: f64,
}

impl GridRule {
    pub fn new(cone: &Cone, lo: Vec<f64>, hi: Vec<f64>, n_per_axis: usize) -> Result<Self> {
        let dim = cone.dim();
        if lo.len() != dim || hi.len() != dim {
            return Err(CoreError::InvalidInput("box dimension mismatch".into()));
        }
        if dim > 3 {
            return Err(CoreError::InvalidInput("grid rules support n <= 3 only".into()));
        }
        if n_per_axis < 2 {
            return Err(CoreError::InvalidInput("need at least 2 cells per axis".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(CoreError::InvalidInput("need lo < hi on every axis".into()));
        }
        let spacing: Vec<f64> = lo
            .iter()
            .zip(&hi)
            .map(|(a, b)| (b - a) / n_per_axis as f64)
            .collect();
        let cell_volume: f64 = spacing.iter().product();
        let total = n_per_axis.pow(dim as u32);
        let mut mask = vec![false; total];
        let mut active_count = 0;
        let mut x = vec![0.0; dim];
        for (flat, m) in mask.iter_mut().enumerate() {
            unflatten(flat, dim, n_per_axis, &lo, &spacing, &mut x);
            if cone.contains(&x) {
                *m = true;
                active_count += 1;
            }
        }
        if active_count == 0 {
            return Err(CoreError::EmptyDomain);
        }
        Ok(GridRule { dim, lo, hi, n_per_axis, spacing, mask, active_count, cell_volume })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn n_per_axis(&self) -> usize {
        self.n_per_axis
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }

    /// Lattice size `n_per_axis^dim` (including inactive nodes).
    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    pub fn active_count(&self) -> usize {
        self.active_count
    }

    /// True when every lattice node lies in the cone.
    pub fn is_complete(&self) -> bool {
        self.active_count == self.mask.len()
    }

    pub fn is_active(&self, flat: usize) -> bool {
        self.mask[flat]
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        unflatten(flat, self.dim, self.n_per_axis, &self.lo, &self.spacing, &mut x);
        x
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let mut idx = vec![0usize; self.dim];
        let mut rem = flat;
        for d in (0..self.dim).rev() {
            idx[d] = rem % self.n_per_axis;
            rem /= self.n_per_axis;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let mut flat = 0usize;
        for &i in idx {
            flat = flat * self.n_per_axis + i;
        }
        flat
    }

    /// Visit active nodes in the fixed axis-major order.
    pub fn for_each_active(&self, mut f: impl FnMut(usize, &[f64])) {
        let mut x = vec![0.0; self.dim];
        for flat in 0..self.mask.len() {
            if self.mask[flat] {
                unflatten(flat, self.dim, self.n_per_axis, &self.lo, &self.spacing, &mut x);
                f(flat, &x);
            }
        }
    }

    /// Which box faces cut into the cone (points just beyond them are still
    /// cone members): those are truncation boundaries, the others coincide
    /// with the genuine edge of the domain.
    pub fn truncating_faces(&self, cone: &Cone) -> Vec<[bool; 2]> {
        (0..self.dim)
            .map(|d| {
                let mut mid: Vec<f64> = self
                    .lo
                    .iter()
                    .zip(&self.hi)
                    .map(|(a, b)| 0.5 * (a + b))
                    .collect();
                mid[d] = self.lo[d] - 0.5 * self.spacing[d];
                let lo_cuts = cone.contains(&mid);
                mid[d] = self.hi[d] + 0.5 * self.spacing[d];
                let hi_cuts = cone.contains(&mid);
                [lo_cuts, hi_cuts]
            })
            .collect()
    }
}

fn unflatten(flat: usize, dim: usize, n: usize, lo: &[f64], spacing: &[f64], out: &mut [f64]) {
    let mut rem = flat;
    for d in (0..dim).rev() {
        let i = rem % n;
        rem /= n;
        out[d] = lo[d] + (i as f64 + 0.5) * spacing[d];
    }
}

/// `sum_k f(node_k) w(node_k) cellvol` over active nodes, axis-major order.
pub fn integrate_weighted(w: &Weight, f: impl Fn(&[f64]) -> f64, rule: &GridRule) -> Result<f64> {
    let mut acc = 0.0;
    let mut bad: Option<Vec<f64>> = None;
    rule.for_each_active(|_, x| {
        if bad.is_some() {
            return;
        }
        let fv = f(x);
        let wv = w.value(x);
        if !fv.is_finite() || !wv.is_finite() {
            bad = Some(x.to_vec());
            return;
        }
        acc += fv * wv;
    });
    if let Some(x) = bad {
        return Err(CoreError::NonFiniteSample(x));
    }
    Ok(acc * rule.cell_volume())
}

// ---------------------------------------------------------------------------
// Cone masses
// ---------------------------------------------------------------------------

/// How to compute the weighted ball mass.
#[derive(Debug, Clone, Copy)]
pub enum MassMethod {
    /// Gamma-factorized closed form (constant and monomial weights).
    RadialExact,
    /// Tensor-grid integration with `N` cells per axis.
    Grid(usize),
}

/// The two basic masses of a weighted cone: `M_B = int_{B cap E} w` and the
/// angular mass `w_SE = int_{S^{n-1} cap E} w dH^{n-1} = (n + tau) M_B`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConeMass {
    pub ball_mass: f64,
    pub sphere_mass: f64,
}

impl ConeMass {
    /// Closed form where available, otherwise direct angular quadrature
    /// (n <= 3), otherwise a grid fallback for the ball mass.
    pub fn compute(w: &Weight) -> Result<ConeMass> {
        let beta = w.cone().dim() as f64 + w.degree();
        if let Ok(s) = sphere_mass_closed_form(w) {
            return Ok(ConeMass { ball_mass: s / beta, sphere_mass: s });
        }
        if let Ok(s) = sphere_mass_direct(w) {
            return Ok(ConeMass { ball_mass: s / beta, sphere_mass: s });
        }
        let b = ball_mass_grid(w, 256)?;
        Ok(ConeMass { ball_mass: b, sphere_mass: beta * b })
    }
}

/// `M_B = int_{B cap E} w dx`.
pub fn ball_weight_mass(w: &Weight, method: MassMethod) -> Result<f64> {
    match method {
        MassMethod::RadialExact => {
            let beta = w.cone().dim() as f64 + w.degree();
            Ok(sphere_mass_closed_form(w)? / beta)
        }
        MassMethod::Grid(n) => ball_mass_grid(w, n),
    }
}

/// `w_SE = (n + tau) M_B`, using the best available ball-mass route.
pub fn sphere_weight_mass(w: &Weight) -> Result<f64> {
    Ok(ConeMass::compute(w)?.sphere_mass)
}

fn half_space_constraint_count(cone: &Cone) -> Option<u32> {
    match cone.kind() {
        ConeKind::FullSpace => Some(0),
        ConeKind::HalfSpace { .. } => Some(1),
        ConeKind::Orthant { active } => Some(active.iter().filter(|a| **a).count() as u32),
        ConeKind::Polyhedral { .. } => None,
    }
}

/// Gamma factorization of the angular integral for built-in weights.
pub fn sphere_mass_closed_form(w: &Weight) -> Result<f64> {
    let n = w.cone().dim();
    match w.kind() {
        WeightKind::Constant { c } => {
            if let Some(k) = half_space_constraint_count(w.cone()) {
                // |S^{n-1}| / 2^k
                Ok(c * 2.0 * PI.powf(n as f64 / 2.0) / gamma(n as f64 / 2.0) / 2f64.powi(k as i32))
            } else if n == 2 {
                // planar polyhedral sector: exact opening angle
                let sectors = angular_sectors(w.cone())?;
                let angle: f64 = sectors.iter().map(|(a, b)| b - a).sum();
                Ok(c * angle)
            } else {
                Err(CoreError::UnsupportedClosedForm(
                    "constant weight on a polyhedral cone with n > 2".into(),
                ))
            }
        }
        WeightKind::Monomial { exponents } => {
            let active = match w.cone().kind() {
                ConeKind::Orthant { active } => active.clone(),
                _ => {
                    return Err(CoreError::UnsupportedClosedForm(
                        "monomial closed form needs an orthant cone".into(),
                    ))
                }
            };
            for (i, &a) in exponents.iter().enumerate() {
                if a > 0.0 && !active[i] {
                    return Err(CoreError::UnsupportedClosedForm(
                        "monomial axis not constrained by the orthant".into(),
                    ));
                }
            }
            let tau: f64 = exponents.iter().sum();
            let beta = n as f64 + tau;
            let mut prod = 1.0;
            let mut free_axes = 0usize;
            for (i, &a) in exponents.iter().enumerate() {
                if active[i] {
                    prod *= 0.5 * gamma((a + 1.0) / 2.0);
                } else {
                    free_axes += 1;
                }
            }
            Ok(2.0 * prod * PI.powf(free_axes as f64 / 2.0) / gamma(beta / 2.0))
        }
        WeightKind::Custom { .. } => Err(CoreError::UnsupportedClosedForm(
            "custom weights have no closed-form angular mass".into(),
        )),
    }
}

/// Independent angular quadrature of `w_SE` for n <= 3; the cross-check route
/// against the Gamma closed form.
pub fn sphere_mass_direct(w: &Weight) -> Result<f64> {
    let cone = w.cone();
    match cone.dim() {
        1 => {
            let mut acc = 0.0;
            for s in [[1.0], [-1.0]] {
                if cone.contains(&s) {
                    acc += w.value(&s);
                }
            }
            Ok(acc)
        }
        2 => {
            let sectors = angular_sectors(cone)?;
            let mut acc = 0.0;
            for (a, b) in sectors {
                acc += gl_graded(|t: f64| w.value(&[t.cos(), t.sin()]), a, b, 32, 40);
            }
            Ok(acc)
        }
        3 => sphere_mass_direct_3d(w),
        d => Err(CoreError::UnsupportedClosedForm(format!(
            "direct angular quadrature supports n <= 3, got {d}"
        ))),
    }
}

/// Angular domain of a 2D cone as disjoint theta-intervals in [0, 2pi).
fn angular_sectors(cone: &Cone) -> Result<Vec<(f64, f64)>> {
    let full = vec![(0.0, 2.0 * PI)];
    let constraints: Vec<Vec<f64>> = match cone.kind() {
        ConeKind::FullSpace => return Ok(full),
        ConeKind::HalfSpace { normal } => vec![normal.clone()],
        ConeKind::Orthant { active } => {
            let mut v = Vec::new();
            if active[0] {
                v.push(vec![1.0, 0.0]);
            }
            if active[1] {
                v.push(vec![0.0, 1.0]);
            }
            if v.is_empty() {
                return Ok(full);
            }
            v
        }
        ConeKind::Polyhedral { inward_normals } => inward_normals.clone(),
    };
    let mut sectors = full;
    for nu in &constraints {
        let phi = nu[1].atan2(nu[0]);
        let lo = phi - PI / 2.0;
        let hi = phi + PI / 2.0;
        // split the constraint into non-wrapping pieces in [0, 2pi)
        let mut pieces = Vec::new();
        let (mut lo, mut hi) = (lo, hi);
        while lo < 0.0 {
            lo += 2.0 * PI;
            hi += 2.0 * PI;
        }
        if hi > 2.0 * PI {
            pieces.push((lo, 2.0 * PI));
            pieces.push((0.0, hi - 2.0 * PI));
        } else {
            pieces.push((lo, hi));
        }
        let mut next = Vec::new();
        for &(a, b) in &sectors {
            for &(c, d) in &pieces {
                let s = a.max(c);
                let e = b.min(d);
                if e > s + 1e-14 {
                    next.push((s, e));
                }
            }
        }
        sectors = next;
        if sectors.is_empty() {
            return Err(CoreError::EmptyDomain);
        }
    }
    Ok(sectors)
}

type SphereDomain3 = (f64, Vec<(f64, f64)>, Option<[Vec<f64>; 3]>);

fn sphere_mass_direct_3d(w: &Weight) -> Result<f64> {
    let cone = w.cone();
    // (theta, phi) box + optional phi sectors; polar axis is e3 unless rotated
    let (theta_hi, phi_sectors, frame): SphereDomain3 = match cone.kind() {
            ConeKind::FullSpace => (PI, vec![(0.0, 2.0 * PI)], None),
            ConeKind::HalfSpace { normal } => {
                let n = normal.clone();
                let nn = n.iter().map(|v| v * v).sum::<f64>().sqrt();
                let e3: Vec<f64> = n.iter().map(|v| v / nn).collect();
                // complete an orthonormal frame
                let pick = if e3[0].abs() < 0.9 { vec![1.0, 0.0, 0.0] } else { vec![0.0, 1.0, 0.0] };
                let d = e3[0] * pick[0] + e3[1] * pick[1] + e3[2] * pick[2];
                let mut e1: Vec<f64> = (0..3).map(|i| pick[i] - d * e3[i]).collect();
                let n1 = e1.iter().map(|v| v * v).sum::<f64>().sqrt();
                e1.iter_mut().for_each(|v| *v /= n1);
                let e2 = vec![
                    e3[1] * e1[2] - e3[2] * e1[1],
                    e3[2] * e1[0] - e3[0] * e1[2],
                    e3[0] * e1[1] - e3[1] * e1[0],
                ];
                (PI / 2.0, vec![(0.0, 2.0 * PI)], Some([e1, e2, e3]))
            }
            ConeKind::Orthant { active } => {
                let theta_hi = if active[2] { PI / 2.0 } else { PI };
                let plane = Cone::orthant(vec![active[0], active[1]])?;
                (theta_hi, angular_sectors(&plane)?, None)
            }
            ConeKind::Polyhedral { .. } => {
                return Err(CoreError::UnsupportedClosedForm(
                    "direct angular quadrature for 3D polyhedral cones".into(),
                ))
            }
        };

    let (nodes, weights) = gauss_legendre(32);
    let mut acc = 0.0;
    for (phi_lo, phi_hi) in &phi_sectors {
        for (t0, t1) in graded_panels(0.0, theta_hi, 30) {
            for (p0, p1) in graded_panels(*phi_lo, *phi_hi, 30) {
                let mut outer = |theta: f64| {
                    let st = theta.sin();
                    let ct = theta.cos();
                    let mut inner = |phi: f64| {
                        let local = [st * phi.cos(), st * phi.sin(), ct];
                        let x = match &frame {
                            None => local.to_vec(),
                            Some([e1, e2, e3]) => (0..3)
                                .map(|k| {
                                    local[0] * e1[k] + local[1] * e2[k] + local[2] * e3[k]
                                })
                                .collect(),
                        };
                        if cone.contains(&x) {
                            w.value(&x)
                        } else {
                            0.0
                        }
                    };
                    st * gl_panel(&mut inner, p0, p1, &nodes, &weights)
                };
                acc += gl_panel(&mut outer, t0, t1, &nodes, &weights);
            }
        }
    }
    Ok(acc)
}

/// Grid route for the ball mass: midpoint cells, with 8x-per-axis subdivision
/// of the cells straddling the unit sphere.
fn ball_mass_grid(w: &Weight, n_cells: usize) -> Result<f64> {
    let cone = w.cone();
    let dim = cone.dim();
    if dim > 3 {
        return Err(CoreError::InvalidInput("grid ball mass supports n <= 3".into()));
    }
    let h = 2.0 / n_cells as f64;
    let cell_vol = h.powi(dim as i32);
    let half_diag = 0.5 * h * (dim as f64).sqrt();
    let sub = 8usize;
    let hs = h / sub as f64;
    let sub_vol = hs.powi(dim as i32);
    let total_cells = n_cells.pow(dim as u32);
    let mut acc = 0.0;
    let mut x = vec![0.0; dim];
    for flat in 0..total_cells {
        let mut rem = flat;
        for d in (0..dim).rev() {
            let i = rem % n_cells;
            rem /= n_cells;
            x[d] = -1.0 + (i as f64 + 0.5) * h;
        }
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r >= 1.0 + half_diag {
            continue;
        }
        if r <= 1.0 - half_diag {
            if cone.contains(&x) {
                let v = w.value(&x);
                if !v.is_finite() {
                    return Err(CoreError::NonFiniteSample(x.clone()));
                }
                acc += v * cell_vol;
            } else if cone.boundary_distance(&x) > -half_diag {
                // near the cone boundary: subdivide as well
                acc += subdivide_cell(w, &x, h, sub, hs, sub_vol)?;
            }
            continue;
        }
        acc += subdivide_cell(w, &x, h, sub, hs, sub_vol)?;
    }
    Ok(acc)
}

fn subdivide_cell(w: &Weight, center: &[f64], h: f64, sub: usize, hs: f64, sub_vol: f64) -> Result<f64> {
    let dim = center.len();
    let total = sub.pow(dim as u32);
    let mut acc = 0.0;
    let mut y = vec![0.0; dim];
    for flat in 0..total {
        let mut rem = flat;
        for d in (0..dim).rev() {
            let i = rem % sub;
            rem /= sub;
            y[d] = center[d] - 0.5 * h + (i as f64 + 0.5) * hs;
        }
        let r2: f64 = y.iter().map(|v| v * v).sum();
        if r2 <= 1.0 && w.cone().contains(&y) {
            let v = w.value(&y);
            if !v.is_finite() {
                return Err(CoreError::NonFiniteSample(y.clone()));
            }
            acc += v * sub_vol;
        }
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Radial integration
// ---------------------------------------------------------------------------

/// `int_E f(|x|) w(x) dx = w_SE int_0^inf f(r) r^{n+tau-1} dr`, truncated
/// where the tail certificate says the integrand is below `EPS_TAIL`.
pub fn integrate_radial(
    w: &Weight,
    f: impl Fn(f64) -> f64,
    tail: Option<&TailBound>,
    order: usize,
) -> Result<f64> {
    let tail = tail.ok_or(CoreError::TailUnbounded)?;
    let beta = w.cone().dim() as f64 + w.degree();
    let sphere = sphere_weight_mass(w)?;
    let rule = RadialRule::for_tail(beta, tail, order)?;
    Ok(sphere * rule.integrate(f)?)
}

/// Generic quadrature selector passed to the functionals.
#[derive(Debug, Clone)]
pub enum Quadrature {
    /// Radial-angular factorization; valid when the integrand is radial.
    Radial { order: usize },
    /// Tensor-grid rule.
    Grid(GridRule),
}

impl Quadrature {
    pub fn radial() -> Self {
        Quadrature::Radial { order: 32 }
    }
}
