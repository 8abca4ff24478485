//! Homogeneous log-concave weights on a cone and the sampled validator for
//! the standing hypotheses: positivity, degree-tau homogeneity, the Euler
//! relation, log-concavity and tau-concavity.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::cone::{dot, Cone};
use crate::error::CoreError;
use crate::Result;

/// Sampling annulus for pair checks; homogeneity makes radius coverage
/// immaterial, the annulus keeps samples away from the apex.
pub const SAMPLE_R_LO: f64 = 0.1;
pub const SAMPLE_R_HI: f64 = 10.0;
/// Relative boundary margin for evaluation points.
pub const EPS_BD: f64 = 1e-6;

type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// The supported weight families.
#[derive(Clone)]
pub enum WeightKind {
    /// `w(x) = c` with `c > 0`; degree 0.
    Constant { c: f64 },
    /// `w(x) = x_1^{a_1} ... x_n^{a_n}` with `a_i >= 0`; degree = sum of exponents.
    Monomial { exponents: Vec<f64> },
    /// User-supplied value/gradient callbacks with a declared degree.
    Custom {
        value: ValueFn,
        gradient: GradFn,
        degree: f64,
        tolerance: f64,
    },
}

impl fmt::Debug for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightKind::Constant { c } => write!(f, "Constant {{ c: {c} }}"),
            WeightKind::Monomial { exponents } => write!(f, "Monomial {{ exponents: {exponents:?} }}"),
            WeightKind::Custom { degree, .. } => write!(f, "Custom {{ degree: {degree} }}"),
        }
    }
}

/// A homogeneous weight `w` on an open convex cone.
#[derive(Debug, Clone)]
pub struct Weight {
    cone: Cone,
    kind: WeightKind,
}

/// Outcome of the sampled hypothesis checks for a weight.
#[derive(Debug, Clone, Serialize)]
pub struct WeightCertificate {
    pub homogeneity_ok: bool,
    pub euler_ok: bool,
    pub log_concavity_ok: bool,
    pub tau_concavity_ok: bool,
    /// `grad w(x) . y >= 0` for all sampled pairs x, y in the cone.
    pub gradient_pairing_ok: bool,
    /// Largest clamped-positive violation seen across all checks.
    pub worst_violation: f64,
    pub samples_used: usize,
}

impl WeightCertificate {
    pub fn all_ok(&self) -> bool {
        self.homogeneity_ok
            && self.euler_ok
            && self.log_concavity_ok
            && self.tau_concavity_ok
            && self.gradient_pairing_ok
    }
}

impl Weight {
    pub fn constant(cone: Cone, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(CoreError::InvalidWeight(format!("constant must be positive, got {c}")));
        }
        Ok(Weight { cone, kind: WeightKind::Constant { c } })
    }

    /// Monomial weight; the cone must keep every axis with a positive
    /// exponent strictly positive. An all-zero exponent vector collapses to
    /// the constant weight 1 (degree zero forces constancy).
    pub fn monomial(cone: Cone, exponents: Vec<f64>) -> Result<Self> {
        if exponents.len() != cone.dim() {
            return Err(CoreError::InvalidWeight(
                "exponent vector length must match the cone dimension".into(),
            ));
        }
        if exponents.iter().any(|a| *a < 0.0 || !a.is_finite()) {
            return Err(CoreError::InvalidWeight("exponents must be finite and >= 0".into()));
        }
        if exponents.iter().all(|a| *a == 0.0) {
            return Ok(Weight { cone, kind: WeightKind::Constant { c: 1.0 } });
        }
        let w = Weight { cone, kind: WeightKind::Monomial { exponents } };
        // positivity of the active coordinates, checked on a sample
        for x in w.cone.sample_interior(32, 1, SAMPLE_R_LO, SAMPLE_R_HI, EPS_BD)? {
            let v = w.value(&x);
            if !(v > 0.0) || !v.is_finite() {
                return Err(CoreError::InvalidWeight(format!(
                    "monomial weight non-positive at sampled cone point {x:?}"
                )));
            }
        }
        Ok(w)
    }

    /// Custom weight from callbacks. Degree zero is rejected: by the
    /// log-concavity characterization a degree-0 weight is constant, so the
    /// constant kind must be used instead.
    pub fn custom(
        cone: Cone,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        degree: f64,
        tolerance: f64,
    ) -> Result<Self> {
        if degree == 0.0 {
            return Err(CoreError::InvalidWeight(
                "degree-0 weights are constant; use Weight::constant".into(),
            ));
        }
        if !(degree > 0.0) {
            return Err(CoreError::InvalidWeight(format!("degree must be >= 0, got {degree}")));
        }
        Ok(Weight {
            cone,
            kind: WeightKind::Custom {
                value: Arc::new(value),
                gradient: Arc::new(gradient),
                degree,
                tolerance,
            },
        })
    }

    pub fn cone(&self) -> &Cone {
        &self.cone
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    /// Homogeneity degree tau.
    pub fn degree(&self) -> f64 {
        match &self.kind {
            WeightKind::Constant { .. } => 0.0,
            WeightKind::Monomial { exponents } => exponents.iter().sum(),
            WeightKind::Custom { degree, .. } => *degree,
        }
    }

    /// Check tolerance for sampled identities (relative).
    pub fn tolerance(&self) -> f64 {
        match &self.kind {
            WeightKind::Custom { tolerance, .. } => *tolerance,
            _ => 1e-8,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match &self.kind {
            WeightKind::Constant { c } => *c,
            WeightKind::Monomial { exponents } => exponents
                .iter()
                .zip(x)
                .map(|(&a, &xi)| if a == 0.0 { 1.0 } else { xi.powf(a) })
                .product(),
            WeightKind::Custom { value, .. } => value(x),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match &self.kind {
            WeightKind::Constant { .. } => vec![0.0; x.len()],
            WeightKind::Monomial { exponents } => {
                let v = self.value(x);
                exponents
                    .iter()
                    .zip(x)
                    .map(|(&a, &xi)| if a == 0.0 { 0.0 } else { a * v / xi })
                    .collect()
            }
            WeightKind::Custom { gradient, .. } => gradient(x),
        }
    }

    /// `|grad w(x) . x - tau w(x)| / max(1, |w(x)|)` at a cone point.
    pub fn euler_residual(&self, x: &[f64]) -> Result<f64> {
        self.require_interior(x)?;
        let v = self.value(x);
        if !v.is_finite() || v <= 0.0 {
            return Err(CoreError::InvalidWeight(format!("w({x:?}) = {v}")));
        }
        let g = self.gradient(x);
        let lhs = dot(&g, x);
        Ok((lhs - self.degree() * v).abs() / v.abs().max(1.0))
    }

    /// Sampled check that `w(x + x0) = w(x)` on the cone; needed before
    /// admitting a shifted extremal or a shifted ball perimeter.
    pub fn check_translation_invariance(&self, x0: &[f64], samples: usize, seed: u64) -> Result<()> {
        if x0.iter().all(|v| *v == 0.0) {
            return Ok(());
        }
        if x0.len() != self.cone.dim() {
            return Err(CoreError::InvalidInput("shift dimension mismatch".into()));
        }
        let tol = self.tolerance().max(1e-10);
        let pts = self.cone.sample_interior(samples.max(8), seed, SAMPLE_R_LO, SAMPLE_R_HI, EPS_BD)?;
        for x in &pts {
            let shifted: Vec<f64> = x.iter().zip(x0).map(|(a, b)| a + b).collect();
            if !self.cone.contains(&shifted) {
                continue;
            }
            let v0 = self.value(x);
            let v1 = self.value(&shifted);
            if (v1 - v0).abs() > tol * v0.abs().max(1.0) {
                return Err(CoreError::TranslationNotInvariant(x0.to_vec()));
            }
        }
        Ok(())
    }

    fn require_interior(&self, x: &[f64]) -> Result<()> {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !self.cone.contains(x) || self.cone.boundary_distance(x) < EPS_BD * r {
            return Err(CoreError::DomainError(format!("{x:?}")));
        }
        Ok(())
    }
}

/// Runs every sampled hypothesis check and assembles the certificate.
///
/// The log-concavity inequality tested on pairs (x, y) is
/// `log(w(y)/w(x)) <= -tau + grad w(x) . y / w(x)`, together with the
/// pairing `grad w(x) . y >= 0`; violations are clamped at zero and the
/// worst one is recorded.
pub fn check_log_concavity(w: &Weight, samples: usize, seed: u64) -> Result<WeightCertificate> {
    if samples < 2 {
        return Err(CoreError::InvalidInput("need at least 2 samples".into()));
    }
    let tau = w.degree();
    let tol = w.tolerance();
    // analytic kinds satisfy homogeneity to near round-off; custom callbacks
    // are held to their declared tolerance
    let homog_tol = match w.kind() {
        WeightKind::Custom { tolerance, .. } => *tolerance,
        _ => 1e-10,
    };
    let pts = w.cone().sample_interior(samples, seed, SAMPLE_R_LO, SAMPLE_R_HI, EPS_BD)?;

    let mut worst: f64 = 0.0;
    let mut homogeneity_ok = true;
    let mut euler_ok = true;
    let mut log_concavity_ok = true;
    let mut gradient_pairing_ok = true;

    for x in &pts {
        let v = w.value(x);
        if !v.is_finite() || v <= 0.0 {
            return Err(CoreError::InvalidWeight(format!("w({x:?}) = {v}")));
        }
        for lambda in [0.5, 2.0, 7.0] {
            let sx: Vec<f64> = x.iter().map(|a| a * lambda).collect();
            if !w.cone().contains(&sx) {
                return Err(CoreError::DomainError(format!("{sx:?}")));
            }
            let rel = (w.value(&sx) - lambda.powf(tau) * v).abs() / (lambda.powf(tau) * v).abs();
            if rel > homog_tol {
                homogeneity_ok = false;
                worst = worst.max(rel);
            }
        }
        let er = w.euler_residual(x)?;
        if er > tol {
            euler_ok = false;
            worst = worst.max(er);
        }
    }

    for pair in pts.chunks(2) {
        let [x, y] = match pair {
            [x, y] => [x, y],
            _ => break,
        };
        let vx = w.value(x);
        let vy = w.value(y);
        let gx = w.gradient(x);
        let pairing = dot(&gx, y);
        if pairing < -tol * vx.max(1.0) {
            gradient_pairing_ok = false;
            worst = worst.max(-pairing);
        }
        let lhs = (vy / vx).ln();
        let rhs = -tau + pairing / vx;
        let violation = lhs - rhs;
        if violation > tol.max(1e-9) {
            log_concavity_ok = false;
            worst = worst.max(violation);
        }
    }

    // same seed, hence the same sampled point set as the pair checks above
    let tau_concavity_ok = if tau > 0.0 {
        check_tau_concavity(w, samples, seed)?
    } else {
        // degree 0 must mean a constant weight
        matches!(w.kind(), WeightKind::Constant { .. })
    };

    Ok(WeightCertificate {
        homogeneity_ok,
        euler_ok,
        log_concavity_ok,
        tau_concavity_ok,
        gradient_pairing_ok,
        worst_violation: worst.max(0.0),
        samples_used: pts.len(),
    })
}

/// Midpoint-concavity of `w^{1/tau}` on sampled pairs. Rejected for tau = 0.
pub fn check_tau_concavity(w: &Weight, samples: usize, seed: u64) -> Result<bool> {
    let tau = w.degree();
    if tau == 0.0 {
        return Err(CoreError::DegreeZero);
    }
    let tol = w.tolerance().max(1e-9);
    let pts = w.cone().sample_interior(samples.max(2), seed, SAMPLE_R_LO, SAMPLE_R_HI, EPS_BD)?;
    let mut ok = true;
    for pair in pts.chunks(2) {
        let [x, y] = match pair {
            [x, y] => [x, y],
            _ => break,
        };
        let mid: Vec<f64> = x.iter().zip(y.iter()).map(|(a, b)| 0.5 * (a + b)).collect();
        if !w.cone().contains(&mid) {
            continue;
        }
        let fx = w.value(x).powf(1.0 / tau);
        let fy = w.value(y).powf(1.0 / tau);
        let fm = w.value(&mid).powf(1.0 / tau);
        let scale = fx.abs().max(fy.abs()).max(1.0);
        if fm < 0.5 * (fx + fy) - tol * scale {
            ok = false;
        }
    }
    Ok(ok)
}
