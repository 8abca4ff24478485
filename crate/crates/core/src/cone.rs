//! Open convex cones in R^n: the full space, half-spaces, orthants and
//! polyhedral cones cut out by inward face normals.
//!
//! Membership is always strict (the cones are open); `boundary_distance` is
//! the minimum over faces of the signed distance to the face hyperplane,
//! which is exact for the representations used here.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::Result;

/// The supported cone shapes.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConeKind {
    /// All of R^n.
    FullSpace,
    /// `{ x : normal . x > 0 }`; `normal` points into the cone.
    HalfSpace { normal: Vec<f64> },
    /// `{ x : x_i > 0 for every active axis i }`.
    Orthant { active: Vec<bool> },
    /// Intersection of half-spaces `{ x : v . x > 0 }` over the inward normals `v`.
    Polyhedral { inward_normals: Vec<Vec<f64>> },
}

/// An open convex cone `E` in R^n.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cone {
    dim: usize,
    #[serde(flatten)]
    kind: ConeKind,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

impl Cone {
    /// All of R^n.
    pub fn full_space(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(CoreError::InvalidInput("dimension must be positive".into()));
        }
        Ok(Cone { dim, kind: ConeKind::FullSpace })
    }

    /// Half-space with the given inward normal.
    pub fn half_space(normal: Vec<f64>) -> Result<Self> {
        let dim = normal.len();
        if dim == 0 || norm(&normal) == 0.0 {
            return Err(CoreError::InvalidInput("half-space needs a nonzero normal".into()));
        }
        Ok(Cone { dim, kind: ConeKind::HalfSpace { normal } })
    }

    /// Orthant restricted to the active axes; an all-false mask is the full space.
    pub fn orthant(active: Vec<bool>) -> Result<Self> {
        let dim = active.len();
        if dim == 0 {
            return Err(CoreError::InvalidInput("dimension must be positive".into()));
        }
        Ok(Cone { dim, kind: ConeKind::Orthant { active } })
    }

    /// Positive orthant with every axis active.
    pub fn positive_orthant(dim: usize) -> Result<Self> {
        Self::orthant(vec![true; dim])
    }

    /// Polyhedral cone cut out by inward face normals.
    pub fn polyhedral(inward_normals: Vec<Vec<f64>>) -> Result<Self> {
        let dim = inward_normals.first().map(|v| v.len()).unwrap_or(0);
        if dim == 0 {
            return Err(CoreError::InvalidInput(
                "polyhedral cone needs at least one nonzero normal".into(),
            ));
        }
        for v in &inward_normals {
            if v.len() != dim || norm(v) == 0.0 {
                return Err(CoreError::InvalidInput(
                    "all inward normals must be nonzero and of equal dimension".into(),
                ));
            }
        }
        Ok(Cone { dim, kind: ConeKind::Polyhedral { inward_normals } })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &ConeKind {
        &self.kind
    }

    /// Strict membership in the open cone.
    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim {
            return false;
        }
        match &self.kind {
            ConeKind::FullSpace => true,
            ConeKind::HalfSpace { normal } => dot(normal, x) > 0.0,
            ConeKind::Orthant { active } => {
                active.iter().zip(x).all(|(&a, &xi)| !a || xi > 0.0)
            }
            ConeKind::Polyhedral { inward_normals } => {
                inward_normals.iter().all(|v| dot(v, x) > 0.0)
            }
        }
    }

    /// Distance from `x` to the cone boundary, as the minimum over faces of
    /// the signed distance to the face hyperplane. Infinite for the full
    /// space (and for an orthant with no active axis).
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        match &self.kind {
            ConeKind::FullSpace => f64::INFINITY,
            ConeKind::HalfSpace { normal } => dot(normal, x) / norm(normal),
            ConeKind::Orthant { active } => active
                .iter()
                .zip(x)
                .filter(|(&a, _)| a)
                .map(|(_, &xi)| xi)
                .fold(f64::INFINITY, f64::min),
            ConeKind::Polyhedral { inward_normals } => inward_normals
                .iter()
                .map(|v| dot(v, x) / norm(v))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Draw `count` points from the annulus `r_lo <= |x| <= r_hi` intersected
    /// with the cone, keeping only points with `boundary_distance >= eps_bd * |x|`.
    /// Rejection sampling with a deterministic seed.
    pub fn sample_interior(
        &self,
        count: usize,
        seed: u64,
        r_lo: f64,
        r_hi: f64,
        eps_bd: f64,
    ) -> Result<Vec<Vec<f64>>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        let max_attempts = count.saturating_mul(20_000).max(100_000);
        let mut attempts = 0usize;
        while out.len() < count {
            attempts += 1;
            if attempts > max_attempts {
                return Err(CoreError::EmptyDomain);
            }
            let mut x = vec![0.0; self.dim];
            // isotropic direction via normalized Gaussians
            let mut n2 = 0.0;
            for xi in x.iter_mut() {
                let u1: f64 = rng.random::<f64>().max(1e-300);
                let u2: f64 = rng.random();
                let g = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
                *xi = g;
                n2 += g * g;
            }
            if n2 == 0.0 {
                continue;
            }
            let r = r_lo + (r_hi - r_lo) * rng.random::<f64>();
            let scale = r / n2.sqrt();
            for xi in x.iter_mut() {
                *xi *= scale;
            }
            if self.contains(&x) && self.boundary_distance(&x) >= eps_bd * r {
                out.push(x);
            }
        }
        Ok(out)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
