//! Test functions: the scalar functions the inequalities are evaluated on,
//! carried as value/gradient callbacks plus a tail certificate that the
//! quadrature uses to pick truncation radii.

use std::fmt;
use std::sync::Arc;

use crate::cone::Cone;
use crate::Result;

type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Decay certificate: either compact support or a Gaussian-type bound
/// `|f(x)| <= coeff * exp(-rate * |x|^power)`.
#[derive(Debug, Clone)]
pub enum TailBound {
    CompactSupport { radius: f64 },
    GaussianType { coeff: f64, rate: f64, power: f64 },
}

impl TailBound {
    /// Tail bound for `|f|^p` given the bound for `|f|`.
    pub fn power(&self, p: f64) -> TailBound {
        match self {
            TailBound::CompactSupport { radius } => TailBound::CompactSupport { radius: *radius },
            TailBound::GaussianType { coeff, rate, power } => TailBound::GaussianType {
                coeff: coeff.powf(p),
                rate: rate * p,
                power: *power,
            },
        }
    }

    /// Radius beyond which the certified bound drops below `eps` of its coefficient.
    pub fn truncation_radius(&self, eps: f64) -> f64 {
        match self {
            TailBound::CompactSupport { radius } => *radius,
            TailBound::GaussianType { coeff, rate, power } => {
                let c = coeff.max(1.0);
                ((c / eps).ln() / rate).powf(1.0 / power) + 2.0
            }
        }
    }
}

/// Radial profile `u(x) = value(|x|)` together with its radial derivative.
#[derive(Clone)]
pub struct RadialProfile {
    pub value: ProfileFn,
    pub derivative: ProfileFn,
}

/// An analytic scalar function on the cone, with optional analytic gradient
/// and optional radial profile (about the apex).
#[derive(Clone)]
pub struct TestFunction {
    label: String,
    value: ValueFn,
    gradient: Option<GradFn>,
    radial: Option<RadialProfile>,
    tail: Option<TailBound>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("label", &self.label)
            .field("has_gradient", &self.gradient.is_some())
            .field("radial", &self.radial.is_some())
            .field("tail", &self.tail)
            .finish()
    }
}

impl TestFunction {
    pub fn new(
        label: impl Into<String>,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        TestFunction {
            label: label.into(),
            value: Arc::new(value),
            gradient: None,
            radial: None,
            tail: None,
        }
    }

    pub fn with_gradient(
        mut self,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.gradient = Some(Arc::new(gradient));
        self
    }

    pub fn with_radial(
        mut self,
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.radial = Some(RadialProfile {
            value: Arc::new(value),
            derivative: Arc::new(derivative),
        });
        self
    }

    pub fn with_tail(mut self, tail: TailBound) -> Self {
        self.tail = Some(tail);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn gradient_at(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.gradient.as_ref().map(|g| g(x))
    }

    /// Central finite differences with step `h = 1e-5 (1 + |x|)`.
    pub fn fd_gradient(&self, x: &[f64]) -> Vec<f64> {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let h = 1e-5 * (1.0 + r);
        let mut g = vec![0.0; x.len()];
        let mut xp = x.to_vec();
        for i in 0..x.len() {
            xp[i] = x[i] + h;
            let fp = (self.value)(&xp);
            xp[i] = x[i] - h;
            let fm = (self.value)(&xp);
            xp[i] = x[i];
            g[i] = (fp - fm) / (2.0 * h);
        }
        g
    }

    pub fn radial(&self) -> Option<&RadialProfile> {
        self.radial.as_ref()
    }

    pub fn tail(&self) -> Option<&TailBound> {
        self.tail.as_ref()
    }

    /// Pointwise rescale `c * u`; the gradient, profile and tail scale along.
    pub fn scaled_by(&self, c: f64) -> TestFunction {
        let value = self.value.clone();
        let mut out = TestFunction {
            label: self.label.clone(),
            value: Arc::new(move |x| c * value(x)),
            gradient: self.gradient.clone().map(|g| {
                let g2: GradFn =
                    Arc::new(move |x: &[f64]| g(x).into_iter().map(|v| c * v).collect());
                g2
            }),
            radial: self.radial.clone().map(|r| {
                let v = r.value.clone();
                let d = r.derivative.clone();
                RadialProfile {
                    value: Arc::new(move |s| c * v(s)),
                    derivative: Arc::new(move |s| c * d(s)),
                }
            }),
            tail: self.tail.clone(),
        };
        if let Some(TailBound::GaussianType { coeff, .. }) = out.tail.as_mut() {
            *coeff *= c.abs();
        }
        out
    }

    /// Mass-preserving dilation `u_t(x) = t^alpha u(t x)`; with
    /// `alpha = (n + tau) / p` this keeps the weighted L^p mass fixed.
    pub fn dilated(&self, t: f64, alpha: f64) -> TestFunction {
        assert!(t > 0.0);
        let scale = t.powf(alpha);
        let value = self.value.clone();
        let gradient = self.gradient.clone();
        let tail = self.tail.clone().map(|tb| match tb {
            TailBound::CompactSupport { radius } => TailBound::CompactSupport { radius: radius / t },
            TailBound::GaussianType { coeff, rate, power } => TailBound::GaussianType {
                coeff: coeff * scale,
                rate: rate * t.powf(power),
                power,
            },
        });
        TestFunction {
            label: format!("{}_dilated_t{}", self.label, t),
            value: Arc::new(move |x: &[f64]| {
                let y: Vec<f64> = x.iter().map(|v| v * t).collect();
                scale * value(&y)
            }),
            gradient: gradient.map(|g| {
                let g2: GradFn = Arc::new(move |x: &[f64]| {
                    let y: Vec<f64> = x.iter().map(|v| v * t).collect();
                    g(&y).into_iter().map(|v| scale * t * v).collect()
                });
                g2
            }),
            radial: self.radial.clone().map(|r| {
                let v = r.value.clone();
                let d = r.derivative.clone();
                RadialProfile {
                    value: Arc::new(move |s| scale * v(t * s)),
                    derivative: Arc::new(move |s| scale * t * d(t * s)),
                }
            }),
            tail,
        }
    }

    /// Worst relative mismatch between the analytic gradient and central
    /// finite differences over sampled interior points.
    pub fn validate_gradient(&self, cone: &Cone, points: usize, seed: u64) -> Result<f64> {
        let grad = match &self.gradient {
            Some(g) => g.clone(),
            None => return Ok(0.0),
        };
        let pts = cone.sample_interior(points, seed, 0.1, 5.0, 1e-6)?;
        let mut worst = 0.0f64;
        for x in &pts {
            let ga = grad(x);
            let gf = self.fd_gradient(x);
            let na: f64 = ga.iter().map(|v| v * v).sum::<f64>().sqrt();
            let nf: f64 = gf.iter().map(|v| v * v).sum::<f64>().sqrt();
            let diff: f64 = ga
                .iter()
                .zip(&gf)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let scale = na.max(nf).max(1e-8);
            worst = worst.max(diff / scale);
        }
        Ok(worst)
    }
}

fn sq_dist(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Sum of isotropic Gaussians `sum_i w_i exp(-lam_i |x - c_i|^2)`.
pub fn gaussian_mixture(weights: Vec<f64>, rates: Vec<f64>, centers: Vec<Vec<f64>>) -> TestFunction {
    assert_eq!(weights.len(), rates.len());
    assert_eq!(weights.len(), centers.len());
    assert!(!weights.is_empty());
    let max_center = centers
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let min_rate = rates.iter().cloned().fold(f64::INFINITY, f64::min);
    let coeff_sum: f64 = weights.iter().map(|w| w.abs()).sum();
    let w2 = weights.clone();
    let r2 = rates.clone();
    let c2 = centers.clone();
    TestFunction::new("gaussian_mixture", move |x: &[f64]| {
        weights
            .iter()
            .zip(&rates)
            .zip(&centers)
            .map(|((&w, &lam), c)| w * (-lam * sq_dist(x, c)).exp())
            .sum()
    })
    .with_gradient(move |x: &[f64]| {
        let mut g = vec![0.0; x.len()];
        for ((&w, &lam), c) in w2.iter().zip(&r2).zip(&c2) {
            let e = w * (-lam * sq_dist(x, c)).exp();
            for i in 0..x.len() {
                g[i] += e * (-2.0 * lam * (x[i] - c[i]));
            }
        }
        g
    })
    .with_tail(TailBound::GaussianType {
        // |x - c|^2 >= |x|^2/2 - |c|^2
        coeff: coeff_sum * (min_rate * max_center * max_center).exp(),
        rate: 0.5 * min_rate,
        power: 2.0,
    })
}

/// C^1 compact bump `h (1 - |x - c|^2 / R^2)^2` on the ball of radius `R`.
pub fn bump(center: Vec<f64>, radius: f64, height: f64) -> TestFunction {
    assert!(radius > 0.0);
    let c2 = center.clone();
    let reach = radius + center.iter().map(|v| v * v).sum::<f64>().sqrt();
    TestFunction::new("bump", move |x: &[f64]| {
        let s = 1.0 - sq_dist(x, &center) / (radius * radius);
        if s > 0.0 {
            height * s * s
        } else {
            0.0
        }
    })
    .with_gradient(move |x: &[f64]| {
        let s = 1.0 - sq_dist(x, &c2) / (radius * radius);
        if s > 0.0 {
            x.iter()
                .zip(&c2)
                .map(|(&xi, &ci)| height * 2.0 * s * (-2.0 * (xi - ci) / (radius * radius)))
                .collect()
        } else {
            vec![0.0; x.len()]
        }
    })
    .with_tail(TailBound::CompactSupport { radius: reach })
}

/// Anisotropic Gaussian `exp(-sum_i a_i (x_i - c_i)^2)`.
pub fn tilted_gaussian(center: Vec<f64>, axis_rates: Vec<f64>) -> TestFunction {
    assert_eq!(center.len(), axis_rates.len());
    assert!(axis_rates.iter().all(|a| *a > 0.0));
    let min_rate = axis_rates.iter().cloned().fold(f64::INFINITY, f64::min);
    let c_norm2: f64 = center.iter().map(|v| v * v).sum();
    let c2 = center.clone();
    let a2 = axis_rates.clone();
    TestFunction::new("tilted_gaussian", move |x: &[f64]| {
        let q: f64 = x
            .iter()
            .zip(&center)
            .zip(&axis_rates)
            .map(|((&xi, &ci), &ai)| ai * (xi - ci) * (xi - ci))
            .sum();
        (-q).exp()
    })
    .with_gradient(move |x: &[f64]| {
        let q: f64 = x
            .iter()
            .zip(&c2)
            .zip(&a2)
            .map(|((&xi, &ci), &ai)| ai * (xi - ci) * (xi - ci))
            .sum();
        let e = (-q).exp();
        x.iter()
            .zip(&c2)
            .zip(&a2)
            .map(|((&xi, &ci), &ai)| e * (-2.0 * ai * (xi - ci)))
            .collect()
    })
    .with_tail(TailBound::GaussianType {
        coeff: (min_rate * c_norm2).exp(),
        rate: 0.5 * min_rate,
        power: 2.0,
    })
}
