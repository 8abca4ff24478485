//! JSON experiment configs and their translation into core objects.
//! Validation errors name the offending key.

use anyhow::{anyhow, bail, Result};
use serde::Deserialize;
use serde_json::Value;

use conelab_core::{Cone, GridRule, Grid1, Quadrature, TestFunction, Weight};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Constants,
    Weightcheck,
    Deficit,
    Deficit1,
    Hopflax,
    Hyper,
    Transport,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Constants => "constants",
            ExperimentKind::Weightcheck => "weightcheck",
            ExperimentKind::Deficit => "deficit",
            ExperimentKind::Deficit1 => "deficit1",
            ExperimentKind::Hopflax => "hopflax",
            ExperimentKind::Hyper => "hyper",
            ExperimentKind::Transport => "transport",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeSpec {
    pub kind: String,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub normal: Option<Vec<f64>>,
    #[serde(default)]
    pub active: Option<Vec<bool>>,
    #[serde(default)]
    pub inward_normals: Option<Vec<Vec<f64>>>,
}

impl ConeSpec {
    pub fn build(&self) -> Result<Cone> {
        match self.kind.as_str() {
            "full_space" => {
                let n = self.n.ok_or_else(|| anyhow!("cone.n required for full_space"))?;
                Ok(Cone::full_space(n)?)
            }
            "half_space" => {
                let normal = self
                    .normal
                    .clone()
                    .ok_or_else(|| anyhow!("cone.normal required for half_space"))?;
                Ok(Cone::half_space(normal)?)
            }
            "orthant" => {
                if let Some(active) = self.active.clone() {
                    Ok(Cone::orthant(active)?)
                } else if let Some(n) = self.n {
                    Ok(Cone::positive_orthant(n)?)
                } else {
                    bail!("cone.active or cone.n required for orthant")
                }
            }
            "polyhedral" => {
                let normals = self
                    .inward_normals
                    .clone()
                    .ok_or_else(|| anyhow!("cone.inward_normals required for polyhedral"))?;
                Ok(Cone::polyhedral(normals)?)
            }
            other => bail!("cone.kind \"{other}\" not recognized"),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    pub kind: String,
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub exponents: Option<Vec<f64>>,
}

impl WeightSpec {
    pub fn build(&self, cone: Cone) -> Result<Weight> {
        match self.kind.as_str() {
            "constant" => Ok(Weight::constant(cone, self.c.unwrap_or(1.0))?),
            "monomial" => {
                let exps = self
                    .exponents
                    .clone()
                    .ok_or_else(|| anyhow!("weight.exponents required for monomial"))?;
                Ok(Weight::monomial(cone, exps)?)
            }
            other => bail!("weight.kind \"{other}\" not recognized"),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    pub family: String,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    #[serde(default)]
    pub rates: Option<Vec<f64>>,
    #[serde(default)]
    pub centers: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub center: Option<Vec<f64>>,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub height: Option<f64>,
    #[serde(default)]
    pub axis_rates: Option<Vec<f64>>,
    #[serde(default)]
    pub b: Option<f64>,
    #[serde(default)]
    pub offset: Option<f64>,
}

impl FunctionSpec {
    /// Build the function; `p` and the weight are needed for the
    /// normalization-aware families.
    pub fn build(&self, p: f64, w: &Weight) -> Result<TestFunction> {
        let dim = w.cone().dim();
        match self.family.as_str() {
            "gaussian_extremal" => {
                let lambda = self.lambda.unwrap_or(1.0);
                let x0 = self.x0.clone().unwrap_or_else(|| vec![0.0; dim]);
                let g = conelab_core::GaussianExtremal::new(lambda, x0, p, w)?;
                Ok(g.as_test_function())
            }
            "gaussian_mixture" => {
                let weights = self
                    .weights
                    .clone()
                    .ok_or_else(|| anyhow!("function.weights required for gaussian_mixture"))?;
                let rates = self
                    .rates
                    .clone()
                    .ok_or_else(|| anyhow!("function.rates required for gaussian_mixture"))?;
                let centers = self
                    .centers
                    .clone()
                    .ok_or_else(|| anyhow!("function.centers required for gaussian_mixture"))?;
                Ok(conelab_core::testfn::gaussian_mixture(weights, rates, centers))
            }
            "bump" => {
                let center = self.center.clone().unwrap_or_else(|| vec![0.0; dim]);
                let radius = self.radius.ok_or_else(|| anyhow!("function.radius required for bump"))?;
                Ok(conelab_core::testfn::bump(center, radius, self.height.unwrap_or(1.0)))
            }
            "tilted_gaussian" => {
                let center = self.center.clone().unwrap_or_else(|| vec![0.0; dim]);
                let axis_rates = self
                    .axis_rates
                    .clone()
                    .ok_or_else(|| anyhow!("function.axis_rates required for tilted_gaussian"))?;
                Ok(conelab_core::testfn::tilted_gaussian(center, axis_rates))
            }
            "convex_power" | "concave_power" => {
                let b = self.b.ok_or_else(|| anyhow!("function.b required for power families"))?;
                let sign = if self.family == "convex_power" { 1.0 } else { -1.0 };
                let pp = p / (p - 1.0);
                let x0 = self.x0.clone().unwrap_or_else(|| vec![0.0; dim]);
                Ok(TestFunction::new(self.family.clone(), move |x: &[f64]| {
                    let r = x
                        .iter()
                        .zip(&x0)
                        .map(|(a, c)| (a + c) * (a + c))
                        .sum::<f64>()
                        .sqrt();
                    sign * b / pp * r.powf(pp)
                })
                .with_tail(conelab_core::TailBound::GaussianType {
                    coeff: 1.0,
                    rate: b / pp / 2f64.powf(pp - 1.0),
                    power: pp,
                }))
            }
            other => bail!("function.family \"{other}\" not recognized"),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub n_per_axis: usize,
}

impl GridSpec {
    pub fn build(&self, cone: &Cone) -> Result<GridRule> {
        Ok(GridRule::new(cone, self.lo.clone(), self.hi.clone(), self.n_per_axis)?)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesSpec {
    #[serde(default = "default_eps_norm")]
    pub eps_norm: f64,
    #[serde(default = "default_eps_quad")]
    pub eps_quad: f64,
}

fn default_eps_norm() -> f64 {
    1e-6
}

fn default_eps_quad() -> f64 {
    1e-3
}

impl Default for TolerancesSpec {
    fn default() -> Self {
        TolerancesSpec { eps_norm: default_eps_norm(), eps_quad: default_eps_quad() }
    }
}

/// Full experiment description, parsed from JSON.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: Option<u64>,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub cone: Option<ConeSpec>,
    #[serde(default)]
    pub weight: Option<WeightSpec>,
    #[serde(default)]
    pub function: Option<FunctionSpec>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub radial_order: Option<usize>,
    /// "radial" or "grid"
    #[serde(default)]
    pub quadrature: Option<String>,
    #[serde(default)]
    pub tolerances: Option<TolerancesSpec>,
    // deficit1
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    /// "closed_form" or "grid"
    #[serde(default)]
    pub entropy_route: Option<String>,
    // weightcheck
    #[serde(default)]
    pub samples: Option<usize>,
    // hopflax
    #[serde(default)]
    pub t_grid: Option<Vec<f64>>,
    /// "naive" | "pruned" | "fast_p2"
    #[serde(default)]
    pub method: Option<String>,
    // hyper
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub t: Option<f64>,
    // transport
    #[serde(default)]
    pub n_cells: Option<usize>,
    #[serde(default)]
    pub domain: Option<(f64, f64)>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<(Self, Value)> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| anyhow!("config is not valid JSON: {e}"))?;
        let cfg: ExperimentConfig = serde_json::from_value(value.clone())
            .map_err(|e| anyhow!("config schema error: {e}"))?;
        if cfg.seed.is_none() {
            bail!("config key \"seed\" is required (determinism contract)");
        }
        Ok((cfg, value))
    }

    pub fn require_p(&self) -> Result<f64> {
        self.p.ok_or_else(|| anyhow!("config key \"p\" is required for {}", self.experiment.as_str()))
    }

    pub fn cone_and_weight(&self) -> Result<(Cone, Weight)> {
        let cone_spec = self
            .cone
            .as_ref()
            .ok_or_else(|| anyhow!("config key \"cone\" is required"))?;
        let cone = cone_spec.build()?;
        let weight_spec = self
            .weight
            .as_ref()
            .ok_or_else(|| anyhow!("config key \"weight\" is required"))?;
        let w = weight_spec.build(cone.clone())?;
        Ok((cone, w))
    }

    pub fn quadrature(&self, cone: &Cone) -> Result<Quadrature> {
        match self.quadrature.as_deref() {
            Some("radial") | None => Ok(Quadrature::Radial {
                order: self.radial_order.unwrap_or(32),
            }),
            Some("grid") => {
                let spec = self
                    .grid
                    .as_ref()
                    .ok_or_else(|| anyhow!("config key \"grid\" is required for grid quadrature"))?;
                Ok(Quadrature::Grid(spec.build(cone)?))
            }
            Some(other) => bail!("quadrature \"{other}\" not recognized (use \"radial\" or \"grid\")"),
        }
    }

    pub fn grid_1d(&self) -> Result<Grid1> {
        let (lo, hi) = self.domain.unwrap_or((-14.0, 14.0));
        Ok(Grid1::new(lo, hi, self.n_cells.unwrap_or(4096))?)
    }

    pub fn tolerances(&self) -> conelab_core::Tolerances {
        let t = self.tolerances.clone().unwrap_or_default();
        conelab_core::Tolerances { eps_norm: t.eps_norm, eps_quad: t.eps_quad }
    }
}
