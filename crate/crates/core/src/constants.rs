//! Closed-form sharp constants and the extremal families that achieve
//! equality: the p'-power Gaussians for p > 1, normalized ball indicators
//! for p = 1, and the concave-power initial data of the hypercontractivity
//! equality case.

use serde::Serialize;

use crate::error::CoreError;
use crate::quadrature::{sphere_mass_direct, ConeMass, GridRule, RadialRule};
use crate::quadrature::integrate_weighted;
use crate::special::gamma;
use crate::testfn::{TailBound, TestFunction};
use crate::weight::Weight;
use crate::Result;

/// The sharp multiplicative constant inside the log on the right side of the
/// weighted L^p log-Sobolev inequality.
#[derive(Debug, Clone, Serialize)]
pub struct SharpConstant {
    pub p: f64,
    pub p_prime: f64,
    pub n: usize,
    pub tau: f64,
    pub ball_mass: f64,
    pub value: f64,
}

pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

/// `L = p/(n+tau) ((p-1)/e)^{p-1} (Gamma((n+tau)/p' + 1) M_B)^{-p/(n+tau)}`.
pub fn sharp_constant(p: f64, w: &Weight) -> Result<SharpConstant> {
    if !(p > 1.0) {
        return Err(CoreError::OutOfRange(format!("need p > 1, got {p}")));
    }
    let n = w.cone().dim();
    let tau = w.degree();
    let beta = n as f64 + tau;
    let mass = ConeMass::compute(w)?;
    let pp = conjugate(p);
    let value = p / beta
        * ((p - 1.0) / std::f64::consts::E).powf(p - 1.0)
        * (gamma(beta / pp + 1.0) * mass.ball_mass).powf(-p / beta);
    Ok(SharpConstant { p, p_prime: pp, n, tau, ball_mass: mass.ball_mass, value })
}

/// The four working constants of the transport proof; `consistency` ties them
/// back to the sharp constant exactly.
#[derive(Debug, Clone, Serialize)]
pub struct ProofConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

impl ProofConstants {
    /// `e^{p C2/(n+tau)} / (n+tau)^p * C4^p`, which must equal the sharp constant.
    pub fn consistency(&self, p: f64, beta: f64) -> f64 {
        (p * self.c2 / beta).exp() / beta.powf(p) * self.c4.powf(p)
    }
}

/// `C1 = p' (w_SE Gamma((n+tau)/p'))^{-1}`, `C2 = log C1 - (n+tau)/p'`,
/// `C3 = C2 + C1 int e^{-|y|^{p'}} w log w`, `C4 = p ((n+tau)/p')^{1/p'}`.
pub fn proof_constants(p: f64, w: &Weight) -> Result<ProofConstants> {
    if !(p > 1.0) {
        return Err(CoreError::OutOfRange(format!("need p > 1, got {p}")));
    }
    let n = w.cone().dim();
    let tau = w.degree();
    let beta = n as f64 + tau;
    let pp = conjugate(p);
    let mass = ConeMass::compute(w)?;
    let c1 = pp / (mass.sphere_mass * gamma(beta / pp));
    let c2 = c1.ln() - beta / pp;
    let c4 = p * (beta / pp).powf(1.0 / pp);
    let c3 = c2 + c1 * model_log_weight_integral(w, pp)?;
    Ok(ProofConstants { c1, c2, c3, c4 })
}

/// `int_E e^{-|y|^{p'}} w(y) log w(y) dy`, by the radial-angular split for
/// weights with an angular route, otherwise by grid quadrature.
fn model_log_weight_integral(w: &Weight, p_prime: f64) -> Result<f64> {
    use crate::weight::WeightKind;
    let n = w.cone().dim();
    let tau = w.degree();
    let beta = n as f64 + tau;
    if let WeightKind::Constant { c } = w.kind() {
        // log w is constant and C1 normalizes the model measure
        let mass = ConeMass::compute(w)?;
        let i0 = RadialRule::new(beta, tail_radius(p_prime), 32)?
            .integrate(|r| (-r.powf(p_prime)).exp())?;
        return Ok(c.ln() * mass.sphere_mass * i0);
    }
    // log w(y) = log w(y/|y|) + tau log r
    match angular_log_weight_mass(w) {
        Ok(ang_logw) => {
            let mass = ConeMass::compute(w)?;
            let rule = RadialRule::new(beta, tail_radius(p_prime), 32)?;
            let i0 = rule.integrate(|r| (-r.powf(p_prime)).exp())?;
            let ilog = rule.integrate(|r| (-r.powf(p_prime)).exp() * r.ln())?;
            Ok(ang_logw * i0 + tau * mass.sphere_mass * ilog)
        }
        Err(_) => {
            if n > 3 {
                return Err(CoreError::UnsupportedClosedForm(
                    "log-weight integral needs n <= 3 for the grid fallback".into(),
                ));
            }
            let r = tail_radius(p_prime);
            let rule = GridRule::new(w.cone(), vec![-r; n], vec![r; n], 192)?;
            integrate_weighted(
                w,
                |x| {
                    let rr = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let wv = w.value(x);
                    (-rr.powf(p_prime)).exp() * wv.ln()
                },
                &rule,
            )
        }
    }
}

fn tail_radius(p_prime: f64) -> f64 {
    TailBound::GaussianType { coeff: 1.0, rate: 1.0, power: p_prime }.truncation_radius(1e-14)
}

/// `int_{S^{n-1} cap E} w log w`, via the same angular machinery as the
/// direct sphere mass.
fn angular_log_weight_mass(w: &Weight) -> Result<f64> {
    // piggyback on the direct angular quadrature by wrapping the weight
    let inner = w.clone();
    let wrapped = Weight::custom(
        w.cone().clone(),
        move |x| {
            let v = inner.value(x);
            if v > 0.0 {
                v * v.ln()
            } else {
                0.0
            }
        },
        |x| vec![0.0; x.len()],
        w.degree().max(1.0),
        1e-8,
    )?;
    sphere_mass_direct(&wrapped)
}

// ---------------------------------------------------------------------------
// Extremal families
// ---------------------------------------------------------------------------

/// The Gaussian-type extremal
/// `u(x) = lambda^{(n+tau)/(p p')} (Gamma((n+tau)/p'+1) M_B)^{-1/p}
///         exp(-lambda |x + x0|^{p'} / p)`,
/// normalized to unit weighted L^p mass.
#[derive(Debug, Clone)]
pub struct GaussianExtremal {
    pub lambda: f64,
    pub x0: Vec<f64>,
    pub p: f64,
    pub p_prime: f64,
    pub n: usize,
    pub tau: f64,
    pub ball_mass: f64,
    pub norm_const: f64,
}

impl GaussianExtremal {
    /// A nonzero shift is admitted only when the weight passes the sampled
    /// invariance test `w(x + x0) = w(x)`.
    pub fn new(lambda: f64, x0: Vec<f64>, p: f64, w: &Weight) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(CoreError::OutOfRange(format!("need lambda > 0, got {lambda}")));
        }
        if !(p > 1.0) {
            return Err(CoreError::OutOfRange(format!("need p > 1, got {p}")));
        }
        w.check_translation_invariance(&x0, 64, 2024)?;
        let n = w.cone().dim();
        let tau = w.degree();
        let beta = n as f64 + tau;
        let pp = conjugate(p);
        let mass = ConeMass::compute(w)?;
        let norm_const =
            lambda.powf(beta / (p * pp)) * (gamma(beta / pp + 1.0) * mass.ball_mass).powf(-1.0 / p);
        Ok(GaussianExtremal {
            lambda,
            x0,
            p,
            p_prime: pp,
            n,
            tau,
            ball_mass: mass.ball_mass,
            norm_const,
        })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let r = x
            .iter()
            .zip(&self.x0)
            .map(|(a, b)| (a + b) * (a + b))
            .sum::<f64>()
            .sqrt();
        self.norm_const * (-self.lambda * r.powf(self.p_prime) / self.p).exp()
    }

    /// Checked evaluation honoring the cone domain.
    pub fn eval_checked(&self, cone: &crate::cone::Cone, x: &[f64]) -> Result<f64> {
        if !cone.contains(x) {
            return Err(CoreError::DomainError(format!("{x:?}")));
        }
        Ok(self.eval(x))
    }

    /// Package as a test function with analytic gradient, tail certificate,
    /// and (for zero shift) the radial profile.
    pub fn as_test_function(&self) -> TestFunction {
        let me = self.clone();
        let me_g = self.clone();
        let mut f = TestFunction::new(
            format!("gaussian_extremal_l{}_p{}", self.lambda, self.p),
            move |x: &[f64]| me.eval(x),
        )
        .with_gradient(move |x: &[f64]| {
            let shifted: Vec<f64> = x.iter().zip(&me_g.x0).map(|(a, b)| a + b).collect();
            let r = shifted.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r == 0.0 {
                return vec![0.0; x.len()];
            }
            let u = me_g.norm_const * (-me_g.lambda * r.powf(me_g.p_prime) / me_g.p).exp();
            let coef = -u * me_g.lambda * me_g.p_prime / me_g.p * r.powf(me_g.p_prime - 2.0);
            shifted.iter().map(|&s| coef * s).collect()
        })
        .with_tail(TailBound::GaussianType {
            coeff: self.norm_const
                * (self.lambda / self.p
                    * 2f64.powf(self.p_prime - 1.0)
                    * self.x0.iter().map(|v| v * v).sum::<f64>().powf(self.p_prime / 2.0))
                .exp(),
            rate: self.lambda / self.p / 2f64.powf(self.p_prime - 1.0),
            power: self.p_prime,
        });
        if self.x0.iter().all(|v| *v == 0.0) {
            let me_r = self.clone();
            let me_d = self.clone();
            f = f.with_radial(
                move |r| me_r.norm_const * (-me_r.lambda * r.powf(me_r.p_prime) / me_r.p).exp(),
                move |r| {
                    if r == 0.0 {
                        return 0.0;
                    }
                    let u = me_d.norm_const * (-me_d.lambda * r.powf(me_d.p_prime) / me_d.p).exp();
                    -u * me_d.lambda * me_d.p_prime / me_d.p * r.powf(me_d.p_prime - 1.0)
                },
            );
        }
        f
    }

    /// Closed form of `int |grad u|^p w`: `lambda^{p-1} (n+tau)/p' (p'/p)^p p'^0`
    /// written as `lambda^{p-1} ((n+tau)/p') (p')^p / p^p`.
    pub fn gradient_energy_closed_form(&self) -> f64 {
        let beta = self.n as f64 + self.tau;
        self.lambda.powf(self.p - 1.0) * (beta / self.p_prime) * self.p_prime.powf(self.p)
            / self.p.powf(self.p)
    }

    /// Closed form of the entropy of `|u|^p`: `log A - (n+tau)/p'` with
    /// `A = norm_const^p`.
    pub fn entropy_closed_form(&self) -> f64 {
        let beta = self.n as f64 + self.tau;
        self.p * self.norm_const.ln() - beta / self.p_prime
    }
}

/// The indicator extremal of the p = 1 inequality: the normalized indicator
/// of `B(-x0, lambda) cap E` with height `lambda^{-(n+tau)} / M_B`.
#[derive(Debug, Clone)]
pub struct IndicatorExtremal {
    pub lambda: f64,
    pub x0: Vec<f64>,
    pub n: usize,
    pub tau: f64,
    pub ball_mass: f64,
    pub height: f64,
}

impl IndicatorExtremal {
    pub fn new(lambda: f64, x0: Vec<f64>, w: &Weight) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(CoreError::OutOfRange(format!("need lambda > 0, got {lambda}")));
        }
        w.check_translation_invariance(&x0, 64, 2025)?;
        let n = w.cone().dim();
        let tau = w.degree();
        let mass = ConeMass::compute(w)?;
        let height = lambda.powf(-(n as f64 + tau)) / mass.ball_mass;
        Ok(IndicatorExtremal { lambda, x0, n, tau, ball_mass: mass.ball_mass, height })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let r = x
            .iter()
            .zip(&self.x0)
            .map(|(a, b)| (a + b) * (a + b))
            .sum::<f64>()
            .sqrt();
        if r <= self.lambda {
            self.height
        } else {
            0.0
        }
    }

    pub fn as_test_function(&self) -> TestFunction {
        let me = self.clone();
        let reach = self.lambda + self.x0.iter().map(|v| v * v).sum::<f64>().sqrt();
        TestFunction::new(format!("indicator_extremal_l{}", self.lambda), move |x: &[f64]| {
            me.eval(x)
        })
        .with_tail(TailBound::CompactSupport { radius: reach })
    }
}

/// Initial datum of the hypercontractivity equality case:
/// `g(x) = C - (1/p') ((beta-alpha)/(beta ttilde))^{1/(p-1)} |x + x0|^{p'}`.
pub fn hyper_extremal_g(
    p: f64,
    alpha: f64,
    beta: f64,
    t_tilde: f64,
    x0: Vec<f64>,
    c_offset: f64,
) -> Result<TestFunction> {
    if !(alpha < beta) {
        return Err(CoreError::AlphaBetaOrder { alpha, beta });
    }
    if !(alpha > 0.0) || !(t_tilde > 0.0) || !(p > 1.0) {
        return Err(CoreError::OutOfRange(
            "need 0 < alpha < beta, t_tilde > 0, p > 1".into(),
        ));
    }
    let pp = conjugate(p);
    let b0 = ((beta - alpha) / (beta * t_tilde)).powf(1.0 / (p - 1.0));
    let x0_g = x0.clone();
    let x0_n2: f64 = x0.iter().map(|v| v * v).sum();
    let g = TestFunction::new(
        format!("hyper_extremal_p{p}_a{alpha}_b{beta}"),
        move |x: &[f64]| {
            let r = x
                .iter()
                .zip(&x0)
                .map(|(a, b)| (a + b) * (a + b))
                .sum::<f64>()
                .sqrt();
            c_offset - b0 / pp * r.powf(pp)
        },
    )
    .with_gradient(move |x: &[f64]| {
        let shifted: Vec<f64> = x.iter().zip(&x0_g).map(|(a, b)| a + b).collect();
        let r = shifted.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r == 0.0 {
            return vec![0.0; x.len()];
        }
        let coef = -b0 * r.powf(pp - 2.0);
        shifted.iter().map(|&s| coef * s).collect()
    })
    // certificate for e^g (the function integrated downstream):
    // |x+x0|^{p'} >= |x|^{p'}/2^{p'-1} - |x0|^{p'}
    .with_tail(TailBound::GaussianType {
        coeff: (c_offset + b0 / pp * x0_n2.powf(pp / 2.0)).exp(),
        rate: b0 / pp / 2f64.powf(pp - 1.0),
        power: pp,
    });
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::Cone;
    use crate::quadrature::integrate_radial;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn w_const_1d() -> Weight {
        Weight::constant(Cone::full_space(1).unwrap(), 1.0).unwrap()
    }

    fn w_xy() -> Weight {
        Weight::monomial(Cone::positive_orthant(2).unwrap(), vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn sharp_constant_reference_values() {
        // p=2, n=1, w=1 on R: 2/(e pi)
        let s = sharp_constant(2.0, &w_const_1d()).unwrap();
        assert_relative_eq!(s.value, 2.0 / (std::f64::consts::E * std::f64::consts::PI), max_relative = 1e-13);
        assert_abs_diff_eq!(s.value, 0.234199, epsilon = 1e-6);

        // p=2, n=2, w=1 on R^2: 1/(e pi)
        let w2 = Weight::constant(Cone::full_space(2).unwrap(), 1.0).unwrap();
        let s2 = sharp_constant(2.0, &w2).unwrap();
        assert_relative_eq!(s2.value, 1.0 / (std::f64::consts::E * std::f64::consts::PI), max_relative = 1e-13);
    }

    #[test]
    fn sharp_constant_rejects_p_at_most_one() {
        assert!(sharp_constant(1.0, &w_const_1d()).is_err());
    }

    #[test]
    fn proof_constants_consistency_identity() {
        // e^{p C2/(n+tau)} / (n+tau)^p * C4^p == L, to machine precision
        let weights = [
            w_const_1d(),
            Weight::constant(Cone::full_space(2).unwrap(), 1.0).unwrap(),
            Weight::constant(Cone::half_space(vec![1.0, 0.0]).unwrap(), 2.0).unwrap(),
            w_xy(),
            Weight::monomial(Cone::positive_orthant(1).unwrap(), vec![1.5]).unwrap(),
            Weight::monomial(Cone::positive_orthant(3).unwrap(), vec![1.0, 0.5, 2.0]).unwrap(),
        ];
        for p in [1.5, 2.0, 3.0, 5.0] {
            for w in &weights {
                let beta = w.cone().dim() as f64 + w.degree();
                let c = proof_constants(p, w).unwrap();
                let l = sharp_constant(p, w).unwrap().value;
                assert_relative_eq!(c.consistency(p, beta), l, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn c3_equals_c2_for_unit_weight() {
        let c = proof_constants(2.0, &w_const_1d()).unwrap();
        assert_abs_diff_eq!(c.c3, c.c2, epsilon = 1e-14);
        // constant weight c != 1 shifts C3 by log c
        let w = Weight::constant(Cone::full_space(2).unwrap(), 3.0).unwrap();
        let c = proof_constants(2.0, &w).unwrap();
        assert_relative_eq!(c.c3 - c.c2, 3f64.ln(), max_relative = 1e-13);
    }

    #[test]
    fn c4_reference_value() {
        // p=2, n=1, tau=0: C4 = 2 (1/2)^{1/2} = sqrt(2)
        let c = proof_constants(2.0, &w_const_1d()).unwrap();
        assert_relative_eq!(c.c4, 2f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn c3_radial_angular_matches_grid_for_monomial() {
        // the split route and the brute grid route must agree
        let w = w_xy();
        let pp = 2.0;
        let split = model_log_weight_integral(&w, pp).unwrap();
        let r = tail_radius(pp);
        let rule = GridRule::new(w.cone(), vec![0.0, 0.0], vec![r, r], 384).unwrap();
        let grid = integrate_weighted(
            &w,
            |x| {
                let rr = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                (-rr.powf(pp)).exp() * w.value(x).ln()
            },
            &rule,
        )
        .unwrap();
        assert_abs_diff_eq!(split, grid, epsilon = 2e-4);
    }

    #[test]
    fn gaussian_extremal_normalization_by_radial_quadrature() {
        for w in [w_const_1d(), w_xy()] {
            for p in [1.5, 2.0, 3.0, 5.0] {
                for lambda in [0.5, 1.0, 2.0] {
                    let g = GaussianExtremal::new(lambda, vec![0.0; w.cone().dim()], p, &w).unwrap();
                    let f = g.as_test_function();
                    let prof = f.radial().unwrap().value.clone();
                    let tail = f.tail().unwrap().power(p);
                    let mass =
                        integrate_radial(&w, |r| prof(r).powf(p), Some(&tail), 32).unwrap();
                    assert_relative_eq!(mass, 1.0, max_relative = 1e-8);
                }
            }
        }
    }

    #[test]
    fn gaussian_extremal_prefactor_and_shift() {
        let w = w_const_1d();
        let g = GaussianExtremal::new(1.3, vec![0.0], 2.0, &w).unwrap();
        // at the apex the value is the normalization prefactor itself
        assert_abs_diff_eq!(g.eval(&[0.0]), g.norm_const);
        // shifting the argument equals shifting the center
        let gs = GaussianExtremal::new(1.3, vec![0.4], 2.0, &w).unwrap();
        assert_abs_diff_eq!(gs.eval(&[0.2]), g.eval(&[0.6]), epsilon = 1e-15);
    }

    #[test]
    fn gaussian_extremal_shift_requires_invariance() {
        let w = w_xy();
        assert!(matches!(
            GaussianExtremal::new(1.0, vec![0.5, 0.0], 2.0, &w),
            Err(CoreError::TranslationNotInvariant(_))
        ));
    }

    #[test]
    fn checked_evaluation_rejects_exterior_points() {
        let w = w_xy();
        let g = GaussianExtremal::new(1.0, vec![0.0, 0.0], 2.0, &w).unwrap();
        assert!(g.eval_checked(w.cone(), &[0.5, 0.5]).is_ok());
        assert!(matches!(
            g.eval_checked(w.cone(), &[-0.5, 0.5]),
            Err(CoreError::DomainError(_))
        ));
    }

    #[test]
    fn gaussian_extremal_gradient_energy_closed_form_vs_quadrature() {
        for p in [1.5, 2.0, 3.0] {
            let w = w_xy();
            let g = GaussianExtremal::new(1.0, vec![0.0, 0.0], p, &w).unwrap();
            let f = g.as_test_function();
            let deriv = f.radial().unwrap().derivative.clone();
            let tail = f.tail().unwrap().power(p);
            let energy =
                integrate_radial(&w, |r| deriv(r).abs().powf(p), Some(&tail), 32).unwrap();
            assert_relative_eq!(energy, g.gradient_energy_closed_form(), max_relative = 1e-9);
        }
    }

    #[test]
    fn gaussian_extremal_gradient_validates() {
        let w = w_xy();
        let g = GaussianExtremal::new(2.0, vec![0.0, 0.0], 3.0, &w).unwrap();
        let f = g.as_test_function();
        let worst = f.validate_gradient(w.cone(), 100, 9).unwrap();
        assert!(worst < 1e-5, "worst = {worst}");
    }

    #[test]
    fn indicator_extremal_mass_is_one() {
        let w = w_xy();
        let ind = IndicatorExtremal::new(1.5, vec![0.0, 0.0], &w).unwrap();
        // int over E of height * 1_{B(0,lambda)} w = height lambda^{n+tau} M_B = 1
        let beta = 4.0;
        let mass = ind.height * ind.lambda.powf(beta) * ind.ball_mass;
        assert_relative_eq!(mass, 1.0, max_relative = 1e-14);
        assert_abs_diff_eq!(ind.eval(&[0.1, 0.1]), ind.height);
        assert_abs_diff_eq!(ind.eval(&[2.0, 2.0]), 0.0);
    }

    #[test]
    fn hyper_extremal_reference_case() {
        // p=2, alpha=1, beta=2, ttilde=1: g(x) = -|x|^2/4
        let g = hyper_extremal_g(2.0, 1.0, 2.0, 1.0, vec![0.0], 0.0).unwrap();
        for x in [0.0, 0.7, -1.3, 2.5] {
            assert_abs_diff_eq!(g.eval(&[x]), -x * x / 4.0, epsilon = 1e-14);
        }
        // coefficient vanishes as beta -> alpha+
        let g_flat = hyper_extremal_g(2.0, 1.0, 1.0 + 1e-12, 1.0, vec![0.0], 0.7).unwrap();
        assert_abs_diff_eq!(g_flat.eval(&[3.0]), 0.7, epsilon = 1e-10);
        // alpha >= beta is rejected
        assert!(matches!(
            hyper_extremal_g(2.0, 2.0, 1.0, 1.0, vec![0.0], 0.0),
            Err(CoreError::AlphaBetaOrder { .. })
        ));
    }

    #[test]
    fn hyper_extremal_exp_is_integrable() {
        // e^g has a Gaussian-type tail certificate that indeed bounds it
        let g = hyper_extremal_g(2.0, 1.0, 2.0, 1.0, vec![0.3], 0.0).unwrap();
        if let Some(TailBound::GaussianType { coeff, rate, power }) = g.tail() {
            for r in [2.0f64, 4.0, 8.0] {
                let eg = g.eval(&[r]).exp();
                let bound = coeff * (-rate * r.powf(*power)).exp();
                assert!(eg <= bound * (1.0 + 1e-12), "r={r}: {eg} vs {bound}");
            }
        } else {
            panic!("expected a Gaussian tail certificate for e^g");
        }
    }

    #[test]
    fn unweighted_limit_matches_weighted_formula() {
        // tau -> 0 with constant weight reduces to the unweighted constant
        let w = Weight::constant(Cone::full_space(3).unwrap(), 1.0).unwrap();
        let s = sharp_constant(2.5, &w).unwrap();
        let n = 3.0;
        let pp = conjugate(2.5);
        let omega_n = std::f64::consts::PI.powf(n / 2.0) / gamma(n / 2.0 + 1.0);
        let unweighted = 2.5 / n
            * ((2.5 - 1.0) / std::f64::consts::E).powf(1.5)
            * (gamma(n / pp + 1.0) * omega_n).powf(-2.5 / n);
        assert_relative_eq!(s.value, unweighted, max_relative = 1e-13);
    }
}
