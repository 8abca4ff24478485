//! The building blocks of both sides of the inequalities: weighted L^p
//! norms, entropy, gradient energy, weighted ball perimeter, and the
//! assembled log-Sobolev deficits for p > 1 and p = 1.

use serde::Serialize;

use crate::constants::{sharp_constant, IndicatorExtremal};
use crate::error::CoreError;
use crate::quadrature::{integrate_radial, integrate_weighted, ConeMass, GridRule, Quadrature};
use crate::testfn::TestFunction;
use crate::weight::Weight;
use crate::Result;

/// Normalization and quadrature-slack tolerances.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Tolerances {
    pub eps_norm: f64,
    pub eps_quad: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { eps_norm: 1e-6, eps_quad: 1e-3 }
    }
}

/// Whether gradient energy may fall back to finite differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdPolicy {
    AnalyticOnly,
    AllowFallback,
}

/// One deficit experiment: inputs, both sides, and the verdict.
#[derive(Debug, Clone, Serialize)]
pub struct DeficitReport {
    pub p: f64,
    pub entropy_lhs: f64,
    /// `int |grad u|^p w` for p > 1; the BV variation norm for p = 1.
    pub gradient_energy: f64,
    pub rhs: f64,
    pub deficit: f64,
    pub normalization: f64,
    pub eps_norm: f64,
    pub eps_quad: f64,
    pub pass: bool,
}

/// `int_E |u|^p w dx` by the requested quadrature.
pub fn weighted_p_mass(u: &TestFunction, p: f64, w: &Weight, q: &Quadrature) -> Result<f64> {
    match q {
        Quadrature::Radial { order } => {
            let prof = u
                .radial()
                .ok_or_else(|| CoreError::InvalidInput("radial quadrature needs a radial profile".into()))?
                .value
                .clone();
            let tail = u.tail().ok_or(CoreError::TailUnbounded)?.power(p);
            integrate_radial(w, |r| prof(r).abs().powf(p), Some(&tail), *order)
        }
        Quadrature::Grid(rule) => integrate_weighted(w, |x| u.eval(x).abs().powf(p), rule),
    }
}

/// `(int_E |u|^p w dx)^{1/p}`.
pub fn lp_norm(u: &TestFunction, p: f64, w: &Weight, q: &Quadrature) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(CoreError::OutOfRange(format!("need p >= 1, got {p}")));
    }
    Ok(weighted_p_mass(u, p, w, q)?.powf(1.0 / p))
}

/// Rescale `u` so that `int |u|^p w = 1` under the given quadrature.
pub fn normalize(u: &TestFunction, p: f64, w: &Weight, q: &Quadrature) -> Result<TestFunction> {
    let norm = lp_norm(u, p, w, q)?;
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(CoreError::NotNormalized(norm));
    }
    Ok(u.scaled_by(1.0 / norm))
}

fn xlogx(t: f64) -> f64 {
    if t > 0.0 {
        t * t.ln()
    } else {
        0.0
    }
}

fn entropy_unchecked(u: &TestFunction, p: f64, w: &Weight, q: &Quadrature) -> Result<f64> {
    match q {
        Quadrature::Radial { order } => {
            let prof = u
                .radial()
                .ok_or_else(|| CoreError::InvalidInput("radial quadrature needs a radial profile".into()))?
                .value
                .clone();
            let tail = u.tail().ok_or(CoreError::TailUnbounded)?.power(p);
            integrate_radial(w, |r| xlogx(prof(r).abs().powf(p)), Some(&tail), *order)
        }
        Quadrature::Grid(rule) => integrate_weighted(w, |x| xlogx(u.eval(x).abs().powf(p)), rule),
    }
}

/// Entropy `int |u|^p log |u|^p w dx` of a normalized function; the
/// integrand uses the continuous extension `t log t = 0` at `t = 0`.
pub fn entropy(u: &TestFunction, p: f64, w: &Weight, q: &Quadrature, eps_norm: f64) -> Result<f64> {
    let mass = weighted_p_mass(u, p, w, q)?;
    if (mass - 1.0).abs() > eps_norm {
        return Err(CoreError::NotNormalized(mass));
    }
    entropy_unchecked(u, p, w, q)
}

/// `int_E |grad u|^p w dx`; analytic gradient preferred, central finite
/// differences as a fallback when the policy allows it.
pub fn gradient_energy(
    u: &TestFunction,
    p: f64,
    w: &Weight,
    q: &Quadrature,
    policy: FdPolicy,
) -> Result<f64> {
    match q {
        Quadrature::Radial { order } => {
            let prof = u
                .radial()
                .ok_or_else(|| CoreError::InvalidInput("radial quadrature needs a radial profile".into()))?;
            let deriv = prof.derivative.clone();
            let tail = u.tail().ok_or(CoreError::TailUnbounded)?.power(p);
            integrate_radial(w, |r| deriv(r).abs().powf(p), Some(&tail), *order)
        }
        Quadrature::Grid(rule) => {
            if !u.has_gradient() && policy == FdPolicy::AnalyticOnly {
                return Err(CoreError::GradientUnavailable);
            }
            let use_analytic = u.has_gradient();
            integrate_weighted(
                w,
                |x| {
                    let g = if use_analytic {
                        u.gradient_at(x).unwrap()
                    } else {
                        u.fd_gradient(x)
                    };
                    g.iter().map(|v| v * v).sum::<f64>().powf(p / 2.0)
                },
                rule,
            )
        }
    }
}

/// Weighted perimeter of `B(-x0, lambda) cap E` relative to the cone:
/// `lambda^{n+tau-1} w_SE`, valid under the translation-invariance hypothesis.
pub fn perimeter_ball(w: &Weight, lambda: f64, x0: &[f64]) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(CoreError::OutOfRange(format!("need lambda > 0, got {lambda}")));
    }
    w.check_translation_invariance(x0, 64, 77)?;
    let beta = w.cone().dim() as f64 + w.degree();
    let mass = ConeMass::compute(w)?;
    Ok(lambda.powf(beta - 1.0) * mass.sphere_mass)
}

/// Log-Sobolev deficit for p > 1:
/// `rhs = (n+tau)/p log(L int |grad u|^p w)`, `deficit = rhs - entropy`.
pub fn deficit_p(
    u: &TestFunction,
    p: f64,
    w: &Weight,
    q: &Quadrature,
    tol: &Tolerances,
) -> Result<DeficitReport> {
    if !(p > 1.0) {
        return Err(CoreError::OutOfRange(format!("need p > 1, got {p}")));
    }
    let beta = w.cone().dim() as f64 + w.degree();
    let mass = weighted_p_mass(u, p, w, q)?;
    let ent = entropy_unchecked(u, p, w, q)?;
    let energy = gradient_energy(u, p, w, q, FdPolicy::AllowFallback)?;
    let l = sharp_constant(p, w)?.value;
    let rhs = beta / p * (l * energy).ln();
    let deficit = rhs - ent;
    Ok(DeficitReport {
        p,
        entropy_lhs: ent,
        gradient_energy: energy,
        rhs,
        deficit,
        normalization: mass,
        eps_norm: tol.eps_norm,
        eps_quad: tol.eps_quad,
        pass: deficit >= -tol.eps_quad && (mass - 1.0).abs() <= tol.eps_norm,
    })
}

/// How the entropy side of the p = 1 deficit is evaluated.
#[derive(Debug, Clone)]
pub enum EntropyRoute {
    /// The integrand is constant on the support; everything is in closed form.
    ClosedForm,
    /// Recompute the entropy by grid quadrature of the indicator density.
    Grid(GridRule),
}

/// Log-Sobolev deficit for p = 1 on the normalized indicator family.
/// The variation norm `||D|u|||_w = (lambda^{-(n+tau)}/M_B) P_w(B cap E)`
/// stands in for the BV side; `rhs = (n+tau) log(M_B^{-1/(n+tau)}/(n+tau) ||D|u|||_w)`.
pub fn deficit_1(
    lambda: f64,
    x0: &[f64],
    w: &Weight,
    route: EntropyRoute,
    tol: &Tolerances,
) -> Result<DeficitReport> {
    let beta = w.cone().dim() as f64 + w.degree();
    let ind = IndicatorExtremal::new(lambda, x0.to_vec(), w)?;
    let perimeter = perimeter_ball(w, lambda, x0)?;
    let variation = lambda.powf(-beta) / ind.ball_mass * perimeter;
    let rhs = beta * (ind.ball_mass.powf(-1.0 / beta) / beta * variation).ln();
    let (lhs, mass) = match route {
        EntropyRoute::ClosedForm => ((lambda.powf(-beta) / ind.ball_mass).ln(), 1.0),
        EntropyRoute::Grid(rule) => {
            let u = ind.as_test_function();
            let mass = weighted_p_mass(&u, 1.0, w, &Quadrature::Grid(rule.clone()))?;
            let ent = entropy_unchecked(&u, 1.0, w, &Quadrature::Grid(rule))?;
            (ent, mass)
        }
    };
    let deficit = rhs - lhs;
    Ok(DeficitReport {
        p: 1.0,
        entropy_lhs: lhs,
        gradient_energy: variation,
        rhs,
        deficit,
        normalization: mass,
        eps_norm: tol.eps_norm,
        eps_quad: tol.eps_quad,
        pass: deficit.abs() <= tol.eps_quad && (mass - 1.0).abs() <= tol.eps_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::Cone;
    use crate::constants::GaussianExtremal;
    use crate::testfn::{bump, gaussian_mixture};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn w1() -> Weight {
        Weight::constant(Cone::full_space(1).unwrap(), 1.0).unwrap()
    }

    fn w_xy() -> Weight {
        Weight::monomial(Cone::positive_orthant(2).unwrap(), vec![1.0, 1.0]).unwrap()
    }

    fn radial() -> Quadrature {
        Quadrature::radial()
    }

    #[test]
    fn gaussian_extremal_has_unit_norm() {
        for w in [w1(), w_xy()] {
            let g = GaussianExtremal::new(1.0, vec![0.0; w.cone().dim()], 2.0, &w).unwrap();
            let u = g.as_test_function();
            assert_relative_eq!(lp_norm(&u, 2.0, &w, &radial()).unwrap(), 1.0, max_relative = 1e-8);
        }
    }

    #[test]
    fn zero_function_has_zero_norm() {
        let u = TestFunction::new("zero", |_| 0.0)
            .with_radial(|_| 0.0, |_| 0.0)
            .with_tail(crate::testfn::TailBound::CompactSupport { radius: 1.0 });
        assert_eq!(lp_norm(&u, 2.0, &w1(), &radial()).unwrap(), 0.0);
    }

    #[test]
    fn lp_norm_is_dilation_invariant() {
        // ||t^{(n+tau)/p} u(t .)||_p = ||u||_p
        let w = w1();
        let g = GaussianExtremal::new(1.0, vec![0.0], 2.0, &w).unwrap().as_test_function();
        let ut = g.dilated(2.0, 0.5);
        let rule = GridRule::new(w.cone(), vec![-10.0], vec![10.0], 2048).unwrap();
        let n0 = lp_norm(&g, 2.0, &w, &Quadrature::Grid(rule.clone())).unwrap();
        let n1 = lp_norm(&ut, 2.0, &w, &Quadrature::Grid(rule)).unwrap();
        assert_relative_eq!(n0, n1, max_relative = 1e-8);
    }

    #[test]
    fn entropy_requires_normalization() {
        let w = w1();
        let g = GaussianExtremal::new(1.0, vec![0.0], 2.0, &w).unwrap().as_test_function();
        let too_big = g.scaled_by(2.0);
        assert!(matches!(
            entropy(&too_big, 2.0, &w, &radial(), 1e-6),
            Err(CoreError::NotNormalized(_))
        ));
    }

    #[test]
    fn entropy_closed_form_for_gaussian_extremal() {
        for (w, p, lambda) in [(w1(), 2.0, 1.0), (w1(), 3.0, 0.5), (w_xy(), 1.5, 2.0)] {
            let g = GaussianExtremal::new(lambda, vec![0.0; w.cone().dim()], p, &w).unwrap();
            let u = g.as_test_function();
            let ent = entropy(&u, p, &w, &radial(), 1e-6).unwrap();
            assert_abs_diff_eq!(ent, g.entropy_closed_form(), epsilon = 1e-8);
        }
    }

    #[test]
    fn entropy_scaling_identity() {
        // E(|u_t|^p) - E(|u|^p) = (n+tau) log t for u_t = t^{(n+tau)/p} u(t.)
        for (w, p) in [(w1(), 2.0), (w_xy(), 2.0)] {
            let beta = w.cone().dim() as f64 + w.degree();
            let g = GaussianExtremal::new(1.0, vec![0.0; w.cone().dim()], p, &w).unwrap();
            let u = g.as_test_function();
            let e0 = entropy(&u, p, &w, &radial(), 1e-6).unwrap();
            for t in [0.5, 2.0] {
                let ut = u.dilated(t, beta / p);
                let et = entropy(&ut, p, &w, &radial(), 1e-6).unwrap();
                assert_abs_diff_eq!(et - e0, beta * t.ln(), epsilon = 1e-5);
            }
        }
    }

    #[test]
    fn entropy_of_uniform_unit_mass_density_is_zero() {
        // normalized indicator of a set of weighted measure 1 has |u| = 1
        let w = w1();
        // interval [-1/2, 1/2] has w-mass 1, so the indicator has height 1
        let u = TestFunction::new("unit_box", |x: &[f64]| if x[0].abs() <= 0.5 { 1.0 } else { 0.0 })
            .with_tail(crate::testfn::TailBound::CompactSupport { radius: 0.5 });
        let rule = GridRule::new(w.cone(), vec![-1.0], vec![1.0], 1000).unwrap();
        let q = Quadrature::Grid(rule);
        assert_abs_diff_eq!(weighted_p_mass(&u, 1.0, &w, &q).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(entropy(&u, 1.0, &w, &q, 1e-6).unwrap(), 0.0);
    }

    #[test]
    fn gradient_energy_closed_form_and_fd_agreement() {
        let w = w1();
        let g = GaussianExtremal::new(1.0, vec![0.0], 2.0, &w).unwrap();
        let u = g.as_test_function();
        let by_radial = gradient_energy(&u, 2.0, &w, &radial(), FdPolicy::AnalyticOnly).unwrap();
        assert_relative_eq!(by_radial, g.gradient_energy_closed_form(), max_relative = 1e-9);

        // grid route with analytic gradient vs FD fallback
        let rule = GridRule::new(w.cone(), vec![-10.0], vec![10.0], 2048).unwrap();
        let q = Quadrature::Grid(rule);
        let analytic = gradient_energy(&u, 2.0, &w, &q, FdPolicy::AnalyticOnly).unwrap();
        let stripped = TestFunction::new("no_grad", {
            let g2 = g.clone();
            move |x: &[f64]| g2.eval(x)
        });
        let fd = gradient_energy(&stripped, 2.0, &w, &q, FdPolicy::AllowFallback).unwrap();
        assert_relative_eq!(analytic, fd, max_relative = 1e-4);
        assert!(matches!(
            gradient_energy(&stripped, 2.0, &w, &q, FdPolicy::AnalyticOnly),
            Err(CoreError::GradientUnavailable)
        ));
    }

    #[test]
    fn gradient_energy_of_constant_is_zero_on_interior() {
        let w = w1();
        let u = TestFunction::new("const", |_| 1.0).with_gradient(|x| vec![0.0; x.len()]);
        let rule = GridRule::new(w.cone(), vec![-1.0], vec![1.0], 64).unwrap();
        assert_eq!(
            gradient_energy(&u, 2.0, &w, &Quadrature::Grid(rule), FdPolicy::AnalyticOnly).unwrap(),
            0.0
        );
    }

    #[test]
    fn perimeter_examples() {
        // circle length
        let w2 = Weight::constant(Cone::full_space(2).unwrap(), 1.0).unwrap();
        assert_relative_eq!(
            perimeter_ball(&w2, 1.0, &[0.0, 0.0]).unwrap(),
            2.0 * std::f64::consts::PI,
            max_relative = 1e-13
        );
        // monomial xy on the quadrant at lambda = 2: 2^3 * 1/2 = 4
        assert_relative_eq!(perimeter_ball(&w_xy(), 2.0, &[0.0, 0.0]).unwrap(), 4.0, max_relative = 1e-13);
        // lambda = 1 gives exactly w_SE = (n+tau) M_B
        let mass = ConeMass::compute(&w_xy()).unwrap();
        assert_relative_eq!(
            perimeter_ball(&w_xy(), 1.0, &[0.0, 0.0]).unwrap(),
            mass.sphere_mass,
            max_relative = 1e-15
        );
        // shifted center requires invariance
        assert!(matches!(
            perimeter_ball(&w_xy(), 1.0, &[0.1, 0.0]),
            Err(CoreError::TranslationNotInvariant(_))
        ));
    }

    #[test]
    fn deficit_vanishes_on_the_extremal_family() {
        let tol = Tolerances::default();
        for w in [w1(), w_xy()] {
            for lambda in [0.5, 1.0, 2.0] {
                let g = GaussianExtremal::new(lambda, vec![0.0; w.cone().dim()], 2.0, &w).unwrap();
                let u = g.as_test_function();
                let rep = deficit_p(&u, 2.0, &w, &radial(), &tol).unwrap();
                assert!(rep.deficit.abs() <= 1e-4, "lambda={lambda}: {}", rep.deficit);
                assert!(rep.pass);
            }
        }
    }

    #[test]
    fn sharp_constant_appears_in_rhs() {
        // p=2, n=1, w=1: rhs = (1/2) log(L E) with L = 2/(e pi)
        let w = w1();
        let g = GaussianExtremal::new(1.0, vec![0.0], 2.0, &w).unwrap();
        let u = g.as_test_function();
        let rep = deficit_p(&u, 2.0, &w, &radial(), &Tolerances::default()).unwrap();
        let l = 2.0 / (std::f64::consts::E * std::f64::consts::PI);
        assert_relative_eq!(
            rep.rhs,
            0.5 * (l * rep.gradient_energy).ln(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn boundary_shifted_extremal_still_achieves_equality() {
        // on a half-plane the extremal family admits shifts along the
        // boundary hyperplane; the deficit stays zero
        let cone = Cone::half_space(vec![0.0, 1.0]).unwrap();
        let w = Weight::constant(cone.clone(), 1.0).unwrap();
        let g = GaussianExtremal::new(1.0, vec![0.8, 0.0], 2.0, &w).unwrap();
        let u = g.as_test_function();
        let rule = GridRule::new(&cone, vec![-10.0, 0.0], vec![10.0, 10.0], 400).unwrap();
        let q = Quadrature::Grid(rule);
        let rep = deficit_p(&u, 2.0, &w, &q, &Tolerances::default()).unwrap();
        assert!((rep.normalization - 1.0).abs() <= 1e-5, "mass {}", rep.normalization);
        assert!(rep.deficit.abs() <= 1e-3, "deficit {}", rep.deficit);
    }

    #[test]
    fn mixture_has_strictly_positive_deficit() {
        let w = w1();
        let raw = gaussian_mixture(vec![1.0, 0.8], vec![1.0, 1.4], vec![vec![-2.0], vec![2.0]]);
        let rule = GridRule::new(w.cone(), vec![-14.0], vec![14.0], 4096).unwrap();
        let q = Quadrature::Grid(rule);
        let u = normalize(&raw, 2.0, &w, &q).unwrap();
        let rep = deficit_p(&u, 2.0, &w, &q, &Tolerances::default()).unwrap();
        assert!(rep.deficit > 0.01, "deficit = {}", rep.deficit);
        assert!(rep.pass);
    }

    #[test]
    fn deficit_is_dilation_invariant() {
        // both sides of the inequality shift consistently under dilation
        let w = w1();
        let p = 2.0;
        let raw = gaussian_mixture(vec![1.0, 0.5], vec![1.0, 0.7], vec![vec![-1.5], vec![1.0]]);
        let rule = GridRule::new(w.cone(), vec![-24.0], vec![24.0], 8192).unwrap();
        let q = Quadrature::Grid(rule);
        let u0 = normalize(&raw, p, &w, &q).unwrap();
        let d0 = deficit_p(&u0, p, &w, &q, &Tolerances::default()).unwrap().deficit;
        for t in [0.5, 2.0] {
            let ut = u0.dilated(t, 1.0 / p);
            let dt = deficit_p(&ut, p, &w, &q, &Tolerances::default()).unwrap().deficit;
            assert_abs_diff_eq!(dt, d0, epsilon = 1e-5);
        }
    }

    #[test]
    fn entropy_jensen_lower_bound_on_compact_support() {
        // normalized density supported on S satisfies entropy >= -log w(S)
        let w = w1();
        let raw = bump(vec![0.3], 2.0, 1.0);
        let rule = GridRule::new(w.cone(), vec![-3.0], vec![3.0], 4096).unwrap();
        let q = Quadrature::Grid(rule);
        let u = normalize(&raw, 2.0, &w, &q).unwrap();
        let ent = entropy(&u, 2.0, &w, &q, 1e-6).unwrap();
        let support_mass = 4.0f64; // interval of length 4, unit weight
        assert!(ent >= -support_mass.ln() - 1e-6, "ent = {ent}");
    }

    #[test]
    fn deficit_1_closed_form_is_exact() {
        let tol = Tolerances::default();
        for w in [w1(), w_xy(), Weight::constant(Cone::full_space(2).unwrap(), 1.0).unwrap()] {
            for lambda in [0.5, 1.0, 3.0] {
                let rep =
                    deficit_1(lambda, &vec![0.0; w.cone().dim()], &w, EntropyRoute::ClosedForm, &tol)
                        .unwrap();
                assert!(rep.deficit.abs() <= 1e-12, "deficit = {}", rep.deficit);
                assert!(rep.pass);
            }
        }
    }

    #[test]
    fn deficit_1_unit_disk_entropy() {
        // lambda = 1, w = 1, E = R^2: lhs = -log pi
        let w = Weight::constant(Cone::full_space(2).unwrap(), 1.0).unwrap();
        let rep = deficit_1(1.0, &[0.0, 0.0], &w, EntropyRoute::ClosedForm, &Tolerances::default())
            .unwrap();
        assert_relative_eq!(rep.entropy_lhs, -std::f64::consts::PI.ln(), max_relative = 1e-13);
    }

    #[test]
    fn deficit_1_grid_entropy_route() {
        let w = Weight::constant(Cone::full_space(2).unwrap(), 1.0).unwrap();
        let rule = GridRule::new(w.cone(), vec![-1.5, -1.5], vec![1.5, 1.5], 512).unwrap();
        let rep = deficit_1(
            1.0,
            &[0.0, 0.0],
            &w,
            EntropyRoute::Grid(rule),
            &Tolerances::default(),
        )
        .unwrap();
        assert!(rep.deficit.abs() <= 1e-3, "deficit = {}", rep.deficit);
    }

    #[test]
    fn deficit_1_detects_radius_mismatch() {
        // perimeter of lambda paired with the mass/entropy of 1.1 lambda;
        // the perimeter only carries lambda-dependence for n + tau > 1
        let w = Weight::constant(Cone::full_space(2).unwrap(), 1.0).unwrap();
        let beta = 2.0;
        let lam = 1.0;
        let ind = IndicatorExtremal::new(1.1 * lam, vec![0.0, 0.0], &w).unwrap();
        let perimeter = perimeter_ball(&w, lam, &[0.0, 0.0]).unwrap();
        let variation = (1.1f64 * lam).powf(-beta) / ind.ball_mass * perimeter;
        let rhs = beta * (ind.ball_mass.powf(-1.0 / beta) / beta * variation).ln();
        let lhs = ((1.1f64 * lam).powf(-beta) / ind.ball_mass).ln();
        assert!((rhs - lhs).abs() > 0.05, "gap = {}", rhs - lhs);
    }
}
