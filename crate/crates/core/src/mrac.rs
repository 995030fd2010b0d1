//! Model-reference adaptive torque control: reference model, control law,
//! adaptation dynamics and the diagnostic Lyapunov-function value.

use crate::error::{Error, Result};
use crate::lyapunov::{is_hurwitz, require_spd, solve_lyapunov};
use crate::ode::rk4_step;
use nalgebra::{Matrix2, Vector2};

/// Stable second-order reference model with its integrated state.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceModel {
    pub a_m: Matrix2<f64>,
    pub b_m: Vector2<f64>,
    pub state: Vector2<f64>,
}

impl ReferenceModel {
    pub fn new(a_m: Matrix2<f64>, b_m: Vector2<f64>, initial: Vector2<f64>) -> Result<Self> {
        if !is_hurwitz(&a_m) {
            return Err(Error::NotHurwitz {
                trace: a_m.trace(),
                det: a_m.determinant(),
            });
        }
        Ok(ReferenceModel {
            a_m,
            b_m,
            state: initial,
        })
    }

    pub fn derivative(&self, state: &Vector2<f64>, r: f64) -> Vector2<f64> {
        self.a_m * state + self.b_m * r
    }
}

/// Advance the reference model by `dt` under a held reference value,
/// integrating with the same fixed-step scheme as the plant.
pub fn reference_step(rm: &mut ReferenceModel, r: f64, dt: f64, substeps: usize) {
    debug_assert!(dt > 0.0 && substeps > 0);
    let h = dt / substeps as f64;
    let mut y = [rm.state[0], rm.state[1]];
    for i in 0..substeps {
        let t = i as f64 * h;
        y = rk4_step(
            |_, s: &[f64; 2]| {
                let d = rm.derivative(&Vector2::new(s[0], s[1]), r);
                Ok([d[0], d[1]])
            },
            t,
            &y,
            h,
        )
        .expect("reference model derivative is finite");
    }
    rm.state = Vector2::new(y[0], y[1]);
}

/// Estimated controller gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveGains {
    pub k_x: Vector2<f64>,
    pub k_r: f64,
    pub theta: Vector2<f64>,
}

impl AdaptiveGains {
    pub fn zero() -> Self {
        AdaptiveGains {
            k_x: Vector2::zeros(),
            k_r: 0.0,
            theta: Vector2::zeros(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.k_x.iter().all(|v| v.is_finite())
            && self.k_r.is_finite()
            && self.theta.iter().all(|v| v.is_finite())
    }
}

/// Time-derivatives of the adaptive gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainRates {
    pub k_x: Vector2<f64>,
    pub k_r: f64,
    pub theta: Vector2<f64>,
}

/// Adaptation gains, Lyapunov pair and back-stepping constants.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptationConfig {
    pub gamma_x: Matrix2<f64>,
    pub gamma_r: f64,
    pub gamma_theta: Matrix2<f64>,
    pub q: Matrix2<f64>,
    pub p: Matrix2<f64>,
    pub k1: f64,
    pub k2: f64,
    /// Input scaling of the limb subsystem, `1 / (m d3^2)`.
    pub lambda: f64,
    gamma_x_inv: Matrix2<f64>,
    gamma_theta_inv: Matrix2<f64>,
}

impl AdaptationConfig {
    /// Build and validate. When `p` is `None` it is solved from `q`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        gamma_x: Matrix2<f64>,
        gamma_r: f64,
        gamma_theta: Matrix2<f64>,
        q: Matrix2<f64>,
        p: Option<Matrix2<f64>>,
        k1: f64,
        k2: f64,
        lambda: f64,
        a_m: &Matrix2<f64>,
    ) -> Result<Self> {
        require_spd(&gamma_x, "gamma_x")?;
        require_spd(&gamma_theta, "gamma_theta")?;
        require_spd(&q, "Q")?;
        if !(gamma_r > 0.0) {
            return Err(Error::Validation(format!(
                "gamma_r must be positive (got {gamma_r})"
            )));
        }
        for (name, v) in [("k1", k1), ("k2", k2)] {
            if !(v > 0.0) {
                return Err(Error::Validation(format!(
                    "{name} must be positive (got {v})"
                )));
            }
        }
        if !(lambda > 0.0) {
            return Err(Error::Validation(format!(
                "lambda must be positive (got {lambda})"
            )));
        }
        let p = match p {
            Some(p) => {
                require_spd(&p, "P")?;
                p
            }
            None => solve_lyapunov(a_m, &q)?,
        };
        let gamma_x_inv = gamma_x.try_inverse().ok_or_else(|| {
            Error::Validation("gamma_x is not invertible".to_string())
        })?;
        let gamma_theta_inv = gamma_theta.try_inverse().ok_or_else(|| {
            Error::Validation("gamma_theta is not invertible".to_string())
        })?;
        Ok(AdaptationConfig {
            gamma_x,
            gamma_r,
            gamma_theta,
            q,
            p,
            k1,
            k2,
            lambda,
            gamma_x_inv,
            gamma_theta_inv,
        })
    }

    /// `P B` with `B = [0, 1]'`.
    pub fn p_b(&self) -> Vector2<f64> {
        Vector2::new(self.p[(0, 1)], self.p[(1, 1)])
    }

    /// `e' P B`, the scalar error projection driving adaptation.
    pub fn error_projection(&self, e: &Vector2<f64>) -> f64 {
        e.dot(&self.p_b())
    }
}

/// Known nonlinearity basis: `[sin(x1), 1]`.
pub fn regressor(x: &Vector2<f64>) -> Vector2<f64> {
    Vector2::new(x[0].sin(), 1.0)
}

/// Adaptive control torque `v_x = K_x' X + K_r r + theta' Phi(X)`.
pub fn control_vx(g: &AdaptiveGains, x: &Vector2<f64>, r: f64) -> f64 {
    g.k_x.dot(x) + g.k_r * r + g.theta.dot(&regressor(x))
}

/// Gradient adaptation laws.
pub fn adaptation_rates(
    e: &Vector2<f64>,
    x: &Vector2<f64>,
    r: f64,
    phi: &Vector2<f64>,
    cfg: &AdaptationConfig,
) -> GainRates {
    let e_pb = cfg.error_projection(e);
    GainRates {
        k_x: -cfg.gamma_x * x * e_pb,
        k_r: -cfg.gamma_r * r * e_pb,
        theta: -cfg.gamma_theta * phi * e_pb,
    }
}

/// Fixed gains solving the matching conditions
/// `A + B Lambda K_x' = A_m`, `B Lambda K_r = B_m`. Test/diagnostic oracle.
pub fn ideal_gains(
    a: &Matrix2<f64>,
    lambda: f64,
    a_m: &Matrix2<f64>,
    b_m: &Vector2<f64>,
) -> Result<(Vector2<f64>, f64)> {
    let tol = 1e-12;
    if (a[(0, 0)]).abs() > tol
        || (a[(0, 1)] - 1.0).abs() > tol
        || (a_m[(0, 0)]).abs() > tol
        || (a_m[(0, 1)] - 1.0).abs() > tol
    {
        return Err(Error::MatchingInfeasible(
            "first rows must be [0, 1]".to_string(),
        ));
    }
    if b_m[0].abs() > tol {
        return Err(Error::MatchingInfeasible(
            "B_m must have zero first component".to_string(),
        ));
    }
    if !(lambda > 0.0) {
        return Err(Error::MatchingInfeasible("lambda must be positive".into()));
    }
    let k_x = Vector2::new(
        (a_m[(1, 0)] - a[(1, 0)]) / lambda,
        (a_m[(1, 1)] - a[(1, 1)]) / lambda,
    );
    let k_r = b_m[1] / lambda;

    // verify the reconstruction
    let mut closed = *a;
    closed[(1, 0)] += lambda * k_x[0];
    closed[(1, 1)] += lambda * k_x[1];
    if (closed - a_m).amax() > 1e-10 || (lambda * k_r - b_m[1]).abs() > 1e-10 {
        return Err(Error::MatchingInfeasible(
            "reconstructed closed loop does not match".to_string(),
        ));
    }
    Ok((k_x, k_r))
}

/// Diagnostic Lyapunov-function value
/// `V = e'Pe + Lambda (dKx' gx^-1 dKx + dKr^2/gr + dth' gth^-1 dth)`.
///
/// Requires the ideal gains, so it is only available in simulation.
pub fn clf_value(
    e: &Vector2<f64>,
    gains: &AdaptiveGains,
    ideal: &AdaptiveGains,
    cfg: &AdaptationConfig,
) -> f64 {
    let dk_x = gains.k_x - ideal.k_x;
    let dk_r = gains.k_r - ideal.k_r;
    let dth = gains.theta - ideal.theta;
    e.dot(&(cfg.p * e))
        + cfg.lambda
            * (dk_x.dot(&(cfg.gamma_x_inv * dk_x))
                + dk_r * dk_r / cfg.gamma_r
                + dth.dot(&(cfg.gamma_theta_inv * dth)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lyapunov::default_reference_model;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn paper_config() -> AdaptationConfig {
        let (am, _) = default_reference_model();
        AdaptationConfig::new(
            Matrix2::new(4000.0, 0.0, 0.0, 50.0),
            2000.0,
            Matrix2::new(50.0, 0.0, 0.0, 50.0),
            Matrix2::identity(),
            None,
            30.0,
            10.0,
            181.40589569161,
            &am,
        )
        .unwrap()
    }

    #[test]
    fn regressor_values() {
        assert_eq!(regressor(&Vector2::new(0.0, 123.0)), Vector2::new(0.0, 1.0));
        let phi = regressor(&Vector2::new(std::f64::consts::FRAC_PI_2, 0.0));
        assert_relative_eq!(phi[0], 1.0, max_relative = 1e-15);
        assert_eq!(phi[1], 1.0);
        let phi = regressor(&Vector2::new(0.2, 0.0));
        assert_relative_eq!(phi[0], 0.2f64.sin(), max_relative = 1e-15);
        assert!((phi[0] - 0.19867).abs() < 1e-5);
    }

    #[test]
    fn control_law_arithmetic() {
        assert_eq!(
            control_vx(&AdaptiveGains::zero(), &Vector2::new(0.4, -1.0), 0.7),
            0.0
        );
        let g = AdaptiveGains {
            k_x: Vector2::new(1.0, 2.0),
            k_r: 3.0,
            theta: Vector2::new(4.0, 5.0),
        };
        let v = control_vx(&g, &Vector2::new(0.1, 0.2), 0.3);
        let expected = 0.1 + 0.4 + 0.9 + 4.0 * 0.1f64.sin() + 5.0;
        assert_relative_eq!(v, expected, max_relative = 1e-14);
        assert!((v - 6.79933).abs() < 1e-5);
    }

    #[test]
    fn zero_error_freezes_adaptation() {
        let cfg = paper_config();
        let rates = adaptation_rates(
            &Vector2::zeros(),
            &Vector2::new(0.3, -0.2),
            0.5,
            &regressor(&Vector2::new(0.3, -0.2)),
            &cfg,
        );
        assert_eq!(rates.k_x, Vector2::zeros());
        assert_eq!(rates.k_r, 0.0);
        assert_eq!(rates.theta, Vector2::zeros());
    }

    #[test]
    fn bias_term_persists_at_zero_state() {
        let cfg = paper_config();
        let e = Vector2::new(0.01, -0.02);
        let x = Vector2::zeros();
        let rates = adaptation_rates(&e, &x, 0.0, &regressor(&x), &cfg);
        assert_eq!(rates.k_x, Vector2::zeros());
        assert_eq!(rates.k_r, 0.0);
        let e_pb = cfg.error_projection(&e);
        assert_relative_eq!(rates.theta[1], -50.0 * e_pb, max_relative = 1e-14);
        assert_eq!(rates.theta[0], 0.0);
    }

    #[test]
    fn rates_match_hand_multiplied_products() {
        let cfg = paper_config();
        let e = Vector2::new(0.01, 0.0);
        let x = Vector2::new(0.2, 0.0);
        let r = 0.2;
        let rates = adaptation_rates(&e, &x, r, &regressor(&x), &cfg);
        // e'PB with P solved for Q = I: pb = [1/12, 7/48]
        let e_pb = 0.01 * (1.0 / 12.0);
        assert_relative_eq!(rates.k_x[0], -4000.0 * 0.2 * e_pb, max_relative = 1e-12);
        assert_relative_eq!(rates.k_x[1], 0.0, epsilon = 1e-15);
        assert_relative_eq!(rates.k_r, -2000.0 * 0.2 * e_pb, max_relative = 1e-12);
        assert_relative_eq!(
            rates.theta[0],
            -50.0 * 0.2f64.sin() * e_pb,
            max_relative = 1e-12
        );
        assert_relative_eq!(rates.theta[1], -50.0 * e_pb, max_relative = 1e-12);
    }

    #[test]
    fn reference_model_stays_at_rest_without_input() {
        let (am, bm) = default_reference_model();
        let mut rm = ReferenceModel::new(am, bm, Vector2::zeros()).unwrap();
        for _ in 0..100 {
            reference_step(&mut rm, 0.0, 0.01, 4);
        }
        assert_eq!(rm.state, Vector2::zeros());
    }

    #[test]
    fn constant_reference_settles_at_unit_dc_gain() {
        let (am, bm) = default_reference_model();
        let mut rm = ReferenceModel::new(am, bm, Vector2::zeros()).unwrap();
        let dc = -am.try_inverse().unwrap() * bm * 0.2;
        assert_relative_eq!(dc[0], 0.2, max_relative = 1e-14);
        assert_relative_eq!(dc[1], 0.0, epsilon = 1e-14);
        // closed-form deviation from a rest start under a 0.2 step; the
        // model poles are -2 +- i sqrt(2)
        let w = 2.0f64.sqrt();
        let deviation =
            |t: f64| -((-2.0 * t).exp()) * (0.2 * (w * t).cos() + (0.4 / w) * (w * t).sin());
        for step in 1..=2000 {
            reference_step(&mut rm, 0.2, 0.01, 4);
            let t = step as f64 * 0.01;
            if step % 100 == 0 {
                assert_relative_eq!(
                    rm.state[0] - 0.2,
                    deviation(t),
                    max_relative = 1e-6,
                    epsilon = 1e-12
                );
            }
        }
        // settled well within 1e-6 by t = 7 s and to solver precision by 20 s
        assert!(deviation(7.0).abs() < 1e-6);
        assert!((rm.state[0] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn non_hurwitz_reference_model_is_rejected() {
        let a = Matrix2::new(0.0, 1.0, 6.0, 4.0);
        assert!(ReferenceModel::new(a, Vector2::new(0.0, 6.0), Vector2::zeros()).is_err());
    }

    #[test]
    fn ideal_gains_for_default_setup() {
        let (am, bm) = default_reference_model();
        let lambda = 181.40589569161;
        let a = Matrix2::new(0.0, 1.0, 0.0, -0.5 * lambda);
        let (k_x, k_r) = ideal_gains(&a, lambda, &am, &bm).unwrap();
        assert!((k_x[0] + 0.033075).abs() < 1e-5);
        assert!((k_x[1] - 0.47796).abs() < 2e-5);
        assert_relative_eq!(k_r, 6.0 / lambda, max_relative = 1e-12);
        assert_relative_eq!(k_x[0], -6.0 / lambda, max_relative = 1e-12);
    }

    #[test]
    fn trivial_matching_when_plant_equals_model() {
        let (am, _) = default_reference_model();
        let lambda = 3.0;
        let bm = Vector2::new(0.0, lambda);
        let (k_x, k_r) = ideal_gains(&am, lambda, &am, &bm).unwrap();
        assert_eq!(k_x, Vector2::zeros());
        assert_relative_eq!(k_r, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn random_pairs_reconstruct_reference_matrix() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let lambda = rng.random_range(0.5..300.0);
            let a = Matrix2::new(0.0, 1.0, 0.0, rng.random_range(-100.0..0.0));
            let am = Matrix2::new(
                0.0,
                1.0,
                rng.random_range(-12.0..-0.5),
                rng.random_range(-9.0..-0.5),
            );
            let bm = Vector2::new(0.0, rng.random_range(0.5..10.0));
            let (k_x, _) = ideal_gains(&a, lambda, &am, &bm).unwrap();
            let mut closed = a;
            closed[(1, 0)] += lambda * k_x[0];
            closed[(1, 1)] += lambda * k_x[1];
            assert!((closed - am).amax() <= 1e-10);
        }
    }

    #[test]
    fn matching_rejects_wrong_structure() {
        let a = Matrix2::new(0.5, 1.0, 0.0, -1.0);
        let (am, bm) = default_reference_model();
        assert!(matches!(
            ideal_gains(&a, 1.0, &am, &bm),
            Err(Error::MatchingInfeasible(_))
        ));
    }

    #[test]
    fn clf_zero_at_ideal_point() {
        let cfg = paper_config();
        let ideal = AdaptiveGains {
            k_x: Vector2::new(-0.033, 0.478),
            k_r: 0.033,
            theta: Vector2::new(1.03, 0.0),
        };
        assert_eq!(clf_value(&Vector2::zeros(), &ideal, &ideal, &cfg), 0.0);
    }

    /// Directional derivative of the Lyapunov value along the adaptation flow
    /// must equal the negated gain/error cross term.
    #[test]
    fn adaptation_is_the_gradient_flow_of_the_cross_term() {
        let cfg = paper_config();
        let ideal = AdaptiveGains {
            k_x: Vector2::new(-0.033075, 0.477949),
            k_r: 0.033075,
            theta: Vector2::new(1.03005, 0.0),
        };
        let gains = AdaptiveGains {
            k_x: Vector2::new(0.4, -0.1),
            k_r: 0.2,
            theta: Vector2::new(0.3, -0.6),
        };
        let e = Vector2::new(0.02, -0.05);
        let x = Vector2::new(0.25, 0.6);
        let r = 0.3;
        let phi = regressor(&x);
        let rates = adaptation_rates(&e, &x, r, &phi, &cfg);

        // numerical gradient of V in each gain coordinate
        let h = 1e-6;
        let v_at = |g: &AdaptiveGains| clf_value(&e, g, &ideal, &cfg);
        let mut dot = 0.0;
        for i in 0..5 {
            let perturb = |g: &AdaptiveGains, s: f64| {
                let mut out = *g;
                match i {
                    0 => out.k_x[0] += s,
                    1 => out.k_x[1] += s,
                    2 => out.k_r += s,
                    3 => out.theta[0] += s,
                    _ => out.theta[1] += s,
                }
                out
            };
            let grad = (v_at(&perturb(&gains, h)) - v_at(&perturb(&gains, -h))) / (2.0 * h);
            let rate = match i {
                0 => rates.k_x[0],
                1 => rates.k_x[1],
                2 => rates.k_r,
                3 => rates.theta[0],
                _ => rates.theta[1],
            };
            dot += grad * rate;
        }
        let e_pb = cfg.error_projection(&e);
        let dk_x = gains.k_x - ideal.k_x;
        let dk_r = gains.k_r - ideal.k_r;
        let dth = gains.theta - ideal.theta;
        let cross = 2.0 * cfg.lambda * e_pb * (dk_x.dot(&x) + dk_r * r + dth.dot(&phi));
        assert_relative_eq!(dot, -cross, max_relative = 1e-6);
    }

    proptest! {
        #[test]
        fn clf_is_nonnegative(
            e1 in -1.0f64..1.0, e2 in -1.0f64..1.0,
            kx1 in -2.0f64..2.0, kx2 in -2.0f64..2.0,
            kr in -2.0f64..2.0, th1 in -2.0f64..2.0, th2 in -2.0f64..2.0,
        ) {
            let cfg = paper_config();
            let ideal = AdaptiveGains {
                k_x: Vector2::new(-0.033075, 0.477949),
                k_r: 0.033075,
                theta: Vector2::new(1.03005, 0.0),
            };
            let gains = AdaptiveGains {
                k_x: Vector2::new(kx1, kx2),
                k_r: kr,
                theta: Vector2::new(th1, th2),
            };
            prop_assert!(clf_value(&Vector2::new(e1, e2), &gains, &ideal, &cfg) >= 0.0);
        }
    }
}
