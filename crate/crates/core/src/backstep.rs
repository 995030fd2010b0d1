//! Two-stage back-stepping around the adaptive torque law.
//!
//! The first stage drives the actuator torque `z1` to the adaptive command
//! `v_x`; the second drives the torque rate `z2` to the pseudo-control `v1`
//! and emits the equivalent drive input `U_eq`.

use crate::error::Result;
use crate::geometry;
use crate::mrac::AdaptationConfig;
use crate::plant::{limb_rhs, PlantParams, PlantState};
use nalgebra::Vector2;

/// First-stage pseudo-control `v1 = v_x_dot - 2 e'PB Lambda - k1 (z1 - v_x)`.
pub fn backstep_v1(
    e: &Vector2<f64>,
    z1: f64,
    v_x: f64,
    v_x_dot: f64,
    cfg: &AdaptationConfig,
) -> f64 {
    v_x_dot - 2.0 * cfg.error_projection(e) * cfg.lambda - cfg.k1 * (z1 - v_x)
}

/// Model-based rate of the adaptive command:
/// `v_x_dot = K_x_dot' X + K_x' X_dot + K_r_dot r + K_r r_dot + theta_dot' Phi + theta' Phi_dot`
/// with the joint acceleration taken from the controller-side model (which
/// cannot see the external disturbance) and `r_dot` supplied by the caller.
pub fn control_vx_rate(
    gains: &crate::mrac::AdaptiveGains,
    rates: &crate::mrac::GainRates,
    s: &PlantState,
    r: f64,
    r_dot: f64,
    model: &PlantParams,
) -> f64 {
    let x = Vector2::new(s.x1, s.x2);
    let (_, x2_dot) = limb_rhs(s, 0.0, model);
    let x_dot = Vector2::new(s.x2, x2_dot);
    let phi = crate::mrac::regressor(&x);
    let phi_dot = Vector2::new(s.x1.cos() * s.x2, 0.0);
    rates.k_x.dot(&x)
        + gains.k_x.dot(&x_dot)
        + rates.k_r * r
        + gains.k_r * r_dot
        + rates.theta.dot(&phi)
        + gains.theta.dot(&phi_dot)
}

/// Inner-subsystem drift `f2` as seen by the controller.
///
/// With `paper_literal = false` (the default) this is the full torque-dynamics
/// drift, so substituting [`backstep_ueq`] into the plant cancels it exactly.
/// With `paper_literal = true` the velocity-coefficient terms are omitted,
/// reproducing the originally printed (mismatched) expression.
///
/// The joint acceleration entering the gain's second derivative is computed
/// from the controller-side model without the external disturbance, which the
/// controller cannot measure.
pub fn inner_drift(s: &PlantState, model: &PlantParams, paper_literal: bool) -> Result<f64> {
    let ge = geometry::geometry_eval(s.x1, &model.linkage)?;
    let g_dot = ge.dg_dphi * s.x2;
    let (_, phi_ddot) = limb_rhs(s, 0.0, model);
    let g_ddot = ge.d2g_dphi2 * s.x2 * s.x2 + ge.dg_dphi * phi_ddot;
    let fc = &model.filter;
    let gravity_term = fc.mass_ratio * model.linkage.gravity * model.linkage.d3 * s.x1.sin()
        / (model.linkage.d6 * ge.sin_gamma);

    let f2 = if paper_literal {
        (-2.0 * s.z2 * g_dot - s.z1 * (g_ddot + fc.omega * fc.omega * ge.g) - gravity_term) / ge.g
    } else {
        (-s.z2 * (2.0 * g_dot + fc.zeta * ge.g)
            - s.z1 * (g_ddot + fc.omega * fc.omega * ge.g + fc.zeta * g_dot)
            - gravity_term)
            / ge.g
    };
    Ok(f2)
}

/// Second-stage control
/// `U_eq = (1/g2) [ -f2 + v1_dot - k2 (z2 - v1) - (z1 - v_x) ]`
/// with `g2 = 1/G(x1)`.
#[allow(clippy::too_many_arguments)]
pub fn backstep_ueq(
    s: &PlantState,
    v_x: f64,
    v1: f64,
    v1_dot: f64,
    model: &PlantParams,
    cfg: &AdaptationConfig,
    paper_literal: bool,
) -> Result<f64> {
    let g = geometry::geometry_eval(s.x1, &model.linkage)?.g;
    let f2 = inner_drift(s, model, paper_literal)?;
    Ok(g * (-f2 + v1_dot - cfg.k2 * (s.z2 - v1) - (s.z1 - v_x)))
}

/// Causal derivative estimate: backward difference followed by a first-order
/// low-pass with time constant `tau`. The first sample yields 0.
#[derive(Debug, Clone)]
pub struct DerivativeEstimator {
    dt: f64,
    alpha: f64,
    prev: Option<f64>,
    value: f64,
}

impl DerivativeEstimator {
    pub fn new(dt: f64, tau: f64) -> Self {
        debug_assert!(dt > 0.0 && tau >= 0.0);
        DerivativeEstimator {
            dt,
            alpha: dt / (tau + dt),
            prev: None,
            value: 0.0,
        }
    }

    /// Feed one sample, get the filtered derivative.
    pub fn update(&mut self, sample: f64) -> f64 {
        let raw = match self.prev {
            Some(prev) => (sample - prev) / self.dt,
            None => 0.0,
        };
        self.prev = Some(sample);
        self.value += self.alpha * (raw - self.value);
        self.value
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// Complex gain of the estimator at angular frequency `omega` (rad/s):
    /// backward difference times the discrete low-pass.
    pub fn frequency_response(&self, omega: f64) -> (f64, f64) {
        let w = omega * self.dt;
        // (1 - z^-1)/dt at z = e^{jw}
        let diff_re = (1.0 - w.cos()) / self.dt;
        let diff_im = w.sin() / self.dt;
        // alpha / (1 - (1-alpha) z^-1)
        let a = self.alpha;
        let den_re = 1.0 - (1.0 - a) * w.cos();
        let den_im = (1.0 - a) * w.sin();
        let den2 = den_re * den_re + den_im * den_im;
        let lp_re = a * den_re / den2;
        let lp_im = -a * den_im / den2;
        (
            diff_re * lp_re - diff_im * lp_im,
            diff_re * lp_im + diff_im * lp_re,
        )
    }
}
