//! Coupled continuous-time plant: rigid pendulum limb plus the
//! electromechanical torque dynamics of the series-elastic drive.

use crate::error::Result;
use crate::geometry::{self, LinkageParams};
use crate::motor::SeaFilterConstants;

/// Everything the right-hand sides need: linkage, limb damping and the
/// drive filter constants.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantParams {
    pub linkage: LinkageParams,
    /// Limb viscous friction D (N*m*s).
    pub damping: f64,
    pub filter: SeaFilterConstants,
}

impl PlantParams {
    /// Input scaling `Lambda = 1 / (m d3^2)`.
    pub fn lambda(&self) -> f64 {
        1.0 / (self.linkage.mass * self.linkage.d3 * self.linkage.d3)
    }

    /// Open-loop limb system matrix `[[0, 1], [0, -D/(m d3^2)]]`.
    pub fn a_matrix(&self) -> nalgebra::Matrix2<f64> {
        nalgebra::Matrix2::new(0.0, 1.0, 0.0, -self.damping * self.lambda())
    }
}

/// The four coupled state variables: joint angle/velocity and actuator
/// torque/torque-rate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlantState {
    /// Joint angle (rad).
    pub x1: f64,
    /// Joint velocity (rad/s).
    pub x2: f64,
    /// Actuator torque (N*m).
    pub z1: f64,
    /// Actuator torque rate (N*m/s).
    pub z2: f64,
}

impl PlantState {
    pub fn to_array(self) -> [f64; 4] {
        [self.x1, self.x2, self.z1, self.z2]
    }

    pub fn from_array(a: &[f64; 4]) -> Self {
        PlantState {
            x1: a[0],
            x2: a[1],
            z1: a[2],
            z2: a[3],
        }
    }
}

/// External torque acting on the limb, as a pure function of time.
#[derive(Debug, Clone, PartialEq)]
pub enum DisturbanceProfile {
    Zero,
    Constant {
        amplitude: f64,
    },
    Sinusoid {
        amplitude: f64,
        frequency: f64,
        phase: f64,
    },
    /// Piecewise-constant square wave of the given amplitude.
    Piecewise {
        amplitude: f64,
        frequency: f64,
        phase: f64,
    },
}

impl DisturbanceProfile {
    pub fn torque(&self, t: f64) -> f64 {
        match *self {
            DisturbanceProfile::Zero => 0.0,
            DisturbanceProfile::Constant { amplitude } => amplitude,
            DisturbanceProfile::Sinusoid {
                amplitude,
                frequency,
                phase,
            } => amplitude * (2.0 * std::f64::consts::PI * frequency * t + phase).sin(),
            DisturbanceProfile::Piecewise {
                amplitude,
                frequency,
                phase,
            } => {
                let s = (2.0 * std::f64::consts::PI * frequency * t + phase).sin();
                if s >= 0.0 {
                    amplitude
                } else {
                    -amplitude
                }
            }
        }
    }

    /// Supremum of |torque| over time.
    pub fn bound(&self) -> f64 {
        match *self {
            DisturbanceProfile::Zero => 0.0,
            DisturbanceProfile::Constant { amplitude }
            | DisturbanceProfile::Sinusoid { amplitude, .. }
            | DisturbanceProfile::Piecewise { amplitude, .. } => amplitude.abs(),
        }
    }

    /// Nominal constant value, used where a constant uncertainty vector is
    /// needed (diagnostics only).
    pub fn nominal(&self) -> f64 {
        match *self {
            DisturbanceProfile::Constant { amplitude } => amplitude,
            _ => 0.0,
        }
    }
}

/// Pendulum-limb acceleration: `(x1_dot, x2_dot)`.
pub fn limb_rhs(s: &PlantState, tau_d: f64, p: &PlantParams) -> (f64, f64) {
    let lam = p.lambda();
    let x2_dot = -p.damping * lam * s.x2 - p.linkage.gravity / p.linkage.d3 * s.x1.sin()
        + lam * tau_d
        + lam * s.z1;
    (s.x2, x2_dot)
}

/// Actuator torque dynamics: `(z1_dot, z2_dot)`.
///
/// `phi_ddot` must come from [`limb_rhs`] evaluated at the same state first;
/// the second derivative of the transmission gain depends on it.
pub fn sea_rhs(s: &PlantState, phi_ddot: f64, u_eq: f64, p: &PlantParams) -> Result<(f64, f64)> {
    let ge = geometry::geometry_eval(s.x1, &p.linkage)?;
    let g_dot = ge.dg_dphi * s.x2;
    let g_ddot = ge.d2g_dphi2 * s.x2 * s.x2 + ge.dg_dphi * phi_ddot;
    let fc = &p.filter;

    let gravity_term = fc.mass_ratio * p.linkage.gravity * p.linkage.d3 * s.x1.sin()
        / (p.linkage.d6 * ge.sin_gamma);

    let z2_dot = (-s.z2 * (2.0 * g_dot + fc.zeta * ge.g)
        - s.z1 * (g_ddot + fc.omega * fc.omega * ge.g + fc.zeta * g_dot)
        - gravity_term)
        / ge.g
        + u_eq / ge.g;
    Ok((s.z2, z2_dot))
}

/// Full coupled right-hand side in `[x1, x2, z1, z2]` order.
pub fn coupled_rhs(
    t: f64,
    y: &[f64; 4],
    u_eq: f64,
    dist: &DisturbanceProfile,
    p: &PlantParams,
) -> Result<[f64; 4]> {
    let s = PlantState::from_array(y);
    let (x1_dot, x2_dot) = limb_rhs(&s, dist.torque(t), p);
    let (z1_dot, z2_dot) = sea_rhs(&s, x2_dot, u_eq, p)?;
    Ok([x1_dot, x2_dot, z1_dot, z2_dot])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motor::sea_filter_constants;
    use crate::motor::MotorParams;
    use crate::ode::rk4_step;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn default_plant() -> PlantParams {
        let linkage = LinkageParams::default();
        let filter = sea_filter_constants(
            &MotorParams::default(),
            Some(47.535),
            linkage.spring_k,
            linkage.mass,
            1.0,
        );
        PlantParams {
            linkage,
            damping: 0.5,
            filter,
        }
    }

    #[test]
    fn origin_is_an_equilibrium() {
        let p = default_plant();
        let d = coupled_rhs(0.0, &[0.0; 4], 0.0, &DisturbanceProfile::Zero, &p).unwrap();
        assert_eq!(d, [0.0; 4]);
    }

    #[test]
    fn limb_acceleration_by_direct_substitution() {
        let p = default_plant();
        let s = PlantState {
            x1: 0.2,
            ..Default::default()
        };
        let (_, x2_dot) = limb_rhs(&s, 0.0, &p);
        let expected = -(9.81 / 0.0525) * 0.2f64.sin();
        assert_relative_eq!(x2_dot, expected, max_relative = 1e-14);
        assert!((x2_dot + 37.1228).abs() < 1e-3);
    }

    #[test]
    fn lambda_matches_tabulated_value() {
        assert_relative_eq!(default_plant().lambda(), 181.406, max_relative = 1e-5);
    }

    #[test]
    fn gravity_balance_freezes_torque_rate() {
        let p = default_plant();
        let s = PlantState {
            x1: 0.3,
            ..Default::default()
        };
        let ge = geometry::geometry_eval(0.3, &p.linkage).unwrap();
        let u_eq = p.filter.mass_ratio * p.linkage.gravity * p.linkage.d3 * 0.3f64.sin()
            / (p.linkage.d6 * ge.sin_gamma);
        let (_, x2_dot) = limb_rhs(&s, 0.0, &p);
        let (_, z2_dot) = sea_rhs(&s, x2_dot, u_eq, &p).unwrap();
        // z1 = z2 = x2 = 0, so only the gravity term remains to cancel
        assert!(z2_dot.abs() < 1e-9, "z2_dot = {z2_dot}");
    }

    #[test]
    fn unit_mass_ratio_reduces_to_plain_gravity_term() {
        let mut p2 = default_plant();
        p2.filter.mass_ratio = 2.0;
        let p1 = default_plant();
        let s = PlantState {
            x1: 0.25,
            ..Default::default()
        };
        let (_, acc) = limb_rhs(&s, 0.0, &p1);
        let (_, a1) = sea_rhs(&s, acc, 0.0, &p1).unwrap();
        let (_, a2) = sea_rhs(&s, acc, 0.0, &p2).unwrap();
        // doubling the mass ratio doubles the gravity forcing exactly
        assert_relative_eq!(a2, 2.0 * a1, max_relative = 1e-12);
    }

    /// With the joint frozen, the torque states must reproduce the
    /// deflection-form oscillator through the substitution `delta = tau * G`.
    #[test]
    fn frozen_joint_matches_deflection_oscillator() {
        let p = default_plant();
        let phi = 0.15;
        let ge = geometry::geometry_eval(phi, &p.linkage).unwrap();
        let (zeta, omega) = (p.filter.zeta, p.filter.omega);
        let forcing = p.filter.mass_ratio * p.linkage.gravity * p.linkage.d3 * phi.sin()
            / (p.linkage.d6 * ge.sin_gamma);
        let u_eq = 0.8;

        // torque form with x1 pinned at phi (x2 = 0 so gain derivatives vanish)
        let torque_rhs = |_t: f64, y: &[f64; 2]| -> crate::error::Result<[f64; 2]> {
            let s = PlantState {
                x1: phi,
                x2: 0.0,
                z1: y[0],
                z2: y[1],
            };
            let (z1_dot, z2_dot) = sea_rhs(&s, 0.0, u_eq, &p)?;
            Ok([z1_dot, z2_dot])
        };
        // deflection form: delta'' + zeta delta' + omega^2 delta = u - forcing/G*G...
        let defl_rhs = |_t: f64, y: &[f64; 2]| -> crate::error::Result<[f64; 2]> {
            Ok([
                y[1],
                u_eq - forcing - zeta * y[1] - omega * omega * y[0],
            ])
        };

        let mut zt = [0.5, 0.0];
        let mut dt_state = [0.5 * ge.g, 0.0];
        let h = 1e-4;
        for i in 0..10_000 {
            let t = i as f64 * h;
            zt = rk4_step(torque_rhs, t, &zt, h).unwrap();
            dt_state = rk4_step(defl_rhs, t, &dt_state, h).unwrap();
            let delta_from_torque = zt[0] * ge.g;
            assert!(
                (delta_from_torque - dt_state[0]).abs() < 1e-9,
                "diverged at t = {t}: {delta_from_torque} vs {}",
                dt_state[0]
            );
        }
    }

    #[test]
    fn disturbance_profiles_are_bounded_and_deterministic() {
        let d = DisturbanceProfile::Sinusoid {
            amplitude: 0.4,
            frequency: 0.5,
            phase: 0.3,
        };
        let sq = DisturbanceProfile::Piecewise {
            amplitude: 0.4,
            frequency: 0.5,
            phase: 0.0,
        };
        for i in 0..1000 {
            let t = 0.037 * i as f64;
            assert!(d.torque(t).abs() <= d.bound() + 1e-15);
            assert!(sq.torque(t).abs() <= sq.bound() + 1e-15);
            assert_eq!(d.torque(t), d.torque(t));
        }
    }

    #[test]
    fn rhs_is_finite_over_random_states() {
        let p = default_plant();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let dist = DisturbanceProfile::Sinusoid {
            amplitude: 1.0,
            frequency: 1.0,
            phase: 0.0,
        };
        for _ in 0..10_000 {
            let y = [
                rng.random_range(-0.6..0.6),
                rng.random_range(-10.0..10.0),
                rng.random_range(-20.0..20.0),
                rng.random_range(-200.0..200.0),
            ];
            let t = rng.random_range(0.0..60.0);
            let u = rng.random_range(-50.0..50.0);
            let d = coupled_rhs(t, &y, u, &dist, &p).unwrap();
            assert!(d.iter().all(|v| v.is_finite()), "non-finite at {y:?}");
        }
    }
}
