//! DC motor / ball-screw electromechanics.
//!
//! The electrical side reduces to a second-order filter on the screw-nut
//! motion; dropping the small inductance-inertia product leaves a first-order
//! coefficient ratio `zeta = a0 / a1`. The identified drive reports
//! `a1 = 5.68`, `a0 = 270`, hence the canonical `zeta = 47.535` used as the
//! default override.

use crate::error::{Error, Result};

/// Electromechanical constants of the drive train.
#[derive(Debug, Clone, PartialEq)]
pub struct MotorParams {
    /// Armature resistance (Ohm).
    pub resistance: f64,
    /// Armature inductance (H).
    pub inductance: f64,
    /// Torque constant (N*m/A).
    pub torque_constant: f64,
    /// Back-EMF constant (V*s/rad).
    pub emf_constant: f64,
    /// Viscous friction (N*m*s/rad).
    pub viscous_friction: f64,
    /// Rotor inertia (kg*m^2).
    pub rotor_inertia: f64,
    /// Ball-screw inertia (kg*m^2).
    pub screw_inertia: f64,
    /// Nut + spring-base mass (kg).
    pub nut_mass: f64,
    /// Gearbox ratio (dimensionless).
    pub gear_ratio: f64,
    /// Screw lead (m per revolution).
    pub screw_lead: f64,
    /// Gearbox efficiency in (0, 1].
    pub gear_efficiency: f64,
    /// Screw efficiency in (0, 1].
    pub screw_efficiency: f64,
}

impl Default for MotorParams {
    /// Identified electrical set plus one drive-train completion
    /// (gear ratio, lead, inductance, screw inertia, nut mass) consistent
    /// with the reported `a1 = 5.68`, `a0 = 270` and `J_eq = 1.574e-4`.
    fn default() -> Self {
        MotorParams {
            resistance: 5.56,
            inductance: 0.015458406285073263,
            torque_constant: 0.202,
            emf_constant: 0.202,
            viscous_friction: 16.5e-5,
            rotor_inertia: 1.57e-4,
            screw_inertia: 1.7829020074512962e-7,
            nut_mass: 0.3,
            gear_ratio: 1.04,
            screw_lead: 0.005,
            gear_efficiency: 0.9,
            screw_efficiency: 0.9,
        }
    }
}

impl MotorParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("resistance", self.resistance),
            ("inductance", self.inductance),
            ("torque_constant", self.torque_constant),
            ("emf_constant", self.emf_constant),
            ("viscous_friction", self.viscous_friction),
            ("rotor_inertia", self.rotor_inertia),
            ("screw_inertia", self.screw_inertia),
            ("nut_mass", self.nut_mass),
            ("gear_ratio", self.gear_ratio),
            ("screw_lead", self.screw_lead),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Validation(format!(
                    "motor: {name} must be strictly positive (got {v})"
                )));
            }
        }
        for (name, v) in [
            ("gear_efficiency", self.gear_efficiency),
            ("screw_efficiency", self.screw_efficiency),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Validation(format!(
                    "motor: {name} must lie in (0, 1] (got {v})"
                )));
            }
        }
        Ok(())
    }
}

/// First-order drive constants together with the spring/pseudo-mass ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeaFilterConstants {
    /// Velocity coefficient (1/s).
    pub zeta: f64,
    /// Natural frequency `sqrt(k / m_c)` (rad/s).
    pub omega: f64,
    /// Mass ratio `m / m_c` (dimensionless).
    pub mass_ratio: f64,
}

/// Equivalent inertia reflected to the motor shaft.
pub fn equivalent_inertia(mp: &MotorParams) -> f64 {
    let n2e1 = mp.gear_ratio * mp.gear_ratio * mp.gear_efficiency;
    mp.rotor_inertia
        + mp.screw_inertia / n2e1
        + mp.screw_lead * mp.screw_lead * mp.nut_mass
            / (4.0 * std::f64::consts::PI.powi(2) * n2e1 * mp.screw_efficiency)
}

/// Screw-side filter coefficients `(a1, a0)` of the reduced drive dynamics.
pub fn filter_coefficients(mp: &MotorParams) -> (f64, f64) {
    let j_eq = equivalent_inertia(mp);
    let c = 2.0 * std::f64::consts::PI * mp.gear_ratio / (mp.screw_lead * mp.torque_constant);
    let a1 = c * (mp.resistance * j_eq + mp.inductance * mp.viscous_friction);
    let a0 = c * (mp.viscous_friction * mp.resistance + mp.emf_constant * mp.torque_constant);
    (a1, a0)
}

/// Velocity coefficient from raw parameters, `zeta = a0 / a1`.
pub fn zeta_from_params(mp: &MotorParams) -> f64 {
    let (a1, a0) = filter_coefficients(mp);
    a0 / a1
}

/// Assemble the drive filter constants.
///
/// `zeta_override` takes precedence when present (the default configuration
/// carries 47.535 directly, since the full drive train is not published).
/// `omega = sqrt(spring_k * mass_ratio / mass)`, i.e. `sqrt(k / m_c)`.
pub fn sea_filter_constants(
    mp: &MotorParams,
    zeta_override: Option<f64>,
    spring_k: f64,
    mass: f64,
    mass_ratio: f64,
) -> SeaFilterConstants {
    let zeta = zeta_override.unwrap_or_else(|| zeta_from_params(mp));
    SeaFilterConstants {
        zeta,
        omega: (spring_k * mass_ratio / mass).sqrt(),
        mass_ratio,
    }
}

/// Diagnostic reconstruction of the motor terminal voltage from the applied
/// equivalent control, the screw-end velocity and a sampled load-force trace.
///
/// `f_l_trace` must hold at least two samples at spacing `dt`; the load-torque
/// rate is taken by backward difference over the last two. This is a
/// reporting aid only and never feeds back into the loop.
pub fn virtual_to_voltage(
    u_eq: f64,
    x_c_dot: f64,
    f_l_trace: &[f64],
    dt: f64,
    mp: &MotorParams,
) -> Result<f64> {
    if f_l_trace.len() < 2 {
        return Err(Error::InsufficientTrace);
    }
    let (a1, _) = filter_coefficients(mp);
    let zeta = zeta_from_params(mp);
    let u_v = zeta * x_c_dot - u_eq;
    let u_v_star = a1 * u_v;

    // load torque reflected to the motor shaft
    let refl = mp.screw_lead
        / (2.0 * std::f64::consts::PI * mp.gear_ratio * mp.gear_efficiency * mp.screw_efficiency);
    let n = f_l_trace.len();
    let t_l = refl * f_l_trace[n - 1];
    let t_l_dot = refl * (f_l_trace[n - 1] - f_l_trace[n - 2]) / dt;

    Ok(u_v_star + (mp.resistance * t_l - mp.inductance * t_l_dot) / mp.torque_constant)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn inertia_reduces_to_rotor_alone() {
        let mp = MotorParams {
            screw_inertia: 1e-300,
            nut_mass: 1e-300,
            ..MotorParams::default()
        };
        assert_relative_eq!(equivalent_inertia(&mp), mp.rotor_inertia, max_relative = 1e-12);
    }

    #[test]
    fn default_set_reproduces_identified_inertia() {
        let j = equivalent_inertia(&MotorParams::default());
        assert_relative_eq!(j, 1.574e-4, max_relative = 1e-9);
        assert_relative_eq!(j - 1.57e-4, 0.004e-4, max_relative = 1e-6);
    }

    #[test]
    fn inertia_matches_term_by_term_oracle() {
        let mp = MotorParams {
            rotor_inertia: 3.3e-4,
            screw_inertia: 4.1e-5,
            nut_mass: 0.7,
            gear_ratio: 12.0,
            screw_lead: 0.01,
            gear_efficiency: 0.85,
            screw_efficiency: 0.92,
            ..MotorParams::default()
        };
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let expected = 3.3e-4
            + 4.1e-5 / (12.0 * 12.0 * 0.85)
            + 0.01 * 0.01 * 0.7 / (4.0 * pi2 * 12.0 * 12.0 * 0.85 * 0.92);
        assert_relative_eq!(equivalent_inertia(&mp), expected, max_relative = 1e-14);
    }

    #[test]
    fn identified_ratio_reproduces_canonical_zeta() {
        assert!((270.0f64 / 5.68 - 47.535).abs() <= 1e-3);
        // the documented drive-train completion reproduces both coefficients
        let mp = MotorParams::default();
        let (a1, a0) = filter_coefficients(&mp);
        assert!((a1 - 5.68).abs() < 0.01, "a1 = {a1}");
        assert!((a0 - 270.0).abs() < 0.5, "a0 = {a0}");
        assert!((zeta_from_params(&mp) - 47.535).abs() <= 1e-3);
    }

    #[test]
    fn zeta_limit_with_no_inductance_or_friction() {
        let mp = MotorParams {
            inductance: 1e-300,
            viscous_friction: 1e-300,
            ..MotorParams::default()
        };
        let expected = mp.emf_constant * mp.torque_constant
            / (mp.resistance * equivalent_inertia(&mp));
        assert_relative_eq!(zeta_from_params(&mp), expected, max_relative = 1e-9);
    }

    #[test]
    fn override_takes_precedence() {
        let fc = sea_filter_constants(&MotorParams::default(), Some(47.535), 20_000.0, 2.0, 1.0);
        assert_eq!(fc.zeta, 47.535);
        assert_relative_eq!(fc.omega, 100.0, max_relative = 1e-12);
        assert_eq!(fc.mass_ratio, 1.0);
    }

    #[test]
    fn balanced_inputs_give_zero_voltage() {
        let mp = MotorParams::default();
        let zeta = zeta_from_params(&mp);
        let v = virtual_to_voltage(zeta * 0.3, 0.3, &[0.0, 0.0, 0.0], 0.01, &mp).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn constant_load_drops_rate_term() {
        let mp = MotorParams::default();
        let v1 = virtual_to_voltage(1.0, 0.0, &[5.0, 5.0], 0.01, &mp).unwrap();
        // same constant load, different history length: rate term must vanish
        let v2 = virtual_to_voltage(1.0, 0.0, &[5.0, 5.0, 5.0, 5.0], 0.01, &mp).unwrap();
        assert_relative_eq!(v1, v2, max_relative = 1e-15);
    }

    #[test]
    fn ramp_load_matches_hand_computation() {
        let mp = MotorParams::default();
        let dt = 0.01;
        let trace: Vec<f64> = (0..10).map(|i| 2.5 * i as f64 * dt).collect();
        let v = virtual_to_voltage(0.4, 0.1, &trace, dt, &mp).unwrap();

        let (a1, _) = filter_coefficients(&mp);
        let zeta = zeta_from_params(&mp);
        let refl = mp.screw_lead
            / (2.0 * std::f64::consts::PI
                * mp.gear_ratio
                * mp.gear_efficiency
                * mp.screw_efficiency);
        let t_l = refl * trace[9];
        let t_l_dot = refl * 2.5;
        let expected = a1 * (zeta * 0.1 - 0.4)
            + (mp.resistance * t_l - mp.inductance * t_l_dot) / mp.torque_constant;
        assert_relative_eq!(v, expected, max_relative = 1e-9);
    }

    #[test]
    fn short_trace_is_rejected() {
        let r = virtual_to_voltage(0.0, 0.0, &[1.0], 0.01, &MotorParams::default());
        assert!(matches!(r, Err(Error::InsufficientTrace)));
    }
}
