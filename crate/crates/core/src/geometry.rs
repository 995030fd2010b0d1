//! Linkage geometry of the series-elastic drive.
//!
//! The actuator connects a crank pin (at radius `r = hypot(d4, d5)` from the
//! joint axis) to the tip of a lever of length `d6`. The free length of the
//! actuator spans the third side of that triangle, so its length follows the
//! law of cosines and the force-transmission angles follow the law of sines.
//!
//! Conventions (the published drawing is not available, so these are the
//! reconstruction used throughout this crate):
//!
//! * the crank angle is `beta = phi + beta_offset`,
//! * `delta` is the interior angle opposite the crank radius, i.e. the angle
//!   between the `d6` lever and the actuator axis — the angle that converts
//!   actuator force into lever torque,
//! * `sin(gamma) = d7 * sin(delta) / l_sea`, which reconciles the two closed
//!   forms of the reaction-force relation.

use crate::error::{Error, Result};

/// Feasibility threshold on the squared-length radicand (m^2).
pub const RADICAND_EPS: f64 = 1e-9;
/// Validity band for computed sines: they must lie in `(ANGLE_EPS, 1 + ANGLE_EPS]`.
pub const ANGLE_EPS: f64 = 1e-9;

/// Geometric and physical constants of the limb/actuator linkage.
///
/// `d1` and `d2` are carried for completeness but enter no implemented
/// relation. `d7` and `beta_offset` have no published values; the defaults
/// below keep `sin(gamma) <= 0.91` over every reachable configuration and
/// center the singularity-free window (`-1.69 .. 1.45` rad) on the gait
/// region.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkageParams {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
    pub d5: f64,
    pub d6: f64,
    pub d7: f64,
    /// Crank mounting offset: `beta = phi + beta_offset` (rad).
    pub beta_offset: f64,
    /// Series-spring stiffness (N/m).
    pub spring_k: f64,
    /// Limb mass (kg).
    pub mass: f64,
    /// Gravitational acceleration (m/s^2).
    pub gravity: f64,
}

impl Default for LinkageParams {
    fn default() -> Self {
        LinkageParams {
            d1: 0.028,
            d2: 0.0525,
            d3: 0.0525,
            d4: 0.035,
            d5: 0.118,
            d6: 0.040,
            // below min L^2/(r sin theta) = 0.110, so sin(gamma) stays < 1
            // in every non-degenerate configuration
            d7: 0.10,
            // 0 would put the delta = 0 singularity at phi ~ -0.288 rad,
            // inside the +-0.6 rad operating range
            beta_offset: 1.4,
            spring_k: 20_000.0,
            mass: 2.0,
            gravity: 9.81,
        }
    }
}

impl LinkageParams {
    /// Crank radius `r = hypot(d4, d5)`.
    pub fn crank_radius(&self) -> f64 {
        self.d4.hypot(self.d5)
    }

    /// Check strict positivity of every physical constant.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("d1", self.d1),
            ("d2", self.d2),
            ("d3", self.d3),
            ("d4", self.d4),
            ("d5", self.d5),
            ("d6", self.d6),
            ("d7", self.d7),
            ("spring_k", self.spring_k),
            ("mass", self.mass),
            ("gravity", self.gravity),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Validation(format!(
                    "geometry: {name} must be strictly positive (got {v})"
                )));
            }
        }
        Ok(())
    }

    /// Check triangle feasibility and angle validity over `[phi_min, phi_max]`.
    ///
    /// Samples 121 points; every point must yield a real positive length and
    /// sines inside `(0, 1]`.
    pub fn validate_range(&self, phi_min: f64, phi_max: f64) -> Result<()> {
        if !(phi_max > phi_min) {
            return Err(Error::Validation(format!(
                "geometry: operating range [{phi_min}, {phi_max}] is empty"
            )));
        }
        let n = 121;
        for i in 0..n {
            let phi = phi_min + (phi_max - phi_min) * i as f64 / (n - 1) as f64;
            lsea_length(phi, self).map_err(|e| {
                Error::Validation(format!("geometry infeasible over operating range: {e}"))
            })?;
            angle_sines(phi, self).map_err(|e| {
                Error::Validation(format!("geometry degenerate over operating range: {e}"))
            })?;
        }
        Ok(())
    }
}

/// Full geometric evaluation at one joint angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryEval {
    /// Actuator length (m).
    pub l_sea: f64,
    /// Sine of the lever/actuator angle, in `(0, 1]`.
    pub sin_delta: f64,
    /// Sine of the reaction angle, `d7 sin(delta) / l_sea`, in `(0, 1]`.
    pub sin_gamma: f64,
    /// Transmission gain: spring deflection per unit actuator torque (m/(N*m)).
    /// Negative over the operating range.
    pub g: f64,
    /// dG/dphi (per rad).
    pub dg_dphi: f64,
    /// d2G/dphi2 (per rad^2).
    pub d2g_dphi2: f64,
}

/// Angle at the crank-radius vertex between the crank and the lever base.
fn opening_angle(phi: f64, p: &LinkageParams) -> f64 {
    let beta = phi + p.beta_offset;
    beta - p.d5.atan2(p.d4) + std::f64::consts::FRAC_PI_2
}

fn radicand(phi: f64, p: &LinkageParams) -> f64 {
    let beta = phi + p.beta_offset;
    p.d4 * p.d4
        + p.d5 * p.d5
        + p.d6 * p.d6
        + 2.0 * p.d6 * (p.d4 * beta.sin() - p.d5 * beta.cos())
}

/// Actuator length at joint angle `phi`.
pub fn lsea_length(phi: f64, p: &LinkageParams) -> Result<f64> {
    let rad = radicand(phi, p);
    if rad < RADICAND_EPS {
        return Err(Error::InfeasibleGeometry { phi, radicand: rad });
    }
    Ok(rad.sqrt())
}

/// `(sin delta, sin gamma)` at joint angle `phi`.
pub fn angle_sines(phi: f64, p: &LinkageParams) -> Result<(f64, f64)> {
    let l = lsea_length(phi, p)?;
    let r = p.crank_radius();
    let sin_delta = r * opening_angle(phi, p).sin() / l;
    if !(sin_delta > ANGLE_EPS && sin_delta <= 1.0 + ANGLE_EPS) {
        return Err(Error::DegenerateAngle {
            phi,
            name: "sin_delta",
            value: sin_delta,
        });
    }
    let sin_delta = sin_delta.min(1.0);
    let sin_gamma = p.d7 * sin_delta / l;
    if !(sin_gamma > ANGLE_EPS && sin_gamma <= 1.0 + ANGLE_EPS) {
        return Err(Error::DegenerateAngle {
            phi,
            name: "sin_gamma",
            value: sin_gamma,
        });
    }
    Ok((sin_delta, sin_gamma.min(1.0)))
}

/// Gravity reaction torque `m g d3 sin(phi)` about the joint (N*m).
pub fn gravity_reaction_torque(phi: f64, p: &LinkageParams) -> f64 {
    p.mass * p.gravity * p.d3 * phi.sin()
}

/// Reaction force along the actuator axis (N).
pub fn reaction_force(phi: f64, p: &LinkageParams) -> Result<f64> {
    let (_, sin_gamma) = angle_sines(phi, p)?;
    Ok(gravity_reaction_torque(phi, p) / (p.d6 * sin_gamma))
}

/// Transmission gain and its first two derivatives, evaluated analytically.
///
/// With `A` the opening angle, `c0 = r^2 + d6^2`, `c1 = 2 r d6` and
/// `kappa = k d6 d7 r`:
///
/// ```text
/// G    = (c1 cos A - c0) / (kappa sin A)          (= -L^2 / (kappa sin A))
/// G'   = (c0 cos A - c1) / (kappa sin^2 A)
/// G''  = (2 c1 cos A - c0 (1 + cos^2 A)) / (kappa sin^3 A)
/// ```
pub fn geometry_eval(phi: f64, p: &LinkageParams) -> Result<GeometryEval> {
    let l_sea = lsea_length(phi, p)?;
    let (sin_delta, sin_gamma) = angle_sines(phi, p)?;

    let r = p.crank_radius();
    let a = opening_angle(phi, p);
    let (sin_a, cos_a) = a.sin_cos();
    let c0 = r * r + p.d6 * p.d6;
    let c1 = 2.0 * r * p.d6;
    let kappa = p.spring_k * p.d6 * p.d7 * r;

    let g = (c1 * cos_a - c0) / (kappa * sin_a);
    let dg_dphi = (c0 * cos_a - c1) / (kappa * sin_a * sin_a);
    let d2g_dphi2 = (2.0 * c1 * cos_a - c0 * (1.0 + cos_a * cos_a)) / (kappa * sin_a.powi(3));

    Ok(GeometryEval {
        l_sea,
        sin_delta,
        sin_gamma,
        g,
        dg_dphi,
        d2g_dphi2,
    })
}

/// Actuator torque produced by a spring deflection `delta` at angle `phi`.
pub fn torque_from_deflection(delta: f64, phi: f64, p: &LinkageParams) -> Result<f64> {
    Ok(delta / geometry_eval(phi, p)?.g)
}

/// Spring deflection corresponding to actuator torque `tau` at angle `phi`.
pub fn deflection_from_torque(tau: f64, phi: f64, p: &LinkageParams) -> Result<f64> {
    Ok(tau * geometry_eval(phi, p)?.g)
}
