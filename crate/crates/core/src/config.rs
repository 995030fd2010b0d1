//! Run configuration: a sectioned key-value file (TOML) whose defaults
//! reproduce the tabulated simulation setup, so an empty file is a valid,
//! complete configuration.
//!
//! Unknown keys are rejected. Resolving a config materializes every default
//! (including the solved Lyapunov matrix and the derived `d7`), and the
//! materialized form echoes back to TOML such that re-parsing it yields an
//! identical resolved configuration.

use crate::error::{Error, Result};
use crate::geometry::LinkageParams;
use crate::lyapunov;
use crate::motor::{sea_filter_constants, zeta_from_params, MotorParams};
use crate::mrac::AdaptationConfig;
use crate::plant::{DisturbanceProfile, PlantParams};
use crate::reference::ReferenceTrajectory;
use crate::sim::{
    AdaptationScheme, DerivativeMode, InitialState, Scenario, SimConfig, SimMode, SweepGrid,
};
use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};
use std::path::Path;

fn mat2(a: &[[f64; 2]; 2]) -> Matrix2<f64> {
    Matrix2::new(a[0][0], a[0][1], a[1][0], a[1][1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantSection {
    pub damping: f64,
    pub mass_ratio: f64,
}

impl Default for PlantSection {
    fn default() -> Self {
        PlantSection {
            damping: 0.5,
            mass_ratio: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotorSection {
    pub resistance: f64,
    pub inductance: f64,
    pub torque_constant: f64,
    pub emf_constant: f64,
    pub viscous_friction: f64,
    pub rotor_inertia: f64,
    pub screw_inertia: f64,
    pub nut_mass: f64,
    pub gear_ratio: f64,
    pub screw_lead: f64,
    pub gear_efficiency: f64,
    pub screw_efficiency: f64,
    /// Velocity coefficient used unless `use_raw_zeta` is set.
    pub zeta_override: f64,
    /// Derive zeta from the raw electromechanical parameters instead.
    pub use_raw_zeta: bool,
}

impl Default for MotorSection {
    fn default() -> Self {
        let mp = MotorParams::default();
        MotorSection {
            resistance: mp.resistance,
            inductance: mp.inductance,
            torque_constant: mp.torque_constant,
            emf_constant: mp.emf_constant,
            viscous_friction: mp.viscous_friction,
            rotor_inertia: mp.rotor_inertia,
            screw_inertia: mp.screw_inertia,
            nut_mass: mp.nut_mass,
            gear_ratio: mp.gear_ratio,
            screw_lead: mp.screw_lead,
            gear_efficiency: mp.gear_efficiency,
            screw_efficiency: mp.screw_efficiency,
            zeta_override: 47.535,
            use_raw_zeta: false,
        }
    }
}

impl MotorSection {
    pub fn to_params(&self) -> MotorParams {
        MotorParams {
            resistance: self.resistance,
            inductance: self.inductance,
            torque_constant: self.torque_constant,
            emf_constant: self.emf_constant,
            viscous_friction: self.viscous_friction,
            rotor_inertia: self.rotor_inertia,
            screw_inertia: self.screw_inertia,
            nut_mass: self.nut_mass,
            gear_ratio: self.gear_ratio,
            screw_lead: self.screw_lead,
            gear_efficiency: self.gear_efficiency,
            screw_efficiency: self.screw_efficiency,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySection {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
    pub d5: f64,
    pub d6: f64,
    /// Defaults to 0.10 m when omitted (no published value).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d7: Option<f64>,
    pub beta_offset: f64,
    pub spring_k: f64,
    pub mass: f64,
    pub gravity: f64,
    pub phi_min: f64,
    pub phi_max: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        let lk = LinkageParams::default();
        GeometrySection {
            d1: lk.d1,
            d2: lk.d2,
            d3: lk.d3,
            d4: lk.d4,
            d5: lk.d5,
            d6: lk.d6,
            d7: None,
            beta_offset: lk.beta_offset,
            spring_k: lk.spring_k,
            mass: lk.mass,
            gravity: lk.gravity,
            phi_min: -0.6,
            phi_max: 0.6,
        }
    }
}

impl GeometrySection {
    fn to_linkage(&self) -> LinkageParams {
        LinkageParams {
            d1: self.d1,
            d2: self.d2,
            d3: self.d3,
            d4: self.d4,
            d5: self.d5,
            d6: self.d6,
            d7: self.d7.unwrap_or(0.10),
            beta_offset: self.beta_offset,
            spring_k: self.spring_k,
            mass: self.mass,
            gravity: self.gravity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerSection {
    pub a_m: [[f64; 2]; 2],
    pub b_m: [f64; 2],
    /// Optional controller-side parameter overrides; defaults mirror the
    /// true plant.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_damping: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_spring_k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_mass_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_zeta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_d3: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_d4: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_d5: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_d6: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_d7: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_beta_offset: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_gravity: Option<f64>,
}

impl Default for ControllerSection {
    fn default() -> Self {
        ControllerSection {
            a_m: [[0.0, 1.0], [-6.0, -4.0]],
            b_m: [0.0, 6.0],
            model_mass: None,
            model_damping: None,
            model_spring_k: None,
            model_mass_ratio: None,
            model_zeta: None,
            model_d3: None,
            model_d4: None,
            model_d5: None,
            model_d6: None,
            model_d7: None,
            model_beta_offset: None,
            model_gravity: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaptationSection {
    pub gamma_x: [[f64; 2]; 2],
    pub gamma_r: f64,
    pub gamma_theta: [[f64; 2]; 2],
    pub q: [[f64; 2]; 2],
    /// Explicit Lyapunov matrix; solved from `q` when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<[[f64; 2]; 2]>,
    /// Substitute the originally printed (inconsistent) Lyapunov matrix for
    /// figure reproduction. Emits a warning.
    pub use_paper_p: bool,
    pub scheme: SchemeKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Euler,
    Continuous,
}

impl Default for AdaptationSection {
    /// `q = diag(3, 1)`: the solved Lyapunov matrix then carries
    /// `P B = [1/4, 3/16]`, the same adaptation weighting as the published
    /// tuning (whose printed P matches this solution in the two entries that
    /// enter the control law).
    fn default() -> Self {
        AdaptationSection {
            gamma_x: [[4000.0, 0.0], [0.0, 50.0]],
            gamma_r: 2000.0,
            gamma_theta: [[50.0, 0.0], [0.0, 50.0]],
            q: [[3.0, 0.0], [0.0, 1.0]],
            p: None,
            use_paper_p: false,
            scheme: SchemeKind::Euler,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeKind {
    Model,
    Filtered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BacksteppingSection {
    pub k1: f64,
    pub k2: f64,
    /// Use the literally printed inner drift (no velocity-coefficient terms).
    pub paper_f2: bool,
    /// Source of the first-stage command rate.
    pub derivatives: DerivativeKind,
    /// Derivative-estimator low-pass time constant; `8 * dt_control` when
    /// omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub filter_tau: Option<f64>,
}

impl Default for BacksteppingSection {
    fn default() -> Self {
        BacksteppingSection {
            k1: 30.0,
            k2: 10.0,
            paper_f2: false,
            derivatives: DerivativeKind::Filtered,
            filter_tau: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    FullCascade,
    IdealMrac,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub dt_physics: f64,
    pub dt_control: f64,
    pub duration: f64,
    pub x1_0: f64,
    pub x2_0: f64,
    pub z1_0: f64,
    pub z2_0: f64,
    pub xm1_0: f64,
    pub xm2_0: f64,
    pub mode: ModeKind,
    pub record_clf: bool,
    pub ideal_zoh: bool,
    pub transient_cutoff: f64,
}

impl Default for SimulationSection {
    fn default() -> Self {
        SimulationSection {
            dt_physics: 1e-4,
            dt_control: 0.01,
            duration: 20.0,
            x1_0: 0.2,
            x2_0: 0.0,
            z1_0: 0.0,
            z2_0: 0.0,
            xm1_0: 0.0,
            xm2_0: 0.0,
            mode: ModeKind::FullCascade,
            record_clf: false,
            ideal_zoh: false,
            transient_cutoff: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    ParametricWalk,
    Constant,
    Step,
    Sine,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReferenceSection {
    pub kind: ReferenceKind,
    pub walk_a1: f64,
    pub walk_a2: f64,
    pub walk_period: f64,
    pub walk_phase2: f64,
    pub value: f64,
    pub step_time: f64,
    pub amplitude: f64,
    pub period: f64,
    pub phase: f64,
    pub offset: f64,
    pub csv_path: String,
}

impl Default for ReferenceSection {
    fn default() -> Self {
        ReferenceSection {
            kind: ReferenceKind::ParametricWalk,
            walk_a1: 0.25,
            walk_a2: 0.10,
            walk_period: 2.0,
            walk_phase2: 0.6,
            value: 0.0,
            step_time: 0.0,
            amplitude: 0.2,
            period: 2.0,
            phase: 0.0,
            offset: 0.0,
            csv_path: String::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisturbanceKind {
    Zero,
    Constant,
    Sinusoid,
    Piecewise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisturbanceSection {
    pub kind: DisturbanceKind,
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

impl Default for DisturbanceSection {
    fn default() -> Self {
        DisturbanceSection {
            kind: DisturbanceKind::Zero,
            amplitude: 0.0,
            frequency: 1.0,
            phase: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
    pub plots: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: "out".to_string(),
            plots: true,
        }
    }
}

/// The on-disk configuration: every section optional, every key defaulted.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfigFile {
    pub plant: PlantSection,
    pub motor: MotorSection,
    pub geometry: GeometrySection,
    pub controller: ControllerSection,
    pub adaptation: AdaptationSection,
    pub backstepping: BacksteppingSection,
    pub simulation: SimulationSection,
    pub reference: ReferenceSection,
    pub disturbance: DisturbanceSection,
    pub output: OutputSection,
}

/// A resolved configuration: the materialized file form, the executable
/// scenario, output options and any warnings raised during resolution.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub file: RunConfigFile,
    pub scenario: Scenario,
    pub output: OutputSection,
    pub warnings: Vec<String>,
}

impl RunConfigFile {
    pub fn from_str(text: &str, origin: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        })
    }

    /// Resolve, validate and materialize defaults. `base_dir` anchors
    /// relative reference-CSV paths.
    pub fn resolve(mut self, base_dir: &Path) -> Result<RunConfig> {
        let mut warnings = Vec::new();

        // geometry
        let linkage = self.geometry.to_linkage();
        linkage.validate()?;
        self.geometry.d7 = Some(linkage.d7);
        if !(self.geometry.phi_max > self.geometry.phi_min) {
            return Err(Error::Validation(
                "geometry: phi_max must exceed phi_min".to_string(),
            ));
        }
        linkage.validate_range(self.geometry.phi_min, self.geometry.phi_max)?;

        // plant scalars
        for (name, v) in [
            ("plant.damping", self.plant.damping),
            ("plant.mass_ratio", self.plant.mass_ratio),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Validation(format!(
                    "{name} must be strictly positive (got {v})"
                )));
            }
        }

        // motor / drive filter
        let motor = self.motor.to_params();
        motor.validate()?;
        if !(self.motor.zeta_override > 0.0) {
            return Err(Error::Validation(
                "motor.zeta_override must be positive".to_string(),
            ));
        }
        let zeta = if self.motor.use_raw_zeta {
            zeta_from_params(&motor)
        } else {
            self.motor.zeta_override
        };
        let filter = sea_filter_constants(
            &motor,
            Some(zeta),
            linkage.spring_k,
            linkage.mass,
            self.plant.mass_ratio,
        );
        let plant = PlantParams {
            linkage: linkage.clone(),
            damping: self.plant.damping,
            filter,
        };

        // controller-side model (defaults identical to the true plant)
        let c = &self.controller;
        let mut model = plant.clone();
        if let Some(v) = c.model_mass {
            model.linkage.mass = v;
        }
        if let Some(v) = c.model_damping {
            model.damping = v;
        }
        if let Some(v) = c.model_spring_k {
            model.linkage.spring_k = v;
        }
        if let Some(v) = c.model_d3 {
            model.linkage.d3 = v;
        }
        if let Some(v) = c.model_d4 {
            model.linkage.d4 = v;
        }
        if let Some(v) = c.model_d5 {
            model.linkage.d5 = v;
        }
        if let Some(v) = c.model_d6 {
            model.linkage.d6 = v;
        }
        if let Some(v) = c.model_d7 {
            model.linkage.d7 = v;
        }
        if let Some(v) = c.model_beta_offset {
            model.linkage.beta_offset = v;
        }
        if let Some(v) = c.model_gravity {
            model.linkage.gravity = v;
        }
        if let Some(v) = c.model_zeta {
            model.filter.zeta = v;
        }
        if let Some(v) = c.model_mass_ratio {
            model.filter.mass_ratio = v;
            model.filter.omega = (model.linkage.spring_k * v / model.linkage.mass).sqrt();
        } else if c.model_mass.is_some() || c.model_spring_k.is_some() {
            model.filter.omega = (model.linkage.spring_k * model.filter.mass_ratio
                / model.linkage.mass)
                .sqrt();
        }
        model.linkage.validate()?;
        if model.linkage != plant.linkage {
            model
                .linkage
                .validate_range(self.geometry.phi_min, self.geometry.phi_max)?;
        }

        // reference model + adaptation constants
        let a_m = mat2(&self.controller.a_m);
        let b_m = Vector2::new(self.controller.b_m[0], self.controller.b_m[1]);
        let p = if let Some(p) = self.adaptation.p {
            if self.adaptation.use_paper_p {
                warnings.push(
                    "adaptation.use_paper_p ignored: an explicit adaptation.p is set".to_string(),
                );
            }
            Some(mat2(&p))
        } else if self.adaptation.use_paper_p {
            let printed = lyapunov::printed_p();
            let implied = lyapunov::implied_q(&a_m, &printed);
            warnings.push(format!(
                "using the printed Lyapunov matrix: it satisfies no positive-definite Q for \
                 this reference model (implied Q det = {:.4}); the Lyapunov decrease is not \
                 guaranteed",
                implied.determinant()
            ));
            Some(printed)
        } else {
            None
        };
        let adaptation = AdaptationConfig::new(
            mat2(&self.adaptation.gamma_x),
            self.adaptation.gamma_r,
            mat2(&self.adaptation.gamma_theta),
            mat2(&self.adaptation.q),
            p,
            self.backstepping.k1,
            self.backstepping.k2,
            model.lambda(),
            &a_m,
        )?;
        self.adaptation.p = Some([
            [adaptation.p[(0, 0)], adaptation.p[(0, 1)]],
            [adaptation.p[(1, 0)], adaptation.p[(1, 1)]],
        ]);

        // simulation timing
        let sim = SimConfig {
            dt_physics: self.simulation.dt_physics,
            dt_control: self.simulation.dt_control,
            duration: self.simulation.duration,
            initial: InitialState {
                x1: self.simulation.x1_0,
                x2: self.simulation.x2_0,
                z1: self.simulation.z1_0,
                z2: self.simulation.z2_0,
                xm1: self.simulation.xm1_0,
                xm2: self.simulation.xm2_0,
            },
            mode: match self.simulation.mode {
                ModeKind::FullCascade => SimMode::FullCascade,
                ModeKind::IdealMrac => SimMode::IdealMrac,
            },
            record_clf: self.simulation.record_clf,
            ideal_zoh: self.simulation.ideal_zoh,
            adaptation: match self.adaptation.scheme {
                SchemeKind::Euler => AdaptationScheme::Euler,
                SchemeKind::Continuous => AdaptationScheme::Continuous,
            },
            transient_cutoff: self.simulation.transient_cutoff,
        };
        sim.validate()?;

        let deriv_tau = match self.backstepping.filter_tau {
            Some(tau) if tau >= 0.0 => tau,
            Some(tau) => {
                return Err(Error::Validation(format!(
                    "backstepping.filter_tau must be non-negative (got {tau})"
                )))
            }
            None => 8.0 * sim.dt_control,
        };
        self.backstepping.filter_tau = Some(deriv_tau);

        // reference trajectory
        let reference = match self.reference.kind {
            ReferenceKind::ParametricWalk => {
                if !(self.reference.walk_period > 0.0) {
                    return Err(Error::Validation(
                        "reference.walk_period must be positive".to_string(),
                    ));
                }
                ReferenceTrajectory::ParametricWalk {
                    a1: self.reference.walk_a1,
                    a2: self.reference.walk_a2,
                    period: self.reference.walk_period,
                    phase2: self.reference.walk_phase2,
                }
            }
            ReferenceKind::Constant => ReferenceTrajectory::Constant {
                value: self.reference.value,
            },
            ReferenceKind::Step => ReferenceTrajectory::Step {
                value: self.reference.value,
                at: self.reference.step_time,
            },
            ReferenceKind::Sine => {
                if !(self.reference.period > 0.0) {
                    return Err(Error::Validation(
                        "reference.period must be positive".to_string(),
                    ));
                }
                ReferenceTrajectory::Sine {
                    amplitude: self.reference.amplitude,
                    period: self.reference.period,
                    phase: self.reference.phase,
                    offset: self.reference.offset,
                }
            }
            ReferenceKind::Csv => {
                if self.reference.csv_path.is_empty() {
                    return Err(Error::Validation(
                        "reference.csv_path is required for kind = \"csv\"".to_string(),
                    ));
                }
                let path = base_dir.join(&self.reference.csv_path);
                ReferenceTrajectory::from_csv_path(&path)?
            }
        };

        // disturbance
        if !self.disturbance.amplitude.is_finite() {
            return Err(Error::Validation(
                "disturbance.amplitude must be finite".to_string(),
            ));
        }
        let disturbance = match self.disturbance.kind {
            DisturbanceKind::Zero => DisturbanceProfile::Zero,
            DisturbanceKind::Constant => DisturbanceProfile::Constant {
                amplitude: self.disturbance.amplitude,
            },
            DisturbanceKind::Sinusoid => DisturbanceProfile::Sinusoid {
                amplitude: self.disturbance.amplitude,
                frequency: self.disturbance.frequency,
                phase: self.disturbance.phase,
            },
            DisturbanceKind::Piecewise => DisturbanceProfile::Piecewise {
                amplitude: self.disturbance.amplitude,
                frequency: self.disturbance.frequency,
                phase: self.disturbance.phase,
            },
        };

        let scenario = Scenario {
            plant,
            model,
            a_m,
            b_m,
            adaptation,
            paper_f2: self.backstepping.paper_f2,
            deriv_mode: match self.backstepping.derivatives {
                DerivativeKind::Model => DerivativeMode::Model,
                DerivativeKind::Filtered => DerivativeMode::Filtered,
            },
            deriv_tau,
            disturbance,
            reference,
            sim,
        };
        let output = self.output.clone();
        Ok(RunConfig {
            file: self,
            scenario,
            output,
            warnings,
        })
    }
}

impl RunConfig {
    /// Serialize the materialized configuration.
    pub fn effective_toml(&self) -> String {
        toml::to_string_pretty(&self.file).expect("materialized config serializes")
    }
}

/// Parse and resolve a configuration file.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    RunConfigFile::from_str(&text, &path.display().to_string())?.resolve(base)
}

/// Sweep-grid file: lists of values per swept constant. Missing axes stay at
/// the base configuration's value.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGridFile {
    pub gamma_x11: Vec<f64>,
    pub gamma_x22: Vec<f64>,
    pub gamma_r: Vec<f64>,
    pub gamma_theta: Vec<f64>,
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
}

impl SweepGridFile {
    pub fn resolve(&self, base: &AdaptationConfig) -> SweepGrid {
        let or_base = |axis: &[f64], v: f64| {
            if axis.is_empty() {
                vec![v]
            } else {
                axis.to_vec()
            }
        };
        SweepGrid {
            gamma_x11: or_base(&self.gamma_x11, base.gamma_x[(0, 0)]),
            gamma_x22: or_base(&self.gamma_x22, base.gamma_x[(1, 1)]),
            gamma_r: or_base(&self.gamma_r, base.gamma_r),
            gamma_theta: or_base(&self.gamma_theta, base.gamma_theta[(0, 0)]),
            k1: or_base(&self.k1, base.k1),
            k2: or_base(&self.k2, base.k2),
        }
    }
}

/// Parse a sweep-grid file against a base configuration.
pub fn parse_grid(path: &Path, base: &AdaptationConfig) -> Result<SweepGrid> {
    let text = std::fs::read_to_string(path)?;
    let file: SweepGridFile = toml::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    Ok(file.resolve(base))
}
