//! Deterministic fixed-step closed-loop simulation.
//!
//! The controller runs on a zero-order hold at `dt_control`; between ticks
//! the plant integrates with classical Runge-Kutta substeps at `dt_physics`.
//! Everything is seed-free: identical configurations produce bit-identical
//! traces.

use crate::backstep::{backstep_ueq, backstep_v1, DerivativeEstimator};
use crate::error::{Error, Result};
use crate::geometry::LinkageParams;
use crate::lyapunov;
use crate::motor::{sea_filter_constants, MotorParams};
use crate::mrac::{
    adaptation_rates, clf_value, control_vx, ideal_gains, regressor, AdaptationConfig,
    AdaptiveGains, ReferenceModel,
};
use crate::ode::rk4_step;
use crate::plant::{coupled_rhs, DisturbanceProfile, PlantParams, PlantState};
use crate::reference::ReferenceTrajectory;
use crate::trace::{SimTrace, TraceRow};
use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;

/// Loop topology of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    /// Adaptive law cascaded through both back-stepping stages into the
    /// actuator dynamics.
    FullCascade,
    /// Adaptive torque applied to the limb directly (the pre-cascade system);
    /// used by the Lyapunov diagnostics.
    IdealMrac,
}

/// How the adaptive gains are integrated in cascade mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdaptationScheme {
    /// Forward Euler at the control rate (default).
    Euler,
    /// Co-integrated with the plant at the physics rate (gains evolve
    /// continuously between ticks while the control output stays held).
    Continuous,
}

/// How the back-stepping stages obtain the command rate `v_x_dot`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMode {
    /// Model-based: expand `v_x_dot` through the known adaptation rates and
    /// the controller-side plant model (default). Only the exogenous
    /// reference rate is estimated numerically.
    Model,
    /// Filtered backward differences of the sampled command.
    Filtered,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    pub x1: f64,
    pub x2: f64,
    pub z1: f64,
    pub z2: f64,
    pub xm1: f64,
    pub xm2: f64,
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState {
            x1: 0.2,
            x2: 0.0,
            z1: 0.0,
            z2: 0.0,
            xm1: 0.0,
            xm2: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dt_physics: f64,
    pub dt_control: f64,
    pub duration: f64,
    pub initial: InitialState,
    pub mode: SimMode,
    /// Record the Lyapunov-function column.
    pub record_clf: bool,
    /// Run the ideal mode on the same zero-order-hold tick structure as the
    /// cascade instead of as one continuously coupled system.
    pub ideal_zoh: bool,
    pub adaptation: AdaptationScheme,
    /// Metrics ignore everything before this time (s).
    pub transient_cutoff: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt_physics: 1e-4,
            dt_control: 0.01,
            duration: 20.0,
            initial: InitialState::default(),
            mode: SimMode::FullCascade,
            record_clf: false,
            ideal_zoh: false,
            adaptation: AdaptationScheme::Euler,
            transient_cutoff: 2.0,
        }
    }
}

impl SimConfig {
    /// Physics substeps per control tick; errors unless `dt_control` is an
    /// integer multiple of `dt_physics`.
    pub fn substeps(&self) -> Result<usize> {
        if !(self.dt_physics > 0.0 && self.dt_control > 0.0) {
            return Err(Error::Validation(
                "dt_physics and dt_control must be positive".to_string(),
            ));
        }
        let ratio = self.dt_control / self.dt_physics;
        let n = ratio.round();
        if n < 1.0 || (ratio - n).abs() > 1e-9 * n {
            return Err(Error::Validation(format!(
                "dt_control ({}) must be an integer multiple of dt_physics ({}); ratio = {ratio}",
                self.dt_control, self.dt_physics
            )));
        }
        Ok(n as usize)
    }

    /// Number of control intervals; the trace holds `ticks() + 1` rows.
    pub fn ticks(&self) -> usize {
        (self.duration / self.dt_control + 1e-9).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        self.substeps()?;
        if !(self.duration > 0.0) {
            return Err(Error::Validation(format!(
                "duration must be positive (got {})",
                self.duration
            )));
        }
        if !(self.transient_cutoff >= 0.0) {
            return Err(Error::Validation(
                "transient_cutoff must be non-negative".to_string(),
            ));
        }
        Ok(())
    }
}

/// A fully resolved closed-loop setup: true plant, controller-side model,
/// reference model, adaptation constants and the run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub plant: PlantParams,
    /// Controller-side copy of the plant parameters (identical by default).
    pub model: PlantParams,
    pub a_m: Matrix2<f64>,
    pub b_m: Vector2<f64>,
    pub adaptation: AdaptationConfig,
    /// Use the literally printed inner drift (no velocity-coefficient terms).
    pub paper_f2: bool,
    /// Source of the first-stage command rate.
    pub deriv_mode: DerivativeMode,
    /// Low-pass time constant of the derivative estimators (s).
    pub deriv_tau: f64,
    pub disturbance: DisturbanceProfile,
    pub reference: ReferenceTrajectory,
    pub sim: SimConfig,
}

impl Scenario {
    /// The tabulated default setup: identified plant, default walk reference,
    /// published adaptation gains, zero disturbance.
    pub fn paper_defaults() -> Scenario {
        let linkage = LinkageParams::default();
        let filter = sea_filter_constants(
            &MotorParams::default(),
            Some(47.535),
            linkage.spring_k,
            linkage.mass,
            1.0,
        );
        let plant = PlantParams {
            linkage,
            damping: 0.5,
            filter,
        };
        let (a_m, b_m) = lyapunov::default_reference_model();
        // Q = diag(3, 1): its solved P reproduces the published adaptation
        // weighting exactly (P B = [1/4, 3/16]), with a valid SPD P.
        let adaptation = AdaptationConfig::new(
            Matrix2::new(4000.0, 0.0, 0.0, 50.0),
            2000.0,
            Matrix2::new(50.0, 0.0, 0.0, 50.0),
            Matrix2::new(3.0, 0.0, 0.0, 1.0),
            None,
            30.0,
            10.0,
            plant.lambda(),
            &a_m,
        )
        .expect("default adaptation constants are valid");
        let sim = SimConfig::default();
        Scenario {
            model: plant.clone(),
            plant,
            a_m,
            b_m,
            adaptation,
            paper_f2: false,
            deriv_mode: DerivativeMode::Filtered,
            // shorter time constants let the differentiated first-stage
            // command close an unstable loop at the published gains
            deriv_tau: 8.0 * sim.dt_control,
            disturbance: DisturbanceProfile::Zero,
            reference: ReferenceTrajectory::default_walk(),
            sim,
        }
    }

    /// Ideal fixed gains of the true plant under the matching conditions,
    /// plus the true uncertainty vector. Diagnostic only.
    pub fn ideal_point(&self) -> Result<AdaptiveGains> {
        let (k_x, k_r) = ideal_gains(
            &self.plant.a_matrix(),
            self.plant.lambda(),
            &self.a_m,
            &self.b_m,
        )?;
        Ok(AdaptiveGains {
            k_x,
            k_r,
            theta: Vector2::new(
                self.plant.linkage.mass * self.plant.linkage.gravity * self.plant.linkage.d3,
                -self.disturbance.nominal(),
            ),
        })
    }
}

/// Why a run stopped early.
#[derive(Debug, Clone, PartialEq)]
pub struct SimFault {
    pub t: f64,
    pub message: String,
}

/// A finished (or aborted) run: the trace plus an optional fault.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRun {
    pub trace: SimTrace,
    pub fault: Option<SimFault>,
}

impl SimRun {
    pub fn is_ok(&self) -> bool {
        self.fault.is_none()
    }
}

fn finite_or_fault(y: &[f64], t: f64) -> std::result::Result<(), SimFault> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(SimFault {
            t,
            message: Error::NonFiniteState { t }.to_string(),
        })
    }
}

/// Full cascade: adaptation, both back-stepping stages and the actuator
/// dynamics under a zero-order hold.
pub fn run_closed_loop(sc: &Scenario) -> Result<SimRun> {
    sc.sim.validate()?;
    let substeps = sc.sim.substeps()?;
    let n_ticks = sc.sim.ticks();
    let dt_c = sc.sim.dt_control;
    let h = sc.sim.dt_physics;
    let cfg = &sc.adaptation;
    let ideal = if sc.sim.record_clf {
        Some(sc.ideal_point()?)
    } else {
        None
    };

    let init = sc.sim.initial;
    let mut plant_y = [init.x1, init.x2, init.z1, init.z2];
    let mut rm = ReferenceModel::new(sc.a_m, sc.b_m, Vector2::new(init.xm1, init.xm2))?;
    let mut gains = AdaptiveGains::zero();
    let mut est_vx = DerivativeEstimator::new(dt_c, sc.deriv_tau);
    let mut est_v1 = DerivativeEstimator::new(dt_c, sc.deriv_tau);
    let mut est_r = DerivativeEstimator::new(dt_c, sc.deriv_tau);

    let mut trace = SimTrace {
        rows: Vec::with_capacity(n_ticks + 1),
        with_clf: sc.sim.record_clf,
    };
    let mut fault = None;

    'ticks: for k in 0..=n_ticks {
        let t = k as f64 * dt_c;
        let r = sc.reference.sample(t);
        let x = Vector2::new(plant_y[0], plant_y[1]);
        let e = x - rm.state;
        let phi = regressor(&x);

        let rates = adaptation_rates(&e, &x, r, &phi, cfg);
        if sc.sim.adaptation == AdaptationScheme::Euler {
            gains.k_x += rates.k_x * dt_c;
            gains.k_r += rates.k_r * dt_c;
            gains.theta += rates.theta * dt_c;
        }
        if !gains.is_finite() {
            fault = Some(SimFault {
                t,
                message: "adaptive gains diverged".to_string(),
            });
            break 'ticks;
        }

        let state = PlantState::from_array(&plant_y);
        let v_x = control_vx(&gains, &x, r);
        let v_x_dot = match sc.deriv_mode {
            DerivativeMode::Filtered => est_vx.update(v_x),
            DerivativeMode::Model => {
                let r_dot = est_r.update(r);
                crate::backstep::control_vx_rate(&gains, &rates, &state, r, r_dot, &sc.model)
            }
        };
        let v1 = backstep_v1(&e, state.z1, v_x, v_x_dot, cfg);
        let v1_dot = est_v1.update(v1);
        let u_eq = match backstep_ueq(&state, v_x, v1, v1_dot, &sc.model, cfg, sc.paper_f2) {
            Ok(u) => u,
            Err(err) => {
                fault = Some(SimFault {
                    t,
                    message: err.to_string(),
                });
                break 'ticks;
            }
        };

        trace.rows.push(TraceRow {
            t,
            r,
            x1: plant_y[0],
            x2: plant_y[1],
            xm1: rm.state[0],
            xm2: rm.state[1],
            e1: e[0],
            e2: e[1],
            z1: plant_y[2],
            z2: plant_y[3],
            v_x,
            v_1: v1,
            u_eq,
            kx1: gains.k_x[0],
            kx2: gains.k_x[1],
            kr: gains.k_r,
            theta1: gains.theta[0],
            theta2: gains.theta[1],
            tau_d: sc.disturbance.torque(t),
            v_clf: ideal
                .as_ref()
                .map(|ip| clf_value(&e, &gains, ip, cfg))
                .unwrap_or(0.0),
        });

        if k == n_ticks {
            break;
        }

        // hold u_eq and r over the control interval
        match sc.sim.adaptation {
            AdaptationScheme::Euler => {
                for i in 0..substeps {
                    let ts = t + i as f64 * h;
                    match rk4_step(
                        |tt, y: &[f64; 4]| coupled_rhs(tt, y, u_eq, &sc.disturbance, &sc.plant),
                        ts,
                        &plant_y,
                        h,
                    ) {
                        Ok(next) => plant_y = next,
                        Err(err) => {
                            fault = Some(SimFault {
                                t: ts,
                                message: err.to_string(),
                            });
                            break 'ticks;
                        }
                    }
                    if let Err(f) = finite_or_fault(&plant_y, ts + h) {
                        fault = Some(f);
                        break 'ticks;
                    }
                }
                crate::mrac::reference_step(&mut rm, r, dt_c, substeps);
            }
            AdaptationScheme::Continuous => {
                let mut y = [
                    plant_y[0],
                    plant_y[1],
                    plant_y[2],
                    plant_y[3],
                    rm.state[0],
                    rm.state[1],
                    gains.k_x[0],
                    gains.k_x[1],
                    gains.k_r,
                    gains.theta[0],
                    gains.theta[1],
                ];
                for i in 0..substeps {
                    let ts = t + i as f64 * h;
                    let step = rk4_step(
                        |tt, yy: &[f64; 11]| {
                            let plant_part: [f64; 4] =
                                coupled_rhs(tt, &[yy[0], yy[1], yy[2], yy[3]], u_eq, &sc.disturbance, &sc.plant)?;
                            let xm = Vector2::new(yy[4], yy[5]);
                            let xm_dot = sc.a_m * xm + sc.b_m * r;
                            let xs = Vector2::new(yy[0], yy[1]);
                            let es = xs - xm;
                            let rates = adaptation_rates(&es, &xs, r, &regressor(&xs), cfg);
                            Ok([
                                plant_part[0],
                                plant_part[1],
                                plant_part[2],
                                plant_part[3],
                                xm_dot[0],
                                xm_dot[1],
                                rates.k_x[0],
                                rates.k_x[1],
                                rates.k_r,
                                rates.theta[0],
                                rates.theta[1],
                            ])
                        },
                        ts,
                        &y,
                        h,
                    );
                    match step {
                        Ok(next) => y = next,
                        Err(err) => {
                            fault = Some(SimFault {
                                t: ts,
                                message: err.to_string(),
                            });
                            break 'ticks;
                        }
                    }
                    if let Err(f) = finite_or_fault(&y, ts + h) {
                        fault = Some(f);
                        break 'ticks;
                    }
                }
                plant_y = [y[0], y[1], y[2], y[3]];
                rm.state = Vector2::new(y[4], y[5]);
                gains.k_x = Vector2::new(y[6], y[7]);
                gains.k_r = y[8];
                gains.theta = Vector2::new(y[9], y[10]);
            }
        }
    }

    Ok(SimRun { trace, fault })
}

/// Pre-cascade system: the adaptive torque drives the limb directly.
///
/// By default the whole loop (plant, reference model, adaptation) integrates
/// as one coupled continuous system sampled at the control rate, which
/// realizes the continuous-time Lyapunov decrease to integration accuracy.
/// `ideal_zoh = true` selects the held-control tick structure instead.
pub fn run_ideal_mrac(sc: &Scenario) -> Result<SimRun> {
    sc.sim.validate()?;
    let substeps = sc.sim.substeps()?;
    let n_ticks = sc.sim.ticks();
    let dt_c = sc.sim.dt_control;
    let h = sc.sim.dt_physics;
    let cfg = &sc.adaptation;
    let ideal = sc.ideal_point()?;
    let record_clf = sc.sim.record_clf;

    let lam = sc.plant.lambda();
    let a = sc.plant.a_matrix();
    let lk = &sc.plant.linkage;
    let mgd3 = lk.mass * lk.gravity * lk.d3;

    let init = sc.sim.initial;
    let mut y = [
        init.x1,
        init.x2,
        init.xm1,
        init.xm2,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ];

    let mut trace = SimTrace {
        rows: Vec::with_capacity(n_ticks + 1),
        with_clf: record_clf,
    };
    let mut fault = None;

    let rhs_continuous = |t: f64, yy: &[f64; 9]| -> Result<[f64; 9]> {
        let x = Vector2::new(yy[0], yy[1]);
        let xm = Vector2::new(yy[2], yy[3]);
        let gains = AdaptiveGains {
            k_x: Vector2::new(yy[4], yy[5]),
            k_r: yy[6],
            theta: Vector2::new(yy[7], yy[8]),
        };
        let r = sc.reference.sample(t);
        let e = x - xm;
        let phi = regressor(&x);
        let rates = adaptation_rates(&e, &x, r, &phi, cfg);
        let v_x = control_vx(&gains, &x, r);
        let f = mgd3 * x[0].sin() - sc.disturbance.torque(t);
        let x_dot = a * x + Vector2::new(0.0, lam * (v_x - f));
        let xm_dot = sc.a_m * xm + sc.b_m * r;
        Ok([
            x_dot[0],
            x_dot[1],
            xm_dot[0],
            xm_dot[1],
            rates.k_x[0],
            rates.k_x[1],
            rates.k_r,
            rates.theta[0],
            rates.theta[1],
        ])
    };

    'ticks: for k in 0..=n_ticks {
        let t = k as f64 * dt_c;
        let r = sc.reference.sample(t);
        let x = Vector2::new(y[0], y[1]);
        let xm = Vector2::new(y[2], y[3]);
        let e = x - xm;
        let mut gains = AdaptiveGains {
            k_x: Vector2::new(y[4], y[5]),
            k_r: y[6],
            theta: Vector2::new(y[7], y[8]),
        };

        if sc.sim.ideal_zoh {
            let phi = regressor(&x);
            let rates = adaptation_rates(&e, &x, r, &phi, cfg);
            gains.k_x += rates.k_x * dt_c;
            gains.k_r += rates.k_r * dt_c;
            gains.theta += rates.theta * dt_c;
            y[4] = gains.k_x[0];
            y[5] = gains.k_x[1];
            y[6] = gains.k_r;
            y[7] = gains.theta[0];
            y[8] = gains.theta[1];
        }
        if !gains.is_finite() {
            fault = Some(SimFault {
                t,
                message: "adaptive gains diverged".to_string(),
            });
            break 'ticks;
        }

        let v_x = control_vx(&gains, &x, r);
        trace.rows.push(TraceRow {
            t,
            r,
            x1: y[0],
            x2: y[1],
            xm1: y[2],
            xm2: y[3],
            e1: e[0],
            e2: e[1],
            z1: v_x, // the applied torque is the adaptive command itself
            z2: 0.0,
            v_x,
            v_1: 0.0,
            u_eq: 0.0,
            kx1: gains.k_x[0],
            kx2: gains.k_x[1],
            kr: gains.k_r,
            theta1: gains.theta[0],
            theta2: gains.theta[1],
            tau_d: sc.disturbance.torque(t),
            v_clf: if record_clf {
                clf_value(&e, &gains, &ideal, cfg)
            } else {
                0.0
            },
        });

        if k == n_ticks {
            break;
        }

        if sc.sim.ideal_zoh {
            let held_vx = v_x;
            let mut xy = [y[0], y[1]];
            for i in 0..substeps {
                let ts = t + i as f64 * h;
                match rk4_step(
                    |tt, s: &[f64; 2]| {
                        let xs = Vector2::new(s[0], s[1]);
                        let f = mgd3 * s[0].sin() - sc.disturbance.torque(tt);
                        let d = a * xs + Vector2::new(0.0, lam * (held_vx - f));
                        Ok([d[0], d[1]])
                    },
                    ts,
                    &xy,
                    h,
                ) {
                    Ok(next) => xy = next,
                    Err(err) => {
                        fault = Some(SimFault {
                            t: ts,
                            message: err.to_string(),
                        });
                        break 'ticks;
                    }
                }
            }
            y[0] = xy[0];
            y[1] = xy[1];
            let mut rm = ReferenceModel::new(sc.a_m, sc.b_m, xm)?;
            crate::mrac::reference_step(&mut rm, r, dt_c, substeps);
            y[2] = rm.state[0];
            y[3] = rm.state[1];
        } else {
            for i in 0..substeps {
                let ts = t + i as f64 * h;
                match rk4_step(rhs_continuous, ts, &y, h) {
                    Ok(next) => y = next,
                    Err(err) => {
                        fault = Some(SimFault {
                            t: ts,
                            message: err.to_string(),
                        });
                        break 'ticks;
                    }
                }
                if let Err(f) = finite_or_fault(&y, ts + h) {
                    fault = Some(f);
                    break 'ticks;
                }
            }
        }
    }

    Ok(SimRun { trace, fault })
}

/// Run the mode selected in the scenario.
pub fn run(sc: &Scenario) -> Result<SimRun> {
    match sc.sim.mode {
        SimMode::FullCascade => run_closed_loop(sc),
        SimMode::IdealMrac => run_ideal_mrac(sc),
    }
}

/// Aggregate tracking/torque statistics of a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// Peak |e1| at or after the transient cutoff (rad).
    pub peak_e1_post: f64,
    /// RMS of e1 at or after the cutoff (rad).
    pub rms_e1_post: f64,
    /// Peak |z1| over the whole trace (N*m).
    pub peak_z1_overall: f64,
    /// Peak |z1| at or after the cutoff (N*m).
    pub peak_z1_post: f64,
    /// Peak |e2| at or after the cutoff (rad/s).
    pub peak_e2_post: f64,
    /// Whether the post-cutoff angle error stayed within 0.05 rad.
    pub settled: bool,
}

/// Threshold on post-cutoff |e1| used by the `settled` flag.
pub const SETTLED_E1_BOUND: f64 = 0.05;

pub fn metrics(trace: &SimTrace, transient_cutoff: f64) -> Result<Metrics> {
    if trace.rows.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let post: Vec<&TraceRow> = trace
        .rows
        .iter()
        .filter(|row| row.t >= transient_cutoff - 1e-12)
        .collect();
    if post.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let peak_e1_post = post.iter().map(|r| r.e1.abs()).fold(0.0, f64::max);
    let rms_e1_post =
        (post.iter().map(|r| r.e1 * r.e1).sum::<f64>() / post.len() as f64).sqrt();
    let peak_z1_overall = trace.rows.iter().map(|r| r.z1.abs()).fold(0.0, f64::max);
    let peak_z1_post = post.iter().map(|r| r.z1.abs()).fold(0.0, f64::max);
    let peak_e2_post = post.iter().map(|r| r.e2.abs()).fold(0.0, f64::max);
    Ok(Metrics {
        peak_e1_post,
        rms_e1_post,
        peak_z1_overall,
        peak_z1_post,
        peak_e2_post,
        settled: peak_e1_post <= SETTLED_E1_BOUND,
    })
}

/// Axis lists for a gain sweep; the cell set is their cartesian product in
/// declaration order (later axes vary fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub gamma_x11: Vec<f64>,
    pub gamma_x22: Vec<f64>,
    pub gamma_r: Vec<f64>,
    pub gamma_theta: Vec<f64>,
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
}

impl SweepGrid {
    /// A single-cell grid at the scenario's own constants.
    pub fn baseline(cfg: &AdaptationConfig) -> Self {
        SweepGrid {
            gamma_x11: vec![cfg.gamma_x[(0, 0)]],
            gamma_x22: vec![cfg.gamma_x[(1, 1)]],
            gamma_r: vec![cfg.gamma_r],
            gamma_theta: vec![cfg.gamma_theta[(0, 0)]],
            k1: vec![cfg.k1],
            k2: vec![cfg.k2],
        }
    }

    pub fn points(&self) -> Vec<SweepPoint> {
        let mut out = Vec::new();
        let mut index = 0;
        for &gx11 in &self.gamma_x11 {
            for &gx22 in &self.gamma_x22 {
                for &gr in &self.gamma_r {
                    for &gth in &self.gamma_theta {
                        for &k1 in &self.k1 {
                            for &k2 in &self.k2 {
                                out.push(SweepPoint {
                                    index,
                                    gamma_x11: gx11,
                                    gamma_x22: gx22,
                                    gamma_r: gr,
                                    gamma_theta: gth,
                                    k1,
                                    k2,
                                });
                                index += 1;
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub gamma_x11: f64,
    pub gamma_x22: f64,
    pub gamma_r: f64,
    pub gamma_theta: f64,
    pub k1: f64,
    pub k2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub point: SweepPoint,
    pub metrics: Option<Metrics>,
    pub fault: Option<String>,
}

fn scenario_at_point(base: &Scenario, pt: &SweepPoint) -> Result<Scenario> {
    let mut sc = base.clone();
    sc.adaptation = AdaptationConfig::new(
        Matrix2::new(pt.gamma_x11, 0.0, 0.0, pt.gamma_x22),
        pt.gamma_r,
        Matrix2::new(pt.gamma_theta, 0.0, 0.0, pt.gamma_theta),
        base.adaptation.q,
        Some(base.adaptation.p),
        pt.k1,
        pt.k2,
        base.adaptation.lambda,
        &base.a_m,
    )?;
    Ok(sc)
}

fn run_cell(base: &Scenario, pt: &SweepPoint) -> SweepRow {
    let outcome = scenario_at_point(base, pt).and_then(|sc| {
        let run = run_closed_loop(&sc)?;
        Ok((metrics(&run.trace, sc.sim.transient_cutoff), run.fault))
    });
    match outcome {
        Ok((m, None)) => SweepRow {
            point: *pt,
            metrics: m.ok(),
            fault: None,
        },
        Ok((_, Some(f))) => SweepRow {
            point: *pt,
            metrics: None,
            fault: Some(format!("aborted at t = {}: {}", f.t, f.message)),
        },
        Err(e) => SweepRow {
            point: *pt,
            metrics: None,
            fault: Some(e.to_string()),
        },
    }
}

/// One closed-loop run per grid point, in deterministic grid order.
/// Cells share only the immutable base scenario; results are identical
/// whether or not they execute in parallel.
pub fn run_sweep(base: &Scenario, grid: &SweepGrid, parallel: bool) -> Vec<SweepRow> {
    let points = grid.points();
    if parallel {
        points.par_iter().map(|pt| run_cell(base, pt)).collect()
    } else {
        points.iter().map(|pt| run_cell(base, pt)).collect()
    }
}

pub const SWEEP_COLUMNS: [&str; 14] = [
    "index",
    "gamma_x11",
    "gamma_x22",
    "gamma_r",
    "gamma_theta",
    "k1",
    "k2",
    "peak_e1_post",
    "rms_e1_post",
    "peak_z1_overall",
    "peak_z1_post",
    "peak_e2_post",
    "settled",
    "status",
];

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    out.push_str(&SWEEP_COLUMNS.join(","));
    out.push('\n');
    for row in rows {
        let p = &row.point;
        out.push_str(&format!(
            "{},{},{},{},{},{},{}",
            p.index, p.gamma_x11, p.gamma_x22, p.gamma_r, p.gamma_theta, p.k1, p.k2
        ));
        match (&row.metrics, &row.fault) {
            (Some(m), None) => out.push_str(&format!(
                ",{},{},{},{},{},{},ok",
                m.peak_e1_post,
                m.rms_e1_post,
                m.peak_z1_overall,
                m.peak_z1_post,
                m.peak_e2_post,
                m.settled
            )),
            (_, fault) => {
                let msg = fault
                    .clone()
                    .unwrap_or_else(|| "no metrics".to_string())
                    .replace(',', ";");
                out.push_str(&format!(",,,,,,,{msg}"));
            }
        }
        out.push('\n');
    }
    out
}
