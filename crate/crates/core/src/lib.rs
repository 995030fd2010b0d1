// `!(v > 0.0)` style comparisons are deliberate: they reject NaN along with
// non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Closed-loop simulation of a series-elastic-actuator-driven lower limb
//! under model-reference adaptive control cascaded through a two-stage
//! back-stepping design.
//!
//! The crate is organized along the pipeline:
//!
//! * [`geometry`] — linkage kinematics and the torque/deflection transmission,
//! * [`motor`] — drive electromechanics and its reduced filter constants,
//! * [`plant`] — the coupled limb + actuator continuous dynamics,
//! * [`lyapunov`] — the dense 2x2 algebraic Lyapunov solve,
//! * [`mrac`] — reference model, adaptive law and diagnostics,
//! * [`backstep`] — the two back-stepping stages and derivative estimation,
//! * [`ode`] — fixed-step Runge-Kutta integration,
//! * [`sim`] — the deterministic closed-loop engine, metrics and sweeps,
//! * [`reference`], [`trace`], [`config`], [`plot`] — trajectories and I/O,
//! * [`checks`] — the self-contained invariant suite.

pub mod backstep;
pub mod checks;
pub mod config;
pub mod error;
pub mod geometry;
pub mod lyapunov;
pub mod motor;
pub mod mrac;
pub mod ode;
pub mod plant;
pub mod plot;
pub mod reference;
pub mod sim;
pub mod trace;

pub use error::{Error, Result};
