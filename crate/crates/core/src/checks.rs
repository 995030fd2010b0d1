//! Self-contained invariant suite behind the `validate` subcommand.
//! Deterministic (fixed seeds), no external data.

use crate::backstep::backstep_ueq;
use crate::geometry::{geometry_eval, LinkageParams};
use crate::lyapunov::{
    default_reference_model, implied_q, is_spd, printed_p, residual, solve_lyapunov,
};
use crate::motor::{zeta_from_params, MotorParams};
use crate::ode::rk4_step;
use crate::plant::{limb_rhs, sea_rhs, PlantState};
use crate::reference::ReferenceTrajectory;
use crate::sim::{run_ideal_mrac, Scenario, SimMode};
use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name,
        passed,
        detail,
    }
}

/// Analytic transmission-gain derivatives against central finite differences.
pub fn check_geometry_derivatives() -> CheckResult {
    let p = LinkageParams::default();
    let mut worst1: f64 = 0.0;
    let mut worst2: f64 = 0.0;
    for i in 0..=120 {
        let phi = -0.6 + 0.01 * i as f64;
        let ge = match geometry_eval(phi, &p) {
            Ok(ge) => ge,
            Err(e) => return check("geometry-derivatives", false, e.to_string()),
        };
        let h = 1e-5;
        let fd1 = (geometry_eval(phi + h, &p).unwrap().g - geometry_eval(phi - h, &p).unwrap().g)
            / (2.0 * h);
        worst1 = worst1.max(((ge.dg_dphi - fd1) / fd1).abs());
        let h2 = 1e-4;
        let fd2 = (geometry_eval(phi + h2, &p).unwrap().g - 2.0 * ge.g
            + geometry_eval(phi - h2, &p).unwrap().g)
            / (h2 * h2);
        worst2 = worst2.max(((ge.d2g_dphi2 - fd2) / fd2).abs());
    }
    check(
        "geometry-derivatives",
        worst1 <= 1e-6 && worst2 <= 1e-4,
        format!("max rel err: dG {worst1:.2e} (<= 1e-6), d2G {worst2:.2e} (<= 1e-4)"),
    )
}

/// Lyapunov solves: exact default-model solution, random residuals and the
/// indefiniteness of the printed matrix.
pub fn check_lyapunov() -> CheckResult {
    let (am, _) = default_reference_model();
    let p = match solve_lyapunov(&am, &Matrix2::identity()) {
        Ok(p) => p,
        Err(e) => return check("lyapunov", false, e.to_string()),
    };
    let res = residual(&am, &Matrix2::identity(), &p);
    let exact = Matrix2::new(29.0 / 24.0, 1.0 / 12.0, 1.0 / 12.0, 7.0 / 48.0);
    let gap = (p - exact).amax();

    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut worst_random: f64 = 0.0;
    for _ in 0..100 {
        let a = loop {
            let a = Matrix2::new(
                rng.random_range(-4.0..1.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-4.0..1.0),
            );
            if a.trace() < -0.1 && a.determinant() > 0.05 {
                break a;
            }
        };
        let l = Matrix2::new(
            rng.random_range(0.2..2.0),
            0.0,
            rng.random_range(-1.0..1.0),
            rng.random_range(0.2..2.0),
        );
        let q = l * l.transpose() + Matrix2::identity() * 0.01;
        match solve_lyapunov(&a, &q) {
            Ok(p) => worst_random = worst_random.max(residual(&a, &q, &p)),
            Err(e) => return check("lyapunov", false, format!("random draw failed: {e}")),
        }
    }

    // the printed matrix must be detected as inconsistent
    let implied = implied_q(&am, &printed_p());
    let det = implied.determinant();
    let detected = !is_spd(&implied) && (det + 0.0625).abs() <= 1e-12;

    check(
        "lyapunov",
        res <= 1e-12 && gap <= 1e-12 && worst_random <= 1e-12 && detected,
        format!(
            "residual {res:.2e}, exact-solution gap {gap:.2e}, worst random residual \
             {worst_random:.2e}; printed P implies indefinite Q (det = {det:.4}) -> detected"
        ),
    )
}

/// Lyapunov-function decrease along a short ideal-mode run.
pub fn check_clf_monotonicity() -> CheckResult {
    let mut sc = Scenario::paper_defaults();
    sc.sim.mode = SimMode::IdealMrac;
    sc.sim.record_clf = true;
    sc.sim.duration = 10.0;
    let run = match run_ideal_mrac(&sc) {
        Ok(run) => run,
        Err(e) => return check("clf-monotonicity", false, e.to_string()),
    };
    if let Some(f) = run.fault {
        return check("clf-monotonicity", false, format!("run aborted: {}", f.message));
    }
    let v = run.trace.column("v_clf").unwrap();
    let mut worst_increase: f64 = f64::NEG_INFINITY;
    for w in v.windows(2) {
        worst_increase = worst_increase.max(w[1] - w[0]);
    }
    check(
        "clf-monotonicity",
        worst_increase <= 1e-9,
        format!("largest per-tick increase {worst_increase:.2e} (slack 1e-9)"),
    )
}

/// Exact cancellation of the inner drift by the second back-stepping stage.
pub fn check_backstepping_cancellation() -> CheckResult {
    let sc = Scenario::paper_defaults();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let s = PlantState {
            x1: rng.random_range(-0.55..0.55),
            x2: rng.random_range(-3.0..3.0),
            z1: rng.random_range(-4.0..4.0),
            z2: rng.random_range(-4.0..4.0),
        };
        let v_x = rng.random_range(-4.0..4.0);
        let v1 = rng.random_range(-4.0..4.0);
        let v1_dot = rng.random_range(-50.0..50.0);
        let u = match backstep_ueq(&s, v_x, v1, v1_dot, &sc.model, &sc.adaptation, false) {
            Ok(u) => u,
            Err(e) => return check("backstepping-cancellation", false, e.to_string()),
        };
        let (_, phi_ddot) = limb_rhs(&s, 0.0, &sc.plant);
        let (_, z2_dot) = sea_rhs(&s, phi_ddot, u, &sc.plant).unwrap();
        let designed = v1_dot - sc.adaptation.k2 * (s.z2 - v1) - (s.z1 - v_x);
        worst = worst.max((z2_dot - designed).abs());
    }
    check(
        "backstepping-cancellation",
        worst <= 1e-10,
        format!("worst residual {worst:.2e} over 10^4 random states (<= 1e-10)"),
    )
}

/// Runge-Kutta order on the linear decay problem.
pub fn check_rk4_order() -> CheckResult {
    let global_error = |h: f64| -> f64 {
        let steps = (1.0 / h).round() as usize;
        let mut y = [1.0];
        for i in 0..steps {
            y = rk4_step(|_, s: &[f64; 1]| Ok([-s[0]]), i as f64 * h, &y, h).unwrap();
        }
        (y[0] - (-1.0f64).exp()).abs()
    };
    let hs: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];
    let pts: Vec<(f64, f64)> = hs.iter().map(|&h| (h.ln(), global_error(h).ln())).collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    check(
        "rk4-order",
        slope >= 3.8,
        format!("fitted convergence order {slope:.3} (>= 3.8)"),
    )
}

/// Velocity-coefficient consistency of the drive model.
pub fn check_zeta() -> CheckResult {
    let ratio: f64 = 270.0 / 5.68;
    let raw = zeta_from_params(&MotorParams::default());
    let ok = (ratio - 47.535).abs() <= 1e-3 && (raw - 47.535).abs() <= 1e-3;
    check(
        "zeta-consistency",
        ok,
        format!("270/5.68 = {ratio:.4}, raw-parameter value {raw:.4} (47.535 +- 1e-3)"),
    )
}

/// Bounded closed-loop run: no divergence over 60 s under a bounded
/// disturbance.
pub fn check_boundedness() -> CheckResult {
    let mut sc = Scenario::paper_defaults();
    sc.sim.duration = 60.0;
    sc.disturbance = crate::plant::DisturbanceProfile::Sinusoid {
        amplitude: 0.2,
        frequency: 0.5,
        phase: 0.0,
    };
    sc.reference = ReferenceTrajectory::default_walk();
    let run = match crate::sim::run_closed_loop(&sc) {
        Ok(run) => run,
        Err(e) => return check("boundedness", false, e.to_string()),
    };
    if let Some(f) = run.fault {
        return check("boundedness", false, format!("aborted at t = {}: {}", f.t, f.message));
    }
    let mut sup_e: f64 = 0.0;
    let mut sup_gain: f64 = 0.0;
    let mut finite = true;
    for row in &run.trace.rows {
        for v in [
            row.e1, row.e2, row.kx1, row.kx2, row.kr, row.theta1, row.theta2, row.z1, row.z2,
        ] {
            finite &= v.is_finite();
        }
        sup_e = sup_e.max(row.e1.abs()).max(row.e2.abs());
        sup_gain = sup_gain
            .max(row.kx1.abs())
            .max(row.kx2.abs())
            .max(row.kr.abs())
            .max(row.theta1.abs())
            .max(row.theta2.abs());
    }
    check(
        "boundedness",
        finite && sup_e.is_finite() && sup_gain.is_finite(),
        format!("sup error norm {sup_e:.3}, sup gain magnitude {sup_gain:.3}, all finite"),
    )
}

/// Run the whole suite in a fixed order.
pub fn run_all() -> Vec<CheckResult> {
    vec![
        check_geometry_derivatives(),
        check_lyapunov(),
        check_zeta(),
        check_rk4_order(),
        check_backstepping_cancellation(),
        check_clf_monotonicity(),
        check_boundedness(),
    ]
}
