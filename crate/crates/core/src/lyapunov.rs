//! Dense 2x2 continuous algebraic Lyapunov equation.
//!
//! `P A + A' P = -Q` is solved directly on the three independent entries of
//! symmetric `P`; for a Hurwitz `A` the 3x3 system has determinant
//! `4 tr(A) det(A) != 0`, so the solve cannot be singular.

use crate::error::{Error, Result};
use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

/// True iff both eigenvalues of `a` have strictly negative real part.
pub fn is_hurwitz(a: &Matrix2<f64>) -> bool {
    a.trace() < 0.0 && a.determinant() > 0.0
}

/// Symmetric positive-definiteness by the leading-principal-minor test.
pub fn is_spd(m: &Matrix2<f64>) -> bool {
    let sym_tol = 1e-12 * (1.0 + m.amax());
    (m[(0, 1)] - m[(1, 0)]).abs() <= sym_tol && m[(0, 0)] > 0.0 && m.determinant() > 0.0
}

pub fn require_spd(m: &Matrix2<f64>, name: &str) -> Result<()> {
    if is_spd(m) {
        Ok(())
    } else {
        Err(Error::NotSpd(name.to_string()))
    }
}

/// Max-norm of `P A + A' P + Q`.
pub fn residual(a: &Matrix2<f64>, q: &Matrix2<f64>, p: &Matrix2<f64>) -> f64 {
    (p * a + a.transpose() * p + q).amax()
}

/// Solve `P A + A' P = -Q` for symmetric positive-definite `P`.
pub fn solve_lyapunov(a: &Matrix2<f64>, q: &Matrix2<f64>) -> Result<Matrix2<f64>> {
    if !is_hurwitz(a) {
        return Err(Error::NotHurwitz {
            trace: a.trace(),
            det: a.determinant(),
        });
    }
    require_spd(q, "Q")?;

    let (a11, a12, a21, a22) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    // unknowns [p11, p12, p22]
    let m = Matrix3::new(
        2.0 * a11,
        2.0 * a21,
        0.0,
        a12,
        a11 + a22,
        a21,
        0.0,
        2.0 * a12,
        2.0 * a22,
    );
    let rhs = -Vector3::new(q[(0, 0)], q[(0, 1)], q[(1, 1)]);
    let sol = m.lu().solve(&rhs).ok_or(Error::SolveSingular)?;
    let p = Matrix2::new(sol[0], sol[1], sol[1], sol[2]);
    require_spd(&p, "P")?;
    Ok(p)
}

/// The `Q` implied by a candidate `P`, i.e. `-(P A + A' P)`.
pub fn implied_q(a: &Matrix2<f64>, p: &Matrix2<f64>) -> Matrix2<f64> {
    -(p * a + a.transpose() * p)
}

/// Reference-model matrices used throughout the default configuration.
pub fn default_reference_model() -> (Matrix2<f64>, Vector2<f64>) {
    (
        Matrix2::new(0.0, 1.0, -6.0, -4.0),
        Vector2::new(0.0, 6.0),
    )
}

/// The symmetric matrix printed alongside the original controller derivation.
/// It does not satisfy the Lyapunov equation for any positive-definite `Q`
/// under the default reference model; see [`implied_q`].
pub fn printed_p() -> Matrix2<f64> {
    Matrix2::new(3.0 / 8.0, 0.25, 0.25, 3.0 / 16.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn default_model_identity_q_solution() {
        let (am, _) = default_reference_model();
        let p = solve_lyapunov(&am, &Matrix2::identity()).unwrap();
        assert_relative_eq!(p[(0, 0)], 29.0 / 24.0, max_relative = 1e-13);
        assert_relative_eq!(p[(0, 1)], 1.0 / 12.0, max_relative = 1e-13);
        assert_relative_eq!(p[(1, 0)], 1.0 / 12.0, max_relative = 1e-13);
        assert_relative_eq!(p[(1, 1)], 7.0 / 48.0, max_relative = 1e-13);
        assert!(residual(&am, &Matrix2::identity(), &p) <= 1e-14);
    }

    #[test]
    fn scalar_decoupled_case() {
        let a = -Matrix2::identity();
        let p = solve_lyapunov(&a, &Matrix2::identity()).unwrap();
        assert_relative_eq!(p, Matrix2::identity() * 0.5, max_relative = 1e-15);
    }

    #[test]
    fn random_draws_have_tiny_residual_and_spd_solution() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            // Hurwitz by construction: negative trace, positive determinant
            let a = loop {
                let a = Matrix2::new(
                    rng.random_range(-4.0..1.0),
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-4.0..1.0),
                );
                if is_hurwitz(&a) && a.determinant() > 0.05 && a.trace() < -0.1 {
                    break a;
                }
            };
            // SPD via L L' + eps I
            let l = Matrix2::new(
                rng.random_range(0.2..2.0),
                0.0,
                rng.random_range(-1.0..1.0),
                rng.random_range(0.2..2.0),
            );
            let q = l * l.transpose() + Matrix2::identity() * 0.01;
            let p = solve_lyapunov(&a, &q).unwrap();
            assert!(is_spd(&p));
            assert!(residual(&a, &q, &p) <= 1e-12, "residual too large");
        }
    }

    #[test]
    fn non_hurwitz_is_rejected() {
        let a = Matrix2::new(0.0, 1.0, 6.0, -4.0); // det < 0
        assert!(matches!(
            solve_lyapunov(&a, &Matrix2::identity()),
            Err(Error::NotHurwitz { .. })
        ));
    }

    #[test]
    fn indefinite_q_is_rejected() {
        let (am, _) = default_reference_model();
        let q = Matrix2::new(4000.0, 0.0, 0.0, -50.0);
        assert!(matches!(
            solve_lyapunov(&am, &q),
            Err(Error::NotSpd(_))
        ));
    }

    #[test]
    fn printed_p_implies_indefinite_q() {
        let (am, _) = default_reference_model();
        let q = implied_q(&am, &printed_p());
        assert_relative_eq!(q.determinant(), -0.0625, max_relative = 1e-12);
        assert!(!is_spd(&q));
    }
}
