//! Fixed-step classical Runge-Kutta integration.

use crate::error::{Error, Result};

/// One classical 4th-order Runge-Kutta step of size `h` from `(t, y)`.
///
/// The right-hand side may fail (e.g. on a geometry fault); stage derivatives
/// are checked for finiteness.
pub fn rk4_step<const N: usize, F>(mut rhs: F, t: f64, y: &[f64; N], h: f64) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    debug_assert!(h > 0.0);
    let k1 = checked(rhs(t, y)?, t)?;
    let k2 = checked(rhs(t + 0.5 * h, &offset(y, &k1, 0.5 * h))?, t)?;
    let k3 = checked(rhs(t + 0.5 * h, &offset(y, &k2, 0.5 * h))?, t)?;
    let k4 = checked(rhs(t + h, &offset(y, &k3, h))?, t)?;

    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

fn offset<const N: usize>(y: &[f64; N], k: &[f64; N], scale: f64) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += scale * k[i];
    }
    out
}

fn checked<const N: usize>(k: [f64; N], t: f64) -> Result<[f64; N]> {
    if k.iter().all(|v| v.is_finite()) {
        Ok(k)
    } else {
        Err(Error::NonFiniteDerivative { t })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn decay(_t: f64, y: &[f64; 1]) -> Result<[f64; 1]> {
        Ok([-y[0]])
    }

    #[test]
    fn single_step_matches_degree_four_taylor() {
        let y = rk4_step(decay, 0.0, &[1.0], 0.1).unwrap();
        // RK4 on a linear problem reproduces the degree-4 Taylor polynomial
        let h: f64 = 0.1;
        let taylor = 1.0 - h + h * h / 2.0 - h.powi(3) / 6.0 + h.powi(4) / 24.0;
        assert_relative_eq!(y[0], taylor, max_relative = 1e-15);
        assert_relative_eq!(y[0], 0.9048375, max_relative = 1e-12);
    }

    #[test]
    fn zero_rhs_leaves_state_unchanged() {
        let y = rk4_step(|_, _: &[f64; 2]| Ok([0.0, 0.0]), 0.0, &[3.0, -4.0], 0.5).unwrap();
        assert_eq!(y, [3.0, -4.0]);
    }

    fn global_error(h: f64) -> f64 {
        let steps = (1.0 / h).round() as usize;
        let mut y = [1.0];
        for i in 0..steps {
            y = rk4_step(decay, i as f64 * h, &y, h).unwrap();
        }
        (y[0] - (-1.0f64).exp()).abs()
    }

    #[test]
    fn halving_step_shrinks_error_sixteenfold() {
        let e1 = global_error(0.1);
        let e2 = global_error(0.05);
        assert!(e1 / e2 >= 15.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn fitted_convergence_order_is_at_least_3_8() {
        let hs: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];
        let pts: Vec<(f64, f64)> = hs.iter().map(|&h| (h.ln(), global_error(h).ln())).collect();
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        assert!(slope >= 3.8, "fitted order {slope}");
    }

    #[test]
    fn non_finite_derivative_is_an_error() {
        let r = rk4_step(|_, y: &[f64; 1]| Ok([1.0 / (y[0] - 1.0)]), 0.0, &[1.0], 0.1);
        assert!(matches!(r, Err(Error::NonFiniteDerivative { .. })));
    }
}
