//! Cylinder functions for real order and positive argument.
//!
//! Two independent evaluators back each other: a recurrence method
//! (continued fractions plus series closure) and a quadrature method
//! (integral representations). `selftest_table` tabulates both across a
//! stratified grid so any regression in one shows up as disagreement.

mod gammas;
mod integral;
mod steed;

use num_complex::Complex64;
use thiserror::Error;

pub use integral::bessel_jy_integral;
pub use steed::{bessel_jy, BesselJY};

#[derive(Debug, Error)]
pub enum SpecFunError {
    #[error("invalid domain: order {nu}, argument {x} (need order >= 0, argument > 0)")]
    Domain { nu: f64, x: f64 },
    #[error("value not representable at order {nu}, argument {x}")]
    Overflow { nu: f64, x: f64 },
    #[error("{stage} failed to converge at order {nu}, argument {x}")]
    Convergence { nu: f64, x: f64, stage: &'static str },
}

/// First-kind Hankel function and derivative at one (order, argument).
#[derive(Debug, Clone, Copy)]
pub struct HankelPair {
    pub order: f64,
    pub argument: f64,
    pub h1: Complex64,
    pub h1_deriv: Complex64,
}

pub fn hankel1(nu: f64, x: f64) -> Result<HankelPair, SpecFunError> {
    let b = bessel_jy(nu, x)?;
    Ok(HankelPair {
        order: nu,
        argument: x,
        h1: Complex64::new(b.j, b.y),
        h1_deriv: Complex64::new(b.jp, b.yp),
    })
}

/// Principal argument of H1_nu(x) in (-pi, pi].
pub fn arg_hankel1(nu: f64, x: f64) -> Result<f64, SpecFunError> {
    let p = hankel1(nu, x)?;
    let a = p.h1.arg();
    Ok(if a == -std::f64::consts::PI { std::f64::consts::PI } else { a })
}

/// One grid point of the dual-method comparison.
#[derive(Debug, Clone, Copy)]
pub struct SelfTestRow {
    pub order: f64,
    pub argument: f64,
    pub recurrence: BesselJY,
    pub quadrature: BesselJY,
    /// Max over the four components of |a - b| / max(1, |a|).
    pub max_scaled_diff: f64,
    /// |J Y' - J' Y - 2/(pi x)| relative to 2/(pi x), recurrence method.
    pub wronskian_rel_err: f64,
}

/// Crude size estimate: the exponent of Y_nu(x) in the evanescent regime.
fn y_exponent(nu: f64, x: f64) -> f64 {
    if nu <= x {
        0.0
    } else {
        let a = (nu / x).acosh();
        nu * (a - a.tanh())
    }
}

/// Evaluates both methods over a grid stratified in order and in argument
/// relative to order (small, transition, oscillatory regimes).
pub fn selftest_table() -> Vec<SelfTestRow> {
    let orders = [0.0, 1.0 / 3.0, 0.5, 1.0, 1.5, 2.0, 3.5, 5.0, 10.0, 12.5, 20.0, 33.0, 50.0, 75.5, 100.0];
    let fixed_args = [0.5, 1.0, 1.9, 2.0, 2.1, 5.0, 10.0, 25.0, 60.0, 150.0, 400.0];
    let mut rows = Vec::new();
    for &nu in &orders {
        let mut args: Vec<f64> = fixed_args.to_vec();
        if nu > 1.0 {
            args.extend([0.5 * nu, nu, nu + 0.5, 2.0 * nu]);
        }
        args.sort_by(|a, b| a.partial_cmp(b).unwrap());
        args.dedup();
        for &x in &args {
            if y_exponent(nu + 1.0, x) > 600.0 {
                continue;
            }
            let a = bessel_jy(nu, x).expect("recurrence evaluation");
            let b = bessel_jy_integral(nu, x).expect("quadrature evaluation");
            let scaled = |u: f64, v: f64| (u - v).abs() / u.abs().max(1.0);
            let max_scaled_diff = scaled(a.j, b.j)
                .max(scaled(a.jp, b.jp))
                .max(scaled(a.y, b.y))
                .max(scaled(a.yp, b.yp));
            let w = 2.0 / (std::f64::consts::PI * x);
            let wronskian_rel_err = ((a.j * a.yp - a.jp * a.y) - w).abs() / w;
            rows.push(SelfTestRow {
                order: nu,
                argument: x,
                recurrence: a,
                quadrature: b,
                max_scaled_diff,
                wronskian_rel_err,
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn methods_agree_across_the_selftest_grid() {
        let rows = selftest_table();
        assert!(rows.len() > 150, "grid unexpectedly small: {}", rows.len());
        for r in &rows {
            assert!(
                r.max_scaled_diff < 1e-8,
                "methods disagree at order {}, argument {}: {:e}",
                r.order,
                r.argument,
                r.max_scaled_diff
            );
            assert!(
                r.wronskian_rel_err < 1e-9,
                "wronskian off at order {}, argument {}: {:e}",
                r.order,
                r.argument,
                r.wronskian_rel_err
            );
        }
    }

    #[test]
    fn hankel_argument_matches_large_argument_expansion() {
        // H1_nu(z) ~ sqrt(2/(pi z)) e^{i chi} sum_k i^k c_k with
        // chi = z - nu pi/2 - pi/4 and c_k the standard expansion
        // coefficients; seven terms leave a remainder far below 1e-8 here.
        let pi = std::f64::consts::PI;
        for &(nu, z) in &[(0.0, 100.0), (3.5, 40.0), (1.0, 250.0)] {
            let mu = 4.0 * nu * nu;
            let mut c = 1.0;
            let mut s = Complex64::new(1.0, 0.0);
            let mut ip = Complex64::new(0.0, 1.0);
            for k in 1..=7 {
                let kf = k as f64;
                c *= (mu - (2.0 * kf - 1.0) * (2.0 * kf - 1.0)) / (kf * 8.0 * z);
                s += ip * c;
                ip *= Complex64::new(0.0, 1.0);
            }
            let chi = z - nu * pi / 2.0 - pi / 4.0;
            let raw = chi + s.arg();
            let reduced = {
                let r = raw.rem_euclid(2.0 * pi);
                if r > pi {
                    r - 2.0 * pi
                } else {
                    r
                }
            };
            let got = arg_hankel1(nu, z).unwrap();
            assert_relative_eq!(got, reduced, epsilon = 1e-8);
        }
    }

    #[test]
    fn half_integer_hankel_closed_form() {
        // H1_{1/2}(z) = -i sqrt(2/(pi z)) e^{iz}, and the recurrence
        // H1_{3/2} = sqrt(2/(pi z)) e^{iz} (-i/z - 1).
        let pi = std::f64::consts::PI;
        for &z in &[0.4_f64, 1.0, 2.6, 14.0, 90.0] {
            let pref = (2.0 / (pi * z)).sqrt();
            let eiz = Complex64::new(0.0, z).exp();
            let p = hankel1(0.5, z).unwrap();
            let expect = Complex64::new(0.0, -1.0) * pref * eiz;
            assert!((p.h1 - expect).norm() < 1e-10 * expect.norm().max(1.0));
            let p = hankel1(1.5, z).unwrap();
            let expect = pref * eiz * Complex64::new(-1.0, -1.0 / z);
            assert!((p.h1 - expect).norm() < 1e-10 * expect.norm().max(1.0));
            let p = hankel1(2.5, z).unwrap();
            let expect = pref * eiz * Complex64::new(-3.0 / z, -3.0 / (z * z) + 1.0);
            assert!((p.h1 - expect).norm() < 1e-10 * expect.norm().max(1.0));
        }
    }

    #[test]
    fn principal_argument_stays_in_range() {
        let pi = std::f64::consts::PI;
        for &nu in &[0.0, 0.5, 2.0, 9.5, 31.0] {
            for &z in &[0.5, 3.0, 17.0, 64.0, 130.0] {
                let a = arg_hankel1(nu, z).unwrap();
                assert!(a > -pi && a <= pi, "arg {a} out of range at {nu}, {z}");
            }
        }
    }
}
