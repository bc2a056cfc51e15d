//! Bessel J, Y and derivatives by Steed's method.
//!
//! Strategy for nu >= 0, x > 0: a continued fraction gives J'/J at nu, a
//! stable downward recurrence transfers the pair to a reduced order mu, the
//! pair (J_mu, Y_mu) is closed there, and Y is recurred back up. For x < 2
//! the closure is the reflection-series evaluation of Y_mu with
//! |mu| <= 1/2; for x >= 2 it is the complex continued fraction for
//! (J' + iY')/(J + iY) at mu chosen within the fraction's convergence
//! region. The Wronskian J Y' - J' Y = 2/(pi x) ties the normalizations.

use num_complex::Complex64;

use super::gammas::temme_gammas;
use super::SpecFunError;

// Convergence floor for the Lentz iterations; 1e-16 is unreachable in
// rounded arithmetic once the update involves a complex multiply.
const EPS: f64 = 1e-15;
const FPMIN: f64 = 1e-300;
const MAX_ITER: usize = 40_000;
const RESCALE_THRESHOLD: f64 = 1e250;

/// Cylinder function pair with derivatives at a single (order, argument).
#[derive(Debug, Clone, Copy)]
pub struct BesselJY {
    pub j: f64,
    pub jp: f64,
    pub y: f64,
    pub yp: f64,
}

pub fn bessel_jy(nu: f64, x: f64) -> Result<BesselJY, SpecFunError> {
    if !(nu >= 0.0) || !(x > 0.0) || !nu.is_finite() || !x.is_finite() {
        return Err(SpecFunError::Domain { nu, x });
    }
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let w = xi2 / std::f64::consts::PI;

    // Order reduction: nl steps down from nu to mu. Below x = 2 the series
    // closure needs |mu| <= 1/2; above it the continued fraction only needs
    // mu not to exceed x by much.
    let nl: usize = if x < 2.0 {
        (nu + 0.5).floor() as usize
    } else {
        ((nu - x + 1.5).floor().max(0.0)) as usize
    };
    let mu = nu - nl as f64;
    let mu2 = mu * mu;

    // CF1 for J'/J at order nu, tracking the sign of J through the
    // denominators of the Lentz recurrence.
    let mut isign = 1.0_f64;
    let mut h = (nu * xi).max(FPMIN);
    let mut b = xi2 * nu;
    let mut c = h;
    let mut d = 0.0;
    let mut converged = false;
    for _ in 0..MAX_ITER {
        b += xi2;
        d = b - d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b - 1.0 / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(SpecFunError::Convergence { nu, x, stage: "ratio fraction" });
    }

    // Downward recurrence of (J, J') from nu to mu on an arbitrary scale.
    // The saved seed pair recovers the true scale once J_mu is known.
    let mut rjl = isign;
    let mut rjpl = h * rjl;
    let mut seed_j = rjl;
    let mut seed_jp = rjpl;
    let mut fact = nu * xi;
    for _ in 0..nl {
        let rjtemp = fact * rjl + rjpl;
        fact -= xi;
        rjpl = fact * rjtemp - rjl;
        rjl = rjtemp;
        if rjl.abs() > RESCALE_THRESHOLD {
            rjl /= RESCALE_THRESHOLD;
            rjpl /= RESCALE_THRESHOLD;
            seed_j /= RESCALE_THRESHOLD;
            seed_jp /= RESCALE_THRESHOLD;
        }
    }
    if rjl == 0.0 {
        rjl = EPS;
    }
    let f = rjpl / rjl;

    let (rjmu, mut rymu, mut ry1) = if x < 2.0 {
        series_closure(mu, mu2, x, f, w)?
    } else {
        fraction_closure(mu, mu2, x, xi, f, w, rjl)?
    };

    // Y grows with order, so the upward recurrence is stable.
    for i in 1..=nl {
        let rytemp = (mu + i as f64) * xi2 * ry1 - rymu;
        rymu = ry1;
        ry1 = rytemp;
        if !ry1.is_finite() {
            return Err(SpecFunError::Overflow { nu, x });
        }
    }

    let scale = rjmu / rjl;
    let out = BesselJY {
        j: seed_j * scale,
        jp: seed_jp * scale,
        y: rymu,
        yp: nu * xi * rymu - ry1,
    };
    if out.j.is_finite() && out.jp.is_finite() && out.y.is_finite() && out.yp.is_finite() {
        Ok(out)
    } else {
        Err(SpecFunError::Overflow { nu, x })
    }
}

/// Reflection-series closure for x < 2, |mu| <= 1/2. Returns
/// (J_mu, Y_mu, Y_{mu+1}).
fn series_closure(
    mu: f64,
    mu2: f64,
    x: f64,
    f: f64,
    w: f64,
) -> Result<(f64, f64, f64), SpecFunError> {
    let pi = std::f64::consts::PI;
    let x2 = 0.5 * x;
    let pimu = pi * mu;
    let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
    let d = -x2.ln();
    let e = mu * d;
    let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
    let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
    let mut ff = 2.0 / pi * fact * (gam1 * e.cosh() + gam2 * fact2 * d);
    let ee = e.exp();
    let mut p = ee / (gampl * pi);
    let mut q = 1.0 / (ee * pi * gammi);
    let pimu2 = 0.5 * pimu;
    let fact3 = if pimu2.abs() < EPS { 1.0 } else { pimu2.sin() / pimu2 };
    let r = pi * pimu2 * fact3 * fact3;
    let mut c = 1.0;
    let dd = -x2 * x2;
    let mut sum = ff + r * q;
    let mut sum1 = p;
    let mut converged = false;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        ff = (fi * ff + p + q) / (fi * fi - mu2);
        c *= dd / fi;
        p /= fi - mu;
        q /= fi + mu;
        let del = c * (ff + r * q);
        sum += del;
        let del1 = c * p - fi * del;
        sum1 += del1;
        if del.abs() < (1.0 + sum.abs()) * EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(SpecFunError::Convergence { nu: mu, x, stage: "reflection series" });
    }
    let rymu = -sum;
    let ry1 = -sum1 * 2.0 / x;
    let rymup = mu / x * rymu - ry1;
    let rjmu = w / (rymup - f * rymu);
    Ok((rjmu, rymu, ry1))
}

/// Complex continued-fraction closure for x >= 2. Returns
/// (J_mu, Y_mu, Y_{mu+1}); `rjl` carries the sign of J_mu.
fn fraction_closure(
    mu: f64,
    mu2: f64,
    x: f64,
    xi: f64,
    f: f64,
    w: f64,
    rjl: f64,
) -> Result<(f64, f64, f64), SpecFunError> {
    // (J' + iY')/(J + iY) = -1/(2x) + i + (i/x) K with
    // K = a1/(b1 + a2/(b2 + ...)), a_n = (n - 1/2)^2 - mu^2, b_n = 2(x + in).
    // The Lentz tiny must leave norm_sqr representable, so it is far above
    // the real-arithmetic FPMIN.
    const CF_TINY: f64 = 1e-30;
    let mut fcf = Complex64::new(CF_TINY, 0.0);
    let mut c = fcf;
    let mut d = Complex64::new(0.0, 0.0);
    let mut converged = false;
    for n in 1..MAX_ITER {
        let nf = n as f64;
        let an = Complex64::new((nf - 0.5) * (nf - 0.5) - mu2, 0.0);
        let bn = Complex64::new(2.0 * x, 2.0 * nf);
        d = bn + an * d;
        if d.norm() < CF_TINY {
            d = Complex64::new(CF_TINY, 0.0);
        }
        c = bn + an / c;
        if c.norm() < CF_TINY {
            c = Complex64::new(CF_TINY, 0.0);
        }
        d = d.inv();
        let del = c * d;
        fcf *= del;
        if (del - 1.0).norm() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(SpecFunError::Convergence { nu: mu, x, stage: "hankel fraction" });
    }
    let ratio = Complex64::new(-0.5 * xi, 1.0) + Complex64::new(0.0, xi) * fcf;
    let (p, q) = (ratio.re, ratio.im);
    let gam = (p - f) / q;
    let rjmu = (w / ((p - f) * gam + q)).sqrt().copysign(rjl);
    let rymu = rjmu * gam;
    let rymup = rymu * (p + q / gam);
    let ry1 = mu * xi * rymu - rymup;
    Ok((rjmu, rymu, ry1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn order_zero_at_unit_argument() {
        // Frozen textbook values, cross-checked by the series test below.
        let b = bessel_jy(0.0, 1.0).unwrap();
        assert_relative_eq!(b.j, 0.7651976865579666, max_relative = 1e-13);
        assert_relative_eq!(b.y, 0.08825696421567696, max_relative = 1e-12);
        // J0' = -J1, Y0' = -Y1.
        assert_relative_eq!(b.jp, -0.4400505857449335, max_relative = 1e-13);
        assert_relative_eq!(b.yp, 0.7812128213002887, max_relative = 1e-12);
    }

    #[test]
    fn matches_ascending_series_at_small_argument() {
        // Independent oracle: the defining power series for J0 and the
        // logarithmic series for Y0 at x = 1.
        let x: f64 = 1.0;
        let q = x * x / 4.0;
        let (mut j0, mut y0sum, mut term, mut hk) = (0.0_f64, 0.0_f64, 1.0_f64, 0.0_f64);
        for k in 0..25 {
            if k > 0 {
                term *= -q / ((k * k) as f64);
                hk += 1.0 / k as f64;
            }
            j0 += term;
            y0sum += -term * hk;
        }
        let pi = std::f64::consts::PI;
        let y0 = 2.0 / pi * (((x / 2.0).ln() + super::super::gammas::EULER_GAMMA) * j0 + y0sum);
        let b = bessel_jy(0.0, x).unwrap();
        assert_relative_eq!(b.j, j0, max_relative = 1e-14);
        assert_relative_eq!(b.y, y0, max_relative = 1e-13);
    }

    #[test]
    fn half_integer_closed_forms() {
        let pi = std::f64::consts::PI;
        for &x in &[0.3_f64, 0.9, 1.7, 3.1, 8.0, 27.5] {
            let pref = (2.0 / (pi * x)).sqrt();
            let b = bessel_jy(0.5, x).unwrap();
            assert_relative_eq!(b.j, pref * x.sin(), max_relative = 1e-12);
            assert_relative_eq!(b.y, -pref * x.cos(), max_relative = 1e-12);
            let b = bessel_jy(1.5, x).unwrap();
            assert_relative_eq!(b.j, pref * (x.sin() / x - x.cos()), max_relative = 1e-11);
            assert_relative_eq!(b.y, -pref * (x.cos() / x + x.sin()), max_relative = 1e-11);
            let b = bessel_jy(2.5, x).unwrap();
            let s = (3.0 / (x * x) - 1.0) * x.sin() - 3.0 * x.cos() / x;
            let c = (3.0 / (x * x) - 1.0) * x.cos() + 3.0 * x.sin() / x;
            assert_relative_eq!(b.j, pref * s, max_relative = 1e-10);
            assert_relative_eq!(b.y, -pref * c, max_relative = 1e-10);
        }
    }

    #[test]
    fn wronskian_across_orders_and_arguments() {
        let pi = std::f64::consts::PI;
        for &nu in &[0.0, 1.0 / 3.0, 0.5, 1.0, 2.0, 3.5, 7.0, 15.5, 40.0, 85.0] {
            for &x in &[0.4, 1.0, 1.9, 2.0, 2.1, 5.0, 13.0, 47.0, 120.0, 500.0] {
                if nu > 40.0 && x < 2.0 {
                    continue;
                }
                let b = bessel_jy(nu, x).unwrap();
                let wr = b.j * b.yp - b.jp * b.y;
                assert_relative_eq!(wr, 2.0 / (pi * x), max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn power_series_oracle_for_fractional_orders() {
        // J_nu by its defining series with statrs gamma, Y_nu by reflection.
        let pi = std::f64::consts::PI;
        for &nu in &[1.0 / 3.0_f64, 0.75, 2.5, 4.7] {
            for &x in &[0.6_f64, 1.3, 2.4, 4.0] {
                // statrs gamma handles negative non-integer arguments, which
                // the J_{-nu} series needs.
                let series_j = |order: f64| -> f64 {
                    let mut sum = 0.0;
                    let mut sign = 1.0;
                    for k in 0..60 {
                        let kf = k as f64;
                        let num = (x / 2.0).powf(order + 2.0 * kf);
                        let den = statrs::function::gamma::gamma(kf + 1.0)
                            * statrs::function::gamma::gamma(order + kf + 1.0);
                        sum += sign * num / den;
                        sign = -sign;
                    }
                    sum
                };
                let j = series_j(nu);
                let y = (j * (nu * pi).cos() - series_j(-nu)) / (nu * pi).sin();
                let b = bessel_jy(nu, x).unwrap();
                assert_relative_eq!(b.j, j, max_relative = 1e-10);
                assert_relative_eq!(b.y, y, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn rejects_bad_domain() {
        assert!(bessel_jy(-1.0, 1.0).is_err());
        assert!(bessel_jy(1.0, 0.0).is_err());
        assert!(bessel_jy(1.0, -3.0).is_err());
        assert!(bessel_jy(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn deep_evanescent_order_overflows_cleanly() {
        match bessel_jy(400.0, 0.5) {
            Err(SpecFunError::Overflow { .. }) => {}
            Ok(b) => assert!(b.y.is_finite()),
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}
