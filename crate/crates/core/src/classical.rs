//! Classical scattering at unit energy for a central potential.
//!
//! The Hamiltonian is |xi|^2 + V(|x|); in polar coordinates with conserved
//! angular momentum eta the radial flow reads
//!   r' = 2 rho,  rho' = 2 eta^2 / r^3 - V'(r),  phi' = 2 eta / r^2.
//! Deflections are computed two independent ways, by quadrature over the
//! turning-point integral and by direct trajectory integration, and the
//! quadrature route feeds the phase generator G used by the WKB table.

use std::cell::RefCell;

use serde::Serialize;
use thiserror::Error;

use crate::interp::CubicSpline;
use crate::ode::{Control, Dopri5, OdeError};
use crate::potential::CentralPotential;
use crate::quad::{self, QuadError};

#[derive(Debug, Error)]
pub enum ClassicalError {
    #[error("trajectory still inside r = {r_start} at t_max = {t_max} (eta = {eta})")]
    Trapped { eta: f64, r_start: f64, t_max: f64 },
    #[error("turning point at eta = {eta} is degenerate: |F'| = {fprime_abs:.3e}")]
    DegenerateTurningPoint { eta: f64, fprime_abs: f64 },
    #[error("no turning radius at eta = {eta}: effective F has no zero")]
    NoTurningPoint { eta: f64 },
    #[error("invalid input: {0}")]
    Domain(String),
    #[error("quadrature failed: {0}")]
    Quadrature(#[from] QuadError),
    #[error("integration failed: {0}")]
    Ode(#[from] OdeError),
}

/// One sample along a scattering trajectory.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrajectoryState {
    pub t: f64,
    pub r: f64,
    pub rho: f64,
    pub phi: f64,
    pub eta: f64,
}

/// Effective radial energy F(r) = 1 - eta^2/r^2 - V(r).
fn f_eff(potential: &CentralPotential, eta: f64, r: f64) -> f64 {
    1.0 - eta * eta / (r * r) - potential.evaluate(r).0
}

fn f_eff_prime(potential: &CentralPotential, eta: f64, r: f64) -> f64 {
    2.0 * eta * eta / (r * r * r) - potential.evaluate(r).1
}

/// Integrates one incoming trajectory from r_start (phi = 0) until it exits
/// through r = r_start again. The final state sits exactly on the exit
/// crossing. Fails as trapped when the exit has not happened by t_max.
pub fn integrate_trajectory(
    potential: &CentralPotential,
    eta: f64,
    r_start: f64,
    t_max: f64,
) -> Result<Vec<TrajectoryState>, ClassicalError> {
    let radius = potential.support_radius();
    if eta <= 0.0 {
        return Err(ClassicalError::Domain(format!("eta must be positive, got {eta}")));
    }
    if r_start < radius || eta >= r_start {
        return Err(ClassicalError::Domain(format!(
            "need eta < r_start and r_start >= {radius}, got eta = {eta}, r_start = {r_start}"
        )));
    }
    let rho0 = -(1.0 - eta * eta / (r_start * r_start)).sqrt();
    let rhs = |_t: f64, y: &[f64; 3]| {
        let r = y[0];
        [2.0 * y[1], 2.0 * eta * eta / (r * r * r) - potential.evaluate(r.max(0.0)).1, 2.0 * eta / (r * r)]
    };
    let mut states =
        vec![TrajectoryState { t: 0.0, r: r_start, rho: rho0, phi: 0.0, eta }];
    let solver = Dopri5::default();
    let mut exited = false;
    let (t_end, y_end) = solver.integrate(rhs, 0.0, [r_start, rho0, 0.0], t_max, |dense| {
        if dense.y1[1] > 0.0 && dense.y1[0] >= r_start {
            let t_exit = dense
                .find_root(|_t, y| y[0] - r_start)
                .unwrap_or(dense.t1);
            exited = true;
            return Control::StopAt(t_exit);
        }
        let y = dense.y1;
        states.push(TrajectoryState { t: dense.t1, r: y[0], rho: y[1], phi: y[2], eta });
        Control::Continue
    })?;
    if !exited {
        return Err(ClassicalError::Trapped { eta, r_start, t_max });
    }
    states.push(TrajectoryState { t: t_end, r: y_end[0], rho: y_end[1], phi: y_end[2], eta });
    Ok(states)
}

const SIMPLE_ZERO_TOL: f64 = 1e-8;

/// Largest zero of F(r) = 1 - eta^2/r^2 - V(r), located to 1e-12 by
/// bisection plus a Newton polish. Degenerate (non-simple) zeros and the
/// no-zero case are errors.
pub fn turning_radius(potential: &CentralPotential, eta: f64) -> Result<f64, ClassicalError> {
    if eta < 0.0 {
        return Err(ClassicalError::Domain(format!("eta must be nonnegative, got {eta}")));
    }
    let radius = potential.support_radius();
    let hi = radius.max(eta) * 1.5;
    let lo = 1e-9 * radius;
    let n = 4096;
    let fval = |r: f64| f_eff(potential, eta, r);
    let mut bracket = None;
    for i in (0..n).rev() {
        let a = lo + (hi - lo) * i as f64 / n as f64;
        let b = lo + (hi - lo) * (i + 1) as f64 / n as f64;
        if fval(a) <= 0.0 && fval(b) > 0.0 {
            bracket = Some((a, b));
            break;
        }
    }
    let Some((a, b)) = bracket else {
        return Err(ClassicalError::NoTurningPoint { eta });
    };
    finish_turning_point(potential, eta, a, b)
}

/// Same contract as `turning_radius`, restricted to the bracket (eta, R)
/// valid whenever 0 < eta < R and V > 0 inside the support.
fn turning_radius_in_support(
    potential: &CentralPotential,
    eta: f64,
) -> Result<f64, ClassicalError> {
    let radius = potential.support_radius();
    let fval = |r: f64| f_eff(potential, eta, r);
    let n = 256;
    let mut hi = radius;
    let mut lo = eta;
    for i in (0..n).rev() {
        let a = eta + (radius - eta) * i as f64 / n as f64;
        if fval(a) <= 0.0 {
            lo = a;
            hi = eta + (radius - eta) * (i + 1) as f64 / n as f64;
            break;
        }
    }
    finish_turning_point(potential, eta, lo, hi)
}

fn finish_turning_point(
    potential: &CentralPotential,
    eta: f64,
    mut a: f64,
    mut b: f64,
) -> Result<f64, ClassicalError> {
    let fval = |r: f64| f_eff(potential, eta, r);
    for _ in 0..60 {
        if b - a < 1e-13 * b.max(1.0) {
            break;
        }
        let mid = 0.5 * (a + b);
        if fval(mid) <= 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let mut r = 0.5 * (a + b);
    for _ in 0..4 {
        let fp = f_eff_prime(potential, eta, r);
        if fp.abs() <= SIMPLE_ZERO_TOL {
            break;
        }
        let step = fval(r) / fp;
        let next = r - step;
        if next > a && next < b {
            r = next;
        }
        if step.abs() < 1e-13 * r.max(1.0) {
            break;
        }
    }
    let fp = f_eff_prime(potential, eta, r).abs();
    if fp <= SIMPLE_ZERO_TOL {
        return Err(ClassicalError::DegenerateTurningPoint { eta, fprime_abs: fp });
    }
    Ok(r)
}

/// Deflection Sigma(eta) by quadrature:
///   Sigma = 2 int_{r_m}^inf eta dr / (r^2 sqrt(F)) - pi,
/// computed by substituting r = r_m + u^2 inside the support (which removes
/// the square-root singularity) and closing the free tail in closed form.
/// Nonpositive for repulsive potentials; identically 0 for eta >= R.
pub fn scattering_angle(potential: &CentralPotential, eta: f64) -> Result<f64, ClassicalError> {
    let radius = potential.support_radius();
    if eta <= 0.0 {
        return Err(ClassicalError::Domain(format!("eta must be positive, got {eta}")));
    }
    if eta >= radius {
        return Ok(0.0);
    }
    let r_m = turning_radius_in_support(potential, eta)?;
    // Subtracting the residual at the computed turning point keeps the
    // shifted F exactly zero at u = 0 and positive beyond.
    let f_resid = f_eff(potential, eta, r_m);
    let u_max = (radius - r_m).sqrt();
    let integrand = |u: f64| {
        let r = r_m + u * u;
        let f = f_eff(potential, eta, r) - f_resid;
        2.0 * eta * u / (r * r * f.sqrt())
    };
    let (core, _) = quad::integrate(&integrand, 0.0, u_max, 1e-10)?;
    let tail = (eta / radius).asin();
    Ok(2.0 * (core + tail) - std::f64::consts::PI)
}

/// Deflection read off an integrated trajectory. Exact for any start radius
/// at or beyond the support: the free sweep 2 asin(eta/r_start) compensates
/// the finite start.
pub fn deflection_from_trajectory(
    potential: &CentralPotential,
    eta: f64,
    r_start: f64,
) -> Result<f64, ClassicalError> {
    let t_max = 20.0 * r_start;
    let states = integrate_trajectory(potential, eta, r_start, t_max)?;
    let phi_exit = states.last().unwrap().phi;
    Ok(phi_exit + 2.0 * (eta / r_start).asin() - std::f64::consts::PI)
}

/// Sojourn (time-delay) functional
///   T(eta) = -2 lim_{a->inf} [int_path (1 - V) dt - sqrt(a^2 - eta^2)],
/// the free transit time through the ball of radius a being the subtrahend.
/// The dwell time is weighted by the local kinetic energy 1 - V, which is
/// what the energy derivative of the radial action produces; the unweighted
/// time difference would miss the Legendre identity T = G - eta Sigma by
/// 2 int V dt. On hard-wall comparisons the two coincide since orbits never
/// enter the support. The limit is settled by extrapolation over
/// a in {2R, 4R, 8R}; outside the support the delay vanishes identically.
pub fn sojourn_time(potential: &CentralPotential, eta: f64) -> Result<f64, ClassicalError> {
    let radius = potential.support_radius();
    if eta <= 0.0 {
        return Err(ClassicalError::Domain(format!("eta must be positive, got {eta}")));
    }
    if eta >= radius {
        return Ok(0.0);
    }
    let solver = Dopri5::default();
    let mut values = [0.0; 3];
    for (i, mult) in [2.0, 4.0, 8.0].into_iter().enumerate() {
        let a = mult * radius;
        let rho0 = -(1.0 - eta * eta / (a * a)).sqrt();
        // Fourth component accumulates int V dt along the orbit.
        let rhs = |_t: f64, y: &[f64; 3]| {
            let r = y[0];
            [2.0 * y[1], 2.0 * eta * eta / (r * r * r) - potential.evaluate(r.max(0.0)).1, potential.evaluate(r.max(0.0)).0]
        };
        let mut exited = false;
        let (t_exit, y_exit) =
            solver.integrate(rhs, 0.0, [a, rho0, 0.0], 40.0 * a, |dense| {
                if dense.y1[1] > 0.0 && dense.y1[0] >= a {
                    let t = dense.find_root(|_t, y| y[0] - a).unwrap_or(dense.t1);
                    exited = true;
                    return Control::StopAt(t);
                }
                Control::Continue
            })?;
        if !exited {
            return Err(ClassicalError::Trapped { eta, r_start: a, t_max: 40.0 * a });
        }
        let free = (a * a - eta * eta).sqrt();
        values[i] = -2.0 * (t_exit - y_exit[2] - free);
    }
    // Aitken extrapolation; the three values already agree up to solver
    // error, in which case the last one is returned.
    let d1 = values[1] - values[0];
    let d2 = values[2] - values[1];
    let denom = d2 - d1;
    if denom.abs() < 1e-12 * values[2].abs().max(1.0) {
        Ok(values[2])
    } else {
        Ok(values[2] - d2 * d2 / denom)
    }
}

/// Default 512-point deflection grid on [1e-3 R, R].
pub fn default_eta_grid(radius: f64) -> Vec<f64> {
    let n = 512;
    (0..n)
        .map(|i| radius * (1e-3 + (1.0 - 1e-3) * i as f64 / (n - 1) as f64))
        .collect()
}

/// Tabulated deflection Sigma, phase generator G and delay T on a grid, with
/// spline accessors. G is accumulated from the outer edge inward:
///   G(alpha) = - int_alpha^R Sigma,  T = G - alpha Sigma,
/// so G >= 0 and G' = Sigma for repulsive profiles.
#[derive(Debug, Clone)]
pub struct ScatteringProfile {
    eta: Vec<f64>,
    sigma: Vec<f64>,
    delay: Vec<f64>,
    g: Vec<f64>,
    radius: f64,
    sigma_spline: CubicSpline,
    g_spline: CubicSpline,
}

/// Builds the scattering profile of a potential on the given grid (strictly
/// increasing, inside (0, R]; R itself is appended when absent).
pub fn phase_generator(
    potential: &CentralPotential,
    eta_grid: &[f64],
) -> Result<ScatteringProfile, ClassicalError> {
    let radius = potential.support_radius();
    ScatteringProfile::from_sigma_result_fn(
        |eta| scattering_angle(potential, eta),
        radius,
        eta_grid,
    )
}

impl ScatteringProfile {
    /// Profile built from an externally supplied deflection function, used
    /// to validate the accumulation against closed forms.
    pub fn from_sigma_fn(
        sigma: impl Fn(f64) -> f64,
        radius: f64,
        eta_grid: &[f64],
    ) -> Result<Self, ClassicalError> {
        Self::from_sigma_result_fn(|eta| Ok(sigma(eta)), radius, eta_grid)
    }

    fn from_sigma_result_fn(
        sigma_of: impl Fn(f64) -> Result<f64, ClassicalError>,
        radius: f64,
        eta_grid: &[f64],
    ) -> Result<Self, ClassicalError> {
        if eta_grid.is_empty() || eta_grid[0] <= 0.0 {
            return Err(ClassicalError::Domain("grid must start above 0".into()));
        }
        if eta_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ClassicalError::Domain("grid must be strictly increasing".into()));
        }
        if *eta_grid.last().unwrap() > radius + 1e-12 {
            return Err(ClassicalError::Domain("grid must not extend beyond R".into()));
        }
        let mut eta = eta_grid.to_vec();
        if radius - *eta.last().unwrap() > 1e-12 {
            eta.push(radius);
        } else {
            *eta.last_mut().unwrap() = radius;
        }
        let n = eta.len();
        let mut sigma = Vec::with_capacity(n);
        for &a in &eta {
            sigma.push(sigma_of(a)?);
        }
        // Telescoped accumulation of G from R inward; per-interval tolerance
        // keeps the total quadrature error below 1e-8.
        let failed: RefCell<Option<ClassicalError>> = RefCell::new(None);
        let sigma_eval = |a: f64| match sigma_of(a.min(radius)) {
            Ok(v) => v,
            Err(e) => {
                *failed.borrow_mut() = Some(e);
                f64::NAN
            }
        };
        let mut g = vec![0.0; n];
        for i in (0..n - 1).rev() {
            let (piece, _) = quad::integrate(&sigma_eval, eta[i], eta[i + 1], 2e-11)
                .map_err(|e| failed.borrow_mut().take().unwrap_or(ClassicalError::Quadrature(e)))?;
            g[i] = g[i + 1] - piece;
        }
        let delay: Vec<f64> =
            (0..n).map(|i| g[i] - eta[i] * sigma[i]).collect();
        let sigma_spline = CubicSpline::new(eta.clone(), sigma.clone());
        let g_spline = CubicSpline::new(eta.clone(), g.clone());
        Ok(ScatteringProfile { eta, sigma, delay, g, radius, sigma_spline, g_spline })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn eta_grid(&self) -> &[f64] {
        &self.eta
    }

    pub fn sigma_values(&self) -> &[f64] {
        &self.sigma
    }

    pub fn g_values(&self) -> &[f64] {
        &self.g
    }

    pub fn delay_values(&self) -> &[f64] {
        &self.delay
    }

    /// Sigma(alpha); 0 at and beyond R. Below the first grid point the
    /// boundary cubic extrapolates over the 1e-3 R sliver.
    pub fn sigma_at(&self, alpha: f64) -> f64 {
        if alpha >= self.radius {
            0.0
        } else {
            self.sigma_spline.eval(alpha)
        }
    }

    /// G(alpha); 0 at and beyond R.
    pub fn g_at(&self, alpha: f64) -> f64 {
        if alpha >= self.radius {
            0.0
        } else {
            self.g_spline.eval(alpha)
        }
    }

    /// T(alpha) = G(alpha) - alpha Sigma(alpha).
    pub fn delay_at(&self, alpha: f64) -> f64 {
        self.g_at(alpha) - alpha * self.sigma_at(alpha)
    }

    pub fn sigma_slope_at(&self, alpha: f64) -> f64 {
        if alpha >= self.radius {
            0.0
        } else {
            self.sigma_spline.deriv(alpha)
        }
    }

    /// Alphas in (0, R] where Sigma crosses an integer multiple of pi; R is
    /// always a member since Sigma(R) = 0.
    pub fn bad_set(&self) -> Vec<f64> {
        let pi = std::f64::consts::PI;
        let min_sigma = self.sigma.iter().cloned().fold(f64::INFINITY, f64::min);
        let max_sigma = self.sigma.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let k_lo = (min_sigma / pi).floor() as i64;
        let k_hi = (max_sigma / pi).ceil() as i64;
        let mut out = Vec::new();
        for k in k_lo..=k_hi {
            let level = k as f64 * pi;
            for w in 0..self.eta.len() - 1 {
                let fa = self.sigma[w] - level;
                let fb = self.sigma[w + 1] - level;
                if fa == 0.0 {
                    out.push(self.eta[w]);
                } else if fa * fb < 0.0 {
                    let (mut a, mut b) = (self.eta[w], self.eta[w + 1]);
                    for _ in 0..60 {
                        let mid = 0.5 * (a + b);
                        if (self.sigma_at(mid) - level) * fa > 0.0 {
                            a = mid;
                        } else {
                            b = mid;
                        }
                    }
                    out.push(0.5 * (a + b));
                }
            }
        }
        out.push(self.radius);
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-8);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn bump5() -> CentralPotential {
        CentralPotential::bump(5.0, 1.0)
    }

    #[test]
    fn free_deflection_vanishes() {
        let free = CentralPotential::bump(0.0, 1.0);
        for &eta in &[0.2, 0.5, 0.9] {
            let s = scattering_angle(&free, eta).unwrap();
            assert_abs_diff_eq!(s, 0.0, epsilon = 1e-8);
        }
        assert_eq!(scattering_angle(&bump5(), 1.0).unwrap(), 0.0);
        assert_eq!(scattering_angle(&bump5(), 1.7).unwrap(), 0.0);
    }

    #[test]
    fn turning_radius_free_and_outside() {
        let free = CentralPotential::bump(0.0, 1.0);
        assert_abs_diff_eq!(turning_radius(&free, 0.37).unwrap(), 0.37, epsilon = 1e-10);
        assert_abs_diff_eq!(turning_radius(&bump5(), 1.3).unwrap(), 1.3, epsilon = 1e-10);
        // Head-on against a barrier above 1 turns where V = 1.
        let p10 = CentralPotential::bump(10.0, 1.0);
        let r0 = (1.0 - 1.0 / 10.0_f64.ln()).sqrt();
        assert_abs_diff_eq!(turning_radius(&p10, 1e-6).unwrap(), r0, epsilon = 1e-6);
        assert!(matches!(
            turning_radius(&CentralPotential::bump(0.5, 1.0), 0.0),
            Err(ClassicalError::NoTurningPoint { .. })
        ));
    }

    #[test]
    fn trajectory_conserves_energy_and_exits() {
        let p = bump5();
        let states = integrate_trajectory(&p, 0.5, 2.0, 40.0).unwrap();
        assert!(states.len() > 4);
        for s in &states {
            let e = s.rho * s.rho + s.eta * s.eta / (s.r * s.r) + p.evaluate(s.r).0;
            assert_abs_diff_eq!(e, 1.0, epsilon = 1e-8);
        }
        let last = states.last().unwrap();
        assert_abs_diff_eq!(last.r, 2.0, epsilon = 1e-9);
        assert!(last.rho > 0.0);
    }

    #[test]
    fn trapped_error_when_time_budget_too_small() {
        assert!(matches!(
            integrate_trajectory(&bump5(), 0.5, 2.0, 0.5),
            Err(ClassicalError::Trapped { .. })
        ));
    }

    #[test]
    fn quadrature_deflection_matches_trajectory() {
        let p = bump5();
        for &eta in &[0.15, 0.3, 0.6, 0.85] {
            let s_quad = scattering_angle(&p, eta).unwrap();
            let s_traj = deflection_from_trajectory(&p, eta, 2.0).unwrap();
            assert_abs_diff_eq!(s_quad, s_traj, epsilon = 1e-6);
            // Start-radius independence of the trajectory formula.
            let s_traj4 = deflection_from_trajectory(&p, eta, 4.0).unwrap();
            assert_abs_diff_eq!(s_traj, s_traj4, epsilon = 1e-7);
            assert!(s_quad < 0.0 && s_quad > -PI);
        }
    }

    /// Cartesian reintegration with no polar structure at all: conserves
    /// angular momentum x ^ p numerically and reproduces the deflection.
    #[test]
    fn cartesian_cross_check() {
        let p = bump5();
        let solver = Dopri5::default();
        for &eta in &[0.3_f64, 0.6, 0.85] {
            let a = 3.0;
            let x0 = [(a * a - eta * eta).sqrt(), eta, -1.0, 0.0];
            let rhs = |_t: f64, y: &[f64; 4]| {
                let r = (y[0] * y[0] + y[1] * y[1]).sqrt();
                let (_, vp, _) = p.evaluate(r);
                [2.0 * y[2], 2.0 * y[3], -vp * y[0] / r, -vp * y[1] / r]
            };
            let mut max_eta_drift: f64 = 0.0;
            let (_, y) = solver
                .integrate(rhs, 0.0, x0, 40.0, |dense| {
                    let y = dense.y1;
                    let r = (y[0] * y[0] + y[1] * y[1]).sqrt();
                    let ang = y[0] * y[3] - y[1] * y[2];
                    max_eta_drift = max_eta_drift.max((ang - eta).abs());
                    let outgoing = y[0] * y[2] + y[1] * y[3] > 0.0;
                    if outgoing && r >= a {
                        let t = dense
                            .find_root(|_t, y| {
                                (y[0] * y[0] + y[1] * y[1]).sqrt() - a
                            })
                            .unwrap_or(dense.t1);
                        return Control::StopAt(t);
                    }
                    Control::Continue
                })
                .unwrap();
            assert!(max_eta_drift < 1e-8, "angular momentum drift {max_eta_drift}");
            let mut defl = y[3].atan2(y[2]) - PI;
            while defl <= -PI {
                defl += 2.0 * PI;
            }
            let s_quad = scattering_angle(&p, eta).unwrap();
            assert_abs_diff_eq!(defl, s_quad, epsilon = 1e-6);
        }
    }

    #[test]
    fn sojourn_time_free_and_outside() {
        let free = CentralPotential::bump(0.0, 1.0);
        assert_abs_diff_eq!(sojourn_time(&free, 0.4).unwrap(), 0.0, epsilon = 1e-7);
        assert_eq!(sojourn_time(&bump5(), 1.2).unwrap(), 0.0);
    }

    /// T from trajectories must match T = G - alpha Sigma from quadrature.
    #[test]
    fn sojourn_time_matches_legendre_transform_of_g() {
        let p = bump5();
        let profile = phase_generator(&p, &default_eta_grid(1.0)).unwrap();
        for &eta in &[0.3, 0.6] {
            let t_traj = sojourn_time(&p, eta).unwrap();
            let t_profile = profile.delay_at(eta);
            assert_abs_diff_eq!(t_traj, t_profile, epsilon = 1e-7);
        }
    }

    /// Injecting the hard-ball deflection -2 acos(alpha/R) must produce the
    /// closed forms G_b = 2 sqrt(R^2-a^2) - 2 a acos(a/R), T_b = 2 sqrt(R^2-a^2).
    #[test]
    fn ball_profile_matches_closed_forms() {
        let radius = 1.0;
        let grid = default_eta_grid(radius);
        let profile =
            ScatteringProfile::from_sigma_fn(|a| -2.0 * (a / radius).acos(), radius, &grid)
                .unwrap();
        for (i, &a) in profile.eta_grid().iter().enumerate() {
            let gb = 2.0 * (radius * radius - a * a).sqrt() - 2.0 * a * (a / radius).acos();
            let tb = 2.0 * (radius * radius - a * a).sqrt();
            assert_abs_diff_eq!(profile.g_values()[i], gb, epsilon = 1e-8);
            assert_abs_diff_eq!(profile.delay_values()[i], tb, epsilon = 1e-8);
        }
    }

    #[test]
    fn g_slope_recovers_sigma() {
        let p = bump5();
        let profile = phase_generator(&p, &default_eta_grid(1.0)).unwrap();
        let eta = profile.eta_grid();
        let g = profile.g_values();
        let s = profile.sigma_values();
        for i in (8..eta.len() - 8).step_by(16) {
            let fd = (g[i + 1] - g[i - 1]) / (eta[i + 1] - eta[i - 1]);
            assert_abs_diff_eq!(fd, s[i], epsilon = 1e-4);
            assert_abs_diff_eq!(profile.g_spline.deriv(eta[i]), s[i], epsilon = 1e-5);
        }
    }

    #[test]
    fn delay_slope_relation() {
        // T' = -eta Sigma' follows from G' = Sigma; checked by differencing
        // the tabulated values.
        let p = bump5();
        let profile = phase_generator(&p, &default_eta_grid(1.0)).unwrap();
        let eta = profile.eta_grid();
        let t = profile.delay_values();
        let s = profile.sigma_values();
        for i in (16..eta.len() - 16).step_by(24) {
            let dt = (t[i + 1] - t[i - 1]) / (eta[i + 1] - eta[i - 1]);
            let ds = (s[i + 1] - s[i - 1]) / (eta[i + 1] - eta[i - 1]);
            let lhs = dt;
            let rhs = -eta[i] * ds;
            let scale = lhs.abs().max(rhs.abs()).max(1e-6);
            assert!(
                ((lhs - rhs) / scale).abs() < 1e-3,
                "delay slope mismatch at eta = {}: {lhs} vs {rhs}",
                eta[i]
            );
        }
    }

    #[test]
    fn sigma_monotone_when_angle_condition_holds() {
        // c = 5 passes the angle condition, so Sigma rises strictly from
        // near -pi toward 0 across the support.
        let p = bump5();
        let profile = phase_generator(&p, &default_eta_grid(1.0)).unwrap();
        let eta = profile.eta_grid();
        let s = profile.sigma_values();
        assert!(s[0] > -PI && s[0] < -0.9 * PI);
        for i in 0..eta.len() - 1 {
            if eta[i + 1] <= 0.9 {
                assert!(s[i + 1] > s[i], "sigma not increasing at eta = {}", eta[i]);
            } else {
                assert!(s[i + 1] >= s[i] - 1e-12);
            }
        }
        assert_abs_diff_eq!(*s.last().unwrap(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn bad_set_for_strong_bump_is_the_outer_edge() {
        let p = bump5();
        let profile = phase_generator(&p, &default_eta_grid(1.0)).unwrap();
        let bad = profile.bad_set();
        // Sigma stays inside (-pi, 0) on the interior, so only R qualifies.
        assert_eq!(bad.len(), 1);
        assert_abs_diff_eq!(bad[0], 1.0, epsilon = 1e-12);
    }
}

