//! Scattering phases of the hard ball of radius R at wavenumber k.
//!
//! The Dirichlet condition at r = R forces f = A H1_nu(kr) + B H2_nu(kr)
//! with A H1(kR) + B H2(kR) = 0, so the eigenvalue is -H1(kR)/H2(kR) and its
//! argument is x = 2 arg H1_nu(kR) + pi. The geometric surrogate evaluates
//! the ball phase generator G_b(alpha) = 2 sqrt(R^2 - alpha^2)
//! - 2 alpha acos(alpha/R) at alpha = nu/k, shifted by the quarter-wave pi/2.

use serde::Serialize;
use thiserror::Error;

use crate::fit::{fit_rate, FitError, RateFit};
use crate::radial::order_of;
use crate::specfun::{arg_hankel1, SpecFunError};
use crate::spherical_harmonic_dim;

#[derive(Debug, Error)]
pub enum DiskError {
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error("alpha = {alpha} lies outside the ball of radius {radius}")]
    OutsideBall { alpha: f64, radius: f64 },
    #[error("invalid input: {0}")]
    Domain(String),
    #[error(transparent)]
    Fit(#[from] FitError),
}

/// Ball deflection Sigma_b(alpha) = -2 acos(alpha/R) on [0, R].
pub fn ball_sigma(alpha: f64, radius: f64) -> f64 {
    assert!((0.0..=radius).contains(&alpha));
    -2.0 * (alpha / radius).acos()
}

/// Ball phase generator G_b(alpha) = 2 sqrt(R^2 - alpha^2) - 2 alpha acos(alpha/R).
pub fn ball_g(alpha: f64, radius: f64) -> f64 {
    assert!((0.0..=radius).contains(&alpha));
    2.0 * (radius * radius - alpha * alpha).sqrt() - 2.0 * alpha * (alpha / radius).acos()
}

/// Exact phase x = (2 arg H1_nu(kR) + pi) mod 2 pi.
pub fn disk_exact(d: u32, l: u32, k: f64, radius: f64) -> Result<f64, DiskError> {
    if k <= 0.0 || radius <= 0.0 {
        return Err(DiskError::Domain(format!("need k > 0 and R > 0, got k = {k}, R = {radius}")));
    }
    let nu = order_of(d, l);
    let arg = arg_hankel1(nu, k * radius)?;
    Ok((2.0 * arg + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI))
}

/// Geometric phase x = (k G_b(nu/k) + pi/2) mod 2 pi, defined for nu/k <= R.
pub fn disk_approx(d: u32, l: u32, k: f64, radius: f64) -> Result<f64, DiskError> {
    if k <= 0.0 || radius <= 0.0 {
        return Err(DiskError::Domain(format!("need k > 0 and R > 0, got k = {k}, R = {radius}")));
    }
    let alpha = order_of(d, l) / k;
    if alpha > radius {
        return Err(DiskError::OutsideBall { alpha, radius });
    }
    Ok((k * ball_g(alpha, radius) + 0.5 * std::f64::consts::PI)
        .rem_euclid(2.0 * std::f64::consts::PI))
}

#[derive(Debug, Clone, Serialize)]
pub struct DiskEntry {
    pub l: u32,
    pub nu: f64,
    /// alpha = nu / k.
    pub alpha: f64,
    pub multiplicity: u64,
    pub x_exact: f64,
    pub x_approx: f64,
    /// |e^{i x_exact} - e^{i x_approx}|.
    pub err: f64,
}

/// All angular momenta with nu/k <= alpha_max, in increasing l.
pub fn disk_entries(d: u32, k: f64, radius: f64, alpha_max: f64) -> Result<Vec<DiskEntry>, DiskError> {
    let mut out = Vec::new();
    let mut l = 0u32;
    loop {
        let nu = order_of(d, l);
        let alpha = nu / k;
        if alpha > alpha_max {
            break;
        }
        let x_exact = disk_exact(d, l, k, radius)?;
        let x_approx = disk_approx(d, l, k, radius)?;
        let err = 2.0 * (0.5 * (x_exact - x_approx)).sin().abs();
        out.push(DiskEntry {
            l,
            nu,
            alpha,
            multiplicity: spherical_harmonic_dim(d, l),
            x_exact,
            x_approx,
            err,
        });
        l += 1;
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct DiskSweepRow {
    pub k: f64,
    /// Sup of the eigenvalue error over alpha <= R - k^{-1/3}.
    pub sup_err: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiskSweep {
    pub rows: Vec<DiskSweepRow>,
    pub rate: RateFit,
}

/// Sup-error decay across wavenumbers, restricted to the uniform window
/// alpha <= R - k^{-1/3} that keeps the glancing regime out.
pub fn disk_error_sweep(d: u32, radius: f64, k_list: &[f64]) -> Result<DiskSweep, DiskError> {
    let mut rows = Vec::with_capacity(k_list.len());
    for &k in k_list {
        let alpha_max = radius - k.powf(-1.0 / 3.0);
        if alpha_max <= 0.0 {
            return Err(DiskError::Domain(format!("k = {k} too small for radius {radius}")));
        }
        let entries = disk_entries(d, k, radius, alpha_max)?;
        let sup_err = entries.iter().map(|e| e.err).fold(0.0, f64::max);
        rows.push(DiskSweepRow { k, sup_err, count: entries.len() });
    }
    let ks: Vec<f64> = rows.iter().map(|r| r.k).collect();
    let errs: Vec<f64> = rows.iter().map(|r| r.sup_err).collect();
    let rate = fit_rate(&ks, &errs)?;
    Ok(DiskSweep { rows, rate })
}
