//! Scattering eigenvalues of the semiclassical radial problem.
//!
//! For dimension d and angular momentum l, with nu = l + (d-2)/2, the radial
//! wave f solves
//!   -f'' - f'/r + nu^2/r^2 f + (V - 1)/h^2 f = 0.
//! Outside the support f is a combination A H1_nu(r/h) + B H2_nu(r/h); the
//! eigenvalue is c = B/A = conj(A)/A, unimodular with argument beta. The WKB
//! surrogate replaces beta by G(nu h)/h built from the classical profile.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::classical::{default_eta_grid, phase_generator, ClassicalError, ScatteringProfile};
use crate::ode::{Control, Dopri5, OdeError};
use crate::potential::CentralPotential;
use crate::specfun::{hankel1, SpecFunError};
use crate::spherical_harmonic_dim;

#[derive(Debug, Error)]
pub enum RadialError {
    #[error("radial solve stalled at l = {l}, h = {h}: {source}")]
    Stiff { l: u32, h: f64, source: OdeError },
    #[error("matching amplitude vanished at l = {l}, h = {h}")]
    NearZeroMatch { l: u32, h: f64 },
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error(transparent)]
    Classical(#[from] ClassicalError),
    #[error("invalid input: {0}")]
    Domain(String),
}

pub fn order_of(d: u32, l: u32) -> f64 {
    l as f64 + (d as f64 - 2.0) / 2.0
}

/// Default table length: safely past the support edge at lh = 1.6 R.
pub fn default_l_max(radius: f64, h: f64) -> u32 {
    (1.6 * radius / h).ceil() as u32
}

/// Integrates the regular solution out to r_match and returns (f, f') there,
/// normalized up to an arbitrary positive factor. The start value comes from
/// the Frobenius expansion f = r^nu (1 + a2 r^2 + a4 r^4 + ...) at a seed
/// radius small enough that the truncation is far below solver tolerance;
/// the overall r_seed^nu factor is dropped. Growth through classically
/// forbidden regions is absorbed by renormalizing the pair.
pub fn solve_radial(
    potential: &CentralPotential,
    d: u32,
    l: u32,
    h: f64,
    r_match: f64,
) -> Result<(f64, f64), RadialError> {
    if d < 2 || h <= 0.0 || r_match <= 0.0 {
        return Err(RadialError::Domain(format!(
            "need d >= 2, h > 0, r_match > 0; got d = {d}, h = {h}, r_match = {r_match}"
        )));
    }
    let nu = order_of(d, l);
    let radius = potential.support_radius();
    let (v0, _, v0pp) = potential.evaluate(0.0);
    // |a2| r_seed^2 stays below 1e-5, keeping the dropped r^6 term near 1e-15.
    let vscale = (v0 - 1.0).abs().max(0.1);
    let r_seed = (0.1 * radius).min(h * (4e-5 * (nu + 1.0) / vscale).sqrt()).min(0.5 * r_match);
    let a2 = (v0 - 1.0) / ((4.0 * nu + 4.0) * h * h);
    let a4 = ((v0 - 1.0) * a2 + 0.5 * v0pp) / ((8.0 * nu + 16.0) * h * h);
    let s2 = r_seed * r_seed;
    let f0 = 1.0 + a2 * s2 + a4 * s2 * s2;
    let fp0 = (nu + (nu + 2.0) * a2 * s2 + (nu + 4.0) * a4 * s2 * s2) / r_seed;

    let rhs = |r: f64, y: &[f64; 2]| {
        let v = potential.evaluate(r).0;
        [y[1], -y[1] / r + (nu * nu / (r * r) + (v - 1.0) / (h * h)) * y[0]]
    };
    const RENORM: f64 = 1e150;
    let solver = Dopri5::default();
    let result = solver.integrate(rhs, r_seed, [f0, fp0], r_match, |dense| {
        let y = dense.y1;
        let m = y[0].abs().max(y[1].abs());
        if m > RENORM {
            Control::Replace([y[0] / m, y[1] / m])
        } else {
            Control::Continue
        }
    });
    match result {
        Ok((_, y)) => Ok((y[0], y[1])),
        Err(source) => Err(RadialError::Stiff { l, h, source }),
    }
}

/// Matches (f, f') onto Hankel functions at r_match and returns the
/// unimodular eigenvalue together with its argument in [0, 2 pi).
/// With z = r_match / h and the Wronskian H1 H2' - H1' H2 = -4i/(pi z):
///   A = (i pi z / 4)(f H2' - h f' H2),  B = (i pi z / 4)(h f' H1 - f H1'),
/// and c = B / A, which equals conj(A)/A since f is real.
pub fn exact_eigenvalue(
    potential: &CentralPotential,
    d: u32,
    l: u32,
    h: f64,
    r_match: Option<f64>,
) -> Result<(Complex64, f64), RadialError> {
    let radius = potential.support_radius();
    let r_match = r_match.unwrap_or(2.0 * radius);
    if r_match < radius {
        return Err(RadialError::Domain(format!(
            "r_match = {r_match} must lie at or beyond the support radius {radius}"
        )));
    }
    let (f, fp) = solve_radial(potential, d, l, h, r_match)?;
    let nu = order_of(d, l);
    let z = r_match / h;
    let pair = hankel1(nu, z)?;
    let h1 = pair.h1;
    let h1p = pair.h1_deriv;
    let h2 = h1.conj();
    let h2p = h1p.conj();
    let scale = Complex64::new(0.0, std::f64::consts::PI * z / 4.0);
    let a = scale * (f * h2p - h * fp * h2);
    let b = scale * (h * fp * h1 - f * h1p);
    if a.norm() < 1e-280 {
        return Err(RadialError::NearZeroMatch { l, h });
    }
    let c = b / a;
    let mut beta = c.arg();
    if beta < 0.0 {
        beta += 2.0 * std::f64::consts::PI;
    }
    Ok((c, beta))
}

/// WKB eigenvalue exp(i G(nu h)/h) read off the classical profile.
pub fn wkb_eigenvalue(profile: &ScatteringProfile, d: u32, l: u32, h: f64) -> (Complex64, f64) {
    let alpha = order_of(d, l) * h;
    let beta = (profile.g_at(alpha) / h).rem_euclid(2.0 * std::f64::consts::PI);
    (Complex64::from_polar(1.0, beta), beta)
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct EntryFlags {
    /// nu h within epsilon of a deflection multiple of pi (odd-dimension
    /// exclusion set) or below epsilon.
    pub bad_set: bool,
    /// nu h at least R + h^kappa: asymptotically trivial regime.
    pub large_l: bool,
    /// Radial solve stalled; eigenvalue pinned to 1.
    pub stiff: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseShiftEntry {
    pub l: u32,
    pub nu: f64,
    /// Semiclassical angular momentum nu h.
    pub alpha: f64,
    pub multiplicity: u64,
    #[serde(skip)]
    pub eigenvalue: Complex64,
    pub beta_exact: f64,
    pub beta_wkb: f64,
    pub flags: EntryFlags,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseShiftTable {
    pub d: u32,
    pub h: f64,
    pub r_match: f64,
    pub entries: Vec<PhaseShiftEntry>,
}

#[derive(Debug, Clone, Copy)]
pub struct TableOptions {
    /// Width of the exclusion window around the bad set and around 0.
    pub epsilon: f64,
    /// Exponent in the large-l threshold nu h >= R + h^kappa.
    pub kappa: f64,
    pub r_match: Option<f64>,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions { epsilon: 0.05, kappa: 0.5, r_match: None }
    }
}

/// Exclusion flags for the semiclassical momentum alpha = nu h, shared by
/// the exact and WKB-only table builders. The stiff flag is the solver's to
/// set.
pub fn entry_flags(
    bad_set: &[f64],
    radius: f64,
    alpha: f64,
    h: f64,
    opts: &TableOptions,
) -> EntryFlags {
    let near_bad = bad_set.iter().any(|&s| (alpha - s).abs() < opts.epsilon);
    EntryFlags {
        bad_set: near_bad || alpha < opts.epsilon,
        large_l: alpha >= radius + h.powf(opts.kappa),
        stiff: false,
    }
}

/// Builds the full table for one (d, h), solving angular momenta in
/// parallel. A stalled solve is recorded as eigenvalue 1 with the stiff
/// flag; any other failure aborts.
pub fn build_table_with_profile(
    potential: &CentralPotential,
    profile: &ScatteringProfile,
    d: u32,
    h: f64,
    l_max: u32,
    opts: &TableOptions,
) -> Result<PhaseShiftTable, RadialError> {
    let radius = potential.support_radius();
    let r_match = opts.r_match.unwrap_or(2.0 * radius);
    let bad_set = profile.bad_set();
    let entries: Result<Vec<PhaseShiftEntry>, RadialError> = (0..=l_max)
        .into_par_iter()
        .map(|l| {
            let nu = order_of(d, l);
            let alpha = nu * h;
            let (eigenvalue, beta_exact, stiff) =
                match exact_eigenvalue(potential, d, l, h, Some(r_match)) {
                    Ok((c, beta)) => (c, beta, false),
                    Err(RadialError::Stiff { .. }) => (Complex64::new(1.0, 0.0), 0.0, true),
                    Err(e) => return Err(e),
                };
            let (_, beta_wkb) = wkb_eigenvalue(profile, d, l, h);
            let mut flags = entry_flags(&bad_set, radius, alpha, h, opts);
            flags.stiff = stiff;
            Ok(PhaseShiftEntry {
                l,
                nu,
                alpha,
                multiplicity: spherical_harmonic_dim(d, l),
                eigenvalue,
                beta_exact,
                beta_wkb,
                flags,
            })
        })
        .collect();
    Ok(PhaseShiftTable { d, h, r_match, entries: entries? })
}

/// Convenience path that builds the classical profile internally.
pub fn build_table(
    potential: &CentralPotential,
    d: u32,
    h: f64,
    l_max: u32,
) -> Result<PhaseShiftTable, RadialError> {
    let profile = phase_generator(potential, &default_eta_grid(potential.support_radius()))?;
    build_table_with_profile(potential, &profile, d, h, l_max, &TableOptions::default())
}

/// Distance between two phase arguments on the circle.
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let d = (a - b).rem_euclid(two_pi);
    d.min(two_pi - d)
}
