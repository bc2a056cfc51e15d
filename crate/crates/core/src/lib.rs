//! Semiclassical scattering toolkit for compactly supported central potentials.
//!
//! The crate computes, for a repulsive compactly supported potential in d
//! dimensions at energy 1, the exact scattering-matrix eigenvalues on each
//! spherical-harmonic sector (via a radial solve matched to Hankel functions),
//! their semiclassical approximation driven by the classical scattering angle,
//! the hard-obstacle reference case, and circle-equidistribution diagnostics
//! for the resulting phase ensembles.
//!
//! Module map:
//! - [`specfun`]: Bessel/Hankel functions of real nonnegative order.
//! - [`potential`]: potential families and the classical admissibility checks.
//! - [`classical`]: trajectories, turning radii, scattering angle, time delay.
//! - [`radial`]: exact eigenvalues, WKB eigenvalues, phase-shift tables.
//! - [`disk`]: hard-ball eigenvalues, exact and approximate.
//! - [`equidist`]: weighted circle ensembles, discrepancy, Weyl-sum bounds.
//! - [`fit`]: log-log least-squares rate fits.

pub mod classical;
pub mod disk;
pub mod equidist;
pub mod fit;
pub mod interp;
pub mod ode;
pub mod potential;
pub mod quad;
pub mod radial;
pub mod specfun;

/// Dimension of the space of degree-`l` spherical harmonics on the unit
/// sphere in `R^d`, i.e. the multiplicity of the `l`-th eigenvalue block of
/// the scattering matrix for a central potential.
///
/// `d = 2` gives 1, 2, 2, 2, ...; `d = 3` gives `2l + 1`; `d = 4` gives
/// `(l + 1)^2`.
///
/// # Panics
/// Panics if `d < 2` or the count overflows `u64`.
pub fn spherical_harmonic_dim(d: u32, l: u32) -> u64 {
    assert!(d >= 2, "spherical harmonics need d >= 2, got d = {d}");
    if l == 0 {
        return 1;
    }
    // dim = C(l + d - 1, d - 1) - C(l + d - 3, d - 1)
    binomial(u64::from(l + d - 1), u64::from(d - 1))
        .and_then(|a| binomial(u64::from(l + d - 3), u64::from(d - 1)).map(|b| a - b))
        .expect("spherical_harmonic_dim overflow")
}

fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at each step
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}
