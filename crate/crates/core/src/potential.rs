//! Smooth compactly supported central potentials.
//!
//! Every family evaluates V, V' and V'' in closed form (tabulated data goes
//! through a spline), vanishes identically for r >= R, and is immutable, so
//! values can be shared freely across parallel sweeps. The module also hosts
//! the dynamical checks used before an experiment is trusted: the interaction
//! region, simplicity of radial turning points, and the repulsive
//! deflection-monotonicity condition.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interp::CubicSpline;

#[derive(Debug, Error)]
pub enum PotentialError {
    #[error("potential specification is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("potential specification rejected: {0}")]
    Invalid(String),
    #[error("cannot read potential file: {0}")]
    Io(#[from] std::io::Error),
}

/// Radial potential with two hand-coded derivatives and support in [0, R].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum CentralPotential {
    /// c * exp(1/(r^2 - R^2)) inside r < R.
    Bump {
        c: f64,
        #[serde(rename = "R")]
        radius: f64,
    },
    /// Amplitude-scaled copy of the unit bump; kept as a named family so
    /// specs can state the scaling explicitly.
    ScaledBump {
        c: f64,
        #[serde(rename = "R")]
        radius: f64,
    },
    /// P(r^2) * exp(1/(r^2 - R^2)) with P given by `coeffs` (constant term
    /// first). Even in r, so smooth at the origin.
    PolynomialTimesBump {
        coeffs: Vec<f64>,
        #[serde(rename = "R")]
        radius: f64,
    },
    /// Cubic-spline interpolation of sampled values; derivatives come from
    /// the spline and are second-order accurate in the knot spacing.
    Tabulated {
        r: Vec<f64>,
        v: Vec<f64>,
        #[serde(skip, default)]
        spline: OnceLock<CubicSpline>,
    },
}

impl CentralPotential {
    pub fn bump(c: f64, radius: f64) -> Self {
        CentralPotential::Bump { c, radius }
    }

    pub fn from_json_str(s: &str) -> Result<Self, PotentialError> {
        let p: CentralPotential = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, PotentialError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<(), PotentialError> {
        let bad = |m: &str| Err(PotentialError::Invalid(m.to_string()));
        match self {
            CentralPotential::Bump { c, radius } | CentralPotential::ScaledBump { c, radius } => {
                if !(*radius > 0.0) || !radius.is_finite() || !c.is_finite() {
                    return bad("need finite c and R > 0");
                }
            }
            CentralPotential::PolynomialTimesBump { coeffs, radius } => {
                if !(*radius > 0.0) || !radius.is_finite() {
                    return bad("need R > 0");
                }
                if coeffs.is_empty() || coeffs.iter().any(|a| !a.is_finite()) {
                    return bad("need nonempty finite coefficient list");
                }
            }
            CentralPotential::Tabulated { r, v, .. } => {
                if r.len() != v.len() || r.len() < 4 {
                    return bad("tabulated potential needs >= 4 matching samples");
                }
                if r[0] != 0.0 {
                    return bad("tabulated grid must start at r = 0");
                }
                if r.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("tabulated grid must be strictly increasing");
                }
                if *v.last().unwrap() != 0.0 {
                    return bad("tabulated values must end at 0 (compact support)");
                }
                if r.iter().chain(v.iter()).any(|x| !x.is_finite()) {
                    return bad("tabulated samples must be finite");
                }
            }
        }
        Ok(())
    }

    /// Support radius R: V(r) = 0 for every r >= R.
    pub fn support_radius(&self) -> f64 {
        match self {
            CentralPotential::Bump { radius, .. }
            | CentralPotential::ScaledBump { radius, .. }
            | CentralPotential::PolynomialTimesBump { radius, .. } => *radius,
            CentralPotential::Tabulated { r, .. } => *r.last().unwrap(),
        }
    }

    /// Same potential with all values multiplied by `factor` (the energy
    /// reduction divides by E).
    pub fn scaled_amplitude(&self, factor: f64) -> Self {
        match self {
            CentralPotential::Bump { c, radius } => {
                CentralPotential::Bump { c: c * factor, radius: *radius }
            }
            CentralPotential::ScaledBump { c, radius } => {
                CentralPotential::ScaledBump { c: c * factor, radius: *radius }
            }
            CentralPotential::PolynomialTimesBump { coeffs, radius } => {
                CentralPotential::PolynomialTimesBump {
                    coeffs: coeffs.iter().map(|a| a * factor).collect(),
                    radius: *radius,
                }
            }
            CentralPotential::Tabulated { r, v, .. } => CentralPotential::Tabulated {
                r: r.clone(),
                v: v.iter().map(|x| x * factor).collect(),
                spline: OnceLock::new(),
            },
        }
    }

    /// (V, V', V'') at radius r >= 0; identically (0, 0, 0) for r >= R.
    pub fn evaluate(&self, r: f64) -> (f64, f64, f64) {
        assert!(r >= 0.0, "radius must be nonnegative");
        let radius = self.support_radius();
        if r >= radius {
            return (0.0, 0.0, 0.0);
        }
        match self {
            CentralPotential::Bump { c, radius } | CentralPotential::ScaledBump { c, radius } => {
                let (b, bp, bpp) = bump_core(r, *radius);
                (c * b, c * bp, c * bpp)
            }
            CentralPotential::PolynomialTimesBump { coeffs, radius } => {
                let (b, bp, bpp) = bump_core(r, *radius);
                let s = r * r;
                let (mut p, mut ps, mut pss) = (0.0, 0.0, 0.0);
                for &a in coeffs.iter().rev() {
                    pss = pss * s + 2.0 * ps;
                    ps = ps * s + p;
                    p = p * s + a;
                }
                // P(r^2): d/dr = 2r P'(s), d2/dr2 = 4r^2 P''(s) + 2 P'(s).
                let q = p;
                let qp = 2.0 * r * ps;
                let qpp = 4.0 * s * pss + 2.0 * ps;
                (q * b, qp * b + q * bp, qpp * b + 2.0 * qp * bp + q * bpp)
            }
            CentralPotential::Tabulated { r: rs, v, spline } => {
                let sp = spline.get_or_init(|| CubicSpline::new(rs.clone(), v.clone()));
                (sp.eval(r), sp.deriv(r), sp.deriv2(r))
            }
        }
    }

    /// True when the potential is the zero function (up to underflow).
    pub fn is_zero(&self) -> bool {
        let radius = self.support_radius();
        (0..64).all(|i| {
            let r = radius * (i as f64 + 0.5) / 64.0;
            let (v, vp, vpp) = self.evaluate(r);
            v == 0.0 && vp == 0.0 && vpp == 0.0
        })
    }
}

/// exp(1/(r^2 - R^2)) and two derivatives, unit amplitude, r < R.
fn bump_core(r: f64, radius: f64) -> (f64, f64, f64) {
    let u = r * r - radius * radius;
    let b = (1.0 / u).exp();
    if b == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let u2 = u * u;
    let bp = b * (-2.0 * r / u2);
    let bpp = b * (4.0 * r * r / (u2 * u2) - 2.0 / u2 + 8.0 * r * r / (u2 * u));
    (b, bp, bpp)
}

/// Inner radius of the set of radii reachable from infinity at energy 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InteractionRegion {
    pub r0: f64,
}

/// Largest r with V(r) = 1, or 0 when V < 1 everywhere; bisection to 1e-10.
pub fn interaction_region(potential: &CentralPotential) -> InteractionRegion {
    let radius = potential.support_radius();
    let n = 4096;
    let value = |r: f64| potential.evaluate(r).0 - 1.0;
    let mut bracket = None;
    for i in (0..n).rev() {
        let a = radius * i as f64 / n as f64;
        let b = radius * (i + 1) as f64 / n as f64;
        if value(a) >= 0.0 && value(b) < 0.0 {
            bracket = Some((a, b));
            break;
        }
    }
    let Some((mut a, mut b)) = bracket else {
        return InteractionRegion { r0: 0.0 };
    };
    while b - a > 1e-10 {
        let mid = 0.5 * (a + b);
        if value(mid) >= 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    InteractionRegion { r0: 0.5 * (a + b) }
}

/// Turning-point simplicity report for one angular momentum.
#[derive(Debug, Clone, Serialize)]
pub struct EtaRootReport {
    pub eta: f64,
    pub roots: Vec<f64>,
    pub min_abs_fprime: f64,
    pub bracketing_failed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct NontrappingReport {
    pub per_eta: Vec<EtaRootReport>,
    pub pass: bool,
    pub min_abs_fprime: f64,
}

const SIMPLE_ZERO_TOL: f64 = 1e-8;

/// Finds every root of F(r) = 1 - eta^2/r^2 - V(r) for each eta and checks
/// that all of them are simple (|F'| above tolerance). A sign analysis that
/// finds no root where one must exist (F < 0 somewhere) is reported per eta
/// rather than failing the whole check.
pub fn check_nontrapping(potential: &CentralPotential, eta_grid: &[f64]) -> NontrappingReport {
    let radius = potential.support_radius();
    let mut per_eta = Vec::with_capacity(eta_grid.len());
    let mut min_abs_fprime = f64::INFINITY;
    let mut pass = true;
    for &eta in eta_grid {
        let f = |r: f64| 1.0 - eta * eta / (r * r) - potential.evaluate(r).0;
        let fp = |r: f64| 2.0 * eta * eta / (r * r * r) - potential.evaluate(r).1;
        let hi = radius.max(eta) * 1.5;
        let lo = 1e-9 * radius;
        let n = 8192;
        let mut roots = Vec::new();
        let mut saw_negative = false;
        let mut prev_r = lo;
        let mut prev_f = if eta > 0.0 { f64::NEG_INFINITY } else { f(lo) };
        for i in 1..=n {
            let r = lo + (hi - lo) * i as f64 / n as f64;
            let fr = f(r);
            saw_negative |= fr < 0.0;
            if prev_f < 0.0 && fr >= 0.0 || prev_f >= 0.0 && fr < 0.0 {
                if prev_f.is_finite() {
                    roots.push(refine_root(&f, prev_r, r));
                } else {
                    // Left endpoint is the -infinity limit; bisect from a
                    // point where f is finite.
                    roots.push(refine_root(&f, lo, r));
                }
            }
            prev_r = r;
            prev_f = fr;
        }
        let bracketing_failed = roots.is_empty() && (saw_negative || eta > 0.0);
        let mut min_fp = f64::INFINITY;
        for &root in &roots {
            min_fp = min_fp.min(fp(root).abs());
        }
        if bracketing_failed || min_fp <= SIMPLE_ZERO_TOL {
            pass = false;
        }
        min_abs_fprime = min_abs_fprime.min(min_fp);
        per_eta.push(EtaRootReport { eta, roots, min_abs_fprime: min_fp, bracketing_failed });
    }
    NontrappingReport { per_eta, pass, min_abs_fprime }
}

fn refine_root(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    if fa == 0.0 {
        return a;
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b || b - a < 1e-14 * b.abs().max(1.0) {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

#[derive(Debug, Clone, Serialize)]
pub struct AngleConditionReport {
    pub pass: bool,
    /// True when the potential vanishes identically, which satisfies the
    /// condition with nothing to check.
    pub vacuous: bool,
    /// Minimum over the sampled region of r V'^2 + (1 - V)(V' + r V'').
    pub min_margin: f64,
    pub margin_argmin: f64,
    /// Maximum of V' over the region (must be <= 0 for a repulsive profile).
    pub max_vprime: f64,
}

/// Sufficient condition for strictly monotone deflection: V' <= 0 and
/// r V'^2 + (1 - V)(V' + r V'') > 0 on the interaction annulus (r0, R).
pub fn check_angle_condition(potential: &CentralPotential) -> AngleConditionReport {
    if potential.is_zero() {
        return AngleConditionReport {
            pass: true,
            vacuous: true,
            min_margin: 0.0,
            margin_argmin: 0.0,
            max_vprime: 0.0,
        };
    }
    let radius = potential.support_radius();
    let r0 = interaction_region(potential).r0;
    let n = 4096;
    let mut min_margin = f64::INFINITY;
    let mut margin_argmin = r0;
    let mut max_vprime = f64::NEG_INFINITY;
    for i in 0..n {
        let r = r0 + (radius - r0) * (i as f64 + 0.5) / n as f64;
        let (v, vp, vpp) = potential.evaluate(r);
        if v == 0.0 && vp == 0.0 && vpp == 0.0 {
            // Underflowed tail; the condition concerns the support interior.
            continue;
        }
        let margin = r * vp * vp + (1.0 - v) * (vp + r * vpp);
        if margin < min_margin {
            min_margin = margin;
            margin_argmin = r;
        }
        max_vprime = max_vprime.max(vp);
    }
    AngleConditionReport {
        pass: min_margin > 0.0 && max_vprime <= 1e-12,
        vacuous: false,
        min_margin,
        margin_argmin,
        max_vprime,
    }
}
