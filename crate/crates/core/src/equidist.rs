//! Equidistribution diagnostics for weighted point sets on the circle.
//!
//! Discrepancy here is the arc discrepancy: the sup over closed arcs of
//! |weight fraction - arc fraction|. The sup is attained either on a closed
//! arc whose endpoints are sample points (weight excess) or in the limit of
//! open arcs between sample points (weight deficit), so a finite scan over
//! endpoint pairs is exact.

use num_complex::Complex64;
use serde::Serialize;

use crate::classical::ScatteringProfile;
use crate::spherical_harmonic_dim;

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// Weighted multiset of angles in [0, 2 pi), sorted, duplicates merged.
#[derive(Debug, Clone, Serialize)]
pub struct CircleEnsemble {
    points: Vec<(f64, u64)>,
    total_weight: u64,
}

impl CircleEnsemble {
    pub fn from_weighted_args(args: impl IntoIterator<Item = (f64, u64)>) -> Self {
        let mut pts: Vec<(f64, u64)> = args
            .into_iter()
            .filter(|&(_, w)| w > 0)
            .map(|(x, w)| {
                assert!(x.is_finite(), "ensemble argument must be finite");
                let mut xn = x.rem_euclid(TAU);
                if xn >= TAU {
                    xn = 0.0;
                }
                (xn, w)
            })
            .collect();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut merged: Vec<(f64, u64)> = Vec::with_capacity(pts.len());
        for (x, w) in pts {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += w,
                _ => merged.push((x, w)),
            }
        }
        let total_weight = merged.iter().map(|&(_, w)| w).sum();
        CircleEnsemble { points: merged, total_weight }
    }

    pub fn from_args(args: impl IntoIterator<Item = f64>) -> Self {
        Self::from_weighted_args(args.into_iter().map(|x| (x, 1)))
    }

    pub fn points(&self) -> &[(f64, u64)] {
        &self.points
    }

    pub fn total_weight(&self) -> u64 {
        self.total_weight
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Weighted exponential sum S_j = sum w e^{i j x}.
    pub fn weyl_sum(&self, j: u32) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for &(x, w) in &self.points {
            s += w as f64 * Complex64::from_polar(1.0, j as f64 * x);
        }
        s
    }
}

/// Total weight on the closed arc [phi0, phi1], 0 <= phi0 <= phi1 <= 2 pi.
/// Arcs crossing 0 are handled by the caller as two pieces.
pub fn counting(ensemble: &CircleEnsemble, phi0: f64, phi1: f64) -> u64 {
    assert!(
        (0.0..=TAU).contains(&phi0) && (0.0..=TAU).contains(&phi1) && phi0 <= phi1,
        "need 0 <= phi0 <= phi1 <= 2 pi"
    );
    ensemble
        .points
        .iter()
        .filter(|&&(x, _)| x >= phi0 && x <= phi1)
        .map(|&(_, w)| w)
        .sum()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DiscrepancyReport {
    pub discrepancy: f64,
    /// Arc on which the sup is attained (closed, or the open-limit
    /// endpoints for a deficit witness); may wrap through 0.
    pub witness: (f64, f64),
    /// True when the witness measures missing weight on the open arc.
    pub witness_is_deficit: bool,
    pub n_points: usize,
    pub total_weight: u64,
}

/// Exact arc discrepancy by the O(n^2) endpoint-pair scan.
pub fn discrepancy(ensemble: &CircleEnsemble) -> DiscrepancyReport {
    assert!(!ensemble.is_empty(), "discrepancy needs a nonempty ensemble");
    let pts = &ensemble.points;
    let n = pts.len();
    let k = ensemble.total_weight as f64;
    let mut best = f64::NEG_INFINITY;
    let mut witness = (pts[0].0, pts[0].0);
    let mut witness_is_deficit = false;
    for i in 0..n {
        let xi = pts[i].0;
        let mut acc: u64 = 0;
        for off in 0..n {
            let j = (i + off) % n;
            let (xj, wj) = pts[j];
            acc += wj;
            let len = if off == 0 {
                0.0
            } else {
                let raw = xj - xi;
                if raw <= 0.0 {
                    raw + TAU
                } else {
                    raw
                }
            };
            let excess = acc as f64 / k - len / TAU;
            if excess > best {
                best = excess;
                witness = (xi, xj);
                witness_is_deficit = false;
            }
            if off >= 1 {
                let open = acc - pts[i].1 - wj;
                let deficit = len / TAU - open as f64 / k;
                if deficit > best {
                    best = deficit;
                    witness = (xi, xj);
                    witness_is_deficit = true;
                }
            }
        }
    }
    DiscrepancyReport {
        discrepancy: best,
        witness,
        witness_is_deficit,
        n_points: n,
        total_weight: ensemble.total_weight,
    }
}

/// Same value by an O(n) sweep: both the closed-arc excess and the open-arc
/// deficit separate into a difference of per-endpoint scores, wrapped arcs
/// included, because the full-circle corrections K/K and 2 pi/2 pi cancel.
pub fn discrepancy_fast(ensemble: &CircleEnsemble) -> f64 {
    assert!(!ensemble.is_empty(), "discrepancy needs a nonempty ensemble");
    let pts = &ensemble.points;
    let k = ensemble.total_weight as f64;
    let mut prefix: u64 = 0;
    let mut max_a = f64::NEG_INFINITY;
    let mut min_b = f64::INFINITY;
    let mut max_c = f64::NEG_INFINITY;
    let mut min_e = f64::INFINITY;
    for &(x, w) in pts.iter() {
        let before = prefix as f64;
        prefix += w;
        let after = prefix as f64;
        max_a = max_a.max(after / k - x / TAU);
        min_b = min_b.min(before / k - x / TAU);
        max_c = max_c.max(x / TAU - before / k);
        min_e = min_e.min(x / TAU - after / k);
    }
    (max_a - min_b).max(max_c - min_e)
}

/// Explicit Erdos-Turan majorant
///   D <= 6/(m+1) + (4/pi) sum_{j=1}^m (1/j - 1/(m+1)) |S_j| / K.
pub fn erdos_turan_bound(ensemble: &CircleEnsemble, m: u32) -> f64 {
    assert!(m >= 1, "need at least one harmonic");
    let k = ensemble.total_weight as f64;
    let mut sum = 0.0;
    for j in 1..=m {
        let coeff = 1.0 / j as f64 - 1.0 / (m as f64 + 1.0);
        sum += coeff * ensemble.weyl_sum(j).norm() / k;
    }
    6.0 / (m as f64 + 1.0) + 4.0 / std::f64::consts::PI * sum
}

/// Default harmonic count floor(sqrt(K)).
pub fn default_harmonic_count(total_weight: u64) -> u32 {
    ((total_weight as f64).sqrt().floor() as u32).max(1)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExpSumCheck {
    pub sum_abs: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Second-derivative (van der Corput) test: when |f''| >= rho > 0 on [a, b],
///   |sum_{l=a}^{b} e^{2 pi i f(l)}| <= (|f'(b) - f'(a)| + 2)(4/sqrt(rho) + 3).
/// The caller is responsible for the curvature hypothesis.
pub fn exp_sum_bound_check(
    f: impl Fn(f64) -> f64,
    f_prime: impl Fn(f64) -> f64,
    a: i64,
    b: i64,
    rho: f64,
) -> ExpSumCheck {
    assert!(b >= a, "need a nonempty summation range");
    assert!(rho > 0.0, "need a positive curvature floor");
    let mut s = Complex64::new(0.0, 0.0);
    for l in a..=b {
        s += Complex64::from_polar(1.0, TAU * f(l as f64));
    }
    let sum_abs = s.norm();
    let bound = ((f_prime(b as f64) - f_prime(a as f64)).abs() + 2.0) * (4.0 / rho.sqrt() + 3.0);
    ExpSumCheck { sum_abs, bound, pass: sum_abs <= bound }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuperposeReport {
    pub ensemble: CircleEnsemble,
    /// Convexity bound sum (K_i / K) D(omega_i).
    pub bound: f64,
    pub discrepancy: f64,
}

/// Concatenates ensembles and checks the convexity bound on the result.
pub fn superpose(parts: &[CircleEnsemble]) -> SuperposeReport {
    assert!(!parts.is_empty() && parts.iter().all(|p| !p.is_empty()));
    let total: u64 = parts.iter().map(|p| p.total_weight()).sum();
    let mut bound = 0.0;
    let mut args = Vec::new();
    for p in parts {
        bound += p.total_weight() as f64 / total as f64 * discrepancy(p).discrepancy;
        args.extend(p.points().iter().copied());
    }
    let ensemble = CircleEnsemble::from_weighted_args(args);
    let d = discrepancy(&ensemble).discrepancy;
    debug_assert!(d <= bound + 1e-12, "superposition bound violated: {d} > {bound}");
    SuperposeReport { ensemble, bound, discrepancy: d }
}

/// WKB phase ensemble of a scattering profile: arguments G((l + s) h)/h
/// mod 2 pi with s = (d-2)/2, weighted by harmonic multiplicities, over the
/// semiclassically visible range 0 <= l h < R. `exclude` drops every l whose
/// l h comes within eps of the given set.
pub fn build_wkb_ensemble(
    profile: &ScatteringProfile,
    d: u32,
    h: f64,
    exclude: Option<(&[f64], f64)>,
) -> CircleEnsemble {
    assert!(h > 0.0);
    let radius = profile.radius();
    let shift = (d as f64 - 2.0) / 2.0;
    let mut args = Vec::new();
    let mut l = 0u32;
    loop {
        let lh = l as f64 * h;
        if lh >= radius {
            break;
        }
        let excluded = match exclude {
            Some((set, eps)) => set.iter().any(|&s| (lh - s).abs() < eps),
            None => false,
        };
        if !excluded {
            let alpha = (l as f64 + shift) * h;
            let x = (profile.g_at(alpha) / h).rem_euclid(TAU);
            args.push((x, spherical_harmonic_dim(d, l)));
        }
        l += 1;
    }
    CircleEnsemble::from_weighted_args(args)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn canonical_examples() {
        let single = CircleEnsemble::from_args([1.0]);
        assert_eq!(discrepancy(&single).discrepancy, 1.0);

        let n = 10;
        let equal = CircleEnsemble::from_args((0..n).map(|i| TAU * i as f64 / n as f64));
        assert_abs_diff_eq!(discrepancy(&equal).discrepancy, 1.0 / n as f64, epsilon = 1e-12);

        let antipodal = CircleEnsemble::from_args([0.0, PI]);
        assert_abs_diff_eq!(discrepancy(&antipodal).discrepancy, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn duplicate_points_merge() {
        let e = CircleEnsemble::from_weighted_args([(1.0, 2), (1.0, 3), (2.0, 1)]);
        assert_eq!(e.len(), 2);
        assert_eq!(e.total_weight(), 6);
        assert_eq!(counting(&e, 0.5, 1.5), 5);
        assert_eq!(counting(&e, 0.0, TAU), 6);
        assert_eq!(counting(&e, 1.0, 1.0), 5);
    }

    /// Oracle with the same candidate arcs and value expressions, organized
    /// as a plain membership count per arc.
    fn brute_force_discrepancy(e: &CircleEnsemble) -> f64 {
        let pts = e.points();
        let n = pts.len();
        let k = e.total_weight() as f64;
        let mut best = f64::NEG_INFINITY;
        for i in 0..n {
            for off in 0..n {
                let j = (i + off) % n;
                let len = if off == 0 {
                    0.0
                } else {
                    let raw = pts[j].0 - pts[i].0;
                    if raw <= 0.0 {
                        raw + TAU
                    } else {
                        raw
                    }
                };
                // Closed-arc weight from x_i forward to x_j.
                let mut closed: u64 = 0;
                for t in 0..n {
                    let inside = if off == 0 {
                        t == i
                    } else if pts[i].0 <= pts[j].0 {
                        pts[t].0 >= pts[i].0 && pts[t].0 <= pts[j].0
                    } else {
                        pts[t].0 >= pts[i].0 || pts[t].0 <= pts[j].0
                    };
                    if inside {
                        closed += pts[t].1;
                    }
                }
                let excess = closed as f64 / k - len / TAU;
                if excess > best {
                    best = excess;
                }
                if off >= 1 {
                    let open = closed - pts[i].1 - pts[j].1;
                    let deficit = len / TAU - open as f64 / k;
                    if deficit > best {
                        best = deficit;
                    }
                }
            }
        }
        best
    }

    #[test]
    fn scan_matches_brute_force_exactly() {
        let cases: Vec<CircleEnsemble> = vec![
            CircleEnsemble::from_args([0.3, 1.7, 2.9, 4.4, 6.1]),
            CircleEnsemble::from_weighted_args([(0.2, 3), (2.0, 1), (2.1, 7), (5.9, 2)]),
            CircleEnsemble::from_args((0..37).map(|i| (i as f64 * 2.399963).rem_euclid(TAU))),
        ];
        for e in &cases {
            let d = discrepancy(e).discrepancy;
            assert_eq!(d, brute_force_discrepancy(e));
            assert!((0.0..=1.0).contains(&d));
        }
    }

    #[test]
    fn witness_arc_attains_the_reported_value() {
        let e = CircleEnsemble::from_weighted_args([(0.2, 3), (2.0, 1), (2.1, 7), (5.9, 2)]);
        let rep = discrepancy(&e);
        let (a, b) = rep.witness;
        let len = if a == b && !rep.witness_is_deficit {
            0.0
        } else {
            (b - a).rem_euclid(TAU)
        };
        let closed = if a <= b {
            counting(&e, a, b)
        } else {
            counting(&e, a, TAU) + counting(&e, 0.0, b)
        };
        let k = e.total_weight() as f64;
        let value = if rep.witness_is_deficit {
            let wa = counting(&e, a, a);
            let wb = counting(&e, b, b);
            len / TAU - (closed - wa - wb) as f64 / k
        } else {
            closed as f64 / k - len / TAU
        };
        assert_abs_diff_eq!(value, rep.discrepancy, epsilon = 1e-15);
    }

    #[test]
    fn erdos_turan_dominates_on_examples() {
        let atom = CircleEnsemble::from_weighted_args([(2.5, 4)]);
        assert!(erdos_turan_bound(&atom, 10) >= 1.0);

        let equal = CircleEnsemble::from_args((0..16).map(|i| TAU * i as f64 / 16.0));
        let d = discrepancy(&equal).discrepancy;
        let b = erdos_turan_bound(&equal, 4);
        assert!(b >= d);
        assert_abs_diff_eq!(b, 6.0 / 5.0, epsilon = 1e-12);
    }

    #[test]
    fn exp_sum_quadratic_phase() {
        let rho = 0.013;
        let check = exp_sum_bound_check(
            |x| 0.5 * rho * x * x,
            |x| rho * x,
            0,
            150,
            rho,
        );
        assert!(check.pass, "sum {} exceeds bound {}", check.sum_abs, check.bound);
        assert!(check.sum_abs < 151.0);
    }

    #[test]
    fn superposition_bound_holds() {
        let a = CircleEnsemble::from_args((0..8).map(|i| TAU * i as f64 / 8.0));
        let b = CircleEnsemble::from_args((0..5).map(|i| (TAU * i as f64 / 5.0 + 0.3) % TAU));
        let rep = superpose(&[a, b]);
        assert!(rep.discrepancy <= rep.bound + 1e-15);
        assert_eq!(rep.ensemble.total_weight(), 13);
    }

    proptest! {
        #[test]
        fn fast_sweep_agrees_with_scan(
            raw in prop::collection::vec((0.0..TAU, 1u64..6), 1..48)
        ) {
            let e = CircleEnsemble::from_weighted_args(raw);
            let slow = discrepancy(&e).discrepancy;
            let fast = discrepancy_fast(&e);
            prop_assert!((slow - fast).abs() < 1e-12, "{slow} vs {fast}");
            prop_assert!((0.0..=1.0 + 1e-15).contains(&slow));
        }

        #[test]
        fn rotation_leaves_discrepancy_unchanged(
            raw in prop::collection::vec(0.0..TAU, 2..40),
            theta in 0.0..TAU
        ) {
            let e = CircleEnsemble::from_args(raw.iter().copied());
            let rot = CircleEnsemble::from_args(raw.iter().map(|x| (x + theta).rem_euclid(TAU)));
            let d0 = discrepancy(&e).discrepancy;
            let d1 = discrepancy(&rot).discrepancy;
            prop_assert!((d0 - d1).abs() < 1e-9, "{d0} vs {d1}");
        }
    }
}
