//! Gamma-function combinations needed by the small-argument Bessel series.
//!
//! For |mu| <= 1/2 the series method needs
//!   gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu)
//!   gam2 = (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2
//! with gam1 continuous through mu = 0 where it equals -EULER_GAMMA.
//! Both come from ln Gamma(1+mu) = -EULER_GAMMA*mu + sum_{k>=2} (-1)^k zeta(k) mu^k / k,
//! split into even and odd parts so the mu -> 0 limit is exact. The zeta
//! values are generated once by Euler-Maclaurin summation.

use std::sync::OnceLock;

pub const EULER_GAMMA: f64 = 0.5772156649015328606;

// Series truncation: terms scale like mu^k/k with |mu| <= 1/2, so index 64
// puts the tail below 1e-19.
const ZETA_MAX: usize = 64;

fn zetas() -> &'static Vec<f64> {
    static ZETAS: OnceLock<Vec<f64>> = OnceLock::new();
    ZETAS.get_or_init(|| (0..=ZETA_MAX).map(|k| if k < 2 { 0.0 } else { zeta(k as f64) }).collect())
}

/// Bernoulli numbers B_0..B_n from the defining recurrence.
fn bernoulli(n: usize) -> Vec<f64> {
    let mut b = vec![0.0; n + 1];
    b[0] = 1.0;
    for m in 1..=n {
        let mut acc = 0.0;
        let mut binom = 1.0; // C(m+1, j)
        for (j, bj) in b.iter().enumerate().take(m) {
            acc += binom * bj;
            binom *= (m + 1 - j) as f64 / (j + 1) as f64;
        }
        b[m] = -acc / (m as f64 + 1.0);
    }
    b
}

/// Riemann zeta for real s >= 2 by Euler-Maclaurin summation.
fn zeta(s: f64) -> f64 {
    let n = 16.0_f64;
    let mut sum = 0.0;
    for k in 1..16 {
        sum += (k as f64).powf(-s);
    }
    sum += n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    let bern = bernoulli(18);
    let mut poch = s;
    let mut npow = n.powf(-s - 1.0);
    let mut fact = 2.0;
    for j in 1..=9usize {
        sum += bern[2 * j] / fact * poch * npow;
        poch *= (s + (2 * j - 1) as f64) * (s + 2.0 * j as f64);
        npow /= n * n;
        fact *= ((2 * j + 1) * (2 * j + 2)) as f64;
    }
    sum
}

/// Returns (gam1, gam2, 1/Gamma(1+mu), 1/Gamma(1-mu)) for |mu| <= 1/2.
pub fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    debug_assert!(mu.abs() <= 0.5 + 1e-12);
    let z = zetas();
    let mu2 = mu * mu;
    // -ln Gamma(1+mu) = a(mu) + b(mu), a even and b odd in mu.
    let mut a = 0.0;
    let mut b_over_mu = EULER_GAMMA;
    let mut mepow = mu2;
    for j in 1..=((ZETA_MAX - 1) / 2) {
        let even_k = 2 * j;
        let odd_k = 2 * j + 1;
        let da = -z[even_k] * mepow / even_k as f64;
        let db = z[odd_k] * mepow / odd_k as f64;
        a += da;
        b_over_mu += db;
        mepow *= mu2;
        if da.abs() + db.abs() < 1e-19 {
            break;
        }
    }
    let b = b_over_mu * mu;
    let ea = a.exp();
    let gampl = ea * b.exp(); // 1/Gamma(1+mu)
    let gammi = ea * (-b).exp(); // 1/Gamma(1-mu)
    let sinhc = if b.abs() < 1e-5 {
        1.0 + b * b / 6.0 * (1.0 + b * b / 20.0)
    } else {
        b.sinh() / b
    };
    let gam1 = -ea * sinhc * b_over_mu;
    let gam2 = ea * b.cosh();
    (gam1, gam2, gampl, gammi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zeta_matches_classical_values() {
        let pi = std::f64::consts::PI;
        assert_relative_eq!(zeta(2.0), pi * pi / 6.0, max_relative = 1e-14);
        assert_relative_eq!(zeta(4.0), pi.powi(4) / 90.0, max_relative = 1e-14);
        assert_relative_eq!(zeta(6.0), pi.powi(6) / 945.0, max_relative = 1e-14);
        // Apery's constant, frozen from its decimal expansion.
        assert_relative_eq!(zeta(3.0), 1.2020569031595943, max_relative = 1e-14);
    }

    #[test]
    fn gam1_limit_is_minus_euler_gamma() {
        let (gam1, gam2, gampl, gammi) = temme_gammas(0.0);
        assert_relative_eq!(gam1, -EULER_GAMMA, max_relative = 1e-15);
        assert_relative_eq!(gam2, 1.0, max_relative = 1e-15);
        assert_relative_eq!(gampl, 1.0, max_relative = 1e-15);
        assert_relative_eq!(gammi, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn gammas_match_direct_gamma_evaluation() {
        for &mu in &[0.5, 0.3, 0.1, 1e-3, -1e-3, -0.25, -0.5] {
            let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
            let gp = 1.0 / statrs::function::gamma::gamma(1.0 + mu);
            let gm = 1.0 / statrs::function::gamma::gamma(1.0 - mu);
            assert_relative_eq!(gampl, gp, max_relative = 1e-13);
            assert_relative_eq!(gammi, gm, max_relative = 1e-13);
            assert_relative_eq!(gam1, (gm - gp) / (2.0 * mu), max_relative = 1e-11);
            assert_relative_eq!(gam2, (gm + gp) / 2.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn half_integer_gamma_closed_forms() {
        // Gamma(3/2) = sqrt(pi)/2, Gamma(1/2) = sqrt(pi).
        let (_, _, gampl, gammi) = temme_gammas(0.5);
        let spi = std::f64::consts::PI.sqrt();
        assert_relative_eq!(gampl, 2.0 / spi, max_relative = 1e-14);
        assert_relative_eq!(gammi, 1.0 / spi, max_relative = 1e-14);
    }
}
