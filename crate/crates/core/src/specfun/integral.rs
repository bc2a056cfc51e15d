//! Bessel J, Y and derivatives from their integral representations.
//!
//! J_nu(x) = (1/pi) int_0^pi cos(x sin t - nu t) dt
//!           - sin(nu pi)/pi int_0^inf exp(-x sinh s - nu s) ds
//! Y_nu(x) = (1/pi) int_0^pi sin(x sin t - nu t) dt
//!           - (1/pi) int_0^inf (e^{nu s} + e^{-nu s} cos(nu pi)) e^{-x sinh s} ds
//!
//! Derivatives in x follow by differentiating under the integral sign.
//! The method shares no code with the recurrence evaluator, which makes the
//! two usable as mutual checks.

use std::sync::OnceLock;

use super::steed::BesselJY;
use super::SpecFunError;
use crate::quad;

const PANEL_ORDER: usize = 32;
// Integrands are dropped once their exponent falls below -740.
const EXP_CUTOFF: f64 = 740.0;

fn gl_nodes() -> &'static (Vec<f64>, Vec<f64>) {
    static NODES: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    NODES.get_or_init(|| quad::gauss_legendre(PANEL_ORDER))
}

pub fn bessel_jy_integral(nu: f64, x: f64) -> Result<BesselJY, SpecFunError> {
    if !(nu >= 0.0) || !(x > 0.0) || !nu.is_finite() || !x.is_finite() {
        return Err(SpecFunError::Domain { nu, x });
    }
    let pi = std::f64::consts::PI;

    // Oscillatory piece: fixed-order panels sized so each spans at most
    // about one period of the phase x sin t - nu t.
    let panels = (((x + nu) / 2.0).ceil() as usize).max(4);
    let (nodes, weights) = gl_nodes();
    let (mut jo, mut yo, mut jpo, mut ypo) = (0.0, 0.0, 0.0, 0.0);
    for p in 0..panels {
        let a = pi * p as f64 / panels as f64;
        let b = pi * (p + 1) as f64 / panels as f64;
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (t, w) in nodes.iter().zip(weights.iter()) {
            let theta = mid + half * t;
            let (sp, cp) = (x * theta.sin() - nu * theta).sin_cos();
            let st = theta.sin();
            let wh = w * half;
            jo += wh * cp;
            yo += wh * sp;
            jpo -= wh * st * sp;
            ypo += wh * st * cp;
        }
    }
    let mut j = jo / pi;
    let mut jp = jpo / pi;
    let mut y = yo / pi;
    let mut yp = ypo / pi;

    let quad_err = |_| SpecFunError::Convergence { nu, x, stage: "tail quadrature" };

    // Decaying tail of J, absent at integer order.
    let sin_nupi = (nu * pi).sin();
    if sin_nupi != 0.0 {
        let t_max = (EXP_CUTOFF / x).asinh();
        let (ij, _) = quad::integrate(&mut |t: f64| (-x * t.sinh() - nu * t).exp(), 0.0, t_max, 1e-14)
            .map_err(quad_err)?;
        let (ijp, _) = quad::integrate(
            &mut |t: f64| t.sinh() * (-x * t.sinh() - nu * t).exp(),
            0.0,
            t_max,
            1e-14,
        )
        .map_err(quad_err)?;
        j -= sin_nupi / pi * ij;
        jp += sin_nupi / pi * ijp;
    }

    // Tail of Y. The integrand can peak far above 1 when nu > x, so it is
    // evaluated relative to its maximum exponent.
    let cos_nupi = (nu * pi).cos();
    let shift = if nu > x {
        let ts = (nu / x).acosh();
        nu * ts - x * ts.sinh()
    } else {
        0.0
    };
    if shift > 700.0 {
        return Err(SpecFunError::Overflow { nu, x });
    }
    let mut t_max = (EXP_CUTOFF / x).asinh();
    for _ in 0..200 {
        t_max = ((EXP_CUTOFF + shift + nu * t_max) / x).asinh();
    }
    let g = |t: f64| {
        let e = -x * t.sinh() - shift;
        (nu * t + e).exp() + cos_nupi * (e - nu * t).exp()
    };
    let (iy, _) = quad::integrate(&mut |t| g(t), 0.0, t_max, 1e-13).map_err(quad_err)?;
    let (iyp, _) =
        quad::integrate(&mut |t: f64| t.sinh() * g(t), 0.0, t_max, 1e-13).map_err(quad_err)?;
    let grow = shift.exp();
    y -= iy * grow / pi;
    yp += iyp * grow / pi;

    let out = BesselJY { j, jp, y, yp };
    if out.j.is_finite() && out.jp.is_finite() && out.y.is_finite() && out.yp.is_finite() {
        Ok(out)
    } else {
        Err(SpecFunError::Overflow { nu, x })
    }
}
