//! Adaptive Dormand–Prince 5(4) integration with dense output.
//!
//! The embedded pair controls the local error against mixed
//! absolute/relative tolerances; accepted steps carry a fourth-order
//! continuous extension used for event location by bisection. The observer
//! callback can stop inside a step, or replace the state between steps
//! (renormalizing a linear system while tracking only a ray, for instance).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("exceeded {max} steps at t = {t}")]
    MaxSteps { t: f64, max: usize },
    #[error("non-finite derivative or state at t = {t}")]
    NonFinite { t: f64 },
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
// Error = b - bhat.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense-output weights.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Continuous extension over one accepted step.
#[derive(Debug, Clone)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    cont3: [f64; N],
    cont4: [f64; N],
    cont5: [f64; N],
}

impl<const N: usize> DenseStep<N> {
    /// Interpolated state at `t` in `[t0, t1]`.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let h = self.t1 - self.t0;
        let theta = ((t - self.t0) / h).clamp(0.0, 1.0);
        let s1 = 1.0 - theta;
        let mut out = [0.0; N];
        for i in 0..N {
            let ydiff = self.y1[i] - self.y0[i];
            out[i] = self.y0[i]
                + theta
                    * (ydiff + s1 * (self.cont3[i] + theta * (self.cont4[i] + s1 * self.cont5[i])));
        }
        out
    }

    /// Locates a sign change of `g` inside the step by bisection on the dense
    /// output. Returns `None` when `g` has the same sign at both ends.
    pub fn find_root(&self, mut g: impl FnMut(f64, &[f64; N]) -> f64) -> Option<f64> {
        let mut ga = g(self.t0, &self.y0);
        let gb = g(self.t1, &self.y1);
        if ga == 0.0 {
            return Some(self.t0);
        }
        if gb == 0.0 {
            return Some(self.t1);
        }
        if ga.signum() == gb.signum() {
            return None;
        }
        let (mut a, mut b) = (self.t0, self.t1);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let gm = g(mid, &self.eval(mid));
            if gm == 0.0 {
                return Some(mid);
            }
            if gm.signum() == ga.signum() {
                a = mid;
                ga = gm;
            } else {
                b = mid;
            }
        }
        Some(0.5 * (a + b))
    }
}

/// Observer decision after each accepted step.
pub enum Control<const N: usize> {
    Continue,
    /// Replace the state before the next step; the derivative is re-evaluated.
    Replace([f64; N]),
    /// Stop at the given time inside the step just taken.
    StopAt(f64),
    Stop,
}

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub h_max: f64,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Dopri5 { rtol: 1e-10, atol: 1e-12, max_steps: 5_000_000, h_max: f64::INFINITY }
    }
}

impl Dopri5 {
    /// Integrates `y' = f(t, y)` from `t0` to `t_end` (forward only), calling
    /// `observer` with the dense extension of every accepted step. Returns
    /// the final `(t, y)`.
    pub fn integrate<const N: usize>(
        &self,
        f: impl Fn(f64, &[f64; N]) -> [f64; N],
        t0: f64,
        y0: [f64; N],
        t_end: f64,
        mut observer: impl FnMut(&DenseStep<N>) -> Control<N>,
    ) -> Result<(f64, [f64; N]), OdeError> {
        assert!(t_end > t0, "forward integration only");
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y);
        if !k1.iter().all(|v| v.is_finite()) {
            return Err(OdeError::NonFinite { t });
        }
        let mut h = self.initial_step(&f, t, &y, &k1, t_end);
        let mut steps = 0usize;
        while t < t_end {
            steps += 1;
            if steps > self.max_steps {
                return Err(OdeError::MaxSteps { t, max: self.max_steps });
            }
            h = h.min(t_end - t).min(self.h_max);
            if h <= t.abs().max(1.0) * 1e-15 {
                return Err(OdeError::StepUnderflow { t });
            }
            let (y1, k7, err_vec, k3, k4, k5, k6) = step_core(&f, t, &y, &k1, h);
            let mut err: f64 = 0.0;
            let mut finite = true;
            for i in 0..N {
                finite &= y1[i].is_finite();
                let sc = self.atol + self.rtol * y[i].abs().max(y1[i].abs());
                let r = err_vec[i] / sc;
                err += r * r;
            }
            let err = (err / N as f64).sqrt();
            if !finite || !err.is_finite() {
                h *= 0.25;
                continue;
            }
            if err <= 1.0 {
                // Accepted: build the dense extension and consult the observer.
                let mut cont3 = [0.0; N];
                let mut cont4 = [0.0; N];
                let mut cont5 = [0.0; N];
                for i in 0..N {
                    let ydiff = y1[i] - y[i];
                    let bspl = h * k1[i] - ydiff;
                    cont3[i] = bspl;
                    cont4[i] = ydiff - h * k7[i] - bspl;
                    cont5[i] = h
                        * (D1 * k1[i]
                            + D3 * k3[i]
                            + D4 * k4[i]
                            + D5 * k5[i]
                            + D6 * k6[i]
                            + D7 * k7[i]);
                }
                let dense = DenseStep { t0: t, t1: t + h, y0: y, y1, cont3, cont4, cont5 };
                t += h;
                y = y1;
                k1 = k7; // FSAL
                match observer(&dense) {
                    Control::Continue => {}
                    Control::Replace(ynew) => {
                        y = ynew;
                        k1 = f(t, &y);
                    }
                    Control::StopAt(ts) => {
                        let ys = dense.eval(ts);
                        return Ok((ts, ys));
                    }
                    Control::Stop => return Ok((t, y)),
                }
                let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
                h *= fac;
            } else {
                h *= (0.9 * err.powf(-0.2)).max(0.1);
            }
        }
        Ok((t, y))
    }

    fn initial_step<const N: usize>(
        &self,
        f: &impl Fn(f64, &[f64; N]) -> [f64; N],
        t: f64,
        y: &[f64; N],
        k1: &[f64; N],
        t_end: f64,
    ) -> f64 {
        let mut d0: f64 = 0.0;
        let mut d1: f64 = 0.0;
        for i in 0..N {
            let sc = self.atol + self.rtol * y[i].abs();
            d0 += (y[i] / sc) * (y[i] / sc);
            d1 += (k1[i] / sc) * (k1[i] / sc);
        }
        let h0 = if d1 > 1e-20 { 0.01 * (d0 / d1).sqrt().max(1e-10) } else { 1e-6 };
        // Euler probe to bound the second derivative.
        let mut y_probe = *y;
        for i in 0..N {
            y_probe[i] += h0 * k1[i];
        }
        let k2 = f(t + h0, &y_probe);
        let mut d2: f64 = 0.0;
        for i in 0..N {
            let sc = self.atol + self.rtol * y[i].abs();
            let dd = (k2[i] - k1[i]) / sc;
            d2 += dd * dd;
        }
        let d2 = d2.sqrt() / h0;
        let h1 = if d1.sqrt().max(d2) > 1e-15 {
            (0.01 / d1.sqrt().max(d2)).powf(0.2)
        } else {
            (h0 * 1e3).max(1e-6)
        };
        (100.0 * h0).min(h1).min(t_end - t).min(self.h_max)
    }
}

#[allow(clippy::type_complexity)]
fn step_core<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
) -> ([f64; N], [f64; N], [f64; N], [f64; N], [f64; N], [f64; N], [f64; N]) {
    let mut yt = [0.0; N];
    for i in 0..N {
        yt[i] = y[i] + h * A21 * k1[i];
    }
    let k2 = f(t + C2 * h, &yt);
    for i in 0..N {
        yt[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
    }
    let k3 = f(t + C3 * h, &yt);
    for i in 0..N {
        yt[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
    }
    let k4 = f(t + C4 * h, &yt);
    for i in 0..N {
        yt[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
    }
    let k5 = f(t + C5 * h, &yt);
    for i in 0..N {
        yt[i] =
            y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
    }
    let k6 = f(t + h, &yt);
    let mut y1 = [0.0; N];
    for i in 0..N {
        y1[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
    }
    let k7 = f(t + h, &y1);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h
            * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (y1, k7, err, k3, k4, k5, k6)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn harmonic_oscillator_stays_accurate() {
        let solver = Dopri5::default();
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let t_end = 20.0 * std::f64::consts::PI;
        let (_, y) = solver.integrate(f, 0.0, [1.0, 0.0], t_end, |_| Control::Continue).unwrap();
        assert_relative_eq!(y[0], 1.0, epsilon = 2e-8);
        assert_relative_eq!(y[1], 0.0, epsilon = 2e-8);
    }

    #[test]
    fn dense_output_matches_solution_mid_step() {
        let solver = Dopri5 { rtol: 1e-9, atol: 1e-11, ..Default::default() };
        let f = |t: f64, y: &[f64; 1]| [t * y[0]]; // y = exp(t^2/2)
        let mut worst: f64 = 0.0;
        solver
            .integrate(f, 0.0, [1.0], 2.0, |step| {
                for j in 1..5 {
                    let tq = step.t0 + (step.t1 - step.t0) * j as f64 / 5.0;
                    let yq = step.eval(tq)[0];
                    worst = worst.max((yq - (tq * tq / 2.0).exp()).abs() / (tq * tq / 2.0).exp());
                }
                Control::Continue
            })
            .unwrap();
        assert!(worst < 1e-8, "dense output rel error {worst:e}");
    }

    #[test]
    fn event_location_finds_zero_crossing() {
        let solver = Dopri5::default();
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        // y0 = cos t crosses zero at pi/2.
        let (t, y) = solver
            .integrate(f, 0.0, [1.0, 0.0], 10.0, |step| {
                match step.find_root(|_, s| s[0]) {
                    Some(ts) => Control::StopAt(ts),
                    None => Control::Continue,
                }
            })
            .unwrap();
        assert_relative_eq!(t, std::f64::consts::FRAC_PI_2, epsilon = 1e-9);
        assert!(y[0].abs() < 1e-9);
    }

    #[test]
    fn replace_control_renormalizes_linear_growth() {
        let solver = Dopri5::default();
        let f = |_t: f64, y: &[f64; 2]| [50.0 * y[0], 50.0 * y[1]];
        // Track the ray through (1, 2) under uniform exponential growth.
        let (_, y) = solver
            .integrate(f, 0.0, [1.0, 2.0], 20.0, |step| {
                let m = step.y1[0].abs().max(step.y1[1].abs());
                if m > 1e50 {
                    Control::Replace([step.y1[0] / m, step.y1[1] / m])
                } else {
                    Control::Continue
                }
            })
            .unwrap();
        assert_relative_eq!(y[1] / y[0], 2.0, epsilon = 1e-8);
    }

    #[test]
    fn blow_up_reports_an_error() {
        let solver = Dopri5 { max_steps: 200_000, ..Default::default() };
        let f = |_t: f64, y: &[f64; 1]| [y[0] * y[0]];
        // Solution 1/(1 - t) blows up at t = 1.
        let res = solver.integrate(f, 0.0, [1.0], 2.0, |_| Control::Continue);
        assert!(res.is_err());
    }
}
