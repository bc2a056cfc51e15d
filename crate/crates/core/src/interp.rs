//! Cubic spline interpolation with not-a-knot end conditions.
//!
//! Not-a-knot keeps full fourth-order accuracy up to the boundary, which the
//! profile tables rely on; natural end conditions would degrade them to
//! second order near the ends.

#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl CubicSpline {
    /// Builds the interpolating spline. Knots must be strictly increasing and
    /// at least two.
    ///
    /// # Panics
    /// Panics on length mismatch, fewer than two knots, or non-increasing knots.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert_eq!(x.len(), y.len(), "knot/value length mismatch");
        let n = x.len();
        assert!(n >= 2, "need at least two knots");
        assert!(
            x.windows(2).all(|w| w[0] < w[1]),
            "knots must be strictly increasing"
        );
        let m = match n {
            2 => vec![0.0; 2],
            3 => {
                // Single quadratic through three points: constant curvature.
                let d01 = (y[1] - y[0]) / (x[1] - x[0]);
                let d12 = (y[2] - y[1]) / (x[2] - x[1]);
                let c = 2.0 * (d12 - d01) / (x[2] - x[0]);
                vec![c; 3]
            }
            _ => Self::solve_not_a_knot(&x, &y),
        };
        CubicSpline { x, y, m }
    }

    fn solve_not_a_knot(x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let rhs = |i: usize| (y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1];

        // Unknowns M_1 .. M_{n-2}; M_0 and M_{n-1} are recovered from the
        // not-a-knot conditions
        //     h_1 M_0 = (h_0 + h_1) M_1 - h_0 M_2
        //     h_{n-3} M_{n-1} = (h_{n-3} + h_{n-2}) M_{n-2} - h_{n-2} M_{n-3}
        let dim = n - 2;
        let mut sub = vec![0.0; dim];
        let mut diag = vec![0.0; dim];
        let mut sup = vec![0.0; dim];
        let mut b = vec![0.0; dim];
        for k in 0..dim {
            let i = k + 1; // interior knot index
            sub[k] = h[i - 1] / 6.0;
            diag[k] = (h[i - 1] + h[i]) / 3.0;
            sup[k] = h[i] / 6.0;
            b[k] = rhs(i);
        }
        // Fold the boundary recoveries into the first and last equations.
        diag[0] += (h[0] / 6.0) * (h[0] + h[1]) / h[1];
        sup[0] -= (h[0] / 6.0) * h[0] / h[1];
        diag[dim - 1] += (h[n - 2] / 6.0) * (h[n - 3] + h[n - 2]) / h[n - 3];
        sub[dim - 1] -= (h[n - 2] / 6.0) * h[n - 2] / h[n - 3];

        // Thomas algorithm.
        for k in 1..dim {
            let w = sub[k] / diag[k - 1];
            diag[k] -= w * sup[k - 1];
            b[k] -= w * b[k - 1];
        }
        let mut mi = vec![0.0; dim];
        mi[dim - 1] = b[dim - 1] / diag[dim - 1];
        for k in (0..dim - 1).rev() {
            mi[k] = (b[k] - sup[k] * mi[k + 1]) / diag[k];
        }

        let mut m = vec![0.0; n];
        m[1..n - 1].copy_from_slice(&mi);
        m[0] = ((h[0] + h[1]) * m[1] - h[0] * m[2]) / h[1];
        m[n - 1] = ((h[n - 3] + h[n - 2]) * m[n - 2] - h[n - 2] * m[n - 3]) / h[n - 3];
        m
    }

    fn segment(&self, xq: f64) -> usize {
        let n = self.x.len();
        let i = self.x.partition_point(|&xi| xi <= xq);
        i.clamp(1, n - 1) - 1
    }

    /// Spline value at `xq`. Outside the knot range the first or last cubic
    /// piece is extended.
    pub fn eval(&self, xq: f64) -> f64 {
        let i = self.segment(xq);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - xq) / h;
        let b = (xq - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    /// First derivative at `xq`.
    pub fn deriv(&self, xq: f64) -> f64 {
        let i = self.segment(xq);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - xq) / h;
        let b = (xq - self.x[i]) / h;
        (self.y[i + 1] - self.y[i]) / h
            + ((3.0 * b * b - 1.0) * self.m[i + 1] - (3.0 * a * a - 1.0) * self.m[i]) * h / 6.0
    }

    /// Second derivative at `xq` (piecewise linear across segments).
    pub fn deriv2(&self, xq: f64) -> f64 {
        let i = self.segment(xq);
        let h = self.x[i + 1] - self.x[i];
        ((self.x[i + 1] - xq) * self.m[i] + (xq - self.x[i]) * self.m[i + 1]) / h
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reproduces_a_cubic_exactly() {
        let f = |x: f64| 2.0 * x * x * x - x * x + 3.0 * x - 5.0;
        let x: Vec<f64> = (0..9).map(|i| -1.0 + 0.5 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| f(v)).collect();
        let s = CubicSpline::new(x, y);
        for i in 0..200 {
            let q = -1.0 + 4.0 * i as f64 / 199.0;
            assert_relative_eq!(s.eval(q), f(q), epsilon = 1e-11, max_relative = 1e-11);
            assert_relative_eq!(s.deriv(q), 6.0 * q * q - 2.0 * q + 3.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn fourth_order_convergence_on_sin() {
        let err_for = |n: usize| {
            let x: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64 * 3.0).collect();
            let y: Vec<f64> = x.iter().map(|&v| v.sin()).collect();
            let s = CubicSpline::new(x, y);
            (0..1000)
                .map(|i| {
                    let q = 3.0 * i as f64 / 999.0;
                    (s.eval(q) - q.sin()).abs()
                })
                .fold(0.0_f64, f64::max)
        };
        let e1 = err_for(33);
        let e2 = err_for(65);
        // Halving the spacing should shrink the error by about 2^4.
        let rate = (e1 / e2).log2();
        assert!(rate > 3.5 && rate < 4.5, "observed rate {rate}");
    }

    #[test]
    fn three_point_case_is_the_quadratic() {
        let s = CubicSpline::new(vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 4.0]);
        // Quadratic through (0,1), (1,0), (3,4): y = x^2 - 2x + 1.
        for q in [0.2, 0.9, 1.7, 2.9] {
            assert_relative_eq!(s.eval(q), q * q - 2.0 * q + 1.0, epsilon = 1e-12);
            assert_relative_eq!(s.deriv2(q), 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    #[should_panic(expected = "strictly increasing")]
    fn rejects_unsorted_knots() {
        CubicSpline::new(vec![0.0, 2.0, 1.0], vec![0.0, 0.0, 0.0]);
    }
}
