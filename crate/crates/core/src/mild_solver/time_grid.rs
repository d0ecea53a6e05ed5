use crate::error::{Error, Result};
use serde::Serialize;

/// Uniform nodes `t_m = m h`, `m = 0..=steps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimeGrid {
    h: f64,
    steps: usize,
}

impl TimeGrid {
    /// The horizon is rounded to a whole number of steps.
    pub fn new(h: f64, t_end: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Config(format!("time step must be positive, got {h}")));
        }
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::Config(format!("horizon must be positive, got {t_end}")));
        }
        let steps = (t_end / h).round().max(1.0) as usize;
        Ok(Self { h, steps })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t(&self, m: usize) -> f64 {
        m as f64 * self.h
    }

    pub fn end(&self) -> f64 {
        self.t(self.steps)
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|m| self.t(m)).collect()
    }

    /// First node at or after `t`.
    pub fn index_at(&self, t: f64) -> usize {
        ((t / self.h - 1e-9).ceil().max(0.0) as usize).min(self.steps)
    }
}

/// Per-mode coefficients of the exponential trapezoidal step
/// `U_{m+1} = E U_m + w0 c_m + w1 c_{m+1}` for `U' = -rate U + c(t)`,
/// exact when `c` is linear on the step.
#[derive(Clone, Debug)]
pub(crate) struct ExpWeights {
    pub e: Vec<f64>,
    pub w0: Vec<f64>,
    pub w1: Vec<f64>,
}

/// `(phi1(z), psi(z))` with `phi1 = (1 - e^-z)/z` and `psi = (1 - e^-z - z e^-z)/z^2`.
fn phi_pair(z: f64) -> (f64, f64) {
    if z < 0.5 {
        // Alternating series; 20 terms reach roundoff for z < 1/2.
        let (mut phi1, mut psi) = (0.0, 0.0);
        let mut fact = 1.0; // (j+1)!
        let mut pow = 1.0; // (-z)^j
        for j in 0..20 {
            let jf = j as f64;
            phi1 += pow / fact;
            psi += pow * (jf + 1.0) / (fact * (jf + 2.0));
            fact *= jf + 2.0;
            pow *= -z;
        }
        (phi1, psi)
    } else {
        let e = (-z).exp();
        ((1.0 - e) / z, (1.0 - e - z * e) / (z * z))
    }
}

impl ExpWeights {
    pub fn new(rates: impl Iterator<Item = f64>, h: f64) -> Self {
        let (mut e, mut w0, mut w1) = (Vec::new(), Vec::new(), Vec::new());
        for rate in rates {
            let z = rate * h;
            let (phi1, psi) = phi_pair(z);
            e.push((-z).exp());
            w0.push(h * psi);
            w1.push(h * (phi1 - psi));
        }
        Self { e, w0, w1 }
    }
}

/// Weights for the `u` feed of `V' = -(lambda + 1) V + u(t)`.
///
/// On each step `u` is modelled as `U_m + D (1 - e^{-lambda s}) / lambda`, which
/// is exact when `u` is a constant plus free heat decay in the mode and reduces
/// to linear interpolation as `lambda -> 0`. Then
/// `V_{m+1} = E V_m + a0 U_m + a1 U_{m+1}` plus the forcing weights.
#[derive(Clone, Debug)]
pub(crate) struct FeedWeights {
    pub a0: Vec<f64>,
    pub a1: Vec<f64>,
}

impl FeedWeights {
    pub fn new(lambdas: impl Iterator<Item = f64>, h: f64) -> Self {
        let (mut a0, mut a1) = (Vec::new(), Vec::new());
        let decay_one = -(-h).exp_m1();
        for l in lambdas {
            let mu = l + 1.0;
            let full = h * phi_pair(mu * h).0;
            let shape = h * phi_pair(l * h).0;
            // int_0^h e^{-mu (h - s)} shape(s) ds
            let integral = (shape - (-l * h).exp() * decay_one) / mu;
            let r = integral / shape;
            a0.push(full - r);
            a1.push(r);
        }
        Self { a0, a1 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rounds_horizon() {
        let g = TimeGrid::new(0.01, 40.0).unwrap();
        assert_eq!(g.len(), 4001);
        assert!((g.end() - 40.0).abs() < 1e-12);
        assert_eq!(g.index_at(5.0), 500);
        assert!(TimeGrid::new(0.0, 1.0).is_err());
        assert!(TimeGrid::new(0.1, -1.0).is_err());
    }

    #[test]
    fn weights_are_continuous_across_the_series_switch() {
        let below = ExpWeights::new([0.5 - 1e-12].into_iter(), 1.0);
        let above = ExpWeights::new([0.5 + 1e-12].into_iter(), 1.0);
        assert!((below.w0[0] - above.w0[0]).abs() < 1e-12);
        assert!((below.w1[0] - above.w1[0]).abs() < 1e-12);
        let zero = ExpWeights::new([0.0].into_iter(), 0.2);
        assert!((zero.w0[0] - 0.1).abs() < 1e-16 && (zero.w1[0] - 0.1).abs() < 1e-16);
    }

    #[test]
    fn step_is_exact_for_linear_sources() {
        // U' = -2U + (1 + 3t), U(0) = 0.4, one step of size 0.3.
        let (rate, h, u0) = (2.0f64, 0.3f64, 0.4f64);
        let w = ExpWeights::new([rate].into_iter(), h);
        let got = w.e[0] * u0 + w.w0[0] * 1.0 + w.w1[0] * (1.0 + 3.0 * h);
        // Particular solution a + b t with b = 3/2, a = (1 - b)/2.
        let (b, a) = (1.5, -0.25);
        let exact = (u0 - a) * (-rate * h).exp() + a + b * h;
        assert!((got - exact).abs() < 1e-15);
    }

    #[test]
    fn feed_is_exact_for_free_decay() {
        // u = e^{-l t}, v' = -(l + 1) v + u, v(0) = 0 gives v = e^{-l t} (1 - e^{-t}).
        for (l, h) in [(0.0f64, 0.1f64), (3.0, 0.01), (400.0, 0.01)] {
            let f = FeedWeights::new([l].into_iter(), h);
            let e = (-(l + 1.0) * h).exp();
            let mut v = 0.0;
            for m in 0..50 {
                let (u0, u1) = ((-l * h * m as f64).exp(), (-l * h * (m + 1) as f64).exp());
                v = e * v + f.a0[0] * u0 + f.a1[0] * u1;
            }
            let t = 50.0 * h;
            let exact = (-l * t).exp() * (1.0 - (-t).exp());
            assert!((v - exact).abs() < 1e-14, "lambda {l}: {v} vs {exact}");
        }
        // Linear interpolation at lambda = 0 matches the trapezoid weights with rate 1.
        let (f, w) = (FeedWeights::new([0.0].into_iter(), 0.2), ExpWeights::new([1.0].into_iter(), 0.2));
        assert!((f.a0[0] - w.w0[0]).abs() < 1e-15 && (f.a1[0] - w.w1[0]).abs() < 1e-15);
    }
}
