//! The two kernel integrals that close the exponential-stability argument,
//! evaluated numerically next to their closed-form upper bounds.
//!
//! With `c = lambda1 - sigma` and `alpha = 1/2 + n/(2p)`:
//!
//! * `I1(t) = int_0^t (1 + s^-alpha) e^{-c s} ds`
//! * `I2(t) = int_0^t int_0^s (1 + (s-z)^-alpha) e^{-c(t-z)} e^{-(t-s)} dz ds`
//!
//! and the bounds are `B1 = 1/c + c^{alpha-1} Gamma(1-alpha)`, `B2 = B1/(c+1)`.

use crate::error::{Error, Result};
use crate::special::{gamma, CompositeRule};
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct GronwallReport {
    pub lambda1: f64,
    pub sigma: f64,
    pub n: usize,
    pub p: f64,
    pub t_grid: Vec<f64>,
    pub i1: Vec<f64>,
    pub i2: Vec<f64>,
    pub b1: f64,
    pub b2: f64,
    /// `I1 <= B1` and `I2 <= B2` on every grid point, up to relative roundoff 1e-12.
    pub pass: bool,
}

fn check_inputs(lambda1: f64, sigma: f64, n: usize, p: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma < lambda1) {
        return Err(Error::RateOrderViolation { sigma, lambda1 });
    }
    if !(p > n as f64) {
        return Err(Error::ExponentRegimeViolation { p, n });
    }
    Ok(())
}

/// Closed-form bounds `(B1, B2)`.
pub fn gronwall_bounds(lambda1: f64, sigma: f64, n: usize, p: f64) -> Result<(f64, f64)> {
    check_inputs(lambda1, sigma, n, p)?;
    let c = lambda1 - sigma;
    let alpha = 0.5 + n as f64 / (2.0 * p);
    let b1 = 1.0 / c + c.powf(alpha - 1.0) * gamma(1.0 - alpha);
    Ok((b1, b1 / (c + 1.0)))
}

/// `int_0^t w(v) (1 + v^-alpha) e^{-c v} dv` for a smooth weight `w`.
///
/// The substitution `v = t y^{1/(1-alpha)}` removes the endpoint singularity.
fn singular_integral(t: f64, c: f64, alpha: f64, rule: &CompositeRule, w: impl Fn(f64) -> f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let beta = 1.0 / (1.0 - alpha);
    let scale = t.powf(1.0 - alpha) * beta;
    rule.integrate(0.0, 1.0, |y| {
        let v = t * y.powf(beta);
        // (1 + v^-alpha) dv = beta t^{1-alpha} (y^{alpha beta} t^alpha + 1) dy
        let jac = scale * (y.powf(alpha * beta) * t.powf(alpha) + 1.0);
        jac * (-c * v).exp() * w(v)
    })
}

pub fn gronwall_integrals(lambda1: f64, sigma: f64, n: usize, p: f64, t_grid: &[f64]) -> Result<GronwallReport> {
    let (b1, b2) = gronwall_bounds(lambda1, sigma, n, p)?;
    if let Some(&t) = t_grid.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        return Err(Error::NegativeTime(t));
    }
    let c = lambda1 - sigma;
    let alpha = 0.5 + n as f64 / (2.0 * p);
    let rule = CompositeRule::new(20, 64);
    let mut i1 = Vec::with_capacity(t_grid.len());
    let mut i2 = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        i1.push(singular_integral(t, c, alpha, &rule, |_| 1.0));
        // Swapping the order of integration leaves one inner integral in closed form.
        i2.push(singular_integral(t, c, alpha, &rule, |v| -(-(c + 1.0) * (t - v)).exp_m1() / (c + 1.0)));
    }
    // I1 saturates at B1 as t grows, so allow for quadrature roundoff.
    let slack = 1.0 + 1e-12;
    let pass = i1.iter().all(|v| *v <= b1 * slack) && i2.iter().all(|v| *v <= b2 * slack);
    Ok(GronwallReport { lambda1, sigma, n, p, t_grid: t_grid.to_vec(), i1, i2, b1, b2, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_example() {
        let (b1, b2) = gronwall_bounds(1.0, 0.5, 2, 4.0).unwrap();
        assert!((b1 - (2.0 + 0.5f64.powf(-0.25) * 3.625_609_908_221_908)).abs() < 1e-12);
        assert!((b1 - 6.3116).abs() < 1e-3);
        assert!((b2 - b1 / 1.5).abs() < 1e-14);
    }

    #[test]
    fn rate_order_enforced() {
        assert!(matches!(gronwall_integrals(1.0, 1.0, 2, 4.0, &[1.0]), Err(Error::RateOrderViolation { .. })));
        assert!(matches!(gronwall_integrals(1.0, 0.0, 2, 4.0, &[1.0]), Err(Error::RateOrderViolation { .. })));
    }

    #[test]
    fn empty_interval_vanishes_and_saturates() {
        let grid = [0.0, 1e-6, 1.0, 10.0, 200.0];
        let r = gronwall_integrals(1.0, 0.5, 2, 4.0, &grid).unwrap();
        assert_eq!(r.i1[0], 0.0);
        assert!(r.i1[1] < 0.2 && r.i2[1] < 1e-6);
        assert!((r.i1[4] - r.b1).abs() < 1e-9 * r.b1);
        assert!(r.pass, "{:?} {} {:?} {}", r.i1, r.b1, r.i2, r.b2);
    }

    #[test]
    fn small_t_matches_series() {
        // int_0^t v^-alpha dv + t at leading order
        let t: f64 = 1e-4;
        let r = gronwall_integrals(1.0, 0.5, 2, 4.0, &[t]).unwrap();
        let approx = t + t.powf(0.25) / 0.25;
        assert!((r.i1[0] - approx).abs() < 1e-3 * approx);
    }
}
