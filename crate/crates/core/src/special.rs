//! Special functions and fixed-order quadrature.

use crate::error::{Error, Result};
use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Euler Gamma for any positive argument (Lanczos with reflection below 1/2).
pub(crate) fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

/// Euler Gamma restricted to the range the solver constants need, `(0, 1/2]`.
pub fn gamma_function(x: f64) -> Result<f64> {
    if x > 0.0 && x <= 0.5 {
        Ok(gamma(x))
    } else {
        Err(Error::OutOfRange(x))
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub(crate) fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        nodes[order - 1 - i] = -x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss-Legendre rule over `[a, b]` with equal panels.
pub(crate) struct CompositeRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    panels: usize,
}

impl CompositeRule {
    pub(crate) fn new(order: usize, panels: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        Self { nodes, weights, panels }
    }

    pub(crate) fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let width = (b - a) / self.panels as f64;
        let mut sum = 0.0;
        for k in 0..self.panels {
            let mid = a + (k as f64 + 0.5) * width;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                sum += w * f(mid + 0.5 * width * x);
            }
        }
        0.5 * width * sum
    }
}
