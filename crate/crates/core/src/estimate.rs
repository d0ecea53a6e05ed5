//! Empirical verification of the four semigroup estimates
//!
//! ```text
//! (i)   |e^{tL} w|_p      <= k1 (1 + t^-a) e^{-l1 t} |w|_q      (mean-zero w)
//! (ii)  |grad e^{tL} w|_p <= k2 (1 + t^-a) e^{-l1 t} |w|_q
//! (iii) |grad e^{tL} w|_p <= k3 (1 + t^-a) e^{-l1 t} |grad w|_q
//! (iv)  |e^{tL} div w|_p  <= k4 (1 + t^-a) e^{-l1 t} |w|_q
//! ```
//!
//! For each kind the harness draws random heat-kernel bumps, evaluates the
//! ratio of the two sides on a logarithmic time grid and reports the sup as
//! the constant. The sup is recomputed with twice the samples to check that
//! it has settled, and the small-time growth exponent is fitted on a log-log
//! scale.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::lp_of_values;
use crate::semigroup::heat_spectral;
use crate::spectral::{Domain, Parity, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateKind {
    I,
    Ii,
    Iii,
    Iv,
}

impl EstimateKind {
    pub const ALL: [EstimateKind; 4] =
        [EstimateKind::I, EstimateKind::Ii, EstimateKind::Iii, EstimateKind::Iv];

    pub fn label(self) -> &'static str {
        match self {
            EstimateKind::I => "i",
            EstimateKind::Ii => "ii",
            EstimateKind::Iii => "iii",
            EstimateKind::Iv => "iv",
        }
    }

    /// Checks the exponent ordering each estimate is stated for.
    pub fn check_exponents(self, p: f64, q: f64) -> Result<()> {
        let ok = match self {
            EstimateKind::I | EstimateKind::Ii => 1.0 <= q && q <= p,
            EstimateKind::Iii => 2.0 <= q && q <= p && p.is_finite(),
            EstimateKind::Iv => 1.0 < q && q <= p,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::ExponentOrderViolation { kind: self.label().into(), p, q })
        }
    }

    /// Small-time blow-up exponent `a` in the prefactor `(1 + t^-a)`.
    pub fn alpha(self, n: usize, p: f64, q: f64) -> f64 {
        let base = 0.5 * n as f64 * (1.0 / q - 1.0 / p);
        match self {
            EstimateKind::I | EstimateKind::Iii => base,
            EstimateKind::Ii | EstimateKind::Iv => 0.5 + base,
        }
    }
}

/// A test input: scalar data for kinds i-iii, a vector field for kind iv.
#[derive(Clone, Debug)]
pub enum EstimateSample {
    Scalar(SpectralField),
    Vector(Vec<SpectralField>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EstimateConfig {
    pub kind: EstimateKind,
    pub p: f64,
    pub q: f64,
    /// Base sample count; the sup is recomputed with twice as many.
    pub samples: usize,
    pub t_grid: Vec<f64>,
    pub seed: u64,
}

impl EstimateConfig {
    pub fn new(kind: EstimateKind, p: f64, q: f64, samples: usize, seed: u64) -> Self {
        EstimateConfig { kind, p, q, samples, t_grid: log_time_grid(1e-3, 10.0, 40), seed }
    }
}

/// Window on which the small-time exponent is fitted.
pub const SLOPE_WINDOW: (f64, f64) = (1e-3, 1e-1);
/// Allowed deviation of the fitted small-time slope from `-a`.
pub const SLOPE_TOLERANCE: f64 = 0.1;
/// Allowed relative change of the sup under sample doubling.
pub const DOUBLING_TOLERANCE: f64 = 0.1;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EstimateReport {
    pub kind: EstimateKind,
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    /// Sup ratio over all (doubled) samples and the time grid.
    pub k: f64,
    /// Sup ratio over the base sample set.
    pub max_ratio: f64,
    pub samples: usize,
    pub t_grid: Vec<f64>,
    /// Fitted slope of `log sup(lhs / (e^{-l1 t} rhs))` against `log t` on the small-time window.
    pub slope_fit: f64,
    pub slope_ok: bool,
    pub pass: bool,
}

/// `count` logarithmically spaced times from `t_min` to `t_max` inclusive.
pub fn log_time_grid(t_min: f64, t_max: f64, count: usize) -> Vec<f64> {
    let (a, b) = (t_min.ln(), t_max.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1).max(1) as f64).exp())
        .collect()
}

/// `L^p` norm of a coefficient field (Parseval for `p = 2`, grid quadrature otherwise).
pub(crate) fn spectral_lp(f: &SpectralField, p: f64) -> Result<f64> {
    if p == 2.0 {
        return Ok(f.l2_norm());
    }
    let dom = f.domain();
    lp_of_values(&dom.inverse(f.coeffs(), f.parity())?, dom.cell_volume(), p)
}

/// `L^p` norm of the pointwise magnitude of a vector of coefficient fields.
pub(crate) fn spectral_vector_lp(w: &[SpectralField], p: f64) -> Result<f64> {
    if p == 2.0 {
        return Ok(w.iter().map(|c| c.l2_norm().powi(2)).sum::<f64>().sqrt());
    }
    let dom = w[0].domain();
    let mut sq = vec![0.0; dom.len()];
    for c in w {
        let g = dom.inverse(c.coeffs(), c.parity())?;
        for (s, v) in sq.iter_mut().zip(&g) {
            *s += v * v;
        }
    }
    let mag: Vec<f64> = sq.into_iter().map(f64::sqrt).collect();
    lp_of_values(&mag, dom.cell_volume(), p)
}

/// Neumann heat kernel at time `scale` centred at `center`, as cosine coefficients
/// (overall normalisation dropped).
pub fn heat_bump(domain: &Arc<Domain>, center: &[f64], scale: f64) -> SpectralField {
    let mut f = SpectralField::zeros(domain.clone(), Parity::COSINE);
    let ev = domain.eigenvalues();
    let n = domain.dimension();
    let axis_factors: Vec<Vec<f64>> = (0..n)
        .map(|axis| {
            domain
                .wavenumbers(axis)
                .iter()
                .enumerate()
                .map(|(k, kw)| if k == 0 { 1.0 } else { 2.0 * (kw * center[axis]).cos() })
                .collect()
        })
        .collect();
    for (flat, c) in f.coeffs_mut().iter_mut().enumerate() {
        let idx = domain.multi_index(flat);
        let mut v = (-ev[flat] * scale).exp();
        for (axis, factors) in axis_factors.iter().enumerate() {
            v *= factors[idx[axis]];
        }
        *c = v;
    }
    f
}

/// Random bump sample for `kind`: centre coordinates snap to a wall with
/// probability 1/2 per axis, the scale is log-uniform.
pub fn random_sample(
    domain: &Arc<Domain>,
    kind: EstimateKind,
    scale_range: (f64, f64),
    rng: &mut impl Rng,
) -> EstimateSample {
    let lengths = domain.lengths();
    let center: Vec<f64> = lengths
        .iter()
        .map(|&l| match rng.random_range(0..4) {
            0 => 0.0,
            1 => l,
            _ => rng.random_range(0.0..l),
        })
        .collect();
    let (lo, hi) = (scale_range.0.ln(), scale_range.1.ln());
    let scale = rng.random_range(lo..hi).exp();
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let mut bump = heat_bump(domain, &center, scale).scaled(sign);
    match kind {
        EstimateKind::I => {
            bump.coeffs_mut()[0] = 0.0;
            EstimateSample::Scalar(bump)
        }
        EstimateKind::Ii | EstimateKind::Iii => EstimateSample::Scalar(bump),
        EstimateKind::Iv => EstimateSample::Vector(
            (0..domain.dimension()).map(|axis| bump.derivative(axis)).collect(),
        ),
    }
}

/// Per-sample ratios `lhs(t) / (e^{-l1 t} rhs)` on the time grid.
fn sample_profile(kind: EstimateKind, p: f64, q: f64, sample: &EstimateSample, t_grid: &[f64]) -> Result<Vec<f64>> {
    let (rhs, evolve): (f64, Box<dyn Fn(f64) -> Result<f64>>) = match (kind, sample) {
        (EstimateKind::I, EstimateSample::Scalar(f)) => {
            let mean = f.mean();
            if mean.abs() > 1e-12 * f.l2_norm().max(1.0) {
                return Err(Error::MeanNotZero(mean));
            }
            (spectral_lp(f, q)?, Box::new(move |t| spectral_lp(&heat_spectral(f, t)?, p)))
        }
        (EstimateKind::Ii, EstimateSample::Scalar(f)) => (
            spectral_lp(f, q)?,
            Box::new(move |t| {
                let e = heat_spectral(f, t)?;
                spectral_vector_lp(&crate::field::spectral_gradient(&e), p)
            }),
        ),
        (EstimateKind::Iii, EstimateSample::Scalar(f)) => (
            spectral_vector_lp(&crate::field::spectral_gradient(f), q)?,
            Box::new(move |t| {
                let e = heat_spectral(f, t)?;
                spectral_vector_lp(&crate::field::spectral_gradient(&e), p)
            }),
        ),
        (EstimateKind::Iv, EstimateSample::Vector(w)) => {
            let div = crate::field::spectral_divergence(w)?;
            (spectral_vector_lp(w, q)?, Box::new(move |t| spectral_lp(&heat_spectral(&div, t)?, p)))
        }
        _ => {
            return Err(Error::ParityMismatch(format!(
                "sample shape does not match estimate kind {}",
                kind.label()
            )))
        }
    };
    let lambda1 = match sample {
        EstimateSample::Scalar(f) => f.domain().lambda1(),
        EstimateSample::Vector(w) => w[0].domain().lambda1(),
    };
    if rhs <= 0.0 {
        return Ok(vec![0.0; t_grid.len()]);
    }
    t_grid
        .iter()
        .map(|&t| Ok(evolve(t)? / ((-lambda1 * t).exp() * rhs)))
        .collect()
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Runs the estimate on caller-supplied samples. The first half of the
/// samples plays the role of the base set for the doubling check.
pub fn verify_estimate_with_samples(
    kind: EstimateKind,
    p: f64,
    q: f64,
    samples: &[EstimateSample],
    t_grid: &[f64],
) -> Result<EstimateReport> {
    kind.check_exponents(p, q)?;
    if samples.is_empty() || t_grid.is_empty() {
        return Err(Error::Config("estimate needs at least one sample and one time".into()));
    }
    if let Some(&t) = t_grid.iter().find(|&&t| !(t > 0.0)) {
        return Err(Error::NegativeTime(t));
    }
    let n = match &samples[0] {
        EstimateSample::Scalar(f) => f.domain().dimension(),
        EstimateSample::Vector(w) => w[0].domain().dimension(),
    };
    let alpha = kind.alpha(n, p, q);
    let profiles = samples
        .par_iter()
        .map(|s| sample_profile(kind, p, q, s, t_grid))
        .collect::<Result<Vec<_>>>()?;

    let prefactor: Vec<f64> = t_grid.iter().map(|&t| 1.0 + t.powf(-alpha)).collect();
    let sup_over = |set: &[Vec<f64>]| -> f64 {
        set.iter()
            .flat_map(|prof| prof.iter().zip(&prefactor).map(|(r, pf)| r / pf))
            .fold(0.0, f64::max)
    };
    let base_len = if samples.len() >= 2 { samples.len() / 2 } else { 1 };
    let k = sup_over(&profiles);
    let max_ratio = sup_over(&profiles[..base_len]);

    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (i, &t) in t_grid.iter().enumerate() {
        if t >= SLOPE_WINDOW.0 * (1.0 - 1e-9) && t <= SLOPE_WINDOW.1 * (1.0 + 1e-9) {
            let m = profiles.iter().map(|prof| prof[i]).fold(0.0, f64::max);
            if m > 0.0 {
                xs.push(t.ln());
                ys.push(m.ln());
            }
        }
    }
    let slope_fit = if xs.len() >= 2 { least_squares_slope(&xs, &ys) } else { f64::NAN };
    let slope_ok = (slope_fit + alpha).abs() <= SLOPE_TOLERANCE;
    let pass = k.is_finite() && k > 0.0 && (k - max_ratio) <= DOUBLING_TOLERANCE * k;

    Ok(EstimateReport {
        kind,
        p,
        q,
        alpha,
        k,
        max_ratio,
        samples: base_len,
        t_grid: t_grid.to_vec(),
        slope_fit,
        slope_ok,
        pass,
    })
}

/// Draws `2 * samples` random bumps (sample `i` seeded from stream `i`, so the
/// base set is a prefix of the doubled set) and fits the constant.
pub fn verify_estimate(domain: &Arc<Domain>, config: &EstimateConfig) -> Result<EstimateReport> {
    config.kind.check_exponents(config.p, config.q)?;
    if config.samples == 0 {
        return Err(Error::Config("estimate needs at least one sample".into()));
    }
    let t_min = config.t_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let scale_range = (0.5 * t_min, 2.0 / domain.lambda1());
    let samples: Vec<EstimateSample> = (0..2 * config.samples)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(i as u64);
            random_sample(domain, config.kind, scale_range, &mut rng)
        })
        .collect();
    verify_estimate_with_samples(config.kind, config.p, config.q, &samples, &config.t_grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::assemble_domain;
    use std::f64::consts::PI;

    fn square() -> Arc<Domain> {
        assemble_domain(&[PI, PI], &[32, 32]).unwrap()
    }

    #[test]
    fn exponent_ordering() {
        assert!(EstimateKind::I.check_exponents(4.0, 2.0).is_ok());
        assert!(EstimateKind::I.check_exponents(2.0, 4.0).is_err());
        assert!(EstimateKind::Iii.check_exponents(4.0, 1.5).is_err());
        assert!(EstimateKind::Iii.check_exponents(f64::INFINITY, 2.0).is_err());
        assert!(EstimateKind::Iv.check_exponents(4.0, 1.0).is_err());
        assert!(EstimateKind::Iv.check_exponents(f64::INFINITY, 1.5).is_ok());
    }

    #[test]
    fn alpha_values() {
        assert_eq!(EstimateKind::I.alpha(2, 2.0, 2.0), 0.0);
        assert!((EstimateKind::Ii.alpha(2, 4.0, 2.0) - 0.75).abs() < 1e-15);
        assert!((EstimateKind::Iii.alpha(2, 4.0, 2.0) - 0.25).abs() < 1e-15);
        assert!((EstimateKind::Iv.alpha(2, 2.0, 4.0 / 3.0) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn kind_i_eigenfunction_gives_one_half() {
        let d = square();
        let cx = SpectralField::mode(d.clone(), &[1, 0], 1.0);
        let grid = log_time_grid(1e-3, 10.0, 40);
        let samples = vec![EstimateSample::Scalar(cx.clone()), EstimateSample::Scalar(cx)];
        let r = verify_estimate_with_samples(EstimateKind::I, 2.0, 2.0, &samples, &grid).unwrap();
        assert!((r.k - 0.5).abs() < 1e-12);
        assert!(r.pass);
        assert!(r.slope_fit.abs() < 1e-10);
    }

    #[test]
    fn kind_ii_single_mode_bounded_by_one() {
        let d = square();
        let cx = SpectralField::mode(d, &[1, 0], 1.0);
        let grid = log_time_grid(1e-3, 10.0, 40);
        let r = verify_estimate_with_samples(EstimateKind::Ii, 2.0, 2.0, &[EstimateSample::Scalar(cx)], &grid)
            .unwrap();
        assert!(r.k <= 1.0);
        // ratio = 1 / (1 + t^{-1/2}) increases towards 1 on the grid
        assert!((r.k - 1.0 / (1.0 + 10f64.powf(-0.5))).abs() < 1e-12);
    }

    #[test]
    fn kind_i_rejects_nonzero_mean() {
        let d = square();
        let c = SpectralField::mode(d, &[0, 0], 1.0);
        let grid = log_time_grid(1e-3, 10.0, 5);
        let err = verify_estimate_with_samples(EstimateKind::I, 2.0, 2.0, &[EstimateSample::Scalar(c)], &grid)
            .unwrap_err();
        assert!(matches!(err, Error::MeanNotZero(_)));
    }

    #[test]
    fn heat_bump_is_a_neumann_heat_kernel() {
        // bump(s) evolved by t equals bump(s + t)
        let d = square();
        let b = heat_bump(&d, &[0.4, 2.0], 0.05);
        let evolved = heat_spectral(&b, 0.1).unwrap();
        let direct = heat_bump(&d, &[0.4, 2.0], 0.15);
        for (a, c) in evolved.coeffs().iter().zip(direct.coeffs()) {
            assert!((a - c).abs() < 1e-12);
        }
    }

    #[test]
    fn random_samples_are_deterministic() {
        let d = square();
        let cfg = EstimateConfig { t_grid: log_time_grid(1e-2, 1.0, 6), ..EstimateConfig::new(EstimateKind::Ii, 4.0, 2.0, 4, 9) };
        let a = verify_estimate(&d, &cfg).unwrap();
        let b = verify_estimate(&d, &cfg).unwrap();
        assert_eq!(a.k.to_bits(), b.k.to_bits());
        assert_eq!(a.slope_fit.to_bits(), b.slope_fit.to_bits());
    }
}
