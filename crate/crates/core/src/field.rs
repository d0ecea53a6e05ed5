//! Grid fields and the algebra the estimates measure: `L^p` norms, mean-zero
//! projection, spectral gradient and divergence, and the dealiased chemotaxis
//! flux `div(u grad v)`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spectral::{same_domain, to_spectral, Domain, Parity, SpectralField};

/// Values of a scalar quantity at the collocation nodes.
#[derive(Clone, Debug)]
pub struct ScalarField {
    domain: Arc<Domain>,
    parity: Parity,
    values: Vec<f64>,
}

impl ScalarField {
    /// Cosine-parity field from grid values.
    pub fn new(domain: Arc<Domain>, values: Vec<f64>) -> Result<Self> {
        Self::with_parity(domain, Parity::COSINE, values)
    }

    pub fn with_parity(domain: Arc<Domain>, parity: Parity, values: Vec<f64>) -> Result<Self> {
        domain.check_len(values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("scalar field"));
        }
        Ok(ScalarField { domain, parity, values })
    }

    pub fn zeros(domain: Arc<Domain>) -> Self {
        let len = domain.len();
        ScalarField { domain, parity: Parity::COSINE, values: vec![0.0; len] }
    }

    /// Samples `f` at every node; `f` receives the node coordinates (unused axes are 0).
    pub fn from_fn(domain: Arc<Domain>, f: impl Fn(&[f64; 3]) -> f64) -> Self {
        let values = (0..domain.len()).map(|i| f(&domain.point(i))).collect();
        ScalarField { domain, parity: Parity::COSINE, values }
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Quadrature mean `(1/|Omega|) sum_j w_j f_j`.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> ScalarField {
        self.map(|v| v * factor)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            domain: self.domain.clone(),
            parity: self.parity,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        if !same_domain(&self.domain, &other.domain) {
            return Err(Error::DomainMismatch);
        }
        Ok(ScalarField {
            domain: self.domain.clone(),
            parity: self.parity,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip_with(other, |a, b| a * b)
    }
}

/// `n` component fields; component `i` carries its own parity tag.
#[derive(Clone, Debug)]
pub struct VectorField {
    components: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(components: Vec<ScalarField>) -> Result<Self> {
        let first = components.first().ok_or(Error::UnsupportedDimension(0))?;
        if components.len() != first.domain.dimension() {
            return Err(Error::UnsupportedDimension(components.len()));
        }
        if components.iter().any(|c| !same_domain(&c.domain, &first.domain)) {
            return Err(Error::DomainMismatch);
        }
        Ok(VectorField { components })
    }

    pub fn zeros(domain: Arc<Domain>) -> Self {
        let components = (0..domain.dimension())
            .map(|axis| ScalarField {
                domain: domain.clone(),
                parity: Parity::sine_on(axis),
                values: vec![0.0; domain.len()],
            })
            .collect();
        VectorField { components }
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn component(&self, axis: usize) -> &ScalarField {
        &self.components[axis]
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.components[0].domain
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        let len = self.domain().len();
        let values = (0..len)
            .map(|i| self.components.iter().map(|c| c.values[i] * c.values[i]).sum::<f64>().sqrt())
            .collect();
        ScalarField { domain: self.domain().clone(), parity: Parity::COSINE, values }
    }

    /// Pointwise product `s * w`.
    pub fn scale_by(&self, s: &ScalarField) -> Result<VectorField> {
        let components = self
            .components
            .iter()
            .map(|c| c.zip_with(s, |a, b| a * b))
            .collect::<Result<Vec<_>>>()?;
        Ok(VectorField { components })
    }

    pub fn scaled(&self, factor: f64) -> VectorField {
        VectorField { components: self.components.iter().map(|c| c.scaled(factor)).collect() }
    }

    pub fn max_abs_diff(&self, other: &VectorField) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

/// `(sum_j w_j |f_j|^p)^(1/p)` with the uniform product weights; grid max for `p = inf`.
pub(crate) fn lp_of_values(values: &[f64], cell: f64, p: f64) -> Result<f64> {
    check_exponent(p)?;
    if p.is_infinite() {
        return Ok(values.iter().fold(0.0, |m, v| f64::max(m, v.abs())));
    }
    let sum: f64 = if p == 2.0 {
        values.iter().map(|v| v * v).sum()
    } else if p == 4.0 {
        values.iter().map(|v| (v * v) * (v * v)).sum()
    } else {
        values.iter().map(|v| v.abs().powf(p)).sum()
    };
    Ok((cell * sum).powf(1.0 / p))
}

pub trait LpNorm {
    fn lp_norm(&self, p: f64) -> Result<f64>;
}

impl LpNorm for ScalarField {
    fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_of_values(&self.values, self.domain.cell_volume(), p)
    }
}

impl LpNorm for VectorField {
    fn lp_norm(&self, p: f64) -> Result<f64> {
        self.magnitude().lp_norm(p)
    }
}

pub fn lp_norm<F: LpNorm + ?Sized>(field: &F, p: f64) -> Result<f64> {
    field.lp_norm(p)
}

/// `f - mean(f)`.
pub fn project_mean_zero(f: &ScalarField) -> ScalarField {
    let m = f.mean();
    f.map(|v| v - m)
}

/// Spectral gradient of a coefficient field.
pub fn spectral_gradient(f: &SpectralField) -> Vec<SpectralField> {
    (0..f.domain().dimension()).map(|axis| f.derivative(axis)).collect()
}

/// Spectral divergence; component `i` must be sine along axis `i` and all
/// differentiated components must land on the same parity.
pub fn spectral_divergence(w: &[SpectralField]) -> Result<SpectralField> {
    let first = w.first().ok_or(Error::UnsupportedDimension(0))?;
    let dom = first.domain().clone();
    if w.len() != dom.dimension() {
        return Err(Error::UnsupportedDimension(w.len()));
    }
    let mut out: Option<SpectralField> = None;
    for (axis, comp) in w.iter().enumerate() {
        if !same_domain(comp.domain(), &dom) {
            return Err(Error::DomainMismatch);
        }
        if !comp.parity().is_sine(axis) {
            return Err(Error::ParityMismatch(format!(
                "component {axis} must be sine along axis {axis}, got {:?}",
                comp.parity()
            )));
        }
        let d = comp.derivative(axis);
        match out.as_mut() {
            None => out = Some(d),
            Some(acc) => {
                if acc.parity() != d.parity() {
                    return Err(Error::ParityMismatch(format!(
                        "divergence terms disagree: {:?} vs {:?}",
                        acc.parity(),
                        d.parity()
                    )));
                }
                for (a, b) in acc.coeffs_mut().iter_mut().zip(d.coeffs()) {
                    *a += b;
                }
            }
        }
    }
    Ok(out.expect("nonempty"))
}

pub fn gradient(f: &ScalarField) -> Result<VectorField> {
    let s = to_spectral(f)?;
    let components = spectral_gradient(&s).iter().map(SpectralField::to_grid).collect();
    VectorField::new(components)
}

pub fn divergence(w: &VectorField) -> Result<ScalarField> {
    let spectral = w.components.iter().map(to_spectral).collect::<Result<Vec<_>>>()?;
    Ok(spectral_divergence(&spectral)?.to_grid())
}

/// Spectral Laplacian of a grid field (`-lambda_k` per coefficient).
pub fn laplacian(f: &ScalarField) -> Result<ScalarField> {
    Ok(to_spectral(f)?.laplacian().to_grid())
}

/// Pseudo-spectral `div(u grad v)` in coefficient space.
///
/// Both factors are truncated by the 2/3 rule before the grid product, and the
/// product is truncated again, so the kept modes are alias-free. The result
/// has an exactly vanishing mean coefficient.
pub fn flux_spectral(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    if !same_domain(u.domain(), v.domain()) {
        return Err(Error::DomainMismatch);
    }
    if u.parity() != Parity::COSINE || v.parity() != Parity::COSINE {
        return Err(Error::ParityMismatch("flux needs cosine-parity u and v".into()));
    }
    let dom = u.domain().clone();
    let mut u_trunc = u.clone();
    u_trunc.dealias();
    let u_grid = dom.inverse(u_trunc.coeffs(), Parity::COSINE)?;
    let mut v_trunc = v.clone();
    v_trunc.dealias();

    let mut out = vec![0.0; dom.len()];
    let mut product = vec![0.0; dom.len()];
    for axis in 0..dom.dimension() {
        let dv = v_trunc.derivative(axis);
        let dv_grid = dom.inverse(dv.coeffs(), dv.parity())?;
        for ((p, a), b) in product.iter_mut().zip(&u_grid).zip(&dv_grid) {
            *p = a * b;
        }
        let mut flux = SpectralField::new(dom.clone(), dv.parity(), dom.forward(&product, dv.parity())?)?;
        flux.dealias();
        let div = flux.derivative(axis);
        for (o, d) in out.iter_mut().zip(div.coeffs()) {
            *o += d;
        }
    }
    SpectralField::new(dom, Parity::COSINE, out)
}

/// `div(u grad v)` on the grid.
pub fn chemotaxis_flux(u: &ScalarField, v: &ScalarField) -> Result<ScalarField> {
    if !same_domain(u.domain(), v.domain()) {
        return Err(Error::DomainMismatch);
    }
    Ok(flux_spectral(&to_spectral(u)?, &to_spectral(v)?)?.to_grid())
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
    fn lp_norm_examples() {
        let d = square();
        let c = ScalarField::from_fn(d.clone(), |_| 2.0);
        assert!((c.lp_norm(2.0).unwrap() - 2.0 * PI).abs() < 1e-12);
        let cx = ScalarField::from_fn(d.clone(), |x| x[0].cos());
        assert!((cx.lp_norm(2.0).unwrap() - PI / 2f64.sqrt()).abs() < 1e-12);
        assert!((cx.lp_norm(f64::INFINITY).unwrap() - (PI / 64.0).cos()).abs() < 1e-12);
    }

    #[test]
    fn invalid_exponent() {
        let d = square();
        let c = ScalarField::zeros(d);
        assert!(matches!(c.lp_norm(0.5), Err(Error::InvalidExponent(_))));
        assert!(matches!(c.lp_norm(f64::NAN), Err(Error::InvalidExponent(_))));
    }

    #[test]
    fn non_finite_values_rejected() {
        let d = square();
        let mut v = vec![0.0; d.len()];
        v[3] = f64::NAN;
        assert!(matches!(ScalarField::new(d, v), Err(Error::NonFinite(_))));
    }

    #[test]
    fn mean_zero_projection_examples() {
        let d = square();
        let five = ScalarField::from_fn(d.clone(), |_| 5.0);
        assert!(project_mean_zero(&five).values().iter().all(|v| v.abs() < 1e-14));
        let cx = ScalarField::from_fn(d.clone(), |x| x[0].cos());
        assert!(project_mean_zero(&cx).max_abs_diff(&cx) < 1e-14);
        let shifted = ScalarField::from_fn(d.clone(), |x| 1.0 + x[0].cos());
        assert!(project_mean_zero(&shifted).max_abs_diff(&cx) < 1e-14);
        let once = project_mean_zero(&shifted);
        assert!(project_mean_zero(&once).max_abs_diff(&once) < 1e-15);
    }

    #[test]
    fn gradient_and_divergence_of_cos_x() {
        let d = square();
        let cx = ScalarField::from_fn(d.clone(), |x| x[0].cos());
        let g = gradient(&cx).unwrap();
        let expected = ScalarField::from_fn(d.clone(), |x| -x[0].sin());
        assert!(g.component(0).max_abs_diff(&expected) < 1e-13);
        assert!(g.component(1).values().iter().all(|v| v.abs() < 1e-13));
        let div = divergence(&g).unwrap();
        let err = div.max_abs_diff(&cx.scaled(-1.0));
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn divergence_rejects_wrong_parity() {
        let d = square();
        let comps = vec![ScalarField::zeros(d.clone()), ScalarField::zeros(d.clone())];
        let w = VectorField::new(comps).unwrap();
        assert!(matches!(divergence(&w), Err(Error::ParityMismatch(_))));
    }

    #[test]
    fn flux_examples() {
        let d = square();
        let v = ScalarField::from_fn(d.clone(), |x| (2.0 * x[0]).cos() * x[1].cos() + 0.3 * x[1].cos());
        let one = ScalarField::from_fn(d.clone(), |_| 1.0);
        let f = chemotaxis_flux(&one, &v).unwrap();
        let err = f.max_abs_diff(&laplacian(&v).unwrap());
        assert!(err < 1e-10, "{err}");

        let u = ScalarField::from_fn(d.clone(), |x| (x[0] * x[1]).sin());
        let c = ScalarField::from_fn(d.clone(), |_| 4.0);
        assert!(chemotaxis_flux(&u, &c).unwrap().values().iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn flux_requires_shared_domain() {
        let a = square();
        let b = assemble_domain(&[PI, 2.0 * PI], &[32, 32]).unwrap();
        let u = ScalarField::zeros(a);
        let v = ScalarField::zeros(b);
        assert!(matches!(chemotaxis_flux(&u, &v), Err(Error::DomainMismatch)));
    }
}
