//! Rectangular domains, collocation grids and the Neumann cosine eigenbasis.
//!
//! A domain `[0, L_1] x ... x [0, L_n]` is discretised on the type-II cosine
//! collocation nodes `x_j = (j + 1/2) L / N`. Cosine-parity coefficients `c_k`
//! multiply `cos(k pi x / L)` for `k = 0..N`, sine-parity coefficients multiply
//! `sin(k pi x / L)` for `k = 1..N` (slot `k = 0` is always zero). Every
//! multi-index `k` is an eigenfunction of `-Laplace` with eigenvalue
//! `sum_i (k_i pi / L_i)^2`, so the heat semigroup is diagonal here.
//!
//! Transforms are separable dense matrix passes along each axis. On a sine
//! axis the `(-1)^j` node pattern (mode `k = N`) is not retained, so only
//! cosine-parity grid data round-trips exactly.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::ScalarField;

/// Per-axis parity tag: bit `i` set means sine along axis `i`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Parity(u8);

impl Parity {
    pub const COSINE: Parity = Parity(0);

    pub fn is_sine(self, axis: usize) -> bool {
        self.0 & (1 << axis) != 0
    }

    pub fn flip(self, axis: usize) -> Parity {
        Parity(self.0 ^ (1 << axis))
    }

    /// Sine on `axis`, cosine elsewhere: the parity of `d/dx_axis` of a cosine field.
    pub fn sine_on(axis: usize) -> Parity {
        Parity(1 << axis)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn from_bits(bits: u8) -> Parity {
        Parity(bits)
    }
}

impl fmt::Debug for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Parity(")?;
        for axis in 0..3 {
            f.write_str(if self.is_sine(axis) { "s" } else { "c" })?;
        }
        write!(f, ")")
    }
}

/// Row-major `n x n` matrix acting along one axis (`out[k] = sum_j m[k][j] in[j]`).
#[derive(Clone, Debug)]
struct AxisMatrix {
    n: usize,
    data: Vec<f64>,
}

impl AxisMatrix {
    fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for k in 0..n {
            for j in 0..n {
                data.push(f(k, j));
            }
        }
        AxisMatrix { n, data }
    }

    /// Apply along the middle axis of an `(outer, n, inner)` view.
    fn apply(&self, input: &[f64], output: &mut [f64], outer: usize, inner: usize) {
        let n = self.n;
        for o in 0..outer {
            let base = o * n * inner;
            let src = &input[base..base + n * inner];
            let dst = &mut output[base..base + n * inner];
            if inner == 1 {
                for k in 0..n {
                    let row = &self.data[k * n..(k + 1) * n];
                    dst[k] = row.iter().zip(src).map(|(a, b)| a * b).sum();
                }
            } else {
                for k in 0..n {
                    let out_row = &mut dst[k * inner..(k + 1) * inner];
                    out_row.fill(0.0);
                    for j in 0..n {
                        let c = self.data[k * n + j];
                        if c == 0.0 {
                            continue;
                        }
                        let in_row = &src[j * inner..(j + 1) * inner];
                        for (o, i) in out_row.iter_mut().zip(in_row) {
                            *o += c * i;
                        }
                    }
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
struct AxisBasis {
    length: f64,
    n: usize,
    nodes: Vec<f64>,
    wavenumbers: Vec<f64>,
    cos_synthesis: AxisMatrix,
    cos_analysis: AxisMatrix,
    sin_synthesis: AxisMatrix,
    sin_analysis: AxisMatrix,
}

impl AxisBasis {
    fn new(length: f64, n: usize) -> Self {
        let nodes: Vec<f64> = (0..n).map(|j| (j as f64 + 0.5) * length / n as f64).collect();
        let wavenumbers: Vec<f64> = (0..n).map(|k| k as f64 * PI / length).collect();
        let theta = |k: usize, j: usize| PI * k as f64 * (j as f64 + 0.5) / n as f64;
        let nf = n as f64;
        let cos_synthesis = AxisMatrix::from_fn(n, |j, k| theta(k, j).cos());
        let cos_analysis = AxisMatrix::from_fn(n, |k, j| {
            let w = if k == 0 { 1.0 } else { 2.0 };
            w / nf * theta(k, j).cos()
        });
        let sin_synthesis =
            AxisMatrix::from_fn(n, |j, k| if k == 0 { 0.0 } else { theta(k, j).sin() });
        let sin_analysis =
            AxisMatrix::from_fn(n, |k, j| if k == 0 { 0.0 } else { 2.0 / nf * theta(k, j).sin() });
        AxisBasis {
            length,
            n,
            nodes,
            wavenumbers,
            cos_synthesis,
            cos_analysis,
            sin_synthesis,
            sin_analysis,
        }
    }
}

/// Axis-aligned rectangle with its collocation grid and Neumann eigenstructure.
#[derive(Clone)]
pub struct Domain {
    axes: Vec<AxisBasis>,
    shape: Vec<usize>,
    len: usize,
    eigenvalues: Vec<f64>,
    dealias_keep: Vec<bool>,
    lambda1: f64,
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Domain")
            .field("lengths", &self.lengths())
            .field("resolution", &self.shape)
            .field("lambda1", &self.lambda1)
            .finish()
    }
}

impl PartialEq for Domain {
    fn eq(&self, other: &Self) -> bool {
        self.shape == other.shape
            && self.axes.iter().zip(&other.axes).all(|(a, b)| a.length == b.length)
    }
}

/// Builds a domain from per-axis extents and mode counts.
pub fn assemble_domain(lengths: &[f64], resolution: &[usize]) -> Result<Arc<Domain>> {
    Domain::new(lengths, resolution).map(Arc::new)
}

impl Domain {
    pub fn new(lengths: &[f64], resolution: &[usize]) -> Result<Domain> {
        let dim = lengths.len();
        if dim == 0 || dim > 3 || resolution.len() != dim {
            return Err(Error::UnsupportedDimension(dim.max(resolution.len())));
        }
        for (axis, &l) in lengths.iter().enumerate() {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::NonPositiveLength { axis, value: l });
            }
        }
        for (axis, &n) in resolution.iter().enumerate() {
            if n < 8 || n % 2 != 0 {
                return Err(Error::ResolutionTooSmall { axis, value: n });
            }
        }
        let axes: Vec<AxisBasis> =
            lengths.iter().zip(resolution).map(|(&l, &n)| AxisBasis::new(l, n)).collect();
        let shape = resolution.to_vec();
        let len = shape.iter().product();

        let mut eigenvalues = vec![0.0; len];
        let mut dealias_keep = vec![true; len];
        for flat in 0..len {
            let idx = unravel(&shape, flat);
            let mut lambda = 0.0;
            for (axis, basis) in axes.iter().enumerate() {
                let kw = basis.wavenumbers[idx[axis]];
                lambda += kw * kw;
                if 3 * idx[axis] >= 2 * basis.n {
                    dealias_keep[flat] = false;
                }
            }
            eigenvalues[flat] = lambda;
        }
        let lambda1 = axes
            .iter()
            .map(|b| b.wavenumbers[1] * b.wavenumbers[1])
            .fold(f64::INFINITY, f64::min);

        Ok(Domain { axes, shape, len, eigenvalues, dealias_keep, lambda1 })
    }

    pub fn dimension(&self) -> usize {
        self.axes.len()
    }

    /// One-dimensional domains exist for oracle testing only.
    pub fn is_oracle_only(&self) -> bool {
        self.dimension() == 1
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.axes.iter().map(|a| a.length).collect()
    }

    pub fn resolution(&self) -> &[usize] {
        &self.shape
    }

    /// Number of grid points (equivalently, of spectral coefficients).
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn volume(&self) -> f64 {
        self.axes.iter().map(|a| a.length).product()
    }

    /// Uniform product-rule quadrature weight of each node.
    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.len as f64
    }

    pub fn nodes(&self, axis: usize) -> &[f64] {
        &self.axes[axis].nodes
    }

    /// `k pi / L` along `axis` for `k = 0..N`.
    pub fn wavenumbers(&self, axis: usize) -> &[f64] {
        &self.axes[axis].wavenumbers
    }

    /// Neumann eigenvalue of every multi-index, in grid (row-major) layout.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn sorted_eigenvalues(&self) -> Vec<f64> {
        let mut ev = self.eigenvalues.clone();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Smallest nonzero Neumann eigenvalue of `-Laplace`.
    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        unravel(&self.shape, flat)
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.shape).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub(crate) fn dealias_mask(&self) -> &[bool] {
        &self.dealias_keep
    }

    /// `1/2` per nonzero index on cosine axes and per sine axis: the squared
    /// `L^2` norm of basis function `k`, relative to the domain volume.
    pub fn basis_norm_factor(&self, parity: Parity, flat: usize) -> f64 {
        let idx = self.multi_index(flat);
        let mut w = 1.0;
        for axis in 0..self.dimension() {
            if parity.is_sine(axis) {
                if idx[axis] == 0 {
                    return 0.0;
                }
                w *= 0.5;
            } else if idx[axis] != 0 {
                w *= 0.5;
            }
        }
        w
    }

    /// Grid coordinates of node `flat`.
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let mut x = [0.0; 3];
        for (axis, basis) in self.axes.iter().enumerate() {
            x[axis] = basis.nodes[idx[axis]];
        }
        x
    }

    fn transform(&self, data: &[f64], parity: Parity, forward: bool) -> Vec<f64> {
        let mut current = data.to_vec();
        let mut scratch = vec![0.0; self.len];
        for axis in 0..self.dimension() {
            let basis = &self.axes[axis];
            let m = match (forward, parity.is_sine(axis)) {
                (true, false) => &basis.cos_analysis,
                (true, true) => &basis.sin_analysis,
                (false, false) => &basis.cos_synthesis,
                (false, true) => &basis.sin_synthesis,
            };
            let outer: usize = self.shape[..axis].iter().product();
            let inner: usize = self.shape[axis + 1..].iter().product();
            m.apply(&current, &mut scratch, outer, inner);
            std::mem::swap(&mut current, &mut scratch);
        }
        current
    }

    /// Grid values to coefficients for the given parity.
    pub fn forward(&self, values: &[f64], parity: Parity) -> Result<Vec<f64>> {
        self.check_len(values.len())?;
        Ok(self.transform(values, parity, true))
    }

    /// Coefficients to grid values for the given parity.
    pub fn inverse(&self, coeffs: &[f64], parity: Parity) -> Result<Vec<f64>> {
        self.check_len(coeffs.len())?;
        Ok(self.transform(coeffs, parity, false))
    }

    pub(crate) fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len {
            return Err(Error::ShapeMismatch { expected: self.len, got });
        }
        Ok(())
    }
}

pub(crate) fn unravel(shape: &[usize], mut flat: usize) -> [usize; 3] {
    let mut idx = [0usize; 3];
    for axis in (0..shape.len()).rev() {
        idx[axis] = flat % shape[axis];
        flat /= shape[axis];
    }
    idx
}

pub(crate) fn same_domain(a: &Arc<Domain>, b: &Arc<Domain>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Coefficient array in the eigenbasis, tagged with a per-axis parity.
#[derive(Clone, Debug)]
pub struct SpectralField {
    domain: Arc<Domain>,
    parity: Parity,
    coeffs: Vec<f64>,
}

impl SpectralField {
    pub fn new(domain: Arc<Domain>, parity: Parity, coeffs: Vec<f64>) -> Result<Self> {
        domain.check_len(coeffs.len())?;
        Ok(SpectralField { domain, parity, coeffs })
    }

    pub fn zeros(domain: Arc<Domain>, parity: Parity) -> Self {
        let len = domain.len();
        SpectralField { domain, parity, coeffs: vec![0.0; len] }
    }

    /// The single eigenfunction with multi-index `idx` (cosine parity).
    pub fn mode(domain: Arc<Domain>, idx: &[usize], amplitude: f64) -> Self {
        let mut f = SpectralField::zeros(domain, Parity::COSINE);
        let flat = f.domain.flat_index(idx);
        f.coeffs[flat] = amplitude;
        f
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Spatial mean (the `k = 0` coefficient; zero on any sine axis).
    pub fn mean(&self) -> f64 {
        if self.parity == Parity::COSINE {
            self.coeffs[0]
        } else {
            0.0
        }
    }

    /// Multiplies coefficient `k` by `-lambda_k`.
    pub fn laplacian(&self) -> SpectralField {
        let coeffs = self
            .coeffs
            .iter()
            .zip(self.domain.eigenvalues())
            .map(|(c, l)| -l * c)
            .collect();
        SpectralField { domain: self.domain.clone(), parity: self.parity, coeffs }
    }

    /// Term-by-term `d/dx_axis`; flips the parity of `axis`.
    pub fn derivative(&self, axis: usize) -> SpectralField {
        let dom = &self.domain;
        let kw = dom.wavenumbers(axis);
        let sign = if self.parity.is_sine(axis) { 1.0 } else { -1.0 };
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(flat, c)| sign * kw[dom.multi_index(flat)[axis]] * c)
            .collect();
        SpectralField { domain: dom.clone(), parity: self.parity.flip(axis), coeffs }
    }

    /// Zeroes every mode with some `k_i >= 2 N_i / 3`.
    pub fn dealias(&mut self) {
        for (c, keep) in self.coeffs.iter_mut().zip(self.domain.dealias_mask()) {
            if !keep {
                *c = 0.0;
            }
        }
    }

    pub fn scaled(&self, factor: f64) -> SpectralField {
        SpectralField {
            domain: self.domain.clone(),
            parity: self.parity,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// `L^2` inner product computed from coefficients (Parseval).
    pub fn inner(&self, other: &SpectralField) -> Result<f64> {
        if !same_domain(&self.domain, &other.domain) {
            return Err(Error::DomainMismatch);
        }
        if self.parity != other.parity {
            return Err(Error::ParityMismatch(format!("{:?} vs {:?}", self.parity, other.parity)));
        }
        let vol = self.domain.volume();
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .enumerate()
            .map(|(k, (a, b))| a * b * self.domain.basis_norm_factor(self.parity, k))
            .sum::<f64>()
            * vol)
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).expect("self inner product").max(0.0).sqrt()
    }

    pub fn to_grid(&self) -> ScalarField {
        let values = self.domain.inverse(&self.coeffs, self.parity).expect("length checked");
        ScalarField::with_parity(self.domain.clone(), self.parity, values)
            .expect("length checked")
    }
}

/// Forward transform of a grid field.
pub fn to_spectral(field: &ScalarField) -> Result<SpectralField> {
    let coeffs = field.domain().forward(field.values(), field.parity())?;
    SpectralField::new(field.domain().clone(), field.parity(), coeffs)
}

/// Inverse transform back to grid values.
pub fn from_spectral(field: &SpectralField) -> ScalarField {
    field.to_grid()
}

/// Smallest nonzero Neumann eigenvalue.
pub fn lambda1(domain: &Domain) -> f64 {
    domain.lambda1()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Arc<Domain> {
        assemble_domain(&[PI, PI], &[32, 32]).unwrap()
    }

    #[test]
    fn lambda1_examples() {
        assert!((square().lambda1() - 1.0).abs() < 1e-15);
        let d = assemble_domain(&[2.0 * PI, PI], &[32, 32]).unwrap();
        assert!((d.lambda1() - 0.25).abs() < 1e-15);
        let d = assemble_domain(&[1.0, 1.0], &[16, 16]).unwrap();
        assert!((lambda1(&d) - PI * PI).abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_domain_is_oracle_only() {
        let d = assemble_domain(&[PI], &[64]).unwrap();
        assert!(d.is_oracle_only());
        assert_eq!(d.dimension(), 1);
        assert!(!square().is_oracle_only());
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(matches!(
            assemble_domain(&[PI, 0.0], &[32, 32]),
            Err(Error::NonPositiveLength { axis: 1, .. })
        ));
        assert!(matches!(
            assemble_domain(&[PI, PI], &[6, 32]),
            Err(Error::ResolutionTooSmall { axis: 0, value: 6 })
        ));
        assert!(matches!(
            assemble_domain(&[PI, PI], &[32, 33]),
            Err(Error::ResolutionTooSmall { axis: 1, value: 33 })
        ));
    }

    #[test]
    fn eigenvalues_sorted_and_nonnegative() {
        let d = square();
        let ev = d.sorted_eigenvalues();
        assert_eq!(ev[0], 0.0);
        assert!(ev.windows(2).all(|w| w[0] <= w[1]));
        assert!((ev[1] - d.lambda1()).abs() < 1e-14);
    }

    #[test]
    fn constant_field_is_zeroth_mode() {
        let d = square();
        let f = ScalarField::from_fn(d.clone(), |_| 3.0);
        let s = to_spectral(&f).unwrap();
        assert!((s.coeffs()[0] - 3.0).abs() < 1e-14);
        assert!(s.coeffs()[1..].iter().all(|c| c.abs() < 1e-14));
    }

    #[test]
    fn cos_x_is_one_hot() {
        let d = square();
        let f = ScalarField::from_fn(d.clone(), |x| x[0].cos());
        let s = to_spectral(&f).unwrap();
        let hot = d.flat_index(&[1, 0]);
        for (k, c) in s.coeffs().iter().enumerate() {
            let expected = if k == hot { 1.0 } else { 0.0 };
            assert!((c - expected).abs() < 1e-13, "k = {k}: {c}");
        }
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let d = square();
        assert!(matches!(d.forward(&[0.0; 10], Parity::COSINE), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn laplacian_of_eigenfunction() {
        let d = square();
        let f = SpectralField::mode(d.clone(), &[2, 3], 1.5);
        let lap = f.laplacian();
        let flat = d.flat_index(&[2, 3]);
        assert_eq!(lap.coeffs()[flat], -13.0 * 1.5);
    }

    #[test]
    fn derivative_flips_parity() {
        let d = square();
        let f = SpectralField::mode(d, &[1, 1], 1.0);
        let dx = f.derivative(0);
        assert!(dx.parity().is_sine(0));
        assert!(!dx.parity().is_sine(1));
        let dxx = dx.derivative(0);
        assert_eq!(dxx.parity(), Parity::COSINE);
    }

    #[test]
    fn cosine_field_has_zero_normal_derivative() {
        // d/dx of a cosine series is a sine series, which vanishes at x = 0 and x = L.
        let d = square();
        let f = SpectralField::mode(d.clone(), &[3, 2], 1.0).derivative(0);
        let kw = d.wavenumbers(0);
        for (flat, c) in f.coeffs().iter().enumerate() {
            let k = d.multi_index(flat)[0];
            let at_l = (kw[k] * PI).sin() * c;
            assert!(at_l.abs() < 1e-13);
        }
    }

    #[test]
    fn sine_round_trip_below_nyquist() {
        let d = square();
        let mut f = SpectralField::zeros(d.clone(), Parity::sine_on(0));
        f.coeffs_mut()[d.flat_index(&[5, 2])] = 0.7;
        f.coeffs_mut()[d.flat_index(&[31, 0])] = -0.2;
        let back = to_spectral(&f.to_grid()).unwrap();
        for (a, b) in f.coeffs().iter().zip(back.coeffs()) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
