use super::time_grid::TimeGrid;
use crate::almost_periodic::SampledSignal;
use crate::error::{Error, Result};
use crate::estimate::{spectral_lp, spectral_vector_lp};
use crate::field::{lp_of_values, ScalarField, VectorField};
use crate::spectral::{same_domain, Domain, Parity, SpectralField};
use rayon::prelude::*;
use serde::Serialize;
use std::path::Path;
use std::sync::{Arc, OnceLock};

/// Cosine coefficients of one scalar unknown at every time node, node-major.
#[derive(Clone, Debug)]
pub struct SpectralSeries {
    domain: Arc<Domain>,
    grid: TimeGrid,
    data: Vec<f64>,
}

impl SpectralSeries {
    pub fn new(domain: Arc<Domain>, grid: TimeGrid, data: Vec<f64>) -> Result<Self> {
        let expected = domain.len() * grid.len();
        if data.len() != expected {
            return Err(Error::ShapeMismatch { expected, got: data.len() });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("trajectory"));
        }
        Ok(Self { domain, grid, data })
    }

    pub fn zeros(domain: Arc<Domain>, grid: TimeGrid) -> Self {
        let data = vec![0.0; domain.len() * grid.len()];
        Self { domain, grid, data }
    }

    /// Samples `f` at every node.
    pub fn from_fn(domain: Arc<Domain>, grid: TimeGrid, f: impl Fn(f64) -> SpectralField + Sync) -> Result<Self> {
        let nodes: Vec<SpectralField> = (0..grid.len()).into_par_iter().map(|m| f(grid.t(m))).collect();
        let mut data = Vec::with_capacity(domain.len() * grid.len());
        for s in nodes {
            if !same_domain(s.domain(), &domain) {
                return Err(Error::DomainMismatch);
            }
            data.extend_from_slice(s.coeffs());
        }
        Self::new(domain, grid, data)
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn node(&self, m: usize) -> &[f64] {
        let n = self.domain.len();
        &self.data[m * n..(m + 1) * n]
    }

    pub fn field(&self, m: usize) -> SpectralField {
        SpectralField::new(self.domain.clone(), Parity::COSINE, self.node(m).to_vec()).expect("length checked")
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    fn check_compatible(&self, other: &SpectralSeries) -> Result<()> {
        if !same_domain(&self.domain, &other.domain) {
            return Err(Error::DomainMismatch);
        }
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub fn sub(&self, other: &SpectralSeries) -> Result<SpectralSeries> {
        self.check_compatible(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self { domain: self.domain.clone(), grid: self.grid, data })
    }

    pub fn scaled(&self, factor: f64) -> SpectralSeries {
        let data = self.data.iter().map(|a| a * factor).collect();
        Self { domain: self.domain.clone(), grid: self.grid, data }
    }
}

/// Per-node norms of a trajectory.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct NodeNorms {
    pub t: f64,
    /// `||u||_{p/2}`
    pub u: f64,
    /// `||v||_{p/2}`
    pub v: f64,
    /// `||grad v||_p`
    pub grad_v: f64,
    pub mean_u: f64,
    pub min_u: f64,
}

impl NodeNorms {
    /// The three-norm summed by the X-norm.
    pub fn total(&self) -> f64 {
        self.u + self.v + self.grad_v
    }
}

/// Time-sampled pair `(u, v)` measured in the X-norm with exponent `p`.
///
/// The gradient of `v` is not stored as grid arrays: its norms are computed once
/// and cached with the other per-node norms, and [`TrajectoryState::grad_v`]
/// rebuilds the field on demand.
#[derive(Clone, Debug)]
pub struct TrajectoryState {
    u: SpectralSeries,
    v: SpectralSeries,
    p: f64,
    norms: OnceLock<Vec<NodeNorms>>,
}

impl TrajectoryState {
    pub fn new(u: SpectralSeries, v: SpectralSeries, p: f64) -> Result<Self> {
        u.check_compatible(&v)?;
        if !(p >= 2.0 && p.is_finite()) {
            return Err(Error::InvalidExponent(p));
        }
        Ok(Self { u, v, p, norms: OnceLock::new() })
    }

    pub fn zeros(domain: Arc<Domain>, grid: TimeGrid, p: f64) -> Result<Self> {
        Self::new(SpectralSeries::zeros(domain.clone(), grid), SpectralSeries::zeros(domain, grid), p)
    }

    /// Samples grid fields `(u(t), v(t))` at every node.
    pub fn from_fields(
        domain: Arc<Domain>,
        grid: TimeGrid,
        p: f64,
        f: impl Fn(f64) -> (ScalarField, ScalarField) + Sync,
    ) -> Result<Self> {
        let pairs: Vec<(ScalarField, ScalarField)> = (0..grid.len()).into_par_iter().map(|m| f(grid.t(m))).collect();
        let mut u = Vec::with_capacity(domain.len() * grid.len());
        let mut v = Vec::with_capacity(domain.len() * grid.len());
        for (a, b) in pairs {
            if !same_domain(a.domain(), &domain) || !same_domain(b.domain(), &domain) {
                return Err(Error::DomainMismatch);
            }
            u.extend(domain.forward(a.values(), Parity::COSINE)?);
            v.extend(domain.forward(b.values(), Parity::COSINE)?);
        }
        Self::new(SpectralSeries::new(domain.clone(), grid, u)?, SpectralSeries::new(domain, grid, v)?, p)
    }

    pub fn domain(&self) -> &Arc<Domain> {
        self.u.domain()
    }

    pub fn grid(&self) -> &TimeGrid {
        self.u.grid()
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.grid().len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.data.is_empty()
    }

    pub fn u_series(&self) -> &SpectralSeries {
        &self.u
    }

    pub fn v_series(&self) -> &SpectralSeries {
        &self.v
    }

    pub fn u(&self, m: usize) -> ScalarField {
        self.u.field(m).to_grid()
    }

    pub fn v(&self, m: usize) -> ScalarField {
        self.v.field(m).to_grid()
    }

    pub fn grad_v(&self, m: usize) -> VectorField {
        let v = self.v.field(m);
        let comps = (0..self.domain().dimension()).map(|a| v.derivative(a).to_grid()).collect();
        VectorField::new(comps).expect("consistent components")
    }

    fn compute_norms(&self) -> Vec<NodeNorms> {
        let half = self.p / 2.0;
        let dom = self.domain().clone();
        (0..self.len())
            .into_par_iter()
            .map(|m| {
                let u = self.u.field(m);
                let v = self.v.field(m);
                let u_grid = dom.inverse(u.coeffs(), Parity::COSINE).expect("length checked");
                let u_norm = if half == 2.0 {
                    u.l2_norm()
                } else {
                    lp_of_values(&u_grid, dom.cell_volume(), half).expect("valid exponent")
                };
                let grads: Vec<SpectralField> = (0..dom.dimension()).map(|a| v.derivative(a)).collect();
                NodeNorms {
                    t: self.grid().t(m),
                    u: u_norm,
                    v: spectral_lp(&v, half).expect("valid exponent"),
                    grad_v: spectral_vector_lp(&grads, self.p).expect("valid exponent"),
                    mean_u: u.mean(),
                    min_u: u_grid.iter().copied().fold(f64::INFINITY, f64::min),
                }
            })
            .collect()
    }

    /// Per-node norms, computed on first use.
    pub fn norms(&self) -> &[NodeNorms] {
        self.norms.get_or_init(|| self.compute_norms())
    }

    /// `(u, v)` difference on a shared grid.
    pub fn difference(&self, other: &TrajectoryState) -> Result<TrajectoryState> {
        if self.p != other.p {
            return Err(Error::Config("trajectories measured with different exponents".into()));
        }
        TrajectoryState::new(self.u.sub(&other.u)?, self.v.sub(&other.v)?, self.p)
    }

    pub fn scaled(&self, factor: f64) -> TrajectoryState {
        TrajectoryState { u: self.u.scaled(factor), v: self.v.scaled(factor), p: self.p, norms: OnceLock::new() }
    }

    /// Norm vectors `(||u||, ||v||, ||grad v||)` as a sampled signal.
    pub fn norm_signal(&self) -> SampledSignal {
        let values = self.norms().iter().map(|n| vec![n.u, n.v, n.grad_v]).collect();
        SampledSignal::new(0.0, self.grid().h(), values)
    }

    /// Per-node CSV: `t, u_norm, v_norm, grad_v_norm, mean_u, min_u`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        crate::io::write_csv(
            path,
            &["t", "u_norm", "v_norm", "grad_v_norm", "mean_u", "min_u"],
            self.norms().iter().map(|n| vec![n.t, n.u, n.v, n.grad_v, n.mean_u, n.min_u]),
        )
    }
}

/// `sup_t (||u||_{p/2} + ||v||_{p/2} + ||grad v||_p)` over the sampled nodes.
pub fn x_norm(s: &TrajectoryState) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    Ok(s.norms().iter().map(NodeNorms::total).fold(0.0, f64::max))
}

/// `||u||_{p/2} + ||v||_{p/2} + ||grad v||_p` of a single state.
pub fn state_norm(u: &ScalarField, v: &ScalarField, p: f64) -> Result<f64> {
    if !same_domain(u.domain(), v.domain()) {
        return Err(Error::DomainMismatch);
    }
    let grad = crate::field::gradient(v)?;
    Ok(crate::field::lp_norm(u, p / 2.0)? + crate::field::lp_norm(v, p / 2.0)? + crate::field::lp_norm(&grad, p)?)
}
