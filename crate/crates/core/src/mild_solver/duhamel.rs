use super::config::{CheckMode, SolverConfig};
use super::constants::SolverConstants;
use super::time_grid::{ExpWeights, FeedWeights, TimeGrid};
use super::trajectory::{x_norm, SpectralSeries, TrajectoryState};
use crate::error::{Error, Result};
use crate::estimate::spectral_lp;
use crate::field::{flux_spectral, gradient, lp_norm, ScalarField};
use crate::forcing::ForcingSpec;
use crate::spectral::{same_domain, to_spectral, Domain, Parity, SpectralField};
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

/// Relative tolerance for "mean zero".
const MEAN_TOL: f64 = 1e-12;

fn mean_violation(coeffs: &[f64]) -> Option<f64> {
    let scale = 1.0 + coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    (coeffs[0].abs() > MEAN_TOL * scale).then_some(coeffs[0])
}

fn enforce(mode: CheckMode, err: Error) -> Result<()> {
    match mode {
        CheckMode::Strict => Err(err),
        CheckMode::Warn => {
            log::warn!("{err}");
            Ok(())
        }
    }
}

/// Steps `U' = -rate_k U + c_k(t)` through the grid with the exponential trapezoidal rule.
fn integrate(initial: &[f64], weights: &ExpWeights, grid: &TimeGrid, source: &[f64]) -> Vec<f64> {
    let n = initial.len();
    let mut out = Vec::with_capacity(n * grid.len());
    out.extend_from_slice(initial);
    for m in 0..grid.steps() {
        let (c0, c1) = (&source[m * n..(m + 1) * n], &source[(m + 1) * n..(m + 2) * n]);
        for k in 0..n {
            let prev = out[m * n + k];
            out.push(weights.e[k] * prev + weights.w0[k] * c0[k] + weights.w1[k] * c1[k]);
        }
    }
    out
}

fn check_field(f: &ScalarField, domain: &Arc<Domain>) -> Result<SpectralField> {
    if !same_domain(f.domain(), domain) {
        return Err(Error::DomainMismatch);
    }
    if f.parity() != Parity::COSINE {
        return Err(Error::ParityMismatch("initial data must have cosine parity".into()));
    }
    to_spectral(f)
}

/// `div(omega grad zeta)` coefficients at every node, node-major.
pub fn flux_series(source: &TrajectoryState) -> Result<Vec<f64>> {
    let nodes: Vec<Result<SpectralField>> = (0..source.len())
        .into_par_iter()
        .map(|m| flux_spectral(&source.u_series().field(m), &source.v_series().field(m)))
        .collect();
    let mut out = Vec::with_capacity(source.domain().len() * source.len());
    for f in nodes {
        out.extend_from_slice(f?.coeffs());
    }
    Ok(out)
}

/// `u(t) = e^{t Lap} u0 - int_0^t e^{(t-s) Lap} div(omega grad zeta)(s) ds + int_0^t e^{(t-s) Lap} g(s) ds`.
///
/// `source = None` drops the chemotaxis term. In strict mode `u0` and every
/// sampled `g` must be mean-zero.
pub fn duhamel_u(
    u0: &ScalarField,
    source: Option<&TrajectoryState>,
    forcing: &ForcingSpec,
    grid: &TimeGrid,
    mode: CheckMode,
) -> Result<SpectralSeries> {
    let domain = forcing.domain().clone();
    let u0 = check_field(u0, &domain)?;
    if let Some(mean) = mean_violation(u0.coeffs()) {
        enforce(mode, Error::MeanNotZero(mean))?;
    }
    let n = domain.len();
    let mut c = match source {
        Some(s) => {
            if !same_domain(s.domain(), &domain) {
                return Err(Error::DomainMismatch);
            }
            if s.grid() != grid {
                return Err(Error::GridMismatch);
            }
            let mut f = flux_series(s)?;
            f.iter_mut().for_each(|x| *x = -*x);
            f
        }
        None => vec![0.0; n * grid.len()],
    };
    let spectral = forcing.spectral()?;
    if spectral.has_g() {
        let g: Vec<Vec<f64>> = (0..grid.len()).into_par_iter().map(|m| spectral.g_at(grid.t(m))).collect();
        if let Some(mean) = g.iter().find_map(|gm| mean_violation(gm)) {
            enforce(mode, Error::MeanNotZero(mean))?;
        }
        for (m, gm) in g.iter().enumerate() {
            for (ci, gi) in c[m * n..(m + 1) * n].iter_mut().zip(gm) {
                *ci += gi;
            }
        }
    }
    let weights = ExpWeights::new(domain.eigenvalues().iter().copied(), grid.h());
    SpectralSeries::new(domain, *grid, integrate(u0.coeffs(), &weights, grid, &c))
}

/// `v(t) = e^{t(Lap-1)} v0 + int_0^t e^{(t-s)(Lap-1)} (u(s) + h(s)) ds`.
///
/// The `u` feed uses [`FeedWeights`], so the free decay of `u` is propagated
/// into `v` exactly; `h` uses the exponential trapezoidal rule.
pub fn duhamel_v(v0: &ScalarField, u: &SpectralSeries, forcing: &ForcingSpec, grid: &TimeGrid) -> Result<SpectralSeries> {
    let domain = forcing.domain().clone();
    let v0 = check_field(v0, &domain)?;
    if !same_domain(u.domain(), &domain) {
        return Err(Error::DomainMismatch);
    }
    if u.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let n = domain.len();
    let spectral = forcing.spectral()?;
    let h: Option<Vec<f64>> = spectral.has_h().then(|| {
        let nodes: Vec<Vec<f64>> = (0..grid.len()).into_par_iter().map(|m| spectral.h_at(grid.t(m))).collect();
        nodes.concat()
    });
    let weights = ExpWeights::new(domain.eigenvalues().iter().map(|l| l + 1.0), grid.h());
    let feed = FeedWeights::new(domain.eigenvalues().iter().copied(), grid.h());
    let ud = u.data();
    let mut out = Vec::with_capacity(n * grid.len());
    out.extend_from_slice(v0.coeffs());
    for m in 0..grid.steps() {
        for k in 0..n {
            let (i0, i1) = (m * n + k, (m + 1) * n + k);
            let mut next = weights.e[k] * out[i0] + feed.a0[k] * ud[i0] + feed.a1[k] * ud[i1];
            if let Some(h) = &h {
                next += weights.w0[k] * h[i0] + weights.w1[k] * h[i1];
            }
            out.push(next);
        }
    }
    SpectralSeries::new(domain, *grid, out)
}

/// The linear solution operator `S(omega, zeta)`: `duhamel_u` then `duhamel_v`.
///
/// `omega_zeta` is ignored when the config turns chemotaxis off.
pub fn solve_linear(
    u0: &ScalarField,
    v0: &ScalarField,
    omega_zeta: Option<&TrajectoryState>,
    forcing: &ForcingSpec,
    config: &SolverConfig,
) -> Result<TrajectoryState> {
    config.validate(forcing.domain())?;
    let grid = config.grid()?;
    let source = if config.chemotaxis { omega_zeta } else { None };
    let u = duhamel_u(u0, source, forcing, &grid, config.mode)?;
    let v = duhamel_v(v0, &u, forcing, &grid)?;
    TrajectoryState::new(u, v, config.p)
}

/// `sup_t ||g||_{p/2} + sup_t ||h||_{p/2}` over the grid nodes.
pub fn forcing_norm(forcing: &ForcingSpec, grid: &TimeGrid, p: f64) -> Result<f64> {
    let spectral = forcing.spectral()?;
    let dom = forcing.domain().clone();
    let sup = |at: &(dyn Fn(f64) -> Vec<f64> + Sync)| -> Result<f64> {
        let vals: Vec<Result<f64>> = (0..grid.len())
            .into_par_iter()
            .map(|m| spectral_lp(&SpectralField::new(dom.clone(), Parity::COSINE, at(grid.t(m)))?, p / 2.0))
            .collect();
        vals.into_iter().try_fold(0.0f64, |a, v| Ok(a.max(v?)))
    };
    let g = if spectral.has_g() { sup(&|t| spectral.g_at(t))? } else { 0.0 };
    let h = if spectral.has_h() { sup(&|t| spectral.h_at(t))? } else { 0.0 };
    Ok(g + h)
}

/// `(||u0||_{p/2} + ||v0||_{p/2}, ||grad v0||_p)`.
pub fn data_norms(u0: &ScalarField, v0: &ScalarField, p: f64) -> Result<(f64, f64)> {
    Ok((lp_norm(u0, p / 2.0)? + lp_norm(v0, p / 2.0)?, lp_norm(&gradient(v0)?, p)?))
}

/// Both sides of the a priori bound of the linear solve.
#[derive(Clone, Debug, Serialize)]
pub struct LinearBoundReport {
    pub x_norm: f64,
    pub data_norm: f64,
    pub grad_v0_norm: f64,
    pub source_x_norm: f64,
    pub forcing_norm: f64,
    /// `C1 |(u0,v0)| + C2 |grad v0| + C3 |(omega,zeta)|_X^2 + C4 |(g,h)|`
    pub bound: f64,
    pub holds: bool,
}

/// Evaluates the a priori bound for a computed linear solution; strict mode
/// turns a violation into an error, warn mode logs it.
pub fn linear_bound(
    solution: &TrajectoryState,
    u0: &ScalarField,
    v0: &ScalarField,
    omega_zeta: Option<&TrajectoryState>,
    forcing: &ForcingSpec,
    constants: &SolverConstants,
    mode: CheckMode,
) -> Result<LinearBoundReport> {
    let p = solution.p();
    let (data_norm, grad_v0_norm) = data_norms(u0, v0, p)?;
    let source_x_norm = match omega_zeta {
        Some(s) => x_norm(s)?,
        None => 0.0,
    };
    let forcing_norm = forcing_norm(forcing, solution.grid(), p)?;
    let bound = constants.c1 * data_norm
        + constants.c2 * grad_v0_norm
        + constants.c3 * source_x_norm * source_x_norm
        + constants.c4 * forcing_norm;
    let lhs = x_norm(solution)?;
    let holds = lhs <= bound * (1.0 + 1e-12);
    if !holds {
        enforce(mode, Error::BoundViolated(format!("x_norm {lhs:e} exceeds bound {bound:e}")))?;
    }
    Ok(LinearBoundReport { x_norm: lhs, data_norm, grad_v0_norm, source_x_norm, forcing_norm, bound, holds })
}
