use super::config::{CheckMode, SolverConfig};
use super::constants::SolverConstants;
use super::duhamel::{data_norms, forcing_norm, solve_linear};
use super::trajectory::{x_norm, TrajectoryState};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::forcing::ForcingSpec;
use serde::Serialize;

/// Iterations with a ratio of at least one tolerated before giving up.
pub const DIVERGENCE_PATIENCE: usize = 5;

/// The ball-invariance check `a + C3 rho^2 <= rho` with `rho < 1/(4 C3)`.
#[derive(Clone, Debug, Serialize)]
pub struct SmallnessGate {
    /// `|u0|_{p/2} + |v0|_{p/2} + |grad v0|_p`
    pub data_norm: f64,
    pub forcing_norm: f64,
    /// `a = max(C1, C2) data_norm + C4 forcing_norm`
    pub a: f64,
    /// X-norm of the linear response `S(0, 0)`.
    pub linear_response: f64,
    /// Smallest radius with `a + C3 rho^2 <= rho`, if any.
    pub rho_min: Option<f64>,
    pub rho: f64,
    pub contraction_bound: f64,
    pub holds: bool,
}

/// Chooses the ball radius and evaluates the gate.
///
/// The radius starts from twice the linear response, is raised to the smallest
/// invariant radius when that is larger, and is capped at `1/(8 C3)` unless the
/// invariant radius itself exceeds the cap.
pub fn smallness_gate(constants: &SolverConstants, data_norm: f64, forcing_norm: f64, linear_response: f64) -> SmallnessGate {
    let c3 = constants.c3;
    let a = constants.c1.max(constants.c2) * data_norm + constants.c4 * forcing_norm;
    let disc = 1.0 - 4.0 * a * c3;
    let rho_min = (disc >= 0.0).then(|| 2.0 * a / (1.0 + disc.sqrt()));
    let rho = match rho_min {
        Some(r) => (2.0 * linear_response).max(r).min((1.0 / (8.0 * c3)).max(r)),
        None => 2.0 * linear_response,
    };
    let holds = rho_min.is_some() && rho < 1.0 / (4.0 * c3) && a + c3 * rho * rho <= rho * (1.0 + 1e-12);
    SmallnessGate {
        data_norm,
        forcing_norm,
        a,
        linear_response,
        rho_min,
        rho,
        contraction_bound: 4.0 * c3 * rho,
        holds,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PicardDiagnostics {
    pub iterations: usize,
    /// `|X_{k+1} - X_k|_X` per iteration.
    pub differences: Vec<f64>,
    /// Successive difference ratios.
    pub ratios: Vec<f64>,
    /// Largest ratio from the second iterate on, ignoring differences at roundoff level.
    pub empirical_contraction: f64,
    /// `|S(X) - X|_X` at the returned iterate.
    pub residual: f64,
    pub solution_x_norm: f64,
    pub gate: SmallnessGate,
    pub constants: SolverConstants,
}

/// Differences below this fraction of the solution size are roundoff.
const RATIO_FLOOR: f64 = 1e-12;

/// Solves the nonlinear mild equation by iterating `X <- S(X)` from the zero trajectory.
pub fn picard_solve(
    u0: &ScalarField,
    v0: &ScalarField,
    forcing: &ForcingSpec,
    config: &SolverConfig,
    constants: &SolverConstants,
) -> Result<(TrajectoryState, PicardDiagnostics)> {
    picard_solve_from(u0, v0, forcing, config, constants, None)
}

/// As [`picard_solve`], starting from `initial_guess` when given.
pub fn picard_solve_from(
    u0: &ScalarField,
    v0: &ScalarField,
    forcing: &ForcingSpec,
    config: &SolverConfig,
    constants: &SolverConstants,
    initial_guess: Option<&TrajectoryState>,
) -> Result<(TrajectoryState, PicardDiagnostics)> {
    config.validate(forcing.domain())?;
    let grid = config.grid()?;
    let p = config.p;

    let linear = solve_linear(u0, v0, None, forcing, config)?;
    let (pair, grad) = data_norms(u0, v0, p)?;
    let gate = smallness_gate(constants, pair + grad, forcing_norm(forcing, &grid, p)?, x_norm(&linear)?);
    if !gate.holds {
        let msg = format!(
            "a = {:e}, C3 = {:e}, rho = {:e}, need a + C3 rho^2 <= rho < 1/(4 C3) = {:e}",
            gate.a,
            constants.c3,
            gate.rho,
            0.25 / constants.c3
        );
        match config.mode {
            CheckMode::Strict => return Err(Error::SmallnessViolated(msg)),
            CheckMode::Warn => log::warn!("smallness gate fails: {msg}"),
        }
    }
    let constants = constants.with_radius(gate.rho);

    let mut current = match initial_guess {
        Some(g) => {
            if g.grid() != &grid {
                return Err(Error::GridMismatch);
            }
            g.clone()
        }
        None => TrajectoryState::zeros(forcing.domain().clone(), grid, p)?,
    };
    // From the zero guess the first iterate is the linear response.
    let mut next = match initial_guess {
        Some(_) => solve_linear(u0, v0, Some(&current), forcing, config)?,
        None => linear,
    };
    let mut differences = Vec::new();
    let mut ratios = Vec::new();
    let mut stalled = 0;
    loop {
        let diff = x_norm(&next.difference(&current)?)?;
        if !diff.is_finite() {
            return Err(Error::NonFinite("Picard difference"));
        }
        if let Some(prev) = differences.last() {
            let r = if *prev > 0.0 { diff / prev } else { 0.0 };
            ratios.push(r);
            stalled = if r >= 1.0 { stalled + 1 } else { 0 };
        }
        differences.push(diff);
        log::debug!("picard iteration {}: difference {diff:e}", differences.len());
        current = next;
        if diff <= config.tolerance {
            break;
        }
        if stalled >= DIVERGENCE_PATIENCE {
            return Err(Error::NoConvergence(format!(
                "difference ratio at least 1 for {DIVERGENCE_PATIENCE} iterations (last difference {diff:e})"
            )));
        }
        if differences.len() >= config.max_iter {
            return Err(Error::NoConvergence(format!(
                "{} iterations, last difference {diff:e} above tolerance {:e}",
                config.max_iter, config.tolerance
            )));
        }
        next = solve_linear(u0, v0, Some(&current), forcing, config)?;
    }

    let check = solve_linear(u0, v0, Some(&current), forcing, config)?;
    let residual = x_norm(&check.difference(&current)?)?;
    let solution_x_norm = x_norm(&current)?;
    let floor = RATIO_FLOOR * solution_x_norm.max(f64::MIN_POSITIVE);
    let empirical_contraction = ratios
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(i, _)| differences[*i] > floor && differences[i + 1] > floor)
        .map(|(_, r)| *r)
        .fold(0.0, f64::max);
    Ok((
        current,
        PicardDiagnostics {
            iterations: differences.len(),
            differences,
            ratios,
            empirical_contraction,
            residual,
            solution_x_norm,
            gate,
            constants,
        },
    ))
}
