use super::time_grid::TimeGrid;
use crate::error::{Error, Result};
use crate::spectral::Domain;
use serde::{Deserialize, Serialize};

/// How hypothesis checks react to a violation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckMode {
    /// Fail with an error.
    Strict,
    /// Log a warning and continue.
    Warn,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Exponent of the X-norm; must exceed `max(3, n)`.
    pub p: f64,
    pub t_end: f64,
    pub h: f64,
    /// Picard stops once successive iterates are this close in the X-norm.
    pub tolerance: f64,
    pub max_iter: usize,
    pub mode: CheckMode,
    /// Include the `div(u grad v)` term; off gives the linear system.
    pub chemotaxis: bool,
}

impl SolverConfig {
    /// `p = 4`, `h = 0.01`, horizon `40 / lambda1`.
    pub fn for_domain(domain: &Domain) -> Self {
        Self {
            p: 4.0,
            t_end: 40.0 / domain.lambda1(),
            h: 0.01,
            tolerance: 1e-10,
            max_iter: 50,
            mode: CheckMode::Strict,
            chemotaxis: true,
        }
    }

    pub fn validate(&self, domain: &Domain) -> Result<()> {
        let n = domain.dimension();
        if !(self.p > 3f64.max(n as f64)) || !self.p.is_finite() {
            return Err(Error::ExponentRegimeViolation { p: self.p, n });
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        self.grid().map(|_| ())
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.h, self.t_end)
    }
}
