use crate::error::{Error, Result};
use crate::estimate::{verify_estimate, EstimateConfig, EstimateKind, EstimateReport};
use crate::special::gamma_function;
use crate::spectral::Domain;
use serde::Serialize;
use std::sync::Arc;

/// Constants of the linear a priori bound and the contraction argument.
#[derive(Clone, Debug, Serialize)]
pub struct SolverConstants {
    pub lambda1: f64,
    pub p: f64,
    pub n: usize,
    /// `Gamma(1/2 - n/(2p))`
    pub gamma: f64,
    /// `C = 1/lambda1 + lambda1^{-1/2+n/(2p)} Gamma(1/2 - n/(2p))`
    pub c: f64,
    /// `C'' = 1/(lambda1+1) + lambda1^{-1/2+n/(2p)} Gamma(1/2 - n/(2p))`
    pub c_shifted: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    /// Ball radius of the fixed-point argument.
    pub rho: f64,
    /// `4 C3 rho`
    pub contraction_bound: f64,
}

/// Exponent pairs `(p, q)` at which each estimate enters the bound.
pub fn required_exponents(p: f64) -> [(EstimateKind, f64, f64); 4] {
    [
        (EstimateKind::I, p / 2.0, p / 2.0),
        (EstimateKind::Ii, p, p / 2.0),
        (EstimateKind::Iii, p, p),
        (EstimateKind::Iv, p / 2.0, p / 3.0),
    ]
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// `(C, C'')` from their closed forms.
pub fn gamma_constants(lambda1: f64, n: usize, p: f64) -> Result<(f64, f64, f64)> {
    let arg = 0.5 - n as f64 / (2.0 * p);
    let gamma = gamma_function(arg)?;
    let tail = lambda1.powf(-arg) * gamma;
    Ok((gamma, 1.0 / lambda1 + tail, 1.0 / (lambda1 + 1.0) + tail))
}

/// Assembles `C, C'', C1..C4` from measured estimate constants.
///
/// Each measured `k` is the sup of `lhs / ((1 + t^-a) e^{-lambda1 t} rhs)`. For
/// kinds i and iii at `p = q` the exponent `a` is zero, so the bound actually used
/// is `2 k`; that doubled value enters everywhere the semigroup estimate is
/// applied without its prefactor. `rho` starts at `1/(8 C3)` until a radius is
/// chosen with [`SolverConstants::with_radius`].
pub fn compute_constants(domain: &Domain, p: f64, reports: &[EstimateReport]) -> Result<SolverConstants> {
    let n = domain.dimension();
    if !(p > 3f64.max(n as f64)) || !p.is_finite() {
        return Err(Error::ExponentRegimeViolation { p, n });
    }
    let mut k = [0.0; 4];
    for (slot, (kind, pk, qk)) in required_exponents(p).into_iter().enumerate() {
        let r = reports
            .iter()
            .find(|r| r.kind == kind && close(r.p, pk) && close(r.q, qk))
            .ok_or_else(|| Error::MissingReport(format!("{} at (p, q) = ({pk}, {qk})", kind.label())))?;
        k[slot] = r.k;
    }
    from_estimates(domain.lambda1(), n, p, k)
}

/// As [`compute_constants`] with the four `k` values given directly.
pub fn from_estimates(lambda1: f64, n: usize, p: f64, k: [f64; 4]) -> Result<SolverConstants> {
    let (gamma, c, cs) = gamma_constants(lambda1, n, p)?;
    let [k1, k2, k3, k4] = k;
    let (k1e, k3e) = (2.0 * k1, 2.0 * k3);
    let l = lambda1;
    let c1 = k1e + k1e.max(k1e * k1e / (l + 1.0)) + k1e * k2 * cs;
    let c2 = k3e;
    let c3 = k4 * c + k1e * k4 * c / (l + 1.0) + k2 * k4 * cs * c;
    let c4 = k1e / l + (k1e * k1e / (l * (l + 1.0))).max(k1e / (l + 1.0)) + (k1e * k2 * cs / l).max(k2 * cs);
    let rho = 1.0 / (8.0 * c3);
    Ok(SolverConstants {
        lambda1,
        p,
        n,
        gamma,
        c,
        c_shifted: cs,
        k1,
        k2,
        k3,
        k4,
        c1,
        c2,
        c3,
        c4,
        rho,
        contraction_bound: 4.0 * c3 * rho,
    })
}

impl SolverConstants {
    pub fn with_radius(&self, rho: f64) -> SolverConstants {
        SolverConstants { rho, contraction_bound: 4.0 * self.c3 * rho, ..self.clone() }
    }
}

/// Runs the four estimate verifications at the exponents the bound needs and
/// assembles the constants.
pub fn measure_constants(
    domain: &Arc<Domain>,
    p: f64,
    samples: usize,
    seed: u64,
) -> Result<(SolverConstants, Vec<EstimateReport>)> {
    let reports = required_exponents(p)
        .into_iter()
        .map(|(kind, pk, qk)| verify_estimate(domain, &EstimateConfig::new(kind, pk, qk, samples, seed)))
        .collect::<Result<Vec<_>>>()?;
    Ok((compute_constants(domain, p, &reports)?, reports))
}
