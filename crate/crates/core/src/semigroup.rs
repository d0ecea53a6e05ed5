//! The Neumann heat semigroup and its relatives, applied exactly in the
//! eigenbasis: `e^{t Laplace}`, `e^{t (Laplace - Id)}`, `grad e^{t Laplace}` and
//! `e^{t Laplace} div`.

use crate::error::{Error, Result};
use crate::field::{spectral_divergence, spectral_gradient, ScalarField, VectorField};
use crate::spectral::{to_spectral, SpectralField};

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::NegativeTime(t))
    }
}

/// Multiplies coefficient `k` by `e^{-lambda_k t}`.
pub fn heat_spectral(f: &SpectralField, t: f64) -> Result<SpectralField> {
    check_time(t)?;
    let mut out = f.clone();
    let ev = f.domain().eigenvalues();
    for (c, l) in out.coeffs_mut().iter_mut().zip(ev) {
        *c *= (-l * t).exp();
    }
    Ok(out)
}

/// `e^{-t} e^{t Laplace} f`.
pub fn shifted_spectral(f: &SpectralField, t: f64) -> Result<SpectralField> {
    let mut out = heat_spectral(f, t)?;
    let damp = (-t).exp();
    for c in out.coeffs_mut() {
        *c *= damp;
    }
    Ok(out)
}

pub fn heat_propagate(f: &ScalarField, t: f64) -> Result<ScalarField> {
    Ok(heat_spectral(&to_spectral(f)?, t)?.to_grid())
}

pub fn shifted_propagate(f: &ScalarField, t: f64) -> Result<ScalarField> {
    Ok(shifted_spectral(&to_spectral(f)?, t)?.to_grid())
}

/// `grad e^{t Laplace} f`, times `e^{-t}` when `shifted`.
///
/// `t = 0` is accepted: every grid field is band-limited, so the gradient of
/// the data itself is well defined here.
pub fn grad_propagate(f: &ScalarField, t: f64, shifted: bool) -> Result<VectorField> {
    let s = to_spectral(f)?;
    let evolved = if shifted { shifted_spectral(&s, t)? } else { heat_spectral(&s, t)? };
    VectorField::new(spectral_gradient(&evolved).iter().map(SpectralField::to_grid).collect())
}

/// `e^{t Laplace} div w`.
pub fn propagate_div(w: &VectorField, t: f64) -> Result<ScalarField> {
    check_time(t)?;
    let comps = w.components().iter().map(to_spectral).collect::<Result<Vec<_>>>()?;
    Ok(heat_spectral(&spectral_divergence(&comps)?, t)?.to_grid())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{gradient, lp_norm};
    use crate::spectral::{assemble_domain, Domain};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn square() -> Arc<Domain> {
        assemble_domain(&[PI, PI], &[32, 32]).unwrap()
    }

    #[test]
    fn eigenfunction_decay() {
        let d = square();
        let cx = ScalarField::from_fn(d.clone(), |x| x[0].cos());
        let out = heat_propagate(&cx, 1.0).unwrap();
        assert!(out.max_abs_diff(&cx.scaled((-1.0f64).exp())) < 1e-13);
        let out = shifted_propagate(&cx, 1.0).unwrap();
        assert!(out.max_abs_diff(&cx.scaled((-2.0f64).exp())) < 1e-13);
    }

    #[test]
    fn constants_are_invariant() {
        let d = square();
        let c = ScalarField::from_fn(d.clone(), |_| 3.0);
        assert!(heat_propagate(&c, 5.3).unwrap().max_abs_diff(&c) < 1e-13);
        let one = ScalarField::from_fn(d.clone(), |_| 1.0);
        let half = shifted_propagate(&one, 2f64.ln()).unwrap();
        assert!(half.values().iter().all(|v| (v - 0.5).abs() < 1e-14));
        let g = grad_propagate(&c, 0.4, false).unwrap();
        assert!(lp_norm(&g, f64::INFINITY).unwrap() < 1e-13);
    }

    #[test]
    fn negative_time_rejected() {
        let d = square();
        let c = ScalarField::zeros(d);
        assert!(matches!(heat_propagate(&c, -1e-9), Err(Error::NegativeTime(_))));
        assert!(matches!(grad_propagate(&c, -1.0, true), Err(Error::NegativeTime(_))));
    }

    #[test]
    fn grad_and_div_propagators_on_cos_x() {
        let d = square();
        let cx = ScalarField::from_fn(d.clone(), |x| x[0].cos());
        let g = grad_propagate(&cx, 1.0, false).unwrap();
        let e = (-1.0f64).exp();
        let expected = ScalarField::from_fn(d.clone(), |x| -e * x[0].sin());
        assert!(g.component(0).max_abs_diff(&expected) < 1e-13);
        assert!(g.component(1).values().iter().all(|v| v.abs() < 1e-13));

        let w = gradient(&cx).unwrap();
        let out = propagate_div(&w, 1.0).unwrap();
        assert!(out.max_abs_diff(&cx.scaled(-e)) < 1e-13);

        let zero = VectorField::zeros(d);
        assert!(propagate_div(&zero, 1.0).unwrap().values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn shifted_is_bitwise_damped_heat() {
        let d = square();
        let f = ScalarField::from_fn(d.clone(), |x| (x[0] * 1.3).sin() * (x[1] - 0.2).cos());
        let s = to_spectral(&f).unwrap();
        let t = 0.37;
        let a = shifted_spectral(&s, t).unwrap();
        let b = heat_spectral(&s, t).unwrap().scaled((-t).exp());
        assert_eq!(a.coeffs(), b.coeffs());
    }
}
