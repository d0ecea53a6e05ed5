//! Forcing data `(g, h)`: an almost periodic part (finite sums of sinusoids
//! times spatial profiles) plus an optional vanishing tail.

use crate::error::{Error, Result};
use crate::field::{project_mean_zero, ScalarField};
use crate::spectral::{same_domain, to_spectral, Domain, SpectralField};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

/// `amplitude * sin(frequency * t + phase)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sinusoid {
    pub frequency: f64,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

impl Sinusoid {
    pub fn eval(&self, t: f64) -> f64 {
        self.amplitude * (self.frequency * t + self.phase).sin()
    }
}

/// Envelope of the vanishing part.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Tail {
    None,
    /// `c / (1 + t)`
    Reciprocal { c: f64 },
    /// `c * exp(-beta t)`
    Exponential { c: f64, beta: f64 },
}

impl Tail {
    pub fn envelope(&self, t: f64) -> f64 {
        match *self {
            Tail::None => 0.0,
            Tail::Reciprocal { c } => c / (1.0 + t),
            Tail::Exponential { c, beta } => c * (-beta * t).exp(),
        }
    }
}

/// Spatial profile descriptor.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    Constant,
    CosX,
    CosY,
    CosXCosY,
    File(PathBuf),
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "constant" => Profile::Constant,
            "cos_x" => Profile::CosX,
            "cos_y" => Profile::CosY,
            "cos_x_cos_y" => Profile::CosXCosY,
            "" => return Err(Error::Config("empty profile name".into())),
            path => Profile::File(PathBuf::from(path)),
        })
    }
}

impl Profile {
    /// Grid field of this profile; the cosines are the first mode on each axis.
    pub fn resolve(&self, domain: &Arc<Domain>) -> Result<ScalarField> {
        let wave = |axis: usize| {
            if axis >= domain.dimension() {
                return Err(Error::Config(format!("profile needs axis {axis} on a {}-d domain", domain.dimension())));
            }
            Ok(std::f64::consts::PI / domain.lengths()[axis])
        };
        Ok(match self {
            Profile::Constant => ScalarField::from_fn(domain.clone(), |_| 1.0),
            Profile::CosX => {
                let k = wave(0)?;
                ScalarField::from_fn(domain.clone(), |x| (k * x[0]).cos())
            }
            Profile::CosY => {
                let k = wave(1)?;
                ScalarField::from_fn(domain.clone(), |x| (k * x[1]).cos())
            }
            Profile::CosXCosY => {
                let (kx, ky) = (wave(0)?, wave(1)?);
                ScalarField::from_fn(domain.clone(), |x| (kx * x[0]).cos() * (ky * x[1]).cos())
            }
            Profile::File(path) => {
                let f = crate::io::read_field(path)?;
                if f.domain().as_ref() != domain.as_ref() {
                    return Err(Error::DomainMismatch);
                }
                ScalarField::new(domain.clone(), f.into_values())?
            }
        })
    }
}

#[derive(Clone, Debug)]
pub struct ApTerm {
    pub sinusoids: Vec<Sinusoid>,
    pub profile: ScalarField,
}

impl ApTerm {
    pub fn envelope(&self, t: f64) -> f64 {
        self.sinusoids.iter().map(|s| s.eval(t)).sum()
    }
}

#[derive(Clone, Debug)]
pub struct TailTerm {
    pub tail: Tail,
    pub profile: ScalarField,
}

/// Forcing of one equation.
#[derive(Clone, Debug, Default)]
pub struct ComponentForcing {
    pub ap: Vec<ApTerm>,
    pub tail: Option<TailTerm>,
}

impl ComponentForcing {
    fn profiles(&self) -> impl Iterator<Item = &ScalarField> {
        self.ap.iter().map(|a| &a.profile).chain(self.tail.iter().map(|t| &t.profile))
    }

    fn terms(&self) -> Vec<(Envelope, &ScalarField)> {
        let mut out: Vec<(Envelope, &ScalarField)> =
            self.ap.iter().map(|a| (Envelope::Ap(a.sinusoids.clone()), &a.profile)).collect();
        if let Some(t) = &self.tail {
            out.push((Envelope::Tail(t.tail), &t.profile));
        }
        out
    }
}

#[derive(Clone, Debug)]
enum Envelope {
    Ap(Vec<Sinusoid>),
    Tail(Tail),
}

impl Envelope {
    fn eval(&self, t: f64) -> f64 {
        match self {
            Envelope::Ap(s) => s.iter().map(|s| s.eval(t)).sum(),
            Envelope::Tail(tail) => tail.envelope(t),
        }
    }
}

/// `(g, h)` on a fixed domain.
#[derive(Clone, Debug)]
pub struct ForcingSpec {
    domain: Arc<Domain>,
    g: ComponentForcing,
    h: ComponentForcing,
    mean_zero_g: bool,
}

impl ForcingSpec {
    /// When `mean_zero_g` is set, every profile of `g` is projected to mean zero.
    pub fn new(domain: Arc<Domain>, mut g: ComponentForcing, h: ComponentForcing, mean_zero_g: bool) -> Result<Self> {
        for f in g.profiles().chain(h.profiles()) {
            if !same_domain(f.domain(), &domain) {
                return Err(Error::DomainMismatch);
            }
        }
        let sinusoids = g.ap.iter().chain(&h.ap).flat_map(|a| &a.sinusoids);
        for s in sinusoids {
            if !(s.frequency.is_finite() && s.amplitude.is_finite() && s.phase.is_finite()) {
                return Err(Error::NonFinite("sinusoid"));
            }
        }
        if mean_zero_g {
            for a in &mut g.ap {
                a.profile = project_mean_zero(&a.profile);
            }
            if let Some(t) = &mut g.tail {
                t.profile = project_mean_zero(&t.profile);
            }
        }
        Ok(Self { domain, g, h, mean_zero_g })
    }

    pub fn zero(domain: Arc<Domain>) -> Self {
        Self { domain, g: ComponentForcing::default(), h: ComponentForcing::default(), mean_zero_g: true }
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn g(&self) -> &ComponentForcing {
        &self.g
    }

    pub fn h(&self) -> &ComponentForcing {
        &self.h
    }

    pub fn mean_zero_g(&self) -> bool {
        self.mean_zero_g
    }

    /// True when both components carry no terms.
    pub fn is_zero(&self) -> bool {
        self.g.ap.is_empty() && self.g.tail.is_none() && self.h.ap.is_empty() && self.h.tail.is_none()
    }

    /// The almost periodic part alone.
    pub fn without_tail(&self) -> ForcingSpec {
        let mut out = self.clone();
        out.g.tail = None;
        out.h.tail = None;
        out
    }

    /// Replaces the tail of both components.
    pub fn with_tail(&self, g_tail: Option<TailTerm>, h_tail: Option<TailTerm>) -> Result<ForcingSpec> {
        let mut g = self.g.clone();
        let mut h = self.h.clone();
        g.tail = g_tail;
        h.tail = h_tail;
        ForcingSpec::new(self.domain.clone(), g, h, self.mean_zero_g)
    }

    /// Coefficient-space form for the solver.
    pub fn spectral(&self) -> Result<SpectralForcing> {
        let conv = |c: &ComponentForcing| -> Result<Vec<(Envelope, SpectralField)>> {
            c.terms().into_iter().map(|(e, f)| Ok((e, to_spectral(f)?))).collect()
        };
        Ok(SpectralForcing { len: self.domain.len(), g: conv(&self.g)?, h: conv(&self.h)? })
    }
}

fn evaluate_component(domain: &Arc<Domain>, c: &ComponentForcing, t: f64) -> ScalarField {
    let mut values = vec![0.0; domain.len()];
    for (env, profile) in c.terms() {
        let a = env.eval(t);
        for (v, p) in values.iter_mut().zip(profile.values()) {
            *v += a * p;
        }
    }
    ScalarField::new(domain.clone(), values).expect("finite forcing")
}

/// `(g(t), h(t))` on the grid.
pub fn evaluate_forcing(spec: &ForcingSpec, t: f64) -> Result<(ScalarField, ScalarField)> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::NegativeTime(t));
    }
    Ok((evaluate_component(&spec.domain, &spec.g, t), evaluate_component(&spec.domain, &spec.h, t)))
}

/// Forcing with profiles pre-transformed to cosine coefficients.
#[derive(Clone, Debug)]
pub struct SpectralForcing {
    len: usize,
    g: Vec<(Envelope, SpectralField)>,
    h: Vec<(Envelope, SpectralField)>,
}

impl SpectralForcing {
    fn accumulate(terms: &[(Envelope, SpectralField)], t: f64, out: &mut [f64]) {
        for (env, f) in terms {
            let a = env.eval(t);
            for (o, c) in out.iter_mut().zip(f.coeffs()) {
                *o += a * c;
            }
        }
    }

    /// Coefficients of `g(t)`.
    pub fn g_at(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.len];
        Self::accumulate(&self.g, t, &mut out);
        out
    }

    /// Coefficients of `h(t)`.
    pub fn h_at(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.len];
        Self::accumulate(&self.h, t, &mut out);
        out
    }

    pub fn has_g(&self) -> bool {
        !self.g.is_empty()
    }

    pub fn has_h(&self) -> bool {
        !self.h.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::assemble_domain;
    use std::f64::consts::{PI, SQRT_2};

    fn square() -> Arc<Domain> {
        assemble_domain(&[PI, PI], &[16, 16]).unwrap()
    }

    fn cos_x(d: &Arc<Domain>) -> ScalarField {
        Profile::CosX.resolve(d).unwrap()
    }

    #[test]
    fn single_sinusoid_at_quarter_period() {
        let d = square();
        let s = Sinusoid { frequency: 1.0, amplitude: 1.0, phase: 0.0 };
        let g = ComponentForcing { ap: vec![ApTerm { sinusoids: vec![s], profile: cos_x(&d) }], tail: None };
        let spec = ForcingSpec::new(d.clone(), g, ComponentForcing::default(), true).unwrap();
        let (g, h) = evaluate_forcing(&spec, PI / 2.0).unwrap();
        assert!(g.max_abs_diff(&cos_x(&d)) < 1e-15);
        assert!(h.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn reciprocal_tail_at_zero() {
        let d = square();
        let one = Profile::Constant.resolve(&d).unwrap();
        let h = ComponentForcing { ap: vec![], tail: Some(TailTerm { tail: Tail::Reciprocal { c: 1.0 }, profile: one.clone() }) };
        let spec = ForcingSpec::new(d, ComponentForcing::default(), h, true).unwrap();
        let (_, h) = evaluate_forcing(&spec, 0.0).unwrap();
        assert!(h.max_abs_diff(&one) == 0.0);
    }

    #[test]
    fn quasi_periodic_closed_form() {
        let d = square();
        let sins = vec![
            Sinusoid { frequency: 1.0, amplitude: 1.0, phase: 0.0 },
            Sinusoid { frequency: SQRT_2, amplitude: 1.0, phase: 0.0 },
        ];
        let g = ComponentForcing { ap: vec![ApTerm { sinusoids: sins, profile: cos_x(&d) }], tail: None };
        let spec = ForcingSpec::new(d.clone(), g, ComponentForcing::default(), true).unwrap();
        let (g, _) = evaluate_forcing(&spec, 10.0).unwrap();
        let env = 10f64.sin() + (SQRT_2 * 10.0).sin();
        let want = ScalarField::from_fn(d, |x| env * x[0].cos());
        assert!(g.max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn mean_zero_projection_and_spectral_agreement() {
        let d = square();
        let bumpy = ScalarField::from_fn(d.clone(), |x| 2.0 + x[0].cos() * x[1]);
        let s = Sinusoid { frequency: 0.7, amplitude: 0.3, phase: 0.1 };
        let g = ComponentForcing {
            ap: vec![ApTerm { sinusoids: vec![s], profile: bumpy.clone() }],
            tail: Some(TailTerm { tail: Tail::Exponential { c: 2.0, beta: 0.5 }, profile: bumpy }),
        };
        let spec = ForcingSpec::new(d.clone(), g, ComponentForcing::default(), true).unwrap();
        for t in [0.0, 1.3, 7.0] {
            let (g, _) = evaluate_forcing(&spec, t).unwrap();
            assert!(g.mean().abs() < 1e-12);
            let via = SpectralField::new(d.clone(), Default::default(), spec.spectral().unwrap().g_at(t)).unwrap().to_grid();
            assert!(via.max_abs_diff(&g) < 1e-12);
        }
        assert!(!spec.without_tail().is_zero());
        assert!(ForcingSpec::zero(d).is_zero());
    }

    #[test]
    fn profile_names() {
        assert_eq!("cos_x_cos_y".parse::<Profile>().unwrap(), Profile::CosXCosY);
        assert_eq!("data/f.bin".parse::<Profile>().unwrap(), Profile::File("data/f.bin".into()));
        let line = assemble_domain(&[PI], &[16]).unwrap();
        assert!(Profile::CosY.resolve(&line).is_err());
        assert!(evaluate_forcing(&ForcingSpec::zero(square()), -1.0).is_err());
    }
}
