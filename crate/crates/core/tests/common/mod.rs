//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use ksmild::field::ScalarField;
use ksmild::forcing::{ApTerm, ComponentForcing, ForcingSpec, Profile, Sinusoid, Tail, TailTerm};
use ksmild::mild_solver::{measure_constants, solve_linear, SolverConfig, SolverConstants, TrajectoryState};
use ksmild::spectral::{assemble_domain, Domain};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, SQRT_2};
use std::sync::{Arc, OnceLock};

pub fn square(n: usize) -> Arc<Domain> {
    assemble_domain(&[PI, PI], &[n, n]).unwrap()
}

/// `amp (sin t + sin sqrt2 t) cos x` in `g`, nothing in `h`.
pub fn ap_forcing(d: &Arc<Domain>, amp: f64) -> ForcingSpec {
    let sinusoids = vec![
        Sinusoid { frequency: 1.0, amplitude: amp, phase: 0.0 },
        Sinusoid { frequency: SQRT_2, amplitude: amp, phase: 0.0 },
    ];
    let g = ComponentForcing { ap: vec![ApTerm { sinusoids, profile: Profile::CosX.resolve(d).unwrap() }], tail: None };
    ForcingSpec::new(d.clone(), g, ComponentForcing::default(), true).unwrap()
}

/// Initial data of the default nonlinear scenario.
pub fn default_data(d: &Arc<Domain>) -> (ScalarField, ScalarField) {
    (ScalarField::from_fn(d.clone(), |x| 5e-4 * x[0].cos() * x[1].cos()), ScalarField::zeros(d.clone()))
}

/// Constants measured once per test binary on the 32^2 square.
pub fn constants() -> &'static SolverConstants {
    static C: OnceLock<SolverConstants> = OnceLock::new();
    C.get_or_init(|| measure_constants(&square(32), 4.0, 32, 7).unwrap().0)
}

pub fn nonlinear_config(d: &Domain) -> SolverConfig {
    SolverConfig { tolerance: 1e-12, ..SolverConfig::for_domain(d) }
}

/// Cosine coefficients `a_k` with `f = sum_k a_k prod_i cos(k_i pi x_i / L_i)`,
/// by direct summation over the nodes.
pub fn project(d: &Domain, values: &[f64]) -> Vec<f64> {
    let n = d.len();
    let res = d.resolution();
    let lengths = d.lengths();
    (0..n)
        .map(|k| {
            let mk = d.multi_index(k);
            let mut w = 1.0;
            for (i, &r) in res.iter().enumerate() {
                w *= if mk[i] == 0 { 1.0 } else { 2.0 } / r as f64;
            }
            let s: f64 = (0..n)
                .map(|j| {
                    let x = d.point(j);
                    let basis: f64 = (0..res.len()).map(|i| (mk[i] as f64 * PI * x[i] / lengths[i]).cos()).product();
                    values[j] * basis
                })
                .sum();
            w * s
        })
        .collect()
}

pub fn synthesize(d: &Domain, coeffs: &[f64]) -> Vec<f64> {
    let n = d.len();
    let lengths = d.lengths();
    let dim = d.dimension();
    (0..n)
        .map(|j| {
            let x = d.point(j);
            (0..n)
                .filter(|k| coeffs[*k] != 0.0)
                .map(|k| {
                    let mk = d.multi_index(k);
                    coeffs[k] * (0..dim).map(|i| (mk[i] as f64 * PI * x[i] / lengths[i]).cos()).product::<f64>()
                })
                .sum()
        })
        .collect()
}

/// Random low-mode cosine series; the mean is left out when `mean_zero`.
fn random_modes(d: &Domain, rng: &mut ChaCha8Rng, max_k: usize, scale: f64, mean_zero: bool) -> Vec<f64> {
    let mut c = vec![0.0; d.len()];
    for k in 0..d.len() {
        let mk = d.multi_index(k);
        if mk.iter().take(d.dimension()).all(|&m| m <= max_k) && !(mean_zero && mk.iter().all(|&m| m == 0)) {
            c[k] = scale * rng.random_range(-1.0..1.0);
        }
    }
    c
}

/// Exact grid values of `div(phi grad psi)` for cosine series `phi`, `psi`.
fn flux_values(d: &Domain, phi: &[f64], psi: &[f64]) -> Vec<f64> {
    let dim = d.dimension();
    let lengths = d.lengths();
    let basis = |k: usize, x: &[f64; 3]| -> f64 {
        let mk = d.multi_index(k);
        (0..dim).map(|i| (mk[i] as f64 * PI * x[i] / lengths[i]).cos()).product()
    };
    let grad = |k: usize, x: &[f64; 3], axis: usize| -> f64 {
        let mk = d.multi_index(k);
        (0..dim)
            .map(|i| {
                let w = mk[i] as f64 * PI / lengths[i];
                if i == axis { -w * (w * x[i]).sin() } else { (w * x[i]).cos() }
            })
            .product()
    };
    let active = |c: &[f64]| (0..c.len()).filter(|k| c[*k] != 0.0).collect::<Vec<_>>();
    let (pa, qa) = (active(phi), active(psi));
    (0..d.len())
        .map(|j| {
            let x = d.point(j);
            let f: f64 = pa.iter().map(|&k| phi[k] * basis(k, &x)).sum();
            let lap: f64 = qa.iter().map(|&k| -d.eigenvalues()[k] * psi[k] * basis(k, &x)).sum();
            let dot: f64 = (0..dim)
                .map(|a| {
                    let gp: f64 = pa.iter().map(|&k| phi[k] * grad(k, &x, a)).sum();
                    let gq: f64 = qa.iter().map(|&k| psi[k] * grad(k, &x, a)).sum();
                    gp * gq
                })
                .sum();
            dot + f * lap
        })
        .collect()
}

/// A randomized linear problem: data, forcing, and a frozen source pair
/// `(a(t) phi, b(t) psi)` whose flux is `a(t) b(t) div(phi grad psi)`.
pub struct RandomProblem {
    pub domain: Arc<Domain>,
    pub u0: Vec<f64>,
    pub v0: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub flux: Vec<f64>,
    pub g_profile: Vec<f64>,
    pub h_profile: Vec<f64>,
    pub g_sin: Sinusoid,
    pub g_tail: f64,
    pub h_sin: Sinusoid,
    pub a: (f64, f64, f64),
    pub b: (f64, f64),
}

impl RandomProblem {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ly = rng.random_range(2.0..4.0);
        let domain = assemble_domain(&[PI, ly], &[16, 16]).unwrap();
        let d = domain.as_ref();
        let u0 = random_modes(d, &mut rng, 3, 0.5, true);
        let v0 = random_modes(d, &mut rng, 3, 0.5, false);
        let phi = random_modes(d, &mut rng, 2, 0.1, false);
        let psi = random_modes(d, &mut rng, 2, 0.1, true);
        let flux = project(d, &flux_values(d, &phi, &psi));
        let g_profile = random_modes(d, &mut rng, 2, 1.0, true);
        let h_profile = random_modes(d, &mut rng, 2, 1.0, false);
        let mut sin = |amp: f64| Sinusoid {
            frequency: rng.random_range(0.5..1.5),
            amplitude: amp,
            phase: rng.random_range(0.0..PI),
        };
        let (g_sin, h_sin) = (sin(0.01), sin(0.01));
        let a = (0.5, 0.3, rng.random_range(0.3..0.7));
        let b = (0.5, rng.random_range(0.3..0.7));
        Self { domain, u0, v0, phi, psi, flux, g_profile, h_profile, g_sin, g_tail: 0.01, h_sin, a, b }
    }

    pub fn a_at(&self, t: f64) -> f64 {
        self.a.0 + self.a.1 * (self.a.2 * t).sin()
    }

    pub fn b_at(&self, t: f64) -> f64 {
        self.b.0 * (self.b.1 * t).cos()
    }

    fn field(&self, c: &[f64]) -> ScalarField {
        ScalarField::new(self.domain.clone(), synthesize(&self.domain, c)).unwrap()
    }

    pub fn forcing(&self) -> ForcingSpec {
        let gp = self.field(&self.g_profile);
        let g = ComponentForcing {
            ap: vec![ApTerm { sinusoids: vec![self.g_sin], profile: gp.clone() }],
            tail: Some(TailTerm { tail: Tail::Reciprocal { c: self.g_tail }, profile: gp }),
        };
        let h = ComponentForcing {
            ap: vec![ApTerm { sinusoids: vec![self.h_sin], profile: self.field(&self.h_profile) }],
            tail: None,
        };
        ForcingSpec::new(self.domain.clone(), g, h, true).unwrap()
    }

    /// The library's linear solve with the frozen source pair.
    pub fn library_solve(&self, t_end: f64, h: f64) -> TrajectoryState {
        let cfg = SolverConfig { t_end, h, ..SolverConfig::for_domain(&self.domain) };
        let grid = cfg.grid().unwrap();
        let (phi, psi) = (self.field(&self.phi), self.field(&self.psi));
        let source = TrajectoryState::from_fields(self.domain.clone(), grid, cfg.p, |t| {
            (phi.scaled(self.a_at(t)), psi.scaled(self.b_at(t)))
        })
        .unwrap();
        solve_linear(&self.field(&self.u0), &self.field(&self.v0), Some(&source), &self.forcing(), &cfg).unwrap()
    }

    fn sources(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let ab = self.a_at(t) * self.b_at(t);
        let g = self.g_sin.eval(t) + self.g_tail / (1.0 + t);
        let h = self.h_sin.eval(t);
        let su = (0..self.flux.len()).map(|k| -ab * self.flux[k] + g * self.g_profile[k]).collect();
        let sv = self.h_profile.iter().map(|c| h * c).collect();
        (su, sv)
    }

    /// One implicit trapezoid step of the Galerkin system
    /// `u' = -lambda u + s_u`, `v' = -(lambda + 1) v + u + s_v`.
    fn trapezoid(&self, t: f64, h: f64, u: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (su0, sv0) = self.sources(t);
        let (su1, sv1) = self.sources(t + h);
        let ev = self.domain.eigenvalues();
        let mut nu = vec![0.0; u.len()];
        let mut nv = vec![0.0; v.len()];
        for k in 0..u.len() {
            let l = ev[k];
            nu[k] = ((1.0 - 0.5 * h * l) * u[k] + 0.5 * h * (su0[k] + su1[k])) / (1.0 + 0.5 * h * l);
            let m = l + 1.0;
            nv[k] = ((1.0 - 0.5 * h * m) * v[k] + 0.5 * h * (u[k] + nu[k] + sv0[k] + sv1[k])) / (1.0 + 0.5 * h * m);
        }
        (nu, nv)
    }

    /// Adaptive implicit trapezoid with step doubling; coefficients at each output time.
    pub fn oracle(&self, outputs: &[f64], tol: f64) -> Vec<(Vec<f64>, Vec<f64>)> {
        let (mut u, mut v) = (self.u0.clone(), self.v0.clone());
        let mut t = 0.0;
        let mut h: f64 = 1e-4;
        let mut out = Vec::with_capacity(outputs.len());
        for &target in outputs {
            while target - t > 1e-14 {
                let step = h.min(target - t);
                let (u1, v1) = self.trapezoid(t, step, &u, &v);
                let (uh, vh) = self.trapezoid(t, 0.5 * step, &u, &v);
                let (u2, v2) = self.trapezoid(t + 0.5 * step, 0.5 * step, &uh, &vh);
                let err = u1.iter().zip(&u2).chain(v1.iter().zip(&v2)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / 3.0;
                if err <= tol {
                    t += step;
                    u = u2;
                    v = v2;
                }
                let factor = if err > 0.0 { 0.9 * (tol / err).cbrt() } else { 2.0 };
                h = step * factor.clamp(0.2, 2.0);
            }
            out.push((u.clone(), v.clone()));
        }
        out
    }

    /// Sup over nodes and output times of `|library - oracle|` for u and v.
    pub fn max_error(&self, t_end: f64, h: f64, stride: usize) -> (f64, f64) {
        let s = self.library_solve(t_end, h);
        let idx: Vec<usize> = (0..s.len()).step_by(stride).collect();
        let times: Vec<f64> = idx.iter().map(|m| s.grid().t(*m)).collect();
        let oracle = self.oracle(&times, 1e-11);
        let (mut eu, mut ev) = (0.0f64, 0.0f64);
        for (m, (cu, cv)) in idx.iter().zip(&oracle) {
            let (gu, gv) = (synthesize(&self.domain, cu), synthesize(&self.domain, cv));
            eu = eu.max(s.u(*m).values().iter().zip(&gu).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
            ev = ev.max(s.v(*m).values().iter().zip(&gv).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        }
        (eu, ev)
    }
}
