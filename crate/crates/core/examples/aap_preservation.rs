//! Almost periodic forcing produces an asymptotically almost periodic solution,
//! and a vanishing tail in the forcing only adds a vanishing correction.

use ksmild::almost_periodic::{verify_aap, EPSILON_LADDER};
use ksmild::field::ScalarField;
use ksmild::forcing::{ApTerm, ComponentForcing, ForcingSpec, Profile, Sinusoid, Tail, TailTerm};
use ksmild::mild_solver::{measure_constants, picard_solve, SolverConfig};
use ksmild::spectral::assemble_domain;
use ksmild::stability::distance_series;
use std::f64::consts::{PI, SQRT_2};

fn main() -> ksmild::Result<()> {
    let d = assemble_domain(&[PI, PI], &[32, 32])?;
    let (constants, _) = measure_constants(&d, 4.0, 32, 7)?;
    let cos_x = Profile::CosX.resolve(&d)?;
    let sinusoids = vec![
        Sinusoid { frequency: 1.0, amplitude: 1e-3, phase: 0.0 },
        Sinusoid { frequency: SQRT_2, amplitude: 1e-3, phase: 0.0 },
    ];
    let g = ComponentForcing { ap: vec![ApTerm { sinusoids, profile: cos_x.clone() }], tail: None };
    let pure = ForcingSpec::new(d.clone(), g, ComponentForcing::default(), true)?;
    let tailed = pure.with_tail(Some(TailTerm { tail: Tail::Reciprocal { c: 1e-3 }, profile: cos_x }), None)?;
    let u0 = ScalarField::from_fn(d.clone(), |x| 5e-4 * x[0].cos() * x[1].cos());
    let v0 = ScalarField::zeros(d.clone());
    let config = SolverConfig { tolerance: 1e-12, ..SolverConfig::for_domain(&d) };

    let (a, _) = picard_solve(&u0, &v0, &pure, &config, &constants)?;
    let (b, _) = picard_solve(&u0, &v0, &tailed, &config, &constants)?;
    let cut = 5.0 / d.lambda1();
    for (name, s) in [("AP forcing", &a), ("AP + 1e-3/(1+t)", &b)] {
        for eps in EPSILON_LADDER {
            let r = verify_aap(&s.norm_signal(), eps, cut)?;
            println!("{name:>16}, eps {eps:<4}: AAP {}, signal scale {:.3e}", r.is_aap, r.signal_scale);
        }
    }
    let dist = distance_series(&a, &b)?;
    for t in [5.0, 10.0, 20.0, 30.0, 40.0] {
        let m = a.grid().index_at(t);
        println!("X-distance at t = {t:>4}: {:.4e}", dist[m]);
    }
    Ok(())
}
