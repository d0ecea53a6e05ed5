//! Almost periodic and asymptotically almost periodic forcing signals:
//! evaluating a forcing, scanning for epsilon-almost periods, and the
//! operational AAP test with and without a vanishing tail.

use ksmild::almost_periodic::{find_almost_periods, verify_aap, SampledSignal, EPSILON_LADDER};
use ksmild::forcing::{evaluate_forcing, ApTerm, ComponentForcing, ForcingSpec, Profile, Sinusoid, Tail, TailTerm};
use ksmild::spectral::assemble_domain;
use std::f64::consts::{PI, SQRT_2};

fn main() -> ksmild::Result<()> {
    let d = assemble_domain(&[PI, PI], &[32, 32])?;
    let sinusoids = vec![
        Sinusoid { frequency: 1.0, amplitude: 1.0, phase: 0.0 },
        Sinusoid { frequency: SQRT_2, amplitude: 1.0, phase: 0.0 },
    ];
    let g = ComponentForcing { ap: vec![ApTerm { sinusoids, profile: Profile::CosX.resolve(&d)? }], tail: None };
    let forcing = ForcingSpec::new(d.clone(), g, ComponentForcing::default(), true)?;
    for t in [0.0, 1.0, 2.5] {
        let (g, _) = evaluate_forcing(&forcing, t)?;
        println!("g(t = {t}) at the corner node: {:+.6}, mean {:+.1e}", g.values()[0], g.mean());
    }

    let quasi = SampledSignal::scalar(0.0, 0.01, 80_001, |t| t.sin() + (SQRT_2 * t).sin());
    println!("\nsin t + sin(sqrt 2 t) on [0, 800], shifts up to 200:");
    for eps in EPSILON_LADDER {
        let r = find_almost_periods(&quasi, eps, 200.0)?;
        println!(
            "  eps {eps:<4}: {} qualifying shifts, representatives {:?}, dense {}",
            r.periods.len(),
            r.representatives.iter().map(|t| (t * 100.0).round() / 100.0).collect::<Vec<_>>(),
            r.relatively_dense
        );
    }

    let tailed = forcing.with_tail(Some(TailTerm { tail: Tail::Exponential { c: 1.0, beta: 1.0 }, profile: Profile::CosX.resolve(&d)? }), None)?;
    let (g0, _) = evaluate_forcing(&tailed, 0.0)?;
    println!("\nwith tail e^-t: g(0) at the corner node {:+.6}", g0.values()[0]);

    let aap = SampledSignal::scalar(0.0, 0.01, 40_001, |t| 0.5 * t.sin() + (-t).exp());
    let growing = SampledSignal::scalar(0.0, 0.01, 40_001, |t| t * t.sin());
    for (name, s) in [("0.5 sin t + e^-t", &aap), ("t sin t", &growing)] {
        let r = verify_aap(s, 0.05, 5.0)?;
        println!("{name:>18}: AAP {}, window defects {:?}", r.is_aap, r.window_defects);
    }
    Ok(())
}
