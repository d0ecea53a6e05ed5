//! The linear solution operator: Duhamel solves for (u, v) with the flux frozen,
//! checked against the a priori bound with measured constants. Writes the
//! trajectory norms to `linear_trajectory.csv`.

use ksmild::field::ScalarField;
use ksmild::forcing::{ApTerm, ComponentForcing, ForcingSpec, Profile, Sinusoid};
use ksmild::mild_solver::{linear_bound, measure_constants, solve_linear, x_norm, CheckMode, SolverConfig};
use ksmild::spectral::assemble_domain;
use std::f64::consts::{PI, SQRT_2};

fn main() -> ksmild::Result<()> {
    let d = assemble_domain(&[PI, PI], &[32, 32])?;
    let (constants, _) = measure_constants(&d, 4.0, 32, 7)?;
    let sinusoids = vec![
        Sinusoid { frequency: 1.0, amplitude: 1e-3, phase: 0.0 },
        Sinusoid { frequency: SQRT_2, amplitude: 1e-3, phase: 0.0 },
    ];
    let g = ComponentForcing { ap: vec![ApTerm { sinusoids, profile: Profile::CosX.resolve(&d)? }], tail: None };
    let forcing = ForcingSpec::new(d.clone(), g, ComponentForcing::default(), true)?;
    let u0 = ScalarField::from_fn(d.clone(), |x| 1e-3 * x[0].cos());
    let v0 = ScalarField::from_fn(d.clone(), |x| 1e-3 * x[1].cos());

    // Free linear system, then the same operator fed a frozen source pair.
    let config = SolverConfig { chemotaxis: false, ..SolverConfig::for_domain(&d) };
    let free = solve_linear(&u0, &v0, None, &forcing, &config)?;
    let bound = linear_bound(&free, &u0, &v0, None, &forcing, &constants, CheckMode::Strict)?;
    println!("free:   |S(0,0)|_X = {:.6e} <= bound {:.6e}: {}", bound.x_norm, bound.bound, bound.holds);

    let frozen = SolverConfig { chemotaxis: true, ..config };
    let source = free.scaled(2.0);
    let driven = solve_linear(&u0, &v0, Some(&source), &forcing, &frozen)?;
    let bound = linear_bound(&driven, &u0, &v0, Some(&source), &forcing, &constants, CheckMode::Strict)?;
    println!(
        "frozen: |S(w,z)|_X = {:.6e} <= bound {:.6e} (source |w,z|_X = {:.3e}): {}",
        bound.x_norm, bound.bound, bound.source_x_norm, bound.holds
    );
    println!("effect of the frozen flux: {:.3e}", x_norm(&driven.difference(&free)?)?);

    let last = free.norms().last().expect("nonempty trajectory");
    println!("at t = {}: |u| = {:.4e}, |v| = {:.4e}, |grad v| = {:.4e}, mean u = {:.1e}", last.t, last.u, last.v, last.grad_v, last.mean_u);
    free.write_csv(std::path::Path::new("linear_trajectory.csv"))?;
    println!("wrote linear_trajectory.csv");
    Ok(())
}
