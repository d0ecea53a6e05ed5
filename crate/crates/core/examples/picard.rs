//! Nonlinear mild solution by Picard iteration under the smallness gate:
//! gate diagnostics, per-iteration differences, residual, and uniqueness
//! from a second initial guess.

use ksmild::field::ScalarField;
use ksmild::forcing::{ApTerm, ComponentForcing, ForcingSpec, Profile, Sinusoid};
use ksmild::mild_solver::{measure_constants, picard_solve, picard_solve_from, solve_linear, x_norm, SolverConfig};
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
    let u0 = ScalarField::from_fn(d.clone(), |x| 5e-4 * x[0].cos() * x[1].cos());
    let v0 = ScalarField::zeros(d.clone());
    let config = SolverConfig { tolerance: 1e-12, ..SolverConfig::for_domain(&d) };

    let (solution, diag) = picard_solve(&u0, &v0, &forcing, &config, &constants)?;
    let gate = &diag.gate;
    println!("gate: a = {:.4e}, C3 = {:.4}, rho = {:.4e}, 4 C3 rho = {:.4}, holds {}", gate.a, constants.c3, gate.rho, gate.contraction_bound, gate.holds);
    for (i, diff) in diag.differences.iter().enumerate() {
        println!("  iteration {:>2}: |X_k+1 - X_k|_X = {diff:.3e}", i + 1);
    }
    println!("empirical contraction {:.3e}, residual {:.3e}, |X|_X = {:.4e}", diag.empirical_contraction, diag.residual, diag.solution_x_norm);

    let guess = solve_linear(&u0, &v0, None, &forcing, &config)?.scaled(-1.0);
    let (other, d2) = picard_solve_from(&u0, &v0, &forcing, &config, &constants, Some(&guess))?;
    println!("from the negated linear response: {} iterations, distance {:.3e}", d2.iterations, x_norm(&other.difference(&solution)?)?);
    Ok(())
}
