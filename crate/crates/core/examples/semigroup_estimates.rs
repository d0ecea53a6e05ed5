//! The Neumann heat semigroup on two rectangles: exact eigenfunction decay,
//! the composition law, mass conservation, and the four smoothing estimates
//! measured as empirical sup ratios.
//!
//! Run with `cargo run --release --example semigroup_estimates -- [samples]`.

use ksmild::estimate::{verify_estimate, EstimateConfig, EstimateKind};
use ksmild::field::ScalarField;
use ksmild::semigroup::heat_propagate;
use ksmild::spectral::assemble_domain;
use std::f64::consts::PI;

fn main() -> ksmild::Result<()> {
    let samples: usize = std::env::args().nth(1).map_or(32, |a| a.parse().expect("samples"));

    for lengths in [[PI, PI], [2.0 * PI, PI]] {
        let d = assemble_domain(&lengths, &[32, 32])?;
        println!("domain {:.4} x {:.4}, lambda1 = {}", lengths[0], lengths[1], d.lambda1());
        let k = PI / lengths[0];
        let f = ScalarField::from_fn(d.clone(), |x| (k * x[0]).cos());
        let decay = heat_propagate(&f, 1.0)?.max_abs_diff(&f.scaled((-k * k).exp()));
        let g = ScalarField::from_fn(d.clone(), |x| 0.3 + x[0].cos() * (2.0 * x[1]).cos() + (3.0 * x[1]).cos());
        let composed = heat_propagate(&heat_propagate(&g, 0.3)?, 0.7)?;
        let direct = heat_propagate(&g, 1.0)?;
        let mass = (heat_propagate(&g, 2.5)?.mean() - g.mean()).abs();
        println!("  eigenfunction decay error {decay:.2e}");
        println!("  composition error        {:.2e}", composed.max_abs_diff(&direct));
        println!("  mass drift               {mass:.2e}");
    }

    let d = assemble_domain(&[PI, PI], &[32, 32])?;
    println!("\nsmoothing estimates on [0, pi]^2, n = 2, {samples} samples (doubled for the stability check)");
    let pairs = [
        (EstimateKind::I, 4.0, 2.0),
        (EstimateKind::Ii, 4.0, 2.0),
        (EstimateKind::Iii, 4.0, 4.0),
        (EstimateKind::Iv, 4.0, 2.0),
    ];
    for (kind, p, q) in pairs {
        let r = verify_estimate(&d, &EstimateConfig::new(kind, p, q, samples, 11))?;
        println!(
            "  ({:>3}) p = {p}, q = {q}: k = {:.5}, base sup = {:.5}, small-t slope {:+.3} (expected {:+.3}), stable {}, slope ok {}",
            kind.label(), r.k, r.max_ratio, r.slope_fit, -r.alpha, r.pass, r.slope_ok
        );
    }
    Ok(())
}
