//! Measures k1..k4 on [0, pi]^2 and assembles the solver constants.
//!
//! Run with `cargo run --release --example solver_constants -- [resolution] [samples]`.

use ksmild::mild_solver::measure_constants;
use ksmild::spectral::assemble_domain;
use std::f64::consts::PI;

fn main() -> ksmild::Result<()> {
    let mut args = std::env::args().skip(1);
    let res: usize = args.next().map_or(32, |a| a.parse().expect("resolution"));
    let samples: usize = args.next().map_or(64, |a| a.parse().expect("samples"));
    let domain = assemble_domain(&[PI, PI], &[res, res])?;
    let (constants, reports) = measure_constants(&domain, 4.0, samples, 7)?;
    for r in &reports {
        println!(
            "kind {:>3} (p, q) = ({}, {:.4}): k = {:.6}, base sup = {:.6}, slope {:.4} vs -{:.4}, pass {}",
            r.kind.label(), r.p, r.q, r.k, r.max_ratio, r.slope_fit, r.alpha, r.pass
        );
    }
    println!("{}", ksmild::io::to_json_string(&constants)?);
    Ok(())
}
