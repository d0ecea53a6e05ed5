//! The two kernel integrals behind the exponential decay rate, evaluated
//! numerically and compared with their closed-form bounds.

use ksmild::gronwall::{gronwall_bounds, gronwall_integrals};

fn main() -> ksmild::Result<()> {
    let (lambda1, n, p) = (1.0, 2, 4.0);
    let grid: Vec<f64> = (0..=400).map(|i| i as f64 * 0.1).collect();
    for sigma in [0.25, 0.5, 0.75] {
        let r = gronwall_integrals(lambda1, sigma, n, p, &grid)?;
        let max1 = r.i1.iter().copied().fold(0.0, f64::max);
        let max2 = r.i2.iter().copied().fold(0.0, f64::max);
        println!("sigma = {sigma}: B1 = {:.6}, max I1 = {max1:.6}; B2 = {:.6}, max I2 = {max2:.6}; pass {}", r.b1, r.b2, r.pass);
    }
    match gronwall_bounds(lambda1, 1.5, n, p) {
        Err(e) => println!("sigma = 1.5: {e}"),
        Ok(_) => unreachable!("sigma above the gap is rejected"),
    }
    Ok(())
}
