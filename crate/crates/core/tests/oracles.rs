//! Transforms, quadrature and the Gamma function against closed forms.

mod common;

use common::{project, synthesize};
use ksmild::gronwall::{gronwall_bounds, gronwall_integrals};
use ksmild::mild_solver::gamma_function;
use ksmild::spectral::{assemble_domain, Parity};
use std::f64::consts::PI;

#[test]
fn fast_transform_matches_direct_projection() {
    let d = assemble_domain(&[PI, 2.5], &[12, 10]).unwrap();
    let values: Vec<f64> = (0..d.len()).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0).collect();
    let fast = d.forward(&values, Parity::from_bits(0)).unwrap();
    let direct = project(&d, &values);
    let err = fast.iter().zip(&direct).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-13, "{err}");
    let back = synthesize(&d, &fast);
    let err = back.iter().zip(&values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-12, "{err}");
}

#[test]
fn gamma_matches_known_values() {
    let cases = [
        (0.5, PI.sqrt()),
        (0.25, 3.625_609_908_221_908),
        (1.0 / 3.0, 2.678_938_534_707_747_6),
        (0.125, 7.533_941_598_797_611),
    ];
    for (x, want) in cases {
        let got = gamma_function(x).unwrap();
        assert!(((got - want) / want).abs() < 1e-13, "Gamma({x}) = {got}, want {want}");
    }
    assert!(gamma_function(0.75).is_err());
    assert!(gamma_function(0.0).is_err());
}

#[test]
fn first_kernel_integral_converges_to_its_bound() {
    // The bound is the t -> infinity limit of I1, so a long horizon closes the gap.
    for sigma in [0.25, 0.5, 0.75] {
        let (b1, _) = gronwall_bounds(1.0, sigma, 2, 4.0).unwrap();
        let r = gronwall_integrals(1.0, sigma, 2, 4.0, &[0.0, 80.0]).unwrap();
        let i1 = r.i1[1];
        assert!(i1 <= b1 * (1.0 + 1e-12));
        assert!((b1 - i1) / b1 < 1e-6, "sigma {sigma}: I1 {i1} vs B1 {b1}");
    }
}
