//! Pointwise evaluation of `L = a_1 (-Lap_{X_1})^{s_1} - d^2/dx_n^2` on a
//! manufactured field, with the error estimate the quadrature reports.

use anisofrac::decomposition::CoordinateDecomposition;
use anisofrac::fields::presets::separable_bump;
use anisofrac::operator::{apply_l, classical_second_derivative, frac_laplacian_point};
use anisofrac::quadrature::QuadratureSpec;

fn main() {
    let decomp = CoordinateDecomposition::new(vec![1, 1], vec![0.5], vec![1.0]).unwrap();
    let u = separable_bump(&decomp, 1.0, &[0.9, 0.9]).unwrap();
    let spec = QuadratureSpec::for_scale(1.0);

    println!("u = smooth separable bump, s_1 = 1/2, a_1 = 1");
    println!(
        "{:>8} {:>8} {:>16} {:>16} {:>16} {:>12}",
        "x1", "xn", "frac part", "local part", "L u", "err est"
    );
    for (x1, xn) in [(0.0, 0.0), (0.3, 0.1), (-0.5, 0.4), (0.7, -0.6), (0.0, 0.8)] {
        let x = [x1, xn];
        let frac = frac_laplacian_point(&u, &decomp, 0, &x, &spec).unwrap();
        let local = classical_second_derivative(&u, &decomp, 1, &x, 1e-4).unwrap();
        let full = apply_l(&u, &decomp, &x, &spec).unwrap();
        println!(
            "{x1:>8.2} {xn:>8.2} {:>16.10} {:>16.10} {:>16.10} {:>12.2e}",
            frac.value, local.value, full.value, full.error_estimate
        );
    }

    // the operator is linear: L(2u) = 2 Lu up to quadrature tolerance
    let x = [0.2, -0.1];
    let lu = apply_l(&u, &decomp, &x, &spec).unwrap();
    let u2 = separable_bump(&decomp, 2.0, &[0.9, 0.9]).unwrap();
    let lu2 = apply_l(&u2, &decomp, &x, &spec).unwrap();
    println!(
        "\nlinearity at {x:?}: L(2u) = {:.12}, 2 L(u) = {:.12}",
        lu2.value,
        2.0 * lu.value
    );
}
