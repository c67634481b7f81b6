//! Kernel constants of the operator: the normalization `c_{N,s}` of the
//! singular kernel and the profile constant `ct_{N,s}` in both prefactor
//! variants. The sectional quadrature validates the `2^{2s}` variant
//! (see `examples/exact_identity.rs`).

use anisofrac::constants::{c_ns, c_tilde, gamma, CTildeVariant};

fn main() {
    println!("Euler Gamma samples:");
    for x in [0.5, 1.0, 2.5, 5.0, -0.5, -3.7] {
        println!("  Gamma({x:>5}) = {:+.15e}", gamma(x).unwrap());
    }

    println!("\nkernel normalization c(N, s) and profile constants:");
    println!(
        "{:>3} {:>5} {:>22} {:>22} {:>22}",
        "N", "s", "c(N,s)", "ct 2^s", "ct 2^{2s}"
    );
    for n in [1usize, 2] {
        for s in [0.25, 0.5, 0.75, 0.99] {
            println!(
                "{n:>3} {s:>5} {:>22.15} {:>22.15} {:>22.15}",
                c_ns(n, s).unwrap(),
                c_tilde(n, s, CTildeVariant::HalfPower).unwrap(),
                c_tilde(n, s, CTildeVariant::Standard).unwrap(),
            );
        }
    }

    // at s = 1 the standard variant reproduces the classical constant 2N
    println!("\nclassical limit (s = 1): ct_standard(N,1) = 2N:");
    for n in [1usize, 2, 3] {
        println!(
            "  N = {n}: {}",
            c_tilde(n, 1.0, CTildeVariant::Standard).unwrap()
        );
    }
}
