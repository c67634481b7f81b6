//! Sampled Hoelder seminorms and the boundedness probe: the ratio
//! `||du/dx_n||_{C^alpha(inner)} / (sup|f| + sup|u|)` stays stable under
//! sampling refinement and is exactly invariant under doubling the
//! instance.

use anisofrac::decomposition::{BoxDomain, CoordinateDecomposition};
use anisofrac::fields::partial_or_fd;
use anisofrac::fields::presets::{quadratic_taper, separable_bump};
use anisofrac::quadrature::QuadratureSpec;
use anisofrac::verification::{holder_seminorm, probe_holder_ratio, HolderInstance};

fn main() -> anisofrac::Result<()> {
    let decomp = CoordinateDecomposition::new(vec![1, 1], vec![0.5], vec![1.0])?;
    let outer = BoxDomain::new(vec![1.0, 1.0])?;
    let inner = BoxDomain::new(vec![0.5, 0.5])?;
    let spec = QuadratureSpec {
        radial_nodes: 128,
        ..QuadratureSpec::for_scale(1.0)
    };

    // seminorm of a model function with a known reference: |x_1|^alpha
    let alpha = 0.5;
    let g = |x: &[f64]| x[0].abs().powf(alpha);
    let est = holder_seminorm(&g, &decomp, &outer, alpha, 100_000, 1e-4, 17)?;
    println!(
        "|x1|^(1/2): sampled seminorm {:.6} (reference value 1)",
        est.seminorm
    );

    let u1 = separable_bump(&decomp, 1.0, &[0.9, 0.9])?;
    let u2 = quadratic_taper(&decomp, (1.5, 2.0))?;
    let u3 = separable_bump(&decomp, 0.7, &[1.2, 1.2])?;
    for (name, u) in [("bump", &u1), ("quadratic", &u2), ("wide-bump", &u3)] {
        let axis = decomp.local_axis();
        let gn = move |x: &[f64]| partial_or_fd(u, x, axis, 1e-6);
        let est = holder_seminorm(&gn, &decomp, &inner, alpha, 100_000, 1e-4, 17)?;
        println!(
            "{name:>10}: sup|du/dxn| = {:.6}, C^alpha seminorm = {:.6}",
            est.sup_abs, est.seminorm
        );
    }

    let instances = [
        HolderInstance {
            name: "bump",
            u: &u1,
        },
        HolderInstance {
            name: "quadratic",
            u: &u2,
        },
        HolderInstance {
            name: "wide-bump",
            u: &u3,
        },
    ];
    let report = probe_holder_ratio(
        &instances, &decomp, &outer, &inner, alpha, 100_000, 17, &spec,
    )?;
    println!("\n{}", report.summary_line());
    for p in report.probes.chunks(2) {
        println!(
            "  rho coarse/fine = {:.6} / {:.6}; doubled instance rho = {:.6}",
            p[0].input[0], p[0].input[1], p[1].input[1]
        );
    }
    Ok(())
}
