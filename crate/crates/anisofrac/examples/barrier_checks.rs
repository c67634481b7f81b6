//! The barrier pair in action: verify the increment barrier's extended
//! image, its vanishing/Lipschitz structure, the exterior domination of
//! the second barrier, and the interior supersolution margin.

use anisofrac::barriers::{check_phi_properties, check_psi_supersolution};
use anisofrac::constants::CTildeVariant;
use anisofrac::decomposition::{BoxDomain, CoordinateDecomposition};
use anisofrac::fields::measure_norms;
use anisofrac::fields::presets::separable_bump;
use anisofrac::quadrature::QuadratureSpec;
use anisofrac::verification::estimate_parameters_for;

fn main() -> anisofrac::Result<()> {
    let decomp = CoordinateDecomposition::new(vec![1, 1], vec![0.5], vec![1.0])?;
    let domain = BoxDomain::new(vec![1.0, 1.0])?;
    let u = separable_bump(&decomp, 1.0, &[0.9, 0.9])?;
    let spec = QuadratureSpec {
        radial_nodes: 128,
        ..QuadratureSpec::for_scale(1.0)
    };

    let norms = measure_norms(&u, &decomp, 128);
    println!(
        "base field: separable bump, sup|u| = {}, sup|du/dxn| = {:.6}",
        1.0, norms.sup_dnu
    );

    println!("\nincrement barrier:");
    for report in check_phi_properties(&u, &decomp, &domain, norms.sup_dnu, 20, 200, 1, &spec)? {
        println!("  {}", report.summary_line());
    }

    let (params, _) =
        estimate_parameters_for(&u, &decomp, &domain, CTildeVariant::Standard, 31, &spec)?;
    println!(
        "\ndominating barrier (kappa = {:.6}, sup|Lu| = {:.6}):",
        params.kappa, params.sup_lu
    );
    for report in check_psi_supersolution(&u, &params, &decomp, &domain, 50, 200, 1, &spec)? {
        println!("  {}", report.summary_line());
    }
    Ok(())
}
