//! Property-based invariants of the coordinate algebra, the constants and
//! the barrier construction.

use anisofrac::barriers::BarrierPhi;
use anisofrac::constants::{c_ns, compute_kappa, gamma, CTildeVariant};
use anisofrac::decomposition::{BoxDomain, CoordinateDecomposition, ExtendedPoint};
use anisofrac::fields::presets::separable_bump;
use anisofrac::fields::Field;
use anisofrac::verification::difference_quotient;
use proptest::prelude::*;

fn arb_decomp() -> impl Strategy<Value = CoordinateDecomposition> {
    // up to three groups of dimension 1 or 2, the last always local
    (proptest::collection::vec(1usize..=2, 0..=2), 0.05f64..=0.95).prop_map(|(nonlocal_dims, s)| {
        let mut dims = nonlocal_dims;
        dims.push(1);
        let m = dims.len();
        let orders = vec![s; m - 1];
        let weights = vec![1.0; m - 1];
        CoordinateDecomposition::new(dims, orders, weights).unwrap()
    })
}

proptest! {
    #[test]
    fn embed_project_roundtrip(decomp in arb_decomp(), seed in 0u64..1000) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for i in 0..decomp.num_groups() {
            let y: Vec<f64> = (0..decomp.group_dim(i)).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let embedded = decomp.embed_increment(i, &y).unwrap();
            prop_assert_eq!(decomp.project_group(i, &embedded).unwrap(), y);
        }
    }

    #[test]
    fn embeddings_of_distinct_groups_are_orthogonal(decomp in arb_decomp(), seed in 0u64..1000) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = decomp.num_groups();
        for i in 0..m {
            for j in 0..m {
                if i == j { continue; }
                let y: Vec<f64> = (0..decomp.group_dim(i)).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let w: Vec<f64> = (0..decomp.group_dim(j)).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let a = decomp.embed_increment(i, &y).unwrap();
                let b = decomp.embed_increment(j, &w).unwrap();
                let dot: f64 = a.iter().zip(&b).map(|(p, q)| p * q).sum();
                prop_assert_eq!(dot, 0.0);
            }
        }
    }

    #[test]
    fn embed_is_linear(alpha in -3.0f64..3.0, y1 in -5.0f64..5.0, y2 in -5.0f64..5.0) {
        let d = CoordinateDecomposition::new(vec![2, 1], vec![0.5], vec![1.0]).unwrap();
        let a = d.embed_increment(0, &[y1, y2]).unwrap();
        let scaled = d.embed_increment(0, &[alpha * y1, alpha * y2]).unwrap();
        for (s, v) in scaled.iter().zip(&a) {
            prop_assert_eq!(*s, alpha * v);
        }
    }

    #[test]
    fn membership_monotone_in_dilation(x0 in -2.0f64..2.0, x1 in -2.0f64..2.0,
                                       k1 in 0.1f64..2.0, dk in 0.0f64..2.0) {
        let d = CoordinateDecomposition::new(vec![1, 1], vec![0.5], vec![1.0]).unwrap();
        let small = BoxDomain::with_dilation(vec![1.0, 1.0], k1).unwrap();
        let large = BoxDomain::with_dilation(vec![1.0, 1.0], k1 + dk).unwrap();
        let x = [x0, x1];
        if small.contains(&d, &x) {
            prop_assert!(large.contains(&d, &x));
        }
    }

    #[test]
    fn gamma_recurrence_random(x in 0.1f64..25.0) {
        let lhs = gamma(x + 1.0).unwrap();
        let rhs = x * gamma(x).unwrap();
        prop_assert!(((lhs - rhs) / lhs).abs() < 1e-12);
    }

    #[test]
    fn kernel_constant_positive(n in 1usize..=3, s in 0.01f64..=0.99) {
        let c = c_ns(n, s).unwrap();
        prop_assert!(c > 0.0 && c.is_finite());
    }

    #[test]
    fn kappa_monotone(lu1 in 0.0f64..5.0, dlu in 0.0f64..5.0, u1 in 0.0f64..5.0, du in 0.0f64..5.0) {
        let d = CoordinateDecomposition::new(vec![1, 1], vec![0.5], vec![1.0]).unwrap();
        let q = BoxDomain::new(vec![1.0, 1.0]).unwrap();
        let k = |lu: f64, u: f64| {
            compute_kappa(lu, u, 0.0, &d, &q, CTildeVariant::Standard).unwrap().kappa
        };
        prop_assert!(k(lu1 + dlu, u1) >= k(lu1, u1));
        prop_assert!(k(lu1, u1 + du) >= k(lu1, u1));
    }

    /// The increment barrier vanishes exactly off the positive quadrant
    /// and is exactly symmetric in (y, z).
    #[test]
    fn phi_quadrant_and_symmetry(x1 in -1.0f64..1.0, y in -0.5f64..0.5, z in -0.5f64..0.5,
                                 w in 0.5f64..1.5) {
        let d = CoordinateDecomposition::new(vec![1, 1], vec![0.5], vec![1.0]).unwrap();
        let u = separable_bump(&d, 1.0, &[w, w]).unwrap();
        let phi = BarrierPhi::new(&u);
        let p = ExtendedPoint::new(vec![x1], y, z);
        if y <= 0.0 || z <= 0.0 {
            prop_assert_eq!(phi.eval_point(&p), 0.0);
        }
        let q = ExtendedPoint::new(vec![x1], z, y);
        prop_assert_eq!(phi.eval_point(&p), phi.eval_point(&q));
    }

    /// Difference quotients of fields affine in the local variable are
    /// exactly the slope, for every offset.
    #[test]
    fn difference_quotient_of_affine(tau in 0.01f64..0.4, slope in -3.0f64..3.0) {
        let d = CoordinateDecomposition::new(vec![1, 1], vec![0.5], vec![1.0]).unwrap();
        let u = anisofrac::fields::presets::affine(&d, 0.2, slope, (1.5, 2.0)).unwrap();
        let dq = difference_quotient(&u, tau).unwrap();
        // stay inside the plateau so the taper factors are identically one
        let v = dq.eval(&[0.3, 0.5]);
        prop_assert!((v - slope).abs() < 1e-10);
    }
}
