use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use hkorbit_core::algebra::{bracket, inner, random_element, AlgebraContext, SpaceTag};
use hkorbit_core::hyperkahler::{quaternion_report, shifted_potential};
use hkorbit_core::linalg::{c, comm, fro, re_inner};
use hkorbit_core::mostow::{decompose, forward, FiberedPoint};
use hkorbit_core::orbit::{random_compact_point, OrbitPointC};
use hkorbit_core::speccalc::{apply_ad_function, AdKernel};
use hkorbit_core::tangent::{f1, f2, upsilon, upsilon_inverse};

fn shapes() -> impl Strategy<Value = (usize, usize)> {
    prop_oneof![Just((2, 1)), Just((3, 1)), Just((4, 2)), Just((5, 2))]
}

fn ctx_strategy() -> impl Strategy<Value = AlgebraContext> {
    (shapes(), prop_oneof![Just(0.5), Just(1.0), Just(2.0)]).prop_map(|((n, k), kappa)| AlgebraContext::new(n, k, kappa).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bracket_respects_the_symmetric_decomposition(ctx in ctx_strategy(), seed in 0u64..1000) {
        let k = random_element(&ctx, SpaceTag::K0, seed, 1.0);
        let m = random_element(&ctx, SpaceTag::M0, seed + 1, 1.0);
        let m2 = random_element(&ctx, SpaceTag::M0, seed + 2, 1.0);
        prop_assert_eq!(bracket(&ctx, &k, &m).tag, SpaceTag::M0);
        prop_assert_eq!(bracket(&ctx, &m, &m2).tag, SpaceTag::K0);
        prop_assert!(inner(&k, &m).norm() < 1e-12);
    }

    #[test]
    fn complex_structure_squares_to_minus_one(ctx in ctx_strategy(), seed in 0u64..1000) {
        let m = random_element(&ctx, SpaceTag::M0, seed, 1.0).mat;
        prop_assert!(fro(&(ctx.i_op(&ctx.i_op(&m)) + &m)) < 1e-12);
        let m2 = random_element(&ctx, SpaceTag::M0, seed + 1, 1.0).mat;
        prop_assert!((re_inner(&ctx.i_op(&m), &m2) + re_inner(&m, &ctx.i_op(&m2))).abs() < 1e-12);
    }

    #[test]
    fn exp_kernel_is_conjugation(ctx in ctx_strategy(), seed in 0u64..1000, t in 0.0f64..2.0) {
        let a = random_element(&ctx, SpaceTag::M0, seed, t).mat;
        let y = random_element(&ctx, SpaceTag::GC, seed + 1, 1.0).mat;
        let g = (&a * hkorbit_core::linalg::I).exp();
        let gi = (&a * -hkorbit_core::linalg::I).exp();
        let direct = &g * &y * gi;
        let spectral = apply_ad_function(&AdKernel::Exp, &a, &y).unwrap();
        prop_assert!(fro(&(direct - spectral)) < 1e-10 * fro(&y).max(1.0) * (1.0 + 4.0 * t).exp());
    }

    #[test]
    fn mostow_decomposition_round_trips(ctx in ctx_strategy(), seed in 0u64..1000, t in 0.0f64..2.0) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let x = random_compact_point(&ctx, &mut rng);
        let a = x.from_base(&random_element(&ctx, SpaceTag::M0, seed, t).mat);
        let fp = FiberedPoint::from_parts(&ctx, x.clone(), a.clone()).unwrap();
        let back = decompose(&ctx, &fp.y).unwrap();
        prop_assert!(fro(&(&back.x.x - &x.x)) < 1e-8);
        prop_assert!(fro(&(&back.a - &a)) < 1e-8);
    }

    #[test]
    fn upsilon_is_invertible(ctx in ctx_strategy(), seed in 0u64..1000, t in 0.0f64..2.0) {
        let a0 = random_element(&ctx, SpaceTag::M0, seed, t).mat;
        prop_assert!(fro(&(f2(&ctx, &f1(&ctx, &a0).unwrap()).unwrap() - &a0)) < 1e-10 * (1.0 + t));
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let x = random_compact_point(&ctx, &mut rng);
        let y = forward(&ctx, &x, &x.from_base(&a0)).unwrap();
        let back = upsilon_inverse(&ctx, &upsilon(&ctx, &y).unwrap()).unwrap();
        prop_assert!(fro(&(back.y - &y.y)) < 1e-8 * fro(&y.shifted(&ctx)));
    }

    #[test]
    fn hyperkahler_identities_hold(ctx in ctx_strategy(), seed in 0u64..1000, t in 0.0f64..1.5) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let x = random_compact_point(&ctx, &mut rng);
        let a = x.from_base(&random_element(&ctx, SpaceTag::M0, seed, t).mat);
        let fp = FiberedPoint::from_parts(&ctx, x, a).unwrap();
        let rep = quaternion_report(&ctx, &fp);
        prop_assert!(rep.max_residual() < 1e-9, "{:?}", rep.residuals);
        prop_assert!(rep.min_metric_eigenvalue > 0.0);
    }
}

#[test]
fn orbit_points_are_certified() {
    let ctx = AlgebraContext::new(4, 2, 1.0).unwrap();
    assert!(OrbitPointC::new(&ctx, &ctx.d * c(0.3)).is_err());
    let a = random_element(&ctx, SpaceTag::M0, 3, 0.7).mat;
    let y = forward(&ctx, &hkorbit_core::orbit::CompactPoint::base(&ctx), &a).unwrap();
    assert!(OrbitPointC::new(&ctx, y.y.clone()).is_ok());
    assert!(shifted_potential(&ctx, &y).unwrap().abs() < 1e-12);
}

#[test]
fn bracket_is_antisymmetric_on_random_matrices() {
    let ctx = AlgebraContext::new(5, 2, 1.0).unwrap();
    let a = random_element(&ctx, SpaceTag::GC, 1, 1.0).mat;
    let b = random_element(&ctx, SpaceTag::GC, 2, 1.0).mat;
    assert!(fro(&(comm(&a, &b) + comm(&b, &a))) < 1e-14);
}
