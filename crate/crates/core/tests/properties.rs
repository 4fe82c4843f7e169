use givp::consequences::{bishop_phelps, check_subdiff_adjoint_invariance, palais_smale};
use givp::ekeland::{ekeland_minimize, EkelandParams};
use givp::func::{catalog, gateaux_variation};
use givp::group::{GroupAction, GroupPreset};
use givp::sampling::SampleSpec;
use givp::separation::{separate_strict, ConvexBody};
use givp::{DualFunctional, NormSpec, Vector};
use proptest::prelude::*;

fn group(p: GroupPreset) -> GroupAction {
    p.build(&NormSpec::L2).unwrap()
}

fn presets() -> impl Strategy<Value = GroupPreset> {
    prop_oneof![
        (2usize..5).prop_map(|n| GroupPreset::Sym { n }),
        (1usize..4).prop_map(|n| GroupPreset::SignedPerm { n }),
        (2usize..7).prop_map(|k| GroupPreset::Cyclic { k }),
        Just(GroupPreset::So2 { nodes: 64 }),
    ]
}

fn point(n: usize) -> impl Strategy<Value = Vector> {
    proptest::collection::vec(-3.0f64..3.0, n).prop_map(Vector::from_vec)
}

fn double_factorial(k: i64) -> f64 {
    (1..=k).rev().step_by(2).map(|i| i as f64).product()
}

/// Mean of `cos^a θ · sin^b θ` over the circle.
fn circle_moment(a: u32, b: u32) -> f64 {
    if a % 2 == 1 || b % 2 == 1 {
        return 0.0;
    }
    double_factorial(a as i64 - 1) * double_factorial(b as i64 - 1) / double_factorial((a + b) as i64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn symmetrized_points_are_fixed(p in presets(), seed in any::<u64>()) {
        let g = group(p);
        let x = givp::sampling::uniform_box(&mut givp::sampling::rng(seed, 0), &Vector::zeros(g.dim()), 3.0);
        let xb = g.symmetrize(&x).unwrap();
        prop_assert!(g.invariance_residual(&xb) <= 1e-9);
        // averaging twice changes nothing
        prop_assert!((g.symmetrize(&xb).unwrap() - &xb).amax() <= 1e-12);
    }

    #[test]
    fn cube_is_stable_under_averaging(n in 2usize..5, x in point(4)) {
        let g = group(GroupPreset::Sym { n });
        let x = x.rows(0, n).into_owned() / 3.0;
        let cube = ConvexBody::cube(Vector::zeros(n), 1.0).unwrap();
        prop_assert!(cube.contains(&x, 0.0));
        prop_assert!(cube.contains(&g.symmetrize(&x).unwrap(), 1e-12));
    }

    #[test]
    fn averaging_lowers_convex_invariant_objectives(n in 2usize..5, x in point(4)) {
        let g = group(GroupPreset::SignedPerm { n });
        let x = x.rows(0, n).into_owned();
        let xb = g.symmetrize(&x).unwrap();
        for name in ["sq_norm", "abs_sum", "norm2", "cosh_sum"] {
            let f = catalog::get(name, n).unwrap();
            prop_assert!(f.eval_raw(&xb) <= f.eval_raw(&x) + 1e-9, "{}", name);
        }
    }

    #[test]
    fn so2_quadrature_is_exact_below_its_order(a in 0u32..8, b in 0u32..8, r in 0.1f64..2.0, alpha in 0.0f64..6.3) {
        let g = group(GroupPreset::So2 { nodes: 16 });
        let v = Vector::from_row_slice(&[r * alpha.cos(), r * alpha.sin()]);
        let avg: f64 = g
            .orbit(&v)
            .unwrap()
            .iter()
            .zip(g.weights())
            .map(|(y, w)| w * y[0].powi(a as i32) * y[1].powi(b as i32))
            .sum();
        let exact = r.powi((a + b) as i32) * circle_moment(a, b);
        prop_assert!((avg - exact).abs() <= 1e-10 * (1.0 + exact.abs()), "{} vs {}", avg, exact);
    }

    #[test]
    fn gateaux_matches_gradient_pairing(x in point(3), h in point(3)) {
        for e in catalog::ENTRIES.iter().filter(|e| e.smooth && e.fixed_dim.is_none()) {
            let f = e.build(3).unwrap();
            let want = f.grad(&x).unwrap().dot(&h);
            let got = gateaux_variation(&f, &x, &h, 1e-4).unwrap();
            prop_assert!((got - want).abs() <= 1e-5 * (1.0 + want.abs()), "{}: {} vs {}", e.name, got, want);
        }
    }

    #[test]
    fn symmetrized_functionals_are_adjoint_fixed(p in presets(), u in point(4)) {
        let g = group(p);
        let u = DualFunctional::new(u.rows(0, g.dim()).into_owned()).symmetrized(&g);
        prop_assert!(u.invariant && u.adjoint_residual(&g) <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn strict_separation_of_invariant_balls(n in 2usize..4, ra in 0.2f64..1.0, rb in 0.2f64..1.0, gap in 0.05f64..1.0, seed in any::<u64>()) {
        let g = group(GroupPreset::Sym { n });
        let ones = Vector::from_element(n, 1.0);
        let a = ConvexBody::ball(-&ones * 0.1, ra, NormSpec::L2).unwrap();
        let d = (ra + rb + gap + 0.1 * (n as f64).sqrt()) / (n as f64).sqrt();
        let b = ConvexBody::cube(&ones * d, rb / (n as f64).sqrt()).unwrap();
        let c = separate_strict(&a, &b, &g).unwrap();
        let chk = c.verify(&a, &b, 2000, seed);
        prop_assert!(chk.excess_a <= 1e-8 && chk.excess_b <= 1e-8);
        prop_assert!(c.epsilon_margin >= c.distance.unwrap() * c.functional.dual_norm(g.norm()) / 2.0 - 1e-8);
        prop_assert!(c.functional.adjoint_residual(&g) <= 1e-9);
    }

    #[test]
    fn ekeland_iterates_stay_invariant_and_monotone(x in point(3), eps in 0.05f64..1.0, delta in 0.01f64..0.5) {
        let g = group(GroupPreset::Sym { n: 3 });
        let phi = catalog::get("cosh_sum", 3).unwrap();
        let mut params = EkelandParams::new(eps, delta, x);
        params.verification_points = 500;
        let c = ekeland_minimize(&phi, &g, &NormSpec::L2, &params).unwrap();
        prop_assert!(c.is_valid(1e-8));
        for w in c.history.windows(2) {
            prop_assert!(g.invariance_residual(&w[1].x) <= 1e-9);
            prop_assert!(w[1].phi <= w[0].phi);
            prop_assert!(w[0].b.unwrap() <= w[1].phi + 1e-15);
        }
        prop_assert!(eps * c.distance <= c.phi_bar0 - c.phi_tilde + 1e-12);
    }

    #[test]
    fn bishop_phelps_perturbation_is_small(n in 2usize..4, a in -1.0f64..1.0, eps in 0.05f64..0.5, seed in any::<u64>()) {
        let g = group(GroupPreset::Sym { n });
        let cube = ConvexBody::cube(Vector::from_element(n, 0.3), 0.7).unwrap();
        let f = DualFunctional::new(Vector::from_element(n, a));
        let c = bishop_phelps(&f, &cube, &g, &NormSpec::L2, eps, seed).unwrap();
        prop_assert!(c.h_norm <= eps + 1e-9);
        prop_assert!(c.attain_invariance <= 1e-9);
        prop_assert!(c.optimality_margin >= -1e-8);
    }
}

#[test]
fn palais_smale_bound_on_catalog_benchmarks() {
    for (name, n) in [("sq_norm", 2), ("half_sq_norm", 3), ("cosh_sum", 2), ("sq_norm_plus_one", 3)] {
        let g = group(GroupPreset::Sym { n });
        let phi = catalog::get(name, n).unwrap();
        let run = palais_smale(&phi, &g, &NormSpec::L2, &Vector::from_element(n, 0.8), 15, 2).unwrap();
        assert!(run.gradient_bound_holds(1e-6), "{name}");
        assert!(run.monotone(1e-9), "{name}");
    }
}

#[test]
fn gradient_orbits_are_subgradients() {
    // every subgradient at an invariant point has its whole adjoint orbit in ∂f
    let g = group(GroupPreset::SignedPerm { n: 2 });
    let f = catalog::get("abs_sum", 2).unwrap();
    let x0 = Vector::zeros(2);
    let hs: Vec<DualFunctional> = [[0.3, -0.9], [1.0, 0.2], [-0.5, -0.5]]
        .iter()
        .map(|h| DualFunctional::new(Vector::from_row_slice(h)))
        .collect();
    let r = check_subdiff_adjoint_invariance(&f, &g, &x0, &hs, 0.0, &SampleSpec::default(), 1e-12).unwrap();
    assert!(r.holds && r.members == 3, "{r:?}");
}
