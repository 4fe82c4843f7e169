use super::*;
use crate::func::{catalog, Flags, Verdict};
use crate::group::GroupPreset;

fn v(xs: &[f64]) -> Vector {
    Vector::from_row_slice(xs)
}

fn sym(n: usize) -> GroupAction {
    GroupPreset::Sym { n }.build(&NormSpec::L2).unwrap()
}

fn benchmark() -> (ScalarFunction, GroupAction, EkelandParams) {
    let phi = catalog::get("sq_norm_plus_one", 3).unwrap();
    let params = EkelandParams::new(0.1, 0.01, v(&[0.3, 0.1, 0.2]));
    (phi, sym(3), params)
}

#[test]
fn cone_member_examples() {
    let apex = EpigraphPoint::new(v(&[0.0]), 0.0);
    let n = NormSpec::L2;
    assert!(cone_member(&apex, &apex, 1.0, &n).unwrap());
    assert!(cone_member(&EpigraphPoint::new(v(&[1.0]), -2.0), &apex, 1.0, &n).unwrap());
    assert!(!cone_member(&EpigraphPoint::new(v(&[1.0]), -0.5), &apex, 1.0, &n).unwrap());
    assert!(cone_member(&EpigraphPoint::new(v(&[1.0, 0.0]), 0.0), &apex, 1.0, &n).is_err());
}

#[test]
fn sigma3_benchmark() {
    let (phi, g, params) = benchmark();
    let cert = ekeland_minimize(&phi, &g, &NormSpec::L2, &params).unwrap();
    assert!((&cert.x_bar0 - v(&[0.2, 0.2, 0.2])).amax() < 1e-15);
    assert!(cert.invariance_residual <= 1e-8);
    assert!(cert.inequality_margin >= -1e-8, "{}", cert.inequality_margin);
    assert!(cert.verification_points >= 10_000);
    assert!(cert.steps_ok && !cert.budget_exhausted);
    // the global minimum is at 0 with value 1
    assert!(cert.x_tilde.norm() < 0.05, "{}", cert.x_tilde);
    assert!((cert.inf_estimate - 1.0).abs() < 1e-9);
    // φ(x̄₀) = 1.12 is not within δ of the infimum, so only the telescoped
    // bound ε‖x̄₀ − x̃‖ ≤ φ(x̄₀) − φ(x̃) is available
    assert!(!cert.distance_hypothesis);
    assert!(cert.epsilon * cert.distance <= cert.phi_bar0 - cert.phi_tilde + 1e-12);
    assert!(nested_diameter_check(&cert.state(), &params, &g, 1e-10));
}

#[test]
fn monotone_chain() {
    let (phi, g, params) = benchmark();
    let cert = ekeland_minimize(&phi, &g, &NormSpec::L2, &params).unwrap();
    let h = &cert.history;
    for w in h.windows(2) {
        assert!(w[1].phi <= w[0].phi);
        assert!(w[0].b.unwrap() <= w[1].phi + 1e-15);
        // cone condition between consecutive iterates
        assert!(w[1].phi - w[0].phi <= -cert.epsilon * (&w[1].x - &w[0].x).norm() + 1e-15);
        assert!(g.invariance_residual(&w[1].x) <= ITERATE_TOL);
    }
    let bs: Vec<f64> = h.iter().filter_map(|r| r.b).collect();
    assert!(bs.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn distance_clause_under_its_hypothesis() {
    let (phi, g, mut params) = benchmark();
    params.x0 = v(&[0.06, 0.04, 0.05]);
    // φ(x̄₀) = 1.0075: inside the δ window, outside the δ/2 window
    let cert = ekeland_minimize(&phi, &g, &NormSpec::L2, &params).unwrap();
    assert!(cert.distance_hypothesis);
    assert!(cert.distance_bound_ok, "{} > {}", cert.distance, cert.distance_bound);
    params.x0 = v(&[0.03, 0.03, 0.03]);
    let near = ekeland_minimize(&phi, &g, &NormSpec::L2, &params).unwrap();
    assert_eq!(near.pre_stage_jump, 0.0);
    assert!(near.distance_bound_ok);
}

#[test]
fn minimizer_start_stays_put() {
    let phi = catalog::get("sq_norm", 2).unwrap();
    let params = EkelandParams::new(0.5, 0.1, Vector::zeros(2));
    let cert = ekeland_minimize(&phi, &sym(2), &NormSpec::L2, &params).unwrap();
    assert_eq!(cert.x_tilde, Vector::zeros(2));
    assert!(cert.history.iter().all(|r| r.step.is_none_or(|s| s == 0.0)));
    assert!(cert.inequality_margin >= 0.0);
}

#[test]
fn tent_is_rejected_in_preflight() {
    let tent = catalog::get("tent", 1).unwrap();
    let g = GroupPreset::Sign { n: 1 }.build(&NormSpec::L2).unwrap();
    let params = EkelandParams::new(0.5, 0.5, v(&[0.3]));
    let Err(EkelandError::Preflight(report)) = ekeland_minimize(&tent, &g, &NormSpec::L2, &params) else {
        panic!("expected preflight failure");
    };
    let Verdict::Violated { witness, lhs, rhs, .. } = report.verdict else {
        panic!()
    };
    assert_eq!((witness, lhs, rhs), (vec![0.5], 1.0, 0.0));
    // the only invariant point is 0, where the inequality fails at ½
    let r = verify_ekeland_inequality(&tent, &v(&[0.0]), 0.5, &NormSpec::L2, &[v(&[0.5])]);
    assert_eq!((r.lhs, r.rhs), (1.0, 0.25));
}

#[test]
fn verify_margin_examples() {
    let phi = catalog::get("sq_norm", 2).unwrap();
    let mut r = sampling::rng(5, 0);
    let mut cloud: Vec<Vector> = (0..2000)
        .map(|_| sampling::uniform_box(&mut r, &Vector::zeros(2), 1.0))
        .collect();
    cloud.push(Vector::zeros(2));
    let ok = verify_ekeland_inequality(&phi, &Vector::zeros(2), 1.0, &NormSpec::L2, &cloud);
    assert!(ok.margin > 0.0 && ok.holds(0.0));
    let bad = verify_ekeland_inequality(&phi, &v(&[1.0, 1.0]), 1.0, &NormSpec::L2, &cloud);
    assert!(bad.margin < 0.0 && bad.witness.is_some());
    // oracle: at the witness the inequality is visibly reversed
    let w = Vector::from_vec(bad.witness.unwrap());
    assert!(phi.eval_raw(&w) + (&w - v(&[1.0, 1.0])).norm() < 2.0);
}

#[test]
fn forged_history_fails_diameter_check() {
    let (phi, g, params) = benchmark();
    let cert = ekeland_minimize(&phi, &g, &NormSpec::L2, &params).unwrap();
    let mut state = cert.state();
    assert!(step_slacks(&state, &params, &NormSpec::L2).iter().all(|s| *s >= -1e-10));
    // push x_3 far from x_2
    let far = &state.history[2].x + v(&[1.0, 1.0, 1.0]);
    state.history[3].x = far;
    assert!(!nested_diameter_check(&state, &params, &g, 1e-10));
}

#[test]
fn flags_and_parameters() {
    let g = sym(2);
    let bad = catalog::get("neg_sq_norm", 2).unwrap();
    let p = EkelandParams::new(0.1, 0.1, Vector::zeros(2));
    assert_eq!(
        ekeland_minimize(&bad, &g, &NormSpec::L2, &p).unwrap_err(),
        EkelandError::Flags("bounded_below")
    );
    let phi = catalog::get("sq_norm", 2).unwrap();
    let zero = EkelandParams::new(0.0, 0.1, Vector::zeros(2));
    assert!(matches!(
        ekeland_minimize(&phi, &g, &NormSpec::L2, &zero),
        Err(EkelandError::BadParams(_))
    ));
}

#[test]
fn unbounded_below_is_detected() {
    // mislabelled: x₁ + x₂ is invariant and G-convex but unbounded below
    let lie = ScalarFunction::new("sum", |x: &Vector| x.sum()).with_flags(Flags::CONVEX);
    let p = EkelandParams::new(0.1, 0.1, Vector::zeros(2));
    assert!(matches!(
        ekeland_minimize(&lie, &sym(2), &NormSpec::L2, &p),
        Err(EkelandError::UnboundedBelow { .. })
    ));
}

#[test]
fn infimum_over_fixed_subspace_matches_full_space() {
    for name in ["sq_norm_plus_one", "cosh_sum", "abs_sum", "half_sq_norm"] {
        let phi = catalog::get(name, 3).unwrap();
        let start = v(&[0.7, -0.4, 1.1]);
        let full = nelder_mead::minimize(
            |x| phi.eval_raw(x),
            &start,
            NmOptions {
                scale: 0.5,
                max_evals: 20_000,
                xtol: 1e-12,
                ftol: 0.0,
            },
        );
        let p = EkelandParams::new(0.1, 0.01, start);
        let cert = ekeland_minimize(&phi, &sym(3), &NormSpec::L2, &p).unwrap();
        assert!((cert.inf_estimate - full.f).abs() <= 1e-6, "{name}");
    }
}

#[test]
fn trivial_fixed_subspace() {
    let g = GroupPreset::So2 { nodes: 16 }.build(&NormSpec::L2).unwrap();
    let phi = catalog::get("sq_norm", 2).unwrap();
    let p = EkelandParams::new(0.1, 0.01, v(&[1.0, 2.0]));
    let cert = ekeland_minimize(&phi, &g, &NormSpec::L2, &p).unwrap();
    assert_eq!(cert.x_tilde, Vector::zeros(2));
    assert!(cert.inequality_margin >= 0.0);
}

#[test]
fn identical_across_thread_counts() {
    let (phi, g, params) = benchmark();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| ekeland_minimize(&phi, &g, &NormSpec::L2, &params).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn certificate_round_trips_through_json() {
    let (phi, g, mut params) = benchmark();
    params.verification_points = 100;
    let cert = ekeland_minimize(&phi, &g, &NormSpec::L2, &params).unwrap();
    let s = serde_json::to_string(&cert).unwrap();
    let back: EkelandCertificate = serde_json::from_str(&s).unwrap();
    assert_eq!(back.history.len(), cert.history.len());
    assert_eq!(back.x_tilde, cert.x_tilde);
}
