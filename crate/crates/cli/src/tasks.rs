//! Executes one scenario into a [`RunRecord`].

use chrono::Utc;
use givp::consequences::{
    bishop_phelps, bronsted_rockafellar, dense_range_probe, dual_description_check, palais_smale, ConsequenceError,
};
use givp::ekeland::{ekeland_minimize, EkelandError, EkelandParams};
use givp::func::{check_g_convexity, check_g_invariance, CheckReport};
use givp::sampling::SampleSpec;
use givp::separation::{separate, separate_strict, SeparationError};
use givp::{DualFunctional, Vector};
use serde::Serialize;
use serde_json::{json, Value};

use crate::record::{Outcome, RunRecord, SCHEMA};
use crate::scenario::{CheckParams, Expect, Scenario, Task};

/// Command-line overrides applied to every scenario.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
}

struct Run {
    outcome: Outcome,
    message: Option<String>,
    certificate: Value,
}

impl Run {
    fn new(outcome: Outcome, certificate: Value) -> Self {
        Self {
            outcome,
            message: None,
            certificate,
        }
    }

    fn with_message(mut self, m: impl Into<String>) -> Self {
        self.message = Some(m.into());
        self
    }

    fn failed(e: impl std::fmt::Display) -> Self {
        Run::new(Outcome::Fail, Value::Null).with_message(e.to_string())
    }
}

fn payload<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("certificates serialize")
}

fn pass_if(ok: bool) -> Outcome {
    if ok {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

fn v(xs: &[f64]) -> Vector {
    Vector::from_row_slice(xs)
}

fn check_run(report: CheckReport, expect: Expect) -> Run {
    let found = if report.holds() { Expect::Holds } else { Expect::Violated };
    let run = Run::new(pass_if(found == expect), payload(&report));
    match &report.verdict {
        givp::func::Verdict::Violated { witness, lhs, rhs, .. } => {
            run.with_message(format!("violated at x = {witness:?} ({lhs} vs {rhs})"))
        }
        _ => run,
    }
}

fn ekeland_error(e: EkelandError) -> Run {
    match e {
        EkelandError::Preflight(report) => {
            let msg = match &report.verdict {
                givp::func::Verdict::Violated { witness, lhs, rhs, .. } => {
                    format!("preflight {:?} violated at x = {witness:?} ({lhs} vs {rhs})", report.kind)
                }
                _ => format!("preflight {:?} check failed", report.kind),
            };
            Run::new(Outcome::Degenerate, payload(&*report)).with_message(msg)
        }
        EkelandError::Flags(_) => Run::new(Outcome::Degenerate, Value::Null).with_message(e.to_string()),
        e => Run::failed(e),
    }
}

fn consequence_error(e: ConsequenceError) -> Run {
    match e {
        ConsequenceError::Ekeland(inner) => ekeland_error(inner),
        ConsequenceError::Precondition(verdict) => {
            let msg = format!("precondition fails (margin {})", verdict.margin);
            Run::new(Outcome::Degenerate, payload(&*verdict)).with_message(msg)
        }
        ConsequenceError::SubgradientSearch { ref transcript } => {
            Run::new(Outcome::BudgetExhausted, json!({ "transcript": transcript })).with_message(e.to_string())
        }
        ConsequenceError::Growth { .. } | ConsequenceError::Degenerate { .. } => {
            Run::new(Outcome::Degenerate, Value::Null).with_message(e.to_string())
        }
        ConsequenceError::Separation(inner) => separation_error(inner),
        e => Run::failed(e),
    }
}

fn separation_error(e: SeparationError) -> Run {
    match e {
        SeparationError::Intersect
        | SeparationError::ZeroGap { .. }
        | SeparationError::NotCompact { .. }
        | SeparationError::NotInvariant { .. }
        | SeparationError::Degenerate(_) => Run::new(Outcome::Degenerate, Value::Null).with_message(e.to_string()),
        e => Run::failed(e),
    }
}

fn samples(p: &CheckParams, seed: u64) -> SampleSpec {
    SampleSpec {
        count: p.count,
        radius: p.radius,
        lattice_per_axis: p.lattice_per_axis,
        seed,
        ..SampleSpec::default()
    }
}

fn run_task(s: &Scenario, seed: u64, tol: Option<f64>) -> Run {
    let g = s.group_action();
    let norm = &s.norm;
    let f = s.objective_fn();
    let obj = || f.as_ref().expect("validated at load");
    match &s.task {
        Task::Symmetrize(p) => {
            let x = v(&p.x);
            match g.symmetrize(&x) {
                Ok(xb) => {
                    let residual = g.invariance_residual(&xb);
                    let cert = json!({ "x": p.x, "x_bar": xb.as_slice(), "residual": residual, "order": g.order() });
                    Run::new(pass_if(residual <= tol.unwrap_or(1e-9)), cert)
                }
                Err(e) => Run::failed(e),
            }
        }
        Task::CheckInvariance(p) => check_run(check_g_invariance(obj(), &g, &samples(p, seed), tol.unwrap_or(1e-9)), p.expect),
        Task::CheckGconvexity(p) => check_run(check_g_convexity(obj(), &g, &samples(p, seed), tol.unwrap_or(1e-9)), p.expect),
        Task::Ekeland(p) => {
            let mut params = EkelandParams::new(p.epsilon, p.delta, v(&p.x0)).with_seed(seed);
            params.inner_budget = p.inner_budget.unwrap_or(params.inner_budget);
            params.starts = p.starts.unwrap_or(params.starts);
            params.stop_step = p.stop_step.unwrap_or(params.stop_step);
            params.verification_points = p.verification_points.unwrap_or(params.verification_points);
            params.tol = tol.unwrap_or(params.tol);
            match ekeland_minimize(obj(), &g, norm, &params) {
                Ok(c) => {
                    let outcome = if c.budget_exhausted {
                        Outcome::BudgetExhausted
                    } else {
                        pass_if(c.is_valid(params.tol))
                    };
                    let run = Run::new(outcome, payload(&c));
                    if c.distance_hypothesis || c.distance_bound_ok {
                        run
                    } else {
                        run.with_message(format!(
                            "φ(x̄₀) − inf ≈ {:.3e} exceeds δ; only ε‖x̄₀ − x̃‖ ≤ φ(x̄₀) − φ(x̃) is certified",
                            c.phi_bar0 - c.inf_estimate
                        ))
                    }
                }
                Err(e) => ekeland_error(e),
            }
        }
        Task::PalaisSmale(p) => match palais_smale(obj(), &g, norm, &v(&p.x0), p.n_max, seed) {
            Ok(r) => {
                let ok = r.gradient_bound_holds(tol.unwrap_or(1e-6))
                    && r.monotone(1e-9)
                    && r.invariance.iter().all(|x| *x <= 1e-9);
                Run::new(pass_if(ok), payload(&r))
            }
            Err(e) => consequence_error(e),
        },
        Task::DenseRange(p) => {
            let targets: Vec<DualFunctional> = p.targets.iter().map(|t| DualFunctional::new(v(t))).collect();
            match dense_range_probe(obj(), &g, norm, p.k, p.c, &targets, p.iters, seed) {
                Ok(res) => {
                    let t = tol.unwrap_or(1e-4);
                    let ok = res.iter().all(|r| r.residual <= t);
                    Run::new(pass_if(ok), payload(&res))
                }
                Err(e) => consequence_error(e),
            }
        }
        Task::Separate(p) => {
            let a = p.a.build(norm).expect("validated at load");
            let b = p.b.build(norm).expect("validated at load");
            let res = if p.strict { separate_strict(&a, &b, &g) } else { separate(&a, &b, &g) };
            match res {
                Ok(c) => {
                    let check = c.verify(&a, &b, p.samples, seed);
                    let t = tol.unwrap_or(1e-8);
                    let ok = check.excess_a <= t && check.excess_b <= t && c.functional.adjoint_residual(&g) <= 1e-9;
                    Run::new(pass_if(ok), json!({ "separation": payload(&c), "check": payload(&check) }))
                }
                Err(e) => separation_error(e),
            }
        }
        Task::BishopPhelps(p) => {
            let c = p.body.build(norm).expect("validated at load");
            match bishop_phelps(&DualFunctional::new(v(&p.f)), &c, &g, norm, p.epsilon, seed) {
                Ok(cert) => Run::new(pass_if(cert.holds(tol.unwrap_or(1e-8))), payload(&cert)),
                Err(e) => consequence_error(e),
            }
        }
        Task::BronstedRockafellar(p) => {
            let x0star = DualFunctional::new(v(&p.x0star));
            match bronsted_rockafellar(obj(), &g, norm, &v(&p.x0), &x0star, p.epsilon, p.lambda, seed) {
                Ok(cert) => Run::new(pass_if(cert.holds(tol.unwrap_or(1e-8))), payload(&cert)),
                Err(e) => consequence_error(e),
            }
        }
        Task::DualDescription(p) => match dual_description_check(obj(), &g, p.samples, seed) {
            Ok(rep) => {
                let ok = rep.equal && rep.max_angle <= tol.unwrap_or(1e-8);
                Run::new(pass_if(ok), payload(&rep))
            }
            Err(e) => consequence_error(e),
        },
    }
}

/// Runs `s`; the scenario's own seed and tolerance yield to `o`.
pub fn execute(s: &Scenario, o: Overrides) -> RunRecord {
    let seed = o.seed.unwrap_or(s.seed);
    let started = Utc::now();
    let run = run_task(s, seed, o.tol.or(s.tol));
    RunRecord {
        schema: SCHEMA,
        scenario: s.name.clone(),
        task: s.task.kind(),
        seed,
        started,
        finished: Utc::now(),
        outcome: run.outcome,
        message: run.message,
        certificate: run.certificate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse;

    fn one(src: &str) -> RunRecord {
        execute(&parse(src).unwrap()[0], Overrides::default())
    }

    #[test]
    fn symmetrize_record() {
        let r = one(
            r#"
[[scenario]]
name = "avg"
dimension = 3
group = { preset = "sym", n = 3 }
task = "symmetrize"
params = { x = [3.0, 0.0, 0.0] }
"#,
        );
        assert_eq!(r.outcome, Outcome::Pass);
        assert_eq!(r.certificate["x_bar"], json!([1.0, 1.0, 1.0]));
    }

    #[test]
    fn check_expectations() {
        let src = r#"
[[scenario]]
name = "tent"
dimension = 1
group = { preset = "sign", n = 1 }
objective = "tent"
task = "check-gconvexity"
params = { expect = "violated" }
"#;
        let r = one(src);
        assert_eq!(r.outcome, Outcome::Pass);
        assert_eq!(r.certificate["witness"], json!([0.5]));
        let r = one(&src.replace("\"violated\"", "\"holds\""));
        assert_eq!(r.outcome, Outcome::Fail);
    }

    #[test]
    fn separation_of_touching_closed_bodies_is_degenerate() {
        let r = one(
            r#"
[[scenario]]
name = "touch"
dimension = 2
group = { preset = "sym", n = 2 }
task = "separate"
[scenario.params]
a = { kind = "cube", center = [0.0, 0.0] }
b = { kind = "cube", center = [2.0, 2.0] }
"#,
        );
        assert_eq!(r.outcome, Outcome::Degenerate, "{r:?}");
    }

    #[test]
    fn overrides_replace_seed() {
        let s = &parse(
            r#"
[[scenario]]
name = "dd"
dimension = 2
group = { preset = "sym", n = 2 }
objective = "gaussian_bump"
task = "dual-description"
seed = 1
"#,
        )
        .unwrap()[0];
        let r = execute(s, Overrides { seed: Some(9), tol: None });
        assert_eq!((r.seed, r.outcome), (9, Outcome::Pass));
    }
}
