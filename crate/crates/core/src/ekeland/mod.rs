//! Invariant Ekeland iteration with a posteriori certificates.
//!
//! Iterates live in the fixed subspace `X_G` and are searched in its
//! coordinates. Stage `n` approximates `b_n = inf φ` over the cone region
//! `R_n = {x ∈ X_G : φ(x) + ε‖x − x_n‖ ≤ φ(x_n)}` with a seeded multi-start
//! Nelder-Mead. The approximate stage infimum is `b̂_n = φ(x_{n+1})`; the
//! recorded `b_n` is the running lower estimate `max_{k≤n} (b̂_k − δ/2^{k+2})`.
//!
//! The returned certificate is checked after the fact on a full-space cloud:
//! it does not rely on the inner searches being exact.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::func::{check_g_convexity, check_g_invariance, CheckReport, EpigraphPoint, FuncError, ScalarFunction};
use crate::group::{GroupAction, GroupError};
use crate::sampling::{self, SampleSpec};
use crate::space::{check_dim, serde_extended, serde_vector, NormSpec, SpaceError, Vector};

pub(crate) mod nelder_mead;

use nelder_mead::{NmOptions, NmResult};

/// Values below this are taken as evidence that `φ` is unbounded below.
pub const UNBOUNDED_BELOW: f64 = -1e9;
/// Invariance tolerance for iterates.
pub const ITERATE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EkelandError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Func(#[from] FuncError),
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("objective is not flagged {0}")]
    Flags(&'static str),
    #[error("preflight {:?} check failed (max violation {})", .0.kind, .0.max_violation)]
    Preflight(Box<CheckReport>),
    #[error("start point has no finite value (φ(x̄₀) = {value})")]
    InfeasibleStart { value: f64 },
    #[error("objective appears unbounded below (value {value:e})")]
    UnboundedBelow { value: f64, point: Vec<f64> },
}

fn d_budget() -> usize {
    2000
}
fn d_stop() -> f64 {
    1e-9
}
fn d_starts() -> usize {
    8
}
fn d_points() -> usize {
    10_000
}
fn d_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EkelandParams {
    pub epsilon: f64,
    pub delta: f64,
    #[serde(with = "serde_vector")]
    pub x0: Vector,
    /// Function evaluations per start and stage.
    #[serde(default = "d_budget")]
    pub inner_budget: usize,
    /// Stop once the step bound `δ/(ε·2^{n+1})` drops below this.
    #[serde(default = "d_stop")]
    pub stop_step: f64,
    #[serde(default = "d_starts")]
    pub starts: usize,
    #[serde(default)]
    pub seed: u64,
    /// Size of the uniform part of the verification cloud.
    #[serde(default = "d_points")]
    pub verification_points: usize,
    #[serde(default = "d_tol")]
    pub tol: f64,
}

impl EkelandParams {
    pub fn new(epsilon: f64, delta: f64, x0: Vector) -> Self {
        Self {
            epsilon,
            delta,
            x0,
            inner_budget: d_budget(),
            stop_step: d_stop(),
            starts: d_starts(),
            seed: 0,
            verification_points: d_points(),
            tol: d_tol(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), EkelandError> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !pos(self.epsilon) || !pos(self.delta) {
            return Err(EkelandError::BadParams(format!(
                "epsilon and delta must be positive (got {}, {})",
                self.epsilon, self.delta
            )));
        }
        if !pos(self.stop_step) || self.inner_budget < 10 || self.starts == 0 {
            return Err(EkelandError::BadParams(
                "stop_step > 0, inner_budget ≥ 10 and starts ≥ 1 are required".into(),
            ));
        }
        Ok(())
    }

    /// `δ/(ε·2^{n+1})`.
    pub fn step_bound(&self, n: usize) -> f64 {
        self.delta / (self.epsilon * 2f64.powi(n as i32 + 1))
    }
}

/// One iterate `x_k` with its value and stage infimum estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub k: usize,
    #[serde(with = "serde_vector")]
    pub x: Vector,
    pub phi: f64,
    /// Running lower estimate `b_k`; absent for the last iterate.
    pub b: Option<f64>,
    /// Approximate infimum `b̂_k` over `R_k`.
    pub b_hat: Option<f64>,
    /// `‖x_k − x_{k−1}‖` (k ≥ 1).
    pub step: Option<f64>,
    /// `δ/(ε·2^k)` (k ≥ 1).
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EkelandState {
    pub n: usize,
    #[serde(with = "serde_vector")]
    pub x_n: Vector,
    pub phi_n: f64,
    pub b_n: Option<f64>,
    pub history: Vec<StageRecord>,
}

/// `min over cloud of φ(x) + ε‖x − x̃‖ − φ(x̃)` with its worst point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginReport {
    #[serde(with = "serde_extended")]
    pub margin: f64,
    pub witness: Option<Vec<f64>>,
    /// `φ(x̃)`.
    pub lhs: f64,
    /// `φ(w) + ε‖w − x̃‖` at the witness.
    #[serde(with = "serde_extended")]
    pub rhs: f64,
    pub points: usize,
    /// Points `x ≠ x̃` where the margin is exactly zero.
    pub exact_zeros: usize,
    /// Points where `φ` is undefined.
    pub undefined: usize,
}

impl MarginReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.margin >= -tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EkelandCertificate {
    #[serde(with = "serde_vector")]
    pub x_tilde: Vector,
    pub phi_tilde: f64,
    #[serde(with = "serde_vector")]
    pub x_bar0: Vector,
    pub phi_bar0: f64,
    pub invariance_residual: f64,
    #[serde(with = "serde_extended")]
    pub inequality_margin: f64,
    pub margin: MarginReport,
    /// `‖x̄₀ − x̃‖`.
    pub distance: f64,
    /// `δ/ε`.
    pub distance_bound: f64,
    pub distance_bound_ok: bool,
    /// `φ(x̄₀) < inf_estimate + δ`, the hypothesis of the distance clause.
    pub distance_hypothesis: bool,
    /// Best value found over `X_G` by an unrestricted search.
    pub inf_estimate: f64,
    /// `‖x̄₀ − x_0‖` for the pre-stage choice of `x_0`.
    pub pre_stage_jump: f64,
    /// Recorded steps obey `‖x_n − x_{n+1}‖ ≤ δ/(ε·2^{n+1})`.
    pub steps_ok: bool,
    pub stages: usize,
    pub verification_points: usize,
    pub budget_exhausted: bool,
    pub evaluations: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub history: Vec<StageRecord>,
}

impl EkelandCertificate {
    pub fn state(&self) -> EkelandState {
        let last = self.history.last().expect("history starts with x_0");
        EkelandState {
            n: last.k,
            x_n: last.x.clone(),
            phi_n: last.phi,
            b_n: self.history.iter().rev().find_map(|r| r.b),
            history: self.history.clone(),
        }
    }

    /// The conclusions that are meant to hold regardless of the hypothesis.
    pub fn is_valid(&self, tol: f64) -> bool {
        self.invariance_residual <= tol && self.margin.holds(tol) && self.steps_ok
    }
}

/// `(p − apex) ∈ K_ε`, i.e. `p.height − apex.height ≤ −ε‖p.point − apex.point‖`.
pub fn cone_member(
    p: &EpigraphPoint,
    apex: &EpigraphPoint,
    epsilon: f64,
    norm: &NormSpec,
) -> Result<bool, SpaceError> {
    check_dim(&p.point, apex.point.len())?;
    Ok(p.height - apex.height <= -epsilon * norm.dist(&p.point, &apex.point))
}

/// The default verification cloud: `count` uniform points of the box of
/// radius `2·max(‖x̄₀‖, ‖x̃‖) + 1` about the origin, their orbit images, and
/// local perturbations of `x̃` at scales `10⁻¹ … 10⁻⁸`.
pub fn verification_cloud(
    g: &GroupAction,
    x_bar0: &Vector,
    x_tilde: &Vector,
    count: usize,
    seed: u64,
) -> Vec<Vector> {
    let n = g.dim();
    let radius = 2.0 * x_bar0.amax().max(x_tilde.amax()).max(x_bar0.norm().max(x_tilde.norm())) + 1.0;
    let mut r = sampling::rng(seed, 21);
    let origin = Vector::zeros(n);
    let base: Vec<Vector> = (0..count).map(|_| sampling::uniform_box(&mut r, &origin, radius)).collect();
    let mut pts = Vec::with_capacity(base.len() * (g.order() + 1) + 256);
    for x in &base {
        pts.push(x.clone());
        for m in g.elements().iter().skip(1) {
            pts.push(m * x);
        }
    }
    for s in 1..=8 {
        let scale = 10f64.powi(-s);
        for _ in 0..16 {
            pts.push(x_tilde + sampling::unit_direction(&mut r, n) * scale);
        }
        for i in 0..n {
            let mut e = Vector::zeros(n);
            e[i] = scale;
            pts.push(x_tilde + &e);
            pts.push(x_tilde - e);
        }
    }
    pts
}

/// Evaluates the Ekeland inequality `φ(x̃) ≤ φ(x) + ε‖x − x̃‖` on `cloud`.
///
/// ```
/// use givp::ekeland::verify_ekeland_inequality;
/// use givp::func::catalog;
/// use givp::{NormSpec, Vector};
///
/// let tent = catalog::get("tent", 1).unwrap();
/// let cloud: Vec<Vector> = (0..=8).map(|i| Vector::from_element(1, i as f64 / 8.0)).collect();
/// let r = verify_ekeland_inequality(&tent, &Vector::zeros(1), 0.5, &NormSpec::L2, &cloud);
/// assert_eq!((r.lhs, r.rhs, r.margin), (1.0, 0.25, -0.75));
/// ```
pub fn verify_ekeland_inequality(
    phi: &ScalarFunction,
    x_tilde: &Vector,
    epsilon: f64,
    norm: &NormSpec,
    cloud: &[Vector],
) -> MarginReport {
    let base = phi.eval_raw(x_tilde);
    let vals: Vec<(f64, f64)> = cloud
        .par_iter()
        .map(|x| {
            if x == x_tilde {
                return (f64::INFINITY, f64::INFINITY);
            }
            let rhs = phi.eval_raw(x) + epsilon * norm.dist(x, x_tilde);
            (rhs - base, rhs)
        })
        .collect();
    let mut report = MarginReport {
        margin: f64::INFINITY,
        witness: None,
        lhs: base,
        rhs: f64::INFINITY,
        points: cloud.len(),
        exact_zeros: 0,
        undefined: 0,
    };
    for (i, &(m, rhs)) in vals.iter().enumerate() {
        if m.is_nan() {
            report.undefined += 1;
            continue;
        }
        if m == 0.0 {
            report.exact_zeros += 1;
        }
        if m < report.margin {
            report.margin = m;
            report.rhs = rhs;
            report.witness = Some(cloud[i].iter().copied().collect());
        }
    }
    report
}

/// Every recorded step obeys `‖x_n − x_{n+1}‖ ≤ δ/(ε·2^{n+1}) + tol` and
/// every iterate is invariant within [`ITERATE_TOL`]. Steps are measured in
/// the group's norm.
pub fn nested_diameter_check(state: &EkelandState, params: &EkelandParams, g: &GroupAction, tol: f64) -> bool {
    step_slacks(state, params, g.norm()).iter().all(|s| *s >= -tol)
        && state.history.iter().all(|r| g.invariance_residual(&r.x) <= ITERATE_TOL)
}

/// `bound − step` for every consecutive pair of iterates.
pub fn step_slacks(state: &EkelandState, params: &EkelandParams, norm: &NormSpec) -> Vec<f64> {
    state
        .history
        .windows(2)
        .enumerate()
        .map(|(n, w)| params.step_bound(n) - norm.dist(&w[1].x, &w[0].x))
        .collect()
}

struct Search<'a> {
    phi: &'a ScalarFunction,
    basis: &'a nalgebra::DMatrix<f64>,
    starts: usize,
    seed: u64,
}

impl Search<'_> {
    fn embed(&self, c: &Vector) -> Vector {
        self.basis * c
    }

    /// Multi-start minimization of `obj` near `c0` with starts drawn in the
    /// coordinate ball of radius `radius`; infeasible draws are pulled back
    /// toward `c0`.
    fn run(&self, obj: &(dyn Fn(&Vector) -> f64 + Sync), c0: &Vector, radius: f64, budget: usize, stream: u64) -> (NmResult, usize) {
        let k = c0.len();
        let mut r = sampling::rng(self.seed, stream);
        let mut starts = vec![c0.clone()];
        for _ in 1..if k == 0 { 1 } else { self.starts } {
            let d = sampling::uniform_ball(&mut r, &Vector::zeros(k), radius);
            let mut s = c0 + &d;
            let mut t = 1.0;
            while !obj(&s).is_finite() && t > 1e-6 {
                t *= 0.5;
                s = c0 + &d * t;
            }
            starts.push(s);
        }
        let opts = NmOptions {
            scale: (0.5 * radius).max(1e-12),
            max_evals: budget,
            xtol: (radius * 1e-10).max(1e-15),
            ftol: 0.0,
        };
        let results: Vec<NmResult> = starts.par_iter().map(|s| nelder_mead::minimize(obj, s, opts)).collect();
        let evals = results.iter().map(|r| r.evals).sum();
        let mut best = 0;
        for (i, res) in results.iter().enumerate() {
            if res.f < results[best].f {
                best = i;
            }
        }
        (results.into_iter().nth(best).expect("at least one start"), evals)
    }
}

/// Runs the invariant Ekeland construction and certifies its output.
///
/// The objective must be flagged proper, bounded below and lsc, and must pass
/// the invariance and G-convexity preflight; a failing preflight returns the
/// check report with its witness.
pub fn ekeland_minimize(
    phi: &ScalarFunction,
    g: &GroupAction,
    norm: &NormSpec,
    params: &EkelandParams,
) -> Result<EkelandCertificate, EkelandError> {
    params.validate()?;
    check_dim(&params.x0, g.dim())?;
    let flags = phi.flags();
    if !flags.proper {
        return Err(EkelandError::Flags("proper"));
    }
    if !flags.bounded_below {
        return Err(EkelandError::Flags("bounded_below"));
    }
    if !flags.declared_lsc {
        return Err(EkelandError::Flags("lsc"));
    }
    let x_bar0 = g.symmetrize(&params.x0)?;
    let pre = SampleSpec::default()
        .with_radius(2.0f64.max(2.0 * x_bar0.amax() + 1.0))
        .with_seed(params.seed);
    for report in [
        check_g_invariance(phi, g, &pre, 1e-9),
        check_g_convexity(phi, g, &pre, 1e-9),
    ] {
        if !report.holds() {
            return Err(EkelandError::Preflight(Box::new(report)));
        }
    }
    run_unchecked(phi, g, norm, params, &x_bar0)
}

pub(crate) fn run_unchecked(
    phi: &ScalarFunction,
    g: &GroupAction,
    norm: &NormSpec,
    params: &EkelandParams,
    x_bar0: &Vector,
) -> Result<EkelandCertificate, EkelandError> {
    let (eps, delta) = (params.epsilon, params.delta);
    let phi_bar0 = phi.value(x_bar0)?;
    if !phi_bar0.is_finite() {
        return Err(EkelandError::InfeasibleStart { value: phi_bar0 });
    }
    let fixed = g.fixed_subspace();
    let search = Search {
        phi,
        basis: &fixed.basis,
        starts: params.starts,
        seed: params.seed,
    };
    let mut evaluations = 0;
    let unbounded = |v: f64, x: &Vector| -> Result<(), EkelandError> {
        if v < UNBOUNDED_BELOW {
            Err(EkelandError::UnboundedBelow {
                value: v,
                point: x.iter().copied().collect(),
            })
        } else {
            Ok(())
        }
    };
    let value_at = |c: &Vector| {
        let v = search.phi.eval_raw(&search.embed(c));
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    // unrestricted search over X_G for the infimum estimate
    let c_bar0 = fixed.coords(x_bar0);
    let scale = 1.0f64.max(2.0 * c_bar0.norm());
    let (glob, ev) = search.run(&value_at, &c_bar0, scale, params.inner_budget, 1);
    evaluations += ev;
    unbounded(glob.f, &search.embed(&glob.x))?;
    let inf_estimate = glob.f.min(phi_bar0);

    let cone_obj = |xn: Vector, fxn: f64| {
        let search = &search;
        move |c: &Vector| {
            let x = search.embed(c);
            let v = search.phi.eval_raw(&x);
            if v.is_finite() && v + eps * norm.dist(&x, &xn) <= fxn {
                v
            } else {
                f64::INFINITY
            }
        }
    };
    let region_radius = |fxn: f64, lower: f64| ((fxn - lower) / eps).max(1e-15);

    // pre-stage: keep x̄₀ when it is already within δ/2 of the estimate
    let mut c_n = c_bar0.clone();
    let mut x_n = x_bar0.clone();
    let mut phi_n = phi_bar0;
    if phi_bar0 >= inf_estimate + 0.5 * delta {
        let obj = cone_obj(x_n.clone(), phi_n);
        let (res, ev) = search.run(&obj, &c_n, region_radius(phi_n, inf_estimate - delta), params.inner_budget, 2);
        evaluations += ev;
        if res.f.is_finite() && res.f < phi_n {
            c_n = res.x;
            x_n = search.embed(&c_n);
            phi_n = res.f;
        }
    }
    let pre_stage_jump = norm.dist(&x_n, x_bar0);

    let mut history = vec![StageRecord {
        k: 0,
        x: x_n.clone(),
        phi: phi_n,
        b: None,
        b_hat: None,
        step: None,
        bound: None,
    }];
    let mut coords = vec![c_n];
    let mut reran = Vec::<bool>::new();
    let mut budget_exhausted = false;
    let mut n = 0;
    while params.step_bound(n) >= params.stop_step {
        let lower = if n == 0 {
            inf_estimate - 0.5 * delta
        } else {
            history[n - 1].b.expect("recorded stage")
        };
        let budget = if reran.get(n).copied().unwrap_or(false) {
            2 * params.inner_budget
        } else {
            params.inner_budget
        };
        let obj = cone_obj(history[n].x.clone(), history[n].phi);
        let (res, ev) = search.run(&obj, &coords[n], region_radius(history[n].phi, lower), budget, 100 + n as u64);
        evaluations += ev;
        if !res.converged {
            budget_exhausted = true;
        }
        let (c_next, f_next) = if res.f.is_finite() && res.f <= history[n].phi {
            (res.x, res.f)
        } else {
            (coords[n].clone(), history[n].phi)
        };
        let x_next = search.embed(&c_next);
        unbounded(f_next, &x_next)?;
        // a value below an earlier stage's slack window means that stage's
        // search was short; rerun it once with a doubled budget
        let stale = (0..n).find(|&j| f_next < history[j].b_hat.expect("recorded") - delta / 2f64.powi(j as i32 + 2));
        if let Some(j) = stale {
            if reran.len() <= j {
                reran.resize(j + 1, false);
            }
            if !reran[j] {
                reran[j] = true;
                history.truncate(j + 1);
                coords.truncate(j + 1);
                history[j].b = None;
                history[j].b_hat = None;
                n = j;
                continue;
            }
            budget_exhausted = true;
        }
        let b_hat = if n == 0 { f_next.min(inf_estimate) } else { f_next };
        let slack = delta / 2f64.powi(n as i32 + 2);
        let prev = if n == 0 { f64::NEG_INFINITY } else { history[n - 1].b.expect("recorded") };
        history[n].b_hat = Some(b_hat);
        history[n].b = Some(prev.max(b_hat - slack));
        let step = norm.dist(&x_next, &history[n].x);
        history.push(StageRecord {
            k: n + 1,
            x: x_next,
            phi: f_next,
            b: None,
            b_hat: None,
            step: Some(step),
            bound: Some(params.step_bound(n)),
        });
        coords.push(c_next);
        n += 1;
    }

    let last = history.last().expect("nonempty");
    let x_tilde = last.x.clone();
    let phi_tilde = last.phi;
    let cloud = verification_cloud(g, x_bar0, &x_tilde, params.verification_points, params.seed);
    let margin = verify_ekeland_inequality(phi, &x_tilde, eps, norm, &cloud);
    let distance = norm.dist(x_bar0, &x_tilde);
    let steps_ok = history
        .iter()
        .all(|r| r.step.zip(r.bound).is_none_or(|(s, b)| s <= b + 1e-10));
    Ok(EkelandCertificate {
        invariance_residual: g.invariance_residual(&x_tilde),
        inequality_margin: margin.margin,
        verification_points: margin.points,
        distance,
        distance_bound: delta / eps,
        distance_bound_ok: distance <= delta / eps + params.tol,
        distance_hypothesis: phi_bar0 < inf_estimate + delta,
        inf_estimate,
        pre_stage_jump,
        steps_ok,
        stages: history.len() - 1,
        budget_exhausted,
        evaluations,
        epsilon: eps,
        delta,
        seed: params.seed,
        x_bar0: x_bar0.clone(),
        phi_bar0,
        x_tilde,
        phi_tilde,
        margin,
        history,
    })
}

#[cfg(test)]
mod tests;
