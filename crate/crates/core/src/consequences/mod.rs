//! Consequences of the invariant Ekeland principle, each returning a
//! certificate that is re-verified on samples.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conic::{Affine, ConicError, Program};
use crate::ekeland::{ekeland_minimize, EkelandError, EkelandParams};
use crate::func::{bump_transform, check_g_convexity, Flags, FuncError, ScalarFunction};
use crate::group::{GroupAction, GroupError};
use crate::linalg::{max_principal_angle, range_basis, RANK_TOL};
use crate::sampling::{self, SampleSpec};
use crate::separation::{BodyKind, ConvexBody, DualFunctional, SeparationError};
use crate::space::{check_dim, serde_extended, serde_vector, serde_vectors, NormSpec, SpaceError, Vector};

/// Invariance tolerance for points and functionals in certificates.
pub const INVARIANT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConsequenceError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Func(#[from] FuncError),
    #[error(transparent)]
    Ekeland(#[from] EkelandError),
    #[error(transparent)]
    Separation(#[from] SeparationError),
    #[error(transparent)]
    Conic(#[from] ConicError),
    #[error("functional is not invariant (residual {residual:e})")]
    NotInvariant { residual: f64 },
    #[error("target has dual norm {norm} > k = {k}")]
    OutsideBall { norm: f64, k: f64 },
    #[error("growth f(x) ≥ k‖x‖ + c fails at {point:?}")]
    Growth { point: Vec<f64> },
    #[error("x0star is not an ε-subgradient at x0 (margin {})", .0.margin)]
    Precondition(Box<SubgradientVerdict>),
    #[error("no subgradient found within the search budget")]
    SubgradientSearch { transcript: Vec<String> },
    #[error("perturbation ‖h‖ = {norm} exceeds ε = {epsilon}")]
    PerturbationTooLarge { norm: f64, epsilon: f64 },
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
    #[error("degenerate: {reason}")]
    Degenerate { reason: String, dual_fixed_dim: usize },
}

fn require_invariant(u: &DualFunctional, g: &GroupAction) -> Result<(), ConsequenceError> {
    let residual = u.adjoint_residual(g);
    if residual > INVARIANT_TOL {
        return Err(ConsequenceError::NotInvariant { residual });
    }
    Ok(())
}

/// Deterministic argmin: smallest value, first index on ties.
fn argmin(vals: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in vals.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        if best.is_none_or(|b| *v < vals[b]) {
            best = Some(i);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PalaisSmaleRun {
    #[serde(with = "serde_vectors")]
    pub points: Vec<Vector>,
    pub values: Vec<f64>,
    /// `‖∇φ(x_n)‖_*` in the dual of the configured norm.
    pub grad_norms: Vec<f64>,
    pub invariance: Vec<f64>,
    pub n_max: usize,
}

impl PalaisSmaleRun {
    /// `grad_norms[n] ≤ 1/n + tol` for every `n ≥ 1`.
    pub fn gradient_bound_holds(&self, tol: f64) -> bool {
        self.grad_norms
            .iter()
            .enumerate()
            .all(|(i, g)| *g <= 1.0 / (i + 1) as f64 + tol)
    }

    pub fn monotone(&self, tol: f64) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0] + tol)
    }
}

/// Runs the Ekeland construction with `ε = δ = 1/n` for `n = 1..=n_max`,
/// warm-starting each run at the previous point.
pub fn palais_smale(
    phi: &ScalarFunction,
    g: &GroupAction,
    norm: &NormSpec,
    x0: &Vector,
    n_max: usize,
    seed: u64,
) -> Result<PalaisSmaleRun, ConsequenceError> {
    check_dim(x0, g.dim())?;
    let mut run = PalaisSmaleRun {
        points: Vec::new(),
        values: Vec::new(),
        grad_norms: Vec::new(),
        invariance: Vec::new(),
        n_max,
    };
    let mut start = x0.clone();
    let dual = norm.dual();
    for n in 1..=n_max {
        let t = 1.0 / n as f64;
        let params = EkelandParams::new(t, t, start.clone()).with_seed(seed.wrapping_add(n as u64));
        let cert = ekeland_minimize(phi, g, norm, &params)?;
        let grad = phi.grad_or_fd(&cert.x_tilde)?;
        run.grad_norms.push(dual.of(&grad));
        run.values.push(cert.phi_tilde);
        run.invariance.push(cert.invariance_residual);
        start = cert.x_tilde.clone();
        run.points.push(cert.x_tilde);
    }
    Ok(run)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseRangeResidual {
    #[serde(with = "serde_vector")]
    pub target: Vector,
    /// `min_n ‖∇f(x_n) − u‖_*`.
    pub residual: f64,
    #[serde(with = "serde_vector")]
    pub best_point: Vector,
    pub iterations: usize,
}

/// For each invariant target `u` with `‖u‖_* ≤ k`, minimizes
/// `f − ⟨u, ·⟩` along a Palais-Smale sequence and reports how close
/// `∇f(x_n)` gets to `u`.
#[allow(clippy::too_many_arguments)]
pub fn dense_range_probe(
    f: &ScalarFunction,
    g: &GroupAction,
    norm: &NormSpec,
    k: f64,
    c: f64,
    targets: &[DualFunctional],
    iters: usize,
    seed: u64,
) -> Result<Vec<DenseRangeResidual>, ConsequenceError> {
    let dual = norm.dual();
    for u in targets {
        check_dim(&u.coeffs, g.dim())?;
        require_invariant(u, g)?;
        let un = dual.of(&u.coeffs);
        if un > k + 1e-12 {
            return Err(ConsequenceError::OutsideBall { norm: un, k });
        }
    }
    growth_on_rays(f, g.dim(), norm, k, c, seed)?;
    let mut out = Vec::with_capacity(targets.len());
    for (ti, u) in targets.iter().enumerate() {
        let h = f.minus_linear(&u.coeffs).with_flags(Flags {
            bounded_below: true,
            ..f.flags()
        });
        let mut best = (f64::INFINITY, Vector::zeros(g.dim()));
        let mut used = 0;
        for n in 1..=iters {
            used = n;
            let t = 1.0 / n as f64;
            // cold start: once 1/n is small the first stage can jump from
            // the origin straight to the minimizer of h
            let mut params = EkelandParams::new(t, t, Vector::zeros(g.dim())).with_seed(seed ^ ((ti as u64) << 32) ^ n as u64);
            params.verification_points = 1000;
            let cert = ekeland_minimize(&h, g, norm, &params)?;
            let res = dual.of(&(f.grad_or_fd(&cert.x_tilde)? - &u.coeffs));
            if res < best.0 {
                best = (res, cert.x_tilde);
            }
            if best.0 <= 1e-9 {
                break;
            }
        }
        out.push(DenseRangeResidual {
            target: u.coeffs.clone(),
            residual: best.0,
            best_point: best.1,
            iterations: used,
        });
    }
    Ok(out)
}

/// Checks `f(x) ≥ k‖x‖ + c` along seeded rays.
fn growth_on_rays(f: &ScalarFunction, dim: usize, norm: &NormSpec, k: f64, c: f64, seed: u64) -> Result<(), ConsequenceError> {
    let mut r = sampling::rng(seed, 31);
    for _ in 0..64 {
        let d = sampling::unit_direction(&mut r, dim);
        let d = &d / norm.of(&d);
        for s in [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
            let x = &d * s;
            if f.eval_raw(&x) < k * s + c - 1e-9 {
                return Err(ConsequenceError::Growth {
                    point: x.iter().copied().collect(),
                });
            }
        }
    }
    Ok(())
}

/// Membership query `h ∈ ∂_ε f(x₀)`.
#[derive(Clone, Debug)]
pub struct SubgradientQuery<'a> {
    pub f: &'a ScalarFunction,
    pub x0: Vector,
    pub h: DualFunctional,
    pub epsilon: f64,
    /// Sample cloud centered at `x0`.
    pub grid: SampleSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgradientVerdict {
    pub holds: bool,
    /// `min f(x) − f(x₀) + ε − ⟨h, x − x₀⟩` over the grid.
    #[serde(with = "serde_extended")]
    pub margin: f64,
    pub witness: Option<Vec<f64>>,
    pub points: usize,
    pub tol: f64,
}

fn subgradient_margin(
    f: &ScalarFunction,
    x0: &Vector,
    fx0: f64,
    h: &Vector,
    epsilon: f64,
    pts: &[Vector],
    tol: f64,
) -> SubgradientVerdict {
    let vals: Vec<f64> = pts
        .par_iter()
        .map(|x| f.eval_raw(x) - fx0 + epsilon - h.dot(&(x - x0)))
        .collect();
    let i = argmin(&vals);
    let margin = i.map_or(f64::INFINITY, |i| vals[i]);
    SubgradientVerdict {
        holds: margin >= -tol,
        margin,
        witness: i.filter(|_| margin < -tol).map(|i| pts[i].iter().copied().collect()),
        points: pts.len(),
        tol,
    }
}

/// Evaluates `⟨h, x − x₀⟩ ≤ f(x) − f(x₀) + ε` on the query grid.
pub fn epsilon_subdifferential_check(q: &SubgradientQuery, tol: f64) -> Result<SubgradientVerdict, ConsequenceError> {
    let fx0 = q.f.value(&q.x0)?;
    if !fx0.is_finite() {
        return Err(FuncError::InfiniteValue {
            point: q.x0.iter().copied().collect(),
        }
        .into());
    }
    check_dim(&q.h.coeffs, q.x0.len())?;
    let pts = q.grid.cloud(&q.x0);
    Ok(subgradient_margin(q.f, &q.x0, fx0, &q.h.coeffs, q.epsilon, &pts, tol))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjointInvarianceReport {
    pub holds: bool,
    /// Candidates that passed membership and whose orbits were checked.
    pub members: usize,
    pub checked: usize,
    /// `(candidate, group element)` pairs whose image failed.
    pub failures: Vec<(usize, usize)>,
}

/// For every candidate in `∂_ε f(x₀)`, checks that each `g*·h` is too.
pub fn check_subdiff_adjoint_invariance(
    f: &ScalarFunction,
    g: &GroupAction,
    x0: &Vector,
    candidates: &[DualFunctional],
    epsilon: f64,
    grid: &SampleSpec,
    tol: f64,
) -> Result<AdjointInvarianceReport, ConsequenceError> {
    let mut report = AdjointInvarianceReport {
        holds: true,
        members: 0,
        checked: 0,
        failures: Vec::new(),
    };
    let query = |h: Vector| SubgradientQuery {
        f,
        x0: x0.clone(),
        h: DualFunctional::new(h),
        epsilon,
        grid: grid.clone(),
    };
    for (ci, h) in candidates.iter().enumerate() {
        if !epsilon_subdifferential_check(&query(h.coeffs.clone()), tol)?.holds {
            continue;
        }
        report.members += 1;
        for (gi, m) in g.elements().iter().enumerate() {
            report.checked += 1;
            if !epsilon_subdifferential_check(&query(m.transpose() * &h.coeffs), tol)?.holds {
                report.holds = false;
                report.failures.push((ci, gi));
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BRCertificate {
    #[serde(with = "serde_vector")]
    pub z: Vector,
    pub x_star: DualFunctional,
    pub dist_primal: f64,
    pub dist_dual: f64,
    /// `min f(x) − f(z) − ⟨x*, x − z⟩` on a fresh grid.
    #[serde(with = "serde_extended")]
    pub membership_margin: f64,
    pub membership_points: usize,
    pub smooth: bool,
    pub epsilon: f64,
    pub lambda: f64,
    pub z_invariance: f64,
    pub stages: usize,
}

impl BRCertificate {
    pub fn holds(&self, tol: f64) -> bool {
        self.dist_primal <= self.epsilon / self.lambda + tol
            && self.dist_dual <= self.lambda + tol
            && self.membership_margin >= -tol
            && self.x_star.invariant
            && self.z_invariance <= INVARIANT_TOL
    }
}

const RAY_SCALES: [f64; 3] = [1e-3, 0.1, 1.0];
const RANDOM_RAYS: usize = 64;

fn ray_directions(g: &GroupAction, seed: u64) -> Vec<Vector> {
    let n = g.dim();
    let mut dirs = Vec::new();
    for i in 0..n {
        let mut e = Vector::zeros(n);
        e[i] = 1.0;
        for m in g.elements() {
            let d = m * &e;
            for s in [1.0, -1.0] {
                let d = &d * s;
                if !dirs.iter().any(|q: &Vector| (q - &d).amax() < 1e-12) {
                    dirs.push(d);
                }
            }
        }
    }
    let mut r = sampling::rng(seed, 41);
    for _ in 0..RANDOM_RAYS {
        dirs.push(sampling::unit_direction(&mut r, n));
    }
    dirs
}

/// `min ‖w − x₀*‖_*` subject to `⟨w, x − z⟩ ≤ f(x) − f(z)` on ray samples
/// and `‖w − x₀*‖_* ≤ λ`.
fn nonsmooth_subgradient(
    f: &ScalarFunction,
    g: &GroupAction,
    norm: &NormSpec,
    z: &Vector,
    x0star: &Vector,
    lambda: f64,
    seed: u64,
) -> Result<Vector, ConsequenceError> {
    let n = z.len();
    let fz = f.value(z)?;
    let mut transcript = Vec::new();
    let mut p = Program::new();
    let w = p.add_vars(n);
    let t = p.add_var();
    let mut rows = 0;
    for d in ray_directions(g, seed) {
        for s in RAY_SCALES {
            let x = z + &d * s;
            let fx = f.eval_raw(&x);
            if !fx.is_finite() {
                continue;
            }
            let terms = (0..n).map(|j| (w[j], s * d[j])).collect();
            p.le(Affine::linear(terms), Affine::constant(fx - fz));
            rows += 1;
        }
    }
    transcript.push(format!("{rows} ray constraints at z = {:?}", z.as_slice()));
    let es = (0..n)
        .map(|j| Affine::var(w[j]).plus(Affine::constant(-x0star[j])))
        .collect();
    p.norm_le(&norm.dual(), es, Affine::var(t));
    p.le(Affine::var(t), Affine::constant(lambda));
    p.minimize(vec![(t, 1.0)]);
    match p.solve() {
        Ok(s) => Ok(Vector::from_iterator(n, w.iter().map(|&j| s.x[j]))),
        Err(e) => {
            transcript.push(format!("conic search: {e}"));
            Err(ConsequenceError::SubgradientSearch { transcript })
        }
    }
}

/// Produces invariant `z` and `x* ∈ ∂f(z)` with `‖z − x₀‖ ≤ ε/λ` and
/// `‖x* − x₀*‖_* ≤ λ` from an invariant `x₀* ∈ ∂_ε f(x₀)`.
#[allow(clippy::too_many_arguments)]
pub fn bronsted_rockafellar(
    f: &ScalarFunction,
    g: &GroupAction,
    norm: &NormSpec,
    x0: &Vector,
    x0star: &DualFunctional,
    epsilon: f64,
    lambda: f64,
    seed: u64,
) -> Result<BRCertificate, ConsequenceError> {
    if !(epsilon > 0.0 && lambda > 0.0) {
        return Err(EkelandError::BadParams(format!("ε = {epsilon}, λ = {lambda}")).into());
    }
    require_invariant(x0star, g)?;
    let pre = epsilon_subdifferential_check(
        &SubgradientQuery {
            f,
            x0: x0.clone(),
            h: x0star.clone(),
            epsilon,
            grid: SampleSpec::default().with_seed(seed),
        },
        1e-9,
    )?;
    if !pre.holds {
        return Err(ConsequenceError::Precondition(Box::new(pre)));
    }
    // φ = f − ⟨x₀*, ·⟩ is bounded below by the ε-subgradient inequality
    let phi = f.minus_linear(&x0star.coeffs).with_flags(Flags {
        bounded_below: true,
        ..f.flags()
    });
    let params = EkelandParams::new(lambda, epsilon, x0.clone()).with_seed(seed);
    let cert = ekeland_minimize(&phi, g, norm, &params)?;
    let z = cert.x_tilde;
    let smooth = f.has_grad();
    let raw = if smooth {
        f.grad(&z).expect("gradient present")
    } else {
        nonsmooth_subgradient(f, g, norm, &z, &x0star.coeffs, lambda, seed)?
    };
    let x_star = DualFunctional::new(raw).symmetrized(g);
    let fz = f.value(&z)?;
    let fresh = SampleSpec::default()
        .with_count(10_000)
        .with_seed(seed ^ 0x05ee_db12)
        .with_radius(2.0f64.max(2.0 * z.amax() + 1.0));
    let pts = fresh.cloud(&z);
    let verdict = subgradient_margin(f, &z, fz, &x_star.coeffs, 0.0, &pts, 1e-8);
    Ok(BRCertificate {
        dist_primal: norm.dist(&z, x0),
        dist_dual: norm.dual().dist(&x_star.coeffs, &x0star.coeffs),
        membership_margin: verdict.margin,
        membership_points: verdict.points,
        smooth,
        epsilon,
        lambda,
        z_invariance: g.invariance_residual(&z),
        stages: cert.stages,
        x_star,
        z,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BPCertificate {
    pub h: DualFunctional,
    pub h_norm: f64,
    #[serde(with = "serde_vector")]
    pub attain_point: Vector,
    pub attain_invariance: f64,
    /// `min over samples of (f+h)(x₀) − (f+h)(x)`.
    pub optimality_margin: f64,
    pub points: usize,
    /// Point returned by the Ekeland run on `−f + ι_C`.
    #[serde(with = "serde_vector")]
    pub ekeland_point: Vector,
    /// How `x₀` was placed on the boundary of `C`.
    pub snap: String,
    pub epsilon: f64,
}

impl BPCertificate {
    pub fn holds(&self, tol: f64) -> bool {
        self.h_norm <= self.epsilon + 1e-9
            && self.attain_invariance <= INVARIANT_TOL
            && self.optimality_margin >= -tol
            && self.h.invariant
    }
}

/// `min ‖h‖_*` subject to `σ_C(f + h) ≤ ⟨f + h, x₀⟩`.
fn min_perturbation(c: &ConvexBody, f: &Vector, x0: &Vector, norm: &NormSpec) -> Option<Vector> {
    let n = f.len();
    let mut p = Program::new();
    let w = p.add_vars(n);
    let h = p.add_vars(n);
    let s = p.add_var();
    let t = p.add_var();
    for j in 0..n {
        p.eq(Affine::linear(vec![(w[j], 1.0), (h[j], -1.0)]).plus(Affine::constant(-f[j])));
    }
    c.add_support_le(&mut p, &w, 1.0, s);
    p.le(
        Affine::var(s),
        Affine::linear((0..n).map(|j| (w[j], x0[j])).collect()),
    );
    p.norm_le(&norm.dual(), h.iter().map(|&j| Affine::var(j)).collect(), Affine::var(t));
    p.minimize(vec![(t, 1.0)]);
    p.solve()
        .ok()
        .map(|sol| Vector::from_iterator(n, h.iter().map(|&j| sol.x[j])))
}

/// Largest `t ≥ 0` with `x + t·d ∈ C`.
fn ray_exit(c: &ConvexBody, x: &Vector, d: &Vector) -> f64 {
    match c.kind() {
        BodyKind::Polytope { a, b } => {
            let ax = a * x;
            let ad = a * d;
            (0..b.len())
                .filter(|&i| ad[i] > 1e-14)
                .map(|i| ((b[i] - ax[i]) / ad[i]).max(0.0))
                .fold(f64::INFINITY, f64::min)
        }
        _ => {
            let (mut lo, mut hi) = (0.0, 1.0);
            while c.contains(&(x + d * hi), 0.0) && hi < 1e12 {
                lo = hi;
                hi *= 2.0;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if c.contains(&(x + d * mid), 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        }
    }
}

/// Projects `x` onto the face of active rows within `X_G`.
fn face_snap(c: &ConvexBody, x: &Vector, basis: &DMatrix<f64>) -> Option<Vector> {
    let BodyKind::Polytope { a, b } = c.kind() else {
        return None;
    };
    let ax = a * x;
    let active: Vec<usize> = (0..b.len())
        .filter(|&i| b[i] - ax[i] <= 1e-5 * (1.0 + b[i].abs()))
        .collect();
    if active.is_empty() || basis.ncols() == 0 {
        return None;
    }
    let rows = DMatrix::from_fn(active.len(), a.ncols(), |i, j| a[(active[i], j)]);
    let m = &rows * basis;
    let resid = Vector::from_iterator(active.len(), active.iter().map(|&i| b[i] - ax[i]));
    let dc = m.pseudo_inverse(1e-12).ok()? * resid;
    let y = x + basis * dc;
    c.contains(&y, 1e-12).then_some(y)
}

/// Perturbs an invariant `f` by an invariant `h` with `‖h‖_* ≤ ε` so that
/// `f + h` attains its maximum over the invariant compact body `C` at an
/// invariant point.
pub fn bishop_phelps(
    f: &DualFunctional,
    c: &ConvexBody,
    g: &GroupAction,
    norm: &NormSpec,
    epsilon: f64,
    seed: u64,
) -> Result<BPCertificate, ConsequenceError> {
    check_dim(&f.coeffs, g.dim())?;
    if !(epsilon > 0.0) {
        return Err(EkelandError::BadParams(format!("ε = {epsilon}")).into());
    }
    if matches!(c.kind(), BodyKind::Hull { .. }) {
        return Err(ConsequenceError::Unsupported("vertex hulls; pass the body as a polytope"));
    }
    if !c.is_bounded() {
        return Err(SeparationError::NotCompact { which: "C" }.into());
    }
    if !c.is_invariant(g, 1e-9) {
        return Err(SeparationError::NotInvariant { which: "C" }.into());
    }
    require_invariant(f, g)?;
    let body = c.clone();
    let fc = f.coeffs.clone();
    let ftilde = ScalarFunction::new("-f + indicator_C", move |x: &Vector| {
        if body.contains(x, 0.0) {
            -fc.dot(x)
        } else {
            f64::INFINITY
        }
    })
    .with_flags(Flags::CONVEX);
    let start = g.symmetrize(c.interior_point())?;
    let mut params = EkelandParams::new(epsilon, epsilon, start).with_seed(seed);
    params.verification_points = 2000;
    let cert = ekeland_minimize(&ftilde, g, norm, &params)?;
    let x_ek = cert.x_tilde;

    let fixed = g.fixed_subspace();
    let dir = &fixed.projector * &f.coeffs;
    let mut candidates: Vec<(&'static str, Vector)> = Vec::new();
    if let Some(y) = face_snap(c, &x_ek, &fixed.basis) {
        candidates.push(("face", y));
    }
    if dir.amax() > 1e-14 {
        let t = ray_exit(c, &x_ek, &dir);
        if t.is_finite() {
            candidates.push(("ray", &x_ek + &dir * t));
        }
    }
    candidates.push(("none", x_ek.clone()));
    let mut best: Option<(&'static str, Vector, DualFunctional, f64)> = None;
    for (label, x0) in candidates {
        let Some(h) = min_perturbation(c, &f.coeffs, &x0, norm) else {
            continue;
        };
        let h = DualFunctional::new(h).symmetrized(g);
        let hn = h.dual_norm(norm);
        if best.as_ref().is_none_or(|b| hn < b.3) {
            best = Some((label, x0, h, hn));
        }
    }
    let Some((snap, x0, h, h_norm)) = best else {
        return Err(ConsequenceError::PerturbationTooLarge {
            norm: f64::INFINITY,
            epsilon,
        });
    };
    if h_norm > epsilon + 1e-9 {
        return Err(ConsequenceError::PerturbationTooLarge { norm: h_norm, epsilon });
    }
    let w = &f.coeffs + &h.coeffs;
    let pts = c.sample(10_000, seed ^ 0xb15);
    let top = w.dot(&x0);
    let margin = pts
        .iter()
        .map(|x| top - w.dot(x))
        .fold(f64::INFINITY, f64::min);
    Ok(BPCertificate {
        h_norm,
        attain_invariance: g.invariance_residual(&x0),
        optimality_margin: margin,
        points: pts.len(),
        ekeland_point: x_ek,
        snap: snap.to_string(),
        epsilon,
        attain_point: x0,
        h,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualDescriptionReport {
    pub samples: usize,
    pub gradient_rank: usize,
    pub dual_fixed_dim: usize,
    pub max_angle: f64,
    pub equal: bool,
}

/// Compares `span{∇ψ(x) : x ∈ X_G}`, `ψ = 1/φ²`, with the fixed subspace of
/// the adjoint action.
pub fn dual_description_check(
    phi: &ScalarFunction,
    g: &GroupAction,
    samples: usize,
    seed: u64,
) -> Result<DualDescriptionReport, ConsequenceError> {
    let psi = bump_transform(phi);
    let lemma = check_g_convexity(&psi, g, &SampleSpec::default().with_seed(seed), 1e-9);
    if !lemma.holds() {
        return Err(EkelandError::Preflight(Box::new(lemma)).into());
    }
    let fixed = g.fixed_subspace();
    let dual_fixed = g.adjoint().fixed_subspace();
    let dual_fixed_dim = dual_fixed.dim();
    if fixed.dim() == 0 {
        return Err(ConsequenceError::Degenerate {
            reason: "X_G = {0}: the only gradient sampled on X_G is ∇ψ(0) = 0".into(),
            dual_fixed_dim,
        });
    }
    let mut r = sampling::rng(seed, 51);
    let k = fixed.dim();
    let mut cols = Vec::with_capacity(samples);
    for _ in 0..samples {
        let c = sampling::uniform_ball(&mut r, &Vector::zeros(k), 1.0);
        let x = fixed.embed(&c);
        let grad = psi.grad_or_fd(&x)?;
        if grad.iter().all(|v| v.is_finite()) {
            cols.push(grad);
        }
    }
    if cols.iter().all(|c| c.amax() <= 1e-14) {
        return Err(ConsequenceError::Degenerate {
            reason: "all sampled gradients vanish".into(),
            dual_fixed_dim,
        });
    }
    let span = range_basis(&DMatrix::from_columns(&cols), RANK_TOL);
    let max_angle = max_principal_angle(&span, &dual_fixed.basis);
    Ok(DualDescriptionReport {
        samples: cols.len(),
        gradient_rank: span.ncols(),
        dual_fixed_dim,
        max_angle,
        equal: span.ncols() == dual_fixed_dim && max_angle <= 1e-8,
    })
}
