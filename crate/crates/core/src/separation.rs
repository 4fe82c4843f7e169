//! Invariant separation in `ℝⁿ`.
//!
//! A plain separator is found by conic duality (maximize the support gap
//! `−σ_A(u) − σ_B(−u)` over `‖u‖_* ≤ 1`), then averaged over the adjoint
//! group. Stored values `sup_A ⟨f̄,·⟩` and `inf_B ⟨f̄,·⟩` are exact support
//! evaluations: vertex maxima for bounded polytopes and hulls, closed forms
//! for balls, and a polished LP optimum for unbounded polytopes.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conic::{Affine, ConicError, Program};
use crate::group::{GroupAction, GroupError};
use crate::linalg::{canonical_sign, null_basis, range_basis, RANK_TOL};
use crate::sampling;
use crate::space::{check_dim, serde_vector, NormSpec, SpaceError, Vector};

/// Threshold below which a symmetrized functional counts as zero.
pub const DEGENERATE_TOL: f64 = 1e-10;
/// Gaps at or below this are treated as touching.
pub const GAP_TOL: f64 = 1e-9;

const MAX_VERTEX_COMBOS: usize = 200_000;
const SAMPLE_WINDOW: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeparationError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Conic(#[from] ConicError),
    #[error("polytope is empty")]
    Empty,
    #[error("malformed body: {0}")]
    Malformed(String),
    #[error("the bodies intersect; no separating hyperplane exists")]
    Intersect,
    #[error("the bodies touch (gap {gap:e}); strict separation impossible")]
    ZeroGap { gap: f64 },
    #[error("body {which} is not compact")]
    NotCompact { which: &'static str },
    #[error("body {which} is not invariant under the group")]
    NotInvariant { which: &'static str },
    #[error("degenerate: {0}")]
    Degenerate(String),
    #[error("origin is not an interior point of the body")]
    NotInterior,
    #[error("gauge not supported for {0}")]
    Unsupported(&'static str),
    #[error("subspace spans the whole space")]
    FullSpace,
}

/// A linear functional `x ↦ ⟨u, x⟩` on `X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualFunctional {
    #[serde(with = "serde_vector")]
    pub coeffs: Vector,
    /// Set only after `‖g*·u − u‖_* ≤ tol` was verified for every `g`.
    pub invariant: bool,
}

impl DualFunctional {
    pub fn new(coeffs: Vector) -> Self {
        Self {
            coeffs,
            invariant: false,
        }
    }

    pub fn pair(&self, x: &Vector) -> f64 {
        self.coeffs.dot(x)
    }

    /// `‖u‖_*` for the primal norm `norm`.
    pub fn dual_norm(&self, norm: &NormSpec) -> f64 {
        norm.dual().of(&self.coeffs)
    }

    /// `max_g ‖gᵀ·u − u‖_*` with the group's dual norm.
    pub fn adjoint_residual(&self, g: &GroupAction) -> f64 {
        g.adjoint().invariance_residual(&self.coeffs)
    }

    /// Verifies invariance and records the outcome in the flag.
    pub fn checked(mut self, g: &GroupAction, tol: f64) -> Self {
        self.invariant = self.adjoint_residual(g) <= tol;
        self
    }

    /// `Σ μ(g) gᵀ·u`, the functional `Σ μ(g) (u ∘ g)`.
    pub fn symmetrized(&self, g: &GroupAction) -> Self {
        let adj = g.adjoint();
        DualFunctional::new(adj.symmetrize_unchecked(&self.coeffs)).checked(g, 1e-9)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BodyKind {
    /// `{x : aᵢ·x ≤ bᵢ}`, rows of `a`.
    Polytope { a: DMatrix<f64>, b: Vector },
    Ball {
        center: Vector,
        radius: f64,
        norm: NormSpec,
    },
    Hull { vertices: Vec<Vector> },
}

/// A closed (or, by flag, open) convex body in `ℝⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexBody {
    kind: BodyKind,
    open: bool,
    dim: usize,
    /// Vertices when the body is a bounded polytope or a hull.
    vertices: Option<Vec<Vector>>,
    interior_point: Vector,
}

fn chebyshev_center(a: &DMatrix<f64>, b: &Vector) -> Result<Vector, SeparationError> {
    let (m, n) = a.shape();
    let mut p = Program::new();
    let x = p.add_vars(n);
    let rho = p.add_var();
    for i in 0..m {
        let norm = a.row(i).norm();
        let mut terms: Vec<(usize, f64)> = (0..n).map(|j| (x[j], a[(i, j)])).collect();
        terms.push((rho, norm));
        p.le(Affine::linear(terms), Affine::constant(b[i]));
    }
    p.le(Affine::var(rho), Affine::constant(1.0));
    p.minimize(vec![(rho, -1.0)]);
    let s = p.solve().map_err(|e| match e {
        ConicError::Infeasible => SeparationError::Empty,
        e => e.into(),
    })?;
    if s.x[rho] < -1e-9 {
        return Err(SeparationError::Empty);
    }
    Ok(Vector::from_iterator(n, x.iter().map(|&j| s.x[j])))
}

fn for_each_combination(m: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > m {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + m - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        if idx[i] == i + m - k {
            return;
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn binomial(m: usize, k: usize) -> usize {
    let k = k.min(m.saturating_sub(k));
    let mut r: usize = 1;
    for i in 0..k {
        r = r.saturating_mul(m - i) / (i + 1);
    }
    r
}

fn push_unique(pts: &mut Vec<Vector>, v: Vector, tol: f64) {
    if !pts.iter().any(|p| (p - &v).amax() <= tol) {
        pts.push(v);
    }
}

/// Vertices of `{a x ≤ b}` by enumerating `n`-subsets of rows.
fn polytope_vertices(a: &DMatrix<f64>, b: &Vector) -> Option<Vec<Vector>> {
    let (m, n) = a.shape();
    if binomial(m, n) > MAX_VERTEX_COMBOS {
        return None;
    }
    let mut out = Vec::new();
    for_each_combination(m, n, |rows| {
        let sub = DMatrix::from_fn(n, n, |i, j| a[(rows[i], j)]);
        let rhs = Vector::from_iterator(n, rows.iter().map(|&r| b[r]));
        if let Some(v) = sub.clone().lu().solve(&rhs) {
            // reject near-singular subsystems
            if (sub * &v - &rhs).amax() > 1e-9 * (1.0 + rhs.amax()) {
                return;
            }
            let ax = a * &v;
            if (0..m).all(|i| ax[i] <= b[i] + 1e-9 * (1.0 + b[i].abs())) {
                push_unique(&mut out, v, 1e-9);
            }
        }
    });
    Some(out)
}

impl ConvexBody {
    pub fn polytope(a: DMatrix<f64>, b: Vector) -> Result<Self, SeparationError> {
        let (m, n) = a.shape();
        if b.len() != m || m == 0 || n == 0 {
            return Err(SeparationError::Malformed(format!(
                "{m}×{n} rows with {} bounds",
                b.len()
            )));
        }
        if b.iter().chain(a.iter()).any(|v| !v.is_finite()) {
            return Err(SeparationError::Malformed("non-finite data".into()));
        }
        if (0..m).any(|i| a.row(i).norm() == 0.0) {
            return Err(SeparationError::Malformed("zero row".into()));
        }
        let center = chebyshev_center(&a, &b)?;
        let mut body = ConvexBody {
            dim: n,
            kind: BodyKind::Polytope {
                a: a.clone(),
                b: b.clone(),
            },
            open: false,
            vertices: None,
            interior_point: center,
        };
        let bounded = (0..n).all(|i| {
            let mut e = Vector::zeros(n);
            e[i] = 1.0;
            body.lp_support(&e).is_finite() && body.lp_support(&-e).is_finite()
        });
        if bounded {
            body.vertices = polytope_vertices(&a, &b);
        }
        Ok(body)
    }

    /// `{x : a·x ≤ b}`.
    pub fn halfspace(a: Vector, b: f64) -> Result<Self, SeparationError> {
        let n = a.len();
        Self::polytope(DMatrix::from_row_slice(1, n, a.as_slice()), Vector::from_element(1, b))
    }

    /// `{x : ‖x − c‖∞ ≤ r}` as a polytope.
    pub fn cube(center: Vector, r: f64) -> Result<Self, SeparationError> {
        let n = center.len();
        let mut a = DMatrix::zeros(2 * n, n);
        let mut b = Vector::zeros(2 * n);
        for i in 0..n {
            a[(2 * i, i)] = 1.0;
            b[2 * i] = center[i] + r;
            a[(2 * i + 1, i)] = -1.0;
            b[2 * i + 1] = r - center[i];
        }
        Self::polytope(a, b)
    }

    pub fn ball(center: Vector, radius: f64, norm: NormSpec) -> Result<Self, SeparationError> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(SeparationError::Malformed(format!("radius {radius}")));
        }
        if let NormSpec::WeightedL2 { weights } = &norm {
            if weights.len() != center.len() {
                return Err(SpaceError::DimensionMismatch {
                    expected: center.len(),
                    got: weights.len(),
                }
                .into());
            }
        }
        Ok(ConvexBody {
            dim: center.len(),
            interior_point: center.clone(),
            kind: BodyKind::Ball {
                center,
                radius,
                norm,
            },
            open: false,
            vertices: None,
        })
    }

    pub fn hull(vertices: Vec<Vector>) -> Result<Self, SeparationError> {
        let n = vertices.first().map(|v| v.len()).ok_or(SeparationError::Empty)?;
        for v in &vertices {
            check_dim(v, n)?;
        }
        let mut uniq = Vec::new();
        for v in vertices {
            push_unique(&mut uniq, v, 1e-12);
        }
        let centroid = uniq.iter().fold(Vector::zeros(n), |acc, v| acc + v) / uniq.len() as f64;
        Ok(ConvexBody {
            dim: n,
            interior_point: centroid,
            vertices: Some(uniq.clone()),
            kind: BodyKind::Hull { vertices: uniq },
            open: false,
        })
    }

    /// Marks the body as open (its interior); only the strictness of the
    /// claimed inequalities changes.
    pub fn with_open(mut self, open: bool) -> Self {
        self.open = open;
        self
    }

    pub fn is_open(&self) -> bool {
        self.open
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &BodyKind {
        &self.kind
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self.kind, BodyKind::Polytope { .. }) || self.vertices.is_some()
    }

    /// Vertex list for bounded polytopes and hulls.
    pub fn vertices(&self) -> Option<&[Vector]> {
        self.vertices.as_deref()
    }

    /// A point in the relative interior (Chebyshev center, ball center or
    /// vertex centroid).
    pub fn interior_point(&self) -> &Vector {
        &self.interior_point
    }

    fn lp_support_point(&self, w: &Vector) -> Option<(f64, Vector)> {
        let BodyKind::Polytope { a, b } = &self.kind else {
            unreachable!("polytope only")
        };
        let (m, n) = a.shape();
        let mut p = Program::new();
        let x = p.add_vars(n);
        for i in 0..m {
            let terms = (0..n).map(|j| (x[j], a[(i, j)])).collect();
            p.le(Affine::linear(terms), Affine::constant(b[i]));
        }
        p.minimize((0..n).map(|j| (x[j], -w[j])).collect());
        let s = p.solve().ok()?;
        let mut pt = Vector::from_iterator(n, x.iter().map(|&j| s.x[j]));
        // polish onto the active face so the value is exact up to rounding
        let ax = a * &pt;
        let active: Vec<usize> = (0..m)
            .filter(|&i| (b[i] - ax[i]).abs() <= 1e-6 * (1.0 + b[i].abs()))
            .collect();
        if !active.is_empty() {
            let sub = DMatrix::from_fn(active.len(), n, |i, j| a[(active[i], j)]);
            let resid = Vector::from_iterator(active.len(), active.iter().map(|&i| b[i] - ax[i]));
            if let Ok(pinv) = sub.pseudo_inverse(1e-12) {
                let cand = &pt + pinv * resid;
                let ac = a * &cand;
                if (0..m).all(|i| ac[i] <= b[i] + 1e-12 * (1.0 + b[i].abs())) {
                    pt = cand;
                }
            }
        }
        Some((w.dot(&pt), pt))
    }

    fn lp_support(&self, w: &Vector) -> f64 {
        self.lp_support_point(w).map_or(f64::INFINITY, |s| s.0)
    }

    /// `σ(w) = sup_{x ∈ C} ⟨w, x⟩` with a maximizer when finite.
    pub fn support(&self, w: &Vector) -> (f64, Option<Vector>) {
        match (&self.kind, &self.vertices) {
            (_, Some(vs)) => {
                let mut best = (f64::NEG_INFINITY, None);
                for v in vs {
                    let val = w.dot(v);
                    if val > best.0 {
                        best = (val, Some(v.clone()));
                    }
                }
                best
            }
            (
                BodyKind::Ball {
                    center,
                    radius,
                    norm,
                },
                None,
            ) => {
                let val = w.dot(center) + radius * norm.dual().of(w);
                (val, Some(center + norm.dual_maximizer(w) * *radius))
            }
            _ => match self.lp_support_point(w) {
                Some((v, x)) => (v, Some(x)),
                None => (f64::INFINITY, None),
            },
        }
    }

    /// Closed membership within `tol`.
    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        match &self.kind {
            BodyKind::Polytope { a, b } => {
                let ax = a * x;
                (0..b.len()).all(|i| ax[i] <= b[i] + tol)
            }
            BodyKind::Ball {
                center,
                radius,
                norm,
            } => norm.dist(x, center) <= radius + tol,
            BodyKind::Hull { vertices } => hull_contains(vertices, x, tol),
        }
    }

    /// Strict interior membership (polytopes and balls).
    pub fn interior_contains(&self, x: &Vector) -> bool {
        match &self.kind {
            BodyKind::Polytope { a, b } => {
                let ax = a * x;
                (0..b.len()).all(|i| ax[i] < b[i])
            }
            BodyKind::Ball {
                center,
                radius,
                norm,
            } => norm.dist(x, center) < *radius,
            BodyKind::Hull { vertices } => hull_contains(vertices, x, -1e-12),
        }
    }

    /// Points of the body: vertices (if any) then `count` seeded samples.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<Vector> {
        let mut r = sampling::rng(seed, 11);
        let n = self.dim;
        let mut out: Vec<Vector> = self.vertices.clone().unwrap_or_default();
        match (&self.kind, &self.vertices) {
            (_, Some(vs)) => {
                let k = vs.len().min(n + 1);
                for _ in 0..count {
                    let w = sampling::simplex_weights(&mut r, k);
                    let mut p = Vector::zeros(n);
                    for wi in w {
                        p += &vs[r.random_range(0..vs.len())] * wi;
                    }
                    out.push(p);
                }
            }
            (
                BodyKind::Ball {
                    center,
                    radius,
                    norm,
                },
                _,
            ) => {
                for _ in 0..count {
                    let d = sampling::unit_direction(&mut r, n);
                    let d = &d / norm.of(&d);
                    let rho = radius * r.random::<f64>().powf(1.0 / n as f64);
                    out.push(center + d * rho);
                }
            }
            _ => {
                out.push(self.interior_point.clone());
                let mut tries = 0;
                while out.len() < count + 1 && tries < 200 * count.max(1) {
                    tries += 1;
                    let p = sampling::uniform_box(&mut r, &self.interior_point, SAMPLE_WINDOW);
                    if self.contains(&p, 0.0) {
                        out.push(p);
                    }
                }
            }
        }
        out
    }

    /// `g·C = C` for every `g`, by row matching for polytopes (vertex
    /// matching as fallback when bounded), vertex matching for hulls and
    /// center/norm invariance for balls.
    pub fn is_invariant(&self, g: &GroupAction, tol: f64) -> bool {
        if g.dim() != self.dim {
            return false;
        }
        let vertex_match = |vs: &[Vector]| {
            g.elements().iter().all(|m| {
                vs.iter()
                    .all(|v| vs.iter().any(|w| (m * v - w).amax() <= tol * (1.0 + w.amax())))
            })
        };
        match &self.kind {
            BodyKind::Polytope { a, b } => {
                let rows: Vec<(Vector, f64)> = (0..b.len())
                    .map(|i| {
                        let r = a.row(i).transpose();
                        let s = r.norm();
                        (r / s, b[i] / s)
                    })
                    .collect();
                let rows_match = g.elements().iter().all(|m| {
                    rows.iter().all(|(r, bi)| {
                        let img = m.transpose() * r;
                        rows.iter().any(|(q, bq)| {
                            (&img - q).amax() <= tol && (bi - bq).abs() <= tol * (1.0 + bq.abs())
                        })
                    })
                });
                rows_match || self.vertices.as_deref().is_some_and(vertex_match)
            }
            BodyKind::Hull { vertices } => vertex_match(vertices),
            BodyKind::Ball { center, norm, .. } => {
                let fixed = g.invariance_residual(center) <= tol;
                let mut r = sampling::rng(0x62616c6c, 0);
                let norm_ok = norm == g.norm()
                    || (0..100).all(|_| {
                        let x = sampling::uniform_box(&mut r, &Vector::zeros(self.dim), 1.0);
                        g.elements()
                            .iter()
                            .all(|m| (norm.of(&(m * &x)) - norm.of(&x)).abs() <= tol)
                    });
                fixed && norm_ok
            }
        }
    }

    fn require_invariant(&self, g: &GroupAction, which: &'static str) -> Result<(), SeparationError> {
        if self.is_invariant(g, 1e-9) {
            Ok(())
        } else {
            Err(SeparationError::NotInvariant { which })
        }
    }

    /// Constrains `x ∈ C`.
    pub(crate) fn add_membership(&self, p: &mut Program, x: &[usize]) {
        let n = self.dim;
        match &self.kind {
            BodyKind::Polytope { a, b } => {
                for i in 0..b.len() {
                    let terms = (0..n).map(|j| (x[j], a[(i, j)])).collect();
                    p.le(Affine::linear(terms), Affine::constant(b[i]));
                }
            }
            BodyKind::Ball {
                center,
                radius,
                norm,
            } => {
                let es = (0..n)
                    .map(|j| Affine::var(x[j]).plus(Affine::constant(-center[j])))
                    .collect();
                p.norm_le(norm, es, Affine::constant(*radius));
            }
            BodyKind::Hull { vertices } => {
                let lam = p.add_vars(vertices.len());
                for &l in &lam {
                    p.nonneg(Affine::var(l));
                }
                p.eq(Affine::linear(lam.iter().map(|&l| (l, 1.0)).collect()).plus(Affine::constant(-1.0)));
                for j in 0..n {
                    let mut terms: Vec<(usize, f64)> =
                        lam.iter().zip(vertices).map(|(&l, v)| (l, v[j])).collect();
                    terms.push((x[j], -1.0));
                    p.eq(Affine::linear(terms));
                }
            }
        }
    }

    /// Constrains `σ_C(sign·u) ≤ s`.
    pub(crate) fn add_support_le(&self, p: &mut Program, u: &[usize], sign: f64, s: usize) {
        let n = self.dim;
        match &self.kind {
            BodyKind::Polytope { a, b } => {
                let m = b.len();
                let y = p.add_vars(m);
                for &yi in &y {
                    p.nonneg(Affine::var(yi));
                }
                for j in 0..n {
                    let mut terms: Vec<(usize, f64)> = (0..m).map(|i| (y[i], a[(i, j)])).collect();
                    terms.push((u[j], -sign));
                    p.eq(Affine::linear(terms));
                }
                let by = Affine::linear((0..m).map(|i| (y[i], b[i])).collect());
                p.le(by, Affine::var(s));
            }
            BodyKind::Ball {
                center,
                radius,
                norm,
            } => {
                let t = p.add_var();
                let es = (0..n).map(|j| Affine::linear(vec![(u[j], sign)])).collect();
                p.norm_le(&norm.dual(), es, Affine::var(t));
                let mut terms: Vec<(usize, f64)> = (0..n).map(|j| (u[j], sign * center[j])).collect();
                terms.push((t, *radius));
                p.le(Affine::linear(terms), Affine::var(s));
            }
            BodyKind::Hull { vertices } => {
                for v in vertices {
                    let terms = (0..n).map(|j| (u[j], sign * v[j])).collect();
                    p.le(Affine::linear(terms), Affine::var(s));
                }
            }
        }
    }
}

fn hull_contains(vertices: &[Vector], x: &Vector, tol: f64) -> bool {
    let n = x.len();
    let mut p = Program::new();
    let lam = p.add_vars(vertices.len());
    let slack = p.add_var();
    for &l in &lam {
        p.nonneg(Affine::var(l));
    }
    p.eq(Affine::linear(lam.iter().map(|&l| (l, 1.0)).collect()).plus(Affine::constant(-1.0)));
    let es: Vec<Affine> = (0..n)
        .map(|j| {
            Affine::linear(lam.iter().zip(vertices).map(|(&l, v)| (l, v[j])).collect())
                .plus(Affine::constant(-x[j]))
        })
        .collect();
    p.norm_le(&NormSpec::Linf, es, Affine::var(slack));
    p.minimize(vec![(slack, 1.0)]);
    p.solve().is_ok_and(|s| s.objective <= tol.max(0.0) + 1e-9 && (tol >= 0.0 || s.objective <= 1e-12))
}

/// Output of [`separate`] and [`separate_strict`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationCertificate {
    pub functional: DualFunctional,
    pub alpha: f64,
    pub epsilon_margin: f64,
    pub strict: bool,
    /// `sup_A ⟨f̄, ·⟩`.
    pub sup_a: f64,
    /// `inf_B ⟨f̄, ·⟩`.
    pub inf_b: f64,
    /// `dist(A, B)` from the closest-point program (strict variant only).
    pub distance: Option<f64>,
    #[serde(with = "serde_vector")]
    pub witness_a: Vector,
    #[serde(with = "serde_vector")]
    pub witness_b: Vector,
    /// A is open, so `⟨f̄, x⟩ < α` on A is claimed.
    pub open_a: bool,
}

/// Worst violations of the stored inequalities on a point set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationCheck {
    pub points: usize,
    /// `max_A ⟨f̄,x⟩ − (α − margin)`; ≤ 0 when the claim holds.
    pub excess_a: f64,
    /// `(α + margin) − min_B ⟨f̄,x⟩`; ≤ 0 when the claim holds.
    pub excess_b: f64,
}

impl SeparationCertificate {
    /// Re-evaluates the claim on vertices plus `count` seeded samples of
    /// each body.
    pub fn verify(&self, a: &ConvexBody, b: &ConvexBody, count: usize, seed: u64) -> SeparationCheck {
        let pa = a.sample(count, seed);
        let pb = b.sample(count, seed.wrapping_add(1));
        let f = &self.functional;
        let sup = pa.iter().map(|x| f.pair(x)).fold(f64::NEG_INFINITY, f64::max);
        let inf = pb.iter().map(|x| f.pair(x)).fold(f64::INFINITY, f64::min);
        SeparationCheck {
            points: pa.len() + pb.len(),
            excess_a: sup - (self.alpha - self.epsilon_margin),
            excess_b: (self.alpha + self.epsilon_margin) - inf,
        }
    }
}

/// Maximizes `−σ_A(u) − σ_B(−u)` over `‖u‖_* ≤ 1`; returns `(u, gap)`.
fn max_gap(a: &ConvexBody, b: &ConvexBody, norm: &NormSpec) -> Result<(Vector, f64), SeparationError> {
    let n = a.dim();
    let mut p = Program::new();
    let u = p.add_vars(n);
    let sa = p.add_var();
    let sb = p.add_var();
    a.add_support_le(&mut p, &u, 1.0, sa);
    b.add_support_le(&mut p, &u, -1.0, sb);
    p.norm_le(
        &norm.dual(),
        u.iter().map(|&j| Affine::var(j)).collect(),
        Affine::constant(1.0),
    );
    p.minimize(vec![(sa, 1.0), (sb, 1.0)]);
    let s = p.solve()?;
    Ok((Vector::from_iterator(n, u.iter().map(|&j| s.x[j])), -s.objective))
}

/// A nonzero separator for touching bodies: `⟨u, c_B − c_A⟩ = 1` and
/// `σ_A(u) + σ_B(−u) ≤ 0`.
fn touching_separator(a: &ConvexBody, b: &ConvexBody, norm: &NormSpec) -> Result<Vector, SeparationError> {
    let n = a.dim();
    let d = b.interior_point() - a.interior_point();
    if d.amax() <= 1e-12 {
        return Err(SeparationError::Intersect);
    }
    let mut p = Program::new();
    let u = p.add_vars(n);
    let sa = p.add_var();
    let sb = p.add_var();
    let t = p.add_var();
    a.add_support_le(&mut p, &u, 1.0, sa);
    b.add_support_le(&mut p, &u, -1.0, sb);
    p.le(Affine::linear(vec![(sa, 1.0), (sb, 1.0)]), Affine::constant(0.0));
    p.eq(Affine::linear((0..n).map(|j| (u[j], d[j])).collect()).plus(Affine::constant(-1.0)));
    p.norm_le(&norm.dual(), u.iter().map(|&j| Affine::var(j)).collect(), Affine::var(t));
    p.minimize(vec![(t, 1.0)]);
    match p.solve() {
        Ok(s) => Ok(Vector::from_iterator(n, u.iter().map(|&j| s.x[j]))),
        Err(ConicError::Infeasible) => Err(SeparationError::Intersect),
        Err(e) => Err(e.into()),
    }
}

/// `dist(A, B)` in `norm` with the two closest points.
pub fn body_distance(
    a: &ConvexBody,
    b: &ConvexBody,
    norm: &NormSpec,
) -> Result<(f64, Vector, Vector), SeparationError> {
    let n = a.dim();
    let mut p = Program::new();
    let x = p.add_vars(n);
    let y = p.add_vars(n);
    let t = p.add_var();
    a.add_membership(&mut p, &x);
    b.add_membership(&mut p, &y);
    let es = (0..n)
        .map(|j| Affine::linear(vec![(x[j], 1.0), (y[j], -1.0)]))
        .collect();
    p.norm_le(norm, es, Affine::var(t));
    p.minimize(vec![(t, 1.0)]);
    let s = p.solve()?;
    let xa = Vector::from_iterator(n, x.iter().map(|&j| s.x[j]));
    let yb = Vector::from_iterator(n, y.iter().map(|&j| s.x[j]));
    Ok((norm.dist(&xa, &yb), xa, yb))
}

fn symmetrized_unit(u0: &Vector, g: &GroupAction, norm: &NormSpec) -> Result<DualFunctional, SeparationError> {
    let f = DualFunctional::new(u0.clone()).symmetrized(g);
    let size = f.dual_norm(norm);
    if size < DEGENERATE_TOL {
        return Err(SeparationError::Degenerate(format!(
            "symmetrized separator vanishes (‖f̄‖_* = {size:e}, ‖f₀‖_* = {:e})",
            norm.dual().of(u0)
        )));
    }
    Ok(DualFunctional::new(f.coeffs / size).checked(g, 1e-9))
}

fn prepare(a: &ConvexBody, b: &ConvexBody, g: &GroupAction) -> Result<(), SeparationError> {
    if a.dim() != g.dim() || b.dim() != g.dim() {
        return Err(SpaceError::DimensionMismatch {
            expected: g.dim(),
            got: if a.dim() != g.dim() { a.dim() } else { b.dim() },
        }
        .into());
    }
    a.require_invariant(g, "A")?;
    b.require_invariant(g, "B")
}

/// An invariant hyperplane `{⟨f̄, ·⟩ = α}` with `A` below and `B` above.
///
/// Bodies whose closures are at positive distance are separated through the
/// gap-maximizing functional. Touching closures are accepted only when one of
/// the bodies is open; the certificate then claims `⟨f̄,x⟩ ≤ α ≤ ⟨f̄,y⟩`.
pub fn separate(a: &ConvexBody, b: &ConvexBody, g: &GroupAction) -> Result<SeparationCertificate, SeparationError> {
    prepare(a, b, g)?;
    let norm = g.norm();
    let (u0, gap) = max_gap(a, b, norm)?;
    let u0 = if gap > GAP_TOL {
        u0
    } else if a.is_open() || b.is_open() {
        touching_separator(a, b, norm)?
    } else {
        return Err(SeparationError::Intersect);
    };
    let f = symmetrized_unit(&u0, g, norm)?;
    let (sup_a, wa) = a.support(&f.coeffs);
    let (neg_inf_b, wb) = b.support(&-&f.coeffs);
    let inf_b = -neg_inf_b;
    if !(sup_a.is_finite() && inf_b.is_finite()) || sup_a > inf_b + 1e-8 {
        return Err(SeparationError::Degenerate(format!(
            "symmetrized functional fails to separate (sup_A = {sup_a}, inf_B = {inf_b})"
        )));
    }
    Ok(SeparationCertificate {
        alpha: 0.5 * (sup_a + inf_b),
        epsilon_margin: 0.0,
        strict: false,
        sup_a,
        inf_b,
        distance: None,
        witness_a: wa.unwrap_or_else(|| a.interior_point().clone()),
        witness_b: wb.unwrap_or_else(|| b.interior_point().clone()),
        open_a: a.is_open(),
        functional: f,
    })
}

/// Strict invariant separation of a closed `A` from a compact `B`, with
/// margin `ε = (inf_B − sup_A)/2 = ½·dist(A,B)·‖f̄‖_*` up to solver accuracy.
pub fn separate_strict(
    a: &ConvexBody,
    b: &ConvexBody,
    g: &GroupAction,
) -> Result<SeparationCertificate, SeparationError> {
    prepare(a, b, g)?;
    if !b.is_bounded() {
        return Err(SeparationError::NotCompact { which: "B" });
    }
    let norm = g.norm();
    let (r, _, _) = body_distance(a, b, norm)?;
    let (u0, gap) = max_gap(a, b, norm)?;
    if gap <= GAP_TOL || r <= GAP_TOL {
        return Err(SeparationError::ZeroGap { gap: gap.max(r) });
    }
    let f = symmetrized_unit(&u0, g, norm)?;
    let (sup_a, wa) = a.support(&f.coeffs);
    let (neg_inf_b, wb) = b.support(&-&f.coeffs);
    let inf_b = -neg_inf_b;
    if !(sup_a.is_finite() && inf_b.is_finite()) || inf_b - sup_a <= 0.0 {
        return Err(SeparationError::Degenerate(format!(
            "symmetrized functional fails to strictly separate (sup_A = {sup_a}, inf_B = {inf_b})"
        )));
    }
    Ok(SeparationCertificate {
        alpha: 0.5 * (sup_a + inf_b),
        epsilon_margin: 0.5 * (inf_b - sup_a),
        strict: true,
        sup_a,
        inf_b,
        distance: Some(r),
        witness_a: wa.unwrap_or_else(|| a.interior_point().clone()),
        witness_b: wb.expect("bounded body has a maximizer"),
        open_a: a.is_open(),
        functional: f,
    })
}

/// `p_C(x) = inf{α > 0 : x/α ∈ C}` for polytopes with `b > 0` and balls
/// centered at the origin.
///
/// ```
/// use givp::separation::{minkowski_gauge, ConvexBody};
/// use givp::Vector;
///
/// let cube = ConvexBody::cube(Vector::zeros(2), 1.0).unwrap();
/// let p = minkowski_gauge(&cube, &Vector::from_row_slice(&[2.0, 0.0])).unwrap();
/// assert_eq!(p, 2.0);
/// ```
pub fn minkowski_gauge(c: &ConvexBody, x: &Vector) -> Result<f64, SeparationError> {
    check_dim(x, c.dim())?;
    match &c.kind {
        BodyKind::Polytope { a, b } => {
            if b.iter().any(|v| *v <= 0.0) {
                return Err(SeparationError::NotInterior);
            }
            let ax = a * x;
            Ok((0..b.len()).map(|i| ax[i] / b[i]).fold(0.0, f64::max))
        }
        BodyKind::Ball {
            center,
            radius,
            norm,
        } => {
            if center.amax() > 0.0 {
                return Err(SeparationError::Unsupported("balls not centered at the origin"));
            }
            Ok(norm.of(x) / radius)
        }
        BodyKind::Hull { .. } => Err(SeparationError::Unsupported("vertex hulls")),
    }
}

/// `sup ‖x‖_p / ‖x‖_q` over `x ≠ 0` in `ℝⁿ`.
fn norm_ratio(p: &NormSpec, q: &NormSpec, n: usize) -> f64 {
    let nf = n as f64;
    // factor through ℓ2 for weighted norms
    let to_l2 = |q: &NormSpec| match q {
        NormSpec::L1 => 1.0,
        NormSpec::L2 => 1.0,
        NormSpec::Linf => nf.sqrt(),
        NormSpec::WeightedL2 { weights } => 1.0 / weights.iter().cloned().fold(f64::INFINITY, f64::min).sqrt(),
    };
    let from_l2 = |p: &NormSpec| match p {
        NormSpec::L1 => nf.sqrt(),
        NormSpec::L2 => 1.0,
        NormSpec::Linf => 1.0,
        NormSpec::WeightedL2 { weights } => weights.iter().cloned().fold(0.0, f64::max).sqrt(),
    };
    match (p, q) {
        (a, b) if a == b => 1.0,
        (NormSpec::L1, NormSpec::Linf) => nf,
        (NormSpec::Linf, NormSpec::L1) => 1.0,
        _ => from_l2(p) * to_l2(q),
    }
}

/// A constant `M` with `p_C(x) ≤ M‖x‖` in `norm`.
pub fn gauge_bound(c: &ConvexBody, norm: &NormSpec) -> Result<f64, SeparationError> {
    match &c.kind {
        BodyKind::Polytope { a, b } => {
            if b.iter().any(|v| *v <= 0.0) {
                return Err(SeparationError::NotInterior);
            }
            let dual = norm.dual();
            Ok((0..b.len())
                .map(|i| dual.of(&a.row(i).transpose()) / b[i])
                .fold(0.0, f64::max))
        }
        BodyKind::Ball { radius, norm: bn, .. } => Ok(norm_ratio(bn, norm, c.dim()) / radius),
        BodyKind::Hull { .. } => Err(SeparationError::Unsupported("vertex hulls")),
    }
}

/// A nonzero `u ∈ X*_G` with `⟨u, h⟩ = 0` on `H = span(spanning)`.
///
/// Computed as a null vector of `[Hᵀ; I − P*]`, where `P*` is the adjoint
/// Reynolds projector. Fails with [`SeparationError::Degenerate`] when
/// `H^⊥ ∩ X*_G = {0}`, which for orthogonal actions means `X_G ⊆ H`.
pub fn annihilator(spanning: &[Vector], g: &GroupAction) -> Result<DualFunctional, SeparationError> {
    let n = g.dim();
    for h in spanning {
        check_dim(h, n)?;
    }
    let hmat = if spanning.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(spanning)
    };
    let basis = range_basis(&hmat, RANK_TOL);
    if basis.ncols() == n {
        return Err(SeparationError::FullSpace);
    }
    // H must be invariant: g·h stays in span(H)
    let proj = &basis * basis.transpose();
    for m in g.elements() {
        for j in 0..basis.ncols() {
            let gh = m * basis.column(j);
            if (&gh - &proj * &gh).amax() > 1e-9 {
                return Err(SeparationError::NotInvariant { which: "H" });
            }
        }
    }
    let pstar = g.reynolds_matrix().transpose();
    let k = basis.ncols();
    let mut stacked = DMatrix::zeros(k + n, n);
    stacked.view_mut((0, 0), (k, n)).copy_from(&basis.transpose());
    stacked
        .view_mut((k, 0), (n, n))
        .copy_from(&(DMatrix::identity(n, n) - pstar));
    let null = null_basis(&stacked, RANK_TOL);
    if null.ncols() == 0 {
        return Err(SeparationError::Degenerate(
            "no nonzero invariant functional vanishes on H (the fixed subspace lies in H)".into(),
        ));
    }
    let u = canonical_sign(null.column(0).into_owned());
    let size = g.norm().dual().of(&u);
    Ok(DualFunctional::new(u / size).checked(g, 1e-9))
}

/// Config-level description of a body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BodySpec {
    Polytope {
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        #[serde(default)]
        open: bool,
    },
    Halfspace {
        a: Vec<f64>,
        b: f64,
        #[serde(default)]
        open: bool,
    },
    Cube {
        center: Vec<f64>,
        #[serde(default = "one")]
        radius: f64,
        #[serde(default)]
        open: bool,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
        #[serde(default)]
        norm: Option<NormSpec>,
        #[serde(default)]
        open: bool,
    },
    Hull {
        vertices: Vec<Vec<f64>>,
        #[serde(default)]
        open: bool,
    },
}

fn one() -> f64 {
    1.0
}

impl BodySpec {
    /// Builds the body; balls without an explicit norm use `default_norm`.
    pub fn build(&self, default_norm: &NormSpec) -> Result<ConvexBody, SeparationError> {
        let v = |xs: &[f64]| Vector::from_row_slice(xs);
        let (body, open) = match self {
            BodySpec::Polytope { a, b, open } => {
                let n = a.first().map_or(0, Vec::len);
                if a.iter().any(|r| r.len() != n) {
                    return Err(SeparationError::Malformed("ragged rows".into()));
                }
                let flat: Vec<f64> = a.iter().flatten().copied().collect();
                (ConvexBody::polytope(DMatrix::from_row_slice(a.len(), n, &flat), v(b))?, *open)
            }
            BodySpec::Halfspace { a, b, open } => (ConvexBody::halfspace(v(a), *b)?, *open),
            BodySpec::Cube { center, radius, open } => (ConvexBody::cube(v(center), *radius)?, *open),
            BodySpec::Ball {
                center,
                radius,
                norm,
                open,
            } => (
                ConvexBody::ball(v(center), *radius, norm.clone().unwrap_or_else(|| default_norm.clone()))?,
                *open,
            ),
            BodySpec::Hull { vertices, open } => {
                (ConvexBody::hull(vertices.iter().map(|p| v(p)).collect())?, *open)
            }
        };
        Ok(body.with_open(open))
    }
}
