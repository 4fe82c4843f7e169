//! Compact group actions on `X = ℝⁿ`.
//!
//! A [`GroupAction`] is a finite list of invertible matrices carrying Haar
//! weights. Finite groups are stored exactly (closure of generators, uniform
//! weights); `SO(2)` is stored as its `N`-point trapezoidal quadrature, which
//! is exact for trigonometric polynomials of degree below `N`.
//!
//! The Reynolds operator `x ↦ x̄ = Σ μ(g)·g·x` is [`GroupAction::symmetrize`];
//! as a matrix it is the projector of [`FixedSubspace`].

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::func::ScalarFunction;
use crate::linalg::{range_basis, RANK_TOL};
use crate::sampling;
use crate::space::{check_dim, NormSpec, SpaceError, Vector};

/// Two matrices closer than this (entrywise max) are the same group element.
pub const GROUP_EQ_TOL: f64 = 1e-8;
/// Orbit points closer than this (entrywise max) are merged.
pub const ORBIT_EQ_TOL: f64 = 1e-10;
/// Default order cap for generator closure.
pub const DEFAULT_MAX_ORDER: usize = 5000;
/// Default quadrature size for `SO(2)`.
pub const DEFAULT_SO2_NODES: usize = 64;

const NORM_CHECK_SAMPLES: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("generator {index} is not invertible (|det| = {det:e})")]
    NotInvertible { index: usize, det: f64 },
    #[error("generator {index} is not a square {dim}×{dim} matrix")]
    BadShape { index: usize, dim: usize },
    #[error("closure exceeded max order {max_order}")]
    OrderExceeded { max_order: usize },
    #[error("element {index} does not preserve the norm: ‖g·x‖ = {image} vs ‖x‖ = {original}")]
    NormNotPreserved {
        index: usize,
        image: f64,
        original: f64,
    },
    #[error("preset {preset} needs dimension {needed}, got {got}")]
    PresetDimension {
        preset: &'static str,
        needed: usize,
        got: usize,
    },
    #[error("weights in weighted-ℓ2 norm are not constant on coordinate orbits")]
    WeightsNotInvariant,
}

/// How the Haar measure is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum GroupModel {
    ExactFinite,
    QuadratureSo2 { nodes: usize },
}

/// Named group presets addressable from scenario configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum GroupPreset {
    /// `{I}` on ℝⁿ.
    Trivial { n: usize },
    /// `{I, −I}` on ℝⁿ.
    Sign { n: usize },
    /// Coordinate permutations `Σₙ`.
    Sym { n: usize },
    /// Signed permutations (hyperoctahedral group) on ℝⁿ.
    SignedPerm { n: usize },
    /// Rotations of ℝ² by multiples of `2π/k`.
    Cyclic { k: usize },
    /// `SO(2)` via `nodes`-point circle quadrature.
    So2 {
        #[serde(default = "default_nodes")]
        nodes: usize,
    },
}

fn default_nodes() -> usize {
    DEFAULT_SO2_NODES
}

impl GroupPreset {
    pub fn dim(&self) -> usize {
        match *self {
            GroupPreset::Trivial { n }
            | GroupPreset::Sign { n }
            | GroupPreset::Sym { n }
            | GroupPreset::SignedPerm { n } => n,
            GroupPreset::Cyclic { .. } | GroupPreset::So2 { .. } => 2,
        }
    }

    pub fn name(&self) -> String {
        match *self {
            GroupPreset::Trivial { n } => format!("trivial({n})"),
            GroupPreset::Sign { n } => format!("sign({n})"),
            GroupPreset::Sym { n } => format!("sym({n})"),
            GroupPreset::SignedPerm { n } => format!("signed-perm({n})"),
            GroupPreset::Cyclic { k } => format!("cyclic({k})"),
            GroupPreset::So2 { nodes } => format!("so2({nodes})"),
        }
    }

    /// Builds the action, verifying invariance of `norm`.
    pub fn build(&self, norm: &NormSpec) -> Result<GroupAction, GroupError> {
        let name = self.name();
        let g = match *self {
            GroupPreset::Trivial { n } => close_generators(n, &[], 1, norm)?,
            GroupPreset::Sign { n } => {
                close_generators(n, &[-DMatrix::<f64>::identity(n, n)], 2, norm)?
            }
            GroupPreset::Sym { n } => close_generators(n, &sym_generators(n), usize::MAX, norm)?,
            GroupPreset::SignedPerm { n } => {
                let mut gens = sym_generators(n);
                if n > 0 {
                    let mut flip = DMatrix::identity(n, n);
                    flip[(0, 0)] = -1.0;
                    gens.push(flip);
                }
                close_generators(n, &gens, usize::MAX, norm)?
            }
            GroupPreset::Cyclic { k } => {
                close_generators(2, &[rotation(2.0 * PI / k.max(1) as f64)], k.max(1), norm)?
            }
            GroupPreset::So2 { nodes } => so2_quadrature(nodes, norm)?,
        };
        Ok(g.with_name(name))
    }
}

/// Transposition `(0 1)` and the cycle `(0 1 … n−1)`.
fn sym_generators(n: usize) -> Vec<DMatrix<f64>> {
    if n < 2 {
        return Vec::new();
    }
    let mut swap = DMatrix::identity(n, n);
    swap.swap_rows(0, 1);
    let mut cycle = DMatrix::zeros(n, n);
    for i in 0..n {
        cycle[((i + 1) % n, i)] = 1.0;
    }
    vec![swap, cycle]
}

pub fn rotation(theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

fn mat_dist(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

/// A compact group acting linearly on ℝⁿ with Haar weights.
#[derive(Debug, Clone)]
pub struct GroupAction {
    dim: usize,
    elements: Vec<DMatrix<f64>>,
    weights: Vec<f64>,
    model: GroupModel,
    norm: NormSpec,
    name: String,
}

impl GroupAction {
    fn with_name(mut self, name: String) -> Self {
        self.name = name;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[DMatrix<f64>] {
        &self.elements
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn model(&self) -> GroupModel {
        self.model
    }

    /// The `G`-invariant norm this action was validated against.
    pub fn norm(&self) -> &NormSpec {
        &self.norm
    }

    /// `x̄ = Σ μ(g)·g·x`.
    pub fn symmetrize(&self, x: &Vector) -> Result<Vector, GroupError> {
        check_dim(x, self.dim)?;
        Ok(self.symmetrize_unchecked(x))
    }

    pub(crate) fn symmetrize_unchecked(&self, x: &Vector) -> Vector {
        let mut acc = Vector::zeros(self.dim);
        for (g, w) in self.elements.iter().zip(&self.weights) {
            acc.gemv(*w, g, x, 1.0);
        }
        acc
    }

    /// Reynolds projector `P = Σ μ(g)·g`.
    pub fn reynolds_matrix(&self) -> DMatrix<f64> {
        let mut p = DMatrix::zeros(self.dim, self.dim);
        for (g, w) in self.elements.iter().zip(&self.weights) {
            p += g * *w;
        }
        p
    }

    /// `max_g ‖g·x − x‖` in the attached norm.
    pub fn invariance_residual(&self, x: &Vector) -> f64 {
        self.elements
            .iter()
            .map(|g| self.norm.of(&(g * x - x)))
            .fold(0.0, f64::max)
    }

    /// `{g·x : g ∈ G}`, deduplicated within [`ORBIT_EQ_TOL`].
    pub fn orbit(&self, x: &Vector) -> Result<Vec<Vector>, GroupError> {
        check_dim(x, self.dim)?;
        let mut out: Vec<Vector> = Vec::new();
        for g in &self.elements {
            let y = g * x;
            if !out.iter().any(|z| (z - &y).amax() < ORBIT_EQ_TOL) {
                out.push(y);
            }
        }
        Ok(out)
    }

    /// The adjoint action `G* = {gᵀ}` on `X*`, with the same weights and the
    /// dual norm attached.
    pub fn adjoint(&self) -> GroupAction {
        GroupAction {
            dim: self.dim,
            elements: self.elements.iter().map(|g| g.transpose()).collect(),
            weights: self.weights.clone(),
            model: self.model,
            norm: self.norm.dual(),
            name: format!("{}*", self.name),
        }
    }

    /// Orthonormal basis and projector of `X_G`.
    pub fn fixed_subspace(&self) -> FixedSubspace {
        let projector = self.reynolds_matrix();
        let basis = range_basis(&projector, RANK_TOL);
        FixedSubspace { basis, projector }
    }

    /// `f̄(x) = Σ μ(g) f(g·x)`; any `+∞` term makes the average `+∞`.
    pub fn symmetrize_function(&self, f: &ScalarFunction) -> ScalarFunction {
        let inner = f.clone();
        let elements = self.elements.clone();
        let weights = self.weights.clone();
        let grad = f.has_grad().then(|| {
            let inner = f.clone();
            let elements = self.elements.clone();
            let weights = self.weights.clone();
            move |x: &Vector| -> Vector {
                let mut acc = Vector::zeros(x.len());
                for (g, w) in elements.iter().zip(&weights) {
                    let gx = g * x;
                    let dg = inner.grad(&gx).expect("gradient present");
                    acc += g.transpose() * dg * *w;
                }
                acc
            }
        });
        let mut out = ScalarFunction::new(format!("sym[{}]({})", self.name, f.name()), move |x| {
            let mut acc = 0.0;
            for (g, w) in elements.iter().zip(&weights) {
                let v = inner.eval_raw(&(g * x));
                if v == f64::INFINITY {
                    return f64::INFINITY;
                }
                acc += w * v;
            }
            acc
        })
        .with_flags(f.flags());
        if let Some(gr) = grad {
            out = out.with_grad(gr);
        }
        out
    }
}

fn verify_norm_invariance(
    dim: usize,
    elements: &[DMatrix<f64>],
    norm: &NormSpec,
) -> Result<(), GroupError> {
    if let NormSpec::WeightedL2 { weights } = norm {
        if weights.len() != dim {
            return Err(SpaceError::DimensionMismatch {
                expected: dim,
                got: weights.len(),
            }
            .into());
        }
        // coordinate-permuting elements must map weights to equal weights
        for g in elements {
            let is_signed_perm = g
                .row_iter()
                .all(|r| r.iter().filter(|v| v.abs() > GROUP_EQ_TOL).count() == 1);
            if is_signed_perm {
                for i in 0..dim {
                    let j = g.row(i).iamax_full().1;
                    if (weights[i] - weights[j]).abs() > 1e-12 * weights[i].max(weights[j]) {
                        return Err(GroupError::WeightsNotInvariant);
                    }
                }
            }
        }
    }
    let mut r = sampling::rng(0x6e6f726d, 0);
    for _ in 0..NORM_CHECK_SAMPLES {
        let x = sampling::uniform_box(&mut r, &Vector::zeros(dim), 1.0);
        let nx = norm.of(&x);
        for (index, g) in elements.iter().enumerate() {
            let ngx = norm.of(&(g * &x));
            if (ngx - nx).abs() > 1e-9 * (1.0 + nx) {
                return Err(GroupError::NormNotPreserved {
                    index,
                    image: ngx,
                    original: nx,
                });
            }
        }
    }
    Ok(())
}

/// Multiplicative closure of `gens` (plus identity) with uniform weights.
///
/// Elements are deduplicated at [`GROUP_EQ_TOL`]. Fails if the closure has
/// more than `max_order` elements, a generator is singular, or some element
/// does not preserve `norm` on sampled vectors.
pub fn close_generators(
    dim: usize,
    gens: &[DMatrix<f64>],
    max_order: usize,
    norm: &NormSpec,
) -> Result<GroupAction, GroupError> {
    for (index, g) in gens.iter().enumerate() {
        if g.shape() != (dim, dim) {
            return Err(GroupError::BadShape { index, dim });
        }
        let det = g.determinant();
        if !(det.abs() > 1e-12) {
            return Err(GroupError::NotInvertible { index, det });
        }
    }
    let mut elements = vec![DMatrix::<f64>::identity(dim, dim)];
    let mut i = 0;
    while i < elements.len() {
        for s in gens {
            let p = s * &elements[i];
            if !elements.iter().any(|e| mat_dist(e, &p) < GROUP_EQ_TOL) {
                if elements.len() >= max_order {
                    return Err(GroupError::OrderExceeded { max_order });
                }
                elements.push(p);
            }
        }
        i += 1;
    }
    verify_norm_invariance(dim, &elements, norm)?;
    let w = 1.0 / elements.len() as f64;
    Ok(GroupAction {
        dim,
        weights: vec![w; elements.len()],
        elements,
        model: GroupModel::ExactFinite,
        norm: norm.clone(),
        name: format!("generated({dim})"),
    })
}

/// `SO(2)` realized by rotations through `2πk/N`, `k = 0..N−1`, uniform weights.
pub fn so2_quadrature(nodes: usize, norm: &NormSpec) -> Result<GroupAction, GroupError> {
    let nodes = nodes.max(1);
    let elements: Vec<_> = (0..nodes)
        .map(|k| rotation(2.0 * PI * k as f64 / nodes as f64))
        .collect();
    verify_norm_invariance(2, &elements, norm)?;
    Ok(GroupAction {
        dim: 2,
        weights: vec![1.0 / nodes as f64; nodes],
        elements,
        model: GroupModel::QuadratureSo2 { nodes },
        norm: norm.clone(),
        name: format!("so2({nodes})"),
    })
}

/// The invariant subspace `X_G`.
#[derive(Debug, Clone)]
pub struct FixedSubspace {
    /// Orthonormal columns spanning `X_G`.
    pub basis: DMatrix<f64>,
    /// Reynolds projector onto `X_G`.
    pub projector: DMatrix<f64>,
}

impl FixedSubspace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Point of `X_G` with coordinates `c`.
    pub fn embed(&self, c: &Vector) -> Vector {
        &self.basis * c
    }

    /// Coordinates of the orthogonal projection of `x` onto `X_G`.
    pub fn coords(&self, x: &Vector) -> Vector {
        self.basis.transpose() * x
    }

    /// `‖P² − P‖_F`.
    pub fn idempotence_defect(&self) -> f64 {
        (&self.projector * &self.projector - &self.projector).norm()
    }
}

/// Describes a group either by preset or by explicit generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupSpec {
    Preset(GroupPreset),
    Generators {
        dim: usize,
        generators: Vec<Vec<Vec<f64>>>,
        #[serde(default = "default_max_order")]
        max_order: usize,
    },
}

fn default_max_order() -> usize {
    DEFAULT_MAX_ORDER
}

impl GroupSpec {
    pub fn dim(&self) -> usize {
        match self {
            GroupSpec::Preset(p) => p.dim(),
            GroupSpec::Generators { dim, .. } => *dim,
        }
    }

    pub fn build(&self, norm: &NormSpec) -> Result<GroupAction, GroupError> {
        match self {
            GroupSpec::Preset(p) => p.build(norm),
            GroupSpec::Generators {
                dim,
                generators,
                max_order,
            } => {
                let mut gens = Vec::with_capacity(generators.len());
                for (index, rows) in generators.iter().enumerate() {
                    if rows.len() != *dim || rows.iter().any(|r| r.len() != *dim) {
                        return Err(GroupError::BadShape { index, dim: *dim });
                    }
                    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
                    gens.push(DMatrix::from_row_slice(*dim, *dim, &flat));
                }
                close_generators(*dim, &gens, *max_order, norm)
            }
        }
    }
}
