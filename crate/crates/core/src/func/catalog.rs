//! Builtin objectives, addressable by name.

use super::{Flags, FuncError, ScalarFunction};
use crate::space::Vector;

pub struct Entry {
    pub name: &'static str,
    pub summary: &'static str,
    /// `Some(k)` when the objective only exists on ℝᵏ.
    pub fixed_dim: Option<usize>,
    pub flags: Flags,
    pub smooth: bool,
    build: fn(usize) -> ScalarFunction,
}

impl Entry {
    pub fn build(&self, n: usize) -> Result<ScalarFunction, FuncError> {
        if let Some(k) = self.fixed_dim {
            if k != n {
                return Err(FuncError::Dimension {
                    name: self.name.to_string(),
                    needed: k,
                    got: n,
                });
            }
        }
        Ok((self.build)(n).with_flags(self.flags))
    }
}

const UNBOUNDED_CONVEX: Flags = Flags {
    bounded_below: false,
    ..Flags::CONVEX
};

const NONE: Flags = Flags {
    proper: true,
    bounded_below: false,
    declared_lsc: true,
    declared_convex: false,
};

pub static ENTRIES: &[Entry] = &[
    Entry {
        name: "sq_norm",
        summary: "‖x‖₂²",
        fixed_dim: None,
        flags: Flags::CONVEX,
        smooth: true,
        build: |_| {
            ScalarFunction::new("sq_norm", |x: &Vector| x.norm_squared())
                .with_grad(|x: &Vector| x * 2.0)
        },
    },
    Entry {
        name: "sq_norm_plus_one",
        summary: "‖x‖₂² + 1",
        fixed_dim: None,
        flags: Flags::CONVEX,
        smooth: true,
        build: |_| {
            ScalarFunction::new("sq_norm_plus_one", |x: &Vector| x.norm_squared() + 1.0)
                .with_grad(|x: &Vector| x * 2.0)
        },
    },
    Entry {
        name: "half_sq_norm",
        summary: "½‖x‖₂²",
        fixed_dim: None,
        flags: Flags::CONVEX,
        smooth: true,
        build: |_| {
            ScalarFunction::new("half_sq_norm", |x: &Vector| 0.5 * x.norm_squared())
                .with_grad(|x: &Vector| x.clone())
        },
    },
    Entry {
        name: "cosh_sum",
        summary: "Σ cosh(xᵢ)",
        fixed_dim: None,
        flags: Flags::CONVEX,
        smooth: true,
        build: |_| {
            ScalarFunction::new("cosh_sum", |x: &Vector| x.iter().map(|v| v.cosh()).sum())
                .with_grad(|x: &Vector| x.map(f64::sinh))
        },
    },
    Entry {
        name: "cosh_sum_minus_n",
        summary: "Σ (cosh(xᵢ) − 1)",
        fixed_dim: None,
        flags: Flags::CONVEX,
        smooth: true,
        build: |_| {
            // cosh(v) − 1 = 2 sinh²(v/2) avoids cancellation near 0
            ScalarFunction::new("cosh_sum_minus_n", |x: &Vector| {
                x.iter().map(|v| 2.0 * (0.5 * v).sinh().powi(2)).sum()
            })
            .with_grad(|x: &Vector| x.map(f64::sinh))
        },
    },
    Entry {
        name: "abs_sum",
        summary: "‖x‖₁",
        fixed_dim: None,
        flags: Flags::CONVEX,
        smooth: false,
        build: |_| ScalarFunction::new("abs_sum", |x: &Vector| x.lp_norm(1)),
    },
    Entry {
        name: "norm2",
        summary: "‖x‖₂",
        fixed_dim: None,
        flags: Flags::CONVEX,
        smooth: false,
        build: |_| ScalarFunction::new("norm2", |x: &Vector| x.norm()),
    },
    Entry {
        name: "max_coords",
        summary: "maxᵢ xᵢ",
        fixed_dim: None,
        flags: UNBOUNDED_CONVEX,
        smooth: false,
        build: |_| ScalarFunction::new("max_coords", |x: &Vector| x.max()),
    },
    Entry {
        name: "constant",
        summary: "1",
        fixed_dim: None,
        flags: Flags::CONVEX,
        smooth: true,
        build: |_| {
            ScalarFunction::new("constant", |_: &Vector| 1.0)
                .with_grad(|x: &Vector| Vector::zeros(x.len()))
        },
    },
    Entry {
        name: "gaussian_bump",
        summary: "exp(−‖x‖₂²)",
        fixed_dim: None,
        flags: Flags::LSC,
        smooth: true,
        build: |_| {
            ScalarFunction::new("gaussian_bump", |x: &Vector| (-x.norm_squared()).exp())
                .with_grad(|x: &Vector| x * (-2.0 * (-x.norm_squared()).exp()))
        },
    },
    Entry {
        name: "neg_sq_norm",
        summary: "−‖x‖₂²",
        fixed_dim: None,
        flags: NONE,
        smooth: true,
        build: |_| {
            ScalarFunction::new("neg_sq_norm", |x: &Vector| -x.norm_squared())
                .with_grad(|x: &Vector| x * -2.0)
        },
    },
    Entry {
        name: "tent",
        summary: "max(0, 1 − 2|x|) on ℝ",
        fixed_dim: Some(1),
        flags: Flags::LSC,
        smooth: false,
        build: |_| ScalarFunction::new("tent", |x: &Vector| (1.0 - 2.0 * x[0].abs()).max(0.0)),
    },
];

pub fn entry(name: &str) -> Option<&'static Entry> {
    ENTRIES.iter().find(|e| e.name == name)
}

/// Builds catalog objective `name` on ℝⁿ.
pub fn get(name: &str, n: usize) -> Result<ScalarFunction, FuncError> {
    entry(name)
        .ok_or_else(|| FuncError::UnknownObjective(name.to_string()))?
        .build(n)
}
