//! Extended-real objectives `φ: ℝⁿ → ℝ ∪ {+∞}`.
//!
//! `+∞` is represented by `f64::INFINITY`. A NaN result means the value is
//! undefined (for example `0·∞` or `∞ − ∞`) and surfaces as
//! [`FuncError::Undefined`]; `−∞` surfaces as [`FuncError::Improper`].

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::space::{SpaceError, Vector};

pub mod catalog;
mod checks;
mod expr;

pub use checks::{
    check_g_convexity, check_g_invariance, check_g_linearity, CheckReport, Verdict,
};
pub use expr::{parse_objective, ParseError, ParseErrorKind};

/// Default Gâteaux steps (`t`, `t/2`) used with Richardson extrapolation.
pub const GATEAUX_STEPS: (f64, f64) = (1e-4, 5e-5);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FuncError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("value undefined at {point:?} (0·∞ or ∞ − ∞)")]
    Undefined { point: Vec<f64> },
    #[error("function takes the value −∞ at {point:?}")]
    Improper { point: Vec<f64> },
    #[error("infinite value met at {point:?} while differencing")]
    InfiniteValue { point: Vec<f64> },
    #[error("unknown catalog objective {0:?}")]
    UnknownObjective(String),
    #[error("objective {name} needs dimension {needed}, got {got}")]
    Dimension {
        name: String,
        needed: usize,
        got: usize,
    },
}

/// Declared regularity. Only `proper` is partly checkable; the rest gate
/// which operations a scenario may run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Flags {
    pub proper: bool,
    pub bounded_below: bool,
    pub declared_lsc: bool,
    pub declared_convex: bool,
}

impl Flags {
    /// Proper, bounded below, lsc and convex.
    pub const CONVEX: Flags = Flags {
        proper: true,
        bounded_below: true,
        declared_lsc: true,
        declared_convex: true,
    };
    /// Proper, bounded below and lsc, no convexity claim.
    pub const LSC: Flags = Flags {
        proper: true,
        bounded_below: true,
        declared_lsc: true,
        declared_convex: false,
    };
}

pub type EvalFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;
pub type GradFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;

/// An objective with optional gradient oracle and declared flags.
#[derive(Clone)]
pub struct ScalarFunction {
    name: String,
    eval: EvalFn,
    grad: Option<GradFn>,
    flags: Flags,
}

impl fmt::Debug for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFunction")
            .field("name", &self.name)
            .field("grad", &self.grad.is_some())
            .field("flags", &self.flags)
            .finish()
    }
}

impl ScalarFunction {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(&Vector) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
            grad: None,
            flags: Flags::default(),
        }
    }

    pub fn with_grad(mut self, grad: impl Fn(&Vector) -> Vector + Send + Sync + 'static) -> Self {
        self.grad = Some(Arc::new(grad));
        self
    }

    pub fn with_flags(mut self, flags: Flags) -> Self {
        self.flags = flags;
        self
    }

    pub fn without_grad(mut self) -> Self {
        self.grad = None;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn flags(&self) -> Flags {
        self.flags
    }

    pub fn has_grad(&self) -> bool {
        self.grad.is_some()
    }

    /// Raw IEEE value, NaN and `−∞` included.
    pub fn eval_raw(&self, x: &Vector) -> f64 {
        (self.eval)(x)
    }

    /// Extended-real value; `Ok(f64::INFINITY)` outside the domain.
    pub fn value(&self, x: &Vector) -> Result<f64, FuncError> {
        let v = (self.eval)(x);
        if v.is_nan() {
            Err(FuncError::Undefined {
                point: x.iter().copied().collect(),
            })
        } else if v == f64::NEG_INFINITY {
            Err(FuncError::Improper {
                point: x.iter().copied().collect(),
            })
        } else {
            Ok(v)
        }
    }

    pub fn grad(&self, x: &Vector) -> Option<Vector> {
        self.grad.as_ref().map(|g| g(x))
    }

    /// Gradient from the oracle if present, otherwise from
    /// [`gateaux_variation`] along the coordinate axes.
    pub fn grad_or_fd(&self, x: &Vector) -> Result<Vector, FuncError> {
        if let Some(g) = self.grad(x) {
            return Ok(g);
        }
        let n = x.len();
        let mut out = Vector::zeros(n);
        for i in 0..n {
            let mut e = Vector::zeros(n);
            e[i] = 1.0;
            out[i] = gateaux_variation(self, x, &e, GATEAUX_STEPS.0)?;
        }
        Ok(out)
    }

    /// `φ − ⟨u, ·⟩`, keeping the gradient oracle when present.
    pub fn minus_linear(&self, u: &Vector) -> ScalarFunction {
        let inner = self.clone();
        let uu = u.clone();
        let mut out = ScalarFunction::new(format!("{} - <u,x>", self.name), move |x| {
            let v = inner.eval_raw(x);
            if v == f64::INFINITY {
                v
            } else {
                v - uu.dot(x)
            }
        })
        .with_flags(self.flags);
        if self.has_grad() {
            let inner = self.clone();
            let uu = u.clone();
            out = out.with_grad(move |x| inner.grad(x).expect("gradient present") - &uu);
        }
        out
    }
}

/// `(x, t)` with the epigraph membership test `t ≥ φ(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpigraphPoint {
    #[serde(with = "crate::space::serde_vector")]
    pub point: Vector,
    pub height: f64,
}

impl EpigraphPoint {
    pub fn new(point: Vector, height: f64) -> Self {
        Self { point, height }
    }

    pub fn in_epigraph(&self, f: &ScalarFunction) -> Result<bool, FuncError> {
        Ok(self.height >= f.value(&self.point)?)
    }
}

fn diff_quot(f: &ScalarFunction, x: &Vector, h: &Vector, t: f64) -> Result<f64, FuncError> {
    let p = x + h * t;
    let m = x - h * t;
    let fp = f.value(&p)?;
    let fm = f.value(&m)?;
    if fp.is_infinite() || fm.is_infinite() {
        return Err(FuncError::InfiniteValue {
            point: if fp.is_infinite() { p } else { m }.iter().copied().collect(),
        });
    }
    Ok((fp - fm) / (2.0 * t))
}

fn forward_quot(f: &ScalarFunction, x: &Vector, h: &Vector, t: f64, f0: f64) -> Option<f64> {
    let fp = f.value(&(x + h * t)).ok()?;
    fp.is_finite().then(|| (fp - f0) / t)
}

/// Directional derivative `lim (φ(x + t h) − φ(x)) / t`.
///
/// Central differences at `step` and `step/2` combined by Richardson
/// extrapolation. If either side of the central stencil is infinite, a
/// one-sided forward (or backward) Richardson estimate is used instead;
/// if that also meets `+∞`, the error is returned.
pub fn gateaux_variation(
    f: &ScalarFunction,
    x: &Vector,
    h: &Vector,
    step: f64,
) -> Result<f64, FuncError> {
    let f0 = f.value(x)?;
    if !f0.is_finite() {
        return Err(FuncError::InfiniteValue {
            point: x.iter().copied().collect(),
        });
    }
    let t = step;
    match (diff_quot(f, x, h, t), diff_quot(f, x, h, t / 2.0)) {
        (Ok(d1), Ok(d2)) => Ok((4.0 * d2 - d1) / 3.0),
        (Err(FuncError::InfiniteValue { point }), _) | (_, Err(FuncError::InfiniteValue { point })) => {
            for s in [1.0, -1.0] {
                let dir = h * s;
                if let (Some(d1), Some(d2)) = (
                    forward_quot(f, x, &dir, t, f0),
                    forward_quot(f, x, &dir, t / 2.0, f0),
                ) {
                    return Ok(s * (2.0 * d2 - d1));
                }
            }
            Err(FuncError::InfiniteValue { point })
        }
        (Err(e), _) | (_, Err(e)) => Err(e),
    }
}

/// `ψ = 1/φ²` where `φ ≠ 0`, `+∞` where `φ = 0`; gradient `−2∇φ/φ³`.
pub fn bump_transform(phi: &ScalarFunction) -> ScalarFunction {
    let inner = phi.clone();
    let mut out = ScalarFunction::new(format!("1/({})^2", phi.name()), move |x| {
        let v = inner.eval_raw(x);
        if v == 0.0 {
            f64::INFINITY
        } else {
            1.0 / (v * v)
        }
    })
    .with_flags(Flags {
        proper: true,
        bounded_below: true,
        declared_lsc: phi.flags().declared_lsc,
        declared_convex: false,
    });
    if phi.has_grad() {
        let inner = phi.clone();
        out = out.with_grad(move |x| {
            let v = inner.eval_raw(x);
            let g = inner.grad(x).expect("gradient present");
            if v == 0.0 {
                Vector::from_element(x.len(), f64::NAN)
            } else {
                g * (-2.0 / (v * v * v))
            }
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    fn sq() -> ScalarFunction {
        ScalarFunction::new("sq", |x: &Vector| x.norm_squared()).with_grad(|x: &Vector| x * 2.0)
    }

    #[test]
    fn extended_values() {
        let ind = ScalarFunction::new("ind", |x: &Vector| {
            if x.norm() <= 1.0 {
                0.0
            } else {
                f64::INFINITY
            }
        });
        assert_eq!(ind.value(&v(&[2.0])).unwrap(), f64::INFINITY);
        let bad = ScalarFunction::new("zero-times-inf", |_: &Vector| 0.0 * f64::INFINITY);
        assert!(matches!(bad.value(&v(&[0.0])), Err(FuncError::Undefined { .. })));
        let neg = ScalarFunction::new("neg-inf", |_: &Vector| f64::NEG_INFINITY);
        assert!(matches!(neg.value(&v(&[0.0])), Err(FuncError::Improper { .. })));
    }

    #[test]
    fn epigraph_membership() {
        let f = sq();
        assert!(EpigraphPoint::new(v(&[1.0]), 1.0).in_epigraph(&f).unwrap());
        assert!(!EpigraphPoint::new(v(&[1.0]), 0.5).in_epigraph(&f).unwrap());
    }

    #[test]
    fn gateaux_examples() {
        let d = gateaux_variation(&sq(), &v(&[1.0, 0.0]), &v(&[1.0, 0.0]), 1e-4).unwrap();
        assert!((d - 2.0).abs() < 1e-6);
        let u = v(&[0.5, -2.0]);
        let uu = u.clone();
        let lin = ScalarFunction::new("lin", move |x: &Vector| uu.dot(x));
        let h = v(&[1.0, 1.0]);
        let d = gateaux_variation(&lin, &v(&[3.0, -1.0]), &h, 1e-4).unwrap();
        // exact up to the rounding of the difference quotient
        assert!((d - u.dot(&h)).abs() < 1e-9);
        let mx = ScalarFunction::new("max", |x: &Vector| x[0].max(x[1]));
        let d = gateaux_variation(&mx, &v(&[2.0, 1.0]), &v(&[0.0, 1.0]), 1e-4).unwrap();
        assert!(d.abs() < 1e-6);
    }

    #[test]
    fn gateaux_one_sided_near_boundary() {
        // domain x ≥ 0 with φ = x², differentiated at the boundary point 0
        let f = ScalarFunction::new("half-line", |x: &Vector| {
            if x[0] < 0.0 {
                f64::INFINITY
            } else {
                x[0] * x[0] + x[0]
            }
        });
        let d = gateaux_variation(&f, &v(&[0.0]), &v(&[1.0]), 1e-4).unwrap();
        assert!((d - 1.0).abs() < 1e-8);
        let wall = ScalarFunction::new("point", |x: &Vector| {
            if x[0] == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        });
        assert!(matches!(
            gateaux_variation(&wall, &v(&[0.0]), &v(&[1.0]), 1e-4),
            Err(FuncError::InfiniteValue { .. })
        ));
    }

    #[test]
    fn bump_examples() {
        let one = ScalarFunction::new("one", |_: &Vector| 1.0);
        let psi = bump_transform(&one);
        assert_eq!(psi.value(&v(&[3.0, 4.0])).unwrap(), 1.0);
        let g = ScalarFunction::new("gauss", |x: &Vector| (-x.norm_squared()).exp())
            .with_grad(|x: &Vector| x * (-2.0 * (-x.norm_squared()).exp()));
        let psi = bump_transform(&g);
        let x = v(&[0.3, -0.7]);
        let expect = (2.0 * x.norm_squared()).exp();
        assert!((psi.value(&x).unwrap() - expect).abs() <= 1e-12 * expect);
        // d/dx exp(2‖x‖²) = 4x·exp(2‖x‖²)
        let gr = psi.grad(&x).unwrap();
        assert!((gr - &x * (4.0 * expect)).amax() < 1e-10);
        let zero = ScalarFunction::new("zero", |_: &Vector| 0.0);
        assert_eq!(bump_transform(&zero).value(&x).unwrap(), f64::INFINITY);
    }

    #[test]
    fn minus_linear_keeps_gradient() {
        let u = v(&[1.0, 2.0]);
        let h = sq().minus_linear(&u);
        let x = v(&[0.5, 0.5]);
        assert!((h.value(&x).unwrap() - (0.5 - 1.5)).abs() < 1e-15);
        assert_eq!(h.grad(&x).unwrap(), v(&[0.0, -1.0]));
    }
}
