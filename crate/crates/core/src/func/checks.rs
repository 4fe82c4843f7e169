use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ScalarFunction;
use crate::group::GroupAction;
use crate::sampling::SampleSpec;
use crate::space::{serde_extended, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Invariance,
    Convexity,
    Linearity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    HoldsOnSamples,
    Violated {
        witness: Vec<f64>,
        /// Invariance: `f(x)`; convexity/linearity: `f(x̄)`.
        #[serde(with = "serde_extended")]
        lhs: f64,
        /// Invariance: `f(g·x)` for the worst `g`; otherwise `Σ μ(g) f(g·x)`.
        #[serde(with = "serde_extended")]
        rhs: f64,
        /// Index of the worst group element (invariance only).
        #[serde(skip_serializing_if = "Option::is_none", default)]
        element: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub kind: CheckKind,
    pub checked_points: usize,
    #[serde(with = "serde_extended")]
    pub max_violation: f64,
    pub tol: f64,
    /// Linearity only: samples where exactly one side is `+∞`.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub skipped_points: usize,
    #[serde(flatten)]
    pub verdict: Verdict,
}

impl CheckReport {
    pub fn holds(&self) -> bool {
        matches!(self.verdict, Verdict::HoldsOnSamples)
    }

    /// Recomputes the violation at the stored witness; `None` when the
    /// report holds.
    pub fn recheck(&self, f: &ScalarFunction, g: &GroupAction) -> Option<f64> {
        match &self.verdict {
            Verdict::HoldsOnSamples => None,
            Verdict::Violated { witness, .. } => {
                let x = Vector::from_row_slice(witness);
                Some(point_violation(self.kind, f, g, &x).0)
            }
        }
    }
}

fn is_zero(v: &usize) -> bool {
    *v == 0
}

fn value_or_nan(f: &ScalarFunction, x: &Vector) -> f64 {
    f.value(x).unwrap_or(f64::NAN)
}

/// `|a − b|` with `∞ = ∞`; undefined values count as infinitely bad.
fn ext_gap(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::INFINITY
    } else if a == b {
        0.0
    } else {
        (a - b).abs()
    }
}

/// `a − b` clipped below at 0 with `x ≤ ∞` always true.
fn ext_excess(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::INFINITY
    } else if b == f64::INFINITY || a == b {
        0.0
    } else {
        (a - b).max(0.0)
    }
}

fn orbit_average(f: &ScalarFunction, g: &GroupAction, x: &Vector) -> f64 {
    let mut acc = 0.0;
    for (m, w) in g.elements().iter().zip(g.weights()) {
        let v = value_or_nan(f, &(m * x));
        if v.is_nan() {
            return f64::NAN;
        }
        if v == f64::INFINITY {
            return f64::INFINITY;
        }
        acc += w * v;
    }
    acc
}

/// `(violation, lhs, rhs, element)` at a single point.
fn point_violation(
    kind: CheckKind,
    f: &ScalarFunction,
    g: &GroupAction,
    x: &Vector,
) -> (f64, f64, f64, Option<usize>) {
    match kind {
        CheckKind::Invariance => {
            let fx = value_or_nan(f, x);
            let mut worst = (0.0, fx, fx, None);
            for (i, m) in g.elements().iter().enumerate() {
                let fgx = value_or_nan(f, &(m * x));
                let v = ext_gap(fgx, fx);
                if v > worst.0 {
                    worst = (v, fx, fgx, Some(i));
                }
            }
            worst
        }
        CheckKind::Convexity | CheckKind::Linearity => {
            let lhs = value_or_nan(f, &g.symmetrize_unchecked(x));
            let rhs = orbit_average(f, g, x);
            let v = match kind {
                CheckKind::Convexity => ext_excess(lhs, rhs),
                _ if lhs.is_infinite() != rhs.is_infinite() => f64::NAN,
                _ => ext_gap(lhs, rhs),
            };
            (v, lhs, rhs, None)
        }
    }
}

fn run(
    kind: CheckKind,
    f: &ScalarFunction,
    g: &GroupAction,
    samples: &SampleSpec,
    tol: f64,
) -> CheckReport {
    let pts = samples.cloud(&Vector::zeros(g.dim()));
    let mut results: Vec<_> = pts
        .par_iter()
        .map(|x| point_violation(kind, f, g, x))
        .collect();
    // NaN marks a linearity sample with exactly one infinite side
    let mut skipped_points = 0;
    for r in &mut results {
        if r.0.is_nan() {
            skipped_points += 1;
            r.0 = 0.0;
        }
    }
    // sequential reduction: largest violation, then smallest norm, then first
    let mut best: Option<(usize, f64)> = None;
    for (i, r) in results.iter().enumerate() {
        let better = match best {
            None => true,
            Some((j, v)) => {
                r.0 > v || (r.0 == v && g.norm().of(&pts[i]) < g.norm().of(&pts[j]))
            }
        };
        if better {
            best = Some((i, r.0));
        }
    }
    let max_violation = best.map_or(0.0, |b| b.1);
    let verdict = match best {
        Some((i, v)) if v > tol => {
            let (_, lhs, rhs, element) = results[i];
            Verdict::Violated {
                witness: pts[i].iter().copied().collect(),
                lhs,
                rhs,
                element,
            }
        }
        _ => Verdict::HoldsOnSamples,
    };
    CheckReport {
        kind,
        checked_points: pts.len(),
        max_violation,
        tol,
        skipped_points,
        verdict,
    }
}

/// `max |f(g·x) − f(x)|` over the sample cloud and all `g`.
pub fn check_g_invariance(
    f: &ScalarFunction,
    g: &GroupAction,
    samples: &SampleSpec,
    tol: f64,
) -> CheckReport {
    run(CheckKind::Invariance, f, g, samples, tol)
}

/// `max (f(x̄) − Σ μ(g) f(g·x))⁺` over the sample cloud.
///
/// ```
/// use givp::func::{catalog, check_g_convexity, Verdict};
/// use givp::group::GroupPreset;
/// use givp::sampling::SampleSpec;
/// use givp::NormSpec;
///
/// let tent = catalog::get("tent", 1).unwrap();
/// let g = GroupPreset::Sign { n: 1 }.build(&NormSpec::L2).unwrap();
/// let r = check_g_convexity(&tent, &g, &SampleSpec::default(), 1e-9);
/// assert_eq!(r.max_violation, 1.0);
/// let Verdict::Violated { witness, .. } = r.verdict else { panic!() };
/// assert_eq!(witness, vec![0.5]);
/// ```
pub fn check_g_convexity(
    f: &ScalarFunction,
    g: &GroupAction,
    samples: &SampleSpec,
    tol: f64,
) -> CheckReport {
    run(CheckKind::Convexity, f, g, samples, tol)
}

/// `max |f(x̄) − Σ μ(g) f(g·x)|` over the sample cloud, restricted to samples
/// where both sides are finite or both are `+∞`; the others are counted in
/// [`CheckReport::skipped_points`].
pub fn check_g_linearity(
    f: &ScalarFunction,
    g: &GroupAction,
    samples: &SampleSpec,
    tol: f64,
) -> CheckReport {
    run(CheckKind::Linearity, f, g, samples, tol)
}
