//! Finite-dimensional normed space substrate.
//!
//! Points of `X = ℝⁿ` are plain [`Vector`]s. A [`NormSpec`] selects the norm
//! on `X`; the matching dual norm on `X*` is available in closed form for
//! every supported kind.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A point of `X = ℝⁿ`.
pub type Vector = DVector<f64>;

/// Default absolute tolerance for floating-point comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite coordinate at index {index}")]
    NonFinite { index: usize },
    #[error("weighted norm requires positive finite weights")]
    BadWeights,
}

/// Checks that `x` has dimension `n`.
pub fn check_dim(x: &Vector, n: usize) -> Result<(), SpaceError> {
    if x.len() != n {
        return Err(SpaceError::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    Ok(())
}

/// Checks that every coordinate of `x` is finite.
pub fn ensure_finite(x: &Vector) -> Result<(), SpaceError> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(SpaceError::NonFinite { index }),
        None => Ok(()),
    }
}

/// Norm selector for `X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormSpec {
    L1,
    L2,
    Linf,
    /// `‖x‖ = (Σ wᵢ xᵢ²)^{1/2}` with positive weights.
    WeightedL2 { weights: Vec<f64> },
}

impl NormSpec {
    pub fn weighted(weights: Vec<f64>) -> Result<Self, SpaceError> {
        if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(SpaceError::BadWeights);
        }
        Ok(NormSpec::WeightedL2 { weights })
    }

    /// The norm of the dual pairing `(X, ‖·‖)* ≅ (ℝⁿ, ‖·‖_*)`.
    pub fn dual(&self) -> NormSpec {
        match self {
            NormSpec::L1 => NormSpec::Linf,
            NormSpec::L2 => NormSpec::L2,
            NormSpec::Linf => NormSpec::L1,
            NormSpec::WeightedL2 { weights } => NormSpec::WeightedL2 {
                weights: weights.iter().map(|w| 1.0 / w).collect(),
            },
        }
    }

    fn check(&self, x: &Vector) -> Result<(), SpaceError> {
        if let NormSpec::WeightedL2 { weights } = self {
            check_dim(x, weights.len())?;
        }
        Ok(())
    }

    /// `‖x‖`; the caller guarantees matching dimensions.
    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            NormSpec::L1 => x.iter().map(|v| v.abs()).sum(),
            NormSpec::L2 => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            NormSpec::Linf => x.iter().fold(0.0, |m, v| m.max(v.abs())),
            NormSpec::WeightedL2 { weights } => x
                .iter()
                .zip(weights)
                .map(|(v, w)| w * v * v)
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// `‖x‖`, panicking on a dimension mismatch. Convenience for internal
    /// code paths where dimensions were validated up front.
    pub fn of(&self, x: &Vector) -> f64 {
        self.check(x).expect("dimension validated by caller");
        self.eval_unchecked(x.as_slice())
    }

    /// `‖x − y‖`.
    pub fn dist(&self, x: &Vector, y: &Vector) -> f64 {
        self.of(&(x - y))
    }

    /// A unit vector `x` (in this norm) with `⟨u, x⟩ = ‖u‖_*`.
    pub fn dual_maximizer(&self, u: &Vector) -> Vector {
        let n = u.len();
        let du = self.dual().of(u);
        if du == 0.0 {
            return Vector::zeros(n);
        }
        match self {
            NormSpec::L1 => {
                let i = u.iamax();
                let mut x = Vector::zeros(n);
                x[i] = u[i].signum();
                x
            }
            NormSpec::L2 => u / du,
            NormSpec::Linf => u.map(|v| if v >= 0.0 { 1.0 } else { -1.0 }),
            NormSpec::WeightedL2 { weights } => {
                Vector::from_iterator(n, u.iter().zip(weights).map(|(v, w)| v / (w * du)))
            }
        }
    }
}

/// `‖x‖` under the norm `n`.
pub fn norm_eval(x: &Vector, n: &NormSpec) -> Result<f64, SpaceError> {
    n.check(x)?;
    Ok(n.eval_unchecked(x.as_slice()))
}

/// `sup{⟨u, x⟩ : ‖x‖ ≤ 1}` via the closed-form dual pairs
/// ℓ1↔ℓ∞, ℓ2↔ℓ2 and weighted-ℓ2↔inverse-weighted-ℓ2.
pub fn dual_norm_eval(u: &Vector, n: &NormSpec) -> Result<f64, SpaceError> {
    n.check(u)?;
    Ok(n.dual().eval_unchecked(u.as_slice()))
}

/// A point of `X × ℝ`, used for epigraph geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductMetricPoint {
    pub point: Vector,
    pub height: f64,
}

impl ProductMetricPoint {
    pub fn new(point: Vector, height: f64) -> Self {
        Self { point, height }
    }
}

/// `ρ((x,t),(y,s)) = ‖x − y‖ + |t − s|`.
pub fn product_metric(
    p: &ProductMetricPoint,
    q: &ProductMetricPoint,
    n: &NormSpec,
) -> Result<f64, SpaceError> {
    check_dim(&q.point, p.point.len())?;
    Ok(norm_eval(&(&p.point - &q.point), n)? + (p.height - q.height).abs())
}

/// `(de)serialize` a [`Vector`] as a flat JSON array.
pub mod serde_vector {
    use super::Vector;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Vector, s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vector, D::Error> {
        Ok(Vector::from_vec(Vec::<f64>::deserialize(d)?))
    }
}

/// `(de)serialize` an extended real: finite values as numbers, `±∞` and NaN
/// as the strings `"inf"`, `"-inf"`, `"nan"`.
pub mod serde_extended {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not an extended real: {other:?}"))),
            },
        }
    }
}

/// Same as [`serde_vector`] for `Vec<Vector>`.
pub mod serde_vectors {
    use super::Vector;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Vector], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<&[f64]> = v.iter().map(|x| x.as_slice()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vector>, D::Error> {
        Ok(Vec::<Vec<f64>>::deserialize(d)?
            .into_iter()
            .map(Vector::from_vec)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    #[test]
    fn norm_examples() {
        assert_eq!(norm_eval(&v(&[0.0, 0.0, 0.0]), &NormSpec::L2).unwrap(), 0.0);
        assert_eq!(norm_eval(&v(&[3.0, -4.0]), &NormSpec::L2).unwrap(), 5.0);
        assert_eq!(norm_eval(&v(&[1.0, -2.0, 3.0]), &NormSpec::L1).unwrap(), 6.0);
    }

    #[test]
    fn weighted_dimension_mismatch() {
        let n = NormSpec::weighted(vec![1.0, 2.0]).unwrap();
        assert_eq!(
            norm_eval(&v(&[1.0, 2.0, 3.0]), &n),
            Err(SpaceError::DimensionMismatch { expected: 2, got: 3 })
        );
        assert!(NormSpec::weighted(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn dual_norm_examples() {
        assert_eq!(dual_norm_eval(&v(&[1.0, 1.0]), &NormSpec::Linf).unwrap(), 2.0);
        for n in [NormSpec::L1, NormSpec::L2, NormSpec::Linf] {
            assert_eq!(dual_norm_eval(&v(&[0.0, 0.0, 0.0]), &n).unwrap(), 0.0);
        }
        assert_eq!(dual_norm_eval(&v(&[2.0, 0.0]), &NormSpec::L2).unwrap(), 2.0);
    }

    #[test]
    fn product_metric_examples() {
        let p = |x: &[f64], t| ProductMetricPoint::new(v(x), t);
        let l2 = NormSpec::L2;
        assert_eq!(product_metric(&p(&[0.0, 0.0], 0.0), &p(&[0.0, 0.0], 0.0), &l2).unwrap(), 0.0);
        assert_eq!(product_metric(&p(&[1.0, 0.0], 2.0), &p(&[0.0, 0.0], 0.0), &l2).unwrap(), 3.0);
        assert_eq!(product_metric(&p(&[1.0, 1.0], -1.0), &p(&[1.0, 1.0], 1.0), &l2).unwrap(), 2.0);
        assert!(product_metric(&p(&[1.0], 0.0), &p(&[1.0, 1.0], 0.0), &l2).is_err());
    }

    fn norms() -> impl Strategy<Value = NormSpec> {
        prop_oneof![
            Just(NormSpec::L1),
            Just(NormSpec::L2),
            Just(NormSpec::Linf),
            prop::collection::vec(0.1f64..10.0, 3).prop_map(|w| NormSpec::weighted(w).unwrap()),
        ]
    }

    fn vec3() -> impl Strategy<Value = Vector> {
        prop::collection::vec(-10.0f64..10.0, 3).prop_map(Vector::from_vec)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn holder_inequality(n in norms(), u in vec3(), x in vec3()) {
            let lhs = u.dot(&x).abs();
            let rhs = dual_norm_eval(&u, &n).unwrap() * norm_eval(&x, &n).unwrap();
            prop_assert!(lhs <= rhs + 1e-12 * (1.0 + rhs));
        }

        #[test]
        fn dual_norm_is_a_norm(n in norms(), u in vec3(), w in vec3(), lambda in -5.0f64..5.0) {
            let du = dual_norm_eval(&u, &n).unwrap();
            let scaled = dual_norm_eval(&(&u * lambda), &n).unwrap();
            prop_assert!((scaled - lambda.abs() * du).abs() <= 1e-12 * (1.0 + scaled));
            let sum = dual_norm_eval(&(&u + &w), &n).unwrap();
            prop_assert!(sum <= du + dual_norm_eval(&w, &n).unwrap() + 1e-12 * (1.0 + sum));
        }

        #[test]
        fn dual_maximizer_attains(n in norms(), u in vec3()) {
            let x = n.dual_maximizer(&u);
            let du = dual_norm_eval(&u, &n).unwrap();
            prop_assert!((u.dot(&x) - du).abs() <= 1e-10 * (1.0 + du));
            prop_assert!(n.of(&x) <= 1.0 + 1e-12);
        }

        #[test]
        fn product_metric_triangle(n in norms(), a in vec3(), b in vec3(), c in vec3(),
                                   s in -5.0f64..5.0, t in -5.0f64..5.0, r in -5.0f64..5.0) {
            let p = ProductMetricPoint::new(a, s);
            let q = ProductMetricPoint::new(b, t);
            let o = ProductMetricPoint::new(c, r);
            let pq = product_metric(&p, &q, &n).unwrap();
            let qo = product_metric(&q, &o, &n).unwrap();
            let po = product_metric(&p, &o, &n).unwrap();
            prop_assert!(po <= pq + qo + 1e-12 * (1.0 + po));
            prop_assert!((pq - product_metric(&q, &p, &n).unwrap()).abs() <= 1e-12 * (1.0 + pq));
        }
    }
}
