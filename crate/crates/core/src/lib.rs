//! Group-invariant variational analysis on `ℝⁿ`.
//!
//! The crate realizes compact group actions, their Reynolds averaging, and
//! the group-invariant Ekeland principle with a posteriori certificates,
//! together with its consequences: Palais-Smale sequences, invariant
//! separation, Brønsted-Rockafellar and Bishop-Phelps.
//!
//! ```
//! use givp::group::GroupPreset;
//! use givp::{NormSpec, Vector};
//!
//! let g = GroupPreset::Sym { n: 2 }.build(&NormSpec::L2).unwrap();
//! let xbar = g.symmetrize(&Vector::from_row_slice(&[1.0, 3.0])).unwrap();
//! assert_eq!(xbar, Vector::from_row_slice(&[2.0, 2.0]));
//! ```

mod conic;
mod linalg;

pub mod consequences;
pub mod ekeland;
pub mod func;
pub mod group;
pub mod sampling;
pub mod separation;
pub mod space;

pub use conic::ConicError;
pub use separation::DualFunctional;
pub use space::{NormSpec, Vector};
