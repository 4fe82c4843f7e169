//! Thin modeling layer over the clarabel interior-point solver.
//!
//! Variables are indices; constraints are affine expressions placed in zero,
//! nonnegative or second-order cones. Objectives are linear and minimized.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use thiserror::Error;

use crate::space::NormSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConicError {
    #[error("conic program is infeasible")]
    Infeasible,
    #[error("conic program is unbounded")]
    Unbounded,
    #[error("conic solver stopped with status {0}")]
    Failed(String),
}

/// `c + Σ coef·x[var]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct Affine {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl Affine {
    pub fn var(i: usize) -> Self {
        Self {
            terms: vec![(i, 1.0)],
            constant: 0.0,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn linear(terms: Vec<(usize, f64)>) -> Self {
        Self {
            terms,
            constant: 0.0,
        }
    }

    pub fn scaled(mut self, s: f64) -> Self {
        for t in &mut self.terms {
            t.1 *= s;
        }
        self.constant *= s;
        self
    }

    pub fn plus(mut self, other: Affine) -> Self {
        self.terms.extend(other.terms);
        self.constant += other.constant;
        self
    }
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Program {
    nvars: usize,
    objective: Vec<(usize, f64)>,
    zero: Vec<Affine>,
    nonneg: Vec<Affine>,
    soc: Vec<Vec<Affine>>,
}

#[derive(Debug, Clone)]
pub(crate) struct Solution {
    pub x: Vec<f64>,
    pub objective: f64,
}

impl Program {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self) -> usize {
        self.nvars += 1;
        self.nvars - 1
    }

    pub fn add_vars(&mut self, k: usize) -> Vec<usize> {
        (0..k).map(|_| self.add_var()).collect()
    }

    pub fn minimize(&mut self, terms: Vec<(usize, f64)>) {
        self.objective = terms;
    }

    /// `e = 0`.
    pub fn eq(&mut self, e: Affine) {
        self.zero.push(e);
    }

    /// `e ≥ 0`.
    pub fn nonneg(&mut self, e: Affine) {
        self.nonneg.push(e);
    }

    /// `a ≤ b`.
    pub fn le(&mut self, a: Affine, b: Affine) {
        self.nonneg.push(b.plus(a.scaled(-1.0)));
    }

    /// `(t, e₁, …, e_k)` in the Lorentz cone.
    pub fn soc(&mut self, t: Affine, es: Vec<Affine>) {
        let mut cone = vec![t];
        cone.extend(es);
        self.soc.push(cone);
    }

    /// `norm(e) ≤ t` for the given norm (pass the dual spec to bound a dual
    /// norm).
    pub fn norm_le(&mut self, norm: &NormSpec, es: Vec<Affine>, t: Affine) {
        match norm {
            NormSpec::L2 => self.soc(t, es),
            NormSpec::WeightedL2 { weights } => {
                let scaled = es
                    .into_iter()
                    .zip(weights)
                    .map(|(e, w)| e.scaled(w.sqrt()))
                    .collect();
                self.soc(t, scaled)
            }
            NormSpec::Linf => {
                for e in es {
                    self.le(e.clone(), t.clone());
                    self.le(e.scaled(-1.0), t.clone());
                }
            }
            NormSpec::L1 => {
                let aux = self.add_vars(es.len());
                for (e, &a) in es.into_iter().zip(&aux) {
                    self.le(e.clone(), Affine::var(a));
                    self.le(e.scaled(-1.0), Affine::var(a));
                }
                self.le(Affine::linear(aux.iter().map(|&a| (a, 1.0)).collect()), t);
            }
        }
    }

    pub fn solve(&self) -> Result<Solution, ConicError> {
        let n = self.nvars;
        let mut q = vec![0.0; n];
        for &(i, c) in &self.objective {
            q[i] += c;
        }
        // A x + s = b with s = e(x) = constant + terms·x ⇒ row is −terms, b = constant
        let (mut ri, mut ci, mut vals, mut b) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        let mut push = |e: &Affine, b: &mut Vec<f64>| {
            let row = b.len();
            for &(j, c) in &e.terms {
                ri.push(row);
                ci.push(j);
                vals.push(-c);
            }
            b.push(e.constant);
        };
        let mut cones = Vec::new();
        for e in &self.zero {
            push(e, &mut b);
        }
        if !self.zero.is_empty() {
            cones.push(SupportedConeT::ZeroConeT(self.zero.len()));
        }
        for e in &self.nonneg {
            push(e, &mut b);
        }
        if !self.nonneg.is_empty() {
            cones.push(SupportedConeT::NonnegativeConeT(self.nonneg.len()));
        }
        for cone in &self.soc {
            for e in cone {
                push(e, &mut b);
            }
            cones.push(SupportedConeT::SecondOrderConeT(cone.len()));
        }
        let m = b.len();
        let a = CscMatrix::new_from_triplets(m, n, ri, ci, vals);
        let p = CscMatrix::zeros((n, n));
        let mut settings = DefaultSettings::<f64>::default();
        settings.verbose = false;
        settings.tol_gap_abs = 1e-10;
        settings.tol_gap_rel = 1e-10;
        settings.tol_feas = 1e-10;
        settings.tol_ktratio = 1e-8;
        settings.max_iter = 400;
        let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cones, settings)
            .map_err(|e| ConicError::Failed(format!("{e:?}")))?;
        solver.solve();
        let sol = &solver.solution;
        match sol.status {
            SolverStatus::Solved | SolverStatus::AlmostSolved => Ok(Solution {
                x: sol.x.clone(),
                objective: sol.obj_val,
            }),
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
                Err(ConicError::Infeasible)
            }
            SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
                Err(ConicError::Unbounded)
            }
            other => Err(ConicError::Failed(format!("{other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lp_and_socp() {
        // min x + y s.t. x ≥ 1, y ≥ 2
        let mut p = Program::new();
        let x = p.add_var();
        let y = p.add_var();
        p.le(Affine::constant(1.0), Affine::var(x));
        p.le(Affine::constant(2.0), Affine::var(y));
        p.minimize(vec![(x, 1.0), (y, 1.0)]);
        let s = p.solve().unwrap();
        assert!((s.objective - 3.0).abs() < 1e-8);

        // min t s.t. ‖(x − 3, y + 4)‖ ≤ t
        for norm in [NormSpec::L2, NormSpec::L1, NormSpec::Linf] {
            let mut p = Program::new();
            let x = p.add_var();
            let y = p.add_var();
            let t = p.add_var();
            p.norm_le(
                &norm,
                vec![
                    Affine::var(x).plus(Affine::constant(-3.0)),
                    Affine::var(y).plus(Affine::constant(4.0)),
                ],
                Affine::var(t),
            );
            // and x + y ≥ 1 forces distance from the point (3, −4)
            p.le(Affine::constant(1.0), Affine::linear(vec![(x, 1.0), (y, 1.0)]));
            p.minimize(vec![(t, 1.0)]);
            let s = p.solve().unwrap();
            // distance from (3, −4) to {x + y ≥ 1}
            let want = match norm {
                NormSpec::L2 => 2.0 / 2f64.sqrt(),
                NormSpec::L1 => 2.0,
                _ => 1.0,
            };
            assert!((s.objective - want).abs() < 1e-7, "{norm:?}: {}", s.objective);
        }
    }

    #[test]
    fn infeasible_is_reported() {
        let mut p = Program::new();
        let x = p.add_var();
        p.le(Affine::var(x), Affine::constant(-1.0));
        p.le(Affine::constant(1.0), Affine::var(x));
        p.minimize(vec![(x, 1.0)]);
        assert_eq!(p.solve().unwrap_err(), ConicError::Infeasible);
    }
}
