//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::DMatrix;

use crate::space::Vector;

/// Rank threshold for singular values of averaging projectors and stacked
/// constraint matrices.
pub(crate) const RANK_TOL: f64 = 1e-8;

/// Orthonormal basis (as columns) of the column space of `m`.
pub(crate) fn range_basis(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return DMatrix::zeros(rows, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left vectors requested");
    let scale = svd.singular_values.max().max(1.0);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > tol * scale)
        .collect();
    let mut b = DMatrix::zeros(rows, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        b.set_column(j, &canonical_sign(u.column(i).into_owned()));
    }
    b
}

/// Orthonormal basis (as columns) of the null space of `m`.
pub(crate) fn null_basis(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    if rows == 0 {
        return DMatrix::identity(cols, cols);
    }
    // pad to a square system so the full right-singular basis is available
    let mut sq = DMatrix::zeros(rows.max(cols), cols);
    sq.view_mut((0, 0), (rows, cols)).copy_from(m);
    let svd = sq.svd(false, true);
    let vt = svd.v_t.expect("right vectors requested");
    let scale = svd.singular_values.max().max(1.0);
    let null: Vec<usize> = (0..cols)
        .filter(|&i| svd.singular_values[i] <= tol * scale)
        .collect();
    let mut b = DMatrix::zeros(cols, null.len());
    for (j, &i) in null.iter().enumerate() {
        b.set_column(j, &canonical_sign(vt.row(i).transpose()));
    }
    // re-orthonormalize against rounding
    if b.ncols() > 0 {
        let q = b.clone().qr().q();
        let mut out = DMatrix::zeros(cols, b.ncols());
        for j in 0..b.ncols() {
            out.set_column(j, &canonical_sign(q.column(j).into_owned()));
        }
        return out;
    }
    b
}

/// Flip `v` so that its first entry of non-negligible magnitude is positive.
pub(crate) fn canonical_sign(v: Vector) -> Vector {
    let scale = v.amax();
    match v.iter().find(|x| x.abs() > 1e-10 * scale.max(1e-300)) {
        Some(x) if *x < 0.0 => -v,
        _ => v,
    }
}

/// Largest principal angle between the column spaces of two orthonormal
/// bases. Returns `π/2` when the dimensions differ.
pub(crate) fn max_principal_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    if a.ncols() != b.ncols() {
        return std::f64::consts::FRAC_PI_2;
    }
    if a.ncols() == 0 {
        return 0.0;
    }
    // sin θ_max = ‖(I − A Aᵀ) B‖₂, which is accurate for small angles
    let resid = b - a * (a.transpose() * b);
    let s = resid.svd(false, false).singular_values.max();
    s.clamp(0.0, 1.0).asin()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_and_null_of_diagonal_projector() {
        let p = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        let r = range_basis(&p, RANK_TOL);
        assert_eq!(r.ncols(), 1);
        assert!((r[(0, 0)] - 0.5f64.sqrt()).abs() < 1e-12);
        let n = null_basis(&p, RANK_TOL);
        assert_eq!(n.ncols(), 1);
        assert!((n[(0, 0)] + n[(1, 0)]).abs() < 1e-12);
    }

    #[test]
    fn principal_angles() {
        let a = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let b = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
        assert!((max_principal_angle(&a, &b) - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!(max_principal_angle(&a, &a) < 1e-15);
    }
}
