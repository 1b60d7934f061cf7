//! Rotations in ℝⁿ⁺¹ sending one unit vector to another.
//!
//! With `K = v uᵀ − u vᵀ`, the matrix
//!
//! ```text
//! R(u, v) = Id + K + K² / (1 + <u, v>)
//! ```
//!
//! is in SO(n+1) and maps `u` to `v` whenever `v ≠ −u`. At `v = −u` the
//! formula has a pole. In the plane the limit exists and equals `−Id`; from
//! three dimensions on the limit depends on the direction of approach, which
//! [`rotation_limit_probe`] exposes numerically.

use crate::linalg::{LinalgError, Matrix, Vector};

/// Default lower bound on `1 + <u, v>` accepted by [`rotation_between`].
pub const ANTIPODAL_TOL: f64 = 1e-8;

/// Unit-norm tolerance on the inputs of [`rotation_between`].
pub const UNIT_TOL: f64 = 1e-9;

/// The antisymmetric matrix `y xᵀ − x yᵀ`.
pub fn skew_outer(x: &[f64], y: &[f64]) -> Result<Matrix, LinalgError> {
    if x.len() != y.len() {
        return Err(LinalgError::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.is_empty() {
        return Err(LinalgError::Empty);
    }
    let n = x.len();
    let mut k = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            k[(i, j)] = y[i] * x[j] - x[i] * y[j];
        }
    }
    Ok(k)
}

fn check_unit(u: &[f64]) -> Result<(), LinalgError> {
    let norm = crate::linalg::norm2(u);
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(LinalgError::NotUnit { norm });
    }
    Ok(())
}

/// The rotation sending the unit vector `u` to the unit vector `v`.
///
/// Fails with [`LinalgError::Antipodal`] when `1 + <u, v>` is at most
/// [`ANTIPODAL_TOL`].
pub fn rotation_between(u: &[f64], v: &[f64]) -> Result<Matrix, LinalgError> {
    rotation_between_with_tolerance(u, v, ANTIPODAL_TOL)
}

/// [`rotation_between`] with an explicit antipodal tolerance.
pub fn rotation_between_with_tolerance(
    u: &[f64],
    v: &[f64],
    antipodal_tol: f64,
) -> Result<Matrix, LinalgError> {
    let k = skew_outer(u, v)?;
    check_unit(u)?;
    check_unit(v)?;
    let gap = 1.0 + u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    if gap <= antipodal_tol {
        return Err(LinalgError::Antipodal {
            gap,
            tolerance: antipodal_tol,
        });
    }
    let k2 = &k * &k;
    let id = Matrix::identity(u.len());
    Ok(&(&id + &k) + &k2.scale(1.0 / gap))
}

/// Evaluates the rotation towards `v = (t·w̄ − u)/‖t·w̄ − u‖`, a point
/// approaching `−u` along the direction `w̄ ⊥ u` as `t → 0`.
///
/// The probe bypasses the default antipodal tolerance (the whole point is to
/// get close to the pole) but still refuses an exact hit.
pub fn rotation_limit_probe(u: &[f64], wbar: &[f64], t: f64) -> Result<Matrix, LinalgError> {
    if u.len() != wbar.len() {
        return Err(LinalgError::DimensionMismatch {
            expected: u.len(),
            found: wbar.len(),
        });
    }
    if !(t > 0.0 && t <= 1e-2) {
        return Err(LinalgError::ProbeParameter { t });
    }
    check_unit(u)?;
    check_unit(wbar)?;
    let inner: f64 = u.iter().zip(wbar).map(|(a, b)| a * b).sum();
    if inner.abs() > 1e-10 {
        return Err(LinalgError::NotOrthogonal { inner });
    }
    let dir = Vector::from_vec(u.iter().zip(wbar).map(|(a, w)| t * w - a).collect());
    let v = dir.normalized()?;
    rotation_between_with_tolerance(u, &v, 0.0)
}
