//! Points of projective space and the hyperplanes they are normal to.

use crate::linalg::{LinalgError, Matrix, Vector};
use crate::rotation::{rotation_between, ANTIPODAL_TOL};

/// Coordinates with absolute value at or below this count as zero when
/// choosing the canonical sign.
pub const CANONICAL_ZERO_TOL: f64 = 1e-12;

/// Orthonormality tolerance for [`OrthonormalBasis`].
pub const BASIS_TOL: f64 = 1e-10;

/// A line through the origin of ℝⁿ⁺¹, stored as a unit vector whose first
/// coordinate of magnitude above [`CANONICAL_ZERO_TOL`] is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectivePoint {
    rep: Vector,
    flipped: bool,
}

impl ProjectivePoint {
    /// Normalises and canonicalises any nonzero representative.
    pub fn new(v: &[f64]) -> Result<Self, LinalgError> {
        let unit = Vector::new(v.to_vec())?.normalized()?;
        let lead = unit.iter().find(|x| x.abs() > CANONICAL_ZERO_TOL).copied();
        match lead {
            Some(x) if x < 0.0 => Ok(Self {
                rep: -&unit,
                flipped: true,
            }),
            Some(_) => Ok(Self {
                rep: unit,
                flipped: false,
            }),
            None => Err(LinalgError::ZeroVector),
        }
    }

    /// The canonical unit representative.
    pub fn rep(&self) -> &Vector {
        &self.rep
    }

    /// Whether the input had to be negated to reach canonical form.
    pub fn flipped(&self) -> bool {
        self.flipped
    }

    pub fn dim(&self) -> usize {
        self.rep.dim()
    }

    /// Angle between the two lines, in `[0, π/2]`.
    pub fn angle_to(&self, other: &ProjectivePoint) -> f64 {
        self.rep.dot(&other.rep).abs().min(1.0).acos()
    }
}

/// `n` orthonormal vectors spanning the hyperplane orthogonal to `normal`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    columns: Vec<Vector>,
    normal: Vector,
    flipped: bool,
}

impl OrthonormalBasis {
    /// Validates an orthonormal family of `n` vectors in ℝⁿ⁺¹ and completes
    /// it with its (canonically signed) unit normal.
    pub fn from_columns(columns: Vec<Vector>) -> Result<Self, LinalgError> {
        let first = columns.first().ok_or(LinalgError::Empty)?;
        let dim = first.dim();
        if columns.len() + 1 != dim {
            return Err(LinalgError::DimensionMismatch {
                expected: dim - 1,
                found: columns.len(),
            });
        }
        for c in &columns {
            c.check_dim(dim)?;
        }
        let defect = gram_defect(&columns);
        if defect > BASIS_TOL {
            return Err(LinalgError::NotOrthonormal { defect });
        }
        // Complete with the standard basis vector leaving the largest residual.
        let mut best: Option<Vector> = None;
        for j in 0..dim {
            let mut r = Vector::basis(dim, j);
            for c in &columns {
                let k = c.dot(&r);
                for (ri, ci) in r.as_mut_slice().iter_mut().zip(c.iter()) {
                    *ri -= k * ci;
                }
            }
            if best.as_ref().is_none_or(|b| r.norm() > b.norm()) {
                best = Some(r);
            }
        }
        let normal = ProjectivePoint::new(&best.expect("dim >= 1"))?;
        Ok(Self {
            columns,
            normal: normal.rep,
            flipped: false,
        })
    }

    pub fn columns(&self) -> &[Vector] {
        &self.columns
    }

    pub fn normal(&self) -> &Vector {
        &self.normal
    }

    /// Whether the antipodal representative had to be used.
    pub fn flipped(&self) -> bool {
        self.flipped
    }

    /// The `(n+1) × n` matrix with the basis vectors as columns.
    pub fn as_matrix(&self) -> Matrix {
        let cols: Vec<&[f64]> = self.columns.iter().map(|c| c.as_slice()).collect();
        Matrix::from_columns(&cols).expect("basis columns are consistent")
    }

    /// Largest violation of orthonormality or of orthogonality to the normal.
    pub fn defect(&self) -> f64 {
        let normal_defect = self
            .columns
            .iter()
            .map(|c| c.dot(&self.normal).abs())
            .fold(0.0_f64, f64::max);
        gram_defect(&self.columns).max(normal_defect)
    }
}

fn gram_defect(columns: &[Vector]) -> f64 {
    let mut worst = 0.0_f64;
    for (i, a) in columns.iter().enumerate() {
        for (j, b) in columns.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((a.dot(b) - target).abs());
        }
    }
    worst
}

/// Columns `2..n+1` of the rotation taking `e₁` to the representative of `v`.
///
/// If the representative sits at the pole `−e₁`, the opposite representative
/// is used and the flip recorded.
pub fn hyperplane_basis(v: &ProjectivePoint) -> OrthonormalBasis {
    let dim = v.dim();
    let e1 = Vector::basis(dim, 0);
    let (rep, flipped) = if 1.0 + v.rep[0] <= ANTIPODAL_TOL {
        (-&v.rep, true)
    } else {
        (v.rep.clone(), false)
    };
    let r = rotation_between(&e1, &rep).expect("representative is unit and away from -e1");
    OrthonormalBasis {
        columns: (1..dim).map(|j| r.column(j)).collect(),
        normal: v.rep.clone(),
        flipped,
    }
}

/// Largest angular gap tolerated between consecutive samples of a path.
pub const MAX_LIFT_GAP: f64 = std::f64::consts::FRAC_PI_4;

/// Lifts a sampled path in projective space to unit vectors, choosing signs
/// so that consecutive representatives have positive inner product.
///
/// The first representative is the canonical one, which is never `−e₁`.
pub fn lift_path(samples: &[ProjectivePoint]) -> Result<Vec<Vector>, LinalgError> {
    let mut out: Vec<Vector> = Vec::with_capacity(samples.len());
    for (i, p) in samples.iter().enumerate() {
        let Some(prev) = out.last() else {
            out.push(p.rep.clone());
            continue;
        };
        if p.dim() != prev.dim() {
            return Err(LinalgError::DimensionMismatch {
                expected: prev.dim(),
                found: p.dim(),
            });
        }
        let gap = p.angle_to(&samples[i - 1]);
        if gap >= MAX_LIFT_GAP {
            return Err(LinalgError::AngularGap {
                index: i - 1,
                next: i,
                gap,
                limit: MAX_LIFT_GAP,
            });
        }
        let next = if prev.dot(&p.rep) >= 0.0 {
            p.rep.clone()
        } else {
            -&p.rep
        };
        out.push(next);
    }
    Ok(out)
}

/// Chooses the sign of `rep` to agree with `reference` (positive inner product).
pub fn align_sign(rep: &Vector, reference: &[f64]) -> Vector {
    if rep.dot(reference) >= 0.0 {
        rep.clone()
    } else {
        -rep
    }
}
