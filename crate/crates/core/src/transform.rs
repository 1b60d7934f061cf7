//! Rewriting an autonomous system in foliation coordinates.
//!
//! If `z = Φ(w)` then `z' = F(z)` becomes `w' = h(w)` with
//!
//! ```text
//! h(w) = Φ'(w)⁻¹ F(Φ(w)).
//! ```
//!
//! The first component of `h` at the origin is the transversality value:
//! nonzero means the field crosses the leaf through the base point.

use thiserror::Error;

use crate::field::{default_fd_step, fd_gradient, FieldError, VectorField};
use crate::foliation::Foliation;
use crate::linalg::{LinalgError, Matrix, Vector};
use crate::sampling::{
    sample_quotients, PairDirection, SampleDomain, SamplingError, Shape, Stratum,
};

/// `|det Φ'(w)|` at or below this makes the pullback undefined at `w`.
pub const PULLBACK_DET_TOL: f64 = 1e-10;
/// `|transversality|` above this counts as nonzero.
pub const TRANSVERSALITY_THRESHOLD: f64 = 1e-6;
/// Default half-width of the box around the origin for Lipschitz estimates.
pub const DEFAULT_RADIUS: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error("field has dimension {field}, foliation {foliation}")]
    Dimension { field: usize, foliation: usize },
    #[error("Φ' is singular at {point:?} (det {det:e})")]
    Singular { point: Vec<f64>, det: f64 },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
}

impl From<TransformError> for FieldError {
    fn from(e: TransformError) -> Self {
        match e {
            TransformError::Field(f) => f,
            TransformError::Linalg(l) => FieldError::Linalg(l),
            TransformError::Singular { point, .. } => FieldError::Undefined {
                what: "inverse of Φ'",
                point,
            },
            TransformError::Dimension { field, foliation } => FieldError::Dimension {
                expected: foliation,
                found: field,
            },
            TransformError::Sampling(s) => FieldError::Undefined {
                what: "sampled quantity",
                point: match s {
                    SamplingError::Eval { point, .. } => point,
                    _ => Vec::new(),
                },
            },
        }
    }
}

fn check_dims(field: &VectorField, phi: &Foliation) -> Result<(), TransformError> {
    if field.dim() != phi.dim() {
        return Err(TransformError::Dimension {
            field: field.dim(),
            foliation: phi.dim(),
        });
    }
    Ok(())
}

/// `Φ'(w)⁻¹`, refusing near-singular Jacobians.
pub fn inverse_jacobian(phi: &Foliation, w: &[f64]) -> Result<Matrix, TransformError> {
    let j = phi.jacobian(w)?;
    let det = j.det()?;
    if det.abs() <= PULLBACK_DET_TOL {
        return Err(TransformError::Singular {
            point: w.to_vec(),
            det,
        });
    }
    Ok(j.inverse()?)
}

/// A field expressed in the `(s, y)` coordinates of a foliation.
#[derive(Debug, Clone)]
pub struct PulledBackField {
    base_field: VectorField,
    foliation: Foliation,
}

impl PulledBackField {
    pub fn base_field(&self) -> &VectorField {
        &self.base_field
    }

    pub fn foliation(&self) -> &Foliation {
        &self.foliation
    }

    /// `h(w) = Φ'(w)⁻¹ F(Φ(w))`.
    pub fn eval(&self, w: &[f64]) -> Result<Vector, TransformError> {
        let z = self.foliation.forward(w)?;
        let f = self.base_field.eval(&z)?;
        Ok(inverse_jacobian(&self.foliation, w)?.mul_vec(&f))
    }

    /// The pullback as an ordinary vector field on `(s, y)`.
    pub fn as_field(&self) -> VectorField {
        let me = self.clone();
        VectorField::from_fn(
            format!(
                "{} pulled back by {}",
                self.base_field.name(),
                self.foliation.map().name()
            ),
            self.foliation.dim(),
            move |w| me.eval(w).map_err(FieldError::from),
        )
    }
}

pub fn pullback_field(
    field: &VectorField,
    phi: &Foliation,
) -> Result<PulledBackField, TransformError> {
    check_dims(field, phi)?;
    Ok(PulledBackField {
        base_field: field.clone(),
        foliation: phi.clone(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transversality {
    /// `e₁ᵀ Φ'(0)⁻¹ F(p₀)`.
    pub value: f64,
    /// First row of `Φ'(0)⁻¹`, normal to the leaf through `p₀`.
    pub normal: Vector,
}

impl Transversality {
    pub fn holds(&self) -> bool {
        self.value.abs() > TRANSVERSALITY_THRESHOLD
    }
}

pub fn transversality(
    field: &VectorField,
    phi: &Foliation,
) -> Result<Transversality, TransformError> {
    check_dims(field, phi)?;
    let origin = vec![0.0; phi.dim()];
    let inv = inverse_jacobian(phi, &origin)?;
    let normal = inv.row(0);
    let value = normal.dot(&field.eval(phi.base())?);
    Ok(Transversality { value, normal })
}

/// `<∇(Φ⁻¹)₁(p₀), F(p₀)>` with a finite-difference gradient of the inverse
/// map. Needs an attached inverse.
pub fn transversality_via_inverse(
    field: &VectorField,
    phi: &Foliation,
) -> Result<f64, TransformError> {
    check_dims(field, phi)?;
    let p0 = phi.base();
    let grad = fd_gradient(|z| Ok(phi.inverse(z)?[0]), p0, default_fd_step(p0))?;
    Ok(grad.dot(&field.eval(p0)?))
}

/// `w ↦ F(Φ(w))`.
pub fn composed_field(field: &VectorField, phi: &Foliation) -> Result<VectorField, TransformError> {
    check_dims(field, phi)?;
    let (f, p) = (field.clone(), phi.clone());
    Ok(VectorField::from_fn(
        format!("{} after {}", field.name(), phi.map().name()),
        phi.dim(),
        move |w| f.eval(&p.forward(w)?),
    ))
}

/// `w ↦ Φ'(w)⁻¹`, flattened row-major.
pub fn inverse_jacobian_map(
    phi: &Foliation,
) -> impl Fn(&[f64]) -> Result<Vector, FieldError> + Sync + '_ {
    move |w| Ok(Vector::new(inverse_jacobian(phi, w)?.as_slice().to_vec())?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzEstimate {
    /// Largest sampled quotient, a lower bound for the Lipschitz constant.
    pub constant: f64,
    /// Half-width of the box `[−r, r]ⁿ⁺¹`.
    pub region: f64,
    pub pairs_used: usize,
    pub blowup: bool,
    pub growth: f64,
    pub strata: Vec<Stratum>,
    pub seed: u64,
}

/// Sampled Lipschitz constant of `g(s, y)` in `y` with `s` held fixed, over
/// the box `[−r, r]^dim`.
pub fn lipschitz_fixing_first<G>(
    g: G,
    dim: usize,
    radius: f64,
    budget: usize,
    seed: u64,
) -> Result<LipschitzEstimate, TransformError>
where
    G: Fn(&[f64]) -> Result<Vector, FieldError> + Sync,
{
    let domain = SampleDomain {
        pinned: 1,
        free: dim.saturating_sub(1),
        shape: Shape::Box,
        radius,
        direction: PairDirection::Random,
    };
    let s = sample_quotients(g, &domain, budget, seed)?;
    Ok(LipschitzEstimate {
        constant: s.value,
        region: radius,
        pairs_used: s.pairs_used,
        blowup: s.blowup,
        growth: s.growth(),
        strata: s.strata,
        seed,
    })
}
