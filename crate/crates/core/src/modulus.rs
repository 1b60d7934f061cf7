//! The modulus of continuity of a field along a hyperplane.
//!
//! For a point `p`, a direction `v` and a radius `δ`,
//!
//! ```text
//! ω_F(p, v, δ) = sup ‖F(x) − F(y)‖ / ‖x − y‖
//! ```
//!
//! over distinct `x, y` in the ball `B(p, δ)` with `x − p` and `y − p`
//! orthogonal to `v`. Sampling gives a lower bound. For `C¹` fields the
//! small-`δ` limit is the norm of the Jacobian restricted to `v⊥`, which
//! [`modulus_gradient`] computes directly.

use thiserror::Error;

use crate::field::{FieldError, VectorField};
use crate::foliation::CurveFrame;
use crate::linalg::{LinalgError, Matrix, Vector};
use crate::projective::{hyperplane_basis, ProjectivePoint};
use crate::sampling::{
    sample_quotients, sample_quotients_traced, PairDirection, PairRecord, SampleDomain,
    SamplingError, Shape, Stratum, DEFAULT_BUDGET, DEFAULT_SEED,
};

/// Fewest curve samples accepted by [`modulus_along_curve`].
pub const MIN_CURVE_SAMPLES: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModulusError {
    #[error("radius δ = {0} must be positive and finite")]
    Delta(f64),
    #[error("point has dimension {point}, direction {direction}, field {field}")]
    Dimension {
        point: usize,
        direction: usize,
        field: usize,
    },
    #[error("a curve needs at least {MIN_CURVE_SAMPLES} samples, got {0}")]
    TooFewSamples(usize),
    #[error("at curve parameter {t}: {source}")]
    AtParameter {
        t: f64,
        #[source]
        source: Box<ModulusError>,
    },
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone)]
pub struct ModulusQuery {
    pub field: VectorField,
    pub p: Vector,
    pub v: ProjectivePoint,
    pub delta: f64,
    pub budget: usize,
    pub seed: u64,
}

impl ModulusQuery {
    /// A query with the default budget and seed.
    pub fn new(
        field: VectorField,
        p: Vector,
        v: ProjectivePoint,
        delta: f64,
    ) -> Result<Self, ModulusError> {
        if p.dim() != field.dim() || v.dim() != field.dim() {
            return Err(ModulusError::Dimension {
                point: p.dim(),
                direction: v.dim(),
                field: field.dim(),
            });
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(ModulusError::Delta(delta));
        }
        Ok(Self {
            field,
            p,
            v,
            delta,
            budget: DEFAULT_BUDGET,
            seed: DEFAULT_SEED,
        })
    }

    pub fn budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn domain(&self) -> SampleDomain {
        SampleDomain {
            pinned: 0,
            free: self.p.dim() - 1,
            shape: Shape::Ball,
            radius: self.delta,
            direction: PairDirection::Random,
        }
    }

    /// Maps hyperplane coefficients to the ambient point `p + B c`.
    fn embed(&self) -> impl Fn(&[f64]) -> Vector + Sync + '_ {
        let basis = hyperplane_basis(&self.v).as_matrix();
        move |c: &[f64]| &self.p + &basis.mul_vec(c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModulusEstimate {
    /// Largest sampled quotient, a lower bound for `ω_F(p, v, δ)`.
    pub value: f64,
    pub delta: f64,
    pub pairs_used: usize,
    pub strata: Vec<Stratum>,
    pub blowup: bool,
    /// Last stratum maximum over the one four halvings coarser.
    pub growth: f64,
    pub seed: u64,
}

fn estimate(q: &ModulusQuery, s: crate::sampling::QuotientSample) -> ModulusEstimate {
    ModulusEstimate {
        value: s.value,
        delta: q.delta,
        pairs_used: s.pairs_used,
        growth: s.growth(),
        strata: s.strata,
        blowup: s.blowup,
        seed: q.seed,
    }
}

/// Sampled lower bound of `ω_F(p, v, δ)` with a blow-up flag.
pub fn modulus_sample(q: &ModulusQuery) -> Result<ModulusEstimate, ModulusError> {
    if q.p.dim() < 2 {
        return Err(SamplingError::NoFreeCoordinates.into());
    }
    let embed = q.embed();
    let s = sample_quotients(|c| q.field.eval(&embed(c)), &q.domain(), q.budget, q.seed)?;
    Ok(estimate(q, s))
}

/// [`modulus_sample`] together with every evaluated pair, as ambient points.
pub fn modulus_sample_traced(
    q: &ModulusQuery,
) -> Result<(ModulusEstimate, Vec<PairRecord>), ModulusError> {
    if q.p.dim() < 2 {
        return Err(SamplingError::NoFreeCoordinates.into());
    }
    let embed = q.embed();
    let (s, mut recs) =
        sample_quotients_traced(|c| q.field.eval(&embed(c)), &q.domain(), q.budget, q.seed)?;
    for r in &mut recs {
        r.a = embed(&r.a).into_vec();
        r.b = embed(&r.b).into_vec();
    }
    Ok((estimate(q, s), recs))
}

/// `‖J_F(p) B‖`, where the columns of `B` span `v⊥`.
pub fn modulus_gradient(
    field: &VectorField,
    p: &[f64],
    v: &ProjectivePoint,
) -> Result<f64, ModulusError> {
    if p.len() != field.dim() || v.dim() != field.dim() {
        return Err(ModulusError::Dimension {
            point: p.len(),
            direction: v.dim(),
            field: field.dim(),
        });
    }
    let j = field.jacobian(p)?;
    let b: Matrix = hyperplane_basis(v).as_matrix();
    Ok((&j * &b).op_norm())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveModulus {
    /// Curve parameter and estimate at each sample.
    pub estimates: Vec<(f64, ModulusEstimate)>,
    pub max_value: f64,
    pub any_blowup: bool,
}

/// Estimates `ω_F(γ₁(t), γ₂(t), δ)` at `samples` evenly spaced parameters.
pub fn modulus_along_curve(
    field: &VectorField,
    frame: &CurveFrame,
    delta: f64,
    budget: usize,
    seed: u64,
    samples: usize,
) -> Result<CurveModulus, ModulusError> {
    if samples < MIN_CURVE_SAMPLES {
        return Err(ModulusError::TooFewSamples(samples));
    }
    let mut estimates = Vec::with_capacity(samples);
    for t in frame.grid(samples) {
        let at = |source: ModulusError| ModulusError::AtParameter {
            t,
            source: Box::new(source),
        };
        let p = frame.gamma1(t).map_err(|e| at(e.into()))?;
        let v = frame.gamma2(t).map_err(|e| at(e.into()))?;
        let q = ModulusQuery::new(field.clone(), p, v, delta)
            .map_err(at)?
            .budget(budget)
            .seed(seed);
        estimates.push((t, modulus_sample(&q).map_err(at)?));
    }
    let max_value = estimates.iter().map(|(_, e)| e.value).fold(0.0, f64::max);
    let any_blowup = estimates.iter().any(|(_, e)| e.blowup);
    Ok(CurveModulus {
        estimates,
        max_value,
        any_blowup,
    })
}
