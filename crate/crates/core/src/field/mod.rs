//! Vector fields, diffeomorphisms and scalar maps on ℝⁿ⁺¹.
//!
//! All three wrap thread-safe closures, so they are cheap to clone and can be
//! evaluated from several threads at once. Each can carry an analytic
//! derivative; when it does not, central finite differences stand in.

mod registry;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::expr::{parse_in, EvalError, Expr, ExprError, Scope};
use crate::linalg::{LinalgError, Matrix, Vector};

pub use registry::{registry_get, registry_names, RegistryEntry};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("expected a point of dimension {expected}, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("component {component}: {source}")]
    Eval {
        component: usize,
        #[source]
        source: EvalError,
    },
    #[error("component {component}: {source}")]
    Parse {
        component: usize,
        #[source]
        source: ExprError,
    },
    #[error("non-finite value at {point:?}")]
    NonFinite { point: Vec<f64> },
    #[error("{what} is not defined at {point:?}")]
    Undefined { what: &'static str, point: Vec<f64> },
    #[error("finite-difference step {h:e} is outside [1e-9, 1e-2]")]
    Step { h: f64 },
    #[error("no inverse map is attached")]
    NoInverse,
    #[error("unknown registry name {0:?}")]
    UnknownName(String),
    #[error("registry entry {name:?} is a {found}, not a {wanted}")]
    WrongKind {
        name: String,
        wanted: &'static str,
        found: &'static str,
    },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type PointFn = dyn Fn(&[f64]) -> Result<Vector, FieldError> + Send + Sync;
pub type MatrixFn = dyn Fn(&[f64]) -> Result<Matrix, FieldError> + Send + Sync;
pub type ScalarFn = dyn Fn(&[f64]) -> Result<f64, FieldError> + Send + Sync;

fn check_point(x: &[f64], dim: usize) -> Result<(), FieldError> {
    if x.len() != dim {
        return Err(FieldError::Dimension {
            expected: dim,
            found: x.len(),
        });
    }
    Ok(())
}

fn check_finite(v: Vector, at: &[f64]) -> Result<Vector, FieldError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(FieldError::NonFinite { point: at.to_vec() })
    }
}

fn parse_components(components: &[&str], scope: Scope) -> Result<Vec<Expr>, FieldError> {
    components
        .iter()
        .enumerate()
        .map(|(component, text)| {
            parse_in(text, scope).map_err(|source| FieldError::Parse { component, source })
        })
        .collect()
}

fn eval_components(exprs: &[Expr], x: &[f64]) -> Result<Vector, FieldError> {
    let mut out = Vec::with_capacity(exprs.len());
    for (component, e) in exprs.iter().enumerate() {
        out.push(
            e.eval(x)
                .map_err(|source| FieldError::Eval { component, source })?,
        );
    }
    Ok(Vector::from_vec(out))
}

/// Smallest and largest accepted finite-difference steps.
pub const FD_STEP_RANGE: (f64, f64) = (1e-9, 1e-2);

/// Default step `1e-6·max(1, ‖x‖)`, clamped to [`FD_STEP_RANGE`].
pub fn default_fd_step(x: &[f64]) -> f64 {
    (1e-6 * crate::linalg::norm2(x).max(1.0)).clamp(FD_STEP_RANGE.0, FD_STEP_RANGE.1)
}

/// Central-difference Jacobian of `map` at `point`.
///
/// Column `j` is `(map(x + h eⱼ) − map(x − h eⱼ)) / 2h`.
pub fn fd_jacobian<F>(map: F, point: &[f64], h: f64) -> Result<Matrix, FieldError>
where
    F: Fn(&[f64]) -> Result<Vector, FieldError>,
{
    if !(FD_STEP_RANGE.0..=FD_STEP_RANGE.1).contains(&h) {
        return Err(FieldError::Step { h });
    }
    let mut x = point.to_vec();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(point.len());
    for j in 0..point.len() {
        x[j] = point[j] + h;
        let plus = map(&x)?;
        x[j] = point[j] - h;
        let minus = map(&x)?;
        x[j] = point[j];
        columns.push(
            plus.iter()
                .zip(minus.iter())
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect(),
        );
    }
    let refs: Vec<&[f64]> = columns.iter().map(|c| c.as_slice()).collect();
    let m = Matrix::from_columns(&refs)?;
    if !m.is_finite() {
        return Err(FieldError::NonFinite {
            point: point.to_vec(),
        });
    }
    Ok(m)
}

/// Central-difference gradient of a scalar map.
pub fn fd_gradient<F>(map: F, point: &[f64], h: f64) -> Result<Vector, FieldError>
where
    F: Fn(&[f64]) -> Result<f64, FieldError>,
{
    let j = fd_jacobian(|x| map(x).map(|v| Vector::from_vec(vec![v])), point, h)?;
    Ok(j.row(0))
}

/// An autonomous vector field `F: ℝⁿ⁺¹ → ℝⁿ⁺¹`.
#[derive(Clone)]
pub struct VectorField {
    name: String,
    dim: usize,
    eval: Arc<PointFn>,
    jacobian: Option<Arc<MatrixFn>>,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorField")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

impl VectorField {
    pub fn from_fn<F>(name: impl Into<String>, dim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> Result<Vector, FieldError> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            dim,
            eval: Arc::new(f),
            jacobian: None,
        }
    }

    /// Attaches an analytic Jacobian.
    pub fn with_jacobian<J>(mut self, j: J) -> Self
    where
        J: Fn(&[f64]) -> Result<Matrix, FieldError> + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(j));
        self
    }

    /// One expression per component, in the variables `z1 .. z{dim}`.
    pub fn from_exprs(name: impl Into<String>, components: &[&str]) -> Result<Self, FieldError> {
        let dim = components.len();
        let exprs = parse_components(components, Scope::Ambient { dim })?;
        Ok(Self::from_fn(name, dim, move |z| {
            eval_components(&exprs, z)
        }))
    }

    /// `F(z) = A z`.
    pub fn linear(name: impl Into<String>, a: Matrix) -> Result<Self, FieldError> {
        if !a.is_square() {
            return Err(LinalgError::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            }
            .into());
        }
        let dim = a.rows();
        let jac = a.clone();
        Ok(Self::from_fn(name, dim, move |z| Ok(a.mul_vec(z)))
            .with_jacobian(move |_| Ok(jac.clone())))
    }

    /// `F(z) = z`.
    pub fn identity(dim: usize) -> Self {
        Self::linear("identity-field", Matrix::identity(dim)).expect("identity is square")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn eval(&self, z: &[f64]) -> Result<Vector, FieldError> {
        check_point(z, self.dim)?;
        let v = (self.eval)(z)?;
        check_point(&v, self.dim)?;
        check_finite(v, z)
    }

    /// The analytic Jacobian if attached, otherwise central differences with
    /// the default step.
    pub fn jacobian(&self, z: &[f64]) -> Result<Matrix, FieldError> {
        check_point(z, self.dim)?;
        let m = match &self.jacobian {
            Some(j) => j(z)?,
            None => fd_jacobian(|x| self.eval(x), z, default_fd_step(z))?,
        };
        if !m.is_finite() {
            return Err(FieldError::NonFinite { point: z.to_vec() });
        }
        Ok(m)
    }

    /// The analytic Jacobian only.
    pub fn analytic_jacobian(&self, z: &[f64]) -> Option<Result<Matrix, FieldError>> {
        self.jacobian.as_ref().map(|j| {
            check_point(z, self.dim)?;
            j(z)
        })
    }
}

/// A map `ℝⁿ⁺¹ → ℝⁿ⁺¹` meant to be a local diffeomorphism, optionally with
/// its inverse and Jacobian.
#[derive(Clone)]
pub struct DiffeoMap {
    name: String,
    dim: usize,
    forward: Arc<PointFn>,
    inverse: Option<Arc<PointFn>>,
    jacobian: Option<Arc<MatrixFn>>,
}

impl fmt::Debug for DiffeoMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiffeoMap")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("inverse", &self.inverse.is_some())
            .field("analytic_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

impl DiffeoMap {
    pub fn from_fn<F>(name: impl Into<String>, dim: usize, forward: F) -> Self
    where
        F: Fn(&[f64]) -> Result<Vector, FieldError> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            dim,
            forward: Arc::new(forward),
            inverse: None,
            jacobian: None,
        }
    }

    pub fn with_inverse<F>(mut self, inverse: F) -> Self
    where
        F: Fn(&[f64]) -> Result<Vector, FieldError> + Send + Sync + 'static,
    {
        self.inverse = Some(Arc::new(inverse));
        self
    }

    pub fn with_jacobian<J>(mut self, j: J) -> Self
    where
        J: Fn(&[f64]) -> Result<Matrix, FieldError> + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(j));
        self
    }

    /// Forward components in the foliation variables `s, y1 .. yn`, and
    /// optionally inverse components in `z1 .. z{n+1}`.
    pub fn from_exprs(
        name: impl Into<String>,
        forward: &[&str],
        inverse: Option<&[&str]>,
    ) -> Result<Self, FieldError> {
        let dim = forward.len();
        if dim == 0 {
            return Err(LinalgError::Empty.into());
        }
        let fw = parse_components(forward, Scope::Foliation { leaf_dim: dim - 1 })?;
        let mut map = Self::from_fn(name, dim, move |w| eval_components(&fw, w));
        if let Some(inv) = inverse {
            if inv.len() != dim {
                return Err(FieldError::Dimension {
                    expected: dim,
                    found: inv.len(),
                });
            }
            let iv = parse_components(inv, Scope::Ambient { dim })?;
            map = map.with_inverse(move |z| eval_components(&iv, z));
        }
        Ok(map)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn("identity-foliation", dim, |w| {
            Ok(Vector::from_vec(w.to_vec()))
        })
        .with_inverse(|z| Ok(Vector::from_vec(z.to_vec())))
        .with_jacobian(move |_| Ok(Matrix::identity(dim)))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_inverse(&self) -> bool {
        self.inverse.is_some()
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn forward(&self, w: &[f64]) -> Result<Vector, FieldError> {
        check_point(w, self.dim)?;
        let z = (self.forward)(w)?;
        check_point(&z, self.dim)?;
        check_finite(z, w)
    }

    pub fn inverse(&self, z: &[f64]) -> Result<Vector, FieldError> {
        let inv = self.inverse.as_ref().ok_or(FieldError::NoInverse)?;
        check_point(z, self.dim)?;
        let w = inv(z)?;
        check_point(&w, self.dim)?;
        check_finite(w, z)
    }

    /// `Φ'(w)`: analytic if attached, else central differences.
    pub fn jacobian(&self, w: &[f64]) -> Result<Matrix, FieldError> {
        check_point(w, self.dim)?;
        let m = match &self.jacobian {
            Some(j) => j(w)?,
            None => fd_jacobian(|x| self.forward(x), w, default_fd_step(w))?,
        };
        if !m.is_finite() {
            return Err(FieldError::NonFinite { point: w.to_vec() });
        }
        Ok(m)
    }
}

/// A scalar function on ℝᵈ with an optional analytic gradient.
#[derive(Clone)]
pub struct ScalarMap {
    name: String,
    dim: usize,
    f: Arc<ScalarFn>,
    gradient: Option<Arc<PointFn>>,
}

impl fmt::Debug for ScalarMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarMap")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .finish()
    }
}

impl ScalarMap {
    pub fn from_fn<F>(name: impl Into<String>, dim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> Result<f64, FieldError> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            dim,
            f: Arc::new(f),
            gradient: None,
        }
    }

    pub fn with_gradient<G>(mut self, g: G) -> Self
    where
        G: Fn(&[f64]) -> Result<Vector, FieldError> + Send + Sync + 'static,
    {
        self.gradient = Some(Arc::new(g));
        self
    }

    /// Parses a single expression in the given scope.
    pub fn from_expr(
        name: impl Into<String>,
        text: &str,
        scope: Scope,
    ) -> Result<Self, FieldError> {
        let e = parse_components(&[text], scope)?.remove(0);
        Ok(Self::from_fn(name, scope.dim(), move |x| {
            e.eval(x).map_err(|source| FieldError::Eval {
                component: 0,
                source,
            })
        }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, FieldError> {
        check_point(x, self.dim)?;
        let v = (self.f)(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(FieldError::NonFinite { point: x.to_vec() })
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vector, FieldError> {
        check_point(x, self.dim)?;
        match &self.gradient {
            Some(g) => check_finite(g(x)?, x),
            None => fd_gradient(|p| self.eval(p), x, default_fd_step(x)),
        }
    }
}

/// An autonomous initial value problem `z' = F(z)`, `z(t₀) = p₀`.
#[derive(Debug, Clone)]
pub struct Ivp {
    pub field: VectorField,
    pub p0: Vector,
    pub t0: f64,
}

impl Ivp {
    pub fn new(field: VectorField, p0: Vector, t0: f64) -> Result<Self, FieldError> {
        check_point(&p0, field.dim())?;
        if !t0.is_finite() {
            return Err(FieldError::NonFinite { point: vec![t0] });
        }
        Ok(Self { field, p0, t0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Matrix, b: &Matrix, tol: f64) -> bool {
        (a - b).max_abs() <= tol
    }

    #[test]
    fn fd_jacobian_is_exact_for_linear_maps() {
        let m = Matrix::from_rows(&[
            vec![1.0, -2.0, 0.5],
            vec![3.0, 0.0, 1.0],
            vec![0.0, 4.0, -1.0],
        ])
        .unwrap();
        let f = VectorField::linear("m", m.clone()).unwrap();
        let j = fd_jacobian(|x| f.eval(x), &[0.3, -1.2, 2.0], 1e-6).unwrap();
        assert!(close(&j, &m, 1e-9));
    }

    #[test]
    fn fd_jacobian_of_the_parabolic_map() {
        let phi = DiffeoMap::from_exprs("phi", &["y1", "s + y1^2"], None).unwrap();
        let j = fd_jacobian(|w| phi.forward(w), &[0.3, 0.5], 1e-5).unwrap();
        let want = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(close(&j, &want, 1e-8));
    }

    #[test]
    fn fd_step_bounds() {
        let f = VectorField::identity(2);
        assert!(matches!(
            fd_jacobian(|x| f.eval(x), &[0.0, 0.0], 0.1),
            Err(FieldError::Step { .. })
        ));
        assert!(matches!(
            fd_jacobian(|x| f.eval(x), &[0.0, 0.0], 1e-10),
            Err(FieldError::Step { .. })
        ));
        assert_eq!(default_fd_step(&[0.0, 0.0]), 1e-6);
        assert!((default_fd_step(&[3.0, 4.0]) - 5e-6).abs() < 1e-20);
    }

    #[test]
    fn fd_reports_failures_inside_the_stencil() {
        let f = VectorField::from_exprs("root", &["1", "sqrt(z2)"]).unwrap();
        assert!(matches!(
            fd_jacobian(|x| f.eval(x), &[0.0, 0.0], 1e-6),
            Err(FieldError::Eval { component: 1, .. })
        ));
    }

    #[test]
    fn expression_fields_check_dimensions() {
        let f = VectorField::from_exprs("f", &["z1 + z2", "z1 * z2"]).unwrap();
        assert_eq!(f.eval(&[2.0, 3.0]).unwrap().as_slice(), &[5.0, 6.0]);
        assert!(matches!(f.eval(&[1.0]), Err(FieldError::Dimension { .. })));
        assert!(matches!(
            VectorField::from_exprs("bad", &["z1", "z3"]),
            Err(FieldError::Parse { component: 1, .. })
        ));
    }

    #[test]
    fn scalar_map_gradient() {
        let g = ScalarMap::from_expr("g", "y1^2 + 3*y2", Scope::Leaf { dim: 2 }).unwrap();
        let grad = g.gradient(&[0.5, 1.0]).unwrap();
        assert!((grad[0] - 1.0).abs() < 1e-8 && (grad[1] - 3.0).abs() < 1e-8);
    }

    #[test]
    fn ivp_dimension_must_match() {
        assert!(Ivp::new(VectorField::identity(2), Vector::zeros(3), 0.0).is_err());
        assert!(Ivp::new(VectorField::identity(2), Vector::zeros(2), 0.0).is_ok());
    }
}
