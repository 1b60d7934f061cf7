//! Local n-foliations `Φ(s, y)` of ℝⁿ⁺¹ around a base point.
//!
//! The leaf with label `s` is `y ↦ Φ(s, y)`. Three constructions are
//! provided: translates of a hyperplane ([`affine_foliation`]), vertical
//! translates of a graph ([`graph_foliation`]) and the frame construction
//! `Φ(s, y) = γ₁(s) + A(s)(0, y)` driven by a curve of points and normals
//! ([`curve_foliation`]).

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::expr::Scope;
use crate::field::{default_fd_step, fd_jacobian, DiffeoMap, FieldError, ScalarMap};
use crate::linalg::{LinalgError, Matrix, Vector};
use crate::projective::{align_sign, lift_path, OrthonormalBasis, ProjectivePoint};
use crate::rotation::rotation_between;

/// `|det Φ'(0, 0)|` must exceed this.
pub const DET_TOL: f64 = 1e-8;
/// `Φ(0, 0)` must match the base point within this.
pub const BASE_TOL: f64 = 1e-10;
/// Smallest accepted `|<γ₁'(0), γ̃₂(0)>|`.
pub const TRANSVERSALITY_TOL: f64 = 1e-6;
/// Accepted range of `‖γ₁'‖` on the sample grid.
pub const SPEED_RANGE: (f64, f64) = (0.5, 2.0);
/// The working interval ends before `<e₁, γ̃₂(s)>` drops below `−1 + SHRINK_TOL`.
pub const SHRINK_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FoliationError {
    #[error("transverse direction lies in the leaf hyperplane (orthogonal part {residual:e})")]
    Degenerate { residual: f64 },
    #[error("Φ(0,0) is {deviation:e} away from the base point")]
    Base { deviation: f64 },
    #[error("|det Φ'(0,0)| = {det:e} is not above {DET_TOL:e}")]
    Singular { det: f64 },
    #[error("<γ₁'(0), γ̃₂(0)> = {value:e}: the curve is tangent to the leaf at 0")]
    Transversality { value: f64 },
    #[error("‖γ₁'({t})‖ = {speed} is outside [0.5, 2]")]
    Speed { t: f64, speed: f64 },
    #[error("parameter interval [{0}, {1}] must contain 0 and have positive length")]
    Interval(f64, f64),
    #[error("need at least 2 samples, got {0}")]
    Samples(usize),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

type CurveFn = dyn Fn(f64) -> Result<Vector, FieldError> + Send + Sync;

/// A curve `γ₁: J → ℝⁿ⁺¹` together with normals `γ₂: J → ℙⁿ`.
#[derive(Clone)]
pub struct CurveFrame {
    dim: usize,
    interval: (f64, f64),
    gamma1: Arc<CurveFn>,
    gamma2: Arc<CurveFn>,
    gamma1_deriv: Option<Arc<CurveFn>>,
}

impl fmt::Debug for CurveFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CurveFrame")
            .field("dim", &self.dim)
            .field("interval", &self.interval)
            .field("analytic_derivative", &self.gamma1_deriv.is_some())
            .finish()
    }
}

fn check_len(v: Vector, dim: usize) -> Result<Vector, FieldError> {
    if v.dim() != dim {
        return Err(FieldError::Dimension {
            expected: dim,
            found: v.dim(),
        });
    }
    Ok(v)
}

impl CurveFrame {
    /// `gamma2` returns any nonzero representative of the normal line.
    pub fn new<G1, G2>(
        dim: usize,
        interval: (f64, f64),
        gamma1: G1,
        gamma2: G2,
    ) -> Result<Self, FoliationError>
    where
        G1: Fn(f64) -> Result<Vector, FieldError> + Send + Sync + 'static,
        G2: Fn(f64) -> Result<Vector, FieldError> + Send + Sync + 'static,
    {
        let (a, b) = interval;
        if !(a.is_finite() && b.is_finite() && a <= 0.0 && 0.0 <= b && a < b) {
            return Err(FoliationError::Interval(a, b));
        }
        Ok(Self {
            dim,
            interval,
            gamma1: Arc::new(gamma1),
            gamma2: Arc::new(gamma2),
            gamma1_deriv: None,
        })
    }

    pub fn with_gamma1_deriv<D>(mut self, d: D) -> Self
    where
        D: Fn(f64) -> Result<Vector, FieldError> + Send + Sync + 'static,
    {
        self.gamma1_deriv = Some(Arc::new(d));
        self
    }

    /// Components of `γ₁` and of a representative of `γ₂`, in the variable `t`.
    pub fn from_exprs(
        gamma1: &[&str],
        gamma2: &[&str],
        interval: (f64, f64),
    ) -> Result<Self, FoliationError> {
        let dim = gamma1.len();
        if gamma2.len() != dim {
            return Err(FieldError::Dimension {
                expected: dim,
                found: gamma2.len(),
            }
            .into());
        }
        let parse = |comps: &[&str]| -> Result<Vec<ScalarMap>, FieldError> {
            comps
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    ScalarMap::from_expr(format!("component {i}"), c, Scope::Parameter).map_err(
                        |e| match e {
                            FieldError::Parse { source, .. } => FieldError::Parse {
                                component: i,
                                source,
                            },
                            other => other,
                        },
                    )
                })
                .collect()
        };
        let g1 = parse(gamma1)?;
        let g2 = parse(gamma2)?;
        let eval = |maps: &[ScalarMap], t: f64| -> Result<Vector, FieldError> {
            let mut out = Vec::with_capacity(maps.len());
            for (component, m) in maps.iter().enumerate() {
                out.push(m.eval(&[t]).map_err(|e| match e {
                    FieldError::Eval { source, .. } => FieldError::Eval { component, source },
                    other => other,
                })?);
            }
            Ok(Vector::new(out)?)
        };
        Self::new(dim, interval, move |t| eval(&g1, t), move |t| eval(&g2, t))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn gamma1(&self, t: f64) -> Result<Vector, FieldError> {
        check_len((self.gamma1)(t)?, self.dim)
    }

    /// Canonical projective point of `γ₂(t)`.
    pub fn gamma2(&self, t: f64) -> Result<ProjectivePoint, FieldError> {
        let v = check_len((self.gamma2)(t)?, self.dim)?;
        Ok(ProjectivePoint::new(&v)?)
    }

    /// Analytic `γ₁'(t)` if attached, otherwise a central difference.
    pub fn gamma1_derivative(&self, t: f64) -> Result<Vector, FieldError> {
        if let Some(d) = &self.gamma1_deriv {
            return check_len(d(t)?, self.dim);
        }
        let h = default_fd_step(&[t]);
        let j = fd_jacobian(|x| self.gamma1(x[0]), &[t], h)?;
        Ok(j.column(0))
    }

    /// `m` evenly spaced parameters covering the interval.
    pub fn grid(&self, m: usize) -> Vec<f64> {
        let (a, b) = self.interval;
        match m {
            0 => Vec::new(),
            1 => vec![0.0],
            _ => (0..m)
                .map(|i| a + (b - a) * i as f64 / (m - 1) as f64)
                .collect(),
        }
    }
}

/// How a foliation was built.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    /// `Φ(s, y) = p₀ + s w + Σ yᵢ bᵢ`.
    Affine { w: Vector, basis: Vec<Vector> },
    /// `Φ(s, y) = p₀ + (y, s + g(y) − g(0))`.
    Graph { name: String },
    /// `Φ(s, y) = γ₁(s) + A(s)(0, y)`.
    Curve {
        requested: (f64, f64),
        working: (f64, f64),
        samples: usize,
    },
    /// A map supplied directly.
    Map { name: String },
}

impl Provenance {
    pub fn tag(&self) -> &'static str {
        match self {
            Provenance::Affine { .. } => "affine",
            Provenance::Graph { .. } => "graph",
            Provenance::Curve { .. } => "curve",
            Provenance::Map { .. } => "map",
        }
    }
}

/// Lifted normals of a curve frame at sample resolution.
#[derive(Debug, Clone)]
struct LiftedFrame {
    params: Vec<f64>,
    reps: Vec<Vector>,
    working: (f64, f64),
}

impl LiftedFrame {
    fn nearest(&self, s: f64) -> &Vector {
        let i = match self.params.binary_search_by(|p| p.total_cmp(&s)) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i == self.params.len() => i - 1,
            Err(i) => {
                if s - self.params[i - 1] <= self.params[i] - s {
                    i - 1
                } else {
                    i
                }
            }
        };
        &self.reps[i]
    }

    fn matrix(&self, frame: &CurveFrame, s: f64) -> Result<Matrix, FieldError> {
        let (a, b) = self.working;
        if !(a..=b).contains(&s) {
            return Err(FieldError::Undefined {
                what: "curve frame outside its working interval",
                point: vec![s],
            });
        }
        let rep = align_sign(frame.gamma2(s)?.rep(), self.nearest(s));
        let e1 = Vector::basis(frame.dim, 0);
        Ok(rotation_between(&e1, &rep)?)
    }
}

/// A local n-foliation with its base point.
#[derive(Debug, Clone)]
pub struct Foliation {
    map: DiffeoMap,
    base: Vector,
    provenance: Provenance,
    frame: Option<(CurveFrame, Arc<LiftedFrame>)>,
}

impl Foliation {
    /// Wraps a map, checking `Φ(0,0) = base` and `|det Φ'(0,0)| > 1e-8`.
    pub fn from_map(map: DiffeoMap, base: Vector) -> Result<Self, FoliationError> {
        let provenance = Provenance::Map {
            name: map.name().to_string(),
        };
        Self::validated(map, base, provenance, None)
    }

    fn validated(
        map: DiffeoMap,
        base: Vector,
        provenance: Provenance,
        frame: Option<(CurveFrame, Arc<LiftedFrame>)>,
    ) -> Result<Self, FoliationError> {
        if base.dim() != map.dim() {
            return Err(FieldError::Dimension {
                expected: map.dim(),
                found: base.dim(),
            }
            .into());
        }
        let origin = vec![0.0; map.dim()];
        let deviation = map.forward(&origin)?.distance(&base);
        if deviation > BASE_TOL {
            return Err(FoliationError::Base { deviation });
        }
        let det = map.jacobian(&origin)?.det()?;
        if det.abs() <= DET_TOL {
            return Err(FoliationError::Singular { det });
        }
        Ok(Self {
            map,
            base,
            provenance,
            frame,
        })
    }

    /// The identity foliation translated to `p0`: `Φ(s, y) = p₀ + (s, y)`.
    pub fn identity(p0: &Vector) -> Result<Self, FoliationError> {
        let n = p0.dim();
        let e1 = Vector::basis(n, 0);
        let basis = OrthonormalBasis::from_columns((1..n).map(|j| Vector::basis(n, j)).collect())?;
        affine_foliation(p0, &e1, &basis)
    }

    pub fn map(&self) -> &DiffeoMap {
        &self.map
    }

    pub fn base(&self) -> &Vector {
        &self.base
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    pub fn forward(&self, w: &[f64]) -> Result<Vector, FieldError> {
        self.map.forward(w)
    }

    pub fn jacobian(&self, w: &[f64]) -> Result<Matrix, FieldError> {
        self.map.jacobian(w)
    }

    pub fn inverse(&self, z: &[f64]) -> Result<Vector, FieldError> {
        self.map.inverse(z)
    }

    /// For curve foliations, the rotation `A(s)` taking `e₁` to `γ̃₂(s)`.
    pub fn frame_matrix(&self, s: f64) -> Option<Result<Matrix, FieldError>> {
        self.frame
            .as_ref()
            .map(|(frame, lifted)| lifted.matrix(frame, s))
    }
}

/// Translates of the hyperplane spanned by `basis`, swept along `w`.
pub fn affine_foliation(
    p0: &Vector,
    w: &Vector,
    basis: &OrthonormalBasis,
) -> Result<Foliation, FoliationError> {
    let n = p0.dim();
    for v in std::iter::once(w).chain(basis.columns()) {
        if v.dim() != n {
            return Err(FieldError::Dimension {
                expected: n,
                found: v.dim(),
            }
            .into());
        }
    }
    let mut residual = w.clone();
    for b in basis.columns() {
        let k = w.dot(b);
        residual = &residual - &b.scale(k);
    }
    if residual.norm() <= 1e-8 {
        return Err(FoliationError::Degenerate {
            residual: residual.norm(),
        });
    }
    let mut cols: Vec<&[f64]> = vec![w.as_slice()];
    cols.extend(basis.columns().iter().map(|c| c.as_slice()));
    let m = Matrix::from_columns(&cols)?;
    let m_inv = m.inverse()?;
    let (p_fwd, p_inv, m_fwd, m_jac) = (p0.clone(), p0.clone(), m.clone(), m);
    let map = DiffeoMap::from_fn("affine", n, move |w| Ok(&p_fwd + &m_fwd.mul_vec(w)))
        .with_inverse(move |z| Ok(m_inv.mul_vec((&Vector::new(z.to_vec())? - &p_inv).as_slice())))
        .with_jacobian(move |_| Ok(m_jac.clone()));
    let provenance = Provenance::Affine {
        w: w.clone(),
        basis: basis.columns().to_vec(),
    };
    Foliation::validated(map, p0.clone(), provenance, None)
}

/// Vertical translates of the graph of `g: ℝⁿ → ℝ`, through `p0`.
///
/// `Φ(s, y) = p₀ + (y, s + g(y) − g(0))`, with inverse
/// `z ↦ (z_last − p₀_last − g(y) + g(0), y)` where `y = z_head − p₀_head`.
pub fn graph_foliation(g: &ScalarMap, p0: &Vector) -> Result<Foliation, FoliationError> {
    let n = g.dim();
    if p0.dim() != n + 1 {
        return Err(FieldError::Dimension {
            expected: n + 1,
            found: p0.dim(),
        }
        .into());
    }
    let g0 = g.eval(&vec![0.0; n])?;
    let (gf, gi, gj) = (g.clone(), g.clone(), g.clone());
    let (pf, pi) = (p0.clone(), p0.clone());
    let map = DiffeoMap::from_fn(g.name().to_string(), n + 1, move |w| {
        let y = &w[1..];
        let mut z: Vec<f64> = y.iter().zip(pf.iter()).map(|(a, b)| a + b).collect();
        z.push(pf[n] + w[0] + gf.eval(y)? - g0);
        Ok(Vector::new(z)?)
    })
    .with_inverse(move |z| {
        let y: Vec<f64> = z[..n].iter().zip(pi.iter()).map(|(a, b)| a - b).collect();
        let s = z[n] - pi[n] - gi.eval(&y)? + g0;
        let mut w = vec![s];
        w.extend(y);
        Ok(Vector::new(w)?)
    })
    .with_jacobian(move |w| {
        let grad = gj.gradient(&w[1..])?;
        let mut rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut r = vec![0.0; n + 1];
                r[i + 1] = 1.0;
                r
            })
            .collect();
        let mut last = vec![1.0];
        last.extend(grad.iter());
        rows.push(last);
        Ok(Matrix::from_rows(&rows)?)
    });
    let provenance = Provenance::Graph {
        name: g.name().to_string(),
    };
    Foliation::validated(map, p0.clone(), provenance, None)
}

/// `Φ(s, y) = γ₁(s) + A(s)(0, y)` with `A(s)` the rotation taking `e₁` to
/// the lifted normal `γ̃₂(s)`.
///
/// The normals are lifted on a grid of `samples` points (plus 0) outward from
/// 0. Going outward, the working interval stops at the last sample before
/// `<e₁, γ̃₂(s)>` falls below `−1 + 1e-6`; the provenance records both
/// intervals. Between samples `A(s)` is computed exactly from `γ₂(s)`, with
/// the sign of the nearest lifted sample.
pub fn curve_foliation(frame: &CurveFrame, samples: usize) -> Result<Foliation, FoliationError> {
    if samples < 2 {
        return Err(FoliationError::Samples(samples));
    }
    let n = frame.dim();
    let mut params = frame.grid(samples);
    if !params.contains(&0.0) {
        params.push(0.0);
        params.sort_by(f64::total_cmp);
    }
    let zero = params
        .iter()
        .position(|&t| t == 0.0)
        .expect("inserted above");

    let normals: Vec<ProjectivePoint> = params
        .iter()
        .map(|&t| frame.gamma2(t))
        .collect::<Result<_, _>>()?;
    let ahead = lift_path(&normals[zero..])?;
    let mut behind = lift_path(&normals[..=zero].iter().rev().cloned().collect::<Vec<_>>())?;
    behind.reverse();
    let mut reps = behind;
    reps.extend(ahead.into_iter().skip(1));

    let d0 = frame.gamma1_derivative(0.0)?;
    let value = d0.dot(&reps[zero]);
    if value.abs() <= TRANSVERSALITY_TOL {
        return Err(FoliationError::Transversality { value });
    }

    let near_pole = |i: usize| reps[i][0] < -1.0 + SHRINK_TOL;
    let hi = (zero..params.len())
        .take_while(|&i| !near_pole(i))
        .last()
        .unwrap_or(zero);
    let lo = (0..=zero)
        .rev()
        .take_while(|&i| !near_pole(i))
        .last()
        .unwrap_or(zero);
    for &t in &params[lo..=hi] {
        let speed = frame.gamma1_derivative(t)?.norm();
        if !(SPEED_RANGE.0..=SPEED_RANGE.1).contains(&speed) {
            return Err(FoliationError::Speed { t, speed });
        }
    }
    let working = (params[lo], params[hi]);
    let lifted = Arc::new(LiftedFrame {
        params: params[lo..=hi].to_vec(),
        reps: reps[lo..=hi].to_vec(),
        working,
    });

    let (f, l) = (frame.clone(), lifted.clone());
    let map = DiffeoMap::from_fn("curve", n, move |w| {
        let a = l.matrix(&f, w[0])?;
        let mut leaf = w.to_vec();
        leaf[0] = 0.0;
        Ok(&f.gamma1(w[0])? + &a.mul_vec(&leaf))
    });
    let provenance = Provenance::Curve {
        requested: frame.interval(),
        working,
        samples,
    };
    let base = frame.gamma1(0.0)?;
    Foliation::validated(map, base, provenance, Some((frame.clone(), lifted)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn vector(v: &[f64]) -> Vector {
        Vector::new(v.to_vec()).unwrap()
    }

    fn span(cols: &[&[f64]]) -> OrthonormalBasis {
        OrthonormalBasis::from_columns(cols.iter().map(|c| vector(c)).collect()).unwrap()
    }

    #[test]
    fn affine_identity() {
        let f = affine_foliation(
            &vector(&[0.0, 0.0]),
            &vector(&[1.0, 0.0]),
            &span(&[&[0.0, 1.0]]),
        )
        .unwrap();
        assert_eq!(f.forward(&[0.3, -0.7]).unwrap().as_slice(), &[0.3, -0.7]);
        assert_eq!(f.provenance().tag(), "affine");
    }

    #[test]
    fn affine_rotated_frame_is_orthonormal() {
        let s = FRAC_1_SQRT_2;
        let f =
            affine_foliation(&vector(&[1.0, 1.0]), &vector(&[s, s]), &span(&[&[s, -s]])).unwrap();
        let j = f.jacobian(&[0.0, 0.0]).unwrap();
        assert!((&(&j.transpose() * &j) - &Matrix::identity(2)).max_abs() < 1e-15);
        assert!((j.det().unwrap().abs() - 1.0).abs() < 1e-15);
        let z = f.forward(&[0.2, 0.4]).unwrap();
        let back = f.inverse(&z).unwrap();
        assert!(back.distance(&[0.2, 0.4]) < 1e-15);
    }

    #[test]
    fn affine_rejects_w_inside_the_hyperplane() {
        assert!(matches!(
            affine_foliation(
                &vector(&[0.0, 0.0]),
                &vector(&[0.0, 1.0]),
                &span(&[&[0.0, 1.0]])
            ),
            Err(FoliationError::Degenerate { .. })
        ));
    }

    #[test]
    fn affine_jacobian_is_constant() {
        let f = affine_foliation(
            &vector(&[0.5, -1.0, 2.0]),
            &vector(&[1.0, 2.0, 3.0]),
            &span(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]),
        )
        .unwrap();
        let j0 = f.jacobian(&[0.0; 3]).unwrap();
        for w in [[1.0, -2.0, 0.5], [-0.3, 0.0, 4.0]] {
            assert!((&f.jacobian(&w).unwrap() - &j0).max_abs() <= 1e-12);
        }
    }

    #[test]
    fn graph_of_the_parabola() {
        let g = ScalarMap::from_expr("y^2", "y1^2", Scope::Leaf { dim: 1 }).unwrap();
        let f = graph_foliation(&g, &vector(&[0.0, 0.0])).unwrap();
        assert_eq!(f.forward(&[0.5, 2.0]).unwrap().as_slice(), &[2.0, 4.5]);
        assert_eq!(f.inverse(&[2.0, 4.5]).unwrap().as_slice(), &[0.5, 2.0]);
        let j = f.jacobian(&[0.3, 0.5]).unwrap();
        let want = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!((&j - &want).max_abs() < 1e-8);
    }

    #[test]
    fn graph_of_zero_swaps_axes() {
        let g = ScalarMap::from_expr("0", "0", Scope::Leaf { dim: 1 }).unwrap();
        let f = graph_foliation(&g, &vector(&[0.0, 0.0])).unwrap();
        assert!((f.jacobian(&[0.0, 0.0]).unwrap().det().unwrap().abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn graph_of_sine_round_trips() {
        let g = ScalarMap::from_expr("sin", "sin(y1)", Scope::Leaf { dim: 1 }).unwrap();
        let f = graph_foliation(&g, &vector(&[0.0, 0.0])).unwrap();
        for i in 0..21 {
            for j in 0..21 {
                let z = [-1.0 + 0.1 * i as f64, -1.0 + 0.1 * j as f64];
                let back = f.forward(&f.inverse(&z).unwrap()).unwrap();
                assert!(back.distance(&z) <= 1e-10);
            }
        }
    }

    #[test]
    fn straight_curve_with_constant_normal_is_a_translation() {
        let frame =
            CurveFrame::from_exprs(&["1 + t", "2", "3"], &["1", "0", "0"], (-0.5, 0.5)).unwrap();
        let f = curve_foliation(&frame, 17).unwrap();
        let z = f.forward(&[0.25, -0.5, 0.75]).unwrap();
        assert!(z.distance(&[1.25, 1.5, 3.75]) < 1e-15);
        assert_eq!(f.base().as_slice(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn tilted_parabola_frame() {
        let frame = CurveFrame::from_exprs(&["t", "t"], &["-2*t", "1"], (-0.5, 0.5)).unwrap();
        let f = curve_foliation(&frame, 64).unwrap();
        assert!(f.forward(&[0.0, 0.0]).unwrap().norm() <= 1e-10);
        let det = f.jacobian(&[0.0, 0.0]).unwrap().det().unwrap();
        assert!(det.abs() >= 0.5, "{det}");
        for s in frame.grid(64) {
            let a = f.frame_matrix(s).unwrap().unwrap();
            let cols: Vec<Vector> = (1..2).map(|j| a.column(j)).collect();
            let normal = frame.gamma2(s).unwrap();
            for c in &cols {
                assert!((c.norm() - 1.0).abs() <= 1e-9);
                assert!(c.dot(normal.rep()).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn tangent_curve_is_rejected() {
        let frame = CurveFrame::from_exprs(&["t", "t^2"], &["-2*t", "1"], (-0.5, 0.5)).unwrap();
        assert!(matches!(
            curve_foliation(&frame, 64),
            Err(FoliationError::Transversality { .. })
        ));
    }

    #[test]
    fn working_interval_shrinks_before_the_pole() {
        // The lifted normal turns from e₁ towards −e₁ as s grows.
        let frame = CurveFrame::from_exprs(
            &["t", "0"],
            &["cos(3.141592653589793*t)", "sin(3.141592653589793*t)"],
            (-0.5, 1.5),
        )
        .unwrap();
        let f = curve_foliation(&frame, 201).unwrap();
        match f.provenance() {
            Provenance::Curve { working, .. } => {
                assert_eq!(working.0, -0.5);
                assert!((working.1 - 0.99).abs() < 1e-12, "{working:?}");
            }
            other => panic!("{other:?}"),
        }
        assert!(f.forward(&[1.45, 0.0]).is_err());
    }

    #[test]
    fn speed_outside_the_band_is_rejected() {
        let frame = CurveFrame::from_exprs(&["5*t", "0"], &["1", "0"], (-0.1, 0.1)).unwrap();
        assert!(matches!(
            curve_foliation(&frame, 16),
            Err(FoliationError::Speed { .. })
        ));
    }

    #[test]
    fn interval_must_contain_zero() {
        assert!(matches!(
            CurveFrame::from_exprs(&["t", "0"], &["1", "0"], (0.1, 0.5)),
            Err(FoliationError::Interval(..))
        ));
    }
}
