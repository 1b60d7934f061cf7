//! Fixed-step integration, perturbation funnels and residual checks.
//!
//! A numerical integrator follows one solution and cannot reveal that
//! others exist. Non-uniqueness is shown with [`residual`] instead: two
//! closed-form candidates through the same point that both solve the
//! equation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

use crate::field::{FieldError, Ivp, VectorField};
use crate::linalg::{norm2, Vector};

pub const MAX_STEPS: usize = 10_000_000;
/// Central-difference step used by [`residual`].
pub const RESIDUAL_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("step must be positive and finite, got {0}")]
    Step(f64),
    #[error("end time {0} is not finite")]
    EndTime(f64),
    #[error("{steps} steps exceed the limit of {MAX_STEPS}")]
    TooManySteps { steps: f64 },
    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64 },
    #[error("perturbation radius must be finite and non-negative, got {0}")]
    Epsilon(f64),
    #[error("a funnel needs at least one direction")]
    Directions,
    #[error("candidate has dimension {found}, field {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("empty grid")]
    EmptyGrid,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// An integrated solution, stored in increasing time order.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<Vector>,
    step: f64,
    backward: bool,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vector] {
        &self.states
    }

    /// Step actually taken; the grid is uniform and ends exactly at `t_end`.
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn method(&self) -> &'static str {
        "rk4"
    }

    pub fn is_backward(&self) -> bool {
        self.backward
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// State at the initial time.
    pub fn initial(&self) -> &Vector {
        if self.backward {
            self.states.last().unwrap()
        } else {
            &self.states[0]
        }
    }

    /// State at `t_end`.
    pub fn terminal(&self) -> &Vector {
        if self.backward {
            &self.states[0]
        } else {
            self.states.last().unwrap()
        }
    }

    /// Rows `t, z1, .., zn` with a header line.
    pub fn to_csv(&self) -> String {
        let dim = self.states.first().map_or(0, |s| s.dim());
        let mut out = String::from("t");
        for i in 1..=dim {
            out.push_str(&format!(",z{i}"));
        }
        out.push('\n');
        for (t, z) in self.times.iter().zip(&self.states) {
            out.push_str(&format!("{t:.16e}"));
            for x in z.iter() {
                out.push_str(&format!(",{x:.16e}"));
            }
            out.push('\n');
        }
        out
    }
}

fn rk4_step(field: &VectorField, z: &[f64], h: f64) -> Result<Vec<f64>, FieldError> {
    let axpy =
        |k: &[f64], c: f64| -> Vec<f64> { z.iter().zip(k).map(|(a, b)| a + c * b).collect() };
    let k1 = field.eval(z)?;
    let k2 = field.eval(&axpy(&k1, 0.5 * h))?;
    let k3 = field.eval(&axpy(&k2, 0.5 * h))?;
    let k4 = field.eval(&axpy(&k3, h))?;
    Ok((0..z.len())
        .map(|i| z[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// Classical RK4 from `ivp.t0` to `t_end`.
///
/// The interval is split into `ceil(|t_end − t0| / step)` equal steps.
/// When `t_end < t0` the reversed field is integrated forward, and the
/// result is still stored with increasing times.
pub fn integrate_rk4(ivp: &Ivp, t_end: f64, step: f64) -> Result<Trajectory, OdeError> {
    integrate_from(&ivp.field, ivp.p0.as_slice(), ivp.t0, t_end, step)
}

fn integrate_from(
    field: &VectorField,
    p0: &[f64],
    t0: f64,
    t_end: f64,
    step: f64,
) -> Result<Trajectory, OdeError> {
    if !(step.is_finite() && step > 0.0) {
        return Err(OdeError::Step(step));
    }
    if !t_end.is_finite() {
        return Err(OdeError::EndTime(t_end));
    }
    let span = t_end - t0;
    let raw = (span.abs() / step * (1.0 - 1e-12)).ceil();
    if raw > MAX_STEPS as f64 {
        return Err(OdeError::TooManySteps { steps: raw });
    }
    let n = raw as usize;
    let h = if n == 0 { 0.0 } else { span / n as f64 };
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    let mut z = p0.to_vec();
    times.push(t0);
    states.push(Vector::from_vec(z.clone()));
    for i in 1..=n {
        z = rk4_step(field, &z, h)?;
        let t = if i == n { t_end } else { t0 + i as f64 * h };
        if !z.iter().all(|x| x.is_finite()) {
            return Err(OdeError::NonFinite { t });
        }
        times.push(t);
        states.push(Vector::from_vec(z.clone()));
    }
    let backward = span < 0.0;
    if backward {
        times.reverse();
        states.reverse();
    }
    Ok(Trajectory {
        times,
        states,
        step: h.abs(),
        backward,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunnelReport {
    pub epsilon: f64,
    pub trajectories: usize,
    pub times: Vec<f64>,
    /// Largest pairwise distance between trajectories at each time.
    pub diameter: Vec<f64>,
    pub final_diameter: f64,
}

/// Unit directions: evenly spaced on the circle in the plane, seeded
/// Gaussian directions otherwise.
pub fn spread_directions(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    match dim {
        1 => (0..count)
            .map(|i| vec![if i % 2 == 0 { 1.0 } else { -1.0 }])
            .collect(),
        2 => (0..count)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count)
                .map(|_| loop {
                    let g: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let n = norm2(&g);
                    if n > 1e-12 {
                        break g.iter().map(|x| x / n).collect();
                    }
                })
                .collect()
        }
    }
}

/// Integrates from `p0 + ε·dᵢ` for each `ε` and each of `directions`
/// unit vectors, recording the diameter of the resulting bundle.
///
/// The same directions are reused for every `ε`. With `ε = 0` a single
/// trajectory is integrated.
pub fn funnel(
    ivp: &Ivp,
    epsilons: &[f64],
    t_end: f64,
    step: f64,
    directions: usize,
    seed: u64,
) -> Result<Vec<FunnelReport>, OdeError> {
    let runs = funnel_traced(ivp, epsilons, t_end, step, directions, seed)?;
    Ok(runs.into_iter().map(|(r, _)| r).collect())
}

/// [`funnel`] that also returns the trajectories of each bundle.
pub fn funnel_traced(
    ivp: &Ivp,
    epsilons: &[f64],
    t_end: f64,
    step: f64,
    directions: usize,
    seed: u64,
) -> Result<Vec<(FunnelReport, Vec<Trajectory>)>, OdeError> {
    if directions == 0 {
        return Err(OdeError::Directions);
    }
    if let Some(&e) = epsilons.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
        return Err(OdeError::Epsilon(e));
    }
    let dirs = spread_directions(ivp.field.dim(), directions, seed);
    epsilons
        .iter()
        .map(|&eps| {
            let starts: Vec<Vec<f64>> = if eps == 0.0 {
                vec![ivp.p0.to_vec()]
            } else {
                dirs.iter()
                    .map(|d| ivp.p0.iter().zip(d).map(|(p, di)| p + eps * di).collect())
                    .collect()
            };
            let runs = starts
                .par_iter()
                .map(|p| integrate_from(&ivp.field, p, ivp.t0, t_end, step))
                .collect::<Result<Vec<_>, _>>()?;
            let times = runs[0].times.clone();
            let diameter: Vec<f64> = (0..times.len())
                .into_par_iter()
                .map(|k| {
                    let mut d: f64 = 0.0;
                    for i in 0..runs.len() {
                        for j in i + 1..runs.len() {
                            d = d.max(runs[i].states[k].distance(&runs[j].states[k]));
                        }
                    }
                    d
                })
                .collect();
            let final_diameter = if runs[0].backward {
                diameter[0]
            } else {
                *diameter.last().unwrap()
            };
            let report = FunnelReport {
                epsilon: eps,
                trajectories: runs.len(),
                times,
                diameter,
                final_diameter,
            };
            Ok((report, runs))
        })
        .collect()
}

/// Largest `‖z'(t) − F(z(t))‖` over `grid`, with `z'` by central differences.
pub fn residual<C>(field: &VectorField, candidate: C, grid: &[f64]) -> Result<f64, OdeError>
where
    C: Fn(f64) -> Vec<f64>,
{
    if grid.is_empty() {
        return Err(OdeError::EmptyGrid);
    }
    let h = RESIDUAL_STEP;
    let mut worst: f64 = 0.0;
    for &t in grid {
        let z = candidate(t);
        if z.len() != field.dim() {
            return Err(OdeError::Dimension {
                expected: field.dim(),
                found: z.len(),
            });
        }
        let (zp, zm) = (candidate(t + h), candidate(t - h));
        let f = field.eval(&z)?;
        let r: Vec<f64> = (0..z.len())
            .map(|i| (zp[i] - zm[i]) / (2.0 * h) - f[i])
            .collect();
        let r = norm2(&r);
        if !r.is_finite() {
            return Err(OdeError::NonFinite { t });
        }
        worst = worst.max(r);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::registry_get;

    fn field(name: &str) -> VectorField {
        registry_get(name).unwrap().into_field().unwrap()
    }

    fn ivp(name: &str, p0: [f64; 2]) -> Ivp {
        Ivp::new(field(name), Vector::new(p0.to_vec()).unwrap(), 0.0).unwrap()
    }

    #[test]
    fn linear_equation_reaches_e() {
        let tr = integrate_rk4(&ivp("linear-field", [0.0, 1.0]), 1.0, 1e-3).unwrap();
        assert!((tr.terminal()[1] - 1f64.exp()).abs() <= 1e-9);
        assert!((tr.terminal()[0] - 1.0).abs() <= 1e-12);
        assert_eq!(tr.len(), 1001);
    }

    #[test]
    fn bad_steps_are_rejected() {
        let p = ivp("linear-field", [0.0, 1.0]);
        assert_eq!(integrate_rk4(&p, 1.0, 0.0), Err(OdeError::Step(0.0)));
        assert!(matches!(
            integrate_rk4(&p, 1.0, -1e-3),
            Err(OdeError::Step(_))
        ));
        assert!(matches!(
            integrate_rk4(&p, 1e3, 1e-5),
            Err(OdeError::TooManySteps { .. })
        ));
    }

    #[test]
    fn blowup_is_reported() {
        let f = VectorField::from_exprs("square", &["1", "z2^2"]).unwrap();
        let p = Ivp::new(f, Vector::new(vec![0.0, 1.0]).unwrap(), 0.0).unwrap();
        assert!(matches!(
            integrate_rk4(&p, 2.0, 1e-3),
            Err(OdeError::NonFinite { .. } | OdeError::Field(_))
        ));
    }

    #[test]
    fn rk4_error_shrinks_sixteenfold() {
        let p = ivp("linear-field", [0.0, 1.0]);
        let err = |h: f64| (integrate_rk4(&p, 1.0, h).unwrap().terminal()[1] - 1f64.exp()).abs();
        let e: Vec<f64> = [1e-2, 5e-3, 2.5e-3].iter().map(|&h| err(h)).collect();
        for w in e.windows(2) {
            let r = w[0] / w[1];
            assert!((14.0..=18.0).contains(&r), "ratio {r}");
        }
    }

    #[test]
    fn parabola_field_self_converges() {
        let p = ivp("parabola-field", [0.0, 0.0]);
        let a = integrate_rk4(&p, 0.5, 1e-4).unwrap();
        let b = integrate_rk4(&p, 0.5, 5e-5).unwrap();
        assert!(a.terminal().distance(b.terminal()) <= 1e-6);
    }

    #[test]
    fn backward_returns_to_start() {
        for (name, p0) in [
            ("linear-field", [0.3, -0.2]),
            ("pendulum-field", [0.5, 0.1]),
        ] {
            let fwd = integrate_rk4(&ivp(name, p0), 1.0, 1e-4).unwrap();
            let back = Ivp::new(field(name), fwd.terminal().clone(), 1.0).unwrap();
            let tr = integrate_rk4(&back, 0.0, 1e-4).unwrap();
            assert!(tr.is_backward());
            assert!(tr.times().windows(2).all(|w| w[0] < w[1]));
            assert!(tr.terminal().distance(&p0) <= 1e-7, "{name}");
        }
    }

    #[test]
    fn linear_funnel_grows_exponentially() {
        let eps = 1e-3;
        let r = funnel(&ivp("linear-field", [0.0, 1.0]), &[eps], 1.0, 1e-3, 8, 0).unwrap();
        let r = &r[0];
        assert_eq!(r.trajectories, 8);
        for (t, d) in r.times.iter().zip(&r.diameter) {
            let oracle = 2.0 * eps * t.exp();
            assert!((d - oracle).abs() <= 0.05 * oracle, "t={t}");
        }
    }

    #[test]
    fn zero_radius_funnel_is_one_curve() {
        let r = funnel(&ivp("pendulum-field", [0.1, 0.0]), &[0.0], 0.5, 1e-3, 8, 0).unwrap();
        assert_eq!(r[0].trajectories, 1);
        assert!(r[0].diameter.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn parabola_funnel_shrinks_with_epsilon() {
        let eps = [1e-2, 5e-3, 2.5e-3, 1.25e-3, 1e-3, 1e-4, 1e-5];
        let r = funnel(&ivp("parabola-field", [0.0, 0.0]), &eps, 0.5, 1e-3, 8, 0).unwrap();
        for w in r.windows(2) {
            assert!(w[1].final_diameter <= w[0].final_diameter);
        }
        let c = r
            .iter()
            .map(|x| x.final_diameter / x.epsilon)
            .fold(0.0, f64::max);
        assert!(c < 20.0, "C = {c}");
        assert!(r
            .iter()
            .all(|x| x.diameter[0] <= 2.0 * x.epsilon * (1.0 + 1e-12)));
    }

    #[test]
    fn three_dimensional_directions_are_unit_and_seeded() {
        let a = spread_directions(3, 10, 7);
        assert_eq!(a, spread_directions(3, 10, 7));
        assert!(a.iter().all(|d| (norm2(d) - 1.0).abs() < 1e-12));
    }

    #[test]
    fn peano_has_two_solutions_through_origin() {
        let f = field("peano-field");
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        assert!(residual(&f, |t| vec![t, 0.0], &grid).unwrap() <= 1e-10);
        assert!(residual(&f, |t| vec![t, (t / 3.0).powi(3)], &grid).unwrap() <= 1e-6);
        let lin = field("linear-field");
        assert!(residual(&lin, |t| vec![t, t.exp()], &grid).unwrap() <= 1e-6);
        assert!(residual(&lin, |t| vec![t, 1.0], &grid).unwrap() > 0.5);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let tr = integrate_rk4(&ivp("linear-field", [0.0, 1.0]), 0.01, 1e-3).unwrap();
        let csv = tr.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,z1,z2");
        assert_eq!(lines.len(), 12);
    }
}
