//! Named fields and maps used throughout the examples and tests.

use crate::linalg::{Matrix, Vector};

use super::{DiffeoMap, FieldError, VectorField};

#[derive(Debug, Clone)]
pub enum RegistryEntry {
    Field(VectorField),
    Map(DiffeoMap),
}

impl RegistryEntry {
    fn kind(&self) -> &'static str {
        match self {
            RegistryEntry::Field(_) => "field",
            RegistryEntry::Map(_) => "map",
        }
    }

    pub fn into_field(self) -> Result<VectorField, FieldError> {
        match self {
            RegistryEntry::Field(f) => Ok(f),
            other => Err(FieldError::WrongKind {
                name: match &other {
                    RegistryEntry::Map(m) => m.name().to_string(),
                    RegistryEntry::Field(f) => f.name().to_string(),
                },
                wanted: "field",
                found: other.kind(),
            }),
        }
    }

    pub fn into_map(self) -> Result<DiffeoMap, FieldError> {
        match self {
            RegistryEntry::Map(m) => Ok(m),
            RegistryEntry::Field(f) => Err(FieldError::WrongKind {
                name: f.name().to_string(),
                wanted: "map",
                found: "field",
            }),
        }
    }
}

const NAMES: [&str; 8] = [
    "identity-field",
    "linear-field",
    "lorenz-field",
    "parabola-field",
    "peano-field",
    "pendulum-field",
    "identity-foliation",
    "parabola-foliation",
];

/// All names known to [`registry_get`].
pub fn registry_names() -> &'static [&'static str] {
    &NAMES
}

/// `x^(2/3)` with the real cube root.
fn two_thirds(x: f64) -> f64 {
    let c = x.cbrt();
    c * c
}

fn v2(a: f64, b: f64) -> Vector {
    Vector::from_vec(vec![a, b])
}

fn m2(a: f64, b: f64, c: f64, d: f64) -> Matrix {
    Matrix::from_rows(&[vec![a, b], vec![c, d]]).expect("2x2")
}

fn parabola_field() -> VectorField {
    VectorField::from_fn("parabola-field", 2, |z| {
        Ok(v2(1.0, 1.0 + two_thirds(z[1] - z[0] * z[0])))
    })
    .with_jacobian(|z| {
        let d = z[1] - z[0] * z[0];
        if d == 0.0 {
            return Err(FieldError::Undefined {
                what: "Jacobian of parabola-field",
                point: z.to_vec(),
            });
        }
        let k = 2.0 / (3.0 * d.cbrt());
        Ok(m2(0.0, 0.0, -2.0 * z[0] * k, k))
    })
}

fn peano_field() -> VectorField {
    VectorField::from_fn("peano-field", 2, |z| Ok(v2(1.0, two_thirds(z[1])))).with_jacobian(|z| {
        if z[1] == 0.0 {
            return Err(FieldError::Undefined {
                what: "Jacobian of peano-field",
                point: z.to_vec(),
            });
        }
        Ok(m2(0.0, 0.0, 0.0, 2.0 / (3.0 * z[1].cbrt())))
    })
}

fn linear_field() -> VectorField {
    VectorField::from_fn("linear-field", 2, |z| Ok(v2(1.0, z[1])))
        .with_jacobian(|_| Ok(m2(0.0, 0.0, 0.0, 1.0)))
}

fn pendulum_field() -> VectorField {
    VectorField::from_fn("pendulum-field", 2, |z| Ok(v2(z[1], -z[0].sin())))
        .with_jacobian(|z| Ok(m2(0.0, 1.0, -z[0].cos(), 0.0)))
}

fn lorenz_field() -> VectorField {
    const SIGMA: f64 = 10.0;
    const RHO: f64 = 28.0;
    const BETA: f64 = 8.0 / 3.0;
    VectorField::from_fn("lorenz-field", 3, |z| {
        Ok(Vector::from_vec(vec![
            SIGMA * (z[1] - z[0]),
            z[0] * (RHO - z[2]) - z[1],
            z[0] * z[1] - BETA * z[2],
        ]))
    })
    .with_jacobian(|z| {
        Ok(Matrix::from_rows(&[
            vec![-SIGMA, SIGMA, 0.0],
            vec![RHO - z[2], -1.0, -z[0]],
            vec![z[1], z[0], -BETA],
        ])?)
    })
}

fn parabola_foliation() -> DiffeoMap {
    DiffeoMap::from_fn("parabola-foliation", 2, |w| {
        Ok(v2(w[1], w[0] + w[1] * w[1]))
    })
    .with_inverse(|z| Ok(v2(z[1] - z[0] * z[0], z[0])))
    .with_jacobian(|w| Ok(m2(0.0, 1.0, 1.0, 2.0 * w[1])))
}

/// Looks up a named field or map.
///
/// Fields: `parabola-field` `(1, 1 + (z2 − z1²)^(2/3))`, `peano-field`
/// `(1, z2^(2/3))`, `linear-field` `(1, z2)`, `identity-field` `z`,
/// `pendulum-field` `(z2, −sin z1)` and `lorenz-field` with the classical
/// parameters. Maps: `parabola-foliation` `(s, y) ↦ (y, s + y²)` and
/// `identity-foliation`, both in the plane.
pub fn registry_get(name: &str) -> Result<RegistryEntry, FieldError> {
    use RegistryEntry::{Field, Map};
    Ok(match name {
        "parabola-field" => Field(parabola_field()),
        "peano-field" => Field(peano_field()),
        "linear-field" => Field(linear_field()),
        "identity-field" => Field(VectorField::identity(2)),
        "pendulum-field" => Field(pendulum_field()),
        "lorenz-field" => Field(lorenz_field()),
        "parabola-foliation" => Map(parabola_foliation()),
        "identity-foliation" => Map(DiffeoMap::identity(2)),
        _ => return Err(FieldError::UnknownName(name.to_string())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::fd_jacobian;

    fn field(name: &str) -> VectorField {
        registry_get(name).unwrap().into_field().unwrap()
    }

    fn map(name: &str) -> DiffeoMap {
        registry_get(name).unwrap().into_map().unwrap()
    }

    fn grid21() -> impl Iterator<Item = [f64; 2]> {
        (0..21).flat_map(|i| (0..21).map(move |j| [-1.0 + 0.1 * i as f64, -1.0 + 0.1 * j as f64]))
    }

    #[test]
    fn every_name_resolves() {
        for name in registry_names() {
            registry_get(name).unwrap();
        }
        assert!(matches!(
            registry_get("unknown"),
            Err(FieldError::UnknownName(_))
        ));
        assert!(matches!(
            registry_get("parabola-field").unwrap().into_map(),
            Err(FieldError::WrongKind { .. })
        ));
    }

    #[test]
    fn parabola_values() {
        assert_eq!(
            field("parabola-field")
                .eval(&[0.0, 0.0])
                .unwrap()
                .as_slice(),
            &[1.0, 1.0]
        );
        let phi = map("parabola-foliation");
        assert_eq!(phi.forward(&[0.0, 0.0]).unwrap().as_slice(), &[0.0, 0.0]);
        assert_eq!(phi.inverse(&[0.0, 0.0]).unwrap().as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn parabola_foliation_round_trips_on_a_grid() {
        let phi = map("parabola-foliation");
        for p in grid21() {
            let there = phi.forward(&phi.inverse(&p).unwrap()).unwrap();
            let back = phi.inverse(&phi.forward(&p).unwrap()).unwrap();
            assert!(there.distance(&p) <= 1e-10 && back.distance(&p) <= 1e-10);
        }
    }

    #[test]
    fn chain_rule_for_the_parabola_foliation() {
        let phi = map("parabola-foliation");
        for w in grid21() {
            let z = phi.forward(&w).unwrap();
            let jf = fd_jacobian(|x| phi.forward(x), &w, 1e-6).unwrap();
            let ji = fd_jacobian(|x| phi.inverse(x), &z, 1e-6).unwrap();
            let defect = (&(&ji * &jf) - &Matrix::identity(2)).max_abs();
            assert!(defect <= 1e-5, "defect {defect:e} at {w:?}");
        }
    }

    type JacobianFn = Box<dyn Fn(&[f64]) -> Matrix>;

    #[test]
    fn analytic_and_fd_jacobians_agree() {
        let probes = [[0.3, 1.7, -0.4], [-1.1, 0.2, 2.5], [0.9, -0.6, 0.1]];
        for name in registry_names() {
            let (dim, analytic, numeric): (usize, JacobianFn, JacobianFn) =
                match registry_get(name).unwrap() {
                    RegistryEntry::Field(f) => {
                        let g = f.clone();
                        (
                            f.dim(),
                            Box::new(move |x| f.analytic_jacobian(x).unwrap().unwrap()),
                            Box::new(move |x| fd_jacobian(|y| g.eval(y), x, 1e-6).unwrap()),
                        )
                    }
                    RegistryEntry::Map(m) => {
                        let g = m.clone();
                        (
                            m.dim(),
                            Box::new(move |x| m.jacobian(x).unwrap()),
                            Box::new(move |x| fd_jacobian(|y| g.forward(y), x, 1e-6).unwrap()),
                        )
                    }
                };
            for p in probes {
                let x = &p[..dim];
                let d = (&analytic(x) - &numeric(x)).max_abs();
                assert!(d <= 1e-6, "{name} at {x:?}: {d:e}");
            }
        }
    }

    #[test]
    fn kink_jacobians_are_refused() {
        assert!(field("parabola-field").jacobian(&[1.0, 1.0]).is_err());
        assert!(field("peano-field").jacobian(&[0.0, 0.0]).is_err());
    }
}
