//! The modulus of continuity of `(1, 1 + (z2 − z1²)^(2/3))` at a point of the
//! cusp curve: bounded across the tangent hyperplane, infinite across others.

use foliant::field::registry_get;
use foliant::linalg::Vector;
use foliant::modulus::{modulus_sample, ModulusQuery};
use foliant::projective::ProjectivePoint;

fn main() {
    let field = registry_get("parabola-field")
        .unwrap()
        .into_field()
        .unwrap();
    let p = Vector::new(vec![1.0, 1.0]).unwrap();
    for (label, v) in [
        ("tangent (-2,1)", [-2.0, 1.0]),
        ("vertical (1,0)", [1.0, 0.0]),
        ("diagonal (1,1)", [1.0, 1.0]),
    ] {
        let v = ProjectivePoint::new(&v).unwrap();
        let q = ModulusQuery::new(field.clone(), p.clone(), v, 1e-3).unwrap();
        let est = modulus_sample(&q).unwrap();
        println!(
            "{label}: value {:>10.4} growth {:.3} blowup {}",
            est.value, est.growth, est.blowup
        );
        for (k, s) in est.strata.iter().enumerate().skip(8) {
            println!(
                "    k={k:2} scale {:.2e} max {:.4}",
                s.scale, s.max_quotient
            );
        }
    }
}
