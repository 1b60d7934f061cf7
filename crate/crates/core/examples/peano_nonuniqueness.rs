//! `x' = x^(2/3)` from the origin: the field is tangent to horizontal leaves,
//! and two different solutions start there.

use foliant::checker::{check_hyperplane, CheckParams};
use foliant::field::registry_get;
use foliant::linalg::Vector;
use foliant::ode::residual;
use foliant::projective::{hyperplane_basis, ProjectivePoint};

fn main() {
    let field = registry_get("peano-field").unwrap().into_field().unwrap();
    let p0 = Vector::new(vec![0.0, 0.0]).unwrap();
    let basis = hyperplane_basis(&ProjectivePoint::new(&[0.0, 1.0]).unwrap());
    let r = check_hyperplane(&field, &p0, &basis, &CheckParams::default());
    println!(
        "horizontal leaves: {} (value {:?})",
        r.verdict, r.transversality_value
    );

    let grid: Vec<f64> = (0..=200).map(|i| i as f64 / 100.0).collect();
    let zero = residual(&field, |t| vec![t, 0.0], &grid).unwrap();
    let cubic = residual(&field, |t| vec![t, (t / 3.0).powi(3)], &grid).unwrap();
    println!("residual of x = 0:         {zero:.2e}");
    println!("residual of x = (t/3)^3:   {cubic:.2e}");
}
