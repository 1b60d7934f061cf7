//! Rotations between unit vectors, and what happens near the antipode.

use foliant::linalg::{LinalgError, Matrix};
use foliant::rotation::{rotation_between, rotation_limit_probe};

fn main() -> Result<(), LinalgError> {
    let r = rotation_between(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0])?;
    println!("e1 -> e2:\n{r}");
    println!("det = {:.3}", r.det()?);

    let s = 0.5f64.sqrt();
    let r = rotation_between(&[s, s, 0.0], &[0.0, 0.0, 1.0])?;
    println!(
        "(1,1,0)/sqrt2 -> e3 sends it to {}",
        r.mul_vec(&[s, s, 0.0])
    );

    match rotation_between(&[1.0, 0.0], &[-1.0, 0.0]) {
        Err(e) => println!("{e}"),
        Ok(_) => unreachable!(),
    }

    // Approaching -e1 from two orthogonal directions gives two different limits in R^3.
    let a = rotation_limit_probe(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], 1e-4)?;
    let b = rotation_limit_probe(&[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0], 1e-4)?;
    println!("limit along e2:\n{a}limit along e3:\n{b}");
    println!("gap between the limits: {:.3}", (&a - &b).frobenius_norm());

    // In the plane the limit is unique.
    let c = rotation_limit_probe(&[1.0, 0.0], &[0.0, 1.0], 1e-3)?;
    let minus_id = Matrix::identity(2).scale(-1.0);
    println!("planar limit vs -Id: {:.2e}", (&c - &minus_id).max_abs());
    Ok(())
}
