//! `x' = 1 + (x − t²)^(2/3)` is not Lipschitz, yet the solution through the
//! origin is unique: along leaves parallel to the parabola the field is
//! Lipschitz, and it crosses them.

use foliant::checker::{check_cid, check_main, CheckParams};
use foliant::field::registry_get;
use foliant::foliation::Foliation;
use foliant::linalg::Vector;
use foliant::transform::{pullback_field, transversality, transversality_via_inverse};

fn main() {
    let field = registry_get("parabola-field")
        .unwrap()
        .into_field()
        .unwrap();
    let map = registry_get("parabola-foliation")
        .unwrap()
        .into_map()
        .unwrap();
    let p0 = Vector::new(vec![0.0, 0.0]).unwrap();
    let phi = Foliation::from_map(map, p0.clone()).unwrap();

    let h = pullback_field(&field, &phi).unwrap();
    for w in [[0.0, 0.0], [0.125, -0.25], [-0.5, 0.5]] {
        println!("pullback at (s, y) = {w:?}: {}", h.eval(&w).unwrap());
    }
    let t = transversality(&field, &phi).unwrap();
    println!(
        "transversality {} (via inverse {})",
        t.value,
        transversality_via_inverse(&field, &phi).unwrap()
    );

    let params = CheckParams::default();
    let r = check_main(&field, &phi, &params);
    println!(
        "parabola leaves: {} (L = {:.3}, inverse Jacobian L = {:.3})",
        r.verdict,
        r.lip_f_phi.as_ref().unwrap().constant,
        r.lip_inv_jac.as_ref().unwrap().constant
    );
    let r = check_cid(&field, &p0, &params);
    println!(
        "vertical leaves: {} (growth {:.2})",
        r.verdict,
        r.lip_f_phi.as_ref().unwrap().growth
    );
}
