//! A foliation built from a base curve and a field of leaf normals.

use foliant::field::registry_get;
use foliant::foliation::{curve_foliation, CurveFrame, Provenance};
use foliant::modulus::modulus_along_curve;

fn main() {
    let frame = CurveFrame::from_exprs(&["t", "t"], &["-2*t", "1"], (-0.5, 0.5)).unwrap();
    let phi = curve_foliation(&frame, 64).unwrap();
    if let Provenance::Curve { working, .. } = phi.provenance() {
        println!("working interval {working:?}");
    }
    println!("base point {}", phi.forward(&[0.0, 0.0]).unwrap());
    println!(
        "det at origin {:.4}",
        phi.jacobian(&[0.0, 0.0]).unwrap().det().unwrap()
    );
    for s in [-0.4, 0.0, 0.3] {
        let a = phi.frame_matrix(s).unwrap().unwrap();
        println!("frame at s = {s}:\n{a}");
    }

    let field = registry_get("parabola-field")
        .unwrap()
        .into_field()
        .unwrap();
    let m = modulus_along_curve(&field, &frame, 1e-3, 1024, 42, 33).unwrap();
    println!(
        "modulus along the curve: max {:.4}, blowup {}",
        m.max_value, m.any_blowup
    );
}
