//! Perturbation funnels: trajectories from a small circle around `p0`.

use foliant::field::{registry_get, Ivp};
use foliant::linalg::Vector;
use foliant::ode::{funnel, integrate_rk4};

fn main() {
    let linear = registry_get("linear-field").unwrap().into_field().unwrap();
    let ivp = Ivp::new(linear, Vector::new(vec![0.0, 1.0]).unwrap(), 0.0).unwrap();
    let end = integrate_rk4(&ivp, 1.0, 1e-3).unwrap();
    println!(
        "z'=(1,z2) from (0,1): z(1) = {} (e = {})",
        end.terminal(),
        1f64.exp()
    );
    let r = &funnel(&ivp, &[1e-3], 1.0, 1e-3, 8, 0).unwrap()[0];
    println!(
        "diameter at t=1: {:.6e}, 2 eps e = {:.6e}",
        r.final_diameter,
        2e-3 * 1f64.exp()
    );

    let parabola = registry_get("parabola-field")
        .unwrap()
        .into_field()
        .unwrap();
    let ivp = Ivp::new(parabola, Vector::new(vec![0.0, 0.0]).unwrap(), 0.0).unwrap();
    for r in funnel(&ivp, &[1e-2, 1e-3, 1e-4, 1e-5], 0.5, 1e-4, 8, 0).unwrap() {
        println!(
            "eps {:.0e}: final diameter {:.4e} ({:.3} eps)",
            r.epsilon,
            r.final_diameter,
            r.final_diameter / r.epsilon
        );
    }
}
