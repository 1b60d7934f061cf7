//! Parsing, printing and evaluating field components.

use foliant::expr::{parse_expr, parse_in, Scope};

fn main() {
    let e = parse_expr("1 + (z2 - z1^2)^(2/3)", 2).unwrap();
    println!("parsed:   {e}");
    for z in [[0.0, 0.0], [1.0, 1.0], [0.5, -1.0], [2.0, 4.001]] {
        println!("  at {z:?}: {}", e.eval(&z).unwrap());
    }

    let g = parse_in("-2*t + sin(t)^2", Scope::Parameter).unwrap();
    println!("curve:    {g} at t = 0.3 is {:.6}", g.eval(&[0.3]).unwrap());

    for bad in ["z1 +", "z3", "(z1", "sqrt(z1, z2)", "z1^(1/0)"] {
        println!("{bad:>14} -> {}", parse_expr(bad, 2).unwrap_err());
    }

    match parse_expr("(-8)^(1/3) + (-8)^(1/2)", 1)
        .unwrap()
        .eval(&[0.0])
    {
        Ok(v) => println!("unexpected value {v}"),
        Err(e) => println!("even root of a negative: {e}"),
    }
}
