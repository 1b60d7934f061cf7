use thiserror::Error;

use super::{BinOp, Expr, Func, Node};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("expected {expected} variable value(s), got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("root of even order {q} of negative value {base}")]
    EvenRootOfNegative { base: f64, q: i64 },
    #[error("real power of non-positive base {base}")]
    NonPositiveBase { base: f64 },
    #[error("non-finite intermediate value")]
    NonFinite,
}

/// Variable values for one evaluation.
#[derive(Debug, Clone, Copy)]
pub struct EvalContext<'a> {
    pub values: &'a [f64],
}

impl<'a> EvalContext<'a> {
    pub fn new(values: &'a [f64]) -> Self {
        Self { values }
    }
}

pub fn eval_expr(expr: &Expr, ctx: &EvalContext<'_>) -> Result<f64, EvalError> {
    expr.eval(ctx.values)
}

fn finite(x: f64) -> Result<f64, EvalError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(EvalError::NonFinite)
    }
}

/// `x^(p/q)` for `q > 0`, real-valued for negative `x` when `q` is odd.
pub(crate) fn rational_power(x: f64, p: i64, q: i64) -> Result<f64, EvalError> {
    if x < 0.0 && q % 2 == 0 {
        return Err(EvalError::EvenRootOfNegative { base: x, q });
    }
    if x == 0.0 && p < 0 {
        return Err(EvalError::DivisionByZero);
    }
    let a = x.abs();
    let root = match q {
        1 => a,
        2 => a.sqrt(),
        3 => a.cbrt(),
        _ => a.powf(1.0 / q as f64),
    };
    let magnitude = match i32::try_from(p) {
        Ok(k) => root.powi(k),
        Err(_) => root.powf(p as f64),
    };
    let negative = x < 0.0 && p % 2 != 0;
    finite(if negative { -magnitude } else { magnitude })
}

pub(super) fn eval_node(node: &Node, values: &[f64]) -> Result<f64, EvalError> {
    let v = match node {
        Node::Num(v) => *v,
        Node::Var(k) => values[*k],
        Node::Neg(a) => -eval_node(a, values)?,
        Node::Bin(op, a, b) => {
            let x = eval_node(a, values)?;
            let y = eval_node(b, values)?;
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div if y == 0.0 => return Err(EvalError::DivisionByZero),
                BinOp::Div => x / y,
            }
        }
        Node::PowRational { base, p, q } => rational_power(eval_node(base, values)?, *p, *q)?,
        Node::PowReal(base, e) => {
            let b = eval_node(base, values)?;
            let e = eval_node(e, values)?;
            if b <= 0.0 {
                return Err(EvalError::NonPositiveBase { base: b });
            }
            (e * b.ln()).exp()
        }
        Node::Call(func, a) => {
            let x = eval_node(a, values)?;
            match func {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Exp => x.exp(),
                Func::Abs => x.abs(),
                Func::Sqrt if x < 0.0 => {
                    return Err(EvalError::EvenRootOfNegative { base: x, q: 2 })
                }
                Func::Sqrt => x.sqrt(),
                Func::Cbrt => x.cbrt(),
            }
        }
    };
    finite(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn at(text: &str, values: &[f64]) -> Result<f64, EvalError> {
        parse_expr(text, values.len()).unwrap().eval(values)
    }

    #[test]
    fn odd_roots_of_negatives_are_real() {
        assert_eq!(at("z1^(1/3)", &[-8.0]).unwrap(), -2.0);
        assert_eq!(at("z1^(2/3)", &[-8.0]).unwrap(), 4.0);
        assert_eq!(at("z1^(-1/3)", &[-8.0]).unwrap(), -0.5);
        assert_eq!(at("cbrt(z1)", &[-27.0]).unwrap(), -3.0);
        assert!((at("z1^(3/5)", &[-32.0]).unwrap() + 8.0).abs() < 1e-12);
    }

    #[test]
    fn even_roots_of_negatives_fail() {
        assert_eq!(
            at("z1^(1/2)", &[-4.0]),
            Err(EvalError::EvenRootOfNegative { base: -4.0, q: 2 })
        );
        assert!(matches!(
            at("sqrt(z1)", &[-1.0]),
            Err(EvalError::EvenRootOfNegative { .. })
        ));
        assert_eq!(at("z1^(1/2)", &[4.0]).unwrap(), 2.0);
    }

    #[test]
    fn real_powers_need_positive_bases() {
        assert!((at("z1^0.5", &[4.0]).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(
            at("z1^0.5", &[0.0]),
            Err(EvalError::NonPositiveBase { base: 0.0 })
        );
        assert_eq!(
            at("z1^z1", &[-1.0]),
            Err(EvalError::NonPositiveBase { base: -1.0 })
        );
    }

    #[test]
    fn division_and_overflow() {
        assert_eq!(at("1/z1", &[0.0]), Err(EvalError::DivisionByZero));
        assert_eq!(at("z1^(-1)", &[0.0]), Err(EvalError::DivisionByZero));
        assert_eq!(at("exp(z1)", &[1000.0]), Err(EvalError::NonFinite));
        assert_eq!(at("z1*z1", &[1e200]), Err(EvalError::NonFinite));
    }

    #[test]
    fn functions() {
        assert_eq!(
            at("abs(z1) + cos(0) + sin(0) + exp(0)", &[-2.0]).unwrap(),
            4.0
        );
    }

    #[test]
    fn wrong_number_of_values() {
        let e = parse_expr("z1", 2).unwrap();
        assert_eq!(
            e.eval(&[1.0]),
            Err(EvalError::DimensionMismatch {
                expected: 2,
                found: 1
            })
        );
        assert_eq!(eval_expr(&e, &EvalContext::new(&[3.0, 4.0])).unwrap(), 3.0);
    }
}
