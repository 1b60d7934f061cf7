//! A small arithmetic language for scalar components of fields and maps.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr  := expr ('+' | '-') expr
//!        | expr ('*' | '/') expr
//!        | '-' expr
//!        | expr '^' expr            (right associative)
//!        | number | variable | func '(' expr ')' | 'pow(' expr ',' int ',' int ')'
//!        | '(' expr ')'
//! func  := sin | cos | exp | abs | sqrt | cbrt
//! ```
//!
//! An exponent that is an integer literal, or a parenthesised quotient of
//! integer literals such as `^(2/3)`, becomes a rational power with real
//! odd-root semantics: `x^(2/3)` is `cbrt(x)²`, defined for negative `x`.
//! Any other exponent is evaluated as `exp(e·ln x)` and needs `x > 0`.

mod eval;
mod lexer;
mod parser;

use std::fmt;

use thiserror::Error;

pub use eval::{eval_expr, EvalContext, EvalError};

/// Maximum height of a parsed expression tree.
pub const MAX_DEPTH: usize = 256;

/// Parse errors. Positions are byte offsets into the source text.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("empty expression")]
    Empty,
    #[error("non-ASCII character at offset {pos}")]
    NonAscii { pos: usize },
    #[error("unexpected character {ch:?} at offset {pos}")]
    Lex { pos: usize, ch: char },
    #[error("malformed number {literal:?} at offset {pos}")]
    BadNumber { pos: usize, literal: String },
    #[error("unbalanced parenthesis at offset {pos}")]
    UnbalancedParen { pos: usize },
    #[error("unexpected {found} at offset {pos}")]
    UnexpectedToken { pos: usize, found: String },
    #[error("expression ends unexpectedly at offset {pos}")]
    UnexpectedEnd { pos: usize },
    #[error("unknown identifier {name:?} at offset {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("variable {name} at offset {pos} is out of range for dimension {dim}")]
    VariableOutOfRange {
        pos: usize,
        name: String,
        dim: usize,
    },
    #[error("zero denominator in rational exponent at offset {pos}")]
    ZeroDenominator { pos: usize },
    #[error("{name} at offset {pos} takes {expected} argument(s), found {found}")]
    Arity {
        pos: usize,
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("expected an integer literal at offset {pos}")]
    ExpectedInteger { pos: usize },
    #[error("expression nests deeper than {limit}")]
    TooDeep { limit: usize },
}

impl ExprError {
    /// Byte offset of the error, when it has one.
    pub fn pos(&self) -> Option<usize> {
        match self {
            Self::Empty | Self::TooDeep { .. } => None,
            Self::NonAscii { pos }
            | Self::Lex { pos, .. }
            | Self::BadNumber { pos, .. }
            | Self::UnbalancedParen { pos }
            | Self::UnexpectedToken { pos, .. }
            | Self::UnexpectedEnd { pos }
            | Self::UnknownIdentifier { pos, .. }
            | Self::VariableOutOfRange { pos, .. }
            | Self::ZeroDenominator { pos }
            | Self::Arity { pos, .. }
            | Self::ExpectedInteger { pos } => Some(*pos),
        }
    }
}

/// Which variable names an expression may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    /// `z1 .. z{dim}`.
    Ambient { dim: usize },
    /// Foliation coordinates `s, y1 .. y{leaf_dim}`; `s` is slot 0.
    Foliation { leaf_dim: usize },
    /// Leaf coordinates `y1 .. y{dim}`.
    Leaf { dim: usize },
    /// A single curve parameter `t`.
    Parameter,
}

impl Scope {
    /// Number of values an evaluation context must supply.
    pub fn dim(&self) -> usize {
        match *self {
            Scope::Ambient { dim } | Scope::Leaf { dim } => dim,
            Scope::Foliation { leaf_dim } => leaf_dim + 1,
            Scope::Parameter => 1,
        }
    }

    /// `Ok(Some(slot))` for a valid variable, `Ok(None)` for a name this
    /// scope does not know, `Err(())` for a known family with a bad index.
    fn resolve(&self, name: &str) -> Result<Option<usize>, ()> {
        let indexed = |prefix: char, count: usize| -> Result<Option<usize>, ()> {
            let Some(rest) = name.strip_prefix(prefix) else {
                return Ok(None);
            };
            if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
                return Ok(None);
            }
            match rest.parse::<usize>() {
                Ok(k) if k >= 1 && k <= count => Ok(Some(k - 1)),
                _ => Err(()),
            }
        };
        match *self {
            Scope::Ambient { dim } => indexed('z', dim),
            Scope::Leaf { dim } => indexed('y', dim),
            Scope::Foliation { leaf_dim } => {
                if name == "s" {
                    Ok(Some(0))
                } else {
                    Ok(indexed('y', leaf_dim)?.map(|k| k + 1))
                }
            }
            Scope::Parameter => Ok((name == "t").then_some(0)),
        }
    }

    fn name_of(&self, slot: usize) -> String {
        match *self {
            Scope::Ambient { .. } => format!("z{}", slot + 1),
            Scope::Leaf { .. } => format!("y{}", slot + 1),
            Scope::Foliation { .. } if slot == 0 => "s".to_string(),
            Scope::Foliation { .. } => format!("y{slot}"),
            Scope::Parameter => "t".to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Abs,
    Sqrt,
    Cbrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "cbrt" => Func::Cbrt,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Cbrt => "cbrt",
        }
    }

    pub const ALL: [Func; 6] = [
        Func::Sin,
        Func::Cos,
        Func::Exp,
        Func::Abs,
        Func::Sqrt,
        Func::Cbrt,
    ];
}

/// Expression tree. Literals are non-negative; a leading minus is [`Node::Neg`].
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    /// `base^(p/q)` with `q > 0`.
    PowRational {
        base: Box<Node>,
        p: i64,
        q: i64,
    },
    /// `base^exponent` for any other exponent.
    PowReal(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn precedence(&self) -> u8 {
        match self {
            Node::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Node::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Node::Neg(_) => 3,
            Node::PowRational { .. } | Node::PowReal(..) => 4,
            Node::Num(_) | Node::Var(_) | Node::Call(..) => 5,
        }
    }

    /// Height of the tree; a leaf has height 1.
    pub fn height(&self) -> usize {
        match self {
            Node::Num(_) | Node::Var(_) => 1,
            Node::Neg(a) | Node::Call(_, a) | Node::PowRational { base: a, .. } => 1 + a.height(),
            Node::Bin(_, a, b) | Node::PowReal(a, b) => 1 + a.height().max(b.height()),
        }
    }
}

/// A parsed expression together with the scope its variables live in.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    scope: Scope,
}

impl Expr {
    /// Wraps a tree, checking variable slots and height.
    pub fn from_node(root: Node, scope: Scope) -> Result<Self, ExprError> {
        fn max_slot(n: &Node) -> Option<usize> {
            match n {
                Node::Num(_) => None,
                Node::Var(k) => Some(*k),
                Node::Neg(a) | Node::Call(_, a) | Node::PowRational { base: a, .. } => max_slot(a),
                Node::Bin(_, a, b) | Node::PowReal(a, b) => max_slot(a).max(max_slot(b)),
            }
        }
        if root.height() > MAX_DEPTH {
            return Err(ExprError::TooDeep { limit: MAX_DEPTH });
        }
        if let Some(k) = max_slot(&root) {
            if k >= scope.dim() {
                return Err(ExprError::VariableOutOfRange {
                    pos: 0,
                    name: scope.name_of(k),
                    dim: scope.dim(),
                });
            }
        }
        Ok(Self { root, scope })
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn scope(&self) -> Scope {
        self.scope
    }

    /// Evaluates at the given variable values.
    pub fn eval(&self, values: &[f64]) -> Result<f64, EvalError> {
        if values.len() != self.scope.dim() {
            return Err(EvalError::DimensionMismatch {
                expected: self.scope.dim(),
                found: values.len(),
            });
        }
        eval::eval_node(&self.root, values)
    }
}

/// Parses `text` with variables `z1 .. z{dimension}`.
pub fn parse_expr(text: &str, dimension: usize) -> Result<Expr, ExprError> {
    parse_in(text, Scope::Ambient { dim: dimension })
}

/// Parses `text` in an arbitrary variable scope.
pub fn parse_in(text: &str, scope: Scope) -> Result<Expr, ExprError> {
    parser::parse(text, scope)
}

struct Printer<'a> {
    node: &'a Node,
    scope: Scope,
}

impl Printer<'_> {
    fn child<'b>(&self, node: &'b Node) -> Printer<'b> {
        Printer {
            node,
            scope: self.scope,
        }
    }

    fn wrapped(&self, f: &mut fmt::Formatter<'_>, node: &Node, parens: bool) -> fmt::Result {
        if parens {
            write!(f, "({})", self.child(node))
        } else {
            write!(f, "{}", self.child(node))
        }
    }
}

impl fmt::Display for Printer<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node {
            Node::Num(v) => write!(f, "{v}"),
            Node::Var(k) => write!(f, "{}", self.scope.name_of(*k)),
            Node::Neg(a) => {
                write!(f, "-")?;
                self.wrapped(f, a, a.precedence() < 3)
            }
            Node::Bin(op, a, b) => {
                let p = self.node.precedence();
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                };
                self.wrapped(f, a, a.precedence() < p)?;
                write!(f, " {sym} ")?;
                self.wrapped(f, b, b.precedence() <= p)
            }
            Node::PowRational { base, p, q } => {
                self.wrapped(f, base, base.precedence() <= 4)?;
                if *q == 1 && *p >= 0 {
                    write!(f, "^{p}")
                } else if *q == 1 {
                    write!(f, "^({p})")
                } else {
                    write!(f, "^({p}/{q})")
                }
            }
            Node::PowReal(base, e) => {
                self.wrapped(f, base, base.precedence() <= 4)?;
                write!(f, "^")?;
                self.wrapped(f, e, e.precedence() < 4)
            }
            Node::Call(func, a) => write!(f, "{}({})", func.name(), self.child(a)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Printer {
            node: &self.root,
            scope: self.scope,
        }
        .fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(text: &str, dim: usize, values: &[f64]) -> f64 {
        parse_expr(text, dim).unwrap().eval(values).unwrap()
    }

    #[test]
    fn precedence_of_arithmetic() {
        assert_eq!(at("2+3*4", 1, &[0.7]), 14.0);
        assert_eq!(at("-2^2", 1, &[0.0]), -4.0);
        assert!((at("2^3^2", 1, &[0.0]) - 512.0).abs() < 1e-12);
        assert_eq!(at("2^-1*3", 1, &[0.0]), 1.5);
        assert_eq!(at("8/4/2", 1, &[0.0]), 1.0);
        assert_eq!(at("1-2-3", 1, &[0.0]), -4.0);
    }

    #[test]
    fn parabola_component() {
        assert_eq!(at("1 + (z2 - z1^2)^(2/3)", 2, &[0.0, 1.0]), 2.0);
        assert_eq!(at("1 + (z2 - z1^2)^(2/3)", 2, &[1.0, 0.0]), 2.0);
    }

    #[test]
    fn rational_exponent_forms() {
        let e = parse_expr("z1^(2/3)", 1).unwrap();
        assert_eq!(
            e.root(),
            &Node::PowRational {
                base: Box::new(Node::Var(0)),
                p: 2,
                q: 3
            }
        );
        let e = parse_expr("pow(z1, 2, 3)", 1).unwrap();
        assert!(matches!(e.root(), Node::PowRational { p: 2, q: 3, .. }));
        let e = parse_expr("z1^(2/-3)", 1).unwrap();
        assert!(matches!(e.root(), Node::PowRational { p: -2, q: 3, .. }));
        let e = parse_expr("z1^0.5", 1).unwrap();
        assert!(matches!(e.root(), Node::PowReal(..)));
        assert!(matches!(
            parse_expr("z1^(1/0)", 1),
            Err(ExprError::ZeroDenominator { pos: 2 })
        ));
    }

    #[test]
    fn parse_errors() {
        assert_eq!(
            parse_expr("1 + (z2 - z1", 2).unwrap_err(),
            ExprError::UnbalancedParen { pos: 4 }
        );
        assert!(matches!(
            parse_expr("1 + z2)", 2),
            Err(ExprError::UnbalancedParen { pos: 6 })
        ));
        assert!(matches!(parse_expr("", 2), Err(ExprError::Empty)));
        assert!(matches!(parse_expr("   ", 2), Err(ExprError::Empty)));
        assert!(matches!(
            parse_expr("q + 1", 2),
            Err(ExprError::UnknownIdentifier { pos: 0, .. })
        ));
        assert!(matches!(
            parse_expr("z3", 2),
            Err(ExprError::VariableOutOfRange { pos: 0, dim: 2, .. })
        ));
        assert!(matches!(
            parse_expr("z0", 2),
            Err(ExprError::VariableOutOfRange { .. })
        ));
        assert!(matches!(
            parse_expr("2 z1", 2),
            Err(ExprError::UnexpectedToken { pos: 2, .. })
        ));
        assert!(matches!(
            parse_expr("sin(z1, z2)", 2),
            Err(ExprError::Arity { .. })
        ));
        assert!(matches!(
            parse_expr("pow(z1, 0.5, 2)", 2),
            Err(ExprError::ExpectedInteger { .. })
        ));
        assert!(matches!(
            parse_expr("1 +", 2),
            Err(ExprError::UnexpectedEnd { pos: 3 })
        ));
        assert!(matches!(
            parse_expr("z1 ü", 2),
            Err(ExprError::NonAscii { pos: 3 })
        ));
    }

    #[test]
    fn nesting_limit_is_enforced_without_overflowing_the_stack() {
        let deep = "(".repeat(100_000) + "1" + &")".repeat(100_000);
        assert!(matches!(
            parse_expr(&deep, 1),
            Err(ExprError::TooDeep { .. })
        ));
        let chain = vec!["1"; 10_000].join("+");
        assert!(matches!(
            parse_expr(&chain, 1),
            Err(ExprError::TooDeep { .. })
        ));
        let minus = "-".repeat(100_000) + "1";
        assert!(matches!(
            parse_expr(&minus, 1),
            Err(ExprError::TooDeep { .. })
        ));
        let ok = vec!["1"; 200].join("+");
        assert_eq!(at(&ok, 1, &[0.0]), 200.0);
    }

    #[test]
    fn scopes() {
        let e = parse_in("s + 2*y1 - y2", Scope::Foliation { leaf_dim: 2 }).unwrap();
        assert_eq!(e.eval(&[1.0, 2.0, 3.0]).unwrap(), 2.0);
        assert!(parse_in("y3", Scope::Foliation { leaf_dim: 2 }).is_err());
        let e = parse_in("t^2", Scope::Parameter).unwrap();
        assert_eq!(e.eval(&[3.0]).unwrap(), 9.0);
        assert!(parse_in("z1", Scope::Parameter).is_err());
        let e = parse_in("y1*y2", Scope::Leaf { dim: 2 }).unwrap();
        assert_eq!(e.eval(&[3.0, 4.0]).unwrap(), 12.0);
    }

    #[test]
    fn printing_uses_minimal_parentheses() {
        let cases = [
            ("1 + (z2 - z1^2)^(2/3)", "1 + (z2 - z1^2)^(2/3)"),
            ("(1+2)+3", "1 + 2 + 3"),
            ("1+(2+3)", "1 + (2 + 3)"),
            ("-(z1*z2)", "-(z1 * z2)"),
            ("(-z1)^2", "(-z1)^2"),
            ("z1^(-2)", "z1^(-2)"),
            ("(z1^z2)^z1", "(z1^z2)^z1"),
            ("z1^z2^z1", "z1^z2^z1"),
            ("sin(z1)/cbrt(2*z2)", "sin(z1) / cbrt(2 * z2)"),
        ];
        for (src, want) in cases {
            assert_eq!(
                parse_expr(src, 2).unwrap().to_string(),
                want,
                "source {src}"
            );
        }
    }
}
