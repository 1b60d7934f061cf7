use super::lexer::{tokenize, Tok, Token};
use super::{BinOp, Expr, ExprError, Func, Node, Scope, MAX_DEPTH};

const ADD_BP: (u8, u8) = (10, 11);
const MUL_BP: (u8, u8) = (20, 21);
const NEG_BP: u8 = 25;
const POW_BP: (u8, u8) = (31, 30);

/// Integer literals usable as exponents stay well inside `i64`.
const MAX_EXPONENT_LITERAL: f64 = 1e9;

pub(super) fn parse(text: &str, scope: Scope) -> Result<Expr, ExprError> {
    if let Some(pos) = text.bytes().position(|b| !b.is_ascii()) {
        return Err(ExprError::NonAscii { pos });
    }
    if text.trim().is_empty() {
        return Err(ExprError::Empty);
    }
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        at: 0,
        scope,
    };
    let (root, _) = p.expr(0, 1)?;
    let end = p.peek();
    match end.tok {
        Tok::Eof => Ok(Expr { root, scope }),
        Tok::RParen => Err(ExprError::UnbalancedParen { pos: end.pos }),
        _ => Err(unexpected(end)),
    }
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    scope: Scope,
}

fn unexpected(t: &Token) -> ExprError {
    let found = match &t.tok {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("identifier {s:?}"),
        Tok::Plus => "'+'".into(),
        Tok::Minus => "'-'".into(),
        Tok::Star => "'*'".into(),
        Tok::Slash => "'/'".into(),
        Tok::Caret => "'^'".into(),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::Comma => "','".into(),
        Tok::Eof => return ExprError::UnexpectedEnd { pos: t.pos },
    };
    ExprError::UnexpectedToken { pos: t.pos, found }
}

fn too_deep() -> ExprError {
    ExprError::TooDeep { limit: MAX_DEPTH }
}

/// `Some((p, q))` when the node is an integer literal, a negated one, or a
/// quotient of such; `q` may be zero or negative.
fn rational_literal(node: &Node) -> Option<(i64, i64)> {
    fn int(node: &Node) -> Option<i64> {
        match node {
            Node::Num(v) if v.fract() == 0.0 && *v <= MAX_EXPONENT_LITERAL => Some(*v as i64),
            Node::Neg(inner) => int(inner).map(|k| -k),
            _ => None,
        }
    }
    match node {
        Node::Bin(BinOp::Div, a, b) => Some((int(a)?, int(b)?)),
        other => int(other).map(|k| (k, 1)),
    }
}

fn rational_pow(base: Node, p: i64, q: i64, pos: usize) -> Result<Node, ExprError> {
    if q == 0 {
        return Err(ExprError::ZeroDenominator { pos });
    }
    let (p, q) = if q < 0 { (-p, -q) } else { (p, q) };
    Ok(Node::PowRational {
        base: Box::new(base),
        p,
        q,
    })
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if !matches!(t.tok, Tok::Eof) {
            self.at += 1;
        }
        t
    }

    /// Parses an expression whose operators bind at least `min_bp`.
    /// `depth` counts enclosing nodes and parentheses; results come with
    /// their height.
    fn expr(&mut self, min_bp: u8, depth: usize) -> Result<(Node, usize), ExprError> {
        if depth > MAX_DEPTH {
            return Err(too_deep());
        }
        let (mut lhs, mut height) = self.prefix(depth)?;
        loop {
            let op = self.peek().clone();
            let (l_bp, r_bp) = match op.tok {
                Tok::Plus | Tok::Minus => ADD_BP,
                Tok::Star | Tok::Slash => MUL_BP,
                Tok::Caret => POW_BP,
                Tok::RParen | Tok::Comma | Tok::Eof => break,
                _ => return Err(unexpected(&op)),
            };
            if l_bp < min_bp {
                break;
            }
            self.bump();
            let (rhs, rh) = self.expr(r_bp, depth + 1)?;
            height = 1 + height.max(rh);
            if depth + height - 1 > MAX_DEPTH {
                return Err(too_deep());
            }
            lhs = match op.tok {
                Tok::Plus => Node::Bin(BinOp::Add, Box::new(lhs), Box::new(rhs)),
                Tok::Minus => Node::Bin(BinOp::Sub, Box::new(lhs), Box::new(rhs)),
                Tok::Star => Node::Bin(BinOp::Mul, Box::new(lhs), Box::new(rhs)),
                Tok::Slash => Node::Bin(BinOp::Div, Box::new(lhs), Box::new(rhs)),
                _ => match rational_literal(&rhs) {
                    Some((p, q)) => rational_pow(lhs, p, q, op.pos)?,
                    None => Node::PowReal(Box::new(lhs), Box::new(rhs)),
                },
            };
        }
        Ok((lhs, height))
    }

    fn prefix(&mut self, depth: usize) -> Result<(Node, usize), ExprError> {
        let t = self.bump();
        match t.tok {
            Tok::Num(v) => Ok((Node::Num(v), 1)),
            Tok::Minus => {
                let (inner, h) = self.expr(NEG_BP, depth + 1)?;
                Ok((Node::Neg(Box::new(inner)), h + 1))
            }
            Tok::LParen => {
                let (inner, h) = self.expr(0, depth + 1)?;
                self.close(t.pos)?;
                Ok((inner, h))
            }
            Tok::RParen => Err(ExprError::UnbalancedParen { pos: t.pos }),
            Tok::Ident(name) => {
                if matches!(self.peek().tok, Tok::LParen) {
                    self.call(&name, t.pos, depth)
                } else {
                    self.variable(&name, t.pos).map(|n| (n, 1))
                }
            }
            _ => Err(unexpected(&t)),
        }
    }

    fn close(&mut self, open: usize) -> Result<(), ExprError> {
        let t = self.bump();
        match t.tok {
            Tok::RParen => Ok(()),
            Tok::Eof => Err(ExprError::UnbalancedParen { pos: open }),
            _ => Err(unexpected(&t)),
        }
    }

    fn variable(&self, name: &str, pos: usize) -> Result<Node, ExprError> {
        match self.scope.resolve(name) {
            Ok(Some(slot)) => Ok(Node::Var(slot)),
            Ok(None) => Err(ExprError::UnknownIdentifier {
                pos,
                name: name.to_string(),
            }),
            Err(()) => Err(ExprError::VariableOutOfRange {
                pos,
                name: name.to_string(),
                dim: self.scope.dim(),
            }),
        }
    }

    fn call(&mut self, name: &str, pos: usize, depth: usize) -> Result<(Node, usize), ExprError> {
        let open = self.bump().pos;
        if name == "pow" {
            let (base, h) = self.expr(0, depth + 1)?;
            let p = self.integer_argument(name, pos)?;
            let q = self.integer_argument(name, pos)?;
            self.close(open)?;
            return Ok((rational_pow(base, p, q, pos)?, h + 1));
        }
        let Some(func) = Func::from_name(name) else {
            return Err(ExprError::UnknownIdentifier {
                pos,
                name: name.to_string(),
            });
        };
        let (arg, h) = self.expr(0, depth + 1)?;
        if matches!(self.peek().tok, Tok::Comma) {
            let mut found = 1;
            while matches!(self.peek().tok, Tok::Comma) {
                self.bump();
                self.expr(0, depth + 1)?;
                found += 1;
            }
            return Err(ExprError::Arity {
                pos,
                name: name.to_string(),
                expected: 1,
                found,
            });
        }
        self.close(open)?;
        Ok((Node::Call(func, Box::new(arg)), h + 1))
    }

    fn integer_argument(&mut self, name: &str, call_pos: usize) -> Result<i64, ExprError> {
        let comma = self.bump();
        match comma.tok {
            Tok::Comma => {}
            Tok::RParen => {
                return Err(ExprError::Arity {
                    pos: call_pos,
                    name: name.to_string(),
                    expected: 3,
                    found: 1,
                })
            }
            _ => return Err(unexpected(&comma)),
        }
        let mut t = self.bump();
        let negative = matches!(t.tok, Tok::Minus);
        if negative {
            t = self.bump();
        }
        match t.tok {
            Tok::Num(v) if v.fract() == 0.0 && v <= MAX_EXPONENT_LITERAL => {
                Ok(if negative { -(v as i64) } else { v as i64 })
            }
            Tok::Eof => Err(ExprError::UnexpectedEnd { pos: t.pos }),
            _ => Err(ExprError::ExpectedInteger { pos: t.pos }),
        }
    }
}
