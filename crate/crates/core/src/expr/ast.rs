use std::fmt;
use std::sync::Arc;

use super::jet::{series, TaylorJet};
use super::DomainError;

/// Elementary functions accepted by the parser.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Sinh,
    Cosh,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Const(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, i32),
    Call(Func, Box<Node>),
}

impl Node {
    pub fn add(a: Node, b: Node) -> Node {
        Node::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Node, b: Node) -> Node {
        Node::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Node, b: Node) -> Node {
        Node::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Node, b: Node) -> Node {
        Node::Div(Box::new(a), Box::new(b))
    }

    pub fn pow(a: Node, p: i32) -> Node {
        Node::Pow(Box::new(a), p)
    }

    pub fn neg(a: Node) -> Node {
        Node::Neg(Box::new(a))
    }

    pub fn call(f: Func, a: Node) -> Node {
        Node::Call(f, Box::new(a))
    }

    /// Value if the subtree contains no variables.
    pub fn const_value(&self) -> Option<f64> {
        match self {
            Node::Const(c) => Some(*c),
            Node::Var(_) => None,
            Node::Neg(a) => a.const_value().map(|v| -v),
            Node::Add(a, b) => Some(a.const_value()? + b.const_value()?),
            Node::Sub(a, b) => Some(a.const_value()? - b.const_value()?),
            Node::Mul(a, b) => Some(a.const_value()? * b.const_value()?),
            Node::Div(a, b) => Some(a.const_value()? / b.const_value()?),
            Node::Pow(a, p) => Some(a.const_value()?.powi(*p)),
            Node::Call(f, a) => {
                let v = a.const_value()?;
                Some(match f {
                    Func::Exp => v.exp(),
                    Func::Log => v.ln(),
                    Func::Sqrt => v.sqrt(),
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Sinh => v.sinh(),
                    Func::Cosh => v.cosh(),
                })
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Node::Add(..) | Node::Sub(..) => 1,
            Node::Mul(..) | Node::Div(..) => 2,
            Node::Neg(..) => 3,
            Node::Pow(..) => 4,
            Node::Const(c) if *c < 0.0 => 3,
            _ => 5,
        }
    }
}

/// A parsed scalar formula over a fixed list of coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Expression {
    root: Node,
    coords: Arc<[String]>,
}

fn write_node(f: &mut fmt::Formatter<'_>, node: &Node, coords: &[String]) -> fmt::Result {
    let wrap = |f: &mut fmt::Formatter<'_>, n: &Node, min: u8| -> fmt::Result {
        if n.precedence() < min {
            write!(f, "(")?;
            write_node(f, n, coords)?;
            write!(f, ")")
        } else {
            write_node(f, n, coords)
        }
    };
    match node {
        Node::Const(c) => write!(f, "{c:?}"),
        Node::Var(i) => write!(f, "{}", coords[*i]),
        Node::Neg(a) => {
            write!(f, "-")?;
            wrap(f, a, 4)
        }
        Node::Add(a, b) => {
            wrap(f, a, 1)?;
            write!(f, " + ")?;
            wrap(f, b, 2)
        }
        Node::Sub(a, b) => {
            wrap(f, a, 1)?;
            write!(f, " - ")?;
            wrap(f, b, 2)
        }
        Node::Mul(a, b) => {
            wrap(f, a, 2)?;
            write!(f, "*")?;
            wrap(f, b, 3)
        }
        Node::Div(a, b) => {
            wrap(f, a, 2)?;
            write!(f, "/")?;
            wrap(f, b, 3)
        }
        Node::Pow(a, p) => {
            wrap(f, a, 5)?;
            if *p < 0 {
                write!(f, "^({p})")
            } else {
                write!(f, "^{p}")
            }
        }
        Node::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_node(f, a, coords)?;
            write!(f, ")")
        }
    }
}

struct Shown<'a> {
    node: &'a Node,
    coords: &'a [String],
}

impl fmt::Display for Shown<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, self.node, self.coords)
    }
}

impl<'a> Shown<'a> {
    fn of(node: &'a Node, coords: &'a [String]) -> Self {
        Shown { node, coords }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Shown::of(&self.root, &self.coords))
    }
}

impl Expression {
    pub fn new(root: Node, coords: Arc<[String]>) -> Self {
        Expression { root, coords }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn coords(&self) -> &Arc<[String]> {
        &self.coords
    }

    pub fn nvars(&self) -> usize {
        self.coords.len()
    }

    fn show(&self, node: &Node) -> String {
        Shown::of(node, &self.coords).to_string()
    }

    /// Plain double-precision evaluation.
    pub fn eval(&self, x: &[f64]) -> Result<f64, DomainError> {
        assert_eq!(x.len(), self.nvars(), "point dimension mismatch");
        self.eval_node(&self.root, x)
    }

    fn eval_node(&self, node: &Node, x: &[f64]) -> Result<f64, DomainError> {
        Ok(match node {
            Node::Const(c) => *c,
            Node::Var(i) => x[*i],
            Node::Neg(a) => -self.eval_node(a, x)?,
            Node::Add(a, b) => self.eval_node(a, x)? + self.eval_node(b, x)?,
            Node::Sub(a, b) => self.eval_node(a, x)? - self.eval_node(b, x)?,
            Node::Mul(a, b) => self.eval_node(a, x)? * self.eval_node(b, x)?,
            Node::Div(a, b) => {
                let den = self.eval_node(b, x)?;
                if den == 0.0 {
                    return Err(DomainError::division_by_zero(self.show(b)));
                }
                self.eval_node(a, x)? / den
            }
            Node::Pow(a, p) => {
                let v = self.eval_node(a, x)?;
                if v == 0.0 && *p < 0 {
                    return Err(DomainError::division_by_zero(self.show(a)));
                }
                v.powi(*p)
            }
            Node::Call(f, a) => {
                let v = self.eval_node(a, x)?;
                match f {
                    Func::Exp => v.exp(),
                    Func::Log if v <= 0.0 => {
                        return Err(DomainError::log_non_positive(self.show(a), v))
                    }
                    Func::Log => v.ln(),
                    Func::Sqrt if v < 0.0 => {
                        return Err(DomainError::sqrt_negative(self.show(a), v))
                    }
                    Func::Sqrt => v.sqrt(),
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Sinh => v.sinh(),
                    Func::Cosh => v.cosh(),
                }
            }
        })
    }

    /// Taylor jet of order `k` at `p`, propagated exactly through the AST.
    pub fn evaluate_jet(&self, p: &[f64], k: usize) -> Result<TaylorJet, DomainError> {
        let point: Arc<[f64]> = Arc::from(p.to_vec());
        self.evaluate_jet_at(&point, k)
    }

    /// As [`Expression::evaluate_jet`], sharing an already-allocated base point.
    pub fn evaluate_jet_at(&self, point: &Arc<[f64]>, k: usize) -> Result<TaylorJet, DomainError> {
        assert_eq!(point.len(), self.nvars(), "point dimension mismatch");
        self.jet_node(&self.root, point, k)
    }

    fn jet_node(&self, node: &Node, p: &Arc<[f64]>, k: usize) -> Result<TaylorJet, DomainError> {
        Ok(match node {
            Node::Const(c) => TaylorJet::constant(p.clone(), k, *c),
            Node::Var(i) => TaylorJet::variable(p.clone(), k, *i),
            Node::Neg(a) => self.jet_node(a, p, k)?.neg(),
            Node::Add(a, b) => self.jet_node(a, p, k)?.add(&self.jet_node(b, p, k)?),
            Node::Sub(a, b) => self.jet_node(a, p, k)?.sub(&self.jet_node(b, p, k)?),
            Node::Mul(a, b) => {
                // constant factors are common in polynomial charts
                if let Some(c) = a.const_value() {
                    self.jet_node(b, p, k)?.scale(c)
                } else if let Some(c) = b.const_value() {
                    self.jet_node(a, p, k)?.scale(c)
                } else {
                    self.jet_node(a, p, k)?.mul(&self.jet_node(b, p, k)?)
                }
            }
            Node::Div(a, b) => {
                let den = self.jet_node(b, p, k)?;
                if den.value() == 0.0 {
                    return Err(DomainError::division_by_zero(self.show(b)));
                }
                let inv = den.compose(&series::recip(den.value(), k));
                self.jet_node(a, p, k)?.mul(&inv)
            }
            Node::Pow(a, e) => {
                let base = self.jet_node(a, p, k)?;
                if *e >= 0 {
                    base.powu(*e as u32)
                } else {
                    if base.value() == 0.0 {
                        return Err(DomainError::division_by_zero(self.show(a)));
                    }
                    base.compose(&series::power(base.value(), *e as f64, k))
                }
            }
            Node::Call(f, a) => {
                let inner = self.jet_node(a, p, k)?;
                let v = inner.value();
                let coeffs = match f {
                    Func::Exp => series::exp(v, k),
                    Func::Log => {
                        if v <= 0.0 {
                            return Err(DomainError::log_non_positive(self.show(a), v));
                        }
                        series::ln(v, k)
                    }
                    Func::Sqrt => {
                        if v <= 0.0 {
                            return Err(DomainError::sqrt_non_smooth(self.show(a), v));
                        }
                        series::power(v, 0.5, k)
                    }
                    Func::Sin => series::sin(v, k),
                    Func::Cos => series::cos(v, k),
                    Func::Sinh => series::sinh(v, k),
                    Func::Cosh => series::cosh(v, k),
                };
                inner.compose(&coeffs)
            }
        })
    }
}
