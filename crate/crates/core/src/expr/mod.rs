//! Metric component formulas: parsing, plain evaluation, and exact
//! truncated-Taylor evaluation of all partial derivatives up to a given order.

mod ast;
pub mod jet;
mod parser;

use thiserror::Error;

pub use ast::{Expression, Func, Node};
pub use jet::{binomial, multi_factorial, JetLayout, TaylorJet};
pub use parser::Parser;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: unknown identifier `{name}`")]
    UnknownIdentifier {
        name: String,
        line: usize,
        column: usize,
    },
}

impl ParseError {
    pub fn line(&self) -> usize {
        match self {
            ParseError::Syntax { line, .. } | ParseError::UnknownIdentifier { line, .. } => *line,
        }
    }

    pub fn column(&self) -> usize {
        match self {
            ParseError::Syntax { column, .. } | ParseError::UnknownIdentifier { column, .. } => {
                *column
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainErrorKind {
    DivisionByZero,
    LogNonPositive,
    SqrtNegative,
    SqrtNotSmooth,
}

/// Evaluation left the smooth domain of a subexpression.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}: `{subexpression}`{}", describe_kind(*.kind), value_suffix(*.value))]
pub struct DomainError {
    pub kind: DomainErrorKind,
    pub subexpression: String,
    pub value: Option<f64>,
}

fn describe_kind(kind: DomainErrorKind) -> &'static str {
    match kind {
        DomainErrorKind::DivisionByZero => "division by zero",
        DomainErrorKind::LogNonPositive => "log of non-positive value",
        DomainErrorKind::SqrtNegative => "sqrt of negative value",
        DomainErrorKind::SqrtNotSmooth => "sqrt is not smooth at non-positive value",
    }
}

fn value_suffix(v: Option<f64>) -> String {
    v.map(|v| format!(" evaluates to {v}")).unwrap_or_default()
}

impl DomainError {
    pub(crate) fn division_by_zero(sub: String) -> Self {
        DomainError {
            kind: DomainErrorKind::DivisionByZero,
            subexpression: sub,
            value: Some(0.0),
        }
    }

    pub(crate) fn log_non_positive(sub: String, v: f64) -> Self {
        DomainError {
            kind: DomainErrorKind::LogNonPositive,
            subexpression: sub,
            value: Some(v),
        }
    }

    pub(crate) fn sqrt_negative(sub: String, v: f64) -> Self {
        DomainError {
            kind: DomainErrorKind::SqrtNegative,
            subexpression: sub,
            value: Some(v),
        }
    }

    pub(crate) fn sqrt_non_smooth(sub: String, v: f64) -> Self {
        DomainError {
            kind: DomainErrorKind::SqrtNotSmooth,
            subexpression: sub,
            value: Some(v),
        }
    }
}

/// Parse `text` over the coordinates `coords`.
pub fn parse<S: AsRef<str>>(text: &str, coords: &[S]) -> Result<Expression, ParseError> {
    Parser::new(coords).parse(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TXYZ: [&str; 4] = ["t", "x", "y", "z"];

    #[test]
    fn polynomial_value() {
        let e = parse("t^2 + 2*x", &TXYZ).unwrap();
        assert!(matches!(e.root(), Node::Add(..)));
        assert_eq!(e.eval(&[1.0, 1.0, 0.0, 0.0]).unwrap(), 3.0);
    }

    #[test]
    fn unknown_identifier() {
        let err = parse("1 - 2*m/r", &["t", "r", "th", "ph"]).unwrap_err();
        match err {
            ParseError::UnknownIdentifier { name, column, .. } => {
                assert_eq!(name, "m");
                assert_eq!(column, 7);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn double_angle() {
        let e = parse("sin(x)*cos(x)", &TXYZ).unwrap();
        let v = e.eval(&[0.0, 0.3, 0.0, 0.0]).unwrap();
        assert!((v - 0.5 * (0.6f64).sin()).abs() < 1e-14);
    }

    #[test]
    fn precedence() {
        let c = ["x"];
        let at = |s: &str, x: f64| parse(s, &c).unwrap().eval(&[x]).unwrap();
        assert_eq!(at("-x^2", 3.0), -9.0);
        assert_eq!(at("2^3^2", 0.0), 512.0);
        assert_eq!(at("1 - 2 - 3", 0.0), -4.0);
        assert_eq!(at("8/4/2", 0.0), 1.0);
        assert_eq!(at("x^-2", 2.0), 0.25);
        assert_eq!(at("2*-x", 2.0), -4.0);
        assert_eq!(at("(1+x)*(1-x)", 3.0), -8.0);
        assert_eq!(at("1.5e1 + .5", 0.0), 15.5);
    }

    #[test]
    fn syntax_errors_carry_position() {
        let c = ["x"];
        let e = parse("x + * 2", &c).unwrap_err();
        assert!(matches!(e, ParseError::Syntax { column: 5, .. }), "{e:?}");
        let e = parse("sin x", &c).unwrap_err();
        assert!(matches!(e, ParseError::Syntax { .. }));
        let e = parse("(x + 1", &c).unwrap_err();
        assert!(matches!(e, ParseError::Syntax { column: 7, .. }), "{e:?}");
        let e = parse("x^1.5", &c).unwrap_err();
        assert!(matches!(e, ParseError::Syntax { column: 3, .. }), "{e:?}");
        let e = parse("x $ 1", &c).unwrap_err();
        assert!(matches!(e, ParseError::Syntax { column: 3, .. }), "{e:?}");
    }

    #[test]
    fn display_round_trips() {
        let c = ["x", "y"];
        for s in [
            "-x^2 + y*(x - 1)/(y + 2)",
            "exp(-x)*sqrt(1 + y^2) - (x - y) - x^(-2)",
            "(-2)^3 + -(x*y)",
            "x/(y*x)",
        ] {
            let e = parse(s, &c).unwrap();
            let again = parse(&e.to_string(), &c).unwrap();
            assert_eq!(e, again, "{s} -> {e}");
        }
    }

    #[test]
    fn cube_jet() {
        let e = parse("x^3", &["x"]).unwrap();
        let j = e.evaluate_jet(&[2.0], 3).unwrap();
        assert_eq!(j.coeffs(), &[8.0, 12.0, 6.0, 1.0]);
    }

    #[test]
    fn exp_jet() {
        let e = parse("exp(x)", &["x"]).unwrap();
        let j = e.evaluate_jet(&[0.0], 4).unwrap();
        let want = [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0];
        for (a, b) in j.coeffs().iter().zip(want) {
            assert!((a - b).abs() < 1e-16);
        }
    }

    #[test]
    fn constant_jet_has_no_higher_terms() {
        let e = parse("3*pi - 2", &TXYZ).unwrap();
        let j = e.evaluate_jet(&[0.1, 0.2, 0.3, 0.4], 3).unwrap();
        assert!((j.value() - (3.0 * std::f64::consts::PI - 2.0)).abs() < 1e-15);
        assert!(j.coeffs()[1..].iter().all(|&c| c == 0.0));
    }

    #[test]
    fn domain_errors() {
        let c = ["x"];
        let e = parse("1/(x - 1)", &c).unwrap();
        let err = e.evaluate_jet(&[1.0], 2).unwrap_err();
        assert_eq!(err.kind, DomainErrorKind::DivisionByZero);
        assert_eq!(err.subexpression, "x - 1.0");
        let e = parse("log(x)", &c).unwrap();
        assert_eq!(
            e.evaluate_jet(&[-1.0], 2).unwrap_err().kind,
            DomainErrorKind::LogNonPositive
        );
        let e = parse("sqrt(x)", &c).unwrap();
        assert_eq!(
            e.evaluate_jet(&[0.0], 2).unwrap_err().kind,
            DomainErrorKind::SqrtNotSmooth
        );
        assert_eq!(e.eval(&[0.0]).unwrap(), 0.0);
        let e = parse("x^(-1)", &c).unwrap();
        assert!(e.evaluate_jet(&[0.0], 1).is_err());
    }

    #[test]
    fn jet_matches_plain_value() {
        let c = ["x", "y"];
        let e = parse("cosh(x)*log(2 + y) + sinh(x*y)/sqrt(3 + x) - cos(y)^2", &c).unwrap();
        let p = [0.4, -0.7];
        let j = e.evaluate_jet(&p, 3).unwrap();
        assert!((j.value() - e.eval(&p).unwrap()).abs() < 1e-14);
    }
}
