//! Metric charts and their text format.
//!
//! A chart file is line oriented; `#` starts a comment and blank lines are
//! ignored. Directives:
//!
//! ```text
//! name <identifier>
//! dimension <n>
//! coordinates <c0> <c1> ... <c(n-1)>
//! param <name> = <number expression>
//! let <name> = <expression>
//! g[i][j] = <expression>            lower triangle i >= j; missing entries are 0
//! region <expr> <op> <expr> [<op> <expr> ...]     op is one of < <= > >=
//! sample <coordinate> <lo> <hi>
//! reference <p0> <p1> ... <p(n-1)>
//! ```
//!
//! `dimension` and `coordinates` must precede the other directives, which may
//! then appear in any order except that names must be defined before use.
//! Expressions use the grammar of [`crate::expr::Parser`]. The sampling box
//! defaults to `[-1, 1]` per coordinate and is always intersected with the
//! region constraints. Errors report 1-based line and column.

use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::expr::{DomainError, Expression, Node, ParseError, Parser};
use crate::tensor::Sym2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChartError {
    #[error("{line}:{column}: {message}")]
    Format {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Expression(#[from] ParseError),
}

impl ChartError {
    pub fn line(&self) -> usize {
        match self {
            ChartError::Format { line, .. } => *line,
            ChartError::Expression(e) => e.line(),
        }
    }

    pub fn column(&self) -> usize {
        match self {
            ChartError::Format { column, .. } => *column,
            ChartError::Expression(e) => e.column(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Comparison {
    Less,
    LessEq,
    Greater,
    GreaterEq,
}

impl Comparison {
    fn symbol(self) -> &'static str {
        match self {
            Comparison::Less => "<",
            Comparison::LessEq => "<=",
            Comparison::Greater => ">",
            Comparison::GreaterEq => ">=",
        }
    }

    fn holds(self, a: f64, b: f64) -> bool {
        match self {
            Comparison::Less => a < b,
            Comparison::LessEq => a <= b,
            Comparison::Greater => a > b,
            Comparison::GreaterEq => a >= b,
        }
    }
}

/// One inequality `lhs op rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub lhs: Expression,
    pub op: Comparison,
    pub rhs: Expression,
}

impl Constraint {
    /// False when either side fails to evaluate.
    pub fn holds(&self, p: &[f64]) -> bool {
        match (self.lhs.eval(p), self.rhs.eval(p)) {
            (Ok(a), Ok(b)) => self.op.holds(a, b),
            _ => false,
        }
    }
}

impl std::fmt::Display for Constraint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op.symbol(), self.rhs)
    }
}

/// A coordinate patch carrying a metric given by component formulas.
#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    name: String,
    coords: Arc<[String]>,
    // lower triangle, (i, j) with i >= j at i(i+1)/2 + j
    components: Vec<Expression>,
    region: Vec<Constraint>,
    sample_box: Vec<(f64, f64)>,
    reference: Option<Vec<f64>>,
}

#[inline]
fn tri(i: usize, j: usize) -> usize {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    i * (i + 1) / 2 + j
}

impl Chart {
    /// `components` lists the lower triangle row by row: `g00, g10, g11, g20, …`.
    pub fn new(
        name: &str,
        coords: Arc<[String]>,
        components: Vec<Expression>,
        region: Vec<Constraint>,
    ) -> Self {
        let n = coords.len();
        assert_eq!(components.len(), n * (n + 1) / 2, "need n(n+1)/2 components");
        Chart {
            name: name.to_string(),
            coords,
            components,
            region,
            sample_box: vec![(-1.0, 1.0); n],
            reference: None,
        }
    }

    pub fn with_sample_box(mut self, sample_box: Vec<(f64, f64)>) -> Self {
        assert_eq!(sample_box.len(), self.dim());
        self.sample_box = sample_box;
        self
    }

    pub fn with_reference(mut self, p: Vec<f64>) -> Self {
        assert_eq!(p.len(), self.dim());
        self.reference = Some(p);
        self
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn parse(text: &str) -> Result<Chart, ChartError> {
        parse_chart(text)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &Arc<[String]> {
        &self.coords
    }

    pub fn component(&self, i: usize, j: usize) -> &Expression {
        &self.components[tri(i, j)]
    }

    pub fn components(&self) -> &[Expression] {
        &self.components
    }

    pub fn region(&self) -> &[Constraint] {
        &self.region
    }

    pub fn sample_box(&self) -> &[(f64, f64)] {
        &self.sample_box
    }

    /// A documented interior point, or the centre of the sampling box.
    pub fn reference_point(&self) -> Vec<f64> {
        self.reference.clone().unwrap_or_else(|| {
            self.sample_box
                .iter()
                .map(|(lo, hi)| 0.5 * (lo + hi))
                .collect()
        })
    }

    pub fn in_region(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && p.iter().all(|v| v.is_finite()) && self.region.iter().all(|c| c.holds(p))
    }

    /// First violated constraint, rendered.
    pub fn region_violation(&self, p: &[f64]) -> Option<String> {
        self.region.iter().find(|c| !c.holds(p)).map(|c| c.to_string())
    }

    pub fn metric_value(&self, p: &[f64]) -> Result<Sym2, DomainError> {
        let n = self.dim();
        let mut g = Sym2::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                g.set(i, j, self.component(i, j).eval(p)?);
            }
        }
        Ok(g)
    }

    /// Renders the chart in the file format (parameters appear inlined).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let n = self.dim();
        let _ = writeln!(s, "name {}", self.name);
        let _ = writeln!(s, "dimension {n}");
        let _ = writeln!(s, "coordinates {}", self.coords.join(" "));
        for i in 0..n {
            for j in 0..=i {
                let c = self.component(i, j);
                if c.root().const_value() != Some(0.0) {
                    let _ = writeln!(s, "g[{i}][{j}] = {c}");
                }
            }
        }
        for c in &self.region {
            let _ = writeln!(s, "region {c}");
        }
        for (name, (lo, hi)) in self.coords.iter().zip(&self.sample_box) {
            let _ = writeln!(s, "sample {name} {lo:?} {hi:?}");
        }
        if let Some(p) = &self.reference {
            let p: Vec<String> = p.iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(s, "reference {}", p.join(" "));
        }
        s
    }
}

struct Line<'a> {
    number: usize,
    text: &'a str,
}

impl<'a> Line<'a> {
    fn err(&self, at: &str, message: impl Into<String>) -> ChartError {
        ChartError::Format {
            line: self.number,
            column: self.column_of(at),
            message: message.into(),
        }
    }

    /// 1-based column of `sub`, which must be a subslice of this line.
    fn column_of(&self, sub: &str) -> usize {
        let offset = (sub.as_ptr() as usize).saturating_sub(self.text.as_ptr() as usize);
        self.text[..offset.min(self.text.len())].chars().count() + 1
    }
}

fn split_word(s: &str) -> (&str, &str) {
    let s = s.trim_start();
    match s.find(char::is_whitespace) {
        Some(i) => (&s[..i], &s[i..]),
        None => (s, &s[s.len()..]),
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_chart(text: &str) -> Result<Chart, ChartError> {
    let mut name: Option<String> = None;
    let mut dimension: Option<usize> = None;
    let mut parser: Option<Parser> = None;
    let mut components: Vec<Option<Expression>> = Vec::new();
    let mut region = Vec::new();
    let mut sample_box: Vec<(f64, f64)> = Vec::new();
    let mut reference = None;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_text = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let line = Line {
            number: idx + 1,
            text: raw,
        };
        last_line = idx + 1;
        let trimmed = line_text.trim();
        if trimmed.is_empty() {
            continue;
        }
        let (keyword, rest) = split_word(line_text);

        if keyword == "name" {
            let v = rest.trim();
            if v.is_empty() {
                return Err(line.err(keyword, "`name` needs a value"));
            }
            name = Some(v.to_string());
            continue;
        }
        if keyword == "dimension" {
            let v = rest.trim();
            let n: usize = v
                .parse()
                .ok()
                .filter(|&n| (1..=16).contains(&n))
                .ok_or_else(|| line.err(v, format!("invalid dimension `{v}`")))?;
            dimension = Some(n);
            continue;
        }
        if keyword == "coordinates" {
            let Some(n) = dimension.as_ref() else {
                return Err(line.err(keyword, "`dimension` must come before `coordinates`"));
            };
            if parser.is_some() {
                return Err(line.err(keyword, "coordinates declared twice"));
            }
            let names: Vec<&str> = rest.split_whitespace().collect();
            for nm in &names {
                if !is_identifier(nm) {
                    return Err(line.err(nm, format!("invalid coordinate name `{nm}`")));
                }
                if names.iter().filter(|o| *o == nm).count() > 1 {
                    return Err(line.err(nm, format!("duplicate coordinate `{nm}`")));
                }
            }
            if names.len() != *n {
                return Err(line.err(
                    keyword,
                    format!("expected {n} coordinates, found {}", names.len()),
                ));
            }
            let p = Parser::new(&names);
            for nm in &names {
                if nm == &"pi" || crate::expr::Func::from_name(nm).is_some() {
                    return Err(line.err(nm, format!("`{nm}` is reserved")));
                }
            }
            components = vec![None; n * (n + 1) / 2];
            sample_box = vec![(-1.0, 1.0); *n];
            parser = Some(p);
            continue;
        }

        let Some(p) = parser.as_mut() else {
            return Err(line.err(keyword, "`dimension` and `coordinates` must come first"));
        };
        let n = p.coords().len();

        match keyword {
            "param" | "let" => {
                let Some(eq) = rest.find('=') else {
                    return Err(line.err(keyword, format!("expected `{keyword} <name> = <expression>`")));
                };
                let ident = rest[..eq].trim();
                if !is_identifier(ident) {
                    return Err(line.err(rest.trim_start(), format!("invalid name `{ident}`")));
                }
                if p.is_defined(ident) {
                    return Err(line.err(ident, format!("`{ident}` is already defined")));
                }
                let body = &rest[eq + 1..];
                let col = line.column_of(body) - 1;
                let expr = p.at(line.number, col).parse(body)?;
                if keyword == "param" {
                    let Some(v) = expr.root().const_value() else {
                        return Err(line.err(body.trim_start(), "a parameter must be a constant expression"));
                    };
                    p.define_constant(ident, v);
                } else {
                    p.bind(ident, &expr);
                }
            }
            "region" => {
                let mut sides: Vec<(&str, Option<Comparison>)> = Vec::new();
                let bytes = rest.as_bytes();
                let mut start = 0;
                let mut i = 0;
                while i < bytes.len() {
                    let c = bytes[i];
                    if c == b'<' || c == b'>' {
                        let eq = i + 1 < bytes.len() && bytes[i + 1] == b'=';
                        let op = match (c, eq) {
                            (b'<', false) => Comparison::Less,
                            (b'<', true) => Comparison::LessEq,
                            (b'>', false) => Comparison::Greater,
                            _ => Comparison::GreaterEq,
                        };
                        sides.push((&rest[start..i], Some(op)));
                        i += if eq { 2 } else { 1 };
                        start = i;
                    } else {
                        i += 1;
                    }
                }
                sides.push((&rest[start..], None));
                if sides.len() < 2 {
                    return Err(line.err(keyword, "expected an inequality using <, <=, > or >="));
                }
                let mut exprs = Vec::new();
                for (src, _) in &sides {
                    if src.trim().is_empty() {
                        return Err(line.err(src, "empty side in inequality"));
                    }
                    let col = line.column_of(src) - 1;
                    exprs.push(p.at(line.number, col).parse(src)?);
                }
                for k in 0..sides.len() - 1 {
                    region.push(Constraint {
                        lhs: exprs[k].clone(),
                        op: sides[k].1.expect("operator between sides"),
                        rhs: exprs[k + 1].clone(),
                    });
                }
            }
            "sample" => {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() != 3 {
                    return Err(line.err(keyword, "expected `sample <coordinate> <lo> <hi>`"));
                }
                let Some(axis) = p.coords().iter().position(|c| c == parts[0]) else {
                    return Err(line.err(parts[0], format!("unknown coordinate `{}`", parts[0])));
                };
                let bound = |s: &str| -> Result<f64, ChartError> {
                    let e = p.at(line.number, line.column_of(s) - 1).parse(s)?;
                    e.root()
                        .const_value()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| line.err(s, "sample bounds must be finite constants"))
                };
                let lo = bound(parts[1])?;
                let hi = bound(parts[2])?;
                if !(lo < hi) {
                    return Err(line.err(parts[1], "sample bounds must satisfy lo < hi"));
                }
                sample_box[axis] = (lo, hi);
            }
            "reference" => {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() != n {
                    return Err(line.err(keyword, format!("expected {n} reference coordinates")));
                }
                let mut pt = Vec::with_capacity(n);
                for s in parts {
                    let e = p.at(line.number, line.column_of(s) - 1).parse(s)?;
                    pt.push(
                        e.root()
                            .const_value()
                            .ok_or_else(|| line.err(s, "reference coordinates must be constants"))?,
                    );
                }
                reference = Some((pt, line.number));
            }
            _ if keyword.starts_with("g[") => {
                let full = line_text.trim_start();
                let Some(eq) = full.find('=') else {
                    return Err(line.err(full, "expected `g[i][j] = <expression>`"));
                };
                let lhs: String = full[..eq].chars().filter(|c| !c.is_whitespace()).collect();
                let idx = lhs
                    .strip_prefix("g[")
                    .and_then(|s| s.strip_suffix(']'))
                    .and_then(|s| s.split_once("]["))
                    .and_then(|(a, b)| Some((a.parse::<usize>().ok()?, b.parse::<usize>().ok()?)));
                let Some((i, j)) = idx else {
                    return Err(line.err(full, format!("malformed component `{lhs}`")));
                };
                if i >= n || j >= n {
                    return Err(line.err(full, format!("component index out of range for dimension {n}")));
                }
                let slot = tri(i, j);
                if components[slot].is_some() {
                    return Err(line.err(full, format!("component g[{i}][{j}] given twice")));
                }
                let body = &full[eq + 1..];
                let col = line.column_of(body) - 1;
                components[slot] = Some(p.at(line.number, col).parse(body)?);
            }
            _ => {
                return Err(line.err(keyword, format!("unknown directive `{keyword}`")));
            }
        }
    }

    let eof = |message: &str| ChartError::Format {
        line: last_line.max(1),
        column: 1,
        message: message.to_string(),
    };
    let p = parser.ok_or_else(|| eof("missing `dimension`/`coordinates`"))?;
    if components.iter().all(|c| c.is_none()) {
        return Err(eof("no metric components given"));
    }
    let coords = p.coords().clone();
    let components: Vec<Expression> = components
        .into_iter()
        .map(|c| c.unwrap_or_else(|| Expression::new(Node::Const(0.0), coords.clone())))
        .collect();
    let mut chart = Chart::new(name.as_deref().unwrap_or("unnamed"), coords, components, region)
        .with_sample_box(sample_box);
    if let Some((pt, number)) = reference {
        if !chart.in_region(&pt) {
            return Err(ChartError::Format {
                line: number,
                column: 1,
                message: "reference point lies outside the region".to_string(),
            });
        }
        chart = chart.with_reference(pt);
    }
    Ok(chart)
}
