use std::collections::HashMap;
use std::sync::Arc;

use super::ast::{Expression, Func, Node};
use super::ParseError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    /// Next token and its starting byte offset.
    fn next(&mut self) -> Result<(Tok, usize), (usize, String)> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[self.pos..];
        let Some(c) = rest.chars().next() else {
            return Ok((Tok::End, start));
        };
        if c.is_ascii_digit() || (c == '.' && rest[1..].starts_with(|d: char| d.is_ascii_digit())) {
            let bytes = rest.as_bytes();
            let mut i = 0;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &rest[..i];
            let value: f64 = text
                .parse()
                .map_err(|_| (start, format!("malformed number `{text}`")))?;
            self.pos += i;
            return Ok((Tok::Num(value), start));
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let len = rest
                .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                .unwrap_or(rest.len());
            self.pos += len;
            return Ok((Tok::Ident(rest[..len].to_string()), start));
        }
        if "+-*/^()".contains(c) {
            self.pos += 1;
            return Ok((Tok::Op(c), start));
        }
        Err((start, format!("unexpected character `{c}`")))
    }
}

/// Recursive-descent parser for metric component formulas.
///
/// Grammar, loosest binding first:
///
/// ```text
/// expr    := term (('+' | '-') term)*
/// term    := unary (('*' | '/') unary)*
/// unary   := ('-' | '+') unary | power
/// power   := primary ('^' unary)?        exponent must fold to an integer
/// primary := number | name | func '(' expr ')' | '(' expr ')'
/// ```
///
/// Names resolve to coordinates first, then to named constants (`pi` is
/// predefined), then to bound subexpressions.
#[derive(Clone, Debug)]
pub struct Parser {
    coords: Arc<[String]>,
    constants: HashMap<String, f64>,
    bindings: HashMap<String, Node>,
    line: usize,
    column_offset: usize,
}

struct State<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    tok_pos: usize,
}

impl Parser {
    pub fn new<S: AsRef<str>>(coords: &[S]) -> Self {
        let coords: Arc<[String]> = coords.iter().map(|s| s.as_ref().to_string()).collect();
        let mut constants = HashMap::new();
        constants.insert("pi".to_string(), std::f64::consts::PI);
        Parser {
            coords,
            constants,
            bindings: HashMap::new(),
            line: 1,
            column_offset: 0,
        }
    }

    pub fn coords(&self) -> &Arc<[String]> {
        &self.coords
    }

    pub fn define_constant(&mut self, name: &str, value: f64) {
        self.constants.insert(name.to_string(), value);
    }

    pub fn bind(&mut self, name: &str, expr: &Expression) {
        self.bindings.insert(name.to_string(), expr.root().clone());
    }

    pub fn is_defined(&self, name: &str) -> bool {
        self.coords.iter().any(|c| c == name)
            || self.constants.contains_key(name)
            || self.bindings.contains_key(name)
            || Func::from_name(name).is_some()
    }

    /// Report positions relative to `line` and shifted by `column_offset`.
    pub fn at(&self, line: usize, column_offset: usize) -> Self {
        let mut p = self.clone();
        p.line = line;
        p.column_offset = column_offset;
        p
    }

    fn error(&self, src: &str, pos: usize, message: String) -> ParseError {
        let (line, column) = self.locate(src, pos);
        ParseError::Syntax {
            line,
            column,
            message,
        }
    }

    fn locate(&self, src: &str, pos: usize) -> (usize, usize) {
        let before = &src[..pos.min(src.len())];
        let newlines = before.matches('\n').count();
        let col = before.rfind('\n').map_or(before.chars().count(), |i| {
            before[i + 1..].chars().count()
        });
        if newlines == 0 {
            (self.line, self.column_offset + col + 1)
        } else {
            (self.line + newlines, col + 1)
        }
    }

    pub fn parse(&self, src: &str) -> Result<Expression, ParseError> {
        let mut st = State {
            lexer: Lexer { src, pos: 0 },
            tok: Tok::End,
            tok_pos: 0,
        };
        self.advance(src, &mut st)?;
        let node = self.expr(src, &mut st)?;
        if st.tok != Tok::End {
            return Err(self.error(src, st.tok_pos, format!("unexpected {}", describe(&st.tok))));
        }
        Ok(Expression::new(node, self.coords.clone()))
    }

    fn advance(&self, src: &str, st: &mut State) -> Result<(), ParseError> {
        let (tok, pos) = st
            .lexer
            .next()
            .map_err(|(pos, msg)| self.error(src, pos, msg))?;
        st.tok = tok;
        st.tok_pos = pos;
        Ok(())
    }

    fn expr(&self, src: &str, st: &mut State) -> Result<Node, ParseError> {
        let mut lhs = self.term(src, st)?;
        loop {
            match st.tok {
                Tok::Op('+') => {
                    self.advance(src, st)?;
                    lhs = Node::add(lhs, self.term(src, st)?);
                }
                Tok::Op('-') => {
                    self.advance(src, st)?;
                    lhs = Node::sub(lhs, self.term(src, st)?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&self, src: &str, st: &mut State) -> Result<Node, ParseError> {
        let mut lhs = self.unary(src, st)?;
        loop {
            match st.tok {
                Tok::Op('*') => {
                    self.advance(src, st)?;
                    lhs = Node::mul(lhs, self.unary(src, st)?);
                }
                Tok::Op('/') => {
                    self.advance(src, st)?;
                    lhs = Node::div(lhs, self.unary(src, st)?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&self, src: &str, st: &mut State) -> Result<Node, ParseError> {
        match st.tok {
            Tok::Op('-') => {
                self.advance(src, st)?;
                Ok(Node::neg(self.unary(src, st)?))
            }
            Tok::Op('+') => {
                self.advance(src, st)?;
                self.unary(src, st)
            }
            _ => self.power(src, st),
        }
    }

    fn power(&self, src: &str, st: &mut State) -> Result<Node, ParseError> {
        let base = self.primary(src, st)?;
        if st.tok != Tok::Op('^') {
            return Ok(base);
        }
        self.advance(src, st)?;
        let exp_pos = st.tok_pos;
        let exponent = self.unary(src, st)?;
        match exponent.const_value() {
            Some(v) if v.fract() == 0.0 && v.abs() <= 64.0 => Ok(Node::pow(base, v as i32)),
            _ => Err(self.error(
                src,
                exp_pos,
                "exponent must be an integer constant between -64 and 64".to_string(),
            )),
        }
    }

    fn primary(&self, src: &str, st: &mut State) -> Result<Node, ParseError> {
        let pos = st.tok_pos;
        match st.tok.clone() {
            Tok::Num(v) => {
                self.advance(src, st)?;
                Ok(Node::Const(v))
            }
            Tok::Op('(') => {
                self.advance(src, st)?;
                let inner = self.expr(src, st)?;
                self.expect_close(src, st, pos)?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.advance(src, st)?;
                if let Some(i) = self.coords.iter().position(|c| *c == name) {
                    return Ok(Node::Var(i));
                }
                if let Some(&v) = self.constants.get(&name) {
                    return Ok(Node::Const(v));
                }
                if let Some(node) = self.bindings.get(&name) {
                    return Ok(node.clone());
                }
                if let Some(func) = Func::from_name(&name) {
                    if st.tok != Tok::Op('(') {
                        return Err(self.error(
                            src,
                            st.tok_pos,
                            format!("expected `(` after function `{name}`"),
                        ));
                    }
                    let open = st.tok_pos;
                    self.advance(src, st)?;
                    let arg = self.expr(src, st)?;
                    self.expect_close(src, st, open)?;
                    return Ok(Node::call(func, arg));
                }
                let (line, column) = self.locate(src, pos);
                Err(ParseError::UnknownIdentifier { name, line, column })
            }
            other => Err(self.error(src, pos, format!("expected a value, found {}", describe(&other)))),
        }
    }

    fn expect_close(&self, src: &str, st: &mut State, open: usize) -> Result<(), ParseError> {
        if st.tok == Tok::Op(')') {
            self.advance(src, st)
        } else {
            let (line, column) = self.locate(src, open);
            Err(self.error(
                src,
                st.tok_pos,
                format!(
                    "expected `)` to close `(` at {line}:{column}, found {}",
                    describe(&st.tok)
                ),
            ))
        }
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Op(c) => format!("`{c}`"),
        Tok::End => "end of input".to_string(),
    }
}
