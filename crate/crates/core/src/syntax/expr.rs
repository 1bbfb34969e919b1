// Lexer and recursive-descent parser for expressions such as
// `1/2*u[1; 1]^2 - ustar[1]*C[1; 2] + x[1]`.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary ('*' unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' INT)?
//   primary := INT ('/' INT)? | atom | '(' expr ')'
//   atom    := NAME '[' FAMILY (';' INT*)? ']'

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::algebra::{Generator, GeneratorKind, LocalFunction, MultiIndex, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{column}: syntax error at {found}, expected {expected}")]
    Syntax { line: usize, column: usize, found: String, expected: String },
    #[error("{line}:{column}: {message}")]
    Semantic { line: usize, column: usize, message: String },
}

impl ParseError {
    pub fn position(&self) -> (usize, usize) {
        match self {
            ParseError::Syntax { line, column, .. } | ParseError::Semantic { line, column, .. } => (*line, *column),
        }
    }
}

/// Names that expressions may refer to. Without a scope every name is accepted.
#[derive(Clone, Debug, Default)]
pub struct Scope {
    pub dim: usize,
    pub fields: Vec<String>,
    pub gauge: Vec<String>,
    pub max_jet_order: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Name(String),
    Sym(char),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Name(s) => write!(f, "`{s}`"),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::End => write!(f, "end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    column: usize,
}

fn lex(text: &str, line: usize, first_column: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = first_column + i;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            out.push(Token { tok: Tok::Int(digits.parse().expect("ascii digits")), column });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Name(chars[start..i].iter().collect()), column });
        } else if "[];()+-*/^".contains(c) {
            out.push(Token { tok: Tok::Sym(c), column });
            i += 1;
        } else {
            return Err(ParseError::Syntax {
                line,
                column,
                found: format!("`{c}`"),
                expected: "a number, an atom, an operator or a parenthesis".into(),
            });
        }
    }
    out.push(Token { tok: Tok::End, column: first_column + chars.len() });
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    line: usize,
    scope: Option<&'a Scope>,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax(&self, t: &Token, expected: &str) -> ParseError {
        ParseError::Syntax { line: self.line, column: t.column, found: t.tok.to_string(), expected: expected.into() }
    }

    fn semantic(&self, column: usize, message: String) -> ParseError {
        ParseError::Semantic { line: self.line, column, message }
    }

    fn expect_sym(&mut self, c: char) -> Result<Token, ParseError> {
        let t = self.bump();
        if t.tok == Tok::Sym(c) {
            Ok(t)
        } else {
            Err(self.syntax(&t, &format!("`{c}`")))
        }
    }

    fn expr(&mut self) -> Result<LocalFunction, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Sym('+') => {
                    self.bump();
                    acc += &self.term()?;
                }
                Tok::Sym('-') => {
                    self.bump();
                    acc -= &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<LocalFunction, ParseError> {
        let mut acc = self.unary()?;
        while self.peek().tok == Tok::Sym('*') {
            self.bump();
            acc = &acc * &self.unary()?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<LocalFunction, ParseError> {
        if self.peek().tok == Tok::Sym('-') {
            self.bump();
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<LocalFunction, ParseError> {
        let start = self.peek().column;
        let base = self.primary()?;
        if self.peek().tok != Tok::Sym('^') {
            return Ok(base);
        }
        self.bump();
        let t = self.bump();
        let Tok::Int(n) = &t.tok else { return Err(self.syntax(&t, "a nonnegative integer exponent")) };
        let n: u32 = n.try_into().map_err(|_| self.semantic(t.column, format!("exponent {n} is too large")))?;
        if n > 1 && base.terms().any(|(f, _)| f.iter().any(|(g, _)| g.is_odd())) {
            return Err(self.semantic(start, format!("odd expression `{base}` raised to the power {n}")));
        }
        Ok((0..n).fold(LocalFunction::one(), |acc, _| &acc * &base))
    }

    fn primary(&mut self) -> Result<LocalFunction, ParseError> {
        let t = self.bump();
        match &t.tok {
            Tok::Int(n) => {
                let mut value = Rational::from_integer(n.clone());
                if self.peek().tok == Tok::Sym('/') {
                    self.bump();
                    let d = self.bump();
                    let Tok::Int(den) = &d.tok else { return Err(self.syntax(&d, "a denominator")) };
                    if den.is_zero() {
                        return Err(self.semantic(d.column, "division by zero".into()));
                    }
                    value = Rational::new(n.clone(), den.clone());
                }
                Ok(LocalFunction::constant(value))
            }
            Tok::Name(name) => self.atom(name.clone(), t.column),
            Tok::Sym('(') => {
                let inner = self.expr()?;
                self.expect_sym(')')?;
                Ok(inner)
            }
            _ => Err(self.syntax(&t, "a number, an atom or `(`")),
        }
    }

    fn atom(&mut self, name: String, column: usize) -> Result<LocalFunction, ParseError> {
        let Some(kind) = GeneratorKind::from_atom_name(&name) else {
            return Err(ParseError::Syntax {
                line: self.line,
                column,
                found: format!("`{name}`"),
                expected: "one of `x`, `u`, `ustar`, `C`, `Cstar`".into(),
            });
        };
        self.expect_sym('[')?;
        let fam = self.bump();
        let family = match &fam.tok {
            Tok::Int(n) => n.to_string(),
            Tok::Name(s) => s.clone(),
            _ => return Err(self.syntax(&fam, "a family name")),
        };
        let mut jet = Vec::new();
        if self.peek().tok == Tok::Sym(';') {
            if kind == GeneratorKind::BaseCoordinate {
                return Err(self.semantic(self.peek().column, "base coordinates carry no jet index".into()));
            }
            self.bump();
            while let Tok::Int(i) = &self.peek().tok {
                let col = self.peek().column;
                let i: u16 = i.try_into().map_err(|_| self.semantic(col, format!("index {i} out of range")))?;
                if i == 0 {
                    return Err(self.semantic(col, "spatial indices start at 1".into()));
                }
                if let Some(s) = self.scope {
                    if i as usize > s.dim {
                        return Err(self.semantic(col, format!("index {i} exceeds the dimension {}", s.dim)));
                    }
                }
                jet.push(i);
                self.bump();
            }
        }
        let close = self.peek().clone();
        if close.tok != Tok::Sym(']') {
            let expected = if kind == GeneratorKind::BaseCoordinate { "`]`" } else { "`;`, an index or `]`" };
            return Err(self.syntax(&close, expected));
        }
        self.bump();
        self.check_scope(kind, &family, &jet, fam.column)?;
        if kind == GeneratorKind::BaseCoordinate {
            let i: usize =
                family.parse().map_err(|_| self.semantic(fam.column, format!("x[{family}] needs an integer index")))?;
            if i == 0 {
                return Err(self.semantic(fam.column, "spatial indices start at 1".into()));
            }
            return Ok(LocalFunction::generator(Generator::base(i)));
        }
        Ok(LocalFunction::generator(Generator::new(kind, &family, MultiIndex::new(jet))))
    }

    fn check_scope(&self, kind: GeneratorKind, family: &str, jet: &[u16], column: usize) -> Result<(), ParseError> {
        let Some(s) = self.scope else { return Ok(()) };
        let known = match kind {
            GeneratorKind::BaseCoordinate => family.parse::<usize>().is_ok_and(|i| i <= s.dim),
            GeneratorKind::Field | GeneratorKind::Antifield => s.fields.iter().any(|f| f == family),
            GeneratorKind::Ghost | GeneratorKind::Antighost => s.gauge.iter().any(|g| g == family),
        };
        if !known {
            let what = match kind {
                GeneratorKind::BaseCoordinate => "base coordinate",
                GeneratorKind::Field | GeneratorKind::Antifield => "field",
                _ => "gauge index",
            };
            return Err(self.semantic(column, format!("unknown {what} `{family}`")));
        }
        if jet.len() > s.max_jet_order {
            return Err(self.semantic(column, format!("jet order {} exceeds the bound {}", jet.len(), s.max_jet_order)));
        }
        Ok(())
    }
}

/// Parses an expression without name checks.
pub fn parse_expression(text: &str) -> Result<LocalFunction, ParseError> {
    parse_at(text, None, 1, 1)
}

/// Parses an expression whose names must be declared in `scope`.
pub fn parse_expression_in(text: &str, scope: &Scope) -> Result<LocalFunction, ParseError> {
    parse_at(text, Some(scope), 1, 1)
}

pub(crate) fn parse_at(
    text: &str,
    scope: Option<&Scope>,
    line: usize,
    column: usize,
) -> Result<LocalFunction, ParseError> {
    let tokens = lex(text, line, column)?;
    let mut p = Parser { tokens, pos: 0, line, scope };
    let f = p.expr()?;
    let t = p.peek().clone();
    if t.tok != Tok::End {
        return Err(p.syntax(&t, "an operator or end of input"));
    }
    Ok(f)
}
