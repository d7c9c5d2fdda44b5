//! Recursive-descent parser for the scenario expression grammar.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' int)?            int may be signed or parenthesized
//! atom   := number | 'pi' | ident | func '(' expr [',' int] ')' | '(' expr ')'
//! func   := sin | cos | exp | sqrt | bump | step
//! ```
//!
//! Forms are sums of terms `coef * dX wedge dY ...` where `dX` names a
//! differential of chart coordinate `X`; `∧` is accepted for `wedge`.

use crate::error::{Error, Result};
use crate::expr::ScalarExpr;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Wedge,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut column) = (1, 1);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = (line, column);
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '∧' => Some(Tok::Wedge),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token {
                tok,
                line: start.0,
                column: start.1,
            });
            i += 1;
            column += 1;
            continue;
        }
        if c == '\n' {
            line += 1;
            column = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            column += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let begin = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[begin..i].iter().collect();
            let value = text.parse::<f64>().map_err(|_| Error::Parse {
                line: start.0,
                column: start.1,
                message: format!("bad number `{text}`"),
            })?;
            column += i - begin;
            out.push(Token {
                tok: Tok::Num(value),
                line: start.0,
                column: start.1,
            });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let begin = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let text: String = chars[begin..i].iter().collect();
            column += i - begin;
            let tok = if text == "wedge" {
                Tok::Wedge
            } else {
                Tok::Ident(text)
            };
            out.push(Token {
                tok,
                line: start.0,
                column: start.1,
            });
            continue;
        }
        return Err(Error::Parse {
            line,
            column,
            message: format!("unexpected character `{c}`"),
        });
    }
    Ok(out)
}

/// One additive term of a parsed form: coefficient and the differentials
/// (coordinate indices) in the order they were written.
#[derive(Clone, Debug)]
pub struct FormTerm {
    pub coeff: ScalarExpr,
    pub differentials: Vec<usize>,
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    coords: Option<&'a [String]>,
}

impl<'a> Parser<'a> {
    fn new(src: &str, coords: Option<&'a [String]>) -> Result<Self> {
        Ok(Parser {
            toks: tokenize(src)?,
            pos: 0,
            coords,
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn error(&self, message: impl Into<String>) -> Error {
        let (line, column) = match self.toks.get(self.pos) {
            Some(t) => (t.line, t.column),
            None => self
                .toks
                .last()
                .map(|t| (t.line, t.column + 1))
                .unwrap_or((1, 1)),
        };
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {tok:?}")))
        }
    }

    fn finish(&self) -> Result<()> {
        if self.pos < self.toks.len() {
            Err(self.error("unexpected trailing input"))
        } else {
            Ok(())
        }
    }

    fn expr(&mut self) -> Result<ScalarExpr> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc + self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc - self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<ScalarExpr> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = acc * self.unary()?;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    acc = acc / self.unary()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<ScalarExpr> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn int(&mut self) -> Result<i32> {
        let paren = self.peek() == Some(&Tok::LParen);
        if paren {
            self.pos += 1;
        }
        let neg = self.peek() == Some(&Tok::Minus);
        if neg {
            self.pos += 1;
        }
        let value = match self.peek() {
            Some(Tok::Num(v)) if v.fract() == 0.0 && v.abs() < 1e6 => *v as i32,
            _ => return Err(self.error("expected integer exponent")),
        };
        self.pos += 1;
        if paren {
            self.expect(Tok::RParen)?;
        }
        Ok(if neg { -value } else { value })
    }

    fn power(&mut self) -> Result<ScalarExpr> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let k = self.int()?;
            return Ok(base.powi(k));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ScalarExpr> {
        let tok = self.peek().cloned();
        match tok {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(ScalarExpr::constant(v))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.peek() == Some(&Tok::LParen) {
                    self.pos += 1;
                    let arg = self.expr()?;
                    let mut extra = None;
                    if self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                        extra = Some(self.int()?);
                    }
                    self.expect(Tok::RParen)?;
                    let out = match (name.as_str(), extra) {
                        ("sin", None) => arg.sin(),
                        ("cos", None) => arg.cos(),
                        ("exp", None) => arg.exp(),
                        ("sqrt", None) => arg.sqrt(),
                        ("step", None) => arg.step(),
                        ("bump", None) => arg.bump(),
                        ("bump", Some(p)) if p >= 0 => arg.bump_pow(p as u32),
                        _ => {
                            self.pos -= 1;
                            return Err(self.error(format!("unknown function `{name}`")));
                        }
                    };
                    Ok(out)
                } else if name == "pi" {
                    Ok(ScalarExpr::constant(std::f64::consts::PI))
                } else {
                    Ok(ScalarExpr::var(&name))
                }
            }
            _ => Err(self.error("expected a number, variable, or `(`")),
        }
    }

    fn differential(&self) -> Option<usize> {
        let coords = self.coords?;
        match self.peek() {
            Some(Tok::Ident(name)) if !coords.contains(name) => {
                let rest = name.strip_prefix('d')?;
                coords.iter().position(|c| c == rest)
            }
            _ => None,
        }
    }

    /// True if the parenthesized group starting at the cursor contains a
    /// differential.
    fn group_has_differential(&self) -> bool {
        let coords = match self.coords {
            Some(c) => c,
            None => return false,
        };
        let mut depth = 0usize;
        for t in &self.toks[self.pos..] {
            match &t.tok {
                Tok::LParen => depth += 1,
                Tok::RParen => {
                    depth -= 1;
                    if depth == 0 {
                        return false;
                    }
                }
                Tok::Ident(name) if !coords.contains(name) => {
                    if let Some(rest) = name.strip_prefix('d') {
                        if coords.iter().any(|c| c == rest) {
                            return true;
                        }
                    }
                }
                _ => {}
            }
        }
        false
    }

    fn form(&mut self) -> Result<Vec<FormTerm>> {
        let mut terms = self.form_product(false)?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    terms.extend(self.form_product(false)?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    terms.extend(self.form_product(true)?);
                }
                _ => return Ok(terms),
            }
        }
    }

    fn form_product(&mut self, negate: bool) -> Result<Vec<FormTerm>> {
        let mut acc = vec![FormTerm {
            coeff: ScalarExpr::one(),
            differentials: Vec::new(),
        }];
        let mut negate = negate;
        while self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            negate = !negate;
        }
        let mut divide = false;
        loop {
            let factor: Vec<FormTerm> = if let Some(i) = self.differential() {
                if divide {
                    return Err(self.error("cannot divide by a differential"));
                }
                self.pos += 1;
                vec![FormTerm {
                    coeff: ScalarExpr::one(),
                    differentials: vec![i],
                }]
            } else if self.peek() == Some(&Tok::LParen) && self.group_has_differential() {
                if divide {
                    return Err(self.error("cannot divide by a form"));
                }
                self.pos += 1;
                let inner = self.form()?;
                self.expect(Tok::RParen)?;
                inner
            } else {
                let f = self.power()?;
                let f = if divide { ScalarExpr::one() / f } else { f };
                vec![FormTerm {
                    coeff: f,
                    differentials: Vec::new(),
                }]
            };
            acc = acc
                .iter()
                .flat_map(|a| {
                    factor.iter().map(move |b| {
                        let mut differentials = a.differentials.clone();
                        differentials.extend(&b.differentials);
                        FormTerm {
                            coeff: &a.coeff * &b.coeff,
                            differentials,
                        }
                    })
                })
                .collect();
            divide = false;
            match self.peek() {
                Some(Tok::Star) | Some(Tok::Wedge) => self.pos += 1,
                Some(Tok::Slash) => {
                    self.pos += 1;
                    divide = true;
                }
                _ => break,
            }
        }
        if negate {
            for t in &mut acc {
                t.coeff = -t.coeff.clone();
            }
        }
        Ok(acc)
    }
}

pub fn parse_expr(src: &str) -> Result<ScalarExpr> {
    let mut p = Parser::new(src, None)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

/// Parses a form written over the given coordinates into raw terms.
pub fn parse_form_terms(src: &str, coords: &[String]) -> Result<Vec<FormTerm>> {
    let mut p = Parser::new(src, Some(coords))?;
    if p.peek().is_none() {
        return Err(p.error("empty form"));
    }
    let terms = p.form()?;
    if p.peek().is_some() {
        return Err(p.error("expected `+`, `-`, or end of form"));
    }
    Ok(terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(src: &str, pairs: &[(&str, f64)]) -> f64 {
        parse_expr(src)
            .unwrap()
            .eval_with(&|n| pairs.iter().find(|(k, _)| *k == n).map(|p| p.1))
            .unwrap()
    }

    #[test]
    fn precedence_and_powers() {
        assert_eq!(eval("1 + 2*3^2", &[]), 19.0);
        assert_eq!(eval("-x^2", &[("x", 3.0)]), -9.0);
        assert_eq!(eval("x^(-2)", &[("x", 2.0)]), 0.25);
        assert_eq!(eval("2/4*x", &[("x", 6.0)]), 3.0);
        assert!((eval("2*pi", &[]) - std::f64::consts::TAU).abs() < 1e-15);
        assert_eq!(eval("1.5e-1", &[]), 0.15);
    }

    #[test]
    fn functions() {
        assert_eq!(eval("sqrt(4)+cos(0)", &[]), 3.0);
        assert_eq!(eval("bump(-1)", &[]), 0.0);
        assert_eq!(eval("step(2)", &[]), 1.0);
        assert!((eval("bump(1, 2)", &[]) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn errors_carry_position() {
        match parse_expr("1 +\n  * 2") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_expr("foo(1)"), Err(Error::Parse { .. })));
        assert!(matches!(parse_expr("1 $ 2"), Err(Error::Parse { .. })));
    }

    #[test]
    fn form_terms() {
        let coords: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
        let terms = parse_form_terms("dz + x*dy - 0.5*y^2 * dx wedge dz", &coords).unwrap();
        assert_eq!(terms.len(), 3);
        assert_eq!(terms[0].differentials, vec![2]);
        assert_eq!(terms[1].differentials, vec![1]);
        assert_eq!(terms[2].differentials, vec![0, 2]);
        let c = terms[2].coeff.eval_at(&coords, &[0.0, 2.0, 0.0]).unwrap();
        assert_eq!(c, -2.0);
    }

    #[test]
    fn parenthesized_forms_distribute() {
        let coords: Vec<String> = ["x", "y"].iter().map(|s| s.to_string()).collect();
        let terms = parse_form_terms("0.5*(x*dy - y*dx) + (x+1)^2*dx", &coords).unwrap();
        assert_eq!(terms.len(), 3);
        assert_eq!(terms[1].differentials, vec![0]);
        let c = terms[1].coeff.eval_at(&coords, &[0.0, 4.0]).unwrap();
        assert_eq!(c, -2.0);
        assert!(parse_form_terms("dx / (x*dy)", &coords).is_err());
        assert!(parse_form_terms("(dx", &coords).is_err());
    }

    #[test]
    fn coordinate_named_like_a_differential_is_a_variable() {
        let coords: Vec<String> = ["d", "dd"].iter().map(|s| s.to_string()).collect();
        let terms = parse_form_terms("dd*dd", &coords).unwrap();
        // `dd` is a coordinate, so it is read as a variable both times
        assert!(terms[0].differentials.is_empty());
    }
}
