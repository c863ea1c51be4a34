//! Text format for Lie algebras and distinguished forms.
//!
//! The on-disk format is a statement list:
//!
//! ```text
//! # Heisenberg algebra times a line
//! dim 4;
//! d e4 = e12;
//! ```
//!
//! Statements, each ended by `;`:
//!
//! * `dim N;` — must come first.
//! * `d eK = <expr>;` — the differential of a basis covector; omitted
//!   covectors are closed. `<expr>` is `0` or a signed sum of terms
//!   `[coeff [*]] monomial`, with integer, `p/q` or decimal coefficients.
//! * `invariant e1, e2, e3;` — declares basis vectors spanning a symmetry
//!   subalgebra (used to cut out invariant forms).
//! * `<name> = <expr>;` — a named form, e.g. `omega = e14 + e25 + e36;`.
//!
//! Monomials are `e` plus one digit per index when the dimension is at most
//! 9 (`e135` = e¹∧e³∧e⁵) and `e{10,12}` with explicit braces above that.
//! `#` and `//` start comments. The compact tuple rendering
//! `(0, 0, 0, 0, 13+24, 14-23)` lists the differentials in basis order.

use crate::form::Form;
use crate::lie::LieAlgebra;
use crate::scalar::Rational;
use num::{BigInt, One, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

/// Parse error with 1-based source position.
#[derive(Debug, Error, PartialEq)]
#[error("line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// Result of parsing a structure file.
#[derive(Debug, Clone)]
pub struct StructFile {
    pub algebra: LieAlgebra<Rational>,
    /// 1-based basis indices from `invariant …;` statements, in order.
    pub invariant_generators: Vec<u8>,
    /// Named forms in declaration order.
    pub named_forms: Vec<(String, Form<Rational>)>,
}

impl StructFile {
    pub fn form(&self, name: &str) -> Option<&Form<Rational>> {
        self.named_forms.iter().find(|(n, _)| n == name).map(|(_, f)| f)
    }
}

/// Parse a `.lie`/`.struct` source string.
pub fn parse(src: &str) -> Result<StructFile, ParseError> {
    Parser::new(src)?.file()
}

/// Parse expecting only the algebra (named forms and invariants allowed but
/// discarded).
pub fn parse_algebra(src: &str) -> Result<LieAlgebra<Rational>, ParseError> {
    Ok(parse(src)?.algebra)
}

/// Compact tuple rendering of the differentials:
/// `(0, 0, 0, 0, 13+24, 14-23)`.
pub fn print_compact(g: &LieAlgebra<Rational>) -> String {
    let entries: Vec<String> = (1..=g.dim())
        .map(|m| compact_form(g.differential_of_basis(m), g.dim()))
        .collect();
    format!("({})", entries.join(", "))
}

/// Full statement rendering, parseable by [`parse`].
pub fn print_statements(g: &LieAlgebra<Rational>) -> String {
    let mut out = format!("dim {};\n", g.dim());
    for m in 1..=g.dim() {
        let d = g.differential_of_basis(m);
        if !d.is_zero() {
            out.push_str(&format!("d e{m} = {d};\n"));
        }
    }
    out
}

fn compact_form(f: &Form<Rational>, n: usize) -> String {
    if f.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (mi, c)) in f.terms().enumerate() {
        let mono = if n <= 9 {
            mi.indices().iter().map(|d| d.to_string()).collect::<String>()
        } else {
            format!(
                "{{{}}}",
                mi.indices().iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
            )
        };
        let neg = c < &Rational::zero();
        let mag = if neg { -c.clone() } else { c.clone() };
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { "-" } else { "+" });
        }
        if !mag.is_one() {
            out.push_str(&format!("{mag}*"));
        }
        out.push_str(&mono);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    /// Raw digit string (leading zeros matter for decimal fractions).
    Number(String),
    LBrace,
    RBrace,
    Comma,
    Semi,
    Equals,
    Plus,
    Minus,
    Star,
    Slash,
    Dot,
    Eof,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.src.get(self.pos).copied()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'#') => {
                    while self.peek().is_some_and(|c| c != b'\n') {
                        self.bump();
                    }
                }
                Some(b'/') if self.src.get(self.pos + 1) == Some(&b'/') => {
                    while self.peek().is_some_and(|c| c != b'\n') {
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    fn next(&mut self) -> Result<Spanned, ParseError> {
        self.skip_trivia();
        let (line, col) = (self.line, self.col);
        let Some(c) = self.peek() else {
            return Ok(Spanned { tok: Tok::Eof, line, col });
        };
        let tok = match c {
            b'{' => {
                self.bump();
                Tok::LBrace
            }
            b'}' => {
                self.bump();
                Tok::RBrace
            }
            b',' => {
                self.bump();
                Tok::Comma
            }
            b';' => {
                self.bump();
                Tok::Semi
            }
            b'=' => {
                self.bump();
                Tok::Equals
            }
            b'+' => {
                self.bump();
                Tok::Plus
            }
            b'-' => {
                self.bump();
                Tok::Minus
            }
            b'*' => {
                self.bump();
                Tok::Star
            }
            b'/' => {
                self.bump();
                Tok::Slash
            }
            b'.' => {
                self.bump();
                Tok::Dot
            }
            b'0'..=b'9' => {
                let mut s = String::new();
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    s.push(self.bump().unwrap() as char);
                }
                Tok::Number(s)
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut s = String::new();
                while self
                    .peek()
                    .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_')
                {
                    s.push(self.bump().unwrap() as char);
                }
                Tok::Ident(s)
            }
            other => {
                return Err(ParseError {
                    line,
                    col,
                    message: format!("unexpected character '{}'", other as char),
                })
            }
        };
        Ok(Spanned { tok, line, col })
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self, ParseError> {
        let mut lexer = Lexer::new(src);
        let mut toks = Vec::new();
        loop {
            let t = lexer.next()?;
            let eof = t.tok == Tok::Eof;
            toks.push(t);
            if eof {
                break;
            }
        }
        Ok(Parser { toks, pos: 0 })
    }

    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> &Spanned {
        let t = &self.toks[self.pos];
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, message: impl Into<String>) -> ParseError {
        let t = self.peek();
        ParseError { line: t.line, col: t.col, message: message.into() }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek().tok == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.err_here(format!("expected {what}")))
        }
    }

    fn file(&mut self) -> Result<StructFile, ParseError> {
        // `dim N;` first.
        match &self.peek().tok {
            Tok::Ident(s) if s == "dim" => {}
            _ => return Err(self.err_here("expected 'dim N;' as the first statement")),
        }
        self.bump();
        let dim = match &self.peek().tok {
            Tok::Number(n) => {
                let d: usize = n.parse().map_err(|_| self.err_here("dimension out of range"))?;
                if d == 0 || d > 9 {
                    // Braced monomials would lift the 9 limit, but every
                    // structure in this library lives in dimension ≤ 8.
                    return Err(self.err_here("dimension must be between 1 and 9"));
                }
                self.bump();
                d
            }
            _ => return Err(self.err_here("expected the dimension after 'dim'")),
        };
        self.expect(Tok::Semi, "';' after the dimension")?;

        let mut diffs: Vec<Option<Form<Rational>>> = vec![None; dim];
        let mut invariants: Vec<u8> = Vec::new();
        let mut named: Vec<(String, Form<Rational>)> = Vec::new();
        let mut named_seen: BTreeMap<String, ()> = BTreeMap::new();

        loop {
            let t = self.peek();
            match &t.tok {
                Tok::Eof => break,
                Tok::Ident(s) if s == "dim" => {
                    return Err(self.err_here("duplicate 'dim' statement"));
                }
                Tok::Ident(s) if s == "d" => {
                    self.bump();
                    let k = self.basis_index(dim)?;
                    if diffs[k as usize - 1].is_some() {
                        return Err(self.err_here(format!("duplicate differential for e{k}")));
                    }
                    self.expect(Tok::Equals, "'=' in a differential statement")?;
                    let f = self.expr(dim)?;
                    if f.degree() != 2 && !f.is_zero() {
                        return Err(self.err_here(format!(
                            "d e{k} must be a 2-form, found degree {}",
                            f.degree()
                        )));
                    }
                    self.expect(Tok::Semi, "';' after the expression")?;
                    let f = if f.is_zero() { Form::zero(dim, 2) } else { f };
                    diffs[k as usize - 1] = Some(f);
                }
                Tok::Ident(s) if s == "invariant" => {
                    self.bump();
                    loop {
                        let k = self.basis_index(dim)?;
                        if invariants.contains(&k) {
                            return Err(self.err_here(format!("duplicate invariant generator e{k}")));
                        }
                        invariants.push(k);
                        if self.peek().tok == Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    self.expect(Tok::Semi, "';' after the generator list")?;
                }
                Tok::Ident(name) => {
                    let name = name.clone();
                    if name.starts_with('e') && name[1..].chars().all(|c| c.is_ascii_digit()) {
                        return Err(self.err_here(
                            "form names may not look like basis monomials (e…)",
                        ));
                    }
                    self.bump();
                    self.expect(Tok::Equals, "'=' in a form definition")?;
                    let f = self.expr(dim)?;
                    self.expect(Tok::Semi, "';' after the expression")?;
                    if named_seen.insert(name.clone(), ()).is_some() {
                        return Err(self.err_here(format!("duplicate form name '{name}'")));
                    }
                    named.push((name, f));
                }
                _ => return Err(self.err_here("expected a statement")),
            }
        }

        let diff = diffs
            .into_iter()
            .map(|o| o.unwrap_or_else(|| Form::zero(dim, 2)))
            .collect();
        Ok(StructFile {
            algebra: LieAlgebra::from_differentials(diff),
            invariant_generators: invariants,
            named_forms: named,
        })
    }

    /// A single basis covector reference `eK` (whole-number index).
    fn basis_index(&mut self, dim: usize) -> Result<u8, ParseError> {
        match &self.peek().tok {
            Tok::Ident(s) if s.starts_with('e') && s[1..].chars().all(|c| c.is_ascii_digit()) && s.len() > 1 => {
                let k: usize = s[1..]
                    .parse()
                    .map_err(|_| self.err_here("basis index out of range"))?;
                if k == 0 || k > dim {
                    return Err(self.err_here(format!("basis index e{k} outside 1..={dim}")));
                }
                self.bump();
                Ok(k as u8)
            }
            _ => Err(self.err_here("expected a basis covector like e3")),
        }
    }

    /// Signed sum of terms, or literal `0`.
    fn expr(&mut self, dim: usize) -> Result<Form<Rational>, ParseError> {
        if let Tok::Number(n) = &self.peek().tok {
            let is_zero = n.chars().all(|c| c == '0');
            if is_zero
                && !matches!(
                    self.toks[self.pos + 1].tok,
                    Tok::Dot | Tok::Slash | Tok::Star | Tok::Ident(_)
                )
            {
                self.bump();
                return Ok(Form::zero(dim, 2));
            }
        }
        let mut terms: Vec<(Rational, Vec<u8>)> = Vec::new();
        let mut negate = false;
        match self.peek().tok {
            Tok::Minus => {
                negate = true;
                self.bump();
            }
            Tok::Plus => {
                self.bump();
            }
            _ => {}
        }
        loop {
            let (mut c, idx) = self.term(dim)?;
            if negate {
                c = -c;
            }
            terms.push((c, idx));
            match self.peek().tok {
                Tok::Plus => {
                    negate = false;
                    self.bump();
                }
                Tok::Minus => {
                    negate = true;
                    self.bump();
                }
                _ => break,
            }
        }
        let degree = terms[0].1.len();
        if terms.iter().any(|(_, i)| i.len() != degree) {
            return Err(self.err_here("terms of different degree in one expression"));
        }
        let pairs: Vec<(Rational, &[u8])> =
            terms.iter().map(|(c, i)| (c.clone(), i.as_slice())).collect();
        Ok(Form::from_terms(dim, degree, &pairs))
    }

    /// `[coeff [*]] monomial`, coefficient defaults to 1.
    fn term(&mut self, dim: usize) -> Result<(Rational, Vec<u8>), ParseError> {
        let coeff = match &self.peek().tok {
            Tok::Number(_) => {
                let c = self.number()?;
                if self.peek().tok == Tok::Star {
                    self.bump();
                }
                c
            }
            _ => Rational::one(),
        };
        let idx = self.monomial(dim)?;
        Ok((coeff, idx))
    }

    /// Integer, `p/q`, or decimal literal (always exact).
    fn number(&mut self) -> Result<Rational, ParseError> {
        let int_part: BigInt = match &self.peek().tok {
            Tok::Number(n) => n.parse().expect("digits"),
            _ => return Err(self.err_here("expected a number")),
        };
        self.bump();
        match self.peek().tok.clone() {
            Tok::Slash => {
                self.bump();
                match &self.peek().tok {
                    Tok::Number(q) => {
                        let q: BigInt = q.parse().expect("digits");
                        if q.is_zero() {
                            return Err(self.err_here("zero denominator"));
                        }
                        self.bump();
                        Ok(Rational::new(int_part, q))
                    }
                    _ => Err(self.err_here("expected a denominator")),
                }
            }
            Tok::Dot => {
                self.bump();
                match &self.peek().tok.clone() {
                    Tok::Number(digits) => {
                        let frac: BigInt = digits.parse().expect("digits");
                        let scale = BigInt::from(10u8).pow(digits.len() as u32);
                        self.bump();
                        Ok(Rational::from_integer(int_part) + Rational::new(frac, scale))
                    }
                    _ => Err(self.err_here("expected digits after the decimal point")),
                }
            }
            _ => Ok(Rational::from_integer(int_part)),
        }
    }

    /// `e135` (digit per index) or `e{1,3,5}`.
    fn monomial(&mut self, dim: usize) -> Result<Vec<u8>, ParseError> {
        match &self.peek().tok.clone() {
            Tok::Ident(s) if s == "e" => {
                self.bump();
                self.expect(Tok::LBrace, "'{' after bare 'e'")?;
                let mut idx = Vec::new();
                loop {
                    match &self.peek().tok {
                        Tok::Number(n) => {
                            let k: usize =
                                n.parse().map_err(|_| self.err_here("index out of range"))?;
                            if k == 0 || k > dim {
                                return Err(self
                                    .err_here(format!("index {k} outside 1..={dim}")));
                            }
                            idx.push(k as u8);
                            self.bump();
                        }
                        _ => return Err(self.err_here("expected an index")),
                    }
                    if self.peek().tok == Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
                self.expect(Tok::RBrace, "'}'")?;
                self.check_distinct(&idx)?;
                Ok(idx)
            }
            Tok::Ident(s)
                if s.starts_with('e')
                    && s.len() > 1
                    && s[1..].chars().all(|c| c.is_ascii_digit()) =>
            {
                let idx: Vec<u8> = s[1..].bytes().map(|b| b - b'0').collect();
                for &k in &idx {
                    if k == 0 || k as usize > dim {
                        return Err(self.err_here(format!("index {k} outside 1..={dim}")));
                    }
                }
                self.bump();
                self.check_distinct(&idx)?;
                Ok(idx)
            }
            _ => Err(self.err_here("expected a monomial like e135")),
        }
    }

    fn check_distinct(&self, idx: &[u8]) -> Result<(), ParseError> {
        // Indices are already range-checked to 1..=9.
        let mut seen = [false; 10];
        for &k in idx {
            if std::mem::replace(&mut seen[k as usize], true) {
                return Err(self.err_here("repeated index in a monomial"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    #[test]
    fn parse_nilpotent_algebra() {
        let f = parse("dim 6;\nd e5 = e13 + e24;\nd e6 = e14 - e23;\n").unwrap();
        let g = &f.algebra;
        assert_eq!(g.dim(), 6);
        assert!(g.differential_of_basis(1).is_zero());
        assert_eq!(
            *g.differential_of_basis(5),
            Form::from_terms(6, 2, &[(int(1), &[1, 3]), (int(1), &[2, 4])])
        );
        assert_eq!(g.bracket_basis(1, 3), vec![int(0), int(0), int(0), int(0), int(-1), int(0)]);
        assert!(g.jacobi_check().is_ok());
    }

    #[test]
    fn coefficients_integer_rational_decimal() {
        let f = parse("dim 4; d e4 = 2*e12 - 1/2*e13 + 0.25 e23;").unwrap();
        let d4 = f.algebra.differential_of_basis(4);
        assert_eq!(d4.coeff_on(&[1, 2]), int(2));
        assert_eq!(d4.coeff_on(&[1, 3]), ratio(-1, 2));
        assert_eq!(d4.coeff_on(&[2, 3]), ratio(1, 4));
    }

    #[test]
    fn invariant_and_named_forms() {
        let src = "dim 6;
d e1 = e23 - e56;
invariant e1, e2, e3;
omega = e14 + e25 + e36;
rho = -e456 + e126;
";
        let f = parse(src).unwrap();
        assert_eq!(f.invariant_generators, vec![1, 2, 3]);
        assert_eq!(f.named_forms.len(), 2);
        let rho = f.form("rho").unwrap();
        assert_eq!(rho.degree(), 3);
        assert_eq!(rho.coeff_on(&[4, 5, 6]), int(-1));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse("dim 3;\nd e9 = e12;").unwrap_err();
        assert_eq!((e.line, e.col), (2, 3));
        assert!(e.message.contains("outside"));

        let e = parse("dim 3; d e3 = e12; d e3 = e13;").unwrap_err();
        assert!(e.message.contains("duplicate"));

        let e = parse("d e1 = 0;").unwrap_err();
        assert!(e.message.contains("dim"));

        let e = parse("dim 3; d e3 = e11;").unwrap_err();
        assert!(e.message.contains("repeated index"));

        let e = parse("dim 3; d e3 = e12 + e1;").unwrap_err();
        assert!(e.message.contains("degree"));
    }

    #[test]
    fn compact_roundtrip() {
        let src = "dim 6; d e5 = e13 + e24; d e6 = e14 - e23;";
        let g = parse_algebra(src).unwrap();
        assert_eq!(print_compact(&g), "(0, 0, 0, 0, 13+24, 14-23)");
        let re = parse_algebra(&print_statements(&g)).unwrap();
        assert_eq!(re, g);
    }

    #[test]
    fn comments_and_zero() {
        let src = "# full comment line
dim 3; // trailing
d e3 = 0;  # explicit zero
";
        let g = parse_algebra(src).unwrap();
        assert!(g.is_abelian());
    }
}
