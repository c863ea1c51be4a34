//! Text formats for algebras, initial structures, and decomposition
//! witnesses.
//!
//! Two small line-oriented formats keep fixtures readable in a diff. A
//! `.lie` file presents a Lie algebra by the differentials of its dual
//! basis; unlisted differentials are zero:
//!
//! ```text
//! # six-dimensional nilpotent example
//! dim 6
//! de5 = e13 + e24
//! de6 = e14 - e23
//! ```
//!
//! A `.struct` file names an algebra file, a flow kind, and the initial
//! forms that kind requires:
//!
//! ```text
//! algebra sl2c.lie
//! kind hitchin6
//! omega = e14 + e25 + e36
//! rho = -e456 + e126 - e135 + e234
//! ```
//!
//! Coefficients are integers or rationals (`-3/2 e12`, `2*e13`, `2e13`);
//! basis indices are single digits, so the formats cover dimensions 1
//! through 9 (the flows live in 5, 6, and 7). Index order is free — `e21`
//! means `-e12` — but a repeated index is an error. Everything is parsed
//! exactly; convert with [`Form::to_f64`] where floating point is needed.
//!
//! Decomposition witnesses are JSON (see [`WitnessFile`]): vector entries
//! may be integers or strings like `"3/4"`.
//!
//! Parsing is purely syntactic: a `.lie` file that fails the Jacobi
//! identity parses fine and is rejected later by whichever operation needs
//! a genuine Lie algebra. This keeps the error taxonomy clean — malformed
//! text and violated invariants are different failures.

use std::collections::BTreeMap;

use serde::Deserialize;
use thiserror::Error;

use crate::flow::{FlowKind, InitialStructure};
use crate::form::Form;
use crate::lie::LieAlgebra;
use crate::multiindex::MultiIndex;
use crate::obstruct::DecompositionWitness;
use crate::scalar::{Rational, Scalar};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    AtLine { line: usize, msg: String },
    #[error("{msg}")]
    General { msg: String },
}

impl ParseError {
    fn at(line: usize, msg: impl Into<String>) -> Self {
        ParseError::AtLine { line, msg: msg.into() }
    }

    fn general(msg: impl Into<String>) -> Self {
        ParseError::General { msg: msg.into() }
    }
}

/// Parse `"3"`, `"-3"`, or `"3/4"` into an exact rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n, d),
        None => (text, "1"),
    };
    let num: i64 = num.parse().ok()?;
    let den: i64 = den.parse().ok()?;
    if den == 0 {
        return None;
    }
    Some(Rational::from_ratio(num, den))
}

/// One lexical atom of a form expression.
enum Token {
    Sign(i64),
    /// Coefficient, monomial indices, or both fused (`2e13`).
    Word(String),
}

fn lex(expr: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut word = String::new();
    for ch in expr.chars() {
        match ch {
            '+' | '-' => {
                if !word.is_empty() {
                    tokens.push(Token::Word(std::mem::take(&mut word)));
                }
                tokens.push(Token::Sign(if ch == '+' { 1 } else { -1 }));
            }
            c if c.is_whitespace() || c == '*' => {
                if !word.is_empty() {
                    tokens.push(Token::Word(std::mem::take(&mut word)));
                }
            }
            c => word.push(c),
        }
    }
    if !word.is_empty() {
        tokens.push(Token::Word(word));
    }
    tokens
}

/// Split a word into its coefficient part and its monomial part. `2e13`
/// yields both; `3/2` only the coefficient; `e13` only the monomial.
fn split_word(word: &str) -> (Option<&str>, Option<&str>) {
    match word.find('e') {
        Some(0) => (None, Some(word)),
        Some(pos) => (Some(&word[..pos]), Some(&word[pos..])),
        None => (Some(word), None),
    }
}

fn parse_monomial(line: usize, n: usize, word: &str) -> Result<Vec<u8>, ParseError> {
    let digits = word.strip_prefix('e').expect("caller checked the prefix");
    if digits.is_empty() {
        return Err(ParseError::at(line, "monomial `e` lists no indices"));
    }
    let mut idx = Vec::with_capacity(digits.len());
    for ch in digits.chars() {
        let d = ch
            .to_digit(10)
            .filter(|&d| d >= 1)
            .ok_or_else(|| ParseError::at(line, format!("bad index digit {ch:?} in `{word}`")))?;
        if d as usize > n {
            return Err(ParseError::at(
                line,
                format!("index {d} out of range 1..={n} in `{word}`"),
            ));
        }
        idx.push(d as u8);
    }
    if MultiIndex::from_unsorted(&idx).is_none() {
        return Err(ParseError::at(line, format!("repeated index in `{word}`")));
    }
    Ok(idx)
}

/// Parse a form expression like `e13 + e24 - 3/2 e12` on an n-dimensional
/// space, requiring every monomial to have degree `k`. The literal `0`
/// denotes the zero form.
pub fn parse_form(line: usize, n: usize, k: usize, expr: &str) -> Result<Form<Rational>, ParseError> {
    let tokens = lex(expr);
    if tokens.is_empty() {
        return Err(ParseError::at(line, "empty form expression"));
    }
    if let [Token::Word(w)] = tokens.as_slice() {
        if w == "0" {
            return Ok(Form::zero(n, k));
        }
    }

    let mut form = Form::zero(n, k);
    let mut iter = tokens.into_iter().peekable();
    let mut first = true;
    while iter.peek().is_some() {
        // Optional sign (mandatory separator after the first term).
        let mut sign = 1i64;
        let mut saw_sign = false;
        while let Some(Token::Sign(s)) = iter.peek() {
            if saw_sign {
                return Err(ParseError::at(line, "two consecutive signs"));
            }
            sign = *s;
            saw_sign = true;
            iter.next();
        }
        if !first && !saw_sign {
            return Err(ParseError::at(line, "terms must be separated by `+` or `-`"));
        }
        first = false;

        let word = match iter.next() {
            Some(Token::Word(w)) => w,
            _ => return Err(ParseError::at(line, "dangling sign at the end of the expression")),
        };
        let (coeff_part, mono_part) = split_word(&word);
        let coeff = match coeff_part {
            Some(c) => parse_rational(c)
                .ok_or_else(|| ParseError::at(line, format!("bad coefficient `{c}`")))?,
            None => Rational::one(),
        };
        let mono = match mono_part {
            Some(m) => m.to_string(),
            None => match iter.next() {
                // A bare coefficient must be followed by its monomial.
                Some(Token::Word(w)) if w.starts_with('e') => w,
                _ => {
                    return Err(ParseError::at(
                        line,
                        format!("coefficient `{word}` is not followed by a monomial"),
                    ))
                }
            },
        };
        let idx = parse_monomial(line, n, &mono)?;
        if idx.len() != k {
            return Err(ParseError::at(
                line,
                format!("monomial `{mono}` has degree {}, expected {k}", idx.len()),
            ));
        }
        let signed = if sign < 0 { coeff.neg() } else { coeff };
        form = form.add(&Form::term(n, signed, &idx));
    }
    Ok(form)
}

/// Strip comments and blank lines, keeping 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

/// Parse a `.lie` file. Purely syntactic; run
/// [`LieAlgebra::jacobi_check`] afterwards if a genuine Lie algebra is
/// required.
pub fn parse_lie(text: &str) -> Result<LieAlgebra<Rational>, ParseError> {
    let mut lines = content_lines(text);
    let (first_no, first) = lines
        .next()
        .ok_or_else(|| ParseError::general("empty algebra file; expected a `dim N` line"))?;
    let n: usize = first
        .strip_prefix("dim")
        .map(str::trim)
        .and_then(|rest| rest.parse().ok())
        .ok_or_else(|| ParseError::at(first_no, "expected `dim N` as the first entry"))?;
    if !(1..=9).contains(&n) {
        return Err(ParseError::at(
            first_no,
            format!("dimension {n} outside 1..=9 (single-digit basis indices)"),
        ));
    }

    let mut diff: Vec<Option<Form<Rational>>> = vec![None; n];
    for (line_no, line) in lines {
        let (lhs, rhs) = line
            .split_once('=')
            .ok_or_else(|| ParseError::at(line_no, "expected `deM = <2-form>`"))?;
        let m: usize = lhs
            .trim()
            .strip_prefix("de")
            .and_then(|rest| rest.parse().ok())
            .ok_or_else(|| ParseError::at(line_no, format!("unknown entry `{}`", lhs.trim())))?;
        if !(1..=n).contains(&m) {
            return Err(ParseError::at(line_no, format!("de{m} out of range 1..={n}")));
        }
        if diff[m - 1].is_some() {
            return Err(ParseError::at(line_no, format!("duplicate differential de{m}")));
        }
        diff[m - 1] = Some(parse_form(line_no, n, 2, rhs)?);
    }
    Ok(LieAlgebra::from_differentials(
        diff.into_iter().map(|d| d.unwrap_or_else(|| Form::zero(n, 2))).collect(),
    ))
}

/// The form names each flow kind requires, with their degrees.
pub fn required_forms(kind: FlowKind) -> &'static [(&'static str, usize)] {
    match kind {
        FlowKind::Hypo5 => &[("alpha", 1), ("omega1", 2), ("omega2", 2), ("omega3", 2)],
        FlowKind::Hitchin6 => &[("omega", 2), ("rho", 3)],
        FlowKind::Hitchin7 => &[("phi", 3)],
    }
}

/// A parsed `.struct` file. Form expressions are kept as text until the
/// algebra's dimension is known; call [`StructFile::exact_forms`] or
/// [`StructFile::initial_structure`] to finish parsing.
#[derive(Debug, Clone)]
pub struct StructFile {
    /// Algebra file path as written; resolve it relative to the `.struct`
    /// file's directory.
    pub algebra: String,
    pub kind: FlowKind,
    entries: Vec<(usize, String, String)>,
}

pub fn parse_struct(text: &str) -> Result<StructFile, ParseError> {
    let mut algebra = None;
    let mut kind = None;
    let mut entries = Vec::new();
    for (line_no, line) in content_lines(text) {
        if let Some(rest) = line.strip_prefix("algebra") {
            if rest.starts_with(char::is_whitespace) {
                if algebra.replace(rest.trim().to_string()).is_some() {
                    return Err(ParseError::at(line_no, "duplicate `algebra` entry"));
                }
                continue;
            }
        }
        if let Some(rest) = line.strip_prefix("kind") {
            if rest.starts_with(char::is_whitespace) {
                let parsed = match rest.trim() {
                    "hypo5" => FlowKind::Hypo5,
                    "hitchin6" => FlowKind::Hitchin6,
                    "hitchin7" => FlowKind::Hitchin7,
                    other => {
                        return Err(ParseError::at(
                            line_no,
                            format!("unknown kind `{other}`; expected hypo5, hitchin6, or hitchin7"),
                        ))
                    }
                };
                if kind.replace(parsed).is_some() {
                    return Err(ParseError::at(line_no, "duplicate `kind` entry"));
                }
                continue;
            }
        }
        let (name, expr) = line
            .split_once('=')
            .ok_or_else(|| ParseError::at(line_no, "expected `name = <form>`"))?;
        entries.push((line_no, name.trim().to_string(), expr.to_string()));
    }
    let algebra =
        algebra.ok_or_else(|| ParseError::general("missing `algebra <path>` entry"))?;
    let kind = kind.ok_or_else(|| ParseError::general("missing `kind <flow>` entry"))?;
    Ok(StructFile { algebra, kind, entries })
}

impl StructFile {
    /// Parse every form against the required-name table for this kind, on an
    /// `n`-dimensional algebra.
    pub fn exact_forms(&self, n: usize) -> Result<BTreeMap<String, Form<Rational>>, ParseError> {
        let required = required_forms(self.kind);
        let mut out = BTreeMap::new();
        for (line_no, name, expr) in &self.entries {
            let degree = required
                .iter()
                .find(|(want, _)| want == name)
                .map(|&(_, k)| k)
                .ok_or_else(|| {
                    let names: Vec<&str> = required.iter().map(|&(w, _)| w).collect();
                    ParseError::at(
                        *line_no,
                        format!(
                            "form `{name}` does not belong to kind {}; expected {}",
                            self.kind.as_str(),
                            names.join(", ")
                        ),
                    )
                })?;
            if out.insert(name.clone(), parse_form(*line_no, n, degree, expr)?).is_some() {
                return Err(ParseError::at(*line_no, format!("duplicate form `{name}`")));
            }
        }
        for &(want, _) in required {
            if !out.contains_key(want) {
                return Err(ParseError::general(format!(
                    "kind {} requires a form named `{want}`",
                    self.kind.as_str()
                )));
            }
        }
        Ok(out)
    }

    /// Build the flow's initial structure (floating point) on an
    /// `n`-dimensional algebra.
    pub fn initial_structure(&self, n: usize) -> Result<InitialStructure, ParseError> {
        let forms = self.exact_forms(n)?;
        let get = |name: &str| forms[name].to_f64();
        Ok(match self.kind {
            FlowKind::Hypo5 => InitialStructure::Hypo5 {
                alpha: get("alpha"),
                omega1: get("omega1"),
                omega2: get("omega2"),
                omega3: get("omega3"),
            },
            FlowKind::Hitchin6 => {
                InitialStructure::Hitchin6 { omega: get("omega"), rho: get("rho") }
            }
            FlowKind::Hitchin7 => InitialStructure::Hitchin7 { phi: get("phi") },
        })
    }
}

/// One entry of a witness vector: a JSON integer or a string like `"3/4"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RationalEntry {
    Int(i64),
    Text(String),
}

impl RationalEntry {
    fn to_rational(&self) -> Result<Rational, ParseError> {
        match self {
            RationalEntry::Int(i) => Ok(Rational::from_int(*i)),
            RationalEntry::Text(s) => parse_rational(s)
                .ok_or_else(|| ParseError::general(format!("bad rational entry `{s}`"))),
        }
    }
}

/// JSON shape of a decomposition witness file:
///
/// ```json
/// {
///   "ideal": [[1, 0, 0], [0, "1/2", 0]],
///   "complement": [0, 0, 1],
///   "proper": true
/// }
/// ```
///
/// The `proper` field is optional; when present it is a claim that the
/// classifier checks against the computed value.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessFile {
    pub ideal: Vec<Vec<RationalEntry>>,
    pub complement: Vec<RationalEntry>,
    #[serde(default)]
    pub proper: Option<bool>,
}

impl WitnessFile {
    pub fn to_witness(&self) -> Result<DecompositionWitness<Rational>, ParseError> {
        let vector = |v: &[RationalEntry]| -> Result<Vec<Rational>, ParseError> {
            v.iter().map(RationalEntry::to_rational).collect()
        };
        Ok(DecompositionWitness {
            ideal: self.ideal.iter().map(|v| vector(v)).collect::<Result<_, _>>()?,
            complement: vector(&self.complement)?,
            proper: self.proper,
        })
    }
}
