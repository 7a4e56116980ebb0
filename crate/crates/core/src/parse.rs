//! Text format for presentations.
//!
//! ```text
//! # genus-two surface group
//! gens: a1, b1, a2, b2
//! rels: [a1,b1][a2,b2]
//! ```
//!
//! Words are juxtapositions of factors, optionally separated by `*`. A factor
//! is a generator name, a parenthesised word, or a commutator `[x,y]`
//! (expanding to `x y x^-1 y^-1`), optionally followed by `^n`. Several
//! `rels:` lines are concatenated.

use thiserror::Error;

use crate::word::{is_valid_name, Presentation, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{column}: syntax error: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: unknown generator `{name}`")]
    UnknownGenerator { line: usize, column: usize, name: String },
    #[error("{line}:{column}: zero exponent")]
    ZeroExponent { line: usize, column: usize },
    #[error("{line}:{column}: trivial relator")]
    TrivialRelator { line: usize, column: usize },
    #[error("{line}:{column}: duplicate generator `{name}`")]
    DuplicateGenerator { line: usize, column: usize, name: String },
}

impl ParseError {
    pub fn position(&self) -> (usize, usize) {
        match self {
            ParseError::Syntax { line, column, .. }
            | ParseError::UnknownGenerator { line, column, .. }
            | ParseError::ZeroExponent { line, column }
            | ParseError::TrivialRelator { line, column }
            | ParseError::DuplicateGenerator { line, column, .. } => (*line, *column),
        }
    }
}

pub fn parse_presentation(text: &str) -> Result<Presentation, ParseError> {
    let mut generators: Option<Vec<String>> = None;
    let mut relators = Vec::new();

    for (line_no, raw_line) in text.lines().enumerate() {
        let line_no = line_no + 1;
        let line = raw_line.split('#').next().unwrap_or("");
        let trimmed = line.trim_start();
        if trimmed.trim().is_empty() {
            continue;
        }
        let offset = line.len() - trimmed.len();
        if let Some(rest) = trimmed.strip_prefix("gens:") {
            if generators.is_some() {
                return Err(syntax(line_no, offset + 1, "repeated `gens:` line"));
            }
            generators = Some(parse_generators(rest, line_no, offset + 6)?);
        } else if let Some(rest) = trimmed.strip_prefix("rels:") {
            let gens = generators
                .as_ref()
                .ok_or_else(|| syntax(line_no, offset + 1, "`rels:` before `gens:`"))?;
            let mut cursor = Cursor::new(rest, line_no, offset + 6, gens);
            relators.extend(cursor.relator_list()?);
        } else {
            return Err(syntax(line_no, offset + 1, "expected `gens:` or `rels:`"));
        }
    }

    let generators = generators.ok_or_else(|| syntax(1, 1, "missing `gens:` line"))?;
    Ok(Presentation::new(generators, relators).expect("names and indices validated by the parser"))
}

/// Parses a single word over the generators of `p`.
pub fn parse_word(p: &Presentation, text: &str) -> Result<Word, ParseError> {
    let mut cursor = Cursor::new(text, 1, 1, p.generators());
    cursor.skip_ws();
    if cursor.at_end() {
        return Ok(Word::identity());
    }
    let w = cursor.word()?;
    cursor.skip_ws();
    if !cursor.at_end() {
        return Err(cursor.error("trailing input"));
    }
    Ok(w)
}

fn syntax(line: usize, column: usize, message: &str) -> ParseError {
    ParseError::Syntax {
        line,
        column,
        message: message.to_string(),
    }
}

fn parse_generators(rest: &str, line: usize, start_col: usize) -> Result<Vec<String>, ParseError> {
    let mut out: Vec<String> = Vec::new();
    if rest.trim().is_empty() {
        return Ok(out);
    }
    let mut col = start_col;
    for piece in rest.split(',') {
        let lead = piece.len() - piece.trim_start().len();
        let name = piece.trim();
        let name_col = col + lead;
        if !is_valid_name(name) {
            return Err(syntax(line, name_col, &format!("invalid generator name `{name}`")));
        }
        if out.iter().any(|g| g == name) {
            return Err(ParseError::DuplicateGenerator {
                line,
                column: name_col,
                name: name.to_string(),
            });
        }
        out.push(name.to_string());
        col += piece.len() + 1;
    }
    Ok(out)
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    start_col: usize,
    generators: &'a [String],
}

impl<'a> Cursor<'a> {
    fn new(text: &str, line: usize, start_col: usize, generators: &'a [String]) -> Self {
        Cursor {
            chars: text.chars().collect(),
            pos: 0,
            line,
            start_col,
            generators,
        }
    }

    fn column(&self) -> usize {
        self.start_col + self.pos
    }

    fn error(&self, message: &str) -> ParseError {
        syntax(self.line, self.column(), message)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn relator_list(&mut self) -> Result<Vec<Word>, ParseError> {
        let mut out = Vec::new();
        self.skip_ws();
        if self.at_end() {
            return Ok(out);
        }
        loop {
            self.skip_ws();
            let column = self.column();
            let w = self.word()?;
            if w.is_identity() {
                return Err(ParseError::TrivialRelator {
                    line: self.line,
                    column,
                });
            }
            out.push(w);
            self.skip_ws();
            match self.peek() {
                None => return Ok(out),
                Some(',') => self.pos += 1,
                Some(_) => return Err(self.error("expected `,` between relators")),
            }
        }
    }

    fn word(&mut self) -> Result<Word, ParseError> {
        let mut acc = self.factor()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.factor()?);
                }
                Some(c) if c.is_ascii_alphabetic() || c == '(' || c == '[' => {
                    acc = acc.mul(&self.factor()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Word, ParseError> {
        let base = self.primary()?;
        self.skip_ws();
        if self.peek() == Some('^') {
            self.pos += 1;
            let exponent = self.integer()?;
            Ok(base.pow(exponent))
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Word, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let w = self.word()?;
                self.expect(')')?;
                Ok(w)
            }
            Some('[') => {
                self.pos += 1;
                let x = self.word()?;
                self.expect(',')?;
                let y = self.word()?;
                self.expect(']')?;
                Ok(x.mul(&y).mul(&x.inverse()).mul(&y.inverse()))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let column = self.column();
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                match self.generators.iter().position(|g| *g == name) {
                    Some(i) => Ok(Word::generator(i)),
                    None => Err(ParseError::UnknownGenerator {
                        line: self.line,
                        column,
                        name,
                    }),
                }
            }
            Some(_) => Err(self.error("expected a generator, `(` or `[`")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn integer(&mut self) -> Result<i64, ParseError> {
        self.skip_ws();
        let column = self.column();
        let start = self.pos;
        if matches!(self.peek(), Some('-') | Some('+')) {
            self.pos += 1;
        }
        let digits_start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == digits_start {
            return Err(syntax(self.line, column, "expected an integer exponent"));
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        let value: i64 = text
            .parse()
            .map_err(|_| syntax(self.line, column, "exponent out of range"))?;
        if value == 0 {
            return Err(ParseError::ZeroExponent {
                line: self.line,
                column,
            });
        }
        Ok(value)
    }
}
