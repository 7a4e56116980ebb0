//! Words over a finite alphabet, free reduction, and finitely presented groups.
//!
//! Letters are stored run-length encoded: `a^5` is a single [`Letter`] with
//! exponent 5. Generators are referred to by index; names only matter at the
//! text boundary (see [`crate::parse`]).

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub generator: usize,
    pub exponent: i64,
}

/// A freely reduced word. Adjacent letters never share a generator and no
/// exponent is zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity() -> Self {
        Word { letters: Vec::new() }
    }

    pub fn generator(generator: usize) -> Self {
        Word::power_of(generator, 1)
    }

    pub fn power_of(generator: usize, exponent: i64) -> Self {
        Word::reduce([(generator, exponent)])
    }

    /// Freely reduces an arbitrary sequence of `(generator, exponent)` pairs.
    pub fn reduce<I>(raw: I) -> Self
    where
        I: IntoIterator<Item = (usize, i64)>,
    {
        let mut stack: Vec<Letter> = Vec::new();
        for (generator, exponent) in raw {
            push_reduced(&mut stack, generator, exponent);
        }
        Word { letters: stack }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    /// Number of runs (syllables).
    pub fn syllables(&self) -> usize {
        self.letters.len()
    }

    /// Length in unit letters, i.e. the sum of absolute exponents.
    pub fn length(&self) -> u64 {
        self.letters.iter().map(|l| l.exponent.unsigned_abs()).sum()
    }

    /// Largest generator index used, if any.
    pub fn max_generator(&self) -> Option<usize> {
        self.letters.iter().map(|l| l.generator).max()
    }

    pub fn inverse(&self) -> Self {
        Word {
            letters: self
                .letters
                .iter()
                .rev()
                .map(|l| Letter {
                    generator: l.generator,
                    exponent: -l.exponent,
                })
                .collect(),
        }
    }

    pub fn mul(&self, other: &Word) -> Self {
        let mut stack = self.letters.clone();
        for l in &other.letters {
            push_reduced(&mut stack, l.generator, l.exponent);
        }
        Word { letters: stack }
    }

    pub fn pow(&self, k: i64) -> Self {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..k.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    /// `t · self · t⁻¹`
    pub fn conjugate_by(&self, t: &Word) -> Self {
        t.mul(self).mul(&t.inverse())
    }

    /// Expands into unit letters `(generator, ±1)`, left to right.
    pub fn unit_letters(&self) -> impl Iterator<Item = (usize, i64)> + '_ {
        self.letters.iter().flat_map(|l| {
            let sign = l.exponent.signum();
            std::iter::repeat_n((l.generator, sign), l.exponent.unsigned_abs() as usize)
        })
    }

    /// Exponent sum of each generator; `n` is the alphabet size.
    pub fn exponent_sums(&self, n: usize) -> Vec<i64> {
        let mut sums = vec![0i64; n];
        for l in &self.letters {
            sums[l.generator] = sums[l.generator]
                .checked_add(l.exponent)
                .expect("exponent sum overflow");
        }
        sums
    }

    /// Image under the homomorphism sending generator `i` to `images[i]`.
    pub fn substitute(&self, images: &[Word]) -> Word {
        let mut out = Word::identity();
        for l in &self.letters {
            out = out.mul(&images[l.generator].pow(l.exponent));
        }
        out
    }

    pub fn display<'a>(&'a self, names: &'a [String]) -> WordDisplay<'a> {
        WordDisplay { word: self, names }
    }
}

fn push_reduced(stack: &mut Vec<Letter>, generator: usize, exponent: i64) {
    if exponent == 0 {
        return;
    }
    if let Some(top) = stack.last_mut() {
        if top.generator == generator {
            top.exponent = top
                .exponent
                .checked_add(exponent)
                .expect("exponent overflow during free reduction");
            if top.exponent == 0 {
                stack.pop();
            }
            return;
        }
    }
    stack.push(Letter { generator, exponent });
}

pub struct WordDisplay<'a> {
    word: &'a Word,
    names: &'a [String],
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_identity() {
            return f.write_str("1");
        }
        for (i, l) in self.word.letters.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            let name = self.names.get(l.generator).map(String::as_str).unwrap_or("?");
            if l.exponent == 1 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{name}^{}", l.exponent)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("generator index {index} out of range for an alphabet of {size}")]
    AlphabetMismatch { index: usize, size: usize },
    #[error("invalid generator name `{0}`")]
    InvalidName(String),
    #[error("duplicate generator name `{0}`")]
    DuplicateName(String),
}

/// Returns true when `name` matches `[A-Za-z][A-Za-z0-9_]*`.
pub fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A finitely presented group `⟨generators | relators⟩`.
///
/// Relators are freely reduced on construction and identity relators are
/// dropped, so a presentation never carries the empty word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Presentation {
    generators: Vec<String>,
    relators: Vec<Word>,
}

impl Presentation {
    pub fn new(generators: Vec<String>, relators: Vec<Word>) -> Result<Self, WordError> {
        let mut seen = HashMap::new();
        for (i, g) in generators.iter().enumerate() {
            if !is_valid_name(g) {
                return Err(WordError::InvalidName(g.clone()));
            }
            if seen.insert(g.as_str(), i).is_some() {
                return Err(WordError::DuplicateName(g.clone()));
            }
        }
        let size = generators.len();
        for r in &relators {
            check_alphabet(r, size)?;
        }
        let relators = relators.into_iter().filter(|r| !r.is_identity()).collect();
        Ok(Presentation { generators, relators })
    }

    /// Free group on the given names.
    pub fn free<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, WordError> {
        Presentation::new(names.into_iter().map(Into::into).collect(), Vec::new())
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g == name)
    }

    pub fn check_word(&self, w: &Word) -> Result<(), WordError> {
        check_alphabet(w, self.generators.len())
    }

    /// Product of two words over this alphabet.
    pub fn product(&self, u: &Word, v: &Word) -> Result<Word, WordError> {
        self.check_word(u)?;
        self.check_word(v)?;
        Ok(u.mul(v))
    }

    pub fn format_word(&self, w: &Word) -> String {
        w.display(&self.generators).to_string()
    }

    /// Same generators, relators replaced.
    pub fn with_relators(&self, relators: Vec<Word>) -> Result<Self, WordError> {
        Presentation::new(self.generators.clone(), relators)
    }
}

fn check_alphabet(w: &Word, size: usize) -> Result<(), WordError> {
    match w.max_generator() {
        Some(index) if index >= size => Err(WordError::AlphabetMismatch { index, size }),
        _ => Ok(()),
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "gens: {}", self.generators.join(", "))?;
        let rels: Vec<String> = self.relators.iter().map(|r| self.format_word(r)).collect();
        if rels.is_empty() {
            writeln!(f, "rels:")
        } else {
            writeln!(f, "rels: {}", rels.join(", "))
        }
    }
}
