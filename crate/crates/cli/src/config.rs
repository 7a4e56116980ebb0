//! JSON inputs: run configs for the sampling pipelines, descent chains, and
//! representation files.

use charvar::constructions::{CharacterSource, DescentInput, DEFAULT_VALUE_BOUND};
use charvar::linalg::{RatMatrix, Rational};
use charvar::parse::{parse_presentation, parse_word};
use charvar::rep::Representation;
use charvar::subgroup::SearchBudget;
use charvar::word::Presentation;
use serde::Deserialize;
use serde_json::Value;

/// Optional defaults for `cover` and `theorem1`; command-line flags win.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "N")]
    pub n: Option<u32>,
    pub degf: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub value_bound: Option<i64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DescentFile {
    presentation: String,
    #[serde(default)]
    gamma1: Vec<String>,
    #[serde(default)]
    gamma2: Vec<String>,
    monodromy: Vec<Value>,
    parity: Vec<u8>,
    #[serde(default)]
    links: Vec<LinkSpec>,
    #[serde(default)]
    allow_any_link_order: bool,
    characters: CharacterSpec,
    #[serde(default)]
    budget: Option<SearchBudget>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkSpec {
    word: String,
    order: u32,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum CharacterSpec {
    Explicit(Vec<Vec<Value>>),
    Sampled {
        count: usize,
        seed: u64,
        #[serde(default)]
        bound: Option<i64>,
    },
}

pub fn read(path: &str) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))
}

pub fn presentation_file(path: &str) -> Result<Presentation, String> {
    parse_presentation(&read(path)?).map_err(|e| format!("{path}:{e}"))
}

pub fn run_config(path: Option<&str>) -> Result<RunConfig, String> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => serde_json::from_str(&read(p)?).map_err(|e| format!("{p}: {e}")),
    }
}

/// A rational from a JSON integer or a string such as `"-3/4"`.
pub fn rational(v: &Value) -> Result<Rational, String> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(|i| Rational::from_integer(i.into()))
            .ok_or_else(|| format!("not an integer: {n}")),
        Value::String(s) => s.trim().parse().map_err(|_| format!("not a rational: {s:?}")),
        other => Err(format!("expected a rational, found {other}")),
    }
}

pub fn rational_list(text: &str) -> Result<Vec<Rational>, String> {
    text.split(',')
        .map(|s| s.trim().parse().map_err(|_| format!("not a rational: {s:?}")))
        .collect()
}

fn matrix(v: &Value) -> Result<RatMatrix, String> {
    let rows = v.as_array().ok_or("a matrix is a list of rows")?;
    let n = rows.len();
    let mut data = Vec::with_capacity(n * n);
    for row in rows {
        let row = row.as_array().ok_or("a matrix row is a list")?;
        if row.len() != n {
            return Err(format!("matrix rows must have length {n}"));
        }
        for x in row {
            data.push(rational(x)?);
        }
    }
    Ok(RatMatrix::new(n, n, data))
}

/// One square matrix per generator, checked against the relators.
pub fn representation(p: &Presentation, matrices: &[Value]) -> Result<Representation, String> {
    let mats = matrices.iter().map(matrix).collect::<Result<Vec<_>, _>>()?;
    Representation::new(p.clone(), mats).map_err(|e| e.to_string())
}

pub fn representation_file(p: &Presentation, path: &str) -> Result<Representation, String> {
    let v: Value = serde_json::from_str(&read(path)?).map_err(|e| format!("{path}: {e}"))?;
    let list = v
        .as_array()
        .ok_or_else(|| format!("{path}: expected a list of matrices"))?;
    representation(p, list).map_err(|e| format!("{path}: {e}"))
}

pub fn descent_file(path: &str) -> Result<DescentInput, String> {
    let f: DescentFile = serde_json::from_str(&read(path)?).map_err(|e| format!("{path}: {e}"))?;
    let p = parse_presentation(&f.presentation).map_err(|e| format!("presentation: {e}"))?;
    let words = |list: &[String]| {
        list.iter()
            .map(|s| parse_word(&p, s).map_err(|e| format!("word {s:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()
    };
    let gamma1 = words(&f.gamma1)?;
    let gamma2 = words(&f.gamma2)?;
    let links = f
        .links
        .iter()
        .map(|l| {
            Ok((
                parse_word(&p, &l.word).map_err(|e| format!("link {:?}: {e}", l.word))?,
                l.order,
            ))
        })
        .collect::<Result<Vec<_>, String>>()?;
    let monodromy = representation(&p, &f.monodromy).map_err(|e| format!("monodromy: {e}"))?;
    let characters = match f.characters {
        CharacterSpec::Explicit(list) => CharacterSource::Explicit(
            list.iter()
                .map(|chi| chi.iter().map(rational).collect::<Result<Vec<_>, _>>())
                .collect::<Result<_, _>>()?,
        ),
        CharacterSpec::Sampled { count, seed, bound } => CharacterSource::Sampled {
            count,
            seed,
            bound: bound.unwrap_or(DEFAULT_VALUE_BOUND),
        },
    };
    Ok(DescentInput {
        presentation: p,
        gamma1,
        gamma2,
        monodromy,
        parity: f.parity,
        links,
        allow_any_link_order: f.allow_any_link_order,
        characters,
        budget: f.budget.unwrap_or_default(),
    })
}
