//! Line-oriented `key = value` instance files.
//!
//! ```text
//! # sum of three triangular numbers, times 8 and completed
//! form = polynomial
//! quadratic = 4 0 0 4 0 4
//! linear = 4 4 4
//! constant = 0
//! ```

use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use ternary_au::coset::InstanceInput;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    /// 1-based line the problem was found on, if any.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "line {n}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError { line: Some(line), message: message.into() }
}

const KEYS: [(&str, usize); 6] = [("form", 1), ("quadratic", 6), ("linear", 3), ("constant", 1), ("gram", 6), ("w", 3)];

struct Entry {
    line: usize,
    raw: String,
}

pub fn parse(text: &str) -> Result<InstanceInput, ParseError> {
    let mut seen: Vec<(&'static str, Entry)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| err(n, format!("expected `key = value`, got `{content}`")))?;
        let key = key.trim();
        let &(known, _) = KEYS
            .iter()
            .find(|(k, _)| *k == key)
            .ok_or_else(|| err(n, format!("unknown key `{key}`")))?;
        if let Some((_, first)) = seen.iter().find(|(k, _)| *k == known) {
            return Err(err(n, format!("duplicate key `{key}` (first on line {})", first.line)));
        }
        seen.push((known, Entry { line: n, raw: value.trim().to_string() }));
    }
    let get = |key: &str| seen.iter().find(|(k, _)| *k == key).map(|(_, e)| e);
    let form = get("form").ok_or(ParseError { line: None, message: "missing `form` line".into() })?;
    let (wanted, other): (&[&str], &[&str]) = match form.raw.as_str() {
        "polynomial" => (&["quadratic", "linear"], &["gram", "w"]),
        "lattice" => (&["gram", "w"], &["quadratic", "linear", "constant"]),
        f => return Err(err(form.line, format!("form must be `polynomial` or `lattice`, got `{f}`"))),
    };
    for key in other {
        if let Some(e) = get(key) {
            return Err(err(e.line, format!("`{key}` does not belong to form = {}", form.raw)));
        }
    }
    for key in wanted {
        if get(key).is_none() {
            return Err(err(form.line, format!("form = {} needs a `{key}` line", form.raw)));
        }
    }
    let ints = |key: &str| -> Result<Vec<BigInt>, ParseError> {
        let e = get(key).expect("checked above");
        let count = KEYS.iter().find(|(k, _)| *k == key).unwrap().1;
        let vals: Vec<BigInt> = e
            .raw
            .split_whitespace()
            .map(|tok| tok.parse::<BigInt>().map_err(|_| err(e.line, format!("`{tok}` is not an integer"))))
            .collect::<Result<_, _>>()?;
        if vals.len() != count {
            return Err(err(e.line, format!("`{key}` takes {count} integers, got {}", vals.len())));
        }
        Ok(vals)
    };
    fn arr<const N: usize>(v: Vec<BigInt>) -> [BigInt; N] {
        v.try_into().expect("length checked")
    }
    Ok(if form.raw == "polynomial" {
        let constant = match get("constant") {
            Some(_) => ints("constant")?.pop().unwrap(),
            None => BigInt::from(0),
        };
        InstanceInput::Polynomial { quadratic: arr(ints("quadratic")?), linear: arr(ints("linear")?), constant }
    } else {
        InstanceInput::Lattice { gram: arr(ints("gram")?), w: arr(ints("w")?) }
    })
}

fn join(v: &[BigInt]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Canonical file text; `parse(&render(x)) == x`.
pub fn render(input: &InstanceInput) -> String {
    match input {
        InstanceInput::Polynomial { quadratic, linear, constant } => format!(
            "form = polynomial\nquadratic = {}\nlinear = {}\nconstant = {constant}\n",
            join(quadratic),
            join(linear)
        ),
        InstanceInput::Lattice { gram, w } => format!("form = lattice\ngram = {}\nw = {}\n", join(gram), join(w)),
    }
}
