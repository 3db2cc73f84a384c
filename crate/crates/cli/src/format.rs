//! Line-oriented document format for chords and structure constants.
//!
//! A document starts with a field descriptor header and carries chord
//! and constant records:
//!
//! ```text
//! field rational            # or: field prime 7
//! chord id=a w=2 deg=0 action=3/2 from=L1 to=L2 winding=0 loc=inside
//! constant d=2 F=1,2 w=4,1,1 in=x,y out=z c=-1
//! ```
//!
//! `c=` must be the last field of a constant record; it takes the rest
//! of the line, so prime-field scalars like `2 mod 7` parse. Blank lines
//! and `#` comments are skipped. Unknown record kinds and unknown fields
//! are rejected.

use std::fmt::Write as _;

use popsicle_core::ainfty::{Chord, ChordTable, ConstantsTable, Key, Location};
use popsicle_core::field::{FieldDescriptor, Scalar};

#[derive(Debug)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone)]
pub struct Document {
    pub field: FieldDescriptor,
    pub chords: Vec<Chord>,
    pub constants: Vec<(Key, Scalar)>,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

fn parse_fields<'a>(
    line_no: usize,
    rest: &'a str,
    allowed: &[&str],
    rest_of_line_key: Option<&str>,
) -> Result<Vec<(&'a str, &'a str)>, ParseError> {
    let mut out = Vec::new();
    let mut remainder = rest.trim();
    while !remainder.is_empty() {
        let Some(eq) = remainder.find('=') else {
            return Err(err(line_no, format!("expected key=value, got {:?}", remainder)));
        };
        let key = remainder[..eq].trim();
        if !allowed.contains(&key) {
            return Err(err(line_no, format!("unknown field {:?}", key)));
        }
        let after = &remainder[eq + 1..];
        if Some(key) == rest_of_line_key {
            out.push((key, after.trim()));
            remainder = "";
        } else {
            let end = after.find(char::is_whitespace).unwrap_or(after.len());
            out.push((key, &after[..end]));
            remainder = after[end..].trim_start();
        }
    }
    Ok(out)
}

fn lookup<'a>(fields: &[(&'a str, &'a str)], key: &str) -> Option<&'a str> {
    fields.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
}

fn require<'a>(
    line_no: usize,
    fields: &[(&'a str, &'a str)],
    key: &str,
) -> Result<&'a str, ParseError> {
    lookup(fields, key).ok_or_else(|| err(line_no, format!("missing field {}=", key)))
}

fn parse_list<T: std::str::FromStr>(line_no: usize, s: &str, what: &str) -> Result<Vec<T>, ParseError> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| err(line_no, format!("bad {} entry {:?}", what, x)))
        })
        .collect()
}

pub fn parse_document(text: &str) -> Result<Document, ParseError> {
    let mut field: Option<FieldDescriptor> = None;
    let mut chords = Vec::new();
    let mut constants = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (kind, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        match kind {
            "field" => {
                if field.is_some() {
                    return Err(err(line_no, "duplicate field header"));
                }
                let descriptor = match rest.trim() {
                    "rational" | "rationals" => FieldDescriptor::Rationals,
                    other => match other.strip_prefix("prime") {
                        Some(p) => {
                            let p: u32 = p
                                .trim()
                                .parse()
                                .map_err(|_| err(line_no, "bad characteristic"))?;
                            FieldDescriptor::Prime(p)
                        }
                        None => return Err(err(line_no, format!("unknown field {:?}", other))),
                    },
                };
                descriptor
                    .validate()
                    .map_err(|e| err(line_no, e.to_string()))?;
                field = Some(descriptor);
            }
            "chord" => {
                let fields = parse_fields(
                    line_no,
                    rest,
                    &["id", "w", "deg", "action", "from", "to", "winding", "loc"],
                    None,
                )?;
                let id = require(line_no, &fields, "id")?;
                let w: u32 = require(line_no, &fields, "w")?
                    .parse()
                    .map_err(|_| err(line_no, "bad weight"))?;
                let deg: i64 = require(line_no, &fields, "deg")?
                    .parse()
                    .map_err(|_| err(line_no, "bad degree"))?;
                let mut chord = Chord::new(id, w, deg);
                if let Some(a) = lookup(&fields, "action") {
                    let scalar = FieldDescriptor::Rationals
                        .parse_scalar(a)
                        .map_err(|e| err(line_no, e.to_string()))?;
                    match scalar {
                        Scalar::Rational(r) => chord.action = Some(r),
                        Scalar::Prime { .. } => return Err(err(line_no, "action must be rational")),
                    }
                }
                chord.object_from = lookup(&fields, "from").map(String::from);
                chord.object_to = lookup(&fields, "to").map(String::from);
                if let Some(wd) = lookup(&fields, "winding") {
                    chord.winding =
                        Some(wd.parse().map_err(|_| err(line_no, "bad winding"))?);
                }
                if let Some(loc) = lookup(&fields, "loc") {
                    chord.location = Some(match loc {
                        "inside" => Location::Inside,
                        "outside" => Location::Outside,
                        other => return Err(err(line_no, format!("bad location {:?}", other))),
                    });
                }
                chords.push(chord);
            }
            "constant" => {
                let fields =
                    parse_fields(line_no, rest, &["d", "F", "w", "in", "out", "c"], Some("c"))?;
                let d: usize = require(line_no, &fields, "d")?
                    .parse()
                    .map_err(|_| err(line_no, "bad arity"))?;
                let mut flavour: Vec<usize> =
                    parse_list(line_no, require(line_no, &fields, "F")?, "flavour")?;
                flavour.sort_unstable();
                let weights: Vec<u32> =
                    parse_list(line_no, require(line_no, &fields, "w")?, "weight")?;
                let inputs: Vec<String> = require(line_no, &fields, "in")?
                    .split(',')
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect();
                let output = require(line_no, &fields, "out")?.to_string();
                let field = field.ok_or_else(|| err(line_no, "field header must come first"))?;
                let value = field
                    .parse_scalar(require(line_no, &fields, "c")?)
                    .map_err(|e| err(line_no, e.to_string()))?;
                constants.push((
                    Key {
                        d,
                        flavour,
                        weights,
                        inputs,
                        output,
                    },
                    value,
                ));
            }
            other => return Err(err(line_no, format!("unknown record kind {:?}", other))),
        }
    }
    let field = field.ok_or_else(|| err(0, "missing field header"))?;
    Ok(Document {
        field,
        chords,
        constants,
    })
}

pub fn serialize_document(doc: &Document) -> String {
    let mut out = String::new();
    match doc.field {
        FieldDescriptor::Rationals => out.push_str("field rational\n"),
        FieldDescriptor::Prime(p) => {
            let _ = writeln!(out, "field prime {}", p);
        }
    }
    for c in &doc.chords {
        let _ = write!(out, "chord id={} w={} deg={}", c.id, c.weight, c.degree);
        if let Some(a) = &c.action {
            let _ = write!(out, " action={}", Scalar::Rational(a.clone()).serialize());
        }
        if let Some(f) = &c.object_from {
            let _ = write!(out, " from={}", f);
        }
        if let Some(t) = &c.object_to {
            let _ = write!(out, " to={}", t);
        }
        if let Some(w) = c.winding {
            let _ = write!(out, " winding={}", w);
        }
        if let Some(loc) = c.location {
            let _ = write!(
                out,
                " loc={}",
                match loc {
                    Location::Inside => "inside",
                    Location::Outside => "outside",
                }
            );
        }
        out.push('\n');
    }
    for (key, value) in &doc.constants {
        let _ = writeln!(
            out,
            "constant d={} F={} w={} in={} out={} c={}",
            key.d,
            key.flavour
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(","),
            key.weights
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(","),
            key.inputs.join(","),
            key.output,
            value.serialize()
        );
    }
    out
}

/// Splits a parsed document into its chord table and constants table.
pub fn into_tables(doc: &Document) -> Result<(ChordTable, ConstantsTable), String> {
    let mut chords = ChordTable::new();
    for c in &doc.chords {
        chords.insert(c.clone()).map_err(|e| e.to_string())?;
    }
    let mut table = ConstantsTable::new(doc.field);
    for (key, value) in &doc.constants {
        table.insert(key.clone(), value.clone());
    }
    Ok((chords, table))
}
