//! Private datasets and their delimiter-separated text format.
//!
//! ```text
//! # ell=2 label=sign
//! 0.31,0.52,+
//! 0.64,0.40,-
//! ```
//!
//! The header declares the feature dimension and the label type (`none`,
//! `real` or `sign`). Fields are separated by commas, tabs or spaces.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelKind {
    None,
    Real,
    /// Binary labels, stored as `+1.0` / `-1.0`.
    Sign,
}

impl FromStr for LabelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "real" => Ok(Self::Real),
            "sign" => Ok(Self::Sign),
            other => Err(Error::Config(format!("unknown label type {other:?}"))),
        }
    }
}

impl LabelKind {
    fn as_str(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Real => "real",
            Self::Sign => "sign",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub features: Vec<f64>,
    pub label: Option<f64>,
}

impl Record {
    pub fn unlabeled(features: Vec<f64>) -> Self {
        Self { features, label: None }
    }

    pub fn labeled(features: Vec<f64>, label: f64) -> Self {
        Self {
            features,
            label: Some(label),
        }
    }

    pub fn label_or_zero(&self) -> f64 {
        self.label.unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    ell: usize,
    label_kind: LabelKind,
    records: Vec<Record>,
}

impl Dataset {
    pub fn new(ell: usize, label_kind: LabelKind, records: Vec<Record>) -> Result<Self> {
        if ell == 0 {
            return Err(Error::Config("feature dimension must be positive".into()));
        }
        if records.is_empty() {
            return Err(Error::Precondition("dataset must contain at least one record".into()));
        }
        for (i, r) in records.iter().enumerate() {
            check_record(r, ell, label_kind).map_err(|m| Error::Precondition(format!("record {i}: {m}")))?;
        }
        Ok(Self {
            ell,
            label_kind,
            records,
        })
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn label_kind(&self) -> LabelKind {
        self.label_kind
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Copy with record `index` replaced, i.e. a neighbouring dataset.
    pub fn replaced(&self, index: usize, record: Record) -> Result<Self> {
        let mut records = self.records.clone();
        records[index] = record;
        Self::new(self.ell, self.label_kind, records)
    }

    pub fn max_feature_norm(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.features.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# ell={} label={}\n", self.ell, self.label_kind.as_str());
        for r in &self.records {
            let mut fields: Vec<String> = r.features.iter().map(|x| format!("{x}")).collect();
            match (self.label_kind, r.label) {
                (LabelKind::Sign, Some(l)) => fields.push(if l > 0.0 { "+".into() } else { "-".into() }),
                (LabelKind::Real, Some(l)) => fields.push(format!("{l}")),
                _ => {}
            }
            let _ = writeln!(out, "{}", fields.join(","));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut header: Option<(usize, LabelKind)> = None;
        let mut records = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let Some((ell, kind)) = header else {
                header = Some(parse_header(line).map_err(|message| Error::Parse { line: line_no, message })?);
                continue;
            };
            if line.starts_with('#') {
                continue;
            }
            let record = parse_record(line, ell, kind).map_err(|message| Error::Parse { line: line_no, message })?;
            records.push(record);
        }
        let (ell, kind) = header.ok_or(Error::Parse {
            line: 1,
            message: "missing header line".into(),
        })?;
        Self::new(ell, kind, records)
    }
}

fn check_record(r: &Record, ell: usize, kind: LabelKind) -> std::result::Result<(), String> {
    if r.features.len() != ell {
        return Err(format!("{} features, expected {ell}", r.features.len()));
    }
    if let Some(x) = r.features.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(format!("feature {x} outside [0, 1]"));
    }
    match (kind, r.label) {
        (LabelKind::None, None) => Ok(()),
        (LabelKind::None, Some(_)) => Err("unexpected label".into()),
        (_, None) => Err("missing label".into()),
        (LabelKind::Real, Some(l)) if l.is_finite() => Ok(()),
        (LabelKind::Sign, Some(l)) if l == 1.0 || l == -1.0 => Ok(()),
        (_, Some(l)) => Err(format!("invalid label {l}")),
    }
}

fn parse_header(line: &str) -> std::result::Result<(usize, LabelKind), String> {
    let body = line.strip_prefix('#').ok_or("header must start with '#'")?;
    let mut ell = None;
    let mut kind = LabelKind::None;
    for token in body.split_whitespace() {
        let (key, value) = token.split_once('=').ok_or_else(|| format!("malformed header token {token:?}"))?;
        match key {
            "ell" => ell = Some(value.parse::<usize>().map_err(|e| format!("bad ell: {e}"))?),
            "label" => kind = value.parse().map_err(|e: Error| e.to_string())?,
            _ => return Err(format!("unknown header key {key:?}")),
        }
    }
    let ell = ell.ok_or("header must declare ell")?;
    if ell == 0 {
        return Err("ell must be positive".into());
    }
    Ok((ell, kind))
}

fn parse_record(line: &str, ell: usize, kind: LabelKind) -> std::result::Result<Record, String> {
    let fields: Vec<&str> = line
        .split(|c: char| c == ',' || c == '\t' || c == ' ')
        .filter(|f| !f.is_empty())
        .collect();
    let expected = ell + usize::from(kind != LabelKind::None);
    if fields.len() != expected {
        return Err(format!("expected {expected} fields, found {}", fields.len()));
    }
    let features = fields[..ell]
        .iter()
        .map(|f| f.parse::<f64>().map_err(|e| format!("bad feature {f:?}: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let label = match kind {
        LabelKind::None => None,
        LabelKind::Real => Some(fields[ell].parse::<f64>().map_err(|e| format!("bad label: {e}"))?),
        LabelKind::Sign => Some(match fields[ell] {
            "+" | "+1" | "1" => 1.0,
            "-" | "-1" => -1.0,
            other => return Err(format!("bad sign label {other:?}")),
        }),
    };
    let record = Record { features, label };
    check_record(&record, ell, kind)?;
    Ok(record)
}
