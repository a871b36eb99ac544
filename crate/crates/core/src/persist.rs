//! Synopsis files: a JSON document whose floating-point fields are written
//! with 17 significant digits so that every value round-trips bit-exactly.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::basis::BasisParams;
use crate::error::{Error, Result};
use crate::mechanism::{PrivacyBudget, Synopsis};

pub const FORMAT_NAME: &str = "bernstein-synopsis";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize)]
struct SynopsisOut<'a> {
    format: &'a str,
    version: u32,
    ell: usize,
    k: usize,
    h: usize,
    epsilon: Box<RawValue>,
    delta: Box<RawValue>,
    sensitivity: Box<RawValue>,
    lambda: Box<RawValue>,
    seed: u64,
    values: Vec<Box<RawValue>>,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
}

#[derive(Deserialize)]
struct SynopsisIn {
    ell: usize,
    k: usize,
    h: usize,
    epsilon: f64,
    delta: f64,
    sensitivity: f64,
    lambda: f64,
    seed: u64,
    values: Vec<f64>,
}

fn digits17(v: f64) -> Box<RawValue> {
    RawValue::from_string(format!("{v:.16e}")).expect("finite float formats as a JSON number")
}

pub fn to_string(syn: &Synopsis) -> String {
    let out = SynopsisOut {
        format: FORMAT_NAME,
        version: FORMAT_VERSION,
        ell: syn.params.ell,
        k: syn.params.k,
        h: syn.params.h,
        epsilon: digits17(syn.budget.epsilon),
        delta: digits17(syn.budget.delta),
        sensitivity: digits17(syn.sensitivity),
        lambda: digits17(syn.lambda),
        seed: syn.rng_seed,
        values: syn.noisy_values.values().iter().map(|&v| digits17(v)).collect(),
    };
    let mut text = serde_json::to_string_pretty(&out).expect("synopsis serializes");
    text.push('\n');
    text
}

pub fn from_str(text: &str) -> Result<Synopsis> {
    let header: Header = serde_json::from_str(text).map_err(json_error)?;
    if header.format != FORMAT_NAME {
        return Err(Error::Config(format!("not a synopsis file (format {:?})", header.format)));
    }
    if header.version != FORMAT_VERSION {
        return Err(Error::Version(header.version));
    }
    let body: SynopsisIn = serde_json::from_str(text).map_err(json_error)?;
    let params = BasisParams {
        k: body.k,
        h: body.h,
        ell: body.ell,
    };
    let budget = PrivacyBudget::new(body.epsilon, body.delta)?;
    Synopsis::from_parts(params, body.values, body.lambda, budget, body.sensitivity, body.seed)
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        message: e.to_string(),
    }
}

pub fn write<W: Write>(syn: &Synopsis, mut w: W) -> Result<()> {
    w.write_all(to_string(syn).as_bytes())?;
    Ok(())
}

pub fn read<R: Read>(mut r: R) -> Result<Synopsis> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    from_str(&text)
}
