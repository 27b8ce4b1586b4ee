use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use super::{Coeff, SpectralField, TorusSpec, WaveVector};
use crate::error::{Error, Result};
use crate::FORMAT_VERSION;

#[derive(Serialize)]
struct FieldOut<'a> {
    label: &'a str,
    modes: BTreeMap<String, Box<RawValue>>,
}

#[derive(Serialize)]
struct ContainerOut<'a> {
    format_version: u32,
    period: f64,
    grid: usize,
    fields: Vec<FieldOut<'a>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldIn {
    label: String,
    modes: BTreeMap<String, [f64; 6]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ContainerIn {
    format_version: u32,
    period: f64,
    grid: usize,
    fields: Vec<FieldIn>,
}

fn encode_coeff(c: &Coeff) -> Result<Box<RawValue>> {
    let s = format!(
        "[{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}]",
        c[0].re, c[0].im, c[1].re, c[1].im, c[2].re, c[2].im
    );
    Ok(RawValue::from_string(s)?)
}

fn encode_field<'a>(label: &'a str, f: &SpectralField) -> Result<FieldOut<'a>> {
    let mut modes = BTreeMap::new();
    for (k, c) in f.iter() {
        if c.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            return Err(Error::Format(format!("non-finite coefficient at {k}")));
        }
        modes.insert(k.key(), encode_coeff(c)?);
    }
    Ok(FieldOut { label, modes })
}

/// Serialize labelled fields sharing one torus. Coefficients are written
/// with 17 significant digits, which round-trips every `f64`.
pub fn fields_to_json(fields: &[(&str, &SpectralField)]) -> Result<String> {
    let Some((_, first)) = fields.first() else {
        return Err(Error::Format("no fields to serialize".into()));
    };
    let torus = *first.torus();
    let mut out = Vec::with_capacity(fields.len());
    for (label, f) in fields {
        if !f.torus().same_as(&torus) {
            return Err(Error::TorusMismatch);
        }
        out.push(encode_field(label, f)?);
    }
    Ok(serde_json::to_string_pretty(&ContainerOut {
        format_version: FORMAT_VERSION,
        period: torus.period(),
        grid: torus.grid(),
        fields: out,
    })?)
}

pub fn field_to_json(f: &SpectralField) -> Result<String> {
    fields_to_json(&[("u", f)])
}

pub fn fields_from_json(s: &str) -> Result<Vec<(String, SpectralField)>> {
    let c: ContainerIn = serde_json::from_str(s)?;
    if c.format_version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported format version {} (expected {FORMAT_VERSION})",
            c.format_version
        )));
    }
    let torus = TorusSpec::new(c.period, c.grid)?;
    let mut out = Vec::with_capacity(c.fields.len());
    for f in c.fields {
        let mut field = SpectralField::zero(torus);
        for (key, v) in f.modes {
            let k = WaveVector::parse_key(&key)?;
            field.insert_raw(
                k,
                [
                    Complex64::new(v[0], v[1]),
                    Complex64::new(v[2], v[3]),
                    Complex64::new(v[4], v[5]),
                ],
            );
        }
        field.check_hermitian()?;
        out.push((f.label, field));
    }
    Ok(out)
}

/// Read a container holding exactly one field.
pub fn field_from_json(s: &str) -> Result<SpectralField> {
    let mut v = fields_from_json(s)?;
    if v.len() != 1 {
        return Err(Error::Format(format!("expected one field, found {}", v.len())));
    }
    Ok(v.remove(0).1)
}
