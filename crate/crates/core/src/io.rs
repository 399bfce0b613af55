//! File formats: instance JSON in, JSON reports and CSV traces out.
//!
//! JSON has no infinity, so `+inf` travels as the string `"inf"`. Every file
//! is written to a temporary sibling first and renamed into place, so a
//! failed command never leaves a partial file behind.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::game::GameInstance;

/// Serde adapter for `f64` fields that may be `+inf` (written as `"inf"`).
pub mod inf_f64 {
    use serde::{de, Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    pub(super) enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *v == f64::INFINITY {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub(super) fn decode<E: de::Error>(repr: Repr) -> Result<f64, E> {
        match repr {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) if matches!(t.as_str(), "inf" | "+inf" | "Infinity") => Ok(f64::INFINITY),
            Repr::Text(t) => Err(E::custom(format!(
                "expected a number or \"inf\", got {t:?}"
            ))),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        decode(Repr::deserialize(d)?)
    }
}

/// Serde adapter for `Vec<f64>` whose entries may be `+inf`.
pub mod inf_vec {
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    use super::inf_f64::{self, Repr as InfRepr};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            if *x == f64::INFINITY {
                seq.serialize_element("inf")?;
            } else {
                seq.serialize_element(x)?;
            }
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<InfRepr>::deserialize(d)?
            .into_iter()
            .map(inf_f64::decode)
            .collect()
    }
}

pub fn parse_instance(text: &str) -> Result<GameInstance> {
    let instance: GameInstance = serde_json::from_str(text)?;
    instance.validate()?;
    Ok(instance)
}

pub fn read_instance(path: &Path) -> Result<GameInstance> {
    parse_instance(&fs::read_to_string(path)?)
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, to_json_string(value)?.as_bytes())
}

/// 17 significant digits, enough for a lossless round trip.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Renders a CSV table with a header row; all cells are numbers.
pub fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(fmt_num).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
