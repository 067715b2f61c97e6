//! JSON measure files and small output helpers.
//!
//! A measure file looks like
//!
//! ```json
//! {"dim": 1, "atoms": [{"x": [0.0], "w": 0.5}, {"x": [2.0], "w": 1.5}]}
//! ```
//!
//! Floats are written with shortest round-trip formatting, so reading a file
//! back yields bit-identical weights and positions.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::measures::DiscreteMeasure;

pub fn read_measure(path: impl AsRef<Path>) -> Result<DiscreteMeasure> {
    let file = File::open(path.as_ref())?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

pub fn write_measure(path: impl AsRef<Path>, mu: &DiscreteMeasure) -> Result<()> {
    write_json(path, mu)
}

pub fn write_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path.as_ref())?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}
