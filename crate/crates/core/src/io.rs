//! Deterministic JSON and CSV emission.
//!
//! Every float is written with 17 significant digits in exponent form, so
//! identical values always produce identical bytes and parse back exactly.

use std::io;

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter};

struct FixedDigits;

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn write_null<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        CompactFormatter.write_null(writer)
    }
}

/// `{:.16e}` formatting: 17 significant digits, valid as a JSON number.
pub fn format_f64(value: f64) -> String {
    if value == 0.0 {
        // avoid "-0e0" vs "0e0" differences leaking into byte comparisons
        return "0.0000000000000000e0".to_string();
    }
    format!("{value:.16e}")
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDigits);
    value.serialize(&mut ser)?;
    // the formatter only ever writes ASCII
    Ok(String::from_utf8(out).expect("JSON output is UTF-8"))
}

/// Builds a CSV document from a header and rows of floats/integers already
/// rendered through [`format_f64`] or `to_string`.
pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
