//! Deterministic report serialization: sorted keys, two-space indent and
//! every float written with 17 significant digits.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{Map, Value};

pub const SCHEMA_VERSION: u32 = 1;

/// `PrettyFormatter` with fixed-precision floats.
struct Canonical<'a>(PrettyFormatter<'a>);

impl Formatter for Canonical<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// `-1.2345678901234567e-1`; zero is `0.0000000000000000e0`.
pub fn format_f64(value: f64) -> String {
    if value == 0.0 {
        // drop the sign of negative zero
        return format!("{:.16e}", 0.0f64);
    }
    format!("{value:.16e}")
}

/// Pretty JSON with sorted keys (`serde_json::Map` is ordered) and fixed
/// float precision. Non-finite numbers never reach here: `Value` stores them
/// as `null`.
pub fn canonical_json(value: &Value) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Canonical(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("writing to a Vec cannot fail");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

/// `Some(x)` for finite `x`, `None` otherwise, so that reports never carry
/// silent nulls for values that exist.
pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Top-level report envelope.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub command: &'static str,
    pub input: Value,
    pub results: Value,
    pub seeds: Value,
    /// Results with energies doubled, present under `--standard-units`.
    pub standard_units: Option<Value>,
}

impl RunReport {
    pub fn to_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("schema_version".into(), SCHEMA_VERSION.into());
        m.insert("command".into(), self.command.into());
        m.insert("input".into(), self.input.clone());
        m.insert("results".into(), self.results.clone());
        m.insert("seeds".into(), self.seeds.clone());
        m.insert("units".into(), "paper".into());
        m.insert(
            "versions".into(),
            serde_json::json!({ "hflab": env!("CARGO_PKG_VERSION"), "schema": SCHEMA_VERSION }),
        );
        if let Some(s) = &self.standard_units {
            m.insert("standard_units".into(), s.clone());
        }
        Value::Object(m)
    }

    pub fn to_json(&self) -> String {
        canonical_json(&self.to_value())
    }
}
