//! Deterministic JSON, CSV and text renderings.
//!
//! Machine formats sort object keys and print every float as `%.12e`, so
//! two runs on the same inputs produce identical bytes.

use std::io::{self, Write};
use std::str::FromStr;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::pipeline::Evaluation;
use crate::units::{format_cyclic, format_sig, from_si, Unit};

pub const TOOL: &str = "levitrap";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" => Ok(Format::Text),
            other => Err(Error::Usage(format!("unknown format {other:?} (json, csv or text)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportDocument {
    pub tool: &'static str,
    pub version: &'static str,
    /// Seconds since the Unix epoch, only when asked for.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    pub report: Evaluation,
}

impl ReportDocument {
    pub fn new(report: Evaluation, timestamp: bool) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            timestamp: timestamp.then(unix_now),
            report,
        }
    }
}

pub fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Converts to a JSON tree; object keys come out sorted.
pub fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

struct SciFormatter<'a>(PrettyFormatter<'a>);

impl Formatter for SciFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.12e}")
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        write!(w, "{:.12e}", value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn json_string(v: &Value) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter(PrettyFormatter::new()));
    v.serialize(&mut ser).expect("in-memory write");
    out.push(b'\n');
    String::from_utf8(out).expect("utf-8")
}

/// Number rendering shared by the flat formats.
pub fn scalar_string(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) if !n.is_f64() => u.to_string(),
            (_, Some(i)) if !n.is_f64() => i.to_string(),
            _ => format!("{:.12e}", n.as_f64().unwrap_or(f64::NAN)),
        },
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Dotted key paths to leaf values, in sorted key order.
pub fn flatten(v: &Value) -> Vec<(String, String)> {
    fn walk(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
        let key = |k: &str| {
            if prefix.is_empty() {
                k.to_string()
            } else {
                format!("{prefix}.{k}")
            }
        };
        match v {
            Value::Object(m) => m.iter().for_each(|(k, x)| walk(&key(k), x, out)),
            Value::Array(a) => a
                .iter()
                .enumerate()
                .for_each(|(i, x)| walk(&key(&i.to_string()), x, out)),
            leaf => out.push((prefix.to_string(), scalar_string(leaf))),
        }
    }
    let mut out = Vec::new();
    walk("", v, &mut out);
    out
}

pub fn key_value_csv(v: &Value) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["key", "value"])?;
    for (k, x) in flatten(v) {
        w.write_record([k, x])?;
    }
    csv_string(w)
}

/// Header plus one row per record; columns are the union of flattened keys
/// in first-seen order.
pub fn table_csv(rows: &[Value]) -> Result<String> {
    let flat: Vec<Vec<(String, String)>> = rows.iter().map(flatten).collect();
    let mut columns: Vec<String> = Vec::new();
    for row in &flat {
        for (k, _) in row {
            if !columns.contains(k) {
                columns.push(k.clone());
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&columns)?;
    for row in &flat {
        let rec: Vec<&str> = columns
            .iter()
            .map(|c| row.iter().find(|(k, _)| k == c).map_or("", |(_, v)| v.as_str()))
            .collect();
        w.write_record(rec)?;
    }
    csv_string(w)
}

pub(crate) fn csv_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("utf-8"))
}

/// Machine-readable error object.
pub fn error_value(e: &Error) -> Value {
    let mut inner = Map::new();
    inner.insert("class".into(), e.class().name().into());
    inner.insert("exit_code".into(), e.class().exit_code().into());
    inner.insert("message".into(), e.to_string().into());
    let mut outer = Map::new();
    outer.insert("error".into(), Value::Object(inner));
    Value::Object(outer)
}

fn axes(values: [f64; 3], f: impl Fn(f64) -> String) -> String {
    values.map(f).join(", ")
}

/// Human summary in the style of the worked examples.
pub fn report_text(doc: &ReportDocument) -> String {
    let ev = &doc.report;
    let r = &ev.inputs.rates;
    let th = &ev.inputs.thermal;
    let mut t = String::new();
    let mut line = |k: &str, v: String| t.push_str(&format!("{k:<34} {v}\n"));
    line("tool", format!("{} {}", doc.tool, doc.version));
    line("radius", format!("{} nm", format_sig(ev.scenario.particle.radius * 1e9, 4)));
    line("laser power", format!("{} mW", format_sig(ev.scenario.beam.mean_power * 1e3, 4)));
    line(
        "ambient pressure",
        format!("{} mbar", format_sig(from_si(ev.scenario.gas.ambient_pressure, Unit::Millibar), 4)),
    );
    line("trap frequencies Ω", axes(r.frequencies, format_cyclic));
    line("surface temperature T_s", format!("{} K", format_sig(th.surface_temperature, 5)));
    line("effective temperature T", format!("{} K", format_sig(th.effective_temperature, 5)));
    line("damping Γ", format_cyclic(r.damping));
    line("critical damping Γ_cr", format_cyclic(r.critical_damping));
    line(
        "critical pressure P_am,cr",
        format!("{} mbar", format_sig(from_si(ev.critical_pressure, Unit::Millibar), 4)),
    );
    line("thermal occupation m̄_th", axes(r.thermal_occupation, |x| format_sig(x, 4)));
    line("gradient rates Γ_g", axes(r.gradient, format_cyclic));
    line("recoil rates Γ_r", axes(r.recoil, format_cyclic));
    line("occupation without feedback", axes(ev.occupations, |x| format_sig(x, 4)));
    line("noise floors S_n [m²s]", axes(ev.inputs.noise.floors, |x| format_sig(x, 4)));
    if let Some(fb) = &ev.feedback {
        line("feedback scheme", fb.scheme.name().to_string());
        line("feedback gains Γ_fb", axes(fb.rates.gains, format_cyclic));
        line(
            "critical feedback Γ_fb,cr",
            fb.critical
                .iter()
                .map(|c| match c {
                    crate::feedback::CriticalGain::Finite(v) => format_cyclic(*v),
                    crate::feedback::CriticalGain::Unbounded => "unbounded".to_string(),
                })
                .collect::<Vec<_>>()
                .join(", "),
        );
        line("occupation with feedback", axes(fb.occupations, |x| format_sig(x, 4)));
        if let Some(o) = &fb.optimum {
            line(&format!("optimum Γ_fb,opt,{}", o.axis + 1), format_cyclic(o.gain));
            line(&format!("minimum m̄_min,{}", o.axis + 1), format_sig(o.min_occupation, 4));
        }
        line("fixed-point iterations", fb.iterations.to_string());
    }
    for m in &ev.ledger.margins {
        let verdict = if m.exempt {
            "exempt"
        } else if m.condition == "assumption" {
            "info"
        } else if m.passed {
            "ok"
        } else {
            "FAIL"
        };
        line(
            &format!("condition ({}) {}", m.condition, m.label),
            format!("{} [{verdict}]", format_sig(m.value, 4)),
        );
    }
    for w in &ev.warnings {
        line("warning", w.clone());
    }
    t
}

pub fn render_report(doc: &ReportDocument, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(json_string(&to_value(doc)?)),
        Format::Csv => key_value_csv(&to_value(doc)?),
        Format::Text => Ok(report_text(doc)),
    }
}
