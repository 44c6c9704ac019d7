//! The small fixed set of input units accepted in scenario files and on the
//! command line. Everything downstream works in SI; rates are angular (rad/s).
//!
//! `Hz` denotes a cyclic frequency and converts to rad/s by a factor 2π. The
//! `2π×f Hz` notation used for damping and feedback rates is accepted as a
//! marker of the same conversion and is not applied twice.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UnitError {
    #[error("unknown unit `{0}`")]
    Unknown(String),
    #[error("cannot parse quantity `{0}`")]
    BadQuantity(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    Nanometre,
    Micrometre,
    Metre,
    Milliwatt,
    Watt,
    Millibar,
    Pascal,
    Kelvin,
    Hertz,
    RadPerSecond,
}

impl Unit {
    /// Multiplicative factor from this unit to its SI (or rad/s) counterpart.
    pub fn si_factor(self) -> f64 {
        match self {
            Unit::Nanometre => 1e-9,
            Unit::Micrometre => 1e-6,
            Unit::Metre => 1.0,
            Unit::Milliwatt => 1e-3,
            Unit::Watt => 1.0,
            Unit::Millibar => 100.0,
            Unit::Pascal => 1.0,
            Unit::Kelvin => 1.0,
            Unit::Hertz => 2.0 * PI,
            Unit::RadPerSecond => 1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Unit::Nanometre => "nm",
            Unit::Micrometre => "µm",
            Unit::Metre => "m",
            Unit::Milliwatt => "mW",
            Unit::Watt => "W",
            Unit::Millibar => "mbar",
            Unit::Pascal => "Pa",
            Unit::Kelvin => "K",
            Unit::Hertz => "Hz",
            Unit::RadPerSecond => "rad/s",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Unit {
    type Err = UnitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim() {
            "nm" => Unit::Nanometre,
            "µm" | "μm" | "um" => Unit::Micrometre,
            "m" => Unit::Metre,
            "mW" => Unit::Milliwatt,
            "W" => Unit::Watt,
            "mbar" => Unit::Millibar,
            "Pa" => Unit::Pascal,
            "K" => Unit::Kelvin,
            "Hz" => Unit::Hertz,
            "rad/s" => Unit::RadPerSecond,
            other => return Err(UnitError::Unknown(other.to_string())),
        })
    }
}

pub fn to_si(value: f64, unit: Unit) -> f64 {
    value * unit.si_factor()
}

pub fn from_si(value: f64, unit: Unit) -> f64 {
    value / unit.si_factor()
}

/// Converts `value` given in the unit named by `unit` to SI.
pub fn convert(value: f64, unit: &str) -> Result<f64, UnitError> {
    Ok(to_si(value, unit.parse()?))
}

/// Parses a quantity such as `7e-9 mbar`, `100mW`, `2π×94 Hz` or `2pi*94 Hz`.
/// A bare number is returned unchanged (taken as SI).
pub fn parse_quantity(text: &str) -> Result<f64, UnitError> {
    let bad = || UnitError::BadQuantity(text.to_string());
    let mut s = text.trim();
    for prefix in ["2π×", "2π*", "2pi×", "2pi*", "2π", "2pi"] {
        if let Some(rest) = s.strip_prefix(prefix) {
            s = rest.trim_start();
            break;
        }
    }
    let split = s
        .char_indices()
        .find(|&(i, ch)| {
            !(ch.is_ascii_digit()
                || ch == '.'
                || ch == '+'
                || ch == '-'
                || ((ch == 'e' || ch == 'E') && looks_like_exponent(&s[i..])))
        })
        .map_or(s.len(), |(i, _)| i);
    let (num, unit) = s.split_at(split);
    let value: f64 = num.trim().parse().map_err(|_| bad())?;
    let unit = unit.trim();
    if unit.is_empty() {
        Ok(value)
    } else {
        convert(value, unit)
    }
}

fn looks_like_exponent(rest: &str) -> bool {
    let mut chars = rest.chars().skip(1);
    match chars.next() {
        Some(c) if c.is_ascii_digit() => true,
        Some('+') | Some('-') => chars.next().is_some_and(|c| c.is_ascii_digit()),
        _ => false,
    }
}

/// Formats an angular rate in the `2π×f Hz` style.
pub fn format_cyclic(rate: f64) -> String {
    format!("2π×{} Hz", format_sig(rate / (2.0 * PI), 4))
}

/// Formats with `sig` significant digits, switching to scientific notation
/// outside `[1e-3, 1e5)`.
pub fn format_sig(value: f64, sig: usize) -> String {
    if value == 0.0 || !value.is_finite() {
        return format!("{value}");
    }
    let mag = value.abs().log10().floor() as i32;
    if (-3..5).contains(&mag) {
        let decimals = (sig as i32 - 1 - mag).max(0) as usize;
        format!("{value:.decimals$}")
    } else {
        format!("{:.*e}", sig.saturating_sub(1), value)
    }
}
