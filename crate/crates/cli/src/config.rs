//! Run configuration: command-line flags layered over an optional INI or JSON file.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cmph::{Branch, Quantity, SweepVariable, UnitLabel};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};

use crate::failure::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Spectrum,
    Constrain,
    Wavefunction,
    Verify,
    Sweep,
    Table1,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Inclusive integer range written `lo..hi`, or a single value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub lo: usize,
    pub hi: usize,
}

impl Span {
    pub fn single(v: usize) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn values(self) -> std::ops::RangeInclusive<usize> {
        self.lo..=self.hi
    }

    pub fn len(self) -> usize {
        self.hi + 1 - self.lo
    }
}

impl FromStr for Span {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("expected a non-negative integer or lo..hi, got {s:?}"))
        };
        let span = match s.split_once("..") {
            Some((lo, hi)) => Span {
                lo: parse(lo)?,
                hi: parse(hi.trim_start_matches('='))?,
            },
            None => Span::single(parse(s)?),
        };
        if span.lo > span.hi {
            return Err(format!("empty range {s}"));
        }
        Ok(span)
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "{}..{}", self.lo, self.hi)
        }
    }
}

impl Serialize for Span {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Span {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::Number(n) => n.as_u64().map(|v| Span::single(v as usize)).ok_or_else(|| {
                serde::de::Error::custom(format!("expected a non-negative integer, got {n}"))
            }),
            Value::String(s) => s.parse().map_err(serde::de::Error::custom),
            other => Err(serde::de::Error::custom(format!(
                "expected a range, got {other}"
            ))),
        }
    }
}

/// Everything a run needs. All fields are optional so that a file and the
/// flags can each supply part of it; [`crate::commands`] checks what the
/// chosen command requires.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<UnitLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<Span>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<Span>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<Branch>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variable: Option<SweepVariable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantity: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Not echoed into JSON output, so a re-run writes wherever it is told.
    #[serde(default, skip_serializing)]
    pub output: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($f:ident),*) => {
        RunConfig { $($f: $top.$f.or($base.$f)),* }
    };
}

impl RunConfig {
    /// Fields set in `top` win.
    pub fn overlay(self, top: RunConfig) -> RunConfig {
        let base = self;
        overlay!(base, top; command, units, mass, a, omega, b, c, d, n, l, branch, steps,
            variable, lo, hi, points, quantity, probe_radius, r_max, format, output)
    }

    pub fn from_file(path: &Path) -> Result<RunConfig, Failure> {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::io(e, format!("reading {}", path.display())))?;
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .unwrap_or("")
            .to_ascii_lowercase();
        let value = match ext.as_str() {
            "json" => {
                let v: Value = serde_json::from_str(&text)
                    .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                // output documents carry the config that produced them
                match v {
                    Value::Object(mut m) if m.contains_key("config") => {
                        m.remove("config").unwrap_or_default()
                    }
                    other => other,
                }
            }
            "ini" | "cfg" | "conf" => ini_to_json(&text)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
            _ => {
                return Err(Failure::Usage(format!(
                    "{}: config files must end in .json or .ini",
                    path.display()
                )))
            }
        };
        serde_json::from_value(value)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
    }
}

/// Flattens every section of an INI document into one JSON object. Values
/// that parse as numbers become numbers.
fn ini_to_json(text: &str) -> Result<Value, String> {
    let ini = ini::Ini::load_from_str(text).map_err(|e| e.to_string())?;
    let mut map = Map::new();
    for (_, props) in ini.iter() {
        for (key, raw) in props.iter() {
            let raw = raw.trim().trim_matches('"');
            let value = if let Ok(i) = raw.parse::<u64>() {
                Value::from(i)
            } else if let Ok(x) = raw.parse::<f64>() {
                Value::from(x)
            } else {
                Value::from(raw)
            };
            map.insert(key.trim().replace('-', "_"), value);
        }
    }
    Ok(Value::Object(map))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spans() {
        assert_eq!("0..2".parse::<Span>().unwrap(), Span { lo: 0, hi: 2 });
        assert_eq!("0..=2".parse::<Span>().unwrap(), Span { lo: 0, hi: 2 });
        assert_eq!("3".parse::<Span>().unwrap(), Span::single(3));
        assert!("2..1".parse::<Span>().is_err());
        assert!("x".parse::<Span>().is_err());
    }

    #[test]
    fn ini_values_are_typed() {
        let v =
            ini_to_json("# dot\nunits = ev-nm\nomega = 1e15\n[levels]\nl = 0..1\nn = 0\n").unwrap();
        let cfg: RunConfig = serde_json::from_value(v).unwrap();
        assert_eq!(cfg.units, Some(UnitLabel::EvNm));
        assert_eq!(cfg.omega, Some(1e15));
        assert_eq!(cfg.l, Some(Span { lo: 0, hi: 1 }));
        assert_eq!(cfg.n, Some(Span::single(0)));
    }

    #[test]
    fn flags_win() {
        let file = RunConfig {
            a: Some(1.0),
            b: Some(2.0),
            ..Default::default()
        };
        let flags = RunConfig {
            b: Some(3.0),
            ..Default::default()
        };
        let merged = file.overlay(flags);
        assert_eq!((merged.a, merged.b), (Some(1.0), Some(3.0)));
    }

    #[test]
    fn json_round_trip_skips_output() {
        let cfg = RunConfig {
            command: Some(Command::Spectrum),
            units: Some(UnitLabel::Natural),
            l: Some(Span { lo: 0, hi: 2 }),
            output: Some("x.json".into()),
            ..Default::default()
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert!(!text.contains("output"));
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(
            back,
            RunConfig {
                output: None,
                ..cfg
            }
        );
    }
}
