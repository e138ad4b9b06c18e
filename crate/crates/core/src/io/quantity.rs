//! Unit-suffixed quantities in configuration files, e.g. `"30 mV"`.
//!
//! Each submodule is a `#[serde(with = ...)]` adapter for one unit. A bare
//! number is rejected with a message naming the unit it needs.

use std::fmt;

use serde::de::{self, Visitor};

/// Splits `"<number> <unit>"` and checks the unit.
pub fn parse_quantity(text: &str, unit: &str) -> Result<f64, String> {
    let t = text.trim();
    // the unit is the trailing run of letters, so exponents like 2.5e1 stay in the number
    let split = t
        .char_indices()
        .rev()
        .take_while(|(_, c)| c.is_alphabetic())
        .last()
        .map(|(i, _)| i)
        .ok_or_else(|| format!("missing unit in {text:?}: write \"{t} {unit}\""))?;
    let (num, suffix) = t.split_at(split);
    let suffix = suffix.trim();
    let canonical = match suffix {
        "μeV" | "µeV" => "ueV",
        s => s,
    };
    if canonical != unit {
        return Err(format!("wrong unit in {text:?}: expected {unit}, found {suffix}"));
    }
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| format!("bad number {:?} in {text:?}", num.trim()))?;
    if !value.is_finite() {
        return Err(format!("{text:?} is not finite"));
    }
    Ok(value)
}

/// `"<value> <unit>"` with the shortest decimal that round-trips.
pub fn format_quantity(value: f64, unit: &str) -> String {
    format!("{value} {unit}")
}

struct QuantityVisitor(&'static str);

impl Visitor<'_> for QuantityVisitor {
    type Value = f64;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "a string such as \"1.5 {}\"", self.0)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
        parse_quantity(v, self.0).map_err(E::custom)
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
        Err(E::custom(format!("missing unit: write \"{v} {}\"", self.0)))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
        Err(E::custom(format!("missing unit: write \"{v} {}\"", self.0)))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
        Err(E::custom(format!("missing unit: write \"{v} {}\"", self.0)))
    }
}

pub(crate) fn deserialize_unit<'de, D: de::Deserializer<'de>>(d: D, unit: &'static str) -> Result<f64, D::Error> {
    d.deserialize_any(QuantityVisitor(unit))
}

macro_rules! unit_adapter {
    ($name:ident, $unit:literal) => {
        pub mod $name {
            pub const UNIT: &str = $unit;

            pub fn serialize<S: serde::Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(&super::format_quantity(*v, UNIT))
            }

            pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
                super::deserialize_unit(d, UNIT)
            }
        }
    };
}

unit_adapter!(nm, "nm");
unit_adapter!(mv, "mV");
unit_adapter!(mev, "meV");
unit_adapter!(uev, "ueV");
