//! Serde helpers that write big integers as exact decimal strings.
//!
//! Use with `#[serde(with = "crate::io::decimal")]`, or
//! `crate::io::decimal::option` for `Option<BigInt>`.

use std::str::FromStr;

use num_bigint::BigInt;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serializer};

pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
    let s = String::deserialize(d)?;
    parse(&s).map_err(D::Error::custom)
}

/// Parses an optionally signed run of ASCII digits. Rejects `+`, blanks,
/// exponents and fractions.
pub fn parse(s: &str) -> Result<BigInt, String> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("{s:?} is not a decimal integer"));
    }
    BigInt::from_str(s).map_err(|e| e.to_string())
}

pub mod option {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => s.collect_str(v),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigInt>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| parse(&s).map_err(D::Error::custom))
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Serialize;

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct W {
        #[serde(with = "super")]
        a: BigInt,
        #[serde(with = "super::option", default)]
        b: Option<BigInt>,
    }

    #[test]
    fn round_trip_large_values() {
        let w = W {
            a: -BigInt::from(10u64).pow(24),
            b: Some(BigInt::from(u128::MAX) * 3),
        };
        let text = serde_json::to_string(&w).unwrap();
        assert_eq!(
            text,
            r#"{"a":"-1000000000000000000000000","b":"1020847100762815390390123822295304634365"}"#
        );
        assert_eq!(serde_json::from_str::<W>(&text).unwrap(), w);
        let none: W = serde_json::from_str(r#"{"a":"0","b":null}"#).unwrap();
        assert_eq!(none.b, None);
    }

    #[test]
    fn rejects_non_integers() {
        for bad in ["", "-", "1e3", "1.0", "+5", " 5", "0x10"] {
            assert!(parse(bad).is_err(), "{bad}");
        }
        assert_eq!(parse("-0").unwrap(), BigInt::from(0));
    }
}
