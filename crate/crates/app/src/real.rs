//! Floats that survive a text round trip bit for bit.
//!
//! A [`Real`] serializes as `{"hex": "0x1.8p+1", "dec": "3"}`. The hex
//! field is canonical and is the only one read back; `dec` is a readable
//! mirror. Non-finite values are spelled `inf`, `-inf` and `nan`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Copy, Debug, Default)]
pub struct Real(pub f64);

impl PartialEq for Real {
    /// Bitwise, except that every NaN equals every other NaN.
    fn eq(&self, other: &Self) -> bool {
        self.0.to_bits() == other.0.to_bits() || (self.0.is_nan() && other.0.is_nan())
    }
}

impl From<f64> for Real {
    fn from(v: f64) -> Self {
        Real(v)
    }
}

/// Shortest hex-float spelling of `v`, e.g. `0x1.8p+1` for 3.
pub fn to_hex(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    let sign = if v.is_sign_negative() { "-" } else { "" };
    if v.is_infinite() {
        return format!("{sign}inf");
    }
    let bits = v.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1 << 52) - 1);
    if biased == 0 && frac == 0 {
        return format!("{sign}0x0p+0");
    }
    // subnormals keep a leading 0 and the minimum exponent
    let (lead, exp) = if biased == 0 {
        (0, -1022)
    } else {
        (1, biased - 1023)
    };
    let digits = format!("{frac:013x}");
    let digits = digits.trim_end_matches('0');
    if digits.is_empty() {
        format!("{sign}0x{lead}p{exp:+}")
    } else {
        format!("{sign}0x{lead}.{digits}p{exp:+}")
    }
}

pub fn from_hex(s: &str) -> Result<f64, String> {
    match s {
        "nan" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => hexf_parse::parse_hexf64(s, false).map_err(|e| format!("bad hex float {s:?}: {e}")),
    }
}

#[derive(Serialize, Deserialize)]
struct Repr {
    hex: String,
    #[serde(default)]
    dec: Option<String>,
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        Repr {
            hex: to_hex(self.0),
            dec: Some(format!("{}", self.0)),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = Repr::deserialize(d)?;
        from_hex(&r.hex).map(Real).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spellings() {
        assert_eq!(to_hex(3.0), "0x1.8p+1");
        assert_eq!(to_hex(1.0), "0x1p+0");
        assert_eq!(to_hex(-0.5), "-0x1p-1");
        assert_eq!(to_hex(0.0), "0x0p+0");
        assert_eq!(to_hex(-0.0), "-0x0p+0");
        assert_eq!(to_hex(f64::MIN_POSITIVE / 2.0), "0x0.8p-1022");
        assert_eq!(to_hex(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn round_trips_exactly() {
        let cases = [
            0.1,
            -0.0,
            1.0 / 3.0,
            f64::MAX,
            f64::MIN_POSITIVE,
            5e-324,
            f64::EPSILON,
            f64::INFINITY,
            f64::NAN,
            core::f64::consts::PI,
        ];
        for v in cases {
            let back = from_hex(&to_hex(v)).unwrap();
            assert_eq!(Real(back), Real(v), "{v}");
            let json = serde_json::to_string(&Real(v)).unwrap();
            assert_eq!(serde_json::from_str::<Real>(&json).unwrap(), Real(v));
        }
    }

    #[test]
    fn decimal_mirror_is_ignored_on_load() {
        let r: Real = serde_json::from_str(r#"{"hex": "0x1.8p+1", "dec": "99"}"#).unwrap();
        assert_eq!(r, Real(3.0));
        assert!(from_hex("0xzz").is_err());
    }
}
