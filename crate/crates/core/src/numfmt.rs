//! Number formatting and JSON conversion for scalars.
//!
//! Floats are always written in C `%.12e` style so reports are byte-stable.

use serde_json::Value;

use crate::scalar::{parse_scalar, Scalar};

/// Format like C's `%.12e`: `1.000000000000e-10`, `-2.500000000000e+00`.
pub fn sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// A JSON number whose text is exactly [`sci`] of `x`. Non-finite values
/// become strings since JSON has no literal for them.
pub fn json_float(x: f64) -> Value {
    if !x.is_finite() {
        return Value::String(sci(x));
    }
    serde_json::from_str(&sci(x)).expect("scientific literal is valid json")
}

/// Exact scalars serialize as `"p/q"` strings, floats as [`json_float`].
pub fn scalar_to_json<S: Scalar>(x: &S) -> Value {
    if S::EXACT {
        Value::String(x.to_string())
    } else {
        json_float(x.approx())
    }
}

/// Accept a JSON number or a `"p/q"` string.
pub fn scalar_from_json<S: Scalar>(v: &Value) -> Option<S> {
    match v {
        Value::String(s) => parse_scalar(s),
        Value::Number(n) => parse_scalar(&n.to_string()),
        _ => None,
    }
}

/// True when every scalar leaf is an integer or `"p/q"` string, so the exact
/// backend can represent it without rounding.
pub fn is_rational_literal(v: &Value) -> bool {
    match v {
        Value::String(s) => parse_scalar::<crate::Rational>(s).is_some(),
        Value::Number(n) => n.to_string().parse::<i64>().is_ok(),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    #[test]
    fn c_style_exponent() {
        assert_eq!(sci(1e-10), "1.000000000000e-10");
        assert_eq!(sci(-2.5), "-2.500000000000e+00");
        assert_eq!(sci(0.0), "0.000000000000e+00");
        assert_eq!(sci(1.5e300), "1.500000000000e+300");
    }

    #[test]
    fn json_float_keeps_text() {
        assert_eq!(serde_json::to_string(&json_float(0.1)).unwrap(), "1.000000000000e-01");
    }

    #[test]
    fn scalar_json_round_trip() {
        let q: Rational = scalar_from_json(&Value::String("-3/4".into())).unwrap();
        assert_eq!(scalar_to_json(&q), Value::String("-3/4".into()));
        let x: f64 = scalar_from_json(&serde_json::json!(0.25)).unwrap();
        assert_eq!(x, 0.25);
        assert!(is_rational_literal(&serde_json::json!(3)));
        assert!(!is_rational_literal(&serde_json::json!(0.377)));
    }
}
