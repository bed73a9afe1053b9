//! Input parsing: a JSON document describing the cover.
//!
//! ```json
//! {
//!   "p": 3,
//!   "d": 5,
//!   "pi_exponent": 0,
//!   "factors": [[[-1, 1], 2], [[-9, 0, 0, 1], 1]]
//! }
//! ```
//!
//! Polynomial coefficients are listed lowest degree first and may be
//! integers or "num/den" strings.  A factor may also be written as an
//! object `{"coeffs": [...], "exponent": k}`.

use regmodels_core::arith::qpoly::QPoly;
use regmodels_core::arith::rat::Rat;
use regmodels_core::cover::CoverSpec;
use serde_json::Value;

use num_bigint::BigInt;
use std::str::FromStr;

pub fn parse_spec(text: &str) -> Result<CoverSpec, String> {
    let v: Value = serde_json::from_str(text).map_err(|e| format!("malformed JSON: {e}"))?;
    let obj = v.as_object().ok_or("top level must be an object")?;
    let p = read_u64(obj.get("p").ok_or("missing field p")?)?;
    let d = read_u64(obj.get("d").ok_or("missing field d")?)?;
    let pi_exponent = match obj.get("pi_exponent") {
        Some(x) => read_u64(x)?,
        None => 0,
    };
    let factors_raw = obj
        .get("factors")
        .and_then(|f| f.as_array())
        .ok_or("missing or malformed field factors")?;
    let mut factors = Vec::new();
    for f in factors_raw {
        factors.push(read_factor(f)?);
    }
    Ok(CoverSpec {
        p,
        d,
        pi_exponent,
        factors,
    })
}

fn read_u64(v: &Value) -> Result<u64, String> {
    v.as_u64().ok_or_else(|| format!("expected a nonnegative integer, got {v}"))
}

fn read_factor(v: &Value) -> Result<(QPoly, u64), String> {
    if let Some(arr) = v.as_array() {
        if arr.len() != 2 {
            return Err(format!("factor entry must be [coeffs, exponent]: {v}"));
        }
        let coeffs = read_coeffs(&arr[0])?;
        let e = read_u64(&arr[1])?;
        return Ok((coeffs, e));
    }
    if let Some(obj) = v.as_object() {
        let coeffs = read_coeffs(obj.get("coeffs").ok_or("factor object missing coeffs")?)?;
        let e = read_u64(obj.get("exponent").ok_or("factor object missing exponent")?)?;
        return Ok((coeffs, e));
    }
    Err(format!("malformed factor entry: {v}"))
}

fn read_coeffs(v: &Value) -> Result<QPoly, String> {
    let arr = v
        .as_array()
        .ok_or_else(|| format!("coefficients must be an array: {v}"))?;
    let mut out = Vec::new();
    for c in arr {
        out.push(read_rat(c)?);
    }
    Ok(QPoly::from_coeffs(out))
}

fn read_rat(v: &Value) -> Result<Rat, String> {
    if let Some(i) = v.as_i64() {
        return Ok(Rat::from_integer(BigInt::from(i)));
    }
    if let Some(s) = v.as_str() {
        let parts: Vec<&str> = s.split('/').collect();
        let parse = |x: &str| {
            BigInt::from_str(x.trim()).map_err(|_| format!("bad integer {x}"))
        };
        return match parts.as_slice() {
            [n] => Ok(Rat::from_integer(parse(n)?)),
            [n, den] => {
                let den = parse(den)?;
                if den == BigInt::from(0) {
                    return Err("zero denominator".into());
                }
                Ok(Rat::new(parse(n)?, den))
            }
            _ => Err(format!("bad rational literal {s}")),
        };
    }
    Err(format!("expected an integer or \"num/den\" string, got {v}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_basic_example() {
        let text = r#"{"p":3,"d":5,"pi_exponent":0,
            "factors":[[[-1,1],2],[[-9,0,0,1],1]]}"#;
        let spec = parse_spec(text).unwrap();
        assert_eq!(spec.p, 3);
        assert_eq!(spec.d, 5);
        assert_eq!(spec.factors.len(), 2);
        assert_eq!(spec.factors[0].0.to_string(), "t - 1");
        assert_eq!(spec.factors[1].0.to_string(), "t^3 - 9");
    }

    #[test]
    fn parses_rational_strings_and_objects() {
        let text = r#"{"p":5,"d":2,
            "factors":[{"coeffs":["-1/2",1],"exponent":1},[[ -5,0,1],1],[[-1,1],1]]}"#;
        let spec = parse_spec(text).unwrap();
        assert_eq!(spec.factors[0].0.to_string(), "t - 1/2");
    }

    #[test]
    fn rejects_malformed_documents() {
        assert!(parse_spec("{").is_err());
        assert!(parse_spec(r#"{"p":3}"#).is_err());
        assert!(parse_spec(r#"{"p":3,"d":5,"factors":[[1,2]]}"#).is_err());
    }
}
