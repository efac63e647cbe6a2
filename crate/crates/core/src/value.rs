//! Database values and small text helpers shared by the file formats.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// A domain value. Integers sort before strings, strings before fact ids.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Str(String),
    /// Identifier of a database fact, used by provenance attributes.
    Fact(u32),
}

impl Value {
    /// Integer if the token parses as one, string otherwise.
    pub fn parse(token: &str) -> Value {
        token.parse().map(Value::Int).unwrap_or_else(|_| Value::Str(token.to_string()))
    }

    /// Whitespace-free token that [`Value::from_token`] reads back.
    pub fn to_token(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Fact(f) => format!("#{f}"),
            Value::Str(s) => {
                let escaped = escape(s);
                if s.is_empty() || s.parse::<i64>().is_ok() || s.starts_with(['#', '\'']) {
                    format!("'{escaped}")
                } else {
                    escaped
                }
            }
        }
    }

    pub fn from_token(token: &str) -> Option<Value> {
        if let Some(rest) = token.strip_prefix('\'') {
            return unescape(rest).map(Value::Str);
        }
        if let Some(rest) = token.strip_prefix('#') {
            return rest.parse().ok().map(Value::Fact);
        }
        if let Ok(i) = token.parse() {
            return Some(Value::Int(i));
        }
        unescape(token).map(Value::Str)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Str(s) => f.write_str(s),
            Value::Fact(id) => write!(f, "#{id}"),
        }
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_string())
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        if ch == '%' || ch.is_whitespace() {
            let mut buf = [0u8; 4];
            for b in ch.encode_utf8(&mut buf).bytes() {
                out.push_str(&format!("%{b:02X}"));
            }
        } else {
            out.push(ch);
        }
    }
    out
}

fn unescape(s: &str) -> Option<String> {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            let hex = s.get(i + 1..i + 3)?;
            out.push(u8::from_str_radix(hex, 16).ok()?);
            i += 3;
        } else {
            out.push(bytes[i]);
            i += 1;
        }
    }
    String::from_utf8(out).ok()
}

/// Parses `p/q`, an integer, or a finite decimal such as `0.125`.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("0{int}{frac}").parse().ok()?;
    let mut den = BigInt::one();
    for _ in 0..frac.len() {
        den *= 10;
    }
    let r = BigRational::new(digits, den);
    Some(if neg { -r } else { r })
}
