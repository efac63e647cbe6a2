use std::io::{self, Write};

use kcdb::circuit::{Lit, Valuation};
use kcdb::value::Value;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use serde_json::{json, Number, Value as Json};

/// Command output: text lines and the equivalent JSON document.
pub struct Report {
    pub lines: Vec<String>,
    pub json: Json,
}

impl Report {
    pub fn new(lines: Vec<String>, json: Json) -> Self {
        Report { lines, json }
    }

    pub fn single(line: String, json: Json) -> Self {
        Report { lines: vec![line], json }
    }

    pub fn print(&self, as_json: bool) -> io::Result<()> {
        let mut out = io::stdout().lock();
        if as_json {
            writeln!(out, "{}", self.json)?;
        } else {
            for l in &self.lines {
                writeln!(out, "{l}")?;
            }
        }
        out.flush()
    }
}

fn number(digits: String) -> Json {
    Json::Number(serde_json::from_str::<Number>(&digits).expect("decimal integer"))
}

pub fn nat(n: &BigUint) -> Json {
    number(n.to_string())
}

pub fn int(n: &BigInt) -> Json {
    number(n.to_string())
}

/// `p/q` in lowest terms; integers print without a denominator.
pub fn rat_text(r: &BigRational) -> String {
    r.to_string()
}

pub fn rat(r: &BigRational) -> Json {
    json!({ "numerator": int(r.numer()), "denominator": int(r.denom()) })
}

/// Signed DIMACS literals, one per variable of the valuation.
pub fn lits(nu: &Valuation) -> Vec<i64> {
    nu.iter().map(|(v, b)| Lit::new(v, b).to_dimacs()).collect()
}

pub fn lits_text(nu: &Valuation) -> String {
    lits(nu).iter().map(i64::to_string).collect::<Vec<_>>().join(" ")
}

pub fn value(v: &Value) -> Json {
    match v {
        Value::Int(i) => json!(i),
        Value::Str(s) => json!(s),
        Value::Fact(f) => json!(format!("#{f}")),
    }
}

pub fn row_text(row: &[Value]) -> String {
    row.iter().map(Value::to_string).collect::<Vec<_>>().join("\t")
}

pub fn row(row: &[Value]) -> Json {
    Json::Array(row.iter().map(value).collect())
}
