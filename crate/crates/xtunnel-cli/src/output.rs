//! CSV and JSON rendering. Floats carry 17 significant digits.

use serde_json::{json, Value};
use xtunnel::experiments::ScanResult;
use xtunnel::fit::FitResult;

pub fn number(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header plus one line per row.
pub fn table(result: &ScanResult) -> String {
    let mut out = result.columns.join(",");
    out.push('\n');
    for row in &result.rows {
        out.push_str(&row.iter().map(|x| number(*x)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

pub fn fit_block(fit: &FitResult) -> Value {
    json!({ "slope": fit.slope, "intercept": fit.intercept, "r2": fit.r2 })
}

/// `quantity,value` lines for every numeric leaf of `v`, keyed by dot path.
pub fn flat(v: &Value) -> String {
    let mut out = String::from("quantity,value\n");
    walk(v, String::new(), &mut out);
    out
}

fn walk(v: &Value, path: String, out: &mut String) {
    let join = |k: &str| if path.is_empty() { k.to_string() } else { format!("{path}.{k}") };
    match v {
        Value::Number(n) => {
            if let Some(x) = n.as_f64() {
                let text = if n.is_f64() { number(x) } else { n.to_string() };
                out.push_str(&format!("{path},{text}\n"));
            }
        }
        Value::Bool(b) => out.push_str(&format!("{path},{}\n", u8::from(*b))),
        Value::Array(items) => items.iter().enumerate().for_each(|(i, x)| walk(x, join(&i.to_string()), out)),
        Value::Object(map) => map.iter().for_each(|(k, x)| walk(x, join(k), out)),
        Value::Null | Value::String(_) => {}
    }
}
