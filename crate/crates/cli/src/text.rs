//! Plain-text rendering of a JSON report: one `path = value` line per leaf.

use serde_json::Value;

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "null".into(),
        other => other.to_string(),
    }
}

fn as_complex(v: &Value) -> Option<String> {
    let pair = v.as_array()?;
    if pair.len() != 2 {
        return None;
    }
    let (re, im) = (pair[0].as_f64()?, pair[1].as_f64()?);
    let sign = if im.is_sign_negative() { '-' } else { '+' };
    Some(format!("{re:.16e} {sign} {:.16e}i", im.abs()))
}

/// One line for a verification item.
fn item_line(obj: &serde_json::Map<String, Value>) -> Option<String> {
    let identity = obj.get("identity")?.as_str()?;
    let status = obj.get("status")?.as_str()?;
    let tag = match status {
        "pass" => "PASS",
        "fail" => "FAIL",
        _ => "N/A ",
    };
    let defect = obj.get("defect").and_then(Value::as_f64).unwrap_or(f64::NAN);
    let tol = obj.get("tolerance").and_then(Value::as_f64).unwrap_or(f64::NAN);
    let sign = obj
        .get("sign")
        .and_then(Value::as_i64)
        .map(|s| format!(" sign={s:+}"))
        .unwrap_or_default();
    Some(format!("{tag} {identity} defect={defect:.3e} tol={tol:.1e}{sign}"))
}

fn walk(path: &str, v: &Value, out: &mut String) {
    if let Some(z) = as_complex(v) {
        out.push_str(&format!("{path} = {z}\n"));
        return;
    }
    match v {
        Value::Object(map) => {
            if let Some(line) = item_line(map) {
                out.push_str(&format!("{path}: {line}\n"));
                return;
            }
            for (k, child) in map {
                let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                walk(&p, child, out);
            }
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str(&format!("{path} = []\n"));
            }
            for (k, child) in items.iter().enumerate() {
                walk(&format!("{path}[{k}]"), child, out);
            }
        }
        leaf => out.push_str(&format!("{path} = {}\n", scalar(leaf))),
    }
}

pub fn render(json: &str) -> String {
    let v: Value = serde_json::from_str(json).expect("report JSON is well formed");
    let mut out = String::new();
    walk("", &v, &mut out);
    out
}
