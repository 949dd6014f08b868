//! Plain-text rendering of command output.

use serde_json::Value;

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Null => Some("-".into()),
        Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
            Some(a.iter().filter_map(scalar).collect::<Vec<_>>().join(", "))
        }
        _ => None,
    }
}

/// Pads a column so decimal points line up, then right-aligns non-numeric cells.
fn align(cells: &[String]) -> Vec<String> {
    let numeric = |s: &str| s.parse::<f64>().is_ok();
    let split = |s: &str| match s.find('.') {
        Some(i) => (s[..i].len(), s[i..].len()),
        None => (s.len(), 0),
    };
    let (mut int_w, mut frac_w) = (0, 0);
    for c in cells.iter().filter(|c| numeric(c)) {
        let (i, f) = split(c);
        int_w = int_w.max(i);
        frac_w = frac_w.max(f);
    }
    let width = cells.iter().map(|c| if numeric(c) { int_w + frac_w } else { c.len() }).max().unwrap_or(0);
    cells
        .iter()
        .map(|c| {
            if numeric(c) {
                let (i, f) = split(c);
                format!("{}{}{}", " ".repeat(int_w - i), c, " ".repeat(frac_w - f))
            } else {
                format!("{c:>width$}")
            }
        })
        .collect()
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>, tables: &mut Vec<(String, Vec<Value>)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out, tables);
            }
        }
        Value::Array(a) if a.iter().any(Value::is_object) => tables.push((prefix.to_string(), a.clone())),
        other => {
            let s = scalar(other).unwrap_or_else(|| other.to_string());
            out.push((prefix.to_string(), s));
        }
    }
}

fn grid(rows: &[Value]) -> String {
    let mut headers: Vec<String> = Vec::new();
    for r in rows {
        if let Value::Object(m) = r {
            for k in m.keys() {
                if !headers.contains(k) {
                    headers.push(k.clone());
                }
            }
        }
    }
    let columns: Vec<Vec<String>> = headers
        .iter()
        .map(|h| {
            let mut col = vec![h.clone()];
            col.extend(rows.iter().map(|r| r.get(h).map_or("-".into(), |v| scalar(v).unwrap_or_else(|| v.to_string()))));
            let body = align(&col[1..]);
            let width = body.iter().map(String::len).max().unwrap_or(0).max(h.len());
            std::iter::once(format!("{h:>width$}")).chain(body.into_iter().map(|c| format!("{c:>width$}"))).collect()
        })
        .collect();
    let mut s = String::new();
    for i in 0..=rows.len() {
        let line: Vec<&str> = columns.iter().map(|c| c[i].as_str()).collect();
        s.push_str(line.join("  ").trim_end());
        s.push('\n');
    }
    s
}

pub fn render(v: &Value) -> String {
    let mut pairs = Vec::new();
    let mut tables = Vec::new();
    flatten("", v, &mut pairs, &mut tables);
    let mut s = String::new();
    let key_w = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, val) in &pairs {
        s.push_str(&format!("{k:<key_w$}  {val}\n"));
    }
    for (name, rows) in tables {
        if !s.is_empty() {
            s.push('\n');
        }
        if !name.is_empty() {
            s.push_str(&format!("{name}:\n"));
        }
        s.push_str(&grid(&rows));
    }
    s
}
