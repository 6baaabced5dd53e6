//! Canonical JSON rendering.
//!
//! Every JSON document the crate emits (composition files, manifests, pipeline
//! reports) goes through [`to_canonical_json`]: object keys sorted
//! lexicographically, reals printed with exactly 6 decimal places, integers
//! printed as integers, LF line endings, trailing newline. Two equal values
//! always render to identical bytes, which is what makes report diffs and the
//! byte-reproducibility guarantees meaningful.

use serde_json::Value;

/// Quantize a real to the canonical 6-decimal precision.
///
/// Model values are kept quantized so that `parse(serialize(x)) == x` holds
/// exactly: a quantized f64 prints to its own 6-decimal form and parses back
/// to the same bits.
pub fn quantize6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

/// Wrap an f64 as a JSON number (canonical printer renders it with 6 decimals).
pub fn real(x: f64) -> Value {
    Value::Number(serde_json::Number::from_f64(x).expect("finite real"))
}

fn fmt_real(x: f64) -> String {
    // -0.0 must not leak a sign into the output.
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.6}")
}

fn fmt_number(n: &serde_json::Number) -> String {
    if let Some(u) = n.as_u64() {
        u.to_string()
    } else if let Some(i) = n.as_i64() {
        i.to_string()
    } else {
        fmt_real(n.as_f64().expect("number is u64, i64 or f64"))
    }
}

fn is_scalar_array(values: &[Value]) -> bool {
    values.iter().all(|v| {
        matches!(
            v,
            Value::Number(_) | Value::String(_) | Value::Bool(_) | Value::Null
        )
    })
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => out.push_str(&fmt_number(n)),
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string serializes"));
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
            } else if is_scalar_array(items) {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, item, indent);
                }
                out.push(']');
            } else {
                out.push_str("[\n");
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(",\n");
                    }
                    push_indent(out, indent + 1);
                    write_value(out, item, indent + 1);
                }
                out.push('\n');
                push_indent(out, indent);
                out.push(']');
            }
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, key) in keys.iter().enumerate() {
                if i > 0 {
                    out.push_str(",\n");
                }
                push_indent(out, indent + 1);
                out.push_str(&serde_json::to_string(key).expect("key serializes"));
                out.push_str(": ");
                write_value(out, &map[key.as_str()], indent + 1);
            }
            out.push('\n');
            push_indent(out, indent);
            out.push('}');
        }
    }
}

fn push_indent(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

/// Render a value in canonical form (sorted keys, 6-decimal reals, trailing LF).
pub fn to_canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn keys_sorted_and_reals_six_decimals() {
        let v = json!({"b": 0.123456789, "a": 2, "c": {"z": true, "y": [1, 2.5]}});
        let s = to_canonical_json(&v);
        assert_eq!(
            s,
            "{\n  \"a\": 2,\n  \"b\": 0.123457,\n  \"c\": {\n    \"y\": [1, 2.500000],\n    \"z\": true\n  }\n}\n"
        );
    }

    #[test]
    fn negative_zero_is_normalized() {
        let s = to_canonical_json(&real(-0.0));
        assert_eq!(s, "0.000000\n");
    }

    #[test]
    fn quantized_reals_round_trip_exactly() {
        for &x in &[0.1, 0.123456789, 1.0 / 3.0, 0.999999949, 1.5e-7] {
            let q = quantize6(x);
            let printed = format!("{q:.6}");
            let back: f64 = printed.parse().unwrap();
            assert_eq!(back, q, "{x} -> {printed}");
        }
    }
}
