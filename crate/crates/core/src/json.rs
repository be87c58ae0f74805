//! A tiny JSON document builder with deterministic output: objects keep
//! insertion order and every float is printed with 17 significant digits,
//! so identical inputs produce byte-identical reports.

/// A JSON value. Objects preserve key insertion order.
#[derive(Debug, Clone, PartialEq)]
pub enum JsonValue {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<JsonValue>),
    Obj(Vec<(String, JsonValue)>),
}

impl JsonValue {
    pub fn obj() -> JsonValue {
        JsonValue::Obj(Vec::new())
    }

    pub fn push(&mut self, key: &str, value: JsonValue) {
        match self {
            JsonValue::Obj(entries) => entries.push((key.to_string(), value)),
            _ => panic!("push on a non-object JSON value"),
        }
    }

    pub fn with(mut self, key: &str, value: JsonValue) -> JsonValue {
        self.push(key, value);
        self
    }

    pub fn str(s: impl Into<String>) -> JsonValue {
        JsonValue::Str(s.into())
    }

    /// Serialize without insignificant whitespace.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        self.write(&mut out);
        out
    }

    fn write(&self, out: &mut String) {
        match self {
            JsonValue::Null => out.push_str("null"),
            JsonValue::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            JsonValue::Int(i) => out.push_str(&i.to_string()),
            JsonValue::Num(x) => {
                if x.is_finite() {
                    // 17 significant digits round-trip any IEEE-754 double
                    out.push_str(&format!("{x:.16e}"));
                } else {
                    out.push_str("null");
                }
            }
            JsonValue::Str(s) => {
                out.push('"');
                for c in s.chars() {
                    match c {
                        '"' => out.push_str("\\\""),
                        '\\' => out.push_str("\\\\"),
                        '\n' => out.push_str("\\n"),
                        '\r' => out.push_str("\\r"),
                        '\t' => out.push_str("\\t"),
                        c if (c as u32) < 0x20 => {
                            out.push_str(&format!("\\u{:04x}", c as u32));
                        }
                        c => out.push(c),
                    }
                }
                out.push('"');
            }
            JsonValue::Arr(items) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    item.write(out);
                }
                out.push(']');
            }
            JsonValue::Obj(entries) => {
                out.push('{');
                for (i, (k, v)) in entries.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    JsonValue::Str(k.clone()).write(out);
                    out.push(':');
                    v.write(out);
                }
                out.push('}');
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_emission() {
        let v = JsonValue::obj()
            .with("b", JsonValue::Int(2))
            .with("a", JsonValue::Num(1.5))
            .with("s", JsonValue::str("x\"y"))
            .with(
                "arr",
                JsonValue::Arr(vec![JsonValue::Bool(true), JsonValue::Null]),
            );
        let s = v.emit();
        assert_eq!(
            s,
            "{\"b\":2,\"a\":1.5000000000000000e0,\"s\":\"x\\\"y\",\"arr\":[true,null]}"
        );
        assert_eq!(s, v.emit());
    }

    #[test]
    fn seventeen_significant_digits() {
        let v = JsonValue::Num(std::f64::consts::PI);
        assert_eq!(v.emit(), "3.1415926535897931e0");
        let tiny = JsonValue::Num(1.0e-300);
        assert_eq!(tiny.emit(), "1.0000000000000000e-300");
    }
}
