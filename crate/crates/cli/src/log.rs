//! Structured log lines on stderr: one JSON object per line.

use serde_json::{json, Value};

pub fn emit(level: &str, msg: &str, fields: Value) {
    let mut line = json!({
        "level": level,
        "ts": torus_nls::report::timestamp(),
        "msg": msg,
    });
    if let (Value::Object(dst), Value::Object(src)) = (&mut line, fields) {
        dst.extend(src);
    }
    eprintln!("{line}");
}

pub fn info(msg: &str, fields: Value) {
    emit("info", msg, fields);
}

pub fn error(msg: &str, fields: Value) {
    emit("error", msg, fields);
}
