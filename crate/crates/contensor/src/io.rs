//! JSON tensor files.
//!
//! ```json
//! {"name": "x", "fill": 0,
//!  "levels": [{"kind": "interval", "ptr": [0, 2], "left": [1, 4.1], "right": [3, 5.1],
//!              "lclose": true, "rclose": true}],
//!  "values": [1, 2]}
//! ```
//!
//! `ptr` may be omitted on a root sparse level. Endpoints accept `"+Inf"` and
//! `"-Inf"` strings.

use std::path::Path;

use serde_json::{json, Map, Value as Json};
use thiserror::Error;

use crate::storage::{ContTensor, Flags, Level};
use crate::value::{parse_special, Value};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {msg}")]
    Schema { path: String, msg: String },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

fn err<T>(path: &str, msg: impl Into<String>) -> Result<T, LoadError> {
    Err(LoadError::Schema { path: path.to_string(), msg: msg.into() })
}

fn field<'a>(obj: &'a Map<String, Json>, key: &str, path: &str) -> Result<&'a Json, LoadError> {
    match obj.get(key) {
        Some(v) => Ok(v),
        None => err(path, format!("missing field \"{key}\"")),
    }
}

fn num(v: &Json, path: &str) -> Result<f64, LoadError> {
    match v {
        Json::Number(n) => Ok(n.as_f64().unwrap()),
        Json::String(s) => match parse_special(s) {
            Some(x) if !x.is_nan() => Ok(x),
            _ => err(path, format!("expected a number, found \"{s}\"")),
        },
        _ => err(path, "expected a number"),
    }
}

fn nums(v: &Json, path: &str) -> Result<Vec<f64>, LoadError> {
    let arr = v.as_array().ok_or(()).or_else(|_| err(path, "expected an array"))?;
    arr.iter().enumerate().map(|(i, x)| num(x, &format!("{path}[{i}]"))).collect()
}

fn uint(v: &Json, path: &str) -> Result<usize, LoadError> {
    v.as_u64().map(|x| x as usize).ok_or(()).or_else(|_| err(path, "expected a non-negative integer"))
}

fn uints(v: &Json, path: &str) -> Result<Vec<usize>, LoadError> {
    let arr = v.as_array().ok_or(()).or_else(|_| err(path, "expected an array"))?;
    arr.iter().enumerate().map(|(i, x)| uint(x, &format!("{path}[{i}]"))).collect()
}

fn ptr_or_root(obj: &Map<String, Json>, n: usize, path: &str) -> Result<Vec<usize>, LoadError> {
    match obj.get("ptr") {
        Some(p) => uints(p, &format!("{path}.ptr")),
        None => Ok(vec![0, n]),
    }
}

enum FlagSpec {
    One(bool),
    Many(Vec<bool>),
}

fn flag(v: Option<&Json>, path: &str, n: usize) -> Result<FlagSpec, LoadError> {
    match v {
        None => Ok(FlagSpec::One(true)),
        Some(Json::Bool(b)) => Ok(FlagSpec::One(*b)),
        Some(Json::Array(a)) => {
            if a.len() != n {
                return err(path, format!("expected {n} flags, found {}", a.len()));
            }
            a.iter()
                .enumerate()
                .map(|(i, x)| x.as_bool().ok_or(()).or_else(|_| err(&format!("{path}[{i}]"), "expected a boolean")))
                .collect::<Result<Vec<_>, _>>()
                .map(FlagSpec::Many)
        }
        Some(_) => err(path, "expected a boolean or an array of booleans"),
    }
}

fn level_from_json(v: &Json, path: &str) -> Result<Level, LoadError> {
    let obj = v.as_object().ok_or(()).or_else(|_| err(path, "expected an object"))?;
    let kind = field(obj, "kind", path)?.as_str().unwrap_or("");
    match kind {
        "dense" => Ok(Level::Dense { size: uint(field(obj, "size", path)?, &format!("{path}.size"))? }),
        "pinpoint" => {
            let crd = nums(field(obj, "crd", path)?, &format!("{path}.crd"))?;
            let ptr = ptr_or_root(obj, crd.len(), path)?;
            Ok(Level::Pinpoint { ptr, crd })
        }
        "interval" => {
            let left = nums(field(obj, "left", path)?, &format!("{path}.left"))?;
            let right = nums(field(obj, "right", path)?, &format!("{path}.right"))?;
            if left.len() != right.len() {
                return err(&format!("{path}.right"), format!("expected {} entries, found {}", left.len(), right.len()));
            }
            for (i, (l, r)) in left.iter().zip(&right).enumerate() {
                if l > r {
                    return err(&format!("{path}.left[{i}]"), format!("left endpoint {l} exceeds right endpoint {r}"));
                }
            }
            let n = left.len();
            let lc = flag(obj.get("lclose"), &format!("{path}.lclose"), n)?;
            let rc = flag(obj.get("rclose"), &format!("{path}.rclose"), n)?;
            let flags = match (lc, rc) {
                (FlagSpec::One(l), FlagSpec::One(r)) => Flags::Homogeneous { lclose: l, rclose: r },
                (l, r) => {
                    let expand = |f: FlagSpec| match f {
                        FlagSpec::One(b) => vec![b; n],
                        FlagSpec::Many(v) => v,
                    };
                    Flags::PerEntry { lclose: expand(l), rclose: expand(r) }
                }
            };
            let ptr = ptr_or_root(obj, n, path)?;
            Ok(Level::Interval { ptr, left, right, flags })
        }
        "regular" => {
            let stride = num(field(obj, "stride", path)?, &format!("{path}.stride"))?;
            let len = num(field(obj, "len", path)?, &format!("{path}.len"))?;
            let rclose = obj.get("rclose").and_then(Json::as_bool).unwrap_or(false);
            let xs_json = field(obj, "xs", path)?.as_array().ok_or(()).or_else(|_| err(&format!("{path}.xs"), "expected an array"))?;
            let xs = xs_json
                .iter()
                .enumerate()
                .map(|(i, x)| x.as_i64().ok_or(()).or_else(|_| err(&format!("{path}.xs[{i}]"), "expected an integer")))
                .collect::<Result<Vec<_>, _>>()?;
            let ptr = ptr_or_root(obj, xs.len(), path)?;
            Ok(Level::Regular { ptr, stride, len, rclose, xs })
        }
        other => err(&format!("{path}.kind"), format!("unknown level kind \"{other}\"")),
    }
}

pub fn tensor_from_json(v: &Json) -> Result<ContTensor, LoadError> {
    let obj = v.as_object().ok_or(()).or_else(|_| err("$", "expected an object"))?;
    let name = obj.get("name").and_then(Json::as_str).unwrap_or("").to_string();
    let fill: Value = match obj.get("fill") {
        Some(f) => serde_json::from_value(f.clone()).or_else(|e| err("$.fill", e.to_string()))?,
        None => Value::Num(0.0),
    };
    let levels_json = field(obj, "levels", "$")?.as_array().ok_or(()).or_else(|_| err("$.levels", "expected an array"))?;
    let levels = levels_json
        .iter()
        .enumerate()
        .map(|(i, l)| level_from_json(l, &format!("$.levels[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let values: Vec<Value> = serde_json::from_value(field(obj, "values", "$")?.clone()).or_else(|e| err("$.values", e.to_string()))?;
    ContTensor::new(name, levels, values, fill).or_else(|e| err("$", e.to_string()))
}

pub fn load_str(s: &str) -> Result<ContTensor, LoadError> {
    tensor_from_json(&serde_json::from_str(s)?)
}

pub fn load(path: impl AsRef<Path>) -> Result<ContTensor, LoadError> {
    load_str(&std::fs::read_to_string(path)?)
}

fn endpoints(xs: &[f64]) -> Json {
    Json::Array(xs.iter().map(|&x| serde_json::to_value(Value::Num(x)).unwrap()).collect())
}

fn level_to_json(l: &Level) -> Json {
    match l {
        Level::Dense { size } => json!({"kind": "dense", "size": size}),
        Level::Pinpoint { ptr, crd } => json!({"kind": "pinpoint", "ptr": ptr, "crd": endpoints(crd)}),
        Level::Interval { ptr, left, right, flags } => {
            let (lc, rc) = match flags {
                Flags::Homogeneous { lclose, rclose } => (json!(lclose), json!(rclose)),
                Flags::PerEntry { lclose, rclose } => (json!(lclose), json!(rclose)),
            };
            json!({"kind": "interval", "ptr": ptr, "left": endpoints(left), "right": endpoints(right), "lclose": lc, "rclose": rc})
        }
        Level::Regular { ptr, stride, len, rclose, xs } => {
            json!({"kind": "regular", "ptr": ptr, "stride": stride, "len": len, "rclose": rclose, "xs": xs})
        }
    }
}

pub fn tensor_to_json(t: &ContTensor) -> Json {
    json!({
        "name": t.name,
        "fill": t.fill,
        "levels": t.levels.iter().map(level_to_json).collect::<Vec<_>>(),
        "values": t.values,
    })
}

pub fn save_string(t: &ContTensor) -> String {
    serde_json::to_string_pretty(&tensor_to_json(t)).unwrap() + "\n"
}

pub fn save(t: &ContTensor, path: impl AsRef<Path>) -> std::io::Result<()> {
    std::fs::write(path, save_string(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    const FX: &str = r#"{"name":"f_x","fill":0,"levels":[{"kind":"interval","ptr":[0,2],"left":[1,4.1],"right":[3,5.1],"lclose":true,"rclose":true}],"values":[1,2]}"#;

    #[test]
    fn round_trip_is_stable() {
        let t = load_str(FX).unwrap();
        let s = save_string(&t);
        let t2 = load_str(&s).unwrap();
        assert_eq!(t, t2);
        assert_eq!(s, save_string(&t2));
    }

    #[test]
    fn schema_errors_carry_paths() {
        let bad = FX.replace("[1,4.1]", "[4,4.1]");
        let e = load_str(&bad).unwrap_err().to_string();
        assert!(e.starts_with("$.levels[0].left[0]"), "{e}");
        let bad = FX.replace(r#""lclose":true"#, r#""lclose":[true]"#);
        let e = load_str(&bad).unwrap_err().to_string();
        assert!(e.starts_with("$.levels[0].lclose"), "{e}");
    }
}
