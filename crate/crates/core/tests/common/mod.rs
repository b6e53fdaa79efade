//! Single-position corruption of JSON-encoded signatures.

#![allow(dead_code)]

use serde_json::Value;

#[derive(Clone, Debug)]
enum Step {
    Key(String),
    Index(usize),
}

/// Location of one byte of a hex string, or one number.
#[derive(Clone, Debug)]
pub struct Site {
    path: Vec<Step>,
    byte: Option<usize>,
}

impl Site {
    /// Top-level field this site belongs to.
    pub fn field(&self) -> &str {
        match self.path.first() {
            Some(Step::Key(k)) => k,
            _ => "",
        }
    }

    pub fn byte(&self) -> Option<usize> {
        self.byte
    }

    pub fn describe(&self) -> String {
        let mut s = String::new();
        for p in &self.path {
            match p {
                Step::Key(k) => s.push_str(&format!(".{k}")),
                Step::Index(i) => s.push_str(&format!("[{i}]")),
            }
        }
        if let Some(b) = self.byte {
            s.push_str(&format!("@{b}"));
        }
        s
    }
}

pub fn sites(v: &Value) -> Vec<Site> {
    let mut out = Vec::new();
    walk(v, &mut Vec::new(), &mut out);
    out
}

fn walk(v: &Value, path: &mut Vec<Step>, out: &mut Vec<Site>) {
    match v {
        Value::Object(m) => {
            for (k, c) in m {
                path.push(Step::Key(k.clone()));
                walk(c, path, out);
                path.pop();
            }
        }
        Value::Array(a) => {
            for (i, c) in a.iter().enumerate() {
                path.push(Step::Index(i));
                walk(c, path, out);
                path.pop();
            }
        }
        Value::String(s) => {
            for b in 0..s.len() / 2 {
                out.push(Site {
                    path: path.clone(),
                    byte: Some(b),
                });
            }
        }
        Value::Number(_) => out.push(Site {
            path: path.clone(),
            byte: None,
        }),
        _ => {}
    }
}

/// Copy of `v` with the byte at `site` xored with 1, or the number incremented.
pub fn tamper(v: &Value, site: &Site) -> Value {
    let mut out = v.clone();
    let mut cur = &mut out;
    for p in &site.path {
        cur = match p {
            Step::Key(k) => cur.get_mut(k.as_str()).expect("path"),
            Step::Index(i) => cur.get_mut(*i).expect("path"),
        };
    }
    match (cur, site.byte) {
        (Value::String(s), Some(b)) => {
            let mut bytes = hex::decode(&*s).expect("hex field");
            bytes[b] ^= 1;
            *s = hex::encode(bytes);
        }
        (n @ Value::Number(_), None) => {
            *n = Value::from(n.as_u64().expect("unsigned") + 1);
        }
        _ => unreachable!("site kind"),
    }
    out
}

/// Up to `per_field` sites of every top-level field, spread evenly.
pub fn sample_per_field(all: &[Site], per_field: usize) -> Vec<Site> {
    let mut fields: Vec<&str> = all.iter().map(Site::field).collect();
    fields.dedup();
    let mut out = Vec::new();
    for f in fields {
        let of: Vec<&Site> = all.iter().filter(|s| s.field() == f).collect();
        let step = (of.len() / per_field).max(1);
        out.extend(
            of.iter()
                .step_by(step)
                .take(per_field)
                .map(|s| (*s).clone()),
        );
    }
    out
}
