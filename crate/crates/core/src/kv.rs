//! Flat `key = value` text used for configs, manifests and dataset metadata.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

/// Parses `key = value` lines. `#` starts a comment line; blank lines are ignored.
pub fn parse_kv(text: &str, source: &Path) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: source.to_path_buf(),
            line: lineno + 1,
            message,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err("expected `key = value`".into()))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(err("empty key".into()));
        }
        if out
            .insert(key.to_owned(), value.trim().to_owned())
            .is_some()
        {
            return Err(err(format!("duplicate key {key}")));
        }
    }
    Ok(out)
}

pub fn render_kv<'a, I>(pairs: I) -> String
where
    I: IntoIterator<Item = (&'a str, String)>,
{
    let mut out = String::new();
    for (k, v) in pairs {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects_duplicates() {
        let m = parse_kv("# c\na = 1\n b= two words \n", Path::new("x")).unwrap();
        assert_eq!(m["a"], "1");
        assert_eq!(m["b"], "two words");
        assert!(parse_kv("a=1\na=2", Path::new("x")).is_err());
        assert!(parse_kv("novalue", Path::new("x")).is_err());
    }
}
