//! Flat, typed key-value experiment files.
//!
//! ```text
//! # K_n □ K_2 at p = 2/n
//! command:str = experiment
//! name:str = kn-box-k2
//! n:int = 500
//! seed:int = 7
//! ```
//!
//! Every key except `command` and `name` becomes the flag `--key` (with `_`
//! read as `-`), so the subcommand's parser validates keys and values;
//! flags given on the command line win over the file.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{config, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(String),
    List(Vec<String>),
}

impl Value {
    fn parse(ty: &str, raw: &str, line: usize) -> CliResult<Value> {
        let bad = |what: &str| config(format!("config line {line}: {what}"));
        Ok(match ty {
            "int" => Value::Int(raw.parse().map_err(|_| bad(&format!("`{raw}` is not an int")))?),
            "float" => {
                let x: f64 = raw.parse().map_err(|_| bad(&format!("`{raw}` is not a float")))?;
                if !x.is_finite() {
                    return Err(bad("float must be finite"));
                }
                Value::Float(x)
            }
            "bool" => Value::Bool(match raw {
                "true" => true,
                "false" => false,
                _ => return Err(bad(&format!("`{raw}` is not true/false"))),
            }),
            "str" => {
                if raw.is_empty() {
                    return Err(bad("empty string"));
                }
                Value::Str(raw.to_string())
            }
            "list" => {
                let items: Vec<String> = raw.split(',').map(|s| s.trim().to_string()).collect();
                if items.iter().any(|s| s.is_empty()) {
                    return Err(bad("list items must be nonempty"));
                }
                Value::List(items)
            }
            other => return Err(bad(&format!("unknown type `{other}` (expected int, float, bool, str or list)"))),
        })
    }

    /// Flag value text, or `None` for a false bool (flag omitted).
    fn flag_text(&self) -> Option<Option<String>> {
        match self {
            Value::Int(i) => Some(Some(i.to_string())),
            Value::Float(x) => Some(Some(format!("{x:?}"))),
            Value::Bool(true) => Some(None),
            Value::Bool(false) => None,
            Value::Str(s) => Some(Some(s.clone())),
            Value::List(v) => Some(Some(v.join(","))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub entries: BTreeMap<String, Value>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> CliResult<ConfigFile> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let n = i + 1;
            let (lhs, rhs) = line.split_once('=').ok_or_else(|| config(format!("config line {n}: expected `key:type = value`")))?;
            let (key, ty) = lhs.trim().split_once(':').ok_or_else(|| config(format!("config line {n}: missing `:type` on key")))?;
            let key = key.trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return Err(config(format!("config line {n}: bad key `{key}`")));
            }
            let value = Value::parse(ty.trim(), rhs.trim(), n)?;
            if entries.insert(key.replace('-', "_"), value).is_some() {
                return Err(config(format!("config line {n}: duplicate key `{key}`")));
            }
        }
        Ok(ConfigFile { entries })
    }

    pub fn load(path: &Path) -> CliResult<ConfigFile> {
        let text = std::fs::read_to_string(path).map_err(|e| config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn str_entry(&self, key: &str) -> CliResult<Option<String>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(Value::Str(s)) => Ok(Some(s.clone())),
            Some(_) => Err(config(format!("config key `{key}` must have type str"))),
        }
    }
}

/// Options that take a value before the subcommand.
const GLOBAL_VALUED: [&str; 3] = ["--threads", "--out", "--config"];

fn flag_name(key: &str) -> String {
    format!("--{}", key.replace('_', "-"))
}

fn mentions(args: &[String], flag: &str) -> bool {
    args.iter().any(|a| a == flag || a.starts_with(&format!("{flag}=")))
}

fn is_global(arg: &str) -> bool {
    let name = arg.split('=').next().unwrap_or(arg);
    GLOBAL_VALUED.contains(&name) || matches!(name, "-h" | "--help" | "-V" | "--version")
}

/// Rewrites `argv` (program name first) by splicing in the config file
/// named by `--config`, if any.
pub fn expand_args(argv: Vec<String>) -> CliResult<Vec<String>> {
    let mut rest: Vec<String> = Vec::with_capacity(argv.len());
    let mut path = None;
    let mut it = argv.into_iter();
    let program = it.next().unwrap_or_else(|| "perclab".into());
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().ok_or_else(|| config("--config needs a path"))?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        let mut out = vec![program];
        out.extend(rest);
        return Ok(out);
    };
    let cfg = ConfigFile::load(Path::new(&path))?;

    // Split the user's tokens into leading globals, subcommand, and the rest.
    let mut globals = Vec::new();
    let mut i = 0;
    while i < rest.len() && is_global(&rest[i]) {
        globals.push(rest[i].clone());
        if GLOBAL_VALUED.contains(&rest[i].as_str()) && i + 1 < rest.len() {
            globals.push(rest[i + 1].clone());
            i += 1;
        }
        i += 1;
    }
    let mut tail: Vec<String> = rest[i..].to_vec();
    let sub = match tail.first() {
        Some(t) if !t.starts_with('-') => tail.remove(0),
        _ => cfg.str_entry("command")?.ok_or_else(|| config("no subcommand given and config has no `command:str` key"))?,
    };
    let mut out = vec![program];
    out.extend(globals.iter().cloned());
    out.push(sub.clone());
    if sub == "experiment" {
        let user_named = tail.first().is_some_and(|t| !t.starts_with('-'));
        if user_named {
            out.push(tail.remove(0));
        } else {
            out.push(cfg.str_entry("name")?.ok_or_else(|| config("experiment needs a name (config key `name:str`)"))?);
        }
    }
    let user_flags: Vec<String> = globals.iter().chain(tail.iter()).cloned().collect();
    for (key, value) in &cfg.entries {
        if key == "command" || key == "name" {
            continue;
        }
        let flag = flag_name(key);
        if mentions(&user_flags, &flag) {
            continue;
        }
        match value.flag_text() {
            Some(Some(text)) => out.push(format!("{flag}={text}")),
            Some(None) => out.push(flag),
            None => {}
        }
    }
    out.extend(tail);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn parses_typed_entries() {
        let c = ConfigFile::parse("# c\nn:int = 5\np:float=0.25\nflag:bool = true\ndims:list = 4, 4\nfamily:str = torus\n").unwrap();
        assert_eq!(c.entries["n"], Value::Int(5));
        assert_eq!(c.entries["p"], Value::Float(0.25));
        assert_eq!(c.entries["dims"], Value::List(vec!["4".into(), "4".into()]));
    }

    #[test]
    fn rejects_malformed_lines() {
        for bad in ["n = 5", "n:int = x", "n:real = 1", "n:int = 1\nn:int = 2", ":int = 3", "b:bool = yes"] {
            assert!(ConfigFile::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn config_expands_into_flags_and_cli_wins() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.cfg");
        std::fs::write(&path, "command:str = sim\nfamily:str = cycle\nn:int = 10\np:float = 0.5\nseed:int = 3\n").unwrap();
        let argv = s(&["perclab", "--config", path.to_str().unwrap(), "--seed", "9"]);
        let out = expand_args(argv).unwrap();
        assert_eq!(out[1], "sim");
        assert!(out.contains(&"--family=cycle".to_string()));
        assert!(out.contains(&"--p=0.5".to_string()));
        assert!(!out.iter().any(|a| a.starts_with("--seed=")));
        assert_eq!(&out[out.len() - 2..], &s(&["--seed", "9"])[..]);
    }

    #[test]
    fn experiment_name_from_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.cfg");
        std::fs::write(&path, "command:str = experiment\nname:str = kn-box-k2\nn:int = 50\n").unwrap();
        let out = expand_args(s(&["perclab", "--threads", "2", "--config", path.to_str().unwrap()])).unwrap();
        assert_eq!(&out[..5], &s(&["perclab", "--threads", "2", "experiment", "kn-box-k2"])[..]);
        assert!(out.contains(&"--n=50".to_string()));
    }
}
