//! Numeric literals and the key-value config file.

use std::f64::consts::PI;
use std::path::Path;

/// Parses a real number, accepting `pi` multiples such as `pi`, `2pi`,
/// `-pi/2`, `0.5*pi` and `π`.
pub fn parse_real(raw: &str) -> Result<f64, String> {
    let t = raw.trim().to_ascii_lowercase().replace('π', "pi");
    let bad = || format!("`{raw}` is not a number (pi multiples like `2pi` or `pi/2` are accepted)");
    let value = if let Some(pos) = t.find("pi") {
        let (pre, post) = (t[..pos].trim_end_matches('*'), &t[pos + 2..]);
        let coef = match pre {
            "" | "+" => 1.0,
            "-" => -1.0,
            p => p.parse::<f64>().map_err(|_| bad())?,
        };
        let div = match post {
            "" => 1.0,
            q => q.strip_prefix('/').and_then(|q| q.parse::<f64>().ok()).ok_or_else(bad)?,
        };
        coef * PI / div
    } else {
        t.parse::<f64>().map_err(|_| bad())?
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("`{raw}` is not finite"))
    }
}

/// Reads `key = value` lines (`#` starts a comment) into flag/value pairs.
pub fn read_config(path: &Path) -> Result<Vec<(String, String)>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(format!("{}:{}: expected `key = value`", path.display(), no + 1));
        };
        let key = k.trim().trim_start_matches("--").to_string();
        if key.is_empty() {
            return Err(format!("{}:{}: empty key", path.display(), no + 1));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

/// Appends config entries to `argv` unless the flag is already given there.
/// Command-line flags win over the file.
pub fn merge_config(argv: &mut Vec<String>) -> Result<(), String> {
    let mut path = None;
    for (i, a) in argv.iter().enumerate() {
        if a == "--config" {
            path = Some(argv.get(i + 1).cloned().ok_or("--config needs a file")?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(()) };
    let entries = read_config(Path::new(&path))?;
    let given = |key: &str, argv: &[String]| {
        let flag = format!("--{key}");
        argv.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")))
    };
    let mut extra = Vec::new();
    for (key, value) in entries {
        if key == "config" || given(&key, argv) {
            continue;
        }
        match value.as_str() {
            "true" => extra.push(format!("--{key}")),
            "false" => {}
            _ => extra.push(format!("--{key}={value}")),
        }
    }
    argv.extend(extra);
    Ok(())
}
