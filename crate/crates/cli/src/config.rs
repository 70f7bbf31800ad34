//! `key = value` files that preset command-line flags.
//!
//! Each line `key = value` becomes `--key value`; `true` becomes a bare
//! `--key` and `false` drops the flag. Keys already present on the command
//! line are skipped, so the command line always wins. Blank lines and lines
//! starting with `#` are ignored.

use std::ffi::OsString;
use std::fs;

/// Returns `args` with the flags from the `--config` file appended.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config file {path}: {e}"))?;
    let mut out = args;
    let given: Vec<String> = out.iter().filter_map(|a| a.to_str().map(str::to_owned)).collect();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config file {path} line {}, column 1: expected `key = value`", line_no + 1))?;
        let key = key.trim();
        let value = value.trim().trim_matches('"');
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(format!("config file {path} line {}, column 1: invalid key `{key}`", line_no + 1));
        }
        if key == "config" {
            return Err(format!("config file {path} line {}: nested config files are not supported", line_no + 1));
        }
        let flag = format!("--{}", key.replace('_', "-"));
        if given.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}="))) {
            continue;
        }
        match value {
            "false" => {}
            "true" => out.push(flag.into()),
            v => {
                out.push(flag.into());
                out.push(v.into());
            }
        }
    }
    Ok(out)
}

fn config_path(args: &[OsString]) -> Option<String> {
    let mut it = args.iter().filter_map(|a| a.to_str());
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().map(str::to_owned);
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_owned());
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn args(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    fn with_file(body: &str, f: impl FnOnce(&str)) {
        let path = std::env::temp_dir().join(format!("layerpack-config-{}-{}", std::process::id(), body.len()));
        fs::File::create(&path).unwrap().write_all(body.as_bytes()).unwrap();
        f(path.to_str().unwrap());
        fs::remove_file(path).unwrap();
    }

    #[test]
    fn command_line_overrides_file() {
        with_file("# campaign\nseed = 7\nrestarts = 4\nno_timing = true\ngeometric = false\n", |p| {
            let out = expand(args(&["layerpack", "optimize", "--config", p, "--seed", "9"])).unwrap();
            let tail: Vec<_> = out[4..].iter().map(|a| a.to_str().unwrap()).collect();
            assert_eq!(tail, ["--seed", "9", "--restarts", "4", "--no-timing"]);
        });
    }

    #[test]
    fn malformed_lines_report_their_position() {
        with_file("seed = 1\njunk\n", |p| {
            let err = expand(args(&["layerpack", "--config", p])).unwrap_err();
            assert!(err.contains("line 2"), "{err}");
        });
    }

    #[test]
    fn no_config_is_identity() {
        let a = args(&["layerpack", "count"]);
        assert_eq!(expand(a.clone()).unwrap(), a);
    }
}
