//! Flat `key = value` run configuration with dotted section prefixes.
//!
//! Files hold one `section.key = value` pair per line with `#` comments;
//! command-line overrides use the same dotted names (`--camera.f 0.98`).
//! Typed getters validate ranges and report the offending field path.

use crate::{CliError, CliResult};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Default)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!(
                    "{}:{}: expected 'key = value', got '{raw}'",
                    path.display(),
                    lineno + 1
                ))
            })?;
            cfg.set(key.trim(), value.trim());
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    /// Keys with the given section prefix that are not in the known list;
    /// used to reject misspelled fields early.
    pub fn unknown_keys(&self, known: &[&str]) -> Vec<String> {
        self.entries
            .keys()
            .filter(|k| !known.contains(&k.as_str()))
            .cloned()
            .collect()
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }

    pub fn require_str(&self, key: &str) -> CliResult<&str> {
        self.get_str(key)
            .ok_or_else(|| CliError::Config(format!("missing required key '{key}'")))
    }

    pub fn get_f64(&self, key: &str) -> CliResult<Option<f64>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<f64>()
                .map(Some)
                .map_err(|e| CliError::Config(format!("{key}: '{raw}' is not a number ({e})"))),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> CliResult<f64> {
        Ok(self.get_f64(key)?.unwrap_or(default))
    }

    pub fn get_u64(&self, key: &str) -> CliResult<Option<u64>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<u64>()
                .map(Some)
                .map_err(|e| CliError::Config(format!("{key}: '{raw}' is not an integer ({e})"))),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> CliResult<u64> {
        Ok(self.get_u64(key)?.unwrap_or(default))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> CliResult<usize> {
        Ok(self.u64_or(key, default as u64)? as usize)
    }

    pub fn bool_or(&self, key: &str, default: bool) -> CliResult<bool> {
        match self.entries.get(key).map(|s| s.as_str()) {
            None => Ok(default),
            Some("true") | Some("1") | Some("yes") => Ok(true),
            Some("false") | Some("0") | Some("no") => Ok(false),
            Some(other) => Err(CliError::Config(format!(
                "{key}: '{other}' is not a boolean (true/false)"
            ))),
        }
    }
}

/// Parsed command line: verb plus flags.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub verb: String,
    pub config: Config,
    pub out: Option<String>,
}

/// Parses `texplane <verb> [--config FILE] [--out DIR] [--seed N]
/// [--section.key VALUE]...`; later flags win, and every flag with a dotted
/// name overrides the config key of the same name.
pub fn parse_args<I: IntoIterator<Item = String>>(args: I) -> CliResult<Invocation> {
    let mut it = args.into_iter();
    let verb = it
        .next()
        .ok_or_else(|| CliError::Config(USAGE.trim().to_string()))?;
    if verb == "--help" || verb == "-h" || verb == "help" {
        return Err(CliError::Config(USAGE.trim().to_string()));
    }
    let mut overrides: Vec<(String, String)> = Vec::new();
    let mut config_path: Option<String> = None;
    let mut out: Option<String> = None;
    while let Some(flag) = it.next() {
        let name = flag
            .strip_prefix("--")
            .ok_or_else(|| CliError::Config(format!("expected a --flag, got '{flag}'")))?;
        let mut value = || {
            it.next()
                .ok_or_else(|| CliError::Config(format!("flag --{name} needs a value")))
        };
        match name {
            "config" => config_path = Some(value()?),
            "out" => out = Some(value()?),
            "seed" => overrides.push(("seed".into(), value()?)),
            dotted if dotted.contains('.') => overrides.push((dotted.to_string(), value()?)),
            other => {
                return Err(CliError::Config(format!(
                    "unknown flag --{other} (keys use dotted names, e.g. --camera.f)"
                )))
            }
        }
    }
    let mut config = match config_path {
        Some(p) => Config::from_file(Path::new(&p))?,
        None => Config::new(),
    };
    for (k, v) in overrides {
        config.set(&k, &v);
    }
    Ok(Invocation { verb, config, out })
}

pub const USAGE: &str = "
usage: texplane <verb> [--config FILE] [--out DIR] [--seed N] [--section.key VALUE]...

verbs:
  simulate    generate a ground-truth point pattern (CSV + metadata + SVG)
  preprocess  image -> 16-bit probability-map PGM + sidecar
  detect      probability map -> latent point pattern CSV (+ overlay SVG)
  estimate    point pattern -> orientation result JSON + SVG
  pipeline    preprocess + detect + estimate in one run directory
  plot        point pattern CSV -> scatter SVG

Any config key can be set on the command line with a flag of the same dotted
name, e.g. --camera.f 0.98 --detect.k2 0.25. Without --out, artifacts go to
$TEXPLANE_RUN_ROOT/<verb> (or ./runs/<verb>).
";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_with_comments_and_overrides() {
        let dir = std::env::temp_dir().join("texplane-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.cfg");
        std::fs::write(
            &path,
            "# run\ncamera.f = 0.98\nsim.kind = poisson # inline\n",
        )
        .unwrap();
        let inv = parse_args(
            [
                "simulate",
                "--config",
                path.to_str().unwrap(),
                "--sim.kind",
                "regular",
                "--seed",
                "7",
            ]
            .map(String::from),
        )
        .unwrap();
        assert_eq!(inv.verb, "simulate");
        assert_eq!(inv.config.get_str("camera.f"), Some("0.98"));
        assert_eq!(inv.config.get_str("sim.kind"), Some("regular"));
        assert_eq!(inv.config.u64_or("seed", 0).unwrap(), 7);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse_args(["simulate", "oops"].map(String::from)).is_err());
        assert!(parse_args(["simulate", "--nodot", "1"].map(String::from)).is_err());
        assert!(parse_args(["simulate", "--camera.f"].map(String::from)).is_err());
        assert!(parse_args(Vec::<String>::new()).is_err());
    }

    #[test]
    fn typed_getters_report_field_paths() {
        let mut cfg = Config::new();
        cfg.set("camera.f", "abc");
        let err = cfg.get_f64("camera.f").unwrap_err();
        assert!(err.to_string().contains("camera.f"));
        assert!(cfg.require_str("sim.kind").is_err());
        cfg.set("detect.overlay", "maybe");
        assert!(cfg.bool_or("detect.overlay", false).is_err());
    }
}
