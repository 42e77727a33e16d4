//! Flat `key=value` configuration and run manifests.
//!
//! Values resolve as flag, then config file, then default. Every resolved
//! value is recorded, so the manifest written next to the outputs can be fed
//! back with `--config` to repeat the run.

use std::collections::BTreeMap;
use std::fmt::{self, Display, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

pub const SEED_ENV: &str = "RVRP_SEED";

/// Comma separated list usable as a flag or config value.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| p.parse::<T>().map_err(|e| format!("`{p}`: {e}")))
            .collect::<Result<Vec<_>, _>>()
            .map(List)
    }
}

impl<T: Display> Display for List<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub struct Settings {
    subcommand: &'static str,
    file: BTreeMap<String, String>,
    resolved: Vec<(String, String)>,
    outputs: Vec<(String, PathBuf)>,
}

impl Settings {
    pub fn new(subcommand: &'static str, config: Option<&Path>) -> Result<Self> {
        let file = match config {
            Some(p) => {
                let text = fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                parse_config(&text, subcommand).with_context(|| format!("in config {}", p.display()))?
            }
            None => BTreeMap::new(),
        };
        Ok(Self { subcommand, file, resolved: Vec::new(), outputs: Vec::new() })
    }

    fn from_file<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        match self.file.remove(key) {
            Some(v) => v.parse::<T>().map(Some).map_err(|e| anyhow!("config key `{key}`: {e}")),
            None => Ok(None),
        }
    }

    pub fn get<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T::Err: Display,
    {
        let v = self.get_opt(key, flag)?.unwrap_or(default);
        self.record(key, &v);
        Ok(v)
    }

    /// Like [`Settings::get`] without a default; absent values are not recorded.
    pub fn get_opt<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        let file = self.from_file(key)?;
        let v = flag.or(file);
        if let Some(v) = &v {
            self.record(key, v);
        }
        Ok(v)
    }

    /// Boolean switch: set by the flag or by `key=true` in the config.
    pub fn switch(&mut self, key: &str, flag: bool) -> Result<bool> {
        let file: Option<bool> = self.from_file(key)?;
        let v = flag || file.unwrap_or(false);
        self.record(key, &v);
        Ok(v)
    }

    /// Flag, then config, then `RVRP_SEED`, then 0.
    pub fn seed(&mut self, flag: Option<u64>) -> Result<u64> {
        let env = match std::env::var(SEED_ENV) {
            Ok(v) => Some(v.trim().parse::<u64>().map_err(|e| anyhow!("{SEED_ENV}: {e}"))?),
            Err(_) => None,
        };
        let file = self.from_file("seed")?;
        let seed = flag.or(file).or(env).unwrap_or(0);
        self.record("seed", &seed);
        Ok(seed)
    }

    fn record(&mut self, key: &str, v: &dyn Display) {
        let v = v.to_string();
        match self.resolved.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = v,
            None => self.resolved.push((key.to_string(), v)),
        }
    }

    /// Rejects config keys no option consumed.
    pub fn finish(&self) -> Result<()> {
        if let Some(k) = self.file.keys().next() {
            bail!("unknown config key `{k}` for `{}`", self.subcommand);
        }
        Ok(())
    }

    pub fn output(&mut self, name: &str, path: &Path) {
        self.outputs.push((name.to_string(), path.to_path_buf()));
    }

    pub fn manifest(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "subcommand={}", self.subcommand);
        let _ = writeln!(s, "version={}", env!("CARGO_PKG_VERSION"));
        for (k, v) in &self.resolved {
            let _ = writeln!(s, "{k}={v}");
        }
        for (k, p) in &self.outputs {
            let _ = writeln!(s, "output.{k}={}", p.display());
        }
        s
    }

    pub fn write_manifest(&self, path: &Path) -> Result<()> {
        write_file(path, &self.manifest())
    }
}

fn parse_config(text: &str, subcommand: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| anyhow!("line {}: expected key=value", i + 1))?;
        let (k, v) = (k.trim(), v.trim());
        match k {
            "subcommand" if v != subcommand => bail!("config was written by `{v}`, not `{subcommand}`"),
            "subcommand" | "version" => {}
            _ if k.starts_with("output.") => {}
            _ => {
                map.insert(k.to_string(), v.to_string());
            }
        }
    }
    Ok(map)
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

/// `<file>.manifest.txt` next to a single-file output.
pub fn manifest_beside(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.txt");
    path.with_file_name(name)
}
