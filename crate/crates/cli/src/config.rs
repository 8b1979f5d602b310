//! Line-oriented `key = value` configuration with `include <path>` support.
//! Paths are resolved relative to the file they appear in; later keys
//! override earlier ones.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use regap_core::channel::GridConfig;
use regap_core::sim::NoiseMode;
use regap_core::Prior;

#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
    /// Directory of the last file that set each key, for path resolution.
    dirs: BTreeMap<String, PathBuf>,
}

impl RawConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = RawConfig::default();
        cfg.merge_file(path, 0)?;
        Ok(cfg)
    }

    fn merge_file(&mut self, path: &Path, depth: usize) -> Result<()> {
        if depth > 8 {
            bail!("include chain too deep at {}", path.display());
        }
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("include ") {
                let inc = dir.join(rest.trim());
                self.merge_file(&inc, depth + 1)?;
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("{}:{}: expected `key = value`", path.display(), lineno + 1);
            };
            let key = key.trim().to_string();
            self.values.insert(key.clone(), value.trim().to_string());
            self.dirs.insert(key, dir.clone());
        }
        Ok(())
    }

    #[cfg(test)]
    pub fn set(&mut self, key: &str, value: String) {
        self.values.insert(key.to_string(), value);
        self.dirs.insert(key.to_string(), PathBuf::from("."));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .with_context(|| format!("bad `{key}` value `{v}`")),
        }
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .with_context(|| format!("bad `{key}` value `{v}`")),
        }
    }

    pub fn bool(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some("true") | Some("1") | Some("yes") => Ok(true),
            Some("false") | Some("0") | Some("no") => Ok(false),
            Some(v) => bail!("bad `{key}` value `{v}` (expected true/false)"),
        }
    }

    /// Scalar, comma list, or `linspace:<lo>:<hi>:<n>`.
    pub fn grid(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(raw) = self.get(key) else {
            return Ok(None);
        };
        if let Some(rest) = raw.strip_prefix("linspace:") {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                bail!("bad `{key}`: linspace needs lo:hi:n");
            }
            let lo: f64 = parts[0].parse()?;
            let hi: f64 = parts[1].parse()?;
            let n: usize = parts[2].parse()?;
            if n < 2 || hi <= lo {
                bail!("bad `{key}`: linspace needs n >= 2 and hi > lo");
            }
            return Ok(Some(
                (0..n)
                    .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
                    .collect(),
            ));
        }
        let vals: Vec<f64> = raw
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .with_context(|| format!("bad `{key}` entry `{s}`"))
            })
            .collect::<Result<_>>()?;
        if vals.is_empty() {
            bail!("`{key}` grid is empty");
        }
        Ok(Some(vals))
    }

    /// Load the prior referenced by `prior = <path>`.
    pub fn prior(&self) -> Result<Prior> {
        let raw = self
            .get("prior")
            .context("config needs `prior = <path to prior records>`")?;
        let dir = self.dirs.get("prior").cloned().unwrap_or_default();
        let path = dir.join(raw);
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("reading prior {}", path.display()))?;
        Ok(Prior::parse_records(&text)?)
    }

    pub fn seed(&self, cli_seed: Option<u64>) -> Result<u64> {
        if let Some(s) = cli_seed {
            return Ok(s);
        }
        match self.get("seed") {
            Some(v) => v.parse().with_context(|| format!("bad `seed` value `{v}`")),
            None => bail!("seed is mandatory: set `seed =` in the config or pass --seed"),
        }
    }

    pub fn noise_mode(&self) -> Result<NoiseMode> {
        Ok(NoiseMode::parse(self.get("noise").unwrap_or("sphere"))?)
    }

    /// Channel tabulation knobs; the tau cap covers every (delta, sigma) pair.
    pub fn grid_config(&self, prior: &Prior, deltas: &[f64], sigmas: &[f64]) -> Result<GridConfig> {
        let s2 = prior.second_moment();
        let mut cap_sq: f64 = 1.0;
        for &d in deltas {
            for &s in sigmas {
                cap_sq = cap_sq.max(10.0 * (s * s + s2) / d);
            }
        }
        Ok(GridConfig {
            n_intervals: self.usize("n_intervals", 1000)?,
            mass_tail: self.f64("mass_tail", 1e-3)?,
            n_taus: self.usize("n_taus", 2000)?,
            tau_floor: self.f64("tau_floor", 1e-4)?,
            tau_cap: self.f64("tau_cap", cap_sq.sqrt())?,
        })
    }
}
