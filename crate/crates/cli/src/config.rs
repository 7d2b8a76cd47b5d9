//! Run configuration: command-line flags layered over an optional `key = value` file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use sha2::{Digest, Sha256};
use twistlab::moments::MPolicy;

use crate::CliError;

/// Flags shared by every subcommand. Anything left unset falls back to the config file,
/// then to the built-in default.
#[derive(Args, Debug, Default, Clone)]
pub struct Flags {
    /// Form label for single-form commands (same as --f)
    #[arg(long, global = true)]
    pub form: Option<String>,
    /// First form of the pair
    #[arg(long, global = true)]
    pub f: Option<String>,
    /// Second form of the pair
    #[arg(long, global = true)]
    pub g: Option<String>,
    /// Twist parameter d (odd, squarefree, coprime to the level)
    #[arg(long, global = true)]
    pub d: Option<u64>,
    /// Balancing parameter of the approximate functional equation
    #[arg(long = "Z", global = true)]
    pub z: Option<f64>,
    /// Base of the X ladder
    #[arg(long = "X", global = true)]
    pub x: Option<f64>,
    /// Number of ladder rungs X, 2X, 4X, ...
    #[arg(long, global = true)]
    pub ladder: Option<u32>,
    /// Head/tail split: auto, asymptotic or a positive number
    #[arg(long = "M", global = true)]
    pub m: Option<String>,
    /// Euler products run over p <= this cutoff
    #[arg(long, global = true)]
    pub prime_cutoff: Option<u64>,
    /// Coefficient table limit (default: whatever the command needs)
    #[arg(long, global = true)]
    pub limit: Option<usize>,
    /// Worker threads for the moment scan
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output file (default: stdout)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Coefficient cache directory
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Plain-text config file of `key = value` lines; flags win
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Oracle suites: all or a comma-separated list
    #[arg(long, global = true)]
    pub suite: Option<String>,
    /// Run the eta oracle with flipped Fricke signs (diagnostic; expected to fail)
    #[arg(long, global = true)]
    pub flip_eta: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub f: String,
    pub g: String,
    pub d: Option<u64>,
    pub z: f64,
    pub x: f64,
    pub ladder: u32,
    pub m: MPolicy,
    pub prime_cutoff: u64,
    pub limit: Option<usize>,
    pub workers: usize,
    pub out: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub suite: String,
    pub flip_eta: bool,
}

const KEYS: [&str; 15] = [
    "form", "f", "g", "d", "Z", "X", "ladder", "M", "prime-cutoff", "limit", "workers", "out", "cache-dir",
    "suite", "flip-eta",
];

fn parse_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("{}:{}: expected key = value", path.display(), i + 1)))?;
        let k = k.trim().trim_start_matches("--").replace('_', "-");
        if !KEYS.contains(&k.as_str()) {
            return Err(CliError::Usage(format!("{}:{}: unknown key '{k}'", path.display(), i + 1)));
        }
        map.insert(k, v.trim().to_string());
    }
    Ok(map)
}

fn from_file<T: FromStr>(file: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, CliError> {
    file.get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|_| CliError::Usage(format!("config key '{key}' has bad value '{v}'")))
        })
        .transpose()
}

impl RunConfig {
    pub fn resolve(flags: &Flags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(p) => parse_file(p)?,
            None => BTreeMap::new(),
        };
        let f = flags
            .form
            .clone()
            .or_else(|| flags.f.clone())
            .or(from_file(&file, "form")?)
            .or(from_file(&file, "f")?)
            .unwrap_or_else(|| "11a".into());
        let m_text = flags.m.clone().or(from_file(&file, "M")?).unwrap_or_else(|| "auto".into());
        let m = m_text.parse::<MPolicy>().map_err(|e| CliError::Usage(e.to_string()))?;
        let flip_file: Option<bool> = from_file(&file, "flip-eta")?;
        let cfg = Self {
            f,
            g: flags.g.clone().or(from_file(&file, "g")?).unwrap_or_else(|| "17a".into()),
            d: flags.d.or(from_file(&file, "d")?),
            z: flags.z.or(from_file(&file, "Z")?).unwrap_or(1.0),
            x: flags.x.or(from_file(&file, "X")?).unwrap_or(65536.0),
            ladder: flags.ladder.or(from_file(&file, "ladder")?).unwrap_or(1),
            m,
            prime_cutoff: flags.prime_cutoff.or(from_file(&file, "prime-cutoff")?).unwrap_or(100_000),
            limit: flags.limit.or(from_file(&file, "limit")?),
            workers: flags
                .workers
                .or(from_file(&file, "workers")?)
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
            out: flags.out.clone().or(from_file(&file, "out")?),
            cache_dir: flags.cache_dir.clone().or(from_file(&file, "cache-dir")?),
            suite: flags.suite.clone().or(from_file(&file, "suite")?).unwrap_or_else(|| "all".into()),
            flip_eta: flags.flip_eta || flip_file.unwrap_or(false),
        };
        if !(cfg.z > 0.0 && cfg.z.is_finite()) {
            return Err(CliError::Usage(format!("Z = {} must be positive", cfg.z)));
        }
        if cfg.workers == 0 {
            return Err(CliError::Usage("--workers must be positive".into()));
        }
        Ok(cfg)
    }

    /// Checks shared by the two-form commands.
    pub fn check_pair(&self) -> Result<(), CliError> {
        if self.f == self.g {
            return Err(CliError::Usage(format!("f and g must be distinct (both '{}')", self.f)));
        }
        if self.prime_cutoff < 1000 {
            return Err(CliError::Usage(format!("--prime-cutoff {} is below 1000", self.prime_cutoff)));
        }
        Ok(())
    }

    /// Short hash of everything that influences the numbers a command prints.
    /// Worker count and file locations are deliberately left out.
    pub fn hash(&self, command: &str) -> String {
        let canonical = format!(
            "command={command}\nf={}\ng={}\nd={:?}\nZ={:?}\nX={:?}\nladder={}\nM={}\nprime_cutoff={}\nlimit={:?}\nsuite={}\nflip_eta={}\n",
            self.f, self.g, self.d, self.z, self.x, self.ladder, self.m, self.prime_cutoff, self.limit, self.suite,
            self.flip_eta
        );
        hex::encode(&Sha256::digest(canonical.as_bytes())[..8])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_and_file_beats_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        fs::write(&path, "# comment\nX = 1024\nZ = 2\nprime-cutoff = 5000 # inline\nworkers=3\n").unwrap();
        let flags = Flags {
            config: Some(path),
            z: Some(1.5),
            ..Flags::default()
        };
        let cfg = RunConfig::resolve(&flags).unwrap();
        assert_eq!(cfg.x, 1024.0);
        assert_eq!(cfg.z, 1.5);
        assert_eq!(cfg.prime_cutoff, 5000);
        assert_eq!(cfg.workers, 3);
        assert_eq!(cfg.f, "11a");
        assert_eq!(cfg.m, MPolicy::Auto);
    }

    #[test]
    fn bad_files_are_usage_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.conf");
        fs::write(&path, "colour = blue\n").unwrap();
        let flags = Flags {
            config: Some(path.clone()),
            ..Flags::default()
        };
        assert!(matches!(RunConfig::resolve(&flags), Err(CliError::Usage(_))));
        fs::write(&path, "X = lots\n").unwrap();
        assert!(matches!(RunConfig::resolve(&flags), Err(CliError::Usage(_))));
    }

    #[test]
    fn hash_ignores_workers_and_paths() {
        let a = RunConfig::resolve(&Flags::default()).unwrap();
        let b = RunConfig {
            workers: a.workers + 7,
            out: Some("x.csv".into()),
            ..a.clone()
        };
        assert_eq!(a.hash("moment"), b.hash("moment"));
        let c = RunConfig { x: 2.0 * a.x, ..a.clone() };
        assert_ne!(a.hash("moment"), c.hash("moment"));
        assert_ne!(a.hash("moment"), a.hash("constants"));
    }
}
