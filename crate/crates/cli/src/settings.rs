//! Run manifests: a plain `key=value` file merged with command-line
//! overrides.  The merged settings are hashed into a digest that every
//! output artifact records, so any file can be traced back to the exact
//! configuration that produced it.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cmdgen_core::rng::fnv1a64;
use cmdgen_core::runtime::RuntimeError;
use cmdgen_core::textcorpus::{CorpusError, FileMeta, Task};
use cmdgen_core::worldsim::WorldError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Every failure carries the process exit code it should end with:
/// bad arguments or inputs are 1, filesystem trouble is 2, and a
/// numerically broken training run is 3.
#[derive(Debug)]
pub enum CliError {
    Contract(String),
    Io(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Contract(_) => 1,
            CliError::Io(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Contract(m) | CliError::Io(m) | CliError::Numeric(m) => f.write_str(m),
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::Io { .. } => CliError::Io(e.to_string()),
            CorpusError::Malformed { .. } => CliError::Contract(e.to_string()),
        }
    }
}

impl From<RuntimeError> for CliError {
    fn from(e: RuntimeError) -> Self {
        match e {
            RuntimeError::NonFinite { .. } => CliError::Numeric(e.to_string()),
            RuntimeError::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Contract(e.to_string()),
        }
    }
}

impl From<WorldError> for CliError {
    fn from(e: WorldError) -> Self {
        CliError::Contract(e.to_string())
    }
}

pub fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Keys a manifest may define.  One manifest can drive the whole
/// generate → train → predict → eval pipeline; each subcommand reads the
/// keys it cares about and ignores the rest.
const KNOWN_KEYS: &[&str] = &[
    // Corpus generation.
    "games",
    "seed",
    "rooms_min",
    "rooms_max",
    "objects_min",
    "objects_max",
    "door_prob",
    "door_locked_prob",
    "door_closed_prob",
    "container_locked_prob",
    "container_closed_prob",
    "carryable_nested_prob",
    "key_in_inventory_prob",
    "walkthrough_len",
    "train_frac",
    "valid_frac",
    "test_frac",
    // Shared plumbing.
    "out_dir",
    "task",
    "arch",
    "train_data",
    "valid_data",
    "data",
    "checkpoint",
    "metrics_log",
    "predictions",
    "report_prefix",
    // Optimization.
    "epochs",
    "lr",
    "clip",
    "optim",
    "patience",
    "dropout",
    "d_emb",
    "d_hid",
    "emb_scale",
    // Decoding.
    "beam_width",
    "top_k",
    "cmd_len_cap",
    "session_cap",
    "length_norm",
];

#[derive(Debug, Default)]
pub struct Settings {
    map: BTreeMap<String, String>,
}

impl Settings {
    /// Parse a manifest file.  Lines are `key = value`; `#` starts a
    /// comment; blank lines are skipped; unknown keys are rejected so
    /// typos fail loudly instead of silently using a default.
    pub fn load(config: Option<&Path>) -> Result<Settings, CliError> {
        let mut map = BTreeMap::new();
        if let Some(path) = config {
            let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
            for (idx, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let at = format!("{}:{}", path.display(), idx + 1);
                let (k, v) = line.split_once('=').ok_or_else(|| {
                    CliError::Contract(format!("{at}: expected key=value, got {raw:?}"))
                })?;
                let (k, v) = (k.trim(), v.trim());
                if !KNOWN_KEYS.contains(&k) {
                    return Err(CliError::Contract(format!("{at}: unknown key {k:?}")));
                }
                map.insert(k.to_string(), v.to_string());
            }
        }
        Ok(Settings { map })
    }

    /// Overlay one flag value, if the flag was given.
    pub fn set<T: fmt::Display>(&mut self, key: &'static str, value: Option<T>) {
        debug_assert!(KNOWN_KEYS.contains(&key), "flag writes unknown key {key}");
        if let Some(v) = value {
            self.map.insert(key.to_string(), v.to_string());
        }
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: fmt::Display,
    {
        match self.map.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| CliError::Contract(format!("{key} = {raw:?}: {e}"))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.map.get(key).map(PathBuf::from)
    }

    /// A path set explicitly, or `out_dir/<file>` when only the output
    /// directory is known.
    pub fn path_or_derived(&self, key: &str, file: &str) -> Result<PathBuf, CliError> {
        if let Some(p) = self.path(key) {
            return Ok(p);
        }
        match self.path("out_dir") {
            Some(dir) => Ok(dir.join(file)),
            None => Err(CliError::Contract(format!(
                "no {key} given: set --{} or out_dir in the manifest",
                key.replace('_', "-")
            ))),
        }
    }

    pub fn task(&self) -> Result<Task, CliError> {
        match self.raw("task").unwrap_or("acg") {
            "acg" => Ok(Task::Acg),
            "acge" => Ok(Task::Acge),
            other => Err(CliError::Contract(format!(
                "task = {other:?}: expected \"acg\" or \"acge\""
            ))),
        }
    }

    /// Stable fingerprint of the merged settings.  Path keys are left
    /// out: where an artifact lives does not change what is in it, so
    /// runs that differ only in directories share a digest.
    pub fn digest(&self) -> String {
        const PATH_KEYS: &[&str] = &[
            "out_dir",
            "train_data",
            "valid_data",
            "data",
            "checkpoint",
            "metrics_log",
            "predictions",
            "report_prefix",
        ];
        let blob: String = self
            .map
            .iter()
            .filter(|(k, _)| !PATH_KEYS.contains(&k.as_str()))
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect();
        format!("{:016x}", fnv1a64(blob.as_bytes()))
    }

    pub fn meta(&self, seed: Option<u64>) -> FileMeta {
        FileMeta {
            version: TOOL_VERSION.to_string(),
            seed,
            config_digest: Some(self.digest()),
        }
    }
}

/// Header line stamped onto plain-text outputs (tables, CSV).
pub fn text_header(meta: &FileMeta) -> String {
    let mut line = format!("# cmdgen {}", meta.version);
    if let Some(seed) = meta.seed {
        line.push_str(&format!(" seed={seed}"));
    }
    if let Some(d) = &meta.config_digest {
        line.push_str(&format!(" config={d}"));
    }
    line
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn manifest(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn flags_override_the_manifest() {
        let f = manifest("games = 10\nseed = 3 # trailing comment\n\n# full-line comment\n");
        let mut s = Settings::load(Some(f.path())).unwrap();
        assert_eq!(s.get_or("games", 0usize).unwrap(), 10);
        s.set("games", Some(25usize));
        assert_eq!(s.get_or("games", 0usize).unwrap(), 25);
        assert_eq!(s.get_or("seed", 0u64).unwrap(), 3);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_contract_errors() {
        let f = manifest("gamez = 10\n");
        assert!(matches!(Settings::load(Some(f.path())), Err(CliError::Contract(_))));

        let f = manifest("games = plenty\n");
        let s = Settings::load(Some(f.path())).unwrap();
        assert!(matches!(s.get::<usize>("games"), Err(CliError::Contract(_))));

        let f = manifest("no equals sign here\n");
        assert!(matches!(Settings::load(Some(f.path())), Err(CliError::Contract(_))));
    }

    #[test]
    fn digest_ignores_definition_order_but_not_values() {
        let a = Settings::load(Some(manifest("games = 10\nseed = 3\n").path())).unwrap();
        let b = Settings::load(Some(manifest("seed = 3\ngames = 10\n").path())).unwrap();
        let c = Settings::load(Some(manifest("seed = 4\ngames = 10\n").path())).unwrap();
        assert_eq!(a.digest(), b.digest());
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn derived_paths_hang_off_the_output_directory() {
        let mut s = Settings::default();
        assert!(s.path_or_derived("train_data", "acg_train.jsonl").is_err());
        s.set("out_dir", Some("/tmp/run"));
        assert_eq!(
            s.path_or_derived("train_data", "acg_train.jsonl").unwrap(),
            PathBuf::from("/tmp/run/acg_train.jsonl")
        );
        s.set("train_data", Some("elsewhere.jsonl"));
        assert_eq!(
            s.path_or_derived("train_data", "acg_train.jsonl").unwrap(),
            PathBuf::from("elsewhere.jsonl")
        );
    }
}
