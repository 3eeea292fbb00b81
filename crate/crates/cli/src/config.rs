//! Plain-text `key = value` configuration files.
//!
//! Each non-comment line holds `key = value`; keys are long flag names
//! (without the leading dashes). Values with spaces expand into multiple
//! flag arguments. Command-line flags override config entries because the
//! config is spliced in directly after the subcommand, before any
//! user-given flags; clap's last-wins semantics do the rest.

use std::collections::BTreeMap;
use std::path::Path;

pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut entries = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("line {}: expected `key = value`", lineno + 1),
                ));
            };
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { entries })
    }

    /// Inserts `--key value...` pairs right after the subcommand token.
    pub fn splice_into(&self, argv: &mut Vec<String>) {
        // The subcommand is the first non-flag argument after the binary
        // name, skipping values of known global flags.
        let mut idx = 1;
        while idx < argv.len() {
            let a = &argv[idx];
            if a.starts_with("--") {
                idx += if a.contains('=') { 1 } else { 2 };
            } else {
                break;
            }
        }
        let insert_at = (idx + 1).min(argv.len());
        let mut insertion = Vec::new();
        for (key, value) in &self.entries {
            insertion.push(format!("--{key}"));
            for part in value.split_whitespace() {
                insertion.push(part.to_string());
            }
        }
        argv.splice(insert_at..insert_at, insertion);
    }
}
