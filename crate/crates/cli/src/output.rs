//! Output-file helpers: CSV with `#`-prefixed headers and JSON summaries.
//!
//! Every file embeds the resolved configuration and the code version so a
//! run is reproducible from its own header. The generation timestamp goes
//! into a separate comment line, keeping the body byte-identical across
//! identical (config, seed) runs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

/// Resolved-configuration header echoed into every output file.
#[derive(Clone, Debug)]
pub struct OutputHeader {
    pairs: Vec<(String, String)>,
}

impl OutputHeader {
    pub fn new(seed: u64) -> Self {
        Self {
            pairs: vec![
                ("version".into(), env!("CARGO_PKG_VERSION").into()),
                ("seed".into(), seed.to_string()),
            ],
        }
    }

    pub fn kv(mut self, key: &str, value: impl ToString) -> Self {
        self.pairs.push((key.into(), value.to_string()));
        self
    }

    pub fn as_json(&self) -> serde_json::Value {
        serde_json::Value::Object(
            self.pairs
                .iter()
                .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
                .collect(),
        )
    }

    fn write_comments<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for (k, v) in &self.pairs {
            writeln!(w, "# {k} = {v}")?;
        }
        let stamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        writeln!(w, "# generated: {stamp}")?;
        Ok(())
    }
}

/// Opens a CSV file and writes the header comments.
pub fn csv_writer(path: &Path, header: &OutputHeader) -> std::io::Result<BufWriter<File>> {
    let mut w = BufWriter::new(File::create(path)?);
    header.write_comments(&mut w)?;
    Ok(w)
}

/// Pretty-prints a JSON value to a file.
pub fn json_value_to_file(value: &serde_json::Value, path: &Path) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}
