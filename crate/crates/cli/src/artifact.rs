//! Reading and writing the files commands hand to each other. Every output
//! starts with a header carrying the tool version, the seed and the full
//! command configuration: a JSON line for JSON/JSONL files, `# ` comment
//! lines for CSV files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use qtransfer::Graph;

pub const VERSION: &str = env!("QTRANSFER_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub artifact: String,
    pub version: String,
    pub seed: u64,
    pub config: Value,
}

impl Header {
    pub fn new(artifact: &str, seed: u64, config: impl Serialize) -> Header {
        Header {
            artifact: artifact.to_string(),
            version: VERSION.to_string(),
            seed,
            config: serde_json::to_value(config).expect("command config serializes"),
        }
    }

    /// Writes the header as `# ` comment lines for CSV files.
    pub fn write_comments<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# artifact: {}", self.artifact)?;
        writeln!(out, "# version: {}", self.version)?;
        writeln!(out, "# seed: {}", self.seed)?;
        writeln!(out, "# config: {}", serde_json::to_string(&self.config)?)?;
        Ok(())
    }
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

/// Graph corpus as JSON lines after a header line.
pub fn write_graphs(path: &Path, header: &Header, graphs: &[Graph]) -> Result<()> {
    let mut out = create(path)?;
    writeln!(out, "{}", serde_json::to_string(header)?)?;
    for g in graphs {
        writeln!(out, "{}", g.to_json())?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a corpus written by [`write_graphs`] or a file holding one graph
/// JSON object. Header lines are skipped.
pub fn read_graphs(path: &Path) -> Result<Vec<Graph>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if let Ok(g) = Graph::from_json(&text) {
        return Ok(vec![g]);
    }
    let mut graphs = Vec::new();
    for (i, line) in BufReader::new(text.as_bytes()).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value =
            serde_json::from_str(&line).with_context(|| format!("{}:{}: not JSON", path.display(), i + 1))?;
        if value.get("artifact").is_some() {
            continue;
        }
        let g = Graph::from_json(&line).with_context(|| format!("{}:{}: not a graph", path.display(), i + 1))?;
        graphs.push(g);
    }
    Ok(graphs)
}

/// Concatenates several corpora in order.
pub fn read_all_graphs(paths: &[std::path::PathBuf]) -> Result<Vec<Graph>> {
    let mut all = Vec::new();
    for p in paths {
        all.extend(read_graphs(p)?);
    }
    Ok(all)
}

pub fn csv_reader(path: &Path) -> Result<csv::Reader<File>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(f))
}
