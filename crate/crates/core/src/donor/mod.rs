//! Donor database: graphs with pre-optimized QAOA schedules, their exact cut
//! values and embeddings, stored as JSON Lines.

mod transfer;

use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::embed::{distance, wl_corpus, EmbeddingMethod, EmbeddingVector, DEFAULT_WL_DEPTH};
use crate::graph::{fingerprint, generate_random, stable_digest, Fingerprint, ParityTarget};
use crate::maxcut::exact_maxcut;
use crate::qaoa::{default_budget, multistart_with_budget, OptimizationRecord, QaoaSimulator};
use crate::{seed, Error, Graph, Result};

pub use transfer::{
    speedup_report, transfer_eval, warm_start, Acceptor, CutReference, SpeedupRow, TransferOptions,
    TransferResult, SPEEDUP_REGIMES,
};

/// Version of the `donors.jsonl` layout.
pub const DB_FORMAT_VERSION: u32 = 1;

/// Parity-stratified random corpus: graph `i` targets parity class
/// `i mod classes`, walking the classes in ascending even-node count.
/// Graphs whose WL document (at the embedding depth) repeats an earlier one
/// are redrawn, since no doc-vector embedding can tell them apart.
pub fn parity_corpus(n: usize, max_degree: usize, count: usize, seed: u64) -> Result<Vec<Graph>> {
    let targets = ParityTarget::all(n);
    let mut seen = HashSet::new();
    let mut graphs = Vec::with_capacity(count);
    let mut attempt = 0u64;
    let max_attempts = 1000 * count.max(1) as u64;
    while graphs.len() < count {
        if attempt >= max_attempts {
            return Err(Error::Unreachable {
                attempts: attempt as usize,
                reason: format!("only {} distinct graphs found for n={n}", graphs.len()),
            });
        }
        let target = targets[graphs.len() % targets.len()];
        let g = generate_random(n, max_degree, target, seed::derive_seed(seed, attempt))?;
        attempt += 1;
        if seen.insert(wl_corpus(&g, DEFAULT_WL_DEPTH)?.digest()) {
            graphs.push(g);
        }
    }
    Ok(graphs)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DonorEntry {
    pub graph_id: u64,
    pub graph: Graph,
    pub fingerprint: Fingerprint,
    pub embedding: EmbeddingVector,
    pub cstar: usize,
    /// Multistart results, best first.
    pub records: Vec<OptimizationRecord>,
}

impl DonorEntry {
    pub fn best(&self) -> &OptimizationRecord {
        &self.records[0]
    }

    pub fn depth(&self) -> usize {
        self.records[0].params.depth()
    }
}

/// First line of `donors.jsonl`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DbHeader {
    pub format_version: u32,
    pub method: EmbeddingMethod,
    pub dims: usize,
    pub p: usize,
    pub n_starts: usize,
    pub budget: usize,
    pub seed: u64,
    pub deterministic: bool,
    /// Digest over the fingerprints of the input corpus, in order.
    pub corpus_digest: String,
    pub version: String,
    /// Free-form run configuration recorded by the caller.
    #[serde(default)]
    pub config: Value,
}

impl DbHeader {
    fn compatible(&self, other: &DbHeader) -> bool {
        (self.format_version, self.method, self.dims, self.p, self.n_starts, self.budget)
            == (other.format_version, other.method, other.dims, other.p, other.n_starts, other.budget)
            && self.seed == other.seed
            && self.deterministic == other.deterministic
            && self.corpus_digest == other.corpus_digest
    }
}

#[derive(Clone, Debug)]
pub struct BuildOptions {
    pub method: EmbeddingMethod,
    pub p: usize,
    pub n_starts: usize,
    pub budget: usize,
    pub seed: u64,
    /// Zeroes wall times so reruns are byte-identical.
    pub deterministic: bool,
    /// Graphs optimized between two checkpoint writes.
    pub chunk_size: usize,
    pub config: Value,
}

impl BuildOptions {
    pub fn new(method: EmbeddingMethod, p: usize, n_starts: usize, seed: u64) -> Self {
        BuildOptions {
            method,
            p,
            n_starts,
            budget: default_budget(p),
            seed,
            deterministic: false,
            chunk_size: 16,
            config: Value::Null,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DonorDb {
    pub header: DbHeader,
    pub entries: Vec<DonorEntry>,
}

/// A query hit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub graph_id: u64,
    pub distance: f64,
}

pub fn corpus_digest(graphs: &[Graph]) -> String {
    let words: Vec<u64> = graphs.iter().map(|g| fingerprint(g).0).collect();
    format!("{:016x}", stable_digest(&words))
}

fn header_for(graphs: &[Graph], dims: usize, opts: &BuildOptions) -> DbHeader {
    DbHeader {
        format_version: DB_FORMAT_VERSION,
        method: opts.method,
        dims,
        p: opts.p,
        n_starts: opts.n_starts,
        budget: opts.budget,
        seed: opts.seed,
        deterministic: opts.deterministic,
        corpus_digest: corpus_digest(graphs),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: opts.config.clone(),
    }
}

/// Graph ids (input positions) to keep, dropping repeated fingerprints.
fn dedup_ids(graphs: &[Graph]) -> Vec<usize> {
    let mut seen = HashSet::new();
    let mut keep = Vec::with_capacity(graphs.len());
    for (i, g) in graphs.iter().enumerate() {
        let f = fingerprint(g);
        if seen.insert(f) {
            keep.push(i);
        } else {
            log::warn!("graph {i} duplicates fingerprint {f}; skipped");
        }
    }
    keep
}

fn validate_inputs(graphs: &[Graph], embeddings: &[EmbeddingVector], opts: &BuildOptions) -> Result<usize> {
    if graphs.is_empty() {
        return Err(Error::InvalidInput("donor database needs at least one graph".into()));
    }
    if graphs.len() != embeddings.len() {
        return Err(Error::InvalidInput(format!(
            "{} graphs but {} embeddings",
            graphs.len(),
            embeddings.len()
        )));
    }
    if opts.p == 0 || opts.n_starts == 0 || opts.chunk_size == 0 {
        return Err(Error::InvalidInput("p, n_starts and chunk_size must be positive".into()));
    }
    let dims = embeddings[0].dims();
    if let Some(e) = embeddings.iter().find(|e| e.dims() != dims) {
        return Err(Error::DimensionMismatch {
            left: dims,
            right: e.dims(),
        });
    }
    Ok(dims)
}

fn build_entry(id: usize, g: &Graph, embedding: &EmbeddingVector, opts: &BuildOptions) -> Result<DonorEntry> {
    let cstar = exact_maxcut(g)?.value;
    let sim = QaoaSimulator::new(g)?;
    let graph_seed = seed::derive_seed(opts.seed, id as u64);
    let mut records = multistart_with_budget(&sim, opts.p, opts.n_starts, graph_seed, opts.budget)?;
    if opts.deterministic {
        records.iter_mut().for_each(|r| r.wall_time_s = 0.0);
    }
    Ok(DonorEntry {
        graph_id: id as u64,
        graph: g.clone(),
        fingerprint: fingerprint(g),
        embedding: embedding.clone(),
        cstar,
        records,
    })
}

impl DonorDb {
    /// Optimizes every distinct graph in memory.
    pub fn build(graphs: &[Graph], embeddings: &[EmbeddingVector], opts: &BuildOptions) -> Result<DonorDb> {
        let dims = validate_inputs(graphs, embeddings, opts)?;
        let entries = dedup_ids(graphs)
            .into_par_iter()
            .map(|i| build_entry(i, &graphs[i], &embeddings[i], opts))
            .collect::<Result<Vec<_>>>()?;
        Ok(DonorDb {
            header: header_for(graphs, dims, opts),
            entries,
        })
    }

    /// Like [`DonorDb::build`] but appends finished chunks to `path` as it
    /// goes. An existing file with a matching header is resumed: its complete
    /// entries are kept verbatim and only the missing graphs are optimized.
    pub fn build_to_file(
        graphs: &[Graph],
        embeddings: &[EmbeddingVector],
        opts: &BuildOptions,
        path: &Path,
    ) -> Result<DonorDb> {
        let dims = validate_inputs(graphs, embeddings, opts)?;
        let header = header_for(graphs, dims, opts);
        let mut done: Vec<DonorEntry> = Vec::new();
        if path.exists() {
            let (old_header, entries, valid_bytes) = read_prefix(path)?;
            match old_header {
                Some(h) if h.compatible(&header) => {
                    log::info!("resuming {} with {} finished entries", path.display(), entries.len());
                    done = entries;
                    OpenOptions::new().write(true).open(path)?.set_len(valid_bytes)?;
                }
                Some(_) => {
                    return Err(Error::InvalidInput(format!(
                        "{} was built with different settings; refusing to resume",
                        path.display()
                    )))
                }
                None => {
                    std::fs::remove_file(path)?;
                }
            }
        }
        let mut file = BufWriter::new(OpenOptions::new().create(true).append(true).open(path)?);
        if done.is_empty() && std::fs::metadata(path)?.len() == 0 {
            writeln!(file, "{}", serde_json::to_string(&header)?)?;
            file.flush()?;
        }
        let finished: HashSet<u64> = done.iter().map(|e| e.graph_id).collect();
        let todo: Vec<usize> = dedup_ids(graphs)
            .into_iter()
            .filter(|&i| !finished.contains(&(i as u64)))
            .collect();
        for chunk in todo.chunks(opts.chunk_size) {
            let entries = chunk
                .par_iter()
                .map(|&i| build_entry(i, &graphs[i], &embeddings[i], opts))
                .collect::<Result<Vec<_>>>()?;
            for e in &entries {
                writeln!(file, "{}", serde_json::to_string(e)?)?;
            }
            file.flush()?;
            done.extend(entries);
        }
        done.sort_by_key(|e| e.graph_id);
        Ok(DonorDb { header, entries: done })
    }

    /// Same donors and records under another embedding; `embeddings` is
    /// indexed by graph id.
    pub fn reembed(&self, method: EmbeddingMethod, embeddings: &[EmbeddingVector]) -> Result<DonorDb> {
        let dims = embeddings.first().map_or(0, EmbeddingVector::dims);
        let mut entries = self.entries.clone();
        for e in &mut entries {
            let v = embeddings.get(e.graph_id as usize).ok_or_else(|| {
                Error::InvalidInput(format!("no embedding for graph {}", e.graph_id))
            })?;
            if v.dims() != dims {
                return Err(Error::DimensionMismatch {
                    left: dims,
                    right: v.dims(),
                });
            }
            e.embedding = v.clone();
        }
        let header = DbHeader {
            method,
            dims,
            ..self.header.clone()
        };
        Ok(DonorDb { header, entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut file = BufWriter::new(File::create(path)?);
        writeln!(file, "{}", serde_json::to_string(&self.header)?)?;
        for e in &self.entries {
            writeln!(file, "{}", serde_json::to_string(e)?)?;
        }
        file.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<DonorDb> {
        let (header, mut entries, _) = read_prefix(path)?;
        let header = header.ok_or_else(|| Error::InvalidInput(format!("{} has no header", path.display())))?;
        if header.format_version != DB_FORMAT_VERSION {
            return Err(Error::InvalidInput(format!(
                "database format version {} is not supported",
                header.format_version
            )));
        }
        entries.sort_by_key(|e| e.graph_id);
        Ok(DonorDb { header, entries })
    }

    /// Up to `k` entries by ascending distance; equal distances keep the
    /// lower graph id first.
    pub fn nearest(&self, v: &EmbeddingVector, k: usize) -> Result<Vec<Neighbor>> {
        let mut hits = self.distances(v)?;
        hits.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.graph_id.cmp(&b.graph_id)));
        hits.truncate(k);
        Ok(hits)
    }

    /// The entry farthest from `v`, lowest graph id on ties.
    pub fn farthest(&self, v: &EmbeddingVector) -> Result<Neighbor> {
        let hits = self.distances(v)?;
        let mut best: Option<Neighbor> = None;
        for h in hits {
            if best.map_or(true, |b| h.distance > b.distance || (h.distance == b.distance && h.graph_id < b.graph_id)) {
                best = Some(h);
            }
        }
        best.ok_or_else(|| Error::InvalidInput("donor database is empty".into()))
    }

    fn distances(&self, v: &EmbeddingVector) -> Result<Vec<Neighbor>> {
        self.entries
            .iter()
            .enumerate()
            .map(|(index, e)| {
                Ok(Neighbor {
                    index,
                    graph_id: e.graph_id,
                    distance: distance(&e.embedding, v)?,
                })
            })
            .collect()
    }
}

/// Parses the header and every complete entry line. A torn final line (from
/// an interrupted build) is ignored; `valid_bytes` marks where it starts.
fn read_prefix(path: &Path) -> Result<(Option<DbHeader>, Vec<DonorEntry>, u64)> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut header = None;
    let mut entries = Vec::new();
    let mut valid_bytes = 0u64;
    let mut line = String::new();
    loop {
        line.clear();
        let read = reader.read_line(&mut line)?;
        if read == 0 || !line.ends_with('\n') {
            break;
        }
        let text = line.trim_end();
        if header.is_none() {
            match serde_json::from_str::<DbHeader>(text) {
                Ok(h) => header = Some(h),
                Err(_) => break,
            }
        } else {
            match serde_json::from_str::<DonorEntry>(text) {
                Ok(e) => entries.push(e),
                Err(err) => {
                    log::warn!("stopping at unreadable entry in {}: {err}", path.display());
                    break;
                }
            }
        }
        valid_bytes += read as u64;
    }
    Ok((header, entries, valid_bytes))
}
