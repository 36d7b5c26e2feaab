use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use qtransfer::donor::{
    parity_corpus, speedup_report, transfer_eval, Acceptor, BuildOptions, DonorDb, TransferOptions, TransferResult,
};
use qtransfer::embed::{EmbedConfig, EmbeddingMethod, EmbeddingModel};
use qtransfer::graph::{generate_regular, generate_watts_strogatz, ParityTarget};
use qtransfer::maxcut::exact_maxcut_with_cap;
use qtransfer::noise::{sweep_scale, NoiseModel, SweepInput};
use qtransfer::qaoa::{default_budget, multistart, multistart_with_budget, QaoaParams, QaoaSimulator};
use qtransfer::seed::derive_seed;
use qtransfer::{Error, Graph};

use crate::artifact::{self, read_all_graphs, read_graphs, write_graphs, Header};
use crate::{BuildArgs, GenerateArgs, GraphClass, NoiseArgs, OptimizeArgs, SolveArgs, SpeedupArgs, TransferArgs};

fn config_error(msg: impl Into<String>) -> anyhow::Error {
    Error::InvalidInput(msg.into()).into()
}

fn setup_pool(workers: Option<usize>) {
    if let Some(w) = workers {
        if rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build_global().is_err() {
            log::debug!("thread pool already initialised");
        }
    }
}

fn pick(path: &Path, index: usize) -> Result<Graph> {
    let mut graphs = read_graphs(path)?;
    if index >= graphs.len() {
        return Err(config_error(format!("{} holds {} graphs, no index {index}", path.display(), graphs.len())));
    }
    Ok(graphs.swap_remove(index))
}

/// Writes `value` (pretty JSON) to `out`, or to standard output.
fn emit_json(out: Option<&Path>, value: &Value) -> Result<()> {
    match out {
        Some(path) => {
            let mut f = artifact::create(path)?;
            writeln!(f, "{}", serde_json::to_string_pretty(value)?)?;
            f.flush()?;
        }
        None => println!("{}", serde_json::to_string(value)?),
    }
    Ok(())
}

fn with_header(header: &Header, body: Value) -> Value {
    let mut v = serde_json::to_value(header).expect("header serializes");
    if let (Value::Object(map), Value::Object(extra)) = (&mut v, body) {
        map.extend(extra);
    }
    v
}

pub fn generate(a: &GenerateArgs) -> Result<()> {
    let mut graphs = Vec::new();
    for &n in &a.n {
        let block_seed = derive_seed(a.seed, n as u64);
        match a.class {
            GraphClass::Random => {
                let classes = ParityTarget::all(n).len();
                graphs.extend(parity_corpus(n, a.max_degree, a.per_class * classes, block_seed)?);
            }
            GraphClass::Regular => {
                for i in 0..a.count {
                    graphs.push(generate_regular(n, a.degree, derive_seed(block_seed, i as u64))?);
                }
            }
            GraphClass::Ws => {
                for i in 0..a.count {
                    graphs.push(generate_watts_strogatz(n, a.k, a.rewire, derive_seed(block_seed, i as u64))?);
                }
            }
        }
    }
    write_graphs(&a.out, &Header::new("corpus", a.seed, a), &graphs)?;
    log::info!("wrote {} graphs to {}", graphs.len(), a.out.display());
    Ok(())
}

pub fn solve(a: &SolveArgs) -> Result<()> {
    let g = pick(&a.graph, a.index)?;
    let sol = exact_maxcut_with_cap(&g, a.cap)?;
    match &a.out {
        Some(path) => {
            let body = json!({"cstar": sol.value, "assignment": sol.assignment_string()});
            emit_json(Some(path), &with_header(&Header::new("solve", 0, a), body))
        }
        None => {
            // Struct fields keep their order on standard output.
            #[derive(Serialize)]
            struct Solution {
                cstar: usize,
                assignment: String,
            }
            let s = Solution {
                cstar: sol.value,
                assignment: sol.assignment_string(),
            };
            println!("{}", serde_json::to_string(&s)?);
            Ok(())
        }
    }
}

pub fn optimize(a: &OptimizeArgs) -> Result<()> {
    let g = pick(&a.graph, a.index)?;
    let sim = QaoaSimulator::with_cap(&g, a.cap)?;
    let budget = a.budget.unwrap_or_else(|| default_budget(a.p));
    let mut records = multistart_with_budget(&sim, a.p, a.starts, a.seed, budget)?;
    if a.deterministic {
        records.iter_mut().for_each(|r| r.wall_time_s = 0.0);
    }
    let cstar = sim.cuts().max_cut();
    let body = json!({
        "n": g.node_count(),
        "cstar": cstar,
        "ratio": records[0].energy / cstar.max(1) as f64,
        "records": records,
    });
    emit_json(a.out.as_deref(), &with_header(&Header::new("optimize", a.seed, a), body))
}

/// Model file as written by the CLI: the shared header plus the model.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    #[serde(flatten)]
    header: Header,
    model: EmbeddingModel,
}

fn model_path(db: &Path, model: &Option<PathBuf>) -> PathBuf {
    model.clone().unwrap_or_else(|| db.with_extension("model.json"))
}

fn read_model(path: &Path) -> Result<EmbeddingModel> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: ModelFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if file.model.format_version != qtransfer::embed::MODEL_FORMAT_VERSION {
        return Err(config_error(format!(
            "{} has model format {}, expected {}",
            path.display(),
            file.model.format_version,
            qtransfer::embed::MODEL_FORMAT_VERSION
        )));
    }
    Ok(file.model)
}

pub fn build(a: &BuildArgs) -> Result<()> {
    if a.corpus.is_empty() {
        return Err(config_error("build needs at least one --corpus file"));
    }
    let graphs = read_all_graphs(&a.corpus)?;
    setup_pool(a.workers);
    let method: EmbeddingMethod = a.method.into();
    let mut cfg = EmbedConfig::new(method);
    if let Some(d) = a.dims {
        match method {
            EmbeddingMethod::Sf => cfg.sf_k = Some(d),
            EmbeddingMethod::Feather if d != cfg.feather.dims() => {
                return Err(config_error(format!("FEATHER has {} dims; --dims {d} is not supported", cfg.feather.dims())))
            }
            _ => cfg.doc.dims = d,
        }
    }
    if let Some(e) = a.epochs {
        cfg.doc.epochs = e;
    }
    if let Some(lr) = a.lr {
        cfg.doc.learning_rate = lr;
    }
    cfg.doc.workers = if a.deterministic { 1 } else { a.workers.unwrap_or(1).max(1) };

    let model = EmbeddingModel::train(&graphs, &cfg, a.seed)?;
    let mpath = model_path(&a.db, &a.model);
    let file = ModelFile {
        header: Header::new("model", a.seed, a),
        model,
    };
    let mut out = artifact::create(&mpath)?;
    serde_json::to_writer(&mut out, &file)?;
    writeln!(out)?;
    out.flush()?;

    let mut opts = BuildOptions::new(method, a.p, a.starts, a.seed);
    opts.budget = a.budget.unwrap_or_else(|| default_budget(a.p));
    opts.deterministic = a.deterministic;
    opts.config = json!({"cli_version": artifact::VERSION, "args": a, "embed": file.model.config});
    let db = DonorDb::build_to_file(&graphs, &file.model.rows, &opts, &a.db)?;
    log::info!("{} donors in {} ({} graphs read)", db.len(), a.db.display(), graphs.len());
    Ok(())
}

struct Lookup {
    db: DonorDb,
    model: EmbeddingModel,
}

impl Lookup {
    fn open(db: &Path, model: &Option<PathBuf>) -> Result<Lookup> {
        let db_file = DonorDb::read(db)?;
        let model = read_model(&model_path(db, model))?;
        if model.method != db_file.header.method || model.dims != db_file.header.dims {
            return Err(config_error(format!(
                "model is {} with {} dims but the database is {} with {} dims",
                model.method, model.dims, db_file.header.method, db_file.header.dims
            )));
        }
        if db_file.is_empty() {
            return Err(config_error(format!("{} has no donors", db.display())));
        }
        Ok(Lookup { db: db_file, model })
    }

    /// Best record of the nearest donor.
    fn transferred(&self, g: &Graph) -> qtransfer::Result<QaoaParams> {
        let v = self.model.embed(g)?;
        let hit = self.db.nearest(&v, 1)?[0];
        Ok(self.db.entries[hit.index].best().params.clone())
    }
}

pub fn transfer(a: &TransferArgs) -> Result<()> {
    let lookup = Lookup::open(&a.db, &a.model)?;
    let acceptors = read_all_graphs(&a.acceptors)?;
    setup_pool(a.workers);
    let opts = TransferOptions {
        p: lookup.db.header.p,
        best_only: a.best_only,
        seed: a.seed,
    };
    let per_acceptor = acceptors
        .par_iter()
        .enumerate()
        .map(|(i, g)| -> qtransfer::Result<Vec<TransferResult>> {
            let acc = Acceptor::new(i.to_string(), g.clone())?;
            let v = lookup.model.embed(g)?;
            let near = lookup.db.nearest(&v, 1)?[0];
            let far = lookup.db.farthest(&v)?;
            let mut rows = vec![
                transfer_eval(&acc, &lookup.db.entries[near.index], near.distance, "nearest", &opts)?,
                transfer_eval(&acc, &lookup.db.entries[far.index], far.distance, "farthest", &opts)?,
            ];
            if a.native {
                let best = multistart(&acc.sim, opts.p, a.starts, derive_seed(a.seed, i as u64))?;
                for r in &mut rows {
                    r.r_native = Some(best[0].energy / r.cstar as f64);
                }
            }
            if a.deterministic {
                rows.iter_mut().for_each(|r| r.wall_time_s = 0.0);
            }
            Ok(rows)
        })
        .collect::<qtransfer::Result<Vec<_>>>()?;
    let rows: Vec<TransferResult> = per_acceptor.into_iter().flatten().collect();
    let mut out = artifact::create(&a.out)?;
    Header::new("transfer", a.seed, a).write_comments(&mut out)?;
    TransferResult::write_csv(&rows, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn speedup(a: &SpeedupArgs) -> Result<()> {
    let lookup = Lookup::open(&a.db, &a.model)?;
    let acceptors = read_all_graphs(&a.acceptors)?;
    let p = lookup.db.header.p;
    let mut rows = Vec::new();
    // Sequential on purpose: every regime is timed.
    for (i, g) in acceptors.iter().enumerate() {
        let acc = Acceptor::new(i.to_string(), g.clone())?;
        rows.extend(speedup_report(&acc, p, derive_seed(a.seed, i as u64), |g| lookup.transferred(g))?);
    }
    let mut out = artifact::create(&a.out)?;
    Header::new("speedup", a.seed, a).write_comments(&mut out)?;
    let mut w = csv::Writer::from_writer(&mut out);
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    drop(w);
    out.flush()?;
    Ok(())
}

pub fn noise(a: &NoiseArgs) -> Result<()> {
    let acceptors = read_all_graphs(&a.acceptors)?;
    setup_pool(a.workers);
    let lookup = match &a.db {
        Some(db) => Some(Lookup::open(db, &a.model)?),
        None => None,
    };
    let inputs = acceptors
        .par_iter()
        .enumerate()
        .map(|(i, g)| -> qtransfer::Result<SweepInput> {
            let params = match &lookup {
                Some(l) => l.transferred(g)?,
                None => {
                    let sim = QaoaSimulator::new(g)?;
                    multistart(&sim, a.p, a.starts, derive_seed(a.seed, i as u64))?[0].params.clone()
                }
            };
            Ok(SweepInput {
                graph_id: i.to_string(),
                graph: g.clone(),
                params,
            })
        })
        .collect::<qtransfer::Result<Vec<_>>>()?;
    let nm = NoiseModel {
        p1: a.p1,
        p2: a.p2,
        p_ro: a.p_ro,
        scale: 1.0,
    };
    let sweep = sweep_scale(&inputs, &a.scale, &nm, a.traj, a.seed)?;
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let header = Header::new("noise", a.seed, a);
    let mut rows = artifact::create(&a.out.join("rows.csv"))?;
    header.write_comments(&mut rows)?;
    sweep.write_rows_csv(&mut rows)?;
    rows.flush()?;
    for (name, relative) in [("summary_abs.csv", false), ("summary_rel.csv", true)] {
        let mut f = artifact::create(&a.out.join(name))?;
        header.write_comments(&mut f)?;
        sweep.write_summary_csv(relative, &mut f)?;
        f.flush()?;
    }
    Ok(())
}
