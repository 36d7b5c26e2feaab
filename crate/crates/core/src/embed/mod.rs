//! Whole-graph embeddings used to look up donor graphs.

pub mod corpus;
pub mod doc2vec;
pub mod feather;
pub mod spectral;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Graph, Result};
pub use corpus::{wl_corpus, Document, SubgraphCorpus, Vocabulary, DEFAULT_WL_DEPTH};
pub use doc2vec::{pair_gradient, pair_objective, DocModel, DocModelConfig, Inference, PairGradient};
pub use feather::{embed_feather, FeatherConfig};
pub use spectral::{embed_sf, laplacian_spectrum};

/// Version of the model file layout.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingMethod {
    Graph2Vec,
    Gl2Vec,
    Sf,
    Feather,
    Wavelet,
}

impl EmbeddingMethod {
    pub const ALL: [EmbeddingMethod; 5] = [
        EmbeddingMethod::Graph2Vec,
        EmbeddingMethod::Gl2Vec,
        EmbeddingMethod::Sf,
        EmbeddingMethod::Feather,
        EmbeddingMethod::Wavelet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EmbeddingMethod::Graph2Vec => "graph2vec",
            EmbeddingMethod::Gl2Vec => "gl2vec",
            EmbeddingMethod::Sf => "sf",
            EmbeddingMethod::Feather => "feather",
            EmbeddingMethod::Wavelet => "wavelet",
        }
    }

    fn is_doc_model(self) -> bool {
        matches!(self, EmbeddingMethod::Graph2Vec | EmbeddingMethod::Gl2Vec)
    }
}

impl fmt::Display for EmbeddingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EmbeddingMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EmbeddingMethod::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidInput(format!("unknown embedding method {s:?}")))
    }
}

/// Real embedding with finite components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("embedding component {i} is not finite")));
        }
        Ok(EmbeddingVector(values))
    }

    pub fn dims(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Euclidean distance.
pub fn distance(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch {
            left: a.dims(),
            right: b.dims(),
        });
    }
    Ok(a.0.iter().zip(&b.0).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbedConfig {
    pub method: EmbeddingMethod,
    /// Doc-vector settings; `doc.dims` is the embedding size of the
    /// doc-vector methods.
    pub doc: DocModelConfig,
    pub wl_depth: usize,
    /// Spectrum length for SF; `None` uses the largest training graph.
    pub sf_k: Option<usize>,
    pub feather: FeatherConfig,
}

impl EmbedConfig {
    pub fn new(method: EmbeddingMethod) -> Self {
        EmbedConfig {
            method,
            doc: DocModelConfig::default(),
            wl_depth: DEFAULT_WL_DEPTH,
            sf_k: None,
            feather: FeatherConfig::default(),
        }
    }
}

/// Trained embedding plus the vectors of its training graphs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingModel {
    pub format_version: u32,
    pub method: EmbeddingMethod,
    pub dims: usize,
    pub config: EmbedConfig,
    pub seed: u64,
    /// Hex digest of the token vocabulary (doc-vector methods only).
    pub vocab_hash: Option<String>,
    pub rows: Vec<EmbeddingVector>,
    doc_model: Option<DocModel>,
}

impl EmbeddingModel {
    pub fn train(graphs: &[Graph], config: &EmbedConfig, seed: u64) -> Result<EmbeddingModel> {
        if graphs.is_empty() {
            return Err(Error::InvalidInput("no training graphs".into()));
        }
        let mut config = config.clone();
        let (rows, doc_model) = match config.method {
            EmbeddingMethod::Wavelet => return Err(Error::Unimplemented("wavelet characteristic embedding")),
            EmbeddingMethod::Graph2Vec | EmbeddingMethod::Gl2Vec => {
                let documents = graphs
                    .par_iter()
                    .map(|g| document(config.method, g, config.wl_depth))
                    .collect::<Result<Vec<_>>>()?;
                let model = DocModel::train(&documents, &config.doc, seed)?;
                let rows = (0..model.document_count())
                    .map(|i| EmbeddingVector::new(model.doc_vector(i).to_vec()))
                    .collect::<Result<Vec<_>>>()?;
                (rows, Some(model))
            }
            EmbeddingMethod::Sf => {
                let largest = graphs.iter().map(Graph::node_count).max().unwrap_or(1);
                config.sf_k = Some(config.sf_k.unwrap_or_else(|| spectral::default_spectrum_len(largest)));
                (embed_all(graphs, &config)?, None)
            }
            EmbeddingMethod::Feather => (embed_all(graphs, &config)?, None),
        };
        Ok(EmbeddingModel {
            format_version: MODEL_FORMAT_VERSION,
            method: config.method,
            dims: rows[0].dims(),
            vocab_hash: doc_model.as_ref().map(|m| format!("{:016x}", m.vocabulary.digest())),
            config,
            seed,
            rows,
            doc_model,
        })
    }

    /// Projects a graph into the embedding space. For doc-vector methods the
    /// token vectors stay frozen.
    pub fn embed(&self, g: &Graph) -> Result<EmbeddingVector> {
        match &self.doc_model {
            Some(model) => {
                let doc = document(self.method, g, self.config.wl_depth)?;
                EmbeddingVector::new(model.infer(&doc).vector)
            }
            None => embed_direct(g, &self.config),
        }
    }

    pub fn embed_all(&self, graphs: &[Graph]) -> Result<Vec<EmbeddingVector>> {
        graphs.par_iter().map(|g| self.embed(g)).collect()
    }

    pub fn doc_model(&self) -> Option<&DocModel> {
        self.doc_model.as_ref()
    }

    /// Index and distance of the closest training row, lowest index on ties.
    pub fn nearest_row(&self, v: &EmbeddingVector) -> Result<(usize, f64)> {
        let mut best = (0, f64::INFINITY);
        for (i, row) in self.rows.iter().enumerate() {
            let d = distance(row, v)?;
            if d < best.1 {
                best = (i, d);
            }
        }
        Ok(best)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer(file, self)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<EmbeddingModel> {
        let text = std::fs::read_to_string(path)?;
        let model: EmbeddingModel = serde_json::from_str(&text)?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::InvalidInput(format!(
                "model format version {} is not supported (expected {MODEL_FORMAT_VERSION})",
                model.format_version
            )));
        }
        Ok(model)
    }
}

fn document(method: EmbeddingMethod, g: &Graph, depth: usize) -> Result<Document> {
    match method {
        EmbeddingMethod::Gl2Vec => wl_corpus(&g.line_graph()?, depth),
        _ => wl_corpus(g, depth),
    }
}

fn embed_direct(g: &Graph, config: &EmbedConfig) -> Result<EmbeddingVector> {
    debug_assert!(!config.method.is_doc_model());
    let values = match config.method {
        EmbeddingMethod::Sf => {
            let k = config
                .sf_k
                .ok_or_else(|| Error::InvalidInput("SF spectrum length is unset".into()))?;
            embed_sf(g, k)?
        }
        EmbeddingMethod::Feather => embed_feather(g, &config.feather)?,
        EmbeddingMethod::Wavelet => return Err(Error::Unimplemented("wavelet characteristic embedding")),
        EmbeddingMethod::Graph2Vec | EmbeddingMethod::Gl2Vec => unreachable!("doc-vector methods need a model"),
    };
    EmbeddingVector::new(values)
}

fn embed_all(graphs: &[Graph], config: &EmbedConfig) -> Result<Vec<EmbeddingVector>> {
    graphs.par_iter().map(|g| embed_direct(g, config)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> EmbeddingVector {
        EmbeddingVector::new(xs.to_vec()).unwrap()
    }

    #[test]
    fn distance_basics() {
        let a = v(&[0.0, 3.0]);
        let b = v(&[4.0, 0.0]);
        assert_eq!(distance(&a, &b).unwrap(), 5.0);
        assert_eq!(distance(&a, &a).unwrap(), 0.0);
        assert!(distance(&a, &v(&[1.0])).is_err());
        assert!(EmbeddingVector::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in EmbeddingMethod::ALL {
            assert_eq!(m.name().parse::<EmbeddingMethod>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.name()));
        }
        assert!("nope".parse::<EmbeddingMethod>().is_err());
    }

    #[test]
    fn wavelet_is_reserved() {
        let graphs = [Graph::cycle(4), Graph::path(4)];
        let err = EmbeddingModel::train(&graphs, &EmbedConfig::new(EmbeddingMethod::Wavelet), 0);
        assert!(matches!(err, Err(Error::Unimplemented(_))));
    }

    #[test]
    fn gl2vec_confuses_triangle_and_claw() {
        let t = document(EmbeddingMethod::Gl2Vec, &Graph::cycle(3), 2).unwrap();
        let s = document(EmbeddingMethod::Gl2Vec, &Graph::star(3), 2).unwrap();
        assert_eq!(t, s);
        assert_ne!(
            document(EmbeddingMethod::Graph2Vec, &Graph::cycle(3), 2).unwrap(),
            document(EmbeddingMethod::Graph2Vec, &Graph::star(3), 2).unwrap()
        );
    }

    #[test]
    fn sf_model_pads_to_training_size() {
        let graphs = [Graph::cycle(6), Graph::path(4)];
        let model = EmbeddingModel::train(&graphs, &EmbedConfig::new(EmbeddingMethod::Sf), 0).unwrap();
        assert_eq!(model.dims, 6);
        assert_eq!(model.embed(&Graph::complete(9)).unwrap().dims(), 6);
        assert_eq!(model.nearest_row(&model.rows[1]).unwrap(), (1, 0.0));
    }

    #[test]
    fn model_file_round_trip() {
        let graphs = [Graph::cycle(5), Graph::star(4), Graph::path(5)];
        let mut cfg = EmbedConfig::new(EmbeddingMethod::Graph2Vec);
        cfg.doc.dims = 8;
        cfg.doc.epochs = 5;
        let model = EmbeddingModel::train(&graphs, &cfg, 7).unwrap();
        assert!(model.vocab_hash.is_some());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        model.save(&path).unwrap();
        let back = EmbeddingModel::load(&path).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.embed(&graphs[1]).unwrap(), model.embed(&graphs[1]).unwrap());
    }
}
