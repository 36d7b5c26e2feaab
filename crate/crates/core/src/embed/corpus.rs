//! Rooted-subgraph documents built from WL relabeling.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::graph::{stable_digest, wl_labels};
use crate::{Error, Graph, Result};

/// WL recursion depth used by the doc-vector embeddings.
pub const DEFAULT_WL_DEPTH: usize = 2;

/// Multiset of WL tokens of one graph, stored sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Document {
    tokens: Vec<u64>,
}

impl Document {
    pub fn from_tokens(mut tokens: Vec<u64>) -> Self {
        tokens.sort_unstable();
        Document { tokens }
    }

    pub fn tokens(&self) -> &[u64] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn counts(&self) -> BTreeMap<u64, usize> {
        let mut out = BTreeMap::new();
        for &t in &self.tokens {
            *out.entry(t).or_insert(0) += 1;
        }
        out
    }

    /// Order-independent digest of the multiset.
    pub fn digest(&self) -> u64 {
        stable_digest(&self.tokens)
    }
}

/// Tokens `label_i(v)` for every node `v` and round `i in 0..=depth`,
/// `n * (depth + 1)` in total.
pub fn wl_corpus(g: &Graph, depth: usize) -> Result<Document> {
    if depth == 0 {
        return Err(Error::InvalidInput("WL depth must be at least 1".into()));
    }
    let rounds = wl_labels(g, depth);
    Ok(Document::from_tokens(rounds.into_iter().flatten().collect()))
}

/// Token vocabulary with corpus frequencies, sorted by token id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    tokens: Vec<u64>,
    counts: Vec<u64>,
    index: HashMap<u64, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    tokens: Vec<u64>,
    counts: Vec<u64>,
}

impl From<VocabularyRepr> for Vocabulary {
    fn from(r: VocabularyRepr) -> Self {
        let index = r.tokens.iter().enumerate().map(|(i, &t)| (t, i)).collect();
        Vocabulary {
            tokens: r.tokens,
            counts: r.counts,
            index,
        }
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            tokens: v.tokens,
            counts: v.counts,
        }
    }
}

impl Vocabulary {
    pub fn build(documents: &[Document]) -> Self {
        let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
        for doc in documents {
            for &t in doc.tokens() {
                *counts.entry(t).or_insert(0) += 1;
            }
        }
        let (tokens, counts): (Vec<u64>, Vec<u64>) = counts.into_iter().unzip();
        VocabularyRepr { tokens, counts }.into()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index_of(&self, token: u64) -> Option<usize> {
        self.index.get(&token).copied()
    }

    pub fn tokens(&self) -> &[u64] {
        &self.tokens
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn contains(&self, token: u64) -> bool {
        self.index.contains_key(&token)
    }

    pub fn digest(&self) -> u64 {
        let mut words = self.tokens.clone();
        words.extend(&self.counts);
        stable_digest(&words)
    }
}

/// Documents of a training set plus their shared vocabulary.
#[derive(Clone, Debug)]
pub struct SubgraphCorpus {
    pub documents: Vec<Document>,
    pub vocabulary: Vocabulary,
}

impl SubgraphCorpus {
    pub fn build<'a>(graphs: impl IntoIterator<Item = &'a Graph>, depth: usize) -> Result<Self> {
        let documents = graphs
            .into_iter()
            .map(|g| wl_corpus(g, depth))
            .collect::<Result<Vec<_>>>()?;
        let vocabulary = Vocabulary::build(&documents);
        Ok(SubgraphCorpus {
            documents,
            vocabulary,
        })
    }
}
