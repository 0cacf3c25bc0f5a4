//! Chunk embeddings, the on-disk vector index, and exact top-k cosine retrieval.

use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::corpus::Chunk;
use crate::error::{Error, Result};
use crate::jsonl;

pub const DEFAULT_DIMENSION: usize = 1536;
pub const DEFAULT_K: usize = 5;

/// Bearer credential for the remote embedding endpoint.
pub const EMBED_API_KEY_ENV: &str = "SEEDRAG_EMBED_API_KEY";
/// Overrides the configured embedding endpoint URL.
pub const EMBED_BASE_URL_ENV: &str = "SEEDRAG_EMBED_BASE_URL";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmbeddingVector {
    values: Vec<f64>,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("embedding must have at least one component".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("embedding component {i} is not finite")));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// dot(a, b) / (|a| |b|), clamped to [-1, 1].
pub fn cosine_similarity(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::InvalidArgument(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(Error::UndefinedSimilarity("zero vector".into()));
    }
    let dot: f64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

pub trait Embedder: Send + Sync {
    /// Identifies the model and dimension; stores refuse queries from a different embedder.
    fn fingerprint(&self) -> String;
    fn dimension(&self) -> usize;
    fn embed_raw(&self, text: &str) -> Result<Vec<f64>>;
}

/// Embeds `text`, enforcing non-empty input and the embedder's dimension.
pub fn embed_text(text: &str, embedder: &dyn Embedder) -> Result<EmbeddingVector> {
    if text.trim().is_empty() {
        return Err(Error::Precondition("cannot embed empty text".into()));
    }
    let vector = EmbeddingVector::new(embedder.embed_raw(text)?)?;
    if vector.dim() != embedder.dimension() {
        return Err(Error::Config(format!(
            "embedder returned {} components, expected {}",
            vector.dim(),
            embedder.dimension()
        )));
    }
    Ok(vector)
}

/// Hash-bucketed token counts normalized to unit length. Tokens are
/// lowercased and stripped of surrounding ASCII punctuation before hashing.
#[derive(Debug, Clone)]
pub struct OfflineEmbedder {
    dimension: usize,
}

impl OfflineEmbedder {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Config("embedding dimension must be positive".into()));
        }
        Ok(Self { dimension })
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash
}

fn normalize_token(token: &str) -> String {
    let trimmed = token.trim_matches(|c: char| c.is_ascii_punctuation());
    if trimmed.is_empty() { token } else { trimmed }.to_lowercase()
}

impl Embedder for OfflineEmbedder {
    fn fingerprint(&self) -> String {
        format!("offline-fnv1a/dim={}", self.dimension)
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed_raw(&self, text: &str) -> Result<Vec<f64>> {
        let mut values = vec![0.0; self.dimension];
        for token in text.split_whitespace() {
            let bucket = fnv1a(normalize_token(token).as_bytes()) % self.dimension as u64;
            values[bucket as usize] += 1.0;
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Precondition("text has no tokens".into()));
        }
        values.iter_mut().for_each(|v| *v /= norm);
        Ok(values)
    }
}

#[derive(Serialize)]
struct EmbeddingRequest<'a> {
    model: &'a str,
    input: Vec<&'a str>,
}

#[derive(Deserialize)]
struct EmbeddingResponse {
    data: Vec<EmbeddingDatum>,
}

#[derive(Deserialize)]
struct EmbeddingDatum {
    embedding: Vec<f64>,
}

/// Client for an OpenAI-style `/embeddings` endpoint.
pub struct RemoteEmbedder {
    endpoint_url: String,
    model_name: String,
    dimension: usize,
    api_key: Option<String>,
    max_attempts: usize,
    client: reqwest::blocking::Client,
}

impl RemoteEmbedder {
    pub fn new(endpoint_url: String, model_name: String, dimension: usize, api_key: Option<String>) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(60))
            .build()
            .map_err(|e| Error::Config(format!("http client: {e}")))?;
        Ok(Self {
            endpoint_url,
            model_name,
            dimension,
            api_key,
            max_attempts: 3,
            client,
        })
    }

    fn attempt(&self, text: &str) -> Result<Vec<f64>> {
        let body = EmbeddingRequest {
            model: &self.model_name,
            input: vec![text],
        };
        let mut request = self.client.post(&self.endpoint_url).json(&body);
        if let Some(key) = &self.api_key {
            request = request.bearer_auth(key);
        }
        let response = request.send().map_err(|e| transport_error("embedding", e))?;
        let status = response.status();
        if !status.is_success() {
            return Err(Error::Provider {
                provider: "embedding",
                retryable: status.is_server_error() || status.as_u16() == 429,
                message: format!("HTTP {status}"),
            });
        }
        let parsed: EmbeddingResponse = response.json().map_err(|e| Error::Provider {
            provider: "embedding",
            retryable: false,
            message: format!("bad response body: {e}"),
        })?;
        parsed
            .data
            .into_iter()
            .next()
            .map(|d| d.embedding)
            .ok_or_else(|| Error::Provider {
                provider: "embedding",
                retryable: false,
                message: "response carried no embedding".into(),
            })
    }
}

pub(crate) fn transport_error(provider: &'static str, e: reqwest::Error) -> Error {
    Error::Provider {
        provider,
        retryable: e.is_timeout() || e.is_connect() || e.is_request(),
        message: e.to_string(),
    }
}

pub(crate) fn with_retries<T>(max_attempts: usize, mut call: impl FnMut() -> Result<T>) -> Result<T> {
    let mut attempt = 1;
    loop {
        match call() {
            Err(e) if e.is_retryable() && attempt < max_attempts => {
                log::warn!("attempt {attempt} failed: {e}; retrying");
                std::thread::sleep(Duration::from_millis(250 * attempt as u64));
                attempt += 1;
            }
            other => return other,
        }
    }
}

impl Embedder for RemoteEmbedder {
    fn fingerprint(&self) -> String {
        format!("remote:{}/dim={}", self.model_name, self.dimension)
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed_raw(&self, text: &str) -> Result<Vec<f64>> {
        with_retries(self.max_attempts, || self.attempt(text))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProviderKind {
    Remote,
    DeterministicOffline,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbeddingProviderConfig {
    pub kind: ProviderKind,
    pub endpoint_url: Option<String>,
    pub model_name: Option<String>,
    pub dimension: usize,
}

impl Default for EmbeddingProviderConfig {
    fn default() -> Self {
        Self {
            kind: ProviderKind::DeterministicOffline,
            endpoint_url: None,
            model_name: None,
            dimension: DEFAULT_DIMENSION,
        }
    }
}

impl EmbeddingProviderConfig {
    pub fn offline(dimension: usize) -> Self {
        Self {
            dimension,
            ..Default::default()
        }
    }

    /// Builds the embedder. Remote credentials and URL overrides come from
    /// the environment.
    pub fn build(&self) -> Result<Box<dyn Embedder>> {
        if self.dimension == 0 {
            return Err(Error::Config("embedding dimension must be positive".into()));
        }
        match self.kind {
            ProviderKind::DeterministicOffline => Ok(Box::new(OfflineEmbedder::new(self.dimension)?)),
            ProviderKind::Remote => {
                let endpoint = std::env::var(EMBED_BASE_URL_ENV)
                    .ok()
                    .or_else(|| self.endpoint_url.clone())
                    .ok_or_else(|| Error::Config("remote embedding provider needs endpoint_url".into()))?;
                let model = self
                    .model_name
                    .clone()
                    .ok_or_else(|| Error::Config("remote embedding provider needs model_name".into()))?;
                let key = std::env::var(EMBED_API_KEY_ENV).ok();
                Ok(Box::new(RemoteEmbedder::new(endpoint, model, self.dimension, key)?))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoreEntry {
    pub chunk: Chunk,
    pub vector: EmbeddingVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorStore {
    entries: Vec<StoreEntry>,
    dimension: usize,
    provider_fingerprint: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredChunk {
    pub chunk: Chunk,
    pub score: f64,
    pub rank: usize,
}

#[derive(Serialize, Deserialize)]
struct IndexHeader {
    dimension: usize,
    provider_fingerprint: String,
    entry_count: usize,
}

#[derive(Serialize, Deserialize)]
struct IndexRecord {
    doc_id: String,
    chunk_index: usize,
    text: String,
    vector: EmbeddingVector,
    #[serde(default)]
    token_count: Option<usize>,
    #[serde(default)]
    char_span: Option<(usize, usize)>,
}

/// Embeds every chunk in (doc_id, index) order.
pub fn build_index(chunks: &[Chunk], embedder: &dyn Embedder) -> Result<VectorStore> {
    if chunks.is_empty() {
        return Err(Error::Precondition("no chunks to index".into()));
    }
    let mut ordered: Vec<&Chunk> = chunks.iter().collect();
    ordered.sort_by(|a, b| (&a.doc_id, a.index).cmp(&(&b.doc_id, b.index)));
    let entries = ordered
        .into_iter()
        .map(|chunk| {
            let vector = embed_text(&chunk.text, embedder).map_err(|e| Error::Build {
                doc_id: chunk.doc_id.clone(),
                index: chunk.index,
                source: Box::new(e),
            })?;
            Ok(StoreEntry {
                chunk: chunk.clone(),
                vector,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VectorStore {
        entries,
        dimension: embedder.dimension(),
        provider_fingerprint: embedder.fingerprint(),
    })
}

/// Exact linear scan. Equal scores keep store order.
pub fn retrieve(store: &VectorStore, query: &str, k: usize, embedder: &dyn Embedder) -> Result<Vec<ScoredChunk>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if store.entries.is_empty() {
        return Err(Error::Precondition("vector store is empty".into()));
    }
    if embedder.fingerprint() != store.provider_fingerprint {
        return Err(Error::Config(format!(
            "store was built with `{}` but query embedder is `{}`",
            store.provider_fingerprint,
            embedder.fingerprint()
        )));
    }
    let query = embed_text(query, embedder)?;
    let mut scored = store
        .entries
        .iter()
        .map(|e| Ok((e, cosine_similarity(&query, &e.vector)?)))
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(scored
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(i, (entry, score))| ScoredChunk {
            chunk: entry.chunk.clone(),
            score,
            rank: i + 1,
        })
        .collect())
}

impl VectorStore {
    pub fn entries(&self) -> &[StoreEntry] {
        &self.entries
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn provider_fingerprint(&self) -> &str {
        &self.provider_fingerprint
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_index_string(&self) -> Result<String> {
        let header = serde_json::to_value(IndexHeader {
            dimension: self.dimension,
            provider_fingerprint: self.provider_fingerprint.clone(),
            entry_count: self.entries.len(),
        });
        let records = self.entries.iter().map(|e| {
            serde_json::to_value(IndexRecord {
                doc_id: e.chunk.doc_id.clone(),
                chunk_index: e.chunk.index,
                text: e.chunk.text.clone(),
                vector: e.vector.clone(),
                token_count: Some(e.chunk.token_count),
                char_span: Some(e.chunk.char_span),
            })
        });
        let values = std::iter::once(header)
            .chain(records)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        jsonl::to_string(values)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        jsonl::write_text(path, &self.to_index_string()?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = jsonl::read_text(path)?;
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or_else(|| Error::format(path, 1, "index file is empty"))?;
        let header: IndexHeader =
            serde_json::from_str(first).map_err(|e| Error::format(path, 1, format!("bad header: {e}")))?;
        let mut entries = Vec::with_capacity(header.entry_count);
        for (i, line) in lines {
            let record: IndexRecord = serde_json::from_str(line).map_err(|e| Error::format(path, i + 1, e.to_string()))?;
            if record.vector.dim() != header.dimension {
                return Err(Error::format(path, i + 1, "vector dimension differs from header"));
            }
            let token_count = record
                .token_count
                .unwrap_or_else(|| record.text.split_whitespace().count());
            let char_span = record.char_span.unwrap_or((0, record.text.len()));
            entries.push(StoreEntry {
                chunk: Chunk {
                    doc_id: record.doc_id,
                    index: record.chunk_index,
                    text: record.text,
                    token_count,
                    char_span,
                },
                vector: record.vector,
            });
        }
        if entries.len() != header.entry_count {
            return Err(Error::format(
                path,
                1,
                format!("header promises {} entries, found {}", header.entry_count, entries.len()),
            ));
        }
        Ok(Self {
            entries,
            dimension: header.dimension,
            provider_fingerprint: header.provider_fingerprint,
        })
    }
}
