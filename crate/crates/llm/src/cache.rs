//! Append-only record/replay cache of completions.
//!
//! File layout (all integers little-endian):
//!
//! ```text
//! magic    8 bytes   "SFCACHE1"
//! record*  u32       payload length N
//!          N bytes   UTF-8 JSON of a CacheEntry
//!          32 bytes  SHA-256 of the N payload bytes
//! ```
//!
//! Records are only ever appended. A digest may appear once.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::client::{Backend, BackendKind, CompletionRequest, CompletionResponse, LlmError};
use crate::promptkit::GenerationParams;

pub const MAGIC: &[u8; 8] = b"SFCACHE1";

/// Hex SHA-256 over the prompt bytes followed by the JSON-serialized parameters.
pub fn request_digest(prompt: &str, params: &GenerationParams) -> String {
    let mut h = Sha256::new();
    h.update(prompt.as_bytes());
    h.update(serde_json::to_vec(params).expect("params serialize"));
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub digest: String,
    pub prompt: String,
    pub params: GenerationParams,
    pub completion: String,
    /// Backend that produced the completion.
    pub backend: BackendKind,
    pub recorded_at_ms: u64,
    pub latency_ms: u64,
    pub reported_tokens: u64,
}

impl CacheEntry {
    pub fn new(request: &CompletionRequest, response: &CompletionResponse) -> Self {
        CacheEntry {
            digest: request.digest(),
            prompt: request.prompt.clone(),
            params: request.params.clone(),
            completion: response.completion.clone(),
            backend: response.backend,
            recorded_at_ms: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64),
            latency_ms: response.latency_ms,
            reported_tokens: response.reported_tokens,
        }
    }
}

#[derive(Debug)]
pub struct ReplayCache {
    path: PathBuf,
    entries: HashMap<String, CacheEntry>,
    order: Vec<String>,
}

fn storage(path: &Path, e: impl std::fmt::Display) -> LlmError {
    LlmError::Storage { reason: format!("{}: {e}", path.display()) }
}

/// Encode one record.
pub fn encode_record(entry: &CacheEntry) -> Vec<u8> {
    let payload = serde_json::to_vec(entry).expect("entries serialize");
    let mut out = Vec::with_capacity(payload.len() + 36);
    out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    out.extend_from_slice(&payload);
    out.extend_from_slice(&Sha256::digest(&payload));
    out
}

/// Decode a whole cache file. Errors name the zero-based record index.
pub fn decode(bytes: &[u8]) -> Result<Vec<CacheEntry>, LlmError> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(LlmError::Integrity { entry: 0, reason: "missing SFCACHE1 header".into() });
    }
    let mut rest = &bytes[MAGIC.len()..];
    let mut out = Vec::new();
    while !rest.is_empty() {
        let entry = out.len();
        let corrupt = |reason: &str| LlmError::Integrity { entry, reason: reason.to_string() };
        if rest.len() < 4 {
            return Err(corrupt("truncated length prefix"));
        }
        let n = u32::from_le_bytes(rest[..4].try_into().expect("4 bytes")) as usize;
        rest = &rest[4..];
        if rest.len() < n + 32 {
            return Err(corrupt("truncated record"));
        }
        let (payload, sum) = (&rest[..n], &rest[n..n + 32]);
        if Sha256::digest(payload).as_slice() != sum {
            let digest = serde_json::from_slice::<serde_json::Value>(payload)
                .ok()
                .and_then(|v| v["digest"].as_str().map(str::to_string));
            let reason = match digest {
                Some(d) => format!("checksum mismatch (digest {d})"),
                None => "checksum mismatch".to_string(),
            };
            return Err(LlmError::Integrity { entry, reason });
        }
        let e: CacheEntry = serde_json::from_slice(payload).map_err(|e| corrupt(&format!("bad payload: {e}")))?;
        out.push(e);
        rest = &rest[n + 32..];
    }
    Ok(out)
}

impl ReplayCache {
    /// Open (creating if absent) and verify every record.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, LlmError> {
        let path = path.as_ref().to_path_buf();
        if !path.exists() {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| storage(dir, e))?;
            }
            let mut f = File::create(&path).map_err(|e| storage(&path, e))?;
            f.write_all(MAGIC).and_then(|_| f.sync_all()).map_err(|e| storage(&path, e))?;
        }
        let mut bytes = Vec::new();
        File::open(&path).and_then(|mut f| f.read_to_end(&mut bytes)).map_err(|e| storage(&path, e))?;
        let mut cache = ReplayCache { path, entries: HashMap::new(), order: Vec::new() };
        for (i, e) in decode(&bytes)?.into_iter().enumerate() {
            if cache.entries.contains_key(&e.digest) {
                return Err(LlmError::Integrity { entry: i, reason: format!("duplicate digest {}", e.digest) });
            }
            cache.order.push(e.digest.clone());
            cache.entries.insert(e.digest.clone(), e);
        }
        Ok(cache)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn get(&self, digest: &str) -> Option<&CacheEntry> {
        self.entries.get(digest)
    }

    pub fn entries(&self) -> impl Iterator<Item = &CacheEntry> {
        self.order.iter().map(|d| &self.entries[d])
    }

    /// Append an entry; a digest already present is rejected.
    pub fn record(&mut self, entry: CacheEntry) -> Result<(), LlmError> {
        if self.entries.contains_key(&entry.digest) {
            return Err(LlmError::Duplicate { digest: entry.digest });
        }
        let mut f = OpenOptions::new().append(true).open(&self.path).map_err(|e| storage(&self.path, e))?;
        f.write_all(&encode_record(&entry)).and_then(|_| f.sync_data()).map_err(|e| storage(&self.path, e))?;
        self.order.push(entry.digest.clone());
        self.entries.insert(entry.digest.clone(), entry);
        Ok(())
    }
}

/// Serves completions from a [`ReplayCache`]. With an upstream backend and `strict`
/// off, misses are forwarded and recorded; otherwise a miss is [`LlmError::CacheMiss`].
pub struct ReplayBackend {
    cache: Mutex<ReplayCache>,
    upstream: Option<Arc<dyn Backend>>,
    strict: bool,
}

impl ReplayBackend {
    pub fn strict(cache: ReplayCache) -> Self {
        ReplayBackend { cache: Mutex::new(cache), upstream: None, strict: true }
    }

    pub fn recording(cache: ReplayCache, upstream: Arc<dyn Backend>) -> Self {
        ReplayBackend { cache: Mutex::new(cache), upstream: Some(upstream), strict: false }
    }

    pub fn len(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Backend for ReplayBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Replay
    }

    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, LlmError> {
        let started = Instant::now();
        let digest = request.digest();
        if let Some(e) = self.cache.lock().expect("cache lock").get(&digest) {
            return Ok(CompletionResponse {
                completion: e.completion.clone(),
                backend: BackendKind::Replay,
                latency_ms: started.elapsed().as_millis() as u64,
                reported_tokens: e.reported_tokens,
            });
        }
        let upstream = match (&self.upstream, self.strict) {
            (Some(u), false) => u,
            _ => return Err(LlmError::CacheMiss { digest }),
        };
        // The lock is not held across the upstream call; a concurrent identical request
        // may race, and the loser's record is dropped as a duplicate.
        let response = upstream.complete(request)?;
        match self.cache.lock().expect("cache lock").record(CacheEntry::new(request, &response)) {
            Ok(()) | Err(LlmError::Duplicate { .. }) => Ok(response),
            Err(e) => Err(e),
        }
    }
}
