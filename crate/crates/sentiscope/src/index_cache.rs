//! Opaque on-disk cache of a built index, keyed by the corpus file's digest.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use sentiscope_core::corpus::Corpus;
use sentiscope_core::index::{build_index, IndexError, InvertedIndex};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct CacheFile {
    version: u32,
    corpus_sha256: String,
    index: InvertedIndex,
}

/// Default cache location: the corpus path with `.idx` appended.
pub fn default_cache_path(corpus_path: &Path) -> PathBuf {
    let mut name = corpus_path.as_os_str().to_owned();
    name.push(".idx");
    PathBuf::from(name)
}

pub fn corpus_digest(corpus_path: &Path) -> io::Result<String> {
    let bytes = fs::read(corpus_path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Reads the cache if it exists and was built from the current corpus file.
pub fn load(cache_path: &Path, corpus_path: &Path, corpus: &Corpus) -> Option<InvertedIndex> {
    let digest = corpus_digest(corpus_path).ok()?;
    let bytes = fs::read(cache_path).ok()?;
    let cache: CacheFile = serde_json::from_slice(&bytes).ok()?;
    if cache.version != FORMAT_VERSION || cache.corpus_sha256 != digest || cache.index.doc_count() != corpus.len() {
        return None;
    }
    Some(cache.index)
}

pub fn store(cache_path: &Path, corpus_path: &Path, index: &InvertedIndex) -> io::Result<()> {
    let cache = CacheFile {
        version: FORMAT_VERSION,
        corpus_sha256: corpus_digest(corpus_path)?,
        index: index.clone(),
    };
    let tmp = cache_path.with_extension("idx.tmp");
    fs::write(&tmp, serde_json::to_vec(&cache)?)?;
    fs::rename(tmp, cache_path)
}

/// Cached index when valid, otherwise a fresh build. The flag reports a cache hit.
pub fn load_or_build(
    cache_path: &Path,
    corpus_path: &Path,
    corpus: &Corpus,
) -> Result<(InvertedIndex, bool), IndexError> {
    match load(cache_path, corpus_path, corpus) {
        Some(index) => Ok((index, true)),
        None => build_index(corpus).map(|i| (i, false)),
    }
}
