use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::vector::{mean_pool, SparseVec};
use super::FeatureSource;
use crate::corpus::{SideKey, SpeakerSide};
use crate::error::{Error, Result};
use crate::normalize::Flagged;

const DTYPE: &str = "f32le";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    /// One vector per side.
    Side,
    /// One row per utterance, mean-pooled at scoring time.
    Utterance,
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Granularity::Side => "side",
            Granularity::Utterance => "utterance",
        })
    }
}

impl FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "side" => Ok(Granularity::Side),
            "utterance" => Ok(Granularity::Utterance),
            other => Err(Error::Config(format!("unknown granularity '{other}'"))),
        }
    }
}

/// Precomputed side or utterance embeddings keyed by side key.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    granularity: Granularity,
    entries: BTreeMap<SideKey, Vec<f32>>,
}

impl EmbeddingStore {
    pub fn new(dim: usize, granularity: Granularity) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("embedding dim must be positive".into()));
        }
        Ok(EmbeddingStore {
            dim,
            granularity,
            entries: BTreeMap::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &SideKey> {
        self.entries.keys()
    }

    /// Side granularity takes exactly `dim` values; utterance granularity a
    /// non-empty multiple of `dim`, row-major.
    pub fn insert(&mut self, key: SideKey, values: Vec<f32>) -> Result<()> {
        let ok = match self.granularity {
            Granularity::Side => values.len() == self.dim,
            Granularity::Utterance => !values.is_empty() && values.len() % self.dim == 0,
        };
        if !ok {
            return Err(Error::Dimension {
                expected: self.dim,
                actual: values.len(),
            });
        }
        self.entries.insert(key, values);
        Ok(())
    }

    pub fn get(&self, key: &SideKey) -> Option<&[f32]> {
        self.entries.get(key).map(Vec::as_slice)
    }

    /// Number of stored rows for a key (1 for side granularity).
    pub fn rows(&self, key: &SideKey) -> Option<usize> {
        self.entries.get(key).map(|v| v.len() / self.dim)
    }

    /// The vector for a side. For utterance granularity, rows are selected by
    /// the side's utterance indices and averaged, so windowed sides pool only
    /// their own utterances.
    pub fn side_vector(&self, side: &SpeakerSide) -> Result<Vec<f64>> {
        let key = side.key();
        let data = self.entries.get(&key).ok_or_else(|| Error::UnresolvedKey {
            trial_id: String::new(),
            key: key.to_string(),
        })?;
        match self.granularity {
            Granularity::Side => Ok(data.iter().map(|&x| x as f64).collect()),
            Granularity::Utterance => {
                let n_rows = data.len() / self.dim;
                let rows: Vec<Vec<f64>> = if side.is_empty() {
                    data.chunks(self.dim).map(|r| r.iter().map(|&x| x as f64).collect()).collect()
                } else {
                    side.utterances
                        .iter()
                        .map(|u| {
                            if u.index >= n_rows {
                                return Err(Error::format(format!(
                                    "side {key} has {n_rows} embedded utterances but references index {}",
                                    u.index
                                )));
                            }
                            let r = &data[u.index * self.dim..(u.index + 1) * self.dim];
                            Ok(r.iter().map(|&x| x as f64).collect())
                        })
                        .collect::<Result<_>>()?
                };
                mean_pool(&rows)
            }
        }
    }
}

impl FeatureSource for EmbeddingStore {
    fn dim(&self) -> usize {
        self.dim
    }

    fn features(&self, side: &SpeakerSide) -> Result<Flagged<SparseVec>> {
        let v = SparseVec::from_dense(&self.side_vector(side)?);
        Ok(if v.is_zero() { Flagged::flagged(v) } else { Flagged::clean(v) })
    }

    fn unused_keys(&self, used: &BTreeSet<&SideKey>) -> Vec<SideKey> {
        self.entries.keys().filter(|k| !used.contains(k)).cloned().collect()
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    dim: usize,
    dtype: String,
    granularity: Granularity,
    entries: Vec<ManifestEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestEntry {
    key: String,
    offset: usize,
    count: usize,
}

/// The payload sits next to the manifest with the same stem and a `.bin` extension.
pub fn payload_path(manifest: &Path) -> PathBuf {
    manifest.with_extension("bin")
}

pub fn save_embeddings(store: &EmbeddingStore, manifest_path: &Path) -> Result<()> {
    let mut payload = Vec::new();
    let mut entries = Vec::with_capacity(store.len());
    let mut offset = 0;
    for (key, values) in &store.entries {
        entries.push(ManifestEntry {
            key: key.to_string(),
            offset,
            count: values.len(),
        });
        offset += values.len();
        for v in values {
            payload.extend_from_slice(&v.to_le_bytes());
        }
    }
    let manifest = Manifest {
        dim: store.dim,
        dtype: DTYPE.into(),
        granularity: store.granularity,
        entries,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::format(e.to_string()))?;
    fs::write(manifest_path, json).map_err(|e| Error::io(manifest_path, e))?;
    let bin = payload_path(manifest_path);
    fs::write(&bin, payload).map_err(|e| Error::io(&bin, e))
}

pub fn load_embeddings(manifest_path: &Path) -> Result<EmbeddingStore> {
    let fail = |msg: String| Error::format(msg).at_path(manifest_path);
    let text = fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| fail(format!("invalid manifest: {e}")))?;
    if manifest.dtype != DTYPE {
        return Err(fail(format!("unknown dtype '{}' (expected {DTYPE})", manifest.dtype)));
    }
    let bin = payload_path(manifest_path);
    let bytes = fs::read(&bin).map_err(|e| Error::io(&bin, e))?;
    if bytes.len() % 4 != 0 {
        return Err(Error::format(format!("truncated payload: {} bytes is not a whole number of f32", bytes.len())).at_path(&bin));
    }
    let floats: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    let needed: usize = manifest.entries.iter().map(|e| e.offset + e.count).max().unwrap_or(0);
    let declared: usize = manifest.entries.iter().map(|e| e.count).sum();
    if needed > floats.len() || declared != floats.len() {
        return Err(Error::format(format!(
            "truncated payload: manifest declares {declared} floats (up to offset {needed}), payload holds {}",
            floats.len()
        ))
        .at_path(&bin));
    }
    let mut store = EmbeddingStore::new(manifest.dim, manifest.granularity).map_err(|e| fail(e.to_string()))?;
    for e in manifest.entries {
        let key = SideKey::from(e.key.as_str());
        if store.entries.contains_key(&key) {
            return Err(fail(format!("duplicate key {}", e.key)));
        }
        let values = floats[e.offset..e.offset + e.count].to_vec();
        store.insert(key, values).map_err(|err| match err {
            Error::Dimension { expected, actual } => fail(format!(
                "dim mismatch for {}: count {actual} incompatible with dim {expected} ({} granularity)",
                e.key, manifest.granularity
            )),
            other => other,
        })?;
    }
    Ok(store)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Channel, Utterance};

    fn side(conv: &str, n: usize) -> SpeakerSide {
        SpeakerSide {
            conversation_id: conv.into(),
            speaker_id: "s".into(),
            channel: Channel::Left,
            topic_id: "t".into(),
            encoding: "LDC".into(),
            utterances: (0..n).map(|i| Utterance::new(i, "x")).collect(),
        }
    }

    fn store3() -> EmbeddingStore {
        let mut s = EmbeddingStore::new(8, Granularity::Side).unwrap();
        for (i, k) in ["a/left", "b/left", "c/right"].iter().enumerate() {
            let v = (0..8).map(|j| (i * 8 + j) as f32 * 0.1 - 1.7e-3).collect();
            s.insert(SideKey::from(*k), v).unwrap();
        }
        s
    }

    #[test]
    fn round_trip_bit_equal() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.json");
        let s = store3();
        save_embeddings(&s, &path).unwrap();
        let back = load_embeddings(&path).unwrap();
        for k in s.keys() {
            let (a, b) = (s.get(k).unwrap(), back.get(k).unwrap());
            assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
        assert_eq!(s, back);
    }

    #[test]
    fn short_payload_is_truncation_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.json");
        save_embeddings(&store3(), &path).unwrap();
        let bin = payload_path(&path);
        let bytes = fs::read(&bin).unwrap();
        fs::write(&bin, &bytes[..bytes.len() - 32]).unwrap();
        let msg = load_embeddings(&path).unwrap_err().to_string();
        assert!(msg.contains("truncated"), "{msg}");
    }

    #[test]
    fn unknown_dtype_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.json");
        fs::write(&path, r#"{"dim":2,"dtype":"f16le","granularity":"side","entries":[]}"#).unwrap();
        fs::write(payload_path(&path), b"").unwrap();
        assert!(load_embeddings(&path).unwrap_err().to_string().contains("dtype"));
    }

    #[test]
    fn dim_mismatch_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.json");
        fs::write(
            &path,
            r#"{"dim":2,"dtype":"f32le","granularity":"side","entries":[{"key":"a/left","offset":0,"count":3}]}"#,
        )
        .unwrap();
        fs::write(payload_path(&path), [0u8; 12]).unwrap();
        assert!(load_embeddings(&path).unwrap_err().to_string().contains("dim mismatch"));
    }

    #[test]
    fn utterance_rows_pool_by_index() {
        let mut s = EmbeddingStore::new(2, Granularity::Utterance).unwrap();
        s.insert("c/left".into(), vec![1.0, 0.0, 0.0, 1.0, 3.0, 3.0]).unwrap();
        assert_eq!(s.side_vector(&side("c", 3)).unwrap(), [4.0 / 3.0, 4.0 / 3.0]);
        let mut last = side("c", 3);
        last.utterances.remove(0);
        assert_eq!(s.side_vector(&last).unwrap(), [1.5, 2.0]);
        assert!(s.side_vector(&side("c", 4)).is_err());
    }
}
