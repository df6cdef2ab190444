//! Columnar corpus cache written by `ingest` and read by later stages.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cascade::{Cascade, CascadeType, DiffusionNetwork, ReshareEvent, UserId, UserRegistry};
use crate::error::{Error, Result};

/// One cascade with its growth-shape class (`None` if classification failed).
#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub cascade: Cascade,
    pub cascade_type: Option<CascadeType>,
}

#[derive(Clone, Debug, Default)]
pub struct Corpus {
    pub users: UserRegistry,
    pub entries: Vec<CorpusEntry>,
    pub diffusion: DiffusionNetwork,
}

#[derive(Serialize, Deserialize)]
struct Columns {
    id: String,
    cascade_type: Option<CascadeType>,
    source: Vec<u32>,
    target: Vec<u32>,
    time: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Cache {
    format: u32,
    users: Vec<String>,
    cascades: Vec<Columns>,
    diffusion_u: Vec<u32>,
    diffusion_v: Vec<u32>,
}

const FORMAT: u32 = 1;

impl Corpus {
    pub fn find(&self, id: &str) -> Option<&CorpusEntry> {
        self.entries.iter().find(|e| e.cascade.id() == id)
    }

    /// Serialized cache bytes; identical corpora give identical bytes.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let cascades = self
            .entries
            .iter()
            .map(|e| {
                let ev = e.cascade.events();
                Columns {
                    id: e.cascade.id().to_owned(),
                    cascade_type: e.cascade_type,
                    source: ev.iter().map(|x| x.source.0).collect(),
                    target: ev.iter().map(|x| x.target.0).collect(),
                    time: ev.iter().map(|x| x.time).collect(),
                }
            })
            .collect();
        let (diffusion_u, diffusion_v) = self.diffusion.sorted_edges().into_iter().map(|(u, v)| (u.0, v.0)).unzip();
        let cache = Cache {
            format: FORMAT,
            users: self.users.names().to_vec(),
            cascades,
            diffusion_u,
            diffusion_v,
        };
        Ok(serde_json::to_vec(&cache)?)
    }

    pub fn from_bytes(bytes: &[u8], source_name: &str) -> Result<Self> {
        let cache: Cache = serde_json::from_slice(bytes)?;
        if cache.format != FORMAT {
            return Err(Error::Data(format!("{source_name}: unsupported cache format {}", cache.format)));
        }
        let users = UserRegistry::from_names(cache.users)?;
        let n = users.len() as u32;
        let check = |id: u32| {
            if id < n {
                Ok(UserId(id))
            } else {
                Err(Error::Data(format!("{source_name}: user id {id} out of range")))
            }
        };
        let mut entries = Vec::with_capacity(cache.cascades.len());
        for c in cache.cascades {
            if c.source.len() != c.target.len() || c.source.len() != c.time.len() {
                return Err(Error::Data(format!("{source_name}: ragged columns for cascade {}", c.id)));
            }
            let events = (0..c.source.len())
                .map(|i| {
                    Ok(ReshareEvent {
                        source: check(c.source[i])?,
                        target: check(c.target[i])?,
                        time: c.time[i],
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            entries.push(CorpusEntry {
                cascade: Cascade::new(c.id, events)?,
                cascade_type: c.cascade_type,
            });
        }
        if cache.diffusion_u.len() != cache.diffusion_v.len() {
            return Err(Error::Data(format!("{source_name}: ragged diffusion columns")));
        }
        let mut diffusion = DiffusionNetwork::new();
        for (&u, &v) in cache.diffusion_u.iter().zip(&cache.diffusion_v) {
            diffusion.insert(check(u)?, check(v)?);
        }
        Ok(Corpus {
            users,
            entries,
            diffusion,
        })
    }

    /// Writes the cache and returns its hex SHA-256 digest.
    pub fn save(&self, path: &Path) -> Result<String> {
        let bytes = self.to_bytes()?;
        std::fs::write(path, &bytes).map_err(|e| Error::io(path, e))?;
        Ok(digest(&bytes))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes, &path.display().to_string())
    }
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_everything() {
        let mut users = UserRegistry::new();
        let (a, b, c) = (users.intern("a"), users.intern("b"), users.intern("c"));
        let cascade = Cascade::new(
            "x",
            vec![
                ReshareEvent { source: a, target: b, time: 3.5 },
                ReshareEvent { source: b, target: c, time: 7.25 },
            ],
        )
        .unwrap();
        let mut diffusion = DiffusionNetwork::new();
        diffusion.insert(c, a);
        let corpus = Corpus {
            users,
            entries: vec![CorpusEntry {
                cascade: cascade.clone(),
                cascade_type: Some(CascadeType::TypeIII),
            }],
            diffusion,
        };
        let bytes = corpus.to_bytes().unwrap();
        let back = Corpus::from_bytes(&bytes, "mem").unwrap();
        assert_eq!(back.entries[0].cascade, cascade);
        assert_eq!(back.entries[0].cascade_type, Some(CascadeType::TypeIII));
        assert!(back.diffusion.contains(a, c));
        assert_eq!(back.users.names(), corpus.users.names());
        assert_eq!(back.to_bytes().unwrap(), bytes);
    }

    #[test]
    fn out_of_range_ids_are_rejected() {
        let text = r#"{"format":1,"users":["a"],"cascades":[],"diffusion_u":[0],"diffusion_v":[3]}"#;
        assert!(matches!(Corpus::from_bytes(text.as_bytes(), "t"), Err(Error::Data(_))));
    }
}
