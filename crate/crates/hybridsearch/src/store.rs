//! A built index directory loaded for querying.

use std::path::Path;

use hybridsearch_core::index::{FusedIndex, HybridIndex};
use hybridsearch_core::pipeline::Engine;
use hybridsearch_core::projection::ProjectionMatrix;
use hybridsearch_core::toy::ToyEncoder;

use crate::error::{Error, Result};
use crate::formats::snapshot::{self, digest, IndexMeta};
use crate::ingest::{self, Built, FUSED_FILE, HYBRID_FILE};
use crate::runner::Searcher;

pub struct Store {
    pub meta: IndexMeta,
    pub hybrid: HybridIndex,
    pub fused: FusedIndex,
    pub projection: ProjectionMatrix,
    pub encoder: Option<ToyEncoder>,
}

impl Store {
    /// Loads `hybrid.snap` and `fused.snap` from `dir`. When `seed` is given
    /// it must equal the seed the fused vectors were built with.
    pub fn open(dir: impl AsRef<Path>, seed: Option<u64>) -> Result<Self> {
        let dir = dir.as_ref();
        let (hp, fp) = (dir.join(HYBRID_FILE), dir.join(FUSED_FILE));
        let (hmeta, hybrid) = snapshot::decode_hybrid(&snapshot::read_file(&hp)?, &hp)?;
        let (fmeta, fused) = snapshot::decode_fused(&snapshot::read_file(&fp)?, &fp)?;
        if hmeta != fmeta {
            return Err(Error::Invalid(format!(
                "{} and {} were built with different parameters",
                hp.display(),
                fp.display()
            )));
        }
        if let Some(seed) = seed {
            if seed != fmeta.seed {
                return Err(Error::Invalid(format!(
                    "projection seed {seed} does not match the seed {} recorded in {}; \
                     query vectors would be projected with a different matrix than the documents",
                    fmeta.seed,
                    fp.display()
                )));
            }
        }
        Self::from_parts(fmeta, Built { hybrid, fused })
    }

    pub fn from_parts(meta: IndexMeta, built: Built) -> Result<Self> {
        let projection = ProjectionMatrix::build(meta.seed, meta.dense_dim, meta.vocab_dim)?;
        let encoder = ingest::toy_encoder(&meta)?;
        let store = Self {
            meta,
            hybrid: built.hybrid,
            fused: built.fused,
            projection,
            encoder,
        };
        store.engine()?;
        Ok(store)
    }

    pub fn engine(&self) -> Result<Engine<'_>> {
        Ok(Engine::new(&self.hybrid, &self.fused, &self.projection)?)
    }

    pub fn searcher(&self) -> Searcher<'_> {
        Searcher {
            engine: self.engine().expect("checked when the store was built"),
            encoder: self.encoder.as_ref(),
        }
    }

    /// SHA-256 of the two snapshots this store would write.
    pub fn digests(&self) -> (String, String) {
        (
            digest(&snapshot::encode_hybrid(&self.meta, &self.hybrid)),
            digest(&snapshot::encode_fused(&self.meta, &self.fused)),
        )
    }
}
