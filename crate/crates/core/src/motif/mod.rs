//! Subgraph enumeration, canonical labeling and motif censuses.

mod canon;
mod census;
mod esu;

pub use canon::{canonical_code, canonical_form, pattern_catalog, raw_code, PatternId, MAX_K, MIN_K};
pub(crate) use canon::pairs;
pub use census::{motif_census, CensusMode, MotifCensus};
pub use esu::{enumerate_connected, for_each_connected, sample_connected};
