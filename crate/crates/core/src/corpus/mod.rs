//! Transcript corpora: domain types, raw-encoding parsers, the canonical
//! interchange format, the synthetic generator and speaker splits.

mod canonical;
mod parse;
mod split;
mod synth;
mod types;

pub use canonical::{read_canonical, read_canonical_from, write_canonical, write_canonical_to};
pub use parse::{ingest_dir, parse_bbn, parse_ldc, parse_raw, render_raw, CallInfo, RawFormat};
pub use split::{split_speakers, Split, SplitAssignment, SplitRatios};
pub use synth::{
    generate_synthetic, synthetic_noun_lexicon, vocabulary, CountDistribution, SynthConfig,
    SynthVocabulary,
};
pub use types::{encoding, Channel, Corpus, Provenance, SideKey, SpeakerSide, Utterance};
