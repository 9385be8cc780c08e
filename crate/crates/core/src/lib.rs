//! Gender-bias auditing for bilingual word-embedding spaces and
//! translation lexicons.
//!
//! The pipeline loads two text vector tables ([`embedding`]), a bilingual
//! gender-annotated word list ([`lexicon`], optionally completed through a
//! [`translate`] provider), measures every word against a female/male
//! anchor pair ([`bias`]) and renders the results ([`report`]). [`simnet`]
//! holds the cosine kernel and the thresholded similarity network.

pub mod bias;
pub mod embedding;
pub mod lexicon;
pub mod report;
pub mod simnet;
pub mod translate;

pub use bias::{
    audit, bias_direction, bias_intensity, bin_records, change_sign_summary, gender_shift_matrix, partition_direction,
    post_translation_change, validate_target_pair, AuditResult, AuditSettings, BiasError, BiasRecord, DirectionTable,
    Histogram, ShiftMatrix, SignSummary, TargetPair,
};
pub use embedding::{canonicalize, normalize, parse_embedding_file, write_embedding_file, EmbeddingTable, Vector};
pub use lexicon::{dedupe_and_canonicalize, fill_translations, parse_lexicon, BilingualLexicon, GenderTag};
pub use report::{render, scatter_data, ReportFormat};
pub use simnet::{build_similarity_network, cosine, export_network, NetworkFormat, SimilarityNetwork};
pub use translate::{CacheProvider, HttpProvider, MultiTokenPolicy, TranslationProvider};
