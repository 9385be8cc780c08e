//! Similarity-based gender-bias features and their summary tables.
//!
//! Every word `w` is compared against a target pair of anchors, a female
//! anchor `X` and a male anchor `Y`:
//!
//! * direction `= cos(w, X) − cos(w, Y)`; positive values lean female,
//! * intensity `= |direction|`,
//! * post-translation change `= cos(w_dst, X_dst) − cos(w_src, X_src)`,
//!   computed per anchor channel.
//!
//! The sign convention (positive = toward the female anchor) is fixed
//! throughout the crate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{canonicalize, EmbeddingTable, Vector};
use crate::lexicon::{BilingualLexicon, GenderTag};
use crate::simnet::{cosine, SimilarityError, DEFAULT_THRESHOLD};
use crate::translate::MultiTokenPolicy;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_BIN_WIDTH: f64 = 0.1;
pub const DEFAULT_SIGNIFICANCE: f64 = 0.1;
pub const DEFAULT_MAX_INTERNAL: f64 = 0.9;

/// Relative tolerance used to snap values onto a bin boundary.
const BOUNDARY_SNAP: f64 = 1e-9;
/// Number of example words kept per histogram bin / shift cell.
const BIN_EXAMPLES: usize = 5;
const CELL_EXAMPLES: usize = 3;

#[derive(Debug, Error, PartialEq)]
pub enum BiasError {
    #[error("anchor word {word:?} not found in the {language} table")]
    MissingAnchor { word: String, language: String },
    #[error("target pair anchors are the same word {0:?}")]
    SameAnchors(String),
    #[error("bin width must be a positive finite number, got {0}")]
    InvalidBinWidth(f64),
    #[error("entry {0:?} has gender 'unknown'; annotate it before computing gender shifts")]
    UnknownGender(String),
    #[error("entry {0:?} has no translation")]
    Untranslated(String),
    #[error("empty post-filter word set ({0} table)")]
    EmptyWordSet(String),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
}

/// Female/male anchor words for one language.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TargetPair {
    pub female_anchor: String,
    pub male_anchor: String,
    pub language: String,
    /// Cosine between the two anchors.
    pub internal_similarity: f64,
}

impl TargetPair {
    /// The same pair with anchors exchanged.
    pub fn swapped(&self) -> TargetPair {
        TargetPair {
            female_anchor: self.male_anchor.clone(),
            male_anchor: self.female_anchor.clone(),
            ..self.clone()
        }
    }
}

/// Checks that both anchors exist and differ and measures how similar they
/// are. A similarity above `max_internal` produces a warning, not an error.
pub fn validate_target_pair(
    table: &EmbeddingTable,
    female: &str,
    male: &str,
    max_internal: f64,
) -> Result<(TargetPair, Option<String>), BiasError> {
    let female = canonicalize(female);
    let male = canonicalize(male);
    if female == male {
        return Err(BiasError::SameAnchors(female));
    }
    let (fv, mv) = anchor_vectors(table, &female, &male)?;
    let internal = cosine(fv, mv)?;
    let warning = (internal > max_internal).then(|| {
        format!(
            "{} anchors {female:?}/{male:?} have internal similarity {internal:.6} > {max_internal:.6}",
            table.language()
        )
    });
    Ok((
        TargetPair {
            female_anchor: female,
            male_anchor: male,
            language: table.language().to_owned(),
            internal_similarity: internal,
        },
        warning,
    ))
}

fn anchor_vectors<'t>(
    table: &'t EmbeddingTable,
    female: &str,
    male: &str,
) -> Result<(&'t Vector, &'t Vector), BiasError> {
    let get = |w: &str| {
        table.lookup(w).ok_or_else(|| BiasError::MissingAnchor {
            word: w.to_owned(),
            language: table.language().to_owned(),
        })
    };
    Ok((get(female)?, get(male)?))
}

/// `|sim_female − sim_male|`.
pub fn bias_intensity(sim_female: f64, sim_male: f64) -> f64 {
    (sim_female - sim_male).abs()
}

/// `sim_female − sim_male`; positive means female-directed.
pub fn bias_direction(sim_female: f64, sim_male: f64) -> f64 {
    sim_female - sim_male
}

/// `sim_dest − sim_src` for one anchor channel.
pub fn post_translation_change(sim_dest: f64, sim_src: f64) -> f64 {
    sim_dest - sim_src
}

/// Per-word similarities to the anchors and the derived features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasRecord {
    pub word: String,
    pub sim_female: f64,
    pub sim_male: f64,
    pub intensity: f64,
    pub direction: f64,
}

impl BiasRecord {
    pub fn new(word: impl Into<String>, sim_female: f64, sim_male: f64) -> Self {
        let direction = bias_direction(sim_female, sim_male);
        BiasRecord {
            word: word.into(),
            sim_female,
            sim_male,
            intensity: direction.abs(),
            direction,
        }
    }
}

fn record_for(word: &str, v: &Vector, female: &Vector, male: &Vector) -> Result<BiasRecord, BiasError> {
    Ok(BiasRecord::new(word, cosine(v, female)?, cosine(v, male)?))
}

/// Computes records for every word of `words` present in `table`, returning
/// the records (sorted by word) and the out-of-vocabulary words.
pub fn compute_records<S: AsRef<str>>(
    table: &EmbeddingTable,
    pair: &TargetPair,
    words: &[S],
) -> Result<(Vec<BiasRecord>, Vec<String>), BiasError> {
    let (fv, mv) = anchor_vectors(table, &pair.female_anchor, &pair.male_anchor)?;
    let mut records = Vec::new();
    let mut oov = Vec::new();
    for w in words {
        let w = canonicalize(w.as_ref());
        match table.lookup(&w) {
            Some(v) => records.push(record_for(&w, v, fv, mv)?),
            None => oov.push(w),
        }
    }
    records.sort_by(|a, b| a.word.cmp(&b.word));
    oov.sort();
    Ok((records, oov))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    /// First few words in the bin, lexicographically.
    pub examples: Vec<String>,
}

/// Intensity histogram with half-open bins `[lower, upper)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: f64,
    pub bins: Vec<HistogramBin>,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionBin {
    pub lower: f64,
    pub upper: f64,
    pub female: usize,
    pub male: usize,
    /// Records with direction exactly zero; only ever non-zero in the first bin.
    pub balanced: usize,
}

impl DirectionBin {
    pub fn total(&self) -> usize {
        self.female + self.male + self.balanced
    }
}

/// Histogram of |direction| split by sign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionTable {
    pub bin_width: f64,
    pub bins: Vec<DirectionBin>,
    pub female_total: usize,
    pub male_total: usize,
    pub balanced_count: usize,
    pub total: usize,
}

fn check_width(bin_width: f64) -> Result<(), BiasError> {
    if bin_width.is_finite() && bin_width > 0.0 {
        Ok(())
    } else {
        Err(BiasError::InvalidBinWidth(bin_width))
    }
}

/// Bin index of a non-negative value. Values within a relative 1e-9 of an
/// interior boundary count as lying on it and go to the upper bin, so that
/// e.g. an intensity of 0.3 lands in `[0.3, 0.4)` despite `0.3 / 0.1` being
/// `2.9999999999999996` in binary floating point.
pub fn bin_index(value: f64, bin_width: f64) -> usize {
    let q = value / bin_width;
    let r = q.round();
    if (q - r).abs() <= BOUNDARY_SNAP * r.abs().max(1.0) {
        r as usize
    } else {
        q.floor() as usize
    }
}

fn bin_bounds(n_bins: usize, bin_width: f64) -> impl Iterator<Item = (f64, f64)> {
    (0..n_bins).map(move |i| (i as f64 * bin_width, (i + 1) as f64 * bin_width))
}

fn bin_count(max: f64, bin_width: f64) -> usize {
    bin_index(max, bin_width) + 1
}

/// Histogram of record intensities. Bins start at 0 and extend to cover the
/// largest intensity; an empty input yields an empty histogram.
pub fn bin_records(records: &[BiasRecord], bin_width: f64) -> Result<Histogram, BiasError> {
    check_width(bin_width)?;
    let Some(max) = records.iter().map(|r| r.intensity).reduce(f64::max) else {
        return Ok(Histogram {
            bin_width,
            bins: Vec::new(),
            total: 0,
        });
    };
    let mut bins: Vec<HistogramBin> = bin_bounds(bin_count(max, bin_width), bin_width)
        .map(|(lower, upper)| HistogramBin {
            lower,
            upper,
            count: 0,
            examples: Vec::new(),
        })
        .collect();
    let mut sorted: Vec<&BiasRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.word.cmp(&b.word));
    for r in sorted {
        let bin = &mut bins[bin_index(r.intensity, bin_width)];
        bin.count += 1;
        if bin.examples.len() < BIN_EXAMPLES {
            bin.examples.push(r.word.clone());
        }
    }
    Ok(Histogram {
        bin_width,
        bins,
        total: records.len(),
    })
}

/// Splits records into intensity bins and by direction sign.
pub fn partition_direction(records: &[BiasRecord], bin_width: f64) -> Result<DirectionTable, BiasError> {
    check_width(bin_width)?;
    let n_bins = records
        .iter()
        .map(|r| r.direction.abs())
        .reduce(f64::max)
        .map_or(0, |max| bin_count(max, bin_width));
    let mut bins: Vec<DirectionBin> = bin_bounds(n_bins, bin_width)
        .map(|(lower, upper)| DirectionBin {
            lower,
            upper,
            female: 0,
            male: 0,
            balanced: 0,
        })
        .collect();
    for r in records {
        let bin = &mut bins[bin_index(r.direction.abs(), bin_width)];
        if r.direction > 0.0 {
            bin.female += 1;
        } else if r.direction < 0.0 {
            bin.male += 1;
        } else {
            bin.balanced += 1;
        }
    }
    Ok(DirectionTable {
        bin_width,
        female_total: bins.iter().map(|b| b.female).sum(),
        male_total: bins.iter().map(|b| b.male).sum(),
        balanced_count: bins.iter().map(|b| b.balanced).sum(),
        total: records.len(),
        bins,
    })
}

/// `100 · count / total` rounded half-up to two decimals, computed in
/// integer arithmetic. Zero when `total` is zero.
pub fn percent_half_up(count: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let (c, t) = (count as u128, total as u128);
    let hundredths = (20_000 * c + t) / (2 * t);
    hundredths as f64 / 100.0
}

/// Pre- vs post-translation gender counts, indexed
/// `[pre][post]` in the order neutral, masculine, feminine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftMatrix {
    pub counts: [[usize; 3]; 3],
    pub row_totals: [usize; 3],
    pub column_totals: [usize; 3],
    pub grand_total: usize,
    /// Cell percentages of the grand total.
    pub percentages: [[f64; 3]; 3],
    pub row_percentages: [f64; 3],
    /// Up to three `(source, target)` examples per cell.
    pub examples: [[Vec<(String, String)>; 3]; 3],
}

/// Cross-tabulates source against target gender annotations.
pub fn gender_shift_matrix(lexicon: &BilingualLexicon) -> Result<ShiftMatrix, BiasError> {
    let mut counts = [[0usize; 3]; 3];
    let mut examples: [[Vec<(String, String)>; 3]; 3] = Default::default();
    for e in lexicon.entries() {
        let target = e
            .target
            .as_ref()
            .ok_or_else(|| BiasError::Untranslated(e.source.surface.clone()))?;
        let pre = e
            .source
            .gender
            .index()
            .ok_or_else(|| BiasError::UnknownGender(e.source.surface.clone()))?;
        let post = target
            .gender
            .index()
            .ok_or_else(|| BiasError::UnknownGender(e.source.surface.clone()))?;
        counts[pre][post] += 1;
        if examples[pre][post].len() < CELL_EXAMPLES {
            examples[pre][post].push((e.source.surface.clone(), target.surface.clone()));
        }
    }
    let row_totals = counts.map(|row| row.iter().sum());
    let column_totals = [0, 1, 2].map(|j| counts.iter().map(|row| row[j]).sum());
    let grand_total = row_totals.iter().sum();
    Ok(ShiftMatrix {
        percentages: counts.map(|row| row.map(|c| percent_half_up(c, grand_total))),
        row_percentages: row_totals.map(|c| percent_half_up(c, grand_total)),
        counts,
        row_totals,
        column_totals,
        grand_total,
        examples,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChannelSummary {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
    pub total: usize,
    pub positive_pct: f64,
    pub negative_pct: f64,
    pub zero_pct: f64,
}

impl ChannelSummary {
    fn from_values<I: IntoIterator<Item = f64>>(values: I) -> Self {
        let mut s = ChannelSummary::default();
        for v in values {
            if v > 0.0 {
                s.positive += 1;
            } else if v < 0.0 {
                s.negative += 1;
            } else {
                s.zero += 1;
            }
            s.total += 1;
        }
        s.positive_pct = percent_half_up(s.positive, s.total);
        s.negative_pct = percent_half_up(s.negative, s.total);
        s.zero_pct = percent_half_up(s.zero, s.total);
        s
    }
}

/// Sign counts of post-translation changes for the female (X) and male (Y)
/// anchor channels.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SignSummary {
    pub female_channel: ChannelSummary,
    pub male_channel: ChannelSummary,
}

/// Summarizes `(female-channel change, male-channel change)` pairs.
pub fn change_sign_summary(changes: &[(f64, f64)]) -> SignSummary {
    SignSummary {
        female_channel: ChannelSummary::from_values(changes.iter().map(|c| c.0)),
        male_channel: ChannelSummary::from_values(changes.iter().map(|c| c.1)),
    }
}

/// Sign counts for one (pre, post) gender cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftSignRow {
    pub pre: GenderTag,
    pub post: GenderTag,
    pub summary: SignSummary,
}

/// A lexicon entry resolved in both tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossRecord {
    pub source: String,
    pub target: String,
    pub source_gender: GenderTag,
    pub target_gender: GenderTag,
    pub source_record: BiasRecord,
    pub target_record: BiasRecord,
    /// `cos(w_dst, X_dst) − cos(w_src, X_src)`.
    pub change_female: f64,
    /// `cos(w_dst, Y_dst) − cos(w_src, Y_src)`.
    pub change_male: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditSettings {
    pub bin_width: f64,
    pub network_threshold: f64,
    pub significance_threshold: f64,
    pub max_internal_similarity: f64,
    pub multi_token: MultiTokenPolicy,
}

impl Default for AuditSettings {
    fn default() -> Self {
        AuditSettings {
            bin_width: DEFAULT_BIN_WIDTH,
            network_threshold: DEFAULT_THRESHOLD,
            significance_threshold: DEFAULT_SIGNIFICANCE,
            max_internal_similarity: DEFAULT_MAX_INTERNAL,
            multi_token: MultiTokenPolicy::Reject,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SkippedWords {
    /// Source words missing from the source table.
    pub source_oov: Vec<String>,
    /// `(source, target)` entries whose target is missing from the target table.
    pub target_oov: Vec<(String, String)>,
    /// Source words without a translation.
    pub untranslated: Vec<String>,
    /// `(source, target)` entries whose multi-word target the policy rejected.
    pub multi_token_rejected: Vec<(String, String)>,
}

/// Everything an audit produces, plus the settings that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditResult {
    pub schema_version: u32,
    pub settings: AuditSettings,
    pub source_language: String,
    pub target_language: String,
    pub lexicon_size: usize,
    pub source_pair: TargetPair,
    pub target_pair: TargetPair,
    pub source_records: Vec<BiasRecord>,
    pub target_records: Vec<BiasRecord>,
    pub cross_records: Vec<CrossRecord>,
    pub source_histogram: Histogram,
    pub target_histogram: Histogram,
    pub source_directions: DirectionTable,
    pub target_directions: DirectionTable,
    pub shift_matrix: Option<ShiftMatrix>,
    /// Why the shift matrix is absent, when it is.
    pub shift_matrix_note: Option<String>,
    pub sign_summary: SignSummary,
    pub sign_breakdown: Vec<ShiftSignRow>,
    pub skipped: SkippedWords,
    pub warnings: Vec<String>,
}

impl AuditResult {
    /// A result with no records, used as the neutral element for rendering.
    pub fn empty(settings: AuditSettings) -> Self {
        let hist = Histogram {
            bin_width: settings.bin_width,
            bins: Vec::new(),
            total: 0,
        };
        let dirs = DirectionTable {
            bin_width: settings.bin_width,
            bins: Vec::new(),
            female_total: 0,
            male_total: 0,
            balanced_count: 0,
            total: 0,
        };
        AuditResult {
            schema_version: SCHEMA_VERSION,
            settings,
            source_language: String::new(),
            target_language: String::new(),
            lexicon_size: 0,
            source_pair: TargetPair::default(),
            target_pair: TargetPair::default(),
            source_records: Vec::new(),
            target_records: Vec::new(),
            cross_records: Vec::new(),
            source_histogram: hist.clone(),
            target_histogram: hist,
            source_directions: dirs.clone(),
            target_directions: dirs,
            shift_matrix: None,
            shift_matrix_note: None,
            sign_summary: SignSummary::default(),
            sign_breakdown: Vec::new(),
            skipped: SkippedWords::default(),
            warnings: Vec::new(),
        }
    }
}

enum Resolved<'t> {
    Single(&'t Vector),
    Averaged(Vector),
    Missing,
    Rejected,
}

fn resolve_target<'t>(table: &'t EmbeddingTable, surface: &str, policy: MultiTokenPolicy) -> Resolved<'t> {
    let tokens: Vec<&str> = surface.split_whitespace().collect();
    if tokens.len() <= 1 {
        return table.lookup(surface).map_or(Resolved::Missing, Resolved::Single);
    }
    match policy {
        MultiTokenPolicy::Reject => Resolved::Rejected,
        MultiTokenPolicy::Head => table.lookup(tokens[0]).map_or(Resolved::Missing, Resolved::Single),
        MultiTokenPolicy::Mean => {
            let vectors: Option<Vec<&Vector>> = tokens.iter().map(|t| table.lookup(t)).collect();
            match vectors.and_then(|vs| Vector::mean(vs).ok()) {
                Some(v) if !v.is_zero() => Resolved::Averaged(v),
                _ => Resolved::Missing,
            }
        }
    }
}

/// Runs the full audit over a lexicon.
///
/// Words missing from either table are excluded from cross-language
/// features but keep their single-language record where possible; all
/// skipped words are listed in [`AuditResult::skipped`].
pub fn audit(
    source_table: &EmbeddingTable,
    target_table: &EmbeddingTable,
    lexicon: &BilingualLexicon,
    source_pair: &TargetPair,
    target_pair: &TargetPair,
    settings: &AuditSettings,
) -> Result<AuditResult, BiasError> {
    check_width(settings.bin_width)?;
    let (src_f, src_m) = anchor_vectors(source_table, &source_pair.female_anchor, &source_pair.male_anchor)?;
    let (dst_f, dst_m) = anchor_vectors(target_table, &target_pair.female_anchor, &target_pair.male_anchor)?;

    let mut skipped = SkippedWords::default();
    let mut source_records = Vec::new();
    let mut target_records = Vec::new();
    let mut cross_records = Vec::new();

    for entry in lexicon.entries() {
        let word = &entry.source.surface;
        let src_record = match source_table.lookup(word) {
            Some(v) => {
                let r = record_for(word, v, src_f, src_m)?;
                source_records.push(r.clone());
                Some(r)
            }
            None => {
                skipped.source_oov.push(word.clone());
                None
            }
        };
        let Some(target) = &entry.target else {
            skipped.untranslated.push(word.clone());
            continue;
        };
        let pair = (word.clone(), target.surface.clone());
        let dst_record = match resolve_target(target_table, &target.surface, settings.multi_token) {
            Resolved::Single(v) => record_for(&target.surface, v, dst_f, dst_m)?,
            Resolved::Averaged(v) => record_for(&target.surface, &v, dst_f, dst_m)?,
            Resolved::Missing => {
                skipped.target_oov.push(pair);
                continue;
            }
            Resolved::Rejected => {
                skipped.multi_token_rejected.push(pair);
                continue;
            }
        };
        target_records.push(dst_record.clone());
        if let Some(src_record) = src_record {
            cross_records.push(CrossRecord {
                source: word.clone(),
                target: target.surface.clone(),
                source_gender: entry.source.gender,
                target_gender: target.gender,
                change_female: post_translation_change(dst_record.sim_female, src_record.sim_female),
                change_male: post_translation_change(dst_record.sim_male, src_record.sim_male),
                source_record: src_record,
                target_record: dst_record,
            });
        }
    }

    if source_records.is_empty() {
        return Err(BiasError::EmptyWordSet(source_table.language().to_owned()));
    }
    if target_records.is_empty() {
        return Err(BiasError::EmptyWordSet(target_table.language().to_owned()));
    }
    // lexicon order is source order; target words need their own sort
    target_records.sort_by(|a, b| a.word.cmp(&b.word));

    let mut warnings = Vec::new();
    for pair in [source_pair, target_pair] {
        if pair.internal_similarity > settings.max_internal_similarity {
            warnings.push(format!(
                "{} anchors {:?}/{:?} have internal similarity {:.6} > {:.6}",
                pair.language,
                pair.female_anchor,
                pair.male_anchor,
                pair.internal_similarity,
                settings.max_internal_similarity
            ));
        }
    }

    let (shift_matrix, shift_matrix_note) = match gender_shift_matrix(lexicon) {
        Ok(m) => (Some(m), None),
        Err(e) => (None, Some(e.to_string())),
    };

    let changes: Vec<(f64, f64)> = cross_records.iter().map(|c| (c.change_female, c.change_male)).collect();
    let sign_breakdown = if shift_matrix.is_some() {
        let mut rows = Vec::new();
        for pre in GenderTag::KNOWN {
            for post in GenderTag::KNOWN {
                let cell: Vec<(f64, f64)> = cross_records
                    .iter()
                    .filter(|c| c.source_gender == pre && c.target_gender == post)
                    .map(|c| (c.change_female, c.change_male))
                    .collect();
                rows.push(ShiftSignRow {
                    pre,
                    post,
                    summary: change_sign_summary(&cell),
                });
            }
        }
        rows
    } else {
        Vec::new()
    };

    Ok(AuditResult {
        schema_version: SCHEMA_VERSION,
        settings: *settings,
        source_language: lexicon.source_language().to_owned(),
        target_language: lexicon.target_language().to_owned(),
        lexicon_size: lexicon.len(),
        source_pair: source_pair.clone(),
        target_pair: target_pair.clone(),
        source_histogram: bin_records(&source_records, settings.bin_width)?,
        target_histogram: bin_records(&target_records, settings.bin_width)?,
        source_directions: partition_direction(&source_records, settings.bin_width)?,
        target_directions: partition_direction(&target_records, settings.bin_width)?,
        sign_summary: change_sign_summary(&changes),
        source_records,
        target_records,
        cross_records,
        shift_matrix,
        shift_matrix_note,
        sign_breakdown,
        skipped,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::{LexiconEntry, Provenance, WordEntry};

    fn records(intensities: &[f64]) -> Vec<BiasRecord> {
        intensities
            .iter()
            .enumerate()
            .map(|(i, &d)| BiasRecord::new(format!("w{i}"), d, 0.0))
            .collect()
    }

    #[test]
    fn published_feature_arithmetic() {
        assert!((bias_intensity(0.556, 0.241) - 0.315).abs() < 1e-12);
        assert!((bias_direction(0.556, 0.241) - 0.315).abs() < 1e-12);
        assert!((bias_direction(0.301, 0.413) + 0.112).abs() < 1e-12);
        assert!((bias_intensity(0.624, 0.419) - 0.205).abs() < 1e-12);
        assert_eq!(bias_intensity(0.37, 0.37), 0.0);
        assert_eq!(bias_direction(0.2, 0.2), 0.0);
        assert!((post_translation_change(0.624, 0.556) - 0.068).abs() < 1e-12);
        assert!((post_translation_change(0.422, 0.065) - 0.357).abs() < 1e-12);
        assert_eq!(post_translation_change(0.4, 0.4), 0.0);
    }

    #[test]
    fn histogram_interval_rule() {
        let h = bin_records(&records(&[0.05, 0.15, 0.15]), 0.1).unwrap();
        assert_eq!(h.bins.iter().map(|b| b.count).collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(h.total, 3);

        let h = bin_records(&records(&[0.1]), 0.1).unwrap();
        assert_eq!(h.bins.len(), 2);
        assert_eq!((h.bins[1].lower, h.bins[1].count), (0.1, 1));

        // 0.3 / 0.1 is slightly below 3 in binary; it still goes to the upper bin
        assert_eq!(bin_index(0.3, 0.1), 3);
        assert_eq!(bin_index(0.7, 0.1), 7);
        assert_eq!(bin_index(0.0999, 0.1), 0);
        assert_eq!(bin_index(0.0, 0.1), 0);
    }

    #[test]
    fn histogram_empty_and_errors() {
        let h = bin_records(&[], 0.1).unwrap();
        assert_eq!((h.bins.len(), h.total), (0, 0));
        assert_eq!(bin_records(&[], 0.0), Err(BiasError::InvalidBinWidth(0.0)));
        assert!(bin_records(&[], f64::NAN).is_err());
        assert!(partition_direction(&[], -1.0).is_err());
    }

    #[test]
    fn direction_partition() {
        let recs = vec![
            BiasRecord::new("a", 0.25, 0.1),
            BiasRecord::new("b", 0.1, 0.25),
            BiasRecord::new("c", 0.2, 0.2),
        ];
        let t = partition_direction(&recs, 0.1).unwrap();
        assert_eq!(t.bins.len(), 2);
        assert_eq!((t.bins[1].female, t.bins[1].male), (1, 1));
        assert_eq!(t.bins[0].balanced, 1);
        assert_eq!((t.female_total, t.male_total, t.balanced_count, t.total), (1, 1, 1, 3));
    }

    #[test]
    fn half_up_percentages() {
        assert_eq!(percent_half_up(285, 333), 85.59);
        assert_eq!(percent_half_up(48, 333), 14.41);
        assert_eq!(percent_half_up(321, 333), 96.40);
        assert_eq!(percent_half_up(12, 333), 3.60);
        assert_eq!(percent_half_up(1, 8), 12.5);
        assert_eq!(percent_half_up(1, 1), 100.0);
        assert_eq!(percent_half_up(0, 0), 0.0);
        // 1/6 = 16.666..% -> 16.67 ; 1/200 = 0.5% exactly
        assert_eq!(percent_half_up(1, 6), 16.67);
        assert_eq!(percent_half_up(1, 200), 0.5);
    }

    fn entry(src: &str, sg: GenderTag, dst: &str, dg: GenderTag) -> LexiconEntry {
        LexiconEntry {
            source: WordEntry {
                surface: src.into(),
                language: "en".into(),
                gender: sg,
            },
            target: Some(WordEntry {
                surface: dst.into(),
                language: "it".into(),
                gender: dg,
            }),
            provenance: Provenance::Given,
        }
    }

    #[test]
    fn shift_matrix_single_entry() {
        let lex = BilingualLexicon::new(
            "en",
            "it",
            vec![entry(
                "architect",
                GenderTag::Neutral,
                "architetto",
                GenderTag::Masculine,
            )],
        )
        .unwrap();
        let m = gender_shift_matrix(&lex).unwrap();
        assert_eq!(m.counts[0][1], 1);
        assert_eq!(m.percentages[0][1], 100.0);
        assert_eq!(m.grand_total, 1);
        assert_eq!(
            m.examples[0][1],
            vec![("architect".to_owned(), "architetto".to_owned())]
        );
    }

    #[test]
    fn shift_matrix_rejects_unknown() {
        let mut e = entry("cat", GenderTag::Neutral, "gatto", GenderTag::Unknown);
        e.provenance = Provenance::Translated;
        let lex = BilingualLexicon::new("en", "it", vec![e]).unwrap();
        assert_eq!(gender_shift_matrix(&lex), Err(BiasError::UnknownGender("cat".into())));
    }

    #[test]
    fn sign_summary_examples() {
        let s = change_sign_summary(&[(0.1, -0.1)]);
        assert_eq!((s.female_channel.positive, s.female_channel.negative), (1, 0));
        assert_eq!((s.male_channel.positive, s.male_channel.negative), (0, 1));

        let s = change_sign_summary(&[(0.0, 0.0), (0.0, 0.0)]);
        assert_eq!(
            (
                s.female_channel.positive,
                s.female_channel.negative,
                s.female_channel.zero
            ),
            (0, 0, 2)
        );
        assert_eq!(s.male_channel.zero_pct, 100.0);
    }

    fn tiny_tables() -> (EmbeddingTable, EmbeddingTable) {
        let en = EmbeddingTable::from_entries(
            "en",
            3,
            [
                ("she", vec![1.0, 0.0, 0.0]),
                ("he", vec![0.0, 1.0, 0.0]),
                ("nurse", vec![0.8, 0.2, 0.3]),
                ("doctor", vec![0.2, 0.7, 0.3]),
            ],
        )
        .unwrap();
        let it = EmbeddingTable::from_entries(
            "it",
            3,
            [
                ("lei", vec![1.0, 0.1, 0.0]),
                ("lui", vec![0.1, 1.0, 0.0]),
                ("infermiera", vec![0.9, 0.3, 0.1]),
                ("medico", vec![0.3, 0.9, 0.1]),
                ("la", vec![0.5, 0.5, 0.5]),
            ],
        )
        .unwrap();
        (en, it)
    }

    #[test]
    fn audit_small() {
        let (en, it) = tiny_tables();
        let lex = BilingualLexicon::new(
            "en",
            "it",
            vec![
                entry("nurse", GenderTag::Neutral, "infermiera", GenderTag::Feminine),
                entry("doctor", GenderTag::Neutral, "medico", GenderTag::Masculine),
                entry("zebra", GenderTag::Neutral, "zebra", GenderTag::Feminine),
            ],
        )
        .unwrap();
        let (sp, _) = validate_target_pair(&en, "she", "he", 0.9).unwrap();
        let (tp, _) = validate_target_pair(&it, "lei", "lui", 0.9).unwrap();
        let r = audit(&en, &it, &lex, &sp, &tp, &AuditSettings::default()).unwrap();
        assert_eq!(r.source_records.len(), 2);
        assert_eq!(r.cross_records.len(), 2);
        assert_eq!(r.skipped.source_oov, vec!["zebra".to_owned()]);
        assert_eq!(r.skipped.target_oov, vec![("zebra".to_owned(), "zebra".to_owned())]);
        assert!(r.source_records[1].direction > 0.0); // nurse
        assert!(r.source_records[0].direction < 0.0); // doctor
        assert_eq!(r.shift_matrix.as_ref().unwrap().grand_total, 3);
        assert_eq!(r.sign_breakdown.len(), 9);
    }

    #[test]
    fn audit_multi_token_policies() {
        let (en, it) = tiny_tables();
        let lex = BilingualLexicon::new(
            "en",
            "it",
            vec![entry("nurse", GenderTag::Neutral, "la infermiera", GenderTag::Feminine)],
        )
        .unwrap();
        let (sp, _) = validate_target_pair(&en, "she", "he", 0.9).unwrap();
        let (tp, _) = validate_target_pair(&it, "lei", "lui", 0.9).unwrap();
        let mut settings = AuditSettings::default();
        assert_eq!(
            audit(&en, &it, &lex, &sp, &tp, &settings),
            Err(BiasError::EmptyWordSet("it".into()))
        );
        settings.multi_token = MultiTokenPolicy::Mean;
        let r = audit(&en, &it, &lex, &sp, &tp, &settings).unwrap();
        let mean = Vector::mean([it.lookup("la").unwrap(), it.lookup("infermiera").unwrap()]).unwrap();
        let expected = cosine(&mean, it.lookup("lei").unwrap()).unwrap();
        assert_eq!(r.target_records[0].sim_female, expected);
        settings.multi_token = MultiTokenPolicy::Head;
        let r = audit(&en, &it, &lex, &sp, &tp, &settings).unwrap();
        let expected = cosine(it.lookup("la").unwrap(), it.lookup("lei").unwrap()).unwrap();
        assert_eq!(r.target_records[0].sim_female, expected);
    }

    #[test]
    fn audit_all_oov_is_error() {
        let (en, it) = tiny_tables();
        let lex = BilingualLexicon::new(
            "en",
            "it",
            vec![entry("zebra", GenderTag::Neutral, "zebra", GenderTag::Feminine)],
        )
        .unwrap();
        let (sp, _) = validate_target_pair(&en, "she", "he", 0.9).unwrap();
        let (tp, _) = validate_target_pair(&it, "lei", "lui", 0.9).unwrap();
        let err = audit(&en, &it, &lex, &sp, &tp, &AuditSettings::default()).unwrap_err();
        assert_eq!(err.to_string(), "empty post-filter word set (en table)");
    }

    #[test]
    fn target_pair_validation() {
        let (en, _) = tiny_tables();
        assert_eq!(
            validate_target_pair(&en, "she", "SHE", 0.9),
            Err(BiasError::SameAnchors("she".into()))
        );
        assert!(matches!(
            validate_target_pair(&en, "she", "man", 0.9),
            Err(BiasError::MissingAnchor { .. })
        ));
        let twins = EmbeddingTable::from_entries("en", 2, [("a", vec![1.0, 1.0]), ("b", vec![2.0, 2.0])]).unwrap();
        let (pair, warning) = validate_target_pair(&twins, "a", "b", 0.9).unwrap();
        assert!((pair.internal_similarity - 1.0).abs() < 1e-15);
        assert!(warning.is_some());
    }
}
