//! Bilingual word lists with gender annotations.
//!
//! A lexicon file is UTF-8 TSV with the header
//! `source<TAB>target<TAB>source_gender<TAB>target_gender`, optionally
//! followed by a fifth `provenance` column. The target columns may be left
//! empty for words that still need a translation.

use std::collections::HashSet;
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::canonicalize;
use crate::translate::{MultiTokenPolicy, ProviderError, TranslationProvider};

pub const LEXICON_HEADER: [&str; 4] = ["source", "target", "source_gender", "target_gender"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenderTag {
    Neutral,
    Masculine,
    Feminine,
    Unknown,
}

impl GenderTag {
    /// The three annotated genders in table order.
    pub const KNOWN: [GenderTag; 3] = [GenderTag::Neutral, GenderTag::Masculine, GenderTag::Feminine];

    pub fn as_str(self) -> &'static str {
        match self {
            GenderTag::Neutral => "neutral",
            GenderTag::Masculine => "masculine",
            GenderTag::Feminine => "feminine",
            GenderTag::Unknown => "unknown",
        }
    }

    /// Row/column index in a shift matrix; `None` for `Unknown`.
    pub fn index(self) -> Option<usize> {
        match self {
            GenderTag::Neutral => Some(0),
            GenderTag::Masculine => Some(1),
            GenderTag::Feminine => Some(2),
            GenderTag::Unknown => None,
        }
    }
}

impl fmt::Display for GenderTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GenderTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "neutral" | "n" => Ok(GenderTag::Neutral),
            "masculine" | "m" => Ok(GenderTag::Masculine),
            "feminine" | "f" => Ok(GenderTag::Feminine),
            "unknown" => Ok(GenderTag::Unknown),
            _ => Err(s.to_owned()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Given,
    Translated,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Given => "given",
            Provenance::Translated => "translated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WordEntry {
    pub surface: String,
    pub language: String,
    pub gender: GenderTag,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub source: WordEntry,
    /// `None` until a translation is supplied.
    pub target: Option<WordEntry>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BilingualLexicon {
    source_language: String,
    target_language: String,
    entries: Vec<LexiconEntry>,
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("malformed header at line 1: {0:?}")]
    MalformedHeader(String),
    #[error("wrong field count at line {line}: expected {expected}, found {found}")]
    FieldCount { line: usize, expected: usize, found: usize },
    #[error("unknown gender {value:?} at line {line}")]
    UnknownGender { line: usize, value: String },
    #[error("unknown provenance {value:?} at line {line}")]
    UnknownProvenance { line: usize, value: String },
    #[error("empty source field at line {line}")]
    EmptySource { line: usize },
    #[error("target gender given without a target word at line {line}")]
    GenderWithoutTarget { line: usize },
    #[error("gender 'unknown' is only allowed on translated targets (line {line})")]
    UnknownNotAllowed { line: usize },
    #[error("source and target language are both {0:?}")]
    SameLanguage(String),
    #[error("duplicate source word {0:?}")]
    DuplicateSource(String),
    #[error("invalid UTF-8 at line {line}")]
    InvalidUtf8 { line: usize },
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

/// Result of [`parse_lexicon`]: the lexicon plus the duplicates that were
/// dropped (canonical surfaces, one per dropped row).
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedLexicon {
    pub lexicon: BilingualLexicon,
    pub duplicates: Vec<String>,
}

impl ParsedLexicon {
    pub fn duplicates_removed(&self) -> usize {
        self.duplicates.len()
    }
}

impl BilingualLexicon {
    /// Builds a lexicon, sorting entries by source surface. Duplicate
    /// sources are rejected; use [`parse_lexicon`] for first-wins dedup.
    pub fn new(
        source_language: &str,
        target_language: &str,
        mut entries: Vec<LexiconEntry>,
    ) -> Result<Self, LexiconError> {
        if source_language == target_language {
            return Err(LexiconError::SameLanguage(source_language.to_owned()));
        }
        entries.sort_by(|a, b| a.source.surface.cmp(&b.source.surface));
        if let Some(w) = entries.windows(2).find(|w| w[0].source.surface == w[1].source.surface) {
            return Err(LexiconError::DuplicateSource(w[0].source.surface.clone()));
        }
        Ok(BilingualLexicon {
            source_language: source_language.to_owned(),
            target_language: target_language.to_owned(),
            entries,
        })
    }

    pub fn source_language(&self) -> &str {
        &self.source_language
    }

    pub fn target_language(&self) -> &str {
        &self.target_language
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, source: &str) -> Option<&LexiconEntry> {
        let key = canonicalize(source);
        self.entries
            .binary_search_by(|e| e.source.surface.as_str().cmp(&key))
            .ok()
            .map(|i| &self.entries[i])
    }

    pub fn is_complete(&self) -> bool {
        self.entries.iter().all(|e| e.target.is_some())
    }

    /// Writes the lexicon as five-column TSV (with provenance).
    pub fn write_tsv<W: Write>(&self, mut writer: W) -> io::Result<()> {
        writeln!(writer, "{}\tprovenance", LEXICON_HEADER.join("\t"))?;
        for e in &self.entries {
            let (target, target_gender) = match &e.target {
                Some(t) => (t.surface.as_str(), t.gender.as_str()),
                None => ("", ""),
            };
            writeln!(
                writer,
                "{}\t{}\t{}\t{}\t{}",
                e.source.surface,
                target,
                e.source.gender,
                target_gender,
                e.provenance.as_str()
            )?;
        }
        writer.flush()
    }
}

/// Canonicalizes every word and drops repeats, keeping first occurrences in
/// input order. Returns the survivors and the number removed.
pub fn dedupe_and_canonicalize<S: AsRef<str>>(words: &[S]) -> (Vec<String>, usize) {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for w in words {
        let c = canonicalize(w.as_ref());
        if seen.insert(c.clone()) {
            out.push(c);
        }
    }
    let removed = words.len() - out.len();
    (out, removed)
}

fn parse_gender(line: usize, value: &str) -> Result<GenderTag, LexiconError> {
    value.parse().map_err(|_| LexiconError::UnknownGender {
        line,
        value: value.to_owned(),
    })
}

/// Parses a lexicon TSV.
///
/// Rows are canonicalized, deduplicated on source surface (first occurrence
/// wins) and sorted by source surface. Rows without a provenance column get
/// `translated` when the target gender is `unknown`, `given` otherwise.
pub fn parse_lexicon<R: BufRead>(
    mut reader: R,
    source_language: &str,
    target_language: &str,
) -> Result<ParsedLexicon, LexiconError> {
    let mut lines = Vec::new();
    let mut buf = Vec::new();
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        let n = lines.len() + 1;
        if buf.last() == Some(&b'\n') {
            buf.pop();
        }
        if buf.last() == Some(&b'\r') {
            buf.pop();
        }
        lines.push(String::from_utf8(buf.clone()).map_err(|_| LexiconError::InvalidUtf8 { line: n })?);
    }

    let header = lines.first().cloned().unwrap_or_default();
    let header_fields: Vec<&str> = header.split('\t').collect();
    let width = match header_fields.as_slice() {
        h if h == LEXICON_HEADER => 4,
        [a, b, c, d, e] if [*a, *b, *c, *d] == LEXICON_HEADER && *e == "provenance" => 5,
        _ => return Err(LexiconError::MalformedHeader(header)),
    };

    let mut seen = HashSet::new();
    let mut duplicates = Vec::new();
    let mut entries = Vec::new();
    for (idx, line) in lines.iter().enumerate().skip(1) {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != width {
            return Err(LexiconError::FieldCount {
                line: line_no,
                expected: width,
                found: fields.len(),
            });
        }
        let source = canonicalize(fields[0].trim());
        if source.is_empty() {
            return Err(LexiconError::EmptySource { line: line_no });
        }
        let source_gender = parse_gender(line_no, fields[2])?;
        if source_gender == GenderTag::Unknown {
            return Err(LexiconError::UnknownNotAllowed { line: line_no });
        }
        let target = canonicalize(fields[1].trim());
        let target_gender = fields[3].trim();
        let explicit_provenance = if width == 5 {
            Some(match fields[4].trim() {
                "given" => Provenance::Given,
                "translated" => Provenance::Translated,
                other => {
                    return Err(LexiconError::UnknownProvenance {
                        line: line_no,
                        value: other.to_owned(),
                    })
                }
            })
        } else {
            None
        };

        let (target, provenance) = if target.is_empty() {
            if !target_gender.is_empty() {
                return Err(LexiconError::GenderWithoutTarget { line: line_no });
            }
            (None, explicit_provenance.unwrap_or(Provenance::Given))
        } else {
            let gender = parse_gender(line_no, target_gender)?;
            let provenance = explicit_provenance.unwrap_or(if gender == GenderTag::Unknown {
                Provenance::Translated
            } else {
                Provenance::Given
            });
            if gender == GenderTag::Unknown && provenance != Provenance::Translated {
                return Err(LexiconError::UnknownNotAllowed { line: line_no });
            }
            (
                Some(WordEntry {
                    surface: target,
                    language: target_language.to_owned(),
                    gender,
                }),
                provenance,
            )
        };

        if !seen.insert(source.clone()) {
            duplicates.push(source);
            continue;
        }
        entries.push(LexiconEntry {
            source: WordEntry {
                surface: source,
                language: source_language.to_owned(),
                gender: source_gender,
            },
            target,
            provenance,
        });
    }

    Ok(ParsedLexicon {
        lexicon: BilingualLexicon::new(source_language, target_language, entries)?,
        duplicates,
    })
}

/// Outcome of [`fill_translations`] besides the lexicon itself.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FillReport {
    /// Source words that received a translation.
    pub filled: Vec<String>,
    /// Source words the provider had no translation for.
    pub unavailable: Vec<String>,
    /// (source, offending translation) pairs rejected by the multi-token policy.
    pub policy_violations: Vec<(String, String)>,
}

/// Fills empty targets using `provider`.
///
/// Filled entries get provenance `translated` and gender `unknown`. Entries
/// that already have a target are never touched. Under
/// [`MultiTokenPolicy::Reject`] a multi-word translation leaves the entry
/// empty and is recorded as a violation; `Head` keeps the first token;
/// `Mean` keeps the whole phrase for downstream vector averaging.
pub fn fill_translations<P: TranslationProvider + ?Sized>(
    lexicon: &BilingualLexicon,
    provider: &P,
    policy: MultiTokenPolicy,
) -> Result<(BilingualLexicon, FillReport), ProviderError> {
    let mut report = FillReport::default();
    let mut entries = lexicon.entries.clone();
    for entry in entries.iter_mut().filter(|e| e.target.is_none()) {
        let word = &entry.source.surface;
        let translation = provider.translate(word, &lexicon.source_language, &lexicon.target_language)?;
        let Some(raw) = translation else {
            report.unavailable.push(word.clone());
            continue;
        };
        let tokens: Vec<String> = canonicalize(raw.trim()).split_whitespace().map(str::to_owned).collect();
        let surface = match (tokens.len(), policy) {
            (0, _) => {
                report.unavailable.push(word.clone());
                continue;
            }
            (1, _) => tokens[0].clone(),
            (_, MultiTokenPolicy::Reject) => {
                report.policy_violations.push((word.clone(), raw));
                continue;
            }
            (_, MultiTokenPolicy::Head) => tokens[0].clone(),
            (_, MultiTokenPolicy::Mean) => tokens.join(" "),
        };
        entry.target = Some(WordEntry {
            surface,
            language: lexicon.target_language.clone(),
            gender: GenderTag::Unknown,
        });
        entry.provenance = Provenance::Translated;
        report.filled.push(word.clone());
    }
    let filled = BilingualLexicon {
        source_language: lexicon.source_language.clone(),
        target_language: lexicon.target_language.clone(),
        entries,
    };
    Ok((filled, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::translate::CacheProvider;

    const HEADER: &str = "source\ttarget\tsource_gender\ttarget_gender\n";

    fn parse(body: &str) -> Result<ParsedLexicon, LexiconError> {
        parse_lexicon(format!("{HEADER}{body}").as_bytes(), "en", "it")
    }

    #[test]
    fn single_row() {
        let p = parse("nurse\tinfermiera\tneutral\tfeminine\n").unwrap();
        assert_eq!(p.lexicon.len(), 1);
        assert_eq!(p.duplicates_removed(), 0);
        let e = &p.lexicon.entries()[0];
        assert_eq!(e.source.surface, "nurse");
        assert_eq!(e.source.gender, GenderTag::Neutral);
        let t = e.target.as_ref().unwrap();
        assert_eq!((t.surface.as_str(), t.gender), ("infermiera", GenderTag::Feminine));
        assert_eq!(e.provenance, Provenance::Given);
    }

    #[test]
    fn duplicate_rows_counted() {
        let p = parse("cat\tgatto\tneutral\tmasculine\nCat\tgatto\tneutral\tmasculine\n").unwrap();
        assert_eq!(p.lexicon.len(), 1);
        assert_eq!(p.duplicates, vec!["cat".to_owned()]);
    }

    #[test]
    fn first_occurrence_wins() {
        let p = parse("cat\tgatto\tneutral\tmasculine\ncat\tgatta\tneutral\tfeminine\n").unwrap();
        assert_eq!(p.lexicon.entries()[0].target.as_ref().unwrap().surface, "gatto");
    }

    #[test]
    fn header_errors() {
        assert!(matches!(
            parse_lexicon("source\ttarget\n".as_bytes(), "en", "it"),
            Err(LexiconError::MalformedHeader(_))
        ));
        assert!(matches!(
            parse_lexicon("".as_bytes(), "en", "it"),
            Err(LexiconError::MalformedHeader(_))
        ));
    }

    #[test]
    fn row_errors() {
        assert!(matches!(
            parse("cat\tgatto\tneutral\tmale\n"),
            Err(LexiconError::UnknownGender { line: 2, .. })
        ));
        assert!(matches!(
            parse("\tgatto\tneutral\tmasculine\n"),
            Err(LexiconError::EmptySource { line: 2 })
        ));
        assert!(matches!(
            parse("cat\tgatto\tneutral\n"),
            Err(LexiconError::FieldCount { line: 2, .. })
        ));
        assert!(matches!(
            parse("cat\t\tneutral\tmasculine\n"),
            Err(LexiconError::GenderWithoutTarget { line: 2 })
        ));
        assert!(matches!(
            parse("cat\tgatto\tunknown\tmasculine\n"),
            Err(LexiconError::UnknownNotAllowed { line: 2 })
        ));
    }

    #[test]
    fn unknown_target_gender_implies_translated() {
        let p = parse("cat\tgatto\tneutral\tunknown\n").unwrap();
        assert_eq!(p.lexicon.entries()[0].provenance, Provenance::Translated);
        let five = "source\ttarget\tsource_gender\ttarget_gender\tprovenance\ncat\tgatto\tneutral\tunknown\tgiven\n";
        assert!(matches!(
            parse_lexicon(five.as_bytes(), "en", "it"),
            Err(LexiconError::UnknownNotAllowed { line: 2 })
        ));
    }

    #[test]
    fn empty_target_allowed() {
        let p = parse("architect\t\tneutral\t\n").unwrap();
        assert!(p.lexicon.entries()[0].target.is_none());
        assert!(!p.lexicon.is_complete());
    }

    #[test]
    fn sorted_and_order_independent() {
        let a = parse("zebra\tzebra\tneutral\tfeminine\napple\tmela\tneutral\tfeminine\n").unwrap();
        let b = parse("apple\tmela\tneutral\tfeminine\nzebra\tzebra\tneutral\tfeminine\n").unwrap();
        assert_eq!(a.lexicon, b.lexicon);
        assert_eq!(a.lexicon.entries()[0].source.surface, "apple");
    }

    #[test]
    fn dedupe_examples() {
        assert_eq!(
            dedupe_and_canonicalize(&["She", "she", "he"]),
            (vec!["she".to_owned(), "he".to_owned()], 1)
        );
        let empty: [&str; 0] = [];
        assert_eq!(dedupe_and_canonicalize(&empty), (vec![], 0));
    }

    #[test]
    fn write_then_parse() {
        let p = parse("architect\t\tneutral\t\nnurse\tinfermiera\tneutral\tfeminine\ncat\tgatto\tneutral\tunknown\n")
            .unwrap();
        let mut out = Vec::new();
        p.lexicon.write_tsv(&mut out).unwrap();
        let again = parse_lexicon(out.as_slice(), "en", "it").unwrap();
        assert_eq!(again.lexicon, p.lexicon);
    }

    fn cache(pairs: &[(&str, &str)]) -> CacheProvider {
        CacheProvider::from_pairs(pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())))
    }

    #[test]
    fn fill_from_cache() {
        let lex = parse("architect\t\tneutral\t\n").unwrap().lexicon;
        let (filled, report) =
            fill_translations(&lex, &cache(&[("architect", "architetto")]), MultiTokenPolicy::Reject).unwrap();
        let e = &filled.entries()[0];
        assert_eq!(e.provenance, Provenance::Translated);
        let t = e.target.as_ref().unwrap();
        assert_eq!((t.surface.as_str(), t.gender), ("architetto", GenderTag::Unknown));
        assert_eq!(report.filled, vec!["architect".to_owned()]);
    }

    #[test]
    fn complete_lexicon_unchanged() {
        let lex = parse("nurse\tinfermiera\tneutral\tfeminine\n").unwrap().lexicon;
        let (filled, report) =
            fill_translations(&lex, &cache(&[("nurse", "infermiere")]), MultiTokenPolicy::Reject).unwrap();
        assert_eq!(filled, lex);
        assert_eq!(report, FillReport::default());
    }

    #[test]
    fn multi_token_policies() {
        let lex = parse("nurse\t\tneutral\t\n").unwrap().lexicon;
        let provider = cache(&[("nurse", "la infermiera")]);

        let (filled, report) = fill_translations(&lex, &provider, MultiTokenPolicy::Reject).unwrap();
        assert!(filled.entries()[0].target.is_none());
        assert_eq!(
            report.policy_violations,
            vec![("nurse".to_owned(), "la infermiera".to_owned())]
        );

        let (filled, _) = fill_translations(&lex, &provider, MultiTokenPolicy::Head).unwrap();
        assert_eq!(filled.entries()[0].target.as_ref().unwrap().surface, "la");

        let (filled, _) = fill_translations(&lex, &provider, MultiTokenPolicy::Mean).unwrap();
        assert_eq!(filled.entries()[0].target.as_ref().unwrap().surface, "la infermiera");
    }

    #[test]
    fn unavailable_words_reported() {
        let lex = parse("architect\t\tneutral\t\nnurse\t\tneutral\t\n").unwrap().lexicon;
        let (filled, report) =
            fill_translations(&lex, &cache(&[("nurse", "infermiera")]), MultiTokenPolicy::Reject).unwrap();
        assert_eq!(report.unavailable, vec!["architect".to_owned()]);
        assert!(filled.get("architect").unwrap().target.is_none());
        assert!(filled.get("nurse").unwrap().target.is_some());
    }
}
