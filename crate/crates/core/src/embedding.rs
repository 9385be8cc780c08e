//! Plain-text word-vector tables.
//!
//! The accepted format is the usual `.vec` text layout: a header line
//! `<count> <dim>` followed by one record per line, `<word> <v1> ... <vD>`,
//! with fields separated by exactly one ASCII space. A trailing CR on any
//! line is stripped.
//!
//! Words are canonicalized (NFC, then lowercase) when a table is loaded and
//! again on every lookup, so `lookup("CAT")` finds the vector stored for
//! `cat`.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

/// Canonical form of a word: Unicode NFC followed by lowercasing.
pub fn canonicalize(word: &str) -> String {
    word.nfc().collect::<String>().to_lowercase()
}

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("malformed header at line 1: {0}")]
    MalformedHeader(String),
    #[error("wrong component count at line {line}: expected {expected}, found {found}")]
    WrongComponentCount { line: usize, expected: usize, found: usize },
    #[error("invalid component at line {line}: {value:?}")]
    InvalidComponent { line: usize, value: String },
    #[error("non-finite component at line {line}")]
    NonFinite { line: usize },
    #[error("duplicate word {word:?} at line {line} (first seen at line {first})")]
    DuplicateWord { word: String, line: usize, first: usize },
    #[error("zero vector for word {word:?} at line {line}")]
    ZeroVector { word: String, line: usize },
    #[error("empty word at line {line}")]
    EmptyWord { line: usize },
    #[error("dimension mismatch at line 1: file declares {found}, expected {expected}")]
    DimMismatch { expected: usize, found: usize },
    #[error("record count mismatch: header declares {declared}, file has {found}")]
    CountMismatch { declared: usize, found: usize },
    #[error("invalid UTF-8 at line {line}")]
    InvalidUtf8 { line: usize },
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

impl EmbeddingError {
    /// Line number the error refers to, when there is one.
    pub fn line(&self) -> Option<usize> {
        match self {
            EmbeddingError::MalformedHeader(_) | EmbeddingError::DimMismatch { .. } => Some(1),
            EmbeddingError::WrongComponentCount { line, .. }
            | EmbeddingError::InvalidComponent { line, .. }
            | EmbeddingError::NonFinite { line }
            | EmbeddingError::DuplicateWord { line, .. }
            | EmbeddingError::ZeroVector { line, .. }
            | EmbeddingError::EmptyWord { line }
            | EmbeddingError::InvalidUtf8 { line } => Some(*line),
            EmbeddingError::CountMismatch { .. } | EmbeddingError::Io(_) => None,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VectorError {
    #[error("zero vector")]
    ZeroVector,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("empty vector")]
    Empty,
    #[error("non-finite component")]
    NonFinite,
}

/// A dense embedding vector with finite components.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(components: Vec<f64>) -> Result<Self, VectorError> {
        if components.is_empty() {
            return Err(VectorError::Empty);
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(VectorError::NonFinite);
        }
        Ok(Vector(components))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    pub fn dot(&self, other: &Vector) -> Result<f64, VectorError> {
        if self.dim() != other.dim() {
            return Err(VectorError::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum())
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Component-wise mean of several vectors of equal dimension.
    pub fn mean<'a, I>(vectors: I) -> Result<Vector, VectorError>
    where
        I: IntoIterator<Item = &'a Vector>,
    {
        let mut acc: Option<Vec<f64>> = None;
        let mut n = 0usize;
        for v in vectors {
            match acc.as_mut() {
                None => acc = Some(v.0.clone()),
                Some(a) => {
                    if a.len() != v.dim() {
                        return Err(VectorError::DimensionMismatch(a.len(), v.dim()));
                    }
                    a.iter_mut().zip(&v.0).for_each(|(x, y)| *x += y);
                }
            }
            n += 1;
        }
        let mut acc = acc.ok_or(VectorError::Empty)?;
        acc.iter_mut().for_each(|x| *x /= n as f64);
        Vector::new(acc)
    }
}

/// Scale `v` to unit Euclidean norm.
pub fn normalize(v: &Vector) -> Result<Vector, VectorError> {
    let norm = v.norm();
    if norm == 0.0 {
        return Err(VectorError::ZeroVector);
    }
    Ok(Vector(v.0.iter().map(|c| c / norm).collect()))
}

/// Immutable word-to-vector map for one language.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    language: String,
    dim: usize,
    entries: BTreeMap<String, Vector>,
}

impl EmbeddingTable {
    /// Builds a table from in-memory entries, enforcing the same invariants
    /// as the file parser. Words are canonicalized.
    pub fn from_entries<I, S>(language: &str, dim: usize, entries: I) -> Result<Self, EmbeddingError>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: AsRef<str>,
    {
        let mut builder = TableBuilder::new(language, dim);
        for (i, (word, components)) in entries.into_iter().enumerate() {
            builder.insert(i + 1, word.as_ref(), components)?;
        }
        Ok(builder.finish())
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Vector stored under the canonical form of `word`, if any.
    pub fn lookup(&self, word: &str) -> Option<&Vector> {
        self.entries.get(&canonicalize(word))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.lookup(word).is_some()
    }

    /// Entries in lexicographic word order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &Vector)> {
        self.entries.iter().map(|(w, v)| (w.as_str(), v))
    }

    /// Returns a copy with every vector multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, EmbeddingError> {
        Self::from_entries(
            &self.language,
            self.dim,
            self.iter()
                .map(|(w, v)| (w.to_owned(), v.as_slice().iter().map(|c| c * factor).collect())),
        )
    }
}

struct TableBuilder {
    language: String,
    dim: usize,
    entries: BTreeMap<String, Vector>,
    first_seen: BTreeMap<String, usize>,
}

impl TableBuilder {
    fn new(language: &str, dim: usize) -> Self {
        TableBuilder {
            language: language.to_owned(),
            dim,
            entries: BTreeMap::new(),
            first_seen: BTreeMap::new(),
        }
    }

    fn insert(&mut self, line: usize, word: &str, components: Vec<f64>) -> Result<(), EmbeddingError> {
        let word = canonicalize(word);
        if word.is_empty() {
            return Err(EmbeddingError::EmptyWord { line });
        }
        if components.len() != self.dim {
            return Err(EmbeddingError::WrongComponentCount {
                line,
                expected: self.dim,
                found: components.len(),
            });
        }
        let vector = Vector::new(components).map_err(|_| EmbeddingError::NonFinite { line })?;
        if vector.is_zero() {
            return Err(EmbeddingError::ZeroVector { word, line });
        }
        if let Some(&first) = self.first_seen.get(&word) {
            return Err(EmbeddingError::DuplicateWord { word, line, first });
        }
        self.first_seen.insert(word.clone(), line);
        self.entries.insert(word, vector);
        Ok(())
    }

    fn finish(self) -> EmbeddingTable {
        EmbeddingTable {
            language: self.language,
            dim: self.dim,
            entries: self.entries,
        }
    }
}

fn read_line<R: BufRead>(reader: &mut R, buf: &mut Vec<u8>, line: usize) -> Result<Option<String>, EmbeddingError> {
    buf.clear();
    if reader.read_until(b'\n', buf)? == 0 {
        return Ok(None);
    }
    if buf.last() == Some(&b'\n') {
        buf.pop();
    }
    if buf.last() == Some(&b'\r') {
        buf.pop();
    }
    String::from_utf8(std::mem::take(buf))
        .map(Some)
        .map_err(|_| EmbeddingError::InvalidUtf8 { line })
}

/// Parses a text vector file into an [`EmbeddingTable`].
///
/// When `expected_dim` is given the header dimension must match it. The
/// number of records must equal the count declared in the header; a single
/// empty line at end of input is tolerated.
pub fn parse_embedding_file<R: BufRead>(
    mut reader: R,
    language: &str,
    expected_dim: Option<usize>,
) -> Result<EmbeddingTable, EmbeddingError> {
    let mut buf = Vec::new();
    let header =
        read_line(&mut reader, &mut buf, 1)?.ok_or_else(|| EmbeddingError::MalformedHeader("empty input".into()))?;
    let fields: Vec<&str> = header.split(' ').collect();
    let (count, dim) = match fields.as_slice() {
        [count, dim] => {
            let parse = |s: &str| {
                if !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) {
                    s.parse::<usize>().ok()
                } else {
                    None
                }
            };
            match (parse(count), parse(dim)) {
                (Some(c), Some(d)) if d > 0 => (c, d),
                _ => return Err(EmbeddingError::MalformedHeader(header.clone())),
            }
        }
        _ => return Err(EmbeddingError::MalformedHeader(header.clone())),
    };
    if let Some(expected) = expected_dim {
        if expected != dim {
            return Err(EmbeddingError::DimMismatch { expected, found: dim });
        }
    }

    let mut builder = TableBuilder::new(language, dim);
    let mut line_no = 1;
    let mut records = 0;
    let mut pending_blank: Option<usize> = None;
    while let Some(line) = read_line(&mut reader, &mut buf, line_no + 1)? {
        line_no += 1;
        if let Some(blank) = pending_blank.take() {
            // a blank line followed by more content is a malformed record
            return Err(EmbeddingError::WrongComponentCount {
                line: blank,
                expected: dim,
                found: 0,
            });
        }
        if line.is_empty() {
            pending_blank = Some(line_no);
            continue;
        }
        let mut fields = line.split(' ');
        let word = fields.next().unwrap_or_default();
        let mut components = Vec::with_capacity(dim);
        for field in fields {
            let value: f64 = field.parse().map_err(|_| EmbeddingError::InvalidComponent {
                line: line_no,
                value: field.to_owned(),
            })?;
            if !value.is_finite() {
                return Err(EmbeddingError::NonFinite { line: line_no });
            }
            components.push(value);
        }
        builder.insert(line_no, word, components)?;
        records += 1;
    }
    if records != count {
        return Err(EmbeddingError::CountMismatch {
            declared: count,
            found: records,
        });
    }
    Ok(builder.finish())
}

/// Writes `table` in the text format accepted by [`parse_embedding_file`].
///
/// Components use the shortest decimal form that parses back to the same
/// `f64`, so a write/parse cycle is lossless.
pub fn write_embedding_file<W: Write>(table: &EmbeddingTable, mut writer: W) -> io::Result<()> {
    writeln!(writer, "{} {}", table.len(), table.dim())?;
    for (word, vector) in table.iter() {
        write!(writer, "{word}")?;
        for c in vector.as_slice() {
            write!(writer, " {c:?}")?;
        }
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<EmbeddingTable, EmbeddingError> {
        parse_embedding_file(text.as_bytes(), "en", None)
    }

    #[test]
    fn minimal_file() {
        let t = parse("2 3\ncat 1 0 0\ndog 0 1 0\n").unwrap();
        assert_eq!(t.dim(), 3);
        assert_eq!(t.len(), 2);
        assert_eq!(t.lookup("cat").unwrap().as_slice(), &[1.0, 0.0, 0.0]);
        assert_eq!(t.lookup("CAT").unwrap().as_slice(), &[1.0, 0.0, 0.0]);
        assert!(t.lookup("bird").is_none());
    }

    #[test]
    fn crlf_and_missing_final_newline() {
        let t = parse("2 2\r\nCat 1 0\r\ndog 0 1").unwrap();
        assert!(t.contains("cat"));
        assert!(t.contains("dog"));
    }

    #[test]
    fn wrong_component_count() {
        let err = parse("1 3\ncat 1 0\n").unwrap_err();
        assert_eq!(err.to_string(), "wrong component count at line 2: expected 3, found 2");
        assert_eq!(err.line(), Some(2));
    }

    #[test]
    fn double_space_is_rejected() {
        let err = parse("1 2\ncat  1 0\n").unwrap_err();
        assert!(matches!(err, EmbeddingError::InvalidComponent { line: 2, .. }));
    }

    #[test]
    fn header_errors() {
        for bad in ["", "2\n", "a 3\n", "2 0\n", "2  3\n", "-1 3\n", "2 3 4\n"] {
            assert!(matches!(parse(bad), Err(EmbeddingError::MalformedHeader(_))), "{bad:?}");
        }
    }

    #[test]
    fn non_finite_components() {
        for v in ["NaN", "inf", "-inf", "1e400"] {
            let err = parse(&format!("1 2\ncat 1 {v}\n")).unwrap_err();
            assert!(matches!(err, EmbeddingError::NonFinite { line: 2 }), "{v}: {err}");
        }
    }

    #[test]
    fn duplicates_are_errors_even_across_case() {
        let err = parse("2 2\ncat 1 0\nCat 0 1\n").unwrap_err();
        match err {
            EmbeddingError::DuplicateWord { word, line, first } => {
                assert_eq!((word.as_str(), line, first), ("cat", 3, 2));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn zero_vector_rejected() {
        let err = parse("1 2\ncat 0 -0\n").unwrap_err();
        assert!(matches!(err, EmbeddingError::ZeroVector { line: 2, .. }));
    }

    #[test]
    fn dim_mismatch_with_expected() {
        let err = parse_embedding_file("1 2\ncat 1 0\n".as_bytes(), "en", Some(3)).unwrap_err();
        assert!(matches!(err, EmbeddingError::DimMismatch { expected: 3, found: 2 }));
    }

    #[test]
    fn count_mismatch_and_blank_lines() {
        assert!(matches!(
            parse("3 2\ncat 1 0\ndog 0 1\n"),
            Err(EmbeddingError::CountMismatch { declared: 3, found: 2 })
        ));
        assert!(matches!(
            parse("2 2\ncat 1 0\n\ndog 0 1\n"),
            Err(EmbeddingError::WrongComponentCount { line: 3, .. })
        ));
        assert!(parse("1 2\ncat 1 0\n\n").is_ok());
    }

    #[test]
    fn nfc_canonicalization() {
        // decomposed "é" (e + combining acute) and precomposed form are one word
        let t = parse("1 2\ncaffe\u{301} 1 0\n").unwrap();
        assert!(t.contains("caff\u{e9}"));
        assert!(t.contains("CAFF\u{c9}"));
    }

    #[test]
    fn normalize_examples() {
        let v = normalize(&Vector::new(vec![3.0, 4.0]).unwrap()).unwrap();
        assert!((v.as_slice()[0] - 0.6).abs() < 1e-15);
        assert!((v.as_slice()[1] - 0.8).abs() < 1e-15);
        let u = normalize(&Vector::new(vec![0.0, 0.0, 1.0]).unwrap()).unwrap();
        assert_eq!(u.as_slice(), &[0.0, 0.0, 1.0]);
        assert_eq!(
            normalize(&Vector::new(vec![0.0, 0.0]).unwrap()),
            Err(VectorError::ZeroVector)
        );
    }

    #[test]
    fn vector_mean() {
        let a = Vector::new(vec![1.0, 3.0]).unwrap();
        let b = Vector::new(vec![3.0, 5.0]).unwrap();
        assert_eq!(Vector::mean([&a, &b]).unwrap().as_slice(), &[2.0, 4.0]);
        assert_eq!(Vector::mean(std::iter::empty()), Err(VectorError::Empty));
    }
}
