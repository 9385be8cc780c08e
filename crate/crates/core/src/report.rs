//! Rendering of audit results as JSON, a bundle of CSV files, or Markdown.
//!
//! All renderers are pure: the same [`AuditResult`] always yields the same
//! bytes. CSV and Markdown print similarities with six fixed decimals and
//! percentages with two; JSON keeps full `f64` precision and parses back to
//! an identical result.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bias::{AuditResult, BiasRecord, DirectionTable, Histogram, SignSummary, SCHEMA_VERSION};
use crate::lexicon::GenderTag;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("unknown report format {0:?} (expected json, csv or markdown)")]
    UnknownFormat(String),
    #[error("invalid audit json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema_version {0} (this build reads {SCHEMA_VERSION})")]
    SchemaVersion(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReportFormat {
    Json,
    CsvBundle,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" | "csv-bundle" => Ok(ReportFormat::CsvBundle),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(ReportError::UnknownFormat(other.to_owned())),
        }
    }
}

/// One output artifact: a file name relative to the output directory and
/// its contents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedFile {
    pub name: String,
    pub bytes: Vec<u8>,
}

/// Point of a similarity scatter plot: male-anchor similarity on the
/// x-axis, female-anchor similarity on the y-axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterRow {
    pub word: String,
    pub sim_male: f64,
    pub sim_female: f64,
    /// Signed distance from the diagonal, equal to the record's direction.
    /// Positive values sit above the diagonal (closer to the female anchor).
    pub diagonal_deviation: f64,
}

/// Scatter rows for `records`, sorted by word.
pub fn scatter_data(records: &[BiasRecord]) -> Vec<ScatterRow> {
    let mut rows: Vec<ScatterRow> = records
        .iter()
        .map(|r| ScatterRow {
            word: r.word.clone(),
            sim_male: r.sim_male,
            sim_female: r.sim_female,
            diagonal_deviation: r.direction,
        })
        .collect();
    rows.sort_by(|a, b| a.word.cmp(&b.word));
    rows
}

pub fn render(result: &AuditResult, format: ReportFormat) -> Vec<RenderedFile> {
    match format {
        ReportFormat::Json => vec![RenderedFile {
            name: "audit.json".into(),
            bytes: render_json(result),
        }],
        ReportFormat::CsvBundle => render_csv_bundle(result),
        ReportFormat::Markdown => vec![RenderedFile {
            name: "report.md".into(),
            bytes: render_markdown(result).into_bytes(),
        }],
    }
}

pub fn render_json(result: &AuditResult) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(result).expect("audit result serializes");
    bytes.push(b'\n');
    bytes
}

/// Parses JSON produced by [`render_json`].
pub fn parse_json(bytes: &[u8]) -> Result<AuditResult, ReportError> {
    #[derive(Deserialize)]
    struct Version {
        schema_version: u32,
    }
    let v: Version = serde_json::from_slice(bytes)?;
    if v.schema_version != SCHEMA_VERSION {
        return Err(ReportError::SchemaVersion(v.schema_version));
    }
    Ok(serde_json::from_slice(bytes)?)
}

fn f6(x: f64) -> String {
    format!("{x:.6}")
}

fn pct(x: f64) -> String {
    format!("{x:.2}")
}

fn csv_file<const N: usize>(name: &str, header: [&str; N], rows: Vec<[String; N]>) -> RenderedFile {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    RenderedFile {
        name: name.to_owned(),
        bytes: w.into_inner().expect("in-memory flush"),
    }
}

fn records_csv(name: &str, records: &[BiasRecord]) -> RenderedFile {
    csv_file(
        name,
        ["word", "sim_female", "sim_male", "intensity", "direction"],
        records
            .iter()
            .map(|r| {
                [
                    r.word.clone(),
                    f6(r.sim_female),
                    f6(r.sim_male),
                    f6(r.intensity),
                    f6(r.direction),
                ]
            })
            .collect(),
    )
}

fn histogram_csv(name: &str, h: &Histogram) -> RenderedFile {
    csv_file(
        name,
        ["bin", "lower", "upper", "count", "examples"],
        h.bins
            .iter()
            .enumerate()
            .map(|(i, b)| {
                [
                    (i + 1).to_string(),
                    f6(b.lower),
                    f6(b.upper),
                    b.count.to_string(),
                    b.examples.join(";"),
                ]
            })
            .collect(),
    )
}

fn directions_csv(name: &str, d: &DirectionTable) -> RenderedFile {
    csv_file(
        name,
        ["bin", "lower", "upper", "female", "male", "balanced", "total"],
        d.bins
            .iter()
            .enumerate()
            .map(|(i, b)| {
                [
                    (i + 1).to_string(),
                    f6(b.lower),
                    f6(b.upper),
                    b.female.to_string(),
                    b.male.to_string(),
                    b.balanced.to_string(),
                    b.total().to_string(),
                ]
            })
            .collect(),
    )
}

fn scatter_csv(name: &str, records: &[BiasRecord]) -> RenderedFile {
    csv_file(
        name,
        ["word", "sim_male", "sim_female", "diagonal_deviation"],
        scatter_data(records)
            .into_iter()
            .map(|r| [r.word, f6(r.sim_male), f6(r.sim_female), f6(r.diagonal_deviation)])
            .collect(),
    )
}

fn render_csv_bundle(r: &AuditResult) -> Vec<RenderedFile> {
    let s = &r.settings;
    let mut files = vec![
        csv_file(
            "settings.csv",
            ["key", "value"],
            vec![
                ["schema_version".into(), r.schema_version.to_string()],
                ["source_language".into(), r.source_language.clone()],
                ["target_language".into(), r.target_language.clone()],
                ["lexicon_size".into(), r.lexicon_size.to_string()],
                ["bin_width".into(), f6(s.bin_width)],
                ["network_threshold".into(), f6(s.network_threshold)],
                ["significance_threshold".into(), f6(s.significance_threshold)],
                ["max_internal_similarity".into(), f6(s.max_internal_similarity)],
                ["multi_token".into(), s.multi_token.to_string()],
                ["source_female_anchor".into(), r.source_pair.female_anchor.clone()],
                ["source_male_anchor".into(), r.source_pair.male_anchor.clone()],
                [
                    "source_internal_similarity".into(),
                    f6(r.source_pair.internal_similarity),
                ],
                ["target_female_anchor".into(), r.target_pair.female_anchor.clone()],
                ["target_male_anchor".into(), r.target_pair.male_anchor.clone()],
                [
                    "target_internal_similarity".into(),
                    f6(r.target_pair.internal_similarity),
                ],
            ],
        ),
        records_csv("source_records.csv", &r.source_records),
        records_csv("target_records.csv", &r.target_records),
        csv_file(
            "cross_records.csv",
            [
                "source",
                "target",
                "source_gender",
                "target_gender",
                "change_female",
                "change_male",
            ],
            r.cross_records
                .iter()
                .map(|c| {
                    [
                        c.source.clone(),
                        c.target.clone(),
                        c.source_gender.to_string(),
                        c.target_gender.to_string(),
                        f6(c.change_female),
                        f6(c.change_male),
                    ]
                })
                .collect(),
        ),
        histogram_csv("source_histogram.csv", &r.source_histogram),
        histogram_csv("target_histogram.csv", &r.target_histogram),
        directions_csv("source_directions.csv", &r.source_directions),
        directions_csv("target_directions.csv", &r.target_directions),
        scatter_csv("source_scatter.csv", &r.source_records),
        scatter_csv("target_scatter.csv", &r.target_records),
    ];

    let mut shift_rows = Vec::new();
    if let Some(m) = &r.shift_matrix {
        for (i, pre) in GenderTag::KNOWN.iter().enumerate() {
            for (j, post) in GenderTag::KNOWN.iter().enumerate() {
                shift_rows.push([
                    pre.to_string(),
                    post.to_string(),
                    m.counts[i][j].to_string(),
                    pct(m.percentages[i][j]),
                    m.examples[i][j]
                        .iter()
                        .map(|(s, t)| format!("{s} -> {t}"))
                        .collect::<Vec<_>>()
                        .join(";"),
                ]);
            }
        }
    }
    files.push(csv_file(
        "shift_matrix.csv",
        ["pre_gender", "post_gender", "count", "percent", "examples"],
        shift_rows,
    ));

    let channel_rows = |label: &str, s: &SignSummary| {
        [("female", &s.female_channel), ("male", &s.male_channel)].map(|(ch, c)| {
            [
                label.to_owned(),
                ch.to_owned(),
                c.positive.to_string(),
                c.negative.to_string(),
                c.zero.to_string(),
                c.total.to_string(),
                pct(c.positive_pct),
                pct(c.negative_pct),
                pct(c.zero_pct),
            ]
        })
    };
    let mut sign_rows: Vec<[String; 9]> = Vec::new();
    for row in &r.sign_breakdown {
        sign_rows.extend(channel_rows(&format!("{}->{}", row.pre, row.post), &row.summary));
    }
    sign_rows.extend(channel_rows("total", &r.sign_summary));
    files.push(csv_file(
        "sign_summary.csv",
        [
            "cell",
            "channel",
            "positive",
            "negative",
            "zero",
            "total",
            "positive_pct",
            "negative_pct",
            "zero_pct",
        ],
        sign_rows,
    ));

    let sk = &r.skipped;
    let mut skipped: Vec<[String; 3]> = Vec::new();
    skipped.extend(
        sk.source_oov
            .iter()
            .map(|w| ["source_oov".into(), w.clone(), String::new()]),
    );
    skipped.extend(
        sk.target_oov
            .iter()
            .map(|(s, t)| ["target_oov".into(), s.clone(), t.clone()]),
    );
    skipped.extend(
        sk.untranslated
            .iter()
            .map(|w| ["untranslated".into(), w.clone(), String::new()]),
    );
    skipped.extend(
        sk.multi_token_rejected
            .iter()
            .map(|(s, t)| ["multi_token_rejected".into(), s.clone(), t.clone()]),
    );
    files.push(csv_file("skipped.csv", ["kind", "source", "target"], skipped));
    files
}

fn md_escape(s: &str) -> String {
    s.replace('|', "\\|")
}

fn md_records(out: &mut String, title: &str, records: &[BiasRecord], female: &str, male: &str, sig: f64) {
    let _ = writeln!(out, "## {title}\n");
    let _ = writeln!(
        out,
        "| Word | Similarity with {female} | Similarity with {male} | Direction |"
    );
    let _ = writeln!(out, "|---|---|---|---|");
    for r in records {
        let (sf, sm) = (f6(r.sim_female), f6(r.sim_male));
        if r.intensity > sig {
            let _ = writeln!(
                out,
                "| **{}** | **{sf}** | **{sm}** | **{}** |",
                md_escape(&r.word),
                f6(r.direction)
            );
        } else {
            let _ = writeln!(out, "| {} | {sf} | {sm} | {} |", md_escape(&r.word), f6(r.direction));
        }
    }
    let _ = writeln!(
        out,
        "\nBold rows differ by more than {} between the two anchors.\n",
        f6(sig)
    );
}

fn md_histogram(out: &mut String, title: &str, h: &Histogram) {
    let _ = writeln!(out, "## {title}\n");
    let _ = writeln!(out, "| Bin | Range | Words Count | Examples |");
    let _ = writeln!(out, "|---|---|---|---|");
    for (i, b) in h.bins.iter().enumerate() {
        let _ = writeln!(
            out,
            "| {} | {} - {} | {} | {} |",
            i + 1,
            f6(b.lower),
            f6(b.upper),
            b.count,
            md_escape(&b.examples.join(", "))
        );
    }
    let _ = writeln!(out, "| Total | | {} | |\n", h.total);
}

fn md_directions(out: &mut String, title: &str, d: &DirectionTable) {
    let _ = writeln!(out, "## {title}\n");
    let _ = writeln!(
        out,
        "| Bin | Range | Female-directed | Male-directed | Balanced | Total |"
    );
    let _ = writeln!(out, "|---|---|---|---|---|---|");
    for (i, b) in d.bins.iter().enumerate() {
        let _ = writeln!(
            out,
            "| {} | {} - {} | {} | {} | {} | {} |",
            i + 1,
            f6(b.lower),
            f6(b.upper),
            b.female,
            b.male,
            b.balanced,
            b.total()
        );
    }
    let _ = writeln!(
        out,
        "| Total | | {} | {} | {} | {} |\n",
        d.female_total, d.male_total, d.balanced_count, d.total
    );
}

pub fn render_markdown(r: &AuditResult) -> String {
    let s = &r.settings;
    let sp = &r.source_pair;
    let tp = &r.target_pair;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# Gender bias audit: {} -> {}\n",
        r.source_language, r.target_language
    );

    let _ = writeln!(out, "## Settings\n");
    let _ = writeln!(out, "| Setting | Value |\n|---|---|");
    let _ = writeln!(out, "| schema_version | {} |", r.schema_version);
    let _ = writeln!(out, "| lexicon_size | {} |", r.lexicon_size);
    let _ = writeln!(out, "| bin_width | {} |", f6(s.bin_width));
    let _ = writeln!(out, "| network_threshold | {} |", f6(s.network_threshold));
    let _ = writeln!(out, "| significance_threshold | {} |", f6(s.significance_threshold));
    let _ = writeln!(out, "| max_internal_similarity | {} |", f6(s.max_internal_similarity));
    let _ = writeln!(out, "| multi_token | {} |", s.multi_token);
    for (label, p) in [("source", sp), ("target", tp)] {
        let _ = writeln!(
            out,
            "| {label} anchors (female/male) | {}/{} (internal similarity {}) |",
            md_escape(&p.female_anchor),
            md_escape(&p.male_anchor),
            f6(p.internal_similarity)
        );
    }
    let _ = writeln!(
        out,
        "\nDirection is similarity to the female anchor minus similarity to the male anchor. \
         Positive values are female-directed and plot above the diagonal of the scatter data \
         (x = male similarity, y = female similarity); negative values are male-directed.\n"
    );

    md_records(
        &mut out,
        &format!("Similarity scores ({})", r.source_language),
        &r.source_records,
        &sp.female_anchor,
        &sp.male_anchor,
        s.significance_threshold,
    );
    md_records(
        &mut out,
        &format!("Similarity scores ({})", r.target_language),
        &r.target_records,
        &tp.female_anchor,
        &tp.male_anchor,
        s.significance_threshold,
    );
    md_histogram(
        &mut out,
        &format!("Bias intensity bins ({})", r.source_language),
        &r.source_histogram,
    );
    md_directions(
        &mut out,
        &format!("Bias direction bins ({})", r.source_language),
        &r.source_directions,
    );
    md_histogram(
        &mut out,
        &format!("Bias intensity bins ({})", r.target_language),
        &r.target_histogram,
    );
    md_directions(
        &mut out,
        &format!("Bias direction bins ({})", r.target_language),
        &r.target_directions,
    );

    let _ = writeln!(out, "## Post-translation gender shifts\n");
    match &r.shift_matrix {
        Some(m) => {
            let _ = writeln!(out, "| Pre gender | Count | % | Post gender | Count | % | Examples |");
            let _ = writeln!(out, "|---|---|---|---|---|---|---|");
            for (i, pre) in GenderTag::KNOWN.iter().enumerate() {
                for (j, post) in GenderTag::KNOWN.iter().enumerate() {
                    let examples = m.examples[i][j]
                        .iter()
                        .map(|(a, b)| format!("{} → {}", md_escape(a), md_escape(b)))
                        .collect::<Vec<_>>()
                        .join(", ");
                    let _ = writeln!(
                        out,
                        "| {pre} | {} | {} | {post} | {} | {} | {examples} |",
                        m.row_totals[i],
                        pct(m.row_percentages[i]),
                        m.counts[i][j],
                        pct(m.percentages[i][j]),
                    );
                }
            }
            let total_pct = if m.grand_total > 0 { 100.0 } else { 0.0 };
            let _ = writeln!(out, "| Total | {} | {} | | | | |\n", m.grand_total, pct(total_pct));
        }
        None => {
            let note = r.shift_matrix_note.as_deref().unwrap_or("no annotated entries");
            let _ = writeln!(out, "Not computed: {}\n", md_escape(note));
        }
    }

    let _ = writeln!(out, "## Post-translation similarity changes\n");
    let fa = format!("{} - {}", tp.female_anchor, sp.female_anchor);
    let ma = format!("{} - {}", tp.male_anchor, sp.male_anchor);
    let _ = writeln!(
        out,
        "| Pre gender | Post gender | {fa} + | {fa} - | {fa} 0 | {ma} + | {ma} - | {ma} 0 |"
    );
    let _ = writeln!(out, "|---|---|---|---|---|---|---|---|");
    for row in &r.sign_breakdown {
        let (f, m) = (&row.summary.female_channel, &row.summary.male_channel);
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} | {} | {} |",
            row.pre, row.post, f.positive, f.negative, f.zero, m.positive, m.negative, m.zero
        );
    }
    let (f, m) = (&r.sign_summary.female_channel, &r.sign_summary.male_channel);
    let _ = writeln!(
        out,
        "| Total | | {} | {} | {} | {} | {} | {} |",
        f.positive, f.negative, f.zero, m.positive, m.negative, m.zero
    );
    let _ = writeln!(
        out,
        "| Percentage | | {} | {} | {} | {} | {} | {} |\n",
        pct(f.positive_pct),
        pct(f.negative_pct),
        pct(f.zero_pct),
        pct(m.positive_pct),
        pct(m.negative_pct),
        pct(m.zero_pct)
    );
    let _ = writeln!(
        out,
        "Percentages are rounded half-up to two decimals; tables built by truncation can differ by up to 0.01.\n"
    );

    let sk = &r.skipped;
    let _ = writeln!(out, "## Skipped words\n");
    let _ = writeln!(out, "| Reason | Count | Words |\n|---|---|---|");
    let pairs = |v: &[(String, String)]| {
        v.iter()
            .map(|(a, b)| format!("{a} → {b}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let _ = writeln!(
        out,
        "| source OOV | {} | {} |",
        sk.source_oov.len(),
        md_escape(&sk.source_oov.join(", "))
    );
    let _ = writeln!(
        out,
        "| target OOV | {} | {} |",
        sk.target_oov.len(),
        md_escape(&pairs(&sk.target_oov))
    );
    let _ = writeln!(
        out,
        "| untranslated | {} | {} |",
        sk.untranslated.len(),
        md_escape(&sk.untranslated.join(", "))
    );
    let _ = writeln!(
        out,
        "| multi-token rejected | {} | {} |\n",
        sk.multi_token_rejected.len(),
        md_escape(&pairs(&sk.multi_token_rejected))
    );

    if !r.warnings.is_empty() {
        let _ = writeln!(out, "## Warnings\n");
        for w in &r.warnings {
            let _ = writeln!(out, "- {}", md_escape(w));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bias::AuditSettings;

    #[test]
    fn scatter_row_from_record() {
        let rows = scatter_data(&[
            BiasRecord::new("nurse", 0.556, 0.241),
            BiasRecord::new("liberal", 0.2, 0.2),
        ]);
        assert_eq!(rows[0].word, "liberal");
        assert_eq!(rows[0].diagonal_deviation, 0.0);
        assert_eq!((rows[1].sim_male, rows[1].sim_female), (0.241, 0.556));
        assert!((rows[1].diagonal_deviation - 0.315).abs() < 1e-12);
    }

    #[test]
    fn empty_result_renders() {
        let empty = AuditResult::empty(AuditSettings::default());
        let json = render_json(&empty);
        let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["source_records"].as_array().unwrap().len(), 0);
        assert_eq!(v["cross_records"].as_array().unwrap().len(), 0);
        assert_eq!(parse_json(&json).unwrap(), empty);
        assert!(render_markdown(&empty).contains("Not computed"));
        let files = render(&empty, ReportFormat::CsvBundle);
        let records = files.iter().find(|f| f.name == "source_records.csv").unwrap();
        assert_eq!(records.bytes, b"word,sim_female,sim_male,intensity,direction\n");
    }

    #[test]
    fn format_names() {
        assert_eq!("json".parse::<ReportFormat>().unwrap(), ReportFormat::Json);
        assert_eq!("csv".parse::<ReportFormat>().unwrap(), ReportFormat::CsvBundle);
        assert_eq!("markdown".parse::<ReportFormat>().unwrap(), ReportFormat::Markdown);
        assert!(matches!(
            "pdf".parse::<ReportFormat>(),
            Err(ReportError::UnknownFormat(_))
        ));
    }

    #[test]
    fn schema_version_checked() {
        let mut r = AuditResult::empty(AuditSettings::default());
        r.schema_version = 7;
        assert!(matches!(
            parse_json(&render_json(&r)),
            Err(ReportError::SchemaVersion(7))
        ));
    }
}
