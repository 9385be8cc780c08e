//! End-to-end audit over the calibrated fixtures in `fixtures/`.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use lexbias::bias::{audit, validate_target_pair, AuditResult, AuditSettings};
use lexbias::embedding::{parse_embedding_file, EmbeddingTable};
use lexbias::lexicon::{parse_lexicon, GenderTag, ParsedLexicon};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn table(name: &str, lang: &str) -> EmbeddingTable {
    parse_embedding_file(BufReader::new(File::open(fixture(name)).unwrap()), lang, None).unwrap()
}

fn lexicon() -> ParsedLexicon {
    parse_lexicon(
        BufReader::new(File::open(fixture("lexicon_en_it.tsv")).unwrap()),
        "en",
        "it",
    )
    .unwrap()
}

fn run() -> AuditResult {
    let en = table("en.vec", "en");
    let it = table("it.vec", "it");
    let (sp, _) = validate_target_pair(&en, "she", "he", 0.9).unwrap();
    let (tp, _) = validate_target_pair(&it, "lei", "lui", 0.9).unwrap();
    audit(&en, &it, &lexicon().lexicon, &sp, &tp, &AuditSettings::default()).unwrap()
}

#[test]
fn lexicon_dedup_counts() {
    let p = lexicon();
    assert_eq!(p.lexicon.len(), 333);
    assert_eq!(p.duplicates_removed(), 27);
    let count = |g| p.lexicon.entries().iter().filter(|e| e.source.gender == g).count();
    assert_eq!(count(GenderTag::Neutral), 157);
    assert_eq!(count(GenderTag::Masculine), 87);
    assert_eq!(count(GenderTag::Feminine), 89);
}

#[test]
fn anchor_internal_similarity() {
    let r = run();
    assert!((r.source_pair.internal_similarity - 0.61).abs() < 1e-6);
    assert!((r.target_pair.internal_similarity - 0.85).abs() < 1e-6);
    assert!(r.warnings.is_empty());
}

#[test]
fn histograms_and_directions() {
    let r = run();
    let counts = |h: &lexbias::Histogram| h.bins.iter().map(|b| b.count).collect::<Vec<_>>();
    assert_eq!(counts(&r.source_histogram), vec![123, 95, 78, 30, 7]);
    assert_eq!(counts(&r.target_histogram), vec![199, 107, 27]);
    let split = |d: &lexbias::DirectionTable| d.bins.iter().map(|b| (b.female, b.male)).collect::<Vec<_>>();
    assert_eq!(
        split(&r.source_directions),
        vec![(67, 56), (57, 38), (71, 7), (30, 0), (6, 1)]
    );
    assert_eq!(split(&r.target_directions), vec![(76, 123), (52, 55), (23, 4)]);
    assert_eq!(
        (r.source_directions.female_total, r.source_directions.male_total),
        (231, 102)
    );
    assert_eq!(
        (r.target_directions.female_total, r.target_directions.male_total),
        (151, 182)
    );
}

#[test]
fn representative_examples_land_in_their_bins() {
    let r = run();
    let bin_of = |records: &[lexbias::BiasRecord], w: &str| {
        let rec = records.iter().find(|x| x.word == w).unwrap();
        lexbias::bias::bin_index(rec.intensity, 0.1)
    };
    for (w, b) in [
        ("barber", 0),
        ("architect", 1),
        ("housewife", 2),
        ("actress", 3),
        ("sister", 4),
    ] {
        assert_eq!(bin_of(&r.source_records, w), b, "{w}");
    }
    for (w, b) in [("architetto", 0), ("ballerina", 1), ("infermiera", 2), ("zia", 2)] {
        assert_eq!(bin_of(&r.target_records, w), b, "{w}");
    }
}

#[test]
fn shift_matrix_and_signs() {
    let r = run();
    let m = r.shift_matrix.as_ref().unwrap();
    assert_eq!(m.counts, [[34, 91, 32], [6, 74, 7], [7, 13, 69]]);
    assert_eq!(m.grand_total, 333);
    let s = &r.sign_summary;
    assert_eq!((s.female_channel.positive, s.female_channel.negative), (285, 48));
    assert_eq!((s.male_channel.positive, s.male_channel.negative), (321, 12));
    let cells: Vec<_> = r
        .sign_breakdown
        .iter()
        .map(|row| {
            let (f, m) = (&row.summary.female_channel, &row.summary.male_channel);
            (f.positive, f.negative, m.positive, m.negative)
        })
        .collect();
    assert_eq!(
        cells,
        vec![
            (30, 4, 34, 0),
            (78, 13, 90, 1),
            (28, 4, 32, 0),
            (5, 1, 5, 1),
            (66, 8, 68, 6),
            (6, 1, 6, 1),
            (4, 3, 7, 0),
            (11, 2, 12, 1),
            (57, 12, 67, 2),
        ]
    );
}

#[test]
fn pinned_similarities() {
    let r = run();
    let cross = |w: &str| r.cross_records.iter().find(|c| c.source == w).unwrap();
    let nurse = cross("nurse");
    assert!((nurse.source_record.sim_female - 0.556).abs() < 1e-6);
    assert!((nurse.source_record.sim_male - 0.241).abs() < 1e-6);
    assert!((nurse.target_record.sim_female - 0.624).abs() < 1e-6);
    assert!((nurse.change_female - 0.068).abs() < 1e-6);
    let architect = cross("architect");
    assert!((architect.change_male - 0.357).abs() < 1e-6);
    assert!((architect.target_record.direction + 0.090).abs() < 1e-6);
}
