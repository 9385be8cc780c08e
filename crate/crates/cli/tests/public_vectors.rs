//! Optional check against public pretrained 300-dim English vectors in the
//! usual text format (for example fastText `wiki-news-300d-1M.vec`).
//!
//! Point `LEXBIAS_PUBLIC_VECTORS` at the unpacked file and run with
//! `--ignored`. Only the sign of the direction is asserted.

use std::fs::File;
use std::io::{BufRead, BufReader};

use lexbias::bias::{compute_records, validate_target_pair};
use lexbias::embedding::EmbeddingTable;

const WORDS: [&str; 4] = ["she", "he", "nurse", "politician"];

#[test]
#[ignore = "needs a downloaded public vector file"]
fn public_vectors_direction_signs() {
    let path = std::env::var("LEXBIAS_PUBLIC_VECTORS").expect("set LEXBIAS_PUBLIC_VECTORS to a downloaded .vec file");
    let reader = BufReader::new(File::open(&path).unwrap());
    // Public files contain case variants that collide after lowercasing, so
    // only the exact lowercase rows of interest are kept.
    let mut rows = Vec::new();
    let mut dim = 0;
    for line in reader.lines().skip(1) {
        let line = line.unwrap();
        let mut fields = line.trim_end().split(' ');
        let word = fields.next().unwrap_or_default();
        if WORDS.contains(&word) && !rows.iter().any(|(w, _): &(String, Vec<f64>)| w == word) {
            let v: Vec<f64> = fields.map(|f| f.parse().unwrap()).collect();
            dim = v.len();
            rows.push((word.to_owned(), v));
        }
    }
    assert_eq!(rows.len(), WORDS.len(), "not all words found in {path}");
    let table = EmbeddingTable::from_entries("en", dim, rows).unwrap();
    let (pair, _) = validate_target_pair(&table, "she", "he", 0.9).unwrap();
    let (records, _) = compute_records(&table, &pair, &["nurse", "politician"]).unwrap();
    let direction = |w: &str| records.iter().find(|r| r.word == w).unwrap().direction;
    assert!(direction("nurse") > 0.0);
    assert!(direction("politician") < 0.0);
}
