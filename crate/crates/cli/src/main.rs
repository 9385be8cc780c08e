mod config;

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lexbias::bias::{audit, validate_target_pair, AuditSettings, BiasError};
use lexbias::embedding::{canonicalize, parse_embedding_file, EmbeddingTable};
use lexbias::lexicon::{fill_translations, parse_lexicon, ParsedLexicon};
use lexbias::report::{render, ReportFormat};
use lexbias::simnet::{build_similarity_network, export_network, NetworkError, NetworkFormat, DEFAULT_THRESHOLD};
use lexbias::translate::{
    CacheProvider, CachedProvider, HttpConfig, HttpProvider, MultiTokenPolicy, TranslationProvider,
};
use thiserror::Error;

use crate::config::ConfigFile;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "lexbias",
    version,
    about = "Audit gender bias in bilingual embeddings and lexicons"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a lexicon against both vector tables and write reports.
    Audit(AuditArgs),
    /// Export the thresholded similarity network of a word list.
    Network(NetworkArgs),
    /// Fill empty lexicon targets from a cache or a live provider.
    Translate(TranslateArgs),
}

#[derive(Args)]
struct AuditArgs {
    /// key=value file supplying defaults for any flag below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    src_vec: Option<PathBuf>,
    #[arg(long)]
    dst_vec: Option<PathBuf>,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Translation cache used to fill empty targets before scoring.
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long)]
    src_lang: Option<String>,
    #[arg(long)]
    dst_lang: Option<String>,
    /// Anchors as female_src,male_src,female_dst,male_dst.
    #[arg(long)]
    targets: Option<String>,
    #[arg(long)]
    bin_width: Option<f64>,
    /// Similarity-network threshold recorded with the audit.
    #[arg(long)]
    threshold: Option<f64>,
    /// Intensity above which a word is flagged in reports.
    #[arg(long)]
    sig_threshold: Option<f64>,
    /// Anchor-pair similarity above which a warning is issued.
    #[arg(long)]
    max_internal: Option<f64>,
    /// reject, head or mean.
    #[arg(long)]
    multi_token: Option<String>,
    /// Comma list of json, csv, markdown.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

const AUDIT_KEYS: &[&str] = &[
    "src-vec",
    "dst-vec",
    "lexicon",
    "cache",
    "src-lang",
    "dst-lang",
    "targets",
    "bin-width",
    "threshold",
    "sig-threshold",
    "max-internal",
    "multi-token",
    "format",
    "out",
];

#[derive(Args)]
struct NetworkArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    src_vec: Option<PathBuf>,
    #[arg(long)]
    src_lang: Option<String>,
    /// One word per line.
    #[arg(long)]
    words: Option<PathBuf>,
    #[arg(long)]
    threshold: Option<f64>,
    /// csv or dot.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

const NETWORK_KEYS: &[&str] = &["src-vec", "src-lang", "words", "threshold", "format", "out"];

#[derive(Args)]
struct TranslateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    cache: Option<PathBuf>,
    /// key=value description of an HTTP translation endpoint.
    #[arg(long)]
    provider_config: Option<PathBuf>,
    #[arg(long)]
    src_lang: Option<String>,
    #[arg(long)]
    dst_lang: Option<String>,
    #[arg(long)]
    multi_token: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

const TRANSLATE_KEYS: &[&str] = &[
    "lexicon",
    "cache",
    "provider-config",
    "src-lang",
    "dst-lang",
    "multi-token",
    "out",
];

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = std::panic::catch_unwind(|| match cli.command {
        Command::Audit(args) => cmd_audit(args),
        Command::Network(args) => cmd_network(args),
        Command::Translate(args) => cmd_translate(args),
    });
    match outcome {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("lexbias: error: {e}");
            ExitCode::from(e.exit_code())
        }
        Err(_) => {
            eprintln!("lexbias: error: internal error: unexpected panic");
            ExitCode::from(2)
        }
    }
}

fn required(value: Option<PathBuf>, key: &str) -> Result<PathBuf, CliError> {
    value.ok_or_else(|| CliError::input(format!("missing required --{key}")))
}

fn in_unit_range(value: f64, key: &str) -> Result<f64, CliError> {
    if value.is_finite() && (-1.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(CliError::input(format!("--{key} {value} is outside [-1, 1]")))
    }
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn load_table(path: &Path, language: &str) -> Result<EmbeddingTable, CliError> {
    parse_embedding_file(open(path)?, language, None).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn load_lexicon(path: &Path, src: &str, dst: &str) -> Result<ParsedLexicon, CliError> {
    parse_lexicon(open(path)?, src, dst).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn load_cache(path: &Path) -> Result<CacheProvider, CliError> {
    CacheProvider::read(open(path)?).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn parse_policy(raw: Option<String>) -> Result<MultiTokenPolicy, CliError> {
    raw.map_or(Ok(MultiTokenPolicy::default()), |s| {
        s.parse()
            .map_err(|e: String| CliError::input(format!("--multi-token: {e}")))
    })
}

fn parse_targets(raw: &str) -> Result<[String; 4], CliError> {
    let parts: Vec<String> = raw.split(',').map(|s| s.trim().to_owned()).collect();
    match <[String; 4]>::try_from(parts) {
        Ok(words) if words.iter().all(|w| !w.is_empty()) => Ok(words),
        _ => Err(CliError::input(format!(
            "--targets expects four comma-separated words (female_src,male_src,female_dst,male_dst), got {raw:?}"
        ))),
    }
}

fn parse_formats(raw: &str) -> Result<Vec<ReportFormat>, CliError> {
    let mut formats = Vec::new();
    for part in raw.split(',').map(str::trim) {
        let format: ReportFormat = part.parse().map_err(|e| CliError::input(format!("--format: {e}")))?;
        if !formats.contains(&format) {
            formats.push(format);
        }
    }
    Ok(formats)
}

fn bias_error(e: BiasError) -> CliError {
    match e {
        BiasError::Similarity(inner) => CliError::Internal(inner.to_string()),
        other => CliError::input(other.to_string()),
    }
}

fn cmd_audit(args: AuditArgs) -> Result<(), CliError> {
    let cfg = ConfigFile::load(args.config.as_deref(), AUDIT_KEYS)?;
    let src_vec = required(cfg.path(args.src_vec, "src-vec"), "src-vec")?;
    let dst_vec = required(cfg.path(args.dst_vec, "dst-vec"), "dst-vec")?;
    let lexicon_path = required(cfg.path(args.lexicon, "lexicon"), "lexicon")?;
    let out = required(cfg.path(args.out, "out"), "out")?;
    let cache_path = cfg.path(args.cache, "cache");
    let src_lang = cfg.get(args.src_lang, "src-lang")?.unwrap_or_else(|| "en".to_owned());
    let dst_lang = cfg.get(args.dst_lang, "dst-lang")?.unwrap_or_else(|| "it".to_owned());
    let targets_raw = cfg
        .get(args.targets, "targets")?
        .unwrap_or_else(|| "she,he,lei,lui".to_owned());
    let targets = parse_targets(&targets_raw)?;
    let formats_raw = cfg.get(args.format, "format")?.unwrap_or_else(|| "json,csv".to_owned());
    let formats = parse_formats(&formats_raw)?;

    let defaults = AuditSettings::default();
    let bin_width = cfg.get(args.bin_width, "bin-width")?.unwrap_or(defaults.bin_width);
    if !(bin_width.is_finite() && bin_width > 0.0) {
        return Err(CliError::input(format!(
            "--bin-width must be positive, got {bin_width}"
        )));
    }
    let settings = AuditSettings {
        bin_width,
        network_threshold: in_unit_range(
            cfg.get(args.threshold, "threshold")?
                .unwrap_or(defaults.network_threshold),
            "threshold",
        )?,
        significance_threshold: in_unit_range(
            cfg.get(args.sig_threshold, "sig-threshold")?
                .unwrap_or(defaults.significance_threshold),
            "sig-threshold",
        )?,
        max_internal_similarity: in_unit_range(
            cfg.get(args.max_internal, "max-internal")?
                .unwrap_or(defaults.max_internal_similarity),
            "max-internal",
        )?,
        multi_token: parse_policy(cfg.get(args.multi_token, "multi-token")?)?,
    };

    let src_table = load_table(&src_vec, &src_lang)?;
    let dst_table = load_table(&dst_vec, &dst_lang)?;
    let parsed = load_lexicon(&lexicon_path, &src_lang, &dst_lang)?;
    let mut lexicon = parsed.lexicon;
    if let Some(path) = &cache_path {
        if !lexicon.is_complete() {
            let cache = load_cache(path)?;
            let (filled, _) = fill_translations(&lexicon, &cache, settings.multi_token)
                .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            lexicon = filled;
        }
    }

    let max_internal = settings.max_internal_similarity;
    let (src_pair, _) = validate_target_pair(&src_table, &targets[0], &targets[1], max_internal).map_err(bias_error)?;
    let (dst_pair, _) = validate_target_pair(&dst_table, &targets[2], &targets[3], max_internal).map_err(bias_error)?;
    let result = audit(&src_table, &dst_table, &lexicon, &src_pair, &dst_pair, &settings).map_err(bias_error)?;

    create_dir(&out)?;
    for format in formats {
        for file in render(&result, format) {
            write_file(&out.join(&file.name), &file.bytes)?;
        }
    }
    let mut effective = String::new();
    for (key, value) in [
        ("src-vec", src_vec.display().to_string()),
        ("dst-vec", dst_vec.display().to_string()),
        ("lexicon", lexicon_path.display().to_string()),
        ("cache", cache_path.map(|p| p.display().to_string()).unwrap_or_default()),
        ("src-lang", src_lang),
        ("dst-lang", dst_lang),
        ("targets", targets.join(",")),
        ("bin-width", settings.bin_width.to_string()),
        ("threshold", settings.network_threshold.to_string()),
        ("sig-threshold", settings.significance_threshold.to_string()),
        ("max-internal", settings.max_internal_similarity.to_string()),
        ("multi-token", settings.multi_token.to_string()),
        ("format", formats_raw),
    ] {
        let _ = writeln!(effective, "{key}={value}");
    }
    write_file(&out.join("effective_config.txt"), effective.as_bytes())?;

    let s = &result.skipped;
    eprintln!(
        "audit: {} lexicon entries ({} duplicates removed); {} {} words scored, {} OOV; {} {} words scored, {} OOV; {} cross-language pairs; {} untranslated; {} warnings",
        result.lexicon_size,
        parsed.duplicates.len(),
        result.source_records.len(),
        result.source_language,
        s.source_oov.len(),
        result.target_records.len(),
        result.target_language,
        s.target_oov.len(),
        result.cross_records.len(),
        s.untranslated.len(),
        result.warnings.len(),
    );
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(note) = &result.shift_matrix_note {
        eprintln!("note: {note}");
    }
    Ok(())
}

fn cmd_network(args: NetworkArgs) -> Result<(), CliError> {
    let cfg = ConfigFile::load(args.config.as_deref(), NETWORK_KEYS)?;
    let src_vec = required(cfg.path(args.src_vec, "src-vec"), "src-vec")?;
    let words_path = required(cfg.path(args.words, "words"), "words")?;
    let out = required(cfg.path(args.out, "out"), "out")?;
    let lang = cfg.get(args.src_lang, "src-lang")?.unwrap_or_else(|| "en".to_owned());
    let threshold = in_unit_range(
        cfg.get(args.threshold, "threshold")?.unwrap_or(DEFAULT_THRESHOLD),
        "threshold",
    )?;
    let format: NetworkFormat = cfg
        .get(args.format, "format")?
        .unwrap_or_else(|| "csv".to_owned())
        .parse()
        .map_err(|e: String| CliError::input(format!("--format: {e}")))?;

    let table = load_table(&src_vec, &lang)?;
    let text =
        fs::read_to_string(&words_path).map_err(|e| CliError::input(format!("{}: {e}", words_path.display())))?;
    let mut words = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let word = canonicalize(line.trim());
        if word.is_empty() {
            continue;
        }
        if table.contains(&word) {
            words.push(word);
        } else {
            eprintln!(
                "warning: {}:{}: {word:?} not in {}, skipped",
                words_path.display(),
                i + 1,
                src_vec.display()
            );
        }
    }
    let net = build_similarity_network(&table, &words, threshold).map_err(|e| match e {
        NetworkError::Similarity(inner) => CliError::Internal(inner.to_string()),
        other => CliError::input(format!("{}: {other}", words_path.display())),
    })?;

    create_dir(&out)?;
    let name = match format {
        NetworkFormat::EdgeCsv => "network.csv",
        NetworkFormat::Dot => "network.dot",
    };
    write_file(&out.join(name), &export_network(&net, format))?;
    eprintln!(
        "network: {} nodes, {} edges at threshold {threshold}",
        net.nodes.len(),
        net.edges.len()
    );
    Ok(())
}

fn cmd_translate(args: TranslateArgs) -> Result<(), CliError> {
    let cfg = ConfigFile::load(args.config.as_deref(), TRANSLATE_KEYS)?;
    let lexicon_path = required(cfg.path(args.lexicon, "lexicon"), "lexicon")?;
    let out = required(cfg.path(args.out, "out"), "out")?;
    let cache_path = cfg.path(args.cache, "cache");
    let provider_path = cfg.path(args.provider_config, "provider-config");
    let src_lang = cfg.get(args.src_lang, "src-lang")?.unwrap_or_else(|| "en".to_owned());
    let dst_lang = cfg.get(args.dst_lang, "dst-lang")?.unwrap_or_else(|| "it".to_owned());
    let policy = parse_policy(cfg.get(args.multi_token, "multi-token")?)?;
    if cache_path.is_none() && provider_path.is_none() {
        return Err(CliError::input("translate needs --cache, --provider-config or both"));
    }

    let live = match &provider_path {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            let config = HttpConfig::parse(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            Some(HttpProvider::new(config))
        }
        None => None,
    };
    let mut cache = match &cache_path {
        Some(path) => load_cache(path)?,
        None => CacheProvider::default(),
    };
    let parsed = load_lexicon(&lexicon_path, &src_lang, &dst_lang)?;

    let provider = CachedProvider::new(&cache, live.as_ref().map(|p| p as &dyn TranslationProvider));
    let (filled, report) = fill_translations(&parsed.lexicon, &provider, policy)
        .map_err(|e| CliError::input(format!("translation provider: {e}")))?;
    let fetched = provider.fetched();

    create_dir(&out)?;
    let mut bytes = Vec::new();
    filled
        .write_tsv(&mut bytes)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    write_file(&out.join("lexicon.tsv"), &bytes)?;

    for word in &report.unavailable {
        eprintln!("warning: no translation for {word:?}");
    }
    for (word, translation) in &report.policy_violations {
        eprintln!("warning: multi-word translation {translation:?} for {word:?} rejected by policy {policy}");
    }
    if !fetched.is_empty() {
        for (source, target) in &fetched {
            cache.insert(source, target);
        }
        let target = cache_path.unwrap_or_else(|| out.join("cache.tsv"));
        let mut bytes = Vec::new();
        cache.write(&mut bytes).map_err(|e| CliError::Internal(e.to_string()))?;
        write_file(&target, &bytes)?;
        eprintln!(
            "translate: {} new translations added to {}",
            fetched.len(),
            target.display()
        );
    }
    eprintln!(
        "translate: {} entries, {} filled, {} without translation, {} rejected as multi-word",
        filled.len(),
        report.filled.len(),
        report.unavailable.len(),
        report.policy_violations.len()
    );
    Ok(())
}
