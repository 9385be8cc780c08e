//! Translation providers used to fill missing lexicon targets.
//!
//! Two implementations ship: [`CacheProvider`], backed by a
//! `source<TAB>target` TSV file, and [`HttpProvider`], a generic JSON client
//! whose endpoint and field names come entirely from an [`HttpConfig`].
//! [`CachedProvider`] layers a cache in front of a live provider and
//! collects new translations so they can be written back.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::canonicalize;

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("translation transport failure: {0}")]
    Transport(String),
    #[error("malformed provider response: {0}")]
    BadResponse(String),
}

/// How multi-word translations are handled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MultiTokenPolicy {
    #[default]
    Reject,
    Head,
    Mean,
}

impl MultiTokenPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            MultiTokenPolicy::Reject => "reject",
            MultiTokenPolicy::Head => "head",
            MultiTokenPolicy::Mean => "mean",
        }
    }
}

impl fmt::Display for MultiTokenPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MultiTokenPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "reject" => Ok(MultiTokenPolicy::Reject),
            "head" => Ok(MultiTokenPolicy::Head),
            "mean" => Ok(MultiTokenPolicy::Mean),
            other => Err(format!(
                "unknown multi-token policy {other:?} (expected reject, head or mean)"
            )),
        }
    }
}

/// Source of translations. `Ok(None)` means "no translation for this word",
/// which is not an error.
pub trait TranslationProvider {
    fn translate(&self, word: &str, source_lang: &str, target_lang: &str) -> Result<Option<String>, ProviderError>;
}

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("malformed cache line {line}: expected 'source<TAB>target'")]
    Malformed { line: usize },
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

/// File-backed word-to-translation map.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CacheProvider {
    entries: BTreeMap<String, String>,
}

impl CacheProvider {
    pub fn from_pairs<I: IntoIterator<Item = (String, String)>>(pairs: I) -> Self {
        CacheProvider {
            entries: pairs.into_iter().map(|(s, t)| (canonicalize(&s), t)).collect(),
        }
    }

    /// Reads a cache TSV. An optional `source<TAB>target` header line is
    /// skipped; blank lines are ignored; later lines override earlier ones.
    pub fn read<R: BufRead>(reader: R) -> Result<Self, CacheError> {
        let mut entries = BTreeMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() || (i == 0 && line == "source\ttarget") {
                continue;
            }
            let (source, target) = line.split_once('\t').ok_or(CacheError::Malformed { line: i + 1 })?;
            if source.is_empty() || target.contains('\t') {
                return Err(CacheError::Malformed { line: i + 1 });
            }
            entries.insert(canonicalize(source), target.to_owned());
        }
        Ok(CacheProvider { entries })
    }

    pub fn write<W: Write>(&self, mut writer: W) -> io::Result<()> {
        writeln!(writer, "source\ttarget")?;
        for (s, t) in &self.entries {
            writeln!(writer, "{s}\t{t}")?;
        }
        writer.flush()
    }

    pub fn insert(&mut self, source: &str, target: &str) {
        self.entries.insert(canonicalize(source), target.to_owned());
    }

    pub fn get(&self, source: &str) -> Option<&str> {
        self.entries.get(&canonicalize(source)).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl TranslationProvider for CacheProvider {
    fn translate(&self, word: &str, _: &str, _: &str) -> Result<Option<String>, ProviderError> {
        Ok(self.get(word).map(str::to_owned))
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected key=value")]
    Syntax { line: usize },
    #[error("unknown key {key:?} at line {line}")]
    UnknownKey { line: usize, key: String },
    #[error("missing required key {0:?}")]
    Missing(&'static str),
    #[error("invalid value for {key}: {value:?}")]
    Invalid { key: &'static str, value: String },
}

/// Parses `key=value` lines. `#` starts a comment line; keys and values are
/// trimmed. Returned in file order.
pub fn parse_key_values(text: &str) -> Result<Vec<(usize, String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
        out.push((i + 1, k.trim().to_owned(), v.trim().to_owned()));
    }
    Ok(out)
}

/// Endpoint description for [`HttpProvider`].
///
/// The provider POSTs a JSON object `{text_field: word, source_field: src,
/// target_field: dst}` to `base_url` and reads the translation from
/// `response_field`, a dot-separated path into the response object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpConfig {
    pub base_url: String,
    pub auth_header: Option<(String, String)>,
    pub text_field: String,
    pub source_field: String,
    pub target_field: String,
    pub response_field: String,
    pub timeout_secs: u64,
}

impl HttpConfig {
    /// Reads a `key=value` config. Recognized keys: `base_url` (required),
    /// `auth_header_name`, `auth_header_value`, `text_field`,
    /// `source_field`, `target_field`, `response_field`, `timeout_secs`.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = HttpConfig {
            base_url: String::new(),
            auth_header: None,
            text_field: "text".into(),
            source_field: "source".into(),
            target_field: "target".into(),
            response_field: "translation".into(),
            timeout_secs: 30,
        };
        let mut auth_name = None;
        let mut auth_value = None;
        for (line, key, value) in parse_key_values(text)? {
            match key.as_str() {
                "base_url" => cfg.base_url = value,
                "auth_header_name" => auth_name = Some(value),
                "auth_header_value" => auth_value = Some(value),
                "text_field" => cfg.text_field = value,
                "source_field" => cfg.source_field = value,
                "target_field" => cfg.target_field = value,
                "response_field" => cfg.response_field = value,
                "timeout_secs" => {
                    cfg.timeout_secs = value.parse().map_err(|_| ConfigError::Invalid {
                        key: "timeout_secs",
                        value: value.clone(),
                    })?
                }
                _ => return Err(ConfigError::UnknownKey { line, key }),
            }
        }
        if cfg.base_url.is_empty() {
            return Err(ConfigError::Missing("base_url"));
        }
        if !(cfg.base_url.starts_with("http://") || cfg.base_url.starts_with("https://")) {
            return Err(ConfigError::Invalid {
                key: "base_url",
                value: cfg.base_url,
            });
        }
        cfg.auth_header = match (auth_name, auth_value) {
            (Some(n), Some(v)) => Some((n, v)),
            (None, None) => None,
            (Some(_), None) => return Err(ConfigError::Missing("auth_header_value")),
            (None, Some(_)) => return Err(ConfigError::Missing("auth_header_name")),
        };
        Ok(cfg)
    }
}

/// Generic JSON-over-HTTP translation client.
pub struct HttpProvider {
    config: HttpConfig,
    agent: ureq::Agent,
}

impl HttpProvider {
    pub fn new(config: HttpConfig) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build();
        HttpProvider { config, agent }
    }
}

fn lookup_path<'a>(value: &'a serde_json::Value, path: &str) -> Option<&'a serde_json::Value> {
    path.split('.').try_fold(value, |v, key| v.get(key))
}

impl TranslationProvider for HttpProvider {
    fn translate(&self, word: &str, source_lang: &str, target_lang: &str) -> Result<Option<String>, ProviderError> {
        let mut body = serde_json::Map::new();
        body.insert(self.config.text_field.clone(), word.into());
        body.insert(self.config.source_field.clone(), source_lang.into());
        body.insert(self.config.target_field.clone(), target_lang.into());

        let mut request = self.agent.post(&self.config.base_url);
        if let Some((name, value)) = &self.config.auth_header {
            request = request.set(name, value);
        }
        let response = match request.send_json(serde_json::Value::Object(body)) {
            Ok(r) => r,
            Err(ureq::Error::Status(404, _)) => return Ok(None),
            Err(ureq::Error::Status(code, _)) => return Err(ProviderError::Transport(format!("HTTP status {code}"))),
            Err(e) => return Err(ProviderError::Transport(e.to_string())),
        };
        let json: serde_json::Value = response
            .into_json()
            .map_err(|e| ProviderError::BadResponse(e.to_string()))?;
        match lookup_path(&json, &self.config.response_field) {
            None | Some(serde_json::Value::Null) => Ok(None),
            Some(serde_json::Value::String(s)) if s.trim().is_empty() => Ok(None),
            Some(serde_json::Value::String(s)) => Ok(Some(s.clone())),
            Some(other) => Err(ProviderError::BadResponse(format!(
                "field {:?} is not a string: {other}",
                self.config.response_field
            ))),
        }
    }
}

/// Cache in front of an optional live provider. Translations obtained from
/// the live provider are recorded and can be merged back into the cache.
pub struct CachedProvider<'a> {
    cache: &'a CacheProvider,
    live: Option<&'a dyn TranslationProvider>,
    fetched: RefCell<BTreeMap<String, String>>,
}

impl<'a> CachedProvider<'a> {
    pub fn new(cache: &'a CacheProvider, live: Option<&'a dyn TranslationProvider>) -> Self {
        CachedProvider {
            cache,
            live,
            fetched: RefCell::new(BTreeMap::new()),
        }
    }

    /// Translations fetched from the live provider, by canonical source word.
    pub fn fetched(&self) -> BTreeMap<String, String> {
        self.fetched.borrow().clone()
    }
}

impl TranslationProvider for CachedProvider<'_> {
    fn translate(&self, word: &str, source_lang: &str, target_lang: &str) -> Result<Option<String>, ProviderError> {
        if let Some(hit) = self.cache.get(word) {
            return Ok(Some(hit.to_owned()));
        }
        let Some(live) = self.live else {
            return Ok(None);
        };
        let result = live.translate(word, source_lang, target_lang)?;
        if let Some(t) = &result {
            self.fetched.borrow_mut().insert(canonicalize(word), t.clone());
        }
        Ok(result)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cache_read_write() {
        let c =
            CacheProvider::read("source\ttarget\nNurse\tinfermiera\r\n\narchitect\tarchitetto\n".as_bytes()).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.get("nurse"), Some("infermiera"));
        let mut out = Vec::new();
        c.write(&mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "source\ttarget\narchitect\tarchitetto\nnurse\tinfermiera\n"
        );
    }

    #[test]
    fn cache_malformed() {
        assert!(matches!(
            CacheProvider::read("nurse infermiera\n".as_bytes()),
            Err(CacheError::Malformed { line: 1 })
        ));
    }

    #[test]
    fn http_config() {
        let cfg = HttpConfig::parse(
            "# provider\nbase_url = http://localhost:1/t\nauth_header_name=X-Key\nauth_header_value=abc\nresponse_field=data.text\n",
        )
        .unwrap();
        assert_eq!(cfg.auth_header, Some(("X-Key".into(), "abc".into())));
        assert_eq!(cfg.response_field, "data.text");
        assert!(matches!(
            HttpConfig::parse("text_field=q\n"),
            Err(ConfigError::Missing("base_url"))
        ));
        assert!(matches!(
            HttpConfig::parse("base_url=http://x\nbogus=1\n"),
            Err(ConfigError::UnknownKey { line: 2, .. })
        ));
        assert!(matches!(
            HttpConfig::parse("base_url=http://x\nauth_header_name=a\n"),
            Err(ConfigError::Missing("auth_header_value"))
        ));
        assert!(matches!(
            HttpConfig::parse("base_url=ftp://x\n"),
            Err(ConfigError::Invalid { key: "base_url", .. })
        ));
    }

    struct Fixed;
    impl TranslationProvider for Fixed {
        fn translate(&self, word: &str, _: &str, _: &str) -> Result<Option<String>, ProviderError> {
            Ok((word == "doctor").then(|| "medico".to_owned()))
        }
    }

    #[test]
    fn cached_provider_records_live_hits() {
        let cache = CacheProvider::from_pairs([("nurse".to_owned(), "infermiera".to_owned())]);
        let live = Fixed;
        let p = CachedProvider::new(&cache, Some(&live));
        assert_eq!(p.translate("nurse", "en", "it").unwrap().as_deref(), Some("infermiera"));
        assert_eq!(p.translate("doctor", "en", "it").unwrap().as_deref(), Some("medico"));
        assert_eq!(p.translate("cat", "en", "it").unwrap(), None);
        assert_eq!(
            p.fetched().into_iter().collect::<Vec<_>>(),
            vec![("doctor".to_owned(), "medico".to_owned())]
        );

        let offline = CachedProvider::new(&cache, None);
        assert_eq!(offline.translate("doctor", "en", "it").unwrap(), None);
    }
}
